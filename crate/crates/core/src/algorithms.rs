//! Online allocation policies behind a common interface, plus the integral
//! and fractional simulation runners. Budget-oblivious policies compile
//! against a view type with no budget field; the only budget signal they
//! receive is the disappearance of exhausted resources from the active set.

use crate::error::Error;
use crate::instance::{Instance, SeedVector};
use crate::scalar::Real;
use crate::Result;

/// Event tolerance for the fractional simulation. Budgets are snapped
/// exactly at exhaustion so error stays additive per segment.
pub const EVENT_EPS: f64 = 1e-9;

/// The perturbation schedule g(x) = e^{beta (x - 1)}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TradeoffFunction<F: Real> {
    beta: F,
}

impl<F: Real> TradeoffFunction<F> {
    /// Default parameter, the optimized value for the competitive constant.
    pub const DEFAULT_BETA: f64 = 1.15;

    pub fn new(beta: F) -> Result<Self> {
        if !(beta > F::zero()) || !beta.is_finite() {
            return Err(Error::invalid("beta", "tradeoff parameter must be positive and finite"));
        }
        Ok(TradeoffFunction { beta })
    }

    pub fn beta(&self) -> F {
        self.beta
    }

    pub fn eval(&self, x: F) -> F {
        (self.beta * (x - F::one())).exp()
    }

    /// Inverse on (0, 1]: the x with g(x) = v.
    pub fn inverse(&self, v: F) -> F {
        F::one() + v.ln() / self.beta
    }

    /// Integral of g over [a, b] in closed form.
    pub fn integral(&self, a: F, b: F) -> F {
        (self.eval(b) - self.eval(a)) / self.beta
    }
}

/// Tie rule shared by every policy: equal scores resolve to the lowest id.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum TieBreak {
    #[default]
    LowestId,
}

/// What a budget-oblivious policy sees on one arrival. No budget field.
pub struct ObliviousView<'a> {
    /// 1-based arrival index.
    pub arrival: usize,
    pub bids: &'a [f64],
    pub rewards: &'a [f64],
    /// Resources not yet declared out of budget.
    pub active: &'a [bool],
}

/// Budget-aware extension of the view.
pub struct AwareView<'a> {
    pub base: ObliviousView<'a>,
    pub remaining: &'a [f64],
    pub budgets: &'a [f64],
}

pub trait ObliviousPolicy {
    fn name(&self) -> &'static str;
    /// Resource to match, or none to skip the arrival.
    fn choose(&mut self, view: &ObliviousView) -> Option<usize>;
    /// Return to the pre-run state; policies with no mutable state keep the default.
    fn reset(&mut self) {}
}

pub trait AwarePolicy {
    fn name(&self) -> &'static str;
    fn choose(&mut self, view: &AwareView) -> Option<usize>;
    fn reset(&mut self) {}
}

fn argmax_positive(scores: impl Iterator<Item = (usize, f64)>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, s) in scores {
        if s <= 0.0 {
            continue;
        }
        match best {
            Some((_, bs)) if s <= bs => {}
            _ => best = Some((i, s)),
        }
    }
    best.map(|(i, _)| i)
}

/// Perturbed greedy: score b_{it} r_i (1 - g(y_i)) over active bidders.
pub struct GpgRule {
    tradeoff: TradeoffFunction<f64>,
    discounts: Vec<f64>,
}

impl GpgRule {
    pub fn new(tradeoff: TradeoffFunction<f64>, seeds: &SeedVector) -> Self {
        let discounts = seeds.values().iter().map(|&y| 1.0 - tradeoff.eval(y)).collect();
        GpgRule { tradeoff, discounts }
    }

    pub fn tradeoff(&self) -> &TradeoffFunction<f64> {
        &self.tradeoff
    }
}

impl ObliviousPolicy for GpgRule {
    fn name(&self) -> &'static str {
        "gpg"
    }

    fn choose(&mut self, view: &ObliviousView) -> Option<usize> {
        argmax_positive(view.bids.iter().enumerate().filter(|&(i, _)| view.active[i]).map(
            |(i, &b)| (i, b * view.rewards[i] * self.discounts[i]),
        ))
    }
}

/// Budget-oblivious greedy: score b_{it} r_i.
pub struct GreedyOblivious {
    pub tie_break: TieBreak,
}

impl GreedyOblivious {
    pub fn new(tie_break: TieBreak) -> Self {
        GreedyOblivious { tie_break }
    }
}

impl ObliviousPolicy for GreedyOblivious {
    fn name(&self) -> &'static str {
        "greedy-oblivious"
    }

    fn choose(&mut self, view: &ObliviousView) -> Option<usize> {
        argmax_positive(
            view.bids
                .iter()
                .enumerate()
                .filter(|&(i, _)| view.active[i])
                .map(|(i, &b)| (i, b * view.rewards[i])),
        )
    }
}

/// Budget-aware greedy: score min{b_{it}, B_i(t)} r_i.
pub struct GreedyAware;

impl AwarePolicy for GreedyAware {
    fn name(&self) -> &'static str {
        "greedy-aware"
    }

    fn choose(&mut self, view: &AwareView) -> Option<usize> {
        argmax_positive(
            view.base
                .bids
                .iter()
                .enumerate()
                .filter(|&(i, _)| view.base.active[i])
                .map(|(i, &b)| (i, b.min(view.remaining[i]) * view.base.rewards[i])),
        )
    }
}

/// Bid pricing with the balance discount 1 - e^{-B_i(t)/B_i}.
pub struct MsvvRule;

impl AwarePolicy for MsvvRule {
    fn name(&self) -> &'static str {
        "msvv"
    }

    fn choose(&mut self, view: &AwareView) -> Option<usize> {
        argmax_positive(view.base.bids.iter().enumerate().filter(|&(i, _)| view.base.active[i]).map(
            |(i, &b)| {
                let frac = if view.budgets[i] > 0.0 {
                    view.remaining[i] / view.budgets[i]
                } else {
                    0.0
                };
                (i, b * view.base.rewards[i] * (1.0 - (-frac).exp()))
            },
        ))
    }
}

/// One integral match.
#[derive(Debug, Clone, PartialEq)]
pub struct Match {
    pub resource: usize,
    /// Bid price b_{it} of the winning edge.
    pub price: f64,
    /// min{b_{it}, remaining budget}.
    pub paid: f64,
}

/// Result of an integral run.
#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    /// Per arrival (0-based index for arrival t = index + 1).
    pub matches: Vec<Option<Match>>,
    /// Units of each resource's budget consumed.
    pub consumed: Vec<f64>,
    /// Reward collected per resource.
    pub revenue: Vec<f64>,
    pub total: f64,
}

impl Allocation {
    /// Budget of resource i consumed before arrival t (1-based).
    pub fn x(&self, i: usize, t: usize) -> f64 {
        self.matches[..t.saturating_sub(1).min(self.matches.len())]
            .iter()
            .flatten()
            .filter(|m| m.resource == i)
            .map(|m| m.paid)
            .sum()
    }

    /// JSON-lines trace, one record per match.
    pub fn write_trace(&self, out: &mut dyn std::io::Write) -> Result<()> {
        for (idx, m) in self.matches.iter().enumerate() {
            if let Some(m) = m {
                let rec = serde_json::json!({
                    "t": idx + 1,
                    "i": m.resource,
                    "price": m.price,
                    "paid": m.paid,
                });
                writeln!(out, "{rec}")?;
            }
        }
        Ok(())
    }
}

/// One maximal stretch of continuous time allocated to a single resource.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub resource: usize,
    /// 1-based arrival whose interval [t, t+1) contains the segment.
    pub arrival: usize,
    pub start: f64,
    pub end: f64,
    /// b_{it} (end - start) units.
    pub consumed: f64,
}

impl Segment {
    pub fn rate(&self) -> f64 {
        self.consumed / (self.end - self.start)
    }
}

/// Result of a fractional run.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionalAllocation {
    pub segments: Vec<Segment>,
    pub consumed: Vec<f64>,
    /// Moment each resource ran out, if it did.
    pub exhausted_at: Vec<Option<f64>>,
    pub revenue: Vec<f64>,
    pub total: f64,
}

impl FractionalAllocation {
    /// x^f_i(tau): budget of resource i consumed strictly before time tau.
    pub fn consumed_before(&self, i: usize, tau: f64) -> f64 {
        let mut acc = 0.0;
        for seg in self.segments.iter().filter(|s| s.resource == i) {
            if seg.end <= tau {
                acc += seg.consumed;
            } else if seg.start < tau {
                acc += seg.rate() * (tau - seg.start);
            }
        }
        acc
    }

    /// Whether resource i is still in the availability set at time tau.
    pub fn available_at(&self, i: usize, tau: f64) -> bool {
        self.exhausted_at[i].map_or(true, |e| tau < e)
    }

    /// JSON-lines trace, one record per segment.
    pub fn write_trace(&self, out: &mut dyn std::io::Write) -> Result<()> {
        for seg in &self.segments {
            let rec = serde_json::json!({
                "t": seg.arrival,
                "i": seg.resource,
                "price": seg.rate(),
                "paid": seg.consumed,
                "tau1": seg.start,
                "tau2": seg.end,
            });
            writeln!(out, "{rec}")?;
        }
        Ok(())
    }
}

fn finish_integral(
    inst: &Instance,
    matches: Vec<Option<Match>>,
    consumed: Vec<f64>,
) -> Allocation {
    let revenue: Vec<f64> =
        consumed.iter().zip(inst.rewards()).map(|(&c, r)| c * r).collect();
    let total = revenue.iter().sum();
    Allocation { matches, consumed, revenue, total }
}

fn apply_match(
    inst: &Instance,
    t: usize,
    choice: Option<usize>,
    consumed: &mut [f64],
    active: &mut [bool],
) -> Option<Match> {
    let i = choice?;
    let price = inst.bid(i, t);
    if !active[i] || price <= 0.0 {
        return None;
    }
    let remaining = inst.budget(i) - consumed[i];
    debug_assert!(remaining > 0.0, "winner with no remaining budget");
    let paid = price.min(remaining);
    consumed[i] += paid;
    if consumed[i] >= inst.budget(i) {
        consumed[i] = inst.budget(i);
        active[i] = false;
    }
    Some(Match { resource: i, price, paid })
}

/// Drive a budget-oblivious policy over the full arrival sequence. The
/// runner owns the budgets; the policy only sees the shrinking active set.
pub fn run_oblivious(inst: &Instance, policy: &mut dyn ObliviousPolicy) -> Allocation {
    let n = inst.n();
    let rewards = inst.rewards();
    let mut consumed = vec![0.0; n];
    let mut active: Vec<bool> = inst.budgets().iter().map(|&b| b > 0.0).collect();
    let mut matches = Vec::with_capacity(inst.t_len());
    for t in 1..=inst.t_len() {
        let view = ObliviousView {
            arrival: t,
            bids: &inst.arrivals()[t - 1].bids,
            rewards: &rewards,
            active: &active,
        };
        let choice = policy.choose(&view);
        matches.push(apply_match(inst, t, choice, &mut consumed, &mut active));
    }
    finish_integral(inst, matches, consumed)
}

/// Drive a budget-aware policy. Refuses instances whose budgets are hidden.
pub fn run_aware(inst: &Instance, policy: &mut dyn AwarePolicy) -> Result<Allocation> {
    if inst.hidden_budgets() {
        return Err(Error::BudgetsHidden {
            label: inst.label().to_string(),
            policy: policy.name().to_string(),
        });
    }
    let n = inst.n();
    let rewards = inst.rewards();
    let budgets = inst.budgets();
    let mut consumed = vec![0.0; n];
    let mut active: Vec<bool> = budgets.iter().map(|&b| b > 0.0).collect();
    let mut matches = Vec::with_capacity(inst.t_len());
    for t in 1..=inst.t_len() {
        let remaining: Vec<f64> =
            budgets.iter().zip(&consumed).map(|(&b, &c)| b - c).collect();
        let view = AwareView {
            base: ObliviousView {
                arrival: t,
                bids: &inst.arrivals()[t - 1].bids,
                rewards: &rewards,
                active: &active,
            },
            remaining: &remaining,
            budgets: &budgets,
        };
        let choice = policy.choose(&view);
        matches.push(apply_match(inst, t, choice, &mut consumed, &mut active));
    }
    Ok(finish_integral(inst, matches, consumed))
}

fn check_seeds(inst: &Instance, seeds: &SeedVector) -> Result<()> {
    if seeds.len() != inst.n() {
        return Err(Error::SeedLength { expected: inst.n(), got: seeds.len() });
    }
    Ok(())
}

pub fn run_gpg(inst: &Instance, seeds: &SeedVector, beta: f64) -> Result<Allocation> {
    check_seeds(inst, seeds)?;
    let tradeoff = TradeoffFunction::new(beta)?;
    let mut policy = GpgRule::new(tradeoff, seeds);
    Ok(run_oblivious(inst, &mut policy))
}

pub fn run_greedy_oblivious(inst: &Instance, tie_break: TieBreak) -> Allocation {
    let mut policy = GreedyOblivious::new(tie_break);
    run_oblivious(inst, &mut policy)
}

pub fn run_greedy_aware(inst: &Instance) -> Result<Allocation> {
    run_aware(inst, &mut GreedyAware)
}

pub fn run_msvv(inst: &Instance) -> Result<Allocation> {
    run_aware(inst, &mut MsvvRule)
}

/// Event-driven fractional run: within each arrival interval [t, t+1) the
/// current argmax resource absorbs budget at rate b_{it} until the interval
/// ends or the resource exhausts, whichever comes first.
pub fn run_fgpg(inst: &Instance, seeds: &SeedVector, beta: f64) -> Result<FractionalAllocation> {
    check_seeds(inst, seeds)?;
    if inst.hidden_budgets() {
        return Err(Error::BudgetsHidden {
            label: inst.label().to_string(),
            policy: "fgpg".to_string(),
        });
    }
    let tradeoff = TradeoffFunction::new(beta)?;
    let n = inst.n();
    let discounts: Vec<f64> =
        seeds.values().iter().map(|&y| 1.0 - tradeoff.eval(y)).collect();
    let mut consumed = vec![0.0; n];
    let mut exhausted_at: Vec<Option<f64>> = vec![None; n];
    let mut active: Vec<bool> = inst.budgets().iter().map(|&b| b > 0.0).collect();
    let mut segments = Vec::new();
    for t in 1..=inst.t_len() {
        let bids = &inst.arrivals()[t - 1].bids;
        let mut tau = t as f64;
        let t_end = (t + 1) as f64;
        while t_end - tau > EVENT_EPS {
            let winner = argmax_positive(
                bids.iter()
                    .enumerate()
                    .filter(|&(i, _)| active[i])
                    .map(|(i, &b)| (i, b * inst.reward(i) * discounts[i])),
            );
            let Some(i) = winner else { break };
            let rate = bids[i];
            let remaining = inst.budget(i) - consumed[i];
            let duration = (t_end - tau).min(remaining / rate);
            let end = tau + duration;
            consumed[i] += rate * duration;
            segments.push(Segment {
                resource: i,
                arrival: t,
                start: tau,
                end,
                consumed: rate * duration,
            });
            tau = end;
            if inst.budget(i) - consumed[i] <= EVENT_EPS * inst.budget(i).max(1.0) {
                if let Some(last) = segments.last_mut() {
                    if last.resource == i {
                        // keep the segment ledger consistent with the snap
                        last.consumed += inst.budget(i) - consumed[i];
                    }
                }
                consumed[i] = inst.budget(i);
                exhausted_at[i] = Some(tau);
                active[i] = false;
            }
        }
    }
    let revenue: Vec<f64> =
        consumed.iter().zip(inst.rewards()).map(|(&c, r)| c * r).collect();
    let total = revenue.iter().sum();
    Ok(FractionalAllocation { segments, consumed, exhausted_at, revenue, total })
}

/// Recompute total revenue from the match list alone, replaying the capping
/// rule independently of the runner's bookkeeping.
pub fn evaluate(alloc: &Allocation, inst: &Instance) -> f64 {
    let mut consumed = vec![0.0; inst.n()];
    for m in alloc.matches.iter().flatten() {
        consumed[m.resource] += m.paid;
    }
    consumed
        .iter()
        .enumerate()
        .map(|(i, &c)| c.min(inst.budget(i)) * inst.reward(i))
        .sum()
}
