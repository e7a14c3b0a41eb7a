//! Classic primal-dual candidate built from the integral run's matches.
//! Its payment condition holds with factor 1 + gamma on every path, but
//! its coverage condition caps the certifiable ratio at 1/e on adversarial
//! instances, which is why the window-based certificate exists.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::algorithms::{run_gpg, TradeoffFunction};
use crate::certificate::{tol_for, CheckReport};
use crate::error::Error;
use crate::instance::{Instance, SeedVector};
use crate::Result;

/// One dual vector per side of the assignment LP.
#[derive(Debug, Clone, Serialize)]
pub struct ClassicDuals {
    pub lambda: Vec<f64>,
    pub theta: Vec<f64>,
}

impl ClassicDuals {
    /// Coverage condition: lambda_t + b_it theta_i >= alpha b_it r_i for
    /// every edge with a positive bid.
    pub fn check_coverage(&self, inst: &Instance, alpha: f64) -> CheckReport {
        let mut report = CheckReport::new("classic-coverage");
        for t in 1..=inst.t_len() {
            for i in 0..inst.n() {
                let b = inst.bid(i, t);
                if b <= 0.0 {
                    continue;
                }
                let need = alpha * b * inst.reward(i);
                report.require(
                    self.lambda[t - 1] + b * self.theta[i],
                    need,
                    tol_for(need),
                    || format!("edge i={i} t={t}"),
                );
            }
        }
        report
    }

    /// Dual objective sum(lambda) + sum(B_i theta_i).
    pub fn objective(&self, inst: &Instance) -> f64 {
        let lam: f64 = self.lambda.iter().sum();
        let th: f64 = self
            .theta
            .iter()
            .enumerate()
            .map(|(i, &v)| inst.budget(i) * v)
            .sum();
        lam + th
    }
}

/// Duals read off one integral run: a match (i, t) sets
/// lambda_t = b_it r_i (1 - g(y_i)) and adds (b_it / B_i) r_i g(y_i) to
/// theta_i. The payment condition
/// sum(lambda) + sum(B_i theta_i) <= (1 + gamma) ALG(Y) is checked along
/// with coverage at the requested alpha.
pub fn classic_pd_candidate(
    inst: &Instance,
    seeds: &SeedVector,
    beta: f64,
    alpha: f64,
) -> Result<(ClassicDuals, CheckReport)> {
    if inst.hidden_budgets() {
        return Err(Error::BudgetsHidden {
            label: inst.label().to_string(),
            policy: "classic-pd".to_string(),
        });
    }
    let tradeoff = TradeoffFunction::new(beta)?;
    let alloc = run_gpg(inst, seeds, beta)?;
    let sv = seeds.values();
    let mut duals = ClassicDuals {
        lambda: vec![0.0; inst.t_len()],
        theta: vec![0.0; inst.n()],
    };
    for (idx, m) in alloc.matches.iter().enumerate() {
        if let Some(m) = m {
            let i = m.resource;
            let g = tradeoff.eval(sv[i]);
            duals.lambda[idx] = m.price * inst.reward(i) * (1.0 - g);
            duals.theta[i] += m.price / inst.budget(i) * inst.reward(i) * g;
        }
    }

    let mut report = CheckReport::new("classic-pd");
    let payment = (1.0 + inst.gamma()) * alloc.total;
    report.require(payment, duals.objective(inst), tol_for(payment), || {
        "payment condition".to_string()
    });
    report.merge(duals.check_coverage(inst, alpha));
    Ok((duals, report))
}

/// Monte Carlo average of the per-seed duals, plus the mean reward of the
/// integral run.
pub fn classic_pd_average(
    inst: &Instance,
    beta: f64,
    trials: usize,
    rng_seed: u64,
) -> Result<(ClassicDuals, f64)> {
    if trials == 0 {
        return Err(Error::invalid("trials", "at least one trial is required"));
    }
    let mut lambda = vec![0.0f64; inst.t_len()];
    let mut theta = vec![0.0f64; inst.n()];
    let mut alg_sum = 0.0;
    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        rng.set_stream(trial as u64);
        let seeds = SeedVector::sample(inst.n(), &mut rng);
        let (duals, _) = classic_pd_candidate(inst, &seeds, beta, 0.0)?;
        for (acc, v) in lambda.iter_mut().zip(&duals.lambda) {
            *acc += v;
        }
        for (acc, v) in theta.iter_mut().zip(&duals.theta) {
            *acc += v;
        }
        alg_sum += duals.objective(inst) / (1.0 + inst.gamma());
    }
    let kf = trials as f64;
    for v in lambda.iter_mut().chain(theta.iter_mut()) {
        *v /= kf;
    }
    Ok((ClassicDuals { lambda, theta }, alg_sum / kf))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{gen_example1, gen_pd_obstruction, gen_random_smallbid};

    fn sampled(n: usize, seed: u64) -> SeedVector {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        SeedVector::sample(n, &mut rng)
    }

    #[test]
    fn payment_condition_holds_per_seed() {
        let instances = vec![
            gen_example1(),
            gen_random_smallbid(4, 10, 0.5, 1).unwrap(),
            gen_pd_obstruction(),
        ];
        for inst in &instances {
            for s in 0..20 {
                let (_, report) =
                    classic_pd_candidate(inst, &sampled(inst.n(), s), 1.0, 0.0).unwrap();
                // alpha = 0 makes coverage trivial; any violation is payment
                assert!(report.passed(), "{}: {:?}", inst.label(), report.violations.first());
            }
        }
    }

    #[test]
    fn hidden_budgets_are_rejected() {
        let inst = gen_example1().with_hidden_budgets(true);
        let err = classic_pd_candidate(&inst, &sampled(inst.n(), 0), 1.0, 0.5).unwrap_err();
        assert!(matches!(err, Error::BudgetsHidden { .. }));
    }

    #[test]
    fn obstruction_instance_caps_coverage_near_one_over_e() {
        let inst = gen_pd_obstruction();
        let (duals, _) = classic_pd_average(&inst, 1.0, 20_000, 42).unwrap();
        let e_inv = (-1.0f64).exp();
        // the first arrival's dual mass converges to r / e
        let mass = duals.lambda[0] + duals.theta[0] * inst.bid(0, 1);
        assert!((mass - e_inv).abs() < 0.01, "mass {mass}");
        // so coverage fails for alpha = 0.5 at that edge
        let report = duals.check_coverage(&inst, 0.5);
        assert!(!report.passed());
        assert!(report
            .violations
            .iter()
            .any(|v| v.location == "edge i=0 t=1"));
    }

    #[test]
    fn obstruction_still_covers_below_one_over_e() {
        // the cap is tight at 1/e: a target below it is covered everywhere
        let inst = gen_pd_obstruction();
        let (duals, _) = classic_pd_average(&inst, 1.0, 20_000, 42).unwrap();
        let report = duals.check_coverage(&inst, 0.3);
        assert!(report.passed(), "{:?}", report.violations.first());
    }

    #[test]
    fn zero_trials_is_an_error() {
        assert!(classic_pd_average(&gen_example1(), 1.0, 0, 0).is_err());
    }
}
