//! Adaptive lower-bound construction against deterministic budget-oblivious
//! policies. Capacities are committed only after the target commits, then
//! the whole interaction is frozen into an ordinary instance.

use crate::algorithms::{ObliviousPolicy, ObliviousView};
use crate::error::Error;
use crate::instance::{Instance, Resource};
use crate::Result;

/// One capacity commitment: the target saturated `resource` to `capacity`
/// cumulative matches at global arrival `arrival`. Leftover commitments
/// (made after the phases because the target declined matches) carry no
/// arrival index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhaseRecord {
    pub capacity: usize,
    pub resource: usize,
    pub arrival: Option<usize>,
}

/// Frozen outcome of the adaptive interaction.
#[derive(Debug, Clone)]
pub struct AdversaryTranscript {
    pub instance: Instance,
    pub alg_value: f64,
    pub opt_value: f64,
    pub phase_log: Vec<PhaseRecord>,
}

impl AdversaryTranscript {
    pub fn ratio(&self) -> f64 {
        self.alg_value / self.opt_value
    }
}

struct Episode {
    rows: Vec<Vec<f64>>,
    choices: Vec<Option<usize>>,
    capacities: Vec<usize>,
    phase_log: Vec<PhaseRecord>,
    alg_value: f64,
    big: usize,
}

fn play(n: usize, target: &mut dyn ObliviousPolicy) -> Episode {
    target.reset();
    let rewards = vec![1.0; n];
    let mut counts = vec![0usize; n];
    let mut committed: Vec<Option<usize>> = vec![None; n];
    let mut active = vec![true; n];
    let mut assigned = 0usize;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut choices: Vec<Option<usize>> = Vec::new();
    let mut phase_log = Vec::new();
    let mut alg_value = 0.0;

    // phases: n - k + 1 arrivals at level k, unit bids to uncommitted resources
    for k in 1..n {
        for _ in 0..(n - k + 1) {
            let row: Vec<f64> =
                active.iter().map(|&a| if a { 1.0 } else { 0.0 }).collect();
            let view = ObliviousView {
                arrival: rows.len() + 1,
                bids: &row,
                rewards: &rewards,
                active: &active,
            };
            let choice = target.choose(&view).filter(|&i| view.bids[i] > 0.0);
            rows.push(row);
            choices.push(choice);
            if let Some(i) = choice {
                counts[i] += 1;
                alg_value += 1.0;
                // watch level: one above the number of committed capacities
                if counts[i] == assigned + 1 {
                    committed[i] = Some(counts[i]);
                    active[i] = false;
                    assigned += 1;
                    phase_log.push(PhaseRecord {
                        capacity: counts[i],
                        resource: i,
                        arrival: Some(rows.len()),
                    });
                }
            }
        }
    }

    // targets that decline matches leave capacities unclaimed; hand the
    // leftovers out by id order and keep the largest budget for the last
    let uncommitted: Vec<usize> =
        (0..n).filter(|&i| committed[i].is_none()).collect();
    let small_leftovers = uncommitted.len() - 1;
    for (slot, &i) in uncommitted.iter().take(small_leftovers).enumerate() {
        let capacity = assigned + 1 + slot;
        committed[i] = Some(capacity);
        active[i] = false;
        phase_log.push(PhaseRecord { capacity, resource: i, arrival: None });
    }
    let big = *uncommitted.last().expect("one resource always remains");
    let big_capacity = n - 1 + n * (n - 1) / 2;
    committed[big] = Some(big_capacity);

    // final batch: unit bids to every small-capacity resource
    let capacities: Vec<usize> = committed.iter().map(|c| c.unwrap()).collect();
    let mut remaining: Vec<usize> =
        (0..n).map(|i| capacities[i] - counts[i]).collect();
    for i in 0..n {
        active[i] = remaining[i] > 0;
    }
    for _ in 0..(n * (n - 1) / 2) {
        // edges to every small-capacity resource; the target can only use
        // the ones it has not already exhausted
        let row: Vec<f64> =
            (0..n).map(|i| if i != big { 1.0 } else { 0.0 }).collect();
        let view = ObliviousView {
            arrival: rows.len() + 1,
            bids: &row,
            rewards: &rewards,
            active: &active,
        };
        let choice = target.choose(&view).filter(|&i| row[i] > 0.0 && active[i]);
        rows.push(row);
        choices.push(choice);
        if let Some(i) = choice {
            remaining[i] -= 1;
            alg_value += 1.0;
            if remaining[i] == 0 {
                active[i] = false;
            }
        }
    }

    Episode { rows, choices, capacities, phase_log, alg_value, big }
}

/// Run the adaptive construction against a deterministic budget-oblivious
/// target. The interaction is replayed once; if the two runs disagree the
/// target is not deterministic and the construction is invalid.
pub fn gen_adversary(n: usize, target: &mut dyn ObliviousPolicy) -> Result<AdversaryTranscript> {
    if n < 2 {
        return Err(Error::invalid("n", "gen_adversary needs n >= 2"));
    }
    let first = play(n, target);
    let second = play(n, target);
    if first.choices != second.choices {
        let arrival = first
            .choices
            .iter()
            .zip(&second.choices)
            .position(|(a, b)| a != b)
            .unwrap_or(0)
            + 1;
        return Err(Error::NondeterministicTarget { arrival });
    }

    let resources: Vec<Resource> = first
        .capacities
        .iter()
        .enumerate()
        .map(|(id, &c)| Resource { id, budget: c as f64, reward: 1.0 })
        .collect();
    let instance =
        Instance::new(format!("adversary-n{n}"), resources, first.rows, false)?;
    debug_assert_eq!(instance.t_len(), n * n - 1);
    debug_assert_eq!(first.capacities[first.big], n - 1 + n * (n - 1) / 2);
    Ok(AdversaryTranscript {
        instance,
        alg_value: first.alg_value,
        opt_value: (n * n - 1) as f64,
        phase_log: first.phase_log,
    })
}
