//! Named instance generators. Every generator is a pure function of its
//! arguments (and seed), so regenerating with the same inputs reproduces the
//! instance byte for byte.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

use super::{Instance, Resource};
use crate::error::Error;
use crate::Result;

fn resources(budgets: &[f64], rewards: &[f64]) -> Vec<Resource> {
    budgets
        .iter()
        .zip(rewards)
        .enumerate()
        .map(|(id, (&budget, &reward))| Resource { id, budget, reward })
        .collect()
}

fn unit_rewards(budgets: &[f64]) -> Vec<Resource> {
    let rewards = vec![1.0; budgets.len()];
    resources(budgets, &rewards)
}

/// Two-resource snippet where the number of units matched to resource 0 is
/// non-monotone in its bid price. Resource 2 (the dummy) absorbs a prefix
/// arrival so resource 0 sees earlier arrivals without being touched;
/// another prefix arrival drains resource 1 down to one remaining unit.
///
/// Resource ids: 0 and 1 are the two focal resources, 2 is the dummy. Seed
/// vectors are `(y_1, y_2, y_dummy)` in that order. Focal arrivals are the
/// last two: bids (1, 1, 0) then (2, 4, 0).
pub fn gen_example1() -> Instance {
    let budgets = [2.0, 2.0, 2_000_000.0];
    let bids = vec![
        vec![0.0, 1.0, 0.0],         // drains resource 1 from 2 to 1
        vec![1.0, 1.0, 1_000_000.0], // dummy absorbs this one
        vec![1.0, 1.0, 0.0],         // arrival t
        vec![2.0, 4.0, 0.0],         // arrival t+1
    ];
    Instance::new("example1", unit_rewards(&budgets), bids, false)
        .expect("static construction is valid")
}

/// Instance where the integral and fractional algorithm outputs differ
/// substantially for a range of seed values of the last resource.
///
/// Resources `0..n-1` have budget `n-1` (drained to one unit by a prefix);
/// resource `n-1` has budget `(n-1)^1.98`. Two focal batches follow: unit
/// bids against bid 2, then `(n-1)^0.99` against `(n-1)^0.98`.
pub fn gen_example2(n: usize) -> Result<Instance> {
    if n < 3 {
        return Err(Error::invalid("n", "gen_example2 needs n >= 3"));
    }
    let small = (n - 1) as f64;
    let mut budgets = vec![small; n - 1];
    budgets.push(small.powf(1.98));
    let mut bids = Vec::new();
    // prefix: drain each small resource to exactly one remaining unit
    for j in 0..n - 1 {
        let mut row = vec![0.0; n];
        row[j] = small - 1.0;
        bids.push(row);
    }
    // batch (i): unit bid on one small resource, bid 2 on the big one
    for j in 0..n - 1 {
        let mut row = vec![0.0; n];
        row[j] = 1.0;
        row[n - 1] = 2.0;
        bids.push(row);
    }
    // batch (ii): high bids, slightly favoring the small resources
    for j in 0..n - 1 {
        let mut row = vec![0.0; n];
        row[j] = small.powf(0.99);
        row[n - 1] = small.powf(0.98);
        bids.push(row);
    }
    Instance::new(format!("example2-n{n}"), unit_rewards(&budgets), bids, false)
}

/// Three-resource instance where even the fractional algorithm uses budget
/// non-monotonically in the bid price of resource 2. Budgets `(n, n, 1.5 n)`,
/// `2n` arrivals bidding `(1, 1, 1)` then `(1, 1, 0.5)`.
pub fn gen_example3(n: usize) -> Result<Instance> {
    if n < 2 || n % 2 != 0 {
        return Err(Error::invalid("n", "gen_example3 needs even n >= 2"));
    }
    let nf = n as f64;
    let budgets = [nf, nf, 1.5 * nf];
    let mut bids = Vec::with_capacity(2 * n);
    for t in 1..=2 * n {
        let b3 = if t <= n { 1.0 } else { 0.5 };
        bids.push(vec![1.0, 1.0, b3]);
    }
    Instance::new(format!("example3-n{n}"), unit_rewards(&budgets), bids, false)
}

/// Random decomposable-bids instance: every nonzero bid equals `b_i * b_t`
/// for per-resource and per-arrival factors; budgets are large enough that
/// the realized bid-to-budget ratio is at most 0.01.
pub fn gen_decomposable(n: usize, t_len: usize, seed: u64) -> Result<Instance> {
    if n < 1 || t_len < 1 {
        return Err(Error::invalid("n", "gen_decomposable needs n, T >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let row_f: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..1.5)).collect();
    let col_f: Vec<f64> = (0..t_len).map(|_| rng.gen_range(0.5..1.5)).collect();
    let mut bids = Vec::with_capacity(t_len);
    for t in 0..t_len {
        let mut row = vec![0.0; n];
        for (i, cell) in row.iter_mut().enumerate() {
            if rng.gen_bool(0.7) {
                *cell = row_f[i] * col_f[t];
            }
        }
        // keep every arrival connected
        if row.iter().all(|&b| b == 0.0) {
            let i = rng.gen_range(0..n);
            row[i] = row_f[i] * col_f[t];
        }
        bids.push(row);
    }
    let budgets: Vec<f64> = (0..n)
        .map(|i| {
            let max_bid = bids.iter().map(|r| r[i]).fold(0.0f64, f64::max);
            if max_bid > 0.0 {
                max_bid / 0.01
            } else {
                1.0
            }
        })
        .collect();
    Instance::new(
        format!("decomposable-n{n}-t{t_len}-s{seed}"),
        unit_rewards(&budgets),
        bids,
        false,
    )
}

/// Check the decomposable-bids property: nonzero bids factor as
/// `b_it = b_i * b_t` for some positive vectors, up to relative tolerance.
pub fn is_decomposable(inst: &Instance) -> bool {
    let n = inst.n();
    let t_len = inst.t_len();
    let tol = 1e-9;
    // log-space consistency labeling over the bipartite support graph
    let mut row_log = vec![f64::NAN; n];
    let mut col_log = vec![f64::NAN; t_len];
    let mut queue: Vec<(bool, usize)> = Vec::new();
    for t in 0..t_len {
        if !col_log[t].is_nan() {
            continue;
        }
        if inst.arrivals()[t].bids.iter().all(|&b| b == 0.0) {
            continue;
        }
        col_log[t] = 0.0;
        queue.push((false, t));
        while let Some((is_row, k)) = queue.pop() {
            if is_row {
                for t2 in 0..t_len {
                    let b = inst.bid(k, t2 + 1);
                    if b <= 0.0 {
                        continue;
                    }
                    let want = b.ln() - row_log[k];
                    if col_log[t2].is_nan() {
                        col_log[t2] = want;
                        queue.push((false, t2));
                    } else if (col_log[t2] - want).abs() > tol {
                        return false;
                    }
                }
            } else {
                for i in 0..n {
                    let b = inst.bid(i, k + 1);
                    if b <= 0.0 {
                        continue;
                    }
                    let want = b.ln() - col_log[k];
                    if row_log[i].is_nan() {
                        row_log[i] = want;
                        queue.push((true, i));
                    } else if (row_log[i] - want).abs() > tol {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// Stochastic-rewards reduction: bids equal the success probabilities and
/// budgets are i.i.d. Exp(1) samples hidden from budget-oblivious policies.
/// `prob[t][i]` is the success probability of edge `(i, t)`.
pub fn gen_stochastic_rewards(prob: &[Vec<f64>], seed: u64) -> Result<Instance> {
    let n = prob.first().map_or(0, |r| r.len());
    for (t, row) in prob.iter().enumerate() {
        if row.len() != n {
            return Err(Error::invalid("prob", format!("ragged row {t}")));
        }
        for (i, &p) in row.iter().enumerate() {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::invalid("prob", format!("p[{t}][{i}]={p} outside [0,1]")));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let budgets: Vec<f64> = (0..n).map(|_| Exp1.sample(&mut rng)).collect();
    Instance::new(
        format!("stochrew-s{seed}"),
        unit_rewards(&budgets),
        prob.to_vec(),
        true,
    )
}

/// Uniform random bids with budgets rescaled so the realized bid-to-budget
/// ratio stays at or below `gamma_max`.
pub fn gen_random_smallbid(n: usize, t_len: usize, gamma_max: f64, seed: u64) -> Result<Instance> {
    if !(gamma_max > 0.0 && gamma_max <= 1.0) {
        return Err(Error::invalid("gamma_max", "need gamma_max in (0, 1]"));
    }
    if n < 1 || t_len < 1 {
        return Err(Error::invalid("n", "gen_random_smallbid needs n, T >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bids: Vec<Vec<f64>> = (0..t_len)
        .map(|_| (0..n).map(|_| rng.gen::<f64>()).collect())
        .collect();
    let budgets: Vec<f64> = (0..n)
        .map(|i| {
            let max_bid = bids.iter().map(|r| r[i]).fold(0.0f64, f64::max);
            let slack = rng.gen_range(1.0..2.0);
            if max_bid > 0.0 {
                max_bid / gamma_max * slack
            } else {
                1.0
            }
        })
        .collect();
    Instance::new(
        format!("smallbid-n{n}-t{t_len}-s{seed}"),
        unit_rewards(&budgets),
        bids,
        false,
    )
}

/// Random b-matching instance: bids in {0, 1}, small integer budgets.
pub fn gen_bmatching(n: usize, t_len: usize, seed: u64) -> Result<Instance> {
    if n < 1 || t_len < 1 {
        return Err(Error::invalid("n", "gen_bmatching needs n, T >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let budgets: Vec<f64> = (0..n).map(|_| rng.gen_range(1..=3) as f64).collect();
    let bids: Vec<Vec<f64>> = (0..t_len)
        .map(|_| {
            let mut row: Vec<f64> =
                (0..n).map(|_| if rng.gen_bool(0.6) { 1.0 } else { 0.0 }).collect();
            if row.iter().all(|&b| b == 0.0) {
                let i = rng.gen_range(0..n);
                row[i] = 1.0;
            }
            row
        })
        .collect();
    Instance::new(
        format!("bmatching-n{n}-t{t_len}-s{seed}"),
        unit_rewards(&budgets),
        bids,
        false,
    )
}

/// Instance on which the classic primal-dual candidate cannot certify any
/// ratio above `1/e`: the first arrival bids only on resource 0, whose huge
/// budget keeps its dual contribution negligible, and later arrivals are
/// taken by high-bid competitors.
pub fn gen_pd_obstruction() -> Instance {
    let competitors = 5usize;
    let later = 20usize;
    let mut budgets = vec![1e6];
    budgets.extend(std::iter::repeat(1e9).take(competitors));
    let n = budgets.len();
    let mut bids = Vec::with_capacity(1 + later);
    let mut first = vec![0.0; n];
    first[0] = 1.0;
    bids.push(first);
    for _ in 0..later {
        let mut row = vec![0.0; n];
        for cell in row.iter_mut().skip(1) {
            *cell = 10.0;
        }
        bids.push(row);
    }
    Instance::new("pd-obstruction", unit_rewards(&budgets), bids, false)
        .expect("static construction is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example2_focal_arrival_count() {
        let inst = gen_example2(3).unwrap();
        // prefix of n-1 arrivals plus 2n-2 focal ones
        assert_eq!(inst.t_len(), 2 + 4);
    }

    #[test]
    fn example3_shape() {
        let inst = gen_example3(10).unwrap();
        assert_eq!(inst.n(), 3);
        assert_eq!(inst.t_len(), 20);
        assert_eq!(inst.budget(2), 15.0);
        assert!(gen_example3(3).is_err());
    }

    #[test]
    fn decomposable_by_construction() {
        for seed in 0..5 {
            let inst = gen_decomposable(4, 8, seed).unwrap();
            assert!(is_decomposable(&inst));
            assert!(inst.gamma() <= 0.01 + 1e-12);
        }
    }

    #[test]
    fn perturbed_bid_breaks_decomposability() {
        let inst = gen_decomposable(4, 8, 7).unwrap();
        let mut bids: Vec<Vec<f64>> = inst.arrivals().iter().map(|a| a.bids.clone()).collect();
        let (mut t0, mut i0) = (0, 0);
        'outer: for (t, row) in bids.iter().enumerate() {
            for (i, &b) in row.iter().enumerate() {
                if b > 0.0 {
                    t0 = t;
                    i0 = i;
                    break 'outer;
                }
            }
        }
        bids[t0][i0] += 1.0;
        let perturbed =
            Instance::new("perturbed", inst.resources().to_vec(), bids, false).unwrap();
        assert!(!is_decomposable(&perturbed));
    }

    #[test]
    fn unit_factors_full_mask_is_bmatching() {
        // degenerate decomposition: b_i = b_t = 1 on a full mask
        let bids = vec![vec![1.0; 3]; 4];
        let inst = Instance::new(
            "unit",
            unit_rewards(&[10.0, 10.0, 10.0]),
            bids,
            false,
        )
        .unwrap();
        assert!(inst.is_bmatching());
        assert!(is_decomposable(&inst));
    }

    #[test]
    fn stochastic_rewards_determinism_and_mean() {
        let prob = vec![vec![0.01, 0.02]; 3];
        let a = gen_stochastic_rewards(&prob, 11).unwrap();
        let b = gen_stochastic_rewards(&prob, 11).unwrap();
        assert_eq!(a, b);
        assert!(a.hidden_budgets());

        // all-zero probabilities: still positive budgets
        let zero = vec![vec![0.0, 0.0]; 2];
        let z = gen_stochastic_rewards(&zero, 1).unwrap();
        assert!(z.budgets().iter().all(|&b| b > 0.0));

        // law of large numbers: mean of 10^4 Exp(1) budgets within 3 sigma/sqrt(N)
        let many = gen_stochastic_rewards(&[vec![0.0; 10_000]], 5).unwrap();
        let mean = many.budgets().iter().sum::<f64>() / 10_000.0;
        assert!((0.97..=1.03).contains(&mean), "mean {mean}");
    }

    #[test]
    fn smallbid_gamma_bound() {
        let inst = gen_random_smallbid(4, 12, 0.01, 3).unwrap();
        assert!(inst.gamma() <= 0.01 + 1e-12);
        let a = gen_random_smallbid(4, 12, 0.01, 3).unwrap();
        assert_eq!(inst, a);
        let single = gen_random_smallbid(1, 1, 0.5, 0).unwrap();
        assert_eq!(single.n(), 1);
        assert_eq!(single.t_len(), 1);
    }

    #[test]
    fn bmatching_bids_binary() {
        let inst = gen_bmatching(4, 12, 9).unwrap();
        assert!(inst.is_bmatching());
    }
}
