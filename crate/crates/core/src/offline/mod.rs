//! Offline benchmarks: the fractional LP upper bound, an exact brute-force
//! integral optimum for tiny instances, and closed-form optima for the
//! labeled constructions.

mod simplex;

pub use simplex::{solve_simplex, SimplexSolution};

use std::path::Path;

use serde::Serialize;

use crate::error::Error;
use crate::instance::Instance;
use crate::Result;

pub const DEFAULT_LP_TOL: f64 = 1e-8;
pub const DEFAULT_BRUTEFORCE_CAP: f64 = 1e6;

/// The allocation LP: variables x_{it} (fraction of arrival t given to i),
/// resource rows sum_t b_it x_it <= B_i, arrival rows sum_i x_it <= 1.
#[derive(Debug, Clone)]
pub struct LpProblem {
    pub n: usize,
    pub t_len: usize,
    /// r_i b_it per variable, indexed i * T + t.
    pub objective: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
}

impl LpProblem {
    pub fn var(&self, i: usize, t: usize) -> usize {
        i * self.t_len + t
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BenchmarkKind {
    Lp,
    BruteForce,
    Analytic,
}

/// Per-resource share of the benchmark solution.
#[derive(Debug, Clone, Serialize)]
pub struct ResourceShare {
    /// Units of the resource's budget used (OPT_i).
    pub units: f64,
    /// (arrival index, fraction of the arrival) pairs, arrival 1-based.
    pub matched: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OfflineResult {
    pub value: f64,
    pub per_resource: Vec<ResourceShare>,
    pub kind: BenchmarkKind,
    /// LP duals (resource rows then arrival rows) when kind is lp.
    pub duals: Option<Vec<f64>>,
}

impl OfflineResult {
    /// The identity value = sum_i r_i OPT_i, recomputed.
    pub fn value_from_shares(&self, inst: &Instance) -> f64 {
        self.per_resource
            .iter()
            .enumerate()
            .map(|(i, s)| s.units * inst.reward(i))
            .sum()
    }
}

pub fn build_lp(inst: &Instance) -> LpProblem {
    let n = inst.n();
    let t_len = inst.t_len();
    let nv = n * t_len;
    let mut objective = vec![0.0; nv];
    let mut rows = Vec::with_capacity(n + t_len);
    let mut rhs = Vec::with_capacity(n + t_len);
    for i in 0..n {
        let mut row = vec![0.0; nv];
        for t in 0..t_len {
            let b = inst.bid(i, t + 1);
            row[i * t_len + t] = b;
            objective[i * t_len + t] = inst.reward(i) * b;
        }
        rows.push(row);
        rhs.push(inst.budget(i));
    }
    for t in 0..t_len {
        let mut row = vec![0.0; nv];
        for i in 0..n {
            row[i * t_len + t] = 1.0;
        }
        rows.push(row);
        rhs.push(1.0);
    }
    LpProblem { n, t_len, objective, rows, rhs }
}

/// Solve the allocation LP with the dense simplex and extract per-resource
/// shares from the optimal vertex.
pub fn solve_lp(inst: &Instance, lp: &LpProblem, tol: f64) -> Result<OfflineResult> {
    let cap = 10_000 + 200 * (lp.rows.len() + lp.objective.len());
    let sol = solve_simplex(&lp.objective, &lp.rows, &lp.rhs, cap)?;
    let scale = sol.value.abs().max(1.0);
    let mut per_resource = Vec::with_capacity(lp.n);
    for i in 0..lp.n {
        let mut matched = Vec::new();
        let mut units = 0.0;
        for t in 0..lp.t_len {
            let mut x = sol.x[lp.var(i, t)];
            if x < tol {
                continue;
            }
            if x > 1.0 - tol {
                x = 1.0;
            }
            matched.push((t + 1, x));
            units += x * inst.bid(i, t + 1);
        }
        per_resource.push(ResourceShare { units: units.min(inst.budget(i)), matched });
    }
    let value = sol.value;
    let result =
        OfflineResult { value, per_resource, kind: BenchmarkKind::Lp, duals: Some(sol.duals) };
    debug_assert!((result.value_from_shares(inst) - value).abs() <= tol * scale * 10.0);
    Ok(result)
}

/// Exact integral optimum by enumerating every assignment of arrivals to
/// resources-or-none, with payments capped at the remaining budget.
pub fn solve_bruteforce(inst: &Instance, cap: f64) -> Result<OfflineResult> {
    let n = inst.n();
    let t_len = inst.t_len();
    let choices = ((n + 1) as f64).powi(t_len as i32);
    if choices > cap {
        return Err(Error::BruteForceTooLarge { choices, cap });
    }
    let mut assignment = vec![0usize; t_len]; // 0 = skip, k = resource k - 1
    let mut best_value = f64::NEG_INFINITY;
    let mut best = assignment.clone();
    loop {
        let mut consumed = vec![0.0; n];
        let mut value = 0.0;
        for (t, &a) in assignment.iter().enumerate() {
            if a == 0 {
                continue;
            }
            let i = a - 1;
            let b = inst.bid(i, t + 1);
            let paid = b.min(inst.budget(i) - consumed[i]);
            if paid > 0.0 {
                consumed[i] += paid;
                value += paid * inst.reward(i);
            }
        }
        if value > best_value {
            best_value = value;
            best.copy_from_slice(&assignment);
        }
        // odometer over base n + 1
        let mut pos = 0;
        loop {
            if pos == t_len {
                let mut per_resource: Vec<ResourceShare> = (0..n)
                    .map(|_| ResourceShare { units: 0.0, matched: Vec::new() })
                    .collect();
                let mut consumed = vec![0.0; n];
                for (t, &a) in best.iter().enumerate() {
                    if a == 0 {
                        continue;
                    }
                    let i = a - 1;
                    let b = inst.bid(i, t + 1);
                    let paid = b.min(inst.budget(i) - consumed[i]);
                    if paid > 0.0 {
                        consumed[i] += paid;
                        per_resource[i].units += paid;
                        per_resource[i].matched.push((t + 1, paid / b));
                    }
                }
                return Ok(OfflineResult {
                    value: best_value,
                    per_resource,
                    kind: BenchmarkKind::BruteForce,
                    duals: None,
                });
            }
            assignment[pos] += 1;
            if assignment[pos] <= n {
                break;
            }
            assignment[pos] = 0;
            pos += 1;
        }
    }
}

fn parse_labeled(label: &str, prefix: &str) -> Option<usize> {
    label.strip_prefix(prefix)?.parse().ok()
}

/// Closed-form optimum for instances produced by the labeled constructions;
/// none for anything unrecognized.
pub fn analytic_opt(inst: &Instance) -> Option<OfflineResult> {
    if let Some(n) = parse_labeled(inst.label(), "adversary-n") {
        if n < 2 || inst.n() != n || inst.t_len() != n * n - 1 {
            return None;
        }
        // the heavy resource takes every phase arrival; the small ones split
        // the final batch by capacity, filling in ascending budget order
        let phase_len = n * (n + 1) / 2 - 1;
        let big = (0..n).max_by(|&a, &b| inst.budget(a).total_cmp(&inst.budget(b)))?;
        let mut per_resource: Vec<ResourceShare> =
            (0..n).map(|_| ResourceShare { units: 0.0, matched: Vec::new() }).collect();
        per_resource[big].units = inst.budget(big);
        per_resource[big].matched = (1..=phase_len).map(|t| (t, 1.0)).collect();
        let mut small: Vec<usize> = (0..n).filter(|&i| i != big).collect();
        small.sort_by(|&a, &b| inst.budget(a).total_cmp(&inst.budget(b)));
        let mut t = phase_len + 1;
        for i in small {
            let c = inst.budget(i) as usize;
            per_resource[i].units = inst.budget(i);
            per_resource[i].matched = (t..t + c).map(|t| (t, 1.0)).collect();
            t += c;
        }
        return Some(OfflineResult {
            value: (n * n - 1) as f64,
            per_resource,
            kind: BenchmarkKind::Analytic,
            duals: None,
        });
    }
    if let Some(n) = parse_labeled(inst.label(), "example3-n") {
        if n < 2 || inst.n() != 3 || inst.t_len() != 2 * n {
            return None;
        }
        // every arrival is worth 1 on the first two resources, which have
        // joint capacity 2n: match arrivals 1..n to resource 0, rest to 1
        let per_resource = vec![
            ResourceShare { units: n as f64, matched: (1..=n).map(|t| (t, 1.0)).collect() },
            ResourceShare {
                units: n as f64,
                matched: (n + 1..=2 * n).map(|t| (t, 1.0)).collect(),
            },
            ResourceShare { units: 0.0, matched: Vec::new() },
        ];
        return Some(OfflineResult {
            value: 2.0 * n as f64,
            per_resource,
            kind: BenchmarkKind::Analytic,
            duals: None,
        });
    }
    None
}

/// Emit the LP in fixed MPS format.
pub fn write_mps(lp: &LpProblem, name: &str, path: impl AsRef<Path>) -> Result<()> {
    use std::fmt::Write as _;
    let mut out = String::new();
    writeln!(out, "NAME          {name}").unwrap();
    writeln!(out, "ROWS").unwrap();
    writeln!(out, " N  OBJ").unwrap();
    for i in 0..lp.n {
        writeln!(out, " L  RES{i}").unwrap();
    }
    for t in 0..lp.t_len {
        writeln!(out, " L  ARR{t}").unwrap();
    }
    writeln!(out, "COLUMNS").unwrap();
    for i in 0..lp.n {
        for t in 0..lp.t_len {
            let j = lp.var(i, t);
            let col = format!("X{i}_{t}");
            if lp.objective[j] != 0.0 {
                writeln!(out, "    {col}  OBJ  {}", lp.objective[j]).unwrap();
            }
            if lp.rows[i][j] != 0.0 {
                writeln!(out, "    {col}  RES{i}  {}", lp.rows[i][j]).unwrap();
            }
            writeln!(out, "    {col}  ARR{t}  1").unwrap();
        }
    }
    writeln!(out, "RHS").unwrap();
    for i in 0..lp.n {
        writeln!(out, "    RHS  RES{i}  {}", lp.rhs[i]).unwrap();
    }
    for t in 0..lp.t_len {
        writeln!(out, "    RHS  ARR{t}  {}", lp.rhs[lp.n + t]).unwrap();
    }
    writeln!(out, "ENDATA").unwrap();
    std::fs::write(path, out)?;
    Ok(())
}
