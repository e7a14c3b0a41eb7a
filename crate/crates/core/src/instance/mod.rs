//! Data model for OBA instances: resources with budgets and per-unit
//! rewards, ordered arrivals with dense bid vectors, seed vectors for the
//! randomized policies, file I/O, and the named generators for every
//! construction used by the analysis.

mod adversary;
mod generators;

pub use adversary::{gen_adversary, AdversaryTranscript, PhaseRecord};
pub use generators::{
    gen_bmatching, gen_decomposable, gen_example1, gen_example2, gen_example3,
    gen_pd_obstruction, gen_random_smallbid, gen_stochastic_rewards, is_decomposable,
};

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::Result;

/// One offline resource (advertiser): budget in demand units, reward per unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Resource {
    pub id: usize,
    pub budget: f64,
    pub reward: f64,
}

/// One online arrival (query): `index` is its 1-based position, `bids` has
/// one entry per resource (0 means no edge).
#[derive(Debug, Clone, PartialEq)]
pub struct Arrival {
    pub index: usize,
    pub bids: Vec<f64>,
}

/// A full OBA instance. Immutable after construction; `gamma` (the
/// bid-to-budget ratio `max b_it / B_i`) is validated finite and cached.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    label: String,
    resources: Vec<Resource>,
    arrivals: Vec<Arrival>,
    hidden_budgets: bool,
    gamma: f64,
}

#[derive(Serialize, Deserialize)]
struct ArrivalFile {
    bids: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct InstanceFile {
    label: String,
    resources: Vec<Resource>,
    arrivals: Vec<ArrivalFile>,
    hidden_budgets: bool,
}

impl Instance {
    /// Validate and build an instance. `bids[t]` is the dense bid vector of
    /// the `t`-th arrival (0-based position, online order).
    pub fn new(
        label: impl Into<String>,
        resources: Vec<Resource>,
        bids: Vec<Vec<f64>>,
        hidden_budgets: bool,
    ) -> Result<Self> {
        let label = label.into();
        let n = resources.len();
        for (k, r) in resources.iter().enumerate() {
            if r.id != k {
                return Err(Error::schema(
                    format!("resources[{k}].id"),
                    format!("ids must be contiguous 0..{n}, found {}", r.id),
                ));
            }
            if !r.budget.is_finite() || r.budget < 0.0 {
                return Err(Error::schema(
                    format!("resources[{k}].budget"),
                    format!("budget must be finite and >= 0, found {}", r.budget),
                ));
            }
            if !r.reward.is_finite() || r.reward < 0.0 {
                return Err(Error::schema(
                    format!("resources[{k}].reward"),
                    format!("reward must be finite and >= 0, found {}", r.reward),
                ));
            }
        }
        let mut gamma = 0.0f64;
        let mut arrivals = Vec::with_capacity(bids.len());
        for (t, row) in bids.into_iter().enumerate() {
            if row.len() != n {
                return Err(Error::schema(
                    format!("arrivals[{t}].bids"),
                    format!("expected {n} entries, found {}", row.len()),
                ));
            }
            for (i, &b) in row.iter().enumerate() {
                if !b.is_finite() || b < 0.0 {
                    return Err(Error::schema(
                        format!("arrivals[{t}].bids[{i}]"),
                        format!("bids must be finite and >= 0, found {b}"),
                    ));
                }
                if b > 0.0 {
                    if resources[i].budget == 0.0 {
                        return Err(Error::schema(
                            format!("arrivals[{t}].bids[{i}]"),
                            format!("bid {b} on resource {i} with zero budget"),
                        ));
                    }
                    gamma = gamma.max(b / resources[i].budget);
                }
            }
            arrivals.push(Arrival { index: t + 1, bids: row });
        }
        Ok(Instance { label, resources, arrivals, hidden_budgets, gamma })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Number of resources `n`.
    pub fn n(&self) -> usize {
        self.resources.len()
    }

    /// Number of arrivals `T`.
    pub fn t_len(&self) -> usize {
        self.arrivals.len()
    }

    pub fn resources(&self) -> &[Resource] {
        &self.resources
    }

    pub fn arrivals(&self) -> &[Arrival] {
        &self.arrivals
    }

    /// Bid-to-budget ratio.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn hidden_budgets(&self) -> bool {
        self.hidden_budgets
    }

    /// Bid `b_it` with `t` 1-based.
    pub fn bid(&self, i: usize, t: usize) -> f64 {
        self.arrivals[t - 1].bids[i]
    }

    /// Time-extended bid `b_{i tau} = b_it` for `tau in [t, t+1)`.
    pub fn bid_at(&self, i: usize, tau: f64) -> f64 {
        let t = tau.floor() as usize;
        if t < 1 || t > self.t_len() {
            return 0.0;
        }
        self.bid(i, t)
    }

    pub fn budget(&self, i: usize) -> f64 {
        self.resources[i].budget
    }

    pub fn reward(&self, i: usize) -> f64 {
        self.resources[i].reward
    }

    pub fn budgets(&self) -> Vec<f64> {
        self.resources.iter().map(|r| r.budget).collect()
    }

    pub fn rewards(&self) -> Vec<f64> {
        self.resources.iter().map(|r| r.reward).collect()
    }

    /// Instance with every budget raised to `B_i + max_t b_it`.
    pub fn augmented(&self) -> Instance {
        let resources = self
            .resources
            .iter()
            .map(|r| {
                let max_bid = self
                    .arrivals
                    .iter()
                    .map(|a| a.bids[r.id])
                    .fold(0.0f64, f64::max);
                Resource { id: r.id, budget: r.budget + max_bid, reward: r.reward }
            })
            .collect();
        let bids = self.arrivals.iter().map(|a| a.bids.clone()).collect();
        Instance::new(format!("{}-augmented", self.label), resources, bids, self.hidden_budgets)
            .expect("augmenting preserves validity")
    }

    /// Copy with the hidden-budgets flag replaced.
    pub fn with_hidden_budgets(&self, hidden: bool) -> Instance {
        let mut out = self.clone();
        out.hidden_budgets = hidden;
        out
    }

    /// True when every bid is 0 or 1.
    pub fn is_bmatching(&self) -> bool {
        self.arrivals
            .iter()
            .all(|a| a.bids.iter().all(|&b| b == 0.0 || b == 1.0))
    }
}

impl Serialize for Instance {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        InstanceFile {
            label: self.label.clone(),
            resources: self.resources.clone(),
            arrivals: self.arrivals.iter().map(|a| ArrivalFile { bids: a.bids.clone() }).collect(),
            hidden_budgets: self.hidden_budgets,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Instance {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let file = InstanceFile::deserialize(deserializer)?;
        Instance::new(
            file.label,
            file.resources,
            file.arrivals.into_iter().map(|a| a.bids).collect(),
            file.hidden_budgets,
        )
        .map_err(serde::de::Error::custom)
    }
}

/// Load and validate an instance from a JSON file.
pub fn load_instance(path: impl AsRef<Path>) -> Result<Instance> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Write an instance as JSON. Floats use shortest round-trip formatting, so
/// `load_instance(save_instance(x)) == x` bit-exactly.
pub fn save_instance(inst: &Instance, path: impl AsRef<Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(inst)?;
    std::fs::write(path, text)?;
    Ok(())
}

/// The i.i.d. uniform seeds `Y = (y_i)` driving randomized bid prices.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedVector {
    values: Vec<f64>,
}

impl SeedVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        for &v in &values {
            if !(0.0..=1.0).contains(&v) || v.is_nan() {
                return Err(Error::SeedRange { value: v });
            }
        }
        Ok(SeedVector { values })
    }

    /// Draw `n` uniform seeds from `rng`.
    pub fn sample(n: usize, rng: &mut impl rand::Rng) -> Self {
        SeedVector { values: (0..n).map(|_| rng.gen::<f64>()).collect() }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: usize) -> f64 {
        self.values[i]
    }

    /// `Y_{-i}` completion: this vector with entry `i` replaced by `y`.
    pub fn with_replaced(&self, i: usize, y: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&y) || y.is_nan() {
            return Err(Error::SeedRange { value: y });
        }
        let mut values = self.values.clone();
        values[i] = y;
        Ok(SeedVector { values })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn single() -> Instance {
        Instance::new(
            "single",
            vec![Resource { id: 0, budget: 1.0, reward: 1.0 }],
            vec![vec![1.0]],
            false,
        )
        .unwrap()
    }

    #[test]
    fn single_entry_gamma() {
        assert_eq!(single().gamma(), 1.0);
    }

    #[test]
    fn bid_on_zero_budget_resource_is_schema_error() {
        let err = Instance::new(
            "bad",
            vec![Resource { id: 0, budget: 0.0, reward: 1.0 }],
            vec![vec![2.0]],
            false,
        )
        .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("arrivals[0].bids[0]"), "{msg}");
    }

    #[test]
    fn negative_budget_is_schema_error() {
        let err = Instance::new(
            "bad",
            vec![Resource { id: 0, budget: -1.0, reward: 1.0 }],
            vec![],
            false,
        )
        .unwrap_err();
        assert!(err.to_string().contains("resources[0].budget"));
    }

    #[test]
    fn non_contiguous_ids_rejected() {
        let err = Instance::new(
            "bad",
            vec![Resource { id: 1, budget: 1.0, reward: 1.0 }],
            vec![],
            false,
        )
        .unwrap_err();
        assert!(err.to_string().contains("resources[0].id"));
    }

    #[test]
    fn round_trip_single() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("inst.json");
        let inst = single();
        save_instance(&inst, &path).unwrap();
        let back = load_instance(&path).unwrap();
        assert_eq!(inst, back);
    }

    #[test]
    fn round_trip_example1() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ex1.json");
        let inst = gen_example1();
        save_instance(&inst, &path).unwrap();
        assert_eq!(load_instance(&path).unwrap(), inst);
    }

    #[test]
    fn empty_arrivals_round_trip() {
        let inst = Instance::new(
            "empty",
            vec![Resource { id: 0, budget: 2.0, reward: 1.0 }],
            vec![],
            false,
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.json");
        save_instance(&inst, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.contains("\"arrivals\": []"));
        assert_eq!(load_instance(&path).unwrap(), inst);
    }

    #[test]
    fn malformed_json_is_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.json");
        std::fs::write(&path, "{\"label\": 3}").unwrap();
        assert!(load_instance(&path).is_err());
    }

    #[test]
    fn seed_vector_rejects_out_of_range() {
        assert!(SeedVector::new(vec![0.5, 1.2]).is_err());
        assert!(SeedVector::new(vec![0.0, 1.0]).is_ok());
    }

    #[test]
    fn augmented_budgets() {
        let inst = single().augmented();
        assert_eq!(inst.budget(0), 2.0);
    }

    proptest! {
        #[test]
        fn round_trip_random(budgets in proptest::collection::vec(0.01f64..100.0, 1..5),
                             seed in any::<u64>()) {
            use rand::SeedableRng;
            let n = budgets.len();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let resources: Vec<Resource> = budgets
                .iter()
                .enumerate()
                .map(|(id, &b)| Resource { id, budget: b, reward: 1.0 })
                .collect();
            let t = 3usize;
            let bids: Vec<Vec<f64>> = (0..t)
                .map(|_| (0..n).map(|_| rand::Rng::gen::<f64>(&mut rng)).collect())
                .collect();
            let inst = Instance::new("prop", resources, bids, false).unwrap();
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("p.json");
            save_instance(&inst, &path).unwrap();
            let back = load_instance(&path).unwrap();
            // bit-exact round trip, including gamma recomputation
            prop_assert_eq!(inst, back);
        }
    }
}
