//! Bundled instance corpus. Instances are produced by the deterministic
//! generators and also checked into the repository as JSON under `corpus/`;
//! a test asserts the two stay in sync.

use std::path::Path;

use crate::algorithms::{GreedyOblivious, TieBreak};
use crate::error::Error;
use crate::instance::{
    gen_adversary, gen_bmatching, gen_decomposable, gen_example1, gen_example2, gen_example3,
    gen_pd_obstruction, gen_random_smallbid, save_instance, Instance,
};
use crate::Result;

/// Names of the full bundled corpus.
pub const CORPUS_NAMES: &[&str] = &[
    "example1",
    "example2-n30",
    "example3-n10",
    "adversary-n3",
    "adversary-n10",
    "adversary-n50",
    "decomposable-n4-t8-s1",
    "bmatching-n4-t10-s2",
    "smallbid-n4-t10-s3",
    "pd-obstruction",
];

/// Subset the pathwise bound checks sweep. The sweep cost is
/// instances x resources x grid x outer seeds fractional runs, so only the
/// small instances are in scope; the large ones are covered by the coupling
/// and ratio checks.
pub const VERIFY_NAMES: &[&str] = &[
    "example1",
    "example3-n4",
    "adversary-n3",
    "decomposable-n3-t6-s1",
    "bmatching-n3-t6-s2",
    "smallbid-n3-t6-s3",
];

fn adversary_instance(n: usize) -> Result<Instance> {
    let mut target = GreedyOblivious::new(TieBreak::LowestId);
    Ok(gen_adversary(n, &mut target)?.instance)
}

/// Construct a bundled instance by name.
pub fn builtin(name: &str) -> Result<Instance> {
    match name {
        "example1" => Ok(gen_example1()),
        "example2-n30" => gen_example2(30),
        "example3-n4" => gen_example3(4),
        "example3-n10" => gen_example3(10),
        "adversary-n3" => adversary_instance(3),
        "adversary-n10" => adversary_instance(10),
        "adversary-n50" => adversary_instance(50),
        "decomposable-n3-t6-s1" => gen_decomposable(3, 6, 1),
        "decomposable-n4-t8-s1" => gen_decomposable(4, 8, 1),
        "bmatching-n3-t6-s2" => gen_bmatching(3, 6, 2),
        "bmatching-n4-t10-s2" => gen_bmatching(4, 10, 2),
        "smallbid-n3-t6-s3" => gen_random_smallbid(3, 6, 0.25, 3),
        "smallbid-n4-t10-s3" => gen_random_smallbid(4, 10, 0.25, 3),
        "pd-obstruction" => Ok(gen_pd_obstruction()),
        _ => Err(Error::Unknown { kind: "instance".to_string(), name: name.to_string() }),
    }
}

pub fn bundled() -> Result<Vec<Instance>> {
    CORPUS_NAMES.iter().map(|n| builtin(n)).collect()
}

pub fn verify_corpus() -> Result<Vec<Instance>> {
    VERIFY_NAMES.iter().map(|n| builtin(n)).collect()
}

/// Write every bundled instance as `<name>.json` under `dir`.
pub fn write_corpus(dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    for name in CORPUS_NAMES {
        save_instance(&builtin(name)?, dir.join(format!("{name}.json")))?;
    }
    Ok(())
}
