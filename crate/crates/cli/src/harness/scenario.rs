//! Canned datasets and paired runs used by the test suites and the CLI.

use activecanvas_core::synthetic::{generate_synthetic, Dataset, SyntheticSpec};
use activecanvas_core::{EngineConfig, Workspace};

use super::simulate::{diligent_commit, simulate, RunReport};
use super::user::SimulatedUser;
use super::HarnessError;

/// 5 classes, 250 items, 500 features, 20 of them informative.
pub fn reference_dataset(seed: u64) -> Result<Dataset, HarnessError> {
    Ok(generate_synthetic(&SyntheticSpec {
        seed,
        ..SyntheticSpec::default()
    })?)
}

/// Feature count of the lazy-user dataset.
pub const LAZY_DIMS: usize = 100;

/// Like [`reference_dataset`] but with 100 features.
pub fn lazy_dataset(seed: u64) -> Result<Dataset, HarnessError> {
    Ok(generate_synthetic(&SyntheticSpec {
        dims: LAZY_DIMS,
        seed,
        ..SyntheticSpec::default()
    })?)
}

#[derive(Clone, Debug)]
pub struct PairedRun {
    pub with_commits: RunReport,
    pub without_commits: RunReport,
}

/// Runs `user` twice from the same starting layout: once after `diligent`
/// arranged and committed every item, once on the bare dataset.
pub fn with_and_without_commits(
    data: &Dataset,
    diligent: &SimulatedUser,
    user: &SimulatedUser,
    config: &EngineConfig,
    session_seed: u64,
) -> Result<PairedRun, HarnessError> {
    let mut with = Workspace::new("with-commits", data.items.clone(), data.features.clone(), session_seed)?;
    diligent_commit(&mut with, diligent, "diligent")?;
    with.new_session(session_seed)?;
    let with_commits = simulate(&mut with, user, config)?;

    let mut without = Workspace::new("without-commits", data.items.clone(), data.features.clone(), session_seed)?;
    without.new_session(session_seed)?;
    let without_commits = simulate(&mut without, user, config)?;
    Ok(PairedRun {
        with_commits,
        without_commits,
    })
}

/// Median of a non-empty sample; the mean of the two middle values for even sizes.
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 0 {
        (v[m - 1] + v[m]) / 2.0
    } else {
        v[m]
    }
}
