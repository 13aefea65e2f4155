//! Solution sets of the compatibility system for `d = 1`, `m ∈ {1, 2}`:
//! exact case analysis, charts, seeded sampling and connectivity
//! certificates.

mod certificate;
mod chart;
mod connect;
mod kodaira;
mod system;
mod threefold;

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub use certificate::{connectivity_certificate, CertifiedPath, ConnectivityCertificate, FailedPair};
pub use chart::{correct, region_coords, region_point, BRange, Chart, RowChart, RowMode, BOX, CORRECTOR_ITERATIONS};
pub use connect::{connect, connect_in_chart, ConnectFailure, PATH_TOL};
pub use kodaira::analyze_kodaira;
pub use system::{ConstraintSystem, SolutionWitness};
pub use threefold::{analyze_threefold, classify_case};

use crate::error::{Error, Result};
use crate::exact::{q_to_f64, Q};

/// Residual bound for witnesses.
pub const WITNESS_TOL: f64 = 1e-9;

/// A leaf of the case tree with the constants evaluated along the way.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CaseInfo {
    pub label: String,
    pub subcase: Option<String>,
    pub constants: BTreeMap<String, f64>,
    pub empty_reason: Option<String>,
}

impl CaseInfo {
    fn new(label: &str) -> Self {
        Self { label: label.into(), subcase: None, constants: BTreeMap::new(), empty_reason: None }
    }

    fn constant(&mut self, name: &str, value: &Q) {
        self.constants.insert(name.into(), q_to_f64(value));
    }

    fn empty(mut self, reason: &str) -> Self {
        self.empty_reason = Some(reason.into());
        self
    }

    /// `label.subcase`, or the label alone.
    pub fn full_label(&self) -> String {
        match &self.subcase {
            Some(s) => format!("{}.{}", self.label, s),
            None => self.label.clone(),
        }
    }
}

/// The solution set: empty, or a chart of the given real dimension.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolutionSet {
    pub case: CaseInfo,
    pub chart: Option<Chart>,
    pub dimension: Option<usize>,
    pub witnesses: Vec<SolutionWitness>,
}

impl SolutionSet {
    pub fn is_empty(&self) -> bool {
        self.chart.is_none()
    }
}

/// Case leaf and chart for either regime.
pub fn analyze(sys: &ConstraintSystem) -> (CaseInfo, Option<Chart>) {
    if sys.m == 1 {
        analyze_kodaira(sys)
    } else {
        analyze_threefold(sys)
    }
}

fn finish(sys: &ConstraintSystem, case: CaseInfo, chart: Option<Chart>) -> SolutionSet {
    let dimension = chart.as_ref().map(|c| c.dim(sys));
    let witnesses = chart.as_ref().map(|c| draw(sys, &case, c, 3, 0)).unwrap_or_default();
    SolutionSet { case, chart, dimension, witnesses }
}

pub fn solve_kodaira(sys: &ConstraintSystem) -> Result<SolutionSet> {
    if sys.m != 1 {
        return Err(Error::UnsupportedBaseDimension { m: sys.m });
    }
    let (case, chart) = analyze_kodaira(sys);
    Ok(finish(sys, case, chart))
}

pub fn solve_threefold(sys: &ConstraintSystem) -> Result<SolutionSet> {
    if sys.m != 2 {
        return Err(Error::UnsupportedBaseDimension { m: sys.m });
    }
    let (case, chart) = analyze_threefold(sys);
    Ok(finish(sys, case, chart))
}

pub fn solve(sys: &ConstraintSystem) -> SolutionSet {
    let (case, chart) = analyze(sys);
    finish(sys, case, chart)
}

fn draw(sys: &ConstraintSystem, case: &CaseInfo, chart: &Chart, count: usize, seed: u64) -> Vec<SolutionWitness> {
    let label = case.full_label();
    if let Chart::Point(p) = chart {
        return SolutionWitness::verified(sys, p, WITNESS_TOL, &label).into_iter().take(count).collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut rejected = 0usize;
    let budget = 50 * count + 100;
    for _ in 0..budget {
        if out.len() == count {
            break;
        }
        match chart.sample(sys, &mut rng).and_then(|x| SolutionWitness::verified(sys, &x, WITNESS_TOL, &label)) {
            Some(w) => out.push(w),
            None => rejected += 1,
        }
    }
    if rejected > 0 {
        log::info!("{label}: rejected {rejected} draws, kept {}", out.len());
    }
    out
}

/// Seeded draws from the chart, each re-verified through the residual
/// checkers. A zero-dimensional set yields its single point.
pub fn sample_solutions(sys: &ConstraintSystem, count: usize, seed: u64) -> Result<Vec<SolutionWitness>> {
    let (case, chart) = analyze(sys);
    let chart = chart.ok_or(Error::EmptySolutionSet)?;
    Ok(draw(sys, &case, &chart, count, seed))
}
