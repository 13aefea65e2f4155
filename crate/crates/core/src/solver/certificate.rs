use petgraph::unionfind::UnionFind;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::connect::{connect_in_chart, PATH_TOL};
use super::system::{ConstraintSystem, SolutionWitness};
use super::{analyze, draw};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertifiedPath {
    pub from: usize,
    pub to: usize,
    pub vertices: Vec<Vec<f64>>,
    /// Largest residual over the vertices.
    pub max_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FailedPair {
    pub from: usize,
    pub to: usize,
    pub last: Vec<f64>,
    pub reason: String,
}

/// Sampled witnesses, the paths found between them and the resulting
/// number of components.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConnectivityCertificate {
    pub seed: u64,
    pub samples: usize,
    pub case_label: String,
    pub dimension: Option<usize>,
    pub path_tolerance: f64,
    pub witnesses: Vec<SolutionWitness>,
    pub component_count: usize,
    pub paths: Vec<CertifiedPath>,
    pub failures: Vec<FailedPair>,
}

impl ConnectivityCertificate {
    /// Re-checks every witness and path vertex against the residual system.
    pub fn reverify(&self, sys: &ConstraintSystem) -> bool {
        let witnesses_ok = self.witnesses.iter().all(|w| sys.verifies(&w.point, super::WITNESS_TOL));
        let paths_ok = self.paths.iter().all(|p| {
            p.vertices.first() == self.witnesses.get(p.from).map(|w| &w.point)
                && p.vertices.last() == self.witnesses.get(p.to).map(|w| &w.point)
                && p.vertices.iter().all(|v| sys.verifies(v, self.path_tolerance))
        });
        witnesses_ok && paths_ok
    }
}

fn max_residual(sys: &ConstraintSystem, vertices: &[Vec<f64>]) -> f64 {
    vertices.iter().filter_map(|v| sys.residuals(v)).map(|(a, r)| a.max(r)).fold(0.0, f64::max)
}

/// Connects consecutive witnesses, then tries to join the remaining
/// components pairwise, merging with union-find.
pub fn connectivity_certificate(sys: &ConstraintSystem, samples: usize, seed: u64) -> ConnectivityCertificate {
    let (case, chart) = analyze(sys);
    let mut cert = ConnectivityCertificate {
        seed,
        samples,
        case_label: case.full_label(),
        dimension: chart.as_ref().map(|c| c.dim(sys)),
        path_tolerance: PATH_TOL,
        witnesses: Vec::new(),
        component_count: 0,
        paths: Vec::new(),
        failures: Vec::new(),
    };
    let Some(chart) = chart else {
        return cert;
    };
    cert.witnesses = draw(sys, &case, &chart, samples, seed);
    let n = cert.witnesses.len();
    let mut uf = UnionFind::<usize>::new(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    let mut attempt = |i: usize, j: usize, uf: &mut UnionFind<usize>, cert: &mut ConnectivityCertificate| {
        let (p, q) = (cert.witnesses[i].point.clone(), cert.witnesses[j].point.clone());
        match connect_in_chart(sys, &chart, &p, &q, &mut rng) {
            Ok(vertices) => {
                let max_residual = max_residual(sys, &vertices);
                cert.paths.push(CertifiedPath { from: i, to: j, vertices, max_residual });
                uf.union(i, j);
            }
            Err(e) => cert.failures.push(FailedPair { from: i, to: j, last: e.last, reason: e.reason }),
        }
    };
    for i in 1..n {
        attempt(i - 1, i, &mut uf, &mut cert);
    }
    for i in 0..n {
        for j in i + 1..n {
            if !uf.equiv(i, j) {
                attempt(i, j, &mut uf, &mut cert);
            }
        }
    }
    let mut roots: Vec<usize> = (0..n).map(|i| uf.find(i)).collect();
    roots.sort_unstable();
    roots.dedup();
    cert.component_count = roots.len();
    if cert.component_count > 1 {
        log::warn!("{}: {} components among {n} witnesses", cert.case_label, cert.component_count);
    }
    cert
}
