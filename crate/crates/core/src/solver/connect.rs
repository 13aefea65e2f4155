use rand::Rng;
use serde::{Deserialize, Serialize};

use super::chart::Chart;
use super::system::{ConstraintSystem, SolutionWitness};

/// Residual bound for path vertices.
pub const PATH_TOL: f64 = 1e-7;
const INITIAL_STEP: f64 = 0.1;
const MIN_STEP: f64 = 1e-6;
const MAX_EVALUATIONS: usize = 20_000;
const WAYPOINT_TRIES: usize = 16;

/// Budget exhaustion, with the last vertex reached from `p`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConnectFailure {
    pub last: Vec<f64>,
    pub reason: String,
}

fn dist_inf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn unwrap_angle(c0: &[f64], c1: &mut [f64], idx: Option<usize>) {
    if let Some(i) = idx {
        let tau = std::f64::consts::TAU;
        let d = (c1[i] - c0[i]).rem_euclid(tau);
        c1[i] = c0[i] + if d > std::f64::consts::PI { d - tau } else { d };
    }
}

/// Straight-line homotopy in chart coordinates with adaptive steps.
fn segment(sys: &ConstraintSystem, chart: &Chart, x0: &[f64], x1: &[f64]) -> Result<Vec<Vec<f64>>, ConnectFailure> {
    let mut path = vec![x0.to_vec()];
    if dist_inf(x0, x1) == 0.0 {
        return Ok(path);
    }
    let c0 = chart.coords(sys, x0);
    let mut c1 = chart.coords(sys, x1);
    unwrap_angle(&c0, &mut c1, chart.angle_index(sys));
    if c0.is_empty() {
        return Err(ConnectFailure { last: x0.to_vec(), reason: "distinct points of a zero-dimensional chart".into() });
    }
    let (mut t, mut h) = (0.0f64, INITIAL_STEP);
    let mut evaluations = 0;
    while t < 1.0 {
        evaluations += 1;
        let last = path.last().expect("path starts at x0").clone();
        if evaluations > MAX_EVALUATIONS {
            return Err(ConnectFailure { last, reason: "evaluation budget exhausted".into() });
        }
        let tn = (t + h).min(1.0);
        let c: Vec<f64> = c0.iter().zip(&c1).map(|(a, b)| a + tn * (b - a)).collect();
        let candidate = if tn == 1.0 { Some(x1.to_vec()) } else { chart.point(sys, &c) };
        let accepted = candidate.filter(|x| sys.verifies(x, PATH_TOL) && dist_inf(&last, x) <= 0.25 * (1.0 + norm_inf(&last)));
        match accepted {
            Some(x) => {
                path.push(x);
                t = tn;
                h = (2.0 * h).min(INITIAL_STEP);
            }
            None => {
                h *= 0.5;
                if h < MIN_STEP {
                    return Err(ConnectFailure { last, reason: format!("step size below {MIN_STEP:e} at t = {t}") });
                }
            }
        }
    }
    Ok(path)
}

/// Connects two points of the chart, falling back to a detour through
/// fresh samples when the direct segment fails.
pub fn connect_in_chart(
    sys: &ConstraintSystem,
    chart: &Chart,
    p: &[f64],
    q: &[f64],
    rng: &mut impl Rng,
) -> Result<Vec<Vec<f64>>, ConnectFailure> {
    let direct = match segment(sys, chart, p, q) {
        Ok(path) => return Ok(path),
        Err(e) => e,
    };
    for _ in 0..WAYPOINT_TRIES {
        let Some(w) = chart.waypoint(sys, rng).filter(|w| sys.verifies(w, PATH_TOL)) else {
            continue;
        };
        if let (Ok(mut a), Ok(b)) = (segment(sys, chart, p, &w), segment(sys, chart, &w, q)) {
            a.extend(b.into_iter().skip(1));
            return Ok(a);
        }
    }
    Err(direct)
}

/// Path between two witnesses of `sys`, every vertex re-verified.
pub fn connect(p: &SolutionWitness, q: &SolutionWitness, sys: &ConstraintSystem) -> Result<Vec<Vec<f64>>, ConnectFailure> {
    let (_, chart) = super::analyze(sys);
    let Some(chart) = chart else {
        return Err(ConnectFailure { last: p.point.clone(), reason: "solution set is empty".into() });
    };
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(0);
    connect_in_chart(sys, &chart, &p.point, &q.point, &mut rng)
}
