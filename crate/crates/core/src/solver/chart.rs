//! Parametrizations of the solution sets.

use rand::Rng;
use serde::Serialize;

use super::system::ConstraintSystem;

/// Half-width of the sampling box in chart coordinates.
pub const BOX: f64 = 10.0;
pub const CORRECTOR_ITERATIONS: usize = 50;

/// Admissible values of `b` (open interval, `hi` possibly infinite).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum BRange {
    Fixed(f64),
    Interval { lo: f64, hi: f64 },
}

impl BRange {
    pub fn all() -> Self {
        BRange::Interval { lo: 0.0, hi: f64::INFINITY }
    }

    pub fn contains(&self, b: f64) -> bool {
        match *self {
            BRange::Fixed(v) => b == v,
            BRange::Interval { lo, hi } => b > lo && b < hi,
        }
    }

    fn sample(&self, rng: &mut impl Rng) -> Option<f64> {
        match *self {
            BRange::Fixed(v) => Some(v),
            BRange::Interval { lo, hi } => {
                let top = hi.min(BOX.max(2.0 * lo + 1.0));
                let b = rng.random_range(lo..=top);
                self.contains(b).then_some(b)
            }
        }
    }

    fn is_fixed(&self) -> bool {
        matches!(self, BRange::Fixed(_))
    }
}

/// The free second row `s` of `B' = P⁻¹B`, given the first row `r(b)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum RowMode {
    /// `s = σr + tv`, `t > 0`.
    HalfLine,
    /// `s = s₀ + t r/|r|`, `t ∈ ℝ`.
    Line,
    /// `s = x r/|r| + y n`, `y > 0`.
    HalfPlane,
}

/// Solutions with `B = P·[r(b); s]`, `r(b) = b·u + w/b`, and `s` subject to
/// the scalar equation `α(b)·s + κ(b) = 0` and `r × s > 0`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RowChart {
    pub p: [[f64; 2]; 2],
    pub u: [f64; 2],
    pub w: [f64; 2],
    pub a_plus: f64,
    pub a_minus: f64,
    /// `D·P`.
    pub d: [[f64; 2]; 2],
    pub b_range: BRange,
    pub mode: RowMode,
}

struct RowFrame {
    r: [f64; 2],
    alpha: [f64; 2],
    kappa: f64,
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn cross(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn unit(a: [f64; 2]) -> [f64; 2] {
    let n = dot(a, a).sqrt();
    [a[0] / n, a[1] / n]
}

impl RowChart {
    fn frame(&self, b: f64) -> RowFrame {
        let r = [b * self.u[0] + self.w[0] / b, b * self.u[1] + self.w[1] / b];
        let d = &self.d;
        RowFrame {
            r,
            alpha: [self.a_plus * r[1] - b * d[1][1], -self.a_plus * r[0] + b * d[0][1]],
            kappa: self.a_minus + b * (d[0][0] * r[1] - d[1][0] * r[0]),
        }
    }

    fn assemble(&self, b: f64, r: [f64; 2], s: [f64; 2]) -> Vec<f64> {
        let p = &self.p;
        vec![
            b,
            p[0][0] * r[0] + p[0][1] * s[0],
            p[0][0] * r[1] + p[0][1] * s[1],
            p[1][0] * r[0] + p[1][1] * s[0],
            p[1][0] * r[1] + p[1][1] * s[1],
        ]
    }

    fn second_row(&self, x: &[f64]) -> [f64; 2] {
        let p = &self.p;
        // P has determinant one
        let (bm0, bm1) = ([x[1], x[2]], [x[3], x[4]]);
        [-p[1][0] * bm0[0] + p[0][0] * bm1[0], -p[1][0] * bm0[1] + p[0][0] * bm1[1]]
    }

    fn half_line_basis(f: &RowFrame) -> ([f64; 2], [f64; 2]) {
        let n = dot(f.alpha, f.r);
        let sigma = -f.kappa / n;
        let v = unit([-f.alpha[1] * n.signum(), f.alpha[0] * n.signum()]);
        ([sigma * f.r[0], sigma * f.r[1]], v)
    }

    fn fibre_point(&self, b: f64, t: &[f64]) -> Option<Vec<f64>> {
        let f = self.frame(b);
        let rh = unit(f.r);
        let s = match self.mode {
            RowMode::HalfLine => {
                let (s0, v) = Self::half_line_basis(&f);
                let t = t[0].exp();
                [s0[0] + t * v[0], s0[1] + t * v[1]]
            }
            RowMode::Line => {
                let a2 = dot(f.alpha, f.alpha);
                [-f.kappa * f.alpha[0] / a2 + t[0] * rh[0], -f.kappa * f.alpha[1] / a2 + t[0] * rh[1]]
            }
            RowMode::HalfPlane => {
                let y = t[1].exp();
                [t[0] * rh[0] - y * rh[1], t[0] * rh[1] + y * rh[0]]
            }
        };
        s.iter().all(|v| v.is_finite()).then(|| self.assemble(b, f.r, s))
    }

    fn fibre_coords(&self, x: &[f64]) -> Vec<f64> {
        let f = self.frame(x[0]);
        let s = self.second_row(x);
        let rh = unit(f.r);
        match self.mode {
            RowMode::HalfLine => {
                let (s0, v) = Self::half_line_basis(&f);
                vec![dot([s[0] - s0[0], s[1] - s0[1]], v).ln()]
            }
            RowMode::Line => vec![dot(s, rh)],
            RowMode::HalfPlane => vec![dot(s, rh), cross(rh, s).ln()],
        }
    }

    fn fibre_dim(&self) -> usize {
        match self.mode {
            RowMode::HalfPlane => 2,
            _ => 1,
        }
    }

    fn sample_fibre(&self, rng: &mut impl Rng) -> Vec<f64> {
        match self.mode {
            RowMode::HalfLine => vec![rng.random_range(f64::MIN_POSITIVE..=BOX).ln()],
            RowMode::Line => vec![rng.random_range(-BOX..=BOX)],
            RowMode::HalfPlane => vec![rng.random_range(-BOX..=BOX), rng.random_range(f64::MIN_POSITIVE..=BOX).ln()],
        }
    }
}

/// A chart of one solution set, mapping coordinates to points
/// `[b₁, b₂]` (`m = 1`) or `[b, b₁₁, b₁₂, b₂₁, b₂₂]` (`m = 2`).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Chart {
    Point(Vec<f64>),
    /// The whole open region.
    Open,
    /// The hypersurface `a₋ - a₊ det B + b·b'(B) = 0`, reached from region
    /// coordinates by a Newton corrector.
    Quadric,
    /// `b₁ = k·b₂^power`.
    KodairaCurve { k: f64, power: i32 },
    /// `B = b·M₁ + M₂/b`, row-major.
    IndepCurve { m1: [f64; 4], m2: [f64; 4] },
    Row(RowChart),
}

/// `(log b, log √det B, θ, s, u)` with `B = rot(θ)·√det B·[[eˢ, u], [0, e⁻ˢ]]`.
pub fn region_coords(x: &[f64]) -> Vec<f64> {
    let (b11, b21) = (x[1], x[3]);
    let r11 = b11.hypot(b21);
    let (c, s) = (b11 / r11, b21 / r11);
    let r12 = c * x[2] + s * x[4];
    let r22 = (x[1] * x[4] - x[2] * x[3]) / r11;
    let r = (r11 * r22).sqrt();
    vec![x[0].ln(), r.ln(), s.atan2(c), 0.5 * (r11 / r22).ln(), r12 / r]
}

pub fn region_point(c: &[f64]) -> Vec<f64> {
    let r = c[1].exp();
    let (s, co) = c[2].sin_cos();
    let (r11, r12, r22) = (r * c[3].exp(), r * c[4], r * (-c[3]).exp());
    vec![c[0].exp(), co * r11, co * r12 - s * r22, s * r11, s * r12 + co * r22]
}

fn quadric_gradient(sys: &ConstraintSystem, x: &[f64]) -> [f64; 5] {
    let (ap, b) = (sys.a_plus, x[0]);
    let d = |i, j| sys.d_entry(i, j);
    [
        sys.b_prime(&[x[1], x[2], x[3], x[4]]),
        -ap * x[4] - b * d(1, 0),
        ap * x[3] + b * d(0, 0),
        ap * x[2] - b * d(1, 1),
        -ap * x[1] + b * d(0, 1),
    ]
}

fn quadric_tolerance(sys: &ConstraintSystem, x: &[f64]) -> f64 {
    1e-13 * sys.scale() * (1.0 + x.iter().map(|v| v * v).sum::<f64>())
}

/// Damped minimum-norm Newton iteration onto the quadric, staying in the
/// open region.
pub fn correct(sys: &ConstraintSystem, x0: &[f64]) -> Option<Vec<f64>> {
    let mut x = x0.to_vec();
    if !sys.in_region(&x) {
        return None;
    }
    // the equation is linear in b: solve for it when that is a short move
    let bp = sys.b_prime(&[x[1], x[2], x[3], x[4]]);
    if bp != 0.0 {
        let det = x[1] * x[4] - x[2] * x[3];
        let b = (sys.a_plus * det - sys.a_minus) / bp;
        if b > 0.5 * x[0] && b < 2.0 * x[0] {
            let mut y = x.clone();
            y[0] = b;
            if sys.quadric(&y).abs() <= quadric_tolerance(sys, &y) {
                return Some(y);
            }
        }
    }
    for _ in 0..CORRECTOR_ITERATIONS {
        let f = sys.quadric(&x);
        if f.abs() <= quadric_tolerance(sys, &x) {
            return Some(x);
        }
        let g = quadric_gradient(sys, &x);
        let gn: f64 = g.iter().map(|v| v * v).sum();
        if gn == 0.0 {
            return None;
        }
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..30 {
            let xn: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi - lambda * f * gi / gn).collect();
            if sys.in_region(&xn) && sys.quadric(&xn).abs() < f.abs() {
                accepted = Some(xn);
                break;
            }
            lambda *= 0.5;
        }
        x = accepted?;
    }
    (sys.quadric(&x).abs() <= quadric_tolerance(sys, &x)).then_some(x)
}

fn sample_region(sys: &ConstraintSystem, rng: &mut impl Rng) -> Option<Vec<f64>> {
    if sys.m == 1 {
        return Some(vec![rng.random_range(f64::MIN_POSITIVE..=BOX), rng.random_range(f64::MIN_POSITIVE..=BOX)]);
    }
    let b = rng.random_range(f64::MIN_POSITIVE..=BOX);
    let e: Vec<f64> = (0..4).map(|_| rng.random_range(-BOX..=BOX)).collect();
    let x = vec![b, e[0], e[1], e[2], e[3]];
    sys.in_region(&x).then_some(x)
}

/// Scales a random region point onto the quadric: `B ↦ tB` turns the
/// equation into `-a₊ det B·t² + b·b'(B)·t + a₋ = 0`.
fn sample_quadric(sys: &ConstraintSystem, rng: &mut impl Rng) -> Option<Vec<f64>> {
    let x = sample_region(sys, rng)?;
    let det = x[1] * x[4] - x[2] * x[3];
    let qa = -sys.a_plus * det;
    let qb = x[0] * sys.b_prime(&[x[1], x[2], x[3], x[4]]);
    let qc = sys.a_minus;
    let roots: Vec<f64> = if qa != 0.0 {
        let disc = qb * qb - 4.0 * qa * qc;
        if disc < 0.0 {
            return None;
        }
        let sq = disc.sqrt();
        vec![(-qb + sq) / (2.0 * qa), (-qb - sq) / (2.0 * qa)]
    } else if qb != 0.0 {
        vec![-qc / qb]
    } else {
        return None;
    };
    let roots: Vec<f64> = roots.into_iter().filter(|t| *t != 0.0 && t.is_finite()).collect();
    if roots.is_empty() {
        return None;
    }
    let t = roots[rng.random_range(0..roots.len())];
    correct(sys, &[x[0], t * x[1], t * x[2], t * x[3], t * x[4]])
}

/// A point of `{b'(B) = 0, a₊ det B = a₋}`, where every `b > 0` solves
/// the equation; the sheets `b' > 0` and `b' < 0` meet there.
fn sample_bridge(sys: &ConstraintSystem, rng: &mut impl Rng) -> Option<Vec<f64>> {
    let x = sample_region(sys, rng)?;
    let w: Vec<f64> = (0..4)
        .map(|k| {
            let mut e = [0.0; 4];
            e[k] = 1.0;
            sys.b_prime(&e)
        })
        .collect();
    let wn: f64 = w.iter().map(|v| v * v).sum();
    if wn == 0.0 {
        return None;
    }
    let s = sys.b_prime(&[x[1], x[2], x[3], x[4]]) / wn;
    let bm: Vec<f64> = (0..4).map(|k| x[k + 1] - s * w[k]).collect();
    let det = bm[0] * bm[3] - bm[1] * bm[2];
    let t = match (sys.a_plus, sys.a_minus) {
        (ap, am) if ap != 0.0 => {
            let target = am / ap;
            if target <= 0.0 || det <= 0.0 {
                return None;
            }
            (target / det).sqrt()
        }
        (_, am) if am == 0.0 && det > 0.0 => 1.0,
        _ => return None,
    };
    correct(sys, &[x[0], t * bm[0], t * bm[1], t * bm[2], t * bm[3]])
}

impl Chart {
    pub fn dim(&self, sys: &ConstraintSystem) -> usize {
        match self {
            Chart::Point(_) => 0,
            Chart::Open => sys.point_len(),
            Chart::Quadric => 4,
            Chart::KodairaCurve { .. } | Chart::IndepCurve { .. } => 1,
            Chart::Row(rc) => rc.fibre_dim() + usize::from(!rc.b_range.is_fixed()),
        }
    }

    pub fn coords(&self, sys: &ConstraintSystem, x: &[f64]) -> Vec<f64> {
        match self {
            Chart::Point(_) => Vec::new(),
            Chart::Open if sys.m == 1 => vec![x[0].ln(), x[1].ln()],
            Chart::Open | Chart::Quadric => region_coords(x),
            Chart::KodairaCurve { .. } => vec![x[1].ln()],
            Chart::IndepCurve { .. } => vec![x[0].ln()],
            Chart::Row(rc) => {
                let mut c = if rc.b_range.is_fixed() { Vec::new() } else { vec![x[0].ln()] };
                c.extend(rc.fibre_coords(x));
                c
            }
        }
    }

    /// The point with chart coordinates `c`, or `None` outside the chart.
    pub fn point(&self, sys: &ConstraintSystem, c: &[f64]) -> Option<Vec<f64>> {
        let x = match self {
            Chart::Point(p) => p.clone(),
            Chart::Open if sys.m == 1 => vec![c[0].exp(), c[1].exp()],
            Chart::Open => region_point(c),
            Chart::Quadric => correct(sys, &region_point(c))?,
            Chart::KodairaCurve { k, power } => {
                let b2 = c[0].exp();
                vec![k * b2.powi(*power), b2]
            }
            Chart::IndepCurve { m1, m2 } => {
                let b = c[0].exp();
                let mut x = vec![b];
                x.extend((0..4).map(|i| b * m1[i] + m2[i] / b));
                x
            }
            Chart::Row(rc) => {
                let (b, rest) = match rc.b_range {
                    BRange::Fixed(b) => (b, c),
                    _ => (c[0].exp(), &c[1..]),
                };
                if !rc.b_range.contains(b) {
                    return None;
                }
                rc.fibre_point(b, rest)?
            }
        };
        sys.in_region(&x).then_some(x)
    }

    /// Detour point for the connector: on the quadric every other draw
    /// lies where its sheets meet.
    pub fn waypoint(&self, sys: &ConstraintSystem, rng: &mut impl Rng) -> Option<Vec<f64>> {
        match self {
            Chart::Quadric if rng.random_bool(0.5) => sample_bridge(sys, rng).filter(|x| sys.in_region(x)),
            _ => self.sample(sys, rng),
        }
    }

    /// One draw, uniform in the sampling box of the chart coordinates
    /// (with `b` or `b₂` uniform in `(0, 10]`).
    pub fn sample(&self, sys: &ConstraintSystem, rng: &mut impl Rng) -> Option<Vec<f64>> {
        let x = match self {
            Chart::Point(p) => p.clone(),
            Chart::Open => sample_region(sys, rng)?,
            Chart::Quadric => sample_quadric(sys, rng)?,
            Chart::KodairaCurve { .. } | Chart::IndepCurve { .. } => {
                let v = rng.random_range(f64::MIN_POSITIVE..=BOX);
                self.point(sys, &[v.ln()])?
            }
            Chart::Row(rc) => {
                let b = rc.b_range.sample(rng)?;
                let t = rc.sample_fibre(rng);
                rc.fibre_point(b, &t)?
            }
        };
        sys.in_region(&x).then_some(x)
    }

    /// Whether the chart coordinates include the angle of the region chart.
    pub fn angle_index(&self, sys: &ConstraintSystem) -> Option<usize> {
        match self {
            Chart::Open if sys.m == 2 => Some(2),
            Chart::Quadric => Some(2),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn region_chart_round_trip() {
        let x = [0.7, 1.5, -2.0, 0.25, 3.0];
        let back = region_point(&region_coords(&x));
        for (a, b) in x.iter().zip(&back) {
            assert!((a - b).abs() < 1e-12, "{x:?} vs {back:?}");
        }
    }

    #[test]
    fn corrector_lands_on_det_one() {
        let sys = ConstraintSystem::threefold(1.0, 1.0, [[0.0; 2]; 2], [[0.0; 2]; 4]).unwrap();
        let x = correct(&sys, &[1.0, 1.3, 0.2, -0.1, 0.9]).unwrap();
        assert!((x[1] * x[4] - x[2] * x[3] - 1.0).abs() < 1e-10);
    }
}
