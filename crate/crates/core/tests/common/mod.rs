//! Oracles and generators shared by the integration tests. Everything
//! here is computed from the defining equations directly, without the
//! library's case analysis.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C;
use rand::Rng;
use torus_bundle::exact::{q, q_frac, QMat, Q};
use torus_bundle::lattice::BundleDatum;
use torus_bundle::solver::ConstraintSystem;

/// Blocks of an `m = 2`, `d = 1` system; `l` rows are `L⁺₊, L⁺₋, L⁻₊, L⁻₋`.
#[derive(Clone, Debug)]
pub struct Threefold {
    pub a_plus: f64,
    pub a_minus: f64,
    pub d: [[f64; 2]; 2],
    pub l: [[f64; 2]; 4],
}

impl Threefold {
    pub fn system(&self) -> ConstraintSystem {
        ConstraintSystem::threefold(self.a_plus, self.a_minus, self.d, self.l).unwrap()
    }

    /// `ℓB + bλ`, `μ - b·m'B` and the quadric, for `x = [b, b₁₁, b₁₂, b₂₁, b₂₂]`.
    pub fn residual(&self, x: &[f64]) -> [f64; 5] {
        let (b, m) = (x[0], [[x[1], x[2]], [x[3], x[4]]]);
        let [lpp, lpm, lmp, lmm] = self.l;
        let rm = |v: [f64; 2]| [v[0] * m[0][0] + v[1] * m[1][0], v[0] * m[0][1] + v[1] * m[1][1]];
        let lb = rm(lpp);
        let mb = rm(lmp);
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        let d = self.d;
        // (DB)₁₂ - (DB)₂₁
        let skew = (d[0][0] * m[0][1] + d[0][1] * m[1][1]) - (d[1][0] * m[0][0] + d[1][1] * m[1][0]);
        [
            lb[0] + b * lmm[0],
            lb[1] + b * lmm[1],
            lpm[0] - b * mb[0],
            lpm[1] - b * mb[1],
            self.a_minus - self.a_plus * det + b * skew,
        ]
    }

    pub fn in_region(x: &[f64]) -> bool {
        x[0] > 0.0 && x[1] * x[4] - x[2] * x[3] > 0.0
    }

    /// Away from the boundary, where the residual can be made small
    /// without a solution nearby.
    pub fn inside(x: &[f64]) -> bool {
        x[0] > 1e-6 && x[1] * x[4] - x[2] * x[3] > 1e-6
    }
}

/// Random integer system in `[-3, 3]`, biased towards the degenerate
/// branches of the case tree.
pub fn random_threefold(rng: &mut impl Rng) -> Threefold {
    let mut e = || rng.random_range(-3i32..=3) as f64;
    let mut v = || [e(), e()];
    let mut t = Threefold { a_plus: 0.0, a_minus: 0.0, d: [[0.0; 2]; 2], l: [[0.0; 2]; 4] };
    t.a_plus = v()[0];
    t.a_minus = v()[0];
    t.d = [v(), v()];
    let (lpp, lpm, lmp, lmm) = (v(), v(), v(), v());
    let pattern = (lpp[0] as i32 + 3 + 7 * (lpm[1] as i32 + 3)) % 6;
    t.l = match pattern {
        0 => [[0.0; 2]; 4],
        1 => [lpp, lpm, lmp, lmm],
        2 => [lpp, [0.0; 2], [0.0; 2], lmm],
        3 => {
            let beta: f64 = if lmm[0] >= 0.0 { 1.0 } else { -1.0 };
            let k = lpm[0].abs().clamp(1.0, 3.0);
            let k = if lmm.iter().all(|x| (k * x).abs() <= 3.0) { k } else { 1.0 };
            [[beta * lmp[0], beta * lmp[1]], [-beta * k * lmm[0], -beta * k * lmm[1]], lmp, lmm]
        }
        4 => [[0.0; 2], lpm, lmp, [0.0; 2]],
        _ => {
            if lpm[0] > 0.0 {
                t.d = [[0.0; 2]; 2];
            }
            [[0.0; 2]; 4]
        }
    };
    t
}

/// Residuals in the unknowns `(log b, B, z)` with the slack equation
/// `det B = eᶻ`, so that the open region is the whole parameter space.
fn lifted_residual(t: &Threefold, y: &[f64]) -> [f64; 6] {
    let x = [y[0].exp(), y[1], y[2], y[3], y[4]];
    let r = t.residual(&x);
    [r[0], r[1], r[2], r[3], r[4], y[1] * y[4] - y[2] * y[3] - y[5].exp()]
}

fn jacobian(t: &Threefold, y: &[f64]) -> DMatrix<f64> {
    DMatrix::from_fn(6, 6, |i, j| {
        let h = 1e-7 * (1.0 + y[j].abs());
        let mut yp = y.to_vec();
        let mut ym = y.to_vec();
        yp[j] += h;
        ym[j] -= h;
        (lifted_residual(t, &yp)[i] - lifted_residual(t, &ym)[i]) / (2.0 * h)
    })
}

fn norm(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Levenberg–Marquardt on the lifted system, started at a region point.
pub fn refine(t: &Threefold, x0: &[f64], tol: f64) -> Option<Vec<f64>> {
    let det0 = x0[1] * x0[4] - x0[2] * x0[3];
    let mut y = vec![x0[0].ln(), x0[1], x0[2], x0[3], x0[4], if det0 > 0.0 { det0.ln() } else { 0.0 }];
    let point = |y: &[f64]| vec![y[0].exp(), y[1], y[2], y[3], y[4]];
    let mut mu = 1e-3;
    for _ in 0..300 {
        let r = lifted_residual(t, &y);
        let n = norm(&r);
        if n <= tol {
            break;
        }
        let j = jacobian(t, &y);
        let jt = j.transpose();
        let g = &jt * nalgebra::DVector::from_row_slice(&r);
        let mut improved = false;
        for _ in 0..20 {
            let h = &jt * &j + DMatrix::identity(6, 6) * mu;
            let Some(step) = h.lu().solve(&g) else {
                mu *= 10.0;
                continue;
            };
            let yn: Vec<f64> = y.iter().zip(step.iter()).map(|(a, s)| a - s).collect();
            if norm(&lifted_residual(t, &yn)) < n {
                y = yn;
                mu = (mu / 3.0).max(1e-12);
                improved = true;
                break;
            }
            mu *= 10.0;
        }
        if !improved {
            break;
        }
    }
    let x = point(&y);
    (norm(&t.residual(&x)) <= tol && Threefold::inside(&x)).then_some(x)
}

/// Coarse grid over `b` and the entries of `B`, followed by local
/// refinement from the best grid points.
pub fn grid_oracle(t: &Threefold) -> Option<Vec<f64>> {
    let bs = [0.1, 0.3, 1.0, 3.0, 9.0];
    let es = [-9.0, -6.0, -3.0, -1.0, -0.3, 0.0, 0.3, 1.0, 3.0, 6.0, 9.0];
    let mut scored: Vec<(f64, Vec<f64>)> = Vec::new();
    for &b in &bs {
        for &e0 in &es {
            for &e1 in &es {
                for &e2 in &es {
                    for &e3 in &es {
                        let x = vec![b, e0, e1, e2, e3];
                        if Threefold::in_region(&x) {
                            scored.push((norm(&t.residual(&x)), x));
                        }
                    }
                }
            }
        }
    }
    scored.sort_by(|a, b| a.0.total_cmp(&b.0));
    scored.iter().take(100).find_map(|(_, x)| refine(t, x, 1e-10))
}

/// Kodaira residuals `L⁺₊b₂ + b₁L⁻₋` and `L⁺₋/b₂ - b₁L⁻₊`.
pub fn kodaira_residual(l: [f64; 4], b1: f64, b2: f64) -> f64 {
    let [lpp, lpm, lmp, lmm] = l;
    (lpp * b2 + b1 * lmm).abs().max((lpm / b2 - b1 * lmp).abs())
}

#[derive(Debug, PartialEq)]
pub enum Shape {
    Empty,
    Point,
    Curve,
    Quadrant,
}

/// Grid scan of `(0, 10]²` at step `0.01`, then Gauss–Newton refinement of
/// near-hits; returns the shape and the refined points.
pub fn kodaira_grid(l: [f64; 4]) -> (Shape, Vec<(f64, f64)>) {
    let n = 1000;
    let mut exact = 0usize;
    let mut near = Vec::new();
    for i in 1..=n {
        let b1 = i as f64 * 0.01;
        for j in 1..=n {
            let b2 = j as f64 * 0.01;
            let r = kodaira_residual(l, b1, b2);
            if r <= 1e-6 {
                exact += 1;
            }
            if r <= 0.05 {
                near.push((b1, b2));
            }
        }
    }
    if exact * 100 >= 99 * n * n {
        return (Shape::Quadrant, Vec::new());
    }
    let stride = (near.len() / 2000).max(1);
    let hits: Vec<(f64, f64)> = near.iter().step_by(stride).filter_map(|&(b1, b2)| kodaira_refine(l, b1, b2)).collect();
    if hits.is_empty() {
        return (Shape::Empty, hits);
    }
    let (p1, p2) = hits[0];
    let spread = hits.iter().map(|(a, b)| (a - p1).abs().max((b - p2).abs())).fold(0.0, f64::max);
    (if spread < 1e-5 { Shape::Point } else { Shape::Curve }, hits)
}

fn kodaira_refine(l: [f64; 4], b1: f64, b2: f64) -> Option<(f64, f64)> {
    let [lpp, lpm, lmp, lmm] = l;
    let (mut x, mut y) = (b1, b2);
    for _ in 0..60 {
        if kodaira_residual(l, x, y) <= 1e-12 {
            break;
        }
        // minimum-norm Gauss–Newton step on the two equations
        let r = [lpp * y + x * lmm, lpm / y - x * lmp];
        let j = DMatrix::from_row_slice(2, 2, &[lmm, lpp, -lmp, -lpm / (y * y)]);
        let pinv = j.pseudo_inverse(1e-12).ok()?;
        let s = pinv * nalgebra::DVector::from_row_slice(&r);
        x -= s[0];
        y -= s[1];
        if !(x > 0.0 && y > 0.0) {
            return None;
        }
    }
    // stay inside the scanned cells; limits at b = 0 are not solutions
    let inside = |t: f64| (0.005..=10.0).contains(&t);
    (kodaira_residual(l, x, y) <= 1e-6 && inside(x) && inside(y)).then_some((x, y))
}

pub fn random_antisymmetric(rng: &mut impl Rng, n: usize, bound: i64) -> Vec<Vec<i64>> {
    let mut a = vec![vec![0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let v = rng.random_range(-bound..=bound);
            a[i][j] = v;
            a[j][i] = -v;
        }
    }
    a
}

pub fn random_datum(rng: &mut impl Rng, m: usize, d: usize, bound: i64) -> BundleDatum {
    let comps: Vec<Vec<Vec<i64>>> = (0..2 * d).map(|_| random_antisymmetric(rng, 2 * m, bound)).collect();
    BundleDatum::from_i64(m, d, &comps).unwrap()
}

pub fn random_rational(rng: &mut impl Rng) -> Q {
    q_frac(rng.random_range(-12..=12), rng.random_range(1..=6))
}

pub fn random_qvec(rng: &mut impl Rng, n: usize) -> Vec<Q> {
    (0..n).map(|_| random_rational(rng)).collect()
}

/// `Σ_k x_i A_k[i][j] y_j` by the textbook double sum.
pub fn form(datum: &BundleDatum, x: &[Q], y: &[Q]) -> Vec<Q> {
    datum
        .components()
        .iter()
        .map(|a| {
            let mut acc = q(0);
            for (i, xi) in x.iter().enumerate() {
                for (j, yj) in y.iter().enumerate() {
                    acc += xi * &a[(i, j)] * yj;
                }
            }
            acc
        })
        .collect()
}

/// Unimodular integer matrix from random elementary operations, with its inverse.
pub fn unimodular(rng: &mut impl Rng, n: usize) -> (QMat, QMat) {
    let mut p = QMat::identity(n);
    let mut pinv = QMat::identity(n);
    for _ in 0..2 * n {
        let i = rng.random_range(0..n);
        let j = rng.random_range(0..n);
        if i == j {
            continue;
        }
        let c = if rng.random_bool(0.5) { 1 } else { -1 };
        let mut e = QMat::identity(n);
        e[(i, j)] = q(c);
        let mut einv = QMat::identity(n);
        einv[(i, j)] = q(-c);
        p = p.mul(&e);
        pinv = einv.mul(&pinv);
    }
    (p, pinv)
}

/// Integer involution `P·T·P⁻¹` where `T` mixes `±1` entries and swap blocks.
pub fn random_involution(rng: &mut impl Rng, n: usize) -> QMat {
    let mut t = QMat::zeros(n, n);
    let mut i = 0;
    while i < n {
        if i + 1 < n && rng.random_bool(0.3) {
            t[(i, i + 1)] = q(1);
            t[(i + 1, i)] = q(1);
            i += 2;
        } else {
            t[(i, i)] = q(if rng.random_bool(0.5) { 1 } else { -1 });
            i += 1;
        }
    }
    let (p, pinv) = unimodular(rng, n);
    p.mul(&t).mul(&pinv)
}

/// Pfaffian of a `4 × 4` antisymmetric matrix.
pub fn pf4(a: &[Vec<i64>]) -> i64 {
    a[0][1] * a[2][3] - a[0][2] * a[1][3] + a[0][3] * a[1][2]
}

/// Nonzero real root of `f(θ) = Pf(cos θ A₁ + sin θ A₂)` by scanning
/// `n` points of `[0, π)`: a sign change, or a local minimum of `|f|`
/// that refines to zero.
pub fn pfaffian_sweep(a1: &[Vec<i64>], a2: &[Vec<i64>], n: usize) -> bool {
    let (c0, c2) = (pf4(a1) as f64, pf4(a2) as f64);
    let sum: Vec<Vec<i64>> = (0..4).map(|i| (0..4).map(|j| a1[i][j] + a2[i][j]).collect()).collect();
    let c1 = pf4(&sum) as f64 - c0 - c2;
    let f = |t: f64| {
        let (c, s) = (t.cos(), t.sin());
        c0 * c * c + c1 * c * s + c2 * s * s
    };
    let h = std::f64::consts::PI / n as f64;
    let vals: Vec<f64> = (0..=n).map(|i| f(i as f64 * h)).collect();
    let scale = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return true;
    }
    if vals.windows(2).any(|w| w[0] == 0.0 || w[0] * w[1] < 0.0) {
        return true;
    }
    // the endpoints θ = 0 and θ = π are the same projective point
    (0..=n).any(|i| {
        let prev = vals[if i == 0 { n - 1 } else { i - 1 }].abs();
        let next = vals[if i == n { 1 } else { i + 1 }].abs();
        if vals[i].abs() > prev || vals[i].abs() > next {
            return false;
        }
        let t = i as f64 * h;
        let (mut lo, mut hi) = (t - h, t + h);
        for _ in 0..200 {
            let m1 = lo + (hi - lo) / 3.0;
            let m2 = hi - (hi - lo) / 3.0;
            if f(m1).abs() < f(m2).abs() {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        f(0.5 * (lo + hi)).abs() <= 1e-12 * scale
    })
}

/// Columns `x - iJx` for a real basis `x₁, …` chosen greedily from the
/// standard vectors so that the columns are independent.
pub fn hodge_basis(j: &DMatrix<f64>) -> DMatrix<C> {
    let n = j.nrows();
    let mut frame: Vec<DVector<f64>> = Vec::new();
    let mut chosen = Vec::new();
    for k in 0..n {
        let mut e = DVector::zeros(n);
        e[k] = 1.0;
        let je = j * &e;
        let mut trial = frame.clone();
        trial.push(e);
        trial.push(je);
        if DMatrix::from_columns(&trial).rank(1e-9) == trial.len() {
            frame = trial;
            chosen.push(k);
        }
        if chosen.len() == n / 2 {
            break;
        }
    }
    DMatrix::from_fn(n, chosen.len(), |r, c| C::new(if r == chosen[c] { 1.0 } else { 0.0 }, -j[(r, chosen[c])]))
}

pub fn complex_form(a: &DMatrix<f64>, x: &DVector<C>, y: &DVector<C>) -> C {
    let ac = a.map(|v| C::new(v, 0.0));
    (x.transpose() * ac * y)[(0, 0)]
}

/// Random complex structure `P J₀ P⁻¹` with `J₀` the standard block form.
pub fn random_structure(rng: &mut impl Rng, n: usize) -> DMatrix<f64> {
    loop {
        let p = DMatrix::from_fn(n, n, |i, j| rng.random_range(-1.0f64..1.0) + if i == j { 1.5 } else { 0.0 });
        let Some(pinv) = p.clone().try_inverse() else { continue };
        if p.determinant().abs() < 0.3 {
            continue;
        }
        let mut j0 = DMatrix::zeros(n, n);
        for k in 0..n / 2 {
            j0[(2 * k, 2 * k + 1)] = -1.0;
            j0[(2 * k + 1, 2 * k)] = 1.0;
        }
        return &p * j0 * pinv;
    }
}

/// Integer complex structure `P·J₀·P⁻¹` with `P` unimodular and entries
/// of the result at most 3 in size.
pub fn integer_structure(rng: &mut impl Rng, n: usize) -> DMatrix<f64> {
    let mut j0 = QMat::zeros(n, n);
    for k in 0..n / 2 {
        j0[(2 * k, 2 * k + 1)] = q(-1);
        j0[(2 * k + 1, 2 * k)] = q(1);
    }
    loop {
        let (p, pinv) = unimodular(rng, n);
        let j = p.mul(&j0).mul(&pinv).to_f64();
        if j.amax() <= 3.0 {
            return j;
        }
    }
}

/// For `d = 1`: the complex structure on the fibre with `U` spanned by
/// `A(v₁, v₂)`, so that the Riemann relation holds; `None` when that
/// vector is real up to scale.
pub fn riemann_fibre_structure(datum: &BundleDatum, j2: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let v = hodge_basis(j2);
    let (v1, v2) = (v.column(0).into_owned(), v.column(1).into_owned());
    let comps = datum.components_f64();
    let w: Vec<C> = comps.iter().map(|a| complex_form(a, &v1, &v2)).collect();
    // w = a - ib with J₁a = b, J₁b = -a
    let a = DVector::from_vec(vec![w[0].re, w[1].re]);
    let b = DVector::from_vec(vec![-w[0].im, -w[1].im]);
    let frame = DMatrix::from_columns(&[a.clone(), b.clone()]);
    let size = a.norm() * b.norm();
    // well-conditioned frames only: angle and length ratio bounded
    let ratio = a.norm() / b.norm();
    if size < 1e-6 || frame.determinant().abs() < 0.2 * size || !(0.2..=5.0).contains(&ratio) {
        return None;
    }
    let image = DMatrix::from_columns(&[b, -a]);
    Some(image * frame.try_inverse()?)
}

fn signs(k: usize) -> QMat {
    QMat::from_fn(2 * k, 2 * k, |i, j| if i != j { q(0) } else if i < k { q(1) } else { q(-1) })
}

/// Datum and involutions `A₁ = P₁ diag(I, -I) P₁⁻¹`, `A₂ = P₂ diag(I, -I) P₂⁻¹`
/// with the form built from integer eigen-blocks, so that the first three
/// integral conditions hold by construction. `L`, `d₁`, `d₂` are zero.
pub fn compatible_real_data(rng: &mut impl Rng, m: usize, d: usize, bound: i64) -> (BundleDatum, torus_bundle::real::RealStructureData) {
    let n = 2 * m;
    let eigen: Vec<QMat> = (0..2 * d)
        .map(|l| {
            let mut e = QMat::zeros(n, n);
            if l < d {
                let (ap, am) = (random_antisymmetric(rng, m, bound), random_antisymmetric(rng, m, bound));
                for i in 0..m {
                    for j in 0..m {
                        e[(i, j)] = q(ap[i][j]);
                        e[(m + i, m + j)] = q(am[i][j]);
                    }
                }
            } else {
                for i in 0..m {
                    for j in 0..m {
                        let v = rng.random_range(-bound..=bound);
                        e[(m + i, j)] = q(v);
                        e[(j, m + i)] = q(-v);
                    }
                }
            }
            e
        })
        .collect();
    let (p1, p1inv) = unimodular(rng, 2 * d);
    let (p2, p2inv) = unimodular(rng, n);
    let comps: Vec<QMat> = (0..2 * d)
        .map(|k| {
            let mut acc = QMat::zeros(n, n);
            for (l, e) in eigen.iter().enumerate() {
                acc = acc.add(&e.scale(&p1[(k, l)]));
            }
            p2inv.transpose().mul(&acc).mul(&p2inv)
        })
        .collect();
    let datum = BundleDatum::new(m, d, comps).unwrap();
    let a1 = p1.mul(&signs(d)).mul(&p1inv);
    let a2 = p2.mul(&signs(m)).mul(&p2inv);
    let data = torus_bundle::real::RealStructureData::new(a1, a2, QMat::zeros(2 * d, n), vec![q(0); 2 * d], vec![q(0); n]).unwrap();
    (datum, data)
}
