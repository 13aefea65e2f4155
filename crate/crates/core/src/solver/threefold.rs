//! Case tree for `m = 2`, `d = 1`, decided in exact rational arithmetic.
//!
//! Notation: `ℓ = L⁺₊`, `m' = L⁻₊`, `λ = L⁻₋`, `μ = L⁺₋` (all rows), `B₁ = b`
//! and `B₂ = B`. The system is
//! `ℓB = -bλ`, `m'B = μ/b` and `a₋ - a₊ det B + b·b'(B) = 0`.

use num_traits::{Signed, Zero};

use super::chart::{BRange, Chart, RowChart, RowMode};
use super::system::{qf, ConstraintSystem};
use super::CaseInfo;
use crate::exact::{q_to_f64, Q};

type V2 = [Q; 2];

fn det2(a: &V2, b: &V2) -> Q {
    &a[0] * &b[1] - &a[1] * &b[0]
}

fn dot2(a: &V2, b: &V2) -> Q {
    &a[0] * &b[0] + &a[1] * &b[1]
}

fn is_zero2(a: &V2) -> bool {
    a[0].is_zero() && a[1].is_zero()
}

fn row(v: &[f64]) -> V2 {
    [qf(v[0]), qf(v[1])]
}

fn f2(a: &V2) -> [f64; 2] {
    [q_to_f64(&a[0]), q_to_f64(&a[1])]
}

fn f22(a: &[V2; 2]) -> [[f64; 2]; 2] {
    [f2(&a[0]), f2(&a[1])]
}

struct Blocks {
    a_plus: Q,
    a_minus: Q,
    d: [V2; 2],
    ell: V2,
    mp: V2,
    lambda: V2,
    mu: V2,
}

impl Blocks {
    fn new(sys: &ConstraintSystem) -> Self {
        let d = |i, j| qf(sys.d_entry(i, j));
        Self {
            a_plus: qf(sys.a_plus),
            a_minus: qf(sys.a_minus),
            d: [[d(0, 0), d(0, 1)], [d(1, 0), d(1, 1)]],
            ell: row(&sys.l_pp),
            mp: row(&sys.l_mp),
            lambda: row(&sys.l_mm),
            mu: row(&sys.l_pm),
        }
    }

    /// `b'(M)` for `M` given by rows.
    fn b_prime(&self, m: &[V2; 2]) -> Q {
        let d = &self.d;
        &d[0][0] * &m[0][1] + &d[0][1] * &m[1][1] - &d[1][0] * &m[0][0] - &d[1][1] * &m[1][0]
    }
}

/// `P = [ℓᵀ/|ℓ|², (-ℓ₂, ℓ₁)ᵀ]`, so that `ℓP = (1, 0)` and `det P = 1`.
fn normalizer(ell: &V2) -> [V2; 2] {
    let n = dot2(ell, ell);
    [[&ell[0] / &n, -ell[1].clone()], [&ell[1] / &n, ell[0].clone()]]
}

fn mat_mul(a: &[V2; 2], b: &[V2; 2]) -> [V2; 2] {
    let e = |i: usize, j: usize| &a[i][0] * &b[0][j] + &a[i][1] * &b[1][j];
    [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]]
}

/// `{t > 0 : c₀ + c₁t < 0}` as an open interval `(lo, hi)` in `t = b²`.
fn t_interval(c0: &Q, c1: &Q) -> Option<(Q, Option<Q>)> {
    if c1.is_zero() {
        return c0.is_negative().then(|| (Q::zero(), None));
    }
    let root = -(c0 / c1);
    if c1.is_positive() {
        root.is_positive().then(|| (Q::zero(), Some(root)))
    } else {
        Some((if root.is_positive() { root } else { Q::zero() }, None))
    }
}

fn b_range(lo: &Q, hi: &Option<Q>) -> BRange {
    BRange::Interval { lo: q_to_f64(lo).sqrt(), hi: hi.as_ref().map_or(f64::INFINITY, |h| q_to_f64(h).sqrt()) }
}

/// The returned label is the leaf of the case tree; `subcase` refines it.
pub fn classify_case(sys: &ConstraintSystem) -> CaseInfo {
    analyze_threefold(sys).0
}

pub fn analyze_threefold(sys: &ConstraintSystem) -> (CaseInfo, Option<Chart>) {
    let k = Blocks::new(sys);
    if sys.l_is_zero() {
        return l_zero(&k);
    }
    let det_n = det2(&k.ell, &k.mp);
    if !det_n.is_zero() {
        return independent(&k, &det_n);
    }
    if is_zero2(&k.mp) {
        let mut info = CaseInfo::new("L.mpzero");
        if !is_zero2(&k.mu) {
            return (info.empty("L+- must vanish"), None);
        }
        if is_zero2(&k.ell) || is_zero2(&k.lambda) {
            return (info.empty("first row of B would vanish"), None);
        }
        let u = [-k.lambda[0].clone(), -k.lambda[1].clone()];
        let chart = mp_zero(&k, &u, &mut info);
        return (info, chart);
    }
    if !is_zero2(&k.ell) {
        let i = if k.mp[0].is_zero() { 1 } else { 0 };
        let beta = &k.ell[i] / &k.mp[i];
        let mut info = CaseInfo::new("L.dep");
        info.constant("beta", &beta);
        // b²λ = -βμ
        let candidates: Vec<Q> = (0..2).filter(|&j| !k.lambda[j].is_zero()).map(|j| -(&beta * &k.mu[j]) / &k.lambda[j]).collect();
        let Some(t) = candidates.first().cloned() else {
            return (info.empty("L-- = 0 forces L+- = 0"), None);
        };
        let consistent = (0..2).all(|j| &t * &k.lambda[j] == -(&beta * &k.mu[j]));
        if !consistent || !t.is_positive() {
            return (info.empty("b^2 L-- = -beta L+- has no positive solution"), None);
        }
        info.constant("b_squared", &t);
        let chart = row_fixed_inverse(&k, Some(t), &mut info);
        return (info, chart);
    }
    let mut info = CaseInfo::new("L.ppzero");
    if !is_zero2(&k.lambda) {
        return (info.empty("L-- must vanish"), None);
    }
    if is_zero2(&k.mu) {
        return (info.empty("first row of B would vanish"), None);
    }
    let chart = row_fixed_inverse(&k, None, &mut info);
    (info, chart)
}

fn l_zero(k: &Blocks) -> (CaseInfo, Option<Chart>) {
    let d_zero = k.d.iter().all(is_zero2);
    if d_zero {
        let mut info = CaseInfo::new("L0.D0");
        info.constant("a_plus", &k.a_plus);
        info.constant("a_minus", &k.a_minus);
        if k.a_plus.is_zero() {
            if k.a_minus.is_zero() {
                info.subcase = Some("unconstrained".into());
                return (info, Some(Chart::Open));
            }
            return (info.empty("a- = 0 is required when a+ = 0"), None);
        }
        let a = &k.a_minus / &k.a_plus;
        info.constant("a", &a);
        if !a.is_positive() {
            return (info.empty("det B = a with a <= 0"), None);
        }
        return (info, Some(Chart::Quadric));
    }
    let mut info = CaseInfo::new("L0.Dnz");
    // {b' = 0} is tangent to {det B = 0} exactly when det D = 0
    let det_d = det2(&k.d[0], &k.d[1]);
    info.constant("det_D", &det_d);
    info.subcase = Some(if det_d.is_zero() { "paraboloid" } else { "hyperboloid" }.into());
    (info, Some(Chart::Quadric))
}

fn independent(k: &Blocks, det_n: &Q) -> (CaseInfo, Option<Chart>) {
    let mut info = CaseInfo::new("L.indep");
    let alpha = -det2(&k.lambda, &k.mu) / det_n;
    info.constant("alpha", &alpha);
    if !alpha.is_positive() {
        return (info.empty("det B = alpha must be positive"), None);
    }
    // N⁻¹ with N = [ℓ; m']
    let ninv = [[&k.mp[1] / det_n, -(&k.ell[1] / det_n)], [-(&k.mp[0] / det_n), &k.ell[0] / det_n]];
    let z = Q::zero();
    let neg_l = [-k.lambda[0].clone(), -k.lambda[1].clone()];
    let m1 = mat_mul(&ninv, &[neg_l, [z.clone(), z.clone()]]);
    let m2 = mat_mul(&ninv, &[[z.clone(), z], k.mu.clone()]);
    let c1 = k.b_prime(&m1);
    let c2 = k.b_prime(&m2);
    let c = &c2 + &k.a_minus - &alpha * &k.a_plus;
    info.constant("c1", &c1);
    info.constant("c2", &c2);
    info.constant("c", &c);
    let flat = |m: &[V2; 2]| [q_to_f64(&m[0][0]), q_to_f64(&m[0][1]), q_to_f64(&m[1][0]), q_to_f64(&m[1][1])];
    let (m1f, m2f) = (flat(&m1), flat(&m2));
    if c1.is_zero() {
        if c.is_zero() {
            info.subcase = Some("curve".into());
            return (info, Some(Chart::IndepCurve { m1: m1f, m2: m2f }));
        }
        return (info.empty("c1 b^2 + c = 0 with c1 = 0, c != 0"), None);
    }
    let t = -(&c / &c1);
    if !t.is_positive() {
        return (info.empty("c1 b^2 + c = 0 has no positive root"), None);
    }
    info.subcase = Some("point".into());
    let b = q_to_f64(&t).sqrt();
    let mut x = vec![b];
    x.extend((0..4).map(|i| b * m1f[i] + m2f[i] / b));
    (info, Some(Chart::Point(x)))
}

fn row_chart(k: &Blocks, ell: &V2, u: &V2, w: &V2, b_range: BRange, mode: RowMode) -> Chart {
    let p = normalizer(ell);
    let dp = mat_mul(&k.d, &p);
    Chart::Row(RowChart {
        p: f22(&p),
        u: f2(u),
        w: f2(w),
        a_plus: q_to_f64(&k.a_plus),
        a_minus: q_to_f64(&k.a_minus),
        d: f22(&dp),
        b_range,
        mode,
    })
}

/// `L⁻₊ = 0`: the first row of `P⁻¹B` is `r = -bλ` with `P` normalizing `ℓ`.
fn mp_zero(k: &Blocks, u: &V2, info: &mut CaseInfo) -> Option<Chart> {
    let p = normalizer(&k.ell);
    let d = mat_mul(&k.d, &p);
    let ap = &k.a_plus;
    // α(b) = b·α̃, κ(b) = a₋ + kb²
    let at = [ap * &u[1] - &d[1][1], -(ap * &u[0]) + &d[0][1]];
    let kk = &d[0][0] * &u[1] - &d[1][0] * &u[0];
    let n = dot2(&at, u);
    info.constant("K", &n);
    info.constant("k", &kk);
    let zero = [Q::zero(), Q::zero()];
    let chart = |range, mode| Some(row_chart(k, &k.ell, u, &zero, range, mode));
    if !n.is_zero() {
        info.subcase = Some("case1".into());
        return chart(BRange::all(), RowMode::HalfLine);
    }
    if !is_zero2(&at) {
        info.subcase = Some("case2".into());
        let ct = det2(u, &at);
        info.constant("c", &ct);
        let Some((lo, hi)) = t_interval(&(&ct * &k.a_minus), &(&ct * &kk)) else {
            *info = info.clone().empty("c (a- + k b^2) < 0 has no solution");
            return None;
        };
        return chart(b_range(&lo, &hi), RowMode::Line);
    }
    info.subcase = Some("case3".into());
    if kk.is_zero() {
        if k.a_minus.is_zero() {
            return chart(BRange::all(), RowMode::HalfPlane);
        }
        *info = info.clone().empty("a- + k b^2 = 0 with k = 0, a- != 0");
        return None;
    }
    let t = -(&k.a_minus / &kk);
    if !t.is_positive() {
        *info = info.clone().empty("a- + k b^2 = 0 has no positive root");
        return None;
    }
    chart(BRange::Fixed(q_to_f64(&t).sqrt()), RowMode::HalfPlane)
}

/// `ℓ ∥ L⁻₊` or `ℓ = 0`: the first row of `P⁻¹B` is `r = μ/b` with `P`
/// normalizing `L⁻₊`, and `b² = t` when `t` is given.
fn row_fixed_inverse(k: &Blocks, fixed_t: Option<Q>, info: &mut CaseInfo) -> Option<Chart> {
    let p = normalizer(&k.mp);
    let d = mat_mul(&k.d, &p);
    let w = &k.mu;
    let ap = &k.a_plus;
    let kappa = &k.a_minus + &d[0][0] * &w[1] - &d[1][0] * &w[0];
    let big_k = &d[0][1] * &w[1] - &d[1][1] * &w[0];
    info.constant("K", &big_k);
    info.constant("kappa", &kappa);
    let zero = [Q::zero(), Q::zero()];
    let fixed = fixed_t.as_ref().map(|t| BRange::Fixed(q_to_f64(t).sqrt()));
    let all = fixed.unwrap_or_else(BRange::all);
    let chart = |range, mode| Some(row_chart(k, &k.mp, &zero, w, range, mode));
    if !big_k.is_zero() {
        info.subcase = Some("case1".into());
        return chart(all, RowMode::HalfLine);
    }
    let c = (&d[0][1] * &w[0] + &d[1][1] * &w[1]) / dot2(w, w);
    info.constant("c", &c);
    if kappa.is_zero() {
        info.subcase = Some("case2.1".into());
        // α(b) = 0 iff c b² = a₊
        let range = match (&fixed_t, c.is_zero()) {
            (Some(t), _) => (&c * t == *ap).then_some(all),
            (None, true) => ap.is_zero().then_some(all),
            (None, false) => {
                let t = ap / &c;
                t.is_positive().then(|| BRange::Fixed(q_to_f64(&t).sqrt()))
            }
        };
        let Some(range) = range else {
            *info = info.clone().empty("c b^2 = a+ has no admissible solution");
            return None;
        };
        return chart(range, RowMode::HalfPlane);
    }
    info.subcase = Some(if c.is_zero() { "case2.2" } else { "case2.3" }.into());
    // (c b² - a₊) κ < 0
    let c0 = -(ap * &kappa);
    let c1 = &c * &kappa;
    let range = match &fixed_t {
        Some(t) => (&c0 + &c1 * t).is_negative().then_some(all),
        None => t_interval(&c0, &c1).map(|(lo, hi)| b_range(&lo, &hi)),
    };
    let Some(range) = range else {
        *info = info.clone().empty("(c b^2 - a+) kappa < 0 has no solution");
        return None;
    };
    chart(range, RowMode::Line)
}
