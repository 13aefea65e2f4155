use nalgebra::{DMatrix, DVector};

use super::{ConditionReport, ConditionResult, RealStructureData};
use crate::complex::{round_if_integral, ComplexStructurePair, HodgeDecomposition, C};
use crate::error::{Error, Result};
use crate::exact::{vec_to_f64, QMat};

const EQ_TOL: f64 = 1e-9;
const LATTICE_TOL: f64 = 1e-8;
const ANTI_TOL: f64 = 1e-9;

/// `σ̃(u, v) = (Â₁ū + L̂v̄ + d̂₁, Â₂v̄ + d̂₂)` in the coordinates of the
/// bases of `U` and `V`.
#[derive(Clone, Debug)]
pub struct ComplexData {
    pub a1: DMatrix<C>,
    pub a2: DMatrix<C>,
    pub l: DMatrix<C>,
    pub d1: DVector<C>,
    pub d2: DVector<C>,
}

fn conj_v(v: &DVector<C>) -> DVector<C> {
    v.map(|z| z.conj())
}

fn conj_m(m: &DMatrix<C>) -> DMatrix<C> {
    m.map(|z| z.conj())
}

fn complexify(m: &QMat) -> DMatrix<C> {
    m.to_f64().map(|x| C::new(x, 0.0))
}

fn anti_defect(a: &DMatrix<f64>, j_out: &DMatrix<f64>, j_in: &DMatrix<f64>) -> f64 {
    (a * j_in + j_out * a).amax()
}

impl ComplexData {
    /// Rewrites the real datum in the holomorphic coordinates
    /// `u = p_U(y) + B''(v, v̄)`, `v = p_V(x)`; fails when `σ̃` is not
    /// antiholomorphic there.
    ///
    /// The holomorphic part of `x ↦ Lx` must cancel `B''(d̂₂, A₂v)`, i.e.
    /// `L + A(d₂, A₂·)` anticommutes with the structures. The antiholomorphic
    /// part becomes `L̂v̄ = p_U(Lv̄) + B''(Â₂v̄, d̂₂)` and `d̂₁ = p_U(d₁) + B''(d̂₂, d̂₂)`.
    pub fn from_real(data: &RealStructureData, dec: &HodgeDecomposition, pair: &ComplexStructurePair) -> Result<Self> {
        let a1 = data.a1.to_f64();
        let a2 = data.a2.to_f64();
        for (which, m, j) in [("A1", &a1, &pair.j1), ("A2", &a2, &pair.j2)] {
            let residual = anti_defect(m, j, j);
            if residual > ANTI_TOL * (1.0 + m.amax()) {
                return Err(Error::NotAntiholomorphic { which, residual });
            }
        }
        let vbar = conj_m(dec.base.basis());
        let image = |mat: &QMat, target: &crate::complex::Projector, cols: &DMatrix<C>| -> DMatrix<C> {
            let prod = complexify(mat) * cols;
            let cols: Vec<DVector<C>> = (0..prod.ncols()).map(|j| target.coords(&prod.column(j).into_owned())).collect();
            DMatrix::from_columns(&cols)
        };
        let ubar = conj_m(dec.fibre.basis());
        let a1_cols: Vec<DVector<C>> = (0..ubar.ncols())
            .map(|j| dec.fibre.coords(&(complexify(&data.a1) * ubar.column(j))))
            .collect();
        let a2c = image(&data.a2, &dec.base, &vbar);
        let d2c = dec.base.coords_real(&vec_to_f64(&data.d2));
        let holo = image(&data.l, &dec.fibre, dec.base.basis());
        let mut defect = 0.0f64;
        let mut lc = image(&data.l, &dec.fibre, &vbar);
        for j in 0..dec.m {
            let w = a2c.column(j).into_owned();
            defect = defect.max((holo.column(j) + dec.b_doubleprime_eval(&d2c, &w)).camax());
            lc.set_column(j, &(lc.column(j) + dec.b_doubleprime_eval(&w, &d2c)));
        }
        let scale = 1.0 + data.l.to_f64().amax() + dec.b_doubleprime_norm() * (1.0 + d2c.camax());
        if defect > ANTI_TOL * scale {
            return Err(Error::NotAntiholomorphic { which: "L + A(d2, A2 .)", residual: defect });
        }
        let d1c = dec.fibre.coords_real(&vec_to_f64(&data.d1)) + dec.b_doubleprime_eval(&d2c, &d2c);
        Ok(Self { a1: DMatrix::from_columns(&a1_cols), a2: a2c, l: lc, d1: d1c, d2: d2c })
    }
}

fn test_gammas(n: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        out.push(e.clone());
        e[i] = 2.0;
        out.push(e);
    }
    for i in 0..n {
        for j in i + 1..n {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            e[j] = 1.0;
            out.push(e);
        }
    }
    out
}

fn unit_c(n: usize, k: usize) -> DVector<C> {
    let mut e = DVector::zeros(n);
    e[k] = C::new(1.0, 0.0);
    e
}

struct Tracker {
    worst: f64,
}

impl Tracker {
    fn new() -> Self {
        Self { worst: 0.0 }
    }

    fn see(&mut self, v: &DVector<C>) {
        self.worst = self.worst.max(v.iter().map(|z| z.norm()).fold(0.0, f64::max));
    }

    fn see_m(&mut self, m: &DMatrix<C>) {
        self.worst = self.worst.max(m.iter().map(|z| z.norm()).fold(0.0, f64::max));
    }

    fn result(&self, label: &str, scale: f64) -> ConditionResult {
        let holds = self.worst <= EQ_TOL * scale;
        ConditionResult { label: label.into(), holds, detail: if holds { String::new() } else { format!("residual {:e}", self.worst) } }
    }
}

fn membership(label: &str, v: &DVector<f64>) -> ConditionResult {
    match round_if_integral(v.as_slice(), LATTICE_TOL) {
        Some(_) => ConditionResult { label: label.into(), holds: true, detail: String::new() },
        None => ConditionResult { label: label.into(), holds: false, detail: format!("real preimage {:?} is not integral", v.as_slice()) },
    }
}

/// The eight conditions for `σ̃` written in the complex coordinates,
/// labelled `dianalytic-1` to `dianalytic-8`.
///
/// Quadratic conditions are tested on `e_i`, `2e_i` and `e_i + e_j`. For the
/// square condition only the part linear in `v` is compared and a real `γ`
/// is found by least squares, then tested for integrality.
pub fn check_dianalytic_conditions(
    data: &RealStructureData,
    dec: &HodgeDecomposition,
    pair: &ComplexStructurePair,
) -> Result<ConditionReport> {
    if data.base_rank() != 2 * dec.m || data.fibre_rank() != 2 * dec.d {
        return Err(Error::Dimension { what: "real-structure data", expected: 2 * dec.m, found: data.base_rank() });
    }
    let cd = ComplexData::from_real(data, dec, pair)?;
    let m = dec.m;
    let d = dec.d;
    let two = C::new(2.0, 0.0);
    let scale = 1.0
        + dec.b_prime.iter().chain(&dec.b_doubleprime).map(|b| b.iter().map(|z| z.norm()).fold(0.0, f64::max)).fold(0.0, f64::max)
        + cd.l.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let gammas = test_gammas(2 * m);
    let ps: Vec<DVector<C>> = gammas.iter().map(|g| dec.base.coords_real(g)).collect();
    let ws: Vec<DVector<C>> = ps.iter().map(|p| &cd.a2 * conj_v(p)).collect();
    let mut out = Vec::new();

    // images of the lattices
    let mut ok = true;
    let mut detail = String::new();
    for k in 0..2 * d {
        let pu = dec.fibre.coords(&unit_c(2 * d, k));
        let img = dec.fibre.real_preimage(&(&cd.a1 * conj_v(&pu)));
        if round_if_integral(img.as_slice(), LATTICE_TOL).is_none() {
            ok = false;
            detail = format!("fibre basis vector {k} maps outside the lattice");
        }
    }
    for k in 0..2 * m {
        let pv = dec.base.coords(&unit_c(2 * m, k));
        let img = dec.base.real_preimage(&(&cd.a2 * conj_v(&pv)));
        if round_if_integral(img.as_slice(), LATTICE_TOL).is_none() {
            ok = false;
            detail = format!("base basis vector {k} maps outside the lattice");
        }
    }
    out.push(ConditionResult { label: "dianalytic-1".into(), holds: ok, detail });

    let mut t = Tracker::new();
    for (p, w) in ps.iter().zip(&ws) {
        let lhs = &cd.a1 * conj_v(&dec.b_doubleprime_eval(p, p));
        t.see(&(lhs - dec.b_doubleprime_eval(w, w)));
    }
    out.push(t.result("dianalytic-2", scale));

    let mut t = Tracker::new();
    for i in 0..m {
        let v = unit_c(m, i);
        let av = &cd.a2 * conj_v(&v);
        for (p, w) in ps.iter().zip(&ws) {
            let lhs = &cd.a1 * conj_v(&dec.b_prime_eval(&v, p)) + &cd.a1 * conj_v(&dec.b_doubleprime_eval(&v, p)) * two;
            let rhs = dec.b_prime_eval(&av, w) + dec.b_doubleprime_eval(&av, w) * two;
            t.see(&(lhs - rhs));
        }
    }
    out.push(t.result("dianalytic-3", scale));

    let mut ok = true;
    let mut detail = String::new();
    for (g, (p, w)) in gammas.iter().zip(ps.iter().zip(&ws)) {
        // constant term of σ̃γ - γ'σ̃ with p' = A₂p̄: Lp̄ + A₁B''(p, p̄)‾ - F_γ'(d₂)
        let f_d2 = dec.b_prime_eval(&cd.d2, w) + dec.b_doubleprime_eval(&cd.d2, w) * two + dec.b_doubleprime_eval(w, w);
        let c = &cd.l * conj_v(p) + &cd.a1 * conj_v(&dec.b_doubleprime_eval(p, p)) - f_d2;
        let y = dec.fibre.real_preimage(&c);
        if ok && round_if_integral(y.as_slice(), LATTICE_TOL).is_none() {
            ok = false;
            detail = format!("gamma {g:?}: real preimage {:?} is not integral", y.as_slice());
        }
    }
    out.push(ConditionResult { label: "dianalytic-4".into(), holds: ok, detail });

    let mut t = Tracker::new();
    t.see_m(&(&cd.a1 * conj_m(&cd.a1) - DMatrix::identity(d, d)));
    t.see_m(&(&cd.a2 * conj_m(&cd.a2) - DMatrix::identity(m, m)));
    out.push(t.result("dianalytic-5", 1.0));

    out.push(square_linear_part(dec, &cd, scale));

    let t7 = &cd.a2 * conj_v(&cd.d2) + &cd.d2;
    out.push(membership("dianalytic-7", &dec.base.real_preimage(&t7)));

    // σ̃² = (l, γ₀) with p_V(γ₀) = t7, whose constant in u is p_U(l) + B''(t7, t7)
    let t8 = &cd.a1 * conj_v(&cd.d1) + &cd.l * conj_v(&cd.d2) + &cd.d1 - dec.b_doubleprime_eval(&t7, &t7);
    out.push(membership("dianalytic-8", &dec.fibre.real_preimage(&t8)));

    Ok(ConditionReport { conditions: out, gamma: None, degenerate: false })
}

/// Linear part of `v ↦ F_γ(v)` as a `d × m` matrix.
fn f_linear(dec: &HodgeDecomposition, p: &DVector<C>) -> DMatrix<C> {
    let m = dec.m;
    let cols: Vec<DVector<C>> = (0..m)
        .map(|i| {
            let v = unit_c(m, i);
            dec.b_prime_eval(&v, p) + dec.b_doubleprime_eval(&v, p) * C::new(2.0, 0.0)
        })
        .collect();
    DMatrix::from_columns(&cols)
}

fn square_linear_part(dec: &HodgeDecomposition, cd: &ComplexData, scale: f64) -> ConditionResult {
    let m = dec.m;
    let target = &cd.a1 * conj_m(&cd.l) + &cd.l * conj_m(&cd.a2);
    let flatten = |mat: &DMatrix<C>| -> Vec<f64> { mat.iter().flat_map(|z| [z.re, z.im]).collect() };
    let rhs = DVector::from_vec(flatten(&target));
    let columns: Vec<DVector<f64>> = (0..2 * m)
        .map(|a| {
            let mut e = vec![0.0; 2 * m];
            e[a] = 1.0;
            DVector::from_vec(flatten(&f_linear(dec, &dec.base.coords_real(&e))))
        })
        .collect();
    let label = "dianalytic-6";
    let sys = DMatrix::from_columns(&columns);
    let svd = sys.clone().svd(true, true);
    let Ok(gamma) = svd.solve(&rhs, 1e-12) else {
        return ConditionResult { label: label.into(), holds: false, detail: "least-squares solve failed".into() };
    };
    let residual = (&sys * &gamma - &rhs).amax();
    if residual > EQ_TOL * scale {
        return ConditionResult { label: label.into(), holds: false, detail: format!("no real witness (residual {residual:e})") };
    }
    match round_if_integral(gamma.as_slice(), LATTICE_TOL) {
        Some(g) => ConditionResult { label: label.into(), holds: true, detail: format!("witness {g:?}") },
        None => ConditionResult { label: label.into(), holds: false, detail: format!("witness {:?} is not integral", gamma.as_slice()) },
    }
}
