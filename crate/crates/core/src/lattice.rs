//! Lattices, the alternating extension class, and the two-step nilpotent
//! group law on the real span of the lattice.
//!
//! All arithmetic here is exact over the rationals.

use nalgebra::DMatrix;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{q, q_frac, QMat, Q};
use crate::poly::{interpolate, Poly};

/// Ranks `(m, d)` and the alternating form `A : Γ × Γ → Λ`, stored as one
/// integer antisymmetric `2m × 2m` matrix per basis vector of `Λ ≅ ℤ^{2d}`.
#[derive(Clone, Debug, PartialEq)]
pub struct BundleDatum {
    m: usize,
    d: usize,
    components: Vec<QMat>,
}

impl BundleDatum {
    pub fn new(m: usize, d: usize, components: Vec<QMat>) -> Result<Self> {
        if m == 0 || d == 0 {
            return Err(Error::InvalidDatum("ranks must be positive".into()));
        }
        if components.len() != 2 * d {
            return Err(Error::Dimension { what: "component count", expected: 2 * d, found: components.len() });
        }
        for (k, c) in components.iter().enumerate() {
            if c.nrows() != 2 * m || c.ncols() != 2 * m {
                return Err(Error::Dimension { what: "component size", expected: 2 * m, found: c.nrows().max(c.ncols()) });
            }
            if !c.is_integral() {
                return Err(Error::InvalidDatum(format!("component {k} has non-integer entries")));
            }
            for i in 0..2 * m {
                for j in i..2 * m {
                    if c[(i, j)] != -&c[(j, i)] {
                        return Err(Error::NotAntisymmetric { component: k, row: i, col: j });
                    }
                }
            }
        }
        Ok(Self { m, d, components })
    }

    pub fn from_i64(m: usize, d: usize, components: &[Vec<Vec<i64>>]) -> Result<Self> {
        Self::new(m, d, components.iter().map(|c| QMat::from_i64_rows(c)).collect())
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Real dimension of the base lattice, `2m`.
    pub fn base_rank(&self) -> usize {
        2 * self.m
    }

    /// Real dimension of the fibre lattice, `2d`.
    pub fn fibre_rank(&self) -> usize {
        2 * self.d
    }

    pub fn components(&self) -> &[QMat] {
        &self.components
    }

    pub fn components_f64(&self) -> Vec<DMatrix<f64>> {
        self.components.iter().map(QMat::to_f64).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(QMat::is_zero)
    }

    /// `A(x, y)` as a vector in `Λ ⊗ ℚ`.
    pub fn eval(&self, x: &[Q], y: &[Q]) -> Vec<Q> {
        self.components.iter().map(|c| bilinear(c, x, y)).collect()
    }

    pub fn eval_f64(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        self.components_f64().iter().map(|c| (x_t(x) * c * col(y))[(0, 0)]).collect()
    }
}

fn x_t(x: &[f64]) -> DMatrix<f64> {
    DMatrix::from_row_slice(1, x.len(), x)
}

fn col(y: &[f64]) -> DMatrix<f64> {
    DMatrix::from_column_slice(y.len(), 1, y)
}

pub(crate) fn bilinear(m: &QMat, x: &[Q], y: &[Q]) -> Q {
    let mut acc = Q::zero();
    for i in 0..m.nrows() {
        if x[i].is_zero() {
            continue;
        }
        for j in 0..m.ncols() {
            if !m[(i, j)].is_zero() {
                acc += &x[i] * &m[(i, j)] * &y[j];
            }
        }
    }
    acc
}

/// The strictly lower triangular part `T⁻` of each component and the
/// symmetric form `S = -(T⁻ + T⁻ᵀ)/4`.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalizationDatum {
    pub t_minus: Vec<QMat>,
    pub s: Vec<QMat>,
}

impl NormalizationDatum {
    pub fn t_eval(&self, x: &[Q], y: &[Q]) -> Vec<Q> {
        self.t_minus.iter().map(|t| bilinear(t, x, y)).collect()
    }

    pub fn s_eval(&self, x: &[Q], y: &[Q]) -> Vec<Q> {
        self.s.iter().map(|s| bilinear(s, x, y)).collect()
    }
}

pub fn lower_triangular_split(datum: &BundleDatum) -> NormalizationDatum {
    let quarter = q_frac(-1, 4);
    let t_minus: Vec<QMat> = datum
        .components()
        .iter()
        .map(|a| QMat::from_fn(a.nrows(), a.ncols(), |i, j| if i > j { a[(i, j)].clone() } else { Q::zero() }))
        .collect();
    let s = t_minus.iter().map(|t| t.add(&t.transpose()).scale(&quarter)).collect();
    NormalizationDatum { t_minus, s }
}

/// A point `(y, x)` of `(Λ ⊗ ℝ) ⊕ (Γ ⊗ ℝ)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupElement {
    #[serde(with = "crate::io::qvec")]
    pub y: Vec<Q>,
    #[serde(with = "crate::io::qvec")]
    pub x: Vec<Q>,
    pub is_lattice: bool,
}

impl GroupElement {
    /// A general element; the lattice flag is set when both parts are integral.
    pub fn new(y: Vec<Q>, x: Vec<Q>) -> Self {
        let is_lattice = y.iter().chain(&x).all(|v| v.is_integer());
        Self { y, x, is_lattice }
    }

    /// A real element that is not treated as a lattice element even if its
    /// coordinates happen to be integral.
    pub fn real(y: Vec<Q>, x: Vec<Q>) -> Self {
        Self { y, x, is_lattice: false }
    }

    pub fn from_i64(y: &[i64], x: &[i64]) -> Self {
        Self::new(y.iter().map(|&v| q(v)).collect(), x.iter().map(|&v| q(v)).collect())
    }

    pub fn identity(m: usize, d: usize) -> Self {
        Self { y: vec![Q::zero(); 2 * d], x: vec![Q::zero(); 2 * m], is_lattice: true }
    }

    /// The canonical lift `γ̂ = (0, γ)` of a base lattice vector.
    pub fn lift(gamma: &[i64], d: usize) -> Self {
        Self::from_i64(&vec![0; 2 * d], gamma)
    }

    pub fn inverse(&self, norm: &NormalizationDatum) -> Self {
        let t = norm.t_eval(&self.x, &self.x);
        Self {
            y: self.y.iter().zip(&t).map(|(y, t)| t - y).collect(),
            x: self.x.iter().map(|v| -v).collect(),
            is_lattice: self.is_lattice,
        }
    }

    pub fn is_central(&self) -> bool {
        self.x.iter().all(Zero::is_zero)
    }
}

fn check_dims(g: &GroupElement, norm: &NormalizationDatum) -> Result<()> {
    let fibre = norm.t_minus.len();
    let base = norm.t_minus.first().map_or(0, QMat::nrows);
    if g.y.len() != fibre {
        return Err(Error::Dimension { what: "fibre coordinate", expected: fibre, found: g.y.len() });
    }
    if g.x.len() != base {
        return Err(Error::Dimension { what: "base coordinate", expected: base, found: g.x.len() });
    }
    Ok(())
}

/// `(y, x)(y', x') = (y + y' + T⁻(x, x'), x + x')`.
pub fn group_multiply(g: &GroupElement, h: &GroupElement, norm: &NormalizationDatum) -> Result<GroupElement> {
    check_dims(g, norm)?;
    check_dims(h, norm)?;
    let t = norm.t_eval(&g.x, &h.x);
    Ok(GroupElement {
        y: g.y.iter().zip(&h.y).zip(&t).map(|((a, b), c)| a + b + c).collect(),
        x: g.x.iter().zip(&h.x).map(|(a, b)| a + b).collect(),
        is_lattice: g.is_lattice && h.is_lattice,
    })
}

/// `g h g⁻¹ h⁻¹`.
pub fn commutator(g: &GroupElement, h: &GroupElement, norm: &NormalizationDatum) -> Result<GroupElement> {
    let gh = group_multiply(g, h, norm)?;
    let ghg = group_multiply(&gh, &g.inverse(norm), norm)?;
    group_multiply(&ghg, &h.inverse(norm), norm)
}

/// `Ψ(y, x) = (2(y + S(x, x)), x)`.
pub fn psi(p: &GroupElement, norm: &NormalizationDatum) -> GroupElement {
    let s = norm.s_eval(&p.x, &p.x);
    let two = q(2);
    GroupElement {
        y: p.y.iter().zip(&s).map(|(y, s)| (y + s) * &two).collect(),
        x: p.x.clone(),
        is_lattice: false,
    }
}

pub fn psi_inverse(p: &GroupElement, norm: &NormalizationDatum) -> GroupElement {
    let s = norm.s_eval(&p.x, &p.x);
    let half = q_frac(1, 2);
    GroupElement {
        y: p.y.iter().zip(&s).map(|(eta, s)| eta * &half - s).collect(),
        x: p.x.clone(),
        is_lattice: false,
    }
}

/// Right action of a lattice element in the normalized coordinates:
/// `(η, x) ↦ (η + A(x, γ) + 2S(γ, γ), x + γ)`; the central part `λ` of
/// `gamma_hat` contributes the translation `2λ`.
pub fn normalized_action(
    gamma_hat: &GroupElement,
    p: &GroupElement,
    datum: &BundleDatum,
    norm: &NormalizationDatum,
) -> Result<GroupElement> {
    if !gamma_hat.is_lattice {
        return Err(Error::NotLattice);
    }
    check_dims(gamma_hat, norm)?;
    check_dims(p, norm)?;
    let gamma = &gamma_hat.x;
    let a = datum.eval(&p.x, gamma);
    let s = norm.s_eval(gamma, gamma);
    let two = q(2);
    Ok(GroupElement {
        y: p
            .y
            .iter()
            .zip(&a)
            .zip(&s)
            .zip(&gamma_hat.y)
            .map(|(((eta, a), s), lambda)| eta + a + s * &two + lambda * &two)
            .collect(),
        x: p.x.iter().zip(gamma).map(|(x, g)| x + g).collect(),
        is_lattice: p.is_lattice,
    })
}

/// The stacked `(2d·2m) × 2m` matrix has full column rank over ℚ.
pub fn is_nondegenerate(datum: &BundleDatum) -> bool {
    let mut stacked = datum.components()[0].clone();
    for c in &datum.components()[1..] {
        stacked = stacked.vstack(c);
    }
    stacked.rank() == datum.base_rank()
}

/// Pfaffian by expansion along the first row.
pub fn pfaffian(a: &QMat) -> Q {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    if n % 2 == 1 {
        return Q::zero();
    }
    let idx: Vec<usize> = (0..n).collect();
    pfaffian_rec(a, &idx)
}

fn pfaffian_rec(a: &QMat, idx: &[usize]) -> Q {
    match idx.len() {
        0 => Q::one(),
        2 => a[(idx[0], idx[1])].clone(),
        _ => {
            let first = idx[0];
            let mut acc = Q::zero();
            for (pos, &j) in idx.iter().enumerate().skip(1) {
                let entry = &a[(first, j)];
                if entry.is_zero() {
                    continue;
                }
                let rest: Vec<usize> = idx.iter().enumerate().filter(|&(p, _)| p != 0 && p != pos).map(|(_, &v)| v).collect();
                let term = entry * pfaffian_rec(a, &rest);
                // sign (-1)^(pos+1) with pos counted from 0 for the first column
                if pos % 2 == 1 {
                    acc += term;
                } else {
                    acc -= term;
                }
            }
            acc
        }
    }
}

fn reality_pair(datum: &BundleDatum) -> Result<(&QMat, &QMat)> {
    if datum.d() != 1 {
        return Err(Error::RequiresFibreDimensionOne { d: datum.d() });
    }
    Ok((&datum.components()[0], &datum.components()[1]))
}

/// Coefficients `c_k` of `Pf(λ₁A₁ + λ₂A₂) = Σ_k c_k λ₁^{m-k} λ₂^k`.
pub fn pfaffian_binary_form(datum: &BundleDatum) -> Result<Vec<Q>> {
    let (a1, a2) = reality_pair(datum)?;
    let m = datum.m();
    let ts: Vec<Q> = (0..=m as i64).map(q).collect();
    let vals: Vec<Q> = ts.iter().map(|t| pfaffian(&a1.add(&a2.scale(t)))).collect();
    let p = interpolate(&ts, &vals);
    let mut coeffs = p.coeffs().to_vec();
    coeffs.resize(m + 1, Q::zero());
    Ok(coeffs)
}

/// Whether the binary form with the given coefficients has a nonzero real root.
pub fn binary_form_has_real_root(coeffs: &[Q]) -> bool {
    let p = Poly::new(coeffs.to_vec());
    if p.is_zero() {
        return true;
    }
    // vanishing top coefficient means (λ₁, λ₂) = (0, 1) is a root
    if coeffs.last().is_none_or(Zero::is_zero) {
        return true;
    }
    p.count_real_roots() > 0
}

/// Discriminant of the quadratic form `Pf(λ₁A₁ + λ₂A₂)` for `m = 2`.
pub fn pfaffian_discriminant_m2(a1: &QMat, a2: &QMat) -> Q {
    let a = pfaffian(a1);
    let c = pfaffian(a2);
    let mixed = |x: &QMat, y: &QMat| -> Q {
        &x[(0, 1)] * &y[(2, 3)] - &x[(0, 2)] * &y[(1, 3)] + &x[(0, 3)] * &y[(1, 2)]
    };
    let b = mixed(a1, a2) + mixed(a2, a1);
    &b * &b - q(4) * a * c
}

/// Existence of a nonzero real `(λ₁, λ₂)` with `Pf(λ₁A₁ + λ₂A₂) = 0`.
pub fn pfaffian_reality(datum: &BundleDatum) -> Result<bool> {
    let (a1, a2) = reality_pair(datum)?;
    if datum.m() == 2 {
        return Ok(!pfaffian_discriminant_m2(a1, a2).is_negative());
    }
    Ok(binary_form_has_real_root(&pfaffian_binary_form(datum)?))
}

/// Same decision through coefficient extraction and Sturm counting for every `m`.
pub fn pfaffian_reality_sturm(datum: &BundleDatum) -> Result<bool> {
    Ok(binary_form_has_real_root(&pfaffian_binary_form(datum)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn standard() -> BundleDatum {
        BundleDatum::from_i64(1, 1, &[vec![vec![0, 1], vec![-1, 0]], vec![vec![0, 0], vec![0, 0]]]).unwrap()
    }

    #[test]
    fn split_of_standard_form() {
        let n = lower_triangular_split(&standard());
        assert_eq!(n.t_minus[0], QMat::from_i64_rows(&[vec![0, 0], vec![-1, 0]]));
        assert_eq!(n.s[0], QMat::from_fn(2, 2, |i, j| if i != j { q_frac(1, 4) } else { Q::zero() }));
        assert!(n.t_minus[1].is_zero() && n.s[1].is_zero());
        let a = n.t_minus[0].sub(&n.t_minus[0].transpose());
        assert_eq!(&a, &standard().components()[0]);
    }

    #[test]
    fn zero_form_split() {
        let z = BundleDatum::from_i64(1, 1, &vec![vec![vec![0, 0], vec![0, 0]]; 2]).unwrap();
        let n = lower_triangular_split(&z);
        assert!(n.t_minus.iter().chain(&n.s).all(QMat::is_zero));
    }

    #[test]
    fn rejects_non_antisymmetric() {
        let err = BundleDatum::from_i64(1, 1, &[vec![vec![0, 1], vec![1, 0]], vec![vec![0, 0], vec![0, 0]]]).unwrap_err();
        assert_eq!(err, Error::NotAntisymmetric { component: 0, row: 0, col: 1 });
        let diag = BundleDatum::from_i64(1, 1, &[vec![vec![1, 0], vec![0, 0]], vec![vec![0, 0], vec![0, 0]]]).unwrap_err();
        assert_eq!(diag, Error::NotAntisymmetric { component: 0, row: 0, col: 0 });
    }

    #[test]
    fn rejects_wrong_component_count() {
        let err = BundleDatum::from_i64(1, 1, &[vec![vec![0, 1], vec![-1, 0]]]).unwrap_err();
        assert!(matches!(err, Error::Dimension { expected: 2, found: 1, .. }));
    }

    #[test]
    fn identity_and_inverse() {
        let datum = standard();
        let n = lower_triangular_split(&datum);
        let g = GroupElement::new(vec![q_frac(1, 3), q(2)], vec![q(5), q_frac(-7, 2)]);
        let e = GroupElement::identity(1, 1);
        assert_eq!(group_multiply(&e, &g, &n).unwrap().y, g.y);
        let prod = group_multiply(&g, &g.inverse(&n), &n).unwrap();
        assert!(prod.y.iter().chain(&prod.x).all(Zero::is_zero));
    }

    #[test]
    fn products_of_generators_differ_by_form() {
        let datum = standard();
        let n = lower_triangular_split(&datum);
        let e1 = GroupElement::lift(&[1, 0], 1);
        let e2 = GroupElement::lift(&[0, 1], 1);
        let ab = group_multiply(&e1, &e2, &n).unwrap();
        let ba = group_multiply(&e2, &e1, &n).unwrap();
        let diff: Vec<Q> = ab.y.iter().zip(&ba.y).map(|(a, b)| a - b).collect();
        assert_eq!(diff, datum.eval(&e1.x, &e2.x));
        assert_eq!(diff, vec![q(1), q(0)]);
    }

    #[test]
    fn normalized_action_example() {
        let datum = standard();
        let n = lower_triangular_split(&datum);
        let gamma = GroupElement::lift(&[1, 0], 1);
        let p = GroupElement::real(vec![q(0), q(0)], vec![q(0), q(1)]);
        let out = normalized_action(&gamma, &p, &datum, &n).unwrap();
        // A(e2, e1) + 2 S(e1, e1) = -1 + 0
        assert_eq!(out.y, vec![q(-1), q(0)]);
        assert_eq!(out.x, vec![q(1), q(1)]);
        let zero = GroupElement::lift(&[0, 0], 1);
        assert_eq!(normalized_action(&zero, &p, &datum, &n).unwrap().y, p.y);
        let bad = GroupElement::real(vec![q(0), q(0)], vec![q(1), q(0)]);
        assert_eq!(normalized_action(&bad, &p, &datum, &n), Err(Error::NotLattice));
    }

    #[test]
    fn nondegeneracy() {
        assert!(is_nondegenerate(&standard()));
        let zero = BundleDatum::from_i64(1, 1, &vec![vec![vec![0, 0], vec![0, 0]]; 2]).unwrap();
        assert!(!is_nondegenerate(&zero));
        // m = 2: both components vanish on e4
        let c1 = vec![vec![0, 1, 2, 0], vec![-1, 0, 3, 0], vec![-2, -3, 0, 0], vec![0, 0, 0, 0]];
        let c2 = vec![vec![0, 0, 1, 0], vec![0, 0, 0, 0], vec![-1, 0, 0, 0], vec![0, 0, 0, 0]];
        let deg = BundleDatum::from_i64(2, 1, &[c1, c2]).unwrap();
        assert!(!is_nondegenerate(&deg));
    }

    #[test]
    fn pfaffian_small_cases() {
        let j = QMat::from_i64_rows(&[vec![0, 3], vec![-3, 0]]);
        assert_eq!(pfaffian(&j), q(3));
        let m = QMat::from_i64_rows(&[
            vec![0, 1, 2, 3],
            vec![-1, 0, 4, 5],
            vec![-2, -4, 0, 6],
            vec![-3, -5, -6, 0],
        ]);
        // a12 a34 - a13 a24 + a14 a23
        assert_eq!(pfaffian(&m), q(6 - 10 + 12));
        // Pf^2 = det
        assert_eq!(pfaffian(&m) * pfaffian(&m), m.determinant());
    }

    #[test]
    fn reality_examples() {
        let j = vec![vec![0, 1, 0, 0], vec![-1, 0, 0, 0], vec![0, 0, 0, 1], vec![0, 0, -1, 0]];
        let z = vec![vec![0; 4]; 4];
        let datum = BundleDatum::from_i64(2, 1, &[j.clone(), z]).unwrap();
        assert!(pfaffian_reality(&datum).unwrap());
        // Pf(λ₁A₁ + λ₂A₂) = λ₁² + λ₂²
        let k = vec![vec![0, 0, 1, 0], vec![0, 0, 0, 1], vec![-1, 0, 0, 0], vec![0, -1, 0, 0]];
        let k_neg = vec![vec![0, 0, 1, 0], vec![0, 0, 0, -1], vec![-1, 0, 0, 0], vec![0, 1, 0, 0]];
        let sum_sq = BundleDatum::from_i64(2, 1, &[j.clone(), k_neg.clone()]).unwrap();
        assert_eq!(pfaffian_binary_form(&sum_sq).unwrap(), vec![q(1), q(0), q(1)]);
        assert!(!pfaffian_reality(&sum_sq).unwrap());
        assert!(!pfaffian_reality_sturm(&sum_sq).unwrap());
        // λ₁λ₂: A₁ = J_std on the (1,2),(3,4) planes with opposite sign halves
        let p1 = vec![vec![0, 1, 0, 0], vec![-1, 0, 0, 0], vec![0, 0, 0, 0], vec![0, 0, 0, 0]];
        let p2 = vec![vec![0, 0, 0, 0], vec![0, 0, 0, 0], vec![0, 0, 0, 1], vec![0, 0, -1, 0]];
        let product = BundleDatum::from_i64(2, 1, &[p1, p2]).unwrap();
        assert_eq!(pfaffian_binary_form(&product).unwrap(), vec![q(0), q(1), q(0)]);
        assert!(pfaffian_reality(&product).unwrap());
        let _ = k;
    }

    #[test]
    fn reality_requires_d_one() {
        let datum = BundleDatum::from_i64(1, 2, &vec![vec![vec![0, 1], vec![-1, 0]]; 4]).unwrap();
        assert_eq!(pfaffian_reality(&datum), Err(Error::RequiresFibreDimensionOne { d: 2 }));
    }
}
