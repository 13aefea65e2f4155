use nalgebra::DMatrix;

use super::EigenSplit;
use crate::complex::ComplexStructurePair;
use crate::error::{Error, Result};

/// Invertible maps `B₁ : U⁻ → U⁺` and `B₂ : V⁻ → V⁺` defining
/// `J₂(x⁺, x⁻) = (-B₂x⁻, B₂⁻¹x⁺)` and likewise `J₁`.
#[derive(Clone, Debug, PartialEq)]
pub struct CompatibleStructure {
    pub b1: DMatrix<f64>,
    pub b2: DMatrix<f64>,
}

impl CompatibleStructure {
    pub fn new(b1: DMatrix<f64>, b2: DMatrix<f64>) -> Result<Self> {
        for (m, which) in [(&b1, "B1"), (&b2, "B2")] {
            if !m.is_square() || m.clone().try_inverse().is_none() {
                return Err(Error::NotInvertible(which));
            }
        }
        Ok(Self { b1, b2 })
    }

    /// `d = 1`, `m = 2`: `B₁ = (b)` and `B₂ = B`.
    pub fn threefold(b: f64, bmat: [[f64; 2]; 2]) -> Result<Self> {
        Self::new(DMatrix::from_element(1, 1, b), DMatrix::from_row_slice(2, 2, &[bmat[0][0], bmat[0][1], bmat[1][0], bmat[1][1]]))
    }

    /// `m = d = 1`: scalars `b₁`, `b₂`.
    pub fn scalar(b1: f64, b2: f64) -> Result<Self> {
        Self::new(DMatrix::from_element(1, 1, b1), DMatrix::from_element(1, 1, b2))
    }

    pub fn b1_inv(&self) -> DMatrix<f64> {
        self.b1.clone().try_inverse().expect("checked at construction")
    }

    pub fn b2_inv(&self) -> DMatrix<f64> {
        self.b2.clone().try_inverse().expect("checked at construction")
    }
}

fn swap_structure(b: &DMatrix<f64>, binv: &DMatrix<f64>) -> DMatrix<f64> {
    let k = b.nrows();
    let mut j = DMatrix::zeros(2 * k, 2 * k);
    j.view_mut((0, k), (k, k)).copy_from(&(-b));
    j.view_mut((k, 0), (k, k)).copy_from(binv);
    j
}

/// `(J₁, J₂)` in the original coordinates.
pub fn build_j(split: &EigenSplit, cs: &CompatibleStructure) -> Result<ComplexStructurePair> {
    let (p, qd, fp, fm) = split.dims();
    if p != qd {
        return Err(Error::EigenDimensionMismatch { plus: p, minus: qd });
    }
    if fp != fm {
        return Err(Error::EigenDimensionMismatch { plus: fp, minus: fm });
    }
    if cs.b2.nrows() != p || cs.b1.nrows() != fp {
        return Err(Error::Dimension { what: "compatible structure", expected: p, found: cs.b2.nrows() });
    }
    let p2 = split.base_change().to_f64();
    let p2inv = split.base_change().inverse().ok_or(Error::NotInvertible("base eigenbasis"))?.to_f64();
    let p1 = split.fibre_change().to_f64();
    let p1inv = split.fibre_change().inverse().ok_or(Error::NotInvertible("fibre eigenbasis"))?.to_f64();
    let j2 = &p2 * swap_structure(&cs.b2, &cs.b2_inv()) * p2inv;
    let j1 = &p1 * swap_structure(&cs.b1, &cs.b1_inv()) * p1inv;
    ComplexStructurePair::new(j1, j2)
}

/// Residuals of the anticommutation `LJ₂ = -J₁L`, split by target.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AntiholomorphyResidual {
    /// `L⁺₊B₂ + B₁L⁻₋` and `L⁺₋B₂⁻¹ - B₁L⁻₊`.
    pub primary: f64,
    /// `L⁻₊B₂ - B₁⁻¹L⁺₋` and `L⁻₋B₂⁻¹ + B₁⁻¹L⁺₊`.
    pub cross_check: f64,
}

pub fn antiholomorphy_residuals(split: &EigenSplit, cs: &CompatibleStructure) -> AntiholomorphyResidual {
    let b1i = cs.b1_inv();
    let b2i = cs.b2_inv();
    let r1 = &split.l_pp * &cs.b2 + &cs.b1 * &split.l_mm;
    let r2 = &split.l_pm * &b2i - &cs.b1 * &split.l_mp;
    let c1 = &split.l_mp * &cs.b2 - &b1i * &split.l_pm;
    let c2 = &split.l_mm * &b2i + &b1i * &split.l_pp;
    AntiholomorphyResidual { primary: r1.amax().max(r2.amax()), cross_check: c1.amax().max(c2.amax()) }
}

pub fn antiholomorphy_residual(split: &EigenSplit, cs: &CompatibleStructure) -> f64 {
    antiholomorphy_residuals(split, cs).primary
}

/// `Σ_k (B)_{lk} X_k`: applies a map between fibre eigenspaces to a list of
/// forms indexed by the source coordinate.
fn act(b: &DMatrix<f64>, forms: &[DMatrix<f64>]) -> Vec<DMatrix<f64>> {
    (0..b.nrows())
        .map(|l| {
            let (r, c) = forms[0].shape();
            let mut acc = DMatrix::zeros(r, c);
            for (k, f) in forms.iter().enumerate() {
                acc += f * b[(l, k)];
            }
            acc
        })
        .collect()
}

fn max_diff(a: &[DMatrix<f64>], b: &[DMatrix<f64>]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).amax()).fold(0.0, f64::max)
}

/// Max-norm of `A₋ - B₂ᵀA₊B₂ + B₁(DB₂ - (DB₂)ᵀ)`.
pub fn rbr2_residual(split: &EigenSplit, cs: &CompatibleStructure) -> f64 {
    if split.a_plus.is_empty() || split.d.is_empty() {
        return 0.0;
    }
    let b2 = &cs.b2;
    let skew: Vec<DMatrix<f64>> = split
        .d
        .iter()
        .map(|d| {
            let db = d * b2;
            &db - db.transpose()
        })
        .collect();
    let lhs: Vec<DMatrix<f64>> = split.a_minus.iter().zip(&split.a_plus).map(|(am, ap)| am - b2.transpose() * ap * b2).collect();
    let rhs: Vec<DMatrix<f64>> = act(&cs.b1, &skew).into_iter().map(|m| -m).collect();
    max_diff(&lhs, &rhs)
}

/// Residuals of the four tensor equations, each computed from its own
/// formula with `E = -Dᵀ`:
///
/// 1. `-A₊B₂ + B₂⁻ᵀA₋ = B₁(-E - B₂⁻ᵀDB₂)`
/// 2. `A₋B₂⁻¹ - B₂ᵀA₊ = B₁(-D - B₂ᵀEB₂⁻¹)`
/// 3. `EB₂⁻¹ + B₂⁻ᵀD = B₁⁻¹(A₊ - B₂⁻ᵀA₋B₂⁻¹)`
/// 4. `-B₂ᵀE - DB₂ = B₁⁻¹(A₋ - B₂ᵀA₊B₂)`
pub fn tensor_equations_residuals(split: &EigenSplit, cs: &CompatibleStructure) -> [f64; 4] {
    if split.a_plus.is_empty() || split.d.is_empty() {
        return [0.0; 4];
    }
    let b2 = &cs.b2;
    let b2i = cs.b2_inv();
    let b2it = b2i.transpose();
    let b1i = cs.b1_inv();
    let ap = &split.a_plus;
    let am = &split.a_minus;
    let d = &split.d;
    let e: Vec<DMatrix<f64>> = d.iter().map(|x| -x.transpose()).collect();

    let l1: Vec<_> = ap.iter().zip(am).map(|(p, m)| -(p * b2) + &b2it * m).collect();
    let r1 = act(&cs.b1, &d.iter().zip(&e).map(|(dk, ek)| -ek - &b2it * dk * b2).collect::<Vec<_>>());

    let l2: Vec<_> = ap.iter().zip(am).map(|(p, m)| m * &b2i - b2.transpose() * p).collect();
    let r2 = act(&cs.b1, &d.iter().zip(&e).map(|(dk, ek)| -dk - b2.transpose() * ek * &b2i).collect::<Vec<_>>());

    let l3: Vec<_> = d.iter().zip(&e).map(|(dk, ek)| ek * &b2i + &b2it * dk).collect();
    let r3 = act(&b1i, &ap.iter().zip(am).map(|(p, m)| p - &b2it * m * &b2i).collect::<Vec<_>>());

    let l4: Vec<_> = d.iter().zip(&e).map(|(dk, ek)| -(b2.transpose() * ek) - dk * b2).collect();
    let r4 = act(&b1i, &ap.iter().zip(am).map(|(p, m)| m - b2.transpose() * p * b2).collect::<Vec<_>>());

    [max_diff(&l1, &r1), max_diff(&l2, &r2), max_diff(&l3, &r3), max_diff(&l4, &r4)]
}

/// Factor by which the four residuals can differ from one another: the
/// equations are related by multiplying with `B₁^{±1}` and `B₂^{±1}`.
pub fn tensor_conditioning(cs: &CompatibleStructure) -> f64 {
    let n = |m: &DMatrix<f64>| m.norm().max(1.0);
    let k1 = n(&cs.b1) * n(&cs.b1_inv());
    let k2 = n(&cs.b2) * n(&cs.b2_inv());
    k1 * k2 * k2
}
