use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{q_from_f64, Q};
use crate::real::{antiholomorphy_residual, rbr2_residual, CompatibleStructure, EigenSplit};

/// Exact rational value of a double.
pub(crate) fn qf(x: f64) -> Q {
    q_from_f64(x).expect("finite block entry")
}

/// The compatibility system for `d = 1` and `m ∈ {1, 2}`.
///
/// Unknowns are packed into a point: `[b₁, b₂]` for `m = 1` and
/// `[b, b₁₁, b₁₂, b₂₁, b₂₂]` for `m = 2`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintSystem {
    pub split: EigenSplit,
    pub m: usize,
    /// `A₊ = a₊·J` and `A₋ = a₋·J` with `J = [[0, 1], [-1, 0]]` (zero for `m = 1`).
    pub a_plus: f64,
    pub a_minus: f64,
    pub d: DMatrix<f64>,
    pub l_pp: Vec<f64>,
    pub l_pm: Vec<f64>,
    pub l_mp: Vec<f64>,
    pub l_mm: Vec<f64>,
}

fn row(m: &DMatrix<f64>) -> Vec<f64> {
    m.row(0).iter().copied().collect()
}

fn alt2(a: f64) -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[0.0, a, -a, 0.0])
}

impl ConstraintSystem {
    pub fn from_split(split: EigenSplit) -> Result<Self> {
        let (p, q, fp, fm) = split.dims();
        if fp != 1 || fm != 1 {
            return Err(Error::RequiresFibreDimensionOne { d: (fp + fm) / 2 });
        }
        if p != q || !(1..=2).contains(&p) {
            return Err(Error::UnsupportedBaseDimension { m: (p + q) / 2 });
        }
        let m = p;
        let (a_plus, a_minus) = if m == 2 { (split.a_plus[0][(0, 1)], split.a_minus[0][(0, 1)]) } else { (0.0, 0.0) };
        Ok(Self {
            m,
            a_plus,
            a_minus,
            d: split.d[0].clone(),
            l_pp: row(&split.l_pp),
            l_pm: row(&split.l_pm),
            l_mp: row(&split.l_mp),
            l_mm: row(&split.l_mm),
            split,
        })
    }

    /// Surface case with scalar blocks.
    pub fn kodaira(l_pp: f64, l_pm: f64, l_mp: f64, l_mm: f64, d: f64) -> Result<Self> {
        let s = |x: f64| DMatrix::from_element(1, 1, x);
        let split = EigenSplit::from_blocks(vec![s(0.0)], vec![s(0.0)], vec![s(d)], s(l_pp), s(l_pm), s(l_mp), s(l_mm))?;
        Self::from_split(split)
    }

    /// Threefold case; `l` holds the rows `L⁺₊, L⁺₋, L⁻₊, L⁻₋`.
    pub fn threefold(a_plus: f64, a_minus: f64, d: [[f64; 2]; 2], l: [[f64; 2]; 4]) -> Result<Self> {
        let r = |v: [f64; 2]| DMatrix::from_row_slice(1, 2, &v);
        let dm = DMatrix::from_row_slice(2, 2, &[d[0][0], d[0][1], d[1][0], d[1][1]]);
        let split = EigenSplit::from_blocks(vec![alt2(a_plus)], vec![alt2(a_minus)], vec![dm], r(l[0]), r(l[1]), r(l[2]), r(l[3]))?;
        Self::from_split(split)
    }

    pub fn point_len(&self) -> usize {
        if self.m == 1 {
            2
        } else {
            5
        }
    }

    pub fn l_is_zero(&self) -> bool {
        self.l_pp.iter().chain(&self.l_pm).chain(&self.l_mp).chain(&self.l_mm).all(|&x| x == 0.0)
    }

    pub fn d_entry(&self, i: usize, j: usize) -> f64 {
        self.d[(i, j)]
    }

    /// `b > 0` and `det B > 0` (both scalars positive for `m = 1`).
    pub fn in_region(&self, p: &[f64]) -> bool {
        if p.iter().any(|x| !x.is_finite()) {
            return false;
        }
        if self.m == 1 {
            p[0] > 0.0 && p[1] > 0.0
        } else {
            p[0] > 0.0 && p[1] * p[4] - p[2] * p[3] > 0.0
        }
    }

    pub fn structure(&self, p: &[f64]) -> Option<CompatibleStructure> {
        let cs = if self.m == 1 {
            CompatibleStructure::scalar(p[0], p[1])
        } else {
            CompatibleStructure::threefold(p[0], [[p[1], p[2]], [p[3], p[4]]])
        };
        cs.ok()
    }

    /// Residuals from the real-structure checkers: `(antiholomorphy, rbr2)`.
    pub fn residuals(&self, p: &[f64]) -> Option<(f64, f64)> {
        let cs = self.structure(p)?;
        Some((antiholomorphy_residual(&self.split, &cs), rbr2_residual(&self.split, &cs)))
    }

    /// In the open region with both residuals at most `tol`.
    pub fn verifies(&self, p: &[f64], tol: f64) -> bool {
        self.in_region(p) && self.residuals(p).is_some_and(|(a, r)| a <= tol && r <= tol)
    }

    /// `b'(B) = d₁₁b₁₂ + d₁₂b₂₂ - d₂₁b₁₁ - d₂₂b₂₁`.
    pub fn b_prime(&self, bm: &[f64; 4]) -> f64 {
        let d = &self.d;
        d[(0, 0)] * bm[1] + d[(0, 1)] * bm[3] - d[(1, 0)] * bm[0] - d[(1, 1)] * bm[2]
    }

    /// `a₋ - a₊ det B + b·b'(B)`, the scalar form of the quadratic equation.
    pub fn quadric(&self, p: &[f64]) -> f64 {
        let bm = [p[1], p[2], p[3], p[4]];
        self.a_minus - self.a_plus * (p[1] * p[4] - p[2] * p[3]) + p[0] * self.b_prime(&bm)
    }

    /// Largest absolute block entry, used to scale tolerances.
    pub fn scale(&self) -> f64 {
        let mut s = self.a_plus.abs().max(self.a_minus.abs()).max(self.d.amax());
        for v in self.l_pp.iter().chain(&self.l_pm).chain(&self.l_mp).chain(&self.l_mm) {
            s = s.max(v.abs());
        }
        s.max(1.0)
    }
}

/// A verified solution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionWitness {
    pub point: Vec<f64>,
    pub b1: Vec<Vec<f64>>,
    pub b2: Vec<Vec<f64>>,
    pub antiholomorphy: f64,
    pub rbr2: f64,
    pub case_label: String,
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

impl SolutionWitness {
    /// Re-verifies `p` against the residual checkers; `None` unless both
    /// residuals are at most `tol` inside the open region.
    pub fn verified(sys: &ConstraintSystem, p: &[f64], tol: f64, case_label: &str) -> Option<Self> {
        if !sys.in_region(p) {
            return None;
        }
        let cs = sys.structure(p)?;
        let (a, r) = sys.residuals(p)?;
        (a <= tol && r <= tol).then(|| Self {
            point: p.to_vec(),
            b1: rows(&cs.b1),
            b2: rows(&cs.b2),
            antiholomorphy: a,
            rbr2: r,
            case_label: case_label.to_string(),
        })
    }

    pub fn structure(&self) -> CompatibleStructure {
        let to = |v: &Vec<Vec<f64>>| DMatrix::from_fn(v.len(), v.len(), |i, j| v[i][j]);
        CompatibleStructure { b1: to(&self.b1), b2: to(&self.b2) }
    }
}
