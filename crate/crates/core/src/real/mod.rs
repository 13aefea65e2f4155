//! Affine antiholomorphic involutions `σ̃(y, x) = (A₁y + Lx + d₁, A₂x + d₂)`
//! and the equation systems they satisfy.

mod dianalytic;
mod equations;
mod split;

pub use dianalytic::{check_dianalytic_conditions, ComplexData};
pub use equations::{
    antiholomorphy_residual, antiholomorphy_residuals, build_j, rbr2_residual, tensor_conditioning,
    tensor_equations_residuals, AntiholomorphyResidual, CompatibleStructure,
};
pub use split::{eigensplit, EigenSplit};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{is_integral_vec, QMat, Q};
use crate::lattice::{is_nondegenerate, BundleDatum};

/// The datum `(A₁, A₂, L, d₁, d₂)` of a lifting in real coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct RealStructureData {
    pub a1: QMat,
    pub a2: QMat,
    pub l: QMat,
    pub d1: Vec<Q>,
    pub d2: Vec<Q>,
}

impl RealStructureData {
    /// Checks shapes and integrality of the linear parts. The involution
    /// identities are left to the condition checkers so that they can be
    /// reported rather than rejected.
    pub fn new(a1: QMat, a2: QMat, l: QMat, d1: Vec<Q>, d2: Vec<Q>) -> Result<Self> {
        let f = a1.nrows();
        let b = a2.nrows();
        if a1.ncols() != f {
            return Err(Error::InvalidRealData("A1 must be square".into()));
        }
        if a2.ncols() != b {
            return Err(Error::InvalidRealData("A2 must be square".into()));
        }
        if l.nrows() != f || l.ncols() != b {
            return Err(Error::InvalidRealData(format!("L must be {f}x{b}, got {}x{}", l.nrows(), l.ncols())));
        }
        if d1.len() != f || d2.len() != b {
            return Err(Error::InvalidRealData("translation lengths do not match A1, A2".into()));
        }
        if !a1.is_integral() || !a2.is_integral() {
            return Err(Error::InvalidRealData("A1 and A2 must be integer matrices".into()));
        }
        Ok(Self { a1, a2, l, d1, d2 })
    }

    /// `x ↦ Lx + A(d₂, A₂x)`, the linear part of `σ̃` in holomorphic
    /// coordinates; it equals `L` when `d₂ = 0`.
    pub fn effective_l(&self, datum: &BundleDatum) -> QMat {
        let cols: Vec<Vec<Q>> = (0..self.base_rank())
            .map(|j| {
                let a = datum.eval(&self.d2, &self.a2.column(j));
                self.l.column(j).iter().zip(&a).map(|(x, y)| x + y).collect()
            })
            .collect();
        QMat::from_columns(&cols, self.fibre_rank())
    }

    pub fn base_rank(&self) -> usize {
        self.a2.nrows()
    }

    pub fn fibre_rank(&self) -> usize {
        self.a1.nrows()
    }

    pub(crate) fn check_against(&self, datum: &BundleDatum) -> Result<()> {
        if self.base_rank() != datum.base_rank() {
            return Err(Error::Dimension { what: "A2", expected: datum.base_rank(), found: self.base_rank() });
        }
        if self.fibre_rank() != datum.fibre_rank() {
            return Err(Error::Dimension { what: "A1", expected: datum.fibre_rank(), found: self.fibre_rank() });
        }
        Ok(())
    }
}

/// Outcome of one labelled condition.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionResult {
    pub label: String,
    pub holds: bool,
    pub detail: String,
}

impl ConditionResult {
    fn new(label: &str, holds: bool, detail: impl Into<String>) -> Self {
        Self { label: label.to_string(), holds, detail: detail.into() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionReport {
    pub conditions: Vec<ConditionResult>,
    /// Witness `γ` of the square condition when it exists.
    pub gamma: Option<Vec<String>>,
    pub degenerate: bool,
}

impl ConditionReport {
    pub fn all_hold(&self) -> bool {
        self.conditions.iter().all(|c| c.holds)
    }

    pub fn holds(&self, label: &str) -> bool {
        self.conditions.iter().any(|c| c.label == label && c.holds)
    }

    pub fn failed(&self) -> Vec<&ConditionResult> {
        self.conditions.iter().filter(|c| !c.holds).collect()
    }
}

fn first_nonintegral(v: &[Q]) -> String {
    match v.iter().position(|x| !x.is_integer()) {
        Some(i) => format!("entry {i} = {}", v[i]),
        None => String::new(),
    }
}

fn deviation(a: &QMat, b: &QMat) -> String {
    let diff = a.sub(b);
    format!("max deviation {}", diff.max_abs())
}

/// Integrality conditions for the conjugation action of `σ̃` on the lattice,
/// labelled `integral-1` to `integral-7`.
pub fn check_integral_conditions(data: &RealStructureData, datum: &BundleDatum) -> Result<ConditionReport> {
    data.check_against(datum)?;
    let f = datum.fibre_rank();
    let b = datum.base_rank();
    let comps = datum.components();
    let degenerate = !is_nondegenerate(datum);
    if degenerate {
        log::warn!("alternating form is degenerate; the square witness is not unique");
    }
    let mut out = Vec::new();

    let sq1 = data.a1.mul(&data.a1);
    let id_f = QMat::identity(f);
    out.push(ConditionResult::new("integral-1", sq1 == id_f, if sq1 == id_f { String::new() } else { deviation(&sq1, &id_f) }));
    let sq2 = data.a2.mul(&data.a2);
    let id_b = QMat::identity(b);
    out.push(ConditionResult::new("integral-2", sq2 == id_b, if sq2 == id_b { String::new() } else { deviation(&sq2, &id_b) }));

    // A₁(A(x, γ)) = A(A₂x, A₂γ), one component at a time
    let mut compat = true;
    let mut detail = String::new();
    for l in 0..f {
        let mut lhs = QMat::zeros(b, b);
        for (k, ak) in comps.iter().enumerate() {
            lhs = lhs.add(&ak.scale(&data.a1[(l, k)]));
        }
        let rhs = data.a2.transpose().mul(&comps[l]).mul(&data.a2);
        if lhs != rhs {
            compat = false;
            detail = format!("component {l}: {}", deviation(&lhs, &rhs));
            break;
        }
    }
    out.push(ConditionResult::new("integral-3", compat, detail));

    // L'(x) = Lx - A(d₂, A₂x) integral on the basis
    let mut lprime_ok = true;
    let mut detail = String::new();
    for j in 0..b {
        let col = data.l.column(j);
        let a2e = data.a2.column(j);
        let a = datum.eval(&data.d2, &a2e);
        let v: Vec<Q> = col.iter().zip(&a).map(|(x, y)| x - y).collect();
        if !is_integral_vec(&v) {
            lprime_ok = false;
            detail = format!("basis vector {j}: {}", first_nonintegral(&v));
            break;
        }
    }
    out.push(ConditionResult::new("integral-4", lprime_ok, detail));

    let t2: Vec<Q> = data.a2.mul_vec(&data.d2).iter().zip(&data.d2).map(|(x, y)| x + y).collect();
    out.push(ConditionResult::new("integral-5", is_integral_vec(&t2), first_nonintegral(&t2)));

    let t1: Vec<Q> = data
        .l
        .mul_vec(&data.d2)
        .iter()
        .zip(data.a1.mul_vec(&data.d1))
        .zip(&data.d1)
        .map(|((x, y), z)| x + y + z)
        .collect();
    out.push(ConditionResult::new("integral-6", is_integral_vec(&t1), first_nonintegral(&t1)));

    let (holds, gamma, detail) = match square_witness(data, datum) {
        Some(g) if is_integral_vec(&g) => (true, Some(g), String::new()),
        Some(g) => {
            let d = format!("rational witness is not integral: {}", first_nonintegral(&g));
            (false, Some(g), d)
        }
        None => (false, None, "no rational witness".to_string()),
    };
    out.push(ConditionResult::new("integral-7", holds, detail));

    Ok(ConditionReport {
        conditions: out,
        gamma: gamma.map(|g| g.iter().map(ToString::to_string).collect()),
        degenerate,
    })
}

/// Rational `γ` with `L A₂ x + A₁ L x = -A(x, γ)` for all `x`, if any.
pub fn square_witness(data: &RealStructureData, datum: &BundleDatum) -> Option<Vec<Q>> {
    let m = data.l.mul(&data.a2).add(&data.a1.mul(&data.l));
    let comps = datum.components();
    let mut stacked = comps[0].clone();
    for c in &comps[1..] {
        stacked = stacked.vstack(c);
    }
    let rhs: Vec<Q> = (0..comps.len()).flat_map(|k| m.row(k).into_iter().map(|v| -v)).collect();
    stacked.solve(&rhs)
}
