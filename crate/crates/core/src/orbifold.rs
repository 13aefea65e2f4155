//! Recovering the involution datum from its conjugation action on the
//! lattice group, with the translation part normalized by a change of origin.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::exact::{q, q_frac, rank_mod2, QMat, Q};
use crate::lattice::BundleDatum;
use crate::real::RealStructureData;

/// What the orbifold extension determines about a lifting `σ̃`.
///
/// Affine maps of `(Λ ⊗ ℝ) ⊕ (Γ ⊗ ℝ)` are written with the fibre coordinate
/// first, as `w ↦ Mw + b`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConjugationData {
    /// Conjugation on the centre: column `k` is the image of the `k`-th basis
    /// vector of `Λ`.
    pub a1: QMat,
    pub a2: QMat,
    pub d2: Vec<Q>,
    /// Central parts `l_j` of the chosen lifts of the basis vectors of `Γ`.
    pub generator_lifts: Vec<Vec<Q>>,
    /// Linear parts of `σ̃ γ̂_j σ̃⁻¹`, when recorded.
    pub generator_linear: Option<Vec<QMat>>,
    /// Translation parts of `σ̃ γ̂_j σ̃⁻¹`.
    pub generator_translations: Vec<Vec<Q>>,
    /// Translation part of `σ̃²`.
    pub square_translation: Vec<Q>,
}

fn affine_matrix(data: &RealStructureData) -> QMat {
    let f = data.fibre_rank();
    let top = data.a1.hstack(&data.l);
    let bottom = QMat::zeros(data.base_rank(), f).hstack(&data.a2);
    top.vstack(&bottom)
}

fn translation(data: &RealStructureData) -> Vec<Q> {
    data.d1.iter().chain(&data.d2).cloned().collect()
}

/// Linear part of the lift of `γ`: `(y, x) ↦ (y + A(x, γ), x)`.
fn lift_linear(datum: &BundleDatum, gamma: &[Q]) -> QMat {
    let f = datum.fibre_rank();
    let b = datum.base_rank();
    let mut out = QMat::identity(f + b);
    for (k, a) in datum.components().iter().enumerate() {
        let phi = a.mul_vec(gamma);
        for (j, v) in phi.iter().enumerate() {
            out[(k, f + j)] = v.clone();
        }
    }
    out
}

/// Evaluates the conjugates with full matrices, taking the lift of each
/// basis vector `e_j` with central part `lifts[j]` (zero when `None`).
pub fn conjugation_data(data: &RealStructureData, datum: &BundleDatum, lifts: Option<Vec<Vec<Q>>>) -> Result<ConjugationData> {
    data.check_against(datum)?;
    let f = datum.fibre_rank();
    let b = datum.base_rank();
    let m = affine_matrix(data);
    let minv = m.inverse().ok_or(Error::NotInvertible("linear part of the lifting"))?;
    let t = translation(data);
    let lifts = lifts.unwrap_or_else(|| vec![vec![Q::zero(); f]; b]);
    let mut linear = Vec::with_capacity(b);
    let mut translations = Vec::with_capacity(b);
    for (j, l) in lifts.iter().enumerate() {
        let mut gamma = vec![Q::zero(); b];
        gamma[j] = q(1);
        let dmat = lift_linear(datum, &gamma);
        let h: Vec<Q> = l.iter().chain(&gamma).cloned().collect();
        let conj = m.mul(&dmat).mul(&minv);
        let shifted = conj.mul_vec(&t);
        let mh = m.mul_vec(&h);
        translations.push(shifted.iter().zip(&mh).zip(&t).map(|((s, x), y)| x + y - s).collect());
        linear.push(conj);
    }
    let mt = m.mul_vec(&t);
    Ok(ConjugationData {
        a1: data.a1.clone(),
        a2: data.a2.clone(),
        d2: data.d2.clone(),
        generator_lifts: lifts,
        generator_linear: Some(linear),
        generator_translations: translations,
        square_translation: mt.iter().zip(&t).map(|(x, y)| x + y).collect(),
    })
}

/// Basis `[Z | S | W⁺ | W⁻]` of `ℚ^n` with `A₁Z = S`, `A₁ = ±1` on `W±`.
pub fn involution_frame(a1: &QMat) -> (QMat, usize, usize, usize) {
    let n = a1.nrows();
    let c = rank_mod2(&a1.sub(&QMat::identity(n)));
    let mut z: Vec<Vec<Q>> = Vec::new();
    let mut frame = QMat::zeros(n, 0);
    for k in 0..n {
        if z.len() == c {
            break;
        }
        let mut e = vec![Q::zero(); n];
        e[k] = q(1);
        let cand = frame.hstack(&QMat::column_vector(&e)).hstack(&QMat::column_vector(&a1.mul_vec(&e)));
        if cand.rank() == frame.ncols() + 2 {
            frame = cand;
            z.push(e);
        }
    }
    let c = z.len();
    let s: Vec<Vec<Q>> = z.iter().map(|v| a1.mul_vec(v)).collect();
    let mut chosen = QMat::from_columns(&z, n).hstack(&QMat::from_columns(&s, n));
    let mut counts = [0usize; 2];
    for (slot, sign) in [(0, 1), (1, -1)] {
        let eig = a1.sub(&QMat::identity(n).scale(&q(sign))).integer_kernel();
        for v in eig {
            let cand = chosen.hstack(&QMat::column_vector(&v));
            if cand.rank() == chosen.ncols() + 1 {
                chosen = cand;
                counts[slot] += 1;
            }
        }
    }
    (chosen, c, counts[0], counts[1])
}

/// The representative of `d₁` with vanishing `Z` and `W⁻` components among
/// those with the given `A₁d₁ + d₁`.
pub fn normalize_d1(a1: &QMat, d1_image: &[Q]) -> Result<Vec<Q>> {
    let (frame, c, wp, _) = involution_frame(a1);
    let coords = frame
        .solve(d1_image)
        .ok_or_else(|| Error::InconsistentConjugation("involution frame is not a basis".into()))?;
    let (zc, rest) = coords.split_at(c);
    let (sc, rest) = rest.split_at(c);
    let (wpc, wmc) = rest.split_at(wp);
    if zc != sc || wmc.iter().any(|x| !x.is_zero()) {
        return Err(Error::InconsistentConjugation("A1 d1 + d1 is not in the image of A1 + I".into()));
    }
    let half = q_frac(1, 2);
    let mut coeff = vec![Q::zero(); frame.ncols()];
    coeff[c..2 * c].clone_from_slice(sc);
    for (i, w) in wpc.iter().enumerate() {
        coeff[2 * c + i] = w * &half;
    }
    Ok(frame.mul_vec(&coeff))
}

/// `d₁` of a datum brought to normal form.
pub fn normalized(data: &RealStructureData) -> Result<RealStructureData> {
    let image: Vec<Q> = data.a1.mul_vec(&data.d1).iter().zip(&data.d1).map(|(x, y)| x + y).collect();
    let mut out = data.clone();
    out.d1 = normalize_d1(&data.a1, &image)?;
    Ok(out)
}

/// Inverts [`conjugation_data`] up to the change of origin in the fibre.
pub fn reconstruct_from_orbifold(conj: &ConjugationData, datum: &BundleDatum) -> Result<RealStructureData> {
    let f = datum.fibre_rank();
    let b = datum.base_rank();
    if conj.a1.nrows() != f || conj.a2.nrows() != b || conj.d2.len() != b {
        return Err(Error::Dimension { what: "conjugation data", expected: b, found: conj.a2.nrows() });
    }
    if conj.generator_translations.len() != b || conj.generator_lifts.len() != b || conj.square_translation.len() != f + b {
        return Err(Error::Dimension { what: "generator data", expected: b, found: conj.generator_translations.len() });
    }
    if conj.a1.mul(&conj.a1) != QMat::identity(f) {
        return Err(Error::InconsistentConjugation("A1^2 != I".into()));
    }
    if conj.a2.mul(&conj.a2) != QMat::identity(b) {
        return Err(Error::InconsistentConjugation("A2^2 != I".into()));
    }
    let a1 = &conj.a1;
    let a2inv_d2 = conj.a2.mul_vec(&conj.d2);
    let mut l_cols = Vec::with_capacity(b);
    for j in 0..b {
        let mut gamma = vec![Q::zero(); b];
        gamma[j] = q(1);
        let t = &conj.generator_translations[j];
        if t.len() != f + b {
            return Err(Error::Dimension { what: "generator translation", expected: f + b, found: t.len() });
        }
        if t[f..] != conj.a2.column(j)[..] {
            return Err(Error::InconsistentConjugation(format!("base part of generator {j} is not A2 e_{j}")));
        }
        // Lγ = t_fibre + A₁A(A₂⁻¹d₂, γ) - A₁l
        let phi = datum.eval(&a2inv_d2, &gamma);
        let a1phi = a1.mul_vec(&phi);
        let a1l = a1.mul_vec(&conj.generator_lifts[j]);
        l_cols.push((0..f).map(|k| &t[k] + &a1phi[k] - &a1l[k]).collect::<Vec<Q>>());
    }
    let l = QMat::from_columns(&l_cols, f);
    let sq = &conj.square_translation;
    let expected: Vec<Q> = conj.a2.mul_vec(&conj.d2).iter().zip(&conj.d2).map(|(x, y)| x + y).collect();
    if sq[f..] != expected[..] {
        return Err(Error::InconsistentConjugation("base part of the square is not A2 d2 + d2".into()));
    }
    let ld2 = l.mul_vec(&conj.d2);
    let image: Vec<Q> = sq[..f].iter().zip(&ld2).map(|(x, y)| x - y).collect();
    let d1 = normalize_d1(a1, &image)?;
    let out = RealStructureData::new(a1.clone(), conj.a2.clone(), l, d1, conj.d2.clone())?;
    if let Some(linear) = &conj.generator_linear {
        let check = conjugation_data(&out, datum, Some(conj.generator_lifts.clone()))?;
        if check.generator_linear.as_ref() != Some(linear) {
            return Err(Error::InconsistentConjugation("linear parts of the generator conjugates".into()));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(v: &[i64]) -> QMat {
        QMat::from_fn(v.len(), v.len(), |i, j| if i == j { q(v[i]) } else { Q::zero() })
    }

    #[test]
    fn minus_part_normalizes_away() {
        let a1 = diag(&[-1, -1]);
        let d1 = normalize_d1(&a1, &[q(0), q(0)]).unwrap();
        assert!(d1.iter().all(Zero::is_zero));
    }

    #[test]
    fn identity_keeps_d1() {
        let a1 = diag(&[1, 1]);
        let d1 = normalize_d1(&a1, &[q_frac(2, 3), q(1)]).unwrap();
        assert_eq!(d1, vec![q_frac(1, 3), q_frac(1, 2)]);
    }

    #[test]
    fn swap_frame() {
        let a1 = QMat::from_i64_rows(&[vec![0, 1], vec![1, 0]]);
        let (frame, c, wp, wm) = involution_frame(&a1);
        assert_eq!((c, wp, wm), (1, 0, 0));
        assert_eq!(frame, QMat::identity(2));
        // d₁ = (z, s) normalizes to (0, z + s)
        let d1 = normalize_d1(&a1, &[q(3), q(3)]).unwrap();
        assert_eq!(d1, vec![q(0), q(3)]);
    }
}
