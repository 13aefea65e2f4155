use nalgebra::DMatrix;
use num_traits::Zero;

use super::RealStructureData;
use crate::error::{Error, Result};
use crate::exact::{is_integral_vec, QMat, Q};
use crate::lattice::{is_nondegenerate, BundleDatum};

/// Blocks of the form and of `L` with respect to the `±1`-eigenspaces
/// `V±` of `A₂` and `U±` of `A₁`.
///
/// Forms are indexed by a fibre coordinate: `a_plus[l]` and `a_minus[l]`
/// for `l` running over `U⁺`, `d[l]` over `U⁻`. `a_plus[l]` lives on
/// `V⁺ × V⁺`, `a_minus[l]` on `V⁻ × V⁻`, and `d[l]` on `V⁻ × V⁺`. The block
/// `l_pm` maps `V⁻` to `U⁺`, and so on (upper sign on the target).
#[derive(Clone, Debug, PartialEq)]
pub struct EigenSplit {
    pub basis_v_plus: QMat,
    pub basis_v_minus: QMat,
    pub basis_u_plus: QMat,
    pub basis_u_minus: QMat,
    pub a_plus: Vec<DMatrix<f64>>,
    pub a_minus: Vec<DMatrix<f64>>,
    pub d: Vec<DMatrix<f64>>,
    pub l_pp: DMatrix<f64>,
    pub l_pm: DMatrix<f64>,
    pub l_mp: DMatrix<f64>,
    pub l_mm: DMatrix<f64>,
    /// `V⁺`-coordinates of the square witness, when computed from real data.
    pub gamma_hat_plus: Option<Vec<Q>>,
    /// Some eigenspace is zero.
    pub degenerate: bool,
}

fn standard_basis(n: usize, range: std::ops::Range<usize>) -> QMat {
    let cols: Vec<Vec<Q>> = range
        .map(|k| {
            let mut e = vec![Q::zero(); n];
            e[k] = crate::exact::q(1);
            e
        })
        .collect();
    QMat::from_columns(&cols, n)
}

impl EigenSplit {
    /// A split in the standard eigenbases: `A₂ = diag(I_p, -I_q)` and
    /// `A₁ = diag(I, -I)`, given the blocks directly.
    #[allow(clippy::too_many_arguments)]
    pub fn from_blocks(
        a_plus: Vec<DMatrix<f64>>,
        a_minus: Vec<DMatrix<f64>>,
        d: Vec<DMatrix<f64>>,
        l_pp: DMatrix<f64>,
        l_pm: DMatrix<f64>,
        l_mp: DMatrix<f64>,
        l_mm: DMatrix<f64>,
    ) -> Result<Self> {
        let p = l_pp.ncols();
        let qd = l_pm.ncols();
        let fp = l_pp.nrows();
        let fm = l_mp.nrows();
        let shapes_ok = a_plus.len() == fp
            && a_minus.len() == fp
            && d.len() == fm
            && a_plus.iter().all(|a| a.shape() == (p, p))
            && a_minus.iter().all(|a| a.shape() == (qd, qd))
            && d.iter().all(|x| x.shape() == (qd, p))
            && l_pm.nrows() == fp
            && l_mm.shape() == (fm, qd)
            && l_mp.ncols() == p;
        if !shapes_ok {
            return Err(Error::InvalidRealData("block shapes are inconsistent".into()));
        }
        for a in a_plus.iter().chain(&a_minus) {
            if (a + a.transpose()).amax() > 0.0 {
                return Err(Error::InvalidRealData("A+ and A- blocks must be alternating".into()));
            }
        }
        let n = p + qd;
        let f = fp + fm;
        Ok(Self {
            basis_v_plus: standard_basis(n, 0..p),
            basis_v_minus: standard_basis(n, p..n),
            basis_u_plus: standard_basis(f, 0..fp),
            basis_u_minus: standard_basis(f, fp..f),
            a_plus,
            a_minus,
            d,
            l_pp,
            l_pm,
            l_mp,
            l_mm,
            gamma_hat_plus: None,
            degenerate: p == 0 || qd == 0 || fp == 0 || fm == 0,
        })
    }

    pub fn dims(&self) -> (usize, usize, usize, usize) {
        (self.basis_v_plus.ncols(), self.basis_v_minus.ncols(), self.basis_u_plus.ncols(), self.basis_u_minus.ncols())
    }

    /// `[V⁺ | V⁻]` as a rational matrix.
    pub fn base_change(&self) -> QMat {
        self.basis_v_plus.hstack(&self.basis_v_minus)
    }

    pub fn fibre_change(&self) -> QMat {
        self.basis_u_plus.hstack(&self.basis_u_minus)
    }

    /// Components of `A` in the original coordinates, assembled from the
    /// blocks; the mixed `U⁺` blocks and the diagonal `U⁻` blocks are zero
    /// and the `V⁺ × V⁻` part of a `U⁻` component is `-Dᵀ`.
    pub fn reassemble(&self) -> Vec<DMatrix<f64>> {
        let (p, qd, fp, fm) = self.dims();
        let n = p + qd;
        let mut eigen: Vec<DMatrix<f64>> = Vec::with_capacity(fp + fm);
        for l in 0..fp {
            let mut a = DMatrix::zeros(n, n);
            a.view_mut((0, 0), (p, p)).copy_from(&self.a_plus[l]);
            a.view_mut((p, p), (qd, qd)).copy_from(&self.a_minus[l]);
            eigen.push(a);
        }
        for l in 0..fm {
            let mut a = DMatrix::zeros(n, n);
            a.view_mut((p, 0), (qd, p)).copy_from(&self.d[l]);
            a.view_mut((0, p), (p, qd)).copy_from(&(-self.d[l].transpose()));
            eigen.push(a);
        }
        let p2inv = self.base_change().inverse().expect("eigenbasis is a basis").to_f64();
        let p1 = self.fibre_change().to_f64();
        (0..fp + fm)
            .map(|k| {
                let mut acc = DMatrix::zeros(n, n);
                for (l, a) in eigen.iter().enumerate() {
                    acc += a * p1[(k, l)];
                }
                p2inv.transpose() * acc * &p2inv
            })
            .collect()
    }

    /// The effective `L` (see [`RealStructureData::effective_l`]) in the
    /// original coordinates.
    pub fn l_matrix(&self) -> DMatrix<f64> {
        let (p, qd, fp, fm) = self.dims();
        let mut l = DMatrix::zeros(fp + fm, p + qd);
        l.view_mut((0, 0), (fp, p)).copy_from(&self.l_pp);
        l.view_mut((0, p), (fp, qd)).copy_from(&self.l_pm);
        l.view_mut((fp, 0), (fm, p)).copy_from(&self.l_mp);
        l.view_mut((fp, p), (fm, qd)).copy_from(&self.l_mm);
        let p2inv = self.base_change().inverse().expect("eigenbasis is a basis").to_f64();
        self.fibre_change().to_f64() * l * p2inv
    }
}

fn eigenbasis(a: &QMat, sign: i64) -> QMat {
    let n = a.nrows();
    let shifted = a.sub(&QMat::identity(n).scale(&crate::exact::q(sign)));
    QMat::from_columns(&shifted.integer_kernel(), n)
}

fn zero_check(blocks: &[QMat], condition: &'static str) -> Result<()> {
    for b in blocks {
        if !b.is_zero() {
            return Err(Error::InconsistentSplit { condition, deviation: b.max_abs().to_string() });
        }
    }
    Ok(())
}

/// Eigenspaces of `A₂` and `A₁`, the blocks of `A` and `L`, and the `V⁺`
/// part of the square witness.
pub fn eigensplit(data: &RealStructureData, datum: &BundleDatum) -> Result<EigenSplit> {
    data.check_against(datum)?;
    let nb = datum.base_rank();
    let nf = datum.fibre_rank();
    if data.a1.mul(&data.a1) != QMat::identity(nf) || data.a2.mul(&data.a2) != QMat::identity(nb) {
        return Err(Error::InvalidRealData("A1 and A2 must be involutions".into()));
    }
    let vp = eigenbasis(&data.a2, 1);
    let vm = eigenbasis(&data.a2, -1);
    let up = eigenbasis(&data.a1, 1);
    let um = eigenbasis(&data.a1, -1);
    let (p, qd, fp, fm) = (vp.ncols(), vm.ncols(), up.ncols(), um.ncols());
    let degenerate = p == 0 || qd == 0 || fp == 0 || fm == 0;
    if degenerate {
        log::warn!("degenerate split: eigenspace dimensions V+ {p}, V- {qd}, U+ {fp}, U- {fm}");
    }
    let p2 = vp.hstack(&vm);
    let p1 = up.hstack(&um);
    let p1inv = p1.inverse().ok_or(Error::NotInvertible("fibre eigenbasis"))?;
    let comps = datum.components();
    let pulled: Vec<QMat> = comps.iter().map(|a| p2.transpose().mul(a).mul(&p2)).collect();
    let eigen: Vec<QMat> = (0..nf)
        .map(|l| {
            let mut acc = QMat::zeros(nb, nb);
            for (k, a) in pulled.iter().enumerate() {
                acc = acc.add(&a.scale(&p1inv[(l, k)]));
            }
            acc
        })
        .collect();

    let plus = &eigen[..fp];
    let minus = &eigen[fp..];
    zero_check(&plus.iter().map(|a| a.block(0, p, p, qd)).collect::<Vec<_>>(), "A+ vanishes on V+ x V-")?;
    zero_check(&minus.iter().map(|a| a.block(0, 0, p, p)).collect::<Vec<_>>(), "A- vanishes on V+ x V+")?;
    zero_check(&minus.iter().map(|a| a.block(p, p, qd, qd)).collect::<Vec<_>>(), "A- vanishes on V- x V-")?;

    let leff = data.effective_l(datum);
    let lp = p1inv.mul(&leff).mul(&p2);
    let gamma_hat = solve_gamma_hat(data, &leff, datum, &p1inv, &p2, &eigen, p)?;

    Ok(EigenSplit {
        a_plus: plus.iter().map(|a| a.block(0, 0, p, p).to_f64()).collect(),
        a_minus: plus.iter().map(|a| a.block(p, p, qd, qd).to_f64()).collect(),
        d: minus.iter().map(|a| a.block(p, 0, qd, p).to_f64()).collect(),
        l_pp: lp.block(0, 0, fp, p).to_f64(),
        l_pm: lp.block(0, p, fp, qd).to_f64(),
        l_mp: lp.block(fp, 0, fm, p).to_f64(),
        l_mm: lp.block(fp, p, fm, qd).to_f64(),
        basis_v_plus: vp,
        basis_v_minus: vm,
        basis_u_plus: up,
        basis_u_minus: um,
        gamma_hat_plus: Some(gamma_hat[..p].to_vec()),
        degenerate,
    })
}

/// Solves `L A₂ + A₁ L = -A(·, γ)` for the effective `L` in
/// eigen-coordinates with exact arithmetic; nondegeneracy forces the `V⁻`
/// part to vanish.
fn solve_gamma_hat(
    data: &RealStructureData,
    leff: &QMat,
    datum: &BundleDatum,
    p1inv: &QMat,
    p2: &QMat,
    eigen: &[QMat],
    p: usize,
) -> Result<Vec<Q>> {
    let m = leff.mul(&data.a2).add(&data.a1.mul(leff));
    let mp = p1inv.mul(&m).mul(p2);
    let mut stacked = eigen[0].clone();
    for c in &eigen[1..] {
        stacked = stacked.vstack(c);
    }
    let rhs: Vec<Q> = (0..eigen.len()).flat_map(|l| mp.row(l).into_iter().map(|v| -v)).collect();
    let gamma_hat = stacked.solve(&rhs).ok_or_else(|| Error::GammaUnsolvable("no rational solution".into()))?;
    if is_nondegenerate(datum) && gamma_hat[p..].iter().any(|x| !x.is_zero()) {
        return Err(Error::InconsistentSplit { condition: "V- part of the square witness vanishes", deviation: format!("{:?}", &gamma_hat[p..]) });
    }
    let gamma = p2.mul_vec(&gamma_hat);
    if !is_integral_vec(&gamma) {
        return Err(Error::GammaUnsolvable(format!("witness {:?} is not integral", gamma.iter().map(ToString::to_string).collect::<Vec<_>>())));
    }
    Ok(gamma_hat)
}
