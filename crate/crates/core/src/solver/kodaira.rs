use num_traits::{Signed, Zero};

use super::chart::Chart;
use super::system::{qf, ConstraintSystem};
use super::CaseInfo;
use crate::exact::q_to_f64;

/// Case analysis for `m = d = 1`: `L⁺₊b₂ + b₁L⁻₋ = 0` and `L⁺₋/b₂ = b₁L⁻₊`.
pub fn analyze_kodaira(sys: &ConstraintSystem) -> (CaseInfo, Option<Chart>) {
    let lpp = qf(sys.l_pp[0]);
    let lpm = qf(sys.l_pm[0]);
    let lmp = qf(sys.l_mp[0]);
    let lmm = qf(sys.l_mm[0]);
    let mut info = CaseInfo::new("kodaira");
    if sys.l_is_zero() {
        info.subcase = Some("quadrant".into());
        return (info, Some(Chart::Open));
    }
    if !lmm.is_zero() {
        // b₁ = k·b₂ with k = -L⁺₊/L⁻₋
        let k = -(&lpp / &lmm);
        info.constant("k", &k);
        if !k.is_positive() {
            return (info.empty("b1 = k b2 with k <= 0"), None);
        }
        if lmp.is_zero() {
            if !lpm.is_zero() {
                return (info.empty("L+- != 0 while L-+ = 0"), None);
            }
            info.subcase = Some("ray".into());
            return (info, Some(Chart::KodairaCurve { k: q_to_f64(&k), power: 1 }));
        }
        let sq = -(&lpm * &lmm) / (&lpp * &lmp);
        info.constant("b2_squared", &sq);
        if !sq.is_positive() {
            return (info.empty("no positive root for b2"), None);
        }
        let b2 = q_to_f64(&sq).sqrt();
        info.subcase = Some("point".into());
        return (info, Some(Chart::Point(vec![q_to_f64(&k) * b2, b2])));
    }
    if !lpp.is_zero() {
        return (info.empty("L+_+ b2 = 0 with L+_+ != 0"), None);
    }
    if lmp.is_zero() {
        return (info.empty("L+- / b2 = 0 with L+- != 0"), None);
    }
    let c = &lpm / &lmp;
    info.constant("b1b2", &c);
    if !c.is_positive() {
        return (info.empty("b1 b2 = c with c <= 0"), None);
    }
    info.subcase = Some("hyperbola".into());
    (info, Some(Chart::KodairaCurve { k: q_to_f64(&c), power: -1 }))
}
