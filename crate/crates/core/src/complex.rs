//! Complex structures on the base and fibre lattices, the integrability
//! residual, and the decomposition of the alternating form into its
//! holomorphic and hermitian parts.
//!
//! Convention: for a real `J` with `J² = -I` the subspace `V` is spanned by
//! the vectors `x - iJx`, on which the complexified `J` acts by `+i`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::BundleDatum;

pub type C = Complex64;

pub const STRUCTURE_TOL: f64 = 1e-12;
pub const RIEMANN_TOL: f64 = 1e-9;
pub const AGREEMENT_TOL: f64 = 1e-10;

/// `(J₁, J₂)` on `Λ ⊗ ℝ` and `Γ ⊗ ℝ`.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexStructurePair {
    pub j1: DMatrix<f64>,
    pub j2: DMatrix<f64>,
    pub orientation_ok: bool,
}

impl ComplexStructurePair {
    pub fn new(j1: DMatrix<f64>, j2: DMatrix<f64>) -> Result<Self> {
        check_structure(&j1, "J1")?;
        check_structure(&j2, "J2")?;
        let orientation_ok = orientation_sign(&j1) > 0.0 && orientation_sign(&j2) > 0.0;
        Ok(Self { j1, j2, orientation_ok })
    }

    pub fn fibre_dim(&self) -> usize {
        self.j1.nrows() / 2
    }

    pub fn base_dim(&self) -> usize {
        self.j2.nrows() / 2
    }
}

/// Max-norm of `J² + I`.
pub fn square_defect(j: &DMatrix<f64>) -> f64 {
    let n = j.nrows();
    (j * j + DMatrix::identity(n, n)).amax()
}

fn check_structure(j: &DMatrix<f64>, which: &'static str) -> Result<()> {
    if j.nrows() != j.ncols() || j.nrows() % 2 == 1 || j.nrows() == 0 {
        return Err(Error::Dimension { what: "complex structure", expected: j.nrows() + j.nrows() % 2, found: j.ncols() });
    }
    let residual = square_defect(j);
    if residual > STRUCTURE_TOL * (1.0 + j.amax() * j.amax()) {
        return Err(Error::NotComplexStructure { which, residual });
    }
    Ok(())
}

/// Standard basis indices `j₁ < j₂ < …` such that `x_j - iJx_j` form a basis of `V`.
fn pivot_columns(j: &DMatrix<f64>) -> Vec<usize> {
    let n = j.nrows();
    let mut chosen: Vec<usize> = Vec::new();
    let mut real_span = DMatrix::<f64>::zeros(n, 0);
    for k in 0..n {
        if chosen.len() == n / 2 {
            break;
        }
        // x - iJx is independent over ℂ of the chosen ones exactly when the
        // real span of {x, Jx} grows by two
        let cand = real_span.clone().insert_columns(real_span.ncols(), 2, 0.0);
        let mut cand = cand;
        let c = cand.ncols();
        cand.set_column(c - 2, &unit(n, k));
        cand.set_column(c - 1, &j.column(k).into_owned());
        if rank(&cand) == c {
            chosen.push(k);
            real_span = cand;
        }
    }
    chosen
}

fn unit(n: usize, k: usize) -> DVector<f64> {
    let mut e = DVector::zeros(n);
    e[k] = 1.0;
    e
}

fn rank(m: &DMatrix<f64>) -> usize {
    let svd = m.clone().svd(false, false);
    let top = svd.singular_values.max();
    svd.singular_values.iter().filter(|&&s| s > 1e-9 * top.max(1.0)).count()
}

/// Sign of `det(x_{j₁}, Jx_{j₁}, …)` over the pivot set; `+1` for the
/// standard orientation.
pub fn orientation_sign(j: &DMatrix<f64>) -> f64 {
    let n = j.nrows();
    let piv = pivot_columns(j);
    let mut frame = DMatrix::zeros(n, n);
    for (slot, &k) in piv.iter().enumerate() {
        frame.set_column(2 * slot, &unit(n, k));
        frame.set_column(2 * slot + 1, &j.column(k).into_owned());
    }
    frame.determinant().signum()
}

/// Basis columns `x_j - iJx_j` of `V`.
pub fn hodge_subspace(j: &DMatrix<f64>) -> Result<DMatrix<C>> {
    check_structure(j, "J")?;
    let n = j.nrows();
    let piv = pivot_columns(j);
    Ok(DMatrix::from_fn(n, piv.len(), |r, c| {
        let k = piv[c];
        let e = if r == k { 1.0 } else { 0.0 };
        C::new(e, -j[(r, k)])
    }))
}

/// Splitting `W ⊗ ℂ = V ⊕ V̄` with coordinates in the `hodge_subspace` basis.
///
/// The `V`-part of `w` is `(w - iJw)/2`; its coordinates come from a QR
/// factorization of the basis rather than a solve against `[V | V̄]`.
#[derive(Clone, Debug)]
pub struct Projector {
    basis: DMatrix<C>,
    q: DMatrix<C>,
    r: DMatrix<C>,
    j: DMatrix<C>,
}

impl Projector {
    pub fn new(j: &DMatrix<f64>) -> Result<Self> {
        let basis = hodge_subspace(j)?;
        let qr = basis.clone().qr();
        Ok(Self { basis, q: qr.q(), r: qr.r(), j: j.map(|x| C::new(x, 0.0)) })
    }

    pub fn basis(&self) -> &DMatrix<C> {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    fn solve(&self, p: &DVector<C>) -> DVector<C> {
        self.r.solve_upper_triangular(&self.q.ad_mul(p)).expect("hodge columns are independent")
    }

    /// `V`-coordinates and `V̄`-coordinates of `w`.
    pub fn split(&self, w: &DVector<C>) -> (DVector<C>, DVector<C>) {
        let conj = |v: &DVector<C>| v.map(|z| z.conj());
        (self.coords(w), conj(&self.coords(&conj(w))))
    }

    pub fn coords(&self, w: &DVector<C>) -> DVector<C> {
        let jw = (&self.j * w) * C::new(0.0, 0.5);
        self.solve(&(w * C::new(0.5, 0.0) - jw))
    }

    pub fn coords_real(&self, x: &[f64]) -> DVector<C> {
        self.coords(&DVector::from_iterator(x.len(), x.iter().map(|&v| C::new(v, 0.0))))
    }

    pub fn embed(&self, c: &DVector<C>) -> DVector<C> {
        &self.basis * c
    }

    /// The real vector whose projection has coordinates `c`, i.e. `2 Re(P c)`.
    pub fn real_preimage(&self, c: &DVector<C>) -> DVector<f64> {
        self.embed(c).map(|z| 2.0 * z.re)
    }
}

/// `A_k(x, y)` for complex vectors, summed over `a < b` so that
/// `alt_eval(a, x, y) == -alt_eval(a, y, x)` holds bit for bit.
pub fn alt_eval(a: &DMatrix<f64>, x: &DVector<C>, y: &DVector<C>) -> C {
    let n = a.nrows();
    let mut acc = C::new(0.0, 0.0);
    for i in 0..n {
        for j in i + 1..n {
            let w = a[(i, j)];
            if w != 0.0 {
                acc += (x[i] * y[j] - x[j] * y[i]) * w;
            }
        }
    }
    acc
}

fn form_vector(comps: &[DMatrix<f64>], x: &DVector<C>, y: &DVector<C>) -> DVector<C> {
    DVector::from_iterator(comps.len(), comps.iter().map(|a| alt_eval(a, x, y)))
}

fn real_form_vector(comps: &[DMatrix<f64>], x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
    DVector::from_iterator(comps.len(), comps.iter().map(|a| (x.transpose() * a * y)[(0, 0)]))
}

/// The two computations of the integrability defect.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RiemannResidual {
    /// Component of `A` in `Λ²(V̄)∨ ⊗ U`, mapped back to real coordinates.
    pub extraction: f64,
    /// Max-norm of `A(x,J₂y) + A(J₂x,y) - J₁A(x,y) + J₁A(J₂x,J₂y)`.
    pub identity: f64,
    /// Largest entrywise difference between the two residual tensors.
    pub disagreement: f64,
}

impl RiemannResidual {
    pub fn value(&self) -> f64 {
        self.extraction.max(self.identity)
    }
}

fn check_pair(datum: &BundleDatum, pair: &ComplexStructurePair) -> Result<()> {
    if pair.j2.nrows() != datum.base_rank() {
        return Err(Error::Dimension { what: "J2", expected: datum.base_rank(), found: pair.j2.nrows() });
    }
    if pair.j1.nrows() != datum.fibre_rank() {
        return Err(Error::Dimension { what: "J1", expected: datum.fibre_rank(), found: pair.j1.nrows() });
    }
    check_structure(&pair.j1, "J1")?;
    check_structure(&pair.j2, "J2")
}

/// Both formulations evaluated on every pair of standard basis vectors.
///
/// For real `x, y` the `U`-coordinates of `A(x̄', ȳ')` with `x' = x - iJ₂x`
/// determine `z = Re` of the `U`-part; the identity residual equals `-2J₁z`.
pub fn riemann_residuals(datum: &BundleDatum, pair: &ComplexStructurePair) -> Result<RiemannResidual> {
    check_pair(datum, pair)?;
    let comps = datum.components_f64();
    let n = datum.base_rank();
    let pu = Projector::new(&pair.j1)?;
    let j1 = &pair.j1;
    let j2 = &pair.j2;
    let mut out = RiemannResidual { extraction: 0.0, identity: 0.0, disagreement: 0.0 };
    for a in 0..n {
        for b in a + 1..n {
            let x = unit(n, a);
            let y = unit(n, b);
            let jx = j2 * &x;
            let jy = j2 * &y;
            let p = real_form_vector(&comps, &x, &y) - real_form_vector(&comps, &jx, &jy);
            let q = real_form_vector(&comps, &x, &jy) + real_form_vector(&comps, &jx, &y);
            let identity = &q - j1 * &p;

            let xbar = DVector::from_fn(n, |i, _| C::new(x[i], jx[i]));
            let ybar = DVector::from_fn(n, |i, _| C::new(y[i], jy[i]));
            let w = form_vector(&comps, &xbar, &ybar);
            let z = pu.embed(&pu.coords(&w)).map(|c| c.re);
            let extraction = -2.0 * (j1 * z);

            out.identity = out.identity.max(identity.amax());
            out.extraction = out.extraction.max(extraction.amax());
            out.disagreement = out.disagreement.max((identity - extraction).amax());
        }
    }
    Ok(out)
}

/// Integrability defect: zero exactly when `(V, U)` satisfies the first
/// Riemann relation.
pub fn riemann_residual(datum: &BundleDatum, pair: &ComplexStructurePair) -> Result<f64> {
    let r = riemann_residuals(datum, pair)?;
    let scale = 1.0 + r.value();
    if r.disagreement > AGREEMENT_TOL * scale {
        log::warn!("residual formulations disagree by {:e}", r.disagreement);
    }
    Ok(r.value())
}

/// `B'` and `B''` in the bases returned by [`hodge_subspace`].
///
/// `b_prime[k][(i, j)]` is the `k`-th `U`-coordinate of `A(v_i, v_j)`,
/// `b_doubleprime[k][(i, j)]` that of `A(v_i, v̄_j)`, and
/// `b_doubleprime_bar_first[k][(j, i)]` that of `A(v̄_j, v_i)`.
#[derive(Clone, Debug)]
pub struct HodgeDecomposition {
    pub m: usize,
    pub d: usize,
    pub base: Projector,
    pub fibre: Projector,
    pub b_prime: Vec<DMatrix<C>>,
    pub b_doubleprime: Vec<DMatrix<C>>,
    pub b_doubleprime_bar_first: Vec<DMatrix<C>>,
}

impl HodgeDecomposition {
    /// `B'(α, β)` for `V`-coordinates `α, β`.
    pub fn b_prime_eval(&self, alpha: &DVector<C>, beta: &DVector<C>) -> DVector<C> {
        DVector::from_iterator(self.d, self.b_prime.iter().map(|b| (alpha.transpose() * b * beta)[(0, 0)]))
    }

    /// `B''(α, β̄)`: the second slot is the conjugate of the vector with
    /// `V`-coordinates `β`.
    pub fn b_doubleprime_eval(&self, alpha: &DVector<C>, beta: &DVector<C>) -> DVector<C> {
        let bc = beta.map(|z| z.conj());
        DVector::from_iterator(self.d, self.b_doubleprime.iter().map(|b| (alpha.transpose() * b * &bc)[(0, 0)]))
    }

    pub fn b_doubleprime_norm(&self) -> f64 {
        self.b_doubleprime.iter().map(|b| b.iter().map(|z| z.norm()).fold(0.0, f64::max)).fold(0.0, f64::max)
    }

    /// Real components of `B' + B'' + conj(B') + conj(B'')` on the standard basis.
    pub fn reconstruct(&self) -> Vec<DMatrix<f64>> {
        let n = 2 * self.m;
        let coords: Vec<DVector<C>> = (0..n).map(|a| self.base.coords_real(unit(n, a).as_slice())).collect();
        let mut out = vec![DMatrix::zeros(n, n); 2 * self.d];
        for a in 0..n {
            for b in 0..n {
                let (al, be) = (&coords[a], &coords[b]);
                let u = self.b_prime_eval(al, be) + self.b_doubleprime_eval(al, be) - self.b_doubleprime_eval(be, al);
                let y = self.fibre.real_preimage(&u);
                for (k, comp) in out.iter_mut().enumerate() {
                    comp[(a, b)] = y[k];
                }
            }
        }
        out
    }
}

/// Largest entry of the reconstruction error divided by `max(1, ‖A‖)`.
pub fn reconstruction_error(datum: &BundleDatum, dec: &HodgeDecomposition) -> f64 {
    let orig = datum.components_f64();
    let scale = orig.iter().map(|a| a.amax()).fold(1.0, f64::max);
    dec.reconstruct().iter().zip(&orig).map(|(r, a)| (r - a).amax()).fold(0.0, f64::max) / scale
}

pub fn decompose(datum: &BundleDatum, pair: &ComplexStructurePair) -> Result<HodgeDecomposition> {
    let residual = riemann_residual(datum, pair)?;
    let scale = datum.components_f64().iter().map(|a| a.amax()).fold(1.0, f64::max);
    if residual > RIEMANN_TOL * scale {
        return Err(Error::RiemannViolated { residual });
    }
    let base = Projector::new(&pair.j2)?;
    let fibre = Projector::new(&pair.j1)?;
    let comps = datum.components_f64();
    let m = datum.m();
    let d = datum.d();
    let v: Vec<DVector<C>> = (0..m).map(|i| base.basis().column(i).into_owned()).collect();
    let vb: Vec<DVector<C>> = v.iter().map(|c| c.map(|z| z.conj())).collect();
    let mut b_prime = vec![DMatrix::zeros(m, m); d];
    let mut b_dp = vec![DMatrix::zeros(m, m); d];
    let mut b_dp_rev = vec![DMatrix::zeros(m, m); d];
    for i in 0..m {
        for j in 0..m {
            let p = fibre.coords(&form_vector(&comps, &v[i], &v[j]));
            let h = fibre.coords(&form_vector(&comps, &v[i], &vb[j]));
            let hr = fibre.coords(&form_vector(&comps, &vb[j], &v[i]));
            for k in 0..d {
                b_prime[k][(i, j)] = p[k];
                b_dp[k][(i, j)] = h[k];
                b_dp_rev[k][(j, i)] = hr[k];
            }
        }
    }
    Ok(HodgeDecomposition { m, d, base, fibre, b_prime, b_doubleprime: b_dp, b_doubleprime_bar_first: b_dp_rev })
}

pub fn is_parallelizable(dec: &HodgeDecomposition, tol: f64) -> bool {
    dec.b_doubleprime_norm() <= tol
}

/// Singular points of the family occur only for `m ≥ 3`, where `B'' = 0`.
pub fn is_singular_point(datum: &BundleDatum, dec: &HodgeDecomposition, tol: f64) -> Result<bool> {
    if datum.d() != 1 {
        return Err(Error::RequiresFibreDimensionOne { d: datum.d() });
    }
    Ok(datum.m() >= 3 && is_parallelizable(dec, tol))
}

/// `F_γ(v) = B'(v, p) + 2B''(v, p̄) + B''(p, p̄)` with `p = p_V(γ)`, in `U`-coordinates.
pub fn cocycle_f(dec: &HodgeDecomposition, v: &DVector<C>, gamma: &[i64]) -> Result<DVector<C>> {
    if v.len() != dec.m {
        return Err(Error::Dimension { what: "v", expected: dec.m, found: v.len() });
    }
    if gamma.len() != 2 * dec.m {
        return Err(Error::Dimension { what: "gamma", expected: 2 * dec.m, found: gamma.len() });
    }
    let g: Vec<f64> = gamma.iter().map(|&x| x as f64).collect();
    let p = dec.base.coords_real(&g);
    Ok(dec.b_prime_eval(v, &p) + dec.b_doubleprime_eval(v, &p) * C::new(2.0, 0.0) + dec.b_doubleprime_eval(&p, &p))
}

/// Whether `U`-coordinates `c` lie in `p_U(Λ)` within `tol`; returns the
/// rounded lattice vector when they do.
pub fn fibre_lattice_preimage(dec: &HodgeDecomposition, c: &DVector<C>, tol: f64) -> Option<Vec<i64>> {
    round_if_integral(dec.fibre.real_preimage(c).as_slice(), tol)
}

pub(crate) fn round_if_integral(y: &[f64], tol: f64) -> Option<Vec<i64>> {
    y.iter()
        .map(|&v| {
            let r = v.round();
            ((v - r).abs() <= tol).then_some(r as i64)
        })
        .collect()
}

/// A point of the complete family: a pair satisfying the relation together
/// with a class `φ ∈ V̄∨ ⊗ U` (a `d × m` matrix, zero by default).
#[derive(Clone, Debug)]
pub struct AppellHumbertPoint {
    pub structure: ComplexStructurePair,
    pub phi: DMatrix<C>,
}

impl AppellHumbertPoint {
    pub fn new(datum: &BundleDatum, structure: ComplexStructurePair, phi: Option<DMatrix<C>>) -> Result<Self> {
        let residual = riemann_residual(datum, &structure)?;
        if residual > RIEMANN_TOL {
            return Err(Error::RiemannViolated { residual });
        }
        let phi = phi.unwrap_or_else(|| DMatrix::zeros(datum.d(), datum.m()));
        if phi.nrows() != datum.d() || phi.ncols() != datum.m() {
            return Err(Error::Dimension { what: "phi", expected: datum.d(), found: phi.nrows() });
        }
        Ok(Self { structure, phi })
    }
}
