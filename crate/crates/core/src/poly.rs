//! Univariate rational polynomials and Sturm-sequence root counting.

use num_traits::{Signed, Zero};

use crate::exact::Q;

/// Coefficients in increasing degree, trailing zeros trimmed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly(Vec<Q>);

impl Poly {
    pub fn new(mut coeffs: Vec<Q>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Poly(coeffs)
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&Q> {
        self.0.last()
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * Q::from_integer((k as i64).into()))
                .collect(),
        )
    }

    pub fn eval(&self, x: &Q) -> Q {
        self.0.iter().rev().fold(Q::zero(), |acc, c| acc * x + c)
    }

    /// Remainder of Euclidean division by a nonzero divisor.
    pub fn rem(&self, divisor: &Poly) -> Poly {
        let dd = divisor.degree().expect("division by zero polynomial");
        let lead = divisor.leading().unwrap().clone();
        let mut r = self.0.clone();
        while r.len() > dd {
            let top = r.len() - 1;
            let f = &r[top] / &lead;
            let shift = top - dd;
            for (k, c) in divisor.0.iter().enumerate() {
                let v = &f * c;
                r[shift + k] -= v;
            }
            r.pop();
            while r.last().is_some_and(Zero::is_zero) {
                r.pop();
            }
        }
        Poly::new(r)
    }

    /// Sturm chain `p, p', -rem(p, p'), ...`.
    pub fn sturm_chain(&self) -> Vec<Poly> {
        let mut chain = vec![self.clone()];
        if self.is_zero() {
            return chain;
        }
        let mut next = self.derivative();
        while !next.is_zero() {
            let r = chain.last().unwrap().rem(&next);
            chain.push(next);
            next = Poly::new(r.0.into_iter().map(|c| -c).collect());
        }
        chain
    }

    /// Number of distinct real roots of a nonzero polynomial.
    pub fn count_real_roots(&self) -> usize {
        assert!(!self.is_zero(), "zero polynomial has infinitely many roots");
        let chain = self.sturm_chain();
        let at_neg_inf = sign_changes(chain.iter().map(|p| {
            let lead = p.leading().unwrap().signum();
            if p.degree().unwrap() % 2 == 1 {
                -lead
            } else {
                lead
            }
        }));
        let at_pos_inf = sign_changes(chain.iter().map(|p| p.leading().unwrap().signum()));
        at_neg_inf - at_pos_inf
    }
}

fn sign_changes(signs: impl Iterator<Item = Q>) -> usize {
    let mut last: Option<bool> = None;
    let mut changes = 0;
    for s in signs {
        if s.is_zero() {
            continue;
        }
        let pos = s.is_positive();
        if last.is_some_and(|l| l != pos) {
            changes += 1;
        }
        last = Some(pos);
    }
    changes
}

/// Lagrange interpolation through `(x_i, y_i)` with distinct nodes.
pub fn interpolate(xs: &[Q], ys: &[Q]) -> Poly {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    let mut acc = vec![Q::zero(); n];
    for i in 0..n {
        // basis polynomial prod_{j != i} (x - x_j) / (x_i - x_j)
        let mut basis = vec![Q::from_integer(1.into())];
        let mut denom = Q::from_integer(1.into());
        for j in 0..n {
            if j == i {
                continue;
            }
            let mut next = vec![Q::zero(); basis.len() + 1];
            for (k, c) in basis.iter().enumerate() {
                next[k + 1] += c;
                next[k] -= c * &xs[j];
            }
            basis = next;
            denom *= &xs[i] - &xs[j];
        }
        let f = &ys[i] / denom;
        for (k, c) in basis.iter().enumerate() {
            acc[k] += c * &f;
        }
    }
    Poly::new(acc)
}
