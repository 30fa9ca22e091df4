//! Seeded random generators for exact and numeric forms, shared by property
//! tests, the acceptance suite and the benches.

use rand::Rng;

use crate::exterior::{basis, InvariantForm, OneForm01};
use crate::scalar::{GaussRational, Scalar};
use crate::Complex64;

/// Gaussian rational with numerators in `-range..=range` and denominators in
/// `1..=4`.
pub fn gauss_rational<R: Rng>(rng: &mut R, range: i64) -> GaussRational {
    GaussRational::from_parts(
        rng.random_range(-range..=range),
        rng.random_range(1..=4),
        rng.random_range(-range..=range),
        rng.random_range(1..=4),
    )
}

pub fn complex<R: Rng>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

/// Random homogeneous `(p, q)`-form; each basis monomial is present with
/// probability one half.
pub fn form_pq<S: Scalar, R: Rng>(
    rng: &mut R,
    n: usize,
    p: usize,
    q: usize,
    mut coeff: impl FnMut(&mut R) -> S,
) -> InvariantForm<S> {
    let mut f = InvariantForm::zero(n);
    for m in basis(n, p, q) {
        if rng.random_bool(0.5) {
            f.add_term(m, coeff(rng));
        }
    }
    f
}

pub fn one_form01<S: Scalar, R: Rng>(rng: &mut R, n: usize, mut coeff: impl FnMut(&mut R) -> S) -> OneForm01<S> {
    OneForm01::new((0..n).map(|_| coeff(rng)).collect())
}

/// Random bidegree with `p, q ≤ n`.
pub fn bidegree<R: Rng>(rng: &mut R, n: usize) -> (usize, usize) {
    (rng.random_range(0..=n), rng.random_range(0..=n))
}
