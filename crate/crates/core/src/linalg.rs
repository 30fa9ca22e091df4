//! Dense matrices over a [`Scalar`], exact rank by fraction-free
//! elimination, and numeric rank / smallest singular values in double
//! precision.

use std::ops::Mul;

use nalgebra::{Cholesky, DMatrix, DVector};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::scalar::{GaussRational, Scalar};

/// Singular values below `KERNEL_REL_TOL * sigma_max` count as zero.
pub const KERNEL_REL_TOL: f64 = 1e-8;
/// Minimum ratio between the smallest retained and largest discarded
/// singular value for a numeric rank to be trusted.
pub const GAP_RATIO: f64 = 10.0;

#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> Matrix<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![S::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, S::one());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    /// Build from columns of equal length `rows`.
    pub fn from_columns(rows: usize, columns: &[Vec<S>]) -> Self {
        let cols = columns.len();
        Self::from_fn(rows, cols, |i, j| columns[j][i].clone())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &S {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: S) {
        self.data[i * self.cols + j] = v;
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &S)> {
        let cols = self.cols;
        self.data
            .iter()
            .enumerate()
            .map(move |(k, v)| (k / cols.max(1), k % cols.max(1), v))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Scalar::is_zero)
    }

    pub fn nonzero_count(&self) -> usize {
        self.data.iter().filter(|v| !v.is_zero()).count()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(Scalar::abs_f64).fold(0.0, f64::max)
    }

    pub fn conj_transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn scale(&self, c: &S) -> Self {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| c.clone() * v.clone()).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-S::one()))
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let v = out.get(i, j).clone() + a.clone() * b.clone();
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn apply(&self, v: &[S]) -> Vec<S> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                (0..self.cols).fold(S::zero(), |acc, j| acc + self.get(i, j).clone() * v[j].clone())
            })
            .collect()
    }

    /// Stack `self` on top of `other`.
    pub fn vstack(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.cols);
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        Matrix {
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn hstack(&self, other: &Self) -> Self {
        assert_eq!(self.rows, other.rows);
        Self::from_fn(self.rows, self.cols + other.cols, |i, j| {
            if j < self.cols {
                self.get(i, j).clone()
            } else {
                other.get(i, j - self.cols).clone()
            }
        })
    }

    /// Copy `block` into `self` with its top-left corner at `(r0, c0)`.
    pub fn insert(&mut self, r0: usize, c0: usize, block: &Self) {
        for i in 0..block.rows {
            for j in 0..block.cols {
                self.set(r0 + i, c0 + j, block.get(i, j).clone());
            }
        }
    }

    pub fn to_dmatrix(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j).to_c64())
    }

    pub fn rank(&self) -> RankInfo {
        S::rank(self)
    }
}

impl<S: Scalar> Mul for &Matrix<S> {
    type Output = Matrix<S>;
    fn mul(self, rhs: Self) -> Matrix<S> {
        self.matmul(rhs)
    }
}

/// Outcome of a rank computation. Exact ranks carry no gap.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RankInfo {
    pub rank: usize,
    /// Ratio between the smallest singular value counted as nonzero and the
    /// largest counted as zero (numeric mode only).
    pub gap: Option<f64>,
    pub indeterminate: bool,
}

impl RankInfo {
    pub fn exact(rank: usize) -> Self {
        RankInfo {
            rank,
            gap: None,
            indeterminate: false,
        }
    }

    pub fn checked(self) -> crate::Result<usize> {
        if self.indeterminate {
            Err(crate::Error::Indeterminate {
                gap: self.gap.unwrap_or(0.0),
            })
        } else {
            Ok(self.rank)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct GaussInt {
    re: BigInt,
    im: BigInt,
}

impl GaussInt {
    fn zero() -> Self {
        GaussInt {
            re: BigInt::zero(),
            im: BigInt::zero(),
        }
    }

    fn one() -> Self {
        GaussInt {
            re: BigInt::one(),
            im: BigInt::zero(),
        }
    }

    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    fn mul(&self, o: &Self) -> Self {
        GaussInt {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }

    fn sub(&self, o: &Self) -> Self {
        GaussInt {
            re: &self.re - &o.re,
            im: &self.im - &o.im,
        }
    }

    /// `self / d` when the quotient lies in ℤ[i].
    fn div_exact(&self, d: &Self) -> Option<Self> {
        let norm = &d.re * &d.re + &d.im * &d.im;
        if norm.is_zero() {
            return None;
        }
        // self * conj(d)
        let re = &self.re * &d.re + &self.im * &d.im;
        let im = &self.im * &d.re - &self.re * &d.im;
        let (qr, rr) = re.div_rem(&norm);
        let (qi, ri) = im.div_rem(&norm);
        (rr.is_zero() && ri.is_zero()).then_some(GaussInt { re: qr, im: qi })
    }
}

/// Scale each row by the lcm of its denominators to land in ℤ[i].
fn integral_rows(m: &Matrix<GaussRational>) -> Vec<Vec<GaussInt>> {
    (0..m.rows())
        .map(|i| {
            let lcm = (0..m.cols()).fold(BigInt::one(), |acc, j| {
                let v = m.get(i, j);
                acc.lcm(v.re.denom()).lcm(v.im.denom())
            });
            (0..m.cols())
                .map(|j| {
                    let v = m.get(i, j);
                    GaussInt {
                        re: (v.re.numer() * &lcm) / v.re.denom(),
                        im: (v.im.numer() * &lcm) / v.im.denom(),
                    }
                })
                .collect()
        })
        .collect()
}

/// Rank over ℚ(i) by fraction-free (Bareiss) elimination over ℤ[i].
///
/// Pivot choice is deterministic: the first row (from the current pivot row
/// down) with a nonzero entry in the current column.
pub fn bareiss_rank(m: &Matrix<GaussRational>) -> usize {
    let rows = m.rows();
    let cols = m.cols();
    let mut a = integral_rows(m);
    let mut prev = GaussInt::one();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        let pivot = a[r][c].clone();
        for i in r + 1..rows {
            let factor = a[i][c].clone();
            for j in c + 1..cols {
                let num = pivot.mul(&a[i][j]).sub(&factor.mul(&a[r][j]));
                a[i][j] = num
                    .div_exact(&prev)
                    .expect("fraction-free elimination step must divide exactly");
            }
            a[i][c] = GaussInt::zero();
        }
        prev = pivot;
        r += 1;
    }
    r
}

/// Numeric rank with the spectral-gap rule: singular values below
/// `KERNEL_REL_TOL * sigma_max` are zero, and the split is flagged
/// indeterminate when the gap across the threshold is under [`GAP_RATIO`].
pub fn numeric_rank(m: &DMatrix<Complex64>) -> RankInfo {
    let sv = singular_values(m);
    classify_singular_values(&sv)
}

pub fn singular_values(m: &DMatrix<Complex64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut sv: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

pub fn classify_singular_values(sv: &[f64]) -> RankInfo {
    let sigma_max = sv.iter().copied().fold(0.0, f64::max);
    if sigma_max == 0.0 {
        return RankInfo {
            rank: 0,
            gap: None,
            indeterminate: false,
        };
    }
    let threshold = KERNEL_REL_TOL * sigma_max;
    let above = sv.iter().copied().filter(|&s| s >= threshold).fold(f64::INFINITY, f64::min);
    let below = sv.iter().copied().filter(|&s| s < threshold).fold(0.0, f64::max);
    let rank = sv.iter().filter(|&&s| s >= threshold).count();
    let gap = if below > 0.0 {
        above / below
    } else {
        above / threshold
    };
    RankInfo {
        rank,
        gap: Some(gap),
        indeterminate: gap < GAP_RATIO,
    }
}

/// Smallest eigenvalue of `A^H A` for `A: k -> m`, i.e. the square of the
/// smallest singular value of `A` on its domain (zero when `A` has a kernel).
///
/// Inverse power iteration on the Hermitian matrix with a fixed-seed start
/// vector; stops at relative change `1e-10`. Returns `None` for an empty
/// domain.
pub fn sigma_min_inverse_iteration(a: &DMatrix<Complex64>) -> Option<f64> {
    let k = a.ncols();
    if k == 0 {
        return None;
    }
    if a.nrows() < k {
        return Some(0.0);
    }
    let h = a.adjoint() * a;
    let scale = h.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Some(0.0);
    }
    let Some(chol) = Cholesky::new(h.clone()) else {
        return Some(0.0);
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut x = DVector::from_fn(k, |_, _| {
        Complex64::new(1.0 + rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5))
    });
    x /= Complex64::new(x.norm(), 0.0);
    let mut lambda = f64::INFINITY;
    for _ in 0..5000 {
        let y = chol.solve(&x);
        let ny = y.norm();
        if !ny.is_finite() || ny == 0.0 {
            return Some(0.0);
        }
        let next = y / Complex64::new(ny, 0.0);
        let hx = &h * &next;
        let rayleigh = next.dotc(&hx).re.max(0.0);
        let converged = (rayleigh - lambda).abs() <= 1e-10 * rayleigh.max(f64::MIN_POSITIVE);
        lambda = rayleigh;
        x = next;
        if converged {
            break;
        }
    }
    // Relative to machine precision of the Gram matrix, anything smaller is zero.
    if lambda <= f64::EPSILON * scale * 10.0 {
        return Some(0.0);
    }
    Some(lambda.sqrt())
}
