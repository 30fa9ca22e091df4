//! Lee form, Gauduchon condition and holomorphic scalar curvature on
//! invariant Hermitian models, and the type splitting of real 1-forms.
//!
//! The fundamental form is `ω = i Σ_k φ^k ∧ φ̄^k`, so `⟨ω, ω⟩ = n`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exterior::{basis, InvariantForm, MultiIndexPQ, OneForm01, OneForm10};
use crate::model::ValidatedModel;
use crate::scalar::{Mode, Scalar, NUMERIC_ZERO_TOL};

/// A positive real `(1,1)`-form `i Σ h_{jk} φ^j ∧ φ̄^k`.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianFundamentalForm<S> {
    omega: InvariantForm<S>,
}

fn is_zero_tol<S: Scalar>(x: &S) -> bool {
    match S::MODE {
        Mode::Exact => x.is_zero(),
        Mode::Numeric => x.abs_f64() <= NUMERIC_ZERO_TOL,
    }
}

fn is_positive_real<S: Scalar>(x: &S) -> bool {
    let z = x.to_c64();
    is_zero_tol(&x.imag_part()) && z.re > 0.0 && !is_zero_tol(x)
}

impl<S: Scalar> HermitianFundamentalForm<S> {
    /// The form of the unitary coframe.
    pub fn standard(n: usize) -> Self {
        let i = S::imag_unit();
        let omega = InvariantForm::from_terms(n, (0..n).map(|k| (MultiIndexPQ::new(&[k], &[k]), i.clone())));
        HermitianFundamentalForm { omega }
    }

    /// Accepts a real `(1,1)`-form whose coefficient matrix is positive
    /// definite.
    pub fn try_from_form(omega: InvariantForm<S>) -> Result<Self> {
        let n = omega.n();
        if !omega.is_zero() && omega.bidegree() != Some((1, 1)) {
            return Err(Error::NotPositive("not a (1,1)-form".into()));
        }
        let defect = omega.sub(&omega.conjugate())?;
        if defect.terms().values().any(|c| !is_zero_tol(c)) {
            return Err(Error::NotPositive("not a real form".into()));
        }
        // h_{jk} = −i · coefficient of φ^j ∧ φ̄^k
        let minus_i = -S::imag_unit();
        let mut h: Vec<Vec<S>> = (0..n)
            .map(|j| {
                (0..n)
                    .map(|k| minus_i.clone() * omega.coeff(&MultiIndexPQ::new(&[j], &[k])))
                    .collect()
            })
            .collect();
        // Hermitian Gaussian elimination: every pivot must be real and positive.
        for c in 0..n {
            let pivot = h[c][c].clone();
            if !is_positive_real(&pivot) {
                return Err(Error::NotPositive(format!("pivot {c} is {pivot}")));
            }
            let inv = pivot.inv().expect("nonzero pivot");
            for r in c + 1..n {
                let factor = h[r][c].clone() * inv.clone();
                for k in c..n {
                    let v = h[r][k].clone() - factor.clone() * h[c][k].clone();
                    h[r][k] = v;
                }
            }
        }
        Ok(HermitianFundamentalForm { omega })
    }

    pub fn form(&self) -> &InvariantForm<S> {
        &self.omega
    }

    pub fn n(&self) -> usize {
        self.omega.n()
    }

    /// `ω^k`, with `ω^0 = 1`.
    pub fn power(&self, k: usize) -> InvariantForm<S> {
        let mut out = InvariantForm::constant(self.n(), S::one());
        for _ in 0..k {
            out = out.wedge(&self.omega).expect("same dimension");
        }
        out
    }
}

/// `Λ`, the metric adjoint of `ω ∧ (·)`.
pub fn lefschetz_adjoint<S: Scalar>(a: &InvariantForm<S>, omega: &HermitianFundamentalForm<S>) -> Result<InvariantForm<S>> {
    omega.form().wedge_adjoint(a)
}

/// Everything computed from the fundamental form of an invariant model.
#[derive(Clone, Debug, PartialEq)]
pub struct LeeFormResult<S> {
    pub tau: OneForm10<S>,
    /// The real Lee form `τ + τ̄`.
    pub theta: InvariantForm<S>,
    pub theta_norm_sqr: S,
    /// Largest coefficient of `dω^{n−1} − (n−1) θ ∧ ω^{n−1}`.
    pub identity_residual: f64,
    pub identity_holds: bool,
    /// `∂∂̄ ω^{n−1} = 0`.
    pub gauduchon: bool,
    /// `d*θ`, a constant on invariant models.
    pub d_star_theta: S,
    /// `2(n−1) d*θ + (n−1)² |θ|²`.
    pub s_j: S,
    /// `S_J / |θ|²`, the value after rescaling the metric so that `|θ| = 1`;
    /// `None` when `θ = 0`.
    pub s_j_normalized: Option<S>,
    /// Gauduchon with `S_J > 0` forces `|θ| > 0`; `None` when the premise fails.
    pub nonvanishing_check: Option<bool>,
}

/// Lee form of the standard fundamental form.
///
/// `τ = Λ∂ω / (n − 1)`, normalized so that `dω^{n−1} = (n−1) θ ∧ ω^{n−1}`
/// holds in every dimension; the identity is then verified, not assumed.
pub fn lee_form<S: Scalar>(model: &ValidatedModel<S>, omega: &HermitianFundamentalForm<S>) -> Result<LeeFormResult<S>> {
    let n = model.n();
    if n < 2 {
        return Err(Error::DimensionTooSmall(n));
    }
    if omega.n() != n {
        return Err(Error::DimensionMismatch { left: n, right: omega.n() });
    }
    if omega.form() != HermitianFundamentalForm::standard(n).form() {
        return Err(Error::InvalidArgument(
            "only the fundamental form of the unitary coframe is supported".into(),
        ));
    }
    let w = omega.form();
    let scale = S::from_ratio(1, (n - 1) as i64);
    let tau_form = lefschetz_adjoint(&model.partial(w), omega)?.scale(&scale);
    let tau = OneForm10::from_form(&tau_form);
    let theta = tau.to_form().add(&tau.to_form().conjugate())?;

    let w_pow = omega.power(n - 1);
    let lhs = model.d(&w_pow);
    let rhs = theta.wedge(&w_pow)?.scale(&S::from_i64((n - 1) as i64));
    let residual_form = lhs.sub(&rhs)?;
    let identity_residual = residual_form.max_abs();
    let identity_holds = match S::MODE {
        Mode::Exact => residual_form.is_zero(),
        Mode::Numeric => identity_residual <= 1e-9,
    };
    let ddbar = model.partial(&model.dbar(&w_pow));
    let gauduchon = match S::MODE {
        Mode::Exact => ddbar.is_zero(),
        Mode::Numeric => ddbar.max_abs() <= 1e-9,
    };

    // d* on 1-forms: adjoint of d on functions, read off as conjugate-transpose
    // applied to the coordinate vector of θ.
    let functions = basis(n, 0, 0);
    let one_forms: Vec<MultiIndexPQ> = basis(n, 1, 0).into_iter().chain(basis(n, 0, 1)).collect();
    let d0 = crate::model::matrix_of(n, &functions, &one_forms, |f| model.d(f));
    let d_star_theta = d0.conj_transpose().apply(&theta.coords(&one_forms))[0].clone();

    let theta_norm_sqr = theta.norm_sqr();
    let nm1 = S::from_i64((n - 1) as i64);
    let s_j = S::from_i64(2) * nm1.clone() * d_star_theta.clone() + nm1.clone() * nm1 * theta_norm_sqr.clone();
    let s_j_normalized = theta_norm_sqr.inv().filter(|_| !is_zero_tol(&theta_norm_sqr)).map(|inv| s_j.clone() * inv);
    let nonvanishing_check = (gauduchon && is_positive_real(&s_j)).then(|| !is_zero_tol(&theta_norm_sqr));
    Ok(LeeFormResult {
        tau,
        theta,
        theta_norm_sqr,
        identity_residual,
        identity_holds,
        gauduchon,
        d_star_theta,
        s_j,
        s_j_normalized,
        nonvanishing_check,
    })
}

/// A real 1-form `Σ f_i dx_i + g_i dy_i` with `dz_i = dx_i + i dy_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct RealOneForm<S> {
    pub f: Vec<S>,
    pub g: Vec<S>,
}

/// Type components of a real 1-form.
#[derive(Clone, Debug, PartialEq)]
pub struct SplitOneForm<S> {
    pub part10: OneForm10<S>,
    pub part01: OneForm01<S>,
    /// Both components are nonzero whenever the form is (constant case of the
    /// pointwise statement).
    pub components_nonvanishing: bool,
}

impl<S: Scalar> RealOneForm<S> {
    pub fn new(f: Vec<S>, g: Vec<S>) -> Result<Self> {
        if f.len() != g.len() {
            return Err(Error::DimensionMismatch { left: f.len(), right: g.len() });
        }
        if f.iter().chain(&g).any(|c| !is_zero_tol(&c.imag_part())) {
            return Err(Error::InvalidArgument("real 1-form needs real coefficients".into()));
        }
        Ok(RealOneForm { f, g })
    }

    pub fn n(&self) -> usize {
        self.f.len()
    }

    /// `dx_j` (zero-based `j`).
    pub fn dx(n: usize, j: usize) -> Self {
        let mut f = vec![S::zero(); n];
        f[j] = S::one();
        RealOneForm { f, g: vec![S::zero(); n] }
    }

    /// `dy_j` (zero-based `j`).
    pub fn dy(n: usize, j: usize) -> Self {
        let mut g = vec![S::zero(); n];
        g[j] = S::one();
        RealOneForm { f: vec![S::zero(); n], g }
    }

    pub fn is_zero(&self) -> bool {
        self.f.iter().chain(&self.g).all(is_zero_tol)
    }

    /// The form in the coframe `φ^k = dz_k`.
    pub fn to_form(&self) -> InvariantForm<S> {
        let s = split_real_one_form(self);
        s.part10.to_form().add(&s.part01.to_form()).expect("same dimension")
    }
}

/// `θ^{1,0} = Σ (f_i − i g_i)/2 dz_i`, `θ^{0,1} = Σ (f_i + i g_i)/2 dz̄_i`.
pub fn split_real_one_form<S: Scalar>(theta: &RealOneForm<S>) -> SplitOneForm<S> {
    let half = S::from_ratio(1, 2);
    let i = S::imag_unit();
    let part10 = OneForm10::new(
        theta
            .f
            .iter()
            .zip(&theta.g)
            .map(|(f, g)| half.clone() * (f.clone() - i.clone() * g.clone()))
            .collect(),
    );
    let part01 = OneForm01::new(
        theta
            .f
            .iter()
            .zip(&theta.g)
            .map(|(f, g)| half.clone() * (f.clone() + i.clone() * g.clone()))
            .collect(),
    );
    let components_nonvanishing = theta.is_zero() || (!part10.is_zero() && !part01.is_zero());
    SplitOneForm {
        part10,
        part01,
        components_nonvanishing,
    }
}

/// Recovers `(f, g)` from the components: `f = θ^{1,0} + θ^{0,1}`,
/// `g = i(θ^{1,0} − θ^{0,1})`.
pub fn reconstruct_real_one_form<S: Scalar>(split: &SplitOneForm<S>) -> RealOneForm<S> {
    let i = S::imag_unit();
    let f = split
        .part10
        .coeffs
        .iter()
        .zip(&split.part01.coeffs)
        .map(|(a, b)| a.clone() + b.clone())
        .collect();
    let g = split
        .part10
        .coeffs
        .iter()
        .zip(&split.part01.coeffs)
        .map(|(a, b)| i.clone() * (a.clone() - b.clone()))
        .collect();
    RealOneForm { f, g }
}

/// On a flat model the Levi-Civita connection is trivial in the coframe, so
/// constant components are parallel. Refused on non-flat models.
pub fn parallel_components_check<S: Scalar>(model: &ValidatedModel<S>, theta: &RealOneForm<S>) -> Result<bool> {
    if !model.is_abelian() {
        return Err(Error::NotFlat(format!(
            "covariant derivatives on {} are not implemented",
            model.name()
        )));
    }
    if theta.n() != model.n() {
        return Err(Error::DimensionMismatch {
            left: model.n(),
            right: theta.n(),
        });
    }
    let split = split_real_one_form(theta);
    // Components of a constant form are constant; a trivial connection
    // annihilates them. The round trip guards the splitting itself.
    Ok(reconstruct_real_one_form(&split) == *theta)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LeeFormSummary {
    pub tau: Vec<String>,
    pub theta: String,
    pub theta_norm_sqr: String,
    pub identity_residual: f64,
    pub identity_holds: bool,
    pub gauduchon: bool,
    pub d_star_theta: String,
    pub s_j: String,
    pub s_j_normalized: Option<String>,
    pub nonvanishing_check: Option<bool>,
}

impl<S: Scalar> LeeFormResult<S> {
    pub fn summary(&self) -> LeeFormSummary {
        LeeFormSummary {
            tau: self.tau.coeffs.iter().map(ToString::to_string).collect(),
            theta: self.theta.to_string(),
            theta_norm_sqr: self.theta_norm_sqr.to_string(),
            identity_residual: self.identity_residual,
            identity_holds: self.identity_holds,
            gauduchon: self.gauduchon,
            d_star_theta: self.d_star_theta.to_string(),
            s_j: self.s_j.to_string(),
            s_j_normalized: self.s_j_normalized.as_ref().map(ToString::to_string),
            nonvanishing_check: self.nonvanishing_check,
        }
    }
}
