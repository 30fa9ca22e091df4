//! Fourier-truncated forms on the flat torus `ℝ^{2n}/ℤ^{2n}` with complex
//! coordinates `z_j = x_j + i y_j` and the unitary coframe `φ^j = dz_j`.
//!
//! A frequency is an integer vector `(kx_1..kx_n, ky_1..ky_n)` standing for
//! `e_k(x) = exp(2πi (kx·x + ky·y))`. The modes are orthonormal (total
//! volume one), so every integral of a product of finitely banded forms is
//! an exact finite sum. Derivatives act per mode:
//! `∂/∂z̄_j e_k = πi (kx_j + i ky_j) e_k` and `∂/∂z_j e_k = πi (kx_j − i ky_j) e_k`.
//!
//! Generators are indexed as in [`crate::exterior`]: `g < n` is `dz_{g+1}`
//! (dual vector `∂/∂z`), `g ≥ n` is `dz̄_{g−n+1}` (dual `∂/∂z̄`).

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exterior::{basis, InvariantForm, MultiIndexPQ};
use crate::linalg;
use crate::parallel::Execution;
use crate::scalar::parse_numeric;
use crate::Complex64;

pub type Frequency = Vec<i32>;

fn zero_frequency(n: usize) -> Frequency {
    vec![0; 2 * n]
}

fn add_modes(a: &[i32], b: &[i32]) -> Frequency {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn neg_mode(a: &[i32]) -> Frequency {
    a.iter().map(|x| -x).collect()
}

pub fn mode_band(k: &[i32]) -> usize {
    k.iter().map(|x| x.unsigned_abs() as usize).max().unwrap_or(0)
}

/// Symbol of the derivative along the dual vector of generator `g` on `e_k`.
pub fn symbol(n: usize, k: &[i32], g: usize) -> Complex64 {
    let i_pi = Complex64::new(0.0, PI);
    if g < n {
        i_pi * Complex64::new(k[g] as f64, -(k[n + g] as f64))
    } else {
        let j = g - n;
        i_pi * Complex64::new(k[j] as f64, k[n + j] as f64)
    }
}

/// All modes with `|k|_∞ ≤ cutoff`, lexicographic.
pub fn modes_in_box(n: usize, cutoff: usize) -> Vec<Frequency> {
    let c = cutoff as i32;
    let mut out = vec![Vec::with_capacity(2 * n)];
    for _ in 0..2 * n {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (-c..=c).map(move |v| {
                    let mut m = prefix.clone();
                    m.push(v);
                    m
                })
            })
            .collect();
    }
    out
}

fn c64_is_zero(z: &Complex64) -> bool {
    *z == Complex64::new(0.0, 0.0)
}

/// A trigonometric polynomial `Σ c_k e_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierFunction {
    n: usize,
    coeffs: BTreeMap<Frequency, Complex64>,
}

impl FourierFunction {
    pub fn zero(n: usize) -> Self {
        FourierFunction {
            n,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn constant(n: usize, c: Complex64) -> Self {
        Self::mode(n, zero_frequency(n), c)
    }

    pub fn mode(n: usize, k: Frequency, c: Complex64) -> Self {
        assert_eq!(k.len(), 2 * n, "mode length must be 2n");
        let mut f = Self::zero(n);
        f.add_coeff(k, c);
        f
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &BTreeMap<Frequency, Complex64> {
        &self.coeffs
    }

    pub fn coeff(&self, k: &[i32]) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or_default()
    }

    pub fn add_coeff(&mut self, k: Frequency, c: Complex64) {
        if c64_is_zero(&c) {
            return;
        }
        let v = self.coeffs.remove(&k).unwrap_or_default() + c;
        if !c64_is_zero(&v) {
            self.coeffs.insert(k, v);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn band(&self) -> usize {
        self.coeffs.keys().map(|k| mode_band(k)).max().unwrap_or(0)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, c) in &other.coeffs {
            out.add_coeff(k.clone(), *c);
        }
        out
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = Self::zero(self.n);
        for (k, v) in &self.coeffs {
            out.add_coeff(k.clone(), c * v);
        }
        out
    }

    /// Pointwise product (exact convolution of coefficients).
    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.n);
        for (k1, c1) in &self.coeffs {
            for (k2, c2) in &other.coeffs {
                out.add_coeff(add_modes(k1, k2), c1 * c2);
            }
        }
        out
    }

    /// Pointwise complex conjugate: `c_k → conj(c_{−k})`.
    pub fn conj(&self) -> Self {
        let mut out = Self::zero(self.n);
        for (k, c) in &self.coeffs {
            out.add_coeff(neg_mode(k), c.conj());
        }
        out
    }

    /// Derivative along the dual vector of generator `g`.
    pub fn derivative(&self, g: usize) -> Self {
        let mut out = Self::zero(self.n);
        for (k, c) in &self.coeffs {
            out.add_coeff(k.clone(), symbol(self.n, k, g) * c);
        }
        out
    }

    /// `∫ f`.
    pub fn integral(&self) -> Complex64 {
        self.coeff(&zero_frequency(self.n))
    }

    /// `∫ f g = Σ_k f_k g_{−k}`.
    pub fn integral_of_product(&self, other: &Self) -> Complex64 {
        self.coeffs
            .iter()
            .map(|(k, c)| c * other.coeff(&neg_mode(k)))
            .sum()
    }

    /// Value at `(x_1..x_n, y_1..y_n)`.
    pub fn eval(&self, point: &[f64]) -> Complex64 {
        self.coeffs
            .iter()
            .map(|(k, c)| {
                let phase: f64 = k.iter().zip(point).map(|(ki, xi)| *ki as f64 * xi).sum();
                c * Complex64::from_polar(1.0, 2.0 * PI * phase)
            })
            .sum()
    }

    /// `Σ |c_k|`, an upper bound for the sup norm.
    pub fn l1_norm(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).sum()
    }
}

/// A differential form with trigonometric-polynomial coefficients, stored
/// mode by mode.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierForm {
    n: usize,
    modes: BTreeMap<Frequency, InvariantForm<Complex64>>,
}

impl FourierForm {
    pub fn zero(n: usize) -> Self {
        FourierForm {
            n,
            modes: BTreeMap::new(),
        }
    }

    /// A constant form placed in mode zero.
    pub fn from_invariant(form: &InvariantForm<Complex64>) -> Self {
        let n = form.n();
        let mut out = Self::zero(n);
        out.add_mode(zero_frequency(n), form.clone());
        out
    }

    /// `f · m` for a function `f` and a basis monomial `m`.
    pub fn from_function(f: &FourierFunction, m: MultiIndexPQ) -> Self {
        let n = f.n();
        let mut out = Self::zero(n);
        for (k, c) in f.coeffs() {
            out.add_mode(k.clone(), InvariantForm::monomial(n, m, *c));
        }
        out
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn modes(&self) -> &BTreeMap<Frequency, InvariantForm<Complex64>> {
        &self.modes
    }

    pub fn add_mode(&mut self, k: Frequency, form: InvariantForm<Complex64>) {
        let v = match self.modes.remove(&k) {
            Some(old) => old.add(&form).expect("same dimension"),
            None => form,
        };
        if !v.is_zero() {
            self.modes.insert(k, v);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn band(&self) -> usize {
        self.modes.keys().map(|k| mode_band(k)).max().unwrap_or(0)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, f) in &other.modes {
            out.add_mode(k.clone(), f.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = Self::zero(self.n);
        for (k, f) in &self.modes {
            out.add_mode(k.clone(), f.scale(&c));
        }
        out
    }

    /// Exterior product (exact convolution).
    pub fn wedge(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.n);
        for (k1, f1) in &self.modes {
            for (k2, f2) in &other.modes {
                out.add_mode(add_modes(k1, k2), f1.wedge(f2).expect("same dimension"));
            }
        }
        out
    }

    pub fn mul_function(&self, f: &FourierFunction) -> Self {
        let mut out = Self::zero(self.n);
        for (k1, c) in f.coeffs() {
            for (k2, form) in &self.modes {
                out.add_mode(add_modes(k1, k2), form.scale(c));
            }
        }
        out
    }

    /// `∫ ⟨u, v⟩` by Parseval.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.modes
            .iter()
            .filter_map(|(k, f)| other.modes.get(k).map(|g| f.inner(g).expect("same dimension")))
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).re.max(0.0).sqrt()
    }

    /// The coefficient function of a basis monomial.
    pub fn coefficient(&self, m: &MultiIndexPQ) -> FourierFunction {
        let mut f = FourierFunction::zero(self.n);
        for (k, form) in &self.modes {
            f.add_coeff(k.clone(), form.coeff(m));
        }
        f
    }

    /// The pointwise squared norm `|u|²` as a function.
    pub fn pointwise_norm_sqr(&self) -> FourierFunction {
        let mut monomials: Vec<MultiIndexPQ> = self.modes.values().flat_map(|f| f.terms().keys().copied()).collect();
        monomials.sort();
        monomials.dedup();
        monomials.iter().fold(FourierFunction::zero(self.n), |acc, m| {
            let c = self.coefficient(m);
            acc.add(&c.mul(&c.conj()))
        })
    }

    fn map_modes(&self, f: impl Fn(&Frequency, &InvariantForm<Complex64>) -> InvariantForm<Complex64>) -> Self {
        let mut out = Self::zero(self.n);
        for (k, form) in &self.modes {
            out.add_mode(k.clone(), f(k, form));
        }
        out
    }

    fn symbol_form(&self, k: &[i32], gens: impl Iterator<Item = usize>) -> InvariantForm<Complex64> {
        let n = self.n;
        InvariantForm::from_terms(
            n,
            gens.map(|g| {
                let m = if g < n {
                    MultiIndexPQ::new(&[g], &[])
                } else {
                    MultiIndexPQ::new(&[], &[g - n])
                };
                (m, symbol(n, k, g))
            }),
        )
    }

    pub fn d(&self) -> Self {
        let n = self.n;
        self.map_modes(|k, f| self.symbol_form(k, 0..2 * n).wedge(f).expect("same dimension"))
    }

    pub fn dbar(&self) -> Self {
        let n = self.n;
        self.map_modes(|k, f| self.symbol_form(k, n..2 * n).wedge(f).expect("same dimension"))
    }

    pub fn partial(&self) -> Self {
        let n = self.n;
        self.map_modes(|k, f| self.symbol_form(k, 0..n).wedge(f).expect("same dimension"))
    }

    /// `d*`, the `L²` adjoint of [`FourierForm::d`].
    pub fn d_adjoint(&self) -> Self {
        let n = self.n;
        self.map_modes(|k, f| self.symbol_form(k, 0..2 * n).wedge_adjoint(f).expect("same dimension"))
    }

    /// `∂̄*`.
    pub fn dbar_adjoint(&self) -> Self {
        let n = self.n;
        self.map_modes(|k, f| self.symbol_form(k, n..2 * n).wedge_adjoint(f).expect("same dimension"))
    }

    /// Interior product with the dual vector of generator `g`.
    pub fn contract_generator(&self, g: usize) -> Self {
        let e = InvariantForm::generator(self.n, g);
        self.map_modes(|_, f| e.wedge_adjoint(f).expect("same dimension"))
    }

    /// Coefficient-wise derivative along the dual vector of generator `g`.
    pub fn derivative(&self, g: usize) -> Self {
        let n = self.n;
        self.map_modes(|k, f| f.scale(&symbol(n, k, g)))
    }

    /// Restriction to the modes with `|k|_∞ ≤ cutoff`.
    pub fn truncate(&self, cutoff: usize) -> Self {
        FourierForm {
            n: self.n,
            modes: self
                .modes
                .iter()
                .filter(|(k, _)| mode_band(k) <= cutoff)
                .map(|(k, f)| (k.clone(), f.clone()))
                .collect(),
        }
    }

    /// Projection onto holomorphic degree `p`.
    pub fn project_p(&self, p: usize) -> Self {
        let n = self.n;
        let mut out = Self::zero(n);
        for (k, f) in &self.modes {
            let part = InvariantForm::from_terms(
                n,
                f.terms().iter().filter(|(m, _)| m.p() == p).map(|(m, c)| (*m, *c)),
            );
            out.add_mode(k.clone(), part);
        }
        out
    }

    /// Value at a point, as a constant form.
    pub fn eval(&self, point: &[f64]) -> InvariantForm<Complex64> {
        let mut out = InvariantForm::zero(self.n);
        for (k, f) in &self.modes {
            let phase: f64 = k.iter().zip(point).map(|(ki, xi)| *ki as f64 * xi).sum();
            out = out
                .add(&f.scale(&Complex64::from_polar(1.0, 2.0 * PI * phase)))
                .expect("same dimension");
        }
        out
    }
}

/// A complex vector field `Σ b_g ∂_g` with trigonometric coefficients,
/// `g` ranging over the dual vectors of the coframe.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    n: usize,
    b: Vec<FourierFunction>,
}

impl VectorField {
    pub fn new(n: usize, b: Vec<FourierFunction>) -> Result<Self> {
        if b.len() != 2 * n {
            return Err(Error::InvalidArgument(format!("vector field needs {} components", 2 * n)));
        }
        Ok(VectorField { n, b })
    }

    pub fn components(&self) -> &[FourierFunction] {
        &self.b
    }

    pub fn band(&self) -> usize {
        self.b.iter().map(FourierFunction::band).max().unwrap_or(0)
    }

    /// Pointwise complex conjugate field.
    pub fn conj(&self) -> Self {
        let n = self.n;
        // conj(b ∂_z) = conj(b) ∂_z̄
        let b = (0..2 * n)
            .map(|g| {
                let src = if g < n { g + n } else { g - n };
                self.b[src].conj()
            })
            .collect();
        VectorField { n, b }
    }

    pub fn add(&self, other: &Self) -> Self {
        VectorField {
            n: self.n,
            b: self.b.iter().zip(&other.b).map(|(x, y)| x.add(y)).collect(),
        }
    }

    /// `i_V u`.
    pub fn contract(&self, u: &FourierForm) -> FourierForm {
        (0..2 * self.n).fold(FourierForm::zero(self.n), |acc, g| {
            acc.add(&u.contract_generator(g).mul_function(&self.b[g]))
        })
    }

    /// `∇_V u` for the flat connection.
    pub fn covariant(&self, u: &FourierForm) -> FourierForm {
        (0..2 * self.n).fold(FourierForm::zero(self.n), |acc, g| {
            acc.add(&u.derivative(g).mul_function(&self.b[g]))
        })
    }

    /// The derivation induced by `∇V`: `Σ_g (d b_g) ∧ ι_g u`.
    pub fn derivation(&self, u: &FourierForm) -> FourierForm {
        (0..2 * self.n).fold(FourierForm::zero(self.n), |acc, g| {
            let db = FourierForm::from_function(&self.b[g], MultiIndexPQ::EMPTY).d();
            acc.add(&db.wedge(&u.contract_generator(g)))
        })
    }

    pub fn divergence(&self) -> FourierFunction {
        (0..2 * self.n).fold(FourierFunction::zero(self.n), |acc, g| acc.add(&self.b[g].derivative(g)))
    }

    /// `L_V u = d i_V u + i_V d u`.
    pub fn lie(&self, u: &FourierForm) -> FourierForm {
        self.contract(u).d().add(&self.contract(&u.d()))
    }
}

/// A twisting form `θ = Σ_j a_j dz̄_j` with trigonometric coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct ThetaField {
    n: usize,
    a: Vec<FourierFunction>,
}

/// Nowhere-vanishing certificate and gradient bound for a twisting form.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Certificate {
    /// `‖θ_0‖ − Σ_{k≠0} ‖θ_k‖`, a lower bound for `inf |θ|`.
    pub c1: f64,
    /// `Σ_k √2 π |k| ‖θ_k‖`, an upper bound for `sup |∇θ♯|`.
    pub c2: f64,
    /// `C₂ / C₁` when `C₁ > 0`.
    pub ratio: Option<f64>,
}

impl ThetaField {
    pub fn new(n: usize, a: Vec<FourierFunction>) -> Result<Self> {
        if a.len() != n || a.iter().any(|f| f.n() != n) {
            return Err(Error::InvalidArgument(format!("theta needs {n} coefficient functions")));
        }
        Ok(ThetaField { n, a })
    }

    /// `c · dz̄_{j+1}` with constant `c`.
    pub fn constant(n: usize, j: usize, c: Complex64) -> Self {
        let mut a = vec![FourierFunction::zero(n); n];
        a[j] = FourierFunction::constant(n, c);
        ThetaField { n, a }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coefficients(&self) -> &[FourierFunction] {
        &self.a
    }

    pub fn band(&self) -> usize {
        self.a.iter().map(FourierFunction::band).max().unwrap_or(0)
    }

    pub fn is_constant(&self) -> bool {
        self.band() == 0
    }

    pub fn scaled(&self, t: f64) -> Self {
        ThetaField {
            n: self.n,
            a: self.a.iter().map(|f| f.scale(Complex64::new(t, 0.0))).collect(),
        }
    }

    pub fn form(&self) -> FourierForm {
        let n = self.n;
        (0..n).fold(FourierForm::zero(n), |acc, j| {
            acc.add(&FourierForm::from_function(&self.a[j], MultiIndexPQ::new(&[], &[j])))
        })
    }

    /// `θ♯ = Σ conj(a_j) ∂/∂z̄_j`, so that `i_{θ♯}` is the adjoint of `θ∧`.
    pub fn sharp(&self) -> VectorField {
        let n = self.n;
        let mut b = vec![FourierFunction::zero(n); 2 * n];
        for j in 0..n {
            b[n + j] = self.a[j].conj();
        }
        VectorField { n, b }
    }

    /// `θ♯ + conj(θ♯)`, the real vector field dual to `θ + θ̄`.
    pub fn real_sharp(&self) -> VectorField {
        let s = self.sharp();
        s.add(&s.conj())
    }

    /// `|θ|²` as a function.
    pub fn norm_sqr_function(&self) -> FourierFunction {
        self.a
            .iter()
            .fold(FourierFunction::zero(self.n), |acc, f| acc.add(&f.mul(&f.conj())))
    }

    /// `θ_k` norms per mode.
    fn mode_norms(&self) -> BTreeMap<Frequency, f64> {
        let mut out: BTreeMap<Frequency, f64> = BTreeMap::new();
        for f in &self.a {
            for (k, c) in f.coeffs() {
                *out.entry(k.clone()).or_default() += c.norm_sqr();
            }
        }
        out.into_iter().map(|(k, v)| (k, v.sqrt())).collect()
    }

    /// `Σ_k ‖θ_k‖ ≥ sup |θ|`.
    pub fn sup_bound(&self) -> f64 {
        self.mode_norms().values().sum()
    }

    pub fn certificate(&self) -> Certificate {
        let zero = zero_frequency(self.n);
        let norms = self.mode_norms();
        let c0 = norms.get(&zero).copied().unwrap_or(0.0);
        let rest: f64 = norms.iter().filter(|(k, _)| **k != zero).map(|(_, v)| v).sum();
        let c1 = c0 - rest;
        let c2 = norms
            .iter()
            .map(|(k, v)| {
                let k2: f64 = k.iter().map(|x| (*x as f64).powi(2)).sum();
                2f64.sqrt() * PI * k2.sqrt() * v
            })
            .sum();
        Certificate {
            c1,
            c2,
            ratio: (c1 > 0.0).then(|| c2 / c1),
        }
    }

    /// Fails with [`Error::CertificateFailed`] unless `C₁ > 0`.
    pub fn certify_nonvanishing(&self) -> Result<Certificate> {
        let c = self.certificate();
        if c.c1 > 0.0 {
            Ok(c)
        } else {
            Err(Error::CertificateFailed { c1: c.c1 })
        }
    }

    /// Parses a coefficient expression attached to `dz̄_{j}`.
    ///
    /// Terms are `c`, `c*cos(2*pi*k*x_j)`, `c*sin(2*pi*k*y_j)`, bare
    /// `cos`/`sin` (meaning `cos(2*pi*x_1)`), joined by `+`/`-`. A trailing
    /// `*dzbar_j` on a parenthesized sum selects the form index; the default
    /// is `dzbar_1`. Complex constants go in parentheses: `(1+2i)*cos`.
    pub fn parse(expr: &str, n: usize) -> Result<Self> {
        let compact: String = expr.chars().filter(|c| !c.is_whitespace()).collect();
        let (body, j) = split_dzbar(&compact, n)?;
        let f = parse_trig_sum(body, n)?;
        let mut a = vec![FourierFunction::zero(n); n];
        a[j] = f;
        Ok(ThetaField { n, a })
    }
}

fn expr_err(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(format!("theta expression: {}", msg.into()))
}

fn split_dzbar(s: &str, n: usize) -> Result<(&str, usize)> {
    let Some(pos) = s.rfind("*dzbar_") else {
        return Ok((s, 0));
    };
    let idx: usize = s[pos + 7..]
        .parse()
        .map_err(|_| expr_err(format!("bad form index in {s:?}")))?;
    if idx == 0 || idx > n {
        return Err(expr_err(format!("dzbar index {idx} outside 1..={n}")));
    }
    let mut body = &s[..pos];
    if body.starts_with('(') && body.ends_with(')') {
        body = &body[1..body.len() - 1];
    }
    Ok((body, idx - 1))
}

/// Splits at top-level `+`/`-`, keeping parenthesized groups intact.
fn top_level_terms(s: &str) -> Result<Vec<(bool, &str)>> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    let mut negative = false;
    let bytes = s.as_bytes();
    for (i, &b) in bytes.iter().enumerate() {
        match b {
            b'(' => depth += 1,
            b')' => depth -= 1,
            b'+' | b'-' if depth == 0 => {
                let prev = if i == 0 { None } else { Some(bytes[i - 1]) };
                if matches!(prev, Some(b'e') | Some(b'E')) && i >= 2 && bytes[i - 2].is_ascii_digit() {
                    continue;
                }
                if i > start {
                    out.push((negative, &s[start..i]));
                } else if i > 0 {
                    return Err(expr_err(format!("dangling sign at {i} in {s:?}")));
                }
                negative = b == b'-';
                start = i + 1;
            }
            _ => {}
        }
        if depth < 0 {
            return Err(expr_err("unbalanced parentheses"));
        }
    }
    if depth != 0 {
        return Err(expr_err("unbalanced parentheses"));
    }
    if start >= s.len() {
        return Err(expr_err(format!("empty term in {s:?}")));
    }
    out.push((negative, &s[start..]));
    Ok(out)
}

fn parse_trig_sum(s: &str, n: usize) -> Result<FourierFunction> {
    if s.is_empty() {
        return Err(expr_err("empty expression"));
    }
    let mut f = FourierFunction::zero(n);
    for (negative, term) in top_level_terms(s)? {
        let sign = if negative { -1.0 } else { 1.0 };
        let (coeff, func) = match term.find("cos").or_else(|| term.find("sin")) {
            Some(pos) => {
                let c = &term[..pos];
                let c = c.strip_suffix('*').unwrap_or(c);
                let c = if c.is_empty() { Complex64::new(1.0, 0.0) } else { parse_constant(c)? };
                (c, Some(&term[pos..]))
            }
            None => (parse_constant(term)?, None),
        };
        let c = coeff * sign;
        match func {
            None => f.add_coeff(zero_frequency(n), c),
            Some(func) => {
                let (is_cos, rest) = if let Some(r) = func.strip_prefix("cos") {
                    (true, r)
                } else {
                    (false, func.strip_prefix("sin").expect("found above"))
                };
                let (axis, k) = if rest.is_empty() {
                    (0, 1)
                } else {
                    let arg = rest
                        .strip_prefix('(')
                        .and_then(|r| r.strip_suffix(')'))
                        .ok_or_else(|| expr_err(format!("expected (...) after cos/sin in {term:?}")))?;
                    parse_argument(arg, n)?
                };
                let mut plus = zero_frequency(n);
                plus[axis] = k;
                let minus = neg_mode(&plus);
                let half = Complex64::new(0.5, 0.0);
                if is_cos {
                    f.add_coeff(plus, c * half);
                    f.add_coeff(minus, c * half);
                } else {
                    // sin t = (e^{it} − e^{−it}) / 2i
                    let w = c / Complex64::new(0.0, 2.0);
                    f.add_coeff(plus, w);
                    f.add_coeff(minus, -w);
                }
            }
        }
    }
    Ok(f)
}

fn parse_constant(s: &str) -> Result<Complex64> {
    let inner = s.strip_prefix('(').and_then(|r| r.strip_suffix(')')).unwrap_or(s);
    parse_numeric(inner).map_err(|e| expr_err(e.to_string()))
}

/// `2*pi*k*x_j` (or `2*pi*x_j`, `2pi*...`); returns (mode axis, k).
fn parse_argument(arg: &str, n: usize) -> Result<(usize, i32)> {
    let rest = arg
        .strip_prefix("2*pi*")
        .or_else(|| arg.strip_prefix("2pi*"))
        .ok_or_else(|| expr_err(format!("argument {arg:?} must start with 2*pi*")))?;
    let (k, var) = match rest.find('*') {
        Some(pos) => (
            rest[..pos]
                .parse::<i32>()
                .map_err(|_| expr_err(format!("bad frequency in {arg:?}")))?,
            &rest[pos + 1..],
        ),
        None => (1, rest),
    };
    let (is_y, idx) = if let Some(r) = var.strip_prefix('x') {
        (false, r)
    } else if let Some(r) = var.strip_prefix('y') {
        (true, r)
    } else {
        return Err(expr_err(format!("variable in {arg:?} must be x_j or y_j")));
    };
    let idx = idx.strip_prefix('_').unwrap_or(idx);
    let j: usize = idx.parse().map_err(|_| expr_err(format!("bad variable index in {arg:?}")))?;
    if j == 0 || j > n {
        return Err(expr_err(format!("variable index {j} outside 1..={n}")));
    }
    Ok((if is_y { n + j - 1 } else { j - 1 }, k))
}

/// Torus of complex dimension `n` with Fourier cutoff `|k|_∞ ≤ cutoff`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TorusSpec {
    pub n: usize,
    pub cutoff: usize,
}

impl TorusSpec {
    pub fn new(n: usize, cutoff: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("torus dimension must be at least 1".into()));
        }
        Ok(TorusSpec { n, cutoff })
    }

    pub fn modes(&self) -> Vec<Frequency> {
        modes_in_box(self.n, self.cutoff)
    }

    fn require_band(&self, required: usize) -> Result<()> {
        if self.cutoff < required {
            return Err(Error::BandOverflow {
                cutoff: self.cutoff,
                required,
            });
        }
        Ok(())
    }
}

/// Random form with modes `|k|_∞ ≤ band` on the given bidegrees.
pub fn random_form<R: Rng>(rng: &mut R, n: usize, band: usize, bidegrees: &[(usize, usize)]) -> FourierForm {
    let mut u = FourierForm::zero(n);
    for k in modes_in_box(n, band) {
        let mut f = InvariantForm::zero(n);
        for &(p, q) in bidegrees {
            for m in basis(n, p, q) {
                f.add_term(m, crate::sampling::complex(rng));
            }
        }
        u.add_mode(k, f);
    }
    u
}

/// The three sides of the Lie-derivative identity for `V = θ♯`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LieIdentityReport {
    /// `∫⟨(d i + i d) u, v⟩`.
    pub cartan: [f64; 2],
    /// `∫⟨i u, d*v⟩ + ∫⟨du, θ∧v⟩`.
    pub adjoint: [f64; 2],
    /// `∫⟨∇_{θ♯} u, v⟩ + ∫⟨(∇θ♯) u, v⟩`.
    pub connection: [f64; 2],
    /// Largest pairwise difference of the three.
    pub residual: f64,
    /// `‖(d i + i d) u − (∇ + ∇θ♯) u‖`.
    pub cartan_formula_residual: f64,
}

fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

pub fn verify_lie_identity(torus: &TorusSpec, theta: &ThetaField, u: &FourierForm, v: &FourierForm) -> Result<LieIdentityReport> {
    torus.require_band(u.band().max(v.band()) + theta.band())?;
    let field = theta.sharp();
    let lie_u = field.lie(u);
    let cartan = lie_u.inner(v);
    let adjoint = field.contract(u).inner(&v.d_adjoint()) + u.d().inner(&theta.form().wedge(v));
    let conn_u = field.covariant(u).add(&field.derivation(u));
    let connection = conn_u.inner(v);
    let residual = [(cartan - adjoint).norm(), (cartan - connection).norm(), (adjoint - connection).norm()]
        .into_iter()
        .fold(0.0, f64::max);
    Ok(LieIdentityReport {
        cartan: pair(cartan),
        adjoint: pair(adjoint),
        connection: pair(connection),
        residual,
        cartan_formula_residual: lie_u.sub(&conn_u).norm(),
    })
}

/// Both sides of the real-part identity for the real field `θ♯ + conj(θ♯)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RealPartReport {
    /// `2 Re ∫⟨L_V u, u⟩`.
    pub lhs: f64,
    /// `2 Re ∫⟨(∇V) u, u⟩ − ∫ (div V) |u|²`.
    pub rhs: f64,
    pub residual: f64,
}

pub fn verify_real_part_identity(torus: &TorusSpec, theta: &ThetaField, u: &FourierForm) -> Result<RealPartReport> {
    torus.require_band(u.band() + theta.band())?;
    let field = theta.real_sharp();
    let lhs = 2.0 * field.lie(u).inner(u).re;
    let div_term = field.divergence().integral_of_product(&u.pointwise_norm_sqr());
    let rhs = 2.0 * field.derivation(u).inner(u).re - div_term.re;
    Ok(RealPartReport {
        lhs,
        rhs,
        residual: (lhs - rhs).abs(),
    })
}

/// The curvature identity evaluated on a given form `α ∈ Ω^{p,•}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CurvatureIdentityReport {
    /// `∫ |θ♯|² |α|²`.
    pub lhs: f64,
    /// `−Re(α, ∂̄θ∧α) − Re ∫⟨L_{θ♯}α, α⟩`.
    pub rhs: f64,
    pub residual: f64,
    /// `Re(Dα, (θ∧ + i_{θ♯})α)`, which the residual must equal.
    pub predicted_residual: f64,
    pub consistency: f64,
    /// `‖D_θ α‖` with the untruncated operator.
    pub d_alpha_norm: f64,
    pub alpha_norm: f64,
    /// `|residual| / (‖Dα‖ ‖α‖)`, when `Dα ≠ 0`.
    pub measured_constant: Option<f64>,
    /// `Σ‖θ_k‖`, an a priori bound for the measured constant.
    pub constant_bound: f64,
    /// Smallest singular value of the truncated operator when `α` came from
    /// [`verify_curvature_identity`].
    pub sigma_min: Option<f64>,
}

/// `D_θ α = ∂̄α + ∂̄*α + θ∧α + i_{θ♯}α`, untruncated.
pub fn dirac_apply(theta: &ThetaField, alpha: &FourierForm) -> FourierForm {
    let twist = theta.form().wedge(alpha).add(&theta.sharp().contract(alpha));
    alpha.dbar().add(&alpha.dbar_adjoint()).add(&twist)
}

pub fn curvature_identity_on(theta: &ThetaField, alpha: &FourierForm) -> CurvatureIdentityReport {
    let field = theta.sharp();
    let lhs = theta.norm_sqr_function().integral_of_product(&alpha.pointwise_norm_sqr()).re;
    let dbar_theta = theta.form().dbar();
    let rhs = -alpha.inner(&dbar_theta.wedge(alpha)).re - field.lie(alpha).inner(alpha).re;
    let residual = lhs - rhs;
    let d_alpha = dirac_apply(theta, alpha);
    let twist = theta.form().wedge(alpha).add(&field.contract(alpha));
    let predicted = d_alpha.inner(&twist).re;
    let d_alpha_norm = d_alpha.norm();
    let alpha_norm = alpha.norm();
    CurvatureIdentityReport {
        lhs,
        rhs,
        residual,
        predicted_residual: predicted,
        consistency: (residual - predicted).abs(),
        d_alpha_norm,
        alpha_norm,
        measured_constant: (d_alpha_norm * alpha_norm > 0.0).then(|| residual.abs() / (d_alpha_norm * alpha_norm)),
        constant_bound: theta.sup_bound(),
        sigma_min: None,
    }
}

/// Threshold below which the truncated operator is treated as having kernel.
pub const KERNEL_SIGMA_TOL: f64 = 1e-8;

/// Finds the least singular vector `α` of the truncated `D_θ` on `Ω^{p,•}`
/// and evaluates the identity on it. Fails with [`Error::Vacuous`] when the
/// truncated kernel is empty; [`curvature_identity_on`] still applies to that `α`.
pub fn verify_curvature_identity(torus: &TorusSpec, theta: &ThetaField, p: usize) -> Result<CurvatureIdentityReport> {
    let (sigma, alpha) = least_singular_form(torus, theta, p, Execution::default())?;
    if sigma > KERNEL_SIGMA_TOL {
        return Err(Error::Vacuous {
            cutoff: torus.cutoff,
            sigma_min: sigma,
        });
    }
    let mut r = curvature_identity_on(theta, &alpha);
    r.sigma_min = Some(sigma);
    Ok(r)
}

/// Smallest singular value of the full truncated `D_θ` on `Ω^{p,•}` and a
/// unit right singular vector.
pub fn least_singular_form(torus: &TorusSpec, theta: &ThetaField, p: usize, exec: Execution) -> Result<(f64, FourierForm)> {
    let ops = assemble_operators(torus, theta, p, exec)?;
    let d = ops.dirac(1.0);
    let svd = d.svd(false, true);
    let v_t = svd.v_t.expect("requested");
    let (idx, sigma) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, s)| (i, *s))
        .ok_or_else(|| Error::InvalidArgument("empty truncated space".into()))?;
    let coords: Vec<Complex64> = v_t.row(idx).iter().map(|z| z.conj()).collect();
    Ok((sigma, ops.to_form(&coords)))
}

/// Hard-truncated operators on `Ω^{p,•}` restricted to `|k|_∞ ≤ cutoff`.
///
/// The basis is ordered by `q`, then mode, then monomial. `wedge` and
/// `contraction` are `P θ∧ P` and `P i_{θ♯} P`, so they are exact adjoints.
#[derive(Clone, Debug)]
pub struct TruncatedOperators {
    pub torus: TorusSpec,
    pub p: usize,
    pub basis: Vec<(Frequency, MultiIndexPQ)>,
    pub dbar: DMatrix<Complex64>,
    pub dbar_adjoint: DMatrix<Complex64>,
    pub wedge: DMatrix<Complex64>,
    pub contraction: DMatrix<Complex64>,
}

impl TruncatedOperators {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// `D_{tθ}` on the whole truncated `Ω^{p,•}`.
    pub fn dirac(&self, t: f64) -> DMatrix<Complex64> {
        let tc = Complex64::new(t, 0.0);
        &self.dbar + &self.dbar_adjoint + (&self.wedge + &self.contraction) * tc
    }

    fn parity_indices(&self) -> (Vec<usize>, Vec<usize>) {
        let even = (0..self.dim()).filter(|&i| self.basis[i].1.q() % 2 == 0).collect();
        let odd = (0..self.dim()).filter(|&i| self.basis[i].1.q() % 2 == 1).collect();
        (even, odd)
    }

    /// Even-to-odd block of `D_{tθ}` (rows odd, columns even).
    pub fn even_odd_block(&self, t: f64) -> DMatrix<Complex64> {
        let d = self.dirac(t);
        let (even, odd) = self.parity_indices();
        DMatrix::from_fn(odd.len(), even.len(), |i, j| d[(odd[i], even[j])])
    }

    pub fn to_form(&self, coords: &[Complex64]) -> FourierForm {
        let n = self.torus.n;
        let mut u = FourierForm::zero(n);
        for ((k, m), c) in self.basis.iter().zip(coords) {
            u.add_mode(k.clone(), InvariantForm::monomial(n, *m, *c));
        }
        u
    }
}

pub fn assemble_operators(torus: &TorusSpec, theta: &ThetaField, p: usize, exec: Execution) -> Result<TruncatedOperators> {
    let n = torus.n;
    if theta.n() != n {
        return Err(Error::DimensionMismatch { left: n, right: theta.n() });
    }
    if p > n {
        return Err(Error::InvalidArgument(format!("p = {p} exceeds n = {n}")));
    }
    torus.require_band(theta.band())?;
    let modes = torus.modes();
    let basis_list: Vec<(Frequency, MultiIndexPQ)> = (0..=n)
        .flat_map(|q| {
            let monos = basis(n, p, q);
            modes
                .iter()
                .flat_map(move |k| monos.clone().into_iter().map(move |m| (k.clone(), m)))
                .collect::<Vec<_>>()
        })
        .collect();
    let index: HashMap<(Frequency, MultiIndexPQ), usize> =
        basis_list.iter().cloned().enumerate().map(|(i, key)| (key, i)).collect();
    let dim = basis_list.len();
    let theta_form = theta.form();
    let sharp = theta.sharp();
    let columns = exec.map((0..dim).collect(), |j| {
        let (k, m) = &basis_list[j];
        let e = FourierForm {
            n,
            modes: BTreeMap::from([(k.clone(), InvariantForm::monomial(n, *m, Complex64::new(1.0, 0.0)))]),
        };
        let images = [e.dbar(), e.dbar_adjoint(), theta_form.wedge(&e), sharp.contract(&e)];
        images.map(|img| {
            let mut col: Vec<(usize, Complex64)> = Vec::new();
            for (kk, f) in img.modes() {
                for (mm, c) in f.terms() {
                    if let Some(&i) = index.get(&(kk.clone(), *mm)) {
                        col.push((i, *c));
                    }
                }
            }
            col
        })
    });
    let mut mats = [(); 4].map(|_| DMatrix::<Complex64>::zeros(dim, dim));
    for (j, cols) in columns.into_iter().enumerate() {
        for (mat, col) in mats.iter_mut().zip(cols) {
            for (i, c) in col {
                mat[(i, j)] = c;
            }
        }
    }
    let [dbar, dbar_adjoint, wedge, contraction] = mats;
    Ok(TruncatedOperators {
        torus: *torus,
        p,
        basis: basis_list,
        dbar,
        dbar_adjoint,
        wedge,
        contraction,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScanPoint {
    pub t: f64,
    pub sigma_min_even: f64,
    pub sigma_min_odd: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Stability {
    pub cutoff: usize,
    pub compare_cutoff: usize,
    pub t: f64,
    pub rel_change_even: f64,
    pub rel_change_odd: f64,
    pub stable: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanReport {
    pub n: usize,
    pub p: usize,
    pub cutoff: usize,
    pub points: Vec<ScanPoint>,
    /// First grid point with both smallest singular values above
    /// [`WITNESS_SIGMA_TOL`]; `None` is a finding, not an error.
    pub witness: Option<f64>,
    pub certificate: Certificate,
    pub stability: Option<Stability>,
}

pub const WITNESS_SIGMA_TOL: f64 = 1e-6;
pub const STABILITY_REL_TOL: f64 = 1e-3;

fn scan_points(ops: &TruncatedOperators, t_grid: &[f64], exec: Execution) -> Vec<ScanPoint> {
    exec.map(t_grid.to_vec(), |t| {
        let block = ops.even_odd_block(t);
        ScanPoint {
            t,
            sigma_min_even: linalg::sigma_min_inverse_iteration(&block).unwrap_or(0.0),
            sigma_min_odd: linalg::sigma_min_inverse_iteration(&block.adjoint()).unwrap_or(0.0),
        }
    })
}

/// Smallest singular values of the even-to-odd block of `D_{tθ}` along
/// `t_grid`, the witness `t*`, and (optionally) a stability comparison at
/// `t*` against the cutoff `cutoff + 2`.
pub fn sigma_min_scan(
    torus: &TorusSpec,
    theta: &ThetaField,
    p: usize,
    t_grid: &[f64],
    check_stability: bool,
    exec: Execution,
) -> Result<ScanReport> {
    let certificate = theta.certify_nonvanishing()?;
    let ops = assemble_operators(torus, theta, p, exec)?;
    let points = scan_points(&ops, t_grid, exec);
    let witness = points
        .iter()
        .find(|pt| pt.sigma_min_even > WITNESS_SIGMA_TOL && pt.sigma_min_odd > WITNESS_SIGMA_TOL)
        .map(|pt| pt.t);
    let stability = match (witness, check_stability) {
        (Some(t), true) => {
            let wider = TorusSpec::new(torus.n, torus.cutoff + 2)?;
            let ops2 = assemble_operators(&wider, theta, p, exec)?;
            let a = points.iter().find(|pt| pt.t == t).expect("witness is a grid point");
            let b = scan_points(&ops2, &[t], Execution::Sequential)[0];
            let rel = |x: f64, y: f64| (x - y).abs() / x.abs().max(y.abs()).max(f64::MIN_POSITIVE);
            let (re, ro) = (rel(a.sigma_min_even, b.sigma_min_even), rel(a.sigma_min_odd, b.sigma_min_odd));
            Some(Stability {
                cutoff: torus.cutoff,
                compare_cutoff: wider.cutoff,
                t,
                rel_change_even: re,
                rel_change_odd: ro,
                stable: re < STABILITY_REL_TOL && ro < STABILITY_REL_TOL,
            })
        }
        _ => None,
    };
    Ok(ScanReport {
        n: torus.n,
        p,
        cutoff: torus.cutoff,
        points,
        witness,
        certificate,
        stability,
    })
}

/// `∫⟨u, v⟩` by mode sum and by the trapezoid rule on a grid of
/// `2·band + 1` points per axis, which integrates the product exactly.
pub fn parseval_check(u: &FourierForm, v: &FourierForm) -> (Complex64, Complex64) {
    let n = u.n();
    let m = 2 * u.band().max(v.band()) + 1;
    let total = m.pow(2 * n as u32);
    let mut sum = Complex64::new(0.0, 0.0);
    for idx in 0..total {
        let mut rest = idx;
        let point: Vec<f64> = (0..2 * n)
            .map(|_| {
                let i = rest % m;
                rest /= m;
                i as f64 / m as f64
            })
            .collect();
        sum += u.eval(&point).inner(&v.eval(&point)).expect("same dimension");
    }
    (u.inner(v), sum / total as f64)
}
