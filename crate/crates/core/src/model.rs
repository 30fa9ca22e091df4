//! Finite models: flat tori and invariant complex structures on Lie algebras,
//! given by structure equations for a unitary coframe.
//!
//! A model specifies `dφ^k` for each holomorphic generator as a form of type
//! `(2,0) + (1,1)`; `dφ̄^k` is its conjugate. The exterior derivative extends
//! to all invariant forms as an antiderivation, and `∂`, `∂̄` are its
//! bidegree components.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Deref;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::exterior::{basis, basis_total, InvariantForm, MultiIndexPQ, OneForm01};
use crate::linalg::Matrix;
use crate::parallel::Execution;
use crate::scalar::{GaussRational, Mode, Scalar};
use crate::Complex64;

/// An invariant complex model of complex dimension `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct LieComplexModel<S> {
    name: String,
    n: usize,
    /// `dφ^{k+1}` for `k = 0..n`.
    dphi: Vec<InvariantForm<S>>,
    theta_examples: BTreeMap<String, OneForm01<S>>,
}

/// Result of checking `d² = 0` and unimodularity.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub model: String,
    pub n: usize,
    pub generators: Vec<GeneratorCheck>,
    pub unimodular: bool,
    /// First `(2n−1)`-monomial with nonzero `d`, if any.
    pub unimodular_witness: Option<String>,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeneratorCheck {
    pub generator: String,
    /// `d(d g)`, printed; `"0"` when the generator passes.
    pub residual: String,
    pub ok: bool,
}

impl ValidationReport {
    /// The first failure as an error value.
    pub fn first_error(&self) -> Option<Error> {
        if let Some(g) = self.generators.iter().find(|g| !g.ok) {
            return Some(Error::NotComplex {
                generator: g.generator.clone(),
                residual: g.residual.clone(),
            });
        }
        self.unimodular_witness
            .as_ref()
            .map(|m| Error::NotUnimodular { monomial: m.clone() })
    }
}

fn generator_label(n: usize, g: usize) -> String {
    if g < n {
        format!("phi_{}", g + 1)
    } else {
        format!("phi_bar_{}", g - n + 1)
    }
}

impl<S: Scalar> LieComplexModel<S> {
    /// Builds a model from `dφ^k`. Each entry must be a 2-form without a
    /// `(0,2)` component.
    pub fn new(name: impl Into<String>, n: usize, dphi: Vec<InvariantForm<S>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidModel("complex dimension must be at least 1".into()));
        }
        if n > 16 {
            return Err(Error::InvalidModel(format!("complex dimension {n} is too large")));
        }
        if dphi.len() != n {
            return Err(Error::InvalidModel(format!(
                "expected {n} structure equations, got {}",
                dphi.len()
            )));
        }
        for (k, f) in dphi.iter().enumerate() {
            if f.n() != n {
                return Err(Error::DimensionMismatch { left: n, right: f.n() });
            }
            for m in f.terms().keys() {
                if m.degree() != 2 || m.p() == 0 {
                    return Err(Error::InvalidModel(format!(
                        "d phi_{} has a term {m} of type ({}, {}); only (2,0) and (1,1) are allowed",
                        k + 1,
                        m.p(),
                        m.q()
                    )));
                }
            }
        }
        Ok(LieComplexModel {
            name: name.into(),
            n,
            dphi,
            theta_examples: BTreeMap::new(),
        })
    }

    pub fn with_theta_example(mut self, label: impl Into<String>, theta: OneForm01<S>) -> Self {
        self.theta_examples.insert(label.into(), theta);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dphi(&self) -> &[InvariantForm<S>] {
        &self.dphi
    }

    pub fn theta_examples(&self) -> &BTreeMap<String, OneForm01<S>> {
        &self.theta_examples
    }

    pub fn is_abelian(&self) -> bool {
        self.dphi.iter().all(InvariantForm::is_zero)
    }

    /// `d` of the generator with combined index `g`.
    pub fn d_generator(&self, g: usize) -> InvariantForm<S> {
        if g < self.n {
            self.dphi[g].clone()
        } else {
            self.dphi[g - self.n].conjugate()
        }
    }

    /// Exterior derivative of a basis monomial.
    pub fn d_monomial(&self, m: MultiIndexPQ) -> InvariantForm<S> {
        let n = self.n;
        let mask = m.combined(n);
        let gens: Vec<usize> = (0..2 * n).filter(|g| mask & (1 << g) != 0).collect();
        let mut out = InvariantForm::zero(n);
        for (pos, &g) in gens.iter().enumerate() {
            let dg = self.d_generator(g);
            if dg.is_zero() {
                continue;
            }
            let before: u64 = gens[..pos].iter().fold(0, |a, &h| a | (1 << h));
            let after: u64 = gens[pos + 1..].iter().fold(0, |a, &h| a | (1 << h));
            let left = InvariantForm::monomial(n, MultiIndexPQ::from_combined(n, before), S::one());
            let right = InvariantForm::monomial(n, MultiIndexPQ::from_combined(n, after), S::one());
            let term = left.wedge(&dg).and_then(|t| t.wedge(&right)).expect("same dimension");
            let term = if pos % 2 == 1 { term.scale(&-S::one()) } else { term };
            out = out.add(&term).expect("same dimension");
        }
        out
    }

    pub fn d(&self, f: &InvariantForm<S>) -> InvariantForm<S> {
        let mut out = InvariantForm::zero(self.n);
        for (m, c) in f.terms() {
            for (m2, c2) in self.d_monomial(*m).terms() {
                out.add_term(*m2, c.clone() * c2.clone());
            }
        }
        out
    }

    /// `∂`: the part of `d` raising the holomorphic degree.
    pub fn partial(&self, f: &InvariantForm<S>) -> InvariantForm<S> {
        self.bidegree_part(f, 1, 0)
    }

    /// `∂̄`: the part of `d` raising the antiholomorphic degree.
    pub fn dbar(&self, f: &InvariantForm<S>) -> InvariantForm<S> {
        self.bidegree_part(f, 0, 1)
    }

    fn bidegree_part(&self, f: &InvariantForm<S>, dp: usize, dq: usize) -> InvariantForm<S> {
        let mut out = InvariantForm::zero(self.n);
        for (m, c) in f.terms() {
            for (m2, c2) in self.d_monomial(*m).terms() {
                if m2.p() == m.p() + dp && m2.q() == m.q() + dq {
                    out.add_term(*m2, c.clone() * c2.clone());
                }
            }
        }
        out
    }

    pub fn validate(&self) -> ValidationReport {
        let n = self.n;
        let generators: Vec<GeneratorCheck> = (0..2 * n)
            .map(|g| {
                let r = self.d(&self.d_generator(g));
                GeneratorCheck {
                    generator: generator_label(n, g),
                    residual: r.to_string(),
                    ok: r.is_zero(),
                }
            })
            .collect();
        let unimodular_witness = basis_total(n, 2 * n - 1)
            .into_iter()
            .find(|m| !self.d_monomial(*m).is_zero())
            .map(|m| m.label());
        let unimodular = unimodular_witness.is_none();
        let passed = unimodular && generators.iter().all(|g| g.ok);
        ValidationReport {
            model: self.name.clone(),
            n,
            generators,
            unimodular,
            unimodular_witness,
            passed,
        }
    }

    /// Validates and wraps the model; fails with the first violation.
    pub fn into_validated(self) -> Result<ValidatedModel<S>> {
        let report = self.validate();
        match report.first_error() {
            Some(e) => Err(e),
            None => Ok(ValidatedModel { model: self }),
        }
    }

    /// Converts coefficients to double precision.
    pub fn to_numeric(&self) -> LieComplexModel<Complex64> {
        LieComplexModel {
            name: self.name.clone(),
            n: self.n,
            dphi: self.dphi.iter().map(|f| f.map_scalars(Scalar::to_c64)).collect(),
            theta_examples: self
                .theta_examples
                .iter()
                .map(|(k, v)| (k.clone(), v.map_scalars(Scalar::to_c64)))
                .collect(),
        }
    }
}

/// A model that passed [`LieComplexModel::validate`]. Operator builders only
/// accept this type.
#[derive(Clone, Debug, PartialEq)]
pub struct ValidatedModel<S> {
    model: LieComplexModel<S>,
}

impl<S> Deref for ValidatedModel<S> {
    type Target = LieComplexModel<S>;
    fn deref(&self) -> &LieComplexModel<S> {
        &self.model
    }
}

impl<S: Scalar> ValidatedModel<S> {
    pub fn model(&self) -> &LieComplexModel<S> {
        &self.model
    }

    pub fn to_numeric(&self) -> ValidatedModel<Complex64> {
        ValidatedModel {
            model: self.model.to_numeric(),
        }
    }
}

/// The flat torus of complex dimension `n`: all structure constants vanish.
pub fn torus_model<S: Scalar>(n: usize) -> Result<LieComplexModel<S>> {
    if n == 0 {
        return Err(Error::InvalidArgument("torus dimension must be at least 1".into()));
    }
    LieComplexModel::new(format!("torus_n{n}"), n, vec![InvariantForm::zero(n); n])
}

/// Per-bidegree matrices of a linear operator with constant bidegree shift.
///
/// The block at `(p, q)` maps the basis [`basis`]`(n, p, q)` to
/// `basis(n, p + Δp, q + Δq)`. Blocks whose codomain is out of range are
/// absent.
#[derive(Clone, Debug, PartialEq)]
pub struct GradedOperator<S> {
    n: usize,
    shift: (i32, i32),
    blocks: BTreeMap<(usize, usize), Matrix<S>>,
}

fn shifted(p: usize, q: usize, shift: (i32, i32), n: usize) -> Option<(usize, usize)> {
    let p2 = p as i64 + shift.0 as i64;
    let q2 = q as i64 + shift.1 as i64;
    (0..=n as i64)
        .contains(&p2)
        .then_some(())
        .filter(|_| (0..=n as i64).contains(&q2))
        .map(|_| (p2 as usize, q2 as usize))
}

/// Matrix of `f` from `domain` to `codomain` (columns are images of basis
/// vectors).
pub fn matrix_of<S: Scalar>(
    n: usize,
    domain: &[MultiIndexPQ],
    codomain: &[MultiIndexPQ],
    f: impl Fn(&InvariantForm<S>) -> InvariantForm<S>,
) -> Matrix<S> {
    let index: BTreeMap<MultiIndexPQ, usize> = codomain.iter().enumerate().map(|(i, m)| (*m, i)).collect();
    let mut out = Matrix::zeros(codomain.len(), domain.len());
    for (j, m) in domain.iter().enumerate() {
        let image = f(&InvariantForm::monomial(n, *m, S::one()));
        for (m2, c) in image.terms() {
            let i = *index
                .get(m2)
                .unwrap_or_else(|| panic!("image term {m2} outside the declared codomain"));
            out.set(i, j, c.clone());
        }
    }
    out
}

impl<S: Scalar> GradedOperator<S> {
    /// Assembles the blocks of a bidegree-shifting linear map.
    pub fn from_linear_map<F>(n: usize, shift: (i32, i32), exec: Execution, f: F) -> Self
    where
        F: Fn(&InvariantForm<S>) -> InvariantForm<S> + Sync + Send,
    {
        let keys: Vec<(usize, usize)> = (0..=n)
            .flat_map(|p| (0..=n).map(move |q| (p, q)))
            .filter(|&(p, q)| shifted(p, q, shift, n).is_some())
            .collect();
        let blocks = exec.map(keys, |(p, q)| {
            let (p2, q2) = shifted(p, q, shift, n).expect("filtered");
            ((p, q), matrix_of(n, &basis(n, p, q), &basis(n, p2, q2), &f))
        });
        GradedOperator {
            n,
            shift,
            blocks: blocks.into_iter().collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn shift(&self) -> (i32, i32) {
        self.shift
    }

    pub fn blocks(&self) -> &BTreeMap<(usize, usize), Matrix<S>> {
        &self.blocks
    }

    /// Block with domain bidegree `(p, q)`; `None` when the codomain is out of range.
    pub fn block(&self, p: usize, q: usize) -> Option<&Matrix<S>> {
        self.blocks.get(&(p, q))
    }

    /// Block with domain `(p, q)`, or an empty-codomain zero matrix when the
    /// shifted bidegree is out of range.
    pub fn block_or_zero(&self, p: usize, q: usize) -> Matrix<S> {
        match self.blocks.get(&(p, q)) {
            Some(m) => m.clone(),
            None => Matrix::zeros(0, basis(self.n, p, q).len()),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.blocks.values().all(Matrix::is_zero)
    }

    /// Conjugate-transpose operator (the metric adjoint in the orthonormal basis).
    pub fn adjoint(&self) -> Self {
        let shift = (-self.shift.0, -self.shift.1);
        let blocks = self
            .blocks
            .iter()
            .map(|(&(p, q), m)| {
                let target = shifted(p, q, self.shift, self.n).expect("stored blocks are in range");
                (target, m.conj_transpose())
            })
            .collect();
        GradedOperator {
            n: self.n,
            shift,
            blocks,
        }
    }

    /// `self ∘ other`, block-wise.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                left: self.n,
                right: other.n,
            });
        }
        let shift = (self.shift.0 + other.shift.0, self.shift.1 + other.shift.1);
        let mut blocks = BTreeMap::new();
        for (&(p, q), b) in &other.blocks {
            let mid = shifted(p, q, other.shift, self.n).expect("stored blocks are in range");
            if shifted(p, q, shift, self.n).is_none() {
                continue;
            }
            if let Some(a) = self.blocks.get(&mid) {
                blocks.insert((p, q), a.matmul(b));
            }
        }
        Ok(GradedOperator {
            n: self.n,
            shift,
            blocks,
        })
    }

    /// Sum of operators with the same shift.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.n != other.n || self.shift != other.shift {
            return Err(Error::InvalidArgument("operators differ in dimension or shift".into()));
        }
        let mut blocks = self.blocks.clone();
        for (k, m) in &other.blocks {
            let sum = match blocks.get(k) {
                Some(a) => a.add(m),
                None => m.clone(),
            };
            blocks.insert(*k, sum);
        }
        Ok(GradedOperator {
            n: self.n,
            shift: self.shift,
            blocks,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&-S::one()))
    }

    pub fn scale(&self, c: &S) -> Self {
        GradedOperator {
            n: self.n,
            shift: self.shift,
            blocks: self.blocks.iter().map(|(k, m)| (*k, m.scale(c))).collect(),
        }
    }

    /// Largest entry modulus over all blocks.
    pub fn max_abs(&self) -> f64 {
        self.blocks.values().map(Matrix::max_abs).fold(0.0, f64::max)
    }
}

pub fn build_dbar<S: Scalar>(model: &ValidatedModel<S>) -> GradedOperator<S> {
    build_dbar_with(model, Execution::default())
}

pub fn build_partial<S: Scalar>(model: &ValidatedModel<S>) -> GradedOperator<S> {
    build_partial_with(model, Execution::default())
}

pub fn build_dbar_with<S: Scalar>(model: &ValidatedModel<S>, exec: Execution) -> GradedOperator<S> {
    GradedOperator::from_linear_map(model.n(), (0, 1), exec, |f| model.dbar(f))
}

pub fn build_partial_with<S: Scalar>(model: &ValidatedModel<S>, exec: Execution) -> GradedOperator<S> {
    GradedOperator::from_linear_map(model.n(), (1, 0), exec, |f| model.partial(f))
}

/// `w ∧ (·)` for a constant form `w` of bidegree `shift`.
pub fn left_wedge_operator<S: Scalar>(w: &InvariantForm<S>, shift: (i32, i32), exec: Execution) -> GradedOperator<S> {
    let w = w.clone();
    GradedOperator::from_linear_map(w.n(), shift, exec, move |f| w.wedge(f).expect("same dimension"))
}

/// The metric adjoint of `w ∧ (·)`; `shift` is the bidegree of `w`.
pub fn left_wedge_adjoint_operator<S: Scalar>(
    w: &InvariantForm<S>,
    shift: (i32, i32),
    exec: Execution,
) -> GradedOperator<S> {
    let w = w.clone();
    GradedOperator::from_linear_map(w.n(), (-shift.0, -shift.1), exec, move |f| {
        w.wedge_adjoint(f).expect("same dimension")
    })
}

/// `θ ∧ (·)` for a constant `(0,1)`-form.
pub fn wedge_operator<S: Scalar>(theta: &OneForm01<S>, exec: Execution) -> GradedOperator<S> {
    left_wedge_operator(&theta.to_form(), (0, 1), exec)
}

/// `i_{θ♯}`, the adjoint of [`wedge_operator`].
pub fn contraction_operator<S: Scalar>(theta: &OneForm01<S>, exec: Execution) -> GradedOperator<S> {
    left_wedge_adjoint_operator(&theta.to_form(), (0, 1), exec)
}

/// Matrix of `d` from total degree `k` to `k + 1`, in [`basis_total`] order.
pub fn build_d_total<S: Scalar>(model: &ValidatedModel<S>, k: usize) -> Matrix<S> {
    let n = model.n();
    let dom = basis_total(n, k);
    let cod = if k < 2 * n { basis_total(n, k + 1) } else { Vec::new() };
    matrix_of(n, &dom, &cod, |f| model.d(f))
}

// ---------------------------------------------------------------------------
// Model files

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    name: String,
    n: usize,
    #[serde(default = "default_mode")]
    mode: Mode,
    #[serde(default)]
    dphi: BTreeMap<String, Vec<RawTerm>>,
    #[serde(default)]
    theta_examples: BTreeMap<String, Vec<RawThetaTerm>>,
}

fn default_mode() -> Mode {
    Mode::Exact
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTerm {
    bidegree: String,
    i: usize,
    #[serde(default)]
    j: Option<usize>,
    #[serde(default)]
    jbar: Option<usize>,
    coeff: Value,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawThetaTerm {
    jbar: usize,
    coeff: Value,
}

/// Line and column (1-based) of the first occurrence of `needle` in `text`.
fn locate(text: &str, needle: &str) -> (usize, usize) {
    match text.find(needle) {
        Some(offset) => {
            let before = &text[..offset];
            let line = before.matches('\n').count() + 1;
            let column = before.rfind('\n').map_or(offset, |nl| offset - nl - 1) + 1;
            (line, column)
        }
        None => (0, 0),
    }
}

struct ParseCtx<'a> {
    text: &'a str,
}

impl ParseCtx<'_> {
    fn err_at(&self, needle: &str, message: String) -> Error {
        let (line, column) = locate(self.text, needle);
        Error::ModelParse { line, column, message }
    }

    fn coeff<S: Scalar>(&self, v: &Value) -> Result<S> {
        let s = match v {
            Value::String(s) => s.clone(),
            Value::Number(x) => x.to_string(),
            other => {
                return Err(self.err_at(&other.to_string(), format!("coefficient must be a string, got {other}")));
            }
        };
        S::parse(&s).map_err(|e| self.err_at(&format!("\"{s}\""), e.to_string()))
    }

    fn index(&self, what: &str, k: usize, n: usize) -> Result<usize> {
        if k == 0 || k > n {
            return Err(self.err_at(
                &format!("\"{what}\""),
                format!("index {what} = {k} outside 1..={n}"),
            ));
        }
        Ok(k - 1)
    }
}

impl<S: Scalar> LieComplexModel<S> {
    /// Parses the JSON model format. Indices in the file are 1-based.
    /// Coefficients are parsed in the grammar of `S` regardless of the
    /// file's `mode` field; see [`AnyModel::from_json`] for mode dispatch.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawModel = serde_json::from_str(text).map_err(|e| Error::ModelParse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        Self::from_raw(raw, text)
    }

    fn from_raw(raw: RawModel, text: &str) -> Result<Self> {
        let ctx = ParseCtx { text };
        let n = raw.n;
        if n == 0 || n > 16 {
            return Err(ctx.err_at("\"n\"", format!("complex dimension {n} outside 1..=16")));
        }
        let mut dphi = vec![InvariantForm::zero(n); n];
        for (key, terms) in &raw.dphi {
            let k: usize = key
                .trim()
                .parse()
                .map_err(|_| ctx.err_at(&format!("\"{key}\""), format!("dphi key {key:?} is not an integer")))?;
            let k = ctx.index("k", k, n)?;
            for t in terms {
                let c: S = ctx.coeff(&t.coeff)?;
                let i = ctx.index("i", t.i, n)?;
                let m = match t.bidegree.replace(' ', "").as_str() {
                    "(2,0)" => {
                        let j = t
                            .j
                            .ok_or_else(|| ctx.err_at("\"(2,0)\"", "(2,0) term needs field j".into()))?;
                        let j = ctx.index("j", j, n)?;
                        if i == j {
                            return Err(ctx.err_at("\"(2,0)\"", "(2,0) term needs i != j".into()));
                        }
                        // φ^i ∧ φ^j with i > j is −φ^j ∧ φ^i
                        let f = InvariantForm::phi(n, i).wedge(&InvariantForm::phi(n, j))?;
                        f.scale(&c)
                    }
                    "(1,1)" => {
                        let jbar = t
                            .jbar
                            .ok_or_else(|| ctx.err_at("\"(1,1)\"", "(1,1) term needs field jbar".into()))?;
                        let jbar = ctx.index("jbar", jbar, n)?;
                        let f = InvariantForm::phi(n, i).wedge(&InvariantForm::phi_bar(n, jbar))?;
                        f.scale(&c)
                    }
                    other => {
                        return Err(ctx.err_at(
                            &format!("\"{}\"", t.bidegree),
                            format!("bidegree {other:?} not allowed; use \"(2,0)\" or \"(1,1)\""),
                        ))
                    }
                };
                dphi[k] = dphi[k].add(&m)?;
            }
        }
        let mut model = LieComplexModel::new(raw.name, n, dphi)?;
        for (label, terms) in &raw.theta_examples {
            let mut theta = OneForm01::<S>::zero(n);
            for t in terms {
                let j = ctx.index("jbar", t.jbar, n)?;
                let c: S = ctx.coeff(&t.coeff)?;
                theta.coeffs[j] = theta.coeffs[j].clone() + c;
            }
            model = model.with_theta_example(label.clone(), theta);
        }
        Ok(model)
    }
}

/// A model in whichever arithmetic its file requests.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyModel {
    Exact(LieComplexModel<GaussRational>),
    Numeric(LieComplexModel<Complex64>),
}

impl AnyModel {
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawModel = serde_json::from_str(text).map_err(|e| Error::ModelParse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        match raw.mode {
            Mode::Exact => Ok(AnyModel::Exact(LieComplexModel::from_raw(raw, text)?)),
            Mode::Numeric => Ok(AnyModel::Numeric(LieComplexModel::from_raw(raw, text)?)),
        }
    }

    pub fn mode(&self) -> Mode {
        match self {
            AnyModel::Exact(_) => Mode::Exact,
            AnyModel::Numeric(_) => Mode::Numeric,
        }
    }

    pub fn name(&self) -> &str {
        match self {
            AnyModel::Exact(m) => m.name(),
            AnyModel::Numeric(m) => m.name(),
        }
    }

    pub fn n(&self) -> usize {
        match self {
            AnyModel::Exact(m) => m.n(),
            AnyModel::Numeric(m) => m.n(),
        }
    }

    pub fn validate(&self) -> ValidationReport {
        match self {
            AnyModel::Exact(m) => m.validate(),
            AnyModel::Numeric(m) => m.validate(),
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "model {} (n = {})", self.model, self.n)?;
        for g in &self.generators {
            writeln!(f, "  d^2 {}: {}", g.generator, if g.ok { "0" } else { &g.residual })?;
        }
        writeln!(f, "  unimodular: {}", self.unimodular)?;
        write!(f, "  {}", if self.passed { "pass" } else { "fail" })
    }
}

const BUNDLED: &[(&str, &str)] = &[
    ("torus_n1", include_str!("../models/torus_n1.json")),
    ("torus_n2", include_str!("../models/torus_n2.json")),
    ("torus_n3", include_str!("../models/torus_n3.json")),
    ("kodaira_thurston", include_str!("../models/kodaira_thurston.json")),
    ("hopf_surface", include_str!("../models/hopf_surface.json")),
    ("iwasawa", include_str!("../models/iwasawa.json")),
];

/// Names of the model files shipped with the crate.
pub fn bundled_names() -> impl Iterator<Item = &'static str> {
    BUNDLED.iter().map(|(n, _)| *n)
}

/// JSON source of a bundled model; accepts the name with or without `.json`.
pub fn bundled_source(name: &str) -> Option<&'static str> {
    let key = name.strip_suffix(".json").unwrap_or(name);
    let key = key.rsplit('/').next().unwrap_or(key);
    BUNDLED.iter().find(|(n, _)| *n == key).map(|(_, s)| *s)
}

/// Loads and validates a bundled exact-mode model.
pub fn bundled(name: &str) -> Result<ValidatedModel<GaussRational>> {
    let src = bundled_source(name).ok_or_else(|| Error::InvalidArgument(format!("no bundled model {name:?}")))?;
    LieComplexModel::from_json(src)?.into_validated()
}
