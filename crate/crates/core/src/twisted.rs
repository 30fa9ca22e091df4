//! Twisted differentials `∂̄_θ = ∂̄ + θ∧` and `d_θ = d + θ∧`, their
//! cohomology, the twisted Dirac operator, and the flat-model commutator and
//! primitive decomposition computations.
//!
//! All cohomology here is invariant-complex cohomology. It agrees with the
//! full cohomology on flat tori.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exterior::{basis, basis_total, InvariantForm, OneForm01};
use crate::linalg::{self, Matrix};
use crate::model::{
    build_dbar_with, build_d_total, left_wedge_adjoint_operator, left_wedge_operator, matrix_of, GradedOperator,
    ValidatedModel,
};
use crate::parallel::Execution;
use crate::scalar::{Mode, Scalar};

/// A finite cochain complex `C⁰ → C¹ → … → Cᵐ`. `maps[k]` has shape
/// `dims[k+1] × dims[k]`; the last map has zero rows.
#[derive(Clone, Debug, PartialEq)]
pub struct CochainComplex<S> {
    dims: Vec<usize>,
    maps: Vec<Matrix<S>>,
}

/// Dimension of one cohomology group together with the numeric spectral gap
/// it was read off from (absent in exact mode).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CohomologyDim {
    pub dim: usize,
    pub gap: Option<f64>,
}

impl<S: Scalar> CochainComplex<S> {
    pub fn new(dims: Vec<usize>, maps: Vec<Matrix<S>>) -> Result<Self> {
        if dims.len() != maps.len() {
            return Err(Error::InvalidArgument("one map per degree is required".into()));
        }
        for (k, m) in maps.iter().enumerate() {
            let rows = dims.get(k + 1).copied().unwrap_or(0);
            if m.cols() != dims[k] || m.rows() != rows {
                return Err(Error::InvalidArgument(format!(
                    "map in degree {k} has shape {}x{}, expected {rows}x{}",
                    m.rows(),
                    m.cols(),
                    dims[k]
                )));
            }
        }
        Ok(CochainComplex { dims, maps })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn maps(&self) -> &[Matrix<S>] {
        &self.maps
    }

    /// Largest entry of any composite `maps[k+1] ∘ maps[k]`.
    pub fn square_residual(&self) -> f64 {
        self.maps
            .windows(2)
            .map(|w| w[1].matmul(&w[0]).max_abs())
            .fold(0.0, f64::max)
    }

    pub fn is_complex(&self) -> bool {
        self.maps.windows(2).all(|w| {
            let c = w[1].matmul(&w[0]);
            match S::MODE {
                Mode::Exact => c.is_zero(),
                Mode::Numeric => c.max_abs() <= 1e-9 * (1.0 + w[0].max_abs() * w[1].max_abs()),
            }
        })
    }

    /// Cohomology dimensions per degree.
    ///
    /// Exact mode: `dim ker A_k − rank A_{k−1}` by fraction-free elimination.
    /// Numeric mode: nullity of the stacked matrix `[A_k; A_{k−1}^*]`, whose
    /// Gram matrix is the Laplacian in degree `k`, with the spectral gap.
    pub fn cohomology(&self, exec: Execution) -> Result<Vec<CohomologyDim>> {
        let degrees: Vec<usize> = (0..self.dims.len()).collect();
        match S::MODE {
            Mode::Exact => {
                let ranks: Vec<usize> = exec
                    .map(degrees.clone(), |k| S::rank(&self.maps[k]))
                    .into_iter()
                    .map(|r| r.rank)
                    .collect();
                Ok(degrees
                    .iter()
                    .map(|&k| {
                        let prev = if k == 0 { 0 } else { ranks[k - 1] };
                        CohomologyDim {
                            dim: self.dims[k] - ranks[k] - prev,
                            gap: None,
                        }
                    })
                    .collect())
            }
            Mode::Numeric => exec.try_map(degrees, |k| {
                if self.dims[k] == 0 {
                    return Ok(CohomologyDim { dim: 0, gap: None });
                }
                let stacked = if k == 0 {
                    self.maps[0].clone()
                } else {
                    self.maps[k].vstack(&self.maps[k - 1].conj_transpose())
                };
                let info = S::rank(&stacked);
                let rank = info.checked()?;
                Ok(CohomologyDim {
                    dim: self.dims[k] - rank,
                    gap: info.gap,
                })
            }),
        }
    }

    pub fn euler(&self, exec: Execution) -> Result<i64> {
        Ok(alternating_sum(self.cohomology(exec)?.iter().map(|d| d.dim)))
    }
}

pub fn alternating_sum(values: impl IntoIterator<Item = usize>) -> i64 {
    values
        .into_iter()
        .enumerate()
        .map(|(k, v)| if k % 2 == 0 { v as i64 } else { -(v as i64) })
        .sum()
}

/// The complex `(Ω^{p,•}, ∂̄_θ)` on an invariant model.
#[derive(Clone, Debug, PartialEq)]
pub struct TwistedComplex<S> {
    n: usize,
    p: usize,
    theta: OneForm01<S>,
    complex: CochainComplex<S>,
    dbar_closed_verified: bool,
}

impl<S: Scalar> TwistedComplex<S> {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn theta(&self) -> &OneForm01<S> {
        &self.theta
    }

    pub fn complex(&self) -> &CochainComplex<S> {
        &self.complex
    }

    /// `∂̄_θ : Ω^{p,q} → Ω^{p,q+1}`.
    pub fn map(&self, q: usize) -> &Matrix<S> {
        &self.complex.maps[q]
    }

    pub fn dbar_closed_verified(&self) -> bool {
        self.dbar_closed_verified
    }
}

fn check_dim<S: Scalar>(model: &ValidatedModel<S>, theta: &OneForm01<S>) -> Result<()> {
    if theta.n() != model.n() {
        return Err(Error::DimensionMismatch {
            left: model.n(),
            right: theta.n(),
        });
    }
    Ok(())
}

/// `∂̄θ`, which must vanish for `∂̄_θ` to square to zero.
pub fn dbar_of_theta<S: Scalar>(model: &ValidatedModel<S>, theta: &OneForm01<S>) -> InvariantForm<S> {
    model.dbar(&theta.to_form())
}

pub fn build_twisted<S: Scalar>(model: &ValidatedModel<S>, theta: &OneForm01<S>, p: usize) -> Result<TwistedComplex<S>> {
    check_dim(model, theta)?;
    let n = model.n();
    if p > n {
        return Err(Error::InvalidArgument(format!("p = {p} exceeds n = {n}")));
    }
    let obstruction = dbar_of_theta(model, theta);
    let closed = match S::MODE {
        Mode::Exact => obstruction.is_zero(),
        Mode::Numeric => obstruction.max_abs() <= crate::scalar::NUMERIC_ZERO_TOL,
    };
    if !closed {
        return Err(Error::NotDbarClosed {
            component: obstruction.to_string(),
        });
    }
    let t = theta.to_form();
    let dims: Vec<usize> = (0..=n).map(|q| basis(n, p, q).len()).collect();
    let maps = (0..=n)
        .map(|q| {
            let cod = if q < n { basis(n, p, q + 1) } else { Vec::new() };
            matrix_of(n, &basis(n, p, q), &cod, |f| {
                model.dbar(f).add(&t.wedge(f).expect("same dimension")).expect("same dimension")
            })
        })
        .collect();
    let complex = CochainComplex::new(dims, maps)?;
    if !complex.is_complex() {
        return Err(Error::InvalidModel(format!(
            "twisted operator does not square to zero (residual {:.3e})",
            complex.square_residual()
        )));
    }
    Ok(TwistedComplex {
        n,
        p,
        theta: theta.clone(),
        complex,
        dbar_closed_verified: true,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    ExactRank,
    NumericKernel,
}

/// Cohomology dimensions `dim H^{p,q}` for the rows `p` that were computed.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CohomologyTable {
    pub n: usize,
    pub provenance: Provenance,
    pub theta: String,
    /// `rows[p][q]`.
    pub rows: BTreeMap<usize, Vec<usize>>,
    /// Smallest spectral gap over all entries (numeric mode).
    pub min_gap: Option<f64>,
}

impl CohomologyTable {
    pub fn get(&self, p: usize, q: usize) -> Option<usize> {
        self.rows.get(&p).and_then(|r| r.get(q)).copied()
    }

    pub fn row(&self, p: usize) -> Option<&[usize]> {
        self.rows.get(&p).map(Vec::as_slice)
    }

    /// `Σ_q (−1)^q dim H^{p,q}`.
    pub fn euler(&self, p: usize) -> Option<i64> {
        self.row(p).map(|r| alternating_sum(r.iter().copied()))
    }

    pub fn is_complete(&self) -> bool {
        (0..=self.n).all(|p| self.rows.contains_key(&p))
    }

    pub fn is_zero(&self) -> bool {
        self.rows.values().flatten().all(|&d| d == 0)
    }
}

fn provenance<S: Scalar>() -> Provenance {
    match S::MODE {
        Mode::Exact => Provenance::ExactRank,
        Mode::Numeric => Provenance::NumericKernel,
    }
}

fn min_gap(dims: &[CohomologyDim]) -> Option<f64> {
    dims.iter().filter_map(|d| d.gap).reduce(f64::min)
}

/// Cohomology of one twisted complex as a single-row table.
pub fn cohomology_dims<S: Scalar>(tc: &TwistedComplex<S>) -> Result<CohomologyTable> {
    cohomology_dims_with(tc, Execution::default(), "")
}

pub fn cohomology_dims_with<S: Scalar>(tc: &TwistedComplex<S>, exec: Execution, label: &str) -> Result<CohomologyTable> {
    let dims = tc.complex.cohomology(exec)?;
    Ok(CohomologyTable {
        n: tc.n,
        provenance: provenance::<S>(),
        theta: label.to_string(),
        rows: BTreeMap::from([(tc.p, dims.iter().map(|d| d.dim).collect())]),
        min_gap: min_gap(&dims),
    })
}

/// Twisted Hodge table over the requested rows (all `p` when `ps` is `None`).
pub fn hodge_table<S: Scalar>(
    model: &ValidatedModel<S>,
    theta: &OneForm01<S>,
    ps: Option<&[usize]>,
    exec: Execution,
    label: &str,
) -> Result<CohomologyTable> {
    let rows: Vec<usize> = match ps {
        Some(ps) => ps.to_vec(),
        None => (0..=model.n()).collect(),
    };
    let results = exec.try_map(rows, |p| {
        let tc = build_twisted(model, theta, p)?;
        // Inner work stays sequential: the outer map already fans out.
        let dims = tc.complex.cohomology(Execution::Sequential)?;
        Ok::<_, Error>((p, dims))
    })?;
    let gaps: Vec<CohomologyDim> = results.iter().flat_map(|(_, d)| d.iter().copied()).collect();
    Ok(CohomologyTable {
        n: model.n(),
        provenance: provenance::<S>(),
        theta: label.to_string(),
        rows: results.into_iter().map(|(p, d)| (p, d.iter().map(|x| x.dim).collect())).collect(),
        min_gap: min_gap(&gaps),
    })
}

/// `Σ_q (−1)^q dim H_θ^{p,q}`.
pub fn twisted_euler<S: Scalar>(tc: &TwistedComplex<S>) -> Result<i64> {
    tc.complex.euler(Execution::default())
}

/// Even-to-odd block of `D_{tθ} = ∂̄ + ∂̄* + t θ∧ + t i_{θ♯}` on `Ω^{p,•}`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiracBlock<S> {
    pub n: usize,
    pub p: usize,
    pub t: S,
    /// Dimensions of `Ω^{p,q}` for even `q`, in increasing `q`.
    pub even_dims: Vec<usize>,
    pub odd_dims: Vec<usize>,
    pub matrix: Matrix<S>,
}

impl<S: Scalar> DiracBlock<S> {
    pub fn domain_dim(&self) -> usize {
        self.matrix.cols()
    }

    pub fn codomain_dim(&self) -> usize {
        self.matrix.rows()
    }

    /// The odd-to-even block, which is the conjugate transpose.
    pub fn adjoint_block(&self) -> Matrix<S> {
        self.matrix.conj_transpose()
    }
}

/// Offset of each `q` inside the even or odd direct sum, and the two totals.
fn parity_offsets(n: usize, p: usize) -> (Vec<usize>, usize, usize) {
    let mut offsets = vec![0; n + 1];
    let (mut even, mut odd) = (0, 0);
    for (q, offset) in offsets.iter_mut().enumerate() {
        let d = basis(n, p, q).len();
        let total = if q % 2 == 0 { &mut even } else { &mut odd };
        *offset = *total;
        *total += d;
    }
    (offsets, even, odd)
}

pub fn dirac_assemble<S: Scalar>(model: &ValidatedModel<S>, theta: &OneForm01<S>, p: usize, t: S) -> Result<DiracBlock<S>> {
    check_dim(model, theta)?;
    let n = model.n();
    if p > n {
        return Err(Error::InvalidArgument(format!("p = {p} exceeds n = {n}")));
    }
    let exec = Execution::Sequential;
    let dbar = build_dbar_with(model, exec);
    let scaled = theta.scale(&t);
    let w = left_wedge_operator(&scaled.to_form(), (0, 1), exec);
    let c = left_wedge_adjoint_operator(&scaled.to_form(), (0, 1), exec);
    let (offsets, even, odd) = parity_offsets(n, p);
    let mut matrix = Matrix::zeros(odd, even);
    for q in (0..=n).step_by(2) {
        // up: ∂̄ + tθ∧ into q + 1
        if q < n {
            let up = dbar.block_or_zero(p, q).add(&w.block_or_zero(p, q));
            matrix.insert(offsets[q + 1], offsets[q], &up);
        }
        // down: ∂̄* + t i_{θ♯} into q − 1
        if q > 0 {
            let down = dbar
                .block_or_zero(p, q - 1)
                .conj_transpose()
                .add(&c.block_or_zero(p, q));
            matrix.insert(offsets[q - 1], offsets[q], &down);
        }
    }
    Ok(DiracBlock {
        n,
        p,
        t,
        even_dims: (0..=n).step_by(2).map(|q| basis(n, p, q).len()).collect(),
        odd_dims: (1..=n).step_by(2).map(|q| basis(n, p, q).len()).collect(),
        matrix,
    })
}

/// `dim ker − dim coker` of the even-to-odd block.
pub fn dirac_index<S: Scalar>(block: &DiracBlock<S>) -> Result<i64> {
    let (ke, ko) = kernel_even_odd(block)?;
    Ok(ke as i64 - ko as i64)
}

/// Kernel dimensions of `D` on the even side and of `D*` on the odd side.
pub fn kernel_even_odd<S: Scalar>(block: &DiracBlock<S>) -> Result<(usize, usize)> {
    let rank = S::rank(&block.matrix).checked()?;
    Ok((block.domain_dim() - rank, block.codomain_dim() - rank))
}

/// `dim H_θ^{0,0}`, refusing when `θ` is `∂̄`-exact.
///
/// The invariant functions are the constants, so `θ` is `∂̄`-exact exactly
/// when it is zero; the check is still carried out as a rank test on the
/// `∂̄` block of functions.
pub fn h0_twisted<S: Scalar>(model: &ValidatedModel<S>, theta: &OneForm01<S>) -> Result<usize> {
    let tc = build_twisted(model, theta, 0)?;
    let dims = tc.complex.cohomology(Execution::Sequential)?;
    let n = model.n();
    let on_functions = matrix_of(n, &basis(n, 0, 0), &basis(n, 0, 1), |f| model.dbar(f));
    let target = Matrix::from_columns(n, &[theta.coeffs.clone()]);
    let r0 = S::rank(&on_functions).checked()?;
    let r1 = S::rank(&on_functions.hstack(&target)).checked()?;
    if r0 == r1 {
        return Err(Error::PreconditionExact { dim: dims[0].dim });
    }
    Ok(dims[0].dim)
}

/// Morse–Novikov cohomology of `d_θ = d + θ∧` for a closed real 1-form.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MorseNovikovResult {
    pub dims: Vec<usize>,
    pub euler: i64,
    pub untwisted_dims: Vec<usize>,
    pub untwisted_euler: i64,
}

/// `θ` must be a real 1-form (`θ̄ = θ`) in the complex coframe.
pub fn real_morse_novikov<S: Scalar>(model: &ValidatedModel<S>, theta: &InvariantForm<S>) -> Result<MorseNovikovResult> {
    let n = model.n();
    if theta.n() != n {
        return Err(Error::DimensionMismatch { left: n, right: theta.n() });
    }
    if !theta.is_zero() && theta.degree() != Some(1) {
        return Err(Error::InvalidArgument("theta must be a 1-form".into()));
    }
    let real_defect = theta.sub(&theta.conjugate())?;
    if real_defect.max_abs() > crate::scalar::NUMERIC_ZERO_TOL {
        return Err(Error::InvalidArgument(format!("theta is not real: theta - conj(theta) = {real_defect}")));
    }
    let dtheta = model.d(theta);
    if dtheta.max_abs() > crate::scalar::NUMERIC_ZERO_TOL || (S::MODE == Mode::Exact && !dtheta.is_zero()) {
        return Err(Error::NotClosed {
            component: dtheta.to_string(),
        });
    }
    let build = |twist: &InvariantForm<S>| -> Result<CochainComplex<S>> {
        let dims: Vec<usize> = (0..=2 * n).map(|k| basis_total(n, k).len()).collect();
        let maps = (0..=2 * n)
            .map(|k| {
                let dom = basis_total(n, k);
                let cod = if k < 2 * n { basis_total(n, k + 1) } else { Vec::new() };
                let wedge = matrix_of(n, &dom, &cod, |f| twist.wedge(f).expect("same dimension"));
                build_d_total(model, k).add(&wedge)
            })
            .collect();
        CochainComplex::new(dims, maps)
    };
    let exec = Execution::Sequential;
    let twisted = build(theta)?.cohomology(exec)?;
    let plain = build(&InvariantForm::zero(n))?.cohomology(exec)?;
    let dims: Vec<usize> = twisted.iter().map(|d| d.dim).collect();
    let untwisted_dims: Vec<usize> = plain.iter().map(|d| d.dim).collect();
    Ok(MorseNovikovResult {
        euler: alternating_sum(dims.iter().copied()),
        untwisted_euler: alternating_sum(untwisted_dims.iter().copied()),
        dims,
        untwisted_dims,
    })
}

/// Largest entries of the commutators of `Δ_∂̄` with `θ∧`, `i_{θ♯}`, `θ̄∧`
/// and `i_{θ̄♯}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CommutatorReport {
    pub with_wedge: f64,
    pub with_contraction: f64,
    pub with_conjugate_wedge: f64,
    pub with_conjugate_contraction: f64,
    /// All four commutators vanish (exactly, in exact mode).
    pub all_zero: bool,
}

fn require_flat<S: Scalar>(model: &ValidatedModel<S>) -> Result<()> {
    if !model.is_abelian() {
        return Err(Error::NotFlat(format!("model {} has nonzero structure constants", model.name())));
    }
    Ok(())
}

/// `Δ_∂̄ = ∂̄∂̄* + ∂̄*∂̄` as a degree-preserving graded operator.
pub fn dbar_laplacian<S: Scalar>(model: &ValidatedModel<S>, exec: Execution) -> Result<GradedOperator<S>> {
    let dbar = build_dbar_with(model, exec);
    let adj = dbar.adjoint();
    dbar.compose(&adj)?.add(&adj.compose(&dbar)?)
}

pub fn commutator_check<S: Scalar>(model: &ValidatedModel<S>, theta: &OneForm01<S>) -> Result<CommutatorReport> {
    check_dim(model, theta)?;
    require_flat(model)?;
    let exec = Execution::default();
    let lap = dbar_laplacian(model, exec)?;
    let t = theta.to_form();
    let tbar = t.conjugate();
    let ops = [
        left_wedge_operator(&t, (0, 1), exec),
        left_wedge_adjoint_operator(&t, (0, 1), exec),
        left_wedge_operator(&tbar, (1, 0), exec),
        left_wedge_adjoint_operator(&tbar, (1, 0), exec),
    ];
    let mut norms = [0.0; 4];
    let mut all_zero = true;
    for (k, op) in ops.iter().enumerate() {
        let comm = lap.compose(op)?.sub(&op.compose(&lap)?)?;
        norms[k] = comm.max_abs();
        all_zero &= match S::MODE {
            Mode::Exact => comm.is_zero(),
            Mode::Numeric => norms[k] <= 1e-12,
        };
    }
    Ok(CommutatorReport {
        with_wedge: norms[0],
        with_contraction: norms[1],
        with_conjugate_wedge: norms[2],
        with_conjugate_contraction: norms[3],
        all_zero,
    })
}

/// Primitive dimensions around `(p, q)` and the reconstruction of `h^{p,q}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PrimitiveDecomposition {
    pub p: usize,
    pub q: usize,
    /// `s^{p,q}`.
    pub s: usize,
    /// `s^{p−1,q}`.
    pub s_p_minus: usize,
    /// `s^{p,q−1}`.
    pub s_q_minus: usize,
    /// `s^{p−1,q−1}`.
    pub s_both_minus: usize,
    /// Untwisted `h^{p,q}`.
    pub h: usize,
    pub reconstructs: bool,
}

impl PrimitiveDecomposition {
    pub fn sum(&self) -> usize {
        self.s + self.s_p_minus + self.s_q_minus + self.s_both_minus
    }
}

/// Dimensions `s^{a,b}` of harmonic forms killed by `i_{θ♯}` and `i_{θ̄♯}`,
/// for `0 ≤ a, b ≤ n`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PrimitiveTable {
    pub n: usize,
    pub s: Vec<Vec<usize>>,
}

impl PrimitiveTable {
    /// `s^{a,b}`, zero outside `0..=n`.
    pub fn get(&self, a: i64, b: i64) -> usize {
        if a < 0 || b < 0 || a > self.n as i64 || b > self.n as i64 {
            return 0;
        }
        self.s[a as usize][b as usize]
    }
}

pub fn primitive_table<S: Scalar>(model: &ValidatedModel<S>, theta: &OneForm01<S>) -> Result<PrimitiveTable> {
    check_dim(model, theta)?;
    require_flat(model)?;
    if theta.is_zero() {
        return Err(Error::InvalidArgument("theta must be nonzero".into()));
    }
    let n = model.n();
    let exec = Execution::default();
    let lap = dbar_laplacian(model, exec)?;
    let t = theta.to_form();
    let i_theta = left_wedge_adjoint_operator(&t, (0, 1), exec);
    let i_theta_bar = left_wedge_adjoint_operator(&t.conjugate(), (1, 0), exec);
    let keys: Vec<(usize, usize)> = (0..=n).flat_map(|a| (0..=n).map(move |b| (a, b))).collect();
    let dims = exec.try_map(keys, |(a, b)| {
        let stacked = lap
            .block_or_zero(a, b)
            .vstack(&i_theta.block_or_zero(a, b))
            .vstack(&i_theta_bar.block_or_zero(a, b));
        let rank = S::rank(&stacked).checked()?;
        Ok::<_, Error>(stacked.cols() - rank)
    })?;
    Ok(PrimitiveTable {
        n,
        s: dims.chunks(n + 1).map(<[usize]>::to_vec).collect(),
    })
}

pub fn primitive_decomposition<S: Scalar>(
    model: &ValidatedModel<S>,
    theta: &OneForm01<S>,
    p: usize,
    q: usize,
) -> Result<PrimitiveDecomposition> {
    let n = model.n();
    if p > n || q > n {
        return Err(Error::InvalidArgument(format!("bidegree ({p}, {q}) out of range for n = {n}")));
    }
    let table = primitive_table(model, theta)?;
    let zero = OneForm01::zero(n);
    let h_row = build_twisted(model, &zero, p)?.complex.cohomology(Execution::Sequential)?;
    Ok(decomposition_at(&table, p, q, h_row[q].dim))
}

pub fn decomposition_at(table: &PrimitiveTable, p: usize, q: usize, h: usize) -> PrimitiveDecomposition {
    let (a, b) = (p as i64, q as i64);
    let mut d = PrimitiveDecomposition {
        p,
        q,
        s: table.get(a, b),
        s_p_minus: table.get(a - 1, b),
        s_q_minus: table.get(a, b - 1),
        s_both_minus: table.get(a - 1, b - 1),
        h,
        reconstructs: false,
    };
    d.reconstructs = d.sum() == h;
    d
}

/// Index of `D_{tθ}` from singular values of the dense block, bypassing the
/// exact path (used to cross-check numeric mode).
pub fn numeric_rank_of<S: Scalar>(m: &Matrix<S>) -> linalg::RankInfo {
    linalg::numeric_rank(&m.to_dmatrix())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exterior::binomial;
    use crate::model::{bundled, torus_model};
    use crate::scalar::GaussRational;
    use crate::Complex64;

    type Q = GaussRational;

    fn q(a: i64) -> Q {
        Q::from_i64(a)
    }

    fn torus(n: usize) -> ValidatedModel<Q> {
        torus_model(n).unwrap().into_validated().unwrap()
    }

    fn phi_bar(n: usize, j: usize, c: i64) -> OneForm01<Q> {
        OneForm01::basis(n, j, q(c))
    }

    #[test]
    fn untwisted_torus_is_binomial() {
        let m = torus(2);
        let t = hodge_table(&m, &OneForm01::zero(2), None, Execution::Sequential, "0").unwrap();
        assert_eq!(t.row(1).unwrap(), &[2, 4, 2]);
        for p in 0..=2 {
            for qq in 0..=2 {
                assert_eq!(t.get(p, qq).unwrap(), binomial(2, p) * binomial(2, qq));
            }
        }
    }

    #[test]
    fn twisted_torus_vanishes() {
        let m = torus(2);
        let t = hodge_table(&m, &phi_bar(2, 0, 1), None, Execution::Parallel, "phi_bar_1").unwrap();
        assert!(t.is_complete() && t.is_zero());
        let m1 = torus(1);
        let tc = build_twisted(&m1, &phi_bar(1, 0, 2), 0).unwrap();
        assert_eq!(cohomology_dims(&tc).unwrap().row(0).unwrap(), &[0, 0]);
    }

    #[test]
    fn torus_twisted_operator_is_wedge_only() {
        let m = torus(2);
        let theta = phi_bar(2, 0, 1);
        let tc = build_twisted(&m, &theta, 0).unwrap();
        let w = crate::model::wedge_operator(&theta, Execution::Sequential);
        assert_eq!(tc.map(0), w.block(0, 0).unwrap());
        assert_eq!(tc.map(1), w.block(0, 1).unwrap());
    }

    #[test]
    fn dbar_closedness_is_enforced() {
        let kt = bundled("kodaira_thurston").unwrap();
        // ∂̄φ̄¹ = 0 and ∂̄φ̄² = 0 with dφ² = φ¹∧φ̄¹
        assert!(build_twisted(&kt, &phi_bar(2, 0, 1), 1).is_ok());
        assert!(build_twisted(&kt, &phi_bar(2, 1, 1), 0).is_ok());
        let iw = bundled("iwasawa").unwrap();
        match build_twisted(&iw, &phi_bar(3, 2, 1), 0) {
            Err(Error::NotDbarClosed { component }) => assert!(component.contains("phi_bar_1^phi_bar_2")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn euler_is_independent_of_theta() {
        for name in ["torus_n2", "kodaira_thurston"] {
            let m = bundled(name).unwrap();
            for p in 0..=2 {
                let a = twisted_euler(&build_twisted(&m, &OneForm01::zero(2), p).unwrap()).unwrap();
                let b = twisted_euler(&build_twisted(&m, &phi_bar(2, 0, 1), p).unwrap()).unwrap();
                assert_eq!(a, b, "{name} p={p}");
            }
        }
    }

    #[test]
    fn dirac_index_is_constant() {
        for name in ["torus_n1", "torus_n2", "kodaira_thurston", "hopf_surface"] {
            let m = bundled(name).unwrap();
            let n = m.n();
            for p in 0..=n {
                let chi = twisted_euler(&build_twisted(&m, &OneForm01::zero(n), p).unwrap()).unwrap();
                for t in [0, 1, 5] {
                    let b = dirac_assemble(&m, &phi_bar(n, 0, 1), p, q(t)).unwrap();
                    assert_eq!(dirac_index(&b).unwrap(), chi, "{name} p={p} t={t}");
                }
            }
        }
    }

    #[test]
    fn kernel_split_examples() {
        let m = torus(2);
        let b = dirac_assemble(&m, &phi_bar(2, 0, 1), 0, q(1)).unwrap();
        assert_eq!(kernel_even_odd(&b).unwrap(), (0, 0));
        let b0 = dirac_assemble(&m, &OneForm01::zero(2), 0, q(1)).unwrap();
        assert_eq!(kernel_even_odd(&b0).unwrap(), (2, 2));
        let mn = torus(1).to_numeric();
        let theta = OneForm01::basis(1, 0, Complex64::new(1.0, 0.0));
        let b = dirac_assemble(&mn, &theta, 0, Complex64::new(0.001, 0.0)).unwrap();
        assert_eq!(kernel_even_odd(&b).unwrap(), (0, 0));
        assert!(numeric_rank_of(&b.matrix).gap.is_some());
    }

    #[test]
    fn kernel_split_matches_harmonic_dims() {
        for name in ["kodaira_thurston", "hopf_surface", "torus_n3"] {
            let m = bundled(name).unwrap();
            let n = m.n();
            for theta in [OneForm01::zero(n), phi_bar(n, 0, 1)] {
                for p in 0..=n {
                    let Ok(tc) = build_twisted(&m, &theta, p) else { continue };
                    let dims = tc.complex().cohomology(Execution::Sequential).unwrap();
                    let even: usize = dims.iter().step_by(2).map(|d| d.dim).sum();
                    let odd: usize = dims.iter().skip(1).step_by(2).map(|d| d.dim).sum();
                    let b = dirac_assemble(&m, &theta, p, q(1)).unwrap();
                    assert_eq!(kernel_even_odd(&b).unwrap(), (even, odd), "{name} p={p}");
                }
            }
        }
    }

    #[test]
    fn exact_and_numeric_modes_agree() {
        for name in ["kodaira_thurston", "hopf_surface", "torus_n2", "iwasawa"] {
            let m = bundled(name).unwrap();
            let mn = m.to_numeric();
            let n = m.n();
            let theta = phi_bar(n, 0, 1);
            let a = hodge_table(&m, &theta, None, Execution::Parallel, "").unwrap();
            let b = hodge_table(&mn, &theta.map_scalars(Scalar::to_c64), None, Execution::Parallel, "").unwrap();
            assert_eq!(a.rows, b.rows, "{name}");
            assert!(b.min_gap.is_none_or(|g| g >= 10.0));
        }
    }

    #[test]
    fn h0_examples() {
        let m = torus(2);
        assert_eq!(h0_twisted(&m, &phi_bar(2, 0, 1)).unwrap(), 0);
        assert_eq!(h0_twisted(&m, &OneForm01::zero(2)).unwrap_err(), Error::PreconditionExact { dim: 1 });
        let kt = bundled("kodaira_thurston").unwrap();
        assert_eq!(h0_twisted(&kt, &phi_bar(2, 0, 1)).unwrap(), 0);
    }

    #[test]
    fn morse_novikov_examples() {
        let half = Q::from_ratio(1, 2);
        // dx = (φ + φ̄)/2 in the coframe φ = dz
        let dx = |n: usize| {
            InvariantForm::phi(n, 0).add(&InvariantForm::phi_bar(n, 0)).unwrap().scale(&half)
        };
        let r = real_morse_novikov(&torus(1), &dx(1)).unwrap();
        assert_eq!(r.dims, vec![0, 0, 0]);
        assert_eq!(r.euler, 0);
        let r0 = real_morse_novikov(&torus(1), &InvariantForm::zero(1)).unwrap();
        assert_eq!(r0.dims, vec![1, 2, 1]);
        let r2 = real_morse_novikov(&torus(2), &dx(2)).unwrap();
        assert!(r2.dims.iter().all(|&d| d == 0));
        assert_eq!(r2.untwisted_dims, vec![1, 4, 6, 4, 1]);
        let complex_theta = InvariantForm::phi(1, 0);
        assert!(real_morse_novikov(&torus(1), &complex_theta).is_err());
    }

    #[test]
    fn morse_novikov_refuses_non_closed_forms() {
        let kt = bundled("kodaira_thurston").unwrap();
        // d(φ² + φ̄²) = φ¹∧φ̄¹ + conj(φ¹∧φ̄¹) = 0
        let closed = InvariantForm::phi(2, 1).add(&InvariantForm::phi_bar(2, 1)).unwrap();
        assert!(real_morse_novikov(&kt, &closed).is_ok());
        // d(iφ² − iφ̄²) = 2i φ¹∧φ̄¹
        let i = Q::imag_unit();
        let open = InvariantForm::phi(2, 1).scale(&i).add(&InvariantForm::phi_bar(2, 1).scale(&-i)).unwrap();
        assert!(matches!(real_morse_novikov(&kt, &open), Err(Error::NotClosed { .. })));
    }

    #[test]
    fn commutators_vanish_on_flat_models() {
        let r = commutator_check(&torus(2), &phi_bar(2, 0, 1)).unwrap();
        assert!(r.all_zero);
        let theta = OneForm01::new(vec![q(1), q(0), q(1)]);
        assert!(commutator_check(&torus(3), &theta).unwrap().all_zero);
        let kt = bundled("kodaira_thurston").unwrap();
        assert!(matches!(commutator_check(&kt, &phi_bar(2, 0, 1)), Err(Error::NotFlat(_))));
    }

    #[test]
    fn primitive_decomposition_examples() {
        let m = torus(2);
        let theta = phi_bar(2, 0, 1);
        let d = primitive_decomposition(&m, &theta, 1, 1).unwrap();
        assert_eq!((d.s, d.s_p_minus, d.s_q_minus, d.s_both_minus), (1, 1, 1, 1));
        assert!(d.reconstructs && d.h == 4);
        let d0 = primitive_decomposition(&m, &theta, 0, 0).unwrap();
        assert_eq!((d0.s, d0.s_p_minus, d0.s_q_minus, d0.s_both_minus), (1, 0, 0, 0));
        let m3 = torus(3);
        let d3 = primitive_decomposition(&m3, &phi_bar(3, 0, 1), 2, 1).unwrap();
        assert_eq!(d3.sum(), 9);
        assert!(d3.reconstructs);
        let table = primitive_table(&m3, &phi_bar(3, 0, 1)).unwrap();
        for a in 0..=3 {
            for b in 0..=3 {
                assert_eq!(table.s[a][b], binomial(2, a) * binomial(2, b));
            }
        }
    }
}
