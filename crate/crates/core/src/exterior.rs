//! Exterior algebra over a rank-`n` complex coframe `φ¹..φⁿ, φ̄¹..φ̄ⁿ`.
//!
//! The coframe is unitary: every basis monomial `φ^I ∧ φ̄^J` has norm one and
//! distinct monomials are orthogonal. Integration over the (invariant) model
//! is normalized to total volume one, so global inner products equal the
//! pointwise ones computed here.
//!
//! Generators are indexed `0..2n`: index `i < n` is `φ^{i+1}`, index `n + j`
//! is `φ̄^{j+1}`. A monomial in canonical order (holomorphic factors first,
//! each block ascending) is exactly a bitmask over these generator indices,
//! which makes wedge signs a matter of counting inversions.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Holomorphic and antiholomorphic index sets of a basis monomial, stored as
/// bitmasks (bit `i` set means index `i + 1` is present).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct MultiIndexPQ {
    holo: u32,
    anti: u32,
}

fn lex_cmp(mut a: u32, mut b: u32) -> Ordering {
    loop {
        match (a == 0, b == 0) {
            (true, true) => return Ordering::Equal,
            (true, false) => return Ordering::Less,
            (false, true) => return Ordering::Greater,
            _ => {}
        }
        let (la, lb) = (a.trailing_zeros(), b.trailing_zeros());
        if la != lb {
            return la.cmp(&lb);
        }
        a &= a - 1;
        b &= b - 1;
    }
}

impl Ord for MultiIndexPQ {
    fn cmp(&self, other: &Self) -> Ordering {
        lex_cmp(self.holo, other.holo).then_with(|| lex_cmp(self.anti, other.anti))
    }
}

impl PartialOrd for MultiIndexPQ {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn mask_of(indices: &[usize]) -> u32 {
    indices.iter().fold(0, |m, &i| {
        assert!(i < 32, "index {i} out of range");
        m | (1 << i)
    })
}

fn indices_of(mut mask: u32) -> Vec<usize> {
    let mut out = Vec::with_capacity(mask.count_ones() as usize);
    while mask != 0 {
        out.push(mask.trailing_zeros() as usize);
        mask &= mask - 1;
    }
    out
}

impl MultiIndexPQ {
    pub const EMPTY: MultiIndexPQ = MultiIndexPQ { holo: 0, anti: 0 };

    /// From zero-based index lists. Duplicates collapse, so callers must pass
    /// sets.
    pub fn new(holo: &[usize], anti: &[usize]) -> Self {
        MultiIndexPQ {
            holo: mask_of(holo),
            anti: mask_of(anti),
        }
    }

    pub fn from_masks(holo: u32, anti: u32) -> Self {
        MultiIndexPQ { holo, anti }
    }

    pub fn holo_mask(&self) -> u32 {
        self.holo
    }

    pub fn anti_mask(&self) -> u32 {
        self.anti
    }

    pub fn holo(&self) -> Vec<usize> {
        indices_of(self.holo)
    }

    pub fn anti(&self) -> Vec<usize> {
        indices_of(self.anti)
    }

    pub fn p(&self) -> usize {
        self.holo.count_ones() as usize
    }

    pub fn q(&self) -> usize {
        self.anti.count_ones() as usize
    }

    pub fn degree(&self) -> usize {
        self.p() + self.q()
    }

    /// Generator bitmask in canonical order for complex dimension `n`.
    pub fn combined(&self, n: usize) -> u64 {
        self.holo as u64 | ((self.anti as u64) << n)
    }

    pub fn from_combined(n: usize, mask: u64) -> Self {
        let low = (1u64 << n) - 1;
        MultiIndexPQ {
            holo: (mask & low) as u32,
            anti: (mask >> n) as u32,
        }
    }

    /// The monomial containing every generator.
    pub fn top(n: usize) -> Self {
        let all = ((1u64 << n) - 1) as u32;
        MultiIndexPQ { holo: all, anti: all }
    }

    pub fn contains_generator(&self, n: usize, g: usize) -> bool {
        self.combined(n) & (1 << g) != 0
    }

    /// Complex conjugate monomial: `conj(φ^I ∧ φ̄^J) = (−1)^{pq} φ^J ∧ φ̄^I`.
    /// Returns `(negative, monomial)`.
    pub fn conjugate(&self) -> (bool, MultiIndexPQ) {
        let negative = (self.p() * self.q()) % 2 == 1;
        (
            negative,
            MultiIndexPQ {
                holo: self.anti,
                anti: self.holo,
            },
        )
    }

    pub fn label(&self) -> String {
        if self.holo == 0 && self.anti == 0 {
            return "1".to_string();
        }
        let mut parts: Vec<String> = self.holo().iter().map(|i| format!("phi_{}", i + 1)).collect();
        parts.extend(self.anti().iter().map(|j| format!("phi_bar_{}", j + 1)));
        parts.join("^")
    }
}

impl fmt::Display for MultiIndexPQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Sign of `A ∧ B` relative to the canonical monomial `A ∪ B`, or `None`
/// when the factors share a generator.
pub fn wedge_sign(a: u64, b: u64) -> Option<bool> {
    if a & b != 0 {
        return None;
    }
    let mut inversions = 0u32;
    let mut rest = b;
    while rest != 0 {
        let y = rest.trailing_zeros();
        let above = if y >= 63 { 0 } else { a >> (y + 1) };
        inversions += above.count_ones();
        rest &= rest - 1;
    }
    Some(inversions % 2 == 1)
}

/// `m1 ∧ m2` as `(negative, monomial)`.
pub fn wedge_monomials(n: usize, m1: MultiIndexPQ, m2: MultiIndexPQ) -> Option<(bool, MultiIndexPQ)> {
    let (a, b) = (m1.combined(n), m2.combined(n));
    wedge_sign(a, b).map(|neg| (neg, MultiIndexPQ::from_combined(n, a | b)))
}

/// Zero-based combinations of `k` elements from `0..n`, in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k <= n {
        rec(0, n, k, &mut Vec::with_capacity(k), &mut out);
    }
    out
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Basis of bidegree `(p, q)`, lexicographic on `(holo, anti)`.
pub fn basis(n: usize, p: usize, q: usize) -> Vec<MultiIndexPQ> {
    let holos = combinations(n, p);
    let antis = combinations(n, q);
    let mut out = Vec::with_capacity(holos.len() * antis.len());
    for h in &holos {
        for a in &antis {
            out.push(MultiIndexPQ::new(h, a));
        }
    }
    out
}

/// Basis of total degree `k`: bidegrees `(0,k), (1,k-1), ...` concatenated
/// in order of increasing `p`.
pub fn basis_total(n: usize, k: usize) -> Vec<MultiIndexPQ> {
    (0..=k.min(n))
        .filter(|&p| k - p <= n)
        .flat_map(|p| basis(n, p, k - p))
        .collect()
}

/// A finite linear combination of constant-coefficient basis monomials.
/// Zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct InvariantForm<S> {
    n: usize,
    terms: BTreeMap<MultiIndexPQ, S>,
}

impl<S: Scalar> InvariantForm<S> {
    pub fn zero(n: usize) -> Self {
        InvariantForm {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n: usize, c: S) -> Self {
        Self::monomial(n, MultiIndexPQ::EMPTY, c)
    }

    pub fn monomial(n: usize, m: MultiIndexPQ, c: S) -> Self {
        let mut f = Self::zero(n);
        f.add_term(m, c);
        f
    }

    /// `φ^{i+1}` for zero-based `i`.
    pub fn phi(n: usize, i: usize) -> Self {
        Self::monomial(n, MultiIndexPQ::new(&[i], &[]), S::one())
    }

    /// `φ̄^{j+1}` for zero-based `j`.
    pub fn phi_bar(n: usize, j: usize) -> Self {
        Self::monomial(n, MultiIndexPQ::new(&[], &[j]), S::one())
    }

    /// Generator by combined index `g ∈ 0..2n`.
    pub fn generator(n: usize, g: usize) -> Self {
        if g < n {
            Self::phi(n, g)
        } else {
            Self::phi_bar(n, g - n)
        }
    }

    pub fn from_terms(n: usize, terms: impl IntoIterator<Item = (MultiIndexPQ, S)>) -> Self {
        let mut f = Self::zero(n);
        for (m, c) in terms {
            f.add_term(m, c);
        }
        f
    }

    /// Coefficient vector `v` against `basis`.
    pub fn from_coords(n: usize, basis: &[MultiIndexPQ], v: &[S]) -> Self {
        Self::from_terms(n, basis.iter().copied().zip(v.iter().cloned()))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &BTreeMap<MultiIndexPQ, S> {
        &self.terms
    }

    pub fn coeff(&self, m: &MultiIndexPQ) -> S {
        self.terms.get(m).cloned().unwrap_or_else(S::zero)
    }

    pub fn coords(&self, basis: &[MultiIndexPQ]) -> Vec<S> {
        basis.iter().map(|m| self.coeff(m)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, m: MultiIndexPQ, c: S) {
        if c.is_zero() {
            return;
        }
        let v = match self.terms.remove(&m) {
            Some(old) => old + c,
            None => c,
        };
        if !v.is_zero() {
            self.terms.insert(m, v);
        }
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                left: self.n,
                right: other.n,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(*m, c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&-S::one()))
    }

    pub fn scale(&self, c: &S) -> Self {
        Self::from_terms(self.n, self.terms.iter().map(|(m, v)| (*m, c.clone() * v.clone())))
    }

    /// `(p, q)` when every term has that bidegree; `None` for mixed or zero forms.
    pub fn bidegree(&self) -> Option<(usize, usize)> {
        let mut it = self.terms.keys().map(|m| (m.p(), m.q()));
        let first = it.next()?;
        it.all(|d| d == first).then_some(first)
    }

    pub fn degree(&self) -> Option<usize> {
        let mut it = self.terms.keys().map(MultiIndexPQ::degree);
        let first = it.next()?;
        it.all(|d| d == first).then_some(first)
    }

    pub fn project(&self, p: usize, q: usize) -> Self {
        Self::from_terms(
            self.n,
            self.terms
                .iter()
                .filter(|(m, _)| m.p() == p && m.q() == q)
                .map(|(m, c)| (*m, c.clone())),
        )
    }

    pub fn wedge(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let mut out = Self::zero(self.n);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                if let Some((neg, m)) = wedge_monomials(self.n, *m1, *m2) {
                    let c = c1.clone() * c2.clone();
                    out.add_term(m, if neg { -c } else { c });
                }
            }
        }
        Ok(out)
    }

    /// Pointwise Hermitian inner product, conjugate-linear in `other`.
    pub fn inner(&self, other: &Self) -> Result<S> {
        self.check_dim(other)?;
        Ok(self.terms.iter().fold(S::zero(), |acc, (m, c)| match other.terms.get(m) {
            Some(d) => acc + c.clone() * d.conj(),
            None => acc,
        }))
    }

    pub fn norm_sqr(&self) -> S {
        self.terms.values().fold(S::zero(), |acc, c| acc + c.norm_sqr())
    }

    pub fn conjugate(&self) -> Self {
        Self::from_terms(
            self.n,
            self.terms.iter().map(|(m, c)| {
                let (neg, mc) = m.conjugate();
                let v = c.conj();
                (mc, if neg { -v } else { v })
            }),
        )
    }

    /// The metric adjoint of `self ∧ (·)` applied to `a`.
    pub fn wedge_adjoint(&self, a: &Self) -> Result<Self> {
        self.check_dim(a)?;
        let n = self.n;
        let mut out = Self::zero(n);
        for (w, cw) in &self.terms {
            let wm = w.combined(n);
            for (m, cm) in &a.terms {
                let mm = m.combined(n);
                if mm & wm != wm {
                    continue;
                }
                let rest = mm & !wm;
                let neg = wedge_sign(wm, rest).expect("disjoint by construction");
                let c = cw.conj() * cm.clone();
                out.add_term(MultiIndexPQ::from_combined(n, rest), if neg { -c } else { c });
            }
        }
        Ok(out)
    }

    pub fn map_scalars<T: Scalar>(&self, f: impl Fn(&S) -> T) -> InvariantForm<T> {
        InvariantForm::from_terms(self.n, self.terms.iter().map(|(m, c)| (*m, f(c))))
    }

    /// Largest coefficient modulus (numeric size of a residual).
    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(Scalar::abs_f64).fold(0.0, f64::max)
    }
}

impl<S: Scalar> fmt::Display for InvariantForm<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> =
            self.terms.iter().map(|(m, c)| format!("({c})*{}", m.label())).collect();
        f.write_str(&parts.join(" + "))
    }
}

/// A constant `(0,1)`-form `Σ c_j φ̄^j`.
#[derive(Clone, Debug, PartialEq)]
pub struct OneForm01<S> {
    pub coeffs: Vec<S>,
}

/// A constant `(1,0)`-form `Σ c_j φ^j`.
#[derive(Clone, Debug, PartialEq)]
pub struct OneForm10<S> {
    pub coeffs: Vec<S>,
}

impl<S: Scalar> OneForm01<S> {
    pub fn new(coeffs: Vec<S>) -> Self {
        OneForm01 { coeffs }
    }

    pub fn zero(n: usize) -> Self {
        OneForm01 {
            coeffs: vec![S::zero(); n],
        }
    }

    /// `c · φ̄^{j+1}`.
    pub fn basis(n: usize, j: usize, c: S) -> Self {
        let mut f = Self::zero(n);
        f.coeffs[j] = c;
        f
    }

    pub fn n(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Scalar::is_zero)
    }

    pub fn to_form(&self) -> InvariantForm<S> {
        let n = self.n();
        InvariantForm::from_terms(
            n,
            self.coeffs.iter().enumerate().map(|(j, c)| (MultiIndexPQ::new(&[], &[j]), c.clone())),
        )
    }

    /// The `(0,1)` part of a form.
    pub fn from_form(f: &InvariantForm<S>) -> Self {
        let n = f.n();
        OneForm01 {
            coeffs: (0..n).map(|j| f.coeff(&MultiIndexPQ::new(&[], &[j]))).collect(),
        }
    }

    /// `|θ|²` under the unitary convention.
    pub fn norm_sqr(&self) -> S {
        self.coeffs.iter().fold(S::zero(), |acc, c| acc + c.norm_sqr())
    }

    pub fn scale(&self, c: &S) -> Self {
        OneForm01 {
            coeffs: self.coeffs.iter().map(|v| c.clone() * v.clone()).collect(),
        }
    }

    /// `θ̄`, a `(1,0)`-form.
    pub fn conjugate(&self) -> OneForm10<S> {
        OneForm10 {
            coeffs: self.coeffs.iter().map(Scalar::conj).collect(),
        }
    }

    pub fn map_scalars<T: Scalar>(&self, f: impl Fn(&S) -> T) -> OneForm01<T> {
        OneForm01 {
            coeffs: self.coeffs.iter().map(f).collect(),
        }
    }
}

impl<S: Scalar> OneForm10<S> {
    pub fn new(coeffs: Vec<S>) -> Self {
        OneForm10 { coeffs }
    }

    pub fn zero(n: usize) -> Self {
        OneForm10 {
            coeffs: vec![S::zero(); n],
        }
    }

    pub fn n(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Scalar::is_zero)
    }

    pub fn to_form(&self) -> InvariantForm<S> {
        let n = self.n();
        InvariantForm::from_terms(
            n,
            self.coeffs.iter().enumerate().map(|(i, c)| (MultiIndexPQ::new(&[i], &[]), c.clone())),
        )
    }

    pub fn from_form(f: &InvariantForm<S>) -> Self {
        let n = f.n();
        OneForm10 {
            coeffs: (0..n).map(|i| f.coeff(&MultiIndexPQ::new(&[i], &[]))).collect(),
        }
    }

    pub fn norm_sqr(&self) -> S {
        self.coeffs.iter().fold(S::zero(), |acc, c| acc + c.norm_sqr())
    }

    pub fn conjugate(&self) -> OneForm01<S> {
        OneForm01 {
            coeffs: self.coeffs.iter().map(Scalar::conj).collect(),
        }
    }
}

pub fn wedge<S: Scalar>(a: &InvariantForm<S>, b: &InvariantForm<S>) -> Result<InvariantForm<S>> {
    a.wedge(b)
}

pub fn inner<S: Scalar>(a: &InvariantForm<S>, b: &InvariantForm<S>) -> Result<S> {
    a.inner(b)
}

/// `i_{θ♯} a`, realized as the metric adjoint of `θ ∧ (·)`.
pub fn contract_adjoint<S: Scalar>(theta: &OneForm01<S>, a: &InvariantForm<S>) -> Result<InvariantForm<S>> {
    theta.to_form().wedge_adjoint(a)
}

/// `i^n (−1)^{n(n−1)/2}`: the coefficient of the canonical top monomial in
/// the real volume form `Π_k (i φ^k ∧ φ̄^k)`. Equal to one for even `n`.
pub fn volume_coefficient<S: Scalar>(n: usize) -> S {
    let mut c = S::one();
    for _ in 0..n {
        c = c * S::imag_unit();
    }
    if (n * (n.saturating_sub(1)) / 2) % 2 == 1 {
        -c
    } else {
        c
    }
}

pub fn volume_form<S: Scalar>(n: usize) -> InvariantForm<S> {
    InvariantForm::monomial(n, MultiIndexPQ::top(n), volume_coefficient(n))
}

/// Complex-linear Hodge star determined by `u ∧ ∗v̄ = ⟨u, v⟩ dV`.
pub fn hodge_star<S: Scalar>(a: &InvariantForm<S>) -> Result<InvariantForm<S>> {
    let n = a.n();
    if !a.is_zero() && a.degree().is_none() {
        return Err(Error::NonHomogeneous);
    }
    let top = MultiIndexPQ::top(n).combined(n);
    let c_n: S = volume_coefficient(n);
    let mut out = InvariantForm::zero(n);
    for (m, c) in a.terms() {
        let (conj_neg, target) = m.conjugate();
        let t = target.combined(n);
        let comp = top & !t;
        let s_neg = wedge_sign(t, comp).expect("complement is disjoint");
        let v = c.clone() * c_n.clone();
        out.add_term(MultiIndexPQ::from_combined(n, comp), if conj_neg ^ s_neg { -v } else { v });
    }
    Ok(out)
}

/// `|θ∧β|² + |i_{θ♯}β|² − |θ|²|β|²`; identically zero.
pub fn pointwise_norm_identity<S: Scalar>(theta: &OneForm01<S>, beta: &InvariantForm<S>) -> Result<S> {
    let t = theta.to_form();
    let w = t.wedge(beta)?;
    let c = t.wedge_adjoint(beta)?;
    Ok(w.norm_sqr() + c.norm_sqr() - theta.norm_sqr() * beta.norm_sqr())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::GaussRational;

    type Q = GaussRational;
    type F = InvariantForm<Q>;

    fn q(a: i64) -> Q {
        Q::from_i64(a)
    }

    #[test]
    fn odd_form_squares_to_zero() {
        let p = F::phi(2, 0);
        assert!(p.wedge(&p).unwrap().is_zero());
    }

    #[test]
    fn canonical_order_has_no_sign() {
        let w = F::phi(2, 0).wedge(&F::phi_bar(2, 0)).unwrap();
        assert_eq!(w, F::monomial(2, MultiIndexPQ::new(&[0], &[0]), q(1)));
    }

    /// Parity oracle: sort the factor list by adjacent transpositions.
    fn sort_sign(mut gens: Vec<usize>) -> bool {
        let mut swaps = 0;
        for i in 0..gens.len() {
            for j in 0..gens.len() - 1 - i {
                if gens[j] > gens[j + 1] {
                    gens.swap(j, j + 1);
                    swaps += 1;
                }
            }
        }
        swaps % 2 == 1
    }

    #[test]
    fn reversed_order_picks_up_a_sign() {
        let w = F::phi_bar(2, 0).wedge(&F::phi(2, 0)).unwrap();
        // φ̄¹ is generator 2, φ¹ generator 0 for n = 2
        let neg = sort_sign(vec![2, 0]);
        assert!(neg);
        assert_eq!(w, F::monomial(2, MultiIndexPQ::new(&[0], &[0]), q(-1)));
    }

    #[test]
    fn wedge_sign_agrees_with_transposition_count() {
        let n = 3;
        for a in 0u64..64 {
            for b in 0u64..64 {
                let ga: Vec<usize> = (0..6).filter(|i| a & (1 << i) != 0).collect();
                let gb: Vec<usize> = (0..6).filter(|i| b & (1 << i) != 0).collect();
                let expected = if a & b != 0 {
                    None
                } else {
                    Some(sort_sign(ga.iter().chain(&gb).copied().collect()))
                };
                assert_eq!(wedge_sign(a, b), expected, "{a:b} {b:b}");
            }
        }
        let _ = n;
    }

    #[test]
    fn inner_product_examples() {
        let m = F::phi(2, 0).wedge(&F::phi_bar(2, 1)).unwrap();
        assert_eq!(m.inner(&m).unwrap(), q(1));
        assert_eq!(F::phi(2, 0).inner(&F::phi(2, 1)).unwrap(), q(0));
        let c = Q::from_parts(2, 1, 1, 1);
        let a = F::phi_bar(2, 0).scale(&c);
        assert_eq!(a.inner(&F::phi_bar(2, 0)).unwrap(), c);
        assert_eq!(F::phi_bar(2, 0).inner(&a).unwrap(), c.conj());
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let err = F::phi(2, 0).wedge(&F::phi(3, 0)).unwrap_err();
        assert_eq!(err, Error::DimensionMismatch { left: 2, right: 3 });
        assert!(F::phi(2, 0).inner(&F::phi(1, 0)).is_err());
    }

    #[test]
    fn contraction_examples() {
        let theta = OneForm01::basis(2, 0, q(1));
        assert_eq!(contract_adjoint(&theta, &F::phi_bar(2, 0)).unwrap(), F::constant(2, q(1)));
        assert!(contract_adjoint(&theta, &F::phi(2, 0)).unwrap().is_zero());
        // φ̄¹ ∧ φ¹ = −φ¹ ∧ φ̄¹, so the adjoint picks up a sign
        let mixed = F::phi(2, 0).wedge(&F::phi_bar(2, 0)).unwrap();
        assert_eq!(contract_adjoint(&theta, &mixed).unwrap(), F::phi(2, 0).scale(&q(-1)));
    }

    #[test]
    fn contraction_matches_brute_force_adjoint() {
        // ⟨φ̄¹∧u, v⟩ over all basis u determines i_{θ♯} v.
        let n = 2;
        let theta = OneForm01::basis(n, 0, q(1));
        let v = F::phi(n, 0).wedge(&F::phi_bar(n, 0)).unwrap();
        let mut expected = F::zero(n);
        for k in 0..=2 * n {
            for u in basis_total(n, k) {
                let uf = F::monomial(n, u, q(1));
                let val = theta.to_form().wedge(&uf).unwrap().inner(&v).unwrap();
                expected.add_term(u, val.conj());
            }
        }
        assert_eq!(contract_adjoint(&theta, &v).unwrap(), expected);
    }

    #[test]
    fn star_examples() {
        let n = 2;
        let star1 = hodge_star(&F::constant(n, q(1))).unwrap();
        assert_eq!(star1, F::monomial(n, MultiIndexPQ::top(n), q(1)));
        assert_eq!(hodge_star(&volume_form::<Q>(n)).unwrap(), F::constant(n, q(1)));
        for n in 1..=4 {
            let phi = F::phi(n, 0);
            let ss = hodge_star(&hodge_star(&phi).unwrap()).unwrap();
            assert_eq!(ss, phi.scale(&q(-1)), "n = {n}");
            assert_eq!(hodge_star(&volume_form::<Q>(n)).unwrap(), F::constant(n, q(1)));
        }
    }

    #[test]
    fn star_defining_property_on_basis_pairs() {
        for n in 1..=3 {
            let vol = volume_form::<Q>(n);
            for k in 0..=2 * n {
                let b = basis_total(n, k);
                for u in &b {
                    for v in &b {
                        let uf = F::monomial(n, *u, q(1));
                        let vf = F::monomial(n, *v, q(1));
                        let lhs = uf.wedge(&hodge_star(&vf.conjugate()).unwrap()).unwrap();
                        let rhs = vol.scale(&uf.inner(&vf).unwrap());
                        assert_eq!(lhs, rhs, "n={n} u={u} v={v}");
                    }
                }
            }
        }
    }

    #[test]
    fn star_rejects_mixed_degree() {
        let mixed = F::constant(2, q(1)).add(&F::phi(2, 0)).unwrap();
        assert_eq!(hodge_star(&mixed).unwrap_err(), Error::NonHomogeneous);
    }

    #[test]
    fn norm_identity_examples() {
        let theta = OneForm01::basis(2, 0, q(1));
        assert_eq!(pointwise_norm_identity(&theta, &F::constant(2, q(1))).unwrap(), q(0));
        assert_eq!(pointwise_norm_identity(&theta, &F::phi_bar(2, 0)).unwrap(), q(0));
    }

    #[test]
    fn basis_enumeration_is_lexicographic() {
        let b = basis(3, 1, 2);
        assert_eq!(b.len(), 9);
        let mut sorted = b.clone();
        sorted.sort();
        assert_eq!(b, sorted);
        assert_eq!(b[0], MultiIndexPQ::new(&[0], &[0, 1]));
        assert_eq!(b[1], MultiIndexPQ::new(&[0], &[0, 2]));
        assert_eq!(combinations(4, 2).len(), binomial(4, 2));
    }

    #[test]
    fn conjugation_is_an_involution() {
        let c = Q::from_parts(1, 2, -3, 1);
        let f = F::phi(3, 0).wedge(&F::phi_bar(3, 2)).unwrap().wedge(&F::phi_bar(3, 1)).unwrap().scale(&c);
        assert_eq!(f.conjugate().conjugate(), f);
        assert_eq!(f.conjugate().bidegree(), Some((2, 1)));
    }
}
