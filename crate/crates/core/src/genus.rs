//! Hodge tables, the χ_y-genus, fixed-point sums, and dimension bookkeeping
//! from primitive (transverse) tables.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exterior::OneForm01;
use crate::model::ValidatedModel;
use crate::parallel::Execution;
use crate::scalar::Scalar;
use crate::twisted::{build_twisted, primitive_table, CohomologyTable};

/// `h[p][q]` for `0 ≤ p, q ≤ n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HodgeTable {
    pub n: usize,
    pub h: Vec<Vec<usize>>,
}

impl HodgeTable {
    pub fn new(n: usize, h: Vec<Vec<usize>>) -> Result<Self> {
        if h.len() != n + 1 || h.iter().any(|r| r.len() != n + 1) {
            return Err(Error::InvalidArgument(format!("Hodge table must be {0}x{0}", n + 1)));
        }
        Ok(HodgeTable { n, h })
    }

    pub fn zeros(n: usize) -> Self {
        HodgeTable {
            n,
            h: vec![vec![0; n + 1]; n + 1],
        }
    }

    /// `h^{p,q} = C(n,p) C(n,q)`, the table of a complex torus.
    pub fn torus(n: usize) -> Self {
        let b = |k| crate::exterior::binomial(n, k);
        HodgeTable {
            n,
            h: (0..=n).map(|p| (0..=n).map(|q| b(p) * b(q)).collect()).collect(),
        }
    }

    /// The projective line: `h^{0,0} = h^{1,1} = 1`.
    pub fn projective_line() -> Self {
        HodgeTable {
            n: 1,
            h: vec![vec![1, 0], vec![0, 1]],
        }
    }

    pub fn from_cohomology(t: &CohomologyTable) -> Result<Self> {
        if !t.is_complete() {
            return Err(Error::InvalidArgument("cohomology table is missing rows".into()));
        }
        Ok(HodgeTable {
            n: t.n,
            h: (0..=t.n).map(|p| t.rows[&p].clone()).collect(),
        })
    }

    pub fn get(&self, p: usize, q: usize) -> usize {
        self.h[p][q]
    }

    /// Künneth product: `h^{p,q}(X×Y) = Σ h^{a,b}(X) h^{p−a,q−b}(Y)`.
    pub fn product(&self, other: &HodgeTable) -> HodgeTable {
        let n = self.n + other.n;
        let mut out = HodgeTable::zeros(n);
        for (a, row) in self.h.iter().enumerate() {
            for (b, &x) in row.iter().enumerate() {
                for (c, row2) in other.h.iter().enumerate() {
                    for (d, &y) in row2.iter().enumerate() {
                        out.h[a + c][b + d] += x * y;
                    }
                }
            }
        }
        out
    }

    /// `h^{p,q} = h^{n−p,n−q}` everywhere.
    pub fn is_serre_symmetric(&self) -> bool {
        let n = self.n;
        (0..=n).all(|p| (0..=n).all(|q| self.h[p][q] == self.h[n - p][n - q]))
    }

    pub fn chi(&self) -> ChiPolynomial {
        ChiPolynomial {
            coeffs: self
                .h
                .iter()
                .map(|row| crate::twisted::alternating_sum(row.iter().copied()))
                .collect(),
        }
    }
}

impl fmt::Display for HodgeTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (p, row) in self.h.iter().enumerate() {
            let cells: Vec<String> = row.iter().map(usize::to_string).collect();
            writeln!(f, "p={p}: {}", cells.join(" "))?;
        }
        Ok(())
    }
}

/// `χ_y = Σ_p χ_p y^p`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ChiPolynomial {
    pub coeffs: Vec<i64>,
}

/// Values of `χ_y` at `y = 0, 1, −1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SpecialValues {
    /// `χ_0`, the arithmetic genus.
    pub arithmetic_genus: i64,
    /// `χ_1`; the signature only for Kähler manifolds of even complex dimension.
    pub at_one: i64,
    /// True when the caller declared the table Kähler of even dimension.
    pub at_one_is_signature: bool,
    /// `χ_{−1} = Σ (−1)^{p+q} h^{p,q}`, the Euler number.
    pub euler_number: i64,
}

impl ChiPolynomial {
    pub fn zero(n: usize) -> Self {
        ChiPolynomial { coeffs: vec![0; n + 1] }
    }

    pub fn at(&self, y: i64) -> i64 {
        self.coeffs.iter().rev().fold(0, |acc, &c| acc * y + c)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    /// Special values; `kahler_even` marks the `y = 1` value as a signature.
    pub fn special_values(&self, n: usize, kahler_even: bool) -> SpecialValues {
        SpecialValues {
            arithmetic_genus: self.at(0),
            at_one: self.at(1),
            at_one_is_signature: kahler_even && n % 2 == 0,
            euler_number: self.at(-1),
        }
    }

    /// Equality up to trailing zero coefficients.
    pub fn same_as(&self, other: &ChiPolynomial) -> bool {
        let len = self.coeffs.len().max(other.coeffs.len());
        (0..len).all(|k| self.coeffs.get(k).unwrap_or(&0) == other.coeffs.get(k).unwrap_or(&0))
    }
}

impl fmt::Display for ChiPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        for (k, &c) in self.coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let sign = if c < 0 { "-" } else { "+" };
            let mag = c.unsigned_abs();
            let mono = match k {
                0 => String::new(),
                1 => "y".to_string(),
                _ => format!("y^{k}"),
            };
            let body = if k > 0 && mag == 1 { mono } else { format!("{mag}{mono}") };
            if out.is_empty() {
                out = if c < 0 { format!("-{body}") } else { body };
            } else {
                out.push_str(&format!(" {sign} {body}"));
            }
        }
        if out.is_empty() {
            out.push('0');
        }
        f.write_str(&out)
    }
}

/// `Σ_P (−y)^{s_P}` over fixed points with data `s_P ∈ [0, n]`.
pub fn kosniowski_sum(n: usize, data: &[usize]) -> Result<ChiPolynomial> {
    let mut poly = ChiPolynomial::zero(n);
    for &s in data {
        if s > n {
            return Err(Error::FixedPointOutOfRange { s, n });
        }
        poly.coeffs[s] += if s % 2 == 0 { 1 } else { -1 };
    }
    Ok(poly)
}

/// Primitive transverse dimensions `s^{p,q}`, `0 ≤ p, q ≤ n−1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct STable {
    pub n: usize,
    pub s: Vec<Vec<usize>>,
}

impl STable {
    pub fn new(n: usize, s: Vec<Vec<usize>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::DimensionTooSmall(0));
        }
        if s.len() != n || s.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidArgument(format!("s-table must be {0}x{0}", n)));
        }
        for p in 0..n {
            for q in 0..p {
                if s[p][q] != s[q][p] {
                    return Err(Error::AsymmetricSTable { p, q });
                }
            }
        }
        Ok(STable { n, s })
    }

    /// `s^{a,b}`, zero outside `0..n`.
    pub fn get(&self, a: i64, b: i64) -> usize {
        let n = self.n as i64;
        if a < 0 || b < 0 || a >= n || b >= n {
            return 0;
        }
        self.s[a as usize][b as usize]
    }
}

/// Hodge numbers from a primitive table:
/// `h^{p,q} = s^{p,q} + s^{p,q−1}` for `p + q ≤ n − 1`,
/// `h^{p,n−p} = s^{p−1,n−p} + s^{p,n−p−1}`, and Serre duality above.
pub fn vaisman_hodge(st: &STable) -> HodgeTable {
    let n = st.n;
    let mut t = HodgeTable::zeros(n);
    for p in 0..=n {
        for q in 0..=n - p {
            let (a, b) = (p as i64, q as i64);
            t.h[p][q] = if p + q < n {
                st.get(a, b) + st.get(a, b - 1)
            } else {
                st.get(a - 1, n as i64 - a) + st.get(a, n as i64 - a - 1)
            };
        }
    }
    for p in 0..=n {
        for q in 0..=n {
            if p + q > n {
                t.h[p][q] = t.h[n - p][n - q];
            }
        }
    }
    t
}

/// One row of the telescoping computation of `χ_p` on a flat model.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TelescopeRow {
    pub p: usize,
    /// `Σ_q (−1)^q h^{p,q}` from the untwisted cohomology.
    pub chi_from_h: i64,
    /// `Σ_q (−1)^q (s^{p,q} + s^{p,q−1} + s^{p−1,q} + s^{p−1,q−1})`.
    pub chi_from_s: i64,
    /// `s^{p,−1} + (−1)^n s^{p,n} + s^{p−1,−1} + (−1)^n s^{p−1,n}`: what is
    /// left after the alternating sum telescopes.
    pub boundary: i64,
    pub vanishes: bool,
}

/// Replays the four-term telescoping of `χ_p` from primitive dimensions.
pub fn parallel_decomposition_chi<S: Scalar>(model: &ValidatedModel<S>, theta: &OneForm01<S>) -> Result<Vec<TelescopeRow>> {
    let n = model.n();
    let table = primitive_table(model, theta)?;
    let zero = OneForm01::zero(n);
    let rows = Execution::default().try_map((0..=n).collect(), |p| {
        let dims = build_twisted(model, &zero, p)?.complex().cohomology(Execution::Sequential)?;
        Ok::<_, Error>((p, dims))
    })?;
    let sign_n: i64 = if n % 2 == 0 { 1 } else { -1 };
    Ok(rows
        .into_iter()
        .map(|(p, dims)| {
            let a = p as i64;
            let chi_from_h = crate::twisted::alternating_sum(dims.iter().map(|d| d.dim));
            let chi_from_s = crate::twisted::alternating_sum((0..=n as i64).map(|b| {
                table.get(a, b) + table.get(a, b - 1) + table.get(a - 1, b) + table.get(a - 1, b - 1)
            }));
            let s = |x: i64, y: i64| table.get(x, y) as i64;
            let boundary = s(a, -1) + sign_n * s(a, n as i64) + s(a - 1, -1) + sign_n * s(a - 1, n as i64);
            TelescopeRow {
                p,
                chi_from_h,
                chi_from_s,
                boundary,
                vanishes: chi_from_h == 0 && chi_from_s == 0 && boundary == 0,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{bundled, torus_model};
    use crate::scalar::GaussRational;
    use proptest::prelude::*;

    #[test]
    fn torus_genus_vanishes() {
        let chi = HodgeTable::torus(2).chi();
        assert!(chi.is_zero());
        let sv = chi.special_values(2, true);
        assert_eq!((sv.arithmetic_genus, sv.at_one, sv.euler_number), (0, 0, 0));
        assert!(sv.at_one_is_signature);
    }

    #[test]
    fn projective_line() {
        let chi = HodgeTable::projective_line().chi();
        assert_eq!(chi.coeffs, vec![1, -1]);
        assert_eq!(chi.to_string(), "1 - y");
        assert_eq!(chi.at(-1), 2);
        assert!(!chi.special_values(1, true).at_one_is_signature);
    }

    #[test]
    fn kosniowski_examples() {
        let cp1 = HodgeTable::projective_line();
        assert_eq!(kosniowski_sum(1, &[0, 1]).unwrap(), cp1.chi());
        assert!(kosniowski_sum(3, &[]).unwrap().is_zero());
        let sq = cp1.product(&cp1);
        assert_eq!(sq.h, vec![vec![1, 0, 0], vec![0, 2, 0], vec![0, 0, 1]]);
        let k = kosniowski_sum(2, &[0, 1, 1, 2]).unwrap();
        assert_eq!(k.coeffs, vec![1, -2, 1]);
        assert_eq!(k, sq.chi());
        assert_eq!(kosniowski_sum(1, &[2]).unwrap_err(), Error::FixedPointOutOfRange { s: 2, n: 1 });
    }

    #[test]
    fn hopf_s_table_matches_bundled_model() {
        let st = STable::new(2, vec![vec![1, 0], vec![0, 0]]).unwrap();
        let t = vaisman_hodge(&st);
        assert_eq!(t.h, vec![vec![1, 1, 0], vec![0, 0, 0], vec![0, 1, 1]]);
        assert!(t.is_serre_symmetric());
        assert!(t.chi().is_zero());
        let hopf = bundled("hopf_surface").unwrap();
        let computed = crate::twisted::hodge_table(&hopf, &OneForm01::zero(2), None, Execution::Sequential, "0").unwrap();
        assert_eq!(HodgeTable::from_cohomology(&computed).unwrap(), t);
    }

    #[test]
    fn s_table_edge_cases() {
        let t = vaisman_hodge(&STable::new(2, vec![vec![0, 0], vec![0, 0]]).unwrap());
        assert_eq!(t, HodgeTable::zeros(2));
        let t3 = vaisman_hodge(&STable::new(3, vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 0]]).unwrap());
        assert!(t3.chi().is_zero());
        assert_eq!(
            STable::new(2, vec![vec![0, 1], vec![0, 0]]).unwrap_err(),
            Error::AsymmetricSTable { p: 1, q: 0 }
        );
    }

    #[test]
    fn telescoping_on_tori() {
        for n in 2..=3 {
            let m = torus_model::<GaussRational>(n).unwrap().into_validated().unwrap();
            let theta = OneForm01::basis(n, 0, GaussRational::one());
            let rows = parallel_decomposition_chi(&m, &theta).unwrap();
            assert_eq!(rows.len(), n + 1);
            assert!(rows.iter().all(|r| r.vanishes), "{rows:?}");
        }
    }

    fn symmetric_table(n: usize, seed: Vec<usize>) -> STable {
        let mut s = vec![vec![0; n]; n];
        let mut k = 0;
        for p in 0..n {
            for q in p..n {
                s[p][q] = seed[k];
                s[q][p] = seed[k];
                k += 1;
            }
        }
        STable::new(n, s).unwrap()
    }

    proptest! {
        #[test]
        fn vaisman_tables_have_vanishing_genus(n in 2usize..=4, seed in proptest::collection::vec(0usize..=3, 10)) {
            let t = vaisman_hodge(&symmetric_table(n, seed));
            prop_assert!(t.is_serre_symmetric());
            prop_assert!(t.chi().is_zero());
        }

        #[test]
        fn product_chi_is_multiplicative(a in 1usize..=3, lines in 1usize..=3) {
            let mut y = HodgeTable::projective_line();
            for _ in 1..lines {
                y = y.product(&HodgeTable::projective_line());
            }
            let x = HodgeTable::torus(a);
            let (cx, cy) = (x.chi().coeffs, y.chi().coeffs);
            let mut expected = vec![0; cx.len() + cy.len() - 1];
            for (i, u) in cx.iter().enumerate() {
                for (j, v) in cy.iter().enumerate() {
                    expected[i + j] += u * v;
                }
            }
            prop_assert_eq!(x.product(&y).chi().coeffs, expected);
        }
    }
}
