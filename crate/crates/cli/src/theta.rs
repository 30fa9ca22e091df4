//! Twisting forms for invariant models: a label from the model file or an
//! inline sum such as `phi_bar_1`, `2*phi_bar_1 - (1/2+i)*phi_bar_2`, `0`.

use twisted_hodge::model::ValidatedModel;
use twisted_hodge::{Error, OneForm01, Result, Scalar};

pub fn resolve<S: Scalar>(model: &ValidatedModel<S>, text: &str) -> Result<OneForm01<S>> {
    if let Some(theta) = model.theta_examples().get(text.trim()) {
        return Ok(theta.clone());
    }
    parse_inline(model.n(), text)
}

fn bad(text: &str, msg: impl std::fmt::Display) -> Error {
    Error::InvalidArgument(format!("theta {text:?}: {msg}"))
}

pub fn parse_inline<S: Scalar>(n: usize, text: &str) -> Result<OneForm01<S>> {
    let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if compact.is_empty() {
        return Err(bad(text, "empty expression"));
    }
    let mut theta = OneForm01::<S>::zero(n);
    for (negative, term) in split_terms(&compact).map_err(|m| bad(text, m))? {
        if term == "0" {
            continue;
        }
        let (coeff, generator) = match term.rfind("phi_bar_") {
            Some(pos) => {
                let c = &term[..pos];
                let c = c.strip_suffix('*').unwrap_or(c);
                let c = c.strip_prefix('(').and_then(|r| r.strip_suffix(')')).unwrap_or(c);
                let c = if c.is_empty() { S::one() } else { S::parse(c)? };
                (c, &term[pos + 8..])
            }
            None => return Err(bad(text, format!("term {term:?} is not of the form [c*]phi_bar_j"))),
        };
        let j: usize = generator
            .parse()
            .map_err(|_| bad(text, format!("bad index in {term:?}")))?;
        if j == 0 || j > n {
            return Err(bad(text, format!("index {j} outside 1..={n}")));
        }
        let c = if negative { -coeff } else { coeff };
        theta.coeffs[j - 1] = theta.coeffs[j - 1].clone() + c;
    }
    Ok(theta)
}

fn split_terms(s: &str) -> std::result::Result<Vec<(bool, &str)>, String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    let mut negative = false;
    for (i, b) in s.bytes().enumerate() {
        match b {
            b'(' => depth += 1,
            b')' => depth -= 1,
            b'+' | b'-' if depth == 0 => {
                if i > start {
                    out.push((negative, &s[start..i]));
                } else if i > 0 {
                    return Err("dangling sign".into());
                }
                negative = b == b'-';
                start = i + 1;
            }
            _ => {}
        }
    }
    if depth != 0 {
        return Err("unbalanced parentheses".into());
    }
    if start >= s.len() {
        return Err("dangling sign".into());
    }
    out.push((negative, &s[start..]));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use twisted_hodge::GaussRational;

    #[test]
    fn inline_sums() {
        let t: OneForm01<GaussRational> = parse_inline(2, "2*phi_bar_1 - (1/2+i)*phi_bar_2").unwrap();
        assert_eq!(t.coeffs[0], GaussRational::from_i64(2));
        assert_eq!(t.coeffs[1], -GaussRational::from_parts(1, 2, 1, 1));
        let z: OneForm01<GaussRational> = parse_inline(2, "0").unwrap();
        assert!(z.is_zero());
        assert!(parse_inline::<GaussRational>(2, "phi_bar_3").is_err());
        assert!(parse_inline::<GaussRational>(2, "phi_1").is_err());
        assert!(parse_inline::<GaussRational>(2, "phi_bar_1+").is_err());
    }
}
