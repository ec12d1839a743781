//! Text form of polynomials: terms joined by `+`, each term a product of an
//! optional integer coefficient, Laurent factors `T1^e` and pd factors `Y1[k]`,
//! for example `-3*T1^2*Y1[2] + T1^-1`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::laurent::{LaurentPoly, Mono, MAX_VARS};
use crate::pd::PdPoly;
use crate::scalar::Modulus;

struct Term {
    coeff: i128,
    laurent: Mono,
    pd: Vec<(String, u32)>,
}

fn perr(pos: usize, msg: impl Into<String>) -> Error {
    Error::Parse { pos, msg: msg.into() }
}

fn parse_terms(s: &str, nvars: usize) -> Result<Vec<Term>> {
    let mut terms = Vec::new();
    let mut offset = 0;
    let trimmed = s.trim();
    if trimmed.is_empty() {
        return Err(perr(0, "empty input"));
    }
    for chunk in s.split('+') {
        let start = offset;
        offset += chunk.len() + 1;
        let t = chunk.trim();
        if t.is_empty() {
            return Err(perr(start, "empty term"));
        }
        terms.push(parse_term(t, start, nvars)?);
    }
    Ok(terms)
}

fn parse_term(t: &str, pos: usize, nvars: usize) -> Result<Term> {
    let mut term = Term {
        coeff: 1,
        laurent: [0; MAX_VARS],
        pd: Vec::new(),
    };
    let mut rest = t;
    if let Some(r) = rest.strip_prefix('-') {
        term.coeff = -1;
        rest = r.trim_start();
    }
    for (n, factor) in rest.split('*').enumerate() {
        let f = factor.trim();
        if f.is_empty() {
            return Err(perr(pos, format!("empty factor in `{t}`")));
        }
        if let Ok(c) = f.parse::<i128>() {
            if n != 0 {
                return Err(perr(pos, format!("coefficient `{f}` must come first")));
            }
            term.coeff *= c;
            continue;
        }
        if let Some(open) = f.find('[') {
            let name = &f[..open];
            let k = f[open + 1..]
                .strip_suffix(']')
                .and_then(|x| x.parse::<u32>().ok())
                .ok_or_else(|| perr(pos, format!("bad pd factor `{f}`")))?;
            check_name(name, pos)?;
            term.pd.push((name.to_string(), k));
            continue;
        }
        let (name, e) = match f.split_once('^') {
            Some((n, e)) => (
                n,
                e.parse::<i32>().map_err(|_| perr(pos, format!("bad exponent in `{f}`")))?,
            ),
            None => (f, 1),
        };
        check_name(name, pos)?;
        match laurent_index(name) {
            Some(i) if i < nvars => term.laurent[i] += e,
            Some(_) => return Err(perr(pos, format!("variable `{name}` out of range"))),
            None if e < 0 => {
                return Err(perr(pos, format!("negative power of pd variable `{name}`")))
            }
            None => {
                // An ordinary power of a pd variable: Y^e = e! Y^[e].
                term.pd.push((name.to_string(), e as u32));
                term.coeff *= (1..=e as i128).product::<i128>();
            }
        }
    }
    Ok(term)
}

fn check_name(name: &str, pos: usize) -> Result<()> {
    let ok = name.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
        && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
    if ok {
        Ok(())
    } else {
        Err(perr(pos, format!("bad variable name `{name}`")))
    }
}

fn laurent_index(name: &str) -> Option<usize> {
    let rest = name.strip_prefix('T')?;
    let i: usize = rest.parse().ok()?;
    (i >= 1).then(|| i - 1)
}

pub fn parse_laurent(s: &str, md: Modulus, nvars: usize) -> Result<LaurentPoly> {
    let mut f = LaurentPoly::zero(md, nvars);
    for t in parse_terms(s, nvars)? {
        if let Some((name, _)) = t.pd.first() {
            return Err(perr(0, format!("unexpected variable `{name}`")));
        }
        f.add_term(t.laurent, md.reduce(t.coeff));
    }
    Ok(f)
}

pub fn parse_pd(
    s: &str,
    md: Modulus,
    nvars: usize,
    vars: &Arc<Vec<String>>,
    bound: Option<u32>,
) -> Result<PdPoly> {
    let mut f = PdPoly::zero(md, nvars, vars.clone(), bound);
    for t in parse_terms(s, nvars)? {
        let mut k = vec![0u32; vars.len()];
        for (name, e) in &t.pd {
            let j = vars
                .iter()
                .position(|v| v == name)
                .ok_or_else(|| perr(0, format!("unknown variable `{name}`")))?;
            if k[j] != 0 {
                return Err(perr(0, format!("variable `{name}` repeated in a term")));
            }
            k[j] = *e;
        }
        f.add_term(k, LaurentPoly::monomial(md, nvars, t.laurent, md.reduce(t.coeff)));
    }
    Ok(f)
}
