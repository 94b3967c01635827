//! Text forms used by the command line.
//!
//! Function specs:
//!
//! ```text
//! spec := power(p) | exp | plog(p) | linear(a,b) | log1p | sum(spec,spec)
//!       | hariya(spec, r) | gen(h=spec, phi=spec)
//! ```
//!
//! Polynomials are sums of terms joined by `+`/`-`. A term is an optional
//! coefficient (`re`, `(re,im)` or `coef(re,im)`), an optional `*`, and
//! either one Hermite factor (`H3`, `H{3}`, `H{1,2}`) or monomial factors
//! (`x`, `x^3`, `x1^2 x2`, `x1*x2^4`). Hermite and monomial terms may be
//! mixed; the result is in the Hermite basis.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hermite::{Basis, CPoly};
use crate::scalarfn::{
    log_grid, make_exp, make_generator, make_hariya_companion, make_linear, make_log1p, make_plog, make_power,
    make_sum, FnPair, Func,
};

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(src: &'a str) -> Self {
        Cursor { src, pos: 0 }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.rest().chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(&format!("expected '{c}'")))
        }
    }

    fn error(&self, msg: &str) -> Error {
        Error::Parse(format!("{msg} at position {} in {:?}", self.pos, self.src))
    }

    fn ident(&mut self) -> &'a str {
        self.skip_ws();
        let rest = self.rest();
        let n = rest
            .char_indices()
            .find(|(_, c)| !(c.is_ascii_alphanumeric() || *c == '_'))
            .map_or(rest.len(), |(i, _)| i);
        self.pos += n;
        &rest[..n]
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let rest = self.rest();
        let bytes = rest.as_bytes();
        let mut n = 0;
        if n < bytes.len() && (bytes[n] == b'-' || bytes[n] == b'+') {
            n += 1;
        }
        while n < bytes.len() && (bytes[n].is_ascii_digit() || bytes[n] == b'.') {
            n += 1;
        }
        if n < bytes.len() && (bytes[n] == b'e' || bytes[n] == b'E') {
            let mut m = n + 1;
            if m < bytes.len() && (bytes[m] == b'-' || bytes[m] == b'+') {
                m += 1;
            }
            if m < bytes.len() && bytes[m].is_ascii_digit() {
                while m < bytes.len() && bytes[m].is_ascii_digit() {
                    m += 1;
                }
                n = m;
            }
        }
        let v: f64 = rest[..n].parse().map_err(|_| self.error("expected a number"))?;
        self.pos += n;
        Ok(v)
    }

    fn integer(&mut self) -> Result<u32> {
        self.skip_ws();
        let rest = self.rest();
        let n = rest.bytes().take_while(u8::is_ascii_digit).count();
        let v = rest[..n].parse().map_err(|_| self.error("expected a nonnegative integer"))?;
        self.pos += n;
        Ok(v)
    }

    fn finish(&mut self) -> Result<()> {
        if self.peek().is_some() {
            Err(self.error("unexpected trailing input"))
        } else {
            Ok(())
        }
    }
}

enum Spec {
    Fn(Func),
    Pair(Box<FnPair>),
}

fn spec(c: &mut Cursor) -> Result<Spec> {
    let start = c.pos;
    let name = c.ident();
    let one = |c: &mut Cursor| -> Result<f64> {
        c.expect('(')?;
        let v = c.number()?;
        c.expect(')')?;
        Ok(v)
    };
    let f = match name {
        "power" => make_power(one(c)?)?,
        "plog" => make_plog(one(c)?)?,
        "exp" => make_exp(),
        "log1p" => make_log1p(),
        "linear" => {
            c.expect('(')?;
            let a = c.number()?;
            c.expect(',')?;
            let b = c.number()?;
            c.expect(')')?;
            make_linear(a, b)
        }
        "sum" => {
            c.expect('(')?;
            let a = func(c)?;
            c.expect(',')?;
            let b = func(c)?;
            c.expect(')')?;
            make_sum(a, b)
        }
        "hariya" => {
            c.expect('(')?;
            let p = func(c)?;
            c.expect(',')?;
            let r = c.number()?;
            c.expect(')')?;
            make_hariya_companion(p, r)?
        }
        "gen" => {
            c.expect('(')?;
            let mut h = None;
            let mut phi = None;
            loop {
                let key = c.ident();
                c.expect('=')?;
                match key {
                    "h" => h = Some(func(c)?),
                    "phi" => phi = Some(func(c)?),
                    _ => return Err(c.error(&format!("unknown gen argument {key:?}"))),
                }
                if !c.eat(',') {
                    break;
                }
            }
            c.expect(')')?;
            let (h, phi) = match (h, phi) {
                (Some(h), Some(phi)) => (h, phi),
                _ => return Err(c.error("gen needs both h= and phi=")),
            };
            return Ok(Spec::Pair(Box::new(make_generator(h, phi)?.pair)));
        }
        "" => return Err(c.error("expected a function spec")),
        other => {
            c.pos = start;
            return Err(c.error(&format!("unknown function {other:?}")));
        }
    };
    Ok(Spec::Fn(f))
}

fn func(c: &mut Cursor) -> Result<Func> {
    match spec(c)? {
        Spec::Fn(f) => Ok(f),
        Spec::Pair(_) => Err(c.error("gen(...) defines a pair and cannot be nested")),
    }
}

/// Parses a single function spec.
pub fn parse_fn(src: &str) -> Result<Func> {
    let mut c = Cursor::new(src);
    let f = func(&mut c)?;
    c.finish()?;
    Ok(f)
}

/// Parses `P` and `Q`. A `gen(...)` spec for `P` defines the whole pair, in
/// which case `Q` must be omitted. Both functions are spot-checked for
/// `f' > 0` on a log grid over `[1e-3, 1e3]`.
pub fn parse_pair(p_src: &str, q_src: Option<&str>) -> Result<FnPair> {
    let mut c = Cursor::new(p_src);
    let first = spec(&mut c)?;
    c.finish()?;
    let pair = match (first, q_src) {
        (Spec::Pair(pair), None) => *pair,
        (Spec::Pair(_), Some(_)) => {
            return Err(Error::Parse("--Q must be omitted when --P is gen(...)".into()));
        }
        (Spec::Fn(p), Some(q)) => FnPair::new(p, parse_fn(q)?),
        (Spec::Fn(_), None) => return Err(Error::Parse("--Q is required unless --P is gen(...)".into())),
    };
    for t in log_grid(1e-3, 1e3, 25) {
        for (name, f) in [("P", &pair.p), ("Q", &pair.q)] {
            let d = f.d1(t);
            if !(d > 0.0) {
                return Err(Error::Monotonicity {
                    what: format!("{name}'"),
                    t,
                    value: d,
                });
            }
        }
    }
    Ok(pair)
}

/// Parses a complex number written `re,im` or `re`.
pub fn parse_complex(src: &str) -> Result<Complex64> {
    let mut c = Cursor::new(src);
    let re = c.number()?;
    let im = if c.eat(',') { c.number()? } else { 0.0 };
    c.finish()?;
    Ok(Complex64::new(re, im))
}

fn coefficient(c: &mut Cursor) -> Result<Option<Complex64>> {
    match c.peek() {
        Some('(') => {
            c.expect('(')?;
            let re = c.number()?;
            let im = if c.eat(',') { c.number()? } else { 0.0 };
            c.expect(')')?;
            Ok(Some(Complex64::new(re, im)))
        }
        Some(ch) if ch.is_ascii_digit() || ch == '.' => Ok(Some(Complex64::new(c.number()?, 0.0))),
        Some('c') if c.rest().starts_with("coef") => {
            c.ident();
            c.expect('(')?;
            let re = c.number()?;
            c.expect(',')?;
            let im = c.number()?;
            c.expect(')')?;
            Ok(Some(Complex64::new(re, im)))
        }
        _ => Ok(None),
    }
}

enum Factor {
    Hermite(Vec<u32>),
    // (variable index from 1, power)
    Monomials(Vec<(usize, u32)>),
}

fn factors(c: &mut Cursor) -> Result<Option<Factor>> {
    match c.peek() {
        Some('H') => {
            c.pos += 1;
            let idx = if c.eat('{') {
                let mut v = vec![c.integer()?];
                while c.eat(',') {
                    v.push(c.integer()?);
                }
                c.expect('}')?;
                v
            } else {
                vec![c.integer()?]
            };
            Ok(Some(Factor::Hermite(idx)))
        }
        Some('x') => {
            let mut vars = Vec::new();
            while c.peek() == Some('x') {
                c.pos += 1;
                let digits = c.rest().bytes().take_while(u8::is_ascii_digit).count();
                let var = if digits == 0 { 1 } else { c.integer()? as usize };
                if var == 0 {
                    return Err(c.error("variables are numbered from x1"));
                }
                let pow = if c.eat('^') { c.integer()? } else { 1 };
                vars.push((var, pow));
                // optional explicit product between factors
                let save = c.pos;
                if !(c.eat('*') && c.peek() == Some('x')) {
                    c.pos = save;
                }
            }
            Ok(Some(Factor::Monomials(vars)))
        }
        _ => Ok(None),
    }
}

/// Parses a polynomial literal. The dimension is the largest variable
/// index or Hermite multi-index length used, or `dim` if given.
pub fn parse_poly(src: &str, dim: Option<usize>) -> Result<CPoly> {
    let mut c = Cursor::new(src);
    let mut herm: BTreeMap<Vec<u32>, Complex64> = BTreeMap::new();
    let mut mono: Vec<(Vec<(usize, u32)>, Complex64)> = Vec::new();
    let mut first = true;
    loop {
        let sign = if c.eat('-') {
            -1.0
        } else {
            if !c.eat('+') && !first {
                break;
            }
            1.0
        };
        first = false;
        let coef = coefficient(&mut c)?;
        let has_coef = coef.is_some();
        if has_coef {
            c.eat('*');
        }
        let fac = factors(&mut c)?;
        let coef = sign * coef.unwrap_or(Complex64::new(1.0, 0.0));
        match fac {
            Some(Factor::Hermite(idx)) => *herm.entry(idx).or_default() += coef,
            Some(Factor::Monomials(v)) => mono.push((v, coef)),
            None if has_coef => mono.push((Vec::new(), coef)),
            None => return Err(c.error("expected a term")),
        }
        if c.peek().is_none() {
            break;
        }
    }
    c.finish()?;

    let herm_dim = herm.keys().map(Vec::len).max().unwrap_or(0);
    let mono_dim = mono.iter().flat_map(|(v, _)| v.iter().map(|(i, _)| *i)).max().unwrap_or(0);
    let k = dim.unwrap_or(herm_dim.max(mono_dim).max(1));
    if herm_dim > k || mono_dim > k {
        return Err(Error::Parse(format!("polynomial uses more than {k} variables")));
    }
    if herm.keys().any(|idx| idx.len() != k) {
        return Err(Error::Parse(format!("every Hermite index must have {k} entries")));
    }

    let h = CPoly::from_terms(k, Basis::Hermite, herm)?;
    let m = CPoly::from_terms(
        k,
        Basis::Monomial,
        mono.into_iter().map(|(vars, coef)| {
            let mut e = vec![0u32; k];
            for (i, p) in vars {
                e[i - 1] += p;
            }
            (e, coef)
        }),
    )?;
    h.add(&m)
}
