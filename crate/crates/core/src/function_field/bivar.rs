//! Fractions of polynomials in s and t over F_q whose denominator is a unit at t = 0.
//!
//! Text form: terms `c*s^a*t^b` joined by `+`, where `c` is an F_q element code
//! (the residue itself when q is prime). A leading `-` negates a term; factors
//! may be omitted (`s`, `t^2`, `3`).

use std::fmt;
use std::sync::Arc;

use super::{Poly, RatFunc};
use crate::error::{Error, Result};
use crate::gf::small::Fq;

/// Polynomial in s and t, stored as its t-coefficients (polynomials in s).
#[derive(Clone)]
pub struct BiPoly {
    f: Arc<Fq>,
    t: Vec<Poly>,
}

impl PartialEq for BiPoly {
    fn eq(&self, o: &Self) -> bool {
        self.t == o.t
    }
}

impl Eq for BiPoly {}

impl std::hash::Hash for BiPoly {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.t.hash(state);
    }
}

impl fmt::Debug for BiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl BiPoly {
    pub fn new(f: &Arc<Fq>, mut t: Vec<Poly>) -> BiPoly {
        while t.last().is_some_and(|p| p.is_zero()) {
            t.pop();
        }
        BiPoly { f: f.clone(), t }
    }

    pub fn zero(f: &Arc<Fq>) -> BiPoly {
        BiPoly::new(f, Vec::new())
    }

    pub fn from_s(p: Poly) -> BiPoly {
        let f = p.field().clone();
        BiPoly::new(&f, vec![p])
    }

    pub fn constant(f: &Arc<Fq>, a: u32) -> BiPoly {
        BiPoly::from_s(Poly::constant(f, a))
    }

    /// The monomial c·s^a·t^b.
    pub fn monomial(f: &Arc<Fq>, c: u32, a: usize, b: usize) -> BiPoly {
        let mut t = vec![Poly::zero(f); b + 1];
        t[b] = Poly::constant(f, c).shift(a);
        BiPoly::new(f, t)
    }

    pub fn field(&self) -> &Arc<Fq> {
        &self.f
    }

    pub fn is_zero(&self) -> bool {
        self.t.is_empty()
    }

    pub fn t_coeff(&self, b: usize) -> Poly {
        self.t.get(b).cloned().unwrap_or_else(|| Poly::zero(&self.f))
    }

    pub fn t_degree(&self) -> Option<usize> {
        self.t.len().checked_sub(1)
    }

    pub fn t_coeffs(&self) -> &[Poly] {
        &self.t
    }

    pub fn add(&self, o: &BiPoly) -> BiPoly {
        let n = self.t.len().max(o.t.len());
        BiPoly::new(&self.f, (0..n).map(|b| self.t_coeff(b).add(&o.t_coeff(b))).collect())
    }

    pub fn neg(&self) -> BiPoly {
        BiPoly::new(&self.f, self.t.iter().map(|p| p.neg()).collect())
    }

    pub fn sub(&self, o: &BiPoly) -> BiPoly {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &BiPoly) -> BiPoly {
        if self.is_zero() || o.is_zero() {
            return BiPoly::zero(&self.f);
        }
        let mut t = vec![Poly::zero(&self.f); self.t.len() + o.t.len() - 1];
        for (i, a) in self.t.iter().enumerate() {
            for (j, b) in o.t.iter().enumerate() {
                t[i + j] = t[i + j].add(&a.mul(b));
            }
        }
        BiPoly::new(&self.f, t)
    }

    pub fn scale_s(&self, p: &Poly) -> BiPoly {
        BiPoly::new(&self.f, self.t.iter().map(|x| x.mul(p)).collect())
    }

    pub fn phi(&self) -> BiPoly {
        BiPoly::new(&self.f, self.t.iter().map(|x| x.phi()).collect())
    }

    /// Exact division of every t-coefficient by `p`, if possible.
    fn div_s_exact(&self, p: &Poly) -> Option<BiPoly> {
        let mut t = Vec::with_capacity(self.t.len());
        for x in &self.t {
            let (quot, r) = x.divrem(p);
            if !r.is_zero() {
                return None;
            }
            t.push(quot);
        }
        Some(BiPoly::new(&self.f, t))
    }

    /// gcd of all t-coefficients (the s-content).
    fn content(&self) -> Poly {
        self.t.iter().fold(Poly::zero(&self.f), |g, x| g.gcd(x))
    }

    pub fn parse(f: &Arc<Fq>, text: &str) -> Result<BiPoly> {
        let text: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if text.is_empty() {
            return Err(Error::Parse("empty polynomial".into()));
        }
        let mut acc = BiPoly::zero(f);
        // split on '+' and on '-' that starts a new term
        let mut terms = Vec::new();
        let mut cur = String::new();
        for (i, ch) in text.chars().enumerate() {
            if (ch == '+' || ch == '-') && i > 0 && !cur.ends_with('^') {
                terms.push(std::mem::take(&mut cur));
                if ch == '-' {
                    cur.push('-');
                }
            } else {
                cur.push(ch);
            }
        }
        terms.push(cur);
        for term in terms {
            acc = acc.add(&parse_term(f, &term)?);
        }
        Ok(acc)
    }
}

fn parse_term(f: &Arc<Fq>, term: &str) -> Result<BiPoly> {
    let (neg, body) = match term.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, term),
    };
    if body.is_empty() {
        return Err(Error::Parse(format!("empty term in '{term}'")));
    }
    let mut c = 1u32;
    let (mut a, mut b) = (0usize, 0usize);
    for factor in body.split('*') {
        let (base, exp) = match factor.split_once('^') {
            Some((base, e)) => {
                let e: usize = e.parse().map_err(|_| Error::Parse(format!("bad exponent in '{factor}'")))?;
                (base, e)
            }
            None => (factor, 1),
        };
        match base {
            "s" => a += exp,
            "t" => b += exp,
            lit => {
                let v: u64 = lit.parse().map_err(|_| Error::Parse(format!("bad factor '{factor}'")))?;
                if exp != 1 {
                    return Err(Error::Parse(format!("exponent on coefficient '{factor}'")));
                }
                let code = if f.e() == 1 {
                    (v % f.p() as u64) as u32
                } else if v < f.q() as u64 {
                    v as u32
                } else {
                    return Err(Error::Parse(format!("field element code {v} out of range")));
                };
                c = f.mul(c, code);
            }
        }
    }
    if neg {
        c = f.neg(c);
    }
    Ok(BiPoly::monomial(f, c, a, b))
}

impl fmt::Display for BiPoly {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (b, poly) in self.t.iter().enumerate() {
            for (a, &c) in poly.coeffs().iter().enumerate() {
                if c == 0 {
                    continue;
                }
                if !first {
                    write!(out, "+")?;
                }
                first = false;
                let mut parts = Vec::new();
                if c != 1 || (a == 0 && b == 0) {
                    parts.push(c.to_string());
                }
                match a {
                    0 => {}
                    1 => parts.push("s".into()),
                    a => parts.push(format!("s^{a}")),
                }
                match b {
                    0 => {}
                    1 => parts.push("t".into()),
                    b => parts.push(format!("t^{b}")),
                }
                write!(out, "{}", parts.join("*"))?;
            }
        }
        if first {
            write!(out, "0")?;
        }
        Ok(())
    }
}

/// num/den with den(s, 0) ≠ 0, normalized so that den(s, 0) is monic in s.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BivarEntry {
    num: BiPoly,
    den: BiPoly,
}

impl fmt::Debug for BivarEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})/({})", self.num, self.den)
    }
}

impl BivarEntry {
    pub fn new(num: BiPoly, den: BiPoly) -> Result<BivarEntry> {
        let d0 = den.t_coeff(0);
        if d0.is_zero() {
            return Err(Error::NonUnitDenominator);
        }
        let f = num.field().clone();
        let mut num = num;
        let mut den = den;
        if num.is_zero() {
            return Ok(BivarEntry { num, den: BiPoly::constant(&f, 1) });
        }
        // cancel common factors in s
        let g = num.content().gcd(&den.content());
        if g.degree().unwrap_or(0) > 0 {
            num = num.div_s_exact(&g).unwrap();
            den = den.div_s_exact(&g).unwrap();
        }
        if num == den {
            return Ok(BivarEntry::one(&f));
        }
        let inv = f.inv(den.t_coeff(0).lead()).unwrap();
        let c = Poly::constant(&f, inv);
        Ok(BivarEntry { num: num.scale_s(&c), den: den.scale_s(&c) })
    }

    pub fn from_poly(num: BiPoly) -> BivarEntry {
        let f = num.field().clone();
        BivarEntry { num, den: BiPoly::constant(&f, 1) }
    }

    pub fn from_ratfunc(r: &RatFunc) -> BivarEntry {
        BivarEntry::new(BiPoly::from_s(r.num().clone()), BiPoly::from_s(r.den().clone())).unwrap()
    }

    pub fn zero(f: &Arc<Fq>) -> BivarEntry {
        BivarEntry::from_poly(BiPoly::zero(f))
    }

    pub fn one(f: &Arc<Fq>) -> BivarEntry {
        BivarEntry::from_poly(BiPoly::constant(f, 1))
    }

    pub fn constant(f: &Arc<Fq>, c: u32) -> BivarEntry {
        BivarEntry::from_poly(BiPoly::constant(f, c))
    }

    pub fn num(&self) -> &BiPoly {
        &self.num
    }

    pub fn den(&self) -> &BiPoly {
        &self.den
    }

    pub fn field(&self) -> &Arc<Fq> {
        self.num.field()
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn add(&self, o: &BivarEntry) -> BivarEntry {
        if self.den == o.den {
            return BivarEntry::new(self.num.add(&o.num), self.den.clone()).unwrap();
        }
        BivarEntry::new(self.num.mul(&o.den).add(&o.num.mul(&self.den)), self.den.mul(&o.den)).unwrap()
    }

    pub fn neg(&self) -> BivarEntry {
        BivarEntry { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn sub(&self, o: &BivarEntry) -> BivarEntry {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &BivarEntry) -> BivarEntry {
        if self.is_zero() || o.is_zero() {
            return BivarEntry::zero(self.field());
        }
        if self.den == o.num {
            return BivarEntry::new(self.num.clone(), o.den.clone()).unwrap();
        }
        if self.num == o.den {
            return BivarEntry::new(o.num.clone(), self.den.clone()).unwrap();
        }
        BivarEntry::new(self.num.mul(&o.num), self.den.mul(&o.den)).unwrap()
    }

    /// Inverse in the t-adic unit group; fails if num(s, 0) = 0.
    pub fn inv(&self) -> Result<BivarEntry> {
        BivarEntry::new(self.den.clone(), self.num.clone())
    }

    /// φ_q: s ↦ s^q, t fixed.
    pub fn phi(&self) -> BivarEntry {
        BivarEntry { num: self.num.phi(), den: self.den.phi() }
    }

    /// The first `n` coefficients of the t-expansion, as elements of F_q(s).
    pub fn t_expansion(&self, n: usize) -> Vec<RatFunc> {
        let d0 = RatFunc::from_poly(self.den.t_coeff(0));
        let d0_inv = d0.inv().expect("unit denominator");
        let mut out: Vec<RatFunc> = Vec::with_capacity(n);
        for l in 0..n {
            let mut acc = RatFunc::from_poly(self.num.t_coeff(l));
            for j in 1..=l.min(self.den.t_degree().unwrap_or(0)) {
                let dj = self.den.t_coeff(j);
                if dj.is_zero() {
                    continue;
                }
                acc = acc.sub(&RatFunc::from_poly(dj).mul(&out[l - j]));
            }
            out.push(acc.mul(&d0_inv));
        }
        out
    }

    /// Value at t = 0.
    pub fn at_t0(&self) -> RatFunc {
        RatFunc::new(self.num.t_coeff(0), self.den.t_coeff(0)).unwrap()
    }

    pub fn parse(f: &Arc<Fq>, num: &str, den: &str) -> Result<BivarEntry> {
        BivarEntry::new(BiPoly::parse(f, num)?, BiPoly::parse(f, den)?)
    }

    /// Substitutes s = (a + b·θ)/θ with a, b ∈ F_q; returns the entry in the variable θ
    /// (stored in the s slot).
    pub fn substitute_mobius(&self, num_lin: (u32, u32), den_lin: (u32, u32)) -> Result<BivarEntry> {
        let f = self.field().clone();
        let n = Poly::new(&f, vec![num_lin.0, num_lin.1]);
        let d = Poly::new(&f, vec![den_lin.0, den_lin.1]);
        let deg = self.num.t_coeffs().iter().chain(self.den.t_coeffs()).filter_map(|p| p.degree()).max().unwrap_or(0);
        let hom = |bp: &BiPoly| -> BiPoly {
            let t = bp
                .t_coeffs()
                .iter()
                .map(|p| {
                    let mut acc = Poly::zero(&f);
                    for (i, &c) in p.coeffs().iter().enumerate() {
                        if c == 0 {
                            continue;
                        }
                        let term = n.pow(i as u64).mul(&d.pow((deg - i) as u64)).scale(c);
                        acc = acc.add(&term);
                    }
                    acc
                })
                .collect();
            BiPoly::new(&f, t)
        };
        // the common factor d^deg cancels between numerator and denominator
        BivarEntry::new(hom(&self.num), hom(&self.den))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f5() -> Arc<Fq> {
        Fq::new(5, 1).unwrap()
    }

    #[test]
    fn parse_and_format_roundtrip() {
        let f = f5();
        let p = BiPoly::parse(&f, "1 + 3*s^2*t + s*t^2 - 2*t").unwrap();
        let text = p.to_string();
        assert_eq!(BiPoly::parse(&f, &text).unwrap(), p);
        assert_eq!(p.t_coeff(1), Poly::new(&f, vec![3, 0, 3]));
        assert!(BiPoly::parse(&f, "").is_err());
        assert!(BiPoly::parse(&f, "x*s").is_err());
    }

    #[test]
    fn geometric_expansion() {
        let f = f5();
        let e = BivarEntry::parse(&f, "1", "1+s*t").unwrap();
        let ex = e.t_expansion(4);
        let s = RatFunc::from_poly(Poly::s(&f));
        for (l, c) in ex.iter().enumerate() {
            assert_eq!(c, &s.neg().pow(l as i64).unwrap());
        }
    }

    #[test]
    fn nonunit_denominator_rejected() {
        let f = f5();
        assert_eq!(BivarEntry::parse(&f, "1", "t").unwrap_err(), Error::NonUnitDenominator);
    }

    #[test]
    fn mobius_substitution() {
        // s = (1 + 2θ)/θ, i.e. s = θ⁻¹ + 2
        let f = f5();
        let e = BivarEntry::parse(&f, "s", "1").unwrap();
        let th = e.substitute_mobius((1, 2), (0, 1)).unwrap();
        let expect = BivarEntry::new(BiPoly::parse(&f, "1+2*s").unwrap(), BiPoly::parse(&f, "s").unwrap()).unwrap();
        assert_eq!(th, expect);
    }
}
