//! Exact multivariate polynomials over the rationals.
//!
//! Monomials are exponent vectors compared lexicographically with the first
//! variable most significant, so the `vars` list doubles as the lex
//! elimination order used by the Groebner machinery.  Coefficients are
//! `BigRational`; every operation is exact.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::AlgebraError;

/// Exponent vector; always the same length as the owning poly's `vars`.
pub type Exponents = Vec<u32>;

/// Sparse multivariate polynomial with exact rational coefficients.
///
/// Invariant: `terms` never stores a zero coefficient, and every key has
/// length `vars.len()`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MultiPoly {
    vars: Vec<String>,
    terms: BTreeMap<Exponents, BigRational>,
}

pub(crate) fn rat_int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn parse_rational(text: &str) -> Result<BigRational, AlgebraError> {
    let bad = || AlgebraError::Parse(format!("bad rational literal '{text}'"));
    match text.split_once('/') {
        Some((n, d)) => {
            let num: BigInt = n.parse().map_err(|_| bad())?;
            let den: BigInt = d.parse().map_err(|_| bad())?;
            if den.is_zero() {
                return Err(AlgebraError::Parse(format!("zero denominator in '{text}'")));
            }
            Ok(BigRational::new(num, den))
        }
        None => {
            let num: BigInt = text.parse().map_err(|_| bad())?;
            Ok(BigRational::from_integer(num))
        }
    }
}

fn format_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl MultiPoly {
    fn from_map(vars: Vec<String>, mut terms: BTreeMap<Exponents, BigRational>) -> Self {
        terms.retain(|_, c| !c.is_zero());
        Self { vars, terms }
    }

    pub fn zero(vars: &[&str]) -> Self {
        Self {
            vars: vars.iter().map(|s| s.to_string()).collect(),
            terms: BTreeMap::new(),
        }
    }

    pub fn zero_like(other: &Self) -> Self {
        Self {
            vars: other.vars.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(vars: &[&str], c: BigRational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(vec![0; vars.len()], c);
        }
        Self {
            vars: vars.iter().map(|s| s.to_string()).collect(),
            terms,
        }
    }

    pub fn int_constant(vars: &[&str], c: i64) -> Self {
        Self::constant(vars, rat_int(c))
    }

    pub fn one(vars: &[&str]) -> Self {
        Self::int_constant(vars, 1)
    }

    pub fn var(vars: &[&str], name: &str) -> Result<Self, AlgebraError> {
        let idx = vars
            .iter()
            .position(|v| *v == name)
            .ok_or_else(|| AlgebraError::VarMismatch(format!("unknown variable '{name}'")))?;
        let mut exps = vec![0u32; vars.len()];
        exps[idx] = 1;
        let mut terms = BTreeMap::new();
        terms.insert(exps, BigRational::one());
        Ok(Self {
            vars: vars.iter().map(|s| s.to_string()).collect(),
            terms,
        })
    }

    pub fn monomial(
        vars: &[&str],
        coeff: BigRational,
        exps: &[u32],
    ) -> Result<Self, AlgebraError> {
        if exps.len() != vars.len() {
            return Err(AlgebraError::VarMismatch(format!(
                "exponent vector length {} != variable count {}",
                exps.len(),
                vars.len()
            )));
        }
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(exps.to_vec(), coeff);
        }
        Ok(Self {
            vars: vars.iter().map(|s| s.to_string()).collect(),
            terms,
        })
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &BigRational)> {
        self.terms.iter()
    }

    /// Leading term under lex (largest exponent vector), or None if zero.
    pub fn leading(&self) -> Option<(&Exponents, &BigRational)> {
        self.terms.iter().next_back()
    }

    pub fn coeff_of(&self, exps: &[u32]) -> BigRational {
        self.terms.get(exps).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    pub fn degree_in(&self, name: &str) -> Result<u32, AlgebraError> {
        let idx = self.var_index(name)?;
        Ok(self.terms.keys().map(|e| e[idx]).max().unwrap_or(0))
    }

    pub fn var_index(&self, name: &str) -> Result<usize, AlgebraError> {
        self.vars
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| AlgebraError::VarMismatch(format!("unknown variable '{name}'")))
    }

    fn assert_same_vars(&self, other: &Self) {
        assert_eq!(
            self.vars, other.vars,
            "polynomial arithmetic requires identical variable lists"
        );
    }

    pub(crate) fn add_term(&mut self, exps: &[u32], coeff: &BigRational) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.get_mut(exps) {
            Some(c) => {
                *c += coeff;
                if c.is_zero() {
                    self.terms.remove(exps);
                }
            }
            None => {
                self.terms.insert(exps.to_vec(), coeff.clone());
            }
        }
    }

    pub(crate) fn remove_term(&mut self, exps: &[u32]) {
        self.terms.remove(exps);
    }

    /// Multiply by the single term `coeff * x^exps` (exponent shift + scale).
    pub fn mul_monomial(&self, coeff: &BigRational, exps: &[u32]) -> Self {
        assert_eq!(exps.len(), self.vars.len(), "monomial arity mismatch");
        if coeff.is_zero() {
            return Self::zero_like(self);
        }
        let terms = self
            .terms
            .iter()
            .map(|(e, c)| {
                let shifted: Exponents = e
                    .iter()
                    .zip(exps)
                    .map(|(a, b)| a.checked_add(*b).expect("exponent overflow"))
                    .collect();
                (shifted, c * coeff)
            })
            .collect();
        Self {
            vars: self.vars.clone(),
            terms,
        }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero_like(self);
        }
        Self {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect(),
        }
    }

    /// Divide by the leading coefficient; zero stays zero.
    pub fn make_monic(&self) -> Self {
        match self.leading() {
            Some((_, c)) => {
                let inv = BigRational::one() / c.clone();
                self.scale(&inv)
            }
            None => self.clone(),
        }
    }

    pub fn pow(&self, e: u32) -> Self {
        let vars: Vec<&str> = self.vars.iter().map(|s| s.as_str()).collect();
        let mut result = Self::one(&vars);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// Formal partial derivative with respect to `name`.
    pub fn derivative(&self, name: &str) -> Result<Self, AlgebraError> {
        let idx = self.var_index(name)?;
        let mut terms = BTreeMap::new();
        for (exps, coeff) in &self.terms {
            let e = exps[idx];
            if e == 0 {
                continue;
            }
            let mut de = exps.clone();
            de[idx] = e - 1;
            terms.insert(de, coeff * rat_int(e as i64));
        }
        Ok(Self::from_map(self.vars.clone(), terms))
    }

    /// Specialize one variable to a rational constant.  The variable list is
    /// unchanged; the substituted variable simply stops appearing.
    pub fn substitute(&self, name: &str, value: &BigRational) -> Result<Self, AlgebraError> {
        let idx = self.var_index(name)?;
        let mut out = Self::zero_like(self);
        // Power cache: exponents repeat heavily across terms.
        let mut powers: BTreeMap<u32, BigRational> = BTreeMap::new();
        powers.insert(0, BigRational::one());
        for (exps, coeff) in &self.terms {
            let e = exps[idx];
            let p = powers
                .entry(e)
                .or_insert_with(|| value.pow(e as i32))
                .clone();
            let mut ne = exps.clone();
            ne[idx] = 0;
            out.add_term(&ne, &(coeff * p));
        }
        Ok(out)
    }

    /// Exact evaluation; `vals` follows the variable list order.
    pub fn eval(&self, vals: &[BigRational]) -> Result<BigRational, AlgebraError> {
        if vals.len() != self.vars.len() {
            return Err(AlgebraError::VarMismatch(format!(
                "eval got {} values for {} variables",
                vals.len(),
                self.vars.len()
            )));
        }
        let mut acc = BigRational::zero();
        for (exps, coeff) in &self.terms {
            let mut term = coeff.clone();
            for (v, &e) in vals.iter().zip(exps) {
                if e > 0 {
                    term *= v.pow(e as i32);
                }
            }
            acc += term;
        }
        Ok(acc)
    }

    /// Largest coefficient size in bits (numerator plus denominator); used by
    /// the Groebner growth cap.
    pub fn max_coeff_bits(&self) -> u64 {
        self.terms
            .values()
            .map(|c| c.numer().bits() + c.denom().bits())
            .max()
            .unwrap_or(0)
    }

    /// Parse the canonical text form: terms joined by ` + ` / ` - `, each a
    /// `*`-product of a rational literal and `var` / `var^exp` factors.
    pub fn parse(vars: &[&str], text: &str) -> Result<Self, AlgebraError> {
        let poly_vars: Vec<String> = vars.iter().map(|s| s.to_string()).collect();
        let mut out = Self {
            vars: poly_vars,
            terms: BTreeMap::new(),
        };
        let mut negate = false;
        let mut expect_term = true;
        let mut saw_any = false;
        for token in text.split_whitespace() {
            match token {
                "+" => {
                    if expect_term {
                        return Err(AlgebraError::Parse("dangling '+'".into()));
                    }
                    expect_term = true;
                }
                "-" => {
                    if expect_term {
                        return Err(AlgebraError::Parse("dangling '-'".into()));
                    }
                    negate = true;
                    expect_term = true;
                }
                _ => {
                    if !expect_term {
                        return Err(AlgebraError::Parse(format!(
                            "expected '+' or '-' before '{token}'"
                        )));
                    }
                    let mut body = token;
                    while let Some(rest) = body.strip_prefix('-') {
                        negate = !negate;
                        body = rest;
                    }
                    let body = body.strip_prefix('+').unwrap_or(body);
                    if body.is_empty() {
                        return Err(AlgebraError::Parse(format!("bare sign token '{token}'")));
                    }
                    let (mut coeff, exps) = parse_term(vars, body)?;
                    if negate {
                        coeff = -coeff;
                    }
                    out.add_term(&exps, &coeff);
                    negate = false;
                    expect_term = false;
                    saw_any = true;
                }
            }
        }
        if expect_term || !saw_any {
            return Err(AlgebraError::Parse(
                "polynomial text ended before a term".into(),
            ));
        }
        Ok(out)
    }

    /// Parse a fixture file: a `vars: a b c` header line followed by the
    /// polynomial (which may wrap over several lines).
    pub fn parse_fixture(text: &str) -> Result<Self, AlgebraError> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| AlgebraError::Parse("empty fixture".into()))?
            .trim();
        let names = header
            .strip_prefix("vars:")
            .ok_or_else(|| AlgebraError::Parse("fixture must start with 'vars:'".into()))?;
        let vars: Vec<&str> = names.split_whitespace().collect();
        if vars.is_empty() {
            return Err(AlgebraError::Parse("fixture declares no variables".into()));
        }
        let body: String = lines.collect::<Vec<_>>().join(" ");
        Self::parse(&vars, &body)
    }
}

fn parse_term(vars: &[&str], body: &str) -> Result<(BigRational, Exponents), AlgebraError> {
    let mut coeff = BigRational::one();
    let mut exps = vec![0u32; vars.len()];
    for factor in body.split('*') {
        if factor.is_empty() {
            return Err(AlgebraError::Parse(format!("empty factor in '{body}'")));
        }
        let (base, exp) = match factor.split_once('^') {
            Some((b, e)) => {
                let exp: u32 = e.parse().map_err(|_| {
                    AlgebraError::Parse(format!("bad exponent '{e}' in '{factor}'"))
                })?;
                (b, exp)
            }
            None => (factor, 1),
        };
        if base.starts_with(|c: char| c.is_ascii_digit()) {
            if factor.contains('^') {
                return Err(AlgebraError::Parse(format!(
                    "numeric literal with exponent '{factor}' is not supported"
                )));
            }
            coeff *= parse_rational(base)?;
        } else {
            let idx = vars.iter().position(|v| *v == base).ok_or_else(|| {
                AlgebraError::VarMismatch(format!("unknown variable '{base}'"))
            })?;
            exps[idx] = exps[idx]
                .checked_add(exp)
                .ok_or_else(|| AlgebraError::Parse("exponent overflow".into()))?;
        }
    }
    Ok((coeff, exps))
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (exps, coeff) in self.terms.iter().rev() {
            let neg = coeff.is_negative();
            let mag = coeff.abs();
            let mut factors: Vec<String> = Vec::new();
            if !mag.is_one() || exps.iter().all(|&e| e == 0) {
                factors.push(format_rational(&mag));
            }
            for (i, &e) in exps.iter().enumerate() {
                match e {
                    0 => {}
                    1 => factors.push(self.vars[i].clone()),
                    _ => factors.push(format!("{}^{}", self.vars[i], e)),
                }
            }
            let rendered = factors.join("*");
            if first {
                if neg {
                    write!(f, "-{rendered}")?;
                } else {
                    write!(f, "{rendered}")?;
                }
                first = false;
            } else if neg {
                write!(f, " - {rendered}")?;
            } else {
                write!(f, " + {rendered}")?;
            }
        }
        Ok(())
    }
}

impl Add for &MultiPoly {
    type Output = MultiPoly;
    fn add(self, rhs: &MultiPoly) -> MultiPoly {
        self.assert_same_vars(rhs);
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e, c);
        }
        out
    }
}

impl Sub for &MultiPoly {
    type Output = MultiPoly;
    fn sub(self, rhs: &MultiPoly) -> MultiPoly {
        self.assert_same_vars(rhs);
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e, &(-c.clone()));
        }
        out
    }
}

impl Mul for &MultiPoly {
    type Output = MultiPoly;
    fn mul(self, rhs: &MultiPoly) -> MultiPoly {
        self.assert_same_vars(rhs);
        let mut out = MultiPoly::zero_like(self);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let exps: Exponents = ea
                    .iter()
                    .zip(eb)
                    .map(|(a, b)| a.checked_add(*b).expect("exponent overflow"))
                    .collect();
                out.add_term(&exps, &(ca * cb));
            }
        }
        out
    }
}

impl Neg for &MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        MultiPoly {
            vars: self.vars.clone(),
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.clone(), -c.clone()))
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture(name: &str) -> String {
        let path = format!(
            "{}/../../fixtures/groebner/{name}",
            env!("CARGO_MANIFEST_DIR")
        );
        std::fs::read_to_string(&path).expect("fixture file readable")
    }

    #[test]
    fn square_of_linear() {
        let v = ["w"];
        let w = MultiPoly::var(&v, "w").unwrap();
        let p = &w + &MultiPoly::one(&v);
        let sq = p.pow(2);
        let expected = MultiPoly::parse(&v, "w^2 + 2*w + 1").unwrap();
        assert_eq!(sq, expected);
    }

    #[test]
    fn formal_partial_derivative() {
        let v = ["w", "d"];
        let p = MultiPoly::parse(&v, "w^3*d^2").unwrap();
        let dp = p.derivative("w").unwrap();
        assert_eq!(dp, MultiPoly::parse(&v, "3*w^2*d^2").unwrap());
        let dd = p.derivative("d").unwrap();
        assert_eq!(dd, MultiPoly::parse(&v, "2*w^3*d").unwrap());
    }

    #[test]
    fn g4_vanishes_at_w2_zero() {
        let g4 = MultiPoly::parse_fixture(&fixture("g4.txt")).unwrap();
        assert_eq!(g4.vars(), &["w1", "w2", "d"]);
        // Every term carries w2^2, so w2 = 0 kills the polynomial whatever
        // the other coordinates are.
        let vals = [rat_int(7), rat_int(0), rat_int(5)];
        assert!(g4.eval(&vals).unwrap().is_zero());
        for (exps, _) in g4.terms() {
            assert!(exps[1] >= 2, "term without w2^2 factor: {exps:?}");
        }
    }

    #[test]
    fn fixture_display_round_trips_byte_identically() {
        for name in ["g1.txt", "g2.txt", "g3.txt", "g4.txt"] {
            let text = fixture(name);
            let poly = MultiPoly::parse_fixture(&text).unwrap();
            let body = text.lines().nth(1).expect("fixture body line").trim();
            assert_eq!(poly.to_string(), body, "canonical form drifted for {name}");
            let reparsed = MultiPoly::parse(&["w1", "w2", "d"], &poly.to_string()).unwrap();
            assert_eq!(reparsed, poly);
        }
    }

    #[test]
    fn arithmetic_is_exact() {
        // (p + q) - q == p and eval is a ring homomorphism, on a few
        // deterministic pseudo-random polynomials.
        let v = ["x", "y"];
        let mut stream = crate::rng::GaussianStream::new(42);
        let mut small_poly = || {
            let mut p = MultiPoly::zero(&v);
            for _ in 0..6 {
                let num = (stream.next_uniform() * 21.0).floor() as i64 - 10;
                let ex = (stream.next_uniform() * 4.0).floor() as u32;
                let ey = (stream.next_uniform() * 4.0).floor() as u32;
                p.add_term(&[ex, ey], &rat_int(num));
            }
            p
        };
        for _ in 0..20 {
            let p = small_poly();
            let q = small_poly();
            assert_eq!(&(&p + &q) - &q, p);
            let vals = [BigRational::new(3.into(), 7.into()), rat_int(-2)];
            let lhs = (&p * &q).eval(&vals).unwrap();
            let rhs = p.eval(&vals).unwrap() * q.eval(&vals).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn substitute_specializes_one_variable() {
        let v = ["w1", "d"];
        let p = MultiPoly::parse(&v, "w1^2*d - w1*d^2").unwrap();
        let s = p.substitute("d", &rat_int(3)).unwrap();
        assert_eq!(s, MultiPoly::parse(&v, "3*w1^2 - 9*w1").unwrap());
        assert_eq!(s.degree_in("d").unwrap(), 0);
    }

    #[test]
    fn display_edge_cases() {
        let v = ["w1", "w2"];
        assert_eq!(MultiPoly::zero(&v).to_string(), "0");
        assert_eq!(MultiPoly::int_constant(&v, -1).to_string(), "-1");
        let p = MultiPoly::parse(&v, "-w1 + 1").unwrap();
        assert_eq!(p.to_string(), "-w1 + 1");
        let q = MultiPoly::parse(&v, "1/2*w1*w2 - 3/4").unwrap();
        assert_eq!(q.to_string(), "1/2*w1*w2 - 3/4");
        let r = MultiPoly::parse(&v, "w1^2 - w2").unwrap();
        assert_eq!(r.to_string(), "w1^2 - w2");
    }

    #[test]
    fn parse_rejects_malformed_input() {
        let v = ["w"];
        assert!(matches!(
            MultiPoly::parse(&v, "w + "),
            Err(AlgebraError::Parse(_))
        ));
        assert!(matches!(
            MultiPoly::parse(&v, ""),
            Err(AlgebraError::Parse(_))
        ));
        assert!(matches!(
            MultiPoly::parse(&v, "w^x"),
            Err(AlgebraError::Parse(_))
        ));
        assert!(matches!(
            MultiPoly::parse(&v, "z + 1"),
            Err(AlgebraError::VarMismatch(_))
        ));
        assert!(matches!(
            MultiPoly::parse(&v, "1/0"),
            Err(AlgebraError::Parse(_))
        ));
    }

    #[test]
    fn leading_term_is_lex_max() {
        let v = ["w1", "w2"];
        // w1 dominates w2 under lex regardless of total degree.
        let p = MultiPoly::parse(&v, "w1*w2 + w2^5").unwrap();
        let (exps, _) = p.leading().unwrap();
        assert_eq!(exps, &vec![1, 1]);
    }

    #[test]
    #[should_panic(expected = "identical variable lists")]
    fn var_mismatch_panics_in_arithmetic() {
        let a = MultiPoly::one(&["x"]);
        let b = MultiPoly::one(&["y"]);
        let _ = &a + &b;
    }
}
