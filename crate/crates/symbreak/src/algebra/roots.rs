//! Univariate exact-rational polynomials: Yun square-free factorization,
//! Sturm-sequence isolation on a Cauchy bound interval, and bisection
//! refinement.  Everything stays in `BigRational`, so root counts are
//! certified and rational roots come out exact.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::poly::MultiPoly;
use super::AlgebraError;

/// Dense univariate polynomial, coefficients ascending by degree.
/// Invariant: the last coefficient is nonzero; the zero polynomial is empty.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct UniPoly {
    coeffs: Vec<BigRational>,
}

impl UniPoly {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn from_int_coeffs(coeffs: &[i64]) -> Self {
        Self::new(
            coeffs
                .iter()
                .map(|&c| BigRational::from_integer(BigInt::from(c)))
                .collect(),
        )
    }

    /// Extract the univariate polynomial in `var`; every other variable must
    /// have exponent zero throughout.
    pub fn from_multipoly(p: &MultiPoly, var: &str) -> Result<Self, AlgebraError> {
        let idx = p.var_index(var)?;
        let deg = p.degree_in(var)? as usize;
        let mut coeffs = vec![BigRational::zero(); deg + 1];
        for (exps, coeff) in p.terms() {
            for (i, &e) in exps.iter().enumerate() {
                if i != idx && e != 0 {
                    return Err(AlgebraError::BadInput(format!(
                        "polynomial is not univariate in '{var}': variable '{}' appears",
                        p.vars()[i]
                    )));
                }
            }
            coeffs[exps[idx] as usize] = coeff.clone();
        }
        Ok(Self::new(coeffs))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// None for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Self::zero();
        }
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigRational::from_integer(BigInt::from(i)))
                .collect(),
        )
    }

    pub fn monic(&self) -> Self {
        match self.coeffs.last() {
            None => Self::zero(),
            Some(lead) => {
                let inv = BigRational::one() / lead.clone();
                Self {
                    coeffs: self.coeffs.iter().map(|c| c * &inv).collect(),
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![BigRational::zero(); n];
        for (i, c) in self.coeffs.iter().enumerate() {
            out[i] += c;
        }
        for (i, c) in other.coeffs.iter().enumerate() {
            out[i] += c;
        }
        Self::new(out)
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![BigRational::zero(); n];
        for (i, c) in self.coeffs.iter().enumerate() {
            out[i] += c;
        }
        for (i, c) in other.coeffs.iter().enumerate() {
            out[i] -= c;
        }
        Self::new(out)
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![BigRational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    /// Long division: returns (quotient, remainder) with deg r < deg divisor.
    pub fn divrem(&self, divisor: &Self) -> (Self, Self) {
        assert!(!divisor.is_zero(), "division by the zero polynomial");
        let dd = divisor.degree().unwrap();
        if self.degree().map_or(true, |d| d < dd) {
            return (Self::zero(), self.clone());
        }
        let lead = divisor.coeffs[dd].clone();
        let mut rem = self.coeffs.clone();
        let qlen = rem.len() - dd;
        let mut q = vec![BigRational::zero(); qlen];
        for i in (0..qlen).rev() {
            let c = &rem[i + dd] / &lead;
            if c.is_zero() {
                continue;
            }
            for (j, dc) in divisor.coeffs.iter().enumerate() {
                let delta = dc * &c;
                rem[i + j] -= delta;
            }
            q[i] = c;
        }
        rem.truncate(dd);
        (Self::new(q), Self::new(rem))
    }

    /// Division known to be exact; panics if a remainder survives.
    pub fn div_exact(&self, divisor: &Self) -> Self {
        let (q, r) = self.divrem(divisor);
        assert!(r.is_zero(), "division expected to be exact left a remainder");
        q
    }

    /// Monic gcd via the Euclidean remainder sequence.  Remainders are
    /// monicized each step to keep coefficient growth in check.
    pub fn gcd(a: &Self, b: &Self) -> Self {
        let mut x = a.clone();
        let mut y = b.clone();
        while !y.is_zero() {
            let r = x.divrem(&y).1;
            x = y;
            y = r.monic();
        }
        x.monic()
    }

    pub fn square_free_part(&self) -> Self {
        assert!(!self.is_zero(), "square-free part of the zero polynomial");
        let g = Self::gcd(self, &self.derivative());
        if g.degree() == Some(0) {
            self.monic()
        } else {
            self.div_exact(&g).monic()
        }
    }

    /// Yun square-free decomposition: returns factors `a_1, a_2, ...` where
    /// `a_m` collects exactly the roots of multiplicity `m`, so
    /// `p = lc * prod a_m^m`.
    pub fn yun(&self) -> Vec<Self> {
        assert!(!self.is_zero(), "Yun factorization of the zero polynomial");
        let p = self.monic();
        if p.degree() == Some(0) {
            return vec![p];
        }
        let dp = p.derivative();
        let g = Self::gcd(&p, &dp);
        if g.degree() == Some(0) {
            return vec![p];
        }
        let mut out = Vec::new();
        let mut w = p.div_exact(&g);
        let mut z = dp.div_exact(&g).sub(&w.derivative());
        loop {
            let a = Self::gcd(&w, &z);
            w = w.div_exact(&a);
            out.push(a.clone());
            if w.degree() == Some(0) {
                break;
            }
            z = z.div_exact(&a).sub(&w.derivative());
        }
        out
    }

    /// Every real root has absolute value strictly below this bound.
    pub fn cauchy_bound(&self) -> BigRational {
        let n = self.degree().expect("bound of the zero polynomial");
        let lead = self.coeffs[n].abs();
        let mut m = BigRational::zero();
        for c in &self.coeffs[..n] {
            let ratio = c.abs() / lead.clone();
            if ratio > m {
                m = ratio;
            }
        }
        m + BigRational::one()
    }

    fn sturm_chain(&self) -> Vec<Self> {
        let mut chain = vec![self.monic(), self.derivative().monic()];
        loop {
            let k = chain.len();
            if chain[k - 1].is_zero() {
                chain.pop();
                break;
            }
            let r = chain[k - 2].divrem(&chain[k - 1]).1;
            if r.is_zero() {
                break;
            }
            // Negate the remainder; monic scaling preserves signs only up to
            // the leading coefficient, so scale by its magnitude instead.
            let lead_mag = r.coeffs.last().unwrap().abs();
            let scaled = Self {
                coeffs: r.coeffs.iter().map(|c| -(c / &lead_mag)).collect(),
            };
            chain.push(scaled);
        }
        chain
    }
}

fn sign_variations(chain: &[UniPoly], x: &BigRational) -> usize {
    let mut count = 0;
    let mut last: Option<bool> = None;
    for p in chain {
        let v = p.eval(x);
        if v.is_zero() {
            continue;
        }
        let s = v.is_positive();
        if let Some(prev) = last {
            if prev != s {
                count += 1;
            }
        }
        last = Some(s);
    }
    count
}

/// An isolating interval `[lo, hi]` around one real root; `lo == hi` means
/// the root is exactly rational.
#[derive(Clone, Debug)]
pub struct IsolatedRoot {
    pub lo: BigRational,
    pub hi: BigRational,
    pub multiplicity: u32,
}

impl IsolatedRoot {
    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn midpoint(&self) -> BigRational {
        if self.is_exact() {
            self.lo.clone()
        } else {
            (&self.lo + &self.hi) / BigRational::from_integer(BigInt::from(2))
        }
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        self.lo <= *x && *x <= self.hi
    }

    pub fn approx_f64(&self) -> f64 {
        rat_to_f64(&self.midpoint())
    }
}

enum Region {
    Point(BigRational),
    Interval(BigRational, BigRational),
}

/// Isolate the roots of a square-free polynomial.  Rational roots hit by a
/// bisection midpoint are deflated out exactly and reported as points.
fn isolate_square_free(q0: &UniPoly) -> Vec<Region> {
    let mut q = q0.monic();
    let mut points: Vec<BigRational> = Vec::new();
    let mut intervals: Vec<(BigRational, BigRational)> = Vec::new();
    let two = BigRational::from_integer(BigInt::from(2));
    'restart: loop {
        intervals.clear();
        if q.degree().unwrap_or(0) == 0 {
            break;
        }
        let mut b = q.cauchy_bound();
        // The Cauchy bound is strict, but guard anyway: endpoints must not
        // be roots for the Sturm counts below.
        while q.eval(&b).is_zero() || q.eval(&(-b.clone())).is_zero() {
            b += BigRational::one();
        }
        let chain = q.sturm_chain();
        let mut stack = vec![(-b.clone(), b.clone())];
        while let Some((lo, hi)) = stack.pop() {
            let n = sign_variations(&chain, &lo) - sign_variations(&chain, &hi);
            if n == 0 {
                continue;
            }
            if n == 1 {
                intervals.push((lo, hi));
                continue;
            }
            let mid = (&lo + &hi) / &two;
            if q.eval(&mid).is_zero() {
                points.push(mid.clone());
                let linear = UniPoly::new(vec![-mid, BigRational::one()]);
                q = q.div_exact(&linear);
                continue 'restart;
            }
            stack.push((lo, mid.clone()));
            stack.push((mid, hi));
        }
        break;
    }
    let mut regions: Vec<Region> = points.into_iter().map(Region::Point).collect();
    regions.extend(intervals.into_iter().map(|(a, b)| Region::Interval(a, b)));
    regions
}

/// Shrink an isolating interval below `precision` by sign bisection.
/// The input interval carries a sign change because the root is simple.
fn refine_bisect(
    q: &UniPoly,
    mut lo: BigRational,
    mut hi: BigRational,
    precision: &BigRational,
) -> (BigRational, BigRational) {
    let two = BigRational::from_integer(BigInt::from(2));
    let lo_neg = q.eval(&lo).is_negative();
    loop {
        if &hi - &lo <= *precision {
            return (lo, hi);
        }
        let mid = (&lo + &hi) / &two;
        let v = q.eval(&mid);
        if v.is_zero() {
            return (mid.clone(), mid);
        }
        if v.is_negative() == lo_neg {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

/// Simplest rational in the closed interval `[lo, hi]`: the unique one with
/// the smallest denominator (Stern-Brocot walk on the endpoint continued
/// fractions).
pub fn simplest_in_interval(lo: &BigRational, hi: &BigRational) -> BigRational {
    assert!(lo <= hi, "empty interval");
    if lo == hi {
        return lo.clone();
    }
    if !lo.is_positive() && !hi.is_negative() {
        return BigRational::zero();
    }
    if hi.is_negative() {
        return -simplest_positive(&-hi.clone(), &-lo.clone());
    }
    simplest_positive(lo, hi)
}

fn simplest_positive(lo: &BigRational, hi: &BigRational) -> BigRational {
    let ceil_lo = lo.ceil();
    if ceil_lo <= *hi {
        return ceil_lo;
    }
    // Both endpoints sit strictly inside (floor(lo), floor(lo)+1); recurse on
    // the reciprocal of the fractional parts.
    let fl = lo.floor();
    let inner = simplest_positive(
        &(BigRational::one() / (hi - &fl)),
        &(BigRational::one() / (lo - &fl)),
    );
    fl + BigRational::one() / inner
}

/// All real roots of `p` with multiplicities, each isolated to an interval
/// of width at most `precision`, sorted ascending.  Rational roots whose
/// denominator is small relative to the precision collapse to exact points:
/// after refinement the simplest rational inside the interval is tested by
/// exact evaluation.
pub fn real_roots(p: &UniPoly, precision: &BigRational) -> Result<Vec<IsolatedRoot>, AlgebraError> {
    if p.is_zero() {
        return Err(AlgebraError::BadInput(
            "real_roots of the zero polynomial".into(),
        ));
    }
    if !precision.is_positive() {
        return Err(AlgebraError::BadInput("precision must be positive".into()));
    }
    let mut out: Vec<IsolatedRoot> = Vec::new();
    if p.degree() == Some(0) {
        return Ok(out);
    }
    for (idx, factor) in p.yun().into_iter().enumerate() {
        let mult = (idx + 1) as u32;
        if factor.degree().unwrap_or(0) == 0 {
            continue;
        }
        for region in isolate_square_free(&factor) {
            let (lo, hi) = match region {
                Region::Point(r) => (r.clone(), r),
                Region::Interval(lo, hi) => {
                    let (lo, hi) = refine_bisect(&factor, lo, hi, precision);
                    if lo != hi {
                        let snap = simplest_in_interval(&lo, &hi);
                        if factor.eval(&snap).is_zero() {
                            (snap.clone(), snap)
                        } else {
                            (lo, hi)
                        }
                    } else {
                        (lo, hi)
                    }
                }
            };
            out.push(IsolatedRoot {
                lo,
                hi,
                multiplicity: mult,
            });
        }
    }
    out.sort_by(|a, b| a.midpoint().cmp(&b.midpoint()));
    Ok(out)
}

/// Convert an arbitrary-size rational to the nearest-ish f64 by scaling into
/// an 80-bit integer window first.  Accurate to a couple of ulps, which is
/// all the float consumers need; values beyond the f64 range saturate.
pub fn rat_to_f64(r: &BigRational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    let neg = r.is_negative();
    let num = r.numer().abs();
    let den = r.denom().abs();
    let shift = (den.bits() as i64 - num.bits() as i64 + 80).max(0);
    if shift > 1_200 {
        // Value below 2^-1120, under the smallest subnormal.
        return if neg { -0.0 } else { 0.0 };
    }
    let q: BigInt = (num << (shift as u64)) / den;
    let qf = q.to_f64().unwrap_or(f64::INFINITY);
    // Apply 2^-shift in two exact power-of-two factors so a representable
    // value never underflows through an unrepresentable intermediate.
    let val = if shift <= 1_000 {
        qf * 2f64.powi(-(shift as i32))
    } else {
        qf * 2f64.powi(-1_000) * 2f64.powi(-((shift - 1_000) as i32))
    };
    if neg {
        -val
    } else {
        val
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::poly::rat_int;

    fn prec(k: u32) -> BigRational {
        BigRational::new(BigInt::one(), BigInt::from(10u32).pow(k))
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn cubic_with_double_root() {
        // x^2 (x - 1): roots 0 (mult 2) and 1 (mult 1).
        let p = UniPoly::from_int_coeffs(&[0, 0, -1, 1]);
        let roots = real_roots(&p, &prec(30)).unwrap();
        assert_eq!(roots.len(), 2);
        assert!(roots[0].contains(&rat_int(0)));
        assert_eq!(roots[0].multiplicity, 2);
        assert!(roots[1].contains(&rat_int(1)));
        assert_eq!(roots[1].multiplicity, 1);
    }

    #[test]
    fn complex_pair_is_ignored() {
        // (x - 1)^2 (x^2 + 1).
        let a = UniPoly::from_int_coeffs(&[1, -2, 1]);
        let b = UniPoly::from_int_coeffs(&[1, 0, 1]);
        let p = a.mul(&b);
        let roots = real_roots(&p, &prec(30)).unwrap();
        assert_eq!(roots.len(), 1);
        assert!(roots[0].contains(&rat_int(1)));
        assert_eq!(roots[0].multiplicity, 2);
    }

    #[test]
    fn sqrt_two_refinement() {
        let p = UniPoly::from_int_coeffs(&[-2, 0, 1]);
        let roots = real_roots(&p, &prec(30)).unwrap();
        assert_eq!(roots.len(), 2);
        let pos = &roots[1];
        assert!(!pos.is_exact());
        assert!(&pos.hi - &pos.lo <= prec(30));
        // Exact bracketing certificate.
        assert!(p.eval(&pos.lo).is_negative() != p.eval(&pos.hi).is_negative());
        assert!((pos.approx_f64() - std::f64::consts::SQRT_2).abs() < 1e-15);
        assert!((roots[0].approx_f64() + std::f64::consts::SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn ten_integer_roots() {
        // prod_{k=1..10} (x - k).
        let mut p = UniPoly::from_int_coeffs(&[1]);
        for k in 1..=10 {
            p = p.mul(&UniPoly::from_int_coeffs(&[-k, 1]));
        }
        let roots = real_roots(&p, &prec(25)).unwrap();
        assert_eq!(roots.len(), 10);
        for (i, root) in roots.iter().enumerate() {
            assert!(root.contains(&rat_int(i as i64 + 1)));
            assert_eq!(root.multiplicity, 1);
        }
    }

    #[test]
    fn constants_and_zero() {
        let c = UniPoly::from_int_coeffs(&[5]);
        assert!(real_roots(&c, &prec(10)).unwrap().is_empty());
        assert!(real_roots(&UniPoly::zero(), &prec(10)).is_err());
    }

    #[test]
    fn divrem_identity() {
        // q*b + r == a with deg r < deg b.
        let a = UniPoly::new(vec![rat(1, 2), rat(-3, 1), rat(0, 1), rat(7, 5), rat(1, 1)]);
        let b = UniPoly::new(vec![rat(2, 3), rat(1, 1), rat(1, 4)]);
        let (q, r) = a.divrem(&b);
        assert!(r.degree().unwrap_or(0) < b.degree().unwrap());
        assert_eq!(q.mul(&b).add(&r), a);
    }

    #[test]
    fn gcd_of_shared_factor() {
        // gcd(x^2 - 1, x^2 - 2x + 1) = x - 1.
        let a = UniPoly::from_int_coeffs(&[-1, 0, 1]);
        let b = UniPoly::from_int_coeffs(&[1, -2, 1]);
        let g = UniPoly::gcd(&a, &b);
        assert_eq!(g, UniPoly::from_int_coeffs(&[-1, 1]));
    }

    #[test]
    fn yun_splits_multiplicities() {
        // (x-1)(x-2)^2(x-3)^3.
        let lin = |k: i64| UniPoly::from_int_coeffs(&[-k, 1]);
        let p = lin(1)
            .mul(&lin(2))
            .mul(&lin(2))
            .mul(&lin(3))
            .mul(&lin(3))
            .mul(&lin(3));
        let factors = p.yun();
        assert_eq!(factors.len(), 3);
        assert_eq!(factors[0], lin(1));
        assert_eq!(factors[1], lin(2));
        assert_eq!(factors[2], lin(3));
        let roots = real_roots(&p, &prec(20)).unwrap();
        let mults: Vec<u32> = roots.iter().map(|r| r.multiplicity).collect();
        assert_eq!(mults, vec![1, 2, 3]);
    }

    #[test]
    fn square_free_part_strips_powers() {
        let lin = |k: i64| UniPoly::from_int_coeffs(&[-k, 1]);
        let p = lin(4).mul(&lin(4)).mul(&lin(5));
        assert_eq!(p.square_free_part(), lin(4).mul(&lin(5)).monic());
    }

    #[test]
    fn rational_conversion_accuracy() {
        assert_eq!(rat_to_f64(&rat(1, 2)), 0.5);
        assert_eq!(rat_to_f64(&rat(-3, 4)), -0.75);
        assert!((rat_to_f64(&rat(1, 3)) - 1.0 / 3.0).abs() < 1e-16);
        let big = BigRational::new(BigInt::from(10u8).pow(40u32).into(), BigInt::one());
        assert!((rat_to_f64(&big) - 1e40).abs() / 1e40 < 1e-12);
        let tiny = BigRational::new(BigInt::one(), BigInt::from(10u8).pow(45u32));
        assert!((rat_to_f64(&tiny) - 1e-45).abs() / 1e-45 < 1e-9);
        assert_eq!(rat_to_f64(&BigRational::zero()), 0.0);
    }

    #[test]
    fn simplest_rational_selection() {
        assert_eq!(simplest_in_interval(&rat(3, 10), &rat(2, 5)), rat(1, 3));
        assert_eq!(simplest_in_interval(&rat(-2, 5), &rat(-3, 10)), rat(-1, 3));
        assert_eq!(simplest_in_interval(&rat(21, 10), &rat(7, 2)), rat(3, 1));
        assert_eq!(simplest_in_interval(&rat(-1, 10), &rat(1, 7)), rat(0, 1));
        assert_eq!(simplest_in_interval(&rat(5, 7), &rat(5, 7)), rat(5, 7));
    }

    #[test]
    fn rational_roots_snap_to_exact_points() {
        // (x - 22/7)(x^2 - 2): the rational root is not a dyadic bisection
        // midpoint, so only the simplest-rational snap can make it exact.
        let p = UniPoly::new(vec![rat(-22, 7), rat(1, 1)]).mul(&UniPoly::from_int_coeffs(&[-2, 0, 1]));
        let roots = real_roots(&p, &prec(30)).unwrap();
        assert_eq!(roots.len(), 3);
        let exact: Vec<&IsolatedRoot> = roots.iter().filter(|r| r.is_exact()).collect();
        assert_eq!(exact.len(), 1);
        assert_eq!(exact[0].lo, rat(22, 7));
    }

    #[test]
    fn multipoly_bridge() {
        let v = ["w1", "w2"];
        let p = MultiPoly::parse(&v, "w2^3 - 2*w2 + 1/2").unwrap();
        let u = UniPoly::from_multipoly(&p, "w2").unwrap();
        assert_eq!(u.degree(), Some(3));
        assert_eq!(u.eval(&rat_int(1)), rat(-1, 2));
        let mixed = MultiPoly::parse(&v, "w1*w2").unwrap();
        assert!(UniPoly::from_multipoly(&mixed, "w2").is_err());
    }
}
