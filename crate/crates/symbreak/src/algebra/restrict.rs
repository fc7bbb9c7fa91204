//! Symbolic restriction of the poly(r) kernel loss (identity target, k = d)
//! to fixed-point subspaces, and exact solution of the Delta S_d restricted
//! critical-point system at numeric d.
//!
//! On the S_d x S_d subspace W = w 11^T every pairwise inner product lands
//! in a single class (<w_i, w_j> = w^2 d, <w_i, e_j> = w); on Delta S_d with
//! W = w1 I + w2 (11^T - I) there are four classes with cardinalities d,
//! d(d-1), d, d(d-1).  Raising each class value to the kernel power and
//! weighting by cardinality gives the restricted loss as an exact polynomial
//! in the coordinates and d.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::groebner::{groebner_lex, GroebnerCaps};
use super::poly::{rat_int, MultiPoly};
use super::roots::{rat_to_f64, real_roots, IsolatedRoot, UniPoly};
use super::AlgebraError;

/// Subspace selector for [`restrict_loss_symbolic`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RestrictionSpec {
    /// W = w 11^T, the one-parameter S_d x S_d family; variables (w, d).
    SdSd,
    /// W = w1 I + w2 (11^T - I), the Delta S_d family; variables (w1, w2, d).
    DeltaSd,
}

/// Variable order doubles as the lex elimination order: w1 is eliminated
/// first when solving the Delta S_d system.
pub const DELTA_SD_VARS: [&str; 3] = ["w1", "w2", "d"];
pub const SD_SD_VARS: [&str; 2] = ["w", "d"];

/// Width of the refined root intervals: 10^-30.
const ROOT_PRECISION_DIGITS: u32 = 30;

/// Candidate (w1, w2) pairs must drive both partials below this.  Residuals
/// come from exact rational evaluation at coordinates certified to 10^-30,
/// so genuine solutions land many orders of magnitude under it.
pub const RESIDUAL_TOL: f64 = 1e-12;

pub fn restrict_loss_symbolic(r: u32, spec: RestrictionSpec) -> Result<MultiPoly, AlgebraError> {
    if r == 0 || r % 2 == 0 {
        return Err(AlgebraError::BadInput(format!(
            "poly kernel exponent must be odd, got {r}"
        )));
    }
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    match spec {
        RestrictionSpec::SdSd => {
            let v = &SD_SD_VARS;
            let w = MultiPoly::var(v, "w")?;
            let d = MultiPoly::var(v, "d")?;
            // d^2 pair products all equal (w^2 d)^r; d^2 cross products all
            // equal w^r; the target self-term contributes d.
            let pairs = &d.pow(2) * &(&w.pow(2) * &d).pow(r);
            let cross = &d.pow(2) * &w.pow(r);
            let l = &(&pairs - &cross.scale(&rat_int(2))) + &d;
            Ok(l.scale(&half))
        }
        RestrictionSpec::DeltaSd => {
            let v = &DELTA_SD_VARS;
            let w1 = MultiPoly::var(v, "w1")?;
            let w2 = MultiPoly::var(v, "w2")?;
            let d = MultiPoly::var(v, "d")?;
            let one = MultiPoly::one(v);
            let dm1 = &d - &one;
            let dm2 = &dm1 - &one;
            let self_ip = &w1.pow(2) + &(&dm1 * &w2.pow(2));
            let cross_ip = &(&w1 * &w2).scale(&rat_int(2)) + &(&dm2 * &w2.pow(2));
            let pairs = &(&d * &self_ip.pow(r)) + &(&(&d * &dm1) * &cross_ip.pow(r));
            let mixed = &(&d * &w1.pow(r)) + &(&(&d * &dm1) * &w2.pow(r));
            let l = &(&pairs - &mixed.scale(&rat_int(2))) + &d;
            Ok(l.scale(&half))
        }
    }
}

/// Formal partials with respect to every coordinate variable (everything
/// except the size parameter d), in variable-list order.
pub fn restricted_partials(l: &MultiPoly) -> Result<Vec<MultiPoly>, AlgebraError> {
    let names: Vec<String> = l
        .vars()
        .iter()
        .filter(|n| n.as_str() != "d")
        .cloned()
        .collect();
    if names.is_empty() {
        return Err(AlgebraError::BadInput(
            "no coordinate variables to differentiate".into(),
        ));
    }
    names.iter().map(|n| l.derivative(n)).collect()
}

/// A verified real solution of the restricted critical-point system.
#[derive(Clone, Debug)]
pub struct RestrictedSolution {
    pub w1: BigRational,
    pub w2: BigRational,
    /// Both coordinates are exact rationals and both partials vanish
    /// identically there.
    pub exact: bool,
    /// max(|p1|, |p2|) from exact rational evaluation at the coordinates.
    pub residual: f64,
}

impl RestrictedSolution {
    pub fn w1_f64(&self) -> f64 {
        rat_to_f64(&self.w1)
    }

    pub fn w2_f64(&self) -> f64 {
        rat_to_f64(&self.w2)
    }
}

#[derive(Debug)]
pub struct RestrictedReport {
    pub d: u32,
    /// The two partials with d substituted, still over (w1, w2, d).
    pub partials: [MultiPoly; 2],
    /// Reduced lex Groebner basis, ascending leading monomials.
    pub basis: Vec<MultiPoly>,
    /// Monic generator of the elimination ideal in Q[w2].
    pub eliminant: UniPoly,
    pub w2_roots: Vec<IsolatedRoot>,
    /// Verified pairs, sorted by (w2, w1).
    pub solutions: Vec<RestrictedSolution>,
}

fn root_precision() -> BigRational {
    BigRational::new(BigInt::one(), BigInt::from(10u32).pow(ROOT_PRECISION_DIGITS))
}

/// Solve the Delta S_d critical-point system of the cubic kernel at numeric
/// d: Groebner elimination of w1, certified isolation of the w2 roots,
/// back-substitution for w1, and residual verification of every pair.
pub fn solve_restricted(d: u32, caps: &GroebnerCaps) -> Result<RestrictedReport, AlgebraError> {
    if d < 2 {
        return Err(AlgebraError::BadInput(format!(
            "solve_restricted needs d >= 2, got {d}"
        )));
    }
    let l = restrict_loss_symbolic(3, RestrictionSpec::DeltaSd)?;
    let parts = restricted_partials(&l)?;
    let dv = rat_int(d as i64);
    let p1 = parts[0].substitute("d", &dv)?;
    let p2 = parts[1].substitute("d", &dv)?;
    let basis = groebner_lex(&[p1.clone(), p2.clone()], caps)?;

    // The basis elements free of w1 generate the elimination ideal in
    // Q[w2]; it is principal, so fold them with a gcd.
    let mut eliminant = UniPoly::zero();
    for b in &basis {
        if b.degree_in("w1")? == 0 {
            eliminant = UniPoly::gcd(&eliminant, &UniPoly::from_multipoly(b, "w2")?);
        }
    }
    if eliminant.is_zero() {
        return Err(AlgebraError::Degenerate(
            "no eliminant: the restricted system is not zero-dimensional".into(),
        ));
    }
    let precision = root_precision();
    let w2_roots = real_roots(&eliminant, &precision)?;

    // A zero-dimensional lex ideal has exactly one reduced-basis element
    // whose leading monomial is a pure power of w1.  Being monic in w1 it
    // survives specialization at any w2, so it anchors the back-substitution
    // for irrational roots.
    let spine = basis
        .iter()
        .find(|b| match b.leading() {
            Some((e, _)) => e[0] > 0 && e[1..].iter().all(|&x| x == 0),
            None => false,
        });

    let mut solutions: Vec<RestrictedSolution> = Vec::new();
    for root in &w2_roots {
        let w2v = root.midpoint();
        let candidates: Vec<IsolatedRoot> = if root.is_exact() {
            // Exact fiber: gcd of every basis element specialized at w2
            // generates exactly the ideal of compatible w1 values.  Elements
            // that vanish under specialization drop out; if all of them
            // vanish the specialization is degenerate.
            let mut fiber = UniPoly::zero();
            let mut all_vanished = true;
            for b in &basis {
                let s = b.substitute("w2", &w2v)?;
                if s.is_zero() {
                    continue;
                }
                all_vanished = false;
                fiber = UniPoly::gcd(&fiber, &UniPoly::from_multipoly(&s, "w1")?);
            }
            if all_vanished {
                return Err(AlgebraError::Degenerate(format!(
                    "every basis element vanishes at w2 = {w2v}"
                )));
            }
            if fiber.degree().unwrap_or(0) == 0 {
                Vec::new()
            } else {
                real_roots(&fiber, &precision)?
            }
        } else {
            let spine = spine.ok_or_else(|| {
                AlgebraError::Degenerate("no basis element monic in w1".into())
            })?;
            let s = spine.substitute("w2", &w2v)?;
            real_roots(&UniPoly::from_multipoly(&s, "w1")?, &precision)?
        };
        for cand in candidates {
            let w1v = cand.midpoint();
            let vals = [w1v.clone(), w2v.clone(), dv.clone()];
            let r1 = p1.eval(&vals)?;
            let r2 = p2.eval(&vals)?;
            let exact = root.is_exact() && cand.is_exact() && r1.is_zero() && r2.is_zero();
            let residual = rat_to_f64(&r1.abs()).max(rat_to_f64(&r2.abs()));
            if residual <= RESIDUAL_TOL {
                solutions.push(RestrictedSolution {
                    w1: w1v,
                    w2: w2v.clone(),
                    exact,
                    residual,
                });
            }
        }
    }
    solutions.sort_by(|a, b| a.w2.cmp(&b.w2).then_with(|| a.w1.cmp(&b.w1)));
    Ok(RestrictedReport {
        d,
        partials: [p1, p2],
        basis,
        eliminant,
        w2_roots,
        solutions,
    })
}
