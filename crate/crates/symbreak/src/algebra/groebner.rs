//! Buchberger's algorithm and multivariate normal forms under lex order.
//!
//! Single-threaded and fully deterministic: the pair queue is a `BTreeSet`
//! keyed by (total degree of the lcm, lcm, indices), which is the classic
//! normal selection strategy, and the final inter-reduction yields the unique
//! reduced basis, so the output is independent of everything except the
//! ideal and the variable order.

use std::collections::BTreeSet;

use num_rational::BigRational;
use num_traits::One;

use super::poly::{Exponents, MultiPoly};
use super::AlgebraError;

/// Resource guard rails; the target systems sit far below both limits.
#[derive(Clone, Debug)]
pub struct GroebnerCaps {
    pub max_basis: usize,
    pub max_coeff_digits: u64,
}

impl Default for GroebnerCaps {
    fn default() -> Self {
        Self {
            max_basis: 500,
            max_coeff_digits: 1_000_000,
        }
    }
}

fn exp_divides(a: &[u32], b: &[u32]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

fn exp_sub(a: &[u32], b: &[u32]) -> Exponents {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn exp_lcm(a: &[u32], b: &[u32]) -> Exponents {
    a.iter().zip(b).map(|(x, y)| *x.max(y)).collect()
}

fn exp_add(a: &[u32], b: &[u32]) -> Exponents {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn reduce_refs(p: &MultiPoly, basis: &[&MultiPoly]) -> MultiPoly {
    let reducers: Vec<&MultiPoly> = basis.iter().copied().filter(|g| !g.is_zero()).collect();
    let mut work = p.clone();
    let mut remainder = MultiPoly::zero_like(p);
    'outer: while !work.is_zero() {
        let (lexp, lco) = {
            let (e, c) = work.leading().expect("nonzero poly has a leading term");
            (e.clone(), c.clone())
        };
        for g in &reducers {
            let (ge, gc) = g.leading().expect("reducers are nonzero");
            if exp_divides(ge, &lexp) {
                let factor = &lco / gc;
                work = &work - &g.mul_monomial(&factor, &exp_sub(&lexp, ge));
                continue 'outer;
            }
        }
        // No reducer applies: the leading term joins the remainder.  Each
        // pass strictly lowers the lex-leading monomial of `work`, so the
        // loop terminates.
        remainder.add_term(&lexp, &lco);
        work.remove_term(&lexp);
    }
    remainder
}

/// Multivariate division remainder of `p` by `basis`; zero iff `p` lies in
/// the ideal whenever `basis` is a Groebner basis.
pub fn reduce(p: &MultiPoly, basis: &[MultiPoly]) -> MultiPoly {
    let refs: Vec<&MultiPoly> = basis.iter().collect();
    reduce_refs(p, &refs)
}

pub(crate) fn spoly(f: &MultiPoly, g: &MultiPoly) -> MultiPoly {
    let (ef, cf) = f.leading().expect("spoly of zero polynomial");
    let (eg, cg) = g.leading().expect("spoly of zero polynomial");
    let lcm = exp_lcm(ef, eg);
    let a = f.mul_monomial(&(BigRational::one() / cf.clone()), &exp_sub(&lcm, ef));
    let b = g.mul_monomial(&(BigRational::one() / cg.clone()), &exp_sub(&lcm, eg));
    &a - &b
}

fn pair_key(g: &[MultiPoly], i: usize, j: usize) -> (u32, Exponents, usize, usize) {
    let (ei, _) = g[i].leading().expect("basis elements are nonzero");
    let (ej, _) = g[j].leading().expect("basis elements are nonzero");
    let l = exp_lcm(ei, ej);
    (l.iter().sum(), l, i, j)
}

fn check_caps(h: &MultiPoly, basis_len: usize, caps: &GroebnerCaps) -> Result<(), AlgebraError> {
    if basis_len >= caps.max_basis {
        return Err(AlgebraError::CapExceeded(format!(
            "basis grew past {} elements",
            caps.max_basis
        )));
    }
    // Digit cap checked in bits; 4 bits per digit over-counts, which only
    // makes the guard rail more lenient than stated, never tighter.
    if h.max_coeff_bits() > caps.max_coeff_digits.saturating_mul(4) {
        return Err(AlgebraError::CapExceeded(format!(
            "coefficient exceeded {} digits",
            caps.max_coeff_digits
        )));
    }
    Ok(())
}

/// Reduced lex Groebner basis of the ideal generated by `gens`, sorted by
/// ascending leading monomial (elimination-ideal elements come first).
pub fn groebner_lex(gens: &[MultiPoly], caps: &GroebnerCaps) -> Result<Vec<MultiPoly>, AlgebraError> {
    let mut g: Vec<MultiPoly> = Vec::new();
    for p in gens {
        if !p.is_zero() {
            if let Some(prev) = g.last() {
                if prev.vars() != p.vars() {
                    return Err(AlgebraError::VarMismatch(
                        "all generators must share one variable list".into(),
                    ));
                }
            }
            g.push(p.make_monic());
        }
    }
    if g.is_empty() {
        return Ok(g);
    }

    let mut pairs: BTreeSet<(u32, Exponents, usize, usize)> = BTreeSet::new();
    for j in 1..g.len() {
        for i in 0..j {
            pairs.insert(pair_key(&g, i, j));
        }
    }

    while let Some(key) = pairs.iter().next().cloned() {
        pairs.remove(&key);
        let (_, lcm, i, j) = key;
        let (ei, _) = g[i].leading().unwrap();
        let (ej, _) = g[j].leading().unwrap();
        // Product criterion: disjoint leading monomials reduce to zero.
        if lcm == exp_add(ei, ej) {
            continue;
        }
        let s = spoly(&g[i], &g[j]);
        let h = {
            let refs: Vec<&MultiPoly> = g.iter().collect();
            reduce_refs(&s, &refs)
        };
        if h.is_zero() {
            continue;
        }
        let h = h.make_monic();
        check_caps(&h, g.len(), caps)?;
        let k = g.len();
        g.push(h);
        for m in 0..k {
            pairs.insert(pair_key(&g, m, k));
        }
    }

    // Full inter-reduction: replace each element by its normal form against
    // the others until stable.  The result is the unique reduced basis.
    let mut passes = 0;
    loop {
        passes += 1;
        if passes > 1000 {
            return Err(AlgebraError::CapExceeded(
                "inter-reduction did not stabilize".into(),
            ));
        }
        let mut changed = false;
        let mut i = 0;
        while i < g.len() {
            let h = {
                let others: Vec<&MultiPoly> = g
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, p)| p)
                    .collect();
                reduce_refs(&g[i], &others)
            };
            if h.is_zero() {
                g.remove(i);
                changed = true;
                continue;
            }
            let h = h.make_monic();
            if h != g[i] {
                g[i] = h;
                changed = true;
            }
            i += 1;
        }
        if !changed {
            break;
        }
    }

    g.sort_by(|a, b| {
        a.leading()
            .map(|(e, _)| e.clone())
            .cmp(&b.leading().map(|(e, _)| e.clone()))
    });
    Ok(g)
}
