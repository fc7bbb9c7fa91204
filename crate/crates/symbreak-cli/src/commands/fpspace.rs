//! Fixed-point-space restriction: print the symbolic restricted loss and
//! partials, solve the critical-point system exactly at the given d values,
//! verify every solution against the full-space gradient, and reduce the
//! transcribed basis polynomials to confirm ideal membership.

use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use rayon::prelude::*;
use symbreak::algebra::{
    real_roots, reduce, restrict_loss_symbolic, restricted_partials, solve_restricted,
    GroebnerCaps, MultiPoly, RestrictedReport, RestrictionSpec, UniPoly,
};
use symbreak::kernel::KernelKind;
use symbreak::loss::{self, LossProblem};
use symbreak::symmetry::{fixed_point_basis, SubgroupSpec};

use crate::commands::fmt17;

/// Full-space gradient requirement at every exact-solve solution.
const EMBED_GRAD_TOL: f64 = 1e-8;
/// Distinct-root bound from the restricted system's structure.
const ROOT_BOUND: usize = 20;

#[derive(Args, Debug)]
pub struct FpspaceArgs {
    /// Fixed-point family: "DeltaSd" (diagonal S_d) or "SdxSd" (full product).
    #[arg(long)]
    pub spec: String,
    /// Dimensions to solve at, comma separated (solved in parallel).
    #[arg(long, value_delimiter = ',', required = true)]
    pub d: Vec<u32>,
    /// Kernel id; the exact solve is implemented for poly:3.
    #[arg(long, default_value = "poly:3")]
    pub kernel: String,
    /// Directory holding the transcribed basis polynomials g1.txt..g4.txt.
    #[arg(long, default_value = "fixtures/groebner")]
    pub groebner_dir: PathBuf,
}

fn parse_family(s: &str) -> Result<RestrictionSpec> {
    let norm: String = s
        .chars()
        .filter(|c| c.is_ascii_alphanumeric())
        .collect::<String>()
        .to_ascii_lowercase();
    match norm.as_str() {
        "deltasd" => Ok(RestrictionSpec::DeltaSd),
        "sdxsd" | "sdsd" => Ok(RestrictionSpec::SdSd),
        _ => bail!("unknown fixed-point family {s:?} (want DeltaSd or SdxSd)"),
    }
}

fn rat_str(r: &BigRational) -> String {
    r.to_string()
}

fn load_g_fixtures(dir: &PathBuf) -> Result<Vec<(String, MultiPoly)>> {
    (1..=4)
        .map(|i| {
            let path = dir.join(format!("g{i}.txt"));
            let text = fs::read_to_string(&path)
                .with_context(|| format!("reading {}", path.display()))?;
            let p = MultiPoly::parse_fixture(&text)
                .with_context(|| format!("parsing {}", path.display()))?;
            Ok((format!("g{i}"), p))
        })
        .collect()
}

/// Report one solved DeltaSd dimension; returns false if any check failed.
fn report_delta(
    d: u32,
    report: &RestrictedReport,
    gs: &[(String, MultiPoly)],
) -> Result<bool> {
    let mut ok = true;
    println!("d = {d}:");
    println!(
        "  reduced lex basis: {} elements; eliminant degree {}",
        report.basis.len(),
        report.eliminant.degree().unwrap_or(0)
    );

    let n_roots = report.w2_roots.len();
    println!("  distinct real w2 roots: {n_roots} (bound {ROOT_BOUND})");
    if n_roots > ROOT_BOUND {
        ok = false;
        println!("  CHECK FAILED: root count exceeds the bound");
    }
    for root in &report.w2_roots {
        if root.is_exact() {
            println!("    w2 = {} (exact)", rat_str(&root.lo));
        } else {
            println!("    w2 ~ {}", fmt17(root.approx_f64()));
        }
    }

    let du = d as usize;
    let fp = fixed_point_basis(&SubgroupSpec::DeltaYoung(vec![du]), du, du)?;
    let problem = LossProblem::identity_target(KernelKind::poly(3)?, du)?;
    for sol in &report.solutions {
        let w = fp.embed(&[sol.w1_f64(), sol.w2_f64()])?;
        let g = loss::grad_norm(&problem, &w)?;
        let coords = if sol.exact {
            format!("w1 = {}, w2 = {} (exact)", rat_str(&sol.w1), rat_str(&sol.w2))
        } else {
            format!(
                "w1 = {}, w2 = {} (approx)",
                fmt17(sol.w1_f64()),
                fmt17(sol.w2_f64())
            )
        };
        println!(
            "  solution: {coords}, residual {}, embedded |grad| = {}",
            fmt17(sol.residual),
            fmt17(g)
        );
        if g > EMBED_GRAD_TOL {
            ok = false;
            println!("  CHECK FAILED: embedded gradient exceeds {EMBED_GRAD_TOL:e}");
        }
    }

    // Membership: each transcribed g_i, specialized to this d, must reduce
    // to zero against the computed basis.
    let dv = BigRational::from_integer(BigInt::from(d));
    for (name, g) in gs {
        let gd = g.substitute("d", &dv)?;
        let rem = reduce(&gd, &report.basis);
        if rem.is_zero() {
            println!("  membership: {name}|d={d} reduces to 0 (member)");
        } else {
            ok = false;
            println!("  CHECK FAILED: {name}|d={d} leaves remainder {rem}");
        }
    }
    Ok(ok)
}

fn run_delta(args: &FpspaceArgs, r: u32) -> Result<i32> {
    let loss_poly = restrict_loss_symbolic(r, RestrictionSpec::DeltaSd)?;
    let parts = restricted_partials(&loss_poly)?;
    println!("fixed-point family DeltaSd: W = w1*I + w2*(ones - I), kernel poly:{r}");
    println!("  L = {loss_poly}");
    println!("  dL/dw1 = {}", parts[0]);
    println!("  dL/dw2 = {}", parts[1]);
    if r != 3 {
        bail!("the exact critical-point solve is implemented for poly:3 only");
    }

    let gs = load_g_fixtures(&args.groebner_dir)?;
    let caps = GroebnerCaps::default();
    let reports: Vec<_> = args
        .d
        .par_iter()
        .map(|&d| solve_restricted(d, &caps))
        .collect();

    let mut all_ok = true;
    for (&d, rep) in args.d.iter().zip(&reports) {
        match rep {
            Ok(rep) => {
                if !report_delta(d, rep, &gs)? {
                    all_ok = false;
                }
            }
            Err(e) => {
                all_ok = false;
                println!("d = {d}: solve failed: {e}");
            }
        }
    }
    println!("fpspace: {}", if all_ok { "pass" } else { "FAIL" });
    Ok(if all_ok { 0 } else { 1 })
}

fn run_sdsd(args: &FpspaceArgs, r: u32) -> Result<i32> {
    let loss_poly = restrict_loss_symbolic(r, RestrictionSpec::SdSd)?;
    let parts = restricted_partials(&loss_poly)?;
    println!("fixed-point family SdxSd: W = w*ones (constant matrix), kernel poly:{r}");
    println!("  L = {loss_poly}");
    println!("  dL/dw = {}", parts[0]);
    if r != 3 {
        bail!("the exact critical-point solve is implemented for poly:3 only");
    }

    // 30 decimal digits isolates every root of these low-degree systems.
    let precision = BigRational::new(BigInt::one(), BigInt::from(10u32).pow(30));
    let mut all_ok = true;
    for &d in &args.d {
        println!("d = {d}:");
        let dv = BigRational::from_integer(BigInt::from(d));
        let uni = UniPoly::from_multipoly(&parts[0].substitute("d", &dv)?, "w")?;
        let roots = real_roots(&uni, &precision)?;
        let du = d as usize;
        let fp = fixed_point_basis(&SubgroupSpec::FullProduct, du, du)?;
        let problem = LossProblem::identity_target(KernelKind::poly(3)?, du)?;
        for root in &roots {
            let x = root.approx_f64();
            let w = fp.embed(&[x])?;
            let g = loss::grad_norm(&problem, &w)?;
            if root.is_exact() {
                println!(
                    "  omega = {} (exact), embedded |grad| = {}",
                    rat_str(&root.lo),
                    fmt17(g)
                );
            } else {
                println!("  omega ~ {}, embedded |grad| = {}", fmt17(x), fmt17(g));
            }
            if g > EMBED_GRAD_TOL {
                all_ok = false;
                println!("  CHECK FAILED: embedded gradient exceeds {EMBED_GRAD_TOL:e}");
            }
        }
        println!("  distinct real critical omega: {}", roots.len());
    }
    println!("fpspace: {}", if all_ok { "pass" } else { "FAIL" });
    Ok(if all_ok { 0 } else { 1 })
}

pub fn run(args: &FpspaceArgs) -> Result<i32> {
    if args.d.is_empty() {
        bail!("at least one d value is required");
    }
    for &d in &args.d {
        if d < 2 {
            bail!("d must be >= 2, got {d}");
        }
    }
    let family = parse_family(&args.spec)?;
    let kind = KernelKind::parse(&args.kernel)?;
    let r = match kind {
        KernelKind::Poly(r) => r,
        other => bail!(
            "fpspace needs a polynomial kernel, got {:?} (the restriction is kernel-specific)",
            other
        ),
    };
    match family {
        RestrictionSpec::DeltaSd => run_delta(args, r),
        RestrictionSpec::SdSd => run_sdsd(args, r),
    }
}
