//! Fixture verification: polish each stored table, check gradient, loss, and
//! second-order data, then verify the caption's isotropy label on the
//! symmetric representative of the table's critical manifold.
//!
//! The printed tables are 4-decimal roundings of generic points on
//! positive-dimensional critical manifolds, so a polished table generally
//! carries less symmetry than its caption. Verification therefore walks from
//! the polished point to the caption group's fixed-point space (small
//! projection steps, re-polishing after each) and checks the label there.
//! Caption labels are compared by the detected group's row-orbit block sizes
//! and exact group order; where the caption string is reproduced verbatim it
//! is asserted as well.
//!
//! Two caption claims are not reproducible from the paper's own kernel
//! formula and tables (the cubic-Gaussian pair: claimed loss 1, actual
//! 3.7721…; claimed minimality, actual saddle with min eigenvalue ≈ −1e−2
//! against max ≈ 2e2..3.5e2). Those checks assert the derived values and
//! print the discrepancy; see README "Known discrepancies".

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::Args;
use symbreak::kernel::KernelKind;
use symbreak::loss::{self, LossProblem};
use symbreak::optimize::{classify, polish_newton};
use symbreak::symmetry::{
    isotropy_group, row_orbit_block_sizes, FixedPointBasis, PermPair, Permutation,
};
use symbreak::tensor::WeightMatrix;

use crate::commands::{fmt17, read_matrix, zero_dust};

/// Post-polish gradient requirement.
const GRAD_TOL: f64 = 1e-8;
/// Allowed |loss − expected|.
const LOSS_TOL: f64 = 1e-4;
/// Relative PSD slack for the Hessian.
const EPS_H: f64 = 1e-6;
/// Detection tolerance on the exactly symmetric representative.
const SYMREP_ISO_TOL: f64 = 1e-6;

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Directory holding the six fixture CSVs.
    #[arg(long, default_value = "fixtures/appendix")]
    pub dir: PathBuf,
    /// Isotropy clustering tolerance for the raw-table label report.
    #[arg(long, default_value_t = symbreak::symmetry::DEFAULT_ISO_TOL)]
    pub tol: f64,
}

struct FixtureSpec {
    name: &'static str,
    kernel: &'static str,
    d: usize,
    /// Loss the paper's caption claims.
    caption_loss: f64,
    /// Loss the table actually attains; equals the caption where the caption
    /// is reproducible, otherwise the independently derived value.
    verified_loss: f64,
    /// False for the cubic-Gaussian pair: caption loss and minimality do not
    /// follow from the paper's printed kernel and tables.
    caption_reproducible: bool,
    caption_label: &'static str,
    /// Young blocks of the caption group, acting diagonally on leading
    /// consecutive index ranges.
    blocks: &'static [usize],
    /// Extra diagonal generator, as a product of 2-cycles (0-indexed).
    extra_diag: &'static [(usize, usize)],
    /// Extra row-only generator: caption S_2 factors that pair duplicate
    /// rows (their column action cannot hold, e.g. across a zero column).
    extra_row: &'static [(usize, usize)],
    /// Expected isotropy group order at the symmetric representative.
    expected_order: u128,
    /// Expected row-orbit block sizes (the caption's block-size multiset).
    expected_orbits: &'static [usize],
    /// When the detected label string reproduces the caption verbatim it is
    /// asserted; otherwise order + orbits carry the assertion.
    expect_verbatim_label: bool,
    /// One table's label is reported, not asserted (spec open question).
    assert_label: bool,
}

const FIXTURES: &[FixtureSpec] = &[
    FixtureSpec {
        name: "fig1_left",
        kernel: "poly:3",
        d: 12,
        caption_loss: 0.5,
        verified_loss: 0.5,
        caption_reproducible: true,
        caption_label: "Δ(S_9×S_2×S_1)",
        blocks: &[9, 2, 1],
        extra_diag: &[],
        extra_row: &[],
        expected_order: 725_760,
        expected_orbits: &[9, 2, 1],
        expect_verbatim_label: true,
        assert_label: true,
    },
    FixtureSpec {
        name: "fig1_right",
        kernel: "poly:3",
        d: 12,
        caption_loss: 0.5,
        verified_loss: 0.5,
        caption_reproducible: true,
        caption_label: "Δ(S_10×S_2)",
        blocks: &[10],
        extra_diag: &[],
        extra_row: &[(10, 11)],
        expected_order: 7_257_600,
        expected_orbits: &[10, 2],
        expect_verbatim_label: false,
        assert_label: true,
    },
    FixtureSpec {
        name: "fig3_left",
        kernel: "poly:5",
        d: 12,
        caption_loss: 1.0,
        verified_loss: 1.0,
        caption_reproducible: true,
        caption_label: "Δ(S_8×⟨(9 10)(11 12)⟩)",
        blocks: &[8],
        extra_diag: &[(8, 9), (10, 11)],
        extra_row: &[],
        expected_order: 161_280,
        expected_orbits: &[8, 2, 2],
        expect_verbatim_label: false,
        assert_label: true,
    },
    FixtureSpec {
        name: "fig3_right",
        kernel: "poly:5",
        d: 12,
        caption_loss: 1.0,
        verified_loss: 1.0,
        caption_reproducible: true,
        caption_label: "Δ(S_9×S_1^3)",
        blocks: &[9],
        extra_diag: &[],
        extra_row: &[],
        expected_order: 362_880,
        expected_orbits: &[9, 1, 1, 1],
        expect_verbatim_label: true,
        assert_label: false,
    },
    FixtureSpec {
        name: "fig4_left",
        kernel: "cubic-gaussian",
        d: 10,
        caption_loss: 1.0,
        verified_loss: 3.772128249692,
        caption_reproducible: false,
        caption_label: "Δ(S_6×S_2×S_1^2)",
        blocks: &[6, 2],
        extra_diag: &[],
        extra_row: &[],
        expected_order: 1_440,
        expected_orbits: &[6, 2, 1, 1],
        expect_verbatim_label: true,
        assert_label: true,
    },
    FixtureSpec {
        name: "fig4_right",
        kernel: "cubic-gaussian",
        d: 10,
        caption_loss: 1.0,
        verified_loss: 3.772138808113,
        caption_reproducible: false,
        caption_label: "Δ(S_8×S_1^2)",
        blocks: &[8],
        extra_diag: &[],
        extra_row: &[],
        expected_order: 40_320,
        expected_orbits: &[8, 1, 1],
        expect_verbatim_label: true,
        assert_label: true,
    },
];

fn caption_generators(spec: &FixtureSpec) -> Vec<PermPair> {
    let d = spec.d;
    let mut gens = Vec::new();
    let mut off = 0usize;
    for &b in spec.blocks {
        for t in off..off + b.saturating_sub(1) {
            gens.push(PermPair::diagonal(Permutation::transposition(d, t, t + 1)));
        }
        off += b;
    }
    if !spec.extra_diag.is_empty() {
        let mut img: Vec<usize> = (0..d).collect();
        for &(a, b) in spec.extra_diag {
            img.swap(a, b);
        }
        gens.push(PermPair::diagonal(
            Permutation::from_images(img).expect("valid images"),
        ));
    }
    for &(a, b) in spec.extra_row {
        gens.push(PermPair {
            row: Permutation::transposition(d, a, b),
            col: Permutation::identity(d),
        });
    }
    gens
}

fn frob_dist(a: &WeightMatrix, b: &WeightMatrix) -> f64 {
    a.data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Walk from a polished critical point to the caption group's fixed-point
/// space: partial projection steps with a Newton re-polish after each, so the
/// iterates stay on the critical manifold. Loss drift beyond 1e−6 rejects a
/// step (Newton accepts on gradient decrease and can otherwise cross basins).
fn symmetric_representative(
    problem: &LossProblem,
    start: &WeightMatrix,
    fp: &FixedPointBasis,
    loss_ref: f64,
) -> Result<WeightMatrix, String> {
    let mut w = start.clone();
    let mut t = 0.5f64;
    for _ in 0..400 {
        let p = fp.project_matrix(&w).map_err(|e| e.to_string())?;
        let dist = frob_dist(&w, &p);
        if dist <= 1e-11 {
            return Ok(w);
        }
        let mut w_try = w.clone();
        for (a, b) in w_try.data_mut().iter_mut().zip(p.data()) {
            *a += t * (b - *a);
        }
        let mut accepted = false;
        if let Ok(run) = polish_newton(problem, &w_try, 1e-10, 100) {
            if run.grad_norm <= 1e-9 && (run.loss - loss_ref).abs() <= 1e-6 {
                let new_dist = frob_dist(&run.w, &fp.project_matrix(&run.w).unwrap());
                if new_dist < dist {
                    w = run.w;
                    t = (t * 1.3).min(0.9);
                    accepted = true;
                }
            }
        }
        if !accepted {
            t *= 0.5;
            if t < 1e-4 {
                return Err(format!(
                    "no symmetric representative reachable: stalled {dist:.3e} from the fixed space"
                ));
            }
        }
    }
    Err("symmetrization did not converge in 400 steps".into())
}

/// Failures (assertions) and notes (reported discrepancies) for one fixture.
struct FixtureReport {
    failures: Vec<String>,
    notes: Vec<String>,
    detail: String,
}

fn check_fixture(spec: &FixtureSpec, dir: &Path, raw_tol: f64) -> Result<FixtureReport> {
    let mut failures = Vec::new();
    let mut notes = Vec::new();

    let path = dir.join(format!("{}.csv", spec.name));
    let w0 = read_matrix(&path)?;
    if w0.k() != spec.d || w0.d() != spec.d {
        failures.push(format!(
            "shape {}x{} differs from expected {}x{}",
            w0.k(),
            w0.d(),
            spec.d,
            spec.d
        ));
        return Ok(FixtureReport {
            failures,
            notes,
            detail: String::new(),
        });
    }
    let kind = KernelKind::parse(spec.kernel).context("fixture kernel")?;
    let problem = LossProblem::identity_target(kind, spec.d)?;

    let mut raw = w0.clone();
    zero_dust(&mut raw);
    let raw_label = isotropy_group(&raw, raw_tol).label;

    let run = match polish_newton(&problem, &w0, 1e-10, 300) {
        Ok(run) => run,
        Err(e) => {
            failures.push(format!("polish failed: {e}"));
            return Ok(FixtureReport {
                failures,
                notes,
                detail: String::new(),
            });
        }
    };
    if run.grad_norm > GRAD_TOL {
        failures.push(format!(
            "polished gradient {} exceeds {}",
            fmt17(run.grad_norm),
            fmt17(GRAD_TOL)
        ));
    }
    if (run.loss - spec.verified_loss).abs() > LOSS_TOL {
        failures.push(format!(
            "loss {} differs from expected {} by more than {LOSS_TOL}",
            fmt17(run.loss),
            fmt17(spec.verified_loss)
        ));
    }
    if !spec.caption_reproducible {
        notes.push(format!(
            "caption claims loss {}; the printed kernel and table give {} (asserted; see README discrepancies)",
            spec.caption_loss,
            fmt17(run.loss)
        ));
    }

    match classify(&problem, &run.w, EPS_H, GRAD_TOL) {
        Ok(cls) => {
            if cls.is_second_order_min {
                if !spec.caption_reproducible {
                    notes.push("second-order minimum after all".into());
                }
            } else if spec.caption_reproducible {
                failures.push(format!(
                    "not a second-order minimum: min_eig={} max_eig={}",
                    fmt17(cls.min_eig),
                    fmt17(cls.max_eig)
                ));
            } else {
                notes.push(format!(
                    "saddle of the printed kernel's loss: min_eig={} against max_eig={} (caption claims a minimum)",
                    fmt17(cls.min_eig),
                    fmt17(cls.max_eig)
                ));
            }
        }
        Err(e) => failures.push(format!("classification failed: {e}")),
    }

    // Caption label, verified on the symmetric representative of the
    // polished point's critical manifold.
    let mut label = String::from("(no symmetric representative)");
    if failures.is_empty() {
        let fp = FixedPointBasis::from_generators(caption_generators(spec), spec.d, spec.d)?;
        match symmetric_representative(&problem, &run.w, &fp, run.loss) {
            Ok(sym) => {
                let (sl, sg) = loss::loss_and_grad(&problem, &sym)?;
                let sgn = sg.frob_norm();
                if sgn > GRAD_TOL {
                    failures.push(format!(
                        "symmetric representative gradient {} exceeds {}",
                        fmt17(sgn),
                        fmt17(GRAD_TOL)
                    ));
                }
                if (sl - run.loss).abs() > 1e-6 {
                    failures.push(format!(
                        "symmetric representative loss {} drifted from {}",
                        fmt17(sl),
                        fmt17(run.loss)
                    ));
                }
                let mut wd = sym.clone();
                zero_dust(&mut wd);
                let iso = isotropy_group(&wd, SYMREP_ISO_TOL);
                label = iso.label.clone();
                let orbits = row_orbit_block_sizes(&iso.generators, spec.d);
                let mut label_failures = Vec::new();
                if orbits != spec.expected_orbits {
                    label_failures.push(format!(
                        "row-orbit blocks {orbits:?} differ from caption blocks {:?}",
                        spec.expected_orbits
                    ));
                }
                if iso.order != spec.expected_order || !iso.order_exact {
                    label_failures.push(format!(
                        "group order {}{} differs from expected {}",
                        iso.order,
                        if iso.order_exact { "" } else { " (lower bound)" },
                        spec.expected_order
                    ));
                }
                if spec.expect_verbatim_label && iso.label != spec.caption_label {
                    label_failures.push(format!(
                        "label {} differs from caption {}",
                        iso.label, spec.caption_label
                    ));
                }
                if !spec.expect_verbatim_label && label_failures.is_empty() {
                    notes.push(format!(
                        "caption {} holds by block sizes and order; detected generators include duplicate-row or zero-column symmetries (see ledger note in README)",
                        spec.caption_label
                    ));
                }
                if spec.assert_label {
                    failures.extend(label_failures);
                } else {
                    for f in label_failures {
                        notes.push(format!("reported only: {f}"));
                    }
                }
            }
            Err(e) => {
                if spec.assert_label {
                    failures.push(e);
                } else {
                    notes.push(format!("reported only: {e}"));
                }
            }
        }
    }

    let detail = format!(
        "loss={} |grad|={} label={}{} raw_label={}",
        fmt17(run.loss),
        fmt17(run.grad_norm),
        label,
        if spec.assert_label {
            String::new()
        } else {
            format!(" (caption {}, reported only)", spec.caption_label)
        },
        raw_label,
    );
    Ok(FixtureReport {
        failures,
        notes,
        detail,
    })
}

pub fn run(args: &VerifyArgs) -> Result<i32> {
    let mut failed = 0usize;
    for spec in FIXTURES {
        let report = check_fixture(spec, &args.dir, args.tol)
            .with_context(|| format!("fixture {}", spec.name))?;
        if report.failures.is_empty() {
            println!("PASS {}: {}", spec.name, report.detail);
        } else {
            failed += 1;
            println!("FAIL {}: {}", spec.name, report.failures.join("; "));
        }
        for note in &report.notes {
            println!("  note: {note}");
        }
    }
    println!(
        "fixtures: {} passed, {} failed",
        FIXTURES.len() - failed,
        failed
    );
    Ok(if failed == 0 { 0 } else { 1 })
}
