//! Multi-start gradient descent, Newton polishing, and second-order
//! classification of critical points.
//!
//! The survey loop is the workhorse of the experiments: many independent
//! Gaussian initializations, descent to a first-order point, eigenanalysis,
//! and dedup of the converged endpoints up to the S_k×S_d action via
//! canonical alignment. With the `parallel` feature the starts run on the
//! rayon pool; `survey_seq` is always available and produces byte-identical
//! records.

use crate::linalg::{solve_sym_shifted, sym_eigen, LinalgError};
use crate::loss::{self, LossError, LossProblem};
use crate::rng::GaussianStream;
use crate::symmetry::{canonical_align, isotropy_group};
use crate::tensor::WeightMatrix;
use thiserror::Error;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

pub const DEFAULT_MAX_ITERS: u64 = 500_000;
pub const DEFAULT_EPS_G: f64 = 1e-10;
/// Relative eigenvalue tolerance for second-order classification.
pub const DEFAULT_EPS_H: f64 = 1e-6;
/// Max-norm tolerance for merging aligned minimizers in `survey`.
pub const DEDUP_DIST_TOL: f64 = 1e-6;
/// Relative loss tolerance for merging in `survey`.
pub const DEDUP_LOSS_RTOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum OptimizeError {
    #[error(transparent)]
    Loss(#[from] LossError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("not a critical point: ‖∇L‖ = {grad_norm:.3e} exceeds {grad_tol:.3e}")]
    NotCritical { grad_norm: f64, grad_tol: f64 },
}

/// Step-size rule for gradient descent.
#[derive(Clone, Copy, Debug)]
pub enum StepPolicy {
    Fixed(f64),
    /// Armijo backtracking: accept η·beta^t with the sufficient-decrease
    /// test L(w−ηg) ≤ L(w) − c1·η·‖g‖².
    Backtracking { eta0: f64, beta: f64, c1: f64 },
}

impl Default for StepPolicy {
    fn default() -> Self {
        StepPolicy::Backtracking {
            eta0: 0.5,
            beta: 0.5,
            c1: 1e-4,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct GDConfig {
    pub step: StepPolicy,
    pub max_iters: u64,
    pub eps_g: f64,
    /// Base seed; start i of a survey draws from seed + i.
    pub seed: u64,
}

impl Default for GDConfig {
    fn default() -> Self {
        Self {
            step: StepPolicy::default(),
            max_iters: DEFAULT_MAX_ITERS,
            eps_g: DEFAULT_EPS_G,
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunStatus {
    Converged,
    MaxIters,
    Diverged,
}

impl RunStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            RunStatus::Converged => "converged",
            RunStatus::MaxIters => "max_iters",
            RunStatus::Diverged => "diverged",
        }
    }
}

/// End state of a single descent or polish run.
#[derive(Clone, Debug)]
pub struct GDRun {
    pub w: WeightMatrix,
    pub loss: f64,
    pub grad_norm: f64,
    pub iterations: u64,
    pub status: RunStatus,
}

/// One surveyed critical point (or failed run), serializable as JSONL.
#[derive(Clone, Debug)]
pub struct CriticalPointRecord {
    pub seed: u64,
    pub status: RunStatus,
    pub loss: f64,
    pub grad_norm: f64,
    pub min_eig: Option<f64>,
    pub max_eig: Option<f64>,
    pub isotropy: Option<String>,
    pub iterations: u64,
    /// Number of starts that converged to this point (post-dedup).
    pub multiplicity: usize,
    pub w: WeightMatrix,
}

fn json_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn json_opt(x: Option<f64>) -> String {
    match x {
        Some(v) => json_f64(v),
        None => "null".into(),
    }
}

fn json_str(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

impl CriticalPointRecord {
    /// One JSON object per line; floats carry 17 significant digits so the
    /// matrix round-trips exactly.
    pub fn to_json_line(&self) -> String {
        let rows: Vec<String> = (0..self.w.k())
            .map(|i| {
                let cells: Vec<String> =
                    (0..self.w.d()).map(|j| json_f64(self.w.entry(i, j))).collect();
                format!("[{}]", cells.join(","))
            })
            .collect();
        format!(
            "{{\"seed\":{},\"status\":{},\"loss\":{},\"grad_norm\":{},\"min_eig\":{},\"max_eig\":{},\"isotropy\":{},\"iterations\":{},\"multiplicity\":{},\"matrix\":[{}]}}",
            self.seed,
            json_str(self.status.as_str()),
            json_f64(self.loss),
            json_f64(self.grad_norm),
            json_opt(self.min_eig),
            json_opt(self.max_eig),
            match &self.isotropy {
                Some(s) => json_str(s),
                None => "null".into(),
            },
            self.iterations,
            self.multiplicity,
            rows.join(",")
        )
    }
}

/// k×d matrix with i.i.d. N(0, 1/d) entries from the seeded Gaussian stream.
pub fn xavier_init(k: usize, d: usize, seed: u64) -> WeightMatrix {
    let sigma = 1.0 / (d as f64).sqrt();
    let mut stream = GaussianStream::new(seed);
    let data: Vec<f64> = (0..k * d).map(|_| sigma * stream.next_gaussian()).collect();
    WeightMatrix::new(k, d, data).expect("k·d entries")
}

/// Gradient descent from `w0` until ‖∇L‖ ≤ eps_g, the iteration cap, or
/// divergence. On divergence the last finite iterate is returned.
pub fn gd_run(
    problem: &LossProblem,
    w0: &WeightMatrix,
    config: &GDConfig,
) -> Result<GDRun, LossError> {
    let mut w = w0.clone();
    let (mut l, mut g) = loss::loss_and_grad(problem, &w)?;
    let mut gnorm = g.frob_norm();
    for iter in 0..config.max_iters {
        if gnorm <= config.eps_g {
            return Ok(GDRun {
                w,
                loss: l,
                grad_norm: gnorm,
                iterations: iter,
                status: RunStatus::Converged,
            });
        }

        let mut accepted: Option<(WeightMatrix, f64)> = None;
        match config.step {
            StepPolicy::Fixed(eta) => {
                let mut w_try = w.clone();
                for (t, gx) in w_try.data_mut().iter_mut().zip(g.data()) {
                    *t -= eta * gx;
                }
                if w_try.is_finite() {
                    if let Ok(l_try) = loss::loss(problem, &w_try) {
                        if l_try.is_finite() {
                            accepted = Some((w_try, l_try));
                        }
                    }
                }
            }
            StepPolicy::Backtracking { eta0, beta, c1 } => {
                let g2 = gnorm * gnorm;
                let mut eta = eta0;
                while eta > 1e-20 {
                    let mut w_try = w.clone();
                    for (t, gx) in w_try.data_mut().iter_mut().zip(g.data()) {
                        *t -= eta * gx;
                    }
                    if w_try.is_finite() {
                        if let Ok(l_try) = loss::loss(problem, &w_try) {
                            // A NaN loss fails this test and shrinks η.
                            if l_try <= l - c1 * eta * g2 {
                                accepted = Some((w_try, l_try));
                                break;
                            }
                        }
                    }
                    eta *= beta;
                }
            }
        }

        let Some((w_new, l_new)) = accepted else {
            // Fixed step produced a non-finite state → divergence; a stalled
            // line search cannot make progress → report the cap instead.
            let status = match config.step {
                StepPolicy::Fixed(_) => RunStatus::Diverged,
                StepPolicy::Backtracking { .. } => RunStatus::MaxIters,
            };
            return Ok(GDRun {
                w,
                loss: l,
                grad_norm: gnorm,
                iterations: iter,
                status,
            });
        };

        let g_new = loss::grad(problem, &w_new)?;
        let gn_new = g_new.frob_norm();
        if !gn_new.is_finite() || !l_new.is_finite() {
            return Ok(GDRun {
                w,
                loss: l,
                grad_norm: gnorm,
                iterations: iter,
                status: RunStatus::Diverged,
            });
        }
        w = w_new;
        l = l_new;
        g = g_new;
        gnorm = gn_new;
    }
    Ok(GDRun {
        w,
        loss: l,
        grad_norm: gnorm,
        iterations: config.max_iters,
        status: RunStatus::MaxIters,
    })
}

/// Levenberg-damped Newton refinement: solve (H + λI)s = −∇L through the
/// eigendecomposition, accept steps that reduce ‖∇L‖, adapt λ by factors of
/// ten, and fall back to a short descent run if no damping helps.
pub fn polish_newton(
    problem: &LossProblem,
    w0: &WeightMatrix,
    grad_tol: f64,
    max_steps: u64,
) -> Result<GDRun, OptimizeError> {
    let mut w = w0.clone();
    let (mut l, mut g) = loss::loss_and_grad(problem, &w)?;
    let mut gnorm = g.frob_norm();
    let mut lambda = 0.0f64;
    for step in 0..max_steps {
        if gnorm <= grad_tol {
            return Ok(GDRun {
                w,
                loss: l,
                grad_norm: gnorm,
                iterations: step,
                status: RunStatus::Converged,
            });
        }
        let h = loss::hess(problem, &w)?;
        let eig = sym_eigen(&h)?;
        let minus_g: Vec<f64> = g.data().iter().map(|x| -x).collect();

        let mut improved = false;
        let mut try_lambda = lambda;
        for _ in 0..25 {
            let s = solve_sym_shifted(&eig, try_lambda, &minus_g, 1e-12);
            let mut w_try = w.clone();
            for (t, sx) in w_try.data_mut().iter_mut().zip(&s) {
                *t += sx;
            }
            if w_try.is_finite() {
                if let Ok((l_try, g_try)) = loss::loss_and_grad(problem, &w_try) {
                    let gn_try = g_try.frob_norm();
                    if gn_try.is_finite() && gn_try < gnorm {
                        w = w_try;
                        l = l_try;
                        g = g_try;
                        gnorm = gn_try;
                        lambda = if try_lambda <= 1e-14 {
                            0.0
                        } else {
                            try_lambda / 10.0
                        };
                        improved = true;
                        break;
                    }
                }
            }
            try_lambda = if try_lambda == 0.0 {
                1e-8
            } else {
                try_lambda * 10.0
            };
            if try_lambda > 1e12 {
                break;
            }
        }
        if !improved {
            // Newton cannot shrink the gradient here; hand the point to a
            // short backtracking descent and keep whichever does better.
            let fallback = gd_run(
                problem,
                &w,
                &GDConfig {
                    step: StepPolicy::default(),
                    max_iters: 200,
                    eps_g: grad_tol,
                    seed: 0,
                },
            )?;
            if fallback.grad_norm < gnorm {
                w = fallback.w;
                l = fallback.loss;
                g = loss::grad(problem, &w)?;
                gnorm = g.frob_norm();
            } else {
                return Ok(GDRun {
                    w,
                    loss: l,
                    grad_norm: gnorm,
                    iterations: step,
                    status: RunStatus::MaxIters,
                });
            }
        }
    }
    let status = if gnorm <= grad_tol {
        RunStatus::Converged
    } else {
        RunStatus::MaxIters
    };
    Ok(GDRun {
        w,
        loss: l,
        grad_norm: gnorm,
        iterations: max_steps,
        status,
    })
}

/// Tolerance at which plain descent hands off to Newton polishing in
/// `refine_run`. Below this, Armijo's sufficient-decrease term falls under
/// the ulp of an O(1) loss and the line search stalls on float noise.
pub const GD_HANDOFF_EPS_G: f64 = 1e-6;

/// Descent to `GD_HANDOFF_EPS_G` (or config.eps_g if looser), then Newton
/// polishing down to config.eps_g. Newton accepts steps on gradient-norm
/// decrease, which stays representable long after loss differences round to
/// zero, so tight tolerances like 1e−10 are reachable. Diverged runs are
/// returned as-is; a polish that falls short reports `MaxIters`.
pub fn refine_run(
    problem: &LossProblem,
    w0: &WeightMatrix,
    config: &GDConfig,
) -> Result<GDRun, OptimizeError> {
    let coarse = GDConfig {
        eps_g: config.eps_g.max(GD_HANDOFF_EPS_G),
        ..*config
    };
    let run = gd_run(problem, w0, &coarse)?;
    if run.status == RunStatus::Diverged || run.grad_norm <= config.eps_g {
        let mut run = run;
        if run.status != RunStatus::Diverged {
            run.status = RunStatus::Converged;
        }
        return Ok(run);
    }
    if run.status != RunStatus::Converged {
        // Plain descent never got near a critical point; polishing from an
        // arbitrary iterate would chase whatever Newton is drawn to.
        return Ok(run);
    }
    let polished = polish_newton(problem, &run.w, config.eps_g, 60)?;
    Ok(GDRun {
        status: if polished.grad_norm <= config.eps_g {
            RunStatus::Converged
        } else {
            RunStatus::MaxIters
        },
        iterations: run.iterations + polished.iterations,
        ..polished
    })
}

/// Second-order data at a critical point.
#[derive(Clone, Copy, Debug)]
pub struct Classification {
    pub loss: f64,
    pub grad_norm: f64,
    pub min_eig: f64,
    pub max_eig: f64,
    /// min_eig ≥ −ε_H·max(1, max_eig).
    pub is_second_order_min: bool,
}

/// Classify `w`, requiring ‖∇L‖ ≤ grad_tol first: eigenvalue signs are
/// meaningless away from critical points.
pub fn classify(
    problem: &LossProblem,
    w: &WeightMatrix,
    eps_h: f64,
    grad_tol: f64,
) -> Result<Classification, OptimizeError> {
    let (l, g) = loss::loss_and_grad(problem, w)?;
    let gnorm = g.frob_norm();
    if gnorm > grad_tol {
        return Err(OptimizeError::NotCritical {
            grad_norm: gnorm,
            grad_tol,
        });
    }
    let h = loss::hess(problem, w)?;
    let eig = sym_eigen(&h)?;
    let min_eig = eig.values[0];
    let max_eig = eig.values[eig.values.len() - 1];
    Ok(Classification {
        loss: l,
        grad_norm: gnorm,
        min_eig,
        max_eig,
        is_second_order_min: min_eig >= -eps_h * max_eig.max(1.0),
    })
}

fn run_one_start(
    problem: &LossProblem,
    k: usize,
    seed: u64,
    config: &GDConfig,
) -> Result<CriticalPointRecord, OptimizeError> {
    let d = problem.target().d();
    let w0 = xavier_init(k, d, seed);
    let run = refine_run(problem, &w0, config)?;
    let (min_eig, max_eig) = if run.status == RunStatus::Converged {
        match loss::hess(problem, &run.w) {
            Ok(h) => match sym_eigen(&h) {
                Ok(eig) => (
                    Some(eig.values[0]),
                    Some(eig.values[eig.values.len() - 1]),
                ),
                Err(_) => (None, None),
            },
            Err(_) => (None, None),
        }
    } else {
        (None, None)
    };
    // Converged endpoints are stored in canonical alignment so equal orbits
    // compare equal across seeds, platforms, and thread counts.
    let w = if run.status == RunStatus::Converged {
        canonical_align(&run.w, DEDUP_DIST_TOL).1
    } else {
        run.w
    };
    Ok(CriticalPointRecord {
        seed,
        status: run.status,
        loss: run.loss,
        grad_norm: run.grad_norm,
        min_eig,
        max_eig,
        isotropy: None,
        iterations: run.iterations,
        multiplicity: 1,
        w,
    })
}

/// Merge converged records that agree after canonical alignment (max-norm
/// distance ≤ 1e−6 and relative loss gap ≤ 1e−8). The representative is the
/// record with the smallest (loss, seed); multiplicity counts the merged
/// starts. Non-converged records pass through unmerged.
fn dedup_records(mut records: Vec<CriticalPointRecord>) -> Vec<CriticalPointRecord> {
    records.sort_by(|a, b| a.loss.total_cmp(&b.loss).then(a.seed.cmp(&b.seed)));
    let mut reps: Vec<CriticalPointRecord> = Vec::new();
    let mut rest: Vec<CriticalPointRecord> = Vec::new();
    for r in records {
        if r.status != RunStatus::Converged {
            rest.push(r);
            continue;
        }
        let mut merged = false;
        for rep in reps.iter_mut() {
            let denom = rep.loss.abs().max(1.0);
            if (r.loss - rep.loss).abs() <= DEDUP_LOSS_RTOL * denom {
                if let Some(dist) = rep.w.max_dist(&r.w) {
                    if dist <= DEDUP_DIST_TOL {
                        rep.multiplicity += r.multiplicity;
                        merged = true;
                        break;
                    }
                }
            }
        }
        if !merged {
            reps.push(r);
        }
    }
    rest.sort_by_key(|r| r.seed);
    reps.extend(rest);
    reps
}

/// Multi-start survey: `n_starts` descents from xavier_init(k, d, seed+i),
/// eigenanalysis of converged endpoints, canonical alignment, and dedup.
/// Runs on the rayon pool when the `parallel` feature is enabled; results
/// are identical to `survey_seq` because dedup happens after an ordered
/// collect.
pub fn survey(
    problem: &LossProblem,
    k: usize,
    n_starts: u64,
    config: &GDConfig,
) -> Result<Vec<CriticalPointRecord>, OptimizeError> {
    #[cfg(feature = "parallel")]
    let runs: Result<Vec<CriticalPointRecord>, OptimizeError> = (0..n_starts)
        .into_par_iter()
        .map(|i| run_one_start(problem, k, config.seed + i, config))
        .collect();
    #[cfg(not(feature = "parallel"))]
    let runs: Result<Vec<CriticalPointRecord>, OptimizeError> = (0..n_starts)
        .map(|i| run_one_start(problem, k, config.seed + i, config))
        .collect();
    Ok(dedup_records(runs?))
}

/// Sequential survey, always compiled; the reference for the parallel path.
pub fn survey_seq(
    problem: &LossProblem,
    k: usize,
    n_starts: u64,
    config: &GDConfig,
) -> Result<Vec<CriticalPointRecord>, OptimizeError> {
    let runs: Result<Vec<CriticalPointRecord>, OptimizeError> = (0..n_starts)
        .map(|i| run_one_start(problem, k, config.seed + i, config))
        .collect();
    Ok(dedup_records(runs?))
}

/// Fill in isotropy labels for converged records.
pub fn annotate_isotropy(records: &mut [CriticalPointRecord], tol: f64) {
    for r in records.iter_mut() {
        if r.status == RunStatus::Converged {
            r.isotropy = Some(isotropy_group(&r.w, tol).label);
        }
    }
}
