//! Scratch probe: restricted GD in cyclic-subgroup fixed spaces for the
//! Laplacian target, hunting the ~8.9 level.

use symbreak::kernel::KernelKind;
use symbreak::loss::{laplacian_circulant, LossProblem};
use symbreak::optimize::{gd_run, xavier_init, GDConfig, RunStatus};
use symbreak::symmetry::{FixedPointBasis, PermPair, Permutation};

fn main() {
    let d = 20usize;
    let problem = LossProblem::new(KernelKind::Poly(3), laplacian_circulant(d)).unwrap();
    let cfg = GDConfig {
        eps_g: 1e-2,
        max_iters: 500_000,
        ..GDConfig::default()
    };
    // m = shift amount generating the subgroup Z_{20/m}.
    for m in [2usize, 4, 5, 10] {
        let images: Vec<usize> = (0..d).map(|i| (i + m) % d).collect();
        let gen = PermPair::diagonal(Permutation::from_images(images).unwrap());
        let basis = FixedPointBasis::from_generators(vec![gen], d, d).unwrap();
        for seed in 0..4u64 {
            let w0 = basis
                .project_matrix(&xavier_init(d, d, 9000 + 100 * m as u64 + seed))
                .unwrap();
            let mut w = w0;
            let mut total = 0u64;
            let mut done = false;
            for chunk in 0..4 {
                let run = gd_run(&problem, &w, &cfg).unwrap();
                total += run.iterations;
                w = run.w.clone();
                if run.status == RunStatus::Converged || chunk == 3 {
                    println!(
                        "m={m} seed={seed}: iters={total} loss={:.6} grad={:.3e} status={:?}",
                        run.loss, run.grad_norm, run.status
                    );
                    done = run.status == RunStatus::Converged;
                    break;
                }
            }
            let _ = done;
        }
    }
}
