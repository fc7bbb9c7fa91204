//! The kernel-formulated objective L(W; V), its gradient and Hessian, and
//! a direct-tensor oracle for poly kernels.
//!
//! With the default one-half convention,
//! `L = ½[Σ κ(wᵢ,wⱼ) − 2Σ κ(wᵢ,vⱼ) + Σ κ(vᵢ,vⱼ)]`,
//! the gradient rows are exactly `Σⱼ κ_w(wᵢ,wⱼ) − Σⱼ κ_w(wᵢ,vⱼ)` and the
//! Hessian blocks are the kernel second derivatives; the flag exists so the
//! unscaled convention remains expressible.

use crate::kernel::{self, KernelError, KernelKind};
use crate::linalg::Mat;
use crate::tensor::{self, TensorError, WeightMatrix};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LossError {
    #[error("target has {0} columns but candidate has {1}")]
    ColsMismatch(usize, usize),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error("loss_direct is only defined for poly kernels, got {0}")]
    UnsupportedKernel(String),
}

/// The objective: a kernel, a target matrix V (h×d), the scale convention,
/// and the cached target self-term Σ κ(vᵢ,vⱼ).
#[derive(Clone, Debug)]
pub struct LossProblem {
    kernel: KernelKind,
    target: WeightMatrix,
    half: bool,
    relu_fd_hess: bool,
    vv_sum: f64,
}

/// Step used by the ReLU finite-difference Hessian fallback.
const FD_HESS_STEP: f64 = 1e-5;

impl LossProblem {
    /// Default construction: one-half scale convention ON.
    pub fn new(kernel: KernelKind, target: WeightMatrix) -> Result<Self, LossError> {
        Self::with_options(kernel, target, true, false)
    }

    pub fn with_options(
        kernel: KernelKind,
        target: WeightMatrix,
        half: bool,
        relu_fd_hess: bool,
    ) -> Result<Self, LossError> {
        let h = target.k();
        let mut vv_sum = 0.0;
        for i in 0..h {
            for j in 0..h {
                vv_sum += kernel::kernel_eval(kernel, target.row(i), target.row(j))?;
            }
        }
        Ok(Self {
            kernel,
            target,
            half,
            relu_fd_hess,
            vv_sum,
        })
    }

    pub fn identity_target(kernel: KernelKind, d: usize) -> Result<Self, LossError> {
        Self::new(kernel, WeightMatrix::identity(d))
    }

    pub fn kernel(&self) -> KernelKind {
        self.kernel
    }

    pub fn target(&self) -> &WeightMatrix {
        &self.target
    }

    pub fn half(&self) -> bool {
        self.half
    }

    pub fn scale(&self) -> f64 {
        if self.half {
            0.5
        } else {
            1.0
        }
    }

    fn check_cols(&self, w: &WeightMatrix) -> Result<(), LossError> {
        if w.d() != self.target.d() {
            return Err(LossError::ColsMismatch(self.target.d(), w.d()));
        }
        Ok(())
    }
}

/// L(W) = c·[Σ κ(wᵢ,wⱼ) − 2Σ κ(wᵢ,vⱼ) + Σ κ(vᵢ,vⱼ)].
pub fn loss(problem: &LossProblem, w: &WeightMatrix) -> Result<f64, LossError> {
    problem.check_cols(w)?;
    let k = w.k();
    let h = problem.target.k();
    let kind = problem.kernel;
    let mut ww = 0.0;
    let mut wv = 0.0;
    for i in 0..k {
        let wi = w.row(i);
        for j in 0..k {
            ww += kernel::kernel_eval(kind, wi, w.row(j))?;
        }
        for j in 0..h {
            wv += kernel::kernel_eval(kind, wi, problem.target.row(j))?;
        }
    }
    Ok(problem.scale() * (ww - 2.0 * wv + problem.vv_sum))
}

/// Loss and gradient in one pass over the kernel pairs.
pub fn loss_and_grad(
    problem: &LossProblem,
    w: &WeightMatrix,
) -> Result<(f64, WeightMatrix), LossError> {
    problem.check_cols(w)?;
    let k = w.k();
    let d = w.d();
    let h = problem.target.k();
    let kind = problem.kernel;
    let mut g = WeightMatrix::zeros(k, d);
    let mut ww = 0.0;
    let mut wv = 0.0;
    for i in 0..k {
        let wi = w.row(i).to_vec(); // detach from the borrow of g's sibling rows
        let gi = g.row_mut(i);
        for j in 0..k {
            ww += kernel::kernel_grad_accum(kind, &wi, w.row(j), 1.0, gi)?;
        }
        for j in 0..h {
            wv += kernel::kernel_grad_accum(kind, &wi, problem.target.row(j), -1.0, gi)?;
        }
    }
    let value = problem.scale() * (ww - 2.0 * wv + problem.vv_sum);
    Ok((value, g))
}

/// Gradient rows Σⱼ κ_w(wᵢ,wⱼ) − Σⱼ κ_w(wᵢ,vⱼ) (the exact derivative of
/// `loss` under the default one-half convention).
pub fn grad(problem: &LossProblem, w: &WeightMatrix) -> Result<WeightMatrix, LossError> {
    Ok(loss_and_grad(problem, w)?.1)
}

/// ‖∇L‖_F.
pub fn grad_norm(problem: &LossProblem, w: &WeightMatrix) -> Result<f64, LossError> {
    Ok(grad(problem, w)?.frob_norm())
}

/// Dense symmetric (k·d)×(k·d) Hessian, symmetrized as (H+Hᵀ)/2.
pub fn hess(problem: &LossProblem, w: &WeightMatrix) -> Result<Mat, LossError> {
    problem.check_cols(w)?;
    let k = w.k();
    let d = w.d();
    let h = problem.target.k();
    let kind = problem.kernel;
    let use_fd = problem.relu_fd_hess && kind == KernelKind::Relu;
    let derivs = |a: &[f64], b: &[f64]| -> Result<kernel::KernelDerivs, KernelError> {
        if use_fd {
            kernel::kernel_derivs_fd_hess(kind, a, b, FD_HESS_STEP)
        } else {
            kernel::kernel_derivs(kind, a, b)
        }
    };

    let n = k * d;
    let mut hm = Mat::zeros(n, n);
    for i in 0..k {
        let wi = w.row(i);
        // Diagonal block: κ_wv(wᵢ,wᵢ) + Σⱼ κ_ww(wᵢ,wⱼ) − Σⱼ κ_ww(wᵢ,vⱼ).
        let mut diag = derivs(wi, wi)?.hess_wv;
        for j in 0..k {
            let kd = derivs(wi, w.row(j))?;
            for (acc, x) in diag.iter_mut().zip(&kd.hess_ww) {
                *acc += x;
            }
        }
        for j in 0..h {
            let kd = derivs(wi, problem.target.row(j))?;
            for (acc, x) in diag.iter_mut().zip(&kd.hess_ww) {
                *acc -= x;
            }
        }
        for p in 0..d {
            for q in 0..d {
                hm[(i * d + p, i * d + q)] = diag[p * d + q];
            }
        }
        // Off-diagonal blocks: κ_wv(wᵢ,wⱼ).
        for j in 0..k {
            if j == i {
                continue;
            }
            let kd = derivs(wi, w.row(j))?;
            for p in 0..d {
                for q in 0..d {
                    hm[(i * d + p, j * d + q)] = kd.hess_wv[p * d + q];
                }
            }
        }
    }
    Ok(hm.symmetrized())
}

/// Oracle: c·‖τ_n(W) − τ_n(V)‖²_F for poly kernels.
pub fn loss_direct(problem: &LossProblem, w: &WeightMatrix) -> Result<f64, LossError> {
    problem.check_cols(w)?;
    let r = match problem.kernel {
        KernelKind::Poly(r) => r as usize,
        other => return Err(LossError::UnsupportedKernel(other.id())),
    };
    let tw = tensor::tau(w, r)?;
    let tv = tensor::tau(&problem.target, r)?;
    Ok(problem.scale() * tw.sub(&tv)?.frob_norm_sq())
}

/// The circulant Laplacian-filter target: first row (−2, 1, 0, …, 0, 1),
/// each subsequent row cyclically shifted right.
pub fn laplacian_circulant(d: usize) -> WeightMatrix {
    assert!(d >= 3, "circulant Laplacian needs d >= 3");
    let mut m = WeightMatrix::zeros(d, d);
    for i in 0..d {
        m.set(i, i, -2.0);
        m.set(i, (i + 1) % d, 1.0);
        m.set(i, (i + d - 1) % d, 1.0);
    }
    m
}
