//! Rotation-invariant kernels κ(w, v) with analytic first and second
//! derivatives.
//!
//! Three kinds are implemented: `poly(r)` (odd r) with κ = ⟨w,v⟩^r,
//! the cubic-Gaussian kernel 6⟨w,v⟩³ + 9‖w‖²‖v‖²⟨w,v⟩, and the arc-cosine
//! ReLU kernel (‖w‖‖v‖/2π)(sin θ + (π−θ)cos θ). Derivative layout: the
//! mixed block `hess_wv` has w-coordinates as rows and v-coordinates as
//! columns, matching the Hessian assembly in the loss module.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum KernelError {
    #[error("dimension mismatch: |w| = {0}, |v| = {1}")]
    DimMismatch(usize, usize),
    #[error("non-finite input entry")]
    NonFinite,
    #[error("poly exponent must be odd and >= 1, got {0}")]
    BadExponent(u32),
    #[error("relu kernel is not differentiable at a zero vector")]
    ReluSingularity,
    #[error("unknown kernel id {0:?} (expected poly:<odd r>, cubic-gaussian, relu)")]
    UnknownId(String),
}

/// Kernel selector. Construct via [`KernelKind::poly`] or parse a config
/// id with [`KernelKind::parse`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelKind {
    Poly(u32),
    CubicGaussian,
    Relu,
}

impl KernelKind {
    pub fn poly(r: u32) -> Result<Self, KernelError> {
        if r == 0 || r % 2 == 0 {
            return Err(KernelError::BadExponent(r));
        }
        Ok(Self::Poly(r))
    }

    /// Parse a config id: "poly:3", "poly:5", "cubic-gaussian", "relu".
    pub fn parse(id: &str) -> Result<Self, KernelError> {
        let id = id.trim();
        if let Some(rs) = id.strip_prefix("poly:") {
            let r: u32 = rs
                .trim()
                .parse()
                .map_err(|_| KernelError::UnknownId(id.to_string()))?;
            return Self::poly(r);
        }
        match id {
            "cubic-gaussian" => Ok(Self::CubicGaussian),
            "relu" => Ok(Self::Relu),
            _ => Err(KernelError::UnknownId(id.to_string())),
        }
    }

    pub fn id(&self) -> String {
        match self {
            Self::Poly(r) => format!("poly:{r}"),
            Self::CubicGaussian => "cubic-gaussian".into(),
            Self::Relu => "relu".into(),
        }
    }

    /// Tensor order realized by the kernel (poly:r ↔ order r; the
    /// cubic-Gaussian and ReLU kernels act on cubic features).
    pub fn order(&self) -> usize {
        match self {
            Self::Poly(r) => *r as usize,
            Self::CubicGaussian => 3,
            Self::Relu => 3,
        }
    }
}

/// Value and derivatives of κ at (w, v). `hess_ww` is ∂²κ/∂w∂w and
/// `hess_wv` is ∂²κ/∂w∂v, both d×d row-major with w-coordinates as rows.
#[derive(Clone, Debug)]
pub struct KernelDerivs {
    pub value: f64,
    pub grad_w: Vec<f64>,
    pub hess_ww: Vec<f64>,
    pub hess_wv: Vec<f64>,
    /// Set when a ReLU evaluation fell within 1e−9 of the |cos θ| = 1
    /// boundary, where the analytic forms are one-sided limits.
    pub near_boundary: bool,
}

/// Cosine boundary beyond which ReLU second derivatives switch to their
/// one-sided limits.
pub const RELU_BOUNDARY: f64 = 1.0 - 1e-12;
/// Cosine proximity at which the `near_boundary` condition flag is raised.
pub const RELU_FLAG: f64 = 1.0 - 1e-9;

fn check_pair(w: &[f64], v: &[f64]) -> Result<(), KernelError> {
    if w.len() != v.len() {
        return Err(KernelError::DimMismatch(w.len(), v.len()));
    }
    if !w.iter().chain(v).all(|x| x.is_finite()) {
        return Err(KernelError::NonFinite);
    }
    Ok(())
}

fn dot(w: &[f64], v: &[f64]) -> f64 {
    w.iter().zip(v).map(|(a, b)| a * b).sum()
}

/// κ(w, v).
pub fn kernel_eval(kind: KernelKind, w: &[f64], v: &[f64]) -> Result<f64, KernelError> {
    check_pair(w, v)?;
    let s = dot(w, v);
    Ok(match kind {
        KernelKind::Poly(r) => s.powi(r as i32),
        KernelKind::CubicGaussian => {
            let a = dot(w, w);
            let b = dot(v, v);
            6.0 * s * s * s + 9.0 * a * b * s
        }
        KernelKind::Relu => {
            let a = dot(w, w).sqrt();
            let b = dot(v, v).sqrt();
            if a == 0.0 || b == 0.0 {
                return Ok(0.0);
            }
            let c = (s / (a * b)).clamp(-1.0, 1.0);
            let theta = c.acos();
            a * b * (theta.sin() + (std::f64::consts::PI - theta) * c)
                / (2.0 * std::f64::consts::PI)
        }
    })
}

/// κ and its first/second derivatives. ReLU uses one-sided limits at the
/// parallel/antiparallel boundary and errors on zero vectors.
pub fn kernel_derivs(kind: KernelKind, w: &[f64], v: &[f64]) -> Result<KernelDerivs, KernelError> {
    check_pair(w, v)?;
    let d = w.len();
    match kind {
        KernelKind::Poly(r) => {
            let s = dot(w, v);
            let rf = r as f64;
            // s^e with a zero coefficient guard so r ∈ {1} never forms 0·0^{-1}.
            let s_rm1 = if r >= 1 { s.powi(r as i32 - 1) } else { 0.0 };
            let s_rm2 = if r >= 2 { s.powi(r as i32 - 2) } else { 0.0 };
            let c1 = rf * s_rm1;
            let c2 = rf * (rf - 1.0) * s_rm2;
            let grad_w: Vec<f64> = v.iter().map(|&vi| c1 * vi).collect();
            let mut hess_ww = vec![0.0; d * d];
            let mut hess_wv = vec![0.0; d * d];
            for p in 0..d {
                for q in 0..d {
                    hess_ww[p * d + q] = c2 * v[p] * v[q];
                    hess_wv[p * d + q] = c2 * v[p] * w[q];
                }
                hess_wv[p * d + p] += c1;
            }
            Ok(KernelDerivs {
                value: s.powi(r as i32),
                grad_w,
                hess_ww,
                hess_wv,
                near_boundary: false,
            })
        }
        KernelKind::CubicGaussian => {
            let s = dot(w, v);
            let a = dot(w, w);
            let b = dot(v, v);
            let grad_w: Vec<f64> = (0..d)
                .map(|p| 18.0 * s * s * v[p] + 18.0 * b * s * w[p] + 9.0 * a * b * v[p])
                .collect();
            let mut hess_ww = vec![0.0; d * d];
            let mut hess_wv = vec![0.0; d * d];
            for p in 0..d {
                for q in 0..d {
                    hess_ww[p * d + q] = 36.0 * s * v[p] * v[q]
                        + 18.0 * b * (w[p] * v[q] + v[p] * w[q]);
                    hess_wv[p * d + q] = 36.0 * s * (v[p] * w[q] + w[p] * v[q])
                        + 18.0 * b * w[p] * w[q]
                        + 18.0 * a * v[p] * v[q];
                }
                hess_ww[p * d + p] += 18.0 * b * s;
                hess_wv[p * d + p] += 18.0 * s * s + 9.0 * a * b;
            }
            Ok(KernelDerivs {
                value: 6.0 * s * s * s + 9.0 * a * b * s,
                grad_w,
                hess_ww,
                hess_wv,
                near_boundary: false,
            })
        }
        KernelKind::Relu => relu_derivs(w, v),
    }
}

/// ReLU kernel derivatives in the form κ = (g + (π−θ)s)/2π with
/// g = √(a²b² − s²) = ab·sin θ:
///   κ_w  = (1/2π)[(g/a²)w + (π−θ)v]
///   κ_ww = (1/2π)[w((b²w−sv)/(ga²) − 2gw/a⁴)ᵀ + (g/a²)I + v(v−(s/a²)w)ᵀ/g]
///   κ_wv = (1/2π)[w(a²v−sw)ᵀ/(a²g) + (π−θ)I + v(w−(s/b²)v)ᵀ/g]
/// At |cos θ| → 1 the singular terms cancel direction-independently,
/// leaving κ_w = v/2, κ_ww = 0, κ_wv = I/2 (parallel) and all-zero
/// (antiparallel); those limits are used beyond [`RELU_BOUNDARY`].
fn relu_derivs(w: &[f64], v: &[f64]) -> Result<KernelDerivs, KernelError> {
    let d = w.len();
    let a2 = dot(w, w);
    let b2 = dot(v, v);
    if a2 == 0.0 || b2 == 0.0 {
        return Err(KernelError::ReluSingularity);
    }
    let s = dot(w, v);
    let a = a2.sqrt();
    let b = b2.sqrt();
    let c = (s / (a * b)).clamp(-1.0, 1.0);
    let theta = c.acos();
    let two_pi = 2.0 * std::f64::consts::PI;
    let value = a * b * (theta.sin() + (std::f64::consts::PI - theta) * c) / two_pi;
    let near_boundary = c.abs() >= RELU_FLAG;

    if c.abs() >= RELU_BOUNDARY {
        // One-sided limits along the smooth branch.
        let (grad_w, hess_wv) = if c > 0.0 {
            let grad: Vec<f64> = v.iter().map(|&vi| 0.5 * vi).collect();
            let mut wv = vec![0.0; d * d];
            for p in 0..d {
                wv[p * d + p] = 0.5;
            }
            (grad, wv)
        } else {
            (vec![0.0; d], vec![0.0; d * d])
        };
        return Ok(KernelDerivs {
            value,
            grad_w,
            hess_ww: vec![0.0; d * d],
            hess_wv,
            near_boundary,
        });
    }

    let g = (a2 * b2 - s * s).sqrt();
    let pi_m_theta = std::f64::consts::PI - theta;
    let grad_w: Vec<f64> = (0..d)
        .map(|p| (g / a2 * w[p] + pi_m_theta * v[p]) / two_pi)
        .collect();

    let mut hess_ww = vec![0.0; d * d];
    let mut hess_wv = vec![0.0; d * d];
    for p in 0..d {
        // κ_ww row p: w_p·col1 + (g/a²)δ + v_p·col2
        for q in 0..d {
            let col1 = (b2 * w[q] - s * v[q]) / (g * a2) - 2.0 * g * w[q] / (a2 * a2);
            let col2 = (v[q] - s / a2 * w[q]) / g;
            hess_ww[p * d + q] = (w[p] * col1 + v[p] * col2) / two_pi;

            let col3 = (a2 * v[q] - s * w[q]) / (a2 * g);
            let col4 = (w[q] - s / b2 * v[q]) / g;
            hess_wv[p * d + q] = (w[p] * col3 + v[p] * col4) / two_pi;
        }
        hess_ww[p * d + p] += g / a2 / two_pi;
        hess_wv[p * d + p] += pi_m_theta / two_pi;
    }
    Ok(KernelDerivs {
        value,
        grad_w,
        hess_ww,
        hess_wv,
        near_boundary,
    })
}

/// Derivatives with the second-order blocks replaced by central finite
/// differences of the analytic gradient. Selectable for the ReLU kernel,
/// whose closed-form second derivatives are re-derived here rather than
/// quoted; the fallback de-risks sign errors at configuration time.
pub fn kernel_derivs_fd_hess(
    kind: KernelKind,
    w: &[f64],
    v: &[f64],
    step: f64,
) -> Result<KernelDerivs, KernelError> {
    let mut kd = kernel_derivs(kind, w, v)?;
    let d = w.len();
    let mut wp = w.to_vec();
    for q in 0..d {
        wp[q] = w[q] + step;
        let up = kernel_derivs(kind, &wp, v)?.grad_w;
        wp[q] = w[q] - step;
        let dn = kernel_derivs(kind, &wp, v)?.grad_w;
        wp[q] = w[q];
        for p in 0..d {
            kd.hess_ww[p * d + q] = (up[p] - dn[p]) / (2.0 * step);
        }
    }
    let mut vp = v.to_vec();
    for q in 0..d {
        vp[q] = v[q] + step;
        let up = kernel_derivs(kind, w, &vp)?.grad_w;
        vp[q] = v[q] - step;
        let dn = kernel_derivs(kind, w, &vp)?.grad_w;
        vp[q] = v[q];
        for p in 0..d {
            kd.hess_wv[p * d + q] = (up[p] - dn[p]) / (2.0 * step);
        }
    }
    // Symmetrize the repeated block; FD noise breaks exact symmetry.
    for p in 0..d {
        for q in 0..p {
            let m = 0.5 * (kd.hess_ww[p * d + q] + kd.hess_ww[q * d + p]);
            kd.hess_ww[p * d + q] = m;
            kd.hess_ww[q * d + p] = m;
        }
    }
    Ok(kd)
}

/// Accumulate `coeff·κ_w(w, v)` into `acc` and return κ(w, v); the cheap
/// inner loop of gradient descent (no d×d blocks are formed).
pub fn kernel_grad_accum(
    kind: KernelKind,
    w: &[f64],
    v: &[f64],
    coeff: f64,
    acc: &mut [f64],
) -> Result<f64, KernelError> {
    debug_assert_eq!(w.len(), v.len());
    debug_assert_eq!(acc.len(), w.len());
    match kind {
        KernelKind::Poly(r) => {
            let s = dot(w, v);
            let c1 = r as f64 * if r >= 1 { s.powi(r as i32 - 1) } else { 0.0 };
            for (ap, &vp) in acc.iter_mut().zip(v) {
                *ap += coeff * c1 * vp;
            }
            Ok(s.powi(r as i32))
        }
        KernelKind::CubicGaussian => {
            let s = dot(w, v);
            let a = dot(w, w);
            let b = dot(v, v);
            let cv = 18.0 * s * s + 9.0 * a * b;
            let cw = 18.0 * b * s;
            for p in 0..w.len() {
                acc[p] += coeff * (cv * v[p] + cw * w[p]);
            }
            Ok(6.0 * s * s * s + 9.0 * a * b * s)
        }
        KernelKind::Relu => {
            let a2 = dot(w, w);
            let b2 = dot(v, v);
            if a2 == 0.0 || b2 == 0.0 {
                return Err(KernelError::ReluSingularity);
            }
            let s = dot(w, v);
            let a = a2.sqrt();
            let b = b2.sqrt();
            let c = (s / (a * b)).clamp(-1.0, 1.0);
            let theta = c.acos();
            let two_pi = 2.0 * std::f64::consts::PI;
            let value = a * b * (theta.sin() + (std::f64::consts::PI - theta) * c) / two_pi;
            if c >= RELU_BOUNDARY {
                for (ap, &vp) in acc.iter_mut().zip(v) {
                    *ap += coeff * 0.5 * vp;
                }
            } else if c <= -RELU_BOUNDARY {
                // gradient limit is zero
            } else {
                let g = (a2 * b2 - s * s).sqrt();
                let cw = g / a2 / two_pi;
                let cv = (std::f64::consts::PI - theta) / two_pi;
                for p in 0..w.len() {
                    acc[p] += coeff * (cw * w[p] + cv * v[p]);
                }
            }
            Ok(value)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random_orthogonal;
    use crate::rng::GaussianStream;
    use crate::tensor::{frob_inner, gaussian_moment_tensor, moment_inner, rank_one_power};

    fn random_vec(stream: &mut GaussianStream, d: usize) -> Vec<f64> {
        (0..d).map(|_| stream.next_gaussian()).collect()
    }

    #[test]
    fn parse_and_id_round_trip() {
        for id in ["poly:3", "poly:5", "cubic-gaussian", "relu"] {
            assert_eq!(KernelKind::parse(id).unwrap().id(), id);
        }
        assert!(KernelKind::parse("poly:2").is_err());
        assert!(KernelKind::parse("rbf").is_err());
    }

    #[test]
    fn poly_eval_example() {
        // ⟨(1,2),(3,1)⟩³ = 5³ = 125.
        let v = kernel_eval(KernelKind::Poly(3), &[1.0, 2.0], &[3.0, 1.0]).unwrap();
        assert_eq!(v, 125.0);
    }

    #[test]
    fn cubic_gaussian_unit_self() {
        let e1 = [1.0, 0.0];
        let v = kernel_eval(KernelKind::CubicGaussian, &e1, &e1).unwrap();
        assert_eq!(v, 15.0);
    }

    #[test]
    fn relu_special_angles() {
        let e1 = [1.0, 0.0];
        let e2 = [0.0, 1.0];
        let same = kernel_eval(KernelKind::Relu, &e1, &e1).unwrap();
        assert!((same - 0.5).abs() <= 1e-15);
        let perp = kernel_eval(KernelKind::Relu, &e1, &e2).unwrap();
        assert!((perp - 1.0 / (2.0 * std::f64::consts::PI)).abs() <= 1e-15);
        // Zero vector input evaluates to 0 by convention.
        assert_eq!(kernel_eval(KernelKind::Relu, &[0.0, 0.0], &e1).unwrap(), 0.0);
    }

    #[test]
    fn relu_derivs_reject_zero_vector() {
        assert!(matches!(
            kernel_derivs(KernelKind::Relu, &[0.0, 0.0], &[1.0, 0.0]),
            Err(KernelError::ReluSingularity)
        ));
    }

    #[test]
    fn symmetry_of_eval() {
        let mut stream = GaussianStream::new(40);
        for kind in [KernelKind::Poly(3), KernelKind::CubicGaussian, KernelKind::Relu] {
            for _ in 0..10 {
                let w = random_vec(&mut stream, 5);
                let v = random_vec(&mut stream, 5);
                let a = kernel_eval(kind, &w, &v).unwrap();
                let b = kernel_eval(kind, &v, &w).unwrap();
                assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "{kind:?}");
            }
        }
    }

    #[test]
    fn rotation_invariance() {
        let mut stream = GaussianStream::new(41);
        let d = 6;
        for (i, kind) in [KernelKind::Poly(3), KernelKind::Poly(5), KernelKind::CubicGaussian, KernelKind::Relu]
            .into_iter()
            .enumerate()
        {
            let u = random_orthogonal(d, 100 + i as u64);
            for _ in 0..10 {
                let w = random_vec(&mut stream, d);
                let v = random_vec(&mut stream, d);
                let wu: Vec<f64> = (0..d).map(|j| (0..d).map(|l| w[l] * u[(l, j)]).sum()).collect();
                let vu: Vec<f64> = (0..d).map(|j| (0..d).map(|l| v[l] * u[(l, j)]).sum()).collect();
                let a = kernel_eval(kind, &w, &v).unwrap();
                let b = kernel_eval(kind, &wu, &vu).unwrap();
                assert!(
                    (a - b).abs() <= 1e-10 * a.abs().max(1.0),
                    "{kind:?}: {a} vs {b}"
                );
            }
        }
    }

    #[test]
    fn poly3_matches_frobenius_inner() {
        let mut stream = GaussianStream::new(42);
        for _ in 0..10 {
            let w = random_vec(&mut stream, 4);
            let v = random_vec(&mut stream, 4);
            let lhs = kernel_eval(KernelKind::Poly(3), &w, &v).unwrap();
            let tw = rank_one_power(&w, 3).unwrap();
            let tv = rank_one_power(&v, 3).unwrap();
            let rhs = frob_inner(&tw, &tv).unwrap();
            assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1.0));
        }
    }

    #[test]
    fn cubic_gaussian_matches_moment_contraction() {
        let d = 4;
        let m = gaussian_moment_tensor(d, 6).unwrap();
        let mut stream = GaussianStream::new(43);
        for _ in 0..10 {
            let w = random_vec(&mut stream, d);
            let v = random_vec(&mut stream, d);
            let lhs = kernel_eval(KernelKind::CubicGaussian, &w, &v).unwrap();
            let tw = rank_one_power(&w, 3).unwrap();
            let tv = rank_one_power(&v, 3).unwrap();
            let rhs = moment_inner(&tw, &tv, &m).unwrap();
            assert!(
                (lhs - rhs).abs() <= 1e-10 * rhs.abs().max(1.0),
                "{lhs} vs {rhs}"
            );
        }
    }

    #[test]
    fn relu_matches_monte_carlo() {
        // E[max(⟨w,x⟩,0)·max(⟨v,x⟩,0)] over Gaussian x vs the closed form.
        let d = 3;
        let mut stream = GaussianStream::new(44);
        let w = random_vec(&mut stream, d);
        let v = random_vec(&mut stream, d);
        let exact = kernel_eval(KernelKind::Relu, &w, &v).unwrap();
        let n = 1_000_000usize;
        let (mut sum, mut sum_sq) = (0.0, 0.0);
        let mut x = vec![0.0; d];
        for _ in 0..n {
            for xi in x.iter_mut() {
                *xi = stream.next_gaussian();
            }
            let dw: f64 = w.iter().zip(&x).map(|(a, b)| a * b).sum();
            let dv: f64 = v.iter().zip(&x).map(|(a, b)| a * b).sum();
            let y = dw.max(0.0) * dv.max(0.0);
            sum += y;
            sum_sq += y * y;
        }
        let mean = sum / n as f64;
        let var = (sum_sq / n as f64 - mean * mean).max(0.0);
        let stderr = (var / n as f64).sqrt();
        assert!(
            (mean - exact).abs() <= 4.0 * stderr,
            "MC {mean} vs closed form {exact} (stderr {stderr})"
        );
    }

    #[test]
    fn poly3_derivs_at_basis() {
        // w=v=e₁: grad = 3e₁, hess_ww = 6e₁e₁ᵀ, hess_wv = 6e₁e₁ᵀ + 3I.
        let e1 = [1.0, 0.0];
        let kd = kernel_derivs(KernelKind::Poly(3), &e1, &e1).unwrap();
        assert_eq!(kd.grad_w, vec![3.0, 0.0]);
        assert_eq!(kd.hess_ww, vec![6.0, 0.0, 0.0, 0.0]);
        assert_eq!(kd.hess_wv, vec![9.0, 0.0, 0.0, 3.0]);
    }

    #[test]
    fn cubic_gaussian_grad_orthogonal_case() {
        // w=e₁, v=e₂ (s=0): grad = 9·e₂.
        let kd = kernel_derivs(KernelKind::CubicGaussian, &[1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert_eq!(kd.grad_w, vec![0.0, 9.0]);
    }

    /// Central finite differences of κ in w.
    fn fd_grad(kind: KernelKind, w: &[f64], v: &[f64], h: f64) -> Vec<f64> {
        let mut g = vec![0.0; w.len()];
        let mut wp = w.to_vec();
        for p in 0..w.len() {
            wp[p] = w[p] + h;
            let up = kernel_eval(kind, &wp, v).unwrap();
            wp[p] = w[p] - h;
            let dn = kernel_eval(kind, &wp, v).unwrap();
            wp[p] = w[p];
            g[p] = (up - dn) / (2.0 * h);
        }
        g
    }

    fn assert_close_rel(got: &[f64], want: &[f64], tol: f64, scale_floor: f64, what: &str) {
        let scale = want
            .iter()
            .fold(scale_floor, |m, x| m.max(x.abs()))
            .max(got.iter().fold(0.0_f64, |m, x| m.max(x.abs())));
        for (i, (g, w)) in got.iter().zip(want).enumerate() {
            assert!(
                (g - w).abs() <= tol * scale,
                "{what}[{i}]: {g} vs {w} (scale {scale})"
            );
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let mut stream = GaussianStream::new(45);
        let d = 6;
        let h = 1e-5;
        for kind in [
            KernelKind::Poly(1),
            KernelKind::Poly(3),
            KernelKind::Poly(5),
            KernelKind::CubicGaussian,
            KernelKind::Relu,
        ] {
            for _ in 0..100 {
                let w = random_vec(&mut stream, d);
                let v = random_vec(&mut stream, d);
                let kd = kernel_derivs(kind, &w, &v).unwrap();
                let fd = fd_grad(kind, &w, &v, h);
                assert_close_rel(&kd.grad_w, &fd, 1e-6, 1.0, &format!("{kind:?} grad"));

                // hess_ww columns: FD of grad_w in w.
                let mut wp = w.clone();
                for q in 0..d {
                    wp[q] = w[q] + h;
                    let up = kernel_derivs(kind, &wp, &v).unwrap().grad_w;
                    wp[q] = w[q] - h;
                    let dn = kernel_derivs(kind, &wp, &v).unwrap().grad_w;
                    wp[q] = w[q];
                    let col: Vec<f64> = (0..d).map(|p| kd.hess_ww[p * d + q]).collect();
                    let fd_col: Vec<f64> =
                        (0..d).map(|p| (up[p] - dn[p]) / (2.0 * h)).collect();
                    assert_close_rel(&col, &fd_col, 1e-5, 1.0, &format!("{kind:?} hess_ww"));
                }
                // hess_wv columns: FD of grad_w in v.
                let mut vp = v.clone();
                for q in 0..d {
                    vp[q] = v[q] + h;
                    let up = kernel_derivs(kind, &w, &vp).unwrap().grad_w;
                    vp[q] = v[q] - h;
                    let dn = kernel_derivs(kind, &w, &vp).unwrap().grad_w;
                    vp[q] = v[q];
                    let col: Vec<f64> = (0..d).map(|p| kd.hess_wv[p * d + q]).collect();
                    let fd_col: Vec<f64> =
                        (0..d).map(|p| (up[p] - dn[p]) / (2.0 * h)).collect();
                    assert_close_rel(&col, &fd_col, 1e-5, 1.0, &format!("{kind:?} hess_wv"));
                }
            }
        }
    }

    #[test]
    fn hess_ww_is_symmetric_and_wv_transposes() {
        let mut stream = GaussianStream::new(46);
        let d = 5;
        for kind in [KernelKind::Poly(3), KernelKind::CubicGaussian, KernelKind::Relu] {
            for _ in 0..10 {
                let w = random_vec(&mut stream, d);
                let v = random_vec(&mut stream, d);
                let kd = kernel_derivs(kind, &w, &v).unwrap();
                for p in 0..d {
                    for q in 0..d {
                        let sym = (kd.hess_ww[p * d + q] - kd.hess_ww[q * d + p]).abs();
                        assert!(sym <= 1e-10, "{kind:?} hess_ww asymmetric");
                    }
                }
                // κ symmetric ⇒ κ_wv(w,v) = κ_wv(v,w)ᵀ.
                let kd_swapped = kernel_derivs(kind, &v, &w).unwrap();
                for p in 0..d {
                    for q in 0..d {
                        let diff =
                            (kd.hess_wv[p * d + q] - kd_swapped.hess_wv[q * d + p]).abs();
                        let scale = kd.hess_wv[p * d + q].abs().max(1.0);
                        assert!(diff <= 1e-10 * scale, "{kind:?} hess_wv transpose");
                    }
                }
            }
        }
    }

    #[test]
    fn relu_boundary_limits_extend_smooth_branch() {
        // Approach v = λw from a slight angle: the analytic derivatives must
        // tend to the one-sided limits used inside the boundary region.
        let w = [0.8, -0.3, 0.5];
        let lambda = 1.7;
        let mut u = [0.3, 0.8, 0.0]; // orthogonalized against w below
        let wd = dot(&w, &w);
        let proj = dot(&u, &w) / wd;
        for (ui, &wi) in u.iter_mut().zip(&w) {
            *ui -= proj * wi;
        }
        for eps in [1e-4, 1e-6] {
            let v: Vec<f64> = w.iter().zip(&u).map(|(&wi, &ui)| lambda * wi + eps * ui).collect();
            let kd = kernel_derivs(KernelKind::Relu, &w, &v).unwrap();
            let d = w.len();
            for p in 0..d {
                assert!(
                    (kd.grad_w[p] - 0.5 * v[p]).abs() <= 1e-3,
                    "grad near parallel"
                );
                for q in 0..d {
                    let want_wv = if p == q { 0.5 } else { 0.0 };
                    assert!(
                        (kd.hess_wv[p * d + q] - want_wv).abs() <= 1e-3,
                        "hess_wv near parallel: {} vs {want_wv}",
                        kd.hess_wv[p * d + q]
                    );
                    assert!(kd.hess_ww[p * d + q].abs() <= 1e-3, "hess_ww near parallel");
                }
            }
            // Antiparallel side.
            let vneg: Vec<f64> = v.iter().map(|x| -x).collect();
            let kd = kernel_derivs(KernelKind::Relu, &w, &vneg).unwrap();
            for p in 0..d {
                assert!(kd.grad_w[p].abs() <= 1e-3);
                for q in 0..d {
                    assert!(kd.hess_wv[p * d + q].abs() <= 1e-3);
                    assert!(kd.hess_ww[p * d + q].abs() <= 1e-3);
                }
            }
        }
        // Exactly parallel input takes the boundary branch and flags it.
        let v: Vec<f64> = w.iter().map(|&x| lambda * x).collect();
        let kd = kernel_derivs(KernelKind::Relu, &w, &v).unwrap();
        assert!(kd.near_boundary);
        for p in 0..w.len() {
            assert_eq!(kd.grad_w[p], 0.5 * v[p]);
        }
    }

    #[test]
    fn grad_accum_matches_full_derivs() {
        let mut stream = GaussianStream::new(47);
        let d = 5;
        for kind in [KernelKind::Poly(3), KernelKind::CubicGaussian, KernelKind::Relu] {
            for _ in 0..10 {
                let w = random_vec(&mut stream, d);
                let v = random_vec(&mut stream, d);
                let kd = kernel_derivs(kind, &w, &v).unwrap();
                let mut acc = vec![0.0; d];
                let val = kernel_grad_accum(kind, &w, &v, 1.0, &mut acc).unwrap();
                assert!((val - kd.value).abs() <= 1e-12 * kd.value.abs().max(1.0));
                assert_close_rel(&acc, &kd.grad_w, 1e-12, 1.0, &format!("{kind:?} accum"));
            }
        }
    }
}
