//! Symmetry breaking in symmetric tensor rank decomposition.
//!
//! The library reproduces, at desk scale, the appearance of symmetry-breaking
//! spurious minima in the problem of decomposing a symmetric target tensor
//! into a sum of rank-1 powers: minimize `L(W; V) = c‖τ_n(W) − τ_n(V)‖²`
//! over k×d matrices W, where `τ_n(W) = Σ_i w_i^{⊗n}` sums the n-th tensor
//! powers of the rows.
//!
//! The pieces fit together as follows:
//!
//! * [`tensor`] — dense symmetric tensors, the τ_n map, Frobenius and
//!   Gaussian-moment inner products (the exactness oracles).
//! * [`kernel`] — the kernel formulation of the loss: rotation-invariant
//!   kernels κ(w, v) with analytic first and second derivatives.
//! * [`loss`] — the objective, its gradient and Hessian assembled from
//!   kernel derivatives, plus a direct-tensor oracle.
//! * [`optimize`] — seeded multi-start gradient descent, Newton polishing,
//!   and second-order classification of the points found.
//! * [`symmetry`] — the S_k×S_d action, isotropy-group detection and
//!   labeling, canonical alignment, and fixed-point subspaces.
//! * [`algebra`] — exact rational polynomials, symbolic restriction of the
//!   loss to fixed-point spaces, lex Groebner bases, and real-root
//!   isolation for the restricted critical-point systems.
//!
//! With the default `parallel` feature, embarrassingly parallel work
//! (multi-start surveys, moment-tensor assembly) runs on rayon; sequential
//! fallbacks are always compiled and benchmarked against the parallel path.

pub mod algebra;
pub mod kernel;
pub mod linalg;
pub mod loss;
pub mod optimize;
pub mod rng;
pub mod symmetry;
pub mod tensor;
