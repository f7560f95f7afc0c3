//! Scalar inner functions parametrized by one boundary point per circle.
//!
//! For a triple `p = (p0, p1, p2)` with `p_j ∈ B_j`, the weight vector
//! `τ(p)` (cross product of the rows of `[Q_j(p_ℓ)]`) makes the combination
//!
//! ```text
//!   h_p = τ_0 P(p_0, ·) + τ_1 P(p_1, ·) + τ_2 P(p_2, ·)
//! ```
//!
//! period-free, so it is the real part of a single-valued analytic `f_p`
//! with positive real part, normalized by `f_p(0) = 1`.  The Cayley
//! transform `φ_p = (f_p - 1)/(f_p + 1)` is then *inner*: unimodular on the
//! boundary (its boundary values away from the three poles of `f_p` have
//! vanishing real part upstairs), with `φ_p(0) = 0`, `φ_p(p_j) = 1`, and
//! exactly three zeros in the domain.
//!
//! The one-real-parameter-per-hole family used downstream is
//! `ψ_t = φ_{p(t)}` with `p(t) = (1, c1 - r1 e^{i t1}, c2 - r2 e^{i t2})`.
//! At `t = 0` the zeros of `ψ_t` are real (one in each gap interval and one
//! at the origin); for suitable nonzero `t` the two nonzero zeros move off
//! the real axis while staying distinct, which is the configuration the
//! matrix family needs.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::context::DomainContext;
use crate::error::InnerError;
use crate::geometry::BoundaryPoint;
use crate::herglotz::HerglotzCombination;
use crate::rootfind::{zeros_in_domain, Zero};

/// Boundary-modulus tolerance for certified inner functions.
pub const EPS_INNER: f64 = 1e-6;
/// Zero-separation / nonreality margin.
pub const EPS_SEP: f64 = 1e-3;

/// A scalar inner function `φ_p` together with its Herglotz transform `f_p`.
pub struct ScalarInner {
    /// The defining boundary triple.
    pub p: [BoundaryPoint; 3],
    /// The weight vector `τ(p)` (positive, sums to 1).
    pub tau: [f64; 3],
    combo: HerglotzCombination,
    f0: Complex64,
}

impl ScalarInner {
    /// Build `f_p` and `φ_p` for a boundary triple (one cached Dirichlet
    /// solve per source point).
    pub fn build(ctx: &DomainContext, p: [BoundaryPoint; 3]) -> Result<Self, InnerError> {
        let tau = ctx.tau(&p)?;
        let kernels: Result<Vec<_>, _> = p.iter().map(|q| ctx.herglotz(q)).collect();
        let weighted = tau.iter().cloned().zip(kernels?).collect();
        let combo = HerglotzCombination::new(ctx, weighted, ctx.params.eps_period)?;
        let f0 = combo.eval(Complex64::new(0.0, 0.0));
        if f0.re <= 0.0 {
            return Err(InnerError::NonPositiveWeights(tau[0], tau[1], tau[2]));
        }
        Ok(ScalarInner { p, tau, combo, f0 })
    }

    /// The Herglotz transform `f_p` (positive real part, `f_p(0) = 1`).
    pub fn f(&self, z: Complex64) -> Complex64 {
        (self.combo.eval(z) - Complex64::new(0.0, self.f0.im)) / self.f0.re
    }

    /// Derivative `f_p'`.
    pub fn f_deriv(&self, z: Complex64) -> Complex64 {
        self.combo.deriv(z) / self.f0.re
    }

    /// The inner function `φ_p = (f_p - 1)/(f_p + 1)`.
    pub fn phi(&self, z: Complex64) -> Complex64 {
        let f = self.f(z);
        (f - 1.0) / (f + 1.0)
    }

    /// Value and derivative of `φ_p`.
    pub fn phi_with_deriv(&self, z: Complex64) -> (Complex64, Complex64) {
        let f = self.f(z);
        let fp = self.f_deriv(z);
        let den = f + 1.0;
        ((f - 1.0) / den, 2.0 * fp / (den * den))
    }

    /// All zeros of `φ_p` in the domain (argument principle + Newton);
    /// errors unless exactly three are found (with multiplicity).
    pub fn zeros(&self, ctx: &DomainContext) -> Result<Vec<Zero>, InnerError> {
        let f = |z: Complex64| self.phi_with_deriv(z);
        let zeros = zeros_in_domain(&ctx.spec, &f, 1e-3).map_err(InnerError::Solve)?;
        let count: usize = zeros.iter().map(|z| z.multiplicity).sum();
        if count != 3 {
            return Err(InnerError::WrongZeroCount {
                expected: 3,
                found: count,
            });
        }
        Ok(zeros)
    }

    /// Max deviation of `|φ_p|` from 1 over an `n`-point grid per circle,
    /// evaluated directly on the boundary (the series is valid there).
    pub fn boundary_modulus_residual(&self, ctx: &DomainContext, n: usize) -> f64 {
        let mut worst: f64 = 0.0;
        for circle in 0..3 {
            for i in 0..n {
                let theta = 2.0 * PI * (i as f64 + 0.5) / n as f64;
                let q = BoundaryPoint { circle, theta };
                let z = q.position(&ctx.spec);
                // Skip the immediate vicinity of the kernel poles, where the
                // 0/0 limit is exact but floating-point evaluation is not.
                if self
                    .p
                    .iter()
                    .any(|pj| (pj.position(&ctx.spec) - z).norm() < 1e-3)
                {
                    continue;
                }
                worst = worst.max((self.phi(z).norm() - 1.0).abs());
            }
        }
        worst
    }

    /// Residual of the structural identity
    /// `1 - φ(z) φ(w)* = 2 (f(z) + f(w)*) / ((f(z)+1)(f(w)*+1))`
    /// over a pair grid (an exact algebraic identity; the residual measures
    /// only floating-point noise).
    pub fn herglotz_identity_residual(&self, points: &[Complex64]) -> f64 {
        let mut worst: f64 = 0.0;
        for &z in points {
            for &w in points {
                let fz = self.f(z);
                let fw = self.f(w).conj();
                let lhs = 1.0 - self.phi(z) * self.phi(w).conj();
                let rhs = 2.0 * (fz + fw) / ((fz + 1.0) * (fw + 1.0));
                worst = worst.max((lhs - rhs).norm());
            }
        }
        worst
    }
}

/// The boundary triple `p(t) = (1, c1 - r1 e^{i t1}, c2 - r2 e^{i t2})`.
pub fn p_of_t(t: (f64, f64)) -> [BoundaryPoint; 3] {
    [
        BoundaryPoint {
            circle: 0,
            theta: 0.0,
        },
        BoundaryPoint {
            circle: 1,
            theta: PI + t.0,
        },
        BoundaryPoint {
            circle: 2,
            theta: PI + t.1,
        },
    ]
}

/// The scalar inner function `ψ_t = φ_{p(t)}`.
pub fn psi_t(ctx: &DomainContext, t: (f64, f64)) -> Result<ScalarInner, InnerError> {
    ScalarInner::build(ctx, p_of_t(t))
}

/// Scan a small deterministic grid of `t` values and return the first whose
/// inner function has zeros `{0, z1, z2}` with `z1, z2` nonreal, simple, and
/// pairwise separated by at least [`EPS_SEP`].
pub fn find_nonreal_t(
    ctx: &DomainContext,
) -> Result<((f64, f64), ScalarInner, Vec<Zero>), InnerError> {
    for &t1 in &[PI / 8.0, PI / 4.0, 3.0 * PI / 8.0] {
        // Both angles stay away from zero: an offset of exactly zero puts
        // the corresponding boundary source point on the real axis, where
        // it coincides with its reflection and the construction degenerates.
        for &t2 in &[PI / 16.0, PI / 8.0] {
            let t = (t1, t2);
            let inner = psi_t(ctx, t)?;
            let zeros = match inner.zeros(ctx) {
                Ok(z) => z,
                Err(_) => continue,
            };
            if zeros.len() != 3 || zeros.iter().any(|z| z.multiplicity != 1) {
                continue;
            }
            let origin = zeros.iter().filter(|z| z.z.norm() < EPS_SEP).count();
            let nonreal: Vec<_> = zeros
                .iter()
                .filter(|z| z.z.norm() >= EPS_SEP)
                .collect();
            let separated = (zeros[0].z - zeros[1].z).norm() >= EPS_SEP
                && (zeros[0].z - zeros[2].z).norm() >= EPS_SEP
                && (zeros[1].z - zeros[2].z).norm() >= EPS_SEP;
            if origin == 1
                && nonreal.len() == 2
                && nonreal.iter().all(|z| z.z.im.abs() >= EPS_SEP)
                && separated
            {
                return Ok((t, inner, zeros));
            }
        }
    }
    Err(InnerError::ScanExhausted)
}
