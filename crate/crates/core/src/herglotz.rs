//! Analytic completions of boundary Poisson kernels (Herglotz kernels).
//!
//! For a boundary source `q` the Poisson kernel `P(q, ·)` is harmonic on `R`,
//! vanishes on `B \ {q}`, and blows up at `q`.  Its singular shape is the
//! familiar disk kernel of the circle carrying `q`, which has an explicit
//! rational analytic completion `s_q`:
//!
//! * on the unit circle: `s_q(z) = (q + z)/(q - z)`;
//! * on a hole circle with local coordinate `ẑ = (z - c)/r`:
//!   `s_q(z) = (ẑ + q̂)/(ẑ - q̂)` (positive real part *outside* the circle).
//!
//! `Re s_q` vanishes identically on the circle of `q` and is smooth on the
//! other two circles, so one Dirichlet solve for the correction `u_q` with
//! data `-Re s_q` makes `v_q = Re s_q + u_q` vanish on all of `B \ {q}`.
//! By uniqueness of the singular Dirichlet problem, `v_q = λ_q P(q, ·)` for a
//! scalar `λ_q > 0`, and `λ_q` can be read off the conjugate periods: the
//! period of `v_q` around hole `k` is `-2π b_k(u_q)` while the period of
//! `P(q, ·)` is `L · Q_k(q)` (`L` = total boundary length).  Computing the
//! ratio for both holes gives `λ_q` twice — the agreement of the two values
//! is a built-in consistency check.
//!
//! The payoff: evaluating `P(q, z)` at any interior `z` costs one cached
//! matrix-vector solve per `q`, no per-`z` work, and period-free linear
//! combinations of Poisson kernels get *single-valued analytic completions*
//! in closed form, which is exactly what the inner-function constructions
//! need.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::context::DomainContext;
use crate::error::SolveError;
use crate::geometry::BoundaryPoint;
use crate::laplace::SeriesHarmonic;

/// Relative disagreement allowed between the two independent estimates of the
/// kernel scale `λ_q`.
const LAMBDA_CONSISTENCY: f64 = 1e-6;

/// Analytic completion data for the Poisson kernel of one boundary source.
#[derive(Debug, Clone)]
pub struct HerglotzKernel {
    /// The boundary source.
    pub q: BoundaryPoint,
    /// Cartesian position of the source.
    pub position: Complex64,
    /// Harmonic correction `u_q` (with its conjugate-period log terms).
    pub correction: SeriesHarmonic,
    /// Scale factor: `Re s_q + u_q = λ_q · P(q, ·)`.
    pub lambda: f64,
    /// Relative disagreement of the two period-based estimates of `λ_q`.
    pub lambda_spread: f64,
    center: Complex64,
    radius: f64,
    outer_circle: bool,
}

impl HerglotzKernel {
    /// Build the kernel for boundary source `q` (one Dirichlet solve).
    pub fn build(ctx: &DomainContext, q: &BoundaryPoint) -> Result<Self, SolveError> {
        let spec = ctx.spec;
        let circle = spec.circles()[q.circle];
        let position = q.position(&spec);
        let outer_circle = q.circle == 0;
        let singular = |z: Complex64| -> Complex64 {
            let zh = (z - circle.center) / circle.radius;
            let qh = (position - circle.center) / circle.radius;
            if outer_circle {
                (qh + zh) / (qh - zh)
            } else {
                (zh + qh) / (zh - qh)
            }
        };
        let solver = ctx.solver()?;
        let own = q.circle;
        let correction = solver.solve(|c, z| if c == own { 0.0 } else { -singular(z).re })?;

        // Scale from conjugate periods, measured at both holes.
        let ltot = spec.boundary_length();
        let mut lambdas = [0.0f64; 2];
        for k in 0..2 {
            let qk = ctx.q_density(k + 1, q)?;
            lambdas[k] = -2.0 * PI * correction.b[k] / (ltot * qk);
        }
        let lambda = 0.5 * (lambdas[0] + lambdas[1]);
        let lambda_spread = (lambdas[0] - lambdas[1]).abs() / lambda.abs().max(f64::MIN_POSITIVE);
        if !(lambda > 0.0) || lambda_spread > LAMBDA_CONSISTENCY {
            return Err(SolveError::PeriodResidual {
                residual: lambda_spread,
                tol: LAMBDA_CONSISTENCY,
            });
        }
        Ok(HerglotzKernel {
            q: *q,
            position,
            correction,
            lambda,
            lambda_spread,
            center: circle.center,
            radius: circle.radius,
            outer_circle,
        })
    }

    /// The rational singular part `s_q(z)`.
    pub fn singular(&self, z: Complex64) -> Complex64 {
        let zh = (z - self.center) / self.radius;
        let qh = (self.position - self.center) / self.radius;
        if self.outer_circle {
            (qh + zh) / (qh - zh)
        } else {
            (zh + qh) / (zh - qh)
        }
    }

    /// Derivative `s_q'(z)`.
    pub fn singular_deriv(&self, z: Complex64) -> Complex64 {
        let zh = (z - self.center) / self.radius;
        let qh = (self.position - self.center) / self.radius;
        if self.outer_circle {
            2.0 * qh / ((qh - zh) * (qh - zh)) / self.radius
        } else {
            -2.0 * qh / ((zh - qh) * (zh - qh)) / self.radius
        }
    }

    /// Poisson kernel value `P(q, z)`.
    pub fn poisson(&self, z: Complex64) -> f64 {
        (self.singular(z).re + self.correction.eval(z)) / self.lambda
    }
}

/// A period-free real linear combination `Σ_j α_j P(q_j, ·)` of Poisson
/// kernels together with its single-valued analytic completion.
///
/// The combination is period-free when `Σ_j α_j Q_k(q_j) = 0` for `k = 1, 2`;
/// the constructor verifies this through the surviving log coefficients of
/// the combined correction series.
#[derive(Debug, Clone)]
pub struct HerglotzCombination {
    terms: Vec<(f64, std::rc::Rc<HerglotzKernel>)>,
    combined: SeriesHarmonic,
}

impl HerglotzCombination {
    /// Build from weighted kernels; `eps_period` bounds the allowed surviving
    /// log coefficients.
    pub fn new(
        ctx: &DomainContext,
        weighted: Vec<(f64, std::rc::Rc<HerglotzKernel>)>,
        eps_period: f64,
    ) -> Result<Self, SolveError> {
        let n = ctx.params.n_terms;
        let mut combined = SeriesHarmonic::zero(ctx.spec, n);
        for (alpha, k) in &weighted {
            combined.axpy(alpha / k.lambda, &k.correction);
        }
        let residual = combined.period_residual();
        if residual > eps_period {
            return Err(SolveError::PeriodResidual {
                residual,
                tol: eps_period,
            });
        }
        // Zero out the certified-negligible log terms so evaluation is
        // exactly single-valued.
        combined.b = [0.0, 0.0];
        Ok(HerglotzCombination {
            terms: weighted,
            combined,
        })
    }

    /// Value of the analytic completion `F(z)` (`Re F = Σ α_j P(q_j, ·)`).
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let mut f = Complex64::new(self.combined.a00, 0.0) + self.combined.analytic_part(z);
        for (alpha, k) in &self.terms {
            f += alpha / k.lambda * k.singular(z);
        }
        f
    }

    /// Derivative `F'(z)`.
    pub fn deriv(&self, z: Complex64) -> Complex64 {
        let mut f = self.combined.analytic_part_deriv(z);
        for (alpha, k) in &self.terms {
            f += alpha / k.lambda * k.singular_deriv(z);
        }
        f
    }

    /// The harmonic real part (valid on all of the closed domain minus the
    /// source points, including when periods do not vanish).
    pub fn real_part(&self, z: Complex64) -> f64 {
        self.eval(z).re
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DomainSpec;

    #[test]
    fn herglotz_kernel_matches_green_based_poisson() {
        // The scaled completion must reproduce the Poisson kernel computed
        // through the Green's function route at interior points.
        let ctx = DomainContext::new(DomainSpec::default());
        for q in [
            BoundaryPoint { circle: 0, theta: 0.7 },
            BoundaryPoint { circle: 1, theta: 2.1 },
            BoundaryPoint { circle: 2, theta: 4.4 },
        ] {
            let k = ctx.herglotz(&q).unwrap();
            assert!(k.lambda > 0.0);
            assert!(k.lambda_spread < 1e-8, "λ spread {}", k.lambda_spread);
            for &(x, y) in &[(0.0, 0.0), (0.15, 0.45), (-0.65, -0.2)] {
                let z = Complex64::new(x, y);
                let via_green = ctx.poisson_via_green(&q, z).unwrap();
                let via_kernel = k.poisson(z);
                assert!(
                    (via_green - via_kernel).abs() < 1e-7 * via_green.abs().max(1.0),
                    "Poisson kernel mismatch at {z}: {via_green} vs {via_kernel}"
                );
            }
        }
    }

    #[test]
    fn richardson_difference_quotient_oracle() {
        // Independent oracle for P(q, z): inward difference quotient of the
        // Green's function along the normal with one Richardson step.
        let ctx = DomainContext::new(DomainSpec::default());
        let z = Complex64::new(0.2, 0.35);
        let g = ctx.green(z).unwrap();
        let spec = ctx.spec;
        let q = BoundaryPoint { circle: 1, theta: 1.3 };
        let qz = q.position(&spec);
        let n = q.outward_normal(&spec);
        let eps = 1e-4;
        let d = |e: f64| -(g.eval(qz - e * n) - g.eval(qz)) / e;
        let quot = 2.0 * d(eps / 2.0) - d(eps); // Richardson-extrapolated ∂g/∂n
        let p_oracle = -spec.boundary_length() / (2.0 * PI) * quot;
        let k = ctx.herglotz(&q).unwrap();
        assert!(
            (k.poisson(z) - p_oracle).abs() < 1e-5,
            "kernel {} vs difference-quotient oracle {}",
            k.poisson(z),
            p_oracle
        );
    }

    #[test]
    fn period_free_combination_has_analytic_completion() {
        let ctx = DomainContext::new(DomainSpec::default());
        let p = [
            BoundaryPoint { circle: 0, theta: 0.3 },
            BoundaryPoint { circle: 1, theta: 1.9 },
            BoundaryPoint { circle: 2, theta: 3.6 },
        ];
        let tau = ctx.tau(&p).unwrap();
        let kernels: Vec<_> = p.iter().map(|q| ctx.herglotz(q).unwrap()).collect();
        let combo = HerglotzCombination::new(
            &ctx,
            tau.iter().cloned().zip(kernels).collect(),
            1e-8,
        )
        .unwrap();
        // Re F matches the weighted kernel sum; F is analytic (check the
        // Cauchy-Riemann equations via a finite-difference curl).
        let z = Complex64::new(0.1, 0.5);
        let direct: f64 = (0..3)
            .map(|j| tau[j] * ctx.herglotz(&p[j]).unwrap().poisson(z))
            .sum();
        assert!((combo.real_part(z) - direct).abs() < 1e-8);
        let h = 1e-6;
        let fd = (combo.eval(z + h) - combo.eval(z - h)) / (2.0 * h);
        let fdi = (combo.eval(z + Complex64::new(0.0, h)) - combo.eval(z - Complex64::new(0.0, h)))
            / Complex64::new(0.0, 2.0 * h);
        assert!((fd - fdi).norm() < 1e-6, "Cauchy-Riemann residual");
        assert!((fd - combo.deriv(z)).norm() < 1e-6);
    }
}
