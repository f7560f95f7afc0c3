//! Abel–Jacobi map of the Schottky double into its Jacobian torus.
//!
//! Each harmonic measure `h_j` has a local analytic completion
//! `F_j = a₀₀ + Σ_k b_k log(z - c_k) + W_j(z)` whose real part is `h_j`; the
//! log terms make `F_j` multivalued, with increments `2πi b_k` per positive
//! loop around hole `k`.  The map
//!
//! ```text
//!   χ_j(ζ) = ½ (F_j(ζ) - F_j(-1)),     j = 1, 2,
//! ```
//!
//! evaluated along a path from the base point `-1` (with `log` branches
//! continued along the path), is well defined modulo the lattice
//! `L = ℤ² + iPℤ²`, where `P` is the period matrix: a loop around hole `ℓ`
//! changes `χ` by `-iPe_ℓ`.  On the back sheet of the double the map extends
//! by the anticonformal involution, `χ(Jz) = -conj(χ(z))`.
//!
//! Values on the three boundary circles satisfy `-conj(χ) = χ mod ℤ²`
//! (the real part of `χ_j` is `0`, `½δ_{j1}`, `½δ_{j2}` on `B₀`, `B₁`, `B₂`
//! respectively), which the tests verify together with the loop increments.
//!
//! Paths are polylines built from a fixed template: leave `-1`, travel to an
//! intermediate circle of radius `ρ` chosen strictly between the holes and
//! the outer boundary, follow that circle to sit above (or below) the
//! target, then descend vertically (or radially, near `±1`).  Every segment
//! stays inside the closed domain; only the log increments depend on the
//! path, and those are accumulated with adaptive subdivision so each piece
//! subtends a small angle at either hole center.

use num_complex::Complex64;

use crate::context::DomainContext;
use crate::error::ThetaError;
use crate::geometry::{BoundaryPoint, DomainSpec, DoublePoint, Sheet};
use crate::laplace::SeriesHarmonic;

/// Angular step along the intermediate circle of the path template.
const ARC_STEP: f64 = 0.2;

/// The Abel–Jacobi map `χ` with base point `-1`.
#[derive(Debug, Clone)]
pub struct AbelMap {
    /// Domain description.
    pub spec: DomainSpec,
    /// Completions of the two hole harmonic measures.
    h: [SeriesHarmonic; 2],
    /// Radius of the intermediate path circle.
    rho: f64,
}

impl AbelMap {
    /// Build the map from a context (uses its cached harmonic measures).
    pub fn new(ctx: &DomainContext) -> Result<Self, ThetaError> {
        let hm = ctx.harmonic_measures().map_err(ThetaError::Solve)?;
        let spec = ctx.spec;
        let extent = (spec.c1.abs() + spec.r1).max(spec.c2.abs() + spec.r2);
        Ok(AbelMap {
            spec,
            h: [hm[1].clone(), hm[2].clone()],
            rho: (1.0 + extent) / 2.0,
        })
    }

    /// Polyline from the base point `-1` to `zeta` staying in the closed
    /// domain (see the module docs for the template).
    pub fn path_to(&self, zeta: Complex64) -> Vec<Complex64> {
        let start = Complex64::new(-1.0, 0.0);
        let mut path = vec![start];
        if (zeta - start).norm() < 1e-14 {
            return path;
        }
        let rho = self.rho;
        let sigma = if zeta.im >= 0.0 { 1.0 } else { -1.0 };
        // Radial vs vertical approach, decided by how close the target sits
        // to the unit circle near the real axis.
        let vertical = zeta.re.abs() <= rho - 0.05;
        let target_angle = if vertical {
            let e = Complex64::new(zeta.re, sigma * (rho * rho - zeta.re * zeta.re).sqrt());
            e.arg()
        } else {
            zeta.arg()
        };
        path.push(Complex64::new(-rho, 0.0));
        // Walk the intermediate circle from angle σπ to the target angle
        // through the σ half-plane.
        let a0 = sigma * std::f64::consts::PI;
        let a1 = target_angle;
        let n = ((a1 - a0).abs() / ARC_STEP).ceil().max(1.0) as usize;
        for i in 1..=n {
            let a = a0 + (a1 - a0) * (i as f64) / (n as f64);
            path.push(Complex64::from_polar(rho, a));
        }
        if (zeta - path[path.len() - 1]).norm() > 1e-14 {
            path.push(zeta);
        }
        path
    }

    /// Index of the first polyline segment leaving the closed domain, if any.
    pub fn first_bad_segment(&self, path: &[Complex64]) -> Option<usize> {
        let circles = self.spec.circles();
        for (s, seg) in path.windows(2).enumerate() {
            for i in 0..=32 {
                let t = i as f64 / 32.0;
                let z = seg[0] * (1.0 - t) + seg[1] * t;
                let tol = 1e-9;
                if circles[0].signed_distance(z) > tol
                    || circles[1].signed_distance(z) < -tol
                    || circles[2].signed_distance(z) < -tol
                {
                    return Some(s);
                }
            }
        }
        None
    }

    /// Continuous increment of `log(z - c)` along a polyline, with adaptive
    /// subdivision so every piece subtends a small angle at `c`.
    fn log_increment(path: &[Complex64], c: Complex64) -> Complex64 {
        let mut total = Complex64::new(0.0, 0.0);
        for seg in path.windows(2) {
            let mut stack = vec![(seg[0], seg[1])];
            while let Some((a, b)) = stack.pop() {
                let da = (a - c).norm();
                let db = (b - c).norm();
                if (b - a).norm() > 0.5 * da.min(db) {
                    let m = (a + b) / 2.0;
                    stack.push((a, m));
                    stack.push((m, b));
                } else {
                    total += ((b - c) / (a - c)).ln();
                }
            }
        }
        total
    }

    /// `χ` accumulated along an explicit polyline (front sheet).  The
    /// single-valued part of each completion is evaluated only at the
    /// endpoints; the log terms carry the path dependence.
    pub fn chi_along(&self, path: &[Complex64]) -> [Complex64; 2] {
        let start = path[0];
        let end = path[path.len() - 1];
        let incs = [
            Self::log_increment(path, self.spec.hole_center(1)),
            Self::log_increment(path, self.spec.hole_center(2)),
        ];
        let mut out = [Complex64::new(0.0, 0.0); 2];
        for j in 0..2 {
            let h = &self.h[j];
            let dw = h.analytic_part(end) - h.analytic_part(start);
            out[j] = (h.b[0] * incs[0] + h.b[1] * incs[1] + dw) / 2.0;
        }
        out
    }

    /// `χ(ζ)` for a front-sheet point, via the template path.
    pub fn chi_front(&self, zeta: Complex64) -> Result<[Complex64; 2], ThetaError> {
        let path = self.path_to(zeta);
        if let Some(segment) = self.first_bad_segment(&path) {
            return Err(ThetaError::PathInvalid { segment });
        }
        Ok(self.chi_along(&path))
    }

    /// `χ` on the double: back-sheet values via `χ(Jz) = -conj(χ(z))`.
    pub fn chi(&self, p: &DoublePoint) -> Result<[Complex64; 2], ThetaError> {
        let front = self.chi_front(p.base)?;
        Ok(match p.sheet {
            Sheet::Front => front,
            Sheet::Back => [-front[0].conj(), -front[1].conj()],
        })
    }

    /// `χ` at a boundary point (where the two sheets agree modulo `ℤ²`).
    pub fn chi_boundary(&self, q: &BoundaryPoint) -> Result<[Complex64; 2], ThetaError> {
        self.chi_front(q.position(&self.spec))
    }
}
