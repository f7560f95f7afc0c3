//! Genus-2 Riemann theta function adapted to the real period matrix of the
//! Schottky double.
//!
//! The double of the triply connected domain carries the purely imaginary
//! Riemann matrix `iP` with `P` real symmetric positive definite (computed by
//! [`crate::context::DomainContext::period_matrix`]).  The associated theta
//! function is
//!
//! ```text
//!   θ(z) = Σ_{n ∈ ℤ²} exp(-π ⟨Pn, n⟩ + 2πi ⟨z, n⟩),    z ∈ ℂ²,
//! ```
//!
//! with the *bilinear* pairing `⟨z, n⟩ = z₁n₁ + z₂n₂`.  It is even, real on
//! real arguments, invariant under `z ↦ z + ℓ` (`ℓ ∈ ℤ²`), and quasi-periodic
//! under `z ↦ z + iPm`:
//!
//! ```text
//!   θ(z + iPm) = exp(π ⟨Pm, m⟩ - 2πi ⟨z, m⟩) θ(z).
//! ```
//!
//! For a characteristic `e = u + iPv` (`u, v` real) the translated theta is
//!
//! ```text
//!   θ[e](z) = exp(πi (⟨Pv, v⟩ + 2⟨u - z, v⟩)) θ(z - e),
//! ```
//!
//! with period laws `θ[e](z + ℓ) = exp(-2πi⟨ℓ, v⟩) θ[e](z)` and
//! `θ[e](z + iPm) = exp(2πi⟨u, m⟩) exp(π⟨Pm, m⟩ - 2πi⟨z - e, m⟩) θ[e](z)`
//! (both verified numerically in the tests).  The six *odd half-periods*
//! `e = (u + iPv)/2`, `u, v ∈ {0,1}²`, `⟨u, v⟩` odd, are exactly the points
//! where `θ` vanishes to first order; one of them is selected to build the
//! prime-form-style quotients used by the kernel module.
//!
//! Arguments are reduced into the fundamental cell before summation, so the
//! truncated lattice sum converges with a uniform term count.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::ThetaError;

/// Relative tail target of the truncated theta sum.
const THETA_TAIL: f64 = 1e-16;

/// The theta function of a 2×2 real positive definite period matrix.
#[derive(Debug, Clone)]
pub struct ThetaFunction {
    /// Period matrix `P` (real symmetric positive definite).
    pub p: [[f64; 2]; 2],
    pinv: [[f64; 2]; 2],
    lambda_min: f64,
}

fn mat_vec(m: &[[f64; 2]; 2], v: [f64; 2]) -> [f64; 2] {
    [
        m[0][0] * v[0] + m[0][1] * v[1],
        m[1][0] * v[0] + m[1][1] * v[1],
    ]
}

fn dot_cf(z: &[Complex64; 2], n: [f64; 2]) -> Complex64 {
    z[0] * n[0] + z[1] * n[1]
}

impl ThetaFunction {
    /// Validate `P` and precompute its inverse and smallest eigenvalue.
    pub fn new(p: [[f64; 2]; 2]) -> Result<Self, ThetaError> {
        let asym = (p[0][1] - p[1][0]).abs();
        let tr = p[0][0] + p[1][1];
        let det = p[0][0] * p[1][1] - p[0][1] * p[1][0];
        let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
        let lambda_min = tr / 2.0 - disc;
        if asym > 1e-8 || lambda_min <= 0.0 {
            return Err(ThetaError::BadPeriodMatrix {
                asym,
                min_eig: lambda_min,
            });
        }
        // Symmetrize: the solver output carries ~1e-11 asymmetry, which
        // would otherwise spoil the exact vanishing at odd half-periods.
        let off = (p[0][1] + p[1][0]) / 2.0;
        let p = [[p[0][0], off], [off, p[1][1]]];
        let det = p[0][0] * p[1][1] - off * off;
        let pinv = [
            [p[1][1] / det, -p[0][1] / det],
            [-p[1][0] / det, p[0][0] / det],
        ];
        Ok(ThetaFunction {
            p,
            pinv,
            lambda_min,
        })
    }

    /// Split `z = z0 + n + iPm` with `n, m ∈ ℤ²` and `z0` in the fundamental
    /// cell; returns `(z0, n, m)`.
    pub fn reduce(&self, z: &[Complex64; 2]) -> ([Complex64; 2], [i64; 2], [i64; 2]) {
        let y = [z[0].im, z[1].im];
        let py = mat_vec(&self.pinv, y);
        let m = [py[0].round() as i64, py[1].round() as i64];
        let pm = mat_vec(&self.p, [m[0] as f64, m[1] as f64]);
        let xr = [z[0].re, z[1].re];
        let n = [xr[0].round() as i64, xr[1].round() as i64];
        let z0 = [
            Complex64::new(z[0].re - n[0] as f64, z[0].im - pm[0]),
            Complex64::new(z[1].re - n[1] as f64, z[1].im - pm[1]),
        ];
        (z0, n, m)
    }

    /// Distance from `x ∈ ℂ²` to the lattice `ℤ² + iPℤ²`.
    pub fn lattice_distance(&self, x: &[Complex64; 2]) -> f64 {
        let (z0, _, _) = self.reduce(x);
        (z0[0].norm_sqr() + z0[1].norm_sqr()).sqrt()
    }

    /// Raw truncated lattice sum (no argument reduction).
    fn theta_raw(&self, z: &[Complex64; 2]) -> Complex64 {
        let mut total = Complex64::new(0.0, 0.0);
        let mut shell_small = 0;
        for s in 0..80i64 {
            let mut shell = 0.0f64;
            let add = |n1: i64, n2: i64, total: &mut Complex64, shell: &mut f64| {
                let nf = [n1 as f64, n2 as f64];
                let pn = mat_vec(&self.p, nf);
                let quad = pn[0] * nf[0] + pn[1] * nf[1];
                let lin = dot_cf(z, nf);
                let term = (Complex64::new(0.0, 2.0 * PI) * lin - PI * quad).exp();
                *total += term;
                *shell += term.norm();
            };
            if s == 0 {
                add(0, 0, &mut total, &mut shell);
            } else {
                for k in -s..=s {
                    add(k, s, &mut total, &mut shell);
                    add(k, -s, &mut total, &mut shell);
                }
                for k in (-s + 1)..s {
                    add(s, k, &mut total, &mut shell);
                    add(-s, k, &mut total, &mut shell);
                }
            }
            if shell < THETA_TAIL * total.norm().max(1.0) {
                shell_small += 1;
                if shell_small >= 2 {
                    break;
                }
            } else {
                shell_small = 0;
            }
        }
        total
    }

    /// Theta value `θ(z)`, computed on the reduced argument and rescaled by
    /// the exact quasi-periodicity factor.
    pub fn theta(&self, z: &[Complex64; 2]) -> Complex64 {
        let (z0, _, m) = self.reduce(z);
        let base = self.theta_raw(&z0);
        if m == [0, 0] {
            return base;
        }
        let mf = [m[0] as f64, m[1] as f64];
        let pm = mat_vec(&self.p, mf);
        let quad = pm[0] * mf[0] + pm[1] * mf[1];
        // θ(z0 + n + iPm) = exp(π⟨Pm,m⟩ - 2πi⟨z0 + n, m⟩) θ(z0); ⟨n, m⟩ ∈ ℤ
        // contributes nothing.
        let lin = dot_cf(&z0, mf);
        let x_int = [z[0].re - z0[0].re, z[1].re - z0[1].re]; // = n
        let lin_int = x_int[0] * mf[0] + x_int[1] * mf[1];
        let factor = (Complex64::new(PI * quad, 0.0)
            - Complex64::new(0.0, 2.0 * PI) * (lin + lin_int))
        .exp();
        factor * base
    }

    /// Decompose a characteristic `e = u + iPv` into real vectors `(u, v)`.
    pub fn decompose(&self, e: &[Complex64; 2]) -> ([f64; 2], [f64; 2]) {
        let u = [e[0].re, e[1].re];
        let v = mat_vec(&self.pinv, [e[0].im, e[1].im]);
        (u, v)
    }

    /// Theta with characteristic:
    /// `θ[e](z) = exp(πi(⟨Pv,v⟩ + 2⟨u - z, v⟩)) θ(z - e)`.
    pub fn theta_char(&self, e: &[Complex64; 2], z: &[Complex64; 2]) -> Complex64 {
        let (u, v) = self.decompose(e);
        let pv = mat_vec(&self.p, v);
        let quad = pv[0] * v[0] + pv[1] * v[1];
        let shift = [z[0] - e[0], z[1] - e[1]];
        let uz = [
            Complex64::new(u[0], 0.0) - z[0],
            Complex64::new(u[1], 0.0) - z[1],
        ];
        let lin = uz[0] * v[0] + uz[1] * v[1];
        let pre = (Complex64::new(0.0, PI) * (quad + 2.0 * lin)).exp();
        pre * self.theta(&shift)
    }

    /// The six odd half-period characteristics `((u, v))` with
    /// `u, v ∈ {0,1}²` and `⟨u, v⟩` odd, in lexicographic order.
    pub fn odd_characteristics() -> [([f64; 2], [f64; 2]); 6] {
        let mut out = Vec::new();
        for u1 in 0..2 {
            for u2 in 0..2 {
                for v1 in 0..2 {
                    for v2 in 0..2 {
                        if (u1 * v1 + u2 * v2) % 2 == 1 {
                            out.push((
                                [u1 as f64, u2 as f64],
                                [v1 as f64, v2 as f64],
                            ));
                        }
                    }
                }
            }
        }
        out.try_into().unwrap()
    }

    /// The half-period point `e = (u + iPv)/2` for a characteristic.
    pub fn half_period(&self, c: &([f64; 2], [f64; 2])) -> [Complex64; 2] {
        let pv = mat_vec(&self.p, c.1);
        [
            Complex64::new(c.0[0] / 2.0, pv[0] / 2.0),
            Complex64::new(c.0[1] / 2.0, pv[1] / 2.0),
        ]
    }

    /// First odd half-period (lexicographic order) at which `θ` numerically
    /// vanishes and the caller-supplied probe accepts the candidate (the
    /// probe typically checks that a derived section is not identically
    /// zero).  Errors when no candidate passes.
    pub fn find_odd_half_period(
        &self,
        mut probe: impl FnMut(&[Complex64; 2]) -> bool,
    ) -> Result<[Complex64; 2], ThetaError> {
        for c in Self::odd_characteristics() {
            let e = self.half_period(&c);
            if self.theta(&e).norm() <= 1e-10 && probe(&e) {
                return Ok(e);
            }
        }
        Err(ThetaError::NoOddHalfPeriod)
    }

    /// Smallest eigenvalue of `P` (controls the decay of the lattice sum).
    pub fn lambda_min(&self) -> f64 {
        self.lambda_min
    }
}
