//! The two-parameter family of 2×2 matrix-valued inner functions on the
//! domain.
//!
//! Fix a boundary triple `p(t) = (1, q₁, q₂)` with `q_k = c_k - r_k e^{it_k}`
//! and its positive weight vector `τ = τ(p(t))` (which is invariant under
//! conjugating the boundary points).  For a mixing parameter `η ∈ [0, 1]`
//! let `v = η e₁ + √(1-η²) e₂` and let `P^η₊ = v vᵀ`, `P^η₋ = I - P^η₊` be
//! the complementary rank-one projections.  The matrix harmonic function
//!
//! ```text
//!   H = τ₀ P(·,1) I + τ₁ [P(·,q₁) E₁₁ + P(·,q₁̄) E₂₂]
//!         + τ₂ [P(·,q₂) P^η₋ + P(·,q₂̄) P^η₊]
//! ```
//!
//! has positive-semidefinite real part, entries that are period-free
//! combinations of Poisson kernels (conjugate boundary points carry equal
//! period data, so the scalar cancellation `Σ τ_j Q_k(p_j) = 0` applies to
//! every entry), and `H(0) = H(0)ᵀ ≈ σI`.  Its entrywise analytic
//! completion `G`, normalized so `G(0) = I`, feeds the matrix Cayley
//! transform
//!
//! ```text
//!   Ψ_{η,t} = (G - I)(G + I)⁻¹,
//! ```
//!
//! a 2×2 inner function: unitary-valued on the boundary, `Ψ(0) = 0` (a
//! double zero of `det Ψ`), `Ψ(1) = I`, and with eigenvector conditions
//! `Ψ(q₁)e₁ = e₁`, `Ψ(q₁̄)e₂ = e₂`, `Ψ(q₂̄)v = v`, `Ψ(q₂)v⊥ = v⊥` at the
//! source points.  At `η = 0` the family degenerates to
//! `diag(ψ_t, ψ_{-t})`; for small `η > 0` it is a genuinely non-diagonal
//! perturbation whose determinant keeps exactly six zeros, four of them
//! simple with kernel directions `δ_j` near the coordinate pattern
//! `(e₁, e₁, e₂, e₂)` — a *standard zero set*.  The checks, the `η`
//! selection scan, and a commutator-based non-diagonalizability witness
//! live here.

use std::f64::consts::PI;
use std::rc::Rc;

use nalgebra::Matrix2;
use num_complex::Complex64;

use crate::context::DomainContext;
use crate::error::InnerError;
use crate::geometry::BoundaryPoint;
use crate::herglotz::HerglotzCombination;
use crate::rootfind::{zeros_in_domain, Zero};
use crate::scalar_inner::p_of_t;

/// Residual tolerance for matrix inner-function identities.
pub const EPS_MAT: f64 = 1e-4;

/// Commutator threshold for the non-diagonalizability witness.
pub const EPS_DIAG: f64 = 1e-4;

/// Separation tolerance for zero data.
pub const EPS_SEP: f64 = 1e-3;

/// Minimum alignment of each `δ_j` with its coordinate axis for the
/// zero-data proximity flag.
pub const DELTA_ALIGNMENT: f64 = 0.95;

/// Entrywise analytic completion of the matrix harmonic function, with the
/// Cayley transform and the determinant zero data.
#[derive(Debug)]
pub struct MatrixInner {
    /// Mixing parameter.
    pub eta: f64,
    /// Boundary angles of the source triple.
    pub t: (f64, f64),
    /// Entry completions (the matrix is symmetric: `F₁₂ = F₂₁`).
    combos: [HerglotzCombination; 3],
    /// Imaginary parts of the entry completions at the origin.
    im0: [f64; 3],
    /// Common normalization `σ = Re F₁₁(0)`.
    sigma: f64,
    /// Zeros of `det Ψ` (with multiplicity; the origin carries 2).
    pub zeros: Vec<Zero>,
    /// Kernel directions at the four simple zeros, unit-normalized.
    pub deltas: Vec<[Complex64; 2]>,
}

/// Conjugate of a hole boundary point (the domain is symmetric about ℝ).
fn conjugate_point(q: &BoundaryPoint) -> BoundaryPoint {
    BoundaryPoint {
        circle: q.circle,
        theta: -q.theta,
    }
}

/// The weighted-kernel lists for the three independent entries of `H`.
fn entry_weights(
    ctx: &DomainContext,
    eta: f64,
    t: (f64, f64),
) -> Result<[Vec<(f64, Rc<crate::herglotz::HerglotzKernel>)>; 3], InnerError> {
    let p = p_of_t(t);
    let tau = ctx.tau(&p)?;
    let q1c = conjugate_point(&p[1]);
    let q2c = conjugate_point(&p[2]);
    let k0 = ctx.herglotz(&p[0]).map_err(InnerError::Solve)?;
    let kq1 = ctx.herglotz(&p[1]).map_err(InnerError::Solve)?;
    let kq1c = ctx.herglotz(&q1c).map_err(InnerError::Solve)?;
    let kq2 = ctx.herglotz(&p[2]).map_err(InnerError::Solve)?;
    let kq2c = ctx.herglotz(&q2c).map_err(InnerError::Solve)?;
    let c2 = 1.0 - eta * eta;
    let mix = eta * c2.max(0.0).sqrt();
    let h11 = vec![
        (tau[0], k0.clone()),
        (tau[1], kq1.clone()),
        (tau[2] * c2, kq2.clone()),
        (tau[2] * eta * eta, kq2c.clone()),
    ];
    let h22 = vec![
        (tau[0], k0),
        (tau[1], kq1c),
        (tau[2] * eta * eta, kq2),
        (tau[2] * c2, kq2c.clone()),
    ];
    let h12 = vec![
        (tau[2] * mix, kq2c),
        (-tau[2] * mix, ctx.herglotz(&p[2]).map_err(InnerError::Solve)?),
    ];
    Ok([h11, h22, h12])
}

/// The matrix harmonic function `H(z)` (real symmetric for real data).
pub fn eval_h(combos: &[HerglotzCombination; 3], z: Complex64) -> Matrix2<f64> {
    let h11 = combos[0].real_part(z);
    let h22 = combos[1].real_part(z);
    let h12 = combos[2].real_part(z);
    Matrix2::new(h11, h12, h12, h22)
}

/// Build the three entry combinations of `H_{η,t}` (period-free by the
/// weight-vector cancellation).
pub fn build_h(
    ctx: &DomainContext,
    eta: f64,
    t: (f64, f64),
) -> Result<[HerglotzCombination; 3], InnerError> {
    let weights = entry_weights(ctx, eta, t)?;
    let eps = ctx.params.eps_period;
    let [w11, w22, w12] = weights;
    Ok([
        HerglotzCombination::new(ctx, w11, eps).map_err(InnerError::Solve)?,
        HerglotzCombination::new(ctx, w22, eps).map_err(InnerError::Solve)?,
        HerglotzCombination::new(ctx, w12, eps).map_err(InnerError::Solve)?,
    ])
}

impl MatrixInner {
    /// Normalized analytic completion `G(z)` with `G(0) = I`.
    pub fn g(&self, z: Complex64) -> Matrix2<Complex64> {
        let e = |i: usize| {
            (self.combos[i].eval(z) - Complex64::new(0.0, self.im0[i])) / self.sigma
        };
        let g11 = e(0);
        let g22 = e(1);
        let g12 = e(2);
        Matrix2::new(g11, g12, g12, g22)
    }

    /// Derivative `G'(z)`, entrywise.
    pub fn g_deriv(&self, z: Complex64) -> Matrix2<Complex64> {
        let e = |i: usize| self.combos[i].deriv(z) / self.sigma;
        let g11 = e(0);
        let g22 = e(1);
        let g12 = e(2);
        Matrix2::new(g11, g12, g12, g22)
    }

    /// The matrix inner function `Ψ(z) = (G - I)(G + I)⁻¹`.
    pub fn psi(&self, z: Complex64) -> Result<Matrix2<Complex64>, InnerError> {
        let g = self.g(z);
        let id = Matrix2::identity();
        let den = g + id;
        let inv = den.try_inverse().ok_or(InnerError::CayleySingular {
            norm: f64::INFINITY,
        })?;
        if inv.norm() > 1e8 {
            return Err(InnerError::CayleySingular { norm: inv.norm() });
        }
        Ok((g - id) * inv)
    }

    /// `det Ψ(z)` and its derivative, via the quotient
    /// `det(G - I)/det(G + I)`.
    pub fn det_psi_with_deriv(&self, z: Complex64) -> (Complex64, Complex64) {
        let g = self.g(z);
        let gp = self.g_deriv(z);
        let one = Complex64::new(1.0, 0.0);
        let det = |s: f64| {
            (g[(0, 0)] + s * one) * (g[(1, 1)] + s * one) - g[(0, 1)] * g[(0, 1)]
        };
        let det_d = |s: f64| {
            gp[(0, 0)] * (g[(1, 1)] + s * one) + (g[(0, 0)] + s * one) * gp[(1, 1)]
                - 2.0 * g[(0, 1)] * gp[(0, 1)]
        };
        let (n, np) = (det(-1.0), det_d(-1.0));
        let (d, dp) = (det(1.0), det_d(1.0));
        (n / d, (np * d - n * dp) / (d * d))
    }

    /// Max deviation of `ΨΨ* - I` on boundary-adjacent grids, with one
    /// Richardson step toward the boundary.
    pub fn boundary_unitarity_residual(
        &self,
        ctx: &DomainContext,
        n_per_circle: usize,
    ) -> f64 {
        let mut worst = 0.0f64;
        for idx in 0..3 {
            for i in 0..n_per_circle {
                let theta = 2.0 * PI * (i as f64 + 0.5) / n_per_circle as f64;
                let q = BoundaryPoint { circle: idx, theta };
                let pos = q.position(&ctx.spec);
                let inward = -ctx.spec.outward_normal(idx, pos);
                let value = |eps: f64| self.psi(pos + eps * inward).unwrap();
                let p = boundary_extrapolate(&value);
                let dev = (p * p.adjoint() - Matrix2::identity()).norm();
                worst = worst.max(dev);
            }
        }
        worst
    }
}

/// Quadratic Richardson extrapolation of a matrix function of the inward
/// offset toward the boundary (offsets `5e-4, 1e-3, 1.5e-3`); the
/// second-order step is needed near the kernel source points, where the
/// boundary approach has large curvature.
pub fn boundary_extrapolate(
    value: &impl Fn(f64) -> Matrix2<Complex64>,
) -> Matrix2<Complex64> {
    let c = |x: f64| Complex64::new(x, 0.0);
    value(5e-4) * c(3.0) - value(1e-3) * c(3.0) + value(1.5e-3)
}

/// Unit kernel direction of a numerically singular 2×2 matrix (right
/// singular vector of the smallest singular value), with the dominant
/// component rotated to the positive real axis.
fn kernel_direction(m: &Matrix2<Complex64>) -> [Complex64; 2] {
    let svd = m.svd(true, true);
    let vt = svd.v_t.unwrap();
    let mut d = [vt[(1, 0)].conj(), vt[(1, 1)].conj()];
    let lead = if d[0].norm() >= d[1].norm() { d[0] } else { d[1] };
    let phase = lead / lead.norm();
    d[0] /= phase;
    d[1] /= phase;
    d
}

/// Build `Ψ_{η,t}` and populate its determinant zero data.
pub fn build_psi(ctx: &DomainContext, eta: f64, t: (f64, f64)) -> Result<MatrixInner, InnerError> {
    let combos = build_h(ctx, eta, t)?;
    let f0: Vec<Complex64> = (0..3).map(|i| combos[i].eval(Complex64::new(0.0, 0.0))).collect();
    let sigma = f0[0].re;
    if sigma <= 0.0 {
        return Err(InnerError::NonPositiveWeights(sigma, f0[1].re, f0[2].re));
    }
    let mut inner = MatrixInner {
        eta,
        t,
        combos,
        im0: [f0[0].im, f0[1].im, f0[2].im],
        sigma,
        zeros: Vec::new(),
        deltas: Vec::new(),
    };
    let f = |z: Complex64| inner.det_psi_with_deriv(z);
    let zeros = zeros_in_domain(&ctx.spec, &f, 1e-3).map_err(InnerError::Solve)?;
    let count: usize = zeros.iter().map(|z| z.multiplicity).sum();
    if count != 6 {
        return Err(InnerError::WrongZeroCount {
            expected: 6,
            found: count,
        });
    }
    let mut deltas = Vec::new();
    for z in &zeros {
        if z.multiplicity == 1 && z.z.norm() >= EPS_SEP {
            let m = inner.psi(z.z)?;
            deltas.push(kernel_direction(&m));
        }
    }
    inner.zeros = zeros;
    inner.deltas = deltas;
    Ok(inner)
}

/// Outcome of the zero-data validation for `Ψ_{η,t}`.
#[derive(Debug, Clone)]
pub struct ZeroSetReport {
    /// A multiplicity-2 zero sits at the origin and `Ψ(0) ≈ 0`.
    pub origin_double: bool,
    /// Exactly four further zeros, all simple and pairwise separated.
    pub four_simple_distinct: bool,
    /// No three kernel directions lie on a common complex line.
    pub no_three_collinear: bool,
    /// The mirrored zeros stay away from the kernel pole locations.
    pub away_from_poles: bool,
    /// Each `δ_j` aligns with a coordinate axis, two per axis.
    pub delta_pattern: bool,
    /// Smallest pairwise `|det[δ_i δ_j]|` over the collinearity triples.
    pub collinearity_margin: f64,
    /// Smallest axis alignment among the `δ_j`.
    pub alignment_margin: f64,
    /// Smallest pairwise zero separation.
    pub separation_margin: f64,
}

impl ZeroSetReport {
    /// All flags hold.
    pub fn passed(&self) -> bool {
        self.origin_double
            && self.four_simple_distinct
            && self.no_three_collinear
            && self.away_from_poles
            && self.delta_pattern
    }
}

/// Validate the zero data of `Ψ` against the standard-zero-set conditions.
pub fn standard_zero_set_check(
    ctx: &DomainContext,
    inner: &MatrixInner,
) -> Result<ZeroSetReport, InnerError> {
    let origin: Vec<&Zero> = inner.zeros.iter().filter(|z| z.z.norm() < EPS_SEP).collect();
    let psi0 = inner.psi(Complex64::new(0.0, 0.0))?;
    let origin_double =
        origin.len() == 1 && origin[0].multiplicity == 2 && psi0.norm() < EPS_MAT;
    let simple: Vec<&Zero> = inner
        .zeros
        .iter()
        .filter(|z| z.z.norm() >= EPS_SEP)
        .collect();
    let mut separation_margin = f64::INFINITY;
    for i in 0..simple.len() {
        for j in (i + 1)..simple.len() {
            separation_margin = separation_margin.min((simple[i].z - simple[j].z).norm());
        }
    }
    let four_simple_distinct = simple.len() == 4
        && simple.iter().all(|z| z.multiplicity == 1)
        && separation_margin >= EPS_SEP;
    let report_deltas = &inner.deltas;
    let det2 = |a: &[Complex64; 2], b: &[Complex64; 2]| (a[0] * b[1] - a[1] * b[0]).norm();
    let mut collinearity_margin = f64::INFINITY;
    if report_deltas.len() == 4 {
        for i in 0..4 {
            for j in (i + 1)..4 {
                for k in (j + 1)..4 {
                    // A triple is collinear only if all pairwise dets vanish.
                    let m = det2(&report_deltas[i], &report_deltas[j])
                        .max(det2(&report_deltas[i], &report_deltas[k]))
                        .max(det2(&report_deltas[j], &report_deltas[k]));
                    collinearity_margin = collinearity_margin.min(m);
                }
            }
        }
    } else {
        collinearity_margin = 0.0;
    }
    let no_three_collinear = collinearity_margin >= EPS_SEP;
    let w = ctx.green_critical_points().map_err(InnerError::Solve)?;
    let mut pole_margin = f64::INFINITY;
    for z in &simple {
        for &wk in &w {
            pole_margin = pole_margin.min((z.z.conj() - wk).norm());
        }
    }
    let away_from_poles = pole_margin >= 1e-2;
    let mut alignment_margin: f64 = 0.0;
    let mut counts = [0usize; 2];
    if report_deltas.len() == 4 {
        alignment_margin = f64::INFINITY;
        for d in report_deltas {
            let a0 = d[0].norm();
            let a1 = d[1].norm();
            let (axis, score) = if a0 >= a1 { (0, a0) } else { (1, a1) };
            counts[axis] += 1;
            alignment_margin = alignment_margin.min(score);
        }
    }
    let delta_pattern = counts == [2, 2] && alignment_margin >= DELTA_ALIGNMENT;
    Ok(ZeroSetReport {
        origin_double,
        four_simple_distinct,
        no_three_collinear,
        away_from_poles,
        delta_pattern,
        collinearity_margin,
        alignment_margin,
        separation_margin,
    })
}

/// Largest `η` in `{2⁻ᵏ : k = 3..12}` whose `Ψ_{η,t}` passes the zero-set
/// checks with doubled separation margins.
pub fn choose_eta(
    ctx: &DomainContext,
    t: (f64, f64),
) -> Result<(f64, MatrixInner), InnerError> {
    for k in 3..=12u32 {
        let eta = (2f64).powi(-(k as i32));
        let inner = match build_psi(ctx, eta, t) {
            Ok(i) => i,
            Err(_) => continue,
        };
        let report = standard_zero_set_check(ctx, &inner)?;
        if report.passed()
            && report.separation_margin >= 2.0 * EPS_SEP
            && report.collinearity_margin >= 2.0 * EPS_SEP
        {
            return Ok((eta, inner));
        }
    }
    Err(InnerError::NoAdmissibleEta)
}

/// Result of the commutator probe for simultaneous diagonalizability.
#[derive(Debug, Clone)]
pub enum DiagonalizabilityOutcome {
    /// All probe products commute; consistent with `Ψ = U D(z) V`.
    Candidate,
    /// Two products fail to commute: no fixed pair of unitaries can
    /// diagonalize the family.
    Witness {
        /// Indices of the two probe pairs.
        pair: (usize, usize),
        /// Commutator norm.
        commutator: f64,
    },
}

/// Default probe pairs on two interior circles.
pub fn default_probe_pairs() -> Vec<(Complex64, Complex64)> {
    let mut pairs = Vec::new();
    for i in 0..6 {
        let a = 2.0 * PI * (i as f64 + 0.21) / 6.0;
        let b = 2.0 * PI * (i as f64 + 0.73) / 6.0;
        pairs.push((Complex64::from_polar(0.3, a), Complex64::from_polar(0.55, b)));
        pairs.push((Complex64::from_polar(0.55, a), Complex64::from_polar(0.3, b)));
    }
    pairs
}

/// Scan probe pairs for non-commuting products `C(z,w) = F(z)F(w)*`: if
/// `F = U D V` with constant unitaries, every such product shares the
/// eigenbasis `U`, so any non-commuting pair witnesses
/// non-diagonalizability.
pub fn diagonalizability_witness(
    f: impl Fn(Complex64) -> Matrix2<Complex64>,
    pairs: &[(Complex64, Complex64)],
) -> DiagonalizabilityOutcome {
    let products: Vec<Matrix2<Complex64>> =
        pairs.iter().map(|&(z, w)| f(z) * f(w).adjoint()).collect();
    let mut best: Option<((usize, usize), f64)> = None;
    for i in 0..products.len() {
        for j in (i + 1)..products.len() {
            let c = products[i] * products[j] - products[j] * products[i];
            let n = c.norm();
            if n > best.map_or(0.0, |b| b.1) {
                best = Some(((i, j), n));
            }
        }
    }
    match best {
        Some((pair, commutator)) if commutator > EPS_DIAG => DiagonalizabilityOutcome::Witness {
            pair,
            commutator,
        },
        _ => DiagonalizabilityOutcome::Candidate,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DomainSpec;
    use crate::scalar_inner::{find_nonreal_t, psi_t};
    use nalgebra::Vector2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::sync::{Mutex, MutexGuard, OnceLock};

    struct Fixture {
        ctx: DomainContext,
        t: (f64, f64),
        eta: f64,
        psi: MatrixInner,
    }

    unsafe impl Send for Fixture {}

    fn fixture() -> MutexGuard<'static, Fixture> {
        static FIX: OnceLock<Mutex<Fixture>> = OnceLock::new();
        FIX.get_or_init(|| {
            let ctx = DomainContext::new(DomainSpec::default());
            let (t, _, _) = find_nonreal_t(&ctx).unwrap();
            let (eta, psi) = choose_eta(&ctx, t).unwrap();
            Mutex::new(Fixture { ctx, t, eta, psi })
        })
        .lock()
        .unwrap()
    }

    #[test]
    fn h_matrix_positive_and_period_free() {
        let fix = fixture();
        let combos = build_h(&fix.ctx, fix.eta, fix.t).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let z = loop {
                let z = Complex64::new(rng.gen_range(-0.9..0.9), rng.gen_range(-0.9..0.9));
                if fix.ctx.spec.contains(z, 5e-2) {
                    break z;
                }
            };
            let x = Vector2::new(
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            );
            let x = &x / Complex64::new(x.norm(), 0.0);
            let h = eval_h(&combos, z);
            let hx = Vector2::new(
                h[(0, 0)] * x[0] + h[(0, 1)] * x[1],
                h[(1, 0)] * x[0] + h[(1, 1)] * x[1],
            );
            let quad = (x[0].conj() * hx[0] + x[1].conj() * hx[1]).re;
            assert!(quad > 0.0, "x*H(z)x = {quad} at z = {z}");
        }
        // Period cancellation: the per-entry source weights pair with the
        // normal-derivative densities to zero.
        let p = p_of_t(fix.t);
        let tau = fix.ctx.tau(&p).unwrap();
        let eta = fix.eta;
        let c2 = 1.0 - eta * eta;
        let q2c = conjugate_point(&p[2]);
        for j in 1..3 {
            let q = |bp: &BoundaryPoint| fix.ctx.q_density(j, bp).unwrap();
            let h11 = tau[0] * q(&p[0])
                + tau[1] * q(&p[1])
                + tau[2] * (c2 * q(&p[2]) + eta * eta * q(&q2c));
            let h12 = tau[2] * eta * c2.sqrt() * (q(&q2c) - q(&p[2]));
            assert!(h11.abs() < 1e-6, "H11 period {h11}");
            assert!(h12.abs() < 1e-6, "H12 period {h12}");
        }
    }

    #[test]
    fn eta_zero_is_diagonal_pair() {
        let fix = fixture();
        let psi0 = build_psi(&fix.ctx, 0.0, fix.t).unwrap();
        let plus = psi_t(&fix.ctx, fix.t).unwrap();
        let minus = psi_t(&fix.ctx, (-fix.t.0, -fix.t.1)).unwrap();
        let mut checked = 0;
        for i in 0..12 {
            for j in 0..10 {
                let z = Complex64::from_polar(
                    0.08 + 0.07 * j as f64,
                    2.0 * PI * (i as f64 + 0.5) / 12.0,
                );
                if !fix.ctx.spec.contains(z, 2e-2) {
                    continue;
                }
                let m = psi0.psi(z).unwrap();
                assert!(m[(0, 1)].norm() < 1e-6 && m[(1, 0)].norm() < 1e-6);
                assert!((m[(0, 0)] - plus.phi(z)).norm() < 1e-6);
                assert!((m[(1, 1)] - minus.phi(z)).norm() < 1e-6);
                checked += 1;
            }
        }
        assert!(checked >= 100, "only {checked} grid points");
    }

    #[test]
    fn psi_fixed_points_and_eigenvectors() {
        // Ψ(0) = 0, Ψ(1) = I, and the source-point eigenvector conditions,
        // all at boundary offset 1e-3 with one Richardson step.
        let fix = fixture();
        let psi = &fix.psi;
        assert!(psi.psi(Complex64::new(0.0, 0.0)).unwrap().norm() < EPS_MAT);
        let richardson = |q: Complex64, inward: Complex64| {
            boundary_extrapolate(&|eps: f64| psi.psi(q + eps * inward).unwrap())
        };
        let one = Complex64::new(1.0, 0.0);
        let at_one = richardson(one, Complex64::new(-1.0, 0.0));
        assert!(
            (at_one - Matrix2::identity()).norm() < EPS_MAT,
            "Ψ(1) deviates: {:.3e}",
            (at_one - Matrix2::identity()).norm()
        );
        let spec = fix.ctx.spec;
        let p = p_of_t(fix.t);
        let eta = fix.eta;
        let s = (1.0 - eta * eta).sqrt();
        let e1 = Vector2::new(one, Complex64::new(0.0, 0.0));
        let e2 = Vector2::new(Complex64::new(0.0, 0.0), one);
        let v = Vector2::new(Complex64::new(eta, 0.0), Complex64::new(s, 0.0));
        let vperp = Vector2::new(Complex64::new(s, 0.0), Complex64::new(-eta, 0.0));
        let cases = [
            (p[1], e1),
            (conjugate_point(&p[1]), e2),
            (conjugate_point(&p[2]), v),
            (p[2], vperp),
        ];
        for (bp, vec) in cases {
            let q = bp.position(&spec);
            let inward = -bp.outward_normal(&spec);
            let m = richardson(q, inward);
            let dev = (m * vec - vec).norm();
            assert!(dev < EPS_MAT, "eigenvector residual {dev:.3e} at {q}");
        }
    }

    #[test]
    fn boundary_unitarity() {
        let fix = fixture();
        let worst = fix.psi.boundary_unitarity_residual(&fix.ctx, 240);
        assert!(worst < EPS_MAT, "unitarity residual {worst:.3e}");
    }

    #[test]
    fn determinant_zero_structure() {
        let fix = fixture();
        let total: usize = fix.psi.zeros.iter().map(|z| z.multiplicity).sum();
        assert_eq!(total, 6);
        let report = standard_zero_set_check(&fix.ctx, &fix.psi).unwrap();
        assert!(report.origin_double, "{report:?}");
        assert!(report.four_simple_distinct, "{report:?}");
        assert!(report.no_three_collinear, "{report:?}");
        assert!(report.away_from_poles, "{report:?}");
        assert!(report.delta_pattern, "{report:?}");
        // Collinearity detector on a degenerate pattern.
        let mut broken = MatrixInner {
            eta: fix.psi.eta,
            t: fix.psi.t,
            combos: build_h(&fix.ctx, fix.psi.eta, fix.psi.t).unwrap(),
            im0: fix.psi.im0,
            sigma: fix.psi.sigma,
            zeros: fix.psi.zeros.clone(),
            deltas: fix.psi.deltas.clone(),
        };
        let e1 = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
        broken.deltas = vec![e1, e1, e1, [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]];
        let bad = standard_zero_set_check(&fix.ctx, &broken).unwrap();
        assert!(!bad.no_three_collinear);
    }

    #[test]
    fn eta_choice_and_zero_convergence() {
        let fix = fixture();
        assert!(fix.eta > 0.0);
        // Zeros drift toward the η = 0 zeros as η shrinks.
        let psi0 = build_psi(&fix.ctx, 0.0, fix.t).unwrap();
        let quarter = build_psi(&fix.ctx, fix.eta / 4.0, fix.t).unwrap();
        let drift = |inner: &MatrixInner| -> f64 {
            let mut worst = 0.0f64;
            for z in inner.zeros.iter().filter(|z| z.z.norm() >= EPS_SEP) {
                let nearest = psi0
                    .zeros
                    .iter()
                    .map(|r| (r.z - z.z).norm())
                    .fold(f64::INFINITY, f64::min);
                worst = worst.max(nearest);
            }
            worst
        };
        let d_eta = drift(&fix.psi);
        let d_quarter = drift(&quarter);
        assert!(
            d_quarter < d_eta || d_eta < 1e-8,
            "no convergence: {d_quarter} vs {d_eta}"
        );
    }

    #[test]
    fn diagonalizability_probe() {
        let fix = fixture();
        let pairs = default_probe_pairs();
        let outcome =
            diagonalizability_witness(|z| fix.psi.psi(z).unwrap(), &pairs);
        assert!(
            matches!(outcome, DiagonalizabilityOutcome::Witness { commutator, .. } if commutator > EPS_DIAG),
            "expected witness, got {outcome:?}"
        );
        let psi0 = build_psi(&fix.ctx, 0.0, fix.t).unwrap();
        let diag = diagonalizability_witness(|z| psi0.psi(z).unwrap(), &pairs);
        assert!(matches!(diag, DiagonalizabilityOutcome::Candidate));
        let u = Matrix2::new(
            Complex64::new(0.6, 0.0),
            Complex64::new(0.0, 0.8),
            Complex64::new(0.0, 0.8),
            Complex64::new(0.6, 0.0),
        );
        let constant = diagonalizability_witness(|_| u, &pairs);
        assert!(matches!(constant, DiagonalizabilityOutcome::Candidate));
    }
}
