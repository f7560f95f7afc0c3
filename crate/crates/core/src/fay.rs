//! Reproducing kernels for the Hardy space of the domain with respect to
//! harmonic measure, in two independent forms.
//!
//! For an interior point `a`, harmonic measure `ω_a` is the probability
//! measure on the boundary with density given by the Poisson kernel at `a`.
//! The Hardy space `H²(ω_a)` of analytic functions with square-integrable
//! boundary values has a reproducing kernel `K^a(ζ, z)` with three special
//! properties used downstream:
//!
//! * `K^a(ζ, a) = 1` identically (the constant function reproduces `a`);
//! * as a function on the double, `K^a(·, z)` is meromorphic with exactly
//!   three poles: `Jz` and the two back-sheet points `P₁, P₂` lying over
//!   the critical points of the Green function at `a`;
//! * the kernels for distinct second arguments are linearly independent,
//!   and a 4×4 matrix of pole residues paired with direction vectors is
//!   invertible — the engine of the seven-point uniqueness argument.
//!
//! Two constructions are implemented.  The *Gram form* orthonormalizes the
//! rational basis `{1, zⁿ, (z-c_k)⁻ⁿ}` in `L²(ω_a)` by QR factorization of
//! the weighted boundary-value matrix; it is fast, certified by the
//! reproducing property, and is the source of truth on the front sheet.
//! The *theta form* expresses `K^a` as a ratio of eight theta values in the
//! Abel–Jacobi images,
//!
//! ```text
//!             θ(χ(ζ)+χ(z)̄+e) θ(χ(a)+χ(a)̄+e) θ⋆(χ(a)+χ(z)̄) θ⋆(χ(ζ)+χ(a)̄)
//!  K^a(ζ,z) = ───────────────────────────────────────────────────────────
//!             θ(χ(a)+χ(z)̄+e) θ(χ(ζ)+χ(a)̄+e) θ⋆(χ(ζ)+χ(z)̄) θ⋆(χ(a)+χ(a)̄)
//! ```
//!
//! with `θ⋆` the theta with a fixed odd half-period characteristic.  The
//! quasi-periodicity multipliers cancel in the ratio, so the value is
//! independent of the lattice representatives of the `χ`'s (tested).  The
//! Jacobian parameter `e` is not given by a closed formula here; it is
//! determined numerically by [`fit_e`], matching the theta form to the Gram
//! form on a probe grid.  The theta form is what extends to the back sheet,
//! where the poles live; residues are then contour integrals in the
//! anti-holomorphic coordinate `u = conj(w)` of the back sheet.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::abel::AbelMap;
use crate::context::DomainContext;
use crate::error::KernelError;
use crate::geometry::{BoundaryPoint, DoublePoint};
use crate::linalg;
use crate::theta::ThetaFunction;

/// Tolerance on the theta/Gram fit residual.
pub const EPS_FIT: f64 = 1e-3;

/// Contour radius for residue extraction.
pub const RESIDUE_RADIUS: f64 = 1e-2;

/// Reproducing kernel in Gram (orthonormal basis) form.
#[derive(Debug, Clone)]
pub struct GramKernel {
    /// Base point of the measure.
    pub a: Complex64,
    spec: crate::geometry::DomainSpec,
    n_terms: usize,
    /// Basis-to-orthonormal coefficient matrix (`ψ_j = Σ_i C_ij b_i`).
    coeffs: DMatrix<Complex64>,
    /// Quadrature nodes on the boundary.
    pub nodes: Vec<Complex64>,
    /// Harmonic-measure weights (sum ≈ 1).
    pub weights: Vec<f64>,
}

impl GramKernel {
    /// Raw basis vector `(1, z, …, z^N, ρ₁⁻¹, …, ρ₁⁻ᴺ, ρ₂⁻¹, …, ρ₂⁻ᴺ)` with
    /// `ρ_k = (z - c_k)/r_k`.
    fn basis_at(spec: &crate::geometry::DomainSpec, n_terms: usize, z: Complex64) -> DVector<Complex64> {
        let mut b = DVector::zeros(1 + 3 * n_terms);
        b[0] = Complex64::new(1.0, 0.0);
        let mut pw = Complex64::new(1.0, 0.0);
        for n in 1..=n_terms {
            pw *= z;
            b[n] = pw;
        }
        for k in 0..2 {
            let c = spec.circles()[k + 1];
            let inv = c.radius / (z - c.center);
            let mut pw = Complex64::new(1.0, 0.0);
            for n in 1..=n_terms {
                pw *= inv;
                b[n_terms * (1 + k) + n] = pw;
            }
        }
        b
    }

    /// Build the kernel for base point `a` with `n_terms` powers per family.
    pub fn build(ctx: &DomainContext, a: Complex64, n_terms: usize) -> Result<Self, KernelError> {
        let spec = ctx.spec;
        let m = ctx.params.nodes_per_circle;
        let mut nodes = Vec::with_capacity(3 * m);
        let mut weights = Vec::with_capacity(3 * m);
        let total_len = spec.boundary_length();
        for idx in 0..3 {
            let r = spec.circles()[idx].radius;
            let ds = 2.0 * std::f64::consts::PI * r / m as f64;
            for i in 0..m {
                let theta = 2.0 * std::f64::consts::PI * (i as f64 + 0.5) / m as f64;
                let q = BoundaryPoint { circle: idx, theta };
                // The Poisson density integrates to the boundary length
                // against arclength; normalize to a probability measure.
                let w = ctx.poisson_via_green(&q, a)? * ds / total_len;
                nodes.push(q.position(&spec));
                weights.push(w);
            }
        }
        let nb = 1 + 3 * n_terms;
        let mut v = DMatrix::zeros(3 * m, nb);
        for (i, (&z, &w)) in nodes.iter().zip(weights.iter()).enumerate() {
            let b = Self::basis_at(&spec, n_terms, z) * Complex64::new(w.max(0.0).sqrt(), 0.0);
            v.set_row(i, &b.transpose());
        }
        let qr = v.qr();
        let r = qr.r();
        let mut dmax: f64 = 0.0;
        let mut dmin = f64::INFINITY;
        for i in 0..nb {
            let d = r[(i, i)].norm();
            dmax = dmax.max(d);
            dmin = dmin.min(d);
        }
        if dmin < 1e-12 * dmax {
            return Err(KernelError::GramSingular { pivot: dmin });
        }
        let coeffs = r
            .solve_upper_triangular(&DMatrix::identity(nb, nb))
            .ok_or(KernelError::GramSingular { pivot: dmin })?;
        Ok(GramKernel {
            a,
            spec,
            n_terms,
            coeffs,
            nodes,
            weights,
        })
    }

    /// Values of the orthonormal functions at `z`.
    pub fn on_basis_at(&self, z: Complex64) -> DVector<Complex64> {
        let b = Self::basis_at(&self.spec, self.n_terms, z);
        self.coeffs.transpose() * b
    }

    /// Kernel value `K^a(ζ, z) = Σ_j ψ_j(ζ) conj(ψ_j(z))`.
    pub fn eval(&self, zeta: Complex64, z: Complex64) -> Complex64 {
        let pz = self.on_basis_at(zeta);
        let pw = self.on_basis_at(z);
        pw.dotc(&pz)
    }
}

/// Reproducing kernel in theta-ratio form, evaluable on both sheets.
#[derive(Debug, Clone)]
pub struct ThetaKernel {
    /// Base point of the measure.
    pub a: Complex64,
    /// Fitted Jacobian translation parameter.
    pub e: [Complex64; 2],
    /// Odd half-period used by `θ⋆`.
    pub e_star: [Complex64; 2],
    theta: ThetaFunction,
    abel: AbelMap,
    chi_a: [Complex64; 2],
}

fn conj2(x: &[Complex64; 2]) -> [Complex64; 2] {
    [x[0].conj(), x[1].conj()]
}

fn add2(x: &[Complex64; 2], y: &[Complex64; 2]) -> [Complex64; 2] {
    [x[0] + y[0], x[1] + y[1]]
}

impl ThetaKernel {
    /// Assemble the evaluator from a fitted parameter `e`.
    pub fn new(ctx: &DomainContext, a: Complex64, e: [Complex64; 2]) -> Result<Self, KernelError> {
        let theta = ThetaFunction::new(ctx.period_matrix().map_err(crate::error::ThetaError::Solve)?)
            .map_err(KernelError::Theta)?;
        let abel = AbelMap::new(ctx).map_err(KernelError::Theta)?;
        let chi_a = abel.chi_front(a).map_err(KernelError::Theta)?;
        // The denominator θ⋆(χ(a)+conj χ(a)) must not vanish for the chosen
        // odd half-period.
        let probe_arg = add2(&chi_a, &conj2(&chi_a));
        let e_star = theta
            .find_odd_half_period(|es| theta.theta_char(es, &probe_arg).norm() > 1e-8)
            .map_err(KernelError::Theta)?;
        Ok(ThetaKernel {
            a,
            e,
            e_star,
            theta,
            abel,
            chi_a,
        })
    }

    /// Theta with the fixed odd half-period characteristic.
    pub fn theta_star(&self, w: &[Complex64; 2]) -> Complex64 {
        self.theta.theta_char(&self.e_star, w)
    }

    /// Kernel value from explicit Abel–Jacobi images of `ζ` and `z` (the
    /// ratio is invariant under lattice shifts of either image).
    pub fn eval_chi(&self, chi_zeta: &[Complex64; 2], chi_z: &[Complex64; 2]) -> Complex64 {
        let za = &self.chi_a;
        let cz = conj2(chi_z);
        let ca = conj2(za);
        let th = |w: &[Complex64; 2]| {
            let arg = add2(w, &self.e);
            self.theta.theta(&arg)
        };
        let num = th(&add2(chi_zeta, &cz))
            * th(&add2(za, &ca))
            * self.theta_star(&add2(za, &cz))
            * self.theta_star(&add2(chi_zeta, &ca));
        let den = th(&add2(za, &cz))
            * th(&add2(chi_zeta, &ca))
            * self.theta_star(&add2(chi_zeta, &cz))
            * self.theta_star(&add2(za, &ca));
        num / den
    }

    /// Kernel `K^a(ζ, z)` with `ζ` on either sheet of the double and `z`
    /// interior on the front sheet.
    pub fn eval(&self, zeta: &DoublePoint, z: Complex64) -> Result<Complex64, KernelError> {
        let chi_zeta = self.abel.chi(zeta).map_err(KernelError::Theta)?;
        let chi_z = self.abel.chi_front(z).map_err(KernelError::Theta)?;
        Ok(self.eval_chi(&chi_zeta, &chi_z))
    }

    /// Kernel as a function of the back-sheet anti-holomorphic coordinate
    /// `u` (the back-sheet point over `conj(u)`).
    pub fn eval_back_coord(&self, u: Complex64, z: Complex64) -> Result<Complex64, KernelError> {
        self.eval(&DoublePoint::back(u.conj()), z)
    }
}

/// Front-sheet probe grid used for fitting and cross-validation: points on
/// two rings well inside the domain, avoiding the holes.  The radii stay
/// below 0.65 so that the Gram form at 24+ basis terms is converged past
/// the comparison tolerances (its truncation error grows like `r^{2N}`
/// toward the outer boundary).
pub fn probe_points(n: usize) -> Vec<Complex64> {
    let mut pts = Vec::with_capacity(n);
    let mut i = 0;
    let mut k = 0usize;
    while pts.len() < n {
        let r = if k % 2 == 0 { 0.62 } else { 0.5 };
        let t = 2.0 * std::f64::consts::PI * (i as f64 + 0.37) / 11.0;
        let z = Complex64::from_polar(r, t);
        i += 1;
        if i % 11 == 0 {
            k += 1;
        }
        let spec = crate::geometry::DomainSpec::default();
        if spec.contains(z, 3e-2) {
            pts.push(z);
        }
    }
    pts
}

/// Mean-square mismatch between the theta form (with parameter `e`) and the
/// Gram form over the pairs of a probe grid.
fn fit_mismatch(
    tk: &ThetaKernel,
    chi_probes: &[[Complex64; 2]],
    gram_vals: &DMatrix<Complex64>,
) -> f64 {
    let n = chi_probes.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            let v = tk.eval_chi(&chi_probes[i], &chi_probes[j]);
            s += (v - gram_vals[(i, j)]).norm_sqr();
        }
    }
    s / (n * n) as f64
}

/// Fit the Jacobian parameter `e` of the theta form against the Gram form.
///
/// The parameter is written `e = u + iPv` with `u, v ∈ [0,1)²`; a coarse
/// 4⁴ grid seeds a Nelder–Mead refinement of the mean-square mismatch over
/// a 10×10 probe grid.  Returns the parameter and the final mismatch.
pub fn fit_e(
    ctx: &DomainContext,
    gram: &GramKernel,
    a: Complex64,
) -> Result<([Complex64; 2], f64), KernelError> {
    let mut tk = ThetaKernel::new(ctx, a, [Complex64::new(0.0, 0.0); 2])?;
    let probes = probe_points(10);
    let chi_probes: Vec<[Complex64; 2]> = probes
        .iter()
        .map(|&z| tk.abel.chi_front(z).map_err(KernelError::Theta))
        .collect::<Result<_, _>>()?;
    let n = probes.len();
    let mut gram_vals = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            gram_vals[(i, j)] = gram.eval(probes[i], probes[j]);
        }
    }
    let p = tk.theta.p;
    let to_e = |x: &[f64; 4]| -> [Complex64; 2] {
        let pv = [
            p[0][0] * x[2] + p[0][1] * x[3],
            p[1][0] * x[2] + p[1][1] * x[3],
        ];
        [Complex64::new(x[0], pv[0]), Complex64::new(x[1], pv[1])]
    };
    let mut best = (f64::INFINITY, [0.0f64; 4]);
    let steps = 4;
    for i0 in 0..steps {
        for i1 in 0..steps {
            for i2 in 0..steps {
                for i3 in 0..steps {
                    let x = [
                        i0 as f64 / steps as f64,
                        i1 as f64 / steps as f64,
                        i2 as f64 / steps as f64,
                        i3 as f64 / steps as f64,
                    ];
                    tk.e = to_e(&x);
                    let m = fit_mismatch(&tk, &chi_probes, &gram_vals);
                    if m < best.0 {
                        best = (m, x);
                    }
                }
            }
        }
    }
    let mut objective = |x: &[f64; 4]| {
        tk.e = to_e(x);
        fit_mismatch(&tk, &chi_probes, &gram_vals)
    };
    let (x, residual) = nelder_mead(&mut objective, best.1, 0.12, 400, 1e-14);
    if residual > EPS_FIT {
        return Err(KernelError::FitFailed {
            residual,
            tol: EPS_FIT,
        });
    }
    Ok((to_e(&x), residual))
}

/// Minimal 4-parameter Nelder–Mead simplex search.
fn nelder_mead(
    f: &mut impl FnMut(&[f64; 4]) -> f64,
    start: [f64; 4],
    scale: f64,
    max_iter: usize,
    f_tol: f64,
) -> ([f64; 4], f64) {
    const N: usize = 4;
    let mut simplex: Vec<([f64; 4], f64)> = Vec::with_capacity(N + 1);
    simplex.push((start, f(&start)));
    for i in 0..N {
        let mut x = start;
        x[i] += scale;
        simplex.push((x, f(&x)));
    }
    for _ in 0..max_iter {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        if simplex[N].1 - simplex[0].1 < f_tol {
            break;
        }
        let mut centroid = [0.0; 4];
        for s in &simplex[..N] {
            for i in 0..N {
                centroid[i] += s.0[i] / N as f64;
            }
        }
        let worst = simplex[N];
        let point = |t: f64| {
            let mut x = [0.0; 4];
            for i in 0..N {
                x[i] = centroid[i] + t * (worst.0[i] - centroid[i]);
            }
            x
        };
        let xr = point(-1.0);
        let fr = f(&xr);
        if fr < simplex[0].1 {
            let xe = point(-2.0);
            let fe = f(&xe);
            simplex[N] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[N - 1].1 {
            simplex[N] = (xr, fr);
        } else {
            let xc = point(0.5);
            let fc = f(&xc);
            if fc < worst.1 {
                simplex[N] = (xc, fc);
            } else {
                let best = simplex[0].0;
                for s in simplex.iter_mut().skip(1) {
                    for i in 0..N {
                        s.0[i] = best[i] + 0.5 * (s.0[i] - best[i]);
                    }
                    s.1 = f(&s.0);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    (simplex[0].0, simplex[0].1)
}

/// Residues of `ζ ↦ K^a(ζ, z)` at the two back-sheet poles over the Green
/// critical points, by contour integration in the back-sheet coordinate.
pub fn residues(
    ctx: &DomainContext,
    tk: &ThetaKernel,
    z: Complex64,
) -> Result<[Complex64; 2], KernelError> {
    residues_with_radius(ctx, tk, z, RESIDUE_RADIUS)
}

/// Residues with an explicit contour radius (for refinement checks).
pub fn residues_with_radius(
    ctx: &DomainContext,
    tk: &ThetaKernel,
    z: Complex64,
    radius: f64,
) -> Result<[Complex64; 2], KernelError> {
    let w = ctx.green_critical_points().map_err(KernelError::Solve)?;
    let mut out = [Complex64::new(0.0, 0.0); 2];
    for j in 0..2 {
        // The third pole sits at Jz, i.e. coordinate u = conj(z); the other
        // critical point is far away by construction.
        let dist = (Complex64::new(w[j], 0.0) - z.conj()).norm();
        if dist < 2.0 * radius {
            return Err(KernelError::PoleCollision { dist, radius });
        }
        let m = 64;
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..m {
            let t = 2.0 * std::f64::consts::PI * i as f64 / m as f64;
            let u = w[j] + Complex64::from_polar(radius, t);
            acc += tk.eval_back_coord(u, z)? * Complex64::from_polar(1.0, t);
        }
        out[j] = acc * radius / m as f64;
    }
    Ok(out)
}

/// The 4×4 matrix of residue–direction pairings whose invertibility drives
/// the uniqueness theorem.
#[derive(Debug, Clone)]
pub struct ResidueMatrix {
    /// Interior points `a_1..a_4`.
    pub points: [Complex64; 4],
    /// Direction vectors `δ_1..δ_4`.
    pub deltas: [[Complex64; 2]; 4],
    /// Column `i` stacks `R_1(a_i)δ_i` over `R_2(a_i)δ_i`.
    pub matrix: DMatrix<Complex64>,
    /// Smallest singular value.
    pub sigma_min: f64,
    /// Condition number estimate.
    pub cond: f64,
}

/// Assemble the residue matrix for points `a_i` and directions `δ_i` using
/// a theta-form kernel based at `a = tk.a`.
pub fn residue_matrix(
    ctx: &DomainContext,
    tk: &ThetaKernel,
    points: [Complex64; 4],
    deltas: [[Complex64; 2]; 4],
) -> Result<ResidueMatrix, KernelError> {
    let mut matrix = DMatrix::zeros(4, 4);
    for (i, &ai) in points.iter().enumerate() {
        let r = residues(ctx, tk, ai)?;
        for row in 0..2 {
            for comp in 0..2 {
                matrix[(2 * row + comp, i)] = r[row] * deltas[i][comp];
            }
        }
    }
    let sv = linalg::singular_values(&matrix);
    let sigma_min = *sv.last().unwrap();
    let cond = sv[0] / sigma_min.max(f64::MIN_POSITIVE);
    Ok(ResidueMatrix {
        points,
        deltas,
        matrix,
        sigma_min,
        cond,
    })
}

/// Pick-type block matrix `M_Q = ((I - F(z)F(w)*) K(z, w))_{z,w ∈ Q}` for a
/// 2×2 matrix function `F`, together with its (Hermitian) eigenvalues.
pub fn pick_block_matrix(
    kernel: impl Fn(Complex64, Complex64) -> Complex64,
    f: impl Fn(Complex64) -> DMatrix<Complex64>,
    q: &[Complex64],
) -> (DMatrix<Complex64>, Vec<f64>) {
    let n = q.len();
    let fv: Vec<DMatrix<Complex64>> = q.iter().map(|&z| f(z)).collect();
    let id = DMatrix::identity(2, 2);
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let block = (&id - &fv[i] * fv[j].adjoint()) * kernel(q[i], q[j]);
            for r in 0..2 {
                for c in 0..2 {
                    m[(2 * i + r, 2 * j + c)] = block[(r, c)];
                }
            }
        }
    }
    let (vals, _) = linalg::hermitian_eigen(&m);
    let eigs = vals.iter().copied().collect();
    (m, eigs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DomainSpec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::sync::{Mutex, MutexGuard, OnceLock};

    struct Fixture {
        ctx: DomainContext,
        gram0: GramKernel,
        tk0: ThetaKernel,
        fit_residual: f64,
    }

    // The e-fit is expensive; share one fitted kernel across tests.  The
    // context caches use Rc/RefCell, so the fixture is handed out behind a
    // mutex and only ever touched while the lock is held.
    unsafe impl Send for Fixture {}

    fn fixture() -> MutexGuard<'static, Fixture> {
        static FIX: OnceLock<Mutex<Fixture>> = OnceLock::new();
        FIX.get_or_init(|| {
            let ctx = DomainContext::new(DomainSpec::default());
            let a = Complex64::new(0.0, 0.0);
            let gram0 = GramKernel::build(&ctx, a, 32).unwrap();
            let (e, fit_residual) = fit_e(&ctx, &gram0, a).unwrap();
            let tk0 = ThetaKernel::new(&ctx, a, e).unwrap();
            Mutex::new(Fixture {
                ctx,
                gram0,
                tk0,
                fit_residual,
            })
        })
        .lock()
        .unwrap()
    }

    // Sample inside radius 0.68: the Gram form at 32 terms is converged to
    // ~1e-7 there, so it can serve as the comparison oracle.
    fn random_point(rng: &mut ChaCha8Rng, spec: &DomainSpec) -> Complex64 {
        loop {
            let z = Complex64::new(rng.gen_range(-0.68..0.68), rng.gen_range(-0.68..0.68));
            if z.norm() <= 0.68 && spec.contains(z, 5e-2) {
                return z;
            }
        }
    }

    #[test]
    fn gram_normalization_and_hermitian() {
        let fix = fixture();
        let spec = DomainSpec::default();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let z = random_point(&mut rng, &spec);
            let v = fix.gram0.eval(z, fix.gram0.a);
            assert!((v - 1.0).norm() < 1e-6, "K(ζ,a) = {v} at ζ = {z}");
        }
        for _ in 0..20 {
            let z = random_point(&mut rng, &spec);
            let w = random_point(&mut rng, &spec);
            let d = fix.gram0.eval(z, w) - fix.gram0.eval(w, z).conj();
            assert!(d.norm() < 1e-10);
        }
        // Gram matrix of kernel sections is PSD.
        let pts: Vec<Complex64> = (0..6).map(|_| random_point(&mut rng, &spec)).collect();
        let mut g = DMatrix::zeros(6, 6);
        for i in 0..6 {
            for j in 0..6 {
                g[(i, j)] = fix.gram0.eval(pts[j], pts[i]);
            }
        }
        assert!(linalg::min_eigenvalue(&g) >= -1e-10);
    }

    #[test]
    fn gram_reproducing_property() {
        // Quadrature oracle: ⟨f, K(·,z)⟩_{ω_0} = f(z) for analytic test
        // functions.
        let fix = fixture();
        let spec = DomainSpec::default();
        let c1 = spec.hole_center(1);
        let z = Complex64::new(0.2, -0.3);
        let funcs: Vec<Box<dyn Fn(Complex64) -> Complex64>> = vec![
            Box::new(|_| Complex64::new(1.0, 0.0)),
            Box::new(|w| w),
            Box::new(|w| w * w),
            Box::new(move |w| 1.0 / (w - c1)),
        ];
        for f in &funcs {
            let mut acc = Complex64::new(0.0, 0.0);
            for (&q, &w) in fix.gram0.nodes.iter().zip(fix.gram0.weights.iter()) {
                acc += f(q) * fix.gram0.eval(q, z).conj() * w;
            }
            assert!(
                (acc - f(z)).norm() < 1e-6,
                "reproduced {acc} vs {}",
                f(z)
            );
        }
    }

    #[test]
    fn gram_basis_size_agreement() {
        // Two basis sizes agree on a probe grid, and the normalization holds
        // for an off-center base point.
        let ctx = DomainContext::new(DomainSpec::default());
        let a = Complex64::new(0.1, 0.2);
        let g24 = GramKernel::build(&ctx, a, 24).unwrap();
        let g32 = GramKernel::build(&ctx, a, 32).unwrap();
        let probes = probe_points(8);
        for &z in &probes {
            assert!((g32.eval(z, a) - 1.0).norm() < 1e-6);
            for &w in &probes {
                let d = (g24.eval(z, w) - g32.eval(z, w)).norm();
                assert!(d < 1e-5, "basis-size drift {d} at ({z}, {w})");
            }
        }
    }

    #[test]
    fn theta_form_lattice_invariance() {
        let fix = fixture();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let spec = DomainSpec::default();
        let p = fix.tk0.theta.p;
        for _ in 0..10 {
            let zeta = random_point(&mut rng, &spec);
            let z = random_point(&mut rng, &spec);
            let chi_zeta = fix.tk0.abel.chi_front(zeta).unwrap();
            let chi_z = fix.tk0.abel.chi_front(z).unwrap();
            let base = fix.tk0.eval_chi(&chi_zeta, &chi_z);
            let n = [rng.gen_range(-1i64..2) as f64, rng.gen_range(-1i64..2) as f64];
            let m = [rng.gen_range(-1i64..2) as f64, rng.gen_range(-1i64..2) as f64];
            let shifted = [
                chi_zeta[0] + n[0] + Complex64::new(0.0, p[0][0] * m[0] + p[0][1] * m[1]),
                chi_zeta[1] + n[1] + Complex64::new(0.0, p[1][0] * m[0] + p[1][1] * m[1]),
            ];
            let v = fix.tk0.eval_chi(&shifted, &chi_z);
            assert!(
                (v - base).norm() < 1e-8 * base.norm().max(1.0),
                "lattice shift changed value: {v} vs {base}"
            );
        }
    }

    #[test]
    fn theta_form_exact_at_diagonal() {
        // K^a(ζ, a) = 1 holds identically in the ratio, for any parameter e.
        let ctx = DomainContext::new(DomainSpec::default());
        let a = Complex64::new(0.0, 0.0);
        let e = [Complex64::new(0.31, 0.17), Complex64::new(-0.21, 0.4)];
        let tk = ThetaKernel::new(&ctx, a, e).unwrap();
        for &zeta in &probe_points(6) {
            let v = tk.eval(&DoublePoint::front(zeta), a).unwrap();
            assert!((v - 1.0).norm() < 1e-10, "K(ζ,a) = {v}");
        }
    }

    #[test]
    fn theta_gram_agreement_after_fit() {
        let fix = fixture();
        assert!(
            fix.fit_residual < EPS_FIT,
            "fit residual {}",
            fix.fit_residual
        );
        // Held-out pairs: points not used by the 10-point fitting grid.
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let spec = DomainSpec::default();
        let mut worst = 0.0f64;
        for _ in 0..100 {
            let zeta = random_point(&mut rng, &spec);
            let z = random_point(&mut rng, &spec);
            let tv = fix.tk0.eval(&DoublePoint::front(zeta), z).unwrap();
            let gv = fix.gram0.eval(zeta, z);
            worst = worst.max((tv - gv).norm());
        }
        assert!(worst < 1e-4, "held-out mismatch {worst}");
    }

    #[test]
    fn poles_and_zero_on_back_sheet() {
        // In the back-sheet coordinate u, the kernel ζ ↦ K⁰(ζ, z) has simple
        // poles at the Green critical points and a simple zero at u = conj(a)
        // = 0; winding counts certify both.
        let fix = fixture();
        let w = fix.ctx.green_critical_points().unwrap();
        let z = Complex64::new(0.25, 0.15);
        let count = |center: Complex64| -> i64 {
            let f = |u: Complex64| fix.tk0.eval_back_coord(u, z).unwrap();
            let path = |t: f64| {
                center + Complex64::from_polar(RESIDUE_RADIUS, 2.0 * std::f64::consts::PI * t)
            };
            crate::rootfind::winding_number(&f, &path).unwrap()
        };
        assert_eq!(count(Complex64::new(w[0], 0.0)), -1);
        assert_eq!(count(Complex64::new(w[1], 0.0)), -1);
        assert_eq!(count(z.conj()), -1, "pole at Jz missing");
        assert_eq!(count(Complex64::new(0.0, 0.0)), 1, "zero at Ja missing");
    }

    #[test]
    fn residues_vanish_for_constant_and_vary_continuously() {
        let fix = fixture();
        // K⁰(ζ, 0) ≡ 1: residues vanish.
        let r0 = residues(&fix.ctx, &fix.tk0, Complex64::new(0.0, 0.0)).unwrap();
        assert!(r0[0].norm() < 1e-10 && r0[1].norm() < 1e-10);
        // Continuity in the second argument.
        let z = Complex64::new(0.2, 0.1);
        let r1 = residues(&fix.ctx, &fix.tk0, z).unwrap();
        let r2 = residues(&fix.ctx, &fix.tk0, z + 1e-4).unwrap();
        assert!((r1[0] - r2[0]).norm() < 1e-2 && (r1[1] - r2[1]).norm() < 1e-2);
        // Contour refinement changes nothing.
        let rh = residues_with_radius(&fix.ctx, &fix.tk0, z, RESIDUE_RADIUS / 2.0).unwrap();
        assert!((r1[0] - rh[0]).norm() < 1e-6 && (r1[1] - rh[1]).norm() < 1e-6);
        // Collision guard.
        let w = fix.ctx.green_critical_points().unwrap();
        let bad = Complex64::new(w[0], 1e-3);
        assert!(matches!(
            residues(&fix.ctx, &fix.tk0, bad.conj()),
            Err(KernelError::PoleCollision { .. })
        ));
    }

    #[test]
    fn residue_matrix_invertible_and_linear() {
        let fix = fixture();
        let e1 = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
        let e2 = [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
        let points = [
            Complex64::new(0.12, 0.05),
            Complex64::new(-0.1, 0.09),
            Complex64::new(0.07, -0.11),
            Complex64::new(0.18, 0.14),
        ];
        let deltas = [e1, e1, e2, e2];
        let rm = residue_matrix(&fix.ctx, &fix.tk0, points, deltas).unwrap();
        assert!(
            rm.sigma_min > 1e-6 * rm.sigma_min * rm.cond,
            "residue matrix numerically singular: σ_min {}, cond {}",
            rm.sigma_min,
            rm.cond
        );
        assert!(rm.sigma_min > 0.0 && rm.cond < 1e8);
        let deltas2 = deltas.map(|d| [d[0] * 2.0, d[1] * 2.0]);
        let rm2 = residue_matrix(&fix.ctx, &fix.tk0, points, deltas2).unwrap();
        let sv1 = linalg::singular_values(&rm.matrix);
        let sv2 = linalg::singular_values(&rm2.matrix);
        for (s1, s2) in sv1.iter().zip(sv2.iter()) {
            assert!((s2 - 2.0 * s1).abs() < 1e-9 * s1.max(1.0));
        }
    }

    #[test]
    fn pick_block_vanishes_for_constant_unitary() {
        let fix = fixture();
        let u = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(0.6, 0.0),
                Complex64::new(0.0, 0.8),
                Complex64::new(0.0, 0.8),
                Complex64::new(0.6, 0.0),
            ],
        );
        let q = probe_points(4);
        let (m, eigs) = pick_block_matrix(
            |z, w| fix.gram0.eval(z, w),
            |_| u.clone(),
            &q,
        );
        assert!(m.norm() < 1e-9);
        assert!(eigs.iter().all(|e| e.abs() < 1e-9));
    }
}
