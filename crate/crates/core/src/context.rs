//! Shared per-domain computation context with caching.
//!
//! Almost every object in this crate is derived from Dirichlet solves on one
//! fixed domain.  [`DomainContext`] owns a single collocation factorization
//! (one SVD) and memoizes the expensive derived objects: harmonic measures,
//! Green's functions per source point, and Herglotz kernels per boundary
//! source.  All solves after the first are matrix-vector products.

use std::cell::{OnceCell, RefCell};
use std::collections::HashMap;
use std::f64::consts::PI;
use std::rc::Rc;

use num_complex::Complex64;

use crate::error::{InnerError, SolveError};
use crate::geometry::{BoundaryPoint, DomainSpec};
use crate::herglotz::HerglotzKernel;
use crate::laplace::{DirichletSolver, SeriesHarmonic, SolverParams};
use crate::rootfind::brent;

/// Green's function `g(·, a)` of the domain with pole at the interior point
/// `a`, in the form `g(ζ) = -ln|ζ - a| + u(ζ)` with `u` harmonic.
#[derive(Debug, Clone)]
pub struct GreenFunction {
    /// Source point.
    pub a: Complex64,
    /// Regular part `u` (boundary data `ln|ζ - a|`).
    pub u: SeriesHarmonic,
}

impl GreenFunction {
    /// Value `g(z, a)`.
    pub fn eval(&self, z: Complex64) -> f64 {
        -(z - self.a).norm().ln() + self.u.eval(z)
    }

    /// Outward normal derivative `∂g/∂n` at a boundary point.
    pub fn normal_derivative(&self, spec: &DomainSpec, q: &BoundaryPoint) -> f64 {
        let z = q.position(spec);
        let n = q.outward_normal(spec);
        let sing = -(n / (z - self.a)).re; // d/dz of -Log(z - a), dotted with n
        sing + self.u.normal_derivative(q)
    }

    /// Derivative along the real axis at a real interior point (used for
    /// critical-point location): `d/dx g(x, a)`.
    pub fn real_axis_derivative(&self, x: f64) -> f64 {
        let z = Complex64::new(x, 0.0);
        (-1.0 / (z - self.a) + self.u.completion_deriv(z)).re
    }
}

/// Per-domain cache of solver factorization and derived objects.
pub struct DomainContext {
    /// Domain parameters.
    pub spec: DomainSpec,
    /// Solver parameters.
    pub params: SolverParams,
    solver: OnceCell<DirichletSolver>,
    harmonic: OnceCell<[SeriesHarmonic; 3]>,
    greens: RefCell<HashMap<(u64, u64), Rc<GreenFunction>>>,
    kernels: RefCell<HashMap<(usize, u64), Rc<HerglotzKernel>>>,
    crit: OnceCell<[f64; 2]>,
}

impl DomainContext {
    /// Create a context with default solver parameters.
    pub fn new(spec: DomainSpec) -> Self {
        Self::with_params(spec, SolverParams::default())
    }

    /// Create a context with explicit solver parameters.
    pub fn with_params(spec: DomainSpec, params: SolverParams) -> Self {
        DomainContext {
            spec,
            params,
            solver: OnceCell::new(),
            harmonic: OnceCell::new(),
            greens: RefCell::new(HashMap::new()),
            kernels: RefCell::new(HashMap::new()),
            crit: OnceCell::new(),
        }
    }

    /// The (lazily built) collocation factorization.
    pub fn solver(&self) -> Result<&DirichletSolver, SolveError> {
        if self.solver.get().is_none() {
            let s = DirichletSolver::new(self.spec, self.params)?;
            let _ = self.solver.set(s);
        }
        Ok(self.solver.get().unwrap())
    }

    /// All three harmonic measures `h_0, h_1, h_2` (each solved directly from
    /// its indicator data, so the partition-of-unity identity is a real
    /// consistency check, not a definition).
    pub fn harmonic_measures(&self) -> Result<&[SeriesHarmonic; 3], SolveError> {
        if self.harmonic.get().is_none() {
            let solver = self.solver()?;
            let mut out: Vec<SeriesHarmonic> = Vec::with_capacity(3);
            for j in 0..3 {
                out.push(solver.solve(|c, _| if c == j { 1.0 } else { 0.0 })?);
            }
            let arr: [SeriesHarmonic; 3] = out.try_into().unwrap();
            let _ = self.harmonic.set(arr);
        }
        Ok(self.harmonic.get().unwrap())
    }

    /// Harmonic measure `h_j`.
    pub fn harmonic_measure(&self, j: usize) -> Result<&SeriesHarmonic, SolveError> {
        Ok(&self.harmonic_measures()?[j])
    }

    /// Boundary density `Q_j = ∂h_j/∂n` at a boundary point (outward normal).
    pub fn q_density(&self, j: usize, q: &BoundaryPoint) -> Result<f64, SolveError> {
        Ok(self.harmonic_measure(j)?.normal_derivative(q))
    }

    /// The positive weight vector `τ(p)` for a triple of boundary points, one
    /// per circle: the cross product of the two rows of
    /// `M(p) = [Q_j(p_ℓ)]_{j=1,2; ℓ=0,1,2}`, normalized to sum 1.
    ///
    /// All three entries are positive for admissible triples because `Q_j` is
    /// positive on `B_j` and negative on the other circles.
    pub fn tau(&self, p: &[BoundaryPoint; 3]) -> Result<[f64; 3], InnerError> {
        let mut m = [[0.0f64; 3]; 2];
        for (l, q) in p.iter().enumerate() {
            m[0][l] = self.q_density(1, q)?;
            m[1][l] = self.q_density(2, q)?;
        }
        let mut t = [
            m[0][1] * m[1][2] - m[0][2] * m[1][1],
            m[0][2] * m[1][0] - m[0][0] * m[1][2],
            m[0][0] * m[1][1] - m[0][1] * m[1][0],
        ];
        let s: f64 = t.iter().sum();
        if s == 0.0 {
            return Err(InnerError::NonPositiveWeights(t[0], t[1], t[2]));
        }
        for v in &mut t {
            *v /= s;
        }
        if t.iter().any(|&v| v <= 0.0) {
            return Err(InnerError::NonPositiveWeights(t[0], t[1], t[2]));
        }
        Ok(t)
    }

    /// Green's function with pole at `a` (cached per source point).
    pub fn green(&self, a: Complex64) -> Result<Rc<GreenFunction>, SolveError> {
        if !self.spec.contains(a, 0.0) {
            return Err(SolveError::PointOutsideDomain { re: a.re, im: a.im });
        }
        let key = (a.re.to_bits(), a.im.to_bits());
        if let Some(g) = self.greens.borrow().get(&key) {
            return Ok(g.clone());
        }
        let solver = self.solver()?;
        let u = solver.solve(|_, z| (z - a).norm().ln())?;
        let g = Rc::new(GreenFunction { a, u });
        self.greens.borrow_mut().insert(key, g.clone());
        Ok(g)
    }

    /// Poisson kernel `P(q, z)` for boundary point `q` and interior point
    /// `z`, normalized against arc length scaled to total mass 1:
    /// `P(q, z) = -(L/2π) ∂g(·, z)/∂n (q)` with `L` the total boundary
    /// length.  Then `∫_B P(·, z) ds = 1` and `∫_{B_j} P(·, z) ds = h_j(z)`.
    pub fn poisson_via_green(&self, q: &BoundaryPoint, z: Complex64) -> Result<f64, SolveError> {
        let g = self.green(z)?;
        Ok(-self.spec.boundary_length() / (2.0 * PI) * g.normal_derivative(&self.spec, q))
    }

    /// Herglotz kernel (analytic completion data of the Poisson kernel) for a
    /// boundary source, cached per source point.
    pub fn herglotz(&self, q: &BoundaryPoint) -> Result<Rc<HerglotzKernel>, SolveError> {
        let key = (q.circle, q.theta.to_bits());
        if let Some(k) = self.kernels.borrow().get(&key) {
            return Ok(k.clone());
        }
        let k = Rc::new(HerglotzKernel::build(self, q)?);
        self.kernels.borrow_mut().insert(key, k.clone());
        Ok(k)
    }

    /// Critical points of the Green's function `g(·, 0)`: one in
    /// `(-1, c1 - r1)` and one in `(c2 + r2, 1)` on the real axis.
    pub fn green_critical_points(&self) -> Result<[f64; 2], SolveError> {
        if self.crit.get().is_none() {
            let g = self.green(Complex64::new(0.0, 0.0))?;
            let d = |x: f64| g.real_axis_derivative(x);
            let eps = 1e-6;
            let w1 = brent(d, -1.0 + eps, self.spec.c1 - self.spec.r1 - eps, 1e-14)?;
            let w2 = brent(d, self.spec.c2 + self.spec.r2 + eps, 1.0 - eps, 1e-14)?;
            let _ = self.crit.set([w1, w2]);
        }
        Ok(*self.crit.get().unwrap())
    }

    /// Genus-2 period matrix of the double, read off the log coefficients of
    /// the harmonic measures: `P_{jℓ} = -π b_ℓ^{(j)}`.  With this sign the
    /// matrix is symmetric positive definite, the Abel–Jacobi image of a
    /// positive loop around hole `ℓ` is `-i P e_ℓ`, and the theta series
    /// below converges.
    pub fn period_matrix(&self) -> Result<[[f64; 2]; 2], SolveError> {
        let h = self.harmonic_measures()?;
        Ok([
            [-PI * h[1].b[0], -PI * h[1].b[1]],
            [-PI * h[2].b[0], -PI * h[2].b[1]],
        ])
    }
}
