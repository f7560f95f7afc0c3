//! Error types shared across the crate.
//!
//! Every fallible stage reports a structured error carrying the numbers that
//! triggered it, so callers (and the CLI) can distinguish "the input is bad"
//! from "the computation did not reach its tolerance".

use thiserror::Error;

/// Violations of the geometric invariants of a domain specification.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    /// A hole center is outside its allowed interval.
    #[error("hole {which} center {value} outside allowed open interval")]
    CenterOutOfRange {
        /// Hole index (1 or 2).
        which: usize,
        /// Offending center value.
        value: f64,
    },
    /// A hole radius is not in `(0, min(|c|, 1-|c|))`.
    #[error("hole {which} radius {value} not in (0, {bound})")]
    RadiusOutOfRange {
        /// Hole index (1 or 2).
        which: usize,
        /// Offending radius.
        value: f64,
        /// Upper bound implied by the center.
        bound: f64,
    },
    /// The two closed holes intersect (gap is `c2 - c1 - r1 - r2`).
    #[error("holes overlap: gap {gap}")]
    HolesOverlap {
        /// Signed gap between the holes.
        gap: f64,
    },
}

/// Failures of the boundary-collocation Dirichlet solver and of quantities
/// derived from its series solutions.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    /// Invalid geometry, propagated from [`GeometryError`].
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    /// Least-squares system too ill-conditioned to trust.
    #[error("collocation system condition number {cond:.3e} exceeds {max:.3e}")]
    IllConditioned {
        /// Estimated condition number.
        cond: f64,
        /// Configured ceiling.
        max: f64,
    },
    /// Boundary misfit of the series solution above tolerance.
    #[error("boundary residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    ResidualTooLarge {
        /// Max-norm boundary misfit.
        residual: f64,
        /// Configured tolerance.
        tol: f64,
    },
    /// A harmonic combination expected to be period-free has a residual
    /// conjugate period.
    #[error("conjugate period residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    PeriodResidual {
        /// Largest surviving log coefficient.
        residual: f64,
        /// Configured tolerance.
        tol: f64,
    },
    /// An evaluation point is outside the closed domain.
    #[error("point ({re}, {im}) outside the closed domain")]
    PointOutsideDomain {
        /// Real part of the point.
        re: f64,
        /// Imaginary part of the point.
        im: f64,
    },
    /// A bracketing interval for a 1-D root does not change sign.
    #[error("no sign change for root bracketing on [{a}, {b}]")]
    NoBracket {
        /// Left endpoint.
        a: f64,
        /// Right endpoint.
        b: f64,
    },
}

/// Failures in construction of scalar or matrix inner functions.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum InnerError {
    /// Propagated solver failure.
    #[error(transparent)]
    Solve(#[from] SolveError),
    /// The weight vector for the measure has a non-positive entry.
    #[error("weight vector not strictly positive: ({0}, {1}, {2})")]
    NonPositiveWeights(f64, f64, f64),
    /// Boundary modulus (or unitarity) check failed.
    #[error("boundary modulus residual {residual:.3e} exceeds {tol:.3e}")]
    NotInner {
        /// Max deviation of |φ| from 1 (or of ΨΨ* from I) on the boundary grid.
        residual: f64,
        /// Tolerance.
        tol: f64,
    },
    /// Zero finding found the wrong number of zeros.
    #[error("expected {expected} zeros, found {found}")]
    WrongZeroCount {
        /// Expected count (with multiplicity).
        expected: usize,
        /// Count actually found.
        found: usize,
    },
    /// Scan for a parameter with nonreal, well-separated zeros failed.
    #[error("no scanned parameter produced nonreal separated zeros")]
    ScanExhausted,
    /// No admissible η passed the zero-set checks.
    #[error("no η in the scan grid produced an admissible zero configuration")]
    NoAdmissibleEta,
    /// The Cayley transform denominator was numerically singular.
    #[error("Cayley denominator ill-conditioned: |(G+I)^-1| = {norm:.3e}")]
    CayleySingular {
        /// Norm of the inverse at the failing point.
        norm: f64,
    },
}

/// Failures of the theta-function and Abel–Jacobi layer.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ThetaError {
    /// Propagated solver failure.
    #[error(transparent)]
    Solve(#[from] SolveError),
    /// Period matrix failed symmetry or positive-definiteness checks.
    #[error("period matrix not symmetric positive definite (symmetry {asym:.3e}, min eig {min_eig:.3e})")]
    BadPeriodMatrix {
        /// Asymmetry |P12 - P21|.
        asym: f64,
        /// Smallest eigenvalue.
        min_eig: f64,
    },
    /// An integration path leaves the sheet it is declared on.
    #[error("path leaves the closed domain at segment {segment}")]
    PathInvalid {
        /// Index of the offending segment.
        segment: usize,
    },
    /// No odd half-period satisfied the vanishing and non-degeneracy probes.
    #[error("no admissible odd half-period found")]
    NoOddHalfPeriod,
}

/// Failures in the reproducing-kernel (Fay form and Gram form) layer.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    /// Propagated theta-layer failure.
    #[error(transparent)]
    Theta(#[from] ThetaError),
    /// Propagated solver failure.
    #[error(transparent)]
    Solve(#[from] SolveError),
    /// The Jacobian-parameter fit did not reach its tolerance.
    #[error("kernel parameter fit residual {residual:.3e} exceeds {tol:.3e}")]
    FitFailed {
        /// Final mean-square mismatch on the probe grid.
        residual: f64,
        /// Tolerance.
        tol: f64,
    },
    /// A residue contour passes too close to another pole.
    #[error("pole collision: distance {dist:.3e} below contour radius {radius:.3e}")]
    PoleCollision {
        /// Distance between the pole and the nearest other singularity.
        dist: f64,
        /// Contour radius.
        radius: f64,
    },
    /// Gram matrix for the orthonormal basis was numerically singular.
    #[error("Gram matrix numerically singular: pivot {pivot:.3e}")]
    GramSingular {
        /// Size of the failing pivot.
        pivot: f64,
    },
}

/// Failures of the cone-feasibility and realization layer.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConeError {
    /// Propagated inner-function failure.
    #[error(transparent)]
    Inner(#[from] InnerError),
    /// Propagated solver failure.
    #[error(transparent)]
    Solve(#[from] SolveError),
    /// The iteration finished without either a primal or a dual certificate.
    #[error("feasibility undecided after {iters} iterations: primal residual {primal:.3e}, dual margin {dual:.3e}")]
    Undecided {
        /// Iterations used.
        iters: usize,
        /// Final affine residual of the PSD iterate.
        primal: f64,
        /// Final (normalized) dual margin.
        dual: f64,
    },
    /// A certificate failed its inflated re-check.
    #[error("certificate failed re-check: {what}")]
    CertificateInvalid {
        /// Human-readable description of the failing check.
        what: String,
    },
    /// Realization data inconsistent (Gram mismatch too large to build an
    /// isometry).
    #[error("lurking-isometry Gram mismatch {mismatch:.3e} exceeds {tol:.3e}")]
    GramMismatch {
        /// Frobenius mismatch between the two Gram matrices.
        mismatch: f64,
        /// Tolerance.
        tol: f64,
    },
}
