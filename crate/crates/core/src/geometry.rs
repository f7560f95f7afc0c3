//! Geometry of a triply connected circular domain and its Schottky double.
//!
//! The domain is
//!
//! ```text
//!   R = { |z| < 1 }  \  ( closure D(c1, r1)  ∪  closure D(c2, r2) )
//! ```
//!
//! with both hole centers on the real axis, `c1 ∈ (-1, 0)` and `c2 ∈ (0, 1)`.
//! The boundary has three components: the unit circle `B0` and the two hole
//! circles `B1`, `B2`.  Because the centers are real, the domain is invariant
//! under complex conjugation, which is the anticonformal involution used
//! throughout the crate.
//!
//! The Schottky double `Y` of `R` is the genus-2 surface obtained by gluing a
//! mirror copy of `R` (the *back sheet*) to `R` along `B`.  A point of `Y` is
//! represented by a base point of the closed domain together with a sheet tag;
//! the gluing identifies the two copies of every boundary point.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::GeometryError;

/// Tolerance for validating geometric constraints on a [`DomainSpec`].
pub const EPS_GEO: f64 = 1e-12;

/// Index of a boundary circle: 0 is the unit circle, 1 and 2 are the holes.
pub type CircleIndex = usize;

/// A circle in the plane, given by center and radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circle {
    /// Center of the circle.
    pub center: Complex64,
    /// Radius of the circle (positive).
    pub radius: f64,
}

impl Circle {
    /// Point at angle `theta` on the circle.
    pub fn point(&self, theta: f64) -> Complex64 {
        self.center + Complex64::from_polar(self.radius, theta)
    }

    /// Signed distance of `z` from the circle (negative inside the disk).
    pub fn signed_distance(&self, z: Complex64) -> f64 {
        (z - self.center).norm() - self.radius
    }

    /// Reflection (inversion) of `z` in the circle.
    pub fn reflect(&self, z: Complex64) -> Complex64 {
        self.center + self.radius * self.radius / (z - self.center).conj()
    }

    /// Does the closed segment `[a, b]` intersect the open disk bounded by
    /// this circle?
    pub fn segment_hits_disk(&self, a: Complex64, b: Complex64) -> bool {
        let d = b - a;
        let len2 = d.norm_sqr();
        let t = if len2 == 0.0 {
            0.0
        } else {
            (((self.center - a).re * d.re + (self.center - a).im * d.im) / len2).clamp(0.0, 1.0)
        };
        let nearest = a + t * d;
        (nearest - self.center).norm() < self.radius
    }
}

/// Parameters of the triply connected circular domain.
///
/// Invariants (checked by [`DomainSpec::validate`]):
/// * `-1 < c1 < 0 < c2 < 1`,
/// * `0 < r_k < min(|c_k|, 1 - |c_k|)` for `k = 1, 2`, so each hole stays
///   inside the unit disk, away from the origin,
/// * the two closed holes are disjoint.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct DomainSpec {
    /// Center of the left hole (real, negative).
    pub c1: f64,
    /// Radius of the left hole.
    pub r1: f64,
    /// Center of the right hole (real, positive).
    pub c2: f64,
    /// Radius of the right hole.
    pub r2: f64,
}

impl Default for DomainSpec {
    /// A well-separated benchmark domain used by the test-suite and the CLI
    /// when no configuration is given.
    fn default() -> Self {
        DomainSpec {
            c1: -0.4,
            r1: 0.15,
            c2: 0.45,
            r2: 0.15,
        }
    }
}

impl DomainSpec {
    /// Check all geometric invariants, returning a descriptive error for the
    /// first violated one.
    pub fn validate(&self) -> Result<(), GeometryError> {
        let DomainSpec { c1, r1, c2, r2 } = *self;
        if !(-1.0 + EPS_GEO < c1 && c1 < -EPS_GEO) {
            return Err(GeometryError::CenterOutOfRange {
                which: 1,
                value: c1,
            });
        }
        if !(EPS_GEO < c2 && c2 < 1.0 - EPS_GEO) {
            return Err(GeometryError::CenterOutOfRange {
                which: 2,
                value: c2,
            });
        }
        for (which, c, r) in [(1usize, c1, r1), (2, c2, r2)] {
            let bound = c.abs().min(1.0 - c.abs());
            if !(r > EPS_GEO && r < bound - EPS_GEO) {
                return Err(GeometryError::RadiusOutOfRange {
                    which,
                    value: r,
                    bound,
                });
            }
        }
        let gap = (c2 - c1) - (r1 + r2);
        if gap <= EPS_GEO {
            return Err(GeometryError::HolesOverlap { gap });
        }
        Ok(())
    }

    /// The three boundary circles `[B0, B1, B2]`.
    pub fn circles(&self) -> [Circle; 3] {
        [
            Circle {
                center: Complex64::new(0.0, 0.0),
                radius: 1.0,
            },
            Circle {
                center: Complex64::new(self.c1, 0.0),
                radius: self.r1,
            },
            Circle {
                center: Complex64::new(self.c2, 0.0),
                radius: self.r2,
            },
        ]
    }

    /// Center of hole `k` (`k = 1, 2`) as a complex number.
    pub fn hole_center(&self, k: usize) -> Complex64 {
        match k {
            1 => Complex64::new(self.c1, 0.0),
            2 => Complex64::new(self.c2, 0.0),
            _ => panic!("hole index must be 1 or 2"),
        }
    }

    /// Total (unnormalized) boundary length `2π (1 + r1 + r2)`.
    pub fn boundary_length(&self) -> f64 {
        2.0 * std::f64::consts::PI * (1.0 + self.r1 + self.r2)
    }

    /// Is `z` in the open domain `R`, with a safety margin `tol ≥ 0`
    /// (points within `tol` of the boundary are rejected)?
    pub fn contains(&self, z: Complex64, tol: f64) -> bool {
        let [b0, b1, b2] = self.circles();
        b0.signed_distance(z) < -tol
            && b1.signed_distance(z) > tol
            && b2.signed_distance(z) > tol
    }

    /// Distance from `z` to the boundary `B` (meaningful for `z ∈ R`).
    pub fn boundary_distance(&self, z: Complex64) -> f64 {
        let [b0, b1, b2] = self.circles();
        (-b0.signed_distance(z))
            .min(b1.signed_distance(z))
            .min(b2.signed_distance(z))
    }

    /// Index of the boundary circle nearest to `z`.
    pub fn nearest_circle(&self, z: Complex64) -> CircleIndex {
        let [b0, b1, b2] = self.circles();
        let d = [
            b0.signed_distance(z).abs(),
            b1.signed_distance(z).abs(),
            b2.signed_distance(z).abs(),
        ];
        (0..3).min_by(|&i, &j| d[i].partial_cmp(&d[j]).unwrap()).unwrap()
    }

    /// Outward unit normal of `R` at the boundary point `q` on circle `idx`
    /// (outward means *leaving* the domain: radially out on `B0`, toward the
    /// hole center on `B1`, `B2`).
    pub fn outward_normal(&self, idx: CircleIndex, q: Complex64) -> Complex64 {
        let c = self.circles()[idx];
        let u = (q - c.center) / (q - c.center).norm();
        if idx == 0 {
            u
        } else {
            -u
        }
    }

    /// The four real points where the conjugation involution meets the hole
    /// circles plus the two on the unit circle: `±1, c_k ± r_k`.  These are
    /// the branch (Weierstrass) points of the double in the sense that they
    /// are the fixed points of conjugation on `B`.
    pub fn real_boundary_points(&self) -> [f64; 6] {
        [
            -1.0,
            1.0,
            self.c1 - self.r1,
            self.c1 + self.r1,
            self.c2 - self.r2,
            self.c2 + self.r2,
        ]
    }
}

/// Sheet tag for a point of the Schottky double.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sheet {
    /// The original copy of the domain.
    Front,
    /// The mirror copy.
    Back,
}

/// A point of the Schottky double: a base point of the closed domain plus a
/// sheet tag.  Boundary base points represent the same point of the double
/// regardless of the tag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoublePoint {
    /// Base point in the closure of `R`.
    pub base: Complex64,
    /// Which copy of the domain the point lives on.
    pub sheet: Sheet,
}

impl DoublePoint {
    /// A point on the front sheet.
    pub fn front(base: Complex64) -> Self {
        DoublePoint {
            base,
            sheet: Sheet::Front,
        }
    }

    /// A point on the back sheet.
    pub fn back(base: Complex64) -> Self {
        DoublePoint {
            base,
            sheet: Sheet::Back,
        }
    }

    /// The anticonformal involution `J` of the double: swap sheets.
    pub fn involution(self) -> Self {
        DoublePoint {
            base: self.base,
            sheet: match self.sheet {
                Sheet::Front => Sheet::Back,
                Sheet::Back => Sheet::Front,
            },
        }
    }
}

/// A boundary point, remembered together with the circle it lies on (which
/// avoids re-deriving the circle from coordinates and keeps normal vectors
/// unambiguous near tangencies).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    /// Index of the circle the point lies on.
    pub circle: CircleIndex,
    /// Angle parameter: the point is `center + radius · exp(iθ)`.
    pub theta: f64,
}

impl BoundaryPoint {
    /// Cartesian position of the point for the given domain.
    pub fn position(&self, spec: &DomainSpec) -> Complex64 {
        spec.circles()[self.circle].point(self.theta)
    }

    /// Outward unit normal of the domain at this point.
    pub fn outward_normal(&self, spec: &DomainSpec) -> Complex64 {
        spec.outward_normal(self.circle, self.position(spec))
    }
}
