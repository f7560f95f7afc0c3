//! One-dimensional bracketed root finding and argument-principle zero
//! location for analytic functions on the triply connected domain.
//!
//! Zeros inside the domain are counted by the winding number of `f` along a
//! *collar contour*: the unit circle shrunk inward by a small offset, minus
//! the two hole circles inflated outward by the same offset.  Individual
//! zeros are then isolated by recursive rectangle subdivision (each
//! rectangle's winding number is computed by adaptive argument tracking along
//! its edges) and polished by Newton iteration.
//!
//! Argument tracking subdivides a contour parameter interval until the change
//! of `arg f` across each piece is below `π/2`, which makes the total a true
//! winding number as long as `f` has no zero *on* the contour; rectangle
//! splits use an irrational-looking fraction to make edge hits unlikely.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::SolveError;
use crate::geometry::DomainSpec;

/// Classic Brent root finder on a bracketing interval.
pub fn brent(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64, SolveError> {
    let (mut a, mut b) = (a, b);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa * fb > 0.0 {
        return Err(SolveError::NoBracket { a, b });
    }
    if fa.abs() < fb.abs() {
        std::mem::swap(&mut a, &mut b);
        std::mem::swap(&mut fa, &mut fb);
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut mflag = true;
    for _ in 0..200 {
        if fb == 0.0 || (b - a).abs() < tol {
            return Ok(b);
        }
        let mut s = if fa != fc && fb != fc {
            // Inverse quadratic interpolation.
            a * fb * fc / ((fa - fb) * (fa - fc))
                + b * fa * fc / ((fb - fa) * (fb - fc))
                + c * fa * fb / ((fc - fa) * (fc - fb))
        } else {
            b - fb * (b - a) / (fb - fa)
        };
        let lo = (3.0 * a + b) / 4.0;
        let cond = !((lo.min(b) < s && s < lo.max(b))
            && if mflag {
                (s - b).abs() < (b - c).abs() / 2.0
            } else {
                (s - b).abs() < (c - d).abs() / 2.0
            });
        if cond {
            s = (a + b) / 2.0;
            mflag = true;
        } else {
            mflag = false;
        }
        let fs = f(s);
        d = c;
        c = b;
        fc = fb;
        if fa * fs < 0.0 {
            b = s;
            fb = fs;
        } else {
            a = s;
            fa = fs;
        }
        if fa.abs() < fb.abs() {
            std::mem::swap(&mut a, &mut b);
            std::mem::swap(&mut fa, &mut fb);
        }
    }
    Ok(b)
}

/// Winding number of `t ↦ f(path(t))` for a closed path over `t ∈ [0, 1]`,
/// by adaptive argument tracking.  Returns `None` if the tracking cannot
/// resolve the argument (zero on or extremely near the contour).
pub fn winding_number(
    f: &dyn Fn(Complex64) -> Complex64,
    path: &dyn Fn(f64) -> Complex64,
) -> Option<i64> {
    // Piece stack: (t0, t1, f(t0), f(t1)).
    let n0 = 64;
    let mut total = 0.0f64;
    let mut stack: Vec<(f64, f64, Complex64, Complex64, u32)> = Vec::new();
    let mut prev = f(path(0.0));
    for i in 0..n0 {
        let t1 = (i as f64 + 1.0) / n0 as f64;
        let v1 = f(path(t1));
        stack.push((i as f64 / n0 as f64, t1, prev, v1, 0));
        prev = v1;
    }
    while let Some((t0, t1, v0, v1, depth)) = stack.pop() {
        if v0.norm() == 0.0 || v1.norm() == 0.0 {
            return None;
        }
        let dphi = (v1 / v0).arg();
        // Accept a piece only when the phase step is unambiguous.
        if dphi.abs() < PI / 2.0 && depth >= 2 {
            total += dphi;
        } else {
            if depth > 48 {
                return None;
            }
            let tm = 0.5 * (t0 + t1);
            let vm = f(path(tm));
            stack.push((t0, tm, v0, vm, depth + 1));
            stack.push((tm, t1, vm, v1, depth + 1));
        }
    }
    let w = total / (2.0 * PI);
    let wi = w.round();
    if (w - wi).abs() > 0.25 {
        return None;
    }
    Some(wi as i64)
}

/// Winding of `f` along the collar contour of the domain at inward offset
/// `offset`: total number of zeros of `f` in the collar-trimmed domain.
pub fn collar_winding(
    spec: &DomainSpec,
    f: &dyn Fn(Complex64) -> Complex64,
    offset: f64,
) -> Option<i64> {
    let [b0, b1, b2] = spec.circles();
    let outer = move |t: f64| {
        b0.center + Complex64::from_polar(b0.radius - offset, 2.0 * PI * t)
    };
    let hole1 = move |t: f64| {
        b1.center + Complex64::from_polar(b1.radius + offset, 2.0 * PI * t)
    };
    let hole2 = move |t: f64| {
        b2.center + Complex64::from_polar(b2.radius + offset, 2.0 * PI * t)
    };
    let w0 = winding_number(f, &outer)?;
    let w1 = winding_number(f, &hole1)?;
    let w2 = winding_number(f, &hole2)?;
    Some(w0 - w1 - w2)
}

/// A located zero of an analytic function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Zero {
    /// Position of the zero.
    pub z: Complex64,
    /// Multiplicity (from the winding of a tight enclosing rectangle).
    pub multiplicity: usize,
}

fn rect_path(x0: f64, x1: f64, y0: f64, y1: f64) -> impl Fn(f64) -> Complex64 {
    move |t: f64| {
        let s = t * 4.0;
        if s < 1.0 {
            Complex64::new(x0 + (x1 - x0) * s, y0)
        } else if s < 2.0 {
            Complex64::new(x1, y0 + (y1 - y0) * (s - 1.0))
        } else if s < 3.0 {
            Complex64::new(x1 - (x1 - x0) * (s - 2.0), y1)
        } else {
            Complex64::new(x0, y1 - (y1 - y0) * (s - 3.0))
        }
    }
}

/// Newton polish of a simple zero; falls back to the seed on divergence.
pub fn newton_polish(
    f: &dyn Fn(Complex64) -> (Complex64, Complex64),
    seed: Complex64,
    tol: f64,
) -> Complex64 {
    let mut z = seed;
    for _ in 0..60 {
        let (v, d) = f(z);
        if d.norm() == 0.0 {
            break;
        }
        let step = v / d;
        z -= step;
        if step.norm() < tol {
            break;
        }
        if (z - seed).norm() > 0.5 {
            return seed; // diverging away from the isolating box
        }
    }
    z
}

/// Find all zeros of `f` in the open domain (at collar offset `offset`),
/// given a value-and-derivative evaluator.  The total count is certified
/// against the collar winding number.
pub fn zeros_in_domain(
    spec: &DomainSpec,
    f: &dyn Fn(Complex64) -> (Complex64, Complex64),
    offset: f64,
) -> Result<Vec<Zero>, SolveError> {
    let val = |z: Complex64| f(z).0;
    let expected = collar_winding(spec, &val, offset).ok_or(SolveError::NoBracket {
        a: 0.0,
        b: 0.0,
    })?;
    if expected < 0 {
        return Err(SolveError::NoBracket { a: 0.0, b: 0.0 });
    }

    // Recursive rectangle subdivision over the bounding square.
    //
    // The evaluators in this crate are finite series: they extend
    // analytically past `B`, but the *continuation* may have both zeros and
    // poles inside the holes and outside the unit disk.  Winding numbers are
    // therefore trusted only on rectangles that lie entirely inside the
    // collar-trimmed domain (where the target function is analytic);
    // straddling rectangles are split unconditionally until they either fall
    // into the trusted region, fall out of the domain, or shrink below the
    // resolution scale (zeros that close to `B` are outside the contract of
    // this routine anyway).
    let mut found: Vec<Zero> = Vec::new();
    let mut stack = vec![(-1.0f64, 1.0f64, -1.0f64, 1.0f64)];
    let split = 0.513_712_398; // irrational-ish fraction: avoid zeros on cuts
    while let Some((x0, x1, y0, y1)) = stack.pop() {
        let corners = [
            Complex64::new(x0, y0),
            Complex64::new(x1, y0),
            Complex64::new(x0, y1),
            Complex64::new(x1, y1),
        ];
        // Reject: rectangle entirely outside the collar-trimmed domain.
        let hole_reject = spec.circles()[1..].iter().any(|c| {
            corners
                .iter()
                .all(|&z| (z - c.center).norm() < c.radius + offset)
        });
        let outer_reject = {
            let nearest = Complex64::new(0.0f64.clamp(x0, x1), 0.0f64.clamp(y0, y1));
            nearest.norm() > 1.0 - offset
        };
        if hole_reject || outer_reject {
            continue;
        }
        // Is the rectangle entirely inside the trusted (collar-trimmed)
        // region?  Nearest box point to each hole center must clear the
        // inflated hole; farthest corner must stay in the deflated disk.
        let trusted = spec.circles()[1..].iter().all(|c| {
            let nearest = Complex64::new(
                c.center.re.clamp(x0, x1),
                c.center.im.clamp(y0, y1),
            );
            (nearest - c.center).norm() >= c.radius + offset
        }) && corners.iter().all(|&z| z.norm() <= 1.0 - offset);

        let (dx, dy) = (x1 - x0, y1 - y0);
        let tiny = dx.max(dy) < 1e-5;
        let subdivide = |stack: &mut Vec<(f64, f64, f64, f64)>| {
            if dx >= dy {
                let xm = x0 + dx * split;
                stack.push((x0, xm, y0, y1));
                stack.push((xm, x1, y0, y1));
            } else {
                let ym = y0 + dy * split;
                stack.push((x0, x1, y0, ym));
                stack.push((x0, x1, ym, y1));
            }
        };
        if !trusted && tiny {
            // A straddling box at resolution scale: any zero this close to
            // `B` is outside the contract; the final count check against the
            // collar winding still guards against silently dropping one.
            continue;
        }
        let path = rect_path(x0, x1, y0, y1);
        let w = match winding_number(&val, &path) {
            Some(w) => w,
            // A zero sits (numerically) on an edge; nudge the rectangle.
            None => {
                let d = (x1 - x0).max(y1 - y0) * 1e-3;
                let path = rect_path(x0 - d, x1 + d, y0 - d, y1 + d);
                winding_number(&val, &path).ok_or(SolveError::NoBracket { a: x0, b: x1 })?
            }
        };
        if w == 0 && (trusted || dx.max(dy) < 0.02) {
            // Trusted region: no zeros.  Small straddling box: a canceling
            // zero/pole pair of the continued series within one 0.02-box is
            // the only way to lose a zero here, and the final count check
            // would flag it.
            continue;
        }
        if trusted && w < 0 {
            continue;
        }
        if tiny {
            let center = Complex64::new(0.5 * (x0 + x1), 0.5 * (y0 + y1));
            let z = if w == 1 {
                newton_polish(f, center, 1e-13)
            } else {
                center
            };
            found.push(Zero {
                z,
                multiplicity: w as usize,
            });
            continue;
        }
        subdivide(&mut stack);
    }

    // Keep only zeros inside the domain and merge duplicates produced by
    // zeros near a split line.
    let mut zeros: Vec<Zero> = Vec::new();
    for z in found {
        if !spec.contains(z.z, offset * 0.5) {
            continue;
        }
        if let Some(prev) = zeros.iter_mut().find(|p| (p.z - z.z).norm() < 1e-8) {
            // Same zero found twice through different boxes.
            prev.multiplicity = prev.multiplicity.max(z.multiplicity);
        } else {
            zeros.push(z);
        }
    }
    let count: usize = zeros.iter().map(|z| z.multiplicity).sum();
    if count != expected as usize {
        return Err(SolveError::NoBracket {
            a: expected as f64,
            b: count as f64,
        });
    }
    zeros.sort_by(|a, b| {
        (a.z.re, a.z.im)
            .partial_cmp(&(b.z.re, b.z.im))
            .unwrap()
    });
    Ok(zeros)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brent_finds_cosine_root() {
        let r = brent(|x| x.cos(), 1.0, 2.0, 1e-14).unwrap();
        assert!((r - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn winding_counts_polynomial_zeros() {
        let f = |z: Complex64| (z - Complex64::new(0.1, 0.2)) * (z + Complex64::new(0.7, 0.0));
        let path = |t: f64| Complex64::from_polar(0.9, 2.0 * PI * t);
        assert_eq!(winding_number(&f, &path), Some(2));
        let path_small = |t: f64| Complex64::from_polar(0.3, 2.0 * PI * t);
        assert_eq!(winding_number(&f, &path_small), Some(1));
    }

    #[test]
    fn locates_zeros_of_polynomial_in_domain() {
        let spec = DomainSpec::default();
        let a = Complex64::new(0.1, 0.45);
        let b = Complex64::new(-0.72, -0.1);
        let f = move |z: Complex64| {
            (
                (z - a) * (z - b) * (z - 5.0), // extra zero far outside
                (z - b) * (z - 5.0) + (z - a) * (z - 5.0) + (z - a) * (z - b),
            )
        };
        let zeros = zeros_in_domain(&spec, &f, 1e-3).unwrap();
        assert_eq!(zeros.len(), 2);
        assert!(zeros.iter().any(|z| (z.z - a).norm() < 1e-11));
        assert!(zeros.iter().any(|z| (z.z - b).norm() < 1e-11));
    }

    #[test]
    fn reports_multiplicity_of_double_zero() {
        let spec = DomainSpec::default();
        let a = Complex64::new(0.05, 0.5);
        let f = move |z: Complex64| ((z - a) * (z - a), 2.0 * (z - a));
        let zeros = zeros_in_domain(&spec, &f, 1e-3).unwrap();
        assert_eq!(zeros.len(), 1);
        assert_eq!(zeros[0].multiplicity, 2);
        assert!((zeros[0].z - a).norm() < 1e-4);
    }
}
