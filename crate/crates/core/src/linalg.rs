//! Small dense complex linear-algebra helpers shared by the kernel, matrix
//! inner function, and cone-feasibility modules.
//!
//! Everything here wraps nalgebra's dense decompositions for
//! `DMatrix<Complex64>`: Hermitian symmetrization, eigenvalue bounds,
//! positive-semidefinite projection (the building block of the alternating
//! projection feasibility solver), and unitary completion by polar
//! factorization (the "Procrustes" step of the lurking-isometry argument).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Hermitian part `(M + M*)/2`.
pub fn hermitize(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Eigenvalues (ascending) and eigenvectors of a Hermitian matrix.
pub fn hermitian_eigen(m: &DMatrix<Complex64>) -> (DVector<f64>, DMatrix<Complex64>) {
    let se = hermitize(m).symmetric_eigen();
    let n = se.eigenvalues.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| se.eigenvalues[i].partial_cmp(&se.eigenvalues[j]).unwrap());
    let vals = DVector::from_iterator(n, idx.iter().map(|&i| se.eigenvalues[i]));
    let mut vecs = DMatrix::zeros(n, n);
    for (col, &i) in idx.iter().enumerate() {
        vecs.set_column(col, &se.eigenvectors.column(i));
    }
    (vals, vecs)
}

/// Smallest eigenvalue of the Hermitian part.
pub fn min_eigenvalue(m: &DMatrix<Complex64>) -> f64 {
    hermitize(m).symmetric_eigen().eigenvalues.min()
}

/// Nearest (Frobenius) positive semidefinite matrix to a Hermitian matrix:
/// clip negative eigenvalues to zero.
pub fn psd_project(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let se = hermitize(m).symmetric_eigen();
    let n = se.eigenvalues.len();
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        let l = se.eigenvalues[i];
        if l > 0.0 {
            let v = se.eigenvectors.column(i);
            out += (&v * v.adjoint()) * Complex64::new(l, 0.0);
        }
    }
    out
}

/// Hermitian square root factor `L` with `M = L L*` (PSD input; negative
/// eigenvalues are clipped).
pub fn psd_factor(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let se = hermitize(m).symmetric_eigen();
    let n = se.eigenvalues.len();
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        let l = se.eigenvalues[i].max(0.0).sqrt();
        out.set_column(i, &(se.eigenvectors.column(i) * Complex64::new(l, 0.0)));
    }
    out
}

/// Frobenius inner product `tr(B* A)` (real part is the Euclidean pairing).
pub fn frob_inner(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> Complex64 {
    let mut s = Complex64::new(0.0, 0.0);
    for (x, y) in a.iter().zip(b.iter()) {
        s += y.conj() * x;
    }
    s
}

/// Unitary factor of the polar decomposition `M = U H` via full SVD
/// (`U = U_svd V_svd*`); this is the unitary nearest to `M` and is the
/// matrix solving the orthogonal Procrustes problem.
pub fn polar_unitary(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let svd = m.clone().svd(true, true);
    let u = svd.u.unwrap();
    let vt = svd.v_t.unwrap();
    // Pad to square if the SVD is economy-size (nalgebra returns thin
    // factors; polar completion needs any unitary extension).
    let (r, c) = m.shape();
    assert_eq!(r, c, "polar_unitary expects a square matrix");
    &u * vt
}

/// Singular values of a complex matrix, descending.
pub fn singular_values(m: &DMatrix<Complex64>) -> Vec<f64> {
    let mut sv: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    sv
}

/// Numerical rank with a relative threshold on singular values.
pub fn numerical_rank(m: &DMatrix<Complex64>, rel_tol: f64) -> usize {
    let sv = singular_values(m);
    let top = sv.first().copied().unwrap_or(0.0);
    sv.iter().filter(|&&s| s > rel_tol * top).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> DMatrix<Complex64> {
        DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(2.0, 0.0),
                Complex64::new(0.3, 0.4),
                Complex64::new(0.3, -0.4),
                Complex64::new(-1.0, 0.0),
            ],
        )
    }

    #[test]
    fn psd_projection_is_psd_and_close() {
        let m = sample();
        let p = psd_project(&m);
        assert!(min_eigenvalue(&p) >= -1e-12);
        // Projection of a PSD matrix is itself.
        let q = psd_project(&p);
        assert!((&p - &q).norm() < 1e-12);
    }

    #[test]
    fn factor_reconstructs() {
        let p = psd_project(&sample());
        let l = psd_factor(&p);
        assert!((&l * l.adjoint() - &p).norm() < 1e-12);
    }

    #[test]
    fn polar_gives_nearest_unitary() {
        let m = sample();
        let u = polar_unitary(&m);
        assert!((&u * u.adjoint() - DMatrix::identity(2, 2)).norm() < 1e-12);
    }

    #[test]
    fn eigen_sorted() {
        let (vals, vecs) = hermitian_eigen(&sample());
        assert!(vals[0] <= vals[1]);
        let m = hermitize(&sample());
        let r = &m * vecs.column(0) - vecs.column(0) * Complex64::new(vals[0], 0.0);
        assert!(r.norm() < 1e-12);
    }
}
