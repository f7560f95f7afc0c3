use nalgebra::DMatrix;
use num_complex::Complex64;
use std::time::Instant;
use triconn::linalg;

fn main() {
    let n = 18;
    let a = DMatrix::from_fn(n, n, |i, j| Complex64::new((i * 7 + j * 3) as f64 % 5.0 - 2.0, (i as f64 - j as f64) * 0.3));
    let h = linalg::hermitize(&a);
    let t0 = Instant::now();
    let reps = 10000;
    let mut acc = 0.0;
    for _ in 0..reps {
        let p = linalg::psd_project(&h);
        acc += p[(0, 0)].re;
    }
    println!("psd_project 18x18: {:.2?}/call (acc {acc:.1})", t0.elapsed() / reps);
    let t1 = Instant::now();
    for _ in 0..reps {
        let e = linalg::min_eigenvalue(&h);
        acc += e;
    }
    println!("min_eig 18x18: {:.2?}/call", t1.elapsed() / reps);
}
