//! Eigenvalue computations: general complex spectra by shifted Hessenberg QR
//! and Hermitian eigenvalues by cyclic Jacobi.
//!
//! The general path is eigenvalues-only. Each deflation window is updated in
//! place; blocks coupling a window to the rest of the matrix are left stale,
//! which preserves the eigenvalue multiset because negligible subdiagonals
//! keep the matrix block triangular.

use num_complex::Complex64;

use crate::error::{CoreError, Result};
use crate::matrix::ComplexMatrix;

/// Relative threshold below which a subdiagonal entry deflates.
const DEFLATE: f64 = 1e-16;

/// All eigenvalues of a square complex matrix, sorted lexicographically by
/// (real, imaginary) part.
pub fn spectrum(a: &ComplexMatrix) -> Result<Vec<Complex64>> {
    a.ensure_square()?;
    a.ensure_finite()?;
    let n = a.rows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut h = hessenberg(a);
    let mut eigs = vec![Complex64::new(0.0, 0.0); n];
    let mut hi = n - 1;
    let mut iters_since_deflate = 0usize;
    let mut total_iters = 0usize;
    let budget = 100 * n + 200;

    loop {
        if hi == 0 {
            eigs[0] = h[(0, 0)];
            break;
        }
        let sub = h[(hi, hi - 1)].norm();
        if sub <= DEFLATE * (h[(hi - 1, hi - 1)].norm() + h[(hi, hi)].norm()) {
            eigs[hi] = h[(hi, hi)];
            hi -= 1;
            iters_since_deflate = 0;
            continue;
        }

        total_iters += 1;
        if total_iters > budget {
            return Err(CoreError::EigenNoConvergence { n });
        }

        let mut lo = hi;
        while lo > 0 {
            let s = h[(lo, lo - 1)].norm();
            if s <= DEFLATE * (h[(lo - 1, lo - 1)].norm() + h[(lo, lo)].norm()) {
                h[(lo, lo - 1)] = Complex64::new(0.0, 0.0);
                break;
            }
            lo -= 1;
        }

        iters_since_deflate += 1;
        let mu = if iters_since_deflate.is_multiple_of(30) {
            // Exceptional shift to break symmetric stagnation cycles.
            let kick = h[(hi, hi - 1)].norm()
                + if hi >= 2 {
                    h[(hi - 1, hi - 2)].norm()
                } else {
                    0.0
                };
            h[(hi, hi)] + Complex64::new(kick, 0.0)
        } else {
            wilkinson_shift(
                h[(hi - 1, hi - 1)],
                h[(hi - 1, hi)],
                h[(hi, hi - 1)],
                h[(hi, hi)],
            )
        };
        qr_step(&mut h, lo, hi, mu);
    }

    eigs.sort_by(|x, y| {
        (x.re, x.im)
            .partial_cmp(&(y.re, y.im))
            .expect("eigenvalues are finite")
    });
    Ok(eigs)
}

/// Eigenvalues of a Hermitian matrix, ascending. The input is symmetrized
/// first, so tiny asymmetry from upstream arithmetic is harmless; genuinely
/// non-Hermitian inputs should be rejected earlier via a certificate.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>> {
    m.ensure_square()?;
    m.ensure_finite()?;
    let n = m.rows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut a = m.hermitian_part();
    let scale = 1.0 + a.frobenius_norm();
    const MAX_SWEEPS: usize = 64;

    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() <= 1e-14 * scale {
            let mut eigs: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
            eigs.sort_by(|x, y| x.partial_cmp(y).expect("eigenvalues are finite"));
            return Ok(eigs);
        }

        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let g = apq.norm();
                if g < 1e-300 {
                    continue;
                }
                let phase = apq / g;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let tau = (aqq - app) / (2.0 * g);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                for i in 0..n {
                    let colp = a[(i, p)];
                    let colq = a[(i, q)];
                    a[(i, p)] = colp * c - colq * phase.conj() * s;
                    a[(i, q)] = colp * phase * s + colq * c;
                }
                for j in 0..n {
                    let rowp = a[(p, j)];
                    let rowq = a[(q, j)];
                    a[(p, j)] = rowp * c - rowq * phase * s;
                    a[(q, j)] = rowp * phase.conj() * s + rowq * c;
                }
            }
        }
    }
    Err(CoreError::EigenNoConvergence { n })
}

/// Spectral condition estimate for a Hermitian matrix: max|eig| / min|eig|.
/// Returns infinity when the smallest eigenvalue magnitude underflows.
pub fn condition_estimate(m: &ComplexMatrix) -> Result<f64> {
    let eigs = hermitian_eigenvalues(m)?;
    if eigs.is_empty() {
        return Ok(1.0);
    }
    let max_abs = eigs.iter().map(|e| e.abs()).fold(0.0f64, f64::max);
    let min_abs = eigs.iter().map(|e| e.abs()).fold(f64::INFINITY, f64::min);
    if min_abs <= 1e-300 * (1.0 + max_abs) {
        return Ok(f64::INFINITY);
    }
    Ok(max_abs / min_abs)
}

fn hessenberg(a: &ComplexMatrix) -> ComplexMatrix {
    let n = a.rows();
    let mut h = a.clone();
    if n < 3 {
        return h;
    }
    for k in 0..(n - 2) {
        let mut tail_sq = 0.0f64;
        for i in (k + 2)..n {
            tail_sq += h[(i, k)].norm_sqr();
        }
        if tail_sq.sqrt() < 1e-300 {
            continue;
        }
        let x0 = h[(k + 1, k)];
        let col_norm = (x0.norm_sqr() + tail_sq).sqrt();
        let alpha = if x0.norm() > 0.0 {
            -(x0 / x0.norm()) * col_norm
        } else {
            Complex64::new(-col_norm, 0.0)
        };

        let mut v: Vec<Complex64> = ((k + 1)..n).map(|i| h[(i, k)]).collect();
        v[0] -= alpha;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm < 1e-300 {
            continue;
        }
        for z in v.iter_mut() {
            *z /= vnorm;
        }

        // Reflect rows k+1.. on the left: H -= 2 v (v* H).
        for j in k..n {
            let mut w = Complex64::new(0.0, 0.0);
            for (idx, i) in ((k + 1)..n).enumerate() {
                w += v[idx].conj() * h[(i, j)];
            }
            let w2 = w * 2.0;
            for (idx, i) in ((k + 1)..n).enumerate() {
                h[(i, j)] -= v[idx] * w2;
            }
        }
        // Reflect columns k+1.. on the right: H -= 2 (H v) v*.
        for i in 0..n {
            let mut w = Complex64::new(0.0, 0.0);
            for (idx, j) in ((k + 1)..n).enumerate() {
                w += h[(i, j)] * v[idx];
            }
            let w2 = w * 2.0;
            for (idx, j) in ((k + 1)..n).enumerate() {
                h[(i, j)] -= w2 * v[idx].conj();
            }
        }
        for i in (k + 2)..n {
            h[(i, k)] = Complex64::new(0.0, 0.0);
        }
    }
    h
}

/// Trailing 2x2 eigenvalue closest to the corner entry.
fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let tr = a + d;
    let det = a * d - b * c;
    let disc = (tr * tr * 0.25 - det).sqrt();
    let mu1 = tr * 0.5 + disc;
    let mu2 = tr * 0.5 - disc;
    if (mu1 - d).norm() <= (mu2 - d).norm() {
        mu1
    } else {
        mu2
    }
}

/// One explicit shifted QR sweep on the Hessenberg window `[lo, hi]`.
fn qr_step(h: &mut ComplexMatrix, lo: usize, hi: usize, mu: Complex64) {
    for k in lo..=hi {
        h[(k, k)] -= mu;
    }
    let mut rotations: Vec<(f64, Complex64)> = Vec::with_capacity(hi - lo);
    for k in lo..hi {
        let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
        for j in k..=hi {
            let x = h[(k, j)];
            let y = h[(k + 1, j)];
            h[(k, j)] = x * c + s * y;
            h[(k + 1, j)] = -s.conj() * x + y * c;
        }
        h[(k + 1, k)] = Complex64::new(0.0, 0.0);
        rotations.push((c, s));
    }
    for (idx, &(c, s)) in rotations.iter().enumerate() {
        let k = lo + idx;
        let imax = (k + 1).min(hi);
        for i in lo..=imax {
            let x = h[(i, k)];
            let y = h[(i, k + 1)];
            h[(i, k)] = x * c + s.conj() * y;
            h[(i, k + 1)] = -s * x + y * c;
        }
    }
    for k in lo..=hi {
        h[(k, k)] += mu;
    }
}

/// Unitary rotation [[c, s], [-conj(s), c]] with c real sending (x, y) to
/// (r, 0).
fn givens(x: Complex64, y: Complex64) -> (f64, Complex64) {
    let ax = x.norm();
    let ay = y.norm();
    if ay < 1e-300 {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    if ax < 1e-300 {
        return (0.0, y.conj() / ay);
    }
    let r = ax.hypot(ay);
    let c = ax / r;
    let s = (x / ax) * y.conj() / r;
    (c, s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::expm;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn assert_spectra_close(got: &[Complex64], want: &mut [Complex64], tol: f64) {
        want.sort_by(|x, y| (x.re, x.im).partial_cmp(&(y.re, y.im)).unwrap());
        assert_eq!(got.len(), want.len());
        for (g, w) in got.iter().zip(want.iter()) {
            assert!(
                (g - w).norm() < tol,
                "eigenvalue mismatch: got {g}, want {w}"
            );
        }
    }

    #[test]
    fn spectrum_of_diagonal() {
        let m = ComplexMatrix::diagonal(&[c(3.0, -1.0), c(1.0, 2.0)]);
        let eigs = spectrum(&m).unwrap();
        assert_spectra_close(&eigs, &mut [c(1.0, 2.0), c(3.0, -1.0)], 1e-14);
    }

    #[test]
    fn spectrum_of_jordan_block() {
        let m = ComplexMatrix::from_rows(vec![
            vec![c(0.0, 0.0), c(1.0, 0.0)],
            vec![c(0.0, 0.0), c(0.0, 0.0)],
        ])
        .unwrap();
        let eigs = spectrum(&m).unwrap();
        assert_spectra_close(&eigs, &mut [c(0.0, 0.0), c(0.0, 0.0)], 1e-7);
    }

    #[test]
    fn spectrum_of_swap() {
        let m = ComplexMatrix::from_rows(vec![
            vec![c(0.0, 0.0), c(1.0, 0.0)],
            vec![c(1.0, 0.0), c(0.0, 0.0)],
        ])
        .unwrap();
        let eigs = spectrum(&m).unwrap();
        assert_spectra_close(&eigs, &mut [c(-1.0, 0.0), c(1.0, 0.0)], 1e-12);
    }

    #[test]
    fn spectrum_invariant_under_unitary_conjugation() {
        // U D U* has the spectrum of D; U = exp(K) with K skew-Hermitian.
        let k = ComplexMatrix::from_rows(vec![
            vec![c(0.0, 0.3), c(0.7, -0.2), c(-0.1, 0.4)],
            vec![c(-0.7, -0.2), c(0.0, -1.1), c(0.5, 0.0)],
            vec![c(0.1, 0.4), c(-0.5, 0.0), c(0.0, 0.6)],
        ])
        .unwrap();
        let u = expm(&k).unwrap();
        let d = ComplexMatrix::diagonal(&[c(2.0, 1.0), c(-1.0, 0.5), c(0.0, -3.0)]);
        let m = &(&u * &d) * &u.adjoint();
        let eigs = spectrum(&m).unwrap();
        assert_spectra_close(&eigs, &mut [c(2.0, 1.0), c(-1.0, 0.5), c(0.0, -3.0)], 1e-11);
    }

    #[test]
    fn spectrum_of_upper_triangular_reads_diagonal() {
        let m = ComplexMatrix::from_rows(vec![
            vec![c(1.0, 1.0), c(5.0, -2.0), c(0.3, 0.0)],
            vec![c(0.0, 0.0), c(-2.0, 0.0), c(7.0, 1.0)],
            vec![c(0.0, 0.0), c(0.0, 0.0), c(0.5, -0.5)],
        ])
        .unwrap();
        let eigs = spectrum(&m).unwrap();
        assert_spectra_close(&eigs, &mut [c(1.0, 1.0), c(-2.0, 0.0), c(0.5, -0.5)], 1e-11);
    }

    #[test]
    fn hermitian_eigenvalues_of_pauli_x() {
        let m = ComplexMatrix::from_rows(vec![
            vec![c(0.0, 0.0), c(1.0, 0.0)],
            vec![c(1.0, 0.0), c(0.0, 0.0)],
        ])
        .unwrap();
        let eigs = hermitian_eigenvalues(&m).unwrap();
        assert!((eigs[0] + 1.0).abs() < 1e-13);
        assert!((eigs[1] - 1.0).abs() < 1e-13);
    }

    #[test]
    fn hermitian_eigenvalues_with_complex_offdiagonal() {
        // [[2, i], [-i, 2]] has eigenvalues 1 and 3.
        let m = ComplexMatrix::from_rows(vec![
            vec![c(2.0, 0.0), c(0.0, 1.0)],
            vec![c(0.0, -1.0), c(2.0, 0.0)],
        ])
        .unwrap();
        let eigs = hermitian_eigenvalues(&m).unwrap();
        assert!((eigs[0] - 1.0).abs() < 1e-13);
        assert!((eigs[1] - 3.0).abs() < 1e-13);
    }

    #[test]
    fn hermitian_eigenvalues_sorted_ascending() {
        let m = ComplexMatrix::diagonal(&[c(3.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)]);
        let eigs = hermitian_eigenvalues(&m).unwrap();
        assert_eq!(eigs, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn condition_estimate_of_diagonal() {
        let m = ComplexMatrix::diagonal(&[c(1.0, 0.0), c(-10.0, 0.0)]);
        assert!((condition_estimate(&m).unwrap() - 10.0).abs() < 1e-12);
    }

    #[test]
    fn condition_estimate_of_singular_is_infinite() {
        let m = ComplexMatrix::diagonal(&[c(1.0, 0.0), c(0.0, 0.0)]);
        assert!(condition_estimate(&m).unwrap().is_infinite());
    }

    #[test]
    fn qr_and_jacobi_agree_on_hermitian_input() {
        let m = ComplexMatrix::from_rows(vec![
            vec![c(1.0, 0.0), c(0.5, 0.5), c(0.0, -1.0)],
            vec![c(0.5, -0.5), c(-2.0, 0.0), c(1.0, 0.0)],
            vec![c(0.0, 1.0), c(1.0, 0.0), c(0.5, 0.0)],
        ])
        .unwrap();
        let general = spectrum(&m).unwrap();
        let hermitian = hermitian_eigenvalues(&m).unwrap();
        for (g, h) in general.iter().zip(hermitian.iter()) {
            assert!(g.im.abs() < 1e-10);
            assert!((g.re - h).abs() < 1e-10);
        }
    }
}
