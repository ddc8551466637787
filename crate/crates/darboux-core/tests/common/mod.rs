//! Seeded random instances shared by the integration suites.
//!
//! Batch criteria need admissible data whose state matrix stays far from
//! singular along the whole run, otherwise downstream tolerances measure
//! conditioning instead of structure. The generator therefore picks the
//! initial state S(0) and the eigenfunction Pi(0) first and solves the
//! displacement identity for A: any X with X - X* = i Pi Pi* gives
//! A = X S(0)^{-1} satisfying A S(0) - S(0) A* = i Pi(0) Pi(0)* exactly,
//! and S(0) can be made as well conditioned as desired (of either sign).
//! Couplings are then placed a unit distance clear of the spectrum of A.

// Each integration-test binary compiles this module separately and none
// uses every helper.
#![allow(dead_code)]

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use darboux_core::matrix::{solve, spectrum};
use darboux_core::{ComplexMatrix, GbdtTriple, Tolerances};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    })
}

/// Distinct couplings with pairwise separation at least 0.3.
pub fn spread_couplings(rng: &mut ChaCha8Rng, r: usize) -> Vec<f64> {
    (0..r)
        .map(|k| -2.0 + k as f64 * 1.5 + rng.gen_range(0.0..0.7))
        .collect()
}

/// Distinct couplings at distance at least 1 from every listed eigenvalue.
/// Falls back to points beyond the spectral radius, which always works.
fn couplings_clear_of(rng: &mut ChaCha8Rng, r: usize, eigs: &[Complex64]) -> Vec<f64> {
    for _ in 0..50 {
        let candidate: Vec<f64> = (0..r)
            .map(|k| -3.0 + k as f64 * (6.0 / r as f64) + rng.gen_range(0.0..(4.0 / r as f64)))
            .collect();
        let clear = candidate
            .iter()
            .all(|&c| eigs.iter().all(|l| (l - c).norm() >= 1.0));
        if clear {
            return candidate;
        }
    }
    let radius = eigs.iter().map(|l| l.norm()).fold(0.0f64, f64::max);
    (0..r)
        .map(|k| radius + 1.0 + k as f64 * 0.7 + rng.gen_range(0.0..0.3))
        .collect()
}

fn direct_triple(
    rng: &mut ChaCha8Rng,
    n: usize,
    m: usize,
    r: usize,
    s0_sign: f64,
    tol: &Tolerances,
) -> GbdtTriple {
    let pi0 = random_matrix(rng, n, m);
    let b = random_matrix(rng, n, n).scale_re(0.4);
    let s0 = (&(&b * &b.adjoint()).hermitian_part() + &ComplexMatrix::identity(n).scale_re(0.5))
        .scale_re(s0_sign);
    let x = &random_matrix(rng, n, n).hermitian_part()
        + &(&pi0 * &pi0.adjoint()).scale(Complex64::new(0.0, 0.5));
    let s0_inverse = solve(&s0, &ComplexMatrix::identity(n)).expect("S(0) is definite");
    let a = &x * &s0_inverse;
    let eigs = spectrum(&a).expect("spectrum of the constructed A");
    let couplings = couplings_clear_of(rng, r, &eigs);
    GbdtTriple::new(a, s0, pi0, couplings, tol).expect("constructed instance is admissible")
}

/// Generic admissible triple with S(0) positive definite and condition
/// numbers under control.
pub fn seeded_triple(seed: u64, n: usize, m: usize, r: usize, tol: &Tolerances) -> GbdtTriple {
    direct_triple(&mut rng(seed), n, m, r, 1.0, tol)
}

/// Admissible triple whose initial state is negative definite.
pub fn seeded_negative_triple(
    seed: u64,
    n: usize,
    m: usize,
    r: usize,
    tol: &Tolerances,
) -> GbdtTriple {
    direct_triple(&mut rng(seed), n, m, r, -1.0, tol)
}

/// Square matrix with orthonormal rows, by Gram-Schmidt on a random seed
/// matrix. Retries entries if a row degenerates, so the result is exact to
/// roundoff.
pub fn random_orthonormal(rng: &mut ChaCha8Rng, m: usize) -> ComplexMatrix {
    loop {
        let raw = random_matrix(rng, m, m);
        let mut rows: Vec<Vec<Complex64>> = Vec::with_capacity(m);
        let mut degenerate = false;
        for i in 0..m {
            let mut v: Vec<Complex64> = (0..m).map(|j| raw[(i, j)]).collect();
            // Two projection passes; one can leave O(cond * eps) overlap.
            for _ in 0..2 {
                for prev in &rows {
                    let overlap: Complex64 = prev.iter().zip(&v).map(|(p, x)| p.conj() * x).sum();
                    for (x, p) in v.iter_mut().zip(prev) {
                        *x -= overlap * p;
                    }
                }
            }
            let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-6 {
                degenerate = true;
                break;
            }
            for x in v.iter_mut() {
                *x /= norm;
            }
            rows.push(v);
        }
        if !degenerate {
            return ComplexMatrix::from_fn(m, m, |i, j| rows[i][j]);
        }
    }
}

/// The (n, m, r) sweep used for batch criteria.
pub fn dimension_sweep() -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    for &n in &[2usize, 4, 6] {
        for &m in &[1usize, 2, 4] {
            for &r in &[1usize, 2, 3] {
                out.push((n, m, r));
            }
        }
    }
    // 27 combinations; the batch criteria take the first 25.
    out.truncate(25);
    out
}
