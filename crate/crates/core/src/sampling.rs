//! Deterministic point sets: Halton sequences, randomly shifted Halton
//! batches, and quasi-uniform points on the unit sphere.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PRIMES: [u32; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    r
}

/// `count` Halton points in [0,1)^dim starting at sequence index `start`.
pub fn halton_points(dim: usize, count: usize, start: u64) -> Vec<Vec<f64>> {
    assert!(dim <= PRIMES.len(), "Halton sequence supports up to 16 dimensions");
    (0..count as u64)
        .map(|i| {
            (0..dim)
                .map(|k| radical_inverse(start + i + 1, PRIMES[k] as u64))
                .collect()
        })
        .collect()
}

/// Cranley-Patterson shifted Halton batches: `shifts` independent random
/// shifts (seeded) of the same `count` points. Batch spread gives an error bar.
pub fn shifted_halton_batches(dim: usize, count: usize, shifts: usize, seed: u64) -> Vec<Vec<Vec<f64>>> {
    let base = halton_points(dim, count, 0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..shifts)
        .map(|_| {
            let shift: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
            base.iter()
                .map(|p| {
                    p.iter()
                        .zip(&shift)
                        .map(|(u, s)| {
                            let v = u + s;
                            if v >= 1.0 {
                                v - 1.0
                            } else {
                                v
                            }
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

/// Quasi-uniform directions on S^{dim-1}: both signs in 1-D, equal angles in
/// 2-D, the spherical Fibonacci lattice in 3-D and normalized Gaussian-mapped
/// Halton points above.
pub fn sphere_points(dim: usize, count: usize) -> Vec<Vec<f64>> {
    match dim {
        0 => Vec::new(),
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..count)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / count as f64;
                vec![t.cos(), t.sin()]
            })
            .collect(),
        3 => {
            let golden = PI * (3.0 - 5f64.sqrt());
            (0..count)
                .map(|i| {
                    let z = 1.0 - (2.0 * i as f64 + 1.0) / count as f64;
                    let r = (1.0 - z * z).max(0.0).sqrt();
                    let phi = golden * i as f64;
                    vec![r * phi.cos(), r * phi.sin(), z]
                })
                .collect()
        }
        _ => halton_points(dim, count, 0)
            .into_iter()
            .map(|u| {
                let g: Vec<f64> = u.iter().map(|v| inverse_normal(*v)).collect();
                let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
                g.into_iter().map(|x| x / norm).collect()
            })
            .collect(),
    }
}

/// Quasi-uniform points of the closed Euclidean unit ball: sphere points plus
/// radially scaled Halton-derived interior points.
pub fn ball_points(dim: usize, sphere: usize, interior: usize) -> Vec<Vec<f64>> {
    let mut pts = sphere_points(dim, sphere);
    let dirs = sphere_points(dim, interior.max(1));
    let radii = halton_points(1, interior, 17);
    for (i, r) in radii.iter().enumerate() {
        let rad = r[0].powf(1.0 / dim as f64);
        pts.push(dirs[i % dirs.len()].iter().map(|v| v * rad).collect());
    }
    pts
}

// Acklam's rational approximation; adequate for direction sampling.
fn inverse_normal(p: f64) -> f64 {
    let p = p.clamp(1e-12, 1.0 - 1e-12);
    const A: [f64; 6] = [
        -3.969683028665376e1,
        2.209460984245205e2,
        -2.759285104469687e2,
        1.383577518672690e2,
        -3.066479806614716e1,
        2.506628277459239,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e1,
        1.615858368580409e2,
        -1.556989798598866e2,
        6.680131188771972e1,
        -1.328068155288572e1,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-3,
        -3.223964580411365e-1,
        -2.400758277161838,
        -2.549671010615606,
        4.374664141464968,
        2.938163982698783,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-3,
        3.224671290700398e-1,
        2.445134137142996,
        3.754408661907416,
    ];
    let low = 0.02425;
    if p < low {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - low {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -inverse_normal(1.0 - p)
    }
}
