//! Test-only oracles, written independently of the library numerics.

#![allow(dead_code)]

use std::f64::consts::PI;

use krein_pt::{Complex64, Grid, WaveFunction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random smooth state: a complex cubic times a Gaussian at a random center.
pub fn random_state(grid: Grid, rng: &mut ChaCha8Rng) -> WaveFunction {
    let coeffs: Vec<Complex64> = (0..4)
        .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let center = rng.gen_range(-1.5..1.5);
    let width = rng.gen_range(0.5..2.0);
    WaveFunction::from_fn(grid, |x| {
        let poly = coeffs.iter().rev().fold(c(0.0, 0.0), |acc, a| acc * x + a);
        poly * (-(x - center) * (x - center) / (width * width)).exp()
    })
    .unwrap()
}

/// Random samples with no smoothness at all.
pub fn random_samples(grid: Grid, rng: &mut ChaCha8Rng) -> WaveFunction {
    let samples = (0..grid.len())
        .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    WaveFunction::new(grid, samples).unwrap()
}

/// `∫ psi(x) phi*(-x) dx` through a plain O(n²) DFT on the symmetric grid.
pub fn naive_momentum_krein(psi: &WaveFunction, phi: &WaveFunction) -> Complex64 {
    let g = psi.grid();
    let n = g.len();
    let h = g.spacing();
    let dp = 2.0 * PI / (n as f64 * h);
    let transform = |f: &WaveFunction, p: f64| -> Complex64 {
        g.points()
            .zip(f.samples())
            .map(|(x, z)| z * Complex64::from_polar(1.0, -p * x))
            .sum::<Complex64>()
            * (h / (2.0 * PI).sqrt())
    };
    let half = (n / 2) as i64;
    (-half..=half)
        .map(|k| {
            let p = k as f64 * dp;
            transform(psi, p) * transform(phi, -p).conj()
        })
        .sum::<Complex64>()
        * dp
}

/// Numerov shooting for `psi'' = (V - E) psi` with `psi(±L) = 0`.
///
/// Both sides run to the center and meet on two nodes; the Casoratian of the
/// two discrete solutions vanishes at an eigenvalue of the Numerov problem,
/// which approximates the continuum one to O(h⁴).
pub fn numerov_casoratian(
    v: &dyn Fn(f64) -> Complex64,
    e: Complex64,
    l: f64,
    steps: usize,
) -> Complex64 {
    assert!(steps.is_multiple_of(2));
    let h = 2.0 * l / steps as f64;
    let mid = steps / 2;
    let f = |x: f64| (v(x) - e) * (h * h / 12.0);
    let one = c(1.0, 0.0);
    // returns (psi at node count-1, psi at node count) counted from the wall
    let run = |dir: f64, count: usize| -> (Complex64, Complex64) {
        let x = |i: usize| dir * (-l + i as f64 * h);
        let mut prev = c(0.0, 0.0);
        let mut cur = c(h, 0.0);
        for i in 1..count {
            let next = (cur * (c(2.0, 0.0) + f(x(i)) * 10.0) - prev * (one - f(x(i - 1))))
                / (one - f(x(i + 1)));
            prev = cur;
            cur = next;
        }
        (prev, cur)
    };
    // left: nodes mid-1, mid; right (mirrored): nodes mid+1, mid
    let (l_before, l_mid) = run(1.0, mid);
    let (r_after, r_mid) = run(-1.0, mid);
    // the right solution at node mid-1 follows from one more recurrence step leftwards
    let x_mid = -l + mid as f64 * h;
    let r_before = (r_mid * (c(2.0, 0.0) + f(x_mid) * 10.0) - r_after * (one - f(x_mid + h)))
        / (one - f(x_mid - h));
    // no rescaling, so the Casoratian stays holomorphic in E; growth up to
    // e^{130} is far from overflow for the potentials tested here
    l_before * r_mid - l_mid * r_before
}

/// Secant iteration on the Numerov Casoratian.
pub fn numerov_eigenvalue(
    v: &dyn Fn(f64) -> Complex64,
    guess: Complex64,
    l: f64,
    steps: usize,
) -> Complex64 {
    let mut e0 = guess;
    let mut e1 = guess + c(1e-3, 0.0);
    let mut w0 = numerov_casoratian(v, e0, l, steps);
    let mut w1 = numerov_casoratian(v, e1, l, steps);
    for _ in 0..100 {
        if w1 == w0 {
            break;
        }
        let e2 = e1 - w1 * (e1 - e0) / (w1 - w0);
        e0 = e1;
        w0 = w1;
        e1 = e2;
        w1 = numerov_casoratian(v, e1, l, steps);
        if (e1 - e0).norm() < 1e-14 * (1.0 + e1.norm()) {
            break;
        }
    }
    e1
}

/// Dense complex matrix-vector product.
pub fn dense_apply(m: &[Vec<Complex64>], v: &[Complex64]) -> Vec<Complex64> {
    m.iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}
