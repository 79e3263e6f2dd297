//! Complex-energy shooting on `psi'' = (V - E) psi` with Dirichlet ends.
//!
//! Both halves are integrated with fixed-step RK4 at the grid spacing and
//! matched at `x = 0` through the Wronskian
//! `W(E) = psi_L(0) psi_R'(0) - psi_L'(0) psi_R(0)`, which is holomorphic in
//! `E`. Newton steps use a central difference in complex `E`.

use num_complex::Complex64;

use crate::grid::Grid;
use crate::potential::PotentialExpr;

use super::SolverError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootingOptions {
    /// Relative step tolerance `|dE| <= newton_tol * (1 + |E|)`, or
    /// `|W| <= newton_tol * scale`.
    pub newton_tol: f64,
    pub max_iter: usize,
    /// Largest allowed `|E - E0|`.
    pub trust_radius: f64,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        ShootingOptions {
            newton_tol: 1e-12,
            max_iter: 50,
            trust_radius: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootingResult {
    pub energy: Complex64,
    /// `|energy - E0|`.
    pub shift: f64,
    pub iterations: usize,
    /// `|W| / (|psi_L psi_R'| + |psi_L' psi_R|)` at the returned energy.
    pub relative_wronskian: f64,
}

const RESCALE_ABOVE: f64 = 1e100;

/// Potential at the half-grid nodes, from `x = -L` to `x = 0`.
struct HalfLine {
    step: f64,
    left: Vec<Complex64>,
    right: Vec<Complex64>,
}

impl HalfLine {
    fn new(potential: &PotentialExpr, grid: &Grid) -> Result<Self, SolverError> {
        let h = grid.spacing();
        let steps = grid.center() + 1;
        let nodes = 2 * steps;
        let mut left = Vec::with_capacity(nodes + 1);
        let mut right = Vec::with_capacity(nodes + 1);
        for m in 0..=nodes {
            let x = -((nodes - m) as f64) * 0.5 * h;
            let (vl, vr) = (potential.value(x), potential.value(-x));
            if !(vl.re.is_finite() && vl.im.is_finite() && vr.re.is_finite() && vr.im.is_finite()) {
                return Err(SolverError::Potential(crate::potential::EvalError { x }));
            }
            left.push(vl);
            right.push(vr);
        }
        Ok(HalfLine {
            step: h,
            left,
            right,
        })
    }

    /// `(psi, psi')` at `x = 0` for each energy, integrated from one end.
    /// The right half runs in the mirrored variable `y = -x`, so its
    /// derivative is sign-flipped on return.
    fn integrate<const K: usize>(
        &self,
        energies: [Complex64; K],
        from_right: bool,
    ) -> [(Complex64, Complex64); K] {
        let v = if from_right { &self.right } else { &self.left };
        let h = self.step;
        let mut state = [(Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)); K];
        let steps = (v.len() - 1) / 2;
        for s in 0..steps {
            let (v0, vm, v1) = (v[2 * s], v[2 * s + 1], v[2 * s + 2]);
            for (k, e) in energies.iter().enumerate() {
                let (y, dy) = state[k];
                let f = |vx: Complex64, y: Complex64| (vx - e) * y;
                let k1y = dy;
                let k1d = f(v0, y);
                let k2y = dy + k1d * (0.5 * h);
                let k2d = f(vm, y + k1y * (0.5 * h));
                let k3y = dy + k2d * (0.5 * h);
                let k3d = f(vm, y + k2y * (0.5 * h));
                let k4y = dy + k3d * h;
                let k4d = f(v1, y + k3y * h);
                state[k] = (
                    y + (k1y + k2y * 2.0 + k3y * 2.0 + k4y) * (h / 6.0),
                    dy + (k1d + k2d * 2.0 + k3d * 2.0 + k4d) * (h / 6.0),
                );
            }
            // common rescaling keeps finite differences in E consistent
            let size = state[0].0.l1_norm() + state[0].1.l1_norm();
            if size > RESCALE_ABOVE {
                let shrink = 1.0 / size;
                for st in state.iter_mut() {
                    st.0 *= shrink;
                    st.1 *= shrink;
                }
            }
        }
        if from_right {
            for st in state.iter_mut() {
                st.1 = -st.1;
            }
        }
        state
    }

    fn wronskians<const K: usize>(&self, energies: [Complex64; K]) -> ([Complex64; K], f64) {
        let l = self.integrate(energies, false);
        let r = self.integrate(energies, true);
        let mut w = [Complex64::new(0.0, 0.0); K];
        for k in 0..K {
            w[k] = l[k].0 * r[k].1 - l[k].1 * r[k].0;
        }
        let scale = (l[0].0 * r[0].1).norm() + (l[0].1 * r[0].0).norm();
        (w, scale)
    }
}

/// Matching Wronskian and its scale at a single energy.
pub fn matching_wronskian(
    potential: &PotentialExpr,
    energy: Complex64,
    grid: &Grid,
) -> Result<(Complex64, f64), SolverError> {
    let line = HalfLine::new(potential, grid)?;
    let ([w], scale) = line.wronskians([energy]);
    Ok((w, scale))
}

pub fn refine_eigenvalue_shooting(
    potential: &PotentialExpr,
    e0: Complex64,
    grid: &Grid,
    options: &ShootingOptions,
) -> Result<ShootingResult, SolverError> {
    let line = HalfLine::new(potential, grid)?;
    let mut energy = e0;
    for iteration in 1..=options.max_iter {
        let delta = 1e-5 * (1.0 + energy.norm());
        let ([w, w_plus, w_minus], scale) =
            line.wronskians([energy, energy + delta, energy - delta]);
        let rel = if scale > 0.0 {
            w.norm() / scale
        } else {
            w.norm()
        };
        if rel <= options.newton_tol && iteration > 1 {
            return Ok(finish(e0, energy, iteration, rel));
        }
        let slope = (w_plus - w_minus) / (2.0 * delta);
        if slope == Complex64::new(0.0, 0.0) || !(slope.re.is_finite() && slope.im.is_finite()) {
            return Err(SolverError::NoConvergence {
                iterations: iteration,
            });
        }
        let step = w / slope;
        energy -= step;
        if (energy - e0).norm() > options.trust_radius {
            return Err(SolverError::BasinEscape {
                energy,
                start: e0,
                trust_radius: options.trust_radius,
            });
        }
        if step.norm() <= options.newton_tol * (1.0 + energy.norm()) {
            let ([w], scale) = line.wronskians([energy]);
            let rel = if scale > 0.0 {
                w.norm() / scale
            } else {
                w.norm()
            };
            return Ok(finish(e0, energy, iteration, rel));
        }
    }
    Err(SolverError::NoConvergence {
        iterations: options.max_iter,
    })
}

fn finish(
    e0: Complex64,
    energy: Complex64,
    iterations: usize,
    relative_wronskian: f64,
) -> ShootingResult {
    ShootingResult {
        energy,
        shift: (energy - e0).norm(),
        iterations,
        relative_wronskian,
    }
}
