//! Crank–Nicolson evolution of `i dψ/dt = H ψ` and Ehrenfest diagnostics.

use num_complex::Complex64;
use thiserror::Error;

use crate::eigen::HamiltonianOp;
use crate::grid::WaveFunction;
use crate::krein::{self, KreinError};
use crate::observables::{LinearOperator, ObservableError};
use crate::tridiag::TridiagonalLu;

pub const DEFAULT_DT: f64 = 0.001;
pub const DEFAULT_T_FINAL: f64 = 1.0;
pub const DEFAULT_STRIDE: usize = 10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("Crank-Nicolson factorization is singular at pivot {index} for dt = {dt}")]
    SingularSolve { dt: f64, index: usize },
    #[error("invalid time step: dt = {dt}, t_final = {t_final}")]
    InvalidStep { dt: f64, t_final: f64 },
    #[error("stride must be positive")]
    ZeroStride,
    #[error("operator '{0}' is not theta-invariant")]
    NonInvariantOperator(&'static str),
    #[error("trajectory has {0} stored states, at least 3 are needed")]
    TooShort(usize),
    #[error("state became non-finite at t = {time}")]
    NonFinite { time: f64 },
    #[error("eigenvalue iteration failed at index {0}")]
    Spectrum(usize),
    #[error(transparent)]
    Observable(#[from] ObservableError),
    #[error(transparent)]
    Krein(#[from] KreinError),
}

/// One precomputed Cayley step `(1 + i dt H/2)⁻¹ (1 - i dt H/2)`.
///
/// A negative `dt` runs the step backwards and inverts the forward step.
#[derive(Debug, Clone)]
pub struct CrankNicolson {
    hamiltonian: HamiltonianOp,
    dt: f64,
    lu: TridiagonalLu,
}

impl CrankNicolson {
    pub fn new(hamiltonian: &HamiltonianOp, dt: f64) -> Result<Self, DynamicsError> {
        if !dt.is_finite() || dt == 0.0 {
            return Err(DynamicsError::InvalidStep { dt, t_final: dt });
        }
        let half = Complex64::new(0.0, 0.5 * dt);
        let lu = hamiltonian
            .factor_shifted(Complex64::new(1.0, 0.0), half)
            .map_err(|p| DynamicsError::SingularSolve { dt, index: p.index })?;
        Ok(CrankNicolson {
            hamiltonian: hamiltonian.clone(),
            dt,
            lu,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn step(&self, psi: &WaveFunction) -> Result<WaveFunction, DynamicsError> {
        if psi.grid() != self.hamiltonian.grid() {
            return Err(KreinError::GridMismatch.into());
        }
        let half = Complex64::new(0.0, 0.5 * self.dt);
        let h_psi = self.hamiltonian.apply_samples(psi.samples());
        let mut rhs: Vec<Complex64> = psi
            .samples()
            .iter()
            .zip(&h_psi)
            .map(|(p, hp)| p - half * hp)
            .collect();
        self.lu.solve_in_place(&mut rhs);
        Ok(WaveFunction::from_samples_unchecked(*psi.grid(), rhs))
    }
}

pub fn step_crank_nicolson(
    psi: &WaveFunction,
    hamiltonian: &HamiltonianOp,
    dt: f64,
) -> Result<WaveFunction, DynamicsError> {
    CrankNicolson::new(hamiltonian, dt)?.step(psi)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<WaveFunction>,
    pub dt: f64,
    pub stride: usize,
    pub scheme: &'static str,
    /// `(psi_t|psi_t)` at the stored times.
    pub krein_norms: Vec<Complex64>,
    /// `<psi_t|psi_t>` at the stored times.
    pub hilbert_norms: Vec<f64>,
}

impl Trajectory {
    /// Spacing of the stored samples, `stride * dt`.
    pub fn sample_spacing(&self) -> f64 {
        self.stride as f64 * self.dt
    }

    /// `max_t |(psi_t|psi_t) - (psi_0|psi_0)| / |(psi_0|psi_0)|`, or the
    /// absolute drift over `<psi_0|psi_0>` for a neutral start.
    pub fn krein_drift(&self) -> f64 {
        let k0 = self.krein_norms[0];
        let scale = if k0.norm() > 0.0 {
            k0.norm()
        } else {
            self.hilbert_norms[0]
        };
        self.krein_norms
            .iter()
            .map(|k| (k - k0).norm())
            .fold(0.0, f64::max)
            / scale
    }

    /// Largest relative change of the Hilbert norm along the trajectory.
    pub fn hilbert_drift(&self) -> f64 {
        let n0 = self.hilbert_norms[0];
        self.hilbert_norms
            .iter()
            .map(|n| (n - n0).abs())
            .fold(0.0, f64::max)
            / n0
    }
}

/// `round(t_final / dt)` Crank–Nicolson steps, storing every `stride`-th state
/// (including the initial one). The final state is stored only when the step
/// count is a multiple of `stride`, so stored times stay uniformly spaced.
pub fn evolve(
    psi0: &WaveFunction,
    hamiltonian: &HamiltonianOp,
    dt: f64,
    t_final: f64,
    stride: usize,
) -> Result<Trajectory, DynamicsError> {
    if !(dt > 0.0 && dt.is_finite() && t_final.is_finite() && t_final >= dt * (1.0 - 1e-12)) {
        return Err(DynamicsError::InvalidStep { dt, t_final });
    }
    if stride == 0 {
        return Err(DynamicsError::ZeroStride);
    }
    let stepper = CrankNicolson::new(hamiltonian, dt)?;
    let steps = (t_final / dt).round() as usize;
    let mut traj = Trajectory {
        times: Vec::with_capacity(steps / stride + 1),
        states: Vec::with_capacity(steps / stride + 1),
        dt,
        stride,
        scheme: "crank-nicolson",
        krein_norms: Vec::new(),
        hilbert_norms: Vec::new(),
    };
    let record =
        |traj: &mut Trajectory, k: usize, psi: &WaveFunction| -> Result<(), DynamicsError> {
            traj.times.push(k as f64 * dt);
            traj.krein_norms.push(krein::krein_inner(psi, psi)?);
            traj.hilbert_norms.push(krein::hilbert_norm2(psi));
            traj.states.push(psi.clone());
            Ok(())
        };
    let mut psi = psi0.clone();
    record(&mut traj, 0, &psi)?;
    for k in 1..=steps {
        psi = stepper.step(&psi)?;
        if k % stride == 0 {
            if !psi.max_abs().is_finite() {
                return Err(DynamicsError::NonFinite {
                    time: k as f64 * dt,
                });
            }
            record(&mut traj, k, &psi)?;
        }
    }
    Ok(traj)
}

/// Largest per-step amplification `|1 - i E dt/2| / |1 + i E dt/2|` over the
/// discrete spectrum. Complex-pair eigenvalues make it exceed one, and
/// rounding errors in those modes then grow like `growth^steps`.
pub fn cayley_growth(hamiltonian: &HamiltonianOp, dt: f64) -> Result<f64, DynamicsError> {
    let n = hamiltonian.diag().len();
    let off = vec![Complex64::new(hamiltonian.offdiag(), 0.0); n - 1];
    let energies = crate::eigen::symmetric_tridiagonal_eigenvalues(hamiltonian.diag(), &off)
        .map_err(|f| DynamicsError::Spectrum(f.index))?;
    let half = Complex64::new(0.0, 0.5 * dt);
    Ok(energies
        .iter()
        .map(|e| (1.0 - half * e).norm() / (1.0 + half * e).norm())
        .fold(0.0, f64::max))
}

/// Krein average `(psi|O psi)/(psi|psi)` without the observability tag.
fn average(op: &LinearOperator, psi: &WaveFunction) -> Result<Complex64, DynamicsError> {
    Ok(crate::observables::operator_average(op, psi)?.value)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EhrenfestReport {
    /// Interior stored times where the residual is evaluated.
    pub times: Vec<f64>,
    /// Centered difference of `Av(O)`.
    pub lhs: Vec<Complex64>,
    /// `i Av(O H - H O)`.
    pub rhs: Vec<Complex64>,
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    /// `Av(O)` at every stored time.
    pub averages: Vec<Complex64>,
}

/// Compares `d/dt Av(O)` along the trajectory with `i Av(O H - H O)`.
///
/// With `(psi|phi)` linear in its first argument and `i dψ/dt = H ψ`, the
/// Heisenberg relation reads `d/dt Av(O) = i Av(OH - HO) = -i Av([H, O])`.
pub fn ehrenfest_residual(
    traj: &Trajectory,
    hamiltonian: &HamiltonianOp,
    op: &LinearOperator,
) -> Result<EhrenfestReport, DynamicsError> {
    if traj.states.len() < 3 {
        return Err(DynamicsError::TooShort(traj.states.len()));
    }
    let grid = traj.states[0].grid();
    if !op.is_theta_invariant(grid) {
        return Err(DynamicsError::NonInvariantOperator(op.label()));
    }
    let averages = traj
        .states
        .iter()
        .map(|psi| average(op, psi))
        .collect::<Result<Vec<_>, _>>()?;
    let spacing = traj.sample_spacing();
    let h_op = LinearOperator::Hamiltonian(hamiltonian.clone());
    let i = Complex64::new(0.0, 1.0);
    let mut report = EhrenfestReport {
        times: Vec::new(),
        lhs: Vec::new(),
        rhs: Vec::new(),
        residuals: Vec::new(),
        max_residual: 0.0,
        averages: averages.clone(),
    };
    for k in 1..traj.states.len() - 1 {
        let psi = &traj.states[k];
        let oh = op.apply(&h_op.apply(psi)?)?;
        let ho = h_op.apply(&op.apply(psi)?)?;
        let commutator = &oh - &ho;
        let rhs = i * krein::krein_inner(psi, &commutator)? / traj.krein_norms[k].re;
        let lhs = (averages[k + 1] - averages[k - 1]) / (2.0 * spacing);
        let r = (lhs - rhs).norm();
        report.times.push(traj.times[k]);
        report.lhs.push(lhs);
        report.rhs.push(rhs);
        report.residuals.push(r);
        report.max_residual = report.max_residual.max(r);
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EhrenfestConvergence {
    pub coarse: EhrenfestReport,
    pub fine: EhrenfestReport,
    pub max_residual: f64,
    /// `log2(coarse / fine)`.
    pub convergence_order: f64,
}

/// Runs the trajectory at `dt` and `dt/2` with the same stride, so both the
/// time step and the sample spacing halve.
pub fn ehrenfest_convergence(
    psi0: &WaveFunction,
    hamiltonian: &HamiltonianOp,
    op: &LinearOperator,
    dt: f64,
    t_final: f64,
    stride: usize,
) -> Result<EhrenfestConvergence, DynamicsError> {
    let coarse = ehrenfest_residual(
        &evolve(psi0, hamiltonian, dt, t_final, stride)?,
        hamiltonian,
        op,
    )?;
    let fine = ehrenfest_residual(
        &evolve(psi0, hamiltonian, dt / 2.0, t_final, stride)?,
        hamiltonian,
        op,
    )?;
    let convergence_order = (coarse.max_residual / fine.max_residual).log2();
    Ok(EhrenfestConvergence {
        max_residual: coarse.max_residual,
        convergence_order,
        coarse,
        fine,
    })
}
