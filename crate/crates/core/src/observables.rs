//! Currents, transition amplitudes and operator averages in the Krein product.

use num_complex::Complex64;
use thiserror::Error;

use crate::eigen::{EigenPair, HamiltonianOp};
use crate::grid::{Grid, WaveFunction};
use crate::krein::{self, KreinError, DEFAULT_NEUTRAL_TOL};

pub const DEFAULT_CONTINUITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ObservableError {
    #[error("energy {0} is not real; the current is only conserved for real energies")]
    ComplexEigenvalue(Complex64),
    #[error("state is neutral: |(psi|psi)| = {krein} <= tol * <psi|psi> = {threshold}")]
    NeutralState { krein: f64, threshold: f64 },
    #[error("operator is defined on {expected} points, wavefunction has {got}")]
    SizeMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Krein(#[from] KreinError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    Hamiltonian,
    Momentum,
    ImaginaryPosition,
    Position,
    Parity,
    Tridiagonal,
}

impl OperatorKind {
    pub fn label(&self) -> &'static str {
        match self {
            OperatorKind::Hamiltonian => "hamiltonian",
            OperatorKind::Momentum => "momentum",
            OperatorKind::ImaginaryPosition => "i_x",
            OperatorKind::Position => "position",
            OperatorKind::Parity => "parity",
            OperatorKind::Tridiagonal => "tridiagonal",
        }
    }
}

/// Linear operators acting on sampled wavefunctions.
///
/// `Momentum` is `-i d/dx` with central differences and the Dirichlet zeros
/// beyond the grid, so its matrix is exactly antisymmetric.
#[derive(Debug, Clone)]
pub enum LinearOperator {
    Hamiltonian(HamiltonianOp),
    Momentum,
    /// Multiplication by `i x`.
    ImaginaryPosition,
    Position,
    Parity,
    /// `lower[k] = M[k+1][k]`, `upper[k] = M[k][k+1]`.
    Tridiagonal {
        lower: Vec<Complex64>,
        diag: Vec<Complex64>,
        upper: Vec<Complex64>,
    },
}

impl LinearOperator {
    /// Multiplication by the given values.
    pub fn multiplication(values: Vec<Complex64>) -> Self {
        let n = values.len();
        let zeros = vec![Complex64::new(0.0, 0.0); n.saturating_sub(1)];
        LinearOperator::Tridiagonal {
            lower: zeros.clone(),
            diag: values,
            upper: zeros,
        }
    }

    /// Multiplication by `V(x)` of the Hamiltonian.
    pub fn potential_of(hamiltonian: &HamiltonianOp) -> Self {
        let h = hamiltonian.grid().spacing();
        let kinetic = 2.0 / (h * h);
        Self::multiplication(hamiltonian.diag().iter().map(|d| d - kinetic).collect())
    }

    pub fn kind(&self) -> OperatorKind {
        match self {
            LinearOperator::Hamiltonian(_) => OperatorKind::Hamiltonian,
            LinearOperator::Momentum => OperatorKind::Momentum,
            LinearOperator::ImaginaryPosition => OperatorKind::ImaginaryPosition,
            LinearOperator::Position => OperatorKind::Position,
            LinearOperator::Parity => OperatorKind::Parity,
            LinearOperator::Tridiagonal { .. } => OperatorKind::Tridiagonal,
        }
    }

    pub fn label(&self) -> &'static str {
        self.kind().label()
    }

    fn fixed_size(&self) -> Option<usize> {
        match self {
            LinearOperator::Hamiltonian(h) => Some(h.grid().len()),
            LinearOperator::Tridiagonal { diag, .. } => Some(diag.len()),
            _ => None,
        }
    }

    pub fn apply(&self, psi: &WaveFunction) -> Result<WaveFunction, ObservableError> {
        if let Some(expected) = self.fixed_size() {
            if expected != psi.len() {
                return Err(ObservableError::SizeMismatch {
                    expected,
                    got: psi.len(),
                });
            }
        }
        if let LinearOperator::Hamiltonian(h) = self {
            if h.grid() != psi.grid() {
                return Err(KreinError::GridMismatch.into());
            }
        }
        let grid = *psi.grid();
        let s = psi.samples();
        let out = match self {
            LinearOperator::Hamiltonian(h) => h.apply_samples(s),
            LinearOperator::Parity => s.iter().rev().copied().collect(),
            LinearOperator::Position => grid.points().zip(s).map(|(x, z)| z * x).collect(),
            LinearOperator::ImaginaryPosition => grid
                .points()
                .zip(s)
                .map(|(x, z)| z * Complex64::new(0.0, x))
                .collect(),
            LinearOperator::Momentum => {
                let factor = Complex64::new(0.0, -0.5 / grid.spacing());
                let n = s.len();
                let zero = Complex64::new(0.0, 0.0);
                (0..n)
                    .map(|i| {
                        let next = if i + 1 < n { s[i + 1] } else { zero };
                        let prev = if i > 0 { s[i - 1] } else { zero };
                        (next - prev) * factor
                    })
                    .collect()
            }
            LinearOperator::Tridiagonal { lower, diag, upper } => {
                let n = diag.len();
                (0..n)
                    .map(|i| {
                        let mut acc = diag[i] * s[i];
                        if i > 0 {
                            acc += lower[i - 1] * s[i - 1];
                        }
                        if i + 1 < n {
                            acc += upper[i] * s[i + 1];
                        }
                        acc
                    })
                    .collect()
            }
        };
        Ok(WaveFunction::from_samples_unchecked(grid, out))
    }

    /// Tridiagonal matrix of the operator on `grid`; `None` for the parity.
    pub fn to_tridiagonal(
        &self,
        grid: &Grid,
    ) -> Option<(Vec<Complex64>, Vec<Complex64>, Vec<Complex64>)> {
        let n = grid.len();
        let zero = Complex64::new(0.0, 0.0);
        match self {
            LinearOperator::Parity => None,
            LinearOperator::Hamiltonian(h) => {
                let off = vec![Complex64::new(h.offdiag(), 0.0); n - 1];
                Some((off.clone(), h.diag().to_vec(), off))
            }
            LinearOperator::Momentum => {
                let a = 0.5 / grid.spacing();
                Some((
                    vec![Complex64::new(0.0, a); n - 1],
                    vec![zero; n],
                    vec![Complex64::new(0.0, -a); n - 1],
                ))
            }
            LinearOperator::Position => Some((
                vec![zero; n - 1],
                grid.points().map(|x| Complex64::new(x, 0.0)).collect(),
                vec![zero; n - 1],
            )),
            LinearOperator::ImaginaryPosition => Some((
                vec![zero; n - 1],
                grid.points().map(|x| Complex64::new(0.0, x)).collect(),
                vec![zero; n - 1],
            )),
            LinearOperator::Tridiagonal { lower, diag, upper } => {
                Some((lower.clone(), diag.clone(), upper.clone()))
            }
        }
    }

    /// `theta O theta⁻¹`, i.e. `R conj(O) R` as a matrix.
    pub fn theta_conjugate(&self, grid: &Grid) -> LinearOperator {
        match self {
            LinearOperator::Parity => LinearOperator::Parity,
            LinearOperator::Momentum => LinearOperator::Momentum,
            LinearOperator::ImaginaryPosition => LinearOperator::ImaginaryPosition,
            _ => {
                let (lower, diag, upper) = self.to_tridiagonal(grid).expect("tridiagonal operator");
                let n = diag.len();
                LinearOperator::Tridiagonal {
                    lower: (0..n - 1).map(|k| upper[n - 2 - k].conj()).collect(),
                    diag: (0..n).map(|i| diag[n - 1 - i].conj()).collect(),
                    upper: (0..n - 1).map(|k| lower[n - 2 - k].conj()).collect(),
                }
            }
        }
    }

    /// Matrix transpose.
    pub fn transpose(&self, grid: &Grid) -> LinearOperator {
        match self {
            LinearOperator::Parity
            | LinearOperator::Position
            | LinearOperator::ImaginaryPosition
            | LinearOperator::Hamiltonian(_) => self.clone(),
            _ => {
                let (lower, diag, upper) = self.to_tridiagonal(grid).expect("tridiagonal operator");
                LinearOperator::Tridiagonal {
                    lower: upper,
                    diag,
                    upper: lower,
                }
            }
        }
    }

    /// Adjoint in the Krein product: `(psi|O phi) = (O^[*] psi|phi)` with
    /// `O^[*] = (theta O theta⁻¹)ᵀ`. For symmetric matrices (H, `i x`) this
    /// is `theta O theta⁻¹`; the antisymmetric momentum gets an extra sign.
    pub fn krein_adjoint(&self, grid: &Grid) -> LinearOperator {
        self.theta_conjugate(grid).transpose(grid)
    }

    /// Whether `theta O theta⁻¹ = O`.
    pub fn is_theta_invariant(&self, grid: &Grid) -> bool {
        match self {
            LinearOperator::Momentum
            | LinearOperator::ImaginaryPosition
            | LinearOperator::Parity => true,
            LinearOperator::Position => false,
            LinearOperator::Hamiltonian(h) => h.is_discretely_pt_symmetric(),
            LinearOperator::Tridiagonal { .. } => {
                let (l0, d0, u0) = self.to_tridiagonal(grid).expect("tridiagonal");
                let (l1, d1, u1) = self
                    .theta_conjugate(grid)
                    .to_tridiagonal(grid)
                    .expect("tridiagonal");
                let scale = d0
                    .iter()
                    .chain(&l0)
                    .chain(&u0)
                    .map(|z| z.norm())
                    .fold(0.0, f64::max);
                let close = |a: &[Complex64], b: &[Complex64]| {
                    a.iter()
                        .zip(b)
                        .all(|(x, y)| (x - y).norm() <= 1e-14 * (1.0 + scale))
                };
                close(&l0, &l1) && close(&d0, &d1) && close(&u0, &u1)
            }
        }
    }
}

/// `theta O theta⁻¹ psi`, evaluated directly as `theta(O(theta psi))`.
pub fn apply_theta_conjugated(
    op: &LinearOperator,
    psi: &WaveFunction,
) -> Result<WaveFunction, ObservableError> {
    let inner = op.apply(&krein::apply_theta(psi))?;
    Ok(krein::apply_theta(&inner))
}

/// `H O psi - O H psi`.
pub fn commutator_apply(
    hamiltonian: &HamiltonianOp,
    op: &LinearOperator,
    psi: &WaveFunction,
) -> Result<WaveFunction, ObservableError> {
    let h_op = LinearOperator::Hamiltonian(hamiltonian.clone());
    let ho = h_op.apply(&op.apply(psi)?)?;
    let oh = op.apply(&h_op.apply(psi)?)?;
    Ok(&ho - &oh)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurrentProfile {
    pub grid: Grid,
    pub j: Vec<Complex64>,
    /// `max_i |j_{i+1} - j_i| / h`, divided by `max|j| + ||psi||∞²`.
    pub max_variation: f64,
    pub max_abs: f64,
}

/// Central differences inside, second-order one-sided at the ends.
pub fn derivative(samples: &[Complex64], h: f64) -> Vec<Complex64> {
    let n = samples.len();
    let s = samples;
    let mut d = Vec::with_capacity(n);
    for i in 0..n {
        let v = if n < 3 {
            if n == 2 {
                (s[1] - s[0]) / h
            } else {
                Complex64::new(0.0, 0.0)
            }
        } else if i == 0 {
            (s[0] * -3.0 + s[1] * 4.0 - s[2]) / (2.0 * h)
        } else if i == n - 1 {
            (s[n - 1] * 3.0 - s[n - 2] * 4.0 + s[n - 3]) / (2.0 * h)
        } else {
            (s[i + 1] - s[i - 1]) / (2.0 * h)
        };
        d.push(v);
    }
    d
}

/// `j = psi d(partner) - partner d(psi)`.
pub fn current_with_partner(psi: &WaveFunction, partner: &WaveFunction) -> CurrentProfile {
    let grid = *psi.grid();
    let h = grid.spacing();
    let dpsi = derivative(psi.samples(), h);
    let dpartner = derivative(partner.samples(), h);
    let j: Vec<Complex64> = (0..psi.len())
        .map(|i| psi.samples()[i] * dpartner[i] - partner.samples()[i] * dpsi[i])
        .collect();
    let max_abs = j.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let raw_variation = j
        .windows(2)
        .map(|w| (w[1] - w[0]).norm() / h)
        .fold(0.0, f64::max);
    let sup = psi.max_abs();
    CurrentProfile {
        grid,
        j,
        max_variation: raw_variation / (max_abs + sup * sup),
        max_abs,
    }
}

/// `j = psi d(theta psi) - (theta psi) d(psi)`.
pub fn current_density(psi: &WaveFunction) -> CurrentProfile {
    current_with_partner(psi, &krein::apply_theta(psi))
}

/// The same bilinear form built from `psi*` instead of `theta psi`; not
/// conserved when `Im V != 0`.
pub fn conjugate_current(psi: &WaveFunction) -> CurrentProfile {
    current_with_partner(psi, &psi.map(|z| z.conj()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuityReport {
    pub max_dj_dx: f64,
    /// `max|dj/dx| / (||psi||∞² (1 + |E|))`.
    pub scaled_dj_dx: f64,
    pub is_conserved: bool,
    pub max_abs_j: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuityOptions {
    pub real_tol: f64,
    pub cont_tol: f64,
}

impl Default for ContinuityOptions {
    fn default() -> Self {
        ContinuityOptions {
            real_tol: crate::eigen::DEFAULT_REAL_TOL,
            cont_tol: DEFAULT_CONTINUITY_TOL,
        }
    }
}

/// Interior central-difference divergence of a current profile.
pub fn continuity_of(
    profile: &CurrentProfile,
    psi: &WaveFunction,
    energy: Complex64,
    cont_tol: f64,
) -> ContinuityReport {
    let h = profile.grid.spacing();
    let max_dj_dx = profile
        .j
        .windows(3)
        .map(|w| (w[2] - w[0]).norm() / (2.0 * h))
        .fold(0.0, f64::max);
    let sup = psi.max_abs();
    let scale = sup * sup * (1.0 + energy.norm());
    let scaled = if scale > 0.0 {
        max_dj_dx / scale
    } else {
        max_dj_dx
    };
    ContinuityReport {
        max_dj_dx,
        scaled_dj_dx: scaled,
        is_conserved: scaled <= cont_tol,
        max_abs_j: profile.max_abs,
    }
}

pub fn continuity_check(
    pair: &EigenPair,
    options: &ContinuityOptions,
) -> Result<ContinuityReport, ObservableError> {
    if pair.energy.im.abs() > options.real_tol * pair.energy.re.abs().max(1.0) {
        return Err(ObservableError::ComplexEigenvalue(pair.energy));
    }
    let profile = current_density(&pair.psi);
    Ok(continuity_of(
        &profile,
        &pair.psi,
        pair.energy,
        options.cont_tol,
    ))
}

fn krein_diagonal(psi: &WaveFunction, tol: f64) -> Result<f64, ObservableError> {
    let krein = krein::krein_inner(psi, psi)?.re;
    let threshold = tol * krein::hilbert_norm2(psi);
    if krein.abs() <= threshold {
        return Err(ObservableError::NeutralState {
            krein: krein.abs(),
            threshold,
        });
    }
    Ok(krein)
}

/// `s (psi|phi) / (sqrt|(psi|psi)| sqrt|(phi|phi)|)` with `s` the sign of
/// `(psi|psi)`, so a negative-sector state is measured with the positive
/// product `-(.|.)` of its sector and `A(psi, psi) = 1`.
pub fn amplitude(psi: &WaveFunction, phi: &WaveFunction) -> Result<Complex64, ObservableError> {
    if !psi.same_grid(phi) {
        return Err(KreinError::GridMismatch.into());
    }
    let a = krein_diagonal(psi, DEFAULT_NEUTRAL_TOL)?;
    let b = krein_diagonal(phi, DEFAULT_NEUTRAL_TOL)?;
    let value = krein::krein_inner(psi, phi)? * a.signum();
    // sqrt(a²) = |a| exactly, which keeps A(psi, psi) at exactly one
    Ok(value / (a.abs() * b.abs()).sqrt())
}

pub fn transition_amplitude(a: &EigenPair, b: &EigenPair) -> Result<Complex64, ObservableError> {
    amplitude(&a.psi, &b.psi)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorAverage {
    pub value: Complex64,
    /// Operators that are not theta-invariant do not give observables.
    pub observable: bool,
    /// `(psi|psi)`.
    pub denominator: f64,
    /// `<psi|psi> / |(psi|psi)|`; large values mean a nearly neutral state.
    pub conditioning: f64,
}

/// `(psi|O psi) / (psi|psi)`.
pub fn operator_average(
    op: &LinearOperator,
    psi: &WaveFunction,
) -> Result<OperatorAverage, ObservableError> {
    let denominator = krein_diagonal(psi, DEFAULT_NEUTRAL_TOL)?;
    let o_psi = op.apply(psi)?;
    let value = krein::krein_inner(psi, &o_psi)? / denominator;
    Ok(OperatorAverage {
        value,
        observable: op.is_theta_invariant(psi.grid()),
        denominator,
        conditioning: krein::hilbert_norm2(psi) / denominator.abs(),
    })
}
