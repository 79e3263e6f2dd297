//! Discretized Hamiltonian `-d²/dx² + V(x)` and its eigenpairs.
//!
//! The three-point Laplacian on a symmetric Dirichlet grid gives a complex
//! symmetric tridiagonal matrix with `R H R = H*` (`R` the index reversal)
//! whenever `V*(-x) = V(x)`. Eigenvalues come from a complex QL sweep and are
//! polished, together with their eigenvectors, by inverse iteration with the
//! bilinear Rayleigh quotient `psiᵀ H psi / psiᵀ psi`.

mod ql;
mod shooting;

pub use ql::{symmetric_tridiagonal_eigenvalues, QlFailure};
pub use shooting::{
    matching_wronskian, refine_eigenvalue_shooting, ShootingOptions, ShootingResult,
};

use num_complex::Complex64;
use thiserror::Error;

use crate::grid::{Grid, WaveFunction};
use crate::krein::{self, KreinError, DEFAULT_NEUTRAL_TOL};
use crate::potential::{validate_pt, EvalError, PotentialExpr, PtValidation, DEFAULT_PT_TOL};
use crate::tridiag::TridiagonalLu;

pub const DEFAULT_REAL_TOL: f64 = 1e-6;
pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-8;
pub const DEFAULT_MODE_TOL: f64 = 1e-6;
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-8;

const MAX_INVERSE_ITERATIONS: usize = 12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("potential is not PT symmetric on the grid (max violation {})", .0.max_violation)]
    NotPTSymmetric(PtValidation),
    #[error(transparent)]
    Potential(#[from] EvalError),
    #[error("eigenvalue iteration failed to converge for pair {index}")]
    ConvergenceFailure { index: usize },
    #[error("requested {requested} states but the grid has {available} points")]
    TooManyStates { requested: usize, available: usize },
    #[error("shooting did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },
    #[error("shooting left the trust region: |{energy} - {start}| > {trust_radius}")]
    BasinEscape {
        energy: Complex64,
        start: Complex64,
        trust_radius: f64,
    },
    #[error("eigenvector is neutral, (psi|psi) cannot be scaled to ±1")]
    NeutralEigenvector,
    #[error(transparent)]
    Krein(#[from] KreinError),
}

/// Tridiagonal `H = -d²/dx² + V` on a grid.
#[derive(Debug, Clone)]
pub struct HamiltonianOp {
    grid: Grid,
    diag: Vec<Complex64>,
    offdiag: f64,
    potential: PotentialExpr,
}

impl HamiltonianOp {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn diag(&self) -> &[Complex64] {
        &self.diag
    }

    pub fn offdiag(&self) -> f64 {
        self.offdiag
    }

    pub fn potential(&self) -> &PotentialExpr {
        &self.potential
    }

    /// `(R H R)_ii = conj(H_ii)`, checked exactly.
    pub fn is_discretely_pt_symmetric(&self) -> bool {
        let n = self.diag.len();
        (0..n).all(|i| self.diag[n - 1 - i] == self.diag[i].conj())
    }

    pub fn apply_samples(&self, x: &[Complex64]) -> Vec<Complex64> {
        let n = self.diag.len();
        assert_eq!(x.len(), n);
        let t = self.offdiag;
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * x[i];
                if i > 0 {
                    s += x[i - 1] * t;
                }
                if i + 1 < n {
                    s += x[i + 1] * t;
                }
                s
            })
            .collect()
    }

    pub fn apply(&self, psi: &WaveFunction) -> WaveFunction {
        assert_eq!(
            psi.grid(),
            &self.grid,
            "wavefunction grid differs from the Hamiltonian grid"
        );
        WaveFunction::from_samples_unchecked(self.grid, self.apply_samples(psi.samples()))
    }

    /// `||H psi - E psi||₂ / ||psi||₂` on the raw samples.
    pub fn residual(&self, energy: Complex64, samples: &[Complex64]) -> f64 {
        let hx = self.apply_samples(samples);
        let num: f64 = hx
            .iter()
            .zip(samples)
            .map(|(a, b)| (a - energy * b).norm_sqr())
            .sum();
        let den: f64 = samples.iter().map(|z| z.norm_sqr()).sum();
        (num / den).sqrt()
    }

    /// LU factors of `a I + b H`.
    pub(crate) fn factor_shifted(
        &self,
        a: Complex64,
        b: Complex64,
    ) -> Result<TridiagonalLu, crate::tridiag::SingularPivot> {
        let n = self.diag.len();
        let diag: Vec<Complex64> = self.diag.iter().map(|&d| a + b * d).collect();
        let off = vec![b * self.offdiag; n - 1];
        TridiagonalLu::factor(&off, &diag, &off)
    }
}

pub fn build_hamiltonian(
    potential: &PotentialExpr,
    grid: &Grid,
) -> Result<HamiltonianOp, SolverError> {
    let check = validate_pt(potential, grid, DEFAULT_PT_TOL);
    if !check.pt_symmetric {
        return Err(SolverError::NotPTSymmetric(check));
    }
    let h = grid.spacing();
    let kinetic = 2.0 / (h * h);
    let diag = potential
        .sample(grid)?
        .into_iter()
        .map(|v| v + kinetic)
        .collect();
    Ok(HamiltonianOp {
        grid: *grid,
        diag,
        offdiag: -1.0 / (h * h),
        potential: potential.clone(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub energy: Complex64,
    pub psi: WaveFunction,
    /// `||H psi - E psi||₂ / ||psi||₂`.
    pub residual: f64,
    /// PT phase with `theta psi = e^{i omega} psi`, when `psi` is a PT eigenmode.
    pub omega: Option<f64>,
    /// `min_omega ||theta psi - e^{i omega} psi|| / ||psi||` of the stored vector.
    pub mode_defect: Option<f64>,
    /// Sign of `(psi|psi)` after Krein normalization.
    pub krein_sign: Option<i8>,
    /// `|Im E| > real_tol * max(1, |Re E|)`.
    pub complex_flag: bool,
    /// Residual met the requested tolerance.
    pub converged: bool,
}

/// Lowest-`Re E` eigenpairs, sorted by `(Re E, Im E)`.
pub fn solve_spectrum(
    hamiltonian: &HamiltonianOp,
    k: usize,
    real_tol: f64,
    residual_tol: f64,
) -> Result<Vec<EigenPair>, SolverError> {
    let n = hamiltonian.diag.len();
    if k > n {
        return Err(SolverError::TooManyStates {
            requested: k,
            available: n,
        });
    }
    let off = vec![Complex64::new(hamiltonian.offdiag, 0.0); n - 1];
    let mut shifts = symmetric_tridiagonal_eigenvalues(&hamiltonian.diag, &off)
        .map_err(|f| SolverError::ConvergenceFailure { index: f.index })?;
    shifts.sort_by(lexicographic);
    shifts.truncate(k);

    let mut pairs = Vec::with_capacity(k);
    for (index, &shift) in shifts.iter().enumerate() {
        let (energy, samples, residual) = inverse_iteration(hamiltonian, shift, residual_tol)
            .ok_or(SolverError::ConvergenceFailure { index })?;
        let complex_flag = energy.im.abs() > real_tol * energy.re.abs().max(1.0);
        pairs.push(EigenPair {
            energy,
            psi: WaveFunction::from_samples_unchecked(hamiltonian.grid, samples),
            residual,
            omega: None,
            mode_defect: None,
            krein_sign: None,
            complex_flag,
            converged: residual <= residual_tol,
        });
    }
    pairs.sort_by(|a, b| lexicographic(&a.energy, &b.energy));
    Ok(pairs)
}

fn lexicographic(a: &Complex64, b: &Complex64) -> std::cmp::Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// Shifted inverse iteration, switching to Rayleigh-quotient shifts once the
/// vector has settled. Returns `None` only when every factorization fails.
fn inverse_iteration(
    hamiltonian: &HamiltonianOp,
    shift: Complex64,
    residual_tol: f64,
) -> Option<(Complex64, Vec<Complex64>, f64)> {
    let n = hamiltonian.diag.len();
    let scale = 1.0
        + hamiltonian
            .diag
            .iter()
            .map(|d| d.norm())
            .fold(0.0, f64::max)
        + 2.0 * hamiltonian.offdiag.abs();
    // deterministic start with components along every mode
    let mut v: Vec<Complex64> = (0..n)
        .map(|i| {
            Complex64::new(
                1.0 + 0.3 * (0.7 * i as f64).sin(),
                0.2 * (1.3 * i as f64).cos(),
            )
        })
        .collect();
    let mut sigma = shift;
    let mut best: Option<(Complex64, Vec<Complex64>, f64)> = None;
    for iteration in 0..MAX_INVERSE_ITERATIONS {
        let lu = factor_near(hamiltonian, sigma, scale)?;
        lu.solve_in_place(&mut v);
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return best;
        }
        v.iter_mut().for_each(|z| *z /= norm);
        let energy = rayleigh_quotient(hamiltonian, &v);
        let residual = hamiltonian.residual(energy, &v);
        if best.as_ref().is_none_or(|b| residual < b.2) {
            best = Some((energy, v.clone(), residual));
        }
        if residual <= residual_tol && iteration >= 1 {
            break;
        }
        if iteration >= 1 {
            sigma = energy;
        }
    }
    best
}

fn factor_near(hamiltonian: &HamiltonianOp, sigma: Complex64, scale: f64) -> Option<TridiagonalLu> {
    let one = Complex64::new(1.0, 0.0);
    let mut s = sigma;
    for attempt in 0..4 {
        if let Ok(lu) = hamiltonian.factor_shifted(-s, one) {
            return Some(lu);
        }
        s = sigma + Complex64::new(scale * f64::EPSILON * 10f64.powi(attempt), 0.0);
    }
    None
}

fn rayleigh_quotient(hamiltonian: &HamiltonianOp, v: &[Complex64]) -> Complex64 {
    let hv = hamiltonian.apply_samples(v);
    let num: Complex64 = v.iter().zip(&hv).map(|(a, b)| a * b).sum();
    let den: Complex64 = v.iter().map(|a| a * a).sum();
    let total: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    if den.norm() > 1e-8 * total {
        num / den
    } else {
        // nearly isotropic vector: fall back to the Hermitian quotient
        let num: Complex64 = v.iter().zip(&hv).map(|(a, b)| a.conj() * b).sum();
        num / total
    }
}

/// Best PT phase of `psi`: returns `(omega, ||theta psi - e^{i omega} psi|| / ||psi||)`.
pub fn pt_phase(psi: &WaveFunction) -> (f64, f64) {
    let theta = krein::apply_theta(psi);
    let overlap: Complex64 = psi
        .samples()
        .iter()
        .zip(theta.samples())
        .map(|(a, b)| a.conj() * b)
        .sum();
    let omega = overlap.arg();
    let phase = Complex64::from_polar(1.0, omega);
    let defect: f64 = theta
        .samples()
        .iter()
        .zip(psi.samples())
        .map(|(t, p)| (t - phase * p).norm_sqr())
        .sum::<f64>()
        .sqrt();
    (omega, defect / psi.l2())
}

/// Gauge-fixes a PT eigenmode to `theta psi = psi` and scales it to
/// `(psi|psi) = ±1`; a vector without a PT phase is only scaled to
/// `<psi|psi> = 1`.
pub fn normalize_and_phase_fix(pair: &EigenPair, mode_tol: f64) -> Result<EigenPair, SolverError> {
    let (omega, defect) = pt_phase(&pair.psi);
    let mut out = pair.clone();
    if defect > mode_tol {
        let norm = krein::hilbert_norm2(&pair.psi).sqrt();
        out.psi = pair.psi.scale(Complex64::new(1.0 / norm, 0.0));
        out.omega = None;
        out.mode_defect = Some(defect);
        out.krein_sign = None;
        return Ok(out);
    }
    // theta(c psi) = c* e^{i omega} psi, so c = e^{i omega / 2} makes the mode theta-fixed
    let rotated = pair.psi.scale(Complex64::from_polar(1.0, 0.5 * omega));
    let krein = krein::krein_inner(&rotated, &rotated)?.re;
    let hilbert = krein::hilbert_norm2(&rotated);
    if krein.abs() < DEFAULT_NEUTRAL_TOL * hilbert {
        return Err(SolverError::NeutralEigenvector);
    }
    // fix the remaining real sign so the largest real sample is positive
    let lead = rotated
        .samples()
        .iter()
        .max_by(|a, b| a.re.abs().total_cmp(&b.re.abs()))
        .map(|z| z.re)
        .unwrap_or(1.0);
    let sign = if lead < 0.0 { -1.0 } else { 1.0 };
    let psi = rotated.scale(Complex64::new(sign / krein.abs().sqrt(), 0.0));
    let (omega_fixed, defect_fixed) = pt_phase(&psi);
    out.psi = psi;
    out.omega = Some(omega_fixed);
    out.mode_defect = Some(defect_fixed);
    out.krein_sign = Some(if krein > 0.0 { 1 } else { -1 });
    Ok(out)
}

/// Pairwise product matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl GramMatrix {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Complex64]> {
        self.entries.chunks(self.dim.max(1))
    }

    /// Largest `|G_ab|` with `a != b`, skipping pairs inside a cluster.
    pub fn max_offdiag_excluding(&self, clusters: &[Vec<usize>]) -> f64 {
        let same_cluster =
            |a: usize, b: usize| clusters.iter().any(|c| c.contains(&a) && c.contains(&b));
        let mut worst = 0.0_f64;
        for a in 0..self.dim {
            for b in 0..self.dim {
                if a != b && !same_cluster(a, b) {
                    worst = worst.max(self.get(a, b).norm());
                }
            }
        }
        worst
    }

    pub fn max_offdiag(&self) -> f64 {
        self.max_offdiag_excluding(&[])
    }
}

fn product_matrix(
    pairs: &[EigenPair],
    product: impl Fn(&WaveFunction, &WaveFunction) -> Result<Complex64, KreinError>,
) -> Result<GramMatrix, SolverError> {
    let dim = pairs.len();
    let mut entries = Vec::with_capacity(dim * dim);
    for a in pairs {
        for b in pairs {
            entries.push(product(&a.psi, &b.psi)?);
        }
    }
    Ok(GramMatrix { dim, entries })
}

/// `G_ab = (psi_a|psi_b)`.
pub fn gram_matrix(pairs: &[EigenPair]) -> Result<GramMatrix, SolverError> {
    product_matrix(pairs, krein::krein_inner)
}

/// `G_ab = <psi_a|psi_b>`, the product that fails to orthogonalize PT modes.
pub fn hilbert_gram_matrix(pairs: &[EigenPair]) -> Result<GramMatrix, SolverError> {
    product_matrix(pairs, krein::hilbert_inner)
}

/// Groups of indices whose energies lie within `cluster_tol * max(1, |E|)`.
/// Only groups with at least two members are returned.
pub fn energy_clusters(pairs: &[EigenPair], cluster_tol: f64) -> Vec<Vec<usize>> {
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    let mut assigned = vec![false; pairs.len()];
    for a in 0..pairs.len() {
        if assigned[a] {
            continue;
        }
        let mut group = vec![a];
        for b in a + 1..pairs.len() {
            let scale = pairs[a].energy.norm().max(1.0);
            if !assigned[b] && (pairs[a].energy - pairs[b].energy).norm() < cluster_tol * scale {
                group.push(b);
                assigned[b] = true;
            }
        }
        if group.len() > 1 {
            clusters.push(group);
        }
    }
    clusters
}
