//! The `report` command: every diagnostic in one JSON document.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use krein_pt::dynamics::{ehrenfest_convergence, ehrenfest_residual, evolve};
use krein_pt::eigen::{
    gram_matrix, hilbert_gram_matrix, pt_phase, refine_eigenvalue_shooting, EigenPair,
    ShootingOptions,
};
use krein_pt::krein::{self, Signature, DEFAULT_NEUTRAL_TOL};
use krein_pt::observables::{
    amplitude, conjugate_current, continuity_check, continuity_of, operator_average,
    ContinuityOptions, LinearOperator, DEFAULT_CONTINUITY_TOL,
};
use krein_pt::{Complex64, Grid, WaveFunction};

use crate::commands::{dynamics_run, observable, solve, Solved};
use crate::config::{DomainConfig, RunConfig};
use crate::error::CliError;

pub const SHOOTING_AGREEMENT_TOL: f64 = 1e-5;
pub const CURRENT_TOL: f64 = 1e-6;
pub const CONTROL_FACTOR: f64 = 1e3;
pub const DIAGONAL_FORM_TOL: f64 = 1e-8;
pub const IDENTITY_TOL: f64 = 1e-12;
pub const MOMENTUM_IDENTITY_TOL: f64 = 1e-8;
pub const AMPLITUDE_TOL: f64 = 1e-12;
pub const CROSS_AMPLITUDE_TOL: f64 = 1e-8;
pub const KREIN_DRIFT_TOL: f64 = 1e-10;
pub const ENERGY_DRIFT_TOL: f64 = 1e-6;
pub const ORDER_WINDOW: (f64, f64) = (1.7, 2.3);
pub const RATIO_WINDOW: (f64, f64) = (3.5, 4.5);
/// Random wavefunctions used for the Krein-space identities.
pub const RANDOM_SAMPLES: usize = 200;
const SEED: u64 = 0x6b7265696e;

#[derive(Debug, Clone, Serialize)]
pub struct StateSummary {
    pub index: usize,
    pub re_energy: f64,
    pub im_energy: f64,
    pub residual: f64,
    pub omega: Option<f64>,
    pub krein_sign: Option<i8>,
    pub complex_flag: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ShootingSummary {
    pub e0_diagonalization: [f64; 2],
    pub e0_shooting: [f64; 2],
    pub gap: f64,
    /// Same comparison on the grid with half the spacing.
    pub refined_points: usize,
    pub refined_gap: f64,
    pub iterations: usize,
    pub relative_wronskian: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GramSummary {
    pub max_gram_offdiag: f64,
    pub max_hilbert_offdiag: f64,
    pub diagonal: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ModeSummary {
    pub max_mode_defect: f64,
    pub max_even_real_defect: f64,
    pub max_odd_imag_defect: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CurrentSummary {
    pub max_scaled_dj_dx: f64,
    pub max_abs_j: f64,
    pub min_control_scaled_dj_dx: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AmplitudeSummary {
    pub max_same_signature: f64,
    pub max_diagonal_defect: f64,
    pub max_cross_signature: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentitySummary {
    pub samples: usize,
    pub max_parity_defect: f64,
    pub max_hilbert_defect: f64,
    pub schwarz_violations: usize,
    pub max_momentum_defect: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuperselectionSummary {
    /// `None` when the computed states share one signature.
    pub mixed_rejected: Option<bool>,
    pub neutral_vector_neutrality: f64,
    pub neutral_vector_classified_neutral: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct EhrenfestSummary {
    pub observable: &'static str,
    pub states: Vec<usize>,
    pub max_residual: f64,
    pub convergence_order: Option<f64>,
    pub rounding_bound: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DynamicsSummary {
    pub domain: DomainConfig,
    pub initial_states: Vec<usize>,
    pub steps: usize,
    pub krein_drift: f64,
    pub hilbert_drift: f64,
    pub energy_drift: f64,
    pub ehrenfest: Vec<EhrenfestSummary>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceSummary {
    pub grid_points: [usize; 3],
    pub eigenvalue_ratios: Vec<f64>,
    pub dt_values: [f64; 3],
    pub phase_errors: [f64; 3],
    pub phase_error_ratios: [f64; 2],
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub potential: String,
    pub domain: DomainConfig,
    pub spectrum: Vec<StateSummary>,
    pub max_im_ratio: f64,
    pub shooting: Option<ShootingSummary>,
    pub gram: GramSummary,
    pub modes: ModeSummary,
    pub currents: CurrentSummary,
    pub max_diagonal_form_imag: f64,
    pub amplitudes: AmplitudeSummary,
    pub identities: IdentitySummary,
    pub superselection: SuperselectionSummary,
    pub dynamics: DynamicsSummary,
    pub convergence: ConvergenceSummary,
    pub checks: BTreeMap<&'static str, bool>,
    pub all_passed: bool,
}

pub fn run_report(cfg: &RunConfig) -> Result<String, CliError> {
    let report = build_report(cfg)?;
    let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
    text.push('\n');
    Ok(text)
}

fn within(v: f64, window: (f64, f64)) -> bool {
    (window.0..=window.1).contains(&v)
}

pub fn build_report(cfg: &RunConfig) -> Result<Report, CliError> {
    let solved = solve(cfg, &cfg.domain, cfg.solver.num_states)?;
    let pairs = &solved.pairs;
    let real: Vec<&EigenPair> = pairs.iter().filter(|p| !p.complex_flag).collect();
    let mut checks = BTreeMap::new();

    let spectrum: Vec<StateSummary> = pairs
        .iter()
        .enumerate()
        .map(|(index, p)| StateSummary {
            index,
            re_energy: p.energy.re,
            im_energy: p.energy.im,
            residual: p.residual,
            omega: p.omega,
            krein_sign: p.krein_sign,
            complex_flag: p.complex_flag,
        })
        .collect();
    let max_im_ratio = pairs
        .iter()
        .map(|p| p.energy.im.abs() / p.energy.re.abs())
        .fold(0.0, f64::max);
    checks.insert("spectrum_real", max_im_ratio < cfg.solver.real_tol);

    let shooting = if cfg.solver.shooting.enabled {
        let summary = shooting_summary(cfg, &solved)?;
        checks.insert(
            "shooting_agreement",
            summary.refined_gap < SHOOTING_AGREEMENT_TOL,
        );
        Some(summary)
    } else {
        None
    };

    let owned: Vec<EigenPair> = real.iter().map(|p| (*p).clone()).collect();
    let krein_gram = gram_matrix(&owned)?;
    let hilbert_gram = hilbert_gram_matrix(&owned)?;
    let gram = GramSummary {
        max_gram_offdiag: krein_gram.max_offdiag(),
        max_hilbert_offdiag: hilbert_gram.max_offdiag(),
        diagonal: (0..krein_gram.dim())
            .map(|k| krein_gram.get(k, k).re)
            .collect(),
    };
    checks.insert(
        "krein_orthogonality",
        gram.max_gram_offdiag < cfg.solver.orthogonality_tol,
    );

    let modes = mode_summary(&real);
    checks.insert(
        "pt_mode_structure",
        modes
            .max_mode_defect
            .max(modes.max_even_real_defect)
            .max(modes.max_odd_imag_defect)
            < 1e-6,
    );

    let currents = current_summary(cfg, &real)?;
    checks.insert(
        "current_conservation",
        currents.max_scaled_dj_dx < CURRENT_TOL && currents.max_abs_j < CURRENT_TOL,
    );
    checks.insert(
        "current_control_fails",
        currents.min_control_scaled_dj_dx > CONTROL_FACTOR * DEFAULT_CONTINUITY_TOL,
    );

    let potential = LinearOperator::potential_of(&solved.hamiltonian);
    let mut max_diagonal_form_imag = 0.0_f64;
    for p in &real {
        let v_psi = potential.apply(&p.psi)?;
        let diag = krein::krein_inner(&p.psi, &v_psi)?;
        max_diagonal_form_imag =
            max_diagonal_form_imag.max(diag.im.abs() / krein::hilbert_norm2(&p.psi));
    }
    checks.insert(
        "diagonal_forms_real",
        max_diagonal_form_imag < DIAGONAL_FORM_TOL,
    );

    let amplitudes = amplitude_summary(&real)?;
    checks.insert(
        "amplitude_contract",
        amplitudes.max_same_signature <= 1.0 + AMPLITUDE_TOL
            && amplitudes.max_diagonal_defect == 0.0
            && amplitudes.max_cross_signature < CROSS_AMPLITUDE_TOL,
    );

    let identities = identity_summary(*solved.hamiltonian.grid())?;
    checks.insert(
        "krein_identities",
        identities.max_parity_defect <= IDENTITY_TOL
            && identities.max_hilbert_defect <= IDENTITY_TOL
            && identities.schwarz_violations == 0
            && identities.max_momentum_defect <= MOMENTUM_IDENTITY_TOL,
    );

    let superselection = superselection_summary(&real, *solved.hamiltonian.grid())?;
    checks.insert(
        "superselection",
        superselection.mixed_rejected != Some(false)
            && superselection.neutral_vector_classified_neutral
            && superselection.neutral_vector_neutrality < DEFAULT_NEUTRAL_TOL,
    );

    let dynamics = dynamics_summary(cfg)?;
    checks.insert(
        "krein_conservation",
        dynamics.krein_drift < KREIN_DRIFT_TOL && dynamics.energy_drift < ENERGY_DRIFT_TOL,
    );
    let ehrenfest_ok =
        dynamics
            .ehrenfest
            .iter()
            .all(|e| match (e.convergence_order, e.rounding_bound) {
                (Some(order), _) => within(order, ORDER_WINDOW),
                (None, Some(bound)) => e.max_residual < bound,
                (None, None) => false,
            });
    checks.insert("ehrenfest", ehrenfest_ok);

    let convergence = convergence_summary(cfg)?;
    checks.insert(
        "grid_convergence",
        convergence
            .eigenvalue_ratios
            .iter()
            .all(|&r| within(r, RATIO_WINDOW)),
    );
    checks.insert(
        "time_step_convergence",
        convergence
            .phase_error_ratios
            .iter()
            .all(|&r| within(r, RATIO_WINDOW)),
    );

    let all_passed = checks.values().all(|&ok| ok);
    Ok(Report {
        potential: cfg.potential.clone(),
        domain: cfg.domain,
        spectrum,
        max_im_ratio,
        shooting,
        gram,
        modes,
        currents,
        max_diagonal_form_imag,
        amplitudes,
        identities,
        superselection,
        dynamics,
        convergence,
        checks,
        all_passed,
    })
}

fn shooting_options(cfg: &RunConfig) -> ShootingOptions {
    ShootingOptions {
        newton_tol: cfg.solver.shooting.newton_tol,
        max_iter: cfg.solver.shooting.max_iter,
        ..ShootingOptions::default()
    }
}

fn shooting_summary(cfg: &RunConfig, solved: &Solved) -> Result<ShootingSummary, CliError> {
    let options = shooting_options(cfg);
    let grid = *solved.hamiltonian.grid();
    let e0 = solved.pairs[0].energy;
    let shot = refine_eigenvalue_shooting(&cfg.expr, e0, &grid, &options)?;
    let refined = grid.refined();
    let fine = solve(
        cfg,
        &DomainConfig {
            half_width: refined.half_width(),
            points: refined.len(),
        },
        1,
    )?;
    let e0_fine = fine.pairs[0].energy;
    let shot_fine = refine_eigenvalue_shooting(&cfg.expr, e0_fine, &refined, &options)?;
    Ok(ShootingSummary {
        e0_diagonalization: [e0.re, e0.im],
        e0_shooting: [shot.energy.re, shot.energy.im],
        gap: (shot.energy - e0).norm(),
        refined_points: refined.len(),
        refined_gap: (shot_fine.energy - e0_fine).norm(),
        iterations: shot.iterations,
        relative_wronskian: shot.relative_wronskian,
    })
}

fn mode_summary(real: &[&EigenPair]) -> ModeSummary {
    let mut summary = ModeSummary {
        max_mode_defect: 0.0,
        max_even_real_defect: 0.0,
        max_odd_imag_defect: 0.0,
    };
    for p in real {
        let (_, defect) = pt_phase(&p.psi);
        summary.max_mode_defect = summary.max_mode_defect.max(defect);
        let s = p.psi.samples();
        let n = s.len();
        for i in 0..n {
            let m = s[n - 1 - i];
            summary.max_even_real_defect = summary.max_even_real_defect.max((s[i].re - m.re).abs());
            summary.max_odd_imag_defect = summary.max_odd_imag_defect.max((s[i].im + m.im).abs());
        }
    }
    summary
}

fn current_summary(cfg: &RunConfig, real: &[&EigenPair]) -> Result<CurrentSummary, CliError> {
    let options = ContinuityOptions {
        real_tol: cfg.solver.real_tol,
        ..ContinuityOptions::default()
    };
    let mut summary = CurrentSummary {
        max_scaled_dj_dx: 0.0,
        max_abs_j: 0.0,
        min_control_scaled_dj_dx: f64::INFINITY,
    };
    for p in real {
        let report = continuity_check(p, &options)?;
        summary.max_scaled_dj_dx = summary.max_scaled_dj_dx.max(report.scaled_dj_dx);
        summary.max_abs_j = summary.max_abs_j.max(report.max_abs_j);
        let control = continuity_of(
            &conjugate_current(&p.psi),
            &p.psi,
            p.energy,
            options.cont_tol,
        );
        summary.min_control_scaled_dj_dx =
            summary.min_control_scaled_dj_dx.min(control.scaled_dj_dx);
    }
    Ok(summary)
}

fn amplitude_summary(real: &[&EigenPair]) -> Result<AmplitudeSummary, CliError> {
    let mut summary = AmplitudeSummary {
        max_same_signature: 0.0,
        max_diagonal_defect: 0.0,
        max_cross_signature: 0.0,
    };
    for (a, pa) in real.iter().enumerate() {
        for (b, pb) in real.iter().enumerate() {
            let amp = amplitude(&pa.psi, &pb.psi)?;
            if a == b {
                summary.max_diagonal_defect = summary
                    .max_diagonal_defect
                    .max((amp - Complex64::new(1.0, 0.0)).norm());
            } else if pa.krein_sign == pb.krein_sign {
                summary.max_same_signature = summary.max_same_signature.max(amp.norm());
            } else {
                summary.max_cross_signature = summary.max_cross_signature.max(amp.norm());
            }
        }
    }
    Ok(summary)
}

/// Complex cubic polynomial times a Gaussian of random width and centre.
fn random_state(grid: Grid, rng: &mut ChaCha8Rng) -> WaveFunction {
    let coeffs: Vec<Complex64> = (0..4)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let width = rng.gen_range(0.5..2.0);
    let centre = rng.gen_range(-1.0..1.0);
    WaveFunction::from_fn(grid, |x| {
        let poly = coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, c| acc * x + c);
        poly * (-(x - centre) * (x - centre) / (2.0 * width * width)).exp()
    })
    .expect("finite samples")
}

fn identity_summary(grid: Grid) -> Result<IdentitySummary, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut summary = IdentitySummary {
        samples: RANDOM_SAMPLES,
        max_parity_defect: 0.0,
        max_hilbert_defect: 0.0,
        schwarz_violations: 0,
        max_momentum_defect: 0.0,
    };
    for _ in 0..RANDOM_SAMPLES {
        let psi = random_state(grid, &mut rng);
        let phi = random_state(grid, &mut rng);
        let scale = (krein::hilbert_norm2(&psi) * krein::hilbert_norm2(&phi)).sqrt();

        let (plus, minus) = krein::parity_decompose(&psi);
        let j_psi = &plus - &minus;
        let parity = krein::apply_parity(&psi);
        summary.max_parity_defect = summary
            .max_parity_defect
            .max((&j_psi - &parity).max_abs() / psi.max_abs());

        let recovered = krein::krein_inner(&parity, &phi)?;
        let hilbert = krein::hilbert_inner(&psi, &phi)?;
        summary.max_hilbert_defect = summary
            .max_hilbert_defect
            .max((recovered - hilbert).norm() / scale);

        let (phi_plus, phi_minus) = krein::parity_decompose(&phi);
        for (x, y) in [(&plus, &phi_plus), (&minus, &phi_minus)] {
            let xy = krein::krein_inner(x, y)?.norm_sqr();
            let xx = krein::krein_inner(x, x)?.re.abs();
            let yy = krein::krein_inner(y, y)?.re.abs();
            if xy > xx * yy * (1.0 + 1e-12) {
                summary.schwarz_violations += 1;
            }
        }

        let momentum = krein::momentum_krein_inner(&psi, &phi)?;
        let position = krein::krein_inner(&psi, &phi)?;
        summary.max_momentum_defect = summary
            .max_momentum_defect
            .max((momentum - position).norm() / scale);
    }
    Ok(summary)
}

fn superselection_summary(
    real: &[&EigenPair],
    grid: Grid,
) -> Result<SuperselectionSummary, CliError> {
    let positive = real.iter().find(|p| p.krein_sign == Some(1));
    let negative = real.iter().find(|p| p.krein_sign == Some(-1));
    let mixed_rejected = match (positive, negative) {
        (Some(a), Some(b)) => {
            let one = Complex64::new(1.0, 0.0);
            let check = krein::validate_superposition(
                &[(one, a.psi.clone()), (one, b.psi.clone())],
                DEFAULT_NEUTRAL_TOL,
            )?;
            Some(!check.admissible)
        }
        _ => None,
    };
    let neutral = WaveFunction::from_real_fn(grid, |x| (1.0 + 2.0 * x) * (-x * x).exp())
        .expect("finite samples");
    let report = krein::classify_vector(&neutral, DEFAULT_NEUTRAL_TOL)?;
    Ok(SuperselectionSummary {
        mixed_rejected,
        neutral_vector_neutrality: report.neutrality(),
        neutral_vector_classified_neutral: report.signature == Signature::Neutral,
    })
}

fn dynamics_summary(cfg: &RunConfig) -> Result<DynamicsSummary, CliError> {
    let d = &cfg.dynamics;
    let (solved, traj) = dynamics_run(cfg, &d.initial_states)?;
    let h = &solved.hamiltonian;
    let h_op = LinearOperator::Hamiltonian(h.clone());
    let e_start = operator_average(&h_op, &traj.states[0])?.value;
    let mut energy_drift = 0.0_f64;
    for state in &traj.states {
        energy_drift = energy_drift.max((operator_average(&h_op, state)?.value - e_start).norm());
    }

    let mut ehrenfest = Vec::new();
    // [H, H] = 0: both sides vanish and the residual is rounding noise
    let report = ehrenfest_residual(&traj, h, &h_op)?;
    let spacing = h.grid().spacing();
    let norm = h.diag().iter().map(|z| z.norm()).fold(0.0, f64::max) + 2.0 / (spacing * spacing);
    ehrenfest.push(EhrenfestSummary {
        observable: "hamiltonian",
        states: d.initial_states.clone(),
        max_residual: report.max_residual,
        convergence_order: None,
        rounding_bound: Some(100.0 * f64::EPSILON * norm / traj.sample_spacing()),
    });

    let moving = moving_superposition(cfg)?;
    for label in ["momentum", "i_x"] {
        let op = observable(label, h);
        let (states, psi0, hamiltonian) = &moving;
        let conv = ehrenfest_convergence(psi0, hamiltonian, &op, d.dt, d.t_final, d.stride)?;
        ehrenfest.push(EhrenfestSummary {
            observable: op.label(),
            states: states.clone(),
            max_residual: conv.max_residual,
            convergence_order: Some(conv.convergence_order),
            rounding_bound: None,
        });
    }

    Ok(DynamicsSummary {
        domain: d.domain,
        initial_states: d.initial_states.clone(),
        steps: (d.t_final / d.dt).round() as usize,
        krein_drift: traj.krein_drift(),
        hilbert_drift: traj.hilbert_drift(),
        energy_drift,
        ehrenfest,
    })
}

/// Ground state plus the next state of the same signature, so averages move.
fn moving_superposition(
    cfg: &RunConfig,
) -> Result<(Vec<usize>, WaveFunction, krein_pt::eigen::HamiltonianOp), CliError> {
    let solved = solve(cfg, &cfg.dynamics.domain, 4.min(cfg.dynamics.domain.points))?;
    let sign = solved.pairs[0].krein_sign;
    let partner = (1..solved.pairs.len())
        .find(|&k| solved.pairs[k].krein_sign == sign && !solved.pairs[k].complex_flag)
        .ok_or_else(|| {
            CliError::numerical(
                "NoPartnerState",
                "no second state shares the ground-state signature",
            )
        })?;
    let states = vec![0, partner];
    let psi0 = crate::commands::initial_state(&solved.pairs, &states)?;
    Ok((states, psi0, solved.hamiltonian))
}

fn convergence_summary(cfg: &RunConfig) -> Result<ConvergenceSummary, CliError> {
    let coarse = Grid::new(cfg.domain.half_width, cfg.domain.points)
        .map_err(|e| CliError::validation("InvalidGrid", e.to_string()))?;
    let grids = [coarse, coarse.refined(), coarse.refined().refined()];
    let k = cfg.solver.num_states.min(3);
    let energies = grids
        .iter()
        .map(|g| {
            let domain = DomainConfig {
                half_width: g.half_width(),
                points: g.len(),
            };
            solve(cfg, &domain, k).map(|s| s.pairs.iter().map(|p| p.energy).collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>, _>>()?;
    let eigenvalue_ratios = (0..k)
        .map(|i| {
            (energies[0][i] - energies[1][i]).norm() / (energies[1][i] - energies[2][i]).norm()
        })
        .collect();

    let d = &cfg.dynamics;
    let solved = solve(cfg, &d.domain, 1)?;
    let ground = &solved.pairs[0];
    let dt_values = [d.dt, d.dt / 2.0, d.dt / 4.0];
    let mut phase_errors = [0.0; 3];
    for (slot, &dt) in phase_errors.iter_mut().zip(&dt_values) {
        let steps = (d.t_final / dt).round() as usize;
        let traj = evolve(&ground.psi, &solved.hamiltonian, dt, d.t_final, steps)?;
        let last = traj.states.last().expect("final state stored");
        let t = traj.times.last().copied().unwrap_or(d.t_final);
        let overlap =
            krein::krein_inner(last, &ground.psi)? / krein::krein_inner(&ground.psi, &ground.psi)?;
        let exact = (Complex64::new(0.0, -t) * ground.energy).exp();
        *slot = (overlap - exact).norm();
    }
    Ok(ConvergenceSummary {
        grid_points: [grids[0].len(), grids[1].len(), grids[2].len()],
        eigenvalue_ratios,
        dt_values,
        phase_errors,
        phase_error_ratios: [
            phase_errors[0] / phase_errors[1],
            phase_errors[1] / phase_errors[2],
        ],
    })
}
