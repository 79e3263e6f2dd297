use clap::ValueEnum;

use krein_pt::dynamics::{ehrenfest_residual, evolve, Trajectory};
use krein_pt::eigen::{
    build_hamiltonian, gram_matrix, hilbert_gram_matrix, normalize_and_phase_fix, solve_spectrum,
    EigenPair, HamiltonianOp, DEFAULT_MODE_TOL,
};
use krein_pt::krein::{self, DEFAULT_NEUTRAL_TOL};
use krein_pt::observables::{
    continuity_check, operator_average, ContinuityOptions, LinearOperator, ObservableError,
};
use krein_pt::{Complex64, Grid, WaveFunction};

use crate::config::{DomainConfig, OutputFormat, RunConfig};
use crate::error::CliError;
use crate::output::{Cell, Table};
use crate::report;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Spectrum,
    Modes,
    Gram,
    Current,
    Classify,
    Evolve,
    Report,
}

/// Eigenpairs on one grid, normalized and gauge-fixed.
#[derive(Debug, Clone)]
pub struct Solved {
    pub hamiltonian: HamiltonianOp,
    pub pairs: Vec<EigenPair>,
}

pub fn solve(
    cfg: &RunConfig,
    domain: &DomainConfig,
    num_states: usize,
) -> Result<Solved, CliError> {
    let grid = Grid::new(domain.half_width, domain.points)
        .map_err(|e| CliError::validation("InvalidGrid", e.to_string()))?;
    let hamiltonian = build_hamiltonian(&cfg.expr, &grid)?;
    let raw = solve_spectrum(
        &hamiltonian,
        num_states,
        cfg.solver.real_tol,
        cfg.solver.residual_tol,
    )?;
    let mut pairs = Vec::with_capacity(raw.len());
    for (index, pair) in raw.iter().enumerate() {
        if !pair.converged {
            return Err(CliError::numerical(
                "ConvergenceFailure",
                format!(
                    "state {index}: residual {:e} above residual_tol {:e}",
                    pair.residual, cfg.solver.residual_tol
                ),
            ));
        }
        pairs.push(normalize_and_phase_fix(pair, DEFAULT_MODE_TOL)?);
    }
    Ok(Solved { hamiltonian, pairs })
}

pub fn observable(label: &str, hamiltonian: &HamiltonianOp) -> LinearOperator {
    match label {
        "hamiltonian" => LinearOperator::Hamiltonian(hamiltonian.clone()),
        "momentum" => LinearOperator::Momentum,
        "i_x" => LinearOperator::ImaginaryPosition,
        "position" => LinearOperator::Position,
        "parity" => LinearOperator::Parity,
        other => unreachable!("observable '{other}' passed validation"),
    }
}

/// Runs one command and returns the complete output text.
pub fn run_command(cmd: Command, cfg: &RunConfig) -> Result<String, CliError> {
    let table = match cmd {
        Command::Spectrum => spectrum(cfg)?,
        Command::Modes => modes(cfg)?,
        Command::Gram => gram(cfg)?,
        Command::Current => current(cfg)?,
        Command::Classify => classify(cfg)?,
        Command::Evolve => evolve_table(cfg)?,
        Command::Report => return report::run_report(cfg),
    };
    Ok(match cfg.output.format {
        OutputFormat::Csv => table.to_csv(),
        OutputFormat::Json => table.to_json(),
    })
}

fn main_spectrum(cfg: &RunConfig) -> Result<Solved, CliError> {
    solve(cfg, &cfg.domain, cfg.solver.num_states)
}

fn spectrum(cfg: &RunConfig) -> Result<Table, CliError> {
    let solved = main_spectrum(cfg)?;
    let mut table = Table::new(&[
        "index",
        "re_energy",
        "im_energy",
        "residual",
        "omega",
        "krein_sign",
        "complex_flag",
    ]);
    for (index, pair) in solved.pairs.iter().enumerate() {
        table.push(vec![
            index.into(),
            pair.energy.re.into(),
            pair.energy.im.into(),
            pair.residual.into(),
            pair.omega.into(),
            pair.krein_sign.map_or(Cell::Blank, |s| Cell::Int(s as i64)),
            pair.complex_flag.into(),
        ]);
    }
    Ok(table)
}

fn modes(cfg: &RunConfig) -> Result<Table, CliError> {
    let solved = main_spectrum(cfg)?;
    let mut table = Table::new(&["state", "x", "re_psi", "im_psi"]);
    for (index, pair) in solved.pairs.iter().enumerate() {
        for (x, z) in pair.psi.grid().points().zip(pair.psi.samples()) {
            table.push(vec![index.into(), x.into(), z.re.into(), z.im.into()]);
        }
    }
    Ok(table)
}

fn gram(cfg: &RunConfig) -> Result<Table, CliError> {
    let solved = main_spectrum(cfg)?;
    let krein_gram = gram_matrix(&solved.pairs)?;
    let hilbert_gram = hilbert_gram_matrix(&solved.pairs)?;
    let mut table = Table::new(&[
        "row",
        "col",
        "re_krein",
        "im_krein",
        "re_hilbert",
        "im_hilbert",
    ]);
    for a in 0..krein_gram.dim() {
        for b in 0..krein_gram.dim() {
            let (k, h) = (krein_gram.get(a, b), hilbert_gram.get(a, b));
            table.push(vec![
                a.into(),
                b.into(),
                k.re.into(),
                k.im.into(),
                h.re.into(),
                h.im.into(),
            ]);
        }
    }
    let max_offdiag = krein_gram.max_offdiag();
    table.note("max_krein_offdiag", max_offdiag);
    table.note("max_hilbert_offdiag", hilbert_gram.max_offdiag());
    table.note("orthogonal", max_offdiag < cfg.solver.orthogonality_tol);
    Ok(table)
}

fn current(cfg: &RunConfig) -> Result<Table, CliError> {
    let solved = main_spectrum(cfg)?;
    let options = ContinuityOptions {
        real_tol: cfg.solver.real_tol,
        ..ContinuityOptions::default()
    };
    let mut table = Table::new(&["state", "x", "re_j", "im_j"]);
    for (index, pair) in solved.pairs.iter().enumerate() {
        let report = match continuity_check(pair, &options) {
            Ok(r) => r,
            Err(ObservableError::ComplexEigenvalue(_)) => {
                table.note(format!("state_{index}_skipped"), "complex energy");
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        let profile = krein_pt::observables::current_density(&pair.psi);
        for (x, j) in profile.grid.points().zip(&profile.j) {
            table.push(vec![index.into(), x.into(), j.re.into(), j.im.into()]);
        }
        table.note(format!("state_{index}_max_dj_dx"), report.max_dj_dx);
        table.note(format!("state_{index}_scaled_dj_dx"), report.scaled_dj_dx);
        table.note(format!("state_{index}_max_abs_j"), report.max_abs_j);
        table.note(format!("state_{index}_conserved"), report.is_conserved);
    }
    Ok(table)
}

fn classify(cfg: &RunConfig) -> Result<Table, CliError> {
    let solved = main_spectrum(cfg)?;
    let mut table = Table::new(&[
        "state",
        "re_energy",
        "im_energy",
        "re_krein",
        "im_krein",
        "hilbert_norm2",
        "signature",
        "even_share",
        "odd_share",
        "neutrality",
    ]);
    for (index, pair) in solved.pairs.iter().enumerate() {
        let report = krein::classify_vector(&pair.psi, DEFAULT_NEUTRAL_TOL)?;
        table.push(vec![
            index.into(),
            pair.energy.re.into(),
            pair.energy.im.into(),
            report.krein_product.re.into(),
            report.krein_product.im.into(),
            report.hilbert_norm2.into(),
            report.signature.as_str().into(),
            report.even_share.into(),
            report.odd_share.into(),
            report.neutrality().into(),
        ]);
    }
    Ok(table)
}

/// Unit-weight sum of the listed eigenstates, subject to superselection.
pub fn initial_state(pairs: &[EigenPair], indices: &[usize]) -> Result<WaveFunction, CliError> {
    let terms: Vec<(Complex64, WaveFunction)> = indices
        .iter()
        .map(|&k| (Complex64::new(1.0, 0.0), pairs[k].psi.clone()))
        .collect();
    let check = krein::validate_superposition(&terms, DEFAULT_NEUTRAL_TOL)?;
    match check.sum {
        Some(sum) if check.admissible => Ok(sum),
        _ => Err(CliError::validation(
            "SuperselectionViolation",
            format!("initial states {indices:?}: {}", check.reason),
        )),
    }
}

/// Evolves the configured initial state on the dynamics grid.
pub fn dynamics_run(cfg: &RunConfig, indices: &[usize]) -> Result<(Solved, Trajectory), CliError> {
    let needed = indices.iter().max().map_or(1, |&k| k + 1);
    let solved = solve(cfg, &cfg.dynamics.domain, needed)?;
    if let Some(pair) = indices
        .iter()
        .map(|&k| &solved.pairs[k])
        .find(|p| p.complex_flag)
    {
        return Err(CliError::validation(
            "ComplexEigenvalue",
            format!("initial state has complex energy {}", pair.energy),
        ));
    }
    let psi0 = initial_state(&solved.pairs, indices)?;
    let d = &cfg.dynamics;
    let traj = evolve(&psi0, &solved.hamiltonian, d.dt, d.t_final, d.stride)?;
    Ok((solved, traj))
}

fn evolve_table(cfg: &RunConfig) -> Result<Table, CliError> {
    let (solved, traj) = dynamics_run(cfg, &cfg.dynamics.initial_states)?;
    let op = observable(&cfg.dynamics.observable, &solved.hamiltonian);
    let ehrenfest = if op.is_theta_invariant(solved.hamiltonian.grid()) && traj.states.len() >= 3 {
        Some(ehrenfest_residual(&traj, &solved.hamiltonian, &op)?)
    } else {
        None
    };
    let mut table = Table::new(&[
        "t",
        "av_re",
        "av_im",
        "krein_norm",
        "hilbert_norm",
        "ehrenfest_residual",
    ]);
    for (k, (t, state)) in traj.times.iter().zip(&traj.states).enumerate() {
        let av = operator_average(&op, state)?.value;
        let residual = match &ehrenfest {
            Some(r) if k >= 1 && k + 1 < traj.states.len() => Cell::Real(r.residuals[k - 1]),
            _ => Cell::Blank,
        };
        table.push(vec![
            (*t).into(),
            av.re.into(),
            av.im.into(),
            traj.krein_norms[k].re.into(),
            traj.hilbert_norms[k].into(),
            residual,
        ]);
    }
    table.note("observable", cfg.dynamics.observable.as_str());
    table.note("krein_drift", traj.krein_drift());
    table.note("hilbert_drift", traj.hilbert_drift());
    if let Some(r) = &ehrenfest {
        table.note("max_ehrenfest_residual", r.max_residual);
    }
    Ok(table)
}
