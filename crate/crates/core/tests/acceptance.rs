//! End-to-end acceptance run: one PASS/FAIL line per criterion.

mod common;

use common::*;
use krein_pt::dynamics::{ehrenfest_convergence, ehrenfest_residual, evolve};
use krein_pt::eigen::*;
use krein_pt::krein::{self, Signature, DEFAULT_NEUTRAL_TOL};
use krein_pt::observables::{
    amplitude, conjugate_current, continuity_check, continuity_of, ContinuityOptions,
    LinearOperator, DEFAULT_CONTINUITY_TOL,
};
use krein_pt::potential::parse_potential;
use krein_pt::{Complex64, Grid, WaveFunction};

struct Outcome {
    passed: bool,
    detail: String,
}

type Check<'a> = Box<dyn Fn() -> Outcome + 'a>;

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn setup(src: &str, l: f64, n: usize, k: usize) -> (HamiltonianOp, Vec<EigenPair>) {
    let grid = Grid::new(l, n).unwrap();
    let h = build_hamiltonian(&parse_potential(src).unwrap(), &grid).unwrap();
    let pairs = solve_spectrum(&h, k, DEFAULT_REAL_TOL, DEFAULT_RESIDUAL_TOL)
        .unwrap()
        .iter()
        .map(|p| normalize_and_phase_fix(p, DEFAULT_MODE_TOL).unwrap())
        .collect();
    (h, pairs)
}

fn cubic(x: f64) -> Complex64 {
    c(0.0, x * x * x)
}

fn hermitian_anchor() -> Outcome {
    let (_, pairs) = setup("x^2", 10.0, 2001, 5);
    let rel = pairs
        .iter()
        .enumerate()
        .map(|(k, p)| (p.energy - c((2 * k + 1) as f64, 0.0)).norm() / (2 * k + 1) as f64)
        .fold(0.0, f64::max);
    let gram = gram_matrix(&pairs).unwrap();
    let diag = (0..5)
        .map(|k| (gram.get(k, k) - c(if k % 2 == 0 { 1.0 } else { -1.0 }, 0.0)).norm())
        .fold(0.0, f64::max);
    let off = gram.max_offdiag();
    outcome(
        rel < 1e-4 && diag < 1e-8 && off < 1e-8,
        format!("max rel err {rel:.2e}, diag defect {diag:.2e}, max offdiag {off:.2e}"),
    )
}

fn spectral_reality() -> Outcome {
    let grid = Grid::new(10.0, 4001).unwrap();
    let potential = parse_potential("i*x^3").unwrap();
    let h = build_hamiltonian(&potential, &grid).unwrap();
    let pairs = solve_spectrum(&h, 5, DEFAULT_REAL_TOL, DEFAULT_RESIDUAL_TOL).unwrap();
    let ratio = pairs
        .iter()
        .map(|p| p.energy.im.abs() / p.energy.re.abs())
        .fold(0.0, f64::max);
    let shot = refine_eigenvalue_shooting(
        &potential,
        pairs[0].energy,
        &grid,
        &ShootingOptions::default(),
    )
    .unwrap();
    let gap = (shot.energy - pairs[0].energy).norm();
    // the default grid, shown for reference
    let coarse = Grid::new(10.0, 2001).unwrap();
    let hc = build_hamiltonian(&potential, &coarse).unwrap();
    let e0 = solve_spectrum(&hc, 1, DEFAULT_REAL_TOL, DEFAULT_RESIDUAL_TOL).unwrap()[0].energy;
    let coarse_gap =
        (refine_eigenvalue_shooting(&potential, e0, &coarse, &ShootingOptions::default())
            .unwrap()
            .energy
            - e0)
            .norm();
    outcome(
        ratio < 1e-6 && gap < 1e-5,
        format!("n=4001: max |Im E|/|Re E| {ratio:.2e}, |E0 diag - E0 shoot| {gap:.2e} (n=2001: {coarse_gap:.2e})"),
    )
}

fn krein_orthogonality(pairs: &[EigenPair]) -> Outcome {
    let krein_off = gram_matrix(pairs).unwrap().max_offdiag();
    let hilbert_off = hilbert_gram_matrix(pairs).unwrap().max_offdiag();
    outcome(
        krein_off < 1e-6 && hilbert_off > 1e-5,
        format!("max |G_ab| {krein_off:.2e}, max |<a|b>| {hilbert_off:.2e}"),
    )
}

fn pt_mode_structure(pairs: &[EigenPair]) -> Outcome {
    let mut mode = 0.0_f64;
    let mut even = 0.0_f64;
    let mut odd = 0.0_f64;
    for p in pairs {
        // best phase from the raw eigenvector, independent of the gauge fix
        let raw = p.psi.scale(Complex64::from_polar(1.0, 0.7));
        mode = mode.max(pt_phase(&raw).1);
        let s = p.psi.samples();
        let n = s.len();
        for i in 0..n {
            even = even.max((s[i].re - s[n - 1 - i].re).abs());
            odd = odd.max((s[i].im + s[n - 1 - i].im).abs());
        }
    }
    outcome(
        mode < 1e-6 && even < 1e-6 && odd < 1e-6,
        format!("mode defect {mode:.2e}, Re parity {even:.2e}, Im parity {odd:.2e}"),
    )
}

fn current_density(pairs: &[EigenPair]) -> Outcome {
    let options = ContinuityOptions::default();
    let (mut scaled, mut max_j, mut control) = (0.0_f64, 0.0_f64, f64::INFINITY);
    for p in pairs {
        let report = continuity_check(p, &options).unwrap();
        scaled = scaled.max(report.scaled_dj_dx);
        max_j = max_j.max(report.max_abs_j);
        let broken = continuity_of(
            &conjugate_current(&p.psi),
            &p.psi,
            p.energy,
            DEFAULT_CONTINUITY_TOL,
        );
        control = control.min(broken.scaled_dj_dx);
    }
    outcome(
        scaled < 1e-6 && max_j < 1e-6 && control >= 1e3 * DEFAULT_CONTINUITY_TOL,
        format!("scaled dj/dx {scaled:.2e}, max |j| {max_j:.2e}, psi* control {control:.2e}"),
    )
}

fn diagonal_forms(h: &HamiltonianOp, pairs: &[EigenPair]) -> Outcome {
    let v = LinearOperator::potential_of(h);
    let worst = pairs
        .iter()
        .map(|p| {
            let form = krein::krein_inner(&p.psi, &v.apply(&p.psi).unwrap()).unwrap();
            form.im.abs() / krein::hilbert_norm2(&p.psi)
        })
        .fold(0.0, f64::max);
    outcome(
        worst < 1e-8,
        format!("max |Im (psi|V psi)|/<psi|psi> {worst:.2e}"),
    )
}

fn krein_identities() -> Outcome {
    let g = Grid::new(8.0, 257).unwrap();
    let mut r = rng(2024);
    let (mut jp, mut recovered, mut momentum, mut naive) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    let mut violations = 0;
    for _ in 0..1000 {
        let (psi, phi) = (random_state(g, &mut r), random_state(g, &mut r));
        let scale = psi.l2() * phi.l2();
        let (plus, minus) = krein::parity_decompose(&psi);
        jp = jp.max((&(&plus - &minus) - &krein::apply_parity(&psi)).max_abs() / psi.max_abs());
        let lhs = krein::krein_inner(&krein::apply_parity(&psi), &phi).unwrap();
        // <psi|phi> summed directly
        let direct: Complex64 = psi
            .samples()
            .iter()
            .zip(phi.samples())
            .map(|(a, b)| a * b.conj())
            .sum::<Complex64>()
            * g.spacing();
        recovered = recovered.max((lhs - direct).norm() / scale);
        let (phi_plus, phi_minus) = krein::parity_decompose(&phi);
        for (x, y, sign) in [(&plus, &phi_plus, 1.0), (&minus, &phi_minus, -1.0)] {
            let xy = krein::krein_inner(x, y).unwrap().norm_sqr();
            let xx = sign * krein::krein_inner(x, x).unwrap().re;
            let yy = sign * krein::krein_inner(y, y).unwrap().re;
            if xx < 0.0 || yy < 0.0 || xy > xx * yy * (1.0 + 1e-12) {
                violations += 1;
            }
        }
        let fast = krein::momentum_krein_inner(&psi, &phi).unwrap();
        let position = krein::krein_inner(&psi, &phi).unwrap();
        momentum = momentum.max((fast - position).norm() / scale);
        naive = naive.max((naive_momentum_krein(&psi, &phi) - position).norm() / scale);
    }
    outcome(
        jp <= 1e-12 && recovered <= 1e-12 && violations == 0 && momentum <= 1e-8 && naive <= 1e-8,
        format!(
            "1000 samples: J-P {jp:.1e}, Hilbert {recovered:.1e}, Schwarz violations {violations}, momentum {momentum:.1e} (naive DFT {naive:.1e})"
        ),
    )
}

fn amplitude_contract(pairs: &[EigenPair]) -> Outcome {
    let (mut same, mut cross) = (0.0_f64, 0.0_f64);
    let mut diagonal_exact = true;
    for (a, pa) in pairs.iter().enumerate() {
        for (b, pb) in pairs.iter().enumerate() {
            let amp = amplitude(&pa.psi, &pb.psi).unwrap();
            if a == b {
                diagonal_exact &= amp == c(1.0, 0.0);
            } else if pa.krein_sign == pb.krein_sign {
                same = same.max(amp.norm());
            } else {
                cross = cross.max(amp.norm());
            }
        }
    }
    outcome(
        same <= 1.0 + 1e-12 && diagonal_exact && cross < 1e-8,
        format!("max same-signature |A| {same:.2e}, A_aa exact {diagonal_exact}, max cross-signature |A| {cross:.2e}"),
    )
}

fn superselection(pairs: &[EigenPair]) -> Outcome {
    let mut r = rng(99);
    let mut rejected = 0;
    let mut trials = 0;
    for a in pairs.iter().filter(|p| p.krein_sign == Some(1)) {
        for b in pairs.iter().filter(|p| p.krein_sign == Some(-1)) {
            use rand::Rng;
            let terms = [
                (
                    c(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)),
                    a.psi.clone(),
                ),
                (
                    c(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)),
                    b.psi.clone(),
                ),
            ];
            trials += 1;
            if !krein::validate_superposition(&terms, DEFAULT_NEUTRAL_TOL)
                .unwrap()
                .admissible
            {
                rejected += 1;
            }
        }
    }
    let g = *pairs[0].psi.grid();
    let even = WaveFunction::from_real_fn(g, |x| (-x * x).exp()).unwrap();
    let odd = WaveFunction::from_real_fn(g, |x| x * (-x * x).exp()).unwrap();
    let neutral = &even + &odd.scale(c(2.0, 0.0));
    let report = krein::classify_vector(&neutral, DEFAULT_NEUTRAL_TOL).unwrap();
    let neutrality = report.neutrality();
    outcome(
        trials > 0 && rejected == trials && report.signature == Signature::Neutral && neutrality < 1e-10,
        format!("mixed rejected {rejected}/{trials}, neutral vector |(psi|psi)|/<psi|psi> {neutrality:.2e}"),
    )
}

fn dynamics() -> Outcome {
    let (h, pairs) = setup("i*x^3", 3.0, 601, 3);
    let ground = evolve(&pairs[0].psi, &h, 1e-3, 1.0, 10).unwrap();
    let drift = ground.krein_drift();

    let h_op = LinearOperator::Hamiltonian(h.clone());
    let moving = &pairs[0].psi + &pairs[2].psi;
    let traj = evolve(&moving, &h, 1e-3, 1.0, 10).unwrap();
    let h_residual = ehrenfest_residual(&traj, &h, &h_op).unwrap().max_residual;
    let spacing = h.grid().spacing();
    let norm = h.diag().iter().map(|z| z.norm()).fold(0.0, f64::max) + 2.0 / (spacing * spacing);
    let bound = 100.0 * f64::EPSILON * norm / traj.sample_spacing();

    let order = |psi: &WaveFunction, h: &HamiltonianOp, op: LinearOperator| {
        ehrenfest_convergence(psi, h, &op, 1e-3, 1.0, 10)
            .unwrap()
            .convergence_order
    };
    let ix_order = order(&moving, &h, LinearOperator::ImaginaryPosition);
    let p_order = order(&moving, &h, LinearOperator::Momentum);
    let grid = Grid::new(10.0, 2001).unwrap();
    let oscillator = build_hamiltonian(&parse_potential("x^2").unwrap(), &grid).unwrap();
    let gaussian =
        WaveFunction::from_real_fn(grid, |x| (-(x - 1.0) * (x - 1.0) / 2.0).exp()).unwrap();
    let p_osc_order = order(&gaussian, &oscillator, LinearOperator::Momentum);
    let in_window = |o: f64| (o - 2.0).abs() <= 0.3;
    outcome(
        drift < 1e-10 && h_residual < bound && in_window(ix_order) && in_window(p_order) && in_window(p_osc_order),
        format!(
            "L=3: Krein drift {drift:.2e}, H residual {h_residual:.2e} (bound {bound:.1e}), order i_x {ix_order:.3}, momentum {p_order:.3} (x^2, L=10: {p_osc_order:.3})"
        ),
    )
}

fn convergence() -> Outcome {
    // grid halving against the Numerov oracle for i x^3 and the exact oscillator levels
    let mut ratios = Vec::new();
    let cubic_levels: Vec<Vec<Complex64>> = [1001, 2003, 4007]
        .iter()
        .map(|&n| {
            setup("i*x^3", 10.0, n, 3)
                .1
                .iter()
                .map(|p| p.energy)
                .collect()
        })
        .collect();
    for k in 0..3 {
        let oracle = numerov_eigenvalue(&cubic, cubic_levels[2][k], 10.0, 4000);
        let errors: Vec<f64> = cubic_levels
            .iter()
            .map(|l| (l[k] - oracle).norm())
            .collect();
        ratios.push(errors[0] / errors[1]);
        ratios.push(errors[1] / errors[2]);
    }
    let osc_levels: Vec<Vec<Complex64>> = [501, 1003, 2007]
        .iter()
        .map(|&n| {
            setup("x^2", 10.0, n, 3)
                .1
                .iter()
                .map(|p| p.energy)
                .collect()
        })
        .collect();
    for k in 0..3 {
        let exact = c((2 * k + 1) as f64, 0.0);
        let errors: Vec<f64> = osc_levels.iter().map(|l| (l[k] - exact).norm()).collect();
        ratios.push(errors[0] / errors[1]);
        ratios.push(errors[1] / errors[2]);
    }
    // time-step halving: phase error of a stationary state against e^{-iEt}
    let (h, pairs) = setup("i*x^3", 3.0, 601, 3);
    let mut dt_ratios = Vec::new();
    for pair in [&pairs[0], &pairs[2]] {
        let errors: Vec<f64> = [1e-3, 5e-4, 2.5e-4]
            .iter()
            .map(|&dt| {
                let steps = (1.0_f64 / dt).round() as usize;
                let traj = evolve(&pair.psi, &h, dt, 1.0, steps).unwrap();
                let last = traj.states.last().unwrap();
                let overlap = krein::krein_inner(last, &pair.psi).unwrap()
                    / krein::krein_inner(&pair.psi, &pair.psi).unwrap();
                (overlap - (c(0.0, -1.0) * pair.energy).exp()).norm()
            })
            .collect();
        dt_ratios.push(errors[0] / errors[1]);
        dt_ratios.push(errors[1] / errors[2]);
    }
    let ok = |r: &f64| (3.5..=4.5).contains(r);
    let fmt = |v: &[f64]| {
        v.iter()
            .map(|r| format!("{r:.3}"))
            .collect::<Vec<_>>()
            .join(" ")
    };
    outcome(
        ratios.iter().all(ok) && dt_ratios.iter().all(ok),
        format!(
            "h-halving ratios [{}], dt-halving ratios [{}]",
            fmt(&ratios),
            fmt(&dt_ratios)
        ),
    )
}

fn main() {
    let (cubic_h, cubic_pairs) = setup("i*x^3", 10.0, 2001, 5);
    let criteria: Vec<(&str, Check)> = vec![
        ("hermitian anchor", Box::new(hermitian_anchor)),
        ("spectral reality", Box::new(spectral_reality)),
        (
            "krein orthogonality",
            Box::new(|| krein_orthogonality(&cubic_pairs)),
        ),
        (
            "PT-mode structure",
            Box::new(|| pt_mode_structure(&cubic_pairs)),
        ),
        (
            "current density",
            Box::new(|| current_density(&cubic_pairs)),
        ),
        (
            "diagonal forms",
            Box::new(|| diagonal_forms(&cubic_h, &cubic_pairs)),
        ),
        ("krein-space identities", Box::new(krein_identities)),
        (
            "amplitude contract",
            Box::new(|| amplitude_contract(&cubic_pairs)),
        ),
        ("superselection", Box::new(|| superselection(&cubic_pairs))),
        ("dynamics", Box::new(dynamics)),
        ("convergence", Box::new(convergence)),
    ];
    let mut failures = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let result = check();
        if !result.passed {
            failures += 1;
        }
        println!(
            "criterion {:>2} {:<24} {}  {}",
            k + 1,
            name,
            if result.passed { "PASS" } else { "FAIL" },
            result.detail
        );
    }
    println!(
        "acceptance: {} passed, {} failed",
        criteria.len() - failures,
        failures
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
