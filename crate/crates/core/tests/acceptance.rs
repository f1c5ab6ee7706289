//! End-to-end acceptance checks at the flagship point `vA = 3/2`, `vB = 2`,
//! `x = 1.041`. Prints one PASS/FAIL line per criterion and exits nonzero if
//! any fails.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use gauss_distill::montecarlo::simulate_preparation;
use gauss_distill::output::write_sweep_csv;
use gauss_distill::protocol::{
    closed_form_reduced_ab, compute_x_sep, find_x_threshold, make_gamma1, make_local_cms, make_q_matrix, nu_ab,
    run_protocol, run_step2, run_step3, sigma_after_step, ProtocolParams, ProtocolStep, Squeezing, TwoModeBlocks,
    MODE_A, MODE_B,
};
use gauss_distill::robustness::robustness_scan;
use gauss_distill::separability::{Criterion, Separable};
use gauss_distill::sweep::{run_sweep, SweepSpec, SweepStatus};
use gauss_distill::{apply_transform, characteristic_invariants, symplectic_form, InvariantTriple};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::StateDraw;

type Outcome = Result<String, String>;
type Check = (&'static str, Box<dyn Fn() -> Outcome>);

fn within(name: &str, value: f64, target: f64, tol: f64) -> Outcome {
    let msg = format!("{name} = {value:.6} (target {target} ± {tol})");
    if (value - target).abs() <= tol {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn check(cond: bool, msg: String) -> Outcome {
    if cond {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn all(parts: Vec<Outcome>) -> Outcome {
    let ok = parts.iter().all(Result::is_ok);
    let text = parts
        .into_iter()
        .map(|p| p.unwrap_or_else(|e| format!("[{e}]")))
        .collect::<Vec<_>>()
        .join("; ");
    check(ok, text)
}

fn timed(limit: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let outcome = f();
    let elapsed = start.elapsed();
    let budget = format!("{:.2}s of {}s", elapsed.as_secs_f64(), limit.as_secs());
    match outcome {
        Ok(msg) if elapsed <= limit => Ok(format!("{msg}; {budget}")),
        Ok(msg) => Err(format!("{msg}; too slow, {budget}")),
        Err(msg) => Err(format!("{msg}; {budget}")),
    }
}

fn flagship() -> ProtocolParams {
    ProtocolParams::flagship()
}

fn x_sep() -> Outcome {
    within("x_sep", compute_x_sep(&Squeezing::flagship()), 0.2043, 5e-4)
}

fn x_threshold() -> Outcome {
    let fit = find_x_threshold(&Squeezing::flagship(), ProtocolStep::Second).map_err(|e| e.to_string())?;
    let x_th = fit.x_th.ok_or("no threshold")?;
    within("x_th", x_th, 1.04, 0.01)
}

fn nu_pipeline() -> Outcome {
    let p = flagship();
    let gamma3 = run_step3(&run_step2(&make_gamma1(&p.squeezing, p.x).unwrap()).unwrap()).unwrap();
    within(
        "nu",
        nu_ab(&gamma3.reduced(&[MODE_A, MODE_B]).unwrap()).unwrap(),
        0.9571,
        5e-4,
    )
}

fn sigma_step3() -> Outcome {
    let p = flagship();
    within(
        "sigma_step3",
        sigma_after_step(&p.squeezing, p.x, ProtocolStep::Third).unwrap(),
        0.3957,
        5e-4,
    )
}

fn nu_measured() -> Outcome {
    let report = run_protocol(&flagship(), true).map_err(|e| e.to_string())?;
    within("nu_m", report.nu_m.ok_or("no measurement")?, 0.9421, 5e-4)
}

fn local_states() -> Outcome {
    let locals = make_local_cms(&Squeezing::flagship()).map_err(|e| e.to_string())?;
    let theta = locals.theta.to_degrees();
    all(vec![
        within("exp(-2s)", (-2.0 * locals.s).exp(), 0.6387, 5e-4),
        within("theta/deg", theta, 5.73, 0.1),
    ])
}

fn witness_spectrum() -> Outcome {
    let sq = Squeezing::flagship();
    let w = make_q_matrix(&sq, sq.x_sep).map_err(|e| e.to_string())?;
    let sym = (&w.rotated + w.rotated.transpose()) * 0.5;
    let mut ev: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
    let zeros = ev[..4].iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let mut top = [ev[4], ev[5]];
    top.sort_by(f64::total_cmp);
    let (s2, c2) = (sq.phi.sin().powi(2), sq.phi.cos().powi(2));
    let lambda6 = ((4.0 * sq.d).exp() * s2 + (-4.0 * sq.d).exp() * c2) * sq.x_sep;
    let lambda5 = 9.0 * sq.x_sep;
    let rel = |a: f64, b: f64| ((a - b) / b).abs();
    all(vec![
        check(zeros < 1e-9, format!("four null eigenvalues, max |λ| = {zeros:.1e}")),
        check(
            rel(top[1], lambda5) < 1e-9,
            format!("λ5 = {:.6} vs 9·x_sep = {lambda5:.6}", top[1]),
        ),
        check(
            rel(top[0], lambda6) < 1e-9,
            format!("λ6 = {:.6} vs {lambda6:.6}", top[0]),
        ),
    ])
}

fn robustness() -> Outcome {
    let rows = robustness_scan(&flagship(), &[0.02]).map_err(|e| e.to_string())?;
    within("nu(eps=0.02)", rows[0].nu, 0.9787, 5e-4)
}

fn separability_ledger() -> Outcome {
    let report = run_protocol(&flagship(), false).map_err(|e| e.to_string())?;
    let stat = |step, criterion, split| {
        report
            .verdict(step, criterion, split)
            .map(|v| (v.statistic, v.separable))
    };
    let psd = stat(1, Criterion::PsdWitness, "A|B|C").ok_or("missing witness")?;
    let c2 = stat(2, Criterion::Serafini, "C|AB").ok_or("missing step-2 C|AB")?;
    let b2 = stat(2, Criterion::Serafini, "B|AC").ok_or("missing step-2 B|AC")?;
    let a2 = stat(2, Criterion::Ppt, "A|BC").ok_or("missing step-2 A|BC")?;
    let c3 = stat(3, Criterion::Serafini, "C|AB").ok_or("missing step-3 C|AB")?;
    let ab3 = stat(3, Criterion::Ppt, "A|B").ok_or("missing step-3 A|B")?;
    all(vec![
        check(psd.1 == Separable::Yes, "step 1 Q(x) PSD".into()),
        check(c2.0 > 0.0, format!("step 2 Σ_C = {:.6}", c2.0)),
        check(b2.0 >= 0.0, format!("Σ_B = {:.4}", b2.0)),
        check(a2.0 < 1.0, format!("ν_A|BC = {:.4}", a2.0)),
        check(c3.0 > 0.0, format!("step 3 Σ_C = {:.4}", c3.0)),
        check(ab3.0 < 1.0, format!("ν_AB = {:.4}", ab3.0)),
    ])
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut worst = 0.0_f64;
    for _ in 0..100 {
        let d = rng.random_range(0.05..1.0);
        let r = rng.random_range(0.01..1.0) * d;
        let x = rng.random_range(0.0..5.0);
        let sq = Squeezing::new(d, r).map_err(|e| e.to_string())?;
        let gamma3 = run_step3(&run_step2(&make_gamma1(&sq, x).unwrap()).unwrap()).unwrap();
        let numeric = TwoModeBlocks::of(&gamma3.reduced(&[MODE_A, MODE_B]).unwrap()).unwrap();
        let closed = closed_form_reduced_ab(&sq, x).unwrap();
        worst = worst.max(numeric.max_deviation(&closed));
    }
    check(
        worst < 1e-10,
        format!("100 random (d, r, x), max deviation {worst:.1e}"),
    )
}

fn property_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let omega = symplectic_form(3);
    let (mut sympl, mut det, mut spec, mut inv, mut i3, mut parabola) =
        (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    const N: usize = 100;
    for _ in 0..N {
        let draw = StateDraw::from_uniform(&std::array::from_fn(|_| rng.random()));
        let s = draw.symplectic();
        sympl = sympl.max((s.matrix() * &omega * s.matrix().transpose() - &omega).amax());

        let gamma = draw.state();
        let moved = apply_transform(
            &StateDraw::from_uniform(&std::array::from_fn(|_| rng.random())).symplectic(),
            &gamma,
        )
        .unwrap();
        det = det.max(((moved.determinant() - gamma.determinant()) / gamma.determinant()).abs());
        let (before, after) = (
            gamma.symplectic_spectrum().unwrap(),
            moved.symplectic_spectrum().unwrap(),
        );
        let mut thermal = draw.thermal;
        thermal.sort_by(f64::total_cmp);
        for k in 0..3 {
            spec = spec
                .max((before[k] - after[k]).abs() / before[k])
                .max((before[k] - thermal[k]).abs() / thermal[k]);
        }

        let triple = characteristic_invariants(gamma.matrix()).unwrap();
        let from_nu = InvariantTriple::from_symplectic_eigenvalues([before[0], before[1], before[2]]);
        for (a, b) in [
            (triple.i1, from_nu.i1),
            (triple.i2, from_nu.i2),
            (triple.i3, from_nu.i3),
        ] {
            inv = inv.max((a - b).abs() / b.abs().max(1.0));
        }
        i3 = i3.max((triple.i3 - gamma.determinant()).abs() / gamma.determinant());

        let d = rng.random_range(0.05..1.0);
        let r = rng.random_range(0.01..1.0) * d;
        let sq = Squeezing::new(d, r).unwrap();
        let step = if rng.random() {
            ProtocolStep::Second
        } else {
            ProtocolStep::Third
        };
        let fit = find_x_threshold(&sq, step).unwrap();
        let x4 = rng.random_range(0.1..10.0);
        let actual = sigma_after_step(&sq, x4, step).unwrap();
        parabola = parabola.max((fit.sigma(x4) - actual).abs() / actual.abs().max(x4 * x4 * fit.u.abs()).max(1e-12));
    }
    all(vec![
        check(sympl < 1e-10, format!("SΩSᵀ = Ω to {sympl:.1e}")),
        check(det < 1e-9, format!("det invariance {det:.1e}")),
        check(spec < 1e-8, format!("spectrum invariance {spec:.1e}")),
        check(inv < 1e-8, format!("invariants vs eigenvalues {inv:.1e}")),
        check(i3 < 1e-9, format!("I3 = det {i3:.1e}")),
        check(
            parabola < 1e-7,
            format!("Σ 4th-point prediction {parabola:.1e}; {N} instances"),
        ),
    ])
}

fn monte_carlo() -> Outcome {
    let p = flagship();
    let exact = make_gamma1(&p.squeezing, p.x).unwrap();
    let big = simulate_preparation(&p, 1_000_000, 1).map_err(|e| e.to_string())?;
    let dev = big.max_deviation(&exact);
    let in_band = dev <= 5.0 * big.stderr_scale;

    let sizes = [1_000usize, 10_000, 100_000, 1_000_000];
    let seeds = 16u64;
    let points: Vec<(f64, f64)> = sizes
        .iter()
        .map(|&n| {
            let mean_err = (0..seeds)
                .map(|seed| {
                    let est = simulate_preparation(&p, n, 100 + seed).unwrap();
                    (est.cm.matrix() - exact.matrix()).norm()
                })
                .sum::<f64>()
                / seeds as f64;
            ((n as f64).ln(), mean_err.ln())
        })
        .collect();
    let mx = points.iter().map(|p| p.0).sum::<f64>() / points.len() as f64;
    let my = points.iter().map(|p| p.1).sum::<f64>() / points.len() as f64;
    let slope = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
        / points.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    all(vec![
        check(
            in_band,
            format!(
                "n=1e6 max deviation {dev:.2e} vs 5·stderr {:.2e}",
                5.0 * big.stderr_scale
            ),
        ),
        within("log-error slope", slope, -0.5, 0.15),
    ])
}

fn sweep() -> Outcome {
    let spec = SweepSpec::default();
    let records = run_sweep(&spec).map_err(|e| e.to_string())?;
    let nearest = records
        .iter()
        .min_by(|a, b| {
            let da = (a.v_a - 1.5).hypot(a.v_b - 2.0);
            let db = (b.v_a - 1.5).hypot(b.v_b - 2.0);
            da.total_cmp(&db)
        })
        .ok_or("empty sweep")?;
    let ok = records.iter().filter(|r| r.status == SweepStatus::Ok).count();
    let mut first = Vec::new();
    write_sweep_csv(&records, &mut first).map_err(|e| e.to_string())?;
    let mut second = Vec::new();
    write_sweep_csv(&run_sweep(&spec).unwrap(), &mut second).unwrap();
    all(vec![
        check(
            nearest.status == SweepStatus::Ok,
            format!("({}, {}) is {}", nearest.v_a, nearest.v_b, nearest.status),
        ),
        check(
            ok > 0 && ok < records.len(),
            format!("{ok} of {} points ok", records.len()),
        ),
        check(first == second, "byte-identical rerun".into()),
    ])
}

fn main() -> ExitCode {
    let instant = Duration::from_secs(1);
    let criteria: Vec<Check> = vec![
        ("separability onset x_sep", Box::new(move || timed(instant, x_sep))),
        ("ancilla threshold x_th", Box::new(move || timed(instant, x_threshold))),
        (
            "A-B entanglement after step 3",
            Box::new(move || timed(instant, nu_pipeline)),
        ),
        (
            "ancilla separability after step 3",
            Box::new(move || timed(instant, sigma_step3)),
        ),
        (
            "homodyne-conditioned entanglement",
            Box::new(move || timed(instant, nu_measured)),
        ),
        ("local squeezed states", Box::new(move || timed(instant, local_states))),
        (
            "witness spectrum at x_sep",
            Box::new(move || timed(instant, witness_spectrum)),
        ),
        (
            "robustness to isotropic noise",
            Box::new(move || timed(instant, robustness)),
        ),
        (
            "separability ledger",
            Box::new(move || timed(instant, separability_ledger)),
        ),
        (
            "closed-form oracle",
            Box::new(|| timed(Duration::from_secs(1), oracle_equivalence)),
        ),
        (
            "property suite",
            Box::new(|| timed(Duration::from_secs(10), property_suite)),
        ),
        (
            "Monte Carlo convergence",
            Box::new(|| timed(Duration::from_secs(60), monte_carlo)),
        ),
        ("parameter sweep", Box::new(|| timed(Duration::from_secs(30), sweep))),
    ];

    let mut failures = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let outcome =
            std::panic::catch_unwind(std::panic::AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".to_string()));
        match outcome {
            Ok(msg) => println!("criterion {:>2} PASS {name}: {msg}", k + 1),
            Err(msg) => {
                failures += 1;
                println!("criterion {:>2} FAIL {name}: {msg}", k + 1);
            }
        }
    }
    println!(
        "{} of {} acceptance criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
