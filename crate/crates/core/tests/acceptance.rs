//! Acceptance run: one line per criterion, nonzero exit if any fails.

use std::f64::consts::PI;
use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::thread;
use std::time::Instant;

use num_complex::Complex64 as C64;
use quadromech::hilbert::{dense_trace, max_abs, vectorize, TruncatedSpace};
use quadromech::model::{build_liouvillian, j_opt, EffectiveParams};
use quadromech::regression::{g2_tau, PropagationMethod, Propagator};
use quadromech::steady::{residual_norm, steady_state, DensityMatrix, PSD_TOL, TRACE_TOL};
use quadromech::sweep::{find_extrema, run_sweep, Observable, Scenario, SweepResult, SweepSpec};
use quadromech::weakdrive::{ansatz_g2, manifold_spectrum, solve_coefficients};
use quadromech::{record, CorrelationKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
/// (manifold, eigenvalue in units of J, amplitudes over (n_a, n_b))
type ExpectedState = (usize, f64, Vec<(usize, usize, f64)>);
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn threads() -> usize {
    thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

fn builtin(s: Scenario) -> Result<SweepResult, String> {
    let spec = SweepSpec::builtin(s).map_err(|e| e.to_string())?;
    let res = run_sweep(&spec, threads()).map_err(|e| e.to_string())?;
    ensure(res.failures() == 0, || {
        format!("{} of {} points failed", res.failures(), res.rows.len())
    })?;
    Ok(res)
}

fn column(res: &SweepResult, o: Observable) -> Result<usize, String> {
    res.column_index(o).ok_or_else(|| format!("no {} column", o.column()))
}

fn argmin(rows: &[&quadromech::sweep::SweepRow], col: usize) -> usize {
    (0..rows.len())
        .min_by(|&i, &k| rows[i].values[col].total_cmp(&rows[k].values[col]))
        .unwrap()
}

fn closed_form() -> Outcome {
    let j = j_opt(1.0, 0.1).map_err(|e| e.to_string())?;
    ensure((j - 0.40620).abs() <= 0.0005, || format!("j_opt = {j:.6}"))?;
    Ok(format!("j_opt(1, 0.1) = {j:.5}"))
}

fn blockade_minimum() -> Outcome {
    let res = builtin(Scenario::Fig2a)?;
    let rows: Vec<_> = res.rows.iter().collect();
    let (aa, bb, ab) = (
        column(&res, Observable::G2Aa0)?,
        column(&res, Observable::G2Bb0)?,
        column(&res, Observable::G2Ab0)?,
    );
    let r = rows[argmin(&rows, aa)];
    let j = r.point[0];
    let (gaa, gbb, gab) = (r.values[aa], r.values[bb], r.values[ab]);
    let detail = format!("argmin J = {j:.4}, g2_aa {gaa:.3e}, g2_bb {gbb:.3e}, g2_ab {gab:.3e}");
    ensure((j - 0.406).abs() <= 0.05 * 0.406, || detail.clone())?;
    ensure(gaa < 0.1 && gbb < 1.0 && gab < 1.0, || detail.clone())?;
    Ok(detail)
}

fn optimal_coupling_curve() -> Outcome {
    let res = builtin(Scenario::Fig4)?;
    let aa = column(&res, Observable::G2Aa0)?;
    let axis = &res.spec.axes[1];
    let cell = (axis.max.unwrap() - axis.min.unwrap()) / (axis.count.unwrap() - 1) as f64;
    let mut worst: f64 = 0.0;
    for gm in res.spec.axes[0].points() {
        let col: Vec<_> = res.rows.iter().filter(|r| r.point[0] == gm).collect();
        let j = col[argmin(&col, aa)].point[1];
        let target = j_opt(1.0, gm).map_err(|e| e.to_string())?;
        let cells = (j - target).abs() / cell;
        ensure(cells <= 1.0, || {
            format!("gamma_m {gm:.3}: argmin {j:.4} vs {target:.4} ({cells:.2} cells)")
        })?;
        worst = worst.max(cells);
    }
    Ok(format!("worst column off by {worst:.2} cells"))
}

fn pair_resonances() -> Outcome {
    let res = builtin(Scenario::Fig5)?;
    let mut found = Vec::new();
    for o in [Observable::G2Aa0, Observable::G2Bb0, Observable::G2Ab0] {
        found.extend(find_extrema(&res, o).map_err(|e| e.to_string())?);
    }
    let mut detail = Vec::new();
    for target in [5.0 / 2f64.sqrt(), 5.0 * 6f64.sqrt() / 3.0, 5.0] {
        let near = found
            .iter()
            .map(|e| e.location)
            .min_by(|a, b| (a - target).abs().total_cmp(&(b - target).abs()))
            .ok_or("no extrema found")?;
        ensure((near - target).abs() <= 0.1, || {
            format!("nearest extremum to {target:.3} at {near:.3}")
        })?;
        detail.push(format!("{target:.3}->{near:.3}"));
    }
    Ok(detail.join(", "))
}

fn correlated_pairs() -> Outcome {
    let ep = EffectiveParams::new(7.8, 3.9, 5.0, 0.05, 1.0, 0.1, 1e-4).map_err(|e| e.to_string())?;
    let r = record(&ep, TruncatedSpace::default()).map_err(|e| e.to_string())?;
    let detail = format!("g2_aa {:.3}, g2_bb {:.3}, g2_ab {:.3}", r.g2_aa_0, r.g2_bb_0, r.g2_ab_0);
    ensure(r.g2_aa_0 > 1.0 && r.g2_bb_0 > 1.0 && r.g2_ab_0 > 1.0, || detail.clone())?;
    Ok(detail)
}

fn spectrum() -> Outcome {
    let j = 1.3;
    let (s2, s3, s6) = (2f64.sqrt(), 3f64.sqrt(), 6f64.sqrt());
    let expected: Vec<ExpectedState> = vec![
        (2, -s2, vec![(1, 0, 1.0 / s2), (0, 2, -1.0 / s2)]),
        (2, s2, vec![(1, 0, 1.0 / s2), (0, 2, 1.0 / s2)]),
        (3, -s6, vec![(1, 1, 1.0 / s2), (0, 3, -1.0 / s2)]),
        (3, s6, vec![(1, 1, 1.0 / s2), (0, 3, 1.0 / s2)]),
        (
            4,
            -4.0,
            vec![
                (2, 0, 1.0 / (2.0 * s2)),
                (1, 2, -2.0 / (2.0 * s2)),
                (0, 4, s3 / (2.0 * s2)),
            ],
        ),
        (4, 0.0, vec![(2, 0, -s3 / 2.0), (0, 4, 0.5)]),
        (
            4,
            4.0,
            vec![
                (2, 0, 1.0 / (2.0 * s2)),
                (1, 2, 2.0 / (2.0 * s2)),
                (0, 4, s3 / (2.0 * s2)),
            ],
        ),
    ];
    let mut worst: f64 = 0.0;
    for (n, lambda, state) in &expected {
        let rep = manifold_spectrum(j, *n).map_err(|e| e.to_string())?;
        let k = (0..rep.eigenvalues.len())
            .min_by(|&a, &b| {
                (rep.eigenvalues[a] - lambda)
                    .abs()
                    .total_cmp(&(rep.eigenvalues[b] - lambda).abs())
            })
            .unwrap();
        let dl = (rep.eigenvalues[k] - lambda).abs();
        let mut want = vec![0.0; rep.basis.len()];
        for &(na, nb, amp) in state {
            let i = rep
                .basis
                .iter()
                .position(|&b| b == (na, nb))
                .ok_or("state outside manifold")?;
            want[i] = amp;
        }
        let v = &rep.eigenvectors[k];
        let overlap: f64 = v.iter().zip(&want).map(|(a, b)| a * b).sum();
        let sign = overlap.signum();
        let dv = v
            .iter()
            .zip(&want)
            .map(|(a, b)| (a - sign * b).abs())
            .fold(0.0, f64::max);
        ensure(dl <= 1e-10 && dv <= 1e-10, || {
            format!("N={n}, lambda={lambda:.4}J: eigenvalue off {dl:.1e}, vector off {dv:.1e}")
        })?;
        worst = worst.max(dl).max(dv);
    }
    Ok(format!("7 states, worst deviation {worst:.1e}"))
}

fn weak_drive() -> Outcome {
    let jo = j_opt(1.0, 0.1).map_err(|e| e.to_string())?;
    let ep = EffectiveParams::resonant(jo, 0.005, 0.1, 0.0).map_err(|e| e.to_string())?;
    let a = ansatz_g2(&solve_coefficients(&ep).map_err(|e| e.to_string())?);
    let m = record(&ep, TruncatedSpace::default()).map_err(|e| e.to_string())?;
    let rel = |x: f64, y: f64| (x - y).abs() / y.abs();
    let (dbb, dab) = (rel(a.g2_bb_0, m.g2_bb_0), rel(a.g2_ab_0, m.g2_ab_0));
    let detail = format!(
        "bb off {:.1}%, ab off {:.1}%, g2_aa ansatz {:.1e} / master {:.1e}",
        100.0 * dbb,
        100.0 * dab,
        a.g2_aa_0,
        m.g2_aa_0
    );
    ensure(dbb <= 0.1 && dab <= 0.1 && a.g2_aa_0 < 1e-3 && m.g2_aa_0 < 1e-3, || {
        detail.clone()
    })?;
    Ok(detail)
}

fn random_params(rng: &mut ChaCha8Rng) -> EffectiveParams {
    let delta_m = rng.random_range(-1.0..8.0);
    let delta = if rng.random_bool(0.5) { 0.0 } else { 2.0 * delta_m };
    EffectiveParams::new(
        delta,
        delta_m,
        rng.random_range(0.0..6.0),
        rng.random_range(0.0..0.5),
        1.0,
        rng.random_range(0.02..1.0),
        rng.random_range(0.0..0.1),
    )
    .unwrap()
}

fn properties() -> Outcome {
    let space = TruncatedSpace::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst_residual: f64 = 0.0;
    for draw in 0..50 {
        let ep = random_params(&mut rng);
        let l = build_liouvillian(&ep, space).map_err(|e| e.to_string())?;
        let rho = steady_state(&l).map_err(|e| format!("draw {draw}: {e}"))?;
        let res = residual_norm(&l, &rho);
        let tr = (rho.trace() - 1.0).norm();
        let herm = max_abs((rho.entries() - rho.entries().adjoint()).as_ref());
        let min_eig = rho.min_eigenvalue().map_err(|e| e.to_string())?;
        ensure(
            res < 1e-10 * space.dim() as f64 && tr < TRACE_TOL && herm < 1e-10 && min_eig >= -PSD_TOL,
            || {
                format!("draw {draw} {ep:?}: residual {res:.1e}, trace {tr:.1e}, hermiticity {herm:.1e}, min eig {min_eig:.1e}")
            },
        )?;
        worst_residual = worst_residual.max(res);
    }

    // semigroup and trace preservation from a non-stationary start
    let blockade = EffectiveParams::resonant(0.406, 0.05, 0.1, 1e-4).map_err(|e| e.to_string())?;
    let l = build_liouvillian(&blockade, space).map_err(|e| e.to_string())?;
    let start = DensityMatrix::coherent(space, C64::new(0.3, 0.1), C64::new(0.2, -0.4)).map_err(|e| e.to_string())?;
    let mut split = vectorize(start.entries());
    let mut joint = split.clone();
    let mut p = Propagator::new(&l, PropagationMethod::Auto).map_err(|e| e.to_string())?;
    p.advance(&mut split, 1.3).map_err(|e| e.to_string())?;
    p.advance(&mut split, 2.1).map_err(|e| e.to_string())?;
    let mut q = Propagator::new(&l, PropagationMethod::Auto).map_err(|e| e.to_string())?;
    q.advance(&mut joint, 3.4).map_err(|e| e.to_string())?;
    let semigroup = split
        .iter()
        .zip(&joint)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    ensure(semigroup < 1e-8, || format!("semigroup defect {semigroup:.1e}"))?;
    let mut drift: f64 = 0.0;
    let mut y = vectorize(start.entries());
    let mut r = Propagator::new(&l, PropagationMethod::Auto).map_err(|e| e.to_string())?;
    for _ in 0..10 {
        r.advance(&mut y, 10.0).map_err(|e| e.to_string())?;
        let m = quadromech::hilbert::unvectorize(&y, space.dim()).map_err(|e| e.to_string())?;
        drift = drift.max((dense_trace(m.as_ref()) - 1.0).norm());
    }
    ensure(drift < 1e-8, || format!("trace drift {drift:.1e} up to t = 100"))?;

    // long-delay factorization and cross-correlation asymmetry at the blockade point
    let rho = steady_state(&l).map_err(|e| e.to_string())?;
    let mut worst_tau: f64 = 0.0;
    for (kind, tau) in [
        (CorrelationKind::Aa, 50.0),
        (CorrelationKind::Bb, 50.0),
        (CorrelationKind::Ab, 50.0),
        (CorrelationKind::Ab, -50.0),
    ] {
        let g = g2_tau(&l, &rho, kind, &[tau]).map_err(|e| e.to_string())?.values[0];
        ensure((g - 1.0).abs() < 0.02, || format!("g2_{kind}({tau}) = {g:.4}"))?;
        worst_tau = worst_tau.max((g - 1.0).abs());
    }
    let taus: Vec<f64> = (1..64).map(|k| k as f64 * 4.0 * PI / 63.0).collect();
    let neg: Vec<f64> = taus.iter().map(|t| -t).collect();
    let pos = g2_tau(&l, &rho, CorrelationKind::Ab, &taus).map_err(|e| e.to_string())?;
    let back = g2_tau(&l, &rho, CorrelationKind::Ab, &neg).map_err(|e| e.to_string())?;
    let gap = pos
        .values
        .iter()
        .zip(&back.values)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    ensure(gap > 1e-3, || format!("g2_ab(tau) - g2_ab(-tau) at most {gap:.1e}"))?;

    // thermal fixed point
    let thermal = EffectiveParams::resonant(0.0, 0.0, 0.1, 0.1).map_err(|e| e.to_string())?;
    let l = build_liouvillian(&thermal, TruncatedSpace::new(2, 30).unwrap()).map_err(|e| e.to_string())?;
    let rho = steady_state(&l).map_err(|e| e.to_string())?;
    let (_, n_b) = quadromech::steady::occupations(&rho).map_err(|e| e.to_string())?;
    let g = quadromech::g2_zero(&rho, CorrelationKind::Bb).map_err(|e| e.to_string())?;
    ensure((n_b - 0.1).abs() < 1e-6 && (g - 2.0).abs() < 1e-3, || {
        format!("thermal n_b {n_b:.8}, g2_bb {g:.5}")
    })?;

    Ok(format!(
        "50 draws (worst residual {worst_residual:.1e}), semigroup {semigroup:.1e}, trace drift {drift:.1e}, |g2(50)-1| <= {worst_tau:.1e}, asymmetry {gap:.3}, thermal g2_bb {g:.4}"
    ))
}

fn determinism() -> Outcome {
    let run = |threads: &str| -> Result<Vec<u8>, String> {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let out = Command::new(env!("CARGO_BIN_EXE_quadromech"))
            .env_remove("QUADROMECH_THREADS")
            .args([
                "run",
                "--scenario",
                "fig2a",
                "--format",
                "csv",
                "--parallelism",
                threads,
                "--out",
            ])
            .arg(dir.path())
            .output()
            .map_err(|e| e.to_string())?;
        ensure(out.status.success(), || {
            format!("exit {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr))
        })?;
        fs::read(dir.path().join("fig2a.csv")).map_err(|e| e.to_string())
    };
    let (one, eight) = (run("1")?, run("8")?);
    ensure(one == eight, || "CSV differs between parallelism 1 and 8".into())?;
    Ok(format!("{} identical bytes", one.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("closed-form optimal coupling", closed_form),
        ("blockade minimum", blockade_minimum),
        ("optimal coupling curve", optimal_coupling_curve),
        ("pair resonances", pair_resonances),
        ("correlated pairs", correlated_pairs),
        ("manifold spectrum", spectrum),
        ("weak-drive equivalence", weak_drive),
        ("property suite", properties),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("criterion {} ({name}): PASS - {d} [{secs:.1}s]", k + 1),
            Err(d) => {
                failed += 1;
                println!("criterion {} ({name}): FAIL - {d} [{secs:.1}s]", k + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
