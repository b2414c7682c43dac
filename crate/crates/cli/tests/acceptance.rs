//! Acceptance suite. Prints one `[PASS]` or `[FAIL]` line per criterion and
//! exits nonzero if any criterion fails.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, FRAC_PI_6, PI};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config as PropConfig, TestRunner};
use rayon::prelude::*;

use mdfc_cli::commands;
use mdfc_cli::config::Config;
use mdfc_core::bath::BathSpec;
use mdfc_core::evolve::{hybrid_maps, lindblad_propagate, propagate_hybrid, SimConfig};
use mdfc_core::metrics::{pair_fidelity_series, preparation_average, purity, unknown_state_average};
use mdfc_core::oracle::mc_trajectories;
use mdfc_core::qmat::{expm, BlochVector, DensityMatrix, Ket2, Superop, C64};
use mdfc_core::quad::{gauss_laguerre, gauss_legendre, laguerre_doubling};
use mdfc_core::scheme::{
    lindblad_ops, measurement, pair_protection_scheme, preparation_scheme, CorrectionAxis, FeedbackScheme,
    MeasurementAxis,
};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn within(limit: Duration, start: Instant) -> (bool, String) {
    let el = start.elapsed();
    (el <= limit, format!("{:.1}s of {}s", el.as_secs_f64(), limit.as_secs()))
}

fn bath(alpha: f64) -> BathSpec {
    BathSpec::zero_temperature(alpha).unwrap()
}

fn criterion_1() -> Verdict {
    let start = Instant::now();
    let alpha = 0.05;
    let rho0 = DensityMatrix::pure(&Ket2::plus());
    let mut cfg = SimConfig::new(0.0, rho0, FeedbackScheme::do_nothing(), bath(alpha), 5.0).unwrap();
    cfg.record_every = 1;
    let ts = propagate_hybrid(&cfg).unwrap();
    let worst = ts
        .times
        .iter()
        .zip(&ts.states)
        .map(|(t, st)| {
            let want = 0.5 * (1.0 + t * t).powf(-2.0 * alpha);
            (st.mat()[(0, 1)].norm() - want).abs() / want
        })
        .fold(0.0, f64::max);
    let (fast, time) = within(Duration::from_secs(5), start);
    verdict(worst <= 1e-3 && fast, format!("max relative error {worst:.2e} over {} times, {time}", ts.times.len()))
}

fn criterion_2() -> Verdict {
    let start = Instant::now();
    let initial = DensityMatrix::from_bloch(&BlochVector::from_spherical(0.5, FRAC_PI_3, 0.0).unwrap());
    let scheme = preparation_scheme(FRAC_PI_2, 0.0, 4.0).unwrap();
    let mut cfg = SimConfig::new(0.0, initial, scheme, bath(0.0), 1.0).unwrap();
    cfg.record_every = 25;
    let mc = mc_trajectories(&cfg, 100_000, 2024).unwrap();
    let exact = lindblad_propagate(&cfg).unwrap();
    let mut worst: f64 = 0.0;
    for t in [0.25, 0.5, 1.0] {
        let k = mc.times.iter().position(|s| (s - t).abs() < 1e-12).expect("quarter times recorded");
        let (a, b) = (mc.mean_states[k].mat(), exact.states[k].mat());
        for (c, (i, j)) in [(0, 0), (0, 1), (1, 0), (1, 1)].into_iter().enumerate() {
            let d = a[(i, j)] - b[(i, j)];
            for (diff, se) in [(d.re, mc.component_stderr[k][2 * c]), (d.im, mc.component_stderr[k][2 * c + 1])] {
                let z = if se > 0.0 { diff.abs() / se } else if diff.abs() < 1e-12 { 0.0 } else { f64::INFINITY };
                worst = worst.max(z);
            }
        }
    }
    let (fast, time) = within(Duration::from_secs(60), start);
    verdict(worst <= 3.0 && fast, format!("max |z| = {worst:.2} (limit 3), {time}"))
}

fn criterion_3() -> Verdict {
    let start = Instant::now();
    let tpl = SimConfig::new(
        0.0,
        DensityMatrix::maximally_mixed(),
        preparation_scheme(0.0, 0.0, 4.0).unwrap(),
        bath(0.05),
        1.0,
    )
    .unwrap();
    let etas: Vec<f64> = (0..61).map(|k| PI * k as f64 / 60.0).collect();
    let f: Vec<f64> =
        etas.par_iter().map(|&eta| preparation_average(&tpl, eta, 0.0, 0.5, 1.0, (16, 16)).unwrap()).collect();
    let argmin = (0..61).min_by(|&a, &b| f[a].total_cmp(&f[b])).unwrap();
    let step = PI / 60.0;
    let min_ok = (etas[argmin] - FRAC_PI_2).abs() <= step + 1e-12;
    let asym = (0..61).map(|k| (f[k] - f[60 - k]).abs()).fold(0.0, f64::max);
    let mid = f[30];
    let (fast, time) = within(Duration::from_secs(600), start);
    verdict(
        min_ok && asym <= 1e-6 && mid > 0.9 && fast,
        format!("argmin eta = {:.4}, max |F(eta) - F(pi - eta)| = {asym:.1e}, F(pi/2) = {mid:.5}, {time}", etas[argmin]),
    )
}

fn criterion_4() -> Verdict {
    let start = Instant::now();
    let initial = DensityMatrix::from_bloch(&BlochVector::from_spherical(0.5, FRAC_PI_3, 0.0).unwrap());
    let purity_at = |rate: f64, alpha: f64| {
        let scheme = preparation_scheme(FRAC_PI_2, 0.0, rate).unwrap();
        let cfg = SimConfig::new(0.0, initial, scheme, bath(alpha), 1.0).unwrap();
        purity(propagate_hybrid(&cfg).unwrap().last())
    };
    let by_rate: Vec<f64> = [1.0, 2.0, 4.0, 8.0].iter().map(|&r| purity_at(r, 0.05)).collect();
    let by_alpha: Vec<f64> = [0.01, 0.05, 0.1].iter().map(|&a| purity_at(4.0, a)).collect();
    let rate_ok = by_rate.windows(2).all(|w| w[1] >= w[0]);
    let alpha_ok = by_alpha.windows(2).all(|w| w[1] <= w[0]);
    let (fast, time) = within(Duration::from_secs(30), start);
    verdict(
        rate_ok && alpha_ok && fast,
        format!("purity vs R {by_rate:.5?}, vs alpha {by_alpha:.5?}, {time}"),
    )
}

fn criterion_5() -> Verdict {
    let start = Instant::now();
    let theta = FRAC_PI_6;
    let series = |scheme: FeedbackScheme| {
        let mut cfg = SimConfig::new(0.0, DensityMatrix::maximally_mixed(), scheme, bath(0.05), 5.0).unwrap();
        cfg.record_every = 1;
        pair_fidelity_series(theta, &cfg).unwrap()
    };
    let weak = series(pair_protection_scheme(1.0, 0.5, MeasurementAxis::Z, CorrectionAxis::Y, 0.5).unwrap());
    let none = series(FeedbackScheme::do_nothing().with_rate(0.5).unwrap());
    let proj = series(pair_protection_scheme(0.0, 1.3, MeasurementAxis::Z, CorrectionAxis::Y, 0.5).unwrap());
    let mut first_bad = None;
    let mut best_gain = f64::NEG_INFINITY;
    for k in 0..weak.0.len() {
        let t = weak.0[k];
        if t <= 0.0 {
            continue;
        }
        let (fw, fd, fp) = (weak.1[k], none.1[k], proj.1[k]);
        best_gain = best_gain.max(fw - fd);
        if first_bad.is_none() && !(fw >= fd && fd >= fp) {
            first_bad = Some((t, fw, fd, fp));
        }
    }
    let (fast, time) = within(Duration::from_secs(30), start);
    let detail = match first_bad {
        Some((t, fw, fd, fp)) => format!(
            "ordering broken at t = {t:.2}: weak {fw:.6}, do-nothing {fd:.6}, projective {fp:.6}; \
             max gain {best_gain:.2e}, {time}"
        ),
        None => format!("ordering holds on (0, 5], max gain {best_gain:.2e}, {time}"),
    };
    verdict(first_bad.is_none() && best_gain > 0.0 && fast, detail)
}

const MIXED_SWEEP: &str = r#"{
    "model": {"omega0": 0},
    "bath": {"alpha": 0.05, "omega_c": 1.0, "T0": true},
    "scheme": {"kind": "mixed", "p_plus": 0.5, "R": 0.5},
    "solver": {"t_max": 1},
    "sweep": {
        "axes": [{"name": "eta", "start": 0, "stop": 3.141592653589793, "points": 61}],
        "objective": "protect-mixed"
    }
}"#;

fn criterion_6() -> Verdict {
    let start = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for theta in [FRAC_PI_6, FRAC_PI_4, FRAC_PI_3, FRAC_PI_2] {
        let cfg = Config::from_str_with(MIXED_SWEEP, &[format!("scheme.theta={theta:.17}")]).unwrap();
        let optima = commands::sweep(&cfg).unwrap().optima.unwrap();
        let expected = [FRAC_PI_2 - theta, FRAC_PI_2 + theta];
        let found: Vec<f64> = optima.iter().map(|o| o.point[0]).collect();
        let matched = optima.len() == 2
            && expected.iter().all(|e| optima.iter().any(|o| (o.point[0] - e).abs() <= 0.02 && o.value >= 0.99));
        pass &= matched;
        parts.push(format!("theta = {theta:.4}: optima {found:.4?} (want {expected:.4?})"));
    }
    let (fast, time) = within(Duration::from_secs(120), start);
    verdict(pass && fast, format!("{}; {time}", parts.join("; ")))
}

fn criterion_7() -> Verdict {
    let start = Instant::now();
    let tpl = SimConfig::new(0.0, DensityMatrix::maximally_mixed(), FeedbackScheme::do_nothing(), bath(0.05), 1.0)
        .unwrap();
    let baseline = unknown_state_average(&FeedbackScheme::do_nothing().with_rate(0.5).unwrap(), &tpl, 1.0).unwrap();
    let families = [
        (MeasurementAxis::Z, CorrectionAxis::Y),
        (MeasurementAxis::X, CorrectionAxis::Y),
        (MeasurementAxis::X, CorrectionAxis::Z),
    ];
    let mut worst = f64::NEG_INFINITY;
    for (axis, corr) in families {
        for (chi, eta) in [(1.0, 0.5), (0.3, 1.2)] {
            let scheme = pair_protection_scheme(chi, eta, axis, corr, 0.5).unwrap();
            let f = unknown_state_average(&scheme, &tpl, 1.0).unwrap();
            worst = worst.max(f - baseline);
        }
    }
    let (fast, time) = within(Duration::from_secs(120), start);
    verdict(
        worst <= 0.0 && fast,
        format!("do-nothing {baseline:.6}, largest excess of a feedback scheme {worst:.2e}, {time}"),
    )
}

fn arb_scheme() -> impl Strategy<Value = FeedbackScheme> {
    (0usize..4, 0.0..=FRAC_PI_2, 0.0..PI, 0.0..2.0 * PI, 0.0..6.0f64).prop_map(|(kind, chi, eta, zeta, rate)| {
        match kind {
            0 => preparation_scheme(eta, zeta, rate).unwrap(),
            1 => pair_protection_scheme(chi, eta, MeasurementAxis::Z, CorrectionAxis::Y, rate).unwrap(),
            2 => pair_protection_scheme(chi, eta, MeasurementAxis::X, CorrectionAxis::Y, rate).unwrap(),
            _ => pair_protection_scheme(chi, eta, MeasurementAxis::X, CorrectionAxis::Z, rate).unwrap(),
        }
    })
}

fn arb_bloch() -> impl Strategy<Value = BlochVector> {
    (0.0..=1.0f64, 0.0..PI, 0.0..2.0 * PI).prop_map(|(r, th, ph)| BlochVector::from_spherical(r, th, ph).unwrap())
}

fn arb_superop() -> impl Strategy<Value = Superop> {
    prop::array::uniform16((-1.0..1.0f64, -1.0..1.0f64)).prop_map(|v| {
        let mut s = Superop::zero();
        for (k, (re, im)) in v.into_iter().enumerate() {
            s.0[k / 4][k % 4] = C64::new(re, im);
        }
        s
    })
}

fn property(name: &str, cases: u32, mut body: impl FnMut(&mut TestRunner) -> Result<(), String>) -> Result<(), String> {
    let mut runner = TestRunner::new(PropConfig { cases, failure_persistence: None, ..PropConfig::default() });
    body(&mut runner).map_err(|e| format!("{name}: {e}"))
}

fn invariant_suite() -> Result<usize, String> {
    let mut checked = 0;
    property("state preservation", 16, |r| {
        r.run(&(arb_scheme(), arb_bloch(), 0.0..0.1f64), |(scheme, a, alpha)| {
            let mut cfg = SimConfig::new(0.3, DensityMatrix::from_bloch(&a), scheme, bath(alpha), 1.0).unwrap();
            cfg.dt = 0.02;
            for st in propagate_hybrid(&cfg).unwrap().states {
                let rep = st.report();
                prop_assert!(rep.trace_defect <= 1e-8 && rep.hermiticity_defect <= 1e-8 && rep.min_eigenvalue >= -1e-6);
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
    })?;
    checked += 1;
    property("POVM completeness", 64, |r| {
        r.run(&(0.0..=FRAC_PI_2, any::<bool>()), |(chi, x)| {
            let axis = if x { MeasurementAxis::X } else { MeasurementAxis::Z };
            prop_assert!(measurement(axis, chi).unwrap().completeness_defect() <= 1e-12);
            Ok(())
        })
        .map_err(|e| e.to_string())
    })?;
    checked += 1;
    property("generator trace preservation", 64, |r| {
        r.run(&arb_scheme(), |scheme| {
            prop_assert!(SimConfig::new(0.0, DensityMatrix::maximally_mixed(), scheme.clone(), bath(0.0), 1.0)
                .unwrap()
                .generator()
                .trace_defect()
                <= 1e-10);
            prop_assert!(mdfc_core::evolve::feedback_generator(0.0, &lindblad_ops(&scheme)).trace_defect() <= 1e-10);
            Ok(())
        })
        .map_err(|e| e.to_string())
    })?;
    checked += 1;
    property("expm group law", 64, |r| {
        r.run(&(arb_superop(), -2.0..2.0f64, -2.0..2.0f64), |(g, s, t)| {
            let lhs = expm(&g, s + t).unwrap();
            let rhs = expm(&g, s).unwrap() * expm(&g, t).unwrap();
            prop_assert!((lhs - rhs).max_abs() <= 1e-10 * lhs.max_abs().max(1.0));
            Ok(())
        })
        .map_err(|e| e.to_string())
    })?;
    checked += 1;
    property("quadrature convergence gates", 32, |r| {
        r.run(&(1usize..20, 0.5..3.0f64), |(n, scale)| {
            let rule = gauss_legendre(n);
            let deg = 2 * n - 1;
            let got: f64 = rule.nodes.iter().zip(&rule.weights).map(|(x, w)| w * x.powi(deg as i32 - 1)).sum();
            let want = if (deg - 1) % 2 == 0 { 2.0 / deg as f64 } else { 0.0 };
            prop_assert!((got - want).abs() <= 1e-12);
            let k = n % 11;
            let lag = gauss_laguerre(64);
            let m: f64 = lag.nodes.iter().zip(&lag.weights).map(|(x, w)| w * x.powi(k as i32)).sum();
            let fact: f64 = (1..=k).map(|j| j as f64).product();
            prop_assert!((m / fact - 1.0).abs() <= 1e-9);
            let i = laguerre_doubling(|w: f64| (-w * scale).exp() * (w).cos(), 1.0, 1e-10, 1e-12).unwrap();
            let exact = (1.0 + scale) / ((1.0 + scale).powi(2) + 1.0);
            prop_assert!((i - exact).abs() <= 1e-9);
            Ok(())
        })
        .map_err(|e| e.to_string())
    })?;
    checked += 1;
    let scheme = pair_protection_scheme(1.0, 0.5, MeasurementAxis::Z, CorrectionAxis::Y, 0.5).unwrap();
    let base = SimConfig::new(0.0, DensityMatrix::maximally_mixed(), scheme, bath(0.05), 5.0).unwrap();
    let last = |dt: f64| *hybrid_maps(&SimConfig { dt, ..base.clone() }).unwrap().last();
    let reference = last(0.25 / 8.0);
    let ratio = (last(0.25) - reference).max_abs() / (last(0.125) - reference).max_abs();
    if !(12.0..=20.0).contains(&ratio) {
        return Err(format!("RK4 order: error ratio {ratio:.2} outside [12, 20]"));
    }
    checked += 1;
    Ok(checked)
}

fn criterion_8() -> Verdict {
    let start = Instant::now();
    let outcome = invariant_suite();
    let (fast, time) = within(Duration::from_secs(120), start);
    match outcome {
        Ok(n) => verdict(fast, format!("{n} invariant groups hold, {time}")),
        Err(e) => verdict(false, format!("{e}, {time}")),
    }
}

fn run_cli(command: &str, config: &str, out: &std::path::Path) -> Vec<u8> {
    let run = Command::new(env!("CARGO_BIN_EXE_mdfc"))
        .args([command, "--config", config, "--seed", "7", "--out"])
        .arg(out)
        .output()
        .expect("mdfc runs");
    assert!(run.status.success(), "mdfc {command} exited with {}", run.status);
    std::fs::read(out.join(format!("{command}.csv"))).unwrap()
}

fn criterion_9() -> Verdict {
    let configs = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut parts = Vec::new();
    let mut pass = true;
    for command in ["validate", "prepare"] {
        let config = configs.join(format!("{command}.json"));
        let config = config.to_str().unwrap();
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let first = run_cli(command, config, a.path());
        let second = run_cli(command, config, b.path());
        let same = first == second && !first.is_empty();
        pass &= same;
        parts.push(format!("{command}: {} bytes, identical = {same}", first.len()));
    }
    verdict(pass, parts.join("; "))
}

fn main() {
    let criteria: [(u32, fn() -> Verdict); 9] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
    ];
    let only: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = Vec::new();
    for (n, run) in criteria {
        if !only.is_empty() && !only.contains(&n) {
            continue;
        }
        let v = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            verdict(false, format!("panicked: {}", msg.unwrap_or_default()))
        });
        println!("[{}] criterion {n}: {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        if !v.pass {
            failed.push(n);
        }
    }
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
