//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use helm_core::control::rd_partials;
use helm_core::dual::Dual;
use helm_core::guidance::{desired_yaw_rate, g_identity_residual, solve_g, RdContext, RdInputs};
use helm_core::path::wrap_pi;
use helm_core::scenario::ScenarioConfig;
use helm_core::sim::{assess, run_scenario, Record, RunOutput};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn scenario(name: &str) -> ScenarioConfig {
    ScenarioConfig::load(&root().join("scenarios").join(name)).expect("shipped scenario loads")
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_helm-sim"))
}

struct Check {
    pass: bool,
    detail: String,
}

impl Check {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

/// Richardson-extrapolated central difference.
fn richardson(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    let d1 = (f(x + h) - f(x - h)) / (2.0 * h);
    let d2 = (f(x + h / 2.0) - f(x - h / 2.0)) / h;
    (4.0 * d2 - d1) / 3.0
}

fn r_squared(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    sxy * sxy / (sxx * syy)
}

fn max_over(recs: &[Record], pred: impl Fn(&Record) -> bool, f: impl Fn(&Record) -> f64) -> f64 {
    recs.iter()
        .filter(|r| pred(r))
        .map(|r| f(r).abs())
        .fold(0.0, f64::max)
}

fn feasibility_constants() -> Check {
    let t0 = Instant::now();
    let cfg = scenario("case_study.toml");
    let a = assess(&cfg).unwrap();
    let secs = t0.elapsed().as_secs_f64();
    let f = &a.feasibility;
    let tube = f.tube();
    let ok = ((f.lemma2_bound / 0.1333) - 1.0).abs() <= 0.05
        && f.kappa_max == 0.0025
        && (f.v_max - 1.5620).abs() <= 1e-3
        && ((tube / 370.0) - 1.0).abs() <= 0.005
        && a.admitted
        && secs < 1.0;
    Check::new(
        ok,
        format!(
            "Y_min/X_max = {:.5}, kappa_max = {}, V_max = {:.5}, tube = {:.3} m, {:.3} s",
            f.lemma2_bound, f.kappa_max, f.v_max, tube, secs
        ),
    )
}

fn convergence(out: &RunOutput, secs: f64) -> Check {
    let recs = &out.series.records;
    let y = max_over(recs, |r| r.t > 600.0, |r| r.y_bp);
    let psi = max_over(recs, |r| r.t > 600.0, |r| r.psi_tilde);
    let x = max_over(recs, |r| r.t > 200.0, |r| r.x_bp);
    let ok = out.report.clean
        && out.report.t_final == 1000.0
        && y < 0.5
        && psi < 0.01
        && x < 1e-3
        && secs < 30.0;
    Check::new(
        ok,
        format!(
            "clean = {}, t > 600: max|y_bp| = {y:.2e} m, max|psi_tilde| = {psi:.2e} rad; t > 200: max|x_bp| = {x:.2e} m; {secs:.2} s",
            out.report.clean
        ),
    )
}

fn observer(cfg: &ScenarioConfig) -> Check {
    let t0 = Instant::now();
    let out = run_scenario(cfg).unwrap();
    let (vx, vy) = (cfg.environment.vx, cfg.environment.vy);
    let k2 = cfg.observer.kx2;
    let vmax = cfg.environment.environment().vmax;
    let recs = &out.series.records;
    let w: Vec<f64> = recs
        .iter()
        .map(|r| {
            let (ex, ey) = (r.x - r.x_hat, r.y - r.y_hat);
            let (evx, evy) = (vx - r.vx_hat, vy - r.vy_hat);
            ex * ex + ey * ey + (evx * evx + evy * evy) / k2
        })
        .collect();
    let tol = 1e-9 * w[0];
    let monotone = w.windows(2).all(|p| p[1] <= p[0] + tol);
    let norm = |r: &Record| (vx - r.vx_hat).hypot(vy - r.vy_hat);
    let nmax = recs.iter().map(norm).fold(0.0, f64::max);
    let fit: Vec<(f64, f64)> = recs
        .iter()
        .filter(|r| r.t <= 100.0)
        .map(|r| (r.t, norm(r).ln()))
        .collect();
    let r2 = r_squared(&fit);
    let vn_ok = recs.iter().all(|r| r.vn_hat.abs() < r.u_rd);
    let vn_max = recs.iter().map(|r| r.vn_hat.abs()).fold(0.0, f64::max);
    let secs = t0.elapsed().as_secs_f64();
    let ok = monotone && nmax <= vmax && r2 > 0.95 && vn_ok && secs < 5.0;
    Check::new(
        ok,
        format!(
            "W monotone = {monotone}, max||V_tilde|| = {nmax:.4} <= {vmax:.4}, R^2 on [0,100] = {r2:.4}, max|VN_hat| = {vn_max:.4}; {secs:.2} s"
        ),
    )
}

fn surge(out: &RunOutput, k_u: f64) -> Check {
    let recs = &out.series.records;
    let e0 = recs[0].u_r - recs[0].u_rd;
    let mut worst: f64 = 0.0;
    let mut t_last = 0.0;
    for r in recs {
        let pred = e0 * (-k_u * r.t).exp();
        if pred.abs() < e0.abs() / 100.0 {
            break;
        }
        worst = worst.max(((r.u_r - r.u_rd) / pred - 1.0).abs());
        t_last = r.t;
    }
    let two_decades = (100f64).ln() / k_u;
    let ok = e0 != 0.0 && worst < 0.02 && t_last >= two_decades - 0.2;
    Check::new(
        ok,
        format!(
            "max relative deviation from e0*exp(-k_u t) = {worst:.2e} over t in [0, {t_last:.1}] s"
        ),
    )
}

fn derivative_engine() -> Check {
    let cfg = scenario("case_study.toml");
    let a = assess(&cfg).unwrap();
    let tube = a.feasibility.tube();
    let path = cfg.geometry().unwrap();
    let vessel = cfg.vessel_params().unwrap();
    let ctx = RdContext {
        path: &path,
        hydro: vessel.hydro(),
        guidance: cfg.guidance,
        observer: cfg.observer.gains(),
        c_min: cfg.monitor.c_min,
    };
    let delta = cfg.guidance.delta;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut worst_g, mut worst_rd) = (0.0f64, 0.0f64);
    let mut states = 0;
    let mut draws = 0;
    while states < 200 && draws < 10_000 {
        draws += 1;
        let inp = RdInputs {
            theta: rng.random_range(0.0..2500.0),
            v_r: rng.random_range(-0.3..0.3),
            u_r: rng.random_range(4.0..6.0),
            u_rd: rng.random_range(4.5..5.5),
            du_rd: rng.random_range(-0.1..0.1),
            vt_hat: rng.random_range(-1.5..1.5),
            vn_hat: rng.random_range(-1.5..1.5),
            y_bp: rng.random_range(-0.95 * tube..0.95 * tube),
            x_bp: rng.random_range(-20.0..20.0),
            psi_tilde: rng.random_range(-0.5..0.5),
            x_tilde: rng.random_range(-5.0..5.0),
            y_tilde: rng.random_range(-5.0..5.0),
        };
        let Ok((partials, terms)) = rd_partials(&inp, &ctx) else {
            continue;
        };
        if terms.c_r_guarded {
            continue;
        }
        states += 1;

        // g as a function of (u_td, V̂_N, y_bp)
        let gx = [terms.u_td, inp.vn_hat, inp.y_bp];
        let g_at = |k: usize, v: f64| {
            let mut a = gx;
            a[k] = v;
            solve_g(a[0], a[1], a[2], delta).unwrap().g
        };
        for k in 0..3 {
            let seeded: [Dual; 3] =
                std::array::from_fn(|i| Dual::new(gx[i], if i == k { 1.0 } else { 0.0 }));
            let an = solve_g(seeded[0], seeded[1], seeded[2], delta)
                .unwrap()
                .g
                .derivative();
            let fd = richardson(|v| g_at(k, v), gx[k], 1e-3 * (1.0 + gx[k].abs()));
            worst_g = worst_g.max((an - fd).abs() / fd.abs().max(1e-12));
        }

        let base = inp.to_array();
        let an = partials.to_array();
        let scale = an.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let rd_at = |k: usize, v: f64| {
            let mut a = base;
            a[k] = v;
            desired_yaw_rate(&RdInputs::from_array(a), &ctx)
                .unwrap()
                .r_d
        };
        for k in 0..12 {
            let fd = richardson(|v| rd_at(k, v), base[k], 1e-3 * (1.0 + base[k].abs()));
            worst_rd = worst_rd.max((an[k] - fd).abs() / fd.abs().max(1e-9 * scale));
        }
    }
    let ok = states == 200 && worst_g < 1e-6 && worst_rd < 1e-6;
    Check::new(
        ok,
        format!(
            "{states} in-tube states: max relative error g = {worst_g:.2e}, r_d = {worst_rd:.2e}"
        ),
    )
}

fn g_identity(out: &RunOutput, delta: f64) -> Check {
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for r in &out.series.records {
        let res = g_identity_residual(r.u_td, r.vn_hat, r.y_bp, r.g, delta).abs();
        ok &= res < 1e-9 * (1.0 + r.vn_hat.abs());
        worst = worst.max(res);
    }
    Check::new(
        ok,
        format!(
            "{} logged steps, max residual = {worst:.2e}",
            out.series.len()
        ),
    )
}

/// Max deviation of centrally differenced (ψ̃, r̃) from the error-dynamics
/// right-hand side over t ∈ [50, 150].
fn residuals(dt: f64) -> (f64, f64) {
    let mut cfg = scenario("case_study.toml");
    cfg.sim.dt = dt;
    cfg.sim.t_end = 151.0;
    cfg.sim.log_every = 1;
    let out = run_scenario(&cfg).unwrap();
    let recs = &out.series.records;
    let (mut rp, mut rr) = (0.0f64, 0.0f64);
    for k in 1..recs.len() - 1 {
        let r = &recs[k];
        if r.t < 50.0 || r.t > 150.0 {
            continue;
        }
        let dpsi = wrap_pi(recs[k + 1].psi_tilde - recs[k - 1].psi_tilde) / (2.0 * dt);
        let dr = (recs[k + 1].r_tilde - recs[k - 1].r_tilde) / (2.0 * dt);
        rp = rp.max((dpsi - r.rhs_psi_tilde).abs());
        rr = rr.max((dr - r.rhs_r_tilde).abs());
    }
    (rp, rr)
}

fn closed_loop_residuals() -> Check {
    let (p1, r1) = residuals(0.01);
    let (p2, r2) = residuals(0.005);
    let (qp, qr) = (p1 / p2, r1 / r2);
    let ok = qp >= 3.5 && qr >= 3.5;
    Check::new(
        ok,
        format!(
            "psi_tilde residual {p1:.2e} -> {p2:.2e} (x{qp:.2}), r_tilde residual {r1:.2e} -> {r2:.2e} (x{qr:.2})"
        ),
    )
}

fn boundedness(out: &RunOutput) -> Check {
    let r = &out.report;
    let sigma = r.sigma;
    let tight = scenario("tight_circle.toml");
    let a = assess(&tight).unwrap();
    let code = bin()
        .arg("check")
        .arg(root().join("scenarios/tight_circle.toml"))
        .output()
        .unwrap()
        .status
        .code();
    let ok = r.v_r_max.is_finite()
        && r.cr_min >= r.c_min
        && r.condition1_margin_min >= sigma
        && !a.feasibility.lemma2.pass
        && !a.admitted
        && code == Some(2);
    Check::new(
        ok,
        format!(
            "v_r_max = {:.4}, min|C_r| = {:.4} >= {}, min(1 - kappa y_bp) = {:.4} >= sigma = {:.4}; R = 5 circle: curvature bound {}, check exit {:?}",
            r.v_r_max,
            r.cr_min,
            r.c_min,
            r.condition1_margin_min,
            sigma,
            if a.feasibility.lemma2.pass { "pass" } else { "fail" },
            code
        ),
    )
}

fn terminal_state(dt: f64) -> Vec<f64> {
    let mut cfg = scenario("smooth.toml");
    cfg.sim.dt = dt;
    let out = run_scenario(&cfg).unwrap();
    assert!(out.report.clean && out.report.t_final == cfg.sim.t_end);
    let r = out.series.last().unwrap();
    vec![
        r.x, r.y, r.psi, r.u_r, r.v_r, r.r, r.theta, r.x_hat, r.y_hat, r.vx_hat, r.vy_hat,
    ]
}

fn integrator_order() -> Check {
    let a = terminal_state(0.02);
    let b = terminal_state(0.01);
    let c = terminal_state(0.005);
    let dist = |p: &[f64], q: &[f64]| {
        p.iter()
            .zip(q)
            .map(|(x, y)| (x - y).powi(2))
            .sum::<f64>()
            .sqrt()
    };
    let (d1, d2) = (dist(&a, &b), dist(&b, &c));
    let ratio = d1 / d2;
    Check::new(
        (12.0..=20.0).contains(&ratio),
        format!(
            "|x(0.02) - x(0.01)| = {d1:.3e}, |x(0.01) - x(0.005)| = {d2:.3e}, ratio = {ratio:.2}"
        ),
    )
}

fn determinism() -> Check {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = root().join("scenarios/case_study.toml");
    let run = |name: &str| {
        let dir = tmp.path().join(name);
        let st = bin()
            .args(["run", "--t-end", "100", "--out"])
            .arg(&dir)
            .arg(&cfg)
            .output()
            .unwrap()
            .status;
        assert!(st.success(), "run exited with {st}");
        std::fs::read(dir.join("timeseries.csv")).unwrap()
    };
    let (a, b) = (run("a"), run("b"));
    let sweep = |threads: &str| {
        let dir = tmp.path().join(format!("sweep{threads}"));
        let st = bin()
            .env("HELM_SIM_THREADS", threads)
            .args(["sweep", "--t-end", "200", "--spec"])
            .arg(root().join("sweeps/delta.toml"))
            .arg("--out")
            .arg(&dir)
            .arg(&cfg)
            .output()
            .unwrap()
            .status;
        assert!(st.success(), "sweep exited with {st}");
        std::fs::read(dir.join("summary.csv")).unwrap()
    };
    let (s1, s3) = (sweep("1"), sweep("3"));
    let ok = a == b && !a.is_empty() && s1 == s3 && !s1.is_empty();
    Check::new(
        ok,
        format!(
            "timeseries.csv identical = {} ({} bytes), summary.csv with 1 vs 3 threads identical = {}",
            a == b,
            a.len(),
            s1 == s3
        ),
    )
}

type Criterion<'a> = (&'static str, Box<dyn FnOnce() -> Check + 'a>);

fn main() {
    let case = scenario("case_study.toml");
    let t0 = Instant::now();
    let run = run_scenario(&case).unwrap();
    let run_secs = t0.elapsed().as_secs_f64();

    let results: Vec<Criterion> = vec![
        ("feasibility constants", Box::new(feasibility_constants)),
        (
            "case-study convergence",
            Box::new(|| convergence(&run, run_secs)),
        ),
        ("observer", Box::new(|| observer(&case))),
        ("surge loop", Box::new(|| surge(&run, case.control.k_u))),
        ("derivative engine", Box::new(derivative_engine)),
        (
            "g-identity",
            Box::new(|| g_identity(&run, case.guidance.delta)),
        ),
        ("closed-loop residuals", Box::new(closed_loop_residuals)),
        ("boundedness monitors", Box::new(|| boundedness(&run))),
        ("integrator order", Box::new(integrator_order)),
        ("determinism", Box::new(determinism)),
    ];
    let mut failed = 0;
    for (i, (name, check)) in results.into_iter().enumerate() {
        let c = check();
        if !c.pass {
            failed += 1;
        }
        println!(
            "{} {:>2} {name}: {}",
            if c.pass { "PASS" } else { "FAIL" },
            i + 1,
            c.detail
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
