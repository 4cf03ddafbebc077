use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use helm_core::dual::{Dual, Scalar};
use helm_core::guidance::{RdContext, RdInputs};
use helm_core::path::{wrap_pi, PathGeometry, PathSpec};
use helm_core::scenario::ScenarioConfig;
use helm_core::sim::run_scenario;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn scenario(name: &str) -> ScenarioConfig {
    let p: PathBuf = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(name);
    ScenarioConfig::load(&p).unwrap()
}

/// Central difference with one Richardson extrapolation step.
fn richardson(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    let d1 = (f(x + h) - f(x - h)) / (2.0 * h);
    let d2 = (f(x + h / 2.0) - f(x - h / 2.0)) / h;
    (4.0 * d2 - d1) / 3.0
}

fn rotate(p: [f64; 2], a: f64) -> [f64; 2] {
    let (s, c) = a.sin_cos();
    [c * p[0] - s * p[1], s * p[0] + c * p[1]]
}

// ---------------------------------------------------------------- config

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn config_round_trips_through_toml(
        vx in -2.0..2.0f64,
        vy in -2.0..2.0f64,
        delta in 5.0..200.0f64,
        k1 in 0.1..2000.0f64,
        u_rd in 1.0..8.0f64,
        x0 in -1e3..1e3f64,
        dt in 1e-4..0.1f64,
        seed in proptest::option::of(any::<u64>()),
        rk4 in any::<bool>(),
    ) {
        let mut cfg = scenario("case_study.toml");
        cfg.environment.vx = vx;
        cfg.environment.vy = vy;
        cfg.guidance.delta = delta;
        cfg.control.k1 = k1;
        cfg.reference = helm_core::scenario::ReferenceProfile::Constant { u_rd };
        cfg.initial.x = x0;
        cfg.sim.dt = dt;
        cfg.observer.seed = seed;
        if rk4 {
            cfg.sim.integrator = helm_core::scenario::Integrator::Rk4;
        }
        let text = cfg.to_toml_string().unwrap();
        let back = ScenarioConfig::from_toml_str(&text, Path::new("<round-trip>")).unwrap();
        prop_assert_eq!(back, cfg);
    }
}

// ------------------------------------------------------- rigid motions

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn line_frame_errors_are_invariant_under_rigid_motion(
        heading in -PI..PI,
        ox in -100.0..100.0f64, oy in -100.0..100.0f64,
        px in -500.0..500.0f64, py in -500.0..500.0f64,
        theta in -300.0..300.0f64,
        rot in -PI..PI,
        tx in -1e3..1e3f64, ty in -1e3..1e3f64,
    ) {
        let a = PathGeometry::line([ox, oy], heading);
        let o2 = rotate([ox, oy], rot);
        let b = PathGeometry::line([o2[0] + tx, o2[1] + ty], heading + rot);
        let p2 = rotate([px, py], rot);
        let ea = a.frame_error(theta, [px, py]);
        let eb = b.frame_error(theta, [p2[0] + tx, p2[1] + ty]);
        prop_assert!((ea.x_bp - eb.x_bp).abs() < 1e-9);
        prop_assert!((ea.y_bp - eb.y_bp).abs() < 1e-9);
        let na = a.nearest_theta([px, py]).unwrap();
        let nb = b.nearest_theta([p2[0] + tx, p2[1] + ty]).unwrap();
        prop_assert!((na - nb).abs() < 1e-9);
        prop_assert!(wrap_pi(b.tangent_angle(theta) - a.tangent_angle(theta) - rot).abs() < 1e-12);
    }

    #[test]
    fn circle_frame_errors_are_invariant_under_rigid_motion(
        radius in 10.0..1000.0f64,
        clockwise in any::<bool>(),
        cx in -100.0..100.0f64, cy in -100.0..100.0f64,
        px in -500.0..500.0f64, py in -500.0..500.0f64,
        theta in -3000.0..3000.0f64,
        rot in -PI..PI,
        tx in -1e3..1e3f64, ty in -1e3..1e3f64,
    ) {
        let a = PathGeometry::circle([cx, cy], radius, clockwise).unwrap();
        let c2 = rotate([cx, cy], rot);
        let b = PathGeometry::circle([c2[0] + tx, c2[1] + ty], radius, clockwise).unwrap();
        // rotating the plane advances the arc-length parameter by ±Rφ
        let dir = if clockwise { -1.0 } else { 1.0 };
        let theta_b = theta + dir * radius * rot;
        let p2 = rotate([px, py], rot);
        let ea = a.frame_error(theta, [px, py]);
        let eb = b.frame_error(theta_b, [p2[0] + tx, p2[1] + ty]);
        let tol = 1e-9 * (1.0 + radius + theta.abs());
        prop_assert!((ea.x_bp - eb.x_bp).abs() < tol, "{} vs {}", ea.x_bp, eb.x_bp);
        prop_assert!((ea.y_bp - eb.y_bp).abs() < tol, "{} vs {}", ea.y_bp, eb.y_bp);
        prop_assert!((a.curvature(theta) - b.curvature(theta_b)).abs() < 1e-15);
    }
}

#[test]
fn rotated_line_scenario_has_identical_error_signals() {
    let base = {
        let mut c = scenario("straight_line.toml");
        c.environment.vx = 0.6;
        c.environment.vy = -0.9;
        c.environment.vmax = None;
        c.initial.y = 25.0;
        c.initial.psi = 0.3;
        c.initial.u_r = 0.0;
        c.sim.t_end = 40.0;
        c.sim.log_every = 100;
        c.normalize(Path::new(".")).unwrap()
    };
    let a = run_scenario(&base).unwrap();
    assert!(a.report.clean);

    for rot in [0.7, -2.1, PI] {
        let mut c = base.clone();
        let v = rotate([c.environment.vx, c.environment.vy], rot);
        c.environment.vx = v[0];
        c.environment.vy = v[1];
        let p = rotate([c.initial.x, c.initial.y], rot);
        c.initial.x = p[0] + 50.0;
        c.initial.y = p[1] - 20.0;
        c.initial.psi += rot;
        let PathSpec::Line { origin, heading } = c.path else {
            unreachable!()
        };
        let o = rotate(origin, rot);
        c.path = PathSpec::Line {
            origin: [o[0] + 50.0, o[1] - 20.0],
            heading: heading + rot,
        };
        let b = run_scenario(&c).unwrap();
        assert_eq!(a.series.len(), b.series.len());
        for (ra, rb) in a.series.records.iter().zip(&b.series.records) {
            for (x, y) in [
                (ra.x_bp, rb.x_bp),
                (ra.y_bp, rb.y_bp),
                (ra.psi_tilde, rb.psi_tilde),
                (ra.r_tilde, rb.r_tilde),
                (ra.u_r, rb.u_r),
                (ra.vt_hat, rb.vt_hat),
                (ra.vn_hat, rb.vn_hat),
            ] {
                assert!(
                    (x - y).abs() < 1e-7 * (1.0 + x.abs()),
                    "rot {rot}, t {}: {x} vs {y}",
                    ra.t
                );
            }
        }
    }
}

// -------------------------------------------------- derivative engine

#[derive(Debug, Clone)]
enum Expr {
    X,
    C(f64),
    Add(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    /// `a / (b² + 1)`
    Div(Box<Expr>, Box<Expr>),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
    Atan(Box<Expr>),
    /// `atan2(a, b² + 0.5)`
    Atan2(Box<Expr>, Box<Expr>),
    /// `√(e² + 1)`
    Sqrt(Box<Expr>),
}

impl Expr {
    fn random(rng: &mut ChaCha8Rng, depth: u32) -> Expr {
        if depth == 0 || rng.random_bool(0.2) {
            return if rng.random_bool(0.6) {
                Expr::X
            } else {
                Expr::C(rng.random_range(-2.0..2.0))
            };
        }
        let op = rng.random_range(0..8);
        let mut sub = || Box::new(Expr::random(rng, depth - 1));
        match op {
            0 => Expr::Add(sub(), sub()),
            1 => Expr::Mul(sub(), sub()),
            2 => Expr::Div(sub(), sub()),
            3 => Expr::Sin(sub()),
            4 => Expr::Cos(sub()),
            5 => Expr::Atan(sub()),
            6 => Expr::Atan2(sub(), sub()),
            _ => Expr::Sqrt(sub()),
        }
    }

    fn eval<T: Scalar>(&self, x: T) -> T {
        match self {
            Expr::X => x,
            Expr::C(c) => T::cst(*c),
            Expr::Add(a, b) => a.eval(x) + b.eval(x),
            Expr::Mul(a, b) => a.eval(x) * b.eval(x),
            Expr::Div(a, b) => a.eval(x) / (b.eval(x).sqr() + 1.0),
            Expr::Sin(a) => a.eval(x).sin(),
            Expr::Cos(a) => a.eval(x).cos(),
            Expr::Atan(a) => a.eval(x).atan(),
            Expr::Atan2(a, b) => a.eval(x).atan2(b.eval(x).sqr() + 0.5),
            Expr::Sqrt(a) => (a.eval(x).sqr() + 1.0).sqrt(),
        }
    }
}

#[test]
fn dual_derivatives_match_finite_differences_on_random_expressions() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut checked = 0;
    for _ in 0..1000 {
        let e = Expr::random(&mut rng, 4);
        let x0: f64 = rng.random_range(-1.5..1.5);
        let ad = e.eval(Dual::var(x0));
        assert_eq!(ad.re.to_bits(), e.eval(x0).to_bits());
        let fd = richardson(|x| e.eval(x), x0, 1e-3);
        let scale = ad.eps.abs().max(1e-2);
        assert!(
            (ad.eps - fd).abs() / scale < 1e-8,
            "{e:?} at {x0}: dual {} vs fd {fd}",
            ad.eps
        );
        checked += 1;
    }
    assert_eq!(checked, 1000);
}

// --------------------------------------------------- partials of r_d

#[test]
fn rd_partials_match_finite_differences_in_tube() {
    let cfg = scenario("case_study.toml");
    let path = cfg.geometry().unwrap();
    let vessel = cfg.vessel_params().unwrap();
    let ctx = RdContext {
        path: &path,
        hydro: vessel.hydro(),
        guidance: cfg.guidance,
        observer: cfg.observer.gains(),
        c_min: cfg.monitor.c_min,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut accepted = 0;
    while accepted < 100 {
        let inp = RdInputs {
            theta: rng.random_range(0.0..2500.0),
            v_r: rng.random_range(-0.3..0.3),
            u_r: rng.random_range(4.0..6.0),
            u_rd: rng.random_range(4.5..5.5),
            du_rd: rng.random_range(-0.1..0.1),
            vt_hat: rng.random_range(-1.2..1.2),
            vn_hat: rng.random_range(-1.2..1.2),
            y_bp: rng.random_range(-300.0..300.0),
            x_bp: rng.random_range(-20.0..20.0),
            psi_tilde: rng.random_range(-0.5..0.5),
            x_tilde: rng.random_range(-5.0..5.0),
            y_tilde: rng.random_range(-5.0..5.0),
        };
        let Ok((partials, terms)) = helm_core::control::rd_partials(&inp, &ctx) else {
            continue;
        };
        if terms.c_r_guarded {
            continue;
        }
        accepted += 1;
        let base = inp.to_array();
        let an = partials.to_array();
        let r_d = |k: usize, v: f64| {
            let mut a = base;
            a[k] = v;
            helm_core::guidance::desired_yaw_rate(&RdInputs::from_array(a), &ctx)
                .unwrap()
                .r_d
        };
        let norm = an.iter().map(|v| v.abs()).fold(0.0, f64::max);
        for k in 0..12 {
            let h = 1e-3 * (1.0 + base[k].abs());
            let fd = richardson(|v| r_d(k, v), base[k], h);
            let err = (an[k] - fd).abs() / (fd.abs() + 1e-6 * norm);
            assert!(
                err < 1e-6,
                "arg {k} at {inp:?}: {} vs {fd} (rel {err:e})",
                an[k]
            );
        }
    }
}
