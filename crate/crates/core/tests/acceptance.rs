//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the lines always reach the terminal.
//! Exits non-zero when any criterion disagrees with `EXPECTED_FAIL`.

use std::f64::consts::PI;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use seba_core::cli::{cmd_reproduce, Figure};
use seba_core::config::{Overrides, RunConfig};
use seba_core::localization::{constants_at, epsilon, rate_fit, LocalizationReport};
use seba_core::model1d::{eigenvalues_1d, eigenvalues_1d_with, Coupling, Interval1D, Options1D};
use seba_core::oracle::{brute_series_f, fd_1d_eigs, fd_convergence};
use seba_core::scatterer::{
    alpha_n, eigenvalues_for_alpha, weighted_poles, EigenpairPS, Geometry, SeriesConfig,
    SpectralFunction, DEFAULT_Z_FLOOR,
};
use seba_core::transverse::{BoundaryCondition, TransverseBasis};

/// The closed form of criterion 5 names the eigenvalue one level above the
/// one placed by `α₃`; see the README section on level indexing.
const EXPECTED_FAIL: &[usize] = &[5];

const C_MAX: f64 = 50.0;

type Criterion<'a> = (usize, &'a str, Box<dyn Fn() -> Outcome + 'a>);
type Radicand = Box<dyn Fn(f64) -> f64>;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn dirichlet() -> TransverseBasis {
    TransverseBasis::new(BoundaryCondition::Dirichlet).unwrap()
}

fn problem(e: f64, x0: f64, cfg: SeriesConfig) -> SpectralFunction {
    SpectralFunction::new(
        Geometry::from_eccentricity(e, x0, 0.5).unwrap(),
        dirichlet(),
        cfg,
    )
    .unwrap()
}

fn expand(pairs: &[EigenpairPS]) -> Vec<f64> {
    pairs
        .iter()
        .flat_map(|p| std::iter::repeat_n(p.z, p.multiplicity))
        .collect()
}

fn within(elapsed: Duration, limit: f64) -> bool {
    elapsed.as_secs_f64() < limit
}

fn one_dimensional_degeneration() -> Outcome {
    let t = Instant::now();
    let iv = Interval1D::new(1.0, 1.0 / PI).unwrap();
    let values = eigenvalues_1d(Coupling::Finite(0.0), &iv, 10)
        .unwrap()
        .values;
    let worst = values
        .iter()
        .enumerate()
        .map(|(k, z)| {
            let exact = ((k + 1) as f64 * PI).powi(2);
            (z - exact).abs() / exact
        })
        .fold(0.0, f64::max);
    let el = t.elapsed();
    outcome(
        worst < 1e-10 && within(el, 1.0),
        format!("max rel err {worst:.1e}, {:.3}s", el.as_secs_f64()),
    )
}

fn one_dimensional_oracle() -> Outcome {
    let t = Instant::now();
    let mut rng = StdRng::seed_from_u64(2);
    let opts = Options1D {
        include_negative: true,
        ..Default::default()
    };
    let (mut worst_err, mut worst_order) = (0.0_f64, 0.0_f64);
    for _ in 0..10 {
        let c = rng.random_range(-40.0..40.0);
        let iv = Interval1D::new(1.0, rng.random_range(0.05..0.95)).unwrap();
        let exact = eigenvalues_1d_with(Coupling::Finite(c), &iv, 5, opts)
            .unwrap()
            .values;
        let fd = fd_1d_eigs(c, &iv, 20_000, 5).unwrap();
        for (e, f) in exact.iter().zip(&fd) {
            worst_err = worst_err.max((e - f).abs() / e.abs().max(1.0));
        }
        let conv = fd_convergence(c, &iv, 500, 5).unwrap();
        for p in conv.orders {
            worst_order = worst_order.max((p - 2.0).abs());
        }
    }
    let el = t.elapsed();
    outcome(
        worst_err < 1e-5 && worst_order < 0.1 && within(el, 30.0),
        format!(
            "max rel err {worst_err:.1e}, max |order - 2| {worst_order:.3}, {:.1}s",
            el.as_secs_f64()
        ),
    )
}

fn two_dimensional_interlacing() -> Outcome {
    let t = Instant::now();
    let f = problem(10.0 * PI, 1.0 / PI, SeriesConfig::default());
    let mut hi = 400.0;
    let lambda = loop {
        let l: Vec<f64> = weighted_poles(f.geometry(), f.basis(), hi)
            .iter()
            .flat_map(|p| std::iter::repeat_n(p.lambda, p.mu))
            .collect();
        if l.len() > 31 {
            break l;
        }
        hi *= 1.5;
    };
    let mut rng = StdRng::seed_from_u64(3);
    let mut violations = 0;
    for _ in 0..20 {
        let alpha = rng.random_range(-0.15..1.0);
        let z = expand(&eigenvalues_for_alpha(alpha, &f, (DEFAULT_Z_FLOOR, hi)).unwrap());
        if z.len() < 31 {
            violations += 1;
            continue;
        }
        violations += (0..30)
            .filter(|&k| !(z[k] <= lambda[k] && lambda[k] <= z[k + 1]))
            .count();
    }
    let el = t.elapsed();
    outcome(
        violations == 0 && within(el, 120.0),
        format!("{violations} violations, {:.1}s", el.as_secs_f64()),
    )
}

fn spectral_function_oracle() -> Outcome {
    let t = Instant::now();
    let mut rng = StdRng::seed_from_u64(4);
    let mut worst = 0.0_f64;
    let mut failures = 0;
    let mut done = 0;
    while done < 50 {
        let bc = match rng.random_range(0..4) {
            0 => BoundaryCondition::Dirichlet,
            1 => BoundaryCondition::Neumann,
            2 => BoundaryCondition::Periodic,
            _ => BoundaryCondition::floquet(rng.random_range(-3.0..3.0)).unwrap(),
        };
        let geom = Geometry::from_eccentricity(
            rng.random_range(1.0..20.0),
            rng.random_range(0.05..0.95),
            rng.random_range(0.05..0.95),
        )
        .unwrap();
        let f = SpectralFunction::new(
            geom,
            TransverseBasis::new(bc).unwrap(),
            SeriesConfig::default(),
        )
        .unwrap();
        let z = rng.random_range(-500.0..500.0);
        if f.pole_near(z).is_some() {
            continue;
        }
        let v = f.eval(z).unwrap();
        let brute = brute_series_f(z, &geom, f.basis(), 10_000, 1_000);
        let allowed = brute.tail_bound + v.tail_bound;
        let diff = (v.value - brute.value).abs();
        if !(allowed <= 1e-6 && diff <= allowed) {
            failures += 1;
        }
        worst = worst.max(diff);
        done += 1;
    }
    let el = t.elapsed();
    outcome(
        failures == 0 && within(el, 120.0),
        format!(
            "{failures} failures, max diff {worst:.1e}, {:.1}s",
            el.as_secs_f64()
        ),
    )
}

fn third_level_closed_form() -> Outcome {
    let e = 10.0 * PI;
    let f = problem(e, 1.0 / PI, SeriesConfig::default());
    let an = alpha_n(3, &f).unwrap();
    let z = expand(&eigenvalues_for_alpha(an.alpha, &f, (DEFAULT_Z_FLOOR, 400.0)).unwrap());
    let third = z[2];
    let target = PI * PI * e + (PI / f.geometry().x0()).powi(2);
    let rel = (third - target).abs() / target;
    let display = format!("{third:.2e}");
    outcome(
        rel <= 1e-8 && display == "3.13e2",
        format!("3rd eigenvalue {third:.10}, closed form {target:.10}, rel diff {rel:.2e}, display {display}"),
    )
}

fn mass_curve_markers() -> Outcome {
    let t = Instant::now();
    let ov = Overrides {
        tail_tol: Some("1e-6".into()),
        ..Default::default()
    };
    let cfg = RunConfig::resolve(None, &ov).unwrap();
    let text = cmd_reproduce(Figure::Fig4, &cfg).unwrap();
    let (mut s1_min, mut s2_max, mut markers) = (f64::INFINITY, 0.0_f64, 0);
    for line in text.lines().skip(2) {
        let cols: Vec<&str> = line.split(',').collect();
        let n: usize = match cols[4].parse() {
            Ok(n) => n,
            Err(_) => continue,
        };
        if !(2..=10).contains(&n) {
            continue;
        }
        let norm: f64 = cols[1].parse().unwrap();
        markers += 1;
        match cols[3] {
            "S1" => s1_min = s1_min.min(norm),
            _ => s2_max = s2_max.max(norm),
        }
    }
    let el = t.elapsed();
    outcome(
        markers == 9 && s1_min > 0.9 && s2_max < 0.1 && within(el, 600.0),
        format!(
            "{markers} markers, min on S1 {s1_min:.4}, max on S2 {s2_max:.4}, {:.1}s",
            el.as_secs_f64()
        ),
    )
}

const POSITIONS: [f64; 4] = [0.3, 0.7, 1.1, 1.5];

fn energies() -> Vec<f64> {
    (1..=5).map(|k| 2.0 * PI * k as f64).collect()
}

/// Every `(x0, E, n)` of the rate sweep with `ñ ≤ n ≤ N_E`.
fn sweep() -> Vec<LocalizationReport> {
    let basis = dirichlet();
    let cfg = SeriesConfig::default();
    let jobs: Vec<(f64, f64, usize)> = POSITIONS
        .iter()
        .flat_map(|p| {
            energies().into_iter().flat_map(move |e| {
                let c = constants_at(e, &dirichlet());
                (c.n_tilde..=c.n_e).map(move |n| (p / PI, e, n))
            })
        })
        .collect();
    jobs.par_iter()
        .map(|&(x, e, n)| epsilon(n, e, x, 0.5, &basis, &cfg).unwrap())
        .collect()
}

fn bound_compliance(reports: &[LocalizationReport]) -> Outcome {
    let eps = reports
        .iter()
        .map(|r| r.epsilon / r.bound)
        .fold(0.0, f64::max);
    let gap = reports
        .iter()
        .map(|r| r.correspondence_gap / r.bound)
        .fold(0.0, f64::max);
    outcome(
        eps.max(gap) <= C_MAX,
        format!(
            "{} points, max eps/bound {eps:.2}, max gap/bound {gap:.2}, C = {C_MAX}",
            reports.len()
        ),
    )
}

fn localization_rate(reports: &[LocalizationReport]) -> Outcome {
    let n_max = constants_at(2.0 * PI, &dirichlet()).n_e;
    let mut worst = f64::NEG_INFINITY;
    let mut monotone = true;
    let mut first = Vec::new();
    for p in POSITIONS {
        let x = p / PI;
        let slopes: Vec<f64> = (2..=n_max)
            .map(|n| {
                let samples: Vec<(f64, f64)> = reports
                    .iter()
                    .filter(|r| r.x0_frac == x && r.n == n)
                    .map(|r| (r.e, r.epsilon))
                    .collect();
                rate_fit(&samples).unwrap().slope
            })
            .collect();
        worst = slopes.iter().copied().fold(worst, f64::max);
        let dev: Vec<f64> = slopes.iter().take(4).map(|k| (k + 1.5).abs()).collect();
        monotone &= dev.windows(2).all(|w| w[0] <= w[1]) && dev[0] < 0.05;
        first.push(format!("{:.4}", slopes[0]));
    }
    outcome(
        worst <= -1.4 && monotone,
        format!(
            "max slope {worst:.4}, n = 2 slopes [{}], monotone approach {monotone}",
            first.join(", ")
        ),
    )
}

fn scaling_relation() -> Outcome {
    let r = 2.0;
    let cfg = SeriesConfig {
        tail_tol: 1e-10,
        ..Default::default()
    };
    let f = problem(10.0 * PI, 1.0 / PI, cfg);
    let g = SpectralFunction::new(f.geometry().scaled(r).unwrap(), *f.basis(), cfg).unwrap();
    let alpha = alpha_n(3, &g).unwrap().alpha;
    let beta = f.scaling_beta(r).unwrap();
    let scaled = expand(&eigenvalues_for_alpha(alpha, &g, (DEFAULT_Z_FLOOR, 100.0)).unwrap());
    let base = expand(
        &eigenvalues_for_alpha(alpha / (r * r) - beta, &f, (DEFAULT_Z_FLOOR, 400.0)).unwrap(),
    );
    let worst = (0..5)
        .map(|k| (scaled[k] - base[k] / (r * r)).abs())
        .fold(0.0, f64::max);
    outcome(
        worst <= 1e-6,
        format!("r = {r}, beta = {beta:.6e}, max diff over 5 levels {worst:.1e}"),
    )
}

fn level_counts() -> Outcome {
    let cases: [(BoundaryCondition, Radicand); 5] = [
        (
            BoundaryCondition::Dirichlet,
            Box::new(|e: f64| 3.0 * e * e + 1.0),
        ),
        (BoundaryCondition::Neumann, Box::new(|e: f64| e * e + 1.0)),
        (
            BoundaryCondition::Periodic,
            Box::new(|e: f64| 4.0 * e * e + 1.0),
        ),
        (
            BoundaryCondition::floquet(PI / 2.0).unwrap(),
            Box::new(|e: f64| 4.0 * e * e * 0.5 + 1.0),
        ),
        (
            BoundaryCondition::floquet(-PI / 2.0).unwrap(),
            Box::new(|e: f64| 4.0 * e * e * 0.5 + 1.0),
        ),
    ];
    let mut mismatches = Vec::new();
    let mut checked = 0;
    for (bc, radicand) in &cases {
        let basis = TransverseBasis::new(*bc).unwrap();
        for e in energies() {
            let expected = radicand(e).sqrt().floor() as usize;
            let got = constants_at(e, &basis).n_e;
            checked += 1;
            if got != expected {
                mismatches.push(format!("{} E={e:.3}: {got} vs {expected}", bc.name()));
            }
        }
    }
    let zero = TransverseBasis::new(BoundaryCondition::floquet(0.0).unwrap()).unwrap();
    for e in energies() {
        checked += 1;
        let expected = (4.0 * e * e + 1.0).sqrt().floor() as usize;
        if constants_at(e, &zero).n_e != expected {
            mismatches.push(format!("floquet 0 E={e:.3}"));
        }
    }
    outcome(
        mismatches.is_empty(),
        format!("{checked} cases, mismatches: [{}]", mismatches.join("; ")),
    )
}

fn determinism() -> Outcome {
    let run = |fig: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_seba"))
            .args(["reproduce", fig])
            .output()
            .unwrap();
        assert!(out.status.success(), "reproduce {fig} failed");
        out.stdout
    };
    let mut differing = Vec::new();
    for fig in ["fig3", "fig4", "fig5", "fig6"] {
        if run(fig) != run(fig) {
            differing.push(fig);
        }
    }
    outcome(
        differing.is_empty(),
        format!("4 datasets, differing: [{}]", differing.join(", ")),
    )
}

fn main() {
    let reports = sweep();
    let criteria: Vec<Criterion> = vec![
        (1, "1D degeneration", Box::new(one_dimensional_degeneration)),
        (2, "1D oracle equivalence", Box::new(one_dimensional_oracle)),
        (3, "2D interlacing", Box::new(two_dimensional_interlacing)),
        (4, "F-evaluation oracle", Box::new(spectral_function_oracle)),
        (
            5,
            "third eigenvalue closed form",
            Box::new(third_level_closed_form),
        ),
        (6, "mass curve markers", Box::new(mass_curve_markers)),
        (
            7,
            "bound compliance",
            Box::new(|| bound_compliance(&reports)),
        ),
        (
            8,
            "localization rate",
            Box::new(|| localization_rate(&reports)),
        ),
        (9, "scaling relation", Box::new(scaling_relation)),
        (10, "N_E closed forms", Box::new(level_counts)),
        (11, "determinism", Box::new(determinism)),
    ];
    let mut unexpected = Vec::new();
    for (k, name, check) in &criteria {
        let o = check();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        let known = EXPECTED_FAIL.contains(k);
        let note = if known && !o.pass { " [expected]" } else { "" };
        println!("criterion {k:>2} {tag}{note}: {name}: {}", o.detail);
        if o.pass == known {
            unexpected.push(*k);
        }
    }
    if unexpected.is_empty() {
        println!("acceptance: all criteria as expected");
    } else {
        println!("acceptance: unexpected outcome for criteria {unexpected:?}");
        std::process::exit(1);
    }
}
