use std::f64::consts::PI;

use proptest::prelude::*;
use seba_core::config::parse_number;
use seba_core::eigenfunction::region_masses;
use seba_core::error::SebaError;
use seba_core::localization::rate_fit;
use seba_core::model1d::{
    c_for_z, eigenfunction_1d, eigenvalues_1d, limit_sequence, localization_ratio_1d, secular_lhs,
    Coupling, Interval1D, Side,
};
use seba_core::quadrature::{integrate, integrate_adaptive};
use seba_core::scatterer::{
    eigenvalues_for_alpha, weighted_poles, EigenKind, Geometry, SeriesConfig, SpectralFunction,
    DEFAULT_Z_FLOOR,
};
use seba_core::transverse::{BoundaryCondition, TransverseBasis};

fn bc_strategy() -> impl Strategy<Value = BoundaryCondition> {
    prop_oneof![
        Just(BoundaryCondition::Dirichlet),
        Just(BoundaryCondition::Neumann),
        Just(BoundaryCondition::Periodic),
        (-3.1f64..3.1).prop_map(|t| BoundaryCondition::floquet(t).unwrap()),
    ]
}

fn interval_strategy() -> impl Strategy<Value = Interval1D> {
    (0.5f64..3.0, 0.05f64..0.95).prop_map(|(a, s)| Interval1D::new(a, s * a).unwrap())
}

fn problem(bc: BoundaryCondition, e: f64, x0: f64, y0: f64) -> SpectralFunction {
    let geom = Geometry::from_eccentricity(e, x0, y0).unwrap();
    SpectralFunction::new(
        geom,
        TransverseBasis::new(bc).unwrap(),
        SeriesConfig::default(),
    )
    .unwrap()
}

/// Laplacian eigenvalues below `hi`, repeated by multiplicity.
fn laplacian(f: &SpectralFunction, hi: f64) -> Vec<f64> {
    weighted_poles(f.geometry(), f.basis(), hi)
        .iter()
        .flat_map(|p| std::iter::repeat_n(p.lambda, p.mu))
        .collect()
}

fn expand(pairs: &[seba_core::scatterer::EigenpairPS]) -> Vec<f64> {
    pairs
        .iter()
        .flat_map(|p| std::iter::repeat_n(p.z, p.multiplicity))
        .collect()
}

/// Upper end of a range holding at least `count` Laplacian eigenvalues.
fn cover(f: &SpectralFunction, count: usize) -> f64 {
    let mut hi = f.geometry().lambda(1, f.basis().mode(1).nu) + 100.0;
    while laplacian(f, hi).len() < count + 2 {
        hi *= 2.0;
    }
    hi
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn transverse_modes_are_sorted_and_counted(bc in bc_strategy(), k in 10usize..2000) {
        let basis = TransverseBasis::new(bc).unwrap();
        let modes = basis.modes(k);
        for w in modes.windows(2) {
            prop_assert!(w[0].nu <= w[1].nu);
        }
        let nu = modes[k - 1].nu * 1.0001 + 1e-9;
        let below = modes.iter().filter(|m| m.nu < nu).count();
        prop_assert!(basis.count_below(nu) >= below);
        prop_assert_eq!(basis.count_below(modes[k - 1].nu), modes.iter().filter(|m| m.nu < modes[k - 1].nu).count());
    }

    #[test]
    fn transverse_modes_are_orthogonal(bc in bc_strategy(), m in 1usize..50, n in 1usize..50) {
        prop_assume!(m != n);
        let basis = TransverseBasis::new(bc).unwrap();
        let (gm, gn) = (basis.mode(m), basis.mode(n));
        let re = integrate(|t| (gm.value_at(t) * gn.value_at(t).conj()).re, 0.0, 1.0, 64, 12);
        let im = integrate(|t| (gm.value_at(t) * gn.value_at(t).conj()).im, 0.0, 1.0, 64, 12);
        prop_assert!(re.hypot(im) < 1e-10, "<g{}, g{}> = {} + {}i", m, n, re, im);
    }

    #[test]
    fn secular_decreases_between_poles(iv in interval_strategy(), k in 0usize..20) {
        let seq = limit_sequence(&iv, k + 1);
        let lo = if k == 0 { 0.0 } else { seq.merged[k - 1].z };
        let hi = seq.merged[k].z;
        prop_assume!(hi - lo > 1e-6 * hi);
        let mut prev = f64::INFINITY;
        for i in 1..200 {
            let z = lo + (hi - lo) * i as f64 / 200.0;
            match secular_lhs(z, &iv) {
                Ok(v) => {
                    prop_assert!(v < prev, "not decreasing at z = {}", z);
                    prev = v;
                }
                Err(SebaError::PoleProximity { .. }) => {}
                Err(e) => return Err(TestCaseError::fail(e.to_string())),
            }
        }
    }

    #[test]
    fn coupling_round_trip(iv in interval_strategy(), z in 0.5f64..500.0) {
        let c = match c_for_z(z, &iv) {
            Ok(c) => c,
            Err(SebaError::PoleProximity { .. }) => return Ok(()),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        let below = limit_sequence(&iv, 400).merged.iter().filter(|e| e.z < z).count();
        let levels = eigenvalues_1d(Coupling::Finite(c), &iv, below + 2).unwrap();
        let hit = levels.values.iter().any(|v| (v - z).abs() <= 1e-10 * z);
        prop_assert!(hit, "z = {} missing from {:?}", z, levels.values);
    }

    #[test]
    fn roots_interlace_limit_values(iv in interval_strategy(), c in -50.0f64..50.0) {
        let count = 20;
        let levels = eigenvalues_1d(Coupling::Finite(c), &iv, count).unwrap();
        let lim = limit_sequence(&iv, count + 2).merged;
        let shift = usize::from(levels.ground_state_missing);
        for (k, z) in levels.values.iter().enumerate() {
            let j = k + shift;
            let lo = if j == 0 { 0.0 } else { lim[j - 1].z };
            prop_assert!(*z >= lo && *z <= lim[j].z, "root {} = {} outside [{}, {}]", k, z, lo, lim[j].z);
        }
    }

    #[test]
    fn strong_coupling_approaches_limits(iv in interval_strategy(), n in 1usize..6) {
        let lim = limit_sequence(&iv, n + 1).merged;
        prop_assume!(!lim[n - 1].degenerate && (lim[n].z - lim[n - 1].z) > 1e-3 * lim[n].z);
        let mut prev = f64::INFINITY;
        let mut last = 0.0;
        for k in 1..=6 {
            let levels = eigenvalues_1d(Coupling::Finite(10f64.powi(k)), &iv, n).unwrap();
            let z = levels.values[n - 1];
            if levels.ground_state_missing {
                let gap = z - lim[n - 1].z;
                prop_assert!(gap >= 0.0 && gap < prev, "c = 1e{}: gap {} after {}", k, gap, prev);
                prev = gap;
                last = z;
            }
        }
        prop_assert!(prev < 1e-3 * lim[n - 1].z);
        let (left, right) = localization_ratio_1d(last, &iv).unwrap();
        let (near, far) = if lim[n - 1].side == Side::S1 { (left, right) } else { (right, left) };
        prop_assert!(near > 0.99 && far < 0.1, "masses ({}, {})", left, right);
    }

    #[test]
    fn eigenfunctions_are_normalized(iv in interval_strategy(), c in -20.0f64..20.0, k in 0usize..6) {
        let levels = eigenvalues_1d(Coupling::Finite(c), &iv, k + 1).unwrap();
        let ef = eigenfunction_1d(levels.values[k], &iv).unwrap();
        let sq = |x: f64| ef.value(x).powi(2);
        let norm = integrate_adaptive(&sq, 0.0, iv.x0(), 1e-13) + integrate_adaptive(&sq, iv.x0(), iv.a(), 1e-13);
        prop_assert!((norm - 1.0).abs() < 1e-10, "norm {}", norm);
    }

    #[test]
    fn rate_fit_recovers_power_laws(p in -3.0f64..0.0, amp in 0.1f64..10.0, e0 in 1.0f64..10.0, step in 1.1f64..3.0) {
        let samples: Vec<(f64, f64)> = (0..5).map(|i| {
            let e = e0 * step.powi(i);
            (e, amp * e.powf(p))
        }).collect();
        let fit = rate_fit(&samples).unwrap();
        prop_assert!((fit.slope - p).abs() < 1e-12);
        prop_assert!((fit.intercept - amp.ln()).abs() < 1e-10);
    }

    #[test]
    fn pi_expressions_parse(k in -50i32..50, x in 0.01f64..10.0) {
        prop_assert_eq!(parse_number(&format!("{k}pi")).unwrap(), k as f64 * PI);
        prop_assert_eq!(parse_number(&format!("{x}/pi")).unwrap(), x / PI);
        prop_assert_eq!(parse_number(&format!("{x}")).unwrap(), x);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn spectral_function_increases_between_poles(
        bc in bc_strategy(), e in 1.0f64..40.0, x0 in 0.05f64..0.95, y0 in 0.05f64..0.95, k in 0usize..10,
        t in prop::collection::vec(0.001f64..0.999, 8),
    ) {
        let f = problem(bc, e, x0, y0);
        let hi = cover(&f, 40);
        let poles: Vec<f64> = weighted_poles(f.geometry(), f.basis(), hi)
            .iter().filter(|p| p.is_weighted()).map(|p| p.lambda).collect();
        prop_assume!(poles.len() > k + 1);
        let (lo, up) = if k == 0 { (poles[0] - 100.0, poles[0]) } else { (poles[k - 1], poles[k]) };
        let mut zs: Vec<f64> = t.iter().map(|s| lo + s * (up - lo)).collect();
        zs.sort_by(f64::total_cmp);
        zs.dedup();
        let mut prev = f64::NEG_INFINITY;
        for z in zs {
            let v = f.eval(z).unwrap();
            prop_assert!(v.value > prev && v.derivative > 0.0, "F not increasing at {}", z);
            prev = v.value;
        }
    }

    #[test]
    fn eigenvalues_interlace_laplacian(
        bc in bc_strategy(), e in 1.0f64..40.0, x0 in 0.05f64..0.95, y0 in 0.05f64..0.95, seed in 0.0f64..1.0,
    ) {
        let f = problem(bc, e, x0, y0);
        let hi = cover(&f, 31);
        let lambda = laplacian(&f, hi);
        let z_seed = -1e4 + seed * (lambda[30] + 1e4);
        let alpha = match f.eval(z_seed) {
            Ok(v) => v.value,
            Err(SebaError::PoleProximity { .. }) => return Ok(()),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        let z = expand(&eigenvalues_for_alpha(alpha, &f, (DEFAULT_Z_FLOOR, hi)).unwrap());
        prop_assert!(z.len() >= 31);
        for k in 0..30 {
            prop_assert!(z[k] <= lambda[k] && lambda[k] <= z[k + 1], "level {}: {} {} {}", k, z[k], lambda[k], z[k + 1]);
        }
    }

    #[test]
    fn coupling_determines_eigenvalue(
        bc in bc_strategy(), e in 1.0f64..40.0, x0 in 0.05f64..0.95, y0 in 0.05f64..0.95, z in -500.0f64..2000.0,
    ) {
        let f = problem(bc, e, x0, y0);
        let alpha = match f.eval(z) {
            Ok(v) => v.value,
            Err(SebaError::PoleProximity { .. }) => return Ok(()),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        let found = eigenvalues_for_alpha(alpha, &f, (z - 1.0, z + 1.0)).unwrap();
        let hit = found.iter().any(|p| p.kind == EigenKind::Perturbed && (p.z - z).abs() <= 1e-8 * z.abs().max(1.0));
        prop_assert!(hit, "{} not recovered: {:?}", z, found.iter().map(|p| p.z).collect::<Vec<_>>());
    }

    #[test]
    fn unperturbed_values_persist(
        bc in bc_strategy(), e in 1.0f64..20.0, x0 in prop_oneof![Just(0.5), Just(0.25), 0.05f64..0.95],
        y0 in prop_oneof![Just(0.5), 0.05f64..0.95], alpha in -0.1f64..1.0,
    ) {
        let f = problem(bc, e, x0, y0);
        let hi = cover(&f, 40);
        let found = eigenvalues_for_alpha(alpha, &f, (DEFAULT_Z_FLOOR, hi)).unwrap();
        for pole in weighted_poles(f.geometry(), f.basis(), hi) {
            let m = pole.unperturbed_multiplicity();
            if m > 0 {
                let hit = found.iter().any(|p| p.kind == EigenKind::Unperturbed && p.z == pole.lambda && p.multiplicity == m);
                prop_assert!(hit, "pole {} with multiplicity {} missing", pole.lambda, m);
            }
        }
    }

    #[test]
    fn scaling_maps_spectra(e in 2.0f64..30.0, x0 in 0.05f64..0.95, r in 0.5f64..2.5, seed in 0.0f64..1.0) {
        let geom = Geometry::from_eccentricity(e, x0, 0.5).unwrap();
        let basis = TransverseBasis::new(BoundaryCondition::Dirichlet).unwrap();
        let f = SpectralFunction::new(geom, basis, SeriesConfig { tail_tol: 1e-9, ..Default::default() }).unwrap();
        let g = SpectralFunction::new(f.geometry().scaled(r).unwrap(), *f.basis(), *f.config()).unwrap();
        let hi = cover(&g, 6);
        let alpha = match g.eval(-100.0 + seed * hi) {
            Ok(v) => v.value,
            Err(SebaError::PoleProximity { .. }) => return Ok(()),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        let beta = f.scaling_beta(r).unwrap();
        let scaled = expand(&eigenvalues_for_alpha(alpha, &g, (DEFAULT_Z_FLOOR, hi)).unwrap());
        let base = expand(&eigenvalues_for_alpha(alpha / (r * r) - beta, &f, (DEFAULT_Z_FLOOR, r * r * hi)).unwrap());
        let tail = f.config().tail_tol;
        for k in 0..5 {
            let mapped = base[k] / (r * r);
            // a series error δ on either side moves a root by about δ / F'
            let slope = g.eval(scaled[k]).map(|v| v.derivative).unwrap_or(f64::INFINITY);
            let tol = 1e-6 * scaled[k].abs().max(1.0) + 3.0 * tail * (1.0 + r * r) / slope;
            prop_assert!((scaled[k] - mapped).abs() <= tol, "level {}: {} vs {} (F' = {})", k, scaled[k], mapped, slope);
        }
    }

    #[test]
    fn region_masses_converge(
        bc in bc_strategy(), e in 1.0f64..40.0, x0 in 0.05f64..0.95, y0 in 0.05f64..0.95, z in -200.0f64..1500.0,
    ) {
        let f = problem(bc, e, x0, y0);
        prop_assume!(f.pole_near(z).is_none());
        let cfg = *f.config();
        let fine = SeriesConfig { tail_tol: cfg.tail_tol / 100.0, ..cfg };
        let m = region_masses(z, f.geometry(), f.basis(), &cfg).unwrap();
        let m2 = region_masses(z, f.geometry(), f.basis(), &fine).unwrap();
        let (p, q) = (m.omega1_fraction(), m.complement_fraction());
        prop_assert!((0.0..=1.0).contains(&p) && (0.0..=1.0).contains(&q));
        prop_assert!((p + q - 1.0).abs() < 1e-14);
        prop_assert!((p - m2.omega1_fraction()).abs() <= 2.0 * cfg.tail_tol);
    }
}
