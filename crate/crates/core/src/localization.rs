//! Localization of eigenfunctions on `Ω₁ = [0, x0] × [0, b]` and its complement.

use std::f64::consts::PI;

use crate::eigenfunction::{least_squares_slope, region_masses, CoefficientTable};
use crate::error::{param, Result, SebaError};
use crate::model1d::Side;
use crate::roots::{solve_increasing, RootTolerance};
use crate::scatterer::{alpha_n, weighted_poles, Geometry, SeriesConfig, SpectralFunction};
use crate::transverse::TransverseBasis;

/// Constants governing the admissible levels and the error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoremConstants {
    pub nu1: f64,
    /// Smallest transverse eigenvalue above `ν₁`.
    pub nu_tilde: f64,
    /// Index of `nu_tilde`.
    pub n_tilde: usize,
    /// `sup ν_n / n²`.
    pub c0: f64,
    /// Highest admissible level.
    pub n_e: usize,
}

pub fn theorem_constants(geom: &Geometry, basis: &TransverseBasis) -> TheoremConstants {
    constants_at(geom.eccentricity(), basis)
}

/// Constants for eccentricity `e`.
pub fn constants_at(e: f64, basis: &TransverseBasis) -> TheoremConstants {
    let nu1 = basis.mode(1).nu;
    let (n_tilde, nu_tilde) = basis.first_excited();
    let n_e = ((nu_tilde - nu1) * e * e / (PI * PI) + 1.0).sqrt().floor() as usize;
    TheoremConstants {
        nu1,
        nu_tilde,
        n_tilde,
        c0: basis.sup_nu_over_n_sq(),
        n_e,
    }
}

/// `1/√(E³(ñ²C₀ - ν₁) - Eπ²(n² - 1))`.
pub fn theoretical_bound(n: usize, e: f64, consts: &TheoremConstants) -> Result<f64> {
    if n < consts.n_tilde || n > consts.n_e {
        return Err(SebaError::LevelRange {
            n,
            lo: consts.n_tilde,
            hi: consts.n_e,
        });
    }
    let nt = consts.n_tilde as f64;
    let radicand =
        e.powi(3) * (nt * nt * consts.c0 - consts.nu1) - e * PI * PI * ((n * n) as f64 - 1.0);
    if radicand.is_nan() || radicand <= 0.0 {
        return Err(SebaError::LevelRange {
            n,
            lo: consts.n_tilde,
            hi: n - 1,
        });
    }
    Ok(1.0 / radicand.sqrt())
}

/// `1/(E √(π²/E + ñ²C₀E - z))`, the error scale of the 1D/2D mass correspondence at `z`.
pub fn correspondence_bound(z: f64, e: f64, consts: &TheoremConstants) -> f64 {
    let nt = consts.n_tilde as f64;
    1.0 / (e * (PI * PI / e + nt * nt * consts.c0 * e - z).sqrt())
}

/// `∫₀^{x0} sin(mπx/a) sin(nπx/a) dx`.
pub fn overlap_x(m: usize, n: usize, x0: f64, a: f64) -> f64 {
    let w = PI / a;
    if m == n {
        let k = n as f64 * w;
        x0 / 2.0 - (2.0 * k * x0).sin() / (4.0 * k)
    } else {
        let d = (m as f64 - n as f64) * w;
        let s = (m + n) as f64 * w;
        0.5 * ((d * x0).sin() / d - (s * x0).sin() / s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Omega1,
    Complement,
}

/// Squared mass of a truncated normalized series on one region, via the
/// longitudinal Gram matrix of each transverse block.
pub fn region_mass(table: &CoefficientTable, geom: &Geometry, region: Region) -> Result<f64> {
    let total = table.mass();
    if total > 1.0 + 1e-9 {
        return Err(SebaError::Unnormalized { mass: total });
    }
    let (a, x0) = (geom.a(), geom.x0());
    let mut blocks: Vec<_> = table.entries.iter().collect();
    blocks.sort_by(|p, q| p.n2.cmp(&q.n2).then(p.n1.cmp(&q.n1)));
    let mut acc = 0.0;
    for block in blocks.chunk_by(|p, q| p.n2 == q.n2) {
        let y_norm = block[0].mode_norm_sq / (a / 2.0);
        let mut s = 0.0;
        for p in block {
            for q in block {
                let left = overlap_x(p.n1, q.n1, x0, a);
                let gram = match region {
                    Region::Omega1 => left,
                    Region::Complement => {
                        if p.n1 == q.n1 {
                            a / 2.0 - left
                        } else {
                            -left
                        }
                    }
                };
                s += (p.value * q.value.conj()).re * gram;
            }
        }
        acc += s * y_norm;
    }
    Ok(acc)
}

/// `ε` at one level and eccentricity.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalizationReport {
    pub n: usize,
    pub e: f64,
    pub x0_frac: f64,
    pub alpha: f64,
    pub z: f64,
    /// Side of `z - ν₁E` among the 1D limit values.
    pub side: Side,
    /// `‖ψ‖` on the side opposite to `side`, relative to `‖ψ‖_Ω`.
    pub epsilon: f64,
    pub bound: f64,
    pub omega1_fraction: f64,
    pub complement_fraction: f64,
    /// Position of `z` in the perturbed spectrum.
    pub index: usize,
    /// `|‖ψ‖_{Ω₁}/‖ψ‖ - ‖ψ₁‖_{[0,x0]}/‖ψ₁‖|` against the decoupled 1D limit.
    pub correspondence_gap: f64,
    /// The scatterer sits on the vertical midline, where the two halves are mirror images.
    pub symmetric: bool,
    pub rows: usize,
}

/// The perturbed eigenvalue for `alpha` between the weighted poles around `z_hint`.
pub fn root_near(alpha: f64, z_hint: f64, f: &SpectralFunction) -> Result<f64> {
    let poles = weighted_poles(f.geometry(), f.basis(), z_hint + 1.0 + z_hint.abs());
    let weighted: Vec<f64> = poles
        .iter()
        .filter(|p| p.is_weighted())
        .map(|p| p.lambda)
        .collect();
    let lo = weighted
        .iter()
        .copied()
        .filter(|p| *p < z_hint)
        .fold(f64::NEG_INFINITY, f64::max);
    let hi = weighted
        .iter()
        .copied()
        .find(|p| *p > z_hint)
        .ok_or_else(|| SebaError::Degenerate(format!("no weighted pole found above {z_hint}")))?;
    let lo = if lo.is_finite() {
        lo
    } else {
        crate::scatterer::DEFAULT_Z_FLOOR
    };
    let mut err = None;
    let z = solve_increasing(
        |z| match f.eval_unguarded(z) {
            Ok(v) => (v.value, v.derivative),
            Err(e) => {
                err.get_or_insert(e);
                (f64::NAN, f64::NAN)
            }
        },
        lo,
        hi,
        alpha,
        RootTolerance::default(),
    )?;
    match err {
        Some(e) => Err(e),
        None => Ok(z),
    }
}

/// Number of Laplacian eigenvalues below `z`, with multiplicity.
fn laplacian_count_below(z: f64, geom: &Geometry, basis: &TransverseBasis) -> usize {
    weighted_poles(geom, basis, z)
        .iter()
        .filter(|p| p.lambda < z)
        .map(|p| p.mu)
        .sum()
}

/// Computes `ε_{n,E}` for the scatterer at `(x0_frac·a, y0_frac·b)` on the unit-area rectangle of eccentricity `e`.
pub fn epsilon(
    n: usize,
    e: f64,
    x0_frac: f64,
    y0_frac: f64,
    basis: &TransverseBasis,
    cfg: &SeriesConfig,
) -> Result<LocalizationReport> {
    let geom = Geometry::from_eccentricity(e, x0_frac, y0_frac)?;
    let f = SpectralFunction::new(geom, *basis, *cfg)?;
    let consts = theorem_constants(&geom, basis);
    let bound = theoretical_bound(n, e, &consts)?;
    let an = alpha_n(n, &f)?;
    let z = root_near(an.alpha, an.z_target, &f)?;
    let masses = region_masses(z, &geom, basis, cfg)?;
    let omega1_fraction = masses.omega1_fraction();
    let complement_fraction = masses.complement_fraction();
    let (epsilon, limit_ratio) = match an.side {
        Side::S1 => (complement_fraction.sqrt(), 1.0),
        Side::S2 => (omega1_fraction.sqrt(), 0.0),
    };
    Ok(LocalizationReport {
        n,
        e,
        x0_frac,
        alpha: an.alpha,
        z,
        side: an.side,
        epsilon,
        bound,
        omega1_fraction,
        complement_fraction,
        index: laplacian_count_below(z, &geom, basis) + 1,
        correspondence_gap: (omega1_fraction.sqrt() - limit_ratio).abs(),
        symmetric: (x0_frac - 0.5).abs() < 1e-12,
        rows: masses.rows,
    })
}

/// Least-squares fit of `ln ε` against `ln E`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateFit {
    /// Samples used in the fit.
    pub samples: Vec<(f64, f64)>,
    /// Samples dropped because `ε = 0`.
    pub excluded: Vec<(f64, f64)>,
    pub slope: f64,
    pub intercept: f64,
    /// Largest absolute residual in `ln ε`.
    pub residual: f64,
}

pub fn rate_fit(samples: &[(f64, f64)]) -> Result<RateFit> {
    let (used, excluded): (Vec<_>, Vec<_>) = samples.iter().copied().partition(|s| s.1 > 0.0);
    if let Some(bad) = used
        .iter()
        .find(|s| !(s.0 > 0.0 && s.0.is_finite() && s.1.is_finite()))
    {
        return Err(param(
            "samples",
            format!("invalid sample (E = {}, epsilon = {})", bad.0, bad.1),
        ));
    }
    if used.len() < 3 {
        return Err(param(
            "samples",
            format!(
                "need at least 3 samples with epsilon > 0, got {}",
                used.len()
            ),
        ));
    }
    let pts: Vec<(f64, f64)> = used.iter().map(|(e, eps)| (e.ln(), eps.ln())).collect();
    let slope = least_squares_slope(&pts);
    let n = pts.len() as f64;
    let intercept = pts.iter().map(|p| p.1 - slope * p.0).sum::<f64>() / n;
    let residual = pts
        .iter()
        .map(|p| (p.1 - slope * p.0 - intercept).abs())
        .fold(0.0, f64::max);
    Ok(RateFit {
        samples: used,
        excluded,
        slope,
        intercept,
        residual,
    })
}
