//! Perturbed eigenfunctions `ψ = Σ conj(φ(x0, y0)) φ / (λ - z)`.
//!
//! Summing over `n₁` in closed form turns each transverse row into a scaled
//! Green's function of the longitudinal interval, so region masses and point
//! values need only a single series over transverse modes.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Result, SebaError};
use crate::green::{green, green_sq_split};
use crate::scatterer::{Geometry, SeriesConfig, SpectralFunction};
use crate::transverse::TransverseBasis;

/// Squared `L²` masses of the unnormalized eigenfunction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Masses {
    /// Mass on `Ω₁ = [0, x0] × [0, b]`.
    pub omega1: f64,
    /// Mass on `Ω \ Ω₁`.
    pub complement: f64,
    /// Transverse rows summed.
    pub rows: usize,
    /// Bound on the omitted mass, shared by both regions.
    pub tail_bound: f64,
}

impl Masses {
    pub fn total(&self) -> f64 {
        self.omega1 + self.complement
    }

    /// `‖ψ‖²_{Ω₁} / ‖ψ‖²_Ω`.
    pub fn omega1_fraction(&self) -> f64 {
        self.omega1 / self.total()
    }

    /// `‖ψ‖²_{Ω\Ω₁} / ‖ψ‖²_Ω`.
    pub fn complement_fraction(&self) -> f64 {
        self.complement / self.total()
    }
}

const CHECK_EVERY: usize = 64;

/// Exact region masses of the eigenfunction at `z`.
///
/// Rows are added until the remainder is below `tail_tol` relative to the
/// smaller of the two masses.
pub fn region_masses(
    z: f64,
    geom: &Geometry,
    basis: &TransverseBasis,
    cfg: &SeriesConfig,
) -> Result<Masses> {
    let (a, b) = (geom.a(), geom.b());
    let s = geom.x0_frac();
    let b2 = b * b;
    let scale = b * a.powi(5) / 4.0;
    let tail = |n: usize| {
        let next = basis.mode(n + 1).nu / b2;
        (next >= 2.0 * z.max(0.0) && next > 0.0)
            .then(|| a * a * b.powi(4) / 2.0 * basis.inverse_power_tail(n, 1.5))
    };
    let (mut left, mut right) = (0.0, 0.0);
    let mut n = 0;
    loop {
        for _ in 0..CHECK_EVERY {
            n += 1;
            let mode = basis.mode(n);
            let wy = mode.weight_at(geom.y0_frac());
            if wy == 0.0 {
                continue;
            }
            let t = (mode.nu / b2 - z) * a * a;
            let (l, r) = green_sq_split(t, s);
            let w = wy * mode.norm_sq * scale;
            left += w * l;
            right += w * r;
        }
        if let Some(bound) = tail(n) {
            if bound <= cfg.tail_tol * left.min(right) {
                return Ok(Masses {
                    omega1: left,
                    complement: right,
                    rows: n,
                    tail_bound: bound,
                });
            }
        }
        if n >= cfg.max_terms {
            let bound = tail(n).unwrap_or(f64::INFINITY);
            return Err(SebaError::Truncation {
                terms: n,
                bound,
                tol: cfg.tail_tol * left.min(right),
            });
        }
    }
}

/// One entry of a truncated coefficient table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficient {
    pub n1: usize,
    pub n2: usize,
    pub original_label: i64,
    pub lambda: f64,
    /// Normalized `conj(φ(x0, y0)) / (λ - z)`.
    pub value: Complex64,
    /// `‖φ‖²` on `Ω`.
    pub mode_norm_sq: f64,
}

/// Coefficients with `λ ≤ lambda_max`, sorted by `(λ, n₁, label)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTable {
    pub lambda_max: f64,
    pub entries: Vec<Coefficient>,
    /// Normalized mass outside the table.
    pub tail_mass: f64,
}

impl CoefficientTable {
    pub fn mass(&self) -> f64 {
        self.entries
            .iter()
            .map(|c| c.value.norm_sqr() * c.mode_norm_sq)
            .sum()
    }
}

/// A synthesized perturbed eigenfunction, normalized in `L²(Ω)`.
#[derive(Debug, Clone)]
pub struct Eigenfunction2D {
    pub z: f64,
    pub geom: Geometry,
    pub basis: TransverseBasis,
    pub cfg: SeriesConfig,
    pub masses: Masses,
    inv_norm: f64,
}

pub fn synthesize_eigenfunction(z: f64, f: &SpectralFunction) -> Result<Eigenfunction2D> {
    if let Some(pole) = f.pole_near(z) {
        return Err(SebaError::PoleProximity { z, pole });
    }
    let (geom, basis, cfg) = (*f.geometry(), *f.basis(), *f.config());
    let masses = region_masses(z, &geom, &basis, &cfg)?;
    Ok(Eigenfunction2D {
        z,
        geom,
        basis,
        cfg,
        masses,
        inv_norm: 1.0 / masses.total().sqrt(),
    })
}

impl Eigenfunction2D {
    fn row_value(&self, n: usize, x: f64) -> (Complex64, f64) {
        let (a, b) = (self.geom.a(), self.geom.b());
        let mode = self.basis.mode(n);
        let t = (mode.nu / (b * b) - self.z) * a * a;
        let g0 = mode.value_at(self.geom.y0_frac()).conj();
        (g0, a * a / 2.0 * green(t, x / a, self.geom.x0_frac()))
    }

    /// Bound on `Σ_{n > rows} |row_n(x)|` at distance `d = |x - x0|`, if rows have passed `2z`.
    fn pointwise_tail(&self, rows: usize, d: f64) -> Option<f64> {
        let (a, b) = (self.geom.a(), self.geom.b());
        let next = self.basis.mode(rows + 1).nu / (b * b);
        if rows == 0 || next < 2.0 * self.z.max(0.0) || d <= 0.0 {
            return None;
        }
        let kappa = PI * d / (b * 2f64.sqrt());
        let n = rows as f64;
        Some(a * b * 2f64.sqrt() / (4.0 * PI * n) * (-kappa * n).exp() / -(-kappa).exp_m1() * 2.0)
    }

    /// Normalized `ψ(x, y)`.
    ///
    /// The transverse series converges geometrically off the line `x = x0`;
    /// on that line it is cut at `max_terms` rows.
    pub fn value(&self, x: f64, y: f64) -> Complex64 {
        let (b, x0) = (self.geom.b(), self.geom.x0());
        let d = (x - x0).abs();
        let mut acc = Complex64::new(0.0, 0.0);
        let mut n = 0;
        loop {
            n += 1;
            let (g0, r) = self.row_value(n, x);
            if g0.norm_sqr() > 0.0 {
                acc += g0 * self.basis.mode(n).value_at(y / b) * r;
            }
            if n % CHECK_EVERY == 0 {
                match self.pointwise_tail(n, d) {
                    Some(t) if t <= self.cfg.tail_tol * acc.norm().max(1e-300) => break,
                    _ if n >= self.cfg.max_terms => break,
                    _ => {}
                }
            }
        }
        acc * self.inv_norm
    }

    /// Normalized partial sum over product modes with `λ ≤ lambda_max`.
    pub fn partial_sum(&self, x: f64, y: f64, lambda_max: f64) -> Complex64 {
        let table = self.coefficients(lambda_max);
        let (a, b) = (self.geom.a(), self.geom.b());
        table
            .entries
            .iter()
            .map(|c| {
                c.value * self.basis.mode(c.n2).value_at(y / b) * (c.n1 as f64 * PI * x / a).sin()
            })
            .sum()
    }

    /// Truncated normalized coefficient table.
    pub fn coefficients(&self, lambda_max: f64) -> CoefficientTable {
        let (a, b) = (self.geom.a(), self.geom.b());
        let mut entries = Vec::new();
        let mut n2 = 1;
        loop {
            let mode = self.basis.mode(n2);
            if self.geom.lambda(1, mode.nu) > lambda_max {
                break;
            }
            let g0 = mode.value_at(self.geom.y0_frac()).conj();
            let mut n1 = 1;
            loop {
                let lambda = self.geom.lambda(n1, mode.nu);
                if lambda > lambda_max {
                    break;
                }
                let phi0 = g0 * (n1 as f64 * PI * self.geom.x0_frac()).sin();
                entries.push(Coefficient {
                    n1,
                    n2,
                    original_label: mode.original_label,
                    lambda,
                    value: phi0 * (self.inv_norm / (lambda - self.z)),
                    mode_norm_sq: a / 2.0 * b * mode.norm_sq,
                });
                n1 += 1;
            }
            n2 += 1;
        }
        entries.sort_by(|p, q| {
            p.lambda
                .total_cmp(&q.lambda)
                .then(p.n1.cmp(&q.n1))
                .then(p.original_label.cmp(&q.original_label))
        });
        let mut table = CoefficientTable {
            lambda_max,
            entries,
            tail_mass: 0.0,
        };
        table.tail_mass = (1.0 - table.mass()).max(0.0);
        table
    }

    /// Slopes of `|ψ|` against `ln r` along rays from the scatterer at the given angles,
    /// fitted over `r ∈ [r_min, r_max]`.
    pub fn log_slopes(&self, angles: &[f64], r_min: f64, r_max: f64, samples: usize) -> Vec<f64> {
        let (x0, y0) = (self.geom.x0(), self.geom.y0());
        angles
            .iter()
            .map(|theta| {
                let pts: Vec<(f64, f64)> = (0..samples)
                    .map(|i| {
                        let lr =
                            r_min.ln() + (r_max / r_min).ln() * i as f64 / (samples - 1) as f64;
                        let r = lr.exp();
                        (
                            lr,
                            self.value(x0 + r * theta.cos(), y0 + r * theta.sin())
                                .norm(),
                        )
                    })
                    .collect();
                least_squares_slope(&pts)
            })
            .collect()
    }
}

pub(crate) fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}
