//! The 1D operator `-d²/dx² - c δ(x - x0)` on `[0, a]` with Dirichlet ends.

use std::f64::consts::PI;

use crate::error::{param, Result, SebaError};
use crate::green::{id_minus_sin, row_sum, sinh_minus_id};
use crate::roots::{solve_increasing, RootTolerance};

/// Relative half-width of the exclusion band around the poles of the secular function.
pub const POLE_GUARD: f64 = 1e-9;

/// Relative tolerance for treating two limit values as coincident.
pub const COINCIDENCE_TOL: f64 = 1e-10;

const RATIONAL_TOL: f64 = 1e-8;
const RATIONAL_MAX_DENOM: u32 = 50;

/// The interval `[0, a]` with the delta at `x0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval1D {
    a: f64,
    x0: f64,
}

impl Interval1D {
    pub fn new(a: f64, x0: f64) -> Result<Self> {
        if !(a.is_finite() && a > 0.0) {
            return Err(param(
                "a",
                format!("length must be positive and finite, got {a}"),
            ));
        }
        if !(x0 > 0.0 && x0 < a) {
            return Err(param("x0", format!("must lie in (0, {a}), got {x0}")));
        }
        Ok(Self { a, x0 })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    /// `a - x0`.
    pub fn x1(&self) -> f64 {
        self.a - self.x0
    }

    /// A fraction `p/q` with `q ≤ 50` within `1e-8` of `x0/a`, if any.
    pub fn rational_approximation(&self) -> Option<(u32, u32)> {
        rational_approximation(self.x0 / self.a)
    }

    pub fn is_near_rational(&self) -> bool {
        self.rational_approximation().is_some()
    }
}

pub(crate) fn rational_approximation(frac: f64) -> Option<(u32, u32)> {
    (1..=RATIONAL_MAX_DENOM).find_map(|q| {
        let p = (frac * q as f64).round();
        ((frac - p / q as f64).abs() < RATIONAL_TOL).then_some((p as u32, q))
    })
}

/// Which side of the delta a limit value belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    /// `(mπ/x0)²`, eigenfunction supported on `[0, x0]`.
    S1,
    /// `(mπ/(a - x0))²`, eigenfunction supported on `[x0, a]`.
    S2,
}

impl Side {
    pub fn name(&self) -> &'static str {
        match self {
            Side::S1 => "S1",
            Side::S2 => "S2",
        }
    }
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitEntry {
    pub z: f64,
    pub side: Side,
    /// Index `m` within its own side.
    pub m: usize,
    /// Set when the value coincides with one from the other side.
    pub degenerate: bool,
}

/// The eigenvalues of the decoupled problem `c = +∞`.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitSequence {
    pub s1: Vec<f64>,
    pub s2: Vec<f64>,
    pub merged: Vec<LimitEntry>,
}

/// The first `count` limit values `z_{n,∞}`, sorted, ties ordered `S1` first.
pub fn limit_sequence(interval: &Interval1D, count: usize) -> LimitSequence {
    let s1v = |m: usize| (m as f64 * PI / interval.x0).powi(2);
    let s2v = |m: usize| (m as f64 * PI / interval.x1()).powi(2);
    let (mut m1, mut m2) = (1, 1);
    let mut merged: Vec<LimitEntry> = Vec::with_capacity(count);
    // one extra entry so a tie across the cut is seen
    while merged.len() < count + 1 {
        let (v1, v2) = (s1v(m1), s2v(m2));
        if v1 <= v2 {
            merged.push(LimitEntry {
                z: v1,
                side: Side::S1,
                m: m1,
                degenerate: false,
            });
            m1 += 1;
        } else {
            merged.push(LimitEntry {
                z: v2,
                side: Side::S2,
                m: m2,
                degenerate: false,
            });
            m2 += 1;
        }
    }
    for i in 1..merged.len() {
        let (p, q) = (merged[i - 1], merged[i]);
        if p.side != q.side && (q.z - p.z).abs() <= COINCIDENCE_TOL * q.z {
            merged[i - 1].degenerate = true;
            merged[i].degenerate = true;
        }
    }
    merged.truncate(count);
    let s1 = merged
        .iter()
        .filter(|e| e.side == Side::S1)
        .map(|e| e.z)
        .collect();
    let s2 = merged
        .iter()
        .filter(|e| e.side == Side::S2)
        .map(|e| e.z)
        .collect();
    LimitSequence { s1, s2, merged }
}

/// The limit value `z_{n,∞}` and its side, 1-based.
pub fn limit_value(interval: &Interval1D, n: usize) -> Result<LimitEntry> {
    if n == 0 {
        return Err(param("n", "limit values are indexed from 1"));
    }
    Ok(limit_sequence(interval, n).merged[n - 1])
}

fn check_poles(z: f64, interval: &Interval1D) -> Result<()> {
    let k = z.sqrt();
    for len in [interval.x0, interval.x1()] {
        let m = (k * len / PI).round();
        if m >= 1.0 {
            let pole = (m * PI / len).powi(2);
            if (z - pole).abs() <= POLE_GUARD * pole {
                return Err(SebaError::PoleProximity { z, pole });
            }
        }
    }
    Ok(())
}

/// `d/dy [y cot y] = -(2y - sin 2y) / (2 sin² y)`.
fn d_ycoty(y: f64) -> f64 {
    -id_minus_sin(2.0 * y) / (2.0 * y.sin().powi(2))
}

/// `d/dy [y coth y] = (sinh 2y - 2y) / (2 sinh² y)`.
fn d_ycothy(y: f64) -> f64 {
    if y < 1.0 {
        sinh_minus_id(2.0 * y) / (2.0 * y.sinh().powi(2))
    } else {
        1.0 / y.tanh() - y / y.sinh().powi(2)
    }
}

fn ycoty(y: f64) -> f64 {
    if y.abs() < 1e-8 {
        1.0 - y * y / 3.0
    } else {
        y / y.tan()
    }
}

/// Value and `z`-derivative of the secular function for `z > 0`, without the pole guard.
fn secular_raw(z: f64, interval: &Interval1D) -> (f64, f64) {
    let k = z.sqrt();
    let (x0, x1) = (interval.x0, interval.x1());
    let v = ycoty(k * x0) / x0 + ycoty(k * x1) / x1;
    // d/dz = (1/(2k)) d/dk, and d/dk [y cot y / x] = d_ycoty(y)
    let dk = d_ycoty(k * x0) + d_ycoty(k * x1);
    let dz = if k * x0.min(x1) < 1e-6 {
        -(x0 + x1) / 3.0
    } else {
        dk / (2.0 * k)
    };
    (v, dz)
}

/// `√z (cot(√z x0) + cot(√z (a - x0)))`.
pub fn secular_lhs(z: f64, interval: &Interval1D) -> Result<f64> {
    if !(z > 0.0 && z.is_finite()) {
        return Err(param("z", format!("must be positive and finite, got {z}")));
    }
    check_poles(z, interval)?;
    Ok(secular_raw(z, interval).0)
}

/// The coupling for which `z` is an eigenvalue.
pub fn c_for_z(z: f64, interval: &Interval1D) -> Result<f64> {
    secular_lhs(z, interval)
}

/// Limit of the secular function as `z → 0⁺`.
pub fn secular_limit_at_zero(interval: &Interval1D) -> f64 {
    1.0 / interval.x0 + 1.0 / interval.x1()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Coupling {
    Finite(f64),
    /// The decoupled limit, answered from [`limit_sequence`].
    Infinite,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Options1D {
    pub tol: RootTolerance,
    /// Include the negative eigenvalue that exists when `c` exceeds [`secular_limit_at_zero`].
    pub include_negative: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum1D {
    pub c: Coupling,
    pub values: Vec<f64>,
    /// Set when `c ≥ 1/x0 + 1/(a - x0)`, so the first gap holds no positive root.
    pub ground_state_missing: bool,
}

pub fn eigenvalues_1d(c: Coupling, interval: &Interval1D, count: usize) -> Result<Spectrum1D> {
    eigenvalues_1d_with(c, interval, count, Options1D::default())
}

pub fn eigenvalues_1d_with(
    c: Coupling,
    interval: &Interval1D,
    count: usize,
    opts: Options1D,
) -> Result<Spectrum1D> {
    if count == 0 {
        return Err(param("count", "must be at least 1"));
    }
    let c = match c {
        Coupling::Infinite => {
            let seq = limit_sequence(interval, count);
            return Ok(Spectrum1D {
                c: Coupling::Infinite,
                values: seq.merged.iter().map(|e| e.z).collect(),
                ground_state_missing: false,
            });
        }
        Coupling::Finite(c) if c.is_finite() => c,
        Coupling::Finite(c) => return Err(param("c", format!("must be finite, got {c}"))),
    };

    let limit0 = secular_limit_at_zero(interval);
    let ground_state_missing = c >= limit0;
    let mut values = Vec::with_capacity(count);
    if ground_state_missing && opts.include_negative {
        values.push(negative_root(c, interval, opts.tol)?);
    }

    let mut lo = 0.0;
    let mut chunk = count + 2;
    let mut seq = limit_sequence(interval, chunk);
    let mut i = 0;
    while values.len() < count {
        if i >= seq.merged.len() {
            chunk *= 2;
            seq = limit_sequence(interval, chunk);
        }
        let entry = seq.merged[i];
        let hi = entry.z;
        let skip_first = lo == 0.0 && ground_state_missing;
        if !skip_first {
            let root = solve_increasing(
                |z| {
                    let (v, d) = secular_raw(z, interval);
                    (-v, -d)
                },
                lo,
                hi,
                -c,
                opts.tol,
            )?;
            values.push(root);
        }
        if entry.degenerate {
            // a shared pole is an eigenvalue for every coupling
            if values.len() < count {
                values.push(hi);
            }
            i += 1;
        }
        lo = hi;
        i += 1;
    }
    values.truncate(count);
    Ok(Spectrum1D {
        c: Coupling::Finite(c),
        values,
        ground_state_missing,
    })
}

/// The negative root `z = -κ²` of `κ (coth κx0 + coth κ(a - x0)) = c` for `c > 1/x0 + 1/(a - x0)`.
fn negative_root(c: f64, interval: &Interval1D, tol: RootTolerance) -> Result<f64> {
    let (x0, x1) = (interval.x0, interval.x1());
    let g = |kappa: f64| {
        let v = ycothy(kappa * x0) / x0 + ycothy(kappa * x1) / x1;
        let d = d_ycothy(kappa * x0) + d_ycothy(kappa * x1);
        (v, d)
    };
    let kappa = solve_increasing(g, 0.0, 0.5 * c * (1.0 + 1e-12), c, tol)?;
    Ok(-kappa * kappa)
}

fn ycothy(y: f64) -> f64 {
    if y < 1e-8 {
        1.0 + y * y / 3.0
    } else {
        y / y.tanh()
    }
}

/// `∫₀^L sin²(kx) dx`.
fn sin_sq_integral(k: f64, len: f64) -> f64 {
    if k == 0.0 {
        0.0
    } else {
        id_minus_sin(2.0 * k * len) / (4.0 * k)
    }
}

/// A normalized eigenfunction, continuous at `x0` with `ψ(x0) > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigenfunction1D {
    pub z: f64,
    pub interval: Interval1D,
    pub c: f64,
    /// Signed prefactor of the two-piece formula.
    pub normalization: f64,
}

impl Eigenfunction1D {
    fn k(&self) -> f64 {
        self.z.sqrt()
    }

    pub fn value(&self, x: f64) -> f64 {
        let k = self.k();
        let (x0, a) = (self.interval.x0, self.interval.a);
        let raw = if x <= x0 {
            (k * x).sin() * (k * (a - x0)).sin()
        } else {
            (k * x0).sin() * (k * (a - x)).sin()
        };
        self.normalization * raw
    }

    /// One-sided derivative; at `x0` the left derivative.
    pub fn derivative(&self, x: f64) -> f64 {
        let k = self.k();
        let (x0, a) = (self.interval.x0, self.interval.a);
        let raw = if x <= x0 {
            k * (k * x).cos() * (k * (a - x0)).sin()
        } else {
            -k * (k * x0).sin() * (k * (a - x)).cos()
        };
        self.normalization * raw
    }

    /// `ψ'(x0⁺) - ψ'(x0⁻)`.
    pub fn derivative_jump(&self) -> f64 {
        let k = self.k();
        -self.normalization * k * (k * self.interval.a).sin()
    }

    /// `(‖ψ‖²_{[0,x0]}, ‖ψ‖²_{[x0,a]})`.
    pub fn masses_sq(&self) -> (f64, f64) {
        let k = self.k();
        let (x0, x1) = (self.interval.x0, self.interval.x1());
        let n2 = self.normalization * self.normalization;
        (
            n2 * (k * x1).sin().powi(2) * sin_sq_integral(k, x0),
            n2 * (k * x0).sin().powi(2) * sin_sq_integral(k, x1),
        )
    }
}

pub fn eigenfunction_1d(z: f64, interval: &Interval1D) -> Result<Eigenfunction1D> {
    let c = c_for_z(z, interval)?;
    let k = z.sqrt();
    let (x0, x1) = (interval.x0, interval.x1());
    let (s0, s1) = ((k * x0).sin(), (k * x1).sin());
    let mass = s1 * s1 * sin_sq_integral(k, x0) + s0 * s0 * sin_sq_integral(k, x1);
    if mass.is_nan() || mass <= 0.0 {
        return Err(SebaError::Degenerate(format!(
            "eigenfunction at z = {z} vanishes identically"
        )));
    }
    let sign = if s0 * s1 < 0.0 { -1.0 } else { 1.0 };
    Ok(Eigenfunction1D {
        z,
        interval: *interval,
        c,
        normalization: sign / mass.sqrt(),
    })
}

/// `(‖ψ‖_{[0,x0]}, ‖ψ‖_{[x0,a]})` for the normalized eigenfunction at `z`.
pub fn localization_ratio_1d(z: f64, interval: &Interval1D) -> Result<(f64, f64)> {
    let (l, r) = eigenfunction_1d(z, interval)?.masses_sq();
    Ok((l.sqrt(), r.sqrt()))
}

/// Sine-series coefficients of an eigenfunction.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierCoeffs1D {
    pub z: f64,
    pub interval: Interval1D,
    /// `c_n = sin(nπx0/a) / ((nπ/a)² - z)` for `n = 1..=n_max`.
    pub coeffs: Vec<f64>,
    /// Signed factor making `M Σ c_n sin(nπx/a)` the normalized eigenfunction.
    pub m: f64,
}

impl FourierCoeffs1D {
    pub fn partial_sum(&self, x: f64) -> f64 {
        let w = PI * x / self.interval.a;
        let s: f64 = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * ((i + 1) as f64 * w).sin())
            .sum();
        self.m * s
    }

    /// Pointwise bound on the omitted terms, infinite until `(n_max π/a)² ≥ 2|z|`.
    pub fn tail_bound(&self) -> f64 {
        let n = self.coeffs.len() as f64;
        let a = self.interval.a;
        if (n * PI / a).powi(2) >= 2.0 * self.z.abs() && n > 0.0 {
            self.m.abs() * 2.0 * a * a / (PI * PI * n)
        } else {
            f64::INFINITY
        }
    }
}

/// Defined at the limit values as well, where it expands the decoupled eigenfunction.
pub fn fourier_coeffs_1d(z: f64, interval: &Interval1D, n_max: usize) -> Result<FourierCoeffs1D> {
    let a = interval.a;
    let s = interval.x0 / a;
    let t = -z * a * a;
    let n_res = (z.max(0.0).sqrt() * a / PI).round();
    if n_res >= 1.0 && (z - (n_res * PI / a).powi(2)).abs() <= POLE_GUARD * z {
        return Err(SebaError::PoleProximity {
            z,
            pole: (n_res * PI / a).powi(2),
        });
    }
    let (value_at_x0, dsum) = row_sum(t, s);
    let sum_sq = -a.powi(4) * dsum;
    let sign = if value_at_x0 < 0.0 { -1.0 } else { 1.0 };
    let m = sign / (sum_sq * a / 2.0).sqrt();
    let coeffs = (1..=n_max)
        .map(|n| {
            let nf = n as f64;
            (nf * PI * s).sin() / ((nf * PI / a).powi(2) - z)
        })
        .collect();
    Ok(FourierCoeffs1D {
        z,
        interval: *interval,
        coeffs,
        m,
    })
}
