//! The point scatterer on `[0, a] × [0, b]`.
//!
//! The product eigenfunctions are `φ(x, y) = sin(n₁πx/a) g_{n₂}(y/b)` with
//! `λ = (n₁π/a)² + ν_{n₂}/b²`, unnormalized. The spectral function
//!
//! ```text
//! F(z) = Σ |φ(x0, y0)|² (1/(λ - z) - λ/(λ² + 1))
//! ```
//!
//! is summed row by row: for fixed `n₂` the sum over `n₁` has a closed form
//! (see the `green` module), leaving a single series over transverse modes
//! whose remainder is bounded analytically.

use std::f64::consts::PI;
use std::sync::RwLock;

use num_complex::Complex64;

use crate::error::{param, Result, SebaError};
use crate::green::{row_sum, row_sum_complex};
use crate::localization::theorem_constants;
use crate::model1d::{limit_value, rational_approximation, Interval1D, Side};
use crate::roots::{solve_increasing, RootTolerance};
use crate::transverse::{TransverseBasis, MAX_MODE_WEIGHT};

/// Weights below this are treated as exact zeros.
pub const ZERO_WEIGHT: f64 = 1e-20;

/// Relative tolerance for merging eigenvalues of the unperturbed Laplacian.
pub const MERGE_TOL: f64 = 1e-10;

/// Default lower end of eigenvalue searches.
pub const DEFAULT_Z_FLOOR: f64 = -1e6;

/// Rectangle `[0, a] × [0, b]` with the scatterer at `(x0, y0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry {
    a: f64,
    b: f64,
    x0_frac: f64,
    y0_frac: f64,
}

impl Geometry {
    /// Unit-area rectangle with `a = √E`, `b = 1/√E`.
    pub fn from_eccentricity(e: f64, x0_frac: f64, y0_frac: f64) -> Result<Self> {
        if !(e.is_finite() && e > 0.0) {
            return Err(param("E", format!("must be positive and finite, got {e}")));
        }
        Self::new(e.sqrt(), 1.0 / e.sqrt(), x0_frac, y0_frac)
    }

    pub fn new(a: f64, b: f64, x0_frac: f64, y0_frac: f64) -> Result<Self> {
        if !(a.is_finite() && a > 0.0 && b.is_finite() && b > 0.0) {
            return Err(param(
                "a, b",
                format!("side lengths must be positive, got {a} x {b}"),
            ));
        }
        if !(x0_frac > 0.0 && x0_frac < 1.0) {
            return Err(param(
                "x0_frac",
                format!("must lie in (0, 1), got {x0_frac}"),
            ));
        }
        if !(y0_frac > 0.0 && y0_frac < 1.0) {
            return Err(param(
                "y0_frac",
                format!("must lie in (0, 1), got {y0_frac}"),
            ));
        }
        Ok(Self {
            a,
            b,
            x0_frac,
            y0_frac,
        })
    }

    /// The rectangle `r·Ω` with the scatterer at `r·(x0, y0)`.
    pub fn scaled(&self, r: f64) -> Result<Self> {
        if !(r.is_finite() && r > 0.0) {
            return Err(param("r", format!("must be positive and finite, got {r}")));
        }
        Self::new(self.a * r, self.b * r, self.x0_frac, self.y0_frac)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn eccentricity(&self) -> f64 {
        self.a / self.b
    }

    pub fn x0_frac(&self) -> f64 {
        self.x0_frac
    }

    pub fn y0_frac(&self) -> f64 {
        self.y0_frac
    }

    pub fn x0(&self) -> f64 {
        self.x0_frac * self.a
    }

    pub fn y0(&self) -> f64 {
        self.y0_frac * self.b
    }

    /// The longitudinal interval `[0, a]` with the scatterer at `x0`.
    pub fn interval(&self) -> Interval1D {
        Interval1D::new(self.a, self.x0()).expect("validated geometry")
    }

    pub fn x0_near_rational(&self) -> Option<(u32, u32)> {
        rational_approximation(self.x0_frac)
    }

    /// `(n₁π/a)²`.
    pub fn longitudinal(&self, n1: usize) -> f64 {
        (n1 as f64 * PI / self.a).powi(2)
    }

    /// `λ(n₁, n₂)`.
    pub fn lambda(&self, n1: usize, nu: f64) -> f64 {
        self.longitudinal(n1) + nu / (self.b * self.b)
    }

    /// `sin²(n₁π x0/a)`.
    pub fn longitudinal_weight(&self, n1: usize) -> f64 {
        (n1 as f64 * PI * self.x0_frac).sin().powi(2)
    }
}

/// Truncation controls for every series in the crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesConfig {
    /// Absolute bound on the omitted remainder.
    pub tail_tol: f64,
    /// Cap on the number of transverse rows summed.
    pub max_terms: usize,
    /// Relative half-width of the band around each weighted pole.
    pub pole_guard: f64,
}

impl Default for SeriesConfig {
    fn default() -> Self {
        Self {
            tail_tol: 1e-8,
            max_terms: 10_000_000,
            pole_guard: 1e-9,
        }
    }
}

impl SeriesConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tail_tol > 0.0 && self.tail_tol.is_finite()) {
            return Err(param(
                "tail_tol",
                format!("must be positive, got {}", self.tail_tol),
            ));
        }
        if self.max_terms < 1000 {
            return Err(param(
                "max_terms",
                format!("must be at least 1000, got {}", self.max_terms),
            ));
        }
        if !(self.pole_guard >= 0.0 && self.pole_guard < 1e-2) {
            return Err(param(
                "pole_guard",
                format!("must lie in [0, 0.01), got {}", self.pole_guard),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Default)]
struct RowCache {
    mu: Vec<f64>,
    wy: Vec<f64>,
    /// Prefix sums of `wy · Σ_{n₁} sin²(n₁πs) Re 1/((n₁π/a)² + μ - i)`.
    compensator: Vec<f64>,
}

/// Value, derivative and truncation data of one evaluation of `F`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FValue {
    pub value: f64,
    pub derivative: f64,
    pub rows: usize,
    pub tail_bound: f64,
}

/// `F` for one geometry and boundary condition, with cached transverse rows.
///
/// The row cache is extended under a write lock; evaluations only read it
/// afterwards, so one instance can be shared across threads.
#[derive(Debug)]
pub struct SpectralFunction {
    geom: Geometry,
    basis: TransverseBasis,
    cfg: SeriesConfig,
    rows: RwLock<RowCache>,
}

impl Clone for SpectralFunction {
    fn clone(&self) -> Self {
        Self::new(self.geom, self.basis, self.cfg).expect("validated config")
    }
}

impl SpectralFunction {
    pub fn new(geom: Geometry, basis: TransverseBasis, cfg: SeriesConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            geom,
            basis,
            cfg,
            rows: RwLock::new(RowCache::default()),
        })
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geom
    }

    pub fn basis(&self) -> &TransverseBasis {
        &self.basis
    }

    pub fn config(&self) -> &SeriesConfig {
        &self.cfg
    }

    /// `Σ_{n₁} sin²(n₁πs)/((n₁π/a)² + q)` and its `q`-derivative.
    pub(crate) fn row(&self, q: f64) -> (f64, f64) {
        let a2 = self.geom.a * self.geom.a;
        let (v, d) = row_sum(q * a2, self.geom.x0_frac);
        (a2 * v, a2 * a2 * d)
    }

    fn row_complex(&self, q: Complex64) -> Complex64 {
        let a2 = self.geom.a * self.geom.a;
        row_sum_complex(q * a2, self.geom.x0_frac) * a2
    }

    fn ensure_rows(&self, n: usize) {
        if self.rows.read().expect("row cache poisoned").mu.len() >= n {
            return;
        }
        let mut cache = self.rows.write().expect("row cache poisoned");
        let b2 = self.geom.b * self.geom.b;
        let start = cache.mu.len();
        let target = n.max(2 * start);
        for k in start + 1..=target {
            let mode = self.basis.mode(k);
            let mu = mode.nu / b2;
            let wy = mode.weight_at(self.geom.y0_frac);
            let comp = wy * self.row_complex(Complex64::new(mu, -1.0)).re;
            let prev = cache.compensator.last().copied().unwrap_or(0.0);
            cache.mu.push(mu);
            cache.wy.push(wy);
            cache.compensator.push(prev + comp);
        }
    }

    /// Upper bound for the contribution of rows beyond `n`, or `None` when
    /// row `n + 1` still lies below `2(|z| + 1)`.
    fn tail_bound(&self, z: f64, n: usize) -> Option<f64> {
        let next = self.basis.mode(n + 1).nu / (self.geom.b * self.geom.b);
        if n == 0 || next < 2.0 * (z.abs() + 1.0) {
            return None;
        }
        let (a, b) = (self.geom.a, self.geom.b);
        Some(
            MAX_MODE_WEIGHT * (1.0 + z.abs()) * a * b.powi(3) / 2.0
                * self.basis.inverse_power_tail(n, 1.5),
        )
    }

    /// Smallest row count whose remainder bound meets `tol`.
    fn rows_for(&self, tol: f64, bound: impl Fn(usize) -> Option<f64>) -> Result<(usize, f64)> {
        let ok = |n: usize| bound(n).filter(|b| *b <= tol);
        let mut hi = 1;
        while ok(hi).is_none() {
            if hi >= self.cfg.max_terms {
                let b = bound(self.cfg.max_terms).unwrap_or(f64::INFINITY);
                return Err(SebaError::Truncation {
                    terms: self.cfg.max_terms,
                    bound: b,
                    tol,
                });
            }
            hi = (2 * hi).min(self.cfg.max_terms);
        }
        let mut lo = hi / 2;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if ok(mid).is_some() {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok((hi, bound(hi).expect("checked")))
    }

    /// Rows needed at `z` and the corresponding remainder bound.
    pub fn rows_needed(&self, z: f64) -> Result<(usize, f64)> {
        self.rows_for(self.cfg.tail_tol, |n| self.tail_bound(z, n))
    }

    /// `F(z)` and `F'(z)` without the pole check.
    pub(crate) fn eval_unguarded(&self, z: f64) -> Result<FValue> {
        let (n, tail) = self.rows_needed(z)?;
        self.ensure_rows(n);
        let cache = self.rows.read().expect("row cache poisoned");
        let (mut v, mut d) = (0.0, 0.0);
        for k in 0..n {
            let wy = cache.wy[k];
            if wy == 0.0 {
                continue;
            }
            let (g, dg) = self.row(cache.mu[k] - z);
            v += wy * g;
            d -= wy * dg;
        }
        Ok(FValue {
            value: v - cache.compensator[n - 1],
            derivative: d,
            rows: n,
            tail_bound: tail,
        })
    }

    /// The weighted pole nearest to `z` among rows lying below `z`, if inside the guard band.
    pub fn pole_near(&self, z: f64) -> Option<f64> {
        let b2 = self.geom.b * self.geom.b;
        let mut k = 1;
        loop {
            let mode = self.basis.mode(k);
            let mu = mode.nu / b2;
            if mu > z * (1.0 + self.cfg.pole_guard) + self.cfg.pole_guard {
                return None;
            }
            if mode.weight_at(self.geom.y0_frac) > ZERO_WEIGHT {
                let center = (self.geom.a * (z - mu).max(0.0).sqrt() / PI).round() as usize;
                for n1 in center.saturating_sub(1).max(1)..=center + 1 {
                    let lambda = self.geom.lambda(n1, mode.nu);
                    if self.geom.longitudinal_weight(n1) > ZERO_WEIGHT
                        && (z - lambda).abs() <= self.cfg.pole_guard * lambda.abs().max(1.0)
                    {
                        return Some(lambda);
                    }
                }
            }
            k += 1;
        }
    }

    /// `F(z)` with its derivative; errors inside the guard band of a weighted pole.
    pub fn eval(&self, z: f64) -> Result<FValue> {
        if !z.is_finite() {
            return Err(param("z", format!("must be finite, got {z}")));
        }
        if let Some(pole) = self.pole_near(z) {
            return Err(SebaError::PoleProximity { z, pole });
        }
        self.eval_unguarded(z)
    }

    /// `Σ w (λ/(λ² + 1) - λ/(λ² + r⁴))` with `w = |φ(x0, y0)|²`.
    ///
    /// With this constant, `z` is an eigenvalue of the scatterer on `r·Ω` at
    /// coupling `α` exactly when `r² z` is one on `Ω` at `α/r² - β`.
    pub fn scaling_beta(&self, r: f64) -> Result<f64> {
        if !(r.is_finite() && r > 0.0) {
            return Err(param("r", format!("must be positive and finite, got {r}")));
        }
        let r4 = r.powi(4);
        if r4 == 1.0 {
            return Ok(0.0);
        }
        let (a, b) = (self.geom.a, self.geom.b);
        let tail = |n: usize| {
            (n > 0 && self.basis.mode(n + 1).nu > 0.0).then(|| {
                MAX_MODE_WEIGHT * (r4 - 1.0).abs() * 3.0 * a * b.powi(5) / 16.0
                    * self.basis.inverse_power_tail(n, 2.5)
            })
        };
        let (n, _) = self.rows_for(self.cfg.tail_tol, tail)?;
        self.ensure_rows(n);
        let cache = self.rows.read().expect("row cache poisoned");
        let scaled: f64 = (0..n)
            .map(|k| cache.wy[k] * self.row_complex(Complex64::new(cache.mu[k], -r * r)).re)
            .sum();
        Ok(cache.compensator[n - 1] - scaled)
    }
}

/// `F(z)` for a single evaluation.
pub fn eval_f(z: f64, geom: &Geometry, basis: &TransverseBasis, cfg: &SeriesConfig) -> Result<f64> {
    Ok(SpectralFunction::new(*geom, *basis, *cfg)?.eval(z)?.value)
}

/// One mode of the unperturbed Laplacian at a given eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductMode {
    pub n1: usize,
    /// Rearranged transverse index.
    pub n2: usize,
    pub original_label: i64,
    pub lambda: f64,
    /// `φ(x0, y0)`.
    pub value_at_scatterer: Complex64,
}

impl ProductMode {
    pub fn weight(&self) -> f64 {
        self.value_at_scatterer.norm_sqr()
    }
}

/// A distinct eigenvalue of the unperturbed Laplacian.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedPole {
    pub lambda: f64,
    /// `Σ |φ(x0, y0)|²` over the eigenspace.
    pub total_weight: f64,
    /// Dimension of the eigenspace.
    pub mu: usize,
    /// Modes vanishing at the scatterer.
    pub mu0: usize,
    /// Set when modes with unequal computed `λ` were merged.
    pub merged: bool,
    pub modes: Vec<ProductMode>,
}

impl WeightedPole {
    pub fn is_weighted(&self) -> bool {
        self.total_weight > ZERO_WEIGHT
    }

    /// Multiplicity of this value in the perturbed spectrum.
    pub fn unperturbed_multiplicity(&self) -> usize {
        if self.is_weighted() {
            self.mu - 1
        } else {
            self.mu
        }
    }
}

/// Distinct Laplacian eigenvalues `λ ≤ z_max`, sorted.
pub fn weighted_poles(geom: &Geometry, basis: &TransverseBasis, z_max: f64) -> Vec<WeightedPole> {
    let b2 = geom.b * geom.b;
    let mut modes = Vec::new();
    let mut n2 = 1;
    loop {
        let mode = basis.mode(n2);
        let mu = mode.nu / b2;
        if mu + geom.longitudinal(1) > z_max {
            break;
        }
        let g = mode.value_at(geom.y0_frac);
        let mut n1 = 1;
        loop {
            let lambda = geom.lambda(n1, mode.nu);
            if lambda > z_max {
                break;
            }
            let s = (n1 as f64 * PI * geom.x0_frac).sin();
            let mut value = g * s;
            if value.norm_sqr() < ZERO_WEIGHT {
                value = Complex64::new(0.0, 0.0);
            }
            modes.push(ProductMode {
                n1,
                n2,
                original_label: mode.original_label,
                lambda,
                value_at_scatterer: value,
            });
            n1 += 1;
        }
        n2 += 1;
    }
    modes.sort_by(|p, q| {
        p.lambda
            .total_cmp(&q.lambda)
            .then(p.n1.cmp(&q.n1))
            .then(p.original_label.cmp(&q.original_label))
    });

    let mut poles: Vec<WeightedPole> = Vec::new();
    for m in modes {
        if let Some(last) = poles.last_mut() {
            if (m.lambda - last.lambda).abs() <= MERGE_TOL * last.lambda.abs().max(1.0) {
                last.merged |= m.lambda != last.lambda;
                last.mu += 1;
                last.mu0 += usize::from(m.weight() == 0.0);
                last.total_weight += m.weight();
                last.modes.push(m);
                continue;
            }
        }
        poles.push(WeightedPole {
            lambda: m.lambda,
            total_weight: m.weight(),
            mu: 1,
            mu0: usize::from(m.weight() == 0.0),
            merged: false,
            modes: vec![m],
        });
    }
    poles
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EigenKind {
    Perturbed,
    Unperturbed,
}

impl EigenKind {
    pub fn name(&self) -> &'static str {
        match self {
            EigenKind::Perturbed => "perturbed",
            EigenKind::Unperturbed => "unperturbed",
        }
    }
}

/// A linear combination of product modes.
pub type ModeCombination = Vec<(ProductMode, Complex64)>;

/// An eigenvalue of the point scatterer.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenpairPS {
    pub z: f64,
    pub kind: EigenKind,
    /// The coupling, for perturbed eigenvalues.
    pub alpha: Option<f64>,
    pub multiplicity: usize,
    /// Basis of the eigenspace, for unperturbed eigenvalues.
    pub eigenspace: Vec<ModeCombination>,
}

/// Basis of `{Σ c_j φ_j : Σ c_j φ_j(x0, y0) = 0}` within one eigenspace.
fn null_sum_basis(pole: &WeightedPole) -> Vec<ModeCombination> {
    let one = Complex64::new(1.0, 0.0);
    let mut basis: Vec<ModeCombination> = pole
        .modes
        .iter()
        .filter(|m| m.weight() == 0.0)
        .map(|m| vec![(*m, one)])
        .collect();
    let weighted: Vec<&ProductMode> = pole.modes.iter().filter(|m| m.weight() > 0.0).collect();
    if let Some((first, rest)) = weighted.split_first() {
        for m in rest {
            basis.push(vec![
                (**first, m.value_at_scatterer),
                (**m, -first.value_at_scatterer),
            ]);
        }
    }
    basis
}

/// All eigenvalues of the scatterer with coupling `alpha` in `[lo, hi]`.
pub fn eigenvalues_for_alpha(
    alpha: f64,
    f: &SpectralFunction,
    range: (f64, f64),
) -> Result<Vec<EigenpairPS>> {
    let (lo, hi) = range;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(param(
            "z_range",
            format!("needs finite low < high, got ({lo}, {hi})"),
        ));
    }
    if !alpha.is_finite() {
        return Err(param("alpha", format!("must be finite, got {alpha}")));
    }
    let geom = f.geometry();
    let basis = f.basis();
    let mut z_max = hi.max(geom.lambda(1, basis.mode(1).nu));
    let poles = loop {
        let poles = weighted_poles(geom, basis, z_max);
        if poles.iter().any(|p| p.is_weighted() && p.lambda > hi) {
            break poles;
        }
        z_max = 2.0 * z_max + 1.0;
    };

    let mut out = Vec::new();
    let tol = RootTolerance::default();
    let mut left = f64::NEG_INFINITY;
    for pole in poles.iter().filter(|p| p.is_weighted()) {
        let right = pole.lambda;
        if left >= hi {
            break;
        }
        if right > lo {
            let a = if lo > left { lo } else { left };
            let b = if hi < right { hi } else { right };
            let below = a > left && f.eval_unguarded(a)?.value > alpha;
            let above = b < right && f.eval_unguarded(b)?.value < alpha;
            if !below && !above {
                let mut err = None;
                let z = solve_increasing(
                    |z| match f.eval_unguarded(z) {
                        Ok(v) => (v.value, v.derivative),
                        Err(e) => {
                            err.get_or_insert(e);
                            (f64::NAN, f64::NAN)
                        }
                    },
                    a,
                    b,
                    alpha,
                    tol,
                )?;
                if let Some(e) = err {
                    return Err(e);
                }
                out.push(EigenpairPS {
                    z,
                    kind: EigenKind::Perturbed,
                    alpha: Some(alpha),
                    multiplicity: 1,
                    eigenspace: Vec::new(),
                });
            }
        }
        left = right;
    }
    for pole in poles.iter().filter(|p| p.lambda >= lo && p.lambda <= hi) {
        let multiplicity = pole.unperturbed_multiplicity();
        if multiplicity > 0 {
            out.push(EigenpairPS {
                z: pole.lambda,
                kind: EigenKind::Unperturbed,
                alpha: None,
                multiplicity,
                eigenspace: null_sum_basis(pole),
            });
        }
    }
    out.sort_by(|p, q| p.z.total_cmp(&q.z));
    Ok(out)
}

/// The coupling `α_n` placing an eigenvalue at `ν₁/b² + z_{n-1,∞}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaN {
    pub n: usize,
    pub alpha: f64,
    pub z_target: f64,
    /// `z_{n-1,∞}` of the interval `[0, a]`.
    pub limit: f64,
    /// Side of `z_{n-1,∞}`, predicting where the eigenfunction concentrates.
    pub side: Side,
}

pub fn alpha_n(n: usize, f: &SpectralFunction) -> Result<AlphaN> {
    let geom = f.geometry();
    let consts = theorem_constants(geom, f.basis());
    if n < consts.n_tilde || n > consts.n_e {
        return Err(SebaError::LevelRange {
            n,
            lo: consts.n_tilde,
            hi: consts.n_e,
        });
    }
    let entry = limit_value(&geom.interval(), n - 1)?;
    if entry.degenerate {
        return Err(SebaError::Degenerate(format!(
            "limit value {} is shared by both sides",
            entry.z
        )));
    }
    let z_target = consts.nu1 / (geom.b * geom.b) + entry.z;
    let value = f.eval(z_target).map_err(|e| match e {
        SebaError::PoleProximity { z, pole } => SebaError::Degenerate(format!(
            "target {z} coincides with the weighted pole {pole}"
        )),
        other => other,
    })?;
    Ok(AlphaN {
        n,
        alpha: value.value,
        z_target,
        limit: entry.z,
        side: entry.side,
    })
}
