//! Independent reference computations used to validate the spectral code.
//!
//! Nothing here calls the closed-form row sums or the secular solvers; each
//! oracle works from the raw definitions with elementary functions only.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{param, Result, SebaError};
use crate::model1d::Interval1D;
use crate::quadrature::gauss_legendre;
use crate::scatterer::Geometry;
use crate::transverse::TransverseBasis;

/// Finite-difference grid on `[0, a]` with `x0` as a node.
///
/// Uniform on each side of the scatterer, so the spacing may differ across it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    pub n_left: usize,
    pub n_right: usize,
    pub h_left: f64,
    pub h_right: f64,
    /// Index of the node at `x0` among the interior nodes.
    pub delta_node: usize,
}

impl Grid1D {
    /// Grid with about `n` interior nodes split in proportion to the side lengths.
    pub fn new(interval: &Interval1D, n: usize) -> Result<Self> {
        if n < 4 {
            return Err(param(
                "n",
                format!("need at least 4 interior nodes, got {n}"),
            ));
        }
        let (a, x0) = (interval.a(), interval.x0());
        let n_left = ((n as f64 * x0 / a).round() as usize).clamp(1, n - 2);
        Ok(Self::with_sides(interval, n_left, n - n_left))
    }

    fn with_sides(interval: &Interval1D, n_left: usize, n_right: usize) -> Self {
        let (a, x0) = (interval.a(), interval.x0());
        Self {
            n_left,
            n_right,
            h_left: x0 / n_left as f64,
            h_right: (a - x0) / n_right as f64,
            delta_node: n_left - 1,
        }
    }

    /// Same grid with both spacings halved.
    pub fn refined(&self, interval: &Interval1D) -> Self {
        Self::with_sides(interval, 2 * self.n_left, 2 * self.n_right)
    }

    pub fn interior_nodes(&self) -> usize {
        self.n_left + self.n_right - 1
    }

    /// Symmetrized tridiagonal `(diagonal, off-diagonal)` of `-d² - cδ` with lumped mass.
    fn matrix(&self, c: f64) -> (Vec<f64>, Vec<f64>) {
        let m = self.interior_nodes();
        let spacing = |i: usize| -> (f64, f64) {
            let hl = if i <= self.delta_node {
                self.h_left
            } else {
                self.h_right
            };
            let hr = if i < self.delta_node {
                self.h_left
            } else {
                self.h_right
            };
            (hl, hr)
        };
        let mass: Vec<f64> = (0..m)
            .map(|i| {
                let (hl, hr) = spacing(i);
                0.5 * (hl + hr)
            })
            .collect();
        let diag = (0..m)
            .map(|i| {
                let (hl, hr) = spacing(i);
                let k = 1.0 / hl + 1.0 / hr - if i == self.delta_node { c } else { 0.0 };
                k / mass[i]
            })
            .collect();
        let off = (0..m - 1)
            .map(|i| {
                let (_, hr) = spacing(i);
                -1.0 / hr / (mass[i] * mass[i + 1]).sqrt()
            })
            .collect();
        (diag, off)
    }
}

/// Number of eigenvalues of the symmetric tridiagonal matrix below `x`.
fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..diag.len() {
        let e2 = if i == 0 { 0.0 } else { off[i - 1] * off[i - 1] };
        q = diag[i] - x - if i == 0 { 0.0 } else { e2 / q };
        if q == 0.0 {
            q = -1e-300;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn tridiagonal_eigs(diag: &[f64], off: &[f64], count: usize) -> Vec<f64> {
    let n = diag.len();
    let radius = |i: usize| {
        let l = if i > 0 { off[i - 1].abs() } else { 0.0 };
        let r = if i + 1 < n { off[i].abs() } else { 0.0 };
        l + r
    };
    let lo0 = (0..n)
        .map(|i| diag[i] - radius(i))
        .fold(f64::INFINITY, f64::min);
    let hi0 = (0..n)
        .map(|i| diag[i] + radius(i))
        .fold(f64::NEG_INFINITY, f64::max);
    (0..count.min(n))
        .map(|k| {
            let (mut lo, mut hi) = (lo0, hi0);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi || hi - lo <= 1e-15 * mid.abs().max(1.0) {
                    break;
                }
                if sturm_count(diag, off, mid) > k {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            0.5 * (lo + hi)
        })
        .collect()
}

/// Lowest `count` eigenvalues of the finite-difference `-d²/dx² - cδ(x - x0)`.
///
/// The mass-lumped scheme is second order when `x0` is a grid node.
pub fn fd_1d_eigs(c: f64, interval: &Interval1D, n: usize, count: usize) -> Result<Vec<f64>> {
    fd_1d_eigs_on(c, &Grid1D::new(interval, n)?, count)
}

pub fn fd_1d_eigs_on(c: f64, grid: &Grid1D, count: usize) -> Result<Vec<f64>> {
    if !c.is_finite() {
        return Err(param("c", "finite-difference oracle needs finite coupling"));
    }
    let (diag, off) = grid.matrix(c);
    Ok(tridiagonal_eigs(&diag, &off, count))
}

/// Observed order of convergence of each eigenvalue on `n`, `2n`, `4n` nodes,
/// with the Richardson extrapolation.
#[derive(Debug, Clone, PartialEq)]
pub struct FdConvergence {
    pub orders: Vec<f64>,
    pub extrapolated: Vec<f64>,
}

pub fn fd_convergence(
    c: f64,
    interval: &Interval1D,
    n: usize,
    count: usize,
) -> Result<FdConvergence> {
    let g1 = Grid1D::new(interval, n)?;
    let g2 = g1.refined(interval);
    let g3 = g2.refined(interval);
    let z1 = fd_1d_eigs_on(c, &g1, count)?;
    let z2 = fd_1d_eigs_on(c, &g2, count)?;
    let z3 = fd_1d_eigs_on(c, &g3, count)?;
    let mut orders = Vec::with_capacity(count);
    let mut extrapolated = Vec::with_capacity(count);
    for k in 0..z1.len().min(z2.len()).min(z3.len()) {
        let r = (z1[k] - z2[k]) / (z2[k] - z3[k]);
        let p = r.abs().log2();
        orders.push(p);
        extrapolated.push(z3[k] + (z3[k] - z2[k]) / (2f64.powf(p) - 1.0));
    }
    Ok(FdConvergence {
        orders,
        extrapolated,
    })
}

/// Truncated double sum for `F(z)` and a rigorous bound on what it omits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BruteSum {
    pub value: f64,
    pub tail_bound: f64,
}

/// `F(z)` summed term by term over `n₁ ≤ n1_max`, `n₂ ≤ n2_max`.
pub fn brute_series_f(
    z: f64,
    geom: &Geometry,
    basis: &TransverseBasis,
    n1_max: usize,
    n2_max: usize,
) -> BruteSum {
    let (a, b) = (geom.a(), geom.b());
    let long: Vec<(f64, f64)> = (1..=n1_max)
        .map(|n1| {
            let k = n1 as f64 * PI;
            ((k / a).powi(2), (k * geom.x0_frac()).sin().powi(2))
        })
        .collect();
    let mut value = 0.0;
    for n2 in (1..=n2_max).rev() {
        let mode = basis.mode(n2);
        let wy = mode.value_at(geom.y0_frac()).norm_sqr();
        if wy == 0.0 {
            continue;
        }
        let mu = mode.nu / (b * b);
        let mut row = 0.0;
        for &(k2, wx) in long.iter().rev() {
            let lambda = k2 + mu;
            row += wx * (1.0 + lambda * z) / ((lambda - z) * (lambda * lambda + 1.0));
        }
        value += wy * row;
    }
    // Every omitted λ exceeds λ_min; then |term| ≤ C w / λ².
    let lambda_min = ((n1_max + 1) as f64 * PI / a)
        .powi(2)
        .min((n2_max as f64 * PI / b).powi(2));
    let tail_bound = if lambda_min > 2.0 * (z.abs() + 1.0) {
        let cst = (z.abs() + 1.0 / lambda_min) / (1.0 - z.abs() / lambda_min);
        let (n1, n2) = (n1_max as f64, n2_max as f64);
        let long_tail =
            (a / PI).powi(4) / (3.0 * n1.powi(3)) + b / 4.0 * (a / PI).powi(3) / (2.0 * n1 * n1);
        let trans_tail =
            a * b.powi(3) / (4.0 * PI.powi(3)) * (1.0 / n2.powi(3) + 1.0 / (2.0 * n2 * n2));
        cst * (long_tail + trans_tail)
    } else {
        f64::INFINITY
    };
    BruteSum { value, tail_bound }
}

/// `Σ w (λ/(λ² + 1) - λ/(λ² + r⁴))` summed term by term, with a bound on the omitted terms.
pub fn brute_scaling_beta(
    geom: &Geometry,
    basis: &TransverseBasis,
    r: f64,
    n1_max: usize,
    n2_max: usize,
) -> BruteSum {
    let (a, b) = (geom.a(), geom.b());
    let r4 = r.powi(4);
    let mut value = 0.0;
    for n2 in (1..=n2_max).rev() {
        let mode = basis.mode(n2);
        let wy = mode.value_at(geom.y0_frac()).norm_sqr();
        let mu = mode.nu / (b * b);
        let mut row = 0.0;
        for n1 in (1..=n1_max).rev() {
            let k = n1 as f64 * PI;
            let lambda = (k / a).powi(2) + mu;
            let wx = (k * geom.x0_frac()).sin().powi(2);
            row += wx * lambda * (r4 - 1.0) / ((lambda * lambda + 1.0) * (lambda * lambda + r4));
        }
        value += wy * row;
    }
    // each omitted term is at most |r⁴ - 1| / λ³; the inner sums are bounded by
    // ∫₀^∞ dx / (p + x²)³ = 3π / (16 p^{5/2}), using √ν_n ≥ π(n - 1)
    let (n1, n2) = (n1_max as f64, n2_max as f64);
    let tail_long = (a / PI).powi(6) / (5.0 * n1.powi(5))
        + 3.0 * b / 16.0 * (a / PI).powi(5) / (4.0 * n1.powi(4));
    let tail_trans =
        3.0 * a / 16.0 * (b / PI).powi(5) * (1.0 / n2.powi(5) + 1.0 / (4.0 * n2.powi(4)));
    BruteSum {
        value,
        tail_bound: (r4 - 1.0).abs() * (tail_long + tail_trans),
    }
}

/// Axis-aligned rectangle `[x.0, x.1] × [y.0, y.1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadRegion {
    pub x: (f64, f64),
    pub y: (f64, f64),
}

impl QuadRegion {
    fn contains(&self, p: (f64, f64)) -> bool {
        p.0 >= self.x.0 && p.0 <= self.x.1 && p.1 >= self.y.0 && p.1 <= self.y.1
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    /// Total, including the excluded disk.
    pub value: f64,
    /// Log-profile estimate of the mass inside the disk.
    pub excluded: f64,
    pub disk_radius: f64,
}

const QUAD_ORDER: usize = 8;

fn breakpoints(lo: f64, hi: f64, cuts: &[f64]) -> Vec<f64> {
    let mut v: Vec<f64> = std::iter::once(lo)
        .chain(cuts.iter().copied().filter(|&c| c > lo && c < hi))
        .chain(std::iter::once(hi))
        .collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

fn panel_nodes(
    edges: &[f64],
    total_panels: usize,
    nodes: &[f64],
    weights: &[f64],
) -> Vec<(f64, f64)> {
    let span = edges[edges.len() - 1] - edges[0];
    let mut out = Vec::new();
    for w in edges.windows(2) {
        let len = w[1] - w[0];
        let panels = ((total_panels as f64 * len / span).ceil() as usize).max(1);
        let h = len / panels as f64;
        for p in 0..panels {
            let lo = w[0] + p as f64 * h;
            for (t, wt) in nodes.iter().zip(weights) {
                out.push((lo + 0.5 * h * (t + 1.0), 0.5 * h * wt));
            }
        }
    }
    out
}

/// `∫₀^ρ (A ln r + B)² r dr`.
fn log_disk(a: f64, b: f64, rho: f64) -> f64 {
    let l = rho.ln();
    0.5 * rho * rho * (a * a * (l * l - l + 0.5) + 2.0 * a * b * (l - 0.5) + b * b)
}

/// `∫_region |ψ|²` by composite Gauss–Legendre.
///
/// Around the singular point a square is integrated in polar coordinates
/// down to a small disk, whose mass is estimated from a fit
/// `|ψ| ≈ A ln r + B`. `resolution` is the number of nodes per axis.
pub fn quad_norm_sq<F>(
    psi: &F,
    region: QuadRegion,
    center: (f64, f64),
    resolution: usize,
) -> Result<QuadResult>
where
    F: Fn(f64, f64) -> Complex64 + Sync,
{
    if resolution < 64 {
        return Err(param(
            "resolution",
            format!("need at least 64 nodes per axis, got {resolution}"),
        ));
    }
    let (gx, gw) = gauss_legendre(QUAD_ORDER);
    let panels = resolution / QUAD_ORDER;
    let (cx, cy) = center;
    let inside = region.contains(center);
    let w = if inside {
        [
            cx - region.x.0,
            region.x.1 - cx,
            cy - region.y.0,
            region.y.1 - cy,
        ]
        .into_iter()
        .filter(|&d| d > 0.0)
        .fold(f64::INFINITY, f64::min)
            * 0.5
    } else {
        0.0
    };
    let xs = panel_nodes(
        &breakpoints(region.x.0, region.x.1, &[cx - w, cx, cx + w]),
        panels,
        &gx,
        &gw,
    );
    let ys = panel_nodes(
        &breakpoints(region.y.0, region.y.1, &[cy - w, cy, cy + w]),
        panels,
        &gx,
        &gw,
    );
    let in_square = |x: f64, y: f64| inside && (x - cx).abs() < w && (y - cy).abs() < w;
    let outer: f64 = xs
        .par_iter()
        .map(|&(x, wx)| {
            ys.iter()
                .filter(|&&(y, _)| !in_square(x, y))
                .map(|&(y, wy)| wx * wy * psi(x, y).norm_sqr())
                .sum::<f64>()
        })
        .sum();
    if !inside {
        return Ok(QuadResult {
            value: outer,
            excluded: 0.0,
            disk_radius: 0.0,
        });
    }

    let rho = w / resolution as f64;
    let theta_nodes = panel_nodes(&[0.0, 0.25 * PI], (panels / 4).max(2), &gx, &gw);
    let r_edges: Vec<f64> = {
        let mut v = vec![rho];
        while v[v.len() - 1] * 2.0 < w {
            let last = v[v.len() - 1];
            v.push(last * 2.0);
        }
        v
    };
    let mut polar = 0.0;
    let mut excluded = 0.0;
    for (sx, sy) in [(1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0)] {
        if !region.contains((cx + sx * w, cy + sy * w)) {
            continue;
        }
        let point = |r: f64, phi: f64| psi(cx + sx * r * phi.cos(), cy + sy * r * phi.sin());
        // Two triangles: φ ∈ [0, π/4] bounded by |Δx| = w, φ ∈ [π/4, π/2] by |Δy| = w.
        for tri in 0..2 {
            polar += theta_nodes
                .par_iter()
                .map(|&(t, wt)| {
                    let phi = if tri == 0 { t } else { 0.5 * PI - t };
                    let r_max = if tri == 0 {
                        w / phi.cos()
                    } else {
                        w / phi.sin()
                    };
                    let mut edges: Vec<f64> =
                        r_edges.iter().copied().filter(|&r| r < r_max).collect();
                    edges.push(r_max);
                    let mut acc = 0.0;
                    for e in edges.windows(2) {
                        let h = e[1] - e[0];
                        for (u, wu) in gx.iter().zip(&gw) {
                            let r = e[0] + 0.5 * h * (u + 1.0);
                            acc += 0.5 * h * wu * r * point(r, phi).norm_sqr();
                        }
                    }
                    wt * acc
                })
                .sum::<f64>();
        }
        let samples = 16;
        let mean = |r: f64| {
            (0..samples)
                .map(|k| point(r, 0.5 * PI * (k as f64 + 0.5) / samples as f64).norm())
                .sum::<f64>()
                / samples as f64
        };
        let (m1, m2) = (mean(rho), mean(2.0 * rho));
        let slope = (m2 - m1) / 2f64.ln();
        let intercept = m1 - slope * rho.ln();
        excluded += 0.5 * PI * log_disk(slope, intercept, rho);
    }
    let value = outer + polar + excluded;
    if !value.is_finite() {
        return Err(SebaError::Degenerate(
            "quadrature produced a non-finite mass".into(),
        ));
    }
    Ok(QuadResult {
        value,
        excluded,
        disk_radius: rho,
    })
}

/// Samples of a field on a uniform grid `origin + (i h, j h)`, row-major in `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    pub origin: (f64, f64),
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
    pub values: Vec<Complex64>,
}

impl GridField {
    pub fn sample<F>(psi: &F, origin: (f64, f64), h: f64, nx: usize, ny: usize) -> Self
    where
        F: Fn(f64, f64) -> Complex64 + Sync,
    {
        let values = (0..nx * ny)
            .into_par_iter()
            .map(|k| {
                let (i, j) = (k % nx, k / nx);
                psi(origin.0 + i as f64 * h, origin.1 + j as f64 * h)
            })
            .collect();
        Self {
            origin,
            h,
            nx,
            ny,
            values,
        }
    }

    fn at(&self, i: usize, j: usize) -> Complex64 {
        self.values[j * self.nx + i]
    }
}

/// Largest `|(-Δ_h - z) ψ|` over interior grid nodes farther than `exclusion`
/// from `center`, with the five-point Laplacian.
pub fn residual_check(field: &GridField, z: f64, center: (f64, f64), exclusion: f64) -> f64 {
    let h2 = field.h * field.h;
    let mut worst = 0.0_f64;
    for j in 1..field.ny.saturating_sub(1) {
        for i in 1..field.nx.saturating_sub(1) {
            let x = field.origin.0 + i as f64 * field.h;
            let y = field.origin.1 + j as f64 * field.h;
            if ((x - center.0).powi(2) + (y - center.1).powi(2)).sqrt() <= exclusion {
                continue;
            }
            let u = field.at(i, j);
            let lap =
                (field.at(i + 1, j) + field.at(i - 1, j) + field.at(i, j + 1) + field.at(i, j - 1)
                    - u * 4.0)
                    / h2;
            worst = worst.max((-lap - u * z).norm());
        }
    }
    worst
}
