//! Closed forms for the Dirichlet Green's function of `-d²/dξ² + t` on `[0, 1]`.
//!
//! Every sum over the longitudinal index `n₁` in this crate is one of
//!
//! ```text
//! Σ_{n≥1} sin(nπσ) sin(nπξ) / (n²π² + t) = k_t(ξ, σ) / 2
//! Σ_{n≥1} sin²(nπσ) / (n²π² + t)²       = (1/2) ∫₀¹ k_t(ξ, σ)² dξ
//! ```
//!
//! so the double series of the point scatterer collapse to single sums over
//! transverse modes. All branches are written to avoid overflow for large
//! `t` and cancellation for small `t`.

use num_complex::Complex64;

/// `sinh(x) - x`.
pub(crate) fn sinh_minus_id(x: f64) -> f64 {
    if x.abs() < 4.0 {
        let x2 = x * x;
        let mut term = x * x2 / 6.0;
        let mut sum = term;
        let mut k = 3.0;
        while term.abs() > 1e-18 * sum.abs() {
            term *= x2 / ((k + 1.0) * (k + 2.0));
            sum += term;
            k += 2.0;
        }
        sum
    } else {
        x.sinh() - x
    }
}

/// `x - sin(x)`.
pub(crate) fn id_minus_sin(x: f64) -> f64 {
    if x.abs() < 4.0 {
        let x2 = x * x;
        let mut term = x * x2 / 6.0;
        let mut sum = term;
        let mut k = 3.0;
        while term.abs() > 1e-18 * sum.abs() {
            term *= -x2 / ((k + 1.0) * (k + 2.0));
            sum += term;
            k += 2.0;
        }
        sum
    } else {
        x - x.sin()
    }
}

fn one_minus_exp_neg(x: f64) -> f64 {
    -(-x).exp_m1()
}

fn is_midpoint(sigma: f64) -> bool {
    (sigma - 0.5).abs() < 1e-15
}

/// `k_t(ξ, σ)`, the Green's function on `[0, 1]` with Dirichlet ends.
pub(crate) fn green(t: f64, xi: f64, sigma: f64) -> f64 {
    let (lo, hi) = if xi <= sigma {
        (xi, sigma)
    } else {
        (sigma, xi)
    };
    if t == 0.0 {
        lo * (1.0 - hi)
    } else if t > 0.0 {
        let u = t.sqrt();
        (u * (lo - hi)).exp()
            * one_minus_exp_neg(2.0 * u * lo)
            * one_minus_exp_neg(2.0 * u * (1.0 - hi))
            / (2.0 * u * one_minus_exp_neg(2.0 * u))
    } else {
        let w = (-t).sqrt();
        if is_midpoint(sigma) {
            let outer = if xi <= sigma { lo } else { 1.0 - hi };
            (w * outer).sin() / (2.0 * w * (0.5 * w).cos())
        } else {
            (w * lo).sin() * (w * (1.0 - hi)).sin() / (w * w.sin())
        }
    }
}

/// `∫₀^σ k_t(ξ, σ)² dξ`.
pub(crate) fn green_sq_left(t: f64, sigma: f64) -> f64 {
    if sigma <= 0.0 {
        return 0.0;
    }
    if t == 0.0 {
        return sigma.powi(3) * (1.0 - sigma).powi(2) / 3.0;
    }
    if t > 0.0 {
        let u = t.sqrt();
        // k = e^{u(ξ-σ)} (1 - e^{-2uξ}) Q on [0, σ]
        let q = one_minus_exp_neg(2.0 * u * (1.0 - sigma)) / (u * one_minus_exp_neg(2.0 * u));
        let x = 2.0 * u * sigma;
        let bracket = if x < 4.0 {
            (-x).exp() * sinh_minus_id(x)
        } else {
            0.5 * one_minus_exp_neg(2.0 * x) - x * (-x).exp()
        };
        q * q * bracket / (4.0 * u)
    } else {
        let w = (-t).sqrt();
        let p = if is_midpoint(sigma) {
            1.0 / (2.0 * w * (0.5 * w).cos())
        } else {
            (w * (1.0 - sigma)).sin() / (w * w.sin())
        };
        p * p * id_minus_sin(2.0 * w * sigma) / (4.0 * w)
    }
}

/// `(∫₀^σ k², ∫_σ¹ k²)`.
pub(crate) fn green_sq_split(t: f64, sigma: f64) -> (f64, f64) {
    (green_sq_left(t, sigma), green_sq_left(t, 1.0 - sigma))
}

/// `Σ sin²(nπσ)/(n²π² + t)` and its derivative in `t`.
pub(crate) fn row_sum(t: f64, sigma: f64) -> (f64, f64) {
    let (l, r) = green_sq_split(t, sigma);
    (0.5 * green(t, sigma, sigma), -0.5 * (l + r))
}

/// `Σ sin²(nπσ)/(n²π² + t)` for complex `t` off the nonpositive real axis.
pub(crate) fn row_sum_complex(t: Complex64, sigma: f64) -> Complex64 {
    let u = t.sqrt();
    let one = Complex64::new(1.0, 0.0);
    let k = if u.norm() < 1e-8 {
        Complex64::new(sigma * (1.0 - sigma), 0.0)
    } else if u.norm() < 1.0 {
        (u * sigma).sinh() * (u * (1.0 - sigma)).sinh() / (u * u.sinh())
    } else {
        let a = |x: f64| one - (-u * (2.0 * x)).exp();
        a(sigma) * a(1.0 - sigma) / (u * 2.0 * a(1.0))
    };
    k * 0.5
}
