//! Transverse eigendata for the long sides of the rectangle.
//!
//! Each boundary condition yields a family of modes `g(t)`, `t ∈ [0, 1]`, with
//! eigenvalues `ν`. The families indexed by `n ≥ 0` or `n ∈ ℤ` are rearranged
//! into a single nondecreasing sequence `ν_1 ≤ ν_2 ≤ …`; ties are broken by
//! the original label in ascending order. The rearrangement is closed form,
//! so any index can be produced in O(1).

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;

use crate::error::{param, Result};

/// Boundary condition on `[0, a] × {0, b}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryCondition {
    Dirichlet,
    Neumann,
    Periodic,
    /// `u(x, 0) = e^{-iθ} u(x, b)` with `θ ∈ (-π, π)`.
    Floquet {
        theta: f64,
    },
}

impl BoundaryCondition {
    pub fn floquet(theta: f64) -> Result<Self> {
        if !theta.is_finite() || theta <= -PI || theta >= PI {
            return Err(param("theta", format!("{theta} is not in (-pi, pi)")));
        }
        Ok(Self::Floquet { theta })
    }

    /// Parses a kind name and an optional angle, as used by the CLI.
    pub fn parse(kind: &str, theta: Option<f64>) -> Result<Self> {
        let kind = kind.trim().to_ascii_lowercase();
        match (kind.as_str(), theta) {
            ("dirichlet", None) => Ok(Self::Dirichlet),
            ("neumann", None) => Ok(Self::Neumann),
            ("periodic", None) => Ok(Self::Periodic),
            ("floquet", Some(t)) => Self::floquet(t),
            ("floquet", None) => Err(param("theta", "the floquet condition requires an angle")),
            ("dirichlet" | "neumann" | "periodic", Some(_)) => Err(param(
                "theta",
                format!("an angle is only meaningful for floquet, not {kind}"),
            )),
            _ => Err(param("bc", format!("unknown boundary condition `{kind}`"))),
        }
    }

    pub fn theta(&self) -> Option<f64> {
        match self {
            Self::Floquet { theta } => Some(*theta),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Dirichlet => "dirichlet",
            Self::Neumann => "neumann",
            Self::Periodic => "periodic",
            Self::Floquet { .. } => "floquet",
        }
    }
}

impl fmt::Display for BoundaryCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Floquet { theta } => write!(f, "floquet(theta={theta})"),
            other => f.write_str(other.name()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Profile {
    Sine(f64),
    Cosine(f64),
    Constant(f64),
    Exponential(f64),
}

/// One rearranged transverse mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransverseMode {
    /// Rearranged index, starting at 1.
    pub index: usize,
    pub nu: f64,
    /// Index before rearrangement (`n ≥ 1`, `n ≥ 0` or `n ∈ ℤ` depending on the family).
    pub original_label: i64,
    /// `‖g‖²` in `L²([0, 1])`.
    pub norm_sq: f64,
    profile: Profile,
}

impl TransverseMode {
    pub fn value_at(&self, t: f64) -> Complex64 {
        match self.profile {
            Profile::Sine(k) => Complex64::new((k * t).sin(), 0.0),
            Profile::Cosine(k) => Complex64::new((k * t).cos(), 0.0),
            Profile::Constant(c) => Complex64::new(c, 0.0),
            Profile::Exponential(k) => Complex64::from_polar(1.0, k * t),
        }
    }

    /// `|g(t)|²`.
    pub fn weight_at(&self, t: f64) -> f64 {
        self.value_at(t).norm_sqr()
    }
}

/// Transverse basis for one boundary condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransverseBasis {
    bc: BoundaryCondition,
}

/// Upper bound of `|g_n(t)|²` over every family.
pub const MAX_MODE_WEIGHT: f64 = 1.0;

impl TransverseBasis {
    pub fn new(bc: BoundaryCondition) -> Result<Self> {
        if let BoundaryCondition::Floquet { theta } = bc {
            BoundaryCondition::floquet(theta)?;
        }
        Ok(Self { bc })
    }

    pub fn bc(&self) -> BoundaryCondition {
        self.bc
    }

    /// The mode with rearranged index `n ≥ 1`.
    pub fn mode(&self, n: usize) -> TransverseMode {
        assert!(n >= 1, "transverse indices start at 1");
        let half = (n / 2) as i64;
        let (label, k, profile, norm_sq) = match self.bc {
            BoundaryCondition::Dirichlet => {
                let k = n as f64 * PI;
                (n as i64, k, Profile::Sine(k), 0.5)
            }
            BoundaryCondition::Neumann => {
                let m = n as i64 - 1;
                if m == 0 {
                    (0, 0.0, Profile::Constant(0.5), 0.25)
                } else {
                    let k = m as f64 * PI;
                    (m, k, Profile::Cosine(k), 0.5)
                }
            }
            BoundaryCondition::Periodic | BoundaryCondition::Floquet { .. } => {
                let theta = self.bc.theta().unwrap_or(0.0);
                // |2πl + θ| sorted: l = 0, then the smaller of ±1, and so on.
                let label = if n == 1 {
                    0
                } else if n.is_multiple_of(2) == (theta >= 0.0) {
                    -half
                } else {
                    half
                };
                let k = 2.0 * PI * label as f64 + theta;
                (label, k, Profile::Exponential(k), 1.0)
            }
        };
        TransverseMode {
            index: n,
            nu: k * k,
            original_label: label,
            norm_sq,
            profile,
        }
    }

    /// The first `k` modes.
    pub fn modes(&self, k: usize) -> Vec<TransverseMode> {
        (1..=k).map(|n| self.mode(n)).collect()
    }

    /// Number of rearranged indices with `ν_n < nu`.
    pub fn count_below(&self, nu: f64) -> usize {
        let mut n = 0;
        while self.mode(n + 1).nu < nu {
            n += 1;
        }
        n
    }

    /// `(ν_n, |g_n(y0_frac)|²)` for the first `k` modes.
    pub fn transverse_weights(&self, y0_frac: f64, k: usize) -> Vec<(f64, f64)> {
        (1..=k)
            .map(|n| {
                let m = self.mode(n);
                (m.nu, m.weight_at(y0_frac))
            })
            .collect()
    }

    /// Upper bound for `Σ_{n > count} ν_n^{-p}`, `p > 1/2`.
    ///
    /// Every family satisfies `√ν_n ≥ π(n − 1)`, so the tail is dominated by
    /// `π^{-2p} Σ_{m ≥ count} m^{-2p}`.
    pub fn inverse_power_tail(&self, count: usize, p: f64) -> f64 {
        debug_assert!(p > 0.5);
        if count == 0 {
            return f64::INFINITY;
        }
        let m = count as f64;
        let q = 2.0 * p;
        PI.powf(-q) * (m.powf(-q) + m.powf(1.0 - q) / (q - 1.0))
    }

    /// Smallest `ν_n` strictly above `ν_1`, with its index.
    pub fn first_excited(&self) -> (usize, f64) {
        let nu1 = self.mode(1).nu;
        let mut n = 2;
        loop {
            let m = self.mode(n);
            if m.nu > nu1 {
                return (n, m.nu);
            }
            n += 1;
        }
    }

    /// `sup_n ν_n / n²` from the closed form of each family.
    ///
    /// For Neumann, periodic and Floquet the supremum is approached along the
    /// even indices and equals π²; Dirichlet attains it at every index.
    pub fn sup_nu_over_n_sq(&self) -> f64 {
        PI * PI
    }
}
