//! Radial kernels of the heat semigroup and its stable and wave subordinates.

mod heat;
mod subordinate;
mod table;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::QuadratureSpec;

pub use heat::{heat_kernel, heat_kernel_z, heat_row, HeatRow};
pub use subordinate::{
    stable_kernel, stable_row, subordinate_row, wave_kernel, wave_profile, wave_row,
};
pub use table::{tabulate, tail_bound, KernelCache, RadialKernel};

pub(crate) use subordinate::heat_peak_reach;

/// Which semigroup a radial kernel belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum KernelFamily {
    /// `W_t = e^{-tℒ}`.
    Heat,
    /// `P_t^α = e^{-tℒ^{α/2}}`.
    Stable { alpha: f64 },
    /// `T_t^ν`.
    Wave { nu: f64 },
}

impl KernelFamily {
    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelFamily::Heat => Ok(()),
            KernelFamily::Stable { alpha } if alpha > 0.0 && alpha < 2.0 => Ok(()),
            KernelFamily::Stable { alpha } => {
                Err(Error::domain(format!("alpha must lie in (0, 2), got {alpha}")))
            }
            KernelFamily::Wave { nu } if nu > 0.0 && nu.is_finite() => Ok(()),
            KernelFamily::Wave { nu } => Err(Error::domain(format!("nu must be > 0, got {nu}"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            KernelFamily::Heat => "heat",
            KernelFamily::Stable { .. } => "stable",
            KernelFamily::Wave { .. } => "wave",
        }
    }

    /// `alpha=..` / `nu=..`, empty for the heat family.
    pub fn params(&self) -> String {
        match self {
            KernelFamily::Heat => String::new(),
            KernelFamily::Stable { alpha } => format!("alpha={alpha}"),
            KernelFamily::Wave { nu } => format!("nu={nu}"),
        }
    }

    /// Power `γ` with `|S_k| K_t(k) ≍ k^{-γ}` as `k → ∞`; `None` for the heat
    /// kernel, whose sphere masses decay faster than any geometric sequence.
    pub fn tail_exponent(&self, q: u32) -> Option<f64> {
        match *self {
            KernelFamily::Heat => None,
            KernelFamily::Stable { alpha } if q == 1 => Some(1.0 + alpha),
            KernelFamily::Stable { alpha } => Some(1.0 + 0.5 * alpha),
            KernelFamily::Wave { nu } if q == 1 => Some(1.0 + 2.0 * nu),
            KernelFamily::Wave { nu } => Some(1.0 + nu),
        }
    }

    pub(crate) fn key(&self) -> (u8, u64) {
        match *self {
            KernelFamily::Heat => (0, 0),
            KernelFamily::Stable { alpha } => (1, alpha.to_bits()),
            KernelFamily::Wave { nu } => (2, nu.to_bits()),
        }
    }
}

impl fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelFamily::Heat => write!(f, "heat"),
            KernelFamily::Stable { alpha } => write!(f, "stable(alpha={alpha})"),
            KernelFamily::Wave { nu } => write!(f, "wave(nu={nu})"),
        }
    }
}

/// `K_t(0..=kmax)` for any family.
pub fn kernel_row(
    q: u32,
    family: KernelFamily,
    t: f64,
    kmax: usize,
    spec: &QuadratureSpec,
) -> Result<Vec<f64>> {
    family.validate()?;
    match family {
        KernelFamily::Heat => heat_row(q, t, kmax),
        KernelFamily::Stable { alpha } => stable_row(q, alpha, t, kmax, spec),
        KernelFamily::Wave { nu } => wave_row(q, nu, t, kmax, spec),
    }
}

/// The comparison kernel on ℤ: `1` at `k = 0` and `t |k|^{-1-α}` elsewhere.
pub fn comparator_z(alpha: f64, t: f64, k: i64) -> f64 {
    if k == 0 {
        1.0
    } else {
        t * (k.unsigned_abs() as f64).powf(-1.0 - alpha)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comparator_examples() {
        assert_eq!(comparator_z(1.0, 0.5, 0), 1.0);
        assert!((comparator_z(1.0, 0.5, 2) - 0.125).abs() < 1e-16);
        assert!((comparator_z(0.8, 0.25, -3) - 0.25 * 3f64.powf(-1.8)).abs() < 1e-16);
    }

    #[test]
    fn family_validation() {
        assert!(KernelFamily::Stable { alpha: 0.0 }.validate().is_err());
        assert!(KernelFamily::Wave { nu: -1.0 }.validate().is_err());
        assert!(KernelFamily::Heat.validate().is_ok());
        let json = serde_json::to_string(&KernelFamily::Stable { alpha: 1.5 }).unwrap();
        assert_eq!(json, r#"{"family":"stable","alpha":1.5}"#);
    }
}
