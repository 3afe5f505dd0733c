use alloc::vec;


#[allow(unused_imports)]
use num_traits::Float;

use crate::engine::{Flow, LocalCharacteristics};
use crate::error::{PdmpError, Result};

/// TCP window-size process on `[0, ∞)`: unit drift, halving at jumps.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TcpModel {
    /// Jump rate `λ(x) = x`.
    LinearRate,
    /// Jump rate `λ(x) = r`.
    ConstantRate { r: f64 },
}

impl TcpModel {
    pub fn constant(r: f64) -> Result<Self> {
        if r > 0.0 && r.is_finite() {
            Ok(TcpModel::ConstantRate { r })
        } else {
            Err(PdmpError::invalid("constant jump rate must be positive"))
        }
    }

    pub fn characteristics(&self) -> Result<LocalCharacteristics> {
        tcp_characteristics(*self)
    }
}

/// `φ(x, t) = x + t`, `Q(x, ·) = δ_{x/2}`, `t* ≡ ∞`, with the hazard and its
/// inverse registered in closed form.
pub fn tcp_characteristics(model: TcpModel) -> Result<LocalCharacteristics> {
    let flow = || Flow::closed(|x, t| vec![x[0] + t]);
    let halve = |x: &[f64]| vec![x[0] / 2.0];
    let chars = match model {
        TcpModel::LinearRate => {
            LocalCharacteristics::with_deterministic_jump(1, flow(), |x| x[0], halve)
                .hazard(|x, t| x[0] * t + 0.5 * t * t)
                // positive root of t²/2 + x t = e, written without cancellation
                .hazard_inverse(|x, e| 2.0 * e / (x[0] + (x[0] * x[0] + 2.0 * e).sqrt()))
        }
        TcpModel::ConstantRate { r } => {
            if !(r > 0.0 && r.is_finite()) {
                return Err(PdmpError::invalid("constant jump rate must be positive"));
            }
            LocalCharacteristics::with_deterministic_jump(1, flow(), move |_| r, halve)
                .hazard(move |_, t| r * t)
                .hazard_inverse(move |_, e| e / r)
        }
    };
    Ok(chars.state_guard(|x| x[0] >= 0.0))
}

/// Density of the first jump time from `x` for the linear-rate model,
/// `f(x, t) = (x + t) exp(−(x t + t²/2))`.
pub fn tcp_true_density(x: f64, t: f64) -> Result<f64> {
    if !(x >= 0.0 && t >= 0.0) {
        return Err(PdmpError::invalid("density arguments must be non-negative"));
    }
    Ok((x + t) * (-(x * t + 0.5 * t * t)).exp())
}

/// Constants `(c, λ)` of the Wasserstein contraction rate for TCP:
/// `c = √2 (3 + √3) / 8` and `λ = √2 (1 − √c)`.
pub fn theoretical_rates() -> (f64, f64) {
    let sqrt2 = core::f64::consts::SQRT_2;
    let c = sqrt2 * (3.0 + 3f64.sqrt()) / 8.0;
    let lambda = sqrt2 * (1.0 - c.sqrt());
    (c, lambda)
}

/// Lower bound `exp(−t²/2 − min(x, y) t)` on the total-variation distance
/// between the laws at time `t` of TCP paths started at `x` and `y`.
pub fn tv_lower_bound(x: f64, y: f64, t: f64) -> Result<f64> {
    if !(x >= 0.0 && y >= 0.0 && t >= 0.0) {
        return Err(PdmpError::invalid("arguments must be non-negative"));
    }
    Ok((-0.5 * t * t - x.min(y) * t).exp())
}
