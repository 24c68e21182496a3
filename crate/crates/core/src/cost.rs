//! Query pricing: regularly-varying cost functions `cost_k(x) = x^alpha * sigma(x)`.

use crate::error::{CoreError, Result};
use serde::{Deserialize, Serialize};

/// Named slowly-varying multipliers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum SlowFactor {
    /// sigma(x) = 1.
    Identity,
    /// sigma(x) = max(1, log2 x)^beta.
    LogPow { beta: f64 },
    /// sigma(x) = exp(sign * (ln x)^gamma), gamma < 1.
    ExpLog { negate: bool, gamma: f64 },
}

impl SlowFactor {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            SlowFactor::Identity => 1.0,
            SlowFactor::LogPow { beta } => x.log2().max(1.0).powf(beta),
            SlowFactor::ExpLog { negate, gamma } => {
                let l = x.ln().max(0.0).powf(gamma);
                if negate {
                    (-l).exp()
                } else {
                    l.exp()
                }
            }
        }
    }
}

/// A single query charge. `exact` is populated when the model prices queries
/// in integers (integer alpha, identity sigma).
#[derive(Clone, Copy, Debug)]
pub struct Charge {
    pub value: f64,
    pub exact: Option<u128>,
}

/// The per-query price `cost_k(x) = x^alpha * sigma(x)`, with `cost_k(0) = 0`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CostModel {
    alpha: f64,
    slow: SlowFactor,
}

impl CostModel {
    pub fn new(alpha: f64, slow: SlowFactor) -> Result<Self> {
        if !(alpha >= 0.0) || !alpha.is_finite() {
            return Err(CoreError::pre(format!("cost index alpha = {alpha} must be finite and >= 0")));
        }
        if let SlowFactor::ExpLog { gamma, .. } = slow {
            if !(0.0..1.0).contains(&gamma) {
                return Err(CoreError::pre(format!("ExpLog gamma = {gamma} must lie in [0, 1)")));
            }
        }
        Ok(CostModel { alpha, slow })
    }

    /// Unit-cost model (alpha = 0): total cost equals the query count.
    pub fn unit() -> Self {
        CostModel { alpha: 0.0, slow: SlowFactor::Identity }
    }

    /// Pure power model `x^alpha`.
    pub fn power(alpha: f64) -> Result<Self> {
        CostModel::new(alpha, SlowFactor::Identity)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn slow(&self) -> &SlowFactor {
        &self.slow
    }

    /// Integer alpha with identity sigma prices queries exactly.
    pub fn is_exact(&self) -> bool {
        self.slow == SlowFactor::Identity && self.alpha.fract() == 0.0 && self.alpha <= 40.0
    }

    pub fn charge(&self, size: u64) -> Charge {
        if size == 0 {
            return Charge { value: 0.0, exact: Some(0) };
        }
        let x = size as f64;
        let value = x.powf(self.alpha) * self.slow.eval(x);
        let exact = if self.is_exact() {
            (size as u128).checked_pow(self.alpha as u32)
        } else {
            None
        };
        Charge { value, exact }
    }

    /// Checks the Def-2.1-style sanity conditions on the range the session
    /// will evaluate: cost(0) = 0, cost(x) > 0, cost(x) <= x^k, and
    /// monotonicity when alpha > 0.
    pub fn validate_for(&self, k: usize, n: u64) -> Result<()> {
        if self.alpha > k as f64 {
            return Err(CoreError::pre(format!(
                "alpha = {} exceeds k = {k}",
                self.alpha
            )));
        }
        let step = (n / 4096).max(1);
        let mut prev = 0.0f64;
        let mut x = 1u64;
        while x <= n {
            let c = self.charge(x).value;
            if !(c > 0.0) {
                return Err(CoreError::pre(format!("cost({x}) = {c} is not positive")));
            }
            let bound = (x as f64).powi(k as i32);
            if c > bound * (1.0 + 1e-9) {
                return Err(CoreError::pre(format!("cost({x}) = {c} exceeds x^k = {bound}")));
            }
            if self.alpha > 0.0 && c < prev * (1.0 - 1e-9) {
                return Err(CoreError::pre(format!(
                    "cost not monotone at x = {x} (alpha > 0)"
                )));
            }
            prev = c;
            x = if x == n { n + 1 } else { (x + step).min(n) };
        }
        Ok(())
    }
}

/// Compensated (Kahan) accumulator for inexact charge totals.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let y = x - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum
    }
}
