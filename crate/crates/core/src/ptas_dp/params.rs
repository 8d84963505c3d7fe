use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::{One, ToPrimitive};
use serde::{Serialize, Serializer};

use crate::budget::Budgets;
use crate::error::{Error, Result};
use crate::model::Instance;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum XStrategy {
    /// Every subset of `[L, k]` of the configured size.
    Exhaustive,
    /// Demands observed in a tour-partitioning warm start.
    FromHeuristic,
    /// `⌈L·(1+ε)^t⌉` for `t = 0, 1, ...` together with `k`.
    GeometricGrid,
}

impl std::str::FromStr for XStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exhaustive" => Ok(Self::Exhaustive),
            "from_heuristic" | "heuristic" => Ok(Self::FromHeuristic),
            "geometric_grid" | "grid" => Ok(Self::GeometricGrid),
            other => Err(Error::Parse(format!("unknown x strategy {other:?}"))),
        }
    }
}

fn ser_ratio<S: Serializer>(r: &Ratio<u64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&crate::model::format_rational(*r.numer() as u128, *r.denom() as u128))
}

/// Knobs of the approximation scheme. All caps are independent of each other;
/// [`PtasParams::from_epsilon`] fills them with the theoretical values.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PtasParams {
    #[serde(serialize_with = "ser_ratio")]
    pub epsilon: Ratio<u64>,
    pub gamma_k: u64,
    /// Floor `L` for subtour demand at component roots.
    pub min_subtour_demand: u32,
    /// Cap `M` on subtours per local configuration.
    pub max_tours_per_component: usize,
    pub x_set_size: usize,
    pub sum_list_cap: usize,
    pub x_strategy: XStrategy,
    /// Distance class width in units; `None` uses `α·ε·D_min`.
    pub d_tilde: Option<u64>,
    pub budgets: Budgets,
}

/// The theoretical constants for `ε = 1/inv`, as exact integers where they
/// fit and saturated otherwise.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TheoryConstants {
    pub inv_eps: u64,
    /// `Γ = 12/ε`.
    pub gamma: u64,
    /// `1/α = (1/ε)^(1/ε+1)`.
    pub inv_alpha: String,
    /// `1/β = 4·(1/ε)^(4/ε+1)`.
    pub inv_beta: String,
    /// `H_ε = (1/ε)^(2/ε+1)`.
    pub h_eps: String,
    pub min_subtour_demand: u32,
    pub max_tours_per_component: usize,
    pub x_set_size: usize,
    pub sum_list_cap: usize,
}

const SHOW_BITS: u64 = 256;

fn show(x: &BigUint) -> String {
    if x.bits() <= SHOW_BITS {
        x.to_string()
    } else {
        format!("~2^{}", x.bits())
    }
}

fn saturate(x: &BigUint) -> usize {
    x.to_usize().unwrap_or(usize::MAX)
}

/// `base^exp`, or `None` once it exceeds `limit_bits`.
fn pow_limited(base: u64, exp: u64, limit_bits: u64) -> Option<BigUint> {
    let bits_per = 64 - base.leading_zeros() as u64;
    if exp.saturating_mul(bits_per.saturating_sub(1)) > limit_bits {
        return None;
    }
    Some(BigUint::from(base).pow(exp as u32))
}

/// `1/ε` when it is an integer.
pub fn inverse_epsilon(epsilon: Ratio<u64>) -> Result<u64> {
    if *epsilon.numer() == 0 || epsilon > Ratio::one() || !epsilon.recip().is_integer() {
        return Err(Error::Validation(format!(
            "epsilon must be 1/m for an integer m >= 1, got {}/{}",
            epsilon.numer(),
            epsilon.denom()
        )));
    }
    Ok(epsilon.recip().to_integer())
}

pub fn theory_constants(epsilon: Ratio<u64>, k: u32) -> Result<TheoryConstants> {
    let inv = inverse_epsilon(epsilon)?;
    let inv_alpha = pow_limited(inv, inv + 1, 4096);
    let inv_beta = pow_limited(inv, 4 * inv + 1, 4096).map(|p| p * 4u32);
    let h_eps = pow_limited(inv, 2 * inv + 1, 4096);
    let gamma = 12 * inv;
    // L = ⌈α·k⌉
    let min_subtour_demand = match &inv_alpha {
        Some(a) => {
            let k = BigUint::from(k);
            let l = (&k + a - 1u32) / a;
            l.to_u32().unwrap_or(k.to_u32().unwrap()).max(1)
        }
        None => 1,
    };
    // M = 2Γ/α + 1
    let max_tours = inv_alpha.as_ref().map_or(usize::MAX, |a| saturate(&(a * (2 * gamma) + 1u32)));
    let x_set_size = inv_beta.as_ref().map_or(usize::MAX, saturate);
    // (1/β)^(1/α): only representable for the smallest ε
    let sum_list_cap = match (&inv_beta, inv_alpha.as_ref().and_then(|a| a.to_u64())) {
        (Some(b), Some(e)) if b.bits().saturating_mul(e) <= 63 => saturate(&b.pow(e as u32)),
        _ => usize::MAX,
    };
    let fmt = |x: &Option<BigUint>| x.as_ref().map_or_else(|| "saturated".to_string(), show);
    Ok(TheoryConstants {
        inv_eps: inv,
        gamma,
        inv_alpha: fmt(&inv_alpha),
        inv_beta: fmt(&inv_beta),
        h_eps: fmt(&h_eps),
        min_subtour_demand: min_subtour_demand.min(k),
        max_tours_per_component: max_tours,
        x_set_size,
        sum_list_cap,
    })
}

impl PtasParams {
    /// Theoretical parameters for `ε = 1/m` and capacity `k`.
    pub fn from_epsilon(epsilon: Ratio<u64>, k: u32) -> Result<Self> {
        let c = theory_constants(epsilon, k)?;
        Ok(Self {
            epsilon,
            gamma_k: c.gamma.saturating_mul(k as u64),
            min_subtour_demand: c.min_subtour_demand,
            max_tours_per_component: c.max_tours_per_component,
            x_set_size: c.x_set_size,
            sum_list_cap: c.sum_list_cap,
            x_strategy: XStrategy::Exhaustive,
            d_tilde: None,
            budgets: Budgets::default(),
        })
    }

    /// Caps that never bind on `instance`: the DP becomes an exact search.
    pub fn exhaustive(instance: &Instance, gamma_k: u64) -> Self {
        let n = instance.total_demand().max(1) as usize;
        Self {
            epsilon: Ratio::new(1, 2),
            gamma_k,
            min_subtour_demand: 1,
            max_tours_per_component: n,
            x_set_size: instance.capacity() as usize,
            sum_list_cap: n,
            x_strategy: XStrategy::Exhaustive,
            d_tilde: Some(1),
            budgets: Budgets::default(),
        }
    }

    pub fn validate(&self, k: u32) -> Result<()> {
        if self.min_subtour_demand == 0 || self.min_subtour_demand > k {
            return Err(Error::Validation(format!("L must lie in [1, {k}], got {}", self.min_subtour_demand)));
        }
        if self.max_tours_per_component == 0 || self.x_set_size == 0 || self.sum_list_cap == 0 {
            return Err(Error::Validation("M, x_set_size and sum_list_cap must be at least 1".into()));
        }
        if self.d_tilde == Some(0) {
            return Err(Error::Validation("d_tilde must be positive".into()));
        }
        if self.gamma_k < 2 {
            return Err(Error::Validation("gamma_k must be at least 2".into()));
        }
        Ok(())
    }

    /// Applies `key=value` overrides: `L`, `M`, `xsize`, `sumcap`,
    /// `xstrategy`, `gammak`, `dtilde`.
    pub fn with_overrides(mut self, spec: &str) -> Result<Self> {
        for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) =
                part.split_once('=').ok_or_else(|| Error::Parse(format!("override {part:?} is not key=value")))?;
            let value = value.trim();
            let num =
                || value.parse::<u64>().map_err(|_| Error::Parse(format!("override {key}: bad number {value:?}")));
            match key.trim() {
                "L" => self.min_subtour_demand = num()? as u32,
                "M" => self.max_tours_per_component = num()? as usize,
                "xsize" => self.x_set_size = num()? as usize,
                "sumcap" => self.sum_list_cap = num()? as usize,
                "xstrategy" => self.x_strategy = value.parse()?,
                "gammak" => self.gamma_k = num()?,
                "dtilde" => self.d_tilde = Some(num()?),
                other => return Err(Error::Parse(format!("unknown override {other:?}"))),
            }
        }
        Ok(self)
    }

    /// Whether the run carries the `(1+4ε)` guarantee: exhaustive X sets, the
    /// theoretical `Γk` and `D̃`, and caps no tighter than the theory asks.
    pub fn theory_guarantee(&self, k: u32) -> bool {
        let Ok(c) = theory_constants(self.epsilon, k) else {
            return false;
        };
        self.x_strategy == XStrategy::Exhaustive
            && self.d_tilde.is_none()
            && self.gamma_k == c.gamma.saturating_mul(k as u64)
            && self.min_subtour_demand <= c.min_subtour_demand
            && self.max_tours_per_component >= c.max_tours_per_component
            && self.x_set_size >= c.x_set_size
            && self.sum_list_cap >= c.sum_list_cap
    }
}

/// `⌊α·ε·D_min⌋` in units, at least one unit.
pub fn theory_d_tilde(instance: &Instance, epsilon: Ratio<u64>) -> Result<u64> {
    let inv = inverse_epsilon(epsilon)?;
    let d_min = crate::model::distances(instance)?.d_min;
    let value = match pow_limited(inv, inv + 2, 128) {
        Some(den) => (BigUint::from(d_min) / den).to_u64().unwrap_or(0),
        None => 0,
    };
    Ok(value.max(1))
}
