//! Distribution constructors: the discrete equal-revenue buyer, the uniform
//! seller, point masses, and the sinusoidally modulated power-law mixture.
//!
//! Real-valued tables are evaluated in binary64 and rounded once at the end.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dist::{DiscreteDistribution, DistKind, ScaleRounding, ScaledProb, MAX_H};
use crate::error::{Error, Result};

/// Lower bound applied to the modulated exponent.
pub const EXPONENT_FLOOR: f64 = 1e-9;

/// SHA-256 of the canonical text file for the worst-case seller at H = 20000.
pub const WORST_CASE_SELLER_TABLE_SHA256: &str = "fafd1eb18493edb76cec5362ec8755a6819adacf4179ab0cfafcb7df8308a619";

/// SHA-256 of the canonical text file for the equal-revenue buyer at H = 20000.
pub const EQUAL_REVENUE_20000_SHA256: &str = "b0bb4f93c2382baf92c1d8495b9c340f3ae5b7d32f6ee6ef708a5ac92ebe6ad6";

/// Parameters of `F(m) = w * z^a_eff(z) + (1 - w) * z^a2` with
/// `z = (m + 1) / (H + 1)` and `a_eff(z) = a1_base + a1_amp * sin(a1_freq * pi * z)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SellerFamilyParams {
    pub w: f64,
    pub a1_base: f64,
    pub a1_amp: f64,
    pub a1_freq: f64,
    pub a2: f64,
    #[serde(rename = "H")]
    pub h: usize,
}

impl SellerFamilyParams {
    /// The worst-case instance: w = 0.2, a_eff = 0.15 + 0.05 sin(2 pi z), a2 = 4, H = 20000.
    pub const WORST_CASE: SellerFamilyParams =
        SellerFamilyParams { w: 0.20, a1_base: 0.15, a1_amp: 0.05, a1_freq: 2.0, a2: 4.0, h: 20_000 };

    pub fn with_h(self, h: usize) -> Self {
        SellerFamilyParams { h, ..self }
    }

    pub fn as_array(&self) -> [f64; 5] {
        [self.w, self.a1_base, self.a1_amp, self.a1_freq, self.a2]
    }

    pub fn from_array(x: [f64; 5], h: usize) -> Self {
        SellerFamilyParams { w: x[0], a1_base: x[1], a1_amp: x[2], a1_freq: x[3], a2: x[4], h }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        if self.as_array().iter().any(|v| !v.is_finite()) {
            return bad(format!("non-finite parameter in {self:?}"));
        }
        if !(0.0..=1.0).contains(&self.w) {
            return bad(format!("w = {} not in [0, 1]", self.w));
        }
        if self.a1_base <= 0.0 {
            return bad(format!("a1_base = {} must be positive", self.a1_base));
        }
        if self.a1_amp < 0.0 {
            return bad(format!("a1_amp = {} must be non-negative", self.a1_amp));
        }
        if self.a1_freq < 0.0 {
            return bad(format!("a1_freq = {} must be non-negative", self.a1_freq));
        }
        if self.a2 <= 0.0 {
            return bad(format!("a2 = {} must be positive", self.a2));
        }
        if self.a1_base - self.a1_amp < EXPONENT_FLOOR {
            return bad(format!(
                "a1_base - a1_amp = {} is below the exponent floor {EXPONENT_FLOOR}",
                self.a1_base - self.a1_amp
            ));
        }
        check_h(self.h)
    }
}

fn check_h(h: usize) -> Result<()> {
    if (1..=MAX_H).contains(&h) {
        Ok(())
    } else {
        Err(Error::SupportOutOfRange(h))
    }
}

/// `Pr[b >= m] = 1/m` for `m >= 1`, and `Pr[b >= 0] = 1`.
pub fn equal_revenue_buyer(h: usize) -> Result<DiscreteDistribution> {
    check_h(h)?;
    let real: Vec<f64> = (0..=h).map(|m| if m == 0 { 1.0 } else { 1.0 / m as f64 }).collect();
    DiscreteDistribution::round_to_scaled(&real, DistKind::BuyerSf, h)
}

/// `Pr[s <= m] = (m + 1) / (H + 1)`.
pub fn uniform_seller(h: usize) -> Result<DiscreteDistribution> {
    check_h(h)?;
    let real: Vec<f64> = (0..=h).map(|m| (m + 1) as f64 / (h + 1) as f64).collect();
    DiscreteDistribution::round_to_scaled(&real, DistKind::SellerCdf, h)
}

pub fn point_mass(v: usize, kind: DistKind, h: usize) -> Result<DiscreteDistribution> {
    check_h(h)?;
    if v > h {
        return Err(Error::PointOutOfDomain { value: v, h });
    }
    let table = (0..=h)
        .map(|m| {
            let hit = match kind {
                DistKind::SellerCdf => m >= v,
                DistKind::BuyerSf => m <= v,
            };
            if hit {
                ScaledProb::ONE
            } else {
                ScaledProb::ZERO
            }
        })
        .collect();
    DiscreteDistribution::new(kind, table)
}

/// Unrounded CDF values of the modulated power-law mixture, in the exact
/// operation order of the discovered generator.
pub fn modulated_power_mixture_real(p: &SellerFamilyParams) -> Result<Vec<f64>> {
    p.validate()?;
    let norm_factor = p.h as f64 + 1.0;
    let mut prev = 0.0f64;
    let mut out = Vec::with_capacity(p.h + 1);
    for m in 0..=p.h {
        let base = ((m as f64 + 1.0) / norm_factor).min(1.0).max(0.0);
        let a1_eff = p.a1_base + p.a1_amp * (p.a1_freq * std::f64::consts::PI * base).sin();
        let a1_eff = a1_eff.max(EXPONENT_FLOOR);
        let cdf1 = base.powf(a1_eff);
        let cdf2 = base.powf(p.a2);
        let mut current = p.w * cdf1 + (1.0 - p.w) * cdf2;
        current = current.min(1.0).max(0.0);
        current = current.max(prev);
        out.push(current);
        prev = current;
    }
    Ok(out)
}

pub fn modulated_power_mixture_seller(p: &SellerFamilyParams) -> Result<DiscreteDistribution> {
    modulated_power_mixture_seller_with(p, ScaleRounding::Binary64)
}

pub fn modulated_power_mixture_seller_with(
    p: &SellerFamilyParams,
    rounding: ScaleRounding,
) -> Result<DiscreteDistribution> {
    let real = modulated_power_mixture_real(p)?;
    DiscreteDistribution::round_to_scaled_with(&real, DistKind::SellerCdf, p.h, rounding)
}

/// Hex SHA-256 of the canonical text file of `d`.
pub fn table_sha256(d: &DiscreteDistribution) -> String {
    hex::encode(Sha256::digest(d.to_text().as_bytes()))
}
