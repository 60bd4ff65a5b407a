//! The worst-case instance and its published four-decimal values.

use crate::dist::DiscreteDistribution;
use crate::error::Result;
use crate::generators::{equal_revenue_buyer, modulated_power_mixture_seller, SellerFamilyParams};
use crate::mechanisms::GftReport;
use crate::rational::ExactRational;

/// Published values in units of 1e-4.
pub const PUBLISHED: [(&str, i64); 5] = [("fb", 12322), ("so", 3312), ("bo", 8565), ("ro", 5939), ("ratio", 20749)];

/// Published `fb / max(so, bo)` in units of 1e-4.
pub const PUBLISHED_FB_OVER_BEST_OFFERER: i64 = 14387;

/// Allowed absolute gap to a four-decimal published value: 5e-5.
pub fn tolerance() -> ExactRational {
    ExactRational::from_decimal(5, 5)
}

/// Mixture seller at the discovered parameters and the equal-revenue buyer, H = 20000.
pub fn worst_case_instance() -> Result<(DiscreteDistribution, DiscreteDistribution)> {
    let p = SellerFamilyParams::WORST_CASE;
    Ok((modulated_power_mixture_seller(&p)?, equal_revenue_buyer(p.h)?))
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuantityCheck {
    pub name: &'static str,
    pub computed: Option<ExactRational>,
    pub published: ExactRational,
    pub abs_diff: Option<ExactRational>,
    pub pass: bool,
}

pub fn check_quantity(name: &'static str, computed: Option<&ExactRational>, published_e4: i64) -> QuantityCheck {
    let published = ExactRational::from_decimal(published_e4, 4);
    let abs_diff = computed.map(|c| c.abs_diff(&published));
    let pass = abs_diff.as_ref().is_some_and(|d| *d <= tolerance());
    QuantityCheck { name, computed: computed.cloned(), published, abs_diff, pass }
}

/// One check per published quantity, in report order.
pub fn compare_with_published(report: &GftReport) -> Vec<QuantityCheck> {
    let values = [Some(&report.fb), Some(&report.so), Some(&report.bo), Some(&report.ro), report.ratio.as_ref()];
    PUBLISHED.iter().zip(values).map(|(&(name, e4), v)| check_quantity(name, v, e4)).collect()
}

pub fn check_fb_over_best_offerer(report: &GftReport) -> QuantityCheck {
    check_quantity("fb_over_max_offerer", report.fb_over_best_offerer().as_ref(), PUBLISHED_FB_OVER_BEST_OFFERER)
}
