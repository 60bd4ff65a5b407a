//! Independent checks for the fast evaluators.
//!
//! [`reference_evaluate`] is a loop-for-loop port of the published evaluation
//! routine: a double loop for first-best, and a full price scan per type for
//! each offering sub-mechanism. It skips types with zero mass, clamps negative
//! PMF steps, and never validates its inputs. It is single-threaded and
//! quadratic on purpose.
//!
//! [`monte_carlo_gft`] samples `(s, b)` pairs and plays the mechanisms.
//! Randomness comes from ChaCha8 (`rand_chacha` 0.3) seeded with
//! `seed_from_u64(seed)`; sample `i` belongs to block `i / BLOCK_SAMPLES` and
//! each block uses its own ChaCha stream equal to the block index. Gains are
//! integers, so per-block sums merge exactly and the estimate does not depend
//! on how blocks are spread over threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dist::{derive_pmf_from_cdf, derive_pmf_from_sf, DiscreteDistribution, DistKind, Pmf, MAX_H};
use crate::error::{Error, Result};
use crate::mechanisms::{GftReport, GftSums, PriceTable};

/// Samples drawn per independently seeded block.
pub const BLOCK_SAMPLES: u64 = 1 << 16;

fn mul(a: u128, b: u128) -> Result<u128> {
    a.checked_mul(b).ok_or(Error::Overflow)
}

fn add(a: u128, b: u128) -> Result<u128> {
    a.checked_add(b).ok_or(Error::Overflow)
}

/// Quadratic evaluation mirroring the reference implementation.
pub fn reference_evaluate(cdf_s: &DiscreteDistribution, sf_b: &DiscreteDistribution) -> Result<GftReport> {
    reference_sums(cdf_s, sf_b).map(GftReport::from_sums)
}

pub fn reference_sums(cdf_s: &DiscreteDistribution, sf_b: &DiscreteDistribution) -> Result<GftSums> {
    cdf_s.expect_kind(DistKind::SellerCdf)?;
    sf_b.expect_kind(DistKind::BuyerSf)?;
    let h = cdf_s.h();
    if h > MAX_H {
        return Err(Error::SupportOutOfRange(h));
    }
    if sf_b.h() != h {
        return Err(Error::SupportMismatch { seller: h, buyer: sf_b.h() });
    }
    let cdf = cdf_s.raw();
    let sf = sf_b.raw();
    let pmf_s = derive_pmf_from_cdf(cdf_s);
    let pmf_b = derive_pmf_from_sf(sf_b);
    let pmf_s = pmf_s.mass();
    let pmf_b = pmf_b.mass();

    let mut first_best = 0u128;
    for s_val in 0..=h {
        if pmf_s[s_val] == 0 {
            continue;
        }
        for b_val in s_val..=h {
            if pmf_b[b_val] == 0 {
                continue;
            }
            let gain = (b_val - s_val) as u128;
            first_best = add(first_best, mul(mul(pmf_s[s_val] as u128, pmf_b[b_val] as u128)?, gain)?)?;
        }
    }

    let mut seller_offering = 0u128;
    for s_val in 0..=h {
        if pmf_s[s_val] == 0 {
            continue;
        }
        let mut max_seller_profit = 0u128;
        let mut p_s_opt = s_val;
        for p_offer in s_val..=h {
            let prob_buyer_accepts = sf[p_offer] as u128;
            let current_seller_profit = mul(prob_buyer_accepts, (p_offer - s_val) as u128)?;
            if current_seller_profit >= max_seller_profit {
                max_seller_profit = current_seller_profit;
                p_s_opt = p_offer;
            }
        }
        let mut expected_gft_for_this_s = 0u128;
        for b_val in p_s_opt..=h {
            if pmf_b[b_val] == 0 {
                continue;
            }
            let gain = (b_val - s_val) as u128;
            expected_gft_for_this_s = add(expected_gft_for_this_s, mul(pmf_b[b_val] as u128, gain)?)?;
        }
        seller_offering = add(seller_offering, mul(pmf_s[s_val] as u128, expected_gft_for_this_s)?)?;
    }

    let mut buyer_offering = 0u128;
    for b_val in 0..=h {
        if pmf_b[b_val] == 0 {
            continue;
        }
        let mut max_buyer_profit = 0u128;
        let mut p_b_opt = b_val;
        for p_offer in 0..=b_val {
            let prob_seller_accepts = cdf[p_offer] as u128;
            let current_buyer_profit = mul(prob_seller_accepts, (b_val - p_offer) as u128)?;
            if current_buyer_profit > max_buyer_profit {
                max_buyer_profit = current_buyer_profit;
                p_b_opt = p_offer;
            }
        }
        let mut expected_gft_for_this_b = 0u128;
        for s_val in 0..=p_b_opt {
            if pmf_s[s_val] == 0 {
                continue;
            }
            let gain = (b_val - s_val) as u128;
            expected_gft_for_this_b = add(expected_gft_for_this_b, mul(pmf_s[s_val] as u128, gain)?)?;
        }
        buyer_offering = add(buyer_offering, mul(pmf_b[b_val] as u128, expected_gft_for_this_b)?)?;
    }

    // the random-offerer numerator so + bo is formed (and halved) in GftReport::from_sums
    add(seller_offering, buyer_offering)?;
    mul(first_best, 2)?;
    Ok(GftSums { fb: first_best, so: seller_offering, bo: buyer_offering })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: u64,
    pub seed: u64,
}

impl McEstimate {
    /// Whether `exact` lies within `k` standard errors of the mean.
    pub fn covers(&self, exact: f64, k: f64) -> bool {
        (exact - self.mean).abs() <= k * self.std_error
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McReport {
    pub fb: McEstimate,
    pub so: McEstimate,
    pub bo: McEstimate,
    /// Per-sample average of the SO and BO gains.
    pub ro: McEstimate,
}

/// Exact integer moments of one mechanism's gain.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
struct Moments {
    sum: u128,
    sum_sq: u128,
}

impl Moments {
    fn push(&mut self, gain: u64) {
        self.sum += gain as u128;
        self.sum_sq += gain as u128 * gain as u128;
    }

    fn merge(self, o: Moments) -> Moments {
        Moments { sum: self.sum + o.sum, sum_sq: self.sum_sq + o.sum_sq }
    }

    /// Gains were accumulated multiplied by `unit`.
    fn estimate(self, n: u64, unit: f64, seed: u64) -> McEstimate {
        let nf = n as f64;
        let mean = self.sum as f64 / nf;
        let var = if n > 1 {
            // exact integer numerator of the unbiased sample variance
            let num = n as u128 * self.sum_sq - self.sum * self.sum;
            num as f64 / (nf * (nf - 1.0))
        } else {
            0.0
        };
        McEstimate { mean: mean / unit, std_error: (var / nf).sqrt() / unit, samples: n, seed }
    }
}

#[derive(Clone, Copy, Debug, Default)]
struct BlockMoments {
    fb: Moments,
    so: Moments,
    bo: Moments,
    ro2: Moments,
}

impl BlockMoments {
    fn merge(self, o: BlockMoments) -> BlockMoments {
        BlockMoments {
            fb: self.fb.merge(o.fb),
            so: self.so.merge(o.so),
            bo: self.bo.merge(o.bo),
            ro2: self.ro2.merge(o.ro2),
        }
    }
}

/// Inverse-CDF sampler over a scaled PMF.
struct Sampler {
    cumulative: Vec<u128>,
    total: u128,
}

impl Sampler {
    fn new(pmf: &Pmf) -> Self {
        let mut cumulative = Vec::with_capacity(pmf.mass().len());
        let mut acc = 0u128;
        for &m in pmf.mass() {
            acc += m as u128;
            cumulative.push(acc);
        }
        Sampler { cumulative, total: acc }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> usize {
        let u = rng.gen_range(0..self.total);
        // first index whose cumulative mass exceeds u
        self.cumulative.partition_point(|&c| c <= u)
    }
}

/// Sampled gains for FB, SO and BO under the given price tables.
pub fn monte_carlo_gft(
    cdf_s: &DiscreteDistribution,
    sf_b: &DiscreteDistribution,
    prices_s: &PriceTable,
    prices_b: &PriceTable,
    samples: u64,
    seed: u64,
) -> Result<McReport> {
    cdf_s.expect_kind(DistKind::SellerCdf)?;
    sf_b.expect_kind(DistKind::BuyerSf)?;
    let h = cdf_s.h();
    if sf_b.h() != h || prices_s.h() != h || prices_b.h() != h {
        return Err(Error::SupportMismatch { seller: h, buyer: sf_b.h() });
    }
    if samples == 0 {
        return Err(Error::InvalidConfig("samples must be at least 1".into()));
    }
    let seller = Sampler::new(&cdf_s.pmf());
    let buyer = Sampler::new(&sf_b.pmf());
    if seller.total == 0 || buyer.total == 0 {
        return Err(Error::Invalid(cdf_s.validate().into_iter().chain(sf_b.validate()).collect()));
    }

    let blocks = samples.div_ceil(BLOCK_SAMPLES);
    let moments = (0..blocks)
        .into_par_iter()
        .map(|block| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(block);
            let n = BLOCK_SAMPLES.min(samples - block * BLOCK_SAMPLES);
            let mut acc = BlockMoments::default();
            for _ in 0..n {
                let s = seller.sample(&mut rng);
                let b = buyer.sample(&mut rng);
                let gain = b.saturating_sub(s) as u64;
                let so = if b >= prices_s.get(s) { gain } else { 0 };
                let bo = if s <= prices_b.get(b) { gain } else { 0 };
                acc.fb.push(gain);
                acc.so.push(so);
                acc.bo.push(bo);
                acc.ro2.push(so + bo);
            }
            acc
        })
        .reduce(BlockMoments::default, BlockMoments::merge);

    Ok(McReport {
        fb: moments.fb.estimate(samples, 1.0, seed),
        so: moments.so.estimate(samples, 1.0, seed),
        bo: moments.bo.estimate(samples, 1.0, seed),
        ro: moments.ro2.estimate(samples, 2.0, seed),
    })
}
