//! Exact gains from trade for first-best, seller-offering, buyer-offering and
//! random-offerer mechanisms.
//!
//! All sums are taken in scaled units: a GFT numerator is
//! `sum pmf_s[s] * pmf_b[b] * (b - s)` over the trading pairs, and the value in
//! valuation units is that numerator over `SCALE^2`.
//!
//! Optimal posted prices follow the tie rules of the reference evaluator: the
//! seller keeps the last (highest) maximizer of `(p - s) * SF(p)` over
//! `p in s..=H`; the buyer keeps the first (lowest) strict improvement of
//! `(b - p) * CDF(p)` over `p in 0..=b`, starting from profit zero at price `b`.
//!
//! Both objectives have increasing differences in (price, type) and the
//! feasible ranges grow with the type, so the highest seller maximizer and the
//! lowest buyer maximizer are non-decreasing in the type. The default price
//! search exploits this with a divide-and-conquer sweep; the quadratic scan is
//! kept as [`PriceSearch::Exhaustive`].

use rayon::prelude::*;

use crate::dist::{DiscreteDistribution, DistKind, Pmf, SCALE};
use crate::error::{Error, Result};
use crate::rational::ExactRational;

/// Optimal posted price per type of the offering party.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PriceTable {
    prices: Vec<usize>,
}

impl PriceTable {
    pub fn new(prices: Vec<usize>) -> Self {
        PriceTable { prices }
    }

    pub fn prices(&self) -> &[usize] {
        &self.prices
    }

    #[inline]
    pub fn get(&self, t: usize) -> usize {
        self.prices[t]
    }

    pub fn h(&self) -> usize {
        self.prices.len() - 1
    }

    pub fn is_non_decreasing(&self) -> bool {
        self.prices.windows(2).all(|w| w[0] <= w[1])
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PriceSearch {
    /// Monotone divide and conquer, `O(H log H)`. Requires valid distributions.
    #[default]
    Monotone,
    /// Full scan of every candidate price for every type, `O(H^2)`.
    Exhaustive,
}

/// GFT numerators in units of `1 / SCALE^2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GftSums {
    pub fb: u128,
    pub so: u128,
    pub bo: u128,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GftReport {
    pub fb: ExactRational,
    pub so: ExactRational,
    pub bo: ExactRational,
    pub ro: ExactRational,
    /// `fb / ro`; `None` when `ro` is zero.
    pub ratio: Option<ExactRational>,
}

impl GftReport {
    pub fn from_sums(sums: GftSums) -> Self {
        let s2 = scale_squared();
        let ro_numer = sums.so + sums.bo;
        GftReport {
            fb: ExactRational::from_u128(sums.fb, s2),
            so: ExactRational::from_u128(sums.so, s2),
            bo: ExactRational::from_u128(sums.bo, s2),
            ro: ExactRational::from_u128(ro_numer, 2 * s2),
            ratio: (ro_numer != 0).then(|| ExactRational::from_u128(2 * sums.fb, ro_numer)),
        }
    }

    /// `fb / max(so, bo)`, the gap to the better of the two sub-mechanisms.
    pub fn fb_over_best_offerer(&self) -> Option<ExactRational> {
        let best = std::cmp::max(&self.so, &self.bo);
        self.fb.checked_div(best)
    }
}

/// Report plus the price tables that produced it.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub sums: GftSums,
    pub report: GftReport,
    pub seller_prices: PriceTable,
    pub buyer_prices: PriceTable,
}

#[inline]
pub(crate) fn scale_squared() -> u128 {
    SCALE as u128 * SCALE as u128
}

fn check_same_support(a: usize, b: usize) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::SupportMismatch { seller: a, buyer: b })
    }
}

fn checked_mul(a: u128, b: u128) -> Result<u128> {
    a.checked_mul(b).ok_or(Error::Overflow)
}

fn checked_add(a: u128, b: u128) -> Result<u128> {
    a.checked_add(b).ok_or(Error::Overflow)
}

/// `sums[k] = sum_{m >= k} mass[m]` and `weighted[k] = sum_{m >= k} mass[m] * m`.
fn suffix_tables(pmf: &Pmf) -> Result<(Vec<u128>, Vec<u128>)> {
    let n = pmf.mass().len();
    let mut sums = vec![0u128; n + 1];
    let mut weighted = vec![0u128; n + 1];
    for m in (0..n).rev() {
        let x = pmf.at(m) as u128;
        sums[m] = checked_add(sums[m + 1], x)?;
        weighted[m] = checked_add(weighted[m + 1], checked_mul(x, m as u128)?)?;
    }
    Ok((sums, weighted))
}

/// `sums[k] = sum_{m < k} mass[m]` and `weighted[k] = sum_{m < k} mass[m] * m`.
fn prefix_tables(pmf: &Pmf) -> Result<(Vec<u128>, Vec<u128>)> {
    let n = pmf.mass().len();
    let mut sums = vec![0u128; n + 1];
    let mut weighted = vec![0u128; n + 1];
    for m in 0..n {
        let x = pmf.at(m) as u128;
        sums[m + 1] = checked_add(sums[m], x)?;
        weighted[m + 1] = checked_add(weighted[m], checked_mul(x, m as u128)?)?;
    }
    Ok((sums, weighted))
}

/// `sum_{b >= from} pmf_b[b] * (b - s)` for `from >= s`.
#[inline]
fn buyer_surplus_above(sums: &[u128], weighted: &[u128], from: usize, s: usize) -> Result<u128> {
    debug_assert!(from >= s);
    let sub = checked_mul(s as u128, sums[from])?;
    weighted[from].checked_sub(sub).ok_or(Error::Overflow)
}

/// `sum_{s <= upto} pmf_s[s] * (b - s)` for `upto <= b`.
#[inline]
fn seller_surplus_below(sums: &[u128], weighted: &[u128], upto: usize, b: usize) -> Result<u128> {
    debug_assert!(upto <= b);
    let total = checked_mul(b as u128, sums[upto + 1])?;
    total.checked_sub(weighted[upto + 1]).ok_or(Error::Overflow)
}

pub(crate) fn first_best_sum(pmf_s: &Pmf, pmf_b: &Pmf) -> Result<u128> {
    check_same_support(pmf_s.h(), pmf_b.h())?;
    let (sums, weighted) = suffix_tables(pmf_b)?;
    let mut acc = 0u128;
    for (s, &mass) in pmf_s.mass().iter().enumerate() {
        if mass == 0 {
            continue;
        }
        let inner = buyer_surplus_above(&sums, &weighted, s, s)?;
        acc = checked_add(acc, checked_mul(mass as u128, inner)?)?;
    }
    Ok(acc)
}

pub(crate) fn seller_offering_sum(pmf_s: &Pmf, pmf_b: &Pmf, prices: &PriceTable) -> Result<u128> {
    check_same_support(pmf_s.h(), pmf_b.h())?;
    check_same_support(pmf_s.h(), prices.h())?;
    let (sums, weighted) = suffix_tables(pmf_b)?;
    let mut acc = 0u128;
    for (s, &mass) in pmf_s.mass().iter().enumerate() {
        if mass == 0 {
            continue;
        }
        let p = prices.get(s);
        if p < s {
            return Err(Error::InvalidParams(format!("seller price {p} below cost {s}")));
        }
        let inner = buyer_surplus_above(&sums, &weighted, p, s)?;
        acc = checked_add(acc, checked_mul(mass as u128, inner)?)?;
    }
    Ok(acc)
}

pub(crate) fn buyer_offering_sum(pmf_s: &Pmf, pmf_b: &Pmf, prices: &PriceTable) -> Result<u128> {
    check_same_support(pmf_s.h(), pmf_b.h())?;
    check_same_support(pmf_b.h(), prices.h())?;
    let (sums, weighted) = prefix_tables(pmf_s)?;
    let mut acc = 0u128;
    for (b, &mass) in pmf_b.mass().iter().enumerate() {
        if mass == 0 {
            continue;
        }
        let p = prices.get(b);
        if p > b {
            return Err(Error::InvalidParams(format!("buyer price {p} above value {b}")));
        }
        let inner = seller_surplus_below(&sums, &weighted, p, b)?;
        acc = checked_add(acc, checked_mul(mass as u128, inner)?)?;
    }
    Ok(acc)
}

fn over_scale_squared(numer: u128) -> ExactRational {
    ExactRational::from_u128(numer, scale_squared())
}

/// Expected surplus when trade happens exactly when `b >= s`.
pub fn first_best_gft(pmf_s: &Pmf, pmf_b: &Pmf) -> Result<ExactRational> {
    first_best_sum(pmf_s, pmf_b).map(over_scale_squared)
}

pub fn seller_offering_gft(pmf_s: &Pmf, pmf_b: &Pmf, prices: &PriceTable) -> Result<ExactRational> {
    seller_offering_sum(pmf_s, pmf_b, prices).map(over_scale_squared)
}

pub fn buyer_offering_gft(pmf_s: &Pmf, pmf_b: &Pmf, prices: &PriceTable) -> Result<ExactRational> {
    buyer_offering_sum(pmf_s, pmf_b, prices).map(over_scale_squared)
}

#[inline]
fn seller_profit(sf: &[u64], p: usize, s: usize) -> u128 {
    sf[p] as u128 * (p - s) as u128
}

#[inline]
fn buyer_profit(cdf: &[u64], p: usize, b: usize) -> u128 {
    cdf[p] as u128 * (b - p) as u128
}

/// Seller price for every cost `s in 0..=H`, ties resolved to the highest price.
pub fn optimal_seller_prices(sf_b: &DiscreteDistribution) -> Result<PriceTable> {
    optimal_seller_prices_with(sf_b, PriceSearch::Monotone)
}

pub fn optimal_seller_prices_with(sf_b: &DiscreteDistribution, search: PriceSearch) -> Result<PriceTable> {
    sf_b.expect_kind(DistKind::BuyerSf)?;
    let sf = sf_b.raw();
    let h = sf_b.h();
    let prices = match search {
        PriceSearch::Monotone => {
            sf_b.ensure_valid()?;
            let mut prices = vec![0usize; h + 1];
            seller_dc(&sf, &mut prices, 0, h, 0, h);
            prices
        }
        PriceSearch::Exhaustive => (0..=h)
            .into_par_iter()
            .map(|s| {
                let mut best = 0u128;
                let mut opt = s;
                for p in s..=h {
                    let profit = seller_profit(&sf, p, s);
                    if profit >= best {
                        best = profit;
                        opt = p;
                    }
                }
                opt
            })
            .collect(),
    };
    Ok(PriceTable { prices })
}

// Fills prices[lo..=hi] given that every optimum there lies in [plo, phi].
fn seller_dc(sf: &[u64], prices: &mut [usize], lo: usize, hi: usize, plo: usize, phi: usize) {
    if lo > hi {
        return;
    }
    let mid = lo + (hi - lo) / 2;
    let start = mid.max(plo);
    let mut best = seller_profit(sf, start, mid);
    let mut opt = start;
    for p in start + 1..=phi {
        let profit = seller_profit(sf, p, mid);
        if profit >= best {
            best = profit;
            opt = p;
        }
    }
    prices[mid] = opt;
    if mid > lo {
        seller_dc(sf, prices, lo, mid - 1, plo, opt);
    }
    seller_dc(sf, prices, mid + 1, hi, opt, phi);
}

/// Buyer price for every value `b in 0..=H`, ties resolved to the lowest price;
/// a buyer who cannot make positive profit posts `b`.
pub fn optimal_buyer_prices(cdf_s: &DiscreteDistribution) -> Result<PriceTable> {
    optimal_buyer_prices_with(cdf_s, PriceSearch::Monotone)
}

pub fn optimal_buyer_prices_with(cdf_s: &DiscreteDistribution, search: PriceSearch) -> Result<PriceTable> {
    cdf_s.expect_kind(DistKind::SellerCdf)?;
    let cdf = cdf_s.raw();
    let h = cdf_s.h();
    let prices = match search {
        PriceSearch::Monotone => {
            cdf_s.ensure_valid()?;
            let mut argmax = vec![0usize; h + 1];
            let mut best = vec![0u128; h + 1];
            buyer_dc(&cdf, &mut argmax, &mut best, 0, h, 0, h);
            argmax.into_iter().zip(best).enumerate().map(|(b, (p, profit))| if profit == 0 { b } else { p }).collect()
        }
        PriceSearch::Exhaustive => (0..=h)
            .into_par_iter()
            .map(|b| {
                let mut best = 0u128;
                let mut opt = b;
                for p in 0..=b {
                    let profit = buyer_profit(&cdf, p, b);
                    if profit > best {
                        best = profit;
                        opt = p;
                    }
                }
                opt
            })
            .collect(),
    };
    Ok(PriceTable { prices })
}

// Lowest maximizer and its profit for every b in [lo, hi], optima known to lie in [plo, phi].
fn buyer_dc(cdf: &[u64], argmax: &mut [usize], best: &mut [u128], lo: usize, hi: usize, plo: usize, phi: usize) {
    if lo > hi {
        return;
    }
    let mid = lo + (hi - lo) / 2;
    let end = mid.min(phi);
    let mut top = buyer_profit(cdf, plo, mid);
    let mut opt = plo;
    for p in plo + 1..=end {
        let profit = buyer_profit(cdf, p, mid);
        if profit > top {
            top = profit;
            opt = p;
        }
    }
    argmax[mid] = opt;
    best[mid] = top;
    if mid > lo {
        buyer_dc(cdf, argmax, best, lo, mid - 1, plo, opt);
    }
    buyer_dc(cdf, argmax, best, mid + 1, hi, opt, phi);
}

fn check_pair(cdf_s: &DiscreteDistribution, sf_b: &DiscreteDistribution) -> Result<()> {
    cdf_s.expect_kind(DistKind::SellerCdf)?;
    sf_b.expect_kind(DistKind::BuyerSf)?;
    check_same_support(cdf_s.h(), sf_b.h())?;
    cdf_s.ensure_valid()?;
    sf_b.ensure_valid()
}

/// All four GFT values and the approximation ratio for a valid seller CDF and buyer SF.
pub fn evaluate(cdf_s: &DiscreteDistribution, sf_b: &DiscreteDistribution) -> Result<GftReport> {
    evaluate_detailed(cdf_s, sf_b, PriceSearch::Monotone).map(|e| e.report)
}

pub fn evaluate_detailed(
    cdf_s: &DiscreteDistribution,
    sf_b: &DiscreteDistribution,
    search: PriceSearch,
) -> Result<Evaluation> {
    check_pair(cdf_s, sf_b)?;
    let pmf_s = cdf_s.pmf();
    let pmf_b = sf_b.pmf();
    let seller_prices = optimal_seller_prices_with(sf_b, search)?;
    let buyer_prices = optimal_buyer_prices_with(cdf_s, search)?;
    let sums = GftSums {
        fb: first_best_sum(&pmf_s, &pmf_b)?,
        so: seller_offering_sum(&pmf_s, &pmf_b, &seller_prices)?,
        bo: buyer_offering_sum(&pmf_s, &pmf_b, &buyer_prices)?,
    };
    Ok(Evaluation { sums, report: GftReport::from_sums(sums), seller_prices, buyer_prices })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{equal_revenue_buyer, point_mass, uniform_seller};
    use num_rational::BigRational;
    use num_traits::Zero;
    use proptest::prelude::*;

    const HALF: u64 = SCALE / 2;

    fn two_point() -> (DiscreteDistribution, DiscreteDistribution) {
        let cdf = DiscreteDistribution::from_raw(DistKind::SellerCdf, &[HALF, HALF, SCALE]).unwrap();
        let sf = DiscreteDistribution::from_raw(DistKind::BuyerSf, &[SCALE, SCALE, HALF]).unwrap();
        (cdf, sf)
    }

    fn r(n: i64, d: i64) -> ExactRational {
        ExactRational::new(n, d)
    }

    /// Enumerates (s, b) pairs and candidate prices with exact rationals on
    /// real probabilities, independent of the scaled prefix-sum machinery.
    fn brute_force(cdf: &[u64], sf: &[u64]) -> (BigRational, BigRational, BigRational) {
        let h = cdf.len() - 1;
        let q = |x: u64| BigRational::new(x.into(), SCALE.into());
        let ps: Vec<BigRational> =
            (0..=h).map(|m| if m == 0 { q(cdf[0]) } else { q(cdf[m].saturating_sub(cdf[m - 1])) }).collect();
        let pb: Vec<BigRational> =
            (0..=h).map(|m| if m == h { q(sf[h]) } else { q(sf[m].saturating_sub(sf[m + 1])) }).collect();
        let (mut fb, mut so, mut bo) = (BigRational::zero(), BigRational::zero(), BigRational::zero());
        for s in 0..=h {
            let mut best = BigRational::zero();
            let mut seller_price = s;
            for p in s..=h {
                let v = q(sf[p]) * BigRational::from_integer(((p - s) as i64).into());
                if v >= best {
                    best = v;
                    seller_price = p;
                }
            }
            for b in 0..=h {
                if b < s {
                    continue;
                }
                let gain = &ps[s] * &pb[b] * BigRational::from_integer(((b - s) as i64).into());
                fb += &gain;
                if b >= seller_price {
                    so += &gain;
                }
            }
        }
        for b in 0..=h {
            let mut best = BigRational::zero();
            let mut buyer_price = b;
            for p in 0..=b {
                let v = q(cdf[p]) * BigRational::from_integer(((b - p) as i64).into());
                if v > best {
                    best = v;
                    buyer_price = p;
                }
            }
            for s in 0..=buyer_price {
                bo += &ps[s] * &pb[b] * BigRational::from_integer(((b - s) as i64).into());
            }
        }
        (fb, so, bo)
    }

    #[test]
    fn first_best_examples() {
        let s0 = point_mass(0, DistKind::SellerCdf, 5).unwrap().pmf();
        let b5 = point_mass(5, DistKind::BuyerSf, 5).unwrap().pmf();
        assert_eq!(first_best_gft(&s0, &b5).unwrap(), ExactRational::integer(5));

        let s2 = point_mass(2, DistKind::SellerCdf, 2).unwrap().pmf();
        let b1 = point_mass(1, DistKind::BuyerSf, 2).unwrap().pmf();
        assert_eq!(first_best_gft(&s2, &b1).unwrap(), ExactRational::zero());

        let (cdf, sf) = two_point();
        let fb = first_best_gft(&cdf.pmf(), &sf.pmf()).unwrap();
        assert_eq!(fb, r(3, 4));
        let (oracle, _, _) = brute_force(&cdf.raw(), &sf.raw());
        assert_eq!(fb.numer(), oracle.numer());
        assert_eq!(fb.denom(), oracle.denom());
    }

    #[test]
    fn mismatched_supports_error() {
        let a = uniform_seller(3).unwrap().pmf();
        let b = equal_revenue_buyer(4).unwrap().pmf();
        assert!(matches!(first_best_gft(&a, &b), Err(Error::SupportMismatch { .. })));
        let sf = equal_revenue_buyer(4).unwrap();
        assert!(matches!(evaluate(&uniform_seller(3).unwrap(), &sf), Err(Error::SupportMismatch { .. })));
    }

    #[test]
    fn seller_price_examples() {
        for v in 1..=4 {
            let sf = point_mass(v, DistKind::BuyerSf, 4).unwrap();
            for search in [PriceSearch::Monotone, PriceSearch::Exhaustive] {
                let prices = optimal_seller_prices_with(&sf, search).unwrap();
                for s in 0..v {
                    assert_eq!(prices.get(s), v, "v={v} s={s}");
                }
                // no positive profit at s = v: every price ties at zero and the highest wins
                assert_eq!(prices.get(v), 4);
            }
        }
        let (_, sf) = two_point();
        let prices = optimal_seller_prices(&sf).unwrap();
        assert_eq!(prices.get(0), 2);
        assert_eq!(prices.get(2), 2);
    }

    #[test]
    fn buyer_price_examples() {
        let cdf = point_mass(0, DistKind::SellerCdf, 4).unwrap();
        assert_eq!(optimal_buyer_prices(&cdf).unwrap().prices(), &[0, 0, 0, 0, 0]);

        let (cdf, _) = two_point();
        for search in [PriceSearch::Monotone, PriceSearch::Exhaustive] {
            let prices = optimal_buyer_prices_with(&cdf, search).unwrap();
            assert_eq!(prices.get(2), 0);
            assert_eq!(prices.get(0), 0);
        }

        // seller mass at 3 only: values up to 3 see zero profit and post their own value
        let cdf = point_mass(3, DistKind::SellerCdf, 5).unwrap();
        assert_eq!(optimal_buyer_prices(&cdf).unwrap().prices(), &[0, 1, 2, 3, 3, 3]);
    }

    #[test]
    fn offering_examples() {
        let s0 = point_mass(0, DistKind::SellerCdf, 5).unwrap();
        let b5 = point_mass(5, DistKind::BuyerSf, 5).unwrap();
        let (ps, pb) = (s0.pmf(), b5.pmf());
        let sp = optimal_seller_prices(&b5).unwrap();
        let bp = optimal_buyer_prices(&s0).unwrap();
        assert_eq!(sp.get(0), 5);
        assert_eq!(seller_offering_gft(&ps, &pb, &sp).unwrap(), ExactRational::integer(5));
        assert_eq!(buyer_offering_gft(&ps, &pb, &bp).unwrap(), ExactRational::integer(5));

        let (cdf, sf) = two_point();
        let sp = optimal_seller_prices(&sf).unwrap();
        let bp = optimal_buyer_prices(&cdf).unwrap();
        assert_eq!(seller_offering_gft(&cdf.pmf(), &sf.pmf(), &sp).unwrap(), r(1, 2));
        assert_eq!(buyer_offering_gft(&cdf.pmf(), &sf.pmf(), &bp).unwrap(), r(3, 4));
    }

    #[test]
    fn evaluate_two_point() {
        let (cdf, sf) = two_point();
        let rep = evaluate(&cdf, &sf).unwrap();
        assert_eq!(rep.fb, r(3, 4));
        assert_eq!(rep.so, r(1, 2));
        assert_eq!(rep.bo, r(3, 4));
        assert_eq!(rep.ro, r(5, 8));
        assert_eq!(rep.ratio, Some(r(6, 5)));
        let (fb, so, bo) = brute_force(&cdf.raw(), &sf.raw());
        assert_eq!(rep.fb.to_string(), format!("{} / {}", fb.numer(), fb.denom()));
        assert_eq!(rep.so.to_string(), format!("{} / {}", so.numer(), so.denom()));
        assert_eq!(rep.bo.to_string(), format!("{} / {}", bo.numer(), bo.denom()));
    }

    #[test]
    fn evaluate_degenerate_is_undefined() {
        let cdf = point_mass(2, DistKind::SellerCdf, 2).unwrap();
        let sf = point_mass(1, DistKind::BuyerSf, 2).unwrap();
        let rep = evaluate(&cdf, &sf).unwrap();
        assert!(rep.fb.is_zero());
        assert!(rep.ro.is_zero());
        assert_eq!(rep.ratio, None);
    }

    #[test]
    fn evaluate_rejects_invalid_inputs() {
        let bad = DiscreteDistribution::from_raw(DistKind::SellerCdf, &[HALF, 0, SCALE]).unwrap();
        let sf = equal_revenue_buyer(2).unwrap();
        assert!(matches!(evaluate(&bad, &sf), Err(Error::Invalid(v)) if v.len() == 1));
        assert!(matches!(evaluate(&sf, &sf), Err(Error::WrongKind { .. })));
    }

    #[test]
    fn uniform_seller_against_equal_revenue_buyer_at_h2() {
        let cdf = uniform_seller(2).unwrap();
        let sf = equal_revenue_buyer(2).unwrap();
        let rep = evaluate(&cdf, &sf).unwrap();
        let (fb, so, bo) = brute_force(&cdf.raw(), &sf.raw());
        assert_eq!(rep.fb.to_string(), format!("{} / {}", fb.numer(), fb.denom()));
        assert_eq!(rep.so.to_string(), format!("{} / {}", so.numer(), so.denom()));
        assert_eq!(rep.bo.to_string(), format!("{} / {}", bo.numer(), bo.denom()));
    }

    fn grid_table(len: usize, steps: u64) -> impl Strategy<Value = Vec<u64>> {
        prop::collection::vec(0..=steps, len).prop_map(move |mut v| {
            v.sort_unstable();
            let mut out: Vec<u64> = v.iter().map(|&k| k * (SCALE / steps)).collect();
            *out.last_mut().unwrap() = SCALE;
            out
        })
    }

    fn instance() -> impl Strategy<Value = (Vec<u64>, Vec<u64>)> {
        (2usize..14, prop_oneof![Just(4u64), Just(8), Just(1000), Just(SCALE)]).prop_flat_map(|(len, steps)| {
            (grid_table(len, steps), grid_table(len, steps)).prop_map(|(c, mut s)| {
                s.reverse();
                (c, s)
            })
        })
    }

    proptest! {
        #[test]
        fn matches_brute_force((cdf, sf) in instance()) {
            let d_cdf = DiscreteDistribution::from_raw(DistKind::SellerCdf, &cdf).unwrap();
            let d_sf = DiscreteDistribution::from_raw(DistKind::BuyerSf, &sf).unwrap();
            let rep = evaluate(&d_cdf, &d_sf).unwrap();
            let (fb, so, bo) = brute_force(&cdf, &sf);
            prop_assert_eq!(rep.fb.to_string(), format!("{} / {}", fb.numer(), fb.denom()));
            prop_assert_eq!(rep.so.to_string(), format!("{} / {}", so.numer(), so.denom()));
            prop_assert_eq!(rep.bo.to_string(), format!("{} / {}", bo.numer(), bo.denom()));
        }

        #[test]
        fn monotone_search_matches_exhaustive((cdf, sf) in instance()) {
            let d_cdf = DiscreteDistribution::from_raw(DistKind::SellerCdf, &cdf).unwrap();
            let d_sf = DiscreteDistribution::from_raw(DistKind::BuyerSf, &sf).unwrap();
            let fast = evaluate_detailed(&d_cdf, &d_sf, PriceSearch::Monotone).unwrap();
            let slow = evaluate_detailed(&d_cdf, &d_sf, PriceSearch::Exhaustive).unwrap();
            prop_assert_eq!(&fast.seller_prices, &slow.seller_prices);
            prop_assert_eq!(&fast.buyer_prices, &slow.buyer_prices);
            prop_assert_eq!(fast.sums, slow.sums);
            prop_assert!(fast.seller_prices.is_non_decreasing());
            prop_assert!(fast.buyer_prices.is_non_decreasing());
        }

        #[test]
        fn identities_hold((cdf, sf) in instance()) {
            let d_cdf = DiscreteDistribution::from_raw(DistKind::SellerCdf, &cdf).unwrap();
            let d_sf = DiscreteDistribution::from_raw(DistKind::BuyerSf, &sf).unwrap();
            let rep = evaluate(&d_cdf, &d_sf).unwrap();
            prop_assert_eq!(&rep.ro, &(&rep.so + &rep.bo).half());
            prop_assert!(rep.fb >= rep.so);
            prop_assert!(rep.fb >= rep.bo);
            if let Some(ratio) = &rep.ratio {
                prop_assert!(*ratio >= ExactRational::integer(1));
            }
        }
    }

    /// Flipping the tie rules moves prices only where several maximizers exist;
    /// on tie-free instances the GFT values are unchanged.
    #[test]
    fn opposite_tie_rule_agrees_on_tie_free_instances() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let mut checked = 0;
        for _ in 0..300 {
            let h = rng.gen_range(2..30);
            let mut c: Vec<u64> = (0..=h).map(|_| rng.gen_range(0..=SCALE)).collect();
            c.sort_unstable();
            c[h] = SCALE;
            let mut s: Vec<u64> = (0..=h).map(|_| rng.gen_range(0..=SCALE)).collect();
            s.sort_unstable_by(|a, b| b.cmp(a));
            s[0] = SCALE;
            let maximizers = |profits: Vec<u128>| {
                let top = *profits.iter().max().unwrap();
                profits.iter().filter(|&&x| x == top).count()
            };
            let tie_free = (0..=h).all(|t| {
                maximizers((t..=h).map(|p| seller_profit(&s, p, t)).collect()) == 1
                    && (t == 0 || maximizers((0..=t).map(|p| buyer_profit(&c, p, t)).collect()) == 1)
            });
            if !tie_free {
                continue;
            }
            checked += 1;
            let cdf = DiscreteDistribution::from_raw(DistKind::SellerCdf, &c).unwrap();
            let sf = DiscreteDistribution::from_raw(DistKind::BuyerSf, &s).unwrap();
            let base = evaluate_detailed(&cdf, &sf, PriceSearch::Monotone).unwrap();
            // lowest seller maximizer, highest buyer maximizer
            let flipped_s: Vec<usize> = (0..=h)
                .map(|t| {
                    let mut best = 0u128;
                    let mut opt = t;
                    for p in t..=h {
                        if seller_profit(&s, p, t) > best {
                            best = seller_profit(&s, p, t);
                            opt = p;
                        }
                    }
                    opt
                })
                .collect();
            let flipped_b: Vec<usize> = (0..=h)
                .map(|t| {
                    let mut best = 0u128;
                    let mut opt = t;
                    for p in 0..=t {
                        if buyer_profit(&c, p, t) >= best && buyer_profit(&c, p, t) > 0 {
                            best = buyer_profit(&c, p, t);
                            opt = p;
                        }
                    }
                    opt
                })
                .collect();
            let (ps, pb) = (cdf.pmf(), sf.pmf());
            let so = seller_offering_sum(&ps, &pb, &PriceTable::new(flipped_s)).unwrap();
            let bo = buyer_offering_sum(&ps, &pb, &PriceTable::new(flipped_b)).unwrap();
            assert_eq!(so, base.sums.so);
            assert_eq!(bo, base.sums.bo);
        }
        assert!(checked > 50, "only {checked} tie-free instances");
    }

    #[test]
    fn two_point_tie_rule_is_observable() {
        let (cdf, sf) = two_point();
        // seller at s=0: profit SCALE at p=1 and p=2; lowest-maximizer rule would post 1
        let s = sf.raw();
        assert_eq!(seller_profit(&s, 1, 0), seller_profit(&s, 2, 0));
        assert_eq!(optimal_seller_prices(&sf).unwrap().get(0), 2);
        // with price 1 the seller would also trade with b = 1
        let alt = seller_offering_sum(&cdf.pmf(), &sf.pmf(), &PriceTable::new(vec![1, 2, 2])).unwrap();
        assert_ne!(alt, evaluate_detailed(&cdf, &sf, PriceSearch::Monotone).unwrap().sums.so);
    }
}
