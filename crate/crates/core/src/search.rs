//! Random-restart coordinate search over the modulated power-law seller family
//! against the fixed equal-revenue buyer.
//!
//! Each restart draws a feasible start uniformly inside the bounds, then
//! sweeps the five coordinates, probing `x +/- step` along each. An improving
//! probe moves the point; a failed probe shrinks that coordinate's step by the
//! golden-ratio conjugate. A restart ends when every step is below
//! `MIN_STEP_FRACTION` of its interval or its share of the budget is spent.
//! Unspent budget rolls over to the next restart.
//!
//! `budget` counts full-support evaluations. With `eval_H` set, probes are
//! first scored at the smaller support; only a probe that beats the current
//! point there is evaluated at full support, and only full-support scores
//! enter the trace or decide a move.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::MAX_H;
use crate::error::{Error, Result};
use crate::generators::{equal_revenue_buyer, modulated_power_mixture_seller, SellerFamilyParams, EXPONENT_FLOOR};
use crate::mechanisms::evaluate;
use crate::rational::ExactRational;

const GOLDEN_SHRINK: f64 = 0.618_033_988_749_894_8;
const MIN_STEP_FRACTION: f64 = 1e-6;
const INITIAL_STEP_FRACTION: f64 = 0.25;

/// Closed intervals `[lo, hi]` for each family parameter.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamBounds {
    pub w: [f64; 2],
    pub a1_base: [f64; 2],
    pub a1_amp: [f64; 2],
    pub a1_freq: [f64; 2],
    pub a2: [f64; 2],
}

impl ParamBounds {
    pub fn point(p: &SellerFamilyParams) -> Self {
        Self::around(p, 0.0)
    }

    /// `p * (1 -/+ rel)` per parameter, with `w` kept inside `[0, 1]`.
    pub fn around(p: &SellerFamilyParams, rel: f64) -> Self {
        let span = |v: f64| {
            let (a, b) = (v * (1.0 - rel), v * (1.0 + rel));
            [a.min(b), a.max(b)]
        };
        let mut w = span(p.w);
        w[0] = w[0].max(0.0);
        w[1] = w[1].min(1.0);
        ParamBounds { w, a1_base: span(p.a1_base), a1_amp: span(p.a1_amp), a1_freq: span(p.a1_freq), a2: span(p.a2) }
    }

    fn as_array(&self) -> [[f64; 2]; 5] {
        [self.w, self.a1_base, self.a1_amp, self.a1_freq, self.a2]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchConfig {
    pub bounds: ParamBounds,
    pub budget: usize,
    pub restarts: usize,
    pub seed: u64,
    #[serde(rename = "H")]
    pub h: usize,
    #[serde(rename = "eval_H", default, skip_serializing_if = "Option::is_none")]
    pub eval_h: Option<usize>,
}

impl SearchConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: SearchConfig = toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.budget == 0 {
            return bad("budget must be at least 1".into());
        }
        if self.restarts == 0 {
            return bad("restarts must be at least 1".into());
        }
        if !(1..=MAX_H).contains(&self.h) {
            return bad(format!("H = {} outside 1..={MAX_H}", self.h));
        }
        if let Some(e) = self.eval_h {
            if e == 0 || e > self.h {
                return bad(format!("eval_H = {e} must be in 1..=H"));
            }
        }
        let names = ["w", "a1_base", "a1_amp", "a1_freq", "a2"];
        for (name, [lo, hi]) in names.iter().zip(self.bounds.as_array()) {
            if !lo.is_finite() || !hi.is_finite() || lo > hi {
                return bad(format!("bounds for {name} must be finite with lo <= hi"));
            }
        }
        let b = &self.bounds;
        if b.w[0] < 0.0 || b.w[1] > 1.0 {
            return bad("w bounds must lie in [0, 1]".into());
        }
        if b.a1_base[0] <= 0.0 || b.a2[0] <= 0.0 {
            return bad("a1_base and a2 bounds must be positive".into());
        }
        if b.a1_amp[0] < 0.0 || b.a1_freq[0] < 0.0 {
            return bad("a1_amp and a1_freq bounds must be non-negative".into());
        }
        if b.a1_base[1] - b.a1_amp[0] < EXPONENT_FLOOR {
            return bad("bounds admit no point with a1_base - a1_amp above the exponent floor".into());
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceRecord {
    /// 1-based index among full-support evaluations.
    pub evaluation: usize,
    pub restart: usize,
    pub params: SellerFamilyParams,
    pub ratio: ExactRational,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchResult {
    pub best_params: SellerFamilyParams,
    pub best_ratio: ExactRational,
    pub evaluations: usize,
    pub screened_evaluations: usize,
    pub trace: Vec<TraceRecord>,
}

/// Exact approximation ratio of the family member `p` at support `h` against
/// the equal-revenue buyer.
pub fn evaluate_params(p: &SellerFamilyParams, h: usize) -> Result<ExactRational> {
    let p = p.with_h(h);
    let seller = modulated_power_mixture_seller(&p)?;
    let buyer = equal_revenue_buyer(h)?;
    evaluate(&seller, &buyer)?.ratio.ok_or(Error::UndefinedRatio)
}

struct Runner<'a> {
    cfg: &'a SearchConfig,
    bounds: [[f64; 2]; 5],
    evaluations: usize,
    screened: usize,
    trace: Vec<TraceRecord>,
    best: Option<(SellerFamilyParams, ExactRational)>,
}

impl Runner<'_> {
    fn remaining(&self) -> usize {
        self.cfg.budget - self.evaluations
    }

    fn params(&self, x: [f64; 5]) -> SellerFamilyParams {
        SellerFamilyParams::from_array(x, self.cfg.h)
    }

    fn feasible(&self, x: &[f64; 5]) -> bool {
        self.params(*x).validate().is_ok()
    }

    /// Full-support evaluation of a batch, recorded in order.
    fn evaluate_full(&mut self, restart: usize, points: &[[f64; 5]]) -> Vec<Option<ExactRational>> {
        let h = self.cfg.h;
        let scores: Vec<Option<ExactRational>> =
            points.par_iter().map(|x| evaluate_params(&SellerFamilyParams::from_array(*x, h), h).ok()).collect();
        for (x, score) in points.iter().zip(&scores) {
            self.evaluations += 1;
            if let Some(ratio) = score {
                let params = self.params(*x);
                self.trace.push(TraceRecord { evaluation: self.evaluations, restart, params, ratio: ratio.clone() });
                if self.best.as_ref().is_none_or(|(_, b)| ratio > b) {
                    self.best = Some((params, ratio.clone()));
                }
            }
        }
        scores
    }

    fn screen(&mut self, points: &[[f64; 5]], h: usize) -> Vec<Option<ExactRational>> {
        self.screened += points.len();
        points.par_iter().map(|x| evaluate_params(&SellerFamilyParams::from_array(*x, h), h).ok()).collect()
    }

    fn random_start(&self, rng: &mut ChaCha8Rng) -> [f64; 5] {
        let b = &self.bounds;
        let draw = |rng: &mut ChaCha8Rng, lo: f64, hi: f64| lo + (hi - lo) * rng.gen::<f64>();
        let w = draw(rng, b[0][0], b[0][1]);
        let base = draw(rng, b[1][0].max(b[2][0] + EXPONENT_FLOOR).min(b[1][1]), b[1][1]);
        let amp = draw(rng, b[2][0], b[2][1].min(base - EXPONENT_FLOOR).max(b[2][0]));
        let freq = draw(rng, b[3][0], b[3][1]);
        let a2 = draw(rng, b[4][0], b[4][1]);
        [w, base, amp, freq, a2]
    }

    fn restart(&mut self, index: usize, allowance: usize, rng: &mut ChaCha8Rng) {
        let start_budget = self.evaluations;
        let spent = |r: &Runner| r.evaluations - start_budget;
        let mut x = self.random_start(rng);
        if !self.feasible(&x) || allowance == 0 {
            return;
        }
        let Some(mut score) = self.evaluate_full(index, &[x]).pop().flatten() else {
            return;
        };
        let screen_h = self.cfg.eval_h.filter(|&e| e < self.cfg.h);
        let mut screen_score = match screen_h {
            Some(e) => self.screen(&[x], e).pop().flatten(),
            None => None,
        };
        let mut step: [f64; 5] =
            std::array::from_fn(|i| INITIAL_STEP_FRACTION * (self.bounds[i][1] - self.bounds[i][0]));
        let min_step: [f64; 5] = std::array::from_fn(|i| MIN_STEP_FRACTION * (self.bounds[i][1] - self.bounds[i][0]));

        while spent(self) < allowance && (0..5).any(|i| step[i] > min_step[i]) {
            for i in 0..5 {
                if spent(self) >= allowance {
                    break;
                }
                if step[i] <= min_step[i] {
                    continue;
                }
                let mut probes: Vec<[f64; 5]> = Vec::with_capacity(2);
                for dir in [1.0, -1.0] {
                    let mut y = x;
                    y[i] = (x[i] + dir * step[i]).clamp(self.bounds[i][0], self.bounds[i][1]);
                    if y[i] != x[i] && self.feasible(&y) && !probes.contains(&y) {
                        probes.push(y);
                    }
                }
                let moved = match screen_h {
                    None => {
                        probes.truncate(allowance - spent(self));
                        let scores = self.evaluate_full(index, &probes);
                        pick_best(&probes, &scores).filter(|(_, s)| *s > score).map(|(y, s)| (y, s, None))
                    }
                    Some(e) => {
                        let screened = self.screen(&probes, e);
                        match pick_best(&probes, &screened) {
                            Some((y, s_small)) if screen_score.as_ref().is_none_or(|c| s_small > *c) => self
                                .evaluate_full(index, &[y])
                                .pop()
                                .flatten()
                                .filter(|s| *s > score)
                                .map(|s| (y, s, Some(s_small))),
                            _ => None,
                        }
                    }
                };
                match moved {
                    Some((y, s, s_small)) => {
                        x = y;
                        score = s;
                        if screen_h.is_some() {
                            screen_score = s_small;
                        }
                    }
                    None => step[i] *= GOLDEN_SHRINK,
                }
            }
        }
    }
}

/// Highest score, ties going to the earlier candidate.
fn pick_best(points: &[[f64; 5]], scores: &[Option<ExactRational>]) -> Option<([f64; 5], ExactRational)> {
    let mut best: Option<([f64; 5], ExactRational)> = None;
    for (x, s) in points.iter().zip(scores) {
        if let Some(s) = s {
            if best.as_ref().is_none_or(|(_, b)| s > b) {
                best = Some((*x, s.clone()));
            }
        }
    }
    best
}

pub fn run_search(cfg: &SearchConfig) -> Result<SearchResult> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let b = cfg.bounds.as_array();
    let mut runner = Runner { cfg, bounds: b, evaluations: 0, screened: 0, trace: Vec::new(), best: None };
    for r in 0..cfg.restarts {
        let allowance = runner.remaining() / (cfg.restarts - r);
        let allowance =
            if r + 1 == cfg.restarts { runner.remaining() } else { allowance.max(1).min(runner.remaining()) };
        runner.restart(r, allowance, &mut rng);
    }
    let (best_params, claimed) = runner.best.take().ok_or(Error::NoEvaluations)?;
    let fresh = evaluate_params(&best_params, cfg.h)?;
    assert_eq!(fresh, claimed, "stale best score");
    Ok(SearchResult {
        best_params,
        best_ratio: fresh,
        evaluations: runner.evaluations,
        screened_evaluations: runner.screened,
        trace: runner.trace,
    })
}
