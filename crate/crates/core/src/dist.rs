//! Scaled-integer discrete distributions over the support `{0..H}`.
//!
//! Probabilities are stored as integer multiples of `1 / SCALE`. A seller is
//! described by its CDF `Pr[s <= m]`, a buyer by its survival function
//! `Pr[b >= m]`; both derive a PMF by differencing with negative steps clamped
//! to zero.
//!
//! The text file format is
//!
//! ```text
//! kind = seller_cdf
//! H = 3
//! scale = 1000000000000000
//! 0,250000000000000
//! 1,500000000000000
//! 2,750000000000000
//! 3,1000000000000000
//! ```
//!
//! Header lines may appear in any order, blank lines and `#` comments are
//! ignored on input, and [`DiscreteDistribution::to_text`] always writes the
//! canonical layout above.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Number of representable steps per unit of probability (`1 / epsilon`).
pub const SCALE: u64 = 1_000_000_000_000_000;

/// Largest supported support top.
pub const MAX_H: usize = 20_000;

// Every exact GFT numerator is bounded by SCALE^2 * H; doubled sums must still fit.
const _: () = assert!((SCALE as u128) * (SCALE as u128) * (MAX_H as u128 + 1) * 4 < u128::MAX);

/// A probability in `[0, 1]` held as an integer multiple of `1 / SCALE`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[repr(transparent)]
pub struct ScaledProb(u64);

impl ScaledProb {
    pub const ZERO: ScaledProb = ScaledProb(0);
    pub const ONE: ScaledProb = ScaledProb(SCALE);

    pub fn new(value: u64) -> Option<Self> {
        (value <= SCALE).then_some(ScaledProb(value))
    }

    #[inline]
    pub fn get(self) -> u64 {
        self.0
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / SCALE as f64
    }
}

impl fmt::Display for ScaledProb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DistKind {
    /// Seller cost CDF, entry `m` is `Pr[s <= m]`.
    SellerCdf,
    /// Buyer value survival function, entry `m` is `Pr[b >= m]`.
    BuyerSf,
}

impl DistKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DistKind::SellerCdf => "seller_cdf",
            DistKind::BuyerSf => "buyer_sf",
        }
    }
}

impl fmt::Display for DistKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DistKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "seller_cdf" => Ok(DistKind::SellerCdf),
            "buyer_sf" => Ok(DistKind::BuyerSf),
            other => Err(format!("unknown distribution kind `{other}`")),
        }
    }
}

/// How a real probability is mapped onto the scaled integer grid.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ScaleRounding {
    /// `round_ties_even(x / 1e-15)` evaluated in binary64.
    #[default]
    Binary64,
    /// The exact value of the binary64 input times `SCALE`, rounded half to even.
    ExactDecimal,
}

impl ScaleRounding {
    pub fn apply(self, x: f64) -> u64 {
        match self {
            ScaleRounding::Binary64 => (x / 1e-15).round_ties_even() as u64,
            ScaleRounding::ExactDecimal => exact_scaled(x),
        }
    }
}

/// Nearest integer to `x * SCALE` computed without intermediate rounding.
fn exact_scaled(x: f64) -> u64 {
    debug_assert!((0.0..=1.0).contains(&x));
    if x == 0.0 {
        return 0;
    }
    let bits = x.to_bits();
    let biased = ((bits >> 52) & 0x7ff) as i32;
    let frac = bits & ((1u64 << 52) - 1);
    let (mantissa, exp) = if biased == 0 { (frac, -1074) } else { (frac | (1u64 << 52), biased - 1075) };
    // mantissa < 2^53 and SCALE < 2^50
    let n = mantissa as u128 * SCALE as u128;
    if exp >= 0 {
        return (n << exp) as u64;
    }
    let shift = (-exp) as u32;
    if shift >= 104 {
        return 0;
    }
    let q = n >> shift;
    let r = n & ((1u128 << shift) - 1);
    let half = 1u128 << (shift - 1);
    let up = r > half || (r == half && q & 1 == 1);
    (q + up as u128) as u64
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    /// Entry moves against the required direction relative to `previous`.
    NotMonotone { previous: u64, value: u64 },
    /// Boundary entry (CDF at H, SF at 0) is not `SCALE`.
    Boundary { expected: u64, found: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub index: usize,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ViolationKind::NotMonotone { previous, value } => {
                write!(f, "index {}: not monotone ({} after {})", self.index, value, previous)
            }
            ViolationKind::Boundary { expected, found } => {
                write!(f, "index {}: boundary value {} (expected {})", self.index, found, expected)
            }
        }
    }
}

/// A seller CDF or buyer SF over `{0..H}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiscreteDistribution {
    kind: DistKind,
    table: Vec<ScaledProb>,
}

impl DiscreteDistribution {
    /// Builds a distribution from `H + 1` scaled entries. Monotonicity is not
    /// checked here; see [`DiscreteDistribution::validate`].
    pub fn new(kind: DistKind, table: Vec<ScaledProb>) -> Result<Self> {
        let h = table.len().saturating_sub(1);
        if !(1..=MAX_H).contains(&h) {
            return Err(Error::SupportOutOfRange(h));
        }
        Ok(DiscreteDistribution { kind, table })
    }

    pub fn from_raw(kind: DistKind, raw: &[u64]) -> Result<Self> {
        let table = raw
            .iter()
            .enumerate()
            .map(|(index, &value)| ScaledProb::new(value).ok_or(Error::ScaledOutOfRange { index, value }))
            .collect::<Result<Vec<_>>>()?;
        Self::new(kind, table)
    }

    /// Rounds a real-valued CDF or SF onto the scaled grid with the default
    /// binary64 rounding.
    pub fn round_to_scaled(real: &[f64], kind: DistKind, h: usize) -> Result<Self> {
        Self::round_to_scaled_with(real, kind, h, ScaleRounding::Binary64)
    }

    pub fn round_to_scaled_with(real: &[f64], kind: DistKind, h: usize, rounding: ScaleRounding) -> Result<Self> {
        if !(1..=MAX_H).contains(&h) {
            return Err(Error::SupportOutOfRange(h));
        }
        if real.len() != h + 1 {
            return Err(Error::LengthMismatch { h, expected: h + 1, got: real.len() });
        }
        let table = real
            .iter()
            .enumerate()
            .map(|(index, &value)| {
                if !(0.0..=1.0).contains(&value) {
                    return Err(Error::ProbabilityOutOfRange { index, value });
                }
                Ok(ScaledProb(rounding.apply(value)))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(DiscreteDistribution { kind, table })
    }

    pub fn kind(&self) -> DistKind {
        self.kind
    }

    /// Top of the support.
    pub fn h(&self) -> usize {
        self.table.len() - 1
    }

    pub fn table(&self) -> &[ScaledProb] {
        &self.table
    }

    #[inline]
    pub fn at(&self, m: usize) -> u64 {
        self.table[m].0
    }

    pub fn raw(&self) -> Vec<u64> {
        self.table.iter().map(|p| p.0).collect()
    }

    pub fn expect_kind(&self, expected: DistKind) -> Result<()> {
        if self.kind == expected {
            Ok(())
        } else {
            Err(Error::WrongKind { expected, got: self.kind })
        }
    }

    /// One record per failing index; empty iff the table is a valid CDF/SF.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let t = &self.table;
        let h = self.h();
        match self.kind {
            DistKind::SellerCdf => {
                for m in 1..=h {
                    if t[m] < t[m - 1] {
                        out.push(Violation {
                            index: m,
                            kind: ViolationKind::NotMonotone { previous: t[m - 1].0, value: t[m].0 },
                        });
                    }
                }
                if t[h].0 != SCALE {
                    out.push(Violation { index: h, kind: ViolationKind::Boundary { expected: SCALE, found: t[h].0 } });
                }
            }
            DistKind::BuyerSf => {
                if t[0].0 != SCALE {
                    out.push(Violation { index: 0, kind: ViolationKind::Boundary { expected: SCALE, found: t[0].0 } });
                }
                for m in 1..=h {
                    if t[m] > t[m - 1] {
                        out.push(Violation {
                            index: m,
                            kind: ViolationKind::NotMonotone { previous: t[m - 1].0, value: t[m].0 },
                        });
                    }
                }
            }
        }
        out
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let violations = self.validate();
        if violations.is_empty() {
            Ok(())
        } else {
            Err(Error::Invalid(violations))
        }
    }

    /// PMF by differencing, with the direction implied by the kind.
    pub fn pmf(&self) -> Pmf {
        match self.kind {
            DistKind::SellerCdf => derive_pmf_from_cdf(self),
            DistKind::BuyerSf => derive_pmf_from_sf(self),
        }
    }

    pub fn to_text(&self) -> String {
        use std::fmt::Write;
        let mut s = String::with_capacity(64 + 24 * self.table.len());
        let _ = writeln!(s, "kind = {}", self.kind);
        let _ = writeln!(s, "H = {}", self.h());
        let _ = writeln!(s, "scale = {SCALE}");
        for (m, v) in self.table.iter().enumerate() {
            let _ = writeln!(s, "{m},{}", v.0);
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut kind = None;
        let mut h: Option<usize> = None;
        let mut scale = None;
        let mut table = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let err = |msg: String| Error::Parse { line: line_no, msg };
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some((key, value)) = line.split_once('=') {
                if !table.is_empty() {
                    return Err(err("header field after data rows".into()));
                }
                let value = value.trim();
                match key.trim() {
                    "kind" => kind = Some(value.parse::<DistKind>().map_err(err)?),
                    "H" => h = Some(value.parse().map_err(|_| err(format!("bad H `{value}`")))?),
                    "scale" => scale = Some(value.parse::<u64>().map_err(|_| err(format!("bad scale `{value}`")))?),
                    other => return Err(err(format!("unknown header field `{other}`"))),
                }
                continue;
            }
            let (idx, val) =
                line.split_once(',').ok_or_else(|| err(format!("expected `index,value`, got `{line}`")))?;
            let idx: usize = idx.trim().parse().map_err(|_| err(format!("bad index `{idx}`")))?;
            let val: u64 = val.trim().parse().map_err(|_| err(format!("bad value `{val}`")))?;
            if idx != table.len() {
                return Err(err(format!("expected index {}, got {idx}", table.len())));
            }
            let p = ScaledProb::new(val).ok_or_else(|| err(format!("value {val} exceeds scale")))?;
            table.push(p);
        }
        let end = text.lines().count();
        let missing = |field: &str| Error::Parse { line: end, msg: format!("missing header field `{field}`") };
        let kind = kind.ok_or_else(|| missing("kind"))?;
        let h = h.ok_or_else(|| missing("H"))?;
        let scale = scale.ok_or_else(|| missing("scale"))?;
        if scale != SCALE {
            return Err(Error::Parse { line: end, msg: format!("scale must be {SCALE}, got {scale}") });
        }
        if table.len() != h + 1 {
            return Err(Error::LengthMismatch { h, expected: h + 1, got: table.len() });
        }
        Self::new(kind, table)
    }
}

/// Point masses in scaled units; `mass[m] = Pr[X = m] * SCALE`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pmf {
    mass: Vec<u64>,
}

impl Pmf {
    pub fn from_mass(mass: Vec<u64>) -> Self {
        assert!(mass.len() >= 2, "pmf needs at least two support points");
        Pmf { mass }
    }

    pub fn h(&self) -> usize {
        self.mass.len() - 1
    }

    pub fn mass(&self) -> &[u64] {
        &self.mass
    }

    #[inline]
    pub fn at(&self, m: usize) -> u64 {
        self.mass[m]
    }

    pub fn total(&self) -> u128 {
        self.mass.iter().map(|&x| x as u128).sum()
    }

    /// `out[k] = sum of mass[0..k]`, length `H + 2`.
    pub fn prefix_sums(&self) -> Vec<u128> {
        let mut out = Vec::with_capacity(self.mass.len() + 1);
        let mut acc = 0u128;
        out.push(0);
        for &x in &self.mass {
            acc += x as u128;
            out.push(acc);
        }
        out
    }

    /// `out[k] = sum of mass[k..=H]`, length `H + 2`.
    pub fn suffix_sums(&self) -> Vec<u128> {
        let mut out = vec![0u128; self.mass.len() + 1];
        for m in (0..self.mass.len()).rev() {
            out[m] = out[m + 1] + self.mass[m] as u128;
        }
        out
    }
}

/// `mass[0] = F(0)`, `mass[m] = max(0, F(m) - F(m-1))`.
pub fn derive_pmf_from_cdf(d: &DiscreteDistribution) -> Pmf {
    debug_assert_eq!(d.kind, DistKind::SellerCdf);
    let t = &d.table;
    let mut mass = Vec::with_capacity(t.len());
    mass.push(t[0].0);
    for m in 1..t.len() {
        mass.push(t[m].0.saturating_sub(t[m - 1].0));
    }
    Pmf { mass }
}

/// `mass[m] = max(0, S(m) - S(m+1))` for `m < H`, `mass[H] = S(H)`.
pub fn derive_pmf_from_sf(d: &DiscreteDistribution) -> Pmf {
    debug_assert_eq!(d.kind, DistKind::BuyerSf);
    let t = &d.table;
    let h = t.len() - 1;
    let mut mass = Vec::with_capacity(t.len());
    for m in 0..h {
        mass.push(t[m].0.saturating_sub(t[m + 1].0));
    }
    mass.push(t[h].0);
    Pmf { mass }
}
