//! Fixed-point monetary and click quantities.
//!
//! Money and clicks carry six fractional digits and are stored as integer
//! micro-units. Products of the two (per-query value, cost and profit
//! totals) live in [`Weight`], a wide integer of micro²-units, so every
//! sum that the exact solvers compare is computed without rounding.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Micro-units per currency unit (and per click).
pub const MICROS: i64 = 1_000_000;

/// Micro²-units per currency unit; the scale of a [`Weight`].
pub const WEIGHT_SCALE: i128 = 1_000_000_000_000;

const FRACTION_DIGITS: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AmountError {
    #[error("`{0}` is not a decimal number")]
    Malformed(String),
    #[error("`{0}` has more than six fractional digits")]
    TooPrecise(String),
    #[error("`{0}` is out of range")]
    Overflow(String),
    #[error("click count `{0}` is negative")]
    NegativeClicks(String),
}

fn parse_fixed(text: &str, frac_digits: usize) -> Result<i128, AmountError> {
    let s = text.trim();
    let (negative, body) = match s.as_bytes().first() {
        Some(b'-') => (true, &s[1..]),
        Some(b'+') => (false, &s[1..]),
        _ => (false, s),
    };
    let (int_part, frac_part) = match body.split_once('.') {
        Some((i, f)) => (i, f),
        None => (body, ""),
    };
    let digits_ok = |p: &str| p.bytes().all(|b| b.is_ascii_digit());
    if (int_part.is_empty() && frac_part.is_empty())
        || !digits_ok(int_part)
        || !digits_ok(frac_part)
        || (body.contains('.') && frac_part.is_empty())
    {
        return Err(AmountError::Malformed(text.to_string()));
    }
    if frac_part.len() > frac_digits {
        return Err(AmountError::TooPrecise(text.to_string()));
    }
    let overflow = || AmountError::Overflow(text.to_string());
    let mut value: i128 = 0;
    for b in int_part.bytes().chain(frac_part.bytes()) {
        value = value
            .checked_mul(10)
            .and_then(|v| v.checked_add(i128::from(b - b'0')))
            .ok_or_else(overflow)?;
    }
    for _ in frac_part.len()..frac_digits {
        value = value.checked_mul(10).ok_or_else(overflow)?;
    }
    Ok(if negative { -value } else { value })
}

fn format_fixed(f: &mut fmt::Formatter<'_>, value: i128, frac_digits: u32) -> fmt::Result {
    let scale = 10i128.pow(frac_digits);
    let sign = if value < 0 { "-" } else { "" };
    let abs = value.unsigned_abs();
    let int = abs / scale as u128;
    let frac = abs % scale as u128;
    if frac == 0 {
        return write!(f, "{sign}{int}");
    }
    let digits = format!("{:0width$}", frac, width = frac_digits as usize);
    write!(f, "{sign}{int}.{}", digits.trim_end_matches('0'))
}

/// A monetary amount in micro-units (10⁻⁶ currency units).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Money(i64);

impl Money {
    pub const ZERO: Money = Money(0);

    pub const fn from_micros(micros: i64) -> Self {
        Money(micros)
    }

    pub const fn from_units(units: i64) -> Self {
        Money(units * MICROS)
    }

    /// Nearest micro-unit to a floating-point amount.
    pub fn from_f64(units: f64) -> Self {
        Money((units * MICROS as f64).round() as i64)
    }

    pub const fn micros(self) -> i64 {
        self.0
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / MICROS as f64
    }

    /// The amount as a [`Weight`] (one click's worth).
    pub fn to_weight(self) -> Weight {
        Weight(i128::from(self.0) * i128::from(MICROS))
    }
}

impl FromStr for Money {
    type Err = AmountError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let v = parse_fixed(s, FRACTION_DIGITS)?;
        i64::try_from(v)
            .map(Money)
            .map_err(|_| AmountError::Overflow(s.to_string()))
    }
}

impl fmt::Display for Money {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        format_fixed(f, i128::from(self.0), FRACTION_DIGITS as u32)
    }
}

impl Add for Money {
    type Output = Money;
    fn add(self, rhs: Money) -> Money {
        Money(self.0 + rhs.0)
    }
}

impl Sub for Money {
    type Output = Money;
    fn sub(self, rhs: Money) -> Money {
        Money(self.0 - rhs.0)
    }
}

/// Expected click count with micro resolution; never negative.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Clicks(i64);

impl Clicks {
    pub const ONE: Clicks = Clicks(MICROS);

    pub fn from_micros(micros: i64) -> Result<Self, AmountError> {
        if micros < 0 {
            return Err(AmountError::NegativeClicks(micros.to_string()));
        }
        Ok(Clicks(micros))
    }

    pub fn from_units(units: i64) -> Result<Self, AmountError> {
        Self::from_micros(units * MICROS)
    }

    pub const fn micros(self) -> i64 {
        self.0
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / MICROS as f64
    }
}

impl FromStr for Clicks {
    type Err = AmountError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let v = parse_fixed(s, FRACTION_DIGITS)?;
        if v < 0 {
            return Err(AmountError::NegativeClicks(s.to_string()));
        }
        i64::try_from(v)
            .map(Clicks)
            .map_err(|_| AmountError::Overflow(s.to_string()))
    }
}

impl fmt::Display for Clicks {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        format_fixed(f, i128::from(self.0), FRACTION_DIGITS as u32)
    }
}

/// Money × clicks in micro²-units (10⁻¹² currency units).
///
/// Per-query profit, value and spend totals all use this type. With
/// amounts and clicks below 10⁹ units each, 10⁶ queries still sum far
/// inside the `i128` range.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Weight(pub i128);

impl Weight {
    pub const ZERO: Weight = Weight(0);

    pub fn product(amount: Money, clicks: Clicks) -> Self {
        Weight(i128::from(amount.micros()) * i128::from(clicks.micros()))
    }

    pub const fn raw(self) -> i128 {
        self.0
    }

    /// Value in currency units.
    pub fn to_f64(self) -> f64 {
        self.0 as f64 / WEIGHT_SCALE as f64
    }

    pub fn from_f64(units: f64) -> Self {
        Weight((units * WEIGHT_SCALE as f64).round() as i128)
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }

    pub fn abs(self) -> Weight {
        Weight(self.0.abs())
    }

    /// Parses a decimal with up to twelve fractional digits.
    pub fn parse(s: &str) -> Result<Self, AmountError> {
        parse_fixed(s, 12).map(Weight)
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        format_fixed(f, self.0, 12)
    }
}

impl Add for Weight {
    type Output = Weight;
    fn add(self, rhs: Weight) -> Weight {
        Weight(self.0 + rhs.0)
    }
}

impl AddAssign for Weight {
    fn add_assign(&mut self, rhs: Weight) {
        self.0 += rhs.0;
    }
}

impl Sub for Weight {
    type Output = Weight;
    fn sub(self, rhs: Weight) -> Weight {
        Weight(self.0 - rhs.0)
    }
}

impl SubAssign for Weight {
    fn sub_assign(&mut self, rhs: Weight) {
        self.0 -= rhs.0;
    }
}

impl Neg for Weight {
    type Output = Weight;
    fn neg(self) -> Weight {
        Weight(-self.0)
    }
}

impl Sum for Weight {
    fn sum<I: Iterator<Item = Weight>>(iter: I) -> Weight {
        iter.fold(Weight::ZERO, Add::add)
    }
}

macro_rules! string_serde {
    ($ty:ty, $parse:expr) => {
        impl Serialize for $ty {
            fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
                serializer.collect_str(self)
            }
        }

        impl<'de> Deserialize<'de> for $ty {
            fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
                let s = String::deserialize(deserializer)?;
                $parse(&s).map_err(serde::de::Error::custom)
            }
        }
    };
}

string_serde!(Money, str::parse::<Money>);
string_serde!(Clicks, str::parse::<Clicks>);
string_serde!(Weight, Weight::parse);
