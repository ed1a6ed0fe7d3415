//! Exact dyadic time values.
//!
//! Timestamps, delays and clock values are non-negative dyadic rationals
//! stored as fixed-point `Q32.32` in a `u64`. Guard satisfaction at
//! boundaries (`c >= 5` at exactly 5) is therefore exact, and every value
//! renders as a finite decimal.

use std::fmt;
use std::ops::{Add, AddAssign, Sub};

const FRAC_BITS: u32 = 32;
const FRAC_MASK: u64 = (1 << FRAC_BITS) - 1;

/// A non-negative dyadic point in time (or duration), in time units.
#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Time(u64);

impl Time {
    pub const ZERO: Time = Time(0);

    /// Largest representable value; used as an "unbounded" horizon.
    pub const MAX: Time = Time(u64::MAX);

    /// Whole time units.
    pub fn from_units(units: u64) -> Time {
        assert!(units < (1 << FRAC_BITS), "time value out of range: {units}");
        Time(units << FRAC_BITS)
    }

    /// Half time units: `from_halves(15)` is 7.5.
    pub fn from_halves(halves: u64) -> Time {
        assert!(halves < (1 << (FRAC_BITS + 1)), "time value out of range");
        Time(halves << (FRAC_BITS - 1))
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub fn checked_add(self, rhs: Time) -> Option<Time> {
        self.0.checked_add(rhs.0).map(Time)
    }

    /// `self - rhs`, clamped at zero.
    pub fn saturating_sub(self, rhs: Time) -> Time {
        Time(self.0.saturating_sub(rhs.0))
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64 / (1u64 << FRAC_BITS) as f64
    }

    /// Parses a decimal literal such as `"7"`, `"7.5"` or `"0.25"`.
    ///
    /// The value must be non-negative and exactly representable as a dyadic
    /// with at most 32 fractional bits.
    pub fn parse(s: &str) -> Result<Time, TimeParseError> {
        let s = s.trim();
        if s.is_empty() || s.starts_with('+') || s.starts_with('-') {
            return Err(TimeParseError::Malformed(s.to_string()));
        }
        let (int_part, frac_part) = match s.split_once('.') {
            Some((i, f)) => (i, f),
            None => (s, ""),
        };
        if int_part.is_empty() || !int_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(TimeParseError::Malformed(s.to_string()));
        }
        if !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(TimeParseError::Malformed(s.to_string()));
        }
        let units: u64 = int_part
            .parse()
            .map_err(|_| TimeParseError::Malformed(s.to_string()))?;
        if units >= (1 << FRAC_BITS) {
            return Err(TimeParseError::OutOfRange(s.to_string()));
        }
        let mut raw = units << FRAC_BITS;
        if !frac_part.is_empty() {
            if frac_part.len() > 10 {
                return Err(TimeParseError::NotDyadic(s.to_string()));
            }
            let digits: u128 = frac_part.parse().unwrap();
            let denom: u128 = 10u128.pow(frac_part.len() as u32);
            let scaled = digits << FRAC_BITS;
            if !scaled.is_multiple_of(denom) {
                return Err(TimeParseError::NotDyadic(s.to_string()));
            }
            raw |= (scaled / denom) as u64;
        }
        Ok(Time(raw))
    }
}

impl Add for Time {
    type Output = Time;
    fn add(self, rhs: Time) -> Time {
        Time(self.0.checked_add(rhs.0).expect("time overflow"))
    }
}

impl AddAssign for Time {
    fn add_assign(&mut self, rhs: Time) {
        *self = *self + rhs;
    }
}

impl Sub for Time {
    type Output = Time;
    fn sub(self, rhs: Time) -> Time {
        Time(self.0.checked_sub(rhs.0).expect("time underflow"))
    }
}

impl fmt::Display for Time {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let units = self.0 >> FRAC_BITS;
        let mut frac = self.0 & FRAC_MASK;
        if frac == 0 {
            return write!(f, "{units}");
        }
        // Dyadic fractions have a finite decimal expansion.
        let mut digits = String::new();
        while frac != 0 {
            frac *= 10;
            digits.push(char::from(b'0' + (frac >> FRAC_BITS) as u8));
            frac &= FRAC_MASK;
        }
        write!(f, "{units}.{digits}")
    }
}

impl fmt::Debug for Time {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TimeParseError {
    Malformed(String),
    OutOfRange(String),
    NotDyadic(String),
}

impl fmt::Display for TimeParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimeParseError::Malformed(s) => write!(f, "malformed time value {s:?}"),
            TimeParseError::OutOfRange(s) => write!(f, "time value out of range: {s}"),
            TimeParseError::NotDyadic(s) => {
                write!(f, "time value {s} is not an exact dyadic")
            }
        }
    }
}

impl std::error::Error for TimeParseError {}
