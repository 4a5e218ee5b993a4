//! Exact decimal values for rates.
//!
//! Rates travel through files as decimal percentages and are stored as
//! `f64` fractions. Converting between the two by shifting the decimal
//! point in text (rather than multiplying by 100 in binary) keeps the
//! round trip exact, and lets per-region head counts be rounded on the
//! decimal value the user actually wrote.

use std::fmt;

/// A non-negative decimal `digits / 10^scale`, kept with no trailing zeros
/// in `digits` unless it is zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Decimal {
    digits: u128,
    scale: u32,
}

impl Decimal {
    pub const ZERO: Decimal = Decimal { digits: 0, scale: 0 };

    fn normalized(mut digits: u128, mut scale: u32) -> Decimal {
        if digits == 0 {
            return Decimal::ZERO;
        }
        while scale > 0 && digits % 10 == 0 {
            digits /= 10;
            scale -= 1;
        }
        Decimal { digits, scale }
    }

    /// Parses plain decimal notation (`65`, `65.0`, `.5`, `+3.25`).
    /// Negative values, exponents and anything else yield `None`.
    pub fn parse(s: &str) -> Option<Decimal> {
        let s = s.trim();
        let s = s.strip_prefix('+').unwrap_or(s);
        let (int, frac) = match s.split_once('.') {
            Some((i, f)) => (i, f),
            None => (s, ""),
        };
        if int.is_empty() && frac.is_empty() {
            return None;
        }
        if !int.bytes().all(|b| b.is_ascii_digit()) || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let mut digits: u128 = 0;
        for b in int.bytes().chain(frac.bytes()) {
            digits = digits.checked_mul(10)?.checked_add(u128::from(b - b'0'))?;
        }
        Some(Decimal::normalized(digits, u32::try_from(frac.len()).ok()?))
    }

    /// The shortest decimal that reads back as `x`.
    pub fn from_f64(x: f64) -> Option<Decimal> {
        if !x.is_finite() || x < 0.0 {
            return None;
        }
        // `Display` for f64 prints the shortest round-tripping digits and
        // never switches to exponent notation.
        Decimal::parse(&format!("{x}"))
    }

    /// Multiplies by `10^places` (negative places divide).
    pub fn shift(self, places: i32) -> Option<Decimal> {
        if self.digits == 0 {
            return Some(Decimal::ZERO);
        }
        let scale = i64::from(self.scale) - i64::from(places);
        if scale >= 0 {
            Some(Decimal::normalized(self.digits, u32::try_from(scale).ok()?))
        } else {
            let factor = 10u128.checked_pow(u32::try_from(-scale).ok()?)?;
            Some(Decimal::normalized(self.digits.checked_mul(factor)?, 0))
        }
    }

    pub fn to_f64(self) -> f64 {
        // std's float parser is correctly rounded.
        format!("{}e-{}", self.digits, self.scale)
            .parse()
            .expect("digit string is valid float syntax")
    }

    /// `floor(n * self + 1/2)`, computed exactly. `None` on overflow.
    pub fn mul_round_half_up(self, n: u64) -> Option<u64> {
        let denom = 10u128.checked_pow(self.scale)?;
        let numer = self.digits.checked_mul(u128::from(n))?.checked_mul(2)?.checked_add(denom)?;
        u64::try_from(numer / denom.checked_mul(2)?).ok()
    }

    /// Compares against a whole number without rounding.
    pub fn cmp_int(self, v: u64) -> std::cmp::Ordering {
        match 10u128.checked_pow(self.scale).and_then(|d| d.checked_mul(u128::from(v))) {
            Some(scaled) => self.digits.cmp(&scaled),
            None => std::cmp::Ordering::Less,
        }
    }
}

impl fmt::Display for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = self.digits.to_string();
        let scale = self.scale as usize;
        if scale == 0 {
            return f.write_str(&s);
        }
        if s.len() > scale {
            let (i, frac) = s.split_at(s.len() - scale);
            write!(f, "{i}.{frac}")
        } else {
            write!(f, "0.{}{}", "0".repeat(scale - s.len()), s)
        }
    }
}

/// Parses a percentage string into a fraction, exactly.
pub fn percent_to_fraction(pct: &str) -> Option<f64> {
    Decimal::parse(pct)?.shift(-2).map(Decimal::to_f64)
}

/// Formats a fraction as a percentage string, exactly.
pub fn fraction_to_percent(frac: f64) -> String {
    match Decimal::from_f64(frac).and_then(|d| d.shift(2)) {
        Some(d) => d.to_string(),
        None => format!("{}", frac * 100.0),
    }
}
