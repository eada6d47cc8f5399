use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// US dollars held as integer micro-dollars so products stay exact.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Money {
    micros: i64,
}

impl Money {
    pub const ZERO: Money = Money { micros: 0 };

    pub fn from_cents(cents: i64) -> Self {
        Money { micros: cents * 10_000 }
    }

    pub fn from_micros(micros: i64) -> Self {
        Money { micros }
    }

    pub fn micros(self) -> i64 {
        self.micros
    }

    pub fn dollars(self) -> f64 {
        self.micros as f64 / 1e6
    }

    pub fn checked_mul(self, n: u64) -> Option<Money> {
        i64::try_from(n)
            .ok()
            .and_then(|n| self.micros.checked_mul(n))
            .map(|micros| Money { micros })
    }
}

impl std::str::FromStr for Money {
    type Err = Error;

    /// Parses `"$0.03"`, `"0.03"` or `"3"`; at most six decimals.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::param(format!("`{s}` is not a dollar amount"));
        let t = s.trim();
        let t = t.strip_prefix('$').unwrap_or(t);
        let (whole, frac) = t.split_once('.').unwrap_or((t, ""));
        if whole.is_empty() && frac.is_empty() || frac.len() > 6 {
            return Err(bad());
        }
        if !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let whole: i64 = if whole.is_empty() { 0 } else { whole.parse().map_err(|_| bad())? };
        let frac_micros: i64 = if frac.is_empty() {
            0
        } else {
            format!("{frac:0<6}").parse().map_err(|_| bad())?
        };
        whole
            .checked_mul(1_000_000)
            .and_then(|w| w.checked_add(frac_micros))
            .map(|micros| Money { micros })
            .ok_or_else(bad)
    }
}

impl TryFrom<String> for Money {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Money> for String {
    fn from(m: Money) -> String {
        m.to_string()
    }
}

impl std::fmt::Display for Money {
    /// Cents precision, with extra digits only when sub-cent amounts exist.
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let sign = if self.micros < 0 { "-" } else { "" };
        let abs = self.micros.unsigned_abs();
        let (whole, frac) = (abs / 1_000_000, abs % 1_000_000);
        let mut digits = format!("{frac:06}");
        while digits.len() > 2 && digits.ends_with('0') {
            digits.pop();
        }
        write!(f, "{sign}${whole}.{digits}")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostEstimate {
    pub participants: u64,
    pub cost_per_image_per_participant: Money,
    pub cost_per_image: Money,
}

/// Cost of one image's heatmap: participants × per-participant cost per image.
pub fn cost_estimate(participants: u64, cost_per_image_per_participant: Money) -> Result<CostEstimate> {
    if cost_per_image_per_participant.micros < 0 {
        return Err(Error::param("cost per participant must be non-negative"));
    }
    let cost_per_image = cost_per_image_per_participant
        .checked_mul(participants)
        .ok_or_else(|| Error::param("cost overflows"))?;
    Ok(CostEstimate {
        participants,
        cost_per_image_per_participant,
        cost_per_image,
    })
}
