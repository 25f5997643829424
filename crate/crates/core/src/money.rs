//! Fixed-point money: four fractional digits, half-even rounding, and a
//! currency label that refuses to mix with others.
//!
//! Every operation that produces a [`Money`] rounds exactly once, at the
//! end, so tabulated results are bit-stable across platforms and run
//! orders.

use std::fmt;

use rust_decimal::{Decimal, RoundingStrategy};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of fractional digits carried by [`Money`].
pub const MONEY_SCALE: u32 = 4;

/// One unit in the last place of a [`Money`] amount (10^-4).
pub fn money_resolution() -> Decimal {
    Decimal::new(1, MONEY_SCALE)
}

/// Rounds half-even to [`MONEY_SCALE`] fractional digits.
pub(crate) fn quantize(amount: Decimal) -> Decimal {
    amount.round_dp_with_strategy(MONEY_SCALE, RoundingStrategy::MidpointNearestEven)
}

/// An ISO-style currency code: 1–8 uppercase ASCII letters.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Currency(String);

impl Currency {
    pub fn new(code: impl Into<String>) -> Result<Self> {
        let code = code.into();
        if code.is_empty()
            || code.len() > 8
            || !code.bytes().all(|b| b.is_ascii_uppercase())
        {
            return Err(Error::invalid(format!(
                "currency code must be 1-8 uppercase ASCII letters, got {code:?}"
            )));
        }
        Ok(Currency(code))
    }

    pub fn code(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for Currency {
    type Error = Error;

    fn try_from(value: String) -> Result<Self> {
        Currency::new(value)
    }
}

impl From<Currency> for String {
    fn from(value: Currency) -> Self {
        value.0
    }
}

impl fmt::Display for Currency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A currency-labelled amount held at exactly four fractional digits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Money {
    amount: Decimal,
    currency: Currency,
}

impl Money {
    /// Quantizes `amount` half-even to four fractional digits.
    pub fn new(amount: Decimal, currency: Currency) -> Self {
        Money {
            amount: quantize(amount),
            currency,
        }
    }

    pub fn zero(currency: Currency) -> Self {
        Money::new(Decimal::ZERO, currency)
    }

    pub fn amount(&self) -> Decimal {
        self.amount
    }

    pub fn currency(&self) -> &Currency {
        &self.currency
    }

    pub fn is_zero(&self) -> bool {
        self.amount.is_zero()
    }

    pub fn abs(&self) -> Money {
        Money {
            amount: self.amount.abs(),
            currency: self.currency.clone(),
        }
    }

    pub fn checked_add(&self, other: &Money) -> Result<Money> {
        self.require_same_currency(other)?;
        let amount = self
            .amount
            .checked_add(other.amount)
            .ok_or_else(|| Error::invalid("money addition overflow"))?;
        Ok(Money {
            amount,
            currency: self.currency.clone(),
        })
    }

    pub fn checked_sub(&self, other: &Money) -> Result<Money> {
        self.require_same_currency(other)?;
        let amount = self
            .amount
            .checked_sub(other.amount)
            .ok_or_else(|| Error::invalid("money subtraction overflow"))?;
        Ok(Money {
            amount,
            currency: self.currency.clone(),
        })
    }

    fn require_same_currency(&self, other: &Money) -> Result<()> {
        if self.currency != other.currency {
            return Err(Error::CurrencyMismatch {
                left: self.currency.code().to_string(),
                right: other.currency.code().to_string(),
            });
        }
        Ok(())
    }

    /// The amount rendered with exactly four fractional digits, e.g.
    /// `173.1000`.
    pub fn amount_string(&self) -> String {
        format!("{:.4}", self.amount)
    }
}

impl fmt::Display for Money {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {:.4}", self.currency, self.amount)
    }
}
