//! Dated money amounts and their present value under flat or declining
//! rate schedules, with discrete-annual or continuous compounding.
//!
//! Discount factors are `f64`; amounts stay in decimal arithmetic and the
//! result is rounded half-even to money resolution exactly once, at the
//! end.

use rust_decimal::prelude::FromPrimitive;
use rust_decimal::Decimal;

use crate::error::{Error, Result};
use crate::money::{Currency, Money};
use crate::rates::RateSchedule;

/// How per-year rates convert into discount factors.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, clap::ValueEnum)]
pub enum Compounding {
    /// `(1 + r)^(-t)`; the default, matching standard appraisal practice.
    #[default]
    #[value(alias = "discrete")]
    DiscreteAnnual,
    /// `exp(-r t)`; reproduces the published very-long-horizon figures.
    Continuous,
}

/// One dated amount: `t` years from the valuation date.
#[derive(Debug, Clone, PartialEq)]
pub struct CashFlowEntry {
    pub t: f64,
    pub amount: Decimal,
}

/// A single-currency sequence of dated amounts, kept sorted by time.
/// Duplicate times are allowed and simply sum on evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct CashFlowSeries {
    currency: Currency,
    entries: Vec<CashFlowEntry>,
}

impl CashFlowSeries {
    /// Validates times and sorts entries (stably) by `t`.
    pub fn new(currency: Currency, mut entries: Vec<CashFlowEntry>) -> Result<Self> {
        for entry in &entries {
            if !entry.t.is_finite() || entry.t < 0.0 {
                return Err(Error::invalid(format!(
                    "entry t must be finite and >= 0, got {}",
                    entry.t
                )));
            }
        }
        entries.sort_by(|a, b| a.t.partial_cmp(&b.t).expect("times are finite"));
        Ok(CashFlowSeries { currency, entries })
    }

    /// A one-entry series.
    pub fn single(currency: Currency, t: f64, amount: Decimal) -> Result<Self> {
        CashFlowSeries::new(currency, vec![CashFlowEntry { t, amount }])
    }

    pub fn currency(&self) -> &Currency {
        &self.currency
    }

    pub fn entries(&self) -> &[CashFlowEntry] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// The union of two same-currency series.
    pub fn merge(&self, other: &CashFlowSeries) -> Result<CashFlowSeries> {
        if self.currency != other.currency {
            return Err(Error::CurrencyMismatch {
                left: self.currency.code().to_string(),
                right: other.currency.code().to_string(),
            });
        }
        let mut entries = self.entries.clone();
        entries.extend(other.entries.iter().cloned());
        CashFlowSeries::new(self.currency.clone(), entries)
    }

    /// Parses the cash-flow CSV schema: header `t,amount` or
    /// `t,amount,label`, `#`-prefixed comment lines ignored, amounts with
    /// at most four fractional digits. The currency is not part of the
    /// file format and is supplied by the caller.
    pub fn parse_csv(text: &str, currency: Currency) -> Result<Self> {
        let mut has_label = None;
        let mut entries = Vec::new();
        let mut last_line = 0;

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            last_line = line_no;
            let line = raw.strip_suffix('\r').unwrap_or(raw);
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }

            let Some(with_label) = has_label else {
                has_label = match line {
                    "t,amount" => Some(false),
                    "t,amount,label" => Some(true),
                    _ => {
                        return Err(Error::parse(
                            line_no,
                            "expected header `t,amount` or `t,amount,label`",
                        ))
                    }
                };
                continue;
            };

            let fields: Vec<&str> = line.split(',').collect();
            let expected = if with_label { 2..=3 } else { 2..=2 };
            if !expected.contains(&fields.len()) {
                return Err(Error::parse(
                    line_no,
                    format!("expected {} fields, got {}", if with_label { "2-3" } else { "2" }, fields.len()),
                ));
            }

            let t: f64 = fields[0]
                .parse()
                .map_err(|_| Error::parse(line_no, format!("invalid t {:?}", fields[0])))?;
            let amount: Decimal = fields[1]
                .parse()
                .map_err(|_| Error::parse(line_no, format!("invalid amount {:?}", fields[1])))?;
            if amount.normalize().scale() > 4 {
                return Err(Error::parse(
                    line_no,
                    format!("amount {amount} has more than 4 fractional digits"),
                ));
            }
            if !t.is_finite() || t < 0.0 {
                return Err(Error::invalid(format!(
                    "entry t must be finite and >= 0, got {t} (line {line_no})"
                )));
            }
            entries.push(CashFlowEntry { t, amount });
        }

        if has_label.is_none() {
            return Err(Error::parse(last_line.max(1), "missing header line"));
        }
        CashFlowSeries::new(currency, entries)
    }
}

/// The present-value factor for an amount `t` years out.
///
/// Under a declining schedule the exponent accumulates segment by segment
/// (forward-rate reading): continuous `exp(-sum r_i dt_i)`, discrete
/// `prod (1 + r_i)^(-dt_i)`, where `dt_i` is the time spent inside
/// segment `i` up to `t`.
pub fn discount_factor(schedule: &RateSchedule, t: f64, compounding: Compounding) -> Result<f64> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::invalid(format!("t must be finite and >= 0, got {t}")));
    }
    let segments = schedule.segments();
    match compounding {
        Compounding::Continuous => {
            let mut exponent = 0.0;
            for (i, segment) in segments.iter().enumerate() {
                let end = segments.get(i + 1).map_or(t, |next| next.start_year.min(t));
                let dt = (end - segment.start_year).max(0.0);
                exponent += segment.rate * dt;
            }
            Ok((-exponent).exp())
        }
        Compounding::DiscreteAnnual => {
            let mut factor = 1.0;
            for (i, segment) in segments.iter().enumerate() {
                let end = segments.get(i + 1).map_or(t, |next| next.start_year.min(t));
                let dt = (end - segment.start_year).max(0.0);
                factor *= (1.0 + segment.rate).powf(-dt);
            }
            Ok(factor)
        }
    }
}

/// Net present value: each amount weighted by its discount factor, summed
/// in decimal arithmetic, rounded half-even to money resolution once.
pub fn npv(
    series: &CashFlowSeries,
    schedule: &RateSchedule,
    compounding: Compounding,
) -> Result<Money> {
    let mut sum = Decimal::ZERO;
    for entry in series.entries() {
        let factor = discount_factor(schedule, entry.t, compounding)?;
        let factor = Decimal::from_f64(factor)
            .ok_or_else(|| Error::invalid(format!("discount factor {factor} not representable")))?;
        let term = entry
            .amount
            .checked_mul(factor)
            .ok_or_else(|| Error::invalid("present-value term overflow"))?;
        sum = sum
            .checked_add(term)
            .ok_or_else(|| Error::invalid("present-value sum overflow"))?;
    }
    Ok(Money::new(sum, series.currency().clone()))
}
