//! Social discount rate construction: the time-preference (STPR) and
//! opportunity-cost (SOC) conventions, declining term structures, and the
//! built-in reference rates used throughout the test suite.
//!
//! STPR arithmetic runs on [`Decimal`] so that published parameterizations
//! reproduce exactly; term structures used for discounting carry `f64`
//! rates because the factor math is exponential.

use std::fmt;
use std::sync::OnceLock;

use rust_decimal::Decimal;
use rust_decimal_macros::dec;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How a social discount rate was derived.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RateMethod {
    /// Social time preference rate (Ramsey-rule construction).
    #[serde(rename = "STPR")]
    Stpr,
    /// Social opportunity cost of capital.
    #[serde(rename = "SOC")]
    Soc,
    /// Left to market forces rather than set by formula.
    #[serde(rename = "market-driven")]
    MarketDriven,
}

impl fmt::Display for RateMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RateMethod::Stpr => f.write_str("STPR"),
            RateMethod::Soc => f.write_str("SOC"),
            RateMethod::MarketDriven => f.write_str("market-driven"),
        }
    }
}

/// A per-year rate together with the convention that produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedRate {
    pub rate: Decimal,
    pub method: RateMethod,
}

// ---------------------------------------------------------------------------
// STPR parameters
// ---------------------------------------------------------------------------

/// Upper edge of the recommended band for the pure-time-preference
/// component (0 to 1% per year).
pub fn delta_band_upper() -> Decimal {
    dec!(0.01)
}

/// Inputs to the time-preference construction `r = (delta + hazard) + mu * growth`.
///
/// All four components are per-year decimal fractions except `mu`, which is
/// the dimensionless elasticity of marginal utility of consumption.
/// Negative components are rejected at construction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "StprParamsRaw", into = "StprParamsRaw")]
pub struct StprParams {
    delta: Decimal,
    hazard: Decimal,
    mu: Decimal,
    growth: Decimal,
}

#[derive(Serialize, Deserialize)]
struct StprParamsRaw {
    delta: Decimal,
    hazard: Decimal,
    mu: Decimal,
    growth: Decimal,
}

impl TryFrom<StprParamsRaw> for StprParams {
    type Error = Error;

    fn try_from(raw: StprParamsRaw) -> Result<Self> {
        StprParams::new(raw.delta, raw.hazard, raw.mu, raw.growth)
    }
}

impl From<StprParams> for StprParamsRaw {
    fn from(p: StprParams) -> Self {
        StprParamsRaw {
            delta: p.delta,
            hazard: p.hazard,
            mu: p.mu,
            growth: p.growth,
        }
    }
}

impl StprParams {
    pub fn new(delta: Decimal, hazard: Decimal, mu: Decimal, growth: Decimal) -> Result<Self> {
        for (name, value) in [
            ("delta", delta),
            ("hazard", hazard),
            ("mu", mu),
            ("growth", growth),
        ] {
            if value.is_sign_negative() && !value.is_zero() {
                return Err(Error::invalid(format!("{name} must be >= 0, got {value}")));
            }
        }
        Ok(StprParams {
            delta,
            hazard,
            mu,
            growth,
        })
    }

    pub fn delta(&self) -> Decimal {
        self.delta
    }

    pub fn hazard(&self) -> Decimal {
        self.hazard
    }

    pub fn mu(&self) -> Decimal {
        self.mu
    }

    pub fn growth(&self) -> Decimal {
        self.growth
    }

    /// Advisory check: pure time preference within the recommended
    /// 0–1% band. Out-of-band values are allowed, merely flagged.
    pub fn delta_within_recommended_band(&self) -> bool {
        self.delta >= Decimal::ZERO && self.delta <= delta_band_upper()
    }
}

/// Time-preference rate: `(delta + hazard) + mu * growth`, exact in
/// decimal arithmetic.
pub fn stpr(params: &StprParams) -> Decimal {
    (params.delta + params.hazard) + params.mu * params.growth
}

/// The hazard component estimated as annual deaths over population.
pub fn mortality_hazard(deaths: u64, population: u64) -> Result<Decimal> {
    if population == 0 {
        return Err(Error::invalid("population must be > 0"));
    }
    if deaths > population {
        return Err(Error::invalid(format!(
            "deaths ({deaths}) cannot exceed population ({population})"
        )));
    }
    Ok(Decimal::from(deaths) / Decimal::from(population))
}

/// Tags a pre-tax marginal return as an opportunity-cost rate.
///
/// There is no formula under this convention; the operation validates the
/// input and records its provenance.
pub fn soc_rate(pretax_marginal_return: Decimal) -> Result<TaggedRate> {
    if pretax_marginal_return.is_sign_negative() && !pretax_marginal_return.is_zero() {
        return Err(Error::invalid(format!(
            "pre-tax marginal return must be >= 0, got {pretax_marginal_return}"
        )));
    }
    Ok(TaggedRate {
        rate: pretax_marginal_return,
        method: RateMethod::Soc,
    })
}

// ---------------------------------------------------------------------------
// Rate schedules
// ---------------------------------------------------------------------------

/// One piece of a piecewise-constant term structure: `rate` applies from
/// `start_year` until the next segment starts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub start_year: f64,
    pub rate: f64,
}

/// A term structure of annual real discount rates. Flat schedules are a
/// single segment starting at year 0; declining schedules list each step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Segment>", into = "Vec<Segment>")]
pub struct RateSchedule {
    segments: Vec<Segment>,
}

impl TryFrom<Vec<Segment>> for RateSchedule {
    type Error = Error;

    fn try_from(segments: Vec<Segment>) -> Result<Self> {
        RateSchedule::new(segments)
    }
}

impl From<RateSchedule> for Vec<Segment> {
    fn from(schedule: RateSchedule) -> Self {
        schedule.segments
    }
}

impl RateSchedule {
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::invalid("schedule needs at least one segment"));
        }
        if segments[0].start_year != 0.0 {
            return Err(Error::invalid(format!(
                "first segment must start at year 0, got {}",
                segments[0].start_year
            )));
        }
        for segment in &segments {
            if !segment.start_year.is_finite() || !segment.rate.is_finite() {
                return Err(Error::invalid("segment fields must be finite"));
            }
            if segment.rate < 0.0 {
                return Err(Error::invalid(format!(
                    "segment rate must be >= 0, got {}",
                    segment.rate
                )));
            }
        }
        for pair in segments.windows(2) {
            if pair[1].start_year <= pair[0].start_year {
                return Err(Error::invalid(
                    "segment start years must be strictly increasing",
                ));
            }
        }
        Ok(RateSchedule { segments })
    }

    pub fn flat(rate: f64) -> Result<Self> {
        RateSchedule::new(vec![Segment {
            start_year: 0.0,
            rate,
        }])
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// The rate applying at the start of the schedule.
    pub fn initial_rate(&self) -> f64 {
        self.segments[0].rate
    }

    /// The rate of the segment whose left-closed interval
    /// `[start_year, next start_year)` contains `t`.
    pub fn rate_at(&self, t: f64) -> Result<f64> {
        if !t.is_finite() || t < 0.0 {
            return Err(Error::invalid(format!("t must be >= 0, got {t}")));
        }
        let mut rate = self.segments[0].rate;
        for segment in &self.segments {
            if segment.start_year <= t {
                rate = segment.rate;
            } else {
                break;
            }
        }
        Ok(rate)
    }
}

// ---------------------------------------------------------------------------
// Reference rates
// ---------------------------------------------------------------------------

/// A jurisdiction's discount rate in a given calendar year.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RateRecord {
    pub jurisdiction: String,
    pub year: i32,
    pub rate: Decimal,
    pub method: RateMethod,
}

impl RateRecord {
    pub fn new(
        jurisdiction: impl Into<String>,
        year: i32,
        rate: Decimal,
        method: RateMethod,
    ) -> Result<Self> {
        if !(dec!(0)..=dec!(0.20)).contains(&rate) {
            return Err(Error::invalid(format!(
                "reference rate must lie in [0, 0.20], got {rate}"
            )));
        }
        if !(1960..=2030).contains(&year) {
            return Err(Error::invalid(format!(
                "reference year must lie in [1960, 2030], got {year}"
            )));
        }
        Ok(RateRecord {
            jurisdiction: jurisdiction.into(),
            year,
            rate,
            method,
        })
    }
}

/// Built-in reference rates: the UK timeline of rate changes plus the
/// country snapshot recorded in 2007. The 2003 entry marks the switch to
/// the time-preference method.
pub fn reference_rates() -> &'static [RateRecord] {
    static RATES: OnceLock<Vec<RateRecord>> = OnceLock::new();
    RATES.get_or_init(|| {
        let rec = |j: &str, y: i32, r: Decimal, m: RateMethod| {
            RateRecord::new(j, y, r, m).expect("fixture record is valid")
        };
        vec![
            rec("UK", 1967, dec!(0.08), RateMethod::Soc),
            rec("UK", 1969, dec!(0.10), RateMethod::Soc),
            rec("UK", 1978, dec!(0.05), RateMethod::MarketDriven),
            rec("UK", 1989, dec!(0.06), RateMethod::Soc),
            rec("UK", 2003, dec!(0.035), RateMethod::Stpr),
            rec("India", 2007, dec!(0.12), RateMethod::Soc),
            rec("Pakistan", 2007, dec!(0.12), RateMethod::Soc),
            rec("Philippines", 2007, dec!(0.15), RateMethod::Soc),
            rec("Italy", 2007, dec!(0.05), RateMethod::Stpr),
            rec("Spain", 2007, dec!(0.06), RateMethod::Stpr),
            rec("Norway", 2007, dec!(0.035), RateMethod::MarketDriven),
            rec("Germany", 2007, dec!(0.03), RateMethod::MarketDriven),
        ]
    })
}

/// Looks up the stored record for a jurisdiction and year. Jurisdiction
/// matching ignores ASCII case; the year must match exactly.
pub fn lookup_reference_rate(jurisdiction: &str, year: i32) -> Result<&'static RateRecord> {
    reference_rates()
        .iter()
        .find(|r| r.jurisdiction.eq_ignore_ascii_case(jurisdiction) && r.year == year)
        .ok_or_else(|| Error::NotFound(format!("no reference rate for {jurisdiction} in {year}")))
}
