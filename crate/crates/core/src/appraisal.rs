//! Procurement appraisal: side-by-side NPV comparison of a privately
//! financed option against the public sector comparator across a sweep of
//! discount rates, value-for-money verdicts, breakeven-rate search, and
//! reconstruction of level-payment profiles from a published NPV.
//!
//! Costs are positive amounts throughout, and the option with the lower
//! cost NPV wins. The difference column is oriented "in favour of PFI":
//! positive means the comparator is dearer.

use rust_decimal::prelude::FromPrimitive;
use rust_decimal::Decimal;
use rust_decimal_macros::dec;

use crate::cashflow::{npv, CashFlowEntry, CashFlowSeries, Compounding};
use crate::error::{Error, Result};
use crate::money::{Currency, Money};
use crate::rates::RateSchedule;

/// Which side of the comparison an option sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptionKind {
    Pfi,
    Psc,
}

/// A costed procurement option. Only the comparator may carry a risk
/// adjustment: transferring risk to the contractor is the private
/// option's premise.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcurementOption {
    name: String,
    kind: OptionKind,
    series: CashFlowSeries,
    risk_adjustment: Option<CashFlowSeries>,
}

impl ProcurementOption {
    pub fn new(
        name: impl Into<String>,
        kind: OptionKind,
        series: CashFlowSeries,
        risk_adjustment: Option<CashFlowSeries>,
    ) -> Result<Self> {
        if kind == OptionKind::Pfi {
            if let Some(adjustment) = &risk_adjustment {
                if !adjustment.is_empty() {
                    return Err(Error::invalid(
                        "a PFI option cannot carry a risk adjustment",
                    ));
                }
            }
        }
        if let Some(adjustment) = &risk_adjustment {
            if adjustment.currency() != series.currency() {
                return Err(Error::CurrencyMismatch {
                    left: series.currency().code().to_string(),
                    right: adjustment.currency().code().to_string(),
                });
            }
        }
        Ok(ProcurementOption {
            name: name.into(),
            kind,
            series,
            risk_adjustment,
        })
    }

    pub fn pfi(name: impl Into<String>, series: CashFlowSeries) -> Result<Self> {
        ProcurementOption::new(name, OptionKind::Pfi, series, None)
    }

    pub fn psc(
        name: impl Into<String>,
        series: CashFlowSeries,
        risk_adjustment: Option<CashFlowSeries>,
    ) -> Result<Self> {
        ProcurementOption::new(name, OptionKind::Psc, series, risk_adjustment)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> OptionKind {
        self.kind
    }

    pub fn series(&self) -> &CashFlowSeries {
        &self.series
    }

    pub fn risk_adjustment(&self) -> Option<&CashFlowSeries> {
        self.risk_adjustment.as_ref()
    }

    /// The series actually priced: base costs plus any risk adjustment.
    pub fn total_series(&self) -> Result<CashFlowSeries> {
        match &self.risk_adjustment {
            Some(adjustment) => self.series.merge(adjustment),
            None => Ok(self.series.clone()),
        }
    }
}

// ---------------------------------------------------------------------------
// Comparison table
// ---------------------------------------------------------------------------

/// One rate's worth of comparison: both NPVs and the difference in favour
/// of PFI (`npv_psc - npv_pfi`, maintained exactly).
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    rate: f64,
    npv_pfi: Money,
    npv_psc: Money,
    difference: Money,
}

impl ComparisonRow {
    pub fn from_npvs(rate: f64, npv_pfi: Money, npv_psc: Money) -> Result<Self> {
        if !rate.is_finite() || rate < 0.0 {
            return Err(Error::invalid(format!("rate must be >= 0, got {rate}")));
        }
        let difference = npv_psc.checked_sub(&npv_pfi)?;
        Ok(ComparisonRow {
            rate,
            npv_pfi,
            npv_psc,
            difference,
        })
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn npv_pfi(&self) -> &Money {
        &self.npv_pfi
    }

    pub fn npv_psc(&self) -> &Money {
        &self.npv_psc
    }

    pub fn difference_in_favour_of_pfi(&self) -> &Money {
        &self.difference
    }
}

/// Rows in the caller's rate order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ComparisonTable {
    rows: Vec<ComparisonRow>,
}

impl ComparisonTable {
    pub fn new(rows: Vec<ComparisonRow>) -> Self {
        ComparisonTable { rows }
    }

    pub fn rows(&self) -> &[ComparisonRow] {
        &self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Emits the exact CSV interface: header
    /// `rate,npv_pfi,npv_psc,difference_in_favour_of_pfi`, amounts at four
    /// fractional digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("rate,npv_pfi,npv_psc,difference_in_favour_of_pfi\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{}\n",
                row.rate,
                row.npv_pfi.amount_string(),
                row.npv_psc.amount_string(),
                row.difference.amount_string(),
            ));
        }
        out
    }

    /// Parses the CSV interface back. The difference column must equal
    /// `npv_psc - npv_pfi` exactly; anything else is rejected.
    pub fn parse_csv(text: &str, currency: &Currency) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let header = loop {
            match lines.next() {
                Some((idx, raw)) => {
                    let line = raw.strip_suffix('\r').unwrap_or(raw);
                    if line.trim().is_empty() {
                        continue;
                    }
                    break (idx + 1, line);
                }
                None => return Err(Error::parse(1, "missing header line")),
            }
        };
        if header.1 != "rate,npv_pfi,npv_psc,difference_in_favour_of_pfi" {
            return Err(Error::parse(
                header.0,
                "expected header `rate,npv_pfi,npv_psc,difference_in_favour_of_pfi`",
            ));
        }

        let mut rows = Vec::new();
        for (idx, raw) in lines {
            let line_no = idx + 1;
            let line = raw.strip_suffix('\r').unwrap_or(raw);
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 4 {
                return Err(Error::parse(
                    line_no,
                    format!("expected 4 fields, got {}", fields.len()),
                ));
            }
            let rate: f64 = fields[0]
                .parse()
                .map_err(|_| Error::parse(line_no, format!("invalid rate {:?}", fields[0])))?;
            let parse_money = |field: &str| -> Result<Money> {
                let amount: Decimal = field
                    .parse()
                    .map_err(|_| Error::parse(line_no, format!("invalid amount {field:?}")))?;
                Ok(Money::new(amount, currency.clone()))
            };
            let row = ComparisonRow::from_npvs(rate, parse_money(fields[1])?, parse_money(fields[2])?)?;
            let stated = parse_money(fields[3])?;
            if &stated != row.difference_in_favour_of_pfi() {
                return Err(Error::invalid(format!(
                    "difference column must equal npv_psc - npv_pfi exactly (line {line_no}: stated {}, computed {})",
                    stated.amount_string(),
                    row.difference_in_favour_of_pfi().amount_string(),
                )));
            }
            rows.push(row);
        }
        Ok(ComparisonTable::new(rows))
    }
}

/// The published Carlisle hospital comparison: six (rate, PFI NPV,
/// PSC NPV) triples in GBP millions.
pub fn carlisle_table() -> ComparisonTable {
    let gbp = Currency::new("GBP").expect("GBP is a valid code");
    let rows = [
        (0.06, dec!(173.1), dec!(174.3)),
        (0.055, dec!(186.7), dec!(185.8)),
        (0.05, dec!(202.0), dec!(198.8)),
        (0.045, dec!(219.5), dec!(213.9)),
        (0.04, dec!(239.3), dec!(231.2)),
        (0.03, dec!(288.6), dec!(275.0)),
    ]
    .into_iter()
    .map(|(rate, pfi, psc)| {
        ComparisonRow::from_npvs(
            rate,
            Money::new(pfi, gbp.clone()),
            Money::new(psc, gbp.clone()),
        )
        .expect("fixture row is valid")
    })
    .collect();
    ComparisonTable::new(rows)
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

fn check_pair(pfi: &ProcurementOption, psc: &ProcurementOption) -> Result<()> {
    if pfi.kind() != OptionKind::Pfi || psc.kind() != OptionKind::Psc {
        return Err(Error::invalid(
            "compare takes one PFI option and one PSC option, in that order",
        ));
    }
    if pfi.series().currency() != psc.series().currency() {
        return Err(Error::CurrencyMismatch {
            left: pfi.series().currency().code().to_string(),
            right: psc.series().currency().code().to_string(),
        });
    }
    Ok(())
}

/// One comparison row per rate, in the given order. The comparator is
/// priced on its series plus risk adjustment.
pub fn compare(
    pfi: &ProcurementOption,
    psc: &ProcurementOption,
    rates: &[f64],
    compounding: Compounding,
) -> Result<ComparisonTable> {
    check_pair(pfi, psc)?;
    if rates.is_empty() {
        return Err(Error::invalid("rates must be non-empty"));
    }
    let pfi_series = pfi.total_series()?;
    let psc_series = psc.total_series()?;
    let mut rows = Vec::with_capacity(rates.len());
    for &rate in rates {
        if !rate.is_finite() || rate < 0.0 {
            return Err(Error::invalid(format!("rate must be >= 0, got {rate}")));
        }
        let schedule = RateSchedule::flat(rate)?;
        let npv_pfi = npv(&pfi_series, &schedule, compounding)?;
        let npv_psc = npv(&psc_series, &schedule, compounding)?;
        rows.push(ComparisonRow::from_npvs(rate, npv_pfi, npv_psc)?);
    }
    Ok(ComparisonTable::new(rows))
}

/// Which option a row selects.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selection {
    Pfi,
    Psc,
    Tie,
}

impl std::fmt::Display for Selection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Selection::Pfi => f.write_str("PFI"),
            Selection::Psc => f.write_str("PSC"),
            Selection::Tie => f.write_str("tie"),
        }
    }
}

/// A value-for-money verdict: the lower-cost option and the margin.
#[derive(Debug, Clone, PartialEq)]
pub struct VfmVerdict {
    pub selected: Selection,
    pub margin: Money,
}

/// Lower cost NPV wins; exact ties at money resolution stay ties rather
/// than silently defaulting to either option.
pub fn verdict(row: &ComparisonRow) -> VfmVerdict {
    let difference = row.difference_in_favour_of_pfi();
    let selected = if difference.is_zero() {
        Selection::Tie
    } else if difference.amount().is_sign_positive() {
        Selection::Pfi
    } else {
        Selection::Psc
    };
    VfmVerdict {
        selected,
        margin: difference.abs(),
    }
}

const BREAKEVEN_MAX_ITERATIONS: usize = 200;

/// Default bracket-width tolerance for [`breakeven_rate`], per year.
pub const DEFAULT_BREAKEVEN_TOL: f64 = 1e-6;

fn difference_at(
    pfi_series: &CashFlowSeries,
    psc_series: &CashFlowSeries,
    rate: f64,
    compounding: Compounding,
) -> Result<Money> {
    let schedule = RateSchedule::flat(rate)?;
    npv(psc_series, &schedule, compounding)?.checked_sub(&npv(pfi_series, &schedule, compounding)?)
}

/// Midpoint bisection for the flat rate where the two options cost the
/// same. Requires the difference to change sign across the bracket; stops
/// when the difference vanishes at money resolution or the bracket is no
/// wider than `tol`.
pub fn breakeven_rate(
    pfi: &ProcurementOption,
    psc: &ProcurementOption,
    bracket: (f64, f64),
    compounding: Compounding,
    tol: f64,
) -> Result<f64> {
    check_pair(pfi, psc)?;
    let (mut lo, mut hi) = bracket;
    if !lo.is_finite() || !hi.is_finite() || lo < 0.0 || hi <= lo {
        return Err(Error::invalid(format!(
            "bracket must satisfy 0 <= low < high, got ({lo}, {hi})"
        )));
    }
    if !tol.is_finite() || tol <= 0.0 {
        return Err(Error::invalid(format!("tol must be > 0, got {tol}")));
    }

    let pfi_series = pfi.total_series()?;
    let psc_series = psc.total_series()?;
    let at = |rate: f64| difference_at(&pfi_series, &psc_series, rate, compounding);

    let d_lo = at(lo)?;
    let d_hi = at(hi)?;
    if d_lo.is_zero() || d_hi.is_zero() {
        return Err(Error::NoSignChange);
    }
    let lo_negative = d_lo.amount().is_sign_negative();
    if lo_negative == d_hi.amount().is_sign_negative() {
        return Err(Error::NoSignChange);
    }

    for _ in 0..BREAKEVEN_MAX_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        let d_mid = at(mid)?;
        if d_mid.is_zero() {
            return Ok(mid);
        }
        if d_mid.amount().is_sign_negative() == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= tol {
            return Ok(0.5 * (lo + hi));
        }
    }
    Err(Error::NoConvergence {
        iterations: BREAKEVEN_MAX_ITERATIONS,
    })
}

/// A level payment at t = 1..=horizon whose NPV at the given flat rate
/// equals `target_npv`. The payment keeps full decimal precision so the
/// NPV round-trips to the target within money resolution.
pub fn fit_annuity(
    target_npv: &Money,
    rate: f64,
    horizon: u32,
    compounding: Compounding,
) -> Result<CashFlowSeries> {
    if horizon < 1 {
        return Err(Error::invalid("horizon must be >= 1"));
    }
    if !rate.is_finite() || rate < 0.0 {
        return Err(Error::invalid(format!("rate must be >= 0, got {rate}")));
    }
    let schedule = RateSchedule::flat(rate)?;
    let mut annuity_factor = Decimal::ZERO;
    for t in 1..=horizon {
        let factor = crate::cashflow::discount_factor(&schedule, t as f64, compounding)?;
        annuity_factor += Decimal::from_f64(factor)
            .ok_or_else(|| Error::invalid(format!("discount factor {factor} not representable")))?;
    }
    let payment = target_npv
        .amount()
        .checked_div(annuity_factor)
        .ok_or_else(|| Error::invalid("annuity payment overflow"))?;
    let entries = (1..=horizon)
        .map(|t| CashFlowEntry {
            t: t as f64,
            amount: payment,
        })
        .collect();
    CashFlowSeries::new(target_npv.currency().clone(), entries)
}
