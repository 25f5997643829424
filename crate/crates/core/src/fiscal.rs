//! PPP liability monitoring: a register of on/off-balance-sheet
//! obligations and guarantees, recognition under cash or accrual bases,
//! debt-to-GDP ratios by scope, and the 150% danger-zone alert.
//!
//! The register is an immutable value; adding an entry produces a new
//! register, so queries never observe partial updates. No write-downs or
//! reversals are modelled, which keeps recognition monotone in time.

use chrono::{Datelike, NaiveDate};
use rust_decimal::prelude::ToPrimitive;
use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::money::{Currency, Money};

/// Whether a liability sits on or off the balance sheet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BalanceSheet {
    #[serde(rename = "on")]
    On,
    #[serde(rename = "off")]
    Off,
}

/// When an obligation is recognized: when paid, or when incurred.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum RecognitionBasis {
    Cash,
    Accrual,
}

/// Which liabilities a ratio counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum BalanceScope {
    OnBalanceOnly,
    IncludeOffBalance,
}

/// A dated repayment against a liability.
#[derive(Debug, Clone, PartialEq)]
pub struct Payment {
    pub date: NaiveDate,
    pub amount: Money,
}

/// One registered liability or guarantee.
///
/// Payments must be positive, dated no earlier than incurrence,
/// non-decreasing in date, and may never overpay the obligation.
#[derive(Debug, Clone, PartialEq)]
pub struct LedgerEntry {
    id: String,
    amount: Money,
    incurred: NaiveDate,
    balance_sheet: BalanceSheet,
    contingent: bool,
    payments: Vec<Payment>,
}

impl LedgerEntry {
    pub fn new(
        id: impl Into<String>,
        amount: Money,
        incurred: NaiveDate,
        balance_sheet: BalanceSheet,
        contingent: bool,
        payments: Vec<Payment>,
    ) -> Result<Self> {
        let id = id.into();
        if id.is_empty() {
            return Err(Error::invalid("entry id must be non-empty"));
        }
        if amount.amount().is_sign_negative() {
            return Err(Error::invalid(format!(
                "entry amount must be >= 0, got {}",
                amount.amount()
            )));
        }
        let mut remaining = amount.amount();
        let mut previous: Option<NaiveDate> = None;
        for payment in &payments {
            if payment.amount.currency() != amount.currency() {
                return Err(Error::CurrencyMismatch {
                    left: amount.currency().code().to_string(),
                    right: payment.amount.currency().code().to_string(),
                });
            }
            let value = payment.amount.amount();
            if value <= Decimal::ZERO {
                return Err(Error::invalid(format!(
                    "payment amounts must be > 0, got {value}"
                )));
            }
            if payment.date < incurred {
                return Err(Error::invalid(format!(
                    "payment on {} predates incurrence on {}",
                    payment.date, incurred
                )));
            }
            if let Some(prev) = previous {
                if payment.date < prev {
                    return Err(Error::invalid("payment dates must be non-decreasing"));
                }
            }
            if value > remaining {
                return Err(Error::invalid(format!(
                    "payment of {value} exceeds remaining unpaid amount {remaining}"
                )));
            }
            remaining -= value;
            previous = Some(payment.date);
        }
        Ok(LedgerEntry {
            id,
            amount,
            incurred,
            balance_sheet,
            contingent,
            payments,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn amount(&self) -> &Money {
        &self.amount
    }

    pub fn incurred(&self) -> NaiveDate {
        self.incurred
    }

    pub fn balance_sheet(&self) -> BalanceSheet {
        self.balance_sheet
    }

    pub fn contingent(&self) -> bool {
        self.contingent
    }

    pub fn payments(&self) -> &[Payment] {
        &self.payments
    }

    fn paid_through(&self, as_of: NaiveDate) -> Decimal {
        self.payments
            .iter()
            .filter(|p| p.date <= as_of)
            .map(|p| p.amount.amount())
            .sum()
    }

    /// A contingent guarantee counts under accrual only once triggered,
    /// and the evidence of triggering is a payment on or before `as_of`.
    fn accrual_recognized(&self, as_of: NaiveDate) -> Decimal {
        if self.incurred > as_of {
            return Decimal::ZERO;
        }
        if self.contingent && !self.payments.iter().any(|p| p.date <= as_of) {
            return Decimal::ZERO;
        }
        self.amount.amount()
    }
}

/// A single-currency collection of ledger entries with unique ids.
#[derive(Debug, Clone, PartialEq)]
pub struct DebtRegister {
    currency: Currency,
    entries: Vec<LedgerEntry>,
}

impl DebtRegister {
    pub fn new(currency: Currency, entries: Vec<LedgerEntry>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for entry in &entries {
            if entry.amount().currency() != &currency {
                return Err(Error::CurrencyMismatch {
                    left: currency.code().to_string(),
                    right: entry.amount().currency().code().to_string(),
                });
            }
            if !seen.insert(entry.id().to_string()) {
                return Err(Error::invalid(format!("duplicate entry id {:?}", entry.id())));
            }
        }
        Ok(DebtRegister { currency, entries })
    }

    pub fn empty(currency: Currency) -> Self {
        DebtRegister {
            currency,
            entries: Vec::new(),
        }
    }

    /// A new register with one more entry; the original is untouched.
    pub fn with_entry(&self, entry: LedgerEntry) -> Result<DebtRegister> {
        let mut entries = self.entries.clone();
        entries.push(entry);
        DebtRegister::new(self.currency.clone(), entries)
    }

    pub fn currency(&self) -> &Currency {
        &self.currency
    }

    pub fn entries(&self) -> &[LedgerEntry] {
        &self.entries
    }
}

fn recognized_sum(
    entries: &[LedgerEntry],
    basis: RecognitionBasis,
    as_of: NaiveDate,
) -> Decimal {
    entries
        .iter()
        .map(|entry| match basis {
            RecognitionBasis::Accrual => entry.accrual_recognized(as_of),
            RecognitionBasis::Cash => entry.paid_through(as_of),
        })
        .sum()
}

/// Liabilities recognized at `as_of`: full incurred amounts under
/// accrual, payments actually made under cash.
pub fn recognized_liabilities(
    register: &DebtRegister,
    basis: RecognitionBasis,
    as_of: NaiveDate,
) -> Money {
    Money::new(
        recognized_sum(register.entries(), basis, as_of),
        register.currency().clone(),
    )
}

/// Recognized liabilities within scope, divided by GDP. The GDP
/// observation must fall in the same calendar year as `as_of`; mismatched
/// periods are refused rather than silently annualized.
pub fn debt_to_gdp(
    register: &DebtRegister,
    gdp: &GdpObservation,
    scope: BalanceScope,
    basis: RecognitionBasis,
    as_of: NaiveDate,
) -> Result<f64> {
    if gdp.date().year() != as_of.year() {
        return Err(Error::invalid(format!(
            "gdp observation dated {} is not in the same calendar year as as-of {as_of}",
            gdp.date()
        )));
    }
    if gdp.gdp().currency() != register.currency() {
        return Err(Error::CurrencyMismatch {
            left: register.currency().code().to_string(),
            right: gdp.gdp().currency().code().to_string(),
        });
    }
    let in_scope: Vec<LedgerEntry> = register
        .entries()
        .iter()
        .filter(|entry| match scope {
            BalanceScope::OnBalanceOnly => entry.balance_sheet() == BalanceSheet::On,
            BalanceScope::IncludeOffBalance => true,
        })
        .cloned()
        .collect();
    let recognized = recognized_sum(&in_scope, basis, as_of);
    let ratio = recognized
        .checked_div(gdp.gdp().amount())
        .ok_or_else(|| Error::invalid("ratio overflow"))?;
    ratio
        .to_f64()
        .ok_or_else(|| Error::invalid("ratio not representable"))
}

/// A dated, strictly positive GDP figure.
#[derive(Debug, Clone, PartialEq)]
pub struct GdpObservation {
    date: NaiveDate,
    gdp: Money,
}

impl GdpObservation {
    pub fn new(date: NaiveDate, gdp: Money) -> Result<Self> {
        if gdp.amount() <= Decimal::ZERO {
            return Err(Error::invalid(format!(
                "gdp must be > 0, got {}",
                gdp.amount()
            )));
        }
        Ok(GdpObservation { date, gdp })
    }

    pub fn date(&self) -> NaiveDate {
        self.date
    }

    pub fn gdp(&self) -> &Money {
        &self.gdp
    }
}

/// Debt-to-GDP ratio above which an economy is flagged as crisis-prone.
pub const DEFAULT_DANGER_THRESHOLD: f64 = 1.50;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlertStatus {
    Alert,
    Clear,
}

impl std::fmt::Display for AlertStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AlertStatus::Alert => f.write_str("alert"),
            AlertStatus::Clear => f.write_str("clear"),
        }
    }
}

/// Fires strictly above the threshold; sitting exactly on it stays clear.
pub fn danger_alert(ratio: f64, threshold: f64) -> Result<AlertStatus> {
    if !ratio.is_finite() || ratio < 0.0 {
        return Err(Error::invalid(format!("ratio must be >= 0, got {ratio}")));
    }
    if !threshold.is_finite() || threshold < 0.0 {
        return Err(Error::invalid(format!(
            "threshold must be >= 0, got {threshold}"
        )));
    }
    Ok(if ratio > threshold {
        AlertStatus::Alert
    } else {
        AlertStatus::Clear
    })
}

// ---------------------------------------------------------------------------
// Register file format
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct RegisterFile {
    currency: String,
    entries: Vec<EntryFile>,
}

#[derive(Serialize, Deserialize)]
struct EntryFile {
    id: String,
    amount: Decimal,
    incurred: NaiveDate,
    balance_sheet: BalanceSheet,
    contingent: bool,
    payments: Vec<PaymentFile>,
}

#[derive(Serialize, Deserialize)]
struct PaymentFile {
    date: NaiveDate,
    amount: Decimal,
}

impl DebtRegister {
    /// Parses the register document: JSON with a currency code, entries
    /// keyed `{id, amount, incurred, balance_sheet, contingent, payments}`
    /// and ISO-8601 calendar dates.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: RegisterFile = serde_json::from_str(text)
            .map_err(|e| Error::parse(e.line(), format!("register: {e}")))?;
        let currency = Currency::new(file.currency)?;
        let entries = file
            .entries
            .into_iter()
            .map(|entry| {
                let payments = entry
                    .payments
                    .into_iter()
                    .map(|p| Payment {
                        date: p.date,
                        amount: Money::new(p.amount, currency.clone()),
                    })
                    .collect();
                LedgerEntry::new(
                    entry.id,
                    Money::new(entry.amount, currency.clone()),
                    entry.incurred,
                    entry.balance_sheet,
                    entry.contingent,
                    payments,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        DebtRegister::new(currency, entries)
    }

    pub fn to_json(&self) -> String {
        let file = RegisterFile {
            currency: self.currency.code().to_string(),
            entries: self
                .entries
                .iter()
                .map(|entry| EntryFile {
                    id: entry.id().to_string(),
                    amount: entry.amount().amount(),
                    incurred: entry.incurred(),
                    balance_sheet: entry.balance_sheet(),
                    contingent: entry.contingent(),
                    payments: entry
                        .payments()
                        .iter()
                        .map(|p| PaymentFile {
                            date: p.date,
                            amount: p.amount.amount(),
                        })
                        .collect(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("register serializes")
    }
}
