//! Python bindings for the sdrkit toolkit.
//!
//! Exposes the rate constructions, discounting, appraisal, welfare and
//! fiscal operations as plain functions and a few small classes. Rich
//! documents (welfare specs, regime mappings, debt registers) cross the
//! boundary as the same JSON texts the CLI reads.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use rust_decimal::prelude::{FromPrimitive, ToPrimitive};
use rust_decimal::Decimal;

use sdrkit::appraisal;
use sdrkit::cashflow::{self, Compounding};
use sdrkit::error::Error;
use sdrkit::fiscal::{self, BalanceScope, RecognitionBasis};
use sdrkit::money::{Currency, Money as CoreMoney};
use sdrkit::rates::{self, StprParams};
use sdrkit::welfare::{self, RegimeMapping, SwfSpec, UtilityFrontier, UtilityPair};

fn to_py_err(e: Error) -> PyErr {
    match e {
        Error::NoSignChange | Error::NoConvergence { .. } | Error::NoCrossing => {
            PyRuntimeError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn decimal_from_f64(value: f64, what: &str) -> PyResult<Decimal> {
    Decimal::from_f64(value)
        .ok_or_else(|| PyValueError::new_err(format!("{what} {value} is not a finite decimal")))
}

fn parse_compounding(text: &str) -> PyResult<Compounding> {
    match text {
        "discrete-annual" | "discrete" => Ok(Compounding::DiscreteAnnual),
        "continuous" => Ok(Compounding::Continuous),
        other => Err(PyValueError::new_err(format!(
            "compounding must be 'discrete-annual' or 'continuous', got {other:?}"
        ))),
    }
}

fn parse_date(text: &str) -> PyResult<chrono::NaiveDate> {
    text.parse()
        .map_err(|_| PyValueError::new_err(format!("invalid date {text:?}, expected YYYY-MM-DD")))
}

fn currency(code: &str) -> PyResult<Currency> {
    Currency::new(code).map_err(to_py_err)
}

fn series_from_entries(entries: Vec<(f64, f64)>, code: &str) -> PyResult<cashflow::CashFlowSeries> {
    let currency = currency(code)?;
    let entries = entries
        .into_iter()
        .map(|(t, amount)| {
            Ok(cashflow::CashFlowEntry {
                t,
                amount: decimal_from_f64(amount, "amount")?,
            })
        })
        .collect::<PyResult<Vec<_>>>()?;
    cashflow::CashFlowSeries::new(currency, entries).map_err(to_py_err)
}

/// A currency-labelled amount at four fractional digits.
#[pyclass(frozen)]
struct Money {
    inner: CoreMoney,
}

#[pymethods]
impl Money {
    /// The amount as a float (may round past four decimals for very
    /// large magnitudes; `text` stays exact).
    #[getter]
    fn amount(&self) -> f64 {
        self.inner.amount().to_f64().unwrap_or(f64::NAN)
    }

    /// The exact amount rendered with four fractional digits.
    #[getter]
    fn text(&self) -> String {
        self.inner.amount_string()
    }

    #[getter]
    fn currency(&self) -> String {
        self.inner.currency().code().to_string()
    }

    fn __repr__(&self) -> String {
        format!("Money({})", self.inner)
    }
}

impl From<CoreMoney> for Money {
    fn from(inner: CoreMoney) -> Self {
        Money { inner }
    }
}

/// A flat or declining term structure of annual real rates.
#[pyclass(frozen)]
struct RateSchedule {
    inner: rates::RateSchedule,
}

#[pymethods]
impl RateSchedule {
    /// Build from (start_year, rate) segments; the first must start at 0.
    #[new]
    fn new(segments: Vec<(f64, f64)>) -> PyResult<Self> {
        let segments = segments
            .into_iter()
            .map(|(start_year, rate)| rates::Segment { start_year, rate })
            .collect();
        Ok(RateSchedule {
            inner: rates::RateSchedule::new(segments).map_err(to_py_err)?,
        })
    }

    #[staticmethod]
    fn flat(rate: f64) -> PyResult<Self> {
        Ok(RateSchedule {
            inner: rates::RateSchedule::flat(rate).map_err(to_py_err)?,
        })
    }

    /// The rate applying t years out (left-closed segments).
    fn rate_at(&self, t: f64) -> PyResult<f64> {
        self.inner.rate_at(t).map_err(to_py_err)
    }

    /// Present-value factor for an amount t years out.
    #[pyo3(signature = (t, compounding = "discrete-annual"))]
    fn discount_factor(&self, t: f64, compounding: &str) -> PyResult<f64> {
        cashflow::discount_factor(&self.inner, t, parse_compounding(compounding)?)
            .map_err(to_py_err)
    }

    fn __repr__(&self) -> String {
        let segments: Vec<String> = self
            .inner
            .segments()
            .iter()
            .map(|s| format!("({}, {})", s.start_year, s.rate))
            .collect();
        format!("RateSchedule([{}])", segments.join(", "))
    }
}

/// A single-currency sequence of dated amounts.
#[pyclass(frozen)]
struct CashFlowSeries {
    inner: cashflow::CashFlowSeries,
}

#[pymethods]
impl CashFlowSeries {
    /// Build from (t, amount) pairs.
    #[new]
    #[pyo3(signature = (entries, currency = "GBP"))]
    fn new(entries: Vec<(f64, f64)>, currency: &str) -> PyResult<Self> {
        Ok(CashFlowSeries {
            inner: series_from_entries(entries, currency)?,
        })
    }

    /// Parse the `t,amount[,label]` CSV schema.
    #[staticmethod]
    #[pyo3(signature = (text, currency = "GBP"))]
    fn from_csv(text: &str, currency: &str) -> PyResult<Self> {
        Ok(CashFlowSeries {
            inner: cashflow::CashFlowSeries::parse_csv(text, self::currency(currency)?)
                .map_err(to_py_err)?,
        })
    }

    #[getter]
    fn currency(&self) -> String {
        self.inner.currency().code().to_string()
    }

    /// The sorted (t, amount) pairs.
    fn entries(&self) -> Vec<(f64, f64)> {
        self.inner
            .entries()
            .iter()
            .map(|e| (e.t, e.amount.to_f64().unwrap_or(f64::NAN)))
            .collect()
    }

    /// Net present value under a schedule.
    #[pyo3(signature = (schedule, compounding = "discrete-annual"))]
    fn npv(&self, schedule: &RateSchedule, compounding: &str) -> PyResult<Money> {
        cashflow::npv(&self.inner, &schedule.inner, parse_compounding(compounding)?)
            .map(Money::from)
            .map_err(to_py_err)
    }

    fn __len__(&self) -> usize {
        self.inner.entries().len()
    }
}

/// Time-preference rate: (delta + hazard) + mu * growth, computed in
/// decimal arithmetic.
#[pyfunction]
#[pyo3(signature = (delta, hazard, growth, mu = 1.0))]
fn stpr(delta: f64, hazard: f64, growth: f64, mu: f64) -> PyResult<f64> {
    let params = StprParams::new(
        decimal_from_f64(delta, "delta")?,
        decimal_from_f64(hazard, "hazard")?,
        decimal_from_f64(mu, "mu")?,
        decimal_from_f64(growth, "growth")?,
    )
    .map_err(to_py_err)?;
    rates::stpr(&params)
        .to_f64()
        .ok_or_else(|| PyValueError::new_err("rate not representable"))
}

/// The hazard component as annual deaths over population.
#[pyfunction]
fn mortality_hazard(deaths: u64, population: u64) -> PyResult<f64> {
    rates::mortality_hazard(deaths, population)
        .map_err(to_py_err)?
        .to_f64()
        .ok_or_else(|| PyValueError::new_err("rate not representable"))
}

/// Validate a pre-tax marginal return and tag it: returns (rate, "SOC").
#[pyfunction]
fn soc_rate(pretax_return: f64) -> PyResult<(f64, String)> {
    let tagged = rates::soc_rate(decimal_from_f64(pretax_return, "pretax_return")?)
        .map_err(to_py_err)?;
    Ok((
        tagged.rate.to_f64().unwrap_or(f64::NAN),
        tagged.method.to_string(),
    ))
}

/// Built-in reference rate: returns (jurisdiction, year, rate, method).
#[pyfunction]
fn lookup_reference_rate(jurisdiction: &str, year: i32) -> PyResult<(String, i32, f64, String)> {
    let record = rates::lookup_reference_rate(jurisdiction, year).map_err(to_py_err)?;
    Ok((
        record.jurisdiction.clone(),
        record.year,
        record.rate.to_f64().unwrap_or(f64::NAN),
        record.method.to_string(),
    ))
}

/// PFI vs PSC comparison table as the CSV interface text.
#[pyfunction]
#[pyo3(signature = (pfi, psc, rates, compounding = "discrete-annual", currency = "GBP", psc_risk = None))]
fn compare(
    pfi: Vec<(f64, f64)>,
    psc: Vec<(f64, f64)>,
    rates: Vec<f64>,
    compounding: &str,
    currency: &str,
    psc_risk: Option<Vec<(f64, f64)>>,
) -> PyResult<String> {
    let pfi = appraisal::ProcurementOption::pfi("pfi", series_from_entries(pfi, currency)?)
        .map_err(to_py_err)?;
    let risk = psc_risk
        .map(|entries| series_from_entries(entries, currency))
        .transpose()?;
    let psc = appraisal::ProcurementOption::psc("psc", series_from_entries(psc, currency)?, risk)
        .map_err(to_py_err)?;
    let table = appraisal::compare(&pfi, &psc, &rates, parse_compounding(compounding)?)
        .map_err(to_py_err)?;
    Ok(table.to_csv())
}

/// Flat rate at which the two options cost the same.
#[pyfunction]
#[pyo3(signature = (pfi, psc, low, high, compounding = "discrete-annual", currency = "GBP", tol = 1e-6))]
fn breakeven_rate(
    pfi: Vec<(f64, f64)>,
    psc: Vec<(f64, f64)>,
    low: f64,
    high: f64,
    compounding: &str,
    currency: &str,
    tol: f64,
) -> PyResult<f64> {
    let pfi = appraisal::ProcurementOption::pfi("pfi", series_from_entries(pfi, currency)?)
        .map_err(to_py_err)?;
    let psc = appraisal::ProcurementOption::psc("psc", series_from_entries(psc, currency)?, None)
        .map_err(to_py_err)?;
    appraisal::breakeven_rate(&pfi, &psc, (low, high), parse_compounding(compounding)?, tol)
        .map_err(to_py_err)
}

/// Level payments at t = 1..=horizon whose NPV equals the target.
#[pyfunction]
#[pyo3(signature = (target_npv, rate, horizon, compounding = "discrete-annual", currency = "GBP"))]
fn fit_annuity(
    target_npv: f64,
    rate: f64,
    horizon: u32,
    compounding: &str,
    currency: &str,
) -> PyResult<Vec<(f64, f64)>> {
    let target = CoreMoney::new(
        decimal_from_f64(target_npv, "target_npv")?,
        self::currency(currency)?,
    );
    let series = appraisal::fit_annuity(&target, rate, horizon, parse_compounding(compounding)?)
        .map_err(to_py_err)?;
    Ok(series
        .entries()
        .iter()
        .map(|e| (e.t, e.amount.to_f64().unwrap_or(f64::NAN)))
        .collect())
}

/// Marginal value of a rich person's extra unit relative to a poor
/// person's: income_ratio^(-mu).
#[pyfunction]
fn mu_weight(income_ratio: f64, mu: f64) -> PyResult<f64> {
    welfare::mu_weight(income_ratio, mu).map_err(to_py_err)
}

/// Gini coefficient (mean-absolute-difference form).
#[pyfunction]
fn gini(holdings: Vec<f64>) -> PyResult<f64> {
    welfare::gini(&holdings).map_err(to_py_err)
}

/// Share held by the richest ceil(fraction * n) holders.
#[pyfunction]
fn top_share(holdings: Vec<f64>, fraction: f64) -> PyResult<f64> {
    welfare::top_share(&holdings, fraction).map_err(to_py_err)
}

fn spec_from_json(text: &str) -> PyResult<SwfSpec> {
    let spec: SwfSpec = serde_json::from_str(text)
        .map_err(|e| PyValueError::new_err(format!("swf spec: {e}")))?;
    spec.validate().map_err(to_py_err)?;
    Ok(spec)
}

/// Evaluate a welfare spec (JSON document) at a utility pair: returns
/// (value, equal_required).
#[pyfunction]
fn swf_value(spec_json: &str, u_a: f64, u_b: f64) -> PyResult<(f64, bool)> {
    let spec = spec_from_json(spec_json)?;
    let pair = UtilityPair::new(u_a, u_b).map_err(to_py_err)?;
    let value = welfare::swf_value(&spec, &pair).map_err(to_py_err)?;
    Ok((value.value, value.equal_required))
}

/// Maximize a welfare spec over a frontier given as (u_a, u_b) points.
#[pyfunction]
fn optimal_point(frontier: Vec<(f64, f64)>, spec_json: &str) -> PyResult<(f64, f64)> {
    let points = frontier
        .into_iter()
        .map(|(u_a, u_b)| UtilityPair { u_a, u_b })
        .collect();
    let frontier = UtilityFrontier::new(points).map_err(to_py_err)?;
    let spec = spec_from_json(spec_json)?;
    let best = welfare::optimal_point(&frontier, &spec).map_err(to_py_err)?;
    Ok((best.u_a, best.u_b))
}

/// Map a rate onto the efficiency-equity ladder. `mapping_json`
/// overrides the built-in thresholds.
#[pyfunction]
#[pyo3(signature = (rate, mapping_json = None))]
fn classify_rate(rate: f64, mapping_json: Option<&str>) -> PyResult<String> {
    let mapping = match mapping_json {
        Some(text) => serde_json::from_str::<RegimeMapping>(text)
            .map_err(|e| PyValueError::new_err(format!("mapping: {e}")))?,
        None => RegimeMapping::default(),
    };
    welfare::classify_rate(rate, &mapping)
        .map(|label| label.to_string())
        .map_err(to_py_err)
}

fn parse_basis(text: &str) -> PyResult<RecognitionBasis> {
    match text {
        "cash" => Ok(RecognitionBasis::Cash),
        "accrual" => Ok(RecognitionBasis::Accrual),
        other => Err(PyValueError::new_err(format!(
            "basis must be 'cash' or 'accrual', got {other:?}"
        ))),
    }
}

/// Liabilities recognized at a date from a register JSON document.
#[pyfunction]
fn recognized_liabilities(register_json: &str, basis: &str, as_of: &str) -> PyResult<Money> {
    let register = fiscal::DebtRegister::from_json(register_json).map_err(to_py_err)?;
    Ok(Money::from(fiscal::recognized_liabilities(
        &register,
        parse_basis(basis)?,
        parse_date(as_of)?,
    )))
}

/// Debt-to-GDP ratio; scope is "on-balance-only" or "include-off-balance".
#[pyfunction]
fn debt_to_gdp(
    register_json: &str,
    gdp: f64,
    gdp_date: &str,
    scope: &str,
    basis: &str,
    as_of: &str,
) -> PyResult<f64> {
    let register = fiscal::DebtRegister::from_json(register_json).map_err(to_py_err)?;
    let scope = match scope {
        "on-balance-only" => BalanceScope::OnBalanceOnly,
        "include-off-balance" => BalanceScope::IncludeOffBalance,
        other => {
            return Err(PyValueError::new_err(format!(
                "scope must be 'on-balance-only' or 'include-off-balance', got {other:?}"
            )))
        }
    };
    let observation = fiscal::GdpObservation::new(
        parse_date(gdp_date)?,
        CoreMoney::new(decimal_from_f64(gdp, "gdp")?, register.currency().clone()),
    )
    .map_err(to_py_err)?;
    fiscal::debt_to_gdp(
        &register,
        &observation,
        scope,
        parse_basis(basis)?,
        parse_date(as_of)?,
    )
    .map_err(to_py_err)
}

/// True when the ratio sits strictly above the danger threshold.
#[pyfunction]
#[pyo3(signature = (ratio, threshold = 1.50))]
fn danger_alert(ratio: f64, threshold: f64) -> PyResult<bool> {
    fiscal::danger_alert(ratio, threshold)
        .map(|status| status == fiscal::AlertStatus::Alert)
        .map_err(to_py_err)
}

#[pymodule]
fn sdrkit_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<Money>()?;
    m.add_class::<RateSchedule>()?;
    m.add_class::<CashFlowSeries>()?;
    m.add_function(wrap_pyfunction!(stpr, m)?)?;
    m.add_function(wrap_pyfunction!(mortality_hazard, m)?)?;
    m.add_function(wrap_pyfunction!(soc_rate, m)?)?;
    m.add_function(wrap_pyfunction!(lookup_reference_rate, m)?)?;
    m.add_function(wrap_pyfunction!(compare, m)?)?;
    m.add_function(wrap_pyfunction!(breakeven_rate, m)?)?;
    m.add_function(wrap_pyfunction!(fit_annuity, m)?)?;
    m.add_function(wrap_pyfunction!(mu_weight, m)?)?;
    m.add_function(wrap_pyfunction!(gini, m)?)?;
    m.add_function(wrap_pyfunction!(top_share, m)?)?;
    m.add_function(wrap_pyfunction!(swf_value, m)?)?;
    m.add_function(wrap_pyfunction!(optimal_point, m)?)?;
    m.add_function(wrap_pyfunction!(classify_rate, m)?)?;
    m.add_function(wrap_pyfunction!(recognized_liabilities, m)?)?;
    m.add_function(wrap_pyfunction!(debt_to_gdp, m)?)?;
    m.add_function(wrap_pyfunction!(danger_alert, m)?)?;
    Ok(())
}
