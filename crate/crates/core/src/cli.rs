//! Command-line front end: one subcommand per library capability.
//!
//! Exit codes: 0 on success, 1 on input/parse/validation errors, 2 on
//! computational failures (no sign change, no convergence, no crossing).
//! Every library error prints as a single line with a greppable prefix
//! (`E_PARSE`, `E_VALIDATE`, `E_NOCONV`, `E_NOSIGN`). Output is
//! byte-deterministic for fixed inputs: no timestamps, no locale, `.` as
//! the decimal point.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::str::FromStr;

use chrono::NaiveDate;
use clap::{ArgGroup, Args, Parser, Subcommand};
use rust_decimal::Decimal;
use rust_decimal_macros::dec;

use crate::appraisal::{
    breakeven_rate, carlisle_table, compare, verdict, ComparisonTable, ProcurementOption,
    DEFAULT_BREAKEVEN_TOL,
};
use crate::cashflow::{npv, CashFlowSeries, Compounding};
use crate::error::{Error, Result};
use crate::fiscal::{
    danger_alert, debt_to_gdp, recognized_liabilities, BalanceScope, DebtRegister, GdpObservation,
    RecognitionBasis, DEFAULT_DANGER_THRESHOLD,
};
use crate::money::{Currency, Money};
use crate::rates::{lookup_reference_rate, soc_rate, stpr, RateSchedule, StprParams};
use crate::welfare::{
    classify_rate, gini, mu_weight, optimal_point, swf_value, top_share, RegimeMapping, SwfSpec,
    UtilityFrontier, UtilityPair,
};

/// Environment variable overriding the breakeven tolerance (a decimal
/// fraction; the `--tol` flag wins over it).
pub const TOL_ENV_VAR: &str = "SDRKIT_TOL";

#[derive(Debug, Parser)]
#[command(
    name = "sdrkit",
    version,
    about = "Social discount rates, PFI/PSC appraisal, welfare positioning and PPP debt monitoring"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Construct and look up social discount rates
    Rate {
        #[command(subcommand)]
        command: RateCommand,
    },
    /// Net present value of a cash-flow file
    Npv(NpvArgs),
    /// PFI vs PSC comparison table across discount rates
    Compare(CompareArgs),
    /// Discount rate at which PFI and PSC change places
    Breakeven(BreakevenArgs),
    /// Social welfare functions over a utility frontier
    Swf {
        #[command(subcommand)]
        command: SwfCommand,
    },
    /// Inequality statistics and income weights
    Equity {
        #[command(subcommand)]
        command: EquityCommand,
    },
    /// Liability registers, debt ratios and alerts
    Fiscal {
        #[command(subcommand)]
        command: FiscalCommand,
    },
    /// Re-render a comparison table
    Report(ReportArgs),
}

#[derive(Debug, Subcommand)]
enum RateCommand {
    /// Time-preference rate: (delta + hazard) + mu * growth
    Stpr {
        /// Pure time preference, per year
        #[arg(long, value_parser = parse_decimal)]
        delta: Decimal,
        /// Systemic/catastrophe risk component, per year
        #[arg(long, value_parser = parse_decimal)]
        hazard: Decimal,
        /// Elasticity of marginal utility of consumption
        #[arg(long, value_parser = parse_decimal, default_value = "1.0")]
        mu: Decimal,
        /// Annual real per-capita consumption growth
        #[arg(long, value_parser = parse_decimal)]
        growth: Decimal,
    },
    /// Tag a pre-tax marginal return as an opportunity-cost rate
    Soc {
        #[arg(long, value_parser = parse_decimal)]
        pretax_return: Decimal,
    },
    /// Look up a built-in reference rate
    Lookup {
        #[arg(long)]
        jurisdiction: String,
        #[arg(long)]
        year: i32,
    },
}

#[derive(Debug, Args)]
struct ScheduleArgs {
    /// Flat annual rate, a decimal fraction like 0.035
    #[arg(long, conflicts_with = "schedule")]
    rate: Option<f64>,
    /// Path to a schedule document: [{"start_year": 0.0, "rate": 0.035}, ...]
    #[arg(long)]
    schedule: Option<String>,
}

impl ScheduleArgs {
    fn load(&self) -> Result<RateSchedule> {
        match (self.rate, &self.schedule) {
            (Some(rate), None) => RateSchedule::flat(rate),
            (None, Some(path)) => {
                let text = read_file(path)?;
                serde_json::from_str(&text)
                    .map_err(|e| Error::parse(e.line(), format!("schedule {path}: {e}")))
            }
            _ => Err(Error::invalid("pass exactly one of --rate or --schedule")),
        }
    }
}

#[derive(Debug, Args)]
struct NpvArgs {
    /// Cash-flow CSV (`t,amount` or `t,amount,label`)
    #[arg(long)]
    cashflow: String,
    #[command(flatten)]
    schedule: ScheduleArgs,
    #[arg(long, value_enum, default_value_t = Compounding::DiscreteAnnual)]
    compounding: Compounding,
    #[arg(long, default_value = "GBP")]
    currency: String,
}

#[derive(Debug, Args)]
struct CompareArgs {
    /// PFI cost cash-flow CSV
    #[arg(long)]
    pfi: String,
    /// PSC cost cash-flow CSV
    #[arg(long)]
    psc: String,
    /// Optional risk adjustment added to the PSC
    #[arg(long)]
    psc_risk: Option<String>,
    /// Comma-separated flat rates, decimal fractions
    #[arg(long, value_delimiter = ',', required = true)]
    rates: Vec<f64>,
    #[arg(long, value_enum, default_value_t = Compounding::DiscreteAnnual)]
    compounding: Compounding,
    #[arg(long, default_value = "GBP")]
    currency: String,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
}

#[derive(Debug, Args)]
struct BreakevenArgs {
    #[arg(long)]
    pfi: String,
    #[arg(long)]
    psc: String,
    #[arg(long)]
    psc_risk: Option<String>,
    /// Bracket as `low,high`, both decimal fractions
    #[arg(long, value_delimiter = ',', required = true)]
    bracket: Vec<f64>,
    /// Bracket-width tolerance; overrides SDRKIT_TOL (default 1e-6)
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, value_enum, default_value_t = Compounding::DiscreteAnnual)]
    compounding: Compounding,
    #[arg(long, default_value = "GBP")]
    currency: String,
}

#[derive(Debug, Subcommand)]
enum SwfCommand {
    /// Evaluate a welfare spec at one utility pair
    Value {
        /// Spec document, e.g. {"family":"utilitarian","weight_a":1.0,"weight_b":1.0}
        #[arg(long)]
        spec: String,
        #[arg(long)]
        ua: f64,
        #[arg(long)]
        ub: f64,
    },
    /// Maximize a welfare spec over a frontier CSV (`u_a,u_b`)
    Optimal {
        #[arg(long)]
        frontier: String,
        #[arg(long)]
        spec: String,
    },
    /// Map a rate onto the efficiency-equity ladder
    Classify {
        #[arg(long)]
        rate: f64,
        /// Mapping document; defaults to the built-in ladder
        #[arg(long)]
        mapping: Option<String>,
    },
}

#[derive(Debug, Subcommand)]
enum EquityCommand {
    /// Gini coefficient of a holdings list
    Gini {
        #[arg(long, value_delimiter = ',', required = true)]
        holdings: Vec<f64>,
    },
    /// Share of the total held by the richest fraction
    Topshare {
        #[arg(long, value_delimiter = ',', required = true)]
        holdings: Vec<f64>,
        #[arg(long)]
        fraction: f64,
    },
    /// Marginal-utility weight of the rich relative to the poor
    Muweight {
        /// Rich-to-poor income ratio
        #[arg(long)]
        ratio: f64,
        #[arg(long)]
        mu: f64,
    },
}

#[derive(Debug, Subcommand)]
enum FiscalCommand {
    /// Liabilities recognized at a date under a basis
    Recognize {
        #[arg(long)]
        register: String,
        #[arg(long, value_enum)]
        basis: RecognitionBasis,
        #[arg(long, value_parser = parse_date)]
        as_of: NaiveDate,
    },
    /// Debt-to-GDP ratio for a scope and basis
    Ratio {
        #[arg(long)]
        register: String,
        #[arg(long, value_parser = parse_decimal)]
        gdp: Decimal,
        #[arg(long, value_parser = parse_date)]
        gdp_date: NaiveDate,
        #[arg(long, value_enum)]
        scope: BalanceScope,
        #[arg(long, value_enum)]
        basis: RecognitionBasis,
        #[arg(long, value_parser = parse_date)]
        as_of: NaiveDate,
    },
    /// Danger-zone check on a debt-to-GDP ratio
    Alert {
        #[arg(long)]
        ratio: f64,
        #[arg(long, default_value_t = DEFAULT_DANGER_THRESHOLD)]
        threshold: f64,
    },
}

#[derive(Debug, Args)]
#[command(group = ArgGroup::new("source").required(true).args(["carlisle", "table"]))]
struct ReportArgs {
    /// Render the built-in published comparison fixture
    #[arg(long)]
    carlisle: bool,
    /// Render a comparison CSV produced by `compare`
    #[arg(long)]
    table: Option<String>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Table)]
    format: OutputFormat,
    #[arg(long, default_value = "GBP")]
    currency: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Csv,
    Table,
}

fn parse_decimal(s: &str) -> std::result::Result<Decimal, String> {
    Decimal::from_str(s).map_err(|e| format!("invalid decimal {s:?}: {e}"))
}

fn parse_date(s: &str) -> std::result::Result<NaiveDate, String> {
    NaiveDate::from_str(s).map_err(|_| format!("invalid date {s:?}, expected YYYY-MM-DD"))
}

fn read_file(path: &str) -> Result<String> {
    fs::read_to_string(path)
        .map_err(|e| Error::invalid(format!("cannot read {path}: {e}")))
}

fn load_series(path: &str, currency: &Currency) -> Result<CashFlowSeries> {
    let text = read_file(path)?;
    CashFlowSeries::parse_csv(&text, currency.clone())
}

fn load_options(
    pfi_path: &str,
    psc_path: &str,
    psc_risk: Option<&String>,
    currency: &Currency,
) -> Result<(ProcurementOption, ProcurementOption)> {
    let pfi = ProcurementOption::pfi(pfi_path, load_series(pfi_path, currency)?)?;
    let risk = psc_risk
        .map(|path| load_series(path, currency))
        .transpose()?;
    let psc = ProcurementOption::psc(psc_path, load_series(psc_path, currency)?, risk)?;
    Ok((pfi, psc))
}

/// Renders a comparison table either as the exact CSV interface or as an
/// aligned text table in the published column order (rate in percent,
/// money to one decimal, leading sign on negatives).
pub fn render_report(table: &ComparisonTable, format: OutputFormat) -> Result<String> {
    if table.is_empty() {
        return Err(Error::invalid("comparison table is empty"));
    }
    match format {
        OutputFormat::Csv => Ok(table.to_csv()),
        OutputFormat::Table => {
            let data: Vec<[String; 4]> = table
                .rows()
                .iter()
                .map(|row| {
                    [
                        percent_string(row.rate()),
                        one_decimal(row.npv_pfi()),
                        one_decimal(row.npv_psc()),
                        one_decimal(row.difference_in_favour_of_pfi()),
                    ]
                })
                .collect();
            let mut widths = [0usize; 4];
            for row in &data {
                for (w, cell) in widths.iter_mut().zip(row) {
                    *w = (*w).max(cell.len());
                }
            }
            let mut out = String::from("Discount Rate (%) | PFI | PSC | Difference in Favour of PFI\n");
            for row in &data {
                let line = row
                    .iter()
                    .zip(widths)
                    .map(|(cell, w)| format!("{cell:<w$}"))
                    .collect::<Vec<_>>()
                    .join(" | ");
                out.push_str(line.trim_end());
                out.push('\n');
            }
            Ok(out)
        }
    }
}

fn percent_string(rate: f64) -> String {
    match rust_decimal::prelude::FromPrimitive::from_f64(rate) {
        Some(d) => {
            let pct: Decimal = d;
            (pct * dec!(100)).normalize().to_string()
        }
        None => format!("{}", rate * 100.0),
    }
}

fn one_decimal(money: &Money) -> String {
    let mut d = money
        .amount()
        .round_dp_with_strategy(1, rust_decimal::RoundingStrategy::MidpointNearestEven);
    d.rescale(1);
    d.to_string()
}

struct CommandOutput {
    stdout: String,
    warnings: Vec<String>,
}

impl CommandOutput {
    fn plain(stdout: String) -> Self {
        CommandOutput {
            stdout,
            warnings: Vec::new(),
        }
    }
}

/// Parses and dispatches one command, returning the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    0
                }
                _ => {
                    let _ = writeln!(err, "E_PARSE: {e}");
                    1
                }
            };
        }
    };
    match dispatch(cli.command) {
        Ok(output) => {
            for warning in &output.warnings {
                let _ = writeln!(err, "{warning}");
            }
            let _ = write!(out, "{}", output.stdout);
            0
        }
        Err(e) => {
            let (prefix, code) = classify_error(&e);
            let _ = writeln!(err, "{prefix}: {e}");
            code
        }
    }
}

fn classify_error(e: &Error) -> (&'static str, i32) {
    match e {
        Error::Parse { .. } => ("E_PARSE", 1),
        Error::InvalidParameter(_) | Error::NotFound(_) | Error::CurrencyMismatch { .. } => {
            ("E_VALIDATE", 1)
        }
        Error::NoConvergence { .. } => ("E_NOCONV", 2),
        Error::NoSignChange | Error::NoCrossing => ("E_NOSIGN", 2),
    }
}

fn dispatch(command: Command) -> Result<CommandOutput> {
    match command {
        Command::Rate { command } => run_rate(command),
        Command::Npv(args) => run_npv(args),
        Command::Compare(args) => run_compare(args),
        Command::Breakeven(args) => run_breakeven(args),
        Command::Swf { command } => run_swf(command),
        Command::Equity { command } => run_equity(command),
        Command::Fiscal { command } => run_fiscal(command),
        Command::Report(args) => run_report(args),
    }
}

fn rate_string(rate: Decimal) -> String {
    let mut d = rate.round_dp_with_strategy(6, rust_decimal::RoundingStrategy::MidpointNearestEven);
    d.rescale(6);
    d.to_string()
}

fn run_rate(command: RateCommand) -> Result<CommandOutput> {
    match command {
        RateCommand::Stpr {
            delta,
            hazard,
            mu,
            growth,
        } => {
            let params = StprParams::new(delta, hazard, mu, growth)?;
            let mut output = CommandOutput::plain(format!("{}\n", rate_string(stpr(&params))));
            if !params.delta_within_recommended_band() {
                output.warnings.push(format!(
                    "W_DELTA_BAND: delta {delta} is outside the recommended band [0, 0.01]"
                ));
            }
            Ok(output)
        }
        RateCommand::Soc { pretax_return } => {
            let tagged = soc_rate(pretax_return)?;
            Ok(CommandOutput::plain(format!(
                "{} {}\n",
                rate_string(tagged.rate),
                tagged.method
            )))
        }
        RateCommand::Lookup { jurisdiction, year } => {
            let record = lookup_reference_rate(&jurisdiction, year)?;
            Ok(CommandOutput::plain(format!(
                "{} {} {} {}\n",
                record.jurisdiction,
                record.year,
                rate_string(record.rate),
                record.method
            )))
        }
    }
}

fn run_npv(args: NpvArgs) -> Result<CommandOutput> {
    let currency = Currency::new(args.currency)?;
    let series = load_series(&args.cashflow, &currency)?;
    let schedule = args.schedule.load()?;
    let value = npv(&series, &schedule, args.compounding)?;
    Ok(CommandOutput::plain(format!("{value}\n")))
}

fn run_compare(args: CompareArgs) -> Result<CommandOutput> {
    let currency = Currency::new(args.currency)?;
    let (pfi, psc) = load_options(&args.pfi, &args.psc, args.psc_risk.as_ref(), &currency)?;
    let table = compare(&pfi, &psc, &args.rates, args.compounding)?;
    Ok(CommandOutput::plain(render_report(&table, args.format)?))
}

fn run_breakeven(args: BreakevenArgs) -> Result<CommandOutput> {
    let currency = Currency::new(args.currency)?;
    let (pfi, psc) = load_options(&args.pfi, &args.psc, args.psc_risk.as_ref(), &currency)?;
    let tol = match args.tol {
        Some(tol) => tol,
        None => match std::env::var(TOL_ENV_VAR) {
            Ok(text) => text.parse().map_err(|_| {
                Error::invalid(format!("{TOL_ENV_VAR} must be a decimal fraction, got {text:?}"))
            })?,
            Err(_) => DEFAULT_BREAKEVEN_TOL,
        },
    };
    if args.bracket.len() != 2 {
        return Err(Error::invalid(format!(
            "--bracket takes exactly two rates as `low,high`, got {}",
            args.bracket.len()
        )));
    }
    let bracket = (args.bracket[0], args.bracket[1]);
    let rate = breakeven_rate(&pfi, &psc, bracket, args.compounding, tol)?;
    Ok(CommandOutput::plain(format!("{rate:.9}\n")))
}

fn load_swf_spec(path: &str) -> Result<SwfSpec> {
    let text = read_file(path)?;
    let spec: SwfSpec = serde_json::from_str(&text)
        .map_err(|e| Error::parse(e.line(), format!("swf spec {path}: {e}")))?;
    spec.validate()?;
    Ok(spec)
}

fn run_swf(command: SwfCommand) -> Result<CommandOutput> {
    match command {
        SwfCommand::Value { spec, ua, ub } => {
            let spec = load_swf_spec(&spec)?;
            let pair = UtilityPair::new(ua, ub)?;
            let value = swf_value(&spec, &pair)?;
            let mut output = CommandOutput::plain(format!("{:.6}\n", value.value));
            if value.equal_required && pair.u_a != pair.u_b {
                output.warnings.push(
                    "W_EQUAL_REQUIRED: egalitarian value is only valid on the u_a = u_b line"
                        .to_string(),
                );
            }
            Ok(output)
        }
        SwfCommand::Optimal { frontier, spec } => {
            let frontier = UtilityFrontier::parse_csv(&read_file(&frontier)?)?;
            let spec = load_swf_spec(&spec)?;
            let point = optimal_point(&frontier, &spec)?;
            Ok(CommandOutput::plain(format!(
                "u_a,u_b\n{:.6},{:.6}\n",
                point.u_a, point.u_b
            )))
        }
        SwfCommand::Classify { rate, mapping } => {
            let mapping = match mapping {
                Some(path) => {
                    let text = read_file(&path)?;
                    serde_json::from_str(&text)
                        .map_err(|e| Error::parse(e.line(), format!("mapping {path}: {e}")))?
                }
                None => RegimeMapping::default(),
            };
            let label = classify_rate(rate, &mapping)?;
            Ok(CommandOutput::plain(format!("{label}\n")))
        }
    }
}

fn run_equity(command: EquityCommand) -> Result<CommandOutput> {
    let value = match command {
        EquityCommand::Gini { holdings } => gini(&holdings)?,
        EquityCommand::Topshare { holdings, fraction } => top_share(&holdings, fraction)?,
        EquityCommand::Muweight { ratio, mu } => mu_weight(ratio, mu)?,
    };
    Ok(CommandOutput::plain(format!("{value:.6}\n")))
}

fn run_fiscal(command: FiscalCommand) -> Result<CommandOutput> {
    match command {
        FiscalCommand::Recognize {
            register,
            basis,
            as_of,
        } => {
            let register = DebtRegister::from_json(&read_file(&register)?)?;
            let recognized = recognized_liabilities(&register, basis, as_of);
            Ok(CommandOutput::plain(format!("{recognized}\n")))
        }
        FiscalCommand::Ratio {
            register,
            gdp,
            gdp_date,
            scope,
            basis,
            as_of,
        } => {
            let register = DebtRegister::from_json(&read_file(&register)?)?;
            let gdp = GdpObservation::new(gdp_date, Money::new(gdp, register.currency().clone()))?;
            let ratio = debt_to_gdp(&register, &gdp, scope, basis, as_of)?;
            Ok(CommandOutput::plain(format!("{ratio:.6}\n")))
        }
        FiscalCommand::Alert { ratio, threshold } => {
            let status = danger_alert(ratio, threshold)?;
            Ok(CommandOutput::plain(format!("{status}\n")))
        }
    }
}

fn run_report(args: ReportArgs) -> Result<CommandOutput> {
    let table = if args.carlisle {
        carlisle_table()
    } else {
        let path = args.table.as_ref().expect("clap enforces the group");
        let currency = Currency::new(args.currency.clone())?;
        ComparisonTable::parse_csv(&read_file(path)?, &currency)?
    };
    let mut rendered = render_report(&table, args.format)?;
    if args.format == OutputFormat::Table {
        // Append the per-row verdicts underneath the published columns.
        rendered.push_str("\nVerdicts:\n");
        for row in table.rows() {
            let v = verdict(row);
            rendered.push_str(&format!(
                "{}% -> {} (margin {})\n",
                percent_string(row.rate()),
                v.selected,
                v.margin.amount_string()
            ));
        }
    }
    Ok(CommandOutput::plain(rendered))
}
