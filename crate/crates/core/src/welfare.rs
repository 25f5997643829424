//! Equity diagnostics and the welfare-positioning model: marginal-utility
//! income weights, Gini and top-share statistics, social-welfare-function
//! families evaluated over a two-party utility possibility frontier, and
//! the rate-to-regime classifier.
//!
//! The frontier is a sampled curve with linear interpolation between
//! points, so the optimizer can be checked exactly against a grid oracle.

use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

// ---------------------------------------------------------------------------
// Income weights and inequality statistics
// ---------------------------------------------------------------------------

/// The marginal value of a rich person's extra unit relative to a poor
/// person's under iso-elastic utility: `income_ratio^(-mu)`.
pub fn mu_weight(income_ratio: f64, mu: f64) -> Result<f64> {
    if !income_ratio.is_finite() || income_ratio <= 0.0 {
        return Err(Error::invalid(format!(
            "income ratio must be > 0, got {income_ratio}"
        )));
    }
    if !mu.is_finite() || mu < 0.0 {
        return Err(Error::invalid(format!("mu must be >= 0, got {mu}")));
    }
    Ok(income_ratio.powf(-mu))
}

fn check_holdings(holdings: &[f64]) -> Result<()> {
    if holdings.is_empty() {
        return Err(Error::invalid("holdings must be non-empty"));
    }
    for &x in holdings {
        if !x.is_finite() || x < 0.0 {
            return Err(Error::invalid(format!(
                "holdings must be finite and >= 0, got {x}"
            )));
        }
    }
    if holdings.iter().all(|&x| x == 0.0) {
        return Err(Error::invalid("holdings must not all be zero"));
    }
    Ok(())
}

/// Gini coefficient in its mean-absolute-difference form,
/// `sum_i sum_j |x_i - x_j| / (2 n^2 mean)`, computed via the sorted
/// rank identity.
pub fn gini(holdings: &[f64]) -> Result<f64> {
    check_holdings(holdings)?;
    let n = holdings.len();
    let mut sorted = holdings.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("holdings are finite"));
    let total: f64 = sorted.iter().sum();
    // sum_i sum_j |x_i - x_j| = 2 * sum_k (2k - n + 1) x_(k), 0-based
    // ascending ranks.
    let weighted: f64 = sorted
        .iter()
        .enumerate()
        .map(|(k, &x)| (2.0 * k as f64 - n as f64 + 1.0) * x)
        .sum();
    Ok(weighted / (n as f64 * total))
}

/// Share of the total held by the richest `ceil(fraction * n)` holders.
/// Ties sort by original index, so the result is deterministic.
pub fn top_share(holdings: &[f64], fraction: f64) -> Result<f64> {
    check_holdings(holdings)?;
    if !fraction.is_finite() || fraction <= 0.0 || fraction > 1.0 {
        return Err(Error::invalid(format!(
            "fraction must lie in (0, 1], got {fraction}"
        )));
    }
    let n = holdings.len();
    let mut by_wealth: Vec<usize> = (0..n).collect();
    // Stable sort: equal holdings keep their original index order.
    by_wealth.sort_by(|&i, &j| holdings[j].partial_cmp(&holdings[i]).expect("finite"));
    let k = ((fraction * n as f64).ceil() as usize).clamp(1, n);
    let top: f64 = by_wealth[..k].iter().map(|&i| holdings[i]).sum();
    let total: f64 = holdings.iter().sum();
    Ok(top / total)
}

// ---------------------------------------------------------------------------
// Social welfare functions
// ---------------------------------------------------------------------------

/// Utilities of the two parties, both finite and non-negative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UtilityPair {
    pub u_a: f64,
    pub u_b: f64,
}

impl UtilityPair {
    pub fn new(u_a: f64, u_b: f64) -> Result<Self> {
        let pair = UtilityPair { u_a, u_b };
        pair.validate()?;
        Ok(pair)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("u_a", self.u_a), ("u_b", self.u_b)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::invalid(format!(
                    "{name} must be finite and >= 0, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// The ethical objective: a weighted sum, an inequality-averse CES
/// aggregate (log form at epsilon = 1), maximin, or strict equality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum SwfSpec {
    Utilitarian { weight_a: f64, weight_b: f64 },
    Ces { epsilon: f64, weight_a: f64, weight_b: f64 },
    Rawlsian,
    Egalitarian,
}

impl SwfSpec {
    pub fn utilitarian(weight_a: f64, weight_b: f64) -> Result<Self> {
        let spec = SwfSpec::Utilitarian { weight_a, weight_b };
        spec.validate()?;
        Ok(spec)
    }

    pub fn ces(epsilon: f64, weight_a: f64, weight_b: f64) -> Result<Self> {
        let spec = SwfSpec::Ces {
            epsilon,
            weight_a,
            weight_b,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            SwfSpec::Utilitarian { weight_a, weight_b } => check_weights(weight_a, weight_b),
            SwfSpec::Ces {
                epsilon,
                weight_a,
                weight_b,
            } => {
                if !epsilon.is_finite() || epsilon < 0.0 {
                    return Err(Error::invalid(format!(
                        "epsilon must be >= 0, got {epsilon}"
                    )));
                }
                check_weights(weight_a, weight_b)
            }
            SwfSpec::Rawlsian | SwfSpec::Egalitarian => Ok(()),
        }
    }
}

fn check_weights(weight_a: f64, weight_b: f64) -> Result<()> {
    for (name, w) in [("weight_a", weight_a), ("weight_b", weight_b)] {
        if !w.is_finite() || w <= 0.0 {
            return Err(Error::invalid(format!("{name} must be > 0, got {w}")));
        }
    }
    Ok(())
}

/// A welfare value plus the egalitarian validity flag: when
/// `equal_required` is set the value only ranks pairs on the
/// `u_a = u_b` line, and consumers must check that themselves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwfValue {
    pub value: f64,
    pub equal_required: bool,
}

/// Evaluates the objective at one utility pair.
pub fn swf_value(spec: &SwfSpec, pair: &UtilityPair) -> Result<SwfValue> {
    spec.validate()?;
    pair.validate()?;
    let value = match *spec {
        SwfSpec::Utilitarian { weight_a, weight_b } => weight_a * pair.u_a + weight_b * pair.u_b,
        SwfSpec::Ces {
            epsilon,
            weight_a,
            weight_b,
        } => {
            if epsilon >= 1.0 && (pair.u_a == 0.0 || pair.u_b == 0.0) {
                return Err(Error::invalid(
                    "ces is undefined at a zero utility when epsilon >= 1",
                ));
            }
            ces_value(epsilon, weight_a, weight_b, pair.u_a, pair.u_b)
        }
        SwfSpec::Rawlsian | SwfSpec::Egalitarian => pair.u_a.min(pair.u_b),
    };
    Ok(SwfValue {
        value,
        equal_required: matches!(spec, SwfSpec::Egalitarian),
    })
}

fn ces_value(epsilon: f64, weight_a: f64, weight_b: f64, u_a: f64, u_b: f64) -> f64 {
    if epsilon == 1.0 {
        weight_a * u_a.ln() + weight_b * u_b.ln()
    } else {
        (weight_a * u_a.powf(1.0 - epsilon) + weight_b * u_b.powf(1.0 - epsilon)) / (1.0 - epsilon)
    }
}

/// Objective value for maximization: undefined points rank below
/// everything instead of erroring, so the optimizer simply avoids them.
fn value_for_max(spec: &SwfSpec, u_a: f64, u_b: f64) -> f64 {
    match *spec {
        SwfSpec::Utilitarian { weight_a, weight_b } => weight_a * u_a + weight_b * u_b,
        SwfSpec::Ces {
            epsilon,
            weight_a,
            weight_b,
        } => {
            if epsilon >= 1.0 && (u_a == 0.0 || u_b == 0.0) {
                f64::NEG_INFINITY
            } else {
                let v = ces_value(epsilon, weight_a, weight_b, u_a, u_b);
                if v.is_nan() {
                    f64::NEG_INFINITY
                } else {
                    v
                }
            }
        }
        SwfSpec::Rawlsian | SwfSpec::Egalitarian => u_a.min(u_b),
    }
}

// ---------------------------------------------------------------------------
// Utility possibility frontier
// ---------------------------------------------------------------------------

/// A downward-sloping frontier sampled at three or more points: `u_a`
/// strictly increasing, `u_b` strictly decreasing, with linear
/// interpolation between neighbours defining the curve.
#[derive(Debug, Clone, PartialEq)]
pub struct UtilityFrontier {
    points: Vec<UtilityPair>,
}

impl UtilityFrontier {
    pub fn new(points: Vec<UtilityPair>) -> Result<Self> {
        if points.len() < 3 {
            return Err(Error::invalid(format!(
                "frontier needs at least 3 points, got {}",
                points.len()
            )));
        }
        for point in &points {
            point.validate()?;
        }
        for pair in points.windows(2) {
            if pair[1].u_a <= pair[0].u_a {
                return Err(Error::invalid(
                    "frontier u_a values must be strictly increasing",
                ));
            }
            if pair[1].u_b >= pair[0].u_b {
                return Err(Error::invalid(
                    "frontier u_b values must be strictly decreasing",
                ));
            }
        }
        Ok(UtilityFrontier { points })
    }

    pub fn points(&self) -> &[UtilityPair] {
        &self.points
    }

    /// Parses the frontier CSV interface: header `u_a,u_b` then one point
    /// per line.
    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut saw_header = false;
        let mut points = Vec::new();
        let mut last_line = 0;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            last_line = line_no;
            let line = raw.strip_suffix('\r').unwrap_or(raw);
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            if !saw_header {
                if line != "u_a,u_b" {
                    return Err(Error::parse(line_no, "expected header `u_a,u_b`"));
                }
                saw_header = true;
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 2 {
                return Err(Error::parse(
                    line_no,
                    format!("expected 2 fields, got {}", fields.len()),
                ));
            }
            let u_a: f64 = fields[0]
                .parse()
                .map_err(|_| Error::parse(line_no, format!("invalid u_a {:?}", fields[0])))?;
            let u_b: f64 = fields[1]
                .parse()
                .map_err(|_| Error::parse(line_no, format!("invalid u_b {:?}", fields[1])))?;
            points.push(UtilityPair { u_a, u_b });
        }
        if !saw_header {
            return Err(Error::parse(last_line.max(1), "missing header line"));
        }
        UtilityFrontier::new(points)
    }

    /// The interpolated point at global parameter `s` in [0, 1]; `s`
    /// spends an equal share on every segment.
    fn at(&self, s: f64) -> UtilityPair {
        let m = self.points.len();
        let scaled = s.clamp(0.0, 1.0) * (m - 1) as f64;
        let seg = (scaled.floor() as usize).min(m - 2);
        let tau = scaled - seg as f64;
        let (p, q) = (&self.points[seg], &self.points[seg + 1]);
        UtilityPair {
            u_a: p.u_a + tau * (q.u_a - p.u_a),
            u_b: p.u_b + tau * (q.u_b - p.u_b),
        }
    }
}

const GRID_SAMPLES: usize = 10_000;
const REFINE_ITERATIONS: usize = 200;

/// Maximizes the objective over the interpolated frontier: a dense grid
/// scan followed by ternary refinement around the winning sample, with
/// ties broken toward smaller `u_a`. The egalitarian objective instead
/// returns the frontier's crossing with the `u_a = u_b` line.
pub fn optimal_point(frontier: &UtilityFrontier, spec: &SwfSpec) -> Result<UtilityPair> {
    spec.validate()?;
    if matches!(spec, SwfSpec::Egalitarian) {
        return diagonal_crossing(frontier);
    }

    let eval = |s: f64| {
        let p = frontier.at(s);
        value_for_max(spec, p.u_a, p.u_b)
    };

    // Grid scan; strict improvement keeps the smallest-u_a argmax.
    let mut best_s = 0.0;
    let mut best_value = eval(0.0);
    for i in 1..=GRID_SAMPLES {
        let s = i as f64 / GRID_SAMPLES as f64;
        let value = eval(s);
        if value > best_value {
            best_value = value;
            best_s = s;
        }
    }

    // Ternary refinement between the winning sample's neighbours; the
    // refined point is taken only on strict improvement so plateau ties
    // still resolve toward smaller u_a.
    let step = 1.0 / GRID_SAMPLES as f64;
    let mut lo = (best_s - step).max(0.0);
    let mut hi = (best_s + step).min(1.0);
    for _ in 0..REFINE_ITERATIONS {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if eval(m1) < eval(m2) {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    let refined_s = 0.5 * (lo + hi);
    if eval(refined_s) > best_value {
        best_s = refined_s;
    }
    Ok(frontier.at(best_s))
}

fn diagonal_crossing(frontier: &UtilityFrontier) -> Result<UtilityPair> {
    // gap = u_b - u_a is strictly decreasing along the frontier, so there
    // is at most one crossing.
    let points = frontier.points();
    let gap = |p: &UtilityPair| p.u_b - p.u_a;
    if gap(&points[0]) < 0.0 || gap(points.last().expect(">= 3 points")) > 0.0 {
        return Err(Error::NoCrossing);
    }
    for pair in points.windows(2) {
        let (g0, g1) = (gap(&pair[0]), gap(&pair[1]));
        if g0 == 0.0 {
            return Ok(pair[0]);
        }
        if g0 > 0.0 && g1 <= 0.0 {
            let tau = g0 / (g0 - g1);
            return Ok(UtilityPair {
                u_a: pair[0].u_a + tau * (pair[1].u_a - pair[0].u_a),
                u_b: pair[0].u_b + tau * (pair[1].u_b - pair[0].u_b),
            });
        }
    }
    Ok(*points.last().expect(">= 3 points"))
}

// ---------------------------------------------------------------------------
// Rate-to-regime classification
// ---------------------------------------------------------------------------

/// Where a discount rate places a society on the efficiency-equity
/// trade-off, listed from most equity-leaning to most efficiency-leaning.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegimeLabel {
    #[serde(rename = "Rawlsian-leaning")]
    RawlsianLeaning,
    #[serde(rename = "between-weighted-utilitarian-and-Rawlsian")]
    BetweenWeightedUtilitarianAndRawlsian,
    #[serde(rename = "between-libertarian-and-egalitarian")]
    BetweenLibertarianAndEgalitarian,
    #[serde(rename = "libertarian")]
    Libertarian,
}

impl RegimeLabel {
    /// Position in the listed order: 0 is most equity-leaning.
    pub fn efficiency_rank(&self) -> u8 {
        match self {
            RegimeLabel::RawlsianLeaning => 0,
            RegimeLabel::BetweenWeightedUtilitarianAndRawlsian => 1,
            RegimeLabel::BetweenLibertarianAndEgalitarian => 2,
            RegimeLabel::Libertarian => 3,
        }
    }
}

impl fmt::Display for RegimeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegimeLabel::RawlsianLeaning => f.write_str("Rawlsian-leaning"),
            RegimeLabel::BetweenWeightedUtilitarianAndRawlsian => {
                f.write_str("between-weighted-utilitarian-and-Rawlsian")
            }
            RegimeLabel::BetweenLibertarianAndEgalitarian => {
                f.write_str("between-libertarian-and-egalitarian")
            }
            RegimeLabel::Libertarian => f.write_str("libertarian"),
        }
    }
}

/// One classification step: `label` applies from `min_rate` (inclusive)
/// up to the next threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeThreshold {
    pub min_rate: f64,
    pub label: RegimeLabel,
}

/// An ascending ladder of thresholds covering all rates from zero up.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RegimeMappingRaw", into = "RegimeMappingRaw")]
pub struct RegimeMapping {
    thresholds: Vec<RegimeThreshold>,
}

#[derive(Serialize, Deserialize)]
struct RegimeMappingRaw {
    thresholds: Vec<RegimeThreshold>,
}

impl TryFrom<RegimeMappingRaw> for RegimeMapping {
    type Error = Error;

    fn try_from(raw: RegimeMappingRaw) -> Result<Self> {
        RegimeMapping::new(raw.thresholds)
    }
}

impl From<RegimeMapping> for RegimeMappingRaw {
    fn from(mapping: RegimeMapping) -> Self {
        RegimeMappingRaw {
            thresholds: mapping.thresholds,
        }
    }
}

impl RegimeMapping {
    pub fn new(thresholds: Vec<RegimeThreshold>) -> Result<Self> {
        if thresholds.is_empty() {
            return Err(Error::invalid("mapping needs at least one threshold"));
        }
        if thresholds[0].min_rate != 0.0 {
            return Err(Error::invalid(
                "first threshold must start at rate 0 so every rate classifies",
            ));
        }
        for t in &thresholds {
            if !t.min_rate.is_finite() || t.min_rate < 0.0 {
                return Err(Error::invalid(format!(
                    "threshold min_rate must be >= 0, got {}",
                    t.min_rate
                )));
            }
        }
        for pair in thresholds.windows(2) {
            if pair[1].min_rate <= pair[0].min_rate {
                return Err(Error::invalid(
                    "threshold min_rates must be strictly increasing",
                ));
            }
        }
        Ok(RegimeMapping { thresholds })
    }

    pub fn thresholds(&self) -> &[RegimeThreshold] {
        &self.thresholds
    }
}

impl Default for RegimeMapping {
    /// The built-in ladder interpolating the narrative anchors: the 2%,
    /// 4.5% and 7% cut points are artifact conventions, configurable and
    /// not published values.
    fn default() -> Self {
        static DEFAULT: OnceLock<RegimeMapping> = OnceLock::new();
        DEFAULT
            .get_or_init(|| {
                RegimeMapping::new(vec![
                    RegimeThreshold {
                        min_rate: 0.0,
                        label: RegimeLabel::RawlsianLeaning,
                    },
                    RegimeThreshold {
                        min_rate: 0.02,
                        label: RegimeLabel::BetweenWeightedUtilitarianAndRawlsian,
                    },
                    RegimeThreshold {
                        min_rate: 0.045,
                        label: RegimeLabel::BetweenLibertarianAndEgalitarian,
                    },
                    RegimeThreshold {
                        min_rate: 0.07,
                        label: RegimeLabel::Libertarian,
                    },
                ])
                .expect("default mapping is valid")
            })
            .clone()
    }
}

/// The label of the highest threshold whose `min_rate` does not exceed
/// the rate.
pub fn classify_rate(rate: f64, mapping: &RegimeMapping) -> Result<RegimeLabel> {
    if !rate.is_finite() || rate < 0.0 {
        return Err(Error::invalid(format!("rate must be >= 0, got {rate}")));
    }
    let mut label = mapping.thresholds()[0].label;
    for threshold in mapping.thresholds() {
        if threshold.min_rate <= rate {
            label = threshold.label;
        } else {
            break;
        }
    }
    Ok(label)
}
