//! Fidelity landscapes, power-law order estimation along one error axis,
//! classification and cross-family comparison.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::catalog::{self, BuildParams, FamilyId};
use crate::error::{Error, Result};
use crate::pulse::{ErrorPoint, PulseSequence};
use crate::toggling::{check_conditions, to_toggling, PhaseList, DEFAULT_TOL};

/// Error axis probed by [`infidelity_order`]; the other error is held at 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Pse,
    Ore,
}

impl Axis {
    pub fn point(self, x: f64) -> ErrorPoint {
        match self {
            Axis::Pse => ErrorPoint::new(x, 0.0),
            Axis::Ore => ErrorPoint::new(0.0, x),
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::Pse => "pse",
            Axis::Ore => "ore",
        })
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Axis> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pse" | "epsilon" | "eps" => Ok(Axis::Pse),
            "ore" | "f" => Ok(Axis::Ore),
            other => Err(Error::InvalidParams(format!("unknown axis {other:?}"))),
        }
    }
}

/// Tuning of the order estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitConfig {
    /// Lower infidelity bound of the first fit window.
    pub window_low: f64,
    /// Upper infidelity bound of the first fit window.
    pub window_high: f64,
    /// Decades the window slides down per retry.
    pub window_step_decades: f64,
    pub max_window_shifts: usize,
    /// Error magnitudes scanned when locating the window.
    pub scan_min: f64,
    pub scan_max: f64,
    pub scan_points: usize,
    /// Log-spaced samples used in the fit.
    pub fit_points: usize,
    /// Largest distance of the slope from an integer that still rounds.
    pub rounding_gate: f64,
    /// Largest relative deviation from the fitted power law.
    pub residual_gate: f64,
    /// Below this the axis is treated as exact.
    pub flat_threshold: f64,
    /// Position of the Richardson step inside the window, in log fraction.
    pub richardson_position: f64,
    /// Most even-power correction terms tried in the deepest window when no
    /// plain power law passes the gates.
    pub correction_terms: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            window_low: 1e-10,
            window_high: 1e-3,
            window_step_decades: 2.0,
            max_window_shifts: 6,
            scan_min: 1e-9,
            scan_max: 0.9,
            scan_points: 321,
            fit_points: 16,
            rounding_gate: 0.15,
            residual_gate: 0.02,
            flat_threshold: 1e-13,
            richardson_position: 0.3,
            correction_terms: 3,
        }
    }
}

/// Fitted power law `1 − F ≈ coefficient · x^order` along one axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrderEstimate {
    pub exponent: f64,
    pub rounded_order: i32,
    /// False when no window produced a slope that passed the rounding and
    /// residual gates.
    pub is_integer: bool,
    pub coefficient: f64,
    pub fit_residual: f64,
    /// Error magnitudes `(min, max)` spanned by the fit.
    pub window: (f64, f64),
}

fn log_space(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(move |i| {
        if i + 1 == n {
            hi
        } else {
            (a + (b - a) * i as f64 / (n - 1) as f64).exp()
        }
    })
}

/// Infidelity averaged over `±x`, which removes odd-power tails.
fn symmetric_infidelity(seq: &PulseSequence, axis: Axis, x: f64) -> f64 {
    0.5 * (seq.infidelity(axis.point(x)) + seq.infidelity(axis.point(-x)))
}

struct Window {
    lo: f64,
    hi: f64,
    /// `(ln x, ln y, (x/hi)²)` per sample.
    samples: Vec<(f64, f64, f64)>,
}

impl Window {
    fn sample(
        seq: &PulseSequence,
        axis: Axis,
        cfg: &FitConfig,
        lo: f64,
        hi: f64,
    ) -> Option<Window> {
        let mut samples = Vec::with_capacity(cfg.fit_points);
        for x in log_space(lo, hi, cfg.fit_points) {
            let y = symmetric_infidelity(seq, axis, x);
            if y.is_nan() || y <= 0.0 {
                return None;
            }
            samples.push((x.ln(), y.ln(), (x / hi).powi(2)));
        }
        Some(Window { lo, hi, samples })
    }

    /// Least squares of `ln y` on `[ln x, 1, u, u², …]` with `corrections`
    /// powers of `u = (x/hi)²`.
    fn fit(&self, corrections: usize) -> Option<Fit> {
        let cols = 2 + corrections;
        if self.samples.len() <= cols {
            return None;
        }
        let design = DMatrix::from_fn(self.samples.len(), cols, |r, c| {
            let (lx, _, u) = self.samples[r];
            match c {
                0 => lx,
                1 => 1.0,
                k => u.powi(k as i32 - 1),
            }
        });
        let target = DVector::from_iterator(self.samples.len(), self.samples.iter().map(|s| s.1));
        let coef = design.clone().svd(true, true).solve(&target, 1e-14).ok()?;
        let residual = (design * &coef - target)
            .iter()
            .map(|d| (d.exp() - 1.0).abs())
            .fold(0.0, f64::max);
        Some(Fit {
            slope: coef[0],
            residual,
        })
    }
}

struct Fit {
    slope: f64,
    residual: f64,
}

impl Fit {
    fn passes(&self, cfg: &FitConfig) -> bool {
        (self.slope - self.slope.round()).abs() < cfg.rounding_gate
            && self.residual < cfg.residual_gate
    }
}

/// Looks for two consecutive correction depths that agree on the same even
/// order. Symmetrized infidelity is even in `x`, so an odd answer means the
/// window still mixes orders.
fn corrected_fit(window: &Window, cfg: &FitConfig) -> Option<Fit> {
    let fits: Vec<Option<Fit>> = (1..=cfg.correction_terms).map(|m| window.fit(m)).collect();
    fits.windows(2).find_map(|pair| match pair {
        [Some(a), Some(b)]
            if a.passes(cfg)
                && b.passes(cfg)
                && a.slope.round() == b.slope.round()
                && b.slope.round() as i64 % 2 == 0 =>
        {
            Some(Fit {
                slope: b.slope,
                residual: b.residual,
            })
        }
        _ => None,
    })
}

/// Estimates the infidelity order along `axis` with the default settings.
pub fn infidelity_order(seq: &PulseSequence, axis: Axis) -> Result<OrderEstimate> {
    infidelity_order_with(seq, axis, &FitConfig::default())
}

/// Estimates the infidelity order along `axis`.
///
/// The fit window is the contiguous stretch of small errors whose
/// infidelity lies in `[window_low, window_high]`. When that stretch is not
/// a clean power law the bounds slide down by `window_step_decades` and the
/// fit is retried. If no window passes, the deepest one is refitted with
/// even-power corrections and accepted only when successive correction
/// depths agree. The slope is never forced to a value.
pub fn infidelity_order_with(
    seq: &PulseSequence,
    axis: Axis,
    cfg: &FitConfig,
) -> Result<OrderEstimate> {
    let scan: Vec<(f64, f64)> = log_space(cfg.scan_min, cfg.scan_max, cfg.scan_points)
        .map(|x| (x, symmetric_infidelity(seq, axis, x)))
        .collect();
    if scan.iter().all(|&(_, y)| y < cfg.flat_threshold) {
        return Err(Error::DegenerateFlat {
            threshold: cfg.flat_threshold,
        });
    }

    let mut chosen: Option<(Window, Fit, bool)> = None;
    for shift in 0..=cfg.max_window_shifts {
        let scale = 10f64.powf(-cfg.window_step_decades * shift as f64);
        let (low, high) = (cfg.window_low * scale, cfg.window_high * scale);
        let Some(start) = scan.iter().position(|&(_, y)| y >= low) else {
            continue;
        };
        let len = scan[start..]
            .iter()
            .take_while(|&&(_, y)| y <= high)
            .count();
        if len < 2 {
            continue;
        }
        let (lo, hi) = (scan[start].0, scan[start + len - 1].0);
        let Some(window) = Window::sample(seq, axis, cfg, lo, hi) else {
            continue;
        };
        let Some(fit) = window.fit(0) else {
            continue;
        };
        let ok = fit.passes(cfg);
        chosen = Some((window, fit, ok));
        if ok {
            break;
        }
    }
    let (window, mut fit, mut accepted) = chosen
        .ok_or_else(|| Error::Domain(format!("no usable fit window along the {axis} axis")))?;
    if !accepted {
        if let Some(corrected) = corrected_fit(&window, cfg) {
            fit = corrected;
            accepted = true;
        }
    }

    let order = fit.slope.round() as i32;
    let h = window.lo * (window.hi / window.lo).powf(cfg.richardson_position);
    let scaled = |x: f64| symmetric_infidelity(seq, axis, x) / x.powi(order);
    // The symmetrized ratio has an x² correction, hence weights 4 and 1.
    let coefficient = (4.0 * scaled(h / 2.0) - scaled(h)) / 3.0;
    Ok(OrderEstimate {
        exponent: fit.slope,
        rounded_order: order,
        is_integer: accepted,
        coefficient,
        fit_residual: fit.residual,
        window: (window.lo, window.hi),
    })
}

/// Rectangle and resolution of a fidelity scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub eps_min: f64,
    pub eps_max: f64,
    pub f_min: f64,
    pub f_max: f64,
    pub eps_points: usize,
    pub f_points: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec::square(-1.0, 1.0, 201)
    }
}

impl GridSpec {
    pub fn square(min: f64, max: f64, points: usize) -> Self {
        GridSpec {
            eps_min: min,
            eps_max: max,
            f_min: min,
            f_max: max,
            eps_points: points,
            f_points: points,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.eps_points < 2 || self.f_points < 2 {
            return Err(Error::InvalidParams(
                "grid needs at least 2 points per axis".into(),
            ));
        }
        for (lo, hi) in [(self.eps_min, self.eps_max), (self.f_min, self.f_max)] {
            if !lo.is_finite() || !hi.is_finite() || lo >= hi {
                return Err(Error::InvalidParams(format!(
                    "grid range [{lo}, {hi}] is invalid"
                )));
            }
        }
        Ok(())
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            if i + 1 == n {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (n - 1) as f64
            }
        })
        .collect()
}

/// Fidelity sampled on a rectangular error grid, stored f-major: the
/// value at `(epsilon[i], f[j])` is `fidelity[j * epsilon.len() + i]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridScan {
    pub epsilon: Vec<f64>,
    pub f: Vec<f64>,
    pub fidelity: Vec<f64>,
}

impl GridScan {
    pub fn get(&self, eps_index: usize, f_index: usize) -> f64 {
        self.fidelity[f_index * self.epsilon.len() + eps_index]
    }

    pub fn len(&self) -> usize {
        self.fidelity.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fidelity.is_empty()
    }

    /// `(epsilon, f, fidelity)` in storage order.
    pub fn rows(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.f.iter().enumerate().flat_map(move |(j, &f)| {
            self.epsilon
                .iter()
                .enumerate()
                .map(move |(i, &e)| (e, f, self.get(i, j)))
        })
    }
}

/// Evaluates the fidelity on every grid point, in parallel.
///
/// Each point is computed independently, so the output is identical for
/// any thread count.
pub fn scan_grid(seq: &PulseSequence, grid: &GridSpec) -> Result<GridScan> {
    grid.validate()?;
    let epsilon = linspace(grid.eps_min, grid.eps_max, grid.eps_points);
    let f = linspace(grid.f_min, grid.f_max, grid.f_points);
    let fidelity = f
        .par_iter()
        .flat_map_iter(|&fv| {
            epsilon
                .iter()
                .map(move |&e| seq.fidelity(ErrorPoint::new(e, fv)))
        })
        .collect();
    Ok(GridScan {
        epsilon,
        f,
        fidelity,
    })
}

/// Numeric result on one axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum AxisResult {
    Order(OrderEstimate),
    /// Infidelity indistinguishable from zero along the axis.
    Exact,
}

impl AxisResult {
    fn measure(seq: &PulseSequence, axis: Axis) -> Result<AxisResult> {
        match infidelity_order(seq, axis) {
            Ok(e) => Ok(AxisResult::Order(e)),
            Err(Error::DegenerateFlat { .. }) => Ok(AxisResult::Exact),
            Err(e) => Err(e),
        }
    }

    /// Corrected error order: infidelity order `2m + 2` means order `m`.
    pub fn corrected(&self) -> CorrectedOrder {
        match self {
            AxisResult::Order(e) => CorrectedOrder::Finite((e.rounded_order - 2) / 2),
            AxisResult::Exact => CorrectedOrder::Exact,
        }
    }

    pub fn estimate(&self) -> Option<&OrderEstimate> {
        match self {
            AxisResult::Order(e) => Some(e),
            AxisResult::Exact => None,
        }
    }
}

/// Serializes as an integer, or the string `"exact"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorrectedOrder {
    Finite(i32),
    Exact,
}

impl Serialize for CorrectedOrder {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            CorrectedOrder::Finite(v) => s.serialize_i32(*v),
            CorrectedOrder::Exact => s.serialize_str("exact"),
        }
    }
}

impl CorrectedOrder {
    fn rank(self) -> i64 {
        match self {
            CorrectedOrder::Finite(v) => v as i64,
            CorrectedOrder::Exact => i64::from(i32::MAX),
        }
    }
}

impl fmt::Display for CorrectedOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CorrectedOrder::Finite(v) => write!(f, "{v}"),
            CorrectedOrder::Exact => f.write_str("exact"),
        }
    }
}

/// Corrected PSE and ORE orders of a sequence.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub pse: AxisResult,
    pub ore: AxisResult,
    pub i: CorrectedOrder,
    pub j: CorrectedOrder,
    /// Disagreements between the numeric fit and the algebraic conditions.
    pub warnings: Vec<String>,
}

fn cross_check(axis: Axis, numeric: &AxisResult, algebraic: u32, warnings: &mut Vec<String>) {
    if let AxisResult::Order(e) = numeric {
        if !e.is_integer {
            warnings.push(format!(
                "{axis}: fitted slope {:.3} is not a clean integer power law",
                e.exponent
            ));
        }
    }
    let consistent = match numeric.corrected() {
        CorrectedOrder::Exact => algebraic == 2,
        CorrectedOrder::Finite(m) if algebraic < 2 => m == algebraic as i32,
        CorrectedOrder::Finite(m) => m >= 2,
    };
    if !consistent {
        warnings.push(format!(
            "{axis}: numeric order {} disagrees with algebraic conditions (order {algebraic} satisfied)",
            numeric.corrected()
        ));
    }
}

/// Classifies a sequence by its corrected orders. For π-pulse trains the
/// numeric orders are cross-checked against the algebraic conditions.
pub fn classify(seq: &PulseSequence) -> Result<Classification> {
    seq.validate()?;
    let pse = AxisResult::measure(seq, Axis::Pse)?;
    let ore = AxisResult::measure(seq, Axis::Ore)?;
    let mut warnings = Vec::new();
    if seq.is_all_pi() && seq.len().is_multiple_of(2) {
        let lab = PhaseList::new(seq.phases())?;
        let report = check_conditions(&to_toggling(&lab), seq.target_phi, DEFAULT_TOL)?;
        cross_check(Axis::Pse, &pse, report.pse_order(), &mut warnings);
        cross_check(Axis::Ore, &ore, report.ore_order(), &mut warnings);
    } else {
        for (axis, r) in [(Axis::Pse, &pse), (Axis::Ore, &ore)] {
            if let AxisResult::Order(e) = r {
                if !e.is_integer {
                    warnings.push(format!(
                        "{axis}: fitted slope {:.3} is not a clean integer power law",
                        e.exponent
                    ));
                }
            }
        }
    }
    Ok(Classification {
        i: pse.corrected(),
        j: ore.corrected(),
        pse,
        ore,
        warnings,
    })
}

/// Published time costs of sequences whose pulse lists are not available.
pub const INFORMATIONAL_TIME_COSTS: [(&str, f64); 3] = [
    ("reduced CinSK", 16.7),
    ("reduced CinBB", 16.7),
    ("reduced SKinsC", 12.7),
];

/// One family to include in a comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompareEntry {
    pub family: FamilyId,
    pub params: BuildParams,
}

impl From<FamilyId> for CompareEntry {
    fn from(family: FamilyId) -> Self {
        CompareEntry {
            family,
            params: BuildParams::default(),
        }
    }
}

/// One line of a comparison report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareRow {
    pub label: String,
    pub phi: f64,
    pub time_cost: Option<f64>,
    pub pse: Option<AxisResult>,
    pub ore: Option<AxisResult>,
    pub i: Option<CorrectedOrder>,
    pub j: Option<CorrectedOrder>,
    /// Set for rows that only carry a published time cost.
    pub informational: bool,
    pub error: Option<String>,
    pub warnings: Vec<String>,
}

impl CompareRow {
    fn failed(label: String, phi: f64, err: Error) -> Self {
        CompareRow {
            label,
            phi,
            time_cost: None,
            pse: None,
            ore: None,
            i: None,
            j: None,
            informational: false,
            error: Some(err.to_string()),
            warnings: Vec::new(),
        }
    }

    fn total_order(&self) -> i64 {
        match (self.i, self.j) {
            (Some(i), Some(j)) => i.rank().saturating_add(j.rank()),
            _ => i64::MIN,
        }
    }
}

fn compare_one(entry: &CompareEntry, phi: f64) -> CompareRow {
    let label = match entry.params.general {
        Some(g) if entry.family == FamilyId::General => format!("general_n{}", g.n),
        _ => entry.family.name().to_string(),
    };
    let outcome = catalog::build(entry.family, phi, &entry.params).and_then(|seq| {
        let class = classify(&seq)?;
        Ok((seq.time_cost(), class))
    });
    match outcome {
        Ok((cost, class)) => CompareRow {
            label,
            phi,
            time_cost: Some(cost),
            i: Some(class.i),
            j: Some(class.j),
            pse: Some(class.pse),
            ore: Some(class.ore),
            informational: false,
            error: None,
            warnings: class.warnings,
        },
        Err(e) => CompareRow::failed(label, phi, e),
    }
}

/// Builds and classifies each family at `phi`. Rows are sorted by time
/// cost, then by total corrected order descending; failures are reported
/// per row and sort last.
pub fn compare(entries: &[CompareEntry], phi: f64, include_informational: bool) -> Vec<CompareRow> {
    let mut rows: Vec<CompareRow> = entries.par_iter().map(|e| compare_one(e, phi)).collect();
    if include_informational {
        rows.extend(
            INFORMATIONAL_TIME_COSTS
                .iter()
                .map(|&(label, cost)| CompareRow {
                    label: label.to_string(),
                    phi,
                    time_cost: Some(cost),
                    pse: None,
                    ore: None,
                    i: None,
                    j: None,
                    informational: true,
                    error: None,
                    warnings: Vec::new(),
                }),
        );
    }
    rows.sort_by(|a, b| {
        let ta = a.time_cost.unwrap_or(f64::INFINITY);
        let tb = b.time_cost.unwrap_or(f64::INFINITY);
        ta.total_cmp(&tb)
            .then(b.total_order().cmp(&a.total_order()))
    });
    rows
}
