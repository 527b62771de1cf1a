//! Named composite-pulse families, the arbitrary-order polygon families,
//! literature reference sequences, and a solver for rigid-shape groupings
//! of toggling-frame phases.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pulse::{Pulse, PulseSequence};
use crate::toggling::{circular_distance, from_toggling, TogglingPhaseList};

/// Orientation or branch sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    #[default]
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

impl FromStr for Sign {
    type Err = Error;

    fn from_str(s: &str) -> Result<Sign> {
        match s.trim().to_ascii_lowercase().as_str() {
            "+" | "plus" | "+1" | "1" => Ok(Sign::Plus),
            "-" | "minus" | "-1" => Ok(Sign::Minus),
            other => Err(Error::InvalidParams(format!("unknown sign {other:?}"))),
        }
    }
}

macro_rules! families {
    ($($variant:ident => $name:literal, $pulses:expr, $orders:expr, $desc:literal;)*) => {
        /// Every constructible sequence family.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
        #[serde(rename_all = "snake_case")]
        pub enum FamilyId {
            $($variant,)*
        }

        impl FamilyId {
            pub const ALL: &'static [FamilyId] = &[$(FamilyId::$variant,)*];

            pub fn name(self) -> &'static str {
                match self {
                    $(FamilyId::$variant => $name,)*
                }
            }

            /// Pulse count, or `None` when it is a parameter.
            pub fn pulse_count(self) -> Option<usize> {
                match self {
                    $(FamilyId::$variant => $pulses,)*
                }
            }

            /// Claimed corrected orders `(pse, ore)`, or `None` when they
            /// depend on the pulse count.
            pub fn claimed_orders(self) -> Option<(u32, u32)> {
                match self {
                    $(FamilyId::$variant => $orders,)*
                }
            }

            pub fn description(self) -> &'static str {
                match self {
                    $(FamilyId::$variant => $desc,)*
                }
            }
        }
    };
}

families! {
    Baseline => "baseline", Some(2), Some((0, 0)), "two-pulse naive z rotation";
    S4_111 => "s4_111", Some(4), Some((1, 1)), "rhombus of antiparallel pairs";
    S4_112 => "s4_112", Some(4), Some((1, 1)), "rhombus with the opposite full-turn target";
    S6_201 => "s6_201", Some(6), Some((2, 0)), "two counter-rotating triangles";
    S6_202 => "s6_202", Some(6), Some((2, 0)), "three antiparallel pairs";
    S6_203 => "s6_203", Some(6), Some((2, 0)), "antisymmetric closed form, upper branch";
    S6_204 => "s6_204", Some(6), Some((2, 0)), "antisymmetric closed form, lower branch";
    S6_221 => "s6_221", Some(6), Some((2, 2)), "interleaved counter-rotating triangles";
    S6_222 => "s6_222", Some(6), Some((2, 2)), "interleaved triangles with shifted even vertices";
    S8_331 => "s8_331", Some(8), Some((3, 3)), "interleaved counter-rotating squares";
    S8_332 => "s8_332", Some(8), Some((3, 3)), "interleaved squares with shifted even vertices";
    General => "general", None, None, "counter-rotating polygons of any even size n >= 6";
    Scrofulous => "scrofulous", Some(6), Some((2, 0)), "SCROFULOUS reference sequence";
    Sk1 => "sk1", Some(6), Some((2, 0)), "SK1 reference sequence";
    Bb1 => "bb1", Some(8), Some((2, 0)), "BB1 reference sequence";
    IchikawaShort => "ichikawa_short", Some(4), Some((1, 0)), "Ichikawa short sequence (target pi only)";
    IchikawaNested => "ichikawa_nested", Some(8), Some((1, 1)), "Ichikawa nested sequence (target pi only)";
}

impl FamilyId {
    /// Families that can be built from a target angle alone.
    pub fn buildable() -> impl Iterator<Item = FamilyId> {
        FamilyId::ALL
            .iter()
            .copied()
            .filter(|f| *f != FamilyId::General)
    }

    /// Families made only of π pulses, whose conditions can be checked
    /// algebraically.
    pub fn is_pi_train(self) -> bool {
        !matches!(
            self,
            FamilyId::Sk1 | FamilyId::Bb1 | FamilyId::IchikawaShort | FamilyId::IchikawaNested
        )
    }

    /// Only defined for a half-turn target.
    pub fn requires_half_turn(self) -> bool {
        matches!(self, FamilyId::IchikawaShort | FamilyId::IchikawaNested)
    }
}

impl fmt::Display for FamilyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FamilyId {
    type Err = Error;

    fn from_str(s: &str) -> Result<FamilyId> {
        let key = s.trim().to_ascii_lowercase();
        FamilyId::ALL
            .iter()
            .copied()
            .find(|f| f.name() == key)
            .ok_or_else(|| Error::Unsupported(format!("unknown family {s:?}")))
    }
}

/// Parameters of the arbitrary-order polygon family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneralFamilyParams {
    pub n: usize,
    pub alpha: f64,
    pub j1: i64,
    pub j2: i64,
    pub orientation: Sign,
}

impl GeneralFamilyParams {
    pub fn new(n: usize) -> Self {
        GeneralFamilyParams {
            n,
            alpha: 0.0,
            j1: 0,
            j2: 0,
            orientation: Sign::Plus,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.n.is_multiple_of(2) || self.n < 6 {
            return Err(Error::InvalidParams(format!(
                "general family needs an even pulse count n >= 6, got {}",
                self.n
            )));
        }
        if !self.alpha.is_finite() {
            return Err(Error::NonFinite("alpha"));
        }
        Ok(())
    }

    /// Corrected order on both axes.
    pub fn claimed_order(&self) -> u32 {
        (self.n / 2 - 1) as u32
    }

    /// Polygon step and the unit of the `j1`, `j2` vertex offsets.
    fn step_and_offset_unit(&self) -> (f64, f64) {
        let n = self.n;
        if n % 4 == 2 {
            let k = ((n - 2) / 4) as f64;
            (2.0 * PI / (2.0 * k + 1.0), PI / (2.0 * k + 1.0))
        } else {
            let k = (n / 4) as f64;
            (PI / k, PI / (2.0 * k))
        }
    }
}

/// Optional knobs for [`build`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BuildParams {
    pub branch: Sign,
    pub general: Option<GeneralFamilyParams>,
}

impl BuildParams {
    pub fn branch(branch: Sign) -> Self {
        BuildParams {
            branch,
            general: None,
        }
    }

    pub fn general(params: GeneralFamilyParams) -> Self {
        BuildParams {
            branch: params.orientation,
            general: Some(params),
        }
    }
}

/// Claimed `(pse, ore)` corrected orders of a family as built with `params`.
pub fn claimed_orders(family: FamilyId, params: &BuildParams) -> Result<(u32, u32)> {
    match family.claimed_orders() {
        Some(orders) => Ok(orders),
        None => {
            let g = params.general.ok_or_else(missing_general)?;
            g.validate()?;
            Ok((g.claimed_order(), g.claimed_order()))
        }
    }
}

fn missing_general() -> Error {
    Error::InvalidParams("the general family needs n, alpha, j1 and j2".into())
}

/// Builds `family` for the target `Z(phi)` and checks its closure.
pub fn build(family: FamilyId, phi: f64, params: &BuildParams) -> Result<PulseSequence> {
    if !phi.is_finite() {
        return Err(Error::NonFinite("target angle"));
    }
    let s = params.branch.value();
    let label = family.name();
    let pi_train = |phases: Vec<f64>| PulseSequence::from_pi_phases(label, phi, &phases);
    let seq = match family {
        FamilyId::Baseline => pi_train(vec![-phi / 2.0, 0.0]),
        FamilyId::S4_111 => pi_train(vec![
            (-3.0 * phi + 4.0 * PI) / 8.0,
            (-phi + 4.0 * PI) / 8.0,
            (phi + 12.0 * PI) / 8.0,
            (3.0 * phi + 12.0 * PI) / 8.0,
        ]),
        FamilyId::S4_112 => pi_train(vec![
            (-3.0 * phi - 10.0 * PI) / 8.0,
            (-phi - 6.0 * PI) / 8.0,
            (phi + 6.0 * PI) / 8.0,
            (3.0 * phi + 10.0 * PI) / 8.0,
        ]),
        FamilyId::S6_201 => pi_train(vec![
            (-3.0 * phi + 4.0 * s * PI) / 6.0,
            (-3.0 * phi + 8.0 * s * PI) / 6.0,
            (-3.0 * phi + 4.0 * s * PI) / 6.0,
            4.0 * s * PI / 6.0,
            8.0 * s * PI / 6.0,
            4.0 * s * PI / 6.0,
        ]),
        FamilyId::S6_202 => pi_train(vec![
            PI / 4.0,
            PI / 2.0 + phi / 8.0,
            -PI / 4.0 + phi / 4.0,
            PI / 4.0 + phi / 2.0,
            PI / 2.0 + 5.0 * phi / 8.0,
            -PI / 4.0 + 3.0 * phi / 4.0,
        ]),
        FamilyId::S6_203 => pi_train(antisymmetric_phases(phi, Sign::Plus)?),
        FamilyId::S6_204 => pi_train(antisymmetric_phases(phi, Sign::Minus)?),
        FamilyId::S6_221 => pi_train(vec![
            0.0,
            phi / 6.0 + s * 2.0 * PI / 3.0,
            phi / 3.0,
            phi / 2.0,
            2.0 * phi / 3.0 + s * 2.0 * PI / 3.0,
            5.0 * phi / 6.0,
        ]),
        FamilyId::S6_222 => pi_train(vec![
            0.0,
            phi / 6.0 + s * PI,
            phi / 3.0 + s * 2.0 * PI / 3.0,
            phi / 2.0 + s * PI,
            2.0 * phi / 3.0,
            5.0 * phi / 6.0 - s * PI / 3.0,
        ]),
        FamilyId::S8_331 => pi_train(vec![
            0.0,
            phi / 8.0 - s * PI / 2.0,
            phi / 4.0 - s * PI / 2.0,
            3.0 * phi / 8.0,
            s * PI + phi / 2.0,
            5.0 * phi / 8.0 + s * PI / 2.0,
            3.0 * phi / 4.0 + s * PI / 2.0,
            7.0 * phi / 8.0 + s * PI,
        ]),
        FamilyId::S8_332 => pi_train(vec![
            0.0,
            phi / 8.0 - s * PI / 4.0,
            phi / 4.0,
            3.0 * phi / 8.0 + s * 3.0 * PI / 4.0,
            phi / 2.0,
            5.0 * phi / 8.0 + s * 7.0 * PI / 4.0,
            3.0 * phi / 4.0,
            7.0 * phi / 8.0 + s * 11.0 * PI / 4.0,
        ]),
        FamilyId::General => {
            let g = params.general.ok_or_else(missing_general)?;
            return general_family(&g, phi);
        }
        FamilyId::Scrofulous | FamilyId::Sk1 | FamilyId::Bb1 => {
            resolve_written_product(label, phi, &reference_product(family, phi))?
        }
        FamilyId::IchikawaShort | FamilyId::IchikawaNested => {
            if (phi - PI).abs() > 1e-12 {
                return Err(Error::Unsupported(format!(
                    "{label} is only defined for a target angle of pi, got {phi}"
                )));
            }
            resolve_written_product(label, phi, &reference_product(family, phi))?
        }
    };
    seq.validate()?;
    Ok(seq)
}

/// Pulses of a reference sequence in written (left-to-right) order.
fn reference_product(family: FamilyId, phi: f64) -> Vec<Pulse> {
    let h = phi / 2.0;
    let p = |theta_pi: f64, phase: f64| Pulse::new(theta_pi * PI, phase);
    let a = (-0.25f64).acos();
    match family {
        FamilyId::Scrofulous => vec![
            p(1.0, PI / 3.0),
            p(1.0, 5.0 * PI / 3.0),
            p(1.0, PI / 3.0),
            p(1.0, PI / 3.0 - h),
            p(1.0, 5.0 * PI / 3.0 - h),
            p(1.0, PI / 3.0 - h),
        ],
        FamilyId::Sk1 => vec![
            p(2.0, a),
            p(2.0, -a),
            p(1.0, 0.0),
            p(2.0, a - h),
            p(2.0, -a - h),
            p(1.0, -h),
        ],
        FamilyId::Bb1 => vec![
            p(1.0, a),
            p(2.0, 3.0 * a),
            p(1.0, a),
            p(1.0, 0.0),
            p(1.0, a - h),
            p(2.0, 3.0 * a - h),
            p(1.0, a - h),
            p(1.0, -h),
        ],
        FamilyId::IchikawaShort => {
            vec![p(1.0, 0.0), p(2.0, 3.566), p(2.0, 1.147), p(1.0, -PI / 2.0)]
        }
        FamilyId::IchikawaNested => vec![
            p(1.0 / 3.0, 0.0),
            p(5.0 / 3.0, PI),
            p(7.0 / 3.0, 0.0),
            p(2.0, 3.566),
            p(2.0, 1.147),
            p(1.0 / 3.0, -PI / 2.0),
            p(5.0 / 3.0, -3.0 * PI / 2.0),
            p(7.0 / 3.0, -PI / 2.0),
        ],
        _ => unreachable!("not a reference sequence"),
    }
}

/// Orders a product written without a stated reading direction.
///
/// The matrix reading (rightmost applied first) is tried first and kept if
/// it closes; otherwise the left-to-right reading is used if that closes.
pub fn resolve_written_product(label: &str, phi: f64, written: &[Pulse]) -> Result<PulseSequence> {
    let mut applied: Vec<Pulse> = written.to_vec();
    applied.reverse();
    let matrix_reading = PulseSequence::new(label, phi, applied);
    if matrix_reading.validate().is_ok() {
        return Ok(matrix_reading);
    }
    let text_reading = PulseSequence::new(label, phi, written.to_vec());
    text_reading.validate()?;
    Ok(text_reading)
}

/// Offset angle `α` of the antisymmetric six-pulse closed form.
///
/// Fails with a domain error when any square root or arccos argument leaves
/// its real domain; nothing is clamped.
pub fn antisym_alpha(phi: f64, branch: Sign) -> Result<f64> {
    let s = branch.value();
    let c8 = (phi / 8.0).cos();
    let root = (phi / 4.0).cos().cbrt();
    let t = c8 * c8 + root + root * root;
    if t.is_nan() || t <= 0.0 {
        return Err(Error::Domain(format!(
            "auxiliary term {t} is not positive at phi = {phi}"
        )));
    }
    let st = t.sqrt();
    let radicand = -t + 3.0 * c8 * c8 + (phi / 8.0).sin() * (phi / 4.0).sin() / st;
    if radicand < 0.0 {
        return Err(Error::Domain(format!(
            "negative radicand {radicand} at phi = {phi}"
        )));
    }
    let arg = 0.5 * (-c8 + st + s * radicand.sqrt());
    if !(-1.0..=1.0).contains(&arg) {
        return Err(Error::Domain(format!(
            "arccos argument {arg} outside [-1, 1] at phi = {phi}"
        )));
    }
    Ok(phi / 8.0 + s * arg.acos())
}

/// Lab-frame phases of the antisymmetric six-pulse family.
pub fn antisymmetric_phases(phi: f64, branch: Sign) -> Result<Vec<f64>> {
    let a = antisym_alpha(phi, branch)?;
    let b = 2.0 * a - phi / 4.0;
    Ok(vec![
        a,
        2.0 * a - b,
        a - b + phi / 4.0,
        -a + b + 3.0 * phi / 4.0,
        -2.0 * a + b + phi,
        -a + phi,
    ])
}

/// Toggling-frame phases of the counter-rotating polygon family: odd
/// vertices step one way around a regular `n/2`-gon, even vertices step the
/// other way, offset by `−Φ/n`.
pub fn general_toggling(params: &GeneralFamilyParams, phi: f64) -> Result<TogglingPhaseList> {
    params.validate()?;
    let (step, unit) = params.step_and_offset_unit();
    let s = params.orientation.value();
    let odd_offset = params.j1 as f64 * unit;
    let even_offset = params.j2 as f64 * unit;
    let phases = (0..params.n / 2)
        .flat_map(|m| {
            let turn = s * m as f64 * step;
            [
                params.alpha + turn + odd_offset,
                params.alpha - phi / params.n as f64 - turn + even_offset,
            ]
        })
        .collect();
    TogglingPhaseList::new(phases)
}

pub fn general_family(params: &GeneralFamilyParams, phi: f64) -> Result<PulseSequence> {
    let toggling = general_toggling(params, phi)?;
    let label = format!("general_n{}", params.n);
    let seq = PulseSequence::from_pi_phases(label, phi, from_toggling(&toggling).as_slice());
    seq.validate()?;
    Ok(seq)
}

/// A rigid arrangement of toggling-frame unit vectors. Indices are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Shape {
    /// `φ'_b = φ'_a + σπ`.
    Pair {
        indices: [usize; 2],
        orientation: Sign,
    },
    /// Equilateral triangle: `φ'_a − φ'_b = φ'_b − φ'_c = σ·2π/3`.
    Triangle {
        indices: [usize; 3],
        orientation: Sign,
    },
}

impl Shape {
    pub fn pair(a: usize, b: usize) -> Shape {
        Shape::Pair {
            indices: [a, b],
            orientation: Sign::Plus,
        }
    }

    pub fn triangle(a: usize, b: usize, c: usize, orientation: Sign) -> Shape {
        Shape::Triangle {
            indices: [a, b, c],
            orientation,
        }
    }

    pub fn indices(&self) -> &[usize] {
        match self {
            Shape::Pair { indices, .. } => indices,
            Shape::Triangle { indices, .. } => indices,
        }
    }

    /// Fixed offset of each member relative to the first one.
    fn offsets(&self) -> Vec<f64> {
        match *self {
            Shape::Pair { orientation, .. } => vec![0.0, orientation.value() * PI],
            Shape::Triangle { orientation, .. } => {
                let step = -orientation.value() * 2.0 * PI / 3.0;
                vec![0.0, step, 2.0 * step]
            }
        }
    }
}

/// A partition of toggling indices into rigid shapes, with pinned phase
/// values fixing the free parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupingSpec {
    pub n: usize,
    pub shapes: Vec<Shape>,
    /// `(index, φ')` pairs, 1-based.
    pub pins: Vec<(usize, f64)>,
    /// Number of half-turns added to the closure target when it is solved
    /// for a free shape.
    pub winding: i64,
}

impl GroupingSpec {
    pub fn new(n: usize, shapes: Vec<Shape>) -> Self {
        GroupingSpec {
            n,
            shapes,
            pins: Vec::new(),
            winding: 0,
        }
    }

    pub fn pin(mut self, index: usize, value: f64) -> Self {
        self.pins.push((index, value));
        self
    }

    /// Shape owning each index (0-based slot).
    fn owners(&self) -> Result<Vec<(usize, f64)>> {
        if self.n != 4 && self.n != 6 {
            return Err(Error::InvalidParams(format!(
                "groupings are defined for 4 or 6 pulses, got {}",
                self.n
            )));
        }
        let mut owner: Vec<Option<(usize, f64)>> = vec![None; self.n];
        for (si, shape) in self.shapes.iter().enumerate() {
            for (&idx, off) in shape.indices().iter().zip(shape.offsets()) {
                if idx == 0 || idx > self.n {
                    return Err(Error::InvalidParams(format!(
                        "index {idx} outside 1..={}",
                        self.n
                    )));
                }
                if owner[idx - 1].replace((si, off)).is_some() {
                    return Err(Error::InvalidParams(format!("index {idx} appears twice")));
                }
            }
        }
        owner
            .into_iter()
            .enumerate()
            .map(|(i, o)| {
                o.ok_or_else(|| Error::InvalidParams(format!("index {} is not covered", i + 1)))
            })
            .collect()
    }
}

/// Result of solving a grouping.
#[derive(Debug, Clone, PartialEq)]
pub enum GroupingOutcome {
    Feasible(PulseSequence),
    /// The shapes cannot meet the closure condition.
    Infeasible,
}

/// Toggling phases for a grouping, or `None` when the closure condition
/// cannot be met.
pub fn grouped_toggling(spec: &GroupingSpec, phi: f64) -> Result<Option<TogglingPhaseList>> {
    let owners = spec.owners()?;
    // Closure reads Σ_i sign_i φ'_i = −Φ/2 with sign_i = +1 on even
    // (1-based) indices; each shape contributes weight·anchor + constant.
    let sign = |slot: usize| if slot % 2 == 1 { 1.0 } else { -1.0 };
    let mut anchors: Vec<Option<f64>> = vec![None; spec.shapes.len()];
    for &(idx, value) in &spec.pins {
        if idx == 0 || idx > spec.n || !value.is_finite() {
            return Err(Error::InvalidParams(format!("bad pin ({idx}, {value})")));
        }
        let (si, off) = owners[idx - 1];
        let anchor = value - off;
        match anchors[si] {
            Some(prev) if (prev - anchor).abs() > 1e-12 => {
                return Err(Error::InvalidParams(format!(
                    "conflicting pins on shape {}",
                    si + 1
                )))
            }
            _ => anchors[si] = Some(anchor),
        }
    }
    let mut weights = vec![0.0; spec.shapes.len()];
    let mut constant = 0.0;
    for (slot, &(si, off)) in owners.iter().enumerate() {
        weights[si] += sign(slot);
        constant += sign(slot) * off;
    }
    let free = (0..spec.shapes.len()).find(|&si| anchors[si].is_none() && weights[si] != 0.0);
    for (si, a) in anchors.iter_mut().enumerate() {
        if a.is_none() && Some(si) != free {
            *a = Some(0.0);
        }
    }
    let fixed: f64 = (0..spec.shapes.len())
        .filter(|&si| Some(si) != free)
        .map(|si| weights[si] * anchors[si].unwrap_or(0.0))
        .sum();
    match free {
        Some(si) => {
            let target = -phi / 2.0 - constant - fixed + PI * spec.winding as f64;
            anchors[si] = Some(target / weights[si]);
        }
        None => {
            if circular_distance(2.0 * (fixed + constant), -phi) > 1e-9 {
                return Ok(None);
            }
        }
    }
    let phases = owners
        .iter()
        .map(|&(si, off)| anchors[si].unwrap_or(0.0) + off)
        .collect();
    Ok(Some(TogglingPhaseList::new(phases)?))
}

pub fn grouped_polygon_sequence(spec: &GroupingSpec, phi: f64) -> Result<GroupingOutcome> {
    let Some(toggling) = grouped_toggling(spec, phi)? else {
        return Ok(GroupingOutcome::Infeasible);
    };
    let seq = PulseSequence::from_pi_phases("grouped", phi, from_toggling(&toggling).as_slice());
    seq.validate()?;
    Ok(GroupingOutcome::Feasible(seq))
}
