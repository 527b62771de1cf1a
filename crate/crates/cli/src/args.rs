use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context};
use clap::{Args, ValueEnum};
use zpulse::{build, BuildParams, FamilyId, GeneralFamilyParams, PulseSequence, Sign};

/// An angle written in radians (`1.25`) or as a multiple of π (`0.5pi`, `-pi`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleSpec(pub f64);

impl FromStr for AngleSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let text = s.trim().to_ascii_lowercase();
        let value = match text.strip_suffix("pi") {
            Some("") | Some("+") => PI,
            Some("-") => -PI,
            Some(mult) => {
                mult.trim()
                    .parse::<f64>()
                    .map_err(|_| format!("bad angle {s:?}"))?
                    * PI
            }
            None => text
                .parse::<f64>()
                .map_err(|_| format!("bad angle {s:?}"))?,
        };
        if !value.is_finite() {
            return Err(format!("angle {s:?} is not finite"));
        }
        Ok(AngleSpec(value))
    }
}

/// `min,max` pair for a scan axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub min: f64,
    pub max: f64,
}

impl FromStr for Range {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) = s
            .split_once(',')
            .ok_or_else(|| format!("expected min,max, got {s:?}"))?;
        let parse = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| format!("bad number {t:?}"))
        };
        let (min, max) = (parse(a)?, parse(b)?);
        if !(min.is_finite() && max.is_finite() && min < max) {
            return Err(format!("range {s:?} needs finite min < max"));
        }
        Ok(Range { min, max })
    }
}

/// Corrected orders a sequence must reach: `N` for both axes or `I,J`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RequiredOrder {
    pub pse: u32,
    pub ore: u32,
}

impl FromStr for RequiredOrder {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parse = |t: &str| {
            t.trim()
                .parse::<u32>()
                .map_err(|_| format!("bad order {t:?}"))
        };
        match s.split_once(',') {
            Some((i, j)) => Ok(RequiredOrder {
                pse: parse(i)?,
                ore: parse(j)?,
            }),
            None => {
                let n = parse(s)?;
                Ok(RequiredOrder { pse: n, ore: n })
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

/// Where a sequence comes from: a named family or a JSON file.
#[derive(Debug, Args)]
pub struct Source {
    /// Family name, see `list`.
    #[arg(long, required_unless_present = "sequence")]
    pub family: Option<FamilyId>,
    /// Sequence JSON written by `build`.
    #[arg(long, conflicts_with_all = ["family", "phi"])]
    pub sequence: Option<PathBuf>,
    #[command(flatten)]
    pub params: FamilyArgs,
    /// Target angle Φ, e.g. `0.5pi` or `1.5708`.
    #[arg(long, allow_hyphen_values = true)]
    pub phi: Option<AngleSpec>,
}

/// Knobs shared by every family-building command.
#[derive(Debug, Clone, Args)]
pub struct FamilyArgs {
    /// Pulse count of the general family.
    #[arg(long)]
    pub n: Option<usize>,
    /// Vertex offset of the odd polygon (general family).
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    pub j1: i64,
    /// Vertex offset of the even polygon (general family).
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    pub j2: i64,
    /// Free rotation of the general family.
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub alpha: AngleSpec,
    /// Sign branch; also the polygon orientation of the general family.
    #[arg(long, default_value = "+", allow_hyphen_values = true)]
    pub branch: Sign,
}

impl FamilyArgs {
    pub fn build_params(&self, family: FamilyId) -> anyhow::Result<BuildParams> {
        if family != FamilyId::General {
            return Ok(BuildParams::branch(self.branch));
        }
        let n = self.n.context("the general family needs --n")?;
        Ok(BuildParams::general(GeneralFamilyParams {
            n,
            alpha: self.alpha.0,
            j1: self.j1,
            j2: self.j2,
            orientation: self.branch,
        }))
    }
}

/// A loaded sequence plus the family it was built from, if any.
pub struct Loaded {
    pub sequence: PulseSequence,
    pub family: Option<(FamilyId, BuildParams)>,
}

impl Source {
    pub fn load(&self) -> anyhow::Result<Loaded> {
        if let Some(path) = &self.sequence {
            return Ok(Loaded {
                sequence: read_sequence(path)?,
                family: None,
            });
        }
        let Some(family) = self.family else {
            bail!("give --family or --sequence");
        };
        let phi = self.phi.context("--phi is required with --family")?.0;
        let params = self.params.build_params(family)?;
        let sequence = build(family, phi, &params)?;
        Ok(Loaded {
            sequence,
            family: Some((family, params)),
        })
    }
}

/// Reads a sequence without checking closure, so that `verify` can report it.
pub fn read_sequence(path: &Path) -> anyhow::Result<PulseSequence> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(PulseSequence::from_json(&text)?)
}

/// Resolves `--out` against the default output directory when relative.
pub fn output_path(out: &Path, out_dir: Option<&Path>) -> PathBuf {
    match out_dir {
        Some(dir) if out.is_relative() => dir.join(out),
        _ => out.to_path_buf(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angles() {
        assert_eq!("pi".parse::<AngleSpec>().unwrap().0, PI);
        assert_eq!("0.5PI".parse::<AngleSpec>().unwrap().0, PI / 2.0);
        assert_eq!("-pi".parse::<AngleSpec>().unwrap().0, -PI);
        assert_eq!(" 0.25 pi".parse::<AngleSpec>().unwrap().0, PI / 4.0);
        assert_eq!("0.3".parse::<AngleSpec>().unwrap().0, 0.3);
        assert!("inf".parse::<AngleSpec>().is_err());
        assert!("twopi".parse::<AngleSpec>().is_err());
    }

    #[test]
    fn ranges_and_orders() {
        assert_eq!(
            "-1,1".parse::<Range>().unwrap(),
            Range {
                min: -1.0,
                max: 1.0
            }
        );
        assert!("1,-1".parse::<Range>().is_err());
        assert!("1".parse::<Range>().is_err());
        assert_eq!(
            "2".parse::<RequiredOrder>().unwrap(),
            RequiredOrder { pse: 2, ore: 2 }
        );
        assert_eq!(
            "2,0".parse::<RequiredOrder>().unwrap(),
            RequiredOrder { pse: 2, ore: 0 }
        );
    }

    #[test]
    fn relative_outputs_land_in_the_default_directory() {
        let dir = Path::new("/tmp/runs");
        assert_eq!(
            output_path(Path::new("a.csv"), Some(dir)),
            dir.join("a.csv")
        );
        assert_eq!(
            output_path(Path::new("/x/a.csv"), Some(dir)),
            Path::new("/x/a.csv")
        );
        assert_eq!(output_path(Path::new("a.csv"), None), Path::new("a.csv"));
    }
}
