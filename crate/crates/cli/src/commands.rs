use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context};
use serde::Serialize;
use zpulse::catalog::claimed_orders;
use zpulse::toggling::normalize_angle;
use zpulse::{
    check_conditions, compare, infidelity_order, scan_grid, to_toggling, Axis, AxisResult,
    CompareEntry, CompareRow, ConditionReport, CorrectedOrder, Error, ErrorPoint, FamilyId,
    GridSpec, PhaseList, PulseSequence,
};

use crate::args::{output_path, Format, RequiredOrder, Source};
use crate::{Cli, Command};

/// Outcome of a command that ran to completion.
pub enum Status {
    Passed,
    Failed,
}

pub fn run(cli: Cli) -> anyhow::Result<Status> {
    let out_dir = cli.out_dir.as_deref();
    match cli.command {
        Command::List { json } => list(json),
        Command::Build {
            family,
            phi,
            params,
            out,
        } => {
            let seq = zpulse::build(family, phi.0, &params.build_params(family)?)?;
            let mut sink = open(out.as_deref(), out_dir)?;
            writeln!(sink, "{}", seq.to_json())?;
            sink.flush()?;
            Ok(Status::Passed)
        }
        Command::Verify {
            source,
            tolerance,
            require_order,
            format,
        } => verify(&source, tolerance, require_order, format),
        Command::Scan {
            source,
            grid,
            eps_range,
            f_range,
            format,
            out,
        } => {
            let seq = source.load()?.sequence;
            let spec = GridSpec {
                eps_min: eps_range.min,
                eps_max: eps_range.max,
                f_min: f_range.min,
                f_max: f_range.max,
                eps_points: grid,
                f_points: grid,
            };
            let scan = scan_grid(&seq, &spec)?;
            let mut sink = open(out.as_deref(), out_dir)?;
            match format {
                Format::Json => writeln!(sink, "{}", serde_json::to_string(&scan)?)?,
                Format::Csv => {
                    let mut w = csv::Writer::from_writer(&mut sink);
                    w.write_record(["epsilon", "f", "fidelity"])?;
                    for (e, f, fid) in scan.rows() {
                        w.write_record([e, f, fid].map(|v| format!("{v:.16e}")))?;
                    }
                    w.flush()?;
                }
                Format::Text => bail!("scan writes csv or json"),
            }
            sink.flush()?;
            Ok(Status::Passed)
        }
        Command::Order {
            source,
            axis,
            format,
        } => {
            let seq = source.load()?.sequence;
            let result = match infidelity_order(&seq, axis) {
                Ok(e) => AxisResult::Order(e),
                Err(Error::DegenerateFlat { .. }) => AxisResult::Exact,
                Err(e) => return Err(e.into()),
            };
            match format {
                Format::Json => println!("{}", serde_json::to_string_pretty(&result)?),
                Format::Text => println!("{} {}", axis, describe_axis(&result)),
                Format::Csv => bail!("order writes json or text"),
            }
            Ok(Status::Passed)
        }
        Command::Compare {
            families,
            phi,
            params,
            informational,
            format,
            out,
        } => {
            let families = if families.is_empty() {
                FamilyId::buildable().collect()
            } else {
                families
            };
            // A general entry without --n is reported as a per-row error.
            let entries: Vec<CompareEntry> = families
                .into_iter()
                .map(|family| CompareEntry {
                    family,
                    params: params.build_params(family).unwrap_or_default(),
                })
                .collect();
            let rows = compare(&entries, phi.0, informational);
            let mut sink = open(out.as_deref(), out_dir)?;
            write_compare(&mut sink, &rows, format)?;
            sink.flush()?;
            Ok(Status::Passed)
        }
    }
}

fn open(out: Option<&Path>, out_dir: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match out {
        Some(path) => {
            let path = output_path(path, out_dir);
            let file =
                File::create(&path).with_context(|| format!("creating {}", path.display()))?;
            Box::new(BufWriter::new(file))
        }
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

#[derive(Serialize)]
struct FamilyRow {
    name: &'static str,
    pulses: Option<usize>,
    pse_order: Option<u32>,
    ore_order: Option<u32>,
    buildable: bool,
    description: &'static str,
}

fn list(json: bool) -> anyhow::Result<Status> {
    let rows: Vec<FamilyRow> = FamilyId::ALL
        .iter()
        .map(|&f| FamilyRow {
            name: f.name(),
            pulses: f.pulse_count(),
            pse_order: f.claimed_orders().map(|o| o.0),
            ore_order: f.claimed_orders().map(|o| o.1),
            buildable: f != FamilyId::General,
            description: f.description(),
        })
        .collect();
    if json {
        println!("{}", serde_json::to_string_pretty(&rows)?);
        return Ok(Status::Passed);
    }
    let opt = |v: Option<u32>| v.map_or("n/2-1".to_string(), |v| v.to_string());
    println!(
        "{:<16} {:>3} {:>6} {:>6}  description",
        "family", "n", "pse", "ore"
    );
    for r in &rows {
        let n = r.pulses.map_or("n".to_string(), |n| n.to_string());
        println!(
            "{:<16} {:>3} {:>6} {:>6}  {}",
            r.name,
            n,
            opt(r.pse_order),
            opt(r.ore_order),
            r.description
        );
    }
    Ok(Status::Passed)
}

#[derive(Serialize)]
struct NumericCheck {
    axis: Axis,
    result: AxisResult,
    corrected: CorrectedOrder,
    passes: bool,
}

#[derive(Serialize)]
struct VerifyReport {
    label: String,
    target_phi: f64,
    pulses: usize,
    /// Display-only copy of the phases reduced to `[0, 2π)`.
    phases: Vec<f64>,
    closure_infidelity: f64,
    closes: bool,
    required_pse: u32,
    required_ore: u32,
    conditions: Option<ConditionReport>,
    numeric: Vec<NumericCheck>,
    failures: Vec<String>,
    passed: bool,
}

/// Orders up to two are checked algebraically on π trains; anything beyond
/// that, or any order of a sequence with other pulse angles, is measured.
fn verify(
    source: &Source,
    tolerance: f64,
    require: Option<RequiredOrder>,
    format: Format,
) -> anyhow::Result<Status> {
    let loaded = source.load()?;
    let seq = &loaded.sequence;
    let required = match (require, &loaded.family) {
        (Some(r), _) => r,
        (None, Some((family, params))) => {
            let (pse, ore) = claimed_orders(*family, params)?;
            RequiredOrder { pse, ore }
        }
        (None, None) => RequiredOrder { pse: 0, ore: 0 },
    };
    let mut failures = Vec::new();
    let closes = match seq.validate() {
        Ok(()) => true,
        Err(Error::NotClosed { fidelity, .. }) => {
            failures.push(format!(
                "does not implement the target rotation (F = {fidelity:.12})"
            ));
            false
        }
        Err(e) => return Err(e.into()),
    };

    let algebraic = seq.is_all_pi() && seq.len() % 2 == 0;
    let mut conditions = None;
    let mut numeric = Vec::new();
    if closes {
        if algebraic {
            let report = check_conditions(
                &to_toggling(&PhaseList::new(seq.phases())?),
                seq.target_phi,
                tolerance,
            )?;
            if !report.closure_passes() {
                failures.push(format!(
                    "toggling-frame closure residual {:.3e}",
                    report.closure
                ));
            }
            for (axis, reached, needed) in [
                (Axis::Pse, report.pse_order(), required.pse),
                (Axis::Ore, report.ore_order(), required.ore),
            ] {
                if reached < needed.min(2) {
                    failures.push(format!(
                        "{axis} conditions hold to order {reached}, need {}",
                        needed.min(2)
                    ));
                }
            }
            conditions = Some(report);
        }
        let covered = if algebraic { 2 } else { 0 };
        for (axis, needed) in [(Axis::Pse, required.pse), (Axis::Ore, required.ore)] {
            if needed > covered {
                let check = measure(seq, axis, needed)?;
                if !check.passes {
                    failures.push(format!(
                        "measured {axis} {}, need order {needed}",
                        describe_axis(&check.result)
                    ));
                }
                numeric.push(check);
            }
        }
    }

    let report = VerifyReport {
        label: seq.label.clone(),
        target_phi: seq.target_phi,
        pulses: seq.len(),
        phases: seq.phases().into_iter().map(normalize_angle).collect(),
        closure_infidelity: seq.infidelity(ErrorPoint::ZERO),
        closes,
        required_pse: required.pse,
        required_ore: required.ore,
        conditions,
        numeric,
        passed: failures.is_empty(),
        failures,
    };
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&report)?),
        Format::Text => print_verify(&report),
        Format::Csv => bail!("verify writes text or json"),
    }
    Ok(if report.passed {
        Status::Passed
    } else {
        Status::Failed
    })
}

fn measure(seq: &PulseSequence, axis: Axis, needed: u32) -> anyhow::Result<NumericCheck> {
    let result = match infidelity_order(seq, axis) {
        Ok(e) => AxisResult::Order(e),
        Err(Error::DegenerateFlat { .. }) => AxisResult::Exact,
        Err(e) => return Err(e.into()),
    };
    let corrected = result.corrected();
    let passes = match (&result, corrected) {
        (_, CorrectedOrder::Exact) => true,
        (AxisResult::Order(e), CorrectedOrder::Finite(k)) => e.is_integer && k >= needed as i32,
        _ => false,
    };
    Ok(NumericCheck {
        axis,
        result,
        corrected,
        passes,
    })
}

fn describe_axis(result: &AxisResult) -> String {
    match result {
        AxisResult::Exact => "exact".to_string(),
        AxisResult::Order(e) if e.is_integer => {
            format!(
                "order {} (coefficient {:.6e})",
                e.rounded_order, e.coefficient
            )
        }
        AxisResult::Order(e) => format!("slope {:.3} (not an integer order)", e.exponent),
    }
}

fn print_verify(r: &VerifyReport) {
    let ok = |pass: bool| if pass { "ok" } else { "FAIL" };
    println!(
        "sequence  {} ({} pulses, target {})",
        r.label, r.pulses, r.target_phi
    );
    let phases: Vec<String> = r.phases.iter().map(|p| format!("{p:.6}")).collect();
    println!("phases    {}", phases.join(" "));
    println!(
        "closure   1-F = {:.3e}  {}",
        r.closure_infidelity,
        ok(r.closes)
    );
    println!("required  pse {}, ore {}", r.required_pse, r.required_ore);
    if let Some(c) = &r.conditions {
        let tol = c.tolerance;
        for (name, value) in [
            ("toggling closure", c.closure),
            ("pse first order", c.pse_first),
            ("pse second order", c.pse_second),
            ("ore first order", c.ore_first),
            ("ore second order", c.ore_second),
        ] {
            println!(
                "  {name:<18} {value:.3e}  {}",
                if value <= tol { "holds" } else { "fails" }
            );
        }
        println!(
            "  algebraic orders pse {}, ore {}",
            c.pse_order(),
            c.ore_order()
        );
    }
    for n in &r.numeric {
        println!(
            "measured  {} {}  {}",
            n.axis,
            describe_axis(&n.result),
            ok(n.passes)
        );
    }
    for f in &r.failures {
        println!("failure   {f}");
    }
    println!("result    {}", if r.passed { "PASS" } else { "FAIL" });
}

fn order_cell(result: Option<&AxisResult>) -> String {
    match result {
        None => "-".to_string(),
        Some(AxisResult::Exact) => "exact".to_string(),
        Some(AxisResult::Order(e)) if e.is_integer => e.rounded_order.to_string(),
        Some(AxisResult::Order(e)) => format!("~{:.2}", e.exponent),
    }
}

fn corrected_cell(c: Option<CorrectedOrder>) -> String {
    c.map_or("-".to_string(), |c| c.to_string())
}

fn write_compare(sink: &mut dyn Write, rows: &[CompareRow], format: Format) -> anyhow::Result<()> {
    match format {
        Format::Json => writeln!(sink, "{}", serde_json::to_string_pretty(rows)?)?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(sink);
            w.write_record([
                "label",
                "phi",
                "time_cost",
                "pse_order",
                "ore_order",
                "i",
                "j",
                "informational",
                "error",
            ])?;
            for r in rows {
                w.write_record([
                    r.label.clone(),
                    format!("{:.16e}", r.phi),
                    r.time_cost.map_or(String::new(), |t| t.to_string()),
                    order_cell(r.pse.as_ref()),
                    order_cell(r.ore.as_ref()),
                    corrected_cell(r.i),
                    corrected_cell(r.j),
                    r.informational.to_string(),
                    r.error.clone().unwrap_or_default(),
                ])?;
            }
            w.flush()?;
        }
        Format::Text => {
            writeln!(
                sink,
                "{:<16} {:>6} {:>7} {:>7} {:>5} {:>5}  note",
                "sequence", "T", "pse", "ore", "i", "j"
            )?;
            for r in rows {
                let note = match (&r.error, r.informational) {
                    (Some(e), _) => e.clone(),
                    (None, true) => "published time cost only".to_string(),
                    (None, false) => r.warnings.join("; "),
                };
                let line = format!(
                    "{:<16} {:>6} {:>7} {:>7} {:>5} {:>5}  {}",
                    r.label,
                    r.time_cost.map_or("-".to_string(), |t| format!("{t:.1}")),
                    order_cell(r.pse.as_ref()),
                    order_cell(r.ore.as_ref()),
                    corrected_cell(r.i),
                    corrected_cell(r.j),
                    note
                );
                writeln!(sink, "{}", line.trim_end())?;
            }
        }
    }
    Ok(())
}
