use std::env;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::json;
use spdc_core::interference::default_tau_max;
use spdc_core::matching::{GvmCondition, ScanCondition};
use spdc_core::reference::{self, Target, T_HIGH_C, T_LOW_C};
use spdc_core::units::FS_PER_S;
use spdc_core::*;

use crate::args::{Cli, Command, GvmArgs, HomArgs, JsaArgs, PmScanArgs, SourceArgs, Table1Args};
use crate::error::CliError;
use crate::manifest::{sibling, DatabaseRecord, Outputs};
use crate::plot;

pub const DB_ENV: &str = "SPDC_DB";

pub struct LoadedDb {
    pub db: CoefficientDatabase,
    pub record: DatabaseRecord,
}

/// `--db` flag, then `$SPDC_DB`, then the bundled database.
pub fn load_database(flag: Option<&Path>) -> Result<LoadedDb, CliError> {
    let from_env = env::var_os(DB_ENV)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from);
    let (origin, text) = match flag.map(Path::to_path_buf).or(from_env) {
        Some(path) => {
            let text = fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
            (path.display().to_string(), text)
        }
        None => (
            "bundled".to_owned(),
            CoefficientDatabase::bundled_text().to_owned(),
        ),
    };
    let db = CoefficientDatabase::parse(&text)?;
    Ok(LoadedDb {
        record: DatabaseRecord::new(origin, &text),
        db,
    })
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let started = Instant::now();
    let loaded = load_database(cli.db.as_deref())?;
    let ctx = Context {
        db: &loaded.db,
        record: &loaded.record,
        source: cli.source.as_deref(),
        started,
        command: env::args().collect::<Vec<_>>().join(" "),
    };
    match &cli.command {
        Command::Gvm(a) => gvm(&ctx, a),
        Command::PmScan(a) => pm_scan(&ctx, a),
        Command::Jsa(a) => jsa(&ctx, a),
        Command::Hom(a) => hom(&ctx, a),
        Command::Table1(a) => table1(&ctx, a),
        Command::DbValidate => db_validate(&ctx),
    }
}

struct Context<'a> {
    db: &'a CoefficientDatabase,
    record: &'a DatabaseRecord,
    source: Option<&'a str>,
    started: Instant,
    command: String,
}

impl Context<'_> {
    fn medium(&self, crystal: CrystalId) -> Result<Medium<'_>, CliError> {
        Ok(Medium::resolve(
            self.db,
            crystal,
            TypeIIAssignment::default(),
            self.source,
        )?)
    }

    fn finish(
        &self,
        outputs: Outputs,
        parameters: serde_json::Value,
        primary: &Path,
    ) -> Result<(), CliError> {
        let path = outputs.finish(
            &self.command,
            self.record.clone(),
            parameters,
            primary,
            self.started.elapsed(),
        )?;
        println!("wrote {} and {}", primary.display(), path.display());
        Ok(())
    }
}

fn sweep(t: &crate::args::TempRange) -> Result<TemperatureSweep, CliError> {
    TemperatureSweep::new(t.lo, t.hi, t.steps).map_err(|e| CliError::Usage(e.to_string()))
}

fn gvm(ctx: &Context<'_>, a: &GvmArgs) -> Result<(), CliError> {
    let crystal = a.crystal.crystal;
    let medium = ctx.medium(crystal)?;
    let condition = GvmCondition::from(a.condition);
    let table = scan_over_temperature(&medium, ScanCondition::Gvm(condition), sweep(&a.t)?)?;

    let first = &table.rows[0];
    let last = &table.rows[table.rows.len() - 1];
    println!(
        "{crystal} {condition}: {:.4} nm at {} degC, {:.4} nm at {} degC, shift {:.4} nm",
        first.values_nm[0],
        first.temperature_c,
        last.values_nm[0],
        last.temperature_c,
        table.endpoint_shift(0)
    );

    let mut out = Outputs::default();
    out.write(&a.out.out, &table.to_csv())?;
    if a.out.plot {
        let gp = sibling(&a.out.out, "gp");
        out.write(&gp, &plot::scan(&a.out.out, &table))?;
    }
    let params = json!({
        "crystal": crystal,
        "condition": condition.label(),
        "temperature_c": { "lo": a.t.lo, "hi": a.t.hi, "steps": a.t.steps },
        "source": ctx.source,
        "models": medium.sources(),
        "window_nm": condition.default_window(),
    });
    ctx.finish(out, params, &a.out.out)
}

fn pm_scan(ctx: &Context<'_>, a: &PmScanArgs) -> Result<(), CliError> {
    let crystal = a.crystal.crystal;
    let medium = ctx.medium(crystal)?;
    let cond = ScanCondition::PhaseMatch {
        reference_temperature_c: a.design_t,
    };
    let table = scan_over_temperature(&medium, cond, sweep(&a.t)?)?;
    let design = table
        .design
        .expect("phase-matching scans carry their design");
    println!(
        "{crystal} design at {} degC: pump {:.4} nm, poling period {:.4} um",
        design.reference_temperature_c, design.lambda_p_nm, design.poling_period_um
    );
    let (first, last) = (&table.rows[0], &table.rows[table.rows.len() - 1]);
    for (k, name) in ["signal", "idler"].iter().enumerate() {
        println!(
            "{name}: {:.4} nm at {} degC, {:.4} nm at {} degC, shift {:.4} nm",
            first.values_nm[k],
            first.temperature_c,
            last.values_nm[k],
            last.temperature_c,
            table.endpoint_shift(k)
        );
    }

    let mut out = Outputs::default();
    out.write(&a.out.out, &table.to_csv())?;
    if a.out.plot {
        out.write(&sibling(&a.out.out, "gp"), &plot::scan(&a.out.out, &table))?;
    }
    let params = json!({
        "crystal": crystal,
        "temperature_c": { "lo": a.t.lo, "hi": a.t.hi, "steps": a.t.steps },
        "design": design,
        "source": ctx.source,
        "models": medium.sources(),
    });
    ctx.finish(out, params, &a.out.out)
}

struct SourceSetup {
    design: DegenerateDesign,
    pump: PumpSpec,
    geometry: CrystalGeometry,
}

fn source_setup(medium: &Medium<'_>, s: &SourceArgs) -> Result<SourceSetup, CliError> {
    let design = DegenerateDesign::at_gvm1(medium, s.design_t)?;
    let pump = PumpSpec::new(design.lambda_p_nm, s.fwhm_nm)?;
    let geometry = CrystalGeometry::new(s.length_mm, design.poling_period_um, s.t)?;
    Ok(SourceSetup {
        design,
        pump,
        geometry,
    })
}

fn source_params(
    ctx: &Context<'_>,
    medium: &Medium<'_>,
    s: &SourceArgs,
    setup: &SourceSetup,
) -> serde_json::Value {
    json!({
        "crystal": s.crystal.crystal,
        "temperature_c": s.t,
        "length_mm": s.length_mm,
        "fwhm_nm": s.fwhm_nm,
        "grid": s.grid,
        "design": setup.design,
        "sigma_p_rad_per_s": setup.pump.sigma_p(),
        "source": ctx.source,
        "models": medium.sources(),
    })
}

fn jsa(ctx: &Context<'_>, a: &JsaArgs) -> Result<(), CliError> {
    let medium = ctx.medium(a.source.crystal.crystal)?;
    let setup = source_setup(&medium, &a.source)?;
    let jsa = compute_jsa_auto(
        &medium,
        &setup.geometry,
        &setup.pump,
        a.source.grid as usize,
    )?;
    let purity = schmidt_purity(&jsa)?;
    let (s, i) = jsa.peak_nm();
    println!("purity {purity:.6}");
    println!("peak at signal {s:.4} nm, idler {i:.4} nm");

    let mut out = Outputs::default();
    out.write(&a.out.out, &jsa.to_csv())?;
    out.write(&sibling(&a.out.out, "json"), &jsa.sidecar_json())?;
    if a.out.plot {
        out.write(&sibling(&a.out.out, "gp"), &plot::jsa(&a.out.out, &jsa))?;
    }
    let mut params = source_params(ctx, &medium, &a.source, &setup);
    params["purity"] = json!(purity);
    ctx.finish(out, params, &a.out.out)
}

fn hom(ctx: &Context<'_>, a: &HomArgs) -> Result<(), CliError> {
    let medium = ctx.medium(a.source.crystal.crystal)?;
    let setup = source_setup(&medium, &a.source)?;
    let jsa = compute_jsa_auto(
        &medium,
        &setup.geometry,
        &setup.pump,
        a.source.grid as usize,
    )?;
    let tau_max = match a.tau_max_fs {
        Some(fs) => fs / FS_PER_S,
        None => default_tau_max(setup.pump.sigma_p()),
    };
    let trace = hom_trace(&jsa, tau_max, a.steps)?;
    println!("visibility {:.4}", trace.visibility);
    println!("dips {}", trace.dip_count);
    println!("baseline {:.6}", trace.baseline);

    let mut out = Outputs::default();
    out.write(&a.out.out, &trace.to_csv())?;
    if a.out.plot {
        out.write(&sibling(&a.out.out, "gp"), &plot::hom(&a.out.out))?;
    }
    let mut params = source_params(ctx, &medium, &a.source, &setup);
    params["tau_max_fs"] = json!(tau_max * FS_PER_S);
    params["steps"] = json!(a.steps);
    ctx.finish(out, params, &a.out.out)
}

struct Cell {
    crystal: CrystalId,
    quantity: &'static str,
    target: Target,
    value: Result<f64, spdc_core::Error>,
}

fn table_cells(db: &CoefficientDatabase, source: Option<&str>) -> Vec<(Vec<String>, Vec<Cell>)> {
    reference::TABLE
        .iter()
        .map(|row| {
            let c = row.crystal;
            let tag = source.filter(|t| db.source_tags(c).contains(t));
            let medium = match Medium::resolve(db, c, TypeIIAssignment::default(), tag) {
                Ok(m) => m,
                Err(e) => {
                    let msg = e.to_string();
                    let fail = |q, t| Cell {
                        crystal: c,
                        quantity: q,
                        target: t,
                        value: Err(spdc_core::Error::InvalidParameter(msg.clone())),
                    };
                    return (
                        Vec::new(),
                        vec![
                            fail("lambda_gvm1", row.gvm1),
                            fail("shift_gvm1", row.gvm1_shift),
                            fail("lambda_gvm2", row.gvm2),
                            fail("shift_gvm2", row.gvm2_shift),
                            fail("shift_pm", row.pm_shift),
                        ],
                    );
                }
            };
            let g1 = |t| gvm1_wavelength(&medium, t).map(|r| r.lambda_deg_nm);
            let g2 = |t| gvm2_wavelength(&medium, t, Gvm2Branch::Idler).map(|r| r.lambda_deg_nm);
            let pm = || -> Result<f64, spdc_core::Error> {
                let d = DegenerateDesign::at_gvm1(&medium, T_LOW_C)?;
                let lo = phase_matched_pair(&medium, &d.spec_at(T_LOW_C)?)?;
                let hi = phase_matched_pair(&medium, &d.spec_at(T_HIGH_C)?)?;
                Ok(lo.signal_nm - hi.signal_nm)
            };
            let cell = |quantity, target, value| Cell {
                crystal: c,
                quantity,
                target,
                value,
            };
            let sources = medium.sources().into_iter().map(String::from).collect();
            (
                sources,
                vec![
                    cell("lambda_gvm1", row.gvm1, g1(T_LOW_C)),
                    cell(
                        "shift_gvm1",
                        row.gvm1_shift,
                        g1(T_LOW_C).and_then(|a| Ok(a - g1(T_HIGH_C)?)),
                    ),
                    cell("lambda_gvm2", row.gvm2, g2(T_LOW_C)),
                    cell(
                        "shift_gvm2",
                        row.gvm2_shift,
                        g2(T_LOW_C).and_then(|a| Ok(a - g2(T_HIGH_C)?)),
                    ),
                    cell("shift_pm", row.pm_shift, pm()),
                ],
            )
        })
        .collect()
}

fn table1(ctx: &Context<'_>, a: &Table1Args) -> Result<(), CliError> {
    let rows = table_cells(ctx.db, ctx.source);
    let mut csv =
        String::from("crystal,quantity,value_nm,expected_nm,tolerance_nm,status,sources\n");
    let (mut pass, mut errors, mut total) = (0, 0, 0);
    for (sources, cells) in &rows {
        for cell in cells {
            total += 1;
            let (value, status) = match &cell.value {
                Ok(v) if cell.target.accepts(*v) => (format!("{v:.4}"), "pass"),
                Ok(v) => (format!("{v:.4}"), "fail"),
                Err(e) => {
                    eprintln!("{} {}: {e}", cell.crystal, cell.quantity);
                    (String::new(), "error")
                }
            };
            match status {
                "pass" => pass += 1,
                "error" => errors += 1,
                _ => {}
            }
            println!(
                "{:<4} {:<12} {:>11} (expected {:>7} ± {}) {status}",
                cell.crystal.name(),
                cell.quantity,
                value,
                cell.target.value,
                cell.target.tol
            );
            csv.push_str(&format!(
                "{},{},{value},{},{},{status},{}\n",
                cell.crystal,
                cell.quantity,
                cell.target.value,
                cell.target.tol,
                sources.join(" ")
            ));
        }
    }
    println!("{pass}/{total} cells within tolerance");

    let mut out = Outputs::default();
    out.write(&a.out, &csv)?;
    let params = json!({
        "source": ctx.source,
        "temperatures_c": [T_LOW_C, T_HIGH_C],
        "gvm2_branch": "idler",
        "cells": total,
        "within_tolerance": pass,
        "errors": errors,
    });
    ctx.finish(out, params, &a.out)?;
    if errors > 0 {
        return Err(CliError::Failed(format!(
            "{errors} table cells could not be computed"
        )));
    }
    Ok(())
}

fn db_validate(ctx: &Context<'_>) -> Result<(), CliError> {
    println!("database: {}", ctx.record.origin);
    println!("sha256: {}", ctx.record.sha256);
    println!("models: {}", ctx.db.len());
    for c in CrystalId::ALL {
        let defaults: Vec<String> = [OpticalAxis::Y, OpticalAxis::Z]
            .iter()
            .map(|&ax| {
                ctx.db
                    .default_model(c, ax)
                    .map(|m| format!("n_{ax} [{}]", m.source_tag()))
                    .unwrap_or_else(|_| format!("n_{ax} [missing]"))
            })
            .collect();
        println!(
            "{c}: {}; sources: {}",
            defaults.join(", "),
            ctx.db.source_tags(c).join(", ")
        );
    }
    println!("ok");
    Ok(())
}
