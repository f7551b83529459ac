use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use spdc_core::matching::GvmCondition;
use spdc_core::CrystalId;

/// Temperature-dependent type-II SPDC in KTP-isomorph crystals.
///
/// Units at this interface: wavelengths in nm, temperatures in degC, crystal
/// length in mm, poling period in um, delays in fs.
const UNITS: &str =
    "Units: wavelengths nm, temperatures degC, length mm, poling period um, delay fs.";

#[derive(Debug, Parser)]
#[command(name = "spdc", version, propagate_version = true, after_help = UNITS)]
pub struct Cli {
    /// Coefficient database (JSON). Falls back to $SPDC_DB, then the bundled copy.
    #[arg(long, global = true, value_name = "PATH")]
    pub db: Option<PathBuf>,

    /// Use the models whose source tag matches (e.g. `kato2002`) instead of the defaults.
    #[arg(long, global = true, value_name = "TAG")]
    pub source: Option<String>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Scan a group-velocity-matching wavelength (nm) over temperature (degC).
    #[command(after_help = UNITS)]
    Gvm(GvmArgs),
    /// Scan the phase-matched signal/idler wavelengths (nm) over temperature (degC)
    /// with pump wavelength and poling period fixed at the 20 degC degenerate design.
    #[command(after_help = UNITS)]
    PmScan(PmScanArgs),
    /// Compute the joint spectral intensity |f|^2 on a square grid and its purity.
    #[command(after_help = UNITS)]
    Jsa(JsaArgs),
    /// Compute a Hong-Ou-Mandel coincidence trace p(tau), tau in fs.
    #[command(after_help = UNITS)]
    Hom(HomArgs),
    /// Regenerate the crystal comparison table (nm) with pass/fail against published values.
    #[command(after_help = UNITS)]
    Table1(Table1Args),
    /// Parse and validate the coefficient database.
    #[command(after_help = UNITS)]
    DbValidate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConditionArg {
    /// 2/v_p(lambda/2) = 1/v_s(lambda) + 1/v_i(lambda)
    Gvm1,
    /// Pump matched to the idler (z-polarized) photon.
    Gvm2,
    /// Pump matched to the signal (y-polarized) photon.
    Gvm2Signal,
    /// Same as `gvm2`.
    Gvm2Idler,
}

impl From<ConditionArg> for GvmCondition {
    fn from(c: ConditionArg) -> Self {
        match c {
            ConditionArg::Gvm1 => GvmCondition::Gvm1,
            ConditionArg::Gvm2 | ConditionArg::Gvm2Idler => GvmCondition::Gvm2Idler,
            ConditionArg::Gvm2Signal => GvmCondition::Gvm2Signal,
        }
    }
}

/// `lo:hi:steps` in degC, steps >= 2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TempRange {
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl FromStr for TempRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, steps] = parts.as_slice() else {
            return Err(format!("expected lo:hi:steps, got `{s}`"));
        };
        let lo: f64 = lo
            .parse()
            .map_err(|_| format!("bad lower temperature `{lo}`"))?;
        let hi: f64 = hi
            .parse()
            .map_err(|_| format!("bad upper temperature `{hi}`"))?;
        let steps: usize = steps
            .parse()
            .map_err(|_| format!("bad step count `{steps}`"))?;
        if steps < 2 {
            return Err(format!("steps must be at least 2, got {steps}"));
        }
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(format!("temperature range {lo}:{hi} must be increasing"));
        }
        Ok(Self { lo, hi, steps })
    }
}

fn crystal(s: &str) -> Result<CrystalId, String> {
    s.parse().map_err(|e: spdc_core::Error| e.to_string())
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() && v > 0.0 => Ok(v),
        Ok(v) => Err(format!("must be positive, got {v}")),
        Err(_) => Err(format!("not a number: `{s}`")),
    }
}

fn finite(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(format!("not a finite number: `{s}`")),
    }
}

#[derive(Debug, Args)]
pub struct CrystalArg {
    /// Crystal: KTP, RTP, KTA, RTA or CTA (a `PP` prefix is accepted).
    #[arg(long, value_parser = crystal)]
    pub crystal: CrystalId,
}

#[derive(Debug, Args)]
pub struct OutArg {
    /// Output CSV path; a `<out>.manifest.json` is written next to it.
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,

    /// Also write a gnuplot script `<out>.gp` that plots the CSV.
    #[arg(long)]
    pub plot: bool,
}

#[derive(Debug, Args)]
pub struct GvmArgs {
    #[command(flatten)]
    pub crystal: CrystalArg,

    #[arg(long, value_enum, default_value = "gvm1")]
    pub condition: ConditionArg,

    /// Temperature sweep lo:hi:steps in degC.
    #[arg(long = "t", value_name = "LO:HI:STEPS", default_value = "20:120:101")]
    pub t: TempRange,

    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct PmScanArgs {
    #[command(flatten)]
    pub crystal: CrystalArg,

    /// Temperature sweep lo:hi:steps in degC.
    #[arg(long = "t", value_name = "LO:HI:STEPS", default_value = "20:120:101")]
    pub t: TempRange,

    /// Temperature (degC) of the degenerate GVM1 design fixing pump and period.
    #[arg(long, default_value_t = 20.0, value_parser = finite)]
    pub design_t: f64,

    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct SourceArgs {
    #[command(flatten)]
    pub crystal: CrystalArg,

    /// Crystal temperature in degC.
    #[arg(long = "t", value_name = "DEGC", default_value_t = 20.0, value_parser = finite)]
    pub t: f64,

    /// Crystal length in mm.
    #[arg(long, default_value_t = 30.0, value_parser = positive)]
    pub length_mm: f64,

    /// Pump intensity FWHM in nm.
    #[arg(long, default_value_t = 0.87, value_parser = positive)]
    pub fwhm_nm: f64,

    /// Grid points per axis (at least 16).
    #[arg(long, default_value_t = 512, value_parser = clap::value_parser!(u32).range(16..))]
    pub grid: u32,

    /// Temperature (degC) of the degenerate GVM1 design fixing pump wavelength and poling period.
    #[arg(long, default_value_t = 20.0, value_parser = finite)]
    pub design_t: f64,
}

#[derive(Debug, Args)]
pub struct JsaArgs {
    #[command(flatten)]
    pub source: SourceArgs,

    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct HomArgs {
    #[command(flatten)]
    pub source: SourceArgs,

    /// Half-width of the delay window in fs (default 20/sigma_p).
    #[arg(long, value_parser = positive)]
    pub tau_max_fs: Option<f64>,

    /// Number of delay samples, odd and at least 65.
    #[arg(long, default_value_t = 513, value_parser = odd_steps)]
    pub steps: usize,

    #[command(flatten)]
    pub out: OutArg,
}

fn odd_steps(s: &str) -> Result<usize, String> {
    let n: usize = s.parse().map_err(|_| format!("not an integer: `{s}`"))?;
    if n < 64 || n.is_multiple_of(2) {
        return Err(format!("must be odd and at least 65, got {n}"));
    }
    Ok(n)
}

#[derive(Debug, Args)]
pub struct Table1Args {
    /// Output CSV path; a `<out>.manifest.json` is written next to it.
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
}
