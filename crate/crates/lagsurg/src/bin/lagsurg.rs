//! Command-line front end: validate inputs, compute disk potentials, run
//! the surgery pipeline, and emit the bundled example scenarios.
//!
//! All file I/O is JSON: cell complexes, disk atlases, candidate cochains,
//! surgery data and sector tags round-trip through the serde forms of the
//! library types.  Reports are printed as plain-text tables and can also
//! be written as JSON with `--out`.  Every emitted file re-validates
//! cleanly, and reports are deterministic for fixed inputs and flags.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use lagsurg::ainfty::AtlasData;
use lagsurg::cone::{cone, compare_cone_surgery, BimoduleAtlas, ConeOptions, Sector};
use lagsurg::examples;
use lagsurg::floer::hf_dimension;
use lagsurg::mc::{self, MCCandidate};
use lagsurg::novikov::{ratio_from_str, Exp, NovikovElement};
use lagsurg::surgery::{
    psi, transform_atlas, verify_curve_identity, Caps, SignFlags, SurgeryData, TransformOptions,
};
use lagsurg::{CellComplex, Cochain, CurvedAInftyAlgebra};

#[derive(Parser)]
#[command(name = "lagsurg", version, about = "Cellular Fukaya algebras and Lagrangian surgery")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a complex, an atlas, and optionally a candidate cochain.
    Validate(ValidateArgs),
    /// Compute the disk potential of a candidate.
    Potential(PotentialArgs),
    /// Report the full Maurer-Cartan residual of a candidate.
    McCheck(PotentialArgs),
    /// Remove the sphere-cell coefficient of a candidate by a gauge move.
    GaugeAway(GaugeAwayArgs),
    /// Compute Floer cohomology dimensions with a rank certificate.
    Hf(PotentialArgs),
    /// Run the surgery pipeline: transform, verify, and report.
    Surger(SurgerArgs),
    /// Compare a mapping cone against the surgered algebra.
    Cone(ConeArgs),
    /// Write a bundled example scenario as a JSON input set.
    Example(ExampleArgs),
}

/// Numeric and convention flags shared by the commands.
#[derive(Args, Clone)]
struct CommonOpts {
    /// Truncation order for Novikov series, as a rational `p/q`.
    #[arg(long, default_value = "6")]
    trunc: String,
    /// Multiplicity caps `R,S` for the handle expansion.
    #[arg(long, default_value = "12,6")]
    caps: String,
    /// Numeric tolerance for verification reports.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Branch `k` of the logarithm used for handle coefficients.
    #[arg(long, default_value_t = 0)]
    branch: i64,
    /// Overrides for the surgery sign flags, comma separated from
    /// {meridian-minus, flip-orientation}.
    #[arg(long, value_name = "FLAGS")]
    sign_flags: Option<String>,
    /// Enable the dimension-1 regime of the worked example.
    #[arg(long)]
    example_mode: bool,
}

impl CommonOpts {
    fn trunc(&self) -> Result<Exp, CliError> {
        ratio_from_str(&self.trunc)
            .map_err(|e| CliError::Input(format!("--trunc: {e}")))
    }

    fn caps(&self) -> Result<Caps, CliError> {
        let parts: Vec<&str> = self.caps.split(',').collect();
        let parse = |s: &str| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| CliError::Input(format!("--caps: cannot parse {}", self.caps)))
        };
        match parts.as_slice() {
            [r] => Ok(Caps {
                r: parse(r)?,
                ..Caps::default()
            }),
            [r, s] => Ok(Caps {
                r: parse(r)?,
                s: parse(s)?,
            }),
            _ => Err(CliError::Input(format!(
                "--caps: expected R or R,S, got {}",
                self.caps
            ))),
        }
    }

    fn sign_flags(&self) -> Result<Option<SignFlags>, CliError> {
        let Some(raw) = &self.sign_flags else {
            return Ok(None);
        };
        let mut flags = SignFlags::default();
        for part in raw.split(',').filter(|p| !p.trim().is_empty()) {
            match part.trim() {
                "meridian-minus" => flags.meridian_minus = true,
                "flip-orientation" => flags.flip_orientation = true,
                other => {
                    return Err(CliError::Input(format!("--sign-flags: unknown flag {other}")))
                }
            }
        }
        Ok(Some(flags))
    }

    fn transform_options(&self) -> Result<TransformOptions, CliError> {
        let mut opts = TransformOptions::default();
        opts.caps = self.caps()?;
        opts.tol = self.tol;
        opts.branch = self.branch;
        opts.example_mode = self.example_mode;
        Ok(opts)
    }
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    complex: PathBuf,
    #[arg(long)]
    atlas: PathBuf,
    #[arg(long)]
    candidate: Option<PathBuf>,
    #[arg(long)]
    surgery: Option<PathBuf>,
    #[command(flatten)]
    common: CommonOpts,
}

#[derive(Args)]
struct PotentialArgs {
    #[arg(long)]
    complex: PathBuf,
    #[arg(long)]
    atlas: PathBuf,
    #[arg(long)]
    candidate: PathBuf,
    /// Write the report as JSON to this path.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    common: CommonOpts,
}

#[derive(Args)]
struct GaugeAwayArgs {
    #[arg(long)]
    complex: PathBuf,
    #[arg(long)]
    atlas: PathBuf,
    #[arg(long)]
    candidate: PathBuf,
    #[arg(long)]
    surgery: PathBuf,
    /// Which surgery ball to gauge at.
    #[arg(long, default_value = "plus", value_parser = ["plus", "minus"])]
    side: String,
    /// Write the gauged candidate as JSON to this path.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    common: CommonOpts,
}

#[derive(Args)]
struct SurgerArgs {
    #[arg(long)]
    complex: PathBuf,
    #[arg(long)]
    atlas: PathBuf,
    #[arg(long)]
    candidate: PathBuf,
    #[arg(long)]
    surgery: PathBuf,
    /// Directory for the emitted files (b_eps, surgered complex/atlas,
    /// reports).
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[command(flatten)]
    common: CommonOpts,
}

#[derive(Args)]
struct ConeArgs {
    #[arg(long)]
    complex: PathBuf,
    #[arg(long)]
    atlas: PathBuf,
    /// Sector tags: a JSON map generator -> {minus, plus, mp, pm}.
    #[arg(long)]
    sectors: PathBuf,
    /// The connecting cocycle, as a cochain JSON.
    #[arg(long)]
    cocycle: PathBuf,
    #[arg(long)]
    b_minus: PathBuf,
    #[arg(long)]
    b_plus: PathBuf,
    /// Compare against the surgered algebra for this surgery datum.
    #[arg(long)]
    surgery: Option<PathBuf>,
    /// Write the report as JSON to this path.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    common: CommonOpts,
}

#[derive(Args)]
struct ExampleArgs {
    /// One of: immersed-circle, embedded-pair-cone, dim3-synthetic.
    name: String,
    /// Directory to write the input set into.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    #[command(flatten)]
    common: CommonOpts,
}

/// Error category, mapped to the process exit code.
#[derive(Debug)]
enum CliError {
    /// Unreadable or unparsable input (exit 2).
    Input(String),
    /// Structural validation findings (exit 1).
    Invalid(Vec<String>),
    /// A domain operation refused the input (exit 3).
    Domain(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(msg) => write!(f, "input error: {msg}"),
            CliError::Invalid(findings) => {
                writeln!(f, "validation failed:")?;
                for line in findings {
                    writeln!(f, "  - {line}")?;
                }
                Ok(())
            }
            CliError::Domain(msg) => write!(f, "{msg}"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Invalid(_) => 1,
            CliError::Input(_) => 2,
            CliError::Domain(_) => 3,
        }
    }
}

macro_rules! domain_from {
    ($($ty:ty),*) => {$(
        impl From<$ty> for CliError {
            fn from(e: $ty) -> Self {
                CliError::Domain(e.to_string())
            }
        }
    )*};
}

domain_from!(
    lagsurg::AinftyError,
    lagsurg::CellError,
    lagsurg::mc::McError,
    lagsurg::floer::FloerError,
    lagsurg::surgery::SurgeryError,
    lagsurg::cone::ConeError,
    lagsurg::examples::ExampleError
);

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    fs::write(path, text + "\n").map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn load_algebra(
    complex: &Path,
    atlas: &Path,
    common: &CommonOpts,
) -> Result<CurvedAInftyAlgebra, CliError> {
    let complex: CellComplex = read_json(complex)?;
    let atlas: AtlasData = read_json(atlas)?;
    Ok(atlas.assemble(complex, Some(common.trunc()?))?)
}

fn load_surgery(path: &Path, common: &CommonOpts) -> Result<SurgeryData, CliError> {
    let mut data: SurgeryData = read_json(path)?;
    if let Some(flags) = common.sign_flags()? {
        data.sign_flags = flags;
    }
    data.caps = common.caps()?;
    Ok(data)
}

fn validate_all(
    alg: &CurvedAInftyAlgebra,
    cand: Option<&MCCandidate>,
    surgery: Option<&SurgeryData>,
    example_mode: bool,
) -> Result<(), CliError> {
    let mut findings: Vec<String> = alg
        .complex()
        .validate()
        .into_iter()
        .map(|v| v.to_string())
        .collect();
    findings.extend(alg.validate());
    if let Some(cand) = cand {
        if let Err(e) = cand.check(alg) {
            findings.push(e.to_string());
        }
        if let Some(data) = surgery {
            if let Err(e) = data.validate_against(alg) {
                if !example_mode {
                    findings.push(e.to_string());
                }
            }
            if let Err(e) = mc::admissible_for_surgery(alg, cand, &data.x, &data.xbar, example_mode)
            {
                findings.push(e.to_string());
            }
        }
    }
    if findings.is_empty() {
        Ok(())
    } else {
        Err(CliError::Invalid(findings))
    }
}

fn print_cochain(label: &str, c: &Cochain) {
    if c.is_zero() {
        println!("{label}: 0");
        return;
    }
    println!("{label}:");
    for (name, v) in c.iter() {
        println!("  {name:<12} {v}");
    }
}

fn cmd_validate(args: &ValidateArgs) -> Result<(), CliError> {
    let alg = load_algebra(&args.complex, &args.atlas, &args.common)?;
    let cand: Option<MCCandidate> = match &args.candidate {
        Some(path) => Some(read_json(path)?),
        None => None,
    };
    let surgery = match &args.surgery {
        Some(path) => Some(load_surgery(path, &args.common)?),
        None => None,
    };
    validate_all(&alg, cand.as_ref(), surgery.as_ref(), args.common.example_mode)?;
    println!("ok: complex and atlas are valid");
    if cand.is_some() {
        println!("ok: candidate is admissible");
    }
    Ok(())
}

fn cmd_potential(args: &PotentialArgs) -> Result<(), CliError> {
    let alg = load_algebra(&args.complex, &args.atlas, &args.common)?;
    let cand: MCCandidate = read_json(&args.candidate)?;
    let (w, flat) = mc::potential(&alg, &cand)?;
    println!("W = {w}");
    println!("projectively flat: {flat}");
    if let Some(out) = &args.out {
        #[derive(Serialize)]
        struct Report {
            potential: NovikovElement,
            flat: bool,
        }
        write_json(out, &Report { potential: w, flat })?;
    }
    Ok(())
}

fn cmd_mc_check(args: &PotentialArgs) -> Result<(), CliError> {
    let alg = load_algebra(&args.complex, &args.atlas, &args.common)?;
    let cand: MCCandidate = read_json(&args.candidate)?;
    let residual = mc::mc_residual(&alg, &cand)?;
    print_cochain("mc residual", &residual);
    let (_, flat) = mc::potential(&alg, &cand)?;
    println!("multiple of the strict unit: {flat}");
    if let Some(out) = &args.out {
        write_json(out, &residual)?;
    }
    Ok(())
}

fn cmd_gauge_away(args: &GaugeAwayArgs) -> Result<(), CliError> {
    let alg = load_algebra(&args.complex, &args.atlas, &args.common)?;
    let cand: MCCandidate = read_json(&args.candidate)?;
    let data = load_surgery(&args.surgery, &args.common)?;
    let ball = if args.side == "plus" {
        &data.ball_plus
    } else {
        &data.ball_minus
    };
    let gauged = mc::gauge_away(&alg, &cand, ball)?;
    print_cochain("gauged candidate", &gauged.b);
    if let Some(out) = &args.out {
        write_json(out, &gauged)?;
    }
    Ok(())
}

fn cmd_hf(args: &PotentialArgs) -> Result<(), CliError> {
    let alg = load_algebra(&args.complex, &args.atlas, &args.common)?;
    let cand: MCCandidate = read_json(&args.candidate)?;
    let report = hf_dimension(&alg, &cand)?;
    println!("floer basis size: {}", report.dim + 2 * report.rank);
    println!("rank(m_1^b) = {}", report.rank);
    println!("dim HF = {}", report.dim);
    if let Some(margin) = &report.margin {
        println!("truncation margin: {margin}");
    }
    for pivot in &report.pivots {
        println!("  pivot ({}, {}) at q^{}", pivot.row, pivot.col, pivot.val);
    }
    if let Some(out) = &args.out {
        write_json(out, &report)?;
    }
    Ok(())
}

/// The pipeline report emitted by `surger`.
#[derive(Serialize)]
struct SurgerReport {
    b_eps: Cochain,
    potential_before: NovikovElement,
    potential_after: Option<NovikovElement>,
    flat_before: bool,
    flat_after: Option<bool>,
    curve_report: Option<lagsurg::surgery::CurveReport>,
    transform: Option<lagsurg::surgery::TransformReport>,
    hf_before: Option<lagsurg::floer::HfReport>,
    hf_after: Option<lagsurg::floer::HfReport>,
}

fn cmd_surger(args: &SurgerArgs) -> Result<(), CliError> {
    let alg = load_algebra(&args.complex, &args.atlas, &args.common)?;
    let cand: MCCandidate = read_json(&args.candidate)?;
    let data = load_surgery(&args.surgery, &args.common)?;
    validate_all(&alg, Some(&cand), Some(&data), args.common.example_mode)?;
    let opts = args.common.transform_options()?;

    let b_eps = psi(&alg, &cand, &data, &opts)?;
    let (w0, flat0) = mc::potential(&alg, &cand)?;
    println!("W before = {w0} (flat: {flat0})");
    print_cochain("b_eps", &b_eps);

    let mut report = SurgerReport {
        b_eps: b_eps.clone(),
        potential_before: w0,
        potential_after: None,
        flat_before: flat0,
        flat_after: None,
        curve_report: None,
        transform: None,
        hf_before: None,
        hf_after: None,
    };

    let surgered = if args.common.example_mode {
        println!("example mode: the surgered atlas is not derived in dimension 1");
        None
    } else {
        let (alg_eps, transform) = transform_atlas(&alg, &cand, &data, &opts)?;
        let cand_eps = MCCandidate::new(b_eps.clone(), cand.delta);
        let (w_eps, flat_eps) = mc::potential(&alg_eps, &cand_eps)?;
        println!("W after  = {w_eps} (flat: {flat_eps})");
        println!(
            "transform: {} families, {} constant disks removed, {} copied, tail {:.3e}",
            transform.families, transform.removed_constant, transform.copied, transform.tail
        );

        let curve = verify_curve_identity(&alg, &cand, &data, None, &opts)?;
        println!(
            "curve identity: {} ({} generators, tail {:.3e})",
            if curve.passed { "pass" } else { "FAIL" },
            curve.lines.len(),
            curve.tail
        );
        for line in &curve.lines {
            println!(
                "  {:<12} {}  diff {:.3e}",
                line.sigma,
                if line.passed { "pass" } else { "FAIL" },
                line.diff
            );
        }
        let passed = curve.passed;

        match hf_dimension(&alg, &cand) {
            Ok(hf0) => {
                println!("dim HF before = {}", hf0.dim);
                report.hf_before = Some(hf0);
            }
            Err(e) => println!("hf before skipped: {e}"),
        }
        match hf_dimension(&alg_eps, &cand_eps) {
            Ok(hf1) => {
                println!("dim HF after  = {}", hf1.dim);
                report.hf_after = Some(hf1);
            }
            Err(e) => println!("hf after skipped: {e}"),
        }

        report.potential_after = Some(w_eps);
        report.flat_after = Some(flat_eps);
        report.curve_report = Some(curve);
        report.transform = Some(transform);
        if !passed {
            return Err(CliError::Domain(
                "curve identity failed; see the report".to_string(),
            ));
        }
        Some((alg_eps, cand_eps))
    };

    if let Some(dir) = &args.out_dir {
        fs::create_dir_all(dir).map_err(|e| CliError::Input(format!("{}: {e}", dir.display())))?;
        write_json(&dir.join("b_eps.json"), &report.b_eps)?;
        write_json(&dir.join("report.json"), &report)?;
        if let Some((alg_eps, cand_eps)) = &surgered {
            write_json(&dir.join("complex_eps.json"), alg_eps.complex())?;
            write_json(&dir.join("atlas_eps.json"), &AtlasData::from_algebra(alg_eps))?;
            write_json(&dir.join("candidate_eps.json"), cand_eps)?;
            // Round trip: the emitted surgered side re-validates cleanly.
            let back = load_algebra(
                &dir.join("complex_eps.json"),
                &dir.join("atlas_eps.json"),
                &args.common,
            )?;
            let back_cand: MCCandidate = read_json(&dir.join("candidate_eps.json"))?;
            validate_all(&back, Some(&back_cand), None, false)?;
        }
        println!("wrote reports to {}", dir.display());
    }
    Ok(())
}

fn cmd_cone(args: &ConeArgs) -> Result<(), CliError> {
    let alg = load_algebra(&args.complex, &args.atlas, &args.common)?;
    let sectors: BTreeMap<String, Sector> = read_json(&args.sectors)?;
    let cocycle: Cochain = read_json(&args.cocycle)?;
    let b_minus: MCCandidate = read_json(&args.b_minus)?;
    let b_plus: MCCandidate = read_json(&args.b_plus)?;
    let atlas = BimoduleAtlas::new(alg, sectors)?;

    let cone_alg = cone(&atlas, &cocycle, &b_minus, &b_plus, &ConeOptions::default())?;
    println!(
        "cone algebra: {} generators, {} disks",
        cone_alg.basis().len(),
        cone_alg.atlas().len()
    );

    if let Some(path) = &args.surgery {
        let data = load_surgery(path, &args.common)?;
        let topts = args.common.transform_options()?;
        let copts = ConeOptions {
            tol: args.common.tol,
            ..ConeOptions::default()
        };
        let report =
            compare_cone_surgery(&atlas, &data, &cocycle, &b_minus, &b_plus, &topts, &copts)?;
        println!(
            "cone vs surgery: {} (max discrepancy {:.3e} over {} words)",
            if report.passed { "pass" } else { "FAIL" },
            report.max_discrepancy,
            report.lines.len()
        );
        if let Some(out) = &args.out {
            write_json(out, &report)?;
        }
        if !report.passed {
            return Err(CliError::Domain(
                "cone comparison failed; see the report".to_string(),
            ));
        }
    } else if let Some(out) = &args.out {
        write_json(out, &AtlasData::from_algebra(&cone_alg))?;
    }
    Ok(())
}

fn cmd_example(args: &ExampleArgs) -> Result<(), CliError> {
    let bundle = examples::bundle(&args.name)?;
    let dir = &args.out_dir;
    fs::create_dir_all(dir).map_err(|e| CliError::Input(format!("{}: {e}", dir.display())))?;

    write_json(&dir.join("complex.json"), bundle.algebra.complex())?;
    write_json(&dir.join("atlas.json"), &AtlasData::from_algebra(&bundle.algebra))?;
    write_json(&dir.join("candidate.json"), &bundle.candidate)?;
    if let Some(surgery) = &bundle.surgery {
        write_json(&dir.join("surgery.json"), surgery)?;
    }
    if let Some((alg_eps, cand_eps)) = &bundle.surgered {
        write_json(&dir.join("complex_eps.json"), alg_eps.complex())?;
        write_json(&dir.join("atlas_eps.json"), &AtlasData::from_algebra(alg_eps))?;
        write_json(&dir.join("candidate_eps.json"), cand_eps)?;
    }
    if let Some(sectors) = &bundle.sectors {
        write_json(&dir.join("sectors.json"), sectors)?;
    }
    if let Some(cocycle) = &bundle.cocycle {
        write_json(&dir.join("cocycle.json"), cocycle)?;
    }

    // Round trip: the emitted files re-validate cleanly.
    let alg = load_algebra(&dir.join("complex.json"), &dir.join("atlas.json"), &args.common)?;
    let cand: MCCandidate = read_json(&dir.join("candidate.json"))?;
    validate_all(&alg, Some(&cand), None, bundle.example_mode)?;
    if bundle.surgered.is_some() {
        let alg_eps = load_algebra(
            &dir.join("complex_eps.json"),
            &dir.join("atlas_eps.json"),
            &args.common,
        )?;
        let cand_eps: MCCandidate = read_json(&dir.join("candidate_eps.json"))?;
        validate_all(&alg_eps, Some(&cand_eps), None, bundle.example_mode)?;
    }

    println!("wrote {} to {}", bundle.name, dir.display());
    if bundle.example_mode {
        println!("note: run the pipeline with --example-mode");
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Validate(args) => cmd_validate(args),
        Command::Potential(args) => cmd_potential(args),
        Command::McCheck(args) => cmd_mc_check(args),
        Command::GaugeAway(args) => cmd_gauge_away(args),
        Command::Hf(args) => cmd_hf(args),
        Command::Surger(args) => cmd_surger(args),
        Command::Cone(args) => cmd_cone(args),
        Command::Example(args) => cmd_example(args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
