//! Command surface for the EHD free-boundary toolkit.
//!
//! One command per process. Every command writes machine-readable
//! artifacts (CSV tables with header rows, single-line key=value summary
//! records, field files) into the output directory, each stamped with the
//! tool version and a hash of the resolved configuration, so identical
//! configurations reproduce byte-identical artifacts.
//!
//! Exit status: 0 when every hard assertion of the command passes, 1 when
//! an assertion fails, 2 on usage errors.

use clap::{Args, Parser, Subcommand};
use ehd_core::blowup::{classify, find_stagnation, homogeneity_deviation, ClassifyParams};
use ehd_core::corner::{solution_summary, solve, CornerSolution, CornerSystem, CornerVariant};
use ehd_core::field::ScalarField;
use ehd_core::frequency::{freq_h, FrequencyOpts};
use ehd_core::geom::Vec2;
use ehd_core::minimize::{minimize_best, BoundaryData, DomainSpec, MinimizeParams};
use ehd_core::profiles::PiecewiseProfile;
use ehd_core::report::{config_hash, format_f64, CsvCell, CsvTable, Summary};
use ehd_core::weiss::{weiss_report, WeissOpts};
use ehd_core::{Error, Result};
use std::collections::BTreeMap;
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

#[derive(Parser, Debug)]
#[command(name = "ehd", version, about = "Two-phase EHD free boundary analysis")]
pub struct Cli {
    /// Optional key=value config file; explicit flags override file values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output directory for artifacts.
    #[arg(long, global = true, default_value = "ehd-out")]
    pub out: PathBuf,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check the closed-form catalog: boundary-condition residuals,
    /// interior Laplacian residuals and exact densities.
    VerifyProfiles,
    /// Solve the corner amplitude systems and report the root table.
    CornerSolve(CornerSolveArgs),
    /// Weiss-type boundary adjusted energies over a radius schedule.
    Weiss(DiagnosticsArgs),
    /// Frequency quantities over a radius schedule.
    Frequency(DiagnosticsArgs),
    /// Minimize the EHD functional with prescribed boundary data.
    Minimize(MinimizeArgs),
    /// Stagnation candidates and blowup homogeneity diagnostics.
    Blowup(InputArgs),
    /// Classify the singularity at a stagnation candidate.
    Classify(InputArgs),
    /// minimize -> blowup -> classify in one run.
    Pipeline(MinimizeArgs),
}

#[derive(Args, Debug, Clone)]
pub struct CornerSolveArgs {
    /// unilateral-1 | unilateral-2 | bilateral | all
    #[arg(long, default_value = "all")]
    pub variant: String,
    /// Zero the gravity forcing (degenerates the root set).
    #[arg(long)]
    pub zero_gravity: bool,
}

#[derive(Args, Debug, Clone)]
pub struct DiagnosticsArgs {
    /// Catalog profile sampled as the input field (A1, A2, A3, A4L, A4R,
    /// W2..W8, LINEAR).
    #[arg(long)]
    pub catalog: Option<String>,
    /// Field file used as the input field.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Lattice spacing for catalog sampling.
    #[arg(long)]
    pub h: Option<f64>,
    /// Half-extent of the sampling box.
    #[arg(long)]
    pub half: Option<f64>,
    /// Center of the diagnostic, "x,y".
    #[arg(long)]
    pub center: Option<String>,
    /// Homogeneity exponent (Weiss only).
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Largest radius of the schedule.
    #[arg(long)]
    pub rmax: Option<f64>,
}

#[derive(Args, Debug, Clone)]
pub struct MinimizeArgs {
    /// Boundary data: a catalog name, "const:<value>", "linear", or
    /// "field:<path>".
    #[arg(long)]
    pub boundary: Option<String>,
    /// Nodes per side.
    #[arg(long)]
    pub n: Option<usize>,
    /// Half-extent of the square domain.
    #[arg(long)]
    pub half: Option<f64>,
    /// Datum height.
    #[arg(long)]
    pub x2_0: Option<f64>,
    /// Initialization seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug, Clone)]
pub struct InputArgs {
    /// Field file to analyze.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Center hint, "x,y".
    #[arg(long)]
    pub center: Option<String>,
}

/// key=value config file; one entry per line, '#' comments.
fn load_config(path: &Option<PathBuf>) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    if let Some(path) = path {
        let text = fs::read_to_string(path)?;
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("bad config line: {line}")))?;
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
    }
    Ok(map)
}

fn file_value<T: std::str::FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<Option<T>> {
    match map.get(key) {
        None => Ok(None),
        Some(raw) => raw
            .parse::<T>()
            .map(Some)
            .map_err(|_| Error::Parse(format!("bad config value for {key}: {raw}"))),
    }
}

fn parse_center(s: &str) -> Result<Vec2> {
    let (x, y) = s
        .split_once(',')
        .ok_or_else(|| Error::Parse(format!("center must be x,y: {s}")))?;
    Ok(Vec2::new(
        x.trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad center: {s}")))?,
        y.trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad center: {s}")))?,
    ))
}

fn write_artifact(dir: &Path, name: &str, content: &str) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), content)?;
    Ok(())
}

fn load_field(path: &Path) -> Result<ScalarField> {
    let file = fs::File::open(path)?;
    ScalarField::read_text(&mut BufReader::new(file))
}

/// Canonical configuration string hashed into every artifact.
fn canonical(command: &str, entries: &[(&str, String)]) -> (String, u64) {
    let mut sorted: Vec<(String, String)> = entries
        .iter()
        .map(|(k, v)| (k.to_string(), v.clone()))
        .collect();
    sorted.sort();
    let body = sorted
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(" ");
    let text = format!("{command} {body}");
    let hash = config_hash(&text);
    (text, hash)
}

struct FieldSource {
    field: ScalarField,
    description: Vec<(&'static str, String)>,
}

fn resolve_field(
    args: &DiagnosticsArgs,
    file: &BTreeMap<String, String>,
) -> Result<FieldSource> {
    let catalog = args.catalog.clone().or_else(|| file.get("catalog").cloned());
    let input = args
        .input
        .clone()
        .or_else(|| file.get("input").map(PathBuf::from));
    let h = match args.h {
        Some(h) => Some(h),
        None => file_value::<f64>(file, "h")?,
    }
    .unwrap_or(1.0 / 128.0);
    let half = match args.half {
        Some(v) => Some(v),
        None => file_value::<f64>(file, "half")?,
    }
    .unwrap_or(1.2);
    if !(h > 0.0 && half > 2.0 * h) {
        return Err(Error::InvalidArgument(format!(
            "invalid lattice parameters h = {h}, half = {half}"
        )));
    }
    match (catalog, input) {
        (Some(name), None) => {
            let prof = PiecewiseProfile::by_name(&name)?;
            let field = ScalarField::from_profile(&prof, half, h, 0.0)?;
            Ok(FieldSource {
                field,
                description: vec![
                    ("catalog", name),
                    ("h", format_f64(h)),
                    ("half", format_f64(half)),
                ],
            })
        }
        (None, Some(path)) => {
            if !path.exists() {
                return Err(Error::InvalidArgument(format!(
                    "input file {} does not exist",
                    path.display()
                )));
            }
            let field = load_field(&path)?;
            Ok(FieldSource {
                field,
                description: vec![("input", path.display().to_string())],
            })
        }
        (Some(_), Some(_)) => Err(Error::InvalidArgument(
            "give either --catalog or --input, not both".into(),
        )),
        (None, None) => Err(Error::InvalidArgument(
            "a field source is required: --catalog NAME or --input FILE".into(),
        )),
    }
}

fn resolve_boundary(spec: &str) -> Result<BoundaryData> {
    if let Some(v) = spec.strip_prefix("const:") {
        let c: f64 = v
            .parse()
            .map_err(|_| Error::Parse(format!("bad constant boundary: {spec}")))?;
        return Ok(BoundaryData::Constant(c));
    }
    if let Some(path) = spec.strip_prefix("field:") {
        let p = PathBuf::from(path);
        if !p.exists() {
            return Err(Error::InvalidArgument(format!(
                "trace field {path} does not exist"
            )));
        }
        return Ok(BoundaryData::FromField(load_field(&p)?));
    }
    if spec.eq_ignore_ascii_case("linear") {
        return Ok(BoundaryData::Linear);
    }
    Ok(BoundaryData::Catalog(PiecewiseProfile::by_name(spec)?))
}

/// Runs one command; returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    match execute(cli) {
        Ok(code) => code,
        Err(Error::InvalidArgument(msg)) | Err(Error::Parse(msg)) => {
            eprintln!("usage error: {msg}");
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn execute(cli: Cli) -> Result<i32> {
    let file = load_config(&cli.config)?;
    let out = &cli.out;
    match cli.command {
        Command::VerifyProfiles => verify_profiles(out),
        Command::CornerSolve(args) => corner_solve(out, &args, &file),
        Command::Weiss(args) => weiss_cmd(out, &args, &file),
        Command::Frequency(args) => frequency_cmd(out, &args, &file),
        Command::Minimize(args) => minimize_cmd(out, &args, &file).map(|(code, _)| code),
        Command::Blowup(args) => blowup_cmd(out, &args, &file),
        Command::Classify(args) => classify_cmd(out, &args, &file),
        Command::Pipeline(args) => pipeline_cmd(out, &args, &file),
    }
}

fn verify_profiles(out: &Path) -> Result<i32> {
    let (_, hash) = canonical("verify-profiles", &[]);
    let mut table = CsvTable::new(&[
        "name",
        "fb_residual_max",
        "laplacian_residual_max",
        "density",
        "density_kind",
    ]);
    let mut catalog_text = String::new();
    let mut ok = true;
    let mut entries = PiecewiseProfile::corner_catalog();
    for n in 2..=4 {
        entries.push(PiecewiseProfile::w(n));
    }
    entries.push(PiecewiseProfile::linear());
    for prof in &entries {
        catalog_text.push_str(&prof.to_records());
        let fb_max = match prof.fb_residual(0.0) {
            Ok(res) => {
                let m = res.iter().fold(0.0f64, |a, r| a.max(r.residual.abs()));
                if m > 1e-12 {
                    ok = false;
                }
                m
            }
            Err(_) => f64::NAN, // degree != 3/2: no corner conditions apply
        };
        // Interior Laplacian residuals on a deterministic probe set.
        let mut lap_max = 0.0f64;
        for piece in prof.pieces() {
            for frac in [0.2, 0.5, 0.8] {
                let theta = piece.theta_lo + frac * (piece.theta_hi - piece.theta_lo);
                for rho in [0.3, 1.0, 1.7] {
                    if let Ok(l) = prof.laplacian_residual(rho, theta) {
                        lap_max = lap_max.max(l.abs());
                    }
                }
            }
        }
        if lap_max > 1e-10 {
            ok = false;
        }
        let density = prof.density();
        table.push_row(&[
            CsvCell::S(prof.name.to_string()),
            CsvCell::F(fb_max),
            CsvCell::F(lap_max),
            CsvCell::F(density.value),
            CsvCell::S(format!("{:?}", density.kind)),
        ]);
        println!(
            "{:8} fb_residual_max={:10.3e} laplacian_max={:10.3e} density={:.12}",
            prof.name.to_string(),
            fb_max,
            lap_max,
            density.value
        );
    }
    write_artifact(out, "profiles_report.csv", &table.render(hash))?;
    write_artifact(out, "catalog.txt", &catalog_text)?;
    let mut summary = Summary::new();
    summary.push_str("record", "verify-profiles");
    summary.push_str("result", if ok { "pass" } else { "fail" });
    write_artifact(out, "verify_summary.txt", &summary.render(hash))?;
    Ok(if ok { 0 } else { 1 })
}

fn corner_variants(name: &str) -> Result<Vec<CornerVariant>> {
    match name {
        "unilateral-1" => Ok(vec![CornerVariant::Unilateral1]),
        "unilateral-2" => Ok(vec![CornerVariant::Unilateral2]),
        "bilateral" => Ok(vec![CornerVariant::Bilateral]),
        "all" => Ok(vec![
            CornerVariant::Unilateral1,
            CornerVariant::Unilateral2,
            CornerVariant::Bilateral,
        ]),
        other => Err(Error::InvalidArgument(format!(
            "unknown corner variant {other}"
        ))),
    }
}

fn corner_solve(
    out: &Path,
    args: &CornerSolveArgs,
    file: &BTreeMap<String, String>,
) -> Result<i32> {
    let variant = if args.variant == "all" {
        file.get("variant").cloned().unwrap_or(args.variant.clone())
    } else {
        args.variant.clone()
    };
    let zero_gravity = args.zero_gravity || file.get("zero_gravity").map(|v| v == "true").unwrap_or(false);
    let (_, hash) = canonical(
        "corner-solve",
        &[
            ("variant", variant.clone()),
            ("zero_gravity", zero_gravity.to_string()),
        ],
    );
    let mut text = String::new();
    let mut ok = true;
    for v in corner_variants(&variant)? {
        let system = if zero_gravity {
            CornerSystem::without_gravity(v)
        } else {
            CornerSystem::new(v)
        };
        match solve(&system) {
            Ok(solution) => {
                let block = solution_summary(&system, &solution, hash);
                print!("{block}");
                text.push_str(&block);
                if let CornerSolution::Roots(roots) = &solution {
                    if roots.iter().any(|r| r.residual_inf >= 1e-12) {
                        ok = false;
                    }
                }
            }
            Err(e) => {
                ok = false;
                text.push_str(&format!("variant={v} error={e}\n"));
            }
        }
    }
    write_artifact(out, "corner_roots.txt", &text)?;
    Ok(if ok { 0 } else { 1 })
}

fn weiss_cmd(out: &Path, args: &DiagnosticsArgs, file: &BTreeMap<String, String>) -> Result<i32> {
    let src = resolve_field(args, file)?;
    let center = match &args.center {
        Some(s) => parse_center(s)?,
        None => match file.get("center") {
            Some(s) => parse_center(s)?,
            None => Vec2::ZERO,
        },
    };
    let kappa = match args.kappa {
        Some(k) => k,
        None => file_value::<f64>(file, "kappa")?.unwrap_or(1.5),
    };
    let r_max = match args.rmax {
        Some(r) => r,
        None => file_value::<f64>(file, "rmax")?.unwrap_or(0.5),
    };
    let mut entries = src.description.clone();
    entries.push(("center_x", format_f64(center.x)));
    entries.push(("center_y", format_f64(center.y)));
    entries.push(("kappa", format_f64(kappa)));
    entries.push(("rmax", format_f64(r_max)));
    let (_, hash) = canonical("weiss", &entries);
    let report = weiss_report(&src.field, center, kappa, r_max, &WeissOpts::default())?;
    write_artifact(out, "weiss.csv", &report.to_csv(hash))?;
    write_artifact(out, "weiss_summary.txt", &report.to_summary(hash))?;
    print!("{}", report.to_summary(hash));
    Ok(0)
}

fn frequency_cmd(
    out: &Path,
    args: &DiagnosticsArgs,
    file: &BTreeMap<String, String>,
) -> Result<i32> {
    let src = resolve_field(args, file)?;
    let center = match &args.center {
        Some(s) => parse_center(s)?,
        None => match file.get("center") {
            Some(s) => parse_center(s)?,
            None => Vec2::ZERO,
        },
    };
    let r_max = match args.rmax {
        Some(r) => r,
        None => file_value::<f64>(file, "rmax")?.unwrap_or(0.6),
    };
    let mut entries = src.description.clone();
    entries.push(("center_x", format_f64(center.x)));
    entries.push(("center_y", format_f64(center.y)));
    entries.push(("rmax", format_f64(r_max)));
    let (_, hash) = canonical("frequency", &entries);
    let report = freq_h(&src.field, center, r_max, &FrequencyOpts::default())?;
    write_artifact(out, "frequency.csv", &report.to_csv(hash))?;
    write_artifact(out, "frequency_summary.txt", &report.to_summary(hash))?;
    print!("{}", report.to_summary(hash));
    Ok(0)
}

struct MinimizeOutcome {
    field: ScalarField,
    converged: bool,
    hash: u64,
}

fn minimize_cmd(
    out: &Path,
    args: &MinimizeArgs,
    file: &BTreeMap<String, String>,
) -> Result<(i32, MinimizeOutcome)> {
    let boundary_spec = args
        .boundary
        .clone()
        .or_else(|| file.get("boundary").cloned())
        .ok_or_else(|| Error::InvalidArgument("--boundary is required".into()))?;
    let n = match args.n {
        Some(n) => n,
        None => file_value::<usize>(file, "n")?.unwrap_or(128),
    };
    let half = match args.half {
        Some(v) => v,
        None => file_value::<f64>(file, "half")?.unwrap_or(1.0),
    };
    let x2_0 = match args.x2_0 {
        Some(v) => v,
        None => file_value::<f64>(file, "x2_0")?.unwrap_or(0.0),
    };
    let seed = match args.seed {
        Some(v) => v,
        None => file_value::<u64>(file, "seed")?.unwrap_or(0),
    };
    let entries = vec![
        ("boundary", boundary_spec.clone()),
        ("n", n.to_string()),
        ("half", format_f64(half)),
        ("x2_0", format_f64(x2_0)),
        ("seed", seed.to_string()),
    ];
    let (_, hash) = canonical("minimize", &entries);

    let boundary = resolve_boundary(&boundary_spec)?;
    let domain = DomainSpec::square_centered(half, n, x2_0);
    let mut params = MinimizeParams::default_for(domain.h);
    params.seed = seed;
    let result = minimize_best(&domain, &boundary, &params)?;

    write_artifact(out, "field.txt", &result.field.to_text())?;
    let mut history = CsvTable::new(&["stage", "energy"]);
    for &(stage, e) in &result.energy_history {
        history.push_row(&[CsvCell::I(stage as i64), CsvCell::F(e)]);
    }
    write_artifact(out, "energy_history.csv", &history.render(hash))?;
    let mut fb = CsvTable::new(&["polyline", "x", "y"]);
    for (i, poly) in result.fb.iter().enumerate() {
        for v in &poly.vertices {
            fb.push_row(&[CsvCell::I(i as i64), CsvCell::F(v.x), CsvCell::F(v.y)]);
        }
    }
    write_artifact(out, "fb.csv", &fb.render(hash))?;
    let mut summary = Summary::new();
    summary.push_str("record", "minimize");
    summary.push_str("boundary", &boundary_spec);
    summary.push_int("n", n as i64);
    summary.push_int("seed", seed as i64);
    summary.push_str("converged", if result.converged { "yes" } else { "no" });
    summary.push_f64("exact_energy", result.exact_energy);
    summary.push_int("fb_polylines", result.fb.len() as i64);
    write_artifact(out, "minimize_summary.txt", &summary.render(hash))?;
    print!("{}", summary.render(hash));
    let code = if result.converged { 0 } else { 1 };
    Ok((
        code,
        MinimizeOutcome {
            field: result.field,
            converged: result.converged,
            hash,
        },
    ))
}

fn blowup_cmd(out: &Path, args: &InputArgs, file: &BTreeMap<String, String>) -> Result<i32> {
    let input = args
        .input
        .clone()
        .or_else(|| file.get("input").map(PathBuf::from))
        .ok_or_else(|| Error::InvalidArgument("--input is required".into()))?;
    if !input.exists() {
        return Err(Error::InvalidArgument(format!(
            "input file {} does not exist",
            input.display()
        )));
    }
    let field = load_field(&input)?;
    let entries = vec![("input", input.display().to_string())];
    let (_, hash) = canonical("blowup", &entries);
    let scan = find_stagnation(&field);
    let mut text = String::new();
    for (i, c) in scan.candidates.iter().enumerate() {
        let mut s = Summary::new();
        s.push_str("record", "stagnation-candidate");
        s.push_int("index", i as i64);
        s.push_f64("x", c.location.x);
        s.push_f64("y", c.location.y);
        s.push_f64("grad_norm", c.grad_norm);
        s.push_f64("height_gap", c.height_gap);
        // Blowup-limit emergence between successive radius pairs.
        for (r1, r2) in [(0.4, 0.2), (0.2, 0.1)] {
            if let Ok(dev) = homogeneity_deviation(&field, c.location, 1.5, r1, r2) {
                s.push_f64(&format!("homogeneity_dev_{r1}_{r2}"), dev.value);
            }
        }
        text.push_str(&s.render(hash));
    }
    for c in &scan.anomalous {
        let mut s = Summary::new();
        s.push_str("record", "anomalous-candidate");
        s.push_f64("x", c.location.x);
        s.push_f64("y", c.location.y);
        s.push_f64("height_gap", c.height_gap);
        text.push_str(&s.render(hash));
    }
    if text.is_empty() {
        text.push_str("record=stagnation-scan candidates=0\n");
    }
    write_artifact(out, "stagnation.txt", &text)?;
    print!("{text}");
    Ok(0)
}

fn classify_field(
    out: &Path,
    field: &ScalarField,
    center: Option<Vec2>,
    hash: u64,
) -> Result<(i32, String)> {
    let scan = find_stagnation(field);
    let candidate = match center {
        Some(c) => scan
            .candidates
            .iter()
            .min_by(|a, b| a.location.dist(c).total_cmp(&b.location.dist(c)))
            .copied(),
        None => scan.candidates.first().copied(),
    };
    let candidate = match candidate {
        Some(c) => c,
        None => {
            let text = "record=classification label=none reason=no-stagnation-candidates\n";
            write_artifact(out, "classification.txt", text)?;
            return Ok((1, text.to_string()));
        }
    };
    let params = ClassifyParams::for_field(field, candidate.location);
    let result = classify(field, &candidate, &params)?;
    write_artifact(out, "classification_evidence.csv", &result.evidence_csv(hash))?;
    let summary = result.to_summary(hash);
    write_artifact(out, "classification.txt", &summary)?;
    let ok = !matches!(
        result.label,
        ehd_core::blowup::Label::Unclassified | ehd_core::blowup::Label::NonStagnation
    );
    Ok((if ok { 0 } else { 1 }, summary))
}

fn classify_cmd(out: &Path, args: &InputArgs, file: &BTreeMap<String, String>) -> Result<i32> {
    let input = args
        .input
        .clone()
        .or_else(|| file.get("input").map(PathBuf::from))
        .ok_or_else(|| Error::InvalidArgument("--input is required".into()))?;
    if !input.exists() {
        return Err(Error::InvalidArgument(format!(
            "input file {} does not exist",
            input.display()
        )));
    }
    let field = load_field(&input)?;
    let center = match &args.center {
        Some(s) => Some(parse_center(s)?),
        None => None,
    };
    let entries = vec![("input", input.display().to_string())];
    let (_, hash) = canonical("classify", &entries);
    let (code, summary) = classify_field(out, &field, center, hash)?;
    print!("{summary}");
    Ok(code)
}

fn pipeline_cmd(out: &Path, args: &MinimizeArgs, file: &BTreeMap<String, String>) -> Result<i32> {
    let (_, outcome) = minimize_cmd(out, args, file)?;
    let (code, summary) = classify_field(out, &outcome.field, Some(Vec2::ZERO), outcome.hash)?;
    print!("{summary}");
    let mut s = Summary::new();
    s.push_str("record", "pipeline");
    s.push_str(
        "minimize_converged",
        if outcome.converged { "yes" } else { "no" },
    );
    s.push_str("classification_ok", if code == 0 { "yes" } else { "no" });
    write_artifact(out, "pipeline_summary.txt", &s.render(outcome.hash))?;
    Ok(if outcome.converged && code == 0 { 0 } else { 1 })
}
