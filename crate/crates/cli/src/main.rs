//! `fockfisher`: single-point reports, figure sweeps and the invariant suite.
// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod output;
mod settings;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use fockfisher::metrics::{default_delta_grid, DEFAULT_PHI};
use fockfisher::{
    evaluate, run_suite, sweep_delta, sweep_family, sweep_photon_number, Evaluation, Family, GridSpec,
    Scenario, StateSpec, SuiteOptions, SweepConfig,
};
use serde::Serialize;

use output::{num, Format};
use settings::Settings;

#[derive(Parser)]
#[command(name = "fockfisher", version, about = "Joint phase / phase-diffusion estimation with double-homodyne detection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fisher matrices and figures of merit for one scenario
    Single(Options),
    /// Write sweep tables and a manifest into --out
    Sweep(Options),
    /// Run the fast invariant suite; non-zero exit on any failure
    Validate(Options),
}

/// Every option may also come from `--config FILE` (`key = value` lines);
/// flags win over the file.
#[derive(Args, Default)]
struct Options {
    /// Flat key-value config file
    #[arg(long)]
    config: Option<PathBuf>,
    /// ghb:<n>,<N-n> | hb:<N> | noon:<N>
    #[arg(long)]
    state: Option<String>,
    /// Phase in radians (default 0.3)
    #[arg(long)]
    phi: Option<String>,
    /// Diffusion; a comma list for delta sweeps, the fixed value for photon sweeps
    #[arg(long)]
    delta: Option<String>,
    /// Log-spaced diffusion grid a:b:steps
    #[arg(long)]
    delta_range: Option<String>,
    /// Transmissivity of both arms; a comma list for sweeps
    #[arg(long)]
    eta: Option<String>,
    #[arg(long)]
    eta_a: Option<String>,
    #[arg(long)]
    eta_b: Option<String>,
    /// Quadrature nodes per axis (odd)
    #[arg(long)]
    grid_points: Option<String>,
    /// Quadrature half-width L (default sqrt(2N+1) + 4)
    #[arg(long)]
    grid_halfwidth: Option<String>,
    /// delta | photons | family
    #[arg(long)]
    axis: Option<String>,
    /// Families, e.g. ghb0,hb,noon or ghb0..6
    #[arg(long)]
    families: Option<String>,
    /// Photon numbers, e.g. 4,5,6 or 1..14
    #[arg(long)]
    photons: Option<String>,
    /// Output directory for sweeps
    #[arg(long)]
    out: Option<String>,
    /// csv | json (single also accepts text)
    #[arg(long)]
    format: Option<String>,
    /// Relative tolerance of the saturation cutoff (default 1e-3)
    #[arg(long)]
    tol: Option<String>,
}

impl Options {
    fn settings(&self) -> Result<Settings> {
        let mut s = match &self.config {
            Some(path) => Settings::parse_file(path)?,
            None => Settings::default(),
        };
        s.set_flag("state", self.state.as_ref());
        s.set_flag("phi", self.phi.as_ref());
        s.set_flag("delta", self.delta.as_ref());
        s.set_flag("delta-range", self.delta_range.as_ref());
        s.set_flag("eta", self.eta.as_ref());
        s.set_flag("eta-a", self.eta_a.as_ref());
        s.set_flag("eta-b", self.eta_b.as_ref());
        s.set_flag("grid-points", self.grid_points.as_ref());
        s.set_flag("grid-halfwidth", self.grid_halfwidth.as_ref());
        s.set_flag("axis", self.axis.as_ref());
        s.set_flag("families", self.families.as_ref());
        s.set_flag("photons", self.photons.as_ref());
        s.set_flag("out", self.out.as_ref());
        s.set_flag("format", self.format.as_ref());
        s.set_flag("tol", self.tol.as_ref());
        Ok(s)
    }
}

fn grid(s: &Settings) -> Result<GridSpec> {
    let g = GridSpec {
        points_per_axis: s.get("grid-points")?,
        half_width: s.get("grid-halfwidth")?,
    };
    if let Some(p) = g.points_per_axis {
        if p < 3 || p % 2 == 0 {
            bail!("grid-points must be odd and at least 3, got {p}");
        }
    }
    if let Some(l) = g.half_width {
        if !(l > 0.0) {
            bail!("grid-halfwidth must be positive, got {l}");
        }
    }
    Ok(g)
}

fn check_eta(v: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        bail!("transmissivity {v} outside [0, 1]")
    }
}

/// `--eta-a/--eta-b` pin one asymmetric setting; otherwise each `--eta`
/// value is applied to both arms.
fn etas(s: &Settings) -> Result<Vec<(f64, f64)>> {
    let a: Option<f64> = s.get("eta-a")?;
    let b: Option<f64> = s.get("eta-b")?;
    let both: Option<Vec<f64>> = s.list("eta")?;
    let out = if a.is_some() || b.is_some() {
        let base = match both.as_deref() {
            None => 1.0,
            Some([v]) => *v,
            Some(_) => bail!("--eta-a/--eta-b combine with at most one --eta value"),
        };
        vec![(a.unwrap_or(base), b.unwrap_or(base))]
    } else {
        both.map(|v| v.into_iter().map(|e| (e, e)).collect()).unwrap_or_else(|| vec![(1.0, 1.0)])
    };
    for &(x, y) in &out {
        check_eta(x)?;
        check_eta(y)?;
    }
    Ok(out)
}

fn warn_photon_cap(n: usize) {
    if n > 20 {
        eprintln!("warning: N = {n} is above the soft cap of 20; runtimes grow quickly");
    }
}

#[derive(Serialize)]
struct SingleReport {
    state: String,
    label: String,
    phi: f64,
    delta: f64,
    eta_a: f64,
    eta_b: f64,
    grid_points: usize,
    grid_half_width: f64,
    parameter_order: [&'static str; 2],
    fc: [[f64; 2]; 2],
    fq: [[f64; 2]; 2],
    w_re: [[f64; 2]; 2],
    w_im: [[f64; 2]; 2],
    upsilon: Option<f64>,
    sigma2: Option<f64>,
    hcr: Option<f64>,
    commutator_trace_re: f64,
    commutator_trace_im: f64,
    commutator_norm: f64,
    log_scale: [f64; 2],
    diagnostics: Vec<String>,
}

fn report(ev: &Evaluation) -> SingleReport {
    let fc = ev.pair.physical_fc();
    let fq = ev.pair.physical_fq();
    let w = ev.pair.physical_w();
    let arr = |f: &dyn Fn(usize, usize) -> f64| [[f(0, 0), f(0, 1)], [f(1, 0), f(1, 1)]];
    let mut diagnostics: Vec<String> = ev.flags().iter().map(|f| f.to_string()).collect();
    let mut keep = |r: fockfisher::Result<f64>, what: &str| match r {
        Ok(v) => Some(v),
        Err(e) => {
            diagnostics.push(format!("{what} undefined: {e}"));
            None
        }
    };
    let upsilon = keep(ev.upsilon(), "Upsilon");
    let sigma2 = keep(ev.sigma2(), "Sigma2");
    let hcr = keep(ev.hcr(), "HCR");
    let tr = ev.pair.commutator_trace();
    SingleReport {
        state: ev.scenario.state.to_string(),
        label: ev.label.to_string(),
        phi: ev.scenario.phi,
        delta: ev.scenario.delta,
        eta_a: ev.scenario.eta_a,
        eta_b: ev.scenario.eta_b,
        grid_points: ev.grid.points_per_axis(),
        grid_half_width: ev.grid.half_width(),
        parameter_order: fockfisher::PARAMETER_ORDER,
        fc: arr(&|i, j| fc[(i, j)]),
        fq: arr(&|i, j| fq[(i, j)]),
        w_re: arr(&|i, j| w[(i, j)].re),
        w_im: arr(&|i, j| w[(i, j)].im),
        upsilon,
        sigma2,
        hcr,
        commutator_trace_re: tr.re,
        commutator_trace_im: tr.im,
        commutator_norm: ev.pair.physical_commutator_norm(),
        log_scale: ev.pair.log_scale,
        diagnostics,
    }
}

fn print_text(r: &SingleReport) {
    let opt = |v: Option<f64>| v.map(num).unwrap_or_else(|| "undefined".into());
    println!("state        {} ({})", r.label, r.state);
    println!("phi          {}", num(r.phi));
    println!("Delta        {}", num(r.delta));
    println!("eta_a, eta_b {}, {}", num(r.eta_a), num(r.eta_b));
    println!("grid         {} points per axis, half-width {}", r.grid_points, num(r.grid_half_width));
    println!("parameters   ({}, {})", r.parameter_order[0], r.parameter_order[1]);
    for (name, m) in [("F_C", &r.fc), ("F_Q", &r.fq), ("Re W", &r.w_re), ("Im W", &r.w_im)] {
        println!("{name:<12} [[{}, {}], [{}, {}]]", num(m[0][0]), num(m[0][1]), num(m[1][0]), num(m[1][1]));
    }
    println!("Upsilon      {}", opt(r.upsilon));
    println!("Sigma2       {}", opt(r.sigma2));
    println!("HCR          {}", opt(r.hcr));
    println!(
        "commutator   Tr(rho[L_phi,L_Delta]) = {} + {} i, max sector norm {}",
        num(r.commutator_trace_re),
        num(r.commutator_trace_im),
        num(r.commutator_norm)
    );
    for d in &r.diagnostics {
        println!("diagnostic   {d}");
    }
}

fn print_csv(r: &SingleReport) -> Result<()> {
    let opt = |v: Option<f64>| v.map(num).unwrap_or_else(|| "nan".into());
    let mut w = csv::Writer::from_writer(std::io::stdout());
    w.write_record(output::HEADER)?;
    let (n, part) = match r.state.parse::<StateSpec>().map(|s| s.label()) {
        Ok(l) => (l.input_n().map(|x| x.to_string()), l.partition().map(|x| x.to_string())),
        Err(_) => (None, None),
    };
    w.write_record([
        r.label.clone(),
        r.state.parse::<StateSpec>().map(|s| s.photons().to_string()).unwrap_or_default(),
        n.unwrap_or_default(),
        part.unwrap_or_default(),
        num(r.delta),
        num(r.eta_a),
        num(r.eta_b),
        opt(r.upsilon),
        opt(r.sigma2),
        num(r.fc[0][0]),
        num(r.fc[1][1]),
        num(r.fq[0][0]),
        num(r.fq[1][1]),
        opt(r.hcr),
        r.diagnostics.join(";"),
    ])?;
    w.flush()?;
    Ok(())
}

const SINGLE_KEYS: &[&str] = &["state", "phi", "delta", "eta", "eta-a", "eta-b", "grid-points", "grid-halfwidth", "format"];
const SWEEP_KEYS: &[&str] = &[
    "phi", "delta", "delta-range", "eta", "eta-a", "eta-b", "grid-points", "grid-halfwidth", "axis", "families", "photons",
    "out", "format", "tol",
];
const VALIDATE_KEYS: &[&str] = &["grid-points", "grid-halfwidth"];

fn single(opts: &Options) -> Result<ExitCode> {
    let s = opts.settings()?;
    s.restrict("single", SINGLE_KEYS)?;
    let state: StateSpec = s.get("state")?.ok_or_else(|| anyhow!("--state is required"))?;
    warn_photon_cap(state.photons());
    let phi: f64 = s.get("phi")?.unwrap_or(DEFAULT_PHI);
    let delta: f64 = s.get("delta")?.ok_or_else(|| anyhow!("--delta is required"))?;
    let etas = etas(&s)?;
    let [(eta_a, eta_b)] = etas[..] else {
        bail!("single takes one transmissivity per arm");
    };
    let format = s.raw("format").unwrap_or("text");
    let scenario = Scenario::new(state, phi, delta, eta_a, eta_b).with_grid(grid(&s)?);
    let ev = evaluate(&scenario).with_context(|| format!("evaluating {state} at Delta = {delta}"))?;
    let r = report(&ev);
    match format {
        "text" => print_text(&r),
        "json" => println!("{}", serde_json::to_string_pretty(&r)?),
        "csv" => print_csv(&r)?,
        other => bail!("format `{other}`: expected text, csv or json"),
    }
    Ok(ExitCode::SUCCESS)
}

/// `ghb0,hb`, `ghb0..6` (all partitions k = 0..6) or any mix.
fn families(s: &Settings) -> Result<Option<Vec<Family>>> {
    let Some(raw) = s.raw("families") else { return Ok(None) };
    let mut out = Vec::new();
    for item in raw.split(',').map(str::trim) {
        if let Some((a, b)) = item.strip_prefix("ghb").and_then(|r| r.split_once("..")) {
            let (a, b): (usize, usize) = (
                a.parse().with_context(|| format!("families: invalid range `{item}`"))?,
                b.parse().with_context(|| format!("families: invalid range `{item}`"))?,
            );
            out.extend((a..=b).map(Family::Ghb));
        } else {
            out.push(item.parse().map_err(|_| anyhow!("families: unknown family `{item}` (ghb<k>, ghb<a>..<b>, hb, noon)"))?);
        }
    }
    Ok(Some(out))
}

#[derive(Clone, Copy, PartialEq)]
enum Axis {
    Delta,
    Photons,
    Family,
}

impl Axis {
    fn name(self) -> &'static str {
        match self {
            Axis::Delta => "delta",
            Axis::Photons => "photons",
            Axis::Family => "family",
        }
    }
}

#[derive(Serialize)]
struct FileEntry {
    file: String,
    table: String,
    panel: &'static str,
    rows: usize,
}

#[derive(Serialize)]
struct Manifest {
    engine: &'static str,
    version: &'static str,
    command: &'static str,
    axis: &'static str,
    config_echo: BTreeMap<String, String>,
    config: SweepConfig,
    parameter_order: [&'static str; 2],
    units: BTreeMap<&'static str, &'static str>,
    grid: BTreeMap<&'static str, String>,
    format: &'static str,
    columns: Vec<&'static str>,
    files: Vec<FileEntry>,
    skipped: Vec<String>,
    flagged: Vec<String>,
    timing_file: &'static str,
}

#[derive(Serialize)]
struct Timing {
    wall_seconds: f64,
    threads: usize,
    finished_unix: u64,
}

fn units() -> BTreeMap<&'static str, &'static str> {
    BTreeMap::from([
        ("phi", "radians"),
        ("Delta", "radians (standard deviation of the diffusing phase)"),
        ("eta_a, eta_b", "transmissivity, dimensionless"),
        ("FC_*, FQ_*", "per single shot, parameter order (phi, Delta)"),
        ("Upsilon", "dimensionless, Tr(F_Q^-1 F_C)"),
        ("Sigma2", "rad^2, sum of quantum Cramer-Rao variances"),
        ("HCR", "rad^2, Holevo bound with unit cost"),
        ("Delta_cutoff", "radians, family tables only; empty when never within tolerance"),
    ])
}

fn sweep(opts: &Options) -> Result<ExitCode> {
    let started = Instant::now();
    let s = opts.settings()?;
    s.restrict("sweep", SWEEP_KEYS)?;
    let axis = match s.raw("axis").unwrap_or("delta") {
        "delta" => Axis::Delta,
        "photons" => Axis::Photons,
        "family" => Axis::Family,
        other => bail!("axis `{other}`: expected delta, photons or family"),
    };
    let format: Format = s.get("format")?.unwrap_or(Format::Csv);
    let out = PathBuf::from(s.raw("out").ok_or_else(|| anyhow!("--out DIR is required"))?);

    let mut config = SweepConfig::default();
    if let Some(phi) = s.get("phi")? {
        config.phi = phi;
    }
    if s.raw("eta").is_some() || s.raw("eta-a").is_some() || s.raw("eta-b").is_some() {
        config.etas = etas(&s)?;
    }
    if let Some(f) = families(&s)? {
        config.families = f;
    }
    if let Some(p) = s.ranges("photons")? {
        config.photons = p;
    } else if axis == Axis::Photons {
        config.photons = (1..=14).collect();
    }
    if let Some(tol) = s.get("tol")? {
        config.cutoff_tol = tol;
    }
    config.grid = grid(&s)?;
    let delta_list: Option<Vec<f64>> = s.list("delta")?;
    let delta_range = s.delta_range()?;
    match axis {
        Axis::Photons => {
            if delta_range.is_some() {
                bail!("--delta-range is not used by the photons axis; pass a single --delta");
            }
            match delta_list.as_deref() {
                None => {}
                Some([d]) => config.delta_fixed = *d,
                Some(_) => bail!("the photons axis takes a single --delta"),
            }
        }
        Axis::Delta | Axis::Family => {
            if delta_list.is_some() && delta_range.is_some() {
                bail!("give either --delta or --delta-range, not both");
            }
            config.deltas = delta_list.or(delta_range).unwrap_or_else(default_delta_grid);
        }
    }
    if let Some(&n) = config.photons.iter().max() {
        warn_photon_cap(n);
    }

    let tables = match axis {
        Axis::Delta => sweep_delta(&config)?,
        Axis::Photons => sweep_photon_number(&config)?,
        Axis::Family => sweep_family(&config)?,
    };

    std::fs::create_dir_all(&out).with_context(|| format!("cannot create {}", out.display()))?;
    let with_cutoff = axis == Axis::Family;
    let ext = format.extension();
    let mut files = Vec::new();
    let mut skipped = Vec::new();
    let mut flagged = Vec::new();
    for table in &tables {
        let panels: &[&'static str] = match axis {
            Axis::Family => &["upsilon"],
            _ => &["upsilon", "sigma2"],
        };
        for &panel in panels {
            let file = match axis {
                Axis::Family => format!("{}.{ext}", table.name),
                _ => {
                    let (prefix, eta) = table.name.split_once('_').unwrap_or((&table.name, ""));
                    format!("{prefix}_{panel}_{eta}.{ext}")
                }
            };
            output::write_table(&out.join(&file), table, &table.rows, format, with_cutoff, &config)?;
            files.push(FileEntry { file, table: table.name.clone(), panel, rows: table.rows.len() });
        }
        skipped.extend(table.skipped.iter().map(|m| format!("{}: {m}", table.name)));
        for r in table.rows.iter().filter(|r| !r.flags.is_empty()) {
            flagged.push(format!(
                "{}: {} Delta={} eta=({},{}): {}",
                table.name,
                r.label,
                num(r.delta),
                r.eta_a,
                r.eta_b,
                r.flags.join(";")
            ));
        }
    }
    for m in &skipped {
        eprintln!("skipped {m}");
    }

    let mut columns = output::HEADER.to_vec();
    if with_cutoff {
        columns.push(output::CUTOFF_COLUMN);
    }
    let grid_info = BTreeMap::from([
        ("rule", "composite Simpson, same nodes on both quadrature axes".to_string()),
        (
            "points_per_axis",
            config.grid.points_per_axis.unwrap_or(fockfisher::quadrature::DEFAULT_POINTS).to_string(),
        ),
        (
            "half_width",
            config
                .grid
                .half_width
                .map(num)
                .unwrap_or_else(|| "sqrt(2N+1) + 4".into()),
        ),
    ]);
    let manifest = Manifest {
        engine: "fockfisher",
        version: env!("CARGO_PKG_VERSION"),
        command: "sweep",
        axis: axis.name(),
        config_echo: s.echo(),
        config,
        parameter_order: fockfisher::PARAMETER_ORDER,
        units: units(),
        grid: grid_info,
        format: ext,
        columns,
        files,
        skipped,
        flagged,
        timing_file: "timing.json",
    };
    let text = serde_json::to_string_pretty(&manifest)? + "\n";
    std::fs::write(out.join("manifest.json"), text)?;
    let timing = Timing {
        wall_seconds: started.elapsed().as_secs_f64(),
        threads: rayon::current_num_threads(),
        finished_unix: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
    };
    std::fs::write(out.join("timing.json"), serde_json::to_string_pretty(&timing)? + "\n")?;
    println!("wrote {} tables to {}", manifest.files.len(), out.display());
    Ok(ExitCode::SUCCESS)
}

fn validate(opts: &Options) -> Result<ExitCode> {
    let s = opts.settings()?;
    s.restrict("validate", VALIDATE_KEYS)?;
    let checks = run_suite(&SuiteOptions { grid: grid(&s)? });
    let mut failed = 0;
    for c in &checks {
        println!("[{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        failed += usize::from(!c.passed);
    }
    println!("{} checks, {failed} failed", checks.len());
    Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var("FOCKFISHER_THREADS") {
        let n: usize = v.trim().parse().map_err(|_| anyhow!("FOCKFISHER_THREADS: expected a positive integer, got `{v}`"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = init_threads().and_then(|()| match &cli.command {
        Command::Single(o) => single(o),
        Command::Sweep(o) => sweep(o),
        Command::Validate(o) => validate(o),
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
