use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use super::config::{ExperimentConfig, ExperimentKind};
use super::experiments::{
    drive, kernel_table, perimeter_growth_report, rearrange_suite, rectangle_patch,
    stability_report, steady_report, ExperimentReport, KernelRow, Prefix, RectangleRun,
};
use super::records::{
    read_series_csv, read_tracks_csv, series_row, track_row, DiagRecord, TrackRecord,
    SERIES_HEADER, TRACKS_HEADER,
};
use crate::dynamics::read_latest_checkpoint;
use crate::error::{Error, Result};
use crate::patchgeom::{make_strip, Patch};

pub const EXIT_OK: i32 = 0;
/// A criterion failed or the run aborted.
pub const EXIT_FAIL: i32 = 1;
/// Bad usage or configuration.
pub const EXIT_USAGE: i32 = 2;
/// Overrides the output directory of every subcommand.
pub const OUT_ENV: &str = "CYLPATCH_OUT";

#[derive(Parser, Debug)]
#[command(
    name = "cylpatch",
    version,
    about = "Vortex patch experiments on the half cylinder"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the steady strip and compare it with the closed-form profile.
    SteadyCheck(RunArgs),
    /// J1 stability of the slit rectangle.
    Stability(RectArgs),
    /// Linear perimeter growth of the slit rectangle.
    PerimeterGrowth(RectArgs),
    /// Property checks of the rearrangement inequalities.
    RearrangeTest(RearrangeArgs),
    /// Spot values and identities of the kernel.
    KernelTable(CommonArgs),
    /// Continue an interrupted run from its latest checkpoint.
    Resume {
        /// Output directory of the interrupted run.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args, Debug)]
struct CommonArgs {
    /// Sectioned `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    dt: Option<f64>,
    /// Final time.
    #[arg(long = "T")]
    t_end: Option<f64>,
    #[arg(long)]
    dmax: Option<f64>,
    #[arg(long)]
    dmin: Option<f64>,
    #[arg(long)]
    nodes0: Option<usize>,
    #[arg(long)]
    raster_res: Option<usize>,
    #[arg(long)]
    output_every: Option<u64>,
}

#[derive(Args, Debug)]
struct RectArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Slit half-width.
    #[arg(long)]
    h: Option<f64>,
    /// Corner radius, `h / 2.5` by default.
    #[arg(long)]
    r: Option<f64>,
}

#[derive(Args, Debug)]
struct RearrangeArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    cases: Option<usize>,
}

fn base_config(kind: ExperimentKind, common: &CommonArgs) -> Result<ExperimentConfig> {
    match &common.config {
        Some(path) => ExperimentConfig::load(path, Some(kind)),
        None => Ok(ExperimentConfig::new(kind)),
    }
}

fn apply_run(cfg: &mut ExperimentConfig, a: &RunArgs) {
    let r = &mut cfg.run;
    r.dt = a.dt.or(r.dt);
    r.t_end = a.t_end.or(r.t_end);
    r.dmax = a.dmax.or(r.dmax);
    r.dmin = a.dmin.or(r.dmin);
    r.nodes0 = a.nodes0.or(r.nodes0);
    r.raster_res = a.raster_res.or(r.raster_res);
    r.output_every = a.output_every.or(r.output_every);
}

/// Flag, then environment, then config file, then `cylpatch-out/<kind>`.
fn resolve_out(flag: Option<&Path>, cfg: &ExperimentConfig) -> PathBuf {
    if let Some(p) = flag {
        return p.to_path_buf();
    }
    if let Some(p) = std::env::var_os(OUT_ENV).filter(|v| !v.is_empty()) {
        return PathBuf::from(p);
    }
    cfg.run
        .out_dir
        .clone()
        .unwrap_or_else(|| Path::new("cylpatch-out").join(cfg.kind.name()))
}

fn build(command: Command) -> Result<(ExperimentConfig, Option<Prefix>)> {
    let (mut cfg, out) = match &command {
        Command::SteadyCheck(a) => {
            let mut cfg = base_config(ExperimentKind::SteadyCheck, &a.common)?;
            apply_run(&mut cfg, a);
            (cfg, a.common.out.clone())
        }
        Command::Stability(a) | Command::PerimeterGrowth(a) => {
            let kind = match command {
                Command::Stability(_) => ExperimentKind::Stability,
                _ => ExperimentKind::PerimeterGrowth,
            };
            let mut cfg = base_config(kind, &a.run.common)?;
            apply_run(&mut cfg, &a.run);
            if let Some(h) = a.h {
                cfg.experiment.h = h;
            }
            cfg.experiment.r = a.r.or(cfg.experiment.r);
            (cfg, a.run.common.out.clone())
        }
        Command::RearrangeTest(a) => {
            let mut cfg = base_config(ExperimentKind::RearrangeTest, &a.common)?;
            cfg.rearrange.seed = a.seed.unwrap_or(cfg.rearrange.seed);
            cfg.rearrange.cases = a.cases.unwrap_or(cfg.rearrange.cases);
            (cfg, a.common.out.clone())
        }
        Command::KernelTable(a) => (base_config(ExperimentKind::KernelTable, a)?, a.out.clone()),
        Command::Resume { out } => {
            let mut cfg = ExperimentConfig::load(&out.join("config.echo"), None)?;
            if !cfg.kind.is_run() {
                return Err(Error::Config(format!(
                    "`{}` has nothing to resume",
                    cfg.kind.name()
                )));
            }
            cfg.run.out_dir = Some(out.clone());
            let prefix = load_prefix(&cfg, out)?;
            return Ok((cfg, Some(prefix)));
        }
    };
    cfg.run.out_dir = Some(resolve_out(out.as_deref(), &cfg));
    Ok((cfg, None))
}

fn initial_patch(cfg: &ExperimentConfig) -> Result<Patch> {
    match cfg.kind {
        ExperimentKind::SteadyCheck => make_strip(cfg.run_config()?.nodes0),
        _ => rectangle_patch(cfg),
    }
}

fn load_prefix(cfg: &ExperimentConfig, out: &Path) -> Result<Prefix> {
    let run = cfg.run_config()?;
    let (state, meta) = read_latest_checkpoint(out)?
        .ok_or_else(|| Error::Config(format!("no checkpoint in {}", out.display())))?;
    let expected = run.hash(run.spacing(&initial_patch(cfg)?));
    if meta.cfg_hash != expected {
        return Err(Error::Config(
            "checkpoint was written with a different configuration".into(),
        ));
    }
    let series = read_series_csv(&out.join("series.csv")).unwrap_or_default();
    let tracks = read_tracks_csv(&out.join("tracks.csv")).unwrap_or_default();
    Ok(Prefix {
        state,
        series,
        tracks,
    })
}

/// Appends records to `series.csv` and `tracks.csv` as they arrive, so an
/// interrupted run leaves a usable prefix.
struct Sink {
    series: std::fs::File,
    tracks: std::fs::File,
    series_path: PathBuf,
    tracks_path: PathBuf,
}

impl Sink {
    fn create(
        dir: &Path,
        series: &[DiagRecord],
        tracks: &[TrackRecord],
        t0: f64,
        half: f64,
    ) -> Result<Self> {
        let series_path = dir.join("series.csv");
        let tracks_path = dir.join("tracks.csv");
        let mut s = String::from(SERIES_HEADER);
        s.push('\n');
        let mut k = String::from(TRACKS_HEADER);
        k.push('\n');
        let mut sink = Self {
            series: create_file(&series_path)?,
            tracks: create_file(&tracks_path)?,
            series_path,
            tracks_path,
        };
        for r in series.iter().filter(|r| r.t < t0 - half) {
            s.push_str(&series_row(r));
        }
        for r in tracks.iter().filter(|r| r.t < t0 - half) {
            k.push_str(&track_row(r));
        }
        sink.write(&s, &k)?;
        Ok(sink)
    }

    fn write(&mut self, s: &str, k: &str) -> Result<()> {
        self.series
            .write_all(s.as_bytes())
            .map_err(|e| Error::io(&self.series_path, e))?;
        self.tracks
            .write_all(k.as_bytes())
            .map_err(|e| Error::io(&self.tracks_path, e))
    }
}

fn create_file(path: &Path) -> Result<std::fs::File> {
    std::fs::File::create(path).map_err(|e| Error::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn kernel_csv(rows: &[KernelRow]) -> String {
    let mut out = String::from("dx1,dx2,gamma_s,ks1,ks2\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{:.11e},{:.11e},{:.11e},{:.11e},{:.11e}",
            r.dx1, r.dx2, r.gamma_s, r.ks1, r.ks2
        );
    }
    out
}

fn execute(cfg: &ExperimentConfig, prefix: Option<Prefix>) -> Result<ExperimentReport> {
    let out = cfg.run.out_dir.clone().expect("output directory resolved");
    std::fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
    if prefix.is_none() {
        write_text(&out.join("config.echo"), &cfg.to_toml())?;
    }
    let report = match cfg.kind {
        ExperimentKind::RearrangeTest => rearrange_suite(cfg)?,
        ExperimentKind::KernelTable => {
            let (report, rows) = kernel_table(cfg)?;
            write_text(&out.join("kernel_table.csv"), &kernel_csv(&rows))?;
            report
        }
        kind => {
            let run_cfg = cfg.run_config()?;
            let initial = initial_patch(cfg)?;
            let half = 0.5 * run_cfg.dt;
            let (series, tracks, t0) = match &prefix {
                Some(p) => (p.series.as_slice(), p.tracks.as_slice(), p.state.t),
                None => (&[][..], &[][..], 0.0),
            };
            let mut sink = Sink::create(&out, series, tracks, t0, half)?;
            let run: RectangleRun = drive(&run_cfg, initial.clone(), prefix, &mut |r, t| {
                sink.write(&series_row(r), &track_row(t))
            })?;
            match kind {
                ExperimentKind::SteadyCheck => steady_report(cfg, &initial, &run)?,
                ExperimentKind::Stability => stability_report(cfg, &run),
                _ => perimeter_growth_report(cfg, &run),
            }
        }
    };
    write_text(
        &out.join("report.json"),
        &serde_json::to_string_pretty(&report)?,
    )?;
    Ok(report)
}

fn summary(report: &ExperimentReport) -> String {
    let mut out = String::new();
    for c in &report.checks {
        let _ = writeln!(
            out,
            "{} {} = {:.6e} ({} {:.6e})",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.relation,
            c.threshold
        );
    }
    for (k, v) in &report.constants {
        let _ = writeln!(out, "     {k} = {v:.6e}");
    }
    if let Some(reason) = &report.aborted {
        let _ = writeln!(out, "aborted: {reason}");
    }
    let _ = writeln!(
        out,
        "{}: {}",
        report.experiment,
        if report.pass { "pass" } else { "fail" }
    );
    out
}

/// Runs the command line `args` (program name first) and returns the exit
/// status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let outcome = build(cli.command).and_then(|(cfg, prefix)| execute(&cfg, prefix));
    match outcome {
        Ok(report) => {
            print!("{}", summary(&report));
            if report.pass {
                EXIT_OK
            } else {
                EXIT_FAIL
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numerical() {
                EXIT_FAIL
            } else {
                EXIT_USAGE
            }
        }
    }
}
