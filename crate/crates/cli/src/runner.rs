//! Sweep orchestration with a content-addressed cache and a resumable
//! per-cell ledger.
//!
//! Every cell is a pure function of the resolved config and its index. The
//! formatted CSV rows of a finished cell go to `<command>.ledger.jsonl`, so
//! resumed runs and fresh runs emit the same bytes.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use bimodal_core::dynamics::{coherent_state, loschmidt_echo, EchoOptions, HamiltonianSpec, HilbertSpace};
use bimodal_core::effective::{analyze_drive, DetuningConvention, DriveParams, SystemParams, ValidityReport};
use bimodal_core::spectrum::{driven_phase_point, ground_search, BlockParams, GridCell, PhasePoint};
use bimodal_core::sweep::{resolve_point, AxisQuantity};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Command, ResolvedRun, Workers};
use crate::error::{runtime, CliError};
use crate::output::{self, echo_records, effective_record, grid_record};

/// Norm drift above this is reported for echo runs.
pub const NORM_DRIFT_LIMIT: f64 = 1e-8;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    /// Overrides the config's `workers`.
    pub workers: Option<usize>,
    pub strict: bool,
    /// Stop after this many cells were computed in this call, as if the
    /// process had been killed.
    pub stop_after: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub command: Command,
    pub config_hash: String,
    pub cache_hit: bool,
    pub interrupted: bool,
    pub cells_total: usize,
    pub cells_computed: usize,
    pub files: Vec<PathBuf>,
    pub deviations: Vec<String>,
    /// Deviations that fail a strict run.
    pub violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config_hash: String,
    pub version: String,
    pub cells_total: usize,
    pub cells_done: usize,
    pub deviations: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeviationKind {
    Hierarchy,
    Rwa,
    Leakage,
    Norm,
    Window,
}

impl DeviationKind {
    const ALL: [DeviationKind; 5] = [
        DeviationKind::Hierarchy,
        DeviationKind::Rwa,
        DeviationKind::Leakage,
        DeviationKind::Norm,
        DeviationKind::Window,
    ];

    fn as_str(self) -> &'static str {
        match self {
            DeviationKind::Hierarchy => "hierarchy",
            DeviationKind::Rwa => "rwa",
            DeviationKind::Leakage => "leakage",
            DeviationKind::Norm => "norm",
            DeviationKind::Window => "window",
        }
    }

    pub fn is_violation(self) -> bool {
        !matches!(self, DeviationKind::Window)
    }
}

impl fmt::Display for DeviationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Deviation {
    kind: DeviationKind,
    message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct CellOutput {
    rows: Vec<Vec<String>>,
    deviations: Vec<Deviation>,
}

#[derive(Debug, Serialize, Deserialize)]
struct LedgerEntry {
    hash: String,
    cell: usize,
    #[serde(flatten)]
    output: CellOutput,
}

/// Whether a manifest deviation line (`kind: ...`) fails a strict run.
pub fn is_violation(line: &str) -> bool {
    let kind = line.split(':').next().unwrap_or("");
    DeviationKind::ALL.iter().any(|k| k.as_str() == kind && k.is_violation())
}

pub fn manifest_path(out_dir: &Path, command: Command) -> PathBuf {
    out_dir.join(format!("{command}.manifest.json"))
}

pub fn ledger_path(out_dir: &Path, command: Command) -> PathBuf {
    out_dir.join(format!("{command}.ledger.jsonl"))
}

/// Data files written for a run, in cell order for per-cell outputs.
pub fn output_files(run: &ResolvedRun, out_dir: &Path) -> Vec<PathBuf> {
    match run.command {
        Command::Echo if run.cells_total() > 1 => {
            (0..run.cells_total()).map(|k| out_dir.join(format!("echo_{k:05}.csv"))).collect()
        }
        c => vec![out_dir.join(format!("{c}.csv"))],
    }
}

pub fn read_manifest(path: &Path) -> Option<Manifest> {
    let text = fs::read_to_string(path).ok()?;
    serde_json::from_str(&text).ok()
}

fn write_manifest(path: &Path, m: &Manifest) -> Result<(), CliError> {
    let tmp = path.with_extension("json.tmp");
    let mut text = serde_json::to_string_pretty(m).expect("manifest serializes");
    text.push('\n');
    fs::write(&tmp, text).map_err(|e| CliError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| CliError::io(path, e))
}

/// Entries of the ledger that belong to `hash`. Lines from other configs and
/// a partially written last line are dropped, and the file is rewritten
/// without them.
fn load_ledger(path: &Path, hash: &str) -> Result<BTreeMap<usize, CellOutput>, CliError> {
    let mut done = BTreeMap::new();
    let Ok(file) = File::open(path) else {
        return Ok(done);
    };
    let mut dirty = false;
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| CliError::io(path, e))?;
        match serde_json::from_str::<LedgerEntry>(&line) {
            Ok(e) if e.hash == hash => {
                done.insert(e.cell, e.output);
            }
            _ => dirty = true,
        }
    }
    if dirty {
        let mut w = BufWriter::new(File::create(path).map_err(|e| CliError::io(path, e))?);
        for (&cell, output) in &done {
            append_entry(&mut w, hash, cell, output).map_err(|e| CliError::io(path, e))?;
        }
        w.flush().map_err(|e| CliError::io(path, e))?;
    }
    Ok(done)
}

fn append_entry<W: Write>(w: &mut W, hash: &str, cell: usize, output: &CellOutput) -> std::io::Result<()> {
    let entry = LedgerEntry { hash: hash.to_string(), cell, output: output.clone() };
    serde_json::to_writer(&mut *w, &entry)?;
    w.write_all(b"\n")
}

fn format_point(point: &[(AxisQuantity, f64)]) -> String {
    point.iter().map(|(q, v)| format!("{q}={v}")).collect::<Vec<_>>().join(", ")
}

fn deviation_line(k: usize, point: &[(AxisQuantity, f64)], d: &Deviation) -> String {
    if point.is_empty() {
        format!("{}: cell {k}: {}", d.kind, d.message)
    } else {
        format!("{}: cell {k} [{}]: {}", d.kind, format_point(point), d.message)
    }
}

fn validity_deviations(v: &ValidityReport, out: &mut Vec<Deviation>) {
    if !v.rwa_ok {
        out.push(Deviation {
            kind: DeviationKind::Rwa,
            message: format!("|gc1/Delta_n0| = {:.3e}, |gc2/Delta_m0| = {:.3e}", v.ratios.gc1, v.ratios.gc2),
        });
    }
    if !v.hierarchy_ok {
        let worst = v.ratios.named().take(6).fold(("", 0.0), |a, b| if b.1 > a.1 { b } else { a });
        out.push(Deviation {
            kind: DeviationKind::Hierarchy,
            message: format!("{} = {:.3e}", worst.0, worst.1),
        });
    }
}

fn window_deviation(p: &PhasePoint, window: u32, out: &mut Vec<Deviation>) {
    if p.on_window_edge(window) {
        out.push(Deviation {
            kind: DeviationKind::Window,
            message: format!("ground block ({},{}) on the window edge {window}", p.label.0, p.label.1),
        });
    }
}

fn compute_cell(run: &ResolvedRun, k: usize) -> Result<CellOutput, CliError> {
    let point = run.cell_point(k);
    let (sys, drive) = resolve_point(&run.sys, run.drive.as_ref(), &point).map_err(runtime)?;
    let convention = DetuningConvention::from(run.config.convention);
    let window = run.block_window();
    let axis = |i: usize| (run.axes[i].name.as_str(), point[i].1);
    let mut deviations = Vec::new();
    let rows = match run.command {
        Command::StaticPhase => {
            let p = ground_search(&BlockParams::from(&sys), window).map_err(runtime)?;
            window_deviation(&p, window, &mut deviations);
            let cell = GridCell { point: p, window_capped: false, validity: None };
            vec![grid_record(axis(0), axis(1), &cell)]
        }
        Command::DrivenPhase => {
            let drive = drive.expect("driven commands carry a drive");
            let d = driven_phase_point(&sys, &drive, window, convention).map_err(runtime)?;
            if d.window_capped {
                deviations.push(Deviation {
                    kind: DeviationKind::Window,
                    message: format!(
                        "effective cavity frequency not positive (Omega1_eff = {:.3e}, Omega2_eff = {:.3e})",
                        d.effective.cavity1, d.effective.cavity2
                    ),
                });
            } else {
                window_deviation(&d.point, window, &mut deviations);
            }
            validity_deviations(&d.validity, &mut deviations);
            let cell = GridCell { point: d.point, window_capped: d.window_capped, validity: Some(d.validity) };
            vec![grid_record(axis(0), axis(1), &cell)]
        }
        Command::EffectiveParams => {
            let drive = drive.expect("driven commands carry a drive");
            let a = analyze_drive(&sys, &drive, convention).map_err(runtime)?;
            validity_deviations(&a.validity, &mut deviations);
            vec![effective_record(&drive, &a)]
        }
        Command::Echo => {
            let drive = drive.expect("driven commands carry a drive");
            echo_cell(run, &sys, &drive, convention, &mut deviations)?
        }
    };
    Ok(CellOutput { rows, deviations })
}

fn echo_cell(
    run: &ResolvedRun,
    sys: &SystemParams,
    drive: &DriveParams,
    convention: DetuningConvention,
    deviations: &mut Vec<Deviation>,
) -> Result<Vec<Vec<String>>, CliError> {
    let cfg = &run.config;
    let dynamics = &cfg.dynamics;
    let (va, vb) = dynamics.variants()?;
    let spec = |v| {
        let mut s = HamiltonianSpec::driven(v, *sys, *drive);
        s.sideband_eps = cfg.truncation.sideband_eps;
        s.convention = convention;
        s
    };
    let space = HilbertSpace::new(cfg.truncation.n_c1, cfg.truncation.n_c2).map_err(runtime)?;
    let psi = coherent_state(
        space,
        Complex64::new(dynamics.alpha1, 0.0),
        Complex64::new(dynamics.alpha2, 0.0),
        dynamics.atom()?,
    )
    .map_err(runtime)?;
    let opts = EchoOptions { t_max: dynamics.t_max, samples: dynamics.samples, dt_max: dynamics.dt_max };
    let echo = loschmidt_echo(&spec(va), &spec(vb), &space, &psi, &opts).map_err(runtime)?;

    let a = analyze_drive(sys, drive, convention).map_err(runtime)?;
    validity_deviations(&a.validity, deviations);
    for w in &echo.warnings {
        deviations.push(Deviation { kind: DeviationKind::Leakage, message: w.clone() });
    }
    if echo.norm_drift > NORM_DRIFT_LIMIT {
        deviations.push(Deviation {
            kind: DeviationKind::Norm,
            message: format!("norm drift {:.3e} above {NORM_DRIFT_LIMIT:e}", echo.norm_drift),
        });
    }
    Ok(echo_records(&echo))
}

fn thread_pool(run: &ResolvedRun, opts: &RunOptions) -> Result<rayon::ThreadPool, CliError> {
    let n = match (opts.workers, run.config.workers) {
        (Some(n), _) => n,
        (None, Workers::Count(n)) => n,
        (None, Workers::Auto) => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map_err(|e| CliError::Runtime(format!("cannot start worker pool: {e}")))
}

fn manifest_for(run: &ResolvedRun, done: &BTreeMap<usize, CellOutput>) -> Manifest {
    let deviations = done
        .iter()
        .flat_map(|(&k, out)| {
            let point = run.cell_point(k);
            out.deviations.iter().map(move |d| deviation_line(k, &point, d)).collect::<Vec<_>>()
        })
        .collect();
    Manifest {
        config_hash: run.hash.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        cells_total: run.cells_total(),
        cells_done: done.len(),
        deviations,
    }
}

fn write_outputs(run: &ResolvedRun, done: &BTreeMap<usize, CellOutput>, files: &[PathBuf]) -> Result<(), CliError> {
    match run.command {
        Command::StaticPhase | Command::DrivenPhase => {
            let rows: Vec<_> = done.values().flat_map(|o| o.rows.iter().cloned()).collect();
            output::write_csv(&files[0], &output::GRID_HEADER, &rows)
        }
        Command::EffectiveParams => {
            let rows: Vec<_> = done.values().flat_map(|o| o.rows.iter().cloned()).collect();
            output::write_csv(&files[0], &output::EFFECTIVE_HEADER, &rows)
        }
        Command::Echo => {
            for (out, path) in done.values().zip(files) {
                output::write_csv(path, &output::ECHO_HEADER, &out.rows)?;
            }
            Ok(())
        }
    }
}

fn summary(run: &ResolvedRun, manifest: &Manifest, files: Vec<PathBuf>, cache_hit: bool, computed: usize) -> RunSummary {
    RunSummary {
        command: run.command,
        config_hash: run.hash.clone(),
        cache_hit,
        interrupted: manifest.cells_done < manifest.cells_total,
        cells_total: manifest.cells_total,
        cells_computed: computed,
        files,
        violations: manifest.deviations.iter().filter(|d| is_violation(d)).count(),
        deviations: manifest.deviations.clone(),
    }
}

/// Runs one command. A strict run with validity violations still writes its
/// outputs and then fails with a runtime error.
pub fn run(run: &ResolvedRun, opts: &RunOptions) -> Result<RunSummary, CliError> {
    let out_dir = &opts.out_dir;
    fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    let files = output_files(run, out_dir);
    let manifest_file = manifest_path(out_dir, run.command);
    let total = run.cells_total();

    if let Some(m) = read_manifest(&manifest_file) {
        let complete = m.config_hash == run.hash && m.cells_done == total && m.cells_total == total;
        if complete && files.iter().all(|f| f.exists()) {
            let s = summary(run, &m, files, true, 0);
            return strict_check(s, opts);
        }
    }

    let ledger_file = ledger_path(out_dir, run.command);
    let mut done = load_ledger(&ledger_file, &run.hash)?;
    let pending: Vec<usize> = (0..total).filter(|k| !done.contains_key(k)).collect();
    let pool = thread_pool(run, opts)?;
    let chunk = match run.command {
        Command::Echo => pool.current_num_threads(),
        _ => 16 * pool.current_num_threads(),
    }
    .max(1);

    let ledger = OpenOptions::new()
        .create(true)
        .append(true)
        .open(&ledger_file)
        .map_err(|e| CliError::io(&ledger_file, e))?;
    let mut ledger = BufWriter::new(ledger);
    let mut computed = 0;
    let mut rest = pending.as_slice();
    while !rest.is_empty() {
        let budget = opts.stop_after.map_or(chunk, |n| chunk.min(n.saturating_sub(computed)));
        if budget == 0 {
            let m = manifest_for(run, &done);
            write_manifest(&manifest_file, &m)?;
            return Ok(summary(run, &m, files, false, computed));
        }
        let (cells, tail) = rest.split_at(budget.min(rest.len()));
        rest = tail;
        let results: Vec<_> = pool.install(|| cells.par_iter().map(|&k| compute_cell(run, k)).collect());
        for (&k, r) in cells.iter().zip(results) {
            let out = r?;
            append_entry(&mut ledger, &run.hash, k, &out).map_err(|e| CliError::io(&ledger_file, e))?;
            done.insert(k, out);
        }
        ledger.flush().map_err(|e| CliError::io(&ledger_file, e))?;
        computed += cells.len();
    }
    drop(ledger);

    write_outputs(run, &done, &files)?;
    let m = manifest_for(run, &done);
    write_manifest(&manifest_file, &m)?;
    strict_check(summary(run, &m, files, false, computed), opts)
}

fn strict_check(s: RunSummary, opts: &RunOptions) -> Result<RunSummary, CliError> {
    if opts.strict && s.violations > 0 {
        let first = s.deviations.iter().find(|d| is_violation(d)).cloned().unwrap_or_default();
        return Err(CliError::Runtime(format!(
            "strict mode: {} validity violation(s), first: {first}",
            s.violations
        )));
    }
    Ok(s)
}
