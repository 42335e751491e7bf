use std::path::{Path, PathBuf};

use polariton::model::eigensweep;
use polariton::protocol::{scan_signal, ModelContext, ScanOptions, SignalGrid};
use polariton::spectra::{
    find_peaks, fourier_2d, lineshape_report, parseval_residual, stick_spectrum, PeakAssignment,
    ResonancePrediction, Spectrum2D, Transform, ASSIGN_BINS, MERGE_BINS,
};
use polariton::{build_basis, Execution};
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::OutputDir;
use crate::validate::run_suite;

#[derive(Debug)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub summary: String,
}

pub fn cmd_eigens(config: &RunConfig, out: &Path, exec: Execution) -> CliResult<Outcome> {
    config.validate()?;
    let basis = build_basis(config.basis.spec())?;
    let ratios = config.sweep.ratios();
    let rows = eigensweep(&config.model, &basis, &ratios, exec)?;
    let dir = OutputDir::create(out)?;
    let mut files = vec![dir.write_config(config)?, dir.write_sweep(&rows)?];
    files.push(dir.write_sidecar(
        "eigens.csv",
        "eigens",
        config,
        json!({
            "points": ratios.len(),
            "eigenvalues_per_point": basis.dim(),
            "rows": rows.len(),
            "energy_units": "rad/ms",
        }),
    )?);
    Ok(Outcome { files, summary: format!("{} points x {} eigenvalues", ratios.len(), basis.dim()) })
}

/// A scanned grid ready for export.
pub struct SignalRun {
    pub context: ModelContext,
    pub grid: SignalGrid,
}

pub fn run_signal(config: &RunConfig, which: Transform, checkpoint: Option<PathBuf>, exec: Execution) -> CliResult<SignalRun> {
    config.validate()?;
    let context = ModelContext::new(&config.model, config.basis.spec())?;
    let sequence = config.sequence.to_sequence(which);
    let grid = scan_signal(&context, &sequence, &ScanOptions { exec, checkpoint })?;
    Ok(SignalRun { context, grid })
}

/// Everything the spectrum command derives from one scan.
pub struct SpectrumRun {
    pub signal: SignalRun,
    pub spectrum: Spectrum2D,
    pub sticks: Vec<ResonancePrediction>,
    pub report: Vec<PeakAssignment>,
    pub parseval: f64,
}

pub fn run_spectrum(config: &RunConfig, which: Transform, checkpoint: Option<PathBuf>, exec: Execution) -> CliResult<SpectrumRun> {
    let signal = run_signal(config, which, checkpoint, exec)?;
    let spectrum = fourier_2d(&signal.grid, which, &config.spectrum.fourier(), exec)?;
    let peaks = find_peaks(&spectrum, config.spectrum.threshold)?;
    let sticks = stick_spectrum(&signal.context, which, config.sequence.fixed_delay(which), config.sequence.readout_ion)?;
    let report = lineshape_report(&spectrum, &peaks, &sticks);
    let parseval = parseval_residual(&signal.grid, &spectrum);
    Ok(SpectrumRun { signal, spectrum, sticks, report, parseval })
}

fn checkpoint_path(config: &RunConfig, out: &Path) -> Option<PathBuf> {
    config.sequence.checkpoint.then(|| out.join("scan.checkpoint.jsonl"))
}

fn signal_meta(grid: &SignalGrid) -> Value {
    json!({
        "axis_a": grid.axis_a,
        "axis_b": grid.axis_b,
        "fixed": { "interval": grid.fixed.0, "value_ms": grid.fixed.1 },
        "readout_ion": grid.readout_ion,
        "health": grid.health,
        "failures": grid.failures,
    })
}

/// Partial-output and tolerance failures surface after the files are written.
fn grid_status(grid: &SignalGrid, dir: &OutputDir) -> CliResult<()> {
    if !grid.is_complete() {
        return Err(CliError::Partial(format!(
            "{} propagation failures; affected samples are NaN in {}",
            grid.failures.len(),
            dir.root().display()
        )));
    }
    if !grid.health.passes() {
        return Err(CliError::Tolerance(format!("propagator health check failed: {:?}", grid.health)));
    }
    Ok(())
}

pub fn cmd_signal(config: &RunConfig, out: &Path, exec: Execution) -> CliResult<Outcome> {
    let which = config.spectrum.transform;
    let dir = OutputDir::create(out)?;
    let run = run_signal(config, which, checkpoint_path(config, out), exec)?;
    let files = vec![
        dir.write_config(config)?,
        dir.write_signal(&run.grid)?,
        dir.write_sidecar("signal.csv", "signal", config, signal_meta(&run.grid))?,
    ];
    grid_status(&run.grid, &dir)?;
    Ok(Outcome { files, summary: format!("{} x {} samples", run.grid.rows(), run.grid.cols()) })
}

fn peak_table(run: &SpectrumRun) -> Value {
    let max = run.report.first().map_or(0.0, |r| r.peak.magnitude);
    let entries: Vec<Value> = run
        .report
        .iter()
        .map(|r| {
            let stick = r.prediction.map(|i| {
                let s = &run.sticks[i];
                json!({ "omega_a": s.omega_a, "omega_b": s.omega_b, "abs_amplitude": s.amplitude.norm(), "pathway": s.label() })
            });
            json!({
                "omega_a": r.peak.omega_a,
                "omega_b": r.peak.omega_b,
                "magnitude": r.peak.magnitude,
                "relative": r.peak.magnitude / max,
                "fwhm_a": r.peak.fwhm_a,
                "fwhm_b": r.peak.fwhm_b,
                "anisotropy": r.anisotropy,
                "fwhm_over_instrument_a": r.excess_a,
                "fwhm_over_instrument_b": r.excess_b,
                "matched": r.is_matched(),
                "distance_bins": r.distance_bins,
                "label": r.peak.label,
                "stick": stick,
            })
        })
        .collect();
    let top: Vec<Value> = run
        .sticks
        .iter()
        .take(32)
        .map(|s| json!({ "omega_a": s.omega_a, "omega_b": s.omega_b, "re": s.amplitude.re, "im": s.amplitude.im, "pathway": s.label() }))
        .collect();
    json!({
        "transform": run.spectrum.which,
        "units": "rad/ms",
        "merge_radius_bins": MERGE_BINS,
        "assign_radius_bins": ASSIGN_BINS,
        "resolution_a": run.spectrum.axis_a.resolution,
        "resolution_b": run.spectrum.axis_b.resolution,
        "instrument_fwhm_a": run.spectrum.axis_a.instrument_fwhm,
        "instrument_fwhm_b": run.spectrum.axis_b.instrument_fwhm,
        "unmatched": run.report.iter().filter(|r| !r.is_matched()).count(),
        "peaks": entries,
        "sticks_total": run.sticks.len(),
        "sticks_strongest": top,
    })
}

pub fn cmd_spectrum(config: &RunConfig, which: Option<Transform>, out: &Path, exec: Execution) -> CliResult<Outcome> {
    let mut config = config.clone();
    if let Some(w) = which {
        config.spectrum.transform = w;
    }
    let which = config.spectrum.transform;
    let dir = OutputDir::create(out)?;
    let run = run_spectrum(&config, which, checkpoint_path(&config, out), exec)?;
    let stride = config.spectrum.stride();
    let mut files = vec![
        dir.write_config(&config)?,
        dir.write_signal(&run.signal.grid)?,
        dir.write_sidecar("signal.csv", "signal", &config, signal_meta(&run.signal.grid))?,
        dir.write_spectrum(&run.spectrum, stride)?,
    ];
    let mut spec_meta = json!({
        "transform": which,
        "axis_a": run.spectrum.axis_a,
        "axis_b": run.spectrum.axis_b,
        "fixed": { "interval": run.spectrum.fixed.0, "value_ms": run.spectrum.fixed.1 },
        "window": run.spectrum.window,
        "export_stride": stride,
        "parseval_residual": run.parseval,
    });
    if config.spectrum.heatmap {
        let (png, meta) = dir.write_heatmap(&run.spectrum, stride)?;
        files.push(png);
        spec_meta["heatmap"] = meta;
    }
    files.push(dir.write_sidecar("spectrum.csv", &format!("spectrum {}", which.label()), &config, spec_meta)?);
    files.push(dir.write_json("peaks.json", &peak_table(&run))?);
    grid_status(&run.signal.grid, &dir)?;
    let matched = run.report.iter().filter(|r| r.is_matched()).count();
    Ok(Outcome {
        files,
        summary: format!("{} peaks, {} assigned to sticks", run.report.len(), matched),
    })
}

pub fn cmd_validate(config: &RunConfig, out: &Path, exec: Execution) -> CliResult<Outcome> {
    config.validate()?;
    let report = run_suite(config, exec)?;
    let dir = OutputDir::create(out)?;
    let files = vec![dir.write_json("validation.json", &report)?];
    let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    if !failed.is_empty() {
        return Err(CliError::Tolerance(format!("failed checks: {}", failed.join(", "))));
    }
    Ok(Outcome { files, summary: format!("{} checks passed", report.checks.len()) })
}
