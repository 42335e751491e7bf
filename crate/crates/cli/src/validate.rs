//! Invariant suite behind the `validate` subcommand.

use polariton::dynamics::{phase_cycle_extract, PhaseCycle};
use polariton::hilbert::{max_abs, number_operator, CVector, C64};
use polariton::protocol::{signal_point, ModelContext};
use polariton::states::{atomic_insulator, phonon_superfluid};
use polariton::{coherence_decay_rate, Execution, ModelParams};
use serde::Serialize;

use crate::commands::run_spectrum;
use crate::config::RunConfig;
use crate::error::CliResult;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    /// Passes when `measured < tolerance`.
    fn below(name: &str, measured: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        Self { name: name.into(), measured, tolerance, passed: measured < tolerance, detail: detail.into() }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub passed: bool,
    pub checks: Vec<Check>,
}

fn relative(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        a.abs()
    } else {
        (a - b).abs() / b.abs()
    }
}

pub fn run_suite(config: &RunConfig, exec: Execution) -> CliResult<ValidationReport> {
    let mut checks = Vec::new();
    let spec = config.basis.spec();
    let ctx = ModelContext::new(&config.model, spec)?;
    let n = spec.n_ions;

    // operator algebra
    let h = &ctx.hamiltonian;
    checks.push(Check::below("hamiltonian_hermitian", h.hermiticity_error(), 1e-12, "max |H - H^dagger|"));
    let nop = number_operator(&ctx.basis);
    let comm = h.commutator(&nop)?.max_norm();
    checks.push(Check::below("excitation_conservation", comm, 1e-12, "max |[H, N]|"));

    // kick algebra: A^N |phSF> lands on |atI>
    let sf = phonon_superfluid(&ctx.basis, &ctx.network)?;
    let ati = atomic_insulator(&ctx.basis)?;
    let kicked: CVector = ctx.left.power() * sf.amplitudes();
    let weight = kicked.norm();
    let overlap = ati.amplitudes().dotc(&kicked);
    checks.push(Check::below(
        "kick_targets_atomic_insulator",
        (1.0 - overlap.norm() / weight).abs(),
        1e-12,
        format!("<atI|A^N|phSF> = {overlap}"),
    ));
    if n == 2 {
        let dev = (kicked - ati.amplitudes() * C64::new(-2f64.sqrt(), 0.0)).iter().map(|z| z.norm()).fold(0.0, f64::max);
        checks.push(Check::below("kick_amplitude_n2", dev, 1e-12, "componentwise |A^2 phSF + sqrt2 atI|"));
    }
    let mut worst = 0.0f64;
    for j in 1..=n {
        let s = signal_point(&ctx, 0.0, 0.0, 0.0, j)?;
        worst = worst.max((s - C64::new(weight * weight, 0.0)).norm());
    }
    checks.push(Check::below("origin_signal", worst, 1e-10, format!("S(0,0,0;j) = |A^N phSF|^2 = {}", weight * weight)));

    // dephasing scaling in the decoupled limit
    let free = ModelParams { g: 0.0, ..config.model.clone() };
    let fctx = ModelContext::new(&free, spec)?;
    let fsf = phonon_superfluid(&fctx.basis, &fctx.network)?;
    let fati = atomic_insulator(&fctx.basis)?;
    let one = fctx.excitation.matrix() * fsf.amplitudes();
    let one = &one / C64::new(one.norm(), 0.0);
    let gamma = free.gamma_ang();
    for (name, ket, order) in [("dephasing_full_difference", fati.amplitudes().clone(), n), ("dephasing_single_difference", one, 1)] {
        let expected = (order * order) as f64 * gamma;
        let span = if expected > 0.0 { 2.0 / expected } else { 1.0 };
        let rate = coherence_decay_rate(&fctx.liouvillian, &ket, fsf.amplitudes(), span, 41)?;
        let (measured, tol) = if expected > 0.0 { (relative(rate, expected), 0.01) } else { (rate.abs(), 1e-9) };
        checks.push(Check::below(name, measured, tol, format!("fitted {rate}, expected {order}^2 gamma = {expected}")));
    }

    // phase cycling against the direct pathway
    let cycle = PhaseCycle { excitations: n, epsilon: 1e-2, points: (2 * n + 2).max(8) };
    let t2 = 0.05;
    let extracted = phase_cycle_extract(&ctx.liouvillian, &ctx.rho0, &ctx.excitation, &cycle, t2, exec)?;
    let direct = ctx.right.apply(&ctx.liouvillian.evolve(&ctx.left.apply(ctx.rho0.matrix()), t2)?);
    let err = max_abs(&(extracted.matrix() - &direct)) / max_abs(&direct);
    checks.push(Check::below("phase_cycling", err, 1e-3, format!("eps 1e-2, {} phase points", cycle.points)));

    // Parseval and health on a reduced scan
    let which = config.spectrum.transform;
    let mut small = config.clone();
    small.sequence.count = config.sequence.count.min(64);
    small.spectrum.window = None;
    let run = run_spectrum(&small, which, None, exec)?;
    checks.push(Check::below("parseval", run.parseval, 1e-6, "relative spectral vs time-domain power"));
    let mut health = run.signal.grid.health;

    // stick oracle against the FFT with dissipation off
    let mut clean = config.clone();
    clean.model.gamma = 0.0;
    let run = run_spectrum(&clean, which, None, exec)?;
    let strong: Vec<_> = run.report.iter().filter(|r| r.peak.magnitude >= 0.1 * run.report[0].peak.magnitude).collect();
    let far = strong.iter().map(|r| r.distance_bins.unwrap_or(f64::INFINITY)).fold(0.0, f64::max);
    checks.push(Check {
        name: "stick_agreement".into(),
        measured: far,
        tolerance: 2.0,
        passed: far <= 2.0,
        detail: format!("{} peaks above 10% at gamma = 0; largest distance to a stick in resolution bins", strong.len()),
    });
    health.merge(&run.signal.grid.health);
    checks.push(Check::below(
        "propagator_health",
        health.max_trace_drift.max(health.max_hermiticity_drift).max(-health.min_eigenvalue),
        1e-9,
        format!("{} propagated states checked", health.checks),
    ));

    let passed = checks.iter().all(|c| c.passed);
    Ok(ValidationReport { passed, checks })
}
