//! Run configuration. All frequencies are linear kHz, all times ms.

use std::path::{Path, PathBuf};

use polariton::protocol::{SequenceConfig, TimeAxis};
use polariton::spectra::{FourierOptions, Transform};
use polariton::{BasisSpec, ModelParams};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

const FIG3: &str = include_str!("../presets/fig3.toml");
const FIG4: &str = include_str!("../presets/fig4.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BasisOptions {
    pub n_ions: usize,
    /// Phonon cutoff per site.
    pub n_max: usize,
    /// Restrict to the filling-one sector (total excitations = `n_ions`).
    pub sector: bool,
}

impl Default for BasisOptions {
    fn default() -> Self {
        Self { n_ions: 2, n_max: 2, sector: true }
    }
}

impl BasisOptions {
    pub fn spec(&self) -> BasisSpec {
        BasisSpec {
            n_ions: self.n_ions,
            phonon_cutoff: self.n_max,
            sector: self.sector.then_some(self.n_ions),
        }
    }
}

/// Both scanned delays share one uniform grid; the remaining delay is held
/// at its fixed value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SequenceOptions {
    pub start: f64,
    pub step: f64,
    pub count: usize,
    /// Fixed `t1` for S23 scans.
    pub t1: f64,
    /// Fixed `t2` for S13 scans.
    pub t2: f64,
    pub readout_ion: usize,
    /// Keep a resumable row log in the output directory.
    pub checkpoint: bool,
}

impl Default for SequenceOptions {
    fn default() -> Self {
        Self { start: 0.0, step: 0.004, count: 640, t1: 0.0, t2: 0.0, readout_ion: 1, checkpoint: false }
    }
}

impl SequenceOptions {
    pub fn to_sequence(&self, which: Transform) -> SequenceConfig {
        let grid = TimeAxis::Grid { start: self.start, step: self.step, count: self.count };
        match which {
            Transform::S23 => SequenceConfig { t1: TimeAxis::Fixed(self.t1), t2: grid, t3: grid, readout_ion: self.readout_ion },
            Transform::S13 => SequenceConfig { t1: grid, t2: TimeAxis::Fixed(self.t2), t3: grid, readout_ion: self.readout_ion },
        }
    }

    pub fn fixed_delay(&self, which: Transform) -> f64 {
        match which {
            Transform::S23 => self.t1,
            Transform::S13 => self.t2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumOptions {
    pub transform: Transform,
    pub pad: usize,
    /// Exponential window rate in 1/ms; absent means no apodization.
    pub window: Option<f64>,
    pub threshold: f64,
    pub heatmap: bool,
    /// Keep every `export_stride`-th frequency sample in the spectrum CSV
    /// and heatmap; defaults to the padding factor.
    pub export_stride: Option<usize>,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self { transform: Transform::S23, pad: 4, window: None, threshold: 0.05, heatmap: false, export_stride: None }
    }
}

impl SpectrumOptions {
    pub fn fourier(&self) -> FourierOptions {
        FourierOptions { pad: self.pad, window: self.window }
    }

    pub fn stride(&self) -> usize {
        self.export_stride.unwrap_or(self.pad).max(1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepOptions {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self { min: -20.0, max: 20.0, points: 201 }
    }
}

impl SweepOptions {
    pub fn ratios(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.min];
        }
        let span = self.max - self.min;
        (0..self.points).map(|k| self.min + span * k as f64 / (self.points - 1) as f64).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputOptions {
    pub dir: PathBuf,
}

impl Default for OutputOptions {
    fn default() -> Self {
        Self { dir: PathBuf::from("out") }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub model: ModelParams,
    pub basis: BasisOptions,
    pub sequence: SequenceOptions,
    pub spectrum: SpectrumOptions,
    pub sweep: SweepOptions,
    pub output: OutputOptions,
}

impl RunConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn preset(name: &str) -> CliResult<Self> {
        match name {
            "fig3" => Self::parse(FIG3),
            "fig4" => Self::parse(FIG4),
            other => Err(CliError::Config(format!("unknown preset '{other}', expected fig3 or fig4"))),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Reject unusable settings before any computation; returns warnings.
    pub fn validate(&self) -> CliResult<Vec<String>> {
        let bad = |msg: String| Err(CliError::Config(msg));
        let warnings = self.model.validate().map_err(|e| CliError::Config(e.to_string()))?;
        let b = &self.basis;
        if b.n_ions == 0 {
            return bad("basis.n_ions must be at least 1".into());
        }
        let s = &self.sequence;
        if !(s.step > 0.0) || !s.step.is_finite() {
            return bad(format!("sequence.step must be positive, got {}", s.step));
        }
        if s.count == 0 {
            return bad("sequence.count must be at least 1".into());
        }
        for (name, v) in [("start", s.start), ("t1", s.t1), ("t2", s.t2)] {
            if !(v >= 0.0) || !v.is_finite() {
                return bad(format!("sequence.{name} must be a non-negative delay, got {v}"));
            }
        }
        if s.readout_ion == 0 || s.readout_ion > b.n_ions {
            return bad(format!("sequence.readout_ion must lie in 1..={}, got {}", b.n_ions, s.readout_ion));
        }
        let sp = &self.spectrum;
        if sp.pad == 0 {
            return bad("spectrum.pad must be at least 1".into());
        }
        if let Some(k) = sp.window {
            if !(k >= 0.0) || !k.is_finite() {
                return bad(format!("spectrum.window must be non-negative, got {k}"));
            }
        }
        if !(sp.threshold > 0.0 && sp.threshold <= 1.0) {
            return bad(format!("spectrum.threshold must lie in (0, 1], got {}", sp.threshold));
        }
        if sp.export_stride == Some(0) {
            return bad("spectrum.export_stride must be at least 1".into());
        }
        let w = &self.sweep;
        if w.points == 0 || !(w.min <= w.max) || (w.points > 1 && w.min == w.max) {
            return bad(format!(
                "sweep range is empty: min {}, max {}, points {}",
                w.min, w.max, w.points
            ));
        }
        Ok(warnings)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_parse_and_validate() {
        for name in ["fig3", "fig4"] {
            let c = RunConfig::preset(name).unwrap();
            c.validate().unwrap();
        }
        let f3 = RunConfig::preset("fig3").unwrap();
        assert_eq!(f3.model, ModelParams::fig3());
        assert_eq!(f3.spectrum.transform, Transform::S23);
        let f4 = RunConfig::preset("fig4").unwrap();
        assert_eq!(f4.model, ModelParams::fig4());
        assert_eq!(f4.spectrum.transform, Transform::S13);
    }

    #[test]
    fn unknown_keys_are_rejected_with_location() {
        let err = RunConfig::parse("[model]\ndelta = 50.0\nbeta = 5.0\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("beta") && msg.contains("line 3"), "{msg}");
    }

    #[test]
    fn negative_gamma_rejected() {
        let c = RunConfig::parse("[model]\ngamma = -0.1\n").unwrap();
        assert!(matches!(c.validate(), Err(CliError::Config(_))));
    }

    #[test]
    fn sweep_grid() {
        let s = SweepOptions::default();
        let r = s.ratios();
        assert_eq!(r.len(), 201);
        assert_eq!((r[0], r[100], r[200]), (-20.0, 0.0, 20.0));
        let empty = RunConfig { sweep: SweepOptions { points: 0, ..s }, ..Default::default() };
        assert!(empty.validate().is_err());
    }

    #[test]
    fn round_trips_through_toml() {
        let c = RunConfig::preset("fig4").unwrap();
        assert_eq!(RunConfig::parse(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn sequence_layout_follows_transform() {
        let s = SequenceOptions { t1: 0.1, t2: 0.2, ..Default::default() };
        let q = s.to_sequence(Transform::S13);
        assert_eq!(q.t2, TimeAxis::Fixed(0.2));
        assert!(q.t1.is_grid() && q.t3.is_grid());
        assert_eq!(s.to_sequence(Transform::S23).t1, TimeAxis::Fixed(0.1));
    }
}
