//! Data files and their metadata sidecars.
//!
//! Data files carry no timestamps or host details, so identical configs
//! produce identical bytes.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use polariton::model::SweepRow;
use polariton::protocol::SignalGrid;
use polariton::spectra::Spectrum2D;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::CliResult;

pub const CONVENTIONS: &str = "inputs in linear kHz; angular = 2*pi*linear, reported in rad/ms (angular kHz); times in ms; \
     F(Wa,Wb) = sum dt_a dt_b exp(+i(Wa t_a + Wb t_b)) S, so exp(-i w t) peaks at +w";

pub struct OutputDir {
    root: PathBuf,
}

impl OutputDir {
    pub fn create(root: &Path) -> CliResult<Self> {
        fs::create_dir_all(root)?;
        Ok(Self { root: root.to_path_buf() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// The resolved config, re-runnable with `--config`.
    pub fn write_config(&self, config: &RunConfig) -> CliResult<PathBuf> {
        let p = self.path("config.resolved.toml");
        fs::write(&p, config.to_toml())?;
        Ok(p)
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> CliResult<PathBuf> {
        let p = self.path(name);
        let mut w = BufWriter::new(File::create(&p)?);
        serde_json::to_writer_pretty(&mut w, value)?;
        writeln!(w)?;
        w.flush()?;
        Ok(p)
    }

    /// Sidecar for `file` with the command, config and extra fields.
    pub fn write_sidecar(&self, file: &str, command: &str, config: &RunConfig, extra: Value) -> CliResult<PathBuf> {
        let mut meta = json!({
            "file": file,
            "tool": env!("CARGO_PKG_NAME"),
            "version": env!("CARGO_PKG_VERSION"),
            "command": command,
            "conventions": CONVENTIONS,
            "rerun": format!("polariton2d {command} --config config.resolved.toml"),
            "config": config,
        });
        if let (Value::Object(m), Value::Object(e)) = (&mut meta, extra) {
            m.extend(e);
        }
        let stem = file.rsplit_once('.').map_or(file, |(s, _)| s);
        self.write_json(&format!("{stem}.json"), &meta)
    }

    pub fn write_sweep(&self, rows: &[SweepRow]) -> CliResult<PathBuf> {
        let p = self.path("eigens.csv");
        let mut w = csv::Writer::from_path(&p)?;
        w.write_record(["delta_over_g", "eig_index", "energy_angular_khz", "spin_expectation", "spin_label", "label_confidence"])?;
        for r in rows {
            w.write_record([
                r.delta_over_g.to_string(),
                r.eig_index.to_string(),
                r.energy_angular_khz.to_string(),
                r.spin_expectation.to_string(),
                r.spin_label.to_string(),
                r.label_confidence.as_str().to_string(),
            ])?;
        }
        w.flush()?;
        Ok(p)
    }

    /// Axis identities live in the sidecar.
    pub fn write_signal(&self, grid: &SignalGrid) -> CliResult<PathBuf> {
        let p = self.path("signal.csv");
        let mut w = csv::Writer::from_path(&p)?;
        w.write_record(["t_a_ms", "t_b_ms", "re", "im"])?;
        for k in 0..grid.rows() {
            let ta = grid.axis_a.value(k).to_string();
            for l in 0..grid.cols() {
                let s = grid.get(k, l);
                w.write_record([ta.clone(), grid.axis_b.value(l).to_string(), s.re.to_string(), s.im.to_string()])?;
            }
        }
        w.flush()?;
        Ok(p)
    }

    /// Every `stride`-th sample along both axes, aligned on the zero bin.
    pub fn write_spectrum(&self, spec: &Spectrum2D, stride: usize) -> CliResult<PathBuf> {
        let p = self.path("spectrum.csv");
        let mut w = csv::Writer::from_path(&p)?;
        w.write_record(["omega_a", "omega_b", "re", "im", "abs"])?;
        for i in kept(spec.rows(), stride) {
            let oa = spec.axis_a.omega(i).to_string();
            for j in kept(spec.cols(), stride) {
                let z = spec.get(i, j);
                w.write_record([
                    oa.clone(),
                    spec.axis_b.omega(j).to_string(),
                    z.re.to_string(),
                    z.im.to_string(),
                    z.norm().to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(p)
    }

    /// 8-bit grayscale `|F| / max|F|`, rows from high `Ω_a` (top) to low.
    pub fn write_heatmap(&self, spec: &Spectrum2D, stride: usize) -> CliResult<(PathBuf, Value)> {
        let rows: Vec<usize> = kept(spec.rows(), stride).collect();
        let cols: Vec<usize> = kept(spec.cols(), stride).collect();
        let max = spec.values.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let mut img = image::GrayImage::new(cols.len() as u32, rows.len() as u32);
        for (y, &i) in rows.iter().rev().enumerate() {
            for (x, &j) in cols.iter().enumerate() {
                let v = if max > 0.0 { spec.get(i, j).norm() / max } else { 0.0 };
                img.put_pixel(x as u32, y as u32, image::Luma([(v * 255.0).round() as u8]));
            }
        }
        let p = self.path("spectrum.png");
        img.save(&p)?;
        let meta = json!({
            "width": cols.len(),
            "height": rows.len(),
            "x_axis": format!("omega_{} from {} to {} rad/ms", spec.axis_b.interval.index(), spec.axis_b.omega(cols[0]), spec.axis_b.omega(*cols.last().unwrap())),
            "y_axis": format!("omega_{} from {} (top) to {} (bottom) rad/ms", spec.axis_a.interval.index(), spec.axis_a.omega(*rows.last().unwrap()), spec.axis_a.omega(rows[0])),
            "scale": "linear |F| / max|F|",
            "max_abs": max,
        });
        Ok((p, meta))
    }
}

/// Indices `≡ n/2 (mod stride)`, so the zero-frequency bin is kept.
fn kept(n: usize, stride: usize) -> impl Iterator<Item = usize> {
    let offset = (n / 2) % stride;
    (offset..n).step_by(stride)
}
