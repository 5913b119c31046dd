//! Batch evaluation over a manifest of `(image, trimap, ground truth)` triples.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::Instant;

use lpseg_core::metrics::error_rate;
use lpseg_core::pipeline::{encode_mask, segment};
use lpseg_core::{SegParams, Sequential};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io;
use crate::report::{read_json, ParamsFile};

/// One manifest entry. Relative paths resolve against the manifest's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub image: PathBuf,
    pub trimap: PathBuf,
    pub gt: PathBuf,
    /// Parameter file (`{k, lambda}`) overriding the run-wide parameters.
    #[serde(default)]
    pub params: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntryResult {
    pub image: PathBuf,
    pub outcome: std::result::Result<EntryStats, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntryStats {
    pub error_rate: f64,
    pub iterations: usize,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchSummary {
    pub entries: Vec<EntryResult>,
}

impl BatchSummary {
    pub fn failures(&self) -> usize {
        self.entries.iter().filter(|e| e.outcome.is_err()).count()
    }

    /// Mean error rate over the successful entries.
    pub fn mean_error(&self) -> Option<f64> {
        let ok: Vec<f64> = self
            .entries
            .iter()
            .filter_map(|e| e.outcome.as_ref().ok().map(|s| s.error_rate))
            .collect();
        (!ok.is_empty()).then(|| ok.iter().sum::<f64>() / ok.len() as f64)
    }
}

pub fn read_manifest(path: &Path) -> Result<Vec<ManifestEntry>> {
    let mut entries: Vec<ManifestEntry> = read_json(path)?;
    if entries.is_empty() {
        return Err(Error::Parse {
            path: path.to_owned(),
            msg: "manifest has no entries".into(),
        });
    }
    let base = path.parent().unwrap_or(Path::new(""));
    for e in &mut entries {
        e.image = base.join(&e.image);
        e.trimap = base.join(&e.trimap);
        e.gt = base.join(&e.gt);
        if let Some(p) = &mut e.params {
            *p = base.join(&*p);
        }
    }
    Ok(entries)
}

fn mask_name(image: &Path, index: usize) -> String {
    let stem = image.file_stem().and_then(|s| s.to_str()).unwrap_or("image");
    format!("{index:04}_{stem}.png")
}

fn run_entry(entry: &ManifestEntry, defaults: &SegParams, mask_path: &Path) -> Result<EntryStats> {
    let start = Instant::now();
    let params = match &entry.params {
        Some(p) => ParamsFile::read(p)?.params()?,
        None => *defaults,
    };
    let image = io::load_rgb(&entry.image)?;
    let seeds = io::load_trimap(&entry.trimap)?;
    let gt = io::load_ground_truth(&entry.gt)?;
    let result = segment(&image, &seeds, &params, &Sequential)?;
    let error_rate = error_rate(&result, &gt, &seeds)?;
    io::save_mask(mask_path, result.width(), result.height(), &encode_mask(&result))?;
    Ok(EntryStats {
        error_rate,
        iterations: result.iterations,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// Segments every entry (up to `jobs` at once), writes `masks/` and
/// `results.csv` under `out_dir`. A failing entry is recorded and skipped.
pub fn evaluate(entries: &[ManifestEntry], defaults: &SegParams, out_dir: &Path, jobs: usize) -> Result<BatchSummary> {
    let masks = out_dir.join("masks");
    std::fs::create_dir_all(&masks).map_err(|e| Error::io(&masks, e))?;

    let slots: Vec<Mutex<Option<EntryResult>>> = entries.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    thread::scope(|s| {
        for _ in 0..jobs.clamp(1, entries.len()) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(entry) = entries.get(i) else { break };
                let outcome = run_entry(entry, defaults, &masks.join(mask_name(&entry.image, i)))
                    .map_err(|e| e.to_string());
                if let Err(msg) = &outcome {
                    log::error!("{msg}");
                }
                *slots[i].lock().unwrap() = Some(EntryResult {
                    image: entry.image.clone(),
                    outcome,
                });
            });
        }
    });
    let summary = BatchSummary {
        entries: slots
            .into_iter()
            .map(|m| m.into_inner().unwrap().expect("every entry visited"))
            .collect(),
    };
    write_results(&out_dir.join("results.csv"), &summary)?;
    Ok(summary)
}

/// `image,error_pct,iterations,wall_ms,status` plus a trailing `mean` row.
pub fn write_results(path: &Path, summary: &BatchSummary) -> Result<()> {
    let err = |e: csv::Error| Error::Parse {
        path: path.to_owned(),
        msg: e.to_string(),
    };
    let mut w = csv::Writer::from_path(path).map_err(err)?;
    w.write_record(["image", "error_pct", "iterations", "wall_ms", "status"])
        .map_err(err)?;
    for e in &summary.entries {
        let image = e.image.display().to_string();
        let row = match &e.outcome {
            Ok(s) => [
                image,
                format!("{:.4}", s.error_rate * 100.0),
                s.iterations.to_string(),
                format!("{:.1}", s.wall_ms),
                "ok".into(),
            ],
            Err(msg) => [image, String::new(), String::new(), String::new(), format!("error: {msg}")],
        };
        w.write_record(&row).map_err(err)?;
    }
    let mean = summary
        .mean_error()
        .map(|m| format!("{:.4}", m * 100.0))
        .unwrap_or_default();
    w.write_record(["mean", &mean, "", "", ""]).map_err(err)?;
    w.flush().map_err(|e| Error::io(path, e))
}
