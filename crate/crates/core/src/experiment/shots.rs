//! Shot files: a `#` header carrying the configuration, then one
//! `phase_rad,shot_index,n_detected` record per line.
//!
//! Values are written with the shortest representation that parses back to
//! the same `f64`, so a load after a persist is exact. Vacuum-run records use
//! `vac` in the phase column.

use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::experiment::config::ExperimentConfig;
use crate::experiment::runner::{PhaseRecords, SampleSet};
use crate::opa::SufficiencyReport;

pub const FORMAT_VERSION: &str = "1";
const VACUUM_TAG: &str = "vac";

fn record_block(set: &SampleSet) -> String {
    let mut out = String::with_capacity(set.record_count() * 28);
    for p in &set.phases {
        for (i, n) in p.n_detected.iter().enumerate() {
            writeln!(out, "{},{i},{n}", p.phase).expect("write to string");
        }
    }
    for (i, n) in set.vacuum.iter().enumerate() {
        writeln!(out, "{VACUUM_TAG},{i},{n}").expect("write to string");
    }
    out
}

fn digest(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// Render a sample set in the shot-file format.
pub fn render_samples(set: &SampleSet) -> String {
    let records = record_block(set);
    let mut out = String::new();
    out.push_str("# opatomo shot records\n");
    writeln!(out, "# format_version={FORMAT_VERSION}").unwrap();
    for (k, v) in set.config.flatten() {
        writeln!(out, "# config.{k}={v}").unwrap();
    }
    let s = &set.sufficiency;
    writeln!(out, "# sufficiency.margin={}", s.margin).unwrap();
    writeln!(out, "# sufficiency.sufficient={}", s.sufficient).unwrap();
    writeln!(out, "# sufficiency.residual_ratio={}", s.residual_ratio).unwrap();
    writeln!(out, "# sufficiency.override_used={}", set.gain_override_used()).unwrap();
    writeln!(out, "# records={}", set.record_count()).unwrap();
    writeln!(out, "# sha256={}", digest(&records)).unwrap();
    out.push_str("# columns=phase_rad,shot_index,n_detected\n");
    out.push_str(&records);
    out
}

pub fn persist_samples(set: &SampleSet, path: &Path) -> Result<()> {
    std::fs::write(path, render_samples(set)).map_err(|e| Error::io(path, e))
}

pub fn load_samples(path: &Path) -> Result<SampleSet> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_samples(&text, path)
}

struct Header {
    version: Option<String>,
    config: Vec<(String, String)>,
    margin: Option<f64>,
    sufficient: Option<bool>,
    residual: Option<f64>,
    records: Option<usize>,
    sha256: Option<String>,
}

/// Parse shot-file text; `path` is used in error messages.
pub fn parse_samples(text: &str, path: &Path) -> Result<SampleSet> {
    let parse_err = |line: usize, reason: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        reason,
    };
    let mut h = Header {
        version: None,
        config: Vec::new(),
        margin: None,
        sufficient: None,
        residual: None,
        records: None,
        sha256: None,
    };
    let mut lines = text.split_inclusive('\n').enumerate().peekable();
    while let Some((idx, raw)) = lines.peek() {
        let Some(body) = raw.trim_end_matches(['\n', '\r']).strip_prefix('#') else {
            break;
        };
        let lineno = idx + 1;
        if let Some((key, value)) = body.trim_start().split_once('=') {
            let value = value.to_string();
            let num = |v: &str| v.parse::<f64>().map_err(|e| parse_err(lineno, format!("{key}: {e}")));
            match key {
                "format_version" => h.version = Some(value),
                "sufficiency.margin" => h.margin = Some(num(&value)?),
                "sufficiency.residual_ratio" => h.residual = Some(num(&value)?),
                "sufficiency.sufficient" => {
                    h.sufficient = Some(value.parse().map_err(|e| parse_err(lineno, format!("{key}: {e}")))?)
                }
                "records" => h.records = Some(value.parse().map_err(|e| parse_err(lineno, format!("{key}: {e}")))?),
                "sha256" => h.sha256 = Some(value),
                k => {
                    if let Some(ck) = k.strip_prefix("config.") {
                        h.config.push((ck.to_string(), value));
                    }
                }
            }
        }
        lines.next();
    }
    match h.version.as_deref() {
        Some(FORMAT_VERSION) => {}
        other => {
            return Err(Error::Version {
                path: path.to_path_buf(),
                found: other.unwrap_or("none").to_string(),
                expected: FORMAT_VERSION.to_string(),
            })
        }
    }
    let config = ExperimentConfig::unflatten(&h.config).map_err(|e| parse_err(0, format!("header config: {e}")))?;
    let sufficiency = match (h.margin, h.sufficient, h.residual) {
        (Some(margin), Some(sufficient), Some(residual_ratio)) => SufficiencyReport {
            margin,
            sufficient,
            residual_ratio,
        },
        _ => return Err(parse_err(0, "header lacks the sufficiency report".into())),
    };

    let mut phases: Vec<PhaseRecords> = config
        .run
        .phases
        .iter()
        .map(|&phase| PhaseRecords {
            phase,
            n_detected: Vec::new(),
        })
        .collect();
    let mut vacuum = Vec::new();
    let mut hasher = Sha256::new();
    let mut count = 0usize;
    let mut last_line = 0usize;
    for (idx, raw) in lines {
        let lineno = idx + 1;
        last_line = lineno;
        let line = raw.trim_end_matches(['\n', '\r']);
        if line.is_empty() {
            continue;
        }
        hasher.update(raw.as_bytes());
        let mut fields = line.split(',');
        let (Some(ph), Some(ix), Some(n), None) = (fields.next(), fields.next(), fields.next(), fields.next()) else {
            return Err(parse_err(
                lineno,
                format!("expected 3 comma-separated fields, got `{line}`"),
            ));
        };
        let index: usize = ix
            .parse()
            .map_err(|e| parse_err(lineno, format!("shot index `{ix}`: {e}")))?;
        let n: f64 = n
            .parse()
            .map_err(|e| parse_err(lineno, format!("photon number `{n}`: {e}")))?;
        let target = if ph == VACUUM_TAG {
            &mut vacuum
        } else {
            let phase: f64 = ph
                .parse()
                .map_err(|e| parse_err(lineno, format!("phase `{ph}`: {e}")))?;
            match phases.iter_mut().find(|p| p.phase == phase) {
                Some(p) => &mut p.n_detected,
                None => return Err(parse_err(lineno, format!("phase {phase} is not in the configuration"))),
            }
        };
        if index != target.len() {
            return Err(parse_err(
                lineno,
                format!("shot index {index} out of order (expected {})", target.len()),
            ));
        }
        target.push(n);
        count += 1;
    }

    if count == 0 {
        log::warn!("{}: no shot records", path.display());
        return Ok(SampleSet {
            config,
            sufficiency,
            phases: Vec::new(),
            vacuum: Vec::new(),
        });
    }
    if let Some(expected) = &h.sha256 {
        let actual = hex::encode(hasher.finalize());
        if &actual != expected {
            return Err(Error::Checksum {
                path: path.to_path_buf(),
                expected: expected.clone(),
                actual,
            });
        }
    }
    if let Some(expected) = h.records {
        if expected != count {
            return Err(parse_err(
                last_line,
                format!("header announces {expected} records, found {count}"),
            ));
        }
    }
    let shots = config.run.shots_per_phase;
    for p in &phases {
        if p.n_detected.len() != shots {
            return Err(parse_err(
                last_line,
                format!("phase {} has {} records, expected {shots}", p.phase, p.n_detected.len()),
            ));
        }
    }
    let want_vac = if config.run.include_vacuum_run { shots } else { 0 };
    if vacuum.len() != want_vac {
        return Err(parse_err(
            last_line,
            format!("vacuum run has {} records, expected {want_vac}", vacuum.len()),
        ));
    }
    Ok(SampleSet {
        config,
        sufficiency,
        phases,
        vacuum,
    })
}
