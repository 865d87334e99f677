//! Text formats for grids, sinograms and tables.
//!
//! * Wigner grid: `# wigner nx=.. np=.. x_min=.. x_max=.. p_min=.. p_max=..`,
//!   then `np` lines of `nx` comma-separated values (increasing `p`).
//! * Sinogram: `# sinogram`, `# phases=..` and `# x=..` header lines, then
//!   one comma-separated density row per phase.
//! * Table: a comma-separated header of column names, then numeric rows.
//!
//! Numbers are written in the shortest form that parses back exactly.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::phase_space::{Extent, WignerGrid};
use crate::reconstruction::Sinogram;

fn join(values: &[f64]) -> String {
    let mut s = String::with_capacity(values.len() * 20);
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        write!(s, "{v}").unwrap();
    }
    s
}

fn parse_err(path: &Path, line: usize, reason: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        reason: reason.into(),
    }
}

fn parse_row(path: &Path, line: usize, text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|f| {
            f.trim()
                .parse::<f64>()
                .map_err(|e| parse_err(path, line, format!("`{f}`: {e}")))
        })
        .collect()
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Which of the formats above a file holds, judged from its first line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FileKind {
    Wigner,
    Sinogram,
    Table,
}

pub fn detect_kind(text: &str) -> Option<FileKind> {
    let first = text.lines().next()?.trim();
    if first.starts_with("# wigner") {
        Some(FileKind::Wigner)
    } else if first.starts_with("# sinogram") {
        Some(FileKind::Sinogram)
    } else if !first.is_empty()
        && !first.starts_with('#')
        && first.split(',').all(|c| {
            let c = c.trim();
            !c.is_empty() && c.parse::<f64>().is_err()
        })
    {
        Some(FileKind::Table)
    } else {
        None
    }
}

pub fn render_wigner(w: &WignerGrid<f64>) -> String {
    let e = w.extent();
    let mut out = format!(
        "# wigner nx={} np={} x_min={} x_max={} p_min={} p_max={}\n",
        w.nx(),
        w.np(),
        e.x_min,
        e.x_max,
        e.p_min,
        e.p_max
    );
    for row in w.values().chunks(w.nx()) {
        out.push_str(&join(row));
        out.push('\n');
    }
    out
}

pub fn write_wigner(w: &WignerGrid<f64>, path: &Path) -> Result<()> {
    write_file(path, &render_wigner(w))
}

pub fn parse_wigner(text: &str, path: &Path) -> Result<WignerGrid<f64>> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| parse_err(path, 1, "empty file"))?;
    let rest = header
        .strip_prefix("# wigner")
        .ok_or_else(|| parse_err(path, 1, "missing `# wigner` header"))?;
    let mut nx = None;
    let mut np = None;
    let mut ext = [None; 4];
    for item in rest.split_whitespace() {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| parse_err(path, 1, format!("bad header item `{item}`")))?;
        let num = || v.parse::<f64>().map_err(|e| parse_err(path, 1, format!("{k}: {e}")));
        match k {
            "nx" => nx = Some(v.parse::<usize>().map_err(|e| parse_err(path, 1, format!("nx: {e}")))?),
            "np" => np = Some(v.parse::<usize>().map_err(|e| parse_err(path, 1, format!("np: {e}")))?),
            "x_min" => ext[0] = Some(num()?),
            "x_max" => ext[1] = Some(num()?),
            "p_min" => ext[2] = Some(num()?),
            "p_max" => ext[3] = Some(num()?),
            _ => {}
        }
    }
    let (Some(nx), Some(np), [Some(x_min), Some(x_max), Some(p_min), Some(p_max)]) = (nx, np, ext) else {
        return Err(parse_err(path, 1, "header needs nx, np, x_min, x_max, p_min, p_max"));
    };
    let mut values = Vec::with_capacity(nx * np);
    let mut rows = 0;
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let row = parse_row(path, i + 1, line)?;
        if row.len() != nx {
            return Err(parse_err(
                path,
                i + 1,
                format!("expected {nx} values, got {}", row.len()),
            ));
        }
        values.extend(row);
        rows += 1;
    }
    if rows != np {
        return Err(parse_err(
            path,
            text.lines().count(),
            format!("expected {np} rows, got {rows}"),
        ));
    }
    WignerGrid::from_values(
        nx,
        np,
        Extent {
            x_min,
            x_max,
            p_min,
            p_max,
        },
        values,
    )
}

pub fn read_wigner(path: &Path) -> Result<WignerGrid<f64>> {
    parse_wigner(&read_file(path)?, path)
}

pub fn render_sinogram(s: &Sinogram<f64>) -> String {
    let mut out = String::from("# sinogram\n");
    writeln!(out, "# phases={}", join(s.phases())).unwrap();
    writeln!(out, "# x={}", join(s.x_grid())).unwrap();
    for row in s.rows() {
        out.push_str(&join(row));
        out.push('\n');
    }
    out
}

pub fn write_sinogram(s: &Sinogram<f64>, path: &Path) -> Result<()> {
    write_file(path, &render_sinogram(s))
}

pub fn parse_sinogram(text: &str, path: &Path) -> Result<Sinogram<f64>> {
    let mut phases = None;
    let mut x = None;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if let Some(h) = line.strip_prefix('#') {
            let h = h.trim();
            if let Some(v) = h.strip_prefix("phases=") {
                phases = Some(parse_row(path, i + 1, v)?);
            } else if let Some(v) = h.strip_prefix("x=") {
                x = Some(parse_row(path, i + 1, v)?);
            }
        } else if !line.is_empty() {
            rows.push(parse_row(path, i + 1, line)?);
        }
    }
    let (Some(phases), Some(x)) = (phases, x) else {
        return Err(parse_err(path, 1, "sinogram header needs `# phases=` and `# x=` lines"));
    };
    Sinogram::new(phases, x, rows).map_err(|e| parse_err(path, 0, e.to_string()))
}

pub fn read_sinogram(path: &Path) -> Result<Sinogram<f64>> {
    parse_sinogram(&read_file(path)?, path)
}

/// Named numeric columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn render(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&join(r));
            out.push('\n');
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_file(path, &self.render())
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or_else(|| parse_err(path, 1, "empty table"))?;
        let columns: Vec<String> = header.split(',').map(|c| c.trim().to_string()).collect();
        let mut rows = Vec::new();
        for (i, line) in lines {
            let row = parse_row(path, i + 1, line)?;
            if row.len() != columns.len() {
                return Err(parse_err(
                    path,
                    i + 1,
                    format!("expected {} columns, got {}", columns.len(), row.len()),
                ));
            }
            rows.push(row);
        }
        Ok(Self { columns, rows })
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&read_file(path)?, path)
    }
}

/// Write `text` to `path`, creating parent directories.
pub fn write_text(path: &Path, text: &str) -> Result<()> {
    write_file(path, text)
}
