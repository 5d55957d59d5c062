//! File formats. Fringe maps use fixed 17-significant-digit scientific
//! notation (`{:.16e}`); every other number is written with Rust's shortest
//! round-trip formatting, so re-reading gives back the same doubles.
//! Events are newline-delimited JSON. Each data file gets a `.meta` sidecar
//! (same stem) in TOML holding the version, run facts and the full config.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::kinematics::TransverseVector;
use crate::montecarlo::{EventRecord, Lineage, Reconstruction};
use crate::observables::FringeMap;
use crate::{Error, Result, VERSION};

/// Header of the fringe-map CSV.
pub const FRINGE_HEADER: &str = "Kx_keV,Ky_keV,dsigma_arb";

/// `{:.16e}`: 17 significant digits.
pub fn fixed17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Sidecar path: same stem, `.meta` extension.
pub fn meta_path(data: &Path) -> PathBuf {
    data.with_extension("meta")
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn write_all(path: &Path, body: &str) -> Result<()> {
    let mut w = create(path)?;
    w.write_all(body.as_bytes())
        .map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn fringe_csv(map: &FringeMap) -> String {
    let g = &map.grid;
    let mut out = String::with_capacity(64 * (g.len() + 1));
    out.push_str(FRINGE_HEADER);
    out.push('\n');
    for j in 0..g.ny {
        for i in 0..g.nx {
            out.push_str(&fixed17(g.kx(i)));
            out.push(',');
            out.push_str(&fixed17(g.ky(j)));
            out.push(',');
            out.push_str(&fixed17(map.value(i, j)));
            out.push('\n');
        }
    }
    out
}

pub fn write_fringe_csv(path: &Path, map: &FringeMap) -> Result<()> {
    write_all(path, &fringe_csv(map))
}

/// Key-value facts about a run, in insertion order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Facts(Vec<(String, toml::Value)>);

impl Facts {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, key: &str, value: impl Into<toml::Value>) -> Self {
        self.0.push((key.to_string(), value.into()));
        self
    }

    pub fn push(&mut self, key: &str, value: impl Into<toml::Value>) {
        self.0.push((key.to_string(), value.into()));
    }

    pub fn entries(&self) -> &[(String, toml::Value)] {
        &self.0
    }

    /// `key=value` lines; strings unquoted.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.0 {
            let text = match v {
                toml::Value::String(s) => s.clone(),
                toml::Value::Float(f) => format!("{f:e}"),
                other => other.to_string(),
            };
            out.push_str(&format!("{k}={text}\n"));
        }
        out
    }
}

/// Sidecar text: `version`, `command`, the facts, then `[config]`.
pub fn meta_text(command: &str, facts: &Facts, config: &RunConfig) -> String {
    let mut table = toml::Table::new();
    table.insert("version".into(), VERSION.into());
    table.insert("command".into(), command.into());
    for (k, v) in facts.entries() {
        table.insert(k.clone(), v.clone());
    }
    let cfg = toml::Value::try_from(config).expect("run config always serializes");
    table.insert("config".into(), cfg);
    toml::to_string(&table).expect("metadata always serializes")
}

pub fn write_meta(data: &Path, command: &str, facts: &Facts, config: &RunConfig) -> Result<()> {
    write_all(&meta_path(data), &meta_text(command, facts, config))
}

/// Facts recorded next to a fringe map.
pub fn fringe_facts(map: &FringeMap) -> Facts {
    let mut facts = Facts::new()
        .with("model", map.model.to_string())
        .with("smearing", map.smearing.clone())
        .with("incoherent_smearing", true)
        .with("edge_flags", map.edge_flags as i64)
        .with("nx", map.grid.nx as i64)
        .with("ny", map.grid.ny as i64);
    if let Some(w) = &map.coverage_warning {
        facts.push("coverage_warning", w.clone());
    }
    facts
}

/// One NDJSON line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct EventLine {
    k1p: [f64; 2],
    k2p: [f64; 2],
    weight: f64,
    seed: u64,
    stream: u64,
    counter: u64,
}

impl From<&EventRecord> for EventLine {
    fn from(e: &EventRecord) -> Self {
        Self {
            k1p: [e.k1p.x, e.k1p.y],
            k2p: [e.k2p.x, e.k2p.y],
            weight: e.weight,
            seed: e.lineage.seed,
            stream: e.lineage.stream,
            counter: e.lineage.counter,
        }
    }
}

impl From<EventLine> for EventRecord {
    fn from(l: EventLine) -> Self {
        EventRecord::new(
            TransverseVector::new(l.k1p[0], l.k1p[1]),
            TransverseVector::new(l.k2p[0], l.k2p[1]),
            l.weight,
            Lineage {
                seed: l.seed,
                stream: l.stream,
                counter: l.counter,
            },
        )
    }
}

pub fn write_events(path: &Path, events: &[EventRecord]) -> Result<()> {
    let mut w = create(path)?;
    for e in events {
        serde_json::to_writer(&mut w, &EventLine::from(e))
            .map_err(|err| Error::io(path, std::io::Error::other(err)))?;
        w.write_all(b"\n").map_err(|err| Error::io(path, err))?;
    }
    w.flush().map_err(|err| Error::io(path, err))
}

pub fn read_events(path: &Path) -> Result<Vec<EventRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut events = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: EventLine = serde_json::from_str(&line).map_err(|e| {
            Error::io(
                path,
                std::io::Error::new(
                    std::io::ErrorKind::InvalidData,
                    format!("line {}: {e}", n + 1),
                ),
            )
        })?;
        events.push(parsed.into());
    }
    Ok(events)
}

/// Radial histograms of all slices: `slice,K_lo_keV,K_hi_keV,count`.
pub fn radial_csv(rec: &Reconstruction, lo: f64, width: f64) -> String {
    let mut out = String::from("slice,K_lo_keV,K_hi_keV,count\n");
    for (s, slice) in rec.slices.iter().enumerate() {
        for (b, c) in slice.radial.iter().enumerate() {
            let a = lo + b as f64 * width;
            out.push_str(&format!("{s},{a},{},{c}\n", a + width));
        }
    }
    out
}

/// `K` maps in the `k1'` frame: `slice,Kx_keV,Ky_keV,count` at cell centres.
pub fn map_csv(rec: &Reconstruction, grid: &crate::GridSpec) -> String {
    let mut out = String::from("slice,Kx_keV,Ky_keV,count\n");
    for (s, slice) in rec.slices.iter().enumerate() {
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                out.push_str(&format!(
                    "{s},{},{},{}\n",
                    grid.kx(i),
                    grid.ky(j),
                    slice.map[j * grid.nx + i]
                ));
            }
        }
    }
    out
}

/// One row of a parameter scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanRow {
    pub value: f64,
    pub aperp: f64,
    pub error: f64,
}

pub fn scan_csv(parameter: &str, rows: &[ScanRow]) -> String {
    let mut out = format!("{parameter},A_perp,error\n");
    for r in rows {
        out.push_str(&format!("{},{:e},{:e}\n", r.value, r.aperp, r.error));
    }
    out
}

pub fn write_text(path: &Path, body: &str) -> Result<()> {
    write_all(path, body)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_format_has_17_digits() {
        assert_eq!(fixed17(1.0), "1.0000000000000000e0");
        assert_eq!(fixed17(-0.1), "-1.0000000000000001e-1");
        let x = 0.1 + 0.2;
        assert_eq!(fixed17(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn events_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ev.ndjson");
        let ev = vec![
            EventRecord::new(
                TransverseVector::new(500.0, 0.1 + 0.2),
                TransverseVector::new(-1.0 / 3.0, 7e-300),
                1.0,
                Lineage {
                    seed: 3,
                    stream: 1,
                    counter: 77,
                },
            ),
            EventRecord::new(
                TransverseVector::new(-2.5, 1e10),
                TransverseVector::new(0.0, -0.0),
                1.0,
                Lineage {
                    seed: 3,
                    stream: 2,
                    counter: 0,
                },
            ),
        ];
        write_events(&path, &ev).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.lines().next().unwrap().starts_with("{\"k1p\":[500.0,"));
        assert_eq!(read_events(&path).unwrap(), ev);
    }

    #[test]
    fn unwritable_path_is_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        std::fs::write(&blocker, "x").unwrap();
        let err = write_text(&blocker.join("sub/out.csv"), "a").unwrap_err();
        assert_eq!(err.exit_code(), 3);
        let err = read_events(&dir.path().join("missing.ndjson")).unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn meta_has_config_and_no_clock() {
        let c = RunConfig::default();
        let text = meta_text("fringe-map", &Facts::new().with("edge_flags", 4i64), &c);
        assert!(text.contains("edge_flags = 4"));
        assert!(text.contains("[config.beam1]"));
        assert_eq!(RunConfig::from_toml_str(&text).unwrap(), c);
    }
}
