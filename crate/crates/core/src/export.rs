//! Reproducible CSV/JSON emission and atomic file writes.
//!
//! Every artifact starts with the same metadata block (tool version, command,
//! SHA-256 of the canonical run configuration, seed). Nothing time- or
//! host-dependent is written, so identical inputs give identical bytes.
//! Non-finite numbers are emitted as the token `undefined`.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::observables::ObservableSet;
use crate::phasemap::PhaseGrid;

pub const UNDEFINED: &str = "undefined";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunMeta {
    pub version: String,
    pub command: String,
    pub config_sha256: String,
    pub seed: u64,
}

impl RunMeta {
    /// `config` is hashed through its canonical JSON form.
    pub fn new<C: Serialize>(command: &str, config: &C, seed: u64) -> Result<Self> {
        Ok(RunMeta {
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config_sha256: sha256_hex(&serde_json::to_vec(config)?),
            seed,
        })
    }

    fn csv_header(&self) -> String {
        format!(
            "# version: {}\n# command: {}\n# config_sha256: {}\n# seed: {}\n",
            self.version, self.command, self.config_sha256, self.seed
        )
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// A number that serializes as itself when finite and as `"undefined"` otherwise.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Num(pub f64);

impl Serialize for Num {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            s.serialize_f64(self.0)
        } else {
            s.serialize_str(UNDEFINED)
        }
    }
}

/// Shortest round-trip representation, or `undefined`.
pub fn fmt_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x}")
    } else {
        UNDEFINED.to_string()
    }
}

/// `{"meta": .., "data": ..}`, pretty-printed with a trailing newline.
pub fn json_document<T: Serialize>(meta: &RunMeta, data: &T) -> Result<Vec<u8>> {
    #[derive(Serialize)]
    struct Doc<'a, T> {
        meta: &'a RunMeta,
        data: &'a T,
    }
    let mut out = serde_json::to_vec_pretty(&Doc { meta, data })?;
    out.push(b'\n');
    Ok(out)
}

fn csv_body<F>(meta: &RunMeta, header: Vec<String>, fill: F) -> Result<Vec<u8>>
where
    F: FnOnce(&mut csv::Writer<&mut Vec<u8>>) -> Result<()>,
{
    let mut out = meta.csv_header().into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record(&header)?;
        fill(&mut w)?;
        w.flush()?;
    }
    Ok(out)
}

/// Columns `mu_<j>_<k>, ..., region, energy`, one row per cell in grid order.
pub fn grid_csv(meta: &RunMeta, grid: &PhaseGrid) -> Result<Vec<u8>> {
    let mut header: Vec<String> = grid.axes.iter().map(|a| a.pair.coupling_name()).collect();
    header.extend(["region".into(), "energy".into()]);
    csv_body(meta, header, |w| {
        for c in &grid.cells {
            let mut rec: Vec<String> = c.couplings.iter().map(|&x| fmt_num(x)).collect();
            rec.push(c.label.to_string());
            rec.push(fmt_num(c.energy));
            w.write_record(&rec)?;
        }
        Ok(())
    })
}

/// One sample of a 1-D observable sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    /// Path parameter.
    pub t: f64,
    /// Every coupling of the system, in transition order.
    pub couplings: Vec<f64>,
    pub observables: ObservableSet,
    /// A first-order crossing lies between the previous sample and this one.
    pub discontinuity: bool,
}

/// Columns `t, mu_<j>_<k>..., region, pair, nu, pop_1..pop_n, coh, var_pop,
/// discontinuity`. `nu`, `coh` and `var_pop` refer to the active pair and are
/// 0 in the normal region, where `pair` is `none`.
pub fn observables_csv(meta: &RunMeta, coupling_names: &[String], rows: &[SweepRow]) -> Result<Vec<u8>> {
    let levels = rows.first().map_or(0, |r| r.observables.pop.len());
    let mut header = vec!["t".to_string()];
    header.extend(coupling_names.iter().cloned());
    header.extend(["region".into(), "pair".into(), "nu".into()]);
    header.extend((1..=levels).map(|l| format!("pop_{l}")));
    header.extend(["coh".into(), "var_pop".into(), "discontinuity".into()]);
    csv_body(meta, header, |w| {
        for r in rows {
            if r.couplings.len() != coupling_names.len() || r.observables.pop.len() != levels {
                return Err(Error::DimensionMismatch { expected: coupling_names.len(), found: r.couplings.len() });
            }
            let o = &r.observables;
            let mut rec = vec![fmt_num(r.t)];
            rec.extend(r.couplings.iter().map(|&x| fmt_num(x)));
            rec.push(o.region.to_string());
            let (pair, nu, coh, var) = match o.active_pair() {
                Some(p) => {
                    let t = coupling_names
                        .iter()
                        .position(|n| *n == p.coupling_name())
                        .ok_or(Error::UnknownTransition(p))?;
                    (p.to_string(), o.nu[t], o.coh[t].magnitude, o.var_pop[p.j - 1])
                }
                None => ("none".to_string(), 0.0, 0.0, 0.0),
            };
            rec.push(pair);
            rec.push(fmt_num(nu));
            rec.extend(o.pop.iter().map(|&x| fmt_num(x)));
            rec.push(fmt_num(coh));
            rec.push(fmt_num(var));
            rec.push(u8::from(r.discontinuity).to_string());
            w.write_record(&rec)?;
        }
        Ok(())
    })
}

/// Write via a temporary file in the target directory, then rename, so a
/// failed run never leaves a partial file behind.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::presets::xi3;
    use crate::model::Pair;
    use crate::observables::expectations;
    use crate::phasemap::{scan_grid, Axis};
    use crate::varsurface::minimize;

    fn meta() -> RunMeta {
        RunMeta::new("phase-diagram", &xi3(0.0, 0.0), 7).unwrap()
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = RunMeta::new("x", &xi3(0.0, 0.0), 0).unwrap();
        let b = RunMeta::new("x", &xi3(0.0, 0.0), 0).unwrap();
        let c = RunMeta::new("x", &xi3(0.0, 1e-9), 0).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.config_sha256, c.config_sha256);
        assert_eq!(a.config_sha256.len(), 64);
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }

    #[test]
    fn grid_csv_layout() {
        let axes = [Axis::new(Pair::new(1, 2), 0.0, 2.0), Axis::new(Pair::new(2, 3), 0.0, 2.0)];
        let g = scan_grid(&xi3(0.0, 0.0), &axes, 3).unwrap();
        let text = String::from_utf8(grid_csv(&meta(), &g).unwrap()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4 + 1 + 9);
        assert!(lines[0].starts_with("# version: "));
        assert_eq!(lines[4], "mu_1_2,mu_2_3,region,energy");
        assert_eq!(lines[5], "0,0,N,0");
        assert!(lines[13].starts_with("2,2,S_"));

        let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
        assert_eq!(r.records().count(), 9);
    }

    #[test]
    fn observables_csv_layout() {
        let names: Vec<String> = xi3(0.0, 0.0).pairs().iter().map(Pair::coupling_name).collect();
        let rows: Vec<SweepRow> = [0.2, 1.0]
            .iter()
            .map(|&m| {
                let s = xi3(m, 0.0);
                SweepRow {
                    t: m,
                    couplings: vec![m, 0.0],
                    observables: expectations(&s, &minimize(&s)).unwrap(),
                    discontinuity: false,
                }
            })
            .collect();
        let text = String::from_utf8(observables_csv(&meta(), &names, &rows).unwrap()).unwrap();
        let lines: Vec<&str> = text.lines().skip(4).collect();
        assert_eq!(lines[0], "t,mu_1_2,mu_2_3,region,pair,nu,pop_1,pop_2,pop_3,coh,var_pop,discontinuity");
        assert_eq!(lines[1], "0.2,0.2,0,N,none,0,1,0,0,0,0,0");
        // s = 1/4 at mu = 1: nu = 15/16, p = 5/8
        let f: Vec<&str> = lines[2].split(',').collect();
        assert_eq!(&f[3..5], ["S_1_2", "1-2"]);
        assert!((f[5].parse::<f64>().unwrap() - 15.0 / 16.0).abs() < 1e-15);
        assert_eq!(f[6], "0.625");
        assert_eq!(f[7], "0.375");
    }

    #[test]
    fn undefined_token() {
        assert_eq!(fmt_num(f64::NAN), "undefined");
        assert_eq!(fmt_num(f64::INFINITY), "undefined");
        assert_eq!(fmt_num(0.1), "0.1");
        assert_eq!(serde_json::to_string(&[Num(1.5), Num(f64::NAN)]).unwrap(), "[1.5,\"undefined\"]");
    }

    #[test]
    fn json_document_shape() {
        let bytes = json_document(&meta(), &vec![1, 2]).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
        assert_eq!(v["meta"]["seed"], 7);
        assert_eq!(v["data"][1], 2);
        assert_eq!(*bytes.last().unwrap(), b'\n');
    }

    #[test]
    fn atomic_write_replaces_and_leaves_no_temp() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.csv");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
        assert!(write_atomic(&dir.path().join("missing/out.csv"), b"x").is_err());
    }
}
