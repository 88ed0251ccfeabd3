//! Serialization of scenario results and atomic writes.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::CliError;
use crate::scenario::ScenarioResult;

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "GENDARBOUX_OUT";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn parse(s: &str) -> Option<Format> {
        match s {
            "csv" => Some(Format::Csv),
            "json" => Some(Format::Json),
            _ => None,
        }
    }
}

/// A named file and its full contents.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

fn csv_table(x: &[f64], columns: &[(&str, &[f64])]) -> String {
    let mut out = String::from("x");
    for (name, _) in columns {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for (i, xi) in x.iter().enumerate() {
        write!(out, "{xi:.16e}").unwrap();
        for (_, col) in columns {
            write!(out, ",{:.16e}", col[i]).unwrap();
        }
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct SpectrumMeta {
    n: usize,
    h: f64,
    bc: &'static str,
}

#[derive(Serialize)]
struct SpectrumFile<'a> {
    scenario: &'a str,
    eigenvalues: &'a [f64],
    meta: SpectrumMeta,
}

#[derive(Serialize)]
struct FieldEntry<'a> {
    name: &'a str,
    kind: &'static str,
    values: &'a [f64],
}

#[derive(Serialize)]
struct FieldsFile<'a> {
    scenario: &'a str,
    x: &'a [f64],
    fields: Vec<FieldEntry<'a>>,
}

fn json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("plain data serializes");
    bytes.push(b'\n');
    bytes
}

/// Every file for the requested formats plus the report.
pub fn artifacts(result: &ScenarioResult, formats: &[Format]) -> Vec<Artifact> {
    let x = result.grid.nodes();
    let potentials: Vec<(&str, &[f64])> = result
        .curves
        .iter()
        .map(|c| (c.name.as_str(), c.background.v().values()))
        .collect();
    let states: Vec<(&str, &[f64])> = result
        .curves
        .iter()
        .flat_map(|c| c.states.iter().map(|(n, f)| (n.as_str(), f.values())))
        .collect();
    let mut files = Vec::new();
    if formats.contains(&Format::Csv) {
        files.push(Artifact {
            name: "potentials.csv".into(),
            bytes: csv_table(x, &potentials).into_bytes(),
        });
        if !states.is_empty() {
            files.push(Artifact {
                name: "states.csv".into(),
                bytes: csv_table(x, &states).into_bytes(),
            });
        }
    }
    if formats.contains(&Format::Json) {
        let fields = potentials
            .iter()
            .map(|(name, values)| FieldEntry {
                name,
                kind: "potential",
                values,
            })
            .chain(states.iter().map(|(name, values)| FieldEntry {
                name,
                kind: "state",
                values,
            }))
            .collect();
        files.push(Artifact {
            name: "fields.json".into(),
            bytes: json_bytes(&FieldsFile {
                scenario: &result.name,
                x,
                fields,
            }),
        });
    }
    for s in &result.spectra {
        files.push(Artifact {
            name: format!("spectrum_{}.json", s.curve),
            bytes: json_bytes(&SpectrumFile {
                scenario: &result.name,
                eigenvalues: &s.spectrum.eigenvalues,
                meta: SpectrumMeta {
                    n: s.spectrum.n,
                    h: s.spectrum.h,
                    bc: "dirichlet",
                },
            }),
        });
    }
    files.push(Artifact {
        name: "report.json".into(),
        bytes: json_bytes(&result.report),
    });
    files
}

/// `--out`, then the configured directory, then `$GENDARBOUX_OUT`, then `./out`.
pub fn resolve_out_dir(flag: Option<&Path>, configured: Option<&str>) -> PathBuf {
    if let Some(p) = flag {
        return p.to_path_buf();
    }
    if let Some(p) = configured {
        return PathBuf::from(p);
    }
    match std::env::var_os(OUT_ENV) {
        Some(p) if !p.is_empty() => PathBuf::from(p),
        _ => PathBuf::from("out"),
    }
}

/// Write each artifact to a temporary sibling, then rename into place.
pub fn write_all(dir: &Path, files: &[Artifact]) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut staged = Vec::with_capacity(files.len());
    for f in files {
        let tmp = dir.join(format!(".{}.tmp", f.name));
        if let Err(e) = fs::write(&tmp, &f.bytes) {
            for (t, _) in &staged {
                let _ = fs::remove_file(t);
            }
            let _ = fs::remove_file(&tmp);
            return Err(CliError::io(&tmp, e));
        }
        staged.push((tmp, dir.join(&f.name)));
    }
    for (tmp, dest) in &staged {
        fs::rename(tmp, dest).map_err(|e| CliError::io(dest, e))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_has_header_and_seventeen_digits() {
        let t = csv_table(&[0.5, 1.0], &[("v1", &[1.0 / 3.0, -2.0])]);
        let lines: Vec<&str> = t.split('\n').collect();
        assert_eq!(lines[0], "x,v1");
        assert_eq!(lines[1], "5.0000000000000000e-1,3.3333333333333331e-1");
        assert_eq!(lines[2], "1.0000000000000000e0,-2.0000000000000000e0");
        assert_eq!(lines[3], "");
    }

    #[test]
    fn out_dir_precedence() {
        let flag = Path::new("a");
        assert_eq!(resolve_out_dir(Some(flag), Some("b")), PathBuf::from("a"));
        assert_eq!(resolve_out_dir(None, Some("b")), PathBuf::from("b"));
    }
}
