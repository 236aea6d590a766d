//! JSON file formats for POVMs, datasets and results, and the sweep CSV.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use num_complex::Complex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use tomoml::sweep::SweepRow;
use tomoml::{Dataset64, Density64, Hermitian64, Povm64};

/// A `d × d` matrix of `[re, im]` pairs.
pub type MatrixJson = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}:{column}: {message}")]
    Json { path: PathBuf, line: usize, column: usize, message: String },
    #[error("{path}: {field}: {message}")]
    Invalid { path: PathBuf, field: String, message: String },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl FormatError {
    fn invalid(path: &Path, field: impl Into<String>, message: impl ToString) -> Self {
        FormatError::Invalid { path: path.to_path_buf(), field: field.into(), message: message.to_string() }
    }
}

pub fn matrix_to_json(op: &Hermitian64) -> MatrixJson {
    op.to_rows().iter().map(|row| row.iter().map(|z| [z.re, z.im]).collect()).collect()
}

pub fn matrix_from_json(m: &MatrixJson, path: &Path, field: &str) -> Result<Hermitian64, FormatError> {
    let d = m.len();
    if let Some((i, row)) = m.iter().enumerate().find(|(_, row)| row.len() != d) {
        return Err(FormatError::invalid(path, format!("{field}[{i}]"), format!("row has {} entries, expected {d}", row.len())));
    }
    let entries = m.iter().flatten().map(|&[re, im]| Complex::new(re, im)).collect();
    Hermitian64::from_entries(d, entries).map_err(|e| FormatError::invalid(path, field, e))
}

fn read(path: &Path) -> Result<String, FormatError> {
    fs::read_to_string(path).map_err(|source| FormatError::Io { path: path.to_path_buf(), source })
}

fn parse<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, FormatError> {
    let text = read(path)?;
    serde_json::from_str(&text).map_err(|e| FormatError::Json {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

/// Writes to `path`, or to stdout when `path` is `None`.
pub fn write_output(path: Option<&Path>, contents: &str) -> Result<(), FormatError> {
    match path {
        Some(p) => fs::write(p, contents).map_err(|source| FormatError::Io { path: p.to_path_buf(), source }),
        None => std::io::stdout()
            .write_all(contents.as_bytes())
            .map_err(|source| FormatError::Io { path: PathBuf::from("<stdout>"), source }),
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PovmFile {
    pub dim: usize,
    pub effects: Vec<MatrixJson>,
}

impl PovmFile {
    pub fn from_povm(povm: &Povm64) -> Self {
        Self { dim: povm.dim(), effects: povm.effects().iter().map(matrix_to_json).collect() }
    }

    pub fn load(path: &Path) -> Result<Povm64, FormatError> {
        let file: PovmFile = parse(path)?;
        let mut effects = Vec::with_capacity(file.effects.len());
        for (i, m) in file.effects.iter().enumerate() {
            let field = format!("effects[{i}]");
            let e = matrix_from_json(m, path, &field)?;
            if e.dim() != file.dim {
                return Err(FormatError::invalid(path, field, format!("dimension {} does not match dim = {}", e.dim(), file.dim)));
            }
            effects.push(e);
        }
        Povm64::new(effects).map_err(|e| FormatError::invalid(path, "effects", e))
    }
}

/// Provenance of a sampled dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplerInfo {
    pub algorithm: String,
    pub seed: u64,
    pub shots: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DatasetFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frequencies: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counts: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampler: Option<SamplerInfo>,
}

impl DatasetFile {
    pub fn load(path: &Path) -> Result<Dataset64, FormatError> {
        let file: DatasetFile = parse(path)?;
        match (file.frequencies, file.counts) {
            (Some(f), None) => Dataset64::from_frequencies(f, None).map_err(|e| FormatError::invalid(path, "frequencies", e)),
            (None, Some(c)) => Dataset64::from_counts(&c).map_err(|e| FormatError::invalid(path, "counts", e)),
            (Some(_), Some(_)) => Err(FormatError::invalid(path, "frequencies", "give either frequencies or counts, not both")),
            (None, None) => Err(FormatError::invalid(path, "frequencies", "missing; expected frequencies or counts")),
        }
    }
}

/// Solver parameters echoed into a result file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub rule: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_backtracks: Option<usize>,
    pub tol_iterate: f64,
    pub tol_stationarity: f64,
    pub max_iterations: usize,
    pub init: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultFile {
    pub rho: MatrixJson,
    pub loglik: f64,
    pub iterations: usize,
    pub termination: String,
    pub config: ConfigEcho,
}

impl ResultFile {
    pub fn load(path: &Path) -> Result<(ResultFile, Density64), FormatError> {
        let file: ResultFile = parse(path)?;
        let rho = load_density(&file.rho, path, "rho")?;
        Ok((file, rho))
    }
}

pub fn load_density(m: &MatrixJson, path: &Path, field: &str) -> Result<Density64, FormatError> {
    let op = matrix_from_json(m, path, field)?;
    Density64::new(op).map_err(|e| FormatError::invalid(path, field, e))
}

/// Starting state from a file holding either a bare matrix or an object
/// with a `rho` field (such as a result file).
pub fn load_initial_state(path: &Path) -> Result<Density64, FormatError> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Init {
        Bare(MatrixJson),
        Wrapped { rho: MatrixJson },
    }
    match parse::<Init>(path)? {
        Init::Bare(m) => load_density(&m, path, "matrix"),
        Init::Wrapped { rho } => load_density(&rho, path, "rho"),
    }
}

pub const SWEEP_HEADER: [&str; 5] = ["t", "rule", "iterations", "converged", "final_loglik"];

pub fn sweep_csv(rows: &[SweepRow<f64>]) -> Result<String, FormatError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(SWEEP_HEADER)?;
    for r in rows {
        w.write_record([
            r.t.to_string(),
            r.rule.name().to_string(),
            r.iterations.to_string(),
            r.converged.to_string(),
            r.final_loglik.to_string(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| csv::Error::from(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("ASCII output"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use tomoml::simulate::{counterexample_spec, pauli_povm};
    use tomoml::sweep::SweepRule;

    fn temp(name: &str, contents: &str) -> (tempfile::TempDir, PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join(name);
        fs::write(&path, contents).unwrap();
        (dir, path)
    }

    #[test]
    fn povm_round_trip() {
        let povm = pauli_povm::<f64>(2).unwrap();
        let (_dir, path) = temp("povm.json", &to_json(&PovmFile::from_povm(&povm)));
        let back = PovmFile::load(&path).unwrap();
        assert_eq!(back, povm);
    }

    #[test]
    fn malformed_json_reports_position() {
        let (_dir, path) = temp("povm.json", "{\"dim\": 2,\n \"effects\": [oops]}");
        let err = PovmFile::load(&path).unwrap_err();
        assert!(matches!(err, FormatError::Json { line: 2, .. }), "{err}");
    }

    #[test]
    fn incomplete_povm_names_invariant() {
        let (_dir, path) = temp("povm.json", r#"{"dim": 1, "effects": [[[[0.5, 0.0]]]]}"#);
        let err = PovmFile::load(&path).unwrap_err().to_string();
        assert!(err.contains("effects") && err.contains("identity"), "{err}");
    }

    #[test]
    fn ragged_matrix_is_rejected() {
        let (_dir, path) = temp("povm.json", r#"{"dim": 2, "effects": [[[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0]]]]}"#);
        let err = PovmFile::load(&path).unwrap_err().to_string();
        assert!(err.contains("effects[0][1]"), "{err}");
    }

    #[test]
    fn counts_are_normalized() {
        let (_dir, path) = temp("data.json", r#"{"counts": [1, 2]}"#);
        let data = DatasetFile::load(&path).unwrap();
        assert_eq!(data, counterexample_spec::<f64>().dataset);
        assert_eq!(data.total_count(), Some(3));
    }

    #[test]
    fn dataset_needs_exactly_one_field() {
        let (_dir, path) = temp("data.json", r#"{"counts": [1], "frequencies": [1.0]}"#);
        assert!(DatasetFile::load(&path).is_err());
        let (_dir, path) = temp("data.json", r#"{}"#);
        assert!(DatasetFile::load(&path).is_err());
        let (_dir, path) = temp("data.json", r#"{"frequencies": [0.5, 0.6]}"#);
        assert!(DatasetFile::load(&path).unwrap_err().to_string().contains("frequencies"));
    }

    #[test]
    fn result_round_trip_is_exact() {
        let rho = Density64::new(Hermitian64::from_diagonal(&[1.0 / 3.0, 2.0 / 3.0]).unwrap()).unwrap();
        let file = ResultFile {
            rho: matrix_to_json(rho.as_operator()),
            loglik: -0.6365141682948128,
            iterations: 7,
            termination: "converged".into(),
            config: ConfigEcho {
                rule: "armijo".into(),
                t: None,
                t_max: Some(1.0),
                gamma: Some(1e-4),
                alpha0: Some(0.5),
                alpha1: Some(0.5),
                max_backtracks: Some(60),
                tol_iterate: 1e-7,
                tol_stationarity: 1e-8,
                max_iterations: 100_000,
                init: "mixed".into(),
            },
        };
        let (_dir, path) = temp("result.json", &to_json(&file));
        let (back, back_rho) = ResultFile::load(&path).unwrap();
        assert_eq!(back, file);
        assert_eq!(back_rho, rho);
        assert_eq!(load_initial_state(&path).unwrap(), rho);
    }

    #[test]
    fn csv_layout() {
        let rows = vec![SweepRow {
            t: 0.5,
            rule: SweepRule::Armijo,
            iterations: 3,
            converged: true,
            final_loglik: -0.25,
            outcome: "converged".into(),
        }];
        assert_eq!(sweep_csv(&rows).unwrap(), "t,rule,iterations,converged,final_loglik\n0.5,armijo,3,true,-0.25\n");
    }
}
