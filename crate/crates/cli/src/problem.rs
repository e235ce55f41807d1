//! Problem lookup: built-in ids and JSON files describing LQ problems.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use turnpike_core::model::{LinearQuadratic, Problem, Terminal, TerminalKind};
use turnpike_core::registry;

use crate::error::{CliError, Result};

/// LQ problem file. Matrices are row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LqFile {
    pub n: usize,
    pub m: usize,
    #[serde(rename = "A")]
    pub a: Vec<f64>,
    #[serde(rename = "B")]
    pub b: Vec<f64>,
    #[serde(rename = "Q")]
    pub q: Vec<f64>,
    #[serde(rename = "U")]
    pub u: Vec<f64>,
    pub xd: Vec<f64>,
    pub ud: Vec<f64>,
    pub terminal: TerminalSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TerminalSpec {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x1: Option<Vec<f64>>,
}

fn matrix(name: &str, rows: usize, cols: usize, data: &[f64]) -> std::result::Result<DMatrix<f64>, String> {
    if data.len() != rows * cols {
        return Err(format!("{name} has {} entries, expected {rows}x{cols}", data.len()));
    }
    Ok(DMatrix::from_row_slice(rows, cols, data))
}

fn vector(name: &str, len: usize, data: &[f64]) -> std::result::Result<DVector<f64>, String> {
    if data.len() != len {
        return Err(format!("{name} has {} entries, expected {len}", data.len()));
    }
    Ok(DVector::from_column_slice(data))
}

impl LqFile {
    fn terminal(&self) -> std::result::Result<Terminal, String> {
        let n = self.n;
        let state = |name: &str, v: &Option<Vec<f64>>| match v {
            Some(v) => vector(name, n, v),
            None => Err(format!("terminal kind '{}' needs {name}", self.terminal.kind)),
        };
        let kind = TerminalKind::parse(&self.terminal.kind)
            .ok_or_else(|| format!("unknown terminal kind '{}'", self.terminal.kind))?;
        match kind {
            TerminalKind::FixedBoth => Ok(Terminal::FixedBoth {
                x0: state("x0", &self.terminal.x0)?,
                x1: state("x1", &self.terminal.x1)?,
            }),
            TerminalKind::FixedInitial => Ok(Terminal::FixedInitial {
                x0: state("x0", &self.terminal.x0)?,
            }),
            TerminalKind::Periodic => Ok(Terminal::Periodic),
            other => Err(format!("terminal kind '{}' cannot be given in a file", other.as_str())),
        }
    }

    pub fn into_problem(&self, name: &str) -> std::result::Result<Problem, String> {
        let (n, m) = (self.n, self.m);
        let model = LinearQuadratic::new(
            matrix("A", n, n, &self.a)?,
            matrix("B", n, m, &self.b)?,
            matrix("Q", n, n, &self.q)?,
            matrix("U", m, m, &self.u)?,
            vector("xd", n, &self.xd)?,
            vector("ud", m, &self.ud)?,
        )
        .map_err(|e| e.to_string())?;
        Problem::new(name, model, self.terminal()?).map_err(|e| e.to_string())
    }
}

pub fn load_lq_file(path: &Path) -> Result<Problem> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let bad = |message: String| CliError::ProblemFile {
        path: path.to_path_buf(),
        message,
    };
    let file: LqFile = serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
    let name = format!("lq:{}", path.display());
    file.into_problem(&name).map_err(bad)
}

/// Resolves `ex1`, `ex2`, `lq:<file>`, or a bare path to an LQ file.
pub fn resolve(id: &str) -> Result<Problem> {
    if registry::IDS.contains(&id) {
        return Ok(registry::by_id(id)?);
    }
    if let Some(path) = id.strip_prefix("lq:") {
        return load_lq_file(Path::new(path));
    }
    if Path::new(id).is_file() {
        return load_lq_file(Path::new(id));
    }
    Err(CliError::Config(format!(
        "unknown problem '{id}' (use ex1, ex2, or lq:<file>)"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ex1_file() -> LqFile {
        LqFile {
            n: 2,
            m: 1,
            a: vec![0.0, 1.0, -1.0, 0.0],
            b: vec![0.0, 1.0],
            q: vec![1.0, 0.0, 0.0, 1.0],
            u: vec![1.0],
            xd: vec![2.0, 7.0],
            ud: vec![0.0],
            terminal: TerminalSpec {
                kind: "fixed-initial-free-final".into(),
                x0: Some(vec![0.0, 0.0]),
                x1: None,
            },
        }
    }

    #[test]
    fn file_matches_registry_example() {
        let p = ex1_file().into_problem("file").unwrap();
        let lq = p.linear_quadratic().unwrap();
        let reference = registry::oscillator_lq_model();
        assert_eq!(lq.a, reference.a);
        assert_eq!(lq.b, reference.b);
        assert_eq!(p.terminal().kind(), TerminalKind::FixedInitial);
    }

    #[test]
    fn row_major_layout() {
        let mut f = ex1_file();
        f.a = vec![1.0, 2.0, 3.0, 4.0];
        let p = f.into_problem("file").unwrap();
        assert_eq!(p.linear_quadratic().unwrap().a[(0, 1)], 2.0);
    }

    #[test]
    fn rejects_bad_shapes_and_data() {
        let mut f = ex1_file();
        f.b = vec![1.0];
        assert!(f.into_problem("x").unwrap_err().contains("B has 1 entries"));

        let mut f = ex1_file();
        f.q = vec![1.0, 2.0, 0.0, 1.0];
        assert!(f.into_problem("x").unwrap_err().contains("not symmetric"));

        let mut f = ex1_file();
        f.terminal.kind = "fixed-both".into();
        assert!(f.into_problem("x").unwrap_err().contains("needs x1"));

        let mut f = ex1_file();
        f.terminal.kind = "sideways".into();
        assert!(f.into_problem("x").unwrap_err().contains("unknown terminal kind"));
    }

    #[test]
    fn unknown_id() {
        assert!(matches!(resolve("ex9"), Err(CliError::Config(_))));
    }
}
