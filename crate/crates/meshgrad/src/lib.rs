//! Mesh and matrix file formats for [`meshgrad_core`], plus the `meshgrad`
//! command-line driver.
//!
//! * Wavefront OBJ triangle meshes: [`read_obj`], [`write_obj`].
//! * MatrixMarket dumps of assembled Hessians and gradients:
//!   [`write_matrix_market`], [`write_vector_market`], [`parse_matrix_market`].
//! * CSV solver reports: [`save_report`].

pub mod mtx;
pub mod obj;

use std::fs;
use std::path::{Path, PathBuf};

use meshgrad_core::{BlockSparseMatrix, MeshError, SolverReport};

pub use mtx::{parse_matrix_market, write_matrix_market, write_vector_market, MatrixMarket};
pub use obj::{format_obj, parse_obj, read_obj, write_obj, ObjData};

/// A syntax error with its 1-based line number.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl ParseError {
    pub(crate) fn new(line: usize, message: impl Into<String>) -> Self {
        ParseError { line, message: message.into() }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    Parse { path: PathBuf, source: ParseError },
    #[error("{}: {source}", path.display())]
    Mesh { path: PathBuf, source: MeshError },
}

pub(crate) fn read_text(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<(), Error> {
    fs::write(path, text).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

/// Writes `report` as CSV (`iter,energy,grad_inf_norm,step,inner_iters,time_ms`).
pub fn save_report(path: &Path, report: &SolverReport) -> Result<(), Error> {
    write_text(path, &report.to_csv())
}

pub fn save_matrix_market<const N: usize>(path: &Path, h: &BlockSparseMatrix<N>) -> Result<(), Error> {
    let mut out = Vec::new();
    write_matrix_market(&mut out, h).expect("writing to memory");
    write_text(path, &String::from_utf8(out).expect("ascii output"))
}

/// Writes a gradient (or any vector) as a MatrixMarket dense column.
pub fn save_gradient(path: &Path, g: &[f64]) -> Result<(), Error> {
    let mut out = Vec::new();
    write_vector_market(&mut out, g).expect("writing to memory");
    write_text(path, &String::from_utf8(out).expect("ascii output"))
}

pub fn read_matrix_market(path: &Path) -> Result<MatrixMarket, Error> {
    let text = read_text(path)?;
    parse_matrix_market(&text).map_err(|source| Error::Parse { path: path.to_path_buf(), source })
}
