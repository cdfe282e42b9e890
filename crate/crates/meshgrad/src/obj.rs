//! Wavefront OBJ: `v` and `f` records. Texture and normal indices in face
//! corners (`v/vt/vn`) are accepted and dropped; polygons are fanned into
//! triangles; other record types are ignored.

use std::fmt::Write as _;
use std::path::Path;

use meshgrad_core::Mesh;

use crate::{read_text, write_text, Error, ParseError};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ObjData {
    pub positions: Vec<[f64; 3]>,
    pub faces: Vec<[usize; 3]>,
}

pub fn parse_obj(text: &str) -> Result<ObjData, ParseError> {
    let mut data = ObjData::default();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        let mut tokens = content.split_whitespace();
        match tokens.next() {
            Some("v") => {
                let mut p = [0.0; 3];
                for (c, slot) in p.iter_mut().enumerate() {
                    let tok = tokens.next().ok_or_else(|| ParseError::new(line, "vertex needs 3 coordinates"))?;
                    *slot = tok.parse().map_err(|_| ParseError::new(line, format!("bad coordinate {c}: {tok:?}")))?;
                }
                data.positions.push(p);
            }
            Some("f") => {
                let corners = tokens
                    .map(|tok| corner_index(tok, data.positions.len()).map_err(|m| ParseError::new(line, m)))
                    .collect::<Result<Vec<_>, _>>()?;
                if corners.len() < 3 {
                    return Err(ParseError::new(line, format!("face has {} corners, need at least 3", corners.len())));
                }
                for k in 1..corners.len() - 1 {
                    data.faces.push([corners[0], corners[k], corners[k + 1]]);
                }
            }
            _ => {}
        }
    }
    Ok(data)
}

/// Resolves one face corner to a 0-based vertex index. Negative indices count
/// back from the most recent vertex.
fn corner_index(token: &str, seen: usize) -> Result<usize, String> {
    let head = token.split('/').next().unwrap_or("");
    let idx: i64 = head.parse().map_err(|_| format!("bad face index {token:?}"))?;
    let resolved = match idx {
        0 => return Err("face index 0 (indices start at 1)".into()),
        i if i > 0 => i - 1,
        i => seen as i64 + i,
    };
    if resolved < 0 || resolved >= seen as i64 {
        return Err(format!("face index {idx} refers to a missing vertex ({seen} defined so far)"));
    }
    Ok(resolved as usize)
}

/// Reads a triangle mesh; errors name the file and, for syntax errors, the line.
pub fn read_obj(path: &Path) -> Result<Mesh, Error> {
    let text = read_text(path)?;
    let data = parse_obj(&text).map_err(|source| Error::Parse { path: path.to_path_buf(), source })?;
    Mesh::new(data.positions, data.faces).map_err(|source| Error::Mesh { path: path.to_path_buf(), source })
}

/// OBJ text with shortest round-trip float formatting, so reading it back
/// restores the coordinates exactly.
pub fn format_obj(positions: &[[f64; 3]], faces: &[[usize; 3]]) -> String {
    let mut out = String::with_capacity(32 * (positions.len() + faces.len()));
    for p in positions {
        let _ = writeln!(out, "v {:?} {:?} {:?}", p[0], p[1], p[2]);
    }
    for f in faces {
        let _ = writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
    }
    out
}

pub fn write_obj(path: &Path, positions: &[[f64; 3]], faces: &[[usize; 3]]) -> Result<(), Error> {
    write_text(path, &format_obj(positions, faces))
}
