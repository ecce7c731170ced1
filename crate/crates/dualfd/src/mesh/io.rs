//! Plain-text mesh format: `v <x> <y>` per vertex, `f <i1> <i2> ...` per
//! face with 1-based counter-clockwise vertex ids, `#` starts a comment.

use std::path::Path;

use super::{DualMesh, Point2};
use crate::error::{Error, Result};

pub fn save_to_string(mesh: &DualMesh) -> String {
    let mut out = String::new();
    for p in mesh.vertices() {
        out.push_str(&format!("v {:.17e} {:.17e}\n", p.x, p.y));
    }
    for face in mesh.faces() {
        out.push('f');
        for &v in face {
            out.push_str(&format!(" {}", v + 1));
        }
        out.push('\n');
    }
    out
}

pub fn save(mesh: &DualMesh, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, save_to_string(mesh))?;
    Ok(())
}

pub fn load_from_str(text: &str) -> Result<DualMesh> {
    let mut vertices: Vec<Point2> = Vec::new();
    let mut faces: Vec<Vec<u32>> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.trim_end_matches('\r');
        let content = match content.find('#') {
            Some(i) => &content[..i],
            None => content,
        };
        let mut parts = content.split_whitespace();
        let Some(tag) = parts.next() else { continue };
        match tag {
            "v" => {
                let x = parse_f64(parts.next(), line)?;
                let y = parse_f64(parts.next(), line)?;
                vertices.push(Point2::new(x, y));
            }
            "f" => {
                let mut ids = Vec::new();
                for tok in parts {
                    let id: usize = tok.parse().map_err(|_| Error::Parse {
                        line,
                        msg: format!("bad vertex id {tok:?}"),
                    })?;
                    if id == 0 || id > vertices.len() {
                        return Err(Error::Parse {
                            line,
                            msg: format!("face references missing vertex {id}"),
                        });
                    }
                    ids.push((id - 1) as u32);
                }
                if ids.len() < 3 {
                    return Err(Error::Parse {
                        line,
                        msg: "face needs at least 3 vertices".into(),
                    });
                }
                faces.push(ids);
            }
            other => {
                return Err(Error::Parse {
                    line,
                    msg: format!("unknown record {other:?}"),
                })
            }
        }
    }
    DualMesh::new(vertices, faces)
}

pub fn load(path: impl AsRef<Path>) -> Result<DualMesh> {
    load_from_str(&std::fs::read_to_string(path)?)
}

fn parse_f64(tok: Option<&str>, line: usize) -> Result<f64> {
    let tok = tok.ok_or(Error::Parse {
        line,
        msg: "missing coordinate".into(),
    })?;
    tok.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("bad coordinate {tok:?}"),
    })
}
