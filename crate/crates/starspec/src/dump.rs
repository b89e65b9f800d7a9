//! Plain-text mesh and matrix dumps.
//!
//! Mesh: one `v x y` line per dof, `t i j k s` per triangle (dofs and sector
//! tag), `c p m b` per crack pair. Matrix: `i j value` per stored entry, row
//! by row. Floats use the shortest representation that round-trips, blank
//! lines and `#` comments are ignored on input.

use std::fmt::Write as _;
use std::str::FromStr;

use starspec_core::mesh::{CrackMesh, CrackPair, Triangle};
use starspec_core::SparseSymMatrix;

use crate::error::{Error, Result};

pub fn mesh_to_string(mesh: &CrackMesh) -> String {
    let mut s = String::new();
    for v in mesh.vertices() {
        let _ = writeln!(s, "v {:?} {:?}", v[0], v[1]);
    }
    for t in mesh.triangles() {
        let [i, j, k] = t.dofs;
        let _ = writeln!(s, "t {i} {j} {k} {}", t.sector);
    }
    for c in mesh.crack_pairs() {
        let _ = writeln!(s, "c {} {} {}", c.plus, c.minus, c.branch);
    }
    s
}

/// Parsed content of a mesh dump.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MeshDump {
    pub vertices: Vec<[f64; 2]>,
    pub triangles: Vec<Triangle>,
    pub crack_pairs: Vec<CrackPair>,
}

impl MeshDump {
    pub fn of(mesh: &CrackMesh) -> Self {
        MeshDump {
            vertices: mesh.vertices().to_vec(),
            triangles: mesh.triangles().to_vec(),
            crack_pairs: mesh.crack_pairs().to_vec(),
        }
    }
}

fn field<T: FromStr>(parts: &[&str], i: usize, line: usize) -> Result<T> {
    parts
        .get(i)
        .ok_or_else(|| Error::Parse {
            line,
            message: format!("missing field {i}"),
        })?
        .parse()
        .map_err(|_| Error::Parse {
            line,
            message: format!("bad field {:?}", parts[i]),
        })
}

fn records(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .map(|(i, l)| (i, l.split_whitespace().collect()))
}

pub fn parse_mesh(text: &str) -> Result<MeshDump> {
    let mut out = MeshDump::default();
    for (line, p) in records(text) {
        let arity = |n: usize| {
            if p.len() == n {
                Ok(())
            } else {
                Err(Error::Parse {
                    line,
                    message: format!("expected {} fields, got {}", n, p.len()),
                })
            }
        };
        match p[0] {
            "v" => {
                arity(3)?;
                out.vertices.push([field(&p, 1, line)?, field(&p, 2, line)?]);
            }
            "t" => {
                arity(5)?;
                out.triangles.push(Triangle {
                    dofs: [field(&p, 1, line)?, field(&p, 2, line)?, field(&p, 3, line)?],
                    sector: field(&p, 4, line)?,
                });
            }
            "c" => {
                arity(4)?;
                out.crack_pairs.push(CrackPair {
                    plus: field(&p, 1, line)?,
                    minus: field(&p, 2, line)?,
                    branch: field(&p, 3, line)?,
                });
            }
            other => {
                return Err(Error::Parse {
                    line,
                    message: format!("unknown record {other:?}"),
                })
            }
        }
    }
    Ok(out)
}

pub fn matrix_to_string(a: &SparseSymMatrix) -> String {
    let mut s = String::new();
    for (i, j, v) in a.triplets() {
        let _ = writeln!(s, "{i} {j} {v:?}");
    }
    s
}

pub fn parse_matrix(text: &str) -> Result<Vec<(usize, usize, f64)>> {
    records(text)
        .map(|(line, p)| {
            if p.len() != 3 {
                return Err(Error::Parse {
                    line,
                    message: format!("expected 3 fields, got {}", p.len()),
                });
            }
            Ok((field(&p, 0, line)?, field(&p, 1, line)?, field(&p, 2, line)?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_garbage() {
        assert!(matches!(parse_mesh("v 1.0"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_mesh("\n# c\nq 1 2"), Err(Error::Parse { line: 3, .. })));
        assert!(parse_matrix("0 0 x").is_err());
        assert_eq!(parse_matrix("# m\n0 1 -0.5\n").unwrap(), vec![(0, 1, -0.5)]);
    }
}
