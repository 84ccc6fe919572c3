//! OFF and OBJ triangle meshes.

use std::io::{BufRead, Write};
use std::path::Path;

use super::{TriMesh, Vec3};
use crate::error::{Error, Result};

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::MeshParse {
        line,
        message: message.into(),
    }
}

fn parse_f64(tok: Option<&str>, line: usize) -> Result<f64> {
    let tok = tok.ok_or_else(|| parse_err(line, "missing coordinate"))?;
    tok.parse().map_err(|_| parse_err(line, format!("bad number {tok:?}")))
}

/// Lines with comments stripped, numbered from 1, blank lines skipped.
fn content_lines<R: BufRead>(r: R) -> impl Iterator<Item = (usize, std::io::Result<String>)> {
    r.lines().enumerate().filter_map(|(i, l)| {
        let l = l.map(|s| s.split('#').next().unwrap_or("").trim().to_string());
        match &l {
            Ok(s) if s.is_empty() => None,
            _ => Some((i + 1, l)),
        }
    })
}

pub fn read_off<R: BufRead>(r: R) -> Result<TriMesh> {
    let mut lines = content_lines(r);
    let (ln, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let header = header?;
    let rest = header
        .strip_prefix("OFF")
        .ok_or_else(|| parse_err(ln, "missing OFF header"))?
        .trim()
        .to_string();
    let counts_line = if rest.is_empty() {
        let (ln, l) = lines.next().ok_or_else(|| parse_err(ln + 1, "missing counts"))?;
        (ln, l?)
    } else {
        (ln, rest)
    };
    let counts: Vec<usize> = counts_line
        .1
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| parse_err(counts_line.0, format!("bad count {t:?}"))))
        .collect::<Result<_>>()?;
    if counts.len() < 2 {
        return Err(parse_err(counts_line.0, "expected vertex and face counts"));
    }
    let (nv, nf) = (counts[0], counts[1]);
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, l) = lines.next().ok_or_else(|| parse_err(0, "unexpected end of file in vertices"))?;
        let l = l?;
        let mut it = l.split_whitespace();
        vertices.push([parse_f64(it.next(), ln)?, parse_f64(it.next(), ln)?, parse_f64(it.next(), ln)?]);
    }
    let mut faces = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (ln, l) = lines.next().ok_or_else(|| parse_err(0, "unexpected end of file in faces"))?;
        let l = l?;
        let idx: Vec<usize> = l
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| parse_err(ln, format!("bad index {t:?}"))))
            .collect::<Result<_>>()?;
        if idx.len() < 4 || idx[0] != 3 {
            return Err(parse_err(ln, "only triangles are supported"));
        }
        faces.push([idx[1], idx[2], idx[3]]);
    }
    TriMesh::new(vertices, faces)
}

pub fn read_obj<R: BufRead>(r: R) -> Result<TriMesh> {
    let mut vertices: Vec<Vec3> = Vec::new();
    let mut faces = Vec::new();
    for (ln, l) in content_lines(r) {
        let l = l?;
        let mut it = l.split_whitespace();
        match it.next() {
            Some("v") => {
                vertices.push([parse_f64(it.next(), ln)?, parse_f64(it.next(), ln)?, parse_f64(it.next(), ln)?])
            }
            Some("f") => {
                let idx: Vec<usize> = it
                    .map(|t| {
                        // "i", "i/t", "i/t/n", "i//n"; negative indices count from the end
                        let head = t.split('/').next().unwrap_or("");
                        let k: i64 = head.parse().map_err(|_| parse_err(ln, format!("bad index {t:?}")))?;
                        let resolved = if k > 0 { k - 1 } else { vertices.len() as i64 + k };
                        usize::try_from(resolved).map_err(|_| parse_err(ln, format!("index {k} out of range")))
                    })
                    .collect::<Result<_>>()?;
                if idx.len() != 3 {
                    return Err(parse_err(ln, "only triangles are supported"));
                }
                faces.push([idx[0], idx[1], idx[2]]);
            }
            _ => {}
        }
    }
    TriMesh::new(vertices, faces)
}

/// Dispatch on the file extension.
pub fn read_mesh(path: &Path) -> Result<TriMesh> {
    let f = std::io::BufReader::new(std::fs::File::open(path)?);
    match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
        Some("off") => read_off(f),
        Some("obj") => read_obj(f),
        _ => Err(Error::InvalidArgument(format!(
            "unknown mesh format for {} (expected .off or .obj)",
            path.display()
        ))),
    }
}

pub fn write_off<W: Write>(mesh: &TriMesh, mut w: W) -> Result<()> {
    writeln!(w, "OFF")?;
    writeln!(w, "{} {} 0", mesh.vertices.len(), mesh.faces.len())?;
    for v in &mesh.vertices {
        writeln!(w, "{:?} {:?} {:?}", v[0], v[1], v[2])?;
    }
    for f in &mesh.faces {
        writeln!(w, "3 {} {} {}", f[0], f[1], f[2])?;
    }
    Ok(())
}
