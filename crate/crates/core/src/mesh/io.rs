use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use super::{MeshError, Point, TriangleMesh};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeshFormat {
    Off,
    Obj,
}

impl MeshFormat {
    pub fn from_path(path: &Path) -> Option<Self> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "off" => Some(Self::Off),
            "obj" => Some(Self::Obj),
            _ => None,
        }
    }
}

/// Parses an ASCII OFF or OBJ stream into a validated triangle mesh.
///
/// Vertex and face order is preserved. OBJ records other than `v` and `f`
/// are ignored.
pub fn load_mesh(reader: impl BufRead, format: MeshFormat) -> Result<TriangleMesh, MeshError> {
    let (vertices, faces) = match format {
        MeshFormat::Off => parse_off(reader)?,
        MeshFormat::Obj => parse_obj(reader)?,
    };
    TriangleMesh::new(vertices, faces)
}

pub fn load_mesh_path(path: impl AsRef<Path>) -> Result<TriangleMesh, MeshError> {
    let path = path.as_ref();
    let format = MeshFormat::from_path(path)
        .ok_or_else(|| MeshError::UnknownFormat(path.display().to_string()))?;
    let file = std::fs::File::open(path)?;
    load_mesh(BufReader::new(file), format)
}

pub fn write_off(mesh: &TriangleMesh, mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "OFF")?;
    writeln!(out, "{} {} 0", mesh.n_vertices(), mesh.n_faces())?;
    for p in mesh.vertices() {
        writeln!(out, "{:e} {:e} {:e}", p[0], p[1], p[2])?;
    }
    for f in mesh.faces() {
        writeln!(out, "3 {} {} {}", f[0], f[1], f[2])?;
    }
    Ok(())
}

/// Non-empty, non-comment lines with their 1-based line numbers.
fn content_lines(reader: impl BufRead) -> impl Iterator<Item = Result<(usize, String), MeshError>> {
    reader
        .lines()
        .enumerate()
        .filter_map(|(i, line)| match line {
            Err(e) => Some(Err(MeshError::Io(e))),
            Ok(l) => {
                let body = l.split('#').next().unwrap_or("").trim().to_string();
                (!body.is_empty()).then_some(Ok((i + 1, body)))
            }
        })
}

fn parse_err(line: usize, message: impl Into<String>) -> MeshError {
    MeshError::Parse {
        line,
        message: message.into(),
    }
}

fn parse_num<T: std::str::FromStr>(tok: &str, line: usize, what: &str) -> Result<T, MeshError> {
    tok.parse()
        .map_err(|_| parse_err(line, format!("invalid {what} `{tok}`")))
}

fn parse_off(reader: impl BufRead) -> Result<(Vec<Point>, Vec<[usize; 3]>), MeshError> {
    let mut lines = content_lines(reader);
    let (hline, header) = lines
        .next()
        .transpose()?
        .ok_or_else(|| parse_err(1, "empty file"))?;
    let mut tokens: Vec<&str> = header.split_whitespace().collect();
    if tokens[0] != "OFF" {
        return Err(parse_err(hline, "expected `OFF` header"));
    }
    tokens.remove(0);
    // counts may share the header line
    let (cline, counts_owned);
    if tokens.is_empty() {
        let (l, s) = lines
            .next()
            .transpose()?
            .ok_or_else(|| parse_err(hline + 1, "missing vertex/face/edge counts"))?;
        cline = l;
        counts_owned = s;
    } else {
        cline = hline;
        counts_owned = tokens.join(" ");
    }
    let counts: Vec<&str> = counts_owned.split_whitespace().collect();
    if counts.len() != 3 {
        return Err(parse_err(
            cline,
            format!(
                "expected 3 counts (vertices faces edges), found {}",
                counts.len()
            ),
        ));
    }
    let nv: usize = parse_num(counts[0], cline, "vertex count")?;
    let nf: usize = parse_num(counts[1], cline, "face count")?;
    let _: usize = parse_num(counts[2], cline, "edge count")?;

    let mut vertices = Vec::with_capacity(nv);
    let mut last = cline;
    for _ in 0..nv {
        let (l, s) = lines
            .next()
            .transpose()?
            .ok_or_else(|| parse_err(last + 1, "unexpected end of file in vertex list"))?;
        last = l;
        let t: Vec<&str> = s.split_whitespace().collect();
        if t.len() < 3 {
            return Err(parse_err(l, "vertex needs 3 coordinates"));
        }
        vertices.push([
            parse_num(t[0], l, "coordinate")?,
            parse_num(t[1], l, "coordinate")?,
            parse_num(t[2], l, "coordinate")?,
        ]);
    }
    let mut faces = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (l, s) = lines
            .next()
            .transpose()?
            .ok_or_else(|| parse_err(last + 1, "unexpected end of file in face list"))?;
        last = l;
        let t: Vec<&str> = s.split_whitespace().collect();
        let arity: usize = parse_num(t[0], l, "face arity")?;
        if arity != 3 {
            return Err(MeshError::NonTriangle { line: l, arity });
        }
        if t.len() < 4 {
            return Err(parse_err(l, "face lists fewer than 3 indices"));
        }
        let mut face = [0usize; 3];
        for k in 0..3 {
            let idx: i64 = parse_num(t[k + 1], l, "vertex index")?;
            face[k] = checked_index(idx, faces.len(), nv)?;
        }
        faces.push(face);
    }
    Ok((vertices, faces))
}

fn checked_index(idx: i64, face: usize, n_vertices: usize) -> Result<usize, MeshError> {
    if idx < 0 || idx as usize >= n_vertices {
        return Err(MeshError::IndexOutOfRange {
            face,
            index: idx,
            n_vertices,
        });
    }
    Ok(idx as usize)
}

fn parse_obj(reader: impl BufRead) -> Result<(Vec<Point>, Vec<[usize; 3]>), MeshError> {
    let mut vertices: Vec<Point> = Vec::new();
    let mut raw_faces: Vec<(usize, [i64; 3])> = Vec::new();
    for item in content_lines(reader) {
        let (l, s) = item?;
        let mut t = s.split_whitespace();
        match t.next() {
            Some("v") => {
                let c: Vec<&str> = t.collect();
                if c.len() < 3 {
                    return Err(parse_err(l, "vertex needs 3 coordinates"));
                }
                vertices.push([
                    parse_num(c[0], l, "coordinate")?,
                    parse_num(c[1], l, "coordinate")?,
                    parse_num(c[2], l, "coordinate")?,
                ]);
            }
            Some("f") => {
                let refs: Vec<&str> = t.collect();
                if refs.len() != 3 {
                    return Err(MeshError::NonTriangle {
                        line: l,
                        arity: refs.len(),
                    });
                }
                let mut face = [0i64; 3];
                for (k, r) in refs.iter().enumerate() {
                    // `v`, `v/vt`, `v//vn` or `v/vt/vn`
                    let head = r.split('/').next().unwrap_or("");
                    let idx: i64 = parse_num(head, l, "vertex index")?;
                    // OBJ is 1-based; negative indices count back from the
                    // vertices seen so far
                    face[k] = match idx {
                        0 => return Err(parse_err(l, "vertex index 0 is invalid in OBJ")),
                        i if i > 0 => i - 1,
                        i => vertices.len() as i64 + i,
                    };
                }
                raw_faces.push((l, face));
            }
            _ => {}
        }
    }
    let nv = vertices.len();
    let faces = raw_faces
        .iter()
        .enumerate()
        .map(|(f, (_, face))| {
            Ok([
                checked_index(face[0], f, nv)?,
                checked_index(face[1], f, nv)?,
                checked_index(face[2], f, nv)?,
            ])
        })
        .collect::<Result<Vec<_>, MeshError>>()?;
    Ok((vertices, faces))
}
