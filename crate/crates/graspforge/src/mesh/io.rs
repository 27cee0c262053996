//! OBJ (ASCII) and binary STL readers, OBJ writer.

use super::{MeshError, TriMesh};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

pub(crate) fn load_mesh(path: &Path) -> Result<TriMesh, MeshError> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
        .unwrap_or_default();
    match ext.as_str() {
        "obj" => load_obj(path),
        "stl" => load_stl(path),
        other => Err(MeshError::UnsupportedFormat(other.to_string())),
    }
}

fn io_err(path: &Path, source: std::io::Error) -> MeshError {
    MeshError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> MeshError {
    MeshError::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn load_obj(path: &Path) -> Result<TriMesh, MeshError> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let reader = BufReader::new(file);
    let mut vertices: Vec<[f64; 3]> = Vec::new();
    let mut faces: Vec<[u32; 3]> = Vec::new();

    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line.map_err(|e| io_err(path, e))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        match parts.next() {
            Some("v") => {
                let mut coords = [0.0f64; 3];
                for c in coords.iter_mut() {
                    let tok = parts
                        .next()
                        .ok_or_else(|| parse_err(path, lineno, "vertex needs 3 coordinates"))?;
                    *c = tok
                        .parse()
                        .map_err(|_| parse_err(path, lineno, format!("bad coordinate '{tok}'")))?;
                }
                vertices.push(coords);
            }
            Some("f") => {
                let mut idx: Vec<u32> = Vec::with_capacity(4);
                for tok in parts {
                    // "f v", "f v/vt", "f v/vt/vn", "f v//vn" all start with
                    // the vertex index.
                    let vtok = tok.split('/').next().unwrap_or("");
                    let v: i64 = vtok
                        .parse()
                        .map_err(|_| parse_err(path, lineno, format!("bad face index '{tok}'")))?;
                    if v < 1 {
                        return Err(parse_err(
                            path,
                            lineno,
                            "negative/zero OBJ indices are not supported",
                        ));
                    }
                    idx.push((v - 1) as u32);
                }
                if idx.len() < 3 {
                    return Err(parse_err(path, lineno, "face needs at least 3 vertices"));
                }
                for i in 1..idx.len() - 1 {
                    faces.push([idx[0], idx[i], idx[i + 1]]);
                }
            }
            _ => {} // normals, texcoords, groups, materials: ignored
        }
    }
    if faces.is_empty() {
        return Err(MeshError::Empty);
    }
    for (fi, f) in faces.iter().enumerate() {
        for &v in f {
            if v as usize >= vertices.len() {
                return Err(parse_err(
                    path,
                    0,
                    format!("face {fi} references vertex {} of {}", v + 1, vertices.len()),
                ));
            }
        }
    }
    TriMesh::new(vertices, faces)
}

/// Binary STL: 80-byte header, little-endian u32 triangle count, then per
/// triangle 12 f32 (normal + 3 vertices) and a u16 attribute.
fn load_stl(path: &Path) -> Result<TriMesh, MeshError> {
    let mut file = File::open(path).map_err(|e| io_err(path, e))?;
    let mut bytes = Vec::new();
    file.read_to_end(&mut bytes).map_err(|e| io_err(path, e))?;

    if bytes.len() < 84 {
        return Err(parse_err(path, 0, "file too short for a binary STL header"));
    }
    let count = u32::from_le_bytes(bytes[80..84].try_into().unwrap()) as usize;
    let expected = 84 + count * 50;
    if bytes.len() < expected {
        return Err(parse_err(
            path,
            0,
            format!("truncated STL: {} bytes, {} triangles need {}", bytes.len(), count, expected),
        ));
    }
    if count == 0 {
        return Err(MeshError::Empty);
    }

    let mut vertices: Vec<[f64; 3]> = Vec::with_capacity(count * 3);
    let mut faces: Vec<[u32; 3]> = Vec::with_capacity(count);
    for t in 0..count {
        let base = 84 + t * 50 + 12; // skip the stored normal
        let mut idx = [0u32; 3];
        for (v, slot) in idx.iter_mut().enumerate() {
            let off = base + v * 12;
            let mut coords = [0.0f64; 3];
            for (c, coord) in coords.iter_mut().enumerate() {
                let o = off + c * 4;
                *coord = f32::from_le_bytes(bytes[o..o + 4].try_into().unwrap()) as f64;
            }
            *slot = vertices.len() as u32;
            vertices.push(coords);
        }
        faces.push(idx);
    }
    TriMesh::new(vertices, faces)
}

pub(crate) fn save_obj(mesh: &TriMesh, path: &Path) -> Result<(), MeshError> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    let mut write = || -> std::io::Result<()> {
        for v in mesh.vertices() {
            // Rust's float Display prints the shortest exact round-trip form.
            writeln!(w, "v {} {} {}", v.x, v.y, v.z)?;
        }
        for f in mesh.faces() {
            writeln!(w, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1)?;
        }
        w.flush()
    };
    write().map_err(|e| io_err(path, e))
}

#[cfg(test)]
mod tests {
    use crate::mesh::{shapes, MeshError, TriMesh};
    use std::io::Write;

    #[test]
    fn obj_cube_loads_with_expected_counts() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cube.obj");
        shapes::cube(1.0).save_obj(&path).unwrap();
        let mesh = TriMesh::load(&path).unwrap();
        assert_eq!(mesh.num_vertices(), 8);
        assert_eq!(mesh.num_faces(), 12);
    }

    #[test]
    fn save_load_round_trips_exactly() {
        let dir = tempfile::tempdir().unwrap();
        for (name, mesh) in [
            ("sphere.obj", shapes::icosphere(0.0321, 2)),
            ("torus.obj", shapes::torus(0.03, 0.011, 14, 9)),
        ] {
            let path = dir.path().join(name);
            mesh.save_obj(&path).unwrap();
            let re = TriMesh::load(&path).unwrap();
            assert_eq!(mesh.vertices(), re.vertices());
            assert_eq!(mesh.faces(), re.faces());
        }
    }

    #[test]
    fn stl_duplicate_vertices_merge() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cube.stl");
        let cube = shapes::cube(1.0);
        // Write a binary STL by hand: per-triangle duplicated vertices.
        let mut bytes: Vec<u8> = vec![0; 80];
        bytes.extend_from_slice(&(cube.num_faces() as u32).to_le_bytes());
        for fi in 0..cube.num_faces() {
            let n = cube.face_normals()[fi];
            for c in [n.x, n.y, n.z] {
                bytes.extend_from_slice(&(c as f32).to_le_bytes());
            }
            for v in cube.face_vertices(fi) {
                for c in [v.x, v.y, v.z] {
                    bytes.extend_from_slice(&(c as f32).to_le_bytes());
                }
            }
            bytes.extend_from_slice(&0u16.to_le_bytes());
        }
        std::fs::write(&path, &bytes).unwrap();

        let mesh = TriMesh::load(&path).unwrap();
        assert_eq!(mesh.num_vertices(), 8);
        assert_eq!(mesh.num_faces(), 12);
        assert!(mesh.is_watertight());
    }

    #[test]
    fn truncated_stl_is_a_parse_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.stl");
        let mut f = std::fs::File::create(&path).unwrap();
        f.write_all(&[0u8; 90]).unwrap(); // header + count but no triangles
        drop(f);
        // Patch a nonzero count in.
        let mut bytes = std::fs::read(&path).unwrap();
        bytes[80..84].copy_from_slice(&5u32.to_le_bytes());
        std::fs::write(&path, &bytes).unwrap();
        match TriMesh::load(&path) {
            Err(MeshError::Parse { .. }) => {}
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn bad_obj_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.obj");
        std::fs::write(&path, "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 oops\n").unwrap();
        match TriMesh::load(&path) {
            Err(MeshError::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("expected parse error, got {other:?}"),
        }
    }
}
