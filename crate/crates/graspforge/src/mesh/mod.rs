//! Triangle-mesh ingestion, validation, sampling, ray casting, and decimation.

mod bvh;
mod decimate;
mod io;
mod sample;
pub mod shapes;

pub use bvh::{Aabb, RayHit};
pub use sample::SurfaceSample;

use nalgebra::Vector3;
use std::collections::HashMap;
use std::path::PathBuf;
use thiserror::Error;

pub(crate) use bvh::Bvh;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("parse error at {path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("mesh has no faces after cleanup")]
    Empty,
    #[error("face {face} references vertex {index} out of {count}")]
    IndexOutOfRange {
        face: usize,
        index: u32,
        count: usize,
    },
    #[error("unsupported mesh format: {0}")]
    UnsupportedFormat(String),
    #[error("decimation requires a watertight mesh")]
    DecimationNeedsWatertight,
    #[error("decimation to factor {factor} failed: reached {achieved} of {original} faces")]
    DecimationFailed {
        factor: f64,
        achieved: usize,
        original: usize,
    },
}

/// Mesh structural statistics used for corpus diversity reporting.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DiversityStats {
    pub num_triangles: usize,
    pub num_vertices: usize,
    pub edge_length_mean: f64,
    pub edge_length_std: f64,
}

/// Indexed triangle surface with per-face normals and a ray acceleration
/// structure. Immutable after construction; all queries are read-only.
#[derive(Debug, Clone)]
pub struct TriMesh {
    vertices: Vec<Vector3<f64>>,
    faces: Vec<[u32; 3]>,
    face_normals: Vec<Vector3<f64>>,
    bvh: Bvh,
}

const MERGE_QUANTUM: f64 = 1e-9;

impl TriMesh {
    /// Builds a mesh from raw arrays: merges duplicate vertices at 1e-9,
    /// drops degenerate faces, computes normals, and builds the BVH.
    ///
    /// If the cleaned mesh is closed and its signed volume is negative the
    /// face winding is flipped so normals point outward.
    pub fn new(vertices: Vec<[f64; 3]>, faces: Vec<[u32; 3]>) -> Result<TriMesh, MeshError> {
        for (fi, f) in faces.iter().enumerate() {
            for &idx in f {
                if idx as usize >= vertices.len() {
                    return Err(MeshError::IndexOutOfRange {
                        face: fi,
                        index: idx,
                        count: vertices.len(),
                    });
                }
            }
        }

        // Merge vertices that quantize to the same 1e-9 cell, first-seen wins.
        let mut remap = vec![0u32; vertices.len()];
        let mut merged: Vec<Vector3<f64>> = Vec::with_capacity(vertices.len());
        let mut cells: HashMap<(i64, i64, i64), u32> = HashMap::with_capacity(vertices.len());
        for (i, v) in vertices.iter().enumerate() {
            let key = (
                (v[0] / MERGE_QUANTUM).round() as i64,
                (v[1] / MERGE_QUANTUM).round() as i64,
                (v[2] / MERGE_QUANTUM).round() as i64,
            );
            let next = merged.len() as u32;
            let id = *cells.entry(key).or_insert(next);
            if id == next {
                merged.push(Vector3::new(v[0], v[1], v[2]));
            }
            remap[i] = id;
        }

        let mut clean_faces: Vec<[u32; 3]> = Vec::with_capacity(faces.len());
        for f in &faces {
            let g = [remap[f[0] as usize], remap[f[1] as usize], remap[f[2] as usize]];
            if g[0] == g[1] || g[1] == g[2] || g[0] == g[2] {
                continue;
            }
            if face_cross(&merged, &g).norm() <= degenerate_cross_threshold(&merged, &g) {
                continue;
            }
            clean_faces.push(g);
        }
        if clean_faces.is_empty() {
            return Err(MeshError::Empty);
        }

        let mut mesh = TriMesh {
            vertices: merged,
            faces: clean_faces,
            face_normals: Vec::new(),
            bvh: Bvh::default(),
        };
        if mesh.is_watertight() && mesh.signed_volume() < 0.0 {
            for f in &mut mesh.faces {
                f.swap(1, 2);
            }
        }
        mesh.face_normals = mesh
            .faces
            .iter()
            .map(|f| face_cross(&mesh.vertices, f).normalize())
            .collect();
        mesh.bvh = Bvh::build(&mesh.vertices, &mesh.faces);
        Ok(mesh)
    }

    pub fn vertices(&self) -> &[Vector3<f64>] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[u32; 3]] {
        &self.faces
    }

    pub fn face_normals(&self) -> &[Vector3<f64>] {
        &self.face_normals
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn face_vertices(&self, face: usize) -> [Vector3<f64>; 3] {
        let f = self.faces[face];
        [
            self.vertices[f[0] as usize],
            self.vertices[f[1] as usize],
            self.vertices[f[2] as usize],
        ]
    }

    pub fn face_area(&self, face: usize) -> f64 {
        0.5 * face_cross(&self.vertices, &self.faces[face]).norm()
    }

    pub fn total_area(&self) -> f64 {
        (0..self.faces.len()).map(|f| self.face_area(f)).sum()
    }

    pub fn aabb(&self) -> Aabb {
        Aabb::from_points(&self.vertices)
    }

    /// True iff every edge is shared by exactly two faces with opposite
    /// orientation. Disjoint closed components still count as watertight.
    pub fn is_watertight(&self) -> bool {
        let mut edges: HashMap<(u32, u32), (u32, u32)> = HashMap::new();
        for f in &self.faces {
            for (a, b) in [(f[0], f[1]), (f[1], f[2]), (f[2], f[0])] {
                let key = (a.min(b), a.max(b));
                let entry = edges.entry(key).or_insert((0, 0));
                if a < b {
                    entry.0 += 1;
                } else {
                    entry.1 += 1;
                }
            }
        }
        edges.values().all(|&(fwd, bwd)| fwd == 1 && bwd == 1)
    }

    /// Signed volume via the divergence theorem; positive for outward winding.
    pub fn signed_volume(&self) -> f64 {
        self.faces
            .iter()
            .map(|f| {
                let a = self.vertices[f[0] as usize];
                let b = self.vertices[f[1] as usize];
                let c = self.vertices[f[2] as usize];
                a.cross(&b).dot(&c) / 6.0
            })
            .sum()
    }

    /// Volume centroid of the enclosed solid. Requires a watertight mesh to
    /// be meaningful.
    pub fn volume_centroid(&self) -> Vector3<f64> {
        let mut vol = 0.0;
        let mut acc = Vector3::zeros();
        for f in &self.faces {
            let a = self.vertices[f[0] as usize];
            let b = self.vertices[f[1] as usize];
            let c = self.vertices[f[2] as usize];
            let v = a.cross(&b).dot(&c) / 6.0;
            vol += v;
            acc += (a + b + c) / 4.0 * v;
        }
        if vol.abs() < 1e-18 {
            // Fall back to the vertex mean for pathological inputs.
            return self.vertices.iter().sum::<Vector3<f64>>() / self.vertices.len() as f64;
        }
        acc / vol
    }

    /// Radius of the sphere centered at `center` that encloses all vertices.
    pub fn bounding_radius(&self, center: &Vector3<f64>) -> f64 {
        self.vertices
            .iter()
            .map(|v| (v - center).norm())
            .fold(0.0, f64::max)
    }

    /// Returns a copy with all vertex coordinates multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> TriMesh {
        let vertices = self
            .vertices
            .iter()
            .map(|v| [v.x * factor, v.y * factor, v.z * factor])
            .collect();
        TriMesh::new(vertices, self.faces.clone()).expect("scaling preserves validity")
    }

    /// All ray intersections beyond 1e-7 from the origin, ascending by
    /// distance. `direction` must be unit length.
    pub fn raycast(&self, origin: &Vector3<f64>, direction: &Vector3<f64>) -> Vec<RayHit> {
        self.bvh.raycast(self, origin, direction)
    }

    /// Brute-force variant of [`TriMesh::raycast`] that tests every triangle.
    pub fn raycast_brute(&self, origin: &Vector3<f64>, direction: &Vector3<f64>) -> Vec<RayHit> {
        bvh::raycast_brute(self, origin, direction)
    }

    /// Indices of faces whose bounding boxes intersect `aabb`.
    pub fn faces_in_aabb(&self, aabb: &Aabb) -> Vec<u32> {
        self.bvh.query_aabb(self, aabb)
    }

    /// Point containment by ray parity, majority-voted over three fixed
    /// directions to tolerate edge grazing.
    pub fn contains_point(&self, point: &Vector3<f64>) -> bool {
        // Irrational-ish directions make axis/edge alignment unlikely.
        let dirs = [
            Vector3::new(0.577_350_269, 0.577_350_269, 0.577_350_269),
            Vector3::new(0.851_776_3, -0.489_125_2, 0.186_345_1),
            Vector3::new(-0.267_261_2, 0.534_522_4, -0.801_783_7),
        ];
        let mut inside_votes = 0;
        for d in dirs {
            let hits = self.raycast(point, &d.normalize());
            if hits.len() % 2 == 1 {
                inside_votes += 1;
            }
        }
        inside_votes >= 2
    }

    /// `n` area-weighted uniform surface samples, deterministic per seed.
    pub fn sample_surface(&self, n: usize, seed: u64) -> Vec<SurfaceSample> {
        sample::sample_surface(self, n, seed)
    }

    /// Quadric-edge-collapse decimation targeting `factor` of the original
    /// face count. The result stays watertight; fails if the target cannot
    /// be reached without breaking the closed manifold.
    pub fn decimate(&self, factor: f64) -> Result<TriMesh, MeshError> {
        decimate::decimate(self, factor)
    }

    pub fn diversity_stats(&self) -> DiversityStats {
        let mut edges: Vec<(u32, u32)> = Vec::with_capacity(self.faces.len() * 3);
        for f in &self.faces {
            for (a, b) in [(f[0], f[1]), (f[1], f[2]), (f[2], f[0])] {
                edges.push((a.min(b), a.max(b)));
            }
        }
        edges.sort_unstable();
        edges.dedup();
        let lengths: Vec<f64> = edges
            .iter()
            .map(|&(a, b)| (self.vertices[a as usize] - self.vertices[b as usize]).norm())
            .collect();
        let mean = lengths.iter().sum::<f64>() / lengths.len() as f64;
        let var = lengths.iter().map(|l| (l - mean) * (l - mean)).sum::<f64>() / lengths.len() as f64;
        DiversityStats {
            num_triangles: self.faces.len(),
            num_vertices: self.vertices.len(),
            edge_length_mean: mean,
            edge_length_std: var.sqrt(),
        }
    }

    /// Loads an OBJ (ASCII) or binary STL mesh, chosen by file extension.
    pub fn load(path: impl AsRef<std::path::Path>) -> Result<TriMesh, MeshError> {
        io::load_mesh(path.as_ref())
    }

    /// Writes the mesh as ASCII OBJ. Float formatting round-trips exactly.
    pub fn save_obj(&self, path: impl AsRef<std::path::Path>) -> Result<(), MeshError> {
        io::save_obj(self, path.as_ref())
    }
}

pub(crate) fn face_cross(vertices: &[Vector3<f64>], face: &[u32; 3]) -> Vector3<f64> {
    let a = vertices[face[0] as usize];
    let b = vertices[face[1] as usize];
    let c = vertices[face[2] as usize];
    (b - a).cross(&(c - a))
}

fn degenerate_cross_threshold(vertices: &[Vector3<f64>], face: &[u32; 3]) -> f64 {
    let a = vertices[face[0] as usize];
    let b = vertices[face[1] as usize];
    let c = vertices[face[2] as usize];
    1e-12 * (b - a).norm() * (c - a).norm()
}
