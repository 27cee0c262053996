//! Area-weighted uniform surface sampling.

use super::TriMesh;
use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A point on the mesh surface with its outward face normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceSample {
    pub point: Vector3<f64>,
    pub normal: Vector3<f64>,
    pub face_index: u32,
}

pub(crate) fn sample_surface(mesh: &TriMesh, n: usize, seed: u64) -> Vec<SurfaceSample> {
    let mut cumulative = Vec::with_capacity(mesh.num_faces());
    let mut total = 0.0;
    for f in 0..mesh.num_faces() {
        total += mesh.face_area(f);
        cumulative.push(total);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let target = rng.random::<f64>() * total;
        let face = cumulative.partition_point(|&c| c < target).min(mesh.num_faces() - 1);
        let [a, b, c] = mesh.face_vertices(face);
        // Uniform barycentric point via the square-root warp.
        let su = rng.random::<f64>().sqrt();
        let v = rng.random::<f64>();
        let point = a * (1.0 - su) + b * (su * (1.0 - v)) + c * (su * v);
        out.push(SurfaceSample {
            point,
            normal: mesh.face_normals()[face],
            face_index: face as u32,
        });
    }
    out
}
