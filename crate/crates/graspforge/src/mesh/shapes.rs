//! Watertight primitive meshes used for tests, demos, and benchmark corpora.
//!
//! All dimensions are meters and all shapes are centered on the origin with
//! outward-facing normals.

use super::TriMesh;
use std::collections::HashMap;
use std::f64::consts::PI;

/// Axis-aligned cube with edge length `size` (8 vertices, 12 triangles).
pub fn cube(size: f64) -> TriMesh {
    box_mesh(size, size, size)
}

/// Axis-aligned box with the given extents.
pub fn box_mesh(sx: f64, sy: f64, sz: f64) -> TriMesh {
    let (hx, hy, hz) = (sx / 2.0, sy / 2.0, sz / 2.0);
    let vertices = vec![
        [-hx, -hy, -hz],
        [hx, -hy, -hz],
        [hx, hy, -hz],
        [-hx, hy, -hz],
        [-hx, -hy, hz],
        [hx, -hy, hz],
        [hx, hy, hz],
        [-hx, hy, hz],
    ];
    let faces = vec![
        [0, 2, 1],
        [0, 3, 2], // -z
        [4, 5, 6],
        [4, 6, 7], // +z
        [0, 1, 5],
        [0, 5, 4], // -y
        [2, 3, 7],
        [2, 7, 6], // +y
        [1, 2, 6],
        [1, 6, 5], // +x
        [3, 0, 4],
        [3, 4, 7], // -x
    ];
    TriMesh::new(vertices, faces).expect("box is valid")
}

/// Cube with each face split into an n x n grid (12 n^2 triangles).
pub fn subdivided_cube(size: f64, n: usize) -> TriMesh {
    let h = size / 2.0;
    let n = n.max(1);
    let mut vertices: Vec<[f64; 3]> = Vec::new();
    let mut faces: Vec<[u32; 3]> = Vec::new();
    // For each face: origin corner, two edge vectors. Winding chosen so
    // normals point outward.
    let face_frames: [([f64; 3], [f64; 3], [f64; 3]); 6] = [
        ([-h, -h, h], [size, 0.0, 0.0], [0.0, size, 0.0]),   // +z
        ([-h, h, -h], [size, 0.0, 0.0], [0.0, -size, 0.0]),  // -z
        ([h, -h, -h], [0.0, size, 0.0], [0.0, 0.0, size]),   // +x
        ([-h, -h, -h], [0.0, 0.0, size], [0.0, size, 0.0]),  // -x
        ([-h, h, -h], [0.0, 0.0, size], [size, 0.0, 0.0]),   // +y
        ([-h, -h, -h], [size, 0.0, 0.0], [0.0, 0.0, size]),  // -y
    ];
    for (origin, eu, ev) in face_frames {
        let base = vertices.len() as u32;
        for j in 0..=n {
            for i in 0..=n {
                let (s, t) = (i as f64 / n as f64, j as f64 / n as f64);
                vertices.push([
                    origin[0] + eu[0] * s + ev[0] * t,
                    origin[1] + eu[1] * s + ev[1] * t,
                    origin[2] + eu[2] * s + ev[2] * t,
                ]);
            }
        }
        let stride = (n + 1) as u32;
        for j in 0..n as u32 {
            for i in 0..n as u32 {
                let v00 = base + j * stride + i;
                let v10 = v00 + 1;
                let v01 = v00 + stride;
                let v11 = v01 + 1;
                faces.push([v00, v10, v11]);
                faces.push([v00, v11, v01]);
            }
        }
    }
    TriMesh::new(vertices, faces).expect("subdivided cube is valid")
}

/// Icosphere: icosahedron subdivided `subdivisions` times and projected to
/// the sphere (20 * 4^s triangles).
pub fn icosphere(radius: f64, subdivisions: usize) -> TriMesh {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let mut verts: Vec<[f64; 3]> = vec![
        [-1.0, phi, 0.0],
        [1.0, phi, 0.0],
        [-1.0, -phi, 0.0],
        [1.0, -phi, 0.0],
        [0.0, -1.0, phi],
        [0.0, 1.0, phi],
        [0.0, -1.0, -phi],
        [0.0, 1.0, -phi],
        [phi, 0.0, -1.0],
        [phi, 0.0, 1.0],
        [-phi, 0.0, -1.0],
        [-phi, 0.0, 1.0],
    ];
    for v in verts.iter_mut() {
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        *v = [v[0] / n * radius, v[1] / n * radius, v[2] / n * radius];
    }
    let mut faces: Vec<[u32; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];

    for _ in 0..subdivisions {
        let mut midpoints: HashMap<(u32, u32), u32> = HashMap::new();
        let mut next: Vec<[u32; 3]> = Vec::with_capacity(faces.len() * 4);
        let mut midpoint = |a: u32, b: u32, verts: &mut Vec<[f64; 3]>| -> u32 {
            let key = (a.min(b), a.max(b));
            if let Some(&m) = midpoints.get(&key) {
                return m;
            }
            let pa = verts[a as usize];
            let pb = verts[b as usize];
            let mut m = [
                (pa[0] + pb[0]) / 2.0,
                (pa[1] + pb[1]) / 2.0,
                (pa[2] + pb[2]) / 2.0,
            ];
            let n = (m[0] * m[0] + m[1] * m[1] + m[2] * m[2]).sqrt();
            m = [m[0] / n * radius, m[1] / n * radius, m[2] / n * radius];
            let idx = verts.len() as u32;
            verts.push(m);
            midpoints.insert(key, idx);
            idx
        };
        for f in &faces {
            let ab = midpoint(f[0], f[1], &mut verts);
            let bc = midpoint(f[1], f[2], &mut verts);
            let ca = midpoint(f[2], f[0], &mut verts);
            next.push([f[0], ab, ca]);
            next.push([f[1], bc, ab]);
            next.push([f[2], ca, bc]);
            next.push([ab, bc, ca]);
        }
        faces = next;
    }
    TriMesh::new(verts, faces).expect("icosphere is valid")
}

/// Closed cylinder along z with fan caps (4 * segments triangles).
pub fn cylinder(radius: f64, height: f64, segments: usize) -> TriMesh {
    let n = segments.max(3);
    let h = height / 2.0;
    let mut vertices: Vec<[f64; 3]> = Vec::with_capacity(2 * n + 2);
    for ring_z in [-h, h] {
        for i in 0..n {
            let a = 2.0 * PI * i as f64 / n as f64;
            vertices.push([radius * a.cos(), radius * a.sin(), ring_z]);
        }
    }
    let bottom_center = vertices.len() as u32;
    vertices.push([0.0, 0.0, -h]);
    let top_center = vertices.len() as u32;
    vertices.push([0.0, 0.0, h]);

    let mut faces: Vec<[u32; 3]> = Vec::with_capacity(4 * n);
    for i in 0..n as u32 {
        let j = (i + 1) % n as u32;
        let (b0, b1) = (i, j);
        let (t0, t1) = (i + n as u32, j + n as u32);
        faces.push([b0, b1, t1]);
        faces.push([b0, t1, t0]);
        faces.push([bottom_center, b1, b0]);
        faces.push([top_center, t0, t1]);
    }
    TriMesh::new(vertices, faces).expect("cylinder is valid")
}

/// Hexagonal prism along z: flat-to-flat distance 2 * apothem, circumradius
/// `radius` across corners.
pub fn hex_prism(radius: f64, height: f64) -> TriMesh {
    let h = height / 2.0;
    let mut vertices: Vec<[f64; 3]> = Vec::new();
    for ring_z in [-h, h] {
        for i in 0..6 {
            let a = 2.0 * PI * i as f64 / 6.0;
            vertices.push([radius * a.cos(), radius * a.sin(), ring_z]);
        }
    }
    let bottom_center = vertices.len() as u32;
    vertices.push([0.0, 0.0, -h]);
    let top_center = vertices.len() as u32;
    vertices.push([0.0, 0.0, h]);

    let mut faces: Vec<[u32; 3]> = Vec::new();
    for i in 0..6u32 {
        let j = (i + 1) % 6;
        let (b0, b1) = (i, j);
        let (t0, t1) = (i + 6, j + 6);
        faces.push([b0, b1, t1]);
        faces.push([b0, t1, t0]);
        faces.push([bottom_center, b1, b0]);
        faces.push([top_center, t0, t1]);
    }
    TriMesh::new(vertices, faces).expect("hex prism is valid")
}

/// Torus around the z axis: major radius to tube center, tube radius minor
/// (2 * major_segments * minor_segments triangles).
pub fn torus(major_radius: f64, minor_radius: f64, major_segments: usize, minor_segments: usize) -> TriMesh {
    let (nu, nv) = (major_segments.max(3), minor_segments.max(3));
    let mut vertices: Vec<[f64; 3]> = Vec::with_capacity(nu * nv);
    for i in 0..nu {
        let u = 2.0 * PI * i as f64 / nu as f64;
        for j in 0..nv {
            let v = 2.0 * PI * j as f64 / nv as f64;
            let ring = major_radius + minor_radius * v.cos();
            vertices.push([ring * u.cos(), ring * u.sin(), minor_radius * v.sin()]);
        }
    }
    let mut faces: Vec<[u32; 3]> = Vec::with_capacity(2 * nu * nv);
    for i in 0..nu as u32 {
        let i2 = (i + 1) % nu as u32;
        for j in 0..nv as u32 {
            let j2 = (j + 1) % nv as u32;
            let v00 = i * nv as u32 + j;
            let v01 = i * nv as u32 + j2;
            let v10 = i2 * nv as u32 + j;
            let v11 = i2 * nv as u32 + j2;
            faces.push([v00, v10, v11]);
            faces.push([v00, v11, v01]);
        }
    }
    TriMesh::new(vertices, faces).expect("torus is valid")
}

/// L-shaped bracket: an L cross-section in the xz plane extruded along y.
/// `leg_x`/`leg_z` are the outer leg lengths, `thickness` the leg thickness,
/// `width` the extrusion depth (20 triangles).
pub fn l_bracket(leg_x: f64, leg_z: f64, thickness: f64, width: f64) -> TriMesh {
    let w = width / 2.0;
    // L outline, counterclockwise in the xz plane, centered near the corner.
    let outline = [
        (0.0, 0.0),
        (leg_x, 0.0),
        (leg_x, thickness),
        (thickness, thickness),
        (thickness, leg_z),
        (0.0, leg_z),
    ];
    // Center the solid roughly on the origin.
    let (cx, cz) = (leg_x / 2.0, leg_z / 2.0);
    let mut vertices: Vec<[f64; 3]> = Vec::with_capacity(12);
    for y in [-w, w] {
        for (x, z) in outline {
            vertices.push([x - cx, y, z - cz]);
        }
    }
    // Cap triangulation: the L splits into two rectangles:
    // (0,1,2,3) and (0,3,4,5) in outline indices.
    let cap = [[0, 1, 2], [0, 2, 3], [0, 3, 4], [0, 4, 5]];
    let mut faces: Vec<[u32; 3]> = Vec::with_capacity(20);
    for tri in cap {
        // -y cap faces outward along -y: clockwise when viewed from +y.
        faces.push([tri[0], tri[2], tri[1]]);
        // +y cap.
        faces.push([tri[0] + 6, tri[1] + 6, tri[2] + 6]);
    }
    for i in 0..6u32 {
        let j = (i + 1) % 6;
        let (a0, a1) = (i, j);
        let (b0, b1) = (i + 6, j + 6);
        faces.push([a0, a1, b1]);
        faces.push([a0, b1, b0]);
    }
    TriMesh::new(vertices, faces).expect("bracket is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_shapes_watertight_and_outward() {
        let shapes: Vec<(&str, TriMesh)> = vec![
            ("cube", cube(0.05)),
            ("subdiv_cube", subdivided_cube(0.05, 4)),
            ("icosphere", icosphere(0.03, 3)),
            ("cylinder", cylinder(0.02, 0.08, 32)),
            ("hex_prism", hex_prism(0.015, 0.04)),
            ("torus", torus(0.03, 0.01, 24, 12)),
            ("l_bracket", l_bracket(0.06, 0.04, 0.015, 0.03)),
        ];
        for (name, mesh) in shapes {
            assert!(mesh.is_watertight(), "{name} not watertight");
            assert!(mesh.signed_volume() > 0.0, "{name} wound inward");
        }
    }

    #[test]
    fn icosphere_face_count() {
        assert_eq!(icosphere(0.03, 0).num_faces(), 20);
        assert_eq!(icosphere(0.03, 3).num_faces(), 1280);
    }

    #[test]
    fn cylinder_volume_approximates_analytic() {
        let m = cylinder(0.02, 0.08, 128);
        let analytic = PI * 0.02f64.powi(2) * 0.08;
        assert!((m.signed_volume() - analytic).abs() / analytic < 0.01);
    }

    #[test]
    fn l_bracket_volume_is_sum_of_legs() {
        let m = l_bracket(0.06, 0.04, 0.015, 0.03);
        let expected = (0.06 * 0.015 + (0.04 - 0.015) * 0.015) * 0.03;
        assert!((m.signed_volume() - expected).abs() < 1e-12);
    }
}
