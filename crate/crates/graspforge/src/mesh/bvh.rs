//! Flat bounding-volume hierarchy over mesh triangles with all-hit ray
//! traversal and box overlap queries.

use super::TriMesh;
use nalgebra::Vector3;

/// Minimum ray parameter for reported hits; filters self-intersections when
/// rays start on the surface.
pub const RAY_EPSILON: f64 = 1e-7;

const LEAF_SIZE: usize = 4;

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Vector3<f64>,
    pub max: Vector3<f64>,
}

impl Aabb {
    pub fn empty() -> Aabb {
        Aabb {
            min: Vector3::repeat(f64::INFINITY),
            max: Vector3::repeat(f64::NEG_INFINITY),
        }
    }

    pub fn from_points(points: &[Vector3<f64>]) -> Aabb {
        let mut b = Aabb::empty();
        for p in points {
            b.grow(p);
        }
        b
    }

    pub fn grow(&mut self, p: &Vector3<f64>) {
        self.min = self.min.inf(p);
        self.max = self.max.sup(p);
    }

    pub fn union(&self, other: &Aabb) -> Aabb {
        Aabb {
            min: self.min.inf(&other.min),
            max: self.max.sup(&other.max),
        }
    }

    pub fn center(&self) -> Vector3<f64> {
        (self.min + self.max) * 0.5
    }

    pub fn intersects(&self, other: &Aabb) -> bool {
        self.min.x <= other.max.x
            && self.max.x >= other.min.x
            && self.min.y <= other.max.y
            && self.max.y >= other.min.y
            && self.min.z <= other.max.z
            && self.max.z >= other.min.z
    }

    /// Slab test; true if the ray touches the box anywhere in t >= 0.
    fn hit_by_ray(&self, origin: &Vector3<f64>, inv_dir: &Vector3<f64>) -> bool {
        let mut tmin = 0.0f64;
        let mut tmax = f64::INFINITY;
        for axis in 0..3 {
            let t1 = (self.min[axis] - origin[axis]) * inv_dir[axis];
            let t2 = (self.max[axis] - origin[axis]) * inv_dir[axis];
            let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
            // NaN from 0 * inf means the ray is parallel inside the slab.
            if lo.is_nan() || hi.is_nan() {
                if origin[axis] < self.min[axis] || origin[axis] > self.max[axis] {
                    return false;
                }
                continue;
            }
            tmin = tmin.max(lo);
            tmax = tmax.min(hi);
            if tmin > tmax {
                return false;
            }
        }
        true
    }
}

/// A single ray-triangle intersection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayHit {
    pub point: Vector3<f64>,
    pub face_index: u32,
    pub distance: f64,
    pub normal: Vector3<f64>,
}

#[derive(Debug, Clone)]
struct Node {
    aabb: Aabb,
    /// Leaf when `count > 0`: primitives `prims[start..start+count]`.
    /// Interior otherwise: children at `start` and `start + 1` offsets into
    /// the node array (left = start, right = right_child).
    start: u32,
    count: u32,
    right_child: u32,
}

#[derive(Debug, Clone, Default)]
pub(crate) struct Bvh {
    nodes: Vec<Node>,
    prims: Vec<u32>,
}

impl Bvh {
    pub fn build(vertices: &[Vector3<f64>], faces: &[[u32; 3]]) -> Bvh {
        let boxes: Vec<Aabb> = faces
            .iter()
            .map(|f| {
                let mut b = Aabb::empty();
                b.grow(&vertices[f[0] as usize]);
                b.grow(&vertices[f[1] as usize]);
                b.grow(&vertices[f[2] as usize]);
                b
            })
            .collect();
        let mut prims: Vec<u32> = (0..faces.len() as u32).collect();
        let mut nodes = Vec::with_capacity(2 * faces.len());
        build_node(&boxes, &mut prims, 0, faces.len(), &mut nodes);
        Bvh { nodes, prims }
    }

    pub fn raycast(&self, mesh: &TriMesh, origin: &Vector3<f64>, direction: &Vector3<f64>) -> Vec<RayHit> {
        let mut hits = Vec::new();
        if self.nodes.is_empty() {
            return hits;
        }
        let inv_dir = Vector3::new(1.0 / direction.x, 1.0 / direction.y, 1.0 / direction.z);
        let mut stack = vec![0u32];
        while let Some(ni) = stack.pop() {
            let node = &self.nodes[ni as usize];
            if !node.aabb.hit_by_ray(origin, &inv_dir) {
                continue;
            }
            if node.count > 0 {
                for &prim in &self.prims[node.start as usize..(node.start + node.count) as usize] {
                    if let Some(hit) = intersect_triangle(mesh, prim, origin, direction) {
                        hits.push(hit);
                    }
                }
            } else {
                stack.push(node.start);
                stack.push(node.right_child);
            }
        }
        sort_hits(&mut hits);
        hits
    }

    pub fn query_aabb(&self, _mesh: &TriMesh, aabb: &Aabb) -> Vec<u32> {
        let mut out = Vec::new();
        if self.nodes.is_empty() {
            return out;
        }
        let mut stack = vec![0u32];
        while let Some(ni) = stack.pop() {
            let node = &self.nodes[ni as usize];
            if !node.aabb.intersects(aabb) {
                continue;
            }
            if node.count > 0 {
                out.extend_from_slice(
                    &self.prims[node.start as usize..(node.start + node.count) as usize],
                );
            } else {
                stack.push(node.start);
                stack.push(node.right_child);
            }
        }
        out.sort_unstable();
        out
    }
}

fn build_node(boxes: &[Aabb], prims: &mut [u32], offset: usize, len: usize, nodes: &mut Vec<Node>) -> u32 {
    let mut aabb = Aabb::empty();
    for &p in prims[..len].iter() {
        aabb = aabb.union(&boxes[p as usize]);
    }
    let index = nodes.len() as u32;
    if len <= LEAF_SIZE {
        nodes.push(Node {
            aabb,
            start: offset as u32,
            count: len as u32,
            right_child: 0,
        });
        return index;
    }

    // Midpoint split on the longest axis; tie-broken by index so builds are
    // deterministic.
    let extent = aabb.max - aabb.min;
    let axis = if extent.x >= extent.y && extent.x >= extent.z {
        0
    } else if extent.y >= extent.z {
        1
    } else {
        2
    };
    prims[..len].sort_unstable_by(|&a, &b| {
        let ca = boxes[a as usize].center()[axis];
        let cb = boxes[b as usize].center()[axis];
        ca.total_cmp(&cb).then(a.cmp(&b))
    });
    let mid = len / 2;

    nodes.push(Node {
        aabb,
        start: 0,
        count: 0,
        right_child: 0,
    });
    let (left_slice, right_slice) = prims.split_at_mut(mid);
    let left = build_node(boxes, left_slice, offset, mid, nodes);
    let right = build_node(boxes, right_slice, offset + mid, len - mid, nodes);
    nodes[index as usize].start = left;
    nodes[index as usize].right_child = right;
    index
}

/// Moller-Trumbore, double-sided, with a scale-relative parallel guard.
fn intersect_triangle(
    mesh: &TriMesh,
    face: u32,
    origin: &Vector3<f64>,
    direction: &Vector3<f64>,
) -> Option<RayHit> {
    let [a, b, c] = mesh.face_vertices(face as usize);
    let e1 = b - a;
    let e2 = c - a;
    let pvec = direction.cross(&e2);
    let det = e1.dot(&pvec);
    if det.abs() <= 1e-12 * e1.norm() * e2.norm() {
        return None;
    }
    let inv_det = 1.0 / det;
    let tvec = origin - a;
    let u = tvec.dot(&pvec) * inv_det;
    if !(0.0..=1.0).contains(&u) {
        return None;
    }
    let qvec = tvec.cross(&e1);
    let v = direction.dot(&qvec) * inv_det;
    if v < 0.0 || u + v > 1.0 {
        return None;
    }
    let t = e2.dot(&qvec) * inv_det;
    if t <= RAY_EPSILON {
        return None;
    }
    Some(RayHit {
        point: origin + direction * t,
        face_index: face,
        distance: t,
        normal: mesh.face_normals()[face as usize],
    })
}

fn sort_hits(hits: &mut Vec<RayHit>) {
    hits.sort_unstable_by(|a, b| {
        a.distance
            .total_cmp(&b.distance)
            .then(a.face_index.cmp(&b.face_index))
    });
    // Rays through a shared edge or vertex intersect every incident
    // triangle at the same point; keep one hit per geometric intersection.
    hits.dedup_by(|b, a| {
        (a.distance - b.distance).abs() <= 1e-9 && (a.point - b.point).norm() <= 1e-9
    });
}

pub(crate) fn raycast_brute(
    mesh: &TriMesh,
    origin: &Vector3<f64>,
    direction: &Vector3<f64>,
) -> Vec<RayHit> {
    let mut hits: Vec<RayHit> = (0..mesh.num_faces() as u32)
        .filter_map(|f| intersect_triangle(mesh, f, origin, direction))
        .collect();
    sort_hits(&mut hits);
    hits
}

#[cfg(test)]
mod tests {
    use crate::mesh::shapes;
    use nalgebra::Vector3;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn vertical_ray_through_cube() {
        let cube = shapes::cube(1.0);
        let hits = cube.raycast(&Vector3::new(0.0, 0.0, 2.0), &Vector3::new(0.0, 0.0, -1.0));
        assert_eq!(hits.len(), 2);
        assert!((hits[0].point.z - 0.5).abs() < 1e-12);
        assert!((hits[1].point.z + 0.5).abs() < 1e-12);
        assert!(hits[0].distance < hits[1].distance);
    }

    #[test]
    fn missing_ray_is_empty() {
        let cube = shapes::cube(1.0);
        let hits = cube.raycast(&Vector3::new(3.0, 3.0, 2.0), &Vector3::new(0.0, 0.0, -1.0));
        assert!(hits.is_empty());
    }

    #[test]
    fn hit_point_matches_parametric_form() {
        let sphere = shapes::icosphere(0.04, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let origin = Vector3::new(
                rng.random_range(-0.2..0.2),
                rng.random_range(-0.2..0.2),
                rng.random_range(-0.2..0.2),
            );
            let dir = Vector3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            )
            .normalize();
            for hit in sphere.raycast(&origin, &dir) {
                let recon = origin + dir * hit.distance;
                assert!((recon - hit.point).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn bvh_matches_brute_force() {
        let meshes = [
            shapes::cube(0.05),
            shapes::icosphere(0.03, 3),
            shapes::cylinder(0.02, 0.08, 32),
            shapes::torus(0.03, 0.01, 24, 12),
            shapes::l_bracket(0.06, 0.04, 0.015, 0.03),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for mesh in &meshes {
            for _ in 0..2000 {
                let origin = Vector3::new(
                    rng.random_range(-0.1..0.1),
                    rng.random_range(-0.1..0.1),
                    rng.random_range(-0.1..0.1),
                );
                let dir = Vector3::new(
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                );
                if dir.norm() < 1e-6 {
                    continue;
                }
                let dir = dir.normalize();
                let fast = mesh.raycast(&origin, &dir);
                let brute = mesh.raycast_brute(&origin, &dir);
                assert_eq!(fast.len(), brute.len());
                for (f, b) in fast.iter().zip(brute.iter()) {
                    assert_eq!(f.face_index, b.face_index);
                    assert_eq!(f.distance, b.distance);
                }
            }
        }
    }
}
