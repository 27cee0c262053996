//! Object-centric parallel-jaw grasp dataset generation.
//!
//! The pipeline turns watertight triangle meshes into per-object grasp
//! records: antipodal candidate sampling on the original and a decimated
//! copy of each mesh, gripper collision filtering, agglomerative clustering
//! in SE(3) with representative selection, quasi-static wrench-space
//! robustness evaluation, and a compact binary dataset format.

pub mod geom;
pub mod mesh;
