//! Tube-and-droplet trajectory representation.
//!
//! A scene's trajectories define a *thermal transfer field* of per-cell,
//! per-direction propagation coefficients. Diffusing energy from each point of
//! a trajectory through that field and cutting the result at half energy
//! gives an equipotential line per point; stacked over time these form a
//! *tube*. Flowing a virtual droplet through the tube yields a fixed-length
//! *droplet vector* used for clustering, classification, abnormality
//! detection and (in 3D) skeleton action recognition.

pub mod action3d;
pub mod analysis;
pub mod diffusion;
pub mod droplet;
pub mod error;
pub mod experiment;
pub mod export;
pub mod field;
pub mod grid;
pub mod io;
mod par;
pub mod pipeline;
pub mod synth;
pub mod trajectory;
pub mod tube;

pub use diffusion::{
    diffuse, extract_equipotential, DiffusionOptions, Diffuser, EquipotentialLine, NeighborRule, ThermalDiffusionMap,
};
pub use droplet::{abnormality_score, droplet_vector, flow_droplet, Droplet, DropletParams};
pub use error::{Error, Result};
pub use field::{
    build_transfer_field, density_field, directional_velocity_field, transfer_objective, FieldParams, KernelOptions,
    ScalarField, ThermalTransferField, VolumetricField,
};
pub use grid::{Direction, Grid, SceneGrid, VolumeGrid};
pub use trajectory::{corrupt, resample, CorruptMode, Trajectory, Trajectory3, TrajectorySet};
pub use tube::{build_tube, tube_mesh, MapCache, Tube, TubeBuilder, TubeMesh};
pub use pipeline::{Pipeline, RunConfig};
