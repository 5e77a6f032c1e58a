//! Force-constrained deformable registration for pairs of 2-D ultrasound
//! frames acquired under different probe contact forces.
//!
//! The engine estimates a per-pixel stiffness map `K` such that the
//! displacement `D = K * ΔF` warps the moving frame onto the target frame,
//! where `ΔF` is a normalized, signed contact-force differential. It also
//! ships a synthetic phantom generator with exact ground truth, the usual
//! registration metrics, a flow colour renderer, and file I/O plus a
//! benchmark harness used by the `forcereg` binary.

pub mod cli;
pub mod error;
pub mod field;
pub mod flowviz;
pub mod force;
pub mod io;
pub mod metrics;
pub mod optim;
pub mod phantom;
pub mod physics;
pub mod solver;
pub mod warp;

pub use error::{Error, Result};
pub use field::{GridPoint, ScalarField, VectorField};
pub use force::{delta_force, DeltaForceVariant, ForcePair};
pub use metrics::{LabelMask, MetricReport};
pub use phantom::{PhantomConfig, PhantomScene};
pub use physics::{deformation_from_stiffness, DeformationModel, ModelKind, StiffnessMap};
pub use solver::{register_pair, RegistrationResult, SolverConfig};
