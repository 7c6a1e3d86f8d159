//! Power minimization for downlink Cloud-RAN: joint remote-radio-head (RRH)
//! selection and coordinated beamforming.
//!
//! The mixed-integer selection problem is recast exactly by intersecting the
//! unit box with a sphere that carves out its vertices; the resulting
//! continuous program is attacked by dual ascent on the sphere constraint
//! with an inexact majorization-minimization inner loop ([`l2box`]).
//! Baselines: weighted group-sparse beamforming with bisection selection
//! ([`gsbf`]), a rounding heuristic over the box relaxation and two exact
//! approaches - exhaustive enumeration and branch-and-bound ([`mip`]).
//! A Monte-Carlo harness ([`harness`]) runs trials across SINR targets and
//! emits CSV results.

pub mod conic;
mod error;
pub mod gsbf;
pub mod harness;
pub mod l2box;
pub mod mip;
pub mod model;
mod result;

pub use error::Error;
pub use harness::{Algorithm, ExperimentSpec, ResultRecord};
pub use model::{
    check_feasibility, generate_channel, generate_topology, network_power, phase_normalize,
    sinr, sinr_db_to_linear, sphere_residual, Beamformer, Channel, FeasibilityReport, Selection,
    SelectionMode, SystemConfig, Topology,
};
pub use result::{AlgoResult, AlgoStatus, TraceRow};
