//! Bus injection and branch flow models of AC power flow.
//!
//! The crate covers:
//!
//! - [`netmodel`]: networks, case files, graph orientation and spanning-tree indexing;
//! - [`bim`]: admittance operators, bus-injection residuals and the QCQP standard form;
//! - [`bfm`]: branch-flow residuals, the voltage/branch-flow bijection, magnitude
//!   relaxation, implied angle differences and angle recovery;
//! - [`radial`]: DistFlow residuals, a backward/forward sweep solver and the linear
//!   (simplified) DistFlow bounds;
//! - [`pmatrix`]: partial Hermitian matrices, rank-1 completion, chordal extensions and
//!   the block-diagonal SDP standard form;
//! - [`socp`]: a primal-dual interior-point solver for rotated second-order cone programs;
//! - [`relax`]: SOCP relaxations of optimal power flow in both models, exactness checks,
//!   solution recovery and a brute-force reference for tiny instances;
//! - [`cli`]: the command-line front end behind the `opfrelax` binary.

pub mod angle;
pub mod bfm;
pub mod bim;
pub mod cli;
pub mod error;
pub mod generate;
pub mod netmodel;
pub mod pmatrix;
pub mod radial;
pub mod relax;
pub mod socp;

pub use error::{Error, Result};
pub use netmodel::{Bus, DirectedNetwork, Line, Network, Orientation, TreeIndex};
pub use num_complex::Complex64;
