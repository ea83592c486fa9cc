//! Linear-optical preparation of high-dimensional Dicke states by
//! postselection: Fock-space states, passive interferometers, exact
//! evolution, heralded projection and closed-form success probabilities.

pub mod error;
pub mod evolve;
pub mod fock;
pub mod formulas;
pub mod interferometer;
pub mod postselect;
pub mod schemes;
pub mod verify;

pub use error::{Error, Result};
pub use evolve::{apply_transfer, apply_transfer_bounded, transition_amplitude, Bunching};
pub use fock::{FockState, ModeLabel, OccupationVector};
pub use interferometer::TransferMatrix;
pub use num_complex::Complex64;
pub use postselect::{
    dicke, extract_qudits, fidelity, project, DickeSpec, PostselectionPattern, Projection,
    QuditState,
};
pub use schemes::{build_scheme, run, simulate, RunReport, SchemeKind, SchemeSpec};
