//! Truncated multimode Fock space: states, operators and measurements.

mod beam_splitter;
mod coherence;
mod ops;
mod povm;
mod space;
mod state;

pub use num_complex::Complex64 as C64;

pub use beam_splitter::beam_splitter_2mode;
pub use coherence::{coherence_summary, CoherenceSummary, Expectation};
pub use ops::{
    apply_mode, conjugate_by_modes, default_pad, displacement_matrix, embed_operator, ladder, lower, raise,
    real_displacement, Displacement, DISPLACEMENT_BOUNDARY_TOL,
};
pub use povm::{excitation_povm, joint_parity_operator, per_mode_parity_povm, joint_parity_povm, Povm, PovmKind};
pub use space::ModeSpace;
pub use state::{
    cat_gamma_for_mean, cutoff_for, make_single_mode_state, multimode_cat, parity_of_state, product_state,
    DensityOp, Parity, PureState, StateSpec, DEFAULT_LEAKAGE_TOL,
};
