//! Spin Hamiltonians of the NV center and the substitutional-nitrogen bath,
//! their exact and perturbative spectra, and DEER spectrum synthesis.

pub mod deer;
pub mod nitrogen;
pub mod nv;

pub use deer::{p1_deer_spectrum, tilted_field, DeerOptions, DeerSpectrum, LineGroup, SpectralLine};
pub use nitrogen::{
    build_p1_hamiltonian, field_in_jt_frame, p1_transitions, Isotope, JtAxis, NitrogenSpecies,
    P1Transition,
};
pub use nv::{
    build_nv_hamiltonian, nv_levels_exact, nv_transitions_offaxis, nv_transitions_strain,
    nv_transitions_strain_expanded, FieldVector, NvLevels, StrainParams,
};
