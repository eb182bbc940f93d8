//! Injectivity of unsigned space-time sampling: the complement-property
//! oracle, local complementarity, and certificates.

mod certificate;
mod complement;
mod local;

pub use certificate::{
    certify, induced_vector_family, krylov_ranks, Certificate, Finding, FunctionalSet,
    InducedVector, SufficiencyPath, Verdict,
};
pub use complement::{
    complement_property, complement_property_with_budget, distinct_directions,
    does_phaseless_reconstruction, family_rank, AmbiguityPair, CpVerdict, Partition,
    ReconstructionVerdict, CP_MAX_VECTORS, CP_NODE_BUDGET,
};
pub use local::{locally_complementary, LcVerdict, LcWitness, LC_MAX_INDICES};
