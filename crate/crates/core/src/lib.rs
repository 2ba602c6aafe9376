//! Exact and certified arithmetic dynamics on the projective line over Q.
//!
//! The crate computes homogeneous resultants and minimal resultants of
//! rational maps, the places of bad reduction, local and canonical heights,
//! Arakelov-Green pairings, and the enumeration experiments built on them.

pub mod arith;
pub mod canonical;
pub mod census;
pub mod certified;
pub mod error;
pub mod local;
pub mod maps;
pub mod reduction;

pub use error::{Error, Result};
pub use maps::{
    apply_map, conjugate, evaluate_lift, milnor_invariants, normalized_resultant_abs,
    sylvester_resultant, BinaryForm, HomogeneousLift, MilnorInvariants, Mobius, Place, ProjPoint,
};
pub use certified::CertifiedValue;
pub use canonical::{canonical_height, weil_height, HeightBreakdown};
pub use local::{escape_radius, green_pairing, hom_local_height, step_error_constants, verify_escape};
pub use reduction::{bad_places, h_res, minimal_resultant_ord};
