//! Calculus of field maps: substitution, differences, products and the
//! generalized Young inequality.

mod difference;
mod product;
mod substitution;
mod young;

pub use difference::{difference, difference_map, substituted_difference};
pub use product::pointwise_product;
pub use substitution::{ball_norm, check_lipschitz, insert_gamma, substitute_function, substitute_map};
pub(crate) use substitution::{substitute_slots, SlotInput};
pub use young::{generalized_young, measure_lp_norm, DiscreteKernel, YoungReport};
