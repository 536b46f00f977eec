//! Continued fractions and rational approximation of irrationals.

pub mod cf;
pub mod spec;

pub use cf::{
    cf_expand, cf_of_rational, convergents, convergents_of, convergents_up_to, dirichlet_approx,
    estimate_type, Convergent, TypeEstimate,
};
pub use spec::{format_decimal, parse_decimal, parse_rational, IrrationalSpec};
