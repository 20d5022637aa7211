//! Local bifurcations of periodic orbits in delay differential equations,
//! computed in the frequency domain.
//!
//! A DDE `x' = f(x, x(t - tau), mu)` is written as a linear system closed
//! through a nonlinearity `g` acting on the output `y = -C x`. From that
//! feedback form the crate
//!
//! * locates Hopf points where a characteristic function of the linear
//!   transfer function `GJ(i omega)` crosses `-1` ([`hopf`]),
//! * runs the graded harmonic-balance recursion that yields the
//!   bifurcation equation `lambda + 1 + sum theta^(2k) xi_k = 0`
//!   ([`hbalance`]),
//! * expands it into amplitude and frequency parametrizations
//!   ([`bifexpand`]) and classifies the resulting normal forms and their
//!   transition varieties ([`singclass`]),
//! * and checks predicted cycles against a direct DDE integrator
//!   ([`ddesim`]).
//!
//! Two reference systems ship with the crate in [`builtin`].

pub mod bifexpand;
pub mod builtin;
pub mod cli;
pub mod ddesim;
mod error;
pub mod hbalance;
pub mod hopf;
pub mod model;
pub mod numcore;
pub mod singclass;
pub mod transfer;

pub use error::{Error, Result};
pub use model::{Aux, Params, Realization};
pub use num_complex::Complex64;
