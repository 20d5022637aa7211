//! Numerical building blocks shared by the rest of the crate: complex
//! dense linear algebra, Newton root solving, truncated power series and
//! least-squares polynomial fitting.

mod fit;
mod jet;
mod linalg;
mod newton;
mod series;

pub use fit::{chebyshev_nodes, polyfit, PolyFit};
pub use jet::Jet;
pub use linalg::{
    cmatrix_from_real, det, eig, lu_solve, real_rank, CMatrix, CVector, EigPair,
};
pub use newton::{newton_solve, NewtonConfig, NewtonSolution};
pub use series::ThetaSeries;
