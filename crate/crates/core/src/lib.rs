//! Exact combinatorial Reeb dynamics on convex polytopes in R⁴.
//!
//! Given a polytope with rational vertices, this crate builds its face lattice,
//! the graph of linear flows between 2-faces along the Reeb vector field, and
//! enumerates closed orbits with exact actions and Conley–Zehnder indices. From
//! these it computes the EHZ capacity, the systolic ratio and the capacities `A_k`.
//!
//! Geometry is exact over [`Rat`]. Symplectic 2×2 matrices in quaternionic frames
//! are `f64`; their rotation numbers are tracked exactly as brackets.

pub mod capacities;
pub mod error;
pub mod flow;
pub mod linalg;
pub mod lp;
pub mod num;
pub mod orbits;
pub mod polygon;
pub mod polytope;
pub mod search;
pub mod shapes;
pub mod sp2;

pub use error::{Error, Result};
pub use num::{Rat, Scalar};

pub type Vec4Q = linalg::Vec4<Rat>;
pub type Vec4F = linalg::Vec4<f64>;
pub type Mat2Q = linalg::Mat2<Rat>;
pub type Mat2F = linalg::Mat2<f64>;
pub type Affine2Q = linalg::Affine2<Rat>;

pub use capacities::{a2_test, a_k, ehz, l_nondegenerate, systolic_ratio, AkValue, CapacityReport};
pub use flow::{FlowEdge, FlowGraph, PathFlow};
pub use orbits::{enumerate, zoll_check, OrbitRecord, SearchQuery, ZollCertificate};
pub use polytope::{FaceLattice, HalfSpace, Polytope};
pub use sp2::{LiftedSp2, RotBracket, Sp2Class};
