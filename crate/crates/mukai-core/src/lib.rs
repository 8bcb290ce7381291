//! Exact Mukai lattice arithmetic for K3 and abelian surfaces of Picard rank
//! one or two, wall-and-chamber decisions for polarizations, and certified
//! reduction of (m,k)-triples to the canonical vector m(0,h,0).

pub mod arith;
pub mod json;
pub mod lattice;
pub mod moves;
pub mod mukai;
pub mod oracles;
pub mod par;
pub mod planner;
pub mod walls;

pub use arith::{int, Int, Rat};
pub use lattice::{DivisorClass, SurfaceClass, SurfaceKind};
pub use mukai::{MukaiVector, Triple};
