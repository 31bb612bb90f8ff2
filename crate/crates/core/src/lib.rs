//! Exact and Monte Carlo tools for homomorphism and Lipschitz height
//! functions on even tori: enumeration, perfect sampling, odd cutsets,
//! expanding transformations, walls on linear tori and the Z_2 lift.

pub mod bijections;
pub mod cutsets;
pub mod error;
pub mod graph;
pub mod height;
pub mod oracle;
pub mod report;
pub mod sampler;
pub mod torus;
pub mod transforms;
pub mod walls;

pub use error::{Error, Result};
pub use height::{BoundaryCondition, HeightFunction, Model};
pub use torus::{TorusSpec, Vertex};
