//! Numerics for radial weights on the unit disc: tails, moments, weight
//! classification, fractional differentiation of Taylor series, growth
//! norms, kernel asymptotics, and lacunary constructions.

pub mod band;
pub mod classes;
pub mod error;
pub mod grid;
pub mod kernel;
pub mod lacunary;
pub mod norms;
pub mod quad;
pub mod series;
pub mod weight;

pub use band::RatioBand;
pub use classes::{ClassEvidence, ClassReport, Verdict};
pub use error::{Error, Result};
pub use grid::{RadialGrid, RadialPoint};
pub use lacunary::{Counterexample, CounterexampleReport, LacunaryData};
pub use norms::{DecayTrend, NormProfile};
pub use quad::Quadrature;
pub use series::TaylorPoly;
pub use weight::{MomentTable, RadialWeight, TailTable, WeightFamily};
