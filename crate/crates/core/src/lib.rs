//! Blind initialization of convolutional network codes on cyclic networks.
//!
//! A network whose relays forward linear combinations of what they received
//! one time step earlier behaves like a linear time-invariant system over a
//! finite field. Sending a handful of pilot symbols lets each sink learn a
//! difference equation `P(z) y = G(z) u` relating what it receives to what
//! the sources sent, without knowing the topology or the coding
//! coefficients. From that equation a sink can decode the source streams and
//! tell which source rates are achievable.

#![allow(clippy::needless_range_loop)]

pub mod capacity;
pub mod decode;
pub mod error;
pub mod field;
pub mod fixtures;
pub mod init;
pub mod io;
pub mod linalg;
pub mod network;
pub mod poly;
pub mod polymat;

pub use capacity::{enumerate_region, RateRegion};
pub use decode::{build_plan, decode_stream, DecoderPlan, StreamDecoder};
pub use error::{Error, Result};
pub use field::{FieldSpec, GaloisField, Gf};
pub use init::{Algorithm, DifferenceEquation, InitOptions, InitialState};
pub use linalg::FieldMatrix;
pub use network::{NetworkSpec, SimState, StateSpace, TopologyFile};
pub use poly::{Poly, SymbolSequence};
pub use polymat::{Limits, PolyMatrix};
