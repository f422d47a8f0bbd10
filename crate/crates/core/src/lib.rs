//! Structure learning for Gaussian graphical models of paired data
//! (RCON models on coloured graphs with twin-pairing symmetries).

pub mod chisq;
pub mod cli;
pub mod error;
pub mod fit;
pub mod graph;
pub mod io;
pub mod lattice;
pub mod search;
pub mod sim;

pub use nalgebra;

pub use error::{Error, Result};
pub use fit::{fit_mle, fit_pdcg, is_accepted, FitOptions, FitResult, RconDesign, SampleMoments};
pub use graph::{ColourClasses, Edge, EdgeBlock, PairedVertexSet, Pdcg, Quadruplet, Vertex};
pub use lattice::{Layer, Move, NeighbourRecord, Provenance, Rule};
