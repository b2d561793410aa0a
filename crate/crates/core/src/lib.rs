//! Betti tables of Stanley–Reisner rings of random flag complexes.
//!
//! A graph `G` on `[n]` determines its clique complex `Δ` and the quadratic
//! squarefree monomial ideal `I_Δ = (x_u x_v : uv ∉ E(G))`. Betti numbers of
//! `S/I_Δ` are computed through Hochster's formula from the reduced homology of
//! induced subcomplexes over a prime field, with an independent Taylor-complex
//! computation kept alongside as an oracle. On top of that sit exact counters
//! for the subgraph statistics that govern thresholds, and a reproducible
//! Monte Carlo harness.

pub mod betti;
pub mod cli;
pub mod counts;
pub mod error;
pub mod experiments;
pub mod flag_complex;
pub mod graph;
pub mod homology;
pub mod oracle;

pub use error::{Error, Result};
pub use graph::{Graph, SampleParams, VertexSet};
pub use homology::FieldChar;
