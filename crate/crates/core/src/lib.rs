//! Multiresolution analysis of signals on weighted graphs, built from random
//! spanning forests.
//!
//! Roots of a random forest pick the coarse vertices, a Schur complement
//! gives the coarse generator, and the Green kernel of the fine graph acts as
//! the low-pass filter. The resulting pyramid reconstructs exactly.

pub mod coarsen;
pub mod config;
pub mod error;
pub mod estimators;
pub mod filterbank;
pub mod forest;
pub mod generators;
pub mod graph;
pub mod io;
pub mod norms;
pub mod pyramid;
pub mod rng;
pub mod spectral;
pub mod validation;
pub mod zoo;

pub use coarsen::{schur_complement, CoarseLevel};
pub use config::Tolerances;
pub use error::{Error, Result};
pub use filterbank::{analyze, build_reconstructors, green_kernel, reconstruct, AnalysisResult, FilterBank, KernelMethod};
pub use forest::{enumerate_forests, wilson_sample, SpanningForest};
pub use graph::{build_graph, WeightedGraph};
pub use norms::PNorm;
pub use pyramid::{compress, decompose, reconstruct_full, PyramidCoefficients, PyramidConfig, PyramidLevel};
pub use spectral::{spectral_decompose, SpectralDecomposition};

// The book's code listings run as doc tests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/graphs.md")]
    mod graphs {}
    #[doc = include_str!("../../../book/src/forests.md")]
    mod forests {}
    #[doc = include_str!("../../../book/src/coarsening.md")]
    mod coarsening {}
    #[doc = include_str!("../../../book/src/filterbank.md")]
    mod filterbank {}
    #[doc = include_str!("../../../book/src/pyramid.md")]
    mod pyramid {}
    #[doc = include_str!("../../../book/src/compression.md")]
    mod compression {}
    #[doc = include_str!("../../../book/src/estimators.md")]
    mod estimators {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
