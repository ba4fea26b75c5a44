//! Exact-arithmetic cohomology of configuration spaces of punctured smooth
//! complex varieties.
//!
//! Given a finite presentation of `H^*(Xbar; Q)` for a connected smooth
//! complex variety `Xbar` (a [`model::VarietyModel`]) and a puncture count
//! `r`, the engine builds the first page of the Orlik-Solomon spectral
//! sequence of the diagonal-plus-puncture arrangement in `Xbar^n`, takes
//! cohomology of the first-page differential, certifies degeneration by a
//! weight argument, and assembles the split mixed-Hodge bigraded cohomology
//! of the ordered configuration space `F(X, n)` together with its symmetric
//! group action; `Conf^n(X)` tables are the invariants. A separate suite
//! checks the splitting identities relating a space and its one-point
//! puncture, exactly, as identities of truncated generating series.
//!
//! Everything is computed over Q with arbitrary-precision rationals; no
//! floating point appears anywhere.
//!
//! ```
//! use confspace::catalog;
//! use confspace::spectral::{FamilyPipeline, PipelineOptions};
//!
//! // Conf^n of the punctured plane, n <= 2
//! let opts = PipelineOptions::default();
//! let model = catalog::affine_space(1);
//! let pipeline = FamilyPipeline::run(&model, 1, 2, &opts).unwrap();
//! let table = pipeline.unordered_table(&opts).unwrap();
//! assert_eq!(table.betti(2), vec![1, 2, 1]);
//! // both H^1 classes live in Hodge type (1,1)
//! assert_eq!(table.get(2, 1, 1, 1), 2);
//! ```

pub mod arrangement;
pub mod catalog;
pub mod e1;
pub mod error;
pub mod linalg;
pub mod model;
pub mod os;
pub mod series;
pub mod spectral;
pub mod symmetric;
pub mod table;

pub use error::Error;
