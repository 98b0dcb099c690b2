//! Hyperspectral image denoising by spectral-subspace projection and
//! multidimensional sparse coding of overlapping cubes.
//!
//! Two denoisers share the same building blocks:
//!
//! * [`classic`]: rank estimation, SVD basis, projection, TISTA sparse coding
//!   of every cube with fixed DCT dictionaries, aggregation and
//!   reconstruction.
//! * [`net`]: the same pipeline unfolded into `K` trainable sparse coding
//!   blocks with decoupled dictionaries and per-layer threshold tensors,
//!   trained end to end by [`train`] with exact reverse-mode gradients.
//!
//! Supporting modules provide tensor algebra ([`tensor`]), cube handling
//! ([`patching`]), quality metrics ([`metrics`]), file formats and the
//! synthetic low-rank phantom generator ([`io`]), and the `smds` command
//! line front end ([`cli`]).

pub mod classic;
pub mod cli;
pub mod error;
pub mod io;
pub mod metrics;
pub mod net;
pub mod patching;
pub mod sparse_coding;
pub mod subspace;
pub mod tensor;
pub mod train;

pub use error::{Result, SmdsError};
pub use subspace::SpectralBasis;
pub use tensor::{Matrix, Tensor3};
