//! Process-tensor matrix product operators (PT-MPOs) for non-Markovian open
//! quantum systems.
//!
//! The crate is organised the way a simulation flows:
//!
//! * [`expr`] parses the matrix-valued expression language used for
//!   Hamiltonians, initial states and observables.
//! * [`config`] turns configuration files and command-line overrides into a
//!   [`config::ParameterMap`].
//! * [`tensor`] holds the dense linear algebra, truncated SVDs and MPO sweeps.
//! * [`system`] builds free system propagators from Hamiltonians, pulses and
//!   Lindblad terms.
//! * [`ptmpo`] is the [`ptmpo::ProcessTensor`] container: combination,
//!   outer-bond expansion and binary file I/O.
//! * [`methods`] generates process tensors (ACE, Gaussian spin-boson schemes).
//! * [`propagate`] steps a reduced density matrix through one or more process
//!   tensors.
//! * [`oracle`] contains brute-force references used to validate the above.
//! * [`cli`] wires everything together for the `ACE`, `PTB_analyze` and
//!   `readexpression` binaries.

pub mod cli;
pub mod config;
pub mod expr;
pub mod methods;
pub mod oracle;
pub mod propagate;
pub mod ptmpo;
pub mod quad;
pub mod system;
pub mod tensor;

pub use num_complex::Complex64 as C64;

/// Dense complex matrix used throughout the crate.
pub type ComplexMatrix = ndarray::Array2<C64>;

/// Top-level error for the binaries and high-level workflows.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Expr(#[from] expr::ExprError),
    #[error(transparent)]
    Config(#[from] config::ConfigError),
    #[error(transparent)]
    Tensor(#[from] tensor::TensorError),
    #[error(transparent)]
    System(#[from] system::SystemError),
    #[error(transparent)]
    Pt(#[from] ptmpo::PtError),
    #[error(transparent)]
    Method(#[from] methods::MethodError),
    #[error(transparent)]
    Propagate(#[from] propagate::PropagateError),
    #[error(transparent)]
    Oracle(#[from] oracle::OracleError),
    #[error("{0}")]
    Usage(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
