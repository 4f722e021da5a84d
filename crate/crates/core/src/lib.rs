//! Twisted crossed products of discrete groups, twisted kernel calculus, and
//! their finite Hilbert-space models.

pub mod catalog;
pub mod coefficient;
pub mod crossed;
pub mod error;
pub mod group;
pub mod io;
pub mod kernel;
pub mod laws;
pub mod linalg;
pub mod rep;
pub mod spectral;
pub mod system;
pub mod weight;

pub use coefficient::{Coefficient, CoefficientModel, SigmaPoint};
pub use crossed::{AbelianTable, CrossedElement, PowerSeries};
pub use error::{Error, GroupError, Result};
pub use group::{FactorKind, GroupCtx, GroupElement};
pub use kernel::{CovarianceReport, Diagonal, KernelElement, ScalarDiagonal, ScalarKernel, Tail};
pub use laws::{check_laws, LawOptions, LawResidual};
pub use linalg::CMatrix;
pub use rep::{BlockOperator, CoefficientRep, DenseOperator, Window};
pub use spectral::{DecayProfile, GrsParams, GrsReport, RadiusEstimate, SpectralReport, WienerOptions};
pub use system::{Action, AxiomResidual, Cocycle, PointAction, TwistedSystem, VerifyOptions};
pub use weight::{AdmissibleNorm, ScalarFunction, Weight};
