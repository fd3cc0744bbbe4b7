//! Spectra of Schrödinger operators with generalized point interactions on
//! equidistant concentric spheres.
//!
//! Everything is generic over the scalar type (`f32` or `f64`) through
//! [`Real`]; the `f64` aliases at the bottom of this file cover the common case.

pub mod error;
pub mod interaction;
pub mod kronig1d;
pub mod linalg;
pub mod ode;
pub mod oracle;
pub mod radial;
pub mod scalar;
pub mod spectral_map;
pub mod welsh;

pub use error::{Result, SpectralError};
pub use interaction::{
    apply_interaction, classify, make_interaction, InteractionClass, InteractionParams, InteractionTag,
    LatticeGeometry,
};
pub use linalg::{wronskian, Mat2, StateVector};
pub use scalar::Real;

pub type Interaction = InteractionParams<f64>;
pub type Geometry = LatticeGeometry<f64>;
pub type State = StateVector<f64>;
pub type Bands = kronig1d::BandStructure<f64>;
pub type Channel = radial::ChannelSpec<f64>;
pub type SpectrumMap = spectral_map::SpectrumMap<f64>;
pub type WelshReport = welsh::WelshReport<f64>;
