//! Secret-key-rate lower bounds and maximum tolerable channel noise for
//! discrete-variable (BB84, six-state) and continuous-variable
//! (squeezed-state, GG02) QKD, with the channel modelled as coupling to a
//! thermal reservoir of mean photon number `mu`.
//!
//! The computations are generic over the floating-point type through
//! [`Scalar`]; the `*F64` and `*F32` aliases below name the common
//! instantiations.
//!
//! ```
//! use qkdnoise::dv_security::{qber_threshold, DvProtocol};
//!
//! let q = qber_threshold::<f64>(DvProtocol::SixState, false).unwrap();
//! assert!((q - 0.1262).abs() < 1e-3);
//! ```

mod error;
mod scalar;

pub mod analysis;
pub mod dv_security;
pub mod gaussian_cv;
pub mod numerics;
pub mod photon_stats;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type NoiseSourceF64 = photon_stats::NoiseSource<f64>;
pub type ChannelModelF64 = photon_stats::ChannelModel<f64>;
pub type DvSetupF64 = dv_security::DvSetup<f64>;
pub type DvObservablesF64 = dv_security::DvObservables<f64>;
pub type CvSetupF64 = gaussian_cv::CvSetup<f64>;
pub type TwoModeCmF64 = gaussian_cv::TwoModeCM<f64>;
pub type CvRateBreakdownF64 = gaussian_cv::CvRateBreakdown<f64>;
pub type SolverConfigF64 = numerics::SolverConfig<f64>;

pub type NoiseSourceF32 = photon_stats::NoiseSource<f32>;
pub type ChannelModelF32 = photon_stats::ChannelModel<f32>;
pub type DvSetupF32 = dv_security::DvSetup<f32>;
pub type CvSetupF32 = gaussian_cv::CvSetup<f32>;
pub type SolverConfigF32 = numerics::SolverConfig<f32>;
