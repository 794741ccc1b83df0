//! Special functions, quadrature engines and root finding used by every
//! analysis module.

pub mod oscillatory;
pub mod quad;
pub mod root;
pub mod special;

pub use oscillatory::fourier_cosine_transform;
pub use quad::{integrate_halfline, integrate_interval, QuadConfig, QuadResult};
pub use root::find_root_bracketed;
pub use special::{duplication_residual, gamma, hurwitz_zeta, log_gamma, zeta_real};
