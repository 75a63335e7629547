//! Numerical toolkit for concentration of polynomials on the Riemann sphere.
//!
//! The foundation (geometry, quadrature, polynomial space, localization
//! operators) is generic over [`Real`]; experiment layers run in `f64`.

pub mod acceptance;
pub mod concentration;
pub mod eigen;
pub mod fock;
pub mod error;
pub mod levelsets;
pub mod localization;
pub mod mixed;
pub mod optimize;
pub mod polyspace;
pub mod quadrature;
pub mod random;
pub mod region;
pub mod scalar;
pub mod schema;
pub mod sharpness;
pub mod special;
pub mod sphere;
pub mod table;
pub mod wehrl;

pub use error::{Error, Result};
pub use scalar::{Cx, Real};

pub type Point64 = sphere::SpherePoint<f64>;
pub type Point32 = sphere::SpherePoint<f32>;
pub type Cap64 = sphere::Cap<f64>;
pub type Cap32 = sphere::Cap<f32>;
pub type Region64 = region::Region<f64>;
pub type Region32 = region::Region<f32>;
pub type Poly64 = polyspace::Poly<f64>;
pub type Poly32 = polyspace::Poly<f32>;
pub type Matrix64 = eigen::CMatrix<f64>;
