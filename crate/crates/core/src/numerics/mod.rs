pub mod gauss;
pub mod interp;
pub mod normal;
pub mod ode;
pub mod quadrature;

pub use quadrature::{integrate, integrate_with_breaks, QuadOptions, QuadResult};
