pub mod cli;
pub mod config;
pub mod csv;
pub mod eigenfunction;
pub mod error;
pub mod localization;
pub mod model1d;
pub mod oracle;
pub mod quadrature;
pub mod roots;
pub mod scatterer;
pub mod transverse;

pub(crate) mod green;
