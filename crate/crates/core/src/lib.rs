pub mod error;
pub mod mesh;
pub mod quadrature;
pub mod elements;
pub mod sparse;
pub mod assembly;
pub mod estimators;
pub mod solver;
pub mod adaptivity;
pub mod harness;
