pub mod bessel;
pub mod dirac;
pub mod ext;
pub mod fields;
pub mod mode_space;
pub mod parametrix;
pub mod quadrature;
pub mod verify;
