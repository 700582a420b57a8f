//! Computational model of the C*-algebra generated by a q-normal operator
//! pair: exact q-scaled arithmetic, spectra built from scale-invariant
//! lattices of intervals, the crossed-product function algebra, its standard
//! projections, shift representations, index pairings, and K-group data.

pub mod crossed;
pub mod funcspace;
pub mod ktheory;
pub mod pairing;
pub mod projlib;
pub mod rep;
pub mod report_store;
pub mod scaled;
pub mod spectral;
pub mod suites;

pub use num_rational::BigRational;
