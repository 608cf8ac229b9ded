//! Numerical verification machinery for the two-dimensional gap example.

pub mod fields;
