//! Asymptotic limits of Hilbert-space operators: contraction limits
//! `T*ⁿTⁿ → A`, Cesàro limits `Qₙ → Q`, Lorentz envelopes of orbit sequences
//! and similarity-to-isometry witnesses.

pub mod asymptotics;
pub mod ensemble;
pub mod envelope;
pub mod linalg;
pub mod models;
pub mod spec;
pub mod summation;
pub mod witness;
