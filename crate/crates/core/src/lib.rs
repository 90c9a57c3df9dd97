//! Qutrit simulator for estimating observable averages in noisy
//! nonadiabatic holonomic circuits by post-selecting measurement outcomes
//! onto the logical subspace `span{|0⟩, |1⟩}^{⊗n}`.

pub mod algebra;
pub mod analysis;
pub mod circuit;
pub mod config;
pub mod error;
pub mod estimation;
pub mod holonomy;
pub mod noise;
pub mod output;
pub mod random;
pub mod rng;
pub mod state;

pub use error::{Error, Result};
