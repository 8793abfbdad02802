//! Finite-discrete semantics for incomplete data.
//!
//! A model is a density `h` on `Ω = 𝒴 × ℛ`, where `𝒴` is a product of finite
//! domains and `ℛ` a set of missingness patterns. Everything is computed by
//! exhaustive enumeration.

pub mod density;
pub mod fixtures;
pub mod cli;
pub mod impute;
pub mod io;
pub mod pattern;
pub mod space;
pub mod verify;

#[cfg(test)]
mod testing;
