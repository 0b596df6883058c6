#[cfg(feature = "cli")]
pub mod cli;
pub mod expr;
pub mod harness;
pub mod hyperdual;
pub mod locator;
pub mod theorems;
