#![allow(clippy::needless_range_loop)]

pub mod bkk;
pub mod bundle;
pub mod classes;
pub mod cli;
pub mod correlator;
pub mod cycles;
pub mod error;
pub mod fan;
pub mod hull;
pub mod lattice;
pub mod linalg;
pub mod poly;
pub mod problem;
pub mod solve;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/fans.md")]
    mod fans {}
    #[doc = include_str!("../../../book/src/bundles.md")]
    mod bundles {}
    #[doc = include_str!("../../../book/src/solving.md")]
    mod solving {}
    #[doc = include_str!("../../../book/src/correlators.md")]
    mod correlators {}
    #[doc = include_str!("../../../book/src/cycles.md")]
    mod cycles {}
    #[doc = include_str!("../../../book/src/bkk.md")]
    mod bkk {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
