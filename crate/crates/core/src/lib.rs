#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod canon;
pub mod catalog;
pub mod config;
pub mod error;
pub mod facility;
pub mod geom;
pub mod io;
pub mod layout;
pub mod nav;
pub mod packing;
pub mod pipeline;
pub mod placement;
pub mod render;
pub mod rng;
pub mod tasks;

pub use error::{Error, Result};
