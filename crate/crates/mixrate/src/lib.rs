//! Codifference evaluation, analytic bounds and Monte Carlo checks for
//! weighted shift operators acting on sequence spaces carrying infinitely
//! divisible measures (compound Poisson, symmetric α-stable, tempered stable).

#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![cfg_attr(test, allow(clippy::excessive_precision))]

pub mod bounds;
pub mod cli;
pub mod codiff;
mod complex_ext;
pub mod error;
pub mod mc;
pub mod measures;
pub mod mixing;
pub mod seqspace;
pub mod shifts;
pub mod specfun;

pub use error::{Error, Result};
pub use num_complex::Complex64;
