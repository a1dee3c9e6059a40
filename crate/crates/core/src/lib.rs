//! Matrix bimodule problems over the rationals: exact algebra, Weyr forms,
//! algebra-derived problems, reductions, canonical forms and wild detection.
#![no_std]

extern crate alloc;

pub mod algebra;
pub mod canonical;
pub mod classify;
pub mod exact;
pub mod problem;
pub mod reduce;
pub mod weyr;
