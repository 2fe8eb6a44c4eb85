//! Solovay-Kitaev style synthesis over SU(2) with nilpotent word templates.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod real;
pub mod su2;
pub mod words;
pub mod cancellation;
pub mod basenet;
pub mod steps;
pub mod zigzag;
