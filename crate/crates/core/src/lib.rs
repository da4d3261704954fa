//! Finite-element simulation of a Kelvin–Voigt viscoelastic body in bilateral
//! frictional contact, with rate-and-state friction coupled through a
//! fixed-point iteration between the velocity problem and the boundary state
//! equation.

pub mod fem;
pub mod friction;
pub mod rate;
pub mod state;
pub mod coupled;
pub mod cli;
