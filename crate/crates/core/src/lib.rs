//! Similarity profiles, shooting, collocation, compactons and Riemann-problem
//! tools for fifth-order nonlinear dispersion equations.

pub mod asymptotics;
pub mod banded;
pub mod bvp;
pub mod compactons;
pub mod ivp;
pub mod models;
pub mod quadrature;
pub mod riemann;
pub mod shooting;
