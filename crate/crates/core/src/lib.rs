//! Lie point symmetries of quasi-linear second-order equations
//! `u_xx + a12 u_xy + a22 u_yy + b1 u_x + b2 u_y = sum_l alpha_l(x, y) F_l(u)`.
//!
//! The crate builds the determining system of such an equation, detects the
//! linear relations among `F_l, F'_l, u F'_l, u, 1` that allow nontrivial
//! symmetries, and solves for the generators inside a finite ansatz.

pub mod classify;
pub mod cli;
pub mod expr;
pub mod linalg;
pub mod parser;
pub mod poly;
pub mod prolong;
pub mod verify;
