//! Support-function simulator for expanding curvature flows with speed
//! `u^α f^β` on closed convex hypersurfaces in R² and R³.

pub mod cli;
pub mod curvature;
pub mod flow;
pub mod par;
pub mod sphere;
