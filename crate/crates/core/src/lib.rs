//! Desk-scale model of a tendon-driven wheel-leg transformable robot family:
//! four-bar transformation kinematics and quasi-statics, linkage design
//! search, wheeled/legged gait control, planar terrain negotiation and the
//! locomotion metrics used to compare the modes.

pub mod config;
pub mod controller;
pub mod design_search;
pub mod drive;
pub mod exec;
pub mod gait;
pub mod geom;
pub mod linkage;
pub mod metrics;
pub mod robot;
pub mod sim;
pub mod terrain;
pub mod trace;
