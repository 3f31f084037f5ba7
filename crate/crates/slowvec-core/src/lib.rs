//! Core numerics for analysing the long-run behaviour of power-bounded
//! linear operators on finite-dimensional complex spaces.
//!
//! The crate is organised around one question: how much of the space does an
//! operator *not* flatten?  Orbits `x, Tx, T²x, …` either decay to zero or
//! stay bounded away from it, and the vectors of the second kind are exactly
//! the ones that admit slow-vector certificates, span attractor hulls, and
//! survive Cesàro averaging.  The modules below build that story bottom-up:
//!
//! * [`operators`] — matrix operators, seeded test families, orbit evaluation
//!   and power-boundedness estimation;
//! * [`norms`] — orbit-derived norms (sup norm, limit seminorm) and the split
//!   of the space into decaying and persistent parts;
//! * [`slow`] — certification and synthesis of almost-eigenvectors whose
//!   orbits stay near the unit sphere;
//! * [`attractor`] — compact convex hulls, the attraction test, and the
//!   greedy orbit decomposition over an attracting hull;
//! * [`ergodic`] — Cesàro means, mean-ergodic projections, the covering-net
//!   dimension bound, and the flattening certificate.
//!
//! Everything is `no_std` + `alloc`: the crate performs no IO and allocates
//! only plain buffers, so it can sit under a CLI, a test harness, or an
//! embedded experiment equally well.  All randomised routines take explicit
//! seeds and are bit-reproducible across runs and platforms.

#![cfg_attr(not(test), no_std)]
#![deny(unsafe_code)]

extern crate alloc;

pub mod attractor;
pub mod ergodic;
pub mod error;
pub mod linalg;
pub mod math;
pub mod norms;
pub mod operators;
pub mod rng;
pub mod slow;

pub use error::{Error, Result};
pub use linalg::{CMat, C64};
pub use operators::{Operator, Trajectory};
