//! Mixed finite elements for quasi-static multiple-network poroelasticity.
//!
//! Two discretizations of the same model on triangle meshes:
//!
//! * total pressure: P2 displacement, P1 total pressure and P1 network
//!   pressures, robust as lambda grows;
//! * standard: P2 displacement and P1 network pressures, which locks in the
//!   incompressible limit.
//!
//! Both step in time with the theta scheme (Crank-Nicolson by default) and
//! solve each step with a sparse LU. [`verify`] runs convergence studies
//! against a manufactured solution; [`scenario`] runs the four-network brain
//! model on an annulus.
//!
//! ```no_run
//! use mpet::forms::Formulation;
//! use mpet::verify::{convergence_study, example1_case, StudyOptions};
//!
//! let case = example1_case(0.49999, 1.0);
//! let report = convergence_study(&case, &StudyOptions::new(Formulation::TotalPressure, 4)).unwrap();
//! println!("{}", report.to_markdown());
//! ```
//!
//! The `examples/` directory has one runnable program per capability, from
//! `quadrature` and `sparse_lu` up to `total_pressure_rates` and
//! `brain_annulus`.

#![allow(clippy::needless_range_loop)]

pub mod app;
pub mod config;
pub mod elements;
pub mod fields;
pub mod forms;
pub mod linalg;
pub mod mesh;
pub mod params;
pub mod scenario;
pub mod spaces;
pub mod timestepper;
pub mod verify;
