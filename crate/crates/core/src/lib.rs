//! Exact desk-scale laboratory for the convergence of convex sets in
//! sequence spaces.
//!
//! Everything is computed inside a finite coordinate [`Window`]. Polyhedral
//! quantities (distances, gaps, support values, separating functionals) are
//! solved as exact rational linear programs; Euclidean ones are carried as
//! square roots of rationals where possible.

pub mod certificates;
pub mod convergence;
pub mod error;
pub mod kadec;
pub mod lp;
pub mod polyhedron;
pub mod rational;
pub mod scenario;
pub mod scalar;
pub mod sets;
pub mod space;

pub use certificates::{
    construct_separating_sequence, exhaust_hyperplane, verify_certificate, verify_wijsman_certificate, CertMode,
    SeparationInstance, SliceCertificate,
};
pub use convergence::{
    gap_convergence_check, level_set_wijsman_criterion, mosco_check, wijsman_check, ConvergenceVerdict,
    FamilyKind, FunctionalSequence, Notion, SetSequence, Status, TestFamily, Witness,
};
pub use error::{Error, Result};
pub use kadec::{
    build_prop25_renorm, probe_lur, probe_w_star_kadec, probe_w_star_tau_kadec, property_star_check, ProbeReport,
    ProbeStatus, Property, StarFailure, VectorSequence,
};
pub use rational::Rat;
pub use scalar::Scalar;
pub use sets::{
    coercivity_margin, distance, distance_subgradient, epigraph_build, gap, nearest_point, separate,
    support_value, CompactFamily, ConvexSet, Direction, PolyFunc, Separation,
};
pub use space::{
    dual_norm_eval, norm_eval, norm_metric_rho, predual_norm_from_dual_ball, DualBallDescription,
    Frame, Functional, NormSpec, Vector, Window,
};
