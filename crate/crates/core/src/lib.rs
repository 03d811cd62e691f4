//! Exact bookkeeping for symplectic 4-manifold constructions: plumbing
//! intersection forms, star surgery and rational blow-down, blow-up
//! homology of pencils, geography, and the Seiberg–Witten dimension-count
//! obstruction that decides which basic classes survive a surgery.

pub mod batch;
pub mod blowup;
pub mod ledger;
pub mod plumbing;
pub mod ratlin;
pub mod recipe;
pub mod report;
pub mod sw;
