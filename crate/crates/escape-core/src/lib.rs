//! A workbench for finite regular path query determinacy experiments over
//! red/green structures.
//!
//! The pieces, bottom to top:
//!
//! - [`symbol`], [`graph`]: the colored alphabet and finite edge-labeled
//!   multigraphs with two distinguished constants, plus homomorphism and
//!   isomorphism search.
//! - [`lang`]: finite path languages as acyclic pattern automata, evaluated
//!   over structures by product reachability.
//! - [`tiling`]: the grid shading problem (instances, the five-condition
//!   checker, bounded search).
//! - [`reduce`]: the reduction from a tiling instance to a system of path
//!   languages and the start query.
//! - [`chase`]: regular constraints, requests and the growth step.
//! - [`fixtures`]: the canonical staircase and grid structures, strategy
//!   tables and the counterexample assembler.
//! - [`game`]: the two-player escape game engine, policies, monitors and
//!   the stage pipeline.

pub mod chase;
pub mod fixtures;
pub mod game;
pub mod graph;
pub mod lang;
pub mod reduce;
pub mod symbol;
pub mod tiling;
