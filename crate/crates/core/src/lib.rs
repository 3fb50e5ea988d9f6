//! Toolkit for three-scale (signal / background / overall) subjective
//! evaluation of noise-suppressed speech run through crowdsourcing.
//!
//! - [`refcond`] renders the twelve fullband reference conditions.
//! - [`campaign`] packs clips into rating tasks and gates worker sessions.
//! - [`screening`] rejects tasks that fail the built-in control mechanisms.
//! - [`stats`] turns reliable votes into MOS/DMOS, regressions and run comparisons.

pub mod audio;
pub mod campaign;
pub mod refcond;
pub mod scale;
pub mod screening;
pub mod stats;

pub use audio::{read_wav, write_wav, AudioClip, AudioError};
