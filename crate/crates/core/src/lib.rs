//! Measurement library for auditing skin tone across image corpora.
//!
//! The pipeline: decode an image, obtain a per-pixel skin mask
//! ([`skinmask`]), drop images whose skin coverage is under the inclusion
//! threshold, convert the remaining skin pixels to CIE L\*a\*b\*
//! ([`colorspace`]), reduce them to one scalar tone per image by clustering
//! ([`tonemetrics`]), then roll per-image tones up into per-identity and
//! per-category statistics ([`aggregate`]). [`corpus`] handles the identity
//! taxonomy, manifests, and result persistence.
//!
//! All numeric kernels are deterministic: identical inputs (including the
//! clustering seed) produce bit-identical outputs, and aggregation sums in a
//! canonical order so results do not depend on input ordering or thread
//! scheduling.

pub mod aggregate;
pub mod colorspace;
pub mod corpus;
pub mod skinmask;
pub mod tonemetrics;
