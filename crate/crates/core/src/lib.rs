//! Spherical-coverage simulation for form-factor millimeter-wave UE antenna
//! designs.
//!
//! The library models a handset as a hierarchy of antenna modules, subarrays
//! and elements, evaluates beamforming array gain over the full sphere under
//! four combining schemes (MRC, EGC, an RF/analog beam codebook, and single
//! antenna selection), applies hand-blockage loss models, and reduces the
//! resulting gain maps to solid-angle-weighted coverage CDFs. A small Monte
//! Carlo link simulator estimates per-layer spectral efficiency for a single
//! base-station/UE link driven by the same codebooks.
//!
//! Element patterns are parametric `cos^q` shapes with configurable peak gain
//! and half-power beamwidth. They stand in for full-wave electromagnetic
//! simulation data: absolute gain values therefore track the parametric
//! model, not any specific physical antenna, while ordering and coverage
//! structure between designs and schemes remain meaningful. Externally
//! simulated or measured patterns can be loaded from text files instead
//! (see [`antenna::load_pattern_file`]).
//!
//! All numerics are generic over the scalar type via [`Scalar`] (`f32` or
//! `f64`); `*64` aliases at the crate root pin the common `f64`
//! instantiation.
//!
//! ```
//! use spherecov::geometry::make_grid;
//! use spherecov::antenna::{build_design, DesignName};
//! use spherecov::beamforming::{evaluate_design, CombiningScope, Scheme};
//! use spherecov::coverage::{spherical_cdf, CdfMeta};
//! use std::sync::Arc;
//!
//! let grid = Arc::new(make_grid::<f64>(5.0, 5.0).unwrap());
//! let design = build_design(DesignName::Edge, &grid).unwrap();
//! let map = evaluate_design(&design, Scheme::Mrc, None, CombiningScope::PerSubarray).unwrap();
//! let cdf = spherical_cdf(&map, CdfMeta::new("edge", "mrc", "none"));
//! assert!(cdf.percentile(0.5) <= cdf.percentile(0.9));
//! ```

pub mod antenna;
pub mod beamforming;
pub mod blockage;
pub mod codebook;
pub mod coverage;
pub mod error;
pub mod geometry;
pub mod scalar;
pub mod sls;

mod util;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// `f64` instantiations of the main domain types.
pub type Direction64 = geometry::Direction<f64>;
pub type SphereGrid64 = geometry::SphereGrid<f64>;
pub type ElementPattern64 = antenna::ElementPattern<f64>;
pub type Subarray64 = antenna::Subarray<f64>;
pub type UeDesign64 = antenna::UeDesign<f64>;
pub type Beam64 = codebook::Beam<f64>;
pub type Codebook64 = codebook::Codebook<f64>;
pub type BlockageRegion64 = blockage::BlockageRegion<f64>;
pub type GainMap64 = coverage::GainMap<f64>;
pub type CoverageCdf64 = coverage::CoverageCdf<f64>;
pub type LinkBudget64 = sls::LinkBudget<f64>;
