//! Element-level complex responses and the UE design hierarchy.
//!
//! A design is a list of [`AntennaModule`]s, each holding [`Subarray`]
//! instances. A dual-polarized patch subarray is represented as two
//! `Subarray` instances sharing element positions, one per feed port, so a
//! dual-polarized patch element counts as two antenna elements. Element
//! responses are stored per grid direction as a complex pair
//! `(e_theta, e_phi)` whose squared magnitudes sum to the element's realized
//! total gain (linear, relative to isotropic).
//!
//! Patterns are either parametric `cos^q` stand-ins built by
//! [`synthetic_element_pattern`] or loaded from pattern-grid files
//! (see [`load_pattern_file`] for the format). Designs and patterns are
//! immutable once built.

mod designs;
mod pattern_file;
mod synthetic;

pub use designs::{build_design, DesignName, DesignSpec, ModuleSpec, SubarraySpec};
pub use pattern_file::{load_pattern_file, load_pattern_reader, save_pattern_file, write_pattern};
pub use synthetic::{synthetic_element_pattern, SyntheticPatternSpec};

use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::geometry::{Direction, SphereGrid};
use crate::scalar::{c, Scalar};

/// Complex response of one element in one direction, per polarization.
///
/// `|e_theta|² + |e_phi|²` is the element's realized total gain in that
/// direction (linear).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexGainPair<T> {
    pub e_theta: Complex<T>,
    pub e_phi: Complex<T>,
}

impl<T: Scalar> ComplexGainPair<T> {
    pub fn new(e_theta: Complex<T>, e_phi: Complex<T>) -> Self {
        Self { e_theta, e_phi }
    }

    /// Total realized gain `|e_theta|² + |e_phi|²`, linear.
    pub fn total_gain(&self) -> T {
        self.e_theta.norm_sqr() + self.e_phi.norm_sqr()
    }
}

/// Per-direction complex response of a single antenna element, sampled on a
/// shared sphere grid.
#[derive(Debug, Clone)]
pub struct ElementPattern<T> {
    grid: Arc<SphereGrid<T>>,
    samples: Vec<ComplexGainPair<T>>,
}

impl<T: Scalar> ElementPattern<T> {
    /// One sample per grid point, in grid order.
    pub fn new(grid: Arc<SphereGrid<T>>, samples: Vec<ComplexGainPair<T>>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::Config(format!(
                "pattern has {} samples for a grid of {} points",
                samples.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, samples })
    }

    pub fn grid(&self) -> &Arc<SphereGrid<T>> {
        &self.grid
    }

    pub fn samples(&self) -> &[ComplexGainPair<T>] {
        &self.samples
    }

    pub fn sample(&self, index: usize) -> &ComplexGainPair<T> {
        &self.samples[index]
    }

    /// Peak total gain over the grid, in dBi.
    pub fn peak_gain_dbi(&self) -> T {
        let peak = self
            .samples
            .iter()
            .map(|s| s.total_gain())
            .fold(T::zero(), T::max);
        c::<T>(10.0) * peak.log10()
    }

    /// Solid-angle integral of the total gain; 4π for a lossless pattern
    /// normalized to its directivity.
    pub fn total_radiated_power(&self) -> T {
        self.grid
            .weights()
            .iter()
            .zip(&self.samples)
            .map(|(&w, s)| s.total_gain() * w)
            .sum()
    }
}

/// Physical construction of a subarray's elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubarrayKind {
    Patch,
    Dipole,
}

impl FromStr for SubarrayKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "patch" => Ok(SubarrayKind::Patch),
            "dipole" => Ok(SubarrayKind::Dipole),
            other => Err(Error::Config(format!("unknown subarray kind '{other}'"))),
        }
    }
}

/// Logical polarization port a subarray instance is fed from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Feed {
    Theta,
    Phi,
}

impl Feed {
    pub fn label(&self) -> &'static str {
        match self {
            Feed::Theta => "theta",
            Feed::Phi => "phi",
        }
    }
}

impl FromStr for Feed {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "theta" => Ok(Feed::Theta),
            "phi" => Ok(Feed::Phi),
            other => Err(Error::Config(format!("unknown feed '{other}'"))),
        }
    }
}

/// Chassis location of a module.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Placement {
    Front,
    Back,
    EdgeLeft,
    EdgeRight,
    EdgeTop,
    EdgeBottom,
}

impl Placement {
    pub fn label(&self) -> &'static str {
        match self {
            Placement::Front => "front",
            Placement::Back => "back",
            Placement::EdgeLeft => "edge-left",
            Placement::EdgeRight => "edge-right",
            Placement::EdgeTop => "edge-top",
            Placement::EdgeBottom => "edge-bottom",
        }
    }
}

impl FromStr for Placement {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "front" => Ok(Placement::Front),
            "back" => Ok(Placement::Back),
            "edge-left" => Ok(Placement::EdgeLeft),
            "edge-right" => Ok(Placement::EdgeRight),
            "edge-top" => Ok(Placement::EdgeTop),
            "edge-bottom" => Ok(Placement::EdgeBottom),
            other => Err(Error::Config(format!("unknown placement '{other}'"))),
        }
    }
}

/// Beams to synthesize along one scan axis of a subarray: `count` steering
/// targets spread uniformly over `[-span_deg, +span_deg]` in the plane of
/// the boresight and that axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamAxisPlan<T> {
    pub count: usize,
    pub span_deg: T,
}

/// A coherently driven group of elements behind one RF feed.
///
/// Positions are in wavelengths in the chassis frame; `pol_axis` is the feed
/// polarization axis the synthetic pattern radiates along; `scan_axes` span
/// the main scanning plane(s) used for beam steering.
#[derive(Debug, Clone)]
pub struct Subarray<T> {
    pub kind: SubarrayKind,
    pub feed: Feed,
    pub boresight: Direction<T>,
    pub positions: Vec<[T; 3]>,
    pub pol_axis: [T; 3],
    pub scan_axes: Vec<[T; 3]>,
    pub beam_plan: Vec<BeamAxisPlan<T>>,
    pub element_patterns: Vec<ElementPattern<T>>,
}

impl<T: Scalar> Subarray<T> {
    pub fn num_elements(&self) -> usize {
        self.element_patterns.len()
    }
}

/// A physically co-located antenna unit holding one or more subarrays.
#[derive(Debug, Clone)]
pub struct AntennaModule<T> {
    pub placement: Placement,
    pub subarrays: Vec<Subarray<T>>,
}

/// A complete UE antenna design.
#[derive(Debug, Clone)]
pub struct UeDesign<T> {
    pub name: String,
    pub modules: Vec<AntennaModule<T>>,
}

impl<T: Scalar> UeDesign<T> {
    /// Total element count across all modules and feeds.
    pub fn num_elements(&self) -> usize {
        self.subarrays().map(Subarray::num_elements).sum()
    }

    /// Subarray instances in module-major order; the position in this
    /// iteration is the subarray id used by codebooks.
    pub fn subarrays(&self) -> impl Iterator<Item = &Subarray<T>> {
        self.modules.iter().flat_map(|m| m.subarrays.iter())
    }

    pub fn subarray(&self, id: usize) -> Option<&Subarray<T>> {
        self.subarrays().nth(id)
    }

    /// Number of subarray-polarization instances (the beam-scan unit).
    pub fn num_subarrays(&self) -> usize {
        self.subarrays().count()
    }

    /// The grid all element patterns are sampled on.
    pub fn grid(&self) -> &Arc<SphereGrid<T>> {
        self.modules[0].subarrays[0].element_patterns[0].grid()
    }
}

/// Ideal response of element `n` (1-based) of an `(N_x, N_y, N_z)` array
/// with λ/2 spacing on every axis: both polarization components equal
/// `(1/√N)·exp(jπ(n_x sinθcosφ + n_y sinθsinφ + n_z cosθ))` with
/// `n−1 = n_x + n_y·N_x + n_z·N_x·N_y`.
pub fn ideal_array_response<T: Scalar>(
    dims: (usize, usize, usize),
    n: usize,
    d: &Direction<T>,
) -> Result<ComplexGainPair<T>> {
    let (nx, ny, nz) = dims;
    let total = nx * ny * nz;
    if total == 0 {
        return Err(Error::config("array dimensions must be nonzero"));
    }
    if n < 1 || n > total {
        return Err(Error::Config(format!(
            "element index {n} out of range 1..={total}"
        )));
    }
    let lin = n - 1;
    let ix = lin % nx;
    let iy = (lin / nx) % ny;
    let iz = lin / (nx * ny);

    let v = d.unit_vector();
    let phase = T::PI()
        * (c::<T>(ix as f64) * v[0] + c::<T>(iy as f64) * v[1] + c::<T>(iz as f64) * v[2]);
    let amp = T::one() / c::<T>(total as f64).sqrt();
    let e = Complex::from_polar(amp, phase);
    Ok(ComplexGainPair::new(e, e))
}
