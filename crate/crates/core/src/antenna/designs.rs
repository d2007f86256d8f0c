//! Built-in UE designs and the declarative design description they share
//! with user-supplied design files.
//!
//! Chassis frame: +Z through the top edge, +X through the right edge, +Y
//! through the front face. Module placement offsets on the chassis are not
//! modeled: far-field subarray gains depend only on element offsets within
//! a subarray, so every subarray is phase-referenced to the origin.
//!
//! Presets:
//! - `face`: two modules (front/back faces), each a 2x2 dual-polarized patch
//!   subarray plus a 2x1 and a 1x2 single-polarized dipole subarray scanning
//!   orthogonal planes. 24 elements.
//! - `edge`: three modules (top/left/right edges), each a 4x1 dual-polarized
//!   patch subarray. 24 elements.
//! - `design3`: four edge modules, each a 4x1 dual-polarized patch plus a
//!   4x1 dipole subarray. 48 elements.
//! - `design4`: four L-shaped modules spanning adjacent edges, each side a
//!   4x1 dual-polarized patch subarray. 64 elements.

use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;

use crate::antenna::{
    load_pattern_file, AntennaModule, BeamAxisPlan, ElementPattern, Feed, Placement, Subarray,
    SubarrayKind, SyntheticPatternSpec, UeDesign,
};
use crate::error::{Error, Result};
use crate::geometry::{self, Direction, SphereGrid};
use crate::scalar::{c, Scalar};

/// Element spacing along every array axis, in wavelengths.
const ELEMENT_SPACING_WL: f64 = 0.5;

/// Built-in design identifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DesignName {
    Face,
    Edge,
    Design3,
    Design4,
}

impl DesignName {
    pub fn all() -> [DesignName; 4] {
        [
            DesignName::Face,
            DesignName::Edge,
            DesignName::Design3,
            DesignName::Design4,
        ]
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            DesignName::Face => "face",
            DesignName::Edge => "edge",
            DesignName::Design3 => "design3",
            DesignName::Design4 => "design4",
        }
    }
}

impl FromStr for DesignName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "face" => Ok(DesignName::Face),
            "edge" => Ok(DesignName::Edge),
            "design3" => Ok(DesignName::Design3),
            "design4" => Ok(DesignName::Design4),
            other => Err(Error::Config(format!(
                "unknown design '{other}' (expected face, edge, design3 or design4)"
            ))),
        }
    }
}

/// Declarative description of one subarray (one or two feed instances).
#[derive(Debug, Clone)]
pub struct SubarraySpec<T> {
    pub kind: SubarrayKind,
    /// Two feed instances sharing element positions when true.
    pub dual_polarized: bool,
    /// Feed label for single-polarized subarrays; ignored when dual.
    pub feed: Feed,
    /// Elements along the first and second scan axes.
    pub shape: (usize, usize),
    pub peak_gain_dbi: T,
    pub beamwidth_deg: T,
    /// Steering beams per scan axis (per feed instance).
    pub beam_counts: Vec<usize>,
    /// Largest steering angle per scan axis, degrees.
    pub beam_spans_deg: Vec<T>,
    /// Overrides the module boresight (used by L-shaped modules).
    pub boresight: Option<Direction<T>>,
    /// Scan axes; defaults to `normalize(Z x boresight)` (or +X at the
    /// poles) and `boresight x axis1`.
    pub scan_axes: Option<Vec<[T; 3]>>,
    /// Feed polarization axes, one per feed; defaults to `axis1` and
    /// `boresight x axis1`.
    pub pol_axes: Option<Vec<[T; 3]>>,
    /// Per-element pattern files replacing the synthetic model
    /// (single-polarized subarrays only, one file per element).
    pub pattern_files: Vec<PathBuf>,
}

impl<T: Scalar> SubarraySpec<T> {
    pub fn synthetic(
        kind: SubarrayKind,
        dual_polarized: bool,
        shape: (usize, usize),
        peak_gain_dbi: T,
        beamwidth_deg: T,
        beam_counts: Vec<usize>,
        beam_spans_deg: Vec<T>,
    ) -> Self {
        Self {
            kind,
            dual_polarized,
            feed: Feed::Theta,
            shape,
            peak_gain_dbi,
            beamwidth_deg,
            beam_counts,
            beam_spans_deg,
            boresight: None,
            scan_axes: None,
            pol_axes: None,
            pattern_files: Vec::new(),
        }
    }

    fn with_axes(mut self, axes: Vec<[T; 3]>) -> Self {
        self.scan_axes = Some(axes);
        self
    }

    fn with_feed(mut self, feed: Feed) -> Self {
        self.feed = feed;
        self
    }

    fn with_boresight(mut self, boresight: Direction<T>) -> Self {
        self.boresight = Some(boresight);
        self
    }
}

/// Declarative description of one antenna module.
#[derive(Debug, Clone)]
pub struct ModuleSpec<T> {
    pub placement: Placement,
    pub boresight: Direction<T>,
    pub subarrays: Vec<SubarraySpec<T>>,
}

/// Declarative description of a complete design; built-in designs and
/// user design files both reduce to this.
#[derive(Debug, Clone)]
pub struct DesignSpec<T> {
    pub name: String,
    pub modules: Vec<ModuleSpec<T>>,
}

impl<T: Scalar> DesignSpec<T> {
    /// Instantiates every subarray and samples its element patterns on
    /// `grid`.
    pub fn build(&self, grid: &Arc<SphereGrid<T>>) -> Result<UeDesign<T>> {
        if self.modules.is_empty() {
            return Err(Error::config("design has no modules"));
        }
        let mut modules = Vec::with_capacity(self.modules.len());
        for m in &self.modules {
            if m.subarrays.is_empty() {
                return Err(Error::config("module has no subarrays"));
            }
            let mut subarrays = Vec::new();
            for s in &m.subarrays {
                build_subarray_instances(s, m.boresight, grid, &mut subarrays)?;
            }
            modules.push(AntennaModule {
                placement: m.placement,
                subarrays,
            });
        }
        Ok(UeDesign {
            name: self.name.clone(),
            modules,
        })
    }
}

fn build_subarray_instances<T: Scalar>(
    spec: &SubarraySpec<T>,
    module_boresight: Direction<T>,
    grid: &Arc<SphereGrid<T>>,
    out: &mut Vec<Subarray<T>>,
) -> Result<()> {
    let (n1, n2) = spec.shape;
    if n1 == 0 || n2 == 0 {
        return Err(Error::config("subarray shape must be nonzero"));
    }
    if spec.beam_counts.len() != spec.beam_spans_deg.len() || spec.beam_counts.is_empty() {
        return Err(Error::config(
            "beam_counts and beam_spans_deg must be nonempty and the same length",
        ));
    }

    let boresight = spec.boresight.unwrap_or(module_boresight);
    let bs = boresight.unit_vector();

    let axes = match &spec.scan_axes {
        Some(axes) => {
            let mut normed = Vec::with_capacity(axes.len());
            for a in axes {
                normed.push(
                    geometry::normalize(*a)
                        .ok_or_else(|| Error::config("scan axis must be nonzero"))?,
                );
            }
            normed
        }
        None => default_axes(bs),
    };
    let needed = if n2 > 1 || spec.beam_counts.len() > 1 { 2 } else { 1 };
    if axes.len() < needed {
        return Err(Error::Config(format!(
            "subarray needs {needed} scan axes, got {}",
            axes.len()
        )));
    }

    let positions = element_positions(spec.shape, &axes);
    let beam_plan: Vec<BeamAxisPlan<T>> = spec
        .beam_counts
        .iter()
        .zip(&spec.beam_spans_deg)
        .map(|(&count, &span_deg)| BeamAxisPlan { count, span_deg })
        .collect();

    let pol_defaults = [
        axes[0],
        geometry::normalize(geometry::cross(bs, axes[0]))
            .ok_or_else(|| Error::config("scan axis must not be parallel to boresight"))?,
    ];
    let feeds: Vec<(Feed, [T; 3])> = if spec.dual_polarized {
        match &spec.pol_axes {
            Some(p) if p.len() == 2 => vec![(Feed::Theta, p[0]), (Feed::Phi, p[1])],
            Some(_) => {
                return Err(Error::config(
                    "dual-polarized subarray needs exactly two pol axes",
                ))
            }
            None => vec![(Feed::Theta, pol_defaults[0]), (Feed::Phi, pol_defaults[1])],
        }
    } else {
        let pol = match &spec.pol_axes {
            Some(p) if p.len() == 1 => p[0],
            Some(_) => {
                return Err(Error::config(
                    "single-polarized subarray needs exactly one pol axis",
                ))
            }
            None => pol_defaults[1],
        };
        vec![(spec.feed, pol)]
    };

    if !spec.pattern_files.is_empty() {
        if spec.dual_polarized {
            return Err(Error::config(
                "pattern files apply to single-polarized subarrays only",
            ));
        }
        if spec.pattern_files.len() != positions.len() {
            return Err(Error::Config(format!(
                "expected {} pattern files, got {}",
                positions.len(),
                spec.pattern_files.len()
            )));
        }
    }

    for (feed, pol_axis) in feeds {
        let pol_axis = geometry::normalize(pol_axis)
            .ok_or_else(|| Error::config("polarization axis must be nonzero"))?;
        let mut element_patterns = Vec::with_capacity(positions.len());
        if spec.pattern_files.is_empty() {
            for pos in &positions {
                let pattern = SyntheticPatternSpec::new(
                    spec.kind,
                    boresight,
                    spec.peak_gain_dbi,
                    spec.beamwidth_deg,
                )
                .with_pol_axis(pol_axis)
                .with_position(*pos)
                .build(grid)?;
                element_patterns.push(pattern);
            }
        } else {
            for path in &spec.pattern_files {
                element_patterns.push(rehost_pattern(load_pattern_file(path)?, grid)?);
            }
        }
        out.push(Subarray {
            kind: spec.kind,
            feed,
            boresight,
            positions: positions.clone(),
            pol_axis,
            scan_axes: axes.clone(),
            beam_plan: beam_plan.clone(),
            element_patterns,
        });
    }
    Ok(())
}

/// Moves a loaded pattern onto the shared evaluation grid, rejecting step
/// mismatches.
fn rehost_pattern<T: Scalar>(
    pattern: ElementPattern<T>,
    grid: &Arc<SphereGrid<T>>,
) -> Result<ElementPattern<T>> {
    let own = pattern.grid();
    if own.len() != grid.len()
        || (own.theta_step_deg() - grid.theta_step_deg()).abs() > c(1e-9)
        || (own.phi_step_deg() - grid.phi_step_deg()).abs() > c(1e-9)
    {
        return Err(Error::Config(format!(
            "pattern grid ({} x {}) does not match evaluation grid ({} x {})",
            own.theta_step_deg(),
            own.phi_step_deg(),
            grid.theta_step_deg(),
            grid.phi_step_deg()
        )));
    }
    ElementPattern::new(Arc::clone(grid), pattern.samples().to_vec())
}

fn default_axes<T: Scalar>(boresight: [T; 3]) -> Vec<[T; 3]> {
    let z = [T::zero(), T::zero(), T::one()];
    let axis1 = geometry::normalize(geometry::cross(z, boresight))
        .unwrap_or([T::one(), T::zero(), T::zero()]);
    let axis2 = geometry::normalize(geometry::cross(boresight, axis1)).unwrap_or(z);
    vec![axis1, axis2]
}

fn element_positions<T: Scalar>((n1, n2): (usize, usize), axes: &[[T; 3]]) -> Vec<[T; 3]> {
    let spacing = c::<T>(ELEMENT_SPACING_WL);
    let mut out = Vec::with_capacity(n1 * n2);
    for j in 0..n2 {
        for i in 0..n1 {
            let off1 = (c::<T>(i as f64) - c::<T>((n1 - 1) as f64 / 2.0)) * spacing;
            let mut pos = geometry::scale(axes[0], off1);
            if n2 > 1 {
                let off2 = (c::<T>(j as f64) - c::<T>((n2 - 1) as f64 / 2.0)) * spacing;
                pos = geometry::add(pos, geometry::scale(axes[1], off2));
            }
            out.push(pos);
        }
    }
    out
}

fn dir<T: Scalar>(theta: f64, phi: f64) -> Direction<T> {
    Direction::new(c(theta), c(phi)).expect("preset directions are valid")
}

const X: [f64; 3] = [1.0, 0.0, 0.0];
const Z: [f64; 3] = [0.0, 0.0, 1.0];

fn axis<T: Scalar>(a: [f64; 3]) -> [T; 3] {
    [c(a[0]), c(a[1]), c(a[2])]
}

/// Elemental peak gains, dBi.
const FACE_PATCH_GAIN: f64 = 5.8;
const FACE_DIPOLE_GAIN: f64 = 4.7;
const EDGE_PATCH_GAIN: f64 = 5.5;

/// Element half-power beamwidths, degrees.
const PATCH_BEAMWIDTH: f64 = 90.0;
const DIPOLE_BEAMWIDTH: f64 = 78.0;

fn preset_spec<T: Scalar>(name: DesignName) -> DesignSpec<T> {
    let patch = SubarrayKind::Patch;
    let dipole = SubarrayKind::Dipole;
    match name {
        DesignName::Face => {
            let module = |placement, theta, phi| ModuleSpec {
                placement,
                boresight: dir(theta, phi),
                subarrays: vec![
                    // 2x2 dual-polarized patch: 2 beams per scan plane.
                    SubarraySpec::synthetic(
                        patch,
                        true,
                        (2, 2),
                        c(FACE_PATCH_GAIN),
                        c(PATCH_BEAMWIDTH),
                        vec![2, 2],
                        vec![c(27.5), c(27.5)],
                    )
                    .with_axes(vec![axis(X), axis(Z)]),
                    // 2x1 dipole scanning the X plane.
                    SubarraySpec::synthetic(
                        dipole,
                        false,
                        (2, 1),
                        c(FACE_DIPOLE_GAIN),
                        c(DIPOLE_BEAMWIDTH),
                        vec![2],
                        vec![c(27.0)],
                    )
                    .with_axes(vec![axis(X)])
                    .with_feed(Feed::Theta),
                    // 1x2 dipole scanning the orthogonal Z plane.
                    SubarraySpec::synthetic(
                        dipole,
                        false,
                        (2, 1),
                        c(FACE_DIPOLE_GAIN),
                        c(DIPOLE_BEAMWIDTH),
                        vec![2],
                        vec![c(27.0)],
                    )
                    .with_axes(vec![axis(Z)])
                    .with_feed(Feed::Phi),
                ],
            };
            DesignSpec {
                name: "face".into(),
                modules: vec![
                    module(Placement::Front, 90.0, 90.0),
                    module(Placement::Back, 90.0, 270.0),
                ],
            }
        }
        DesignName::Edge => {
            let patch_4x1 = |axes: Vec<[T; 3]>| {
                SubarraySpec::synthetic(
                    patch,
                    true,
                    (4, 1),
                    c(EDGE_PATCH_GAIN),
                    c(PATCH_BEAMWIDTH),
                    vec![4],
                    vec![c(45.0)],
                )
                .with_axes(axes)
            };
            DesignSpec {
                name: "edge".into(),
                modules: vec![
                    ModuleSpec {
                        placement: Placement::EdgeTop,
                        boresight: dir(0.0, 0.0),
                        subarrays: vec![patch_4x1(vec![axis(X)])],
                    },
                    ModuleSpec {
                        placement: Placement::EdgeRight,
                        boresight: dir(90.0, 0.0),
                        subarrays: vec![patch_4x1(vec![axis(Z)])],
                    },
                    ModuleSpec {
                        placement: Placement::EdgeLeft,
                        boresight: dir(90.0, 180.0),
                        subarrays: vec![patch_4x1(vec![axis(Z)])],
                    },
                ],
            }
        }
        DesignName::Design3 => {
            let module = |placement, theta: f64, phi: f64, a: [f64; 3]| ModuleSpec {
                placement,
                boresight: dir(theta, phi),
                subarrays: vec![
                    SubarraySpec::synthetic(
                        patch,
                        true,
                        (4, 1),
                        c(EDGE_PATCH_GAIN),
                        c(PATCH_BEAMWIDTH),
                        vec![4],
                        vec![c(45.0)],
                    )
                    .with_axes(vec![axis(a)]),
                    SubarraySpec::synthetic(
                        dipole,
                        false,
                        (4, 1),
                        c(FACE_DIPOLE_GAIN),
                        c(DIPOLE_BEAMWIDTH),
                        vec![4],
                        vec![c(45.0)],
                    )
                    .with_axes(vec![axis(a)])
                    .with_feed(Feed::Theta),
                ],
            };
            DesignSpec {
                name: "design3".into(),
                modules: vec![
                    module(Placement::EdgeTop, 0.0, 0.0, X),
                    module(Placement::EdgeBottom, 180.0, 0.0, X),
                    module(Placement::EdgeRight, 90.0, 0.0, Z),
                    module(Placement::EdgeLeft, 90.0, 180.0, Z),
                ],
            }
        }
        DesignName::Design4 => {
            // Four L-shaped corner modules; each side is a 4x1 dual-polarized
            // patch with 3 steering beams per feed.
            let side = |theta: f64, phi: f64, a: [f64; 3]| {
                SubarraySpec::synthetic(
                    patch,
                    true,
                    (4, 1),
                    c(EDGE_PATCH_GAIN),
                    c(PATCH_BEAMWIDTH),
                    vec![3],
                    vec![c(30.0)],
                )
                .with_axes(vec![axis(a)])
                .with_boresight(dir(theta, phi))
            };
            let module = |placement, sides: Vec<SubarraySpec<T>>| ModuleSpec {
                placement,
                // Module boresight is informational; each side overrides it.
                boresight: dir(90.0, 0.0),
                subarrays: sides,
            };
            DesignSpec {
                name: "design4".into(),
                modules: vec![
                    module(
                        Placement::EdgeTop,
                        vec![side(0.0, 0.0, X), side(90.0, 0.0, Z)],
                    ),
                    module(
                        Placement::EdgeRight,
                        vec![side(90.0, 0.0, Z), side(180.0, 0.0, X)],
                    ),
                    module(
                        Placement::EdgeBottom,
                        vec![side(180.0, 0.0, X), side(90.0, 180.0, Z)],
                    ),
                    module(
                        Placement::EdgeLeft,
                        vec![side(90.0, 180.0, Z), side(0.0, 0.0, X)],
                    ),
                ],
            }
        }
    }
}

/// Builds one of the built-in designs on `grid`.
pub fn build_design<T: Scalar>(name: DesignName, grid: &Arc<SphereGrid<T>>) -> Result<UeDesign<T>> {
    preset_spec(name).build(grid)
}
