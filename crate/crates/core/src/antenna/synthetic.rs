//! Parametric cos^q element patterns.
//!
//! These stand in for externally simulated element data. The total gain at
//! angle `ψ` off boresight is `peak·cos^q(ψ)` for `ψ ≤ 90°`, with the
//! exponent `q` solved so the half-power width matches the requested
//! beamwidth, and a floor 20 dB below peak wherever the cosine pattern falls
//! under it (in particular over the entire back hemisphere). The field is
//! linearly polarized along the feed axis projected onto the transverse
//! plane and carries the phase of the element's position offset.

use std::sync::Arc;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::geometry::{self, Direction, SphereGrid};
use crate::scalar::{c, Scalar};
use crate::antenna::{ComplexGainPair, ElementPattern, SubarrayKind};

/// Back-lobe/floor level relative to peak, linear (-20 dB).
const FLOOR_REL: f64 = 1e-2;

/// Full description of one synthetic element.
#[derive(Debug, Clone)]
pub struct SyntheticPatternSpec<T> {
    pub kind: SubarrayKind,
    pub boresight: Direction<T>,
    pub peak_gain_dbi: T,
    pub beamwidth_deg: T,
    /// Feed polarization axis; defaults to the projection of +Z onto the
    /// plane transverse to boresight (+X when boresight is a pole).
    pub pol_axis: Option<[T; 3]>,
    /// Phase center in wavelengths.
    pub position_wavelengths: [T; 3],
}

impl<T: Scalar> SyntheticPatternSpec<T> {
    pub fn new(
        kind: SubarrayKind,
        boresight: Direction<T>,
        peak_gain_dbi: T,
        beamwidth_deg: T,
    ) -> Self {
        Self {
            kind,
            boresight,
            peak_gain_dbi,
            beamwidth_deg,
            pol_axis: None,
            position_wavelengths: [T::zero(); 3],
        }
    }

    pub fn with_pol_axis(mut self, axis: [T; 3]) -> Self {
        self.pol_axis = Some(axis);
        self
    }

    pub fn with_position(mut self, position_wavelengths: [T; 3]) -> Self {
        self.position_wavelengths = position_wavelengths;
        self
    }

    /// Samples the pattern on `grid`.
    pub fn build(&self, grid: &Arc<SphereGrid<T>>) -> Result<ElementPattern<T>> {
        if !(self.beamwidth_deg > T::zero()) || self.beamwidth_deg >= c(180.0) {
            return Err(Error::Config(format!(
                "beamwidth must lie in (0, 180) degrees, got {}",
                self.beamwidth_deg
            )));
        }
        if !(self.peak_gain_dbi.is_finite()) {
            return Err(Error::config("peak gain must be finite"));
        }

        let bs = self.boresight.unit_vector();
        let pol = match self.pol_axis {
            Some(axis) => geometry::normalize(axis)
                .ok_or_else(|| Error::config("polarization axis must be nonzero"))?,
            None => default_pol_axis(bs),
        };

        let peak = c::<T>(10.0).powf(self.peak_gain_dbi / c(10.0));
        let floor = peak * c(FLOOR_REL);
        // cos^q(bw/2) = 1/2 fixes the half-power width.
        let half_bw = (self.beamwidth_deg / c(2.0)).to_radians();
        let q = c::<T>(0.5).ln() / half_bw.cos().ln();
        let two_pi = T::PI() * c(2.0);

        let samples = grid
            .points()
            .iter()
            .map(|d| {
                let v = d.unit_vector();
                let cos_psi = geometry::dot(bs, v).min(T::one()).max(-T::one());
                let shape = if cos_psi > T::zero() {
                    peak * cos_psi.powf(q)
                } else {
                    T::zero()
                };
                let gain = shape.max(floor);
                let phase = two_pi * geometry::dot(self.position_wavelengths, v);
                let field = Complex::from_polar(gain.sqrt(), phase);

                // Project the feed axis onto the transverse plane at v to get
                // the local polarization direction, then decompose onto the
                // spherical basis.
                let radial = geometry::scale(v, geometry::dot(pol, v));
                let e_pol = geometry::normalize(geometry::add(pol, geometry::scale(radial, -T::one())))
                    .unwrap_or_else(|| d.theta_hat());
                let et = field * geometry::dot(e_pol, d.theta_hat());
                let ep = field * geometry::dot(e_pol, d.phi_hat());
                ComplexGainPair::new(et, ep)
            })
            .collect();

        ElementPattern::new(Arc::clone(grid), samples)
    }
}

fn default_pol_axis<T: Scalar>(boresight: [T; 3]) -> [T; 3] {
    let z = [T::zero(), T::zero(), T::one()];
    let radial = geometry::scale(boresight, geometry::dot(z, boresight));
    geometry::normalize(geometry::add(z, geometry::scale(radial, -T::one())))
        .unwrap_or([T::one(), T::zero(), T::zero()])
}

/// Builds a synthetic element pattern with default polarization axis and a
/// phase center at the origin.
pub fn synthetic_element_pattern<T: Scalar>(
    kind: SubarrayKind,
    boresight: Direction<T>,
    peak_gain_dbi: T,
    beamwidth_deg: T,
    grid: &Arc<SphereGrid<T>>,
) -> Result<ElementPattern<T>> {
    SyntheticPatternSpec::new(kind, boresight, peak_gain_dbi, beamwidth_deg).build(grid)
}
