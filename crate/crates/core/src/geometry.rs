//! Spherical directions, uniform angular grids, and solid-angle quadrature.
//!
//! Conventions: `theta` is the zenith angle from +Z and `phi` the azimuth
//! from +X, both in degrees at the API boundary (`theta` in `[0, 180]`,
//! `phi` wrapped into `[0, 360)`). Internally angles are converted to
//! radians. The unit vector of a direction is
//! `[sin(theta)cos(phi), sin(theta)sin(phi), cos(theta)]`.
//!
//! All types are immutable after construction and the operations are pure,
//! so grids and directions can be shared freely across parallel workers.

use crate::error::{Error, Result};
use crate::scalar::{c, Scalar};

/// A point on the unit sphere, stored in degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction<T> {
    theta_deg: T,
    phi_deg: T,
}

impl<T: Scalar> Direction<T> {
    /// Builds a direction; `phi` wraps into `[0, 360)` (e.g. -40 becomes
    /// 320), `theta` outside `[0, 180]` is rejected.
    pub fn new(theta_deg: T, phi_deg: T) -> Result<Self> {
        if !(theta_deg >= T::zero() && theta_deg <= c(180.0)) || !theta_deg.is_finite() {
            return Err(Error::Config(format!(
                "theta must lie in [0, 180] degrees, got {theta_deg}"
            )));
        }
        if !phi_deg.is_finite() {
            return Err(Error::config("phi must be finite"));
        }
        Ok(Self {
            theta_deg,
            phi_deg: wrap_deg(phi_deg),
        })
    }

    /// Direction of a (not necessarily normalized) Cartesian vector.
    pub fn from_unit_vector(v: [T; 3]) -> Self {
        let norm = dot(v, v).sqrt();
        let z = if norm > T::zero() { v[2] / norm } else { T::one() };
        let theta = z.min(T::one()).max(-T::one()).acos();
        let phi = v[1].atan2(v[0]);
        Self {
            theta_deg: theta.to_degrees(),
            phi_deg: wrap_deg(phi.to_degrees()),
        }
    }

    pub fn theta_deg(&self) -> T {
        self.theta_deg
    }

    pub fn phi_deg(&self) -> T {
        self.phi_deg
    }

    pub fn theta_rad(&self) -> T {
        self.theta_deg.to_radians()
    }

    pub fn phi_rad(&self) -> T {
        self.phi_deg.to_radians()
    }

    /// Cartesian unit vector `[sinθcosφ, sinθsinφ, cosθ]`.
    pub fn unit_vector(&self) -> [T; 3] {
        let (st, ct) = (self.theta_rad().sin(), self.theta_rad().cos());
        let (sp, cp) = (self.phi_rad().sin(), self.phi_rad().cos());
        [st * cp, st * sp, ct]
    }

    /// Unit vector of increasing theta at this direction.
    pub fn theta_hat(&self) -> [T; 3] {
        let (st, ct) = (self.theta_rad().sin(), self.theta_rad().cos());
        let (sp, cp) = (self.phi_rad().sin(), self.phi_rad().cos());
        [ct * cp, ct * sp, -st]
    }

    /// Unit vector of increasing phi at this direction.
    pub fn phi_hat(&self) -> [T; 3] {
        let (sp, cp) = (self.phi_rad().sin(), self.phi_rad().cos());
        [-sp, cp, T::zero()]
    }

    /// Great-circle angle to another direction, in degrees.
    pub fn angle_to(&self, other: &Self) -> T {
        let d = dot(self.unit_vector(), other.unit_vector());
        d.min(T::one()).max(-T::one()).acos().to_degrees()
    }
}

fn wrap_deg<T: Scalar>(phi: T) -> T {
    let full: T = c(360.0);
    let mut w = phi % full;
    if w < T::zero() {
        w += full;
    }
    // `-1e-15 % 360 + 360` rounds to 360.0 exactly; fold it back.
    if w >= full {
        w -= full;
    }
    w
}

/// Uniform `(theta, phi)` grid of cell centers with per-cell solid angles.
///
/// Cell centers sit at `((k+1/2)·Δθ, (m+1/2)·Δφ)` in theta-major order. The
/// weight of a cell is the exact integral of `sin(θ) dθ dφ` over the cell,
/// `Δφ·(cos θ_lo − cos θ_hi)`, equal to `sin(θ_c)·Δθ·Δφ` up to O(Δθ²).
/// The exact form makes the weights sum to 4π without discretization error
/// and splits hemispheres exactly whenever `Δθ` divides 90.
#[derive(Debug, Clone)]
pub struct SphereGrid<T> {
    theta_step_deg: T,
    phi_step_deg: T,
    n_theta: usize,
    n_phi: usize,
    points: Vec<Direction<T>>,
    weights: Vec<T>,
}

/// Builds a uniform grid. Both steps must divide their full span (180° for
/// theta, 360° for phi).
pub fn make_grid<T: Scalar>(theta_step_deg: T, phi_step_deg: T) -> Result<SphereGrid<T>> {
    let n_theta = subdivisions(theta_step_deg, 180.0, "theta_step")?;
    let n_phi = subdivisions(phi_step_deg, 360.0, "phi_step")?;

    let half = c::<T>(0.5);
    let mut points = Vec::with_capacity(n_theta * n_phi);
    let mut weights = Vec::with_capacity(n_theta * n_phi);
    for k in 0..n_theta {
        let kf = c::<T>(k as f64);
        let theta_lo = kf * theta_step_deg;
        let theta_hi = (kf + T::one()) * theta_step_deg;
        let theta_c = (kf + half) * theta_step_deg;
        let row_weight =
            phi_step_deg.to_radians() * (theta_lo.to_radians().cos() - theta_hi.to_radians().cos());
        for m in 0..n_phi {
            let phi_c = (c::<T>(m as f64) + half) * phi_step_deg;
            points.push(Direction {
                theta_deg: theta_c,
                phi_deg: phi_c,
            });
            weights.push(row_weight);
        }
    }

    Ok(SphereGrid {
        theta_step_deg,
        phi_step_deg,
        n_theta,
        n_phi,
        points,
        weights,
    })
}

fn subdivisions<T: Scalar>(step: T, span: f64, name: &str) -> Result<usize> {
    if !(step > T::zero()) || !step.is_finite() {
        return Err(Error::Config(format!("{name} must be positive, got {step}")));
    }
    let step = step.to_f64().expect("scalar converts to f64");
    let n = (span / step).round();
    if n < 1.0 || (n * step - span).abs() > 1e-9 {
        return Err(Error::Config(format!(
            "{name} = {step} does not divide {span} degrees"
        )));
    }
    Ok(n as usize)
}

impl<T: Scalar> SphereGrid<T> {
    pub fn theta_step_deg(&self) -> T {
        self.theta_step_deg
    }

    pub fn phi_step_deg(&self) -> T {
        self.phi_step_deg
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn n_phi(&self) -> usize {
        self.n_phi
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Cell centers, theta-major.
    pub fn points(&self) -> &[Direction<T>] {
        &self.points
    }

    /// Per-cell solid angles in steradians, aligned with `points`.
    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn point(&self, index: usize) -> &Direction<T> {
        &self.points[index]
    }

    /// Flat index of the grid cell at theta row `k`, phi column `m`.
    pub fn index_of(&self, k: usize, m: usize) -> usize {
        k * self.n_phi + m
    }

    /// Index of the cell containing (or nearest to) a direction.
    pub fn nearest_index(&self, d: &Direction<T>) -> usize {
        let k = (d.theta_deg() / self.theta_step_deg)
            .floor()
            .to_usize()
            .unwrap_or(0)
            .min(self.n_theta - 1);
        let m = (d.phi_deg() / self.phi_step_deg)
            .floor()
            .to_usize()
            .unwrap_or(0)
            .min(self.n_phi - 1);
        self.index_of(k, m)
    }

    /// Total solid angle of the grid; 4π up to rounding.
    pub fn total_solid_angle(&self) -> T {
        self.weights.iter().copied().sum()
    }

    /// Quadrature of a per-direction scalar field: `Σ f(p)·weight(p)`.
    pub fn integrate<F>(&self, f: F) -> T
    where
        F: Fn(&Direction<T>) -> T,
    {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(p, &w)| f(p) * w)
            .sum()
    }
}

pub(crate) fn dot<T: Scalar>(a: [T; 3], b: [T; 3]) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross<T: Scalar>(a: [T; 3], b: [T; 3]) -> [T; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn scale<T: Scalar>(a: [T; 3], s: T) -> [T; 3] {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub(crate) fn add<T: Scalar>(a: [T; 3], b: [T; 3]) -> [T; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub(crate) fn norm<T: Scalar>(a: [T; 3]) -> T {
    dot(a, a).sqrt()
}

pub(crate) fn normalize<T: Scalar>(a: [T; 3]) -> Option<[T; 3]> {
    let n = norm(a);
    if n > c(1e-12) {
        Some(scale(a, T::one() / n))
    } else {
        None
    }
}
