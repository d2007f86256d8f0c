//! Array-gain schemes evaluated per direction and polarization.
//!
//! Given the per-element responses `E_X,i(θ,φ)` of an N-element subarray in
//! polarization `X`:
//!
//! - MRC: `Σ |E_X,i|²` — the optimum of `|Σ α*_i E_X,i|²` over unit-norm
//!   weights, attained at `α = E_X / ‖E_X‖`.
//! - EGC: `(Σ |E_X,i|)² / N` — the optimum under the equal-amplitude
//!   constraint (phase-only control).
//! - Codebook: `max_j |Σ w*_ij E_X,i|²` over a finite set of unit-norm
//!   beams.
//! - Antenna selection: `max_i |E_X,i|²` over every element of the design.
//!
//! Per direction the two polarizations are combined by summation
//! (`total = G_Θ + G_Φ`); `max_gain` is provided for comparison studies
//! only. MRC/EGC are evaluated per subarray (or per module, behind a
//! switch) and the best group is selected independently per direction and
//! polarization; ties go to the lowest index.

use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex;
use rayon::prelude::*;

use crate::antenna::{ComplexGainPair, Subarray, UeDesign};
use crate::codebook::Codebook;
use crate::coverage::GainMap;
use crate::error::{Error, Result};
use crate::scalar::{c, Scalar};

/// Beamforming scheme selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Mrc,
    Egc,
    Cbk,
    AntSel,
}

impl Scheme {
    pub fn as_str(&self) -> &'static str {
        match self {
            Scheme::Mrc => "mrc",
            Scheme::Egc => "egc",
            Scheme::Cbk => "cbk",
            Scheme::AntSel => "antsel",
        }
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mrc" => Ok(Scheme::Mrc),
            "egc" => Ok(Scheme::Egc),
            "cbk" => Ok(Scheme::Cbk),
            "antsel" => Ok(Scheme::AntSel),
            other => Err(Error::Config(format!(
                "unknown scheme '{other}' (expected mrc, egc, cbk or antsel)"
            ))),
        }
    }
}

/// Element pooling for MRC/EGC: coherent combining within one subarray
/// feed (single RF chain per polarization) or across a whole module.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CombiningScope {
    #[default]
    PerSubarray,
    PerModule,
}

/// MRC array gain `Σ |E_i|²` for one polarization.
pub fn mrc_gain<T: Scalar>(responses: &[Complex<T>]) -> Result<T> {
    if responses.is_empty() {
        return Err(Error::config("mrc_gain needs at least one response"));
    }
    Ok(responses.iter().map(|e| e.norm_sqr()).sum())
}

/// EGC array gain `(Σ |E_i|)² / N` for one polarization.
pub fn egc_gain<T: Scalar>(responses: &[Complex<T>]) -> Result<T> {
    if responses.is_empty() {
        return Err(Error::config("egc_gain needs at least one response"));
    }
    let sum: T = responses.iter().map(|e| e.norm()).sum();
    Ok(sum * sum / c(responses.len() as f64))
}

/// Best-beam gain `max_j |Σ w*_ij E_i|²` over a codebook of unit-norm
/// weight vectors.
pub fn codebook_gain<T: Scalar>(
    weights: &[Vec<Complex<T>>],
    responses: &[Complex<T>],
) -> Result<T> {
    if weights.is_empty() {
        return Err(Error::config("codebook_gain needs at least one beam"));
    }
    let tol = c::<T>(1e-9);
    for w in weights {
        if w.len() != responses.len() {
            return Err(Error::config(
                "weight vector length must match the response count",
            ));
        }
        let norm = w.iter().map(|x| x.norm_sqr()).sum::<T>().sqrt();
        if (norm - T::one()).abs() > tol {
            return Err(Error::Config(format!(
                "weight vector norm {norm} is not 1 within 1e-9"
            )));
        }
    }
    Ok(weights
        .iter()
        .map(|w| beam_output(w, responses).norm_sqr())
        .fold(T::zero(), T::max))
}

/// Single-antenna selection gain `max_i |E_i|²`.
pub fn selection_gain<T: Scalar>(responses: &[Complex<T>]) -> Result<T> {
    if responses.is_empty() {
        return Err(Error::config("selection_gain needs at least one response"));
    }
    Ok(responses
        .iter()
        .map(|e| e.norm_sqr())
        .fold(T::zero(), T::max))
}

/// Selection-diversity metric: sum of the polarization gains.
pub fn total_gain<T: Scalar>(gain_theta: T, gain_phi: T) -> T {
    gain_theta + gain_phi
}

/// Single-polarization alternative metric; underestimates off-boresight
/// performance where both polarizations carry comparable power.
pub fn max_gain<T: Scalar>(gain_theta: T, gain_phi: T) -> T {
    gain_theta.max(gain_phi)
}

/// Beamformed output `Σ w*_i E_i`.
pub(crate) fn beam_output<T: Scalar>(weights: &[Complex<T>], responses: &[Complex<T>]) -> Complex<T> {
    weights
        .iter()
        .zip(responses)
        .map(|(w, e)| w.conj() * e)
        .fold(Complex::new(T::zero(), T::zero()), |acc, x| acc + x)
}

/// Evaluates a design's array gain over its grid.
///
/// Per direction and polarization: MRC/EGC combine within each group
/// (subarray feed, or module when `scope` says so) and keep the best group;
/// the codebook scheme takes the best beam across all subarrays; antenna
/// selection pools every element of the design. `codebook` is required for
/// (and only used by) [`Scheme::Cbk`].
pub fn evaluate_design<T: Scalar>(
    design: &UeDesign<T>,
    scheme: Scheme,
    codebook: Option<&Codebook<T>>,
    scope: CombiningScope,
) -> Result<GainMap<T>> {
    let grid = Arc::clone(design.grid());
    let subs: Vec<&Subarray<T>> = design.subarrays().collect();
    for s in &subs {
        for p in &s.element_patterns {
            if p.grid().len() != grid.len() {
                return Err(Error::config(
                    "all element patterns must share the evaluation grid",
                ));
            }
        }
    }

    // Sample slices per subarray element for tight inner loops.
    let samples: Vec<Vec<&[ComplexGainPair<T>]>> = subs
        .iter()
        .map(|s| s.element_patterns.iter().map(|p| p.samples()).collect())
        .collect();

    // Element groups pooled coherently for MRC/EGC.
    let groups: Vec<Vec<usize>> = match scope {
        CombiningScope::PerSubarray => (0..subs.len()).map(|i| vec![i]).collect(),
        CombiningScope::PerModule => {
            let mut out = Vec::new();
            let mut next = 0;
            for m in &design.modules {
                out.push((next..next + m.subarrays.len()).collect());
                next += m.subarrays.len();
            }
            out
        }
    };

    let beams = match (scheme, codebook) {
        (Scheme::Cbk, Some(cb)) => {
            for beam in &cb.beams {
                let sub = subs.get(beam.subarray_id).ok_or_else(|| {
                    Error::Config(format!(
                        "beam references subarray {} of {}",
                        beam.subarray_id,
                        subs.len()
                    ))
                })?;
                if beam.weights.len() != sub.num_elements() {
                    return Err(Error::config(
                        "beam weight length must match its subarray",
                    ));
                }
            }
            cb.beams.as_slice()
        }
        (Scheme::Cbk, None) => {
            return Err(Error::config("scheme 'cbk' requires a codebook"))
        }
        _ => &[],
    };

    let gains: Vec<(T, T)> = (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let pol = |theta_pol: bool| -> T {
                let response = |s: usize, e: usize| -> Complex<T> {
                    let pair = &samples[s][e][idx];
                    if theta_pol {
                        pair.e_theta
                    } else {
                        pair.e_phi
                    }
                };
                match scheme {
                    Scheme::Mrc => groups
                        .iter()
                        .map(|grp| {
                            grp.iter()
                                .flat_map(|&s| {
                                    (0..subs[s].num_elements())
                                        .map(move |e| response(s, e).norm_sqr())
                                })
                                .sum::<T>()
                        })
                        .fold(T::zero(), T::max),
                    Scheme::Egc => groups
                        .iter()
                        .map(|grp| {
                            let mut n = 0usize;
                            let mut sum = T::zero();
                            for &s in grp {
                                for e in 0..subs[s].num_elements() {
                                    sum += response(s, e).norm();
                                    n += 1;
                                }
                            }
                            sum * sum / c(n as f64)
                        })
                        .fold(T::zero(), T::max),
                    Scheme::Cbk => beams
                        .iter()
                        .map(|beam| {
                            let s = beam.subarray_id;
                            let out = beam
                                .weights
                                .iter()
                                .enumerate()
                                .map(|(e, w)| w.conj() * response(s, e))
                                .fold(Complex::new(T::zero(), T::zero()), |acc, x| acc + x);
                            out.norm_sqr()
                        })
                        .fold(T::zero(), T::max),
                    Scheme::AntSel => (0..subs.len())
                        .flat_map(|s| {
                            (0..subs[s].num_elements()).map(move |e| response(s, e).norm_sqr())
                        })
                        .fold(T::zero(), T::max),
                }
            };
            (pol(true), pol(false))
        })
        .collect();

    let (theta, phi): (Vec<T>, Vec<T>) = gains.into_iter().unzip();
    GainMap::new(grid, Some(scheme), theta, phi)
}
