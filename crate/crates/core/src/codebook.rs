//! RF/analog beam codebook synthesis and beam-management overhead
//! arithmetic.
//!
//! Beams are conjugate-steering vectors: equal amplitudes `1/√N` with each
//! element phase matched to the subarray's response toward the steering
//! target and then snapped to the phase-shifter grid (5 bits by default).
//! Unquantized, such a beam attains the EGC gain at its target; that is the
//! synthesis rule used here in place of any proprietary optimization.
//! Steering targets are spread across each subarray's scanning plane(s)
//! per its beam plan so adjacent beams cross near their half-power contour.
//!
//! Overheads follow the SSB-burst beam-sweep arithmetic: initial
//! acquisition scans one pseudo-omni beam per subarray-polarization
//! instance, two instances at a time (one per RF chain); refinement either
//! rides aperiodic CSI-RS (4-symbol averaging, 14-symbol slots at 60 kHz
//! subcarrier spacing) or extra SSB periods on one polarization.

use std::io::{BufRead, BufReader, Read, Write};
use std::str::FromStr;

use num_complex::Complex;

use crate::antenna::{Feed, Subarray, UeDesign};
use crate::error::{Error, Result};
use crate::geometry::{self, Direction};
use crate::scalar::{c, Scalar};

/// Phase-shifter resolution assumed for generated codebooks.
pub const DEFAULT_PHASE_BITS: u32 = 5;

/// SSB burst-set periodicity, milliseconds.
pub const SSB_PERIOD_MS: f64 = 20.0;

/// Slot duration at 60 kHz subcarrier spacing, milliseconds.
const SLOT_MS: f64 = 0.25;

/// OFDM symbols per slot.
const SYMBOLS_PER_SLOT: f64 = 14.0;

/// Symbols averaged per narrow beam during CSI-RS refinement.
const SYMBOLS_PER_BEAM: f64 = 4.0;

/// One equal-amplitude, phase-quantized steering beam bound to a subarray
/// feed instance.
#[derive(Debug, Clone)]
pub struct Beam<T> {
    pub weights: Vec<Complex<T>>,
    pub subarray_id: usize,
    pub feed: Feed,
    pub boresight: Direction<T>,
}

/// A design's full beam set.
#[derive(Debug, Clone)]
pub struct Codebook<T> {
    pub beams: Vec<Beam<T>>,
    pub design: String,
}

impl<T: Scalar> Codebook<T> {
    pub fn len(&self) -> usize {
        self.beams.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beams.is_empty()
    }
}

/// Snaps each weight's phase to the nearest of `2^bits` uniform levels,
/// keeping magnitudes, then renormalizes to unit norm (a no-op for
/// equal-amplitude inputs).
pub fn quantize_phase<T: Scalar>(weights: &[Complex<T>], bits: u32) -> Result<Vec<Complex<T>>> {
    if bits < 1 {
        return Err(Error::config("phase quantization needs at least 1 bit"));
    }
    let step = c::<T>(2.0) * T::PI() / c((1u64 << bits) as f64);
    let mut out: Vec<Complex<T>> = weights
        .iter()
        .map(|w| {
            let snapped = (w.arg() / step).round() * step;
            Complex::from_polar(w.norm(), snapped)
        })
        .collect();
    let norm = out.iter().map(|w| w.norm_sqr()).sum::<T>().sqrt();
    if norm > T::zero() {
        out.iter_mut().for_each(|w| *w = *w / norm);
    }
    Ok(out)
}

/// Builds the conjugate-steering beam of a subarray toward `target`.
///
/// Element phases are read from the subarray's dominant-polarization
/// response at the grid cell containing the target; `subarray_id` is the
/// design-wide index recorded in the beam.
pub fn steering_beam<T: Scalar>(
    subarray: &Subarray<T>,
    subarray_id: usize,
    target: &Direction<T>,
    phase_bits: u32,
) -> Result<Beam<T>> {
    let n = subarray.num_elements();
    let grid = subarray.element_patterns[0].grid();
    let idx = grid.nearest_index(target);

    let pairs: Vec<_> = subarray
        .element_patterns
        .iter()
        .map(|p| *p.sample(idx))
        .collect();
    let theta_power: T = pairs.iter().map(|p| p.e_theta.norm_sqr()).sum();
    let phi_power: T = pairs.iter().map(|p| p.e_phi.norm_sqr()).sum();
    let use_theta = theta_power >= phi_power;

    let amp = T::one() / c::<T>(n as f64).sqrt();
    let weights: Vec<Complex<T>> = pairs
        .iter()
        .map(|p| {
            let e = if use_theta { p.e_theta } else { p.e_phi };
            let phase = if e.norm() > T::zero() { e.arg() } else { T::zero() };
            Complex::from_polar(amp, phase)
        })
        .collect();

    Ok(Beam {
        weights: quantize_phase(&weights, phase_bits)?,
        subarray_id,
        feed: subarray.feed,
        boresight: *target,
    })
}

/// Steering angles for one scan axis: `count` values uniform over
/// `[-span, span]` degrees (endpoints included), or broadside for a single
/// beam.
fn spread_angles<T: Scalar>(count: usize, span_deg: T) -> Vec<T> {
    match count {
        0 => Vec::new(),
        1 => vec![T::zero()],
        _ => (0..count)
            .map(|i| {
                -span_deg + c::<T>(2.0) * span_deg * c::<T>(i as f64) / c((count - 1) as f64)
            })
            .collect(),
    }
}

/// Generates the design's codebook from each subarray's beam plan.
pub fn generate_design_codebook<T: Scalar>(
    design: &UeDesign<T>,
    phase_bits: u32,
) -> Result<Codebook<T>> {
    let mut beams = Vec::new();
    for (id, sub) in design.subarrays().enumerate() {
        let bs = sub.boresight.unit_vector();
        for (axis_idx, plan) in sub.beam_plan.iter().enumerate() {
            let axis = *sub.scan_axes.get(axis_idx).ok_or_else(|| {
                Error::config("beam plan references a missing scan axis")
            })?;
            for angle_deg in spread_angles(plan.count, plan.span_deg) {
                let a = angle_deg.to_radians();
                let v = geometry::add(
                    geometry::scale(bs, a.cos()),
                    geometry::scale(axis, a.sin()),
                );
                let target = Direction::from_unit_vector(v);
                beams.push(steering_beam(sub, id, &target, phase_bits)?);
            }
        }
    }
    if beams.is_empty() {
        return Err(Error::config("design produced no beams"));
    }
    Ok(Codebook {
        beams,
        design: design.name.clone(),
    })
}

/// Worst-case initial (P-1) beam acquisition overhead in milliseconds:
/// one SSB period per subarray-polarization instance, `rf_chains` scanned
/// in parallel.
pub fn acquisition_overhead<T: Scalar>(
    design: &UeDesign<T>,
    ssb_period_ms: f64,
    rf_chains: u32,
) -> f64 {
    ssb_period_ms * design.num_subarrays() as f64 / rf_chains.max(1) as f64
}

/// Signal used for UE-side (P-3) beam refinement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RefinementMode {
    CsiRs,
    Ssb,
}

/// Worst-case P-3 beam refinement overhead in milliseconds for
/// `narrow_beams` refined beams on the selected subarray's RF chain.
pub fn refinement_overhead(narrow_beams: u32, mode: RefinementMode) -> f64 {
    let narrow_beams = narrow_beams.max(1) as f64;
    match mode {
        RefinementMode::CsiRs => {
            let slots = (SYMBOLS_PER_BEAM * narrow_beams / SYMBOLS_PER_SLOT).ceil();
            slots * SLOT_MS
        }
        RefinementMode::Ssb => SSB_PERIOD_MS * narrow_beams,
    }
}

/// Writes one line per beam:
/// `subarray_id,pol,boresight_theta,boresight_phi,re,im,...` with N
/// weight pairs.
pub fn write_codebook<T: Scalar, W: Write>(codebook: &Codebook<T>, mut out: W) -> Result<()> {
    for beam in &codebook.beams {
        write!(
            out,
            "{},{},{},{}",
            beam.subarray_id,
            beam.feed.label(),
            beam.boresight.theta_deg(),
            beam.boresight.phi_deg()
        )?;
        for w in &beam.weights {
            write!(out, ",{},{}", w.re, w.im)?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Parses a codebook written by [`write_codebook`].
pub fn read_codebook<T: Scalar, R: Read>(reader: R, design: impl Into<String>) -> Result<Codebook<T>> {
    let mut beams = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.trim().split(',').collect();
        if fields.len() < 6 || fields.len() % 2 != 0 {
            return Err(Error::parse(
                line_no,
                "expected 'subarray_id,pol,theta,phi' then re,im weight pairs",
            ));
        }
        let subarray_id: usize = fields[0]
            .parse()
            .map_err(|_| Error::parse(line_no, "bad subarray id"))?;
        let feed = Feed::from_str(fields[1]).map_err(|e| Error::parse(line_no, e.to_string()))?;
        let theta: f64 = fields[2]
            .parse()
            .map_err(|_| Error::parse(line_no, "bad boresight theta"))?;
        let phi: f64 = fields[3]
            .parse()
            .map_err(|_| Error::parse(line_no, "bad boresight phi"))?;
        let mut weights = Vec::new();
        for pair in fields[4..].chunks(2) {
            let re: f64 = pair[0]
                .parse()
                .map_err(|_| Error::parse(line_no, "bad weight real part"))?;
            let im: f64 = pair[1]
                .parse()
                .map_err(|_| Error::parse(line_no, "bad weight imaginary part"))?;
            weights.push(Complex::new(c(re), c(im)));
        }
        beams.push(Beam {
            weights,
            subarray_id,
            feed,
            boresight: Direction::new(c(theta), c(phi))
                .map_err(|e| Error::parse(line_no, e.to_string()))?,
        });
    }
    Ok(Codebook {
        beams,
        design: design.into(),
    })
}
