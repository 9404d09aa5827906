//! Operating envelopes: per-timestep admissible ranges for the battery's
//! grid-B exchange, derived from interconnector capacity and prevailing flow.
//!
//! Sign convention, fixed once for the whole crate: positive flow means
//! injection from grid A (Belgium) toward grid B (UK). Battery charging from
//! grid B adds flow in the negative direction, discharging adds positive
//! flow.

use chrono::{DateTime, Utc};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EnvelopeError {
    #[error("line capacity must be positive, got {0}")]
    BadCapacity(f64),
    #[error("flow series contains a non-finite value at step {0}")]
    NonFiniteFlow(usize),
    #[error("reserved capacity must be nonnegative, got {0}")]
    NegativeReservation(f64),
    #[error("series length mismatch: {left} vs {right}")]
    ShapeMismatch { left: usize, right: usize },
}

/// An interconnector (or one side of a shared link) with its capacity and
/// the exogenous flow already scheduled on it.
#[derive(Debug, Clone)]
pub struct LinkState {
    /// Capacity in MW.
    pub l_max: f64,
    /// Prevailing flow in MW, positive toward grid B.
    pub flow: Vec<f64>,
    /// Transmission efficiency of the link.
    pub eta_line: f64,
}

impl LinkState {
    pub fn new(l_max: f64, flow: Vec<f64>, eta_line: f64) -> Result<Self, EnvelopeError> {
        if !(l_max > 0.0) {
            return Err(EnvelopeError::BadCapacity(l_max));
        }
        if let Some(i) = flow.iter().position(|v| !v.is_finite()) {
            return Err(EnvelopeError::NonFiniteFlow(i));
        }
        Ok(LinkState {
            l_max,
            flow,
            eta_line,
        })
    }
}

/// Admissible per-timestep range for the grid-B exchange variable (MWh).
/// Always contains zero and is contained in the ramp box.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatingEnvelope {
    pub x_min_adj: Vec<f64>,
    pub x_max_adj: Vec<f64>,
}

impl OperatingEnvelope {
    pub fn len(&self) -> usize {
        self.x_min_adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x_min_adj.is_empty()
    }

    /// Full availability: the envelope equals the ramp box everywhere.
    pub fn unconstrained(n: usize, x_min: f64, x_max: f64) -> Self {
        OperatingEnvelope {
            x_min_adj: vec![x_min; n],
            x_max_adj: vec![x_max; n],
        }
    }

    /// Grid B unreachable: the exchange variable is pinned to zero.
    pub fn blocked(n: usize) -> Self {
        OperatingEnvelope {
            x_min_adj: vec![0.0; n],
            x_max_adj: vec![0.0; n],
        }
    }

    /// Per-timestep interval intersection.
    pub fn intersect(&self, other: &OperatingEnvelope) -> Result<Self, EnvelopeError> {
        if self.len() != other.len() {
            return Err(EnvelopeError::ShapeMismatch {
                left: self.len(),
                right: other.len(),
            });
        }
        Ok(OperatingEnvelope {
            x_min_adj: self
                .x_min_adj
                .iter()
                .zip(&other.x_min_adj)
                .map(|(a, b)| a.max(*b))
                .collect(),
            x_max_adj: self
                .x_max_adj
                .iter()
                .zip(&other.x_max_adj)
                .map(|(a, b)| a.min(*b))
                .collect(),
        })
    }

    /// CSV rendering (`timestamp,x_min_adj,x_max_adj`); hour indices are used
    /// when no timestamps are supplied.
    pub fn to_csv(&self, timestamps: Option<&[DateTime<Utc>]>) -> String {
        let mut out = String::from("timestamp,x_min_adj,x_max_adj\n");
        for i in 0..self.len() {
            let stamp = match timestamps {
                Some(ts) => ts[i].format("%Y-%m-%dT%H:%M:%SZ").to_string(),
                None => i.to_string(),
            };
            out.push_str(&format!(
                "{},{},{}\n",
                stamp, self.x_min_adj[i], self.x_max_adj[i]
            ));
        }
        out
    }
}

fn envelope_bounds(flow: f64, l_max: f64, x_min: f64, x_max: f64) -> (f64, f64) {
    if flow < 0.0 {
        let hi = 0.0f64.max(x_max.min(l_max + flow));
        (x_min, hi)
    } else {
        let lo = 0.0f64.min(x_min.max(-l_max + flow));
        (lo, x_max)
    }
}

/// Envelope for a single interconnector between the two grids.
pub fn envelope_single_link(
    link: &LinkState,
    x_min: f64,
    x_max: f64,
) -> Result<OperatingEnvelope, EnvelopeError> {
    if !(link.l_max > 0.0) {
        return Err(EnvelopeError::BadCapacity(link.l_max));
    }
    let mut lo = Vec::with_capacity(link.flow.len());
    let mut hi = Vec::with_capacity(link.flow.len());
    for &f in &link.flow {
        let (l, h) = envelope_bounds(f, link.l_max, x_min, x_max);
        lo.push(l);
        hi.push(h);
    }
    Ok(OperatingEnvelope {
        x_min_adj: lo,
        x_max_adj: hi,
    })
}

/// Envelope for a two-sided shared link (hybrid offshore asset): the
/// intersection of the grid-A-side and grid-B-side operating regions.
pub fn envelope_hoa(
    link_be: &LinkState,
    link_uk: &LinkState,
    x_min: f64,
    x_max: f64,
) -> Result<OperatingEnvelope, EnvelopeError> {
    if link_be.flow.len() != link_uk.flow.len() {
        return Err(EnvelopeError::ShapeMismatch {
            left: link_be.flow.len(),
            right: link_uk.flow.len(),
        });
    }
    let be = envelope_single_link(link_be, x_min, x_max)?;
    let uk = envelope_single_link(link_uk, x_min, x_max)?;
    be.intersect(&uk)
}

/// Widens the envelope so both bounds admit at least +/- `reserved` MWh,
/// clipped to the ramp box. Models a firm physical transmission right held
/// regardless of market flows.
pub fn reserve_capacity(
    envelope: &OperatingEnvelope,
    reserved: f64,
    x_min: f64,
    x_max: f64,
) -> Result<OperatingEnvelope, EnvelopeError> {
    if reserved < 0.0 {
        return Err(EnvelopeError::NegativeReservation(reserved));
    }
    Ok(OperatingEnvelope {
        x_min_adj: envelope
            .x_min_adj
            .iter()
            .map(|&lo| x_min.max(lo.min(-reserved)))
            .collect(),
        x_max_adj: envelope
            .x_max_adj
            .iter()
            .map(|&hi| x_max.min(hi.max(reserved)))
            .collect(),
    })
}
