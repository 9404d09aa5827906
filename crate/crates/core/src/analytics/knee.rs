//! Blocking-level selection: the knee of the payback-versus-blocking curve
//! (maximum distance to the chord of the normalized curve) and the
//! calendar-life crossing.

use serde::Serialize;

/// Outcome of a blocking-level selection.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BlockSelection {
    pub b_block: f64,
    /// Payback at the selected level (interpolated where applicable).
    pub spp_years: f64,
    /// False when the rule could not produce a meaningful level (flat knee
    /// curve, or payback above the calendar life everywhere).
    pub viable: bool,
    /// The calendar-life rule crossed between grid points.
    pub interpolated: bool,
    /// A non-monotone curve produced several crossings; the first was used.
    pub ambiguous: bool,
}

/// Knee point: normalize both axes to the unit square and take the point of
/// maximum perpendicular distance from the chord joining the first and last
/// curve points. A collinear curve yields the smallest level with
/// `viable = false`.
pub fn select_blocking_m1(blocks: &[f64], spp: &[f64]) -> BlockSelection {
    assert_eq!(blocks.len(), spp.len());
    // Only the finite-payback portion of the curve carries shape information.
    let finite = spp.iter().take_while(|s| s.is_finite()).count();
    let (blocks, spp) = (&blocks[..finite], &spp[..finite]);
    let fallback = BlockSelection {
        b_block: blocks.first().copied().unwrap_or(0.0),
        spp_years: spp.first().copied().unwrap_or(f64::INFINITY),
        viable: false,
        interpolated: false,
        ambiguous: false,
    };
    if blocks.len() < 3 {
        return fallback;
    }
    let (x_lo, x_hi) = min_max(blocks);
    let (y_lo, y_hi) = min_max(spp);
    if x_hi - x_lo <= 0.0 || y_hi - y_lo <= 0.0 {
        return fallback;
    }
    let norm = |v: f64, lo: f64, hi: f64| (v - lo) / (hi - lo);
    let first = (norm(blocks[0], x_lo, x_hi), norm(spp[0], y_lo, y_hi));
    let last = (
        norm(blocks[blocks.len() - 1], x_lo, x_hi),
        norm(spp[blocks.len() - 1], y_lo, y_hi),
    );
    let chord = (last.0 - first.0, last.1 - first.1);
    let chord_len = (chord.0 * chord.0 + chord.1 * chord.1).sqrt();
    if chord_len <= 0.0 {
        return fallback;
    }
    let mut best: Option<(usize, f64)> = None;
    for i in 1..blocks.len() - 1 {
        let p = (
            norm(blocks[i], x_lo, x_hi) - first.0,
            norm(spp[i], y_lo, y_hi) - first.1,
        );
        let dist = (chord.0 * p.1 - chord.1 * p.0).abs() / chord_len;
        if best.is_none_or(|(_, d)| dist > d) {
            best = Some((i, dist));
        }
    }
    match best {
        Some((i, d)) if d > 1e-9 => BlockSelection {
            b_block: blocks[i],
            spp_years: spp[i],
            viable: true,
            interpolated: false,
            ambiguous: false,
        },
        _ => fallback,
    }
}

/// Calendar-life rule: the largest blocking level whose payback still fits
/// within the battery's calendar life, linearly interpolated between the
/// bracketing sweep points. Payback above the life everywhere selects zero
/// blocking and flags non-viability.
pub fn select_blocking_m2(blocks: &[f64], spp: &[f64], calendar_life: f64) -> BlockSelection {
    assert_eq!(blocks.len(), spp.len());
    assert!(!blocks.is_empty());
    if spp[0] > calendar_life {
        return BlockSelection {
            b_block: 0.0,
            spp_years: spp[0],
            viable: false,
            interpolated: false,
            ambiguous: false,
        };
    }
    let mut crossing: Option<(f64, bool)> = None;
    let mut crossings = 0usize;
    for i in 0..blocks.len() - 1 {
        if spp[i] <= calendar_life && spp[i + 1] > calendar_life {
            crossings += 1;
            if crossing.is_none() {
                let t = if spp[i + 1].is_finite() {
                    (calendar_life - spp[i]) / (spp[i + 1] - spp[i])
                } else {
                    0.0
                };
                crossing = Some((blocks[i] + t * (blocks[i + 1] - blocks[i]), t > 0.0));
            }
        }
    }
    match crossing {
        Some((b, interpolated)) => BlockSelection {
            b_block: b,
            spp_years: calendar_life,
            viable: true,
            interpolated,
            ambiguous: crossings > 1,
        },
        // Payback never exceeds the calendar life on the grid: the largest
        // swept level is admissible.
        None => BlockSelection {
            b_block: *blocks.last().unwrap(),
            spp_years: *spp.last().unwrap(),
            viable: true,
            interpolated: false,
            ambiguous: false,
        },
    }
}

fn min_max(values: &[f64]) -> (f64, f64) {
    values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |acc, v| {
            (acc.0.min(*v), acc.1.max(*v))
        })
}
