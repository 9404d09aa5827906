//! Rainflow cycle counting on state-of-charge profiles (four-point rule
//! with residual half-cycles) and equivalent-full-cycle aggregation.

/// One extracted cycle: absolute depth (same unit as the input series) and
/// its count (1.0 for a closed cycle, 0.5 for a residual half-cycle).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cycle {
    pub depth: f64,
    pub count: f64,
}

/// Compresses a series to its turning points (plateaus and interior points
/// of monotone runs removed).
pub fn turning_points(series: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    for &v in series {
        if out.last() == Some(&v) {
            continue;
        }
        while out.len() >= 2 {
            let a = out[out.len() - 2];
            let b = out[out.len() - 1];
            if (b - a).signum() == (v - b).signum() {
                out.pop();
            } else {
                break;
            }
        }
        out.push(v);
    }
    out
}

/// Four-point rainflow extraction. Closed cycles come from any four
/// consecutive turning points whose inner range is enclosed by both
/// neighbours; what remains unwinds into half-cycles.
pub fn rainflow(series: &[f64]) -> Vec<Cycle> {
    let mut cycles = Vec::new();
    let mut stack: Vec<f64> = Vec::new();
    for &point in &turning_points(series) {
        stack.push(point);
        while stack.len() >= 4 {
            let n = stack.len();
            let r1 = (stack[n - 3] - stack[n - 4]).abs();
            let r2 = (stack[n - 2] - stack[n - 3]).abs();
            let r3 = (stack[n - 1] - stack[n - 2]).abs();
            if r2 <= r1 && r2 <= r3 {
                cycles.push(Cycle {
                    depth: r2,
                    count: 1.0,
                });
                stack.remove(n - 2);
                stack.remove(n - 3);
            } else {
                break;
            }
        }
    }
    for pair in stack.windows(2) {
        cycles.push(Cycle {
            depth: (pair[1] - pair[0]).abs(),
            count: 0.5,
        });
    }
    cycles
}

/// Equivalent 100%-depth cycles of a charge profile with a pluggable
/// depth-of-discharge weighting (the depth fraction maps to its full-cycle
/// equivalent).
pub fn count_cycles_weighted(soc: &[f64], b_max: f64, weight: impl Fn(f64) -> f64) -> f64 {
    rainflow(soc)
        .iter()
        .map(|c| c.count * weight(c.depth / b_max))
        .sum()
}

/// Equivalent full cycles under the default linear depth weighting: a cycle
/// of depth `d` (as a fraction of capacity) contributes `d` full cycles.
pub fn count_cycles(soc: &[f64], b_max: f64) -> f64 {
    count_cycles_weighted(soc, b_max, |d| d)
}
