//! Deterministic synthetic market data for demos, benchmarks and tests:
//! hourly two-zone price pairs with a realistic daily shape and skew, plus
//! interconnector flow series in the usual congestion regimes.

/// Tiny deterministic generator (xorshift) so synthetic datasets are
/// reproducible byte-for-byte without pulling a full RNG into the data
/// path.
#[derive(Debug, Clone)]
pub struct Jitter {
    state: u64,
}

impl Jitter {
    pub fn new(seed: u64) -> Self {
        Jitter {
            state: seed ^ 0x9e37_79b9_7f4a_7c15,
        }
    }

    /// Uniform value in `[-1, 1)`.
    #[allow(clippy::should_implement_trait)]
    pub fn next(&mut self) -> f64 {
        self.state ^= self.state << 13;
        self.state ^= self.state >> 7;
        self.state ^= self.state << 17;
        ((self.state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
    }
}

/// Hourly price pair for `days` days with the lower-priced zone A and a
/// skewed, higher-priced zone B. Prices are nonnegative with a morning
/// trough and an evening peak.
pub fn price_pair(days: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
    price_pair_with(days, seed, 14.0, 1.12, 3.0)
}

/// Price pair with explicit daily amplitude around the 40 EUR/MWh mean and
/// an affine zone-B markup (`slope * a + offset`).
pub fn price_pair_with(
    days: usize,
    seed: u64,
    amplitude: f64,
    slope: f64,
    offset: f64,
) -> (Vec<f64>, Vec<f64>) {
    let mut jitter = Jitter::new(seed);
    let hours = 24 * days;
    let mut price_a = Vec::with_capacity(hours);
    let mut price_b = Vec::with_capacity(hours);
    for h in 0..hours {
        let hod = (h % 24) as f64;
        let day = h / 24;
        let weekend = matches!(day % 7, 5 | 6);
        let base = 40.0 - amplitude * ((hod - 4.0) * std::f64::consts::TAU / 24.0).cos();
        let weekly = if weekend { 0.92 } else { 1.0 };
        let a = (base * weekly + 1.5 * jitter.next()).max(1.0);
        let b = (slope * a + offset + 1.2 * jitter.next()).max(1.0);
        price_a.push(a);
        price_b.push(b);
    }
    (price_a, price_b)
}

/// Flow series loaded predominantly toward zone B with occasional
/// saturation in both directions, mirroring a congested interconnector.
pub fn congested_flows(days: usize, l_max: f64, seed: u64) -> Vec<f64> {
    let mut jitter = Jitter::new(seed.wrapping_mul(0x5851_f42d_4c95_7f2d));
    (0..24 * days)
        .map(|h| {
            let hod = (h % 24) as f64;
            let shape = 0.55 + 0.5 * ((hod - 17.0) * std::f64::consts::TAU / 24.0).cos();
            (l_max * (shape + 0.25 * jitter.next())).clamp(-l_max, l_max)
        })
        .collect()
}

/// Flow series pinned at the line limit toward zone B every hour (the
/// fully saturated regime where only reserved capacity admits exports).
pub fn saturated_flows(days: usize, l_max: f64) -> Vec<f64> {
    vec![l_max; 24 * days]
}
