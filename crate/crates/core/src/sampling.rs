//! Inverse-CDF sampling from a tabulated one-dimensional density.

/// Default number of tabulation points.
pub const DEFAULT_TABLE_POINTS: usize = 10_000;

/// Piecewise-linear density on a uniform grid with its exact cumulative
/// distribution (piecewise quadratic), inverted in closed form per cell.
#[derive(Debug, Clone)]
pub struct TabulatedDistribution {
    lo: f64,
    step: f64,
    density: Vec<f64>,
    cumulative: Vec<f64>,
}

impl TabulatedDistribution {
    /// Tabulate the (unnormalized, non-negative) `density` on `[lo, hi]`.
    ///
    /// Returns `None` when the interval is empty or the density has no mass
    /// on it.
    pub fn new<F>(density: F, lo: f64, hi: f64, points: usize) -> Option<Self>
    where
        F: Fn(f64) -> f64,
    {
        if !(hi > lo) || points < 2 {
            return None;
        }
        let step = (hi - lo) / (points - 1) as f64;
        let values: Vec<f64> = (0..points)
            .map(|i| {
                let x = if i + 1 == points { hi } else { lo + step * i as f64 };
                density(x).max(0.0)
            })
            .collect();
        let mut cumulative = Vec::with_capacity(points);
        let mut acc = 0.0;
        cumulative.push(0.0);
        for w in values.windows(2) {
            acc += 0.5 * step * (w[0] + w[1]);
            cumulative.push(acc);
        }
        if !(acc > 0.0) || !acc.is_finite() {
            return None;
        }
        Some(Self {
            lo,
            step,
            density: values,
            cumulative,
        })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.lo + self.step * (self.density.len() - 1) as f64
    }

    /// Total tabulated mass.
    pub fn mass(&self) -> f64 {
        *self.cumulative.last().expect("table is never empty")
    }

    /// Normalized CDF of the interpolated density.
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= self.lo {
            return 0.0;
        }
        if x >= self.hi() {
            return 1.0;
        }
        let pos = (x - self.lo) / self.step;
        let i = (pos.floor() as usize).min(self.density.len() - 2);
        let dx = x - (self.lo + self.step * i as f64);
        let slope = (self.density[i + 1] - self.density[i]) / self.step;
        (self.cumulative[i] + self.density[i] * dx + 0.5 * slope * dx * dx) / self.mass()
    }

    /// Quantile for `u` in `[0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        let target = u.clamp(0.0, 1.0) * self.mass();
        // last index with cumulative <= target
        let i = match self
            .cumulative
            .binary_search_by(|c| c.partial_cmp(&target).expect("finite table"))
        {
            Ok(i) => i,
            Err(i) => i.saturating_sub(1),
        }
        .min(self.density.len() - 2);
        let remaining = target - self.cumulative[i];
        let f0 = self.density[i];
        let slope = (self.density[i + 1] - f0) / self.step;
        // solve f0 dx + slope dx^2 / 2 = remaining
        let dx = if slope.abs() * remaining <= 1e-12 * f0 * f0 {
            if f0 > 0.0 {
                remaining / f0
            } else {
                0.0
            }
        } else {
            let disc = (f0 * f0 + 2.0 * slope * remaining).max(0.0);
            2.0 * remaining / (f0 + disc.sqrt())
        };
        let x = self.lo + self.step * i as f64 + dx.clamp(0.0, self.step);
        x.min(self.hi())
    }
}
