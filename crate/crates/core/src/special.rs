//! Small numerically careful helpers shared by the distribution and link code.

/// Natural log of the gamma function.
#[inline]
pub fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

/// `ln(y!)`.
#[inline]
pub fn ln_factorial(y: u64) -> f64 {
    statrs::function::factorial::ln_factorial(y)
}

/// `ln(Γ(k + y) / Γ(k))`, exact product form for small `y`.
pub fn ln_rising(k: f64, y: u64) -> f64 {
    if y == 0 {
        return 0.0;
    }
    if y <= 64 {
        // Σ ln(k + j) = y ln k + Σ ln(1 + j/k)
        let lk = k.ln();
        (0..y).map(|j| lk + (j as f64 / k).ln_1p()).sum()
    } else {
        ln_gamma(k + y as f64) - ln_gamma(k)
    }
}

/// `ln(1 - e^x)` for `x <= 0`.
pub fn ln_1m_exp(x: f64) -> f64 {
    if x > -std::f64::consts::LN_2 {
        (-x.exp_m1()).ln()
    } else {
        (-x.exp()).ln_1p()
    }
}

/// `ln(1 + e^x)`.
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// Neumaier compensated sum. Keeps log-likelihood totals stable under row
/// reordering to within an ulp or so.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}
