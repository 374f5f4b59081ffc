//! Small floating-point helpers shared across modules.

/// Accumulates `sum exp(l_i)` for log-magnitudes `l_i` without overflow.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LogSum {
    scale: f64,
    sum: f64,
}

impl LogSum {
    pub fn new() -> Self {
        LogSum {
            scale: f64::NEG_INFINITY,
            sum: 0.0,
        }
    }

    pub fn add(&mut self, log_value: f64) {
        if log_value == f64::NEG_INFINITY {
            return;
        }
        if log_value > self.scale {
            self.sum = self.sum * (self.scale - log_value).exp() + 1.0;
            self.scale = log_value;
        } else {
            self.sum += (log_value - self.scale).exp();
        }
    }

    pub fn ln(&self) -> f64 {
        if self.sum == 0.0 {
            f64::NEG_INFINITY
        } else {
            self.scale + self.sum.ln()
        }
    }
}

/// Neumaier compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

pub(crate) fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.round()
}
