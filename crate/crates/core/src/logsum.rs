//! Streaming log-sum-exp.

/// Running `log(sum_i exp(x_i))` kept as a shift `max` and a compensated
/// sum of `exp(x_i - max)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogSumExp {
    max: f64,
    sum: f64,
    comp: f64,
}

impl Default for LogSumExp {
    fn default() -> Self {
        Self::new()
    }
}

impl LogSumExp {
    pub fn new() -> Self {
        LogSumExp {
            max: f64::NEG_INFINITY,
            sum: 0.0,
            comp: 0.0,
        }
    }

    fn add_scaled(&mut self, v: f64) {
        // Neumaier
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn rescale(&mut self, new_max: f64) {
        let f = (self.max - new_max).exp();
        self.sum *= f;
        self.comp *= f;
        self.max = new_max;
    }

    pub fn push(&mut self, x: f64) {
        if x == f64::NEG_INFINITY {
            return;
        }
        if x > self.max {
            if self.max == f64::NEG_INFINITY {
                self.max = x;
            } else {
                self.rescale(x);
            }
        }
        self.add_scaled((x - self.max).exp());
    }

    /// Adds `weight * exp(x)`, `weight >= 0`.
    pub fn push_weighted(&mut self, x: f64, weight: f64) {
        if weight > 0.0 {
            self.push(x + weight.ln());
        }
    }

    pub fn merge(&mut self, other: &LogSumExp) {
        if other.max == f64::NEG_INFINITY {
            return;
        }
        if self.max == f64::NEG_INFINITY {
            *self = *other;
            return;
        }
        let (hi, lo) = if self.max >= other.max {
            (*self, *other)
        } else {
            (*other, *self)
        };
        let f = (lo.max - hi.max).exp();
        *self = hi;
        self.add_scaled(lo.sum * f);
        self.add_scaled(lo.comp * f);
    }

    pub fn value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + (self.sum + self.comp).ln()
        }
    }

    /// Combines partial sums along a fixed pairwise tree, so the result only
    /// depends on the order of `parts`.
    pub fn tree_merge(parts: &[LogSumExp]) -> LogSumExp {
        match parts.len() {
            0 => LogSumExp::new(),
            1 => parts[0],
            len => {
                let (left, right) = parts.split_at(len / 2);
                let mut acc = Self::tree_merge(left);
                acc.merge(&Self::tree_merge(right));
                acc
            }
        }
    }
}

impl FromIterator<f64> for LogSumExp {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = LogSumExp::new();
        for x in iter {
            acc.push(x);
        }
        acc
    }
}

pub fn log_sum_exp(values: &[f64]) -> f64 {
    values.iter().copied().collect::<LogSumExp>().value()
}
