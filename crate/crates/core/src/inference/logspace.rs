/// Streaming log-sum-exp.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LogSum {
    max: f64,
    sum: f64,
}

impl LogSum {
    pub(crate) fn new() -> Self {
        LogSum {
            max: f64::NEG_INFINITY,
            sum: 0.0,
        }
    }

    pub(crate) fn add(&mut self, x: f64) {
        if x == f64::NEG_INFINITY {
            return;
        }
        if x <= self.max {
            self.sum += (x - self.max).exp();
        } else {
            self.sum = self.sum * (self.max - x).exp() + 1.0;
            self.max = x;
        }
    }

    pub(crate) fn value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.sum.ln()
        }
    }
}

pub(crate) fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// Shifts `xs` so that it is a normalized log-distribution.
pub(crate) fn normalize_log(xs: &mut [f64]) {
    let z = log_sum_exp(xs);
    for x in xs.iter_mut() {
        *x -= z;
    }
}

pub(crate) fn to_probs(log: &[f64]) -> Vec<f64> {
    let z = log_sum_exp(log);
    let mut p: Vec<f64> = log.iter().map(|x| (x - z).exp()).collect();
    let s: f64 = p.iter().sum();
    for x in &mut p {
        *x /= s;
    }
    p
}

/// Log-indicator of the observed value, or all zeros without evidence.
pub(crate) fn evidence_log(size: usize, evidence: Option<usize>) -> Vec<f64> {
    match evidence {
        None => vec![0.0; size],
        Some(e) => (0..size)
            .map(|x| if x == e { 0.0 } else { f64::NEG_INFINITY })
            .collect(),
    }
}
