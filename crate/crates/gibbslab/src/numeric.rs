//! Small numerical helpers for log-domain probability arithmetic.

/// Log-sum-exp of a slice, shifted by the maximum to avoid overflow.
///
/// Returns `f64::NEG_INFINITY` for an empty slice.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    let sum: f64 = values.iter().map(|&v| (v - max).exp()).sum();
    max + sum.ln()
}

/// Two-argument log-sum-exp.
#[inline]
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY && b == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if a > b {
        a + (b - a).exp().ln_1p()
    } else {
        b + (a - b).exp().ln_1p()
    }
}

/// Format a float with 15 significant digits for text and CSV output.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.14e}")
}

/// Sum a table over contiguous blocks: the pushforward of a probability
/// table onto its leading digits.
pub(crate) fn project_blocks(table: &[f64], factor: usize) -> Vec<f64> {
    table
        .chunks_exact(factor)
        .map(|chunk| chunk.iter().sum())
        .collect()
}
