use crate::error::{Error, Result};

/// `gap[s−1] = σ_s − σ_{s+1}` for `s = 1..=len`, with `σ_{len+1} = 0`.
pub fn singular_gaps(singular_values: &[f64]) -> Result<Vec<f64>> {
    if let Some(bad) = singular_values.iter().find(|v| !v.is_finite() || **v < 0.0) {
        return Err(Error::validation(format!(
            "singular values must be finite and nonnegative, got {bad}"
        )));
    }
    if let Some(i) = singular_values.windows(2).position(|w| w[0] < w[1]) {
        return Err(Error::validation(format!(
            "singular values increase at position {}: {} < {}",
            i + 1,
            singular_values[i],
            singular_values[i + 1]
        )));
    }
    let next = singular_values.iter().skip(1).copied().chain(std::iter::once(0.0));
    Ok(singular_values.iter().zip(next).map(|(a, b)| a - b).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trailing_zero_convention() {
        assert_eq!(singular_gaps(&[10.0, 1.0, 0.5]).unwrap(), vec![9.0, 0.5, 0.5]);
        assert_eq!(singular_gaps(&[5.0, 5.0, 5.0]).unwrap(), vec![0.0, 0.0, 5.0]);
        assert_eq!(singular_gaps(&[2.5]).unwrap(), vec![2.5]);
        assert!(singular_gaps(&[]).unwrap().is_empty());
    }

    #[test]
    fn rejects_increasing_or_negative() {
        assert!(singular_gaps(&[1.0, 2.0]).is_err());
        assert!(singular_gaps(&[1.0, -0.5]).is_err());
    }
}
