use super::special::student_t_two_sided;
use crate::error::{Error, Result};
use crate::scalar::{mean, Scalar};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationResult<T> {
    pub r: T,
    /// Two-sided p-value of the t test on r with n − 2 degrees of freedom.
    pub p_value: T,
    pub n: usize,
}

/// Pearson correlation with its exact t-distribution p-value.
pub fn pearson<T: Scalar>(x: &[T], y: &[T]) -> Result<CorrelationResult<T>> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch { left: x.len(), right: y.len() });
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::TooShort { needed: 3, got: n });
    }
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (T::zero(), T::zero(), T::zero());
    for (&a, &b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx <= T::zero() {
        return Err(Error::ZeroVariance("x"));
    }
    if syy <= T::zero() {
        return Err(Error::ZeroVariance("y"));
    }
    let r = (sxy / (sxx.sqrt() * syy.sqrt())).max(-T::one()).min(T::one());
    let df = T::from_count(n - 2);
    let one_minus = T::one() - r * r;
    let p_value = if one_minus <= T::zero() {
        T::zero()
    } else {
        student_t_two_sided(r * (df / one_minus).sqrt(), df)
    };
    Ok(CorrelationResult { r, p_value, n })
}
