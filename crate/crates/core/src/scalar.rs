use std::fmt::Debug;

use num_traits::{FromPrimitive, Num, Signed, ToPrimitive};

/// Number type for probability tables and estimand evaluation. Implemented
/// for `f32`, `f64` and exact `BigRational`.
pub trait Scalar:
    Num + Signed + Clone + PartialOrd + FromPrimitive + ToPrimitive + Debug + Send + Sync + 'static
{
    /// Converts a probability produced by the seeded generator. Exact for
    /// rationals, rounding for `f32`.
    fn from_probability(p: f64) -> Self {
        Self::from_f64(p).expect("finite probability")
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Scalar for T where
    T: Num
        + Signed
        + Clone
        + PartialOrd
        + FromPrimitive
        + ToPrimitive
        + Debug
        + Send
        + Sync
        + 'static
{
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    #[test]
    fn rational_conversion_is_exact() {
        let r = BigRational::from_probability(0.1);
        assert_eq!(r.to_f64_lossy(), 0.1);
        assert_ne!(r, BigRational::new(1.into(), 10.into()));
    }
}
