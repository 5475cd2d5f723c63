//! Scalar abstraction shared by the generic numeric routines.

use std::fmt::Debug;

use num_traits::{FromPrimitive, Num, ToPrimitive};

/// A number the metric code can compute with: integers lift into it exactly
/// (for rationals) or by rounding (for floats), and it is totally ordered on
/// the values we produce.
pub trait Scalar:
    Num + Copy + PartialOrd + FromPrimitive + ToPrimitive + Debug + Send + Sync + 'static
{
    /// Lifts a count.
    fn from_count(n: u64) -> Self {
        Self::from_u64(n).expect("count not representable in scalar type")
    }

    /// `num / den` as a scalar.
    fn ratio(num: u64, den: u64) -> Self {
        Self::from_count(num) / Self::from_count(den)
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn abs_diff(self, other: Self) -> Self {
        if self >= other {
            self - other
        } else {
            other - self
        }
    }
}

impl<T> Scalar for T where
    T: Num + Copy + PartialOrd + FromPrimitive + ToPrimitive + Debug + Send + Sync + 'static
{
}

/// Renders a scalar with a fixed number of decimals.
pub fn format_fixed<T: Scalar>(value: T, precision: usize) -> String {
    let v = value.as_f64();
    let s = format!("{v:.precision$}");
    // "-0.0" is not a value we ever mean.
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Exact;

    #[test]
    fn exact_ratio_is_exact() {
        let r: Exact = Scalar::ratio(2, 12);
        assert_eq!(r, Exact::new(1, 6));
        assert_eq!(format_fixed(r, 3), "0.167");
    }

    #[test]
    fn float_ratio() {
        let r: f32 = Scalar::ratio(3, 4);
        assert_eq!(r, 0.75);
        assert_eq!(format_fixed(-0.0001f64, 1), "0.0");
    }
}
