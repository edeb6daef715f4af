use super::codec::{Reader, SketchType, Writer};
use crate::error::{invalid, Error, Result};

const FRAC_BITS: i32 = 64;

/// Exact sum of nonnegative values in 64.64 fixed point.
///
/// Each value is truncated to a multiple of `2^-64` once, on entry. After
/// that, addition is exact, so merge order never changes the result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub struct SumCounter {
    total: i128,
}

impl SumCounter {
    pub fn new() -> Self {
        Self::default()
    }

    fn fixed(value: f64) -> Result<i128> {
        if !(value.is_finite() && value >= 0.0) {
            return Err(invalid(format!("sum values must be finite and nonnegative, got {value}")));
        }
        let scaled = value * 2f64.powi(FRAC_BITS);
        if scaled >= 2f64.powi(127) {
            return Err(Error::Overflow);
        }
        Ok(scaled as i128)
    }

    pub fn add(&mut self, value: f64) -> Result<()> {
        self.total = self.total.checked_add(Self::fixed(value)?).ok_or(Error::Overflow)?;
        Ok(())
    }

    pub fn merge(&self, other: &Self) -> Result<Self> {
        Ok(Self {
            total: self.total.checked_add(other.total).ok_or(Error::Overflow)?,
        })
    }

    pub fn value(&self) -> f64 {
        self.total as f64 * 2f64.powi(-FRAC_BITS)
    }

    pub fn raw(&self) -> i128 {
        self.total
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.header(SketchType::Sum, 0, 0, 1);
        w.i128(self.total);
        w.finish()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        let (_, _, count) = r.header(SketchType::Sum)?;
        if count != 1 {
            return Err(Error::Decode("sum counter holds exactly one value".into()));
        }
        let total = r.i128()?;
        if total < 0 {
            return Err(Error::Decode("negative sum".into()));
        }
        r.finish()?;
        Ok(Self { total })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fig2_sum() {
        let mut s = SumCounter::new();
        for _ in 0..10 {
            s.add(1.0).unwrap();
        }
        s.add(5.0).unwrap();
        s.add(5.0).unwrap();
        s.add(10.0).unwrap();
        assert_eq!(s.value(), 30.0);
        assert_eq!(SumCounter::new().value(), 0.0);
    }

    #[test]
    fn merge_adds() {
        let mut a = SumCounter::new();
        a.add(12.0).unwrap();
        let mut b = SumCounter::new();
        b.add(18.0).unwrap();
        assert_eq!(a.merge(&b).unwrap().value(), 30.0);
    }

    #[test]
    fn order_independent_for_fractions() {
        let vals = [0.1, 1e-9, 3.7, 1e6, 0.3];
        let mut a = SumCounter::new();
        let mut b = SumCounter::new();
        for v in vals {
            a.add(v).unwrap();
        }
        for v in vals.iter().rev() {
            b.add(*v).unwrap();
        }
        assert_eq!(a, b);
    }

    #[test]
    fn overflow_and_invalid() {
        let mut s = SumCounter::new();
        assert_eq!(s.add(1e300), Err(Error::Overflow));
        s.add(2f64.powi(62)).unwrap();
        s.add(2f64.powi(61)).unwrap();
        assert_eq!(s.add(2f64.powi(62)), Err(Error::Overflow));
        assert!(s.add(-1.0).is_err());
        assert!(s.add(f64::NAN).is_err());
    }

    #[test]
    fn round_trip() {
        let mut s = SumCounter::new();
        s.add(4.25).unwrap();
        let bytes = s.to_bytes();
        assert_eq!(SumCounter::from_bytes(&bytes).unwrap(), s);
        assert!(SumCounter::from_bytes(&bytes[..bytes.len() - 1]).is_err());
    }
}
