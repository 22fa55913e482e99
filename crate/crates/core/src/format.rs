//! Textual number formats shared by the JSON and CSV writers.

use num_bigint::BigInt;
use serde::{Serialize, Serializer};

/// Decimal string with 17 significant digits; round-trips every `f64`.
pub fn sig17(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

/// An `f64` that serializes as a 17-significant-digit decimal string.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Num(pub f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&sig17(self.0))
    }
}

impl From<f64> for Num {
    fn from(x: f64) -> Self {
        Num(x)
    }
}

pub fn ser_f64<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&sig17(*x))
}

pub fn ser_f64_pair<S: Serializer>(x: &[f64; 2], s: S) -> Result<S::Ok, S::Error> {
    [sig17(x[0]), sig17(x[1])].serialize(s)
}

pub fn ser_bigint<S: Serializer>(x: &BigInt, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig17_roundtrips() {
        for x in [0.1, 1.0 / 3.0, std::f64::consts::PI, -1.2345e-300, 6.02e23] {
            let s = sig17(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
        assert_eq!(sig17(1.0), "1.0000000000000000e0");
    }
}
