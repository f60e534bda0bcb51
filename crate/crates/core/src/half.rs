use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A half-integer stored as twice its value, used for `j` and `m_j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Half(pub i32);

impl Half {
    pub fn from_f64(x: f64) -> Option<Half> {
        let twice = (2.0 * x).round();
        ((2.0 * x - twice).abs() < 1e-9).then_some(Half(twice as i32))
    }

    pub fn value(self) -> f64 {
        f64::from(self.0) / 2.0
    }

    pub fn twice(self) -> i32 {
        self.0
    }

    pub fn is_half_odd(self) -> bool {
        self.0.rem_euclid(2) == 1
    }
}

impl fmt::Display for Half {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

impl Serialize for Half {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.value())
    }
}

impl<'de> Deserialize<'de> for Half {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let x = f64::deserialize(d)?;
        Half::from_f64(x).ok_or_else(|| serde::de::Error::custom(format!("{x} is not a half-integer")))
    }
}
