//! Time quantities with mandatory units, written as `"374 us"`.

use std::fmt;
use std::str::FromStr;

use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeUnit {
    S,
    Ms,
    Us,
}

impl TimeUnit {
    fn factor(self) -> f64 {
        match self {
            TimeUnit::S => 1.0,
            TimeUnit::Ms => 1e-3,
            TimeUnit::Us => 1e-6,
        }
    }

    fn suffix(self) -> &'static str {
        match self {
            TimeUnit::S => "s",
            TimeUnit::Ms => "ms",
            TimeUnit::Us => "us",
        }
    }
}

/// A time as written by the user. Keeps the unit so the file round-trips.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Time {
    pub amount: f64,
    pub unit: TimeUnit,
}

impl Time {
    pub fn seconds(s: f64) -> Self {
        Time { amount: s, unit: TimeUnit::S }
    }

    pub fn ms(v: f64) -> Self {
        Time { amount: v, unit: TimeUnit::Ms }
    }

    pub fn us(v: f64) -> Self {
        Time { amount: v, unit: TimeUnit::Us }
    }

    pub fn as_secs(&self) -> f64 {
        self.amount * self.unit.factor()
    }
}

impl fmt::Display for Time {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.amount, self.unit.suffix())
    }
}

impl FromStr for Time {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        let split = s
            .find(|c: char| c.is_alphabetic() || c == 'µ')
            .ok_or_else(|| format!("`{s}` has no unit; write e.g. \"374 us\" (s, ms, us or µs)"))?;
        let (num, unit) = s.split_at(split);
        let unit = match unit.trim() {
            "s" => TimeUnit::S,
            "ms" => TimeUnit::Ms,
            "us" | "µs" | "μs" => TimeUnit::Us,
            other => return Err(format!("unknown time unit `{other}`; use s, ms, us or µs")),
        };
        let amount: f64 = num
            .trim()
            .parse()
            .map_err(|_| format!("`{}` is not a number", num.trim()))?;
        if !amount.is_finite() {
            return Err(format!("`{s}` is not finite"));
        }
        Ok(Time { amount, unit })
    }
}

impl Serialize for Time {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Time {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl de::Visitor<'_> for V {
            type Value = Time;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a time with unit, e.g. \"374 us\"")
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Time, E> {
                v.parse().map_err(E::custom)
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Time, E> {
                Err(E::custom(format!("bare number {v}: time needs a unit (s, ms, us)")))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Time, E> {
                Err(E::custom(format!("bare number {v}: time needs a unit (s, ms, us)")))
            }
        }
        d.deserialize_any(V)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_suffixes() {
        assert_eq!("374 us".parse::<Time>().unwrap().as_secs(), 374.0 * 1e-6);
        assert_eq!("374µs".parse::<Time>().unwrap().unit, TimeUnit::Us);
        assert_eq!("1.984 ms".parse::<Time>().unwrap().as_secs(), 1.984e-3);
        assert_eq!("0.04038 s".parse::<Time>().unwrap().as_secs(), 0.04038);
        assert!("374".parse::<Time>().is_err());
        assert!("3 h".parse::<Time>().is_err());
        assert!("x ms".parse::<Time>().is_err());
    }

    #[test]
    fn display_round_trips() {
        for t in [Time::us(374.0), Time::ms(1.984), Time::seconds(0.1 + 0.2)] {
            assert_eq!(t.to_string().parse::<Time>().unwrap(), t);
        }
    }
}
