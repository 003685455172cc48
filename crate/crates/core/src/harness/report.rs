use serde::{Deserialize, Serialize};

/// Pass condition of one measurement.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    AtMost(f64),
    AtLeast(f64),
    Between(f64, f64),
    /// Exact equality with the stated value.
    Equals(String),
    /// Must be finite.
    Finite,
}

impl Bound {
    pub fn holds(&self, v: f64) -> bool {
        match self {
            Bound::AtMost(t) => v <= *t,
            Bound::AtLeast(t) => v >= *t,
            Bound::Between(lo, hi) => *lo <= v && v <= *hi,
            Bound::Equals(_) => false,
            Bound::Finite => v.is_finite(),
        }
    }

    /// 0 at the most comfortable value, 1 at the edge, above 1 outside.
    fn load(&self, v: f64, pass: bool) -> f64 {
        if !pass {
            return f64::INFINITY;
        }
        match self {
            Bound::AtMost(t) if *t == 0.0 => 0.0,
            Bound::AtMost(t) => v / t,
            Bound::AtLeast(t) => t / v,
            Bound::Between(lo, hi) => {
                let half = 0.5 * (hi - lo);
                1.0 - (v - lo).min(hi - v) / half
            }
            Bound::Equals(_) | Bound::Finite => 0.0,
        }
    }
}

impl std::fmt::Display for Bound {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Bound::AtMost(t) => write!(f, "<= {t:e}"),
            Bound::AtLeast(t) => write!(f, ">= {t}"),
            Bound::Between(lo, hi) => write!(f, "in [{lo}, {hi}]"),
            Bound::Equals(s) => write!(f, "== {s}"),
            Bound::Finite => write!(f, "finite"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub label: String,
    #[serde(with = "nan_as_null")]
    pub value: f64,
    /// Exact rendering when the value is not a plain float.
    pub shown: Option<String>,
    pub bound: Bound,
    pub pass: bool,
}

impl Measurement {
    pub fn new(label: impl Into<String>, value: f64, bound: Bound) -> Measurement {
        let pass = bound.holds(value);
        Measurement {
            label: label.into(),
            value,
            shown: None,
            bound,
            pass,
        }
    }

    /// An exact comparison decided by the caller.
    pub fn exact(label: impl Into<String>, value: f64, shown: String, expected: String, pass: bool) -> Measurement {
        Measurement {
            label: label.into(),
            value,
            shown: Some(shown),
            bound: Bound::Equals(expected),
            pass,
        }
    }

    /// A measurement that could not be made.
    pub fn failed(label: impl Into<String>, error: String) -> Measurement {
        Measurement {
            label: label.into(),
            value: f64::NAN,
            shown: Some(format!("error: {error}")),
            bound: Bound::Finite,
            pass: false,
        }
    }

    fn show(&self) -> String {
        self.shown.clone().unwrap_or_else(|| format!("{:.6e}", self.value))
    }
}

/// Non-finite values are written as `null` and read back as NaN.
mod nan_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

/// One acceptance criterion with every measurement behind it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub id: u8,
    pub name: String,
    /// The deciding measurement: the first failure, else the tightest pass.
    pub measured: String,
    pub tolerance: String,
    pub pass: bool,
    /// Where the expected values come from.
    pub provenance: String,
    pub measurements: Vec<Measurement>,
}

impl Check {
    pub fn new(id: u8, name: &str, provenance: &str, measurements: Vec<Measurement>) -> Check {
        let pass = !measurements.is_empty() && measurements.iter().all(|m| m.pass);
        let decisive = measurements
            .iter()
            .find(|m| !m.pass)
            .or_else(|| {
                measurements
                    .iter()
                    .max_by(|a, b| a.bound.load(a.value, a.pass).total_cmp(&b.bound.load(b.value, b.pass)))
            });
        let (measured, tolerance) = match decisive {
            Some(m) => (format!("{}: {}", m.label, m.show()), m.bound.to_string()),
            None => ("no measurements".into(), "-".into()),
        };
        Check {
            id,
            name: name.into(),
            measured,
            tolerance,
            pass,
            provenance: provenance.into(),
            measurements,
        }
    }

    pub fn line(&self) -> String {
        format!(
            "[{}] {:>2} {}: {} (tolerance {}; expected from {})",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.measured,
            self.tolerance,
            self.provenance
        )
    }
}

/// Number of acceptance criteria; each appears exactly once in a report.
pub const CRITERIA: u8 = 10;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AcceptanceReport {
    pub checks: Vec<Check>,
}

impl AcceptanceReport {
    pub fn all_pass(&self) -> bool {
        self.is_complete() && self.checks.iter().all(|c| c.pass)
    }

    /// Every criterion present exactly once, in order.
    pub fn is_complete(&self) -> bool {
        self.checks.len() == CRITERIA as usize && self.checks.iter().zip(1..).all(|(c, i)| c.id == i)
    }

    pub fn check(&self, id: u8) -> Option<&Check> {
        self.checks.iter().find(|c| c.id == id)
    }

    pub fn lines(&self) -> Vec<String> {
        self.checks.iter().map(Check::line).collect()
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decisive_measurement_is_first_failure_then_tightest() {
        let c = Check::new(
            3,
            "x",
            "y",
            vec![
                Measurement::new("a", 0.1, Bound::AtMost(1.0)),
                Measurement::new("b", 0.9, Bound::AtMost(1.0)),
            ],
        );
        assert!(c.pass);
        assert!(c.measured.starts_with("b:"));
        let c = Check::new(
            3,
            "x",
            "y",
            vec![
                Measurement::new("a", 2.0, Bound::AtMost(1.0)),
                Measurement::new("b", f64::NAN, Bound::Finite),
            ],
        );
        assert!(!c.pass);
        assert!(c.measured.starts_with("a:"));
        assert!(!Check::new(1, "x", "y", vec![]).pass);
    }

    #[test]
    fn nan_never_passes() {
        for b in [Bound::AtMost(1.0), Bound::AtLeast(1.0), Bound::Between(0.0, 1.0), Bound::Finite] {
            assert!(!b.holds(f64::NAN));
        }
    }
}
