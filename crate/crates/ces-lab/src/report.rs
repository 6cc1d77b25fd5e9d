//! Machine-readable verification reports: a versioned JSON schema with
//! 17-significant-digit numerics, written with a stable field order so two
//! runs of the same configuration differ only in the timestamp.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// 17 significant digits: enough to reconstruct the exact f64 on parse.
pub fn fmt_g17(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_json_number(v: f64) -> String {
    if v.is_finite() {
        fmt_g17(v)
    } else if v.is_nan() {
        "\"nan\"".into()
    } else if v > 0.0 {
        "\"inf\"".into()
    } else {
        "\"-inf\"".into()
    }
}

fn json_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out
}

/// Scalar carried by a check: real numbers stay JSON numbers, complex
/// values serialize as [re, im].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CheckValue {
    Real(f64),
    Complex(Complex64),
}

impl CheckValue {
    fn to_json(self) -> String {
        match self {
            CheckValue::Real(v) => fmt_json_number(v),
            CheckValue::Complex(z) => {
                format!("[{}, {}]", fmt_json_number(z.re), fmt_json_number(z.im))
            }
        }
    }

    pub fn distance_to(self, other: CheckValue) -> f64 {
        let promote = |v: CheckValue| match v {
            CheckValue::Real(r) => Complex64::new(r, 0.0),
            CheckValue::Complex(z) => z,
        };
        (promote(self) - promote(other)).norm()
    }
}

impl From<f64> for CheckValue {
    fn from(v: f64) -> Self {
        CheckValue::Real(v)
    }
}

impl From<Complex64> for CheckValue {
    fn from(z: Complex64) -> Self {
        CheckValue::Complex(z)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: CheckValue,
    pub expected: CheckValue,
    pub tolerance: f64,
    pub pass: bool,
    pub provenance: String,
}

impl Check {
    /// pass = |value − expected| ≤ tolerance.
    pub fn within(
        name: impl Into<String>,
        value: impl Into<CheckValue>,
        expected: impl Into<CheckValue>,
        tolerance: f64,
        provenance: impl Into<String>,
    ) -> Check {
        let value = value.into();
        let expected = expected.into();
        let pass = value.distance_to(expected) <= tolerance;
        Check {
            name: name.into(),
            value,
            expected,
            tolerance,
            pass,
            provenance: provenance.into(),
        }
    }

    /// Caller-supplied verdict, for window or ordering criteria the
    /// distance form cannot express.
    pub fn judged(
        name: impl Into<String>,
        value: impl Into<CheckValue>,
        expected: impl Into<CheckValue>,
        tolerance: f64,
        pass: bool,
        provenance: impl Into<String>,
    ) -> Check {
        Check {
            name: name.into(),
            value: value.into(),
            expected: expected.into(),
            tolerance,
            pass,
            provenance: provenance.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteReport {
    pub suite: String,
    pub timestamp: String,
    pub checks: Vec<Check>,
    /// Names of checks whose statistical resolution could not decide the
    /// criterion at the configured sample budget.
    pub inconclusive: Vec<String>,
}

impl SuiteReport {
    pub fn new(suite: impl Into<String>) -> SuiteReport {
        SuiteReport {
            suite: suite.into(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true),
            checks: Vec::new(),
            inconclusive: Vec::new(),
        }
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn mark_inconclusive(&mut self, name: impl Into<String>) {
        self.inconclusive.push(name.into());
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// 0 all pass, 2 statistically inconclusive, 1 failure.
    pub fn exit_code(&self) -> u8 {
        if !self.inconclusive.is_empty() {
            2
        } else if self.all_pass() {
            0
        } else {
            1
        }
    }

    /// Concatenates part reports under one suite name, prefixing each check
    /// with the part it came from.
    pub fn merged(suite: impl Into<String>, parts: Vec<SuiteReport>) -> SuiteReport {
        let mut out = SuiteReport::new(suite);
        for part in parts {
            for mut check in part.checks {
                check.name = format!("{}.{}", part.suite, check.name);
                out.checks.push(check);
            }
            for name in part.inconclusive {
                out.inconclusive.push(format!("{}.{}", part.suite, name));
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut out = String::with_capacity(256 + self.checks.len() * 256);
        out.push_str("{\n");
        out.push_str(&format!("  \"schema_version\": {},\n", SCHEMA_VERSION));
        out.push_str(&format!("  \"suite\": \"{}\",\n", json_escape(&self.suite)));
        out.push_str(&format!(
            "  \"timestamp\": \"{}\",\n",
            json_escape(&self.timestamp)
        ));
        out.push_str("  \"inconclusive\": [");
        for (i, name) in self.inconclusive.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            out.push_str(&format!("\"{}\"", json_escape(name)));
        }
        out.push_str("],\n");
        out.push_str("  \"checks\": [");
        for (i, c) in self.checks.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str("\n    {\n");
            out.push_str(&format!("      \"name\": \"{}\",\n", json_escape(&c.name)));
            out.push_str(&format!("      \"value\": {},\n", c.value.to_json()));
            out.push_str(&format!("      \"expected\": {},\n", c.expected.to_json()));
            out.push_str(&format!(
                "      \"tolerance\": {},\n",
                fmt_json_number(c.tolerance)
            ));
            out.push_str(&format!("      \"pass\": {},\n", c.pass));
            out.push_str(&format!(
                "      \"provenance\": \"{}\"\n",
                json_escape(&c.provenance)
            ));
            out.push_str("    }");
        }
        if !self.checks.is_empty() {
            out.push_str("\n  ");
        }
        out.push_str("]\n}\n");
        out
    }
}

fn parse_value(v: &serde_json::Value, field: &str) -> Result<CheckValue> {
    let scalar = |v: &serde_json::Value| -> Result<f64> {
        match v {
            serde_json::Value::Number(n) => n
                .as_f64()
                .ok_or_else(|| Error::Config(format!("{field}: number out of f64 range"))),
            serde_json::Value::String(s) => match s.as_str() {
                "nan" => Ok(f64::NAN),
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                other => Err(Error::Config(format!("{field}: unexpected string {other:?}"))),
            },
            other => Err(Error::Config(format!("{field}: expected a number, got {other}"))),
        }
    };
    match v {
        serde_json::Value::Array(parts) if parts.len() == 2 => Ok(CheckValue::Complex(
            Complex64::new(scalar(&parts[0])?, scalar(&parts[1])?),
        )),
        other => Ok(CheckValue::Real(scalar(other)?)),
    }
}

/// Parses a report produced by `to_json`; lossless for finite values
/// because the writer emits 17 significant digits.
pub fn report_from_json(text: &str) -> Result<SuiteReport> {
    let root: serde_json::Value = serde_json::from_str(text)
        .map_err(|e| Error::Config(format!("report is not valid JSON: {e}")))?;
    let obj = root
        .as_object()
        .ok_or_else(|| Error::Config("report root must be an object".into()))?;
    let version = obj
        .get("schema_version")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| Error::Config("missing schema_version".into()))?;
    if version != SCHEMA_VERSION as u64 {
        return Err(Error::Config(format!(
            "unsupported report schema_version {version}"
        )));
    }
    let text_field = |key: &str| -> Result<String> {
        obj.get(key)
            .and_then(|v| v.as_str())
            .map(str::to_owned)
            .ok_or_else(|| Error::Config(format!("missing string field {key:?}")))
    };
    let mut report = SuiteReport {
        suite: text_field("suite")?,
        timestamp: text_field("timestamp")?,
        checks: Vec::new(),
        inconclusive: Vec::new(),
    };
    if let Some(list) = obj.get("inconclusive").and_then(|v| v.as_array()) {
        for item in list {
            report.inconclusive.push(
                item.as_str()
                    .ok_or_else(|| Error::Config("inconclusive entries must be strings".into()))?
                    .to_owned(),
            );
        }
    }
    let checks = obj
        .get("checks")
        .and_then(|v| v.as_array())
        .ok_or_else(|| Error::Config("missing checks array".into()))?;
    for item in checks {
        let c = item
            .as_object()
            .ok_or_else(|| Error::Config("check entries must be objects".into()))?;
        let get = |key: &str| {
            c.get(key)
                .ok_or_else(|| Error::Config(format!("check missing field {key:?}")))
        };
        report.checks.push(Check {
            name: get("name")?
                .as_str()
                .ok_or_else(|| Error::Config("check name must be a string".into()))?
                .to_owned(),
            value: parse_value(get("value")?, "value")?,
            expected: parse_value(get("expected")?, "expected")?,
            tolerance: match parse_value(get("tolerance")?, "tolerance")? {
                CheckValue::Real(t) => t,
                CheckValue::Complex(_) => {
                    return Err(Error::Config("tolerance must be real".into()))
                }
            },
            pass: get("pass")?
                .as_bool()
                .ok_or_else(|| Error::Config("check pass must be a bool".into()))?,
            provenance: get("provenance")?
                .as_str()
                .ok_or_else(|| Error::Config("check provenance must be a string".into()))?
                .to_owned(),
        });
    }
    Ok(report)
}
