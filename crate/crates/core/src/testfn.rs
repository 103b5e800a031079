//! Closed registry of weight functions `g` for the generalized partition
//! function `Z_N(beta, g) = sum_sigma exp(-beta H(sigma)) g(|sigma| / sqrt N)`.
//!
//! Every member is bounded, continuous, nonnegative and not identically zero.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum TestFunction {
    /// `g = 1`
    One,
    /// `g(x) = exp(-x^2)`
    Gauss,
    /// `g(x) = (1 + cos x) / 2`
    Cosine,
    /// `g(x) = exp(-(x - center)^2 / (2 width^2))`
    Bump { center: f64, width: f64 },
}

impl TestFunction {
    pub fn bump(center: f64, width: f64) -> Result<Self> {
        if !center.is_finite() || !(width > 0.0 && width.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "bump needs a finite center and positive width, got ({center}, {width})"
            )));
        }
        Ok(TestFunction::Bump { center, width })
    }

    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            TestFunction::One => 1.0,
            TestFunction::Gauss => (-x * x).exp(),
            TestFunction::Cosine => 0.5 * (1.0 + x.cos()),
            TestFunction::Bump { center, width } => {
                let u = (x - center) / width;
                (-0.5 * u * u).exp()
            }
        }
    }

    /// `ln g(x)`; `-inf` where `g` vanishes. Errors if `g(x) < 0`.
    pub fn log_eval(&self, x: f64) -> Result<f64> {
        match *self {
            TestFunction::One => Ok(0.0),
            TestFunction::Gauss => Ok(-x * x),
            TestFunction::Bump { center, width } => {
                let u = (x - center) / width;
                Ok(-0.5 * u * u)
            }
            TestFunction::Cosine => {
                let v = self.eval(x);
                if v < 0.0 {
                    Err(Error::TestFunction(format!("g({x}) = {v} < 0")))
                } else {
                    Ok(v.ln())
                }
            }
        }
    }

    pub fn is_one(&self) -> bool {
        matches!(self, TestFunction::One)
    }
}

impl fmt::Display for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TestFunction::One => write!(f, "one"),
            TestFunction::Gauss => write!(f, "gauss"),
            TestFunction::Cosine => write!(f, "cosine"),
            TestFunction::Bump { center, width } => write!(f, "bump({center},{width})"),
        }
    }
}

impl FromStr for TestFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "one" => return Ok(TestFunction::One),
            "gauss" => return Ok(TestFunction::Gauss),
            "cosine" => return Ok(TestFunction::Cosine),
            _ => {}
        }
        let bad = || {
            Error::InvalidParameter(format!(
                "unknown test function {s:?}; expected one, gauss, cosine or bump(center,width)"
            ))
        };
        let inner = s
            .strip_prefix("bump(")
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(bad)?;
        let mut parts = inner.split(',').map(|v| v.trim().parse::<f64>());
        match (parts.next(), parts.next(), parts.next()) {
            (Some(Ok(c)), Some(Ok(w)), None) => TestFunction::bump(c, w),
            _ => Err(bad()),
        }
    }
}

impl TryFrom<String> for TestFunction {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<TestFunction> for String {
    fn from(g: TestFunction) -> String {
        g.to_string()
    }
}
