//! Extended scalars returned by norms, distances and support values.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::rational::Rat;

/// A value that is exact where the computation allows it.
///
/// Euclidean quantities are kept as `Root(q)`, meaning `+sqrt(q)` with `q` a
/// non-negative rational that is not a perfect square. `Approx` marks values
/// produced by an iterative fallback.
#[derive(Clone, Debug, PartialEq)]
pub enum Scalar {
    NegInf,
    Exact(Rat),
    Root(Rat),
    Approx(f64),
    PosInf,
}

impl Scalar {
    pub fn zero() -> Scalar {
        Scalar::Exact(Rat::zero())
    }

    /// `+sqrt(q)`, collapsed to `Exact` when `q` is a perfect square.
    pub fn sqrt(q: Rat) -> Scalar {
        assert!(!q.is_negative(), "square root of a negative rational");
        match q.sqrt_exact() {
            Some(r) => Scalar::Exact(r),
            None => Scalar::Root(q),
        }
    }

    pub fn is_exact(&self) -> bool {
        !matches!(self, Scalar::Approx(_))
    }

    pub fn is_finite(&self) -> bool {
        !matches!(self, Scalar::PosInf | Scalar::NegInf)
    }

    pub fn as_rat(&self) -> Option<&Rat> {
        match self {
            Scalar::Exact(r) => Some(r),
            _ => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::NegInf => f64::NEG_INFINITY,
            Scalar::PosInf => f64::INFINITY,
            Scalar::Exact(r) => r.to_f64(),
            Scalar::Root(q) => q.to_f64().sqrt(),
            Scalar::Approx(v) => *v,
        }
    }

    /// The exact square of a non-negative finite value.
    pub fn square_exact(&self) -> Option<Rat> {
        match self {
            Scalar::Exact(r) => Some(r.square()),
            Scalar::Root(q) => Some(q.clone()),
            _ => None,
        }
    }

    /// Multiply by a non-negative rational, keeping exactness.
    pub fn scale(&self, k: &Rat) -> Scalar {
        assert!(!k.is_negative(), "scale factor must be non-negative");
        match self {
            Scalar::Exact(r) => Scalar::Exact(r * k),
            Scalar::Root(q) => Scalar::sqrt(q * &k.square()),
            Scalar::Approx(v) => Scalar::Approx(v * k.to_f64()),
            inf if k.is_zero() => {
                let _ = inf;
                Scalar::zero()
            }
            inf => inf.clone(),
        }
    }

    /// Exact comparison when both sides admit one (rationals, roots of
    /// rationals, infinities); `None` when a float is involved.
    pub fn cmp_exact(&self, other: &Scalar) -> Option<Ordering> {
        use Scalar::*;
        match (self, other) {
            (Approx(_), _) | (_, Approx(_)) => None,
            (NegInf, NegInf) | (PosInf, PosInf) => Some(Ordering::Equal),
            (NegInf, _) | (_, PosInf) => Some(Ordering::Less),
            (PosInf, _) | (_, NegInf) => Some(Ordering::Greater),
            (Exact(a), Exact(b)) => Some(a.cmp(b)),
            (Root(p), Root(q)) => Some(p.cmp(q)),
            (Root(p), Exact(b)) => Some(if b.is_negative() {
                Ordering::Greater
            } else {
                p.cmp(&b.square())
            }),
            (Exact(_), Root(_)) => other.cmp_exact(self).map(Ordering::reverse),
        }
    }

    pub fn total_cmp(&self, other: &Scalar) -> Ordering {
        self.cmp_exact(other)
            .unwrap_or_else(|| self.to_f64().total_cmp(&other.to_f64()))
    }

    pub fn max(self, other: Scalar) -> Scalar {
        if other.total_cmp(&self) == Ordering::Greater {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: Scalar) -> Scalar {
        if other.total_cmp(&self) == Ordering::Less {
            other
        } else {
            self
        }
    }

    /// `|self - other|`; equal infinities are at deviation zero.
    pub fn deviation(&self, other: &Scalar) -> Scalar {
        use Scalar::*;
        if self == other {
            return Scalar::zero();
        }
        match (self, other) {
            (PosInf | NegInf, _) | (_, PosInf | NegInf) => PosInf,
            (Exact(a), Exact(b)) => Exact((a - b).abs()),
            _ => Approx((self.to_f64() - other.to_f64()).abs()),
        }
    }

    /// Whether `|self - other| <= tol`, decided exactly for rationals and
    /// square roots of rationals.
    pub fn within(&self, other: &Scalar, tol: &Rat) -> bool {
        use Scalar::*;
        match (self, other) {
            (PosInf, PosInf) | (NegInf, NegInf) => true,
            (PosInf | NegInf, _) | (_, PosInf | NegInf) => false,
            (Exact(a), Exact(b)) => (a - b).abs() <= *tol,
            (Root(_) | Exact(_), Root(_) | Exact(_)) => {
                let (Some(p), Some(q)) = (self.nonneg_square(), other.nonneg_square()) else {
                    return (self.to_f64() - other.to_f64()).abs() <= tol.to_f64();
                };
                root_le_root_plus(&p, &q, tol) && root_le_root_plus(&q, &p, tol)
            }
            _ => (self.to_f64() - other.to_f64()).abs() <= tol.to_f64(),
        }
    }

    fn nonneg_square(&self) -> Option<Rat> {
        match self {
            Scalar::Exact(r) if !r.is_negative() => Some(r.square()),
            Scalar::Root(q) => Some(q.clone()),
            _ => None,
        }
    }
}

/// `sqrt(p) <= sqrt(q) + t` for `p, q, t >= 0`.
fn root_le_root_plus(p: &Rat, q: &Rat, t: &Rat) -> bool {
    // p <= q + t^2 + 2 t sqrt(q)
    let lhs = p - q - t.square();
    if !lhs.is_positive() {
        return true;
    }
    lhs.square() <= Rat::from_int(4) * t.square() * q
}

impl From<Rat> for Scalar {
    fn from(r: Rat) -> Self {
        Scalar::Exact(r)
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::NegInf => f.write_str("-inf"),
            Scalar::PosInf => f.write_str("inf"),
            Scalar::Exact(r) => write!(f, "{r}"),
            Scalar::Root(q) => write!(f, "sqrt({q})"),
            Scalar::Approx(v) => write!(f, "~{v:e}"),
        }
    }
}

impl FromStr for Scalar {
    type Err = String;

    fn from_str(s: &str) -> Result<Scalar, String> {
        let s = s.trim();
        match s {
            "inf" => return Ok(Scalar::PosInf),
            "-inf" => return Ok(Scalar::NegInf),
            _ => {}
        }
        if let Some(inner) = s.strip_prefix("sqrt(").and_then(|r| r.strip_suffix(')')) {
            let q: Rat = inner.parse().map_err(|e: crate::rational::ParseRatError| e.to_string())?;
            return Ok(Scalar::sqrt(q));
        }
        if let Some(v) = s.strip_prefix('~') {
            return v
                .parse::<f64>()
                .map(Scalar::Approx)
                .map_err(|e| format!("invalid approximate scalar `{s}`: {e}"));
        }
        s.parse::<Rat>().map(Scalar::Exact).map_err(|e| e.to_string())
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Scalar, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
