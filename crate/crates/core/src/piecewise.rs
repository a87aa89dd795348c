//! Piecewise-polynomial functions with a constant (possibly infinite) value
//! outside the listed pieces.
//!
//! JSON form:
//! `{"pieces":[{"a":0,"b":1,"coeffs":[0,0,0.5]}],"outside":"inf"}`.
//! `b` and `outside` accept the strings `"inf"`/`"-inf"`. A piece may carry an
//! optional `origin`, in which case its coefficients are in powers of
//! `x - origin`.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::poly::Polynomial;

#[derive(Clone, Debug, PartialEq)]
pub struct Piece {
    pub a: f64,
    pub b: f64,
    pub origin: f64,
    pub poly: Polynomial,
}

impl Piece {
    pub fn new(a: f64, b: f64, coeffs: Vec<f64>) -> Self {
        Self::with_origin(a, b, 0.0, coeffs)
    }

    pub fn with_origin(a: f64, b: f64, origin: f64, coeffs: Vec<f64>) -> Self {
        Self {
            a,
            b,
            origin,
            poly: Polynomial::new(coeffs),
        }
    }

    #[inline]
    pub fn contains(&self, x: f64) -> bool {
        x >= self.a && x <= self.b
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        self.poly.eval(x - self.origin)
    }

    pub fn eval_derivative(&self, x: f64, order: usize) -> f64 {
        self.poly.eval_derivative(x - self.origin, order)
    }

    /// Taylor coefficients `p^(j)(x0)/j!` of the piece polynomial at `x0`.
    pub fn taylor_at(&self, x0: f64) -> Vec<f64> {
        self.poly.taylor_at(x0 - self.origin)
    }

    /// Real roots of the `order`-th derivative within `[lo, hi] ∩ [a, b]`.
    pub fn derivative_roots(&self, order: usize, lo: f64, hi: f64) -> Vec<f64> {
        let lo = lo.max(self.a);
        let hi = hi.min(self.b);
        if lo > hi {
            return Vec::new();
        }
        self.poly
            .nth_derivative(order)
            .roots_in(lo - self.origin, hi - self.origin)
            .into_iter()
            .map(|r| r + self.origin)
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseFunction {
    pieces: Vec<Piece>,
    outside: f64,
}

impl PiecewiseFunction {
    pub fn new(pieces: Vec<Piece>, outside: f64) -> Result<Self> {
        if outside.is_nan() || outside == f64::NEG_INFINITY {
            return Err(Error::InvalidInput(
                "outside value must be finite or +inf".into(),
            ));
        }
        for (i, p) in pieces.iter().enumerate() {
            if !p.a.is_finite() || p.b.is_nan() || p.b < p.a {
                return Err(Error::InvalidInput(format!(
                    "piece {i} has invalid bounds [{}, {}]",
                    p.a, p.b
                )));
            }
            if !p.origin.is_finite() || p.poly.coeffs().iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "piece {i} has non-finite coefficients"
                )));
            }
            if let Some(next) = pieces.get(i + 1) {
                if next.a < p.b {
                    return Err(Error::InvalidInput(format!(
                        "pieces {i} and {} overlap or are unsorted",
                        i + 1
                    )));
                }
            }
        }
        Ok(Self { pieces, outside })
    }

    pub fn polynomial_on(a: f64, b: f64, coeffs: Vec<f64>, outside: f64) -> Result<Self> {
        Self::new(vec![Piece::new(a, b, coeffs)], outside)
    }

    /// Polynomial on `[0, inf)`, `+inf` for negative arguments.
    pub fn polynomial(coeffs: Vec<f64>) -> Self {
        Self {
            pieces: vec![Piece::new(0.0, f64::INFINITY, coeffs)],
            outside: f64::INFINITY,
        }
    }

    /// Constant everywhere.
    pub fn constant(c: f64) -> Self {
        Self {
            pieces: Vec::new(),
            outside: c,
        }
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn outside(&self) -> f64 {
        self.outside
    }

    pub fn piece_index(&self, x: f64) -> Option<usize> {
        let i = self.pieces.partition_point(|p| p.b < x);
        (i < self.pieces.len() && self.pieces[i].contains(x)).then_some(i)
    }

    pub fn piece_at(&self, x: f64) -> Option<&Piece> {
        self.piece_index(x).map(|i| &self.pieces[i])
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match self.piece_at(x) {
            Some(p) => p.eval(x),
            None => self.outside,
        }
    }

    /// Exact derivative of the given order. Outside the pieces the function is
    /// constant, so derivatives vanish there (or are NaN if it is `+inf`).
    pub fn derivative(&self, x: f64, order: usize) -> f64 {
        if order == 0 {
            return self.eval(x);
        }
        match self.piece_at(x) {
            Some(p) => p.eval_derivative(x, order),
            None if self.outside.is_finite() => 0.0,
            None => f64::NAN,
        }
    }

    pub fn is_identically_zero(&self) -> bool {
        self.outside == 0.0 && self.pieces.iter().all(|p| p.poly.is_zero())
    }

    /// True if every point of `[lo, hi]` has a finite value.
    pub fn is_finite_on(&self, lo: f64, hi: f64) -> bool {
        if self.outside.is_finite() {
            return true;
        }
        let mut reach = lo;
        for p in &self.pieces {
            if p.b < reach {
                continue;
            }
            if p.a > reach {
                return false;
            }
            reach = p.b;
            if reach >= hi {
                return true;
            }
        }
        reach >= hi
    }

    /// Smallest `x >= x` (or largest `x <= x` when `forward` is false) at which
    /// the function is finite, if any.
    pub fn next_finite(&self, x: f64, forward: bool) -> Option<f64> {
        if self.outside.is_finite() || self.piece_at(x).is_some() {
            return Some(x);
        }
        if forward {
            self.pieces.iter().find(|p| p.a >= x).map(|p| p.a)
        } else {
            self.pieces.iter().rev().find(|p| p.b <= x).map(|p| p.b)
        }
    }

    /// Finite breakpoints of the pieces, sorted and deduplicated.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut pts: Vec<f64> = self
            .pieces
            .iter()
            .flat_map(|p| [p.a, p.b])
            .filter(|v| v.is_finite())
            .collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    /// Adds `c0 + c1 x` to every piece and to a finite outside value.
    pub fn add_linear(&self, c0: f64, c1: f64) -> Result<Self> {
        if c1 != 0.0 && self.outside.is_finite() {
            return Err(Error::InvalidInput(
                "cannot add a linear term to a finite outside value".into(),
            ));
        }
        let pieces = self
            .pieces
            .iter()
            .map(|p| {
                let shift = Polynomial::new(vec![c0 + c1 * p.origin, c1]);
                Piece {
                    a: p.a,
                    b: p.b,
                    origin: p.origin,
                    poly: p.poly.add(&shift),
                }
            })
            .collect();
        let outside = if self.outside.is_finite() {
            self.outside + c0
        } else {
            self.outside
        };
        Self::new(pieces, outside)
    }

    /// Candidate extremum locations in `[lo, hi]`: finite piece endpoints and
    /// roots of the first derivative, paired with the function value. A finite
    /// outside value contributes one uncovered point if one exists.
    pub fn critical_points(&self, lo: f64, hi: f64) -> Result<Vec<(f64, f64)>> {
        let mut out = Vec::new();
        for p in &self.pieces {
            let a = p.a.max(lo);
            let b = p.b.min(hi);
            if a > b {
                continue;
            }
            if b.is_infinite() {
                let lead = p.poly.leading();
                if p.poly.degree() > 0 && lead < 0.0 {
                    return Err(Error::UnboundedBelow);
                }
            } else {
                out.push((b, p.eval(b)));
            }
            out.push((a, p.eval(a)));
            for r in p.derivative_roots(1, a, b) {
                out.push((r, p.eval(r)));
            }
        }
        if self.outside.is_finite() {
            if let Some(x) = self.uncovered_point(lo, hi) {
                out.push((x, self.outside));
            }
        }
        Ok(out)
    }

    fn uncovered_point(&self, lo: f64, hi: f64) -> Option<f64> {
        let mut reach = lo;
        for p in &self.pieces {
            if p.b < reach {
                continue;
            }
            if p.a > reach {
                return Some(0.5 * (reach + p.a));
            }
            if p.b >= hi {
                return None;
            }
            reach = p.b;
        }
        if reach < hi {
            Some(if hi.is_finite() { 0.5 * (reach + hi) } else { reach + 1.0 })
        } else {
            None
        }
    }

    /// Global infimum over `[lo, hi]` and a point attaining it.
    pub fn minimum(&self, lo: f64, hi: f64) -> Result<(f64, f64)> {
        let cands = self.critical_points(lo, hi)?;
        cands
            .into_iter()
            .filter(|(_, v)| v.is_finite())
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .ok_or(Error::EmptyDomain)
    }
}

#[derive(Serialize, Deserialize)]
struct PieceRepr {
    a: f64,
    #[serde(serialize_with = "ser_ext", deserialize_with = "de_ext")]
    b: f64,
    coeffs: Vec<f64>,
    #[serde(default, skip_serializing_if = "is_zero")]
    origin: f64,
}

#[derive(Serialize, Deserialize)]
struct Repr {
    pieces: Vec<PieceRepr>,
    #[serde(serialize_with = "ser_ext", deserialize_with = "de_ext")]
    outside: f64,
}

fn is_zero(v: &f64) -> bool {
    *v == 0.0
}

fn ser_ext<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_infinite() {
        s.serialize_str(if *v > 0.0 { "inf" } else { "-inf" })
    } else {
        s.serialize_f64(*v)
    }
}

fn de_ext<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Ext {
        Num(f64),
        Str(String),
    }
    match Ext::deserialize(d)? {
        Ext::Num(v) => Ok(v),
        Ext::Str(s) => match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "+inf" | "infinity" => Ok(f64::INFINITY),
            "-inf" | "-infinity" => Ok(f64::NEG_INFINITY),
            other => Err(serde::de::Error::custom(format!(
                "expected a number or \"inf\", got {other:?}"
            ))),
        },
    }
}

impl Serialize for PiecewiseFunction {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        Repr {
            pieces: self
                .pieces
                .iter()
                .map(|p| PieceRepr {
                    a: p.a,
                    b: p.b,
                    coeffs: p.poly.coeffs().to_vec(),
                    origin: p.origin,
                })
                .collect(),
            outside: self.outside,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PiecewiseFunction {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = Repr::deserialize(d)?;
        let pieces = r
            .pieces
            .into_iter()
            .map(|p| Piece::with_origin(p.a, p.b, p.origin, p.coeffs))
            .collect();
        PiecewiseFunction::new(pieces, r.outside).map_err(serde::de::Error::custom)
    }
}
