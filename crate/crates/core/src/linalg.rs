//! Exact rational vectors and matrices, basis inversion, and the quotient
//! map onto `Q^n / 2Z^n`.
//!
//! Everything here is exact: scalars are arbitrary-precision rationals kept
//! in reduced form, so set membership and equality of vectors are structural.

use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::de::{self, Deserializer, SeqAccess, Visitor};
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reduced fraction with an arbitrary-precision numerator and a positive
/// denominator.
pub type Rational = BigRational;

pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

/// Parses `"p/q"`, `"p"`, or surrounding whitespace variants thereof.
pub fn parse_rational(text: &str) -> std::result::Result<Rational, String> {
    let text = text.trim();
    let (numer, denom) = match text.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (text, "1"),
    };
    let numer = BigInt::from_str(numer).map_err(|_| format!("bad numerator in {text:?}"))?;
    let denom = BigInt::from_str(denom).map_err(|_| format!("bad denominator in {text:?}"))?;
    if denom.is_zero() {
        return Err(format!("zero denominator in {text:?}"));
    }
    Ok(Rational::new(numer, denom))
}

pub fn format_rational(value: &Rational) -> String {
    if value.is_integer() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

/// Serde adapter: integers become bare JSON numbers when they fit in an
/// `i64`, everything else is the string `"p/q"`.
struct RatRepr<'a>(&'a Rational);

impl Serialize for RatRepr<'_> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_integer() {
            if let Some(v) = self.0.numer().to_i64() {
                return serializer.serialize_i64(v);
            }
        }
        serializer.serialize_str(&format_rational(self.0))
    }
}

struct RatOwned(Rational);

impl<'de> Deserialize<'de> for RatOwned {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct RatVisitor;

        impl Visitor<'_> for RatVisitor {
            type Value = RatOwned;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an integer or a rational string \"p/q\"")
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<RatOwned, E> {
                Ok(RatOwned(Rational::from_integer(BigInt::from(v))))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<RatOwned, E> {
                Ok(RatOwned(Rational::from_integer(BigInt::from(v))))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<RatOwned, E> {
                parse_rational(v).map(RatOwned).map_err(E::custom)
            }
        }

        deserializer.deserialize_any(RatVisitor)
    }
}

fn serialize_coords<S: Serializer>(
    coords: &[Rational],
    serializer: S,
) -> std::result::Result<S::Ok, S::Error> {
    let mut seq = serializer.serialize_seq(Some(coords.len()))?;
    for c in coords {
        seq.serialize_element(&RatRepr(c))?;
    }
    seq.end()
}

fn deserialize_coords<'de, D: Deserializer<'de>>(
    deserializer: D,
) -> std::result::Result<Vec<Rational>, D::Error> {
    struct CoordsVisitor;

    impl<'de> Visitor<'de> for CoordsVisitor {
        type Value = Vec<Rational>;

        fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
            f.write_str("an array of rationals")
        }

        fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> std::result::Result<Self::Value, A::Error> {
            let mut out = Vec::with_capacity(seq.size_hint().unwrap_or(0));
            while let Some(RatOwned(r)) = seq.next_element()? {
                out.push(r);
            }
            Ok(out)
        }
    }

    deserializer.deserialize_seq(CoordsVisitor)
}

/// Exact rational vector. Ordering is coordinate-lexicographic.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RatVec(pub Vec<Rational>);

impl RatVec {
    pub fn zero(n: usize) -> Self {
        RatVec(vec![Rational::zero(); n])
    }

    /// Standard basis vector with a one in coordinate `k` (zero-based).
    pub fn unit(n: usize, k: usize) -> Self {
        let mut v = Self::zero(n);
        v.0[k] = Rational::one();
        v
    }

    pub fn from_ints(coords: &[i64]) -> Self {
        RatVec(coords.iter().map(|&c| int(c)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[Rational] {
        &self.0
    }

    pub fn is_integral(&self) -> bool {
        self.0.iter().all(|c| c.is_integer())
    }

    pub fn scale(&self, factor: &Rational) -> RatVec {
        RatVec(self.0.iter().map(|c| c * factor).collect())
    }

    fn zip_with(&self, other: &RatVec, f: impl Fn(&Rational, &Rational) -> Rational) -> RatVec {
        assert_eq!(self.dim(), other.dim(), "vector dimension mismatch");
        RatVec(self.0.iter().zip(&other.0).map(|(a, b)| f(a, b)).collect())
    }
}

impl Add for &RatVec {
    type Output = RatVec;
    fn add(self, rhs: &RatVec) -> RatVec {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &RatVec {
    type Output = RatVec;
    fn sub(self, rhs: &RatVec) -> RatVec {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Neg for &RatVec {
    type Output = RatVec;
    fn neg(self) -> RatVec {
        RatVec(self.0.iter().map(|c| -c).collect())
    }
}

impl fmt::Display for RatVec {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("(")?;
        for (k, c) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(", ")?;
            }
            f.write_str(&format_rational(c))?;
        }
        f.write_str(")")
    }
}

impl Serialize for RatVec {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serialize_coords(&self.0, serializer)
    }
}

impl<'de> Deserialize<'de> for RatVec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        deserialize_coords(deserializer).map(RatVec)
    }
}

/// `q - 2 floor(q/2)`, the representative of `q` in `[0, 2)`.
fn mod2(q: &Rational) -> Rational {
    // gcd(a mod 2b, b) = gcd(a, b) = 1, so the result needs no reduction
    let period = q.denom() * BigInt::from(2);
    Rational::new_raw(q.numer().mod_floor(&period), q.denom().clone())
}

/// Canonical representative of an element of `Q^n / 2Z^n`: every
/// coordinate lies in `[0, 2)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Color(Vec<Rational>);

impl Color {
    pub fn zero(n: usize) -> Self {
        Color(vec![Rational::zero(); n])
    }

    /// Builds a color from arbitrary coordinates, reducing them mod 2.
    pub fn from_coords(coords: Vec<Rational>) -> Self {
        Color(coords.iter().map(mod2).collect())
    }

    pub fn coords(&self) -> &[Rational] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn to_vec(&self) -> RatVec {
        RatVec(self.0.clone())
    }

    pub fn is_integral(&self) -> bool {
        self.0.iter().all(|c| c.is_integer())
    }

    /// Coordinate-wise fractional parts. Two colors lie in the same coset of
    /// `Z^n / 2Z^n` exactly when their fractional parts agree.
    pub fn fractional_part(&self) -> Color {
        Color(self.0.iter().map(|c| c - c.floor()).collect())
    }

    /// Reads an integral color as a bit vector (coordinate `k` is bit `k`).
    /// Returns `None` if some coordinate is not an integer.
    pub fn to_bits(&self) -> Option<u64> {
        let mut bits = 0u64;
        for (k, c) in self.0.iter().enumerate() {
            if !c.is_integer() {
                return None;
            }
            if !c.is_zero() {
                bits |= 1 << k;
            }
        }
        Some(bits)
    }

    pub fn add(&self, other: &Color) -> Result<Color> {
        check_dim(self.dim(), other.dim())?;
        Ok(Color(self.0.iter().zip(&other.0).map(|(a, b)| mod2(&(a + b))).collect()))
    }
}

impl Serialize for Color {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serialize_coords(&self.0, serializer)
    }
}

impl<'de> Deserialize<'de> for Color {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        deserialize_coords(deserializer).map(Color::from_coords)
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        self.to_vec().fmt(f)
    }
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// The quotient map `pi: Q^n -> Q^n / 2Z^n`.
pub fn reduce_mod2(v: &RatVec) -> Color {
    Color(v.0.iter().map(mod2).collect())
}

pub fn color_sub(a: &Color, b: &Color) -> Result<Color> {
    check_dim(a.dim(), b.dim())?;
    Ok(Color(a.0.iter().zip(&b.0).map(|(x, y)| mod2(&(x - y))).collect()))
}

/// Square rational matrix, stored row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RatMatrix {
    rows: Vec<Vec<Rational>>,
}

impl RatMatrix {
    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let n = rows.len();
        for row in &rows {
            check_dim(n, row.len())?;
        }
        Ok(RatMatrix { rows })
    }

    pub fn from_int_rows(rows: &[&[i64]]) -> Result<Self> {
        Self::from_rows(rows.iter().map(|r| r.iter().map(|&c| int(c)).collect()).collect())
    }

    pub fn identity(n: usize) -> Self {
        let rows = (0..n)
            .map(|r| (0..n).map(|c| if r == c { Rational::one() } else { Rational::zero() }).collect())
            .collect();
        RatMatrix { rows }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<Rational>] {
        &self.rows
    }

    pub fn mul(&self, other: &RatMatrix) -> Result<RatMatrix> {
        check_dim(self.dim(), other.dim())?;
        let n = self.dim();
        let rows = (0..n)
            .map(|r| {
                (0..n)
                    .map(|c| (0..n).fold(Rational::zero(), |acc, k| acc + &self.rows[r][k] * &other.rows[k][c]))
                    .collect()
            })
            .collect();
        Ok(RatMatrix { rows })
    }
}

impl Serialize for RatMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.rows.len()))?;
        for row in &self.rows {
            seq.serialize_element(&RatVec(row.clone()))?;
        }
        seq.end()
    }
}

/// Exact matrix-vector product.
pub fn apply_map(m: &RatMatrix, v: &RatVec) -> Result<RatVec> {
    check_dim(m.dim(), v.dim())?;
    Ok(RatVec(
        m.rows
            .iter()
            .map(|row| row.iter().zip(&v.0).fold(Rational::zero(), |acc, (a, b)| acc + a * b))
            .collect(),
    ))
}

/// Returns the matrix `M` with `M s_i = e_i` for every basis vector, i.e. the
/// inverse of the matrix whose columns are the `s_i`.
///
/// Gauss-Jordan elimination on `[P | I]`, pivoting on the first nonzero entry
/// of each column. The result is re-multiplied against every `s_i` before it
/// is returned.
pub fn basis_inverse(basis: &[RatVec]) -> Result<RatMatrix> {
    let n = basis.len();
    if n == 0 {
        return Err(Error::InvalidParams("basis must be nonempty".into()));
    }
    for s in basis {
        check_dim(n, s.dim())?;
    }

    // aug[r] = [P row r | I row r], P[r][c] = basis[c][r]
    let mut aug: Vec<Vec<Rational>> = (0..n)
        .map(|r| {
            let mut row: Vec<Rational> = basis.iter().map(|s| s.0[r].clone()).collect();
            row.extend((0..n).map(|c| if c == r { Rational::one() } else { Rational::zero() }));
            row
        })
        .collect();

    for col in 0..n {
        let pivot = (col..n).find(|&r| !aug[r][col].is_zero()).ok_or(Error::SingularBasis)?;
        aug.swap(col, pivot);
        let inv = aug[col][col].recip();
        for entry in aug[col].iter_mut() {
            *entry *= &inv;
        }
        let pivot_row = aug[col].clone();
        for (r, row) in aug.iter_mut().enumerate() {
            if r == col || row[col].is_zero() {
                continue;
            }
            let factor = row[col].clone();
            for (entry, p) in row.iter_mut().zip(&pivot_row) {
                *entry -= &factor * p;
            }
        }
    }

    let inverse = RatMatrix {
        rows: aug.into_iter().map(|row| row[n..].to_vec()).collect(),
    };
    for (k, s) in basis.iter().enumerate() {
        if apply_map(&inverse, s)? != RatVec::unit(n, k) {
            return Err(Error::AssertionFailed(format!("M * s_{} != e_{}", k + 1, k + 1)));
        }
    }
    Ok(inverse)
}
