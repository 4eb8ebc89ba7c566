//! Exact scalar arithmetic: arbitrary-precision rationals and real
//! quadratic extensions Q(√d).
//!
//! A [`FieldElem`] is either a rational or a value u + v·√d with u, v
//! rational, v ≠ 0, and d ≥ 2 a fixed square-free integer. Elements with
//! v = 0 are canonicalized to the rational representation, so structural
//! equality coincides with equality of real numbers. Comparisons, signs,
//! and floors are computed exactly (no floating point on the decision
//! path).

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Coefficient field of a group specification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FieldKind {
    /// Q.
    Rational,
    /// Q(√d) for a square-free d ≥ 2.
    Quadratic { d: u64 },
}

impl fmt::Display for FieldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldKind::Rational => write!(f, "Q"),
            FieldKind::Quadratic { d } => write!(f, "Q(sqrt {d})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Repr {
    Rat(BigRational),
    /// u + v·√d with v ≠ 0.
    Quad { u: BigRational, v: BigRational, d: u64 },
}

/// An exact real scalar: a rational or an element of a real quadratic field.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FieldElem {
    repr: Repr,
}

impl FieldElem {
    pub fn zero() -> Self {
        FieldElem { repr: Repr::Rat(BigRational::zero()) }
    }

    pub fn one() -> Self {
        FieldElem { repr: Repr::Rat(BigRational::one()) }
    }

    pub fn from_integer<T: Into<BigInt>>(n: T) -> Self {
        FieldElem { repr: Repr::Rat(BigRational::from_integer(n.into())) }
    }

    pub fn from_rational(r: BigRational) -> Self {
        FieldElem { repr: Repr::Rat(r) }
    }

    /// p/q as an element; panics if q = 0.
    pub fn ratio(p: i64, q: i64) -> Self {
        FieldElem::from_rational(BigRational::new(BigInt::from(p), BigInt::from(q)))
    }

    /// u + v·√d. Elements with v = 0 collapse to the rational representation.
    pub fn quadratic(u: BigRational, v: BigRational, d: u64) -> Self {
        assert!(d >= 2, "quadratic radicand must be ≥ 2, got {d}");
        if v.is_zero() {
            FieldElem { repr: Repr::Rat(u) }
        } else {
            FieldElem { repr: Repr::Quad { u, v, d } }
        }
    }

    /// √d itself.
    pub fn sqrt_d(d: u64) -> Self {
        FieldElem::quadratic(BigRational::zero(), BigRational::one(), d)
    }

    pub fn is_zero(&self) -> bool {
        matches!(&self.repr, Repr::Rat(r) if r.is_zero())
    }

    pub fn is_rational(&self) -> bool {
        matches!(&self.repr, Repr::Rat(_))
    }

    pub fn is_integer(&self) -> bool {
        matches!(&self.repr, Repr::Rat(r) if r.is_integer())
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match &self.repr {
            Repr::Rat(r) => Some(r),
            Repr::Quad { .. } => None,
        }
    }

    pub fn as_integer(&self) -> Option<BigInt> {
        self.as_rational().filter(|r| r.is_integer()).map(|r| r.to_integer())
    }

    /// (rational part, radical part, radicand). Rationals report v = 0 and no d.
    pub fn parts(&self) -> (BigRational, BigRational, Option<u64>) {
        match &self.repr {
            Repr::Rat(r) => (r.clone(), BigRational::zero(), None),
            Repr::Quad { u, v, d } => (u.clone(), v.clone(), Some(*d)),
        }
    }

    /// The radicand d when the element is irrational.
    pub fn radicand(&self) -> Option<u64> {
        match &self.repr {
            Repr::Rat(_) => None,
            Repr::Quad { d, .. } => Some(*d),
        }
    }

    /// True when the element lies in the field described by `kind`.
    pub fn lies_in(&self, kind: &FieldKind) -> bool {
        match (&self.repr, kind) {
            (Repr::Rat(_), _) => true,
            (Repr::Quad { d, .. }, FieldKind::Quadratic { d: kd }) => d == kd,
            (Repr::Quad { .. }, FieldKind::Rational) => false,
        }
    }

    /// Galois conjugate √d ↦ −√d; identity on rationals.
    pub fn conjugate(&self) -> Self {
        match &self.repr {
            Repr::Rat(r) => FieldElem::from_rational(r.clone()),
            Repr::Quad { u, v, d } => FieldElem::quadratic(u.clone(), -v.clone(), *d),
        }
    }

    /// Field norm u² − d·v² (the square of the element for rationals is not
    /// taken: the norm of a rational r is r²).
    pub fn norm(&self) -> BigRational {
        match &self.repr {
            Repr::Rat(r) => r * r,
            Repr::Quad { u, v, d } => u * u - v * v * BigRational::from_integer(BigInt::from(*d)),
        }
    }

    /// Exact sign: −1, 0, or 1.
    pub fn signum(&self) -> i8 {
        match &self.repr {
            Repr::Rat(r) => sign_of(r),
            Repr::Quad { u, v, d } => {
                let su = sign_of(u);
                let sv = sign_of(v);
                if su == 0 {
                    return sv;
                }
                if su == sv {
                    return su;
                }
                // Opposite signs: compare u² against d·v².
                let u2 = u * u;
                let dv2 = v * v * BigRational::from_integer(BigInt::from(*d));
                match u2.cmp(&dv2) {
                    Ordering::Greater => su,
                    Ordering::Less => sv,
                    // u² = d·v² with v ≠ 0 would make √d rational.
                    Ordering::Equal => unreachable!("√{d} cannot be rational"),
                }
            }
        }
    }

    pub fn is_positive(&self) -> bool {
        self.signum() > 0
    }

    pub fn abs(&self) -> Self {
        if self.signum() < 0 {
            -self
        } else {
            self.clone()
        }
    }

    pub fn to_f64(&self) -> f64 {
        match &self.repr {
            Repr::Rat(r) => r.to_f64().unwrap_or(f64::NAN),
            Repr::Quad { u, v, d } => {
                u.to_f64().unwrap_or(f64::NAN)
                    + v.to_f64().unwrap_or(f64::NAN) * (*d as f64).sqrt()
            }
        }
    }

    /// Exact floor.
    pub fn floor(&self) -> BigInt {
        match &self.repr {
            Repr::Rat(r) => r.floor().to_integer(),
            Repr::Quad { u, v, d } => {
                // Write the value as (a + c·√d)/b with integers a, c and b > 0.
                let b = u.denom().lcm(v.denom());
                let a = u.numer() * (&b / u.denom());
                let c = v.numer() * (&b / v.denom());
                let t = &c * &c * BigInt::from(*d);
                let root = t.sqrt();
                // Bracket c·√d between consecutive integers.
                let (lo, hi) = if c.is_negative() {
                    (-(&root + 1u32), -root)
                } else {
                    (root.clone(), root + 1u32)
                };
                let mut m = (&a + lo).div_floor(&b);
                // At most two candidates: m or m + 1.
                let hi_floor = (&a + hi).div_floor(&b);
                while m < hi_floor {
                    let next = &m + 1u32;
                    if FieldElem::from_integer(next.clone()) <= *self {
                        m = next;
                    } else {
                        break;
                    }
                }
                m
            }
        }
    }

    pub fn ceil(&self) -> BigInt {
        -(-self).floor()
    }

    /// Multiplicative inverse; panics on zero.
    pub fn inv(&self) -> Self {
        assert!(!self.is_zero(), "division by zero");
        match &self.repr {
            Repr::Rat(r) => FieldElem::from_rational(r.recip()),
            Repr::Quad { u, v, d } => {
                let n = self.norm();
                FieldElem::quadratic(u / &n, -v / &n, *d)
            }
        }
    }

    fn binop(&self, rhs: &FieldElem, f: impl Fn(&BigRational, &BigRational) -> BigRational) -> FieldElem {
        match (&self.repr, &rhs.repr) {
            (Repr::Rat(a), Repr::Rat(b)) => FieldElem::from_rational(f(a, b)),
            (Repr::Quad { u, v, d }, Repr::Rat(b)) => {
                FieldElem::quadratic(f(u, b), f(v, &BigRational::zero()), *d)
            }
            (Repr::Rat(a), Repr::Quad { u, v, d }) => {
                FieldElem::quadratic(f(a, u), f(&BigRational::zero(), v), *d)
            }
            (Repr::Quad { u, v, d }, Repr::Quad { u: u2, v: v2, d: d2 }) => {
                assert_eq!(d, d2, "mixed quadratic fields: √{d} vs √{d2}");
                FieldElem::quadratic(f(u, u2), f(v, v2), *d)
            }
        }
    }
}

fn sign_of(r: &BigRational) -> i8 {
    if r.is_zero() {
        0
    } else if r.is_positive() {
        1
    } else {
        -1
    }
}

impl Add for &FieldElem {
    type Output = FieldElem;
    fn add(self, rhs: &FieldElem) -> FieldElem {
        self.binop(rhs, |a, b| a + b)
    }
}

impl Sub for &FieldElem {
    type Output = FieldElem;
    fn sub(self, rhs: &FieldElem) -> FieldElem {
        self.binop(rhs, |a, b| a - b)
    }
}

impl Mul for &FieldElem {
    type Output = FieldElem;
    fn mul(self, rhs: &FieldElem) -> FieldElem {
        match (&self.repr, &rhs.repr) {
            (Repr::Rat(a), Repr::Rat(b)) => FieldElem::from_rational(a * b),
            (Repr::Quad { u, v, d }, Repr::Rat(b)) | (Repr::Rat(b), Repr::Quad { u, v, d }) => {
                FieldElem::quadratic(u * b, v * b, *d)
            }
            (Repr::Quad { u, v, d }, Repr::Quad { u: u2, v: v2, d: d2 }) => {
                assert_eq!(d, d2, "mixed quadratic fields: √{d} vs √{d2}");
                let dd = BigRational::from_integer(BigInt::from(*d));
                FieldElem::quadratic(u * u2 + v * v2 * dd, u * v2 + v * u2, *d)
            }
        }
    }
}

impl Div for &FieldElem {
    type Output = FieldElem;
    fn div(self, rhs: &FieldElem) -> FieldElem {
        self * &rhs.inv()
    }
}

impl Neg for &FieldElem {
    type Output = FieldElem;
    fn neg(self) -> FieldElem {
        match &self.repr {
            Repr::Rat(r) => FieldElem::from_rational(-r),
            Repr::Quad { u, v, d } => FieldElem::quadratic(-u, -v, *d),
        }
    }
}

macro_rules! forward_owned {
    ($($trait:ident :: $method:ident),*) => {$(
        impl $trait for FieldElem {
            type Output = FieldElem;
            fn $method(self, rhs: FieldElem) -> FieldElem {
                $trait::$method(&self, &rhs)
            }
        }
    )*};
}
forward_owned!(Add::add, Sub::sub, Mul::mul, Div::div);

impl Neg for FieldElem {
    type Output = FieldElem;
    fn neg(self) -> FieldElem {
        -&self
    }
}

impl PartialOrd for FieldElem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for FieldElem {
    /// Total order by real value. Panics when comparing elements of two
    /// different quadratic fields (out of contract: one field per context).
    fn cmp(&self, other: &Self) -> Ordering {
        match (self - other).signum() {
            -1 => Ordering::Less,
            0 => Ordering::Equal,
            _ => Ordering::Greater,
        }
    }
}

impl From<i64> for FieldElem {
    fn from(n: i64) -> Self {
        FieldElem::from_integer(n)
    }
}

impl fmt::Display for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            Repr::Rat(r) => write!(f, "{}", r),
            Repr::Quad { u, v, d: _ } => {
                if v.is_negative() {
                    write!(f, "{}-{}*r", u, -v)
                } else {
                    write!(f, "{}+{}*r", u, v)
                }
            }
        }
    }
}

/// Parse error for the "p/q" / "u+v*r" scalar grammar.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseFieldElemError {
    input: String,
}

impl fmt::Display for ParseFieldElemError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "cannot parse scalar {:?} (expected \"p/q\" or \"u+v*r\")", self.input)
    }
}

impl std::error::Error for ParseFieldElemError {}

/// Parses a scalar in a fixed quadratic context. The grammar accepts
/// "p/q", "n", "u+v*r", "u-v*r", "v*r", and "r", with r standing for √d.
pub fn parse_in_field(s: &str, kind: &FieldKind) -> Result<FieldElem, ParseFieldElemError> {
    let err = || ParseFieldElemError { input: s.to_string() };
    let s0: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if s0.is_empty() {
        return Err(err());
    }
    if !s0.contains('r') {
        let r = BigRational::from_str(&s0).map_err(|_| err())?;
        return Ok(FieldElem::from_rational(r));
    }
    let d = match kind {
        FieldKind::Quadratic { d } => *d,
        FieldKind::Rational => return Err(err()),
    };
    // Split "u±v*r" at the sign of the radical term: the last '+'/'-' that
    // follows a digit. Everything earlier is the rational part.
    let bytes = s0.as_bytes();
    let mut split = None;
    for i in (1..bytes.len()).rev() {
        if (bytes[i] == b'+' || bytes[i] == b'-') && bytes[i - 1].is_ascii_digit() {
            split = Some(i);
            break;
        }
    }
    let (u_str, rad_str) = match split {
        Some(i) => (&s0[..i], &s0[i..]),
        None => ("0", s0.as_str()),
    };
    if !rad_str.ends_with('r') {
        return Err(err());
    }
    let coef = &rad_str[..rad_str.len() - 1];
    let coef = coef.strip_suffix('*').unwrap_or(coef);
    let v = match coef {
        "" | "+" => BigRational::one(),
        "-" => -BigRational::one(),
        c => BigRational::from_str(c).map_err(|_| err())?,
    };
    let u = BigRational::from_str(u_str).map_err(|_| err())?;
    Ok(FieldElem::quadratic(u, v, d))
}

impl FromStr for FieldElem {
    type Err = ParseFieldElemError;

    /// Parses a rational "p/q". Quadratic scalars need a field context:
    /// use [`parse_in_field`].
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        BigRational::from_str(t)
            .map(FieldElem::from_rational)
            .map_err(|_| ParseFieldElemError { input: s.to_string() })
    }
}
