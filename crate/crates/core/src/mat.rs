//! Determinant-one 2×2 matrices over exact scalars, with the projective
//! normal form identifying M and −M.

use std::fmt;
use std::ops::Mul;

use crate::error::Error;
use crate::field::FieldElem;
use crate::Result;

/// An element of SL(2, K) for K = Q or Q(√d). The determinant is exactly 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExactMat2 {
    a: FieldElem,
    b: FieldElem,
    c: FieldElem,
    d: FieldElem,
}

impl ExactMat2 {
    /// Builds a matrix, checking det = 1 exactly.
    pub fn new(a: FieldElem, b: FieldElem, c: FieldElem, d: FieldElem) -> Result<Self> {
        let det = &(&a * &d) - &(&b * &c);
        if det != FieldElem::one() {
            return Err(Error::NotUnimodular { got: det.to_string() });
        }
        Ok(ExactMat2 { a, b, c, d })
    }

    /// Integer-entried matrix; panics on det ≠ 1 (intended for fixtures).
    pub fn from_integers(a: i64, b: i64, c: i64, d: i64) -> Self {
        ExactMat2::new(
            FieldElem::from_integer(a),
            FieldElem::from_integer(b),
            FieldElem::from_integer(c),
            FieldElem::from_integer(d),
        )
        .expect("integer matrix must have det 1")
    }

    pub fn identity() -> Self {
        ExactMat2 {
            a: FieldElem::one(),
            b: FieldElem::zero(),
            c: FieldElem::zero(),
            d: FieldElem::one(),
        }
    }

    pub fn entries(&self) -> [&FieldElem; 4] {
        [&self.a, &self.b, &self.c, &self.d]
    }

    pub fn a(&self) -> &FieldElem {
        &self.a
    }
    pub fn b(&self) -> &FieldElem {
        &self.b
    }
    pub fn c(&self) -> &FieldElem {
        &self.c
    }
    pub fn d(&self) -> &FieldElem {
        &self.d
    }

    pub fn trace(&self) -> FieldElem {
        &self.a + &self.d
    }

    pub fn det(&self) -> FieldElem {
        &(&self.a * &self.d) - &(&self.b * &self.c)
    }

    /// Inverse via the adjugate; exact since det = 1.
    pub fn inverse(&self) -> Self {
        ExactMat2 {
            a: self.d.clone(),
            b: -&self.b,
            c: -&self.c,
            d: self.a.clone(),
        }
    }

    pub fn negated(&self) -> Self {
        ExactMat2 { a: -&self.a, b: -&self.b, c: -&self.c, d: -&self.d }
    }

    /// Projective normal form: the representative of {M, −M} whose first
    /// nonzero entry in reading order is positive. Idempotent, and
    /// `normalize_projective(m) == normalize_projective(-m)`.
    pub fn normalize_projective(&self) -> Self {
        for e in self.entries() {
            match e.signum() {
                1 => return self.clone(),
                -1 => return self.negated(),
                _ => continue,
            }
        }
        unreachable!("zero matrix cannot have det 1")
    }

    pub fn is_identity(&self) -> bool {
        self.b.is_zero() && self.c.is_zero() && self.a == FieldElem::one() && self.d == FieldElem::one()
    }

    /// True when all four entries are rational.
    pub fn is_rational(&self) -> bool {
        self.entries().iter().all(|e| e.is_rational())
    }
}

impl Mul for &ExactMat2 {
    type Output = ExactMat2;
    fn mul(self, rhs: &ExactMat2) -> ExactMat2 {
        ExactMat2 {
            a: &(&self.a * &rhs.a) + &(&self.b * &rhs.c),
            b: &(&self.a * &rhs.b) + &(&self.b * &rhs.d),
            c: &(&self.c * &rhs.a) + &(&self.d * &rhs.c),
            d: &(&self.c * &rhs.b) + &(&self.d * &rhs.d),
        }
    }
}

impl Mul for ExactMat2 {
    type Output = ExactMat2;
    fn mul(self, rhs: ExactMat2) -> ExactMat2 {
        &self * &rhs
    }
}

impl fmt::Display for ExactMat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.a, self.b, self.c, self.d)
    }
}

/// An invertible 2×2 matrix used as a conjugator. Its determinant need not
/// be 1: conjugation g·M·g⁻¹ is determinant-free, so GL(2, K) conjugators
/// keep every computation inside the coefficient field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GlMat2 {
    pub a: FieldElem,
    pub b: FieldElem,
    pub c: FieldElem,
    pub d: FieldElem,
}

impl GlMat2 {
    pub fn new(a: FieldElem, b: FieldElem, c: FieldElem, d: FieldElem) -> Result<Self> {
        let g = GlMat2 { a, b, c, d };
        if g.det().is_zero() {
            return Err(Error::Precondition("conjugator must be invertible".into()));
        }
        Ok(g)
    }

    pub fn det(&self) -> FieldElem {
        &(&self.a * &self.d) - &(&self.b * &self.c)
    }

    pub fn compose(&self, rhs: &GlMat2) -> GlMat2 {
        GlMat2 {
            a: &(&self.a * &rhs.a) + &(&self.b * &rhs.c),
            b: &(&self.a * &rhs.b) + &(&self.b * &rhs.d),
            c: &(&self.c * &rhs.a) + &(&self.d * &rhs.c),
            d: &(&self.c * &rhs.b) + &(&self.d * &rhs.d),
        }
    }

    /// g·m·g⁻¹, computed as g·m·adj(g)/det(g) so the result is exact.
    pub fn conjugate(&self, m: &ExactMat2) -> ExactMat2 {
        let det = self.det();
        // g * m
        let p = GlMat2 {
            a: &(&self.a * &m.a) + &(&self.b * &m.c),
            b: &(&self.a * &m.b) + &(&self.b * &m.d),
            c: &(&self.c * &m.a) + &(&self.d * &m.c),
            d: &(&self.c * &m.b) + &(&self.d * &m.d),
        };
        // (g * m) * adj(g)
        let adj = GlMat2 { a: self.d.clone(), b: -&self.b, c: -&self.c, d: self.a.clone() };
        let q = p.compose(&adj);
        ExactMat2 {
            a: &q.a / &det,
            b: &q.b / &det,
            c: &q.c / &det,
            d: &q.d / &det,
        }
    }
}
