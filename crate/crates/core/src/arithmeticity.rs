//! Arithmeticity diagnostics: cusp normalization, trace-integrality
//! checks (the two Takeuchi conditions), scalar-rationality
//! decompositions, the N-denominator structure check, and the
//! square-free class homomorphism.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::Error;
use crate::field::{FieldElem, FieldKind};
use crate::mat::{ExactMat2, GlMat2};
use crate::matgroup::GroupSpec;
use crate::primes::squarefree_part_big;
use crate::Result;

/// Verdict vocabulary for the Takeuchi conditions. A finite trace sample
/// can refute integrality (Fail) or witness it (Pass); boundedness of a
/// nontrivial embedding can only ever be Consistent with the observed
/// supremum.
#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Pass,
    Fail,
    Consistent { bound: f64 },
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Pass => write!(f, "pass"),
            Verdict::Fail => write!(f, "fail"),
            Verdict::Consistent { bound } => write!(f, "consistent(bound={bound})"),
            Verdict::Inconclusive => write!(f, "inconclusive"),
        }
    }
}

/// Per-trace integrality outcome.
#[derive(Debug, Clone)]
pub struct TraceIntegrality {
    pub trace: FieldElem,
    pub integral: bool,
}

/// Outcome of the two trace-side conditions over a finite sample.
#[derive(Debug, Clone)]
pub struct TakeuchiReport {
    pub field: FieldKind,
    pub per_trace: Vec<TraceIntegrality>,
    pub condition1: Verdict,
    pub condition2: Verdict,
    /// sup |φ(t)| over the sample for the nontrivial embedding, when any.
    pub embedding_sup: Option<f64>,
}

/// Is t an algebraic integer of its field? Rationals must be rational
/// integers; u + v√D must have 2u and u² − D·v² in Z (this absorbs the
/// half-integer ring of D ≡ 1 mod 4).
pub fn is_algebraic_integer(t: &FieldElem) -> bool {
    match t.radicand() {
        None => t.is_integer(),
        Some(d) => {
            let (u, v, _) = t.parts();
            let two_u = &u + &u;
            let norm = &u * &u - &v * &v * BigRational::from_integer(BigInt::from(d));
            two_u.is_integer() && norm.is_integer()
        }
    }
}

pub fn takeuchi_report(traces: &[FieldElem], field: &FieldKind) -> Result<TakeuchiReport> {
    for t in traces {
        if !t.lies_in(field) {
            return Err(Error::FieldMismatch(format!("trace {t} is not in {field}")));
        }
    }
    let per_trace: Vec<TraceIntegrality> = traces
        .iter()
        .map(|t| TraceIntegrality { trace: t.clone(), integral: is_algebraic_integer(t) })
        .collect();
    let condition1 =
        if per_trace.iter().all(|p| p.integral) { Verdict::Pass } else { Verdict::Fail };
    let (condition2, embedding_sup) = match field {
        // No nontrivial embedding: the boundedness condition is vacuous.
        FieldKind::Rational => (Verdict::Pass, None),
        FieldKind::Quadratic { .. } => {
            if traces.is_empty() {
                (Verdict::Inconclusive, None)
            } else {
                let sup = traces
                    .iter()
                    .map(|t| t.conjugate().to_f64().abs())
                    .fold(0.0f64, f64::max);
                (Verdict::Consistent { bound: sup }, Some(sup))
            }
        }
    };
    Ok(TakeuchiReport { field: *field, per_trace, condition1, condition2, embedding_sup })
}

/// A matrix written as √d times a rational matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SquarefreeClass {
    /// The square-free part of c².
    pub d: BigInt,
    /// The rational matrix B′ with A = √d·B′ (det B′ = 1/d).
    pub rational_part: [BigRational; 4],
}

impl SquarefreeClass {
    /// Class composition: √d₁B₁·√d₂B₂ = √(squarefree(d₁d₂))·(g·B₁B₂)
    /// where d₁d₂ = g²·squarefree(d₁d₂).
    pub fn compose(&self, rhs: &SquarefreeClass) -> Result<SquarefreeClass> {
        let product = &self.d * &rhs.d;
        let sf = squarefree_part_big(&product)?;
        let g2 = &product / &sf;
        let g = g2.sqrt();
        debug_assert_eq!(&g * &g, g2);
        let m = mat_mul_rat(&self.rational_part, &rhs.rational_part);
        let gq = BigRational::from_integer(g);
        Ok(SquarefreeClass { d: sf, rational_part: m.map(|e| e * &gq) })
    }

    pub fn inverse(&self) -> SquarefreeClass {
        // (√d·B)⁻¹ = √d·adj(B) since det(√d·B) = 1.
        let [a, b, c, dd] = self.rational_part.clone();
        SquarefreeClass { d: self.d.clone(), rational_part: [dd, -b, -c, a] }
    }

    /// Rebuilds the exact matrix √d·B′.
    pub fn to_exact(&self) -> Result<ExactMat2> {
        let root = if self.d.is_one() {
            FieldElem::one()
        } else {
            let d_u64 = u64::try_from(&self.d)
                .map_err(|_| Error::Unfactorable { value: self.d.to_string() })?;
            FieldElem::sqrt_d(d_u64)
        };
        let e = |r: &BigRational| &FieldElem::from_rational(r.clone()) * &root;
        ExactMat2::new(
            e(&self.rational_part[0]),
            e(&self.rational_part[1]),
            e(&self.rational_part[2]),
            e(&self.rational_part[3]),
        )
    }
}

fn mat_mul_rat(x: &[BigRational; 4], y: &[BigRational; 4]) -> [BigRational; 4] {
    [
        &x[0] * &y[0] + &x[1] * &y[2],
        &x[0] * &y[1] + &x[1] * &y[3],
        &x[2] * &y[0] + &x[3] * &y[2],
        &x[2] * &y[1] + &x[3] * &y[3],
    ]
}

/// Scalar decomposition A = c·A′ with A′ rational: c is the first nonzero
/// entry, and the decomposition exists iff every entry ratio is rational.
pub fn scalar_decomposition(m: &ExactMat2) -> Result<(FieldElem, [BigRational; 4])> {
    let entries = m.entries();
    let c = entries
        .iter()
        .find(|e| !e.is_zero())
        .expect("det-1 matrix is nonzero");
    let mut rational = Vec::with_capacity(4);
    for e in entries {
        let ratio = if e.is_zero() {
            BigRational::zero()
        } else {
            match crate::zaffine::rational_ratio(e, c) {
                Some(r) => r,
                None => return Err(Error::NoScalarDecomposition),
            }
        };
        rational.push(ratio);
    }
    Ok(((*c).clone(), [rational[0].clone(), rational[1].clone(), rational[2].clone(), rational[3].clone()]))
}

/// Per-matrix record of the scalar-rationality check.
#[derive(Debug, Clone)]
pub struct MatrixRationality {
    pub scalar: Option<FieldElem>,
    pub c_squared_rational: bool,
    pub square_is_rational: bool,
    /// Dimension of the rational span of (β²a, β²b, c, β²d), when checked.
    pub corner_span_dim: Option<usize>,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct SquareRationalityReport {
    pub per_matrix: Vec<MatrixRationality>,
    pub all_pass: bool,
    /// Indices of matrices flagged as counterexample candidates.
    pub flagged: Vec<usize>,
}

/// Checks, for each matrix: existence of the scalar decomposition,
/// rationality of c², rationality of A²'s entries, and (for cusped specs)
/// that the rational span of (β²a, β²b, c, β²d) is at most a line.
pub fn square_rationality_check(
    mats: &[ExactMat2],
    beta2: Option<&BigInt>,
) -> SquareRationalityReport {
    let mut per_matrix = Vec::with_capacity(mats.len());
    let mut flagged = Vec::new();
    for (i, m) in mats.iter().enumerate() {
        let decomposition = scalar_decomposition(m);
        let (scalar, c2_rat) = match &decomposition {
            Ok((c, _)) => ((Some(c.clone())), (c * c).is_rational()),
            Err(_) => (None, false),
        };
        let sq = m * m;
        let square_is_rational = sq.is_rational();
        let corner_span_dim = beta2.map(|n| {
            let b2 = FieldElem::from_integer(n.clone());
            let values =
                [&b2 * m.a(), &b2 * m.b(), m.c().clone(), &b2 * m.d()];
            rational_span_dim(&values)
        });
        let pass = scalar.is_some()
            && c2_rat
            && square_is_rational
            && corner_span_dim.map_or(true, |d| d <= 1);
        if !pass {
            flagged.push(i);
        }
        per_matrix.push(MatrixRationality {
            scalar,
            c_squared_rational: c2_rat,
            square_is_rational,
            corner_span_dim,
            pass,
        });
    }
    SquareRationalityReport { all_pass: flagged.is_empty(), per_matrix, flagged }
}

/// Dimension of the Q-span of a list of field elements (0, 1, or 2).
fn rational_span_dim(values: &[FieldElem]) -> usize {
    let mut basis: Option<&FieldElem> = None;
    for v in values {
        if v.is_zero() {
            continue;
        }
        match basis {
            None => basis = Some(v),
            Some(b) => {
                if crate::zaffine::rational_ratio(v, b).is_none() {
                    return 2;
                }
            }
        }
    }
    usize::from(basis.is_some())
}

/// First entry of a matrix violating the structure condition.
#[derive(Debug, Clone)]
pub struct StructureViolation {
    pub matrix_index: usize,
    pub entry: char,
    pub value: FieldElem,
}

#[derive(Debug, Clone)]
pub struct StructureReport {
    pub n: BigInt,
    pub pass: bool,
    pub first_violation: Option<StructureViolation>,
}

/// Checks N·a, N·b, N·d ∈ Z and c ∈ Z for every (rational) matrix.
pub fn structure_check(mats: &[ExactMat2], n: &BigInt) -> Result<StructureReport> {
    let n_elem = FieldElem::from_integer(n.clone());
    for (i, m) in mats.iter().enumerate() {
        if !m.is_rational() {
            return Err(Error::FieldMismatch(format!("matrix {i} has irrational entries")));
        }
        let checks = [
            ('a', &n_elem * m.a()),
            ('b', &n_elem * m.b()),
            ('c', m.c().clone()),
            ('d', &n_elem * m.d()),
        ];
        for (entry, v) in checks {
            if !v.is_integer() {
                return Ok(StructureReport {
                    n: n.clone(),
                    pass: false,
                    first_violation: Some(StructureViolation {
                        matrix_index: i,
                        entry,
                        value: v,
                    }),
                });
            }
        }
    }
    Ok(StructureReport { n: n.clone(), pass: true, first_violation: None })
}

/// The square-free class D_A of a matrix admitting the scalar
/// decomposition: A = √(D_A)·B′ with B′ rational and det B′ = 1/D_A.
pub fn squarefree_class(m: &ExactMat2) -> Result<SquarefreeClass> {
    let (c, _) = scalar_decomposition(m)?;
    let c2 = &c * &c;
    let c2_rat = c2.as_rational().ok_or(Error::NoScalarDecomposition)?;
    debug_assert!(c2_rat.is_positive());
    let d = squarefree_part_big(&(c2_rat.numer() * c2_rat.denom()))?;
    // B′ = A/√d: each entry times √d/d stays rational by construction.
    let mut rational_part = Vec::with_capacity(4);
    for e in m.entries() {
        let scaled = if d.is_one() {
            e.clone()
        } else {
            let d_u64 = u64::try_from(&d).map_err(|_| Error::Unfactorable { value: d.to_string() })?;
            &(e * &FieldElem::sqrt_d(d_u64)) / &FieldElem::from_integer(d.clone())
        };
        let r = scaled.as_rational().ok_or(Error::NoScalarDecomposition)?.clone();
        rational_part.push(r);
    }
    let rational_part: [BigRational; 4] =
        [rational_part[0].clone(), rational_part[1].clone(), rational_part[2].clone(), rational_part[3].clone()];
    // det B′ = 1/D_A.
    let det = &rational_part[0] * &rational_part[3] - &rational_part[1] * &rational_part[2];
    debug_assert_eq!(det, BigRational::new(BigInt::one(), d.clone()));
    Ok(SquarefreeClass { d, rational_part })
}

/// Square-free class product in ⊕ₚ Z/2Z.
pub fn class_product(d1: &BigInt, d2: &BigInt) -> Result<BigInt> {
    squarefree_part_big(&(d1 * d2))
}

/// Result of conjugating a spec into the canonical cusped form.
#[derive(Debug, Clone)]
pub struct CuspNormalization {
    pub spec: GroupSpec,
    /// The canonical parabolic pair ([[1,1],[0,1]], [[1,0],[N,1]]).
    pub parabolics: (ExactMat2, ExactMat2),
    pub conjugator: GlMat2,
    pub n: BigInt,
    /// True when the second input parabolic conjugated to [[1,0],[−N,1]]
    /// (its inverse is the canonical generator).
    pub second_inverted: bool,
}

/// Boundary fixed point of a parabolic (trace normalized to +2):
/// `None` encodes ∞.
fn parabolic_fixed_point(p: &ExactMat2) -> Result<Option<FieldElem>> {
    let t = p.trace();
    let p = if t == FieldElem::from_integer(-2) {
        p.negated()
    } else if t == FieldElem::from_integer(2) {
        p.clone()
    } else {
        return Err(Error::NotParabolic);
    };
    if p.is_identity() {
        return Err(Error::NotParabolic);
    }
    if p.c().is_zero() {
        Ok(None)
    } else {
        let two = FieldElem::from_integer(2);
        Ok(Some(&(p.a() - p.d()) / &(&two * p.c())))
    }
}

/// Conjugates the spec so the first parabolic becomes [[1,1],[0,1]] and the
/// second becomes [[1,0],[±N,1]], extracting N = β². Traces are unchanged
/// (checked per generator). The canonical parabolics are appended to the
/// generator list when absent, so the result satisfies the cusped-spec
/// invariant.
pub fn normalize_cusped(
    spec: &GroupSpec,
    p1: &ExactMat2,
    p2: &ExactMat2,
) -> Result<CuspNormalization> {
    let x1 = parabolic_fixed_point(p1)?;
    let x2 = parabolic_fixed_point(p2)?;
    if x1 == x2 {
        return Err(Error::CoincidentFixedPoints);
    }
    // Möbius map sending x1 → ∞ and x2 → 0.
    let g = match (&x1, &x2) {
        (Some(a), Some(b)) => GlMat2::new(
            FieldElem::one(),
            -b,
            FieldElem::one(),
            -a,
        )?,
        (None, Some(b)) => GlMat2::new(FieldElem::one(), -b, FieldElem::zero(), FieldElem::one())?,
        (Some(a), None) => GlMat2::new(FieldElem::zero(), FieldElem::one(), FieldElem::one(), -a)?,
        (None, None) => unreachable!("distinct fixed points"),
    };
    let q1 = sign_to_trace_two(&g.conjugate(p1));
    debug_assert!(q1.c().is_zero() && q1.a() == &FieldElem::one());
    let shift = q1.b().clone();
    debug_assert!(!shift.is_zero());
    // Rescale the shift to 1: conjugation by [[1,0],[0,s]].
    let h = GlMat2::new(FieldElem::one(), FieldElem::zero(), FieldElem::zero(), shift)?;
    let conjugator = h.compose(&g);
    let c1 = sign_to_trace_two(&conjugator.conjugate(p1));
    let c2 = sign_to_trace_two(&conjugator.conjugate(p2));
    debug_assert_eq!(c1, ExactMat2::from_integers(1, 1, 0, 1));
    debug_assert!(c2.b().is_zero());
    let corner = c2.c().clone();
    let n = corner
        .abs()
        .as_integer()
        .filter(|v| v.is_positive())
        .ok_or(Error::NonIntegerCusp { got: corner.to_string() })?;
    let second_inverted = corner.signum() < 0;
    let canonical_second = ExactMat2::new(
        FieldElem::one(),
        FieldElem::zero(),
        FieldElem::from_integer(n.clone()),
        FieldElem::one(),
    )?;
    let mut generators: Vec<ExactMat2> = spec
        .generators()
        .iter()
        .map(|m| conjugator.conjugate(m).normalize_projective())
        .collect();
    for (gen, original) in generators.iter().zip(spec.generators()) {
        debug_assert!(
            gen.trace() == original.trace() || gen.trace() == -&original.trace(),
            "conjugation must preserve traces projectively"
        );
    }
    for canonical in [&c1, &canonical_second] {
        let cn = canonical.normalize_projective();
        if !generators.contains(&cn) {
            generators.push(cn);
        }
    }
    let spec = GroupSpec::new(*spec.field(), generators, Some(n.clone()))?;
    Ok(CuspNormalization {
        spec,
        parabolics: (c1, canonical_second),
        conjugator,
        n,
        second_inverted,
    })
}

/// The trace-+2 representative of a projective parabolic.
fn sign_to_trace_two(m: &ExactMat2) -> ExactMat2 {
    if m.trace().signum() < 0 {
        m.negated()
    } else {
        m.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fe(p: i64, q: i64) -> FieldElem {
        FieldElem::ratio(p, q)
    }

    fn fi(n: i64) -> FieldElem {
        FieldElem::from_integer(n)
    }

    fn rq(p: i64, q: i64) -> BigRational {
        BigRational::new(BigInt::from(p), BigInt::from(q))
    }

    #[test]
    fn algebraic_integer_criterion() {
        assert!(is_algebraic_integer(&fi(3)));
        assert!(!is_algebraic_integer(&fe(3, 2)));
        // √2 and 2 + √2 are integers of Q(√2).
        assert!(is_algebraic_integer(&FieldElem::sqrt_d(2)));
        assert!(is_algebraic_integer(&(&fi(2) + &FieldElem::sqrt_d(2))));
        // (1+√5)/2 is an integer of Q(√5) (D ≡ 1 mod 4).
        let golden = FieldElem::quadratic(rq(1, 2), rq(1, 2), 5);
        assert!(is_algebraic_integer(&golden));
        // (1+√2)/2 is not.
        let x = FieldElem::quadratic(rq(1, 2), rq(1, 2), 2);
        assert!(!is_algebraic_integer(&x));
    }

    #[test]
    fn takeuchi_over_q() {
        let traces = [fi(0), fi(1), fi(2), fi(3)];
        let rep = takeuchi_report(&traces, &FieldKind::Rational).unwrap();
        assert_eq!(rep.condition1, Verdict::Pass);
        assert_eq!(rep.condition2, Verdict::Pass);
        let rep = takeuchi_report(&[fe(3, 2)], &FieldKind::Rational).unwrap();
        assert_eq!(rep.condition1, Verdict::Fail);
    }

    #[test]
    fn takeuchi_over_quadratic() {
        let traces = [FieldElem::sqrt_d(2), &fi(2) + &FieldElem::sqrt_d(2)];
        let rep = takeuchi_report(&traces, &FieldKind::Quadratic { d: 2 }).unwrap();
        assert_eq!(rep.condition1, Verdict::Pass);
        match rep.condition2 {
            Verdict::Consistent { bound } => {
                assert!((bound - 2f64.sqrt()).abs() < 1e-12, "sup is √2");
            }
            other => panic!("expected consistent, got {other}"),
        }
        // A quadratic trace cannot be checked against a rational field.
        assert!(matches!(
            takeuchi_report(&[FieldElem::sqrt_d(2)], &FieldKind::Rational),
            Err(Error::FieldMismatch(_))
        ));
    }

    #[test]
    fn scalar_decomposition_cases() {
        // diag(√2, 1/√2) = √2·diag(1, 1/2)
        let m = ExactMat2::new(
            FieldElem::sqrt_d(2),
            FieldElem::zero(),
            FieldElem::zero(),
            FieldElem::quadratic(rq(0, 1), rq(1, 2), 2),
        )
        .unwrap();
        let (c, b) = scalar_decomposition(&m).unwrap();
        assert_eq!(c, FieldElem::sqrt_d(2));
        assert_eq!(b, [rq(1, 1), rq(0, 1), rq(0, 1), rq(1, 2)]);
        // Rational matrices decompose with c = a.
        let (c, _) = scalar_decomposition(&ExactMat2::from_integers(2, 1, 1, 1)).unwrap();
        assert_eq!(c, fi(2));
        // (1+√2)-scaled diagonals admit no decomposition.
        let bad = ExactMat2::new(
            &fi(1) + &FieldElem::sqrt_d(2),
            FieldElem::zero(),
            FieldElem::zero(),
            (&fi(1) + &FieldElem::sqrt_d(2)).inv(),
        )
        .unwrap();
        assert!(matches!(scalar_decomposition(&bad), Err(Error::NoScalarDecomposition)));
    }

    #[test]
    fn square_rationality_and_flags() {
        let good = ExactMat2::new(
            FieldElem::sqrt_d(2),
            FieldElem::zero(),
            FieldElem::zero(),
            FieldElem::quadratic(rq(0, 1), rq(1, 2), 2),
        )
        .unwrap();
        let rational = ExactMat2::from_integers(1, 3, 0, 1);
        let bad = ExactMat2::new(
            &fi(1) + &FieldElem::sqrt_d(2),
            FieldElem::zero(),
            FieldElem::zero(),
            (&fi(1) + &FieldElem::sqrt_d(2)).inv(),
        )
        .unwrap();
        let rep = square_rationality_check(&[good, rational, bad], None);
        assert!(!rep.all_pass);
        assert_eq!(rep.flagged, vec![2]);
        assert!(rep.per_matrix[0].pass);
        assert!(rep.per_matrix[1].pass);
        assert!(!rep.per_matrix[2].pass);
        // (1+√2)² = 3+2√2 is irrational: the square check fails too.
        assert!(!rep.per_matrix[2].square_is_rational);
    }

    #[test]
    fn corner_span_is_line_for_canonical_products() {
        // [[1+β², 1], [β², 1]] has (β²a, β²b, c, β²d) all rational: dim 1.
        let b2 = 3i64;
        let m = ExactMat2::from_integers(1 + b2, 1, b2, 1);
        let rep = square_rationality_check(&[m], Some(&BigInt::from(b2)));
        assert_eq!(rep.per_matrix[0].corner_span_dim, Some(1));
        assert!(rep.all_pass);
    }

    #[test]
    fn structure_check_examples() {
        let n = BigInt::from(2);
        let pass = ExactMat2::new(fe(1, 2), fi(1), fi(1), fi(4)).unwrap();
        let rep = structure_check(&[pass], &n).unwrap();
        assert!(rep.pass);
        let fail = ExactMat2::new(fe(1, 3), fi(1), fi(1), fi(6)).unwrap();
        let rep = structure_check(&[fail], &n).unwrap();
        assert!(!rep.pass);
        let v = rep.first_violation.unwrap();
        assert_eq!(v.entry, 'a');
        // SL(2,Z) with N = 1.
        let rep = structure_check(
            &[ExactMat2::from_integers(2, 1, 1, 1), ExactMat2::from_integers(1, 1, 0, 1)],
            &BigInt::one(),
        )
        .unwrap();
        assert!(rep.pass);
    }

    #[test]
    fn squarefree_classes() {
        let m = ExactMat2::new(
            FieldElem::sqrt_d(2),
            FieldElem::zero(),
            FieldElem::zero(),
            FieldElem::quadratic(rq(0, 1), rq(1, 2), 2),
        )
        .unwrap();
        let cls = squarefree_class(&m).unwrap();
        assert_eq!(cls.d, BigInt::from(2));
        // det B′ = 1/2 per the defining identity.
        let det = &cls.rational_part[0] * &cls.rational_part[3]
            - &cls.rational_part[1] * &cls.rational_part[2];
        assert_eq!(det, rq(1, 2));
        // Rational matrices have class 1.
        let cls1 = squarefree_class(&ExactMat2::from_integers(2, 1, 1, 1)).unwrap();
        assert_eq!(cls1.d, BigInt::one());
        // diag(√2,·)·diag(√3,·) composes to class 6.
        let m3 = ExactMat2::new(
            FieldElem::sqrt_d(3),
            FieldElem::zero(),
            FieldElem::zero(),
            FieldElem::quadratic(rq(0, 1), rq(1, 3), 3),
        )
        .unwrap();
        let cls3 = squarefree_class(&m3).unwrap();
        let prod = cls.compose(&cls3).unwrap();
        assert_eq!(prod.d, BigInt::from(6));
        // Direct construction of diag(√6, 1/√6) agrees.
        let m6 = prod.to_exact().unwrap();
        let cls6 = squarefree_class(&m6).unwrap();
        assert_eq!(cls6.d, BigInt::from(6));
        // Inverse has the same class.
        assert_eq!(cls.inverse().d, cls.d);
    }

    #[test]
    fn cusp_normalization_examples() {
        // Already canonical with β² = 3.
        let t = ExactMat2::from_integers(1, 1, 0, 1);
        let u3 = ExactMat2::from_integers(1, 0, 3, 1);
        let spec =
            GroupSpec::new(FieldKind::Rational, vec![t.clone(), u3.clone()], None).unwrap();
        let norm = normalize_cusped(&spec, &t, &u3).unwrap();
        assert_eq!(norm.n, BigInt::from(3));
        assert_eq!(norm.parabolics.0, t);
        assert_eq!(norm.parabolics.1, u3);
        assert_eq!(norm.spec.generators()[0], t);
        assert_eq!(norm.spec.generators()[1], u3);

        // Shift-2 and corner-6 parabolics rescale to N = 12.
        let p1 = ExactMat2::from_integers(1, 2, 0, 1);
        let p2 = ExactMat2::from_integers(1, 0, 6, 1);
        let spec =
            GroupSpec::new(FieldKind::Rational, vec![p1.clone(), p2.clone()], None).unwrap();
        let norm = normalize_cusped(&spec, &p1, &p2).unwrap();
        assert_eq!(norm.n, BigInt::from(12));
        assert_eq!(norm.parabolics.0, ExactMat2::from_integers(1, 1, 0, 1));
        assert_eq!(norm.parabolics.1, ExactMat2::from_integers(1, 0, 12, 1));
        // Traces preserved on generators.
        for (before, after) in spec.generators().iter().zip(norm.spec.generators()) {
            assert_eq!(before.trace().abs(), after.trace().abs());
        }

        // Elliptic input is rejected.
        let s = ExactMat2::from_integers(0, -1, 1, 0);
        assert!(matches!(normalize_cusped(&spec, &s, &p2), Err(Error::NotParabolic)));
        // Coincident fixed points are rejected.
        let p1b = ExactMat2::from_integers(1, 3, 0, 1);
        assert!(matches!(
            normalize_cusped(&spec, &p1, &p1b),
            Err(Error::CoincidentFixedPoints)
        ));
    }

    #[test]
    fn cusp_normalization_preserves_ball_traces() {
        use crate::matgroup::{enumerate_ball, BallOptions, TraceSet};
        let p1 = ExactMat2::from_integers(1, 2, 0, 1);
        let p2 = ExactMat2::from_integers(1, 0, 6, 1);
        let extra = ExactMat2::from_integers(2, 1, 1, 1);
        let spec = GroupSpec::new(
            FieldKind::Rational,
            vec![p1.clone(), p2.clone(), extra],
            None,
        )
        .unwrap();
        let norm = normalize_cusped(&spec, &p1, &p2).unwrap();
        // Word-length-4 balls of the original generators and their
        // conjugates have identical trace sets (conjugation invariance).
        let original = enumerate_ball(&spec, 4, BallOptions::default()).unwrap();
        let conjugated_only = GroupSpec::new(
            FieldKind::Rational,
            spec.generators().iter().map(|g| norm.conjugator.conjugate(g)).collect(),
            None,
        )
        .unwrap();
        let conjugated = enumerate_ball(&conjugated_only, 4, BallOptions::default()).unwrap();
        assert_eq!(original.len(), conjugated.len());
        let t1 = TraceSet::from_ball(&original);
        let t2 = TraceSet::from_ball(&conjugated);
        assert_eq!(t1.exact_values().unwrap(), t2.exact_values().unwrap());
    }

    #[test]
    fn cusp_normalization_moves_finite_fixed_points() {
        // Conjugate the canonical pair away and check it comes back.
        let t = ExactMat2::from_integers(1, 1, 0, 1);
        let u3 = ExactMat2::from_integers(1, 0, 3, 1);
        let w = GlMat2::new(fi(2), fi(1), fi(1), fi(1)).unwrap();
        let q1 = w.conjugate(&t);
        let q2 = w.conjugate(&u3);
        let spec = GroupSpec::new(FieldKind::Rational, vec![q1.clone(), q2.clone()], None).unwrap();
        let norm = normalize_cusped(&spec, &q1, &q2).unwrap();
        assert_eq!(norm.n, BigInt::from(3));
        assert_eq!(norm.parabolics.0, t);
        // Trace preservation through the round trip.
        for (g, h) in spec.generators().iter().zip(norm.spec.generators()) {
            assert_eq!(g.trace().abs(), h.trace().abs());
        }
    }
}
