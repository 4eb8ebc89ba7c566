//! Z-GCD/Z-LCM arithmetic on positive reals, Z-affine subspaces
//! {x + k·y : k ∈ Z} with exact density and intersection classification,
//! interval counting, Bonferroni union bounds, effective Dirichlet sums,
//! and the trace-family builder driven by matrix-power recurrences.

use std::collections::BTreeSet;
use std::ops::RangeInclusive;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::Error;
use crate::field::FieldElem;
use crate::mat::ExactMat2;
use crate::primes::{is_prime_u64, PrimeSieve};
use crate::qrs::{decompose_affine_pair, QrsSeq};
use crate::Result;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// A real number that is either exact or a float-tagged approximation.
/// Exactness gates the operations that need decidable rationality.
#[derive(Debug, Clone, PartialEq)]
pub enum Real {
    Exact(FieldElem),
    Approx(f64),
}

impl Real {
    pub fn from_rational(r: BigRational) -> Self {
        Real::Exact(FieldElem::from_rational(r))
    }

    pub fn from_integer(n: i64) -> Self {
        Real::Exact(FieldElem::from_integer(n))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Real::Exact(e) => e.to_f64(),
            Real::Approx(x) => *x,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Real::Exact(_))
    }

    pub fn as_exact(&self) -> Option<&FieldElem> {
        match self {
            Real::Exact(e) => Some(e),
            Real::Approx(_) => None,
        }
    }
}

impl From<FieldElem> for Real {
    fn from(e: FieldElem) -> Self {
        Real::Exact(e)
    }
}

/// Period of a Z-affine subspace: positive, or infinite for singletons.
#[derive(Debug, Clone, PartialEq)]
pub enum Period {
    Finite(Real),
    Infinite,
}

/// The set A_{x,y} = {x + k·y : k ∈ Z}; A_{x,∞} denotes the singleton {x}.
#[derive(Debug, Clone, PartialEq)]
pub struct ZAffine {
    offset: Real,
    period: Period,
}

/// Classification of an intersection of two Z-affine subspaces.
#[derive(Debug, Clone, PartialEq)]
pub enum Intersection {
    Empty,
    Point(FieldElem),
    Affine(ZAffine),
}

/// Z-GCD and Z-LCM of a positive pair; `lcm = None` encodes +∞.
#[derive(Debug, Clone, PartialEq)]
pub struct ZGcdLcm {
    pub gcd: FieldElem,
    pub lcm: Option<FieldElem>,
}

impl ZAffine {
    /// Exact space with finite period; the period must be positive.
    pub fn exact(offset: FieldElem, period: FieldElem) -> Self {
        assert!(period.is_positive(), "period must be positive");
        ZAffine { offset: Real::Exact(offset), period: Period::Finite(Real::Exact(period)) }
    }

    /// The singleton {x}.
    pub fn singleton(offset: FieldElem) -> Self {
        ZAffine { offset: Real::Exact(offset), period: Period::Infinite }
    }

    /// Float-tagged space; admissible for density and counting only.
    pub fn approx(offset: f64, period: f64) -> Self {
        assert!(period > 0.0, "period must be positive");
        ZAffine { offset: Real::Approx(offset), period: Period::Finite(Real::Approx(period)) }
    }

    pub fn offset(&self) -> &Real {
        &self.offset
    }

    pub fn period(&self) -> &Period {
        &self.period
    }

    pub fn is_exact(&self) -> bool {
        self.offset.is_exact()
            && match &self.period {
                Period::Finite(p) => p.is_exact(),
                Period::Infinite => true,
            }
    }

    /// Natural density ρ = 1/y, with 1/∞ = 0.
    pub fn density(&self) -> Real {
        match &self.period {
            Period::Infinite => Real::Exact(FieldElem::zero()),
            Period::Finite(Real::Exact(y)) => Real::Exact(y.inv()),
            Period::Finite(Real::Approx(y)) => Real::Approx(1.0 / y),
        }
    }

    /// Exact membership test; requires an exact space.
    pub fn contains(&self, x: &FieldElem) -> Result<bool> {
        let offset = self.offset.as_exact().ok_or(Error::ExactnessRequired("membership"))?;
        match &self.period {
            Period::Infinite => Ok(x == offset),
            Period::Finite(p) => {
                let y = p.as_exact().ok_or(Error::ExactnessRequired("membership"))?;
                match checked_sub(x, offset) {
                    // Cross-field difference: never an integer multiple.
                    None => Ok(false),
                    Some(diff) => match checked_div(&diff, y) {
                        None => Ok(false),
                        Some(q) => Ok(q.is_integer()),
                    },
                }
            }
        }
    }

    /// Exact count of A ∩ [lo, hi]. For float-tagged spaces the count is
    /// computed in f64 (floor/ceil on the quotients) without a tolerance.
    pub fn count_in_interval(&self, lo: &Real, hi: &Real) -> u64 {
        match (&self.offset, &self.period) {
            (Real::Exact(x), Period::Infinite) => {
                match (lo.as_exact(), hi.as_exact()) {
                    (Some(l), Some(h)) => u64::from(
                        cross_cmp_le(l, x).unwrap_or(false) && cross_cmp_le(x, h).unwrap_or(false),
                    ),
                    _ => {
                        let v = x.to_f64();
                        u64::from(lo.to_f64() <= v && v <= hi.to_f64())
                    }
                }
            }
            (Real::Approx(x), Period::Infinite) => {
                u64::from(lo.to_f64() <= *x && *x <= hi.to_f64())
            }
            (Real::Exact(x), Period::Finite(Real::Exact(y)))
                if lo.is_exact() && hi.is_exact() =>
            {
                let lo = lo.as_exact().unwrap();
                let hi = hi.as_exact().unwrap();
                let qlo = match checked_sub(lo, x).and_then(|d| checked_div(&d, y)) {
                    Some(q) => q,
                    None => return 0, // cross-field: no element can land in a rational interval
                };
                let qhi = match checked_sub(hi, x).and_then(|d| checked_div(&d, y)) {
                    Some(q) => q,
                    None => return 0,
                };
                let k_lo = qlo.ceil();
                let k_hi = qhi.floor();
                if k_hi < k_lo {
                    0
                } else {
                    (k_hi - k_lo + 1u32).to_u64().unwrap_or(u64::MAX)
                }
            }
            _ => {
                let x = self.offset.to_f64();
                let y = match &self.period {
                    Period::Finite(p) => p.to_f64(),
                    Period::Infinite => unreachable!(),
                };
                let k_lo = ((lo.to_f64() - x) / y).ceil();
                let k_hi = ((hi.to_f64() - x) / y).floor();
                if k_hi < k_lo {
                    0
                } else {
                    (k_hi - k_lo + 1.0) as u64
                }
            }
        }
    }

    /// Lists A ∩ [lo, hi] for an exact space (ascending).
    pub fn elements_in_interval(&self, lo: &FieldElem, hi: &FieldElem) -> Result<Vec<FieldElem>> {
        if !self.is_exact() {
            return Err(Error::ExactnessRequired("element enumeration"));
        }
        let x = self.offset.as_exact().unwrap();
        match &self.period {
            Period::Infinite => {
                let inside =
                    cross_cmp_le(lo, x).unwrap_or(false) && cross_cmp_le(x, hi).unwrap_or(false);
                Ok(if inside { vec![x.clone()] } else { Vec::new() })
            }
            Period::Finite(p) => {
                let y = p.as_exact().unwrap();
                let qlo = checked_sub(lo, x).and_then(|d| checked_div(&d, y));
                let qhi = checked_sub(hi, x).and_then(|d| checked_div(&d, y));
                let (qlo, qhi) = match (qlo, qhi) {
                    (Some(a), Some(b)) => (a, b),
                    _ => return Ok(Vec::new()),
                };
                let mut out = Vec::new();
                let mut k = qlo.ceil();
                let k_hi = qhi.floor();
                while k <= k_hi {
                    out.push(x + &(&FieldElem::from_integer(k.clone()) * y));
                    k += 1u32;
                }
                Ok(out)
            }
        }
    }
}

/// Subtraction that refuses to mix two different quadratic fields (the
/// difference would live in a biquadratic extension).
fn checked_sub(a: &FieldElem, b: &FieldElem) -> Option<FieldElem> {
    match (a.radicand(), b.radicand()) {
        (Some(d1), Some(d2)) if d1 != d2 => None,
        _ => Some(a - b),
    }
}

fn checked_div(a: &FieldElem, b: &FieldElem) -> Option<FieldElem> {
    match (a.radicand(), b.radicand()) {
        (Some(d1), Some(d2)) if d1 != d2 => None,
        _ => Some(a / b),
    }
}

/// `a ≤ b` across possibly different quadratic fields; `None` when the
/// comparison would need biquadratic arithmetic.
fn cross_cmp_le(a: &FieldElem, b: &FieldElem) -> Option<bool> {
    checked_sub(a, b).map(|d| d.signum() <= 0)
}

/// Exact ratio x/y as a rational, or `None` when irrational (including
/// ratios across two different quadratic fields).
pub fn rational_ratio(x: &FieldElem, y: &FieldElem) -> Option<BigRational> {
    match checked_div(x, y) {
        None => None,
        Some(q) => q.as_rational().cloned(),
    }
}

/// Z-GCD and Z-LCM of two positive reals. Irrational ratio gives (0, +∞);
/// a rational ratio p/q (reduced) gives (x/p, x·q), which satisfies
/// gcd·lcm = x·y.
pub fn gcd_lcm_z(x: &Real, y: &Real) -> Result<ZGcdLcm> {
    let (xe, ye) = match (x.as_exact(), y.as_exact()) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::UndecidableRatio),
    };
    if !xe.is_positive() || !ye.is_positive() {
        return Err(Error::Precondition("Z-GCD/Z-LCM need positive arguments".into()));
    }
    match rational_ratio(xe, ye) {
        None => Ok(ZGcdLcm { gcd: FieldElem::zero(), lcm: None }),
        Some(r) => {
            let p = FieldElem::from_rational(BigRational::from_integer(r.numer().clone()));
            let q = FieldElem::from_rational(BigRational::from_integer(r.denom().clone()));
            Ok(ZGcdLcm { gcd: xe / &p, lcm: Some(xe * &q) })
        }
    }
}

/// Intersection of two exact Z-affine subspaces, classified per the
/// period-ratio case analysis. In the affine case the returned period is
/// LCM_Z(y, y′) and the offset is the least common element ≥ max(x, x′).
pub fn intersect(a: &ZAffine, b: &ZAffine) -> Result<Intersection> {
    if !a.is_exact() || !b.is_exact() {
        return Err(Error::ExactnessRequired("intersection"));
    }
    let xa = a.offset.as_exact().unwrap();
    let xb = b.offset.as_exact().unwrap();
    match (&a.period, &b.period) {
        (Period::Infinite, _) => Ok(if b.contains(xa)? { Intersection::Point(xa.clone()) } else { Intersection::Empty }),
        (_, Period::Infinite) => Ok(if a.contains(xb)? { Intersection::Point(xb.clone()) } else { Intersection::Empty }),
        (Period::Finite(pa), Period::Finite(pb)) => {
            let ya = pa.as_exact().unwrap();
            let yb = pb.as_exact().unwrap();
            match rational_ratio(ya, yb) {
                None => intersect_irrational_periods(xa, ya, xb, yb),
                Some(ratio) => {
                    debug_assert!(ratio.is_positive());
                    let p = ratio.numer().clone();
                    let q = ratio.denom().clone();
                    // g = GCD_Z(y, y′) = y/p; solutions need (x′−x)/g ∈ Z.
                    let g = ya / &FieldElem::from_integer(p.clone());
                    let delta = match checked_sub(xb, xa) {
                        Some(d) => d,
                        None => return Ok(Intersection::Empty),
                    };
                    let m_elem = match checked_div(&delta, &g) {
                        Some(v) => v,
                        None => return Ok(Intersection::Empty),
                    };
                    let m = match m_elem.as_integer() {
                        Some(m) => m,
                        None => return Ok(Intersection::Empty),
                    };
                    // Solve k·p ≡ m (mod q) for the congruence class of k.
                    let eg = p.extended_gcd(&q);
                    debug_assert!(eg.gcd.is_one());
                    let k0 = (eg.x * &m).mod_floor(&q);
                    let base = xa + &(&FieldElem::from_integer(k0) * ya);
                    let period = ya * &FieldElem::from_integer(q);
                    // Normalize the offset to the least element ≥ max(x, x′).
                    let target = if cross_cmp_le(xa, xb).unwrap_or(true) { xb } else { xa };
                    let j = (&(target - &base) / &period).ceil();
                    let offset = &base + &(&FieldElem::from_integer(j) * &period);
                    Ok(Intersection::Affine(ZAffine::exact(offset, period)))
                }
            }
        }
    }
}

/// Irrational period ratio: at most one common point, found by splitting
/// k·y − k′·y′ = x′ − x into rational and radical components.
fn intersect_irrational_periods(
    xa: &FieldElem,
    ya: &FieldElem,
    xb: &FieldElem,
    yb: &FieldElem,
) -> Result<Intersection> {
    let delta = match checked_sub(xb, xa) {
        Some(d) => d,
        None => return Ok(Intersection::Empty),
    };
    // All quantities must live in one field for the component split.
    let mut radicand = None;
    for e in [ya, yb, &delta] {
        if let Some(d) = e.radicand() {
            match radicand {
                None => radicand = Some(d),
                Some(d0) if d0 == d => {}
                Some(_) => return Err(Error::Precondition("mixed quadratic fields in intersect".into())),
            }
        }
    }
    let (ya_u, ya_v, _) = ya.parts();
    let (yb_u, yb_v, _) = yb.parts();
    let (du, dv, _) = delta.parts();
    // k·ya − k′·yb = Δ componentwise; determinant ≠ 0 since the ratio is irrational.
    let det = &ya_u * &yb_v - &ya_v * &yb_u;
    debug_assert!(!det.is_zero());
    let k = (&du * &yb_v - &dv * &yb_u) / &det;
    let kp = (&ya_v * &du - &ya_u * &dv) / &det;
    // Sanity: k·ya − k′·yb = Δ must hold for the unique rational solution.
    debug_assert_eq!(&k * &ya_u - &kp * &yb_u, du);
    debug_assert_eq!(&k * &ya_v - &kp * &yb_v, dv);
    if k.is_integer() && kp.is_integer() {
        let point = xa + &(&FieldElem::from_rational(k) * ya);
        Ok(Intersection::Point(point))
    } else {
        Ok(Intersection::Empty)
    }
}

/// Exact union cardinality on [lo, hi] together with the two-term
/// Bonferroni lower bound Σᵢ#Aᵢ − Σ_{i<j}#(Aᵢ∩Aⱼ).
#[derive(Debug, Clone)]
pub struct UnionBound {
    pub exact: u64,
    pub singles: u64,
    pub pairwise: u64,
    pub bound: i128,
}

/// Default cap on the family size (the pairwise term is quadratic).
pub const UNION_FAMILY_CAP: usize = 64;

pub fn union_lower_bound(
    family: &[ZAffine],
    lo: &FieldElem,
    hi: &FieldElem,
    cap: usize,
) -> Result<UnionBound> {
    if family.len() > cap {
        return Err(Error::ResourceCap { cap });
    }
    let mut union: BTreeSet<FieldElem> = BTreeSet::new();
    let mut singles: u64 = 0;
    for space in family {
        for e in space.elements_in_interval(lo, hi)? {
            union.insert(e);
        }
        singles += space.count_in_interval(&Real::Exact(lo.clone()), &Real::Exact(hi.clone()));
    }
    let mut pairwise: u64 = 0;
    let (lo_r, hi_r) = (Real::Exact(lo.clone()), Real::Exact(hi.clone()));
    for i in 0..family.len() {
        for j in (i + 1)..family.len() {
            pairwise += match intersect(&family[i], &family[j])? {
                Intersection::Empty => 0,
                Intersection::Point(v) => {
                    u64::from(cross_cmp_le(lo, &v).unwrap_or(false) && cross_cmp_le(&v, hi).unwrap_or(false))
                }
                Intersection::Affine(s) => s.count_in_interval(&lo_r, &hi_r),
            };
        }
    }
    let bound = singles as i128 - pairwise as i128;
    let exact = union.len() as u64;
    debug_assert!(exact as i128 >= bound, "Bonferroni bound exceeded the exact count");
    Ok(UnionBound { exact, singles, pairwise, bound })
}

/// Neumaier-compensated accumulator; effective precision well beyond the
/// 53-bit significand for sums of many small terms.
#[derive(Debug, Clone, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.compensation += (self.sum - t) + v;
        } else {
            self.compensation += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// The centered prime-reciprocal sum
/// S(x, a, m) = Σ_{p ≤ x, p ≡ a (m)} 1/p − log log x / φ(m).
#[derive(Debug, Clone)]
pub struct DirichletSum {
    pub x: u64,
    pub a: u64,
    pub m: u64,
    pub s: f64,
    pub reciprocal_sum: f64,
    pub loglog_term: f64,
    pub primes_counted: u64,
    pub phi_m: u64,
}

pub fn dirichlet_s(x: u64, a: u64, m: u64, sieve: &PrimeSieve) -> Result<DirichletSum> {
    if m < 1 {
        return Err(Error::Precondition("modulus must be ≥ 1".into()));
    }
    if BigInt::from(a).gcd(&BigInt::from(m)) != BigInt::one() {
        return Err(Error::Precondition(format!("gcd({a}, {m}) must be 1")));
    }
    if x < 3 {
        return Err(Error::Precondition("x must be ≥ 3".into()));
    }
    if sieve.limit() < x {
        return Err(Error::Precondition(format!(
            "sieve limit {} is below x = {x}",
            sieve.limit()
        )));
    }
    let residue = a % m;
    let mut acc = CompensatedSum::default();
    let mut counted = 0u64;
    for p in sieve.primes().take_while(|&p| p <= x) {
        if p % m == residue {
            acc.add(1.0 / p as f64);
            counted += 1;
        }
    }
    let phi_m = crate::primes::totient_u64(m);
    let loglog = (x as f64).ln().ln();
    let loglog_term = loglog / phi_m as f64;
    Ok(DirichletSum {
        x,
        a,
        m,
        s: acc.value() - loglog_term,
        reciprocal_sum: acc.value(),
        loglog_term,
        primes_counted: counted,
        phi_m,
    })
}

/// Exact totient together with the classical lower bound
/// n / (e^γ·log log n + 3/log log n); the bound is reported for n ≥ 3
/// where log log n is positive.
#[derive(Debug, Clone)]
pub struct TotientBound {
    pub n: u64,
    pub phi: u64,
    pub bound: Option<f64>,
    pub holds: Option<bool>,
}

pub fn totient_and_bound(n: u64) -> Result<TotientBound> {
    if n < 2 {
        return Err(Error::Precondition("totient bound needs n ≥ 2".into()));
    }
    let phi = crate::primes::totient_u64(n);
    let bound = totient_bound_value(n);
    let holds = bound.map(|b| (phi as f64) > b);
    Ok(TotientBound { n, phi, bound, holds })
}

/// The bound value alone (None for n < 3).
pub fn totient_bound_value(n: u64) -> Option<f64> {
    if n < 3 {
        return None;
    }
    let ll = (n as f64).ln().ln();
    Some(n as f64 / (EULER_GAMMA.exp() * ll + 3.0 / ll))
}

/// One member of the trace family: the space
/// A_{a_n + l·c_n + d_n, β²·(l·a_n + b_n)} with its prime witness l·S_n + T_n.
#[derive(Debug, Clone)]
pub struct FamilyEntry {
    pub n: usize,
    pub l: BigInt,
    pub space: ZAffine,
    pub witness: u64,
    pub witness_prime: bool,
}

/// Per-index diagnostics of the family builder.
#[derive(Debug, Clone)]
pub struct FamilyDiagnostics {
    pub n: usize,
    pub k: BigInt,
    pub s: BigInt,
    pub t: BigInt,
    pub lcm: BigInt,
    pub selected: usize,
    /// Σ over selected l of ρ(A(n,l)) = Σ 1/(β²(l·a_n + b_n)), exact.
    pub density_sum: BigRational,
    /// Partial sum of 3β²·K_i·φ(S_i)/L_i over the built range (the paper's
    /// threshold exponent divided by its unknown absolute constant).
    pub e_over_c_partial: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct TraceFamily {
    pub beta2: u64,
    pub budget: u64,
    pub entries: Vec<FamilyEntry>,
    pub diagnostics: Vec<FamilyDiagnostics>,
}

/// Builds the family A(n, l) for n in `n_range`, selecting the l whose
/// witness l·S_n + T_n is a prime within the value budget. The budget
/// stands in for the paper-scale double-exponential thresholds, which are
/// not computable at desk scale; the threshold exponents are still
/// reported (up to the unknown absolute constant) in the diagnostics.
pub fn build_trace_family(
    a_mat: &ExactMat2,
    beta2: u64,
    n_range: RangeInclusive<usize>,
    budget: u64,
) -> Result<TraceFamily> {
    if !a_mat.is_rational() {
        return Err(Error::Precondition("family builder needs a rational matrix".into()));
    }
    let tr = a_mat.trace();
    let tr_rat = tr.as_rational().unwrap().clone();
    if tr_rat.denom() < &BigInt::from(2) {
        return Err(Error::Precondition(format!(
            "trace must be a non-integer rational, got {tr_rat}"
        )));
    }
    if tr_rat <= BigRational::from_integer(BigInt::from(2)) {
        return Err(Error::Precondition(format!("trace must exceed 2, got {tr_rat}")));
    }
    let b_entry = a_mat.b().as_rational().unwrap();
    let c_entry = a_mat.c().as_rational().unwrap();
    if b_entry.is_zero() || c_entry.is_zero() {
        return Err(Error::Precondition("b·c must be nonzero (no parabolic normal forms)".into()));
    }
    // Entries of Aⁿ satisfy the trace recurrence x_{n+1} = tr·x_n − x_{n−1}.
    let one = BigRational::one();
    let zero = BigRational::zero();
    let seq = |x0: BigRational, x1: BigRational| QrsSeq::standard(tr_rat.clone(), x0, x1);
    let a_seq = seq(one.clone(), a_mat.a().as_rational().unwrap().clone());
    let b_seq = seq(zero.clone(), b_entry.clone());
    let c_seq = seq(zero, c_entry.clone());
    let d_seq = seq(one, a_mat.d().as_rational().unwrap().clone());

    let beta2_rat = BigRational::from_integer(BigInt::from(beta2));
    let mut entries = Vec::new();
    let mut diagnostics = Vec::new();
    let mut e_partial = Some(0.0f64);
    for n in n_range {
        let a_n = a_seq.term(n);
        let b_n = b_seq.term(n);
        let c_n = c_seq.term(n);
        let d_n = d_seq.term(n);
        let decomp = decompose_affine_pair(&a_n, &b_n)?;
        let mut density_sum = BigRational::zero();
        let mut selected = 0usize;
        // l with 2 ≤ l·S + T ≤ budget.
        let (l_lo, l_hi) = witness_l_range(&decomp.s, &decomp.t, budget);
        let mut l = l_lo;
        while l <= l_hi {
            let w = &decomp.s * &l + &decomp.t;
            if w >= BigInt::from(2) && w <= BigInt::from(budget) {
                let w_u64 = w.to_u64().unwrap();
                if is_prime_u64(w_u64) {
                    let period_rat = &beta2_rat
                        * (BigRational::from_integer(l.clone()) * &a_n + &b_n);
                    debug_assert!(period_rat.is_positive());
                    let offset_rat =
                        &a_n + BigRational::from_integer(l.clone()) * &c_n + &d_n;
                    density_sum += period_rat.recip();
                    entries.push(FamilyEntry {
                        n,
                        l: l.clone(),
                        space: ZAffine::exact(
                            FieldElem::from_rational(offset_rat),
                            FieldElem::from_rational(period_rat),
                        ),
                        witness: w_u64,
                        witness_prime: true,
                    });
                    selected += 1;
                }
            }
            l += 1;
        }
        // Threshold exponent contribution 3β²·K_n·φ(S_n)/L_n, when S_n is
        // small enough to factor.
        e_partial = match (e_partial, decomp.s.abs().to_u64()) {
            (Some(acc), Some(s_u64)) if s_u64 >= 1 => {
                let phi = crate::primes::totient_u64(s_u64) as f64;
                let k = decomp.k.to_f64().unwrap_or(f64::NAN);
                let lden = decomp.lcm.to_f64().unwrap_or(f64::NAN);
                Some(acc + 3.0 * beta2 as f64 * k * phi / lden)
            }
            _ => None,
        };
        diagnostics.push(FamilyDiagnostics {
            n,
            k: decomp.k,
            s: decomp.s,
            t: decomp.t,
            lcm: decomp.lcm,
            selected,
            density_sum,
            e_over_c_partial: e_partial,
        });
    }
    Ok(TraceFamily { beta2, budget, entries, diagnostics })
}

/// Integer range of l for which l·S + T can land in [2, budget].
fn witness_l_range(s: &BigInt, t: &BigInt, budget: u64) -> (BigInt, BigInt) {
    let lo_num = BigInt::from(2) - t;
    let hi_num = BigInt::from(budget) - t;
    let (a, b) = if s.is_positive() {
        (div_ceil_big(&lo_num, s), div_floor_big(&hi_num, s))
    } else {
        (div_ceil_big(&hi_num, s), div_floor_big(&lo_num, s))
    };
    (a, b)
}

fn div_floor_big(a: &BigInt, b: &BigInt) -> BigInt {
    a.div_floor(b)
}

fn div_ceil_big(a: &BigInt, b: &BigInt) -> BigInt {
    -(-a).div_floor(b)
}
