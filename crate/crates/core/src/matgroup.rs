//! Group-ball enumeration, trace sets, growth statistics, and the
//! Θ/Φ trace-family maps.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::ops::RangeInclusive;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::Error;
use crate::field::{FieldElem, FieldKind};
use crate::mat::ExactMat2;
use crate::zaffine::Real;
use crate::Result;

/// A finitely generated subgroup of SL(2, K): the coefficient field, the
/// generator list, and optional cusp-normalization metadata N = β².
#[derive(Debug, Clone)]
pub struct GroupSpec {
    field: FieldKind,
    generators: Vec<ExactMat2>,
    cusp_n: Option<BigInt>,
}

impl GroupSpec {
    pub fn new(field: FieldKind, generators: Vec<ExactMat2>, cusp_n: Option<BigInt>) -> Result<Self> {
        for (i, g) in generators.iter().enumerate() {
            for e in g.entries() {
                if !e.lies_in(&field) {
                    return Err(Error::FieldMismatch(format!(
                        "generator {i} entry {e} is outside {field}"
                    )));
                }
            }
        }
        if let Some(n) = &cusp_n {
            if !n.is_positive() {
                return Err(Error::Precondition("cusp parameter N must be positive".into()));
            }
            let shift = ExactMat2::from_integers(1, 1, 0, 1);
            let lower = ExactMat2::new(
                FieldElem::one(),
                FieldElem::zero(),
                FieldElem::from_integer(n.clone()),
                FieldElem::one(),
            )?;
            let has = |m: &ExactMat2| {
                generators.iter().any(|g| g.normalize_projective() == m.normalize_projective())
            };
            if !has(&shift) || !has(&lower) {
                return Err(Error::Precondition(
                    "a cusp-normalized spec must list both canonical parabolics".into(),
                ));
            }
        }
        Ok(GroupSpec { field, generators, cusp_n })
    }

    pub fn field(&self) -> &FieldKind {
        &self.field
    }

    pub fn generators(&self) -> &[ExactMat2] {
        &self.generators
    }

    pub fn cusp_n(&self) -> Option<&BigInt> {
        self.cusp_n.as_ref()
    }
}

/// Budget for distinct projective elements during enumeration.
#[derive(Debug, Clone, Copy)]
pub struct BallOptions {
    pub max_elements: usize,
}

impl Default for BallOptions {
    fn default() -> Self {
        BallOptions { max_elements: 1_000_000 }
    }
}

/// The set of distinct projective elements expressible as words of length
/// ≤ L in the generators and their inverses.
#[derive(Debug, Clone)]
pub struct Ball {
    elements: Vec<ExactMat2>,
    index: HashSet<ExactMat2>,
    word_length: usize,
    /// Cumulative element count after each level 0..=L.
    level_sizes: Vec<usize>,
}

impl Ball {
    pub fn elements(&self) -> &[ExactMat2] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn word_length(&self) -> usize {
        self.word_length
    }

    pub fn level_sizes(&self) -> &[usize] {
        &self.level_sizes
    }

    /// Membership up to projective sign.
    pub fn contains(&self, m: &ExactMat2) -> bool {
        self.index.contains(&m.normalize_projective())
    }
}

/// Breadth-first enumeration of the word ball with exact projective
/// deduplication.
pub fn enumerate_ball(spec: &GroupSpec, word_length: usize, opts: BallOptions) -> Result<Ball> {
    let mut steps: Vec<ExactMat2> = Vec::new();
    for g in spec.generators() {
        let gn = g.normalize_projective();
        let gi = g.inverse().normalize_projective();
        if !steps.contains(&gn) {
            steps.push(gn);
        }
        if !steps.contains(&gi) {
            steps.push(gi);
        }
    }
    let identity = ExactMat2::identity();
    let mut index: HashSet<ExactMat2> = HashSet::new();
    let mut elements = Vec::new();
    index.insert(identity.clone());
    elements.push(identity.clone());
    let mut frontier = vec![identity];
    let mut level_sizes = vec![1usize];
    for _ in 1..=word_length {
        let mut next = Vec::new();
        for m in &frontier {
            for g in &steps {
                let w = (m * g).normalize_projective();
                if index.insert(w.clone()) {
                    if index.len() > opts.max_elements {
                        return Err(Error::ResourceCap { cap: opts.max_elements });
                    }
                    elements.push(w.clone());
                    next.push(w);
                }
            }
        }
        level_sizes.push(elements.len());
        if next.is_empty() {
            // Group exhausted below the requested length.
            while level_sizes.len() <= word_length {
                level_sizes.push(elements.len());
            }
            break;
        }
        frontier = next;
    }
    Ok(Ball { elements, index, word_length, level_sizes })
}

/// How trace values are stored and deduplicated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TraceMode {
    Exact,
    Float { tolerance: f64 },
}

/// Default quantization tolerance for float-mode deduplication.
pub const FLOAT_DEDUP_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone)]
enum TraceValues {
    Exact(Vec<FieldElem>),
    Float(Vec<f64>),
}

/// The trace set of an enumerated ball: sorted distinct values of the
/// SL₂ preimages (so the set is closed under sign flip), multiplicities,
/// and enumeration metadata.
#[derive(Debug, Clone)]
pub struct TraceSet {
    values: TraceValues,
    multiplicities: Vec<u64>,
    word_length: Option<usize>,
    element_count: usize,
    mode: TraceMode,
}

/// Gap and clustering statistics of a trace set.
#[derive(Debug, Clone)]
pub struct TraceStats {
    /// Minimum distance between distinct values; exact in exact mode.
    pub gap: Real,
    /// max over integers n of #(values ∩ [n, n+1]).
    pub max_bc: u64,
}

impl TraceSet {
    /// Collects the ± trace pairs of every ball element. The multiplicity
    /// of a value counts the projective elements whose preimage trace pair
    /// contains it.
    pub fn from_ball(ball: &Ball) -> TraceSet {
        let mut map: BTreeMap<FieldElem, u64> = BTreeMap::new();
        for m in ball.elements() {
            let t = m.trace();
            let neg = -&t;
            *map.entry(t.clone()).or_insert(0) += 1;
            if neg != t {
                *map.entry(neg).or_insert(0) += 1;
            }
        }
        let (values, multiplicities) = map.into_iter().unzip();
        TraceSet {
            values: TraceValues::Exact(values),
            multiplicities,
            word_length: Some(ball.word_length()),
            element_count: ball.len(),
            mode: TraceMode::Exact,
        }
    }

    /// Builds a float-mode trace set from raw trace values (already
    /// including whichever signs the caller wants). Values within the
    /// tolerance collapse to their first representative.
    pub fn from_float_values(traces: &[f64], tolerance: f64) -> TraceSet {
        let mut map: BTreeMap<i64, (f64, u64)> = BTreeMap::new();
        for &t in traces {
            let key = (t / tolerance).round() as i64;
            map.entry(key).and_modify(|e| e.1 += 1).or_insert((t, 1));
        }
        let mut pairs: Vec<(f64, u64)> = map.into_values().collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (values, multiplicities) = pairs.into_iter().unzip();
        TraceSet {
            values: TraceValues::Float(values),
            multiplicities,
            word_length: None,
            element_count: traces.len(),
            mode: TraceMode::Float { tolerance },
        }
    }

    pub fn len(&self) -> usize {
        self.multiplicities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.multiplicities.is_empty()
    }

    pub fn mode(&self) -> TraceMode {
        self.mode
    }

    pub fn word_length(&self) -> Option<usize> {
        self.word_length
    }

    pub fn element_count(&self) -> usize {
        self.element_count
    }

    pub fn multiplicities(&self) -> &[u64] {
        &self.multiplicities
    }

    pub fn exact_values(&self) -> Option<&[FieldElem]> {
        match &self.values {
            TraceValues::Exact(v) => Some(v),
            TraceValues::Float(_) => None,
        }
    }

    pub fn float_values(&self) -> Vec<f64> {
        match &self.values {
            TraceValues::Exact(v) => v.iter().map(|e| e.to_f64()).collect(),
            TraceValues::Float(v) => v.clone(),
        }
    }

    /// f(n): the number of distinct values t with |t| ≤ n.
    pub fn count_within(&self, n: u64) -> u64 {
        match &self.values {
            TraceValues::Exact(vals) => {
                let lo = FieldElem::from_integer(-(n as i64));
                let hi = FieldElem::from_integer(n as i64);
                vals.iter().filter(|v| **v >= lo && **v <= hi).count() as u64
            }
            TraceValues::Float(vals) => {
                let n = n as f64;
                vals.iter().filter(|v| v.abs() <= n).count() as u64
            }
        }
    }

    /// The sub-trace-set of values inside [lo, hi].
    pub fn restricted(&self, lo: i64, hi: i64) -> TraceSet {
        let keep: Vec<usize> = match &self.values {
            TraceValues::Exact(vals) => {
                let lo = FieldElem::from_integer(lo);
                let hi = FieldElem::from_integer(hi);
                vals.iter()
                    .enumerate()
                    .filter(|(_, v)| **v >= lo && **v <= hi)
                    .map(|(i, _)| i)
                    .collect()
            }
            TraceValues::Float(vals) => vals
                .iter()
                .enumerate()
                .filter(|(_, v)| **v >= lo as f64 && **v <= hi as f64)
                .map(|(i, _)| i)
                .collect(),
        };
        let multiplicities = keep.iter().map(|&i| self.multiplicities[i]).collect();
        let values = match &self.values {
            TraceValues::Exact(vals) => {
                TraceValues::Exact(keep.iter().map(|&i| vals[i].clone()).collect())
            }
            TraceValues::Float(vals) => TraceValues::Float(keep.iter().map(|&i| vals[i]).collect()),
        };
        TraceSet {
            values,
            multiplicities,
            word_length: self.word_length,
            element_count: self.element_count,
            mode: self.mode,
        }
    }

    /// Gap (minimum pairwise distance) and max unit-interval occupancy.
    pub fn statistics(&self) -> Result<TraceStats> {
        if self.len() < 2 {
            return Err(Error::SingletonTraceSet);
        }
        match &self.values {
            TraceValues::Exact(vals) => {
                let mut gap = &vals[1] - &vals[0];
                for w in vals.windows(2).skip(1) {
                    let d = &w[1] - &w[0];
                    if d < gap {
                        gap = d;
                    }
                }
                // Candidate unit intervals come from the floors of the values.
                let mut candidates: BTreeSet<BigInt> = BTreeSet::new();
                for v in vals {
                    let f = v.floor();
                    candidates.insert(&f - 1u32);
                    candidates.insert(f);
                }
                let mut max_bc = 0u64;
                for n in candidates {
                    let lo = FieldElem::from_integer(n.clone());
                    let hi = FieldElem::from_integer(n + 1u32);
                    let c = vals.iter().filter(|v| **v >= lo && **v <= hi).count() as u64;
                    max_bc = max_bc.max(c);
                }
                Ok(TraceStats { gap: Real::Exact(gap), max_bc })
            }
            TraceValues::Float(vals) => {
                let mut gap = f64::INFINITY;
                for w in vals.windows(2) {
                    gap = gap.min(w[1] - w[0]);
                }
                let mut candidates: BTreeSet<i64> = BTreeSet::new();
                for v in vals {
                    let f = v.floor() as i64;
                    candidates.insert(f - 1);
                    candidates.insert(f);
                }
                let mut max_bc = 0u64;
                for n in candidates {
                    let (lo, hi) = (n as f64, (n + 1) as f64);
                    let c = vals.iter().filter(|v| **v >= lo && **v <= hi).count() as u64;
                    max_bc = max_bc.max(c);
                }
                Ok(TraceStats { gap: Real::Approx(gap), max_bc })
            }
        }
    }

    /// (n, f(n)) rows for n = 1..=n_max.
    pub fn counting_rows(&self, n_max: u64) -> Vec<(u64, u64)> {
        (1..=n_max).map(|n| (n, self.count_within(n))).collect()
    }
}

/// Growth class of a sampled counting function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrowthClass {
    Constant,
    Logarithmic,
    Linear,
    Superlinear,
}

impl std::fmt::Display for GrowthClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            GrowthClass::Constant => "constant",
            GrowthClass::Logarithmic => "logarithmic",
            GrowthClass::Linear => "linear",
            GrowthClass::Superlinear => "superlinear",
        };
        write!(f, "{s}")
    }
}

/// Classification result with per-model residuals (RMS in log space).
#[derive(Debug, Clone)]
pub struct GrowthFit {
    pub class: GrowthClass,
    pub residual: f64,
    pub residual_constant: f64,
    pub residual_logarithmic: f64,
    pub residual_linear: f64,
    pub power_exponent: f64,
    pub residual_power: f64,
}

/// Power-law exponent above which the two-parameter fit may claim the
/// superlinear fallback.
const SUPERLINEAR_EXPONENT: f64 = 1.15;

/// Least-squares classification of samples (n, f(n)) against the shapes
/// c, c·log n, c·n, with a power-law fallback n^α for α clearly above 1.
/// Ties break toward the slower class.
pub fn growth_classify(samples: &[(u64, u64)]) -> Result<GrowthFit> {
    if samples.len() < 4 {
        return Err(Error::InsufficientSamples { needed: 4, got: samples.len() });
    }
    for &(n, f) in samples {
        if n < 2 || f < 1 {
            return Err(Error::Precondition(format!(
                "samples need n ≥ 2 and f ≥ 1, got ({n}, {f})"
            )));
        }
    }
    let ys: Vec<f64> = samples.iter().map(|&(_, f)| (f as f64).ln()).collect();
    let offset_rms = |xs: &[f64]| -> f64 {
        let mean =
            xs.iter().zip(&ys).map(|(x, y)| y - x).sum::<f64>() / xs.len() as f64;
        let ss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - x - mean).powi(2)).sum();
        (ss / xs.len() as f64).sqrt()
    };
    let zeros = vec![0.0; samples.len()];
    let log_xs: Vec<f64> = samples.iter().map(|&(n, _)| (n as f64).ln().ln()).collect();
    let lin_xs: Vec<f64> = samples.iter().map(|&(n, _)| (n as f64).ln()).collect();
    let r_const = offset_rms(&zeros);
    let r_log = offset_rms(&log_xs);
    let r_lin = offset_rms(&lin_xs);
    // Two-parameter power fit in log-log space.
    let m = samples.len() as f64;
    let mean_x = lin_xs.iter().sum::<f64>() / m;
    let mean_y = ys.iter().sum::<f64>() / m;
    let sxx: f64 = lin_xs.iter().map(|x| (x - mean_x).powi(2)).sum();
    let sxy: f64 = lin_xs.iter().zip(&ys).map(|(x, y)| (x - mean_x) * (y - mean_y)).sum();
    let alpha = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let r_pow = {
        let ss: f64 = lin_xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| (y - (mean_y + alpha * (x - mean_x))).powi(2))
            .sum();
        (ss / m).sqrt()
    };
    let min3 = r_const.min(r_log).min(r_lin);
    let (class, residual) = if alpha >= SUPERLINEAR_EXPONENT && r_pow < min3 {
        (GrowthClass::Superlinear, r_pow)
    } else {
        // Slow-to-fast order implements the tie-break.
        let eps = 1e-12 + 1e-9 * min3;
        if r_const <= min3 + eps {
            (GrowthClass::Constant, r_const)
        } else if r_log <= min3 + eps {
            (GrowthClass::Logarithmic, r_log)
        } else {
            (GrowthClass::Linear, r_lin)
        }
    };
    Ok(GrowthFit {
        class,
        residual,
        residual_constant: r_const,
        residual_logarithmic: r_log,
        residual_linear: r_lin,
        power_exponent: alpha,
        residual_power: r_pow,
    })
}

/// A symbolic lattice point of the map Θ(k,l) = kl·β²a + k·β²b + l·c.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaPoint {
    pub kl: i64,
    pub k: i64,
    pub l: i64,
    pub value: Option<FieldElem>,
}

#[derive(Debug, Clone)]
pub struct ThetaFamily {
    pub points: Vec<ThetaPoint>,
    /// Number of distinct lattice triples (kl, k, l).
    pub lattice_size: usize,
    /// Number of distinct evaluated values, when evaluation was requested.
    pub value_dedup_size: Option<usize>,
}

pub fn theta_family(
    a: &FieldElem,
    b: &FieldElem,
    c: &FieldElem,
    beta2: &FieldElem,
    k_range: RangeInclusive<i64>,
    l_range: RangeInclusive<i64>,
    evaluate: bool,
) -> ThetaFamily {
    let b2a = beta2 * a;
    let b2b = beta2 * b;
    let mut points = Vec::new();
    let mut values: BTreeSet<FieldElem> = BTreeSet::new();
    for k in k_range.clone() {
        for l in l_range.clone() {
            let value = if evaluate {
                let v = &(&(&FieldElem::from_integer(k * l) * &b2a)
                    + &(&FieldElem::from_integer(k) * &b2b))
                    + &(&FieldElem::from_integer(l) * c);
                values.insert(v.clone());
                Some(v)
            } else {
                None
            };
            points.push(ThetaPoint { kl: k * l, k, l, value });
        }
    }
    let lattice: BTreeSet<(i64, i64, i64)> =
        points.iter().map(|p| (p.kl, p.k, p.l)).collect();
    ThetaFamily {
        lattice_size: lattice.len(),
        value_dedup_size: evaluate.then_some(values.len()),
        points,
    }
}

/// A two-element fiber of Φ with its partner-formula verdict.
#[derive(Debug, Clone)]
pub struct TwoFiber {
    pub first: (i64, i64),
    pub second: (i64, i64),
    pub image: (BigRational, BigRational),
    pub partner_ok: bool,
}

#[derive(Debug, Clone)]
pub struct PhiFiberReport {
    pub max_fiber: usize,
    pub lattice_points: usize,
    pub two_fibers: Vec<TwoFiber>,
    pub all_partners_ok: bool,
}

/// Brute-forces Φ(k,l) = (s·kl + k, t·kl + l) over [−r, r]², groups by
/// image, and verifies the closed-form partner equations on every
/// 2-element fiber when s·t ≠ 0.
pub fn phi_fiber(s: &BigRational, t: &BigRational, r: i64) -> PhiFiberReport {
    let mut fibers: HashMap<(BigRational, BigRational), Vec<(i64, i64)>> = HashMap::new();
    for k in -r..=r {
        for l in -r..=r {
            let kl = BigRational::from_integer(BigInt::from(k * l));
            let image = (
                &kl * s + BigRational::from_integer(BigInt::from(k)),
                &kl * t + BigRational::from_integer(BigInt::from(l)),
            );
            fibers.entry(image).or_default().push((k, l));
        }
    }
    let st_nonzero = !s.is_zero() && !t.is_zero();
    let mut max_fiber = 0usize;
    let mut two_fibers = Vec::new();
    let mut all_ok = true;
    for (image, members) in fibers {
        max_fiber = max_fiber.max(members.len());
        if members.len() == 2 && st_nonzero {
            let ok = partner_matches(s, t, members[0], members[1])
                || partner_matches(s, t, members[1], members[0]);
            all_ok &= ok;
            two_fibers.push(TwoFiber {
                first: members[0],
                second: members[1],
                image,
                partner_ok: ok,
            });
        }
    }
    two_fibers.sort_by_key(|f| (f.first, f.second));
    PhiFiberReport {
        max_fiber,
        lattice_points: ((2 * r + 1) * (2 * r + 1)) as usize,
        two_fibers,
        all_partners_ok: all_ok,
    }
}

/// k′ = −(s·l + 1)/t and l′ = (t/s)(k′ − k) + l, checked exactly.
fn partner_matches(s: &BigRational, t: &BigRational, (k, l): (i64, i64), (kp, lp): (i64, i64)) -> bool {
    let big = |n: i64| BigRational::from_integer(BigInt::from(n));
    let k_expected = -(s * big(l) + BigRational::from_integer(BigInt::one())) / t;
    if k_expected != big(kp) {
        return false;
    }
    let l_expected = (t / s) * (big(kp) - big(k)) + big(l);
    l_expected == big(lp)
}

/// The divisor-sum count |D_N| = Σ_{j=1}^N ⌊N/j⌋ with its N·ln N − N bound.
#[derive(Debug, Clone, Copy)]
pub struct DnBound {
    pub n: u64,
    pub count: u64,
    pub bound: f64,
    pub holds: bool,
}

pub fn dn_lower_bound(n: u64) -> DnBound {
    assert!(n >= 1);
    let count: u64 = (1..=n).map(|j| n / j).sum();
    let bound = (n as f64) * (n as f64).ln() - n as f64;
    DnBound { n, count, bound, holds: count as f64 >= bound }
}

/// The standard SL(2,Z) generator pair S, T.
pub fn sl2z_spec() -> GroupSpec {
    GroupSpec::new(
        FieldKind::Rational,
        vec![ExactMat2::from_integers(0, -1, 1, 0), ExactMat2::from_integers(1, 1, 0, 1)],
        None,
    )
    .expect("S, T are unimodular")
}
