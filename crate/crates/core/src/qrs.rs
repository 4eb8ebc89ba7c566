//! Quadratic recurrence sequences F_n = a·F_{n−1} − b·F_{n−2} with exact
//! rational terms, and the boundedness/GCD plateau checks built on them.
//!
//! The primary regime is b = 1 with a = p/q in lowest terms; there the
//! scaled sequence F̄_n = M·qⁿ·F_n (M the least common denominator of the
//! two seeds) is an integer sequence satisfying F̄_n = p·F̄_{n−1} − q²·F̄_{n−2}.

use std::sync::RwLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::Error;
use crate::Result;

/// A quadratic recurrence sequence QRS(a, b) with exact rational terms.
#[derive(Debug)]
pub struct QrsSeq {
    a: BigRational,
    b: BigRational,
    /// Least positive integer clearing the denominators of both seeds.
    clearing: BigInt,
    cache: RwLock<Vec<BigRational>>,
}

impl Clone for QrsSeq {
    fn clone(&self) -> Self {
        QrsSeq {
            a: self.a.clone(),
            b: self.b.clone(),
            clearing: self.clearing.clone(),
            cache: RwLock::new(self.cache.read().unwrap().clone()),
        }
    }
}

/// F_n in lowest terms: F_n = numer/denom with gcd = 1 and denom ≥ 1.
/// The zero term is represented as (0, 1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReducedTerm {
    pub n: usize,
    pub numer: BigInt,
    pub denom: BigInt,
}

/// Parameters of the closed form F_n = α·λⁿ + β·λ⁻ⁿ (b = 1, a > 2).
#[derive(Debug, Clone)]
pub struct ClosedForm {
    pub lambda: f64,
    pub alpha: f64,
    pub beta: f64,
    /// max_{n ≤ 30} |F_n − (α·λⁿ + β·λ⁻ⁿ)|, a float sanity figure.
    pub max_residual: f64,
}

/// Exact decomposition l·a + b = K·(l·S + T)/L with gcd(S, T) = 1,
/// K > 0, and L = lcm of the reduced denominators of a and b.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineDecomp {
    pub n: Option<usize>,
    pub k: BigInt,
    pub s: BigInt,
    pub t: BigInt,
    pub lcm: BigInt,
}

impl AffineDecomp {
    /// Checks the defining identity at one integer l, exactly.
    pub fn verify(&self, a: &BigRational, b: &BigRational, l: i64) -> bool {
        let lhs = BigRational::from_integer(BigInt::from(l)) * a + b;
        let inner = BigRational::from_integer(&self.s * BigInt::from(l) + &self.t);
        let rhs = BigRational::from_integer(self.k.clone()) * inner
            / BigRational::from_integer(self.lcm.clone());
        lhs == rhs
    }
}

/// Window statistics for the reduced-form ratios of one sequence.
#[derive(Debug, Clone)]
pub struct BoundednessReport {
    pub horizon: usize,
    /// min/max of f_n′/qⁿ over n ≤ horizon (zero terms skipped).
    pub denominator_window: (BigRational, BigRational),
    /// min/max of f_n/(qⁿ·F_n) over n ≤ horizon (zero terms skipped).
    pub numerator_window: (BigRational, BigRational),
    /// Same windows restricted to n ≤ horizon/2.
    pub half_denominator_window: (BigRational, BigRational),
    pub half_numerator_window: (BigRational, BigRational),
    /// True when doubling the horizon from N/2 to N widened neither window.
    pub plateau: bool,
    /// Symmetric window constant: all ratios lie in [1/B, B].
    pub bound: BigRational,
    pub skipped_zero_terms: Vec<usize>,
}

/// Result of the exact GCD plateau check for a pair of sequences.
#[derive(Debug, Clone)]
pub struct GcdReport {
    pub horizon: usize,
    pub max_gcd: BigInt,
    pub max_gcd_half: BigInt,
    pub argmax: usize,
    pub plateau: bool,
}

/// Outcome of the companion-matrix identity and determinant-divisibility
/// check for a pair of integer QRS(p, q²) columns.
#[derive(Debug, Clone)]
pub struct PowerMatrixReport {
    pub checked: usize,
    pub identity_ok: bool,
    pub divisibility_ok: bool,
    pub first_failure: Option<usize>,
}

impl QrsSeq {
    pub fn new(a: BigRational, b: BigRational, f0: BigRational, f1: BigRational) -> Self {
        let clearing = f0.denom().lcm(f1.denom());
        QrsSeq { a, b, clearing, cache: RwLock::new(vec![f0, f1]) }
    }

    /// QRS(a, 1), the primary regime.
    pub fn standard(a: BigRational, f0: BigRational, f1: BigRational) -> Self {
        QrsSeq::new(a, BigRational::one(), f0, f1)
    }

    pub fn a(&self) -> &BigRational {
        &self.a
    }

    pub fn b(&self) -> &BigRational {
        &self.b
    }

    /// Numerator p of a = p/q in lowest terms.
    pub fn p(&self) -> BigInt {
        self.a.numer().clone()
    }

    /// Denominator q ≥ 1 of a = p/q in lowest terms.
    pub fn q(&self) -> BigInt {
        self.a.denom().clone()
    }

    /// The clearing constant M.
    pub fn clearing_constant(&self) -> &BigInt {
        &self.clearing
    }

    pub fn seeds(&self) -> (BigRational, BigRational) {
        let cache = self.cache.read().unwrap();
        (cache[0].clone(), cache[1].clone())
    }

    pub fn is_identically_zero(&self) -> bool {
        let (f0, f1) = self.seeds();
        f0.is_zero() && f1.is_zero()
    }

    /// F_n, memoized. Safe under concurrent callers.
    pub fn term(&self, n: usize) -> BigRational {
        {
            let cache = self.cache.read().unwrap();
            if n < cache.len() {
                return cache[n].clone();
            }
        }
        let mut cache = self.cache.write().unwrap();
        while cache.len() <= n {
            let m = cache.len();
            let next = &self.a * &cache[m - 1] - &self.b * &cache[m - 2];
            cache.push(next);
        }
        cache[n].clone()
    }

    /// F_n in lowest terms; the zero term maps to (0, 1).
    pub fn reduced(&self, n: usize) -> ReducedTerm {
        let t = self.term(n);
        ReducedTerm { n, numer: t.numer().clone(), denom: t.denom().clone() }
    }

    /// λ, α, β of the closed form; requires b = 1 and a > 2.
    pub fn closed_form_params(&self) -> Result<ClosedForm> {
        if !self.b.is_one() {
            return Err(Error::Precondition("closed form implemented for b = 1".into()));
        }
        let a = self.a.to_f64().unwrap();
        if self.a <= BigRational::from_integer(BigInt::from(2)) {
            return Err(Error::ClosedFormDomain { got: self.a.to_string() });
        }
        let lambda = (a + (a * a - 4.0).sqrt()) / 2.0;
        let (f0, f1) = self.seeds();
        let f0 = f0.to_f64().unwrap();
        let f1 = f1.to_f64().unwrap();
        let alpha = (f1 - f0 / lambda) / (lambda - 1.0 / lambda);
        let beta = f0 - alpha;
        let mut max_residual = 0.0f64;
        for n in 0..=30usize {
            let exact = self.term(n).to_f64().unwrap();
            let model = alpha * lambda.powi(n as i32) + beta * lambda.powi(-(n as i32));
            let scale = 1.0f64.max(exact.abs());
            max_residual = max_residual.max((exact - model).abs() / scale);
        }
        Ok(ClosedForm { lambda, alpha, beta, max_residual })
    }

    /// The integer F̄_n = M·qⁿ·F_n (requires b = 1).
    pub fn scaled_term(&self, n: usize) -> Result<BigInt> {
        if !self.b.is_one() {
            return Err(Error::Precondition("scaled sequence requires b = 1".into()));
        }
        let qn = BigRational::from_integer(self.q().pow(n as u32));
        let v = BigRational::from_integer(self.clearing.clone()) * qn * self.term(n);
        debug_assert!(v.is_integer(), "M·qⁿ·F_n must be an integer");
        Ok(v.to_integer())
    }

    /// ν_r(F̄_n): the exact r-adic valuation of the scaled term. Requires a
    /// prime r dividing q; the valuation of zero is undefined.
    pub fn scaled_valuation(&self, r: u64, n: usize) -> Result<u64> {
        if !crate::primes::is_prime_u64(r) {
            return Err(Error::Precondition(format!("r = {r} is not prime")));
        }
        let q = self.q();
        if !(&q % BigInt::from(r)).is_zero() {
            return Err(Error::Precondition(format!("r = {r} does not divide q = {q}")));
        }
        let v = self.scaled_term(n)?;
        if v.is_zero() {
            return Err(Error::UndefinedValuation { index: n });
        }
        let rb = BigInt::from(r);
        let mut m = v.abs();
        let mut val = 0u64;
        while (&m % &rb).is_zero() {
            m /= &rb;
            val += 1;
        }
        Ok(val)
    }

    /// Tracks f_n′/qⁿ and f_n/(qⁿ·F_n) up to a horizon and checks that the
    /// empirical window stops widening at half the horizon.
    pub fn verify_boundedness(&self, horizon: usize) -> Result<BoundednessReport> {
        if horizon < 10 {
            return Err(Error::HorizonTooSmall { needed: 10, got: horizon });
        }
        if !self.b.is_one() {
            return Err(Error::Precondition("boundedness check requires b = 1".into()));
        }
        if self.is_identically_zero() {
            return Err(Error::Precondition("sequence is identically zero".into()));
        }
        let q = self.q();
        let half = horizon / 2;
        let mut skipped = Vec::new();
        let mut den_win: Option<(BigRational, BigRational)> = None;
        let mut num_win: Option<(BigRational, BigRational)> = None;
        let mut den_half: Option<(BigRational, BigRational)> = None;
        let mut num_half: Option<(BigRational, BigRational)> = None;

        fn widen(win: &mut Option<(BigRational, BigRational)>, v: &BigRational) {
            match win {
                None => *win = Some((v.clone(), v.clone())),
                Some((lo, hi)) => {
                    if v < lo {
                        *lo = v.clone();
                    }
                    if v > hi {
                        *hi = v.clone();
                    }
                }
            }
        }

        for n in 0..=horizon {
            let f = self.term(n);
            if f.is_zero() {
                skipped.push(n);
                continue;
            }
            let qn = BigRational::from_integer(q.pow(n as u32));
            let red = self.reduced(n);
            let rd = BigRational::from_integer(red.denom.clone()) / qn.clone();
            let rn = BigRational::from_integer(red.numer.clone()) / (qn * f);
            widen(&mut den_win, &rd);
            widen(&mut num_win, &rn);
            if n <= half {
                widen(&mut den_half, &rd);
                widen(&mut num_half, &rn);
            }
        }
        let den = den_win.ok_or_else(|| Error::Precondition("all terms vanished".into()))?;
        let num = num_win.ok_or_else(|| Error::Precondition("all terms vanished".into()))?;
        let den_h = den_half.ok_or_else(|| Error::Precondition("first half vanished".into()))?;
        let num_h = num_half.ok_or_else(|| Error::Precondition("first half vanished".into()))?;
        let plateau = den == den_h && num == num_h;
        let inv_min = den.0.recip();
        let bound = if inv_min > den.1 { inv_min } else { den.1.clone() };
        Ok(BoundednessReport {
            horizon,
            denominator_window: den,
            numerator_window: num,
            half_denominator_window: den_h,
            half_numerator_window: num_h,
            plateau,
            bound,
            skipped_zero_terms: skipped,
        })
    }
}

/// Exact maximum of gcd(f_n, g_n) over n ≤ horizon for two QRS(a, 1) with
/// the same a, plus the plateau comparison against half the horizon.
pub fn verify_gcd_bounded(f: &QrsSeq, g: &QrsSeq, horizon: usize) -> Result<GcdReport> {
    if horizon < 10 {
        return Err(Error::HorizonTooSmall { needed: 10, got: horizon });
    }
    if f.a() != g.a() || !f.b().is_one() || !g.b().is_one() {
        return Err(Error::Precondition("sequences must share (a, b = 1)".into()));
    }
    let (f0, f1) = f.seeds();
    let (g0, g1) = g.seeds();
    if (&f0 * &g1 - &f1 * &g0).is_zero() {
        return Err(Error::Precondition("initial determinant F0·G1 − F1·G0 vanishes".into()));
    }
    let half = horizon / 2;
    let mut max_gcd = BigInt::zero();
    let mut max_half = BigInt::zero();
    let mut argmax = 0usize;
    for n in 0..=horizon {
        let fn_ = f.reduced(n).numer;
        let gn = g.reduced(n).numer;
        let d = fn_.gcd(&gn);
        if d > max_gcd {
            max_gcd = d.clone();
            argmax = n;
        }
        if n <= half && d > max_half {
            max_half = d;
        }
    }
    Ok(GcdReport { horizon, plateau: max_gcd == max_half, max_gcd, max_gcd_half: max_half, argmax })
}

/// Verifies the companion-matrix identity A_n = [[0,1],[p,−q²]]·A_{n−1}
/// exactly, and that gcd(F̄_{n−1}, F̄_n) divides pⁿ·(F̄₀H₁ − F̄₁H₀), for two
/// integer QRS(p, q²) columns seeded by `f` and `h`.
pub fn power_matrix_check(
    p: i64,
    q: i64,
    f: (i64, i64),
    h: (i64, i64),
    n_max: usize,
) -> Result<PowerMatrixReport> {
    let det0 = BigInt::from(f.0) * BigInt::from(h.1) - BigInt::from(f.1) * BigInt::from(h.0);
    if det0.is_zero() {
        return Err(Error::Precondition("initial determinant F̄₀H₁ − F̄₁H₀ vanishes".into()));
    }
    let pb = BigInt::from(p);
    let q2 = BigInt::from(q) * BigInt::from(q);
    let step = |x1: &BigInt, x0: &BigInt| &pb * x1 - &q2 * x0;
    let mut fs = vec![BigInt::from(f.0), BigInt::from(f.1)];
    let mut hs = vec![BigInt::from(h.0), BigInt::from(h.1)];
    for n in 2..=(n_max + 1) {
        let fx = step(&fs[n - 1], &fs[n - 2]);
        fs.push(fx);
        let hx = step(&hs[n - 1], &hs[n - 2]);
        hs.push(hx);
    }
    let mut identity_ok = true;
    let mut divisibility_ok = true;
    let mut first_failure = None;
    // Companion powers: B^(n−1)·A₁ must reproduce A_n entrywise. The
    // companion of x_n = p·x_{n−1} − q²·x_{n−2} is [[0, 1], [−q², p]].
    let mut b_pow = [BigInt::one(), BigInt::zero(), BigInt::zero(), BigInt::one()];
    let bmat = [BigInt::zero(), BigInt::one(), -&q2, pb.clone()];
    for n in 1..=n_max {
        // A_n = [[F̄_{n−1}, H_{n−1}], [F̄_n, H_n]]
        let lhs = [fs[n - 1].clone(), hs[n - 1].clone(), fs[n].clone(), hs[n].clone()];
        let a1 = [fs[0].clone(), hs[0].clone(), fs[1].clone(), hs[1].clone()];
        let rhs = mat_mul_int(&b_pow, &a1);
        if lhs != rhs {
            identity_ok = false;
            first_failure.get_or_insert(n);
        }
        let g = fs[n - 1].gcd(&fs[n]);
        let modulus = pb.pow(n as u32) * &det0;
        if !g.is_zero() && !(&modulus % &g).is_zero() {
            divisibility_ok = false;
            first_failure.get_or_insert(n);
        }
        b_pow = mat_mul_int(&bmat, &b_pow);
    }
    Ok(PowerMatrixReport { checked: n_max, identity_ok, divisibility_ok, first_failure })
}

fn mat_mul_int(x: &[BigInt; 4], y: &[BigInt; 4]) -> [BigInt; 4] {
    [
        &x[0] * &y[0] + &x[1] * &y[2],
        &x[0] * &y[1] + &x[1] * &y[3],
        &x[2] * &y[0] + &x[3] * &y[2],
        &x[2] * &y[1] + &x[3] * &y[3],
    ]
}

/// Decomposes a pair of rationals (a, b) as l·a + b = K·(l·S + T)/L.
/// Fails when a = 0 (the decomposition would need S = 0).
pub fn decompose_affine_pair(a: &BigRational, b: &BigRational) -> Result<AffineDecomp> {
    if a.is_zero() {
        return Err(Error::DegenerateAffine);
    }
    let lcm = a.denom().lcm(b.denom());
    let num_a = a.numer() * (&lcm / a.denom());
    let num_b = b.numer() * (&lcm / b.denom());
    let k = num_a.gcd(&num_b);
    debug_assert!(k.is_positive());
    let s = &num_a / &k;
    let t = &num_b / &k;
    let decomp = AffineDecomp { n: None, k, s, t, lcm };
    for l in -3..=3 {
        debug_assert!(decomp.verify(a, b, l), "affine identity failed at l = {l}");
    }
    Ok(decomp)
}

/// Decomposes l·a_n + b_n for the n-th terms of two sequences.
pub fn affine_decompose(a_seq: &QrsSeq, b_seq: &QrsSeq, n: usize) -> Result<AffineDecomp> {
    let a = a_seq.term(n);
    let b = b_seq.term(n);
    if a.is_zero() && b.is_zero() {
        return Err(Error::Precondition("a_n and b_n are both zero".into()));
    }
    let mut d = decompose_affine_pair(&a, &b)?;
    d.n = Some(n);
    Ok(d)
}
