//! Acceptance suite: one test per criterion, each printing a PASS line.
//! Run with `cargo test -p sl2trace-core --test acceptance -- --nocapture`.

use std::sync::OnceLock;
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sl2trace_core::arithmeticity::{
    class_product, normalize_cusped, squarefree_class, structure_check, takeuchi_report, Verdict,
};
use sl2trace_core::field::{FieldElem, FieldKind};
use sl2trace_core::fricke::{
    cheeger_delta_pipeline, estimate_delta, orbit_ball, plant_tail_fixture, solve_tail,
    trace_cosh_bound, FrickeCoords, Mat2f, OrbitCount, OrbitOptions, SolveOptions,
};
use sl2trace_core::mat::ExactMat2;
use sl2trace_core::matgroup::{
    dn_lower_bound, enumerate_ball, growth_classify, phi_fiber, sl2z_spec, Ball, BallOptions,
    GroupSpec, GrowthClass, TraceSet,
};
use sl2trace_core::primes::{totient_sieve, PrimeSieve};
use sl2trace_core::qrs::{verify_gcd_bounded, QrsSeq};
use sl2trace_core::zaffine::{
    dirichlet_s, gcd_lcm_z, intersect, totient_bound_value, union_lower_bound, Intersection, Real,
    ZAffine, UNION_FAMILY_CAP,
};

fn rat(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

fn fe(p: i64, q: i64) -> FieldElem {
    FieldElem::ratio(p, q)
}

fn fi(n: i64) -> FieldElem {
    FieldElem::from_integer(n)
}

/// The L = 14 SL(2,Z) ball, shared between criteria 1 and 2.
fn sl2z_ball_14() -> &'static (Ball, f64) {
    static BALL: OnceLock<(Ball, f64)> = OnceLock::new();
    BALL.get_or_init(|| {
        let start = Instant::now();
        let ball = enumerate_ball(&sl2z_spec(), 14, BallOptions::default()).unwrap();
        (ball, start.elapsed().as_secs_f64())
    })
}

#[test]
fn acceptance_01_sl2z_linear_growth() {
    let (ball, elapsed) = sl2z_ball_14();
    assert!(*elapsed <= 60.0, "enumeration took {elapsed:.1}s, budget 60s");
    // Oracle: the witness family [[m,−1],[1,0]] = T^m·S has word length
    // m + 1, so every m ≤ 13 must be inside the L = 14 ball.
    for m in 0..=13i64 {
        let witness = ExactMat2::new(fi(m), fi(-1), fi(1), fi(0)).unwrap();
        assert!(ball.contains(&witness), "witness with trace {m} missing");
    }
    let ts = TraceSet::from_ball(ball);
    for n in 1..=20u64 {
        assert_eq!(ts.count_within(n), 2 * n + 1, "f({n}) must be 2n+1");
    }
    println!(
        "ACCEPTANCE 01 PASS — SL(2,Z) L=14: {} elements in {:.1}s, f(n) = 2n+1 for n ≤ 20",
        ball.len(),
        elapsed
    );
}

#[test]
fn acceptance_02_growth_trichotomy() {
    // Parabolic-only: traces {±2}, f ≡ 2 → constant.
    let spec = GroupSpec::new(
        FieldKind::Rational,
        vec![ExactMat2::from_integers(1, 1, 0, 1)],
        None,
    )
    .unwrap();
    let ball = enumerate_ball(&spec, 12, BallOptions::default()).unwrap();
    let ts = TraceSet::from_ball(&ball);
    let samples: Vec<(u64, u64)> = (2..=9).map(|i| (1 << i, ts.count_within(1 << i))).collect();
    let fit = growth_classify(&samples).unwrap();
    assert_eq!(fit.class, GrowthClass::Constant);

    // diag(2, 1/2)-cyclic: logarithmic.
    let diag = ExactMat2::new(fi(2), fi(0), fi(0), fe(1, 2)).unwrap();
    let spec = GroupSpec::new(FieldKind::Rational, vec![diag], None).unwrap();
    let ball = enumerate_ball(&spec, 22, BallOptions::default()).unwrap();
    let ts = TraceSet::from_ball(&ball);
    // Valid range: |trace| ≤ 2^22; sample well inside it.
    let samples: Vec<(u64, u64)> =
        (2..=20).map(|i| (1u64 << i, ts.count_within(1u64 << i))).collect();
    let fit = growth_classify(&samples).unwrap();
    assert_eq!(fit.class, GrowthClass::Logarithmic);

    // SL(2,Z): linear on the verified range.
    let (ball, _) = sl2z_ball_14();
    let ts = TraceSet::from_ball(ball);
    let samples: Vec<(u64, u64)> =
        [2u64, 3, 4, 6, 8, 11, 14, 17, 20].iter().map(|&n| (n, ts.count_within(n))).collect();
    let fit = growth_classify(&samples).unwrap();
    assert_eq!(fit.class, GrowthClass::Linear);
    println!("ACCEPTANCE 02 PASS — trichotomy: constant / logarithmic / linear fixtures classified");
}

#[test]
fn acceptance_03_qrs_boundedness_plateau() {
    let start = Instant::now();
    let cases = [
        (rat(3, 2), rat(1, 1), rat(1, 1)),
        (rat(3, 2), rat(0, 1), rat(1, 1)),
        (rat(5, 2), rat(2, 1), rat(5, 2)),
        (rat(5, 2), rat(1, 1), rat(3, 1)),
    ];
    for (a, f0, f1) in cases {
        let label = format!("a={a}, F0={f0}, F1={f1}");
        let seq = QrsSeq::standard(a, f0, f1);
        let rep = seq.verify_boundedness(120).unwrap();
        assert!(rep.plateau, "no plateau for {label}");
        assert!(rep.bound.is_positive());
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed <= 10.0, "took {elapsed:.2}s, budget 10s");
    println!("ACCEPTANCE 03 PASS — reduced-form ratio windows plateau at horizon 120 ({elapsed:.2}s)");
}

#[test]
fn acceptance_04_qrs_gcd_plateau() {
    let mut rng = ChaCha8Rng::seed_from_u64(40);
    let mut checked = 0;
    while checked < 10 {
        let a = if rng.gen_bool(0.5) { rat(3, 2) } else { rat(5, 2) };
        let seeds: Vec<BigRational> =
            (0..4).map(|_| rat(rng.gen_range(-6..=6), rng.gen_range(1..=4))).collect();
        let det = &seeds[0] * &seeds[3] - &seeds[1] * &seeds[2];
        if det == rat(0, 1) {
            continue;
        }
        let f = QrsSeq::standard(a.clone(), seeds[0].clone(), seeds[1].clone());
        let g = QrsSeq::standard(a, seeds[2].clone(), seeds[3].clone());
        let rep = verify_gcd_bounded(&f, &g, 120).unwrap();
        assert!(rep.plateau, "gcd plateau failed: max {} at n={}", rep.max_gcd, rep.argmax);
        checked += 1;
    }
    println!("ACCEPTANCE 04 PASS — gcd(f_n, g_n) plateaus by half-horizon on 10 seeded pairs");
}

#[test]
fn acceptance_05_zaffine_exactness() {
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    let lo = fi(-40);
    let hi = fi(40);
    for case in 0..1000 {
        let mk = |rng: &mut ChaCha8Rng| {
            ZAffine::exact(
                fe(rng.gen_range(-24..=24), rng.gen_range(1..=6)),
                fe(rng.gen_range(1..=24), rng.gen_range(1..=6)),
            )
        };
        let a = mk(&mut rng);
        let b = mk(&mut rng);
        let ea: std::collections::BTreeSet<FieldElem> =
            a.elements_in_interval(&lo, &hi).unwrap().into_iter().collect();
        let eb: std::collections::BTreeSet<FieldElem> =
            b.elements_in_interval(&lo, &hi).unwrap().into_iter().collect();
        let brute: std::collections::BTreeSet<FieldElem> =
            ea.intersection(&eb).cloned().collect();
        let computed: std::collections::BTreeSet<FieldElem> = match intersect(&a, &b).unwrap() {
            Intersection::Empty => Default::default(),
            Intersection::Point(v) => {
                if v >= lo && v <= hi {
                    [v].into_iter().collect()
                } else {
                    Default::default()
                }
            }
            Intersection::Affine(s) => {
                s.elements_in_interval(&lo, &hi).unwrap().into_iter().collect()
            }
        };
        assert_eq!(computed, brute, "extensional mismatch in case {case}");
        // Interval count tracks length × density within 1.
        let count = a.count_in_interval(&Real::Exact(lo.clone()), &Real::Exact(hi.clone()));
        let density = match a.density() {
            Real::Exact(d) => d.as_rational().unwrap().clone(),
            _ => unreachable!(),
        };
        let expected = rat(80, 1) * density;
        let diff = (BigRational::from_integer(BigInt::from(count)) - expected).abs();
        assert!(diff <= BigRational::one());
    }
    // gcd·lcm identity on 1000 pairs.
    for _ in 0..1000 {
        let x = fe(rng.gen_range(1..=60), rng.gen_range(1..=12));
        let y = fe(rng.gen_range(1..=60), rng.gen_range(1..=12));
        let g = gcd_lcm_z(&Real::Exact(x.clone()), &Real::Exact(y.clone())).unwrap();
        assert_eq!(&g.gcd * &g.lcm.unwrap(), &x * &y);
    }
    println!("ACCEPTANCE 05 PASS — 1000 extensional intersections, 1000 gcd·lcm identities, counts within 1");
}

#[test]
fn acceptance_06_bonferroni() {
    let mut rng = ChaCha8Rng::seed_from_u64(60);
    let lo = fi(0);
    let hi = fi(60);
    for case in 0..200 {
        let n_spaces = rng.gen_range(2..=12);
        let family: Vec<ZAffine> = (0..n_spaces)
            .map(|_| {
                ZAffine::exact(
                    fe(rng.gen_range(-12..=12), rng.gen_range(1..=4)),
                    fe(rng.gen_range(1..=16), rng.gen_range(1..=4)),
                )
            })
            .collect();
        let u = union_lower_bound(&family, &lo, &hi, UNION_FAMILY_CAP).unwrap();
        assert!(
            u.exact as i128 >= u.bound,
            "Bonferroni violated in case {case}: exact {} < bound {}",
            u.exact,
            u.bound
        );
    }
    // Disjoint fixture achieves equality.
    let fam = [ZAffine::exact(fi(0), fi(2)), ZAffine::exact(fi(1), fi(2))];
    let u = union_lower_bound(&fam, &fi(0), &fi(9), UNION_FAMILY_CAP).unwrap();
    assert_eq!(u.exact as i128, u.bound);
    println!("ACCEPTANCE 06 PASS — exact union ≥ two-term bound on 200 families, equality on disjoint fixture");
}

#[test]
fn acceptance_07_effective_dirichlet() {
    let start = Instant::now();
    // One sieve serves every (x, a, m) query.
    let sieve = PrimeSieve::new(1_000_000);
    let mut max_abs: f64 = 0.0;
    for m in [3u64, 4, 5, 7] {
        for a in 1..m {
            if num_integer::Integer::gcd(&a, &m) != 1 {
                continue;
            }
            for x in [1_000u64, 10_000, 100_000, 1_000_000] {
                let d = dirichlet_s(x, a, m, &sieve).unwrap();
                max_abs = max_abs.max(d.s.abs());
                assert!(
                    d.s.abs() <= 3.0,
                    "|S({x},{a},{m})| = {} exceeds 3",
                    d.s.abs()
                );
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed <= 120.0, "took {elapsed:.1}s, budget 120s");
    println!(
        "ACCEPTANCE 07 PASS — max |S(x,a,m)| = {max_abs:.4} ≤ 3 over m ∈ {{3,4,5,7}} ({elapsed:.1}s)"
    );
}

#[test]
fn acceptance_08_totient_bound() {
    let phi = totient_sieve(1_000_000);
    for n in 3..=1_000_000u64 {
        let bound = totient_bound_value(n).unwrap();
        assert!(
            (phi[n as usize] as f64) > bound,
            "totient bound failed at n = {n}: φ = {} vs {bound}",
            phi[n as usize]
        );
    }
    println!("ACCEPTANCE 08 PASS — φ(n) > n/(e^γ log log n + 3/log log n) for all 3 ≤ n ≤ 10⁶");
}

#[test]
fn acceptance_09_phi_fiber_bound() {
    let fixtures = [
        (rat(1, 1), rat(1, 1)),
        (rat(2, 1), rat(1, 1)),
        (rat(1, 2), rat(3, 1)),
        (rat(3, 1), rat(1, 2)),
        (rat(-1, 1), rat(1, 1)),
    ];
    for (s, t) in fixtures {
        let rep = phi_fiber(&s, &t, 200);
        assert_eq!(rep.max_fiber, 2, "max fiber for (s,t)=({s},{t})");
        assert!(!rep.two_fibers.is_empty(), "expected collisions for ({s},{t})");
        assert!(rep.all_partners_ok, "partner formula failed for ({s},{t})");
    }
    println!("ACCEPTANCE 09 PASS — Φ is at most 2-to-1 on [−200,200]² with exact partner formulas (5 fixtures)");
}

#[test]
fn acceptance_10_dn_bound() {
    for n in 1..=10_000u64 {
        let d = dn_lower_bound(n);
        assert!(d.holds, "divisor-sum bound failed at N = {n}");
    }
    println!("ACCEPTANCE 10 PASS — Σ⌊N/j⌋ ≥ N ln N − N for all N ≤ 10⁴");
}

#[test]
fn acceptance_11_arithmeticity_diagnostics() {
    // SL(2,Z) ball sample: condition (1) passes.
    let ball = enumerate_ball(&sl2z_spec(), 8, BallOptions::default()).unwrap();
    let traces: Vec<FieldElem> = ball.elements().iter().map(|m| m.trace()).collect();
    let rep = takeuchi_report(&traces, &FieldKind::Rational).unwrap();
    assert_eq!(rep.condition1, Verdict::Pass);
    // Non-integer rational trace fails.
    let rep = takeuchi_report(&[fe(3, 2)], &FieldKind::Rational).unwrap();
    assert_eq!(rep.condition1, Verdict::Fail);

    // Square-free multiplicativity on 100 random quadratic-scalar pairs.
    let mut rng = ChaCha8Rng::seed_from_u64(110);
    let squarefree_ds = [1u64, 2, 3, 5, 6, 7, 10, 11, 13, 14, 15, 17, 19, 21, 22, 23, 26, 29, 30];
    let random_rational_mat = |rng: &mut ChaCha8Rng| loop {
        let a = rng.gen_range(-5i64..=5);
        let b = rng.gen_range(-5i64..=5);
        let c = rng.gen_range(-5i64..=5);
        if a != 0 && (a * c) % 1 == 0 {
            // Build det-1 via [[a, b], [c, (1+bc)/a]] when divisible.
            let num = 1 + b * c;
            if num % a == 0 {
                return ExactMat2::from_integers(a, b, c, num / a);
            }
        }
    };
    let scaled = |d: u64, m: &ExactMat2| -> ExactMat2 {
        if d == 1 {
            return m.clone();
        }
        let root = FieldElem::sqrt_d(d);
        let inv_root = root.inv();
        // diag(√d, 1/√d)·M keeps det = 1 and every entry in Q·√d.
        ExactMat2::new(
            &root * m.a(),
            &root * m.b(),
            &inv_root * m.c(),
            &inv_root * m.d(),
        )
        .unwrap()
    };
    for _ in 0..100 {
        let d1 = squarefree_ds[rng.gen_range(0..squarefree_ds.len())];
        let d2 = squarefree_ds[rng.gen_range(0..squarefree_ds.len())];
        let m1 = scaled(d1, &random_rational_mat(&mut rng));
        let m2 = scaled(d2, &random_rational_mat(&mut rng));
        let c1 = squarefree_class(&m1).unwrap();
        let c2 = squarefree_class(&m2).unwrap();
        assert_eq!(c1.d, BigInt::from(d1));
        assert_eq!(c2.d, BigInt::from(d2));
        let composed = c1.compose(&c2).unwrap();
        assert_eq!(composed.d, class_product(&c1.d, &c2.d).unwrap());
        // Inverses have the same class.
        assert_eq!(squarefree_class(&m1.inverse()).unwrap().d, c1.d);
    }
    println!("ACCEPTANCE 11 PASS — Takeuchi verdicts and square-free multiplicativity (100 pairs)");
}

#[test]
fn acceptance_12_structure_lemma() {
    // Canonical-form spec over Q with non-integer entries but integer ball
    // traces: conjugate of an integer group by diag(√3, 1/√3).
    let t = ExactMat2::from_integers(1, 1, 0, 1);
    let u3 = ExactMat2::from_integers(1, 0, 3, 1);
    let m = ExactMat2::new(fi(2), fe(1, 3), fi(3), fi(1)).unwrap();
    let spec = GroupSpec::new(FieldKind::Rational, vec![t.clone(), u3.clone(), m], None).unwrap();
    let ball = enumerate_ball(&spec, 10, BallOptions { max_elements: 4_000_000 }).unwrap();
    for el in ball.elements() {
        assert!(el.trace().is_integer(), "trace {} not an integer", el.trace());
    }
    let norm = normalize_cusped(&spec, &t, &u3).unwrap();
    assert_eq!(norm.n, BigInt::from(3));
    let rep = structure_check(ball.elements(), &norm.n).unwrap();
    assert!(rep.pass, "structure violation: {:?}", rep.first_violation);
    println!(
        "ACCEPTANCE 12 PASS — N = 3 structure check on {} ball elements with integer traces",
        ball.len()
    );
}

#[test]
fn acceptance_13_fricke_tail_recovery() {
    let mut solved = 0;
    let mut seed = 0u64;
    while solved < 20 {
        let (fc, planted) = plant_tail_fixture(3, seed).expect("fixture construction");
        seed += 1;
        let tail = solve_tail(&fc, SolveOptions::default())
            .unwrap_or_else(|e| panic!("solve failed on fixture {}: {e}", seed - 1));
        assert!(tail.residual <= 1e-9, "residual {} on fixture {}", tail.residual, seed - 1);
        assert!(tail.nu > 1.0 && tail.a + tail.d > 0.0);
        assert!(
            (tail.a - planted.a).abs() < 1e-6 && (tail.nu - planted.nu).abs() < 1e-6,
            "planted tail not recovered on fixture {}",
            seed - 1
        );
        let fc_solved = FrickeCoords { tail: Some(tail), ..fc };
        for g in sl2trace_core::fricke::embed_generators(&fc_solved).unwrap() {
            assert!((g.det() - 1.0).abs() <= 1e-12, "det drift {}", g.det());
        }
        solved += 1;
    }
    println!("ACCEPTANCE 13 PASS — 20 genus-3 planted tails recovered with residual ≤ 1e-9");
}

#[test]
fn acceptance_14_critical_exponent() {
    // Planted-exponent synthetic recovery within ±0.01.
    let radii: Vec<f64> = (8..=24).map(|i| i as f64).collect();
    let counts: Vec<u64> = radii.iter().map(|r| (0.75 * r).exp().round() as u64).collect();
    let est = estimate_delta(&OrbitCount { radii, counts }).unwrap();
    assert!((est.delta - 0.75).abs() <= 0.01, "synthetic δ̂ = {}", est.delta);

    // Cyclic fixture: polynomial counts, δ̂ ≤ 0.05.
    let data = orbit_ball(&[Mat2f::diag(2.0)], 60.0, OrbitOptions::default()).unwrap();
    let radii: Vec<f64> = (1..=12).map(|i| i as f64 * 5.0).collect();
    let est = estimate_delta(&data.counts(&radii)).unwrap();
    assert!(est.delta <= 0.05, "cyclic δ̂ = {}", est.delta);

    // Schottky pair: trace bound on ≥ 10⁴ enumerated elements.
    let g1 = Mat2f::diag(4.0);
    let j = Mat2f::new(1.0, 1.0, 1.0, 2.0);
    let g2 = j.mul(&g1).mul(&j.inverse());
    let mut r_max = 14.0;
    let data = loop {
        let data = orbit_ball(&[g1, g2], r_max, OrbitOptions::default()).unwrap();
        if data.members.len() >= 10_000 {
            break data;
        }
        r_max += 2.0;
    };
    assert!(data.collisions.is_empty(), "dedup ambiguity in a free fixture");
    for m in data.members.iter().take(10_000) {
        let (tr, bound) = trace_cosh_bound(&m.mat);
        assert!(tr <= bound + 1e-9, "trace bound violated: {tr} vs {bound}");
    }
    // Growth rate strictly inside (0, 1).
    let radii: Vec<f64> = (4..=16).map(|i| i as f64 * r_max / 16.0).collect();
    let counts = data.counts(&radii);
    assert!(counts.counts.windows(2).all(|w| w[0] <= w[1]));
    let est = estimate_delta(&counts).unwrap();
    assert!(est.delta > 0.0 && est.delta < 1.0, "Schottky δ̂ = {}", est.delta);
    println!(
        "ACCEPTANCE 14 PASS — synthetic δ̂ within 0.01, cyclic δ̂ ≤ 0.05, trace bound on {} elements (δ̂ = {:.3})",
        data.members.len().min(10_000),
        est.delta
    );
}

#[test]
fn acceptance_15_cheeger_pipeline() {
    let pi = std::f64::consts::PI;
    let mut grid_points = 0;
    for g in [3u32, 4, 5, 8] {
        for kappa in [0.5f64, 1.0, 2.0, 10.0] {
            for eps in [0.3f64, 0.9, 1.5] {
                for frac in [0.25f64, 0.6, 1.0] {
                    let ell_max = (pi / (2.0 * kappa)).min(eps * pi / (3.0 * kappa));
                    let ell = frac * ell_max;
                    let b = cheeger_delta_pipeline(ell, g, kappa, eps).unwrap();
                    assert!(b.precondition_met);
                    assert!(
                        b.delta_lower >= b.floor - 1e-12,
                        "δ_lower {} < floor {} at (g={g}, κ={kappa}, ε={eps}, frac={frac})",
                        b.delta_lower,
                        b.floor
                    );
                    grid_points += 1;
                }
            }
        }
    }
    // Exact equality at the λ₁ = 1/8 boundary.
    let b = cheeger_delta_pipeline(pi / 2.0, 3, 1.0, 1.5).unwrap();
    assert_eq!(b.lambda1_upper, 0.125);
    assert_eq!(b.delta_lower, 0.75);
    assert_eq!(b.floor, 0.75);
    println!(
        "ACCEPTANCE 15 PASS — δ_lower ≥ max{{3/4, 1−2ε/(3(4g−8))}} on {grid_points} grid points, exact 3/4 at λ₁ = 1/8"
    );
}
