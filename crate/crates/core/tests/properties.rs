//! Property-based invariants for the exact arithmetic layers.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use proptest::prelude::*;

use sl2trace_core::field::FieldElem;
use sl2trace_core::mat::ExactMat2;
use sl2trace_core::matgroup::{
    enumerate_ball, sl2z_spec, theta_family, BallOptions, TraceSet,
};
use sl2trace_core::qrs::{decompose_affine_pair, QrsSeq};
use sl2trace_core::zaffine::{
    gcd_lcm_z, intersect, rational_ratio, Intersection, Real, ZAffine,
};

fn rat(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

fn positive_rational() -> impl Strategy<Value = BigRational> {
    (1i64..=40, 1i64..=12).prop_map(|(p, q)| rat(p, q))
}

fn quadratic_elem() -> impl Strategy<Value = FieldElem> {
    (
        -20i64..=20,
        1i64..=8,
        -20i64..=20,
        1i64..=8,
        prop_oneof![Just(2u64), Just(3), Just(5), Just(7)],
    )
        .prop_map(|(up, uq, vp, vq, d)| FieldElem::quadratic(rat(up, uq), rat(vp, vq), d))
}

/// Random word in S and T: a well-distributed source of SL(2,Z) elements.
fn sl2z_word() -> impl Strategy<Value = ExactMat2> {
    proptest::collection::vec((-4i64..=4, proptest::bool::ANY), 1..6).prop_map(|letters| {
        let s = ExactMat2::from_integers(0, -1, 1, 0);
        let mut m = ExactMat2::identity();
        for (a, use_s) in letters {
            let t_pow = ExactMat2::new(
                FieldElem::one(),
                FieldElem::from_integer(a),
                FieldElem::zero(),
                FieldElem::one(),
            )
            .unwrap();
            m = &m * &t_pow;
            if use_s {
                m = &m * &s;
            }
        }
        m
    })
}

proptest! {
    #[test]
    fn det_preserved_by_products_and_inverses(x in sl2z_word(), y in sl2z_word()) {
        let p = &x * &y;
        prop_assert_eq!(p.det(), FieldElem::one());
        prop_assert_eq!(p.inverse().det(), FieldElem::one());
        prop_assert!((&p * &p.inverse()).is_identity());
    }

    #[test]
    fn normalize_projective_is_idempotent_and_sign_blind(x in sl2z_word()) {
        let n = x.normalize_projective();
        prop_assert_eq!(n.normalize_projective(), n.clone());
        prop_assert_eq!(x.negated().normalize_projective(), n);
    }

    #[test]
    fn field_floor_brackets_value(e in quadratic_elem()) {
        let f = e.floor();
        let lo = FieldElem::from_integer(f.clone());
        let hi = FieldElem::from_integer(f + 1u32);
        prop_assert!(lo <= e && e < hi);
    }

    #[test]
    fn field_conjugation_fixes_trace_and_norm(e in quadratic_elem()) {
        let c = e.conjugate();
        prop_assert!((&e + &c).is_rational());
        prop_assert_eq!((&e * &c).as_rational().cloned(), Some(e.norm()));
    }

    #[test]
    fn gcd_lcm_product_identity(x in positive_rational(), y in positive_rational()) {
        let xe = Real::from_rational(x.clone());
        let ye = Real::from_rational(y.clone());
        let g = gcd_lcm_z(&xe, &ye).unwrap();
        let lcm = g.lcm.unwrap();
        let product = &g.gcd * &lcm;
        let xy = FieldElem::from_rational(&x * &y);
        prop_assert_eq!(product, xy);
    }

    #[test]
    fn gcd_lcm_matches_integers(a in 1i64..=4000, b in 1i64..=4000) {
        use num_integer::Integer;
        let g = gcd_lcm_z(
            &Real::from_integer(a),
            &Real::from_integer(b),
        ).unwrap();
        prop_assert_eq!(g.gcd, FieldElem::from_integer(a.gcd(&b)));
        prop_assert_eq!(g.lcm.unwrap(), FieldElem::from_integer(a.lcm(&b)));
    }

    #[test]
    fn intersect_matches_brute_force(
        xp in -12i64..=12, xq in 1i64..=4, yp in 1i64..=12, yq in 1i64..=4,
        xp2 in -12i64..=12, xq2 in 1i64..=4, yp2 in 1i64..=12, yq2 in 1i64..=4,
    ) {
        let a = ZAffine::exact(
            FieldElem::from_rational(rat(xp, xq)),
            FieldElem::from_rational(rat(yp, yq)),
        );
        let b = ZAffine::exact(
            FieldElem::from_rational(rat(xp2, xq2)),
            FieldElem::from_rational(rat(yp2, yq2)),
        );
        let lo = FieldElem::from_integer(-30);
        let hi = FieldElem::from_integer(30);
        let ea: std::collections::BTreeSet<FieldElem> =
            a.elements_in_interval(&lo, &hi).unwrap().into_iter().collect();
        let eb: std::collections::BTreeSet<FieldElem> =
            b.elements_in_interval(&lo, &hi).unwrap().into_iter().collect();
        let brute: std::collections::BTreeSet<FieldElem> =
            ea.intersection(&eb).cloned().collect();
        let computed: std::collections::BTreeSet<FieldElem> =
            match intersect(&a, &b).unwrap() {
                Intersection::Empty => Default::default(),
                Intersection::Point(v) => {
                    let lo_e = FieldElem::from_integer(-30);
                    let hi_e = FieldElem::from_integer(30);
                    if v >= lo_e && v <= hi_e { [v].into_iter().collect() } else { Default::default() }
                }
                Intersection::Affine(s) => s.elements_in_interval(&lo, &hi).unwrap().into_iter().collect(),
            };
        prop_assert_eq!(computed, brute);
    }

    #[test]
    fn count_in_interval_tracks_density(
        xp in -40i64..=40, xq in 1i64..=6, yp in 1i64..=40, yq in 1i64..=6,
        lo in -50i64..=0, len in 0i64..=120,
    ) {
        let space = ZAffine::exact(
            FieldElem::from_rational(rat(xp, xq)),
            FieldElem::from_rational(rat(yp, yq)),
        );
        let hi = lo + len;
        let count = space.count_in_interval(&Real::from_integer(lo), &Real::from_integer(hi));
        let density = rat(yq, yp); // 1/(yp/yq)
        let expected = rat(hi - lo, 1) * density;
        let diff = (BigRational::from_integer(BigInt::from(count)) - expected).abs();
        prop_assert!(diff <= BigRational::one(), "count {count} vs density product");
    }

    #[test]
    fn qrs_recurrence_and_reduction(
        ap in -9i64..=9, aq in 1i64..=4,
        f0p in -9i64..=9, f0q in 1i64..=4,
        f1p in -9i64..=9, f1q in 1i64..=4,
    ) {
        prop_assume!(ap != 0);
        let seq = QrsSeq::standard(rat(ap, aq), rat(f0p, f0q), rat(f1p, f1q));
        for n in 2..25usize {
            prop_assert_eq!(seq.term(n), seq.a() * seq.term(n - 1) - seq.b() * seq.term(n - 2));
            let r = seq.reduced(n);
            prop_assert_eq!(BigRational::new(r.numer, r.denom), seq.term(n));
        }
    }

    #[test]
    fn qrs_scaled_terms_are_integers(
        ap in 1i64..=9, aq in 1i64..=4,
        f0p in -6i64..=6, f0q in 1i64..=3,
        f1p in -6i64..=6, f1q in 1i64..=3,
    ) {
        let seq = QrsSeq::standard(rat(ap, aq), rat(f0p, f0q), rat(f1p, f1q));
        // scaled_term asserts integrality internally (debug builds).
        for n in (0..=200usize).step_by(23) {
            let _ = seq.scaled_term(n).unwrap();
        }
    }

    #[test]
    fn affine_identity_at_random_l(
        ap in -9i64..=9, aq in 1i64..=4,
        bp in -9i64..=9, bq in 1i64..=4,
        ls in proptest::collection::vec(-1000i64..=1000, 20),
    ) {
        prop_assume!(ap != 0);
        let a = rat(ap, aq);
        let b = rat(bp, bq);
        let d = decompose_affine_pair(&a, &b).unwrap();
        prop_assert!(d.k.is_positive());
        prop_assert!(d.lcm.is_positive());
        prop_assert_eq!(num_integer::Integer::gcd(&d.s, &d.t), BigInt::one());
        for l in ls {
            prop_assert!(d.verify(&a, &b, l));
        }
    }

    #[test]
    fn ratio_rationality_is_decided_exactly(e in quadratic_elem(), p in 1i64..=9, q in 1i64..=9) {
        // r·e / e is rational for rational r; e / conj(e) is rational iff
        // the radical part vanishes.
        let r = FieldElem::from_rational(rat(p, q));
        let scaled = &r * &e;
        prop_assert_eq!(rational_ratio(&scaled, &e), Some(rat(p, q)));
    }

    #[test]
    fn theta_symbolic_triples_injective(k in 1i64..=10, l in 1i64..=10) {
        let one = FieldElem::one();
        let fam = theta_family(&one, &one, &one, &one, -k..=k, -l..=l, false);
        let off_axis: Vec<_> = fam.points.iter().filter(|p| p.k != 0 && p.l != 0).collect();
        let set: std::collections::BTreeSet<(i64, i64, i64)> =
            off_axis.iter().map(|p| (p.kl, p.k, p.l)).collect();
        prop_assert_eq!(set.len(), off_axis.len());
    }
}

#[test]
fn trace_counts_monotone_in_n_and_word_length() {
    let spec = sl2z_spec();
    let mut last_len = 0usize;
    for l in [2usize, 4, 6] {
        let ball = enumerate_ball(&spec, l, BallOptions::default()).unwrap();
        assert!(ball.len() >= last_len);
        last_len = ball.len();
        let ts = TraceSet::from_ball(&ball);
        let mut prev = 0;
        for n in 1..=12u64 {
            let c = ts.count_within(n);
            assert!(c >= prev, "f must be monotone in n");
            prev = c;
        }
    }
}
