use dgslab_core::lattice::{coords, is_lattice_member, rat, Basis, Rational, RationalVector, ShiftedLattice};
use dgslab_core::norms::{cvp_k, enumerate_k_ball, Norm};
use dgslab_core::oracles::{distance_sq, enumerate_ball, exact_count, solve_cvp, solve_svp};
use dgslab_core::rng::seeded;
use dgslab_core::sparsify::{inner_mod, sample_shifted_sparsifier, sparsify_int};
use dgslab_core::verify::{closeness_check, collect};
use dgslab_core::oracles::exact_dgs;
use num_bigint::BigInt;
use num_traits::Signed;
use proptest::prelude::*;

fn basis_strategy(n: usize) -> impl Strategy<Value = Basis> {
    prop::collection::vec(-4i64..=4, n * n).prop_filter_map("singular", move |e| {
        let cols: Vec<Vec<i64>> = e.chunks(n).map(|c| c.to_vec()).collect();
        let refs: Vec<&[i64]> = cols.iter().map(|c| c.as_slice()).collect();
        Basis::from_int_columns(&refs).ok()
    })
}

fn shift_strategy(n: usize) -> impl Strategy<Value = RationalVector> {
    prop::collection::vec((-7i64..=7, 1i64..=4), n).prop_map(|v| RationalVector::from_pairs(&v))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn combinations_are_members(b in basis_strategy(3), c in prop::collection::vec(-5i64..=5, 3)) {
        let x = b.combine_ints(&c).unwrap();
        prop_assert!(is_lattice_member(&b, &x).unwrap());
        let back = coords(&b, &x).unwrap();
        let expect: Vec<Rational> = c.iter().map(|&k| Rational::from_integer(BigInt::from(k))).collect();
        prop_assert_eq!(back.coords(), expect.as_slice());
    }

    #[test]
    fn sparsified_lattice_has_index_p(b in basis_strategy(3), z in prop::collection::vec(0u64..7, 3)) {
        let sub = sparsify_int(b.int_basis(), 7, &z).unwrap();
        let sub_basis = sub.to_basis().unwrap();
        prop_assert!(b.membership_test().unwrap().contains_lattice(&sub));
        let index = sub_basis.determinant() / b.determinant();
        let expect = if z.iter().all(|&x| x == 0) { 1 } else { 7 };
        prop_assert_eq!(index.abs(), Rational::from_integer(BigInt::from(expect)));
        for j in 0..3 {
            let c = coords(&b, &sub_basis.columns()[j]).unwrap();
            let ints: Vec<i128> = c.coords().iter().map(|x| x.to_integer().try_into().unwrap()).collect();
            prop_assert_eq!(inner_mod(&z, &ints, 7), 0);
        }
    }

    #[test]
    fn cvp_is_no_farther_than_any_ball_point(b in basis_strategy(2), t in shift_strategy(2)) {
        let lat = ShiftedLattice::new(b, t).unwrap();
        let d = distance_sq(&lat).unwrap();
        let y = solve_cvp(&lat).unwrap();
        prop_assert!(is_lattice_member(&lat.basis, &y).unwrap());
        // nothing strictly inside the ball of radius d, and the minimizer sits on its boundary
        let inner = enumerate_ball(&lat, &d).unwrap();
        prop_assert!(inner.points.iter().all(|p| p.norm_sq() == d));
        prop_assert!(!inner.points.is_empty());
    }

    #[test]
    fn svp_matches_ball_minimum(b in basis_strategy(3)) {
        let s = solve_svp(&b).unwrap();
        let r = b.columns().iter().map(|c| c.norm_sq()).min().unwrap();
        let lat = ShiftedLattice::centered(b);
        let min = enumerate_ball(&lat, &r).unwrap().points.into_iter().filter(|p| !p.is_zero()).map(|p| p.norm_sq()).min().unwrap();
        prop_assert_eq!(s.vector.norm_sq(), min);
    }

    #[test]
    fn centered_counts_are_odd(b in basis_strategy(2), num in 1i64..40) {
        // x ↦ -x pairs every nonzero point of a centered ball
        let c = exact_count(&ShiftedLattice::centered(b), &rat(num, 4)).unwrap();
        prop_assert_eq!(c % 2, 1);
    }

    #[test]
    fn norms_are_homogeneous_and_symmetric(
        v in prop::collection::vec((-9i64..=9, 1i64..=5), 3),
        (an, ad) in (-6i64..=6, 1i64..=4),
        q in prop::sample::select(vec![1.0, 1.5, 2.0, 3.0, 4.0, f64::INFINITY]),
    ) {
        let norm = Norm::lq(q).unwrap();
        let x = RationalVector::from_pairs(&v);
        let a = rat(an, ad);
        let lhs = norm.eval(&x.scale(&a));
        let rhs = (an as f64 / ad as f64).abs() * norm.eval(&x);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs));
        prop_assert_eq!(norm.eval(&x.scale_int(-1)), norm.eval(&x));
    }

    #[test]
    fn cvp_k_l2_agrees_with_cvp(b in basis_strategy(2), t in shift_strategy(2)) {
        let lat = ShiftedLattice::new(b, t).unwrap();
        let y = cvp_k(&lat, Norm::L2).unwrap();
        prop_assert_eq!(y.sub(&lat.shift).unwrap().norm_sq(), distance_sq(&lat).unwrap());
    }

    #[test]
    fn cvp_k_minimizes_over_the_enclosing_ball(
        b in basis_strategy(2), t in shift_strategy(2),
        norm in prop::sample::select(vec![Norm::L1, Norm::LInf, Norm::Lq(3.0)]),
    ) {
        let lat = ShiftedLattice::new(b, t).unwrap();
        let y = cvp_k(&lat, norm).unwrap();
        let d = y.sub(&lat.shift).unwrap();
        let g = norm.gauge_exact(&d).unwrap();
        // every point of L - t in the ℓ₂ ball through the ℓ₂-closest point has K-gauge >= g
        let far = lat.shift.norm_sq() + Rational::from_integer(4.into());
        for p in enumerate_ball(&lat, &far).unwrap().points {
            prop_assert!(norm.gauge_exact(&p).unwrap() >= g);
        }
    }

    #[test]
    fn k_balls_nest(b in basis_strategy(2), r in 1i64..12) {
        let lat = ShiftedLattice::centered(b);
        let r_sq = rat(r, 2);
        let l1 = enumerate_k_ball(&lat, &r_sq, Norm::L1).unwrap();
        let l2 = enumerate_ball(&lat, &r_sq).unwrap().points;
        let li = enumerate_k_ball(&lat, &r_sq, Norm::LInf).unwrap();
        prop_assert!(l1.iter().all(|p| l2.binary_search(p).is_ok()));
        prop_assert!(l2.iter().all(|p| li.binary_search(p).is_ok()));
    }
}

#[test]
fn sparsifier_draws_are_reproducible() {
    let b = Basis::from_int_columns(&[&[2, 1, 0], &[0, 3, 1], &[1, 0, 5]]).unwrap();
    let a = sample_shifted_sparsifier(b.int_basis(), 101, &mut seeded(5)).unwrap();
    let c = sample_shifted_sparsifier(b.int_basis(), 101, &mut seeded(5)).unwrap();
    assert_eq!(a, c);
}

#[test]
fn verify_reports_are_deterministic() {
    let lat = ShiftedLattice::centered(Basis::identity(1));
    let d = exact_dgs(&lat, &rat(3, 2), 1e-12).unwrap();
    let run = || {
        let h = collect(|r| Ok(d.sample(r).clone()), 5000, &mut seeded(77)).unwrap();
        closeness_check(&h, &d, 1.05, 0.01).unwrap()
    };
    assert_eq!(run(), run());
}

fn dist2(a: &[i128], b: &[i128]) -> i128 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn restricted_queries_agree_with_full_ones(
        b in basis_strategy(3),
        z in prop::collection::vec(0u64..11, 3),
        t in prop::collection::vec(-30i128..=30, 3),
        bound in 0i128..200,
    ) {
        use dgslab_core::oracles::{CvpOracle, ExactOracle, SvpOracle};
        let sub = sparsify_int(b.int_basis(), 11, &z).unwrap();
        let mut o = ExactOracle::default();
        let y = o.closest(&sub, &t).unwrap();
        let expect = (dist2(&y, &t) <= bound).then_some(y);
        prop_assert_eq!(o.closest_within(&sub, &t, bound).unwrap(), expect);
        let s = o.shortest(&sub).unwrap();
        let expect = (dist2(&s, &[0, 0, 0]) <= bound).then_some(s);
        prop_assert_eq!(o.shortest_within(&sub, bound).unwrap(), expect);
    }

    #[test]
    fn restricted_k_queries_agree_inside_the_ball(
        b in basis_strategy(2),
        z in prop::collection::vec(0u64..7, 2),
        t in prop::collection::vec(-20i128..=20, 2),
        bound in 0i128..150,
        which in 0usize..3,
    ) {
        use dgslab_core::norms::NormOracle;
        use dgslab_core::oracles::CvpOracle;
        let norm = [Norm::L1, Norm::LInf, Norm::Lq(3.0)][which];
        let sub = sparsify_int(b.int_basis(), 7, &z).unwrap();
        let mut o = NormOracle::new(norm);
        let y = o.closest(&sub, &t).unwrap();
        let got = o.closest_within(&sub, &t, bound).unwrap();
        if dist2(&y, &t) <= bound {
            prop_assert_eq!(got, Some(y));
        } else if let Some(w) = got {
            prop_assert!(dist2(&w, &t) <= bound);
        }
    }
}
