use contextuality::measures::{analyze, criterion_bound, inconsistency, s1};
use contextuality::polytope::{contains_all, facets_eb, membership, HalfspaceSet};
use contextuality::sampling::frechet_point;
use contextuality::sign::odd_sign_vectors;
use contextuality::{CyclicSystem, ExpectationVectors};
use proptest::prelude::*;

/// Valid systems: marginals strictly inside (0, 1), products anywhere in
/// their Fréchet intervals.
fn system() -> impl Strategy<Value = CyclicSystem> {
    (2usize..=6).prop_flat_map(|n| {
        (
            prop::collection::vec((0.01f64..0.99, 0.01f64..0.99), n),
            prop::collection::vec(0.0f64..=1.0, n),
        )
            .prop_map(|(m, u)| {
                let marginals: Vec<[f64; 2]> = m.into_iter().map(|(a, b)| [a, b]).collect();
                let products = marginals.iter().zip(&u).map(|(&[a, b], &u)| frechet_point(a, b, u)).collect();
                CyclicSystem::new(marginals, products)
            })
    })
}

fn brute_s1(x: &[f64]) -> f64 {
    odd_sign_vectors(x.len()).map(|l| l.dot(x)).fold(f64::NEG_INFINITY, f64::max)
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn s1_closed_form_matches_enumeration(x in prop::collection::vec(-1.0f64..=1.0, 1..=8)) {
        prop_assert!(close(s1(&x).unwrap(), brute_s1(&x)));
    }

    #[test]
    fn halfspace_membership_matches_s1(x in prop::collection::vec(-1.0f64..=1.0, 2..=8), slack in 0.0f64..=2.0) {
        let n = x.len() as f64;
        let delta = n - slack;
        prop_assert_eq!(HalfspaceSet::new(x.len(), delta).contains(&x), s1(&x).unwrap() <= delta);
    }

    #[test]
    fn relabeling_round_trips(sys in system()) {
        let back = CyclicSystem::from_expectations(&sys.to_expectations());
        for (a, b) in sys.marginals.iter().flatten().zip(back.marginals.iter().flatten()) {
            prop_assert!(close(*a, *b));
        }
        for (a, b) in sys.bunch_products.iter().zip(&back.bunch_products) {
            prop_assert!(close(*a, *b));
        }
    }

    #[test]
    fn variants_share_s1_and_inconsistency(sys in system(), flips in prop::collection::vec(any::<bool>(), 6)) {
        let e = sys.to_expectations();
        let v = e.variant(&flips[..e.rank()]);
        prop_assert!(close(s1(&e.e_b).unwrap(), s1(&v.e_b).unwrap()));
        prop_assert!(close(s1(&e.e_b).unwrap(), brute_s1(&v.e_b)));
        for i in 0..e.rank() {
            let (a, b) = e.connection(i);
            let (c, d) = v.connection(i);
            prop_assert!(close((a - b).abs(), (c - d).abs()));
        }
        prop_assert!(close(criterion_bound(&e), criterion_bound(&v)));
        let back = CyclicSystem::from_expectations(&v).validate().unwrap();
        let (r, rv) = (analyze(&sys.validate().unwrap()), analyze(&back));
        prop_assert_eq!(r.contextual, rv.contextual);
        prop_assert!(close(r.margin, rv.margin));
        prop_assert!(close(r.m_value, rv.m_value));
    }

    #[test]
    fn canonical_form(sys in system()) {
        let e = sys.to_expectations();
        let c = e.canonicalize().expectations;
        let n = c.rank();
        let last = c.e_b[n - 1].abs();
        for i in 0..n - 1 {
            prop_assert!(c.e_b[i] >= 0.0);
            prop_assert!(last <= c.e_b[i] + 1e-15);
        }
        let canonical_s1: f64 = c.e_b[..n - 1].iter().sum::<f64>() - c.e_b[n - 1];
        prop_assert!((canonical_s1 - s1(&e.e_b).unwrap()).abs() <= 1e-12);
        prop_assert!(close(inconsistency(&c), inconsistency(&e)));
    }

    #[test]
    fn facet_list_agrees_with_membership(sys in system()) {
        let e: ExpectationVectors = sys.to_expectations();
        let facets = facets_eb(&e).unwrap();
        prop_assert_eq!(facets.len(), 2 * e.rank() + (1 << (e.rank() - 1)));
        // away from the Bell facets both tests use the same box tolerance
        let margin = s1(&e.e_b).unwrap() - criterion_bound(&e);
        if margin.abs() > 1e-9 {
            prop_assert_eq!(contains_all(&facets, &e.e_b, 1e-9), membership(&e).in_eb);
        }
    }
}
