//! Property tests for the polynomial substrate: exact ring axioms, the
//! grading decomposition, and homomorphism laws for substitution and
//! evaluation.

use proptest::prelude::*;
use std::collections::BTreeMap;
use takiff::degree::DegVec;
use takiff::poly::{Monomial, Polynomial, VarId};
use takiff::rational::{rat, Rational};

const ELL: usize = 2;

fn var_pool() -> Vec<VarId> {
    let mut pool = Vec::new();
    for basis in 0..3 {
        for deg in [[0, 0], [1, 0], [0, 1]] {
            pool.push(VarId::primal(basis, DegVec(deg.to_vec())));
        }
    }
    pool
}

fn arb_rational() -> impl Strategy<Value = Rational> {
    (-6i64..=6, 1i64..=4).prop_map(|(n, d)| rat(n, d))
}

fn arb_monomial() -> impl Strategy<Value = Monomial> {
    proptest::collection::vec((0usize..9, 1u32..=2), 0..3).prop_map(|powers| {
        let pool = var_pool();
        Monomial::from_powers(powers.into_iter().map(|(i, e)| (pool[i].clone(), e)))
    })
}

fn arb_poly() -> impl Strategy<Value = Polynomial> {
    proptest::collection::vec((arb_monomial(), arb_rational()), 0..4)
        .prop_map(Polynomial::from_terms)
}

fn arb_point() -> impl Strategy<Value = BTreeMap<VarId, Rational>> {
    proptest::collection::vec(arb_rational(), 9)
        .prop_map(|vals| var_pool().into_iter().zip(vals).collect())
}

proptest! {
    #[test]
    fn addition_commutes_and_associates(a in arb_poly(), b in arb_poly(), c in arb_poly()) {
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
    }

    #[test]
    fn multiplication_associates_and_distributes(a in arb_poly(), b in arb_poly(), c in arb_poly()) {
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&a * &b, &b * &a);
    }

    #[test]
    fn additive_inverse(a in arb_poly()) {
        prop_assert!((&a - &a).is_zero());
        prop_assert_eq!(&a + &(-&a), Polynomial::zero());
    }

    #[test]
    fn grading_components_partition(a in arb_poly()) {
        let comps = a.gamma_components(ELL);
        // components are supported at their own degree and sum to the input
        let mut sum = Polynomial::zero();
        for (gamma, p) in &comps {
            prop_assert!(!p.is_zero());
            for (m, _) in p.terms() {
                prop_assert_eq!(&m.gamma_degree(ELL), gamma);
            }
            sum = &sum + p;
        }
        prop_assert_eq!(sum, a.clone());
        // homogeneous_component agrees with the split
        for (gamma, p) in &comps {
            prop_assert_eq!(&a.homogeneous_component(gamma, ELL), p);
        }
    }

    #[test]
    fn substitution_is_a_ring_homomorphism(a in arb_poly(), b in arb_poly(), img in proptest::collection::vec(arb_poly(), 9)) {
        let sigma: BTreeMap<VarId, Polynomial> =
            var_pool().into_iter().zip(img).collect();
        let lhs = (&a * &b).substitute(&sigma).unwrap();
        let rhs = &a.substitute(&sigma).unwrap() * &b.substitute(&sigma).unwrap();
        prop_assert_eq!(lhs, rhs);
        let lhs = (&a + &b).substitute(&sigma).unwrap();
        let rhs = &a.substitute(&sigma).unwrap() + &b.substitute(&sigma).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn evaluate_commutes_with_substitute(a in arb_poly(), img in proptest::collection::vec(arb_poly(), 9), point in arb_point()) {
        let sigma: BTreeMap<VarId, Polynomial> =
            var_pool().into_iter().zip(img).collect();
        // evaluating the substituted polynomial equals evaluating at the
        // composite assignment v ↦ σ(v)(point)
        let composite: BTreeMap<VarId, Rational> = sigma
            .iter()
            .map(|(v, p)| (v.clone(), p.evaluate(&point).unwrap()))
            .collect();
        let lhs = a.substitute(&sigma).unwrap().evaluate(&point).unwrap();
        let rhs = a.evaluate(&composite).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn json_round_trip(a in arb_poly()) {
        let json = a.to_json();
        prop_assert_eq!(Polynomial::from_json(&json).unwrap(), a.clone());
        // serialization is byte-stable
        let s1 = serde_json::to_string(&json).unwrap();
        let s2 = serde_json::to_string(&a.to_json()).unwrap();
        prop_assert_eq!(s1, s2);
    }

    #[test]
    fn directional_derivative_is_linear_in_direction(
        a in arb_poly(),
        base in arb_point(),
        d1 in arb_point(),
        d2 in arb_point(),
    ) {
        let sum_dir: BTreeMap<VarId, Rational> = d1
            .iter()
            .map(|(v, x)| (v.clone(), x + &d2[v]))
            .collect();
        let lhs = a.directional_derivative_at(&base, &sum_dir).unwrap();
        let rhs = a.directional_derivative_at(&base, &d1).unwrap()
            + a.directional_derivative_at(&base, &d2).unwrap();
        prop_assert_eq!(lhs, rhs);
    }
}
