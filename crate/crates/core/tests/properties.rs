use num_bigint::BigInt;
use num_traits::{One, Zero};
use proptest::prelude::*;
use ringclass::abelian::smith_invariants;
use ringclass::bound_pipeline::{andre_oort_c11_with_grid, default_eps_grid, solve_disc_threshold, AndreOortParams};
use ringclass::dirichlet::{
    genus_c8, kronecker, l_one, l_one_series, tatuzawa_c4, RealCharacter,
};
use ringclass::galois_models::{gen_dihedral, FinAbGroup};
use ringclass::hilbert::hilbert_class_poly;
use ringclass::poly::BiPoly;
use ringclass::quadform::{
    class_group, compose, reduce_form, two_torsion_size, Discriminant, QuadForm,
};
use ringclass::sieve::{parse_curve, special_point_scan, strip_degenerate, CurveSpec};

fn discriminant(bound: i64) -> impl Strategy<Value = Discriminant> {
    (3..=bound).prop_filter_map("not a discriminant", |n| Discriminant::new(-n).ok())
}

fn fundamental(bound: i64) -> impl Strategy<Value = Discriminant> {
    discriminant(bound).prop_filter("not fundamental", |d| d.is_fundamental())
}

fn is_squarefree(n: i64) -> bool {
    (2..).take_while(|p| p * p <= n).all(|p| n % (p * p) != 0)
}

/// Determinant by fraction-free elimination.
fn det(mut m: Vec<Vec<i128>>) -> i128 {
    let n = m.len();
    let mut sign = 1;
    let mut prev = 1i128;
    for k in 0..n {
        let Some(p) = (k..n).find(|&i| m[i][k] != 0) else {
            return 0;
        };
        if p != k {
            m.swap(p, k);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
            }
        }
        prev = m[k][k];
    }
    sign * m[n - 1][n - 1]
}

fn small_bipoly() -> impl Strategy<Value = BiPoly> {
    prop::collection::vec((-6i64..=6, 0usize..=2, 0usize..=2), 1..5).prop_map(|terms| {
        terms
            .into_iter()
            .fold(BiPoly::zero(), |acc, (c, i, j)| acc.add(&BiPoly::monomial(c, i, j)))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn discriminant_splits_into_conductor_and_fundamental_part(d in discriminant(100_000)) {
        let (f, dk) = (d.conductor() as i64, d.fundamental_part());
        prop_assert_eq!(f * f * dk, d.value());
        prop_assert!(d.value().rem_euclid(4) <= 1);
        let m = if dk % 4 == 0 { -dk / 4 } else { -dk };
        prop_assert!(is_squarefree(m));
        prop_assert!(dk % 4 != 0 || matches!(m % 4, 1 | 2));
    }

    #[test]
    fn reduction_lands_on_a_reduced_form_of_the_same_class(
        d in discriminant(5_000), pick in 0usize..64, shift in -30i64..30,
    ) {
        // a reduced form moved by x -> x + shift * y must come back to itself
        let g = class_group(&d).unwrap();
        let f = &g.reduced_forms[pick % g.reduced_forms.len()];
        let (a, b, c) = (f.a, f.b, f.c);
        let moved = QuadForm::new(a, b + 2 * a * shift, a * shift * shift + b * shift + c).unwrap();
        let r = reduce_form(&moved).unwrap();
        prop_assert!(r.is_reduced());
        prop_assert_eq!(r.discriminant(), d.value());
        prop_assert_eq!(&r, f);
    }

    #[test]
    fn class_group_structure_is_consistent(d in discriminant(10_000)) {
        let g = class_group(&d).unwrap();
        prop_assert_eq!(g.order, g.elementary_divisors.iter().product::<u64>());
        prop_assert_eq!(g.order as usize, g.reduced_forms.len());
        prop_assert!(g.elementary_divisors.windows(2).all(|w| w[1] % w[0] == 0));
        let even = g.elementary_divisors.iter().filter(|&&n| n % 2 == 0).count();
        prop_assert_eq!(g.two_torsion_size, 1 << even);
        prop_assert_eq!(two_torsion_size(&d), 1 << even);
        let principal = QuadForm::principal(&d);
        prop_assert_eq!(principal.a, 1);
        prop_assert_eq!(principal.b, d.value().rem_euclid(2));
        prop_assert!(g.reduced_forms.contains(&principal));
    }

    #[test]
    fn composition_is_an_abelian_group_law(d in discriminant(3_000), i in 0usize..64, j in 0usize..64, k in 0usize..64) {
        let g = class_group(&d).unwrap();
        let n = g.reduced_forms.len();
        let (x, y, z) = (&g.reduced_forms[i % n], &g.reduced_forms[j % n], &g.reduced_forms[k % n]);
        let e = QuadForm::principal(&d);
        let xy = compose(x, y).unwrap();
        prop_assert!(xy.is_reduced());
        prop_assert_eq!(&xy, &compose(y, x).unwrap());
        prop_assert_eq!(compose(&xy, z).unwrap(), compose(x, &compose(y, z).unwrap()).unwrap());
        prop_assert_eq!(&compose(x, &e).unwrap(), x);
        prop_assert_eq!(compose(x, &reduce_form(&x.inverse()).unwrap()).unwrap(), e);
        prop_assert_eq!(x.pow(g.exponent()), QuadForm::principal(&d));
    }

    #[test]
    fn kronecker_is_a_real_odd_character(d in fundamental(2_000), m in 1i64..5_000, n in 1i64..5_000) {
        let dv = d.value();
        let chi = |k: i64| kronecker(dv, k);
        prop_assert_eq!(chi(m * n), chi(m) * chi(n));
        prop_assert_eq!(chi(m + dv.abs()), chi(m));
        prop_assert_eq!(chi(m) == 0, num_integer::gcd(m, dv) > 1);
        prop_assert_eq!(chi(-1), -1);
    }

    #[test]
    fn closed_form_l_value_agrees_with_the_series(d in fundamental(3_000)) {
        let chi = RealCharacter::new(d).unwrap();
        let l = l_one(&chi, 1e-9).unwrap();
        let (partial, tail) = l_one_series(&chi, 200_000);
        prop_assert!((l - partial).abs() <= tail + 1e-9, "{} vs {} +/- {}", l, partial, tail);
        prop_assert!(l > 0.0);
    }

    #[test]
    fn genus_count_is_within_c8(d in discriminant(100_000), eps in prop::sample::select(vec![0.3, 0.2, 0.12])) {
        let c8 = genus_c8(eps).unwrap();
        prop_assert!((two_torsion_size(&d) as f64) <= c8.value * (d.abs() as f64).powf(eps));
    }

    #[test]
    fn smith_invariants_multiply_to_the_determinant(rows in prop::collection::vec(prop::collection::vec(-9i64..=9, 4), 4)) {
        let d = det(rows.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect());
        let inv = smith_invariants(&rows, 4);
        if d == 0 {
            prop_assert!(inv.contains(&0));
        } else {
            prop_assert_eq!(inv.iter().map(|&x| x as i128).product::<i128>(), d.abs());
            prop_assert!(inv.windows(2).all(|w| w[1] % w[0] == 0));
        }
    }

    #[test]
    fn cyclic_products_normalize(orders in prop::collection::vec(1u64..13, 0..4)) {
        let g = FinAbGroup::from_cyclic_orders(&orders).unwrap();
        prop_assert_eq!(g.order(), orders.iter().product::<u64>());
        prop_assert_eq!(g.exponent(), orders.iter().fold(1, |l, &n| num_integer::lcm(l, n)));
        prop_assert_eq!(g.exponent(), g.elementary_divisors().last().copied().unwrap_or(1));
    }

    #[test]
    fn generalized_dihedral_groups(orders in prop::collection::vec(1u64..7, 0..3)) {
        let h = FinAbGroup::from_cyclic_orders(&orders).unwrap();
        let g = gen_dihedral(&h);
        let all = g.elements();
        prop_assert_eq!(all.len() as u64, 2 * h.order());
        let commutes = all.iter().all(|x| all.iter().all(|y| g.mul(x, y) == g.mul(y, x)));
        prop_assert_eq!(commutes, h.exponent() <= 2);
        prop_assert_eq!(g.is_abelian(), commutes);
        for x in all.iter().filter(|x| x.flip) {
            prop_assert_eq!(g.mul(x, x), g.identity());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn hilbert_polynomials_are_monic_separable_of_degree_h(d in discriminant(1_500)) {
        let h = hilbert_class_poly(&d).unwrap();
        let p = h.as_poly();
        prop_assert!(p.is_monic());
        prop_assert_eq!(h.degree() as u64, class_group(&d).unwrap().order);
        prop_assert_eq!(p.gcd(&p.derivative()).degree(), Some(0));
    }

    #[test]
    fn tatuzawa_c4_holds_above_its_threshold(offset in 0i64..100_000) {
        let c4 = tatuzawa_c4(0.2).unwrap();
        let start = c4.validity_threshold.ceil() as i64 + offset;
        let d = (start..).filter_map(|n| Discriminant::new(-n).ok()).find(|d| d.is_fundamental()).unwrap();
        let h = class_group(&d).unwrap().order as f64;
        prop_assert!(h > c4.value * (d.abs() as f64).powf(0.3));
    }

    #[test]
    fn threshold_grows_with_odd_cap(cap in 1.0f64..1e6, factor in 1.0f64..100.0, e in 0u32..4) {
        let grid = [(0.2, 0.12), (0.12, 0.07)];
        let lo = solve_disc_threshold(cap, e, &grid).unwrap();
        let hi = solve_disc_threshold(cap * factor, e, &grid).unwrap();
        prop_assert!(lo.log_threshold <= hi.log_threshold);
        prop_assert!(lo.threshold <= hi.threshold);
        prop_assert!(lo.exceptional_field_caveat);
    }

    #[test]
    fn reports_reproduce_from_their_audit(c9 in 1.0f64..20.0) {
        let r = andre_oort_c11_with_grid(&AndreOortParams::new(2, c9).unwrap(), &default_eps_grid()).unwrap();
        let again = r.reproduce().unwrap();
        prop_assert_eq!(&again.threshold, &r.threshold);
        prop_assert!(r.log_threshold >= r.log_validity_floor);
        prop_assert!(!r.audit.is_empty());
    }

    #[test]
    fn display_round_trips_through_the_parser(f in small_bipoly()) {
        prop_assume!(!f.is_zero());
        let spec = CurveSpec::new(f, 1).unwrap();
        let reparsed = parse_curve(&spec.to_string()).unwrap();
        prop_assert_eq!(reparsed.poly(), spec.poly());
    }

    #[test]
    fn stripping_removes_exactly_the_fibres(a in -5i64..=5, b in -5i64..=5, g in small_bipoly()) {
        prop_assume!(!g.is_zero());
        let core = g.mul(&BiPoly::x()).add(&BiPoly::y()).add(&BiPoly::constant(1));
        let fibres = BiPoly::x().sub(&BiPoly::constant(a)).mul(&BiPoly::y().sub(&BiPoly::constant(b)).pow(2));
        let f = core.mul(&fibres);
        let (stripped, comps) = strip_degenerate(&CurveSpec::new(f.clone(), 1).unwrap()).unwrap();
        let shown: Vec<String> = comps.iter().map(ToString::to_string).collect();
        let (fx, fy) = (format!("x = {a}"), format!("y = {b}"));
        prop_assert!(shown.contains(&fx) && shown.contains(&fy), "{:?}", shown);
        // no fibre factor survives: coefficient rows are coprime in both views
        for view in [stripped.poly().clone(), stripped.poly().swap()] {
            let rows = view.coeffs_in_y();
            let g = rows.iter().skip(1).fold(rows[0].clone(), |acc, r| acc.gcd(r));
            prop_assert_eq!(g.degree(), Some(0));
        }
        prop_assert!(stripped.deg_x() >= 1 && stripped.deg_y() >= 1);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn scan_is_symmetric_and_certified(f in small_bipoly()) {
        let spec = CurveSpec::new(f.add(&BiPoly::x().mul(&BiPoly::y())), 1).unwrap();
        prop_assume!(spec.deg_x() >= 1 && spec.deg_y() >= 1);
        let (stripped, _) = match strip_degenerate(&spec) {
            Ok(s) => s,
            Err(_) => return Ok(()),
        };
        let hits = special_point_scan(&stripped, 16).unwrap();
        let mirrored = special_point_scan(&stripped.swapped(), 16).unwrap();
        let mut a: Vec<(i64, i64)> = hits.iter().map(|h| (h.d1.value(), h.d2.value())).collect();
        let mut b: Vec<(i64, i64)> = mirrored.iter().map(|h| (h.d2.value(), h.d1.value())).collect();
        a.sort_unstable();
        b.sort_unstable();
        prop_assert_eq!(a, b);
        for h in &hits {
            let (h1, h2) = (hilbert_class_poly(&h.d1).unwrap(), hilbert_class_poly(&h.d2).unwrap());
            prop_assert!(h.verify(&stripped, &h1, &h2));
            prop_assert_eq!(h.same_cm_field, h.d1.fundamental_part() == h.d2.fundamental_part());
        }
    }
}

#[test]
fn known_witness_point() {
    // (j, j') = (1728, 0) lies on x + y = 1728
    let spec = parse_curve("x + y - 1728").unwrap();
    assert!(spec.poly().eval(&BigInt::from(1728), &BigInt::zero()).is_zero());
    assert!(spec.poly().eval(&BigInt::zero(), &BigInt::from(1728)).is_zero());
    assert!(!spec.poly().eval(&BigInt::one(), &BigInt::one()).is_zero());
}
