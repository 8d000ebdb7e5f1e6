//! Library results against independent reimplementations and closed forms.

use fatcantor::intervals::gap_family;
use fatcantor::{
    attractor_measure_bounds, build_example_fg, build_fk, build_intervals, default_params, eval_limit,
    eval_limit_at_family_endpoint, eval_plf, lipschitz_constant, membership, sup_diff, ClosedInterval, Construction,
    Membership, OpenInterval, ParamSequence, Rational,
};

fn r(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

/// `I_k` by walking binary addresses: bit j of the address picks the left
/// or right child at level j + 1.
fn family_by_address(seq: &ParamSequence, k: usize) -> Vec<(Rational, Rational)> {
    (0..1u64 << (k - 1))
        .map(|addr| {
            let (mut a, mut b) = (Rational::zero(), Rational::one());
            for j in 1..k {
                let bit = (addr >> (k - 1 - j)) & 1;
                let m = (&a + &b) * r(1, 2);
                if bit == 0 {
                    b = &m - seq.eps(j);
                } else {
                    a = &m + seq.eps(j);
                }
            }
            (a, b)
        })
        .collect()
}

/// `f_k(x)` straight from the recursive definition, by recursion on `k`.
fn f_direct(seq: &ParamSequence, k: usize, x: &Rational) -> Rational {
    if k == 0 {
        return x * r(1, 3);
    }
    for (a, b) in family_by_address(seq, k) {
        if &a <= x && x <= &b {
            let fa = f_direct(seq, k - 1, &a);
            let m = (&a + &b) * r(1, 2);
            let outer = seq.w(k + 2) / seq.w(k + 1);
            let eps = seq.eps(k);
            return if x <= &(&m - eps) {
                outer * (x - &a) + fa
            } else if x <= &(&m + eps) {
                seq.eps(k + 1) / eps * (x - (&m - eps)) + fa + seq.w(k + 2)
            } else {
                outer * (x - (&m + eps)) + fa + seq.w(k + 2) + r(2, 1) * seq.eps(k + 1)
            };
        }
    }
    f_direct(seq, k - 1, x)
}

#[test]
fn families_match_address_walk() {
    let seq = default_params(9).unwrap();
    for k in 1..=9 {
        let fam = build_intervals(&seq, k).unwrap();
        let got: Vec<(Rational, Rational)> = fam.members().iter().map(|m| (m.lo.clone(), m.hi.clone())).collect();
        assert_eq!(got, family_by_address(&seq, k), "k={k}");
    }
}

#[test]
fn first_families() {
    let seq = default_params(3).unwrap();
    let iv = |a, b| ClosedInterval::new(a, b).unwrap();
    assert_eq!(build_intervals(&seq, 1).unwrap().members(), &[ClosedInterval::unit()]);
    assert_eq!(
        build_intervals(&seq, 2).unwrap().members(),
        &[iv(r(0, 1), r(1, 3)), iv(r(2, 3), r(1, 1))]
    );
    assert_eq!(
        build_intervals(&seq, 3).unwrap().members(),
        &[
            iv(r(0, 1), r(13, 96)),
            iv(r(19, 96), r(1, 3)),
            iv(r(2, 3), r(77, 96)),
            iv(r(83, 96), r(1, 1))
        ]
    );
    let open = |a, b| OpenInterval::new(a, b).unwrap();
    assert_eq!(
        gap_family(&build_intervals(&seq, 3).unwrap()),
        vec![open(r(13, 96), r(19, 96)), open(r(1, 3), r(2, 3)), open(r(77, 96), r(83, 96))]
    );
}

#[test]
fn approximants_match_direct_recursion() {
    let seq = default_params(8).unwrap();
    for k in 0..=5 {
        let fk = build_fk(&seq, k).unwrap();
        for p in fk.points() {
            assert_eq!(p.y, f_direct(&seq, k, &p.x), "k={k}, x={}", p.x);
        }
        for i in 0..=200 {
            let x = r(i, 200);
            assert_eq!(eval_plf(&fk, &x).unwrap(), f_direct(&seq, k, &x), "k={k}, x={x}");
        }
    }
}

#[test]
fn default_epsilons_are_dyadic() {
    let seq = default_params(20).unwrap();
    for k in 2..=20 {
        assert_eq!(seq.eps(k), &Rational::pow2(-(3 * k as i32 - 1)), "k={k}");
    }
    assert_eq!(seq.w(3), &r(13, 96));
}

#[test]
fn default_measure_closed_form() {
    let seq = default_params(14).unwrap();
    for k in 2..=14 {
        let fam = build_intervals(&seq, k).unwrap();
        let mut sum = Rational::zero();
        for m in fam.members() {
            sum += &m.hi - &m.lo;
        }
        let closed = r(2, 3) - r(1, 6) * (Rational::one() - Rational::integer(4).pow(-(k as i32 - 2)));
        assert_eq!(sum, closed, "k={k}");
        assert_eq!(sum, Rational::pow2(k as i32 - 1) * seq.w(k));
    }
}

#[test]
fn bracket_shrinks_geometrically() {
    for depth in 3..=14 {
        let seq = default_params(depth).unwrap();
        let b = attractor_measure_bounds(&seq, depth).unwrap();
        assert_eq!(&b.upper - &b.lower, r(5, 24) * Rational::integer(4).pow(-(depth as i32 - 2)));
    }
    let seq = default_params(10).unwrap();
    let two = attractor_measure_bounds(&seq, 2).unwrap();
    assert_eq!(two.upper, r(2, 3));
    assert!(two.lower >= r(1, 3));
    assert_eq!(attractor_measure_bounds(&seq, 3).unwrap().upper, r(13, 24));
}

#[test]
fn first_approximant_figures() {
    let seq = default_params(4).unwrap();
    let f0 = build_fk(&seq, 0).unwrap();
    let f1 = build_fk(&seq, 1).unwrap();
    assert_eq!(eval_plf(&f0, &r(1, 2)).unwrap(), r(1, 6));
    assert_eq!(lipschitz_constant(&f0), r(1, 3));
    assert_eq!(eval_plf(&f1, &r(1, 3)).unwrap(), r(13, 96));
    assert_eq!(eval_plf(&f1, &r(1, 2)).unwrap(), r(1, 6));
    // f_1(1/3) - f_1(0) = f_1(1) - f_1(2/3) = w_3
    assert_eq!(eval_plf(&f1, &r(1, 1)).unwrap() - eval_plf(&f1, &r(2, 3)).unwrap(), r(13, 96));
    assert_eq!(lipschitz_constant(&f1), r(13, 32));
    assert_eq!(sup_diff(&f1, &f0), r(7, 288));
    assert_eq!(sup_diff(&f0, &f0), Rational::zero());
}

#[test]
fn sup_diff_against_dense_scan() {
    let seq = default_params(7).unwrap();
    let c = Construction::new(seq);
    for k in 1..=5 {
        let (p, q) = (c.fk(k).unwrap(), c.fk(k - 1).unwrap());
        let n = 4096;
        let mut best = Rational::zero();
        for i in 0..=n {
            let x = r(i, n);
            best = best.max((p.eval(&x).unwrap() - q.eval(&x).unwrap()).abs());
        }
        let exact = sup_diff(p, q);
        assert!(best <= exact, "k={k}");
        assert!(exact <= Rational::pow2(-(k as i32)));
    }
}

#[test]
fn example_maps() {
    let ifs = build_example_fg();
    let (f, g) = (&ifs.maps()[0], &ifs.maps()[1]);
    assert_eq!(eval_plf(f, &r(1, 3)).unwrap(), r(1, 6));
    assert_eq!(eval_plf(f, &r(1, 2)).unwrap(), r(1, 6));
    assert_eq!(eval_plf(g, &r(0, 1)).unwrap(), r(2, 3));
    assert_eq!(lipschitz_constant(f), r(1, 2));
}

#[test]
fn limit_images_of_the_unit_interval() {
    let seq = default_params(6).unwrap();
    assert_eq!(eval_limit_at_family_endpoint(&seq, &r(0, 1), 1).unwrap(), r(0, 1));
    assert_eq!(eval_limit_at_family_endpoint(&seq, &r(1, 1), 1).unwrap(), r(1, 3));
    let half = eval_limit(&seq, &r(1, 2), &r(1, 4)).unwrap();
    assert!(half.value.is_exact());
    assert_eq!(half.value.value, r(1, 6));
}

#[test]
fn membership_examples() {
    let seq = default_params(8).unwrap();
    assert_eq!(membership(&seq, &r(0, 1)), Membership::InAttractorUpToDepth(8));
    assert_eq!(membership(&seq, &r(1, 2)), Membership::EjectedAtLevel(2));
    assert_eq!(membership(&seq, &r(1, 6)), Membership::EjectedAtLevel(3));
    // gap endpoints stay inside
    assert_eq!(membership(&seq, &r(1, 3)), Membership::InAttractorUpToDepth(8));
}
