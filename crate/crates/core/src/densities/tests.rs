use num_traits::ToPrimitive;

use super::*;
use crate::fixtures;
use crate::lattice::TripleIndex;

fn ti(a: u64, b: u64, c: u64) -> TripleIndex {
    TripleIndex::new(a, b, c).unwrap()
}

fn unit_forms() -> FormTriple {
    fixtures::unit().forms
}

#[test]
fn trivial_truncation() {
    let t = unit_forms();
    for p in [2u64, 3, 5] {
        let w = (1.0 - 1.0 / p as f64).powi(3);
        assert!((sigma_p(p, &t, 0).unwrap().value - w).abs() < 1e-15);
        let s = sigma_star_p_dd(p, &ti(1, 1, 1), &ti(1, 1, 1), &t, 0).unwrap();
        assert!((s.value - w * (1.0 - 1.0 / (p * p) as f64)).abs() < 1e-15);
    }
}

/// `E[(1 + a)(1 + b)(1 + 2 min(a, b))]` for independent valuations at 3.
fn valuation_expectation() -> f64 {
    let pr = |a: i32| (2.0 / 3.0) * 3f64.powi(-a);
    let mut e = 0.0;
    for a in 0..80 {
        for b in 0..80 {
            e += pr(a) * pr(b) * ((1 + a) * (1 + b) * (1 + 2 * a.min(b))) as f64;
        }
    }
    e
}

#[test]
fn sigma_at_three_matches_valuation_expectation() {
    let t = unit_forms();
    let s = sigma_p(3, &t, 40).unwrap();
    let oracle = (2.0f64 / 3.0).powi(3) * valuation_expectation();
    assert!((s.value - oracle).abs() < 1e-3, "{s:?} vs {oracle}");
    // the same density from the p-adic count at level 3^12
    let idx = LocalIndex::new([0; 3], [0; 3]).unwrap();
    let n = n_lambda_mu_oracle(3, 12, &idx, &t).unwrap().to_f64().unwrap();
    assert!((n - oracle).abs() < 1e-4, "{n} vs {oracle}");
}

#[test]
fn restricted_two_adic_sum() {
    // rho(2^nu, 1, 1) = 2^nu, so the restricted sum is sum_{nu <= N} 2^{-nu}
    let t = unit_forms();
    let mut local = PrimeLocal::new(&t, 2);
    for n in 0..10u32 {
        let s: f64 = (0..=n).map(|v| local.rho_f64([v, 0, 0]).unwrap()).sum();
        assert!((s - (2.0 - 2f64.powi(-(n as i32)))).abs() < 1e-15);
    }
}

#[test]
fn conditioned_densities() {
    let t = unit_forms();
    for p in [2u64, 3, 5] {
        let a = sigma_p(p, &t, 10).unwrap().value;
        let b = sigma_p_dd(p, &ti(1, 1, 1), &ti(1, 1, 1), &t, 10).unwrap().value;
        assert_eq!(a, b);
    }
    // leading term at d = D = (3, 1, 1) is rho(3, 1, 1) / 9 = 1/3
    let s = sigma_p_dd(3, &ti(3, 1, 1), &ti(3, 1, 1), &t, 0).unwrap();
    assert!((s.value - (8.0 / 27.0) / 3.0).abs() < 1e-15);
    // lambda = mu: N_i = lambda_i + nu_i
    let idx = LocalIndex::new([1, 0, 2], [1, 0, 2]).unwrap();
    assert_eq!(idx.exponents([2, 3, 1]), [3, 3, 3]);
    assert_eq!(idx.exponents([0, 0, 0]), [1, 0, 2]);
    assert!(sigma_p_dd(3, &ti(2, 1, 1), &ti(3, 1, 1), &t, 2).is_err());
    // rho*(1, 1, 3) = 0 for x1^2 + x2^2
    let star = sigma_star_p_dd(3, &ti(1, 1, 3), &ti(1, 1, 3), &t, 0).unwrap();
    assert_eq!(star.value, 0.0);
}

#[test]
fn star_below_plain() {
    for f in fixtures::all() {
        for p in [2u64, 3, 5, 7] {
            for (d, dd) in [(ti(1, 1, 1), ti(1, 1, 1)), (ti(1, 1, 1), ti(p, 1, 1)), (ti(p, 1, p), ti(p, p, p))] {
                let a = sigma_star_p_dd(p, &d, &dd, &f.forms, 10).unwrap();
                let b = sigma_p_dd(p, &d, &dd, &f.forms, 10).unwrap();
                assert!(a.value <= b.value + 1e-15, "{} p={p}: {a:?} {b:?}", f.name);
            }
        }
    }
}

#[test]
fn truncation_is_monotone_and_tail_covers_the_next_step() {
    for f in fixtures::all() {
        for p in [2u64, 3, 5] {
            let vals: Vec<LocalDensity> = (4..=10).map(|n| sigma_p(p, &f.forms, n).unwrap()).collect();
            for w in vals.windows(2) {
                assert!(w[1].value >= w[0].value, "{} p={p}", f.name);
                assert!(w[1].value - w[0].value <= w[0].tail_estimate, "{} p={p} {w:?}", f.name);
            }
        }
    }
}

#[test]
fn s_lambda_closed_form() {
    assert_eq!(count_s_lambda(1, 3, 1, 0), 2);
    assert_eq!(count_s_lambda(3, 3, 1, 1), 9);
    assert_eq!(count_s_lambda(2, 2, 2, 0), 4);
    assert_eq!(count_s_lambda(1, 2, 1, 1), 0);
    for p in [2u64, 3, 5, 7] {
        let mut n = 1;
        while p.pow(n) <= 343 {
            let m = p.pow(n) as i128;
            for lambda in 0..=n + 1 {
                for a in 0..m {
                    assert_eq!(
                        count_s_lambda(a, p, n, lambda),
                        count_s_lambda_bruteforce(a, p, n, lambda),
                        "p={p} n={n} lambda={lambda} a={a}"
                    );
                }
            }
            n += 1;
        }
    }
}

#[test]
fn n_oracle_small_case() {
    let t = unit_forms();
    let idx = LocalIndex::new([0; 3], [0; 3]).unwrap();
    let v = n_lambda_mu_oracle(2, 1, &idx, &t).unwrap();
    assert_eq!(v, BigRational::new(9.into(), 8.into()));
    assert_eq!(n_lambda_mu_bruteforce(2, 1, &idx, &t).unwrap(), v);
    assert!(n_lambda_mu_oracle(2, 20, &idx, &t).is_err());
    assert!(n_lambda_mu_bruteforce(2, 11, &idx, &t).is_err());
}

#[test]
fn n_oracle_class_reduction_matches_enumeration() {
    for f in fixtures::all() {
        for (p, n) in [(2u64, 5u32), (3, 3), (5, 2), (7, 2)] {
            for (lambda, mu) in [([0, 0, 0], [0, 0, 0]), ([1, 0, 1], [1, 1, 2]), ([2, 1, 0], [3, 1, 1])] {
                let idx = LocalIndex::new(lambda, mu).unwrap();
                assert_eq!(
                    n_lambda_mu_oracle(p, n, &idx, &f.forms).unwrap(),
                    n_lambda_mu_bruteforce(p, n, &idx, &f.forms).unwrap(),
                    "{} p={p} n={n} {idx:?}",
                    f.name
                );
            }
        }
    }
}

#[test]
fn n_oracle_approaches_the_local_density() {
    for f in [fixtures::unit(), fixtures::ramified()] {
        for (p, n) in [(2u64, 14u32), (3, 9), (5, 6)] {
            for (lambda, mu) in [([0, 0, 0], [0, 0, 0]), ([1, 0, 0], [1, 0, 1]), ([0, 1, 1], [1, 1, 2])] {
                let idx = LocalIndex::new(lambda, mu).unwrap();
                let o = n_lambda_mu_oracle(p, n, &idx, &f.forms).unwrap().to_f64().unwrap();
                let s = sigma_p_local(p, &idx, &f.forms, 12).unwrap();
                assert!(
                    (o - s.value).abs() <= s.tail_estimate + 1e-3,
                    "{} p={p} {idx:?}: {o} vs {s:?}",
                    f.name
                );
            }
        }
    }
}

#[test]
fn c_factor_at_good_primes() {
    let t = unit_forms();
    for p in [5u64, 13, 101, 103] {
        let nu_max = 12;
        let f = c_factor(p, &t, nu_max).unwrap();
        let pf = p as f64;
        let chi = kronecker(-4, p as i128) as f64;
        let mut s = 1.0;
        for nu in 1..=nu_max as i32 {
            let c = (nu + 1) / 2;
            let phi = pf.powi(nu) * (1.0 - 1.0 / pf);
            let rho_q = phi * (1.0 + chi) * c as f64 + pf.powi(2 * (nu - c));
            s += 2.0 * pf.powi(-nu) + rho_q / pf.powi(2 * nu);
        }
        let want = (1.0 - 1.0 / pf).powi(3) * s;
        assert!((f.value - want).abs() < 1e-14, "p={p}");
        let full = (1.0 - 1.0 / pf).powi(3) * (1.0 + 2.0 / (pf - 1.0));
        assert!(f.value > full);
    }
}

use crate::arith::kronecker;

#[test]
fn empty_products() {
    let t = unit_forms();
    let raw = constant_c(&t, 1, 12, false).unwrap();
    assert_eq!(raw.value, 1.0);
    let acc = constant_c(&t, 1, 12, true).unwrap();
    assert!((acc.value - std::f64::consts::FRAC_PI_4).abs() < 1e-8);
}

#[test]
fn raw_and_accelerated_constants_agree() {
    for f in fixtures::all() {
        let raw = constant_c(&f.forms, 3000, 12, false).unwrap();
        let acc = constant_c(&f.forms, 3000, 12, true).unwrap();
        assert!(
            (raw.value - acc.value).abs() <= raw.tail_estimate + acc.tail_estimate,
            "{}: {raw:?} {acc:?}",
            f.name
        );
        assert!(acc.tail_estimate > 0.0);
    }
}

#[test]
fn c_star_factor_matches_valuation_enumeration() {
    // exact valuations mod 3^7 are determined whenever they sum to at most 6
    let t = fixtures::real_disc().forms;
    let h = MultiplicativeFn::unit();
    let p = 3u64;
    let m = 3i64.pow(7);
    let mut acc = 0i128;
    for x1 in 0..m {
        for x2 in 0..m {
            if x1 % 3 == 0 && x2 % 3 == 0 {
                continue;
            }
            let (a, b, c) = t.values_fast(x1, x2);
            let v = |z: i128| {
                let z = z.rem_euclid(m as i128);
                if z == 0 {
                    7
                } else {
                    let mut k = 0;
                    let mut z = z;
                    while z % 3 == 0 {
                        z /= 3;
                        k += 1;
                    }
                    k
                }
            };
            let s = v(a) + v(b) + v(c);
            if s <= 6 {
                acc += (s + 1) as i128;
            }
        }
    }
    let oracle = (2.0f64 / 3.0).powi(3) * acc as f64 / (m as f64 * m as f64);
    let f = c_star_factor(p, &t, &h, 6).unwrap();
    assert!((f.value - oracle).abs() < 1e-12, "{f:?} vs {oracle}");
}

#[test]
fn constant_g_gives_coprime_density() {
    // tau * mu = 1
    let h = MultiplicativeFn {
        generic: vec![-1],
        ..MultiplicativeFn::unit()
    };
    for f in fixtures::all() {
        for p in [2u64, 3, 5, 7, 11] {
            let v = c_star_factor(p, &f.forms, &h, 12).unwrap();
            let pf = p as f64;
            let want = (1.0 - 1.0 / pf).powi(3) * (1.0 - 1.0 / (pf * pf));
            assert!((v.value - want).abs() <= v.tail_estimate + 1e-12, "{} p={p}: {v:?}", f.name);
            assert!(v.value <= 1.0);
        }
    }
}

#[test]
fn report_serializes() {
    let r = constant_c(&unit_forms(), 100, 6, true).unwrap();
    let j = serde_json::to_value(&r).unwrap();
    assert!(j["tail_estimate"].as_f64().unwrap() > 0.0);
    assert_eq!(j["accelerated"], true);
}
