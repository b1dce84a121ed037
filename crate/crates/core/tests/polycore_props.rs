use proptest::prelude::*;
use theta_core::rational::ratio;
use theta_core::{normal_form, Monomial, MonomialOrder, Polynomial, Rational, ReducerSet};

fn cardioid_set() -> ReducerSet {
    let h: Polynomial = "x1^4 + 2*x1^2*x2^2 + x2^4 + 4*x1^3 + 4*x1*x2^2 - 4*x2^2".parse().unwrap();
    ReducerSet::singleton(h, MonomialOrder::Grevlex).unwrap()
}

/// `x_i^2 - x_i` and the edge products of the 5-cycle: a Groebner basis.
fn pentagon_set() -> ReducerSet {
    let n = 5;
    let mut pairs = Vec::new();
    for i in 0..n {
        let xi = Polynomial::var(n, i);
        pairs.push((&(&xi * &xi) - &xi, Monomial::from_support(n, &[i, i])));
        let j = (i + 1) % n;
        pairs.push((&xi * &Polynomial::var(n, j), Monomial::from_support(n, &[i.min(j), i.max(j)])));
    }
    ReducerSet::with_marked(pairs, MonomialOrder::Grevlex, true).unwrap()
}

fn poly_strategy(nvars: usize, max_exp: u32) -> impl Strategy<Value = Polynomial> {
    let term = (prop::collection::vec(0..=max_exp, nvars), -9i64..=9, 1i64..=4);
    prop::collection::vec(term, 0..7).prop_map(move |terms| {
        let mut p = Polynomial::zero(nvars);
        for (e, num, den) in terms {
            p.add_term(Monomial::new(e), ratio(num, den));
        }
        p
    })
}

fn check_laws(f: &Polynomial, g: &Polynomial, set: &ReducerSet) -> Result<(), TestCaseError> {
    let nf = |p: &Polynomial| normal_form(p, set).unwrap();
    let nf_f = nf(f);
    prop_assert_eq!(nf(&nf_f), nf_f.clone());
    prop_assert_eq!(nf(&(f + g)), &nf_f + &nf(g));
    prop_assert_eq!(nf(&(f * g)), nf(&(&nf_f * &nf(g))));
    prop_assert_eq!(&(f + g) - g, f.clone());
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn cardioid_normal_form_laws(f in poly_strategy(2, 5), g in poly_strategy(2, 5)) {
        check_laws(&f, &g, &cardioid_set())?;
    }

    #[test]
    fn pentagon_normal_form_laws(f in poly_strategy(5, 2), g in poly_strategy(5, 2)) {
        check_laws(&f, &g, &pentagon_set())?;
    }

    #[test]
    fn text_round_trip(f in poly_strategy(3, 4)) {
        let text = f.display_with(MonomialOrder::Grevlex);
        prop_assert_eq!(Polynomial::parse(&text, 3).unwrap(), f);
    }

    #[test]
    fn normal_forms_are_irreducible(f in poly_strategy(2, 6)) {
        let set = cardioid_set();
        let r = normal_form(&f, &set).unwrap();
        for (m, _) in r.terms() {
            prop_assert!(!set.is_reducible(m));
        }
    }
}

#[test]
fn exact_rational_arithmetic() {
    let f: Polynomial = "1/3*x1^2 - 2/7*x2".parse().unwrap();
    let g: Polynomial = "2/3*x1^2 + 5/7*x2 - 1/11".parse().unwrap();
    assert_eq!(&(&f + &g) - &g, f);
    assert_eq!((&f + &g).coefficient(&Monomial::new(vec![2, 0])), Rational::from_integer(1.into()));
}
