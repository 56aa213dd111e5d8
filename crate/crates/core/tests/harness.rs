mod common;

use common::count_terms;
use std::collections::HashSet;
use tightcalc::eval::is_normal_cbv;
use tightcalc::harness::{
    BudgetExceeded, GenConfig, Generator, enumerate_terms, gen_terms, oracle_normal, run_campaign,
};
use tightcalc::syntax::{Calculus, Term, alpha_eq, free_vars, to_nameless};

fn names(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

#[test]
fn first_five_terms_of_seed_one() {
    let cfg = GenConfig {
        seed: 1,
        max_depth: 3,
        ..GenConfig::default()
    };
    let shown: Vec<String> = gen_terms(cfg, 5).iter().map(Term::to_string).collect();
    assert_eq!(
        shown,
        [r"\y.x", r"(\y.z x) z", r"\y.\x.z x", r"\x.\z.\z.x", "x"]
    );
}

#[test]
fn enumeration_matches_the_counting_oracle() {
    for pool in [&[][..], &["x"][..], &["x", "y"][..], &["a", "b", "c"][..]] {
        for n in 1..=7 {
            let terms = enumerate_terms(n, &names(pool)).unwrap();
            let expected: u128 = (1..=n).map(|i| count_terms(i, 0, pool.len())).sum();
            assert_eq!(terms.len() as u128, expected, "pool {pool:?}, {n} nodes");
        }
    }
}

#[test]
fn enumeration_is_alpha_distinct_and_within_bounds() {
    let pool = names(&["x", "y"]);
    let terms = enumerate_terms(6, &pool).unwrap();
    let keys: HashSet<String> = terms
        .iter()
        .map(|t| format!("{:?}", to_nameless(t)))
        .collect();
    assert_eq!(keys.len(), terms.len());
    for t in &terms {
        assert!(t.node_count() <= 6);
        assert!(free_vars(t).iter().all(|x| pool.contains(x)));
    }
}

#[test]
fn closed_pool_gives_closed_terms() {
    let terms = enumerate_terms(4, &[]).unwrap();
    assert!(!terms.is_empty());
    assert!(terms.iter().all(|t| free_vars(t).is_empty()));
    assert!(enumerate_terms(1, &[]).unwrap().is_empty());
    assert!(alpha_eq(
        &enumerate_terms(2, &[]).unwrap()[0],
        &tightcalc::syntax::parse_term(r"\a.a").unwrap()
    ));
}

#[test]
fn budget_guard() {
    assert!(enumerate_terms(12, &[]).is_ok());
    assert_eq!(
        enumerate_terms(13, &names(&["x"])),
        Err(BudgetExceeded { requested: 13 })
    );
}

#[test]
fn oracle_agrees_on_a_larger_enumeration() {
    for t in enumerate_terms(9, &names(&["x"])).unwrap() {
        assert_eq!(is_normal_cbv(&t), oracle_normal(&t), "{t}");
    }
}

#[test]
fn generated_states_use_the_pool_and_distinct_locations() {
    let cfg = GenConfig {
        seed: 9,
        calculus: Calculus::Gs,
        ..GenConfig::default()
    };
    for c in Generator::new(cfg.clone()).take(300) {
        assert!(c.term.is_gs_valid());
        assert!(!c.state.has_duplicates());
        assert!(c.state.dom().iter().all(|l| cfg.loc_pool.contains(l)));
    }
}

#[test]
fn normalizing_filter_discards_divergent_inputs() {
    let cfg = GenConfig {
        seed: 2,
        max_depth: 6,
        normalizing_only: true,
        ..GenConfig::default()
    };
    let mut g = Generator::new(cfg);
    for _ in 0..300 {
        let t = g.next_term();
        assert!(tightcalc::eval::eval_cbv(&t, tightcalc::harness::GEN_FUEL).is_ok());
    }
    assert!(g.discard_rate() < 0.5);
}

#[test]
fn cbv_campaign_is_clean() {
    let cfg = GenConfig {
        seed: 12,
        max_depth: 5,
        normalizing_only: true,
        ..GenConfig::default()
    };
    let r = run_campaign(&cfg, 300, 10_000);
    assert!(r.ok(), "{:?}", r.failures);
    assert!(r.gaps.is_empty());
}

#[test]
fn gs_campaign_has_gaps_but_no_failures() {
    let cfg = GenConfig {
        seed: 12,
        max_depth: 5,
        normalizing_only: true,
        calculus: Calculus::Gs,
        ..GenConfig::default()
    };
    let r = run_campaign(&cfg, 300, 10_000);
    assert!(r.ok(), "{:?}", r.failures);
}
