use twovar::minimax::WEAK_DUALITY_SLACK;
use twovar::{lemma2_check, sion_check, Market, MarketParams, MinimaxTolerances, PatternAssignment, Variable};

const B_GRID: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 0.9];
const GAP_GRID: [f64; 5] = [-0.3, -0.1, 0.0, 0.1, 0.3];

#[test]
fn four_way_equality_on_grid() {
    let tol = MinimaxTolerances::default();
    let mut worst: f64 = 0.0;
    for &b in &B_GRID {
        for &gap in &GAP_GRID {
            let market = Market::new(MarketParams::one_alien(4, 2.0, b, 1.0, 1.0 + gap).unwrap()).unwrap();
            let mut reports = vec![market.minimax_at_equilibrium(0, &tol).unwrap()];
            for frozen in market.random_frozen(0, 5, 7).unwrap() {
                reports.push(lemma2_check(&market.params, &market.system, 0, &frozen, &tol).unwrap());
            }
            for r in &reports {
                worst = worst.max(r.max_spread);
                assert!(r.holds(), "b={b} gap={gap} frozen={:?} values={:?}", r.frozen, r.values());
                assert!(r.weak_duality_ok(), "b={b} gap={gap}: {}", r.weak_duality_violation);
                assert!(r.shape_violations.is_empty(), "{:?}", r.shape_violations);
                assert!(r.domain_issues.is_empty(), "{:?}", r.domain_issues);
            }
        }
    }
    eprintln!("worst spread {worst:e}");
}

#[test]
fn equilibrium_frozen_value_is_equilibrium_payoff() {
    let market = Market::new(MarketParams::one_alien(4, 2.0, 0.5, 1.0, 1.2).unwrap()).unwrap();
    let eq = market
        .solve(&PatternAssignment::uniform(4, Variable::Quantity), twovar::Method::FocSolve)
        .unwrap();
    let r = market.minimax_at_equilibrium(0, &MinimaxTolerances::default()).unwrap();
    for v in r.values() {
        assert!((v - eq.payoffs.relative[0]).abs() < 1e-5, "{v} vs {}", eq.payoffs.relative[0]);
    }
    // the saddle point is the equilibrium itself
    assert!((r.arg_points[0].inner - eq.outcome.quantities[0]).abs() < 1e-5);
    assert!((r.arg_points[0].outer - eq.outcome.quantities[3]).abs() < 1e-5);
    assert!((r.arg_points[1].outer - eq.outcome.prices[3]).abs() < 1e-5);
}

#[test]
fn sion_on_random_frozen_points() {
    let market = Market::new(MarketParams::one_alien(4, 2.0, 0.5, 1.0, 1.2).unwrap()).unwrap();
    let tol = MinimaxTolerances::default();
    for player in 0..3 {
        for frozen in market.random_frozen(player, 10, 11).unwrap() {
            let s = sion_check(&market.params, &market.system, player, &frozen, &tol).unwrap();
            assert!(s.holds(), "gap {}", s.gap());
            assert!(s.maxmin <= s.minmax + WEAK_DUALITY_SLACK);
        }
    }
}

#[test]
fn larger_markets() {
    let tol = MinimaxTolerances::default();
    for n in [5, 6] {
        let market = Market::new(MarketParams::one_alien(n, 2.0, 0.5, 1.0, 1.1).unwrap()).unwrap();
        let r = market.minimax_at_equilibrium(1, &tol).unwrap();
        assert!(r.holds(), "n={n} {:?}", r.values());
        for frozen in market.random_frozen(1, 3, 3).unwrap() {
            let r = lemma2_check(&market.params, &market.system, 1, &frozen, &tol).unwrap();
            assert!(r.holds(), "n={n} {:?}", r.values());
        }
    }
}

#[test]
fn uncovered_alien_quantity_is_diagnosed() {
    // the alien's minimising quantity sits on t_n = 0, and the price that
    // would mirror it induces a negative quantity
    let market = Market::new(MarketParams::one_alien(4, 2.0, 0.9, 1.0, 1.3).unwrap()).unwrap();
    let r = lemma2_check(&market.params, &market.system, 0, &[0.35766, 0.36433], &MinimaxTolerances::default()).unwrap();
    assert!(!r.domain_issues.is_empty());
    assert!(r.arg_points[0].outer < 1e-6);
    assert!(r.saddle.unwrap().t_n < 0.0);
    // Sion still holds within each variable choice
    assert!((r.v_min_tn_max_ti - r.v_max_ti_min_tn).abs() < 1e-5);
    assert!((r.v_min_sn_max_ti - r.v_max_ti_min_sn).abs() < 1e-5);
}
