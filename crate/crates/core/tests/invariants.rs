use proptest::prelude::*;
use serde::{Deserialize, Serialize};

use shearwave::banded::BandMatrix;
use shearwave::diagnostics::{check_bounds, BoundInputs};
use shearwave::numerics::simpson;
use shearwave::shear::{build_asymptotic_state, compute_froude, ShearProfile, VelocitySpec};
use shearwave::verdict::{BoundVerdict, Verdict};
use shearwave::waveio::canonical_json;
use shearwave::wavesolve::{residual, HeightField, StripGrid};

#[derive(Serialize, Deserialize)]
struct Holder {
    x: f64,
    v: Vec<f64>,
}

fn linear(c: f64, surface: f64, shear: f64) -> ShearProfile {
    ShearProfile::new(1.0, c, 1.0, VelocitySpec::Linear { surface, shear }).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn canonical_floats_round_trip(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO,
                                   v in proptest::collection::vec(-1e300..1e300f64, 0..8)) {
        let text = canonical_json(&Holder { x, v: v.clone() });
        let back: Holder = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back.x.to_bits(), x.to_bits());
        prop_assert_eq!(back.v.iter().map(|a| a.to_bits()).collect::<Vec<_>>(),
                        v.iter().map(|a| a.to_bits()).collect::<Vec<_>>());
        prop_assert_eq!(canonical_json(&back), text);
    }

    #[test]
    fn verdict_margin_matches_outcome(lhs in -10.0..10.0f64, rhs in -10.0..10.0f64) {
        for b in [BoundVerdict::less("a", lhs, rhs), BoundVerdict::greater("b", lhs, rhs)] {
            prop_assert_eq!(b.holds(), b.margin() > 0.0);
            prop_assert_eq!(b.is_failure(), b.verdict == Verdict::Fails);
        }
        prop_assert!(!BoundVerdict::less("c", lhs, rhs).informational().is_failure());
    }

    #[test]
    fn irrotational_bound_chain_holds(
        froude in 1.0001..1.15f64, amp in 0.0..0.3f64
    ) {
        // irrotational: Λ = 1, so the cap equals 2 and the surface-speed bound F²/2 sits below it
        let rows = check_bounds(&BoundInputs::irrotational_datum(froude, amp));
        let chain = rows.iter().find(|b| b.name.starts_with("(c - U(0))^2")).unwrap();
        prop_assert_eq!(chain.verdict, Verdict::Holds);
        let f_row = rows.iter().find(|b| b.name == "F > 1 (elevation)").unwrap();
        prop_assert_eq!(f_row.verdict, if amp >= 1e-10 { Verdict::Holds } else { Verdict::NotApplicable });
    }

    #[test]
    fn trivial_field_has_zero_residual(c in 1.2..3.0f64, surface in -0.2..0.2f64,
                                       shear in -0.3..0.3f64, sigma in 0.0..2.0f64) {
        let state = build_asymptotic_state(&linear(c, surface, shear), 17).unwrap();
        let grid = StripGrid::new(8.0, 21, 17, true).unwrap();
        let r = residual(&HeightField::trivial(&grid, &state), &state, sigma, &grid).unwrap();
        prop_assert!(r.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn froude_formulas_agree(c in 1.2..3.0f64, surface in -0.2..0.2f64, shear in -0.3..0.3f64) {
        let p = linear(c, surface, shear);
        let direct = compute_froude(&p).unwrap();
        let state = build_asymptotic_state(&p, 129).unwrap();
        prop_assert!((direct - state.froude_from_height()).abs() < 1e-8 * direct);
        prop_assert!(state.relation_residual() < 1e-8);
    }

    #[test]
    fn simpson_is_exact_for_cubics(n in 4usize..40, a in -2.0..2.0f64, b in -2.0..2.0f64,
                                   c in -2.0..2.0f64, d in -2.0..2.0f64) {
        let h = 1.0 / (n - 1) as f64;
        let f = |x: f64| a + b * x + c * x * x + d * x * x * x;
        let vals: Vec<f64> = (0..n).map(|k| f(k as f64 * h)).collect();
        let exact = a + b / 2.0 + c / 3.0 + d / 4.0;
        prop_assert!((simpson(&vals, h) - exact).abs() < 1e-12);
    }

    #[test]
    fn banded_solve_inverts_matvec(seed in proptest::collection::vec(-1.0..1.0f64, 60)) {
        let n = 12;
        let (kl, ku) = (2, 3);
        let mut m = BandMatrix::zeros(n, kl, ku);
        let mut k = 0;
        for i in 0..n {
            for j in i.saturating_sub(kl)..(i + ku + 1).min(n) {
                let v = if i == j { 8.0 } else { seed[k % seed.len()] };
                m.set(i, j, v);
                k += 1;
            }
        }
        let x: Vec<f64> = (0..n).map(|i| seed[i] + 0.5).collect();
        let mut b = m.matvec(&x);
        m.factor().unwrap().solve(&mut b);
        for (u, v) in b.iter().zip(&x) {
            prop_assert!((u - v).abs() < 1e-10);
        }
    }
}
