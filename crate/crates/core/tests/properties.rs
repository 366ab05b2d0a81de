use monosort::harness::{measure_error_bound, sup_distance};
use monosort::{forward, hard_sort, NetworkPlan, PlanFamily, SigmoidKind, SigmoidSpec, SwapConfig};
use proptest::prelude::*;

fn kind() -> impl Strategy<Value = SigmoidKind> {
    prop::sample::select(SigmoidKind::ALL.to_vec())
}

fn monotonic_kind() -> impl Strategy<Value = SigmoidKind> {
    prop::sample::select(SigmoidKind::MONOTONIC.to_vec())
}

fn plan() -> impl Strategy<Value = NetworkPlan> {
    prop_oneof![
        (1usize..=9).prop_map(|n| NetworkPlan::odd_even(n).unwrap()),
        prop::sample::select(vec![2usize, 4, 8, 16]).prop_map(|n| NetworkPlan::bitonic(n).unwrap()),
    ]
}

/// A plan with a matching input vector.
fn case() -> impl Strategy<Value = (NetworkPlan, Vec<f64>)> {
    plan().prop_flat_map(|p| {
        let n = p.n();
        (Just(p), prop::collection::vec(-50.0f64..50.0, n))
    })
}

fn beta() -> impl Strategy<Value = f64> {
    (-2.0f64..3.0).prop_map(|e| 10f64.powf(e))
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn output_sum_is_preserved((plan, x) in case(), kind in kind(), beta in beta()) {
        let r = forward(&x, &plan, &SwapConfig::new(kind, beta).unwrap()).unwrap();
        let (a, b): (f64, f64) = (x.iter().sum(), r.x_hat().iter().sum());
        prop_assert!((a - b).abs() <= 1e-9 * (1.0 + x.iter().map(|v| v.abs()).sum::<f64>()));
    }

    #[test]
    fn p_is_doubly_stochastic_and_reproduces_output((plan, x) in case(), kind in kind(), beta in beta()) {
        let r = forward(&x, &plan, &SwapConfig::new(kind, beta).unwrap()).unwrap();
        let p = r.p();
        for s in p.sum_axis(ndarray::Axis(0)).iter().chain(p.sum_axis(ndarray::Axis(1)).iter()) {
            prop_assert!((s - 1.0).abs() <= 1e-9);
        }
        prop_assert!(p.iter().all(|&v| (-1e-12..=1.0 + 1e-12).contains(&v)));
        let px = p.dot(&ndarray::Array1::from(x.clone()));
        for (u, v) in px.iter().zip(r.x_hat()) {
            prop_assert!((u - v).abs() <= 1e-9 * (1.0 + v.abs()));
        }
    }

    #[test]
    fn shifting_inputs_shifts_outputs((plan, x) in case(), kind in kind(), beta in beta(), c in -100.0f64..100.0) {
        let cfg = SwapConfig::new(kind, beta).unwrap();
        let r = forward(&x, &plan, &cfg).unwrap();
        let shifted: Vec<f64> = x.iter().map(|v| v + c).collect();
        let s = forward(&shifted, &plan, &cfg).unwrap();
        for (a, b) in r.x_hat().iter().zip(s.x_hat()) {
            prop_assert!((a + c - b).abs() <= 1e-9 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn jacobian_rows_sum_to_one((plan, x) in case(), kind in kind(), beta in beta()) {
        let jac = forward(&x, &plan, &SwapConfig::new(kind, beta).unwrap()).unwrap().jacobian().unwrap();
        for row in jac.rows() {
            prop_assert!((row.sum() - 1.0).abs() <= 1e-8);
        }
    }

    #[test]
    fn monotone_kinds_have_nonnegative_jacobians((plan, x) in case(), kind in monotonic_kind(), beta in beta()) {
        let jac = forward(&x, &plan, &SwapConfig::new(kind, beta).unwrap()).unwrap().jacobian().unwrap();
        prop_assert!(jac.iter().all(|&v| v >= -1e-8));
    }

    #[test]
    fn backward_is_linear((plan, x) in case(), kind in kind(), beta in beta(), seed in 0u64..1000) {
        let r = forward(&x, &plan, &SwapConfig::new(kind, beta).unwrap()).unwrap();
        let n = x.len();
        let g1: Vec<f64> = (0..n).map(|i| ((i as u64 + seed) as f64 * 0.7).sin()).collect();
        let g2: Vec<f64> = (0..n).map(|i| ((i as u64 * 3 + seed) as f64 * 1.3).cos()).collect();
        let sum: Vec<f64> = g1.iter().zip(&g2).map(|(a, b)| a + b).collect();
        let (a, b, c) = (r.backward(&g1, None).unwrap(), r.backward(&g2, None).unwrap(), r.backward(&sum, None).unwrap());
        for i in 0..n {
            prop_assert!((a[i] + b[i] - c[i]).abs() <= 1e-9 * (1.0 + c[i].abs()));
        }
    }

    #[test]
    fn error_stays_within_layers_times_swap_bound((plan, x) in case(), kind in monotonic_kind(), beta in beta()) {
        let cfg = SwapConfig::new(kind, beta).unwrap();
        let eps = measure_error_bound(SigmoidSpec::new(kind), beta).unwrap().measured_sup;
        let r = forward(&x, &plan, &cfg).unwrap();
        prop_assert!(sup_distance(r.x_hat(), &hard_sort(&x)) <= plan.layer_count() as f64 * eps + 1e-9);
    }

    #[test]
    fn hard_networks_sort((plan, x) in case()) {
        let mut v = x.clone();
        plan.hard_execute(&mut v);
        prop_assert_eq!(v, hard_sort(&x));
    }

    #[test]
    fn plan_text_round_trips(n in 1usize..40, bitonic in any::<bool>()) {
        let family = if bitonic { PlanFamily::Bitonic } else { PlanFamily::OddEven };
        let n = if bitonic { n.next_power_of_two().max(2) } else { n };
        let p = family.build(n).unwrap();
        prop_assert_eq!(NetworkPlan::from_text(&p.to_text()).unwrap(), p);
    }

    #[test]
    fn sigmoids_are_symmetric(kind in kind(), z in -1e3f64..1e3) {
        let s = SigmoidSpec::new(kind);
        prop_assert!((s.eval(z).unwrap() + s.eval(-z).unwrap() - 1.0).abs() <= 1e-12);
    }
}
