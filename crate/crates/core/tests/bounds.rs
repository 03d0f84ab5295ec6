use adcp::bounds::{
    cross_term_factor, detection_constants, detection_min_samples, inverse_gram_bound, matrix_budget,
    tensor_budget_schedule, tensor_total,
};
use proptest::prelude::*;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * b.abs().max(1.0)
}

// Reference values evaluated at 30 digits with an arbitrary-precision
// calculator.
#[test]
fn detection_constants_reference_point() {
    let c = detection_constants(80.0, 200, 5, 1.0, 1.0, 0.05);
    assert!(close(c.alpha, 0.298630850868548606593076110911));
    assert!(close(c.beta, 29.3983204860880142117364529191));
    assert!(close(c.gamma, 0.939708941334854374054214935179));
    assert!(close(c.lower_factor, -29.7740457973090628487849884828));
    assert!(close(c.upper_factor, 1.29863085086854860659307611091));
    assert!(c.in_regime);
    assert!(close(inverse_gram_bound(200, 80.0, c.gamma), 41.4655183596113346614331445299));
    assert!(close(cross_term_factor(80.0, 200, 5, 1.0, c.beta), 0.293983204860880142117364529191));
    assert!(close(detection_min_samples(5, 1.0, 0.05), 70.6442315539738223660428670777));
}

proptest! {
    #[test]
    fn gamma_is_one_at_the_minimum_sample_size(d in 1usize..50, mu in 1.0f64..10.0, delta in 0.001f64..0.49) {
        let m = detection_min_samples(d, mu, delta);
        let c = detection_constants(m, 1000, d, mu, 1.0, delta);
        prop_assert!((c.gamma - 1.0).abs() < 1e-12);
        prop_assert!(!detection_constants(m * 0.99, 1000, d, mu, 1.0, delta).in_regime);
    }

    #[test]
    fn budgets_monotone(r in 1usize..50, mu in 1.0f64..8.0, delta in 0.01f64..0.45, order in 2usize..5) {
        prop_assert!(matrix_budget(r + 1, mu, delta) > matrix_budget(r, mu, delta));
        prop_assert!(matrix_budget(r, mu * 1.1, delta) > matrix_budget(r, mu, delta));
        prop_assert!(matrix_budget(r, mu, delta * 0.9) > matrix_budget(r, mu, delta));
        let dims = vec![20; order];
        prop_assert!(tensor_total(r + 1, mu, delta, &dims) > tensor_total(r, mu, delta, &dims));
        let s = tensor_budget_schedule(r, mu, delta, order);
        for w in s.windows(2) {
            prop_assert!(((w[1] / w[0]) - r as f64 * mu).abs() <= 1e-12 * r as f64 * mu);
        }
    }

    #[test]
    fn detection_factors_tighten_with_m(m in 50.0f64..5000.0, d in 1usize..10) {
        let a = detection_constants(m, 500, d, 1.5, 2.0, 0.05);
        let b = detection_constants(2.0 * m, 500, d, 1.5, 2.0, 0.05);
        prop_assert!(b.alpha < a.alpha && b.gamma < a.gamma && b.beta < a.beta);
        prop_assert!(b.upper_factor < a.upper_factor);
        if a.in_regime {
            prop_assert!(b.lower_factor > a.lower_factor);
        }
    }
}
