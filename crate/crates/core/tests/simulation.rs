use dirrep::error_analysis::{mc_type1, mc_type3, simulate_event, sup_boundary};
use dirrep::{
    adaptive_r, directional_test, CombinerKind, ExtendedReal, ReplicabilityQuery, Rule, Sign, StudyVector,
    ThetaPoint,
};

fn within(est: f64, se: f64, bound: f64) -> bool {
    est <= bound + 3.0 * se.max(1e-6)
}

#[test]
fn null_calibration_at_zero() {
    let mut seed = 1000;
    for n in [3usize, 10, 20] {
        let mut rs = vec![2, n.div_ceil(2) + 1, n];
        rs.dedup();
        for r in rs {
            for combiner in CombinerKind::ALL {
                for alpha in [0.01, 0.05, 0.1] {
                    let q = ReplicabilityQuery::new(n, r, alpha, combiner, Rule::Auto).unwrap();
                    let est = mc_type1(&ThetaPoint::zeros(n).unwrap(), &q, 100_000, seed).unwrap();
                    seed += 1;
                    assert!(
                        within(est.estimate, est.std_error, alpha),
                        "n={n} r={r} {combiner} alpha={alpha}: {est:?}"
                    );
                }
            }
        }
    }
}

#[test]
fn simulator_agrees_with_directional_test() {
    let theta = [1.0, -0.5, 0.0, 2.0, 0.3, -1.2, 0.8];
    let point = ThetaPoint::from_f64(&theta).unwrap();
    for combiner in CombinerKind::ALL {
        for rule in [Rule::Min, Rule::Double] {
            let q = ReplicabilityQuery::new(7, 3, 0.1, combiner, rule).unwrap();
            let fast = mc_type1(&point, &q, 20_000, 5).unwrap();
            let slow = simulate_event(&point, 20_000, 5, |z| {
                let s = StudyVector::new(z.to_vec()).unwrap();
                directional_test(&s, &q).unwrap().reject
            })
            .unwrap();
            assert_eq!(fast, slow, "{combiner} {rule}");
        }
    }
}

#[test]
fn adaptive_bound_coverage() {
    let alpha = 0.1;
    let mut theta = vec![0.0; 10];
    theta[..6].fill(1.5);
    let point = ThetaPoint::from_f64(&theta).unwrap();
    let over = simulate_event(&point, 10_000, 21, |z| {
        let s = StudyVector::new(z.to_vec()).unwrap();
        adaptive_r(&s, alpha, CombinerKind::Bonferroni).unwrap().l > 6
    })
    .unwrap();
    assert!(within(over.estimate, over.std_error, alpha), "{over:?}");

    let null = simulate_event(&ThetaPoint::zeros(10).unwrap(), 10_000, 22, |z| {
        let s = StudyVector::new(z.to_vec()).unwrap();
        adaptive_r(&s, alpha, CombinerKind::Sidak).unwrap().l > 0
    })
    .unwrap();
    assert!(within(null.estimate, null.std_error, alpha), "{null:?}");
}

#[test]
fn min_rule_near_concordant_limit() {
    let alpha = 0.1;
    let q = ReplicabilityQuery::new(20, 11, alpha, CombinerKind::Bonferroni, Rule::Auto).unwrap();
    let point = ThetaPoint::boundary(20, 11, ExtendedReal::Finite(6.0)).unwrap();
    let est = simulate_event(&point, 100_000, 31, |z| {
        let s = StudyVector::new(z.to_vec()).unwrap();
        directional_test(&s, &q).unwrap().reject
    })
    .unwrap();
    let sup = sup_boundary(20, 11, alpha).unwrap();
    assert!(within(est.estimate, est.std_error, alpha));
    assert!((est.estimate - sup).abs() <= 3.0 * est.std_error, "{est:?} vs {sup}");
}

#[test]
fn type3_matches_wrong_sign_rejections() {
    let q = ReplicabilityQuery::new(20, 11, 0.1, CombinerKind::Bonferroni, Rule::Auto).unwrap();
    let mut theta = vec![0.0; 20];
    theta[..11].fill(0.5);
    let point = ThetaPoint::from_f64(&theta).unwrap();
    let direct = mc_type3(&point, &q, 50_000, 41).unwrap();
    let via_sign = simulate_event(&point, 50_000, 41, |z| {
        let s = StudyVector::new(z.to_vec()).unwrap();
        let res = directional_test(&s, &q).unwrap();
        res.reject && res.sign == Sign::Negative
    })
    .unwrap();
    assert_eq!(direct, via_sign);
    assert!(within(direct.estimate, direct.std_error, 0.1));

    let flipped: Vec<f64> = theta.iter().map(|x| -x).collect();
    let mirror = mc_type3(&ThetaPoint::from_f64(&flipped).unwrap(), &q, 50_000, 41).unwrap();
    assert!((mirror.estimate - direct.estimate).abs() <= 4.0 * direct.std_error.max(1e-5));
}
