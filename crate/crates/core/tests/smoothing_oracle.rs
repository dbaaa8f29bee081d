use oneshot_info::smoothing::oracle::{oracle_smooth, SmoothOrder};
use oneshot_info::{
    renyi, smooth_conditional_h0, smooth_conditional_hneginf, smooth_h0, smooth_hinf, smooth_hneginf, Alphabet, Axis,
    EntropyOrder, JointPmf, Pmf,
};
use proptest::prelude::*;

fn normalize(raw: &[f64]) -> Vec<f64> {
    let total: f64 = raw.iter().sum();
    raw.iter().map(|w| w / total).collect()
}

fn weights(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    // Zeros exercise the "mass may move onto empty cells" path.
    prop::collection::vec(prop_oneof![1 => Just(0.0), 6 => 0.01f64..1.0], 2..=max_len)
        .prop_filter("needs positive mass", |w| w.iter().any(|&x| x > 0.0))
}

fn joint_2x3(w: &[f64]) -> JointPmf {
    JointPmf::from_dense(
        vec![Axis::new("X", Alphabet::range(3)), Axis::new("Y", Alphabet::range(2))],
        &normalize(w),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn unconditional_smoothers_match_oracle(w in weights(7), eps in 0.0f64..0.6) {
        let p = Pmf::new(Alphabet::range(w.len()), &normalize(&w)).unwrap();
        for (fast, order) in [
            (smooth_h0(&p, eps).unwrap(), SmoothOrder::Zero),
            (smooth_hinf(&p, eps).unwrap(), SmoothOrder::Infinity),
            (smooth_hneginf(&p, eps).unwrap(), SmoothOrder::NegInfinity),
        ] {
            let slow = oracle_smooth(&p, eps, order, None).unwrap();
            prop_assert!((fast.value_bits - slow.value_bits).abs() < 1e-9,
                "{order:?}: fast {} oracle {}", fast.value_bits, slow.value_bits);
            prop_assert!(fast.moved_mass <= eps + 1e-9);
            prop_assert!(slow.moved_mass <= eps + 1e-9);
        }
    }

    #[test]
    fn smoothing_is_monotone_in_eps(w in weights(8), a in 0.0f64..0.5, b in 0.0f64..0.5) {
        let p = Pmf::new(Alphabet::range(w.len()), &normalize(&w)).unwrap();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(smooth_h0(&p, hi).unwrap().value_bits <= smooth_h0(&p, lo).unwrap().value_bits + 1e-12);
        prop_assert!(smooth_hinf(&p, hi).unwrap().value_bits >= smooth_hinf(&p, lo).unwrap().value_bits - 1e-12);
        prop_assert!(smooth_hneginf(&p, hi).unwrap().value_bits <= smooth_hneginf(&p, lo).unwrap().value_bits + 1e-12);
    }

    #[test]
    fn zero_radius_is_plain_entropy(w in weights(8)) {
        let p = Pmf::new(Alphabet::range(w.len()), &normalize(&w)).unwrap();
        prop_assert_eq!(smooth_h0(&p, 0.0).unwrap().value_bits, renyi(&p, EntropyOrder::Zero));
        prop_assert!((smooth_hinf(&p, 0.0).unwrap().value_bits - renyi(&p, EntropyOrder::Infinity)).abs() < 1e-12);
        prop_assert!((smooth_hneginf(&p, 0.0).unwrap().value_bits - renyi(&p, EntropyOrder::NegInfinity)).abs() < 1e-12);
    }

    #[test]
    fn conditional_greedy_bounds_oracle(w in prop::collection::vec(0.0f64..1.0, 6)
            .prop_filter("positive", |w| w.iter().filter(|&&x| x > 0.0).count() >= 2),
        eps in 0.0f64..0.4) {
        let j = joint_2x3(&w);
        let fast = smooth_conditional_h0(&j, "X", "Y", eps).unwrap();
        let slow = oracle_smooth(&j, eps, SmoothOrder::Zero, Some(("X", "Y"))).unwrap();
        prop_assert!(fast.value_bits >= slow.value_bits - 1e-9);
        prop_assert!(fast.moved_mass <= eps + 1e-9);

        let fast = smooth_conditional_hneginf(&j, "X", "Y", eps).unwrap();
        let slow = oracle_smooth(&j, eps, SmoothOrder::NegInfinity, Some(("X", "Y"))).unwrap();
        prop_assert!(fast.value_bits >= slow.value_bits - 1e-6,
            "greedy {} below oracle {}", fast.value_bits, slow.value_bits);
        prop_assert!(fast.moved_mass <= eps + 1e-9);
        prop_assert!(slow.moved_mass <= eps + 1e-6);
    }
}

#[test]
fn conditional_oracle_at_zero_radius() {
    let j = joint_2x3(&[0.1, 0.2, 0.05, 0.3, 0.15, 0.2]);
    for (order, plain) in [
        (SmoothOrder::Zero, EntropyOrder::Zero),
        (SmoothOrder::Infinity, EntropyOrder::Infinity),
        (SmoothOrder::NegInfinity, EntropyOrder::NegInfinity),
    ] {
        let v = oracle_smooth(&j, 0.0, order, Some(("X", "Y"))).unwrap().value_bits;
        let direct = oneshot_info::renyi_conditional(&j, "X", "Y", plain).unwrap();
        assert!((v - direct).abs() < 1e-6, "{order:?}: {v} vs {direct}");
    }
}

#[test]
fn conditional_hinf_oracle_smooths_peak() {
    // Worst row is y=0 with conditional peak 0.4/0.55.
    let j = JointPmf::from_dense(
        vec![Axis::new("X", Alphabet::range(3)), Axis::new("Y", Alphabet::range(2))],
        &[0.4, 0.1, 0.0, 0.2, 0.15, 0.15],
    )
    .unwrap();
    let v = oracle_smooth(&j, 0.1, SmoothOrder::Infinity, Some(("X", "Y"))).unwrap().value_bits;
    assert!(v > -(0.4f64 / 0.55).log2() + 0.1, "{v}");
}
