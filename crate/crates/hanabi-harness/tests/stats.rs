use hanabi_harness::stats::{iqm, iqm_ci, mean, std_dev};
use proptest::prelude::*;

/// Independent IQM: repeat every score four times, then drop exactly n copies
/// from each end of the 4n list and average the 2n left. Works for any n.
fn iqm_by_replication(xs: &[f64]) -> f64 {
    let n = xs.len();
    let mut rep: Vec<f64> = xs.iter().flat_map(|&x| [x; 4]).collect();
    rep.sort_by(f64::total_cmp);
    rep[n..3 * n].iter().sum::<f64>() / (2 * n) as f64
}

#[test]
fn one_to_eight_is_four_and_a_half() {
    let xs: Vec<f64> = (1..=8).map(f64::from).collect();
    assert_eq!(iqm(&xs).unwrap(), 4.5);
    assert_eq!(iqm_by_replication(&xs), 4.5);
    assert_eq!(iqm_ci(&xs, 2000, 7).unwrap().iqm, 4.5);
}

#[test]
fn constant_vector_has_a_zero_width_interval() {
    for n in [4, 5, 10, 40] {
        let e = iqm_ci(&vec![15.0; n], 2000, 3).unwrap();
        assert_eq!((e.iqm, e.ci_low, e.ci_high), (15.0, 15.0, 15.0));
        assert!(!e.plain_mean);
    }
}

#[test]
fn seeded_bootstrap_repeats() {
    let xs = [3.0, 9.0, 14.0, 15.0, 15.0, 17.0, 18.0, 20.0, 21.0, 25.0];
    let a = iqm_ci(&xs, 2000, 11).unwrap();
    assert_eq!(a, iqm_ci(&xs, 2000, 11).unwrap());
    assert!(a.ci_low < a.iqm && a.iqm < a.ci_high);
}

#[test]
fn ten_equal_scores_mean_and_std() {
    let xs = [15.0; 10];
    assert_eq!((mean(&xs), std_dev(&xs)), (15.0, 0.0));
}

proptest! {
    #[test]
    fn matches_replication_oracle(xs in prop::collection::vec(0u8..=25, 1..40)) {
        let xs: Vec<f64> = xs.into_iter().map(f64::from).collect();
        prop_assert!((iqm(&xs).unwrap() - iqm_by_replication(&xs)).abs() < 1e-9);
    }

    #[test]
    fn permutation_invariant(xs in prop::collection::vec(0u8..=25, 4..30), seed in any::<u64>()) {
        let xs: Vec<f64> = xs.into_iter().map(f64::from).collect();
        let mut ys = xs.clone();
        ys.reverse();
        let k = (seed % ys.len() as u64) as usize;
        ys.rotate_left(k);
        prop_assert_eq!(iqm(&xs).unwrap(), iqm(&ys).unwrap());
    }

    #[test]
    fn interval_brackets_estimate(xs in prop::collection::vec(0u8..=25, 1..30), seed in any::<u64>()) {
        let xs: Vec<f64> = xs.into_iter().map(f64::from).collect();
        let e = iqm_ci(&xs, 200, seed).unwrap();
        let (lo, hi) = (xs.iter().cloned().fold(f64::MAX, f64::min), xs.iter().cloned().fold(f64::MIN, f64::max));
        prop_assert!(lo <= e.ci_low && e.ci_low <= e.iqm && e.iqm <= e.ci_high && e.ci_high <= hi);
        prop_assert_eq!(e.plain_mean, xs.len() < 4);
    }

    #[test]
    fn shift_and_scale_equivariant(xs in prop::collection::vec(0u8..=25, 4..30), a in -5i32..5, b in 1i32..4) {
        let xs: Vec<f64> = xs.into_iter().map(f64::from).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x * f64::from(b) + f64::from(a)).collect();
        prop_assert!((iqm(&ys).unwrap() - (iqm(&xs).unwrap() * f64::from(b) + f64::from(a))).abs() < 1e-9);
    }
}

proptest! {
    #[test]
    fn interval_ignores_input_order(xs in prop::collection::vec(0u8..=25, 1..30), seed in any::<u64>()) {
        let xs: Vec<f64> = xs.into_iter().map(f64::from).collect();
        let mut ys = xs.clone();
        ys.reverse();
        prop_assert_eq!(iqm_ci(&xs, 100, seed).unwrap(), iqm_ci(&ys, 100, seed).unwrap());
    }
}
