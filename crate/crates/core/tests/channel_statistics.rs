use modlab::channel::{
    c_from_snr_db, params_from_snr_db, rescale, snr_db_from_c, transmit, transmit_all_one_scaled,
    trial_rng, CodeParams, ReceivedBlock,
};
use proptest::prelude::*;

#[test]
fn rescaled_moments_equal_delta() {
    let params = CodeParams::from_c(64, 3.0).unwrap();
    let mut block = ReceivedBlock::new(64, vec![0.0; params.n], true).unwrap();
    let (mut sum, mut sum_sq, mut count) = (0.0, 0.0, 0.0);
    for trial in 0..100 {
        transmit_all_one_scaled(&mut block, &params, &mut trial_rng(21, trial));
        for &z in block.values() {
            sum += z;
            sum_sq += z * z;
            count += 1.0;
        }
    }
    let delta = params.delta;
    let spread = delta * delta * params.sigma2;
    let se_mean = (spread / count).sqrt();
    let fourth = delta.powi(4) + 6.0 * delta * delta * spread + 3.0 * spread * spread;
    let se_power = ((fourth - delta * delta) / count).sqrt();
    assert!((sum / count - delta).abs() < 5.0 * se_mean);
    assert!((sum_sq / count - delta).abs() < 5.0 * se_power);
}

#[test]
fn transmit_then_rescale_is_reproducible() {
    let params = params_from_snr_db(16, 1.0).unwrap();
    let word = vec![1i8; params.n];
    let a = rescale(&transmit(&word, &params, 4).unwrap(), &params).unwrap();
    let b = rescale(&transmit(&word, &params, 4).unwrap(), &params).unwrap();
    let c = rescale(&transmit(&word, &params, 5).unwrap(), &params).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}

proptest! {
    #[test]
    fn snr_conversion_round_trips(snr in -10.0f64..20.0, m in 2usize..500) {
        let params = params_from_snr_db(m, snr).unwrap();
        prop_assert!((params.snr_db() - snr).abs() < 1e-9);
        prop_assert!((snr_db_from_c(c_from_snr_db(snr)) - snr).abs() < 1e-9);
        prop_assert!((params.c - 4.0 * 10f64.powf(snr / 10.0)).abs() < 1e-9 * params.c);
        prop_assert!(params.delta > 0.0 && params.delta < 1.0);
    }
}
