use modlab::analysis::{
    default_c_grid, fixed_point, frozen_decoder_ber, frozen_fixed_point, min_snr,
    ml_ber_lower_bound, moment_map, offset_moments, soft_decoder_ber, soft_decoder_ber_finite,
    BoundCurve, BoundKind,
};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn consistent_offsets_keep_mean_and_power_equal() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..200 {
        let x: f64 = rng.random_range(1e-4..0.999);
        let c: f64 = rng.random_range(0.1..20.0);
        let (f, g) = offset_moments(x, x.sqrt(), c).unwrap();
        assert!((f - g).abs() < 1e-8, "x={x} c={c}: F={f} G={g}");
        assert!((f - moment_map(x, c)).abs() < 1e-12);
    }
}

#[test]
fn moment_map_is_increasing_concave_and_below_one() {
    for &c in &[0.5, 1.0, 2.0, 4.0, 16.0] {
        let values: Vec<f64> = (0..=200).map(|k| moment_map(k as f64 / 200.0, c)).collect();
        assert!(values.iter().all(|&r| (0.0..1.0).contains(&r)), "c={c}");
        assert!(
            values.windows(2).all(|w| w[1] > w[0]),
            "c={c}: not increasing"
        );
        let second: Vec<f64> = values
            .windows(3)
            .map(|w| w[2] - 2.0 * w[1] + w[0])
            .collect();
        assert!(second.iter().all(|&d| d < 1e-12), "c={c}: not concave");
        assert!(moment_map(0.3, c) + moment_map(-0.3, c) == 0.0);
    }
}

#[test]
fn frozen_system_reduces_to_the_plain_fixed_point() {
    for &c in &[1.5, 2.0, 4.0, 9.0] {
        let x = fixed_point(c).unwrap().positive_root().unwrap();
        let frozen = frozen_fixed_point(0.0, c).unwrap();
        assert!((frozen.effective - x).abs() < 1e-9, "c={c}");
        let mut last = x;
        for k in 1..10 {
            let lambda = k as f64 / 10.0;
            let effective = frozen_fixed_point(lambda, c).unwrap().effective;
            assert!(effective > last && effective >= lambda);
            last = effective;
        }
    }
}

#[test]
fn bounds_are_ordered_on_a_grid() {
    for k in 0..=12 {
        let snr = -1.0 + 0.5 * k as f64;
        let c = 4.0 * 10f64.powf(snr / 10.0);
        let ml = ml_ber_lower_bound(c);
        let soft = soft_decoder_ber(c).unwrap();
        let finite = soft_decoder_ber_finite(c, 128).unwrap();
        assert!(ml < soft && ml < finite, "snr={snr}");
        assert!(finite < 0.5 && soft < 0.5);
        // Freezing more bits can only help.
        assert!(frozen_decoder_ber(0.5, c).unwrap() < frozen_decoder_ber(0.25, c).unwrap());
    }
}

#[test]
fn bound_curves_fall_with_snr() {
    let grid: Vec<f64> = (0..=10).map(|k| k as f64 * 0.5).collect();
    for kind in [
        BoundKind::MlLower,
        BoundKind::SoftAsymptotic,
        BoundKind::SoftFinite { m: 128 },
        BoundKind::Frozen { lambda: 0.5 },
    ] {
        let curve = BoundCurve::tabulate(kind, &grid).unwrap();
        assert!(
            curve.values().windows(2).all(|w| w[1] < w[0]),
            "{}",
            kind.label()
        );
    }
}

#[test]
fn minimum_snr_decreases_with_depth() {
    let grid = default_c_grid();
    let kappas: Vec<f64> = [5, 20, 100]
        .iter()
        .map(|&b| min_snr(b, &grid).unwrap().kappa_db)
        .collect();
    assert!(kappas.windows(2).all(|w| w[1] < w[0]), "{kappas:?}");
    assert!(kappas.iter().all(|&k| k > -1.5918));
}
