use proptest::prelude::*;
use specwave::estimator::{tau_for, Part, ShiftGrid};
use specwave::pathgen::{draw_times, simulate_path, SampledPath};
use specwave::quadvar::{hurst_from_spectral_slope, loglog_fit};
use specwave::{estimate_density, EstimatorConfig, MotherWavelet, SamplingScheme, SpectralModel, WaveletShape};

fn path(h: f64, n: usize, seed: u64) -> SampledPath {
    let times = draw_times(&SamplingScheme::exponential(1.0).unwrap(), n, seed);
    simulate_path(&SpectralModel::fbm(h).unwrap(), &times, seed).unwrap()
}

fn config(path: &SampledPath, part: Part) -> (MotherWavelet, EstimatorConfig) {
    let cfg = EstimatorConfig {
        frequencies: vec![0.1, 0.3, 0.8],
        shifts: Some(60),
        part,
        ..EstimatorConfig::default()
    };
    let lambda = tau_for(path.horizon(), cfg.rho).powf(cfg.alpha);
    (MotherWavelet::new(WaveletShape::Bump, lambda / 4.0).unwrap(), cfg)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn estimate_is_nonnegative_and_quadratic(
        h in 0.1f64..0.9,
        seed in 0u64..1000,
        c in 0.01f64..100.0,
        cosine in any::<bool>(),
    ) {
        let p = path(h, 600, seed);
        let part = if cosine { Part::CosineOnly } else { Part::Modulus };
        let (m, cfg) = config(&p, part);
        let a = estimate_density(&p, &m, &cfg).unwrap();
        let b = estimate_density(&p.scaled(c), &m, &cfg).unwrap();
        for (x, y) in a.rows.iter().zip(&b.rows) {
            prop_assert!(x.fhat >= 0.0);
            prop_assert!(x.ci_lo <= x.fhat && x.fhat <= x.ci_hi);
            prop_assert!((y.fhat - c * c * x.fhat).abs() <= 1e-12 * c * c * x.fhat);
        }
    }

    #[test]
    fn mean_shift_stays_within_bound(seed in 0u64..1000, c in -1e3f64..1e3) {
        let p = path(0.4, 600, seed);
        let (m, cfg) = config(&p, Part::Modulus);
        let a = estimate_density(&p, &m, &cfg).unwrap();
        let b = estimate_density(&p.shifted(c), &m, &cfg).unwrap();
        for (x, y) in a.rows.iter().zip(&b.rows) {
            let bound = a.mean_shift_bound(x, c);
            prop_assert!((y.fhat - x.fhat).abs() <= bound + 1e-12 * x.fhat);
        }
    }

    #[test]
    fn shift_grid_is_symmetric(t in 50.0f64..1e5, rho in 0.76f64..0.99, n in 2usize..500) {
        let Ok(g) = ShiftGrid::new(t, rho, n) else { return Ok(()) };
        let b = g.shifts();
        prop_assert_eq!(b.len(), n);
        prop_assert_eq!(b[0], t.powf(rho));
        prop_assert_eq!(b[n - 1], t - t.powf(rho));
        for k in 0..n {
            prop_assert!((b[k] + b[n - 1 - k] - t).abs() <= 1e-9 * t);
        }
    }

    #[test]
    fn loglog_fit_recovers_power_laws(slope in -3.0f64..-1.0, scale in 0.1f64..10.0) {
        let pts: Vec<(f64, f64)> = (1..12).map(|k| {
            let x = 0.05 * 1.3f64.powi(k);
            (x, scale * x.powf(slope))
        }).collect();
        let fit = loglog_fit(&pts, None).unwrap();
        prop_assert!((fit.slope - slope).abs() < 1e-10);
        prop_assert!((hurst_from_spectral_slope(fit.slope) - (-slope - 1.0) / 2.0).abs() < 1e-10);
    }
}

#[test]
fn seeds_are_independent_of_path_length() {
    // replicate r's first observations do not depend on how many follow
    let a = path(0.3, 100, 5);
    let b = path(0.3, 100, 5);
    assert_eq!(a, b);
    let t_short = draw_times(&SamplingScheme::exponential(1.0).unwrap(), 50, 5);
    let t_long = draw_times(&SamplingScheme::exponential(1.0).unwrap(), 100, 5);
    assert_eq!(t_short[..], t_long[..51]);
}

#[test]
fn horizon_too_short_is_reported() {
    let p = path(0.3, 10, 1);
    let (m, cfg) = config(&path(0.3, 600, 1), Part::Modulus);
    assert!(estimate_density(&p, &m, &cfg).is_err());
}
