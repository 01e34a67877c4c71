use proptest::prelude::*;
use sasaki_monopole::bundle::radial_exp_gauge;
use sasaki_monopole::linalg::{identity, inverse, Endo};
use sasaki_monopole::regularity::{fit_exponent, hoelder_constant, GaugeSampleSet, Region};
use sasaki_monopole::rng;
use sasaki_monopole::sphere::{SpherePoint, DEFAULT_BASEPOINT};

fn base() -> SpherePoint {
    SpherePoint::new(DEFAULT_BASEPOINT).unwrap()
}

fn sampled(exponent: f64, samples: usize, seed: u64) -> GaugeSampleSet {
    let region = Region { center: base(), inner: 1e-5, outer: 0.5, samples, seed };
    GaugeSampleSet::from_gauge(radial_exp_gauge(base(), exponent).as_ref(), &region).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn hoelder_constant_ignores_sample_order(seed in 0u64..1000, alpha in 0.05f64..1.0) {
        let set = sampled(0.5, 40, seed);
        let mut rev = set.clone();
        rev.samples.reverse();
        let (a, b) = (hoelder_constant(&set, alpha).unwrap(), hoelder_constant(&rev, alpha).unwrap());
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
    }

    #[test]
    fn hoelder_constant_grows_with_the_sample(seed in 0u64..1000, alpha in 0.05f64..1.0, keep in 2usize..40) {
        let set = sampled(0.5, 40, seed);
        let mut sub = set.clone();
        sub.samples.truncate(keep);
        prop_assert!(hoelder_constant(&sub, alpha).unwrap() <= hoelder_constant(&set, alpha).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn fitted_exponent_is_stable_on_the_gauge_orbit(seed in 0u64..1000, exponent in 0.3f64..0.8) {
        let set = sampled(exponent, 400, seed);
        let g: Endo = identity(2) + rng::gl(&mut rng::stream(seed, 1), 2, 0.3);
        let gi = inverse(&g).unwrap();
        let alpha = fit_exponent(&set).unwrap().alpha;
        let variants = [
            set.map(|r| Ok(&g * r * &gi)).unwrap(),
            set.map(|r| Ok(r * &g)).unwrap(),
            set.map(|r| Ok(inverse(r).unwrap())).unwrap(),
        ];
        for v in &variants {
            let a = fit_exponent(v).unwrap().alpha;
            prop_assert!((a - alpha).abs() < 0.1, "{a} vs {alpha}");
        }
    }
}

#[test]
fn exponent_fit_recovers_the_generating_exponent() {
    for e in [0.3, 0.6, 0.9] {
        let fit = fit_exponent(&sampled(e, 600, 11)).unwrap();
        assert!((fit.alpha - e).abs() < 0.05, "{e}: {fit:?}");
    }
}
