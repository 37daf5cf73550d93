use proptest::prelude::*;
use skewpmc::pmc::{diagnose, resample, Resampling};
use skewpmc::stats::RngStream;

proptest! {
    #[test]
    fn entropy_ignores_weight_scale(
        lw in proptest::collection::vec(-30.0f64..30.0, 2..60),
        shift in -500.0f64..500.0,
    ) {
        let shifted: Vec<f64> = lw.iter().map(|x| x + shift).collect();
        let (a, _) = diagnose(1, &lw).unwrap();
        let (b, _) = diagnose(1, &shifted).unwrap();
        prop_assert!((a.entropy - b.entropy).abs() < 1e-9);
        prop_assert!((b.log_evidence_increment - a.log_evidence_increment - shift).abs() < 1e-9);
        prop_assert!(a.perplexity > 0.0 && a.perplexity <= 1.0);
        prop_assert!(a.entropy >= 0.0 && a.entropy <= (lw.len() as f64).ln() + 1e-12);
    }

    #[test]
    fn offspring_come_from_positive_weights(
        raw in proptest::collection::vec(0.0f64..1.0, 1..40),
        seed in any::<u64>(),
        systematic in any::<bool>(),
    ) {
        let mut w = raw.clone();
        w[0] += 1e-3;
        let total: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x /= total);
        let scheme = if systematic { Resampling::Systematic } else { Resampling::Multinomial };
        let idx = resample(&w, 25, scheme, &mut RngStream::new(seed, 0));
        prop_assert_eq!(idx.len(), 25);
        prop_assert!(idx.iter().all(|&i| i < w.len() && w[i] > 0.0));
    }
}
