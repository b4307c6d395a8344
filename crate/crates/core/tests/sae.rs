mod common;

use ndarray::Array2;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ras_core::embed::{minmax_fit_transform, EmbeddingMatrix, EmbeddingSource};
use ras_core::sae::{self, gradient_check, train_layerwise, SaeConfig, SaeModel};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn backprop_agrees_with_central_differences(seed in any::<u64>()) {
        let (model, batch, _) = common::smooth_gradcheck_case(seed);
        for h in [1e-5, 1e-6] {
            let err = gradient_check(&model, &batch, h).unwrap();
            prop_assert!(err <= 1e-6, "h = {h}: relative error {err:e}");
        }
    }

    #[test]
    fn codes_are_finite_and_nonnegative(seed in any::<u64>()) {
        let (model, _, _) = common::smooth_gradcheck_case(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = Array2::from_shape_fn((5, model.input_dim()), |_| rng.random::<f64>());
        let codes = sae::encode(&model, &data).unwrap();
        prop_assert!(codes.iter().all(|v| v.is_finite() && *v >= 0.0));
        let pass = sae::forward(&model, &data).unwrap();
        prop_assert!(pass.reconstruction.iter().all(|v| *v > 0.0 && *v < 1.0));
        prop_assert_eq!(codes, sae::encode(&model, &data).unwrap());
    }

    #[test]
    fn model_json_round_trips(seed in any::<u64>()) {
        let (model, _, _) = common::smooth_gradcheck_case(seed);
        let text = model.to_json();
        let back = SaeModel::from_json(&text).unwrap();
        prop_assert_eq!(&back, &model);
        prop_assert_eq!(back.to_json(), text);
    }
}

#[test]
fn constant_data_is_memorized() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let v: Vec<f64> = (0..768).map(|_| rng.random::<f64>()).collect();
    let data = Array2::from_shape_fn((200, 768), |(_, j)| v[j]);
    let (model, log) = train_layerwise(&SaeConfig::default(), &data).unwrap();
    assert_eq!(log.phases.len(), 6);
    assert!(log.phases.iter().all(|p| p.epochs.len() == 30));
    let pass = sae::forward(&model, &data).unwrap();
    let worst = pass
        .reconstruction
        .row(0)
        .iter()
        .zip(&v)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(worst <= 0.05, "max abs reconstruction error {worst}");
}

#[test]
fn finetune_trend_on_blobs() {
    let b = common::blobs(40, 3);
    let m = EmbeddingMatrix::new(b.ids, b.data, EmbeddingSource::External).unwrap();
    let (scaled, _) = minmax_fit_transform(&m).unwrap();
    let config = SaeConfig {
        epochs: 20,
        ..SaeConfig::default()
    };
    let (_, log) = train_layerwise(&config, &scaled.data).unwrap();
    let ft = log.finetune().unwrap();
    assert!(ft.epochs.last().unwrap().loss <= ft.epochs[0].loss);
    assert!(log.phases.iter().flat_map(|p| &p.epochs).all(|r| r.loss.is_finite()));
}
