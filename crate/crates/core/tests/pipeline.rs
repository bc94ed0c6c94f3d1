//! End-to-end flows through the public API: parse -> split -> train ->
//! evaluate, for each optimizer and model kind.

use std::io::Cursor;

use gsa_core::baselines::{
    adadelta_train, scsg_train, sgd_train, AdadeltaState, ScsgConfig, SgdConfig,
};
use gsa_core::data::{parse_libsvm, split_train_test, ParseOptions, Task};
use gsa_core::gsa::{gsa_train, GsaConfig};
use gsa_core::metrics::evaluate;
use gsa_core::models::{LinearModel, ModelKind};
use gsa_core::synth::{blobs, noisy_linear};

fn blobs_as_libsvm(n: usize, seed: u64) -> String {
    blobs(n, seed).to_libsvm_string()
}

#[test]
fn parse_split_train_evaluate_logistic() {
    let text = blobs_as_libsvm(300, 41);
    let full = parse_libsvm(Cursor::new(text), &ParseOptions::default()).unwrap();
    let (train, test) = split_train_test(&full, 0.2, 7).unwrap();
    assert_eq!(train.len() + test.len(), 300);

    let mut model = LinearModel::zeros(ModelKind::Logistic, train.n_features, 2).unwrap();
    let mut losses = Vec::new();
    gsa_train(&mut model, &train, 5, 7, &GsaConfig::default(), |_, m| {
        losses.push(evaluate(m, &test).unwrap().loss);
    })
    .unwrap();

    let eval = evaluate(&model, &test).unwrap();
    assert!(!eval.diverged);
    assert!(eval.precision.unwrap() > 0.95, "precision {:?}", eval.precision);
    assert!(eval.auc.unwrap() > 0.97, "auc {:?}", eval.auc);
    assert!(losses.last().unwrap() < &losses[0]);
}

#[test]
fn every_optimizer_trains_the_same_data() {
    let data = blobs(240, 42);
    let (train, test) = split_train_test(&data, 0.25, 3).unwrap();

    let eval_of = |model: &LinearModel| evaluate(model, &test).unwrap();

    let mut gsa_model = LinearModel::zeros(ModelKind::Logistic, train.n_features, 2).unwrap();
    gsa_train(&mut gsa_model, &train, 4, 9, &GsaConfig::default(), |_, _| {}).unwrap();
    assert!(eval_of(&gsa_model).precision.unwrap() > 0.9);

    let mut sgd_model = LinearModel::zeros(ModelKind::Logistic, train.n_features, 2).unwrap();
    sgd_train(&mut sgd_model, &train, 4, 9, &SgdConfig::new(0.5).unwrap(), |_, _| {}).unwrap();
    assert!(eval_of(&sgd_model).precision.unwrap() > 0.9);

    let mut ada_model = LinearModel::zeros(ModelKind::Logistic, train.n_features, 2).unwrap();
    let mut state = AdadeltaState::new(1e-2, &ada_model).unwrap();
    adadelta_train(&mut ada_model, &train, 4, 9, &mut state, |_, _| {}).unwrap();
    assert!(eval_of(&ada_model).precision.unwrap() > 0.9);

    let mut scsg_model = LinearModel::zeros(ModelKind::Logistic, train.n_features, 2).unwrap();
    scsg_train(&mut scsg_model, &train, 4, 9, &ScsgConfig::new(0.5, 30).unwrap(), |_, _| {})
        .unwrap();
    assert!(eval_of(&scsg_model).precision.unwrap() > 0.9);
}

#[test]
fn linear_regression_recovers_weights() {
    let truth = [1.5, -2.0, 0.75];
    let intercept = 0.4;
    let data = noisy_linear(500, &truth, intercept, 0.01, 17);
    let mut model = LinearModel::zeros(ModelKind::Linear, data.n_features, 1).unwrap();
    gsa_train(&mut model, &data, 8, 5, &GsaConfig::default(), |_, _| {}).unwrap();
    let weights = model.rows()[0].as_slice();
    for (got, want) in weights.iter().zip(&truth) {
        assert!((got - want).abs() < 0.05, "recovered {got} vs {want}");
    }
    assert!((weights[3] - intercept).abs() < 0.05, "intercept {}", weights[3]);
    let eval = evaluate(&model, &data).unwrap();
    assert!(eval.loss < 1e-3, "quadratic loss {}", eval.loss);
    assert_eq!(eval.precision, None);
}

#[test]
fn multiclass_softmax_on_synthetic_grid() {
    // Three well-separated clusters along one axis, softmax with L = 3.
    let mut text = String::new();
    let mut rng_state = 123456789u64;
    let mut next = || {
        rng_state = rng_state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (rng_state >> 33) as f64 / (1u64 << 31) as f64 - 0.5
    };
    for i in 0..360 {
        let class = i % 3;
        let center = class as f64 * 4.0;
        text.push_str(&format!("{} 1:{} 2:{}\n", class, center + next(), next()));
    }
    let opts = ParseOptions { add_bias: true, task: Task::Classification };
    let full = parse_libsvm(Cursor::new(text), &opts).unwrap();
    let (train, test) = split_train_test(&full, 0.2, 11).unwrap();
    assert_eq!(full.n_classes, 3);

    let mut model = LinearModel::zeros(ModelKind::Softmax, train.n_features, 3).unwrap();
    gsa_train(&mut model, &train, 6, 2, &GsaConfig::default(), |_, _| {}).unwrap();
    let eval = evaluate(&model, &test).unwrap();
    assert!(eval.precision.unwrap() > 0.95, "precision {:?}", eval.precision);
    assert_eq!(eval.auc, None);
}
