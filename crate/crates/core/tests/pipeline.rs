use popgraph_core::builders::{build, BuilderConfig};
use popgraph_core::cohort::{generate_synthetic, load_cohort, sidecar_path, split, write_cohort, PhenotypeSchema, SplitFractions, SyntheticConfig};
use popgraph_core::harness::{evaluate, train, TrainConfig};
use popgraph_core::models::{forward, Architecture, Checkpoint, ModelConfig};
use popgraph_core::BuilderMethod;

#[test]
fn cohort_csv_round_trips_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let cohort = generate_synthetic(&SyntheticConfig {
        subjects: 40,
        imaging_features: 6,
        seed: 3,
        ..SyntheticConfig::default()
    })
    .unwrap();
    let path = dir.path().join("c.csv");
    write_cohort(&path, &cohort).unwrap();
    cohort.schema().save(&sidecar_path(&path)).unwrap();
    let schema = PhenotypeSchema::load(&sidecar_path(&path)).unwrap();
    let back = load_cohort(&path, &schema).unwrap();
    assert_eq!(back.ages(), cohort.ages());
    assert_eq!(back.imaging(), cohort.imaging());
    assert_eq!(back.phenotypes(), cohort.phenotypes());
}

#[test]
fn train_save_load_predict() {
    let dir = tempfile::tempdir().unwrap();
    let cohort = generate_synthetic(&SyntheticConfig {
        subjects: 150,
        imaging_features: 10,
        ..SyntheticConfig::default()
    })
    .unwrap();
    let graph = build(&cohort, &BuilderConfig::for_method(BuilderMethod::KnnImaging)).unwrap();
    let s = split(cohort.len(), &SplitFractions::default(), 0).unwrap();
    for arch in Architecture::ALL {
        let model = ModelConfig {
            hidden: 24,
            fc: 12,
            ..ModelConfig::new(arch)
        };
        let outcome = train(&model, &graph, &s, &TrainConfig { epochs: 15, ..TrainConfig::default() }).unwrap();
        let checkpoint = Checkpoint {
            model: model.clone(),
            input_features: 10,
            params: outcome.params.clone(),
            labels: Some(outcome.label_stats),
        };
        let path = dir.path().join(format!("{arch}.ckpt"));
        checkpoint.save(&path).unwrap();
        let loaded = Checkpoint::load(&path).unwrap();
        assert_eq!(loaded, checkpoint);
        assert_eq!(
            forward(&loaded.model, &loaded.params, &graph).unwrap(),
            forward(&model, &outcome.params, &graph).unwrap()
        );
        let a = evaluate(&outcome.params, &model, &graph, &s.test, &outcome.label_stats).unwrap();
        let b = evaluate(&loaded.params, &loaded.model, &graph, &s.test, &loaded.labels.unwrap()).unwrap();
        assert_eq!(a, b);
        assert!(a.mae.is_finite());
    }
}
