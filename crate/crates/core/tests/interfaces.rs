//! Surface used by host-language bindings: JSON configs, epoch iteration and
//! the version string.

use synthts::bundles::{BundleKind, DifficultySpec};
use synthts::panel::{gen_panel, GeneratorConfig};
use synthts::pipeline::{build_epoch_plan, EpochCounts, MixMode, MixPlan, Strategy};

#[test]
fn generator_config_json_roundtrip() {
    let config = GeneratorConfig {
        length: 333,
        channels: 5,
        bundle_filter: Some(BundleKind::Lm),
        difficulty: DifficultySpec::Fixed(0.37),
        p_latent: 0.3,
        master_seed: 99,
        ..GeneratorConfig::default()
    };
    let back = GeneratorConfig::from_json(&config.to_json().unwrap()).unwrap();
    assert_eq!(back, config);
    let panel = gen_panel(&back).unwrap();
    assert_eq!(panel.data.dim(), (333, 5));
    assert_eq!(panel.data, gen_panel(&config).unwrap().data);
}

#[test]
fn partial_config_takes_defaults() {
    let config =
        GeneratorConfig::from_json(r#"{"channels": 7, "length": 1000, "difficulty": "hard"}"#)
            .unwrap();
    assert_eq!(config.difficulty, DifficultySpec::Hard);
    assert_eq!(gen_panel(&config).unwrap().data.dim(), (1000, 7));
}

#[test]
fn config_errors_name_the_field() {
    for (text, field) in [
        (r#"{"channels": 0}"#, "channels"),
        (r#"{"p_latent": 2.0}"#, "p_latent"),
        (r#"{"difficulty": "brutal"}"#, "difficulty"),
        (r#"{"chanels": 3}"#, "chanels"),
    ] {
        let err = GeneratorConfig::from_json(text).unwrap_err().to_string();
        assert!(err.contains(field), "{text}: {err}");
    }
    for (text, field) in [
        (r#"{"mode": "sideways"}"#, "sideways"),
        (r#"{"sparsity": 0}"#, "sparsity"),
        (r#"{"r_synth": -1}"#, "r_synth"),
        (
            r#"{"mode": "anneal", "strategy": "gradual", "epochs": 1, "anneal_epoch": 0}"#,
            "epochs",
        ),
    ] {
        let err = MixPlan::from_json(text).unwrap_err().to_string();
        assert!(err.contains(field), "{text}: {err}");
    }
}

#[test]
fn mix_plan_json_roundtrip() {
    let plan = MixPlan {
        mode: MixMode::Anneal,
        strategy: Strategy::Gradual,
        r_synth: 0.5,
        sparsity: 0.25,
        epochs: 7,
        anneal_epoch: 2,
        cache_size: 100,
        ..MixPlan::default()
    };
    assert_eq!(MixPlan::from_json(&plan.to_json().unwrap()).unwrap(), plan);
}

#[test]
fn epoch_iteration() {
    let real = MixPlan::default();
    let items: Vec<EpochCounts> = build_epoch_plan(&real, 500, 500)
        .unwrap()
        .into_iter()
        .collect();
    assert_eq!(items.len(), 10);
    assert!(items.iter().all(|e| e.n_synth == 0));

    let hard = MixPlan {
        mode: MixMode::Anneal,
        ..MixPlan::default()
    };
    let plan = build_epoch_plan(&hard, 500, 500).unwrap();
    let mut iter = plan.iter();
    for e in 0..10 {
        let item = iter.next().unwrap();
        assert_eq!(item.epoch, e);
        assert_eq!(item.n_synth == 0, e >= 5);
    }
    assert!(iter.next().is_none());
    let json: serde_json::Value = serde_json::from_str(&plan.to_json().unwrap()).unwrap();
    assert_eq!(json["epochs"].as_array().unwrap().len(), 10);
}

#[test]
fn version_matches_package() {
    assert_eq!(synthts::VERSION, env!("CARGO_PKG_VERSION"));
    assert!(!synthts::VERSION.is_empty());
}
