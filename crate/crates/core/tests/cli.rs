use std::path::Path;
use std::process::{Command, Output};

use synthts::panel::{gen_panel, GeneratorConfig};
use synthts::pipeline::{read_table, Manifest};
use synthts::profile::{BundleRanking, StatReport};

fn synthts(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_synthts"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write_real(path: &Path, rows: usize) {
    let mut text = String::from("date,HUFL,HULL,OT\n");
    for t in 0..rows {
        let x = t as f64;
        text.push_str(&format!(
            "2016-07-01 {t},{:.3},{:.3},{:.3}\n",
            (x / 24.0 * std::f64::consts::TAU).sin(),
            (x / 7.0).cos(),
            x * 0.01
        ));
    }
    std::fs::write(path, text).unwrap();
}

#[test]
fn plan_prints_hard_anneal_table() {
    let out = synthts(&[
        "plan",
        "--mode",
        "anneal",
        "--strategy",
        "hard",
        "--anneal-epoch",
        "5",
        "--epochs",
        "10",
        "--train-windows",
        "1000",
    ]);
    let text = stdout(&out);
    let rows: Vec<Vec<&str>> = text
        .lines()
        .skip(1)
        .map(|l| l.split_whitespace().collect())
        .collect();
    assert_eq!(rows.len(), 10);
    for (e, row) in rows.iter().enumerate() {
        let (ratio, synth) = if e < 5 {
            ("1.0000", "1000")
        } else {
            ("0.0000", "0")
        };
        assert_eq!(row[1], ratio);
        assert_eq!(row[3], synth);
    }
}

#[test]
fn invalid_flags_exit_nonzero_naming_the_flag() {
    for (args, flag) in [
        (
            vec!["plan", "--sparsity", "0", "--train-windows", "10"],
            "--sparsity",
        ),
        (
            vec!["plan", "--strategy", "sideways", "--train-windows", "10"],
            "--strategy",
        ),
        (
            vec!["generate", "--latent-prob", "1.5", "--out", "unused"],
            "--latent-prob",
        ),
        (
            vec!["generate", "--difficulty", "brutal", "--out", "unused"],
            "--difficulty",
        ),
        (
            vec!["plan", "--splits", "0.5,0.5", "--train-windows", "10"],
            "--splits",
        ),
        (vec!["plan", "--nonsense"], "--nonsense"),
    ] {
        let out = synthts(&args);
        assert!(!out.status.success(), "{args:?}");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains(flag), "{args:?}: {err}");
    }
}

#[test]
fn cli_panel_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    for (i, bundle) in ["st", "nr", "lm", "ve", "all"].into_iter().enumerate() {
        let out = dir.path().join(bundle);
        stdout(&synthts(&[
            "generate",
            "--bundle",
            bundle,
            "--channels",
            "3",
            "--length",
            "500",
            "--seed",
            "42",
            "--latent-prob",
            "0.5",
            "--out",
            out.to_str().unwrap(),
        ]));
        let config = GeneratorConfig {
            length: 500,
            channels: 3,
            bundle_filter: if i < 4 {
                Some(synthts::bundles::BundleKind::ALL[i])
            } else {
                None
            },
            master_seed: 42,
            ..GeneratorConfig::default()
        };
        let panel = gen_panel(&config).unwrap();
        let table = read_table(&out.join("panel.csv")).unwrap();
        assert_eq!(table.columns, ["ch0", "ch1", "ch2"]);
        let max_diff = (&table.data - &panel.data)
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()));
        assert_eq!(max_diff, 0.0, "{bundle}");
        let meta: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(out.join("panel.json")).unwrap())
                .unwrap();
        assert_eq!(meta["channel_meta"].as_array().unwrap().len(), 3);
    }
}

#[test]
fn weather_shaped_st_panel() {
    let dir = tempfile::tempdir().unwrap();
    stdout(&synthts(&[
        "generate",
        "--bundle",
        "st",
        "--channels",
        "21",
        "--length",
        "52696",
        "--latent-prob",
        "0",
        "--seed",
        "3",
        "--out",
        dir.path().to_str().unwrap(),
    ]));
    let table = read_table(&dir.path().join("panel.csv")).unwrap();
    assert_eq!(table.data.dim(), (52696, 21));
}

#[test]
fn validate_and_profile_st_panel() {
    let dir = tempfile::tempdir().unwrap();
    stdout(&synthts(&[
        "generate",
        "--bundle",
        "st",
        "--difficulty",
        "easy",
        "--channels",
        "4",
        "--length",
        "4096",
        "--latent-prob",
        "0",
        "--seed",
        "9",
        "--out",
        dir.path().to_str().unwrap(),
    ]));
    let csv = dir.path().join("panel.csv");
    let report: StatReport = serde_json::from_str(&stdout(&synthts(&[
        "validate",
        "--input",
        csv.to_str().unwrap(),
    ])))
    .unwrap();
    let share = report
        .channels
        .iter()
        .map(|c| c.peak_power_share)
        .sum::<f64>()
        / 4.0;
    assert!(share > 0.3, "peak share {share}");

    let json_path = dir.path().join("ranking.json");
    stdout(&synthts(&[
        "profile",
        "--input",
        csv.to_str().unwrap(),
        "--out",
        json_path.to_str().unwrap(),
    ]));
    let ranking: BundleRanking =
        serde_json::from_str(&std::fs::read_to_string(json_path).unwrap()).unwrap();
    assert_eq!(ranking.ranking.len(), 4);
}

#[test]
fn generate_dataset_from_real_csv() {
    let dir = tempfile::tempdir().unwrap();
    let real = dir.path().join("ett.csv");
    write_real(&real, 1000);
    let out = dir.path().join("ds");
    stdout(&synthts(&[
        "generate",
        "--real",
        real.to_str().unwrap(),
        "--mode",
        "anneal_inverse",
        "--strategy",
        "gradual",
        "--epochs",
        "4",
        "--anneal-epoch",
        "0",
        "--sparsity",
        "0.5",
        "--cache-size",
        "3",
        "--splits",
        "0.8,0.1,0.1",
        "--input-len",
        "24",
        "--label-len",
        "12",
        "--horizon",
        "12",
        "--seed",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]));
    let manifest: Manifest =
        serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(
        (manifest.rows.train, manifest.rows.val, manifest.rows.test),
        (800, 100, 100)
    );
    assert_eq!(manifest.orig_train_windows, 800 - 36 + 1);
    assert_eq!(manifest.retained_windows.len(), 382);
    assert_eq!(manifest.columns, ["HUFL", "HULL", "OT"]);
    let synth: Vec<usize> = manifest.epoch_plan.iter().map(|e| e.n_synth).collect();
    assert_eq!(synth, [0, 255, 510, 765]);
    assert_eq!(manifest.synthetic_samples.len(), 3);
    let val = std::fs::read_to_string(out.join("val.csv")).unwrap();
    assert!(val.starts_with("date,HUFL,HULL,OT\n2016-07-01 800,"));
}
