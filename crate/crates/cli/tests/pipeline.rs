use std::fs;
use std::process::{Command, Stdio};

use weldopt_cli::config::{InputSource, OutputFormat, RunConfig, StageSet};
use weldopt_cli::pipeline::Section;
use weldopt_cli::render::{render, render_json, render_text};
use weldopt_cli::{run_pipeline, CliError};

fn quick() -> RunConfig {
    RunConfig {
        trees: 20,
        rounds: 20,
        ..RunConfig::default()
    }
}

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_weldopt"));
    c.stderr(Stdio::null());
    c
}

#[test]
fn warns_about_traverse_depth_pair() {
    let doc = run_pipeline(&quick()).unwrap();
    let design = doc.design.as_ref().unwrap();
    assert_eq!(design.warnings.len(), 1);
    assert!(design.warnings[0].contains("traverse_mm_min"));
    assert!(design.warnings[0].contains("plan_depth_mm"));
}

#[test]
fn anova_total_and_discrepancy() {
    let doc = run_pipeline(&quick()).unwrap();
    let Some(Section::Ok(anova)) = &doc.anova else {
        panic!("anova stage failed")
    };
    assert!((anova.table.total.ss - 177.736).abs() < 0.01);
    let entry = doc
        .discrepancies
        .iter()
        .find(|d| d.topic.contains("total sum of squares"))
        .unwrap();
    assert!(entry.published.contains("370.963"));
}

#[test]
fn no_discrepancies_for_other_data() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("runs.csv");
    fs::write(
        &path,
        "rpm,traverse_mm_min,plan_depth_mm,hardness\n\
         800,40,0.1,60\n800,50,0.2,61\n800,60,0.3,62\n\
         1000,40,0.2,63\n1000,50,0.3,64\n1000,60,0.1,66\n\
         1200,40,0.3,65\n1200,50,0.1,68\n1200,60,0.2,67\n",
    )
    .unwrap();
    let doc = run_pipeline(&RunConfig {
        input: InputSource::Csv(path),
        ..quick()
    })
    .unwrap();
    assert!(doc.discrepancies.is_empty());
    assert!(doc.design.unwrap().warnings.is_empty());
}

#[test]
fn missing_csv_is_io_error_without_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = RunConfig {
        input: InputSource::Csv(dir.path().join("missing.csv")),
        out: Some(out.clone()),
        ..quick()
    };
    assert!(matches!(run_pipeline(&cfg), Err(CliError::Io(_))));

    let status = bin()
        .args(["report", "--input"])
        .arg(dir.path().join("missing.csv"))
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(3));
    assert!(!out.exists());
}

#[test]
fn invalid_config_is_usage_error() {
    let status = bin()
        .args(["fit", "--builtin", "aa6262", "--lambda", "-1"])
        .output()
        .unwrap()
        .status;
    assert_eq!(status.code(), Some(2));
    let status = bin().args(["fit", "--builtin", "aa6262", "--cv", "k:1"]).output().unwrap().status;
    assert_eq!(status.code(), Some(2));
    let status = bin().args(["fit"]).output().unwrap().status;
    assert_eq!(status.code(), Some(2));
}

#[test]
fn exit_one_when_every_stage_fails() {
    let status = bin()
        .args(["anova", "--builtin", "aa6262", "--response", "rpm"])
        .output()
        .unwrap()
        .status;
    assert_eq!(status.code(), Some(1));
}

#[test]
fn json_is_byte_stable() {
    let cfg = RunConfig {
        format: OutputFormat::Json,
        ..quick()
    };
    let a = render_json(&run_pipeline(&cfg).unwrap()).unwrap();
    let b = render_json(&run_pipeline(&cfg).unwrap()).unwrap();
    assert_eq!(a, b);
    let doc = run_pipeline(&cfg).unwrap();
    assert_eq!(render_json(&doc).unwrap(), render_json(&doc).unwrap());
    assert!(a.contains("\"seed\": 0"));

    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let status = bin()
            .args(["report", "--builtin", "aa6262", "--trees", "20", "--format", "json", "--out"])
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success());
        fs::read(out.join("report.json")).unwrap()
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn text_anova_header() {
    let cfg = RunConfig {
        stages: StageSet::ANOVA,
        ..quick()
    };
    let text = render_text(&run_pipeline(&cfg).unwrap());
    let header = text
        .lines()
        .skip_while(|l| !l.contains("Analysis of Variance"))
        .nth(1)
        .unwrap();
    let cols: Vec<&str> = header.split("  ").map(str::trim).filter(|c| !c.is_empty()).collect();
    assert_eq!(cols, ["Source", "DF", "Adjusted SS", "Adjusted MS", "F-Value", "P-Value"]);
}

#[test]
fn csv_response_table_schema() {
    let cfg = RunConfig {
        format: OutputFormat::Csv,
        stages: StageSet::TAGUCHI,
        out: Some("unused".into()),
        ..quick()
    };
    let files = render(&run_pipeline(&cfg).unwrap(), OutputFormat::Csv).unwrap();
    let (_, table) = files.iter().find(|(n, _)| n == "response_table.csv").unwrap();
    let mut lines = table.lines();
    assert_eq!(lines.next().unwrap(), "factor,level,setting,runs,raw_mean,sn_mean");
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 9);
    assert!(rows.iter().all(|r| r.len() == 6));
    assert_eq!(rows[0][..2], ["rpm", "1"]);
    let mean: f64 = rows[0][4].parse().unwrap();
    assert!((mean - 66.3267).abs() < 1e-3);
    for plot in ["plot_main_effects.csv", "plot_sn_means.csv"] {
        assert!(files.iter().any(|(n, _)| n == plot));
    }
}

#[test]
fn csv_cli_writes_one_file_per_section() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["report", "--builtin", "aa6262", "--trees", "10", "--format", "csv", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    for f in [
        "summary.csv",
        "design.csv",
        "response_table.csv",
        "anova.csv",
        "model_summary.csv",
        "metrics.csv",
        "discrepancies.csv",
        "plot_feature_importance.csv",
    ] {
        assert!(dir.path().join(f).is_file(), "{f}");
    }
}

#[test]
fn gbm_report_records_hyperparameters() {
    let cfg = RunConfig {
        model: weldopt_cli::config::ModelKind::Gbm,
        rounds: 30,
        depth: 3,
        nu: 0.3,
        seed: 11,
        ..quick()
    };
    let json = render_json(&run_pipeline(&cfg).unwrap()).unwrap();
    for needle in ["\"rounds\": 30", "\"learning_rate\": 0.3", "\"seed\": 11", "\"max_depth\": 3"] {
        assert!(json.contains(needle), "{needle}");
    }
}
