//! Text, CSV and JSON renderings of a [`ReportDocument`], plus the plot-data
//! CSVs behind the main-effects, S/N and feature-importance charts.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use weldopt_core::anova::{AnovaTable, ModelSummary};
use weldopt_core::ensemble::RegressionMetrics;
use weldopt_core::numfmt::sig6;
use weldopt_core::taguchi::SnCriterion;

use crate::config::{CvScheme, OutputFormat};
use crate::pipeline::{ReportDocument, Section};
use crate::CliError;

/// A rendered output file: name relative to the output directory, contents.
pub type RenderedFile = (String, String);

pub fn render(doc: &ReportDocument, format: OutputFormat) -> Result<Vec<RenderedFile>, CliError> {
    let mut files = match format {
        OutputFormat::Text => vec![("report.txt".to_string(), render_text(doc))],
        OutputFormat::Json => vec![("report.json".to_string(), render_json(doc)?)],
        OutputFormat::Csv => render_csv(doc),
    };
    files.extend(plot_data(doc));
    Ok(files)
}

/// Writes the rendered files into `dir`, creating it if needed.
pub fn write_files(dir: &Path, files: &[RenderedFile]) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
    for (name, contents) in files {
        let path = dir.join(name);
        fs::write(&path, contents).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

pub fn render_json(doc: &ReportDocument) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(doc).map_err(|e| CliError::Data(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn table(out: &mut String, header: &[&str], rows: &[Vec<String>]) {
    let widths: Vec<usize> = (0..header.len())
        .map(|c| {
            rows.iter()
                .map(|r| r[c].chars().count())
                .chain(std::iter::once(header[c].chars().count()))
                .max()
                .unwrap_or(0)
        })
        .collect();
    let line = |cells: Vec<&str>| {
        cells
            .iter()
            .enumerate()
            .map(|(c, v)| {
                if c == 0 {
                    format!("{v:<w$}", w = widths[c])
                } else {
                    format!("{v:>w$}", w = widths[c])
                }
            })
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_string()
    };
    let _ = writeln!(out, "{}", line(header.to_vec()));
    for r in rows {
        let _ = writeln!(out, "{}", line(r.iter().map(String::as_str).collect()));
    }
}

fn criterion_label(c: SnCriterion) -> &'static str {
    match c {
        SnCriterion::LargerIsBetter => "larger is better",
        SnCriterion::SmallerIsBetter => "smaller is better",
        SnCriterion::NominalIsBest => "nominal is best",
    }
}

pub fn anova_text(t: &AnovaTable, out: &mut String) {
    let mut rows: Vec<Vec<String>> = t
        .sources
        .iter()
        .map(|r| {
            vec![
                r.source.clone(),
                r.df.to_string(),
                sig6(r.adj_ss),
                sig6(r.adj_ms),
                sig6(r.f_value),
                sig6(r.p_value),
            ]
        })
        .collect();
    rows.push(vec![
        "Error".into(),
        t.error.df.to_string(),
        sig6(t.error.ss),
        sig6(t.error.ms),
        String::new(),
        String::new(),
    ]);
    rows.push(vec![
        "Total".into(),
        t.total.df.to_string(),
        sig6(t.total.ss),
        String::new(),
        String::new(),
        String::new(),
    ]);
    table(
        out,
        &["Source", "DF", "Adjusted SS", "Adjusted MS", "F-Value", "P-Value"],
        &rows,
    );
}

fn pct(v: f64) -> String {
    format!("{}%", sig6(100.0 * v))
}

pub fn summary_text(s: &ModelSummary, out: &mut String) {
    table(
        out,
        &["S", "R²", "R² (adjusted)", "R² (predicted)"],
        &[vec![
            sig6(s.s),
            pct(s.r_squared),
            pct(s.adj_r_squared),
            s.predicted_r_squared.map_or("n/a".into(), pct),
        ]],
    );
}

fn metrics_row(label: &str, m: &RegressionMetrics) -> Vec<String> {
    vec![
        label.to_string(),
        sig6(m.mse),
        sig6(m.mae),
        m.r_squared.map_or("undefined".into(), sig6),
    ]
}

pub fn render_text(doc: &ReportDocument) -> String {
    let mut out = String::new();
    let cfg = &doc.config;
    let _ = writeln!(out, "{} {} report", doc.tool.name, doc.tool.version);
    let _ = writeln!(
        out,
        "input {:?}, response {}, model {:?}, seed {}",
        cfg.input, cfg.response, cfg.model, cfg.seed
    );

    let d = &doc.dataset;
    let _ = writeln!(out, "\n== Dataset ==");
    let _ = writeln!(
        out,
        "{} runs; factors: {}; response: {}",
        d.runs,
        d.factor_names.join(", "),
        d.response
    );
    let rows: Vec<Vec<String>> = d
        .summary
        .columns
        .iter()
        .map(|c| vec![c.name.clone(), sig6(c.min), sig6(c.max), sig6(c.mean), sig6(c.std)])
        .collect();
    table(&mut out, &["Column", "Min", "Max", "Mean", "Std (pop.)"], &rows);
    let _ = writeln!(out, "\nPearson correlation");
    let names: Vec<&str> = d.summary.columns.iter().map(|c| c.name.as_str()).collect();
    let mut header = vec![""];
    header.extend(&names);
    let rows: Vec<Vec<String>> = d
        .summary
        .correlation
        .iter()
        .zip(&names)
        .map(|(row, n)| {
            std::iter::once(n.to_string())
                .chain(row.iter().map(|v| v.map_or("undefined".into(), |r| format!("{r:.4}"))))
                .collect()
        })
        .collect();
    table(&mut out, &header, &rows);

    if let Some(design) = &doc.design {
        let _ = writeln!(out, "\n== Design ==");
        for (f, b) in design.diagnostics.factors.iter().zip(&design.diagnostics.balanced) {
            let _ = writeln!(out, "{f}: {}", if *b { "balanced" } else { "unbalanced" });
        }
        for p in &design.diagnostics.pairs {
            let _ = writeln!(
                out,
                "{} x {}: {}",
                p.first,
                p.second,
                if p.orthogonal { "orthogonal" } else { "not orthogonal" }
            );
        }
        for w in &design.warnings {
            let _ = writeln!(out, "WARNING: {w}");
        }
    }

    match &doc.taguchi {
        Some(Section::Ok(t)) => {
            let rt = &t.response_table;
            let _ = writeln!(out, "\n== Taguchi response table ({}) ==", criterion_label(rt.criterion));
            let mut rows = Vec::new();
            for f in &rt.factors {
                for (k, level) in f.levels.iter().enumerate() {
                    rows.push(vec![
                        f.factor.clone(),
                        (k + 1).to_string(),
                        sig6(*level),
                        f.counts[k].to_string(),
                        sig6(f.raw_means[k]),
                        sig6(f.sn_means[k]),
                    ]);
                }
                rows.push(vec![
                    format!("{} delta (rank)", f.factor),
                    String::new(),
                    String::new(),
                    String::new(),
                    format!("{} ({})", sig6(f.raw_delta), f.raw_rank),
                    format!("{} ({})", sig6(f.sn_delta), f.sn_rank),
                ]);
            }
            table(&mut out, &["Factor", "Level", "Setting", "Runs", "Mean", "S/N mean (dB)"], &rows);
            let _ = writeln!(
                out,
                "Optimal (raw means): levels {:?} = {:?}",
                t.optimal_raw.levels, t.optimal_raw.settings
            );
            let _ = writeln!(
                out,
                "Optimal (S/N means): levels {:?} = {:?}",
                t.optimal_sn.levels, t.optimal_sn.settings
            );
        }
        Some(Section::Failed { message }) => {
            let _ = writeln!(out, "\n== Taguchi response table ==\nstage failed: {message}");
        }
        None => {}
    }

    match &doc.anova {
        Some(Section::Ok(a)) => {
            let _ = writeln!(out, "\n== Analysis of Variance ==");
            anova_text(&a.table, &mut out);
            let _ = writeln!(out, "\n== Model Summary ==");
            match &a.summary {
                Section::Ok(s) => summary_text(s, &mut out),
                Section::Failed { message } => {
                    let _ = writeln!(out, "unavailable: {message}");
                }
            }
        }
        Some(Section::Failed { message }) => {
            let _ = writeln!(out, "\n== Analysis of Variance ==\nstage failed: {message}");
        }
        None => {}
    }

    match &doc.model {
        Some(Section::Ok(m)) => {
            let _ = writeln!(out, "\n== Model ==");
            let _ = writeln!(out, "{}", serde_json::to_string(&m.spec).unwrap_or_default());
            let mut rows = vec![metrics_row("training", &m.training)];
            match &m.cv {
                Section::Ok(cv) => rows.push(metrics_row(&cv_label(cv.scheme), &cv.result.pooled)),
                Section::Failed { message } => {
                    let _ = writeln!(out, "cross-validation failed: {message}");
                }
            }
            table(
                &mut out,
                &["", "Mean Square Error (MSE)", "Mean Absolute Error", "R²"],
                &rows,
            );
            let _ = writeln!(out, "\nFeature importance");
            let rows: Vec<Vec<String>> = m
                .feature_importance
                .feature_names
                .iter()
                .zip(&m.feature_importance.scores)
                .map(|(n, s)| vec![n.clone(), format!("{s:.4}")])
                .collect();
            table(&mut out, &["Feature", "Importance"], &rows);
            if let Section::Ok(t) = &m.tree {
                let _ = writeln!(out, "\nDecision tree (all runs)");
                out.push_str(&t.text);
            }
        }
        Some(Section::Failed { message }) => {
            let _ = writeln!(out, "\n== Model ==\nstage failed: {message}");
        }
        None => {}
    }

    if !doc.discrepancies.is_empty() {
        let _ = writeln!(out, "\n== Discrepancies with published values ==");
        for d in &doc.discrepancies {
            let _ = writeln!(out, "* {}", d.topic);
            let _ = writeln!(out, "    published: {}", d.published);
            let _ = writeln!(out, "    computed:  {}", d.computed);
            let _ = writeln!(out, "    note:      {}", d.note);
        }
    }
    out
}

fn cv_label(scheme: CvScheme) -> String {
    match scheme {
        CvScheme::Loo => "leave-one-out CV".into(),
        CvScheme::KFold(k) => format!("{k}-fold CV"),
    }
}

fn csv_escape(v: &str) -> String {
    if v.contains([',', '"', '\n']) {
        format!("\"{}\"", v.replace('"', "\"\""))
    } else {
        v.to_string()
    }
}

fn csv_doc(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        s.push_str(&r.iter().map(|c| csv_escape(c)).collect::<Vec<_>>().join(","));
        s.push('\n');
    }
    s
}

fn num(v: f64) -> String {
    format!("{v}")
}

pub fn render_csv(doc: &ReportDocument) -> Vec<RenderedFile> {
    let mut files = Vec::new();
    let s = &doc.dataset.summary;
    files.push((
        "summary.csv".into(),
        csv_doc(
            &["column", "min", "max", "mean", "std"],
            s.columns
                .iter()
                .map(|c| vec![c.name.clone(), num(c.min), num(c.max), num(c.mean), num(c.std)]),
        ),
    ));
    let names: Vec<String> = s.columns.iter().map(|c| c.name.clone()).collect();
    let mut header = vec!["column"];
    header.extend(names.iter().map(String::as_str));
    files.push((
        "correlation.csv".into(),
        csv_doc(
            &header,
            s.correlation.iter().zip(&names).map(|(row, n)| {
                std::iter::once(n.clone())
                    .chain(row.iter().map(|v| v.map_or(String::new(), num)))
                    .collect()
            }),
        ),
    ));

    if let Some(design) = &doc.design {
        files.push((
            "design.csv".into(),
            csv_doc(
                &["first", "second", "orthogonal"],
                design
                    .diagnostics
                    .pairs
                    .iter()
                    .map(|p| vec![p.first.clone(), p.second.clone(), p.orthogonal.to_string()]),
            ),
        ));
    }

    if let Some(Section::Ok(t)) = &doc.taguchi {
        let rows = t.response_table.factors.iter().flat_map(|f| {
            (0..f.levels.len()).map(move |k| {
                vec![
                    f.factor.clone(),
                    (k + 1).to_string(),
                    num(f.levels[k]),
                    f.counts[k].to_string(),
                    num(f.raw_means[k]),
                    num(f.sn_means[k]),
                ]
            })
        });
        files.push((
            "response_table.csv".into(),
            csv_doc(&["factor", "level", "setting", "runs", "raw_mean", "sn_mean"], rows),
        ));
    }

    if let Some(Section::Ok(a)) = &doc.anova {
        let t = &a.table;
        let mut rows: Vec<Vec<String>> = t
            .sources
            .iter()
            .map(|r| {
                vec![
                    r.source.clone(),
                    r.df.to_string(),
                    sig6(r.adj_ss),
                    sig6(r.adj_ms),
                    sig6(r.f_value),
                    sig6(r.p_value),
                ]
            })
            .collect();
        rows.push(vec!["Error".into(), t.error.df.to_string(), sig6(t.error.ss), sig6(t.error.ms), String::new(), String::new()]);
        rows.push(vec!["Total".into(), t.total.df.to_string(), sig6(t.total.ss), String::new(), String::new(), String::new()]);
        files.push((
            "anova.csv".into(),
            csv_doc(&["source", "df", "adj_ss", "adj_ms", "f_value", "p_value"], rows),
        ));
        if let Section::Ok(s) = &a.summary {
            files.push((
                "model_summary.csv".into(),
                csv_doc(
                    &["s", "r_squared", "adj_r_squared", "predicted_r_squared"],
                    [vec![
                        sig6(s.s),
                        sig6(s.r_squared),
                        sig6(s.adj_r_squared),
                        s.predicted_r_squared.map_or(String::new(), sig6),
                    ]],
                ),
            ));
        }
    }

    if let Some(Section::Ok(m)) = &doc.model {
        let mut rows = vec![metrics_csv("training", &m.training)];
        if let Section::Ok(cv) = &m.cv {
            rows.push(metrics_csv("cv", &cv.result.pooled));
            files.push((
                "cv_predictions.csv".into(),
                csv_doc(
                    &["run", "predicted"],
                    cv.result
                        .predictions
                        .iter()
                        .enumerate()
                        .map(|(i, p)| vec![(i + 1).to_string(), num(*p)]),
                ),
            ));
        }
        files.push(("metrics.csv".into(), csv_doc(&["set", "mse", "mae", "r_squared"], rows)));
    }

    if !doc.discrepancies.is_empty() {
        files.push((
            "discrepancies.csv".into(),
            csv_doc(
                &["topic", "published", "computed", "note"],
                doc.discrepancies
                    .iter()
                    .map(|d| vec![d.topic.clone(), d.published.clone(), d.computed.clone(), d.note.clone()]),
            ),
        ));
    }
    files
}

fn metrics_csv(label: &str, m: &RegressionMetrics) -> Vec<String> {
    vec![
        label.into(),
        num(m.mse),
        num(m.mae),
        m.r_squared.map_or(String::new(), num),
    ]
}

/// Data behind the main-effects, S/N-means and feature-importance plots.
pub fn plot_data(doc: &ReportDocument) -> Vec<RenderedFile> {
    let mut files = Vec::new();
    if let Some(Section::Ok(t)) = &doc.taguchi {
        let rows = |sn: bool| -> Vec<Vec<String>> {
            t.response_table
                .factors
                .iter()
                .flat_map(|f| {
                    (0..f.levels.len()).map(move |k| {
                        vec![
                            f.factor.clone(),
                            num(f.levels[k]),
                            num(if sn { f.sn_means[k] } else { f.raw_means[k] }),
                        ]
                    })
                })
                .collect()
        };
        files.push(("plot_main_effects.csv".into(), csv_doc(&["factor", "setting", "mean"], rows(false))));
        files.push(("plot_sn_means.csv".into(), csv_doc(&["factor", "setting", "sn_mean_db"], rows(true))));
    }
    if let Some(Section::Ok(m)) = &doc.model {
        let fi = &m.feature_importance;
        files.push((
            "plot_feature_importance.csv".into(),
            csv_doc(
                &["feature", "importance"],
                fi.feature_names.iter().zip(&fi.scores).map(|(n, s)| vec![n.clone(), num(*s)]),
            ),
        ));
    }
    files
}
