use gfmate_core::prompt::{LayerMode, TgclMode};
use gfmate_harness::report::{RunInfo, SweepPoint};
use gfmate_harness::*;

fn report(label: &str, mean: f64, sweep: Option<f64>) -> MetricReport {
    MetricReport {
        label: label.into(),
        target_domain: "t".into(),
        shots: 1,
        tgcl_mode: TgclMode::Complementary,
        layer_mode: LayerMode::Learned,
        sweep: sweep.map(|v| SweepPoint {
            kind: "ratio".into(),
            value: v,
        }),
        per_seed: vec![],
        mean,
        stddev: 0.0,
        comp_label_accuracy: None,
        summary: String::new(),
        param_count: 0,
        run: RunInfo {
            wallclock_secs: 0.0,
            pretrain_steps: 0,
        },
    }
}

fn render(reports: &[MetricReport]) -> String {
    let dir = tempfile::tempdir().unwrap();
    let paths = emit_plots(reports, dir.path()).unwrap();
    std::fs::read_to_string(&paths[0]).unwrap()
}

#[test]
fn single_report_is_one_bar_of_valid_xml() {
    let svg = render(&[report("a & b", 0.7, None)]);
    let doc = roxmltree::Document::parse(&svg).unwrap();
    let bars = doc
        .descendants()
        .filter(|n| n.has_tag_name("rect") && n.attribute("fill") == Some("steelblue"))
        .count();
    assert_eq!(bars, 1);
}

#[test]
fn five_point_sweep_is_one_five_vertex_polyline() {
    let reports: Vec<_> = [0.0, 0.2, 0.5, 0.8, 1.0]
        .iter()
        .enumerate()
        .map(|(k, &r)| report("r", 0.5 + 0.05 * k as f64, Some(r)))
        .collect();
    let svg = render(&reports);
    let doc = roxmltree::Document::parse(&svg).unwrap();
    let lines: Vec<_> = doc.descendants().filter(|n| n.has_tag_name("polyline")).collect();
    assert_eq!(lines.len(), 1);
    assert_eq!(lines[0].attribute("points").unwrap().split_whitespace().count(), 5);
}

#[test]
fn plots_are_byte_identical_across_runs() {
    let reports = vec![report("x", 0.31, Some(1.0)), report("y", 0.62, Some(2.0))];
    assert_eq!(render(&reports), render(&reports));
}

#[test]
fn empty_report_set_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    assert!(emit_plots(&[], dir.path()).is_err());
}
