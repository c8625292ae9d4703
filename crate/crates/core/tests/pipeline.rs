use std::path::PathBuf;

use proptest::prelude::*;
use vcwidth::bounds::width_range;
use vcwidth::dataset::{builtin_spec, load_csv, BuiltinDataset, LabeledDataset};
use vcwidth::exec::Execution;
use vcwidth::harness::emit::{emit_sweep_plot, plot_sidecar_path};
use vcwidth::harness::shatter::run_shatter;
use vcwidth::harness::sweep::{parse_report_rows, prepare_partitions, sweep_dataset};
use vcwidth::harness::{select_best_width, SweepConfig, Widths};
use vcwidth::network::SigmoidNetwork;
use vcwidth::train::{init_network, parse_trace_csv, train, TrainConfig};

fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

fn wine() -> LabeledDataset {
    load_csv(&builtin_spec(BuiltinDataset::Wine), &data_dir()).unwrap()
}

#[test]
fn wine_train_save_reload() {
    let data = wine();
    assert_eq!(data.positives(), 59);
    let parts = prepare_partitions(&data, [0.7, 0.15, 0.15], 3, true).unwrap();
    assert_eq!(parts.sizes().iter().sum::<usize>(), 178);
    let cfg = TrainConfig { max_epochs: 400, seed: 3, ..Default::default() };
    let trace = train(&init_network(13, 3, &cfg).unwrap(), &parts, &cfg).unwrap();
    assert!(trace.final_mse()[0] < trace.initial_mse[0]);

    let dir = tempfile::tempdir().unwrap();
    let weights = dir.path().join("wine.net");
    trace.final_net.save(&weights).unwrap();
    assert_eq!(SigmoidNetwork::load(&weights).unwrap(), trace.final_net);

    let trace_path = dir.path().join("trace.csv");
    trace.save_csv(&trace_path).unwrap();
    let curves = parse_trace_csv(&std::fs::read_to_string(trace_path).unwrap(), "trace").unwrap();
    assert_eq!(curves, trace.curves().unwrap());
}

#[test]
fn wine_auto_sweep_covers_the_bracket() {
    let mut cfg = SweepConfig::default();
    cfg.train.max_epochs = 30;
    let report = sweep_dataset(&wine(), &cfg).unwrap();
    let widths: Vec<usize> = report.rows.iter().map(|r| r.width).collect();
    assert_eq!(widths, (1..=21).collect::<Vec<_>>());
    assert!(report.rows.iter().all(|r| r.in_bounds));

    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("wine.svg");
    emit_sweep_plot(&report, &svg).unwrap();
    let rows = parse_report_rows(&std::fs::read_to_string(plot_sidecar_path(&svg)).unwrap(), "sidecar").unwrap();
    assert_eq!(select_best_width(&rows), report.best_width);
}

#[test]
fn glass_nine_widths_flag_the_bracket() {
    let data = load_csv(&builtin_spec(BuiltinDataset::Glass), &data_dir()).unwrap();
    let mut cfg = SweepConfig::default();
    cfg.train.max_epochs = 20;
    cfg.sweep.widths = Widths::List((1..=9).collect());
    let report = sweep_dataset(&data, &cfg).unwrap();
    assert_eq!(report.rows.len(), 9);
    let flagged: Vec<usize> = report.rows.iter().filter(|r| r.in_bounds).map(|r| r.width).collect();
    assert_eq!(flagged, vec![1, 2, 3, 4]);
}

#[test]
fn config_file_relative_data_dir() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d");
    std::fs::create_dir(&data).unwrap();
    std::fs::copy(data_dir().join("wine.data"), data.join("wine.data")).unwrap();
    let path = dir.path().join("c.toml");
    std::fs::write(&path, "[dataset]\nbuiltin = \"wine\"\ndata_dir = \"d\"\n").unwrap();
    let cfg = SweepConfig::load(&path).unwrap();
    assert_eq!(cfg.dataset.load().unwrap().len(), 178);
}

fn toy(seed: u64) -> LabeledDataset {
    let rows: Vec<Vec<f64>> = (0..30u64)
        .map(|i| (0..9).map(|j| ((i * 31 + j * 17 + seed) % 13) as f64).collect())
        .collect();
    let targets = (0..30).map(|i| u8::from(i % 3 == 0)).collect();
    LabeledDataset::from_rows("toy", &rows, targets).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn sweep_selection_is_a_function_of_the_csv(seed in 0u64..1000, widths in prop::collection::vec(1usize..6, 1..4)) {
        let mut cfg = SweepConfig::default();
        cfg.train.max_epochs = 25;
        cfg.train.seed = seed;
        cfg.sweep.widths = Widths::List(widths);
        let report = sweep_dataset(&toy(seed), &cfg).unwrap();
        let rows = parse_report_rows(&report.to_csv(), "mem").unwrap();
        prop_assert_eq!(select_best_width(&rows), report.best_width);
    }

    #[test]
    fn auto_widths_stay_inside_the_bracket(n in 9usize..40, r in 50u64..5000) {
        let b = width_range(n, r).unwrap();
        match Widths::auto().resolve(Some(&b), &[]) {
            Ok(ws) => prop_assert!(ws.iter().all(|&w| b.lo <= w as i64 && w as i64 <= b.hi)),
            Err(_) => prop_assert!(b.is_empty()),
        }
    }

    #[test]
    fn shatter_count_never_exceeds_labelings(r in 1usize..5, seed in 0u64..100) {
        let points: Vec<Vec<f64>> = (0..r).map(|i| vec![i as f64 * 0.7 - 1.0, ((i as u64 + seed) % 3) as f64]).collect();
        let budget = TrainConfig { eta: 0.5, max_epochs: 60, seed, ..Default::default() };
        let report = run_shatter(&points, 2, 0.3, &budget, 1, Execution::Parallel).unwrap();
        prop_assert!(report.identified_count <= 1 << r);
        prop_assert_eq!(report.records.len(), 1 << r);
    }
}
