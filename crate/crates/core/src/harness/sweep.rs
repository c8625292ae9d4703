//! Width sweeps: train one network per (width, seed) and tabulate final
//! errors and curve dissimilarity.

use std::fmt::Write as _;
use std::path::Path;

use crate::bounds::{width_range, WidthBounds};
use crate::dataset::{normalize_minmax, LabeledDataset};
use crate::exec::map_ordered;
use crate::harness::config::SweepConfig;
use crate::metrics::dissimilarity;
use crate::train::{init_network, split, train, Partitions, StopReason, TrainConfig, TrainingTrace};
use crate::{Error, Result};

pub const REPORT_HEADER: &str = "# vcwidth sweep report v1";
const COLUMNS: &str =
    "width,seed,in_bounds,final_train_mse,final_val_mse,final_test_mse,dissimilarity,epochs_run,status";

/// Outcome of one run. Diverged rows keep NaN errors and never win selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowStatus {
    Finished(StopReason),
    Diverged { epoch: usize },
}

impl RowStatus {
    pub fn label(&self) -> String {
        match self {
            RowStatus::Finished(s) => s.as_str().to_string(),
            RowStatus::Diverged { epoch } => format!("diverged@{epoch}"),
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "max_epochs" => RowStatus::Finished(StopReason::MaxEpochs),
            "target_reached" => RowStatus::Finished(StopReason::TargetReached),
            "early_stop" => RowStatus::Finished(StopReason::EarlyStop),
            _ => RowStatus::Diverged { epoch: s.strip_prefix("diverged@")?.parse().ok()? },
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub width: usize,
    pub seed: u64,
    pub in_bounds: bool,
    pub final_train_mse: f64,
    pub final_val_mse: f64,
    pub final_test_mse: f64,
    pub dissimilarity: f64,
    pub epochs_run: usize,
    pub status: RowStatus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub dataset: String,
    pub samples: usize,
    pub attributes: usize,
    pub rows: Vec<SweepRow>,
    pub best_width: Option<usize>,
    pub bounds_used: Option<WidthBounds>,
}

/// Best width: among finished rows whose final validation MSE is within 10%
/// of the smallest one, the row with the least dissimilarity; ties go to the
/// smaller width.
pub fn select_best_width(rows: &[SweepRow]) -> Option<usize> {
    let usable = || rows.iter().filter(|r| matches!(r.status, RowStatus::Finished(_)) && r.final_val_mse.is_finite());
    let best_val = usable().map(|r| r.final_val_mse).min_by(f64::total_cmp)?;
    usable()
        .filter(|r| r.final_val_mse <= best_val * 1.1)
        .min_by(|a, b| a.dissimilarity.total_cmp(&b.dissimilarity).then(a.width.cmp(&b.width)))
        .map(|r| r.width)
}

/// Split, then optionally min-max scale every partition with the training
/// partition's ranges.
pub fn prepare_partitions(data: &LabeledDataset, ratios: [f64; 3], seed: u64, normalize: bool) -> Result<Partitions> {
    let parts = split(data, ratios, seed)?;
    if !normalize {
        return Ok(parts);
    }
    let (train, table) = normalize_minmax(&parts.train)?;
    Ok(Partitions { train, val: table.apply(&parts.val)?, test: table.apply(&parts.test)? })
}

/// One run of the sweep pipeline: the seed drives both the split and the
/// initialization.
pub fn train_width(
    data: &LabeledDataset,
    width: usize,
    seed: u64,
    train_cfg: &TrainConfig,
    ratios: [f64; 3],
    normalize: bool,
) -> Result<TrainingTrace> {
    let parts = prepare_partitions(data, ratios, seed, normalize)?;
    let cfg = TrainConfig { seed, ..train_cfg.clone() };
    let net0 = init_network(data.attributes(), width, &cfg)?;
    train(&net0, &parts, &cfg)
}

fn bracket_for(data: &LabeledDataset) -> Option<WidthBounds> {
    width_range(data.attributes(), data.len() as u64).ok()
}

/// Sweep a data set that is already loaded.
pub fn sweep_dataset(data: &LabeledDataset, cfg: &SweepConfig) -> Result<SweepReport> {
    cfg.validate()?;
    let bounds = bracket_for(data);
    let widths = cfg.sweep.widths.resolve(bounds.as_ref(), &cfg.sweep.extra_widths)?;
    let jobs: Vec<(usize, u64)> = widths
        .iter()
        .flat_map(|&w| (0..cfg.sweep.seeds_per_width as u64).map(move |s| (w, cfg.train.seed.wrapping_add(s))))
        .collect();
    log::info!("sweeping {} on {} runs", data.name(), jobs.len());

    let results = map_ordered(cfg.sweep.execution(), &jobs, |&(width, seed)| {
        let outcome = train_width(data, width, seed, &cfg.train, cfg.sweep.split, cfg.sweep.normalize);
        (width, seed, outcome)
    });

    let mut rows = Vec::with_capacity(results.len());
    for (width, seed, outcome) in results {
        let in_bounds = bounds.as_ref().is_some_and(|b| b.contains(width));
        let row = match outcome {
            Ok(trace) => {
                let [tr, va, te] = trace.final_mse();
                SweepRow {
                    width,
                    seed,
                    in_bounds,
                    final_train_mse: tr,
                    final_val_mse: va,
                    final_test_mse: te,
                    dissimilarity: dissimilarity(&trace.curves()?),
                    epochs_run: trace.epochs_run,
                    status: RowStatus::Finished(trace.stop_reason),
                }
            }
            Err(Error::Divergence { epoch }) => {
                log::warn!("width {width} seed {seed} diverged at epoch {epoch}");
                SweepRow {
                    width,
                    seed,
                    in_bounds,
                    final_train_mse: f64::NAN,
                    final_val_mse: f64::NAN,
                    final_test_mse: f64::NAN,
                    dissimilarity: f64::NAN,
                    epochs_run: epoch,
                    status: RowStatus::Diverged { epoch },
                }
            }
            Err(e) => return Err(e),
        };
        rows.push(row);
    }
    Ok(SweepReport {
        dataset: data.name().to_string(),
        samples: data.len(),
        attributes: data.attributes(),
        best_width: select_best_width(&rows),
        rows,
        bounds_used: bounds,
    })
}

/// Load the configured data set and sweep it.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepReport> {
    cfg.validate()?;
    let data = cfg.dataset.load()?;
    sweep_dataset(&data, cfg)
}

impl SweepReport {
    /// Versioned CSV. Floats use shortest round-trip formatting, so parsing
    /// the text back gives the same rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{REPORT_HEADER}");
        let bracket = self.bounds_used.as_ref().map_or_else(|| "none".to_string(), WidthBounds::range_label);
        let best = self.best_width.map_or_else(|| "none".to_string(), |w| w.to_string());
        let _ = writeln!(
            out,
            "# dataset={} r={} n={} bracket={} best_width={}",
            self.dataset, self.samples, self.attributes, bracket, best
        );
        let _ = writeln!(out, "{COLUMNS}");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                r.width,
                r.seed,
                r.in_bounds,
                r.final_train_mse,
                r.final_val_mse,
                r.final_test_mse,
                r.dissimilarity,
                r.epochs_run,
                r.status.label()
            );
        }
        out
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}

/// Rows of a report produced by [`SweepReport::to_csv`].
pub fn parse_report_rows(text: &str, source_name: &str) -> Result<Vec<SweepRow>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, l)) if l.trim() == REPORT_HEADER => {}
        other => {
            return Err(Error::Parse {
                source_name: source_name.into(),
                line: other.map_or(1, |(i, _)| i + 1),
                column: 1,
                message: format!("expected `{REPORT_HEADER}`"),
            })
        }
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        let line = line.trim();
        if line.starts_with('#') || line == COLUMNS {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        let bad = |column: usize, message: String| Error::Parse {
            source_name: source_name.into(),
            line: i + 1,
            column,
            message,
        };
        if cells.len() != 9 {
            return Err(bad(cells.len(), "expected 9 columns".into()));
        }
        fn num<T: std::str::FromStr>(cells: &[&str], j: usize, bad: &dyn Fn(usize, String) -> Error) -> Result<T> {
            cells[j].parse().map_err(|_| bad(j + 1, format!("cannot parse `{}`", cells[j])))
        }
        rows.push(SweepRow {
            width: num(&cells, 0, &bad)?,
            seed: num(&cells, 1, &bad)?,
            in_bounds: num(&cells, 2, &bad)?,
            final_train_mse: num(&cells, 3, &bad)?,
            final_val_mse: num(&cells, 4, &bad)?,
            final_test_mse: num(&cells, 5, &bad)?,
            dissimilarity: num(&cells, 6, &bad)?,
            epochs_run: num(&cells, 7, &bad)?,
            status: RowStatus::parse(cells[8]).ok_or_else(|| bad(9, format!("unknown status `{}`", cells[8])))?,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::Widths;

    fn row(width: usize, val: f64, d: f64) -> SweepRow {
        SweepRow {
            width,
            seed: 0,
            in_bounds: true,
            final_train_mse: val,
            final_val_mse: val,
            final_test_mse: val,
            dissimilarity: d,
            epochs_run: 10,
            status: RowStatus::Finished(StopReason::MaxEpochs),
        }
    }

    #[test]
    fn selection_rule() {
        assert_eq!(select_best_width(&[]), None);
        assert_eq!(select_best_width(&[row(1, 0.2, 5.0)]), Some(1));
        // width 3 has the lowest MSE, width 2 is within 10% and smoother
        let rows = [row(1, 0.30, 0.1), row(2, 0.105, 0.5), row(3, 0.10, 0.9)];
        assert_eq!(select_best_width(&rows), Some(2));
        let ties = [row(4, 0.1, 0.5), row(2, 0.1, 0.5)];
        assert_eq!(select_best_width(&ties), Some(2));
        let mut diverged = row(5, f64::NAN, f64::NAN);
        diverged.status = RowStatus::Diverged { epoch: 3 };
        assert_eq!(select_best_width(&[diverged.clone(), row(6, 0.4, 1.0)]), Some(6));
        assert_eq!(select_best_width(&[diverged]), None);
    }

    fn toy_data() -> LabeledDataset {
        let rows: Vec<Vec<f64>> = (0..40).map(|i| vec![i as f64, ((i * 7) % 11) as f64]).collect();
        let targets = (0..40).map(|i| u8::from(i >= 20)).collect();
        LabeledDataset::from_rows("toy", &rows, targets).unwrap()
    }

    fn toy_config(widths: Vec<usize>, jobs: usize) -> SweepConfig {
        let mut cfg = SweepConfig::default();
        cfg.train.max_epochs = 200;
        cfg.train.eta = 0.5;
        cfg.sweep.widths = Widths::List(widths);
        cfg.sweep.seeds_per_width = 2;
        cfg.sweep.jobs = jobs;
        cfg
    }

    #[test]
    fn sweep_rows_are_ordered_and_reproducible() {
        let data = toy_data();
        let a = sweep_dataset(&data, &toy_config(vec![3, 1, 2], 0)).unwrap();
        assert_eq!(
            a.rows.iter().map(|r| (r.width, r.seed)).collect::<Vec<_>>(),
            vec![(1, 0), (1, 1), (2, 0), (2, 1), (3, 0), (3, 1)]
        );
        // n = 2 has no bracket
        assert!(a.bounds_used.is_none() && a.rows.iter().all(|r| !r.in_bounds));
        let b = sweep_dataset(&data, &toy_config(vec![1, 2, 3], 1)).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
        assert!(a.best_width.is_some());
    }

    #[test]
    fn csv_roundtrip_reproduces_selection() {
        let data = toy_data();
        let report = sweep_dataset(&data, &toy_config(vec![1, 2], 1)).unwrap();
        let rows = parse_report_rows(&report.to_csv(), "mem").unwrap();
        assert_eq!(rows, report.rows);
        assert_eq!(select_best_width(&rows), report.best_width);
        assert!(parse_report_rows("width,seed\n", "mem").is_err());
    }

    #[test]
    fn diverged_rows_are_recorded() {
        let data = toy_data();
        let mut cfg = toy_config(vec![2], 1);
        cfg.train.eta = 1e9;
        cfg.sweep.normalize = false;
        let report = sweep_dataset(&data, &cfg).unwrap();
        assert!(report.rows.iter().all(|r| matches!(r.status, RowStatus::Diverged { .. })));
        assert_eq!(report.best_width, None);
        let rows = parse_report_rows(&report.to_csv(), "mem").unwrap();
        assert_eq!(rows[0].status, report.rows[0].status);
        assert!(rows[0].final_val_mse.is_nan());
    }

    #[test]
    fn single_width_single_seed() {
        let data = toy_data();
        let mut cfg = toy_config(vec![1], 0);
        cfg.sweep.seeds_per_width = 1;
        let report = sweep_dataset(&data, &cfg).unwrap();
        assert_eq!(report.rows.len(), 1);
        assert_eq!(report.best_width, Some(1));
    }

    #[test]
    fn normalized_partitions_use_training_ranges() {
        let data = toy_data();
        let parts = prepare_partitions(&data, [0.5, 0.25, 0.25], 3, true).unwrap();
        assert!(parts.train.features().iter().all(|x| (0.0..=1.0).contains(x)));
        assert_eq!(parts.sizes(), [20, 10, 10]);
    }
}
