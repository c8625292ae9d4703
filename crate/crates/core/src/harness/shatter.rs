//! Empirical shattering of a tiny point set: train one network per labeling
//! and count the labelings it can ε-identify.

use std::fmt::Write as _;
use std::path::Path;

use crate::dataset::LabeledDataset;
use crate::exec::{map_ordered, Execution};
use crate::network::{epsilon_identified, least_epsilon, EpsilonBand, LeastEpsilon};
use crate::train::{init_network, train_until, Partitions, TrainConfig};
use crate::{Error, Result};

/// Largest point set the probe will enumerate (2^12 labelings).
pub const MAX_POINTS: usize = 12;

pub const REPORT_HEADER: &str = "# vcwidth shatter report v1";

#[derive(Debug, Clone, PartialEq)]
pub struct LabelingRecord {
    /// Bit `i` set means point `i` is in the positive set.
    pub mask: u32,
    pub identified: bool,
    /// Smallest least-ε reached over the attempts.
    pub best: LeastEpsilon,
    /// Attempts made, counting the successful one.
    pub attempts: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShatterReport {
    pub r: usize,
    pub width: usize,
    pub epsilon: f64,
    pub identified_count: usize,
    pub records: Vec<LabelingRecord>,
}

impl ShatterReport {
    pub fn labelings(&self) -> usize {
        1 << self.r
    }

    pub fn shattered(&self) -> bool {
        self.identified_count == self.labelings()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{REPORT_HEADER}");
        let _ = writeln!(
            out,
            "# r={} width={} epsilon={} identified={}/{}",
            self.r,
            self.width,
            self.epsilon,
            self.identified_count,
            self.labelings()
        );
        let _ = writeln!(out, "labeling,identified,least_epsilon,attempts");
        for rec in &self.records {
            let eps = match rec.best {
                LeastEpsilon::Achieved(e) => e.to_string(),
                LeastEpsilon::NotIdentifiable => "none".into(),
            };
            let _ = writeln!(
                out,
                "{:0width$b},{},{},{}",
                rec.mask,
                rec.identified,
                eps,
                rec.attempts,
                width = self.r
            );
        }
        out
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}

fn better(a: LeastEpsilon, b: LeastEpsilon) -> LeastEpsilon {
    match (a, b) {
        (LeastEpsilon::Achieved(x), LeastEpsilon::Achieved(y)) => LeastEpsilon::Achieved(x.min(y)),
        (LeastEpsilon::Achieved(x), _) | (_, LeastEpsilon::Achieved(x)) => LeastEpsilon::Achieved(x),
        _ => LeastEpsilon::NotIdentifiable,
    }
}

/// For each of the `2^r` labelings, train up to `restarts` networks (seeds
/// `budget.seed`, `budget.seed + 1`, ...) on the labeling as 0/1 targets and
/// check ε-identification after every epoch.
///
/// All points serve as training data, so early stopping on a validation
/// partition is meaningless here and `budget.patience` is ignored.
pub fn run_shatter(
    points: &[Vec<f64>],
    width: usize,
    epsilon: f64,
    budget: &TrainConfig,
    restarts: usize,
    exec: Execution,
) -> Result<ShatterReport> {
    let band = EpsilonBand::new(epsilon)?;
    let r = points.len();
    if r > MAX_POINTS {
        return Err(Error::EnumerationCap { points: r, cap: MAX_POINTS });
    }
    if r == 0 {
        return Err(Error::EmptyData);
    }
    if restarts == 0 {
        return Err(Error::InvalidConfig("restarts must be at least 1".into()));
    }
    budget.validate()?;
    let n = points[0].len();
    if n == 0 {
        return Err(Error::Domain("points need at least one coordinate".into()));
    }
    if let Some(p) = points.iter().find(|p| p.len() != n) {
        return Err(Error::DimensionMismatch { expected: n, found: p.len() });
    }
    let cfg = TrainConfig { patience: 0, ..budget.clone() };

    let masks: Vec<u32> = (0..1u32 << r).collect();
    let outcomes = map_ordered(exec, &masks, |&mask| -> Result<LabelingRecord> {
        let in_s: Vec<bool> = (0..r).map(|i| mask >> i & 1 == 1).collect();
        let targets = in_s.iter().map(|&b| u8::from(b)).collect();
        let data = LabeledDataset::from_rows(format!("labeling-{mask}"), points, targets)?;
        let parts = Partitions { train: data.clone(), val: data.clone(), test: data };
        let mut best = LeastEpsilon::NotIdentifiable;
        for attempt in 0..restarts {
            let run_cfg = TrainConfig { seed: cfg.seed.wrapping_add(attempt as u64), ..cfg.clone() };
            let net0 = init_network(n, width, &run_cfg)?;
            let hit = |net: &_| epsilon_identified(net, points, &in_s, band).unwrap_or(false);
            let net = if hit(&net0) {
                net0
            } else {
                match train_until(&net0, &parts, &run_cfg, hit) {
                    Ok(trace) => trace.final_net,
                    Err(Error::Divergence { .. }) => continue,
                    Err(e) => return Err(e),
                }
            };
            best = better(best, least_epsilon(&net, points, &in_s)?);
            if epsilon_identified(&net, points, &in_s, band)? {
                return Ok(LabelingRecord { mask, identified: true, best, attempts: attempt + 1 });
            }
        }
        Ok(LabelingRecord { mask, identified: false, best, attempts: restarts })
    });
    let records = outcomes.into_iter().collect::<Result<Vec<_>>>()?;
    let identified_count = records.iter().filter(|r| r.identified).count();
    Ok(ShatterReport { r, width, epsilon, identified_count, records })
}

/// One point per line, coordinates separated by commas or whitespace.
/// Blank lines and `#` comments are skipped.
pub fn parse_points(text: &str, source_name: &str) -> Result<Vec<Vec<f64>>> {
    let mut points = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let point = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .enumerate()
            .map(|(j, s)| {
                s.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| Error::Parse {
                    source_name: source_name.into(),
                    line: i + 1,
                    column: j + 1,
                    message: format!("`{s}` is not a finite number"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        points.push(point);
    }
    Ok(points)
}

pub fn load_points(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_points(&text, &path.display().to_string())
}
