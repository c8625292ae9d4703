//! Full-batch gradient descent on the halved squared error
//! `E = (1/2r) Σ (y − f(x))²`, with seeded initialization, stratified
//! splitting and per-epoch error traces.

use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::LabeledDataset;
use crate::metrics::{self, CurveTriple};
use crate::network::{sigmoid, SigmoidNetwork};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    /// Learning rate.
    pub eta: f64,
    pub max_epochs: usize,
    /// Stop after this many epochs without a new best validation error; 0 disables.
    pub patience: usize,
    pub seed: u64,
    /// Half-width of the uniform initialization interval.
    pub init_scale: f64,
    /// Stop once the training MSE is at or below this value.
    pub target_mse: Option<f64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            eta: 0.1,
            max_epochs: 5000,
            patience: 50,
            seed: 0,
            init_scale: 0.5,
            target_mse: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta >= 0.0 && self.eta.is_finite()) {
            return Err(Error::InvalidConfig(format!("eta must be finite and >= 0, got {}", self.eta)));
        }
        if !(self.init_scale >= 0.0 && self.init_scale.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "init_scale must be finite and >= 0, got {}",
                self.init_scale
            )));
        }
        if self.max_epochs == 0 {
            return Err(Error::InvalidConfig("max_epochs must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    MaxEpochs,
    TargetReached,
    EarlyStop,
}

impl StopReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            StopReason::MaxEpochs => "max_epochs",
            StopReason::TargetReached => "target_reached",
            StopReason::EarlyStop => "early_stop",
        }
    }
}

/// Per-epoch MSE on the three partitions. Entry `i` is measured after the
/// `i+1`-th update; `initial_mse` holds the values before any update.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingTrace {
    pub train_mse: Vec<f64>,
    pub val_mse: Vec<f64>,
    pub test_mse: Vec<f64>,
    pub initial_mse: [f64; 3],
    pub epochs_run: usize,
    pub final_net: SigmoidNetwork,
    pub stop_reason: StopReason,
}

impl TrainingTrace {
    pub fn curves(&self) -> Result<CurveTriple> {
        CurveTriple::new(self.train_mse.clone(), self.val_mse.clone(), self.test_mse.clone())
    }

    /// Final `(train, val, test)` MSE.
    pub fn final_mse(&self) -> [f64; 3] {
        let last = |v: &[f64], init: f64| v.last().copied().unwrap_or(init);
        [
            last(&self.train_mse, self.initial_mse[0]),
            last(&self.val_mse, self.initial_mse[1]),
            last(&self.test_mse, self.initial_mse[2]),
        ]
    }

    /// Delimited text with columns `epoch,train_mse,val_mse,test_mse`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,train_mse,val_mse,test_mse\n");
        for i in 0..self.epochs_run {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                i + 1,
                self.train_mse[i],
                self.val_mse[i],
                self.test_mse[i]
            );
        }
        out
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}

/// Read the three curves back from trace text.
pub fn parse_trace_csv(text: &str, source_name: &str) -> Result<CurveTriple> {
    let (mut g1, mut g2, mut g3) = (Vec::new(), Vec::new(), Vec::new());
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("epoch") {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 4 {
            return Err(Error::Parse {
                source_name: source_name.into(),
                line: i + 1,
                column: cells.len(),
                message: "expected 4 columns".into(),
            });
        }
        let mut vals = [0.0; 3];
        for (j, v) in vals.iter_mut().enumerate() {
            *v = cells[j + 1].trim().parse().map_err(|_| Error::Parse {
                source_name: source_name.into(),
                line: i + 1,
                column: j + 2,
                message: format!("`{}` is not a number", cells[j + 1]),
            })?;
        }
        g1.push(vals[0]);
        g2.push(vals[1]);
        g3.push(vals[2]);
    }
    CurveTriple::new(g1, g2, g3)
}

/// Gradient of the halved squared error, laid out like the network.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub d_w0: Vec<f64>,
    pub d_t0: Vec<f64>,
    pub d_w1: Vec<f64>,
    pub d_t1: f64,
}

impl Gradients {
    fn zeros(net: &SigmoidNetwork) -> Self {
        let (n, m) = (net.inputs(), net.width());
        Self {
            d_w0: vec![0.0; m * n],
            d_t0: vec![0.0; m],
            d_w1: vec![0.0; m],
            d_t1: 0.0,
        }
    }

    /// Components in the parameter order of [`SigmoidNetwork::params`].
    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.d_w0
            .iter()
            .chain(&self.d_t0)
            .chain(&self.d_w1)
            .copied()
            .chain(std::iter::once(self.d_t1))
    }

    fn matches(&self, net: &SigmoidNetwork) -> Result<()> {
        let (n, m) = (net.inputs(), net.width());
        for (len, expected) in [(self.d_w0.len(), m * n), (self.d_t0.len(), m), (self.d_w1.len(), m)] {
            if len != expected {
                return Err(Error::DimensionMismatch { expected, found: len });
            }
        }
        Ok(())
    }
}

fn check_batch(net: &SigmoidNetwork, data: &LabeledDataset) -> Result<()> {
    if data.is_empty() {
        return Err(Error::EmptyData);
    }
    if data.attributes() != net.inputs() {
        return Err(Error::DimensionMismatch { expected: net.inputs(), found: data.attributes() });
    }
    Ok(())
}

/// `(1/2r) Σ (y − f(x))²` over the batch.
pub fn error(net: &SigmoidNetwork, data: &LabeledDataset) -> Result<f64> {
    check_batch(net, data)?;
    let outputs = outputs(net, data);
    metrics::halved_objective(&outputs, &targets_f64(data))
}

/// Mean squared error `(1/r) Σ (y − f(x))²`, the value recorded in traces.
pub fn mean_squared_error(net: &SigmoidNetwork, data: &LabeledDataset) -> Result<f64> {
    check_batch(net, data)?;
    metrics::mse_mean(&outputs(net, data), &targets_f64(data))
}

fn outputs(net: &SigmoidNetwork, data: &LabeledDataset) -> Vec<f64> {
    data.rows().map(|x| net.output(x)).collect()
}

fn targets_f64(data: &LabeledDataset) -> Vec<f64> {
    data.targets().iter().map(|&t| f64::from(t)).collect()
}

/// Exact gradient of [`error`] with respect to every parameter.
pub fn gradients(net: &SigmoidNetwork, data: &LabeledDataset) -> Result<Gradients> {
    check_batch(net, data)?;
    let (n, m) = (net.inputs(), net.width());
    let mut g = Gradients::zeros(net);
    let mut act = vec![0.0; m];
    for (x, &y) in data.rows().zip(data.targets()) {
        let mut f = net.t1();
        for (k, a) in act.iter_mut().enumerate() {
            *a = sigmoid(net.pre_activation(k, x));
            f += net.w1()[k] * *a;
        }
        let e = f64::from(y) - f;
        g.d_t1 += e;
        for (k, &a) in act.iter().enumerate() {
            g.d_w1[k] += e * a;
            let delta = e * net.w1()[k] * a * (1.0 - a);
            g.d_t0[k] += delta;
            for (d, xj) in g.d_w0[k * n..(k + 1) * n].iter_mut().zip(x) {
                *d += delta * xj;
            }
        }
    }
    let scale = -1.0 / data.len() as f64;
    for v in g.d_w0.iter_mut().chain(&mut g.d_t0).chain(&mut g.d_w1) {
        *v *= scale;
    }
    g.d_t1 *= scale;
    Ok(g)
}

/// `p ← p − eta · g_p` for every parameter.
pub fn gd_step(net: &SigmoidNetwork, g: &Gradients, eta: f64) -> Result<SigmoidNetwork> {
    let mut next = net.clone();
    apply_step(&mut next, g, eta)?;
    Ok(next)
}

fn apply_step(net: &mut SigmoidNetwork, g: &Gradients, eta: f64) -> Result<()> {
    g.matches(net)?;
    let (w0, t0, w1, t1) = net.parts_mut();
    for (p, d) in w0.iter_mut().zip(&g.d_w0).chain(t0.iter_mut().zip(&g.d_t0)).chain(w1.iter_mut().zip(&g.d_w1)) {
        *p -= eta * d;
    }
    *t1 -= eta * g.d_t1;
    Ok(())
}

/// Largest `|analytic − central difference| / max(1, |analytic|)` over all
/// parameters, with step `h`.
pub fn finite_diff_check(net: &SigmoidNetwork, data: &LabeledDataset, h: f64) -> Result<f64> {
    let g = gradients(net, data)?;
    compare_with_central_differences(net, data, &g, h)
}

/// Same measure as [`finite_diff_check`] but against a caller-supplied gradient.
pub fn compare_with_central_differences(
    net: &SigmoidNetwork,
    data: &LabeledDataset,
    analytic: &Gradients,
    h: f64,
) -> Result<f64> {
    if h.is_nan() || h <= 0.0 {
        return Err(Error::Domain(format!("finite-difference step must be positive, got {h}")));
    }
    check_batch(net, data)?;
    analytic.matches(net)?;
    let mut probe = net.clone();
    let mut worst = 0.0f64;
    for (i, a) in analytic.values().enumerate() {
        let p = *probe.param_mut(i);
        *probe.param_mut(i) = p + h;
        let up = error(&probe, data)?;
        *probe.param_mut(i) = p - h;
        let down = error(&probe, data)?;
        *probe.param_mut(i) = p;
        let numeric = (up - down) / (2.0 * h);
        worst = worst.max((a - numeric).abs() / a.abs().max(1.0));
    }
    Ok(worst)
}

/// Uniform initialization on `[-init_scale, init_scale]` from `cfg.seed`.
pub fn init_network(n: usize, m: usize, cfg: &TrainConfig) -> Result<SigmoidNetwork> {
    let mut net = SigmoidNetwork::zeros(n, m)?;
    let s = cfg.init_scale;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for i in 0..net.param_count() {
        *net.param_mut(i) = if s > 0.0 { rng.random_range(-s..=s) } else { 0.0 };
    }
    Ok(net)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Partitions {
    pub train: LabeledDataset,
    pub val: LabeledDataset,
    pub test: LabeledDataset,
}

impl Partitions {
    pub fn sizes(&self) -> [usize; 3] {
        [self.train.len(), self.val.len(), self.test.len()]
    }
}

/// Split `total` items by `ratios` with the largest-remainder rule; ties
/// go to the earlier partition.
pub fn largest_remainder(total: usize, ratios: [f64; 3]) -> [usize; 3] {
    let exact = ratios.map(|p| p * total as f64);
    let mut sizes = exact.map(|x| x.floor() as usize);
    let mut left = total - sizes.iter().sum::<usize>();
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &i in order.iter().cycle() {
        if left == 0 {
            break;
        }
        sizes[i] += 1;
        left -= 1;
    }
    sizes
}

/// Seeded, class-stratified split into train / validation / test.
///
/// Partition sizes follow [`largest_remainder`] on the whole set; each class
/// is spread across the partitions in proportion, so every partition sees
/// both classes whenever the class counts allow it.
pub fn split(data: &LabeledDataset, ratios: [f64; 3], seed: u64) -> Result<Partitions> {
    if ratios.iter().any(|&p| p.is_nan() || p <= 0.0) || (ratios.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidConfig(format!(
            "split ratios must be positive and sum to 1, got {ratios:?}"
        )));
    }
    let r = data.len();
    let sizes = largest_remainder(r, ratios);
    if r < 3 || sizes.contains(&0) {
        return Err(Error::DatasetTooSmall { samples: r });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let mut classes: Vec<Vec<usize>> = vec![Vec::new(), Vec::new()];
    for (i, &t) in data.targets().iter().enumerate() {
        classes[t as usize].push(i);
    }
    for c in &mut classes {
        c.shuffle(&mut rng);
    }

    // per-class allocation, then repair the column sums to match `sizes`
    let mut alloc: Vec<[usize; 3]> = classes.iter().map(|c| largest_remainder(c.len(), ratios)).collect();
    loop {
        let col = |p: usize, a: &Vec<[usize; 3]>| a.iter().map(|row| row[p]).sum::<usize>();
        let Some(over) = (0..3).find(|&p| col(p, &alloc) > sizes[p]) else { break };
        let under = (0..3).find(|&p| col(p, &alloc) < sizes[p]).expect("totals agree");
        // move from the class with the most members in the surplus partition
        let c = (0..alloc.len())
            .max_by_key(|&c| (alloc[c][over], std::cmp::Reverse(c)))
            .expect("two classes");
        alloc[c][over] -= 1;
        alloc[c][under] += 1;
    }

    let mut parts: [Vec<usize>; 3] = Default::default();
    for (members, a) in classes.iter().zip(&alloc) {
        let mut it = members.iter().copied();
        for (p, &count) in a.iter().enumerate() {
            parts[p].extend(it.by_ref().take(count));
        }
    }
    for p in &mut parts {
        p.sort_unstable();
    }
    let name = data.name();
    Ok(Partitions {
        train: data.subset(&parts[0], format!("{name}/train"))?,
        val: data.subset(&parts[1], format!("{name}/val"))?,
        test: data.subset(&parts[2], format!("{name}/test"))?,
    })
}

/// Full-batch gradient descent on the training partition, recording the
/// MSE of all three partitions after every epoch.
pub fn train(net0: &SigmoidNetwork, data: &Partitions, cfg: &TrainConfig) -> Result<TrainingTrace> {
    train_until(net0, data, cfg, |_| false)
}

/// [`train`] with an extra stop condition checked after every epoch. When it
/// fires the run ends with [`StopReason::TargetReached`].
pub fn train_until(
    net0: &SigmoidNetwork,
    data: &Partitions,
    cfg: &TrainConfig,
    mut reached: impl FnMut(&SigmoidNetwork) -> bool,
) -> Result<TrainingTrace> {
    cfg.validate()?;
    for part in [&data.train, &data.val, &data.test] {
        check_batch(net0, part)?;
    }
    let eval = |net: &SigmoidNetwork| -> Result<[f64; 3]> {
        Ok([
            mean_squared_error(net, &data.train)?,
            mean_squared_error(net, &data.val)?,
            mean_squared_error(net, &data.test)?,
        ])
    };

    let mut net = net0.clone();
    let initial_mse = eval(&net)?;
    let mut trace = TrainingTrace {
        train_mse: Vec::with_capacity(cfg.max_epochs.min(1 << 16)),
        val_mse: Vec::with_capacity(cfg.max_epochs.min(1 << 16)),
        test_mse: Vec::with_capacity(cfg.max_epochs.min(1 << 16)),
        initial_mse,
        epochs_run: 0,
        final_net: net0.clone(),
        stop_reason: StopReason::MaxEpochs,
    };
    let mut best_val = f64::INFINITY;
    let mut stale = 0usize;

    for epoch in 1..=cfg.max_epochs {
        let g = gradients(&net, &data.train)?;
        apply_step(&mut net, &g, cfg.eta)?;
        if net.params().any(|p| !p.is_finite()) {
            return Err(Error::Divergence { epoch });
        }
        let [tr, va, te] = eval(&net)?;
        if !(tr.is_finite() && va.is_finite() && te.is_finite()) {
            return Err(Error::Divergence { epoch });
        }
        trace.train_mse.push(tr);
        trace.val_mse.push(va);
        trace.test_mse.push(te);
        trace.epochs_run = epoch;

        if cfg.target_mse.is_some_and(|t| tr <= t) || reached(&net) {
            trace.stop_reason = StopReason::TargetReached;
            break;
        }
        if va < best_val {
            best_val = va;
            stale = 0;
        } else {
            stale += 1;
        }
        if cfg.patience > 0 && stale >= cfg.patience {
            trace.stop_reason = StopReason::EarlyStop;
            break;
        }
    }
    trace.final_net = net;
    Ok(trace)
}
