//! The two-layer sigmoid network
//! `f(x) = w1 · sigmoid(W0 x + t0) + t1` with a linear output unit.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Logistic sigmoid evaluated without overflow for large `|s|`.
#[inline]
pub fn sigmoid(s: f64) -> f64 {
    if s >= 0.0 {
        1.0 / (1.0 + (-s).exp())
    } else {
        let e = s.exp();
        e / (1.0 + e)
    }
}

/// Weights and thresholds of a single-hidden-layer network.
///
/// `w0` is stored row-major with one row of `n` input weights per hidden
/// unit. Outputs are not clamped: the output unit is linear, so `forward`
/// can leave `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmoidNetwork {
    n: usize,
    m: usize,
    w0: Vec<f64>,
    t0: Vec<f64>,
    w1: Vec<f64>,
    t1: f64,
}

impl SigmoidNetwork {
    pub fn new(n: usize, m: usize, w0: Vec<f64>, t0: Vec<f64>, w1: Vec<f64>, t1: f64) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::Domain(format!("network needs n, m >= 1 (got n={n}, m={m})")));
        }
        for (len, expected) in [(w0.len(), m * n), (t0.len(), m), (w1.len(), m)] {
            if len != expected {
                return Err(Error::DimensionMismatch { expected, found: len });
            }
        }
        let net = Self { n, m, w0, t0, w1, t1 };
        if net.params().any(|p| !p.is_finite()) {
            return Err(Error::Domain("network parameters must be finite".into()));
        }
        Ok(net)
    }

    pub fn zeros(n: usize, m: usize) -> Result<Self> {
        Self::new(n, m, vec![0.0; m * n], vec![0.0; m], vec![0.0; m], 0.0)
    }

    pub fn inputs(&self) -> usize {
        self.n
    }

    pub fn width(&self) -> usize {
        self.m
    }

    pub fn w0(&self) -> &[f64] {
        &self.w0
    }

    /// Input weights of hidden unit `k`.
    pub fn w0_row(&self, k: usize) -> &[f64] {
        &self.w0[k * self.n..(k + 1) * self.n]
    }

    pub fn t0(&self) -> &[f64] {
        &self.t0
    }

    pub fn w1(&self) -> &[f64] {
        &self.w1
    }

    pub fn t1(&self) -> f64 {
        self.t1
    }

    /// Number of trainable parameters, `nm + 2m + 1`.
    pub fn param_count(&self) -> usize {
        self.m * self.n + 2 * self.m + 1
    }

    /// Parameters in the fixed order `w0, t0, w1, t1`.
    pub fn params(&self) -> impl Iterator<Item = f64> + '_ {
        self.w0
            .iter()
            .chain(&self.t0)
            .chain(&self.w1)
            .copied()
            .chain(std::iter::once(self.t1))
    }

    /// Mutable access to parameter `i` in the order of [`params`](Self::params).
    pub fn param_mut(&mut self, i: usize) -> &mut f64 {
        let (mn, m) = (self.m * self.n, self.m);
        if i < mn {
            &mut self.w0[i]
        } else if i < mn + m {
            &mut self.t0[i - mn]
        } else if i < mn + 2 * m {
            &mut self.w1[i - mn - m]
        } else if i == mn + 2 * m {
            &mut self.t1
        } else {
            panic!("parameter index {i} out of range for {} parameters", self.param_count())
        }
    }

    pub(crate) fn parts_mut(&mut self) -> (&mut [f64], &mut [f64], &mut [f64], &mut f64) {
        (&mut self.w0, &mut self.t0, &mut self.w1, &mut self.t1)
    }

    pub(crate) fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: x.len() });
        }
        Ok(())
    }

    /// Network output at `x`.
    pub fn forward(&self, x: &[f64]) -> Result<f64> {
        self.check_input(x)?;
        Ok(self.output(x))
    }

    /// Output without the length check; `x.len()` must equal `n`.
    #[inline]
    pub(crate) fn output(&self, x: &[f64]) -> f64 {
        let mut out = self.t1;
        for k in 0..self.m {
            out += self.w1[k] * sigmoid(self.pre_activation(k, x));
        }
        out
    }

    #[inline]
    pub(crate) fn pre_activation(&self, k: usize, x: &[f64]) -> f64 {
        self.w0_row(k).iter().zip(x).map(|(w, xi)| w * xi).sum::<f64>() + self.t0[k]
    }

    /// Hard decision: 1 when the output is at least `threshold` (ties go to 1).
    pub fn classify(&self, x: &[f64], threshold: f64) -> Result<u8> {
        Ok(u8::from(self.forward(x)? >= threshold))
    }

    /// Serialize to the `m × (n + 3)` weight matrix: each row is
    /// `[w0 row, t0, w1, t1-or-0]`, with `t1` only in the first row.
    pub fn to_weight_matrix(&self) -> Vec<Vec<f64>> {
        (0..self.m)
            .map(|k| {
                let mut row = Vec::with_capacity(self.n + 3);
                row.extend_from_slice(self.w0_row(k));
                row.push(self.t0[k]);
                row.push(self.w1[k]);
                row.push(if k == 0 { self.t1 } else { 0.0 });
                row
            })
            .collect()
    }

    pub fn from_weight_matrix(mat: &[Vec<f64>]) -> Result<Self> {
        let m = mat.len();
        if m == 0 {
            return Err(Error::MalformedMatrix("no rows".into()));
        }
        let cols = mat[0].len();
        if cols < 4 {
            return Err(Error::MalformedMatrix(format!(
                "need at least 4 columns (n >= 1), got {cols}"
            )));
        }
        let n = cols - 3;
        let mut w0 = Vec::with_capacity(m * n);
        let mut t0 = Vec::with_capacity(m);
        let mut w1 = Vec::with_capacity(m);
        for (k, row) in mat.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::MalformedMatrix(format!(
                    "row {} has {} columns, expected {cols}",
                    k + 1,
                    row.len()
                )));
            }
            if k > 0 && row[n + 2] != 0.0 {
                return Err(Error::MalformedMatrix(format!(
                    "row {} must end in 0 (only the first row carries the output threshold)",
                    k + 1
                )));
            }
            w0.extend_from_slice(&row[..n]);
            t0.push(row[n]);
            w1.push(row[n + 1]);
        }
        Self::new(n, m, w0, t0, w1, mat[0][n + 2])
            .map_err(|e| Error::MalformedMatrix(e.to_string()))
    }

    /// Weight-matrix text: a `# sigmoid-network n=<n> m=<m>` header followed by
    /// one comma-separated row per hidden unit.
    pub fn to_weight_text(&self) -> String {
        let mut out = format!("# sigmoid-network n={} m={}\n", self.n, self.m);
        for row in self.to_weight_matrix() {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    pub fn from_weight_text(text: &str, source_name: &str) -> Result<Self> {
        let mut header: Option<(usize, usize)> = None;
        let mut rows = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if let Some(dims) = rest.trim().strip_prefix("sigmoid-network") {
                    header = Some(parse_dims(dims).ok_or_else(|| Error::Parse {
                        source_name: source_name.into(),
                        line: i + 1,
                        column: 1,
                        message: "header must read `# sigmoid-network n=<n> m=<m>`".into(),
                    })?);
                }
                continue;
            }
            let row = line
                .split(',')
                .enumerate()
                .map(|(j, cell)| {
                    cell.trim().parse::<f64>().map_err(|e| Error::Parse {
                        source_name: source_name.into(),
                        line: i + 1,
                        column: j + 1,
                        message: e.to_string(),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        let net = Self::from_weight_matrix(&rows)?;
        if let Some((n, m)) = header {
            if (n, m) != (net.n, net.m) {
                return Err(Error::MalformedMatrix(format!(
                    "header says n={n} m={m} but rows give n={} m={}",
                    net.n, net.m
                )));
            }
        }
        Ok(net)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_weight_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_weight_text(&text, &path.display().to_string())
    }
}

fn parse_dims(s: &str) -> Option<(usize, usize)> {
    let mut n = None;
    let mut m = None;
    for tok in s.split_whitespace() {
        if let Some(v) = tok.strip_prefix("n=") {
            n = v.parse().ok();
        } else if let Some(v) = tok.strip_prefix("m=") {
            m = v.parse().ok();
        }
    }
    Some((n?, m?))
}

/// Tolerance `epsilon` of the identification bands
/// `(1 - epsilon, 1]` and `[0, epsilon)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpsilonBand(f64);

impl EpsilonBand {
    /// Requires `0 < epsilon < 0.5` so the two bands are disjoint.
    pub fn new(epsilon: f64) -> Result<Self> {
        if epsilon > 0.0 && epsilon < 0.5 {
            Ok(Self(epsilon))
        } else {
            Err(Error::Domain(format!("epsilon must lie in (0, 0.5), got {epsilon}")))
        }
    }

    pub fn epsilon(&self) -> f64 {
        self.0
    }

    pub fn accepts(&self, output: f64, in_s: bool) -> bool {
        if in_s {
            1.0 - self.0 < output && output <= 1.0
        } else {
            (0.0..self.0).contains(&output)
        }
    }
}

/// Outcome of [`least_epsilon`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum LeastEpsilon {
    /// Infimum of the tolerances under which the labeling is identified.
    Achieved(f64),
    NotIdentifiable,
}

fn check_labeling(net: &SigmoidNetwork, points: &[Vec<f64>], in_s: &[bool]) -> Result<()> {
    if points.len() != in_s.len() {
        return Err(Error::DimensionMismatch { expected: points.len(), found: in_s.len() });
    }
    points.iter().try_for_each(|x| net.check_input(x))
}

/// True iff every point of `S` maps into `(1 - eps, 1]` and every other
/// point into `[0, eps)`.
pub fn epsilon_identified(
    net: &SigmoidNetwork,
    points: &[Vec<f64>],
    in_s: &[bool],
    band: EpsilonBand,
) -> Result<bool> {
    check_labeling(net, points, in_s)?;
    Ok(points
        .iter()
        .zip(in_s)
        .all(|(x, &s)| band.accepts(net.output(x), s)))
}

/// Smallest tolerance the network achieves on the labeling: the largest of
/// `1 - f` over `S` and `f` over its complement. `NotIdentifiable` when an
/// output leaves `[0, 1]` or the infimum reaches 0.5.
pub fn least_epsilon(net: &SigmoidNetwork, points: &[Vec<f64>], in_s: &[bool]) -> Result<LeastEpsilon> {
    check_labeling(net, points, in_s)?;
    let mut worst = 0.0f64;
    for (x, &s) in points.iter().zip(in_s) {
        let f = net.output(x);
        if !(0.0..=1.0).contains(&f) {
            return Ok(LeastEpsilon::NotIdentifiable);
        }
        worst = worst.max(if s { 1.0 - f } else { f });
    }
    Ok(if worst < 0.5 {
        LeastEpsilon::Achieved(worst)
    } else {
        LeastEpsilon::NotIdentifiable
    })
}
