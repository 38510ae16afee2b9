//! The operator `A` through its eigenpairs `A v_k = λ_k v_k`.
//!
//! Three models: a synthetic rule `λ_k = c k^p` with no spatial realisation,
//! the Dirichlet Laplacian on `(0, L)` and on the rectangle `(0, L₁)×(0, L₂)`.
//! Data `φ` enters either as Fourier coefficients or as samples on a grid;
//! samples are interpolated by local cubics and projected onto `v_k` with
//! composite Gauss–Legendre, refining until the coefficients settle.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quadrature::GaussLegendre;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectralError {
    #[error("invalid spectrum model: {0}")]
    InvalidModel(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("sampled data under-resolved: coefficient change {estimate:e} exceeds tolerance {tolerance:e}")]
    Resolution { estimate: f64, tolerance: f64 },
    #[error("invalid data: {0}")]
    Data(String),
    #[error("{0}")]
    Io(String),
}

/// Enumeration rule for the eigenpairs of `A`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpectrumModel {
    Synthetic {
        c: f64,
        p: f64,
    },
    #[serde(rename = "dirichlet_1d")]
    Dirichlet1d {
        #[serde(rename = "L")]
        length: f64,
    },
    #[serde(rename = "dirichlet_2d")]
    Dirichlet2d {
        #[serde(rename = "L1")]
        l1: f64,
        #[serde(rename = "L2")]
        l2: f64,
    },
}

/// One eigenpair in enumeration order; `index` is 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Mode {
    pub index: usize,
    pub lambda: f64,
    /// Quantum numbers: `(k, 0)` in 1D and for the synthetic rule,
    /// `(m, n)` on the rectangle.
    pub m: usize,
    pub n: usize,
}

fn positive(name: &str, v: f64) -> Result<(), SpectralError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(SpectralError::InvalidModel(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

impl SpectrumModel {
    pub fn validate(&self) -> Result<(), SpectralError> {
        match *self {
            SpectrumModel::Synthetic { c, p } => {
                positive("c", c)?;
                positive("p", p)
            }
            SpectrumModel::Dirichlet1d { length } => positive("L", length),
            SpectrumModel::Dirichlet2d { l1, l2 } => {
                positive("L1", l1)?;
                positive("L2", l2)
            }
        }
    }

    /// Spatial dimension, `None` for the synthetic rule.
    pub fn dimension(&self) -> Option<usize> {
        match self {
            SpectrumModel::Synthetic { .. } => None,
            SpectrumModel::Dirichlet1d { .. } => Some(1),
            SpectrumModel::Dirichlet2d { .. } => Some(2),
        }
    }

    /// First `count` eigenpairs in enumeration order.
    pub fn modes(&self, count: usize) -> Result<Vec<Mode>, SpectralError> {
        self.validate()?;
        Ok(match *self {
            SpectrumModel::Synthetic { c, p } => (1..=count)
                .map(|k| Mode {
                    index: k,
                    lambda: c * (k as f64).powf(p),
                    m: k,
                    n: 0,
                })
                .collect(),
            SpectrumModel::Dirichlet1d { length } => (1..=count)
                .map(|k| Mode {
                    index: k,
                    lambda: (k as f64 * PI / length).powi(2),
                    m: k,
                    n: 0,
                })
                .collect(),
            SpectrumModel::Dirichlet2d { l1, l2 } => rectangle_modes(l1, l2, count),
        })
    }

    /// `v_k(x)` for the mode, `x` in the closed domain.
    pub fn eigenfunction(&self, mode: &Mode, x: &[f64]) -> Result<f64, SpectralError> {
        self.check_point(x)?;
        match *self {
            SpectrumModel::Synthetic { .. } => unreachable!("rejected by check_point"),
            SpectrumModel::Dirichlet1d { length } => {
                Ok((2.0 / length).sqrt() * (mode.m as f64 * PI * x[0] / length).sin())
            }
            SpectrumModel::Dirichlet2d { l1, l2 } => Ok(2.0 / (l1 * l2).sqrt()
                * (mode.m as f64 * PI * x[0] / l1).sin()
                * (mode.n as f64 * PI * x[1] / l2).sin()),
        }
    }

    /// Side lengths of the spatial domain.
    pub fn extent(&self) -> Result<Vec<f64>, SpectralError> {
        match *self {
            SpectrumModel::Synthetic { .. } => Err(SpectralError::Domain(
                "the synthetic spectrum has no spatial domain".into(),
            )),
            SpectrumModel::Dirichlet1d { length } => Ok(vec![length]),
            SpectrumModel::Dirichlet2d { l1, l2 } => Ok(vec![l1, l2]),
        }
    }

    fn check_point(&self, x: &[f64]) -> Result<(), SpectralError> {
        let extent = self.extent()?;
        if x.len() != extent.len() {
            return Err(SpectralError::Domain(format!(
                "expected a point with {} coordinates, got {}",
                extent.len(),
                x.len()
            )));
        }
        for (xi, li) in x.iter().zip(&extent) {
            if !(*xi >= 0.0 && *xi <= *li) {
                return Err(SpectralError::Domain(format!(
                    "point {x:?} lies outside the domain"
                )));
            }
        }
        Ok(())
    }
}

/// Eigenpairs `π²(m²/L₁² + n²/L₂²)` sorted by value, ties by `(m, n)`.
fn rectangle_modes(l1: f64, l2: f64, count: usize) -> Vec<Mode> {
    if count == 0 {
        return Vec::new();
    }
    let lambda =
        |m: usize, n: usize| PI * PI * ((m * m) as f64 / (l1 * l1) + (n * n) as f64 / (l2 * l2));
    // grow the cutoff until at least `count` pairs lie below it
    let mut cutoff = lambda(1, 1) * 2.0;
    loop {
        let mut pairs = Vec::new();
        let m_max = (l1 * cutoff.sqrt() / PI).floor() as usize + 1;
        let n_max = (l2 * cutoff.sqrt() / PI).floor() as usize + 1;
        for m in 1..=m_max {
            for n in 1..=n_max {
                let v = lambda(m, n);
                if v <= cutoff {
                    pairs.push((v, m, n));
                }
            }
        }
        if pairs.len() >= count {
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
            return pairs
                .into_iter()
                .take(count)
                .enumerate()
                .map(|(i, (v, m, n))| Mode {
                    index: i + 1,
                    lambda: v,
                    m,
                    n,
                })
                .collect();
        }
        cutoff *= 2.0;
    }
}

/// First `count` eigenvalues in enumeration order.
pub fn eigenvalues(model: &SpectrumModel, count: usize) -> Result<Vec<f64>, SpectralError> {
    if count == 0 {
        return Err(SpectralError::Domain("need at least one eigenvalue".into()));
    }
    Ok(model.modes(count)?.into_iter().map(|m| m.lambda).collect())
}

/// The data vector `φ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhiData {
    /// Fourier coefficients keyed by 1-based mode index; absent keys are 0.
    Coefficients(BTreeMap<usize, f64>),
    Sampled(SampledData),
}

/// Function values on a tensor grid covering the closed domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampledData {
    /// One sorted, strictly increasing axis per spatial dimension.
    pub axes: Vec<Vec<f64>>,
    /// Values in row-major order (last axis fastest).
    pub values: Vec<f64>,
}

impl SampledData {
    pub fn new_1d(x: Vec<f64>, values: Vec<f64>) -> Result<Self, SpectralError> {
        let d = SampledData {
            axes: vec![x],
            values,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn new_2d(x: Vec<f64>, y: Vec<f64>, values: Vec<f64>) -> Result<Self, SpectralError> {
        let d = SampledData {
            axes: vec![x, y],
            values,
        };
        d.validate()?;
        Ok(d)
    }

    fn validate(&self) -> Result<(), SpectralError> {
        let expected: usize = self.axes.iter().map(Vec::len).product();
        if expected != self.values.len() {
            return Err(SpectralError::Data(format!(
                "{} values for a grid of {expected} points",
                self.values.len()
            )));
        }
        for axis in &self.axes {
            if axis.len() < 4 {
                return Err(SpectralError::Data(
                    "each grid axis needs at least 4 points".into(),
                ));
            }
            if axis.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(SpectralError::Data(
                    "grid axes must be strictly increasing".into(),
                ));
            }
        }
        if self.values.iter().any(|v| !v.is_finite())
            || self.axes.iter().flatten().any(|v| !v.is_finite())
        {
            return Err(SpectralError::Data("non-finite sample".into()));
        }
        Ok(())
    }

    fn check_covers(&self, model: &SpectrumModel) -> Result<(), SpectralError> {
        let extent = model.extent()?;
        if extent.len() != self.axes.len() {
            return Err(SpectralError::Data(format!(
                "{}-dimensional samples for a {}-dimensional model",
                self.axes.len(),
                extent.len()
            )));
        }
        for (axis, l) in self.axes.iter().zip(extent) {
            let (a, b) = (axis[0], axis[axis.len() - 1]);
            let slack = 1e-12 * l;
            if (a - 0.0).abs() > slack || (b - l).abs() > slack {
                return Err(SpectralError::Data(format!(
                    "grid axis spans [{a}, {b}], the domain is [0, {l}]"
                )));
            }
        }
        Ok(())
    }

    /// Piecewise-cubic interpolant on one axis: value at `x` from the four
    /// nearest nodes (shifted inwards at the ends).
    fn stencil(axis: &[f64], x: f64) -> (usize, [f64; 4]) {
        let n = axis.len();
        let cell = match axis.binary_search_by(|v| v.total_cmp(&x)) {
            Ok(i) => i.min(n - 2),
            Err(i) => i.saturating_sub(1).min(n - 2),
        };
        let start = cell.saturating_sub(1).min(n - 4);
        let nodes = &axis[start..start + 4];
        let mut w = [0.0; 4];
        for j in 0..4 {
            let mut l = 1.0;
            for i in 0..4 {
                if i != j {
                    l *= (x - nodes[i]) / (nodes[j] - nodes[i]);
                }
            }
            w[j] = l;
        }
        (start, w)
    }

    /// Interpolated value at a point of the domain.
    pub fn interpolate(&self, x: &[f64]) -> f64 {
        match self.axes.len() {
            1 => {
                let (s, w) = Self::stencil(&self.axes[0], x[0]);
                (0..4).map(|j| w[j] * self.values[s + j]).sum()
            }
            _ => {
                let ny = self.axes[1].len();
                let (sx, wx) = Self::stencil(&self.axes[0], x[0]);
                let (sy, wy) = Self::stencil(&self.axes[1], x[1]);
                let mut acc = 0.0;
                for (i, wi) in wx.iter().enumerate() {
                    let row = (sx + i) * ny + sy;
                    let r: f64 = wy
                        .iter()
                        .zip(&self.values[row..row + 4])
                        .map(|(w, v)| w * v)
                        .sum();
                    acc += wi * r;
                }
                acc
            }
        }
    }

    /// Same data on every other node of each axis (ends kept), used to
    /// estimate how well the grid resolves the coefficients.
    fn coarsened(&self) -> Option<SampledData> {
        let keep: Vec<Vec<usize>> = self
            .axes
            .iter()
            .map(|a| {
                let mut idx: Vec<usize> = (0..a.len()).step_by(2).collect();
                if *idx.last().unwrap() != a.len() - 1 {
                    idx.push(a.len() - 1);
                }
                idx
            })
            .collect();
        if keep.iter().any(|k| k.len() < 4) {
            return None;
        }
        let axes: Vec<Vec<f64>> = self
            .axes
            .iter()
            .zip(&keep)
            .map(|(a, k)| k.iter().map(|&i| a[i]).collect())
            .collect();
        let values = if self.axes.len() == 1 {
            keep[0].iter().map(|&i| self.values[i]).collect()
        } else {
            let ny = self.axes[1].len();
            let mut v = Vec::new();
            for &i in &keep[0] {
                for &j in &keep[1] {
                    v.push(self.values[i * ny + j]);
                }
            }
            v
        };
        Some(SampledData { axes, values })
    }
}

/// Controls for projecting sampled data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExpandControls {
    /// Agreement between successive panel doublings.
    pub quadrature_tol: f64,
    /// Largest acceptable change of the coefficients between the sample
    /// grid and its every-other-node coarsening, relative to the data's
    /// ℓ² norm, after Richardson scaling for the cubic interpolant.
    pub resolution_tol: f64,
    /// Coefficients beyond K computed to estimate the discarded tail.
    pub tail_factor: usize,
}

impl Default for ExpandControls {
    fn default() -> Self {
        Self {
            quadrature_tol: 1e-10,
            resolution_tol: 1e-6,
            tail_factor: 2,
        }
    }
}

/// Summary of how much of `φ` the first K modes carry.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailReport {
    /// `Σ_{k≤K} λ_k² |φ_k|²`.
    pub graded_sum: f64,
    /// `(Σ_{k>K} λ_k² |φ_k|²)^{1/2}` over the coefficients available
    /// beyond K (explicit data, or the extra projected modes).
    pub tail_norm: f64,
    /// `max_{k>K/2} λ_k²|φ_k|² / max_{k≤K/2} λ_k²|φ_k|²`; at least 1 means
    /// the D(A)-weighted coefficients are not decaying.
    pub decay_indicator: f64,
    /// Estimated coefficient error from the sample resolution (0 for
    /// coefficient input).
    pub resolution_estimate: f64,
    pub warning: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Expansion {
    pub modes: Vec<Mode>,
    /// `φ_1, …, φ_K`.
    pub coefficients: Vec<f64>,
    /// Modes beyond K for which coefficients are available.
    pub tail_modes: Vec<Mode>,
    pub tail_coefficients: Vec<f64>,
    pub tail: TailReport,
}

/// `φ_k = (φ, v_k)` for `k = 1..K` plus a tail report.
pub fn expand(
    phi: &PhiData,
    model: &SpectrumModel,
    count: usize,
    controls: &ExpandControls,
) -> Result<Expansion, SpectralError> {
    if count == 0 {
        return Err(SpectralError::Domain("K must be at least 1".into()));
    }
    match phi {
        PhiData::Coefficients(map) => {
            if let Some((&k, _)) = map.iter().find(|(&k, _)| k == 0) {
                return Err(SpectralError::Data(format!(
                    "mode indices are 1-based, got {k}"
                )));
            }
            if map.values().any(|v| !v.is_finite()) {
                return Err(SpectralError::Data("non-finite coefficient".into()));
            }
            let available = map.keys().next_back().copied().unwrap_or(0).max(count);
            let modes = model.modes(available)?;
            let all: Vec<f64> = (1..=available)
                .map(|k| map.get(&k).copied().unwrap_or(0.0))
                .collect();
            Ok(finish(modes, all, count, 0.0))
        }
        PhiData::Sampled(data) => {
            data.validate()?;
            data.check_covers(model)?;
            let available = count * controls.tail_factor.max(1);
            let modes = model.modes(available)?;
            let fine = project(data, model, &modes, controls.quadrature_tol)?;
            let resolution = match data.coarsened() {
                Some(coarse) => {
                    let c = project(&coarse, model, &modes[..count], controls.quadrature_tol)?;
                    let norm = fine
                        .iter()
                        .map(|v| v * v)
                        .sum::<f64>()
                        .sqrt()
                        .max(f64::MIN_POSITIVE);
                    // cubic interpolation: halving h cuts the error 16-fold
                    let change = fine
                        .iter()
                        .zip(&c)
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0, f64::max);
                    change / 15.0 / norm
                }
                None => f64::INFINITY,
            };
            if !(resolution <= controls.resolution_tol) {
                return Err(SpectralError::Resolution {
                    estimate: resolution,
                    tolerance: controls.resolution_tol,
                });
            }
            Ok(finish(modes, fine, count, resolution))
        }
    }
}

fn finish(modes: Vec<Mode>, all: Vec<f64>, count: usize, resolution: f64) -> Expansion {
    let weighted: Vec<f64> = modes
        .iter()
        .zip(&all)
        .map(|(m, c)| (m.lambda * c).powi(2))
        .collect();
    let graded_sum = weighted[..count].iter().sum();
    let tail_norm = weighted[count..].iter().sum::<f64>().sqrt();
    let half = count.div_ceil(2);
    let head_max = weighted[..half].iter().copied().fold(0.0, f64::max);
    let late_max = weighted[half..count].iter().copied().fold(0.0, f64::max);
    let decay_indicator = if head_max > 0.0 {
        late_max / head_max
    } else if late_max > 0.0 {
        f64::INFINITY
    } else {
        0.0
    };
    let warning = (count >= 4 && decay_indicator >= 1.0).then(|| {
        format!(
            "λ_k²|φ_k|² is not decaying over k ≤ {count} (indicator {decay_indicator:.3e}); the data may lie outside D(A)"
        )
    });
    Expansion {
        modes: modes[..count].to_vec(),
        coefficients: all[..count].to_vec(),
        tail_modes: modes[count..].to_vec(),
        tail_coefficients: all[count..].to_vec(),
        tail: TailReport {
            graded_sum,
            tail_norm,
            decay_indicator,
            resolution_estimate: resolution,
            warning,
        },
    }
}

/// Inner products with `v_k` by composite Gauss–Legendre over the sample
/// cells, doubling the subdivision until all coefficients settle.
fn project(
    data: &SampledData,
    model: &SpectrumModel,
    modes: &[Mode],
    tol: f64,
) -> Result<Vec<f64>, SpectralError> {
    let rule = GaussLegendre::new(8);
    let mut previous: Option<Vec<f64>> = None;
    let mut sub = 1usize;
    let max_sub = 256;
    while sub <= max_sub {
        let current = project_at(data, model, modes, &rule, sub);
        if let Some(prev) = &previous {
            let scale = current.iter().map(|v| v * v).sum::<f64>().sqrt().max(1.0);
            let change = current
                .iter()
                .zip(prev)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            if change <= tol * scale {
                return Ok(current);
            }
        }
        previous = Some(current);
        sub *= 2;
    }
    Err(SpectralError::Resolution {
        estimate: f64::NAN,
        tolerance: tol,
    })
}

fn axis_nodes(axis: &[f64], rule: &GaussLegendre, sub: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity((axis.len() - 1) * sub * rule.nodes.len());
    for w in axis.windows(2) {
        let h = (w[1] - w[0]) / sub as f64;
        for s in 0..sub {
            let a = w[0] + s as f64 * h;
            for (x, wt) in rule.nodes.iter().zip(&rule.weights) {
                out.push((a + 0.5 * h * (x + 1.0), 0.5 * h * wt));
            }
        }
    }
    out
}

fn project_at(
    data: &SampledData,
    model: &SpectrumModel,
    modes: &[Mode],
    rule: &GaussLegendre,
    sub: usize,
) -> Vec<f64> {
    match *model {
        SpectrumModel::Dirichlet1d { length } => {
            let nodes = axis_nodes(&data.axes[0], rule, sub);
            let f: Vec<(f64, f64)> = nodes
                .iter()
                .map(|&(x, w)| (x, w * data.interpolate(&[x])))
                .collect();
            let norm = (2.0 / length).sqrt();
            modes
                .iter()
                .map(|m| {
                    let k = m.m as f64 * PI / length;
                    crate::summation::sum(
                        &f.iter()
                            .map(|&(x, wf)| wf * norm * (k * x).sin())
                            .collect::<Vec<_>>(),
                    )
                })
                .collect()
        }
        SpectrumModel::Dirichlet2d { l1, l2 } => {
            let nx = axis_nodes(&data.axes[0], rule, sub);
            let ny = axis_nodes(&data.axes[1], rule, sub);
            let mut f = vec![0.0; nx.len() * ny.len()];
            for (i, &(x, wx)) in nx.iter().enumerate() {
                for (j, &(y, wy)) in ny.iter().enumerate() {
                    f[i * ny.len() + j] = wx * wy * data.interpolate(&[x, y]);
                }
            }
            let norm = 2.0 / (l1 * l2).sqrt();
            modes
                .iter()
                .map(|m| {
                    let sx: Vec<f64> = nx
                        .iter()
                        .map(|&(x, _)| (m.m as f64 * PI * x / l1).sin())
                        .collect();
                    let sy: Vec<f64> = ny
                        .iter()
                        .map(|&(y, _)| (m.n as f64 * PI * y / l2).sin())
                        .collect();
                    let mut acc = crate::summation::CompensatedSum::new();
                    for (i, sxi) in sx.iter().enumerate() {
                        let row = &f[i * ny.len()..(i + 1) * ny.len()];
                        let r: f64 = row.iter().zip(&sy).map(|(a, b)| a * b).sum();
                        acc.add(sxi * r);
                    }
                    norm * acc.value()
                })
                .collect()
        }
        SpectrumModel::Synthetic { .. } => unreachable!("rejected by check_covers"),
    }
}

/// `Σ_k c_k v_k(x)` over the first `coeffs.len()` modes.
pub fn synthesize(coeffs: &[f64], model: &SpectrumModel, x: &[f64]) -> Result<f64, SpectralError> {
    let modes = model.modes(coeffs.len())?;
    model.check_point(x)?;
    let mut acc = crate::summation::CompensatedSum::new();
    for (m, c) in modes.iter().zip(coeffs) {
        if *c != 0.0 {
            acc.add(c * model.eigenfunction(m, x)?);
        }
    }
    Ok(acc.value())
}

/// `(Σ λ_k^{2s} |c_k|²)^{1/2}`; `s = 1` is `‖A·‖`, `s = 0` the ℓ² norm.
pub fn graded_norm(coeffs: &[f64], eigenvalues: &[f64], s: f64) -> Result<f64, SpectralError> {
    if coeffs.len() != eigenvalues.len() {
        return Err(SpectralError::Domain(format!(
            "{} coefficients against {} eigenvalues",
            coeffs.len(),
            eigenvalues.len()
        )));
    }
    if !(s >= 0.0) {
        return Err(SpectralError::Domain(format!(
            "order s = {s} must be nonnegative"
        )));
    }
    // scale first so large λ do not overflow the squares
    let terms: Vec<f64> = coeffs
        .iter()
        .zip(eigenvalues)
        .map(|(c, l)| c.abs() * l.powf(s))
        .collect();
    let m = terms.iter().copied().fold(0.0, f64::max);
    if m == 0.0 {
        return Ok(0.0);
    }
    Ok(m * terms.iter().map(|t| (t / m).powi(2)).sum::<f64>().sqrt())
}

/// Coefficient-form data from a JSON object mapping index → value.
pub fn coefficients_from_json(text: &str) -> Result<BTreeMap<usize, f64>, SpectralError> {
    let raw: BTreeMap<String, f64> = serde_json::from_str(text)
        .map_err(|e| SpectralError::Data(format!("coefficient JSON: {e}")))?;
    raw.into_iter()
        .map(|(k, v)| {
            let idx: usize = k.trim().parse().map_err(|_| {
                SpectralError::Data(format!("coefficient key {k:?} is not a mode index"))
            })?;
            if idx == 0 {
                return Err(SpectralError::Data("mode indices are 1-based".into()));
            }
            Ok((idx, v))
        })
        .collect()
}

/// Sampled data from CSV rows `x,value` (1D) or `x,y,value` (2D) covering
/// a full tensor grid in any row order. A header row is optional.
pub fn sampled_from_csv<R: Read>(
    reader: R,
    dimension: usize,
) -> Result<SampledData, SpectralError> {
    if !(dimension == 1 || dimension == 2) {
        return Err(SpectralError::Data(format!(
            "unsupported dimension {dimension}"
        )));
    }
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| SpectralError::Data(format!("CSV: {e}")))?;
        let parsed: Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(v) if v.len() == dimension + 1 => rows.push(v),
            Ok(v) => {
                return Err(SpectralError::Data(format!(
                    "CSV row {} has {} fields, expected {}",
                    i + 1,
                    v.len(),
                    dimension + 1
                )))
            }
            Err(_) if i == 0 => continue,
            Err(e) => return Err(SpectralError::Data(format!("CSV row {}: {e}", i + 1))),
        }
    }
    let axes: Vec<Vec<f64>> = (0..dimension)
        .map(|d| {
            let mut a: Vec<f64> = rows.iter().map(|r| r[d]).collect();
            a.sort_by(f64::total_cmp);
            a.dedup();
            a
        })
        .collect();
    let size: usize = axes.iter().map(Vec::len).product();
    if size != rows.len() {
        return Err(SpectralError::Data(format!(
            "{} rows do not form a tensor grid ({} distinct points per axis)",
            rows.len(),
            axes.iter()
                .map(|a| a.len().to_string())
                .collect::<Vec<_>>()
                .join("×")
        )));
    }
    let mut values = vec![f64::NAN; size];
    for r in &rows {
        let mut flat = 0;
        for (d, axis) in axes.iter().enumerate() {
            let i = axis
                .binary_search_by(|v| v.total_cmp(&r[d]))
                .expect("value taken from this axis");
            flat = flat * axis.len() + i;
        }
        if !values[flat].is_nan() {
            return Err(SpectralError::Data(format!(
                "duplicate grid point {:?}",
                &r[..dimension]
            )));
        }
        values[flat] = r[dimension];
    }
    let data = SampledData { axes, values };
    data.validate()?;
    Ok(data)
}

pub fn sampled_from_csv_path(path: &Path, dimension: usize) -> Result<SampledData, SpectralError> {
    let file = std::fs::File::open(path)
        .map_err(|e| SpectralError::Io(format!("{}: {e}", path.display())))?;
    sampled_from_csv(file, dimension)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line() -> SpectrumModel {
        SpectrumModel::Dirichlet1d { length: PI }
    }

    #[test]
    fn eigenvalue_rows() {
        assert_eq!(eigenvalues(&line(), 3).unwrap(), vec![1.0, 4.0, 9.0]);
        let s = SpectrumModel::Synthetic { c: 1.0, p: 2.0 };
        assert_eq!(eigenvalues(&s, 3).unwrap(), vec![1.0, 4.0, 9.0]);
        let sq = SpectrumModel::Dirichlet2d { l1: PI, l2: PI };
        let v = eigenvalues(&sq, 4).unwrap();
        for (a, b) in v.iter().zip([2.0, 5.0, 5.0, 8.0]) {
            assert!((a - b).abs() < 1e-13);
        }
        let modes = sq.modes(3).unwrap();
        assert_eq!((modes[1].m, modes[1].n), (1, 2));
        assert_eq!((modes[2].m, modes[2].n), (2, 1));
    }

    #[test]
    fn rejects_bad_models() {
        assert!(SpectrumModel::Dirichlet1d { length: 0.0 }
            .validate()
            .is_err());
        assert!(SpectrumModel::Synthetic { c: 1.0, p: -1.0 }
            .validate()
            .is_err());
        assert!(eigenvalues(&line(), 0).is_err());
    }

    #[test]
    fn coefficient_pass_through() {
        let phi = PhiData::Coefficients(BTreeMap::from([(2, 1.0)]));
        let e = expand(&phi, &line(), 4, &ExpandControls::default()).unwrap();
        assert_eq!(e.coefficients, vec![0.0, 1.0, 0.0, 0.0]);
        assert_eq!(e.tail.tail_norm, 0.0);
        let e = expand(&phi, &line(), 1, &ExpandControls::default()).unwrap();
        assert_eq!(e.tail.tail_norm, 4.0);
    }

    #[test]
    fn sampled_sine_projects_onto_first_mode() {
        let n = 201;
        let x: Vec<f64> = (0..n).map(|i| PI * i as f64 / (n - 1) as f64).collect();
        let v: Vec<f64> = x.iter().map(|x| x.sin()).collect();
        let data = SampledData::new_1d(x, v).unwrap();
        let e = expand(
            &PhiData::Sampled(data),
            &line(),
            5,
            &ExpandControls::default(),
        )
        .unwrap();
        assert!(
            (e.coefficients[0] - (PI / 2.0).sqrt()).abs() < 1e-8,
            "{}",
            e.coefficients[0]
        );
        for c in &e.coefficients[1..] {
            assert!(c.abs() < 1e-8);
        }
    }

    #[test]
    fn synthesize_rows() {
        let v = synthesize(&[1.0, 0.0, 0.0], &line(), &[PI / 2.0]).unwrap();
        assert!((v - (2.0 / PI).sqrt()).abs() < 1e-15);
        assert_eq!(synthesize(&[0.0; 3], &line(), &[1.0]).unwrap(), 0.0);
        assert!(synthesize(&[1.0], &line(), &[4.0]).is_err());
        assert!(synthesize(&[1.0], &SpectrumModel::Synthetic { c: 1.0, p: 1.0 }, &[0.5]).is_err());
    }

    #[test]
    fn graded_norm_rows() {
        assert_eq!(graded_norm(&[1.0], &[4.0], 1.0).unwrap(), 4.0);
        assert!((graded_norm(&[1.0, 1.0], &[1.0, 4.0], 1.0).unwrap() - 17f64.sqrt()).abs() < 1e-15);
        assert!((graded_norm(&[3.0, 4.0], &[10.0, 20.0], 0.0).unwrap() - 5.0).abs() < 1e-15);
    }

    #[test]
    fn csv_grid_roundtrip() {
        let text = "x,y,value\n0,0,1\n0,1,2\n1,0,3\n1,1,4\n2,0,5\n2,1,6\n3,0,7\n3,1,8\n";
        assert!(sampled_from_csv(text.as_bytes(), 2).is_err()); // y axis too short
        let text = "0,1\n1,2\n2,3\n3,4\n";
        let d = sampled_from_csv(text.as_bytes(), 1).unwrap();
        assert_eq!(d.values, vec![1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn non_decaying_data_warns() {
        // φ = 1 is not in D(A): φ_k ~ 1/k for odd k
        let n = 2001;
        let x: Vec<f64> = (0..n).map(|i| PI * i as f64 / (n - 1) as f64).collect();
        let v = vec![1.0; n];
        let data = SampledData::new_1d(x, v).unwrap();
        let e = expand(
            &PhiData::Sampled(data),
            &line(),
            16,
            &ExpandControls::default(),
        )
        .unwrap();
        assert!(e.tail.warning.is_some());
    }
}
