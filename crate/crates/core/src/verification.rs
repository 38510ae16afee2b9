//! Property checks on the special functions and on computed solutions.
//!
//! Every check records what was measured, the bound it was held to and
//! whether it passed; nothing here panics or aborts on a failed property.
//! Records marked `asserted = false` are observations that do not affect
//! the overall verdict.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::format::sig17;
use crate::fractional_calculus::{caputo, CaputoMesh, CaputoQuery, FractionalError};
use crate::quadrature::{integrate_adaptive, QuadratureError};
use crate::solver::{classical_mode_denominator, solve, ProblemSpec, SeriesSolution, SolverError};
use crate::special::{shared_ml, MittagLeffler, SpecialFunctionError};
use crate::spectral::{graded_norm, PhiData};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerificationError {
    #[error("the report contains no checks")]
    EmptyReport,
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error(transparent)]
    Fractional(#[from] FractionalError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Special(#[from] SpecialFunctionError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = "<")]
    LessThan,
    #[serde(rename = ">")]
    GreaterThan,
}

impl Relation {
    fn holds(self, measured: f64, bound: f64) -> bool {
        match self {
            Relation::AtMost => measured <= bound,
            Relation::LessThan => measured < bound,
            Relation::GreaterThan => measured > bound,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            Relation::AtMost => "<=",
            Relation::LessThan => "<",
            Relation::GreaterThan => ">",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub parameters: BTreeMap<String, f64>,
    pub measured: f64,
    pub relation: Relation,
    pub tolerance: f64,
    pub pass: bool,
    pub asserted: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    pub fn new(
        name: impl Into<String>,
        parameters: &[(&str, f64)],
        measured: f64,
        relation: Relation,
        tolerance: f64,
    ) -> Self {
        Self {
            name: name.into(),
            parameters: parameters
                .iter()
                .map(|(k, v)| (k.to_string(), *v))
                .collect(),
            measured,
            relation,
            tolerance,
            pass: relation.holds(measured, tolerance),
            asserted: true,
            note: None,
        }
    }

    /// A failed record for a value that could not be computed.
    pub fn errored(
        name: impl Into<String>,
        parameters: &[(&str, f64)],
        relation: Relation,
        tolerance: f64,
        err: impl ToString,
    ) -> Self {
        let mut c = Self::new(name, parameters, f64::NAN, relation, tolerance);
        c.note = Some(err.to_string());
        c
    }

    pub fn observation(mut self) -> Self {
        self.asserted = false;
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

/// Minimum of the denominator over a time sweep for one α.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct C0Row {
    pub alpha: f64,
    /// `min_t D(t)`, `D = E2² + E3(1 − E1)` at `−t^α`.
    pub c0: f64,
    pub t_at_min: f64,
    /// `min_t E3 (1 − E1)`.
    pub surrogate_min: f64,
}

/// One row of the resonance table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResonanceRow {
    #[serde(rename = "nuT")]
    pub nu_t: f64,
    pub alpha: f64,
    /// Minimum of the denominator over the sampled mode frequencies.
    pub min_d: f64,
    pub x_at_min: f64,
    /// Classical denominator `2(1 − cos x)/x²` at `x = νT`.
    pub classical_d: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
    pub empirical_c0: Vec<C0Row>,
    pub resonance_table: Vec<ResonanceRow>,
}

impl VerificationReport {
    pub fn push(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn merge(&mut self, other: VerificationReport) {
        self.checks.extend(other.checks);
        self.empirical_c0.extend(other.empirical_c0);
        self.resonance_table.extend(other.resonance_table);
    }

    /// Whether every asserted check passed; an empty report is invalid.
    pub fn passed(&self) -> Result<bool, VerificationError> {
        if self.checks.is_empty() {
            return Err(VerificationError::EmptyReport);
        }
        Ok(self.checks.iter().all(|c| c.pass || !c.asserted))
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.asserted && !c.pass)
    }

    pub fn write_json<W: Write>(&self, out: W) -> std::io::Result<()> {
        serde_json::to_writer_pretty(out, self).map_err(std::io::Error::from)
    }

    /// Aligned plain-text tables.
    pub fn to_text(&self) -> String {
        let mut rows: Vec<[String; 5]> = vec![[
            "status".into(),
            "check".into(),
            "measured".into(),
            "bound".into(),
            "parameters".into(),
        ]];
        for c in &self.checks {
            let status = match (c.pass, c.asserted) {
                (true, true) => "PASS",
                (false, true) => "FAIL",
                (true, false) => "note",
                (false, false) => "note!",
            };
            let params = c
                .parameters
                .iter()
                .map(|(k, v)| format!("{k}={v}"))
                .collect::<Vec<_>>()
                .join(" ");
            let params = match &c.note {
                Some(n) => format!("{params} ({n})"),
                None => params,
            };
            rows.push([
                status.into(),
                c.name.clone(),
                format!("{:.6e}", c.measured),
                format!("{} {:.3e}", c.relation.symbol(), c.tolerance),
                params,
            ]);
        }
        let mut out = String::new();
        push_table(&mut out, &rows);
        if !self.empirical_c0.is_empty() {
            let mut t = vec![[
                "alpha".to_string(),
                "C0".into(),
                "t_at_min".into(),
                "surrogate_min".into(),
            ]];
            for r in &self.empirical_c0 {
                t.push([
                    r.alpha.to_string(),
                    format!("{:.6e}", r.c0),
                    format!("{:.3e}", r.t_at_min),
                    format!("{:.6e}", r.surrogate_min),
                ]);
            }
            out.push('\n');
            push_table(&mut out, &t);
        }
        if !self.resonance_table.is_empty() {
            let mut t = vec![[
                "nuT".to_string(),
                "alpha".into(),
                "min_D".into(),
                "x_at_min".into(),
                "classical_D".into(),
            ]];
            for r in &self.resonance_table {
                t.push([
                    format!("{:.6}", r.nu_t),
                    r.alpha.to_string(),
                    format!("{:.6e}", r.min_d),
                    format!("{:.6}", r.x_at_min),
                    format!("{:.6e}", r.classical_d),
                ]);
            }
            out.push('\n');
            push_table(&mut out, &t);
        }
        out
    }

    /// The resonance table as CSV.
    pub fn write_resonance_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["nuT", "alpha", "min_D", "x_at_min", "classical_D"])?;
        for r in &self.resonance_table {
            w.write_record([
                sig17(r.nu_t),
                sig17(r.alpha),
                sig17(r.min_d),
                sig17(r.x_at_min),
                sig17(r.classical_d),
            ])?;
        }
        w.flush()
    }
}

fn push_table<const N: usize>(out: &mut String, rows: &[[String; N]]) {
    let mut width = [0usize; N];
    for r in rows {
        for (w, cell) in width.iter_mut().zip(r) {
            *w = (*w).max(cell.chars().count());
        }
    }
    for r in rows {
        let mut line = String::new();
        for (i, cell) in r.iter().enumerate() {
            if i + 1 == N {
                line.push_str(cell);
            } else {
                let _ = write!(line, "{cell:<w$}  ", w = width[i]);
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
}

/// `{1.1, 1.3, 1.5, 1.7, 1.9}`.
pub fn default_alpha_grid() -> Vec<f64> {
    vec![1.1, 1.3, 1.5, 1.7, 1.9]
}

/// `count` points log-spaced over `[lo, hi]`, ends exact.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.log10(), hi.log10());
            let mut g: Vec<f64> = (0..count)
                .map(|i| 10f64.powf(a + (b - a) * i as f64 / (count - 1) as f64))
                .collect();
            g[0] = lo;
            g[count - 1] = hi;
            g
        }
    }
}

/// 49 log-spaced times over `[1e-3, 1e6]`.
pub fn default_t_grid() -> Vec<f64> {
    log_grid(1e-3, 1e6, 49)
}

/// `{0.1T, 0.2T, …, 0.9T}`.
pub fn interior_grid(horizon: f64) -> Vec<f64> {
    (1..=9).map(|i| horizon * i as f64 / 10.0).collect()
}

fn check_grids(alphas: &[f64], ts: &[f64], closed_top: bool) -> Result<(), VerificationError> {
    if alphas.is_empty() || ts.is_empty() {
        return Err(VerificationError::Grid("grids must be non-empty".into()));
    }
    if let Some(a) = alphas
        .iter()
        .find(|&&a| !(a > 1.0 && (a < 2.0 || closed_top && a <= 2.0)))
    {
        return Err(VerificationError::Grid(format!(
            "alpha = {a} outside (1, 2)"
        )));
    }
    if let Some(t) = ts.iter().find(|&&t| !(t > 0.0 && t.is_finite())) {
        return Err(VerificationError::Grid(format!("t = {t} must be positive")));
    }
    Ok(())
}

/// `(E1, E2, E3)` at `−t^α`.
fn triple(alpha: f64, t: f64) -> Result<(f64, f64, f64), SpecialFunctionError> {
    let z = -t.powf(alpha);
    Ok((
        shared_ml(alpha, 1.0)?.eval(z)?,
        shared_ml(alpha, 2.0)?.eval(z)?,
        shared_ml(alpha, 3.0)?.eval(z)?,
    ))
}

/// `|E_{α,1}| < 1`, `|E_{α,2}| < 1` and `0 < E_{α,3} < 1/2` at `−t^α` on
/// every grid point, one record per α and bound holding the tightest value.
pub fn lemma_bounds_sweep(
    alpha_grid: &[f64],
    t_grid: &[f64],
) -> Result<VerificationReport, VerificationError> {
    check_grids(alpha_grid, t_grid, false)?;
    Ok(bounds_report(alpha_grid, t_grid, true))
}

/// Same bounds near the excluded end `α = 2`; recorded, not asserted.
pub fn lemma_boundary_probe(
    alpha_grid: &[f64],
    t_grid: &[f64],
) -> Result<VerificationReport, VerificationError> {
    check_grids(alpha_grid, t_grid, false)?;
    Ok(bounds_report(alpha_grid, t_grid, false))
}

fn bounds_report(alpha_grid: &[f64], t_grid: &[f64], asserted: bool) -> VerificationReport {
    let per_alpha: Vec<Vec<Check>> = alpha_grid
        .par_iter()
        .map(|&alpha| {
            let values: Result<Vec<(f64, f64, f64)>, _> =
                t_grid.par_iter().map(|&t| triple(alpha, t)).collect();
            let p = [
                ("alpha", alpha),
                ("points", t_grid.len() as f64),
                ("t_min", t_grid[0]),
                ("t_max", t_grid[t_grid.len() - 1]),
            ];
            let checks = match values {
                Err(e) => vec![Check::errored(
                    "lemma_bounds",
                    &p,
                    Relation::LessThan,
                    1.0,
                    e,
                )],
                Ok(v) => {
                    let max_e1 = v.iter().map(|x| x.0.abs()).fold(0.0, f64::max);
                    let max_e2 = v.iter().map(|x| x.1.abs()).fold(0.0, f64::max);
                    let max_e3 = v.iter().map(|x| x.2).fold(f64::NEG_INFINITY, f64::max);
                    let min_e3 = v.iter().map(|x| x.2).fold(f64::INFINITY, f64::min);
                    let sign_changes = v
                        .windows(2)
                        .filter(|w| w[0].2.signum() != w[1].2.signum())
                        .count();
                    vec![
                        Check::new(
                            "lemma_abs_E_alpha_1_below_1",
                            &p,
                            max_e1,
                            Relation::LessThan,
                            1.0,
                        ),
                        Check::new(
                            "lemma_abs_E_alpha_2_below_1",
                            &p,
                            max_e2,
                            Relation::LessThan,
                            1.0,
                        ),
                        Check::new(
                            "lemma_E_alpha_3_below_half",
                            &p,
                            max_e3,
                            Relation::LessThan,
                            0.5,
                        ),
                        Check::new(
                            "lemma_E_alpha_3_positive",
                            &p,
                            min_e3,
                            Relation::GreaterThan,
                            0.0,
                        ),
                        Check::new(
                            "lemma_E_alpha_3_sign_changes",
                            &p,
                            sign_changes as f64,
                            Relation::AtMost,
                            0.0,
                        ),
                    ]
                }
            };
            if asserted {
                checks
            } else {
                checks
                    .into_iter()
                    .map(|c| c.observation().with_note("boundary probe"))
                    .collect()
            }
        })
        .collect();
    VerificationReport {
        checks: per_alpha.into_iter().flatten().collect(),
        ..Default::default()
    }
}

/// `min_t D(t)` and `min_t E3(1 − E1)` over the grid.
pub fn empirical_c0(alpha: f64, t_grid: &[f64]) -> Result<C0Row, VerificationError> {
    check_grids(&[alpha], t_grid, false)?;
    let v: Vec<(f64, f64, f64)> = t_grid
        .par_iter()
        .map(|&t| triple(alpha, t))
        .collect::<Result<_, _>>()?;
    let mut row = C0Row {
        alpha,
        c0: f64::INFINITY,
        t_at_min: f64::NAN,
        surrogate_min: f64::INFINITY,
    };
    for (&t, &(e1, e2, e3)) in t_grid.iter().zip(&v) {
        let surrogate = e3 * (1.0 - e1);
        let d = e2 * e2 + surrogate;
        if d < row.c0 {
            row.c0 = d;
            row.t_at_min = t;
        }
        row.surrogate_min = row.surrogate_min.min(surrogate);
    }
    Ok(row)
}

/// [`empirical_c0`] for each α with a positivity record each.
pub fn c0_sweep(
    alpha_grid: &[f64],
    t_grid: &[f64],
) -> Result<VerificationReport, VerificationError> {
    check_grids(alpha_grid, t_grid, false)?;
    let mut report = VerificationReport::default();
    let rows: Vec<Result<C0Row, VerificationError>> = alpha_grid
        .par_iter()
        .map(|&a| empirical_c0(a, t_grid))
        .collect();
    for (&alpha, row) in alpha_grid.iter().zip(rows) {
        let p = [("alpha", alpha), ("points", t_grid.len() as f64)];
        match row {
            Ok(r) => {
                report.push(Check::new(
                    "empirical_C0_positive",
                    &p,
                    r.c0,
                    Relation::GreaterThan,
                    0.0,
                ));
                report.push(Check::new(
                    "C0_surrogate_positive",
                    &p,
                    r.surrogate_min,
                    Relation::GreaterThan,
                    0.0,
                ));
                report.empirical_c0.push(r);
            }
            Err(e) => report.push(Check::errored(
                "empirical_C0_positive",
                &p,
                Relation::GreaterThan,
                0.0,
                e,
            )),
        }
    }
    Ok(report)
}

/// Grids and tolerances for [`verify_solution`].
#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    /// Times strictly inside `(0, T)` for the Caputo residual.
    pub interior: Vec<f64>,
    /// Spatial points for pointwise checks of the assembled solution.
    pub x_grid: Option<Vec<Vec<f64>>>,
    pub mesh: CaputoMesh,
    /// Time grid over which the empirical `C₀` of the envelope is taken.
    pub c0_grid: Vec<f64>,
    pub periodic_tol: f64,
    pub assembled_periodic_tol: f64,
    pub integral_tol: f64,
    pub closed_form_integral_tol: f64,
}

impl VerifyOptions {
    pub fn for_horizon(horizon: f64) -> Self {
        Self {
            interior: interior_grid(horizon),
            x_grid: None,
            mesh: CaputoMesh::default(),
            c0_grid: default_t_grid(),
            periodic_tol: 1e-12,
            assembled_periodic_tol: 1e-10,
            integral_tol: 1e-8,
            closed_form_integral_tol: 1e-12,
        }
    }
}

struct ModeOutcome {
    residual: f64,
    periodic: f64,
    integral_quadrature: f64,
    integral_closed_form: f64,
    integral_value: f64,
}

/// Per-mode and assembled checks of a computed solution.
pub fn verify_solution(
    sol: &SeriesSolution,
    options: &VerifyOptions,
) -> Result<VerificationReport, VerificationError> {
    let spec = &sol.spec;
    let (alpha, horizon) = (spec.alpha, spec.horizon);
    if options.interior.is_empty() || options.interior.iter().any(|&t| !(t > 0.0 && t < horizon)) {
        return Err(VerificationError::Grid(
            "interior times must lie strictly inside (0, T)".into(),
        ));
    }
    let kernels = Arc::new(CaputoKernels::new(alpha)?);
    let outcomes: Vec<ModeOutcome> = (0..sol.modes.len())
        .into_par_iter()
        .map(|i| verify_mode(sol, i, &kernels, options))
        .collect::<Result<_, _>>()?;

    let mut report = VerificationReport::default();
    let base = [
        ("alpha", alpha),
        ("nu", spec.nu),
        ("T", horizon),
        ("K", sol.modes.len() as f64),
    ];
    let worst = |f: &dyn Fn(&ModeOutcome) -> f64| -> (f64, f64) {
        outcomes
            .iter()
            .zip(&sol.modes)
            .map(|(o, m)| (f(o), m.k as f64))
            .fold((f64::NEG_INFINITY, 0.0), |acc, (v, k)| {
                if v > acc.0 || v.is_nan() {
                    (v, k)
                } else {
                    acc
                }
            })
    };
    let with_mode = |k: f64| -> Vec<(&str, f64)> {
        let mut p = base.to_vec();
        p.push(("worst_mode", k));
        p
    };
    let (v, k) = worst(&|o| o.residual);
    report.push(Check::new(
        "mode_caputo_residual",
        &with_mode(k),
        v,
        Relation::AtMost,
        spec.tol,
    ));
    let (v, k) = worst(&|o| o.periodic);
    report.push(Check::new(
        "mode_periodicity",
        &with_mode(k),
        v,
        Relation::AtMost,
        options.periodic_tol,
    ));
    let (v, k) = worst(&|o| o.integral_quadrature);
    report.push(Check::new(
        "mode_integral_quadrature",
        &with_mode(k),
        v,
        Relation::AtMost,
        options.integral_tol,
    ));
    let (v, k) = worst(&|o| o.integral_closed_form);
    report.push(Check::new(
        "mode_integral_closed_form",
        &with_mode(k),
        v,
        Relation::AtMost,
        options.closed_form_integral_tol,
    ));

    // assembled solution in the H norm
    let u0 = sol.evaluate(0.0)?;
    let u_t = sol.evaluate(horizon)?;
    let diff: Vec<f64> = u0.iter().zip(&u_t).map(|(a, b)| a - b).collect();
    let ones = vec![1.0; diff.len()];
    let norm0 = graded_norm(&u0, &ones, 0.0).map_err(SolverError::from)?;
    let gap = graded_norm(&diff, &ones, 0.0).map_err(SolverError::from)?;
    report.push(Check::new(
        "assembled_periodicity_H",
        &base,
        relative(gap, norm0),
        Relation::AtMost,
        options.assembled_periodic_tol,
    ));
    let phi: Vec<f64> = sol.modes.iter().map(|m| m.phi_k).collect();
    let integral_gap: Vec<f64> = outcomes
        .iter()
        .zip(&phi)
        .map(|(o, p)| o.integral_value - p)
        .collect();
    let phi_norm = graded_norm(&phi, &ones, 0.0).map_err(SolverError::from)?;
    let gap = graded_norm(&integral_gap, &ones, 0.0).map_err(SolverError::from)?;
    report.push(Check::new(
        "assembled_integral_H",
        &base,
        relative(gap, phi_norm),
        Relation::AtMost,
        options.integral_tol,
    ));

    if let Some(points) = &options.x_grid {
        let mut worst = 0.0f64;
        for x in points {
            let a = sol.evaluate_at(0.0, x)?;
            let b = sol.evaluate_at(horizon, x)?;
            worst = worst.max(relative((a - b).abs(), norm0));
        }
        let mut p = base.to_vec();
        p.push(("points", points.len() as f64));
        report.push(Check::new(
            "pointwise_periodicity",
            &p,
            worst,
            Relation::AtMost,
            options.assembled_periodic_tol,
        ));
    }

    // ‖Au(t)‖ ≤ 2/(C₀ T) ‖Aφ‖ with C₀ measured at this α
    let c0 = empirical_c0(alpha, &options.c0_grid)?;
    let a_phi = sol.data_norm(1.0)?;
    let mut times = vec![0.0];
    times.extend(&options.interior);
    times.push(horizon);
    let a_u = times
        .par_iter()
        .map(|&t| sol.graded_norm_at(t, 1.0))
        .collect::<Result<Vec<f64>, _>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let envelope = 2.0 / (c0.c0 * horizon);
    let mut p = base.to_vec();
    p.push(("C0", c0.c0));
    p.push(("envelope", envelope));
    report.push(Check::new(
        "stability_envelope",
        &p,
        if a_phi > 0.0 { a_u / a_phi } else { a_u },
        Relation::AtMost,
        envelope,
    ));
    report.empirical_c0.push(c0);
    Ok(report)
}

fn relative(err: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        err / scale
    } else {
        err
    }
}

/// `E_{α,α−1}`, `E_{α,α}` for the mode second derivatives.
struct CaputoKernels {
    cosine: Arc<MittagLeffler>,
    sine: Arc<MittagLeffler>,
    e2: Arc<MittagLeffler>,
    e3: Arc<MittagLeffler>,
}

impl CaputoKernels {
    fn new(alpha: f64) -> Result<Self, SpecialFunctionError> {
        Ok(Self {
            cosine: shared_ml(alpha, alpha - 1.0)?,
            sine: shared_ml(alpha, alpha)?,
            e2: shared_ml(alpha, 2.0)?,
            e3: shared_ml(alpha, 3.0)?,
        })
    }
}

fn verify_mode(
    sol: &SeriesSolution,
    index: usize,
    kernels: &CaputoKernels,
    options: &VerifyOptions,
) -> Result<ModeOutcome, VerificationError> {
    let m = &sol.modes[index];
    let (alpha, horizon) = (sol.spec.alpha, sol.spec.horizon);
    if m.a_k == 0.0 && m.b_k == 0.0 && m.phi_k == 0.0 {
        return Ok(ModeOutcome {
            residual: 0.0,
            periodic: 0.0,
            integral_quadrature: 0.0,
            integral_closed_form: 0.0,
            integral_value: 0.0,
        });
    }
    let lam = m.nu_k_sq;
    // h'' of T_k from the closed-form second derivatives
    let h2 = |xi: f64| -> f64 {
        let z = -lam * xi.powf(alpha);
        match (kernels.cosine.eval(z), kernels.sine.eval(z)) {
            (Ok(c), Ok(s)) => {
                -lam * (m.a_k * xi.powf(alpha - 2.0) * c + m.b_k * xi.powf(alpha - 1.0) * s)
            }
            _ => f64::NAN,
        }
    };
    let mut values = Vec::with_capacity(options.interior.len() + 2);
    let mut residual = 0.0f64;
    for &t in &options.interior {
        let q = CaputoQuery::new(h2, alpha, t)?.with_mesh(options.mesh);
        let d = caputo(&q)?.value;
        let u = sol.mode_at(index, t)?;
        values.push(u.abs());
        residual = residual.max((d + lam * u).abs());
    }
    let start = sol.mode_at(index, 0.0)?;
    let end = sol.mode_at(index, horizon)?;
    values.push(start.abs());
    values.push(end.abs());
    let peak = values.into_iter().fold(0.0, f64::max);

    let scale = m.a_k.abs() + m.b_k.abs() * horizon;
    let periodic = relative((start - end).abs(), scale);

    let mut failure = None;
    let q = integrate_adaptive(
        |t| match sol.mode_at(index, t) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        },
        0.0,
        horizon,
        1e-15 * scale * horizon,
        1e-13,
        4000,
    )?;
    if let Some(e) = failure {
        return Err(e.into());
    }
    // a_k T E_{α,2}(−ν_k²T^α) + b_k T² E_{α,3}(−ν_k²T^α), the term-wise primitive
    let z = -lam * horizon.powf(alpha);
    let closed =
        m.a_k * horizon * kernels.e2.eval(z)? + m.b_k * horizon * horizon * kernels.e3.eval(z)?;
    let phi_scale = m.phi_k.abs();
    Ok(ModeOutcome {
        residual: relative(residual, peak),
        periodic,
        integral_quadrature: relative((q.value - m.phi_k).abs(), phi_scale),
        integral_closed_form: relative((closed - m.phi_k).abs(), phi_scale),
        integral_value: q.value,
    })
}

/// `solve(φ + cψ) = solve(φ) + c·solve(ψ)` on the mode coefficients, for
/// coefficient-form data `φ`, `ψ` over the first K modes.
pub fn linearity_check(
    spec: &ProblemSpec,
    phi: &[f64],
    psi: &[f64],
    c: f64,
) -> Result<Check, VerificationError> {
    let with = |data: Vec<f64>| -> Result<SeriesSolution, SolverError> {
        let mut s = spec.clone();
        s.phi = PhiData::Coefficients(
            data.into_iter()
                .enumerate()
                .map(|(i, v)| (i + 1, v))
                .collect(),
        );
        solve(&s)
    };
    let combined: Vec<f64> = phi.iter().zip(psi).map(|(p, q)| p + c * q).collect();
    let (x, y, z) = (with(phi.to_vec())?, with(psi.to_vec())?, with(combined)?);
    let mut worst = 0.0f64;
    for ((a, b), s) in x.modes.iter().zip(&y.modes).zip(&z.modes) {
        for (u, v, w) in [(a.a_k, b.a_k, s.a_k), (a.b_k, b.b_k, s.b_k)] {
            let scale = u.abs() + (c * v).abs();
            worst = worst.max(relative((w - (u + c * v)).abs(), scale));
        }
    }
    Ok(Check::new(
        "linearity_in_data",
        &[
            ("alpha", spec.alpha),
            ("nu", spec.nu),
            ("T", spec.horizon),
            ("c", c),
        ],
        worst,
        Relation::AtMost,
        1e-12,
    ))
}

/// `D = E2² + E3(1 − E1)` at `z = −x² T^{α−2}`, i.e. the denominator of a
/// mode with `ν_k T = x`; for `α = 2` the classical closed form.
pub fn resonance_denominator(
    alpha: f64,
    horizon: f64,
    x: f64,
) -> Result<f64, SpecialFunctionError> {
    if alpha == 2.0 {
        return Ok(classical_mode_denominator(x));
    }
    let z = -x * x * horizon.powf(alpha - 2.0);
    let (e1, e2, e3) = (
        shared_ml(alpha, 1.0)?.eval(z)?,
        shared_ml(alpha, 2.0)?.eval(z)?,
        shared_ml(alpha, 3.0)?.eval(z)?,
    );
    Ok(e2 * e2 + e3 * (1.0 - e1))
}

/// `(α, x, D)` for every α and x.
pub fn resonance_curve(
    horizon: f64,
    alpha_grid: &[f64],
    x_values: &[f64],
) -> Result<Vec<(f64, f64, f64)>, SpecialFunctionError> {
    alpha_grid
        .iter()
        .flat_map(|&a| x_values.iter().map(move |&x| (a, x)))
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&(a, x)| resonance_denominator(a, horizon, x).map(|d| (a, x, d)))
        .collect()
}

/// `x_j = νT·j/points`, `j = 1..points`.
pub fn uniform_x(nu_t: f64, points: usize) -> Vec<f64> {
    (1..=points)
        .map(|j| nu_t * j as f64 / points as f64)
        .collect()
}

/// Fractional against classical denominators for one `(ν, T)`.
pub fn resonance_sweep(
    nu: f64,
    horizon: f64,
    alpha_grid: &[f64],
    x_values: &[f64],
) -> Result<VerificationReport, VerificationError> {
    check_grids(alpha_grid, x_values, true)?;
    let nu_t = nu * horizon;
    let classical = classical_mode_denominator(nu_t);
    let periods = nu_t / (2.0 * std::f64::consts::PI);
    let resonant = periods.round() >= 1.0 && (periods - periods.round()).abs() < 1e-12;
    let mut report = VerificationReport::default();
    let base = [("nu", nu), ("T", horizon), ("nuT", nu_t)];
    let curve = resonance_curve(horizon, alpha_grid, x_values);
    let curve = match curve {
        Ok(c) => c,
        Err(e) => {
            report.push(Check::errored(
                "resonance_sweep",
                &base,
                Relation::GreaterThan,
                0.0,
                e,
            ));
            return Ok(report);
        }
    };
    let mut fractional_minima = Vec::new();
    for &alpha in alpha_grid {
        let (x_at_min, min_d) = curve
            .iter()
            .filter(|r| r.0 == alpha)
            .map(|r| (r.1, r.2))
            .fold((f64::NAN, f64::INFINITY), |acc, (x, d)| {
                if d < acc.1 {
                    (x, d)
                } else {
                    acc
                }
            });
        report.resonance_table.push(ResonanceRow {
            nu_t,
            alpha,
            min_d,
            x_at_min,
            classical_d: classical,
        });
        let mut p = base.to_vec();
        p.push(("alpha", alpha));
        if alpha < 2.0 {
            report.push(Check::new(
                "fractional_denominator_positive",
                &p,
                min_d,
                Relation::GreaterThan,
                0.0,
            ));
            fractional_minima.push((alpha, min_d));
        }
    }
    if resonant {
        report.push(Check::new(
            "classical_denominator_vanishes",
            &base,
            classical.abs(),
            Relation::AtMost,
            1e-12,
        ));
        // minima along increasing α at resonance
        let mut sorted = fractional_minima.clone();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        let increases = sorted.windows(2).filter(|w| !(w[1].1 < w[0].1)).count();
        report.push(
            Check::new(
                "fractional_minimum_decreases_toward_2",
                &base,
                increases as f64,
                Relation::AtMost,
                0.0,
            )
            .observation(),
        );
    } else {
        report.push(Check::new(
            "classical_denominator_positive",
            &base,
            classical,
            Relation::GreaterThan,
            0.0,
        ));
    }
    Ok(report)
}

/// Zeros of the classical denominator on `(0, x_max]` sampled at `points`
/// uniform nodes: `D(x)·x² ≤ tol`.
pub fn classical_zeros(x_max: f64, points: usize, tol: f64) -> Vec<f64> {
    (1..=points)
        .map(|j| x_max * j as f64 / points as f64)
        .filter(|&x| classical_mode_denominator(x) * x * x <= tol)
        .collect()
}
