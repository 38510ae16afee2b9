use std::io::Write;
use std::path::Path;

use fracb_core::format::{sig17, sig17_decimal};
use fracb_core::solver::{solve as solve_problem, SeriesSolution, SolverError};
use fracb_core::special::{ml as ml_value, ml_oracle, MLQuery, SpecialFunctionError};
use fracb_core::spectral::SpectralError;
use fracb_core::verification::{
    c0_sweep, lemma_boundary_probe, lemma_bounds_sweep, linearity_check, log_grid, resonance_curve,
    uniform_x, verify_solution, VerificationError, VerificationReport, VerifyOptions,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{load, Loaded};
use crate::{BoundsArgs, Failure, MlArgs, ResonanceArgs};

fn numeric(e: impl std::fmt::Display) -> Failure {
    Failure::Numeric(e.to_string())
}

fn solver_failure(e: SolverError) -> Failure {
    match e {
        SolverError::InvalidProblem(_)
        | SolverError::Spectral(
            SpectralError::Data(_) | SpectralError::InvalidModel(_) | SpectralError::Io(_),
        ) => Failure::Config(e.to_string()),
        e => numeric(e),
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    std::fs::write(path, bytes).map_err(|e| numeric(format!("{}: {e}", path.display())))
}

fn uniform_times(horizon: f64, points: usize) -> Vec<f64> {
    let mut t: Vec<f64> = (0..points)
        .map(|i| horizon * i as f64 / (points - 1) as f64)
        .collect();
    t[points - 1] = horizon;
    t
}

fn solve_loaded(loaded: &Loaded) -> Result<SeriesSolution, Failure> {
    let sol = solve_problem(&loaded.spec).map_err(solver_failure)?;
    for w in &sol.warnings {
        eprintln!("fracb: warning: {w}");
    }
    Ok(sol)
}

pub fn solve(config: &Path) -> Result<u8, Failure> {
    let loaded = load(config)?;
    let sol = solve_loaded(&loaded)?;
    let times = uniform_times(loaded.spec.horizon, loaded.time_points);

    let mut json = Vec::new();
    sol.write_json(&mut json).map_err(numeric)?;
    json.push(b'\n');
    let mut csv = Vec::new();
    sol.write_csv(&mut csv, &times).map_err(numeric)?;
    let mut max_u = 0.0f64;
    for &t in &times {
        max_u = max_u.max(sol.graded_norm_at(t, 0.0).map_err(numeric)?);
    }
    let json_path = loaded.output("solution.json");
    let csv_path = loaded.output("series.csv");
    write_file(&json_path, &json)?;
    write_file(&csv_path, &csv)?;
    println!(
        "modes={} tail_bound={} max|u|={}",
        sol.modes.len(),
        sig17_decimal(sol.tail_bound),
        sig17_decimal(max_u)
    );
    Ok(0)
}

/// Two random coefficient vectors with decaying magnitude and a factor.
fn random_data(seed: u64, modes: usize) -> (Vec<f64>, Vec<f64>, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |k: usize| rng.gen_range(-1.0..1.0) / (k as f64).powi(3);
    let phi: Vec<f64> = (1..=modes).map(&mut draw).collect();
    let psi: Vec<f64> = (1..=modes).map(&mut draw).collect();
    let c = rng.gen_range(-2.0..2.0);
    (phi, psi, c)
}

fn finish_report(
    report: &VerificationReport,
    json: Option<&Path>,
    text: Option<&Path>,
) -> Result<u8, Failure> {
    let passed = match report.passed() {
        Ok(p) => p,
        Err(VerificationError::EmptyReport) => {
            return Err(numeric("verification produced an empty report"))
        }
        Err(e) => return Err(numeric(e)),
    };
    let rendered = report.to_text();
    if let Some(p) = json {
        let mut buf = Vec::new();
        report.write_json(&mut buf).map_err(numeric)?;
        buf.push(b'\n');
        write_file(p, &buf)?;
    }
    if let Some(p) = text {
        write_file(p, rendered.as_bytes())?;
    }
    print!("{rendered}");
    let failed: Vec<&str> = report.failures().map(|c| c.name.as_str()).collect();
    println!("checks={} failed={}", report.checks.len(), failed.len());
    if passed {
        Ok(0)
    } else {
        eprintln!("fracb: failing checks: {}", failed.join(", "));
        Ok(1)
    }
}

pub fn verify(config: &Path) -> Result<u8, Failure> {
    let loaded = load(config)?;
    let mut sol = solve_loaded(&loaded)?;
    if let Some(f) = &loaded.config.fault {
        eprintln!("fracb: fault injection: every b_k scaled by {}", f.scale_b);
        sol = sol.with_scaled_b(f.scale_b);
    }
    let mut options = VerifyOptions::for_horizon(loaded.spec.horizon);
    options.interior = loaded.interior.clone();
    options.x_grid = loaded.config.grids.x.clone();
    options.c0_grid = loaded.t_grid.clone();
    if let Some(mesh) = loaded.config.grids.caputo {
        options.mesh = mesh;
    }
    let mut report = verify_solution(&sol, &options).map_err(numeric)?;
    report.merge(lemma_bounds_sweep(&loaded.alpha_grid, &loaded.t_grid).map_err(numeric)?);
    report.merge(c0_sweep(&loaded.alpha_grid, &loaded.t_grid).map_err(numeric)?);
    let (phi, psi, c) = random_data(loaded.config.seed, loaded.spec.modes);
    let mut lin = linearity_check(&loaded.spec, &phi, &psi, c).map_err(numeric)?;
    lin.parameters
        .insert("seed".into(), loaded.config.seed as f64);
    report.push(lin);
    finish_report(
        &report,
        Some(&loaded.output("report.json")),
        Some(&loaded.output("report.txt")),
    )
}

pub fn resonance(args: &ResonanceArgs) -> Result<u8, Failure> {
    if !(args.nu > 0.0 && args.nu.is_finite()) || !(args.horizon > 0.0 && args.horizon.is_finite())
    {
        return Err(Failure::Config("--nu and --T must be positive".into()));
    }
    if args.alpha_list.is_empty() || args.alpha_list.iter().any(|a| !(*a > 1.0 && *a <= 2.0)) {
        return Err(Failure::Config(
            "--alpha-list values must lie in (1, 2]".into(),
        ));
    }
    let x = uniform_x(args.nu * args.horizon, args.points as usize);
    let rows = resonance_curve(args.horizon, &args.alpha_list, &x).map_err(numeric)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| numeric(format!("CSV output: {e}"));
    w.write_record(["alpha", "x", "D"]).map_err(io)?;
    for (a, x, d) in rows {
        w.write_record([sig17(a), sig17(x), sig17(d)]).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| numeric(e.to_string()))?;
    match &args.output {
        Some(p) => write_file(p, &bytes)?,
        None => std::io::stdout().write_all(&bytes).map_err(numeric)?,
    }
    Ok(0)
}

fn special_failure(e: SpecialFunctionError) -> Failure {
    match e {
        SpecialFunctionError::Domain(_) => Failure::Config(e.to_string()),
        e => numeric(e),
    }
}

pub fn ml(args: &MlArgs) -> Result<u8, Failure> {
    let q = MLQuery::new(args.rho, args.mu, args.z).map_err(special_failure)?;
    let v = ml_value(q).map_err(special_failure)?;
    println!("{}", sig17_decimal(v));
    if let Some(digits) = args.oracle {
        let o = ml_oracle(q, digits).map_err(special_failure)?;
        let diff = if o.value != 0.0 {
            ((v - o.value) / o.value).abs()
        } else {
            (v - o.value).abs()
        };
        println!("oracle {}", o.decimal);
        println!("rel_diff {}", sig17(diff));
    }
    Ok(0)
}

pub fn bounds(args: &BoundsArgs) -> Result<u8, Failure> {
    if !(args.t_min > 0.0 && args.t_max > args.t_min && args.t_max.is_finite()) {
        return Err(Failure::Config("need 0 < --t-min < --t-max".into()));
    }
    if args.alpha_list.is_empty()
        || args
            .alpha_list
            .iter()
            .chain(&args.probe)
            .any(|a| !(*a > 1.0 && *a < 2.0))
    {
        return Err(Failure::Config(
            "--alpha-list and --probe values must lie strictly inside (1, 2)".into(),
        ));
    }
    let t = log_grid(args.t_min, args.t_max, args.points as usize);
    let mut report = lemma_bounds_sweep(&args.alpha_list, &t).map_err(numeric)?;
    if !args.probe.is_empty() {
        report.merge(lemma_boundary_probe(&args.probe, &t).map_err(numeric)?);
    }
    report.merge(c0_sweep(&args.alpha_list, &t).map_err(numeric)?);
    finish_report(&report, args.json.as_deref(), None)
}
