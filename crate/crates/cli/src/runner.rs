use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use ballmax::perturb::{generate, PerturbationFamily, PerturbationSpec};
use ballmax::problem::Problem;
use ballmax::radial::{ball_radius, RadialGrid};
use ballmax::stability::{
    calibrate_constant, directional_masses_of, evaluate_chain, evaluate_stability, RunMeta, STABILITY_CSV_HEADER,
};
use ballmax::{ChainReport64, Problem64, StabilityReport64};
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::RunError;

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok = 0,
    Runtime = 1,
    BadConfig = 2,
    Hypothesis = 3,
    Violation = 4,
}

impl Status {
    pub fn code(self) -> u8 {
        self as u8
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    /// Worker threads; rayon's default when `None`.
    pub workers: Option<usize>,
    pub tol_scale: f64,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub status: Status,
    /// Names of failed checks, in summary order.
    pub failures: Vec<String>,
    pub summary: String,
}

const CHAIN_HEADER: [&str; 12] = [
    "family", "params", "tau", "seed", "f_u", "f_v", "f_w", "gap_uv", "gap_vw", "delta", "tol_chain", "pass",
];

const HYPOTHESES_HEADER: [&str; 14] = [
    "integrand",
    "n",
    "p",
    "a",
    "radius",
    "r_max",
    "h1_pass",
    "h1_worst_violation",
    "condition_pass",
    "condition_worst_violation",
    "strict_decrease_pass",
    "lambda_hat",
    "h2_pass",
    "h2_alpha_integral",
];

/// Slack on `a^p κ^n / n = τ1 + τ2` per direction.
const IDENTITY_TOL: f64 = 1e-8;

fn num(v: f64) -> String {
    format!("{:.16e}", v + 0.0)
}

struct Competitor {
    spec: PerturbationSpec<f64>,
    params: String,
    chain: Option<ChainReport64>,
    stability: Option<StabilityReport64>,
    identity_residual: f64,
}

fn evaluate(
    problem: &Problem64,
    spec: &PerturbationSpec<f64>,
    chain: bool,
    stability: bool,
) -> Result<Competitor, ballmax::Error> {
    let u = generate(spec, &problem.ball, &problem.grid)?;
    let mut params = problem.integrand.to_string();
    if spec.family == PerturbationFamily::RandomRays {
        params.push_str(&format!(";seed={}", spec.seed));
    }
    let stability = if stability {
        Some(evaluate_stability(problem, &u)?)
    } else {
        None
    };
    let chain = match &stability {
        Some(s) => Some(s.chain),
        None if chain => Some(evaluate_chain(problem, &u)),
        None => None,
    };
    Ok(Competitor {
        spec: *spec,
        params,
        chain,
        stability,
        identity_residual: directional_masses_of(&u).identity_residual,
    })
}

struct Check {
    name: &'static str,
    failed: usize,
    total: usize,
}

impl Check {
    fn new(name: &'static str) -> Self {
        Self { name, failed: 0, total: 0 }
    }

    fn record(&mut self, ok: bool) {
        self.total += 1;
        if !ok {
            self.failed += 1;
        }
    }

    fn line(&self) -> String {
        let verdict = if self.failed == 0 { "PASS" } else { "FAIL" };
        format!("{verdict} {} ({} of {} violated)", self.name, self.failed, self.total)
    }
}

fn write_hypotheses(path: &Path, problem: &Problem64) -> Result<(), RunError> {
    let h = &problem.hypotheses;
    let b = &problem.ball;
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(HYPOTHESES_HEADER)?;
    w.write_record([
        problem.integrand.to_string(),
        b.n.to_string(),
        num(b.p),
        num(b.a),
        num(b.radius),
        num(problem.grid.r_max()),
        h.h1_pass.to_string(),
        num(h.h1_worst_violation),
        h.condition_pass.to_string(),
        num(h.condition_worst_violation),
        h.strict_decrease_pass.to_string(),
        num(h.lambda_hat),
        h.h2_pass.to_string(),
        num(h.h2_alpha_integral),
    ])?;
    w.flush()?;
    Ok(())
}

fn write_chain(path: &Path, runs: &[Competitor]) -> Result<(), RunError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(CHAIN_HEADER)?;
    for c in runs {
        let Some(ch) = &c.chain else { continue };
        w.write_record([
            c.spec.family.name().to_string(),
            c.params.clone(),
            num(c.spec.tau),
            c.spec.seed.to_string(),
            num(ch.f_u),
            num(ch.f_v),
            num(ch.f_w),
            num(ch.gap_uv),
            num(ch.gap_vw),
            num(ch.delta),
            num(ch.tol_chain),
            ch.holds().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn write_stability(path: &Path, runs: &[Competitor]) -> Result<(), RunError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(STABILITY_CSV_HEADER)?;
    for c in runs {
        let Some(s) = &c.stability else { continue };
        let meta = RunMeta {
            family: c.spec.family.name().to_string(),
            params: c.params.clone(),
            tau: c.spec.tau,
        };
        w.write_record(s.csv_fields(&meta))?;
    }
    w.flush()?;
    Ok(())
}

/// Runs the experiment and writes every artifact into `opts.out_dir`.
///
/// Configuration problems come back as `Err` with [`Status::BadConfig`]; check
/// failures are reported through [`Outcome::status`].
pub fn run(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Outcome, RunError> {
    let issues = cfg.validate();
    if !issues.is_empty() {
        return Err(RunError::Invalid(issues));
    }
    if !(opts.tol_scale > 0.0 && opts.tol_scale.is_finite()) {
        return Err(RunError::Invalid(vec![format!(
            "tolerance scale must be positive, got {}",
            opts.tol_scale
        )]));
    }
    let integrand = cfg.integrand().map_err(|e| RunError::Invalid(vec![e]))?;
    let specs = cfg.competitors().map_err(|e| RunError::Invalid(vec![e]))?;
    let radius = ball_radius(&integrand, f64::INFINITY)?.radius;
    let grid = Arc::new(RadialGrid::build(
        integrand.n(),
        cfg.r_max(radius),
        cfg.grid.n_r,
        cfg.n_dir(),
    )?);
    let problem = Problem::new(integrand, grid, cfg.tolerances(opts.tol_scale))?;

    fs::create_dir_all(&opts.out_dir)?;
    write_hypotheses(&opts.out_dir.join("hypotheses.csv"), &problem)?;

    let checks = &cfg.checks;
    let mut lines = Vec::new();
    let mut failures = Vec::new();
    let mut status = Status::Ok;

    if checks.hypotheses {
        match problem.require_hypotheses() {
            Ok(()) => lines.push("PASS hypotheses".to_string()),
            Err(ballmax::Error::Hypothesis { name, detail }) => {
                lines.push(format!("FAIL hypotheses: {name} ({detail})"));
                failures.push(name);
                status = Status::Hypothesis;
            }
            Err(e) => return Err(e.into()),
        }
    }
    if checks.stability && !(problem.lambda() > 0.0) {
        lines.push("FAIL hypotheses: lambda (no strict decrease on the truncated range)".to_string());
        failures.push("lambda".to_string());
        status = Status::Hypothesis;
    }

    let runs: Vec<Competitor> = if status == Status::Ok {
        let work = || {
            specs
                .par_iter()
                .map(|s| evaluate(&problem, s, checks.chain, checks.stability))
                .collect::<Result<Vec<_>, _>>()
        };
        match opts.workers {
            Some(k) => rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(|e| RunError::Io(e.to_string()))?
                .install(work)?,
            None => work()?,
        }
    } else {
        lines.push("SKIP competitors (hypotheses failed)".to_string());
        Vec::new()
    };

    write_chain(&opts.out_dir.join("chain.csv"), &runs)?;
    write_stability(&opts.out_dir.join("stability.csv"), &runs)?;

    let mut maximality = Check::new("maximality");
    let mut chain = Check::new("chain");
    let mut identity = Check::new("directional_identity");
    let mut quant1 = Check::new("quant1");
    let mut quant2 = Check::new("quant2");
    let mut bounded = Check::new("lhs_bound");
    let mut unique = Check::new("uniqueness");
    for c in &runs {
        identity.record(c.identity_residual <= IDENTITY_TOL * opts.tol_scale);
        if let Some(ch) = &c.chain {
            maximality.record(ch.uw_holds());
            chain.record(ch.holds());
        }
        if let Some(s) = &c.stability {
            quant1.record(s.quant1_holds());
            quant2.record(s.quant2_holds());
            bounded.record(s.lhs_bounded());
            if s.lhs >= 0.01 {
                unique.record(s.delta > 10.0 * s.chain.quadrature_error);
            }
        }
    }
    let mut enabled = vec![&identity];
    if checks.chain || checks.stability {
        enabled.extend([&maximality, &chain]);
    }
    if checks.stability {
        enabled.extend([&quant1, &quant2, &bounded, &unique]);
    }
    if status == Status::Ok {
        for c in enabled {
            lines.push(c.line());
            if c.failed > 0 {
                failures.push(c.name.to_string());
                status = Status::Violation;
            }
        }
    }

    let reports: Vec<StabilityReport64> = runs.iter().filter_map(|c| c.stability).collect();
    let constant = match calibrate_constant(&reports) {
        Ok(cal) => format!(
            "calibrated constant (n={}, p={}, a={}): {} over {} runs",
            cal.n,
            cal.p,
            cal.a,
            num(cal.constant),
            cal.runs
        ),
        Err(_) => "calibrated constant: n/a".to_string(),
    };

    let mut summary = String::new();
    let g = &problem.grid;
    writeln!(summary, "integrand: {} n={} p={} a={}", problem.integrand, g.n(), problem.ball.p, problem.ball.a).unwrap();
    writeln!(
        summary,
        "grid: R={} r_max={} n_r={} n_dir={}",
        num(problem.ball.radius),
        num(g.r_max()),
        cfg.grid.n_r,
        g.n_dir()
    )
    .unwrap();
    writeln!(summary, "lambda: {}", num(problem.lambda())).unwrap();
    writeln!(summary, "competitors: {}", runs.len()).unwrap();
    for l in &lines {
        writeln!(summary, "{l}").unwrap();
    }
    writeln!(summary, "{constant}").unwrap();
    writeln!(summary, "status: {}", status.code()).unwrap();
    fs::write(opts.out_dir.join("summary.txt"), &summary)?;

    Ok(Outcome {
        status,
        failures,
        summary,
    })
}
