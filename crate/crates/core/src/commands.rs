//! Batch commands, registered by name and dispatched at runtime.

use std::io::{self, Write};

use thiserror::Error;

use crate::config::{ConfigError, RunConfig};
use crate::distributions::SeedSpec;
use crate::federation::{self, pooled_moments};
use crate::montecarlo::{self, MonteCarloError, ValidationReport};
use crate::report::figures::{
    self, DEFAULT_CONTOUR_LOG10, DEFAULT_CONTOUR_POINTS, DEFAULT_CURVE_POINTS,
};
use crate::report::{real, table1, write_csv};
use crate::suite::{reference_suite, NamedScenario};
use crate::theory::{self, ErrorProfile, Extended, Scenario, TheoryError};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Theory(#[from] TheoryError),
    #[error(transparent)]
    MonteCarlo(#[from] MonteCarloError),
    #[error("{0}")]
    Invalid(String),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        1
    }
}

/// Result of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    ValidationFailed,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Self::Success => 0,
            Self::ValidationFailed => 2,
        }
    }
}

pub trait Command: Send + Sync {
    fn name(&self) -> &'static str;
    fn summary(&self) -> &'static str;
    /// Writes the command's data to `out` and diagnostics to `log`.
    fn run(
        &self,
        cfg: &RunConfig,
        out: &mut dyn Write,
        log: &mut dyn Write,
    ) -> Result<Outcome, CliError>;
}

pub struct CommandRegistry {
    commands: Vec<Box<dyn Command>>,
}

impl CommandRegistry {
    pub fn empty() -> Self {
        Self {
            commands: Vec::new(),
        }
    }

    pub fn builtin() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(Profile));
        r.register(Box::new(Table1));
        r.register(Box::new(Curve));
        r.register(Box::new(Contour));
        r.register(Box::new(Validate));
        r.register(Box::new(Federate));
        r
    }

    /// Adds a command; a later registration replaces one with the same name.
    pub fn register(&mut self, command: Box<dyn Command>) {
        self.commands.retain(|c| c.name() != command.name());
        self.commands.push(command);
    }

    pub fn get(&self, name: &str) -> Option<&dyn Command> {
        self.commands
            .iter()
            .find(|c| c.name() == name)
            .map(|c| c.as_ref())
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.commands.iter().map(|c| c.name()).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &dyn Command> {
        self.commands.iter().map(|c| c.as_ref())
    }
}

fn write_key_values(out: &mut dyn Write, rows: Vec<(String, String)>) -> Result<(), CliError> {
    let records: Vec<Vec<String>> = rows.into_iter().map(|(k, v)| vec![k, v]).collect();
    write_csv(out, &["quantity", "value"], &records)?;
    Ok(())
}

fn ext(v: Extended) -> String {
    v.to_string()
}

fn kv(k: &str, v: impl ToString) -> (String, String) {
    (k.to_string(), v.to_string())
}

fn scenario_rows(s: &Scenario) -> Vec<(String, String)> {
    vec![
        kv("mu_x", real(s.mu_x)),
        kv("var_x", real(s.var_x)),
        kv("n_x", s.n_x),
        kv("mu_y", real(s.mu_y)),
        kv("var_y", real(s.var_y)),
        kv("n_y", s.n_y),
        kv("bias_sq", real(s.bias_sq())),
        kv("var_local_mean", real(s.var_local_mean())),
        kv("var_helper_mean", real(s.var_helper_mean())),
    ]
}

fn profile_rows(s: &Scenario, p: &ErrorProfile) -> Result<Vec<(String, String)>, CliError> {
    let mut rows = vec![
        kv("e0", real(p.e0())),
        kv("e1", real(p.e1())),
        kv("alpha_star", real(p.alpha_star())),
        kv("degenerate", p.is_degenerate()),
        kv("ese_at_optimum", real(p.ese_at_optimum())),
        kv(
            "ese_ratio_at_optimum",
            p.ratio_to_local(p.alpha_star())?
                .map(real)
                .unwrap_or_default(),
        ),
        kv("break_even_weight", real(p.break_even_weight())),
        kv("max_ese", real(theory::max_ese(p))),
    ];
    match theory::alpha_star_upper_bounds(s) {
        Ok(b) => {
            rows.push(kv("bound_bias", ext(b.bias)));
            rows.push(kv("bound_variance", ext(b.variance)));
        }
        Err(TheoryError::ZeroLocalVariance) => {
            rows.push(kv("bound_bias", ""));
            rows.push(kv("bound_variance", ""));
        }
        Err(e) => return Err(e.into()),
    }
    Ok(rows)
}

/// Closed-form profile, bounds and errors at chosen weights.
pub struct Profile;

impl Command for Profile {
    fn name(&self) -> &'static str {
        "profile"
    }

    fn summary(&self) -> &'static str {
        "optimal weight, error profile and bounds for a scenario"
    }

    fn run(
        &self,
        cfg: &RunConfig,
        out: &mut dyn Write,
        log: &mut dyn Write,
    ) -> Result<Outcome, CliError> {
        let file = cfg.scenario_file()?;
        let s = file.scenario()?;
        let p = theory::error_profile(&s);
        if s.var_x == 0.0 {
            writeln!(
                log,
                "warning: local model already exact (var_x = 0); alpha_star = 0"
            )?;
        }
        if p.is_degenerate() {
            writeln!(
                log,
                "warning: degenerate scenario (e0 = e1 = 0); every weight is optimal"
            )?;
        }
        let mut rows = scenario_rows(&s);
        rows.extend(profile_rows(&s, &p)?);
        for &a in &file.alphas {
            rows.push((
                format!("ese({})", real(a)),
                real(theory::ese_of_alpha(&p, a)?),
            ));
            let ratio = p.ratio_to_local(a)?;
            rows.push((
                format!("ese_ratio({})", real(a)),
                ratio.map(real).unwrap_or_default(),
            ));
        }
        write_key_values(out, rows)?;
        Ok(Outcome::Success)
    }
}

/// Recomputes the reference table and reports disagreements.
pub struct Table1;

impl Command for Table1 {
    fn name(&self) -> &'static str {
        "table1"
    }

    fn summary(&self) -> &'static str {
        "recompute the 17-row reference table and compare with published values"
    }

    fn run(
        &self,
        _cfg: &RunConfig,
        out: &mut dyn Write,
        log: &mut dyn Write,
    ) -> Result<Outcome, CliError> {
        let rows = table1::reproduce();
        write_csv(out, &table1::CSV_HEADER, &table1::csv_records(&rows))?;
        for line in table1::discrepancy_lines(&rows) {
            writeln!(log, "{line}")?;
        }
        Ok(Outcome::Success)
    }
}

pub struct Curve;

impl Command for Curve {
    fn name(&self) -> &'static str {
        "curve"
    }

    fn summary(&self) -> &'static str {
        "normalized error curve e(alpha)/e0 with its linear bounds"
    }

    fn run(
        &self,
        cfg: &RunConfig,
        out: &mut dyn Write,
        _log: &mut dyn Write,
    ) -> Result<Outcome, CliError> {
        let p = theory::error_profile(&cfg.scenario_file()?.scenario()?);
        if p.is_degenerate() || !(p.alpha_star() > 0.0) {
            return Err(CliError::Invalid(
                "curve needs a scenario with alpha_star > 0 (var_x > 0)".to_string(),
            ));
        }
        let points = figures::error_curve(&p, cfg.grid.unwrap_or(DEFAULT_CURVE_POINTS))?;
        write_csv(
            out,
            &figures::CURVE_HEADER,
            &figures::curve_records(&points),
        )?;
        Ok(Outcome::Success)
    }
}

pub struct Contour;

impl Command for Contour {
    fn name(&self) -> &'static str {
        "contour"
    }

    fn summary(&self) -> &'static str {
        "optimal weight over a log grid of Var[X]/bias^2 and Var[X]/Var[Y]"
    }

    fn run(
        &self,
        cfg: &RunConfig,
        out: &mut dyn Write,
        _log: &mut dyn Write,
    ) -> Result<Outcome, CliError> {
        let (lo, hi) = cfg
            .scenario
            .as_ref()
            .and_then(|f| f.contour)
            .unwrap_or(DEFAULT_CONTOUR_LOG10);
        let axis = figures::log_grid(lo, hi, cfg.grid.unwrap_or(DEFAULT_CONTOUR_POINTS))?;
        let cells = figures::contour_grid(&axis)?;
        write_csv(
            out,
            &figures::CONTOUR_HEADER,
            &figures::contour_records(&cells),
        )?;
        Ok(Outcome::Success)
    }
}

pub const VALIDATE_HEADER: [&str; 11] = [
    "scenario",
    "alpha",
    "mc_ese",
    "std_error",
    "closed_form",
    "abs_diff",
    "tolerance",
    "pass",
    "trials",
    "master_seed",
    "stream_id",
];

/// Monte Carlo check of the closed form, on a scenario file or the
/// builtin suite.
pub struct Validate;

impl Validate {
    fn validate_one(
        cfg: &RunConfig,
        s: &NamedScenario,
        stream: u64,
    ) -> Result<ValidationReport, CliError> {
        let seed = SeedSpec::new(cfg.seed.master_seed, stream);
        let exact = theory::error_profile(&s.helper.scenario(&s.x, s.n_x)?);
        let oracle = ErrorProfile::from_errors(exact.e0() * cfg.oracle_e0_scale, exact.e1())?;
        Ok(montecarlo::validate_against(
            &s.x, s.n_x, &s.helper, cfg.trials, seed, cfg.k, &oracle,
        )?)
    }
}

impl Command for Validate {
    fn name(&self) -> &'static str {
        "validate"
    }

    fn summary(&self) -> &'static str {
        "compare simulated errors with the closed form at k standard errors"
    }

    fn run(
        &self,
        cfg: &RunConfig,
        out: &mut dyn Write,
        log: &mut dyn Write,
    ) -> Result<Outcome, CliError> {
        let suite = match &cfg.scenario {
            Some(file) => {
                let (x, helper) = file.simulation_parts()?;
                vec![NamedScenario {
                    name: "",
                    x: x.spec,
                    n_x: x.n,
                    helper,
                }]
            }
            None => reference_suite(),
        };
        let label = |s: &NamedScenario| match (&cfg.scenario, s.name) {
            (Some(f), "") => f.name.clone(),
            _ => s.name.to_string(),
        };
        let mut records = Vec::new();
        let (mut passed, mut total, mut failed_scenarios) = (0usize, 0usize, Vec::new());
        for (i, s) in suite.iter().enumerate() {
            let report = Self::validate_one(cfg, s, i as u64)?;
            for p in &report.points {
                total += 1;
                passed += p.pass as usize;
                records.push(vec![
                    label(s),
                    real(p.alpha),
                    real(p.estimate.mean_sq_error),
                    real(p.estimate.std_error),
                    real(p.closed_form),
                    real(p.abs_diff),
                    real(p.tolerance),
                    p.pass.to_string(),
                    p.estimate.trials.to_string(),
                    p.estimate.seed.master_seed.to_string(),
                    p.estimate.seed.stream_id.to_string(),
                ]);
            }
            if !report.passed {
                failed_scenarios.push(label(s));
            }
        }
        write_csv(out, &VALIDATE_HEADER, &records)?;
        writeln!(
            log,
            "validate: {passed}/{total} points within {} standard errors ({} trials, seed {})",
            cfg.k, cfg.trials, cfg.seed.master_seed
        )?;
        if failed_scenarios.is_empty() {
            Ok(Outcome::Success)
        } else {
            writeln!(
                log,
                "validate: FAILED scenarios: {}",
                failed_scenarios.join(", ")
            )?;
            Ok(Outcome::ValidationFailed)
        }
    }
}

/// Two-agent reduction of a federation and the focal agent's weight.
pub struct Federate;

impl Command for Federate {
    fn name(&self) -> &'static str {
        "federate"
    }

    fn summary(&self) -> &'static str {
        "reduce a federation to two agents and report the focal agent's optimal weight"
    }

    fn run(
        &self,
        cfg: &RunConfig,
        out: &mut dyn Write,
        log: &mut dyn Write,
    ) -> Result<Outcome, CliError> {
        let f = cfg.scenario_file()?.federation()?;
        let s =
            federation::reduce_to_two_agent(&f).map_err(|e| CliError::Invalid(e.to_string()))?;
        let (alpha, p) =
            federation::personalized_weight(&f).map_err(|e| CliError::Invalid(e.to_string()))?;
        if s.var_x == 0.0 {
            writeln!(
                log,
                "warning: local model already exact (var_x = 0); alpha_star = 0"
            )?;
        }
        let pooled = pooled_moments(f.helpers());
        let mut rows = vec![
            kv("helpers", f.helpers().len()),
            kv("n_helpers_total", pooled.total),
            kv("var_pooled_mean", real(pooled.var_mean())),
        ];
        rows.extend(scenario_rows(&s));
        rows.extend(profile_rows(&s, &p)?);
        // Optimal error as a fraction of the local error.
        rows.push(kv("ese_improvement", real(1.0 - alpha)));
        rows.push(kv(
            "global_weight",
            real(pooled.total as f64 / (pooled.total + s.n_x) as f64),
        ));
        write_key_values(out, rows)?;
        Ok(Outcome::Success)
    }
}
