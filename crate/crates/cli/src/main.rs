//! `regrisk`: train kernel regularized risk minimizers, evaluate the oracle
//! bounds, and run the synthetic validation experiments.

mod settings;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use regrisk::bounds::{
    hinge_epsilon, hinge_exponent, rate_exponent, regression_epsilon, power_loss_variance_constant, oracle_terms,
    BoundInputs, RateSpec,
};
use regrisk::covering::{fit_covering_spread, CoveringSpread};
use regrisk::harness::{
    calibration_check, generate, oracle_probability_check, rate_experiment, robustness_study, trial_seed,
    variance_bound_check, DataModel, OracleConfig, RateConfig, RobustnessConfig,
};
use regrisk::{fit, Kernel, LossSpec, SolverConfig, TrainingSet};

use settings::Settings;

pub type CliResult<T> = std::result::Result<T, Box<dyn std::error::Error>>;

#[derive(Parser)]
#[command(name = "regrisk", version, about = "Kernel regularized risk minimization and its learning-rate bounds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train on a CSV of inputs and labels (last column) and print the model as JSON
    Fit {
        /// CSV file with a header row; the last column holds the labels
        #[arg(long)]
        data: PathBuf,
        #[command(flatten)]
        settings: Settings,
    },
    /// Closed-form bound calculators
    Bounds {
        #[command(subcommand)]
        command: BoundsCommand,
    },
    /// Covering-number exponent of the kernel's unit ball
    Covering {
        #[command(subcommand)]
        command: CoveringCommand,
    },
    /// Learning-curve experiments under lambda = n^-kappa
    Rates {
        #[command(subcommand)]
        command: RatesCommand,
    },
    /// Monte-Carlo checks of the probabilistic inequalities
    Validate {
        #[command(subcommand)]
        command: ValidateCommand,
    },
    /// Loss-exponent comparison under outlier contamination
    Robustness {
        #[command(subcommand)]
        command: RobustnessCommand,
    },
}

#[derive(Subcommand)]
enum BoundsCommand {
    /// Evaluate every threshold that applies to the given parameters
    Eval(BoundArgs),
}

#[derive(Subcommand)]
enum CoveringCommand {
    Fit(Settings),
}

#[derive(Subcommand)]
enum RatesCommand {
    Run(Settings),
}

#[derive(Subcommand)]
enum ValidateCommand {
    Oracle(Settings),
    Variance(Settings),
    Calibration(Settings),
}

#[derive(Subcommand)]
enum RobustnessCommand {
    Run(Settings),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Csv,
}

#[derive(Args)]
struct BoundArgs {
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    #[arg(long, default_value_t = 1.0)]
    p: f64,
    #[arg(long, default_value_t = 2.0)]
    alpha: f64,
    /// Defaults to alpha
    #[arg(long)]
    v: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    theta: f64,
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    #[arg(long, default_value_t = 1.0)]
    k: f64,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    #[arg(long, default_value_t = 1.0)]
    n: f64,
    #[arg(long, default_value_t = 1.0)]
    x: f64,
    #[arg(long, default_value_t = 0.0)]
    approx_error: f64,
    /// Tsybakov noise exponent for the hinge threshold
    #[arg(long)]
    q: Option<f64>,
    /// Schedule exponent for the rate
    #[arg(long)]
    kappa: Option<f64>,
    /// Sup-norm bound for the variance constant
    #[arg(long)]
    sup_norm: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

fn main() {
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Fit { data, settings } => fit_command(&data, settings.resolve()?),
        Command::Bounds {
            command: BoundsCommand::Eval(args),
        } => bounds_eval(&args),
        Command::Covering {
            command: CoveringCommand::Fit(s),
        } => covering_fit(s.resolve()?),
        Command::Rates {
            command: RatesCommand::Run(s),
        } => rates_run(s.resolve()?),
        Command::Validate { command } => match command {
            ValidateCommand::Oracle(s) => validate_oracle(s.resolve()?),
            ValidateCommand::Variance(s) => validate_variance(s.resolve()?),
            ValidateCommand::Calibration(s) => validate_calibration(s.resolve()?),
        },
        Command::Robustness {
            command: RobustnessCommand::Run(s),
        } => robustness_run(s.resolve()?),
    }
}

fn csv_sink(output: Option<&Path>) -> CliResult<csv::Writer<Box<dyn Write>>> {
    let out: Box<dyn Write> = match output {
        Some(p) => Box::new(std::fs::File::create(p).map_err(|e| format!("creating {}: {e}", p.display()))?),
        None => Box::new(std::io::stdout()),
    };
    Ok(csv::Writer::from_writer(out))
}

/// The summary goes to stdout when the table went to a file, else to stderr.
fn summary(s: &Settings, text: &str) {
    if s.output.is_some() {
        println!("{text}");
    } else {
        eprintln!("{text}");
    }
}

fn read_training_csv(path: &Path) -> CliResult<TrainingSet> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| format!("reading {}: {e}", path.display()))?;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let vals = rec
            .iter()
            .map(|f| f.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| format!("row {}: {e}", line + 1))?;
        let (y, x) = vals.split_last().ok_or_else(|| format!("row {} is empty", line + 1))?;
        if x.is_empty() {
            return Err(format!("row {} has no input columns", line + 1).into());
        }
        xs.push(x.to_vec());
        ys.push(*y);
    }
    Ok(TrainingSet::new(xs, ys)?)
}

fn fit_command(path: &Path, mut s: Settings) -> CliResult<()> {
    let data = read_training_csv(path)?;
    s.dim = Some(data.xs()[0].len());
    let kernel = s.kernel()?;
    let loss = LossSpec::power(s.alpha())?;
    let res = fit(&kernel, &loss, &data, &SolverConfig::new(s.lambda.unwrap_or(0.01)))?;
    let json = serde_json::to_string_pretty(&res)?;
    match &s.output {
        Some(p) => std::fs::write(p, json)?,
        None => println!("{json}"),
    }
    eprintln!(
        "n {} objective {:.6e} norm {:.6} iterations {} converged {} duality gap {:.2e}",
        data.len(),
        res.objective,
        res.f.rkhs_norm()?,
        res.iterations,
        res.converged,
        res.duality_gap
    );
    Ok(())
}

fn bounds_eval(b: &BoundArgs) -> CliResult<()> {
    let inputs = BoundInputs {
        a: b.a,
        p: b.p,
        alpha: b.alpha,
        v: b.v.unwrap_or(b.alpha),
        theta: b.theta,
        c: b.c,
        k: b.k,
        lambda: b.lambda,
        n: b.n,
        x: b.x,
        approx_error: b.approx_error,
    };
    let mut rows: Vec<(String, f64)> = Vec::new();
    let terms = oracle_terms(&inputs)?;
    for (i, t) in terms.iter().enumerate() {
        rows.push((format!("oracle_term_{}", i + 1), *t));
    }
    rows.push(("oracle_epsilon".into(), terms.iter().cloned().fold(0.0, f64::max)));
    if let Some(q) = b.q {
        rows.push(("hinge_exponent".into(), hinge_exponent(q, b.p)?));
        if let Ok(e) = hinge_epsilon(q, b.p, b.k, b.a, b.n, b.x, b.lambda, b.approx_error) {
            rows.push(("hinge_epsilon".into(), e));
        }
    }
    if b.alpha > 1.0 {
        if let Ok(e) = regression_epsilon(b.alpha, b.p, b.k, b.a, b.n, b.x, b.lambda, b.approx_error) {
            rows.push(("regression_epsilon".into(), e.simplified));
            rows.push(("regression_three_term".into(), e.three_term));
        }
        rows.push(("variance_constant".into(), power_loss_variance_constant(b.alpha, b.sup_norm.unwrap_or(1.0))?));
        if let Some(kappa) = b.kappa {
            let spec = RateSpec {
                kappa,
                p: b.p,
                alpha: b.alpha,
            };
            rows.push(("rate_exponent".into(), rate_exponent(&spec)?));
            rows.push(("rate_zero_threshold_alpha".into(), spec.zero_threshold()));
        }
    }
    match b.format {
        Format::Csv => {
            let mut w = csv_sink(None)?;
            w.write_record(["name", "value"])?;
            for (name, v) in &rows {
                w.write_record([name.clone(), v.to_string()])?;
            }
            w.flush()?;
        }
        Format::Text => {
            let width = rows.iter().map(|(n, _)| n.len()).max().unwrap_or(0);
            for (name, v) in &rows {
                println!("{name:<width$}  {v:.10e}");
            }
        }
    }
    Ok(())
}

fn covering(s: &Settings, kernel: &Kernel, model: &DataModel, n: usize) -> CliResult<CoveringSpread> {
    let samples = (0..s.samples.unwrap_or(5))
        .map(|i| generate(model, n, trial_seed(s.seed(), i as u64)).map(|t| t.xs().to_vec()))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(fit_covering_spread(kernel, &samples, None)?)
}

fn covering_fit(s: Settings) -> CliResult<()> {
    let kernel = s.kernel()?;
    let model = s.model(&kernel)?;
    let spread = covering(&s, &kernel, &model, s.n.unwrap_or(400))?;
    let mut w = csv_sink(s.output.as_deref())?;
    w.write_record(["sample", "delta", "log_cover_lower", "log_cover_upper", "used", "fitted"])?;
    for (i, e) in spread.estimates.iter().enumerate() {
        for j in 0..e.deltas.len() {
            w.write_record([
                i.to_string(),
                e.deltas[j].to_string(),
                e.lower[j].to_string(),
                e.upper[j].to_string(),
                e.used[j].to_string(),
                (e.a * e.deltas[j].powf(-e.p)).to_string(),
            ])?;
        }
    }
    w.flush()?;
    let mut text = String::new();
    for (i, e) in spread.estimates.iter().enumerate() {
        text.push_str(&format!(
            "sample {i}: p {:.4} a {:.4} residual {:.3e} log-log slope {:.4}{}\n",
            e.p,
            e.a,
            e.residual,
            e.loglog_slope,
            if e.out_of_model { " (out of model)" } else { "" }
        ));
    }
    text.push_str(&format!(
        "p mean {:.4} std {:.4}, a max {:.4}",
        spread.p_mean, spread.p_std, spread.a_max
    ));
    summary(&s, &text);
    Ok(())
}

fn rates_run(s: Settings) -> CliResult<()> {
    let kernel = s.kernel()?;
    let model = s.model(&kernel)?;
    let p_hat = covering(&s, &kernel, &model, 800)?.p_mean;
    let kappa = s.kappa.unwrap_or(2.0 / (2.0 + p_hat));
    let mut cfg = RateConfig::new(s.alpha(), kappa, p_hat);
    if let Some(g) = &s.n_grid {
        cfg.n_grid = g.clone();
    }
    if let Some(t) = s.trials {
        cfg.trials_per_n = t;
    }
    cfg.seed = s.seed();
    cfg.log_factor = s.log_factor.unwrap_or(false);
    let r = rate_experiment(&model, &kernel, &cfg)?;
    let mut w = csv_sink(s.output.as_deref())?;
    w.write_record(["n", "lambda", "mean_excess_l2", "se"])?;
    for i in 0..r.n_grid.len() {
        w.write_record([
            r.n_grid[i].to_string(),
            r.lambdas[i].to_string(),
            r.means[i].to_string(),
            r.ses[i].to_string(),
        ])?;
    }
    w.flush()?;
    let predicted = match r.predicted_rho {
        Some(rho) => format!(
            "predicted rho {rho:.4}, bracket [{:.4}, {:.4}]: {}",
            -1.5 * rho,
            -0.5 * rho,
            if r.in_bracket { "inside" } else { "outside" }
        ),
        None => "no rate prediction for alpha = 1".into(),
    };
    summary(
        &s,
        &format!(
            "alpha {} kappa {:.4} covering p {:.4}\nslope {:.4} +- {:.4}, {predicted}",
            r.alpha, r.kappa, p_hat, r.slope, r.slope_se
        ),
    );
    Ok(())
}

fn validate_oracle(s: Settings) -> CliResult<()> {
    let kernel = s.kernel()?;
    let model = s.model(&kernel)?;
    let n = s.n.unwrap_or(200);
    let spread = covering(&s, &kernel, &model, n)?;
    let p = spread.p_mean.clamp(0.05, 1.95);
    let cfg = OracleConfig {
        alpha: s.alpha(),
        lambda: s.lambda.unwrap_or((n as f64).powf(-2.0 / (2.0 + p))),
        n,
        x: s.x.unwrap_or(1.0),
        trials: s.trials.unwrap_or(200),
        calibration_trials: s.calibration_trials.unwrap_or(100),
        seed: s.seed(),
        covering_a: spread.a_max.max(1.0),
        covering_p: p,
    };
    let r = oracle_probability_check(&model, &kernel, &cfg)?;
    let mut w = csv_sink(s.output.as_deref())?;
    w.serialize(&r)?;
    w.flush()?;
    summary(
        &s,
        &format!(
            "K {:.4} epsilon {:.4e} a(lambda) {:.4e}: frequency {:.3} vs threshold {:.3} over {} trials: {}",
            r.k,
            r.epsilon,
            r.approx_error,
            r.frequency,
            r.threshold,
            r.fresh_trials,
            if r.passed { "pass" } else { "fail" }
        ),
    );
    Ok(())
}

fn validate_variance(s: Settings) -> CliResult<()> {
    let kernel = s.kernel()?;
    let model = s.model(&kernel)?;
    let r = variance_bound_check(
        &model,
        s.alpha.unwrap_or(1.5),
        s.num_f.unwrap_or(20),
        s.samples.unwrap_or(100_000),
        1.0,
        s.seed(),
    )?;
    let mut w = csv_sink(s.output.as_deref())?;
    for row in &r.rows {
        w.serialize(row)?;
    }
    w.flush()?;
    let fails = r.rows.iter().filter(|row| !row.holds).count();
    summary(&s, &format!("alpha {}: {} predictors, {fails} violations: {}", r.alpha, r.rows.len(), verdict(r.passed)));
    Ok(())
}

fn validate_calibration(s: Settings) -> CliResult<()> {
    let kernel = s.kernel()?;
    let model = s.model(&kernel)?;
    let r = calibration_check(
        &model,
        s.alpha.unwrap_or(1.5),
        s.num_f.unwrap_or(20),
        s.samples.unwrap_or(100_000),
        1.0,
        s.seed(),
    )?;
    let mut w = csv_sink(s.output.as_deref())?;
    for row in &r.rows {
        w.serialize(row)?;
    }
    w.flush()?;
    let fails = r.rows.iter().filter(|row| !row.holds).count();
    summary(&s, &format!("alpha {}: {} predictors, {fails} violations: {}", r.alpha, r.rows.len(), verdict(r.passed)));
    Ok(())
}

fn verdict(passed: bool) -> &'static str {
    if passed {
        "pass"
    } else {
        "fail"
    }
}

fn robustness_run(mut s: Settings) -> CliResult<()> {
    // narrow base noise leaves room for outliers inside the label range
    s.noise_b.get_or_insert(0.1);
    let kernel = s.kernel()?;
    let model = s.model(&kernel)?;
    let d = RobustnessConfig::default();
    let cfg = RobustnessConfig {
        etas: s.etas.clone().unwrap_or(d.etas),
        alphas: s.alphas.clone().unwrap_or(d.alphas),
        n: s.n.unwrap_or(d.n),
        lambda: s.lambda.unwrap_or(d.lambda),
        trials: s.trials.unwrap_or(d.trials),
        seed: s.seed(),
        outlier_magnitude: s.outlier_magnitude.unwrap_or(d.outlier_magnitude),
        symmetric: s.symmetric.unwrap_or(d.symmetric),
    };
    let t = robustness_study(&model, &kernel, &cfg)?;
    let mut w = csv_sink(s.output.as_deref())?;
    for c in &t.cells {
        w.serialize(c)?;
    }
    w.flush()?;
    let flag = match t.alpha_near_one_wins_at_max_eta {
        Some(true) => "alpha 1.1 beats alpha 2 at the largest contamination",
        Some(false) => "alpha 1.1 does not beat alpha 2 at the largest contamination",
        None => "grid lacks alpha 1.1 or alpha 2",
    };
    summary(&s, flag);
    Ok(())
}
