use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use hybrid_auction_cli::report::{Params, Report};
use hybrid_auction_cli::scenario::ScenarioFile;
use hybrid_auction_core::{
    experiment_explore, experiment_theorem2, experiment_typical_case, gittins_index, lemma3_ratio,
    risk_dominance_sweep, run_simulation, BetaParams, DiscountFactor, IndexOptions, Metrics,
    RiskSweepRow, Scenario, UtilitySpec,
};

#[derive(Parser)]
#[command(
    name = "hybrid-auction",
    version,
    about = "Hybrid per-impression/per-click keyword auction simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file through the repeated-auction Monte Carlo engine.
    ///
    /// Writes CSV metrics to --out (summary to stdout), or CSV to stdout
    /// (summary to stderr) when --out is omitted.
    Run {
        /// Path to a JSON scenario file.
        scenario: PathBuf,
        /// Write the CSV here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a packaged experiment and write its statistics as CSV.
    ///
    /// Defaults per experiment: theorem2 uses alpha=1 beta=10000 gamma-a=0
    /// trials=100000; typical uses K=5 trials=10000; explore uses a certain
    /// advertiser with CTR 0.5, epsilon=0.1, alpha=1 beta=20, competitor at
    /// 0.5*(1-epsilon), trials=10000; lemma3 uses alpha=1 beta=10000; risk
    /// sweeps lambda over {0.5, 1, 2, 5} on 50 seeded instances. Seed
    /// defaults to 42 everywhere.
    Experiment {
        #[arg(value_enum)]
        name: ExperimentName,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long = "gamma-a")]
        gamma_a: Option<f64>,
        #[arg(long = "K")]
        k: Option<u32>,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the Gittins index of Beta(alpha, beta) at discount gamma.
    Gittins {
        alpha: f64,
        beta: f64,
        gamma: f64,
        /// Bisection tolerance.
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ExperimentName {
    /// Hybrid vs per-click revenue with CTRs drawn from the prior.
    Theorem2,
    /// Revenue gain under a diffuse Beta(1, K) prior with 4^K advertisers.
    Typical,
    /// Explore-phase loss accounting vs the per-click overbidder.
    Explore,
    /// The E[min(mu, w)]/mu quadrature ratio.
    Lemma3,
    /// Risk-posture sweep: per-click vs per-impression utility and m*.
    Risk,
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = dispatch(cli) {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { scenario, out } => cmd_run(&scenario, out.as_deref()),
        Command::Experiment {
            name,
            alpha,
            beta,
            gamma_a,
            k,
            epsilon,
            lambda,
            trials,
            seed,
            out,
        } => {
            let report = match name {
                ExperimentName::Theorem2 => cmd_theorem2(
                    alpha.unwrap_or(1.0),
                    beta.unwrap_or(1.0e4),
                    gamma_a.unwrap_or(0.0),
                    trials.unwrap_or(100_000),
                    seed.unwrap_or(42),
                )?,
                ExperimentName::Typical => {
                    cmd_typical(k.unwrap_or(5), trials.unwrap_or(10_000), seed.unwrap_or(42))?
                }
                ExperimentName::Explore => cmd_explore(
                    epsilon.unwrap_or(0.1),
                    alpha.unwrap_or(1.0),
                    beta.unwrap_or(20.0),
                    trials.unwrap_or(10_000),
                    seed.unwrap_or(42),
                )?,
                ExperimentName::Lemma3 => {
                    cmd_lemma3(alpha.unwrap_or(1.0), beta.unwrap_or(1.0e4))?
                }
                ExperimentName::Risk => {
                    cmd_risk(lambda, trials.unwrap_or(50), seed.unwrap_or(42))?
                }
            };
            emit(&report, out.as_deref())
        }
        Command::Gittins {
            alpha,
            beta,
            gamma,
            tol,
        } => cmd_gittins(alpha, beta, gamma, tol),
    }
}

/// CSV to the chosen sink; the human summary goes wherever the CSV is not.
fn emit(report: &Report, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => {
            let mut file = fs::File::create(path)
                .with_context(|| format!("cannot create {}", path.display()))?;
            report.write_csv(&mut file)?;
            file.flush()?;
            for line in report.summary_lines() {
                println!("{line}");
            }
        }
        None => {
            let stdout = std::io::stdout();
            report.write_csv(&mut stdout.lock())?;
            for line in report.summary_lines() {
                eprintln!("{line}");
            }
        }
    }
    Ok(())
}

fn cmd_run(path: &Path, out: Option<&Path>) -> Result<()> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read scenario file {}", path.display()))?;
    let scenario = ScenarioFile::parse(&text)
        .and_then(ScenarioFile::into_scenario)
        .with_context(|| format!("{}", path.display()))?;
    eprintln!(
        "running scenario \"{}\": {} advertisers, {} rounds x {} trials, seed {}",
        scenario.name,
        scenario.advertisers.len(),
        scenario.rounds,
        scenario.trials,
        scenario.seed
    );
    let metrics = run_simulation(&scenario)?;
    emit(&metrics_report(&scenario, &metrics), out)
}

fn metrics_report(scenario: &Scenario, metrics: &Metrics) -> Report {
    let params = Params {
        rounds: Some(scenario.rounds),
        trials: Some(scenario.trials),
        seed: Some(scenario.seed),
        ..Params::default()
    };
    let mut report = Report::new(scenario.name.clone());
    report.push(
        &params,
        "auctioneer_revenue_discounted",
        metrics.auctioneer_revenue.mean,
        Some(metrics.auctioneer_revenue.stderr),
    );
    if let Some(stat) = metrics.per_click_revenue {
        report.push(
            &params,
            "per_click_revenue_discounted",
            stat.mean,
            Some(stat.stderr),
        );
    }
    if let Some(stat) = metrics.revenue_ratio {
        report.push(
            &params,
            "revenue_ratio_hybrid_per_click",
            stat.mean,
            Some(stat.stderr),
        );
    }
    for (j, stat) in metrics.advertiser_profit.iter().enumerate() {
        report.push(
            &params,
            &format!("advertiser_{j}_profit_discounted"),
            stat.mean,
            Some(stat.stderr),
        );
    }
    for (j, summary) in metrics.explore.iter().enumerate() {
        let Some(s) = summary else { continue };
        report.push(
            &params,
            &format!("advertiser_{j}_explore_terminated_share"),
            s.terminated_share,
            None,
        );
        report.push(
            &params,
            &format!("advertiser_{j}_explore_rounds"),
            s.phase_rounds.mean,
            Some(s.phase_rounds.stderr),
        );
        report.push(
            &params,
            &format!("advertiser_{j}_explore_impressions"),
            s.impressions.mean,
            Some(s.impressions.stderr),
        );
        report.push(
            &params,
            &format!("advertiser_{j}_explore_worst_case_loss"),
            s.worst_case_loss.mean,
            Some(s.worst_case_loss.stderr),
        );
        report.push(
            &params,
            &format!("advertiser_{j}_explore_realized_loss"),
            s.realized_loss.mean,
            Some(s.realized_loss.stderr),
        );
    }
    report
}

fn cmd_theorem2(
    alpha: f64,
    beta: f64,
    gamma_a: f64,
    trials: usize,
    seed: u64,
) -> Result<Report> {
    let stats = experiment_theorem2(
        alpha,
        beta,
        DiscountFactor::new(gamma_a)?,
        2,
        trials,
        seed,
    )?;
    let params = Params {
        alpha: Some(alpha),
        beta: Some(beta),
        gamma_a: Some(gamma_a),
        trials: Some(trials),
        seed: Some(seed),
        ..Params::default()
    };
    let mut report = Report::new("theorem2");
    report.push(&params, "hybrid_revenue", stats.hybrid.mean, Some(stats.hybrid.stderr));
    report.push(
        &params,
        "per_click_revenue",
        stats.per_click.mean,
        Some(stats.per_click.stderr),
    );
    report.push(
        &params,
        "revenue_ratio_hybrid_per_click",
        stats.ratio.mean,
        Some(stats.ratio.stderr),
    );
    Ok(report)
}

fn cmd_typical(k: u32, trials: usize, seed: u64) -> Result<Report> {
    let stats = experiment_typical_case(k, trials, seed)?;
    let params = Params {
        k: Some(k),
        trials: Some(trials),
        seed: Some(seed),
        ..Params::default()
    };
    let mut report = Report::new("typical");
    report.push(&params, "n_advertisers", stats.n_advertisers as f64, None);
    report.push(&params, "hybrid_revenue", stats.hybrid.mean, Some(stats.hybrid.stderr));
    report.push(
        &params,
        "per_click_revenue",
        stats.per_click.mean,
        Some(stats.per_click.stderr),
    );
    report.push(
        &params,
        "gain_factor",
        stats.gain_factor.mean,
        Some(stats.gain_factor.stderr),
    );
    let share = stats.prob_second_ctr_at_least_half;
    let share_se = (share * (1.0 - share) / trials.max(1) as f64).sqrt();
    report.push(
        &params,
        "prob_second_ctr_at_least_half",
        share,
        Some(share_se),
    );
    Ok(report)
}

fn cmd_explore(epsilon: f64, alpha: f64, beta: f64, trials: usize, seed: u64) -> Result<Report> {
    let true_ctr = 0.5;
    let r_star = true_ctr * (1.0 - epsilon);
    let stats = experiment_explore(true_ctr, epsilon, alpha, beta, r_star, trials, seed)?;
    let params = Params {
        alpha: Some(alpha),
        beta: Some(beta),
        p: Some(true_ctr),
        epsilon: Some(epsilon),
        r_star: Some(r_star),
        trials: Some(trials),
        seed: Some(seed),
        ..Params::default()
    };
    let mut report = Report::new("explore");
    report.push(
        &params,
        "terminated_share",
        stats.terminated_trials as f64 / trials.max(1) as f64,
        None,
    );
    report.push(
        &params,
        "phase_rounds",
        stats.phase_rounds.mean,
        Some(stats.phase_rounds.stderr),
    );
    report.push(
        &params,
        "worst_case_loss",
        stats.worst_case_loss.mean,
        Some(stats.worst_case_loss.stderr),
    );
    report.push(
        &params,
        "realized_loss",
        stats.realized_loss.mean,
        Some(stats.realized_loss.stderr),
    );
    report.push(&params, "max_worst_case_loss", stats.max_worst_case_loss, None);
    report.push(&params, "max_realized_loss", stats.max_realized_loss, None);
    report.push(
        &params,
        "per_click_overbid_loss",
        stats.overbid_loss.mean,
        Some(stats.overbid_loss.stderr),
    );
    Ok(report)
}

fn cmd_lemma3(alpha: f64, beta: f64) -> Result<Report> {
    let ratio = lemma3_ratio(alpha, beta)?;
    let params = Params {
        alpha: Some(alpha),
        beta: Some(beta),
        ..Params::default()
    };
    let mut report = Report::new("lemma3");
    report.push(&params, "min_mean_ratio", ratio, None);
    Ok(report)
}

fn cmd_risk(lambda: Option<f64>, instances: usize, seed: u64) -> Result<Report> {
    let lambdas = match lambda {
        Some(l) => vec![l],
        None => vec![0.5, 1.0, 2.0, 5.0],
    };
    let mut utilities = vec![UtilitySpec::RiskNeutral];
    for &l in &lambdas {
        utilities.push(UtilitySpec::ExponentialAverse { lambda: l });
        utilities.push(UtilitySpec::ExponentialSeeking { lambda: l });
    }
    let rows = risk_dominance_sweep(instances, &utilities, seed);

    let base = Params {
        trials: Some(instances),
        seed: Some(seed),
        ..Params::default()
    };
    let mut report = Report::new("risk");

    let neutral_gap = rows
        .iter()
        .filter(|r| r.utility == UtilitySpec::RiskNeutral)
        .map(|r| (r.m_star - r.mean_value).abs())
        .fold(0.0f64, f64::max);
    report.push(&base, "neutral_max_abs_mstar_gap", neutral_gap, None);

    for &l in &lambdas {
        let params = Params {
            lambda: Some(l),
            ..base.clone()
        };
        let of = |pred: &dyn Fn(&RiskSweepRow) -> bool| -> Vec<&RiskSweepRow> {
            rows.iter().filter(|r| pred(r)).collect()
        };
        let averse = of(&|r| matches!(r.utility, UtilitySpec::ExponentialAverse { lambda } if lambda == l));
        let seeking = of(&|r| matches!(r.utility, UtilitySpec::ExponentialSeeking { lambda } if lambda == l));

        let min_click_adv = averse
            .iter()
            .map(|r| r.eu_per_click - r.eu_per_impression)
            .fold(f64::INFINITY, f64::min);
        let max_mstar_gap = averse
            .iter()
            .map(|r| r.m_star - r.mean_value)
            .fold(f64::NEG_INFINITY, f64::max);
        report.push(&params, "averse_min_per_click_advantage", min_click_adv, None);
        report.push(&params, "averse_max_mstar_minus_cap", max_mstar_gap, None);

        let min_impr_adv = seeking
            .iter()
            .map(|r| r.eu_per_impression - r.eu_per_click)
            .fold(f64::INFINITY, f64::min);
        let min_mstar_gap = seeking
            .iter()
            .map(|r| r.m_star - r.mean_value)
            .fold(f64::INFINITY, f64::min);
        report.push(&params, "seeking_min_per_impression_advantage", min_impr_adv, None);
        report.push(&params, "seeking_min_mstar_minus_cap", min_mstar_gap, None);
    }
    Ok(report)
}

fn cmd_gittins(alpha: f64, beta: f64, gamma: f64, tol: f64) -> Result<()> {
    let prior = BetaParams::new(alpha, beta)?;
    let gamma = DiscountFactor::new(gamma)?;
    let index = gittins_index(&prior, gamma, &IndexOptions::with_tolerance(tol));
    println!("{index:.10}");
    Ok(())
}
