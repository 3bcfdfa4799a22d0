//! Command implementations.

use std::time::Instant;

use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use ssmt_core::evaluation::binomial_se;
use ssmt_core::procedures::{harmonic_number, split_pvalues, DEFAULT_N_MAX};
use ssmt_core::rng::{replicate_seed, ReplicateRng};
use ssmt_core::theory::PhaseRow;
use ssmt_core::{
    bh_stepup, by_procedure, conservative_empirical_pvalues, detectability_k, fdr_bounds,
    monte_carlo, naive_empirical_pvalues, oracle_pvalues, phase_diagram, randomized_bh, split_bh,
    ss_bh, EquicorrSpec, Family, NullModel, NullTrainingSample, PValues, Procedure,
    Rational64, RejectionSet, ScenarioSpec, TestStatistics,
};

use crate::config::{Command, RunConfig};
use crate::error::{CliError, CliResult};
use crate::input::read_values;
use crate::output::OutputDir;
use crate::presets::{panels, phase_preset, scaled_reps, FigureId, Panel, STAR_M, STAR_N};
use crate::svg::{Chart, Series};

/// What a command printed and wrote.
#[derive(Debug, Default)]
pub struct Report {
    pub lines: Vec<String>,
    pub files: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub procedure: String,
    pub fdr_hat: f64,
    pub se_fdr: f64,
    pub sd_fdp: f64,
    pub tdr_hat: f64,
    pub se_tdr: f64,
    pub sd_tdp: f64,
    pub reps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeRow {
    pub replicate: u64,
    pub procedure: String,
    pub fdp: f64,
    pub tdp: f64,
    pub rejections: usize,
    pub contained: bool,
    pub oracle_tdp: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimandRow {
    pub procedure: String,
    pub containment: f64,
    pub se_containment: f64,
    pub tdp_dominance: f64,
    pub se_dominance: f64,
    pub reps: usize,
    pub failures: usize,
}

/// One `(panel, n, procedure)` cell of a figure or sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelRow {
    pub panel: String,
    pub family: String,
    pub m: usize,
    pub m1: usize,
    pub mu: f64,
    pub n: usize,
    pub alpha: f64,
    pub procedure: String,
    pub fdr_hat: f64,
    pub se_fdr: f64,
    pub sd_fdp: f64,
    pub tdr_hat: f64,
    pub se_tdr: f64,
    pub sd_tdp: f64,
    pub reps: usize,
    /// FDR sandwich of the semi-supervised procedure; empty at `n = 0`.
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseCsvRow {
    pub n: usize,
    pub m: usize,
    pub alpha: f64,
    pub k: usize,
    pub region: String,
    pub rule_of_thumb_n: f64,
    pub general_boundary_n: f64,
    pub gamma_star_n: Option<f64>,
    pub gamma_lower_n: Option<f64>,
}

impl From<&PhaseRow> for PhaseCsvRow {
    fn from(r: &PhaseRow) -> Self {
        Self {
            n: r.point.n,
            m: r.point.m,
            alpha: r.point.alpha,
            k: r.point.k,
            region: r.point.region.as_str().to_string(),
            rule_of_thumb_n: r.rule_of_thumb_n,
            general_boundary_n: r.general_boundary_n,
            gamma_star_n: r.gamma_star_n,
            gamma_lower_n: r.gamma_lower_n,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectionRow {
    /// 1-based position in the test file.
    pub index: usize,
    pub statistic: f64,
    /// Empty for randomized BH, whose null sample is internal.
    pub p_value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApplyRow {
    pub procedure: String,
    pub m: usize,
    pub n: usize,
    pub alpha: f64,
    pub k: usize,
    pub v: Option<usize>,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub n: usize,
    pub m: usize,
    pub alpha: f64,
    pub runs: usize,
    pub pvalues_median_s: f64,
    pub ss_bh_median_s: f64,
    pub k: usize,
    pub v: usize,
    pub peak_rss_kb: Option<u64>,
}

/// Runs the configured command on a worker pool of `config.threads` threads.
pub fn run(config: &RunConfig) -> CliResult<Report> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| CliError::usage(format!("cannot start {} worker threads: {e}", config.threads)))?;
    pool.install(|| match config.command {
        Some(Command::Apply) => cmd_apply(config),
        Some(Command::Simulate) => cmd_simulate(config),
        Some(Command::Sweep) => cmd_sweep(config),
        Some(Command::Boundary) => cmd_boundary(config),
        Some(Command::Reproduce) => cmd_reproduce(config),
        Some(Command::Bench) => cmd_bench(config),
        None => Err(CliError::usage("no command given")),
    })
}

fn null_model(config: &RunConfig) -> NullModel {
    match config.family {
        Family::GaussianIid | Family::GaussianNegEquicorr => NullModel::StandardGaussian,
        Family::StudentIid => NullModel::Student { df: config.df },
        Family::LrtTwoGroup => NullModel::GaussianLikelihoodRatio { mu: config.mu },
    }
}

struct Applied {
    set: RejectionSet,
    pvalues: Option<Vec<f64>>,
    v: Option<usize>,
}

fn to_f64(p: PValues<Rational64>) -> Vec<f64> {
    p.values.iter().map(|v| *v.numer() as f64 / *v.denom() as f64).collect()
}

fn apply_one(
    procedure: Procedure,
    x: &TestStatistics<f64>,
    y: Option<&NullTrainingSample<f64>>,
    config: &RunConfig,
) -> CliResult<Applied> {
    let (alpha, level) = config.level()?;
    let nts = || y.ok_or(ssmt_core::Error::EmptyNullSample);
    let conservative = |y| conservative_empirical_pvalues::<f64, f64>(x, y).values;
    Ok(match procedure {
        Procedure::SsBh => {
            let y = nts()?;
            let (set, diag) = ss_bh(x, y, level)?;
            Applied { set, pvalues: Some(conservative(y)), v: Some(diag.v) }
        }
        Procedure::ByBh => {
            let y = nts()?;
            let m = x.len();
            let reduced = if m == 1 { alpha } else { alpha / harmonic_number(m) };
            let set = by_procedure(x, y, alpha)?;
            let diag = ss_bh(x, y, reduced)?.1;
            Applied { set, pvalues: Some(conservative(y)), v: Some(diag.v) }
        }
        Procedure::NaiveBh => {
            let p = naive_empirical_pvalues::<f64, Rational64>(x, nts()?);
            let set = bh_stepup(&p, level)?;
            Applied { set, pvalues: Some(to_f64(p)), v: None }
        }
        Procedure::SplitBh => {
            let y = nts()?;
            let set = split_bh(x, y, level)?;
            Applied { set, pvalues: Some(to_f64(split_pvalues::<f64, Rational64>(x, y)?)), v: None }
        }
        Procedure::OracleBh => {
            let p = oracle_pvalues(x, &null_model(config))?;
            let set = bh_stepup(&p, alpha)?;
            Applied { set, pvalues: Some(p.values), v: None }
        }
        Procedure::RandomizedBh => {
            let rho = config
                .rho
                .ok_or_else(|| CliError::usage("randomized_bh needs --rho"))?;
            let spec = EquicorrSpec::new(rho, x.len())?;
            let mut rng = ReplicateRng::seed_from_u64(config.seed);
            let out = randomized_bh(x, &spec, level, &mut rng, DEFAULT_N_MAX)?;
            Applied { set: out.rejections, pvalues: None, v: Some(out.diagnostics.v) }
        }
        Procedure::Locfdr | Procedure::BlackboxBh => {
            return Err(CliError::usage(format!(
                "{procedure} needs a generative model; use `simulate`"
            )))
        }
    })
}

fn cmd_apply(config: &RunConfig) -> CliResult<Report> {
    let x_path = config
        .x_file
        .as_ref()
        .ok_or_else(|| CliError::usage("apply needs --x-file"))?;
    let xs = read_values(x_path)?;
    if xs.is_empty() {
        return Err(CliError::usage(format!("{}: no test statistics", x_path.display())));
    }
    let ys = match &config.y_file {
        Some(p) => read_values(p)?,
        None => Vec::new(),
    };
    let n = ys.len();
    let x = TestStatistics::new(xs)?;
    let y = if ys.is_empty() { None } else { Some(NullTrainingSample::new(ys)?) };
    let (alpha, _) = config.level()?;
    let [procedure] = config.procedures()[..] else {
        return Err(CliError::usage("apply runs exactly one procedure (--procedures)"));
    };
    if procedure.needs_nts() && n == 0 {
        return Err(CliError::usage(format!("{procedure} needs a nonempty null training sample (--y-file)")));
    }

    let applied = apply_one(procedure, &x, y.as_ref(), config)?;
    let rows: Vec<RejectionRow> = applied
        .set
        .indices
        .iter()
        .map(|&i| RejectionRow {
            index: i + 1,
            statistic: x.values()[i],
            p_value: applied.pvalues.as_ref().map(|p| p[i]),
        })
        .collect();
    let summary = ApplyRow {
        procedure: procedure.to_string(),
        m: x.len(),
        n,
        alpha,
        k: applied.set.k_hat(),
        v: applied.v,
        threshold: applied.set.threshold_p,
    };

    let mut out = OutputDir::create(&config.out, config.force)?;
    out.write_csv_headed("rejections.csv", &["index", "statistic", "p_value"], &rows)?;
    out.write_csv("apply_summary.csv", std::slice::from_ref(&summary))?;
    let files = out.finish(config)?;
    let v = summary.v.map_or("-".to_string(), |v| v.to_string());
    Ok(Report {
        lines: vec![format!(
            "{procedure}: m={} n={n} alpha={alpha} K={} V={v} threshold={}",
            summary.m, summary.k, summary.threshold
        )],
        files,
    })
}

fn summary_rows(res: &ssmt_core::MonteCarloResult) -> Vec<SummaryRow> {
    res.summaries
        .iter()
        .map(|s| SummaryRow {
            procedure: s.procedure.to_string(),
            fdr_hat: s.fdr_hat,
            se_fdr: s.se_fdr,
            sd_fdp: s.sd_fdp,
            tdr_hat: s.tdr_hat,
            se_tdr: s.se_tdr,
            sd_tdp: s.sd_tdp,
            reps: s.reps,
        })
        .collect()
}

fn cmd_simulate(config: &RunConfig) -> CliResult<Report> {
    let m = RunConfig::single(&config.m, "m")?;
    let n = RunConfig::single(&config.n, "n")?;
    let spec = config.scenario(m, n)?;
    let reps = config.reps.unwrap_or(1000);
    let res = monte_carlo(&spec, &config.procedures(), reps, config.eta)?;

    let mut out = OutputDir::create(&config.out, config.force)?;
    let summary = summary_rows(&res);
    out.write_csv("summary.csv", &summary)?;
    let outcomes: Vec<OutcomeRow> = res
        .outcomes
        .iter()
        .map(|o| OutcomeRow {
            replicate: o.replicate,
            procedure: o.procedure.to_string(),
            fdp: o.outcome.fdp,
            tdp: o.outcome.tdp,
            rejections: o.outcome.rejections,
            contained: o.outcome.contained,
            oracle_tdp: o.outcome.oracle_tdp,
        })
        .collect();
    out.write_csv("outcomes.csv", &outcomes)?;
    let estimands: Vec<EstimandRow> = res
        .summaries
        .iter()
        .map(|s| EstimandRow {
            procedure: s.procedure.to_string(),
            containment: s.containment,
            se_containment: binomial_se(s.containment, s.reps),
            tdp_dominance: s.tdp_dominance,
            se_dominance: binomial_se(s.tdp_dominance, s.reps),
            reps: s.reps,
            failures: s.failures,
        })
        .collect();
    out.write_csv("estimands.csv", &estimands)?;

    let mut lines: Vec<String> = summary
        .iter()
        .map(|s| {
            format!(
                "{}: FDR {:.4} (se {:.4})  TDR {:.4} (se {:.4})  reps {}",
                s.procedure, s.fdr_hat, s.se_fdr, s.tdr_hat, s.se_tdr, s.reps
            )
        })
        .collect();
    if let Some(beta) = config.beta {
        let k = detectability_k(&spec, beta, reps)?;
        #[derive(Serialize)]
        struct Row {
            beta: f64,
            reps: usize,
            k: usize,
        }
        out.write_csv("detectability.csv", &[Row { beta, reps, k }])?;
        lines.push(format!("detectable alternatives at beta={beta}: k={k}"));
    }
    let files = out.finish(config)?;
    Ok(Report { lines, files })
}

/// Seed of cell `cell` in panel `panel`, derived from the run seed.
pub fn cell_seed(master: u64, panel: usize, cell: usize) -> u64 {
    replicate_seed(master, ((panel as u64) << 32) | cell as u64)
}

/// Monte-Carlo estimates for every cell of a panel. `reps_override` replaces
/// the budget-scaled caption counts.
pub fn run_panel(
    panel: &Panel,
    panel_index: usize,
    budget: f64,
    reps_override: Option<usize>,
    seed: u64,
    eta: f64,
) -> CliResult<Vec<PanelRow>> {
    let level = ssmt_core::evaluation::exact_level(panel.alpha)?;
    let mut rows = Vec::new();
    for (ci, &(n, base)) in panel.cells.iter().enumerate() {
        let reps = match reps_override {
            Some(r) => r,
            None => scaled_reps(base, budget)?,
        };
        let spec = ScenarioSpec {
            m: panel.m,
            n,
            m1: panel.m1,
            family: panel.family,
            effect: panel.mu,
            df: 3.0,
            pi0: None,
            alpha: panel.alpha,
            seed: cell_seed(seed, panel_index, ci),
            allow_equicorr_alternatives: false,
        };
        let procedures = panel.procedures_at(n);
        let res = monte_carlo(&spec, &procedures, reps, eta)?;
        let bounds = if n >= 1 {
            Some(fdr_bounds(level, n, panel.m, panel.m - panel.m1)?)
        } else {
            None
        };
        for s in &res.summaries {
            rows.push(PanelRow {
                panel: panel.name.clone(),
                family: panel.family.as_str().to_string(),
                m: panel.m,
                m1: panel.m1,
                mu: panel.mu,
                n,
                alpha: panel.alpha,
                procedure: s.procedure.to_string(),
                fdr_hat: s.fdr_hat,
                se_fdr: s.se_fdr,
                sd_fdp: s.sd_fdp,
                tdr_hat: s.tdr_hat,
                se_tdr: s.se_tdr,
                sd_tdp: s.sd_tdp,
                reps: s.reps,
                lower: bounds.map(|b| b.lower),
                upper: bounds.map(|b| b.upper),
            });
        }
        log::info!("{} n={n}: {reps} replicates", panel.name);
    }
    Ok(rows)
}

/// FDR chart (and TDR chart when there are alternatives) drawn from the rows.
pub fn panel_charts(rows: &[PanelRow], log_x: bool) -> Vec<(String, String)> {
    let Some(first) = rows.first() else {
        return Vec::new();
    };
    let mut procs: Vec<&str> = Vec::new();
    for r in rows {
        if !procs.contains(&r.procedure.as_str()) {
            procs.push(&r.procedure);
        }
    }
    let curve = |p: &str, f: &dyn Fn(&PanelRow) -> f64| -> Vec<(f64, f64)> {
        rows.iter().filter(|r| r.procedure == p).map(|r| (r.n as f64, f(r))).collect()
    };
    let mut ns: Vec<usize> = rows.iter().map(|r| r.n).collect();
    ns.dedup();
    let lower: Vec<(f64, f64)> = ns
        .iter()
        .filter_map(|&n| rows.iter().find(|r| r.n == n).and_then(|r| r.lower.map(|l| (n as f64, l))))
        .collect();
    let x_span = (*ns.first().unwrap_or(&0) as f64, *ns.last().unwrap_or(&1) as f64);

    let mut fdr_series = Vec::new();
    for p in &procs {
        fdr_series.push(Series { name: format!("{p} FDR"), points: curve(p, &|r| r.fdr_hat), dashed: false });
        fdr_series.push(Series {
            name: format!("{p} +sd/10"),
            points: curve(p, &|r| r.fdr_hat + r.sd_fdp / 10.0),
            dashed: true,
        });
    }
    if !lower.is_empty() {
        fdr_series.push(Series { name: "lower bound".into(), points: lower, dashed: false });
    }
    fdr_series.push(Series {
        name: "alpha".into(),
        points: vec![(x_span.0, first.alpha), (x_span.1, first.alpha)],
        dashed: true,
    });
    let title = format!("{}: m={}, m1={}, mu={:.3}, alpha={}", first.panel, first.m, first.m1, first.mu, first.alpha);
    let mut charts = vec![(
        format!("{}_fdr.svg", first.panel),
        Chart { title: &title, x_label: "n", y_label: "FDR", log_x, log_y: false, series: fdr_series, markers: vec![] }
            .render(),
    )];
    if first.m1 > 0 {
        let mut tdr_series = Vec::new();
        for p in &procs {
            tdr_series.push(Series { name: format!("{p} TDR"), points: curve(p, &|r| r.tdr_hat), dashed: false });
            tdr_series.push(Series {
                name: format!("{p} -sd/10"),
                points: curve(p, &|r| r.tdr_hat - r.sd_tdp / 10.0),
                dashed: true,
            });
        }
        charts.push((
            format!("{}_tdr.svg", first.panel),
            Chart { title: &title, x_label: "n", y_label: "TDR", log_x, log_y: false, series: tdr_series, markers: vec![] }
                .render(),
        ));
    }
    charts
}

fn cmd_sweep(config: &RunConfig) -> CliResult<Report> {
    let m = RunConfig::single(&config.m, "m")?;
    if config.n.is_empty() {
        return Err(CliError::usage("sweep needs --n with a list of null sample sizes"));
    }
    let (alpha, _) = config.level()?;
    for &n in &config.n {
        config.scenario(m, n)?;
    }
    let panel = Panel {
        name: "sweep".into(),
        family: config.family,
        m,
        m1: config.m1,
        mu: config.mu,
        alpha,
        cells: config.n.iter().map(|&n| (n, 1000)).collect(),
        procedures: config.procedures(),
    };
    let rows = run_panel(&panel, 0, 1.0, config.reps, config.seed, config.eta)?;
    let mut out = OutputDir::create(&config.out, config.force)?;
    out.write_csv("sweep.csv", &rows)?;
    if config.emit_svg {
        for (name, svg) in panel_charts(&rows, false) {
            out.write_text(&name, &svg)?;
        }
    }
    let files = out.finish(config)?;
    Ok(Report { lines: vec![format!("{} rows", rows.len())], files })
}

fn phase_rows(n_grid: &[usize], m_grid: &[usize], alpha: f64, k: &[usize], eta: f64) -> CliResult<Vec<PhaseCsvRow>> {
    Ok(phase_diagram(n_grid, m_grid, alpha, k, eta)?.iter().map(PhaseCsvRow::from).collect())
}

fn cmd_boundary(config: &RunConfig) -> CliResult<Report> {
    if config.n.is_empty() || config.m.is_empty() {
        return Err(CliError::usage("boundary needs --n and --m grids"));
    }
    let (alpha, _) = config.level()?;
    let k = if config.k.is_empty() { vec![1] } else { config.k.clone() };
    let rows = phase_rows(&config.n, &config.m, alpha, &k, config.eta)?;
    let mut out = OutputDir::create(&config.out, config.force)?;
    out.write_csv("boundary.csv", &rows)?;
    let files = out.finish(config)?;
    Ok(Report { lines: vec![format!("{} grid points", rows.len())], files })
}

fn phase_chart(rows: &[PhaseCsvRow], k: usize, alpha: f64) -> String {
    let mut ms: Vec<usize> = rows.iter().map(|r| r.m).collect();
    ms.sort_unstable();
    ms.dedup();
    let line = |f: &dyn Fn(f64) -> f64| ms.iter().map(|&m| (m as f64, f(m as f64))).collect();
    Chart {
        title: &format!("Phase boundaries, alpha={alpha}, k={k}"),
        x_label: "m",
        y_label: "n",
        log_x: true,
        log_y: true,
        series: vec![
            Series { name: "n = m/alpha".into(), points: line(&|m| m / alpha), dashed: false },
            Series { name: format!("n = m/(alpha k), k={k}"), points: line(&|m| m / (alpha * k as f64)), dashed: false },
            Series { name: "n = 1/alpha".into(), points: line(&|_| 1.0 / alpha), dashed: true },
        ],
        markers: vec![("MUSE".into(), STAR_M as f64, STAR_N as f64)],
    }
    .render()
}

fn cmd_reproduce(config: &RunConfig) -> CliResult<Report> {
    let id = config
        .preset
        .ok_or_else(|| CliError::usage("reproduce needs a preset: fig1 .. fig6"))?;
    scaled_reps(1, config.budget)?;
    let mut out = OutputDir::create(&config.out, config.force)?;
    let mut lines = Vec::new();
    if id == FigureId::Fig1 {
        let p = phase_preset();
        for &k in &p.k {
            let rows = phase_rows(&p.n_grid, &p.m_grid, p.alpha, &[k], config.eta)?;
            let star = rows
                .iter()
                .find(|r| r.n == STAR_N && r.m == STAR_M)
                .map(|r| r.region.clone())
                .unwrap_or_default();
            lines.push(format!("k={k}: (n={STAR_N}, m={STAR_M}) is {star}"));
            out.write_csv(&format!("fig1_k{k}.csv"), &rows)?;
            if config.emit_svg {
                out.write_text(&format!("fig1_k{k}.svg"), &phase_chart(&rows, k, p.alpha))?;
            }
        }
    } else {
        for (pi, panel) in panels(id).iter().enumerate() {
            let rows = run_panel(panel, pi, config.budget, config.reps, config.seed, config.eta)?;
            out.write_csv(&format!("{}.csv", panel.name), &rows)?;
            if config.emit_svg {
                for (name, svg) in panel_charts(&rows, id == FigureId::Fig6) {
                    out.write_text(&name, &svg)?;
                }
            }
            lines.push(format!("{}: {} rows", panel.name, rows.len()));
        }
    }
    let files = out.finish(config)?;
    Ok(Report { lines, files })
}

/// Peak resident set size of this process in kB, where the OS reports it.
pub fn peak_rss_kb() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    line.split_whitespace().nth(1)?.parse().ok()
}

fn normal_sample(rng: &mut ReplicateRng, len: usize, what: &str, n: usize, m: usize) -> CliResult<Vec<f64>> {
    let mut v = Vec::new();
    v.try_reserve_exact(len).map_err(|_| {
        CliError::Data(format!("cannot allocate {len} values for the {what} (n={n}, m={m})"))
    })?;
    v.extend((0..len).map(|_| -> f64 { StandardNormal.sample(rng) }));
    Ok(v)
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

/// Times p-value construction and the merge scan on a synthetic full-null
/// dataset. Both run in `f64`.
pub fn bench(n: usize, m: usize, alpha: f64, runs: usize, seed: u64) -> CliResult<BenchRow> {
    if n == 0 || m == 0 {
        return Err(CliError::usage("bench needs n, m >= 1"));
    }
    if runs < 5 {
        return Err(CliError::usage("bench needs at least 5 runs"));
    }
    let mut rng = ReplicateRng::seed_from_u64(seed);
    let y = NullTrainingSample::new(normal_sample(&mut rng, n, "null training sample", n, m)?)?;
    let x = TestStatistics::new(normal_sample(&mut rng, m, "test sample", n, m)?)?;
    let mut t_p = Vec::with_capacity(runs);
    let mut t_s = Vec::with_capacity(runs);
    let mut kv = None;
    for _ in 0..runs {
        let start = Instant::now();
        let p = conservative_empirical_pvalues::<f64, f64>(&x, &y);
        t_p.push(start.elapsed().as_secs_f64());
        drop(p);
        let start = Instant::now();
        let (_, diag) = ss_bh(&x, &y, alpha)?;
        t_s.push(start.elapsed().as_secs_f64());
        match kv {
            None => kv = Some((diag.k, diag.v)),
            Some(prev) if prev != (diag.k, diag.v) => {
                return Err(CliError::Numerical("repeated runs disagree".into()))
            }
            _ => {}
        }
    }
    let (k, v) = kv.unwrap_or((0, 0));
    Ok(BenchRow {
        n,
        m,
        alpha,
        runs,
        pvalues_median_s: median(t_p),
        ss_bh_median_s: median(t_s),
        k,
        v,
        peak_rss_kb: peak_rss_kb(),
    })
}

fn cmd_bench(config: &RunConfig) -> CliResult<Report> {
    let n = RunConfig::single(&config.n, "n")?;
    let m = RunConfig::single(&config.m, "m")?;
    let (alpha, _) = config.level()?;
    let row = bench(n, m, alpha, config.runs, config.seed)?;
    let mut out = OutputDir::create(&config.out, config.force)?;
    out.write_csv("bench.csv", std::slice::from_ref(&row))?;
    let files = out.finish(config)?;
    Ok(Report {
        lines: vec![format!(
            "n={n} m={m}: p-values {:.4}s, ss_bh {:.4}s (median of {}), K={} V={}, peak RSS {} kB",
            row.pvalues_median_s,
            row.ss_bh_median_s,
            row.runs,
            row.k,
            row.v,
            row.peak_rss_kb.map_or("?".into(), |v| v.to_string())
        )],
        files,
    })
}
