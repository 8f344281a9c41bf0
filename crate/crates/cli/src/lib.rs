//! Experiment harness: turns an [`ExperimentConfig`] into a CSV or JSON report
//! and a manifest that reproduces it.

pub mod report;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Subcommand};
use num_bigint::BigInt;
use polycoprime::{
    choose_z, continued_fraction, coprime_count, divisor_count, erdos_turan_bound, irrationality_exponent_estimate,
    legendre_expansion, liouville_witness, omega_deviation_count, parse_constant, sieve_gap, sifted_count,
    simultaneous_approx_search, weyl_sums, ComputableReal, DiscrepancyReport64, RealPolynomial, SieveConfig, WeylSum64,
};
use serde::{Deserialize, Serialize};

pub use report::{format_float, Cell, Format, Table};

pub const TOOL: &str = "polycoprime";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] polycoprime::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("manifest: {0}")]
    Manifest(#[from] serde_json::Error),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// 1 for input and usage problems, 2 for undecidable floors, 3 for resource guards.
    pub fn exit_code(&self) -> i32 {
        use polycoprime::Error as E;
        match self {
            CliError::Core(E::FloorUndecided { .. }) => 2,
            CliError::Core(E::DivisorExplosion { .. } | E::PrecisionExhausted { .. }) => 3,
            _ => 1,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Args)]
pub struct DensityArgs {
    /// Polynomial in x, e.g. "sqrt(2)*x^3 + sqrt(3)*x + 1/3".
    #[arg(long)]
    pub poly: String,
    #[arg(long, default_value_t = 1_000_000)]
    pub xmax: u64,
    /// Geometric checkpoints (ratio 2) ending at xmax.
    #[arg(long, default_value_t = 12)]
    pub checkpoints: usize,
    /// Ascending ranges for a convergence table; replaces the checkpoints.
    #[arg(long, value_delimiter = ',')]
    #[serde(default)]
    pub x_list: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Args)]
pub struct SieveArgs {
    #[arg(long)]
    pub poly: String,
    #[arg(long, default_value_t = 10_000)]
    pub xmax: u64,
    /// Explicit sieve level, reported next to the asymptotic choice.
    #[arg(long, default_value_t = polycoprime::sieve::DEFAULT_Z)]
    pub z: f64,
    /// Error-exponent parameter A in c = 1/(2(A+1)).
    #[arg(long = "A", default_value_t = 2.0)]
    pub a: f64,
    #[arg(long, default_value_t = polycoprime::sieve::DEFAULT_EPSILON)]
    pub epsilon: f64,
    /// Also check S(X, z) - S(X) against the sum of |A_d| over d > 1 free of primes below z.
    #[arg(long)]
    #[serde(default)]
    pub gap: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Args)]
pub struct DivisorArgs {
    #[arg(long)]
    pub poly: String,
    #[arg(long, default_value_t = 10_000)]
    pub xmax: u64,
    #[arg(long, default_value_t = 10)]
    pub d_max: u64,
    /// Frequency cutoff for the Erdős–Turán bound.
    #[arg(long = "T", default_value_t = 10)]
    pub t: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Args)]
pub struct WeylArgs {
    #[arg(long)]
    pub poly: String,
    #[arg(long, default_value_t = 100_000)]
    pub xmax: u64,
    #[arg(long, default_value_t = 1)]
    pub d: u64,
    #[arg(long, default_value_t = 10)]
    pub m_max: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Args)]
pub struct DiscrepancyArgs {
    #[arg(long)]
    pub poly: String,
    #[arg(long, default_value_t = 10_000)]
    pub xmax: u64,
    #[arg(long, default_value_t = 1)]
    pub d: u64,
    #[arg(long = "T", default_value_t = 10)]
    pub t: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Args)]
pub struct CfArgs {
    #[arg(long)]
    pub alpha: String,
    #[arg(long, default_value_t = 10)]
    pub terms: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Args)]
pub struct WitnessArgs {
    #[arg(long)]
    pub alpha: String,
    #[arg(long)]
    pub n: u32,
    /// Largest denominator searched; any size.
    #[arg(long, default_value = "1000000")]
    pub q_max: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Args)]
pub struct OmegaArgs {
    #[arg(long, default_value_t = 10_000)]
    pub xmax: u64,
    #[arg(long, default_value_t = 3)]
    pub n_min: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Args)]
pub struct ApproxArgs {
    /// Coefficients alpha_1..alpha_k, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub alphas: Vec<String>,
    #[arg(long)]
    pub xmax: f64,
    #[arg(long)]
    pub delta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Subcommand)]
#[serde(tag = "subcommand", rename_all = "lowercase")]
pub enum Experiment {
    /// Coprime counts S(X) and their ratio to 6/pi^2.
    Density(DensityArgs),
    /// Sifted count S(X, z) and its Legendre expansion.
    Sieve(SieveArgs),
    /// Divisor classes A_d(X) with the Erdős–Turán count bound.
    Divisors(DivisorArgs),
    /// Weyl sums s_m(X) for m = 1..m_max.
    Weyl(WeylArgs),
    /// Star discrepancy of the phases against the Erdős–Turán bound.
    Discrepancy(DiscrepancyArgs),
    /// Continued fraction, convergents and exponent estimates.
    Cf(CfArgs),
    /// Search for |alpha - p/q| <= q^-n.
    Witness(WitnessArgs),
    /// Hardy–Ramanujan deviation count for omega(n).
    Omega(OmegaArgs),
    /// Smallest q with |q alpha_j - a_j| <= X^(delta - j).
    Approx(ApproxArgs),
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Density(_) => "density",
            Experiment::Sieve(_) => "sieve",
            Experiment::Divisors(_) => "divisors",
            Experiment::Weyl(_) => "weyl",
            Experiment::Discrepancy(_) => "discrepancy",
            Experiment::Cf(_) => "cf",
            Experiment::Witness(_) => "witness",
            Experiment::Omega(_) => "omega",
            Experiment::Approx(_) => "approx",
        }
    }
}

/// Everything that determines a report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub threads: usize,
    pub precision_ceiling: u32,
    /// Recorded for reproducibility; no subcommand samples at random yet.
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub config: ExperimentConfig,
}

impl Manifest {
    pub fn new(config: &ExperimentConfig) -> Self {
        Self {
            tool: TOOL.into(),
            version: VERSION.into(),
            config: config.clone(),
        }
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_owned(),
            source,
        })?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Manifest written next to `out`.
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

fn poly(text: &str) -> CliResult<RealPolynomial> {
    Ok(RealPolynomial::parse(text)?)
}

fn density_table(a: &DensityArgs) -> CliResult<Table> {
    let p = poly(&a.poly)?;
    let mut t = Table::new(&["X", "count", "ratio", "abs_error"]);
    if a.x_list.is_empty() {
        let r = coprime_count(&p, a.xmax, a.checkpoints)?;
        for c in &r.checkpoints {
            let err = (c.ratio - r.target).abs();
            t.push(vec![c.x.into(), c.count.into(), c.ratio.into(), err.into()]);
        }
        return Ok(t);
    }
    if a.x_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CliError::Usage("--x-list must be strictly ascending".into()));
    }
    for &x in &a.x_list {
        let r = coprime_count(&p, x, 1)?;
        t.push(vec![x.into(), r.count.into(), r.ratio.into(), r.abs_error.into()]);
    }
    Ok(t)
}

fn sieve_table(a: &SieveArgs) -> CliResult<Table> {
    let p = poly(&a.poly)?;
    let cfg = SieveConfig::new(a.xmax as f64, a.a, a.epsilon, Some(a.z))?;
    let formula = choose_z(a.xmax as f64, a.a).ok().map(|c| c.z);
    let sifted = sifted_count(&p, a.xmax, cfg.z)?;
    let legendre = legendre_expansion(&p, a.xmax, cfg.z)?;
    let coprime = coprime_count(&p, a.xmax, 1)?.count;
    let (gap, bound) = if a.gap {
        let g = sieve_gap(&p, a.xmax, cfg.z)?;
        (Some(g.gap), Some(g.bound))
    } else {
        (None, None)
    };
    let mut t = Table::new(&[
        "X", "z", "formula_z", "c", "sifted", "legendre", "terms", "coprime", "gap", "gap_bound",
    ]);
    t.push(vec![
        a.xmax.into(),
        cfg.z.into(),
        formula.into(),
        cfg.c.into(),
        sifted.into(),
        legendre.value.into(),
        legendre.terms.len().into(),
        coprime.into(),
        gap.into(),
        bound.into(),
    ]);
    Ok(t)
}

fn divisors_table(a: &DivisorArgs) -> CliResult<Table> {
    let p = poly(&a.poly)?;
    let mut t = Table::new(&["d", "X", "count", "expected", "deviation", "et_bound"]);
    for d in 1..=a.d_max.min(a.xmax) {
        let dc = divisor_count(&p, d, a.xmax)?;
        let et: DiscrepancyReport64 = erdos_turan_bound(&p, d, a.xmax, a.t)?;
        t.push(vec![
            d.into(),
            a.xmax.into(),
            dc.count.into(),
            dc.expected.into(),
            dc.deviation.into(),
            et.count_bound().into(),
        ]);
    }
    Ok(t)
}

fn weyl_table(a: &WeylArgs) -> CliResult<Table> {
    let p = poly(&a.poly)?;
    let sums: Vec<WeylSum64> = weyl_sums(&p, a.d, 1..=a.m_max, a.xmax)?;
    let mut t = Table::new(&["m", "d", "X", "re", "im", "magnitude", "exponent"]);
    for s in sums {
        t.push(vec![
            s.m.into(),
            s.d.into(),
            s.x.into(),
            s.re.into(),
            s.im.into(),
            s.magnitude.into(),
            s.exponent.into(),
        ]);
    }
    Ok(t)
}

fn discrepancy_table(a: &DiscrepancyArgs) -> CliResult<Table> {
    let p = poly(&a.poly)?;
    let r: DiscrepancyReport64 = erdos_turan_bound(&p, a.d, a.xmax, a.t)?;
    let mut t = Table::new(&["d", "X", "N", "T", "d_star", "et_bound", "weyl_total", "count_bound"]);
    t.push(vec![
        r.d.into(),
        r.x.into(),
        r.n.into(),
        r.t.into(),
        r.d_star.into(),
        r.et_bound.into(),
        r.weyl_total().into(),
        r.count_bound().into(),
    ]);
    Ok(t)
}

fn cf_table(a: &CfArgs) -> CliResult<Table> {
    let alpha = parse_constant(&a.alpha)?;
    let cf = continued_fraction(&alpha, a.terms)?;
    let estimates = if a.terms >= 2 {
        irrationality_exponent_estimate(&alpha, a.terms)?.estimates
    } else {
        Vec::new()
    };
    let mut t = Table::new(&["index", "a", "p", "q", "exponent_estimate"]);
    let quotients = std::iter::once(&cf.a0).chain(&cf.partial_quotients);
    for (i, (q, c)) in quotients.zip(&cf.convergents).enumerate() {
        let est = estimates.iter().find(|e| e.q == c.q).map(|e| e.estimate);
        t.push(vec![i.into(), q.into(), (&c.p).into(), (&c.q).into(), est.into()]);
    }
    Ok(t)
}

fn witness_table(a: &WitnessArgs) -> CliResult<Table> {
    let alpha = parse_constant(&a.alpha)?;
    let q_max: BigInt = a
        .q_max
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("--q-max {:?} is not an integer", a.q_max)))?;
    let w = liouville_witness(&alpha, a.n, &q_max)?;
    let mut t = Table::new(&["n", "q_max", "found", "p", "q", "err_upper", "margin"]);
    let row = match w {
        Some(w) => {
            use num_traits::ToPrimitive;
            let margin = w.margin().to_f64();
            vec![
                a.n.to_string().into(),
                (&q_max).into(),
                "true".into(),
                (&w.p).into(),
                (&w.q).into(),
                w.err.to_f64().into(),
                margin.into(),
            ]
        }
        None => vec![
            a.n.to_string().into(),
            (&q_max).into(),
            "false".into(),
            Cell::Empty,
            Cell::Empty,
            Cell::Empty,
            Cell::Empty,
        ],
    };
    t.push(row);
    Ok(t)
}

fn omega_table(a: &OmegaArgs) -> CliResult<Table> {
    let r = omega_deviation_count(a.xmax, a.n_min)?;
    let mut t = Table::new(&["X", "n_min", "count", "fraction"]);
    t.push(vec![r.x.into(), r.n_min.into(), r.count.into(), r.fraction.into()]);
    Ok(t)
}

fn approx_table(a: &ApproxArgs) -> CliResult<Table> {
    let alphas: Vec<ComputableReal> = a.alphas.iter().map(|s| parse_constant(s)).collect::<Result<_, _>>()?;
    let hit = simultaneous_approx_search(&alphas, a.xmax, a.delta)?;
    let mut t = Table::new(&["X", "delta", "found", "q", "a"]);
    let (found, q, coeffs) = match hit {
        Some(h) => {
            let list: Vec<String> = h.a.iter().map(ToString::to_string).collect();
            ("true", Cell::from(h.q), Cell::from(list.join(" ")))
        }
        None => ("false", Cell::Empty, Cell::Empty),
    };
    t.push(vec![a.xmax.into(), a.delta.into(), found.into(), q, coeffs]);
    Ok(t)
}

/// Computes the report table for one experiment in the current thread pool.
pub fn build_table(experiment: &Experiment) -> CliResult<Table> {
    match experiment {
        Experiment::Density(a) => density_table(a),
        Experiment::Sieve(a) => sieve_table(a),
        Experiment::Divisors(a) => divisors_table(a),
        Experiment::Weyl(a) => weyl_table(a),
        Experiment::Discrepancy(a) => discrepancy_table(a),
        Experiment::Cf(a) => cf_table(a),
        Experiment::Witness(a) => witness_table(a),
        Experiment::Omega(a) => omega_table(a),
        Experiment::Approx(a) => approx_table(a),
    }
}

/// Renders the report for `config` using its thread count and precision ceiling.
pub fn render(config: &ExperimentConfig) -> CliResult<String> {
    if config.threads == 0 {
        return Err(CliError::Usage("threads must be at least 1".into()));
    }
    polycoprime::constants::set_precision_ceiling(config.precision_ceiling);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    let table = pool.install(|| build_table(&config.experiment))?;
    Ok(table.render(config.format, config.experiment.name()))
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

/// Runs `config`: the report goes to `out` (plus its manifest) or is returned for stdout.
pub fn run(config: &ExperimentConfig) -> CliResult<Option<String>> {
    let text = render(config)?;
    match &config.out {
        Some(out) => {
            write_file(out, &text)?;
            let manifest = serde_json::to_string_pretty(&Manifest::new(config))? + "\n";
            write_file(&manifest_path(out), &manifest)?;
            Ok(None)
        }
        None => Ok(Some(text)),
    }
}
