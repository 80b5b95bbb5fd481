//! Command-line driver: domain configs in, CSV/JSON/plot data out.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure,
//! 4 near-pole condition warning promoted to an error under --strict.

mod output;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use nalgebra::Matrix2;
use num_complex::Complex64;

use output::{fmt_float, Cell, OutputFormat, Table};
use poltensor::analysis::hs_check;
use poltensor::config::{parse_domain_config, DomainConfig};
use poltensor::geometry::discretize;
use poltensor::layerops::assemble_k;
use poltensor::oracle::{self, Fixture, RefineQuantity};
use poltensor::rational::{detect_two_pole, fit_rational, RationalModel};
use poltensor::shape::{equivalent_ellipse, recover_ellipse, EllipseParams};
use poltensor::spectral::{smooth_coefficients, spectral_pipeline};
use poltensor::tensor::{
    pol_direct_guarded, pol_dual_guarded, pol_spectral_guarded, EvalMethod, PolTensor,
    DEFAULT_POLE_GUARD,
};

#[derive(Parser)]
#[command(name = "poltensor", version, about = "Polarization tensors of planar domains")]
struct Cli {
    /// Promote near-pole condition warnings to errors (exit code 4).
    #[arg(long, global = true)]
    strict: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct DomainOpts {
    /// Path to a domain config file.
    #[arg(long)]
    domain: PathBuf,
    /// Override the node count from the config.
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Args)]
struct OutOpts {
    /// Output file; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Output format: csv, json, or plot-data.
    #[arg(long, default_value = "csv")]
    format: OutputFormat,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate M(mu) at a single contrast.
    Compute {
        #[command(flatten)]
        domain: DomainOpts,
        /// Contrast, e.g. "1.5", "-0.5", or "2+0.5i".
        #[arg(long, allow_hyphen_values = true)]
        mu: String,
        /// Evaluation route: direct, dual, or spectral.
        #[arg(long, default_value = "direct")]
        method: String,
        /// Minimum allowed distance to an operator eigenvalue.
        #[arg(long, default_value_t = DEFAULT_POLE_GUARD)]
        guard: f64,
        #[command(flatten)]
        out: OutOpts,
    },
    /// Evaluate M over a real contrast grid.
    Sweep {
        #[command(flatten)]
        domain: DomainOpts,
        /// Real grid "start:stop:count" (inclusive endpoints).
        #[arg(long = "mu-grid", allow_hyphen_values = true)]
        mu_grid: String,
        #[arg(long, default_value = "direct")]
        method: String,
        #[arg(long, default_value_t = DEFAULT_POLE_GUARD)]
        guard: f64,
        #[command(flatten)]
        out: OutOpts,
    },
    /// Eigenvalues of the symmetrized double layer operator.
    Spectrum {
        #[command(flatten)]
        domain: DomainOpts,
        #[command(flatten)]
        out: OutOpts,
    },
    /// Spectral measure clusters (lambda, alpha, beta, gamma).
    Measures {
        #[command(flatten)]
        domain: DomainOpts,
        /// record (native), csv, or json.
        #[arg(long, default_value = "record")]
        format: String,
        /// Emit the paired pole coefficients (lambda, r+^2, r-^2, c) instead
        /// of the raw clusters.
        #[arg(long)]
        coefficients: bool,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Fit a shared-pole rational model to sampled tensors.
    Fit {
        /// Sample CSV in the sweep output schema.
        #[arg(long)]
        samples: PathBuf,
        #[arg(long = "max-poles", default_value_t = 4)]
        max_poles: usize,
        #[command(flatten)]
        out: OutOpts,
    },
    /// Detect two-pole structure in sampled tensors and recover the ellipse.
    RecoverEllipse {
        #[arg(long)]
        samples: PathBuf,
        #[arg(long = "max-poles", default_value_t = 2)]
        max_poles: usize,
        /// Certificate tolerance.
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[command(flatten)]
        out: OutOpts,
    },
    /// The ellipse matching a tensor at one contrast.
    EquivalentEllipse {
        /// Domain config to compute the tensor from (with --mu).
        #[arg(long)]
        domain: Option<PathBuf>,
        #[arg(long)]
        n: Option<usize>,
        /// Literal tensor "m11,m12,m22" instead of a domain.
        #[arg(long)]
        tensor: Option<String>,
        /// Real contrast with |mu| >= 1/2.
        #[arg(long, allow_hyphen_values = true)]
        mu: f64,
        #[command(flatten)]
        out: OutOpts,
    },
    /// Audit the Hashin-Shtrikman trace bounds over a contrast grid.
    HsCheck {
        #[command(flatten)]
        domain: DomainOpts,
        #[arg(long = "mu-grid", allow_hyphen_values = true)]
        mu_grid: String,
        #[arg(long, default_value_t = DEFAULT_POLE_GUARD)]
        guard: f64,
        #[command(flatten)]
        out: OutOpts,
    },
    /// Reference values: analytic spectra, closed-form tensors, refinements.
    #[command(subcommand)]
    Oracle(OracleCommand),
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Analytic single and double layer spectra on a circle.
    CircleSpectra {
        #[arg(long)]
        radius: f64,
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        out: OutOpts,
    },
    /// Closed-form ellipse tensor.
    EllipseTensor {
        #[arg(long)]
        a: f64,
        #[arg(long)]
        b: f64,
        #[arg(long, default_value_t = 0.0)]
        phi: f64,
        #[arg(long)]
        mu: String,
        #[command(flatten)]
        out: OutOpts,
    },
    /// Self-convergence fixture over a resolution sequence.
    Refine {
        #[command(flatten)]
        domain: DomainOpts,
        /// area, eigenvalue:K, or entry:ROW,COL (entry needs --mu).
        #[arg(long)]
        quantity: String,
        #[arg(long, allow_hyphen_values = true)]
        mu: Option<String>,
        /// Comma-separated node counts, e.g. 512,1024,2048.
        #[arg(long = "n-list")]
        n_list: String,
        /// Target tolerance of the fixture.
        #[arg(long, default_value_t = 1e-10)]
        target: f64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug)]
enum CliError {
    Config(String),
    Numeric(String),
    StrictWarning,
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::StrictWarning => 4,
        }
    }
}

macro_rules! numeric_from {
    ($($ty:ty),* $(,)?) => {
        $(impl From<$ty> for CliError {
            fn from(e: $ty) -> Self {
                CliError::Numeric(e.to_string())
            }
        })*
    };
}

numeric_from!(
    poltensor::geometry::GeometryError,
    poltensor::layerops::OperatorError,
    poltensor::spectral::SpectralError,
    poltensor::tensor::TensorError,
    poltensor::rational::FitError,
    poltensor::shape::ShapeError,
    poltensor::analysis::AnalysisError,
    poltensor::oracle::OracleError,
);

impl From<poltensor::config::ConfigError> for CliError {
    fn from(e: poltensor::config::ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            match &err {
                CliError::Config(msg) => eprintln!("config error: {msg}"),
                CliError::Numeric(msg) => eprintln!("numerical failure: {msg}"),
                CliError::StrictWarning => {
                    eprintln!("condition warning raised under --strict: contrast is close to a pole")
                }
            }
            ExitCode::from(err.code())
        }
    }
}

fn load_domain(opts: &DomainOpts) -> Result<DomainConfig, CliError> {
    let text = fs::read_to_string(&opts.domain)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", opts.domain.display())))?;
    let mut cfg = parse_domain_config(&text)?;
    if let Some(n) = opts.n {
        if n < 16 || !n.is_multiple_of(2) {
            return Err(CliError::Config(format!("--n must be even and >= 16, got {n}")));
        }
        cfg.n = n;
    }
    Ok(cfg)
}

fn parse_complex(text: &str) -> Result<Complex64, CliError> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let err = || CliError::Config(format!("cannot parse contrast {text:?} (examples: 1.5, -2, 1+0.5i)"));
    if let Ok(re) = s.parse::<f64>() {
        return Ok(Complex64::new(re, 0.0));
    }
    let body = s.strip_suffix(['i', 'j']).ok_or_else(err)?;
    // Split at the sign of the imaginary part (skipping a leading sign and
    // exponent signs).
    let bytes = body.as_bytes();
    let mut split = None;
    for i in (1..bytes.len()).rev() {
        let c = bytes[i] as char;
        if (c == '+' || c == '-') && !matches!(bytes[i - 1] as char, 'e' | 'E') {
            split = Some(i);
            break;
        }
    }
    match split {
        Some(i) => {
            let re: f64 = body[..i].parse().map_err(|_| err())?;
            let im_text = &body[i..];
            let im: f64 = if im_text == "+" {
                1.0
            } else if im_text == "-" {
                -1.0
            } else {
                im_text.parse().map_err(|_| err())?
            };
            Ok(Complex64::new(re, im))
        }
        None => {
            let im: f64 = if body.is_empty() { 1.0 } else { body.parse().map_err(|_| err())? };
            Ok(Complex64::new(0.0, im))
        }
    }
}

fn parse_grid(text: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::Config(format!(
            "grid {text:?} must have the form start:stop:count"
        )));
    }
    let start: f64 = parts[0]
        .parse()
        .map_err(|_| CliError::Config(format!("bad grid start {:?}", parts[0])))?;
    let stop: f64 = parts[1]
        .parse()
        .map_err(|_| CliError::Config(format!("bad grid stop {:?}", parts[1])))?;
    let count: usize = parts[2]
        .parse()
        .map_err(|_| CliError::Config(format!("bad grid count {:?}", parts[2])))?;
    if count == 0 {
        return Err(CliError::Config("grid count must be positive".into()));
    }
    if count == 1 {
        return Ok(vec![start]);
    }
    Ok((0..count)
        .map(|i| start + (stop - start) * i as f64 / (count - 1) as f64)
        .collect())
}

fn parse_method(text: &str) -> Result<EvalMethod, CliError> {
    match text {
        "direct" => Ok(EvalMethod::Direct),
        "dual" => Ok(EvalMethod::Dual),
        "spectral" => Ok(EvalMethod::Spectral),
        other => Err(CliError::Config(format!(
            "unknown method {other:?} (expected direct, dual, or spectral)"
        ))),
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| CliError::Numeric(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn base_metadata(n: usize, guard: f64) -> Vec<(&'static str, String)> {
    vec![
        ("version", poltensor::VERSION.to_string()),
        ("n", n.to_string()),
        ("guard", format!("{guard:e}")),
    ]
}

fn tensor_columns() -> Vec<&'static str> {
    vec![
        "mu_re", "mu_im", "M11_re", "M11_im", "M12_re", "M12_im", "M22_re", "M22_im", "method",
        "n", "condition_warning",
    ]
}

fn tensor_row(t: &PolTensor, n: usize) -> Vec<Cell> {
    vec![
        Cell::Float(t.mu.re),
        Cell::Float(t.mu.im),
        Cell::Float(t.m[(0, 0)].re),
        Cell::Float(t.m[(0, 0)].im),
        Cell::Float(t.m[(0, 1)].re),
        Cell::Float(t.m[(0, 1)].im),
        Cell::Float(t.m[(1, 1)].re),
        Cell::Float(t.m[(1, 1)].im),
        Cell::Text(t.method.as_str().to_string()),
        Cell::Int(n as i64),
        Cell::Bool(t.condition_warning),
    ]
}

/// Evaluate M at several contrasts by one method, sharing assembled state.
fn evaluate(
    cfg: &DomainConfig,
    mus: &[Complex64],
    method: EvalMethod,
    guard: f64,
) -> Result<Vec<PolTensor>, CliError> {
    match method {
        EvalMethod::Direct | EvalMethod::Dual => {
            let db = Arc::new(discretize(&cfg.curve, cfg.n)?);
            let k = assemble_k(&db);
            mus.iter()
                .map(|&mu| {
                    let t = match method {
                        EvalMethod::Direct => pol_direct_guarded(&k, mu, guard)?,
                        _ => pol_dual_guarded(&k, mu, guard)?,
                    };
                    Ok(t)
                })
                .collect()
        }
        EvalMethod::Spectral => {
            let pipeline = spectral_pipeline(&cfg.curve, cfg.n)?;
            mus.iter()
                .map(|&mu| Ok(pol_spectral_guarded(&pipeline.data, mu, guard)?))
                .collect()
        }
    }
}

fn strict_gate(strict: bool, tensors: &[PolTensor]) -> Result<(), CliError> {
    if strict && tensors.iter().any(|t| t.condition_warning) {
        return Err(CliError::StrictWarning);
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Compute { domain, mu, method, guard, out } => {
            let cfg = load_domain(domain)?;
            let mu = parse_complex(mu)?;
            let method = parse_method(method)?;
            let tensors = evaluate(&cfg, &[mu], method, *guard)?;
            strict_gate(cli.strict, &tensors)?;
            let table = Table {
                columns: tensor_columns(),
                rows: tensors.iter().map(|t| tensor_row(t, cfg.n)).collect(),
                metadata: base_metadata(cfg.n, *guard),
                plot: Some((0, 2)),
            };
            emit(&out.output, &table.render(out.format))
        }
        Command::Sweep { domain, mu_grid, method, guard, out } => {
            let cfg = load_domain(domain)?;
            let grid = parse_grid(mu_grid)?;
            let mus: Vec<Complex64> = grid.iter().map(|&x| Complex64::new(x, 0.0)).collect();
            let method = parse_method(method)?;
            let tensors = evaluate(&cfg, &mus, method, *guard)?;
            strict_gate(cli.strict, &tensors)?;
            let table = Table {
                columns: tensor_columns(),
                rows: tensors.iter().map(|t| tensor_row(t, cfg.n)).collect(),
                metadata: base_metadata(cfg.n, *guard),
                plot: Some((0, 2)),
            };
            emit(&out.output, &table.render(out.format))
        }
        Command::Spectrum { domain, out } => {
            let cfg = load_domain(domain)?;
            let pipeline = spectral_pipeline(&cfg.curve, cfg.n)?;
            let table = Table {
                columns: vec!["index", "eigenvalue"],
                rows: pipeline
                    .eig
                    .eigenvalues
                    .iter()
                    .enumerate()
                    .map(|(i, &l)| vec![Cell::Int(i as i64), Cell::Float(l)])
                    .collect(),
                metadata: base_metadata(cfg.n, 0.0),
                plot: Some((0, 1)),
            };
            emit(&out.output, &table.render(out.format))
        }
        Command::Measures { domain, format, coefficients, output } => {
            let cfg = load_domain(domain)?;
            let pipeline = spectral_pipeline(&cfg.curve, cfg.n)?;
            let mut metadata = base_metadata(cfg.n, 0.0);
            metadata.push(("area", fmt_float(pipeline.data.area)));
            metadata.push(("cluster_tol", fmt_float(pipeline.data.cluster_tol)));
            let table = if *coefficients {
                Table {
                    columns: vec!["lambda", "r_plus_sq", "r_minus_sq", "c", "c_defined"],
                    rows: smooth_coefficients(&pipeline.data)
                        .iter()
                        .map(|c| {
                            vec![
                                Cell::Float(c.lambda),
                                Cell::Float(c.r_plus_sq),
                                Cell::Float(c.r_minus_sq),
                                Cell::Float(c.c),
                                Cell::Bool(c.c_defined),
                            ]
                        })
                        .collect(),
                    metadata,
                    plot: Some((0, 1)),
                }
            } else {
                Table {
                    columns: vec!["lambda", "alpha", "beta", "gamma"],
                    rows: pipeline
                        .data
                        .entries
                        .iter()
                        .map(|e| {
                            vec![
                                Cell::Float(e.lambda),
                                Cell::Float(e.alpha),
                                Cell::Float(e.beta),
                                Cell::Float(e.gamma),
                            ]
                        })
                        .collect(),
                    metadata,
                    plot: Some((0, 1)),
                }
            };
            let text = match format.as_str() {
                "record" => {
                    if *coefficients {
                        return Err(CliError::Config(
                            "--coefficients needs --format csv or json".into(),
                        ));
                    }
                    pipeline.data.to_record()
                }
                "csv" => table.render(OutputFormat::Csv),
                "json" => table.render(OutputFormat::Json),
                other => {
                    return Err(CliError::Config(format!(
                        "unknown measures format {other:?} (expected record, csv, or json)"
                    )))
                }
            };
            emit(output, &text)
        }
        Command::Fit { samples, max_poles, out } => {
            let data = read_samples(samples)?;
            let model = fit_rational(&data, *max_poles)?;
            emit(&out.output, &render_model(&model, out.format))
        }
        Command::RecoverEllipse { samples, max_poles, tol, out } => {
            let data = read_samples(samples)?;
            let model = fit_rational(&data, *max_poles)?;
            let cert = detect_two_pole(&model, *tol);
            let text = match cert {
                None => {
                    let mut table = ellipse_table(None);
                    table.metadata.push(("fit_residual", fmt_float(model.fit_residual)));
                    table.render(out.format)
                }
                Some(cert) => {
                    let params = recover_ellipse(&cert, 0.0)?;
                    let mut table = ellipse_table(Some(&params));
                    table.metadata.push(("lambda", fmt_float(cert.lambda)));
                    table.metadata.push(("constraint_defect", fmt_float(cert.constraint_defect)));
                    table.render(out.format)
                }
            };
            emit(&out.output, &text)
        }
        Command::EquivalentEllipse { domain, n, tensor, mu, out } => {
            let (m, area_note): (Matrix2<f64>, Option<String>) = match (domain, tensor) {
                (Some(path), None) => {
                    let cfg = load_domain(&DomainOpts { domain: path.clone(), n: *n })?;
                    let db = Arc::new(discretize(&cfg.curve, cfg.n)?);
                    let k = assemble_k(&db);
                    let t = pol_direct_guarded(&k, Complex64::new(*mu, 0.0), DEFAULT_POLE_GUARD)?;
                    strict_gate(cli.strict, std::slice::from_ref(&t))?;
                    (t.real_matrix()?, Some(format!("{}", poltensor::geometry::area(&db))))
                }
                (None, Some(text)) => {
                    let vals: Result<Vec<f64>, _> =
                        text.split(',').map(|s| s.trim().parse::<f64>()).collect();
                    let vals = vals.map_err(|_| {
                        CliError::Config(format!("cannot parse tensor {text:?} as m11,m12,m22"))
                    })?;
                    if vals.len() != 3 {
                        return Err(CliError::Config(format!(
                            "tensor {text:?} must have three entries m11,m12,m22"
                        )));
                    }
                    (Matrix2::new(vals[0], vals[1], vals[1], vals[2]), None)
                }
                _ => {
                    return Err(CliError::Config(
                        "provide exactly one of --domain or --tensor".into(),
                    ))
                }
            };
            let params = equivalent_ellipse(&m, *mu)?;
            let mut table = ellipse_table(Some(&params));
            table.metadata.push(("mu", fmt_float(*mu)));
            if let Some(area) = area_note {
                table.metadata.push(("area", area));
            }
            emit(&out.output, &table.render(out.format))
        }
        Command::HsCheck { domain, mu_grid, guard, out } => {
            let cfg = load_domain(domain)?;
            let grid = parse_grid(mu_grid)?;
            let db = Arc::new(discretize(&cfg.curve, cfg.n)?);
            let k = assemble_k(&db);
            let area = poltensor::geometry::area(&db);
            let mut rows = Vec::new();
            let mut tensors = Vec::new();
            for &mu in &grid {
                // The direct solve is undefined at the trivial eigenvalue
                // -1/2; the dual representation extends there.
                let z = Complex64::new(mu, 0.0);
                let t = if (mu + 0.5).abs() < *guard {
                    pol_dual_guarded(&k, z, *guard)?
                } else {
                    pol_direct_guarded(&k, z, *guard)?
                };
                let report = hs_check(&t.real_matrix()?, mu, area)?;
                rows.push(vec![
                    Cell::Float(report.mu),
                    Cell::Float(report.trace_m),
                    Cell::Float(report.trace_m_inv),
                    Cell::Float(report.lower1),
                    Cell::Float(report.upper1),
                    Cell::Float(report.bound2),
                    Cell::Float(report.margin_lower1),
                    Cell::Float(report.margin_upper1),
                    Cell::Float(report.margin_bound2),
                    Cell::Bool(report.lower1_equality),
                    Cell::Bool(report.bound2_equality),
                ]);
                tensors.push(t);
            }
            strict_gate(cli.strict, &tensors)?;
            let mut metadata = base_metadata(cfg.n, *guard);
            metadata.push(("area", fmt_float(area)));
            let table = Table {
                columns: vec![
                    "mu",
                    "trace_M",
                    "trace_Minv",
                    "lower1",
                    "upper1",
                    "bound2",
                    "margin_lower1",
                    "margin_upper1",
                    "margin_bound2",
                    "lower1_equality",
                    "bound2_equality",
                ],
                rows,
                metadata,
                plot: Some((0, 1)),
            };
            emit(&out.output, &table.render(out.format))
        }
        Command::Oracle(cmd) => run_oracle(cmd),
    }
}

fn run_oracle(cmd: &OracleCommand) -> Result<(), CliError> {
    match cmd {
        OracleCommand::CircleSpectra { radius, n, out } => {
            let (s, k) = oracle::circle_spectra(*radius, *n);
            let table = Table {
                columns: vec!["index", "single_layer", "double_layer"],
                rows: s
                    .iter()
                    .zip(&k)
                    .enumerate()
                    .map(|(i, (sv, kv))| {
                        vec![Cell::Int(i as i64), Cell::Float(*sv), Cell::Float(*kv)]
                    })
                    .collect(),
                metadata: vec![
                    ("version", poltensor::VERSION.to_string()),
                    ("radius", format!("{radius}")),
                    ("n", n.to_string()),
                ],
                plot: Some((0, 1)),
            };
            emit(&out.output, &table.render(out.format))
        }
        OracleCommand::EllipseTensor { a, b, phi, mu, out } => {
            let mu = parse_complex(mu)?;
            let m = oracle::ellipse_tensor(*a, *b, *phi, mu);
            let row = vec![
                Cell::Float(mu.re),
                Cell::Float(mu.im),
                Cell::Float(m[(0, 0)].re),
                Cell::Float(m[(0, 0)].im),
                Cell::Float(m[(0, 1)].re),
                Cell::Float(m[(0, 1)].im),
                Cell::Float(m[(1, 1)].re),
                Cell::Float(m[(1, 1)].im),
                Cell::Text("oracle".to_string()),
                Cell::Int(0),
                Cell::Bool(false),
            ];
            let table = Table {
                columns: tensor_columns(),
                rows: vec![row],
                metadata: vec![
                    ("version", poltensor::VERSION.to_string()),
                    ("a", format!("{a}")),
                    ("b", format!("{b}")),
                    ("phi", format!("{phi}")),
                ],
                plot: Some((0, 2)),
            };
            emit(&out.output, &table.render(out.format))
        }
        OracleCommand::Refine { domain, quantity, mu, n_list, target, output } => {
            let cfg = load_domain(domain)?;
            let ns: Result<Vec<usize>, _> =
                n_list.split(',').map(|s| s.trim().parse::<usize>()).collect();
            let ns = ns.map_err(|_| {
                CliError::Config(format!("cannot parse --n-list {n_list:?} as node counts"))
            })?;
            let q = parse_quantity(quantity, mu)?;
            let result = oracle::oracle_refine(&cfg.curve, q, &ns, *target)?;
            let fixture = Fixture {
                name: quantity.replace([':', ','], "_"),
                inputs: format!("domain={} n_list={}", domain.domain.display(), n_list),
                value: result.value,
                tolerance: *target,
                provenance: format!(
                    "self-convergence over n = {:?}; last delta {:.3e}",
                    ns, result.error_bar
                ),
            };
            emit(output, &fixture.to_text())
        }
    }
}

fn parse_quantity(text: &str, mu: &Option<String>) -> Result<RefineQuantity, CliError> {
    if text == "area" {
        return Ok(RefineQuantity::Area);
    }
    if let Some(rest) = text.strip_prefix("eigenvalue:") {
        let k: usize = rest
            .parse()
            .map_err(|_| CliError::Config(format!("bad eigenvalue index {rest:?}")))?;
        return Ok(RefineQuantity::PositiveEigenvalue(k));
    }
    if let Some(rest) = text.strip_prefix("entry:") {
        let parts: Vec<&str> = rest.split(',').collect();
        if parts.len() != 2 {
            return Err(CliError::Config(format!("bad entry {rest:?}, expected ROW,COL")));
        }
        let row: usize =
            parts[0].parse().map_err(|_| CliError::Config(format!("bad row {:?}", parts[0])))?;
        let col: usize =
            parts[1].parse().map_err(|_| CliError::Config(format!("bad col {:?}", parts[1])))?;
        if row > 1 || col > 1 {
            return Err(CliError::Config("entry indices must be 0 or 1".into()));
        }
        let mu = mu
            .as_ref()
            .ok_or_else(|| CliError::Config("entry quantities need --mu".into()))?;
        return Ok(RefineQuantity::TensorEntry { mu: parse_complex(mu)?, row, col });
    }
    Err(CliError::Config(format!(
        "unknown quantity {text:?} (expected area, eigenvalue:K, or entry:ROW,COL)"
    )))
}

fn ellipse_table(params: Option<&EllipseParams>) -> Table {
    let rows = match params {
        Some(p) => vec![vec![
            Cell::Bool(true),
            Cell::Float(p.a),
            Cell::Float(p.b),
            Cell::Float(p.phi),
            Cell::Bool(p.angle_defined),
        ]],
        None => vec![vec![
            Cell::Bool(false),
            Cell::Text(String::new()),
            Cell::Text(String::new()),
            Cell::Text(String::new()),
            Cell::Bool(false),
        ]],
    };
    Table {
        columns: vec!["detected", "a", "b", "phi", "angle_defined"],
        rows,
        metadata: vec![("version", poltensor::VERSION.to_string())],
        plot: Some((1, 2)),
    }
}

fn render_model(model: &RationalModel, format: OutputFormat) -> String {
    let mut metadata = vec![
        ("version", poltensor::VERSION.to_string()),
        ("poles", model.poles.len().to_string()),
        ("fit_residual", fmt_float(model.fit_residual)),
    ];
    metadata.push(("mass_11", fmt_float(model.residues.iter().map(|r| r[(0, 0)]).sum())));
    metadata.push(("mass_22", fmt_float(model.residues.iter().map(|r| r[(1, 1)]).sum())));
    let table = Table {
        columns: vec!["pole", "res11", "res12", "res22"],
        rows: model
            .poles
            .iter()
            .zip(&model.residues)
            .map(|(p, r)| {
                vec![
                    Cell::Float(*p),
                    Cell::Float(r[(0, 0)]),
                    Cell::Float(r[(0, 1)]),
                    Cell::Float(r[(1, 1)]),
                ]
            })
            .collect(),
        metadata,
        plot: Some((0, 1)),
    };
    table.render(format)
}

/// Read tensor samples from a CSV in the sweep schema (first eight columns:
/// mu_re, mu_im, M11_re, M11_im, M12_re, M12_im, M22_re, M22_im).
fn read_samples(path: &Path) -> Result<Vec<(Complex64, Matrix2<Complex64>)>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut samples = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        // Comments and (possibly repeated, for concatenated files) headers.
        if line.is_empty() || line.starts_with('#') || line.starts_with("mu_re") {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() < 8 {
            return Err(CliError::Config(format!(
                "{}:{}: expected at least 8 CSV fields, got {}",
                path.display(),
                idx + 1,
                fields.len()
            )));
        }
        let mut vals = [0.0; 8];
        for (slot, field) in vals.iter_mut().zip(&fields) {
            *slot = field.trim().parse().map_err(|_| {
                CliError::Config(format!(
                    "{}:{}: cannot parse {field:?} as a number",
                    path.display(),
                    idx + 1
                ))
            })?;
        }
        let mu = Complex64::new(vals[0], vals[1]);
        let m11 = Complex64::new(vals[2], vals[3]);
        let m12 = Complex64::new(vals[4], vals[5]);
        let m22 = Complex64::new(vals[6], vals[7]);
        samples.push((mu, Matrix2::new(m11, m12, m12, m22)));
    }
    if samples.is_empty() {
        return Err(CliError::Config(format!("{} contains no samples", path.display())));
    }
    Ok(samples)
}
