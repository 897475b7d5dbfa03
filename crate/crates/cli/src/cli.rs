//! Command-line front end.

use std::path::{Path, PathBuf};
use std::time::Instant;

use acn_core::backend::{curvature, GeometryBackend};
use acn_core::connections::{
    canonical_connection, check_connection_flags, f45_family, natural_family, q_four_param, q_ten_param, torsion,
    torsion_formula, yano_connection, ClassGuard, FourParamsP, FourParamsS, LambdaMu, TenParams,
};
use acn_core::curvature::{check_curvature_like, deformed_curvature};
use acn_core::fundamental::fundamental_tensor;
use acn_core::residual::Residual;
use acn_core::scalar::parse_scalar;
use acn_core::{Backend, FrameTensor, Scalar};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::engine::{default_backend, load};
use crate::registry;
use crate::report::{Recorder, Report};
use crate::spec::{parse_spec, ManifoldSpec};
use crate::suites::{self, format_params, Options, Suite};
use crate::sweep::{self, Family, Points};
use crate::with_backend;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "acn-lab",
    version,
    about = "Verification lab for linear connections on almost contact Norden manifolds"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Exact rational or floating-point arithmetic; chart specs are float only.
    #[arg(long, global = true, value_enum)]
    pub backend: Option<BackendArg>,
    /// Pass threshold for float residuals.
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Write the JSON report to this path (`-` for stdout).
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,
    /// Include wall-clock time in the report.
    #[arg(long, global = true)]
    pub timings: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BackendArg {
    Exact,
    Float,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ConnectFamily {
    Ten,
    Four,
    Natural,
    Canonical,
    Yano,
    F45,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the structure axioms and the Jacobi identity.
    Validate(SpecArg),
    /// Print F, theta, theta* and N.
    Fundamental(SpecArg),
    /// Class membership flags.
    Classify(SpecArg),
    /// Build a connection from one of the families.
    Connect {
        #[command(flatten)]
        spec: SpecArg,
        #[arg(long, value_enum)]
        family: ConnectFamily,
        /// Comma-separated parameters, e.g. `1/2,0,-1,3`.
        #[arg(long, allow_hyphen_values = true)]
        params: Option<String>,
    },
    /// Torsion of the four-parameter family against its closed form.
    Torsion {
        #[command(flatten)]
        spec: SpecArg,
        /// `s1,s2,s3,s4`; defaults to the symmetric connection.
        #[arg(long, allow_hyphen_values = true)]
        params: Option<String>,
    },
    /// Curvature of the two-parameter family against its closed form.
    Curvature {
        #[command(flatten)]
        spec: SpecArg,
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        lambda: String,
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        mu: String,
    },
    /// Run verification suites.
    Verify {
        #[command(flatten)]
        spec: SpecArg,
        /// Comma-separated suite names or `all`.
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = Options::default().samples)]
        samples: usize,
        #[arg(long, default_value_t = Options::default().curvature_samples)]
        curvature_samples: usize,
    },
    /// Sweep a family over random or grid parameters.
    Sweep {
        #[command(flatten)]
        spec: SpecArg,
        /// `ten`, `four` or `lambda-mu`.
        #[arg(long)]
        family: String,
        #[arg(long, conflicts_with = "grid")]
        count: Option<usize>,
        /// Comma-separated values; the grid is their Cartesian power.
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<String>,
    },
    /// List the bundled examples.
    Examples,
}

#[derive(Debug, Args)]
pub struct SpecArg {
    /// Spec file path or bundled example name (see `examples`).
    pub spec: String,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Validate(_) => "validate",
            Command::Fundamental(_) => "fundamental",
            Command::Classify(_) => "classify",
            Command::Connect { .. } => "connect",
            Command::Torsion { .. } => "torsion",
            Command::Curvature { .. } => "curvature",
            Command::Verify { .. } => "verify",
            Command::Sweep { .. } => "sweep",
            Command::Examples => "examples",
        }
    }

    fn spec(&self) -> Option<&str> {
        match self {
            Command::Validate(s) | Command::Fundamental(s) | Command::Classify(s) => Some(&s.spec),
            Command::Connect { spec, .. }
            | Command::Torsion { spec, .. }
            | Command::Curvature { spec, .. }
            | Command::Verify { spec, .. }
            | Command::Sweep { spec, .. } => Some(&spec.spec),
            Command::Examples => None,
        }
    }
}

/// A bundled example name or a path to a spec file.
pub fn resolve_spec(arg: &str) -> Result<ManifoldSpec, String> {
    if let Some(example) = registry::find(arg) {
        return Ok(example.manifold());
    }
    let path = Path::new(arg);
    if !path.exists() && !arg.contains(['/', '.']) {
        let names: Vec<_> = registry::EXAMPLES.iter().map(|e| e.name).collect();
        return Err(format!("`{arg}` is neither a file nor a bundled example ({})", names.join(", ")));
    }
    parse_spec(path).map_err(|e| format!("{arg}: {e}"))
}

/// Runs a parsed command line; returns the report and the process exit code.
pub fn execute(cli: &Cli) -> Result<Option<Report>, String> {
    let command = &cli.command;
    let Some(spec_arg) = command.spec() else {
        for e in &registry::EXAMPLES {
            println!("{:<14} {}", e.name, e.summary);
        }
        return Ok(None);
    };
    let spec = resolve_spec(spec_arg)?;
    let backend = match cli.global.backend {
        Some(BackendArg::Exact) => Backend::Exact,
        Some(BackendArg::Float) => Backend::Float,
        None => default_backend(&spec),
    };
    if let Some(t) = cli.global.tolerance {
        if !(t.is_finite() && t >= 0.0) {
            return Err(format!("--tolerance must be a finite nonnegative number, got {t}"));
        }
    }
    let loaded = load(&spec, backend).map_err(|e| format!("{spec_arg}: {e}"))?;
    let tolerance = loaded.tolerance(cli.global.tolerance);
    let label = match &loaded {
        crate::engine::Loaded::Exact(_) => "exact",
        crate::engine::Loaded::Float(_) => "float",
        crate::engine::Loaded::Chart(_) => "chart",
    };
    let mut rec = Recorder::new(label, tolerance);
    let mut rng = ChaCha8Rng::seed_from_u64(cli.global.seed);
    let start = Instant::now();
    with_backend!(&loaded, b => dispatch(b, command, &mut rng, &mut rec))?;
    let elapsed = start.elapsed();
    let mut report = Report::new(command.name(), &spec.name, label, cli.global.seed, rec.records);
    if cli.global.timings {
        report.elapsed_ms = Some(elapsed.as_secs_f64() * 1e3);
    }
    Ok(Some(report))
}

/// Parses, runs and prints; the returned value is the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_PASS };
            let _ = e.print();
            return code;
        }
    };
    let report = match execute(&cli) {
        Ok(Some(r)) => r,
        Ok(None) => return EXIT_PASS,
        Err(message) => {
            eprintln!("error: {message}");
            return EXIT_INPUT;
        }
    };
    match &cli.global.report {
        Some(p) if p.as_os_str() == "-" => print!("{}", report.to_json()),
        Some(p) => {
            print!("{}", report.table());
            if let Err(e) = std::fs::write(p, report.to_json()) {
                eprintln!("error: cannot write {}: {e}", p.display());
                return EXIT_INPUT;
            }
        }
        None => print!("{}", report.table()),
    }
    if report.passed() {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}

fn parse_list<S: Scalar>(text: &str, expected: usize, what: &str) -> Result<Vec<S>, String> {
    let values = text
        .split(',')
        .map(|v| parse_scalar::<S>(v.trim()).map_err(|e| format!("{what}: {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    if values.len() != expected {
        return Err(format!("{what}: expected {expected} values, got {}", values.len()));
    }
    Ok(values)
}

fn array<S: Clone, const N: usize>(v: &[S]) -> [S; N] {
    std::array::from_fn(|i| v[i].clone())
}

fn dispatch<S: Scalar, B: GeometryBackend<S>>(
    b: &B,
    command: &Command,
    rng: &mut ChaCha8Rng,
    rec: &mut Recorder,
) -> Result<(), String> {
    let analysis = match suites::analyse(b, rec.tol()) {
        Ok(a) => a,
        Err(e) => {
            rec.failed("analysis", "Levi-Civita connection, F and N at the point", e.to_string());
            return Ok(());
        }
    };
    let a = &analysis;
    match command {
        Command::Validate(_) => suites::structure(b, a, rec),
        Command::Fundamental(_) => fundamental(a, rec),
        Command::Classify(_) => suites::run(b, a, &[Suite::Classify], Options::default(), rng, rec),
        Command::Connect { family, params, .. } => connect(b, a, *family, params.as_deref(), rec)?,
        Command::Torsion { params, .. } => {
            let sp = match params {
                Some(p) => FourParamsS::new(array(&parse_list::<S>(p, 4, "--params")?)),
                None => FourParamsS::yano(),
            };
            torsion_command(b, a, &sp, rec);
        }
        Command::Curvature { lambda, mu, .. } => {
            let l = parse_scalar::<S>(lambda).map_err(|e| format!("--lambda: {e}"))?;
            let m = parse_scalar::<S>(mu).map_err(|e| format!("--mu: {e}"))?;
            curvature_command(b, a, &LambdaMu::new(l, m), rec);
        }
        Command::Verify { suite, samples, curvature_samples, .. } => {
            let list = suites::parse_suites(suite)?;
            let opts = Options { samples: *samples, curvature_samples: *curvature_samples };
            suites::run(b, a, &list, opts, rng, rec);
        }
        Command::Sweep { family, count, grid, .. } => {
            let family: Family = family.parse()?;
            let points = match (count, grid) {
                (_, Some(g)) => {
                    let values = g
                        .split(',')
                        .map(|v| parse_scalar::<S>(v.trim()).map_err(|e| format!("--grid: {e}")))
                        .collect::<Result<Vec<_>, _>>()?;
                    Points::Grid(values)
                }
                (Some(n), None) => Points::Random(*n),
                (None, None) => Points::Random(20),
            };
            sweep::run(b, a, family, &points, rng, rec)?;
        }
        Command::Examples => {}
    }
    Ok(())
}

fn nonzero_components<S: Scalar>(rec: &mut Recorder, prefix: &str, anchor: &str, t: &FrameTensor<S>) {
    t.for_each(|idx, v| {
        if !v.is_zero() && Residual::of_scalar(v).max_abs > rec.tolerance.unwrap_or(0.0) {
            let label: Vec<String> = idx.iter().map(ToString::to_string).collect();
            rec.info(&format!("{prefix}[{}]", label.join(",")), anchor, None, v.to_string());
        }
    });
}

fn fundamental<S: Scalar>(a: &suites::Analysis<S>, rec: &mut Recorder) {
    rec.zero(
        "fundamental.f-symmetries",
        "F(x,y,z) = F(x,z,y); F(x,phi y,phi z) = F(x,y,z) - F(x,xi,z) eta(y) - F(x,y,xi) eta(z)",
        a.fd.symmetry_residual,
    );
    rec.zero("fundamental.n-duality", "N from nabla phi equals N from brackets", a.nd.duality_residual());
    nonzero_components(rec, "F", "F(x,y,z) = g((nabla_x phi) y, z)", &a.fd.f);
    nonzero_components(rec, "theta", "theta(z) = g^ij F(e_i, e_j, z)", &a.fd.theta);
    nonzero_components(rec, "theta*", "theta*(z) = g^ij F(e_i, phi e_j, z)", &a.fd.theta_star);
    nonzero_components(rec, "omega", "omega(z) = F(xi, xi, z)", &a.fd.omega);
    nonzero_components(rec, "N", "Nijenhuis tensor of phi plus d eta (x) xi", &a.nd.n);
    nonzero_components(rec, "N~", "associated Nijenhuis tensor", &a.nd.n_tilde);
}

fn connect<S: Scalar, B: GeometryBackend<S>>(
    b: &B,
    a: &suites::Analysis<S>,
    family: ConnectFamily,
    params: Option<&str>,
    rec: &mut Recorder,
) -> Result<(), String> {
    let s = b.structure();
    let guard = ClassGuard::Require(&a.cr);
    let need = |n: usize| -> Result<Vec<S>, String> {
        match params {
            Some(p) => parse_list::<S>(p, n, "--params"),
            None if n == 0 => Ok(Vec::new()),
            None => Err(format!("--params needs {n} values for this family")),
        }
    };
    if matches!(family, ConnectFamily::Canonical | ConnectFamily::Yano) && params.is_some() {
        return Err("this family takes no --params".into());
    }
    let (label, conn) = match family {
        ConnectFamily::Ten => {
            let t = need(10)?;
            (
                format!("t={}", format_params(&t)),
                q_ten_param(s, &a.fd, &TenParams::new(array(&t))).and_then(|q| q.apply(&a.lc)),
            )
        }
        ConnectFamily::Four => {
            let v = need(4)?;
            let sp = FourParamsS::new(array(&v));
            (format!("s={}", format_params(&v)), q_four_param(s, &a.fd, &sp, guard).and_then(|q| q.apply(&a.lc)))
        }
        ConnectFamily::Natural => {
            let v = need(4)?;
            let p = FourParamsP::new(array(&v));
            (format!("p={}", format_params(&v)), natural_family(b, &a.fd, &a.nd, &p).and_then(|q| q.apply(&a.lc)))
        }
        ConnectFamily::Canonical => ("canonical".to_string(), canonical_connection(b, &a.lc)),
        ConnectFamily::Yano => ("symmetric almost phi".to_string(), yano_connection(b, &a.lc, guard)),
        ConnectFamily::F45 => {
            let v = need(2)?;
            let lm = LambdaMu::new(v[0].clone(), v[1].clone());
            (format!("(lambda, mu)={}", format_params(&v)), f45_family(s, &a.lc, &a.fd, &lm, guard))
        }
    };
    let conn = match conn {
        Ok(c) => c,
        Err(e) => {
            rec.failed("connect.build", "construct the connection", e.to_string());
            return Ok(());
        }
    };
    rec.info("connect.parameters", "family parameters", None, label);
    match check_connection_flags(b, &conn) {
        Ok(f) => {
            for (name, r) in [("phi", f.phi), ("xi", f.xi), ("eta", f.eta), ("g", f.g)] {
                let value = if r.vanishes(rec.tol()) { "parallel" } else { "not parallel" };
                rec.info(&format!("connect.nabla-{name}"), &format!("nabla' {name} = 0"), Some(r.max_abs), value);
            }
        }
        Err(e) => rec.failed("connect.flags", "parallel structure tensors", e.to_string()),
    }
    match torsion(&conn, b.brackets(), s.g()) {
        Ok(t) => {
            let r = Residual::of_tensor(&t);
            rec.info(
                "connect.torsion",
                "T'(x,y,z) = g(nabla'_x y - nabla'_y x - [x,y], z)",
                Some(r.max_abs),
                if r.vanishes(rec.tol()) { "zero" } else { "nonzero" },
            );
        }
        Err(e) => rec.failed("connect.torsion", "torsion", e.to_string()),
    }
    nonzero_components(rec, "Gamma", "nabla'_{e_i} e_j = Gamma_ij^k e_k", conn.gamma());
    Ok(())
}

fn torsion_command<S: Scalar, B: GeometryBackend<S>>(
    b: &B,
    a: &suites::Analysis<S>,
    sp: &FourParamsS<S>,
    rec: &mut Recorder,
) {
    let s = b.structure();
    let anchor = "T = s1 A + (1 - 4 s2)/2 B - s4 C - (1 - s2 + s3) D";
    rec.info("torsion.parameters", "four parameters", None, format!("s={}", format_params(&sp.s)));
    let direct = q_four_param(s, &a.fd, sp, ClassGuard::Require(&a.cr))
        .and_then(|q| q.apply(&a.lc))
        .and_then(|c| torsion(&c, b.brackets(), s.g()));
    let direct = match direct {
        Ok(t) => t,
        Err(e) => return rec.failed("torsion.formula", anchor, e.to_string()),
    };
    rec.zero_or_error(
        "torsion.formula",
        anchor,
        torsion_formula(s, &a.fd, sp).map(|f| Residual::of_difference(&f, &direct)),
    );
    nonzero_components(rec, "T", "T(e_i, e_j, e_k)", &direct);
}

fn curvature_command<S: Scalar, B: GeometryBackend<S>>(
    b: &B,
    a: &suites::Analysis<S>,
    lm: &LambdaMu<S>,
    rec: &mut Recorder,
) {
    rec.info("curvature.parameters", "(lambda, mu)", None, format_params(&[lm.lambda.clone(), lm.mu.clone()]));
    let r = match curvature(b, |b| b.levi_civita()) {
        Ok(r) => r,
        Err(e) => return rec.failed("curvature.levi-civita", "curvature of the Levi-Civita connection", e.to_string()),
    };
    rec.zero_or_error(
        "curvature.levi-civita-curvature-like",
        "R has both antisymmetries and satisfies the first Bianchi identity",
        check_curvature_like(&r).map(|c| c.worst()),
    );
    let cr = a.cr.clone();
    let agreement = deformed_curvature(b, |b| {
        let lc = b.levi_civita()?;
        let fd = fundamental_tensor(b, &lc)?;
        f45_family(b.structure(), &lc, &fd, lm, ClassGuard::Require(&cr))
    });
    rec.zero_or_error(
        "curvature.deformation-paths",
        "R' = R + (nabla_x Q)(y,z,u) - (nabla_y Q)(x,z,u) + Q(x,Q(y,z),u) - Q(y,Q(x,z),u)",
        agreement.map(|d| d.agreement()),
    );
    match suites::r_prime_check(b, a, &r, lm) {
        Ok(report) => {
            rec.zero("curvature.closed-form", "R' of the two-parameter family in the pi basis", report.formula);
            rec.zero("curvature.phi-kaehler", "R'(x,y,phi z,phi u) = -R'(x,y,z,u)", report.phi_kaehler);
            rec.zero("curvature.xi-slot", "R'(x,y,xi,u) = 0", report.xi_slot);
            rec.zero(
                "curvature.curvature-like",
                "R' has both antisymmetries and satisfies the first Bianchi identity",
                report.curvature_like.worst(),
            );
        }
        Err(e) => rec.failed("curvature.closed-form", "R' of the two-parameter family in the pi basis", e.to_string()),
    }
}
