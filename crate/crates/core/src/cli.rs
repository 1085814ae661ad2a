//! Command-line front end. Every command emits a delimited table with a
//! `#`-prefixed provenance header, or the same content as JSON.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::channel::QosSpec;
use crate::config::Scenario;
use crate::error::{Error, Result};
use crate::fitting::{self, FitModel, FitOptions, OmegaMode};
use crate::mcsim::{mc_metrics_from_samples, sample_end_to_end, EmpiricalCdf, SimConfig};
use crate::metrics::{self, par_sweep};
use crate::snr::LinkKind;

#[derive(Debug, Parser)]
#[command(
    name = "linkcalc",
    version,
    about = "Satellite-UAV-ground dual-hop link metrics"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct GlobalArgs {
    /// Scenario file (TOML). Built-in defaults when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, global = true, env = "LINKCALC_WORKERS")]
    pub workers: Option<usize>,
    #[arg(long, global = true)]
    pub json: bool,
    #[arg(long, global = true, default_value_t = 1_000_000)]
    pub mc_samples: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// CDF, PDF and outage tables.
    Curves(CurvesArgs),
    /// Effective capacity, exact and asymptotic.
    Ec(EcArgs),
    /// ε-outage capacity with the paired EC at θ = 1/ε.
    EpsCapacity(EpsArgs),
    /// Fit fading models to a measurement log.
    Fit(FitArgs),
    /// Analytic versus Monte Carlo checks.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVar {
    GbarDb,
    Theta,
    Epsilon,
    GammaThDb,
}

impl SweepVar {
    fn column(self) -> &'static str {
        match self {
            SweepVar::GbarDb => "gbar_db",
            SweepVar::Theta => "theta",
            SweepVar::Epsilon => "epsilon",
            SweepVar::GammaThDb => "gamma_th_db",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepScale {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepSpec {
    pub variable: SweepVar,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub scale: SweepScale,
}

impl SweepSpec {
    pub fn values(&self) -> Result<Vec<f64>> {
        let (a, b, n) = (self.start, self.stop, self.points);
        if !(a.is_finite() && b.is_finite()) {
            return Err(Error::Config("sweep bounds must be finite".into()));
        }
        if n == 0 {
            return Err(Error::Config("sweep needs at least one point".into()));
        }
        if n == 1 {
            return Ok(vec![a]);
        }
        if a >= b {
            return Err(Error::Config(format!(
                "sweep needs start < stop, got {a} and {b}"
            )));
        }
        match self.scale {
            SweepScale::Linear => Ok((0..n)
                .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
                .collect()),
            SweepScale::Log => {
                if a <= 0.0 {
                    return Err(Error::Config("log sweep needs start > 0".into()));
                }
                let (la, lb) = (a.log10(), b.log10());
                Ok((0..n)
                    .map(|i| 10f64.powf(la + (lb - la) * i as f64 / (n - 1) as f64))
                    .collect())
            }
        }
    }
}

#[derive(Debug, Args, Clone)]
pub struct SweepArgs {
    #[arg(long = "var")]
    pub variable: Option<SweepVar>,
    #[arg(long, allow_negative_numbers = true)]
    pub start: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub stop: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long)]
    pub scale: Option<SweepScale>,
}

impl SweepArgs {
    fn resolve(&self, default: SweepSpec) -> SweepSpec {
        let variable = self.variable.unwrap_or(default.variable);
        let same = variable == default.variable;
        let pick = |v: Option<f64>, d: f64, alt: f64| v.unwrap_or(if same { d } else { alt });
        let (alt_lo, alt_hi, alt_scale) = match variable {
            SweepVar::GbarDb => (0.0, 50.0, SweepScale::Linear),
            SweepVar::GammaThDb => (-10.0, 30.0, SweepScale::Linear),
            SweepVar::Theta => (1e-4, 1.0, SweepScale::Log),
            SweepVar::Epsilon => (1e-7, 1e-1, SweepScale::Log),
        };
        SweepSpec {
            variable,
            start: pick(self.start, default.start, alt_lo),
            stop: pick(self.stop, default.stop, alt_hi),
            points: self.points.unwrap_or(default.points),
            scale: self
                .scale
                .unwrap_or(if same { default.scale } else { alt_scale }),
        }
    }
}

/// Channel variants: every (m, m_s) shape pair crossed with every λ.
#[derive(Debug, Args, Clone)]
pub struct VariantArgs {
    #[arg(long, value_delimiter = ',', default_values_t = vec![LinkKind::Sr, LinkKind::Ru, LinkKind::Af, LinkKind::Df])]
    pub kinds: Vec<LinkKind>,
    /// R-U shape pairs as m:m_s, comma separated.
    #[arg(long, value_delimiter = ',', value_parser = parse_shape)]
    pub shapes: Vec<(f64, f64)>,
    /// SNR ratios λ with γ̄_RU = λ γ̄_SR.
    #[arg(long, value_delimiter = ',')]
    pub lambdas: Vec<f64>,
}

fn parse_shape(s: &str) -> std::result::Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| format!("expected m:m_s, got {s:?}"))?;
    let m = a.trim().parse().map_err(|_| format!("bad m in {s:?}"))?;
    let ms = b.trim().parse().map_err(|_| format!("bad m_s in {s:?}"))?;
    Ok((m, ms))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CurveMetric {
    Cdf,
    Pdf,
    Outage,
    OutageAsy,
}

impl CurveMetric {
    fn name(self) -> &'static str {
        match self {
            CurveMetric::Cdf => "cdf",
            CurveMetric::Pdf => "pdf",
            CurveMetric::Outage => "outage",
            CurveMetric::OutageAsy => "outage_asy",
        }
    }
}

#[derive(Debug, Args, Clone)]
pub struct CurvesArgs {
    #[command(flatten)]
    pub sweep: SweepArgs,
    #[command(flatten)]
    pub variants: VariantArgs,
    #[arg(long, value_delimiter = ',', default_values = ["outage"])]
    pub metric: Vec<CurveMetric>,
    /// Adds Monte Carlo estimate and standard-error columns.
    #[arg(long)]
    pub mc_validate: bool,
}

#[derive(Debug, Args, Clone)]
pub struct EcArgs {
    #[command(flatten)]
    pub sweep: SweepArgs,
    #[command(flatten)]
    pub variants: VariantArgs,
    #[arg(long)]
    pub mc_validate: bool,
}

#[derive(Debug, Args, Clone)]
pub struct EpsArgs {
    #[command(flatten)]
    pub sweep: SweepArgs,
    #[command(flatten)]
    pub variants: VariantArgs,
}

#[derive(Debug, Args, Clone)]
pub struct FitArgs {
    pub input: PathBuf,
    #[arg(long, default_value_t = fitting::DEFAULT_ALPHA)]
    pub alpha: f64,
    /// Reference distance d₀, meters.
    #[arg(long, default_value_t = 1.0)]
    pub d0: f64,
    #[arg(long, value_delimiter = ',', default_values = ["rayleigh", "nakagami", "fisher_f"], value_parser = parse_model)]
    pub models: Vec<FitModel>,
    #[arg(long, value_enum, default_value_t = OmegaModeArg::Free)]
    pub omega_mode: OmegaModeArg,
    #[arg(long, default_value_t = 16)]
    pub starts: usize,
}

fn parse_model(s: &str) -> std::result::Result<FitModel, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OmegaModeArg {
    Free,
    Normalized,
}

#[derive(Debug, Args, Clone)]
pub struct ValidateArgs {
    /// Average SNRs (dB) at which every link is checked.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, default_values_t = vec![10.0, 20.0, 30.0])]
    pub gbars_db: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = vec![LinkKind::Sr, LinkKind::Ru, LinkKind::Af, LinkKind::Df])]
    pub kinds: Vec<LinkKind>,
    /// Upper bound on the KS distance.
    #[arg(long, default_value_t = 0.005)]
    pub ks_tol: f64,
    /// Allowed |MC − analytic| outage gap in standard errors.
    #[arg(long, default_value_t = 4.0)]
    pub sigma_tol: f64,
    /// Allowed relative EC gap, widened to `sigma_tol` standard errors.
    #[arg(long, default_value_t = 0.01)]
    pub ec_rel_tol: f64,
    /// Analytic CDF evaluations per KS computation.
    #[arg(long, default_value_t = 2000)]
    pub ks_grid: usize,
}

impl clap::ValueEnum for LinkKind {
    fn value_variants<'a>() -> &'a [Self] {
        &LinkKind::ALL
    }
    fn to_possible_value(&self) -> Option<clap::builder::PossibleValue> {
        Some(clap::builder::PossibleValue::new(self.name()))
    }
}

// ---- output -------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct Table {
    pub header: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(v) if v.is_nan() => "nan".into(),
            Cell::Num(v) => format!("{v:.10e}"),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl Table {
    fn new(command: &str, scenario: &Scenario, seed: u64) -> Self {
        Self {
            header: vec![
                ("linkcalc".into(), env!("CARGO_PKG_VERSION").into()),
                ("command".into(), command.into()),
                ("config_sha256".into(), scenario.hash_hex()),
                ("seed".into(), seed.to_string()),
            ],
            columns: Vec::new(),
            rows: Vec::new(),
        }
    }

    fn meta(&mut self, key: &str, value: impl ToString) {
        self.header.push((key.into(), value.to_string()));
    }

    pub fn render_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.header {
            let _ = writeln!(s, "# {k}: {v}");
        }
        let _ = writeln!(s, "{}", self.columns.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            let _ = writeln!(s, "{}", cells.join(","));
        }
        s
    }

    pub fn render_json(&self) -> String {
        #[derive(Serialize)]
        struct Doc<'a> {
            header: serde_json::Map<String, serde_json::Value>,
            columns: &'a [String],
            rows: Vec<Vec<serde_json::Value>>,
        }
        let header = self
            .header
            .iter()
            .map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone())))
            .collect();
        let rows = self
            .rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|c| match c {
                        Cell::Num(v) if v.is_finite() => serde_json::json!(v),
                        Cell::Num(_) => serde_json::Value::Null,
                        Cell::Text(t) => serde_json::json!(t),
                    })
                    .collect()
            })
            .collect();
        let doc = Doc {
            header,
            columns: &self.columns,
            rows,
        };
        let mut s = serde_json::to_string_pretty(&doc).expect("table serializes");
        s.push('\n');
        s
    }
}

/// A command's table and whether every check passed (only `validate` can
/// fail without an error).
#[derive(Debug, Clone)]
pub struct Outcome {
    pub table: Table,
    pub ok: bool,
}

impl Outcome {
    pub fn render(&self, json: bool) -> String {
        if json {
            self.table.render_json()
        } else {
            self.table.render_text()
        }
    }
}

// ---- sweeps ---------------------------------------------------------------

#[derive(Debug, Clone)]
struct Variant {
    label: String,
    scenario: Scenario,
}

fn variants(base: &Scenario, args: &VariantArgs) -> Result<Vec<Variant>> {
    for &(m, ms) in &args.shapes {
        if !(m > 0.0 && ms > 1.0) {
            return Err(Error::Config(format!(
                "shape pair needs m > 0 and m_s > 1, got {m}:{ms}"
            )));
        }
    }
    for &l in &args.lambdas {
        if !(l > 0.0 && l.is_finite()) {
            return Err(Error::Config(format!("lambda must be positive, got {l}")));
        }
    }
    let shapes: Vec<Option<(f64, f64)>> = if args.shapes.is_empty() {
        vec![None]
    } else {
        args.shapes.iter().copied().map(Some).collect()
    };
    let lambdas: Vec<Option<f64>> = if args.lambdas.is_empty() {
        vec![None]
    } else {
        args.lambdas.iter().copied().map(Some).collect()
    };
    let mut out = Vec::new();
    for s in &shapes {
        for l in &lambdas {
            let mut sc = base.clone();
            let mut label = Vec::new();
            if let Some((m, ms)) = *s {
                sc = sc.with_ru_shapes(m, ms);
                if shapes.len() > 1 {
                    label.push(format!("m={m},ms={ms}"));
                }
            }
            if let Some(l) = *l {
                sc = sc.with_lambda(l);
                if lambdas.len() > 1 {
                    label.push(format!("lambda={l}"));
                }
            }
            sc.validate()?;
            let label = if label.is_empty() {
                String::new()
            } else {
                format!("[{}]", label.join(";"))
            };
            out.push(Variant {
                label,
                scenario: sc,
            });
        }
    }
    Ok(out)
}

fn apply(sc: &Scenario, var: SweepVar, x: f64) -> Scenario {
    let mut s = match var {
        SweepVar::GbarDb => sc.with_gbar_db(x),
        _ => sc.clone(),
    };
    match var {
        SweepVar::GbarDb => {}
        SweepVar::Theta => s.qos.theta = x,
        SweepVar::Epsilon => s.qos.epsilon = x,
        SweepVar::GammaThDb => s.qos.gamma_th_db = x,
    }
    s
}

/// Evaluates `cells(row_scenario)` for every sweep point in parallel,
/// keeping input order.
fn sweep_rows<F>(spec: &SweepSpec, cells: F) -> Result<Vec<Vec<Cell>>>
where
    F: Fn(f64) -> Result<Vec<f64>> + Sync + Send,
{
    let xs = spec.values()?;
    par_sweep(&xs, |&x| {
        let mut row = vec![Cell::Num(x)];
        row.extend(cells(x)?.into_iter().map(Cell::Num));
        Ok(row)
    })
    .into_iter()
    .collect()
}

fn nan_on_domain(r: Result<f64>) -> Result<f64> {
    match r {
        Err(Error::Domain(_)) => Ok(f64::NAN),
        other => other,
    }
}

fn sweep_meta(t: &mut Table, spec: &SweepSpec) {
    let scale = match spec.scale {
        SweepScale::Linear => "linear",
        SweepScale::Log => "log",
    };
    t.meta(
        "sweep",
        format!(
            "{} {} {}..{} x{}",
            spec.variable.column(),
            scale,
            spec.start,
            spec.stop,
            spec.points
        ),
    );
}

pub fn cmd_curves(sc: &Scenario, g: &GlobalArgs, a: &CurvesArgs) -> Result<Outcome> {
    let spec = a.sweep.resolve(SweepSpec {
        variable: SweepVar::GbarDb,
        start: 0.0,
        stop: 50.0,
        points: 11,
        scale: SweepScale::Linear,
    });
    let vars = variants(sc, &a.variants)?;
    let mut t = Table::new("curves", sc, g.seed);
    sweep_meta(&mut t, &spec);
    t.meta("gamma_th_db", sc.qos.gamma_th_db);
    if a.mc_validate {
        t.meta("mc_samples", g.mc_samples);
    }
    t.columns.push(spec.variable.column().into());
    for v in &vars {
        for &k in &a.variants.kinds {
            for &m in &a.metric {
                t.columns.push(format!("{k}_{}{}", m.name(), v.label));
                if a.mc_validate && matches!(m, CurveMetric::Cdf | CurveMetric::Outage) {
                    t.columns.push(format!("{k}_{}_mc{}", m.name(), v.label));
                    t.columns.push(format!("{k}_{}_mc_se{}", m.name(), v.label));
                }
            }
        }
    }
    let sim = sim_config(g);
    t.rows = sweep_rows(&spec, |x| {
        let mut out = Vec::new();
        for v in &vars {
            let s = apply(&v.scenario, spec.variable, x);
            let gth = s.gamma_th();
            for &k in &a.variants.kinds {
                let d = s.distribution(k)?;
                let mut mc: Option<(f64, f64)> = None;
                for &m in &a.metric {
                    out.push(match m {
                        CurveMetric::Cdf | CurveMetric::Outage => d.cdf(gth)?,
                        CurveMetric::Pdf => nan_on_domain(d.pdf(gth))?,
                        CurveMetric::OutageAsy => nan_on_domain(d.cdf_asy(gth))?,
                    });
                    if a.mc_validate && matches!(m, CurveMetric::Cdf | CurveMetric::Outage) {
                        let (p, se) = match mc {
                            Some(v) => v,
                            None => {
                                let samples = sample_end_to_end(&d, &sim)?;
                                let r = mc_metrics_from_samples(&samples, &s.qos_spec()?, gth)?;
                                *mc.insert((r.p_out_hat, r.p_out_se))
                            }
                        };
                        out.push(p);
                        out.push(se);
                    }
                }
            }
        }
        Ok(out)
    })?;
    Ok(Outcome { table: t, ok: true })
}

pub fn cmd_ec(sc: &Scenario, g: &GlobalArgs, a: &EcArgs) -> Result<Outcome> {
    let spec = a.sweep.resolve(SweepSpec {
        variable: SweepVar::Theta,
        start: 1e-4,
        stop: 1.0,
        points: 9,
        scale: SweepScale::Log,
    });
    let vars = variants(sc, &a.variants)?;
    let mut t = Table::new("ec", sc, g.seed);
    sweep_meta(&mut t, &spec);
    t.meta("units", "bits per block");
    if a.mc_validate {
        t.meta("mc_samples", g.mc_samples);
    }
    t.columns.push(spec.variable.column().into());
    let relay = |k: LinkKind| matches!(k, LinkKind::Af | LinkKind::Df);
    for v in &vars {
        for &k in &a.variants.kinds {
            t.columns.push(format!("{k}_ec{}", v.label));
            if relay(k) {
                t.columns.push(format!("{k}_ec_asy{}", v.label));
            }
            if a.mc_validate {
                t.columns.push(format!("{k}_ec_mc{}", v.label));
                t.columns.push(format!("{k}_ec_mc_se{}", v.label));
            }
        }
    }
    let sim = sim_config(g);
    t.rows = sweep_rows(&spec, |x| {
        let mut out = Vec::new();
        for v in &vars {
            let s = apply(&v.scenario, spec.variable, x);
            let qos = s.qos_spec()?;
            for &k in &a.variants.kinds {
                let d = s.distribution(k)?;
                out.push(metrics::ec_closed(&d, &qos)?.value_bits);
                if relay(k) {
                    out.push(nan_on_domain(
                        metrics::ec_asymptotic(&d, &qos).map(|r| r.value_bits),
                    )?);
                }
                if a.mc_validate {
                    let samples = sample_end_to_end(&d, &sim)?;
                    let r = mc_metrics_from_samples(&samples, &qos, s.gamma_th())?;
                    out.push(r.ec_hat);
                    out.push(r.ec_se);
                }
            }
        }
        Ok(out)
    })?;
    Ok(Outcome { table: t, ok: true })
}

pub fn cmd_eps_capacity(sc: &Scenario, g: &GlobalArgs, a: &EpsArgs) -> Result<Outcome> {
    let spec = a.sweep.resolve(SweepSpec {
        variable: SweepVar::Epsilon,
        start: 1e-7,
        stop: 1e-1,
        points: 7,
        scale: SweepScale::Log,
    });
    let vars = variants(sc, &a.variants)?;
    let mut t = Table::new("eps-capacity", sc, g.seed);
    sweep_meta(&mut t, &spec);
    t.meta(
        "units",
        "bits/s/Hz; ec_inv_eps is EC at theta = 1/epsilon divided by BT",
    );
    t.columns.push(spec.variable.column().into());
    for v in &vars {
        for &k in &a.variants.kinds {
            t.columns.push(format!("{k}_c_eps{}", v.label));
            t.columns.push(format!("{k}_ec_inv_eps{}", v.label));
        }
    }
    t.rows = sweep_rows(&spec, |x| {
        let mut out = Vec::new();
        for v in &vars {
            let s = apply(&v.scenario, spec.variable, x);
            let eps = s.qos.epsilon;
            let qos = QosSpec::new(1.0 / eps, s.qos.bandwidth_hz, s.qos.duration_s)?;
            for &k in &a.variants.kinds {
                let d = s.distribution(k)?;
                out.push(metrics::eps_outage_capacity(&d, eps)?.c_eps);
                out.push(metrics::effective_capacity(&d, &qos)?.value_bits / qos.bt());
            }
        }
        Ok(out)
    })?;
    Ok(Outcome { table: t, ok: true })
}

pub fn cmd_fit(sc: &Scenario, g: &GlobalArgs, a: &FitArgs) -> Result<Outcome> {
    let ms = fitting::read_measurements_file(&a.input)?;
    let comp = fitting::compensate_path_loss(&ms, a.alpha, a.d0)?;
    if comp.below_d0 > 0 {
        eprintln!(
            "warning: {} records lie closer than d0 = {} m; the log-distance model is extrapolated there",
            comp.below_d0, a.d0
        );
    }
    let opts = FitOptions {
        starts: a.starts,
        seed: g.seed,
        omega_mode: match a.omega_mode {
            OmegaModeArg::Free => OmegaMode::Free,
            OmegaModeArg::Normalized => OmegaMode::Normalized,
        },
        ..FitOptions::default()
    };
    let mut t = Table::new("fit", sc, g.seed);
    t.meta("input", a.input.display());
    t.meta("records", ms.len());
    t.meta("alpha", a.alpha);
    t.meta("d0_m", a.d0);
    t.meta("records_below_d0", comp.below_d0);
    t.meta("grid", opts.n_grid);
    t.columns = [
        "model", "mse", "s", "m", "omega", "m_s", "omega_m", "omega_s",
    ]
    .map(String::from)
    .to_vec();
    let nan = f64::NAN;
    for &model in &a.models {
        let r = fitting::fit_model(&comp.envelope, model, &opts)?;
        let vals = match r.params {
            fitting::FitParams::Rayleigh { s } => [s, nan, nan, nan, nan, nan],
            fitting::FitParams::Nakagami { m, omega } => [nan, m, omega, nan, nan, nan],
            fitting::FitParams::FisherF {
                m,
                m_s,
                omega_m,
                omega_s,
            } => [nan, m, omega_m * omega_s, m_s, omega_m, omega_s],
        };
        let mut row = vec![Cell::Text(model.name().into()), Cell::Num(r.mse)];
        row.extend(vals.into_iter().map(Cell::Num));
        t.rows.push(row);
    }
    Ok(Outcome { table: t, ok: true })
}

/// One analytic-versus-simulation comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tol: f64,
    pub pass: bool,
}

pub fn validation_checks(sc: &Scenario, sim: &SimConfig, a: &ValidateArgs) -> Result<Vec<Check>> {
    let mut cases = Vec::new();
    for &gdb in &a.gbars_db {
        for &k in &a.kinds {
            cases.push((gdb, k));
        }
    }
    let per_case = par_sweep(&cases, |&(gdb, k)| {
        let s = sc.with_gbar_db(gdb);
        let d = s.distribution(k)?;
        let qos = s.qos_spec()?;
        let gth = s.gamma_th();
        let samples = sample_end_to_end(&d, sim)?;
        let mc = mc_metrics_from_samples(&samples, &qos, gth)?;
        let ecdf = EmpiricalCdf::new(samples)?;
        let ks = ecdf.ks_bounded(|x| d.cdf(x), a.ks_grid)?;
        let p = d.cdf(gth)?;
        let z = if mc.p_out_se > 0.0 {
            (mc.p_out_hat - p).abs() / mc.p_out_se
        } else if mc.p_out_hat == p {
            0.0
        } else {
            f64::INFINITY
        };
        let ec = metrics::ec_closed(&d, &qos)?.value_bits;
        let ec_rel = (mc.ec_hat - ec).abs() / ec.abs();
        // At large β the estimator is driven by rare deep fades, so the
        // allowance widens with the delta-method standard error.
        let ec_tol = a.ec_rel_tol.max(a.sigma_tol * mc.ec_se / ec.abs());
        let tag = format!("{k}_{}dB", fmt_short(gdb));
        Ok(vec![
            Check {
                name: format!("ks_{tag}"),
                value: ks.upper,
                tol: a.ks_tol,
                pass: ks.upper < a.ks_tol,
            },
            Check {
                name: format!("outage_z_{tag}"),
                value: z,
                tol: a.sigma_tol,
                pass: z <= a.sigma_tol,
            },
            Check {
                name: format!("ec_rel_{tag}"),
                value: ec_rel,
                tol: ec_tol,
                pass: ec_rel < ec_tol,
            },
        ])
    });
    let mut out = Vec::new();
    for r in per_case {
        out.extend(r?);
    }
    Ok(out)
}

fn fmt_short(x: f64) -> String {
    if x.fract() == 0.0 {
        format!("{x:.0}")
    } else {
        format!("{x}")
    }
}

pub fn cmd_validate(sc: &Scenario, g: &GlobalArgs, a: &ValidateArgs) -> Result<Outcome> {
    let sim = sim_config(g);
    sim.validate()?;
    let checks = validation_checks(sc, &sim, a)?;
    let ok = checks.iter().all(|c| c.pass);
    let mut t = Table::new("validate", sc, g.seed);
    t.meta("mc_samples", g.mc_samples);
    t.meta("gamma_th_db", sc.qos.gamma_th_db);
    t.meta("theta", sc.qos.theta);
    t.meta(
        "verdict",
        if ok {
            "PASS".to_string()
        } else {
            let failed: Vec<&str> = checks
                .iter()
                .filter(|c| !c.pass)
                .map(|c| c.name.as_str())
                .collect();
            format!("FAIL ({})", failed.join(" "))
        },
    );
    t.columns = ["check", "value", "tol", "result"]
        .map(String::from)
        .to_vec();
    t.rows = checks
        .into_iter()
        .map(|c| {
            vec![
                Cell::Text(c.name),
                Cell::Num(c.value),
                Cell::Num(c.tol),
                Cell::Text(if c.pass { "PASS" } else { "FAIL" }.into()),
            ]
        })
        .collect();
    Ok(Outcome { table: t, ok })
}

fn sim_config(g: &GlobalArgs) -> SimConfig {
    let sim = SimConfig::new(g.mc_samples, g.seed);
    match g.workers {
        Some(w) => sim.with_workers(w),
        None => sim,
    }
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    let sc = match &cli.global.config {
        Some(p) => Scenario::load(p)?,
        None => Scenario::default(),
    };
    if cli.global.mc_samples == 0 {
        return Err(Error::Config("--mc-samples must be at least 1".into()));
    }
    let go = || match &cli.command {
        Command::Curves(a) => cmd_curves(&sc, &cli.global, a),
        Command::Ec(a) => cmd_ec(&sc, &cli.global, a),
        Command::EpsCapacity(a) => cmd_eps_capacity(&sc, &cli.global, a),
        Command::Fit(a) => cmd_fit(&sc, &cli.global, a),
        Command::Validate(a) => cmd_validate(&sc, &cli.global, a),
    };
    match cli.global.workers {
        Some(0) => Err(Error::Config("--workers must be at least 1".into())),
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(go),
        None => go(),
    }
}

/// Exit status: 0 success, 1 numerical failure (including failed checks),
/// 2 input error.
pub fn exit_code(r: &Result<Outcome>) -> i32 {
    match r {
        Ok(o) if o.ok => 0,
        Ok(_) => 1,
        Err(e) if e.is_input_error() => 2,
        Err(_) => 1,
    }
}

/// Runs a command line and writes its output; returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let r = run(&cli);
    if let Ok(o) = &r {
        let text = o.render(cli.global.json);
        let written = match &cli.global.out {
            Some(p) => std::fs::write(p, text),
            None => {
                use std::io::Write;
                std::io::stdout().write_all(text.as_bytes())
            }
        };
        if let Err(e) = written {
            eprintln!("error: {e}");
            return 2;
        }
    }
    if let Err(e) = &r {
        eprintln!("error: {e}");
    }
    exit_code(&r)
}
