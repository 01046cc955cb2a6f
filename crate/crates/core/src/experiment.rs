//! Declarative experiment descriptions and their deterministic execution.
//!
//! An [`ExperimentSpec`] names one computation with all of its parameters and
//! a seed. [`run`] executes it and returns an [`Artifact`] that renders to
//! JSON (always embedding the spec), CSV or a plain-text table. The worker
//! count is deliberately not part of the spec: results do not depend on it.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::arith::{angle_from_rational, parse_rational, rational_from_f64, Angle, FracDistance, NamedConstant};
use crate::config::{default_precision, Limits};
use crate::error::{Error, Result};
use crate::exponents::{self, Problem};
use crate::meanvalue;
use crate::recovery::{self, RecoveryReport, Verification};
use crate::report::Table;
use crate::search::pipeline::{self, QmOutcome, TwoStepCertificate, TwoStepTrace};
use crate::search::{self, exponent_fit, min_poly, Argmin, ExponentFit, MinResult};
use crate::weyl::{weyl_sum, CoefficientVector, WeylSumValue};

pub const DEFAULT_EPS: &str = "0.05";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
    Table,
}

/// Which coefficients a generated vector populates.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    /// `alpha_1, ..., alpha_k`.
    #[default]
    Full,
    /// `alpha_k` and `alpha_1`.
    Binomial,
    /// `alpha_k` only.
    Monomial,
}

impl FromStr for Shape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Shape::Full),
            "binomial" => Ok(Shape::Binomial),
            "monomial" => Ok(Shape::Monomial),
            _ => Err(Error::Parse(format!("unknown shape {s:?} (full, binomial, monomial)"))),
        }
    }
}

/// Coefficient source for scans.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Generator {
    /// Uniform dyadics at the working precision, drawn from the seed.
    Uniform,
    /// `a / 2^t` with `1 <= t <= 3`, drawn from the seed.
    Rational,
    /// A named constant as the leading coefficient; the rest are zero.
    Named(NamedConstant),
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::Uniform => f.write_str("uniform"),
            Generator::Rational => f.write_str("rational"),
            Generator::Named(c) => f.write_str(c.name()),
        }
    }
}

impl FromStr for Generator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Generator::Uniform),
            "rational" => Ok(Generator::Rational),
            _ => NamedConstant::from_name(s)
                .map(Generator::Named)
                .ok_or_else(|| Error::Parse(format!("unknown generator {s:?}"))),
        }
    }
}

impl Serialize for Generator {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Generator {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

fn all_problems() -> Vec<Problem> {
    Problem::ALL.to_vec()
}

/// The computation to perform. Coefficients are strings in the input
/// grammar of [`Angle::parse`], listed as `alpha_1, ..., alpha_k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Command {
    Weyl {
        coeffs: Vec<String>,
        n: u64,
    },
    Meanvalue {
        s: Vec<u32>,
        k: Vec<u32>,
        n: Vec<u64>,
    },
    Exponents {
        k: Vec<u32>,
        #[serde(default = "all_problems")]
        problems: Vec<Problem>,
        #[serde(default)]
        s: Vec<u32>,
        /// Constant of the logarithmic family; omitted rows when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        b: Option<f64>,
    },
    MinimizePoly {
        coeffs: Vec<String>,
        n: u64,
    },
    MinimizeForm {
        k: u32,
        betas: Vec<String>,
        n: u64,
    },
    PipelineQm {
        coeffs: Vec<String>,
        n: u64,
    },
    PipelineTwostep {
        k: u32,
        alpha_k: String,
        alpha_1: String,
        n: u64,
        /// Defaults to `1/k(k-1)`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        nu: Option<String>,
    },
    Recover {
        coeffs: Vec<String>,
        n: u64,
        /// Lower bound for the Weyl sum; defaults to the certified modulus.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        a: Option<String>,
    },
    Scan {
        generator: Generator,
        k: u32,
        #[serde(default)]
        shape: Shape,
        n_list: Vec<u64>,
        trials: u32,
    },
}

/// A complete, reproducible description of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub command: Command,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: OutputFormat,
    /// Working precision in bits; derived from `k` and `N` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision_bits: Option<u32>,
    /// `eps` as a decimal or fraction string; defaults to 0.05.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<String>,
    /// One budget for every enumerative routine.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<u64>,
}

impl ExperimentSpec {
    pub fn new(command: Command) -> Self {
        ExperimentSpec {
            command,
            seed: 0,
            output: OutputFormat::Json,
            precision_bits: None,
            eps: None,
            budget: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("invalid experiment spec: {e}")))
    }

    pub fn limits(&self) -> Limits {
        self.budget.map(Limits::with_budget).unwrap_or_default()
    }

    pub fn eps(&self) -> Result<BigRational> {
        parse_rational(self.eps.as_deref().unwrap_or(DEFAULT_EPS))
    }

    fn precision(&self, k: u32, n: u64) -> u32 {
        self.precision_bits.unwrap_or_else(|| default_precision(k, n))
    }
}

/// Result of [`run`]: the JSON document and a tabular view.
#[derive(Clone, Debug, PartialEq)]
pub struct Artifact {
    /// Pretty-printed `{"spec": ..., "result": ...}`.
    pub json: String,
    pub table: Table,
}

impl Artifact {
    /// Rendered output. CSV and text written to a file are prefixed with a
    /// `# spec: {...}` line so the file records how it was produced; JSON
    /// always embeds the spec.
    pub fn render(&self, spec: &ExperimentSpec, for_file: bool) -> Result<String> {
        let body = match spec.output {
            OutputFormat::Json => return Ok(self.json.clone()),
            OutputFormat::Csv => self.table.to_csv()?,
            OutputFormat::Table => self.table.to_text(),
        };
        if for_file {
            Ok(format!("# spec: {}\n{body}", serde_json::to_string(spec)?))
        } else {
            Ok(body)
        }
    }
}

#[derive(Serialize)]
struct Document<'a, T: Serialize> {
    spec: &'a ExperimentSpec,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    constants: Vec<ConstantNote>,
    result: &'a T,
}

/// How a named constant in the spec was evaluated.
#[derive(Serialize)]
struct ConstantNote {
    name: &'static str,
    method: &'static str,
}

fn named_constants(spec: &ExperimentSpec) -> Vec<ConstantNote> {
    let mut inputs: Vec<&str> = Vec::new();
    match &spec.command {
        Command::Weyl { coeffs, .. }
        | Command::MinimizePoly { coeffs, .. }
        | Command::PipelineQm { coeffs, .. }
        | Command::Recover { coeffs, .. } => inputs.extend(coeffs.iter().map(String::as_str)),
        Command::MinimizeForm { betas, .. } => inputs.extend(betas.iter().map(String::as_str)),
        Command::PipelineTwostep { alpha_k, alpha_1, .. } => inputs.extend([alpha_k.as_str(), alpha_1.as_str()]),
        Command::Scan {
            generator: Generator::Named(c),
            ..
        } => inputs.push(c.name()),
        _ => {}
    }
    let mut found: Vec<NamedConstant> = inputs
        .iter()
        .filter_map(|s| NamedConstant::from_name(s.trim()))
        .collect();
    found.sort_by_key(|c| c.name());
    found.dedup();
    found
        .into_iter()
        .map(|c| ConstantNote {
            name: c.name(),
            method: c.method(),
        })
        .collect()
}

fn artifact<T: Serialize>(spec: &ExperimentSpec, result: &T, table: Table) -> Result<Artifact> {
    let doc = Document {
        spec,
        constants: named_constants(spec),
        result,
    };
    let mut json = serde_json::to_string_pretty(&doc)?;
    json.push('\n');
    Ok(Artifact { json, table })
}

fn parse_coeffs(items: &[String], prec: u32) -> Result<CoefficientVector> {
    if items.is_empty() {
        return Err(Error::Parse("at least one coefficient is required".into()));
    }
    CoefficientVector::parse(items, prec)
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
}

fn argmin_text(a: &Argmin) -> String {
    match a {
        Argmin::Single(n) => n.to_string(),
        Argmin::Tuple(t) => join(t),
    }
}

#[derive(Serialize)]
struct WeylOutput {
    precision: u32,
    coefficients: CoefficientVector,
    sum: WeylSumValue,
}

#[derive(Serialize)]
struct MinimizeOutput {
    precision: u32,
    min: MinResult,
}

#[derive(Serialize)]
struct TwoStepOutput {
    precision: u32,
    trace: TwoStepTrace,
    certificate: TwoStepCertificate,
    rate: f64,
}

#[derive(Serialize)]
struct RecoverOutput {
    precision: u32,
    a: String,
    eps: String,
    report: RecoveryReport,
    verification: Option<Verification>,
}

/// Executes a spec.
pub fn run(spec: &ExperimentSpec) -> Result<Artifact> {
    let limits = spec.limits();
    match &spec.command {
        Command::Weyl { coeffs, n } => {
            let prec = spec.precision(coeffs.len() as u32, *n);
            let c = parse_coeffs(coeffs, prec)?;
            let g = weyl_sum(&c, *n, &limits)?;
            let mut t = Table::new(["N", "re", "im", "modulus", "error_bound"]);
            t.push([
                n.to_string(),
                g.re.to_f64().to_string(),
                g.im.to_f64().to_string(),
                g.modulus().to_string(),
                g.error_bound.to_string(),
            ]);
            artifact(
                spec,
                &WeylOutput {
                    precision: prec,
                    coefficients: c,
                    sum: g,
                },
                t,
            )
        }
        Command::Meanvalue { s, k, n } => {
            let rows = meanvalue::mean_value_table(s, k, n, &limits)?;
            artifact(spec, &rows, meanvalue::table(&rows))
        }
        Command::Exponents { k, problems, s, b } => {
            let rows = exponents::exponent_table(problems, k, s, *b)?;
            artifact(spec, &rows, exponents::table(&rows))
        }
        Command::MinimizePoly { coeffs, n } => {
            let prec = spec.precision(coeffs.len() as u32, *n);
            let c = parse_coeffs(coeffs, prec)?;
            let r = min_poly(&c, *n, &limits)?;
            let t = min_table(&r);
            artifact(
                spec,
                &MinimizeOutput {
                    precision: prec,
                    min: r,
                },
                t,
            )
        }
        Command::MinimizeForm { k, betas, n } => {
            let prec = spec.precision(*k, *n) + crate::arith::bound::ceil_log2(betas.len().max(1) as u64);
            if betas.is_empty() {
                return Err(Error::Parse("at least one form coefficient is required".into()));
            }
            let angles = betas
                .iter()
                .map(|b| Angle::parse(b, prec))
                .collect::<Result<Vec<_>>>()?;
            let r = search::min_additive_form(&angles, *k, *n, &limits)?;
            let t = min_table(&r);
            artifact(
                spec,
                &MinimizeOutput {
                    precision: prec,
                    min: r,
                },
                t,
            )
        }
        Command::PipelineQm { coeffs, n } => {
            let prec = spec.precision(coeffs.len() as u32, *n);
            let c = parse_coeffs(coeffs, prec)?;
            let o = pipeline::construct_qm(&c, *n, &spec.eps()?, &limits)?;
            let t = qm_table(&o);
            artifact(spec, &o, t)
        }
        Command::PipelineTwostep {
            k,
            alpha_k,
            alpha_1,
            n,
            nu,
        } => {
            let prec = spec.precision(*k, *n);
            let ak = Angle::parse(alpha_k, prec)?;
            let a1 = Angle::parse(alpha_1, prec)?;
            let nu = match nu {
                Some(s) => parse_rational(s)?,
                None => pipeline::default_nu(*k),
            };
            let trace = pipeline::two_step_minimize(&ak, &a1, *k, *n, &nu, &limits)?;
            let certificate = pipeline::certify_two_step(&trace, &ak, &a1)?;
            let t = Table::fields([
                ("k", trace.k.to_string()),
                ("N", trace.n.to_string()),
                ("nu", trace.nu.to_string()),
                ("a", trace.a.to_string()),
                ("b", trace.b.to_string()),
                ("ell", trace.ell.to_string()),
                ("m", trace.m.to_string()),
                ("n", trace.final_n.to_string()),
                ("step1_value", trace.step1_value.to_string()),
                ("step2_value", trace.step2_value.to_string()),
                ("final_value", trace.final_value.to_string()),
                ("certified", certificate.passed().to_string()),
            ]);
            let out = TwoStepOutput {
                precision: prec,
                rate: pipeline::two_step_rate(&nu),
                trace,
                certificate,
            };
            artifact(spec, &out, t)
        }
        Command::Recover { coeffs, n, a } => {
            let prec = spec.precision(coeffs.len() as u32, *n);
            let c = parse_coeffs(coeffs, prec)?;
            let eps = spec.eps()?;
            let a = match a {
                Some(s) => parse_rational(s)?,
                None => {
                    let g = weyl_sum(&c, *n, &limits)?;
                    let lower = g.modulus_lower();
                    if lower <= 0.0 {
                        return Err(Error::Precondition(
                            "the Weyl sum is indistinguishable from zero".into(),
                        ));
                    }
                    rational_from_f64(lower)?
                }
            };
            let report = recovery::recover(&c, *n, &a, &eps, &limits)?;
            let verification = report
                .approx
                .as_ref()
                .map(|r| recovery::verify_approx(r, &c, *n, &a, &eps))
                .transpose()?;
            let mut fields = vec![
                (
                    "regime",
                    serde_json::to_value(report.regime)?.as_str().unwrap_or("").to_string(),
                ),
                ("threshold", report.threshold.map(|x| x.to_string()).unwrap_or_default()),
                ("scan_bound", report.scan_bound.to_string()),
            ];
            match &report.approx {
                Some(r) => {
                    fields.push(("q", r.q.to_string()));
                    fields.push(("a", join(&r.a)));
                    fields.push(("residuals", join(&r.residuals)));
                    let passed = verification.as_ref().is_some_and(Verification::passed);
                    fields.push(("verified", passed.to_string()));
                }
                None => fields.push(("q", "not found".into())),
            }
            let out = RecoverOutput {
                precision: prec,
                a: a.to_string(),
                eps: eps.to_string(),
                report,
                verification,
            };
            artifact(spec, &out, Table::fields(fields))
        }
        Command::Scan {
            generator,
            k,
            shape,
            n_list,
            trials,
        } => {
            let nmax = n_list.iter().copied().max().unwrap_or(1);
            let prec = spec.precision(*k, nmax);
            let rep = scan_experiment(*generator, *k, *shape, n_list, *trials, spec.seed, prec, &limits)?;
            let mut t = Table::new(["trial", "N", "min_value", "slope"]);
            for tr in &rep.trials {
                let slope = tr.fit.as_ref().map(|f| f.slope.to_string()).unwrap_or_default();
                for p in &tr.minima {
                    t.push([
                        tr.trial.to_string(),
                        p.n.to_string(),
                        p.value.to_f64().to_string(),
                        slope.clone(),
                    ]);
                }
            }
            artifact(spec, &rep, t)
        }
    }
}

fn min_table(r: &MinResult) -> Table {
    let mut t = Table::new(["N", "argmin", "value", "value_numerator", "precision", "evaluations"]);
    t.push([
        r.n.to_string(),
        argmin_text(&r.argmin),
        r.value.to_f64().to_string(),
        r.value.numerator().to_string(),
        r.value.precision().to_string(),
        r.evaluations.to_string(),
    ]);
    t
}

fn qm_table(o: &QmOutcome) -> Table {
    let tr = &o.trace;
    let opt = |x: Option<String>| x.unwrap_or_default();
    Table::fields([
        ("k", tr.k.to_string()),
        ("N", tr.n.to_string()),
        ("eps", tr.eps.to_string()),
        ("J", tr.j.to_string()),
        ("M", tr.m_bound.to_string()),
        ("m", tr.m.to_string()),
        ("modulus", tr.moduli[(tr.m - 1) as usize].to_string()),
        ("a_average", tr.a_average.to_string()),
        ("a_used", tr.a_used.to_string()),
        ("scan_bound", opt(tr.scan_bound.map(|x| x.to_string()))),
        ("q", opt(tr.approx.as_ref().map(|a| a.q.to_string()))),
        ("n", opt(tr.n_witness.map(|x| x.to_string()))),
        ("value", opt(o.result.as_ref().map(|r| r.value.to_string()))),
        ("failure", opt(tr.failure.clone())),
    ])
}

/// One search bound of a scan trial.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanPoint {
    #[serde(rename = "N")]
    pub n: u64,
    pub argmin: u64,
    pub value: FracDistance,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanTrial {
    pub trial: u32,
    pub coefficients: CoefficientVector,
    pub minima: Vec<ScanPoint>,
    pub fit: Option<ExponentFit>,
    pub note: Option<String>,
}

/// Slope `-exponent` of a reference curve `N^{-exponent}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReferenceLine {
    pub source: String,
    pub slope: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanReport {
    pub generator: Generator,
    pub k: u32,
    pub shape: Shape,
    #[serde(rename = "N_list")]
    pub n_list: Vec<u64>,
    pub reference: Vec<ReferenceLine>,
    pub trials: Vec<ScanTrial>,
}

fn random_angle(rng: &mut ChaCha8Rng, prec: u32) -> Result<Angle> {
    let limbs = prec.div_ceil(64) as usize;
    let words: Vec<u32> = (0..limbs * 2).map(|_| rng.random::<u32>()).collect();
    let x = BigUint::from_slice(&words) % (BigUint::from(1u8) << prec);
    Angle::new(x, prec)
}

fn generate(gen: Generator, k: u32, shape: Shape, prec: u32, rng: &mut ChaCha8Rng) -> Result<CoefficientVector> {
    let zero = Angle::zero(prec)?;
    let mut coeffs = vec![zero; k as usize];
    let populated: Vec<usize> = match shape {
        Shape::Full => (0..k as usize).collect(),
        Shape::Binomial if k >= 2 => vec![0, k as usize - 1],
        _ => vec![k as usize - 1],
    };
    match gen {
        Generator::Named(c) => coeffs[k as usize - 1] = Angle::from_named(c, prec)?,
        Generator::Uniform => {
            for &i in &populated {
                coeffs[i] = random_angle(rng, prec)?;
            }
        }
        Generator::Rational => {
            for &i in &populated {
                let t = rng.random_range(1..=3u32);
                let a = rng.random_range(0..(1i64 << t));
                coeffs[i] = angle_from_rational(a, 1 << t, prec)?;
            }
        }
    }
    CoefficientVector::new(coeffs)
}

/// Minima over each `N` in `n_list` for `trials` generated vectors, with a
/// log-log slope per trial and reference slopes for comparison. Slopes are
/// reported, never judged.
#[allow(clippy::too_many_arguments)]
pub fn scan_experiment(
    generator: Generator,
    k: u32,
    shape: Shape,
    n_list: &[u64],
    trials: u32,
    seed: u64,
    prec: u32,
    limits: &Limits,
) -> Result<ScanReport> {
    if trials == 0 {
        return Err(Error::out_of_range("scan", "trials >= 1", trials));
    }
    if k == 0 {
        return Err(Error::out_of_range("scan", "k >= 1", k));
    }
    if n_list.is_empty() {
        return Err(Error::Parse("scan needs at least one N".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut reference = Vec::new();
    let neg = |x: BigRational| -num_traits::ToPrimitive::to_f64(&x).unwrap_or(f64::NAN);
    if let Ok(mu) = exponents::mu(k) {
        reference.push(ReferenceLine {
            source: exponents::source::MU.into(),
            slope: neg(mu),
        });
    }
    if let Ok(rho) = exponents::rho_a(k) {
        reference.push(ReferenceLine {
            source: exponents::source::RHO.into(),
            slope: neg(rho),
        });
    }
    let mut out = Vec::with_capacity(trials as usize);
    for trial in 0..trials {
        let c = generate(generator, k, shape, prec, &mut rng)?;
        let mut minima = Vec::with_capacity(n_list.len());
        for &n in n_list {
            let r = min_poly(&c, n, limits)?;
            let Argmin::Single(arg) = r.argmin else { unreachable!() };
            minima.push(ScanPoint {
                n,
                argmin: arg,
                value: r.value,
            });
        }
        let pts: Vec<(u64, f64)> = minima.iter().map(|p| (p.n, p.value.to_f64())).collect();
        let (fit, note) = match exponent_fit(&pts) {
            Ok(f) => {
                let note = (!f.excluded_zero.is_empty()).then(|| {
                    format!(
                        "zero minima excluded at N = {:?} (rational coefficients)",
                        f.excluded_zero
                    )
                });
                (Some(f), note)
            }
            Err(e) => (None, Some(e.to_string())),
        };
        out.push(ScanTrial {
            trial,
            coefficients: c,
            minima,
            fit,
            note,
        });
    }
    Ok(ScanReport {
        generator,
        k,
        shape,
        n_list: n_list.to_vec(),
        reference,
        trials: out,
    })
}

/// Parses `"7"`, `"1,3,5"`, `"1..56"` (inclusive) or mixtures like `"1..3,10"`.
pub fn parse_list(s: &str) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((a, b)) = part.split_once("..") {
            let b = b.strip_prefix('=').unwrap_or(b);
            let lo: u64 = a
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad range start in {part:?}")))?;
            let hi: u64 = b
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad range end in {part:?}")))?;
            if lo > hi {
                return Err(Error::Parse(format!("empty range {part:?}")));
            }
            if hi - lo > 10_000_000 {
                return Err(Error::Parse(format!("range {part:?} is too long")));
            }
            out.extend(lo..=hi);
        } else {
            out.push(
                part.parse()
                    .map_err(|_| Error::Parse(format!("bad integer {part:?}")))?,
            );
        }
    }
    if out.is_empty() {
        return Err(Error::Parse("empty list".into()));
    }
    Ok(out)
}

/// [`parse_list`] narrowed to `u32`.
pub fn parse_list_u32(s: &str) -> Result<Vec<u32>> {
    parse_list(s)?
        .into_iter()
        .map(|x| u32::try_from(x).map_err(|_| Error::Parse(format!("{x} is too large"))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(c: Command) -> ExperimentSpec {
        ExperimentSpec::new(c)
    }

    #[test]
    fn lists() {
        assert_eq!(parse_list("7").unwrap(), vec![7]);
        assert_eq!(parse_list("1..3,10").unwrap(), vec![1, 2, 3, 10]);
        assert_eq!(parse_list("2..=4").unwrap(), vec![2, 3, 4]);
        assert!(parse_list("5..1").is_err());
        assert!(parse_list("x").is_err());
    }

    #[test]
    fn spec_json_round_trip() {
        let s = ExperimentSpec {
            command: Command::Scan {
                generator: Generator::Named(NamedConstant::Phi),
                k: 1,
                shape: Shape::Monomial,
                n_list: vec![13, 89],
                trials: 1,
            },
            seed: 7,
            output: OutputFormat::Csv,
            precision_bits: Some(128),
            eps: None,
            budget: Some(1000),
        };
        let text = serde_json::to_string(&s).unwrap();
        assert_eq!(ExperimentSpec::from_json(&text).unwrap(), s);
        assert!(ExperimentSpec::from_json(r#"{"command":{"name":"weyl","coeffs":[],"n":1},"bogus":1}"#).is_err());
    }

    #[test]
    fn exponents_csv() {
        let mut s = spec(Command::Exponents {
            k: vec![6],
            problems: vec![Problem::AdditiveForm],
            s: (1..=56).collect(),
            b: None,
        });
        s.output = OutputFormat::Csv;
        let text = run(&s).unwrap().render(&s, false).unwrap();
        assert!(text.contains("iii,6,1,sigma,1/30,"));
        assert!(text.contains("iii,6,30,sigma,1,"));
        assert!(text.contains("iii,6,31,sigma-f,31/30,"));
        let filed = run(&s).unwrap().render(&s, true).unwrap();
        assert!(filed.starts_with("# spec: {"));
    }

    #[test]
    fn minimize_and_meanvalue() {
        let s = spec(Command::MinimizePoly {
            coeffs: vec!["1/2".into()],
            n: 10,
        });
        let a = run(&s).unwrap();
        assert_eq!(a.table.rows[0][1], "2");
        assert_eq!(a.table.rows[0][2], "0");
        let s = spec(Command::Meanvalue {
            s: vec![2],
            k: vec![2],
            n: vec![2],
        });
        let a = run(&s).unwrap();
        assert_eq!(a.table.rows[0][3], "6");
        assert!(a.json.contains("\"spec\""));
    }

    #[test]
    fn scan_reports_slopes_and_zero_notes() {
        let rep = scan_experiment(
            Generator::Named(NamedConstant::Phi),
            1,
            Shape::Full,
            &[13, 89, 610, 4181],
            1,
            0,
            128,
            &Limits::default(),
        )
        .unwrap();
        let slope = rep.trials[0].fit.as_ref().unwrap().slope;
        assert!((slope + 1.0).abs() < 0.02);

        let rep = scan_experiment(
            Generator::Rational,
            2,
            Shape::Full,
            &[10, 20, 40],
            3,
            5,
            64,
            &Limits::default(),
        )
        .unwrap();
        assert!(rep.trials.iter().all(|t| t.note.is_some()));

        let rep = scan_experiment(
            Generator::Uniform,
            6,
            Shape::Binomial,
            &[10, 100],
            1,
            1,
            128,
            &Limits::default(),
        )
        .unwrap();
        assert_eq!(rep.reference[0].source, "rho");
        assert!((rep.reference[0].slope + 1.0 / 30.0).abs() < 1e-15);
    }

    #[test]
    fn seed_determines_output() {
        let mk = |seed| {
            let mut s = spec(Command::Scan {
                generator: Generator::Uniform,
                k: 3,
                shape: Shape::Full,
                n_list: vec![100, 1000, 5000],
                trials: 2,
            });
            s.seed = seed;
            run(&s).unwrap().json
        };
        assert_eq!(mk(1), mk(1));
        assert_ne!(mk(1), mk(2));
    }
}
