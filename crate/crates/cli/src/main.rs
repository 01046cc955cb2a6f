mod args;

use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use fracparts_core::experiment::{self, parse_list, parse_list_u32, Command, ExperimentSpec, OutputFormat};
use fracparts_core::{Error, Problem};

use args::{Cli, Cmd, Global, MinimizeCmd, PipelineCmd, PolyArgs};

const EXIT_INTERNAL: u8 = 1;
const EXIT_REFUSAL: u8 = 2;
const EXIT_USAGE: u8 = 64;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is_usage() => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(e) if e.is_refusal() => {
            eprintln!("refused: {e}");
            ExitCode::from(EXIT_REFUSAL)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INTERNAL)
        }
    }
}

fn execute(cli: Cli) -> Result<(), Error> {
    let spec = build_spec(cli.cmd, &cli.global)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.global.threads {
        if t == 0 {
            return Err(Error::Parse("--threads must be at least 1".into()));
        }
        pool = pool.num_threads(t);
    }
    let pool = pool
        .build()
        .map_err(|e| Error::Serialize(format!("thread pool: {e}")))?;
    let artifact = pool.install(|| experiment::run(&spec))?;
    let text = artifact.render(&spec, cli.global.out.is_some())?;
    match &cli.global.out {
        Some(path) => write_atomic(path, &text),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn write_atomic(path: &Path, text: &str) -> Result<(), Error> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(text.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

fn split(s: &str) -> Vec<String> {
    s.split(',')
        .map(|x| x.trim().to_string())
        .filter(|x| !x.is_empty())
        .collect()
}

fn coeffs(p: &PolyArgs) -> Result<Vec<String>, Error> {
    let c = split(&p.coeffs);
    if let Some(k) = p.k {
        if c.len() != k as usize {
            return Err(Error::Parse(format!("--k {k} needs {k} coefficients, got {}", c.len())));
        }
    }
    Ok(c)
}

fn build_spec(cmd: Cmd, g: &Global) -> Result<ExperimentSpec, Error> {
    let command = match cmd {
        Cmd::Run { spec } => {
            let text = std::fs::read_to_string(&spec)?;
            let mut s = ExperimentSpec::from_json(&text)?;
            apply_overrides(&mut s, g);
            return Ok(s);
        }
        Cmd::Weyl(p) => Command::Weyl {
            coeffs: coeffs(&p)?,
            n: p.n,
        },
        Cmd::Meanvalue { s, k, nmax, n } => {
            let n = match (nmax, n) {
                (Some(m), _) if m >= 1 => (1..=m).collect(),
                (None, Some(list)) => parse_list(&list)?,
                _ => return Err(Error::Parse("give --nmax (at least 1) or --n".into())),
            };
            Command::Meanvalue {
                s: parse_list_u32(&s)?,
                k: parse_list_u32(&k)?,
                n,
            }
        }
        Cmd::Exponents { k, problem, s, b } => {
            let problems = match problem {
                Some(p) => split(&p)
                    .iter()
                    .map(|x| x.parse())
                    .collect::<Result<Vec<Problem>, _>>()?,
                None => Problem::ALL.to_vec(),
            };
            let s = s.as_deref().map(parse_list_u32).transpose()?.unwrap_or_default();
            Command::Exponents {
                k: parse_list_u32(&k)?,
                problems,
                s,
                b,
            }
        }
        Cmd::Minimize(MinimizeCmd::Poly(p)) => Command::MinimizePoly {
            coeffs: coeffs(&p)?,
            n: p.n,
        },
        Cmd::Minimize(MinimizeCmd::Form { k, betas, s, n }) => {
            let mut betas = split(&betas);
            if let Some(s) = s {
                if betas.len() == 1 {
                    betas = vec![betas[0].clone(); s];
                } else if betas.len() != s {
                    return Err(Error::Parse(format!(
                        "--s {s} needs {s} betas (or one), got {}",
                        betas.len()
                    )));
                }
            }
            Command::MinimizeForm { k, betas, n }
        }
        Cmd::Pipeline(PipelineCmd::Qm(p)) => Command::PipelineQm {
            coeffs: coeffs(&p)?,
            n: p.n,
        },
        Cmd::Pipeline(PipelineCmd::Twostep {
            k,
            alpha_k,
            alpha_1,
            n,
            nu,
        }) => Command::PipelineTwostep {
            k,
            alpha_k,
            alpha_1,
            n,
            nu,
        },
        Cmd::Recover { poly, a } => Command::Recover {
            coeffs: coeffs(&poly)?,
            n: poly.n,
            a,
        },
        Cmd::Scan {
            generator,
            k,
            shape,
            n_list,
            trials,
        } => Command::Scan {
            generator: generator.parse()?,
            k,
            shape: shape.parse()?,
            n_list: parse_list(&n_list)?,
            trials,
        },
    };
    let mut s = ExperimentSpec::new(command);
    apply_overrides(&mut s, g);
    Ok(s)
}

fn apply_overrides(s: &mut ExperimentSpec, g: &Global) {
    if let Some(x) = g.seed {
        s.seed = x;
    }
    if let Some(x) = g.precision {
        s.precision_bits = Some(x);
    }
    if let Some(x) = g.budget {
        s.budget = Some(x);
    }
    if let Some(x) = &g.eps {
        s.eps = Some(x.clone());
    }
    if g.json {
        s.output = OutputFormat::Json;
    } else if g.csv {
        s.output = OutputFormat::Csv;
    } else if g.table {
        s.output = OutputFormat::Table;
    }
}
