use std::fs;
use std::time::Duration;

use serde_json::Value;

use hill_spps::darboux::{self, DarbouxPartner};
use hill_spps::problems::SLProblem;
use hill_spps::spectrum::{self, Branch};
use hill_spps::{Analysis, Complex, Error, Real};

use crate::args::{Cli, Command, Global, Precision};
use crate::output::{fmt_num, Cell, Header, Table};

/// Exit-code class of a failed run.
#[derive(Debug, Clone, PartialEq)]
pub enum Failure {
    Usage(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidGrid(_) | Error::InvalidProblem(_) | Error::Config(_) => {
                Failure::Usage(e.to_string())
            }
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

/// Maximum `|D - D~|` accepted by the `darboux` command.
pub const DARBOUX_EXIT_TOL: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSpec {
    Mathieu(f64),
    Free,
    Config { path: String, text: String },
}

impl ProblemSpec {
    pub fn from_global(g: &Global) -> Result<Self, Failure> {
        let chosen = g.mathieu.is_some() as usize + g.free as usize + g.config.is_some() as usize;
        if chosen != 1 {
            return Err(Failure::Usage(
                "select exactly one of --mathieu <r>, --free, --config <path>".into(),
            ));
        }
        if let Some(r) = g.mathieu {
            return Ok(ProblemSpec::Mathieu(r));
        }
        if g.free {
            return Ok(ProblemSpec::Free);
        }
        let path = g.config.as_ref().expect("checked above");
        let text = fs::read_to_string(path)
            .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        Ok(ProblemSpec::Config {
            path: path.display().to_string(),
            text,
        })
    }

    fn build<R: Real>(&self, grid: usize) -> Result<SLProblem<R>, Failure> {
        Ok(match self {
            ProblemSpec::Mathieu(r) => SLProblem::mathieu(*r, grid)?,
            ProblemSpec::Free => SLProblem::free(grid)?,
            ProblemSpec::Config { text, .. } => SLProblem::from_config(text, grid)?,
        })
    }

    fn header(&self, g: &Global) -> Header {
        let (problem, mut params) = match self {
            ProblemSpec::Mathieu(r) => ("mathieu".to_string(), vec![("r".into(), Value::from(*r))]),
            ProblemSpec::Free => ("free".to_string(), vec![]),
            ProblemSpec::Config { path, .. } => (
                "config".to_string(),
                vec![("config".into(), Value::from(path.as_str()))],
            ),
        };
        params.push(("grid".into(), Value::from(g.grid)));
        params.push(("order".into(), Value::from(g.order)));
        let precision = match g.precision {
            Precision::Double => "double",
            Precision::DoubleDouble => "double-double",
        };
        params.push(("precision".into(), Value::from(precision)));
        Header { problem, params }
    }
}

/// Output of one command; `failure` is set when the table is partial.
#[derive(Debug)]
pub struct Report {
    pub table: Table,
    /// Diagnostics for stderr: stage timings and warnings.
    pub warnings: Vec<String>,
    pub failure: Option<Failure>,
}

impl Report {
    fn ok(table: Table, warnings: Vec<String>) -> Self {
        Report {
            table,
            warnings,
            failure: None,
        }
    }
}

fn num<R: Real>(x: R) -> Cell {
    Cell::Num(x.as_f64())
}

fn fmt_complex<R: Real>(z: Complex<R>) -> String {
    format!("{} {}i", fmt_num(z.re.as_f64()), fmt_num(z.im.as_f64()))
}

fn timing_line(label: &str, d: Duration) -> String {
    format!("timing: {label}: {:.3} s", d.as_secs_f64())
}

pub fn execute<R: Real>(cli: &Cli, spec: &ProblemSpec) -> Result<Report, Failure> {
    let g = &cli.global;
    let problem: SLProblem<R> = spec.build(g.grid)?;
    let analysis = Analysis::run(problem, g.order)?;
    let mut table = Table::new(spec.header(g), vec![]);
    table.meta("name", analysis.problem.name());
    table.meta("lambda_center", fmt_num(analysis.lambda0().as_f64()));

    let t = analysis.timings;
    let mut warnings = vec![
        timing_line("lambda0 stage", t.lambda0),
        timing_line("ground-state stage", t.ground),
        timing_line("coefficient stage", t.coefficients),
    ];

    let report = match &cli.command {
        Command::Discriminant { range, samples } => discriminant(
            &analysis,
            table,
            R::lit(range.lo),
            R::lit(range.hi),
            *samples,
        )?,
        Command::Eigenvalues { count } => eigenvalues(&analysis, table, *count)?,
        Command::Bands { range } => bands(&analysis, table, R::lit(range.lo), R::lit(range.hi))?,
        Command::Bloch {
            lambda,
            xmax,
            samples,
        } => bloch(&analysis, table, R::lit(*lambda), R::lit(*xmax), *samples)?,
        Command::Darboux { probes } => darboux(&analysis, table, *probes)?,
    };
    warnings.extend(report.warnings);
    Ok(Report { warnings, ..report })
}

fn discriminant<R: Real>(
    a: &Analysis<R>,
    mut table: Table,
    lo: R,
    hi: R,
    samples: usize,
) -> Result<Report, Failure> {
    if samples < 2 {
        return Err(Failure::Usage("--samples must be at least 2".into()));
    }
    table.columns = vec!["lambda", "D"];
    let step = (hi - lo) / R::from_usize(samples - 1).unwrap();
    let mut rows = Vec::with_capacity(samples);
    let mut failure = None;
    for i in 0..samples {
        let lambda = if i + 1 == samples {
            hi
        } else {
            lo + step * R::from_usize(i).unwrap()
        };
        match a.discriminant(lambda) {
            Ok(d) => rows.push((lambda, d)),
            Err(e) => {
                failure = Some(Failure::from(e));
                break;
            }
        }
    }
    if let Some(&(lambda, d)) = rows
        .iter()
        .min_by(|x, y| x.1.partial_cmp(&y.1).expect("finite samples"))
    {
        table.meta(
            "sampled minimum",
            format!(
                "D = {} at lambda = {}",
                fmt_num(d.as_f64()),
                fmt_num(lambda.as_f64())
            ),
        );
    }
    for (lambda, d) in rows {
        table.push(vec![num(lambda), num(d)]);
    }
    Ok(Report {
        table,
        warnings: vec![],
        failure,
    })
}

fn eigenvalues<R: Real>(
    a: &Analysis<R>,
    mut table: Table,
    count: usize,
) -> Result<Report, Failure> {
    if count == 0 {
        return Err(Failure::Usage("--count must be at least 1".into()));
    }
    table.columns = vec!["n", "lambda", "boundary", "residual"];
    let scan = a.scan_eigenvalues(count);
    for e in &scan.eigenvalues {
        let residual = (a.series.eval(e.value) - e.boundary.target::<R>()).abs();
        table.push(vec![
            Cell::Int(e.index),
            num(e.value),
            Cell::Text(e.boundary.as_str().into()),
            num(residual),
        ]);
    }
    let failure = scan.budget_limit.map(|lambda| {
        Failure::from(Error::TruncationInsufficient {
            lambda: lambda.as_f64(),
            found: scan.eigenvalues.len(),
            requested: count,
        })
    });
    Ok(Report {
        table,
        warnings: vec![],
        failure,
    })
}

fn bands<R: Real>(a: &Analysis<R>, mut table: Table, lo: R, hi: R) -> Result<Report, Failure> {
    let bs = a.band_structure(lo, hi)?;
    table.columns = vec!["lo", "hi", "kind"];
    table.meta("band edges", bs.edges.len().to_string());
    for i in &bs.intervals {
        let kind = if i.stable { "stable" } else { "unstable" };
        table.push(vec![num(i.lo), num(i.hi), Cell::Text(kind.into())]);
    }
    Ok(Report::ok(table, vec![]))
}

fn bloch<R: Real>(
    a: &Analysis<R>,
    mut table: Table,
    lambda: R,
    xmax: R,
    samples: usize,
) -> Result<Report, Failure> {
    if samples < 2 || !(xmax > R::zero()) {
        return Err(Failure::Usage(
            "--xmax must be positive and --samples at least 2".into(),
        ));
    }
    let (data, pair) = a.bloch(lambda)?;
    table.columns = vec!["x", "re_f_plus", "im_f_plus", "re_f_minus", "im_f_minus"];
    table.meta("lambda", fmt_num(lambda.as_f64()));
    table.meta("D", fmt_num(data.discriminant.as_f64()));
    table.meta("beta_plus", fmt_complex(data.beta_plus));
    table.meta("beta_minus", fmt_complex(data.beta_minus));
    table.meta("alpha_plus", fmt_complex(data.alpha_plus));
    table.meta("alpha_minus", fmt_complex(data.alpha_minus));
    let step = xmax / R::from_usize(samples - 1).unwrap();
    for i in 0..samples {
        let x = step * R::from_usize(i).unwrap();
        let fp = spectrum::bloch_solution(&data, &pair, x, Branch::Plus);
        let fm = spectrum::bloch_solution(&data, &pair, x, Branch::Minus);
        table.push(vec![num(x), num(fp.re), num(fp.im), num(fm.re), num(fm.im)]);
    }
    Ok(Report::ok(table, vec![]))
}

fn darboux<R: Real>(a: &Analysis<R>, mut table: Table, probes: usize) -> Result<Report, Failure> {
    if probes < 2 {
        return Err(Failure::Usage("--probes must be at least 2".into()));
    }
    let partner: DarbouxPartner<R> = a.partner()?;
    let mesh = darboux::default_probes(&a.coefficients, &a.problem, probes);
    let (dev, at) = darboux::invariance_defect(&partner, &a.coefficients, &a.series, &mesh)?;
    table.columns = vec!["x", "phi", "q_tilde", "f0_tilde"];
    table.meta("factorization residual", fmt_num(partner.residual.as_f64()));
    table.meta(
        "probe range",
        format!(
            "{}:{} ({} points)",
            fmt_num(mesh[0].as_f64()),
            fmt_num(mesh[mesh.len() - 1].as_f64()),
            mesh.len()
        ),
    );
    table.meta(
        "max |D - D~|",
        format!(
            "{} at lambda = {}",
            fmt_num(dev.as_f64()),
            fmt_num(at.as_f64())
        ),
    );
    let mut failure = None;
    match darboux::double_darboux(&partner) {
        Ok(dd) => table.meta("max |q~~ - q|", fmt_num(dd.q_defect.as_f64())),
        Err(e) => failure = Some(Failure::from(e)),
    }
    if !(dev.as_f64() <= DARBOUX_EXIT_TOL) {
        failure = Some(Failure::Numerical(format!(
            "max |D - D~| = {:e} at lambda = {} exceeds {DARBOUX_EXIT_TOL:e}",
            dev.as_f64(),
            at.as_f64()
        )));
    }
    for (((x, phi), qt), ft) in a
        .problem
        .grid()
        .nodes()
        .zip(partner.phi.values())
        .zip(partner.q_tilde.values())
        .zip(partner.f0_tilde.values())
    {
        table.push(vec![num(x), num(*phi), num(*qt), num(*ft)]);
    }
    Ok(Report {
        table,
        warnings: vec![],
        failure,
    })
}
