//! Command-line front end. `run` does all the work so that tests can drive
//! it in-process; the binary only forwards `std::env::args`.

pub mod manifest;
pub mod mapfile;
pub mod plot;

use std::io::Write;
use std::path::PathBuf;

use arakelov_core::canonical::{canonical_height, global_pairing};
use arakelov_core::census::{
    comparison_scatter, energy_sum, orbit, preperiodic_height_bound, preperiodic_points, small_height_census,
    OrbitStatus,
};
use arakelov_core::local::{escape_radius, green_pairing, verify_escape};
use arakelov_core::reduction::{bad_places, minimal_resultant_ord, MinResStatus};
use arakelov_core::{milnor_invariants, CertifiedValue, HomogeneousLift, Place, ProjPoint};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use serde::Serialize;

use manifest::{Budgets, RunManifest};
use mapfile::{map_hash, read_map};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_UNCERTIFIED: i32 = 3;

const DEFAULT_ORBIT_BUDGET: usize = 1000;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] arakelov_core::Error),
}

#[derive(Parser, Debug)]
#[command(name = "arakelov", version, about = "Resultants, heights and Green pairings of rational maps over Q")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Homogeneous resultant of the lift as given
    Resultant,
    /// Primes of bad reduction with minimal-resultant certificates
    Badplaces,
    /// Minimal resultant ordinal at --prime
    Minres,
    /// Canonical height of --point with per-place terms
    Height,
    /// Green pairing of --x and --y at --place (or at every place)
    Green,
    /// Escape radius at --place, and an escape check for --point
    Escape,
    /// Orbit of --point: preperiodic, escaped or undecided
    Orbit,
    /// Preperiodic points with coordinates up to --bound
    Preperiodic,
    /// Small-height census over the box of coordinates up to --bound
    Census,
    /// Pair energy of the --point list at --place (or all places)
    Energy,
    /// Resultant height against moduli height for quadratic --map files
    Compare,
    /// Milnor invariants of a quadratic map
    Milnor,
    /// Re-run the command recorded in --manifest and compare output digests
    Replay,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Resultant => "resultant",
            Command::Badplaces => "badplaces",
            Command::Minres => "minres",
            Command::Height => "height",
            Command::Green => "green",
            Command::Escape => "escape",
            Command::Orbit => "orbit",
            Command::Preperiodic => "preperiodic",
            Command::Census => "census",
            Command::Energy => "energy",
            Command::Compare => "compare",
            Command::Milnor => "milnor",
            Command::Replay => "replay",
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug, Clone)]
struct Opts {
    /// Map file (JSON); repeat for `compare`
    #[arg(long, global = true)]
    map: Vec<PathBuf>,
    /// Point "[a:b]"; repeat for `energy`
    #[arg(long, global = true, allow_hyphen_values = true)]
    point: Vec<String>,
    /// First point of a pairing
    #[arg(long, global = true, allow_hyphen_values = true)]
    x: Option<String>,
    /// Second point of a pairing
    #[arg(long, global = true, allow_hyphen_values = true)]
    y: Option<String>,
    #[arg(long, global = true)]
    prime: Option<u64>,
    /// "inf" or a prime
    #[arg(long, global = true)]
    place: Option<String>,
    /// Iterations for local heights (truncation error shrinks like d^-iters)
    #[arg(long, global = true, default_value_t = 30)]
    iters: usize,
    /// Largest coordinate of searched points: the box has Weil height <= log(bound)
    #[arg(long, global = true)]
    bound: Option<f64>,
    /// Orbit step budget
    #[arg(long, global = true)]
    budget: Option<usize>,
    /// Census threshold as a fraction of h_res / s
    #[arg(long = "t-fraction", global = true, default_value_t = 0.1)]
    t_fraction: f64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write an SVG scatter (census only)
    #[arg(long, global = true)]
    plot: Option<PathBuf>,
    /// Worker threads; output does not depend on this
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write the run manifest here (read it, for `replay`)
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
}

struct Report {
    json: String,
    csv: Option<String>,
    /// Set when the result is budget-limited or not certified.
    uncertified: Option<String>,
}

impl Report {
    fn new<T: Serialize>(value: &T) -> Report {
        Report { json: serde_json::to_string(value).expect("reports serialize"), csv: None, uncertified: None }
    }

    fn with_csv(mut self, header: &[&str], rows: Vec<Vec<String>>) -> Report {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header).expect("in-memory write");
        for r in rows {
            w.write_record(&r).expect("in-memory write");
        }
        self.csv = Some(String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8"));
        self
    }

    fn uncertified_if(mut self, cond: bool, why: impl Into<String>) -> Report {
        if cond {
            self.uncertified = Some(why.into());
        }
        self
    }
}

fn num(v: f64) -> String {
    format!("{v}")
}

/// Parses arguments (program name first), runs the command, writes the
/// result to `out` and diagnostics to `err`, and returns the exit code.
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let args: Vec<std::ffi::OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = out.write_all(text.as_bytes());
                EXIT_OK
            } else {
                let _ = err.write_all(text.as_bytes());
                EXIT_INVALID
            };
        }
    };
    let argv: Vec<String> = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    if cli.command == Command::Replay {
        return replay(&cli.opts, out, err);
    }
    let result = match cli.opts.threads {
        Some(0) => Err(CliError::Usage("--threads must be at least 1".into())),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| execute(cli.command, &cli.opts)),
            Err(e) => Err(CliError::Usage(format!("cannot start thread pool: {e}"))),
        },
        None => execute(cli.command, &cli.opts),
    };
    let report = match result {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_INVALID;
        }
    };
    let body = match cli.opts.format {
        Format::Json => format!("{}\n", report.json),
        Format::Csv => match &report.csv {
            Some(c) => c.clone(),
            None => {
                let _ = writeln!(err, "error: {} has no CSV form", cli.command.name());
                return EXIT_INVALID;
            }
        },
    };
    if out.write_all(body.as_bytes()).is_err() {
        return EXIT_INVALID;
    }
    let hashes = cli.opts.map.iter().filter_map(|p| read_map(p).ok()).map(|f| map_hash(&f)).collect();
    let budgets = Budgets {
        iters: cli.opts.iters,
        bound: cli.opts.bound,
        orbit_budget: cli.opts.budget,
        t_fraction: cli.opts.t_fraction,
    };
    let m = RunManifest::new(cli.command.name(), argv, hashes, budgets, body.as_bytes());
    let text = serde_json::to_string_pretty(&m).expect("manifest serializes");
    match &cli.opts.manifest {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text + "\n") {
                let _ = writeln!(err, "error: cannot write {}: {e}", path.display());
                return EXIT_INVALID;
            }
        }
        None => {
            let _ = writeln!(err, "manifest: {}", serde_json::to_string(&m).expect("manifest serializes"));
        }
    }
    match report.uncertified {
        Some(why) => {
            let _ = writeln!(err, "uncertified: {why}");
            EXIT_UNCERTIFIED
        }
        None => EXIT_OK,
    }
}

fn replay(opts: &Opts, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let Some(path) = &opts.manifest else {
        let _ = writeln!(err, "error: replay needs --manifest FILE");
        return EXIT_INVALID;
    };
    let m: RunManifest = match std::fs::read_to_string(path)
        .map_err(|e| e.to_string())
        .and_then(|t| serde_json::from_str(&t).map_err(|e| e.to_string()))
    {
        Ok(m) => m,
        Err(e) => {
            let _ = writeln!(err, "error: cannot load manifest {}: {e}", path.display());
            return EXIT_INVALID;
        }
    };
    let mut args = vec!["arakelov".to_string()];
    args.extend(m.replay_args());
    if let Some(n) = opts.threads {
        args.push("--threads".into());
        args.push(n.to_string());
    }
    let mut buf = Vec::new();
    let mut sink = Vec::new();
    let code = run(args, &mut buf, &mut sink);
    let _ = out.write_all(&buf);
    let d = manifest::digest(&buf);
    if d == m.output_digest {
        let _ = writeln!(err, "replay: output digest matches {d}");
        code
    } else {
        let _ = writeln!(err, "replay: output digest {d} differs from recorded {}", m.output_digest);
        EXIT_UNCERTIFIED
    }
}

fn one_map(opts: &Opts) -> Result<HomogeneousLift, CliError> {
    match opts.map.as_slice() {
        [p] => read_map(p),
        [] => Err(CliError::Usage("--map FILE is required".into())),
        _ => Err(CliError::Usage("exactly one --map is expected".into())),
    }
}

fn parse_point(s: &str) -> Result<ProjPoint, CliError> {
    s.parse().map_err(CliError::Core)
}

fn one_point(opts: &Opts) -> Result<ProjPoint, CliError> {
    match opts.point.as_slice() {
        [p] => parse_point(p),
        [] => Err(CliError::Usage("--point \"[a:b]\" is required".into())),
        _ => Err(CliError::Usage("exactly one --point is expected".into())),
    }
}

fn parse_place(opts: &Opts) -> Result<Option<Place>, CliError> {
    opts.place.as_deref().map(|s| s.parse::<Place>().map_err(CliError::Core)).transpose()
}

fn search_bound(opts: &Opts) -> Result<f64, CliError> {
    match opts.bound {
        Some(b) if b >= 1.0 && b.is_finite() => Ok(b.ln()),
        Some(b) => Err(CliError::Usage(format!("--bound must be at least 1, got {b}"))),
        None => Err(CliError::Usage("--bound N is required".into())),
    }
}

fn iters(opts: &Opts) -> Result<usize, CliError> {
    if opts.iters == 0 {
        return Err(CliError::Usage("--iters must be at least 1".into()));
    }
    Ok(opts.iters)
}

fn certified_row(label: String, v: &CertifiedValue) -> Vec<String> {
    vec![label, num(v.value), num(v.err), v.exact.to_string()]
}

fn orbit_fields(s: &OrbitStatus) -> (bool, String, String) {
    match s {
        OrbitStatus::Preperiodic { tail, cycle } => (true, tail.to_string(), cycle.to_string()),
        _ => (false, String::new(), String::new()),
    }
}

fn execute(cmd: Command, opts: &Opts) -> Result<Report, CliError> {
    match cmd {
        Command::Resultant => {
            let f = one_map(opts)?;
            #[derive(Serialize)]
            struct Res {
                res: String,
            }
            let res = f.resultant().to_string();
            Ok(Report::new(&Res { res: res.clone() }).with_csv(&["res"], vec![vec![res]]))
        }
        Command::Badplaces => {
            let f = one_map(opts)?;
            let r = bad_places(&f)?;
            let rows = r
                .certificates
                .iter()
                .map(|c| vec![c.p.to_string(), c.ord_start.to_string(), c.ord_min.to_string(), format!("{:?}", c.status)])
                .collect();
            let warn = !r.warnings.is_empty();
            Ok(Report::new(&r)
                .with_csv(&["p", "ord_start", "ord_min", "status"], rows)
                .uncertified_if(warn, "descent did not certify minimality at every prime"))
        }
        Command::Minres => {
            let f = one_map(opts)?;
            let p = opts.prime.ok_or_else(|| CliError::Usage("--prime P is required".into()))?;
            Place::finite(p)?;
            let c = minimal_resultant_ord(&f, p)?;
            let row = vec![c.p.to_string(), c.ord_start.to_string(), c.ord_min.to_string(), format!("{:?}", c.status)];
            let open = c.status != MinResStatus::Minimal;
            Ok(Report::new(&c)
                .with_csv(&["p", "ord_start", "ord_min", "status"], vec![row])
                .uncertified_if(open, format!("descent status {:?}", c.status)))
        }
        Command::Height => {
            let f = one_map(opts)?;
            let x = one_point(opts)?;
            let h = canonical_height(&f, &x, iters(opts)?)?;
            let mut rows: Vec<Vec<String>> =
                h.per_place.iter().map(|t| certified_row(t.place.to_string(), &t.height)).collect();
            rows.push(certified_row("total".into(), &h.total));
            Ok(Report::new(&h).with_csv(&["place", "value", "err", "exact"], rows))
        }
        Command::Green => {
            let f = one_map(opts)?;
            let need = |s: &Option<String>, flag: &str| {
                s.as_deref().ok_or_else(|| CliError::Usage(format!("{flag} \"[a:b]\" is required"))).and_then(parse_point)
            };
            let x = need(&opts.x, "--x")?;
            let y = need(&opts.y, "--y")?;
            let n = iters(opts)?;
            match parse_place(opts)? {
                Some(v) => {
                    let g = green_pairing(&f, &x, &y, v, n)?;
                    Ok(Report::new(&g).with_csv(&["place", "value", "err", "exact"], vec![certified_row(v.to_string(), &g)]))
                }
                None => {
                    let terms = global_pairing(&f, &x, &y, n)?;
                    let total = CertifiedValue::sum(terms.iter().map(|t| t.height));
                    #[derive(Serialize)]
                    struct AllPlaces<'a> {
                        per_place: &'a [arakelov_core::canonical::PlaceTerm],
                        total: CertifiedValue,
                    }
                    let mut rows: Vec<Vec<String>> =
                        terms.iter().map(|t| certified_row(t.place.to_string(), &t.height)).collect();
                    rows.push(certified_row("total".into(), &total));
                    Ok(Report::new(&AllPlaces { per_place: &terms, total })
                        .with_csv(&["place", "value", "err", "exact"], rows))
                }
            }
        }
        Command::Escape => {
            let f = one_map(opts)?;
            let v = parse_place(opts)?.ok_or_else(|| CliError::Usage("--place inf|P is required".into()))?;
            let r = escape_radius(&f, v);
            #[derive(Serialize)]
            struct Escape {
                place: Place,
                r: f64,
                log_r: f64,
                #[serde(skip_serializing_if = "Option::is_none")]
                point: Option<ProjPoint>,
                #[serde(skip_serializing_if = "Option::is_none")]
                escapes: Option<bool>,
            }
            let (point, escapes) = match opts.point.as_slice() {
                [] => (None, None),
                [p] => {
                    let x = parse_point(p)?;
                    let delta = num_rational::BigRational::new(BigInt::from(1), BigInt::from(10));
                    let ok = verify_escape(&f, v, &x.as_rationals(), iters(opts)?, &delta)?;
                    (Some(x), Some(ok))
                }
                _ => return Err(CliError::Usage("at most one --point is expected".into())),
            };
            let row = vec![v.to_string(), num(r.r), num(r.log_r), escapes.map_or(String::new(), |e| e.to_string())];
            Ok(Report::new(&Escape { place: v, r: r.r, log_r: r.log_r, point, escapes })
                .with_csv(&["place", "r", "log_r", "escapes"], vec![row])
                .uncertified_if(escapes == Some(false), "norm did not grow at the certified rate"))
        }
        Command::Orbit => {
            let f = one_map(opts)?;
            let x = one_point(opts)?;
            let h_max = preperiodic_height_bound(&f)?;
            let budget = opts.budget.unwrap_or(DEFAULT_ORBIT_BUDGET);
            let rec = orbit(&f.normalized(), &x, budget, h_max)?;
            let (_, tail, cycle) = orbit_fields(&rec.status);
            let status = match rec.status {
                OrbitStatus::Preperiodic { .. } => "preperiodic",
                OrbitStatus::Escaped { .. } => "escaped",
                OrbitStatus::Undecided { .. } => "undecided",
            };
            let undecided = matches!(rec.status, OrbitStatus::Undecided { .. });
            Ok(Report::new(&rec.status)
                .with_csv(&["point", "status", "tail", "cycle"], vec![vec![x.to_string(), status.into(), tail, cycle]])
                .uncertified_if(undecided, format!("orbit budget {budget} exhausted")))
        }
        Command::Preperiodic => {
            let f = one_map(opts)?;
            let r = preperiodic_points(&f, search_bound(opts)?)?;
            let rows = r
                .points
                .iter()
                .map(|rec| {
                    let (_, t, c) = orbit_fields(&rec.status);
                    vec![rec.start.to_string(), t, c]
                })
                .collect();
            let open = !r.undecided.is_empty();
            Ok(Report::new(&r)
                .with_csv(&["point", "tail", "cycle"], rows)
                .uncertified_if(open, format!("{} orbits undecided", r.undecided.len())))
        }
        Command::Census => {
            let f = one_map(opts)?;
            let c = small_height_census(&f, opts.t_fraction, search_bound(opts)?, iters(opts)?)?;
            if let Some(path) = &opts.plot {
                std::fs::write(path, plot::census_svg(&c.rows, c.threshold))
                    .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))?;
            }
            let rows = c
                .rows
                .iter()
                .map(|r| {
                    let (pre, t, cy) = orbit_fields(&r.orbit);
                    vec![r.point.to_string(), num(r.weil_h), num(r.hhat.value), num(r.hhat.err), pre.to_string(), t, cy]
                })
                .collect();
            let undecided = c.rows.iter().any(|r| matches!(r.orbit, OrbitStatus::Undecided { .. }));
            Ok(Report::new(&c)
                .with_csv(&["point", "weil_h", "hhat", "hhat_err", "preperiodic", "tail", "cycle"], rows)
                .uncertified_if(undecided, "some orbits undecided"))
        }
        Command::Energy => {
            let f = one_map(opts)?;
            let pts = opts.point.iter().map(|s| parse_point(s)).collect::<Result<Vec<_>, _>>()?;
            if pts.len() < 2 {
                return Err(CliError::Usage("energy needs at least two --point values".into()));
            }
            let e = energy_sum(&f, &pts, parse_place(opts)?, iters(opts)?)?;
            let fails = e.identity.as_ref().is_some_and(|i| !i.holds);
            let row = vec![
                e.place.clone(),
                e.n.to_string(),
                num(e.ordered.value),
                num(e.ordered.err),
                num(e.unordered.value),
                num(e.unordered.err),
                e.identity.as_ref().map_or(String::new(), |i| num(i.residual)),
            ];
            Ok(Report::new(&e)
                .with_csv(&["place", "n", "ordered", "ordered_err", "unordered", "unordered_err", "identity_residual"], vec![row])
                .uncertified_if(fails, "global identity residual exceeds the certified error"))
        }
        Command::Compare => {
            if opts.map.is_empty() {
                return Err(CliError::Usage("compare needs --map files".into()));
            }
            let maps = opts.map.iter().map(|p| read_map(p)).collect::<Result<Vec<_>, _>>()?;
            let r = comparison_scatter(&maps)?;
            let rows = r
                .rows
                .iter()
                .map(|row| {
                    vec![
                        row.map.clone(),
                        num(row.h_res_finite),
                        num(row.h_res_archimedean),
                        row.sigma1.clone(),
                        row.sigma2.clone(),
                        num(row.moduli_height),
                        (!row.flagged.is_empty()).to_string(),
                    ]
                })
                .collect();
            Ok(Report::new(&r).with_csv(
                &["map", "h_res_finite", "h_res_archimedean", "sigma1", "sigma2", "moduli_height", "flagged"],
                rows,
            ))
        }
        Command::Milnor => {
            let f = one_map(opts)?;
            let m = milnor_invariants(&f)?;
            let row = vec![m.sigma1.to_string(), m.sigma2.to_string(), m.sigma3.to_string(), num(m.moduli_height)];
            Ok(Report::new(&m).with_csv(&["sigma1", "sigma2", "sigma3", "moduli_height"], vec![row]))
        }
        Command::Replay => unreachable!("handled before dispatch"),
    }
}
