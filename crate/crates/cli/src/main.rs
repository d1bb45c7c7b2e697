use clap::{Args, Parser, Subcommand};
use crystal_strata::artin_schreier::{count_solutions, geometric_count, p_rank_via_fiber_count};
use crystal_strata::crystal::Crystal;
use crystal_strata::family::{purity_from_sweep, CrystalFamily, StratumKey, SweepOptions, DEFAULT_POINT_BUDGET};
use crystal_strata::field::make_field;
use crystal_strata::newton::{BreakPoint, NewtonPolygon};
use crystal_strata::oracles::{run_suite, SUITES};
use crystal_strata::{svg, wire, Error};
use serde_json::{json, Value};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

const THREADS_ENV: &str = "CRYSTAL_STRATA_THREADS";

/// Invariants of F-crystals over finite fields and over families.
#[derive(Parser)]
#[command(name = "crystal-strata", version)]
struct Cli {
    /// Worker threads for point sweeps; overrides CRYSTAL_STRATA_THREADS.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Report {
    /// Where the JSON report goes; "-" writes it to stdout and the summary to stderr.
    #[arg(long, default_value = "-")]
    report: String,
}

#[derive(Args)]
struct CrystalArgs {
    /// Crystal JSON file.
    #[arg(short, long)]
    input: PathBuf,
    #[command(flatten)]
    out: Report,
}

#[derive(Subcommand)]
enum Command {
    /// Newton slopes, break points and p-rank.
    Slopes {
        #[command(flatten)]
        args: CrystalArgs,
        /// Also draw the Newton and Hodge polygons.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// p-rank computed three independent ways.
    Prank {
        #[command(flatten)]
        args: CrystalArgs,
    },
    /// Hodge polygon, checked against the Newton polygon.
    Hodge {
        #[command(flatten)]
        args: CrystalArgs,
    },
    /// The group of morphisms into the slope-b line.
    Hom {
        #[command(flatten)]
        args: CrystalArgs,
        #[arg(long)]
        b: u32,
    },
    /// The a-th exterior power.
    Exterior {
        #[command(flatten)]
        args: CrystalArgs,
        #[arg(long)]
        a: usize,
    },
    /// The crystal viewed as an F^{nq}-crystal.
    Iterate {
        #[command(flatten)]
        args: CrystalArgs,
        #[arg(long)]
        q: u64,
    },
    /// Splits off the part of slope exactly b.
    Split {
        #[command(flatten)]
        args: CrystalArgs,
        #[arg(long)]
        b: u32,
    },
    /// Solutions of an Artin-Schreier system at a point.
    AsCount {
        #[arg(long)]
        system: PathBuf,
        /// Parameter values as field indices, e.g. "t=0" or "t1=2,t2=1".
        #[arg(long, default_value = "")]
        point: String,
        /// Absolute degree of the field to count in; defaults to the base field.
        #[arg(long, conflicts_with = "stabilize")]
        level: Option<u32>,
        /// Compute the geometric count instead of a single level.
        #[arg(long)]
        stabilize: bool,
        #[command(flatten)]
        out: Report,
    },
    /// Sweeps a family and buckets its points into strata.
    Stratify {
        #[arg(long)]
        family: PathBuf,
        #[arg(long, default_value_t = 6)]
        max_m: u32,
        /// Comma-separated list of prank, newton, as and break:a,b.
        #[arg(long, default_value = "prank,newton")]
        strata: String,
        #[arg(long, default_value_t = DEFAULT_POINT_BUDGET)]
        budget: u128,
        /// Draws the Newton polygons that occur.
        #[arg(long)]
        svg: Option<PathBuf>,
        #[command(flatten)]
        out: Report,
    },
    /// Codimension of the boundary of a stratum.
    Purity {
        #[arg(long)]
        family: PathBuf,
        /// A stratum such as prank:1, newton:{0,1}, break:1,0 or as:1.
        #[arg(long)]
        target: String,
        #[arg(long, default_value_t = 8)]
        max_m: u32,
        #[arg(long, default_value_t = DEFAULT_POINT_BUDGET)]
        budget: u128,
        #[command(flatten)]
        out: Report,
    },
    /// Runs the brute-force verification suites.
    Verify {
        /// "all", "list", or a comma-separated list of suite names.
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Where the JSON report goes; "-" writes it to stdout.
        #[arg(long, default_value = "-")]
        json: String,
    },
}

enum Failure {
    Input(String),
    Math(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NoStabilization(_) | Error::BackendMismatch { .. } => Failure::Math(e.to_string()),
            other => Failure::Input(other.to_string()),
        }
    }
}

struct Outcome {
    report: Value,
    summary: String,
    pass: bool,
    svg: Option<(PathBuf, String)>,
}

impl Outcome {
    fn ok(report: Value, summary: String) -> Self {
        Outcome { report, summary, pass: true, svg: None }
    }
}

fn read_json(path: &Path) -> Result<Value, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_crystal(path: &Path) -> Result<Crystal, Failure> {
    Ok(wire::parse_crystal(&read_json(path)?)?)
}

fn load_family(path: &Path) -> Result<CrystalFamily, Failure> {
    Ok(wire::parse_family(&read_json(path)?)?)
}

fn slope_strings(nu: &NewtonPolygon) -> Vec<String> {
    nu.slopes().iter().map(|s| s.to_string()).collect()
}

fn vertices(nu: &NewtonPolygon) -> Vec<[u64; 2]> {
    nu.break_points().iter().map(|v| [v.a as u64, v.b]).collect()
}

fn crystal_header(c: &Crystal, command: &str) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("command".into(), json!(command));
    m.insert("p".into(), json!(c.p()));
    m.insert("deg".into(), json!(c.field().deg()));
    m.insert("n".into(), json!(c.n()));
    m.insert("s".into(), json!(c.s()));
    m.insert("rank".into(), json!(c.rank()));
    m
}

fn crystal_summary(c: &Crystal, nu: &NewtonPolygon) -> Value {
    json!({
        "crystal": wire::crystal_to_json(c),
        "slopes": slope_strings(nu),
        "break_points": vertices(nu),
    })
}

/// Splits `prank,newton,break:1,0` into options, keeping the coordinates of
/// a break point together.
fn parse_strata(list: &str) -> Result<SweepOptions, Failure> {
    let mut opts = SweepOptions::default();
    let mut tokens = list.split(',').map(str::trim).filter(|t| !t.is_empty());
    while let Some(tok) = tokens.next() {
        match tok {
            "newton" => opts.newton = true,
            "prank" => opts.prank = true,
            "as" => opts.as_count = true,
            _ => {
                let a = tok
                    .strip_prefix("break:")
                    .ok_or_else(|| Failure::Input(format!("unknown stratum kind {tok:?}")))?;
                let b = tokens
                    .next()
                    .ok_or_else(|| Failure::Input(format!("break point {tok:?} needs two coordinates")))?;
                let parse =
                    |x: &str| x.trim().parse::<u64>().map_err(|_| Failure::Input(format!("bad break point {a},{b}")));
                opts.breaks.push(BreakPoint::new(parse(a)? as usize, parse(b)?));
            }
        }
    }
    if !opts.newton && !opts.prank && !opts.as_count && opts.breaks.is_empty() {
        return Err(Failure::Input("no strata requested".into()));
    }
    Ok(opts)
}

fn run(command: Command) -> Result<(Outcome, String), Failure> {
    let (outcome, dest) = match command {
        Command::Slopes { args, svg: svg_path } => {
            let c = load_crystal(&args.input)?;
            let nu = c.newton_slopes()?;
            let hodge = c.hodge_polygon()?.to_polygon();
            let p_rank = nu.multiplicity(0.into());
            let mut r = crystal_header(&c, "slopes");
            r.insert("slopes".into(), json!(slope_strings(&nu)));
            r.insert("break_points".into(), json!(vertices(&nu)));
            r.insert("p_rank".into(), json!(p_rank));
            r.insert("hodge".into(), json!(slope_strings(&hodge)));
            r.insert("det_valuation".into(), json!(c.det_valuation()?));
            let mut out = Outcome::ok(Value::Object(r), format!("Newton {nu}, Hodge {hodge}, p-rank {p_rank}"));
            out.svg = svg_path.map(|p| (p, svg::render_polygons(&[("Newton".into(), nu), ("Hodge".into(), hodge)])));
            (out, args.out.report)
        }
        Command::Prank { args } => {
            let c = load_crystal(&args.input)?;
            let by_slope = c.newton_slopes()?.multiplicity(0.into());
            let stable = c.p_rank_stable();
            let via_fiber = p_rank_via_fiber_count(&c)?;
            let agree = by_slope == stable && stable == via_fiber;
            let mut r = crystal_header(&c, "prank");
            r.insert(
                "p_rank".into(),
                json!({"slope_multiplicity": by_slope, "stable_rank": stable, "fiber_count": via_fiber}),
            );
            r.insert("agree".into(), json!(agree));
            let summary = if agree {
                format!("p-rank {stable} (all three methods agree)")
            } else {
                format!("FAIL: slope multiplicity {by_slope}, stable rank {stable}, fiber count {via_fiber}")
            };
            (Outcome { report: Value::Object(r), summary, pass: agree, svg: None }, args.out.report)
        }
        Command::Hodge { args } => {
            let c = load_crystal(&args.input)?;
            let hodge = c.hodge_polygon()?;
            let nu = c.newton_slopes()?;
            let hp = hodge.to_polygon();
            let above = nu.lies_above(&hp)? && nu.total_height() == hp.total_height();
            let mut r = crystal_header(&c, "hodge");
            r.insert("hodge".into(), json!(hodge.slopes));
            r.insert("newton".into(), json!(slope_strings(&nu)));
            r.insert("newton_above_hodge".into(), json!(above));
            let summary = if above {
                format!("Hodge {hp}, Newton {nu} lies above it")
            } else {
                format!("FAIL: Newton {nu} does not lie above Hodge {hp}")
            };
            (Outcome { report: Value::Object(r), summary, pass: above, svg: None }, args.out.report)
        }
        Command::Hom { args, b } => {
            let c = load_crystal(&args.input)?;
            let h = c.hom_group(b)?;
            let order = h.order().map(|o| o.to_string());
            let mut r = crystal_header(&c, "hom");
            r.insert("b".into(), json!(b));
            r.insert("exponents".into(), json!(h.exponents));
            r.insert("log_order".into(), json!(h.log_order()));
            r.insert("order".into(), json!(order));
            let factors: Vec<String> = h.exponents.iter().map(|k| format!("Z/{}^{k}", h.p)).collect();
            let group = if factors.is_empty() { "0".to_string() } else { factors.join(" x ") };
            (Outcome::ok(Value::Object(r), format!("Hom into the slope-{b} line: {group}")), args.out.report)
        }
        Command::Exterior { args, a } => {
            let c = load_crystal(&args.input)?;
            let e = c.exterior_power(a)?;
            let nu = e.newton_slopes()?;
            let expected = c.newton_slopes()?.exterior_power(a)?;
            let consistent = nu == expected;
            let mut r = crystal_header(&c, "exterior");
            r.insert("a".into(), json!(a));
            r.insert("result".into(), crystal_summary(&e, &nu));
            r.insert("consistent".into(), json!(consistent));
            let summary = if consistent {
                format!("exterior power {a}: rank {}, Newton {nu}", e.rank())
            } else {
                format!("FAIL: exterior power {a} has Newton {nu}, expected {expected}")
            };
            (Outcome { report: Value::Object(r), summary, pass: consistent, svg: None }, args.out.report)
        }
        Command::Iterate { args, q } => {
            let c = load_crystal(&args.input)?;
            let it = c.iterate(q)?;
            let nu = it.newton_slopes()?;
            let expected = c.newton_slopes()?.scale_iterate(q);
            let consistent = nu == expected;
            let mut r = crystal_header(&c, "iterate");
            r.insert("q".into(), json!(q));
            r.insert("result".into(), crystal_summary(&it, &nu));
            r.insert("consistent".into(), json!(consistent));
            let summary = if consistent {
                format!("iterate {q}: F^{} crystal with Newton {nu}", it.n())
            } else {
                format!("FAIL: iterate {q} has Newton {nu}, expected {expected}")
            };
            (Outcome { report: Value::Object(r), summary, pass: consistent, svg: None }, args.out.report)
        }
        Command::Split { args, b } => {
            let c = load_crystal(&args.input)?;
            let (e, k) = c.slope_splitting(b)?;
            let (ne, nk) = (e.newton_slopes()?, k.newton_slopes()?);
            let recovers = ne.direct_sum(&nk) == c.newton_slopes()?;
            let mut r = crystal_header(&c, "split");
            r.insert("b".into(), json!(b));
            r.insert("slope_b_part".into(), crystal_summary(&e, &ne));
            r.insert("complement".into(), crystal_summary(&k, &nk));
            r.insert("recovers".into(), json!(recovers));
            let summary = if recovers {
                format!("slope-{b} part {ne}, complement {nk}")
            } else {
                format!("FAIL: summands {ne} and {nk} do not recover the Newton polygon")
            };
            (Outcome { report: Value::Object(r), summary, pass: recovers, svg: None }, args.out.report)
        }
        Command::AsCount { system, point, level, stabilize, out } => {
            let sys = wire::parse_as_system(&read_json(&system)?)?;
            let k = sys.base();
            let coords = wire::parse_point(k, sys.params(), &point)?;
            let mut r = serde_json::Map::new();
            r.insert("command".into(), json!("as-count"));
            r.insert("p".into(), json!(k.p()));
            r.insert("point".into(), json!(coords.iter().map(|x| k.index(x).to_string()).collect::<Vec<_>>()));
            r.insert("degree".into(), json!(sys.degree()));
            r.insert("jacobian_identity".into(), json!(sys.jacobian_is_identity()?));
            let summary = if stabilize {
                let g = geometric_count(&sys, k, &coords)?;
                r.insert("geometric".into(), serde_json::to_value(&g).expect("serializable"));
                r.insert("count".into(), json!(g.count().to_string()));
                format!(
                    "geometric count {}^{} = {}, all rational after degree {}",
                    g.p,
                    g.log_p,
                    g.count(),
                    g.rationality_degree
                )
            } else {
                let lv = level.unwrap_or(k.deg());
                let field = if lv == k.deg() { k.clone() } else { make_field(k.p(), lv, 0)? };
                let fc = count_solutions(&sys, k, &coords, &field)?;
                r.insert("level".into(), json!(lv));
                r.insert("log_p".into(), json!(fc.log_p));
                r.insert("count".into(), json!(fc.count().to_string()));
                format!("{} solutions over F_{}^{lv}", fc.count(), k.p())
            };
            (Outcome::ok(Value::Object(r), summary), out.report)
        }
        Command::Stratify { family, max_m, strata, budget, svg: svg_path, out } => {
            let f = load_family(&family)?;
            let opts = parse_strata(&strata)?;
            let report = f.sweep(max_m, &opts, budget)?;
            let problems = report.check_partition();
            let mut summary =
                format!("{}: {} points over F_{}^m, m <= {max_m}", f.name(), report.records.len(), report.q);
            for (label, s) in &report.strata {
                let dim = s.dimension.as_ref().map(|d| format!(", dim ~ {:.2}", d.value)).unwrap_or_default();
                summary.push_str(&format!("\n  {label}: {:?}{dim}", s.counts.values().collect::<Vec<_>>()));
            }
            for p in &problems {
                summary.push_str(&format!("\n  FAIL: {p}"));
            }
            let mut value = serde_json::to_value(&report).expect("serializable");
            value["command"] = json!("stratify");
            value["partition_problems"] = json!(problems);
            let polygons: Vec<(String, NewtonPolygon)> = report
                .strata
                .values()
                .filter_map(|s| match &s.key {
                    StratumKey::Newton { polygon } => Some((s.key.label(), polygon.clone())),
                    _ => None,
                })
                .collect();
            let pass = problems.is_empty();
            let svg = svg_path.map(|p| (p, svg::render_polygons(&polygons)));
            (Outcome { report: value, summary, pass, svg }, out.report)
        }
        Command::Purity { family, target, max_m, budget, out } => {
            let f = load_family(&family)?;
            let key: StratumKey = target.parse()?;
            let opts = match &key {
                StratumKey::Newton { .. } => SweepOptions { newton: true, ..Default::default() },
                StratumKey::Prank { .. } => SweepOptions { prank: true, ..Default::default() },
                StratumKey::Break { point } => SweepOptions { breaks: vec![*point], ..Default::default() },
                StratumKey::AsCount { .. } => SweepOptions { as_count: true, ..Default::default() },
            };
            let sweep = f.sweep(max_m, &opts, budget)?;
            let pr = purity_from_sweep(&sweep, &key)?;
            let summary = format!("{} {}: {}", if pr.pass { "PASS" } else { "FAIL" }, pr.target, pr.verdict);
            let mut value = serde_json::to_value(&pr).expect("serializable");
            value["command"] = json!("purity");
            let pass = pr.pass;
            (Outcome { report: value, summary, pass, svg: None }, out.report)
        }
        Command::Verify { suite, seed, json: dest } => {
            if suite == "list" {
                let report = json!({"command": "verify", "suites": SUITES});
                return Ok((Outcome::ok(report, SUITES.join("\n")), dest));
            }
            let names: Vec<String> = if suite == "all" {
                SUITES.iter().map(|s| s.to_string()).collect()
            } else {
                suite.split(',').map(|s| s.trim().to_string()).collect()
            };
            if let Some(bad) = names.iter().find(|n| !SUITES.contains(&n.as_str())) {
                return Err(Failure::Input(format!("unknown suite {bad:?}; available: {}", SUITES.join(", "))));
            }
            let mut reports = Vec::new();
            let mut summary = Vec::new();
            for name in &names {
                let start = Instant::now();
                let rep = run_suite(name, seed)?;
                summary.push(format!(
                    "{} {name}: {} cases, {} failures, {:.2}s",
                    if rep.pass() { "PASS" } else { "FAIL" },
                    rep.cases,
                    rep.failure_count,
                    start.elapsed().as_secs_f64()
                ));
                for f in &rep.failures {
                    summary.push(format!("    {f}"));
                }
                reports.push(rep);
            }
            let pass = reports.iter().all(|r| r.pass());
            let report = json!({"command": "verify", "seed": seed, "pass": pass, "suites": reports});
            (Outcome { report, summary: summary.join("\n"), pass, svg: None }, dest)
        }
    };
    Ok((outcome, dest))
}

fn configure_threads(flag: Option<usize>) -> Result<(), Failure> {
    let n = match flag {
        Some(n) => Some(n),
        None => match std::env::var(THREADS_ENV) {
            Ok(v) => {
                Some(v.trim().parse().map_err(|_| Failure::Input(format!("{THREADS_ENV}={v:?} is not a number")))?)
            }
            Err(_) => None,
        },
    };
    if let Some(n) = n {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Input(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn emit(outcome: Outcome, dest: &str) -> Result<(), Failure> {
    let json = serde_json::to_string_pretty(&outcome.report).expect("serializable") + "\n";
    let write =
        |path: &Path, text: &str| fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())));
    if let Some((path, text)) = &outcome.svg {
        write(path, text)?;
    }
    if dest == "-" {
        print!("{json}");
        eprintln!("{}", outcome.summary);
    } else {
        write(Path::new(dest), &json)?;
        println!("{}", outcome.summary);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads(cli.threads).and_then(|()| run(cli.command)).and_then(|(outcome, dest)| {
        let pass = outcome.pass;
        emit(outcome, &dest).map(|()| pass)
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Math(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
