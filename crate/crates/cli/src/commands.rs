use std::fmt::Write as _;
use std::fs;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde_json::{json, Value};

use dyadic_core::bounds::{
    bad_square_excess, bad_square_prob, bad_square_threshold, dim3_has_fixed_point, expected_uncovered, iterate_map,
    ScalarMap,
};
use dyadic_core::chains::{
    build_principal_chain_tree, enumerate_chain_trees, enumerate_successors, verify_chain_tree, Chain,
};
use dyadic_core::genfun::{
    certify, certify_optimal, optimal_rate, search_certificate, search_optimal, Backend, DecayCertificate, Outcome,
    SearchLimits, DEFAULT_PRECISION_BITS, MAX_PRECISION_BITS,
};
use dyadic_core::rational::{approx_f64, format_decimal, format_rational};
use dyadic_core::simulate::{parse_grid, sample_config, sweep, to_csv};
use dyadic_core::{
    count_tilings, exact_t, extract_tiling, f_eval, f_poly, parse_rational, AvailabilityConfig, Error, Result, Tile,
    TileabilityTable,
};

use crate::EXIT_NOT_ESTABLISHED;

#[derive(Parser, Debug)]
#[command(name = "dyadic", version, about = "Random dyadic rectangle tilings: decide, simulate, count and certify")]
pub struct Cli {
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Monte Carlo estimates of the tiling probability.
    Simulate(SimulateArgs),
    /// Decide whether a configuration tiles the unit square.
    Decide(DecideArgs),
    /// Exact polynomials.
    Poly(PolyArgs),
    /// Decay certificates from the generating function.
    Certify(CertifyArgs),
    /// Scalar lower-bound calculators.
    Bounds(BoundsArgs),
    /// Enumerations: chain trees, successors, tiling counts.
    Enum(EnumArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate(_) => "simulate",
            Command::Decide(_) => "decide",
            Command::Poly(_) => "poly",
            Command::Certify(_) => "certify",
            Command::Bounds(_) => "bounds",
            Command::Enum(_) => "enum",
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Command::Simulate(a) => Some(a.seed),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutFormat {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BackendArg {
    Rational,
    Interval,
}

impl From<BackendArg> for Backend {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Rational => Backend::Rational,
            BackendArg::Interval => Backend::Interval,
        }
    }
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Orders, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub n: Vec<u32>,
    /// Probabilities as a comma-separated list of rationals or decimals.
    #[arg(long, conflicts_with = "grid", required_unless_present = "grid")]
    pub p: Option<String>,
    /// Probability grid `lo:hi:step`.
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "csv")]
    pub out: OutFormat,
    /// Print the sampled configuration of trial 0 instead of estimates
    /// (one order and one probability only).
    #[arg(long)]
    pub sample: bool,
}

#[derive(Args, Debug)]
pub struct DecideArgs {
    /// Configuration file in text or JSON form; `-` reads standard input.
    #[arg(long)]
    pub config: String,
    /// Also print a tiling or a principal chain tree.
    #[arg(long)]
    pub witness: bool,
}

#[derive(Args, Debug)]
#[command(group = clap::ArgGroup::new("which").required(true))]
pub struct PolyArgs {
    /// Exact tiling polynomial of order N.
    #[arg(long = "exact-T", value_name = "N", group = "which")]
    pub exact_t: Option<u32>,
    /// Permit order 3 (4.3 billion configurations).
    #[arg(long = "allow-n3")]
    pub allow_n3: bool,
    /// Expanded generating-function polynomial of depth N.
    #[arg(long = "f", value_name = "N", group = "which")]
    pub f: Option<u32>,
    #[arg(long, value_enum)]
    pub out: Option<OutFormat>,
}

#[derive(Args, Debug)]
pub struct CertifyArgs {
    #[arg(long, conflicts_with_all = ["q", "verify"])]
    pub p: Option<String>,
    #[arg(long, conflicts_with = "verify")]
    pub q: Option<String>,
    /// Fixed k; searched when absent.
    #[arg(long)]
    pub k: Option<u64>,
    /// Use the sharper rate condition `(X - Q_k)(1 - X) >= a_k`.
    #[arg(long)]
    pub optimal: bool,
    /// Candidate rate to check with --optimal at a fixed k.
    #[arg(long, requires_all = ["optimal", "k"])]
    pub x: Option<String>,
    /// Required rate: the certified X must not exceed it.
    #[arg(long)]
    pub target: Option<String>,
    /// Bisection tolerance for the optimal rate.
    #[arg(long, default_value = "1/1000000")]
    pub tolerance: String,
    #[arg(long, value_enum, default_value = "rational")]
    pub backend: BackendArg,
    #[arg(long = "precision-bits", default_value_t = DEFAULT_PRECISION_BITS)]
    pub precision_bits: u32,
    /// Largest precision reached by automatic escalation.
    #[arg(long = "max-bits", default_value_t = MAX_PRECISION_BITS)]
    pub max_bits: u32,
    #[arg(long = "k-max", default_value_t = SearchLimits::default().k_max)]
    pub k_max: u64,
    /// Also write the transcript to this file.
    #[arg(long)]
    pub transcript: Option<String>,
    /// Re-check a transcript file instead of certifying.
    #[arg(long)]
    pub verify: Option<String>,
    /// With --verify: only re-check the recorded inequalities, without
    /// recomputing the sequence.
    #[arg(long = "no-recompute", requires = "verify")]
    pub no_recompute: bool,
}

#[derive(Args, Debug)]
pub struct BoundsArgs {
    #[command(subcommand)]
    pub which: BoundsCommand,
}

#[derive(Subcommand, Debug)]
pub enum BoundsCommand {
    /// Root of `1 - p + p(1-p)^2 = 1/4`.
    Threshold {
        #[arg(long, default_value = "1/1000000")]
        tolerance: String,
    },
    /// Expected number of uncovered cells.
    Uncovered {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        p: String,
    },
    /// Probability that a cell is bad.
    BadSquare {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        p: String,
    },
    /// Iterate a scalar map.
    Iterate {
        #[arg(long, value_enum)]
        map: MapArg,
        #[arg(long)]
        start: String,
        #[arg(long, default_value_t = 20)]
        steps: usize,
        /// Offset for the `dim3` map.
        #[arg(long, required_if_eq("map", "dim3"))]
        p: Option<String>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MapArg {
    Trivial,
    Fkg,
    Dim3,
}

#[derive(Args, Debug)]
pub struct EnumArgs {
    #[command(subcommand)]
    pub which: EnumCommand,
}

#[derive(Subcommand, Debug)]
pub enum EnumCommand {
    /// Count (and optionally list) chain trees of depth N.
    ChainTrees {
        #[arg(long)]
        n: u32,
        /// Print every tree as a JSON line.
        #[arg(long)]
        list: bool,
    },
    /// Successors of a chain, counted by number of split bonds.
    Successors {
        /// Bonds of the chain `[order b, core (b,b,0,0)]`.
        #[arg(long, conflicts_with_all = ["order", "core"])]
        b: Option<u32>,
        #[arg(long, requires = "core")]
        order: Option<u32>,
        /// Core tile as `i,j,a,b`.
        #[arg(long, requires = "order")]
        core: Option<String>,
        #[arg(long)]
        list: bool,
    },
    /// Number of tilings of the unit square by order-N tiles.
    Tilings {
        #[arg(long)]
        n: u32,
    },
}

pub fn run(command: Command) -> Result<u8> {
    match command {
        Command::Simulate(a) => simulate(a),
        Command::Decide(a) => decide(a),
        Command::Poly(a) => poly(a),
        Command::Certify(a) => certify_cmd(a),
        Command::Bounds(a) => bounds(a.which),
        Command::Enum(a) => enumerate(a.which),
    }
}

fn read_input(path: &str) -> Result<String> {
    let text = if path == "-" { std::io::read_to_string(std::io::stdin()) } else { fs::read_to_string(path) };
    text.map_err(|e| Error::Parse(format!("cannot read {path}: {e}")))
}

fn print_json(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("values serialize"));
}

fn simulate(a: SimulateArgs) -> Result<u8> {
    let ps = match (&a.p, &a.grid) {
        (Some(p), _) => parse_grid(p)?,
        (None, Some(g)) => parse_grid(g)?,
        (None, None) => unreachable!("clap requires one"),
    };
    if a.sample {
        let ([n], [p]) = (a.n.as_slice(), ps.as_slice()) else {
            return Err(Error::Parse("--sample takes a single order and probability".into()));
        };
        let cfg = sample_config(*n, p, a.seed)?;
        match a.out {
            OutFormat::Json => println!("{}", cfg.to_json()?),
            OutFormat::Csv => print!("{}", cfg.to_text()),
        }
        return Ok(0);
    }
    let rows = sweep(&a.n, &ps, a.trials, a.seed)?;
    match a.out {
        OutFormat::Csv => print!("{}", to_csv(&rows)),
        OutFormat::Json => print_json(&serde_json::to_value(&rows)?),
    }
    Ok(0)
}

fn decide(a: DecideArgs) -> Result<u8> {
    let cfg = AvailabilityConfig::parse(&read_input(&a.config)?)?;
    let table = TileabilityTable::compute(&cfg);
    let tileable = table.is_tileable(&Tile::UNIT);
    println!("{}", if tileable { "tileable" } else { "blocked" });
    if a.witness {
        if tileable {
            let tiling = extract_tiling(&Tile::UNIT, &cfg)?.expect("tileable configurations have tilings");
            let tiles: Vec<String> = tiling.tiles().iter().map(Tile::to_string).collect();
            println!("{}", json!({"tiling": {"order": tiling.order(), "tiles": tiles}}));
        } else {
            let tree = build_principal_chain_tree(&cfg).expect("blocked configurations have principal trees");
            let report = verify_chain_tree(&tree, Some(&cfg));
            let tree: Value = serde_json::from_str(&tree.to_json()?)?;
            println!("{}", json!({"principal_chain_tree": tree, "verification": report}));
        }
    }
    Ok(0)
}

fn poly(a: PolyArgs) -> Result<u8> {
    let json_out = a.out == Some(OutFormat::Json);
    if let Some(n) = a.exact_t {
        let t = exact_t(n, a.allow_n3)?;
        if json_out {
            let coeffs: Vec<String> = t.coefficients().iter().map(ToString::to_string).collect();
            print_json(&json!({"n": n, "T": t.to_string(), "coefficients": coeffs}));
        } else {
            println!("{t}");
        }
    } else if let Some(n) = a.f {
        let f = f_poly(n)?;
        if json_out {
            let terms: Vec<Value> = f
                .terms()
                .iter()
                .map(|(&(dq, dz), c)| json!({"q": dq, "z": dz, "coefficient": c.to_string()}))
                .collect();
            print_json(&json!({"n": n, "f": f.to_string(), "terms": terms}));
        } else {
            println!("{f}");
        }
    }
    Ok(0)
}

fn certify_cmd(a: CertifyArgs) -> Result<u8> {
    if let Some(path) = &a.verify {
        return verify_transcript(&read_input(path)?, !a.no_recompute);
    }
    let q = match (&a.p, &a.q) {
        (Some(p), None) => BigRational::one() - parse_rational(p)?,
        (None, Some(q)) => parse_rational(q)?,
        _ => return Err(Error::Parse("give exactly one of --p and --q".into())),
    };
    let target = a.target.as_deref().map(parse_rational).transpose()?;
    let tolerance = parse_rational(&a.tolerance)?;
    let backend = Backend::from(a.backend);
    let bits = a.precision_bits;
    let limits = SearchLimits { k_max: a.k_max, max_bits: a.max_bits };
    let mut outcome = match (a.k, a.optimal) {
        (Some(k), false) => certify(&q, k, backend, bits)?,
        (Some(k), true) => match &a.x {
            Some(x) => certify_optimal(&q, k, &parse_rational(x)?, backend, bits)?,
            None => optimal_rate(&q, k, backend, bits, &tolerance)?,
        },
        (None, false) => search_certificate(&q, backend, bits, limits, target.as_ref())?,
        (None, true) => search_optimal(&q, backend, bits, limits, target.as_ref(), &tolerance)?,
    };
    if let (Some(t), Some(cert)) = (&target, outcome.certificate()) {
        if cert.rate > *t {
            outcome = Outcome::NotEstablished {
                k: cert.k,
                reason: format!("certified X = {} exceeds target {}", format_rational(&cert.rate), format_rational(t)),
            };
        }
    }
    let text = outcome.to_json()?;
    println!("{text}");
    if let Some(path) = &a.transcript {
        fs::write(path, format!("{text}\n")).map_err(|e| Error::Parse(format!("cannot write {path}: {e}")))?;
    }
    Ok(if outcome.certificate().is_some() { 0 } else { EXIT_NOT_ESTABLISHED })
}

fn verify_transcript(text: &str, recompute: bool) -> Result<u8> {
    let cert = DecayCertificate::from_json(text)?;
    let result = cert.verify(recompute);
    let mut doc = json!({
        "status": if result.is_ok() { "valid" } else { "invalid" },
        "p": format_rational(&cert.p()),
        "k": cert.k,
        "X": format_rational(&cert.rate),
        "recomputed": recompute,
    });
    if let Err(reason) = &result {
        doc["reason"] = reason.clone().into();
    }
    print_json(&doc);
    Ok(if result.is_ok() { 0 } else { EXIT_NOT_ESTABLISHED })
}

fn exact_json(r: &BigRational) -> Value {
    json!({"exact": format_rational(r), "decimal": format_decimal_or_approx(r)})
}

fn format_decimal_or_approx(r: &BigRational) -> Value {
    let d = format_decimal(r);
    if d.contains('/') {
        approx_f64(r).into()
    } else {
        d.into()
    }
}

fn bounds(which: BoundsCommand) -> Result<u8> {
    match which {
        BoundsCommand::Threshold { tolerance } => {
            let bracket = bad_square_threshold(&parse_rational(&tolerance)?)?;
            print_json(&json!({
                "threshold": format_rational(bracket.value()),
                "threshold_approx": approx_f64(bracket.value()),
                "bracket": bracket,
            }));
        }
        BoundsCommand::Uncovered { n, p } => {
            let p = parse_rational(&p)?;
            let e = expected_uncovered(n, &p)?;
            print_json(&json!({"n": n, "p": format_rational(&p), "expected_uncovered": exact_json(&e)}));
        }
        BoundsCommand::BadSquare { n, p } => {
            let p = parse_rational(&p)?;
            let prob = bad_square_prob(n, &p)?;
            let cells = BigRational::from_integer(num_bigint::BigInt::from(4).pow(n));
            print_json(&json!({
                "n": n,
                "p": format_rational(&p),
                "bad_square_prob": exact_json(&prob),
                "expected_bad_cells": exact_json(&(prob * cells)),
                "excess": exact_json(&bad_square_excess(&p)),
            }));
        }
        BoundsCommand::Iterate { map, start, steps, p } => {
            let map = match map {
                MapArg::Trivial => ScalarMap::Trivial,
                MapArg::Fkg => ScalarMap::Fkg,
                MapArg::Dim3 => ScalarMap::Dim3 { p: parse_rational(p.as_deref().unwrap_or_default())? },
            };
            let report = iterate_map(&map, &parse_rational(&start)?, steps)?;
            let mut doc = serde_json::to_value(&report)?;
            if let ScalarMap::Dim3 { p } = &map {
                doc["has_fixed_point"] = dim3_has_fixed_point(p).into();
            }
            print_json(&doc);
        }
    }
    Ok(0)
}

fn enumerate(which: EnumCommand) -> Result<u8> {
    match which {
        EnumCommand::ChainTrees { n, list } => {
            let trees = enumerate_chain_trees(n)?;
            if list {
                for t in &trees {
                    println!("{}", t.to_json()?);
                }
            }
            let one = BigRational::one();
            let f = f_eval(n, &one, &one);
            print_json(&json!({"n": n, "count": trees.len(), "f_n(1,1)": format_rational(&f)}));
        }
        EnumCommand::Successors { b, order, core, list } => {
            let chain = match (b, order, core) {
                (Some(b), _, _) => Chain::new(b, Tile::new(b, b, 0, 0)?)?,
                (None, Some(k), Some(core)) => Chain::new(k, core.parse()?)?,
                _ => Chain::unit(),
            };
            let mut by_splits = vec![0u64; chain.bonds() as usize + 1];
            let mut lines = String::new();
            for s in enumerate_successors(&chain) {
                by_splits[s.split_count() as usize] += 1;
                if list {
                    let tiles: Vec<String> = s.tiles().iter().map(Tile::to_string).collect();
                    let _ = writeln!(lines, "{}", json!({"splits": s.split_count(), "tiles": tiles}));
                }
            }
            print!("{lines}");
            print_json(&json!({
                "order": chain.order(),
                "core": chain.core().to_string(),
                "bonds": chain.bonds(),
                "total": by_splits.iter().sum::<u64>(),
                "by_splits": by_splits,
            }));
        }
        EnumCommand::Tilings { n } => {
            let count = count_tilings(n)?;
            let approx = count.to_f64().filter(|x| x.is_finite());
            print_json(&json!({"n": n, "count": count.to_string(), "approx": approx}));
        }
    }
    Ok(0)
}
