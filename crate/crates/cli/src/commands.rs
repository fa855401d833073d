use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::Args;
use indexmap::IndexMap;

use cnc_core::capacity::enumerate_region;
use cnc_core::decode::{build_plan, decode_stream};
use cnc_core::init::{self, Algorithm, InitOptions, InitialState};
use cnc_core::io::{self, EquationRecord, TraceBlock};
use cnc_core::network::InputKey;
use cnc_core::{Error, GaloisField, Gf, NetworkSpec, Poly, SymbolSequence, TopologyFile};

use crate::{UsageError, EXIT_INIT_FAILURE, EXIT_RANK_DEFICIENT};

#[derive(Args, Debug)]
pub struct GenKernelsArgs {
    /// Topology file; kernels it already lists are kept.
    pub topology: PathBuf,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Options shared by every command that loads a topology.
#[derive(Args, Debug, Clone)]
pub struct NetworkArgs {
    /// Override the declared edge bound N.
    #[arg(long = "N", value_name = "N")]
    pub bound: Option<usize>,
    /// Source rates to use, e.g. `s1=1,s2=1`.
    #[arg(long, value_name = "NODE=RATE,...")]
    pub rates: Option<String>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    pub topology: PathBuf,
    #[command(flatten)]
    pub net: NetworkArgs,
    #[arg(long, default_value_t = 20)]
    pub steps: usize,
    /// Send a single 1 on this input at n = 0, e.g. `u:s2:1`.
    #[arg(long, conflicts_with = "seed")]
    pub impulse: Option<String>,
    /// Send uniformly random inputs drawn from this seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Initial edge symbols: `zero` or comma-separated integers.
    #[arg(long, default_value = "zero")]
    pub x0: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the input sequence as a trace.
    #[arg(long)]
    pub inputs_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct InitArgs {
    pub topology: PathBuf,
    #[command(flatten)]
    pub net: NetworkArgs,
    #[arg(long, value_parser = ["1", "2"])]
    pub alg: Option<String>,
    /// Initial edge symbols for algorithm 2: `zero` or comma-separated integers.
    #[arg(long)]
    pub x0: Option<String>,
    /// Use this polynomial instead of the canonical solution, e.g. `209z^2+z^5`.
    #[arg(long)]
    pub alpha: Option<String>,
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    #[arg(long, default_value_t = 100)]
    pub horizon: usize,
    /// Seed for the verification streams.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Read pilot recordings from this trace file instead of simulating.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Write the pilot recordings to this trace file.
    #[arg(long)]
    pub record: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct DecodeArgs {
    /// Equation file written by `init`.
    #[arg(long)]
    pub plan: PathBuf,
    /// Received symbols written by `simulate`.
    #[arg(long)]
    pub trace: PathBuf,
    #[arg(long)]
    pub sink: Option<String>,
    /// File with the known inputs u[0..=N], one line per step.
    #[arg(long)]
    pub prefix: Option<PathBuf>,
    /// Last received time to use; defaults to the end of the trace.
    #[arg(long)]
    pub upto: Option<i64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CapacityArgs {
    /// Topology to initialize; not needed with `--equations`.
    pub topology: Option<PathBuf>,
    #[command(flatten)]
    pub net: NetworkArgs,
    /// Use equations written by `init` instead of running the pilots.
    #[arg(long, conflicts_with = "topology")]
    pub equations: Option<PathBuf>,
    #[arg(long, value_parser = ["1", "2"], default_value = "1")]
    pub alg: String,
    #[arg(long, default_value = "zero")]
    pub x0: String,
    /// Print every achievable tuple, not only the maximal ones.
    #[arg(long)]
    pub full: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_network(path: &Path, net: &NetworkArgs) -> Result<NetworkSpec> {
    let mut spec = NetworkSpec::from_json(&read(path)?).with_context(|| format!("loading {}", path.display()))?;
    if let Some(n) = net.bound {
        spec = spec.with_bound(n)?;
    }
    if let Some(rates) = &net.rates {
        for item in rates.split(',').filter(|s| !s.trim().is_empty()) {
            let (node, r) = item
                .split_once('=')
                .ok_or_else(|| UsageError(format!("bad rate `{item}`, expected NODE=RATE")))?;
            let r: usize = r.trim().parse().map_err(|_| UsageError(format!("bad rate `{item}`")))?;
            let current = spec.nodes()[spec.node_index(node.trim())?].source_rate.unwrap_or(0);
            if r > current {
                return Err(UsageError(format!("rate {r} for `{node}` exceeds its declared rate {current}")).into());
            }
            spec = spec.with_source_rate(node.trim(), r)?;
        }
    }
    Ok(spec)
}

pub fn gen_kernels(args: &GenKernelsArgs) -> Result<u8> {
    let mut topo = TopologyFile::from_json(&read(&args.topology)?)?;
    topo.seed = Some(args.seed);
    let spec = NetworkSpec::from_topology(&topo)?;
    emit(args.out.as_deref(), &spec.to_topology().to_json())?;
    Ok(0)
}

pub fn simulate(args: &SimulateArgs) -> Result<u8> {
    use rand::SeedableRng;

    let spec = load_network(&args.topology, &args.net)?;
    let f = spec.field();
    let ss = spec.state_space();
    let m = ss.input_dim();
    let mut inputs = vec![vec![Gf::ZERO; m]; args.steps];
    if let Some(key) = &args.impulse {
        let col = spec.input_column_of(&key.parse::<InputKey>()?)?;
        if let Some(first) = inputs.first_mut() {
            first[col] = Gf::ONE;
        }
    } else if let Some(seed) = args.seed {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        for u in &mut inputs {
            for v in u.iter_mut() {
                *v = f.random(&mut rng);
            }
        }
    }
    let mut state = match InitialState::parse(&args.x0, f)? {
        InitialState::Zero => ss.zero_state(),
        InitialState::Given(x) => ss.state(x)?,
    };
    let outs = ss.run(&mut state, &inputs)?;
    let blocks: Vec<TraceBlock> = ss
        .sinks
        .iter()
        .zip(outs)
        .map(|(s, y)| TraceBlock::output(f.spec(), &s.name, y))
        .collect();
    emit(args.out.as_deref(), &io::write_traces(&blocks))?;
    if let Some(p) = &args.inputs_out {
        let u = SymbolSequence::from_values(0, m, inputs)?;
        emit(Some(p), &io::write_traces(&[TraceBlock::output(f.spec(), "u", u)]))?;
    }
    Ok(0)
}

pub fn init(args: &InitArgs) -> Result<u8> {
    let spec = load_network(&args.topology, &args.net)?;
    let f = spec.field();
    let requested: Option<Algorithm> = args.alg.as_deref().map(str::parse).transpose()?;
    let trace = match &args.trace {
        Some(path) => {
            let t = io::pilot_trace_from_blocks(&io::parse_traces(&read(path)?)?)?;
            if requested.is_some_and(|a| a != t.alg) {
                return Err(UsageError(format!("--alg {} given, trace was recorded with {}", requested.unwrap(), t.alg)).into());
            }
            if args.net.bound.is_some_and(|n| n != t.bound) {
                return Err(UsageError(format!("--N differs from the trace's N = {}", t.bound)).into());
            }
            t
        }
        None => {
            let ss = spec.state_space();
            match requested.unwrap_or(Algorithm::Reset) {
                Algorithm::Reset => {
                    if args.x0.is_some() {
                        return Err(UsageError("--x0 only applies to --alg 2".into()).into());
                    }
                    init::collect_reset(&ss, spec.bound())?
                }
                Algorithm::NoReset => {
                    let x0 = InitialState::parse(args.x0.as_deref().unwrap_or("zero"), f)?;
                    init::collect_no_reset(&ss, spec.bound(), &x0)?
                }
            }
        }
    };
    if let Some(p) = &args.record {
        emit(Some(p), &io::write_traces(&io::pilot_blocks(&trace)))?;
    }
    let alpha = args.alpha.as_deref().map(|a| Poly::parse(a, f)).transpose()?;
    let inits = init::initialize(&trace, &init::sources_of(&spec), f, &InitOptions { alpha })?;

    let mut records = Vec::with_capacity(inits.len());
    let mut unverified = Vec::new();
    let mut deficient = Vec::new();
    for si in inits {
        let eq = si.equation;
        let verified = init::verify_difference_equation(&eq, &spec, args.trials, args.horizon, args.seed)?;
        let rank = eq.g.rank_over_ring(f);
        let mut extras = IndexMap::new();
        extras.insert("verified".to_string(), verified.to_string());
        extras.insert("rank".to_string(), rank.to_string());
        match build_plan(&eq, None, f) {
            Ok(plan) => {
                extras.insert("decodable".to_string(), "true".to_string());
                extras.insert("retained".to_string(), join(&plan.retained));
                extras.insert("delay".to_string(), plan.delay.to_string());
                extras.insert("lookahead".to_string(), plan.lookahead().to_string());
                extras.insert("f".to_string(), plan.normalized_f(f).to_string());
            }
            Err(Error::Undecodable { .. }) => {
                extras.insert("decodable".to_string(), "false".to_string());
                deficient.push((eq.sink.clone(), rank, eq.input_dim()));
            }
            Err(e) => return Err(e.into()),
        }
        if !verified {
            unverified.push(eq.sink.clone());
        }
        records.push(EquationRecord { equation: eq, extras });
    }
    emit(args.out.as_deref(), &io::write_equations(&records))?;
    if !unverified.is_empty() {
        eprintln!("error: equation failed verification at {}", unverified.join(", "));
        return Ok(EXIT_INIT_FAILURE);
    }
    if !deficient.is_empty() {
        for (sink, rank, m) in deficient {
            eprintln!(
                "sink {sink}: transfer matrix rank {rank} < {m} inputs; reduce source rates with --rates \
                 (see `cnc capacity`) or choose other kernels"
            );
        }
        return Ok(EXIT_RANK_DEFICIENT);
    }
    Ok(0)
}

fn join(v: &[usize]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
}

pub fn decode(args: &DecodeArgs) -> Result<u8> {
    let records = io::parse_equations(&read(&args.plan)?)?;
    let record = match &args.sink {
        Some(s) => records
            .iter()
            .find(|r| &r.equation.sink == s)
            .ok_or_else(|| Error::Parse(format!("plan has no sink `{s}`")))?,
        None if records.len() == 1 => &records[0],
        None => return Err(UsageError("plan holds several sinks; pick one with --sink".into()).into()),
    };
    let eq = &record.equation;
    let blocks = io::parse_traces(&read(&args.trace)?)?;
    let block = blocks
        .iter()
        .find(|b| b.sink == eq.sink)
        .ok_or_else(|| Error::Parse(format!("trace has no sink `{}`", eq.sink)))?;
    if block.field != eq.field {
        return Err(Error::FieldMismatch { expected: eq.field.to_string(), found: block.field.to_string() }.into());
    }
    if block.seq.dim() != eq.output_dim() {
        return Err(Error::DimensionMismatch(format!(
            "trace for `{}` has {} symbols per step, plan expects {}",
            eq.sink,
            block.seq.dim(),
            eq.output_dim()
        ))
        .into());
    }
    let f = GaloisField::new(eq.field)?;
    let prefix = match &args.prefix {
        Some(p) => {
            let rows = read(p)?
                .lines()
                .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
                .map(|l| io::parse_symbols(l, &f))
                .collect::<cnc_core::Result<Vec<_>>>()?;
            Some(SymbolSequence::from_values(0, eq.input_dim(), rows)?)
        }
        None => None,
    };
    let plan = build_plan(eq, prefix, &f)?;
    let upto = args.upto.unwrap_or(block.seq.end() - 1);
    let u = decode_stream(&plan, &block.seq, upto, &f)?;
    let text: String = u.values().iter().map(|v| io::format_symbols(v) + "\n").collect();
    emit(args.out.as_deref(), &text)?;
    Ok(0)
}

fn tuple(t: &[usize]) -> String {
    format!("({})", t.iter().map(ToString::to_string).collect::<Vec<_>>().join(","))
}

pub fn capacity(args: &CapacityArgs) -> Result<u8> {
    let (equations, f) = match (&args.equations, &args.topology) {
        (Some(path), _) => {
            let eqs: Vec<_> = io::parse_equations(&read(path)?)?.into_iter().map(|r| r.equation).collect();
            let f = GaloisField::new(eqs[0].field)?;
            (eqs, f)
        }
        (None, Some(path)) => {
            let spec = load_network(path, &args.net)?;
            let alg: Algorithm = args.alg.parse()?;
            let x0 = InitialState::parse(&args.x0, spec.field())?;
            let eqs = init::run(&spec, alg, &x0, &InitOptions::default())?.into_iter().map(|i| i.equation).collect();
            (eqs, spec.field().clone())
        }
        (None, None) => return Err(UsageError("give a topology or --equations".into()).into()),
    };
    let region = enumerate_region(&equations, &f)?;
    let mut text = format!("# sources {}\n# rates {}\n# maximal\n", region.sources.join(" "), join(&region.rates));
    for t in region.maximal() {
        text.push_str(&tuple(&t));
        text.push('\n');
    }
    if args.full {
        text.push_str("# region\n");
        for t in &region.region {
            text.push_str(&tuple(t));
            text.push('\n');
        }
    }
    emit(args.out.as_deref(), &text)?;
    Ok(0)
}
