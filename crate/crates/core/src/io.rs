//! Text formats for recorded traces and difference equations.
//!
//! A trace file holds one or more blocks. Each block opens with
//! `# cnc-trace`, continues with `# <key> <value>` header lines and then has
//! one line per time step with the integer symbols of that step:
//!
//! ```text
//! # cnc-trace
//! # field gf2^8:0x11D
//! # sink d
//! # l 2
//! # start 0
//! # N 8
//! # alg 1
//! # m 3
//! # run 1
//! 0 0
//! 0 231
//! ```
//!
//! `field`, `sink`, `l` and `start` are required. Pilot recordings add `N`,
//! `alg`, `m` and, for reset pilots, the 1-based input `run`.
//!
//! An equation file holds blocks opening with `# cnc-equation`, each a list
//! of `key value` lines. `field`, `N`, `alg`, `sink`, `sources`, `P` and `G`
//! are required; other keys are kept as extras.

use indexmap::IndexMap;

use crate::error::{Error, Result};
use crate::field::{FieldSpec, GaloisField, Gf};
use crate::init::{Algorithm, DifferenceEquation, PilotTrace, SinkTrace};
use crate::network::ensure_unique;
use crate::poly::{Poly, SymbolSequence};
use crate::polymat::PolyMatrix;

const TRACE_MAGIC: &str = "# cnc-trace";
const EQUATION_MAGIC: &str = "# cnc-equation";

/// One recorded output sequence of one sink.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceBlock {
    pub field: FieldSpec,
    pub sink: String,
    pub seq: SymbolSequence,
    pub bound: Option<usize>,
    pub alg: Option<Algorithm>,
    pub input_dim: Option<usize>,
    pub run: Option<usize>,
}

impl TraceBlock {
    pub fn output(field: FieldSpec, sink: &str, seq: SymbolSequence) -> Self {
        TraceBlock { field, sink: sink.to_string(), seq, bound: None, alg: None, input_dim: None, run: None }
    }
}

fn split_blocks<'a>(text: &'a str, magic: &str) -> Result<Vec<Vec<(usize, &'a str)>>> {
    let mut blocks: Vec<Vec<(usize, &str)>> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if line == magic {
            blocks.push(Vec::new());
            continue;
        }
        match blocks.last_mut() {
            Some(b) => b.push((i + 1, line)),
            None => return Err(Error::Parse(format!("line {}: expected `{magic}`", i + 1))),
        }
    }
    if blocks.is_empty() {
        return Err(Error::Parse(format!("no `{magic}` block found")));
    }
    Ok(blocks)
}

fn header<'a>(headers: &'a IndexMap<String, String>, key: &str) -> Result<&'a str> {
    headers.get(key).map(String::as_str).ok_or_else(|| Error::Parse(format!("missing `{key}` header")))
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim().parse().map_err(|_| Error::Parse(format!("bad value `{v}` for `{key}`")))
}

fn opt_num<T: std::str::FromStr>(headers: &IndexMap<String, String>, key: &str) -> Result<Option<T>> {
    headers.get(key).map(|v| parse_num(key, v)).transpose()
}

pub fn parse_symbols(line: &str, f: &GaloisField) -> Result<Vec<Gf>> {
    line.split_whitespace()
        .map(|t| {
            let v: u32 = t.parse().map_err(|_| Error::Parse(format!("bad symbol `{t}`")))?;
            f.elem(v)
        })
        .collect()
}

pub fn format_symbols(v: &[Gf]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

pub fn parse_traces(text: &str) -> Result<Vec<TraceBlock>> {
    split_blocks(text, TRACE_MAGIC)?
        .into_iter()
        .map(|lines| {
            let mut headers = IndexMap::new();
            let mut data = Vec::new();
            for (no, line) in lines {
                if let Some(h) = line.strip_prefix('#') {
                    if !data.is_empty() {
                        return Err(Error::Parse(format!("line {no}: header after data")));
                    }
                    let h = h.trim();
                    let (k, v) = h.split_once(char::is_whitespace).unwrap_or((h, ""));
                    headers.insert(k.to_string(), v.trim().to_string());
                } else {
                    data.push((no, line));
                }
            }
            let field: FieldSpec = header(&headers, "field")?.parse()?;
            let gf = GaloisField::new(field)?;
            let l: usize = parse_num("l", header(&headers, "l")?)?;
            let start: i64 = parse_num("start", header(&headers, "start")?)?;
            let mut seq = SymbolSequence::new(start, l);
            for (no, line) in data {
                let v = parse_symbols(line, &gf).map_err(|e| Error::Parse(format!("line {no}: {e}")))?;
                seq.push(v).map_err(|e| Error::Parse(format!("line {no}: {e}")))?;
            }
            Ok(TraceBlock {
                field,
                sink: header(&headers, "sink")?.to_string(),
                seq,
                bound: opt_num(&headers, "N")?,
                alg: headers.get("alg").map(|v| v.parse()).transpose()?,
                input_dim: opt_num(&headers, "m")?,
                run: opt_num(&headers, "run")?,
            })
        })
        .collect()
}

pub fn write_traces(blocks: &[TraceBlock]) -> String {
    let mut out = String::new();
    for b in blocks {
        out.push_str(TRACE_MAGIC);
        out.push('\n');
        out.push_str(&format!("# field {}\n# sink {}\n# l {}\n# start {}\n", b.field, b.sink, b.seq.dim(), b.seq.start()));
        if let Some(n) = b.bound {
            out.push_str(&format!("# N {n}\n"));
        }
        if let Some(a) = b.alg {
            out.push_str(&format!("# alg {a}\n"));
        }
        if let Some(m) = b.input_dim {
            out.push_str(&format!("# m {m}\n"));
        }
        if let Some(r) = b.run {
            out.push_str(&format!("# run {r}\n"));
        }
        for v in b.seq.values() {
            out.push_str(&format_symbols(v));
            out.push('\n');
        }
    }
    out
}

pub fn pilot_blocks(trace: &PilotTrace) -> Vec<TraceBlock> {
    let mut out = Vec::new();
    for s in &trace.sinks {
        for (i, run) in s.runs.iter().enumerate() {
            out.push(TraceBlock {
                field: trace.field,
                sink: s.sink.clone(),
                seq: run.clone(),
                bound: Some(trace.bound),
                alg: Some(trace.alg),
                input_dim: Some(trace.input_dim),
                run: (trace.alg == Algorithm::Reset).then_some(i + 1),
            });
        }
    }
    out
}

/// Reassemble pilot recordings. Blocks of one sink must be contiguous; reset
/// runs must appear in input order.
pub fn pilot_trace_from_blocks(blocks: &[TraceBlock]) -> Result<PilotTrace> {
    let first = blocks.first().ok_or_else(|| Error::Parse("empty trace".into()))?;
    let need = |v: Option<usize>, key: &str| v.ok_or_else(|| Error::Parse(format!("pilot trace lacks `{key}`")));
    let bound = need(first.bound, "N")?;
    let input_dim = need(first.input_dim, "m")?;
    let alg = first.alg.ok_or_else(|| Error::Parse("pilot trace lacks `alg`".into()))?;
    let mut sinks: Vec<SinkTrace> = Vec::new();
    for b in blocks {
        if b.field != first.field {
            return Err(Error::FieldMismatch { expected: first.field.to_string(), found: b.field.to_string() });
        }
        if b.bound != Some(bound) || b.input_dim != Some(input_dim) || b.alg != Some(alg) {
            return Err(Error::Parse(format!("trace blocks for `{}` disagree on N, m or alg", b.sink)));
        }
        let same = sinks.last().is_some_and(|s| s.sink == b.sink);
        if !same {
            sinks.push(SinkTrace { sink: b.sink.clone(), output_dim: b.seq.dim(), runs: Vec::new() });
        }
        let s = sinks.last_mut().unwrap();
        if s.output_dim != b.seq.dim() {
            return Err(Error::Parse(format!("sink `{}` recorded with inconsistent widths", b.sink)));
        }
        if alg == Algorithm::Reset && b.run != Some(s.runs.len() + 1) {
            return Err(Error::Parse(format!("sink `{}`: reset runs out of order", b.sink)));
        }
        s.runs.push(b.seq.clone());
    }
    ensure_unique(sinks.iter().map(|s| s.sink.as_str()))?;
    Ok(PilotTrace { field: first.field, alg, bound, input_dim, sinks })
}

/// An equation together with any extra `key value` lines from its block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquationRecord {
    pub equation: DifferenceEquation,
    pub extras: IndexMap<String, String>,
}

fn format_sources(sources: &[(String, usize)]) -> String {
    if sources.is_empty() {
        return "-".into();
    }
    sources.iter().map(|(s, r)| format!("{s}:{r}")).collect::<Vec<_>>().join(" ")
}

fn parse_sources(text: &str) -> Result<Vec<(String, usize)>> {
    if text.trim() == "-" {
        return Ok(Vec::new());
    }
    text.split_whitespace()
        .map(|t| {
            let (s, r) = t.rsplit_once(':').ok_or_else(|| Error::Parse(format!("bad source `{t}`")))?;
            Ok((s.to_string(), parse_num("sources", r)?))
        })
        .collect()
}

pub fn write_equations(records: &[EquationRecord]) -> String {
    let mut out = String::new();
    for r in records {
        let eq = &r.equation;
        out.push_str(EQUATION_MAGIC);
        out.push('\n');
        out.push_str(&format!(
            "field {}\nN {}\nalg {}\nsink {}\nsources {}\nP {}\nG {}\n",
            eq.field,
            eq.bound,
            eq.alg,
            eq.sink,
            format_sources(&eq.sources),
            eq.p,
            eq.g
        ));
        for (k, v) in &r.extras {
            out.push_str(&format!("{k} {v}\n"));
        }
    }
    out
}

pub fn parse_equations(text: &str) -> Result<Vec<EquationRecord>> {
    split_blocks(text, EQUATION_MAGIC)?
        .into_iter()
        .map(|lines| {
            let mut kv = IndexMap::new();
            for (no, line) in lines {
                if line.starts_with('#') {
                    continue;
                }
                let (k, v) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
                if kv.insert(k.to_string(), v.trim().to_string()).is_some() {
                    return Err(Error::Parse(format!("line {no}: duplicate key `{k}`")));
                }
            }
            let field: FieldSpec = header(&kv, "field")?.parse()?;
            let gf = GaloisField::new(field)?;
            let sources = parse_sources(header(&kv, "sources")?)?;
            let p = Poly::parse(header(&kv, "P")?, &gf)?;
            if p.is_zero() {
                return Err(Error::Parse("P must be nonzero".into()));
            }
            let g_text = header(&kv, "G")?;
            let m: usize = sources.iter().map(|(_, r)| r).sum();
            let g = if g_text == "[]" {
                PolyMatrix::zeros(0, m)
            } else {
                PolyMatrix::parse(g_text, &gf)?
            };
            if g.cols() != m && g.rows() > 0 {
                return Err(Error::Parse(format!("G has {} columns, sources declare {m}", g.cols())));
            }
            let equation = DifferenceEquation {
                field,
                sink: header(&kv, "sink")?.to_string(),
                bound: parse_num("N", header(&kv, "N")?)?,
                alg: header(&kv, "alg")?.parse()?,
                sources,
                p,
                g,
            };
            for k in ["field", "N", "alg", "sink", "sources", "P", "G"] {
                kv.shift_remove(k);
            }
            Ok(EquationRecord { equation, extras: kv })
        })
        .collect()
}
