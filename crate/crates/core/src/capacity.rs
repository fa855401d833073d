//! Achievable rate tuples from the sinks' transfer matrices.
//!
//! A tuple `(R'_s)` is achievable at a sink when, for every source `s`, some
//! `R'_s` columns of that source's block of `G_d` can be chosen so that all
//! chosen columns together are linearly independent over `F[z]`. The region
//! is the set of tuples achievable at every sink.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::field::GaloisField;
use crate::init::DifferenceEquation;
use crate::poly::Poly;
use crate::polymat::{columns_independent, PolyMatrix};

/// Exhaustive enumeration is refused above this many inputs.
pub const MAX_INPUTS: usize = 12;

/// Contiguous column blocks of `g`, one per source in order.
pub fn split_by_source(g: &PolyMatrix, rates: &[usize]) -> Result<Vec<PolyMatrix>> {
    let total: usize = rates.iter().sum();
    if total != g.cols() {
        return Err(Error::DimensionMismatch(format!(
            "source rates add up to {total}, matrix has {} columns",
            g.cols()
        )));
    }
    let mut start = 0;
    Ok(rates
        .iter()
        .map(|&r| {
            let block = g.select_columns(&(start..start + r).collect::<Vec<_>>());
            start += r;
            block
        })
        .collect())
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::with_capacity(k), &mut out);
    out
}

/// Whether `tuple` is achievable given one sink's per-source blocks.
pub fn tuple_achievable(blocks: &[PolyMatrix], tuple: &[usize], f: &GaloisField) -> Result<bool> {
    if blocks.len() != tuple.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} rates given for {} sources",
            tuple.len(),
            blocks.len()
        )));
    }
    for (b, &r) in blocks.iter().zip(tuple) {
        if r > b.cols() {
            return Err(Error::DimensionMismatch(format!("rate {r} exceeds the {} available inputs", b.cols())));
        }
    }
    let rows = blocks.first().map_or(0, PolyMatrix::rows);
    if tuple.iter().sum::<usize>() > rows {
        return Ok(false);
    }
    for (b, &r) in blocks.iter().zip(tuple) {
        if r > 0 && b.rank_over_ring(f) < r {
            return Ok(false);
        }
    }
    let choices: Vec<Vec<Vec<usize>>> =
        blocks.iter().zip(tuple).map(|(b, &r)| combinations(b.cols(), r)).collect();
    let mut pick = vec![0usize; blocks.len()];
    loop {
        let columns: Vec<Vec<Poly>> = blocks
            .iter()
            .zip(&choices)
            .zip(&pick)
            .flat_map(|((b, c), &i)| c[i].iter().map(move |&col| b.column(col)))
            .collect();
        if columns.is_empty() || columns_independent(&columns, f)? {
            return Ok(true);
        }
        // odometer over the per-source choices
        let mut s = 0;
        loop {
            if s == pick.len() {
                return Ok(false);
            }
            pick[s] += 1;
            if pick[s] < choices[s].len() {
                break;
            }
            pick[s] = 0;
            s += 1;
        }
    }
}

fn all_tuples(rates: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &r in rates {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..=r).map(move |v| {
                    let mut t = t.clone();
                    t.push(v);
                    t
                })
            })
            .collect();
    }
    out
}

/// Every achievable tuple for one sink.
pub fn sink_region(blocks: &[PolyMatrix], f: &GaloisField) -> Result<BTreeSet<Vec<usize>>> {
    let rates: Vec<usize> = blocks.iter().map(PolyMatrix::cols).collect();
    let m: usize = rates.iter().sum();
    if m > MAX_INPUTS {
        return Err(Error::TooLarge(format!(
            "rate enumeration over {m} inputs is exponential; at most {MAX_INPUTS} are supported"
        )));
    }
    let mut out = BTreeSet::new();
    for t in all_tuples(&rates) {
        if tuple_achievable(blocks, &t, f)? {
            out.insert(t);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RateRegion {
    pub sources: Vec<String>,
    /// Rates the transfer matrices were measured with.
    pub rates: Vec<usize>,
    pub per_sink: Vec<(String, BTreeSet<Vec<usize>>)>,
    /// Tuples achievable at every sink.
    pub region: BTreeSet<Vec<usize>>,
}

impl RateRegion {
    pub fn contains(&self, tuple: &[usize]) -> bool {
        self.region.contains(tuple)
    }

    /// Tuples not dominated coordinatewise by another tuple in the region.
    pub fn maximal(&self) -> Vec<Vec<usize>> {
        maximal_tuples(&self.region)
    }

    pub fn is_downward_closed(&self) -> bool {
        is_downward_closed(&self.region) && self.per_sink.iter().all(|(_, s)| is_downward_closed(s))
    }
}

pub fn maximal_tuples(set: &BTreeSet<Vec<usize>>) -> Vec<Vec<usize>> {
    let dominates = |a: &Vec<usize>, b: &Vec<usize>| a != b && a.iter().zip(b).all(|(x, y)| x >= y);
    set.iter().filter(|t| !set.iter().any(|o| dominates(o, t))).cloned().collect()
}

pub fn is_downward_closed(set: &BTreeSet<Vec<usize>>) -> bool {
    set.iter().all(|t| {
        (0..t.len()).all(|i| {
            t[i] == 0 || {
                let mut s = t.clone();
                s[i] -= 1;
                set.contains(&s)
            }
        })
    })
}

/// Intersect the per-sink regions of equations measured with the same
/// source rates.
pub fn enumerate_region(equations: &[DifferenceEquation], f: &GaloisField) -> Result<RateRegion> {
    let Some(first) = equations.first() else {
        return Err(Error::DimensionMismatch("no sinks to evaluate".into()));
    };
    let sources: Vec<String> = first.sources.iter().map(|(s, _)| s.clone()).collect();
    let rates = first.rates();
    let mut per_sink = Vec::with_capacity(equations.len());
    for eq in equations {
        if eq.sources != first.sources {
            return Err(Error::DimensionMismatch(format!(
                "sink `{}` was initialized with different source rates",
                eq.sink
            )));
        }
        let blocks = split_by_source(&eq.g, &rates)?;
        per_sink.push((eq.sink.clone(), sink_region(&blocks, f)?));
    }
    let mut region = per_sink[0].1.clone();
    for (_, s) in &per_sink[1..] {
        region = region.intersection(s).cloned().collect();
    }
    Ok(RateRegion { sources, rates, per_sink, region })
}
