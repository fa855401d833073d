//! Sequential decoding of the source streams from what a sink receives.
//!
//! With `G~` a square full-rank row selection of `G`, multiplying the
//! equation by `adj(G~)` gives `w = adj(G~) q = f(z) u` where `q = P y`
//! (retained rows) and `f = det G~`. Writing `f = sum_i f_i z^i` with degree
//! `k`, each input symbol follows from earlier ones:
//!
//! ```text
//! u[n] = f_k^-1 (w[n-k] - sum_{i<k} f_i u[n-k+i])
//! ```
//!
//! Equations from the no-reset procedure only hold for `n >= 1`; for earlier
//! times `q[n] = (G u)[n]` is computed from the known prefix `u[0..=N]`.

use crate::error::{Error, Result};
use crate::field::{GaloisField, Gf};
use crate::init::{Algorithm, DifferenceEquation};
use crate::linalg::FieldMatrix;
use crate::poly::{Poly, SymbolSequence};
use crate::polymat::PolyMatrix;

/// Everything a sink needs to run the recursion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecoderPlan {
    pub equation: DifferenceEquation,
    /// Rows of `G` (and of `y`) the decoder uses.
    pub retained: Vec<usize>,
    pub reduced: PolyMatrix,
    pub adj: PolyMatrix,
    /// `det` of the reduced matrix, not normalized.
    pub f: Poly,
    /// `deg f`.
    pub delay: usize,
    pub leading_inv: Gf,
    /// `u[0..=N]`, used only by no-reset equations.
    pub known_prefix: SymbolSequence,
}

impl DecoderPlan {
    pub fn input_dim(&self) -> usize {
        self.reduced.cols()
    }

    /// `adj(G~) P(z)` restricted to the retained rows of `y`, scaled so that
    /// `f` is monic. Applied to `y` it gives `f(z) u / f_k`.
    pub fn normalized_transfer(&self, f: &GaloisField) -> PolyMatrix {
        let m = self.input_dim();
        let l = self.equation.output_dim();
        let mut select = PolyMatrix::zeros(m, l);
        for (i, &r) in self.retained.iter().enumerate() {
            select.set(i, r, Poly::one());
        }
        let scale = Poly::constant(self.leading_inv).mul(&self.equation.p, f);
        self.adj.mul(&select, f).expect("shapes agree").scale(&scale, f)
    }

    pub fn normalized_f(&self, f: &GaloisField) -> Poly {
        self.f.scale(self.leading_inv, f)
    }

    /// How far past time `n` the received stream must extend before `u[n]`
    /// can be recovered.
    pub fn lookahead(&self) -> usize {
        let reach = self.adj.max_degree().unwrap_or(0) + self.equation.p.degree().unwrap_or(0);
        reach.saturating_sub(self.delay)
    }
}

/// Prepare decoding for `eq`. `known_prefix` defaults to zeros, which is what
/// the staggered pilots send.
pub fn build_plan(
    eq: &DifferenceEquation,
    known_prefix: Option<SymbolSequence>,
    f: &GaloisField,
) -> Result<DecoderPlan> {
    if eq.field != f.spec() {
        return Err(Error::FieldMismatch { expected: f.spec().to_string(), found: eq.field.to_string() });
    }
    let m = eq.input_dim();
    let rank = eq.g.rank_over_ring(f);
    if rank < m {
        return Err(Error::Undecodable { sink: eq.sink.clone(), rank, inputs: m });
    }
    let (reduced, retained) = eq.g.select_full_rank_rows(f)?;
    let det = reduced.det(f)?;
    let adj = reduced.adjugate(f)?;
    let delay = det.degree().expect("full rank gives a nonzero determinant");
    let leading_inv = f.inv(det.leading().expect("nonzero"))?;
    let known_prefix = match known_prefix {
        Some(p) => {
            if p.dim() != m {
                return Err(Error::DimensionMismatch(format!(
                    "known prefix has dimension {}, equation has {m} inputs",
                    p.dim()
                )));
            }
            if p.start() > 0 || p.end() <= eq.bound as i64 {
                return Err(Error::DimensionMismatch(format!("known prefix must cover u[0..={}]", eq.bound)));
            }
            p
        }
        None => SymbolSequence::from_values(0, m, vec![vec![Gf::ZERO; m]; eq.bound + 1])?,
    };
    Ok(DecoderPlan { equation: eq.clone(), retained, reduced, adj, f: det, delay, leading_inv, known_prefix })
}

/// Incremental decoder. Feed `y[start], y[start+1], ...` in order; once
/// primed, each symbol yields the next `u`.
#[derive(Debug)]
pub struct StreamDecoder<'a> {
    plan: &'a DecoderPlan,
    field: &'a GaloisField,
    p_coeffs: Vec<Gf>,
    adj_coeffs: Vec<FieldMatrix>,
    g_coeffs: Vec<FieldMatrix>,
    y: SymbolSequence,
    q: SymbolSequence,
    u: SymbolSequence,
}

impl<'a> StreamDecoder<'a> {
    /// `start` is the time of the first symbol to be pushed; earlier
    /// received symbols are taken as zero, as for any [`SymbolSequence`].
    pub fn new(plan: &'a DecoderPlan, start: i64, field: &'a GaloisField) -> Result<Self> {
        let p = &plan.equation.p;
        let m = plan.input_dim();
        let q_start = match plan.equation.alg {
            Algorithm::Reset => start - p.degree().unwrap_or(0) as i64,
            Algorithm::NoReset => -(plan.reduced.max_degree().unwrap_or(0) as i64),
        };
        Ok(StreamDecoder {
            plan,
            field,
            p_coeffs: p.coeffs().to_vec(),
            adj_coeffs: plan.adj.coefficients(),
            g_coeffs: plan.reduced.coefficients(),
            y: SymbolSequence::new(start, plan.equation.output_dim()),
            q: SymbolSequence::new(q_start, m),
            u: SymbolSequence::new(0, m),
        })
    }

    /// Decoded symbols so far, starting at time 0.
    pub fn decoded(&self) -> &SymbolSequence {
        &self.u
    }

    pub fn into_decoded(self) -> SymbolSequence {
        self.u
    }

    /// Accept the next received vector and return any newly decoded input.
    pub fn push(&mut self, y_n: Vec<Gf>) -> Result<Option<Vec<Gf>>> {
        self.y.push(y_n)?;
        let t = self.u.end();
        let last = self.y.end() - 1;
        if t + (self.plan.lookahead() as i64) > last {
            return Ok(None);
        }
        let k = self.plan.delay as i64;
        let needed_q = t - k + self.adj_coeffs.len() as i64 - 1;
        while self.q.end() <= needed_q {
            let i = self.q.end();
            let v = self.q_at(i)?;
            self.q.push(v)?;
        }
        let f = self.field;
        let w = crate::poly::apply_shift_operator(&self.adj_coeffs, &self.q, t - k, f)?;
        let fc = self.plan.f.coeffs();
        let mut acc = w;
        for (i, &c) in fc.iter().enumerate().take(self.plan.delay) {
            let prev = self.u.get(t - k + i as i64).expect("earlier symbols are decoded");
            for (a, x) in acc.iter_mut().zip(prev) {
                f.mul_acc(a, c, *x);
            }
        }
        let out: Vec<Gf> = acc.into_iter().map(|v| f.mul(self.plan.leading_inv, v)).collect();
        self.u.push(out.clone())?;
        Ok(Some(out))
    }

    fn q_at(&self, i: i64) -> Result<Vec<Gf>> {
        let f = self.field;
        let eq = &self.plan.equation;
        if eq.alg == Algorithm::NoReset && i <= 0 {
            return crate::poly::apply_shift_operator(&self.g_coeffs, &self.plan.known_prefix, i, f);
        }
        let py = crate::poly::apply_shift_operator(&self.p_coeffs, &self.y, i, f)?;
        Ok(self.plan.retained.iter().map(|&r| py[r]).collect())
    }
}

/// Decode `u[0..=upto - lookahead]` from `y`, which must cover `upto`.
pub fn decode_stream(
    plan: &DecoderPlan,
    y: &SymbolSequence,
    upto: i64,
    f: &GaloisField,
) -> Result<SymbolSequence> {
    if y.dim() != plan.equation.output_dim() {
        return Err(Error::DimensionMismatch(format!(
            "received vectors have {} entries, the plan expects {}",
            y.dim(),
            plan.equation.output_dim()
        )));
    }
    let available = y.end() - 1;
    if available < upto {
        return Err(Error::NeedsMoreSymbols { needed: upto, available });
    }
    let mut dec = StreamDecoder::new(plan, y.start(), f)?;
    for n in y.start()..=upto {
        dec.push(y.at(n)?.to_vec())?;
    }
    Ok(dec.into_decoded())
}
