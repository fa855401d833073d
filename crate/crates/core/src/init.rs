//! Blind initialization: pilot transmissions, the linear systems they
//! produce, and the difference equation `P(z) y_d = G(z) u` built from a
//! solution.
//!
//! Two procedures are provided. [`Algorithm::Reset`] sends one unit impulse
//! per input and clears the network between them, so the sink measures the
//! Markov parameters `M_d[0..=2N]` directly. [`Algorithm::NoReset`] sends all
//! impulses in a single staggered run from an unknown initial state; its
//! equation holds for `n >= 1`.
//!
//! Pilots can be simulated or read back from recorded traces. Both go through
//! [`initialize`].

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field::{FieldSpec, GaloisField, Gf};
use crate::linalg::FieldMatrix;
use crate::network::{NetworkSpec, StateSpace};
use crate::poly::{Poly, SymbolSequence};
use crate::polymat::PolyMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Algorithm {
    /// Impulse per input with a reset in between.
    Reset,
    /// Staggered impulses, no reset, arbitrary initial state.
    NoReset,
}

impl Algorithm {
    pub fn tag(self) -> u8 {
        match self {
            Algorithm::Reset => 1,
            Algorithm::NoReset => 2,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.tag())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "1" => Ok(Algorithm::Reset),
            "2" => Ok(Algorithm::NoReset),
            other => Err(Error::Parse(format!("unknown algorithm `{other}`, expected 1 or 2"))),
        }
    }
}

/// Initial network state for a no-reset run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InitialState {
    /// Known to be zero: the first `2N + 1` steps are skipped.
    Zero,
    Given(Vec<Gf>),
}

impl InitialState {
    /// `zero` or comma-separated integers.
    pub fn parse(text: &str, f: &GaloisField) -> Result<Self> {
        let t = text.trim();
        if t.eq_ignore_ascii_case("zero") {
            return Ok(InitialState::Zero);
        }
        t.split(',')
            .map(|v| {
                let v: u32 = v.trim().parse().map_err(|_| Error::Parse(format!("bad symbol `{v}` in x0")))?;
                f.elem(v)
            })
            .collect::<Result<Vec<_>>>()
            .map(InitialState::Given)
    }
}

/// `e_j` at `n = 0` followed by `2N` zeros.
pub fn reset_pilot(input_dim: usize, j: usize, bound: usize) -> Vec<Vec<Gf>> {
    let mut seq = vec![vec![Gf::ZERO; input_dim]; 2 * bound + 1];
    seq[0][j] = Gf::ONE;
    seq
}

/// `u_i[n] = 1` at `n = (2N + 1) i` for `i = 1..=m`, over `(m + 1)(2N + 1)`
/// steps.
pub fn staggered_pilot(input_dim: usize, bound: usize) -> Vec<Vec<Gf>> {
    let period = 2 * bound + 1;
    let mut seq = vec![vec![Gf::ZERO; input_dim]; (input_dim + 1) * period];
    for i in 1..=input_dim {
        seq[period * i][i - 1] = Gf::ONE;
    }
    seq
}

/// What one sink recorded during the pilots.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SinkTrace {
    pub sink: String,
    pub output_dim: usize,
    /// Reset pilots: one run per input, each covering `0..=2N`.
    /// No-reset pilots: a single run covering `1..(m+1)(2N+1)`, or starting
    /// at `2N + 1` when the initial state is zero.
    pub runs: Vec<SymbolSequence>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PilotTrace {
    pub field: FieldSpec,
    pub alg: Algorithm,
    pub bound: usize,
    pub input_dim: usize,
    pub sinks: Vec<SinkTrace>,
}

/// Drive the reset pilots through the simulator.
pub fn collect_reset(ss: &StateSpace, bound: usize) -> Result<PilotTrace> {
    let m = ss.input_dim();
    let mut sinks: Vec<SinkTrace> = ss
        .sinks
        .iter()
        .map(|s| SinkTrace { sink: s.name.clone(), output_dim: s.output_dim(), runs: Vec::new() })
        .collect();
    let mut state = ss.zero_state();
    for j in 0..m {
        let outs = ss.run(&mut state, &reset_pilot(m, j, bound))?;
        state.reset();
        for (t, y) in sinks.iter_mut().zip(outs) {
            t.runs.push(y);
        }
    }
    Ok(PilotTrace { field: ss.field().spec(), alg: Algorithm::Reset, bound, input_dim: m, sinks })
}

/// Drive the staggered pilot through the simulator from `x0`.
pub fn collect_no_reset(ss: &StateSpace, bound: usize, x0: &InitialState) -> Result<PilotTrace> {
    let m = ss.input_dim();
    let period = 2 * bound + 1;
    let pilot = staggered_pilot(m, bound);
    let (mut state, inputs) = match x0 {
        InitialState::Zero => {
            let mut st = ss.zero_state();
            st.n = period as i64;
            (st, &pilot[period..])
        }
        InitialState::Given(x) => (ss.state(x.clone())?, &pilot[..]),
    };
    let outs = ss.run(&mut state, inputs)?;
    let sinks = ss
        .sinks
        .iter()
        .zip(outs)
        .map(|(s, y)| {
            // y_d[0] never enters the equations and is not kept
            let from = y.start().max(1);
            let values = y.values()[(from - y.start()) as usize..].to_vec();
            Ok(SinkTrace {
                sink: s.name.clone(),
                output_dim: s.output_dim(),
                runs: vec![SymbolSequence::from_values(from, s.output_dim(), values)?],
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PilotTrace { field: ss.field().spec(), alg: Algorithm::NoReset, bound, input_dim: m, sinks })
}

/// `M_d[0..=2N]`, each `l_d x m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarkovSequence {
    pub matrices: Vec<FieldMatrix>,
}

impl MarkovSequence {
    pub fn from_runs(trace: &SinkTrace, input_dim: usize, bound: usize) -> Result<Self> {
        if trace.runs.len() != input_dim {
            return Err(Error::DimensionMismatch(format!(
                "sink `{}`: {} pilot runs recorded, expected {input_dim}",
                trace.sink,
                trace.runs.len()
            )));
        }
        let mut matrices = Vec::with_capacity(2 * bound + 1);
        for n in 0..=2 * bound as i64 {
            let columns = trace.runs.iter().map(|r| r.at(n).map(<[Gf]>::to_vec)).collect::<Result<Vec<_>>>()?;
            matrices.push(FieldMatrix::from_columns(trace.output_dim, &columns)?);
        }
        Ok(MarkovSequence { matrices })
    }

    pub fn get(&self, n: usize) -> &FieldMatrix {
        &self.matrices[n]
    }

    /// Coefficient matrix of `sum_k alpha_k M[k + tau] = 0`, `tau = 1..=N`.
    /// Column `k` holds the entries of `M[k + tau]`, one row per
    /// `(tau, row, col)`.
    pub fn system(&self, bound: usize) -> FieldMatrix {
        let (l, m) = (self.matrices[0].rows(), self.matrices[0].cols());
        let mut sys = FieldMatrix::zeros(bound * l * m, bound + 1);
        for tau in 1..=bound {
            for r in 0..l {
                for c in 0..m {
                    let row = ((tau - 1) * l + r) * m + c;
                    for k in 0..=bound {
                        sys.set(row, k, self.matrices[k + tau].get(r, c));
                    }
                }
            }
        }
        sys
    }
}

/// Times at which the no-reset equations are imposed.
pub fn no_reset_times(input_dim: usize, bound: usize) -> Vec<i64> {
    let period = 2 * bound + 1;
    (0..=input_dim)
        .flat_map(|p| (1..=bound).map(move |t| (period * p + t) as i64))
        .collect()
}

/// Coefficient matrix of `sum_j alpha_j y[j + tau] = 0` over
/// [`no_reset_times`].
pub fn no_reset_system(y: &SymbolSequence, input_dim: usize, bound: usize) -> Result<FieldMatrix> {
    let l = y.dim();
    let times = no_reset_times(input_dim, bound);
    let mut sys = FieldMatrix::zeros(times.len() * l, bound + 1);
    for (t, &tau) in times.iter().enumerate() {
        for j in 0..=bound {
            let v = y.at(j as i64 + tau)?;
            for r in 0..l {
                sys.set(t * l + r, j, v[r]);
            }
        }
    }
    Ok(sys)
}

/// First canonical nullspace vector: the solution with the lowest-degree
/// polynomial, already monic.
pub fn canonical_solution(system: &FieldMatrix, f: &GaloisField) -> Option<Vec<Gf>> {
    system.nullspace(f).into_iter().next()
}

pub fn residual_is_zero(system: &FieldMatrix, alpha: &[Gf], f: &GaloisField) -> Result<bool> {
    Ok(system.mul_vec(alpha, f)?.iter().all(|v| v.is_zero()))
}

/// `alpha_0..=alpha_N` as a polynomial's coefficients.
pub fn alpha_from_poly(p: &Poly, bound: usize) -> Result<Vec<Gf>> {
    match p.degree() {
        None => Err(Error::Parse("alpha must be a nonzero polynomial".into())),
        Some(d) if d > bound => Err(Error::DimensionMismatch(format!("alpha has degree {d} > N = {bound}"))),
        Some(_) => Ok((0..=bound).map(|k| p.coeff(k)).collect()),
    }
}

/// `G(z) = sum_{k=1..N} sum_{j=k..N} alpha_j M[j-k+1] z^(k-1) + M[0] P(z)`.
pub fn construct_reset(markov: &MarkovSequence, alpha: &[Gf], f: &GaloisField) -> Result<PolyMatrix> {
    let bound = alpha.len() - 1;
    let m0 = markov.get(0);
    let mut coeffs: Vec<FieldMatrix> = vec![FieldMatrix::zeros(m0.rows(), m0.cols()); bound + 1];
    for k in 1..=bound {
        for j in k..=bound {
            if !alpha[j].is_zero() {
                coeffs[k - 1] = coeffs[k - 1].add(&markov.get(j - k + 1).scale(alpha[j], f))?;
            }
        }
    }
    for (k, &a) in alpha.iter().enumerate() {
        if !a.is_zero() {
            coeffs[k] = coeffs[k].add(&m0.scale(a, f))?;
        }
    }
    PolyMatrix::from_coefficients(&coeffs)
}

/// Column `i` (1-based) is
/// `sum_{k=1..N+1} sum_{j=0..N} alpha_j y[j + (2N+1) i - k + 1] z^(k-1)`.
pub fn construct_no_reset(
    y: &SymbolSequence,
    alpha: &[Gf],
    input_dim: usize,
    f: &GaloisField,
) -> Result<PolyMatrix> {
    let bound = alpha.len() - 1;
    let period = (2 * bound + 1) as i64;
    let mut coeffs = vec![FieldMatrix::zeros(y.dim(), input_dim); bound + 1];
    for i in 1..=input_dim {
        for k in 1..=bound + 1 {
            let mut acc = vec![Gf::ZERO; y.dim()];
            for (j, &a) in alpha.iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                let v = y.at(j as i64 + period * i as i64 - k as i64 + 1)?;
                for (s, x) in acc.iter_mut().zip(v) {
                    f.mul_acc(s, a, *x);
                }
            }
            for (r, v) in acc.into_iter().enumerate() {
                coeffs[k - 1].set(r, i - 1, v);
            }
        }
    }
    PolyMatrix::from_coefficients(&coeffs)
}

/// `P_d(z) y_d = G_d(z) u` for one sink.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DifferenceEquation {
    pub field: FieldSpec,
    pub sink: String,
    pub bound: usize,
    pub alg: Algorithm,
    /// Sources in input-column order with the rates `G` was built for.
    pub sources: Vec<(String, usize)>,
    pub p: Poly,
    pub g: PolyMatrix,
}

impl DifferenceEquation {
    pub fn input_dim(&self) -> usize {
        self.g.cols()
    }

    pub fn output_dim(&self) -> usize {
        self.g.rows()
    }

    pub fn rates(&self) -> Vec<usize> {
        self.sources.iter().map(|(_, r)| *r).collect()
    }

    /// Largest shift either side of the equation looks ahead.
    pub fn span(&self) -> usize {
        self.p.degree().unwrap_or(0).max(self.g.max_degree().unwrap_or(0))
    }

    /// Residual `(P y)[n] - (G u)[n]`.
    pub fn residual(&self, y: &SymbolSequence, u: &SymbolSequence, n: i64, f: &GaloisField) -> Result<Vec<Gf>> {
        let lhs = self.p.apply(y, n, f)?;
        let rhs = self.g.apply(u, n, f)?;
        Ok(lhs.iter().zip(&rhs).map(|(a, b)| f.add(*a, *b)).collect())
    }
}

/// Per-sink initialization result.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SinkInit {
    pub equation: DifferenceEquation,
    pub alpha: Vec<Gf>,
    /// The assembled system the solution was taken from.
    pub system: FieldMatrix,
    /// Present for reset pilots.
    pub markov: Option<MarkovSequence>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct InitOptions {
    /// Use this polynomial instead of the canonical solution. It must solve
    /// every sink's system.
    pub alpha: Option<Poly>,
}

/// Solve and construct the equation for every sink in `trace`.
pub fn initialize(
    trace: &PilotTrace,
    sources: &[(String, usize)],
    f: &GaloisField,
    opts: &InitOptions,
) -> Result<Vec<SinkInit>> {
    if trace.field != f.spec() {
        return Err(Error::FieldMismatch { expected: f.spec().to_string(), found: trace.field.to_string() });
    }
    let m: usize = sources.iter().map(|(_, r)| r).sum();
    if m != trace.input_dim {
        return Err(Error::DimensionMismatch(format!(
            "source rates add up to {m}, pilots were sent on {} inputs",
            trace.input_dim
        )));
    }
    let bound = trace.bound;
    let forced = opts.alpha.as_ref().map(|p| alpha_from_poly(p, bound)).transpose()?;
    trace
        .sinks
        .iter()
        .map(|t| {
            let failure = |reason: &str| Error::InitializationFailure { sink: t.sink.clone(), reason: reason.into() };
            let (system, markov) = match trace.alg {
                Algorithm::Reset => {
                    let markov = MarkovSequence::from_runs(t, m, bound)?;
                    (markov.system(bound), Some(markov))
                }
                Algorithm::NoReset => {
                    let [y] = t.runs.as_slice() else {
                        return Err(Error::DimensionMismatch(format!(
                            "sink `{}`: expected one recorded run, found {}",
                            t.sink,
                            t.runs.len()
                        )));
                    };
                    (no_reset_system(y, m, bound)?, None)
                }
            };
            let alpha = match &forced {
                Some(a) => {
                    if !residual_is_zero(&system, a, f)? {
                        return Err(failure("the given alpha does not solve the pilot equations"));
                    }
                    a.clone()
                }
                None => canonical_solution(&system, f).ok_or_else(|| {
                    failure("the pilot equations have only the trivial solution; N is smaller than the edge count or the trace is corrupt")
                })?,
            };
            let g = match &markov {
                Some(mk) => construct_reset(mk, &alpha, f)?,
                None => construct_no_reset(&t.runs[0], &alpha, m, f)?,
            };
            let equation = DifferenceEquation {
                field: f.spec(),
                sink: t.sink.clone(),
                bound,
                alg: trace.alg,
                sources: sources.to_vec(),
                p: Poly::from_coeffs(alpha.clone()),
                g,
            };
            Ok(SinkInit { equation, alpha, system, markov })
        })
        .collect()
}

pub fn sources_of(spec: &NetworkSpec) -> Vec<(String, usize)> {
    spec.source_names().into_iter().zip(spec.source_rates()).collect()
}

/// Reset pilots on a simulated network, then [`initialize`].
pub fn run_reset(spec: &NetworkSpec, opts: &InitOptions) -> Result<Vec<SinkInit>> {
    let trace = collect_reset(&spec.state_space(), spec.bound())?;
    initialize(&trace, &sources_of(spec), spec.field(), opts)
}

/// Staggered pilots on a simulated network from `x0`, then [`initialize`].
pub fn run_no_reset(spec: &NetworkSpec, x0: &InitialState, opts: &InitOptions) -> Result<Vec<SinkInit>> {
    let trace = collect_no_reset(&spec.state_space(), spec.bound(), x0)?;
    initialize(&trace, &sources_of(spec), spec.field(), opts)
}

pub fn run(spec: &NetworkSpec, alg: Algorithm, x0: &InitialState, opts: &InitOptions) -> Result<Vec<SinkInit>> {
    match alg {
        Algorithm::Reset => run_reset(spec, opts),
        Algorithm::NoReset => run_no_reset(spec, x0, opts),
    }
}

/// Simulate `trials` random input streams of `horizon` steps and check the
/// equation exactly. Reset equations are checked at every time with a zero
/// initial state; no-reset equations at `n >= 1` from a random initial state.
/// `spec` must carry the rates the equation was built for.
pub fn verify_difference_equation(
    eq: &DifferenceEquation,
    spec: &NetworkSpec,
    trials: usize,
    horizon: usize,
    seed: u64,
) -> Result<bool> {
    let f = spec.field();
    if eq.field != f.spec() {
        return Err(Error::FieldMismatch { expected: f.spec().to_string(), found: eq.field.to_string() });
    }
    let ss = spec.state_space();
    let sink = ss.sink_index(&eq.sink)?;
    let m = ss.input_dim();
    if m != eq.input_dim() || ss.sinks[sink].output_dim() != eq.output_dim() {
        return Err(Error::DimensionMismatch(format!(
            "equation is {}x{}, network sink `{}` is {}x{}",
            eq.output_dim(),
            eq.input_dim(),
            eq.sink,
            ss.sinks[sink].output_dim(),
            m
        )));
    }
    let span = eq.span();
    let steps = horizon + span;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let mut state = match eq.alg {
            Algorithm::Reset => ss.zero_state(),
            Algorithm::NoReset => ss.state((0..ss.state_dim()).map(|_| f.random(&mut rng)).collect())?,
        };
        let inputs: Vec<Vec<Gf>> = (0..steps).map(|_| (0..m).map(|_| f.random(&mut rng)).collect()).collect();
        let y = ss.run(&mut state, &inputs)?.swap_remove(sink);
        let u = SymbolSequence::from_values(0, m, inputs)?;
        let from = match eq.alg {
            Algorithm::Reset => -(span as i64),
            Algorithm::NoReset => 1,
        };
        for n in from..horizon as i64 {
            if eq.residual(&y, &u, n, f)?.iter().any(|v| !v.is_zero()) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::network::TopologyFile;
    use rand::Rng;

    fn mat(rows: &[[u16; 3]; 2]) -> FieldMatrix {
        FieldMatrix::from_rows(rows)
    }

    fn golden_p() -> Poly {
        Poly::from_u16s(&[0, 0, 209, 0, 0, 1])
    }

    fn golden_g(f: &GaloisField) -> PolyMatrix {
        PolyMatrix::parse(
            "[[113*z + 57*z^2, 63*z + 73*z^2, 84 + 231*z^3], \
              [24 + 185*z + 157*z^3, 17 + 105*z + 13*z^3, 228*z^2]]",
            f,
        )
        .unwrap()
    }

    fn fig3_markov() -> MarkovSequence {
        let spec = fixtures::fig3();
        let trace = collect_reset(&spec.state_space(), spec.bound()).unwrap();
        MarkovSequence::from_runs(&trace.sinks[0], 3, 8).unwrap()
    }

    #[test]
    fn pilots_have_the_documented_shape() {
        let p = reset_pilot(3, 1, 8);
        assert_eq!(p.len(), 17);
        assert_eq!(p[0], vec![Gf(0), Gf(1), Gf(0)]);
        assert!(p[1..].iter().flatten().all(|v| v.is_zero()));
        let s = staggered_pilot(3, 8);
        assert_eq!(s.len(), 68);
        let ones: Vec<(usize, usize)> = s
            .iter()
            .enumerate()
            .flat_map(|(n, u)| u.iter().enumerate().filter(|(_, v)| v.0 == 1).map(move |(i, _)| (n, i)))
            .collect();
        assert_eq!(ones, vec![(17, 0), (34, 1), (51, 2)]);
        assert_eq!(no_reset_times(1, 2), vec![1, 2, 6, 7]);
    }

    #[test]
    fn fig3_markov_parameters() {
        let mk = fig3_markov();
        assert!(mk.get(0).is_zero());
        assert!(mk.get(1).is_zero());
        assert_eq!(mk.get(2), &mat(&[[0, 0, 231], [157, 13, 0]]));
        assert_eq!(mk.get(3), &mat(&[[57, 73, 0], [0, 0, 228]]));
        assert_eq!(mk.get(4), &mat(&[[113, 63, 0], [185, 105, 0]]));
        assert_eq!(mk.get(5), &mat(&[[0, 0, 228], [1, 101, 0]]));
        let f = GaloisField::default();
        for n in 3..=13 {
            assert_eq!(mk.get(n + 3), &mk.get(n).scale(Gf(209), &f));
        }
        let ss = fixtures::fig3().state_space();
        for n in 0..=16 {
            assert_eq!(mk.get(n), &ss.markov_parameter(0, n).unwrap());
        }
    }

    #[test]
    fn golden_alpha_solves_the_reset_system() {
        let f = GaloisField::default();
        let mk = fig3_markov();
        let sys = mk.system(8);
        assert_eq!((sys.rows(), sys.cols()), (2 * 3 * 8, 9));
        let alpha = alpha_from_poly(&golden_p(), 8).unwrap();
        assert!(residual_is_zero(&sys, &alpha, &f).unwrap());
        let mut bad = alpha.clone();
        bad[2] = Gf(208);
        assert!(!residual_is_zero(&sys, &bad, &f).unwrap());
        assert_eq!(construct_reset(&mk, &alpha, &f).unwrap(), golden_g(&f));
    }

    #[test]
    fn forced_alpha_reproduces_the_golden_equation_with_either_algorithm() {
        let spec = fixtures::fig3();
        let f = spec.field();
        let opts = InitOptions { alpha: Some(golden_p()) };
        let a1 = run_reset(&spec, &opts).unwrap();
        assert_eq!(a1[0].equation.p, golden_p());
        assert_eq!(a1[0].equation.g, golden_g(f));
        let x0 = InitialState::Given([50, 64, 157, 121, 90, 212, 149, 140].map(Gf).to_vec());
        let a2 = run_no_reset(&spec, &x0, &opts).unwrap();
        assert_eq!(a2[0].equation.p, golden_p());
        assert_eq!(a2[0].equation.g, golden_g(f));
        assert_eq!(a2[0].equation.alg, Algorithm::NoReset);
    }

    #[test]
    fn no_reset_trace_matches_recorded_outputs() {
        let spec = fixtures::fig3();
        let x0 = InitialState::Given([50, 64, 157, 121, 90, 212, 149, 140].map(Gf).to_vec());
        let trace = collect_no_reset(&spec.state_space(), 8, &x0).unwrap();
        let y = &trace.sinks[0].runs[0];
        assert_eq!((y.start(), y.end()), (1, 68));
        assert_eq!(y.at(1).unwrap(), &[Gf(164), Gf(96)]);
        assert_eq!(y.at(2).unwrap(), &[Gf(253), Gf(6)]);
        assert_eq!(y.at(3).unwrap(), &[Gf(155), Gf(88)]);
        assert_eq!(y.at(19).unwrap(), &[Gf(97), Gf(254)]);
        assert_eq!(y.at(20).unwrap(), &[Gf(63), Gf(144)]);
        assert_eq!(y.at(67).unwrap(), &[Gf(172), Gf(108)]);
    }

    #[test]
    fn forced_alpha_must_be_a_solution() {
        let spec = fixtures::fig3();
        let opts = InitOptions { alpha: Some(Poly::from_u16s(&[0, 0, 208, 0, 0, 1])) };
        assert!(matches!(run_reset(&spec, &opts), Err(Error::InitializationFailure { .. })));
        let opts = InitOptions { alpha: Some(Poly::monomial(Gf::ONE, 9)) };
        assert!(matches!(run_reset(&spec, &opts), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn canonical_solution_is_lowest_degree_and_monic() {
        let spec = fixtures::fig3();
        let f = spec.field();
        let init = run_reset(&spec, &InitOptions::default()).unwrap();
        let p = &init[0].equation.p;
        assert_eq!(p.leading(), Some(Gf::ONE));
        let d = p.degree().unwrap();
        // no solution of lower degree exists
        let sys = &init[0].system;
        let truncated = sys.select_columns(&(0..d).collect::<Vec<_>>());
        assert_eq!(truncated.rank(f), d);
        assert!(d <= 5);
    }

    #[test]
    fn equations_hold_on_the_fixtures() {
        for spec in [fixtures::fig1(), fixtures::fig3(), fixtures::shuttle()] {
            for init in run_reset(&spec, &InitOptions::default()).unwrap() {
                let eq = &init.equation;
                assert!(verify_difference_equation(eq, &spec, 20, 100, 3).unwrap(), "{}", eq.sink);
                assert!(eq.g.max_degree().unwrap_or(0) <= spec.bound());
            }
            let x0 = InitialState::Given(vec![Gf(7); spec.edges().len()]);
            for init in run_no_reset(&spec, &x0, &InitOptions::default()).unwrap() {
                assert!(verify_difference_equation(&init.equation, &spec, 20, 100, 4).unwrap());
            }
            for init in run_no_reset(&spec, &InitialState::Zero, &InitOptions::default()).unwrap() {
                assert!(verify_difference_equation(&init.equation, &spec, 5, 60, 5).unwrap());
            }
        }
    }

    #[test]
    fn perturbed_equation_fails_verification() {
        let spec = fixtures::fig3();
        let mut eq = run_reset(&spec, &InitOptions::default()).unwrap().remove(0).equation;
        let d = eq.p.degree().unwrap();
        let mut c = eq.p.coeffs().to_vec();
        c[d - 1] = spec.field().add(c[d - 1], Gf::ONE);
        eq.p = Poly::from_coeffs(c);
        assert!(!verify_difference_equation(&eq, &spec, 20, 100, 3).unwrap());
    }

    #[test]
    fn zero_trials_pass_trivially() {
        let spec = fixtures::fig3();
        let eq = run_reset(&spec, &InitOptions::default()).unwrap().remove(0).equation;
        assert!(verify_difference_equation(&eq, &spec, 0, 100, 0).unwrap());
        assert!(verify_difference_equation(&eq, &spec, 3, 0, 0).unwrap());
    }

    #[test]
    fn verification_rejects_foreign_equations() {
        let spec = fixtures::fig3();
        let mut eq = run_reset(&spec, &InitOptions::default()).unwrap().remove(0).equation;
        let narrow = spec.with_source_rate("s1", 1).unwrap();
        assert!(matches!(
            verify_difference_equation(&eq, &narrow, 1, 10, 0),
            Err(Error::DimensionMismatch(_))
        ));
        eq.field = "gf2^4:0x13".parse().unwrap();
        assert!(matches!(verify_difference_equation(&eq, &spec, 1, 10, 0), Err(Error::FieldMismatch { .. })));
    }

    fn single_hop() -> NetworkSpec {
        NetworkSpec::from_json(
            r#"{"nodes":[{"name":"s","source_rate":1},{"name":"d","sink":true}],
                "edges":[{"id":"e","tail":"s","head":"d"}],
                "kernels":{"e":{"u:s:1":1}}}"#,
        )
        .unwrap()
    }

    #[test]
    fn single_hop_is_a_pure_delay() {
        // y[n] = u[n-1]: the lowest-degree relation is z y = u
        let spec = single_hop();
        let f = spec.field();
        for (alg, x0) in [(Algorithm::Reset, InitialState::Zero), (Algorithm::NoReset, InitialState::Given(vec![Gf(9)]))] {
            let init = run(&spec, alg, &x0, &InitOptions::default()).unwrap().remove(0);
            assert_eq!(init.equation.p, Poly::z());
            assert_eq!(init.equation.g, PolyMatrix::identity(1));
            assert!(verify_difference_equation(&init.equation, &spec, 5, 30, 1).unwrap());
            let mk = init.markov;
            if let Some(mk) = mk {
                assert!(mk.matrices[2..].iter().all(FieldMatrix::is_zero));
                // every monomial of degree >= 1 solves the system
                for k in 1..=1 {
                    let a = alpha_from_poly(&Poly::monomial(Gf::ONE, k), 1).unwrap();
                    assert!(residual_is_zero(&init.system, &a, f).unwrap());
                }
            }
        }
    }

    #[test]
    fn edgeless_network_gives_p_one() {
        let spec = NetworkSpec::from_json(
            r#"{"nodes":[{"name":"a","source_rate":2,"sink":true}],"edges":[]}"#,
        )
        .unwrap();
        for alg in [Algorithm::Reset, Algorithm::NoReset] {
            let init = run(&spec, alg, &InitialState::Zero, &InitOptions::default()).unwrap().remove(0);
            assert_eq!(init.equation.p, Poly::one());
            assert_eq!(init.equation.g, PolyMatrix::identity(2));
            assert!(verify_difference_equation(&init.equation, &spec, 3, 20, 1).unwrap());
        }
    }

    #[test]
    fn zero_rate_source_contributes_no_columns() {
        let spec = fixtures::fig3().with_source_rate("s2", 0).unwrap();
        let init = run_reset(&spec, &InitOptions::default()).unwrap().remove(0);
        assert_eq!(init.equation.g.cols(), 2);
        assert_eq!(init.equation.sources, vec![("s1".to_string(), 2), ("s2".to_string(), 0)]);
        assert!(verify_difference_equation(&init.equation, &spec, 5, 50, 2).unwrap());
    }

    #[test]
    fn larger_bound_still_works() {
        let spec = fixtures::fig3().with_bound(11).unwrap();
        for alg in [Algorithm::Reset, Algorithm::NoReset] {
            let x0 = InitialState::Given(vec![Gf(3); 8]);
            let init = run(&spec, alg, &x0, &InitOptions::default()).unwrap().remove(0);
            assert_eq!(init.equation.bound, 11);
            assert!(verify_difference_equation(&init.equation, &spec, 5, 80, 2).unwrap());
        }
    }

    #[test]
    fn corrupt_traces_are_detected() {
        let spec = fixtures::fig3();
        let f = spec.field();
        let mut trace = collect_reset(&spec.state_space(), 8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let noisy: Vec<Vec<Gf>> = (0..17).map(|_| vec![f.random_nonzero(&mut rng), f.random_nonzero(&mut rng)]).collect();
        trace.sinks[0].runs[1] = SymbolSequence::from_values(0, 2, noisy).unwrap();
        match initialize(&trace, &sources_of(&spec), f, &InitOptions::default()) {
            Err(Error::InitializationFailure { sink, .. }) => assert_eq!(sink, "d"),
            other => panic!("unexpected {other:?}"),
        }
        trace.sinks[0].runs.pop();
        assert!(matches!(
            initialize(&trace, &sources_of(&spec), f, &InitOptions::default()),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn trace_field_and_rates_are_checked() {
        let spec = fixtures::fig3();
        let trace = collect_reset(&spec.state_space(), 8).unwrap();
        let gf16 = GaloisField::with_degree(4, 0x13).unwrap();
        assert!(matches!(
            initialize(&trace, &sources_of(&spec), &gf16, &InitOptions::default()),
            Err(Error::FieldMismatch { .. })
        ));
        let wrong = vec![("s1".to_string(), 1)];
        assert!(matches!(
            initialize(&trace, &wrong, spec.field(), &InitOptions::default()),
            Err(Error::DimensionMismatch(_))
        ));
    }

    // C_d P(A) A^tau B, the infinite family behind the reset system.
    fn markov_family_vanishes(ss: &StateSpace, sink: usize, p: &Poly, taus: std::ops::Range<usize>) -> bool {
        let f = ss.field();
        let pa = ss.a.eval_poly(p, f).unwrap();
        let c = &ss.sinks[sink].c;
        taus.into_iter().all(|tau| {
            c.mul(&pa, f).unwrap().mul(&ss.a.pow(tau, f).unwrap(), f).unwrap().mul(&ss.b, f).unwrap().is_zero()
        })
    }

    fn state_family_vanishes(ss: &StateSpace, sink: usize, p: &Poly, x0: &[Gf], taus: std::ops::Range<usize>) -> bool {
        let f = ss.field();
        let pa = ss.a.eval_poly(p, f).unwrap();
        let c = &ss.sinks[sink].c;
        taus.into_iter().all(|tau| {
            let v = c.mul(&pa, f).unwrap().mul(&ss.a.pow(tau + 1, f).unwrap(), f).unwrap();
            v.mul_vec(x0, f).unwrap().iter().all(|x| x.is_zero())
        })
    }

    #[test]
    fn reset_solutions_annihilate_the_whole_markov_tail() {
        for spec in [fixtures::fig1(), fixtures::fig3(), fixtures::shuttle()] {
            let ss = spec.state_space();
            let n = spec.bound();
            for (s, init) in run_reset(&spec, &InitOptions::default()).unwrap().iter().enumerate() {
                for v in init.system.nullspace(spec.field()) {
                    assert!(markov_family_vanishes(&ss, s, &Poly::from_coeffs(v), 0..3 * n + 1));
                }
            }
        }
    }

    #[test]
    fn no_reset_system_matches_state_space_conditions() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for spec in [fixtures::fig1(), fixtures::fig3(), fixtures::shuttle()] {
            let f = spec.field();
            let ss = spec.state_space();
            let n = spec.bound();
            let x0: Vec<Gf> = (0..ss.state_dim()).map(|_| f.random(&mut rng)).collect();
            let trace = collect_no_reset(&ss, n, &InitialState::Given(x0.clone())).unwrap();
            for (s, t) in trace.sinks.iter().enumerate() {
                let sys = no_reset_system(&t.runs[0], ss.input_dim(), n).unwrap();
                let basis = sys.nullspace(f);
                let mut candidates: Vec<Vec<Gf>> = basis.clone();
                for _ in 0..10 {
                    let mut v = vec![Gf::ZERO; n + 1];
                    for b in &basis {
                        let c = f.random(&mut rng);
                        for (x, y) in v.iter_mut().zip(b) {
                            f.mul_acc(x, c, *y);
                        }
                    }
                    candidates.push(v.clone());
                    // a single perturbed coefficient almost never stays a solution
                    let k = rng.gen_range(0..=n);
                    v[k] = f.add(v[k], f.random_nonzero(&mut rng));
                    candidates.push(v);
                }
                for _ in 0..10 {
                    candidates.push((0..=n).map(|_| f.random(&mut rng)).collect());
                }
                let mut seen = [0usize; 2];
                for a in candidates {
                    let p = Poly::from_coeffs(a.clone());
                    let solves = residual_is_zero(&sys, &a, f).unwrap();
                    let families = markov_family_vanishes(&ss, s, &p, 0..n)
                        && state_family_vanishes(&ss, s, &p, &x0, 0..n);
                    assert_eq!(solves, families);
                    seen[solves as usize] += 1;
                }
                assert!(seen[0] > 0 && seen[1] > 0);
            }
        }
    }

    #[test]
    fn characteristic_polynomial_solves_both_systems() {
        for spec in [fixtures::fig1(), fixtures::fig3(), fixtures::shuttle()] {
            let f = spec.field();
            let ss = spec.state_space();
            let chi = ss.a.char_poly(f).unwrap();
            let alpha = alpha_from_poly(&chi, spec.bound()).unwrap();
            let reset = collect_reset(&ss, spec.bound()).unwrap();
            let x0 = InitialState::Given(vec![Gf(77); ss.state_dim()]);
            let no_reset = collect_no_reset(&ss, spec.bound(), &x0).unwrap();
            for (t1, t2) in reset.sinks.iter().zip(&no_reset.sinks) {
                let mk = MarkovSequence::from_runs(t1, ss.input_dim(), spec.bound()).unwrap();
                assert!(residual_is_zero(&mk.system(spec.bound()), &alpha, f).unwrap());
                let sys2 = no_reset_system(&t2.runs[0], ss.input_dim(), spec.bound()).unwrap();
                assert!(residual_is_zero(&sys2, &alpha, f).unwrap());
            }
        }
    }

    #[test]
    fn algorithms_agree_on_random_networks() {
        for seed in 0..5 {
            let spec = fixtures::random_network(seed, 8);
            let f = spec.field();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x0 = InitialState::Given((0..spec.edges().len()).map(|_| f.random(&mut rng)).collect());
            let a = run_reset(&spec, &InitOptions::default()).unwrap();
            let b = run_no_reset(&spec, &x0, &InitOptions::default()).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert!(verify_difference_equation(&x.equation, &spec, 5, 60, seed).unwrap());
                assert!(verify_difference_equation(&y.equation, &spec, 5, 60, seed).unwrap());
            }
        }
    }

    #[test]
    fn initial_state_parsing() {
        let f = GaloisField::default();
        assert_eq!(InitialState::parse("zero", &f).unwrap(), InitialState::Zero);
        assert_eq!(InitialState::parse("1, 2,3", &f).unwrap(), InitialState::Given(vec![Gf(1), Gf(2), Gf(3)]));
        assert!(InitialState::parse("1,300", &f).is_err());
        assert!(InitialState::parse("1,,2", &f).is_err());
        assert_eq!("2".parse::<Algorithm>().unwrap(), Algorithm::NoReset);
        assert!("3".parse::<Algorithm>().is_err());
    }

    #[test]
    fn gf2_networks_initialize() {
        let mut topo: TopologyFile = fixtures::fig3_skeleton().to_topology();
        topo.field = "gf2^1:0x3".into();
        topo.kernels.clear();
        topo.seed = Some(3);
        let spec = NetworkSpec::from_topology(&topo).unwrap();
        let init = run_reset(&spec, &InitOptions::default()).unwrap();
        assert!(verify_difference_equation(&init[0].equation, &spec, 5, 50, 0).unwrap());
    }
}
