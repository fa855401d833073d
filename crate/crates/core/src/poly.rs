//! Univariate polynomials over GF(2^m), time-indexed symbol sequences, and the
//! action of a polynomial in the shift operator `z` on a sequence:
//! `(P(z) c)[n] = sum_k p_k c[n + k]`.

use std::fmt;

use crate::error::{Error, Result};
use crate::field::{GaloisField, Gf};
use crate::linalg::FieldMatrix;

/// Polynomial with coefficients indexed by power of `z`; trailing zeros are
/// always trimmed, so the zero polynomial has no coefficients.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct Poly {
    coeffs: Vec<Gf>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Poly { coeffs: vec![Gf::ONE] }
    }

    pub fn constant(c: Gf) -> Self {
        Poly::from_coeffs(vec![c])
    }

    /// `c * z^k`.
    pub fn monomial(c: Gf, k: usize) -> Self {
        let mut coeffs = vec![Gf::ZERO; k + 1];
        coeffs[k] = c;
        Poly::from_coeffs(coeffs)
    }

    /// `z`.
    pub fn z() -> Self {
        Poly::monomial(Gf::ONE, 1)
    }

    pub fn from_coeffs(mut coeffs: Vec<Gf>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn from_u16s(values: &[u16]) -> Self {
        Poly::from_coeffs(values.iter().map(|&v| Gf(v)).collect())
    }

    #[inline]
    pub fn coeffs(&self) -> &[Gf] {
        &self.coeffs
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    #[inline]
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeff(&self, k: usize) -> Gf {
        self.coeffs.get(k).copied().unwrap_or(Gf::ZERO)
    }

    pub fn leading(&self) -> Option<Gf> {
        self.coeffs.last().copied()
    }

    /// Number of stored coefficients (`degree + 1`, or 0).
    #[inline]
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let (long, short) = if self.len() >= other.len() { (self, other) } else { (other, self) };
        let mut coeffs = long.coeffs.clone();
        for (c, s) in coeffs.iter_mut().zip(&short.coeffs) {
            c.0 ^= s.0;
        }
        Poly::from_coeffs(coeffs)
    }

    pub fn add_assign(&mut self, other: &Poly) {
        if other.len() > self.len() {
            self.coeffs.resize(other.len(), Gf::ZERO);
        }
        for (c, s) in self.coeffs.iter_mut().zip(&other.coeffs) {
            c.0 ^= s.0;
        }
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
    }

    pub fn mul(&self, other: &Poly, f: &GaloisField) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut coeffs = vec![Gf::ZERO; self.len() + other.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                f.mul_acc(&mut coeffs[i + j], a, b);
            }
        }
        Poly::from_coeffs(coeffs)
    }

    pub fn scale(&self, c: Gf, f: &GaloisField) -> Poly {
        Poly::from_coeffs(self.coeffs.iter().map(|&a| f.mul(a, c)).collect())
    }

    /// Multiply by `z^k`.
    pub fn shift(&self, k: usize) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let mut coeffs = vec![Gf::ZERO; k];
        coeffs.extend_from_slice(&self.coeffs);
        Poly { coeffs }
    }

    pub fn eval(&self, x: Gf, f: &GaloisField) -> Gf {
        self.coeffs.iter().rev().fold(Gf::ZERO, |acc, &c| f.add(f.mul(acc, x), c))
    }

    /// Scale so that the leading coefficient is one. The zero polynomial is
    /// returned unchanged.
    pub fn monic(&self, f: &GaloisField) -> Poly {
        match self.leading() {
            Some(lc) => self.scale(f.inv(lc).expect("leading coefficient is nonzero"), f),
            None => Poly::zero(),
        }
    }

    /// Euclidean division: `self = q * divisor + r` with `deg r < deg divisor`.
    pub fn div_rem(&self, divisor: &Poly, f: &GaloisField) -> Result<(Poly, Poly)> {
        let dd = divisor.degree().ok_or(Error::DivisionByZero)?;
        let lc_inv = f.inv(divisor.coeffs[dd])?;
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return Ok((Poly::zero(), self.clone()));
        }
        let mut quot = vec![Gf::ZERO; rem.len() - dd];
        for i in (dd..rem.len()).rev() {
            let c = rem[i];
            if c.is_zero() {
                continue;
            }
            let q = f.mul(c, lc_inv);
            quot[i - dd] = q;
            for (j, &d) in divisor.coeffs.iter().enumerate() {
                f.mul_acc(&mut rem[i - dd + j], q, d);
            }
        }
        Ok((Poly::from_coeffs(quot), Poly::from_coeffs(rem)))
    }

    /// Division known to be exact. Panics if the remainder is nonzero.
    pub(crate) fn div_exact(&self, divisor: &Poly, f: &GaloisField) -> Poly {
        let (q, r) = self.div_rem(divisor, f).expect("nonzero divisor");
        assert!(r.is_zero(), "inexact polynomial division");
        q
    }

    /// Textual form, e.g. `209*z^2 + z^5`.
    pub fn to_text(&self) -> String {
        self.to_string()
    }

    /// Parse the textual form. Accepts `209*z^2 + z^5`, `209z^2+z^5`, `z`,
    /// `7`. Repeated powers are summed.
    pub fn parse(text: &str, f: &GaloisField) -> Result<Poly> {
        let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(Error::Parse("empty polynomial".into()));
        }
        let mut out = Poly::zero();
        for term in compact.split('+') {
            let bad = || Error::Parse(format!("bad polynomial term `{term}` in `{text}`"));
            if term.is_empty() {
                return Err(bad());
            }
            let (coef, power) = match term.find('z') {
                None => (term, 0usize),
                Some(pos) => {
                    let coef = term[..pos].trim_end_matches('*');
                    let coef = if coef.is_empty() { "1" } else { coef };
                    let rest = &term[pos + 1..];
                    let power = if rest.is_empty() {
                        1
                    } else {
                        rest.strip_prefix('^').ok_or_else(bad)?.parse().map_err(|_| bad())?
                    };
                    (coef, power)
                }
            };
            let c: u32 = coef.parse().map_err(|_| bad())?;
            out.add_assign(&Poly::monomial(f.elem(c)?, power));
        }
        Ok(out)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match (k, c.0) {
                (0, v) => write!(f, "{v}")?,
                (1, 1) => write!(f, "z")?,
                (1, v) => write!(f, "{v}*z")?,
                (k, 1) => write!(f, "z^{k}")?,
                (k, v) => write!(f, "{v}*z^{k}")?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly({self})")
    }
}

/// A sequence of field vectors indexed by integer time. Values before
/// `start` are zero; values at or after `start + len` are undefined.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolSequence {
    start: i64,
    dim: usize,
    values: Vec<Vec<Gf>>,
    zero: Vec<Gf>,
}

impl SymbolSequence {
    pub fn new(start: i64, dim: usize) -> Self {
        SymbolSequence { start, dim, values: Vec::new(), zero: vec![Gf::ZERO; dim] }
    }

    pub fn from_values(start: i64, dim: usize, values: Vec<Vec<Gf>>) -> Result<Self> {
        let mut seq = SymbolSequence::new(start, dim);
        for v in values {
            seq.push(v)?;
        }
        Ok(seq)
    }

    pub fn push(&mut self, v: Vec<Gf>) -> Result<()> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "sequence vector has {} entries, expected {}",
                v.len(),
                self.dim
            )));
        }
        self.values.push(v);
        Ok(())
    }

    #[inline]
    pub fn start(&self) -> i64 {
        self.start
    }

    /// One past the last defined time.
    #[inline]
    pub fn end(&self) -> i64 {
        self.start + self.values.len() as i64
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Vec<Gf>] {
        &self.values
    }

    /// Value at time `n`: zero before `start`, `None` past the end.
    pub fn get(&self, n: i64) -> Option<&[Gf]> {
        if n < self.start {
            Some(&self.zero)
        } else {
            self.values.get((n - self.start) as usize).map(Vec::as_slice)
        }
    }

    pub fn at(&self, n: i64) -> Result<&[Gf]> {
        self.get(n).ok_or(Error::SequenceUndefined(n))
    }

    /// Delay by `k` steps: `out[n] = self[n - k]`.
    pub fn delayed(&self, k: i64) -> SymbolSequence {
        SymbolSequence { start: self.start + k, ..self.clone() }
    }
}

/// Coefficient types a shift-operator polynomial may carry: scalars act on
/// vectors by scaling, matrices by matrix-vector product.
pub trait ShiftCoefficient {
    fn input_dim(&self, seq_dim: usize) -> usize;
    fn output_dim(&self, seq_dim: usize) -> usize;
    /// `acc += self * x`.
    fn accumulate(&self, x: &[Gf], acc: &mut [Gf], f: &GaloisField);
}

impl ShiftCoefficient for Gf {
    fn input_dim(&self, seq_dim: usize) -> usize {
        seq_dim
    }

    fn output_dim(&self, seq_dim: usize) -> usize {
        seq_dim
    }

    fn accumulate(&self, x: &[Gf], acc: &mut [Gf], f: &GaloisField) {
        if self.is_zero() {
            return;
        }
        for (a, &v) in acc.iter_mut().zip(x) {
            f.mul_acc(a, *self, v);
        }
    }
}

impl ShiftCoefficient for FieldMatrix {
    fn input_dim(&self, _seq_dim: usize) -> usize {
        self.cols()
    }

    fn output_dim(&self, _seq_dim: usize) -> usize {
        self.rows()
    }

    fn accumulate(&self, x: &[Gf], acc: &mut [Gf], f: &GaloisField) {
        for (r, a) in acc.iter_mut().enumerate() {
            for (c, &v) in x.iter().enumerate() {
                f.mul_acc(a, self.get(r, c), v);
            }
        }
    }
}

/// `(P(z) c)[n] = sum_k coeffs[k] * c[n + k]`.
pub fn apply_shift_operator<C: ShiftCoefficient>(
    coeffs: &[C],
    seq: &SymbolSequence,
    n: i64,
    f: &GaloisField,
) -> Result<Vec<Gf>> {
    let out_dim = coeffs.first().map_or(seq.dim(), |c| c.output_dim(seq.dim()));
    let mut acc = vec![Gf::ZERO; out_dim];
    for (k, c) in coeffs.iter().enumerate() {
        if c.input_dim(seq.dim()) != seq.dim() || c.output_dim(seq.dim()) != out_dim {
            return Err(Error::DimensionMismatch(format!(
                "operator coefficient {k} does not fit sequences of dimension {}",
                seq.dim()
            )));
        }
        c.accumulate(seq.at(n + k as i64)?, &mut acc, f);
    }
    Ok(acc)
}

impl Poly {
    /// `(self(z) c)[n]`.
    pub fn apply(&self, seq: &SymbolSequence, n: i64, f: &GaloisField) -> Result<Vec<Gf>> {
        apply_shift_operator(&self.coeffs, seq, n, f)
    }

    /// Apply over a time window `[from, to)`, producing a new sequence.
    pub fn apply_range(
        &self,
        seq: &SymbolSequence,
        from: i64,
        to: i64,
        f: &GaloisField,
    ) -> Result<SymbolSequence> {
        let mut out = SymbolSequence::new(from, seq.dim());
        for n in from..to {
            out.push(self.apply(seq, n, f)?)?;
        }
        Ok(out)
    }
}
