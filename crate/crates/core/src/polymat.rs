//! Matrices over the polynomial ring GF(2^m)[z].
//!
//! Determinant and rank use fraction-free (Bareiss) elimination, so every
//! intermediate value stays in the ring and each division is exact. Because
//! the characteristic is two, row swaps never change the sign of the
//! determinant and cofactors need no sign.

use std::fmt;

use crate::error::{Error, Result};
use crate::field::{GaloisField, Gf};
use crate::linalg::FieldMatrix;
use crate::poly::{apply_shift_operator, Poly, SymbolSequence};

/// Size limits for ring computations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    pub max_degree: usize,
    pub max_dim: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { max_degree: 64, max_dim: 32 }
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PolyMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Poly>,
}

impl PolyMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        PolyMatrix { rows, cols, entries: vec![Poly::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = PolyMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Poly::one());
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, entries: Vec<Poly>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} polynomial matrix",
                entries.len()
            )));
        }
        Ok(PolyMatrix { rows, cols, entries })
    }

    pub fn from_rows(rows: Vec<Vec<Poly>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let n = rows.len();
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch("ragged polynomial matrix".into()));
        }
        PolyMatrix::from_vec(n, cols, rows.into_iter().flatten().collect())
    }

    /// Matrix whose columns are the given polynomial vectors.
    pub fn from_columns(columns: &[Vec<Poly>]) -> Result<Self> {
        let rows = columns.first().map_or(0, Vec::len);
        let mut m = PolyMatrix::zeros(rows, columns.len());
        for (c, col) in columns.iter().enumerate() {
            if col.len() != rows {
                return Err(Error::DimensionMismatch(format!(
                    "column {c} has {} entries, expected {rows}",
                    col.len()
                )));
            }
            for (r, p) in col.iter().enumerate() {
                m.set(r, c, p.clone());
            }
        }
        Ok(m)
    }

    /// `sum_k coeffs[k] z^k`.
    pub fn from_coefficients(coeffs: &[FieldMatrix]) -> Result<Self> {
        let Some(first) = coeffs.first() else {
            return Err(Error::DimensionMismatch("no coefficient matrices".into()));
        };
        let (rows, cols) = (first.rows(), first.cols());
        let mut entries = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                let mut v = Vec::with_capacity(coeffs.len());
                for m in coeffs {
                    if m.rows() != rows || m.cols() != cols {
                        return Err(Error::DimensionMismatch("coefficient shapes differ".into()));
                    }
                    v.push(m.get(r, c));
                }
                entries.push(Poly::from_coeffs(v));
            }
        }
        PolyMatrix::from_vec(rows, cols, entries)
    }

    /// Coefficient matrices `G[0], ..., G[d]` with `G(z) = sum_k G[k] z^k`.
    /// The zero matrix yields a single zero coefficient.
    pub fn coefficients(&self) -> Vec<FieldMatrix> {
        let len = self.max_degree().map_or(1, |d| d + 1);
        (0..len)
            .map(|k| {
                let mut m = FieldMatrix::zeros(self.rows, self.cols);
                for r in 0..self.rows {
                    for c in 0..self.cols {
                        m.set(r, c, self.get(r, c).coeff(k));
                    }
                }
                m
            })
            .collect()
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> &Poly {
        &self.entries[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, p: Poly) {
        self.entries[r * self.cols + c] = p;
    }

    pub fn column(&self, c: usize) -> Vec<Poly> {
        (0..self.rows).map(|r| self.get(r, c).clone()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Poly::is_zero)
    }

    /// Largest entry degree; `None` for the zero matrix.
    pub fn max_degree(&self) -> Option<usize> {
        self.entries.iter().filter_map(Poly::degree).max()
    }

    pub fn select_rows(&self, rows: &[usize]) -> PolyMatrix {
        let entries = rows
            .iter()
            .flat_map(|&r| (0..self.cols).map(move |c| (r, c)))
            .map(|(r, c)| self.get(r, c).clone())
            .collect();
        PolyMatrix { rows: rows.len(), cols: self.cols, entries }
    }

    pub fn select_columns(&self, cols: &[usize]) -> PolyMatrix {
        let entries = (0..self.rows)
            .flat_map(|r| cols.iter().map(move |&c| (r, c)))
            .map(|(r, c)| self.get(r, c).clone())
            .collect();
        PolyMatrix { rows: self.rows, cols: cols.len(), entries }
    }

    pub fn add(&self, other: &PolyMatrix) -> Result<PolyMatrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch("polynomial matrix sum".into()));
        }
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a.add(b)).collect();
        Ok(PolyMatrix { rows: self.rows, cols: self.cols, entries })
    }

    pub fn mul(&self, other: &PolyMatrix, f: &GaloisField) -> Result<PolyMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = PolyMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = Poly::zero();
                for k in 0..self.cols {
                    acc.add_assign(&self.get(i, k).mul(other.get(k, j), f));
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, p: &Poly, f: &GaloisField) -> PolyMatrix {
        let entries = self.entries.iter().map(|e| e.mul(p, f)).collect();
        PolyMatrix { rows: self.rows, cols: self.cols, entries }
    }

    /// Substitute `z = x`.
    pub fn eval_at(&self, x: Gf, f: &GaloisField) -> FieldMatrix {
        let data = self.entries.iter().map(|p| p.eval(x, f)).collect();
        FieldMatrix::from_vec(self.rows, self.cols, data).expect("shape is consistent")
    }

    /// `(G(z) u)[n]`.
    pub fn apply(&self, seq: &SymbolSequence, n: i64, f: &GaloisField) -> Result<Vec<Gf>> {
        if seq.dim() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} operator applied to sequences of dimension {}",
                self.rows,
                self.cols,
                seq.dim()
            )));
        }
        apply_shift_operator(&self.coefficients(), seq, n, f)
    }

    pub fn check_limits(&self, limits: &Limits) -> Result<()> {
        if self.rows > limits.max_dim || self.cols > limits.max_dim {
            return Err(Error::TooLarge(format!(
                "{}x{} matrix exceeds {}x{}",
                self.rows, self.cols, limits.max_dim, limits.max_dim
            )));
        }
        if let Some(d) = self.max_degree() {
            if d > limits.max_degree {
                return Err(Error::TooLarge(format!(
                    "entry degree {d} exceeds {}",
                    limits.max_degree
                )));
            }
        }
        Ok(())
    }

    /// Exact determinant over GF(2^m)[z] by Bareiss elimination.
    pub fn det(&self, f: &GaloisField) -> Result<Poly> {
        if self.rows != self.cols {
            return Err(Error::NotSquare { rows: self.rows, cols: self.cols });
        }
        let n = self.rows;
        if n == 0 {
            return Ok(Poly::one());
        }
        let mut m = self.clone();
        let mut prev = Poly::one();
        for k in 0..n - 1 {
            let Some(p) = (k..n).find(|&i| !m.get(i, k).is_zero()) else {
                return Ok(Poly::zero());
            };
            m.swap_rows(k, p);
            let pivot = m.get(k, k).clone();
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = pivot.mul(m.get(i, j), f).add(&m.get(i, k).mul(m.get(k, j), f));
                    m.set(i, j, num.div_exact(&prev, f));
                }
                m.set(i, k, Poly::zero());
            }
            prev = pivot;
        }
        Ok(m.get(n - 1, n - 1).clone())
    }

    /// Rank over the fraction field GF(2^m)(z).
    pub fn rank_over_ring(&self, f: &GaloisField) -> usize {
        let mut m = self.clone();
        let mut prev = Poly::one();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !m.get(i, c).is_zero()) else {
                continue;
            };
            m.swap_rows(r, p);
            let pivot = m.get(r, c).clone();
            for i in r + 1..m.rows {
                for j in c + 1..m.cols {
                    let num = pivot.mul(m.get(i, j), f).add(&m.get(i, c).mul(m.get(r, j), f));
                    m.set(i, j, num.div_exact(&prev, f));
                }
                m.set(i, c, Poly::zero());
            }
            prev = pivot;
            r += 1;
        }
        r
    }

    /// Transposed cofactor matrix, satisfying `adj(G) G = G adj(G) = det(G) I`.
    /// The adjugate of a 1x1 matrix is `[1]`.
    pub fn adjugate(&self, f: &GaloisField) -> Result<PolyMatrix> {
        if self.rows != self.cols {
            return Err(Error::NotSquare { rows: self.rows, cols: self.cols });
        }
        let n = self.rows;
        let mut adj = PolyMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                // adj[i][j] is the cofactor of entry (j, i).
                let keep_rows: Vec<usize> = (0..n).filter(|&r| r != j).collect();
                let keep_cols: Vec<usize> = (0..n).filter(|&c| c != i).collect();
                let minor = self.select_rows(&keep_rows).select_columns(&keep_cols);
                adj.set(i, j, minor.det(f)?);
            }
        }
        Ok(adj)
    }

    /// Lexicographically first set of `cols` rows whose square submatrix is
    /// nonsingular, together with their indices.
    pub fn select_full_rank_rows(&self, f: &GaloisField) -> Result<(PolyMatrix, Vec<usize>)> {
        // Greedy insertion in index order picks the lexicographically smallest
        // basis of the row matroid.
        let mut kept: Vec<usize> = Vec::with_capacity(self.cols);
        for r in 0..self.rows {
            if kept.len() == self.cols {
                break;
            }
            let mut trial = kept.clone();
            trial.push(r);
            if self.select_rows(&trial).rank_over_ring(f) == trial.len() {
                kept = trial;
            }
        }
        if kept.len() < self.cols {
            return Err(Error::NotFullColumnRank { rank: kept.len(), cols: self.cols });
        }
        Ok((self.select_rows(&kept), kept))
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.entries.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    /// Textual form `[[p, q], [r, s]]`.
    pub fn to_text(&self) -> String {
        self.to_string()
    }

    pub fn parse(text: &str, f: &GaloisField) -> Result<PolyMatrix> {
        let bad = |why: &str| Error::Parse(format!("bad polynomial matrix ({why}): `{text}`"));
        let t = text.trim();
        let inner = t
            .strip_prefix('[')
            .and_then(|s| s.strip_suffix(']'))
            .ok_or_else(|| bad("missing outer brackets"))?
            .trim();
        if inner.is_empty() {
            return Ok(PolyMatrix::zeros(0, 0));
        }
        let mut rows = Vec::new();
        let mut rest = inner;
        loop {
            let open = rest.strip_prefix('[').ok_or_else(|| bad("expected `[`"))?;
            let close = open.find(']').ok_or_else(|| bad("unterminated row"))?;
            let row = &open[..close];
            let entries = if row.trim().is_empty() {
                Vec::new()
            } else {
                row.split(',').map(|e| Poly::parse(e, f)).collect::<Result<Vec<_>>>()?
            };
            rows.push(entries);
            rest = open[close + 1..].trim_start();
            if rest.is_empty() {
                break;
            }
            rest = rest.strip_prefix(',').ok_or_else(|| bad("expected `,` between rows"))?.trim_start();
        }
        PolyMatrix::from_rows(rows)
    }
}

impl fmt::Display for PolyMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for r in 0..self.rows {
            if r > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for c in 0..self.cols {
                if c > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.get(r, c))?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

impl fmt::Debug for PolyMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PolyMatrix({self})")
    }
}

/// Whether the given polynomial column vectors are linearly independent over
/// GF(2^m)[z].
pub fn columns_independent(columns: &[Vec<Poly>], f: &GaloisField) -> Result<bool> {
    if columns.is_empty() {
        return Ok(true);
    }
    let m = PolyMatrix::from_columns(columns)?;
    Ok(m.rank_over_ring(f) == columns.len())
}
