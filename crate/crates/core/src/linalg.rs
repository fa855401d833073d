//! Dense matrices over GF(2^m): products, reduced row-echelon form, rank,
//! nullspace and the characteristic polynomial.

use std::fmt;

use crate::error::{Error, Result};
use crate::field::{GaloisField, Gf};
use crate::poly::Poly;
use crate::polymat::PolyMatrix;

/// Row-major dense matrix.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FieldMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Gf>,
}

impl FieldMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        FieldMatrix { rows, cols, data: vec![Gf::ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = FieldMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Gf::ONE);
        }
        m
    }

    /// Build from integer rows. Panics on ragged input.
    pub fn from_rows<R: AsRef<[u16]>>(rows: &[R]) -> Self {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.as_ref().len(), cols, "ragged matrix rows");
            data.extend(r.as_ref().iter().map(|&v| Gf(v)));
        }
        FieldMatrix { rows: rows.len(), cols, data }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<Gf>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(FieldMatrix { rows, cols, data })
    }

    /// Matrix whose columns are the given vectors, all of length `rows`.
    pub fn from_columns(rows: usize, columns: &[Vec<Gf>]) -> Result<Self> {
        let mut m = FieldMatrix::zeros(rows, columns.len());
        for (c, col) in columns.iter().enumerate() {
            if col.len() != rows {
                return Err(Error::DimensionMismatch(format!(
                    "column {c} has {} entries, expected {rows}",
                    col.len()
                )));
            }
            for (r, &v) in col.iter().enumerate() {
                m.set(r, c, v);
            }
        }
        Ok(m)
    }

    pub fn random<R: rand::Rng + ?Sized>(rows: usize, cols: usize, f: &GaloisField, rng: &mut R) -> Self {
        let data = (0..rows * cols).map(|_| f.random(rng)).collect();
        FieldMatrix { rows, cols, data }
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
    pub fn get(&self, r: usize, c: usize) -> Gf {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Gf) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[Gf] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<Gf> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| v.is_zero())
    }

    pub fn to_rows(&self) -> Vec<Vec<u16>> {
        (0..self.rows).map(|r| self.row(r).iter().map(|v| v.0).collect()).collect()
    }

    pub fn add(&self, other: &FieldMatrix) -> Result<FieldMatrix> {
        self.same_shape(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| Gf(a.0 ^ b.0)).collect();
        Ok(FieldMatrix { rows: self.rows, cols: self.cols, data })
    }

    pub fn scale(&self, c: Gf, f: &GaloisField) -> FieldMatrix {
        let data = self.data.iter().map(|&a| f.mul(a, c)).collect();
        FieldMatrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn mul(&self, other: &FieldMatrix, f: &GaloisField) -> Result<FieldMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = FieldMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let idx = i * other.cols + j;
                    f.mul_acc(&mut out.data[idx], a, other.get(k, j));
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, x: &[Gf], f: &GaloisField) -> Result<Vec<Gf>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by a vector of length {}",
                self.rows,
                self.cols,
                x.len()
            )));
        }
        Ok((0..self.rows)
            .map(|r| {
                let mut acc = Gf::ZERO;
                for (&a, &b) in self.row(r).iter().zip(x) {
                    f.mul_acc(&mut acc, a, b);
                }
                acc
            })
            .collect())
    }

    pub fn pow(&self, e: usize, f: &GaloisField) -> Result<FieldMatrix> {
        self.require_square()?;
        let mut result = FieldMatrix::identity(self.rows);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base, f)?;
            }
            base = base.mul(&base, f)?;
            e >>= 1;
        }
        Ok(result)
    }

    /// `p(A) = sum_k p_k A^k`, by Horner's rule.
    pub fn eval_poly(&self, p: &Poly, f: &GaloisField) -> Result<FieldMatrix> {
        self.require_square()?;
        let n = self.rows;
        let mut acc = FieldMatrix::zeros(n, n);
        for &c in p.coeffs().iter().rev() {
            acc = acc.mul(self, f)?;
            for i in 0..n {
                let v = acc.get(i, i);
                acc.set(i, i, f.add(v, c));
            }
        }
        Ok(acc)
    }

    /// Stack `self` on top of `other`.
    pub fn vstack(&self, other: &FieldMatrix) -> Result<FieldMatrix> {
        if self.cols != other.cols && self.rows != 0 && other.rows != 0 {
            return Err(Error::DimensionMismatch("vstack with different column counts".into()));
        }
        let cols = if self.rows == 0 { other.cols } else { self.cols };
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(FieldMatrix { rows: self.rows + other.rows, cols, data })
    }

    pub fn select_rows(&self, rows: &[usize]) -> FieldMatrix {
        let mut data = Vec::with_capacity(rows.len() * self.cols);
        for &r in rows {
            data.extend_from_slice(self.row(r));
        }
        FieldMatrix { rows: rows.len(), cols: self.cols, data }
    }

    pub fn select_columns(&self, cols: &[usize]) -> FieldMatrix {
        let mut out = FieldMatrix::zeros(self.rows, cols.len());
        for r in 0..self.rows {
            for (j, &c) in cols.iter().enumerate() {
                out.set(r, j, self.get(r, c));
            }
        }
        out
    }

    fn same_shape(&self, other: &FieldMatrix) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    fn require_square(&self) -> Result<()> {
        if self.rows != self.cols {
            return Err(Error::NotSquare { rows: self.rows, cols: self.cols });
        }
        Ok(())
    }

    /// Reduced row-echelon form and the (strictly increasing) pivot columns.
    pub fn rref(&self, f: &GaloisField) -> (FieldMatrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !m.get(i, c).is_zero()) else {
                continue;
            };
            m.swap_rows(r, p);
            let inv = f.inv(m.get(r, c)).expect("pivot is nonzero");
            for j in c..m.cols {
                let v = m.get(r, j);
                m.set(r, j, f.mul(v, inv));
            }
            for i in 0..m.rows {
                if i == r {
                    continue;
                }
                let factor = m.get(i, c);
                if factor.is_zero() {
                    continue;
                }
                for j in c..m.cols {
                    let v = f.add(m.get(i, j), f.mul(factor, m.get(r, j)));
                    m.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self, f: &GaloisField) -> usize {
        self.rref(f).1.len()
    }

    /// Basis of `{v : M v = 0}`, one vector per free column in ascending
    /// order. Each vector has a one in its own free column and zeros in every
    /// other free column, so the first vector has the smallest possible
    /// highest nonzero index among all kernel vectors.
    pub fn nullspace(&self, f: &GaloisField) -> Vec<Vec<Gf>> {
        let (r, pivots) = self.rref(f);
        let mut is_pivot = vec![false; self.cols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        (0..self.cols)
            .filter(|&c| !is_pivot[c])
            .map(|free| {
                let mut v = vec![Gf::ZERO; self.cols];
                v[free] = Gf::ONE;
                // characteristic 2: -x == x
                for (row, &p) in pivots.iter().enumerate() {
                    v[p] = r.get(row, free);
                }
                v
            })
            .collect()
    }

    /// `det(tI - A)`, computed as a polynomial-matrix determinant.
    pub fn char_poly(&self, f: &GaloisField) -> Result<Poly> {
        self.require_square()?;
        let n = self.rows;
        let entries = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| {
                let c = Poly::constant(self.get(i, j));
                if i == j {
                    c.add(&Poly::z())
                } else {
                    c
                }
            })
            .collect();
        PolyMatrix::from_vec(n, n, entries)?.det(f)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }
}

impl fmt::Debug for FieldMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.to_rows())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn gf() -> GaloisField {
        GaloisField::default()
    }

    #[test]
    fn rref_trivial_cases() {
        let f = gf();
        let (r, p) = FieldMatrix::identity(4).rref(&f);
        assert_eq!(r, FieldMatrix::identity(4));
        assert_eq!(p, vec![0, 1, 2, 3]);
        let (r, p) = FieldMatrix::zeros(3, 5).rref(&f);
        assert!(r.is_zero());
        assert!(p.is_empty());
    }

    /// Textbook elimination with explicit division by the pivot and a
    /// separate back-substitution pass; shares nothing with `rref`.
    fn rref_oracle(m: &FieldMatrix, f: &GaloisField) -> Vec<Vec<u16>> {
        let mut a: Vec<Vec<u16>> = m.to_rows();
        let (rows, cols) = (m.rows(), m.cols());
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..cols {
            let Some(p) = (r..rows).find(|&i| a[i][c] != 0) else { continue };
            a.swap(r, p);
            for i in r + 1..rows {
                if a[i][c] != 0 {
                    let ratio = f.div(Gf(a[i][c]), Gf(a[r][c])).unwrap();
                    for j in 0..cols {
                        a[i][j] ^= f.mul(ratio, Gf(a[r][j])).0;
                    }
                }
            }
            pivots.push((r, c));
            r += 1;
            if r == rows {
                break;
            }
        }
        for &(r, c) in pivots.iter().rev() {
            let inv = f.inv(Gf(a[r][c])).unwrap();
            for j in 0..cols {
                a[r][j] = f.mul(Gf(a[r][j]), inv).0;
            }
            for i in 0..r {
                if a[i][c] != 0 {
                    let ratio = Gf(a[i][c]);
                    for j in 0..cols {
                        a[i][j] ^= f.mul(ratio, Gf(a[r][j])).0;
                    }
                }
            }
        }
        a
    }

    #[test]
    fn rref_matches_oracle_on_random_matrices() {
        let f = gf();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for trial in 0..200 {
            let mut m = FieldMatrix::random(4, 6, &f, &mut rng);
            if trial % 3 == 0 {
                // force a dependency
                for c in 0..6 {
                    let v = f.add(m.get(0, c), m.get(1, c));
                    m.set(2, c, v);
                }
            }
            let (r, pivots) = m.rref(&f);
            assert_eq!(r.to_rows(), rref_oracle(&m, &f));
            assert!(pivots.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn nullspace_examples() {
        let f = gf();
        assert!(FieldMatrix::identity(3).nullspace(&f).is_empty());
        let gf2 = GaloisField::with_degree(1, 0b11).unwrap();
        let ns = FieldMatrix::from_rows(&[[1u16, 1]]).nullspace(&gf2);
        assert_eq!(ns, vec![vec![Gf(1), Gf(1)]]);
    }

    #[test]
    fn rank_nullity_and_kernel_membership() {
        let f = gf();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for rows in 1..6 {
            for cols in 1..7 {
                let mut m = FieldMatrix::random(rows, cols, &f, &mut rng);
                if rows > 1 {
                    for c in 0..cols {
                        let v = f.mul(m.get(0, c), Gf(77));
                        m.set(rows - 1, c, v);
                    }
                }
                let ns = m.nullspace(&f);
                assert_eq!(m.rank(&f) + ns.len(), cols);
                for v in &ns {
                    assert!(m.mul_vec(v, &f).unwrap().iter().all(|x| x.is_zero()));
                }
            }
        }
    }

    #[test]
    fn char_poly_trivial_cases() {
        let f = gf();
        for n in 1..5 {
            assert_eq!(FieldMatrix::zeros(n, n).char_poly(&f).unwrap(), Poly::monomial(Gf::ONE, n));
            let mut expected = Poly::one();
            let t_plus_1 = Poly::from_u16s(&[1, 1]);
            for _ in 0..n {
                expected = expected.mul(&t_plus_1, &f);
            }
            assert_eq!(FieldMatrix::identity(n).char_poly(&f).unwrap(), expected);
        }
        assert!(matches!(FieldMatrix::zeros(2, 3).char_poly(&f), Err(Error::NotSquare { .. })));
    }

    #[test]
    fn cayley_hamilton_on_random_matrices() {
        let f = gf();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for i in 0..50 {
            let n = 1 + i % 8;
            let a = FieldMatrix::random(n, n, &f, &mut rng);
            let p = a.char_poly(&f).unwrap();
            assert_eq!(p.degree(), Some(n));
            assert_eq!(p.leading(), Some(Gf::ONE));
            assert!(a.eval_poly(&p, &f).unwrap().is_zero());
        }
    }

    #[test]
    fn pow_and_products() {
        let f = gf();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = FieldMatrix::random(3, 3, &f, &mut rng);
        let a3 = a.mul(&a, &f).unwrap().mul(&a, &f).unwrap();
        assert_eq!(a.pow(3, &f).unwrap(), a3);
        assert_eq!(a.pow(0, &f).unwrap(), FieldMatrix::identity(3));
        assert!(a.mul(&FieldMatrix::zeros(2, 2), &f).is_err());
    }
}
