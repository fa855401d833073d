//! Arithmetic in GF(2^m), 1 <= m <= 16.
//!
//! Elements use the usual integer encoding: bit `k` of the value is the
//! coefficient of `t^k` in the polynomial basis. Multiplication goes through
//! log/antilog tables built from a generator of the multiplicative group;
//! [`mul_shift_reduce`] is the table-free reference used to cross-check them.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Primitive polynomial `t^8 + t^4 + t^3 + t^2 + 1`.
pub const DEFAULT_POLY: u32 = 0x11D;
pub const DEFAULT_DEGREE: u32 = 8;
pub const MAX_DEGREE: u32 = 16;

/// A field element in integer encoding.
#[derive(Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Gf(pub u16);

impl Gf {
    pub const ZERO: Gf = Gf(0);
    pub const ONE: Gf = Gf(1);

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub fn value(self) -> u32 {
        self.0 as u32
    }
}

impl fmt::Debug for Gf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Gf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Field parameters as written in topology and trace files:
/// `gf2^<m>:0x<poly>`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FieldSpec {
    pub degree: u32,
    pub poly: u32,
}

impl Default for FieldSpec {
    fn default() -> Self {
        FieldSpec { degree: DEFAULT_DEGREE, poly: DEFAULT_POLY }
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "gf2^{}:0x{:X}", self.degree, self.poly)
    }
}

impl FromStr for FieldSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidFieldSpec(s.to_string());
        let rest = s.trim().strip_prefix("gf2^").ok_or_else(bad)?;
        let (deg, poly) = rest.split_once(':').ok_or_else(bad)?;
        let degree: u32 = deg.parse().map_err(|_| bad())?;
        let hex = poly
            .strip_prefix("0x")
            .or_else(|| poly.strip_prefix("0X"))
            .ok_or_else(bad)?;
        let poly = u32::from_str_radix(hex, 16).map_err(|_| bad())?;
        Ok(FieldSpec { degree, poly })
    }
}

/// Carry-less multiplication of `a` and `b` reduced modulo `poly`, where
/// `poly` has degree `m`.
pub fn mul_shift_reduce(a: u32, b: u32, m: u32, poly: u32) -> u32 {
    let mut a = a;
    let mut b = b;
    let mut acc = 0u32;
    while b != 0 {
        if b & 1 != 0 {
            acc ^= a;
        }
        b >>= 1;
        a <<= 1;
        if a >> m & 1 != 0 {
            a ^= poly;
        }
    }
    acc
}

fn poly_rem(mut a: u32, b: u32) -> u32 {
    let db = 31 - b.leading_zeros();
    while a != 0 && 31 - a.leading_zeros() >= db {
        a ^= b << (31 - a.leading_zeros() - db);
    }
    a
}

/// Trial division by every polynomial of degree 1..=deg/2 over GF(2).
fn is_irreducible(poly: u32) -> bool {
    let deg = 31 - poly.leading_zeros();
    (2u32..1 << (deg / 2 + 1)).all(|d| poly_rem(poly, d) != 0)
}

/// The field context: degree, modulus and the log/antilog tables.
///
/// Immutable once built; share it by reference or `Arc`.
#[derive(Clone)]
pub struct GaloisField {
    spec: FieldSpec,
    order: usize,
    // exp has 2*(order-1) entries so that log a + log b never needs reducing.
    exp: Vec<u16>,
    log: Vec<u16>,
}

impl fmt::Debug for GaloisField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GaloisField").field("spec", &self.spec.to_string()).finish()
    }
}

impl PartialEq for GaloisField {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
    }
}

impl Eq for GaloisField {}

impl Default for GaloisField {
    fn default() -> Self {
        GaloisField::new(FieldSpec::default()).expect("0x11D is primitive")
    }
}

impl GaloisField {
    pub fn new(spec: FieldSpec) -> Result<Self> {
        let FieldSpec { degree: m, poly } = spec;
        if m == 0 || m > MAX_DEGREE {
            return Err(Error::InvalidFieldSpec(spec.to_string()));
        }
        if poly >> m != 1 {
            return Err(Error::NotAField { m, poly });
        }
        if !is_irreducible(poly) {
            return Err(Error::NotAField { m, poly });
        }
        let order = 1usize << m;
        for g in 1..order as u32 {
            if let Some((exp, log)) = Self::tables(g, m, poly) {
                return Ok(GaloisField { spec, order, exp, log });
            }
        }
        Err(Error::NotAField { m, poly })
    }

    pub fn with_degree(m: u32, poly: u32) -> Result<Self> {
        Self::new(FieldSpec { degree: m, poly })
    }

    fn tables(generator: u32, m: u32, poly: u32) -> Option<(Vec<u16>, Vec<u16>)> {
        let order = 1usize << m;
        let group = order - 1;
        let mut exp = vec![0u16; 2 * group];
        let mut log = vec![0u16; order];
        let mut seen = vec![false; order];
        let mut x = 1u32;
        for i in 0..group {
            if seen[x as usize] {
                return None;
            }
            seen[x as usize] = true;
            exp[i] = x as u16;
            log[x as usize] = i as u16;
            x = mul_shift_reduce(x, generator, m, poly);
        }
        if x != 1 {
            return None;
        }
        for i in group..2 * group {
            exp[i] = exp[i - group];
        }
        Some((exp, log))
    }

    #[inline]
    pub fn spec(&self) -> FieldSpec {
        self.spec
    }

    #[inline]
    pub fn degree(&self) -> u32 {
        self.spec.degree
    }

    /// Number of elements, `2^m`.
    #[inline]
    pub fn order(&self) -> usize {
        self.order
    }

    /// Checked conversion from an integer.
    pub fn elem(&self, value: u32) -> Result<Gf> {
        if (value as usize) < self.order {
            Ok(Gf(value as u16))
        } else {
            Err(Error::ElementOutOfRange { value, m: self.spec.degree })
        }
    }

    #[inline]
    pub fn contains(&self, a: Gf) -> bool {
        (a.0 as usize) < self.order
    }

    #[inline]
    pub fn add(&self, a: Gf, b: Gf) -> Gf {
        Gf(a.0 ^ b.0)
    }

    #[inline]
    pub fn mul(&self, a: Gf, b: Gf) -> Gf {
        if a.0 == 0 || b.0 == 0 {
            return Gf::ZERO;
        }
        let i = self.log[a.0 as usize] as usize + self.log[b.0 as usize] as usize;
        Gf(self.exp[i])
    }

    pub fn inv(&self, a: Gf) -> Result<Gf> {
        if a.0 == 0 {
            return Err(Error::DivisionByZero);
        }
        let group = self.order - 1;
        let l = self.log[a.0 as usize] as usize;
        Ok(Gf(self.exp[(group - l) % group]))
    }

    pub fn div(&self, a: Gf, b: Gf) -> Result<Gf> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, a: Gf, e: u64) -> Gf {
        if e == 0 {
            return Gf::ONE;
        }
        if a.0 == 0 {
            return Gf::ZERO;
        }
        let group = (self.order - 1) as u64;
        let l = self.log[a.0 as usize] as u64;
        Gf(self.exp[((l * (e % group)) % group) as usize])
    }

    /// `acc += a * b`.
    #[inline]
    pub fn mul_acc(&self, acc: &mut Gf, a: Gf, b: Gf) {
        acc.0 ^= self.mul(a, b).0;
    }

    /// Uniformly random element.
    pub fn random<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> Gf {
        Gf(rng.gen_range(0..self.order) as u16)
    }

    /// Uniformly random nonzero element.
    pub fn random_nonzero<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> Gf {
        Gf(rng.gen_range(1..self.order) as u16)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn gf256() -> GaloisField {
        GaloisField::default()
    }

    fn gf16() -> GaloisField {
        GaloisField::with_degree(4, 0x13).unwrap()
    }

    #[test]
    fn parse_and_print_field_spec() {
        let spec: FieldSpec = "gf2^8:0x11D".parse().unwrap();
        assert_eq!(spec, FieldSpec::default());
        assert_eq!(spec.to_string(), "gf2^8:0x11D");
        assert!("gf3^8:0x11D".parse::<FieldSpec>().is_err());
        assert!("gf2^8:11D".parse::<FieldSpec>().is_err());
        assert!("gf2^x:0x11D".parse::<FieldSpec>().is_err());
    }

    #[test]
    fn add_examples() {
        let f = gf256();
        assert_eq!(f.add(Gf(157), Gf(157)), Gf::ZERO);
        assert_eq!(f.add(Gf(113), Gf(63)), Gf(113 ^ 63));
        assert_eq!(f.add(Gf(113), Gf(63)), Gf(78));
        for x in 0..256u16 {
            assert_eq!(f.add(Gf(x), Gf::ZERO), Gf(x));
        }
    }

    #[test]
    fn mul_matches_two_hop_impulse_paths() {
        let f = gf256();
        // u_{s2,1} -> x8 -> x4 and u_{s1,1} -> x7 -> x5
        assert_eq!(f.mul(Gf(217), Gf(44)), Gf(231));
        assert_eq!(f.mul(Gf(239), Gf(101)), Gf(157));
        for x in 0..256u16 {
            assert_eq!(f.mul(Gf(x), Gf::ONE), Gf(x));
        }
    }

    /// Extended Euclid over GF(2)[t]; independent of the tables.
    fn inverse_by_euclid(a: u32, poly: u32) -> u32 {
        fn deg(p: u32) -> i32 {
            31 - p.leading_zeros() as i32
        }
        fn clmul(a: u32, b: u32) -> u32 {
            let mut r = 0;
            for i in 0..16 {
                if b >> i & 1 == 1 {
                    r ^= a << i;
                }
            }
            r
        }
        let (mut r0, mut r1) = (poly, a);
        let (mut s0, mut s1) = (0u32, 1u32);
        while r1 != 0 {
            let mut q = 0u32;
            let mut r = r0;
            while r != 0 && deg(r) >= deg(r1) {
                let shift = deg(r) - deg(r1);
                q ^= 1 << shift;
                r ^= r1 << shift;
            }
            r0 = r1;
            r1 = r;
            let s = s0 ^ clmul(q, s1);
            s0 = s1;
            s1 = s;
        }
        assert_eq!(r0, 1);
        s0
    }

    #[test]
    fn inverse_examples() {
        let f = gf256();
        assert_eq!(f.inv(Gf::ONE).unwrap(), Gf::ONE);
        assert_eq!(f.inv(Gf::ZERO), Err(Error::DivisionByZero));
        let expected = inverse_by_euclid(2, DEFAULT_POLY);
        assert_eq!(expected, 142);
        assert_eq!(f.inv(Gf(2)).unwrap(), Gf(142));
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let a = f.random_nonzero(&mut rng);
            assert_eq!(f.mul(a, f.inv(a).unwrap()), Gf::ONE);
            assert_eq!(f.inv(a).unwrap().value(), inverse_by_euclid(a.value(), DEFAULT_POLY));
        }
    }

    #[test]
    fn axioms_exhaustive_gf16() {
        let f = gf16();
        for a in 0..16u16 {
            for b in 0..16u16 {
                let (a, b) = (Gf(a), Gf(b));
                assert_eq!(f.mul(a, b), f.mul(b, a));
                assert_eq!(f.mul(a, b).value(), mul_shift_reduce(a.value(), b.value(), 4, 0x13));
                for c in 0..16u16 {
                    let c = Gf(c);
                    assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                    assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                    assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
                }
            }
        }
    }

    #[test]
    fn axioms_random_gf256() {
        let f = gf256();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10_000 {
            let a = f.random(&mut rng);
            let b = f.random(&mut rng);
            let c = f.random(&mut rng);
            assert_eq!(f.mul(a, b).value(), mul_shift_reduce(a.value(), b.value(), 8, DEFAULT_POLY));
            assert_eq!(f.mul(a, b), f.mul(b, a));
            assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
            assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
        }
    }

    #[test]
    fn small_and_large_degrees() {
        let gf2 = GaloisField::with_degree(1, 0b11).unwrap();
        assert_eq!(gf2.mul(Gf(1), Gf(1)), Gf(1));
        assert_eq!(gf2.inv(Gf(1)).unwrap(), Gf(1));
        // t^16 + t^12 + t^3 + t + 1
        let big = GaloisField::with_degree(16, 0x1100B).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let a = big.random_nonzero(&mut rng);
            let b = Gf(rng.gen());
            assert_eq!(big.mul(a, b).value(), mul_shift_reduce(a.value(), b.value(), 16, 0x1100B));
            assert_eq!(big.mul(a, big.inv(a).unwrap()), Gf::ONE);
        }
    }

    #[test]
    fn irreducible_but_not_primitive_modulus_is_accepted() {
        // t^8 + t^4 + t^3 + t + 1 (the AES modulus) is irreducible, t is not a generator.
        let f = GaloisField::with_degree(8, 0x11B).unwrap();
        for a in 1..256u16 {
            assert_eq!(f.mul(Gf(a), f.inv(Gf(a)).unwrap()), Gf::ONE);
            assert_eq!(f.mul(Gf(a), Gf(7)).value(), mul_shift_reduce(a as u32, 7, 8, 0x11B));
        }
    }

    #[test]
    fn reducible_modulus_is_rejected() {
        // t^8 + 1 = (t + 1)^8
        assert!(matches!(GaloisField::with_degree(8, 0x101), Err(Error::NotAField { .. })));
        // wrong degree
        assert!(GaloisField::with_degree(8, 0x1D).is_err());
        assert!(GaloisField::with_degree(17, 0x2_0009).is_err());
    }

    #[test]
    fn elem_range_check() {
        let f = gf16();
        assert_eq!(f.elem(15).unwrap(), Gf(15));
        assert!(f.elem(16).is_err());
    }
}
