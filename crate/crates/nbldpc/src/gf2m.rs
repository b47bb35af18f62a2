//! Arithmetic in GF(2^m) using the integer representation of field elements.
//!
//! An element with polynomial form `b_1 + b_2 x + ... + b_m x^(m-1)` is stored as
//! the integer `sum b_i 2^(i-1)`. Addition is XOR; multiplication goes through
//! log/antilog tables built from a primitive polynomial.
//!
//! The context also caches the bit-membership sets used by the embedding
//! constraints: `B(k, h) = {a : bit_k(h a) = 1}` and, for a nonempty set of bit
//! positions `K`, `B~(K, h) = {a : sum_{k in K} bit_k(h a) = 1 mod 2}`. Bit
//! positions are 1-based. A set `K` is passed as a bitmask where bit `k - 1`
//! stands for position `k`, so the nonempty subsets are exactly the masks
//! `1..q`.

use thiserror::Error;

/// A field element in integer representation.
pub type Elem = u8;

/// Largest supported extension degree.
pub const MAX_M: u32 = 8;

/// Errors raised while building or using a field context.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("extension degree m = {0} is outside 1..={MAX_M}")]
    UnsupportedDegree(u32),
    #[error("polynomial {poly:#b} does not have degree {m}")]
    WrongDegree { m: u32, poly: u32 },
    #[error("polynomial {poly:#b} is not primitive: table cycle length {cycle} < {expected}")]
    NotPrimitive { poly: u32, cycle: usize, expected: usize },
    #[error("division by zero")]
    DivisionByZero,
    #[error("bit position {k} is outside 1..={m}")]
    BitPosition { k: u32, m: u32 },
    #[error("bit-position set {mask:#b} is empty or exceeds {m} bits")]
    BadSubset { mask: u32, m: u32 },
}

/// Default primitive polynomials, indexed by `m - 1`.
const DEFAULT_POLYS: [u32; 8] = [
    0b11,        // x + 1
    0b111,       // x^2 + x + 1
    0b1011,      // x^3 + x + 1
    0b1_0011,    // x^4 + x + 1
    0b10_0101,   // x^5 + x^2 + 1
    0b100_0011,  // x^6 + x + 1
    0b1000_1001, // x^7 + x^3 + 1
    0b1_0001_1101, // x^8 + x^4 + x^3 + x^2 + 1
];

/// Returns the bundled primitive polynomial for degree `m`.
pub fn default_primitive_poly(m: u32) -> Result<u32, FieldError> {
    if !(1..=MAX_M).contains(&m) {
        return Err(FieldError::UnsupportedDegree(m));
    }
    Ok(DEFAULT_POLYS[(m - 1) as usize])
}

/// A set of field elements stored as a q-bit mask (q <= 256).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub struct ElemSet {
    words: [u64; 4],
}

impl ElemSet {
    /// The empty set.
    pub const fn empty() -> Self {
        Self { words: [0; 4] }
    }

    /// Adds `a` to the set.
    pub fn insert(&mut self, a: Elem) {
        self.words[(a >> 6) as usize] |= 1u64 << (a & 63);
    }

    /// Membership test.
    #[inline]
    pub fn contains(&self, a: Elem) -> bool {
        self.words[(a >> 6) as usize] >> (a & 63) & 1 == 1
    }

    /// Number of elements.
    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// True when no element is present.
    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Elements in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = Elem> + '_ {
        (0..=255u16).map(|a| a as Elem).filter(move |&a| self.contains(a))
    }

    /// Elements in increasing order, collected.
    pub fn to_vec(&self) -> Vec<Elem> {
        self.iter().collect()
    }
}

impl FromIterator<Elem> for ElemSet {
    fn from_iter<I: IntoIterator<Item = Elem>>(iter: I) -> Self {
        let mut s = ElemSet::empty();
        for a in iter {
            s.insert(a);
        }
        s
    }
}

/// Immutable GF(2^m) context: tables plus cached bit-membership sets.
#[derive(Debug, Clone)]
pub struct FieldCtx {
    m: u32,
    q: usize,
    poly: u32,
    exp: Vec<Elem>,
    log: Vec<u8>,
    mul: Vec<Elem>,
    inv: Vec<Elem>,
    /// `btilde[(mask - 1) * (q - 1) + (h - 1)]`.
    btilde: Vec<ElemSet>,
}

impl FieldCtx {
    /// Builds GF(2^m) with the bundled primitive polynomial.
    pub fn new(m: u32) -> Result<Self, FieldError> {
        Self::with_poly(m, default_primitive_poly(m)?)
    }

    /// Builds GF(2^m) from an explicit primitive polynomial given as a bitmask
    /// (bit `i` is the coefficient of `x^i`).
    pub fn with_poly(m: u32, poly: u32) -> Result<Self, FieldError> {
        if !(1..=MAX_M).contains(&m) {
            return Err(FieldError::UnsupportedDegree(m));
        }
        if poly == 0 || 31 - poly.leading_zeros() != m {
            return Err(FieldError::WrongDegree { m, poly });
        }
        let q = 1usize << m;
        let mut exp = Vec::with_capacity(q - 1);
        let mut log = vec![0u8; q];
        let mut cur: u32 = 1;
        loop {
            exp.push(cur as Elem);
            cur <<= 1;
            if cur & (1 << m) != 0 {
                cur ^= poly;
            }
            if cur == 1 || exp.len() == q - 1 {
                break;
            }
        }
        if cur != 1 || exp.len() != q - 1 {
            // A cycle length of 0 means the powers of x never return to 1.
            let cycle = if cur == 1 { exp.len() } else { 0 };
            return Err(FieldError::NotPrimitive { poly, cycle, expected: q - 1 });
        }
        for (i, &e) in exp.iter().enumerate() {
            log[e as usize] = i as u8;
        }

        let mut mul = vec![0 as Elem; q * q];
        let mut inv = vec![0 as Elem; q];
        for a in 1..q {
            for b in 1..q {
                let l = (log[a] as usize + log[b] as usize) % (q - 1);
                mul[a * q + b] = exp[l];
            }
            inv[a] = exp[(q - 1 - log[a] as usize) % (q - 1)];
        }

        let mut ctx = FieldCtx { m, q, poly, exp, log, mul, inv, btilde: Vec::new() };
        let mut btilde = Vec::with_capacity((q - 1) * (q - 1));
        for mask in 1..q as u32 {
            for h in 1..q {
                btilde.push(
                    (0..q)
                        .map(|a| a as Elem)
                        .filter(|&a| (ctx.mul(h as Elem, a) as u32 & mask).count_ones() % 2 == 1)
                        .collect(),
                );
            }
        }
        ctx.btilde = btilde;
        Ok(ctx)
    }

    /// Extension degree.
    pub fn m(&self) -> u32 {
        self.m
    }

    /// Field size `2^m`.
    pub fn q(&self) -> usize {
        self.q
    }

    /// Primitive polynomial bitmask.
    pub fn primitive_poly(&self) -> u32 {
        self.poly
    }

    /// Antilog table: entry `i` is the primitive element raised to `i`.
    pub fn exp_table(&self) -> &[Elem] {
        &self.exp
    }

    /// Discrete logarithm of a nonzero element.
    pub fn log(&self, a: Elem) -> Option<usize> {
        (a != 0).then(|| self.log[a as usize] as usize)
    }

    /// Field addition (XOR).
    #[inline]
    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        a ^ b
    }

    /// Field multiplication.
    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        self.mul[a as usize * self.q + b as usize]
    }

    /// Multiplicative inverse.
    pub fn inv(&self, a: Elem) -> Result<Elem, FieldError> {
        if a == 0 {
            return Err(FieldError::DivisionByZero);
        }
        Ok(self.inv[a as usize])
    }

    /// Field division `a / h`.
    pub fn div(&self, a: Elem, h: Elem) -> Result<Elem, FieldError> {
        Ok(self.mul(a, self.inv(h)?))
    }

    /// Bit `k` (1-based) of the integer representation.
    #[inline]
    pub fn bit(&self, a: Elem, k: u32) -> u8 {
        (a >> (k - 1)) & 1
    }

    /// Binary vector `(b_1, ..., b_m)` of an element.
    pub fn bits(&self, a: Elem) -> Vec<u8> {
        (1..=self.m).map(|k| self.bit(a, k)).collect()
    }

    /// Inverse of [`FieldCtx::bits`].
    pub fn from_bits(&self, bits: &[u8]) -> Elem {
        bits.iter().enumerate().fold(0, |acc, (i, &b)| acc | ((b & 1) << i))
    }

    /// `B(k, h)` for bit position `k` in `1..=m` and nonzero `h`.
    pub fn b_set(&self, k: u32, h: Elem) -> Result<&ElemSet, FieldError> {
        if !(1..=self.m).contains(&k) {
            return Err(FieldError::BitPosition { k, m: self.m });
        }
        self.btilde_set(1 << (k - 1), h)
    }

    /// `B~(K, h)` for a nonempty bit-position mask `K` and nonzero `h`.
    pub fn btilde_set(&self, mask: u32, h: Elem) -> Result<&ElemSet, FieldError> {
        if mask == 0 || mask as usize >= self.q {
            return Err(FieldError::BadSubset { mask, m: self.m });
        }
        if h == 0 {
            return Err(FieldError::DivisionByZero);
        }
        Ok(&self.btilde[(mask as usize - 1) * (self.q - 1) + (h as usize - 1)])
    }

    /// Parity of `a` restricted to the bit positions in `mask`.
    #[inline]
    pub fn subset_parity(&self, a: Elem, mask: u32) -> u8 {
        ((a as u32 & mask).count_ones() & 1) as u8
    }
}
