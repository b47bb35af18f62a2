//! Real-valued embeddings of field elements and words.
//!
//! * Flanagan: element `a` maps to a length `q - 1` indicator indexed by the
//!   nonzero elements `1..q`; element 0 maps to the all-zeros vector.
//! * Constant weight: element `a` maps to the length `q` unit vector `e_a`.
//!
//! A word of `n` symbols is stored flat and symbol-major, so symbol `j`
//! occupies one contiguous block. Viewed as a matrix, block `j` is column `j`.

use thiserror::Error;

use crate::gf2m::{Elem, FieldCtx};

/// Entries within this distance of 0 or 1 count as integral.
pub const INTEGRAL_TOL: f64 = 1e-9;

/// Errors raised by embedding conversions and predicates.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum EmbeddingError {
    #[error("data length {len} is not a multiple of the symbol length {symbol_len}")]
    Length { len: usize, symbol_len: usize },
    #[error("expected {expected} symbols, found {found}")]
    SymbolCount { expected: usize, found: usize },
    #[error("entry {value} in symbol {symbol} is not integral")]
    Fractional { symbol: usize, value: f64 },
    #[error("symbol {symbol} has weight {weight}, which no field element embeds to")]
    Weight { symbol: usize, weight: f64 },
    #[error("element {elem} is outside a field of size {q}")]
    ElementRange { elem: Elem, q: usize },
    #[error("operation requires the {expected:?} embedding")]
    Kind { expected: EmbeddingKind },
    #[error("field size {found} does not match the context ({expected})")]
    FieldSize { expected: usize, found: usize },
}

/// Which embedding a vector uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EmbeddingKind {
    Flanagan,
    ConstantWeight,
}

impl EmbeddingKind {
    /// Per-symbol block length.
    #[inline]
    pub fn symbol_len(self, q: usize) -> usize {
        match self {
            EmbeddingKind::Flanagan => q - 1,
            EmbeddingKind::ConstantWeight => q,
        }
    }

    /// Position of element `a` inside a symbol block, if it has one.
    #[inline]
    pub fn coord(self, a: Elem) -> Option<usize> {
        match self {
            EmbeddingKind::Flanagan => (a != 0).then(|| a as usize - 1),
            EmbeddingKind::ConstantWeight => Some(a as usize),
        }
    }

    /// Element represented by position `p` inside a symbol block.
    #[inline]
    pub fn elem_at(self, p: usize) -> Elem {
        match self {
            EmbeddingKind::Flanagan => (p + 1) as Elem,
            EmbeddingKind::ConstantWeight => p as Elem,
        }
    }
}

/// Embedding of a single element.
pub fn embed_symbol(q: usize, kind: EmbeddingKind, a: Elem) -> Vec<f64> {
    let mut v = vec![0.0; kind.symbol_len(q)];
    if let Some(p) = kind.coord(a) {
        v[p] = 1.0;
    }
    v
}

/// Embedded vector (or matrix, one column per symbol).
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingVec {
    kind: EmbeddingKind,
    q: usize,
    data: Vec<f64>,
}

impl EmbeddingVec {
    /// Wraps flat symbol-major data.
    pub fn from_vec(kind: EmbeddingKind, q: usize, data: Vec<f64>) -> Result<Self, EmbeddingError> {
        let symbol_len = kind.symbol_len(q);
        if symbol_len == 0 || data.len() % symbol_len != 0 {
            return Err(EmbeddingError::Length { len: data.len(), symbol_len });
        }
        Ok(Self { kind, q, data })
    }

    /// Embeds a whole word.
    pub fn embed_word(q: usize, kind: EmbeddingKind, word: &[Elem]) -> Result<Self, EmbeddingError> {
        let sl = kind.symbol_len(q);
        let mut data = vec![0.0; sl * word.len()];
        for (j, &a) in word.iter().enumerate() {
            if a as usize >= q {
                return Err(EmbeddingError::ElementRange { elem: a, q });
            }
            if let Some(p) = kind.coord(a) {
                data[j * sl + p] = 1.0;
            }
        }
        Ok(Self { kind, q, data })
    }

    pub fn kind(&self) -> EmbeddingKind {
        self.kind
    }

    pub fn q(&self) -> usize {
        self.q
    }

    /// Block length per symbol.
    pub fn symbol_len(&self) -> usize {
        self.kind.symbol_len(self.q)
    }

    /// Number of symbols (matrix columns).
    pub fn n_symbols(&self) -> usize {
        self.data.len() / self.symbol_len()
    }

    /// Block of symbol `j`.
    pub fn symbol(&self, j: usize) -> &[f64] {
        let sl = self.symbol_len();
        &self.data[j * sl..(j + 1) * sl]
    }

    /// Mutable block of symbol `j`.
    pub fn symbol_mut(&mut self, j: usize) -> &mut [f64] {
        let sl = self.symbol_len();
        &mut self.data[j * sl..(j + 1) * sl]
    }

    /// Matrix entry for element `a` in column `j`. Element 0 reads as 0 under
    /// the Flanagan embedding.
    pub fn entry(&self, a: Elem, j: usize) -> f64 {
        self.kind.coord(a).map_or(0.0, |p| self.symbol(j)[p])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    /// Recovers the word from integral data.
    pub fn decode_word(&self) -> Result<Vec<Elem>, EmbeddingError> {
        (0..self.n_symbols()).map(|j| self.decode_symbol(j)).collect()
    }

    fn decode_symbol(&self, j: usize) -> Result<Elem, EmbeddingError> {
        let col = self.symbol(j);
        let mut found = None;
        let mut weight = 0.0;
        for (p, &v) in col.iter().enumerate() {
            let r = v.round();
            if (v - r).abs() > INTEGRAL_TOL || !(r == 0.0 || r == 1.0) {
                return Err(EmbeddingError::Fractional { symbol: j, value: v });
            }
            if r == 1.0 {
                found = Some(self.kind.elem_at(p));
            }
            weight += r;
        }
        match (self.kind, weight as usize) {
            (EmbeddingKind::Flanagan, 0) => Ok(0),
            (_, 1) => Ok(found.expect("weight one implies a set entry")),
            _ => Err(EmbeddingError::Weight { symbol: j, weight }),
        }
    }

    /// Flanagan to constant weight: prepend `1 - |f|_1` to every block.
    pub fn flanagan_to_cw(&self) -> Result<Self, EmbeddingError> {
        if self.kind != EmbeddingKind::Flanagan {
            return Err(EmbeddingError::Kind { expected: EmbeddingKind::Flanagan });
        }
        let n = self.n_symbols();
        let mut data = Vec::with_capacity(n * self.q);
        for j in 0..n {
            let col = self.symbol(j);
            let w: f64 = col.iter().sum();
            if w > 1.0 + INTEGRAL_TOL {
                return Err(EmbeddingError::Weight { symbol: j, weight: w });
            }
            data.push(1.0 - w);
            data.extend_from_slice(col);
        }
        Ok(Self { kind: EmbeddingKind::ConstantWeight, q: self.q, data })
    }

    /// Constant weight to Flanagan: drop the element-0 coordinate.
    pub fn cw_to_flanagan(&self) -> Result<Self, EmbeddingError> {
        if self.kind != EmbeddingKind::ConstantWeight {
            return Err(EmbeddingError::Kind { expected: EmbeddingKind::ConstantWeight });
        }
        let data = (0..self.n_symbols()).flat_map(|j| self.symbol(j)[1..].to_vec()).collect();
        Ok(Self { kind: EmbeddingKind::Flanagan, q: self.q, data })
    }
}

/// The vector `g^K` of a check: entry `j` sums column `j` over `B~(K, h_j)`.
pub fn g_vector(ctx: &FieldCtx, f: &EmbeddingVec, h: &[Elem], mask: u32) -> Result<Vec<f64>, EmbeddingError> {
    check_dims(ctx, f, h)?;
    h.iter()
        .enumerate()
        .map(|(j, &hj)| {
            let set = ctx
                .btilde_set(mask, hj)
                .map_err(|_| EmbeddingError::ElementRange { elem: hj, q: ctx.q() })?;
            Ok(set.iter().map(|a| f.entry(a, j)).sum())
        })
        .collect()
}

fn check_dims(ctx: &FieldCtx, f: &EmbeddingVec, h: &[Elem]) -> Result<(), EmbeddingError> {
    if f.q() != ctx.q() {
        return Err(EmbeddingError::FieldSize { expected: ctx.q(), found: f.q() });
    }
    if f.n_symbols() != h.len() {
        return Err(EmbeddingError::SymbolCount { expected: h.len(), found: f.n_symbols() });
    }
    if let Some(&bad) = h.iter().find(|&&x| x == 0 || x as usize >= ctx.q()) {
        return Err(EmbeddingError::ElementRange { elem: bad, q: ctx.q() });
    }
    Ok(())
}

/// Integrality and per-column weight conditions shared by both predicates.
fn columns_ok(f: &EmbeddingVec) -> bool {
    (0..f.n_symbols()).all(|j| {
        let col = f.symbol(j);
        let integral = col
            .iter()
            .all(|&v| (v - v.round()).abs() <= INTEGRAL_TOL && (v.round() == 0.0 || v.round() == 1.0));
        let w: f64 = col.iter().map(|v| v.round()).sum();
        integral
            && match f.kind() {
                EmbeddingKind::Flanagan => w <= 1.0,
                EmbeddingKind::ConstantWeight => w == 1.0,
            }
    })
}

fn parity_ok(ctx: &FieldCtx, f: &EmbeddingVec, h: &[Elem], masks: impl Iterator<Item = u32>) -> Result<bool, EmbeddingError> {
    for mask in masks {
        // Entries are 0/1, so the real sum is an integer whose parity is the GF(2) sum.
        let total: f64 = g_vector(ctx, f, h, mask)?.iter().map(|v| v.round()).sum();
        if total as u64 % 2 != 0 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Validity of an integral embedded matrix for the single parity check `h`
/// using one parity constraint per bit position.
pub fn is_valid_spc_embedding(ctx: &FieldCtx, f: &EmbeddingVec, h: &[Elem]) -> Result<bool, EmbeddingError> {
    check_dims(ctx, f, h)?;
    if !columns_ok(f) {
        return Ok(false);
    }
    parity_ok(ctx, f, h, (0..ctx.m()).map(|k| 1u32 << k))
}

/// Same as [`is_valid_spc_embedding`] but with the redundant family: one
/// parity constraint per nonempty set of bit positions.
pub fn is_valid_spc_embedding_redundant(ctx: &FieldCtx, f: &EmbeddingVec, h: &[Elem]) -> Result<bool, EmbeddingError> {
    check_dims(ctx, f, h)?;
    if !columns_ok(f) {
        return Ok(false);
    }
    parity_ok(ctx, f, h, 1..ctx.q() as u32)
}

/// Relative map for constant-weight data: block `j` becomes
/// `x~[a] = x[a + c_j]`.
pub fn relative_map(v: &EmbeddingVec, c: &[Elem]) -> Result<EmbeddingVec, EmbeddingError> {
    if v.kind() != EmbeddingKind::ConstantWeight {
        return Err(EmbeddingError::Kind { expected: EmbeddingKind::ConstantWeight });
    }
    if v.n_symbols() != c.len() {
        return Err(EmbeddingError::SymbolCount { expected: c.len(), found: v.n_symbols() });
    }
    if let Some(&bad) = c.iter().find(|&&x| x as usize >= v.q()) {
        return Err(EmbeddingError::ElementRange { elem: bad, q: v.q() });
    }
    let mut out = vec![0.0; v.as_slice().len()];
    relative_map_blocks(v.q(), v.as_slice(), c, &mut out);
    EmbeddingVec::from_vec(EmbeddingKind::ConstantWeight, v.q(), out)
}

/// Inverse of [`relative_map`]: `x[a] = x~[a - c_j]`. Subtraction equals
/// addition in characteristic two, so this is the same permutation.
pub fn inverse_relative_map(v: &EmbeddingVec, c: &[Elem]) -> Result<EmbeddingVec, EmbeddingError> {
    relative_map(v, c)
}

/// Slice form of the relative map over consecutive blocks of length `q`.
/// `shift[j]` is applied to block `j`.
pub fn relative_map_blocks(q: usize, src: &[f64], shift: &[Elem], dst: &mut [f64]) {
    for (j, &c) in shift.iter().enumerate() {
        let s = &src[j * q..(j + 1) * q];
        let d = &mut dst[j * q..(j + 1) * q];
        for (a, slot) in d.iter_mut().enumerate() {
            *slot = s[a ^ c as usize];
        }
    }
}
