//! Non-binary LDPC codes: sparse parity-check matrices over GF(2^m), the
//! per-check rotation and gather structures used by the decoders, a text
//! file format, and generators for the bundled codes.
//!
//! # File format
//!
//! A non-binary extension of the alist layout, whitespace separated, with
//! `#` starting a comment:
//!
//! ```text
//! N M q
//! max_dv max_dc
//! dv_1 ... dv_N
//! dc_1 ... dc_M
//! <N lines: check:value pairs for each variable, 1-indexed>
//! <M lines: variable:value pairs for each check, 1-indexed>
//! ```
//!
//! A comment of the form `# primitive_poly = <int>` (decimal, `0x` or `0b`)
//! overrides the bundled primitive polynomial.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::embedding::EmbeddingKind;
use crate::gf2m::{Elem, FieldCtx, FieldError};
use crate::projections::Rotation;

/// Errors from building, parsing or loading codes.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodeError {
    #[error("line {line}: malformed header: {msg}")]
    MalformedHeader { line: usize, msg: String },
    #[error("line {line}: malformed entry `{token}`")]
    MalformedEntry { line: usize, token: String },
    #[error("line {line}: zero check value")]
    ZeroValue { line: usize },
    #[error("line {line}: value {value} outside GF({q})")]
    ValueRange { line: usize, value: u64, q: usize },
    #[error("line {line}: index {index} outside 1..={max}")]
    IndexRange { line: usize, index: u64, max: usize },
    #[error("line {line}: declared degree {declared}, found {found}")]
    DegreeMismatch { line: usize, declared: usize, found: usize },
    #[error("line {line}: entry absent from, or different in, the other adjacency list")]
    AdjacencyMismatch { line: usize },
    #[error("line {line}: duplicate index {index}")]
    Duplicate { line: usize, index: usize },
    #[error("unexpected end of input after line {line}")]
    UnexpectedEof { line: usize },
    #[error("line {line}: unexpected trailing content")]
    Trailing { line: usize },
    #[error("field size {0} is not a power of two between 2 and 256")]
    FieldSize(usize),
    #[error("invalid code: {0}")]
    Invalid(String),
    #[error("cannot read {path}: {msg}")]
    Io { path: String, msg: String },
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Sparse parity-check matrix over GF(q).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NonbinaryCode {
    n: usize,
    q: usize,
    primitive_poly: Option<u32>,
    /// Per check: (variable, value), sorted by variable.
    checks: Vec<Vec<(usize, Elem)>>,
    /// Per variable: (check, position of the variable within that check).
    vars: Vec<Vec<(usize, usize)>>,
}

impl NonbinaryCode {
    /// Builds a code from per-check `(variable, value)` lists.
    pub fn new(n: usize, q: usize, mut checks: Vec<Vec<(usize, Elem)>>) -> Result<Self, CodeError> {
        if !(2..=256).contains(&q) || !q.is_power_of_two() {
            return Err(CodeError::FieldSize(q));
        }
        if n == 0 || checks.is_empty() {
            return Err(CodeError::Invalid("code needs at least one variable and one check".into()));
        }
        let mut vars = vec![Vec::new(); n];
        for (j, row) in checks.iter_mut().enumerate() {
            row.sort_by_key(|e| e.0);
            if row.is_empty() {
                return Err(CodeError::Invalid(format!("check {j} is empty")));
            }
            for (pos, &(i, h)) in row.iter().enumerate() {
                if i >= n {
                    return Err(CodeError::Invalid(format!("check {j} references variable {i} >= {n}")));
                }
                if h == 0 || h as usize >= q {
                    return Err(CodeError::Invalid(format!("check {j} has value {h} outside 1..{q}")));
                }
                if pos > 0 && row[pos - 1].0 == i {
                    return Err(CodeError::Invalid(format!("check {j} lists variable {i} twice")));
                }
                vars[i].push((j, pos));
            }
        }
        if let Some(i) = vars.iter().position(Vec::is_empty) {
            return Err(CodeError::Invalid(format!("variable {i} is in no check")));
        }
        Ok(Self { n, q, primitive_poly: None, checks, vars })
    }

    /// Attaches a primitive polynomial override.
    pub fn with_primitive_poly(mut self, poly: Option<u32>) -> Self {
        self.primitive_poly = poly;
        self
    }

    /// Field context matching this code (bundled or overridden polynomial).
    pub fn field(&self) -> Result<FieldCtx, CodeError> {
        let m = self.q.trailing_zeros();
        Ok(match self.primitive_poly {
            Some(p) => FieldCtx::with_poly(m, p)?,
            None => FieldCtx::new(m)?,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn n_checks(&self) -> usize {
        self.checks.len()
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn primitive_poly(&self) -> Option<u32> {
        self.primitive_poly
    }

    /// Entries of check `j` as `(variable, value)`, sorted by variable.
    pub fn check(&self, j: usize) -> &[(usize, Elem)] {
        &self.checks[j]
    }

    /// Checks touching variable `i` as `(check, position in check)`.
    pub fn var_neighbors(&self, i: usize) -> &[(usize, usize)] {
        &self.vars[i]
    }

    pub fn var_degree(&self, i: usize) -> usize {
        self.vars[i].len()
    }

    pub fn check_degree(&self, j: usize) -> usize {
        self.checks[j].len()
    }

    /// Sum of check degrees (number of nonzero entries).
    pub fn n_edges(&self) -> usize {
        self.checks.iter().map(Vec::len).sum()
    }

    /// True iff every check sums to zero.
    pub fn syndrome_ok(&self, ctx: &FieldCtx, word: &[Elem]) -> bool {
        word.len() == self.n
            && self
                .checks
                .iter()
                .all(|row| row.iter().fold(0, |acc, &(i, h)| acc ^ ctx.mul(h, word[i])) == 0)
    }

    /// Rank of H over the field, by dense elimination.
    pub fn rank(&self, ctx: &FieldCtx) -> usize {
        let mut rows: Vec<Vec<Elem>> = self
            .checks
            .iter()
            .map(|row| {
                let mut dense = vec![0; self.n];
                for &(i, h) in row {
                    dense[i] = h;
                }
                dense
            })
            .collect();
        let mut rank = 0;
        for col in 0..self.n {
            let Some(p) = (rank..rows.len()).find(|&r| rows[r][col] != 0) else { continue };
            rows.swap(rank, p);
            let inv = ctx.inv(rows[rank][col]).expect("pivot is nonzero");
            let pivot: Vec<Elem> = rows[rank].iter().map(|&x| ctx.mul(x, inv)).collect();
            for r in rank + 1..rows.len() {
                let f = rows[r][col];
                if f != 0 {
                    for (x, &pv) in rows[r][col..].iter_mut().zip(&pivot[col..]) {
                        *x ^= ctx.mul(f, pv);
                    }
                }
            }
            rows[rank] = pivot;
            rank += 1;
        }
        rank
    }

    /// Code rate `(N - rank) / N`.
    pub fn rate(&self, ctx: &FieldCtx) -> f64 {
        (self.n - self.rank(ctx)) as f64 / self.n as f64
    }

    /// Copies the support of a binary code and sets every value to `value`.
    pub fn derive_from_binary(binary: &NonbinaryCode, q: usize, value: Elem) -> Result<Self, CodeError> {
        if binary.q != 2 {
            return Err(CodeError::Invalid(format!("source code is over GF({}), not GF(2)", binary.q)));
        }
        if value == 0 || value as usize >= q {
            return Err(CodeError::Invalid(format!("check value {value} outside 1..{q}")));
        }
        let checks = binary.checks.iter().map(|row| row.iter().map(|&(i, _)| (i, value)).collect()).collect();
        NonbinaryCode::new(binary.n, q, checks)
    }

    /// Serializes to the non-binary alist format.
    pub fn to_alist(&self) -> String {
        let mut s = String::new();
        if let Some(p) = self.primitive_poly {
            let _ = writeln!(s, "# primitive_poly = {p:#b}");
        }
        let max_dv = self.vars.iter().map(Vec::len).max().unwrap_or(0);
        let max_dc = self.checks.iter().map(Vec::len).max().unwrap_or(0);
        let _ = writeln!(s, "{} {} {}", self.n, self.checks.len(), self.q);
        let _ = writeln!(s, "{max_dv} {max_dc}");
        let join = |it: &mut dyn Iterator<Item = String>| it.collect::<Vec<_>>().join(" ");
        let _ = writeln!(s, "{}", join(&mut self.vars.iter().map(|v| v.len().to_string())));
        let _ = writeln!(s, "{}", join(&mut self.checks.iter().map(|c| c.len().to_string())));
        for nb in &self.vars {
            let _ = writeln!(s, "{}", join(&mut nb.iter().map(|&(j, pos)| format!("{}:{}", j + 1, self.checks[j][pos].1))));
        }
        for row in &self.checks {
            let _ = writeln!(s, "{}", join(&mut row.iter().map(|&(i, h)| format!("{}:{}", i + 1, h))));
        }
        s
    }

    /// Parses the non-binary alist format.
    pub fn parse_alist(text: &str) -> Result<Self, CodeError> {
        let mut lines = Lines::new(text);
        let (l1, head) = lines.next_required()?;
        let head = parse_ints(l1, &head, 3, "expected `N M q`")?;
        let (n, m, q) = (head[0] as usize, head[1] as usize, head[2] as usize);
        if !(2..=256).contains(&q) || !q.is_power_of_two() {
            return Err(CodeError::MalformedHeader { line: l1, msg: format!("field size {q} is not a power of two in 2..=256") });
        }
        if n == 0 || m == 0 {
            return Err(CodeError::MalformedHeader { line: l1, msg: "N and M must be positive".into() });
        }
        let (l2, maxes) = lines.next_required()?;
        let maxes = parse_ints(l2, &maxes, 2, "expected `max_dv max_dc`")?;
        let (l3, dv) = lines.next_required()?;
        let dv = parse_ints(l3, &dv, n, "expected N variable degrees")?;
        let (l4, dc) = lines.next_required()?;
        let dc = parse_ints(l4, &dc, m, "expected M check degrees")?;
        let max_dv = dv.iter().copied().max().unwrap_or(0);
        let max_dc = dc.iter().copied().max().unwrap_or(0);
        if maxes[0] != max_dv {
            return Err(CodeError::DegreeMismatch { line: l2, declared: maxes[0] as usize, found: max_dv as usize });
        }
        if maxes[1] != max_dc {
            return Err(CodeError::DegreeMismatch { line: l2, declared: maxes[1] as usize, found: max_dc as usize });
        }

        let mut var_rows = Vec::with_capacity(n);
        for &d in &dv {
            let (ln, toks) = lines.next_required()?;
            let entries = parse_pairs(ln, &toks, m, q)?;
            if entries.len() != d as usize {
                return Err(CodeError::DegreeMismatch { line: ln, declared: d as usize, found: entries.len() });
            }
            var_rows.push((ln, entries));
        }
        let mut checks = Vec::with_capacity(m);
        let mut check_lines = Vec::with_capacity(m);
        for &d in &dc {
            let (ln, toks) = lines.next_required()?;
            let entries = parse_pairs(ln, &toks, n, q)?;
            if entries.len() != d as usize {
                return Err(CodeError::DegreeMismatch { line: ln, declared: d as usize, found: entries.len() });
            }
            check_lines.push(ln);
            checks.push(entries);
        }
        if let Some((ln, _)) = lines.next() {
            return Err(CodeError::Trailing { line: ln });
        }

        // Cross-check the two adjacency views.
        let mut lookup = vec![std::collections::HashMap::new(); m];
        for (j, row) in checks.iter().enumerate() {
            for &(i, h) in row {
                lookup[j].insert(i, h);
            }
        }
        for (i, (ln, row)) in var_rows.iter().enumerate() {
            for &(j, h) in row {
                if lookup[j].get(&i) != Some(&h) {
                    return Err(CodeError::AdjacencyMismatch { line: *ln });
                }
            }
        }
        let total_v: usize = var_rows.iter().map(|r| r.1.len()).sum();
        let total_c: usize = checks.iter().map(Vec::len).sum();
        if total_v != total_c {
            let line = check_lines.last().copied().unwrap_or(l4);
            return Err(CodeError::AdjacencyMismatch { line });
        }
        Ok(NonbinaryCode::new(n, q, checks)?.with_primitive_poly(lines.poly))
    }

    /// Parses a standard binary alist file (MacKay layout, zero padding
    /// allowed) into a code over GF(2).
    pub fn parse_binary_alist(text: &str) -> Result<Self, CodeError> {
        let mut lines = Lines::new(text);
        let (l1, head) = lines.next_required()?;
        let head = parse_ints(l1, &head, 2, "expected `N M`")?;
        let (n, m) = (head[0] as usize, head[1] as usize);
        if n == 0 || m == 0 {
            return Err(CodeError::MalformedHeader { line: l1, msg: "N and M must be positive".into() });
        }
        let (l2, _) = lines.next_required()?;
        let _ = l2;
        let (l3, dv) = lines.next_required()?;
        let dv = parse_ints(l3, &dv, n, "expected N column weights")?;
        let (l4, dc) = lines.next_required()?;
        let dc = parse_ints(l4, &dc, m, "expected M row weights")?;
        for &d in &dv {
            let (ln, toks) = lines.next_required()?;
            let idx = parse_index_list(ln, &toks, m)?;
            if idx.len() != d as usize {
                return Err(CodeError::DegreeMismatch { line: ln, declared: d as usize, found: idx.len() });
            }
        }
        let mut checks = Vec::with_capacity(m);
        for &d in &dc {
            let (ln, toks) = lines.next_required()?;
            let idx = parse_index_list(ln, &toks, n)?;
            if idx.len() != d as usize {
                return Err(CodeError::DegreeMismatch { line: ln, declared: d as usize, found: idx.len() });
            }
            checks.push(idx.into_iter().map(|i| (i, 1)).collect());
        }
        NonbinaryCode::new(n, 2, checks)
    }

    /// Reads a code file. Files starting with a two-number header are read
    /// as binary alist, three-number headers as the non-binary format.
    pub fn load(path: &Path) -> Result<Self, CodeError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CodeError::Io { path: path.display().to_string(), msg: e.to_string() })?;
        let header_len = Lines::new(&text).next().map_or(0, |(_, t)| t.len());
        if header_len == 2 {
            Self::parse_binary_alist(&text)
        } else {
            Self::parse_alist(&text)
        }
    }
}

/// Non-comment, non-blank lines split into tokens, with 1-based line numbers.
struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
    poly: Option<u32>,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Self { inner: text.lines().enumerate(), last: 0, poly: None }
    }

    fn next_required(&mut self) -> Result<(usize, Vec<&'a str>), CodeError> {
        let last = self.last;
        self.next().ok_or(CodeError::UnexpectedEof { line: last })
    }
}

impl<'a> Iterator for Lines<'a> {
    type Item = (usize, Vec<&'a str>);

    fn next(&mut self) -> Option<Self::Item> {
        for (i, raw) in self.inner.by_ref() {
            self.last = i + 1;
            let (body, comment) = match raw.find('#') {
                Some(p) => (&raw[..p], Some(&raw[p + 1..])),
                None => (raw, None),
            };
            if let Some(c) = comment {
                if let Some(rest) = c.trim().strip_prefix("primitive_poly") {
                    if let Some(v) = rest.trim().strip_prefix('=').and_then(|v| parse_int_literal(v.trim())) {
                        self.poly = Some(v);
                    }
                }
            }
            let toks: Vec<&str> = body.split_whitespace().collect();
            if !toks.is_empty() {
                return Some((i + 1, toks));
            }
        }
        None
    }
}

fn parse_int_literal(s: &str) -> Option<u32> {
    if let Some(h) = s.strip_prefix("0x") {
        u32::from_str_radix(h, 16).ok()
    } else if let Some(b) = s.strip_prefix("0b") {
        u32::from_str_radix(b, 2).ok()
    } else {
        s.parse().ok()
    }
}

fn parse_ints(line: usize, toks: &[&str], count: usize, msg: &str) -> Result<Vec<u64>, CodeError> {
    if toks.len() != count {
        return Err(CodeError::MalformedHeader { line, msg: format!("{msg}, found {} fields", toks.len()) });
    }
    toks.iter()
        .map(|t| t.parse::<u64>().map_err(|_| CodeError::MalformedHeader { line, msg: format!("`{t}` is not an integer") }))
        .collect()
}

fn parse_pairs(line: usize, toks: &[&str], max_index: usize, q: usize) -> Result<Vec<(usize, Elem)>, CodeError> {
    let mut out: Vec<(usize, Elem)> = Vec::with_capacity(toks.len());
    for t in toks {
        let bad = || CodeError::MalformedEntry { line, token: t.to_string() };
        let (a, b) = t.split_once(':').ok_or_else(bad)?;
        let index: u64 = a.parse().map_err(|_| bad())?;
        let value: u64 = b.parse().map_err(|_| bad())?;
        if index == 0 || index as usize > max_index {
            return Err(CodeError::IndexRange { line, index, max: max_index });
        }
        if value == 0 {
            return Err(CodeError::ZeroValue { line });
        }
        if value as usize >= q {
            return Err(CodeError::ValueRange { line, value, q });
        }
        let idx = index as usize - 1;
        if out.iter().any(|e| e.0 == idx) {
            return Err(CodeError::Duplicate { line, index: index as usize });
        }
        out.push((idx, value as Elem));
    }
    Ok(out)
}

fn parse_index_list(line: usize, toks: &[&str], max_index: usize) -> Result<Vec<usize>, CodeError> {
    let mut out = Vec::new();
    for t in toks {
        let index: u64 = t.parse().map_err(|_| CodeError::MalformedEntry { line, token: t.to_string() })?;
        if index == 0 {
            continue; // padding
        }
        if index as usize > max_index {
            return Err(CodeError::IndexRange { line, index, max: max_index });
        }
        if out.contains(&(index as usize - 1)) {
            return Err(CodeError::Duplicate { line, index: index as usize });
        }
        out.push(index as usize - 1);
    }
    Ok(out)
}

/// Rotation permutation for one check value: element `a` at block position
/// `coord(a)` moves to normalized position `coord(a * h)`.
pub fn rotation_perm(ctx: &FieldCtx, kind: EmbeddingKind, h: Elem) -> Vec<usize> {
    (0..kind.symbol_len(ctx.q()))
        .map(|p| kind.coord(ctx.mul(kind.elem_at(p), h)).expect("nonzero times nonzero is nonzero"))
        .collect()
}

/// Per-check structure used by the decoders.
#[derive(Debug, Clone)]
pub struct CheckContext {
    /// Variables in the check, in position order.
    pub vars: Vec<usize>,
    /// Check values, aligned with `vars`.
    pub values: Vec<Elem>,
    /// Rotation taking this check to the all-ones check.
    pub rotation: Rotation,
    /// `gather[(k * d + l) * half + t]` is the absolute index into the
    /// embedded word of the `t`-th coordinate summed into entry `l` of the
    /// image for subset mask `k + 1`.
    pub gather: Vec<u32>,
    half: usize,
}

impl CheckContext {
    /// Check degree.
    pub fn degree(&self) -> usize {
        self.vars.len()
    }

    /// Coordinates per gathered entry (`2^(m-1)`).
    pub fn half(&self) -> usize {
        self.half
    }

    /// Indices summed into entry `l` of the image for subset index `k`
    /// (mask `k + 1`).
    #[inline]
    pub fn gather_entry(&self, k: usize, l: usize) -> &[u32] {
        let d = self.vars.len();
        let start = (k * d + l) * self.half;
        &self.gather[start..start + self.half]
    }
}

/// Builds the per-check gather patterns and rotations for one embedding.
pub fn build_check_contexts(ctx: &FieldCtx, code: &NonbinaryCode, kind: EmbeddingKind) -> Vec<CheckContext> {
    let q = ctx.q();
    let sl = kind.symbol_len(q);
    let half = q / 2;
    (0..code.n_checks())
        .map(|j| {
            let row = code.check(j);
            let d = row.len();
            let mut gather = Vec::with_capacity((q - 1) * d * half);
            for mask in 1..q as u32 {
                for &(i, h) in row {
                    let set = ctx.btilde_set(mask, h).expect("valid mask and nonzero value");
                    gather.extend(set.iter().map(|a| (i * sl + kind.coord(a).expect("sets exclude zero")) as u32));
                }
            }
            CheckContext {
                vars: row.iter().map(|e| e.0).collect(),
                values: row.iter().map(|e| e.1).collect(),
                rotation: Rotation::new(row.iter().map(|&(_, h)| rotation_perm(ctx, kind, h)).collect()),
                gather,
                half,
            }
        })
        .collect()
}

/// The 2 x 4 example code over GF(4): `H = [[1,2,2,3],[2,0,1,2]]`.
pub fn toy_code() -> NonbinaryCode {
    NonbinaryCode::new(4, 4, vec![vec![(0, 1), (1, 2), (2, 2), (3, 3)], vec![(0, 2), (2, 1), (3, 2)]])
        .expect("static code is valid")
}

fn multiplicative_order(x: u64, p: u64) -> u64 {
    let mut y = x % p;
    let mut k = 1;
    while y != 1 {
        y = y * x % p;
        k += 1;
    }
    k
}

/// Binary quasi-cyclic Tanner code: a 3 x 5 array of `p x p` circulant
/// permutation matrices, block `(s, t)` shifted by `b^s a^t mod p`, with `a`
/// and `b` the smallest elements of multiplicative order 5 and 3 mod `p`.
/// `p` must be a prime with `p = 1 mod 15`.
pub fn tanner_qc(p: usize) -> Result<NonbinaryCode, CodeError> {
    let pp = p as u64;
    let is_prime = p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| p % d != 0);
    if !is_prime || p % 15 != 1 {
        return Err(CodeError::Invalid(format!("{p} is not a prime congruent to 1 mod 15")));
    }
    let a = (2..pp).find(|&x| multiplicative_order(x, pp) == 5).expect("order-5 element exists");
    let b = (2..pp).find(|&x| multiplicative_order(x, pp) == 3).expect("order-3 element exists");
    let mut checks = Vec::with_capacity(3 * p);
    let mut bs = 1u64;
    for _s in 0..3 {
        for r in 0..p {
            let mut row = Vec::with_capacity(5);
            let mut at = 1u64;
            for t in 0..5 {
                let shift = (bs * at % pp) as usize;
                row.push((t * p + (r + shift) % p, 1));
                at = at * a % pp;
            }
            checks.push(row);
        }
        bs = bs * b % pp;
    }
    NonbinaryCode::new(5 * p, 2, checks)
}

/// Codes that ship with the library.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BundledCode {
    /// The 2 x 4 example code over GF(4).
    Toy,
    /// Tanner [155,64] support over GF(4), all values 1.
    Tanner155Gf4,
    /// Tanner [1055,424] support over GF(4), all values 1.
    Tanner1055Gf4,
    /// Tanner [755,334] support over GF(8), all values 1.
    Tanner755Gf8,
}

impl BundledCode {
    pub const ALL: [BundledCode; 4] =
        [BundledCode::Toy, BundledCode::Tanner155Gf4, BundledCode::Tanner1055Gf4, BundledCode::Tanner755Gf8];

    /// Name accepted by [`BundledCode::from_name`].
    pub fn name(self) -> &'static str {
        match self {
            BundledCode::Toy => "toy",
            BundledCode::Tanner155Gf4 => "tanner155-gf4",
            BundledCode::Tanner1055Gf4 => "tanner1055-gf4",
            BundledCode::Tanner755Gf8 => "tanner755-gf8",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == name)
    }

    /// Builds the code.
    pub fn build(self) -> NonbinaryCode {
        let derive = |p, q| {
            let bin = tanner_qc(p).expect("bundled prime is valid");
            NonbinaryCode::derive_from_binary(&bin, q, 1).expect("value 1 is valid")
        };
        match self {
            BundledCode::Toy => toy_code(),
            BundledCode::Tanner155Gf4 => derive(31, 4),
            BundledCode::Tanner1055Gf4 => derive(211, 4),
            BundledCode::Tanner755Gf8 => derive(151, 8),
        }
    }

    /// Known dimension (number of information symbols).
    pub fn dimension(self) -> usize {
        match self {
            BundledCode::Toy => 2,
            BundledCode::Tanner155Gf4 => 64,
            BundledCode::Tanner1055Gf4 => 424,
            BundledCode::Tanner755Gf8 => 334,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toy_code_shape() {
        let c = toy_code();
        assert_eq!((c.n(), c.n_checks()), (4, 2));
        assert_eq!((c.check_degree(0), c.check_degree(1)), (4, 3));
        assert_eq!(c.var_degree(1), 1);
        let f = FieldCtx::new(2).unwrap();
        assert!(c.syndrome_ok(&f, &[0, 0, 0, 0]));
        assert!(!c.syndrome_ok(&f, &[1, 1, 1, 0]));
        assert_eq!(c.rank(&f), 2);
    }

    #[test]
    fn alist_round_trip_and_example() {
        let c = toy_code();
        let text = c.to_alist();
        assert_eq!(NonbinaryCode::parse_alist(&text).unwrap(), c);
        let handwritten = "# example\n4 2 4\n2 4\n2 1 2 2\n4 3\n1:1 2:2\n1:2\n1:2 2:1\n1:3 2:2\n1:1 2:2 3:2 4:3\n1:2 3:1 4:2\n";
        assert_eq!(NonbinaryCode::parse_alist(handwritten).unwrap(), c);
    }

    #[test]
    fn alist_errors_carry_lines() {
        let base = "4 2 4\n2 4\n2 1 2 2\n4 3\n1:1 2:2\n1:2\n1:2 2:1\n1:3 2:2\n1:1 2:2 3:2 4:3\n1:2 3:1 4:2\n";
        let edit = |from: &str, to: &str| NonbinaryCode::parse_alist(&base.replacen(from, to, 1)).unwrap_err();
        assert!(matches!(edit("4 2 4", "4 2"), CodeError::MalformedHeader { line: 1, .. }));
        assert!(matches!(edit("4 2 4", "4 2 5"), CodeError::MalformedHeader { line: 1, .. }));
        assert!(matches!(edit("1:1 2:2 3:2 4:3", "1:1 2:2 3:2 4:0"), CodeError::ZeroValue { line: 9 }));
        assert!(matches!(edit("1:1 2:2 3:2 4:3", "1:1 2:2 3:2 4:4"), CodeError::ValueRange { line: 9, value: 4, .. }));
        assert!(matches!(edit("1:1 2:2 3:2 4:3", "1:1 2:2 3:2 5:3"), CodeError::IndexRange { line: 9, .. }));
        assert!(matches!(edit("2 1 2 2", "2 1 2 1"), CodeError::DegreeMismatch { line: 8, .. }));
        assert!(matches!(edit("\n2 4\n", "\n3 4\n"), CodeError::DegreeMismatch { line: 2, .. }));
        assert!(matches!(edit("1:3 2:2", "1:1 2:2"), CodeError::AdjacencyMismatch { line: 8 }));
        assert!(matches!(edit("1:2 3:1 4:2", "1:2 3:1 x"), CodeError::MalformedEntry { line: 10, .. }));
        assert!(matches!(edit("1:2 3:1 4:2\n", ""), CodeError::UnexpectedEof { .. }));
        assert!(matches!(edit("1:2 3:1 4:2\n", "1:2 3:1 4:2\n7\n"), CodeError::Trailing { line: 11 }));
        assert!(matches!(edit("1:1 2:2\n", "1:1 1:2\n"), CodeError::Duplicate { line: 5, index: 1 }));
    }

    #[test]
    fn binary_alist_and_derivation() {
        let text = "3 1\n1 3\n1 1 1\n3\n1\n1\n1\n1 2 3\n";
        let b = NonbinaryCode::parse_binary_alist(text).unwrap();
        assert_eq!(b.q(), 2);
        let same = NonbinaryCode::derive_from_binary(&b, 2, 1).unwrap();
        assert_eq!(same, b);
        let g4 = NonbinaryCode::derive_from_binary(&b, 4, 1).unwrap();
        assert_eq!(g4.check(0), &[(0, 1), (1, 1), (2, 1)]);
        assert!(NonbinaryCode::derive_from_binary(&g4, 4, 1).is_err());
        assert!(NonbinaryCode::derive_from_binary(&b, 4, 0).is_err());
    }

    #[test]
    fn primitive_poly_directive() {
        let text = "# primitive_poly = 0b1101\n1 1 8\n1 1\n1\n1\n1:3\n1:3\n";
        let c = NonbinaryCode::parse_alist(text).unwrap();
        assert_eq!(c.primitive_poly(), Some(0b1101));
        assert_eq!(c.field().unwrap().exp_table(), &[1, 2, 4, 5, 7, 3, 6]);
        assert_eq!(NonbinaryCode::parse_alist(&c.to_alist()).unwrap(), c);
    }

    #[test]
    fn tanner_small_rank() {
        let c = tanner_qc(31).unwrap();
        assert_eq!((c.n(), c.n_checks()), (155, 93));
        assert!((0..c.n()).all(|i| c.var_degree(i) == 3));
        assert!((0..c.n_checks()).all(|j| c.check_degree(j) == 5));
        let f = FieldCtx::new(1).unwrap();
        assert_eq!(c.n() - c.rank(&f), 64);
        assert!(tanner_qc(37).is_err());
    }

    #[test]
    fn gather_patterns() {
        let f = FieldCtx::new(2).unwrap();
        let code = NonbinaryCode::new(3, 4, vec![vec![(0, 1), (1, 2), (2, 3)]]).unwrap();
        let ctxs = build_check_contexts(&f, &code, EmbeddingKind::Flanagan);
        let c = &ctxs[0];
        // g^1 = (f11 + f31, f22 + f32, f13 + f23), flat index = 3 * column + element - 1.
        assert_eq!(c.gather_entry(0, 0), &[0, 2]);
        assert_eq!(c.gather_entry(0, 1), &[4, 5]);
        assert_eq!(c.gather_entry(0, 2), &[6, 7]);
        assert_eq!(c.rotation.block(0), &[0, 1, 2]);
        // Element a of column 2 (h = 2) moves to normalized element 2a: 1->2, 2->3, 3->1.
        assert_eq!(c.rotation.block(1), &[1, 2, 0]);
        let cw = build_check_contexts(&f, &code, EmbeddingKind::ConstantWeight);
        assert_eq!(cw[0].gather_entry(0, 0), &[1, 3]);
        assert_eq!(cw[0].rotation.block(1), &[0, 2, 3, 1]);
    }
}
