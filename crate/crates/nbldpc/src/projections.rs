//! Euclidean projections onto the simplex family and the parity polytope,
//! plus the rotate-project-rotate pipeline for per-symbol permutations.
//!
//! Hot-path variants write into caller-owned buffers and reuse a
//! [`Scratch`] workspace; the allocating wrappers are for tests and tools.

use thiserror::Error;

/// Errors raised by the checked projection entry points.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProjectionError {
    #[error("parity polytope dimension {0} is below 2")]
    Dimension(usize),
    #[error("input length {found} does not match expected {expected}")]
    Length { expected: usize, found: usize },
}

/// Which simplex to project onto.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SimplexKind {
    /// `x >= 0`, `sum x <= 1`.
    SumLeqOne,
    /// `x >= 0`, `sum x = 1`.
    SumEqOne,
}

/// Reusable workspace for the projections. Not shareable across threads
/// while in use.
#[derive(Debug, Default, Clone)]
pub struct Scratch {
    buf: Vec<f64>,
    sorted: Vec<f64>,
}

impl Scratch {
    pub fn new() -> Self {
        Self::default()
    }
}

/// Projects `v` onto the chosen simplex, writing into `out`.
pub fn project_simplex_into(kind: SimplexKind, v: &[f64], out: &mut [f64], scratch: &mut Scratch) {
    debug_assert_eq!(v.len(), out.len());
    if kind == SimplexKind::SumLeqOne {
        let mut sum = 0.0;
        for (o, &x) in out.iter_mut().zip(v) {
            *o = x.max(0.0);
            sum += *o;
        }
        if sum <= 1.0 {
            return;
        }
    }
    // Sort-based threshold search for the sum-to-one simplex.
    let u = &mut scratch.buf;
    u.clear();
    u.extend_from_slice(v);
    if u.len() <= 16 {
        for i in 1..u.len() {
            let x = u[i];
            let mut j = i;
            while j > 0 && u[j - 1] < x {
                u[j] = u[j - 1];
                j -= 1;
            }
            u[j] = x;
        }
    } else {
        u.sort_unstable_by(|a, b| b.total_cmp(a));
    }
    let mut cum = 0.0;
    let mut tau = 0.0;
    for (j, &uj) in u.iter().enumerate() {
        cum += uj;
        let t = (cum - 1.0) / (j + 1) as f64;
        if uj - t > 0.0 {
            tau = t;
        }
    }
    for (o, &x) in out.iter_mut().zip(v) {
        *o = (x - tau).max(0.0);
    }
}

/// Allocating wrapper around [`project_simplex_into`].
pub fn project_simplex(kind: SimplexKind, v: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; v.len()];
    project_simplex_into(kind, v, &mut out, &mut Scratch::new());
    out
}

/// Projects `v` onto the parity polytope (hull of even-weight binary vectors),
/// writing into `out`.
///
/// The cube projection is kept when it satisfies the single facet that can be
/// violated; otherwise the point is projected onto that facet intersected with
/// the unit cube. Also handles `d = 1`, where the polytope is `{0}`.
pub fn project_parity_polytope_into(v: &[f64], out: &mut [f64], scratch: &mut Scratch) {
    let d = v.len();
    debug_assert_eq!(d, out.len());
    if d == 0 {
        return;
    }
    // Odd-weight facet indicator: round, then fix parity by flipping the
    // coordinate closest to 1/2 (lowest index on ties).
    let mut weight = 0usize;
    let mut flip = 0usize;
    let mut flip_gap = f64::INFINITY;
    for (i, &x) in v.iter().enumerate() {
        if x > 0.5 {
            weight += 1;
        }
        let gap = (x - 0.5).abs();
        if gap < flip_gap {
            flip_gap = gap;
            flip = i;
        }
    }
    let in_facet = |i: usize| (v[i] > 0.5) != (weight % 2 == 0 && i == flip);

    // Facet check on the cube projection, in flipped coordinates:
    // w_i = v_i on the facet support, 1 - v_i elsewhere; facet is sum clip(w) <= d - 1.
    let mut total = 0.0;
    for i in 0..d {
        let w = if in_facet(i) { v[i] } else { 1.0 - v[i] };
        total += w.clamp(0.0, 1.0);
    }
    let target = (d - 1) as f64;
    if total <= target {
        for (o, &x) in out.iter_mut().zip(v) {
            *o = x.clamp(0.0, 1.0);
        }
        return;
    }

    // Solve sum_i clip(w_i - beta, 0, 1) = d - 1 by sweeping the breakpoints
    // w_i - 1 (slope drops by one) and w_i (slope rises by one) in order.
    let w = &mut scratch.buf;
    w.clear();
    w.extend((0..d).map(|i| if in_facet(i) { v[i] } else { 1.0 - v[i] }));
    let sorted = &mut scratch.sorted;
    sorted.clear();
    sorted.extend_from_slice(w);
    if d <= 16 {
        for i in 1..d {
            let x = sorted[i];
            let mut j = i;
            while j > 0 && sorted[j - 1] > x {
                sorted[j] = sorted[j - 1];
                j -= 1;
            }
            sorted[j] = x;
        }
    } else {
        sorted.sort_unstable_by(f64::total_cmp);
    }
    let (mut lo, mut hi) = (0, 0);
    let mut beta_prev = sorted[0] - 1.0;
    let mut f_prev = d as f64;
    let mut slope = 0.0;
    let mut beta = beta_prev;
    while hi < d {
        let (e, step) = if lo < d && sorted[lo] - 1.0 <= sorted[hi] {
            lo += 1;
            (sorted[lo - 1] - 1.0, -1.0)
        } else {
            hi += 1;
            (sorted[hi - 1], 1.0)
        };
        let f_e = f_prev + slope * (e - beta_prev);
        if f_e <= target {
            beta = beta_prev + (f_prev - target) / -slope;
            break;
        }
        f_prev = f_e;
        beta_prev = e;
        beta = e;
        slope += step;
    }
    for i in 0..d {
        let y = (w[i] - beta).clamp(0.0, 1.0);
        out[i] = if in_facet(i) { y } else { 1.0 - y };
    }
}

/// Checked, allocating parity-polytope projection.
pub fn project_parity_polytope(v: &[f64]) -> Result<Vec<f64>, ProjectionError> {
    if v.len() < 2 {
        return Err(ProjectionError::Dimension(v.len()));
    }
    let mut out = vec![0.0; v.len()];
    project_parity_polytope_into(v, &mut out, &mut Scratch::new());
    Ok(out)
}

/// Euclidean distance from `v` to the parity polytope.
pub fn parity_polytope_distance(v: &[f64]) -> Result<f64, ProjectionError> {
    let p = project_parity_polytope(v)?;
    Ok(dist(v, &p))
}

/// Euclidean distance between two equal-length vectors.
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// A per-symbol coordinate permutation. Block `j` of a vector is mapped to
/// normalized coordinates by `normalized[perm[j][p]] = actual[p]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rotation {
    block_len: usize,
    perm: Vec<Vec<usize>>,
}

impl Rotation {
    /// Builds a rotation from per-block permutations of `0..block_len`.
    pub fn new(perm: Vec<Vec<usize>>) -> Self {
        let block_len = perm.first().map_or(0, Vec::len);
        debug_assert!(perm.iter().all(|p| {
            let mut seen = vec![false; block_len];
            p.len() == block_len && p.iter().all(|&i| i < block_len && !std::mem::replace(&mut seen[i], true))
        }));
        Self { block_len, perm }
    }

    pub fn identity(blocks: usize, block_len: usize) -> Self {
        Self { block_len, perm: vec![(0..block_len).collect(); blocks] }
    }

    pub fn block_len(&self) -> usize {
        self.block_len
    }

    pub fn blocks(&self) -> usize {
        self.perm.len()
    }

    /// Permutation of block `j`.
    pub fn block(&self, j: usize) -> &[usize] {
        &self.perm[j]
    }

    /// Actual to normalized coordinates.
    pub fn to_normalized(&self, actual: &[f64], normalized: &mut [f64]) {
        let b = self.block_len;
        for (j, p) in self.perm.iter().enumerate() {
            for (i, &t) in p.iter().enumerate() {
                normalized[j * b + t] = actual[j * b + i];
            }
        }
    }

    /// Normalized to actual coordinates.
    pub fn to_actual(&self, normalized: &[f64], actual: &mut [f64]) {
        let b = self.block_len;
        for (j, p) in self.perm.iter().enumerate() {
            for (i, &t) in p.iter().enumerate() {
                actual[j * b + i] = normalized[j * b + t];
            }
        }
    }
}

/// Projects `v` onto a rotated set by normalizing, projecting with
/// `project` onto the normalized set, and rotating back.
pub fn project_rotated<F>(rotation: &Rotation, v: &[f64], mut project: F) -> Result<Vec<f64>, ProjectionError>
where
    F: FnMut(&[f64], &mut [f64]),
{
    let len = rotation.blocks() * rotation.block_len();
    if v.len() != len {
        return Err(ProjectionError::Length { expected: len, found: v.len() });
    }
    let mut norm = vec![0.0; len];
    rotation.to_normalized(v, &mut norm);
    let mut proj = vec![0.0; len];
    project(&norm, &mut proj);
    let mut out = vec![0.0; len];
    rotation.to_actual(&proj, &mut out);
    Ok(out)
}
