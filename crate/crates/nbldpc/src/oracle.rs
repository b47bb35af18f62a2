//! Brute-force references for the fast paths: single parity-check
//! enumeration, exact hull projection, an alternating-projection solver for
//! the relaxed code polytopes, and dense linear algebra for the x-update.
//!
//! Everything here is slow by design and only compiled for tests or with the
//! `oracle` feature.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

use crate::embedding::{EmbeddingError, EmbeddingKind, EmbeddingVec};
use crate::gf2m::{Elem, FieldCtx, FieldError};
use crate::projections::{project_parity_polytope_into, project_simplex_into, Scratch, SimplexKind};

/// Largest enumeration [`enumerate_spc`] accepts.
pub const MAX_ENUMERATION: usize = 1 << 20;

/// Certificate required from [`project_hull`].
pub const HULL_GAP_TOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("enumeration of q = {q}, d = {d} exceeds the size guard")]
    TooLarge { q: usize, d: usize },
    #[error("empty point set")]
    Empty,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("{method} did not converge in {iterations} iterations (gap {gap:e})")]
    NoConvergence { method: &'static str, iterations: usize, gap: f64 },
    #[error("singular dense system")]
    Singular,
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
}

/// All codewords of one single parity-check code with their embeddings.
#[derive(Debug, Clone)]
pub struct SpcEnumeration {
    pub q: usize,
    pub h: Vec<Elem>,
    pub words: Vec<Vec<Elem>>,
    pub flanagan: Vec<EmbeddingVec>,
    pub constant_weight: Vec<EmbeddingVec>,
}

impl SpcEnumeration {
    /// Embedded codewords as flat vectors.
    pub fn points(&self, kind: EmbeddingKind) -> Vec<Vec<f64>> {
        let src = match kind {
            EmbeddingKind::Flanagan => &self.flanagan,
            EmbeddingKind::ConstantWeight => &self.constant_weight,
        };
        src.iter().map(|e| e.as_slice().to_vec()).collect()
    }
}

/// Lists every word `c` with `sum_j h_j c_j = 0`, in lexicographic order
/// (first position most significant).
pub fn enumerate_spc(ctx: &FieldCtx, h: &[Elem]) -> Result<SpcEnumeration, OracleError> {
    let q = ctx.q();
    let d = h.len();
    if d == 0 || d > 6 || (q as f64).powi(d as i32 - 1) > MAX_ENUMERATION as f64 {
        return Err(OracleError::TooLarge { q, d });
    }
    let mut words = Vec::new();
    let mut word = vec![0 as Elem; d];
    loop {
        let sum = word.iter().zip(h).fold(0, |acc, (&c, &hv)| ctx.add(acc, ctx.mul(c, hv)));
        if sum == 0 {
            words.push(word.clone());
        }
        // Odometer increment, last position fastest.
        let mut pos = d;
        loop {
            if pos == 0 {
                let flanagan = words
                    .iter()
                    .map(|w| EmbeddingVec::embed_word(q, EmbeddingKind::Flanagan, w))
                    .collect::<Result<_, _>>()?;
                let constant_weight = words
                    .iter()
                    .map(|w| EmbeddingVec::embed_word(q, EmbeddingKind::ConstantWeight, w))
                    .collect::<Result<_, _>>()?;
                return Ok(SpcEnumeration { q, h: h.to_vec(), words, flanagan, constant_weight });
            }
            pos -= 1;
            word[pos] += 1;
            if (word[pos] as usize) < q {
                break;
            }
            word[pos] = 0;
        }
    }
}

/// Projection onto a convex hull with its optimality certificate.
#[derive(Debug, Clone)]
pub struct HullProjection {
    pub point: Vec<f64>,
    /// `max_z <v - p, z - p>` over the vertices `z`.
    pub gap: f64,
    pub iterations: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves `a x = b` in place by Gaussian elimination with partial pivoting.
fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>, OracleError> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap_or(col);
        if a[piv][col].abs() < 1e-14 {
            return Err(OracleError::Singular);
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f != 0.0 {
                for k in col..n {
                    a[row][k] -= f * a[col][k];
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Ok(x)
}

/// Affine minimum-norm combination of the points in `set`.
fn affine_min_norm(pts: &[Vec<f64>], set: &[usize]) -> Result<Vec<f64>, OracleError> {
    let k = set.len();
    let mut a = vec![vec![0.0; k + 1]; k + 1];
    for i in 0..k {
        for j in 0..k {
            a[i][j] = dot(&pts[set[i]], &pts[set[j]]);
        }
        a[i][k] = 1.0;
        a[k][i] = 1.0;
    }
    let mut b = vec![0.0; k + 1];
    b[k] = 1.0;
    let mut sol = solve_dense(a, b)?;
    sol.truncate(k);
    Ok(sol)
}

/// Euclidean projection of `v` onto `conv(points)` by Wolfe's minimum-norm
/// point method, certified by the duality gap.
pub fn project_hull(points: &[Vec<f64>], v: &[f64]) -> Result<HullProjection, OracleError> {
    if points.is_empty() {
        return Err(OracleError::Empty);
    }
    let dim = v.len();
    if let Some(p) = points.iter().find(|p| p.len() != dim) {
        return Err(OracleError::Dimension { expected: dim, found: p.len() });
    }
    // Shift so the target sits at the origin.
    let pts: Vec<Vec<f64>> = points.iter().map(|p| p.iter().zip(v).map(|(a, b)| a - b).collect()).collect();
    let scale = pts.iter().map(|p| dot(p, p)).fold(1.0, f64::max);
    let start = (0..pts.len()).min_by(|&i, &j| dot(&pts[i], &pts[i]).total_cmp(&dot(&pts[j], &pts[j]))).unwrap_or(0);
    let mut set = vec![start];
    let mut weights = vec![1.0];
    let mut x = pts[start].clone();
    let combine = |set: &[usize], w: &[f64]| {
        let mut out = vec![0.0; dim];
        for (&i, &wi) in set.iter().zip(w) {
            for (o, p) in out.iter_mut().zip(&pts[i]) {
                *o += wi * p;
            }
        }
        out
    };
    const CAP: usize = 10_000;
    let mut iterations = 0;
    loop {
        iterations += 1;
        if iterations > CAP {
            break;
        }
        let xx = dot(&x, &x);
        let (best, best_val) = (0..pts.len())
            .map(|i| (i, dot(&x, &pts[i])))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("nonempty");
        if xx - best_val <= 1e-15 * scale || set.contains(&best) {
            break;
        }
        set.push(best);
        weights.push(0.0);
        // Minor cycles: move toward the affine minimizer while staying in the simplex.
        loop {
            let alpha = match affine_min_norm(&pts, &set) {
                Ok(a) => a,
                Err(_) => {
                    // Affinely dependent set: drop the newest point and stop.
                    set.pop();
                    weights.pop();
                    break;
                }
            };
            if alpha.iter().all(|&a| a > 1e-14) {
                weights = alpha;
                break;
            }
            let mut theta = 1.0f64;
            for (w, a) in weights.iter().zip(&alpha) {
                if *a <= 1e-14 && w - a > 0.0 {
                    theta = theta.min(w / (w - a));
                }
            }
            for (w, a) in weights.iter_mut().zip(&alpha) {
                *w += theta * (a - *w);
            }
            let mut k = 0;
            while k < set.len() {
                if weights[k] <= 1e-14 {
                    set.remove(k);
                    weights.remove(k);
                } else {
                    k += 1;
                }
            }
            let total: f64 = weights.iter().sum();
            weights.iter_mut().for_each(|w| *w /= total);
        }
        x = combine(&set, &weights);
    }
    let point: Vec<f64> = x.iter().zip(v).map(|(a, b)| a + b).collect();
    let gap = points
        .iter()
        .map(|z| {
            let vp: Vec<f64> = v.iter().zip(&point).map(|(a, b)| a - b).collect();
            let zp: Vec<f64> = z.iter().zip(&point).map(|(a, b)| a - b).collect();
            dot(&vp, &zp)
        })
        .fold(f64::NEG_INFINITY, f64::max);
    if gap > HULL_GAP_TOL {
        return Err(OracleError::NoConvergence { method: "hull projection", iterations, gap });
    }
    Ok(HullProjection { point, gap, iterations })
}

/// Vertices of the parity polytope of length `d`.
pub fn parity_polytope_vertices(d: usize) -> Vec<Vec<f64>> {
    (0..1u32 << d)
        .filter(|w| w.count_ones() % 2 == 0)
        .map(|w| (0..d).map(|i| f64::from((w >> i) & 1)).collect())
        .collect()
}

/// Vertices of the simplex of dimension `d` (origin included for `SumLeqOne`).
pub fn simplex_vertices(kind: SimplexKind, d: usize) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = (0..d).map(|i| (0..d).map(|j| f64::from(u8::from(i == j))).collect()).collect();
    if kind == SimplexKind::SumLeqOne {
        out.push(vec![0.0; d]);
    }
    out
}

/// Constraint description of the relaxed code polytope of one check.
#[derive(Debug, Clone)]
pub struct RelaxedPolytope {
    kind: EmbeddingKind,
    sym_len: usize,
    d: usize,
    /// `rows[k][l]`: coordinates of column `l` summed into entry `l` of the
    /// image for mask `k + 1`.
    rows: Vec<Vec<Vec<usize>>>,
}

impl RelaxedPolytope {
    pub fn new(ctx: &FieldCtx, kind: EmbeddingKind, h: &[Elem]) -> Result<Self, OracleError> {
        let q = ctx.q();
        let mut rows = Vec::with_capacity(q - 1);
        for mask in 1..q as u32 {
            let per_col = h
                .iter()
                .map(|&hv| {
                    Ok(ctx.btilde_set(mask, hv)?.iter().map(|a| kind.coord(a).expect("sets exclude zero")).collect())
                })
                .collect::<Result<Vec<Vec<usize>>, OracleError>>()?;
            rows.push(per_col);
        }
        Ok(Self { kind, sym_len: kind.symbol_len(q), d: h.len(), rows })
    }

    pub fn dim(&self) -> usize {
        self.sym_len * self.d
    }

    fn simplex_kind(&self) -> SimplexKind {
        match self.kind {
            EmbeddingKind::Flanagan => SimplexKind::SumLeqOne,
            EmbeddingKind::ConstantWeight => SimplexKind::SumEqOne,
        }
    }

    /// Image `g^K` for subset index `k` (mask `k + 1`).
    pub fn image(&self, k: usize, f: &[f64]) -> Vec<f64> {
        (0..self.d).map(|l| self.rows[k][l].iter().map(|&p| f[l * self.sym_len + p]).sum()).collect()
    }

    /// Largest violation of any constraint, measured as a Euclidean distance.
    pub fn violation(&self, f: &[f64]) -> f64 {
        let sl = self.sym_len;
        let mut worst: f64 = 0.0;
        let mut scratch = Scratch::new();
        let mut out = vec![0.0; sl.max(self.d)];
        for l in 0..self.d {
            let col = &f[l * sl..(l + 1) * sl];
            project_simplex_into(self.simplex_kind(), col, &mut out[..sl], &mut scratch);
            worst = worst.max(crate::projections::dist(col, &out[..sl]));
        }
        for k in 0..self.rows.len() {
            let g = self.image(k, f);
            project_parity_polytope_into(&g, &mut out[..self.d], &mut scratch);
            worst = worst.max(crate::projections::dist(&g, &out[..self.d]));
        }
        worst
    }

    /// Projection onto the intersection by Dykstra's alternating projections.
    /// Stops once a full cycle changes neither the iterate nor any increment
    /// by more than `tol` (max norm); the iterate alone can stall far from
    /// the answer.
    pub fn project(&self, v: &[f64], tol: f64, max_cycles: usize) -> Result<Vec<f64>, OracleError> {
        let n = self.dim();
        if v.len() != n {
            return Err(OracleError::Dimension { expected: n, found: v.len() });
        }
        let sl = self.sym_len;
        let d = self.d;
        let sets = self.rows.len() + 1;
        let mut x = v.to_vec();
        let mut incr = vec![vec![0.0; n]; sets];
        let mut y = vec![0.0; n];
        let mut prev = x.clone();
        let mut scratch = Scratch::new();
        let mut g = vec![0.0; d];
        let mut gp = vec![0.0; d];
        let c = self.rows[0][0].len() as f64;
        for cycle in 1..=max_cycles {
            let mut inc_change: f64 = 0.0;
            for (s, inc) in incr.iter_mut().enumerate() {
                for i in 0..n {
                    y[i] = x[i] + inc[i];
                }
                x.copy_from_slice(&y);
                if s == 0 {
                    for l in 0..d {
                        project_simplex_into(self.simplex_kind(), &y[l * sl..(l + 1) * sl], &mut x[l * sl..(l + 1) * sl], &mut scratch);
                    }
                } else {
                    let rows = &self.rows[s - 1];
                    for l in 0..d {
                        g[l] = rows[l].iter().map(|&p| y[l * sl + p]).sum();
                    }
                    project_parity_polytope_into(&g, &mut gp, &mut scratch);
                    for l in 0..d {
                        let delta = (g[l] - gp[l]) / c;
                        for &p in &rows[l] {
                            x[l * sl + p] -= delta;
                        }
                    }
                }
                for i in 0..n {
                    let fresh = y[i] - x[i];
                    inc_change = inc_change.max((fresh - inc[i]).abs());
                    inc[i] = fresh;
                }
            }
            let moved = x.iter().zip(&prev).map(|(a, b)| (a - b).abs()).fold(inc_change, f64::max);
            if moved < tol {
                let viol = self.violation(&x);
                if viol > 1e-9 {
                    return Err(OracleError::NoConvergence { method: "Dykstra", iterations: cycle, gap: viol });
                }
                return Ok(x);
            }
            if cycle == max_cycles {
                return Err(OracleError::NoConvergence { method: "Dykstra", iterations: cycle, gap: moved });
            }
            prev.copy_from_slice(&x);
        }
        Err(OracleError::NoConvergence { method: "Dykstra", iterations: 0, gap: f64::INFINITY })
    }
}

/// Default tolerance and cycle cap for [`RelaxedPolytope::project`] in tests.
pub const DYKSTRA_TOL: f64 = 1e-13;
pub const DYKSTRA_CYCLES: usize = 1_000_000;

/// The per-symbol matrix `sum_k T_k^T T_k` built by subset enumeration.
pub fn phi_matrix(m: u32) -> Vec<Vec<f64>> {
    let q = 1usize << m;
    let mut phi = vec![vec![0.0; q - 1]; q - 1];
    for mask in 1..q as u32 {
        let members: Vec<usize> = (1..q as u32).filter(|a| (a & mask).count_ones() % 2 == 1).map(|a| a as usize - 1).collect();
        for &a in &members {
            for &b in &members {
                phi[a][b] += 1.0;
            }
        }
    }
    phi
}

/// Solves `(c0 I + d_v Phi) x = t` densely.
pub fn dense_xupdate_oracle(m: u32, d_v: usize, c0: f64, t: &[f64]) -> Result<Vec<f64>, OracleError> {
    let phi = phi_matrix(m);
    let n = phi.len();
    if t.len() != n {
        return Err(OracleError::Dimension { expected: n, found: t.len() });
    }
    let a = (0..n)
        .map(|i| (0..n).map(|j| d_v as f64 * phi[i][j] + if i == j { c0 } else { 0.0 }).collect())
        .collect();
    solve_dense(a, t.to_vec())
}

/// Checks the subset-counting identities for vectors of length `n`: every
/// nonzero `u` has odd parity on exactly `2^(n-1)` subsets, and distinct
/// nonzero `u, v` are jointly odd on exactly `2^(n-2)`.
pub fn subset_counts_hold(n: u32) -> bool {
    let full = 1u32 << n;
    let odd = |u: u32, k: u32| (u & k).count_ones() % 2 == 1;
    for u in 1..full {
        if (0..full).filter(|&k| odd(u, k)).count() != (full / 2) as usize {
            return false;
        }
        for v in 1..full {
            if u != v && (0..full).filter(|&k| odd(u, k) && odd(v, k)).count() != (full / 4) as usize {
                return false;
            }
        }
    }
    true
}

/// Result of [`validate_conjecture_gf4`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConjectureReport {
    pub d: usize,
    pub trials: usize,
    pub max_diff: f64,
    pub mean_diff: f64,
}

/// Compares the projection onto the relaxed GF(4) polytope of the all-ones
/// check with the projection onto the hull of its embedded codewords, for
/// random points with entries uniform in `[0, 4]`.
pub fn validate_conjecture_gf4(d: usize, trials: usize, seed: u64) -> Result<ConjectureReport, OracleError> {
    if !(2..=6).contains(&d) {
        return Err(OracleError::TooLarge { q: 4, d });
    }
    let ctx = FieldCtx::new(2)?;
    let h = vec![1; d];
    let vertices = enumerate_spc(&ctx, &h)?.points(EmbeddingKind::Flanagan);
    let poly = RelaxedPolytope::new(&ctx, EmbeddingKind::Flanagan, &h)?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut max_diff: f64 = 0.0;
    let mut total = 0.0;
    for _ in 0..trials {
        let v: Vec<f64> = (0..poly.dim()).map(|_| rng.gen_range(0.0..4.0)).collect();
        let hull = project_hull(&vertices, &v)?;
        let relaxed = poly.project(&v, DYKSTRA_TOL, DYKSTRA_CYCLES)?;
        let diff = crate::projections::dist(&hull.point, &relaxed);
        max_diff = max_diff.max(diff);
        total += diff;
    }
    Ok(ConjectureReport { d, trials, max_diff, mean_diff: if trials > 0 { total / trials as f64 } else { 0.0 } })
}
