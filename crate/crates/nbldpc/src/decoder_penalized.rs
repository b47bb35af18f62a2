//! ADMM penalized decoding under the constant-weight embedding.
//!
//! The objective is the LP cost minus `alpha * sum_i |x_i - u|^2` with `u`
//! the uniform vector. Each check keeps one replica of its whole embedded
//! block, projected onto the relaxed code polytope of that check. The
//! projection rotates the block to the all-ones check, runs an inner ADMM
//! there, and rotates back.
//!
//! # Inner projection
//!
//! For the all-ones check the polytope is `{F : columns on the unit simplex,
//! g^K in PP_d for every nonempty K}`. The inner ADMM works with the signed
//! images `u_K = (2 T_K - 1^T) F`, which equal `2 g^K - 1` on the simplex, and
//! constrains them to `2 PP_d - 1`. The signed rows are Walsh characters, so
//! the F-update matrix is `(1 + mu_p) I + mu_p (q I - J)`, which is invariant
//! under every per-column XOR shift; a sign flip of `u_K` on an even number of
//! columns maps `2 PP_d - 1` to itself. Together with symmetric
//! initialization this keeps the whole decoder equivariant under relative
//! maps by codewords.

use std::time::Instant;

use crate::channel::{Modulation, LLR_CLIP};
use crate::code_model::{rotation_perm, NonbinaryCode};
use crate::decoder_admm_lp::{round_symbols, DecodeOutcome, DecodeStatus, ParamError};
use crate::embedding::{relative_map_blocks, EmbeddingKind};
use crate::gf2m::{Elem, FieldCtx};
use crate::projections::{project_parity_polytope_into, project_simplex_into, Rotation, Scratch, SimplexKind};

/// Inner ADMM settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnerParams {
    pub mu: f64,
    /// Over-relaxation of the replica updates, in `[1, 2)`.
    pub rho: f64,
    /// Bound on the Euclidean norms of the primal and dual residuals.
    pub eps: f64,
    pub t_max: usize,
}

impl Default for InnerParams {
    fn default() -> Self {
        Self { mu: 1.0, rho: 1.8, eps: 1e-5, t_max: 100 }
    }
}

/// Settings for [`PenalizedDecoder`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenalizedParams {
    pub mu: f64,
    pub rho: f64,
    pub alpha: f64,
    pub t_max: usize,
    pub eps: f64,
    pub early_term: bool,
    pub inner: InnerParams,
}

impl Default for PenalizedParams {
    fn default() -> Self {
        Self { mu: 4.0, rho: 1.5, alpha: 0.6, t_max: 100, eps: 1e-5, early_term: true, inner: InnerParams::default() }
    }
}

impl PenalizedParams {
    /// Checks ranges, including `d_v - 2 alpha / mu > 0` for every variable.
    pub fn validate(&self, code: &NonbinaryCode) -> Result<(), ParamError> {
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return Err(ParamError::Mu(self.mu));
        }
        if !(1.0..2.0).contains(&self.rho) {
            return Err(ParamError::Rho(self.rho));
        }
        if !(self.eps >= 0.0) {
            return Err(ParamError::Eps(self.eps));
        }
        if self.t_max == 0 {
            return Err(ParamError::TMax);
        }
        if !(self.alpha >= 0.0) {
            return Err(ParamError::Alpha(self.alpha));
        }
        let inner = &self.inner;
        if !(inner.mu > 0.0) || !(1.0..2.0).contains(&inner.rho) || !(inner.eps >= 0.0) || inner.t_max == 0 {
            return Err(ParamError::Inner(format!("{:?}", self.inner)));
        }
        let min_dv = (0..code.n()).map(|i| code.var_degree(i)).min().unwrap_or(0);
        let div = min_dv as f64 - 2.0 * self.alpha / self.mu;
        if div <= 0.0 {
            return Err(ParamError::Divisor(div));
        }
        Ok(())
    }
}

/// Outcome of one inner projection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InnerReport {
    pub iterations: usize,
    pub converged: bool,
}

/// Warm-startable iterates of the inner ADMM for one check of degree `d`.
#[derive(Debug, Clone)]
pub struct InnerState {
    q: usize,
    d: usize,
    /// Simplex replicas, column-major `q x d`.
    s: Vec<f64>,
    s_dual: Vec<f64>,
    /// Signed parity replicas, `(q - 1) x d`, `K`-major.
    w: Vec<f64>,
    w_dual: Vec<f64>,
}

impl InnerState {
    pub fn new(q: usize, d: usize) -> Self {
        let mut st = Self {
            q,
            d,
            s: vec![0.0; q * d],
            s_dual: vec![0.0; q * d],
            w: vec![0.0; (q - 1) * d],
            w_dual: vec![0.0; (q - 1) * d],
        };
        st.reset();
        st
    }

    /// Symmetric start: uniform simplex replicas, parity images at 1/2, zero duals.
    pub fn reset(&mut self) {
        self.s.fill(1.0 / self.q as f64);
        self.s_dual.fill(0.0);
        self.w.fill(0.0);
        self.w_dual.fill(0.0);
    }

    /// Applies a per-column XOR shift (normalized coordinates) to the state,
    /// so that a shifted input reproduces shifted iterates.
    pub fn shift(&mut self, shift: &[Elem]) {
        let q = self.q;
        let mut tmp = vec![0.0; q * self.d];
        relative_map_blocks(q, &self.s, shift, &mut tmp);
        self.s.copy_from_slice(&tmp);
        relative_map_blocks(q, &self.s_dual, shift, &mut tmp);
        self.s_dual.copy_from_slice(&tmp);
        for k in 0..q - 1 {
            for (l, &b) in shift.iter().enumerate() {
                if ((k + 1) as u32 & b as u32).count_ones() % 2 == 1 {
                    self.w[k * self.d + l] = -self.w[k * self.d + l];
                    self.w_dual[k * self.d + l] = -self.w_dual[k * self.d + l];
                }
            }
        }
    }
}

/// Inner ADMM projector onto the relaxed code polytope of the all-ones check.
#[derive(Debug, Clone)]
pub struct RelaxedProjector {
    q: usize,
    /// `sign[k * q + a] = +1` if `a` is in `B~(K_k, 1)`, else `-1`.
    sign: Vec<f64>,
    f: Vec<f64>,
    u: Vec<f64>,
    coef: Vec<f64>,
    buf: Vec<f64>,
    out: Vec<f64>,
    scratch: Scratch,
}

impl RelaxedProjector {
    pub fn new(q: usize) -> Self {
        let sign = (1..q as u32)
            .flat_map(|mask| (0..q as u32).map(move |a| if (a & mask).count_ones() % 2 == 1 { 1.0 } else { -1.0 }))
            .collect();
        Self { q, sign, f: Vec::new(), u: Vec::new(), coef: Vec::new(), buf: Vec::new(), out: Vec::new(), scratch: Scratch::new() }
    }

    /// Projects the normalized block `v` (`q x d`, column-major) into `out`,
    /// continuing from `state`.
    pub fn project_normalized(&mut self, v: &[f64], out: &mut [f64], state: &mut InnerState, params: &InnerParams) -> InnerReport {
        let q = self.q;
        let d = state.d;
        debug_assert_eq!(v.len(), q * d);
        let mu = params.mu;
        let inv_mu = 1.0 / mu;
        let c_inv = 1.0 / (1.0 + mu * (1.0 + q as f64));
        let j_coef = mu / (1.0 + mu);
        let rho = params.rho;
        let threshold = params.eps * params.eps;
        self.f.resize(q * d, 0.0);
        self.u.resize((q - 1) * d, 0.0);
        self.buf.resize(q.max(d), 0.0);
        self.out.resize(q.max(d), 0.0);

        // Walsh coefficients mu * w - w_dual, K-major.
        self.coef.clear();
        self.coef.extend(state.w.iter().zip(&state.w_dual).map(|(w, om)| mu * w - om));
        let mut report = InnerReport { iterations: params.t_max, converged: false };
        for it in 1..=params.t_max {
            // F-update, column by column.
            for (l, col) in self.f.chunks_exact_mut(q).enumerate() {
                let r = l * q..(l + 1) * q;
                for (((c, &vv), &ss), &sd) in col.iter_mut().zip(&v[r.clone()]).zip(&state.s[r.clone()]).zip(&state.s_dual[r]) {
                    *c = vv + mu * ss - sd;
                }
                for (sg, coef) in self.sign.chunks_exact(q).zip(self.coef.iter().skip(l).step_by(d)) {
                    for (c, &sv) in col.iter_mut().zip(sg) {
                        *c += sv * coef;
                    }
                }
                let shift = j_coef * col.iter().sum::<f64>();
                for x in col.iter_mut() {
                    *x = (*x + shift) * c_inv;
                }
            }
            let mut r_primal = 0.0;
            let mut r_dual = 0.0;
            // Simplex replicas.
            let buf = &mut self.buf[..q];
            let proj = &mut self.out[..q];
            for ((fc, sc), dc) in self.f.chunks_exact(q).zip(state.s.chunks_exact_mut(q)).zip(state.s_dual.chunks_exact_mut(q)) {
                for (((b, &f), &s), &sd) in buf.iter_mut().zip(fc).zip(sc.iter()).zip(dc.iter()) {
                    *b = rho * f + (1.0 - rho) * s + sd * inv_mu;
                }
                project_simplex_into(SimplexKind::SumEqOne, buf, proj, &mut self.scratch);
                for (((&new, &f), s), sd) in proj.iter().zip(fc).zip(sc.iter_mut()).zip(dc.iter_mut()) {
                    let diff = f - new;
                    *sd += mu * (rho * f + (1.0 - rho) * *s - new);
                    r_primal += diff * diff;
                    r_dual += (new - *s) * (new - *s);
                    *s = new;
                }
            }
            // Signed parity replicas.
            let buf = &mut self.buf[..d];
            let proj = &mut self.out[..d];
            for (k, sg) in self.sign.chunks_exact(q).enumerate() {
                let r = k * d..(k + 1) * d;
                let (u, w, wd, coef) = (&mut self.u[r.clone()], &mut state.w[r.clone()], &mut state.w_dual[r.clone()], &mut self.coef[r]);
                for ((((b, uk), col), &wv), &om) in buf.iter_mut().zip(u.iter_mut()).zip(self.f.chunks_exact(q)).zip(w.iter()).zip(wd.iter()) {
                    *uk = col.iter().zip(sg).map(|(x, s)| x * s).sum();
                    *b = 0.5 * (rho * *uk + (1.0 - rho) * wv + om * inv_mu + 1.0);
                }
                project_parity_polytope_into(buf, proj, &mut self.scratch);
                for ((((&p, &uk), wv), om), cf) in proj.iter().zip(u.iter()).zip(w.iter_mut()).zip(wd.iter_mut()).zip(coef.iter_mut()) {
                    let new = 2.0 * p - 1.0;
                    let diff = uk - new;
                    *om += mu * (rho * uk + (1.0 - rho) * *wv - new);
                    r_primal += diff * diff;
                    r_dual += (new - *wv) * (new - *wv);
                    *wv = new;
                    *cf = mu * new - *om;
                }
            }
            if r_primal < threshold && r_dual < threshold {
                report = InnerReport { iterations: it, converged: true };
                break;
            }
        }
        out.copy_from_slice(&self.f);
        report
    }
}

/// Projects `v` (`q x d`, column-major) onto the relaxed code polytope of the
/// check with values `h`, from a cold start.
pub fn project_relaxed_code_polytope(ctx: &FieldCtx, h: &[Elem], v: &[f64], params: &InnerParams) -> (Vec<f64>, InnerReport) {
    let q = ctx.q();
    let rot = Rotation::new(h.iter().map(|&x| rotation_perm(ctx, EmbeddingKind::ConstantWeight, x)).collect());
    let mut proj = RelaxedProjector::new(q);
    let mut state = InnerState::new(q, h.len());
    let mut norm = vec![0.0; v.len()];
    rot.to_normalized(v, &mut norm);
    let mut p = vec![0.0; v.len()];
    let report = proj.project_normalized(&norm, &mut p, &mut state, params);
    let mut out = vec![0.0; v.len()];
    rot.to_actual(&p, &mut out);
    (out, report)
}

/// Residuals after one outer iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepInfo {
    pub r_primal: f64,
    pub r_dual: f64,
    pub degraded: usize,
    pub inner_iterations: usize,
}

/// ADMM penalized decoder bound to one code; reusable across decodes.
pub struct PenalizedDecoder<'a> {
    ctx: &'a FieldCtx,
    code: &'a NonbinaryCode,
    params: PenalizedParams,
    rotations: Vec<Rotation>,
    zoff: Vec<usize>,
    inner: Vec<InnerState>,
    projector: RelaxedProjector,
    x: Vec<f64>,
    z: Vec<f64>,
    lambda: Vec<f64>,
    gam: Vec<f64>,
    acc: Vec<f64>,
    v: Vec<f64>,
    norm: Vec<f64>,
    proj: Vec<f64>,
    back: Vec<f64>,
    word: Vec<Elem>,
    scratch: Scratch,
}

impl<'a> PenalizedDecoder<'a> {
    pub fn new(ctx: &'a FieldCtx, code: &'a NonbinaryCode, params: PenalizedParams) -> Result<Self, ParamError> {
        params.validate(code)?;
        if let Some(j) = (0..code.n_checks()).find(|&j| code.check_degree(j) < 2) {
            return Err(ParamError::CheckDegree(j));
        }
        let q = ctx.q();
        let rotations = (0..code.n_checks())
            .map(|j| {
                Rotation::new(
                    code.check(j).iter().map(|&(_, h)| rotation_perm(ctx, EmbeddingKind::ConstantWeight, h)).collect(),
                )
            })
            .collect();
        let mut zoff = vec![0];
        for j in 0..code.n_checks() {
            zoff.push(zoff[j] + q * code.check_degree(j));
        }
        let total = zoff[code.n_checks()];
        let inner = (0..code.n_checks()).map(|j| InnerState::new(q, code.check_degree(j))).collect();
        Ok(Self {
            ctx,
            code,
            params,
            rotations,
            zoff,
            inner,
            projector: RelaxedProjector::new(q),
            x: vec![0.0; q * code.n()],
            z: vec![0.0; total],
            lambda: vec![0.0; total],
            gam: vec![0.0; q * code.n()],
            acc: vec![0.0; q],
            v: Vec::new(),
            norm: Vec::new(),
            proj: Vec::new(),
            back: Vec::new(),
            word: vec![0; code.n()],
            scratch: Scratch::new(),
        })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    /// Replica block of check `j` (`q x d_c`, positions in check order).
    pub fn z_check(&self, j: usize) -> &[f64] {
        &self.z[self.zoff[j]..self.zoff[j + 1]]
    }

    /// Dual block of check `j`.
    pub fn lambda_check(&self, j: usize) -> &[f64] {
        &self.lambda[self.zoff[j]..self.zoff[j + 1]]
    }

    /// Loads constant-weight LLRs and resets all iterates.
    pub fn start(&mut self, llr: &[f64]) -> Result<(), ParamError> {
        let q = self.ctx.q();
        if llr.len() != q * self.code.n() {
            return Err(ParamError::LlrLength { expected: q * self.code.n(), found: llr.len() });
        }
        for (g, &l) in self.gam.iter_mut().zip(llr) {
            *g = l.clamp(-LLR_CLIP, LLR_CLIP);
        }
        self.z.fill(0.5);
        self.lambda.fill(0.0);
        for s in &mut self.inner {
            s.reset();
        }
        Ok(())
    }

    /// One outer iteration: x-update, replica projections, dual updates.
    pub fn step(&mut self) -> StepInfo {
        let q = self.ctx.q();
        let PenalizedParams { mu, rho, alpha, inner, .. } = self.params;
        let inv_mu = 1.0 / mu;
        let pen = 2.0 * alpha / (q as f64 * mu);

        // x-update: projected minimizer of the penalized augmented Lagrangian.
        self.v.resize(q, 0.0);
        for i in 0..self.code.n() {
            self.acc.fill(0.0);
            for &(j, pos) in self.code.var_neighbors(i) {
                let base = self.zoff[j] + pos * q;
                for a in 0..q {
                    self.acc[a] += self.z[base + a] - self.lambda[base + a] * inv_mu;
                }
            }
            let div = self.code.var_degree(i) as f64 - 2.0 * alpha * inv_mu;
            for a in 0..q {
                self.v[a] = (self.acc[a] - self.gam[i * q + a] * inv_mu - pen) / div;
            }
            project_simplex_into(SimplexKind::SumEqOne, &self.v[..q], &mut self.x[i * q..(i + 1) * q], &mut self.scratch);
        }

        let mut info = StepInfo { r_primal: 0.0, r_dual: 0.0, degraded: 0, inner_iterations: 0 };
        for j in 0..self.code.n_checks() {
            let row = self.code.check(j);
            let len = q * row.len();
            let base = self.zoff[j];
            self.v.resize(len, 0.0);
            self.norm.resize(len, 0.0);
            self.proj.resize(len, 0.0);
            self.back.resize(len, 0.0);
            for (l, &(i, _)) in row.iter().enumerate() {
                for a in 0..q {
                    let px = self.x[i * q + a];
                    let relaxed = rho * px + (1.0 - rho) * self.z[base + l * q + a];
                    self.v[l * q + a] = relaxed + self.lambda[base + l * q + a] * inv_mu;
                }
            }
            let rot = &self.rotations[j];
            rot.to_normalized(&self.v, &mut self.norm);
            let rep = self.projector.project_normalized(&self.norm, &mut self.proj, &mut self.inner[j], &inner);
            info.inner_iterations += rep.iterations;
            if !rep.converged {
                info.degraded += 1;
            }
            rot.to_actual(&self.proj, &mut self.back);
            for (l, &(i, _)) in row.iter().enumerate() {
                for a in 0..q {
                    let ix = base + l * q + a;
                    let px = self.x[i * q + a];
                    let zold = self.z[ix];
                    let znew = self.back[l * q + a];
                    let relaxed = rho * px + (1.0 - rho) * zold;
                    self.lambda[ix] += mu * (relaxed - znew);
                    info.r_primal += (px - znew) * (px - znew);
                    info.r_dual += (znew - zold) * (znew - zold);
                    self.z[ix] = znew;
                }
            }
        }
        info
    }

    /// Decodes one word from constant-weight LLRs.
    pub fn decode(&mut self, llr: &[f64]) -> Result<DecodeOutcome, ParamError> {
        let start = Instant::now();
        self.start(llr)?;
        let q = self.ctx.q();
        let PenalizedParams { t_max, eps, early_term, .. } = self.params;
        let threshold = eps * eps * self.z.len() as f64;
        let mut degraded = 0;
        let mut status = DecodeStatus::FractionalAtTmax;
        let mut iterations = t_max;
        for it in 1..=t_max {
            let info = self.step();
            degraded += info.degraded;
            round_symbols(EmbeddingKind::ConstantWeight, q, &self.x, &mut self.word);
            let converged = info.r_primal < threshold && info.r_dual < threshold;
            let ok = (early_term || converged) && self.code.syndrome_ok(self.ctx, &self.word);
            if early_term && ok {
                status = if converged { DecodeStatus::CodewordConverged } else { DecodeStatus::CodewordEarly };
                iterations = it;
                break;
            }
            if converged {
                status = if ok { DecodeStatus::CodewordConverged } else { DecodeStatus::ToleranceReached };
                iterations = it;
                break;
            }
        }
        if status == DecodeStatus::FractionalAtTmax && self.code.syndrome_ok(self.ctx, &self.word) {
            status = DecodeStatus::CodewordAtTmax;
        }
        Ok(DecodeOutcome { word: self.word.clone(), status, iterations, wall_time: start.elapsed(), degraded_inner: degraded })
    }
}

/// Result of [`symmetry_harness`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetryReport {
    pub iterations: usize,
    pub max_discrepancy: f64,
    pub passed: bool,
}

/// Largest iterate mismatch the harness accepts.
pub const SYMMETRY_TOL: f64 = 1e-9;

/// Runs the penalized decoder on outputs `ys` (codeword `c` sent) and on the
/// relative outputs `tau_{c_i}(y_i)`, and compares the iterates of the second
/// run with the relative maps of the first at every iteration.
pub fn symmetry_harness<T>(
    ctx: &FieldCtx,
    code: &NonbinaryCode,
    modulation: &Modulation,
    c: &[Elem],
    ys: &[[f64; 2]],
    sigma: f64,
    params: PenalizedParams,
    iterations: usize,
    tau: T,
) -> Result<SymmetryReport, ParamError>
where
    T: Fn([f64; 2], Elem) -> [f64; 2],
{
    let q = ctx.q();
    let params = PenalizedParams { early_term: false, eps: 0.0, t_max: iterations.max(1), ..params };
    let y0: Vec<[f64; 2]> = ys.iter().zip(c).map(|(&y, &b)| tau(y, b)).collect();
    let llr = modulation.llr_word(ys, sigma, EmbeddingKind::ConstantWeight);
    let llr0 = modulation.llr_word(&y0, sigma, EmbeddingKind::ConstantWeight);
    let mut dec = PenalizedDecoder::new(ctx, code, params)?;
    let mut dec0 = PenalizedDecoder::new(ctx, code, params)?;
    dec.start(&llr)?;
    dec0.start(&llr0)?;

    let mut worst: f64 = 0.0;
    let mut mapped = Vec::new();
    let cmp = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    for _ in 0..iterations {
        dec.step();
        dec0.step();
        mapped.resize(dec.x().len(), 0.0);
        relative_map_blocks(q, dec.x(), c, &mut mapped);
        worst = worst.max(cmp(&mapped, dec0.x()));
        for j in 0..code.n_checks() {
            let cj: Vec<Elem> = code.check(j).iter().map(|&(i, _)| c[i]).collect();
            for (a, b) in [(dec.z_check(j), dec0.z_check(j)), (dec.lambda_check(j), dec0.lambda_check(j))] {
                mapped.resize(a.len(), 0.0);
                relative_map_blocks(q, a, &cj, &mut mapped);
                worst = worst.max(cmp(&mapped, b));
            }
        }
    }
    Ok(SymmetryReport { iterations, max_discrepancy: worst, passed: worst < SYMMETRY_TOL })
}
