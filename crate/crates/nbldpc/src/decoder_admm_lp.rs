//! ADMM linear-programming decoder over the relaxed code polytope.
//!
//! Every check contributes one parity-polytope replica per nonempty set of
//! bit positions; every variable has one simplex replica. The x-update has a
//! closed form because, for every variable, the Gram matrix of the gathers is
//! `d_v * Phi + I` with `Phi` having diagonal `2^(m-1)` and off-diagonal
//! `2^(m-2)`, whose inverse is `a I + b (J - I)`.
//!
//! The same loop runs under the Flanagan embedding (simplex with sum <= 1) and
//! the constant-weight embedding (sum = 1). An optional l2 penalty pulling
//! symbols away from the uniform vector turns it into the fast, non-symmetric
//! penalized variant.

use std::time::{Duration, Instant};

use thiserror::Error;

use crate::channel::LLR_CLIP;
use crate::code_model::{build_check_contexts, CheckContext, NonbinaryCode};
use crate::embedding::EmbeddingKind;
use crate::gf2m::{Elem, FieldCtx};
use crate::projections::{project_parity_polytope_into, project_simplex_into, Scratch, SimplexKind};

/// Parameter validation failures.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamError {
    #[error("penalty parameter mu = {0} must be positive")]
    Mu(f64),
    #[error("over-relaxation rho = {0} must lie in [1, 2)")]
    Rho(f64),
    #[error("tolerance eps = {0} must be non-negative")]
    Eps(f64),
    #[error("t_max must be at least 1")]
    TMax,
    #[error("penalty alpha = {0} must be non-negative")]
    Alpha(f64),
    #[error("x-update divisor {0} is not positive; reduce alpha or raise mu")]
    Divisor(f64),
    #[error("the penalty requires the constant-weight embedding")]
    PenaltyNeedsCw,
    #[error("LLR vector has length {found}, expected {expected}")]
    LlrLength { expected: usize, found: usize },
    #[error("inner projection parameter invalid: {0}")]
    Inner(String),
    #[error("check {0} has degree below 2")]
    CheckDegree(usize),
}

/// Settings for [`LpDecoder`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpParams {
    pub mu: f64,
    pub rho: f64,
    pub t_max: usize,
    pub eps: f64,
    pub early_term: bool,
    pub kind: EmbeddingKind,
    /// l2 penalty weight; nonzero only for the fast penalized variant.
    pub alpha: f64,
}

impl Default for LpParams {
    fn default() -> Self {
        Self { mu: 2.0, rho: 1.9, t_max: 200, eps: 1e-5, early_term: true, kind: EmbeddingKind::Flanagan, alpha: 0.0 }
    }
}

impl LpParams {
    pub fn validate(&self) -> Result<(), ParamError> {
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
        if self.alpha > 0.0 {
            if self.kind != EmbeddingKind::ConstantWeight {
                return Err(ParamError::PenaltyNeedsCw);
            }
            let c0 = 1.0 - 2.0 * self.alpha / self.mu;
            if c0 <= 0.0 {
                return Err(ParamError::Divisor(c0));
            }
        }
        Ok(())
    }
}

/// How a decode ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DecodeStatus {
    /// Residuals fell below tolerance and the rounded word is a codeword.
    CodewordConverged,
    /// Early termination found a codeword.
    CodewordEarly,
    /// Iteration cap reached; the rounded word is a codeword.
    CodewordAtTmax,
    /// Iteration cap reached without a codeword.
    FractionalAtTmax,
    /// Residuals fell below tolerance but the rounded word is not a codeword.
    ToleranceReached,
}

impl DecodeStatus {
    pub fn is_codeword(self) -> bool {
        matches!(self, DecodeStatus::CodewordConverged | DecodeStatus::CodewordEarly | DecodeStatus::CodewordAtTmax)
    }
}

/// Result of one decode.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodeOutcome {
    pub word: Vec<Elem>,
    pub status: DecodeStatus,
    pub iterations: usize,
    pub wall_time: Duration,
    /// Inner projections that hit their iteration cap (penalized decoder only).
    pub degraded_inner: usize,
}

/// Closed-form coefficients `(a, b)` of `(c0 I + d_v Phi)^-1 = a I + b (J - I)`
/// on the `q - 1` nonzero coordinates, where `c0 = 1` for plain LP decoding.
pub fn x_update_coeffs(m: u32, d_v: usize, c0: f64) -> (f64, f64) {
    let q = (1u64 << m) as f64;
    let diag = d_v as f64 * q / 2.0;
    let off = d_v as f64 * q / 4.0;
    // Matrix is (c0 + diag - off) I + off J on n = q - 1 coordinates.
    let c = c0 + diag - off;
    let n = q - 1.0;
    let b = -off / (c * (c + n * off));
    let a = 1.0 / c + b;
    (a, b)
}

/// Rounds per-symbol simplex points to field elements: argmax with ties to
/// the smaller element. Under the Flanagan embedding element 0 carries
/// weight `1 - sum`.
pub fn round_symbols(kind: EmbeddingKind, q: usize, s: &[f64], out: &mut [Elem]) {
    let sl = kind.symbol_len(q);
    for (i, o) in out.iter_mut().enumerate() {
        let blk = &s[i * sl..(i + 1) * sl];
        let (mut best, mut best_v) = match kind {
            EmbeddingKind::Flanagan => (0usize, 1.0 - blk.iter().sum::<f64>()),
            EmbeddingKind::ConstantWeight => (0usize, blk[0]),
        };
        let start = usize::from(kind == EmbeddingKind::ConstantWeight);
        for (p, &v) in blk.iter().enumerate().skip(start) {
            if v > best_v {
                best_v = v;
                best = kind.elem_at(p) as usize;
            }
        }
        *o = best as Elem;
    }
}

/// ADMM LP decoder bound to one code and embedding; reusable across decodes.
pub struct LpDecoder<'a> {
    ctx: &'a FieldCtx,
    code: &'a NonbinaryCode,
    checks: Vec<CheckContext>,
    params: LpParams,
    sl: usize,
    /// Offset of each check's replica block in `z` / `lambda`.
    zoff: Vec<usize>,
    /// Per variable `(a - b, b)`.
    coeff: Vec<(f64, f64)>,
    /// Element-0 coefficient under the constant-weight embedding.
    c0_inv: f64,
    x: Vec<f64>,
    t: Vec<f64>,
    z: Vec<f64>,
    lambda: Vec<f64>,
    s: Vec<f64>,
    eta: Vec<f64>,
    gam: Vec<f64>,
    v: Vec<f64>,
    p: Vec<f64>,
    word: Vec<Elem>,
    scratch: Scratch,
}

impl<'a> LpDecoder<'a> {
    pub fn new(ctx: &'a FieldCtx, code: &'a NonbinaryCode, params: LpParams) -> Result<Self, ParamError> {
        params.validate()?;
        if let Some(j) = (0..code.n_checks()).find(|&j| code.check_degree(j) < 2) {
            return Err(ParamError::CheckDegree(j));
        }
        let q = ctx.q();
        let sl = params.kind.symbol_len(q);
        let checks = build_check_contexts(ctx, code, params.kind);
        let mut zoff = Vec::with_capacity(checks.len() + 1);
        let mut acc = 0;
        for c in &checks {
            zoff.push(acc);
            acc += (q - 1) * c.degree();
        }
        zoff.push(acc);
        let c0 = 1.0 - 2.0 * params.alpha / params.mu;
        let coeff = (0..code.n())
            .map(|i| {
                let (a, b) = x_update_coeffs(ctx.m(), code.var_degree(i), c0);
                (a - b, b)
            })
            .collect();
        let n = code.n();
        Ok(Self {
            ctx,
            code,
            checks,
            params,
            sl,
            zoff,
            coeff,
            c0_inv: 1.0 / c0,
            x: vec![0.0; n * sl],
            t: vec![0.0; n * sl],
            z: vec![0.0; acc],
            lambda: vec![0.0; acc],
            s: vec![0.0; n * sl],
            eta: vec![0.0; n * sl],
            gam: vec![0.0; n * sl],
            v: Vec::new(),
            p: Vec::new(),
            word: vec![0; n],
            scratch: Scratch::new(),
        })
    }

    pub fn params(&self) -> &LpParams {
        &self.params
    }

    /// Primal iterate after the last decode.
    pub fn x(&self) -> &[f64] {
        &self.x
    }

    /// Simplex replicas after the last decode.
    pub fn s(&self) -> &[f64] {
        &self.s
    }

    /// Parity replicas of check `j` after the last decode, `k`-major.
    pub fn z_check(&self, j: usize) -> &[f64] {
        &self.z[self.zoff[j]..self.zoff[j + 1]]
    }

    /// Gathered image `Z_{j,k} x` of the current x for check `j`, `k`-major.
    pub fn gather_x(&self, j: usize) -> Vec<f64> {
        let c = &self.checks[j];
        let d = c.degree();
        let mut out = vec![0.0; (self.ctx.q() - 1) * d];
        for k in 0..self.ctx.q() - 1 {
            for l in 0..d {
                out[k * d + l] = c.gather_entry(k, l).iter().map(|&ix| self.x[ix as usize]).sum();
            }
        }
        out
    }

    /// Decodes one word from its LLR vector (Flanagan: `q - 1` per symbol,
    /// constant weight: `q` per symbol).
    pub fn decode(&mut self, llr: &[f64]) -> Result<DecodeOutcome, ParamError> {
        let start = Instant::now();
        let n = self.code.n();
        let q = self.ctx.q();
        let sl = self.sl;
        if llr.len() != n * sl {
            return Err(ParamError::LlrLength { expected: n * sl, found: llr.len() });
        }
        let LpParams { mu, rho, t_max, eps, early_term, kind, alpha } = self.params;
        let inv_mu = 1.0 / mu;
        let pen = 2.0 * alpha / (q as f64 * mu);
        for (g, &l) in self.gam.iter_mut().zip(llr) {
            *g = l.clamp(-LLR_CLIP, LLR_CLIP) * inv_mu + pen;
        }
        let init = 1.0 / q as f64;
        self.z.fill(init);
        self.s.fill(init);
        self.lambda.fill(0.0);
        self.eta.fill(0.0);
        let simplex = match kind {
            EmbeddingKind::Flanagan => SimplexKind::SumLeqOne,
            EmbeddingKind::ConstantWeight => SimplexKind::SumEqOne,
        };
        let dims = (self.s.len() + self.z.len()) as f64;
        let threshold = eps * eps * dims;

        let mut status = DecodeStatus::FractionalAtTmax;
        let mut iterations = t_max;
        for it in 1..=t_max {
            self.x_update(inv_mu, kind);

            let mut r_primal = 0.0;
            let mut r_dual = 0.0;
            // Parity replicas.
            for (j, c) in self.checks.iter().enumerate() {
                let d = c.degree();
                self.v.resize(d, 0.0);
                self.p.resize(d, 0.0);
                for k in 0..q - 1 {
                    let base = self.zoff[j] + k * d;
                    for l in 0..d {
                        let zx: f64 = c.gather_entry(k, l).iter().map(|&ix| self.x[ix as usize]).sum();
                        self.p[l] = zx;
                        let relaxed = rho * zx + (1.0 - rho) * self.z[base + l];
                        self.v[l] = relaxed + self.lambda[base + l] * inv_mu;
                    }
                    // Keep the gathered values in `p` and project `v` into `t` scratch.
                    let (v, out) = (&self.v, &mut self.t[..d]);
                    project_parity_polytope_into(v, out, &mut self.scratch);
                    for l in 0..d {
                        let zold = self.z[base + l];
                        let znew = self.t[l];
                        let relaxed = rho * self.p[l] + (1.0 - rho) * zold;
                        self.lambda[base + l] += mu * (relaxed - znew);
                        r_primal += (self.p[l] - znew) * (self.p[l] - znew);
                        r_dual += (znew - zold) * (znew - zold);
                        self.z[base + l] = znew;
                    }
                }
            }
            // Simplex replicas.
            self.v.resize(sl, 0.0);
            for i in 0..n {
                let r = i * sl..(i + 1) * sl;
                for (p, ix) in r.clone().enumerate() {
                    let relaxed = rho * self.x[ix] + (1.0 - rho) * self.s[ix];
                    self.v[p] = relaxed + self.eta[ix] * inv_mu;
                }
                project_simplex_into(simplex, &self.v, &mut self.t[..sl], &mut self.scratch);
                for (p, ix) in r.enumerate() {
                    let sold = self.s[ix];
                    let snew = self.t[p];
                    let relaxed = rho * self.x[ix] + (1.0 - rho) * sold;
                    self.eta[ix] += mu * (relaxed - snew);
                    r_primal += (self.x[ix] - snew) * (self.x[ix] - snew);
                    r_dual += (snew - sold) * (snew - sold);
                    self.s[ix] = snew;
                }
            }

            round_symbols(kind, q, &self.s, &mut self.word);
            let converged = r_primal < threshold && r_dual < threshold;
            if early_term && self.code.syndrome_ok(self.ctx, &self.word) {
                status = if converged { DecodeStatus::CodewordConverged } else { DecodeStatus::CodewordEarly };
                iterations = it;
                break;
            }
            if converged {
                status = if self.code.syndrome_ok(self.ctx, &self.word) {
                    DecodeStatus::CodewordConverged
                } else {
                    DecodeStatus::ToleranceReached
                };
                iterations = it;
                break;
            }
        }
        if status == DecodeStatus::FractionalAtTmax && self.code.syndrome_ok(self.ctx, &self.word) {
            status = DecodeStatus::CodewordAtTmax;
        }
        Ok(DecodeOutcome { word: self.word.clone(), status, iterations, wall_time: start.elapsed(), degraded_inner: 0 })
    }

    fn x_update(&mut self, inv_mu: f64, kind: EmbeddingKind) {
        let sl = self.sl;
        let q = self.ctx.q();
        // Adjoint of the gathers: scatter each replica entry back to every
        // coordinate it summed.
        self.t.fill(0.0);
        for (j, c) in self.checks.iter().enumerate() {
            let d = c.degree();
            for k in 0..q - 1 {
                let base = self.zoff[j] + k * d;
                for l in 0..d {
                    let val = self.z[base + l] - self.lambda[base + l] * inv_mu;
                    for &ix in c.gather_entry(k, l) {
                        self.t[ix as usize] += val;
                    }
                }
            }
        }
        for ((t, &s), (&e, &g)) in self.t.iter_mut().zip(&self.s).zip(self.eta.iter().zip(&self.gam)) {
            *t += s - e * inv_mu - g;
        }
        let skip = usize::from(kind == EmbeddingKind::ConstantWeight);
        for (i, &(amb, b)) in self.coeff.iter().enumerate() {
            let blk = &self.t[i * sl..(i + 1) * sl];
            let xb = &mut self.x[i * sl..(i + 1) * sl];
            if skip == 1 {
                xb[0] = blk[0] * self.c0_inv;
            }
            let sum: f64 = blk[skip..].iter().sum();
            for (xv, &tv) in xb[skip..].iter_mut().zip(&blk[skip..]) {
                *xv = amb * tv + b * sum;
            }
        }
    }
}
