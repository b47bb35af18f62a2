//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! `ACCEPTANCE_ONLY=1,4,9` restricts the run to the listed criteria.
//! Criteria in `KNOWN_CONFLICTS` fail for a documented reason (see the
//! README) and do not affect the exit status; any other failure does.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use nbldpc::channel::{sigma_from_esn0, trial_rng, Modulation};
use nbldpc::code_model::{rotation_perm, toy_code, BundledCode, NonbinaryCode};
use nbldpc::decoder_admm_lp::{x_update_coeffs, DecodeStatus, LpDecoder, LpParams};
use nbldpc::decoder_penalized::{project_relaxed_code_polytope, symmetry_harness, InnerParams, PenalizedParams};
use nbldpc::embedding::{is_valid_spc_embedding, is_valid_spc_embedding_redundant, EmbeddingKind, EmbeddingVec};
use nbldpc::gf2m::{Elem, FieldCtx};
use nbldpc::oracle::{
    dense_xupdate_oracle, enumerate_spc, parity_polytope_vertices, phi_matrix, project_hull, simplex_vertices,
    validate_conjecture_gf4, RelaxedPolytope, DYKSTRA_CYCLES, DYKSTRA_TOL,
};
use nbldpc::projections::{dist, project_parity_polytope, project_simplex, Rotation, SimplexKind};
use nbldpc::sim::{enumerate_codewords, run_sweep, write_csv, CodewordPolicy, DecoderKind, DecoderSpec, SimConfig, SimRecord};
use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::Rng;

/// Criteria expected to fail, with the reason recorded in the README.
const KNOWN_CONFLICTS: [u32; 1] = [4];

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

fn rand_h(rng: &mut impl Rng, q: usize, d: usize) -> Vec<Elem> {
    (0..d).map(|_| rng.gen_range(1..q as u32) as Elem).collect()
}

fn rand_vec(rng: &mut impl Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(lo..hi)).collect()
}

fn c1_field() -> Verdict {
    let gf8 = FieldCtx::new(3).unwrap();
    let table_ok = gf8.exp_table()[..7] == [1, 2, 4, 3, 6, 7, 5];
    let product_ok = gf8.mul(4, 6) == 5;
    let mut sizes_ok = true;
    for m in 2..=4u32 {
        let f = FieldCtx::new(m).unwrap();
        let half = 1usize << (m - 1);
        for h in 1..f.q() as u32 {
            let h = h as Elem;
            sizes_ok &= (1..=m).all(|k| f.b_set(k, h).unwrap().len() == half);
            sizes_ok &= (1..f.q() as u32).all(|mask| f.btilde_set(mask, h).unwrap().len() == half);
        }
    }
    verdict(table_ok && product_ok && sizes_ok, format!("table {table_ok}, 4*6=5 {product_ok}, set sizes {sizes_ok}"))
}

fn c2_embedding_bijection() -> Verdict {
    let mut rng = trial_rng(2, 0);
    let mut checked = 0usize;
    let mut mismatches = 0usize;
    for m in [2u32, 3] {
        let ctx = FieldCtx::new(m).unwrap();
        let q = ctx.q();
        for d in [3usize, 4] {
            for _ in 0..20 {
                let h = rand_h(&mut rng, q, d);
                let mut word = vec![0 as Elem; d];
                for idx in 0..q.pow(d as u32) {
                    let mut r = idx;
                    for w in word.iter_mut() {
                        *w = (r % q) as Elem;
                        r /= q;
                    }
                    let member = word.iter().zip(&h).fold(0, |acc, (&c, &hv)| ctx.add(acc, ctx.mul(c, hv))) == 0;
                    let f = EmbeddingVec::embed_word(q, EmbeddingKind::Flanagan, &word).unwrap();
                    let valid = is_valid_spc_embedding(&ctx, &f, &h).unwrap();
                    let redundant = is_valid_spc_embedding_redundant(&ctx, &f, &h).unwrap();
                    checked += 1;
                    if valid != member || redundant != member {
                        mismatches += 1;
                    }
                }
            }
        }
    }
    verdict(mismatches == 0, format!("{checked} matrices, {mismatches} disagreements"))
}

fn c3_projection_oracles() -> Verdict {
    let mut rng = trial_rng(3, 0);
    let mut pp: f64 = 0.0;
    let mut leq: f64 = 0.0;
    let mut eq: f64 = 0.0;
    for i in 0..1000 {
        let d = 2 + i % 5;
        let v = rand_vec(&mut rng, d, -0.5, 1.5);
        let exact = project_hull(&parity_polytope_vertices(d), &v).unwrap().point;
        pp = pp.max(dist(&project_parity_polytope(&v).unwrap(), &exact));
    }
    for i in 0..1000 {
        let d = 1 + i % 8;
        let v = rand_vec(&mut rng, d, -0.5, 1.5);
        let a = project_hull(&simplex_vertices(SimplexKind::SumLeqOne, d), &v).unwrap().point;
        leq = leq.max(dist(&project_simplex(SimplexKind::SumLeqOne, &v), &a));
        let b = project_hull(&simplex_vertices(SimplexKind::SumEqOne, d), &v).unwrap().point;
        eq = eq.max(dist(&project_simplex(SimplexKind::SumEqOne, &v), &b));
    }
    let ctx = FieldCtx::new(2).unwrap();
    let mut inner: f64 = 0.0;
    let mut constraint: f64 = 0.0;
    for _ in 0..1000 {
        let h = rand_h(&mut rng, 4, 3);
        let v = rand_vec(&mut rng, 12, -0.5, 1.5);
        let verts = enumerate_spc(&ctx, &h).unwrap().points(EmbeddingKind::ConstantWeight);
        let exact = project_hull(&verts, &v).unwrap().point;
        let (fast, _) = project_relaxed_code_polytope(&ctx, &h, &v, &InnerParams::default());
        inner = inner.max(dist(&fast, &exact));
        let poly = RelaxedPolytope::new(&ctx, EmbeddingKind::ConstantWeight, &h).unwrap();
        constraint = constraint.max(dist(&poly.project(&v, DYKSTRA_TOL, DYKSTRA_CYCLES).unwrap(), &exact));
    }
    let pass = pp < 1e-6 && leq < 1e-6 && eq < 1e-6 && constraint < 1e-6 && inner < 1e-4;
    verdict(
        pass,
        format!("PP {pp:.1e}, simplex<= {leq:.1e}, simplex= {eq:.1e}, inner ADMM {inner:.1e}, constraint oracle {constraint:.1e}"),
    )
}

fn c4_closed_form() -> Verdict {
    let mut rng = trial_rng(4, 0);
    let mut worst: f64 = 0.0;
    for m in [2u32, 3] {
        for d_v in 2..=6 {
            let (a, b) = x_update_coeffs(m, d_v, 1.0);
            for _ in 0..100 {
                let t = rand_vec(&mut rng, (1 << m) - 1, -5.0, 5.0);
                let sum: f64 = t.iter().sum();
                let dense = dense_xupdate_oracle(m, d_v, 1.0, &t).unwrap();
                for (x, y) in t.iter().zip(&dense) {
                    worst = worst.max(((a - b) * x + b * sum - y).abs());
                }
            }
        }
    }
    // Exact rational check of the printed (m = 2, d_v = 3) constants.
    type Q = Ratio<i64>;
    let (q, d_v) = (4i64, 3i64);
    let r = Q::from_integer(q * d_v / 2 + 1);
    let s = Q::from_integer(q * d_v / 4);
    let b_formula = -r / ((r + s * Q::from_integer(q - 2)) * (r - s));
    let a_formula = Q::from_integer(1) / (r - s) + b_formula;
    let (a_printed, b_printed) = (Q::new(3, 26), Q::new(-7, 52));
    let formula_gives_printed = a_formula == a_printed && b_formula == b_printed;
    let phi = phi_matrix(2);
    let residual = |a: Q, b: Q| {
        let mut worst = Q::from_integer(0);
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = Q::from_integer(0);
                for (k, row) in phi.iter().enumerate() {
                    let lhs = Q::from_integer(d_v * row[i] as i64 + i64::from(i == k));
                    let inv = if k == j { a } else { b };
                    acc += lhs * inv;
                }
                let e = acc - Q::from_integer(i64::from(i == j));
                let e = if e < Q::from_integer(0) { -e } else { e };
                if e > worst {
                    worst = e;
                }
            }
        }
        worst
    };
    let printed_residual = residual(a_printed, b_printed);
    let (a_impl, b_impl) = x_update_coeffs(2, 3, 1.0);
    let exact_inverse = residual(Q::new(5, 26), Q::new(-3, 52));
    let impl_matches = (a_impl - 5.0 / 26.0).abs() < 1e-15 && (b_impl + 3.0 / 52.0).abs() < 1e-15;
    let pass = worst < 1e-10 && formula_gives_printed && printed_residual == Q::from_integer(0);
    verdict(
        pass,
        format!(
            "closed form vs dense {worst:.1e}; printed formula yields 3/26, -7/52: {formula_gives_printed}; \
             (3 Phi + I) M = I with 3/26, -7/52: max entry error {printed_residual} (not an inverse); \
             5/26, -3/52 error {exact_inverse}, used by the decoder: {impl_matches}"
        ),
    )
}

fn relaxed_projection(ctx: &FieldCtx, kind: EmbeddingKind, h: &[Elem], v: &[f64]) -> Vec<f64> {
    RelaxedPolytope::new(ctx, kind, h).unwrap().project(v, DYKSTRA_TOL, DYKSTRA_CYCLES).unwrap()
}

fn c5_rotation() -> Verdict {
    let mut rng = trial_rng(5, 0);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for m in [2u32, 3] {
        let ctx = FieldCtx::new(m).unwrap();
        let q = ctx.q();
        for i in 0..500 {
            let kind = if i % 2 == 0 { EmbeddingKind::Flanagan } else { EmbeddingKind::ConstantWeight };
            let d = rng.gen_range(3..=4);
            let h = rand_h(&mut rng, q, d);
            let len = kind.symbol_len(q) * d;
            let v = rand_vec(&mut rng, len, -0.5, 1.5);
            let direct = relaxed_projection(&ctx, kind, &h, &v);
            let rot = Rotation::new(h.iter().map(|&x| rotation_perm(&ctx, kind, x)).collect());
            let mut norm = vec![0.0; len];
            rot.to_normalized(&v, &mut norm);
            let p = relaxed_projection(&ctx, kind, &vec![1; d], &norm);
            let mut back = vec![0.0; len];
            rot.to_actual(&p, &mut back);
            worst = worst.max(dist(&direct, &back));
            count += 1;
        }
    }
    verdict(worst < 1e-6, format!("{count} vectors, max distance {worst:.1e}"))
}

fn c6_sigma() -> Verdict {
    let s = sigma_from_esn0(4.0, 0.6).unwrap();
    verdict((s - 0.5760).abs() <= 5e-5, format!("sigma = {s:.6}"))
}

fn c7_noiseless() -> Verdict {
    let mut lines = Vec::new();
    let mut pass = true;
    for bundled in BundledCode::ALL {
        let code = bundled.build();
        let ctx = code.field().unwrap();
        let policy = if bundled == BundledCode::Toy {
            CodewordPolicy::FromList(enumerate_codewords(&ctx, &code, 1 << 12).unwrap())
        } else {
            CodewordPolicy::AllZero
        };
        for kind in [DecoderKind::Lp, DecoderKind::Penalized] {
            let cfg = SimConfig {
                code_name: bundled.name().into(),
                snr_db: 15.0,
                decoder: DecoderSpec::defaults(kind),
                max_trials: 100,
                min_word_errors: None,
                seed: 7,
                codewords: policy.clone(),
            };
            let r = run_sweep(&ctx, &code, &[cfg], workers()).unwrap().remove(0);
            let ok = r.trials - r.word_errors;
            pass &= ok >= 99;
            lines.push(format!("{} {} {ok}/100", bundled.name(), kind.name()));
        }
    }
    verdict(pass, lines.join(", "))
}

fn tanner_point(snr: f64, decoder: DecoderSpec, max_trials: u64, min_errors: Option<u64>, seed: u64) -> SimConfig {
    SimConfig {
        code_name: BundledCode::Tanner1055Gf4.name().into(),
        snr_db: snr,
        decoder,
        max_trials,
        min_word_errors: min_errors,
        seed,
        codewords: CodewordPolicy::AllZero,
    }
}

fn c8_waterfall() -> Verdict {
    let code = BundledCode::Tanner1055Gf4.build();
    let ctx = code.field().unwrap();
    let lp = DecoderSpec::defaults(DecoderKind::Lp);
    let configs = [tanner_point(5.0, lp, 100_000, Some(300), 8), tanner_point(5.5, lp, 2_000_000, Some(300), 8)];
    let r = run_sweep(&ctx, &code, &configs, workers()).unwrap();
    let (lo, hi) = (&r[0], &r[1]);
    let enough = lo.word_errors >= 300 && hi.word_errors >= 300;
    let ratio_ok = hi.wer * 3.0 <= lo.wer;
    let iters = hi.iters_mean_correct.unwrap_or(f64::INFINITY);
    verdict(
        enough && ratio_ok && iters < 100.0,
        format!(
            "WER 5.0 dB {:.4e} ({}/{}), 5.5 dB {:.4e} ({}/{}), ratio {:.1}; mean iterations when correct at 5.5 dB {iters:.1}",
            lo.wer,
            lo.word_errors,
            lo.trials,
            hi.wer,
            hi.word_errors,
            hi.trials,
            lo.wer / hi.wer
        ),
    )
}

fn c9_penalized_gain() -> Verdict {
    let code = BundledCode::Tanner1055Gf4.build();
    let ctx = code.field().unwrap();
    let pen = run_sweep(
        &ctx,
        &code,
        &[tanner_point(4.7, DecoderSpec::defaults(DecoderKind::Penalized), 50_000, Some(100), 9)],
        workers(),
    )
    .unwrap()
    .remove(0);
    // Same seed and trial count: every trial sees the same noise.
    let lp = run_sweep(&ctx, &code, &[tanner_point(4.7, DecoderSpec::defaults(DecoderKind::Lp), pen.trials, None, 9)], workers())
        .unwrap()
        .remove(0);
    let pass = pen.word_errors >= 100 && lp.wer >= 2.0 * pen.wer;
    verdict(
        pass,
        format!(
            "{} matched trials: LP WER {:.4} ({} errors), penalized WER {:.4} ({} errors), ratio {:.2}, degraded inner projections {}",
            pen.trials,
            lp.wer,
            lp.word_errors,
            pen.wer,
            pen.word_errors,
            lp.wer / pen.wer,
            pen.degraded_inner_count
        ),
    )
}

fn c10_symmetry() -> Verdict {
    let code = toy_code();
    let ctx = code.field().unwrap();
    let modulation = Modulation::psk(4).unwrap();
    let words = enumerate_codewords(&ctx, &code, 1 << 12).unwrap();
    let sigma = sigma_from_esn0(3.0, code.rate(&ctx)).unwrap();
    let mut rng = trial_rng(10, 0);
    let tau = |y, b| modulation.tau(y, b).unwrap();
    // Swaps the roles of elements 1 and 2: a wrong isometry for those shifts.
    let broken = |y, b: Elem| modulation.tau(y, [0, 2, 1, 3][b as usize]).unwrap();
    let mut worst: f64 = 0.0;
    let mut all_pass = true;
    let mut controls = 0;
    let mut controls_caught = 0;
    for trial in 0..20 {
        let c = words.choose(&mut rng).unwrap();
        let ys = modulation.transmit(c, sigma, &mut trial_rng(10, trial + 1));
        let r = symmetry_harness(&ctx, &code, &modulation, c, &ys, sigma, PenalizedParams::default(), 50, tau).unwrap();
        worst = worst.max(r.max_discrepancy);
        all_pass &= r.passed;
        if c.iter().any(|&a| a == 1 || a == 2) {
            controls += 1;
            let bad = symmetry_harness(&ctx, &code, &modulation, c, &ys, sigma, PenalizedParams::default(), 50, broken).unwrap();
            controls_caught += usize::from(!bad.passed);
        }
    }
    let pass = all_pass && controls > 0 && controls_caught == controls;
    verdict(pass, format!("max discrepancy {worst:.1e}; negative control failed on {controls_caught}/{controls} codewords"))
}

fn c11_conjecture() -> Verdict {
    let r = validate_conjecture_gf4(3, 10_000, 11).unwrap();
    verdict(r.max_diff < 1e-4, format!("{} points, max {:.1e}, mean {:.1e}", r.trials, r.max_diff, r.mean_diff))
}

fn c12_embedding_equivalence() -> Verdict {
    let ctx = FieldCtx::new(2).unwrap();
    let mut rng = trial_rng(12, 0);
    let mut instances = 0;
    let mut worst: f64 = 0.0;
    let mut iters_f = 0usize;
    let mut iters_cw = 0usize;
    let mut integral_hits = 0;
    while instances < 50 {
        let h = rand_h(&mut rng, 4, 3);
        let gamma = rand_vec(&mut rng, 9, -1.0, 1.0);
        let enumeration = enumerate_spc(&ctx, &h).unwrap();
        let mut costs: Vec<(f64, usize)> = enumeration
            .flanagan
            .iter()
            .enumerate()
            .map(|(i, f)| (f.as_slice().iter().zip(&gamma).map(|(a, b)| a * b).sum(), i))
            .collect();
        costs.sort_by(|a, b| a.0.total_cmp(&b.0));
        if costs[1].0 - costs[0].0 < 0.1 {
            continue;
        }
        instances += 1;
        let code = NonbinaryCode::new(3, 4, vec![h.iter().enumerate().map(|(i, &v)| (i, v)).collect()]).unwrap();
        let params = LpParams { early_term: false, eps: 1e-10, t_max: 200_000, ..LpParams::default() };
        let mut flan = LpDecoder::new(&ctx, &code, params).unwrap();
        let of = flan.decode(&gamma).unwrap();
        let shift = rand_vec(&mut rng, 3, -1.0, 1.0);
        let gamma_cw: Vec<f64> = (0..3)
            .flat_map(|i| {
                let s = shift[i];
                std::iter::once(s).chain(gamma[3 * i..3 * i + 3].iter().map(move |g| g + s))
            })
            .collect();
        let mut cw = LpDecoder::new(&ctx, &code, LpParams { kind: EmbeddingKind::ConstantWeight, ..params }).unwrap();
        let oc = cw.decode(&gamma_cw).unwrap();
        iters_f += of.iterations;
        iters_cw += oc.iterations;
        let mapped = EmbeddingVec::from_vec(EmbeddingKind::Flanagan, 4, flan.x().to_vec()).unwrap().flanagan_to_cw().unwrap();
        worst = worst.max(dist(mapped.as_slice(), cw.x()));
        let best = &enumeration.constant_weight[costs[0].1];
        integral_hits += usize::from(dist(best.as_slice(), cw.x()) < 1e-4 && oc.status != DecodeStatus::FractionalAtTmax);
    }
    verdict(
        worst < 1e-4,
        format!(
            "{instances} instances, max distance {worst:.1e}; both equal the min-cost codeword in {integral_hits}; \
             mean iterations Flanagan {:.0}, constant weight {:.0} (recorded only)",
            iters_f as f64 / 50.0,
            iters_cw as f64 / 50.0
        ),
    )
}

fn csv_bytes(records: &[SimRecord]) -> Vec<u8> {
    let mut buf = Vec::new();
    write_csv(&mut buf, records).unwrap();
    buf
}

fn c13_determinism() -> Verdict {
    let mut pass = true;
    let mut notes = Vec::new();
    for bundled in [BundledCode::Toy, BundledCode::Tanner155Gf4] {
        let code = bundled.build();
        let ctx = code.field().unwrap();
        let policy = if bundled == BundledCode::Toy {
            CodewordPolicy::FromList(enumerate_codewords(&ctx, &code, 1 << 12).unwrap())
        } else {
            CodewordPolicy::AllZero
        };
        let configs: Vec<SimConfig> = [DecoderKind::Lp, DecoderKind::Penalized, DecoderKind::PenalizedFast]
            .into_iter()
            .flat_map(|kind| {
                let policy = policy.clone();
                [2.0, 3.5].into_iter().map(move |snr| SimConfig {
                    code_name: bundled.name().into(),
                    snr_db: snr,
                    decoder: DecoderSpec::defaults(kind),
                    max_trials: 600,
                    min_word_errors: Some(20),
                    seed: 13,
                    codewords: policy.clone(),
                })
            })
            .collect();
        let runs: Vec<Vec<u8>> =
            [1usize, 4, 1].iter().map(|&w| csv_bytes(&run_sweep(&ctx, &code, &configs, w).unwrap())).collect();
        let same = runs.windows(2).all(|p| p[0] == p[1]);
        pass &= same;
        notes.push(format!("{}: {} rows, identical across reruns and 1/4 workers: {same}", bundled.name(), configs.len()));
    }
    verdict(pass, notes.join("; "))
}

type Criterion = (u32, &'static str, fn() -> Verdict);

const CRITERIA: [Criterion; 13] = [
    (1, "field and combinatorics", c1_field),
    (2, "embedding bijection", c2_embedding_bijection),
    (3, "projection oracle equivalence", c3_projection_oracles),
    (4, "closed-form x-update", c4_closed_form),
    (5, "rotation lemmas", c5_rotation),
    (6, "sigma from Es/N0", c6_sigma),
    (7, "noiseless decoding", c7_noiseless),
    (8, "Tanner [1055,424] LP waterfall", c8_waterfall),
    (9, "penalized gain at 4.7 dB", c9_penalized_gain),
    (10, "iterate symmetry", c10_symmetry),
    (11, "GF(4) polytope conjecture evidence", c11_conjecture),
    (12, "embedding equivalence", c12_embedding_equivalence),
    (13, "sweep determinism", c13_determinism),
];

fn main() {
    let only: Option<Vec<u32>> =
        std::env::var("ACCEPTANCE_ONLY").ok().map(|s| s.split(',').filter_map(|t| t.trim().parse().ok()).collect());
    let mut unexpected = 0;
    for (id, name, run) in CRITERIA {
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let start = Instant::now();
        let v = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            verdict(false, format!("panicked: {}", msg.unwrap_or_default()))
        });
        let known = KNOWN_CONFLICTS.contains(&id);
        let tag = match (v.pass, known) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known conflict)",
            (false, false) => "FAIL",
        };
        if !v.pass && !known {
            unexpected += 1;
        }
        println!("criterion {id:>2} {tag}: {name}: {} [{:.1}s]", v.detail, start.elapsed().as_secs_f64());
    }
    if unexpected > 0 {
        eprintln!("{unexpected} criterion/criteria failed");
        std::process::exit(1);
    }
}
