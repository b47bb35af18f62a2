//! Quick oracle cross-checks; each prints one PASS/FAIL line.

use nbldpc::channel::{trial_rng, Modulation};
use nbldpc::code_model::{rotation_perm, toy_code};
use nbldpc::decoder_admm_lp::x_update_coeffs;
use nbldpc::decoder_penalized::{project_relaxed_code_polytope, symmetry_harness, InnerParams, PenalizedParams};
use nbldpc::embedding::EmbeddingKind;
use nbldpc::gf2m::FieldCtx;
use nbldpc::oracle::{
    dense_xupdate_oracle, enumerate_spc, parity_polytope_vertices, project_hull, simplex_vertices, RelaxedPolytope,
    DYKSTRA_CYCLES, DYKSTRA_TOL,
};
use nbldpc::projections::{dist, project_parity_polytope, project_simplex, Rotation, SimplexKind};
use nbldpc::sim::{DecoderKind, DecoderSpec};
use rand::Rng;

use crate::error::CliError;

type Check = (&'static str, fn() -> Result<(), String>);

fn field_products() -> Result<(), String> {
    let f = FieldCtx::new(3).map_err(|e| e.to_string())?;
    match f.mul(4, 6) {
        5 => Ok(()),
        other => Err(format!("4 * 6 = {other} in GF(8)")),
    }
}

fn x_update() -> Result<(), String> {
    let mut rng = trial_rng(1, 0);
    let mut worst: f64 = 0.0;
    for m in [2u32, 3] {
        for d_v in 2..=6 {
            let (a, b) = x_update_coeffs(m, d_v, 1.0);
            for _ in 0..20 {
                let t: Vec<f64> = (0..(1usize << m) - 1).map(|_| rng.gen_range(-3.0..3.0)).collect();
                let sum: f64 = t.iter().sum();
                let fast: Vec<f64> = t.iter().map(|x| (a - b) * x + b * sum).collect();
                let dense = dense_xupdate_oracle(m, d_v, 1.0, &t).map_err(|e| e.to_string())?;
                worst = worst.max(fast.iter().zip(&dense).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max));
            }
        }
    }
    if worst < 1e-10 {
        Ok(())
    } else {
        Err(format!("max difference {worst:e}"))
    }
}

fn projections_vs_hull() -> Result<(), String> {
    let mut rng = trial_rng(2, 0);
    let mut worst: f64 = 0.0;
    for d in 2..=5 {
        let pp = parity_polytope_vertices(d);
        let leq = simplex_vertices(SimplexKind::SumLeqOne, d);
        let eq = simplex_vertices(SimplexKind::SumEqOne, d);
        for _ in 0..30 {
            let v: Vec<f64> = (0..d).map(|_| rng.gen_range(-0.5..1.5)).collect();
            let hull = |pts: &[Vec<f64>]| project_hull(pts, &v).map(|h| h.point).map_err(|e| e.to_string());
            let fast = project_parity_polytope(&v).map_err(|e| e.to_string())?;
            worst = worst.max(dist(&fast, &hull(&pp)?));
            worst = worst.max(dist(&project_simplex(SimplexKind::SumLeqOne, &v), &hull(&leq)?));
            worst = worst.max(dist(&project_simplex(SimplexKind::SumEqOne, &v), &hull(&eq)?));
        }
    }
    if worst < 1e-6 {
        Ok(())
    } else {
        Err(format!("max distance {worst:e}"))
    }
}

fn inner_projection() -> Result<(), String> {
    let ctx = FieldCtx::new(2).map_err(|e| e.to_string())?;
    let mut rng = trial_rng(3, 0);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let h: Vec<u8> = (0..3).map(|_| rng.gen_range(1..4)).collect();
        let verts = enumerate_spc(&ctx, &h).map_err(|e| e.to_string())?.points(EmbeddingKind::ConstantWeight);
        let v: Vec<f64> = (0..12).map(|_| rng.gen_range(-0.5..1.5)).collect();
        let exact = project_hull(&verts, &v).map_err(|e| e.to_string())?.point;
        let (fast, _) = project_relaxed_code_polytope(&ctx, &h, &v, &InnerParams::default());
        worst = worst.max(dist(&exact, &fast));
    }
    if worst < 1e-4 {
        Ok(())
    } else {
        Err(format!("max distance {worst:e}"))
    }
}

fn rotation() -> Result<(), String> {
    let ctx = FieldCtx::new(3).map_err(|e| e.to_string())?;
    let mut rng = trial_rng(4, 0);
    let mut worst: f64 = 0.0;
    for kind in [EmbeddingKind::Flanagan, EmbeddingKind::ConstantWeight] {
        for _ in 0..5 {
            let h: Vec<u8> = (0..3).map(|_| rng.gen_range(1..8)).collect();
            let len = kind.symbol_len(8) * 3;
            let v: Vec<f64> = (0..len).map(|_| rng.gen_range(-0.5..1.5)).collect();
            let err = |e: nbldpc::oracle::OracleError| e.to_string();
            let direct = RelaxedPolytope::new(&ctx, kind, &h).map_err(err)?.project(&v, DYKSTRA_TOL, DYKSTRA_CYCLES).map_err(err)?;
            let rot = Rotation::new(h.iter().map(|&x| rotation_perm(&ctx, kind, x)).collect());
            let mut norm = vec![0.0; len];
            rot.to_normalized(&v, &mut norm);
            let ones = RelaxedPolytope::new(&ctx, kind, &[1, 1, 1]).map_err(err)?;
            let p = ones.project(&norm, DYKSTRA_TOL, DYKSTRA_CYCLES).map_err(err)?;
            let mut back = vec![0.0; len];
            rot.to_actual(&p, &mut back);
            worst = worst.max(dist(&direct, &back));
        }
    }
    if worst < 1e-6 {
        Ok(())
    } else {
        Err(format!("max distance {worst:e}"))
    }
}

fn symmetry() -> Result<(), String> {
    let code = toy_code();
    let ctx = code.field().map_err(|e| e.to_string())?;
    let modulation = Modulation::psk(4).map_err(|e| e.to_string())?;
    let words = nbldpc::sim::enumerate_codewords(&ctx, &code, 1 << 12).map_err(|e| e.to_string())?;
    let c = words.last().ok_or("toy code has no codewords")?;
    let sigma = 0.8;
    let ys = modulation.transmit(c, sigma, &mut trial_rng(5, 0));
    let tau = |y, b| modulation.tau(y, b).expect("QPSK is symmetric");
    let r = symmetry_harness(&ctx, &code, &modulation, c, &ys, sigma, PenalizedParams::default(), 50, tau)
        .map_err(|e| e.to_string())?;
    if r.passed {
        Ok(())
    } else {
        Err(format!("max discrepancy {:e}", r.max_discrepancy))
    }
}

fn noiseless_decoding() -> Result<(), String> {
    let code = toy_code();
    let ctx = code.field().map_err(|e| e.to_string())?;
    let modulation = Modulation::psk(4).map_err(|e| e.to_string())?;
    let words = nbldpc::sim::enumerate_codewords(&ctx, &code, 1 << 12).map_err(|e| e.to_string())?;
    for kind in [DecoderKind::Lp, DecoderKind::Penalized, DecoderKind::PenalizedFast] {
        let spec = DecoderSpec::defaults(kind);
        let mut dec = spec.build(&ctx, &code).map_err(|e| e.to_string())?;
        for w in &words {
            let ys: Vec<[f64; 2]> = w.iter().map(|&a| modulation.point(a)).collect();
            let out = dec.decode(&modulation.llr_word(&ys, 0.3, spec.llr_kind())).map_err(|e| e.to_string())?;
            if &out.word != w || !out.status.is_codeword() {
                return Err(format!("{} decoded {:?} as {:?}", kind.name(), w, out.word));
            }
        }
    }
    Ok(())
}

const CHECKS: [Check; 7] = [
    ("field products", field_products),
    ("closed-form x-update", x_update),
    ("projections vs hull", projections_vs_hull),
    ("inner projection vs hull", inner_projection),
    ("rotation", rotation),
    ("iterate symmetry", symmetry),
    ("noiseless decoding", noiseless_decoding),
];

pub fn run() -> Result<(), CliError> {
    let mut failed = 0;
    for (name, check) in CHECKS {
        match check() {
            Ok(()) => println!("PASS {name}"),
            Err(msg) => {
                failed += 1;
                println!("FAIL {name}: {msg}");
            }
        }
    }
    if failed == 0 {
        Ok(())
    } else {
        Err(CliError::SelftestFailed(failed))
    }
}
