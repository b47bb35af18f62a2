use nbldpc::code_model::{rotation_perm, toy_code};
use nbldpc::decoder_penalized::{project_relaxed_code_polytope, InnerParams};
use nbldpc::embedding::{
    inverse_relative_map, is_valid_spc_embedding, relative_map, EmbeddingKind, EmbeddingVec,
};
use nbldpc::gf2m::{Elem, FieldCtx};
use nbldpc::oracle::phi_matrix;
use nbldpc::projections::{dist, parity_polytope_distance, project_parity_polytope, project_simplex, Rotation, SimplexKind};
use nbldpc::sim::{enumerate_codewords, run_sweep, CodewordPolicy, DecoderKind, DecoderSpec, SimConfig};
use proptest::prelude::*;

fn vector(len: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-2.0f64..3.0, len)
}

fn kind() -> impl Strategy<Value = EmbeddingKind> {
    prop_oneof![Just(EmbeddingKind::Flanagan), Just(EmbeddingKind::ConstantWeight)]
}

fn in_parity_polytope(x: &[f64]) -> bool {
    parity_polytope_distance(x).unwrap() < 1e-9
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn field_axioms(m in 2u32..=6, a in 0u32..64, b in 0u32..64, c in 0u32..64) {
        let f = FieldCtx::new(m).unwrap();
        let q = f.q() as u32;
        let (a, b, c) = ((a % q) as Elem, (b % q) as Elem, (c % q) as Elem);
        prop_assert_eq!(f.mul(a, b), f.mul(b, a));
        prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
        prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
        prop_assert_eq!(f.add(a, a), 0);
        if a != 0 {
            prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
            prop_assert_eq!(f.mul(f.div(b, a).unwrap(), a), b);
        }
        prop_assert_eq!(f.from_bits(&f.bits(a)), a);
    }

    #[test]
    fn parity_projection_is_feasible_idempotent_and_nonexpansive(v in vector(2..=12), w in vector(2..=12)) {
        let p = project_parity_polytope(&v).unwrap();
        prop_assert!(in_parity_polytope(&p));
        prop_assert!(dist(&project_parity_polytope(&p).unwrap(), &p) < 1e-10);
        if v.len() == w.len() {
            let pw = project_parity_polytope(&w).unwrap();
            prop_assert!(dist(&p, &pw) <= dist(&v, &w) + 1e-10);
        }
    }

    #[test]
    fn parity_projection_is_optimal_against_vertices(v in vector(2..=8), mask in 0u32..256) {
        // For every even-weight vertex e, <v - p, e - p> <= 0.
        let d = v.len();
        let p = project_parity_polytope(&v).unwrap();
        let mut e: Vec<f64> = (0..d).map(|i| f64::from((mask >> i) & 1)).collect();
        if e.iter().sum::<f64>() as usize % 2 == 1 {
            e[0] = 1.0 - e[0];
        }
        let inner: f64 = (0..d).map(|i| (v[i] - p[i]) * (e[i] - p[i])).sum();
        prop_assert!(inner <= 1e-9);
    }

    #[test]
    fn simplex_projection_is_feasible_and_idempotent(v in vector(1..=16), eq in any::<bool>()) {
        let kind = if eq { SimplexKind::SumEqOne } else { SimplexKind::SumLeqOne };
        let p = project_simplex(kind, &v);
        let sum: f64 = p.iter().sum();
        prop_assert!(p.iter().all(|&x| x >= 0.0));
        if eq {
            prop_assert!((sum - 1.0).abs() < 1e-12);
        } else {
            prop_assert!(sum <= 1.0 + 1e-12);
        }
        prop_assert!(dist(&project_simplex(kind, &p), &p) < 1e-12);
    }

    #[test]
    fn rotation_round_trip_and_phi_invariance(m in 2u32..=4, h in 1u32..16, kind in kind(), seed in any::<u64>()) {
        let f = FieldCtx::new(m).unwrap();
        let h = (h % (f.q() as u32 - 1) + 1) as Elem;
        let perm = rotation_perm(&f, kind, h);
        let len = perm.len();
        let rot = Rotation::new(vec![perm.clone()]);
        let v: Vec<f64> = (0..len).map(|i| ((seed >> (i % 60)) & 0xff) as f64 / 255.0).collect();
        let (mut n, mut back) = (vec![0.0; len], vec![0.0; len]);
        rot.to_normalized(&v, &mut n);
        rot.to_actual(&n, &mut back);
        prop_assert_eq!(&back, &v);
        if kind == EmbeddingKind::Flanagan {
            // Permuting both rows and columns of Phi by the rotation leaves it unchanged.
            let phi = phi_matrix(m);
            for i in 0..len {
                for j in 0..len {
                    prop_assert_eq!(phi[perm[i]][perm[j]], phi[i][j]);
                }
            }
        }
    }

    #[test]
    fn embedding_round_trips(m in 2u32..=4, word in proptest::collection::vec(0u32..16, 1..8), shift in proptest::collection::vec(0u32..16, 8)) {
        let q = 1usize << m;
        let word: Vec<Elem> = word.iter().map(|&a| (a as usize % q) as Elem).collect();
        let shift: Vec<Elem> = shift[..word.len()].iter().map(|&a| (a as usize % q) as Elem).collect();
        for k in [EmbeddingKind::Flanagan, EmbeddingKind::ConstantWeight] {
            let e = EmbeddingVec::embed_word(q, k, &word).unwrap();
            prop_assert_eq!(e.decode_word().unwrap(), word.clone());
        }
        let e = EmbeddingVec::embed_word(q, EmbeddingKind::ConstantWeight, &word).unwrap();
        let r = relative_map(&e, &shift).unwrap();
        let sum: Vec<Elem> = word.iter().zip(&shift).map(|(&a, &b)| a ^ b).collect();
        prop_assert_eq!(r.decode_word().unwrap(), sum);
        prop_assert_eq!(inverse_relative_map(&r, &shift).unwrap().into_vec(), e.into_vec());
        let f = EmbeddingVec::embed_word(q, EmbeddingKind::Flanagan, &word).unwrap();
        let cw = f.flanagan_to_cw().unwrap();
        prop_assert_eq!(cw.as_slice().to_vec(), EmbeddingVec::embed_word(q, EmbeddingKind::ConstantWeight, &word).unwrap().into_vec());
        prop_assert_eq!(cw.cw_to_flanagan().unwrap().into_vec(), f.as_slice().to_vec());
    }

    #[test]
    fn spc_validity_matches_syndrome(m in 2u32..=3, h in proptest::collection::vec(1u32..8, 2..5), word in proptest::collection::vec(0u32..8, 5)) {
        let ctx = FieldCtx::new(m).unwrap();
        let q = ctx.q() as u32;
        let h: Vec<Elem> = h.iter().map(|&x| (x % (q - 1) + 1) as Elem).collect();
        let word: Vec<Elem> = word[..h.len()].iter().map(|&x| (x % q) as Elem).collect();
        let syndrome = word.iter().zip(&h).fold(0, |acc, (&c, &g)| ctx.add(acc, ctx.mul(c, g)));
        let f = EmbeddingVec::embed_word(ctx.q(), EmbeddingKind::Flanagan, &word).unwrap();
        prop_assert_eq!(is_valid_spc_embedding(&ctx, &f, &h).unwrap(), syndrome == 0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn inner_projection_fixes_embedded_codewords(h in proptest::collection::vec(1u32..4, 3), a in 0u32..4, b in 0u32..4) {
        // Any SPC codeword's embedding lies in the polytope, so it projects to itself.
        let ctx = FieldCtx::new(2).unwrap();
        let h: Vec<Elem> = h.iter().map(|&x| x as Elem).collect();
        let (a, b) = (a as Elem, b as Elem);
        let partial = ctx.add(ctx.mul(a, h[0]), ctx.mul(b, h[1]));
        let c = ctx.div(partial, h[2]).unwrap();
        let v = EmbeddingVec::embed_word(4, EmbeddingKind::ConstantWeight, &[a, b, c]).unwrap();
        let (p, _) = project_relaxed_code_polytope(&ctx, &h, v.as_slice(), &InnerParams::default());
        prop_assert!(dist(&p, v.as_slice()) < 1e-4);
    }

    #[test]
    fn sweep_is_reproducible(seed in any::<u64>(), penalized in any::<bool>()) {
        let code = toy_code();
        let ctx = code.field().unwrap();
        let words = enumerate_codewords(&ctx, &code, 1 << 12).unwrap();
        let kind = if penalized { DecoderKind::Penalized } else { DecoderKind::Lp };
        let cfg = SimConfig {
            code_name: "toy".into(),
            snr_db: 2.0,
            decoder: DecoderSpec::defaults(kind),
            max_trials: 40,
            min_word_errors: None,
            seed,
            codewords: CodewordPolicy::FromList(words),
        };
        let a = run_sweep(&ctx, &code, std::slice::from_ref(&cfg), 1).unwrap();
        let b = run_sweep(&ctx, &code, std::slice::from_ref(&cfg), 2).unwrap();
        prop_assert_eq!(a[0].word_errors, b[0].word_errors);
        prop_assert_eq!(a[0].symbol_errors, b[0].symbol_errors);
        prop_assert_eq!(a[0].iters_mean, b[0].iters_mean);
    }
}
