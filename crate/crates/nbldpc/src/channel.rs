//! PSK modulation over an AWGN channel, log-likelihood vectors for both
//! embeddings, and the per-trial random streams.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::gf2m::Elem;

/// Log-likelihood entries are clipped to this magnitude before decoding.
pub const LLR_CLIP: f64 = 50.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error("code rate {0} is outside (0, 1]")]
    Rate(f64),
    #[error("constellation point {index} has norm {norm}, expected 1")]
    Energy { index: usize, norm: f64 },
    #[error("unsupported field size {0} for PSK")]
    FieldSize(usize),
    #[error("PSK labels must be a permutation of 0..{q}, got {labels:?}")]
    Labels { q: usize, labels: Vec<usize> },
}

/// Noise standard deviation per real dimension for unit-energy symbols:
/// `sigma^2 = 1 / (2 gamma R)` with `gamma = 10^(dB / 10)`.
pub fn sigma_from_esn0(es_n0_db: f64, rate: f64) -> Result<f64, ChannelError> {
    if !(rate > 0.0 && rate <= 1.0) {
        return Err(ChannelError::Rate(rate));
    }
    let gamma = 10f64.powf(es_n0_db / 10.0);
    Ok((1.0 / (2.0 * gamma * rate)).sqrt())
}

/// A 2-D constellation labelled by field elements.
#[derive(Debug, Clone, PartialEq)]
pub struct Modulation {
    points: Vec<[f64; 2]>,
    /// `tau[b]` is the orthogonal map sending point `a` to point `a ^ b`,
    /// present when every shift is realized by a plane isometry.
    tau: Option<Vec<[[f64; 2]; 2]>>,
}

impl Modulation {
    /// Natural q-PSK: element `d` sits at angle `2 pi d / q`. For q = 4 this is
    /// `0 -> (1,0), 1 -> (0,1), 2 -> (-1,0), 3 -> (0,-1)`.
    pub fn psk(q: usize) -> Result<Self, ChannelError> {
        if !(2..=256).contains(&q) || !q.is_power_of_two() {
            return Err(ChannelError::FieldSize(q));
        }
        let points = (0..q)
            .map(|d| {
                let t = 2.0 * std::f64::consts::PI * d as f64 / q as f64;
                // Snap to exact values on the axes so QPSK is exact.
                let snap = |x: f64| {
                    if x.abs() < 1e-15 {
                        0.0
                    } else if (x.abs() - 1.0).abs() < 1e-15 {
                        x.signum()
                    } else {
                        x
                    }
                };
                [snap(t.cos()), snap(t.sin())]
            })
            .collect();
        Self::custom(points)
    }

    /// q-PSK with element `a` at angle `2 pi labels[a] / q`.
    pub fn labelled_psk(labels: &[usize]) -> Result<Self, ChannelError> {
        let q = labels.len();
        let natural = Self::psk(q)?;
        let mut seen = vec![false; q];
        for &l in labels {
            if l >= q || std::mem::replace(&mut seen[l], true) {
                return Err(ChannelError::Labels { q, labels: labels.to_vec() });
            }
        }
        Self::custom(labels.iter().map(|&l| natural.points[l]).collect())
    }

    /// User-supplied labelling; points must have unit norm.
    pub fn custom(points: Vec<[f64; 2]>) -> Result<Self, ChannelError> {
        if points.len() < 2 || !points.len().is_power_of_two() {
            return Err(ChannelError::FieldSize(points.len()));
        }
        for (index, p) in points.iter().enumerate() {
            let norm = (p[0] * p[0] + p[1] * p[1]).sqrt();
            if (norm - 1.0).abs() > 1e-12 {
                return Err(ChannelError::Energy { index, norm });
            }
        }
        let tau = (0..points.len()).map(|b| shift_isometry(&points, b)).collect::<Option<Vec<_>>>();
        Ok(Self { points, tau })
    }

    pub fn q(&self) -> usize {
        self.points.len()
    }

    pub fn point(&self, a: Elem) -> [f64; 2] {
        self.points[a as usize]
    }

    /// Whether every XOR shift of labels is a plane isometry of the
    /// constellation (the channel symmetry the codeword-independence
    /// argument needs).
    pub fn is_symmetric(&self) -> bool {
        self.tau.is_some()
    }

    /// Applies the isometry `tau_b`, which satisfies
    /// `p(y | a) = p(tau_b(y) | a - b)`. `None` for non-symmetric labellings.
    pub fn tau(&self, y: [f64; 2], b: Elem) -> Option<[f64; 2]> {
        let m = self.tau.as_ref()?[b as usize];
        Some([m[0][0] * y[0] + m[0][1] * y[1], m[1][0] * y[0] + m[1][1] * y[1]])
    }

    /// Noisy channel outputs for a word.
    pub fn transmit(&self, word: &[Elem], sigma: f64, rng: &mut impl rand::Rng) -> Vec<[f64; 2]> {
        word.iter()
            .map(|&a| {
                let p = self.point(a);
                let n0: f64 = StandardNormal.sample(rng);
                let n1: f64 = StandardNormal.sample(rng);
                [p[0] + sigma * n0, p[1] + sigma * n1]
            })
            .collect()
    }

    /// Flanagan LLRs for one output: `(|y - s_d|^2 - |y - s_0|^2) / (2 sigma^2)`
    /// for `d = 1..q`.
    pub fn llr_flanagan(&self, y: [f64; 2], sigma: f64, out: &mut [f64]) {
        let s2 = 2.0 * sigma * sigma;
        let d0 = sq_dist(y, self.points[0]);
        for (d, o) in out.iter_mut().enumerate() {
            *o = (sq_dist(y, self.points[d + 1]) - d0) / s2;
        }
    }

    /// Constant-weight LLRs for one output: `|y - s_d|^2 / (2 sigma^2)`,
    /// the negative log-density up to a shared constant.
    pub fn llr_cw(&self, y: [f64; 2], sigma: f64, out: &mut [f64]) {
        let s2 = 2.0 * sigma * sigma;
        for (d, o) in out.iter_mut().enumerate() {
            *o = sq_dist(y, self.points[d]) / s2;
        }
    }

    /// LLR vector for a whole word, flat and symbol-major.
    pub fn llr_word(&self, ys: &[[f64; 2]], sigma: f64, kind: crate::embedding::EmbeddingKind) -> Vec<f64> {
        let sl = kind.symbol_len(self.q());
        let mut out = vec![0.0; sl * ys.len()];
        for (y, chunk) in ys.iter().zip(out.chunks_mut(sl)) {
            match kind {
                crate::embedding::EmbeddingKind::Flanagan => self.llr_flanagan(*y, sigma, chunk),
                crate::embedding::EmbeddingKind::ConstantWeight => self.llr_cw(*y, sigma, chunk),
            }
        }
        out
    }

    /// Gaussian density of `y` given label `a`.
    pub fn density(&self, y: [f64; 2], a: Elem, sigma: f64) -> f64 {
        let s2 = sigma * sigma;
        (-sq_dist(y, self.point(a)) / (2.0 * s2)).exp() / (2.0 * std::f64::consts::PI * s2)
    }
}

fn sq_dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    dx * dx + dy * dy
}

/// Orthogonal 2x2 map sending every point `a` to point `a ^ b`, if one exists.
fn shift_isometry(points: &[[f64; 2]], b: usize) -> Option<[[f64; 2]; 2]> {
    let maps_all = |m: &[[f64; 2]; 2]| {
        points.iter().enumerate().all(|(a, s)| {
            let img = [m[0][0] * s[0] + m[0][1] * s[1], m[1][0] * s[0] + m[1][1] * s[1]];
            sq_dist(img, points[a ^ b]) < 1e-20
        })
    };
    let p = points[0];
    let Some(&r) = points.iter().find(|r| (p[0] * r[1] - p[1] * r[0]).abs() > 1e-9) else {
        // Collinear constellation: only +-identity can work.
        return [[[1.0, 0.0], [0.0, 1.0]], [[-1.0, 0.0], [0.0, -1.0]]].into_iter().find(|m| maps_all(m));
    };
    // Solve A [p, r] = [p', r'] using two independent points p, r.
    let ri = points.iter().position(|x| x == &r)?;
    let (pp, rr) = (points[b], points[ri ^ b]);
    let det = p[0] * r[1] - p[1] * r[0];
    // Inverse of [[p0, r0], [p1, r1]].
    let inv = [[r[1] / det, -r[0] / det], [-p[1] / det, p[0] / det]];
    let m = [
        [pp[0] * inv[0][0] + rr[0] * inv[1][0], pp[0] * inv[0][1] + rr[0] * inv[1][1]],
        [pp[1] * inv[0][0] + rr[1] * inv[1][0], pp[1] * inv[0][1] + rr[1] * inv[1][1]],
    ];
    let snap = |x: f64| if (x - x.round()).abs() < 1e-12 { x.round() } else { x };
    let m = [[snap(m[0][0]), snap(m[0][1])], [snap(m[1][0]), snap(m[1][1])]];
    let ok = maps_all(&m);
    let orth = (m[0][0] * m[0][0] + m[1][0] * m[1][0] - 1.0).abs() < 1e-12
        && (m[0][1] * m[0][1] + m[1][1] * m[1][1] - 1.0).abs() < 1e-12
        && (m[0][0] * m[0][1] + m[1][0] * m[1][1]).abs() < 1e-12;
    (ok && orth).then_some(m)
}

/// Random stream for one trial: the same `(seed, trial)` pair always yields
/// the same noise, independent of SNR, grid point or worker.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::EmbeddingKind;
    use approx::assert_abs_diff_eq;
    use rand::Rng;

    #[test]
    fn sigma_examples() {
        assert_abs_diff_eq!(sigma_from_esn0(4.0, 0.6).unwrap(), 0.5760, epsilon = 5e-5);
        assert_abs_diff_eq!(sigma_from_esn0(0.0, 0.5).unwrap(), 1.0, epsilon = 1e-15);
        let r = 424.0 / 1055.0;
        let want = (1.0 / (2.0 * 10f64.powf(0.5) * r)).sqrt();
        assert_abs_diff_eq!(sigma_from_esn0(5.0, r).unwrap(), want, epsilon = 1e-15);
        assert!(sigma_from_esn0(5.0, 0.0).is_err());
        assert!(sigma_from_esn0(5.0, 1.5).is_err());
    }

    #[test]
    fn qpsk_map_and_tau() {
        let m = Modulation::psk(4).unwrap();
        assert_eq!(m.point(0), [1.0, 0.0]);
        assert_eq!(m.point(1), [0.0, 1.0]);
        assert_eq!(m.point(2), [-1.0, 0.0]);
        assert_eq!(m.point(3), [0.0, -1.0]);
        assert!(m.is_symmetric());
        let y = [0.3, -0.7];
        assert_eq!(m.tau(y, 0), Some(y));
        assert_eq!(m.tau(y, 1), Some([-0.7, 0.3]));
        assert_eq!(m.tau(y, 2), Some([-0.3, 0.7]));
        assert_eq!(m.tau(y, 3), Some([0.7, -0.3]));
        for b in 0..4u8 {
            for a in 0..4u8 {
                assert_eq!(m.tau(m.point(a), b), Some(m.point(a ^ b)));
            }
        }
    }

    #[test]
    fn density_symmetry() {
        let m = Modulation::psk(4).unwrap();
        let mut rng = trial_rng(7, 0);
        for _ in 0..200 {
            let y = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
            for a in 0..4u8 {
                for b in 0..4u8 {
                    let lhs = m.density(y, a, 0.7);
                    let rhs = m.density(m.tau(y, b).unwrap(), a ^ b, 0.7);
                    assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn bpsk_is_symmetric() {
        let m = Modulation::psk(2).unwrap();
        assert_eq!(m.point(1), [-1.0, 0.0]);
        assert_eq!(m.tau([0.25, 0.5], 1), Some([-0.25, -0.5]));
    }

    #[test]
    fn natural_8psk_is_not_xor_symmetric() {
        let m = Modulation::psk(8).unwrap();
        assert!(!m.is_symmetric());
        assert_eq!(m.tau([0.0, 0.0], 1), None);
        for a in 0..8u8 {
            let p = m.point(a);
            assert_abs_diff_eq!(p[0].hypot(p[1]), 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn labelled_psk_permutes_points() {
        let gray = Modulation::labelled_psk(&[0, 1, 3, 2]).unwrap();
        assert_eq!(gray.point(2), [0.0, -1.0]);
        assert_eq!(gray.point(3), [-1.0, 0.0]);
        assert!(gray.is_symmetric());
        assert!(matches!(Modulation::labelled_psk(&[0, 1, 1, 2]), Err(ChannelError::Labels { .. })));
        assert!(matches!(Modulation::labelled_psk(&[0, 1, 2, 4]), Err(ChannelError::Labels { .. })));
    }

    #[test]
    fn llr_examples() {
        let m = Modulation::psk(4).unwrap();
        let mut fl = [0.0; 3];
        m.llr_flanagan([1.0, 0.0], 0.5, &mut fl);
        assert!(fl.iter().all(|&x| x > 0.0));
        m.llr_flanagan([0.0, 0.0], 0.5, &mut fl);
        assert_eq!(fl, [0.0; 3]);
        let mut cw = [0.0; 4];
        m.llr_cw([0.0, 0.0], 0.5, &mut cw);
        assert!(cw.iter().all(|&x| x == cw[0]));
        // CW minus its element-0 entry reproduces the Flanagan vector.
        let y = [0.4, -1.1];
        m.llr_flanagan(y, 0.8, &mut fl);
        m.llr_cw(y, 0.8, &mut cw);
        for d in 0..3 {
            assert_abs_diff_eq!(cw[d + 1] - cw[0], fl[d], epsilon = 1e-12);
        }
        let word = m.llr_word(&[y, y], 0.8, EmbeddingKind::ConstantWeight);
        assert_eq!(&word[4..], &cw);
    }

    #[test]
    fn cw_argmin_is_map() {
        let m = Modulation::psk(8).unwrap();
        let mut rng = trial_rng(3, 1);
        let mut cw = [0.0; 8];
        for _ in 0..500 {
            let y = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
            m.llr_cw(y, 0.6, &mut cw);
            let argmin = (0..8).min_by(|&a, &b| cw[a].total_cmp(&cw[b])).unwrap();
            let argmax = (0..8u8).max_by(|&a, &b| m.density(y, a, 0.6).total_cmp(&m.density(y, b, 0.6))).unwrap();
            assert_eq!(argmin, argmax as usize);
        }
    }

    #[test]
    fn transmit_statistics() {
        let m = Modulation::psk(4).unwrap();
        let word = vec![0u8; 50_000];
        assert_eq!(m.transmit(&word[..3], 0.0, &mut trial_rng(1, 0)), vec![[1.0, 0.0]; 3]);
        let a = m.transmit(&word, 0.8, &mut trial_rng(11, 5));
        let b = m.transmit(&word, 0.8, &mut trial_rng(11, 5));
        assert_eq!(a, b);
        let var: f64 = a.iter().map(|y| (y[0] - 1.0).powi(2) + y[1].powi(2)).sum::<f64>() / (2.0 * a.len() as f64);
        assert!((var / 0.64 - 1.0).abs() < 0.02, "variance {var}");
        let c = m.transmit(&word[..10], 0.8, &mut trial_rng(11, 6));
        assert_ne!(&a[..10], &c[..]);
    }
}
