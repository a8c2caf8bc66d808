//! Partner-selection kernel: the probability law for choosing an existing
//! grooming partner as a function of normalized relationship strength `d`
//! and the shape parameter `s`.
//!
//! The kernel is a beta density reparameterized by a single shape value:
//! `alpha = 1 + s, beta = 1` for `s >= 0` and `alpha = 1, beta = 1 - s` for
//! `s < 0`. The beta-function normalization constant cancels when selection
//! probabilities are formed, leaving the closed forms `d^s` (s >= 0) and
//! `(1 - d)^(-s)` (s < 0).
//!
//! Selection probabilities are computed in a factored form: with
//! `d_j = w_j / max(w)`, the common factor `max(w)^(-|s|)` cancels in the
//! normalization, so weights reduce to integer-argument powers `w_j^s`
//! (s >= 0) or `(max - w_j)^(-s)` (s < 0). This keeps the arithmetic exact
//! for the proportional case `s = 1` and avoids underflow for strongly
//! peaked kernels.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Above this |s| the factored weights are evaluated in log space.
const LOG_SPACE_THRESHOLD: f64 = 30.0;

#[derive(Debug, Error, PartialEq)]
pub enum KernelError {
    /// Normalized strength outside [0, 1].
    #[error("normalized strength d must lie in [0, 1] (got {0})")]
    StrengthOutOfRange(f64),
    /// Shape parameter is NaN or infinite.
    #[error("kernel shape s must be finite (got {0})")]
    NonFiniteShape(f64),
    /// No entry of the row is positive, so there is no partner to select.
    #[error("no existing partner to select from (all relationship counts are zero)")]
    NoCandidates,
}

/// Beta-distribution parameters derived from the shape value `s`.
///
/// Exactly one of `alpha > 1`, `beta > 1` can hold; `s = 0` gives `(1, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    alpha: f64,
    beta: f64,
}

impl KernelParams {
    pub fn from_shape(s: f64) -> Result<Self, KernelError> {
        if !s.is_finite() {
            return Err(KernelError::NonFiniteShape(s));
        }
        if s >= 0.0 {
            Ok(Self { alpha: 1.0 + s, beta: 1.0 })
        } else {
            Ok(Self { alpha: 1.0, beta: 1.0 - s })
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Recovers the shape value: `(alpha - 1) - (beta - 1)`.
    pub fn shape(&self) -> f64 {
        (self.alpha - 1.0) - (self.beta - 1.0)
    }
}

/// Unnormalized kernel weight at normalized strength `d`: `d^s` for
/// `s >= 0`, `(1 - d)^(-s)` for `s < 0`.
///
/// Equals the beta density `b(d; alpha, beta)` up to the constant factor
/// `1 / B(alpha, beta)`, which cancels in the selection normalization.
pub fn selection_weight(d: f64, s: f64) -> Result<f64, KernelError> {
    if !s.is_finite() {
        return Err(KernelError::NonFiniteShape(s));
    }
    if !(0.0..=1.0).contains(&d) {
        return Err(KernelError::StrengthOutOfRange(d));
    }
    if s >= 0.0 {
        Ok(d.powf(s))
    } else {
        Ok((1.0 - d).powf(-s))
    }
}

/// Cached integer-argument power table for one shape value.
///
/// Entry `t` holds `t^|s|` in direct mode or `|s| * ln(t)` in log mode
/// (`t = 0` maps to weight zero / negative infinity). With `|s|` capped at
/// [`LOG_SPACE_THRESHOLD`] in direct mode, `t^|s|` cannot overflow for any
/// `u32` argument.
pub(crate) struct KernelTable {
    abs_s: f64,
    negative: bool,
    log_space: bool,
    table: Vec<f64>,
}

impl KernelTable {
    pub(crate) fn new(s: f64) -> Self {
        debug_assert!(s.is_finite());
        Self {
            abs_s: s.abs(),
            negative: s < 0.0,
            log_space: s.abs() > LOG_SPACE_THRESHOLD,
            table: Vec::new(),
        }
    }

    fn grow(&mut self, upto: u32) {
        let upto = upto as usize;
        while self.table.len() <= upto {
            let t = self.table.len() as f64;
            let entry = if self.log_space {
                if t == 0.0 { f64::NEG_INFINITY } else { self.abs_s * t.ln() }
            } else {
                t.powf(self.abs_s)
            };
            self.table.push(entry);
        }
    }

    /// Weight argument for a candidate with count `w` in a row whose
    /// maximum count is `max_w`.
    #[inline]
    fn arg(&self, w: u32, max_w: u32) -> u32 {
        if self.negative { max_w - w } else { w }
    }

    /// Fills `out` with the candidates' unnormalized weights and returns
    /// their sum. A zero sum means every candidate has weight zero (all
    /// counts equal under a negative shape) and the caller must fall back
    /// to a uniform choice.
    pub(crate) fn candidate_weights(
        &mut self,
        w_row: &[u32],
        candidates: &[usize],
        max_w: u32,
        out: &mut Vec<f64>,
    ) -> f64 {
        self.block_weights(w_row, candidates, 0, max_w, out).total_partner
    }

    /// Weights for a full-row selection: the partners' individual weights
    /// (written to `out`, summed in `total_partner`) plus the shared weight
    /// of one zero-strength column in `stranger_unit`. Everything carries
    /// the same implicit `max_w^(-|s|)` factor, so the values are directly
    /// comparable. Requires `max_w >= 1`.
    pub(crate) fn block_weights(
        &mut self,
        w_row: &[u32],
        partners: &[usize],
        n_strangers: usize,
        max_w: u32,
        out: &mut Vec<f64>,
    ) -> BlockWeights {
        debug_assert!(max_w >= 1);
        self.grow(max_w);
        out.clear();
        let zero_arg = self.arg(0, max_w) as usize;
        if self.log_space {
            let stranger_log =
                if n_strangers > 0 { self.table[zero_arg] } else { f64::NEG_INFINITY };
            let mut log_max = stranger_log;
            for &j in partners {
                let l = self.table[self.arg(w_row[j], max_w) as usize];
                out.push(l);
                if l > log_max {
                    log_max = l;
                }
            }
            if log_max == f64::NEG_INFINITY {
                for v in out.iter_mut() {
                    *v = 0.0;
                }
                return BlockWeights { total_partner: 0.0, stranger_unit: 0.0 };
            }
            let mut total_partner = 0.0;
            for v in out.iter_mut() {
                *v = (*v - log_max).exp();
                total_partner += *v;
            }
            let stranger_unit = if stranger_log == f64::NEG_INFINITY {
                0.0
            } else {
                (stranger_log - log_max).exp()
            };
            BlockWeights { total_partner, stranger_unit }
        } else {
            let mut total_partner = 0.0;
            for &j in partners {
                let weight = self.table[self.arg(w_row[j], max_w) as usize];
                out.push(weight);
                total_partner += weight;
            }
            BlockWeights { total_partner, stranger_unit: self.table[zero_arg] }
        }
    }
}

/// Output of [`KernelTable::block_weights`].
pub(crate) struct BlockWeights {
    pub total_partner: f64,
    pub stranger_unit: f64,
}

/// Samples a position from unnormalized `weights` with one uniform draw.
/// A zero total falls back to a uniform choice over all positions.
pub(crate) fn sample_index_by_weight<R: Rng + ?Sized>(
    weights: &[f64],
    total: f64,
    rng: &mut R,
) -> usize {
    debug_assert!(!weights.is_empty());
    if total <= 0.0 {
        return rng.random_range(0..weights.len());
    }
    let target = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (k, &weight) in weights.iter().enumerate() {
        if weight > 0.0 {
            acc += weight;
            last_positive = k;
            if target < acc {
                return k;
            }
        }
    }
    // Round-off pushed the target past the final accumulation.
    last_positive
}

/// Exact selection probabilities over a relationship row.
///
/// Entries with `w = 0` are not candidates and receive probability zero.
/// The candidate probabilities follow the kernel evaluated at
/// `d_j = w_j / max(w)` after the shared `max(w)^(-|s|)` factor cancels;
/// the degenerate all-zero-weight case resolves to a uniform choice among
/// candidates.
pub fn selection_probabilities(w_row: &[u32], s: f64) -> Result<Vec<f64>, KernelError> {
    if !s.is_finite() {
        return Err(KernelError::NonFiniteShape(s));
    }
    let candidates: Vec<usize> = (0..w_row.len()).filter(|&j| w_row[j] > 0).collect();
    if candidates.is_empty() {
        return Err(KernelError::NoCandidates);
    }
    let max_w = candidates.iter().map(|&j| w_row[j]).max().unwrap();
    let mut table = KernelTable::new(s);
    let mut weights = Vec::new();
    let total = table.candidate_weights(w_row, &candidates, max_w, &mut weights);
    let mut probs = vec![0.0; w_row.len()];
    if total > 0.0 {
        for (k, &j) in candidates.iter().enumerate() {
            probs[j] = weights[k] / total;
        }
    } else {
        let uniform = 1.0 / candidates.len() as f64;
        for &j in &candidates {
            probs[j] = uniform;
        }
    }
    Ok(probs)
}

/// Draws one existing partner (index into `w_row`) according to the kernel.
///
/// Consumes exactly one random draw. Errors when the row has no positive
/// entry; the caller must then groom a stranger instead.
pub fn select_partner<R: Rng + ?Sized>(
    w_row: &[u32],
    s: f64,
    rng: &mut R,
) -> Result<usize, KernelError> {
    if !s.is_finite() {
        return Err(KernelError::NonFiniteShape(s));
    }
    let candidates: Vec<usize> = (0..w_row.len()).filter(|&j| w_row[j] > 0).collect();
    if candidates.is_empty() {
        return Err(KernelError::NoCandidates);
    }
    let max_w = candidates.iter().map(|&j| w_row[j]).max().unwrap();
    let mut table = KernelTable::new(s);
    let mut weights = Vec::new();
    let total = table.candidate_weights(w_row, &candidates, max_w, &mut weights);
    Ok(candidates[sample_index_by_weight(&weights, total, rng)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn params_round_trip_shape() {
        for &s in &[-4.0, -1.0, -0.25, 0.0, 0.5, 1.0, 3.0] {
            let p = KernelParams::from_shape(s).unwrap();
            assert_eq!(p.shape(), s);
            assert!(p.alpha() >= 1.0 && p.beta() >= 1.0);
            assert!(!(p.alpha() > 1.0 && p.beta() > 1.0));
        }
        assert!(KernelParams::from_shape(f64::NAN).is_err());
    }

    #[test]
    fn weight_uniform_at_zero_shape() {
        for &d in &[0.0, 0.25, 0.5, 1.0] {
            assert_eq!(selection_weight(d, 0.0).unwrap(), 1.0);
        }
    }

    #[test]
    fn weight_closed_forms() {
        assert_eq!(selection_weight(0.5, 1.0).unwrap(), 0.5);
        assert_eq!(selection_weight(0.5, -1.0).unwrap(), 0.5);
        assert_eq!(selection_weight(1.0, -2.0).unwrap(), 0.0);
    }

    #[test]
    fn weight_domain_errors() {
        assert_eq!(
            selection_weight(-0.1, 1.0),
            Err(KernelError::StrengthOutOfRange(-0.1))
        );
        assert_eq!(
            selection_weight(1.1, 1.0),
            Err(KernelError::StrengthOutOfRange(1.1))
        );
        assert!(selection_weight(f64::NAN, 1.0).is_err());
        assert!(matches!(
            selection_weight(0.5, f64::INFINITY),
            Err(KernelError::NonFiniteShape(_))
        ));
    }

    #[test]
    fn probabilities_proportional_at_shape_one() {
        let p = selection_probabilities(&[1, 2, 3], 1.0).unwrap();
        let total = 6.0;
        for (j, &w) in [1u32, 2, 3].iter().enumerate() {
            assert_eq!(p[j].to_bits(), (w as f64 / total).to_bits());
        }
    }

    #[test]
    fn probabilities_uniform_at_shape_zero() {
        let p = selection_probabilities(&[1, 2, 3], 0.0).unwrap();
        for &v in &p {
            assert_eq!(v, 1.0 / 3.0);
        }
    }

    #[test]
    fn probabilities_negative_shape_closed_form() {
        // w = (1, 2, 3), s = -4: weights ((2/3)^4, (1/3)^4, 0) -> (16/17, 1/17, 0).
        let p = selection_probabilities(&[1, 2, 3], -4.0).unwrap();
        assert!((p[0] - 16.0 / 17.0).abs() < 1e-12);
        assert!((p[1] - 1.0 / 17.0).abs() < 1e-12);
        assert_eq!(p[2], 0.0);
    }

    #[test]
    fn probabilities_skip_zero_entries() {
        let p = selection_probabilities(&[0, 5, 0, 5], 2.0).unwrap();
        assert_eq!(p[0], 0.0);
        assert_eq!(p[2], 0.0);
        assert_eq!(p[1], 0.5);
        assert_eq!(p[3], 0.5);
    }

    #[test]
    fn all_zero_row_is_an_error() {
        assert_eq!(
            selection_probabilities(&[0, 0], 1.0),
            Err(KernelError::NoCandidates)
        );
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(select_partner(&[0, 0], 1.0, &mut rng), Err(KernelError::NoCandidates));
    }

    #[test]
    fn degenerate_equal_counts_under_negative_shape_fall_back_to_uniform() {
        // Every candidate sits at d = 1, so every weight is (1-1)^|s| = 0.
        let p = selection_probabilities(&[4, 4, 4], -2.0).unwrap();
        for &v in &p {
            assert_eq!(v, 1.0 / 3.0);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut seen = [false; 3];
        for _ in 0..100 {
            seen[select_partner(&[4, 4, 4], -2.0, &mut rng).unwrap()] = true;
        }
        assert_eq!(seen, [true, true, true]);
    }

    #[test]
    fn single_partner_negative_shape_is_degenerate_but_total() {
        let p = selection_probabilities(&[0, 3, 0], -5.0).unwrap();
        assert_eq!(p, vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn log_space_path_matches_direct_ratios() {
        // |s| just above the threshold: compare p_j / p_k against the exact
        // ratio exp(|s| (ln t_j - ln t_k)).
        let w = [1u32, 2, 4];
        let s = 40.0;
        let p = selection_probabilities(&w, s).unwrap();
        let ratio = p[2] / p[1];
        let exact = (s * (4.0f64.ln() - 2.0f64.ln())).exp();
        assert!((ratio / exact - 1.0).abs() < 1e-12);
        let sum: f64 = p.iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn extreme_shapes_stay_normalized() {
        for &s in &[-200.0, -31.0, 31.0, 200.0] {
            let p = selection_probabilities(&[1, 7, 19, 300], s).unwrap();
            let sum: f64 = p.iter().sum();
            assert!((sum - 1.0).abs() < 1e-12, "s={s} sum={sum}");
            assert!(p.iter().all(|&v| v.is_finite() && v >= 0.0));
        }
    }

    #[test]
    fn ordering_follows_shape_sign() {
        let w = [1u32, 2, 3, 9];
        for &s in &[0.5, 1.0, 4.0, 33.0] {
            let p = selection_probabilities(&w, s).unwrap();
            assert!(p[0] < p[1] && p[1] < p[2] && p[2] < p[3], "s={s}");
        }
        for &s in &[-0.5, -1.0, -4.0, -33.0] {
            let p = selection_probabilities(&w, s).unwrap();
            assert!(p[0] >= p[1] && p[1] >= p[2] && p[2] >= p[3], "s={s}");
        }
    }

    #[test]
    fn sampler_respects_zero_weight() {
        // d = 1 has weight zero under s < 0 and must never be drawn.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let j = select_partner(&[1, 2, 3], -4.0, &mut rng).unwrap();
            assert_ne!(j, 2);
        }
    }
}
