//! Loss functions.
//!
//! Both losses clip probabilities into `[PROB_CLIP, 1 - PROB_CLIP]` before
//! taking logarithms; gradients are taken at the clipped value.

use crate::error::{Error, Result};
use crate::num::{clip_prob, r, Real};

/// Negative doubling rate of proportional betting on a bit sequence.
///
/// Betting a fraction `q_j` of the bankroll on outcome 1 of bit `b_j`
/// grows wealth by factor `q_j` (if `b_j = 1`) or `1 - q_j` (if 0); the
/// doubling rate is the mean base-2 log of those factors, and this loss is
/// its negation:
///
/// `loss = -(1/N) * sum_j [ b_j*log2(q_j) + (1-b_j)*log2(1-q_j) ]`
///
/// It is minimized exactly when each `q_j` equals the true conditional
/// probability of `b_j = 1`, which is what makes it a soft-decoding
/// training objective. Returns the loss and `dloss/dq`.
pub fn negative_doubling_rate_loss<R: Real>(q: &[R], bits: &[u8]) -> Result<(R, Vec<R>)> {
    if q.is_empty() {
        return Err(Error::EmptyBatch);
    }
    if q.len() != bits.len() {
        return Err(Error::LengthMismatch { expected: q.len(), got: bits.len() });
    }
    let n = r::<R>(q.len() as f64);
    let ln2 = r::<R>(std::f64::consts::LN_2);
    let mut loss = R::zero();
    let mut grad = Vec::with_capacity(q.len());
    for (&qj, &bj) in q.iter().zip(bits) {
        let qc = clip_prob(qj);
        let (win, lose) = (qc, R::one() - qc);
        if bj & 1 == 1 {
            loss -= win.ln() / ln2;
            grad.push(-(R::one() / (n * ln2 * win)));
        } else {
            loss -= lose.ln() / ln2;
            grad.push(R::one() / (n * ln2 * lose));
        }
    }
    Ok((loss / n, grad))
}

/// Multi-label cross entropy over sigmoid scores with a one-hot target:
/// `-sum_t [ y_t*ln(s_t) + (1-y_t)*ln(1-s_t) ]`.
pub fn cross_entropy_loss<R: Real>(scores: &[R], label: usize) -> Result<(R, Vec<R>)> {
    if scores.is_empty() {
        return Err(Error::EmptyBatch);
    }
    if label >= scores.len() {
        return Err(Error::LabelOutOfRange { label, count: scores.len() });
    }
    let mut loss = R::zero();
    let mut grad = Vec::with_capacity(scores.len());
    for (t, &st) in scores.iter().enumerate() {
        let sc = clip_prob(st);
        if t == label {
            loss -= sc.ln();
            grad.push(-(R::one() / sc));
        } else {
            loss -= (R::one() - sc).ln();
            grad.push(R::one() / (R::one() - sc));
        }
    }
    Ok((loss, grad))
}
