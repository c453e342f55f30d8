//! Scalar abstraction for the numeric kernels.
//!
//! Everything that is pure math (tensors, losses, belief propagation, the
//! forward-backward oracle) is generic over [`Real`]. Simulation-side code
//! (random channels, corpora) stays on `f64`.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point scalar: `f32` or `f64`.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + NumAssign + Sum + Debug + Display + Default + Send + Sync + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Shorthand for lifting an `f64` literal into a generic scalar.
#[inline]
pub fn r<R: Real>(x: f64) -> R {
    R::from_f64(x).expect("finite literal")
}

/// Magnitude cap applied to every log-likelihood ratio. Beyond this the
/// tanh rule saturates and contributes nothing but NaN risk.
pub const LLR_CLAMP: f64 = 30.0;

/// Probabilities are clipped into `[PROB_CLIP, 1 - PROB_CLIP]` before any
/// logarithm so losses and LLRs stay finite.
pub const PROB_CLIP: f64 = 1e-6;

/// Clamp an LLR into `[-LLR_CLAMP, LLR_CLAMP]`. NaN maps to zero.
#[inline]
pub fn clamp_llr<R: Real>(x: R) -> R {
    let cap = r::<R>(LLR_CLAMP);
    if x.is_nan() {
        return R::zero();
    }
    x.min(cap).max(-cap)
}

/// Clip a probability into `[PROB_CLIP, 1 - PROB_CLIP]`.
#[inline]
pub fn clip_prob<R: Real>(q: R) -> R {
    let lo = r::<R>(PROB_CLIP);
    let hi = R::one() - lo;
    q.min(hi).max(lo)
}
