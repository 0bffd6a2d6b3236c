//! The height bound `h(P)` and the resilience bound `b(P)`.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::model::PushdownGameSpec;
use crate::rigging::rig_pds;

/// Largest exponent bit-length we are willing to materialize for `b`.
const MATERIALIZE_BITS: u64 = 1 << 20;

/// `h = q·|Γ|·2^(q+1) + 1` and `b = q·h·|Γ|^h` for `q` rigged states.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bounds {
    pub q_rig: usize,
    pub gamma: usize,
    pub h: BigUint,
    /// `None` when `b` is too large to write down; see `b_bits`.
    pub b: Option<BigUint>,
    /// Bit-length of `b`, exact when `b` is materialized and approximate
    /// (within a fraction of a percent) otherwise.
    pub b_bits: BigUint,
}

pub fn height_bound(q: usize, gamma: usize) -> BigUint {
    BigUint::from(q) * BigUint::from(gamma) * (BigUint::one() << (q + 1)) + BigUint::one()
}

/// Whether `height_bound(q, gamma) <= t`, without building huge numbers.
pub fn height_bound_at_most(q: usize, gamma: usize, t: usize) -> bool {
    if q + 1 >= 64 {
        return false;
    }
    height_bound(q, gamma) <= BigUint::from(t)
}

pub fn bounds_for(q_rig: usize, gamma: usize) -> Bounds {
    let h = height_bound(q_rig, gamma);
    let qh = BigUint::from(q_rig) * &h;
    let (b, b_bits) = if gamma == 1 {
        let bits = BigUint::from(qh.bits());
        (Some(qh), bits)
    } else {
        let log2_gamma = (gamma as f64).log2();
        let small = h
            .to_u64()
            .filter(|&h| (h as f64) * log2_gamma <= MATERIALIZE_BITS as f64);
        match small {
            Some(hs) => {
                let b = &qh * BigUint::from(gamma).pow(hs as u32);
                let bits = BigUint::from(b.bits());
                (Some(b), bits)
            }
            None => {
                let scale = 1u64 << 20;
                let frac = (log2_gamma * scale as f64).round() as u64;
                let bits = (&h * BigUint::from(frac)) / BigUint::from(scale) + qh.bits();
                (None, bits)
            }
        }
    };
    Bounds {
        q_rig,
        gamma,
        h,
        b,
        b_bits,
    }
}

pub fn compute_bounds(spec: &PushdownGameSpec) -> Bounds {
    bounds_for(rig_pds(spec).spec.state_count(), spec.alphabet().len())
}

impl Bounds {
    /// `h` as a height, if it fits.
    pub fn h_usize(&self) -> Option<usize> {
        self.h.to_usize()
    }

    /// Whether the finite value `r` lies strictly below `b`.
    pub fn is_below_b(&self, r: u64) -> bool {
        match &self.b {
            Some(b) => BigUint::from(r) < *b,
            None => true,
        }
    }
}

/// Decimal when short, `~2^N` (bit-length) otherwise.
pub fn format_magnitude(x: &BigUint) -> String {
    if x.bits() <= 64 {
        x.to_string()
    } else {
        format!("~2^{}", x.bits())
    }
}

impl fmt::Display for Bounds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let b = match &self.b {
            Some(b) => format_magnitude(b),
            None if self.b_bits.is_zero() => "0".to_string(),
            None => format!("~2^{}", self.b_bits),
        };
        write!(
            f,
            "|Q'|: {}\nh(P): {}\nb(P): {}",
            self.q_rig,
            format_magnitude(&self.h),
            b
        )
    }
}
