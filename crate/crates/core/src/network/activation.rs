//! Branch-free `tanh` for the batched engine. The libm version is a scalar
//! call per element and dominated the forward pass; this one inlines and
//! vectorizes.

#[allow(clippy::excessive_precision)]
const LN2_HI: f64 = 6.931_471_803_691_238_2e-1;
const LN2_LO: f64 = 1.908_214_929_270_587_7e-10;
const LOG2E: f64 = std::f64::consts::LOG2_E;
/// 1.5 · 2^52: adding it rounds to an integer held in the low mantissa bits.
const ROUND_MAGIC: f64 = 6_755_399_441_055_744.0;

/// `expm1(x)` for `x ∈ [-40, 0]`, accurate to a few ulp.
#[inline(always)]
fn expm1_nonpositive(x: f64) -> f64 {
    let shifted = x * LOG2E + ROUND_MAGIC;
    let k = shifted - ROUND_MAGIC;
    let r = (x - k * LN2_HI) - k * LN2_LO;
    // expm1(r) on |r| <= ln2/2 by Taylor to degree 13, Horner form
    let mut p = 1.0 / 6_227_020_800.0;
    p = p * r + 1.0 / 479_001_600.0;
    p = p * r + 1.0 / 39_916_800.0;
    p = p * r + 1.0 / 3_628_800.0;
    p = p * r + 1.0 / 362_880.0;
    p = p * r + 1.0 / 40_320.0;
    p = p * r + 1.0 / 5_040.0;
    p = p * r + 1.0 / 720.0;
    p = p * r + 1.0 / 120.0;
    p = p * r + 1.0 / 24.0;
    p = p * r + 1.0 / 6.0;
    p = p * r + 0.5;
    let em1 = r + r * r * p;
    let ki = shifted.to_bits().wrapping_sub(ROUND_MAGIC.to_bits()) as i64;
    let two_k = f64::from_bits(((ki + 1023) as u64) << 52);
    two_k * em1 + (two_k - 1.0)
}

/// Hyperbolic tangent, within a few ulp of `f64::tanh`.
#[inline(always)]
pub fn tanh(x: f64) -> f64 {
    let a = x.abs().min(20.0);
    let e = expm1_nonpositive(-2.0 * a);
    (-e / (2.0 + e)).copysign(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_libm() {
        let mut worst_abs: f64 = 0.0;
        let mut worst_rel: f64 = 0.0;
        let n = 400_000;
        for i in 0..=n {
            let x = -25.0 + 50.0 * i as f64 / n as f64;
            for x in [x, x * 1e-6, x * 1e-12] {
                let (a, b) = (tanh(x), x.tanh());
                worst_abs = worst_abs.max((a - b).abs());
                if b != 0.0 {
                    worst_rel = worst_rel.max(((a - b) / b).abs());
                }
            }
        }
        assert!(worst_abs < 4e-16, "abs {worst_abs}");
        assert!(worst_rel < 1e-15, "rel {worst_rel}");
        assert_eq!(tanh(0.0), 0.0);
        assert_eq!(tanh(50.0), 1.0);
        assert_eq!(tanh(-50.0), -1.0);
    }
}
