//! Branchless single-precision activations that auto-vectorize.
//!
//! `exp` follows the classic Cephes `expf` reduction: `x = n ln2 + r`,
//! a degree-6 polynomial for `e^r`, and `2^n` assembled in the exponent bits.
//! Rounding to the nearest integer uses the `1.5 * 2^23` trick so the loop has
//! no calls and no branches.

const LOG2E: f32 = std::f32::consts::LOG2_E;
const LN2_HI: f32 = 0.693_359_4;
const LN2_LO: f32 = -2.121_944_4e-4;
const ROUND_MAGIC: f32 = 12_582_912.0; // 1.5 * 2^23
const EXP_MAX: f32 = 88.0;
const EXP_MIN: f32 = -87.0;

#[inline(always)]
fn exp_f32(x: f32) -> f32 {
    let x = if x > EXP_MAX {
        EXP_MAX
    } else if x < EXP_MIN {
        EXP_MIN
    } else {
        x
    };
    let shifted = x * LOG2E + ROUND_MAGIC;
    let n = shifted - ROUND_MAGIC;
    let n_int = shifted.to_bits() as i32 - ROUND_MAGIC.to_bits() as i32;
    let r = x - n * LN2_HI - n * LN2_LO;
    let z = r * r;
    let p = ((((1.987_569_1e-4 * r + 1.398_199_9e-3) * r + 8.333_452e-3) * r + 4.166_579_6e-2) * r
        + 1.666_666_5e-1)
        * r
        + 5.000_000_1e-1;
    let e_r = p * z + r + 1.0;
    let pow2 = f32::from_bits(((n_int + 127) << 23) as u32);
    e_r * pow2
}

#[inline(always)]
fn tanh_f32(x: f32) -> f32 {
    let e = exp_f32(2.0 * x);
    let wide = 1.0 - 2.0 / (e + 1.0);
    let z = x * x;
    // Taylor series keeps relative accuracy where 1 - 2/(e+1) cancels.
    let small = x * (1.0 + z * (-1.0 / 3.0 + z * (2.0 / 15.0 + z * (-17.0 / 315.0))));
    if z < 0.01 {
        small
    } else {
        wide
    }
}

pub(crate) fn sigmoid_slice(xs: &mut [f32]) {
    for x in xs.iter_mut() {
        *x = 1.0 / (1.0 + exp_f32(-*x));
    }
}

pub(crate) fn tanh_slice(xs: &mut [f32]) {
    for x in xs.iter_mut() {
        *x = tanh_f32(*x);
    }
}
