//! Branch-light f64 exp/tanh for the batched layer kernels (rational
//! approximations in the Cephes style, ~1-2 ulp). The scalar tape keeps the
//! system libm; tests pin the two paths against each other.

/// exp(x) via range reduction to [-ln2/2, ln2/2] and a Pade approximant.
#[inline]
pub fn exp64(x: f64) -> f64 {
    const LOG2E: f64 = std::f64::consts::LOG2_E;
    const C1: f64 = 6.93145751953125e-1;
    const C2: f64 = 1.42860682030941723212e-6;
    if x > 709.0 {
        return f64::INFINITY;
    }
    if x < -745.0 {
        return 0.0;
    }
    let n = (LOG2E * x + 0.5).floor();
    let mut r = x - n * C1;
    r -= n * C2;
    let xx = r * r;
    let px = r * ((1.26177193074810590878e-4 * xx + 3.02994407707441961300e-2) * xx + 1.0);
    let qx = ((3.00198505138664455042e-6 * xx + 2.52448340349684104192e-3) * xx
        + 2.27265548208155028766e-1)
        * xx
        + 2.0;
    let e = 1.0 + 2.0 * px / (qx - px);
    // scale by 2^n; |n| <= 1075 here, split to stay in range
    let ni = n as i32;
    let (h1, h2) = (ni / 2, ni - ni / 2);
    e * pow2i(h1) * pow2i(h2)
}

#[inline]
fn pow2i(n: i32) -> f64 {
    f64::from_bits(((1023 + n) as u64) << 52)
}

/// tanh(x): odd rational on |x| < 0.625, exp-based elsewhere.
#[inline]
pub fn tanh64(x: f64) -> f64 {
    let z = x.abs();
    if z < 0.625 {
        if z < 1e-150 {
            return x;
        }
        let s = x * x;
        let p = (-9.64399179425052238628e-1 * s - 9.92877231001918586564e1) * s
            - 1.61468768441708447952e3;
        let q = ((s + 1.12811678491632931402e2) * s + 2.23548839060100448583e3) * s
            + 4.84406305325125486048e3;
        x + x * s * p / q
    } else if z < 19.07 {
        let e = exp64(2.0 * z);
        let y = 1.0 - 2.0 / (e + 1.0);
        if x < 0.0 {
            -y
        } else {
            y
        }
    } else {
        1.0f64.copysign(x)
    }
}
