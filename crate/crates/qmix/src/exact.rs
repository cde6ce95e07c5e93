//! Exact integer arithmetic for factorial ratios and Beta-type moments,
//! converted to floating point only at the very end.

use num_bigint::{BigInt, BigUint, Sign};

/// n! as a big unsigned integer.
pub fn factorial(n: u64) -> BigUint {
    let mut acc = BigUint::from(1u32);
    for k in 2..=n {
        acc *= BigUint::from(k);
    }
    acc
}

/// Binomial coefficient C(n, k).
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::from(0u32);
    }
    let k = k.min(n - k);
    let mut acc = BigUint::from(1u32);
    for i in 0..k {
        acc *= BigUint::from(n - i);
        acc /= BigUint::from(i + 1);
    }
    acc
}

/// Least common multiple of an inclusive integer range.
pub fn lcm_range(lo: u64, hi: u64) -> BigUint {
    let mut acc = BigUint::from(1u32);
    for k in lo.max(1)..=hi {
        let k = BigUint::from(k);
        let g = gcd(acc.clone(), k.clone());
        acc = acc / g * k;
    }
    acc
}

fn gcd(mut a: BigUint, mut b: BigUint) -> BigUint {
    let zero = BigUint::from(0u32);
    while b != zero {
        let r = &a % &b;
        a = b;
        b = r;
    }
    a
}

/// num / den as f64, correct to within a couple of ulps for operands of any
/// size (the quotient is formed at > 60 bits of precision, then rounded).
pub fn big_ratio_to_f64(num: &BigInt, den: &BigInt) -> f64 {
    let sign = match (num.sign(), den.sign()) {
        (Sign::NoSign, _) => return 0.0,
        (Sign::Plus, Sign::Plus) | (Sign::Minus, Sign::Minus) => 1.0,
        _ => -1.0,
    };
    let a = num.magnitude();
    let b = den.magnitude();
    let abits = a.bits() as i64;
    let bbits = b.bits() as i64;
    // Scale so the integer quotient carries ~64 significant bits.
    let shift = bbits + 64 - abits;
    let q = if shift >= 0 {
        (a << shift as u64) / b
    } else {
        a / (b << (-shift) as u64)
    };
    let mut q64 = 0.0f64;
    // Take the top 64 bits of q exactly.
    let qbits = q.bits();
    let (top, dropped) = if qbits > 64 {
        ((&q >> (qbits - 64)).to_u64_digits(), qbits - 64)
    } else {
        (q.to_u64_digits(), 0)
    };
    if let Some(&word) = top.first() {
        q64 = word as f64;
    }
    q64 * 2f64.powi((dropped as i64 - shift) as i32) * sign
}

/// Ratio of unsigned big integers as f64.
pub fn biguint_ratio_to_f64(num: &BigUint, den: &BigUint) -> f64 {
    big_ratio_to_f64(
        &BigInt::from_biguint(Sign::Plus, num.clone()),
        &BigInt::from_biguint(Sign::Plus, den.clone()),
    )
}

/// ln Γ(x) for x > 0 (Lanczos approximation, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    const COEFFS: [f64; 8] = [
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ];
    debug_assert!(x > 0.0);
    let xm1 = x - 1.0;
    let mut acc = 0.99999999999980993;
    for (i, &c) in COEFFS.iter().enumerate() {
        acc += c / (xm1 + (i + 1) as f64);
    }
    let t = xm1 + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (xm1 + 0.5) * t.ln() - t + acc.ln()
}

/// Decompose a finite nonnegative f64 into an exact rational p / 2^s.
pub fn f64_to_dyadic(x: f64) -> (BigUint, u64) {
    assert!(x.is_finite() && x >= 0.0);
    if x == 0.0 {
        return (BigUint::from(0u32), 0);
    }
    let bits = x.to_bits();
    let mantissa = bits & ((1u64 << 52) - 1);
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let (m, e) = if exp == 0 {
        (mantissa, -1074i64)
    } else {
        (mantissa | (1u64 << 52), exp - 1075)
    };
    if e >= 0 {
        (BigUint::from(m) << e as u64, 0)
    } else {
        (BigUint::from(m), (-e) as u64)
    }
}
