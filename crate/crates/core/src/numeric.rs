//! Deterministic floating-point helpers and certified brackets.
//!
//! Everything here is built from IEEE-754 `+ - * /` only, so results are
//! bit-identical on every conforming platform. The platform `ln`/`exp` are
//! not used because libm implementations differ in the last ulp.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use std::fmt;

/// e^γ (γ = Euler–Mascheroni constant).
pub const E_GAMMA: f64 = 1.781_072_417_990_198;

/// 3/π²: Σ_{n≤N} φ(n) ~ (3/π²) N².
pub const THREE_OVER_PI_SQ: f64 = 0.303_963_550_927_013_3;

/// 315 ζ(3) / (2 π⁴), the mean value of n/φ(n).
pub const TOTIENT_RATIO_MEAN: f64 = 1.943_596_436_820_759_2;

/// Relative tolerance used to widen float evaluations into brackets.
pub const REL_TOL: f64 = 1e-12;

const LN2_HI: f64 = 6.931_471_803_691_238e-1;
const LN2_LO: f64 = 1.908_214_929_270_587_7e-10;
const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Natural logarithm, deterministic across platforms. `x` must be positive
/// and finite.
pub fn ln(x: f64) -> f64 {
    assert!(x > 0.0 && x.is_finite(), "ln argument must be positive and finite, got {x}");
    let (mut m, mut e) = frexp(x);
    // m in [0.5, 1); move to [sqrt(1/2), sqrt(2))
    if m < SQRT_HALF {
        m *= 2.0;
        e -= 1;
    }
    let s = (m - 1.0) / (m + 1.0);
    let s2 = s * s;
    // 2 atanh(s) = 2 (s + s^3/3 + s^5/5 + ...), |s| <= 0.1716
    let mut term = s;
    let mut sum = 0.0;
    let mut k = 1.0;
    for _ in 0..16 {
        sum += term / k;
        term *= s2;
        k += 2.0;
    }
    let ef = e as f64;
    ef * LN2_HI + (2.0 * sum + ef * LN2_LO)
}

/// Exponential, deterministic across platforms.
pub fn exp(x: f64) -> f64 {
    if x.is_nan() {
        return x;
    }
    if x > 709.0 {
        return f64::INFINITY;
    }
    if x < -745.0 {
        return 0.0;
    }
    let k = round_half_away(x / std::f64::consts::LN_2);
    let r = (x - k * LN2_HI) - k * LN2_LO;
    // Taylor series on |r| <= ln2/2
    let mut term = 1.0;
    let mut sum = 1.0;
    for i in 1..24 {
        term *= r / i as f64;
        sum += term;
    }
    ldexp(sum, k as i32)
}

/// n^alpha for n > 0.
pub fn powf(base: f64, alpha: f64) -> f64 {
    if alpha == 0.0 {
        return 1.0;
    }
    if alpha.fract() == 0.0 && alpha.abs() <= 64.0 {
        return powi(base, alpha as i32);
    }
    exp(alpha * ln(base))
}

fn powi(base: f64, e: i32) -> f64 {
    let mut acc = 1.0;
    let mut b = base;
    let mut k = e.unsigned_abs();
    while k > 0 {
        if k & 1 == 1 {
            acc *= b;
        }
        b *= b;
        k >>= 1;
    }
    if e < 0 {
        1.0 / acc
    } else {
        acc
    }
}

fn round_half_away(x: f64) -> f64 {
    let t = x.trunc();
    let d = x - t;
    if d >= 0.5 {
        t + 1.0
    } else if d <= -0.5 {
        t - 1.0
    } else {
        t
    }
}

fn frexp(x: f64) -> (f64, i32) {
    let bits = x.to_bits();
    let exp_bits = ((bits >> 52) & 0x7ff) as i32;
    if exp_bits == 0 {
        // subnormal: scale into the normal range first
        let (m, e) = frexp(x * f64::from_bits(0x4350_0000_0000_0000)); // 2^54
        return (m, e - 54);
    }
    let e = exp_bits - 1022;
    let m = f64::from_bits((bits & !(0x7ff << 52)) | (1022u64 << 52));
    (m, e)
}

fn ldexp(x: f64, e: i32) -> f64 {
    let mut x = x;
    let mut e = e;
    while e > 1000 {
        x *= f64::from_bits(0x7e70_0000_0000_0000); // 2^1000
        e -= 1000;
    }
    while e < -1000 {
        x *= f64::from_bits(0x0170_0000_0000_0000); // 2^-1000
        e += 1000;
    }
    x * f64::from_bits(((e + 1023) as u64) << 52)
}

/// ln(ln(max(n, 16))). The clamp keeps the value defined and positive.
pub fn loglog(n: f64) -> f64 {
    ln(ln(n.max(16.0)))
}

/// ln of an arbitrary-precision integer (n >= 1).
pub fn ln_big(n: &BigUint) -> f64 {
    assert!(!n.is_zero(), "ln of zero");
    let bits = n.bits();
    if bits <= 1000 {
        return ln(n.to_f64().expect("fits in f64"));
    }
    let shift = bits - 64;
    let top = (n >> shift).to_f64().expect("64-bit value");
    ln(top) + shift as f64 * std::f64::consts::LN_2
}

/// ln(m!) = Σ_{i ≤ m} ln i, without materializing m!.
pub fn ln_factorial(m: u64) -> f64 {
    let mut acc = 0.0;
    for i in 2..=m {
        acc += ln(i as f64);
    }
    acc
}

/// loglog of a big integer, with the same clamp as [`loglog`].
pub fn loglog_big(n: &BigUint) -> f64 {
    let l = ln_big(n).max(ln(16.0));
    ln(l)
}

/// Exact rational value of a finite f64.
pub fn f64_to_rational(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite float")
}

/// Certified enclosure of a positive real quantity: `lo <= true value <= hi`,
/// assuming each input evaluation is within [`REL_TOL`] relative error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
}

impl Bracket {
    /// Widen a float evaluation by the relative tolerance.
    pub fn around(v: f64) -> Bracket {
        let w = v.abs() * REL_TOL;
        Bracket { lo: v - w, hi: v + w }
    }

    pub fn exact(v: f64) -> Bracket {
        Bracket { lo: v, hi: v }
    }

    pub fn from_rational(r: &BigRational) -> Bracket {
        Bracket::around(r.to_f64().unwrap_or(f64::NAN))
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    fn widen(lo: f64, hi: f64) -> Bracket {
        // one ulp-scale pad per operation keeps the enclosure honest
        let pad = |v: f64| v.abs() * 4.0 * f64::EPSILON;
        Bracket { lo: lo - pad(lo), hi: hi + pad(hi) }
    }

    pub fn recip(self) -> Bracket {
        Bracket::exact(1.0) / self
    }

    pub fn scale(self, k: f64) -> Bracket {
        debug_assert!(k >= 0.0);
        Bracket::widen(self.lo * k, self.hi * k)
    }

    /// Verdict on `self <= other`.
    pub fn le(&self, other: &Bracket) -> Verdict {
        if self.hi <= other.lo {
            Verdict::Certified
        } else if self.lo > other.hi {
            Verdict::Violated
        } else {
            Verdict::WithinRounding
        }
    }

    /// Verdict on `self >= other`.
    pub fn ge(&self, other: &Bracket) -> Verdict {
        other.le(self)
    }
}

impl fmt::Display for Bracket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:.12e}, {:.12e}]", self.lo, self.hi)
    }
}

/// Product of two brackets with nonnegative bounds.
impl std::ops::Mul for Bracket {
    type Output = Bracket;

    fn mul(self, o: Bracket) -> Bracket {
        debug_assert!(self.lo >= 0.0 && o.lo >= 0.0);
        Bracket::widen(self.lo * o.lo, self.hi * o.hi)
    }
}

/// Quotient of two brackets with positive bounds.
impl std::ops::Div for Bracket {
    type Output = Bracket;

    fn div(self, o: Bracket) -> Bracket {
        debug_assert!(self.lo >= 0.0 && o.lo > 0.0);
        Bracket::widen(self.lo / o.hi, self.hi / o.lo)
    }
}

impl std::ops::Add for Bracket {
    type Output = Bracket;

    fn add(self, o: Bracket) -> Bracket {
        Bracket::widen(self.lo + o.lo, self.hi + o.hi)
    }
}

/// Outcome of an inequality check between certified brackets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// Holds for every value in both brackets.
    Certified,
    /// Brackets overlap: not refuted, equality within rounding.
    WithinRounding,
    /// Fails for every value in both brackets.
    Violated,
}

impl Verdict {
    pub fn holds(self) -> bool {
        !matches!(self, Verdict::Violated)
    }

    pub fn and(self, o: Verdict) -> Verdict {
        use Verdict::*;
        match (self, o) {
            (Violated, _) | (_, Violated) => Violated,
            (WithinRounding, _) | (_, WithinRounding) => WithinRounding,
            _ => Certified,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Certified => "certified",
            Verdict::WithinRounding => "within-rounding",
            Verdict::Violated => "violated",
        }
    }
}

/// Decreasing functions τ(n) → 0 used by the counterexample construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tau {
    /// τ(n) = loglog(max(n,16))^{-1/2}
    InvSqrtLogLog,
    /// τ(n) = 1 / logloglog(max(n, 10^7))
    InvLogLogLog,
}

impl Tau {
    pub fn parse(s: &str) -> Option<Tau> {
        match s.trim() {
            "loglog_inv_sqrt" | "inv_sqrt_loglog" => Some(Tau::InvSqrtLogLog),
            "logloglog_inv" | "inv_logloglog" => Some(Tau::InvLogLogLog),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Tau::InvSqrtLogLog => "loglog_inv_sqrt",
            Tau::InvLogLogLog => "logloglog_inv",
        }
    }

    /// τ evaluated from ln(n).
    pub fn from_ln(self, ln_n: f64) -> f64 {
        match self {
            Tau::InvSqrtLogLog => {
                let l = ln(ln_n.max(ln(16.0)));
                1.0 / l.sqrt()
            }
            Tau::InvLogLogLog => {
                let l = ln(ln(ln_n.max(ln(1e7))));
                1.0 / l
            }
        }
    }

    pub fn eval(self, n: f64) -> f64 {
        self.from_ln(ln(n))
    }

    pub fn eval_big(self, n: &BigUint) -> f64 {
        self.from_ln(ln_big(n))
    }

    /// Bracket for 1/(τ(n)·loglog n), the profile floor on support keys.
    pub fn inv_tau_loglog(self, n: &BigUint) -> Bracket {
        let ln_n = ln_big(n);
        let tau = Bracket::around(self.from_ln(ln_n));
        let ll = Bracket::around(ln(ln_n.max(ln(16.0))));
        (tau * ll).recip()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_matches_libm_closely() {
        for &x in &[1e-300, 1e-5, 0.3, 0.999, 1.0, 1.5, 2.0, 10.0, 16.0, 12345.678, 1e300] {
            let a = ln(x);
            let b = x.ln();
            assert!((a - b).abs() <= 4.0 * f64::EPSILON * b.abs().max(1.0), "{x}: {a} vs {b}");
        }
        assert_eq!(ln(1.0), 0.0);
    }

    #[test]
    fn exp_matches_libm_closely() {
        for &x in &[-700.0, -20.0, -1.0, -1e-8, 0.0, 0.5, 1.0, 3.3, 50.0, 700.0] {
            let a = exp(x);
            let b = x.exp();
            assert!((a - b).abs() <= 8.0 * f64::EPSILON * b, "{x}: {a} vs {b}");
        }
    }

    #[test]
    fn loglog_clamps_below_sixteen() {
        assert_eq!(loglog(2.0), loglog(16.0));
        assert!(loglog(16.0) > 1.0);
        assert!(loglog(17.0) > loglog(16.0));
    }

    #[test]
    fn big_ln_agrees_with_factorial_sum() {
        let mut f = BigUint::from(1u32);
        for i in 1..=300u32 {
            f *= i;
        }
        let a = ln_big(&f);
        let b = ln_factorial(300);
        assert!((a - b).abs() < 1e-9 * b);
    }

    #[test]
    fn tau_is_nonincreasing() {
        for tau in [Tau::InvSqrtLogLog, Tau::InvLogLogLog] {
            let mut prev = f64::INFINITY;
            for e in 1..200 {
                let v = tau.eval(1.5f64.powi(e));
                assert!(v <= prev);
                prev = v;
            }
        }
    }

    #[test]
    fn bracket_verdicts() {
        let a = Bracket::around(1.0);
        let b = Bracket::around(2.0);
        assert_eq!(a.le(&b), Verdict::Certified);
        assert_eq!(b.le(&a), Verdict::Violated);
        assert_eq!(a.le(&a), Verdict::WithinRounding);
    }

    #[test]
    fn constants_have_expected_digits() {
        let pi = std::f64::consts::PI;
        assert!((THREE_OVER_PI_SQ - 3.0 / (pi * pi)).abs() < 1e-15);
        let zeta3 = 1.202_056_903_159_594_3;
        assert!((TOTIENT_RATIO_MEAN - 315.0 * zeta3 / (2.0 * pi.powi(4))).abs() < 1e-14);
        assert!((E_GAMMA - exp(0.577_215_664_901_532_9)).abs() < 1e-14);
    }
}
