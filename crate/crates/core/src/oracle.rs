//! Monte Carlo point-membership oracle for truncated limsup sets, used as
//! an independent cross-check of the exact interval engine.

use crate::error::Result;
use crate::model::{domain, NumeratorChoice, StreamKey};
use crate::psi::PsiSpec;
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};
use rand::Rng;

const POINT_BITS: u32 = 53;

/// Hit count over uniformly sampled points.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct McEstimate {
    pub points: u64,
    pub hits: u64,
}

impl McEstimate {
    pub fn p_hat(&self) -> f64 {
        self.hits as f64 / self.points as f64
    }

    /// Binomial standard deviation of the estimate when the true
    /// probability is `p`.
    pub fn sigma(&self, p: f64) -> f64 {
        (p * (1.0 - p) / self.points as f64).sqrt()
    }

    /// |p̂ − p| ≤ k·σ(p), with one point of slack for degenerate p.
    pub fn agrees(&self, p: f64, k: f64) -> bool {
        (self.p_hat() - p).abs() <= k * self.sigma(p) + 1.0 / self.points as f64
    }
}

struct Layer {
    n: u64,
    /// Ψ(n) = p/q
    p: BigInt,
    q: BigInt,
    radius: f64,
    numerators: Vec<u64>,
}

/// |u/2^53 − a/n| < p/q, decided in integers.
fn within(u: u64, a: u64, layer: &Layer) -> bool {
    let (n, one) = (layer.n as i128, 1i128 << POINT_BITS);
    let lhs = (u as i128 * n - a as i128 * one).abs();
    if let (Some(p), Some(q)) = (layer.p.to_i128(), layer.q.to_i128()) {
        if let (Some(l), Some(r)) = (lhs.checked_mul(q), p.checked_mul(n).and_then(|v| v.checked_mul(one))) {
            return l < r;
        }
    }
    BigInt::from(lhs) * &layer.q < &layer.p * BigInt::from(n) * BigInt::from(one)
}

fn member(u: u64, layers: &[Layer]) -> bool {
    let x = u as f64 / (1u64 << POINT_BITS) as f64;
    layers.iter().any(|l| {
        let nf = l.n as f64;
        let lo = ((x - l.radius) * nf).floor().max(1.0) as u64;
        let hi = (((x + l.radius) * nf).ceil().min(nf)) as u64;
        if hi < lo {
            return false;
        }
        let start = l.numerators.partition_point(|&a| a < lo);
        l.numerators[start..].iter().take_while(|&&a| a <= hi).any(|&a| within(u, a, l))
    })
}

/// Estimates λ(∪_{N0<n≤N1} A_n^P(Ψ)) from `points` samples x = u/2^53.
pub fn monte_carlo_measure(
    choice: &NumeratorChoice,
    psi: &PsiSpec,
    n0: u64,
    n1: u64,
    points: u64,
    seed: u64,
) -> Result<McEstimate> {
    let mut layers = Vec::new();
    for n in n0 + 1..=n1 {
        let r = psi.eval_u64(n)?;
        if !r.is_positive() {
            continue;
        }
        let mut numerators = choice.subset(n);
        numerators.sort_unstable();
        let radius = r.to_f64().unwrap_or(f64::INFINITY) * (1.0 + 1e-9) + 1e-300;
        layers.push(Layer { n, p: r.numer().clone(), q: r.denom().clone(), radius, numerators });
    }
    let mut rng = StreamKey::new(seed, domain::SAMPLE_POINTS, 0).stream(0);
    let mut hits = 0;
    for _ in 0..points {
        let u = rng.random_range(0..1u64 << POINT_BITS);
        if member(u, &layers) {
            hits += 1;
        }
    }
    Ok(McEstimate { points, hits })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frac::rat;
    use crate::intervals::EngineConfig;
    use crate::model::CardinalityProfile;
    use crate::ubiquity::truncated_limsup_measure;

    #[test]
    fn integer_membership_is_strict() {
        let layer = Layer { n: 2, p: BigInt::from(1), q: BigInt::from(4), radius: 0.25, numerators: vec![1, 2] };
        let half = 1u64 << 52;
        assert!(within(half, 1, &layer));
        assert!(!within(half + (1 << 51), 1, &layer));
        assert!(within(half + (1 << 51) - 1, 1, &layer));
    }

    #[test]
    fn agrees_with_engine() {
        let psi = PsiSpec::parse("closed_form c=1/2 alpha=2").unwrap();
        let p = NumeratorChoice::new(CardinalityProfile::Phi, 5);
        let exact = truncated_limsup_measure(&p, &psi, 0, 60, &EngineConfig::default()).unwrap();
        let v = exact.value.exact().unwrap().to_f64().unwrap();
        let mc = monte_carlo_measure(&p, &psi, 0, 60, 20_000, 1).unwrap();
        assert!(mc.agrees(v, 3.0), "{} vs {v}", mc.p_hat());
    }

    #[test]
    fn empty_and_full() {
        let full = NumeratorChoice::new(CardinalityProfile::Full, 0);
        let none = PsiSpec::parse("zero").unwrap();
        assert_eq!(monte_carlo_measure(&full, &none, 0, 10, 100, 0).unwrap().hits, 0);
        let wide = PsiSpec::closed_form(rat(1, 1), rat(0, 1), rat(0, 1), true).unwrap();
        assert_eq!(monte_carlo_measure(&full, &wide, 0, 3, 100, 0).unwrap().hits, 100);
    }
}
