//! Small numeric helpers: compensated summation, exact binomials, L^p norms.

use num_complex::Complex64;

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

/// Exact binomial coefficient. Panics on overflow, which cannot happen for
/// the degrees allowed by truncation caps.
pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * u128::from(n - i) / u128::from(i + 1);
    }
    u64::try_from(acc).expect("binomial coefficient overflow")
}

pub fn factorial(n: u64) -> u64 {
    (1..=n).product::<u64>().max(1)
}

/// `(Σ |v|^p)^(1/p)`, with `p = ∞` giving the max norm.
pub fn lp_norm(values: &[Complex64], p: f64) -> f64 {
    if p.is_infinite() {
        return values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    }
    let s: CompensatedSum = values.iter().map(|v| v.norm().powf(p)).collect();
    s.value().powf(1.0 / p)
}

/// `Σ 1/p` treating `p = ∞` as zero.
pub fn reciprocal_sum(exponents: &[f64]) -> f64 {
    exponents.iter().map(|p| if p.is_infinite() { 0.0 } else { 1.0 / p }).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binomial(6, 3), 20);
        assert_eq!(binomial(4, 0), 1);
        assert_eq!(binomial(3, 5), 0);
        assert_eq!(binomial(30, 15), 155_117_520);
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut s = CompensatedSum::new();
        s.add(1.0);
        for _ in 0..10 {
            s.add(1e-17);
        }
        s.add(-1.0);
        assert!((s.value() - 1e-16).abs() < 1e-30);
    }

    #[test]
    fn lp_norms() {
        let v = [Complex64::new(3.0, 0.0), Complex64::new(0.0, 4.0)];
        assert!((lp_norm(&v, 2.0) - 5.0).abs() < 1e-15);
        assert_eq!(lp_norm(&v, f64::INFINITY), 4.0);
        assert!((lp_norm(&v, 1.0) - 7.0).abs() < 1e-15);
    }
}
