//! Size of the counter abstraction versus the local representative.

use num_bigint::BigUint;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CountingReport {
    /// Local states per process.
    pub m: u32,
    /// Processes.
    pub n: u32,
    /// Neighbors per process.
    pub b: u32,
    /// Multisets of `n` local states out of `m`: C(m + n - 1, n).
    #[serde(serialize_with = "decimal")]
    pub counter_size: BigUint,
    #[serde(serialize_with = "decimal")]
    pub two_pow_m: BigUint,
    /// m^b, the size of a representative neighborhood.
    #[serde(serialize_with = "decimal")]
    pub local_size: BigUint,
    pub counter_exceeds_two_pow_m: bool,
    pub n_exceeds_2m: bool,
    pub local_below_counter: bool,
}

fn decimal<S: serde::Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

/// C(m + n - 1, n), built as a running product that stays integral at each step.
pub fn multiset_count(m: u32, n: u32) -> BigUint {
    if m == 0 {
        return BigUint::from(u32::from(n == 0));
    }
    let mut c = BigUint::from(1u32);
    for i in 1..=n {
        c = c * BigUint::from(m - 1 + i) / BigUint::from(i);
    }
    c
}

pub fn counting_report(m: u32, n: u32, b: u32) -> CountingReport {
    let counter_size = multiset_count(m, n);
    let two_pow_m = BigUint::from(1u32) << m as usize;
    let local_size = BigUint::from(m).pow(b);
    CountingReport {
        m,
        n,
        b,
        counter_exceeds_two_pow_m: counter_size > two_pow_m,
        n_exceeds_2m: u64::from(n) > 2 * u64::from(m),
        local_below_counter: local_size < counter_size,
        counter_size,
        two_pow_m,
        local_size,
    }
}

impl std::fmt::Display for CountingReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "m = {}, n = {}, b = {}", self.m, self.n, self.b)?;
        writeln!(f, "counter abstraction  C(m+n-1, n) = {}", self.counter_size)?;
        writeln!(f, "2^m                               = {}", self.two_pow_m)?;
        writeln!(f, "local representative m^b          = {}", self.local_size)?;
        writeln!(f, "counter > 2^m: {}", self.counter_exceeds_two_pow_m)?;
        writeln!(f, "n > 2m: {}", self.n_exceeds_2m)?;
        write!(f, "m^b < counter: {}", self.local_below_counter)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_values() {
        let r = counting_report(3, 6, 2);
        assert_eq!(r.counter_size, BigUint::from(28u32));
        assert_eq!(r.two_pow_m, BigUint::from(8u32));
        assert_eq!(r.local_size, BigUint::from(9u32));
        assert_eq!(counting_report(3, 7, 2).counter_size, BigUint::from(36u32));
        assert_eq!(counting_report(1, 17, 5).counter_size, BigUint::from(1u32));
    }
}
