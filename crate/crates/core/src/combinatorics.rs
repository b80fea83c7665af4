//! Counting of admissible index patterns and 2-associated Stirling numbers.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{argument, Error, Result};
use crate::fluctuation::C0;

/// Largest `N^{2m}` searched exhaustively by default.
pub const DEFAULT_SEARCH_CAP: u128 = 100_000_000;

/// Lower rational approximation `2718/1000` of `e`.
const E_NUM: u32 = 2718;
const E_DEN: u32 = 1000;

/// `S₂(n, k)` for `n ≤ max_n`, `k ≤ max_k`: partitions of `[n]` into `k`
/// blocks of size at least two.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StirlingTable {
    max_n: usize,
    max_k: usize,
    values: Vec<Vec<BigUint>>,
}

impl StirlingTable {
    pub fn new(max_n: usize, max_k: usize) -> Self {
        let mut values = vec![vec![BigUint::zero(); max_k + 1]; max_n + 1];
        values[0][0] = BigUint::one();
        // S₂(n+1,k) = k S₂(n,k) + n S₂(n−1,k−1)
        for n in 1..max_n {
            for k in 1..=max_k {
                let v = &values[n][k] * BigUint::from(k) + &values[n - 1][k - 1] * BigUint::from(n);
                values[n + 1][k] = v;
            }
        }
        Self {
            max_n,
            max_k,
            values,
        }
    }

    pub fn max_n(&self) -> usize {
        self.max_n
    }

    pub fn max_k(&self) -> usize {
        self.max_k
    }

    /// Zero outside the tabulated range only when the true value is zero.
    pub fn get(&self, n: usize, k: usize) -> Option<&BigUint> {
        self.values.get(n).and_then(|row| row.get(k))
    }
}

pub fn stirling2_assoc(n: usize, k: usize) -> BigUint {
    if 2 * k > n || (k == 0) != (n == 0) {
        return BigUint::zero();
    }
    StirlingTable::new(n, k)
        .get(n, k)
        .cloned()
        .unwrap_or_default()
}

fn search_size(m: usize, n: usize) -> u128 {
    (n as u128).checked_pow(2 * m as u32).unwrap_or(u128::MAX)
}

fn check_args(m: usize, n: usize, cap: u128) -> Result<()> {
    if m == 0 || n == 0 {
        return Err(argument("m and N must be at least 1"));
    }
    let size = search_size(m, n);
    if size > cap {
        return Err(Error::SearchSpace { size, cap });
    }
    Ok(())
}

struct Search<'a, F> {
    m: usize,
    n: usize,
    values: Vec<usize>,
    counts: Vec<usize>,
    singles: usize,
    found: u128,
    visit: &'a mut F,
    pairs: Vec<(usize, usize)>,
}

impl<F: FnMut(&[(usize, usize)])> Search<'_, F> {
    fn run(&mut self, pos: usize) {
        let total = 2 * self.m;
        if pos == total {
            if self.singles == 0 {
                self.found += 1;
                for (nu, pair) in self.pairs.iter_mut().enumerate() {
                    *pair = (self.values[2 * nu] + 1, self.values[2 * nu + 1] + 1);
                }
                (self.visit)(&self.pairs);
            }
            return;
        }
        let remaining = total - pos - 1;
        for v in 0..self.n {
            if pos % 2 == 1 && self.values[pos - 1] == v {
                continue;
            }
            let before = self.counts[v];
            let singles = match before {
                0 => self.singles + 1,
                1 => self.singles - 1,
                _ => self.singles,
            };
            if singles > remaining {
                continue;
            }
            self.counts[v] += 1;
            let saved = self.singles;
            self.singles = singles;
            self.values[pos] = v;
            self.run(pos + 1);
            self.singles = saved;
            self.counts[v] -= 1;
        }
    }
}

/// Streams every element of `𝓘_{m,N}` to `visit` as 1-based pairs
/// `(i_ν, j_ν)` in lexicographic order and returns their number.
pub fn enumerate_i(
    m: usize,
    n: usize,
    cap: u128,
    mut visit: impl FnMut(&[(usize, usize)]),
) -> Result<BigUint> {
    check_args(m, n, cap)?;
    let mut search = Search {
        m,
        n,
        values: vec![0; 2 * m],
        counts: vec![0; n],
        singles: 0,
        found: 0,
        visit: &mut visit,
        pairs: vec![(0, 0); m],
    };
    search.run(0);
    Ok(BigUint::from(search.found))
}

/// `|𝓘_{m,N}|`, counted over canonical labelings and weighted by
/// `N!/(N−k)!`.
pub fn count_i(m: usize, n: usize, cap: u128) -> Result<BigUint> {
    check_args(m, n, cap)?;
    let mut by_blocks = vec![0u64; m + 1];
    let mut values = vec![0usize; 2 * m];
    let mut counts = vec![0usize; m + 1];
    canonical(m, 0, 0, &mut values, &mut counts, &mut by_blocks);
    let mut total = BigUint::zero();
    for (k, &c) in by_blocks.iter().enumerate() {
        if c > 0 && k <= n {
            total += falling_factorial(n, k) * BigUint::from(c);
        }
    }
    Ok(total)
}

fn canonical(
    m: usize,
    pos: usize,
    used: usize,
    values: &mut [usize],
    counts: &mut [usize],
    by_blocks: &mut [u64],
) {
    let total = 2 * m;
    if pos == total {
        if counts[..used].iter().all(|&c| c >= 2) {
            by_blocks[used] += 1;
        }
        return;
    }
    let singles = counts[..used].iter().filter(|&&c| c == 1).count();
    let remaining = total - pos - 1;
    let top = if used < m { used + 1 } else { used };
    for v in 0..top {
        if pos % 2 == 1 && values[pos - 1] == v {
            continue;
        }
        let after = match counts[v] {
            0 => singles + 1,
            1 => singles - 1,
            _ => singles,
        };
        if after > remaining {
            continue;
        }
        counts[v] += 1;
        values[pos] = v;
        canonical(m, pos + 1, used.max(v + 1), values, counts, by_blocks);
        counts[v] -= 1;
    }
}

pub fn falling_factorial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    (n - k + 1..=n).fold(BigUint::one(), |acc, x| acc * BigUint::from(x))
}

pub fn factorial(n: usize) -> BigUint {
    falling_factorial(n, n)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundCase {
    /// `m ≤ N`: Stirling sum and `(C₀N)^m m!`.
    Small,
    /// `m > N`: `N^{2m}` and `(eN)^m m!`.
    Large,
}

/// The chain `exact ≤ middle ≤ outer`, all exact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundReport {
    pub m: usize,
    pub n: usize,
    pub case: BoundCase,
    pub exact: BigUint,
    /// `Σ_k N!/(N−k)! S₂(2m,k)` or `N^{2m}`.
    pub middle: BigUint,
    /// `(8N)^m m!`, or the integer part of `(2.718 N)^m m!`, which lies
    /// below `(eN)^m m!`.
    pub outer: BigUint,
}

impl BoundReport {
    pub fn holds(&self) -> bool {
        self.exact <= self.middle && self.middle <= self.outer
    }

    /// `exact / ((C₀N)^m m!)`.
    pub fn c0_ratio(&self) -> f64 {
        let denom = c0_bound(self.m, self.n);
        self.exact.to_f64().unwrap_or(f64::INFINITY) / denom.to_f64().unwrap_or(f64::INFINITY)
    }
}

/// `(C₀N)^m m!` with `C₀ = 8`.
pub fn c0_bound(m: usize, n: usize) -> BigUint {
    BigUint::from(C0 as u64 * n as u64).pow(m as u32) * factorial(m)
}

pub fn stirling_sum(m: usize, n: usize) -> BigUint {
    let table = StirlingTable::new(2 * m, m);
    (1..=m.min(n))
        .map(|k| falling_factorial(n, k) * table.get(2 * m, k).cloned().unwrap_or_default())
        .sum()
}

pub fn bound_check(m: usize, n: usize, cap: u128) -> Result<BoundReport> {
    let exact = count_i(m, n, cap)?;
    let (case, middle, outer) = if m <= n {
        (BoundCase::Small, stirling_sum(m, n), c0_bound(m, n))
    } else {
        let middle = BigUint::from(n).pow(2 * m as u32);
        let outer = BigUint::from(E_NUM as u64 * n as u64).pow(m as u32) * factorial(m)
            / BigUint::from(E_DEN).pow(m as u32);
        (BoundCase::Large, middle, outer)
    };
    Ok(BoundReport {
        m,
        n,
        case,
        exact,
        middle,
        outer,
    })
}

/// `Σ_{m≥0} (2C₀cλ)^m`, summed term by term until the tail is below
/// machine precision.
pub fn geometric_partition_sum(c_norm: f64, lambda: f64) -> Result<f64> {
    if !(c_norm > 0.0) || !(lambda > 0.0) || !c_norm.is_finite() || !lambda.is_finite() {
        return Err(argument("c_norm and lambda must be positive and finite"));
    }
    let ratio = 2.0 * C0 * c_norm * lambda;
    if ratio >= 1.0 {
        return Err(Error::Divergent { ratio });
    }
    let mut sum = 0.0;
    let mut term = 1.0;
    while term > f64::EPSILON * sum * (1.0 - ratio) || sum == 0.0 {
        sum += term;
        term *= ratio;
        if term == 0.0 {
            break;
        }
    }
    Ok(sum)
}

/// The geometric sum at `λ = (4C₀c)⁻¹`.
pub fn series_log2_check(c_norm: f64) -> Result<f64> {
    if !(c_norm > 0.0) {
        return Err(argument("c_norm must be positive"));
    }
    geometric_partition_sum(c_norm, 1.0 / (4.0 * C0 * c_norm))
}
