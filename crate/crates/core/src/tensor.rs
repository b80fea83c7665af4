//! Bookkeeping on `𝔥^{⊗N}`: leg embeddings, marginals, tensor powers and
//! permutation symmetry.
//!
//! Product basis vectors are indexed in mixed radix `d` with leg 1 as the
//! most significant digit, so `|x₁ … x_N⟩ ↦ Σ_l x_l d^{N−l}`. Legs are
//! numbered from 1.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{argument, Error, Result};
use crate::linalg::{ensure_square, operator_norm, CMatrix, Hermitian};

/// Default upper bound on `d^N`.
pub const DEFAULT_DIM_CAP: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ManyBodySpace {
    site_dim: usize,
    legs: usize,
    total_dim: usize,
    cap: usize,
}

impl ManyBodySpace {
    pub fn new(site_dim: usize, legs: usize) -> Result<Self> {
        Self::with_cap(site_dim, legs, DEFAULT_DIM_CAP)
    }

    pub fn with_cap(site_dim: usize, legs: usize, cap: usize) -> Result<Self> {
        if site_dim == 0 || legs == 0 {
            return Err(argument("site dimension and leg count must be positive"));
        }
        let mut total = 1usize;
        for _ in 0..legs {
            total = match total.checked_mul(site_dim) {
                Some(t) if t <= cap => t,
                _ => {
                    return Err(Error::CapExceeded {
                        dim: site_dim.saturating_pow(legs as u32),
                        cap,
                    })
                }
            };
        }
        Ok(Self {
            site_dim,
            legs,
            total_dim: total,
            cap,
        })
    }

    pub fn site_dim(&self) -> usize {
        self.site_dim
    }

    pub fn legs(&self) -> usize {
        self.legs
    }

    pub fn total_dim(&self) -> usize {
        self.total_dim
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    /// Place value of leg `l` (1-based) in the mixed-radix index.
    pub fn stride(&self, leg: usize) -> usize {
        self.site_dim.pow((self.legs - leg) as u32)
    }

    /// Digit of basis index `x` on leg `l`.
    pub fn digit(&self, x: usize, leg: usize) -> usize {
        (x / self.stride(leg)) % self.site_dim
    }

    pub fn check_leg(&self, leg: usize) -> Result<()> {
        if leg == 0 || leg > self.legs {
            return Err(argument(alloc::format!(
                "leg {leg} outside 1..={}",
                self.legs
            )));
        }
        Ok(())
    }

    fn check_operator(&self, m: &CMatrix, legs: u32) -> Result<()> {
        let n = ensure_square(m)?;
        let expected = self.site_dim.pow(legs);
        if n != expected {
            return Err(Error::DimensionMismatch { expected, found: n });
        }
        Ok(())
    }

    fn check_state(&self, m: &CMatrix) -> Result<()> {
        self.check_operator(m, self.legs as u32)
    }
}

/// A bijection of `{1..N}` given by its images.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &i in &images {
            if i == 0 || i > n || seen[i - 1] {
                return Err(argument("images do not form a permutation of 1..=N"));
            }
            seen[i - 1] = true;
        }
        Ok(Self { images })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            images: (1..=n).collect(),
        }
    }

    /// The transposition exchanging legs `i` and `j`.
    pub fn transposition(n: usize, i: usize, j: usize) -> Result<Self> {
        if i == 0 || j == 0 || i > n || j > n {
            return Err(argument("transposition leg out of range"));
        }
        let mut images: Vec<usize> = (1..=n).collect();
        images.swap(i - 1, j - 1);
        Ok(Self { images })
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    /// All `n!` permutations in lexicographic order of images.
    pub fn all(n: usize) -> Vec<Permutation> {
        let mut out = Vec::new();
        let mut current: Vec<usize> = (1..=n).collect();
        loop {
            out.push(Permutation {
                images: current.clone(),
            });
            // next lexicographic permutation
            let Some(i) = (1..n).rev().find(|&i| current[i - 1] < current[i]) else {
                break;
            };
            let j = (i..n).rev().find(|&j| current[j] > current[i - 1]).unwrap();
            current.swap(i - 1, j);
            current[i..].reverse();
        }
        out
    }
}

/// `U_π` maps `|b₁…b_N⟩` to the basis vector whose leg `l` carries
/// `b_{π(l)}`; returns `σ` with `U_π e_{σ(x)} = e_x`.
fn source_index(pi: &Permutation, space: &ManyBodySpace) -> Vec<usize> {
    let n = space.legs;
    (0..space.total_dim)
        .map(|x| {
            let mut b = 0;
            for l in 1..=n {
                b += space.digit(x, l) * space.stride(pi.images[l - 1]);
            }
            b
        })
        .collect()
}

pub fn permutation_unitary(pi: &Permutation, space: &ManyBodySpace) -> Result<CMatrix> {
    if pi.len() != space.legs {
        return Err(Error::DimensionMismatch {
            expected: space.legs,
            found: pi.len(),
        });
    }
    let n = space.total_dim;
    let sigma = source_index(pi, space);
    let mut u = CMatrix::zeros(n, n);
    for (x, &b) in sigma.iter().enumerate() {
        u[(x, b)] = Complex64::new(1.0, 0.0);
    }
    Ok(u)
}

/// `U_π Γ U_π*` by index relabelling.
pub fn conjugate_by_permutation(
    gamma: &CMatrix,
    pi: &Permutation,
    space: &ManyBodySpace,
) -> Result<CMatrix> {
    space.check_state(gamma)?;
    if pi.len() != space.legs {
        return Err(Error::DimensionMismatch {
            expected: space.legs,
            found: pi.len(),
        });
    }
    let sigma = source_index(pi, space);
    let n = space.total_dim;
    Ok(CMatrix::from_fn(n, n, |x, y| gamma[(sigma[x], sigma[y])]))
}

/// `1^{⊗(j−1)} ⊗ A ⊗ 1^{⊗(N−j)}`.
pub fn embed_one_body(a: &CMatrix, leg: usize, space: &ManyBodySpace) -> Result<CMatrix> {
    space.check_operator(a, 1)?;
    space.check_leg(leg)?;
    let n = space.total_dim;
    let d = space.site_dim;
    let s = space.stride(leg);
    let mut out = CMatrix::zeros(n, n);
    for x in 0..n {
        let xd = space.digit(x, leg);
        let base = x - xd * s;
        for b in 0..d {
            out[(x, base + b * s)] = a[(xd, b)];
        }
    }
    Ok(out)
}

/// Two-body operator on legs `(i, j)`. The first tensor factor of `W` acts
/// on leg `i`, so `(i, j)` with `i > j` is the placement of `SWS` on `(j, i)`.
pub fn embed_two_body(w: &CMatrix, i: usize, j: usize, space: &ManyBodySpace) -> Result<CMatrix> {
    space.check_operator(w, 2)?;
    space.check_leg(i)?;
    space.check_leg(j)?;
    if i == j {
        return Err(argument("two-body embedding needs distinct legs"));
    }
    let n = space.total_dim;
    let d = space.site_dim;
    let (si, sj) = (space.stride(i), space.stride(j));
    let mut out = CMatrix::zeros(n, n);
    for x in 0..n {
        let (xi, xj) = (space.digit(x, i), space.digit(x, j));
        let base = x - xi * si - xj * sj;
        let row = xi * d + xj;
        for a in 0..d {
            for b in 0..d {
                out[(x, base + a * si + b * sj)] = w[(row, a * d + b)];
            }
        }
    }
    Ok(out)
}

/// Marginal on the legs in `keep`, returned with those legs in ascending
/// order.
pub fn partial_trace(gamma: &CMatrix, keep: &[usize], space: &ManyBodySpace) -> Result<CMatrix> {
    space.check_state(gamma)?;
    if keep.is_empty() {
        return Err(argument("partial trace needs at least one kept leg"));
    }
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    for w in kept.windows(2) {
        if w[0] == w[1] {
            return Err(argument("kept legs must be distinct"));
        }
    }
    for &l in &kept {
        space.check_leg(l)?;
    }
    let traced: Vec<usize> = (1..=space.legs).filter(|l| !kept.contains(l)).collect();
    let kept_offsets = offsets(&kept, space);
    let traced_offsets = offsets(&traced, space);
    let m = kept_offsets.len();
    let mut out = CMatrix::zeros(m, m);
    for (a, &oa) in kept_offsets.iter().enumerate() {
        for (b, &ob) in kept_offsets.iter().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for &t in &traced_offsets {
                acc += gamma[(oa + t, ob + t)];
            }
            out[(a, b)] = acc;
        }
    }
    Ok(out)
}

/// Full-space index offsets of every assignment of digits to `legs`, in the
/// mixed-radix order of `legs` itself.
fn offsets(legs: &[usize], space: &ManyBodySpace) -> Vec<usize> {
    let mut out = vec![0usize];
    for &l in legs {
        let s = space.stride(l);
        out = out
            .iter()
            .flat_map(|&o| (0..space.site_dim).map(move |b| o + b * s))
            .collect();
    }
    out
}

/// `γ^{⊗N}`.
pub fn tensor_power(gamma: &CMatrix, space: &ManyBodySpace) -> Result<CMatrix> {
    space.check_operator(gamma, 1)?;
    let mut out = gamma.clone();
    for _ in 1..space.legs {
        out = out.kronecker(gamma);
    }
    Ok(out)
}

/// `‖SWS − W‖_op` for the swap `S` on `d ⊗ d`.
pub fn flip_symmetry_defect(w: &CMatrix) -> Result<f64> {
    Ok(operator_norm(&(flip_conjugate(w)? - w)))
}

/// `SWS` for the swap `S` on `d ⊗ d`.
pub fn flip_conjugate(w: &CMatrix) -> Result<CMatrix> {
    let n = ensure_square(w)?;
    let d = (n as f64).sqrt().round() as usize;
    if d * d != n {
        return Err(argument("two-body operator dimension is not a square"));
    }
    let swap = |r: usize| (r % d) * d + r / d;
    Ok(CMatrix::from_fn(n, n, |r, c| w[(swap(r), swap(c))]))
}

/// `max_{i<j} ‖U_{(ij)} Γ U_{(ij)}* − Γ‖_op`.
pub fn symmetry_defect(gamma: &CMatrix, space: &ManyBodySpace) -> Result<f64> {
    space.check_state(gamma)?;
    let mut worst: f64 = 0.0;
    for i in 1..=space.legs {
        for j in i + 1..=space.legs {
            let pi = Permutation::transposition(space.legs, i, j)?;
            let moved = conjugate_by_permutation(gamma, &pi, space)?;
            worst = worst.max(operator_norm(&(moved - gamma)));
        }
    }
    Ok(worst)
}

pub fn is_symmetric_state(gamma: &CMatrix, space: &ManyBodySpace, tol: f64) -> Result<bool> {
    Ok(symmetry_defect(gamma, space)? <= tol)
}

/// Average of `U_π Γ U_π*` over the symmetric group.
pub fn symmetrize(gamma: &CMatrix, space: &ManyBodySpace) -> Result<Hermitian> {
    space.check_state(gamma)?;
    let perms = Permutation::all(space.legs);
    let mut acc = CMatrix::zeros(space.total_dim, space.total_dim);
    for pi in &perms {
        acc += conjugate_by_permutation(gamma, pi, space)?;
    }
    Ok(Hermitian::hermitize(
        &(acc / Complex64::new(perms.len() as f64, 0.0)),
    ))
}
