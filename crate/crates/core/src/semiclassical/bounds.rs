use alloc::vec::Vec;
use core::f64::consts::LN_2;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{argument, Error, Result};
use crate::fluctuation::C0;

/// Search interval for `ħ_T`.
pub const HBAR_BRACKET: (f64, f64) = (1e-12, 1e6);

/// Required `|f − g|/g` at the crossing.
pub const CROSSING_TOL: f64 = 1e-10;

/// Primary constants of the entropy and Wasserstein bounds. `Λ`, `C` and
/// the `M` coefficients are always derived from these.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundParams {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub horizon: f64,
    pub n: f64,
    pub k: f64,
    pub d: f64,
    pub phi_sup: f64,
    pub grad_phi_sup: f64,
    pub lip_grad_phi: f64,
}

impl BoundParams {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.c0,
            self.c1,
            self.c2,
            self.horizon,
            self.n,
            self.k,
            self.d,
            self.phi_sup,
            self.grad_phi_sup,
            self.lip_grad_phi,
        ];
        if all.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
            return Err(argument("bound parameters must be positive and finite"));
        }
        Ok(())
    }

    /// Small potential on a short horizon for which every sampled `N` in
    /// `10⁴..10¹²` lies in the large-`N` regime.
    pub fn reference() -> Self {
        Self {
            c0: C0,
            c1: 0.05,
            c2: 0.05,
            horizon: 0.5,
            n: 1e6,
            k: 1.0,
            d: 1.0,
            phi_sup: 0.5,
            grad_phi_sup: 0.5,
            lip_grad_phi: 0.3,
        }
    }

    pub fn with_n(self, n: f64) -> Self {
        Self { n, ..self }
    }

    /// `Λ = 3 + 4 Lip(∇Φ)²`.
    pub fn lambda(&self) -> f64 {
        3.0 + 4.0 * self.lip_grad_phi * self.lip_grad_phi
    }

    /// `C = 8‖∇Φ‖/Λ`.
    pub fn c(&self) -> f64 {
        8.0 * self.grad_phi_sup / self.lambda()
    }

    pub fn m0(&self) -> f64 {
        16.0 * self.c0 * self.c2 * self.phi_sup * self.horizon
    }

    pub fn m1(&self) -> f64 {
        8.0 * self.c0 * self.c1 * self.grad_phi_sup
    }

    pub fn m2(&self) -> f64 {
        16.0 * self.c0 * self.c1 * self.grad_phi_sup * self.phi_sup * self.horizon
    }

    pub fn log_f(&self, hbar: f64, t: f64) -> f64 {
        (self.k * LN_2 / self.n).ln()
            + self.m0() * t
            + self.m1() * t / hbar
            + self.m2() * t / (hbar * hbar)
    }

    /// `(k log 2/N) exp(M⁰t + M¹t/ħ + M²t/ħ²)`; `+∞` past overflow.
    pub fn f(&self, hbar: f64, t: f64) -> f64 {
        self.log_f(hbar, t).exp()
    }

    /// `2kd(e^{Λt} + 1)ħ + kCe^{Λt}/N`.
    pub fn g(&self, hbar: f64, t: f64) -> f64 {
        let e = (self.lambda() * t).exp();
        2.0 * self.k * self.d * (e + 1.0) * hbar + self.k * self.c() * e / self.n
    }

    fn gap(&self, log_hbar: f64, t: f64) -> f64 {
        let hbar = log_hbar.exp();
        self.log_f(hbar, t) - self.g(hbar, t).ln()
    }

    /// `√(2M²T / log N)`.
    pub fn sqrt_scale(&self) -> f64 {
        (2.0 * self.m2() * self.horizon / self.n.ln()).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    pub hbar: f64,
    pub f: f64,
    pub g: f64,
    /// `|f − g|/g`.
    pub relative_defect: f64,
    pub iterations: usize,
}

/// The unique `ħ` with `f(ħ, t) = g(ħ, t)`, by bisection on `log ħ`.
pub fn solve_hbar_crossing(p: &BoundParams, t: f64) -> Result<Crossing> {
    p.validate()?;
    if !(t > 0.0) || !t.is_finite() {
        return Err(argument("crossing needs t > 0"));
    }
    let (mut lo, mut hi) = (HBAR_BRACKET.0.ln(), HBAR_BRACKET.1.ln());
    if !(p.gap(lo, t) > 0.0) || !(p.gap(hi, t) < 0.0) {
        return Err(Error::NoBracket {
            lo: HBAR_BRACKET.0,
            hi: HBAR_BRACKET.1,
        });
    }
    let mut iterations = 0;
    let mut mid = 0.5 * (lo + hi);
    while iterations < 400 {
        iterations += 1;
        mid = 0.5 * (lo + hi);
        let h = p.gap(mid, t);
        if h.exp_m1().abs() < 0.01 * CROSSING_TOL || hi - lo < 1e-15 {
            break;
        }
        if h > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let hbar = mid.exp();
    let relative_defect = p.gap(mid, t).exp_m1().abs();
    if relative_defect >= CROSSING_TOL {
        return Err(Error::Convergence {
            nodes: iterations,
            defect: relative_defect,
        });
    }
    Ok(Crossing {
        hbar,
        f: p.f(hbar, t),
        g: p.g(hbar, t),
        relative_defect,
        iterations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Monotonicity {
    /// `∂_ħ log f < 0` at every sample.
    pub f_decreasing: bool,
    /// `∂_ħ g > 0` at every sample.
    pub g_increasing: bool,
    /// Sign changes of `log f − log g` across the samples.
    pub sign_changes: usize,
}

impl Monotonicity {
    pub fn holds(&self) -> bool {
        self.f_decreasing && self.g_increasing && self.sign_changes == 1
    }
}

/// Samples the `ħ`-derivatives of `log f` and `g` on a log-uniform grid of
/// the bracket.
pub fn monotonicity_check(p: &BoundParams, t: f64, samples: usize) -> Result<Monotonicity> {
    p.validate()?;
    if !(t > 0.0) || samples < 2 {
        return Err(argument("need t > 0 and at least two samples"));
    }
    let (a, b) = (HBAR_BRACKET.0.ln(), HBAR_BRACKET.1.ln());
    let g_slope = 2.0 * p.k * p.d * ((p.lambda() * t).exp() + 1.0);
    let mut f_decreasing = true;
    let mut g_increasing = true;
    let mut sign_changes = 0;
    let mut last_sign = None;
    for s in 0..samples {
        let x = a + (b - a) * s as f64 / (samples - 1) as f64;
        let hbar = x.exp();
        let dlogf = -p.m1() * t / (hbar * hbar) - 2.0 * p.m2() * t / (hbar * hbar * hbar);
        f_decreasing &= dlogf < 0.0;
        g_increasing &= g_slope > 0.0;
        let sign = p.gap(x, t) > 0.0;
        if let Some(prev) = last_sign {
            sign_changes += (prev != sign) as usize;
        }
        last_sign = Some(sign);
    }
    Ok(Monotonicity {
        f_decreasing,
        g_increasing,
        sign_changes,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeRow {
    pub n: f64,
    pub hbar_t: f64,
    /// `f(ħ_T, T) = g(ħ_T, T)`.
    pub value: f64,
    /// `√(2M²T / log N)`.
    pub hbar_sqrt: f64,
    /// `min(f, g)` at `hbar_sqrt`.
    pub min_at_sqrt: f64,
    /// `g` at `hbar_sqrt`.
    pub g_at_sqrt: f64,
    /// `value · √(log N)`.
    pub scaled: f64,
}

impl EnvelopeRow {
    /// `ħ_T < √(2M²T/log N)` and the envelope lies below `g` there.
    pub fn holds(&self) -> bool {
        self.hbar_t < self.hbar_sqrt && self.value <= self.g_at_sqrt
    }
}

/// Crossing value and the explicit `√(log N)` comparison at each `N`.
pub fn uniform_envelope(p: &BoundParams, n_grid: &[f64]) -> Result<Vec<EnvelopeRow>> {
    let t = p.horizon;
    n_grid
        .iter()
        .map(|&n| {
            if !(n > 1.0) {
                return Err(argument("N must exceed 1"));
            }
            let q = p.with_n(n);
            let crossing = solve_hbar_crossing(&q, t)?;
            let hbar_sqrt = q.sqrt_scale();
            let g_at_sqrt = q.g(hbar_sqrt, t);
            Ok(EnvelopeRow {
                n,
                hbar_t: crossing.hbar,
                value: crossing.g,
                hbar_sqrt,
                min_at_sqrt: q.f(hbar_sqrt, t).min(g_at_sqrt),
                g_at_sqrt,
                scaled: crossing.g * n.ln().sqrt(),
            })
        })
        .collect()
}
