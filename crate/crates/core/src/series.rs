//! Exponentially damped Fourier series standing in for generalized functions.
//!
//! A divergent sum `Σ a_n e^{inθ}` is given meaning as the `ε → 0` limit of
//! `Σ a_n e^{-|n|ε} e^{inθ}`. The routines here evaluate the damped series at
//! finite `ε`, in closed form where one exists.

use std::f64::consts::PI;

use crate::error::{PhaseError, Result};
use crate::modes::Complex;

/// Terms are summed until the damping factor falls below this.
pub const DAMPING_FLOOR: f64 = 1e-16;

/// Upper limit on the automatically chosen truncation.
pub const MAX_TERMS: u64 = 10_000_000;

/// Damping and truncation used in one regularized sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesRegularization {
    pub epsilon: f64,
    pub n_max: u64,
    /// Magnitude of the last retained term.
    pub convergence_estimate: f64,
}

impl SeriesRegularization {
    /// Truncation with `e^{-n_max ε} < 10⁻¹⁶`, capped at `MAX_TERMS`.
    pub fn auto(epsilon: f64) -> Result<Self> {
        check_epsilon(epsilon)?;
        let n = (-DAMPING_FLOOR.ln() / epsilon).ceil();
        let n_max = if n >= MAX_TERMS as f64 { MAX_TERMS } else { n as u64 };
        Ok(Self {
            epsilon,
            n_max,
            convergence_estimate: (-(n_max as f64) * epsilon).exp(),
        })
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon.is_finite() {
        Ok(())
    } else {
        Err(PhaseError::invalid(format!(
            "damping epsilon must be positive and finite, got {epsilon}"
        )))
    }
}

/// `(1 - e^{-ε})² + 4 e^{-ε} sin²(θ/2)`, i.e. `|1 - e^{-ε+iθ}|²` without cancellation.
fn one_minus_z_sq(theta: f64, epsilon: f64) -> f64 {
    let a = -(-epsilon).exp_m1();
    let s = (0.5 * theta).sin();
    a * a + 4.0 * (-epsilon).exp() * s * s
}

/// `Σ_n e^{-|n|ε} e^{inθ}`, a periodic delta function of unit mass under `dθ/2π`.
pub fn poisson_kernel(theta: f64, epsilon: f64) -> Result<f64> {
    check_epsilon(epsilon)?;
    Ok(-(-2.0 * epsilon).exp_m1() / one_minus_z_sq(theta, epsilon))
}

/// The same kernel summed term by term up to `n_max`.
pub fn poisson_kernel_damped(theta: f64, epsilon: f64, n_max: Option<u64>) -> Result<f64> {
    let reg = SeriesRegularization::auto(epsilon)?;
    let n_max = n_max.unwrap_or(reg.n_max);
    let mut acc = 0.0;
    for n in (1..=n_max).rev() {
        let nf = n as f64;
        acc += 2.0 * (-nf * epsilon).exp() * (nf * theta).cos();
    }
    Ok(1.0 + acc)
}

/// `Σ_{n≥1} 2 e^{-nε} sin nθ`, tending to `cot(θ/2)` away from `θ = 0`.
pub fn sine_cot_sum(theta: f64, epsilon: f64) -> Result<f64> {
    check_epsilon(epsilon)?;
    let q = (-epsilon).exp();
    Ok(2.0 * q * theta.sin() / one_minus_z_sq(theta, epsilon))
}

/// Which indices a regularized sum runs over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SumRange {
    All,
    NonNegative,
    Positive,
}

/// `Σ rule(n) e^{-|n|ε} e^{inθ}` over `range` with the automatic truncation.
///
/// Fails when the retained terms are not decaying by the end of the sum,
/// which happens when the rule grows faster than the damping.
pub fn regularized_sum<F>(rule: F, range: SumRange, theta: f64, epsilon: f64) -> Result<(Complex, SeriesRegularization)>
where
    F: Fn(i64) -> Complex,
{
    let mut reg = SeriesRegularization::auto(epsilon)?;
    let n_max = reg.n_max as i64;
    let term = |n: i64| {
        let nf = n as f64;
        rule(n) * Complex::from_polar((-nf.abs() * epsilon).exp(), nf * theta)
    };
    let (lo, hi) = match range {
        SumRange::All => (-n_max, n_max),
        SumRange::NonNegative => (0, n_max),
        SumRange::Positive => (1, n_max),
    };
    // smallest terms first
    let mut acc = Complex::new(0.0, 0.0);
    for k in (0..=n_max).rev() {
        if k >= lo && k <= hi {
            acc += term(k);
        }
        if k > 0 && -k >= lo {
            acc += term(-k);
        }
    }
    let last = term(hi).norm().max(if lo < 0 { term(lo).norm() } else { 0.0 });
    let mid = term(hi / 2).norm().max(if lo < 0 { term(lo / 2).norm() } else { 0.0 });
    if !last.is_finite() || !acc.re.is_finite() || !acc.im.is_finite() || (last > 0.0 && last >= mid) {
        return Err(PhaseError::Convergence(format!(
            "terms do not decay under damping {epsilon}: |a_n| e^(-n eps) is {last:e} at n = {hi}"
        )));
    }
    reg.convergence_estimate = last;
    Ok((acc, reg))
}

/// Bilinear kernels of the oscillator phase bases.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelFamily {
    SgCosine,
    NonnegPhase,
    Z2Cosine,
    HalfSine,
}

impl KernelFamily {
    pub fn as_str(&self) -> &'static str {
        match self {
            KernelFamily::SgCosine => "sg_cosine",
            KernelFamily::NonnegPhase => "nonneg_phase",
            KernelFamily::Z2Cosine => "z2_cosine",
            KernelFamily::HalfSine => "half_sine",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "sg_cosine" => Ok(KernelFamily::SgCosine),
            "nonneg_phase" => Ok(KernelFamily::NonnegPhase),
            "z2_cosine" => Ok(KernelFamily::Z2Cosine),
            "half_sine" => Ok(KernelFamily::HalfSine),
            _ => Err(PhaseError::invalid(format!("unknown kernel family {s:?}"))),
        }
    }
}

/// `Σ_{n≥0} e^{(n+½)(-ε+ix)}` real part, doubled: the half-integer analogue
/// of the Poisson kernel.
fn half_poisson(x: f64, epsilon: f64) -> f64 {
    let z = Complex::from_polar((-epsilon).exp(), x);
    let h = Complex::from_polar((-0.5 * epsilon).exp(), 0.5 * x);
    2.0 * (h / (Complex::new(1.0, 0.0) - z)).re
}

/// Damped completeness kernel `K(θ, φ)` of a basis family.
///
/// The real families are normalized so the kernel approaches
/// `δ(θ-φ) ∓ δ(θ+φ)` with `δ` of unit mass under `dθ/2π`:
///
/// * `sg_cosine`: `P_ε(θ-φ) - P_ε(θ+φ)`
/// * `z2_cosine`: `P_ε(θ-φ) + P_ε(θ+φ)`
/// * `half_sine`: the same difference built on half-integer modes
/// * `nonneg_phase`: `Σ_{n≥0} e^{-nε} e^{in(θ-φ)}`, approaching
///   `½δ(θ-φ) + ½ + (i/2) cot((θ-φ)/2)`
pub fn overlap_kernel(family: KernelFamily, theta: f64, phi: f64, epsilon: f64) -> Result<Complex> {
    check_epsilon(epsilon)?;
    let in_half_circle = |x: f64| (0.0..=PI).contains(&x);
    match family {
        KernelFamily::NonnegPhase => {
            if !(theta.is_finite() && phi.is_finite()) {
                return Err(PhaseError::invalid("kernel angles must be finite"));
            }
            let z = Complex::from_polar((-epsilon).exp(), theta - phi);
            Ok(Complex::new(1.0, 0.0) / (Complex::new(1.0, 0.0) - z))
        }
        _ if !(in_half_circle(theta) && in_half_circle(phi)) => Err(PhaseError::invalid(format!(
            "{} kernel is defined for angles in [0, pi], got ({theta}, {phi})",
            family.as_str()
        ))),
        KernelFamily::SgCosine => Ok(Complex::new(
            poisson_kernel(theta - phi, epsilon)? - poisson_kernel(theta + phi, epsilon)?,
            0.0,
        )),
        KernelFamily::Z2Cosine => Ok(Complex::new(
            poisson_kernel(theta - phi, epsilon)? + poisson_kernel(theta + phi, epsilon)?,
            0.0,
        )),
        KernelFamily::HalfSine => Ok(Complex::new(
            half_poisson(theta - phi, epsilon) - half_poisson(theta + phi, epsilon),
            0.0,
        )),
    }
}
