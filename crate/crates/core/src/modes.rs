//! States as Fourier-mode expansions `Ψ(θ) = Σ c_l e^{ilθ}` and phase densities.
//!
//! Every constructor uses the same sign convention: a packet peaked at `β`
//! carries coefficients proportional to `e^{-ilβ}`. Infinite series are cut
//! where the discarded probability mass falls below the requested tail
//! tolerance, renormalized, and the discarded mass is kept as `tail_bound`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::error::{PhaseError, Result};

/// Complex amplitude type used throughout the crate.
pub type Complex = Complex64;

/// Default cap on the number of modes a constructor may allocate.
pub const DEFAULT_MODE_CAP: usize = 1_000_000;

/// Default tail tolerance for truncated infinite series.
pub const DEFAULT_TAIL_TOL: f64 = 1e-14;

/// Constructors guarantee `|Σ|c_l|² - 1|` below this.
pub const NORM_TOL: f64 = 1e-12;

/// Inputs to statistics routines are accepted as normalized within this.
pub const INPUT_NORM_TOL: f64 = 1e-10;

/// Truncation policy for states defined by infinite series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Truncation {
    pub tail_tol: f64,
    pub mode_cap: usize,
}

impl Default for Truncation {
    fn default() -> Self {
        Self {
            tail_tol: DEFAULT_TAIL_TOL,
            mode_cap: DEFAULT_MODE_CAP,
        }
    }
}

impl Truncation {
    pub fn new(tail_tol: f64) -> Self {
        Self {
            tail_tol,
            ..Self::default()
        }
    }

    pub fn with_mode_cap(mut self, mode_cap: usize) -> Self {
        self.mode_cap = mode_cap;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tail_tol > 0.0 && self.tail_tol <= 1e-6) {
            return Err(PhaseError::invalid(format!(
                "tail_tol must lie in (0, 1e-6], got {}",
                self.tail_tol
            )));
        }
        if self.mode_cap == 0 {
            return Err(PhaseError::invalid("mode_cap must be positive"));
        }
        Ok(())
    }
}

/// Complex Fourier coefficients on a contiguous mode range.
///
/// With `half_integer` set, storage index `l` stands for the mode `l + 1/2`
/// (the flux-threaded rotor with modes `±1/2, ±3/2, ...`).
#[derive(Debug, Clone, PartialEq)]
pub struct ModeExpansion {
    l_min: i64,
    coeffs: Vec<Complex>,
    half_integer: bool,
    tail_bound: f64,
}

impl ModeExpansion {
    /// Wraps explicit coefficients starting at `l_min`. No normalization is applied.
    pub fn new(l_min: i64, coeffs: Vec<Complex>, half_integer: bool) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(PhaseError::invalid("a mode expansion needs at least one coefficient"));
        }
        if let Some((i, c)) = coeffs
            .iter()
            .enumerate()
            .find(|(_, c)| !(c.re.is_finite() && c.im.is_finite()))
        {
            return Err(PhaseError::invalid(format!(
                "coefficient at index {i} is not finite: {c}"
            )));
        }
        if l_min.checked_add(coeffs.len() as i64).is_none() {
            return Err(PhaseError::invalid("mode range overflows"));
        }
        Ok(Self {
            l_min,
            coeffs,
            half_integer,
            tail_bound: 0.0,
        })
    }

    /// Sparse construction from `(l, c_l)` pairs; gaps are zero-filled.
    pub fn from_pairs(pairs: &[(i64, Complex)], half_integer: bool) -> Result<Self> {
        let lo = pairs
            .iter()
            .map(|p| p.0)
            .min()
            .ok_or_else(|| PhaseError::invalid("no coefficients given"))?;
        let hi = pairs.iter().map(|p| p.0).max().unwrap_or(lo);
        let span = hi - lo + 1;
        if span as u64 > DEFAULT_MODE_CAP as u64 {
            return Err(PhaseError::ModeCapExceeded {
                what: "explicit state",
                required: span as u64,
                cap: DEFAULT_MODE_CAP,
            });
        }
        let mut coeffs = vec![Complex::new(0.0, 0.0); span as usize];
        for &(l, c) in pairs {
            coeffs[(l - lo) as usize] += c;
        }
        Self::new(lo, coeffs, half_integer)
    }

    pub(crate) fn zero_at(l: i64, half_integer: bool) -> Self {
        Self {
            l_min: l,
            coeffs: vec![Complex::new(0.0, 0.0)],
            half_integer,
            tail_bound: 0.0,
        }
    }

    pub fn with_tail_bound(mut self, tail_bound: f64) -> Self {
        self.tail_bound = tail_bound;
        self
    }

    pub fn l_min(&self) -> i64 {
        self.l_min
    }

    pub fn l_max(&self) -> i64 {
        self.l_min + self.coeffs.len() as i64 - 1
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> &[Complex] {
        &self.coeffs
    }

    pub fn half_integer(&self) -> bool {
        self.half_integer
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    /// Physical value of the mode stored at offset `i`.
    pub fn mode(&self, i: usize) -> f64 {
        let l = (self.l_min + i as i64) as f64;
        if self.half_integer {
            l + 0.5
        } else {
            l
        }
    }

    /// Coefficient at storage index `l` (zero outside the range).
    pub fn coeff(&self, l: i64) -> Complex {
        let i = l - self.l_min;
        if i < 0 || i >= self.coeffs.len() as i64 {
            Complex::new(0.0, 0.0)
        } else {
            self.coeffs[i as usize]
        }
    }

    /// Iterator over `(mode value, coefficient)`.
    pub fn modes(&self) -> impl Iterator<Item = (f64, Complex)> + '_ {
        self.coeffs.iter().enumerate().map(move |(i, &c)| (self.mode(i), c))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= INPUT_NORM_TOL
    }

    pub(crate) fn require_normalized(&self, what: &str) -> Result<()> {
        let n = self.norm_sqr();
        if (n - 1.0).abs() <= INPUT_NORM_TOL {
            Ok(())
        } else {
            Err(PhaseError::invalid(format!(
                "{what} requires a normalized state, got squared norm {n}"
            )))
        }
    }

    /// Rescales to unit norm.
    pub fn normalized(mut self) -> Result<Self> {
        let n = self.norm_sqr().sqrt();
        if !(n > 0.0) {
            return Err(PhaseError::invalid("cannot normalize the zero vector"));
        }
        for c in &mut self.coeffs {
            *c /= n;
        }
        Ok(self)
    }

    /// Rotation by `phi` on the circle: `c_l -> c_l e^{-ilφ}`, so `Ψ(θ) -> Ψ(θ-φ)`.
    pub fn rotated(&self, phi: f64) -> Self {
        let mut out = self.clone();
        for (i, c) in out.coeffs.iter_mut().enumerate() {
            *c *= Complex::from_polar(1.0, -self.mode(i) * phi);
        }
        out
    }

    /// `Ψ(θ)`.
    pub fn eval(&self, theta: f64) -> Complex {
        self.modes().map(|(l, c)| c * Complex::from_polar(1.0, l * theta)).sum()
    }

    /// `|Ψ(θ)|²`.
    pub fn density(&self, theta: f64) -> f64 {
        self.eval(theta).norm_sqr()
    }

    /// Strips exactly-zero coefficients from both ends.
    pub(crate) fn trimmed(&self) -> Self {
        let first = self.coeffs.iter().position(|c| c.norm_sqr() > 0.0);
        let last = self.coeffs.iter().rposition(|c| c.norm_sqr() > 0.0);
        match (first, last) {
            (Some(a), Some(b)) => Self {
                l_min: self.l_min + a as i64,
                coeffs: self.coeffs[a..=b].to_vec(),
                half_integer: self.half_integer,
                tail_bound: self.tail_bound,
            },
            _ => Self::zero_at(0, self.half_integer),
        }
    }
}

fn cap_error(what: &'static str, required: u64, cap: usize) -> PhaseError {
    PhaseError::ModeCapExceeded { what, required, cap }
}

/// Angular-momentum eigenstate `e^{ilθ}`.
pub fn make_number_state(l: i64) -> Result<ModeExpansion> {
    make_number_state_capped(l, DEFAULT_MODE_CAP)
}

pub fn make_number_state_capped(l: i64, cap: usize) -> Result<ModeExpansion> {
    if l.unsigned_abs() > cap as u64 {
        return Err(PhaseError::invalid(format!(
            "|l| = {} exceeds the mode cap {cap}",
            l.unsigned_abs()
        )));
    }
    ModeExpansion::new(l, vec![Complex::new(1.0, 0.0)], false)
}

/// Normalized rotor packet `√tanh ε Σ e^{-|l|ε + il(θ-β)}`.
pub fn make_rotor_wavepacket(epsilon: f64, beta: f64, trunc: Truncation) -> Result<ModeExpansion> {
    trunc.validate()?;
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(PhaseError::invalid(format!("epsilon must be positive, got {epsilon}")));
    }
    if !beta.is_finite() {
        return Err(PhaseError::invalid("beta must be finite"));
    }
    // mass beyond |l| > L is 2 e^{-2(L+1)ε} / (1 + e^{-2ε})
    let q = (-2.0 * epsilon).exp();
    let tail = |big_l: f64| 2.0 * (-2.0 * (big_l + 1.0) * epsilon).exp() / (1.0 + q);
    let guess = ((2.0 / ((1.0 + q) * trunc.tail_tol)).ln() / (2.0 * epsilon) - 1.0).max(0.0);
    let mut big_l = guess.floor();
    while big_l > 0.0 && tail(big_l - 1.0) < trunc.tail_tol {
        big_l -= 1.0;
    }
    while tail(big_l) >= trunc.tail_tol {
        big_l += 1.0;
    }
    let required = 2.0 * big_l + 1.0;
    if required > trunc.mode_cap as f64 {
        return Err(cap_error("rotor wave packet", required as u64, trunc.mode_cap));
    }
    let big_l = big_l as i64;
    let amp = epsilon.tanh().sqrt();
    let coeffs = (-big_l..=big_l)
        .map(|l| {
            let lf = l as f64;
            Complex::from_polar(amp * (-lf.abs() * epsilon).exp(), -lf * beta)
        })
        .collect();
    let tb = tail(big_l as f64);
    Ok(ModeExpansion::new(-big_l, coeffs, false)?
        .normalized()?
        .with_tail_bound(tb))
}

/// `cos γ e^{ilθ} + sin γ e^{-iβ} e^{iLθ}` with `l ≠ L`.
pub fn make_two_mode_superposition(l: i64, big_l: i64, gamma: f64, beta: f64) -> Result<ModeExpansion> {
    if l == big_l {
        return Err(PhaseError::invalid(format!("the two modes must differ, both are {l}")));
    }
    if !(gamma.is_finite() && beta.is_finite()) {
        return Err(PhaseError::invalid("gamma and beta must be finite"));
    }
    let span = l.abs_diff(big_l) + 1;
    if span > DEFAULT_MODE_CAP as u64 {
        return Err(cap_error("two-mode superposition", span, DEFAULT_MODE_CAP));
    }
    let pairs = [
        (l, Complex::new(gamma.cos(), 0.0)),
        (big_l, Complex::from_polar(gamma.sin(), -beta)),
    ];
    ModeExpansion::from_pairs(&pairs, false)
}

/// Coherent phase state `√(1-|ζ|²) Σ_{n≥0} ζⁿ |n⟩`.
pub fn make_coherent_phase_state(zeta: Complex, trunc: Truncation) -> Result<ModeExpansion> {
    trunc.validate()?;
    let z = zeta.norm();
    if !(z < 1.0) || !zeta.re.is_finite() || !zeta.im.is_finite() {
        return Err(PhaseError::invalid(format!("|zeta| must be below 1, got {z}")));
    }
    if z == 0.0 {
        return ModeExpansion::new(0, vec![Complex::new(1.0, 0.0)], false);
    }
    let q = z * z;
    // keeping n = 0..count-1 leaves mass q^count
    let mut count = (trunc.tail_tol.ln() / q.ln()).ceil().max(1.0);
    while q.powf(count) >= trunc.tail_tol {
        count += 1.0;
    }
    if count > trunc.mode_cap as f64 {
        return Err(cap_error("coherent phase state", count as u64, trunc.mode_cap));
    }
    let amp = (1.0 - q).sqrt();
    let (ln_z, arg) = (z.ln(), zeta.arg());
    let coeffs = (0..count as usize)
        .map(|n| {
            let nf = n as f64;
            Complex::from_polar(amp * (nf * ln_z).exp(), nf * arg)
        })
        .collect();
    let tb = q.powf(count);
    Ok(ModeExpansion::new(0, coeffs, false)?.normalized()?.with_tail_bound(tb))
}

/// Oscillator coherent state `e^{-r²/2} Σ rⁿ/√n! e^{-inβ} |n⟩`.
pub fn make_coherent_state(r: f64, beta: f64, trunc: Truncation) -> Result<ModeExpansion> {
    trunc.validate()?;
    if !(r >= 0.0 && r.is_finite()) {
        return Err(PhaseError::invalid(format!(
            "r must be a finite non-negative number, got {r}"
        )));
    }
    if !beta.is_finite() {
        return Err(PhaseError::invalid("beta must be finite"));
    }
    if r == 0.0 {
        return ModeExpansion::new(0, vec![Complex::new(1.0, 0.0)], false);
    }
    let lam = r * r;
    let ln_r = r.ln();
    let mut ln_amp = Vec::new();
    let mut ln_fact = 0.0;
    let mut n = 0usize;
    let tail = loop {
        if n > 0 {
            ln_fact += (n as f64).ln();
        }
        let ln_c = -0.5 * lam + n as f64 * ln_r - 0.5 * ln_fact;
        ln_amp.push(ln_c);
        let nf = n as f64;
        if nf >= lam {
            // Σ_{k>n} p_k ≤ p_{n+1} / (1 - λ/(n+2))
            let ln_p_next = 2.0 * ln_c + lam.ln() - (nf + 1.0).ln();
            let ratio = lam / (nf + 2.0);
            let bound = ln_p_next.exp() / (1.0 - ratio);
            if bound < trunc.tail_tol {
                break bound;
            }
        }
        n += 1;
        if n >= trunc.mode_cap {
            return Err(cap_error("coherent state", (n + 1) as u64, trunc.mode_cap));
        }
    };
    let coeffs = ln_amp
        .iter()
        .enumerate()
        .map(|(n, &a)| Complex::from_polar(a.exp(), -(n as f64) * beta))
        .collect();
    Ok(ModeExpansion::new(0, coeffs, false)?
        .normalized()?
        .with_tail_bound(tail))
}

/// `Ψ(θ)` at each sample.
pub fn eval_wavefunction(state: &ModeExpansion, thetas: &[f64]) -> Vec<Complex> {
    thetas.iter().map(|&t| state.eval(t)).collect()
}

/// Result of dropping the negative modes.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub state: ModeExpansion,
    pub discarded_mass: f64,
}

/// Restriction to the physical (non-negative mode) subspace, without renormalizing.
pub fn project_nonnegative(state: &ModeExpansion) -> Projection {
    // storage index 0 is mode 0 (or 1/2 on the half-integer rotor)
    let first = state.l_min.max(0);
    let discarded_mass: f64 = state.modes().filter(|(m, _)| *m < 0.0).map(|(_, c)| c.norm_sqr()).sum();
    let out = if first > state.l_max() {
        ModeExpansion::zero_at(0, state.half_integer)
    } else {
        let a = (first - state.l_min) as usize;
        ModeExpansion {
            l_min: first,
            coeffs: state.coeffs[a..].to_vec(),
            half_integer: state.half_integer,
            tail_bound: state.tail_bound,
        }
    };
    Projection {
        state: out,
        discarded_mass,
    }
}

/// A constant-height arc `[start, end)` of a piecewise-constant density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc {
    pub start: f64,
    pub end: f64,
    pub height: f64,
}

impl Arc {
    pub fn len(&self) -> f64 {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.len() <= 0.0
    }

    fn contains(&self, theta: f64) -> bool {
        (theta - self.start).rem_euclid(TAU) < self.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DensityKind {
    FromModes,
    PiecewiseConstant,
}

#[derive(Debug, Clone, PartialEq)]
enum DensityRepr {
    Modes(ModeExpansion),
    Pieces(Vec<Arc>),
}

/// Normalized probability density on the circle, `∫ dθ/2π ρ = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseDensity {
    repr: DensityRepr,
}

impl PhaseDensity {
    /// Piecewise-constant density from non-overlapping arcs within one period.
    pub fn piecewise(arcs: Vec<Arc>) -> Result<Self> {
        if arcs.is_empty() {
            return Err(PhaseError::invalid("a piecewise density needs at least one arc"));
        }
        for a in &arcs {
            if !(a.start.is_finite() && a.end.is_finite() && a.height.is_finite()) {
                return Err(PhaseError::invalid("arc bounds and heights must be finite"));
            }
            if !(a.end > a.start) || a.len() > TAU + 1e-12 {
                return Err(PhaseError::invalid(format!(
                    "arc [{}, {}) must have positive length at most 2π",
                    a.start, a.end
                )));
            }
            if a.height < 0.0 {
                return Err(PhaseError::invalid(format!("negative arc height {}", a.height)));
            }
        }
        let mut sorted: Vec<(f64, f64)> = arcs.iter().map(|a| (a.start.rem_euclid(TAU), a.len())).collect();
        sorted.sort_by(|x, y| x.0.total_cmp(&y.0));
        for w in 0..sorted.len() {
            let (s, len) = sorted[w];
            let next = if w + 1 < sorted.len() {
                sorted[w + 1].0
            } else {
                sorted[0].0 + TAU
            };
            if sorted.len() > 1 && s + len > next + 1e-12 {
                return Err(PhaseError::invalid("arcs overlap"));
            }
        }
        let mass: f64 = arcs.iter().map(|a| a.height * a.len() / TAU).sum();
        if (mass - 1.0).abs() > NORM_TOL {
            return Err(PhaseError::invalid(format!(
                "piecewise density integrates to {mass}, not 1"
            )));
        }
        Ok(Self {
            repr: DensityRepr::Pieces(arcs),
        })
    }

    pub fn kind(&self) -> DensityKind {
        match self.repr {
            DensityRepr::Modes(_) => DensityKind::FromModes,
            DensityRepr::Pieces(_) => DensityKind::PiecewiseConstant,
        }
    }

    pub fn modes(&self) -> Option<&ModeExpansion> {
        match &self.repr {
            DensityRepr::Modes(m) => Some(m),
            DensityRepr::Pieces(_) => None,
        }
    }

    pub fn pieces(&self) -> Option<&[Arc]> {
        match &self.repr {
            DensityRepr::Modes(_) => None,
            DensityRepr::Pieces(p) => Some(p),
        }
    }

    /// `ρ(θ)`.
    pub fn eval(&self, theta: f64) -> f64 {
        match &self.repr {
            DensityRepr::Modes(m) => m.density(theta),
            DensityRepr::Pieces(p) => p.iter().filter(|a| a.contains(theta)).map(|a| a.height).sum(),
        }
    }
}

/// `|Ψ(θ)|²` as a density.
pub fn density_from_state(state: &ModeExpansion) -> Result<PhaseDensity> {
    state.require_normalized("density_from_state")?;
    Ok(PhaseDensity {
        repr: DensityRepr::Modes(state.clone()),
    })
}

/// Two diametrically opposite flat packets of width `δ` centred on `±π/2`.
pub fn make_two_peak_density(delta: f64) -> Result<PhaseDensity> {
    if !(delta > 0.0 && delta <= PI) {
        return Err(PhaseError::invalid(format!("delta must lie in (0, π], got {delta}")));
    }
    let h = PI / delta;
    PhaseDensity::piecewise(vec![
        Arc {
            start: PI / 2.0 - delta / 2.0,
            end: PI / 2.0 + delta / 2.0,
            height: h,
        },
        Arc {
            start: -PI / 2.0 - delta / 2.0,
            end: -PI / 2.0 + delta / 2.0,
            height: h,
        },
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    /// Closed-form packet amplitude with the `e^{-ε}` factor on the sin² term.
    fn packet_closed_form(theta: f64, eps: f64, beta: f64) -> f64 {
        let e1 = (-eps).exp();
        let e2 = (-2.0 * eps).exp();
        let pre = ((1.0 - e2).powi(3) / (1.0 + e2)).sqrt();
        let s = ((theta - beta) / 2.0).sin();
        pre / ((1.0 - e1).powi(2) + 4.0 * e1 * s * s)
    }

    #[test]
    fn number_state_basics() {
        let s = make_number_state(0).unwrap();
        assert_eq!(s.coeffs(), &[c(1.0, 0.0)]);
        let s3 = make_number_state(3).unwrap();
        for t in [-2.0, 0.0, 0.7, 3.0] {
            assert!((s3.density(t) - 1.0).abs() < 1e-15);
        }
        let v = s3.eval(PI / 2.0);
        let one = make_number_state(1).unwrap().eval(PI / 2.0);
        assert!((one - c(0.0, 1.0)).norm() < 1e-15);
        assert!((v.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn number_state_cap() {
        assert!(make_number_state(1_000_001).is_err());
        assert!(make_number_state_capped(11, 10).is_err());
        assert!(make_number_state(-1_000_000).is_ok());
    }

    #[test]
    fn wavepacket_matches_closed_form() {
        let eps = 0.5;
        let beta = 1.0;
        // pointwise agreement needs the amplitude tail, not just the mass, below tolerance
        let s = make_rotor_wavepacket(eps, beta, Truncation::new(1e-30)).unwrap();
        assert!((s.norm_sqr() - 1.0).abs() <= 1e-12);
        assert!(s.tail_bound() < 1e-30);
        for i in 0..200 {
            let t = -PI + TAU * i as f64 / 200.0;
            let direct = s.eval(t);
            let closed = packet_closed_form(t, eps, beta);
            assert!(direct.im.abs() < 1e-12);
            assert!((direct.re - closed).abs() < 1e-10, "t={t} {} {}", direct.re, closed);
        }
    }

    #[test]
    fn wavepacket_peak_at_beta() {
        let s = make_rotor_wavepacket(0.01, 0.0, Truncation::default()).unwrap();
        let peak = s.density(0.0);
        for i in (1..64).filter(|&i| i != 32) {
            let t = -PI + TAU * i as f64 / 64.0;
            assert!(s.density(t) < peak);
        }
    }

    #[test]
    fn wavepacket_edge_is_small() {
        // |Ψ(β+π)| = O(ε^{3/2})
        for eps in [1e-2, 1e-3] {
            let s = make_rotor_wavepacket(eps, 0.4, Truncation::default()).unwrap();
            let edge = s.eval(0.4 + PI).norm();
            assert!(edge < eps.powf(1.5), "eps={eps} edge={edge}");
        }
    }

    #[test]
    fn wavepacket_cap_names_required_modes() {
        let err = make_rotor_wavepacket(1e-6, 0.0, Truncation::default()).unwrap_err();
        match err {
            PhaseError::ModeCapExceeded { required, .. } => assert!(required > 1_000_000),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn two_mode_construction() {
        let s = make_two_mode_superposition(2, 5, 0.0, 0.3).unwrap();
        assert_eq!(s.trimmed(), make_number_state(2).unwrap());
        assert!(make_two_mode_superposition(1, 1, 0.2, 0.0).is_err());
        let s = make_two_mode_superposition(0, 1, PI / 4.0, 0.0).unwrap();
        for t in [0.0, 1.0, 2.5] {
            assert!((s.density(t) - (1.0 + t.cos())).abs() < 1e-14);
        }
    }

    #[test]
    fn coherent_phase_state_density_is_poisson_kernel() {
        let eps: f64 = 0.05;
        let beta = 0.8;
        let zeta = Complex::from_polar((-eps).exp(), -beta);
        let s = make_coherent_phase_state(zeta, Truncation::new(1e-30)).unwrap();
        assert_eq!(s.l_min(), 0);
        let r = (-eps).exp();
        for i in 0..100 {
            let t = -PI + TAU * i as f64 / 100.0;
            let closed = (1.0 - r * r) / (1.0 + r * r - 2.0 * r * (t - beta).cos());
            assert!((s.density(t) - closed).abs() < 1e-10);
        }
        assert_eq!(
            make_coherent_phase_state(c(0.0, 0.0), Truncation::default()).unwrap(),
            make_number_state(0).unwrap()
        );
        assert!(make_coherent_phase_state(c(1.0, 0.0), Truncation::default()).is_err());
    }

    #[test]
    fn coherent_state_tail_and_norm() {
        let s = make_coherent_state(5.0, 1.0, Truncation::default()).unwrap();
        assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        assert!(s.tail_bound() < 1e-14);
        // largest |c_n|² sits near n = r²
        let (imax, _) = s
            .coeffs()
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm_sqr().total_cmp(&b.1.norm_sqr()))
            .unwrap();
        assert!((24..=25).contains(&imax));
        for x in [0.05, 0.2, 0.9] {
            assert!((s.density(1.0 + x) - s.density(1.0 - x)).abs() < 1e-10);
        }
        assert_eq!(
            make_coherent_state(0.0, 0.3, Truncation::default()).unwrap(),
            make_number_state(0).unwrap()
        );
    }

    #[test]
    fn truncation_validation() {
        assert!(make_rotor_wavepacket(0.1, 0.0, Truncation::new(1e-3)).is_err());
        assert!(make_rotor_wavepacket(-0.1, 0.0, Truncation::default()).is_err());
        assert!(make_coherent_state(-1.0, 0.0, Truncation::default()).is_err());
    }

    #[test]
    fn projection_cases() {
        let osc = make_coherent_state(2.0, 0.0, Truncation::default()).unwrap();
        let p = project_nonnegative(&osc);
        assert_eq!(p.state, osc);
        assert_eq!(p.discarded_mass, 0.0);

        let p = project_nonnegative(&make_number_state(-1).unwrap());
        assert_eq!(p.state.norm_sqr(), 0.0);
        assert_eq!(p.discarded_mass, 1.0);

        let eps: f64 = 0.1;
        let pk = make_rotor_wavepacket(eps, 0.0, Truncation::default()).unwrap();
        let p = project_nonnegative(&pk);
        let direct: f64 = (pk.l_min()..0).map(|l| pk.coeff(l).norm_sqr()).sum();
        assert!((p.discarded_mass - direct).abs() < 1e-15);
        // analytic: tanh ε Σ_{l≥1} e^{-2lε} = e^{-2ε}/(1+e^{-2ε})
        let q = (-2.0 * eps).exp();
        assert!((p.discarded_mass - q / (1.0 + q)).abs() < 1e-12);
    }

    #[test]
    fn density_requires_normalization() {
        let s = ModeExpansion::new(0, vec![c(2.0, 0.0)], false).unwrap();
        let err = density_from_state(&s).unwrap_err();
        assert!(err.to_string().contains('4'), "{err}");
        let d = density_from_state(&make_number_state(7).unwrap()).unwrap();
        assert_eq!(d.kind(), DensityKind::FromModes);
        assert!((d.eval(0.3) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn two_peak_density() {
        let d = make_two_peak_density(PI).unwrap();
        for t in [-3.0, -1.0, 0.0, 0.5, 3.1] {
            assert_eq!(d.eval(t), 1.0);
        }
        let d = make_two_peak_density(PI / 2.0).unwrap();
        assert_eq!(d.eval(PI / 2.0), 2.0);
        assert_eq!(d.eval(0.0), 0.0);
        assert_eq!(d.eval(-PI / 2.0), 2.0);
        assert!(make_two_peak_density(0.0).is_err());
        assert!(make_two_peak_density(3.5).is_err());
    }

    #[test]
    fn overlapping_arcs_rejected() {
        let arcs = vec![
            Arc {
                start: 0.0,
                end: 2.0,
                height: 1.0,
            },
            Arc {
                start: 1.0,
                end: 1.0 + TAU - 2.0,
                height: 1.0,
            },
        ];
        assert!(PhaseDensity::piecewise(arcs).is_err());
    }

    #[test]
    fn quadrature_consistency_on_uniform_grid() {
        let s = make_coherent_state(4.0, 0.2, Truncation::default()).unwrap();
        let n = 4096;
        let sum: f64 = (0..n).map(|i| s.density(TAU * i as f64 / n as f64)).sum::<f64>() / n as f64;
        assert!((sum - s.norm_sqr()).abs() < 1e-10);
    }

    #[test]
    fn half_integer_modes_are_offset() {
        let s = ModeExpansion::new(-1, vec![c(1.0, 0.0), c(0.0, 0.0)], true).unwrap();
        assert_eq!(s.mode(0), -0.5);
        assert_eq!(s.mode(1), 0.5);
        let v = s.eval(PI);
        assert!((v - Complex::from_polar(1.0, -PI / 2.0)).norm() < 1e-15);
        let p = project_nonnegative(&s);
        assert_eq!(p.discarded_mass, 1.0);
        assert_eq!(p.state.l_min(), 0);
    }
}
