//! Angular-momentum statistics, the modified phase–momentum relation and the
//! truncated operator algebra behind it.
//!
//! The relation checked here is
//!
//! ```text
//! ΔL · Δ_α θ ≥ ½ |1 - ρ(π+α)|
//! ```
//!
//! where the edge term comes from the sawtooth discontinuity of the windowed
//! position operator at `α+π`.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{PhaseError, Result};
use crate::modes::{Complex, ModeExpansion, PhaseDensity};
use crate::phase_stats::{canonical_alpha, PhaseProfile, PhaseSource, DEFAULT_GRID_N};

/// Relative slack allowed when deciding whether the relation holds.
pub const RELATION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentumStats {
    pub mean: f64,
    pub std: f64,
}

pub fn momentum_stats(state: &ModeExpansion) -> Result<MomentumStats> {
    state.require_normalized("momentum statistics")?;
    let (mut m1, mut m2) = (0.0, 0.0);
    for (l, c) in state.modes() {
        let p = c.norm_sqr();
        m1 += l * p;
        m2 += l * l * p;
    }
    let n = state.norm_sqr();
    let mean = m1 / n;
    // single-mode states give an exact zero here
    let var = (m2 / n - mean * mean).max(0.0);
    Ok(MomentumStats { mean, std: var.sqrt() })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RelationReport {
    pub alpha: f64,
    pub delta_l: f64,
    pub delta_theta: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub satisfied: bool,
    #[serde(skip)]
    pub at_global_min: bool,
}

impl RelationReport {
    fn new(alpha: f64, delta_l: f64, delta_theta: f64, edge: f64, at_global_min: bool) -> Self {
        let lhs = delta_l * delta_theta;
        let rhs = 0.5 * (1.0 - edge).abs();
        let margin = lhs - rhs;
        Self {
            alpha,
            delta_l,
            delta_theta,
            lhs,
            rhs,
            margin,
            satisfied: margin >= -RELATION_TOL * lhs.max(1.0),
            at_global_min,
        }
    }

    pub const CSV_HEADER: [&'static str; 7] = ["alpha", "delta_L", "delta_theta", "lhs", "rhs", "margin", "satisfied"];

    pub fn csv_record(&self) -> [String; 7] {
        [
            format!("{:?}", self.alpha),
            format!("{:?}", self.delta_l),
            format!("{:?}", self.delta_theta),
            format!("{:?}", self.lhs),
            format!("{:?}", self.rhs),
            format!("{:?}", self.margin),
            format!("{:?}", self.satisfied),
        ]
    }
}

fn wavefunction_of<'a>(src: PhaseSource<'a>) -> Result<&'a ModeExpansion> {
    match src {
        PhaseSource::Modes(m) => Ok(m),
        PhaseSource::Density(_) => Err(PhaseError::Unsupported(
            "the momentum spread needs a wavefunction, not only a phase density".into(),
        )),
    }
}

/// The relation at a fixed window origin.
pub fn check_relation_at<'a>(src: impl Into<PhaseSource<'a>>, alpha: f64) -> Result<RelationReport> {
    let state = wavefunction_of(src.into())?;
    let ms = momentum_stats(state)?;
    let profile = PhaseProfile::new(state)?;
    let w = profile.stats(alpha);
    Ok(RelationReport::new(
        w.alpha,
        ms.std,
        w.variance.sqrt(),
        w.edge_density,
        false,
    ))
}

/// The relation at the window origin that minimizes the phase variance.
pub fn check_relation_min<'a>(src: impl Into<PhaseSource<'a>>) -> Result<RelationReport> {
    check_relation_min_with(src, DEFAULT_GRID_N)
}

pub fn check_relation_min_with<'a>(src: impl Into<PhaseSource<'a>>, grid_n: usize) -> Result<RelationReport> {
    let state = wavefunction_of(src.into())?;
    let ms = momentum_stats(state)?;
    let u = PhaseProfile::new(state)?.uncertainty(grid_n)?;
    Ok(RelationReport::new(
        u.alpha0,
        ms.std,
        u.delta_theta,
        u.edge_density_at_min,
        true,
    ))
}

/// Error type for density-only inputs, exposed for front ends that accept
/// either kind of source.
pub fn require_wavefunction(d: &PhaseDensity) -> Result<&ModeExpansion> {
    wavefunction_of(d.into())
}

/// A dense operator on the modes `l_min..=l_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    pub l_min: i64,
    pub l_max: i64,
    pub entries: DMatrix<Complex>,
}

impl OperatorMatrix {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// `max |A - A†|` over all entries.
    pub fn hermiticity_defect(&self) -> f64 {
        let a = &self.entries;
        let n = a.nrows();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// `⟨Ψ|A|Ψ⟩` with the state restricted to the matrix range.
    pub fn expectation(&self, state: &ModeExpansion) -> Complex {
        let v = self.restrict(state);
        let av = &self.entries * &v;
        v.iter().zip(av.iter()).map(|(x, y)| x.conj() * y).sum()
    }

    fn restrict(&self, state: &ModeExpansion) -> nalgebra::DVector<Complex> {
        nalgebra::DVector::from_iterator(self.dim(), (self.l_min..=self.l_max).map(|l| state.coeff(l)))
    }
}

fn check_range(l_min: i64, l_max: i64) -> Result<usize> {
    if l_min >= l_max {
        return Err(PhaseError::invalid(format!(
            "operator range needs l_min < l_max, got [{l_min}, {l_max}]"
        )));
    }
    Ok((l_max - l_min + 1) as usize)
}

/// `e^{-ikπ}` without rounding.
fn parity(k: i64) -> f64 {
    if k.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `⟨l|θ̂(α)|L⟩` entry for `l ≠ L`.
fn position_offdiag(k: i64, alpha: f64) -> Complex {
    let kf = k as f64;
    let (s, c) = (kf * alpha).sin_cos();
    // i (-1)^k e^{-ikα} / k
    Complex::new(s, c) * (parity(k) / kf)
}

/// Matrix of the position operator `θ` restricted to the window
/// `(α-π, α+π]`, in the angular-momentum basis.
pub fn windowed_position_matrix(alpha: f64, l_min: i64, l_max: i64) -> Result<OperatorMatrix> {
    let n = check_range(l_min, l_max)?;
    let alpha = canonical_alpha(alpha);
    let entries = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            Complex::new(alpha, 0.0)
        } else {
            position_offdiag(i as i64 - j as i64, alpha)
        }
    });
    Ok(OperatorMatrix { l_min, l_max, entries })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CommutatorReport {
    pub max_offdiag_error: f64,
    pub max_diag_error: f64,
}

/// Compares `[L̂, θ̂(α)]` against `i e^{-i(l-L)(α+π)}` off the diagonal and
/// zero on it.
pub fn commutator_check(alpha: f64, l_min: i64, l_max: i64) -> Result<CommutatorReport> {
    let theta = windowed_position_matrix(alpha, l_min, l_max)?;
    let n = theta.dim();
    let alpha = canonical_alpha(alpha);
    let mut rep = CommutatorReport {
        max_offdiag_error: 0.0,
        max_diag_error: 0.0,
    };
    for i in 0..n {
        for j in 0..n {
            // L̂ is diagonal, so [L̂, θ̂]_{lL} = (l - L) θ̂_{lL}
            let k = i as i64 - j as i64;
            let c = theta.entries[(i, j)] * k as f64;
            if i == j {
                rep.max_diag_error = rep.max_diag_error.max(c.norm());
            } else {
                let (s, co) = (k as f64 * alpha).sin_cos();
                let expected = Complex::new(s, co) * parity(k);
                rep.max_offdiag_error = rep.max_offdiag_error.max((c - expected).norm());
            }
        }
    }
    Ok(rep)
}

/// Matrix of `δ(θ̂ - α - π)` on the modes of the state.
pub fn delta_term_matrix(alpha: f64, l_min: i64, l_max: i64) -> Result<OperatorMatrix> {
    let n = check_range(l_min, l_max)?;
    let edge = alpha + std::f64::consts::PI;
    let entries = DMatrix::from_fn(n, n, |i, j| {
        let k = (i as f64) - (j as f64);
        Complex::from_polar(1.0, -k * edge)
    });
    Ok(OperatorMatrix { l_min, l_max, entries })
}

/// `⟨Ψ|δ(θ̂ - α - π)|Ψ⟩`, which equals `ρ(π+α)`.
pub fn delta_term_expectation(state: &ModeExpansion, alpha: f64) -> Result<f64> {
    let (lo, hi) = (state.l_min(), state.l_max().max(state.l_min() + 1));
    Ok(delta_term_matrix(alpha, lo, hi)?.expectation(state).re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modes::*;
    use crate::phase_stats::windowed_stats;
    use std::f64::consts::PI;

    #[test]
    fn number_state_momentum() {
        let m = momentum_stats(&make_number_state(4).unwrap()).unwrap();
        assert_eq!(m.mean, 4.0);
        assert_eq!(m.std, 0.0);
    }

    #[test]
    fn wavepacket_momentum_closed_form() {
        let eps: f64 = 0.2;
        let s = make_rotor_wavepacket(eps, 0.3, Truncation::default()).unwrap();
        let m = momentum_stats(&s).unwrap();
        let expected = 2f64.sqrt() / (eps.exp() - (-eps).exp());
        assert!((m.std - expected).abs() < 1e-9);
        assert!(m.mean.abs() < 1e-12);
    }

    #[test]
    fn coherent_number_spread() {
        let s = make_coherent_state(3.0, 0.0, Truncation::default()).unwrap();
        let m = momentum_stats(&s).unwrap();
        assert!((m.std - 3.0).abs() < 1e-6);
        assert!((m.mean - 9.0).abs() < 1e-6);
    }

    #[test]
    fn number_state_relation_is_equality() {
        let s = make_number_state(-3).unwrap();
        for a in [0.0, 1.0, 4.0] {
            let r = check_relation_at(&s, a).unwrap();
            assert_eq!(r.lhs, 0.0);
            assert!(r.rhs.abs() < 1e-15);
            assert!(r.satisfied);
            assert!(!r.at_global_min);
        }
        assert!(check_relation_min(&s).unwrap().satisfied);
    }

    #[test]
    fn wavepacket_near_minimum_uncertainty() {
        let s = make_rotor_wavepacket(0.01, 0.5, Truncation::default()).unwrap();
        let r = check_relation_at(&s, 0.5).unwrap();
        assert!((r.lhs - 1.0 / 2f64.sqrt()).abs() < 1e-2, "{}", r.lhs);
        assert!((r.rhs - 0.5).abs() < 1e-3);
        assert!(r.satisfied);
        let far = check_relation_at(&s, 0.5 + PI).unwrap();
        assert!(far.rhs > 10.0);
        assert!(far.satisfied);
    }

    #[test]
    fn two_mode_relation_closed_form() {
        let g = PI / 4.0;
        let s = make_two_mode_superposition(0, 1, g, 0.0).unwrap();
        let r = check_relation_min(&s).unwrap();
        let s2 = (2.0 * g).sin().abs();
        let lhs = s2 * (PI * PI / 3.0 - 2.0 * s2).sqrt() / 2.0;
        assert!((r.lhs - lhs).abs() < 1e-10);
        assert!((r.rhs - s2 / 2.0).abs() < 1e-10);
        assert!(r.margin > 0.0);
        assert!(r.at_global_min);
    }

    #[test]
    fn density_only_rejected() {
        let d = make_two_peak_density(1.0).unwrap();
        assert!(matches!(check_relation_at(&d, 0.0), Err(PhaseError::Unsupported(_))));
        assert!(matches!(check_relation_min(&d), Err(PhaseError::Unsupported(_))));
    }

    #[test]
    fn position_matrix_entries() {
        let m = windowed_position_matrix(0.0, -2, 2).unwrap();
        // row l=1, column L=0
        let e = m.entries[(3, 2)];
        assert!((e - Complex::new(0.0, -1.0)).norm() < 1e-16);
        assert!(m.hermiticity_defect() < 1e-15);
        assert!(windowed_position_matrix(1.0, 2, 2).is_err());
    }

    #[test]
    fn position_entry_matches_quadrature() {
        // (1/2π) ∫_{α-π}^{α+π} θ e^{i(L-l)θ} dθ by a fine midpoint rule
        let (alpha, l, big_l) = (0.8, 2i64, -1i64);
        let m = windowed_position_matrix(alpha, -1, 2).unwrap();
        let n = 200_000;
        let mut acc = Complex::new(0.0, 0.0);
        for i in 0..n {
            let t = alpha - PI + (i as f64 + 0.5) * 2.0 * PI / n as f64;
            acc += Complex::from_polar(t, ((big_l - l) as f64) * t);
        }
        acc /= n as f64;
        assert!((m.entries[(3, 0)] - acc).norm() < 1e-8);
    }

    #[test]
    fn position_expectation_matches_mean() {
        let s = make_rotor_wavepacket(0.1, 1.0, Truncation::default()).unwrap();
        let m = windowed_position_matrix(1.0, s.l_min(), s.l_max()).unwrap();
        let e = m.expectation(&s);
        assert!((e.re - 1.0).abs() < 1e-9);
        assert!(e.im.abs() < 1e-12);
        let n = make_number_state(3).unwrap();
        let m = windowed_position_matrix(2.5, 0, 5).unwrap();
        assert!((m.expectation(&n).re - 2.5).abs() < 1e-15);

        let c = make_coherent_state(1.2, 0.4, Truncation::default()).unwrap();
        let m = windowed_position_matrix(2.0, c.l_min(), c.l_max()).unwrap();
        let w = windowed_stats(&c, 2.0).unwrap();
        assert!((m.expectation(&c).re - w.mean).abs() < 1e-10);
    }

    #[test]
    fn commutator_is_exact() {
        for a in [0.0, 0.3, 2.9, 6.0] {
            let r = commutator_check(a, -8, 8).unwrap();
            assert!(r.max_offdiag_error <= 1e-14, "{r:?}");
            assert_eq!(r.max_diag_error, 0.0);
        }
    }

    #[test]
    fn delta_term_is_edge_density() {
        let s = make_coherent_state(1.0, 0.2, Truncation::default()).unwrap();
        for a in [0.0, 1.0, 3.0] {
            let d = delta_term_expectation(&s, a).unwrap();
            assert!((d - s.density(a + PI)).abs() < 1e-10);
        }
        let n = make_number_state(0).unwrap();
        assert!((delta_term_expectation(&n, 0.3).unwrap() - 1.0).abs() < 1e-15);
    }
}
