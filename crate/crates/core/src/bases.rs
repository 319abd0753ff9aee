//! Phase-representation bases of the oscillator on the half circle, gauge
//! maps, ladder and shift operators, and time evolution.

use std::f64::consts::{FRAC_1_PI, PI, SQRT_2};

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{PhaseError, Result};
use crate::modes::{Complex, ModeExpansion};
use crate::quadrature::gauss_legendre;
use crate::relations::OperatorMatrix;

/// Entry change allowed between `quad_n` and `2·quad_n` in an overlap matrix.
pub const OVERLAP_RESOLUTION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BasisFamily {
    /// `sin((n+1)θ)`, vanishing at both walls.
    SgCosine,
    /// `1, √2 cos(nθ)`, antinodes at the walls.
    Z2Cosine,
    /// `√2 sin((n+½)θ)`.
    HalfSine,
}

impl BasisFamily {
    pub const ALL: [BasisFamily; 3] = [BasisFamily::SgCosine, BasisFamily::Z2Cosine, BasisFamily::HalfSine];

    pub fn as_str(&self) -> &'static str {
        match self {
            BasisFamily::SgCosine => "sg_cosine",
            BasisFamily::Z2Cosine => "z2_cosine",
            BasisFamily::HalfSine => "half_sine",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "sg_cosine" => Ok(BasisFamily::SgCosine),
            "z2_cosine" => Ok(BasisFamily::Z2Cosine),
            "half_sine" => Ok(BasisFamily::HalfSine),
            _ => Err(PhaseError::invalid(format!("unknown basis family {s:?}"))),
        }
    }

    /// Factor that makes `basis_wavefunction` orthonormal under `∫₀^π dθ/π`.
    pub fn normalization(&self) -> f64 {
        match self {
            BasisFamily::SgCosine => SQRT_2,
            BasisFamily::Z2Cosine | BasisFamily::HalfSine => 1.0,
        }
    }

    fn eval_unchecked(&self, n: i64, theta: f64) -> f64 {
        let nf = n as f64;
        match self {
            BasisFamily::SgCosine => ((nf + 1.0) * theta).sin(),
            BasisFamily::Z2Cosine if n == 0 => 1.0,
            BasisFamily::Z2Cosine => SQRT_2 * (nf * theta).cos(),
            BasisFamily::HalfSine => SQRT_2 * ((nf + 0.5) * theta).sin(),
        }
    }
}

/// The `n`-th function of a family, without the family normalization factor.
pub fn basis_wavefunction(family: BasisFamily, n: i64, theta: f64) -> Result<f64> {
    if n < 0 {
        return Err(PhaseError::invalid(format!(
            "basis index must be non-negative, got {n}"
        )));
    }
    if !(0.0..=PI).contains(&theta) {
        return Err(PhaseError::invalid(format!(
            "basis functions live on [0, pi], got {theta}"
        )));
    }
    Ok(family.eval_unchecked(n, theta))
}

/// `c_l ↔ c_{-l}` on integer modes.
pub fn parity_apply(state: &ModeExpansion) -> Result<ModeExpansion> {
    if state.half_integer() {
        return Err(PhaseError::invalid(
            "plain parity does not map half-integer modes onto themselves; use the signed parity",
        ));
    }
    mirrored(state, 1.0)
}

/// `P|n⟩ = -|-n⟩`, valid on integer and half-integer modes.
pub fn parity_apply_signed(state: &ModeExpansion) -> Result<ModeExpansion> {
    mirrored(state, -1.0)
}

fn mirrored(state: &ModeExpansion, sign: f64) -> Result<ModeExpansion> {
    // storage index l is mode l + ½ on the half-integer rotor, and -(l + ½) = (-l - 1) + ½
    let l_min = if state.half_integer() {
        -state.l_max() - 1
    } else {
        -state.l_max()
    };
    let coeffs = state.coeffs().iter().rev().map(|c| c * sign).collect();
    Ok(ModeExpansion::new(l_min, coeffs, state.half_integer())?.with_tail_bound(state.tail_bound()))
}

/// Projection `(1 ± P)/2` onto parity-invariant states, renormalized.
///
/// `signed = false` uses the plain parity (integer modes only), `signed =
/// true` uses `P|n⟩ = -|-n⟩`.
pub fn z2_symmetrize(state: &ModeExpansion, signed: bool) -> Result<ModeExpansion> {
    let image = if signed {
        parity_apply_signed(state)?
    } else {
        parity_apply(state)?
    };
    let lo = state.l_min().min(image.l_min());
    let hi = state.l_max().max(image.l_max());
    let coeffs: Vec<Complex> = (lo..=hi).map(|l| 0.5 * (state.coeff(l) + image.coeff(l))).collect();
    let out = ModeExpansion::new(lo, coeffs, state.half_integer())?;
    let n = out.norm_sqr();
    if n <= 1e-24 * state.norm_sqr().max(f64::MIN_POSITIVE) {
        return Err(PhaseError::DegenerateProjection);
    }
    out.trimmed().normalized()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LadderDirection {
    Lower,
    Raise,
}

fn require_physical(state: &ModeExpansion, what: &str) -> Result<()> {
    if state.half_integer() || state.l_min() < 0 {
        return Err(PhaseError::invalid(format!(
            "{what} acts on oscillator states (integer modes l >= 0); got modes from {}",
            state.mode(0)
        )));
    }
    Ok(())
}

/// `â` or `â†` on the number basis. The result is not renormalized.
pub fn ladder_apply(state: &ModeExpansion, direction: LadderDirection) -> Result<ModeExpansion> {
    require_physical(state, "ladder operator")?;
    let c = |m: i64| state.coeff(m);
    match direction {
        LadderDirection::Lower => {
            if state.l_max() == 0 {
                return ModeExpansion::new(0, vec![Complex::new(0.0, 0.0)], false);
            }
            let lo = (state.l_min() - 1).max(0);
            let coeffs = (lo..state.l_max())
                .map(|m| c(m + 1) * ((m + 1) as f64).sqrt())
                .collect();
            ModeExpansion::new(lo, coeffs, false)
        }
        LadderDirection::Raise => {
            let lo = state.l_min() + 1;
            let coeffs = (lo..=state.l_max() + 1).map(|m| c(m - 1) * (m as f64).sqrt()).collect();
            ModeExpansion::new(lo, coeffs, false)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShiftDirection {
    Down,
    Up,
}

/// Multiplication by `e^{∓iθ}` on the full circle: every mode moves by one.
pub fn shift_apply(state: &ModeExpansion, direction: ShiftDirection) -> Result<ModeExpansion> {
    let l_min = match direction {
        ShiftDirection::Down => state.l_min().checked_sub(1),
        ShiftDirection::Up => state.l_min().checked_add(1),
    }
    .ok_or_else(|| PhaseError::invalid("mode range overflows"))?;
    Ok(ModeExpansion::new(l_min, state.coeffs().to_vec(), state.half_integer())?.with_tail_bound(state.tail_bound()))
}

/// `c_n → e^{-i(n+½)ωt} c_n`.
pub fn time_evolve(state: &ModeExpansion, omega: f64, t: f64) -> Result<ModeExpansion> {
    require_physical(state, "oscillator time evolution")?;
    let wt = omega * t;
    if !wt.is_finite() {
        return Err(PhaseError::invalid("omega * t must be finite"));
    }
    let coeffs = state
        .modes()
        .map(|(n, c)| c * Complex::from_polar(1.0, -(n + 0.5) * wt))
        .collect();
    Ok(ModeExpansion::new(state.l_min(), coeffs, false)?.with_tail_bound(state.tail_bound()))
}

/// Overlap matrix between two families with its unitarity diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapReport {
    pub matrix: OperatorMatrix,
    /// `max |U†U - I|` over the full `N×N` matrix.
    pub unitarity_defect: f64,
    /// The same restricted to the leading `N/2 × N/2` block.
    pub block_defect: f64,
    pub block_size: usize,
}

fn overlap_entries(a: BasisFamily, b: BasisFamily, n: usize, quad_n: usize) -> DMatrix<f64> {
    let (x, w) = gauss_legendre(quad_n);
    let thetas: Vec<f64> = x.iter().map(|x| 0.5 * PI * (x + 1.0)).collect();
    // ∫₀^π dθ/π f(θ) = ½ Σ w_k f(θ_k)
    let na = a.normalization();
    let nb = b.normalization();
    let fa: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|m| thetas.iter().map(|&t| na * a.eval_unchecked(m as i64, t)).collect())
        .collect();
    let fb: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|m| thetas.iter().map(|&t| nb * b.eval_unchecked(m as i64, t)).collect())
        .collect();
    let vals: Vec<f64> = (0..n * n)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / n, idx % n);
            0.5 * fa[i]
                .iter()
                .zip(&fb[j])
                .zip(&w)
                .map(|((p, q), w)| w * p * q)
                .sum::<f64>()
        })
        .collect();
    DMatrix::from_row_slice(n, n, &vals)
}

fn gram_defect(u: &DMatrix<f64>, k: usize) -> f64 {
    let g = u.transpose() * u;
    let mut worst = 0.0f64;
    for i in 0..k {
        for j in 0..k {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g[(i, j)] - target).abs());
        }
    }
    worst
}

/// `U_{mn} = ∫₀^π (dθ/π) f^A_m(θ) f^B_n(θ)` for `m, n < N`, each family
/// taken with its normalization factor.
///
/// The quadrature is repeated with `2·quad_n` nodes; any entry moving by
/// more than `OVERLAP_RESOLUTION_TOL` is reported as unresolved.
pub fn overlap_matrix(a: BasisFamily, b: BasisFamily, n: usize, quad_n: usize) -> Result<OverlapReport> {
    if n == 0 {
        return Err(PhaseError::invalid("overlap matrix needs N >= 1"));
    }
    if quad_n < 16 * n {
        return Err(PhaseError::invalid(format!(
            "quad_n must be at least 16 N = {}, got {quad_n}",
            16 * n
        )));
    }
    let u = overlap_entries(a, b, n, quad_n);
    let fine = overlap_entries(a, b, n, 2 * quad_n);
    let drift = (&u - &fine).amax();
    if drift > OVERLAP_RESOLUTION_TOL {
        return Err(PhaseError::Resolution(format!(
            "overlap entries move by {drift:e} when quad_n doubles from {quad_n}"
        )));
    }
    let block_size = (n / 2).max(1);
    let unitarity_defect = gram_defect(&u, n);
    let block_defect = gram_defect(&u, block_size);
    Ok(OverlapReport {
        matrix: OperatorMatrix {
            l_min: 0,
            l_max: n as i64 - 1,
            entries: u.map(|x| Complex::new(x, 0.0)),
        },
        unitarity_defect,
        block_defect,
        block_size,
    })
}

/// Closed form of the `sg_cosine`–`half_sine` overlap.
pub fn sg_half_sine_overlap(m: i64, n: i64) -> f64 {
    let (mf, nf) = (m as f64, n as f64);
    let sign = if (m - n).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    FRAC_1_PI * sign * (1.0 / (mf - nf + 0.5) + 1.0 / (mf + nf + 1.5))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modes::*;
    use crate::phase_stats::phase_uncertainty;

    #[test]
    fn wavefunction_values() {
        assert_eq!(basis_wavefunction(BasisFamily::SgCosine, 0, PI / 2.0).unwrap(), 1.0);
        assert_eq!(basis_wavefunction(BasisFamily::Z2Cosine, 2, 0.0).unwrap(), SQRT_2);
        assert_eq!(basis_wavefunction(BasisFamily::Z2Cosine, 0, 1.3).unwrap(), 1.0);
        let v = basis_wavefunction(BasisFamily::HalfSine, 0, PI).unwrap();
        assert!((v - SQRT_2).abs() < 1e-15);
        assert!(basis_wavefunction(BasisFamily::HalfSine, -1, 0.3).is_err());
        assert!(basis_wavefunction(BasisFamily::SgCosine, 1, 3.5).is_err());
    }

    #[test]
    fn parity_basics() {
        let s = make_number_state(2).unwrap();
        let p = parity_apply(&s).unwrap();
        assert_eq!(p, make_number_state(-2).unwrap());
        let pk = make_rotor_wavepacket(0.3, 0.0, Truncation::default()).unwrap();
        assert_eq!(parity_apply(&pk).unwrap(), pk);
        let c = make_coherent_state(1.0, 0.4, Truncation::default()).unwrap();
        assert_eq!(parity_apply(&parity_apply(&c).unwrap()).unwrap(), c);
    }

    #[test]
    fn signed_parity_on_half_integer_modes() {
        // modes 1/2 and 3/2 stored at 0 and 1
        let s = ModeExpansion::new(0, vec![Complex::new(0.6, 0.0), Complex::new(0.0, 0.8)], true).unwrap();
        assert!(parity_apply(&s).is_err());
        let p = parity_apply_signed(&s).unwrap();
        assert_eq!(p.l_min(), -2);
        assert_eq!(p.mode(0), -1.5);
        assert_eq!(p.coeff(-2), Complex::new(0.0, -0.8));
        assert_eq!(p.coeff(-1), Complex::new(-0.6, 0.0));
        assert_eq!(parity_apply_signed(&p).unwrap(), s);
    }

    #[test]
    fn symmetrize_cases() {
        let s = z2_symmetrize(&make_number_state(1).unwrap(), false).unwrap();
        assert_eq!(s.l_min(), -1);
        let h = 1.0 / SQRT_2;
        assert!((s.coeff(1).re - h).abs() < 1e-15 && (s.coeff(-1).re - h).abs() < 1e-15);
        assert_eq!(s.coeff(0), Complex::new(0.0, 0.0));
        let z = z2_symmetrize(&make_number_state(0).unwrap(), false).unwrap();
        assert_eq!(z, make_number_state(0).unwrap());
        assert_eq!(
            z2_symmetrize(&make_number_state(0).unwrap(), true),
            Err(PhaseError::DegenerateProjection)
        );
        let odd = z2_symmetrize(&make_number_state(3).unwrap(), true).unwrap();
        assert!((odd.coeff(3).re - h).abs() < 1e-15 && (odd.coeff(-3).re + h).abs() < 1e-15);
    }

    #[test]
    fn symmetrized_outputs_are_invariant() {
        let c = make_coherent_state(1.5, 0.7, Truncation::default()).unwrap();
        let e = z2_symmetrize(&c, false).unwrap();
        let pe = parity_apply(&e).unwrap();
        for l in e.l_min()..=e.l_max() {
            assert!((e.coeff(l) - pe.coeff(l)).norm() < 1e-15);
        }
        let half = ModeExpansion::new(0, vec![Complex::new(0.6, 0.0), Complex::new(0.0, 0.8)], true).unwrap();
        let o = z2_symmetrize(&half, true).unwrap();
        assert!((o.norm_sqr() - 1.0).abs() < 1e-14);
        let po = parity_apply_signed(&o).unwrap();
        for l in o.l_min()..=o.l_max() {
            assert!((o.coeff(l) - po.coeff(l)).norm() < 1e-15);
        }
    }

    #[test]
    fn ladder_on_number_states() {
        let zero = ladder_apply(&make_number_state(0).unwrap(), LadderDirection::Lower).unwrap();
        assert_eq!(zero.norm_sqr(), 0.0);
        let one = ladder_apply(&make_number_state(1).unwrap(), LadderDirection::Lower).unwrap();
        assert_eq!(one.coeff(0), Complex::new(1.0, 0.0));
        for n in 0..=64i64 {
            let s = make_number_state(n).unwrap();
            let rl = ladder_apply(
                &ladder_apply(&s, LadderDirection::Lower).unwrap(),
                LadderDirection::Raise,
            )
            .unwrap();
            let lr = ladder_apply(
                &ladder_apply(&s, LadderDirection::Raise).unwrap(),
                LadderDirection::Lower,
            )
            .unwrap();
            assert!((rl.coeff(n).re - n as f64).abs() < 1e-12);
            assert!((lr.coeff(n).re - (n + 1) as f64).abs() < 1e-12);
        }
        assert!(ladder_apply(&make_number_state(-1).unwrap(), LadderDirection::Raise).is_err());
    }

    #[test]
    fn coherent_state_is_lowering_eigenvector() {
        let c = make_coherent_state(2.0, 0.0, Truncation::default()).unwrap();
        let a = ladder_apply(&c, LadderDirection::Lower).unwrap();
        for l in c.l_min()..c.l_max() {
            assert!((a.coeff(l) - 2.0 * c.coeff(l)).norm() < 1e-12);
        }
    }

    #[test]
    fn shift_operators() {
        let s = make_number_state(5).unwrap();
        assert_eq!(
            shift_apply(&s, ShiftDirection::Down).unwrap(),
            make_number_state(4).unwrap()
        );
        let c = make_rotor_wavepacket(0.4, 1.0, Truncation::default()).unwrap();
        let round = shift_apply(&shift_apply(&c, ShiftDirection::Down).unwrap(), ShiftDirection::Up).unwrap();
        assert_eq!(round, c);
        let g = shift_apply(&make_number_state(0).unwrap(), ShiftDirection::Down).unwrap();
        let p = project_nonnegative(&g);
        assert_eq!(p.state.norm_sqr(), 0.0);
        assert_eq!(p.discarded_mass, 1.0);
    }

    #[test]
    fn evolution() {
        let c = make_coherent_state(3.0, 0.0, Truncation::default()).unwrap();
        let same = time_evolve(&c, 1.0, 0.0).unwrap();
        assert_eq!(same, c);
        let e = time_evolve(&c, 2.0, 0.5).unwrap();
        assert!((e.norm_sqr() - c.norm_sqr()).abs() < 1e-12);
        for t in [0.3, 1.7, 4.0] {
            assert!((e.density(t) - c.density(t - 1.0)).abs() < 1e-10);
        }
        let u0 = phase_uncertainty(&c).unwrap();
        let u1 = phase_uncertainty(&e).unwrap();
        assert!((u0.delta_theta - u1.delta_theta).abs() < 1e-9);
        assert!((u1.alpha0 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn family_gram_matrices() {
        for f in BasisFamily::ALL {
            let r = overlap_matrix(f, f, 16, 256).unwrap();
            assert!(r.unitarity_defect < 1e-10, "{f:?}");
            let id = (&r.matrix.entries - DMatrix::<Complex>::identity(16, 16))
                .map(|z| z.norm())
                .amax();
            assert!(id < 1e-10);
        }
    }

    #[test]
    fn sg_half_sine_entries_match_closed_form() {
        let r = overlap_matrix(BasisFamily::SgCosine, BasisFamily::HalfSine, 32, 4096).unwrap();
        for m in 0..32 {
            for n in 0..32 {
                let e = r.matrix.entries[(m, n)].re;
                assert!((e - sg_half_sine_overlap(m as i64, n as i64)).abs() < 1e-12);
            }
        }
        // slow 1/N approach to unitarity on the leading block
        assert!((r.block_defect - 0.01485).abs() < 5e-5, "{}", r.block_defect);
    }

    #[test]
    fn overlap_preconditions() {
        assert!(overlap_matrix(BasisFamily::SgCosine, BasisFamily::HalfSine, 0, 64).is_err());
        assert!(overlap_matrix(BasisFamily::SgCosine, BasisFamily::HalfSine, 8, 100).is_err());
    }
}
