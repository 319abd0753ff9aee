//! The worked examples as one table of computed values against their
//! closed forms or asymptotes.

use std::f64::consts::{LN_2, PI, SQRT_2};

use super::table::Table;
use crate::error::Result;
use crate::modes::{
    make_coherent_phase_state, make_coherent_state, make_number_state, make_rotor_wavepacket,
    make_two_mode_superposition, make_two_peak_density, Complex, Truncation,
};
use crate::phase_stats::PhaseProfile;
use crate::relations::{check_relation_min_with, momentum_stats};

#[derive(Debug, Clone, PartialEq)]
pub enum Tolerance {
    Abs(f64),
    Rel(f64),
    Range(f64, f64),
    Below(f64),
    Positive,
}

impl Tolerance {
    pub fn describe(&self) -> String {
        match self {
            Tolerance::Abs(t) => format!("abs<={t:e}"),
            Tolerance::Rel(t) => format!("rel<={t:e}"),
            Tolerance::Range(a, b) => format!("in[{a},{b}]"),
            Tolerance::Below(t) => format!("<={t:e}"),
            Tolerance::Positive => ">0".to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReproRow {
    pub example_id: String,
    pub quantity: String,
    pub reference: String,
    pub computed: f64,
    pub error: f64,
    pub tolerance: Tolerance,
    pub pass: bool,
}

impl ReproRow {
    fn against(id: &str, quantity: &str, reference: f64, computed: f64, tol: Tolerance) -> Self {
        let abs = (computed - reference).abs();
        let (error, pass) = match tol {
            Tolerance::Abs(t) => (abs, abs <= t),
            Tolerance::Rel(t) => {
                let rel = abs / reference.abs();
                (rel, rel <= t)
            }
            Tolerance::Range(a, b) => (abs, computed >= a && computed <= b),
            Tolerance::Below(t) => (computed, computed <= t),
            Tolerance::Positive => (computed, computed > 0.0),
        };
        Self {
            example_id: id.into(),
            quantity: quantity.into(),
            reference: format!("{reference}"),
            computed,
            error,
            tolerance: tol,
            pass,
        }
    }

    fn with_reference(mut self, text: &str) -> Self {
        self.reference = text.into();
        self
    }
}

pub fn repro_rows(grid_n: usize, tail_tol: f64) -> Result<Vec<ReproRow>> {
    let trunc = Truncation::new(tail_tol);
    let pi2_3 = PI * PI / 3.0;
    let mut rows = Vec::new();

    // uniform phase
    let u = PhaseProfile::new(&make_number_state(0)?)?.uncertainty(grid_n)?;
    rows.push(ReproRow::against(
        "uniform_dtheta",
        "delta_theta",
        PI / 3f64.sqrt(),
        u.delta_theta,
        Tolerance::Abs(1e-9),
    ));

    // two peaks of width pi, separated by delta
    for (name, delta) in [("pi/4", PI / 4.0), ("pi/2", PI / 2.0), ("pi", PI)] {
        let d = make_two_peak_density(delta)?;
        let u = PhaseProfile::new(&d)?.uncertainty(grid_n)?;
        let expected = PI * PI / 4.0 + delta * delta / 12.0;
        rows.push(ReproRow::against(
            &format!("two_peak_delta_{name}"),
            "variance",
            expected,
            u.variance,
            Tolerance::Abs(1e-8),
        ));
    }
    let u = PhaseProfile::new(&make_two_peak_density(PI)?)?.uncertainty(grid_n)?;
    rows.push(ReproRow::against(
        "two_peak_max",
        "variance",
        pi2_3,
        u.variance,
        Tolerance::Abs(1e-8),
    ));

    // Poisson-kernel packet
    let eps: f64 = 1e-3;
    let packet = make_rotor_wavepacket(eps, 0.5, trunc)?;
    let u = PhaseProfile::new(&packet)?.uncertainty(grid_n)?;
    let ms = momentum_stats(&packet)?;
    rows.push(
        ReproRow::against(
            "packet_dtheta_over_eps",
            "delta_theta/epsilon",
            1.0,
            u.delta_theta / eps,
            Tolerance::Range(0.99, 1.01),
        )
        .with_reference("1 (asymptote)"),
    );
    rows.push(ReproRow::against(
        "packet_dL_closed_form",
        "delta_L*(e^eps-e^-eps)/sqrt2",
        1.0,
        ms.std * (eps.exp() - (-eps).exp()) / SQRT_2,
        Tolerance::Abs(1e-9),
    ));
    rows.push(ReproRow::against(
        "packet_product",
        "delta_L*delta_theta",
        1.0 / SQRT_2,
        ms.std * u.delta_theta,
        Tolerance::Rel(0.05),
    ));
    rows.push(
        ReproRow::against(
            "packet_edge_density",
            "rho(beta+pi)",
            0.0,
            u.edge_density_at_min,
            Tolerance::Below(1e-4),
        )
        .with_reference("0 (asymptote)"),
    );

    // two-mode superposition
    let (l, big_l, gamma, beta) = (0i64, 1i64, PI / 4.0, 0.3);
    let tm = make_two_mode_superposition(l, big_l, gamma, beta)?;
    let profile = PhaseProfile::new(&tm)?;
    let ex = profile.find_extrema(grid_n)?;
    let worst = ex
        .iter()
        .map(|e| (((l - big_l) as f64) * e.alpha + beta).sin().abs())
        .fold(0.0, f64::max);
    rows.push(ReproRow::against(
        "two_mode_extrema",
        "max|sin((l-L)alpha+beta)|",
        0.0,
        worst,
        Tolerance::Abs(1e-10),
    ));
    let u = profile.uncertainty(grid_n)?;
    let k = (l - big_l) as f64;
    rows.push(ReproRow::against(
        "two_mode_variance",
        "variance",
        pi2_3 - 2.0 * (2.0 * gamma).sin().abs() / (k * k),
        u.variance,
        Tolerance::Abs(1e-8),
    ));
    let rel = check_relation_min_with(&tm, grid_n)?;
    rows.push(
        ReproRow::against("two_mode_margin", "lhs-rhs", 0.0, rel.margin, Tolerance::Positive).with_reference(">0"),
    );

    // coherent phase states
    let cps_eps: f64 = 1e-4;
    let cps = make_coherent_phase_state(Complex::new((-cps_eps).exp(), 0.0), trunc)?;
    let u = PhaseProfile::new(&cps)?.uncertainty(grid_n)?;
    rows.push(
        ReproRow::against(
            "cps_ln4",
            "variance/epsilon",
            4.0 * LN_2,
            u.variance / cps_eps,
            Tolerance::Rel(0.02),
        )
        .with_reference("4ln2 (asymptote)"),
    );
    let cps_eps: f64 = 1e-3;
    let cps = make_coherent_phase_state(Complex::new((-cps_eps).exp(), 0.0), trunc)?;
    let ms = momentum_stats(&cps)?;
    rows.push(
        ReproRow::against(
            "cps_number_spread",
            "2*epsilon*delta_N",
            1.0,
            2.0 * cps_eps * ms.std,
            Tolerance::Rel(1e-3),
        )
        .with_reference("1 (asymptote)"),
    );

    // oscillator coherent states
    let mut margins = Vec::new();
    for r in [1.0, 2.0, 4.0, 8.0] {
        let s = make_coherent_state(r, 0.0, trunc)?;
        let ms = momentum_stats(&s)?;
        rows.push(ReproRow::against(
            &format!("coherent_dN_r{r}"),
            "delta_N",
            r,
            ms.std,
            Tolerance::Abs(1e-6),
        ));
        let rel = check_relation_min_with(&s, grid_n)?;
        rows.push(
            ReproRow::against(
                &format!("coherent_margin_r{r}"),
                "lhs-rhs",
                0.0,
                rel.margin,
                Tolerance::Positive,
            )
            .with_reference(">0"),
        );
        margins.push(rel.margin);
    }
    let steps = margins.windows(2).map(|w| w[0] - w[1]).fold(f64::INFINITY, f64::min);
    rows.push(
        ReproRow::against(
            "coherent_margin_decreasing",
            "min step in margin over r=1,2,4,8",
            0.0,
            steps,
            Tolerance::Positive,
        )
        .with_reference("decreasing toward equality"),
    );
    Ok(rows)
}

pub fn repro_table(rows: &[ReproRow]) -> Table {
    let mut t = Table::new(&[
        "example_id",
        "quantity",
        "paper_value_or_asymptote",
        "computed_value",
        "abs_or_rel_error",
        "tolerance",
        "pass",
    ]);
    for r in rows {
        t.push(vec![
            r.example_id.clone().into(),
            r.quantity.clone().into(),
            r.reference.clone().into(),
            r.computed.into(),
            r.error.into(),
            r.tolerance.describe().into(),
            r.pass.into(),
        ]);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerance_kinds() {
        assert!(ReproRow::against("a", "q", 1.0, 1.0 + 1e-10, Tolerance::Abs(1e-9)).pass);
        assert!(!ReproRow::against("a", "q", 1.0, 1.1, Tolerance::Rel(0.05)).pass);
        assert!(ReproRow::against("a", "q", 1.0, 1.005, Tolerance::Range(0.99, 1.01)).pass);
        assert!(!ReproRow::against("a", "q", 0.0, 0.0, Tolerance::Positive).pass);
        assert!(!ReproRow::against("a", "q", 0.0, f64::NAN, Tolerance::Below(1.0)).pass);
        assert_eq!(Tolerance::Abs(1e-9).describe(), "abs<=1e-9");
    }
}
