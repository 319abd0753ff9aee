//! Property suites run by `verify`.

use std::f64::consts::{PI, TAU};

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::table::Table;
use crate::bases::{
    ladder_apply, overlap_matrix, parity_apply, shift_apply, time_evolve, BasisFamily, LadderDirection, ShiftDirection,
};
use crate::modes::{make_coherent_state, make_number_state, Complex, ModeExpansion, Truncation};
use crate::phase_stats::{grid_oracle, PhaseProfile};
use crate::relations::{
    check_relation_at, check_relation_min_with, commutator_check, delta_term_expectation, windowed_position_matrix,
    RelationReport, RELATION_TOL,
};
use crate::series::{
    overlap_kernel, poisson_kernel, poisson_kernel_damped, regularized_sum, sine_cot_sum, KernelFamily, SumRange,
};

/// Variance ceiling for minimized phase variances.
pub const VARIANCE_CEILING: f64 = PI * PI / 3.0 + 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Relations,
    Identities,
    Bases,
}

impl Suite {
    pub fn as_str(&self) -> &'static str {
        match self {
            Suite::Relations => "relations",
            Suite::Identities => "identities",
            Suite::Bases => "bases",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    AtMost,
    AtLeast,
}

impl Cmp {
    fn as_str(&self) -> &'static str {
        match self {
            Cmp::AtMost => "<=",
            Cmp::AtLeast => ">=",
        }
    }

    fn holds(&self, value: f64, bound: f64) -> bool {
        match self {
            Cmp::AtMost => value <= bound,
            Cmp::AtLeast => value >= bound,
        }
    }
}

/// One verified quantity.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckRow {
    pub suite: &'static str,
    pub check: String,
    pub case: String,
    pub value: f64,
    pub cmp: Cmp,
    pub bound: f64,
    pub pass: bool,
    /// State that produced the row, for reporting failures.
    pub state: Option<ModeExpansion>,
}

impl CheckRow {
    fn new(suite: Suite, check: impl Into<String>, case: impl Into<String>, value: f64, cmp: Cmp, bound: f64) -> Self {
        Self {
            suite: suite.as_str(),
            check: check.into(),
            case: case.into(),
            value,
            cmp,
            bound,
            // NaN never passes
            pass: cmp.holds(value, bound),
            state: None,
        }
    }

    fn with_state(mut self, s: &ModeExpansion) -> Self {
        self.state = Some(s.clone());
        self
    }

    fn failed(suite: Suite, check: impl Into<String>, case: impl Into<String>, err: impl std::fmt::Display) -> Self {
        let mut r = Self::new(
            suite,
            check,
            format!("{} error={err}", case.into()),
            f64::NAN,
            Cmp::AtMost,
            0.0,
        );
        r.pass = false;
        r
    }
}

pub fn rows_to_table(rows: &[CheckRow]) -> Table {
    let mut t = Table::new(&["suite", "check", "case", "value", "cmp", "bound", "pass"]);
    for r in rows {
        t.push(vec![
            r.suite.into(),
            r.check.clone().into(),
            r.case.clone().into(),
            r.value.into(),
            r.cmp.as_str().into(),
            r.bound.into(),
            r.pass.into(),
        ]);
    }
    t
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteConfig {
    pub seed: u64,
    /// States in the relation suite.
    pub n_states: usize,
    /// Window origins per state in the relation suite.
    pub n_alpha: usize,
    /// Modes per random state in the relation suite.
    pub n_modes: usize,
    /// States compared against the brute-force oracle.
    pub oracle_states: usize,
    pub grid_n: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            n_states: 1000,
            n_alpha: 16,
            n_modes: 32,
            oracle_states: 200,
            grid_n: crate::phase_stats::DEFAULT_GRID_N,
        }
    }
}

/// Random-number stream for one purpose within a seeded run.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

pub const STREAM_RELATION_STATES: u64 = 1;
pub const STREAM_ORACLE_STATES: u64 = 2;
pub const STREAM_OPERATOR_STATES: u64 = 3;
pub const STREAM_ANGLES: u64 = 4;

/// Normalized state on `n_modes` consecutive modes with i.i.d. complex
/// Gaussian coefficients; the lowest mode is uniform in `[-n_modes, 0]`.
pub fn random_state(rng: &mut ChaCha8Rng, n_modes: usize) -> ModeExpansion {
    let l_min = rng.random_range(-(n_modes as i64)..=0);
    let coeffs: Vec<Complex> = (0..n_modes)
        .map(|_| Complex::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    ModeExpansion::new(l_min, coeffs, false)
        .and_then(|s| s.normalized())
        .expect("gaussian coefficients are finite and almost surely nonzero")
}

pub fn random_states(seed: u64, stream: u64, count: usize, n_modes: usize) -> Vec<ModeExpansion> {
    let mut rng = stream_rng(seed, stream);
    (0..count).map(|_| random_state(&mut rng, n_modes)).collect()
}

fn case(seed: u64, stream: &str, i: usize) -> String {
    format!("seed={seed} stream={stream} index={i}")
}

fn scaled_margin(r: &RelationReport) -> f64 {
    r.margin / r.lhs.max(1.0)
}

pub fn relations_suite(cfg: &SuiteConfig) -> Vec<CheckRow> {
    let su = Suite::Relations;
    let states = random_states(cfg.seed, STREAM_RELATION_STATES, cfg.n_states, cfg.n_modes);
    let mut arng = stream_rng(cfg.seed, STREAM_ANGLES);
    let alphas: Vec<Vec<f64>> = (0..cfg.n_states)
        .map(|_| (0..cfg.n_alpha).map(|_| arng.random_range(0.0..TAU)).collect())
        .collect();

    let per_state: Vec<Vec<CheckRow>> = states
        .par_iter()
        .zip(alphas.par_iter())
        .enumerate()
        .map(|(i, (s, al))| {
            let c = case(cfg.seed, "relations", i);
            let mut rows = Vec::with_capacity(5);
            let profile = match PhaseProfile::new(s) {
                Ok(p) => p,
                Err(e) => return vec![CheckRow::failed(su, "profile", c, e)],
            };
            let worst = al
                .iter()
                .map(|&a| check_relation_at(s, a).map(|r| scaled_margin(&r)).unwrap_or(f64::NAN))
                .fold(f64::INFINITY, |m, x| {
                    if x.is_nan() || m.is_nan() {
                        f64::NAN
                    } else {
                        m.min(x)
                    }
                });
            rows.push(
                CheckRow::new(
                    su,
                    "relation_at_scaled_margin",
                    c.clone(),
                    worst,
                    Cmp::AtLeast,
                    -RELATION_TOL,
                )
                .with_state(s),
            );
            match check_relation_min_with(s, cfg.grid_n) {
                Ok(r) => {
                    rows.push(
                        CheckRow::new(
                            su,
                            "relation_min_scaled_margin",
                            c.clone(),
                            scaled_margin(&r),
                            Cmp::AtLeast,
                            -RELATION_TOL,
                        )
                        .with_state(s),
                    );
                }
                Err(e) => rows.push(CheckRow::failed(su, "relation_min_scaled_margin", c.clone(), e)),
            }
            match profile.find_extrema(cfg.grid_n) {
                Ok(ex) => {
                    let off = ex.iter().map(|e| (e.mean - e.alpha).abs()).fold(0.0, f64::max);
                    rows.push(CheckRow::new(su, "mean_at_center", c.clone(), off, Cmp::AtMost, 1e-9).with_state(s));
                }
                Err(e) => rows.push(CheckRow::failed(su, "mean_at_center", c.clone(), e)),
            }
            match profile.uncertainty(cfg.grid_n) {
                Ok(u) => {
                    rows.push(
                        CheckRow::new(
                            su,
                            "edge_density_at_min",
                            c.clone(),
                            u.edge_density_at_min,
                            Cmp::AtMost,
                            1.0 + 1e-9,
                        )
                        .with_state(s),
                    );
                    rows.push(
                        CheckRow::new(su, "variance_ceiling", c, u.variance, Cmp::AtMost, VARIANCE_CEILING)
                            .with_state(s),
                    );
                }
                Err(e) => rows.push(CheckRow::failed(su, "variance_ceiling", c, e)),
            }
            rows
        })
        .collect();
    let mut rows: Vec<CheckRow> = per_state.into_iter().flatten().collect();

    let oracle_states = random_states(cfg.seed, STREAM_ORACLE_STATES, cfg.oracle_states, 16);
    let oracle_rows: Vec<CheckRow> = oracle_states
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let c = case(cfg.seed, "oracle", i);
            let fast = PhaseProfile::new(s).and_then(|p| p.uncertainty(cfg.grid_n));
            let slow = grid_oracle(s, 4096, 4096);
            match (fast, slow) {
                (Ok(f), Ok(o)) => CheckRow::new(
                    su,
                    "oracle_variance_gap",
                    c,
                    (f.variance - o.variance).abs(),
                    Cmp::AtMost,
                    1e-6,
                )
                .with_state(s),
                (Err(e), _) | (_, Err(e)) => CheckRow::failed(su, "oracle_variance_gap", c, e),
            }
        })
        .collect();
    rows.extend(oracle_rows);

    for l in -3..=3 {
        let s = make_number_state(l).expect("small mode");
        let worst = (0..cfg.n_alpha)
            .map(|k| {
                let a = TAU * k as f64 / cfg.n_alpha as f64;
                check_relation_at(&s, a).map(|r| r.margin.abs()).unwrap_or(f64::NAN)
            })
            .fold(0.0, f64::max);
        rows.push(CheckRow::new(
            su,
            "number_state_equality",
            format!("l={l}"),
            worst,
            Cmp::AtMost,
            1e-9,
        ));
    }
    rows
}

pub fn identities_suite(cfg: &SuiteConfig) -> Vec<CheckRow> {
    let su = Suite::Identities;
    let mut rows = Vec::new();
    let (x, w) = crate::quadrature::gauss_legendre(4096);
    for eps in [1.0, 0.1, 0.01] {
        let mass: f64 = x
            .iter()
            .zip(&w)
            .map(|(x, w)| 0.5 * w * poisson_kernel(PI * x, eps).expect("positive epsilon"))
            .sum();
        rows.push(CheckRow::new(
            su,
            "poisson_normalization_error",
            format!("eps={eps}"),
            (mass - 1.0).abs(),
            Cmp::AtMost,
            1e-10,
        ));
        for t in [0.0, 0.5, 1.5, PI] {
            let a = poisson_kernel(t, eps).expect("positive epsilon");
            let b = poisson_kernel_damped(t, eps, None).expect("positive epsilon");
            rows.push(CheckRow::new(
                su,
                "poisson_closed_vs_sum_rel",
                format!("eps={eps} theta={t}"),
                (a - b).abs() / a.abs().max(1.0),
                Cmp::AtMost,
                1e-12,
            ));
        }
    }
    for t in [PI / 4.0, PI / 2.0, PI] {
        let v = sine_cot_sum(t, 1e-6).expect("positive epsilon");
        let cot = 1.0 / (0.5 * t).tan();
        rows.push(CheckRow::new(
            su,
            "sine_cot_limit_error",
            format!("eps=1e-6 theta={t}"),
            (v - cot).abs(),
            Cmp::AtMost,
            1e-4,
        ));
    }
    rows.push(CheckRow::new(
        su,
        "sine_cot_at_origin",
        "eps=0.3",
        sine_cot_sum(0.0, 0.3).expect("positive").abs(),
        Cmp::AtMost,
        0.0,
    ));

    for (t, eps) in [(PI / 2.0, 1e-2), (2.0, 1e-3), (PI, 1e-3)] {
        let d = (poisson_kernel(t, eps).expect("positive") - poisson_kernel(t, eps / 10.0).expect("positive")).abs();
        rows.push(CheckRow::new(
            su,
            "poisson_eps_consistency",
            format!("eps={eps} theta={t}"),
            d,
            Cmp::AtMost,
            eps,
        ));
        let d = (sine_cot_sum(t, eps).expect("positive") - sine_cot_sum(t, eps / 10.0).expect("positive")).abs();
        rows.push(CheckRow::new(
            su,
            "sine_cot_eps_consistency",
            format!("eps={eps} theta={t}"),
            d,
            Cmp::AtMost,
            eps,
        ));
    }

    let mut rng = stream_rng(cfg.seed, STREAM_ANGLES);
    for f in [
        KernelFamily::SgCosine,
        KernelFamily::Z2Cosine,
        KernelFamily::HalfSine,
        KernelFamily::NonnegPhase,
    ] {
        let mut worst: f64 = 0.0;
        for _ in 0..8 {
            let t = rng.random_range(0.0..PI);
            let p = rng.random_range(0.0..PI);
            let a = overlap_kernel(f, t, p, 0.01).expect("angles in range");
            let b = overlap_kernel(f, p, t, 0.01).expect("angles in range");
            worst = worst.max((a - b.conj()).norm());
        }
        rows.push(CheckRow::new(
            su,
            "kernel_hermitian_symmetry",
            f.as_str(),
            worst,
            Cmp::AtMost,
            1e-12,
        ));
    }
    let v = overlap_kernel(KernelFamily::SgCosine, 0.7, 1.9, 1e-4)
        .expect("in range")
        .norm();
    rows.push(CheckRow::new(
        su,
        "sg_cosine_offdiagonal",
        "theta=0.7 phi=1.9 eps=1e-4",
        v,
        Cmp::AtMost,
        1e-3,
    ));
    let v = overlap_kernel(KernelFamily::NonnegPhase, 1.0 + PI / 2.0, 1.0, 1e-6).expect("finite");
    rows.push(CheckRow::new(
        su,
        "nonneg_phase_principal_part",
        "theta-phi=pi/2 eps=1e-6",
        (v - Complex::new(0.5, 0.5)).norm(),
        Cmp::AtMost,
        1e-4,
    ));
    let eps = 1e-3;
    let v = overlap_kernel(KernelFamily::Z2Cosine, 0.7, 0.7, eps)
        .expect("in range")
        .re;
    rows.push(CheckRow::new(
        su,
        "z2_cosine_peak_times_eps_over_2",
        "theta=phi=0.7 eps=1e-3",
        (v * eps / 2.0 - 1.0).abs(),
        Cmp::AtMost,
        1e-2,
    ));

    let lin = |n: i64| Complex::new(n as f64, 0.0);
    match (
        regularized_sum(lin, SumRange::NonNegative, PI / 3.0, 1e-3),
        regularized_sum(lin, SumRange::NonNegative, PI / 3.0, 1e-4),
    ) {
        (Ok((a, _)), Ok((b, _))) => {
            rows.push(CheckRow::new(
                su,
                "linear_rule_cross_eps_gap",
                "theta=pi/3 eps=1e-3,1e-4",
                (a - b).norm(),
                Cmp::AtMost,
                1e-2,
            ));
            rows.push(CheckRow::new(
                su,
                "linear_rule_limit_error",
                "theta=pi/3 eps=1e-4",
                (b + 1.0).norm(),
                Cmp::AtMost,
                1e-3,
            ));
        }
        (Err(e), _) | (_, Err(e)) => rows.push(CheckRow::failed(su, "linear_rule", "theta=pi/3", e)),
    }
    rows
}

pub fn bases_suite(cfg: &SuiteConfig) -> Vec<CheckRow> {
    let su = Suite::Bases;
    let mut rows = Vec::new();
    for f in BasisFamily::ALL {
        match overlap_matrix(f, f, 64, 1024) {
            Ok(r) => rows.push(CheckRow::new(
                su,
                "gram_defect",
                format!("{} N=64 quad_n=1024", f.as_str()),
                r.unitarity_defect,
                Cmp::AtMost,
                1e-8,
            )),
            Err(e) => rows.push(CheckRow::failed(su, "gram_defect", f.as_str(), e)),
        }
    }
    for other in [BasisFamily::HalfSine, BasisFamily::Z2Cosine] {
        let label = format!("sg_cosine-{} N=32 quad_n=4096 block=16", other.as_str());
        match overlap_matrix(BasisFamily::SgCosine, other, 32, 4096) {
            Ok(r) => rows.push(CheckRow::new(
                su,
                "overlap_block_unitarity_defect",
                label,
                r.block_defect,
                Cmp::AtMost,
                1e-6,
            )),
            Err(e) => rows.push(CheckRow::failed(su, "overlap_block_unitarity_defect", label, e)),
        }
    }

    let mut worst: f64 = 0.0;
    for n in 0..=64i64 {
        let s = make_number_state(n).expect("small mode");
        let low = ladder_apply(&s, LadderDirection::Lower).expect("physical");
        let rl = ladder_apply(&low, LadderDirection::Raise).expect("physical");
        let lr = ladder_apply(
            &ladder_apply(&s, LadderDirection::Raise).expect("physical"),
            LadderDirection::Lower,
        )
        .expect("physical");
        worst = worst
            .max((rl.coeff(n).re - n as f64).abs())
            .max((lr.coeff(n).re - (n + 1) as f64).abs());
    }
    rows.push(CheckRow::new(
        su,
        "ladder_algebra_error",
        "n=0..64",
        worst,
        Cmp::AtMost,
        1e-12,
    ));

    let states = random_states(cfg.seed, STREAM_OPERATOR_STATES, 64, 8);
    let mut arng = stream_rng(cfg.seed, STREAM_ANGLES);
    for (i, s) in states.iter().enumerate() {
        let c = case(cfg.seed, "operators", i);
        let p2 = parity_apply(&parity_apply(s).expect("integer")).expect("integer");
        rows.push(
            CheckRow::new(
                su,
                "parity_involution_mismatch",
                c.clone(),
                if p2 == *s { 0.0 } else { 1.0 },
                Cmp::AtMost,
                0.0,
            )
            .with_state(s),
        );
        let d = shift_apply(s, ShiftDirection::Down).expect("in range");
        rows.push(
            CheckRow::new(
                su,
                "shift_norm_change",
                c.clone(),
                (d.norm_sqr().sqrt() - s.norm_sqr().sqrt()).abs(),
                Cmp::AtMost,
                1e-12,
            )
            .with_state(s),
        );
        let a = arng.random_range(0.0..TAU);
        match delta_term_expectation(s, a) {
            Ok(v) => rows.push(
                CheckRow::new(
                    su,
                    "delta_term_vs_edge_density",
                    format!("{c} alpha={a}"),
                    (v - s.density(a + PI)).abs(),
                    Cmp::AtMost,
                    1e-10,
                )
                .with_state(s),
            ),
            Err(e) => rows.push(CheckRow::failed(su, "delta_term_vs_edge_density", c, e)),
        }
    }

    for _ in 0..8 {
        let a = arng.random_range(0.0..TAU);
        let c = format!("range=[-64,64] alpha={a}");
        match commutator_check(a, -64, 64) {
            Ok(r) => {
                rows.push(CheckRow::new(
                    su,
                    "commutator_offdiag_error",
                    c.clone(),
                    r.max_offdiag_error,
                    Cmp::AtMost,
                    1e-14,
                ));
                rows.push(CheckRow::new(
                    su,
                    "commutator_diag_error",
                    c.clone(),
                    r.max_diag_error,
                    Cmp::AtMost,
                    1e-14,
                ));
            }
            Err(e) => rows.push(CheckRow::failed(su, "commutator", c.clone(), e)),
        }
        let h = windowed_position_matrix(a, -64, 64)
            .map(|m| m.hermiticity_defect())
            .unwrap_or(f64::NAN);
        rows.push(CheckRow::new(
            su,
            "position_hermiticity_defect",
            c,
            h,
            Cmp::AtMost,
            1e-14,
        ));
    }

    for r in [1.0, 3.0] {
        let s = make_coherent_state(r, 0.0, Truncation::default()).expect("moderate r");
        let c = format!("coherent r={r} omega*t=1.3");
        let e = time_evolve(&s, 1.3, 1.0).expect("physical");
        rows.push(CheckRow::new(
            su,
            "evolution_norm_change",
            c.clone(),
            (e.norm_sqr() - s.norm_sqr()).abs(),
            Cmp::AtMost,
            1e-9,
        ));
        let dt = |x: &ModeExpansion| {
            PhaseProfile::new(x)
                .and_then(|p| p.uncertainty(cfg.grid_n))
                .map(|u| u.delta_theta)
        };
        match (dt(&s), dt(&e)) {
            (Ok(a), Ok(b)) => rows.push(CheckRow::new(
                su,
                "evolution_delta_theta_change",
                c,
                (a - b).abs(),
                Cmp::AtMost,
                1e-9,
            )),
            (Err(err), _) | (_, Err(err)) => rows.push(CheckRow::failed(su, "evolution_delta_theta_change", c, err)),
        }
    }
    rows
}

pub fn run_suite(suite: Suite, cfg: &SuiteConfig) -> Vec<CheckRow> {
    match suite {
        Suite::Relations => relations_suite(cfg),
        Suite::Identities => identities_suite(cfg),
        Suite::Bases => bases_suite(cfg),
    }
}
