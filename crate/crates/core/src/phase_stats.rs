//! Windowed circular statistics and the window-minimized phase uncertainty.
//!
//! For a window origin `α` the averaging interval is `(α-π, α+π]`. The mean
//! and variance of `θ` over that interval depend on `α`; the phase
//! uncertainty is the smallest windowed variance over all origins. Stationary
//! points satisfy `⟨θ⟩_α = α` and are minima when the density at the window
//! edge, `ρ(π+α)`, is below one.
//!
//! Mode expansions are handled through the Fourier coefficients of the
//! density, `r_k = Σ_l c̄_l c_{l+k}`, which turn the windowed moments into
//! single sums:
//!
//! ```text
//! ⟨θ⟩_α  - α = Σ_{k≥1} 2(-1)^k Im(r_k e^{ikα}) / k
//! Δ²_α θ     = π²/3 + Σ_{k≥1} 4(-1)^k Re(r_k e^{ikα}) / k² - (⟨θ⟩_α - α)²
//! ```
//!
//! Piecewise-constant densities use exact arc integrals.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{PhaseError, Result};
use crate::modes::{Arc, Complex, ModeExpansion, PhaseDensity};
use crate::quadrature::gl4_panel;

/// Default number of window origins sampled when bracketing extrema.
pub const DEFAULT_GRID_N: usize = 512;

/// Default node count for quadrature cross-checks.
pub const DEFAULT_QUAD_N: usize = 8192;

/// Bisection stops once the bracket is narrower than this.
pub const ROOT_TOL: f64 = 1e-12;

/// Half-width of the band around `ρ(π+α) = 1` classified as flat.
pub const FLAT_EDGE_TOL: f64 = 1e-9;

/// Residual magnitude below which a window origin counts as stationary.
pub const STATIONARY_TOL: f64 = 1e-10;

/// Residuals below this everywhere on the grid mean a uniform-like state.
const IDENTICALLY_ZERO_TOL: f64 = 1e-12;

/// Mode count above which the density spectrum is computed by FFT.
const DIRECT_AUTOCORR_MAX: usize = 4096;

/// Reduces a window origin to `[0, 2π)`.
pub fn canonical_alpha(alpha: f64) -> f64 {
    let a = alpha.rem_euclid(TAU);
    if a >= TAU {
        0.0
    } else {
        a
    }
}

/// A window origin, kept in canonical form.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Window {
    alpha: f64,
}

impl Window {
    pub fn new(alpha: f64) -> Self {
        Self {
            alpha: canonical_alpha(alpha),
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `(α-π, α+π]`.
    pub fn bounds(&self) -> (f64, f64) {
        (self.alpha - PI, self.alpha + PI)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtremumKind {
    Minimum,
    Maximum,
    Flat,
    NonExtremal,
}

impl ExtremumKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExtremumKind::Minimum => "minimum",
            ExtremumKind::Maximum => "maximum",
            ExtremumKind::Flat => "flat",
            ExtremumKind::NonExtremal => "non_extremal",
        }
    }

    /// Classification of a stationary point from the edge density.
    pub fn from_edge_density(edge: f64) -> Self {
        if edge < 1.0 - FLAT_EDGE_TOL {
            ExtremumKind::Minimum
        } else if edge > 1.0 + FLAT_EDGE_TOL {
            ExtremumKind::Maximum
        } else {
            ExtremumKind::Flat
        }
    }
}

/// Statistics of `θ` over one window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowedStats {
    pub alpha: f64,
    pub mean: f64,
    pub variance: f64,
    pub edge_density: f64,
    pub kind: ExtremumKind,
}

/// The minimized phase uncertainty and where it is attained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UncertaintyResult {
    pub alpha0: f64,
    pub delta_theta: f64,
    pub variance: f64,
    pub edge_density_at_min: f64,
    pub n_extrema_found: usize,
}

impl UncertaintyResult {
    fn from_variance(alpha0: f64, variance: f64, edge: f64, n: usize) -> Self {
        let variance = variance.max(0.0);
        Self {
            alpha0,
            delta_theta: variance.sqrt(),
            variance,
            edge_density_at_min: edge,
            n_extrema_found: n,
        }
    }
}

/// Anything the statistics can be computed from.
#[derive(Debug, Clone, Copy)]
pub enum PhaseSource<'a> {
    Modes(&'a ModeExpansion),
    Density(&'a PhaseDensity),
}

impl<'a> From<&'a ModeExpansion> for PhaseSource<'a> {
    fn from(s: &'a ModeExpansion) -> Self {
        PhaseSource::Modes(s)
    }
}

impl<'a> From<&'a PhaseDensity> for PhaseSource<'a> {
    fn from(d: &'a PhaseDensity) -> Self {
        match d.modes() {
            Some(m) => PhaseSource::Modes(m),
            None => PhaseSource::Density(d),
        }
    }
}

impl PhaseSource<'_> {
    /// `ρ(θ)` evaluated directly from the source (no spectrum).
    pub fn density(&self, theta: f64) -> f64 {
        match self {
            PhaseSource::Modes(m) => m.density(theta),
            PhaseSource::Density(d) => d.eval(theta),
        }
    }
}

/// Fourier coefficients `r_k`, `k ≥ 0`, of the density `|Ψ|²`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensitySpectrum {
    r: Vec<Complex>,
}

impl DensitySpectrum {
    pub fn from_state(state: &ModeExpansion) -> Self {
        let c = state.coeffs();
        let r = if c.len() <= DIRECT_AUTOCORR_MAX {
            autocorrelation_direct(c)
        } else {
            autocorrelation_fft(c)
        };
        Self { r }
    }

    /// `r_0, r_1, ...`; `r_{-k}` is the conjugate of `r_k`.
    pub fn coefficients(&self) -> &[Complex] {
        &self.r
    }

    /// `(⟨θ⟩_α - α, Σ_{k≥1} 4(-1)^k Re(r_k e^{ikα})/k²)`.
    fn sums(&self, alpha: f64) -> (f64, f64) {
        let mut s1 = 0.0;
        let mut s2 = 0.0;
        for (k, rk) in self.r.iter().enumerate().skip(1) {
            let kf = k as f64;
            let (s, co) = (kf * alpha).sin_cos();
            let re = rk.re * co - rk.im * s;
            let im = rk.re * s + rk.im * co;
            let sign = if k % 2 == 1 { -1.0 } else { 1.0 };
            s1 += sign * 2.0 * im / kf;
            s2 += sign * 4.0 * re / (kf * kf);
        }
        (s1, s2)
    }

    pub fn density(&self, theta: f64) -> f64 {
        let mut acc = self.r[0].re;
        for (k, rk) in self.r.iter().enumerate().skip(1) {
            let (s, co) = (k as f64 * theta).sin_cos();
            acc += 2.0 * (rk.re * co - rk.im * s);
        }
        acc
    }
}

fn autocorrelation_direct(c: &[Complex]) -> Vec<Complex> {
    let m = c.len();
    (0..m)
        .map(|k| (0..m - k).map(|l| c[l].conj() * c[l + k]).sum())
        .collect()
}

fn autocorrelation_fft(c: &[Complex]) -> Vec<Complex> {
    let m = c.len();
    let n = (2 * m).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let mut buf = vec![Complex::new(0.0, 0.0); n];
    buf[..m].copy_from_slice(c);
    planner.plan_fft_forward(n).process(&mut buf);
    for z in &mut buf {
        *z = Complex::new(z.norm_sqr(), 0.0);
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    buf[..m].iter().map(|z| *z * scale).collect()
}

/// Prepared form of a source for repeated evaluation over window origins.
#[derive(Debug, Clone)]
pub enum PhaseProfile {
    Spectral(DensitySpectrum),
    Pieces(Vec<Arc>),
}

impl PhaseProfile {
    pub fn new<'a>(src: impl Into<PhaseSource<'a>>) -> Result<Self> {
        match src.into() {
            PhaseSource::Modes(m) => {
                m.require_normalized("phase statistics")?;
                Ok(PhaseProfile::Spectral(DensitySpectrum::from_state(m)))
            }
            PhaseSource::Density(d) => Ok(PhaseProfile::Pieces(
                d.pieces().expect("mode densities map to PhaseSource::Modes").to_vec(),
            )),
        }
    }

    pub fn density(&self, theta: f64) -> f64 {
        match self {
            PhaseProfile::Spectral(s) => s.density(theta),
            PhaseProfile::Pieces(p) => PhaseDensity::piecewise(p.clone()).map(|d| d.eval(theta)).unwrap_or(0.0),
        }
    }

    /// `(⟨θ⟩_α - α, Δ²_α θ)`.
    fn offset_and_variance(&self, alpha: f64) -> (f64, f64) {
        match self {
            PhaseProfile::Spectral(s) => {
                let (s1, s2) = s.sums(alpha);
                let r0 = s.r[0].re;
                let mean_u = s1 / r0;
                (mean_u, (PI * PI / 3.0 * r0 + s2) / r0 - mean_u * mean_u)
            }
            PhaseProfile::Pieces(arcs) => {
                let (m0, m1, m2) = arc_moments(arcs, alpha);
                let mean_u = m1 / m0;
                (mean_u, m2 / m0 - mean_u * mean_u)
            }
        }
    }

    /// `⟨θ⟩_α - α`; zero exactly at the extrema of the windowed variance.
    pub fn residual(&self, alpha: f64) -> f64 {
        match self {
            PhaseProfile::Spectral(s) => s.sums(alpha).0 / s.r[0].re,
            PhaseProfile::Pieces(arcs) => {
                let (m0, m1, _) = arc_moments(arcs, alpha);
                m1 / m0
            }
        }
    }

    pub fn edge_density(&self, alpha: f64) -> f64 {
        match self {
            PhaseProfile::Spectral(s) => s.density(alpha + PI),
            PhaseProfile::Pieces(arcs) => {
                let t = alpha + PI;
                arcs.iter()
                    .filter(|a| (t - a.start).rem_euclid(TAU) < a.len())
                    .map(|a| a.height)
                    .sum()
            }
        }
    }

    pub fn stats(&self, alpha: f64) -> WindowedStats {
        let alpha = canonical_alpha(alpha);
        let (off, var) = self.offset_and_variance(alpha);
        let edge = self.edge_density(alpha);
        let kind = if off.abs() < STATIONARY_TOL {
            ExtremumKind::from_edge_density(edge)
        } else {
            ExtremumKind::NonExtremal
        };
        WindowedStats {
            alpha,
            mean: alpha + off,
            variance: var.max(0.0),
            edge_density: edge,
            kind,
        }
    }

    fn stationary_stats(&self, alpha: f64) -> WindowedStats {
        let mut s = self.stats(alpha);
        s.kind = ExtremumKind::from_edge_density(s.edge_density);
        s
    }

    fn work_per_eval(&self) -> usize {
        match self {
            PhaseProfile::Spectral(s) => s.r.len(),
            PhaseProfile::Pieces(p) => p.len(),
        }
    }

    /// All stationary points found by bracketing the residual on `grid_n`
    /// uniform origins and bisecting each sign change, sorted by variance.
    pub fn find_extrema(&self, grid_n: usize) -> Result<Vec<WindowedStats>> {
        if grid_n < 64 {
            return Err(PhaseError::invalid(format!("grid_n must be at least 64, got {grid_n}")));
        }
        let alphas: Vec<f64> = (0..grid_n).map(|i| TAU * i as f64 / grid_n as f64).collect();
        let res: Vec<f64> = if self.work_per_eval() > 2048 {
            alphas.par_iter().map(|&a| self.residual(a)).collect()
        } else {
            alphas.iter().map(|&a| self.residual(a)).collect()
        };
        let max_abs = res.iter().fold(0.0f64, |m, r| m.max(r.abs()));
        if max_abs < IDENTICALLY_ZERO_TOL {
            let mut s = self.stats(0.0);
            s.kind = ExtremumKind::Flat;
            return Ok(vec![s]);
        }
        let mut roots = Vec::new();
        for i in 0..grid_n {
            let j = (i + 1) % grid_n;
            let (fa, fb) = (res[i], res[j]);
            if fa == 0.0 {
                roots.push(alphas[i]);
            } else if fb != 0.0 && fa.signum() != fb.signum() {
                let b = if j == 0 { TAU } else { alphas[j] };
                roots.push(self.bisect(alphas[i], b, fa));
            }
        }
        if roots.is_empty() {
            return Err(PhaseError::Resolution(format!(
                "no sign change of the extremality residual on {grid_n} window origins; \
                 increase grid_n"
            )));
        }
        let mut out: Vec<WindowedStats> = roots.into_iter().map(|a| self.stationary_stats(a)).collect();
        out.sort_by(|x, y| x.variance.total_cmp(&y.variance).then(x.alpha.total_cmp(&y.alpha)));
        Ok(out)
    }

    fn bisect(&self, mut a: f64, mut b: f64, fa: f64) -> f64 {
        let sa = fa.signum();
        for _ in 0..200 {
            if b - a < ROOT_TOL {
                break;
            }
            let m = 0.5 * (a + b);
            let fm = self.residual(m);
            if fm == 0.0 {
                return canonical_alpha(m);
            }
            if fm.signum() == sa {
                a = m;
            } else {
                b = m;
            }
        }
        canonical_alpha(0.5 * (a + b))
    }

    /// Absolute minimum of the windowed variance over the classified minima.
    pub fn uncertainty(&self, grid_n: usize) -> Result<UncertaintyResult> {
        let extrema = self.find_extrema(grid_n)?;
        let n = extrema.len();
        let candidates: Vec<&WindowedStats> = extrema
            .iter()
            .filter(|s| matches!(s.kind, ExtremumKind::Minimum | ExtremumKind::Flat))
            .collect();
        let best = candidates.iter().map(|s| s.variance).fold(f64::INFINITY, f64::min);
        if !best.is_finite() {
            return Err(PhaseError::Resolution(format!(
                "{n} stationary points found but none is a minimum; increase grid_n"
            )));
        }
        // equal minima: smallest canonical origin wins
        let chosen = candidates
            .iter()
            .filter(|s| s.variance <= best + 1e-12)
            .min_by(|x, y| x.alpha.total_cmp(&y.alpha))
            .expect("at least one candidate");
        Ok(UncertaintyResult::from_variance(
            chosen.alpha,
            chosen.variance,
            chosen.edge_density,
            n,
        ))
    }
}

/// `(∫ρ, ∫uρ, ∫u²ρ)` over the window with `u = θ - α ∈ (-π, π]`, measure `dθ/2π`.
fn arc_moments(arcs: &[Arc], alpha: f64) -> (f64, f64, f64) {
    let mut m = (0.0, 0.0, 0.0);
    let mut add = |a: f64, b: f64, h: f64| {
        let w = h / TAU;
        m.0 += w * (b - a);
        m.1 += w * (b * b - a * a) / 2.0;
        m.2 += w * (b * b * b - a * a * a) / 3.0;
    };
    for arc in arcs {
        // arc start in u coordinates, reduced to [-π, π)
        let s = (arc.start - alpha + PI).rem_euclid(TAU) - PI;
        let e = s + arc.len();
        if e <= PI {
            add(s, e, arc.height);
        } else {
            add(s, PI, arc.height);
            add(-PI, e - TAU, arc.height);
        }
    }
    m
}

/// Mean, variance and edge density over the window `(α-π, α+π]`.
pub fn windowed_stats<'a>(src: impl Into<PhaseSource<'a>>, alpha: f64) -> Result<WindowedStats> {
    Ok(PhaseProfile::new(src)?.stats(alpha))
}

/// `⟨θ⟩_α - α`.
pub fn extremality_residual<'a>(src: impl Into<PhaseSource<'a>>, alpha: f64) -> Result<f64> {
    Ok(PhaseProfile::new(src)?.residual(canonical_alpha(alpha)))
}

pub fn find_extrema<'a>(src: impl Into<PhaseSource<'a>>, grid_n: usize) -> Result<Vec<WindowedStats>> {
    PhaseProfile::new(src)?.find_extrema(grid_n)
}

/// Phase uncertainty with the default bracketing grid.
pub fn phase_uncertainty<'a>(src: impl Into<PhaseSource<'a>>) -> Result<UncertaintyResult> {
    phase_uncertainty_with(src, DEFAULT_GRID_N)
}

pub fn phase_uncertainty_with<'a>(src: impl Into<PhaseSource<'a>>, grid_n: usize) -> Result<UncertaintyResult> {
    PhaseProfile::new(src)?.uncertainty(grid_n)
}

/// Mean and variance over one window by composite four-point Gauss–Legendre
/// quadrature of the density itself (`n_theta` nodes in total).
pub fn windowed_stats_quadrature<'a>(
    src: impl Into<PhaseSource<'a>>,
    alpha: f64,
    n_theta: usize,
) -> Result<(f64, f64)> {
    let src = src.into();
    check_source_normalized(&src)?;
    let alpha = canonical_alpha(alpha);
    let panels = n_theta.div_ceil(4).max(1);
    let h = TAU / panels as f64;
    let (offs, ws) = gl4_panel();
    let mut m = (0.0, 0.0, 0.0);
    for j in 0..panels {
        for g in 0..4 {
            let u = -PI + (j as f64 + offs[g]) * h;
            let w = ws[g] * h / TAU * src.density(alpha + u);
            m.0 += w;
            m.1 += w * u;
            m.2 += w * u * u;
        }
    }
    let mu = m.1 / m.0;
    Ok((alpha + mu, m.2 / m.0 - mu * mu))
}

fn check_source_normalized(src: &PhaseSource<'_>) -> Result<()> {
    match src {
        PhaseSource::Modes(m) => m.require_normalized("phase statistics"),
        PhaseSource::Density(_) => Ok(()),
    }
}

/// Brute-force minimization: the windowed variance is computed by direct
/// quadrature of `ρ(θ)` at each of `n_alpha` uniform window origins and the
/// smallest is returned. No closed forms and no root finding.
///
/// The quadrature is composite four-point Gauss–Legendre with `n_theta`
/// nodes per window. When the origin grid is a refinement of the panel grid
/// the density samples are shared between windows.
pub fn grid_oracle<'a>(src: impl Into<PhaseSource<'a>>, n_alpha: usize, n_theta: usize) -> Result<UncertaintyResult> {
    let src = src.into();
    if n_alpha < 256 || n_theta < 256 {
        return Err(PhaseError::invalid(format!(
            "grid_oracle needs n_alpha, n_theta >= 256, got {n_alpha}, {n_theta}"
        )));
    }
    check_source_normalized(&src)?;
    let panels = n_theta.div_ceil(4);
    let h = TAU / panels as f64;
    let d_alpha = TAU / n_alpha as f64;
    let (offs, ws) = gl4_panel();

    let shared = n_alpha.is_multiple_of(panels);
    let classes = if shared { n_alpha / panels } else { 0 };
    // cache[(c * panels + p) * 4 + g] = ρ(-π + c·dα + (p + off_g)·h)
    let cache: Vec<f64> = if shared {
        (0..classes * panels * 4)
            .into_par_iter()
            .map(|idx| {
                let g = idx % 4;
                let p = (idx / 4) % panels;
                let c = idx / (4 * panels);
                src.density(-PI + c as f64 * d_alpha + (p as f64 + offs[g]) * h)
            })
            .collect()
    } else {
        Vec::new()
    };

    let variances: Vec<f64> = (0..n_alpha)
        .into_par_iter()
        .map(|i| {
            let alpha = i as f64 * d_alpha;
            let mut m = (0.0, 0.0, 0.0);
            for j in 0..panels {
                for g in 0..4 {
                    let u = -PI + (j as f64 + offs[g]) * h;
                    let rho = if shared {
                        let c = i % classes;
                        let p = (i / classes + j) % panels;
                        cache[(c * panels + p) * 4 + g]
                    } else {
                        src.density(alpha + u)
                    };
                    let w = ws[g] * rho;
                    m.0 += w;
                    m.1 += w * u;
                    m.2 += w * u * u;
                }
            }
            let mu = m.1 / m.0;
            m.2 / m.0 - mu * mu
        })
        .collect();

    let mut best = 0;
    for (i, v) in variances.iter().enumerate() {
        if *v < variances[best] {
            best = i;
        }
    }
    let local_minima = (0..n_alpha)
        .filter(|&i| {
            let prev = variances[(i + n_alpha - 1) % n_alpha];
            let next = variances[(i + 1) % n_alpha];
            variances[i] < prev && variances[i] <= next
        })
        .count();
    let alpha0 = best as f64 * d_alpha;
    Ok(UncertaintyResult::from_variance(
        alpha0,
        variances[best],
        src.density(alpha0 + PI),
        local_minima.max(1),
    ))
}
