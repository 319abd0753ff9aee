//! Acceptance criteria, one line per criterion. Exits nonzero if any fails.

use std::f64::consts::{LN_2, PI, SQRT_2};
use std::time::{Duration, Instant};

use phasekit::bases::{overlap_matrix, BasisFamily};
use phasekit::cli::suites::{random_states, stream_rng, STREAM_ANGLES, STREAM_OPERATOR_STATES};
use phasekit::relations::{
    check_relation_at, check_relation_min, commutator_check, delta_term_expectation, momentum_stats,
};
use phasekit::series::{poisson_kernel, sine_cot_sum};
use phasekit::{
    grid_oracle, make_coherent_phase_state, make_coherent_state, make_number_state, make_rotor_wavepacket,
    make_two_mode_superposition, make_two_peak_density, phase_uncertainty, Complex, PhaseProfile, Truncation,
};
use rand::RngExt;

const SEED: u64 = 42;

struct Report {
    failed: Vec<String>,
    total: usize,
}

impl Report {
    fn check(&mut self, id: &str, what: &str, value: f64, bound: &str, pass: bool) {
        self.total += 1;
        let tag = if pass { "PASS" } else { "FAIL" };
        println!("{tag} {id:<6} {what:<58} value={value:<24e} {bound}");
        if !pass {
            self.failed.push(id.to_string());
        }
    }

    fn abs(&mut self, id: &str, what: &str, got: f64, want: f64, tol: f64) {
        let err = (got - want).abs();
        self.check(id, what, err, &format!("|err|<={tol:e}"), err <= tol);
    }

    fn time(&mut self, id: &str, what: &str, took: Duration, limit: Duration) {
        let s = took.as_secs_f64();
        self.check(id, what, s, &format!("seconds<{}", limit.as_secs_f64()), took < limit);
    }
}

fn ac1(r: &mut Report) {
    let s = make_number_state(0).unwrap();
    phase_uncertainty(&s).unwrap();
    // median of repeated runs after warm-up
    let mut times: Vec<Duration> = (0..9)
        .map(|_| {
            let t = Instant::now();
            phase_uncertainty(&s).unwrap();
            t.elapsed()
        })
        .collect();
    times.sort();
    let u = phase_uncertainty(&s).unwrap();
    r.abs(
        "AC1",
        "number state delta_theta = pi/sqrt3",
        u.delta_theta,
        PI / 3f64.sqrt(),
        1e-9,
    );
    r.time(
        "AC1t",
        "number state uncertainty runtime",
        times[4],
        Duration::from_millis(1),
    );
}

fn ac2(r: &mut Report) {
    for (name, delta) in [("pi/4", PI / 4.0), ("pi/2", PI / 2.0), ("pi", PI)] {
        let d = make_two_peak_density(delta).unwrap();
        let u = phase_uncertainty(&d).unwrap();
        r.abs(
            "AC2",
            &format!("two-peak variance, delta={name}"),
            u.variance,
            PI * PI / 4.0 + delta * delta / 12.0,
            1e-8,
        );
    }
    let u = phase_uncertainty(&make_two_peak_density(PI).unwrap()).unwrap();
    r.abs(
        "AC2",
        "two-peak variance at delta=pi equals pi^2/3",
        u.variance,
        PI * PI / 3.0,
        1e-8,
    );
}

fn ac3(r: &mut Report) {
    let eps: f64 = 1e-3;
    let t = Instant::now();
    let s = make_rotor_wavepacket(eps, 0.5, Truncation::default()).unwrap();
    let u = phase_uncertainty(&s).unwrap();
    let ms = momentum_stats(&s).unwrap();
    let took = t.elapsed();
    let ratio = u.delta_theta / eps;
    r.check(
        "AC3",
        "packet delta_theta/epsilon",
        ratio,
        "in[0.99,1.01]",
        (0.99..=1.01).contains(&ratio),
    );
    r.abs(
        "AC3",
        "packet delta_L (e^eps - e^-eps)/sqrt2",
        ms.std * (eps.exp() - (-eps).exp()) / SQRT_2,
        1.0,
        1e-9,
    );
    let prod = ms.std * u.delta_theta;
    let rel = (prod - 1.0 / SQRT_2).abs() * SQRT_2;
    r.check(
        "AC3",
        "packet delta_L delta_theta vs 1/sqrt2 (relative)",
        rel,
        "rel<=5e-2",
        rel <= 0.05,
    );
    r.check(
        "AC3",
        "packet edge density rho(beta+pi)",
        u.edge_density_at_min,
        "<=1e-4",
        u.edge_density_at_min <= 1e-4,
    );
    r.time(
        "AC3t",
        "packet construction and statistics runtime",
        took,
        Duration::from_secs(5),
    );
}

fn ac4(r: &mut Report) {
    let (l, big_l, gamma, beta) = (0i64, 1i64, PI / 4.0, 0.3);
    let s = make_two_mode_superposition(l, big_l, gamma, beta).unwrap();
    let profile = PhaseProfile::new(&s).unwrap();
    let k = (l - big_l) as f64;
    let ex = profile.find_extrema(512).unwrap();
    let worst = ex.iter().map(|e| (k * e.alpha + beta).sin().abs()).fold(0.0, f64::max);
    r.check(
        "AC4",
        "two-mode extrema max|sin((l-L)alpha+beta)|",
        worst,
        "<=1e-10",
        worst <= 1e-10 && !ex.is_empty(),
    );
    let u = profile.uncertainty(512).unwrap();
    r.abs(
        "AC4",
        "two-mode variance = pi^2/3 - 2|sin2gamma|/(l-L)^2",
        u.variance,
        PI * PI / 3.0 - 2.0 * (2.0 * gamma).sin().abs() / (k * k),
        1e-8,
    );
    let rel = check_relation_min(&s).unwrap();
    r.check("AC4", "two-mode relation margin", rel.margin, ">0", rel.margin > 0.0);
}

fn ac5(r: &mut Report) {
    let eps: f64 = 1e-4;
    let s = make_coherent_phase_state(Complex::new((-eps).exp(), 0.0), Truncation::default()).unwrap();
    let u = phase_uncertainty(&s).unwrap();
    let rel = (u.variance / eps - 4.0 * LN_2).abs() / (4.0 * LN_2);
    r.check(
        "AC5",
        "coherent phase variance/epsilon vs 4ln2 (relative)",
        rel,
        "rel<=2e-2",
        rel <= 0.02,
    );
    let eps: f64 = 1e-3;
    let s = make_coherent_phase_state(Complex::new((-eps).exp(), 0.0), Truncation::default()).unwrap();
    let ms = momentum_stats(&s).unwrap();
    let rel = (2.0 * eps * ms.std - 1.0).abs();
    r.check(
        "AC5",
        "coherent phase 2 epsilon delta_N vs 1 (relative)",
        rel,
        "rel<=1e-3",
        rel <= 1e-3,
    );
}

fn ac6(r: &mut Report) {
    let mut margins = Vec::new();
    for rr in [1.0, 2.0, 4.0, 8.0] {
        let s = make_coherent_state(rr, 0.0, Truncation::default()).unwrap();
        let ms = momentum_stats(&s).unwrap();
        r.abs("AC6", &format!("coherent state delta_N, r={rr}"), ms.std, rr, 1e-6);
        let rel = check_relation_min(&s).unwrap();
        r.check(
            "AC6",
            &format!("coherent state margin, r={rr}"),
            rel.margin,
            ">0",
            rel.margin > 0.0,
        );
        margins.push(rel.margin);
    }
    let step = margins.windows(2).map(|w| w[0] - w[1]).fold(f64::INFINITY, f64::min);
    r.check(
        "AC6",
        "coherent state margin decreasing in r (min step)",
        step,
        ">0",
        step > 0.0,
    );
}

fn ac7_ac12(r: &mut Report) {
    let t = Instant::now();
    let states = random_states(SEED, phasekit::cli::suites::STREAM_RELATION_STATES, 1000, 32);
    let mut rng = stream_rng(SEED, STREAM_ANGLES);
    let mut worst_at = f64::INFINITY;
    let mut worst_min = f64::INFINITY;
    let mut all_at = true;
    let mut all_min = true;
    let mut max_var = f64::NEG_INFINITY;
    for s in &states {
        for _ in 0..16 {
            let alpha = rng.random_range(-PI..PI);
            let rep = check_relation_at(s, alpha).unwrap();
            all_at &= rep.satisfied;
            worst_at = worst_at.min(rep.margin / rep.lhs.max(1.0));
        }
        let rep = check_relation_min(s).unwrap();
        all_min &= rep.satisfied;
        worst_min = worst_min.min(rep.margin / rep.lhs.max(1.0));
        max_var = max_var.max(rep.delta_theta * rep.delta_theta);
    }
    let took = t.elapsed();
    r.check(
        "AC7",
        "fixed-origin relation, 1000 states x 16 origins (min scaled margin)",
        worst_at,
        ">=-1e-9",
        all_at && worst_at >= -1e-9,
    );
    r.check(
        "AC7",
        "relation at the minimizing origin, 1000 states (min scaled margin)",
        worst_min,
        ">=-1e-9",
        all_min && worst_min >= -1e-9,
    );
    r.time("AC7t", "relation suite runtime", took, Duration::from_secs(30));
    r.check(
        "AC12",
        "max minimized variance over 1000 states",
        max_var,
        "<=pi^2/3+1e-9",
        max_var <= PI * PI / 3.0 + 1e-9,
    );
}

fn ac8(r: &mut Report) {
    let t = Instant::now();
    let states = random_states(SEED, phasekit::cli::suites::STREAM_ORACLE_STATES, 200, 16);
    let mut worst = 0.0f64;
    for s in &states {
        let a = phase_uncertainty(s).unwrap();
        let b = grid_oracle(s, 4096, 4096).unwrap();
        worst = worst.max((a.variance - b.variance).abs());
    }
    let took = t.elapsed();
    r.check(
        "AC8",
        "max |phase_uncertainty - grid_oracle| variance, 200 states",
        worst,
        "<=1e-6",
        worst <= 1e-6,
    );
    r.time("AC8t", "oracle comparison runtime", took, Duration::from_secs(60));
}

fn ac9(r: &mut Report) {
    let (x, w) = phasekit::gauss_legendre(4096);
    for eps in [1.0, 0.1, 0.01] {
        // ∫ dθ/2π over [-π, π]
        let norm: f64 = x
            .iter()
            .zip(&w)
            .map(|(x, w)| 0.5 * w * poisson_kernel(PI * x, eps).unwrap())
            .sum();
        r.abs(
            "AC9",
            &format!("Poisson kernel normalization, epsilon={eps}"),
            norm,
            1.0,
            1e-10,
        );
    }
    for (name, theta) in [("pi/4", PI / 4.0), ("pi/2", PI / 2.0), ("pi", PI)] {
        let v = sine_cot_sum(theta, 1e-6).unwrap();
        r.abs(
            "AC9",
            &format!("sine-cot sum vs cot(theta/2), theta={name}"),
            v,
            1.0 / (theta / 2.0).tan(),
            1e-4,
        );
    }
}

fn ac10(r: &mut Report) {
    let mut rng = stream_rng(SEED, STREAM_ANGLES + 100);
    let mut off = 0.0f64;
    let mut diag = 0.0f64;
    for _ in 0..8 {
        let alpha = rng.random_range(-PI..PI);
        let c = commutator_check(alpha, -64, 64).unwrap();
        off = off.max(c.max_offdiag_error);
        diag = diag.max(c.max_diag_error);
    }
    r.check(
        "AC10",
        "commutator off-diagonal max error, [-64,64], 8 origins",
        off,
        "<=1e-14",
        off <= 1e-14,
    );
    r.check("AC10", "commutator diagonal max error", diag, "<=1e-14", diag <= 1e-14);
    let states = random_states(SEED, STREAM_OPERATOR_STATES, 64, 8);
    let mut worst = 0.0f64;
    for s in &states {
        let alpha = rng.random_range(-PI..PI);
        let got = delta_term_expectation(s, alpha).unwrap();
        let want = PhaseProfile::new(s).unwrap().edge_density(alpha);
        worst = worst.max((got - want).abs());
    }
    r.check(
        "AC10",
        "delta term expectation vs edge density, 64 8-mode states",
        worst,
        "<=1e-10",
        worst <= 1e-10,
    );
}

fn ac11(r: &mut Report) {
    for fam in BasisFamily::ALL {
        let rep = overlap_matrix(fam, fam, 64, 1024).unwrap();
        r.check(
            "AC11",
            &format!("Gram matrix defect, {} N=64 quad_n=1024", fam.as_str()),
            rep.unitarity_defect,
            "<=1e-8",
            rep.unitarity_defect <= 1e-8,
        );
    }
    let rep = overlap_matrix(BasisFamily::SgCosine, BasisFamily::HalfSine, 32, 4096).unwrap();
    r.check(
        "AC11b",
        "sg_cosine-half_sine leading 16x16 block unitarity defect, N=32",
        rep.block_defect,
        "<=1e-6",
        rep.block_defect <= 1e-6,
    );
}

fn main() {
    let mut r = Report {
        failed: Vec::new(),
        total: 0,
    };
    ac1(&mut r);
    ac2(&mut r);
    ac3(&mut r);
    ac4(&mut r);
    ac5(&mut r);
    ac6(&mut r);
    ac7_ac12(&mut r);
    ac8(&mut r);
    ac9(&mut r);
    ac10(&mut r);
    ac11(&mut r);
    println!("{} checks, {} failed", r.total, r.failed.len());
    if !r.failed.is_empty() {
        println!("failed: {}", r.failed.join(", "));
        std::process::exit(1);
    }
}
