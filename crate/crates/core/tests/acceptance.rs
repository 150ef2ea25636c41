//! Acceptance checks. Each criterion prints one PASS/FAIL line; the process
//! exits non-zero if any fails.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use twinbeam::entangle::{log_negativity, partial_trace_cd, reduced_ab_from_coeffs, tmsv_density, DensityMatrix};
use twinbeam::homodyne::{
    build_four_mode_state, build_two_pulse_state, convergence_scan, pulse_comparison, twin_beam_variance,
    PulseSplitter, SplitterAmplitudes, SplitterModel,
};
use twinbeam::phase::{
    decay_curve, distribution_variance, fit_decay, phase_distribution, tmsv_phase_density, vacuum_reference_variance,
    PhaseGrid, PLOT_M_MAX,
};
use twinbeam::squeeze::{
    quadrature_variance_from_counts, tmsv_coefficients, tmsv_coefficients_to_order,
    variance_coherent_description, variance_fock_description, variance_series_sum, Budget, HomodyneSetup,
    SqueezeParams, Truncation, DEFAULT_EPSILON,
};

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome {
            pass,
            detail: detail.into(),
        }
    }
}

type Check = fn() -> Outcome;

/// Small deterministic generator so the randomized tuples are reproducible.
struct SplitMix(u64);

impl SplitMix {
    fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }
}

fn timed(limit: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut out = f();
    let elapsed = start.elapsed();
    if elapsed > limit {
        out.pass = false;
    }
    out.detail = format!("{}; {:.3}s (limit {:.3}s)", out.detail, elapsed.as_secs_f64(), limit.as_secs_f64());
    out
}

fn c01_description_equivalence() -> Outcome {
    let mut rng = SplitMix(0x5EED_0001);
    let tuples: Vec<_> = (0..1000)
        .map(|_| {
            (
                rng.uniform(0.0, 2.5),
                rng.uniform(0.0, 2.0 * PI),
                rng.uniform(0.0, 2.0 * PI),
                rng.uniform(0.0, 2.0 * PI),
                rng.uniform(1.0, 100.0),
            )
        })
        .collect();
    timed(Duration::from_secs(1), || {
        let mut worst = 0.0f64;
        for &(r, phi, ta, tb, beta) in &tuples {
            let params = SqueezeParams::new(r, phi).unwrap();
            let coherent = HomodyneSetup::from_quadratures(ta, tb, Budget::LoAmplitude(beta)).unwrap();
            let fock = coherent.with_budget(Budget::Photons(2.0 * beta * beta));
            let a = variance_coherent_description(params, &coherent);
            let b = variance_fock_description(params, &fock);
            let scale = a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
            worst = worst.max((a - b).abs() / scale);
        }
        Outcome::new(worst <= 1e-12, format!("max relative difference {worst:e} over 1000 tuples"))
    })
}

fn c02_squeezing_floor() -> Outcome {
    let phi = 0.7;
    let mut worst = 0.0f64;
    for r in [0.5, 1.0, 1.5, 2.0] {
        let params = SqueezeParams::new(r, phi).unwrap();
        let n = 1000.0;
        let steps = 200_000;
        let min = (0..steps)
            .map(|k| {
                let ta = 2.0 * PI * k as f64 / steps as f64;
                let setup = HomodyneSetup::from_quadratures(ta, 0.0, Budget::Photons(n)).unwrap();
                variance_fock_description(params, &setup) / n
            })
            .fold(f64::INFINITY, f64::min);
        worst = worst.max((min - (-2.0 * r).exp()).abs());
    }
    let mut flag_errors = 0usize;
    let mut rng = SplitMix(0x5EED_0002);
    for _ in 0..5000 {
        let r = rng.uniform(0.0, 2.5);
        let phi = rng.uniform(0.0, 2.0 * PI);
        let ta = rng.uniform(0.0, 2.0 * PI);
        let tb = rng.uniform(0.0, 2.0 * PI);
        let beta = rng.uniform(1.0, 100.0);
        let params = SqueezeParams::new(r, phi).unwrap();
        let setup = HomodyneSetup::from_quadratures(ta, tb, Budget::LoAmplitude(beta)).unwrap();
        let count_var = variance_coherent_description(params, &setup);
        let q = quadrature_variance_from_counts(count_var, beta).unwrap();
        let expected = (ta + tb - phi).cos() > r.tanh();
        if ((ta + tb - phi).cos() - r.tanh()).abs() < 1e-9 {
            continue;
        }
        if q.squeezed != expected || q.squeezed != (q.value < 0.25) {
            flag_errors += 1;
        }
    }
    Outcome::new(
        worst <= 1e-6 && flag_errors == 0,
        format!("max |min/N - e^(-2r)| {worst:e}; flag mismatches {flag_errors}"),
    )
}

fn c03_series_oracle() -> Outcome {
    let mut worst = 0.0f64;
    let mut slowest = Duration::ZERO;
    for k in 0..=15 {
        let r = 0.1 * k as f64;
        for (phi, ta, tb) in [(0.0, 0.0, 0.0), (0.3, 1.1, 2.0), (1.0, 2.5, 0.2), (2.0, 0.4, 4.0)] {
            let params = SqueezeParams::new(r, phi).unwrap();
            let setup = HomodyneSetup::from_quadratures(ta, tb, Budget::Photons(500.0)).unwrap();
            let start = Instant::now();
            let series = variance_series_sum(params, &setup, 200);
            slowest = slowest.max(start.elapsed());
            let closed = variance_fock_description(params, &setup);
            worst = worst.max((series - closed).abs() / closed.abs());
        }
    }
    Outcome::new(
        worst <= 1e-10 && slowest < Duration::from_millis(10),
        format!("max relative difference {worst:e}; slowest point {:.3}ms", slowest.as_secs_f64() * 1e3),
    )
}

fn c04_exact_convergence() -> Outcome {
    timed(Duration::from_secs(60), || {
        let params = SqueezeParams::new(0.3, 0.0).unwrap();
        let setup = HomodyneSetup::from_quadratures(0.0, 0.0, Budget::Photons(0.0)).unwrap();
        let rows = convergence_scan(
            params,
            Truncation::default(),
            &setup,
            &[40, 80, 160, 320],
            SplitterModel::Binomial,
        )
        .unwrap();
        let devs: Vec<f64> = rows.iter().map(|r| r.deviation).collect();
        let analytic_ok = rows
            .iter()
            .all(|row| (row.analytic - row.n as f64 * (-0.6f64).exp()).abs() <= 1e-9 * row.n as f64);
        let decreasing = devs.windows(2).all(|w| w[1] < w[0]);
        let last = *devs.last().unwrap();
        Outcome::new(
            analytic_ok && decreasing && last < 0.05,
            format!("deviations {devs:?}"),
        )
    })
}

fn c05_two_pulse() -> Outcome {
    timed(Duration::from_secs(120), || {
        let params = SqueezeParams::new(0.3, 0.0).unwrap();
        let setup = HomodyneSetup::from_quadratures(0.0, 0.0, Budget::Photons(0.0)).unwrap();
        let row = pulse_comparison(params, Truncation::default(), &setup, &[320]).unwrap()[0];
        let limit = 5.0 * row.m_max as f64 / 320.0;
        Outcome::new(
            row.relative_difference <= limit,
            format!(
                "single {:.6} two-pulse {:.6} relative {:.4e} (limit {limit:.4})",
                row.single_pulse, row.two_pulse, row.relative_difference
            ),
        )
    })
}

fn c06_twin_beam() -> Outcome {
    let mut worst = 0.0f64;
    let mut count = 0;
    for r in [0.0, 0.3, 0.7, 1.0] {
        let coeffs = tmsv_coefficients(SqueezeParams::new(r, 0.4).unwrap(), DEFAULT_EPSILON).unwrap();
        let m = coeffs.m_max() as u32;
        for n in [3 * m + 10, 6 * m + 20, 10 * m + 40] {
            for model in [SplitterModel::Binomial, SplitterModel::Uniform { half_width: 8 }] {
                let splitter = SplitterAmplitudes::for_budget(model, n, coeffs.m_max()).unwrap();
                let state = build_four_mode_state(&coeffs, n, &splitter).unwrap();
                worst = worst.max(twin_beam_variance(&state).unwrap().abs());
                count += 1;
            }
            let two = build_two_pulse_state(&coeffs, n as u64, 0, &PulseSplitter::for_budget(n)).unwrap();
            worst = worst.max(twin_beam_variance(&two).unwrap().abs());
            count += 1;
        }
    }
    Outcome::new(worst <= 1e-12, format!("max |Var(n_a - n_b)| {worst:e} over {count} states"))
}

fn c07_phase_shape() -> Outcome {
    timed(Duration::from_secs(5), || {
        let grid = PhaseGrid::new(0.0, 4096).unwrap();
        let nearest_pi = (0..grid.points())
            .min_by(|&a, &b| (grid.point(a) - PI).abs().total_cmp(&(grid.point(b) - PI).abs()))
            .unwrap();
        let mut notes = Vec::new();
        let mut pass = true;
        let mut variances = Vec::new();
        for r in [0.5, 1.0, 1.5] {
            let params = SqueezeParams::new(r, 0.0).unwrap();
            let coeffs = tmsv_coefficients_to_order(params, PLOT_M_MAX).unwrap();
            let dist = phase_distribution(&coeffs, grid);
            let min = dist.values().iter().copied().fold(f64::INFINITY, f64::min);
            let norm = (dist.normalization() - 1.0).abs();
            let pointwise = grid
                .iter()
                .zip(dist.values())
                .map(|(x, &p)| (p - tmsv_phase_density(params, x)).abs())
                .fold(0.0, f64::max);
            let var = distribution_variance(&dist).unwrap();
            pass &= min >= 0.0 && norm <= 1e-6 && dist.argmax() == nearest_pi && pointwise <= 1e-8;
            variances.push(var);
            notes.push(format!("r={r}: min {min:e} norm {norm:e} pointwise {pointwise:e} var {var:.6}"));
        }
        pass &= variances.windows(2).all(|w| w[1] < w[0]);
        Outcome::new(pass, notes.join("; "))
    })
}

fn decay_points(rs: &[f64]) -> Vec<twinbeam::phase::DecayPoint> {
    decay_curve(rs, PhaseGrid::new(0.0, 4096).unwrap(), Truncation::Order(PLOT_M_MAX)).unwrap()
}

fn c08_decay_fit() -> Outcome {
    timed(Duration::from_secs(60), || {
        let rs: Vec<f64> = (11..=25).map(|k| k as f64 / 10.0).collect();
        let points = decay_points(&rs);
        let fit = fit_decay(&points, 1.0).unwrap();
        let worst = points
            .iter()
            .map(|p| (p.log_ratio - (-2.0 * p.r + 0.5)).abs())
            .fold(0.0, f64::max);
        let pass = (-2.1..=-1.9).contains(&fit.slope) && (0.3..=0.7).contains(&fit.intercept) && worst <= 0.15;
        Outcome::new(
            pass,
            format!(
                "slope {:.4} intercept {:.4}; max distance to -2r+0.5 {worst:.4}",
                fit.slope, fit.intercept
            ),
        )
    })
}

fn c08_small_r_above_line() -> Outcome {
    let points = decay_points(&[0.25, 0.5]);
    let notes: Vec<String> = points
        .iter()
        .map(|p| format!("r={}: {:.4} vs line {:.4}", p.r, p.log_ratio, -2.0 * p.r + 0.5))
        .collect();
    let pass = points.iter().all(|p| p.log_ratio > -2.0 * p.r + 0.5);
    Outcome::new(pass, notes.join("; "))
}

fn c09_vacuum_reference() -> Outcome {
    let coeffs = tmsv_coefficients(SqueezeParams::new(0.0, 0.0).unwrap(), DEFAULT_EPSILON).unwrap();
    let dist = phase_distribution(&coeffs, PhaseGrid::new(0.0, 4096).unwrap());
    let var = distribution_variance(&dist).unwrap();
    let diff = (var - vacuum_reference_variance()).abs();
    Outcome::new(
        diff <= 1e-6 && (vacuum_reference_variance() - PI * PI / 3.0).abs() < 1e-15,
        format!("variance {var:.12} vs pi^2/3, difference {diff:e}"),
    )
}

fn c10_separability() -> Outcome {
    timed(Duration::from_secs(10), || {
        let mut notes = Vec::new();
        let mut pass = true;
        let mut worst_neg = 0.0f64;
        for r in [0.0, 0.5, 1.0, 1.5, 2.0, 2.5] {
            let coeffs = tmsv_coefficients(SqueezeParams::new(r, 0.0).unwrap(), DEFAULT_EPSILON).unwrap();
            worst_neg = worst_neg.max(log_negativity(&reduced_ab_from_coeffs(&coeffs)).unwrap().abs());
        }
        pass &= worst_neg == 0.0;
        notes.push(format!("max reduced-state negativity {worst_neg:e}"));

        let mut worst_trace = 0.0f64;
        for r in [0.0, 0.5, 1.0] {
            let coeffs = tmsv_coefficients(SqueezeParams::new(r, 0.3).unwrap(), DEFAULT_EPSILON).unwrap();
            let expected = reduced_ab_from_coeffs(&coeffs);
            for model in [SplitterModel::Binomial, SplitterModel::Uniform { half_width: 10 }] {
                let n = 4 * coeffs.m_max() as u32 + 40;
                let splitter = SplitterAmplitudes::for_budget(model, n, coeffs.m_max()).unwrap();
                let state = build_four_mode_state(&coeffs, n, &splitter).unwrap();
                worst_trace = worst_trace.max(max_entry_difference(&partial_trace_cd(&state), &expected));
            }
        }
        pass &= worst_trace <= 1e-12;
        notes.push(format!("max partial-trace entry difference {worst_trace:e}"));
        Outcome::new(pass, notes.join("; "))
    })
}

fn c10_tmsv_negativity() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;
    for r in [0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5] {
        let coeffs = tmsv_coefficients_to_order(SqueezeParams::new(r, 0.0).unwrap(), 40).unwrap();
        let en = log_negativity(&tmsv_density(&coeffs)).unwrap();
        let diff = (en - 2.0 * r).abs();
        pass &= diff <= 1e-3;
        notes.push(format!("r={r}: {diff:.2e}"));
    }
    Outcome::new(pass, format!("|E_N - 2r| {}", notes.join(", ")))
}

fn max_entry_difference(a: &DensityMatrix, b: &DensityMatrix) -> f64 {
    use std::collections::BTreeMap;
    let keyed = |m: &DensityMatrix| -> BTreeMap<(usize, usize, usize, usize), twinbeam::Complex64> {
        let d = m.dim();
        m.entries()
            .map(|(&(i, j), &v)| ((i / d, i % d, j / d, j % d), v))
            .collect()
    };
    let (ka, kb) = (keyed(a), keyed(b));
    ka.keys()
        .chain(kb.keys())
        .map(|k| {
            let x = ka.get(k).copied().unwrap_or_default();
            let y = kb.get(k).copied().unwrap_or_default();
            (x - y).norm()
        })
        .fold(0.0, f64::max)
}

fn run_cli(dir: &Path, name: &str, args: &[&str], workers: &str) -> Vec<u8> {
    let out = dir.join(format!("{name}-{workers}.csv"));
    let status = Command::new(env!("CARGO_BIN_EXE_twinbeam"))
        .args(args)
        .args(["--workers", workers, "--output"])
        .arg(&out)
        .status()
        .expect("binary runs");
    assert!(status.success(), "{name} exited with {status}");
    std::fs::read(out).expect("output written")
}

fn c11_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let scans: &[(&str, &[&str])] = &[
        ("homodyne", &["homodyne-exact", "--r", "0.3", "--n", "40,80,160"]),
        ("multipulse", &["multipulse", "--r", "0.3", "--n", "80,160"]),
        ("decay", &["decay-fit", "--r-from", "0.5", "--r-to", "2.5", "--r-step", "0.25"]),
        ("phase", &["phase-dist", "--r", "1", "--grid", "256"]),
        ("variance", &["variance", "--r", "0.8", "--beta", "10"]),
        ("reduced", &["reduced-state", "--r", "0.5"]),
        ("mixture", &["mixture", "--r", "0.5", "--alpha", "20"]),
    ];
    let mut differing = Vec::new();
    for (name, args) in scans {
        let one = run_cli(dir.path(), name, args, "1");
        let four = run_cli(dir.path(), name, args, "4");
        if one != four || one.is_empty() {
            differing.push(*name);
        }
    }
    Outcome::new(
        differing.is_empty(),
        format!("{} scans compared at 1 and 4 workers; differing {differing:?}", scans.len()),
    )
}

fn main() {
    let checks: &[(&str, &str, Check)] = &[
        ("1", "description equivalence", c01_description_equivalence),
        ("2", "squeezing floor and flag", c02_squeezing_floor),
        ("3", "series oracle", c03_series_oracle),
        ("4", "exact finite-N convergence", c04_exact_convergence),
        ("5", "two-pulse equivalence", c05_two_pulse),
        ("6", "twin-beam correlation", c06_twin_beam),
        ("7", "phase distribution shape", c07_phase_shape),
        ("8", "decay fit", c08_decay_fit),
        ("8b", "small-r points above line", c08_small_r_above_line),
        ("9", "vacuum reference", c09_vacuum_reference),
        ("10", "reduced-state separability", c10_separability),
        ("10b", "truncated TMSV negativity", c10_tmsv_negativity),
        ("11", "determinism across workers", c11_determinism),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = Vec::new();
    for &(id, name, check) in checks {
        if !filter.is_empty() && !filter.iter().any(|f| f == id) {
            continue;
        }
        let out = check();
        println!(
            "criterion {id:>3} {:<4} {name}: {}",
            if out.pass { "PASS" } else { "FAIL" },
            out.detail
        );
        if !out.pass {
            failed.push(id);
        }
    }
    if !failed.is_empty() {
        println!("failed criteria: {}", failed.join(", "));
        std::process::exit(1);
    }
}
