//! Acceptance criteria. Each test prints one `PASS name: ...` or
//! `FAIL name: ...` line before asserting; run with `--nocapture` to see them.

use std::fs;
use std::process::Command;
use std::time::{Duration, Instant};

use contagion_core::bifurcation::{
    anc_horizon, anc_lower_bound, d_in_cdf, q_max, t_anc, t_wfp, CdfMode, RegimeQuery,
};
use contagion_core::contagion::{cluster_seed, run_contagion};
use contagion_core::distance::DistanceMatrix;
use contagion_core::map::PointCloud;
use contagion_core::network::build_network;
use contagion_core::oracle::{brute_force_wasserstein, naive_vr_barcode};
use contagion_core::tda::{
    reference_torus_barcode, vr_persistence, wasserstein, Barcode, PersistencePair, WassersteinParams,
};
use contagion_core::{ContagionConfig, NodeId, Radius};
use contagion_sweep::{run_gamma_study, run_sweep, Measure, SweepConfig, SweepResult};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn report(name: &str, ok: bool, details: impl AsRef<str>) {
    println!("{} {name}: {}", if ok { "PASS" } else { "FAIL" }, details.as_ref());
    assert!(ok, "{name}: {}", details.as_ref());
}

fn within(name: &str, start: Instant, limit: Duration) -> String {
    let took = start.elapsed();
    assert!(took < limit, "{name} took {took:?}, limit {limit:?}");
    format!("{:.2?}", took)
}

fn random_cloud(rng: &mut StdRng, points: usize, dim: usize) -> PointCloud<f64> {
    let coords = (0..points * dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    PointCloud::from_rows(dim, coords).unwrap()
}

fn random_diagram(rng: &mut StdRng) -> Barcode<f64> {
    let len = rng.random_range(0..=6);
    Barcode::new((0..len).map(|_| {
        let b: f64 = rng.random_range(0.0..1.0);
        PersistencePair::new(1, b, b + rng.random_range(0.001..1.0))
    }))
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len().is_multiple_of(2) {
        (v[m - 1] + v[m]) / 2.0
    } else {
        v[m]
    }
}

#[test]
fn bifurcation_exactness() {
    let start = Instant::now();
    let values = (t_wfp(8, 2).unwrap(), t_wfp(4, 0).unwrap(), anc_horizon(8, 2), q_max(2500, 8).unwrap());
    let took = within("bifurcation exactness", start, Duration::from_secs(1));
    let ok = values == (0.3, 0.25, 0.2, 988);
    report(
        "bifurcation exactness",
        ok,
        format!("t_wfp(8,2)={} t_wfp(4,0)={} H(8,2)={} q_max={} in {took}", values.0, values.1, values.2, values.3),
    );
}

#[test]
fn pure_lattice_transition() {
    let start = Instant::now();
    let cfg = SweepConfig {
        n: 20,
        p_squared: 2,
        dng: vec![0],
        thresholds: vec![0.30, 0.35, 0.38, 0.40],
        measures: [Measure::Geometry, Measure::Dimensionality].into(),
        cache: false,
        ..SweepConfig::default()
    };
    let r = run_sweep(&cfg).unwrap();
    let took = within("pure lattice transition", start, Duration::from_secs(300));
    let mut problems = Vec::new();
    let mut summary = Vec::new();
    for c in &r.records {
        let rho = c.rho.unwrap();
        summary.push(format!("T={} rho={rho:.4} P={:?} sentinels={}", c.threshold, c.dimension, c.has_infinite));
        if c.threshold < 0.375 {
            if c.has_infinite || c.dimension != Some(4) || rho.is_nan() || rho < 0.9 {
                problems.push(format!("T={} below the wavefront threshold", c.threshold));
            }
        } else if !c.has_infinite || rho.is_nan() || rho > 0.2 {
            problems.push(format!("T={} above the wavefront threshold", c.threshold));
        }
    }
    report(
        "pure lattice transition",
        problems.is_empty(),
        format!("{}; violations: {problems:?}; {took}", summary.join(", ")),
    );
}

#[test]
fn stalled_contagion_fixture() {
    let start = Instant::now();
    let mut counts = Vec::new();
    for n in 5..=15 {
        let net = build_network(n, Radius::from_squared(1).unwrap(), 0, 0.0, 0).unwrap();
        let cfg = ContagionConfig::for_network(0.3, &net).unwrap();
        let times = run_contagion(&net, &cluster_seed(&net, NodeId::new(2, 2)), &cfg);
        counts.push(times.iter().filter(|&&t| t != cfg.sentinel).count());
    }
    let took = within("stalled contagion", start, Duration::from_secs(1));
    report(
        "stalled contagion",
        counts.iter().all(|&c| c == 9),
        format!("active counts for n = 5..=15: {counts:?} in {took}"),
    );
}

#[test]
fn persistence_matches_oracle() {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(11);
    let mut mismatches = 0;
    for _ in 0..200 {
        let points = rng.random_range(1..=8);
        let dim = rng.random_range(1..=3);
        let d = DistanceMatrix::from_cloud(&random_cloud(&mut rng, points, dim));
        if vr_persistence(&d, 1).unwrap() != naive_vr_barcode(&d, 1) {
            mismatches += 1;
        }
    }
    let took = within("persistence oracle", start, Duration::from_secs(60));
    report("persistence oracle", mismatches == 0, format!("{mismatches}/200 mismatches in {took}"));
}

#[test]
fn torus_signature() {
    let start = Instant::now();
    let b: Barcode<f64> = reference_torus_barcode(10).unwrap();
    let took = within("torus signature", start, Duration::from_secs(120));
    let p = b.persistences(1);
    let infinite = b.infinite_count(0);
    let ok = p.len() >= 3 && p[1] >= 3.0 * p[2] && infinite == 1;
    report(
        "torus signature",
        ok,
        format!("top dim-1 persistences {:?}, infinite dim-0 bars {infinite}, {took}", &p[..p.len().min(3)]),
    );
}

#[test]
fn calibration_scale_invariance() {
    let mut rng = StdRng::seed_from_u64(12);
    let params = WassersteinParams::default();
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let points = rng.random_range(3..=30);
        let cloud = random_cloud(&mut rng, points, 2);
        let base = vr_persistence(&DistanceMatrix::from_cloud(&cloud), 1).unwrap().calibrate().unwrap();
        for s in [0.1, 10.0] {
            let scaled = vr_persistence(&DistanceMatrix::from_cloud(&cloud.scaled(s)), 1)
                .unwrap()
                .calibrate()
                .unwrap();
            for dim in 0..=1 {
                worst = worst.max(wasserstein(&base, &scaled, dim, &params).unwrap());
            }
        }
    }
    report("calibration invariance", worst <= 1e-9, format!("max W2 over 50 clouds x 2 scales = {worst:e}"));
}

#[test]
fn wasserstein_axioms() {
    let mut rng = StdRng::seed_from_u64(13);
    let params = WassersteinParams::default();
    let mut failures = Vec::new();
    let mut worst_oracle = 0.0f64;
    for case in 0..100 {
        let (a, b, c) = (random_diagram(&mut rng), random_diagram(&mut rng), random_diagram(&mut rng));
        let w = |x: &Barcode<f64>, y: &Barcode<f64>| wasserstein(x, y, 1, &params).unwrap();
        let ab = w(&a, &b);
        if ab != w(&b, &a) {
            failures.push(format!("case {case}: asymmetric"));
        }
        if w(&a, &a) != 0.0 {
            failures.push(format!("case {case}: W(D,D) != 0"));
        }
        if ab > w(&a, &c) + w(&c, &b) + 1e-9 {
            failures.push(format!("case {case}: triangle"));
        }
        let oracle = brute_force_wasserstein(&a, &b, 1, &params);
        let rel = (ab - oracle).abs() / oracle.abs().max(1.0);
        worst_oracle = worst_oracle.max(rel);
        if rel > 1e-12 {
            failures.push(format!("case {case}: oracle {oracle} vs {ab}"));
        }
    }
    report(
        "wasserstein axioms",
        failures.is_empty(),
        format!("100 pairs, worst relative oracle gap {worst_oracle:e}; failures {failures:?}"),
    );
}

#[test]
fn anc_sandwich() {
    let start = Instant::now();
    let mut violations = Vec::new();
    let mut checked = 0;
    for q_t in [494, 988] {
        for width in [0, 8] {
            for dng in 1..=25 {
                let q = RegimeQuery { dg: 8, dng, nodes: 2500, q_t, width };
                let t = t_anc(&q, CdfMode::Binomial).unwrap().value;
                let (lo, hi) = (anc_lower_bound(&q), anc_horizon(8, dng));
                checked += 1;
                if !(lo <= t && t < hi) {
                    violations.push(format!("(q_t={q_t}, w={width}, dNG={dng}: {lo:.4} <= {t:.4} < {hi:.4})"));
                }
            }
        }
    }
    let took = within("anc sandwich", start, Duration::from_secs(1));
    report(
        "anc sandwich",
        violations.is_empty(),
        format!("{}/{checked} points violate: {}; {took}", violations.len(), violations.join(" ")),
    );
}

#[test]
fn exact_and_binomial_cdfs_agree() {
    let (nodes, q_t) = (1_000_000, 988);
    let mut worst = 0.0f64;
    for dng in 0..=10 {
        for k in 0..=dng {
            let exact: f64 = d_in_cdf(k, dng, q_t, nodes, CdfMode::Exact).unwrap();
            let binomial: f64 = d_in_cdf(k, dng, q_t, nodes, CdfMode::Binomial).unwrap();
            worst = worst.max((exact - binomial).abs());
        }
    }
    report("exact vs binomial", worst < 1e-4, format!("max CDF gap {worst:e} at N = 1e6"));
}

#[test]
fn gamma_directionality() {
    let seeds = 1..=10u64;
    let mut rho = (Vec::new(), Vec::new());
    let mut w = (Vec::new(), Vec::new());
    let mut planar_seeds = 0;
    for seed in seeds.clone() {
        let low = SweepConfig {
            n: 20,
            seed,
            thresholds: vec![0.05],
            gammas: vec![0.0, 3.0],
            measures: [Measure::Geometry, Measure::Topology].into(),
            cache: false,
            ..SweepConfig::gamma_study()
        };
        let r = run_gamma_study(&low).unwrap();
        for c in &r.records {
            let (rv, wv) = if c.gamma == 0.0 { (&mut rho.0, &mut w.0) } else { (&mut rho.1, &mut w.1) };
            rv.push(c.rho.unwrap());
            wv.push(c.wasserstein.unwrap_or(f64::NAN));
        }
        let mid = SweepConfig {
            n: 20,
            seed,
            thresholds: vec![0.25],
            measures: [Measure::Dimensionality].into(),
            cache: false,
            ..SweepConfig::gamma_study()
        };
        let r = run_gamma_study(&mid).unwrap();
        if r.records.iter().all(|c| c.dimension == Some(4)) {
            planar_seeds += 1;
        }
    }
    let (r0, r3, w0, w3) = (median(rho.0), median(rho.1), median(w.0), median(w.1));
    let ok = r3 > r0 && w3 < w0 && planar_seeds * 2 > seeds.count();
    report(
        "gamma directionality",
        ok,
        format!("T=0.05: median rho {r0:.4} -> {r3:.4}, median W2 {w0:.4} -> {w3:.4}; T=0.25: P=4 for every gamma on {planar_seeds}/10 seeds"),
    );
}

#[test]
fn end_to_end_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = |threads: usize, cache: bool, sub: &str| SweepConfig {
        n: 10,
        dng: vec![0, 2, 5],
        thresholds: vec![0.05, 0.2, 0.3, 0.45],
        gammas: vec![0.0, 1.0],
        measures: [Measure::Geometry, Measure::Dimensionality, Measure::Topology].into(),
        threads: Some(threads),
        cache,
        output_dir: dir.path().join(sub),
        ..SweepConfig::default()
    };
    let csv = |r: SweepResult| r.to_csv_string();
    let one = csv(run_sweep(&cfg(1, false, "a")).unwrap());
    let runs = [
        ("4 threads", csv(run_sweep(&cfg(4, false, "a")).unwrap())),
        ("cold cache", csv(run_sweep(&cfg(4, true, "b")).unwrap())),
        ("warm cache", csv(run_sweep(&cfg(1, true, "b")).unwrap())),
    ];
    let mut differing: Vec<&str> = runs.iter().filter(|(_, s)| *s != one).map(|(n, _)| *n).collect();

    let cli = |threads: &str| {
        let out = dir.path().join(format!("cli{threads}"));
        let status = Command::new(env!("CARGO_BIN_EXE_cmap"))
            .args(["sweep", "--n", "10", "--dng", "0,3", "--thresholds", "0.1,0.3", "--measures"])
            .args(["geometry,dimensionality,topology", "--threads", threads, "--out"])
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success());
        fs::read(out.join("results.csv")).unwrap()
    };
    if cli("1") != cli("3") {
        differing.push("cli threads");
    }
    report(
        "end-to-end determinism",
        differing.is_empty(),
        format!("{} cells; runs differing from the single-thread baseline: {differing:?}", one.lines().count()),
    );
}
