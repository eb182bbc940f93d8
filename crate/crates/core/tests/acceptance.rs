//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any criterion fails.

use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use phaseless::circulant::sample_random_circulant;
use phaseless::harness::{
    run_certify, run_reconstruct, run_sweep, ExperimentConfig, ExperimentReport,
};
use phaseless::injectivity::{
    certify, complement_property, locally_complementary, FunctionalSet, Verdict,
};
use phaseless::krylov::krylov_rank;
use phaseless::linalg::{embed_slice, numerical_rank, CMat, CVec, C64};
use phaseless::measurements::simulate;
use phaseless::solver::{gradient, objective};
use phaseless::spectral::{
    build_lambda_matrix, iteration_regular, penthouse_family, totally_full_spark,
};
use phaseless::{OperatorSpec, Polynomial, Tolerance};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn criterion_1() -> Outcome {
    let tol = Tolerance::default();
    let id = OperatorSpec::diagonal(&[1.0; 3]).map_err(e)?;
    ensure(
        iteration_regular(&id, &tol).map_err(e)?.regular,
        "identity not regular",
    )?;

    let sing = OperatorSpec::diagonal(&[0.0, 2.0]).map_err(e)?;
    let v = iteration_regular(&sing, &tol).map_err(e)?;
    let w = v.witness.ok_or("singular matrix: no witness")?;
    ensure(!v.regular, "singular matrix reported regular")?;
    ensure(
        (&w.polynomial - &Polynomial::monomial(1)).coeff_norm() < 1e-12,
        format!("singular witness {:?}", w.polynomial),
    )?;

    let d = OperatorSpec::diagonal(&[-1.0, 2.0]).map_err(e)?;
    ensure(
        iteration_regular(&d, &tol).map_err(e)?.regular,
        "diag(-1, 2) not regular",
    )?;

    // A^T = B^{-1} diag(i, -i) B is the quarter rotation.
    let b = CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, -1.0), c(1.0, 0.0), c(0.0, 1.0)]);
    let rot = OperatorSpec::diagonalizable(b, vec![c(0.0, 1.0), c(0.0, -1.0)], &tol).map_err(e)?;
    let v = iteration_regular(&rot, &tol).map_err(e)?;
    let w = v.witness.ok_or("rotation: no witness")?;
    ensure(!v.regular, "rotation reported regular")?;
    ensure(
        (&w.polynomial - &Polynomial::from_real(&[1.0, 0.0, 1.0])).coeff_norm() < 1e-12,
        format!("rotation witness {:?}", w.polynomial),
    )?;
    Ok("identity, singular (x), diag(-1,2), rotation (x^2+1)".into())
}

fn criterion_2() -> Outcome {
    let tol = Tolerance::default();
    // (a) diag(1, -1) sampled by (1,1) and (1,2)
    let d = OperatorSpec::diagonal(&[1.0, -1.0]).map_err(e)?;
    let phi = FunctionalSet::new(vec![vec![1.0, 1.0], vec![1.0, 2.0]]).map_err(e)?;
    let cert = certify(&d, &phi, &tol).map_err(e)?;
    let family = vec![
        vec![1.0, 1.0],
        vec![1.0, -1.0],
        vec![1.0, 2.0],
        vec![1.0, -2.0],
    ];
    let cp = complement_property(&family, &tol).map_err(e)?;
    let lambda = build_lambda_matrix(&[c(1.0, 0.0), c(-1.0, 0.0)], &tol).map_err(e)?;
    let tfs = totally_full_spark(&lambda, &tol).map_err(e)?;
    let induced_cp = complement_property(&cert.family_vectors(), &tol).map_err(e)?;
    ensure(cp.holds, "R^2 family lacks the complement property")?;
    ensure(
        induced_cp.holds,
        "induced family of (a) lacks the complement property",
    )?;
    ensure(!tfs.full, "Lambda for {1,-1} reported totally full spark")?;
    ensure(
        cert.verdict == Verdict::Inconclusive,
        format!("(a) verdict {:?}", cert.verdict),
    )?;

    // (b) eigenvalues 1, 1, -1, -1 sampled by (1, m, 1, m)
    let d4 = OperatorSpec::diagonal(&[1.0, 1.0, -1.0, -1.0]).map_err(e)?;
    let psi: Vec<Vec<f64>> = (1..=3)
        .map(|m| vec![1.0, m as f64, 1.0, m as f64])
        .collect();
    let profile = penthouse_family(&d4, &tol).map_err(e)?;
    let psi_c: Vec<CVec> = psi.iter().map(|v| d4.to_canonical(v)).collect();
    let lc = locally_complementary(&psi_c, &profile, &tol).map_err(e)?;
    let phi = FunctionalSet::new(psi).map_err(e)?;
    let cert = certify(&d4, &phi, &tol).map_err(e)?;
    let fam = cert.family_vectors();
    let distinct = phaseless::injectivity::distinct_directions(&fam, &tol);
    let cp = complement_property(&fam, &tol).map_err(e)?;
    ensure(lc.holds, "(b) not locally complementary")?;
    ensure(
        distinct == 6,
        format!("(b) induced family has {distinct} directions"),
    )?;
    ensure(!cp.holds, "(b) induced family has the complement property")?;
    ensure(
        cert.verdict != Verdict::Guaranteed,
        format!("(b) verdict {:?}", cert.verdict),
    )?;
    Ok(format!(
        "(a) oracle true, Lambda not tfs, {:?}; (b) LC true, 6 < 7 directions, oracle false, {:?}",
        Verdict::Inconclusive,
        cert.verdict
    ))
}

fn criterion_3() -> Outcome {
    let report = run_certify(&ExperimentConfig::triples_certificate()).map_err(e)?;
    ensure(report.certificates.len() == 84, "expected 84 triples")?;
    let agree = report
        .certificates
        .iter()
        .filter(|s| s.agrees == Some(true))
        .count();
    let coprime = report
        .certificates
        .iter()
        .filter(|s| s.coprime == Some(true))
        .count();
    ensure(agree == 84, format!("{agree}/84 triples agree"))?;
    let find = |l: &[usize]| {
        report
            .certificates
            .iter()
            .find(|s| s.locations == l)
            .and_then(|s| s.verdict)
    };
    ensure(
        find(&[1, 2, 3]) == Some(Verdict::Guaranteed),
        "{1,2,3} not GUARANTEED",
    )?;
    ensure(
        find(&[1, 4, 7]) != Some(Verdict::Guaranteed),
        "{1,4,7} GUARANTEED",
    )?;
    Ok(format!("84/84 agree ({coprime} coprime triples)"))
}

fn criterion_4() -> Outcome {
    let cfg = ExperimentConfig::uniqueness_replica(vec![vec![1, 2, 3], vec![1, 4, 7]]);
    let report = run_reconstruct(&cfg).map_err(e)?;
    let good: Vec<_> = report.rows_for(&[1, 2, 3]).filter(|r| r.success).collect();
    let bad: Vec<_> = report.rows_for(&[1, 4, 7]).filter(|r| r.success).collect();
    let worst = good.iter().map(|r| r.err).fold(0.0, f64::max);
    let large = bad.iter().filter(|r| r.err > 0.1).count();
    ensure(
        worst < 1e-3,
        format!("I={{1,2,3}}: sub-threshold err up to {worst:e}"),
    )?;
    ensure(
        (5..=60).contains(&good.len()),
        format!("I={{1,2,3}}: {} sub-threshold trials", good.len()),
    )?;
    ensure(
        large >= 1,
        "I={1,4,7}: no sub-threshold trial with err > 0.1",
    )?;
    Ok(format!(
        "I={{1,2,3}}: {}/100 below 1e-8, max err {worst:.2e}; I={{1,4,7}}: {}/100 below 1e-8, {large} with err > 0.1",
        good.len(),
        bad.len()
    ))
}

fn finite_difference_check(
    spec: &OperatorSpec,
    phi: &FunctionalSet,
    max_time: usize,
    radius: f64,
    points: usize,
    rng: &mut ChaCha8Rng,
) -> Result<f64, String> {
    let n = spec.n();
    let f: Vec<f64> = (0..n).map(|_| rng.random_range(-radius..radius)).collect();
    let rec = simulate(spec, &f, phi, max_time, 0.0, 0).map_err(e)?;
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for _ in 0..points {
        let g: Vec<f64> = (0..n).map(|_| rng.random_range(-radius..radius)).collect();
        let an = gradient(&g, &rec, spec).map_err(e)?;
        let fd: Vec<f64> = (0..n)
            .map(|j| {
                let mut p = g.clone();
                let mut m = g.clone();
                p[j] += h;
                m[j] -= h;
                (objective(&p, &rec, spec).unwrap() - objective(&m, &rec, spec).unwrap())
                    / (2.0 * h)
            })
            .collect();
        let diff = an
            .iter()
            .zip(&fd)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        let norm = an.iter().map(|a| a * a).sum::<f64>().sqrt();
        worst = worst.max(diff / norm);
    }
    Ok(worst)
}

fn criterion_5() -> Outcome {
    let tol = Tolerance::default();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let small = OperatorSpec::diagonal(&[0.7, -1.3]).map_err(e)?;
    let phi2 = FunctionalSet::new(vec![vec![1.0, 0.5]]).map_err(e)?;
    let w2 = finite_difference_check(&small, &phi2, 2, 2.0, 25, &mut rng)?;
    let cfg = ExperimentConfig::uniqueness_replica(vec![vec![1, 2, 3]]);
    let spec9 = cfg.build_operator().map_err(e)?;
    let phi9 = FunctionalSet::standard_basis(9, &[1, 2, 3]).map_err(e)?;
    let w9 = finite_difference_check(&spec9, &phi9, 8, 4.0, 25, &mut rng)?;
    let _ = tol;
    ensure(
        w2 < 1e-6 && w9 < 1e-6,
        format!("relative errors {w2:e} (n=2), {w9:e} (n=9)"),
    )?;
    Ok(format!(
        "25 points each, max relative error {w2:.1e} (n=2), {w9:.1e} (n=9)"
    ))
}

fn random_invertible(n: usize, rng: &mut ChaCha8Rng) -> CMat {
    loop {
        let b = CMat::from_fn(n, n, |i, j| {
            c(
                rng.random_range(-1.0..1.0) + if i == j { 2.0 } else { 0.0 },
                0.0,
            )
        });
        let s = b.clone().svd(false, false).singular_values;
        let cond = s.max() / s.min();
        if cond < 50.0 {
            return b;
        }
    }
}

fn criterion_6() -> Outcome {
    let tol = Tolerance::default();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let pool: Vec<f64> = (1..=8).map(|k| 0.5 * k as f64).collect();
    let (mut guaranteed, mut failed, mut cases) = (0, 0, 0);
    while cases < 120 {
        let n = rng.random_range(2..=5);
        let d = rng.random_range(1..=n.min(4));
        let mut eigs = pool.clone();
        eigs.shuffle(&mut rng);
        eigs.truncate(d);
        let mut diag: Vec<f64> = eigs.clone();
        while diag.len() < n {
            diag.push(eigs[rng.random_range(0..d)]);
        }
        diag.shuffle(&mut rng);
        let b = random_invertible(n, &mut rng);
        let spec = OperatorSpec::diagonalizable(b, diag.iter().map(|&v| c(v, 0.0)).collect(), &tol)
            .map_err(e)?;
        let m = rng.random_range(1..=3);
        let vectors: Vec<Vec<f64>> = (0..m)
            .map(|_| {
                if rng.random_bool(0.4) {
                    let mut v = vec![0.0; n];
                    v[rng.random_range(0..n)] = 1.0;
                    v
                } else {
                    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
                }
            })
            .collect();
        let phi = FunctionalSet::new(vectors).map_err(e)?;
        let cert = certify(&spec, &phi, &tol).map_err(e)?;
        let oracle = complement_property(&cert.family_vectors(), &tol)
            .map_err(e)?
            .holds;
        let g = cert.verdict == Verdict::Guaranteed;
        if g != oracle {
            return Err(format!(
                "case {cases}: eigenvalues {diag:?}, verdict {:?}, oracle {oracle}",
                cert.verdict
            ));
        }
        if cert.verdict == Verdict::NecessaryConditionFailed && oracle {
            return Err(format!(
                "case {cases}: necessary condition failed but oracle true"
            ));
        }
        guaranteed += g as usize;
        failed += (cert.verdict == Verdict::NecessaryConditionFailed) as usize;
        cases += 1;
    }
    Ok(format!(
        "{cases} specs: {guaranteed} GUARANTEED, {failed} NECESSARY_CONDITION_FAILED, all match the oracle"
    ))
}

fn criterion_7() -> Outcome {
    let tol = Tolerance::default();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut specs, mut subsets) = (0, 0usize);
    while specs < 60 {
        let n = rng.random_range(1..=6);
        let eigs: Vec<f64> = (0..n)
            .map(|_| {
                let v = (rng.random_range(1..=8) as f64) * 0.25;
                if rng.random_bool(0.5) {
                    v
                } else {
                    -v
                }
            })
            .collect();
        let spec = OperatorSpec::diagonal(&eigs).map_err(e)?;
        if !iteration_regular(&spec, &tol).map_err(e)?.regular {
            continue;
        }
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let a = spec.canonical();
        let xc = embed_slice(&x);
        let k = krylov_rank(a, &xc, &tol).map_err(e)?;
        let top = 1.max(2 * k as i64 - 2) as usize;
        let mut powers = vec![xc.clone()];
        for _ in 0..top {
            let next = a * powers.last().unwrap();
            powers.push(next);
        }
        let total = powers.len();
        for mask in 0u64..(1 << total) {
            if mask.count_ones() as usize != k {
                continue;
            }
            let chosen: Vec<CVec> = (0..total)
                .filter(|j| mask & (1 << j) != 0)
                .map(|j| powers[j].clone())
                .collect();
            let r = numerical_rank(&chosen, tol.rank_tol);
            if r != k {
                return Err(format!(
                    "eigenvalues {eigs:?}, x {x:?}: subset {mask:b} has rank {r} < {k}"
                ));
            }
            subsets += 1;
        }
        specs += 1;
    }
    Ok(format!(
        "{specs} regular diagonal specs, {subsets} subsets of rank k"
    ))
}

fn regular_count(n: usize, seeds: u64, tol: &Tolerance) -> Result<u64, String> {
    let mut count = 0;
    for seed in 0..seeds {
        let (_, spec) = sample_random_circulant(n, seed, tol).map_err(e)?;
        count += iteration_regular(&spec, tol).map_err(e)?.regular as u64;
    }
    Ok(count)
}

fn criterion_8() -> Outcome {
    let tol = Tolerance::default();
    let count = regular_count(15, 50, &tol)?;
    let small: Vec<String> = [3, 5, 7, 9, 11]
        .iter()
        .map(|&n| regular_count(n, 20, &tol).map(|c| format!("n={n}: {c}/20")))
        .collect::<Result<_, _>>()?;
    let msg = format!(
        "{count}/50 random circulants at n=15 pass iteration_regular (supplementary: {})",
        small.join(", ")
    );
    if count == 50 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn criterion_9() -> Outcome {
    let cfg = ExperimentConfig::noisy_sweep(15);
    let report = run_sweep(&cfg).map_err(e)?;
    let mut line = Vec::new();
    for p in &report.curve {
        line.push(format!(
            "|I|={} P={:.2} err={:.2e}",
            p.card_i,
            p.p_i.unwrap_or(f64::NAN),
            p.mean_err.unwrap_or(f64::NAN)
        ));
    }
    let line = line.join("; ");
    for (i, a) in report.curve.iter().enumerate() {
        for b in &report.curve[i + 1..] {
            ensure(
                b.p_i.unwrap_or(0.0) >= a.p_i.unwrap_or(0.0) - 0.1,
                format!("P_I drops beyond slack: {line}"),
            )?;
        }
    }
    for w in report.curve.windows(2) {
        let (a, b) = (w[0].mean_err, w[1].mean_err);
        ensure(
            matches!((a, b), (Some(a), Some(b)) if b < a),
            format!("mean err not decreasing: {line}"),
        )?;
    }
    Ok(format!("n=15, {} trials per set: {line}", cfg.trials))
}

fn outputs(report: &ExperimentReport, dir: &Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    let paths = report.write_outputs(dir).map_err(e)?;
    paths
        .into_iter()
        .map(|p| {
            let bytes = std::fs::read(&p).map_err(e)?;
            Ok((p.file_name().unwrap().to_string_lossy().into_owned(), bytes))
        })
        .collect()
}

fn criterion_10() -> Outcome {
    let sweep = ExperimentConfig {
        trials: 8,
        ..ExperimentConfig::noisy_sweep(15)
    };
    let replica = ExperimentConfig {
        trials: 20,
        ..ExperimentConfig::uniqueness_replica(vec![vec![1, 2, 3], vec![1, 4, 7]])
    };
    let mut files = 0;
    for cfg in [sweep, replica] {
        let a = tempfile::tempdir().map_err(e)?;
        let b = tempfile::tempdir().map_err(e)?;
        let ra = phaseless::harness::run(&cfg).map_err(e)?;
        let rb = phaseless::harness::run(&cfg).map_err(e)?;
        let fa = outputs(&ra, a.path())?;
        let fb = outputs(&rb, b.path())?;
        ensure(fa == fb, format!("outputs differ for {:?}", cfg.kind))?;
        files += fa.len();
    }
    Ok(format!("{files} files byte-identical across reruns"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("iteration-regularity examples", criterion_1),
        ("necessary vs sufficient examples", criterion_2),
        ("coprime criterion at n=9", criterion_3),
        ("n=9 uniqueness replica", criterion_4),
        ("gradient vs finite differences", criterion_5),
        ("certificate vs complement-property oracle", criterion_6),
        ("Krylov subsets span", criterion_7),
        ("random circulants are iteration regular", criterion_8),
        ("success probability trend under noise", criterion_9),
        ("deterministic outputs", criterion_10),
    ];
    let mut failures = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("criterion {:>2} PASS {name} [{secs:.2}s]: {msg}", i + 1),
            Err(msg) => {
                failures += 1;
                println!("criterion {:>2} FAIL {name} [{secs:.2}s]: {msg}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failures} failed",
        criteria.len() - failures
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
