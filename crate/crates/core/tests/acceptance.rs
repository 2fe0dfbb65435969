//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use genpr::bounds::{
    binom_parity, m_complex_bounds, m_real_bounds, sharp_lower_bound, stiefel_hopf_pass,
    stiefel_hopf_pass_column, Parity,
};
use genpr::certify::{jacobian_singular_values, trace_nullspace};
use genpr::generate::{explicit_mc2, real_squaring_pair};
use genpr::measure::{polarization_gap, real_linearize, tau, tau_inverse};
use genpr::recover::QuadraticResiduals;
use genpr::lsq::LeastSquares;
use genpr::rng::{self, StreamRng};
use genpr::{
    certify_pr, gen_typed, measure, normed_form, quotient_distance, recover, verify_witness,
    Algebra, CertifyConfig, DecidedBy, Ensemble, Field, GenKind, GenSpec, Hermitian, RecoveryConfig,
    Scalar, Signal, Verdict, C64,
};
use nalgebra::{DMatrix, DVector};
use rand::Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed <= limit, || format!("took {elapsed:?}, limit {limit:?}"))
}

fn gaussian_signal<T: Scalar>(d: usize, r: &mut StreamRng) -> Signal<T> {
    Signal::new(DVector::from_fn(d, |_, _| T::gaussian(r))).unwrap()
}

fn gaussian_hermitian<T: Scalar>(d: usize, r: &mut StreamRng) -> Hermitian<T> {
    let g = DMatrix::from_fn(d, d, |_, _| T::gaussian(r));
    Hermitian::new((&g + g.adjoint()) * T::from_real(0.5)).unwrap()
}

fn bounds_golden() -> Outcome {
    let start = Instant::now();
    let real = [(4, 6), (5, 9), (6, 10), (9, 17), (10, 18), (17, 33), (18, 34)];
    for (d, m) in real {
        let got = m_real_bounds(d).map_err(|e| e.to_string())?.exact;
        ensure(got == Some(m), || format!("m_R({d}) = {got:?}, expected {m}"))?;
    }
    let complex = [(2, 3), (5, 16), (6, 18), (9, 32), (13, 47), (29, 110)];
    for (d, m) in complex {
        let got = m_complex_bounds(d).map_err(|e| e.to_string())?.exact;
        ensure(got == Some(m), || format!("m_C({d}) = {got:?}, expected {m}"))?;
    }
    within(start.elapsed(), Duration::from_secs(1))?;
    Ok(format!("{} exact values", real.len() + complex.len()))
}

fn parity_equivalence() -> Outcome {
    let start = Instant::now();
    let mut row = vec![1u64];
    for n in 0..=64u64 {
        for k in 0..=n {
            let expect = if row[k as usize] == 1 { Parity::Odd } else { Parity::Even };
            let got = binom_parity(n, k).map_err(|e| e.to_string())?;
            ensure(got == expect, || format!("parity of C({n},{k})"))?;
        }
        let mut next = vec![1u64; row.len() + 1];
        for k in 1..row.len() {
            next[k] = (row[k - 1] + row[k]) % 2;
        }
        row = next;
    }
    let mut checked = 0;
    for p in 1..=32u64 {
        for q in 1..=32u64 {
            for n in p.max(q)..=p + q - 1 {
                let a = stiefel_hopf_pass(p, q, n).map_err(|e| e.to_string())?;
                let b = stiefel_hopf_pass_column(p, q, n).map_err(|e| e.to_string())?;
                ensure(a == b, || format!("forms disagree at ({p},{q},{n})"))?;
                checked += 1;
            }
        }
    }
    for (p, expect) in [(2, 2), (4, 4), (8, 8)] {
        let got = sharp_lower_bound(p, p).map_err(|e| e.to_string())?;
        ensure(got == expect, || format!("sharp_lower_bound({p},{p}) = {got}"))?;
    }
    within(start.elapsed(), Duration::from_secs(10))?;
    Ok(format!("{checked} (p,q,N) triples agree"))
}

fn mc2_example() -> Outcome {
    let start = Instant::now();
    let e = explicit_mc2();
    let ns = trace_nullspace(&e);
    ensure(ns.dim() == 1, || format!("null space dimension {}", ns.dim()))?;
    let q = &ns.basis[0];
    // The generator is x (2, i; -i, 2) for some real x of either sign.
    let x = q.matrix()[(0, 0)].re / 2.0;
    let family = DMatrix::from_row_slice(2, 2, &[
        C64::new(2.0 * x, 0.0), C64::new(0.0, x),
        C64::new(0.0, -x), C64::new(2.0 * x, 0.0),
    ]);
    ensure((q.matrix() - family).camax() <= 1e-10, || "generator off the known line".into())?;
    let values = q.spectrum().values;
    let (hi, lo) = (values[0], values[1]);
    ensure(hi * lo > 0.0, || format!("eigenvalues {hi}, {lo} differ in sign"))?;
    let ratio = hi.abs().max(lo.abs()) / hi.abs().min(lo.abs());
    ensure((ratio - 3.0).abs() <= 1e-10, || format!("eigenvalue ratio {ratio}"))?;
    let c = certify_pr(&e, &CertifyConfig::default()).map_err(|e| e.to_string())?;
    ensure(c.verdict == Verdict::CertifiedPr, || format!("verdict {}", c.verdict))?;
    within(start.elapsed(), Duration::from_secs(1))?;
    Ok(format!("eigenvalue ratio {ratio:.12}"))
}

fn witness_soundness() -> Outcome {
    let mut cells: Vec<(String, Vec<Ensemble<f64>>)> = Vec::new();
    for (d, count) in [(2usize, 17u64), (3, 16), (4, 16)] {
        let es = (0..count)
            .map(|s| gen_typed::<f64>(&GenSpec::uniform(d, 2 * d - 2, Field::Real, GenKind::FrameRank1, 1, s)).unwrap())
            .collect();
        cells.push((format!("frames d={d} N={}", 2 * d - 2), es));
    }
    let flip = Ensemble::new(vec![
        Hermitian::identity(2),
        real_squaring_pair().matrices()[0].clone(),
    ])
    .unwrap();
    cells.push(("(I, diag(1,-1))".into(), vec![flip]));
    let mut summary = Vec::new();
    let mut total = 0;
    for (name, es) in &cells {
        let mut found = 0;
        for (s, e) in es.iter().enumerate() {
            total += 1;
            let c = certify_pr(e, &CertifyConfig::with_seed(s as u64)).map_err(|e| e.to_string())?;
            ensure(c.verdict == Verdict::CertifiedNotPr, || format!("{name} seed {s}: {}", c.verdict))?;
            if let Some((x, y)) = &c.witness {
                let mx = measure(e, x).unwrap();
                let my = measure(e, y).unwrap();
                let gap = (&mx.0 - &my.0).amax() / mx.inf_norm().max(1.0);
                let qd = quotient_distance(x, y).unwrap();
                ensure(verify_witness(e, x, y, 1e-8) && gap <= 1e-8 && qd >= 1e-3, || {
                    format!("{name} seed {s}: gap {gap:e}, separation {qd:e}")
                })?;
                found += 1;
            }
        }
        let rate = found as f64 / es.len() as f64;
        ensure(rate >= 0.95, || format!("{name}: witness rate {rate}"))?;
        summary.push(format!("{name} {found}/{}", es.len()));
    }
    Ok(format!("{total} ensembles; {}", summary.join(", ")))
}

fn random_ranks(n: usize, lo: usize, hi: usize, seed: u64) -> Vec<usize> {
    let mut r = rng::stream(seed, &[0xacce]);
    (0..n).map(|_| r.random_range(lo..=hi)).collect()
}

fn sufficiency_cell<T: Scalar>(d: usize, n: usize, kind: GenKind, seeds: u64) -> Result<String, String> {
    let field = T::FIELD;
    let (lo, hi) = match kind {
        GenKind::Projection => (1, d - 1),
        _ => (1, d),
    };
    let mut tally = [0usize; 2];
    for seed in 0..seeds {
        let ranks = random_ranks(n, lo, hi, seed);
        let e = gen_typed::<T>(&GenSpec::new(d, field, kind, ranks, seed)).map_err(|e| e.to_string())?;
        let c = certify_pr(&e, &CertifyConfig::with_seed(seed)).map_err(|e| e.to_string())?;
        ensure(c.witness.is_none(), || format!("{field} {kind:?} d={d} seed {seed}: collision found"))?;
        match c.verdict {
            Verdict::CertifiedPr => tally[0] += 1,
            Verdict::LikelyPr => tally[1] += 1,
            v => return Err(format!("{field} {kind:?} d={d} seed {seed}: {v}")),
        }
    }
    Ok(format!("{field}/{}/d={d}: {}+{}", kind.as_str(), tally[0], tally[1]))
}

fn generic_sufficiency() -> Outcome {
    let start = Instant::now();
    let mut parts = Vec::new();
    for d in 2..=4 {
        parts.push(sufficiency_cell::<f64>(d, 2 * d - 1, GenKind::GenericRank, 100)?);
        parts.push(sufficiency_cell::<f64>(d, 2 * d - 1, GenKind::Projection, 100)?);
    }
    for d in 2..=3 {
        parts.push(sufficiency_cell::<C64>(d, 4 * d - 4, GenKind::GenericRank, 100)?);
        parts.push(sufficiency_cell::<C64>(d, 4 * d - 4, GenKind::Projection, 100)?);
    }
    within(start.elapsed(), Duration::from_secs(300))?;
    Ok(format!("certified+likely: {} ({:?})", parts.join(", "), start.elapsed()))
}

fn bounds_negatives() -> Outcome {
    let mut count = 0;
    for seed in 0..10 {
        let complex = [
            GenSpec::uniform(5, 15, Field::Complex, GenKind::GenericRank, 5, seed),
            GenSpec::uniform(5, 15, Field::Complex, GenKind::Projection, 2, seed),
            GenSpec::uniform(5, 15, Field::Complex, GenKind::FrameRank1, 1, seed),
        ];
        for spec in complex {
            let e = gen_typed::<C64>(&spec).map_err(|e| e.to_string())?;
            let c = certify_pr(&e, &CertifyConfig::with_seed(seed)).map_err(|e| e.to_string())?;
            ensure(c.verdict == Verdict::CertifiedNotPr && c.decided_by == DecidedBy::Bounds, || {
                format!("{spec:?}: {} by {:?}", c.verdict, c.decided_by)
            })?;
            count += 1;
        }
        let spec = GenSpec::uniform(4, 5, Field::Real, GenKind::GenericRank, 4, seed);
        let e = gen_typed::<f64>(&spec).map_err(|e| e.to_string())?;
        let c = certify_pr(&e, &CertifyConfig::with_seed(seed)).map_err(|e| e.to_string())?;
        ensure(c.verdict == Verdict::CertifiedNotPr && c.decided_by == DecidedBy::Bounds, || {
            format!("{spec:?}: {} by {:?}", c.verdict, c.decided_by)
        })?;
        count += 1;
    }
    Ok(format!("{count} ensembles decided by bounds"))
}

fn round_trips<T: Scalar>(e: &Ensemble<T>, seed: u64) -> Result<usize, String> {
    let mut r = rng::stream(seed, &[0x7e57]);
    let mut ok = 0;
    for k in 0..100 {
        let x = gaussian_signal::<T>(e.dim(), &mut r);
        let b = measure(e, &x).map_err(|e| e.to_string())?;
        let cfg = RecoveryConfig { seed: k, ..RecoveryConfig::default() };
        let rep = recover(e, &b, &cfg).map_err(|e| e.to_string())?;
        if quotient_distance(&rep.estimate, &x).unwrap() <= 1e-6 * x.norm() {
            ok += 1;
        }
    }
    Ok(ok)
}

fn recovery_round_trip() -> Outcome {
    let mut worst = 100;
    let mut check = |name: String, ok: usize| -> Result<(), String> {
        worst = worst.min(ok);
        ensure(ok >= 99, || format!("{name}: {ok}/100"))
    };
    let cfg = CertifyConfig::default();
    let mc2 = explicit_mc2();
    ensure(certify_pr(&mc2, &cfg).unwrap().verdict == Verdict::CertifiedPr, || "mc2 not certified".into())?;
    check("mc2".into(), round_trips(&mc2, 1)?)?;
    let mut triple = vec![Hermitian::identity(2)];
    triple.extend(real_squaring_pair().matrices().iter().cloned());
    let triple = Ensemble::new(triple).unwrap();
    ensure(certify_pr(&triple, &cfg).unwrap().verdict == Verdict::CertifiedPr, || "triple not certified".into())?;
    check("squaring triple".into(), round_trips(&triple, 2)?)?;
    for d in 2..=8 {
        for rank in [1, d] {
            let e = gen_typed::<f64>(&GenSpec::uniform(d, 2 * d - 1, Field::Real, GenKind::GenericRank, rank, 40 + d as u64)).unwrap();
            check(format!("R d={d} r={rank}"), round_trips(&e, d as u64)?)?;
            let e = gen_typed::<C64>(&GenSpec::uniform(d, 4 * d - 4, Field::Complex, GenKind::GenericRank, rank, 80 + d as u64)).unwrap();
            check(format!("C d={d} r={rank}"), round_trips(&e, 100 + d as u64)?)?;
        }
    }
    // Analytic Gauss-Newton Jacobian against central differences.
    let mut r = rng::stream(5, &[0xfd]);
    let mut worst_fd: f64 = 0.0;
    for k in 0..100 {
        let d = 2 + k % 5;
        let (err, scale) = if k % 2 == 0 {
            fd_error::<f64>(d, 2 * d + 1, &mut r)
        } else {
            fd_error::<C64>(d, 4 * d, &mut r)
        };
        let rel = err / scale.max(1.0);
        worst_fd = worst_fd.max(rel);
    }
    ensure(worst_fd <= 1e-6, || format!("finite-difference mismatch {worst_fd:e}"))?;
    Ok(format!("worst cell {worst}/100; Jacobian relative error {worst_fd:.1e}"))
}

fn fd_error<T: Scalar>(d: usize, n: usize, r: &mut StreamRng) -> (f64, f64) {
    let e = Ensemble::new((0..n).map(|_| gaussian_hermitian::<T>(d, r)).collect()).unwrap();
    let b = genpr::MeasurementVector::from((0..n).map(|_| f64::gaussian(r)).collect::<Vec<_>>());
    let p = QuadraticResiduals::new(&e, &b).unwrap();
    let x = gaussian_signal::<T>(d, r).stacked();
    let (_, jac) = p.evaluate(&x);
    let h = 1e-5;
    let mut err: f64 = 0.0;
    for k in 0..x.len() {
        let mut plus = x.clone();
        let mut minus = x.clone();
        plus[k] += h;
        minus[k] -= h;
        let fd = (p.residual(&plus) - p.residual(&minus)) / (2.0 * h);
        err = err.max((fd - jac.column(k)).amax());
    }
    (err, jac.amax())
}

fn identity_suites() -> Outcome {
    let mut r = rng::stream(8, &[0x1d]);
    let mut worst = [0.0f64; 6];
    for k in 0..10_000 {
        let d = 1 + k % 6;
        let (gap, scale) = if k % 2 == 0 {
            polar::<f64>(d, &mut r)
        } else {
            polar::<C64>(d, &mut r)
        };
        worst[0] = worst[0].max(gap / scale.max(1.0));
    }
    for k in 0..1000 {
        let d = 1 + k % 6;
        let a = gaussian_hermitian::<C64>(d, &mut r);
        let e = Ensemble::new(vec![a.clone(), gaussian_hermitian(d, &mut r)]).unwrap();
        let x = gaussian_signal::<C64>(d, &mut r);
        let t = (k as f64) * 0.37;
        let m1 = measure(&e, &x).unwrap();
        let m2 = measure(&e, &x.rotated(t)).unwrap();
        let rel = (&m1.0 - &m2.0).amax() / m1.0.amax().max(1.0);
        worst[1] = worst[1].max(rel);

        let ar = DMatrix::from_fn(d, d, |_, _| f64::gaussian(&mut r));
        let back = tau_inverse(&tau(&ar).unwrap());
        worst[2] = worst[2].max((back - &ar).amax() / ar.amax().max(1.0));

        let xs = x.stacked();
        for (lin, mj) in real_linearize(&e).iter().zip(m1.as_slice()) {
            let v = xs.dot(&(&lin.f * &xs));
            worst[3] = worst[3].max((v - mj).abs() / mj.abs().max(1.0));
        }

        let big = Ensemble::new((0..4 * d).map(|_| gaussian_hermitian::<C64>(d, &mut r)).collect()).unwrap();
        let s = jacobian_singular_values(&big, &x).unwrap();
        worst[4] = worst[4].max(s[2 * d - 1]);
    }
    for algebra in [Algebra::Complex, Algebra::Quaternion, Algebra::Octonion] {
        let f = normed_form(algebra);
        let n = algebra.dim();
        for _ in 0..100_000 {
            let x = DVector::from_fn(n, |_, _| f64::gaussian(&mut r));
            let y = DVector::from_fn(n, |_, _| f64::gaussian(&mut r));
            let l = f.apply(&x, &y).unwrap().norm();
            let expect = x.norm() * y.norm();
            worst[5] = worst[5].max((l - expect).abs() / expect.max(1.0));
        }
    }
    let limits = [1e-12, 1e-12, 1e-14, 1e-12, 1e-10, 1e-12];
    let names = ["polarization", "phase invariance", "tau round-trip", "real linearization", "sigma_2d", "normed identity"];
    for ((w, l), n) in worst.iter().zip(limits).zip(names) {
        ensure(*w <= l, || format!("{n}: {w:e} > {l:e}"))?;
    }
    Ok(names
        .iter()
        .zip(worst)
        .map(|(n, w)| format!("{n} {w:.1e}"))
        .collect::<Vec<_>>()
        .join(", "))
}

fn polar<T: Scalar>(d: usize, r: &mut StreamRng) -> (f64, f64) {
    let a = gaussian_hermitian::<T>(d, r);
    let x = gaussian_signal::<T>(d, r);
    let y = gaussian_signal::<T>(d, r);
    let (lhs, rhs) = polarization_gap(&a, &x, &y).unwrap();
    (
        (lhs - rhs).abs(),
        a.frobenius_norm() * (x.norm().powi(2) + y.norm().powi(2)),
    )
}

fn main() -> ExitCode {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 8] = [
        ("bounds golden table", bounds_golden),
        ("parity equivalence", parity_equivalence),
        ("m_C(2) = 3 example", mc2_example),
        ("witness soundness", witness_soundness),
        ("generic sufficiency", generic_sufficiency),
        ("bounds-certified negatives", bounds_negatives),
        ("recovery round-trip", recovery_round_trip),
        ("identity suites", identity_suites),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        match run() {
            Ok(detail) => println!("PASS {} {name}: {detail} [{:.2?}]", i + 1, start.elapsed()),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name}: {why} [{:.2?}]", i + 1, start.elapsed());
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
