//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use basislift::arith::Modulus;
use basislift::error::Error;
use basislift::finite::get_basis_finite;
use basislift::lattice::{self, FiniteBooleanAlgebra, Idempotent, LatticeRingElement};
use basislift::matrix::{IntMatrix, RowStream};
use basislift::oracle::{det_exact, is_basis_mod_q, random_basis_mod_q, verify_lift, ModQEliminator};
use basislift::stream::fixtures::Fixture;
use basislift::stream::{EliminationState, LoopObserver};

const SUITE: u64 = 500;
const NEGATIVE: u64 = 100;
const FURTHER_LOOPS: usize = 50;

struct Instance {
    seed: u64,
    modulus: Modulus,
    a: IntMatrix,
}

fn suite() -> Vec<Instance> {
    (0..SUITE)
        .map(|seed| {
            let n = 1 + (seed % 10) as usize;
            let p = [2u32, 3, 5][((seed / 10) % 3) as usize];
            let nu = 1 + ((seed / 30) % 3) as u32;
            let modulus = Modulus::new(p, nu).expect("prime");
            let a = random_basis_mod_q(n, &modulus, seed, 3 * n);
            Instance { seed, modulus, a }
        })
        .collect()
}

struct Outcome {
    pass: bool,
    summary: String,
    failures: Vec<String>,
}

impl Outcome {
    fn new(pass: bool, summary: String, failures: Vec<String>) -> Self {
        Outcome { pass, summary, failures }
    }
}

/// Checks the loop-internal invariants through the observer hooks.
#[derive(Default)]
struct Hooks {
    checks: usize,
    failures: Vec<String>,
}

impl LoopObserver for Hooks {
    fn after_pivot_normalized(&mut self, st: &EliminationState) {
        self.checks += 1;
        let det = det_exact(&st.pivot_block()).expect("square");
        if !det.is_one() {
            self.failures.push(format!("loop {}: pivot block determinant {det}", st.loops()));
        }
    }

    fn after_recompute(&mut self, st: &EliminationState) {
        self.checks += 1;
        let n = st.c_rows().len();
        let m = IntMatrix::from_rows(st.m_rows().to_vec()).expect("square");
        let r = IntMatrix::from_rows(st.r_rows()[..n].to_vec()).expect("rows");
        let c = IntMatrix::from_rows(st.c_rows().to_vec()).expect("rows");
        if m.mul(&r).expect("shapes") != c {
            self.failures.push(format!("loop {}: C != M R", st.loops()));
        }
    }
}

/// Per-run results collected at every loop boundary.
#[derive(Default)]
struct Boundary {
    loops: usize,
    textbook_failures: Vec<String>,
    purity_failures: Vec<String>,
    congruence_failures: Vec<String>,
}

fn check_boundary(st: &EliminationState, textbook: &mut ModQEliminator, out: &mut Boundary, tag: &str) {
    out.loops += 1;
    let q = st.modulus().value();
    let i = st.working_row() - 1;
    let prefix = st.consumed_prefix(st.working_row());
    if textbook.push_row(prefix.row(i)).is_err() {
        out.textbook_failures.push(format!("{tag}: textbook elimination found no pivot in row {i}"));
        return;
    }
    for (row, r) in st.r_rows().iter().enumerate() {
        if r.iter().any(|x| !x.is_zero() && x.is_multiple_of(q)) {
            out.purity_failures.push(format!("{tag}: R row {row} holds a nonzero multiple of q at loop {}", st.loops()));
        }
        let mut expected = textbook.rows()[row].clone();
        expected.resize(r.len(), BigInt::zero());
        if r.iter().map(|x| x.mod_floor(q)).ne(expected) {
            out.textbook_failures.push(format!("{tag}: R row {row} differs at loop {}", st.loops()));
        }
    }
    for (row, c) in st.c_rows().iter().enumerate() {
        let u = &st.units()[row];
        if c.iter().zip(prefix.row(row)).any(|(y, a)| !(y - u * a).is_multiple_of(q)) {
            out.congruence_failures.push(format!("{tag}: C row {row} not congruent at loop {}", st.loops()));
        }
    }
}

/// Steps a state once with all checks.
fn observed_step(st: &mut EliminationState, hooks: &mut Hooks, tb: &mut ModQEliminator, b: &mut Boundary, tag: &str) -> Result<(), Error> {
    st.step_loop_observed(hooks)?;
    check_boundary(st, tb, b, tag);
    Ok(())
}

struct StreamRuns {
    padded_ok: usize,
    padded_failures: Vec<String>,
    extended_ok: usize,
    extended_failures: Vec<String>,
    hooks: Hooks,
    boundary: Boundary,
    monotone_runs: usize,
    monotone_rows: usize,
    monotone_failures: Vec<String>,
}

/// Zero-padded and identity-extended streaming runs over the suite, with
/// every loop-boundary check and the monotonicity check.
fn stream_runs(instances: &[Instance]) -> StreamRuns {
    let mut s = StreamRuns {
        padded_ok: 0,
        padded_failures: Vec::new(),
        extended_ok: 0,
        extended_failures: Vec::new(),
        hooks: Hooks::default(),
        boundary: Boundary::default(),
        monotone_runs: 0,
        monotone_rows: 0,
        monotone_failures: Vec::new(),
    };
    for inst in instances {
        let n = inst.a.rows();
        let tag = format!("seed {}", inst.seed);

        // finite stream: the matrix zero padded to infinite width
        let mut st = EliminationState::new(RowStream::from_matrix(&inst.a), inst.modulus.clone()).unwrap();
        let mut tb = ModQEliminator::new(&inst.modulus);
        let mut result = Ok(());
        while st.working_row() < n && st.loops() < 4 * n {
            result = observed_step(&mut st, &mut s.hooks, &mut tb, &mut s.boundary, &tag);
            if result.is_err() {
                break;
            }
        }
        match result.and_then(|_| st.run_until(n, 4 * n)) {
            Ok(report) if report.loops_executed <= 4 * n => match verify_lift(&inst.a, &report) {
                Ok(v) if v.all_ok() => s.padded_ok += 1,
                Ok(v) => s.padded_failures.push(format!("{tag}: {:?}", v.details)),
                Err(e) => s.padded_failures.push(format!("{tag}: {e}")),
            },
            Ok(report) => s.padded_failures.push(format!("{tag}: {} loops", report.loops_executed)),
            Err(e) => s.padded_failures.push(format!("{tag}: {e}")),
        }

        // infinite stream: the matrix followed by identity rows
        let ext_tag = format!("{tag} extended");
        let mut st = EliminationState::new(RowStream::identity_extended(&inst.a), inst.modulus.clone()).unwrap();
        let mut tb = ModQEliminator::new(&inst.modulus);
        let mut snapshots: Vec<Option<(usize, Vec<BigInt>)>> = Vec::new();
        let mut reported = None;
        let mut failed = false;
        while st.loops() < 4 * n + FURTHER_LOOPS {
            if let Err(e) = observed_step(&mut st, &mut s.hooks, &mut tb, &mut s.boundary, &ext_tag) {
                s.extended_failures.push(format!("{ext_tag}: {e}"));
                failed = true;
                break;
            }
            snapshots.resize(st.working_row(), None);
            for (row, snap) in snapshots.iter_mut().enumerate() {
                match (snap.as_ref(), st.stabilized_at()[row]) {
                    (None, Some(at)) => *snap = Some((at, st.c_rows()[row].clone())),
                    (Some((_, before)), _) => {
                        let now = &st.c_rows()[row];
                        if now[..before.len()] != before[..] || now[before.len()..].iter().any(|x| !x.is_zero()) {
                            s.monotone_failures.push(format!("{ext_tag}: row {row} changed after stabilizing"));
                        }
                    }
                    _ => {}
                }
            }
            if reported.is_none() && st.stable_prefix() >= n {
                reported = Some(st.report(n));
            }
            // stop once every reported row has been watched for FURTHER_LOOPS loops
            if let Some(r) = &reported {
                let last = r.stabilized_at.iter().flatten().max().copied().unwrap_or(0);
                if st.loops() >= last + FURTHER_LOOPS {
                    break;
                }
            }
        }
        if failed {
            continue;
        }
        match reported {
            Some(report) => {
                let last = report.stabilized_at.iter().flatten().max().copied().unwrap_or(0);
                if last > 4 * n {
                    s.extended_failures.push(format!("{ext_tag}: stabilized only at loop {last}"));
                } else {
                    match verify_lift(&report.input, &report) {
                        Ok(v) if v.all_ok() => s.extended_ok += 1,
                        Ok(v) => s.extended_failures.push(format!("{ext_tag}: {:?}", v.details)),
                        Err(e) => s.extended_failures.push(format!("{ext_tag}: {e}")),
                    }
                }
                if st.loops() < last + FURTHER_LOOPS {
                    s.monotone_failures.push(format!("{ext_tag}: only {} loops after stabilizing", st.loops() - last));
                }
                s.monotone_runs += 1;
                s.monotone_rows += report.stabilized_at.len();
            }
            None => s.extended_failures.push(format!("{ext_tag}: {} of {n} rows stable", st.stable_prefix())),
        }
    }

    // named fixtures, for monotonicity only
    for (name, p, nu) in [("banded:q", 2, 1), ("banded:q", 3, 3), ("lower:3", 2, 2), ("lower:q", 5, 1), ("blocks:1", 3, 2), ("blocks:2", 2, 3)] {
        let md = Modulus::new(p, nu).unwrap();
        let fx: Fixture = name.parse().unwrap();
        let tag = format!("{name} p={p} nu={nu}");
        let mut st = EliminationState::new(fx.stream(&md), md.clone()).unwrap();
        let mut tb = ModQEliminator::new(&md);
        let mut snapshots: Vec<Option<Vec<BigInt>>> = Vec::new();
        let mut watched = 0;
        let mut settled = None;
        while st.loops() < 400 {
            if settled.is_none() && st.stable_prefix() >= 10 {
                settled = Some(st.loops());
            }
            if settled.is_some_and(|at| st.loops() >= at + FURTHER_LOOPS) {
                break;
            }
            observed_step(&mut st, &mut s.hooks, &mut tb, &mut s.boundary, &tag).unwrap();
            snapshots.resize(st.working_row(), None);
            for (row, snap) in snapshots.iter_mut().enumerate() {
                match snap {
                    None if st.stabilized_at()[row].is_some() => *snap = Some(st.c_rows()[row].clone()),
                    Some(before) => {
                        let now = &st.c_rows()[row];
                        if now[..before.len()] != before[..] || now[before.len()..].iter().any(|x| !x.is_zero()) {
                            s.monotone_failures.push(format!("{tag}: row {row} changed after stabilizing"));
                        }
                    }
                    None => {}
                }
            }
        }
        for row in 0..10 {
            match st.stabilized_at()[row] {
                Some(at) if st.loops() >= at + FURTHER_LOOPS => watched += 1,
                _ => s.monotone_failures.push(format!("{tag}: row {row} not watched for {FURTHER_LOOPS} loops")),
            }
        }
        s.monotone_runs += 1;
        s.monotone_rows += watched;
    }
    s
}

fn criterion_1(instances: &[Instance]) -> (Outcome, Vec<bool>) {
    let start = Instant::now();
    let mut ok = Vec::with_capacity(instances.len());
    let mut failures = Vec::new();
    for inst in instances {
        let good = match get_basis_finite(&inst.a, &inst.modulus) {
            Ok(res) => match verify_lift(&inst.a, &res) {
                Ok(v) if v.all_ok() => true,
                Ok(v) => {
                    failures.push(format!("seed {}: {:?}", inst.seed, v.details));
                    false
                }
                Err(e) => {
                    failures.push(format!("seed {}: {e}", inst.seed));
                    false
                }
            },
            Err(e) => {
                failures.push(format!("seed {}: {e}", inst.seed));
                false
            }
        };
        ok.push(good);
    }
    let elapsed = start.elapsed();
    let passed = ok.iter().filter(|&&b| b).count();
    let pass = passed == instances.len() && elapsed < Duration::from_secs(60);
    (
        Outcome::new(pass, format!("finite engine: {passed}/{} lifts verified in {:.2?}", instances.len(), elapsed), failures),
        ok,
    )
}

fn criterion_4(instances: &[Instance]) -> Outcome {
    let mut failures = Vec::new();
    let mut passed = 0;
    for inst in instances.iter().take(NEGATIVE as usize) {
        let n = inst.a.rows();
        let row = (inst.seed as usize * 7) % n;
        let mut bad = inst.a.clone();
        bad.scale_row(row, inst.modulus.prime()).unwrap();
        let tag = format!("seed {} row {row}", inst.seed);
        let mut ok = true;
        match get_basis_finite(&bad, &inst.modulus) {
            Err(Error::NotABasisModP { row: r, .. }) if r == row => {}
            Err(e) => {
                failures.push(format!("{tag}: finite engine: {e}"));
                ok = false;
            }
            Ok(_) => {
                failures.push(format!("{tag}: finite engine returned a lift"));
                ok = false;
            }
        }
        for (kind, source) in [("padded", RowStream::from_matrix(&bad)), ("extended", RowStream::identity_extended(&bad))] {
            let mut st = EliminationState::new(source, inst.modulus.clone()).unwrap();
            match st.run_until(n, 4 * n) {
                Err(Error::NotABasisModP { row: r, .. }) if r == row => {}
                Err(e) => {
                    failures.push(format!("{tag}: {kind} stream: {e}"));
                    ok = false;
                }
                Ok(_) => {
                    failures.push(format!("{tag}: {kind} stream returned a report"));
                    ok = false;
                }
            }
        }
        if is_basis_mod_q(&bad, &inst.modulus).unwrap() {
            failures.push(format!("{tag}: is_basis_mod_q returned true"));
            ok = false;
        }
        passed += usize::from(ok);
    }
    Outcome::new(
        passed == NEGATIVE as usize,
        format!("negative path: {passed}/{NEGATIVE} row-times-p instances rejected by both engines and the oracle"),
        failures,
    )
}

fn criterion_5() -> Outcome {
    let mut failures = Vec::new();
    for q in [6u32, 12, 15] {
        if Modulus::from_prime_power(q).is_ok() {
            failures.push(format!("q = {q} accepted as a prime power"));
        }
        if Modulus::new(q, 1).is_ok() {
            failures.push(format!("p = {q} accepted as a prime"));
        }
    }
    for q in [2u32, 8, 9, 25, 27, 125] {
        if Modulus::from_prime_power(q).is_err() {
            failures.push(format!("prime power {q} rejected"));
        }
    }
    Outcome::new(failures.is_empty(), "composite moduli 6, 12, 15 rejected; prime powers accepted".into(), failures)
}

// Largest d <= bound dividing every value, found by search.
fn brute_gcd(values: &[i64], bound: i64) -> i64 {
    if values.iter().all(|&v| v == 0) {
        return 0;
    }
    (1..=bound).rev().find(|d| values.iter().all(|v| v % d == 0)).unwrap()
}

fn criterion_8() -> Outcome {
    let mut failures = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(8);

    let mut ideals = 0;
    for trial in 0..200 {
        let k = rng.gen_range(1..=5);
        let count = rng.gen_range(0..=4);
        let gens: Vec<Vec<i64>> = (0..count).map(|_| (0..k).map(|_| rng.gen_range(-20..=20)).collect()).collect();
        let alg = FiniteBooleanAlgebra::new(k).unwrap();
        let elems: Vec<LatticeRingElement> = gens.iter().map(|g| LatticeRingElement::from_i64(g)).collect();
        let d = lattice::decompose_ideal(alg, &elems).unwrap();
        let generator = d.generator(k);
        let expected: Vec<BigInt> =
            (0..k).map(|a| BigInt::from(brute_gcd(&gens.iter().map(|g| g[a]).collect::<Vec<_>>(), 20))).collect();
        let orthogonal = d.pairs.iter().enumerate().all(|(i, (e, m))| {
            m.is_positive() && d.pairs[i + 1..].iter().all(|(f, n)| e.is_orthogonal(*f) && m != n)
        });
        if generator.coords == expected && orthogonal {
            ideals += 1;
        } else {
            failures.push(format!("decompose trial {trial}: {gens:?}"));
        }
    }

    let mut orders = 0;
    for k in 1..=5usize {
        let alg = FiniteBooleanAlgebra::new(k).unwrap();
        for _ in 0..100 {
            let mut order: Vec<Idempotent> = alg.nonzero_elements().collect();
            order.shuffle(&mut rng);
            let basis = lattice::free_basis(alg, &order).unwrap();
            let det = if basis.len() == k { det_exact(&lattice::coordinate_matrix(&basis, k)).unwrap() } else { BigInt::zero() };
            if det.abs().is_one() {
                orders += 1;
            } else {
                failures.push(format!("free basis k={k}: {} elements, det {det}", basis.len()));
            }
        }
    }

    let mut idempotent_checks = 0;
    let mut idempotent_ok = true;
    for k in 1..=4u32 {
        for idx in 0..7i64.pow(k) {
            let coords: Vec<i64> = (0..k).map(|j| (idx / 7i64.pow(j)) % 7 - 3).collect();
            let x = LatticeRingElement::from_i64(&coords);
            let squared = lattice::s_mul(&x, &x).unwrap();
            if (squared == x) != coords.iter().all(|&c| c == 0 || c == 1) {
                idempotent_ok = false;
                failures.push(format!("idempotent check {coords:?}"));
            }
            idempotent_checks += 1;
        }
    }

    Outcome::new(
        ideals == 200 && orders == 500 && idempotent_ok,
        format!(
            "lattice ring: {ideals}/200 ideals, {orders}/500 free-basis orders unimodular, \
             {idempotent_checks} idempotence checks"
        ),
        failures,
    )
}

fn main() -> ExitCode {
    let instances = suite();
    let mut outcomes: Vec<(usize, Outcome)> = Vec::new();

    let (c1, finite_ok) = criterion_1(&instances);
    outcomes.push((1, c1));

    let start = Instant::now();
    let runs = stream_runs(&instances);
    let stream_time = start.elapsed();
    let total = instances.len();

    let mut c2_failures = runs.padded_failures.clone();
    c2_failures.extend(runs.extended_failures.iter().cloned());
    outcomes.push((
        2,
        Outcome::new(
            runs.padded_ok == total && runs.extended_ok == total,
            format!(
                "streaming engine: {}/{total} zero-padded and {}/{total} identity-extended runs stable within 4n loops and verified ({:.2?})",
                runs.padded_ok, runs.extended_ok, stream_time
            ),
            c2_failures,
        ),
    ));

    outcomes.push((
        3,
        Outcome::new(
            runs.boundary.textbook_failures.is_empty(),
            format!("R mod q equals textbook elimination at all {} loop boundaries", runs.boundary.loops),
            runs.boundary.textbook_failures.clone(),
        ),
    ));

    outcomes.push((4, criterion_4(&instances)));
    outcomes.push((5, criterion_5()));

    let both = (0..total).filter(|&i| finite_ok[i]).count();
    let mut c6_failures: Vec<String> =
        (0..total).filter(|&i| !finite_ok[i]).map(|i| format!("seed {}: finite engine failed", instances[i].seed)).collect();
    c6_failures.extend(runs.padded_failures.iter().cloned());
    outcomes.push((
        6,
        Outcome::new(
            both == total && runs.padded_ok == total,
            format!("cross-check: finite {both}/{total}, streaming {}/{total} satisfy the lifting contract", runs.padded_ok),
            c6_failures,
        ),
    ));

    let mut c7_failures = runs.hooks.failures.clone();
    c7_failures.extend(runs.boundary.purity_failures.iter().cloned());
    c7_failures.extend(runs.boundary.congruence_failures.iter().cloned());
    outcomes.push((
        7,
        Outcome::new(
            c7_failures.is_empty(),
            format!(
                "loop invariants: R purity, C = U A mod q, M R = C, pivot block det 1 ({} boundaries, {} hook checks)",
                runs.boundary.loops, runs.hooks.checks
            ),
            c7_failures,
        ),
    ));

    outcomes.push((8, criterion_8()));

    outcomes.push((
        9,
        Outcome::new(
            runs.monotone_failures.is_empty(),
            format!(
                "stabilization monotonicity: {} rows in {} runs unchanged for {FURTHER_LOOPS} loops after stabilizing",
                runs.monotone_rows, runs.monotone_runs
            ),
            runs.monotone_failures.clone(),
        ),
    ));

    let mut all = true;
    for (n, o) in &outcomes {
        println!("criterion {n} [{}] {}", if o.pass { "PASS" } else { "FAIL" }, o.summary);
        for f in o.failures.iter().take(5) {
            println!("    {f}");
        }
        if o.failures.len() > 5 {
            println!("    ... {} more", o.failures.len() - 5);
        }
        all &= o.pass;
    }
    if all {
        println!("acceptance: all {} criteria passed", outcomes.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {} criteria failed", outcomes.iter().filter(|(_, o)| !o.pass).count());
        ExitCode::FAILURE
    }
}
