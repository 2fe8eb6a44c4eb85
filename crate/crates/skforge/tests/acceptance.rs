//! Acceptance criteria, one line each. Runs without the libtest harness so
//! the lines are always printed; exits non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use skforge::bench::{self, BenchConfig};
use skforge::gateset::{self, LoadedGateSet};
use skforge::verify;
use skforge_core::basenet::{halton_point, Net, NetParams};
use skforge_core::cancellation::ccan_witness;
use skforge_core::real::{working_precision, Real};
use skforge_core::steps::{in_window, StepParams, Steps};
use skforge_core::su2::{GroupElement, Quat};
use skforge_core::words::{Letter, Template, Word};
use skforge_core::zigzag::{solve_two_conjugate, SynthParams, Synthesizer};

const SEED: u64 = 1;
const NET: NetParams = NetParams { max_len: 18, delta_d: 1e-4 };

const C1_N_MAX: u32 = 24;
const C1_TIME: Duration = Duration::from_secs(1);
const C2_N_MAX: u32 = 9;
const C2_TIME: Duration = Duration::from_secs(60);
const C4_SAMPLES: usize = 1000;
const C4_PRECISION: usize = 128;
const C5_N_MAX: usize = 28;
const C6_N: usize = 25;
const C6_TARGETS: usize = 20;
const C6_TIME: Duration = Duration::from_secs(600);
const C7_RANGE: (usize, usize) = (10, 30);
const C7_TARGETS: usize = 3;
const C7_COMM_SLOPE: (f64, f64) = (1.6, 2.8);
const C7_ELK_SLACK: f64 = 0.2;
const C8_M: f64 = 7.0;
const C9_NET_LENGTHS: [usize; 3] = [8, 11, 14];
const C9_NET_MAX_ENTRIES: usize = 10_000;
const C9_NEAREST_TOL: f64 = 1e-12;
const C9_PROBES: u64 = 2000;
const C9_SOLVER_CASES: usize = 1000;
const C9_PRECISION: usize = 128;
const C9_RESIDUAL_BITS: isize = 32;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn c1() -> Outcome {
    let t = Instant::now();
    let table = verify::elkasapy_lengths(C1_N_MAX);
    let el = t.elapsed();
    outcome(table.all_passed() && el < C1_TIME, format!("{}/{} n, {el:.2?}", table.passed(), table.rows.len()))
}

fn c2() -> Outcome {
    let t = Instant::now();
    let table = verify::nilfib(C2_N_MAX);
    let el = t.elapsed();
    outcome(table.all_passed() && el < C2_TIME, format!("{}/{} n, {el:.2?}", table.passed(), table.rows.len()))
}

fn c3() -> Outcome {
    let gen = |i| Word::letter(Letter::new(i));
    let (f, g, h) = (gen(0), gen(1), gen(2));
    let w14 = Word::commutator(&Word::commutator(&f, &g), &Word::commutator(&g, &h));
    let (g, h) = (gen(0), gen(1));
    let w5 = Word::commutator(&Word::commutator(&g, &h), &Word::commutator(&h, &g.invert()));
    let (a, b) = (ccan_witness(&w14, 4, 8), ccan_witness(&w5, 4, 8));
    outcome(a == Ok(4) && b == Ok(5), format!("[[f,g],[g,h]] -> {a:?}, [[g,h],[h,g^-1]] -> {b:?}"))
}

fn c4() -> Outcome {
    let table = verify::cross(C4_SAMPLES, SEED, C4_PRECISION);
    let row = &table.rows[0].0;
    outcome(table.all_passed(), format!("{}/{} within {}, worst {}", row[1], row[0], row[3], row[2]))
}

fn c5(gs: &LoadedGateSet, net: &Net) -> Outcome {
    let p = working_precision(C5_N_MAX);
    let mut steps = Steps::new(&gs.gates, net, StepParams::default(), p);
    let mut bad = Vec::new();
    for n in 1..=C5_N_MAX {
        match steps.step(n) {
            Ok(s) if in_window(&s.element.projective_distance_to_identity(), n) => {}
            _ => bad.push(n),
        }
    }
    outcome(bad.is_empty(), format!("n = 1..={C5_N_MAX} at {p} bits, outside window: {bad:?}"))
}

fn c6(gs: &LoadedGateSet, net: &Net) -> Outcome {
    let p = working_precision(C6_N);
    let t = Instant::now();
    let mut sy = Synthesizer::new(&gs.gates, net, SynthParams::default(), StepParams::default(), p);
    let (mut ok, mut worst_bits) = (0, f64::INFINITY);
    for g in bench::random_targets(SEED, C6_TARGETS, p) {
        let Ok(r) = sy.synthesize(&g, C6_N) else { continue };
        // Re-evaluate at twice the precision, and in f64 as a cross-check.
        let hp = 2 * r.precision;
        let d = gs.gates.evaluate(&r.word, hp).projective_distance(&g.with_precision(hp));
        let d64 = gs.gates.evaluate_f64(&r.word).projective_distance(&g.to_quat());
        let eps = Real::pow2(-(C6_N as isize), hp);
        if *d.radians() < eps && d64 < (-(C6_N as f64)).exp2() {
            ok += 1;
        }
        worst_bits = worst_bits.min(-d.log2());
    }
    let el = t.elapsed();
    outcome(ok == C6_TARGETS && el < C6_TIME, format!("{ok}/{C6_TARGETS} below 2^-{C6_N}, worst {worst_bits:.2} bits, {el:.1?}"))
}

fn c7_c8(gs: &LoadedGateSet, net: &Net) -> (Outcome, Outcome) {
    let cfg = BenchConfig {
        n_min: C7_RANGE.0,
        n_max: C7_RANGE.1,
        templates: vec![Template::Commutator, Template::Elkasapy(5)],
        targets: C7_TARGETS,
        seed: SEED,
        step: StepParams::default(),
        c_k: SynthParams::default().c_k,
        precision: working_precision(C7_RANGE.1),
        timing: false,
    };
    let report = bench::run(&gs.gates, gs.hash_hex(), net, &cfg);
    let all_ok = report.rows.iter().all(|r| r.ok());
    let (comm, elk, dn) = (report.slope("comm"), report.slope("elk5"), report.slope("dn"));
    let c7 = match (comm, elk, dn) {
        (Some(c), Some(e), Some(d)) => outcome(
            all_ok && (C7_COMM_SLOPE.0..=C7_COMM_SLOPE.1).contains(&c) && e <= c + C7_ELK_SLACK && c < d && e < d,
            format!("comm {c:.3}, elk5 {e:.3}, dn {d:.3}, all rows ok: {all_ok}"),
        ),
        _ => outcome(false, format!("slopes undefined: {comm:?} {elk:?} {dn:?}")),
    };
    let b = SynthParams::default().b;
    let comm = report.series.iter().find(|s| s.name == "comm").unwrap();
    let m = SynthParams::default().m_mult;
    let c8 = outcome(
        b == 0.25 && m == C8_M && comm.bound_holds == Some(true),
        format!("b = {b}, M = {m}, C = {:.3}, len <= M C n^2 over n in {C7_RANGE:?}: {:?}", comm.step_constant.unwrap_or(f64::NAN), comm.bound_holds),
    );
    (c7, c8)
}

fn c9(gs: &LoadedGateSet) -> Outcome {
    let mut mismatches = 0;
    let mut sizes = Vec::new();
    for len in C9_NET_LENGTHS {
        let net = Net::build(&gs.gates, NetParams { max_len: len, ..NET });
        assert!(net.entries().len() <= C9_NET_MAX_ENTRIES);
        sizes.push(net.entries().len());
        let probes = (1..=C9_PROBES).map(halton_point);
        // Every entry, nudged, plus quasi-random probes.
        let nudged = net.entries().iter().map(|e| Quat([e.quat.0[0] + 1e-3, e.quat.0[1], e.quat.0[2] - 1e-3, e.quat.0[3]]).normalized());
        for t in probes.chain(nudged) {
            let (_, d) = net.nearest_quat(&t);
            let scan = net.entries().iter().map(|e| e.quat.projective_distance(&t)).fold(f64::INFINITY, f64::min);
            if (d - scan).abs() > C9_NEAREST_TOL {
                mismatches += 1;
            }
        }
    }
    let p = C9_PRECISION;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let tol = Real::pow2(C9_RESIDUAL_BITS - p as isize, p);
    let mut residual_fail = 0;
    for _ in 0..C9_SOLVER_CASES {
        let axis = |rng: &mut ChaCha8Rng| bench::random_element(rng, p).log().0;
        let psi: f64 = rng.gen_range(1e-6..1.2);
        let frac: f64 = rng.gen_range(0.0..1.0);
        let s = GroupElement::exp_axis(&axis(&mut rng), &Real::from_f64(psi, p));
        let t = GroupElement::exp_axis(&axis(&mut rng), &Real::from_f64(2.0 * psi * frac, p));
        let ok = match solve_two_conjugate(&t, &s) {
            Ok((gu, gv)) => *s.conj(&gu).mul(&s.conj(&gv)).projective_distance(&t).radians() < tol,
            Err(_) => false,
        };
        if !ok {
            residual_fail += 1;
        }
    }
    outcome(
        mismatches == 0 && residual_fail == 0,
        format!("nearest mismatches {mismatches} on nets of {sizes:?} entries; solver {}/{C9_SOLVER_CASES} below 2^{}", C9_SOLVER_CASES - residual_fail, C9_RESIDUAL_BITS - p as isize),
    )
}

fn main() -> ExitCode {
    let gs = gateset::parse(gateset::CLIFFORD_T).expect("bundled gate set");
    let net = Net::build(&gs.gates, NET);
    let mut results: Vec<(&str, Outcome)> = Vec::new();
    let mut run = |name: &'static str, f: &mut dyn FnMut() -> Outcome| {
        let t = Instant::now();
        let o = f();
        println!("{} {name}: {} [{:.1?}]", if o.pass { "PASS" } else { "FAIL" }, o.detail, t.elapsed());
        results.push((name, o));
    };
    run("1 elkasapy lengths", &mut c1);
    run("2 nilfib degrees", &mut c2);
    run("3 example-word degrees", &mut c3);
    run("4 commutator geometry", &mut c4);
    run("5 step window", &mut || c5(&gs, &net));
    run("6 end-to-end accuracy", &mut || c6(&gs, &net));
    let mut o8 = None;
    run("7 scaling", &mut || {
        let (o7, b) = c7_c8(&gs, &net);
        o8 = Some(b);
        o7
    });
    run("8 length bookkeeping", &mut || o8.take().unwrap());
    run("9 oracle equivalence", &mut || c9(&gs));
    let failed = results.iter().filter(|r| !r.1.pass).count();
    println!("acceptance: {}/{} criteria pass", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
