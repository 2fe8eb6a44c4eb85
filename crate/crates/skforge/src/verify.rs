//! Verification suites behind `skforge verify`.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use skforge_core::cancellation::verify_nilfib;
use skforge_core::real::Real;
use skforge_core::su2::{comm_distance, Angle, GroupElement};
use skforge_core::words::{elkasapy_length, elkasapy_omega_commutator, elkasapy_pair, elkasapy_zeta_length, endpoints, Letter, G, H};

/// A pass/fail table.
#[derive(Debug, Clone)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<(Vec<String>, bool)>,
}

impl Table {
    fn new(columns: &[&'static str]) -> Self {
        Table { columns: columns.to_vec(), rows: Vec::new() }
    }

    fn push(&mut self, cells: Vec<String>, pass: bool) {
        self.rows.push((cells, pass));
    }

    pub fn passed(&self) -> usize {
        self.rows.iter().filter(|r| r.1).count()
    }

    pub fn all_passed(&self) -> bool {
        self.passed() == self.rows.len()
    }

    pub fn render(&self) -> String {
        let mut cells: Vec<Vec<String>> = vec![self.columns.iter().map(|c| c.to_string()).chain(["result".into()]).collect()];
        for (r, pass) in &self.rows {
            cells.push(r.iter().cloned().chain([if *pass { "pass" } else { "FAIL" }.into()]).collect());
        }
        let widths: Vec<usize> = (0..cells[0].len()).map(|i| cells.iter().map(|r| r[i].len()).max().unwrap()).collect();
        let mut out = String::new();
        for r in &cells {
            let line: Vec<String> = r.iter().zip(&widths).map(|(c, w)| format!("{c:>w$}")).collect();
            writeln!(out, "{}", line.join("  ").trim_end()).unwrap();
        }
        writeln!(out, "{}/{} passed", self.passed(), self.rows.len()).unwrap();
        out
    }
}

/// Free-reduced lengths against the closed forms, and the two recurrences
/// against each other, for `2 <= n <= n_max`.
pub fn elkasapy_lengths(n_max: u32) -> Table {
    let mut t = Table::new(&["n", "len(omega)", "closed", "len(zeta)", "closed", "recurrences"]);
    for n in 2..=n_max {
        let pair = elkasapy_pair(n);
        let other = elkasapy_omega_commutator(n);
        let (lo, lz) = (pair.omega.len() as u64, pair.zeta.len() as u64);
        let (co, cz) = (elkasapy_length(n), elkasapy_zeta_length(n));
        let agree = pair.omega == other;
        let cells = vec![
            n.to_string(),
            lo.to_string(),
            co.to_string(),
            lz.to_string(),
            cz.to_string(),
            if agree { "agree" } else { "differ" }.into(),
        ];
        t.push(cells, lo == co && lz == cz && agree);
    }
    t
}

/// Leading degree of `omega_n` at the Pauli inputs, for `1 <= n <= n_max`.
pub fn nilfib(n_max: u32) -> Table {
    let mut t = Table::new(&["n", "f_n", "degree", "leading"]);
    for n in 1..=n_max {
        let r = verify_nilfib(n);
        let degree = r.degree.map_or("none".into(), |d| d.to_string());
        let leading = format!("{}{}", r.axis_name(), if r.leading_matches { "" } else { " (mismatch)" });
        t.push(vec![n.to_string(), r.fib.to_string(), degree, leading], r.passed());
    }
    t
}

/// Direct commutator distance against `2 asin(sin^2 psi sin theta)` on
/// `count` seeded random pairs, tolerance `2^(24 - p)`.
pub fn cross(count: usize, seed: u64, p: usize) -> Table {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tol = Real::pow2(24 - p as isize, p);
    let (mut ok, mut worst) = (0usize, f64::NEG_INFINITY);
    for _ in 0..count {
        let psi: f64 = rng.gen_range(0.0..std::f64::consts::FRAC_PI_2);
        let theta: f64 = rng.gen_range(0.0..std::f64::consts::PI);
        let (a, b) = axis_pair(&mut rng, theta, p);
        let r = Real::from_f64(psi, p);
        let g = GroupElement::exp_axis(&a, &r);
        let h = GroupElement::exp_axis(&b, &r);
        let direct = g.commutator(&h).distance_to_identity();
        let closed = comm_distance(&Angle::from_f64(psi, p), &Angle::from_f64(theta, p));
        let err = (direct.radians() - closed.radians()).abs();
        if err < tol {
            ok += 1;
        }
        worst = worst.max(err.log2_floor().map_or(f64::NEG_INFINITY, |e| e as f64));
    }
    let mut t = Table::new(&["samples", "within", "worst err", "tolerance"]);
    let worst = if worst.is_finite() { format!("2^{worst}") } else { "0".into() };
    t.push(vec![count.to_string(), ok.to_string(), worst, format!("2^{}", 24 - p as isize)], ok == count);
    t
}

/// Unit axes `a`, `b` at angle exactly `theta` (up to rounding at `p`), in a
/// random plane.
fn axis_pair(rng: &mut ChaCha8Rng, theta: f64, p: usize) -> ([Real; 3], [Real; 3]) {
    let v = |rng: &mut ChaCha8Rng| loop {
        let v: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let n = v.iter().map(|x| x * x).sum::<f64>();
        if n > 0.05 && n < 1.0 {
            return v.map(|x| Real::from_f64(x, p));
        }
    };
    let unit = |v: [Real; 3]| {
        let n = (v[0].square() + v[1].square() + v[2].square()).sqrt();
        v.map(|x| x / &n)
    };
    let a = unit(v(rng));
    let c = v(rng);
    let dot = &a[0] * &c[0] + &a[1] * &c[1] + &a[2] * &c[2];
    let perp = unit(std::array::from_fn(|i| &c[i] - &(&dot * &a[i])));
    let th = Real::from_f64(theta, p);
    let (ct, st) = (th.cos(), th.sin());
    let b = std::array::from_fn(|i| &(&ct * &a[i]) + &(&st * &perp[i]));
    (a, b)
}

fn letters(ls: &[Letter]) -> String {
    ls.iter()
        .map(|&l| {
            let base = if l.generator == G.generator { "g" } else if l.generator == H.generator { "h" } else { "?" };
            if l.inverse { format!("{base}^-1") } else { base.into() }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Boundary letters of `(omega_n, zeta_n)` for `2 <= n <= n_max`.
pub fn endpoints_table(n_max: u32) -> Table {
    let mut t = Table::new(&["n", "n mod 3", "omega ends", "zeta ends"]);
    for n in 2..=n_max {
        let pair = elkasapy_pair(n);
        let (po, pz) = endpoints(n);
        let cell = |p: &skforge_core::words::EndPattern| format!("{} .. {}", letters(&p.prefix), letters(&p.suffix));
        t.push(vec![n.to_string(), (n % 3).to_string(), cell(&po), cell(&pz)], po.matches(&pair.omega) && pz.matches(&pair.zeta));
    }
    t
}

