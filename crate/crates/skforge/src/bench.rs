//! Length-scaling benchmark: zigzag per template plus the balanced-commutator
//! baseline, written as CSV with fitted log-log slopes.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use skforge_core::basenet::{GateSet, Net};
use skforge_core::steps::StepParams;
use skforge_core::su2::GroupElement;
use skforge_core::words::Template;
use skforge_core::zigzag::{dn_synthesize, step_constant, DnResult, SynthError, SynthParams, Synthesizer};

use crate::manifest::RunManifest;

/// Deepest baseline recursion attempted. Depth 7 reaches about `2^-47` on
/// the default net at about a million letters.
pub const DN_MAX_DEPTH: usize = 7;

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub n_min: usize,
    pub n_max: usize,
    pub templates: Vec<Template>,
    pub targets: usize,
    pub seed: u64,
    pub step: StepParams,
    pub c_k: usize,
    pub precision: usize,
    pub timing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub n: usize,
    #[serde(skip)]
    pub target: usize,
    #[serde(serialize_with = "sci")]
    pub eps_target: f64,
    #[serde(serialize_with = "sci_opt")]
    pub eps_achieved: Option<f64>,
    pub len: Option<usize>,
    pub template: String,
    pub algo: &'static str,
    pub wall_ms: u64,
    pub status: String,
    pub manifest: String,
}

fn sci<S: serde::Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{x:.6e}"))
}

fn sci_opt<S: serde::Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(x) => sci(x, s),
        None => s.serialize_str(""),
    }
}

impl BenchRow {
    pub fn ok(&self) -> bool {
        self.status == "ok"
    }
}

/// Per-series summary: fitted slope and, for zigzag series, the length
/// bound `len(w_n) <= M C n^2` with `C` measured from the step generator.
#[derive(Debug, Clone)]
pub struct Series {
    pub name: String,
    pub slope: Option<f64>,
    pub step_constant: Option<f64>,
    pub bound_holds: Option<bool>,
}

#[derive(Debug, Clone)]
pub struct BenchReport {
    pub manifest: RunManifest,
    pub rows: Vec<BenchRow>,
    pub series: Vec<Series>,
}

impl BenchReport {
    pub fn success_fraction(&self) -> f64 {
        if self.rows.is_empty() {
            return 1.0;
        }
        self.rows.iter().filter(|r| r.ok()).count() as f64 / self.rows.len() as f64
    }

    pub fn slope(&self, name: &str) -> Option<f64> {
        self.series.iter().find(|s| s.name == name).and_then(|s| s.slope)
    }

    pub fn summary(&self, m_mult: f64) -> String {
        let mut out = String::new();
        let ok = self.rows.iter().filter(|r| r.ok()).count();
        writeln!(out, "rows: {ok}/{} ok, manifest {}", self.rows.len(), self.manifest.id()).unwrap();
        for s in &self.series {
            let slope = s.slope.map_or("n/a".into(), |x| format!("{x:.3}"));
            write!(out, "{:>6}  slope {slope}", s.name).unwrap();
            if let (Some(c), Some(b)) = (s.step_constant, s.bound_holds) {
                write!(out, "  C = {c:.3}, len <= {m_mult} C n^2: {}", if b { "holds" } else { "VIOLATED" }).unwrap();
            }
            writeln!(out).unwrap();
        }
        out
    }

    pub fn to_csv(&self) -> Vec<u8> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(r).expect("rows serialize");
        }
        w.into_inner().expect("in-memory writer")
    }

    /// Writes the CSV and `<stem>.manifest.json` next to it, each through a
    /// temporary file and a rename.
    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        write_atomic(path, &self.to_csv())?;
        write_atomic(&path.with_extension("manifest.json"), self.manifest.to_json().as_bytes())
    }
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Seeded targets, uniform on the unit quaternions.
pub fn random_targets(seed: u64, count: usize, precision: usize) -> Vec<GroupElement> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_element(&mut rng, precision)).collect()
}

pub fn random_element(rng: &mut ChaCha8Rng, precision: usize) -> GroupElement {
    loop {
        let v: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let n: f64 = v.iter().map(|x| x * x).sum();
        if n > 1e-2 && n < 1.0 {
            return GroupElement::from_f64(v, precision).normalized();
        }
    }
}

/// Least-squares slope of `y` against `x`; `None` with fewer than two
/// distinct `x`.
pub fn fit_slope(points: &[(f64, f64)]) -> Option<f64> {
    let k = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if points.len() < 2 || sxx < 1e-12 {
        return None;
    }
    Some(points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx)
}

fn status_of(e: &SynthError) -> String {
    match e {
        SynthError::TargetUnreachable { .. } => "TargetUnreachable",
        SynthError::PrecisionShortfall { .. } => "PrecisionShortfall",
        SynthError::Unsolvable { .. } => "Unsolvable",
        SynthError::ConvergenceFailure { .. } => "ConvergenceFailure",
    }
    .into()
}

fn elapsed_ms(t: Instant, timing: bool) -> u64 {
    if timing {
        t.elapsed().as_millis() as u64
    } else {
        0
    }
}

/// Baseline runs at depths `0, 1, ...` until `2^-n_max` is reached, with
/// the wall time of each.
fn dn_ladder(gates: &GateSet, net: &Net, g: &GroupElement, n_max: usize, timing: bool) -> Vec<(Result<DnResult, SynthError>, u64)> {
    let goal = (-(n_max as f64)).exp2();
    let mut out = Vec::new();
    for depth in 0..=DN_MAX_DEPTH {
        let t = Instant::now();
        let r = dn_synthesize(gates, net, g, depth);
        let done = match &r {
            Ok(r) => r.spine[depth] < goal,
            Err(_) => true,
        };
        out.push((r, elapsed_ms(t, timing)));
        if done {
            break;
        }
    }
    out
}

pub fn run(gates: &GateSet, gate_hash: String, net: &Net, cfg: &BenchConfig) -> BenchReport {
    let names: Vec<String> = cfg.templates.iter().map(|t| t.name()).collect();
    let params: Vec<SynthParams> = cfg.templates.iter().map(|&t| SynthParams { template: t, c_k: cfg.c_k, ..SynthParams::default() }).collect();
    let manifest = RunManifest::new(
        gate_hash,
        net,
        &cfg.step,
        &params.first().copied().unwrap_or_default(),
        names.clone(),
        cfg.precision,
        cfg.seed,
        (cfg.n_min, cfg.n_max),
        cfg.targets,
        cfg.timing,
    );
    let id = manifest.id();
    let targets = random_targets(cfg.seed, cfg.targets, cfg.precision);
    let mut synths: Vec<Synthesizer> = params.iter().map(|&p| Synthesizer::new(gates, net, p, cfg.step, cfg.precision)).collect();
    let ladders: Vec<_> = targets.iter().map(|g| dn_ladder(gates, net, g, cfg.n_max, cfg.timing)).collect();

    let mut rows = Vec::new();
    for n in cfg.n_min..=cfg.n_max {
        let eps = (-(n as f64)).exp2();
        for (ti, g) in targets.iter().enumerate() {
            for (si, sy) in synths.iter_mut().enumerate() {
                let t = Instant::now();
                let r = sy.synthesize(g, n);
                let wall_ms = elapsed_ms(t, cfg.timing);
                let (eps_achieved, len, status) = match r {
                    Ok(r) => (Some(r.achieved_distance.to_f64()), Some(r.word.len()), "ok".to_string()),
                    Err(e) => (None, None, status_of(&e)),
                };
                rows.push(BenchRow { n, target: ti, eps_target: eps, eps_achieved, len, template: names[si].clone(), algo: "zigzag", wall_ms, status, manifest: id.clone() });
            }
            rows.push(dn_row(&ladders[ti], n, ti, eps, &id));
        }
    }

    let mut series = Vec::new();
    for (si, name) in names.iter().enumerate() {
        let pts: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| r.ok() && r.algo == "zigzag" && &r.template == name)
            .map(|r| ((r.n as f64).ln(), (r.len.unwrap() as f64).ln()))
            .collect();
        let p = params[si];
        let c = step_constant(synths[si].steps(), cfg.n_max, p.alpha).ok();
        let bound = c.map(|c| {
            rows.iter()
                .filter(|r| r.ok() && r.algo == "zigzag" && &r.template == name)
                .all(|r| r.len.unwrap() as f64 <= p.m_mult * c * (r.n as f64).powf(p.alpha))
        });
        series.push(Series { name: name.clone(), slope: fit_slope(&pts), step_constant: c, bound_holds: bound });
    }
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.ok() && r.algo == "dn")
        .map(|r| ((1.0 / r.eps_target).ln().ln(), (r.len.unwrap() as f64).ln()))
        .collect();
    series.push(Series { name: "dn".into(), slope: fit_slope(&pts), step_constant: None, bound_holds: None });

    BenchReport { manifest, rows, series }
}

/// The shallowest baseline depth reaching `eps`.
fn dn_row(ladder: &[(Result<DnResult, SynthError>, u64)], n: usize, target: usize, eps: f64, id: &str) -> BenchRow {
    let mut row = BenchRow {
        n,
        target,
        eps_target: eps,
        eps_achieved: None,
        len: None,
        template: "comm".into(),
        algo: "dn",
        wall_ms: 0,
        status: "TargetUnreachable".into(),
        manifest: id.into(),
    };
    for (depth, (r, ms)) in ladder.iter().enumerate() {
        match r {
            Ok(r) if r.spine[depth] < eps => {
                row.eps_achieved = Some(r.spine[depth]);
                row.len = Some(r.spine_len[depth]);
                row.wall_ms = *ms;
                row.status = "ok".into();
                return row;
            }
            Ok(_) => {}
            Err(e) => {
                row.status = status_of(e);
                return row;
            }
        }
    }
    row
}
