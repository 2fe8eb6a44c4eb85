//! Zigzag refinement: `w_n = w_m s_m^u s_m^v` with `m = ceil((1 - b) n)` and
//! conjugators `u`, `v` synthesized recursively to `k = ceil(b n) + c_k` bits.
//!
//! Also hosts the balanced-commutator (Dawson-Nielsen) baseline.

use alloc::vec::Vec;

use thiserror::Error;

use crate::basenet::{halton_point, GateSet, Net};
use crate::real::{working_precision, Real};
use crate::steps::{StepError, StepParams, Steps};
use crate::su2::{Angle, GroupElement};
use crate::words::{Template, Word};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SynthError {
    #[error("target unreachable at index {n}: {reason}")]
    TargetUnreachable { n: usize, reason: alloc::string::String },
    #[error("verification failed: achieved {achieved_bits:.2} bits, needed {n}")]
    PrecisionShortfall { n: usize, achieved_bits: f64 },
    #[error("two-conjugate equation unsolvable: d(t, 1) = {dt:.3e} exceeds 2 psi = {two_psi:.3e}")]
    Unsolvable { dt: f64, two_psi: f64 },
    #[error("baseline did not converge at depth {depth}: eps {eps:.3e}, base {prev:.3e}")]
    ConvergenceFailure { depth: usize, eps: f64, prev: f64 },
}

impl From<StepError> for SynthError {
    fn from(e: StepError) -> Self {
        let n = match e {
            StepError::StepUnreachable { n, .. } => n,
            StepError::NoConjugatorFound => 0,
        };
        SynthError::TargetUnreachable { n, reason: alloc::format!("{e}") }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthParams {
    /// Branching fraction `b`.
    pub b: f64,
    /// Word length exponent `alpha` of the step generator.
    pub alpha: f64,
    /// Length multiplier `M` in `len(w_n) <= M C n^alpha`. Reported only.
    pub m_mult: f64,
    /// Largest index handled by the base case. Reported only; the base case
    /// is decided by `m = n` or `k >= n`.
    pub cutoff: usize,
    /// Extra conjugator bits.
    pub c_k: usize,
    pub template: Template,
}

/// Default extra conjugator bits. Each conjugator error `2^-k` moves the
/// endpoint by at most `4 d(s_m, 1) 2^-k < 2^(3 - m - k)`, and with
/// `n - m = floor(b n)` four bits keep that below `2^-n`.
pub const DEFAULT_CK: usize = 4;

/// `b = 4^(1 / (1 - alpha))`.
pub fn branching_for(alpha: f64) -> f64 {
    libm::pow(4.0, 1.0 / (1.0 - alpha))
}

/// `M = 3 / ((1 - b)^(1 - alpha) - 1)`.
pub fn multiplier_for(alpha: f64, b: f64) -> f64 {
    3.0 / (libm::pow(1.0 - b, 1.0 - alpha) - 1.0)
}

impl SynthParams {
    pub fn new(template: Template, alpha: f64, c_k: usize) -> Self {
        let b = branching_for(alpha);
        let mut p = SynthParams { b, alpha, m_mult: multiplier_for(alpha, b), cutoff: 0, c_k, template };
        p.cutoff = p.base_cutoff();
        p
    }

    pub fn spine_index(&self, n: usize) -> usize {
        libm::ceil((1.0 - self.b) * n as f64) as usize
    }

    /// Largest `n` for which the base case fires.
    pub fn base_cutoff(&self) -> usize {
        (1..4096).take_while(|&n| self.is_base(n)).last().unwrap_or(0)
    }

    fn is_base(&self, n: usize) -> bool {
        self.spine_index(n) >= n || precision_budget(n, self) >= n
    }
}

impl Default for SynthParams {
    /// `alpha = 2`, hence `b = 1/4`; `M = 7` is the smallest integer above
    /// the sharp bound `M > 6` for this case.
    fn default() -> Self {
        let mut p = SynthParams::new(Template::Commutator, 2.0, DEFAULT_CK);
        p.m_mult = 7.0;
        p
    }
}

/// `k = ceil(b n) + c_k`.
pub fn precision_budget(n: usize, params: &SynthParams) -> usize {
    libm::ceil(params.b * n as f64) as usize + params.c_k
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SynthStats {
    pub depth: usize,
    pub step_cache_hits: usize,
    pub base_calls: usize,
    /// Times the spine fell back from `s_m` to `s_(m-1)`.
    pub fallbacks: usize,
}

#[derive(Debug, Clone)]
pub struct SynthResult {
    pub word: Word,
    pub achieved_distance: Angle,
    pub target_n: usize,
    pub precision: usize,
    pub stats: SynthStats,
}

/// Unit vector along `v`, or `z` when `v` vanishes.
fn unit_or_z(v: [&Real; 3], p: usize) -> [Real; 3] {
    let n = (v[0].square() + v[1].square() + v[2].square()).sqrt();
    if n.is_zero() {
        return [Real::zero(p), Real::zero(p), Real::one(p)];
    }
    [v[0] / &n, v[1] / &n, v[2] / &n]
}

fn perpendicular(e: &[Real; 3], p: usize) -> [Real; 3] {
    let ax = [e[0].abs(), e[1].abs(), e[2].abs()];
    let i = if ax[0] <= ax[1] && ax[0] <= ax[2] {
        0
    } else if ax[1] <= ax[2] {
        1
    } else {
        2
    };
    let mut basis = [Real::zero(p), Real::zero(p), Real::zero(p)];
    basis[i] = Real::one(p);
    let c = cross(e, &basis);
    let n = (c[0].square() + c[1].square() + c[2].square()).sqrt();
    [&c[0] / &n, &c[1] / &n, &c[2] / &n]
}

fn cross(x: &[Real; 3], y: &[Real; 3]) -> [Real; 3] {
    [
        &x[1] * &y[2] - &x[2] * &y[1],
        &x[2] * &y[0] - &x[0] * &y[2],
        &x[0] * &y[1] - &x[1] * &y[0],
    ]
}

fn combine(x: &[Real; 3], cx: &Real, y: &[Real; 3], cy: &Real) -> [Real; 3] {
    core::array::from_fn(|i| cx * &x[i] + cy * &y[i])
}

/// Conjugators `(g_u, g_v)` with `s^(g_u) s^(g_v) = t` up to sign.
///
/// With `psi = d(s, 1)` and conjugated axes `n1`, `n2`, the real part of the
/// product is `1 - 2 sin^2(psi) cos^2(beta)` where `n1.n2 = cos(2 beta)`, so
/// `cos(beta) = sin(d(t, 1) / 2) / sin(psi)`. Writing `n1, n2 = cos(beta) a
/// +- sin(beta) b`, the vector part is parallel to
/// `cos(psi) a + sin(psi) sin(beta) (a x b)`, which fixes the frame `(a, b)`
/// against the axis of `t`.
pub fn solve_two_conjugate(t: &GroupElement, s: &GroupElement) -> Result<(GroupElement, GroupElement), SynthError> {
    let p = s.precision().max(t.precision());
    let (s, t) = (s.with_precision(p).upper(), t.with_precision(p).upper());
    let one = Real::one(p);
    let two = Real::from_i64(2, p);

    let sin_psi = s.vector_norm();
    let cos_psi = s.a.clone();
    let sin_t = t.vector_norm();
    // |t - 1|^2 = (1 - a)^2 + |v|^2 with 1 - a = |v|^2 / (1 + a).
    let one_minus_a = sin_t.square() / (&one + &t.a);
    let half_chord = (one_minus_a.square() + sin_t.square()).sqrt() / &two;

    let dt = || Angle::new(half_chord.asin() * &two).to_f64();
    let two_psi = || 2.0 * sin_psi.asin().to_f64();
    if sin_psi.is_zero() {
        return Err(SynthError::Unsolvable { dt: dt(), two_psi: 0.0 });
    }
    let mut cos_beta = &half_chord / &sin_psi;
    if cos_beta > one {
        if cos_beta > &one + Real::pow2(32 - p as isize, p) {
            return Err(SynthError::Unsolvable { dt: dt(), two_psi: two_psi() });
        }
        cos_beta = one.clone();
    }
    let sin_beta = (&one - cos_beta.square()).sqrt();

    let e = unit_or_z(t.vector(), p);
    let f = perpendicular(&e, p);
    let ss = &sin_psi * &sin_beta;
    let norm = (cos_psi.square() + ss.square()).sqrt();
    let a = combine(&e, &(&cos_psi / &norm), &f, &(&ss / &norm));
    let c = combine(&e, &(&ss / &norm), &f, &(-&cos_psi / &norm));
    let b = cross(&c, &a);

    let n1 = combine(&a, &cos_beta, &b, &sin_beta);
    let n2 = combine(&a, &cos_beta, &b, &(-&sin_beta));
    let ns = unit_or_z(s.vector(), p);
    Ok((GroupElement::rotation_between(&ns, &n1), GroupElement::rotation_between(&ns, &n2)))
}

/// Zigzag synthesizer holding the step cache.
#[derive(Debug, Clone)]
pub struct Synthesizer<'a> {
    gates: &'a GateSet,
    net: &'a Net,
    params: SynthParams,
    steps: Steps<'a>,
    stats: SynthStats,
}

impl<'a> Synthesizer<'a> {
    pub fn new(gates: &'a GateSet, net: &'a Net, params: SynthParams, step_params: StepParams, precision: usize) -> Self {
        let step_params = StepParams { template: params.template, ..step_params };
        Synthesizer { gates, net, params, steps: Steps::new(gates, net, step_params, precision), stats: SynthStats::default() }
    }

    pub fn params(&self) -> &SynthParams {
        &self.params
    }

    pub fn steps(&mut self) -> &mut Steps<'a> {
        &mut self.steps
    }

    /// A word within `2^-n` of `g`, verified by evaluating the word afresh.
    /// On a failed check the whole run is repeated once at twice the
    /// precision.
    pub fn synthesize(&mut self, g: &GroupElement, n: usize) -> Result<SynthResult, SynthError> {
        let p = working_precision(n).max(self.steps.precision());
        match self.run(g, n, p) {
            Err(SynthError::PrecisionShortfall { .. }) => self.run(g, n, 2 * p),
            r => r,
        }
    }

    fn run(&mut self, g: &GroupElement, n: usize, p: usize) -> Result<SynthResult, SynthError> {
        self.steps.raise_precision(p);
        self.stats = SynthStats::default();
        let g = g.with_precision(p);
        let (word, _) = self.approx(&g, n, 0)?;
        let d = self.gates.evaluate(&word, p).projective_distance(&g);
        if *d.radians() >= Real::pow2(-(n as isize), p) {
            return Err(SynthError::PrecisionShortfall { n, achieved_bits: -d.log2() });
        }
        Ok(SynthResult { word, achieved_distance: d, target_n: n, precision: p, stats: self.stats })
    }

    fn approx(&mut self, g: &GroupElement, n: usize, depth: usize) -> Result<(Word, GroupElement), SynthError> {
        self.stats.depth = self.stats.depth.max(depth);
        if let Some(hit) = self.exact_entry(g, n) {
            return Ok(hit);
        }
        let m = self.params.spine_index(n);
        let mut k = precision_budget(n, &self.params);
        if self.params.is_base(n) {
            match self.base(g, n) {
                // A coarse net may miss a small-n target; zigzag from a
                // cruder spine instead, with conjugators one bit short.
                Err(_) if m < n && n > 2 => k = n - 1,
                r => return r,
            }
        }
        let (w_m, e_m) = self.approx(g, m, depth + 1)?;
        let t = e_m.inverse().mul(g).upper();

        let mut solved = None;
        for mm in [m, m - 1] {
            if mm == 0 {
                break;
            }
            if self.steps.cached().contains_key(&mm) {
                self.stats.step_cache_hits += 1;
            }
            let s = self.steps.step(mm)?.clone();
            match solve_two_conjugate(&t, &s.element) {
                Ok(conj) => {
                    solved = Some((s, conj));
                    break;
                }
                Err(e) if mm == m => {
                    self.stats.fallbacks += 1;
                    let _ = e;
                }
                Err(e) => return Err(e),
            }
        }
        let (s, (g_u, g_v)) = solved.ok_or(SynthError::TargetUnreachable { n, reason: "no step".into() })?;
        let (u, e_u) = self.approx(&g_u, k, depth + 1)?;
        let (v, e_v) = self.approx(&g_v, k, depth + 1)?;

        let word = w_m.concat(&s.word.conjugate(&u)).concat(&s.word.conjugate(&v));
        let element = e_m.mul(&s.element.conj(&e_u)).mul(&s.element.conj(&e_v));
        Ok((word, element))
    }

    /// Net entry already within `2^-n` of `g`, e.g. a gate or the identity.
    fn exact_entry(&self, g: &GroupElement, n: usize) -> Option<(Word, GroupElement)> {
        let (entry, d) = self.net.nearest(g);
        let eps = libm::ldexp(1.0, -(n as i32));
        if d > 0.5 * eps && d > 1e-12 {
            return None;
        }
        self.checked(entry.word.clone(), g, n)
    }

    fn checked(&self, word: Word, g: &GroupElement, n: usize) -> Option<(Word, GroupElement)> {
        let p = g.precision();
        let e = self.gates.evaluate(&word, p);
        (*e.projective_distance(g).radians() < Real::pow2(-(n as isize), p)).then_some((word, e))
    }

    fn base(&mut self, g: &GroupElement, n: usize) -> Result<(Word, GroupElement), SynthError> {
        self.stats.base_calls += 1;
        let eps = libm::ldexp(1.0, -(n as i32));
        let (entry, _) = self.net.nearest(g);
        if let Some(hit) = self.checked(entry.word.clone(), g, n) {
            return Ok(hit);
        }
        let (word, d) = self.net.approx_pair(&g.to_quat(), eps * (1.0 - 1e-6));
        self.checked(word, g, n).ok_or(SynthError::TargetUnreachable {
            n,
            reason: alloc::format!("best net pair is {d:.3e} away, needed {eps:.3e}"),
        })
    }
}

/// Smallest `c_k` such that moving both ideal conjugators by `2^-k` moves
/// the zigzag endpoint by less than `2^-(n+1)`, over `n` in `ns`. Targets
/// and perturbation directions come from a Halton sequence.
pub fn calibrate_ck(steps: &mut Steps<'_>, params: &SynthParams, ns: core::ops::RangeInclusive<usize>, trials: u64) -> Result<usize, SynthError> {
    let p = steps.precision();
    let mut need = 0usize;
    let mut probe = 1u64;
    let mut direction = || {
        probe += 1;
        let q = halton_point(probe);
        [Real::from_f64(q.0[1], p), Real::from_f64(q.0[2], p), Real::from_f64(q.0[3], p)]
    };
    for n in ns {
        let params = SynthParams { c_k: 0, ..*params };
        if params.is_base(n) {
            continue;
        }
        let m = params.spine_index(n);
        let k0 = precision_budget(n, &params);
        let s = steps.step(m)?.element.clone();
        let bound = Real::pow2(-(n as isize) - 1, p);
        for _ in 0..trials {
            let t = GroupElement::exp_axis(&direction(), &(Real::from_f64(0.9, p) * Real::pow2(-(m as isize), p)));
            let (g_u, g_v) = solve_two_conjugate(&t, &s)?;
            let end = |u: &GroupElement, v: &GroupElement| s.conj(u).mul(&s.conj(v));
            let ideal = end(&g_u, &g_v);
            let mut c = need;
            loop {
                let eps = Real::pow2(-((k0 + c) as isize), p);
                let du = GroupElement::exp_axis(&direction(), &eps);
                let dv = GroupElement::exp_axis(&direction(), &eps);
                if *end(&du.mul(&g_u), &dv.mul(&g_v)).projective_distance(&ideal).radians() < bound {
                    break;
                }
                c += 1;
            }
            need = c;
        }
    }
    Ok(need)
}

/// Largest `len(s_n) / n^alpha` over `1..=n_max`: the constant `C` in
/// `len(s_n) <= C n^alpha`.
pub fn step_constant(steps: &mut Steps<'_>, n_max: usize, alpha: f64) -> Result<f64, SynthError> {
    let mut c: f64 = 0.0;
    for n in 1..=n_max {
        let len = steps.step(n)?.word.len() as f64;
        c = c.max(len / libm::pow(n as f64, alpha));
    }
    Ok(c)
}

/// Balanced group-commutator factors `(V, W)` with `[V, W] = delta`:
/// rotations by `psi = asin(sqrt(sin(d / 2)))` about perpendicular axes,
/// rotated so the commutator axis matches that of `delta`.
pub fn group_factor(delta: &GroupElement) -> (GroupElement, GroupElement) {
    let p = delta.precision();
    let delta = delta.upper();
    let (z, one) = (Real::zero(p), Real::one(p));
    let d = delta.projective_distance_to_identity();
    let half = d.radians() / Real::from_i64(2, p);
    let psi = half.sin().sqrt().asin();
    let v0 = GroupElement::exp_axis(&[one.clone(), z.clone(), z.clone()], &psi);
    let w0 = GroupElement::exp_axis(&[z.clone(), one.clone(), z.clone()], &psi);
    let c = v0.commutator(&w0).upper();
    let from = unit_or_z(c.vector(), p);
    let to = unit_or_z(delta.vector(), p);
    let r = GroupElement::rotation_between(&from, &to);
    (v0.conj(&r), w0.conj(&r))
}

/// Result of the baseline: the word and the distance at each depth.
#[derive(Debug, Clone)]
pub struct DnResult {
    pub word: Word,
    pub achieved_distance: Angle,
    pub depth: usize,
    /// Distance to the target after each depth `0..=depth`.
    pub spine: Vec<f64>,
    /// Word length after each depth.
    pub spine_len: Vec<usize>,
}

/// Balanced-commutator recursion `U_k = [V~, W~] U_(k-1)` with
/// `[V, W] = g U_(k-1)^-1` and `V~`, `W~` approximated at depth `k - 1`.
/// Depth 0 is the nearest net entry. ConvergenceFailure if two or more
/// levels still do not improve on depth 0.
pub fn dn_synthesize(gates: &GateSet, net: &Net, g: &GroupElement, depth: usize) -> Result<DnResult, SynthError> {
    let mut spine = Vec::with_capacity(depth + 1);
    let (word, e) = dn(gates, net, g, depth, &mut Some(&mut spine));
    let (spine, spine_len): (Vec<f64>, Vec<usize>) = spine.into_iter().unzip();
    // The first level may wobble; after two the base accuracy must be beaten.
    if depth >= 2 && spine[depth] >= spine[0] {
        return Err(SynthError::ConvergenceFailure { depth, eps: spine[depth], prev: spine[0] });
    }
    Ok(DnResult { word, achieved_distance: e.projective_distance(g), depth, spine, spine_len })
}

fn dn(gates: &GateSet, net: &Net, g: &GroupElement, depth: usize, spine: &mut Option<&mut Vec<(f64, usize)>>) -> (Word, GroupElement) {
    let p = g.precision();
    let (word, e) = if depth == 0 {
        let word = net.nearest(g).0.word.clone();
        let e = gates.evaluate(&word, p);
        (word, e)
    } else {
        let (w, e) = dn(gates, net, g, depth - 1, spine);
        let (v, w_) = group_factor(&g.mul(&e.inverse()));
        let (wv, ev) = dn(gates, net, &v, depth - 1, &mut None);
        let (ww, ew) = dn(gates, net, &w_, depth - 1, &mut None);
        (Word::commutator(&wv, &ww).concat(&w), ev.commutator(&ew).mul(&e))
    };
    if let Some(s) = spine {
        s.push((e.projective_distance(g).to_f64(), word.len()));
    }
    (word, e)
}
