//! Roughly exponential steps: gate words `s_n` with
//! `2^-n < d(s_n, 1) < 2^(1-n)`.
//!
//! A step at index `n` is built from a shorter step `s_m` with `m` near
//! `n / c` as `omega(s_m, u s_m u^-1)`, where `omega` is a word template with
//! conjugate cancellation degree `c` and `u` is a short conjugator chosen so
//! that the result lands in the window. Steps at small `n` come straight
//! from the base net.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use thiserror::Error;

use crate::basenet::{GateSet, Net};
use crate::real::Real;
use crate::su2::{comm_distance, Angle, GroupElement, Quat};
use crate::words::{Template, Word};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StepError {
    #[error("no step at index {n}; widest gap between achievable conjugation angles is {theta_gap:.3} rad")]
    StepUnreachable { n: usize, theta_gap: f64 },
    #[error("no conjugator in the pool lands in the window")]
    NoConjugatorFound,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepParams {
    pub template: Template,
    /// Number of candidate `m` values below and including `floor(n / c)`.
    pub window: usize,
    /// Longest conjugator word in the pool.
    pub conj_len: usize,
}

impl Default for StepParams {
    fn default() -> Self {
        StepParams { template: Template::Commutator, window: 3, conj_len: DEFAULT_CONJ_LEN }
    }
}

/// Default conjugator length: the whole default net. Short Clifford+T words
/// move a generic axis by few distinct angles (none below ~0.29 rad up to
/// length 6), which leaves most step windows unreachable.
pub const DEFAULT_CONJ_LEN: usize = 18;

/// A cached step: its word and its value at the cache precision.
#[derive(Debug, Clone)]
pub struct Step {
    pub word: Word,
    pub element: GroupElement,
}

/// Conjugator candidate.
#[derive(Debug, Clone)]
pub struct PoolEntry {
    pub word: Word,
    pub element: GroupElement,
    pub quat: Quat,
}

/// Net entries of word length at most `conj_len`, in net order (by length,
/// then lexicographic). Always starts with the identity.
pub fn conjugator_pool(gates: &GateSet, net: &Net, conj_len: usize, precision: usize) -> Vec<PoolEntry> {
    net.entries()
        .iter()
        .filter(|e| e.word.len() <= conj_len)
        .map(|e| PoolEntry { word: e.word.clone(), element: gates.evaluate(&e.word, precision), quat: e.quat })
        .collect()
}

/// `2^-n < d < 2^(1-n)` in the projective metric.
pub fn in_window(d: &Angle, n: usize) -> bool {
    let p = d.radians().precision();
    let lo = Real::pow2(-(n as isize), p);
    let hi = Real::pow2(1 - n as isize, p);
    *d.radians() > lo && *d.radians() < hi
}

/// Below this window the `f64` prefilter in [`tune_angle`] is not trusted.
const PREFILTER_MIN_EXP: usize = 40;

fn evaluate_f64(template: &Word, g: &Quat, h: &Quat) -> Quat {
    let vals = [*g, *h, g.inverse(), h.inverse()];
    template.letters().iter().fold(Quat::IDENTITY, |acc, l| {
        acc.mul(&vals[l.generator as usize + 2 * l.inverse as usize])
    })
}

/// First pool entry `u` (in pool order) for which
/// `omega(s, u s u^-1)` lies in the window for index `n`.
///
/// Candidates are screened in `f64` and confirmed at the precision of `s`.
pub fn tune_angle(s: &GroupElement, template: &Word, pool: &[PoolEntry], n: usize) -> Result<(usize, Angle), StepError> {
    let p = s.precision();
    let sq = s.to_quat();
    let lo = libm::ldexp(1.0, -(n as i32));
    let screen = n <= PREFILTER_MIN_EXP;
    for (i, u) in pool.iter().enumerate() {
        if screen {
            let h = u.quat.mul(&sq).mul(&u.quat.inverse());
            let d = evaluate_f64(template, &sq, &h).projective_distance(&Quat::IDENTITY);
            if d < lo * (1.0 - 1e-6) || d > 2.0 * lo * (1.0 + 1e-6) {
                continue;
            }
        }
        let h = s.conj(&u.element);
        let d = template.evaluate(&[s.clone(), h], p).projective_distance_to_identity();
        if in_window(&d, n) {
            return Ok((i, d));
        }
    }
    Err(StepError::NoConjugatorFound)
}

/// Step generator with its memo table.
#[derive(Debug, Clone)]
pub struct Steps<'a> {
    gates: &'a GateSet,
    net: &'a Net,
    params: StepParams,
    template: Word,
    ccan: usize,
    precision: usize,
    pool: Vec<PoolEntry>,
    cache: BTreeMap<usize, Step>,
    last_failed: Option<Quat>,
}

impl<'a> Steps<'a> {
    pub fn new(gates: &'a GateSet, net: &'a Net, params: StepParams, precision: usize) -> Self {
        let pool = conjugator_pool(gates, net, params.conj_len, precision);
        Steps {
            gates,
            net,
            params,
            template: params.template.word(),
            ccan: params.template.stats().ccan_expected as usize,
            precision,
            pool,
            cache: BTreeMap::new(),
            last_failed: None,
        }
    }

    pub fn params(&self) -> StepParams {
        self.params
    }

    pub fn precision(&self) -> usize {
        self.precision
    }

    pub fn pool(&self) -> &[PoolEntry] {
        &self.pool
    }

    pub fn cached(&self) -> &BTreeMap<usize, Step> {
        &self.cache
    }

    /// Re-evaluates everything at a higher precision, keeping the words.
    pub fn raise_precision(&mut self, precision: usize) {
        if precision <= self.precision {
            return;
        }
        self.precision = precision;
        self.pool = conjugator_pool(self.gates, self.net, self.params.conj_len, precision);
        for step in self.cache.values_mut() {
            step.element = self.gates.evaluate(&step.word, precision);
        }
    }

    fn base_regime(&self, n: usize) -> bool {
        1.5 * libm::ldexp(1.0, -(n as i32)) >= 2.0 * self.net.covering()
    }

    /// Net word nearest to `exp(1.5 2^-n a)` for a fixed generic axis `a`,
    /// if it lands in the window. Generic axes keep the conjugation angles
    /// reachable from later steps varied.
    fn step_from_target(&self, n: usize) -> Option<Step> {
        let p = self.precision;
        let r = |x: f64| Real::from_f64(x, p);
        let axis = [r(1.0), Real::from_i64(2, p).sqrt(), Real::from_i64(3, p).sqrt()];
        let target = GroupElement::exp_axis(&axis, &(r(1.5) * Real::pow2(-(n as isize), p)));
        let (entry, _) = self.net.nearest(&target);
        let word = entry.word.clone();
        let element = self.gates.evaluate(&word, p).upper();
        in_window(&element.projective_distance_to_identity(), n).then_some(Step { word, element })
    }

    /// Net word in the window: shortest first, then closest to `1.5 2^-n`.
    fn step_from_net(&self, n: usize) -> Option<Step> {
        let lo = libm::ldexp(1.0, -(n as i32));
        let aim = 1.5 * lo;
        let mut best: Option<(usize, f64, usize)> = None;
        for (i, e) in self.net.entries().iter().enumerate() {
            if let Some((len, _, _)) = best {
                if e.word.len() > len {
                    break;
                }
            }
            let d = e.quat.projective_distance(&crate::su2::Quat::IDENTITY);
            // Leave slack so that re-evaluation at full precision stays inside.
            if d > lo * (1.0 + 1e-9) && d < 2.0 * lo * (1.0 - 1e-9) {
                let key = (e.word.len(), libm::fabs(d - aim), i);
                if best.is_none_or(|b| (key.0, key.1) < (b.0, b.1)) {
                    best = Some(key);
                }
            }
        }
        let (_, _, i) = best?;
        let word = self.net.entries()[i].word.clone();
        let element = self.gates.evaluate(&word, self.precision).upper();
        in_window(&element.projective_distance_to_identity(), n).then_some(Step { word, element })
    }

    /// Candidate `m` values, smallest first: `floor(n / c) + 1` down to
    /// `floor(n / c) - window + 1`. The value above `floor(n / c)` needs only
    /// moderate conjugation angles; the precheck drops it when out of reach.
    fn candidates(&self, n: usize) -> Vec<usize> {
        let top = n / self.ccan + 1;
        let mut ms: Vec<usize> = (0..=self.params.window)
            .filter_map(|j| top.checked_sub(j))
            .filter(|&m| m < n)
            .collect();
        ms.sort_unstable();
        ms.dedup();
        ms
    }

    /// Commutator precheck: the largest reachable distance at this `psi`.
    fn reaches(&self, s: &GroupElement, n: usize) -> bool {
        if self.params.template != Template::Commutator {
            return true;
        }
        let p = self.precision;
        let psi = s.projective_distance_to_identity();
        let half_pi = Angle::new(Real::pi(p) / Real::from_i64(2, p));
        *comm_distance(&psi, &half_pi).radians() >= Real::pow2(2 - n as isize, p)
    }

    fn try_recursive(&mut self, n: usize) -> Option<Step> {
        for m in self.candidates(n) {
            let Ok(s_m) = self.step(m).cloned() else { continue };
            if !self.reaches(&s_m.element, n) {
                continue;
            }
            match tune_angle(&s_m.element, &self.template, &self.pool, n) {
                Ok((i, _)) => {
                    let u = &self.pool[i].word;
                    let word = self.template.substitute(&[&s_m.word, &s_m.word.conjugate(u)]);
                    let element = self.gates.evaluate(&word, self.precision).upper();
                    if in_window(&element.projective_distance_to_identity(), n) {
                        return Some(Step { word, element });
                    }
                }
                Err(_) => self.last_failed = Some(s_m.element.to_quat()),
            }
        }
        None
    }

    /// Widest gap between conjugation angles the pool achieves on `s`.
    fn theta_gap(&self, s: &Quat) -> f64 {
        let axis = |q: &Quat| [q.0[1], q.0[2], q.0[3]];
        let v = axis(s);
        let mut thetas: Vec<f64> = self
            .pool
            .iter()
            .map(|u| {
                let w = axis(&u.quat.mul(s).mul(&u.quat.inverse()));
                let dot = v[0] * w[0] + v[1] * w[1] + v[2] * w[2];
                let c = [v[1] * w[2] - v[2] * w[1], v[2] * w[0] - v[0] * w[2], v[0] * w[1] - v[1] * w[0]];
                libm::atan2(libm::sqrt(c[0] * c[0] + c[1] * c[1] + c[2] * c[2]), dot)
            })
            .collect();
        thetas.push(0.0);
        thetas.push(core::f64::consts::PI);
        thetas.sort_by(f64::total_cmp);
        thetas.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }

    /// `s_n`, computed on first use and memoized.
    pub fn step(&mut self, n: usize) -> Result<&Step, StepError> {
        if !self.cache.contains_key(&n) {
            let step = if self.base_regime(n) {
                self.step_from_target(n).or_else(|| self.step_from_net(n))
            } else {
                self.step_from_target(n).or_else(|| self.try_recursive(n)).or_else(|| self.step_from_net(n))
            };
            let Some(step) = step else {
                let theta_gap = self.last_failed.map_or(core::f64::consts::PI, |q| self.theta_gap(&q));
                return Err(StepError::StepUnreachable { n, theta_gap });
            };
            self.cache.insert(n, step);
        }
        Ok(&self.cache[&n])
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::basenet::{GateSpec, NetParams};
    use alloc::string::ToString;
    use alloc::vec;

    pub(crate) fn clifford_t() -> GateSet {
        let r = core::f64::consts::FRAC_1_SQRT_2;
        let (c, s) = (libm::cos(core::f64::consts::PI / 8.0), libm::sin(core::f64::consts::PI / 8.0));
        let spec = |name: &str, matrix, inv: Option<&str>| GateSpec {
            name: name.to_string(),
            matrix,
            inverse_of: inv.map(|s| s.to_string()),
        };
        GateSet::new(vec![
            spec("H", [[(r, 0.0), (r, 0.0)], [(r, 0.0), (-r, 0.0)]], None),
            spec("T", [[(c, s), (0.0, 0.0)], [(0.0, 0.0), (c, -s)]], None),
            spec("Tdg", [[(c, -s), (0.0, 0.0)], [(0.0, 0.0), (c, s)]], Some("T")),
        ])
        .unwrap()
    }

    #[test]
    fn pool_is_ordered_prefix_of_net() {
        let gs = clifford_t();
        let net = Net::build(&gs, NetParams { max_len: 10, delta_d: 1e-4 });
        let pool0 = conjugator_pool(&gs, &net, 0, 128);
        assert_eq!(pool0.len(), 1);
        assert!(pool0[0].word.is_empty());
        let pool = conjugator_pool(&gs, &net, 6, 128);
        for (p, e) in pool.iter().zip(net.entries()) {
            assert_eq!(p.word, e.word);
        }
    }

    #[test]
    fn tune_angle_rejects_commuting_conjugator() {
        let p = 128;
        let s = GroupElement::from_f64([libm::cos(0.01), 0.0, 0.0, libm::sin(0.01)], p);
        let id = PoolEntry { word: Word::empty(), element: GroupElement::identity(p), quat: Quat::IDENTITY };
        let comm = Template::Commutator.word();
        assert_eq!(tune_angle(&s, &comm, &[id], 10), Err(StepError::NoConjugatorFound));
    }

    #[test]
    fn tune_angle_matches_closed_form() {
        let p = 128;
        let s = GroupElement::from_f64([libm::cos(0.05), 0.0, 0.0, libm::sin(0.05)], p);
        let rot = |t: f64| {
            let element = GroupElement::from_f64([libm::cos(t / 2.0), libm::sin(t / 2.0), 0.0, 0.0], p);
            PoolEntry { word: Word::empty(), quat: element.to_quat(), element }
        };
        let pool = vec![rot(0.0), rot(0.3), rot(1.2)];
        let comm = Template::Commutator.word();
        // 2 psi^2 sin(1.2) is about 4.66e-3, inside (2^-8, 2^-7).
        let (i, d) = tune_angle(&s, &comm, &pool, 8).unwrap();
        assert_eq!(i, 2);
        let psi = s.distance_to_identity();
        let theta = s.angle_between(&s.conj(&pool[2].element)).unwrap();
        let closed = comm_distance(&psi, &theta);
        assert!((d.radians() - closed.radians()).abs() < Real::pow2(24 - p as isize, p));
    }

    #[test]
    fn steps_satisfy_window() {
        let gs = clifford_t();
        let net = Net::build(&gs, NetParams { max_len: 18, delta_d: 1e-4 });
        let mut steps = Steps::new(&gs, &net, StepParams::default(), 160);
        for n in 1..=20 {
            let s = steps.step(n).unwrap().clone();
            assert!(in_window(&s.element.projective_distance_to_identity(), n), "n={n}");
            let re = gs.evaluate(&s.word, 160);
            assert!(re.projective_distance(&s.element).to_f64() < 1e-30);
        }
        // Deterministic.
        let mut again = Steps::new(&gs, &net, StepParams::default(), 160);
        assert_eq!(again.step(20).unwrap().word, steps.step(20).unwrap().word);
    }

    #[test]
    fn step_one_is_a_net_word() {
        let gs = clifford_t();
        let net = Net::build(&gs, NetParams { max_len: 12, delta_d: 1e-4 });
        let mut steps = Steps::new(&gs, &net, StepParams::default(), 128);
        let s = steps.step(1).unwrap();
        let d = s.element.projective_distance_to_identity().to_f64();
        assert!(d > 0.5 && d < 1.0);
        assert!(net.entries().iter().any(|e| e.word == s.word));
    }

    #[test]
    fn candidates_are_near_n_over_c() {
        let gs = clifford_t();
        let net = Net::build(&gs, NetParams { max_len: 6, delta_d: 1e-4 });
        let steps = Steps::new(&gs, &net, StepParams::default(), 128);
        assert_eq!(steps.candidates(20), vec![8, 9, 10, 11]);
        assert_eq!(steps.candidates(2), vec![0, 1]);
        let elk = Steps::new(&gs, &net, StepParams { template: Template::Elkasapy(5), ..StepParams::default() }, 128);
        assert_eq!(elk.candidates(27), vec![3, 4, 5, 6]);
    }

    #[test]
    fn commutator_precheck_matches_formula() {
        let gs = clifford_t();
        let net = Net::build(&gs, NetParams { max_len: 6, delta_d: 1e-4 });
        let steps = Steps::new(&gs, &net, StepParams::default(), 128);
        // 2 asin(sin^2 psi) >= 2^(2-n) at psi = 0.1: 0.0199 passes n = 8, fails n = 7.
        let s = GroupElement::from_f64([libm::cos(0.1), libm::sin(0.1), 0.0, 0.0], 128);
        assert!(steps.reaches(&s, 8));
        assert!(!steps.reaches(&s, 7));
    }

    #[test]
    fn comm_distance_increases_with_sin_theta() {
        let p = 128;
        let psi = Angle::from_f64(0.2, p);
        let ds: Vec<f64> = (0..=16)
            .map(|i| comm_distance(&psi, &Angle::from_f64(i as f64 * core::f64::consts::FRAC_PI_2 / 16.0, p)).to_f64())
            .collect();
        assert!(ds.windows(2).all(|w| w[1] > w[0]));
    }
}
