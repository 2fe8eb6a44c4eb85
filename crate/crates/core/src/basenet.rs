//! Gate sets and the base net: every short gate word up to a length bound,
//! deduplicated and indexed for nearest-neighbour queries in PSU(2).
//!
//! Net elements are `f64` quaternions; only O(1) accuracy is needed here and
//! callers re-evaluate chosen words at working precision.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use hashbrown::HashMap;
use thiserror::Error;

use crate::su2::{angle_chord_f64, chord_angle_f64, GroupElement, Quat};
use crate::words::{Letter, Word};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NetError {
    #[error("gate set has no non-identity gates")]
    EmptyGateSet,
    #[error("gate set is not inverse-closed: {0}")]
    NonSymmetricGateSet(String),
    #[error("net too coarse: requested {eps0} but covering radius is {covering}")]
    NetTooCoarse { eps0: f64, covering: f64 },
    #[error("unknown gate {0:?}")]
    UnknownGate(String),
}

/// 2x2 complex matrix as `(re, im)` pairs.
pub type Matrix = [[(f64, f64); 2]; 2];

/// A gate as given: a name, a unitary and optionally the name of its inverse.
#[derive(Debug, Clone, PartialEq)]
pub struct GateSpec {
    pub name: String,
    pub matrix: Matrix,
    pub inverse_of: Option<String>,
}

/// One letter of the gate alphabet: a gate and the gate implementing its
/// inverse (`None` when the gate is its own inverse up to sign).
#[derive(Debug, Clone, PartialEq)]
struct Generator {
    forward: usize,
    inverse: Option<usize>,
}

const PAIR_TOLERANCE: f64 = 1e-9;

/// A finite inverse-closed gate set containing the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct GateSet {
    gates: Vec<GateSpec>,
    generators: Vec<Generator>,
    quats: Vec<Quat>,
}

impl GateSet {
    /// Normalizes every gate into SU(2), pairs inverses, and drops the
    /// identity from the alphabet (adding it to the gate list if missing).
    pub fn new(mut gates: Vec<GateSpec>) -> Result<GateSet, NetError> {
        if gates.is_empty() {
            return Err(NetError::EmptyGateSet);
        }
        let quat = |m: &Matrix| GroupElement::from_unitary(m, 128).to_quat();
        let qs: Vec<Quat> = gates.iter().map(|g| quat(&g.matrix)).collect();
        let is_identity = |q: &Quat| q.projective_chord(&Quat::IDENTITY) < PAIR_TOLERANCE;
        let index = |name: &str| gates.iter().position(|g| g.name == name);

        let mut assigned = alloc::vec![false; gates.len()];
        let mut generators = Vec::new();
        for i in 0..gates.len() {
            if assigned[i] || is_identity(&qs[i]) {
                assigned[i] = true;
                continue;
            }
            assigned[i] = true;
            let inv = qs[i].inverse();
            // An explicit pairing from either side wins; otherwise search.
            let explicit = gates[i]
                .inverse_of
                .as_deref()
                .and_then(&index)
                .or_else(|| (0..gates.len()).find(|&j| gates[j].inverse_of.as_deref() == Some(&gates[i].name)));
            if let Some(name) = &gates[i].inverse_of {
                if index(name).is_none() {
                    return Err(NetError::UnknownGate(name.clone()));
                }
            }
            let partner = match explicit {
                Some(j) => {
                    if qs[j].projective_chord(&inv) > PAIR_TOLERANCE {
                        return Err(NetError::NonSymmetricGateSet(alloc::format!(
                            "{} is declared inverse of {} but is not",
                            gates[j].name,
                            gates[i].name
                        )));
                    }
                    Some(j)
                }
                None => (0..gates.len()).find(|&j| !assigned[j] && qs[j].projective_chord(&inv) < PAIR_TOLERANCE),
            };
            let self_inverse = qs[i].projective_chord(&inv) < PAIR_TOLERANCE;
            let inverse = match partner {
                Some(j) if j != i => {
                    assigned[j] = true;
                    Some(j)
                }
                _ if self_inverse => None,
                _ => {
                    return Err(NetError::NonSymmetricGateSet(alloc::format!(
                        "no inverse for {}",
                        gates[i].name
                    )))
                }
            };
            generators.push(Generator { forward: i, inverse });
        }
        if !qs.iter().any(is_identity) {
            gates.push(GateSpec {
                name: "I".to_string(),
                matrix: [[(1.0, 0.0), (0.0, 0.0)], [(0.0, 0.0), (1.0, 0.0)]],
                inverse_of: None,
            });
        }
        let quats = generators.iter().map(|g| quat(&gates[g.forward].matrix)).collect();
        Ok(GateSet { gates, generators, quats })
    }

    pub fn gates(&self) -> &[GateSpec] {
        &self.gates
    }

    /// Number of generators; the alphabet has twice as many letters.
    pub fn generator_count(&self) -> usize {
        self.generators.len()
    }

    /// All letters in code order.
    pub fn letters(&self) -> Vec<Letter> {
        (0..self.generators.len() as u16)
            .flat_map(|g| [Letter::new(g), Letter::inv(g)])
            .collect()
    }

    pub fn letter_quat(&self, l: Letter) -> Quat {
        let q = self.quats[l.generator as usize];
        if l.inverse {
            q.inverse()
        } else {
            q
        }
    }

    /// Generator elements at precision `p`, for [`Word::evaluate`].
    pub fn elements(&self, precision: usize) -> Vec<GroupElement> {
        self.generators
            .iter()
            .map(|g| GroupElement::from_unitary(&self.gates[g.forward].matrix, precision))
            .collect()
    }

    pub fn evaluate(&self, w: &Word, precision: usize) -> GroupElement {
        w.evaluate(&self.elements(precision), precision)
    }

    pub fn evaluate_f64(&self, w: &Word) -> Quat {
        w.letters().iter().fold(Quat::IDENTITY, |acc, &l| acc.mul(&self.letter_quat(l)))
    }

    /// Display name of a letter: the gate, its paired inverse gate, or
    /// `name'` for a self-inverse gate used inverted.
    pub fn letter_name(&self, l: Letter) -> String {
        let g = &self.generators[l.generator as usize];
        match (l.inverse, g.inverse) {
            (false, _) => self.gates[g.forward].name.clone(),
            (true, Some(j)) => self.gates[j].name.clone(),
            (true, None) => alloc::format!("{}'", self.gates[g.forward].name),
        }
    }

    pub fn word_to_text(&self, w: &Word) -> String {
        let names: Vec<String> = w.letters().iter().map(|&l| self.letter_name(l)).collect();
        names.join(" ")
    }

    /// Parses gate names separated by whitespace; identity gates are skipped.
    pub fn parse_word(&self, text: &str) -> Result<Word, NetError> {
        let mut w = Word::empty();
        for tok in text.split_whitespace() {
            let (base, flip) = match tok.strip_suffix('\'') {
                Some(b) => (b, true),
                None => (tok, false),
            };
            let gate = self.gates.iter().position(|g| g.name == base).ok_or_else(|| NetError::UnknownGate(tok.to_string()))?;
            let letter = self.generators.iter().enumerate().find_map(|(i, g)| {
                if g.forward == gate {
                    Some(Letter::new(i as u16))
                } else if g.inverse == Some(gate) {
                    Some(Letter::inv(i as u16))
                } else {
                    None
                }
            });
            match letter {
                Some(l) => w.push(if flip { l.inverted() } else { l }),
                None => continue,
            }
        }
        Ok(w)
    }
}

/// A net entry: a reduced word and its value.
#[derive(Debug, Clone, PartialEq)]
pub struct NetEntry {
    pub word: Word,
    pub quat: Quat,
}

/// Build parameters recorded alongside a net.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetParams {
    pub max_len: usize,
    pub delta_d: f64,
}

impl Default for NetParams {
    fn default() -> Self {
        NetParams { max_len: 16, delta_d: 1e-4 }
    }
}

/// Sparse 4D bucket grid over quaternions with `a >= 0`.
#[derive(Debug, Clone)]
struct Grid {
    width: f64,
    cells: HashMap<[i32; 4], Vec<u32>>,
}

impl Grid {
    fn new(width: f64) -> Self {
        Grid { width, cells: HashMap::new() }
    }

    fn key(&self, q: &Quat) -> [i32; 4] {
        q.0.map(|x| libm::floor(x / self.width) as i32)
    }

    fn insert(&mut self, q: &Quat, id: u32) {
        let k = self.key(q);
        self.cells.entry(k).or_default().push(id);
    }

    fn cell(&self, k: &[i32; 4]) -> &[u32] {
        self.cells.get(k).map_or(&[], Vec::as_slice)
    }
}

/// Base net over a gate set.
#[derive(Debug, Clone)]
pub struct Net {
    entries: Vec<NetEntry>,
    params: NetParams,
    covering: f64,
    grid: Grid,
}

/// Minimum number of probes for the covering estimate.
pub const COVERING_PROBES: usize = 10_000;

impl Net {
    /// Breadth-first enumeration of reduced words up to `max_len`, keeping a
    /// word only if no earlier entry lies within `delta_d`. Children of a
    /// discarded word are not explored.
    pub fn build(gates: &GateSet, params: NetParams) -> Net {
        let letters = gates.letters();
        let letter_quats: Vec<Quat> = letters.iter().map(|&l| gates.letter_quat(l)).collect();
        let radius = angle_chord_f64(params.delta_d);
        let mut dedupe = Grid::new(2.0 * radius);
        let mut entries = alloc::vec![NetEntry { word: Word::empty(), quat: Quat::IDENTITY }];
        dedupe.insert(&Quat::IDENTITY, 0);
        let mut frontier: Vec<u32> = alloc::vec![0];
        for _ in 0..params.max_len {
            let mut next = Vec::new();
            for &parent in &frontier {
                for (li, &l) in letters.iter().enumerate() {
                    let pw = &entries[parent as usize].word;
                    if pw.letters().last().is_some_and(|&last| last.cancels(l)) {
                        continue;
                    }
                    let q = entries[parent as usize].quat.mul(&letter_quats[li]).upper();
                    if within(&dedupe, &entries, &q, radius) {
                        continue;
                    }
                    let mut word = pw.clone();
                    word.push(l);
                    let id = entries.len() as u32;
                    dedupe.insert(&q, id);
                    entries.push(NetEntry { word, quat: q });
                    next.push(id);
                }
            }
            if next.is_empty() {
                break;
            }
            frontier = next;
        }
        Self::from_entries(entries, params)
    }

    /// Wraps entries that are already deduplicated and ordered, rebuilding
    /// the index and the covering estimate.
    pub fn from_entries(entries: Vec<NetEntry>, params: NetParams) -> Net {
        let width = query_width(entries.len());
        let mut grid = Grid::new(width);
        for (i, e) in entries.iter().enumerate() {
            grid.insert(&e.quat.upper(), i as u32);
        }
        let mut net = Net { entries, params, covering: 0.0, grid };
        net.covering = net.covering_estimate(COVERING_PROBES);
        net
    }

    pub fn entries(&self) -> &[NetEntry] {
        &self.entries
    }

    pub fn params(&self) -> NetParams {
        self.params
    }

    /// Maximum over quasi-random probes of the distance to the nearest entry.
    pub fn covering(&self) -> f64 {
        self.covering
    }

    pub fn covering_estimate(&self, probes: usize) -> f64 {
        (1..=probes)
            .map(|i| self.nearest_quat(&halton_point(i as u64)).1)
            .fold(0.0, f64::max)
    }

    /// Entry index and projective distance of the entry nearest to `t`.
    pub fn nearest_quat(&self, t: &Quat) -> (usize, f64) {
        let t = t.upper();
        let (mut best, mut best_chord) = self.ring_search(&t, usize::MAX, f64::INFINITY);
        // Entries sit in a >= 0, so -t is at least t.a away from all of them.
        if best_chord > t.0[0] {
            let (b, c) = self.ring_search(&t.neg(), best, best_chord);
            if c < best_chord || (c == best_chord && b < best) {
                best = b;
                best_chord = c;
            }
        }
        (best, chord_angle_f64(best_chord))
    }

    /// Exact nearest by Euclidean chord, visiting Chebyshev rings of cells
    /// around the query until no unvisited cell can hold anything closer.
    fn ring_search(&self, t: &Quat, mut best: usize, mut best_chord: f64) -> (usize, f64) {
        let w = self.grid.width;
        let center = self.grid.key(t);
        let max_ring = (2.0 / w) as i32 + 2;
        for r in 0..=max_ring {
            for_each_ring_cell(center, r, |k| {
                for &id in self.grid.cell(&k) {
                    let c = self.entries[id as usize].quat.chord(t);
                    if c < best_chord || (c == best_chord && (id as usize) < best) {
                        best_chord = c;
                        best = id as usize;
                    }
                }
            });
            if best_chord <= r as f64 * w {
                break;
            }
        }
        (best, best_chord)
    }

    pub fn nearest(&self, target: &GroupElement) -> (&NetEntry, f64) {
        let (i, d) = self.nearest_quat(&target.to_quat());
        (&self.entries[i], d)
    }

    /// A word within `eps0` of `target`.
    pub fn base_approx(&self, target: &GroupElement, eps0: f64) -> Result<Word, NetError> {
        if eps0 < self.covering {
            return Err(NetError::NetTooCoarse { eps0, covering: self.covering });
        }
        let (e, d) = self.nearest(target);
        if d < eps0 {
            Ok(e.word.clone())
        } else {
            Err(NetError::NetTooCoarse { eps0, covering: d })
        }
    }

    /// Best product `a b` of two net entries approximating `t`: for every
    /// entry `a`, the entry nearest to `a^-1 t`. Returns the first pair in
    /// entry order within `eps`, otherwise the best pair found.
    pub fn approx_pair(&self, t: &Quat, eps: f64) -> (Word, f64) {
        let mut best: Option<(usize, usize, f64)> = None;
        for (i, a) in self.entries.iter().enumerate() {
            let rest = a.quat.inverse().mul(t);
            let (j, _) = self.nearest_quat(&rest);
            let d = a.quat.mul(&self.entries[j].quat).projective_distance(t);
            if best.is_none_or(|(_, _, bd)| d < bd) {
                best = Some((i, j, d));
            }
            if d < eps {
                break;
            }
        }
        let (i, j, d) = best.expect("net has the identity entry");
        (self.entries[i].word.concat(&self.entries[j].word), d)
    }
}

fn within(grid: &Grid, entries: &[NetEntry], q: &Quat, radius: f64) -> bool {
    let check = |q: &Quat| {
        // With cells of width 2 r, a ball of radius r meets at most two
        // cells per axis: the own cell and the nearer neighbour.
        let k = grid.key(q);
        let side: [i32; 4] = core::array::from_fn(|i| {
            let frac = q.0[i] / grid.width - k[i] as f64;
            if frac < 0.5 {
                -1
            } else {
                1
            }
        });
        (0..16u32).any(|mask| {
            let cell: [i32; 4] = core::array::from_fn(|i| k[i] + if mask >> i & 1 == 1 { side[i] } else { 0 });
            grid.cell(&cell).iter().any(|&id| entries[id as usize].quat.chord(q) <= radius)
        })
    };
    check(q) || (q.0[0] < radius && check(&q.neg()))
}

/// Grid width for queries: about the typical spacing between entries.
/// PSU(2) has volume pi^2 as half of S^3.
fn query_width(n: usize) -> f64 {
    let spacing = libm::cbrt(core::f64::consts::PI * core::f64::consts::PI / n.max(1) as f64);
    spacing.clamp(1e-3, 0.5)
}

fn for_each_ring_cell(center: [i32; 4], r: i32, mut f: impl FnMut([i32; 4])) {
    if r == 0 {
        f(center);
        return;
    }
    for d0 in -r..=r {
        for d1 in -r..=r {
            for d2 in -r..=r {
                let inner = d0.abs().max(d1.abs()).max(d2.abs()) == r;
                if inner {
                    for d3 in -r..=r {
                        f([center[0] + d0, center[1] + d1, center[2] + d2, center[3] + d3]);
                    }
                } else {
                    f([center[0] + d0, center[1] + d1, center[2] + d2, center[3] - r]);
                    f([center[0] + d0, center[1] + d1, center[2] + d2, center[3] + r]);
                }
            }
        }
    }
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut inv = 1.0 / base as f64;
    let mut x = 0.0;
    while i > 0 {
        x += (i % base) as f64 * inv;
        i /= base;
        inv /= base as f64;
    }
    x
}

/// Point `i` of a Halton sequence (bases 2, 3, 5) mapped uniformly to S^3.
pub fn halton_point(i: u64) -> Quat {
    let u1 = radical_inverse(i, 2);
    let u2 = radical_inverse(i, 3);
    let u3 = radical_inverse(i, 5);
    let tau = 2.0 * core::f64::consts::PI;
    let (r1, r2) = (libm::sqrt(1.0 - u1), libm::sqrt(u1));
    Quat([
        r1 * libm::sin(tau * u2),
        r1 * libm::cos(tau * u2),
        r2 * libm::sin(tau * u3),
        r2 * libm::cos(tau * u3),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    const R: f64 = core::f64::consts::FRAC_1_SQRT_2;

    fn spec(name: &str, matrix: Matrix, inverse_of: Option<&str>) -> GateSpec {
        GateSpec { name: name.to_string(), matrix, inverse_of: inverse_of.map(str::to_string) }
    }

    fn clifford_t() -> GateSet {
        let (c, s) = (libm::cos(core::f64::consts::PI / 8.0), libm::sin(core::f64::consts::PI / 8.0));
        GateSet::new(vec![
            spec("I", [[(1.0, 0.0), (0.0, 0.0)], [(0.0, 0.0), (1.0, 0.0)]], None),
            spec("H", [[(R, 0.0), (R, 0.0)], [(R, 0.0), (-R, 0.0)]], None),
            spec("T", [[(c, s), (0.0, 0.0)], [(0.0, 0.0), (c, -s)]], None),
            spec("Tdg", [[(c, -s), (0.0, 0.0)], [(0.0, 0.0), (c, s)]], Some("T")),
        ])
        .unwrap()
    }

    #[test]
    fn gate_pairing_and_names() {
        let gs = clifford_t();
        assert_eq!(gs.generator_count(), 2);
        let w = gs.parse_word("H T Tdg H' T I").unwrap();
        assert_eq!(gs.word_to_text(&w), "T");
        let w = gs.parse_word("H T Tdg H T").unwrap();
        assert_eq!(gs.word_to_text(&w), "H H T");
        assert_eq!(gs.parse_word(&gs.word_to_text(&w.invert())).unwrap(), w.invert());
        let w = gs.parse_word("Tdg H").unwrap();
        assert_eq!(gs.word_to_text(&w), "Tdg H");
        assert!(matches!(gs.parse_word("Q"), Err(NetError::UnknownGate(_))));
    }

    #[test]
    fn non_symmetric_and_empty_sets() {
        let s = libm::sin(core::f64::consts::PI / 8.0);
        let c = libm::cos(core::f64::consts::PI / 8.0);
        let only_t = vec![spec("T", [[(c, s), (0.0, 0.0)], [(0.0, 0.0), (c, -s)]], None)];
        assert!(matches!(GateSet::new(only_t), Err(NetError::NonSymmetricGateSet(_))));
        assert_eq!(GateSet::new(vec![]), Err(NetError::EmptyGateSet));
        let id = vec![spec("I", [[(1.0, 0.0), (0.0, 0.0)], [(0.0, 0.0), (1.0, 0.0)]], None)];
        let gs = GateSet::new(id).unwrap();
        assert_eq!(gs.generator_count(), 0);
        let net = Net::build(&gs, NetParams { max_len: 5, delta_d: 1e-4 });
        assert_eq!(net.entries().len(), 1);
    }

    #[test]
    fn small_net_invariants() {
        let gs = clifford_t();
        let net = Net::build(&gs, NetParams { max_len: 8, delta_d: 1e-4 });
        let n = net.entries().len();
        // Reduced words over 4 letters: 1 + 4 (3^8 - 1) / 2.
        assert!(n <= 1 + 4 * (3usize.pow(8) - 1) / 2);
        assert!(net.entries()[0].word.is_empty());
        for e in net.entries() {
            assert!(gs.evaluate_f64(&e.word).projective_chord(&e.quat) < 1e-12);
        }
        for (i, a) in net.entries().iter().enumerate() {
            for b in &net.entries()[i + 1..] {
                assert!(a.quat.projective_distance(&b.quat) > 1e-4);
                assert!(a.word.len() <= b.word.len());
            }
        }
    }

    #[test]
    fn nearest_matches_linear_scan() {
        let gs = clifford_t();
        let net = Net::build(&gs, NetParams { max_len: 9, delta_d: 1e-4 });
        for i in 1..=300u64 {
            let t = halton_point(i * 7 + 3);
            let (got, d) = net.nearest_quat(&t);
            let scan = net
                .entries()
                .iter()
                .map(|e| e.quat.projective_distance(&t))
                .fold(f64::INFINITY, f64::min);
            assert!((d - scan).abs() < 1e-12, "{d} vs {scan}");
            assert!((net.entries()[got].quat.projective_distance(&t) - scan).abs() < 1e-12);
        }
        let (i, d) = net.nearest_quat(&Quat::IDENTITY);
        assert_eq!((i, d), (0, 0.0));
    }

    #[test]
    fn identity_only_net() {
        let gs = clifford_t();
        let net = Net::build(&gs, NetParams { max_len: 0, delta_d: 1e-4 });
        assert_eq!(net.entries().len(), 1);
        assert!((net.covering() - core::f64::consts::FRAC_PI_2).abs() < 0.05);
    }

    #[test]
    fn covering_shrinks_with_length() {
        let gs = clifford_t();
        let mut last = f64::INFINITY;
        for len in [4, 6, 8] {
            let c = Net::build(&gs, NetParams { max_len: len, delta_d: 1e-4 }).covering();
            assert!(c <= last);
            last = c;
        }
    }

    #[test]
    fn base_approx_and_pairs() {
        let gs = clifford_t();
        let net = Net::build(&gs, NetParams { max_len: 8, delta_d: 1e-4 });
        let t = gs.elements(128)[1].clone();
        assert_eq!(gs.word_to_text(&net.base_approx(&t, 0.5 + net.covering()).unwrap()), "T");
        assert!(matches!(net.base_approx(&t, 1e-3), Err(NetError::NetTooCoarse { .. })));
        let target = halton_point(1234);
        let (w, d) = net.approx_pair(&target, 0.0);
        assert!(d <= net.nearest_quat(&target).1);
        assert!((gs.evaluate_f64(&w).projective_distance(&target) - d).abs() < 1e-9);
    }

    #[test]
    fn halton_points_are_unit() {
        for i in 1..100 {
            let q = halton_point(i);
            let n: f64 = q.0.iter().map(|x| x * x).sum();
            assert!((n - 1.0).abs() < 1e-12);
        }
    }
}
