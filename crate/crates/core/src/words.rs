//! Freely reduced words over a finite alphabet of generators.
//!
//! The same type serves the abstract alphabet `{g, h}` of word templates and
//! the alphabet of a gate set. Words are kept reduced at all times: every
//! append goes through a stack push that cancels against the last letter.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::su2::GroupElement;

/// A generator or its inverse.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub generator: u16,
    pub inverse: bool,
}

impl Letter {
    pub const fn new(generator: u16) -> Self {
        Letter { generator, inverse: false }
    }

    pub const fn inv(generator: u16) -> Self {
        Letter { generator, inverse: true }
    }

    pub const fn inverted(self) -> Self {
        Letter { generator: self.generator, inverse: !self.inverse }
    }

    pub const fn cancels(self, other: Letter) -> bool {
        self.generator == other.generator && self.inverse != other.inverse
    }

    /// Packed form `2 * generator + inverse`, also the lexicographic key.
    pub const fn code(self) -> u16 {
        2 * self.generator + self.inverse as u16
    }

    pub const fn from_code(code: u16) -> Self {
        Letter { generator: code / 2, inverse: code % 2 == 1 }
    }
}

impl fmt::Debug for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.generator, if self.inverse { "'" } else { "" })
    }
}

/// Generators of the abstract two-letter alphabet.
pub const G: Letter = Letter::new(0);
pub const H: Letter = Letter::new(1);

/// A freely reduced word.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Word {
    letters: Vec<Letter>,
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.letters).finish()
    }
}

impl Word {
    pub fn empty() -> Self {
        Word { letters: Vec::new() }
    }

    pub fn letter(l: Letter) -> Self {
        Word { letters: alloc::vec![l] }
    }

    /// Free reduction of an arbitrary letter sequence.
    pub fn reduce<I: IntoIterator<Item = Letter>>(letters: I) -> Self {
        let mut w = Word::empty();
        w.extend(letters);
        w
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    /// Appends one letter, cancelling against the end if possible.
    pub fn push(&mut self, l: Letter) {
        match self.letters.last() {
            Some(&last) if last.cancels(l) => {
                self.letters.pop();
            }
            _ => self.letters.push(l),
        }
    }

    pub fn extend<I: IntoIterator<Item = Letter>>(&mut self, letters: I) {
        for l in letters {
            self.push(l);
        }
    }

    /// Appends `w^-1`.
    pub fn extend_inverse(&mut self, w: &Word) {
        for &l in w.letters.iter().rev() {
            self.push(l.inverted());
        }
    }

    pub fn invert(&self) -> Word {
        Word {
            letters: self.letters.iter().rev().map(|l| l.inverted()).collect(),
        }
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut w = self.clone();
        w.extend(other.letters.iter().copied());
        w
    }

    /// `u w u^-1`.
    pub fn conjugate(&self, u: &Word) -> Word {
        let mut out = u.clone();
        out.extend(self.letters.iter().copied());
        out.extend_inverse(u);
        out
    }

    /// `a b a^-1 b^-1`.
    pub fn commutator(a: &Word, b: &Word) -> Word {
        let mut out = a.concat(b);
        out.extend_inverse(a);
        out.extend_inverse(b);
        out
    }

    /// Largest generator index used, plus one.
    pub fn alphabet_size(&self) -> usize {
        self.letters.iter().map(|l| l.generator as usize + 1).max().unwrap_or(0)
    }

    pub fn count_generator(&self, generator: u16) -> usize {
        self.letters.iter().filter(|l| l.generator == generator).count()
    }

    /// Replaces generator `i` by `values[i]` and reduces.
    pub fn substitute(&self, values: &[&Word]) -> Word {
        let mut out = Word::empty();
        for l in &self.letters {
            let v = values[l.generator as usize];
            if l.inverse {
                out.extend_inverse(v);
            } else {
                out.extend(v.letters.iter().copied());
            }
        }
        out
    }

    /// Left-to-right product with `assignment[i]` for generator `i`.
    pub fn evaluate(&self, assignment: &[GroupElement], precision: usize) -> GroupElement {
        let inverses: Vec<GroupElement> = assignment.iter().map(GroupElement::inverse).collect();
        let mut acc = GroupElement::identity(precision);
        for l in &self.letters {
            let x = if l.inverse {
                &inverses[l.generator as usize]
            } else {
                &assignment[l.generator as usize]
            };
            acc = acc.mul(x);
        }
        acc
    }

    /// Whitespace-separated tokens; `name(i)` for a generator and `name(i)'`
    /// for its inverse.
    pub fn to_text(&self, names: &[&str]) -> String {
        let mut s = String::new();
        for (i, l) in self.letters.iter().enumerate() {
            if i > 0 {
                s.push(' ');
            }
            s.push_str(names[l.generator as usize]);
            if l.inverse {
                s.push('\'');
            }
        }
        s
    }

    /// Inverse of [`Word::to_text`]. Returns the offending token on failure.
    pub fn parse(text: &str, names: &[&str]) -> Result<Word, String> {
        let mut w = Word::empty();
        for tok in text.split_whitespace() {
            let (base, inverse) = match tok.strip_suffix('\'') {
                Some(b) => (b, true),
                None => (tok, false),
            };
            let g = names.iter().position(|n| *n == base).ok_or_else(|| String::from(tok))?;
            w.push(Letter { generator: g as u16, inverse });
        }
        Ok(w)
    }
}

/// Default names for abstract generators: `g, h` for two letters, `f, g, h`
/// for three.
pub fn abstract_names(k: usize) -> &'static [&'static str] {
    match k {
        0..=2 => &["g", "h"],
        _ => &["f", "g", "h"],
    }
}

/// `f_1 = f_2 = 1`, `f_{n+2} = f_{n+1} + f_n`.
pub fn fibonacci(n: u32) -> u64 {
    assert!(n >= 1, "fibonacci index starts at 1");
    let (mut a, mut b) = (1u64, 1u64);
    for _ in 1..n {
        (a, b) = (b, a + b);
    }
    a
}

/// Pair `(omega_n, zeta_n)` from the zeta-recurrence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElkasapyPair {
    pub omega: Word,
    pub zeta: Word,
    pub index: u32,
}

/// `(omega_1, zeta_1) = (g, h^-1 g^-1)`,
/// `(omega_{n+1}, zeta_{n+1}) = (omega_n^-1 zeta_n^-1, omega_n zeta_n)`.
pub fn elkasapy_pair(n: u32) -> ElkasapyPair {
    assert!(n >= 1);
    let mut omega = Word::letter(G);
    let mut zeta = Word::reduce([H.inverted(), G.inverted()]);
    for _ in 1..n {
        let mut next_omega = omega.invert();
        next_omega.extend_inverse(&zeta);
        let next_zeta = omega.concat(&zeta);
        omega = next_omega;
        zeta = next_zeta;
    }
    ElkasapyPair { omega, zeta, index: n }
}

/// `omega_1 = g`, `omega_2 = h`, `omega_{n+2} = [omega_{n+1}^-1, omega_n]`.
pub fn elkasapy_omega_commutator(n: u32) -> Word {
    assert!(n >= 1);
    let mut prev = Word::letter(G);
    if n == 1 {
        return prev;
    }
    let mut cur = Word::letter(H);
    for _ in 2..n {
        let next = Word::commutator(&cur.invert(), &prev);
        prev = cur;
        cur = next;
    }
    cur
}

/// `len(omega_n)` in closed form, by `n mod 3`.
pub fn elkasapy_length(n: u32) -> u64 {
    assert!(n >= 2);
    let base = 13u64 << (n - 2);
    match n % 3 {
        0 => (base + 2) / 7,
        1 => (base + 4) / 7,
        _ => (base - 6) / 7,
    }
}

/// `len(zeta_n)` in closed form, by `n mod 3`.
pub fn elkasapy_zeta_length(n: u32) -> u64 {
    assert!(n >= 2);
    let base = 13u64 << (n - 2);
    match n % 3 {
        0 => (base + 2) / 7,
        1 => (base + 4) / 7,
        _ => (base + 8) / 7,
    }
}

/// Boundary letters of a word: a required prefix and suffix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EndPattern {
    pub prefix: Vec<Letter>,
    pub suffix: Vec<Letter>,
}

impl EndPattern {
    fn new(prefix: &[Letter], suffix: &[Letter]) -> Self {
        EndPattern { prefix: prefix.to_vec(), suffix: suffix.to_vec() }
    }

    pub fn matches(&self, w: &Word) -> bool {
        w.letters().starts_with(&self.prefix) && w.letters().ends_with(&self.suffix)
    }
}

/// Expected boundary letters of `(omega_n, zeta_n)` by `n mod 3`.
pub fn endpoints(n: u32) -> (EndPattern, EndPattern) {
    assert!(n >= 2);
    let (g, gi, h, hi) = (G, G.inverted(), H, H.inverted());
    match n % 3 {
        0 => (EndPattern::new(&[hi], &[h, gi]), EndPattern::new(&[h], &[hi, gi])),
        1 if n >= 4 => (EndPattern::new(&[g, hi], &[hi]), EndPattern::new(&[hi], &[hi, gi])),
        1 => unreachable!(),
        _ => {
            let zeta = if n == 2 {
                EndPattern::new(&[g, hi, gi], &[g, hi, gi])
            } else {
                EndPattern::new(&[g, hi], &[hi, gi])
            };
            (EndPattern::new(&[h], &[h]), zeta)
        }
    }
}

/// Length, expected conjugate cancellation degree and exponent of a template.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WordStats {
    pub length: usize,
    pub ccan_expected: u64,
    pub fib_index: u32,
    pub alpha: f64,
}

impl WordStats {
    pub fn new(length: usize, ccan_expected: u64, fib_index: u32) -> Self {
        let alpha = libm::log(length as f64) / libm::log(ccan_expected as f64);
        WordStats { length, ccan_expected, fib_index, alpha }
    }
}

/// A named step template: the group commutator or an Elkasapy word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Template {
    Commutator,
    Elkasapy(u32),
}

impl Template {
    pub fn word(self) -> Word {
        match self {
            Template::Commutator => Word::commutator(&Word::letter(G), &Word::letter(H)),
            Template::Elkasapy(n) => elkasapy_pair(n).omega,
        }
    }

    pub fn stats(self) -> WordStats {
        match self {
            Template::Commutator => WordStats::new(4, 2, 3),
            Template::Elkasapy(n) => WordStats::new(elkasapy_length(n) as usize, fibonacci(n), n),
        }
    }

    pub fn name(self) -> String {
        match self {
            Template::Commutator => String::from("comm"),
            Template::Elkasapy(n) => alloc::format!("elk{n}"),
        }
    }

    /// Accepts `comm` and `elk3` through `elk9`.
    pub fn parse(s: &str) -> Option<Template> {
        if s == "comm" {
            return Some(Template::Commutator);
        }
        let n: u32 = s.strip_prefix("elk")?.parse().ok()?;
        (3..=9).contains(&n).then_some(Template::Elkasapy(n))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::real::Real;
    use alloc::vec;

    fn gi() -> Letter {
        G.inverted()
    }
    fn hi() -> Letter {
        H.inverted()
    }

    #[test]
    fn reduce_and_basic_ops() {
        assert_eq!(Word::reduce([G, gi(), H]), Word::letter(H));
        let g = Word::letter(G);
        let h = Word::letter(H);
        assert!(Word::commutator(&g, &g).is_empty());
        let c = Word::commutator(&g, &h);
        assert_eq!(c.letters(), &[G, H, gi(), hi()]);
        let w = Word::reduce([G, H, H, gi()]);
        assert_eq!(w.invert().invert(), w);
        assert!(w.concat(&w.invert()).is_empty());
        assert_eq!(g.conjugate(&h).letters(), &[H, G, hi()]);
    }

    #[test]
    fn small_elkasapy_words() {
        let p1 = elkasapy_pair(1);
        assert_eq!(p1.omega.letters(), &[G]);
        assert_eq!(p1.zeta.letters(), &[hi(), gi()]);
        let p2 = elkasapy_pair(2);
        assert_eq!(p2.omega.letters(), &[H]);
        assert_eq!(p2.zeta.letters(), &[G, hi(), gi()]);
        assert_eq!(elkasapy_pair(3).omega.letters(), &[hi(), G, H, gi()]);
        assert_eq!(elkasapy_pair(4).omega.letters(), &[G, hi(), gi(), H, G, H, gi(), hi()]);
    }

    #[test]
    fn closed_form_lengths() {
        assert_eq!(elkasapy_length(2), 1);
        assert_eq!(elkasapy_length(5), 14);
        assert_eq!(elkasapy_length(6), 30);
        for n in 2..=16 {
            let p = elkasapy_pair(n);
            assert_eq!(p.omega.len() as u64, elkasapy_length(n), "omega_{n}");
            assert_eq!(p.zeta.len() as u64, elkasapy_zeta_length(n), "zeta_{n}");
            assert_eq!(p.omega, elkasapy_omega_commutator(n));
        }
    }

    #[test]
    fn fibonacci_values() {
        let expected = [1, 1, 2, 3, 5, 8, 13, 21, 34, 55];
        for (i, &f) in expected.iter().enumerate() {
            assert_eq!(fibonacci(i as u32 + 1), f);
        }
    }

    #[test]
    fn endpoint_patterns() {
        for n in 2..=16 {
            let p = elkasapy_pair(n);
            let (om, ze) = endpoints(n);
            assert!(om.matches(&p.omega), "omega_{n}");
            assert!(ze.matches(&p.zeta), "zeta_{n}");
        }
        let (om3, _) = endpoints(3);
        assert_eq!(om3.prefix, vec![hi()]);
    }

    #[test]
    fn substitute_examples() {
        let gh = Word::reduce([G, H]);
        let w = Word::reduce([Letter::new(0), Letter::new(1)]);
        let v = Word::reduce([Letter::inv(1), Letter::new(2)]);
        assert_eq!(gh.substitute(&[&w, &v]), w.concat(&v));
        let comm = Template::Commutator.word();
        assert!(comm.substitute(&[&w, &w]).is_empty());
    }

    #[test]
    fn evaluate_examples() {
        let p = 128;
        let a = GroupElement::from_f64([0.6, 0.8, 0.0, 0.0], p);
        let b = GroupElement::from_f64([0.3, 0.1, 0.5, 0.2], p);
        let one = GroupElement::identity(p);
        let tol = Real::pow2(16 - p as isize, p);
        assert_eq!(Word::empty().evaluate(&[a.clone(), b.clone()], p), one);
        let w3 = elkasapy_pair(3).omega.evaluate(&[a.clone(), b.clone()], p);
        let hand = b.inverse().mul(&a).mul(&b).mul(&a.inverse());
        assert!(*w3.distance(&hand).radians() < tol);
    }

    #[test]
    fn text_round_trip() {
        let w = elkasapy_pair(4).omega;
        let names = abstract_names(2);
        let s = w.to_text(names);
        assert_eq!(s, "g h' g' h g h g' h'");
        assert_eq!(Word::parse(&s, names).unwrap(), w);
        assert_eq!(Word::parse("g x", names), Err(String::from("x")));
    }

    #[test]
    fn templates() {
        assert_eq!(Template::parse("comm"), Some(Template::Commutator));
        assert_eq!(Template::parse("elk5"), Some(Template::Elkasapy(5)));
        assert_eq!(Template::parse("elk2"), None);
        let s = Template::Elkasapy(5).stats();
        assert_eq!((s.length, s.ccan_expected), (14, 5));
        assert!((s.alpha - 14f64.ln() / 5f64.ln()).abs() < 1e-12);
        for n in 3..=9 {
            assert!(Template::Elkasapy(n).stats().alpha > 1.0);
        }
    }
}
