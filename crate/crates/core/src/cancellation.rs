//! Exact truncated power series in a formal parameter `eps`, with 2x2 matrix
//! coefficients over the Gaussian rationals.
//!
//! The oracle answers one question: for a word `w` evaluated at
//! `exp(eps x_i)`, what is the smallest degree `k >= 1` at which `w - I`
//! has a nonzero coefficient? Everything is exact, so a vanishing
//! coefficient is a true zero and never a rounding artifact.
//!
//! Two evaluators are provided. [`eval_word_series`] multiplies
//! [`SeriesMatrix`] values directly. [`leading_degree_exp`] specialises to
//! exponential inputs and runs on Gaussian integers: after scaling `eps` so
//! that every `x_i` has integral entries, it stores `k! * c_k` in place of the
//! coefficient `c_k`. Products stay integral (binomial convolution), which
//! avoids a gcd per operation and makes `omega_9` at order 36 cheap.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::words::{elkasapy_pair, fibonacci, Word};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CancellationError {
    /// Every coefficient through the truncation order vanished.
    #[error("all coefficients vanish through order {order}")]
    AboveTruncation { order: usize },
}

/// `re + i im` with exact rational parts.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GaussRational {
    pub re: BigRational,
    pub im: BigRational,
}

impl fmt::Debug for GaussRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} + {}i)", self.re, self.im)
    }
}

impl GaussRational {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussRational { re, im }
    }

    /// `(re_num / den) + i (im_num / den)`.
    pub fn from_ints(re_num: i64, im_num: i64, den: i64) -> Self {
        let d = BigInt::from(den);
        GaussRational {
            re: BigRational::new(BigInt::from(re_num), d.clone()),
            im: BigRational::new(BigInt::from(im_num), d),
        }
    }

    pub fn zero() -> Self {
        GaussRational { re: BigRational::zero(), im: BigRational::zero() }
    }

    pub fn one() -> Self {
        GaussRational { re: BigRational::one(), im: BigRational::zero() }
    }

    pub fn i() -> Self {
        GaussRational { re: BigRational::zero(), im: BigRational::one() }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        GaussRational { re: self.re.clone(), im: -&self.im }
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        GaussRational { re: &self.re * r, im: &self.im * r }
    }
}

impl Add for &GaussRational {
    type Output = GaussRational;
    fn add(self, o: &GaussRational) -> GaussRational {
        GaussRational { re: &self.re + &o.re, im: &self.im + &o.im }
    }
}

impl Sub for &GaussRational {
    type Output = GaussRational;
    fn sub(self, o: &GaussRational) -> GaussRational {
        GaussRational { re: &self.re - &o.re, im: &self.im - &o.im }
    }
}

impl Mul for &GaussRational {
    type Output = GaussRational;
    fn mul(self, o: &GaussRational) -> GaussRational {
        GaussRational {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }
}

impl Neg for &GaussRational {
    type Output = GaussRational;
    fn neg(self) -> GaussRational {
        GaussRational { re: -&self.re, im: -&self.im }
    }
}

/// Constant 2x2 matrix over the Gaussian rationals.
pub type Mat2 = [[GaussRational; 2]; 2];

pub fn mat_zero() -> Mat2 {
    [[GaussRational::zero(), GaussRational::zero()], [GaussRational::zero(), GaussRational::zero()]]
}

pub fn mat_identity() -> Mat2 {
    [[GaussRational::one(), GaussRational::zero()], [GaussRational::zero(), GaussRational::one()]]
}

pub fn mat_mul(x: &Mat2, y: &Mat2) -> Mat2 {
    core::array::from_fn(|i| core::array::from_fn(|j| &(&x[i][0] * &y[0][j]) + &(&x[i][1] * &y[1][j])))
}

pub fn mat_is_zero(x: &Mat2) -> bool {
    x.iter().flatten().all(GaussRational::is_zero)
}

/// Quaternion `a I + i (b X + c Y + d Z)` with rational coordinates as a matrix.
pub fn quaternion_matrix(a: &BigRational, b: &BigRational, c: &BigRational, d: &BigRational) -> Mat2 {
    let g = |re: &BigRational, im: &BigRational| GaussRational::new(re.clone(), im.clone());
    [[g(a, d), g(c, b)], [g(&-c, b), g(a, &-d)]]
}

/// `i X / 2`, `i Y / 2`, `i Z / 2`.
pub fn half_pauli(axis: usize) -> Mat2 {
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let z = BigRational::zero();
    let mut v = [z.clone(), z.clone(), z.clone()];
    v[axis] = half;
    quaternion_matrix(&z, &v[0], &v[1], &v[2])
}

/// Series `sum_{k <= order} c_k eps^k`; terms above `order` are discarded.
#[derive(Clone, PartialEq, Eq)]
pub struct TruncatedSeries {
    coeffs: Vec<GaussRational>,
}

impl fmt::Debug for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.coeffs).finish()
    }
}

impl TruncatedSeries {
    pub fn zero(order: usize) -> Self {
        TruncatedSeries { coeffs: vec![GaussRational::zero(); order + 1] }
    }

    pub fn constant(c: GaussRational, order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = c;
        s
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, k: usize) -> &GaussRational {
        &self.coeffs[k]
    }

    pub fn coeffs(&self) -> &[GaussRational] {
        &self.coeffs
    }

    pub fn set_coeff(&mut self, k: usize, c: GaussRational) {
        self.coeffs[k] = c;
    }

    pub fn conj(&self) -> Self {
        TruncatedSeries { coeffs: self.coeffs.iter().map(GaussRational::conj).collect() }
    }
}

impl Add for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn add(self, o: &TruncatedSeries) -> TruncatedSeries {
        TruncatedSeries { coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a + b).collect() }
    }
}

impl Sub for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn sub(self, o: &TruncatedSeries) -> TruncatedSeries {
        TruncatedSeries { coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a - b).collect() }
    }
}

impl Mul for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn mul(self, o: &TruncatedSeries) -> TruncatedSeries {
        let n = self.order().min(o.order());
        let mut out = TruncatedSeries::zero(n);
        for (i, a) in self.coeffs.iter().enumerate().take(n + 1) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate().take(n + 1 - i) {
                if !b.is_zero() {
                    out.coeffs[i + j] = &out.coeffs[i + j] + &(a * b);
                }
            }
        }
        out
    }
}

/// 2x2 matrix of truncated series.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SeriesMatrix {
    pub m: [[TruncatedSeries; 2]; 2],
}

impl SeriesMatrix {
    pub fn identity(order: usize) -> Self {
        let one = || TruncatedSeries::constant(GaussRational::one(), order);
        let zero = || TruncatedSeries::zero(order);
        SeriesMatrix { m: [[one(), zero()], [zero(), one()]] }
    }

    pub fn order(&self) -> usize {
        self.m[0][0].order()
    }

    /// Matrix coefficient of `eps^k`.
    pub fn coefficient(&self, k: usize) -> Mat2 {
        core::array::from_fn(|i| core::array::from_fn(|j| self.m[i][j].coeff(k).clone()))
    }

    pub fn mul(&self, o: &SeriesMatrix) -> SeriesMatrix {
        let e = |i: usize, j: usize| &(&self.m[i][0] * &o.m[0][j]) + &(&self.m[i][1] * &o.m[1][j]);
        SeriesMatrix { m: [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]] }
    }

    pub fn sub(&self, o: &SeriesMatrix) -> SeriesMatrix {
        let e = |i: usize, j: usize| &self.m[i][j] - &o.m[i][j];
        SeriesMatrix { m: [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]] }
    }

    pub fn determinant(&self) -> TruncatedSeries {
        &(&self.m[0][0] * &self.m[1][1]) - &(&self.m[0][1] * &self.m[1][0])
    }

    /// Conjugate transpose, coefficientwise.
    pub fn adjoint(&self) -> SeriesMatrix {
        SeriesMatrix {
            m: [[self.m[0][0].conj(), self.m[1][0].conj()], [self.m[0][1].conj(), self.m[1][1].conj()]],
        }
    }

    /// `(I + S)^-1 = sum_k (-S)^k`, exact through the order. Requires the
    /// constant term to be `I`, so that `S` has no constant term.
    pub fn inverse(&self) -> SeriesMatrix {
        let n = self.order();
        let id = SeriesMatrix::identity(n);
        let neg_s = id.sub(self);
        let mut term = id.clone();
        let mut acc = id;
        for _ in 0..n {
            term = term.mul(&neg_s);
            acc = SeriesMatrix {
                m: core::array::from_fn(|i| core::array::from_fn(|j| &acc.m[i][j] + &term.m[i][j])),
            };
        }
        acc
    }

    /// Smallest `k >= 1` with a nonzero coefficient in `self - I`.
    pub fn leading(&self) -> Option<(usize, Mat2)> {
        (1..=self.order()).map(|k| (k, self.coefficient(k))).find(|(_, c)| !mat_is_zero(c))
    }
}

/// `sum_{k <= order} (eps x)^k / k!`.
pub fn series_exp(x: &Mat2, order: usize) -> SeriesMatrix {
    let mut out = SeriesMatrix::identity(order);
    let mut power = mat_identity();
    let mut fact = BigInt::one();
    for k in 1..=order {
        power = mat_mul(&power, x);
        fact *= BigInt::from(k);
        let inv_fact = BigRational::new(BigInt::one(), fact.clone());
        for i in 0..2 {
            for j in 0..2 {
                out.m[i][j].set_coeff(k, power[i][j].scale(&inv_fact));
            }
        }
    }
    out
}

/// Product of the assigned series along `w`; inverse letters use the Neumann
/// inverse of their generator.
pub fn eval_word_series(w: &Word, assignment: &[SeriesMatrix]) -> SeriesMatrix {
    let order = assignment.iter().map(SeriesMatrix::order).min().unwrap_or(0);
    let inverses: Vec<SeriesMatrix> = assignment.iter().map(SeriesMatrix::inverse).collect();
    let mut acc = SeriesMatrix::identity(order);
    for l in w.letters() {
        let x = if l.inverse { &inverses[l.generator as usize] } else { &assignment[l.generator as usize] };
        acc = acc.mul(x);
    }
    acc
}

/// Leading degree and coefficient of `w - I`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Leading {
    pub degree: usize,
    pub coefficient: Mat2,
}

pub fn leading_degree(w: &Word, assignment: &[SeriesMatrix]) -> Result<Leading, CancellationError> {
    let value = eval_word_series(w, assignment);
    value
        .leading()
        .map(|(degree, coefficient)| Leading { degree, coefficient })
        .ok_or(CancellationError::AboveTruncation { order: value.order() })
}

type GaussInt = (BigInt, BigInt);
type IntMat = [[GaussInt; 2]; 2];

fn gi_zero() -> GaussInt {
    (BigInt::zero(), BigInt::zero())
}

fn gi_is_zero(x: &GaussInt) -> bool {
    x.0.is_zero() && x.1.is_zero()
}

fn int_mat_zero() -> IntMat {
    [[gi_zero(), gi_zero()], [gi_zero(), gi_zero()]]
}

fn int_mat_is_zero(x: &IntMat) -> bool {
    x.iter().flatten().all(gi_is_zero)
}

/// `acc += c * x * y`.
fn int_mat_fma(acc: &mut IntMat, c: u64, x: &IntMat, y: &IntMat) {
    for i in 0..2 {
        for j in 0..2 {
            let mut re = BigInt::zero();
            let mut im = BigInt::zero();
            for k in 0..2 {
                let (a, b) = (&x[i][k], &y[k][j]);
                if gi_is_zero(a) || gi_is_zero(b) {
                    continue;
                }
                re += &a.0 * &b.0 - &a.1 * &b.1;
                im += &a.0 * &b.1 + &a.1 * &b.0;
            }
            if c != 1 {
                re *= c;
                im *= c;
            }
            acc[i][j].0 += re;
            acc[i][j].1 += im;
        }
    }
}

/// Series with coefficient `k` stored as `k! c_k`.
struct EgfSeries {
    coeffs: Vec<IntMat>,
}

impl EgfSeries {
    fn exp(y: &IntMat, order: usize) -> Self {
        let mut coeffs = Vec::with_capacity(order + 1);
        let one = BigInt::one;
        let mut power = [[(one(), BigInt::zero()), gi_zero()], [gi_zero(), (one(), BigInt::zero())]];
        coeffs.push(power.clone());
        for _ in 1..=order {
            let mut next = int_mat_zero();
            int_mat_fma(&mut next, 1, &power, y);
            power = next;
            coeffs.push(power.clone());
        }
        EgfSeries { coeffs }
    }

    fn mul(&self, o: &EgfSeries, binom: &[Vec<u64>]) -> EgfSeries {
        let n = self.coeffs.len() - 1;
        let mut out: Vec<IntMat> = (0..=n).map(|_| int_mat_zero()).collect();
        let nonzero_a: Vec<bool> = self.coeffs.iter().map(|c| !int_mat_is_zero(c)).collect();
        let nonzero_b: Vec<bool> = o.coeffs.iter().map(|c| !int_mat_is_zero(c)).collect();
        for k in 0..=n {
            for i in 0..=k {
                if nonzero_a[i] && nonzero_b[k - i] {
                    int_mat_fma(&mut out[k], binom[k][i], &self.coeffs[i], &o.coeffs[k - i]);
                }
            }
        }
        EgfSeries { coeffs: out }
    }
}

fn binomials(n: usize) -> Vec<Vec<u64>> {
    let mut rows: Vec<Vec<u64>> = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let mut row = vec![1u64; k + 1];
        for i in 1..k {
            row[i] = rows[k - 1][i - 1] + rows[k - 1][i];
        }
        rows.push(row);
    }
    rows
}

/// Least common multiple of all denominators in the matrices.
fn common_denominator(xs: &[Mat2]) -> BigInt {
    let mut l = BigInt::one();
    for x in xs {
        for e in x.iter().flatten() {
            l = l.lcm(e.re.denom());
            l = l.lcm(e.im.denom());
        }
    }
    l
}

fn to_int_mat(x: &Mat2, scale: &BigInt) -> IntMat {
    let s = BigRational::from_integer(scale.clone());
    core::array::from_fn(|i| {
        core::array::from_fn(|j| {
            let re = &x[i][j].re * &s;
            let im = &x[i][j].im * &s;
            debug_assert!(re.is_integer() && im.is_integer());
            (re.to_integer(), im.to_integer())
        })
    })
}

/// [`leading_degree`] for inputs `exp(eps x_i)`, on the integer fast path.
/// `w - I` is evaluated through degree `order`.
pub fn leading_degree_exp(w: &Word, exponents: &[Mat2], order: usize) -> Result<Leading, CancellationError> {
    let scale = common_denominator(exponents);
    let binom = binomials(order);
    let gens: Vec<EgfSeries> = exponents.iter().map(|x| EgfSeries::exp(&to_int_mat(x, &scale), order)).collect();
    let invs: Vec<EgfSeries> = exponents
        .iter()
        .map(|x| {
            let neg: Mat2 = core::array::from_fn(|i| core::array::from_fn(|j| -&x[i][j]));
            EgfSeries::exp(&to_int_mat(&neg, &scale), order)
        })
        .collect();
    let mut acc = EgfSeries::exp(&int_mat_zero(), order);
    for l in w.letters() {
        let x = if l.inverse { &invs[l.generator as usize] } else { &gens[l.generator as usize] };
        acc = acc.mul(x, &binom);
    }
    let (degree, c) = acc
        .coeffs
        .iter()
        .enumerate()
        .skip(1)
        .find(|(_, c)| !int_mat_is_zero(c))
        .ok_or(CancellationError::AboveTruncation { order })?;
    // eps x = delta y with y = scale * x, so c_k(eps) = egf_k / (k! scale^k).
    let mut den = scale.pow(degree as u32);
    for k in 1..=degree {
        den *= BigInt::from(k);
    }
    let coefficient = core::array::from_fn(|i| {
        core::array::from_fn(|j| {
            GaussRational::new(
                BigRational::new(c[i][j].0.clone(), den.clone()),
                BigRational::new(c[i][j].1.clone(), den.clone()),
            )
        })
    });
    Ok(Leading { degree, coefficient })
}

/// Outcome of checking `omega_n` at `g = exp(eps iZ/2)`, `h = exp(eps iY/2)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NilfibReport {
    pub n: u32,
    pub fib: u64,
    pub degree: Option<usize>,
    /// Pauli axis of the expected leading coefficient: 0 = X, 1 = Y, 2 = Z.
    pub expected_axis: usize,
    pub leading_matches: bool,
}

impl NilfibReport {
    pub fn passed(&self) -> bool {
        self.degree == Some(self.fib as usize) && self.leading_matches
    }

    pub fn axis_name(&self) -> &'static str {
        ["iX/2", "iY/2", "iZ/2"][self.expected_axis]
    }
}

/// The Pauli pair `(iZ/2, iY/2)` used as exponents for `(g, h)`.
pub fn pauli_exponents() -> [Mat2; 2] {
    [half_pauli(2), half_pauli(1)]
}

/// Leading degree of `omega_n` at the Pauli inputs, at truncation `f_n + 2`,
/// compared against `f_n` and the leading matrix `i Z/2, i Y/2, i X/2` for
/// `n = 1, 2, 0 (mod 3)`.
pub fn verify_nilfib(n: u32) -> NilfibReport {
    let fib = fibonacci(n);
    let order = fib as usize + 2;
    let w = elkasapy_pair(n).omega;
    let expected_axis = match n % 3 {
        1 => 2,
        2 => 1,
        _ => 0,
    };
    match leading_degree_exp(&w, &pauli_exponents(), order) {
        Ok(lead) => NilfibReport {
            n,
            fib,
            degree: Some(lead.degree),
            expected_axis,
            leading_matches: lead.coefficient == half_pauli(expected_axis),
        },
        Err(_) => NilfibReport { n, fib, degree: None, expected_axis, leading_matches: false },
    }
}

/// Rational unit quaternions `(a, b, c, d) / N` from `a^2 + b^2 + c^2 + d^2 = N^2`.
pub const RATIONAL_ROTATIONS: [[i64; 5]; 8] = [
    [1, 2, 2, 4, 5],
    [2, 4, 5, 6, 9],
    [1, 1, 3, 5, 6],
    [1, 2, 4, 10, 11],
    [1, 3, 3, 9, 10],
    [2, 3, 4, 14, 15],
    [3, 4, 0, 0, 5],
    [2, 3, 6, 0, 7],
];

fn rotation_matrix(q: &[i64; 5]) -> (Mat2, Mat2) {
    let r = |x: i64| BigRational::new(BigInt::from(x), BigInt::from(q[4]));
    let u = quaternion_matrix(&r(q[0]), &r(q[1]), &r(q[2]), &r(q[3]));
    let u_inv = quaternion_matrix(&r(q[0]), &r(-q[1]), &r(-q[2]), &r(-q[3]));
    (u, u_inv)
}

/// Upper-bound witness for the conjugate cancellation degree of `w`.
///
/// Generator 0 gets `x = iZ/2`; generator `j >= 1` gets `u_j x u_j^-1` for
/// rational rotations `u_j` drawn from [`RATIONAL_ROTATIONS`], shifted by one
/// per trial. Returns the smallest leading degree seen.
pub fn ccan_witness(w: &Word, trials: usize, order: usize) -> Result<usize, CancellationError> {
    let k = w.alphabet_size().max(1);
    let x = half_pauli(2);
    let rots = &RATIONAL_ROTATIONS;
    let mut best: Option<usize> = None;
    for t in 0..trials.max(1) {
        let exps: Vec<Mat2> = (0..k)
            .map(|j| {
                if j == 0 {
                    return x.clone();
                }
                let (u, u_inv) = rotation_matrix(&rots[(t + j - 1) % rots.len()]);
                mat_mul(&mat_mul(&u, &x), &u_inv)
            })
            .collect();
        if let Ok(lead) = leading_degree_exp(w, &exps, order) {
            best = Some(best.map_or(lead.degree, |b| b.min(lead.degree)));
        }
    }
    best.ok_or(CancellationError::AboveTruncation { order })
}
