//! SU(2) as the unit 3-sphere of quaternions `a I + i (b X + c Y + d Z)`.
//!
//! Two representations live here:
//!
//! * [`GroupElement`] carries coordinates as [`Real`] at a caller-chosen
//!   precision. Synthesis and verification run on it.
//! * [`Quat`] is the same thing in `f64`, used by the base net where only
//!   O(1) accuracy matters and speed does.
//!
//! Products follow the Pauli-matrix convention: for `q = a + i v.sigma`,
//! `q1 q2 = (a1 a2 - v1.v2) + i (a1 v2 + a2 v1 - v1 x v2).sigma`.
//! Note the minus on the cross product, which is what `(iX)(iY) = -iZ` forces.
//!
//! Distances are computed in the chordal form `2 asin(|g - h| / 2)`, which is
//! equal to `acos(tr(g h^-1) / 2)` but keeps full relative accuracy near 0.

use core::fmt;

use thiserror::Error;

use crate::real::Real;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Su2Error {
    #[error("degenerate input: element too close to the identity")]
    DegenerateInput,
}

/// An angle in `[0, pi]`.
#[derive(Clone, PartialEq, PartialOrd)]
pub struct Angle(Real);

impl Angle {
    pub fn new(radians: Real) -> Self {
        let p = radians.precision();
        let pi = Real::pi(p);
        if radians.is_negative() {
            Angle(Real::zero(p))
        } else if radians > pi {
            Angle(pi)
        } else {
            Angle(radians)
        }
    }

    pub fn from_f64(radians: f64, precision: usize) -> Self {
        Self::new(Real::from_f64(radians, precision))
    }

    pub fn radians(&self) -> &Real {
        &self.0
    }

    pub fn into_radians(self) -> Real {
        self.0
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }

    /// `log2` of the angle as an `f64`; `-inf` for zero.
    pub fn log2(&self) -> f64 {
        if self.0.is_zero() {
            return f64::NEG_INFINITY;
        }
        // Split exponent and mantissa so that angles far below f64 range work.
        let e = self.0.log2_floor().unwrap_or(0);
        let m = (&self.0 * Real::pow2(-e, self.0.precision())).to_f64();
        e as f64 + libm::log2(m)
    }
}

impl fmt::Debug for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Angle({:?})", self.0)
    }
}

/// Unit quaternion `a I + i (b X + c Y + d Z)` at configurable precision.
#[derive(Clone, PartialEq)]
pub struct GroupElement {
    pub a: Real,
    pub b: Real,
    pub c: Real,
    pub d: Real,
}

impl fmt::Debug for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:?}, {:?}, {:?}, {:?}]", self.a, self.b, self.c, self.d)
    }
}

/// Tolerance below which a distance from the identity counts as degenerate.
fn degenerate_threshold(precision: usize) -> Real {
    Real::pow2(16 - precision as isize, precision)
}

impl GroupElement {
    pub fn identity(precision: usize) -> Self {
        GroupElement {
            a: Real::one(precision),
            b: Real::zero(precision),
            c: Real::zero(precision),
            d: Real::zero(precision),
        }
    }

    /// Builds an element from raw coordinates and projects onto the sphere.
    pub fn new(a: Real, b: Real, c: Real, d: Real) -> Self {
        GroupElement { a, b, c, d }.normalized()
    }

    pub fn from_f64(coords: [f64; 4], precision: usize) -> Self {
        let [a, b, c, d] = coords.map(|x| Real::from_f64(x, precision));
        Self::new(a, b, c, d)
    }

    pub fn from_quat(q: &Quat, precision: usize) -> Self {
        Self::from_f64(q.0, precision)
    }

    pub fn to_quat(&self) -> Quat {
        Quat([self.a.to_f64(), self.b.to_f64(), self.c.to_f64(), self.d.to_f64()])
    }

    pub fn precision(&self) -> usize {
        self.a.precision()
    }

    pub fn with_precision(&self, precision: usize) -> Self {
        GroupElement {
            a: self.a.with_precision(precision),
            b: self.b.with_precision(precision),
            c: self.c.with_precision(precision),
            d: self.d.with_precision(precision),
        }
        .normalized()
    }

    pub fn coords(&self) -> [&Real; 4] {
        [&self.a, &self.b, &self.c, &self.d]
    }

    pub fn vector(&self) -> [&Real; 3] {
        [&self.b, &self.c, &self.d]
    }

    pub fn norm_sq(&self) -> Real {
        self.a.square() + self.b.square() + self.c.square() + self.d.square()
    }

    /// Exact division by the norm.
    pub fn normalized(self) -> Self {
        let n = self.norm_sq().sqrt();
        if n.is_zero() {
            return Self::identity(self.precision());
        }
        GroupElement {
            a: &self.a / &n,
            b: &self.b / &n,
            c: &self.c / &n,
            d: &self.d / &n,
        }
    }

    /// One Newton step toward unit norm: `q * (3 - |q|^2) / 2`. Converges
    /// quadratically, so a product of two unit quaternions lands on the
    /// sphere to working precision without a square root.
    fn renormalized(self) -> Self {
        let p = self.precision();
        let scale = (Real::from_i64(3, p) - self.norm_sq()) / Real::from_i64(2, p);
        GroupElement {
            a: &self.a * &scale,
            b: &self.b * &scale,
            c: &self.c * &scale,
            d: &self.d * &scale,
        }
    }

    pub fn mul(&self, y: &GroupElement) -> GroupElement {
        let x = self;
        let a = &x.a * &y.a - &x.b * &y.b - &x.c * &y.c - &x.d * &y.d;
        let b = &x.a * &y.b + &x.b * &y.a - (&x.c * &y.d - &x.d * &y.c);
        let c = &x.a * &y.c + &x.c * &y.a - (&x.d * &y.b - &x.b * &y.d);
        let d = &x.a * &y.d + &x.d * &y.a - (&x.b * &y.c - &x.c * &y.b);
        GroupElement { a, b, c, d }.renormalized()
    }

    pub fn inverse(&self) -> GroupElement {
        GroupElement {
            a: self.a.clone(),
            b: -&self.b,
            c: -&self.c,
            d: -&self.d,
        }
    }

    pub fn neg(&self) -> GroupElement {
        GroupElement {
            a: -&self.a,
            b: -&self.b,
            c: -&self.c,
            d: -&self.d,
        }
    }

    /// Representative of `{q, -q}` with the first clearly nonzero coordinate
    /// positive.
    pub fn canonical(&self) -> GroupElement {
        let tiny = Real::pow2(-40, self.precision());
        for x in self.coords() {
            if x.abs() > tiny {
                return if x.is_negative() { self.neg() } else { self.clone() };
            }
        }
        self.clone()
    }

    /// Representative of `{q, -q}` with `a >= 0`.
    pub fn upper(&self) -> GroupElement {
        if self.a.is_negative() {
            self.neg()
        } else {
            self.clone()
        }
    }

    fn chord(&self, h: &GroupElement, sign_flip: bool) -> Real {
        let diff = |x: &Real, y: &Real| if sign_flip { x + y } else { x - y };
        (diff(&self.a, &h.a).square()
            + diff(&self.b, &h.b).square()
            + diff(&self.c, &h.c).square()
            + diff(&self.d, &h.d).square())
        .sqrt()
    }

    /// Bi-invariant distance `acos(tr(g h^-1) / 2)`.
    pub fn distance(&self, h: &GroupElement) -> Angle {
        chord_to_angle(self.chord(h, false))
    }

    /// Distance in PSU(2): `min(d(g, h), d(-g, h))`.
    pub fn projective_distance(&self, h: &GroupElement) -> Angle {
        let c = self.chord(h, false).min(self.chord(h, true));
        chord_to_angle(c)
    }

    pub fn distance_to_identity(&self) -> Angle {
        self.distance(&Self::identity(self.precision()))
    }

    pub fn projective_distance_to_identity(&self) -> Angle {
        self.projective_distance(&Self::identity(self.precision()))
    }

    /// Length of the vector part, `sin d(g, 1)`.
    pub fn vector_norm(&self) -> Real {
        (self.b.square() + self.c.square() + self.d.square()).sqrt()
    }

    /// Conjugation in the convention `g^u = u g u^-1`.
    pub fn conj(&self, u: &GroupElement) -> GroupElement {
        u.mul(self).mul(&u.inverse())
    }

    pub fn commutator(&self, h: &GroupElement) -> GroupElement {
        self.mul(h).mul(&self.inverse()).mul(&h.inverse())
    }

    /// `exp(i angle axis.sigma) = cos(angle) + i sin(angle) axis.sigma`.
    pub fn exp_axis(axis: &[Real; 3], angle: &Real) -> GroupElement {
        let p = angle.precision();
        let n = (axis[0].square() + axis[1].square() + axis[2].square()).sqrt();
        let (s, c) = (angle.sin(), angle.cos());
        if n.is_zero() {
            return GroupElement::new(c, Real::zero(p), Real::zero(p), s);
        }
        GroupElement {
            a: c,
            b: &s * &axis[0] / &n,
            c: &s * &axis[1] / &n,
            d: &s * &axis[2] / &n,
        }
    }

    /// Inverse of [`GroupElement::exp_axis`] on angles in `[0, pi]`. At `+-1`
    /// the axis is undefined and `z` is returned.
    pub fn log(&self) -> ([Real; 3], Angle) {
        let p = self.precision();
        let s = self.vector_norm();
        let angle = Angle::new(s.atan2(&self.a));
        if s <= degenerate_threshold(p) * Real::pow2(-16, p) {
            return ([Real::zero(p), Real::zero(p), Real::one(p)], angle);
        }
        ([&self.b / &s, &self.c / &s, &self.d / &s], angle)
    }

    /// Corner angle at 1 of the spherical triangle `(1, g, h)`, i.e. the angle
    /// between the log vectors of `g` and `h`.
    pub fn angle_between(&self, h: &GroupElement) -> Result<Angle, Su2Error> {
        let p = core::cmp::max(self.precision(), h.precision());
        let tol = degenerate_threshold(p);
        if *self.distance_to_identity().radians() < tol || *h.distance_to_identity().radians() < tol
        {
            return Err(Su2Error::DegenerateInput);
        }
        let [x1, y1, z1] = self.vector();
        let [x2, y2, z2] = h.vector();
        let dot = x1 * x2 + y1 * y2 + z1 * z2;
        let cx = y1 * z2 - z1 * y2;
        let cy = z1 * x2 - x1 * z2;
        let cz = x1 * y2 - y1 * x2;
        let cross = (cx.square() + cy.square() + cz.square()).sqrt();
        Ok(Angle::new(cross.atan2(&dot)))
    }

    /// A unit quaternion `r` whose conjugation rotates unit vector `from`
    /// onto unit vector `to`.
    pub fn rotation_between(from: &[Real; 3], to: &[Real; 3]) -> GroupElement {
        let p = from[0].precision();
        let (from, to) = (&unit(from), &unit(to));
        let dot = &from[0] * &to[0] + &from[1] * &to[1] + &from[2] * &to[2];
        // With the Pauli product convention, conjugation by (w, m) rotates
        // by -2 angle about m, hence the reversed cross product.
        let cx = &to[1] * &from[2] - &to[2] * &from[1];
        let cy = &to[2] * &from[0] - &to[0] * &from[2];
        let cz = &to[0] * &from[1] - &to[1] * &from[0];
        let w = Real::one(p) + dot;
        let norm_sq = w.square() + cx.square() + cy.square() + cz.square();
        if norm_sq < Real::pow2(-(p as isize) / 2, p) {
            // Antipodal: half-turn about any axis perpendicular to `from`.
            let perp = perpendicular(from);
            return GroupElement::new(Real::zero(p), perp[0].clone(), perp[1].clone(), perp[2].clone());
        }
        GroupElement::new(w, cx, cy, cz)
    }

    /// 2x2 complex matrix `[[a + i d, c + i b], [-c + i b, a - i d]]` as
    /// `(re, im)` pairs in `f64`.
    pub fn to_matrix_f64(&self) -> [[(f64, f64); 2]; 2] {
        self.to_quat().to_matrix()
    }

    /// Projects a 2x2 unitary onto SU(2) by dividing by a square root of its
    /// determinant, then picks the canonical sign.
    pub fn from_unitary(m: &[[(f64, f64); 2]; 2], precision: usize) -> GroupElement {
        let p = precision;
        let c = |z: (f64, f64)| (Real::from_f64(z.0, p), Real::from_f64(z.1, p));
        let (m00, m01, m10, m11) = (c(m[0][0]), c(m[0][1]), c(m[1][0]), c(m[1][1]));
        let det = csub(&cmul(&m00, &m11), &cmul(&m01, &m10));
        let root = csqrt(&det);
        let u00 = cdiv(&m00, &root);
        let u01 = cdiv(&m01, &root);
        let u10 = cdiv(&m10, &root);
        let u11 = cdiv(&m11, &root);
        let two = Real::from_i64(2, p);
        let a = (&u00.0 + &u11.0) / &two;
        let d = (&u00.1 - &u11.1) / &two;
        let cc = (&u01.0 - &u10.0) / &two;
        let b = (&u01.1 + &u10.1) / &two;
        GroupElement::new(a, b, cc, d).canonical()
    }
}

type Complex = (Real, Real);

fn cmul(x: &Complex, y: &Complex) -> Complex {
    (&x.0 * &y.0 - &x.1 * &y.1, &x.0 * &y.1 + &x.1 * &y.0)
}

fn csub(x: &Complex, y: &Complex) -> Complex {
    (&x.0 - &y.0, &x.1 - &y.1)
}

fn cdiv(x: &Complex, y: &Complex) -> Complex {
    let n = y.0.square() + y.1.square();
    let conj = (y.0.clone(), -&y.1);
    let num = cmul(x, &conj);
    (&num.0 / &n, &num.1 / &n)
}

fn csqrt(z: &Complex) -> Complex {
    let p = z.0.precision();
    let r = (z.0.square() + z.1.square()).sqrt().sqrt();
    let half = z.1.atan2(&z.0) / Real::from_i64(2, p);
    (&r * half.cos(), &r * half.sin())
}

fn unit(v: &[Real; 3]) -> [Real; 3] {
    let n = (v[0].square() + v[1].square() + v[2].square()).sqrt();
    [&v[0] / &n, &v[1] / &n, &v[2] / &n]
}

fn perpendicular(v: &[Real; 3]) -> [Real; 3] {
    let p = v[0].precision();
    // Cross with the basis vector least aligned with v.
    let ax = [v[0].abs(), v[1].abs(), v[2].abs()];
    let e = if ax[0] <= ax[1] && ax[0] <= ax[2] {
        0
    } else if ax[1] <= ax[2] {
        1
    } else {
        2
    };
    let mut basis = [Real::zero(p), Real::zero(p), Real::zero(p)];
    basis[e] = Real::one(p);
    let c = [
        &v[1] * &basis[2] - &v[2] * &basis[1],
        &v[2] * &basis[0] - &v[0] * &basis[2],
        &v[0] * &basis[1] - &v[1] * &basis[0],
    ];
    let n = (c[0].square() + c[1].square() + c[2].square()).sqrt();
    [&c[0] / &n, &c[1] / &n, &c[2] / &n]
}

fn chord_to_angle(chord: Real) -> Angle {
    let p = chord.precision();
    let half = chord / Real::from_i64(2, p);
    Angle::new(half.asin() * Real::from_i64(2, p))
}

/// `d([g, h], 1)` for `d(g, 1) = d(h, 1) = psi` and corner angle `theta`:
/// `2 asin(sin(psi)^2 sin(theta))`.
pub fn comm_distance(psi: &Angle, theta: &Angle) -> Angle {
    let p = psi.radians().precision();
    let s = psi.radians().sin();
    let x = s.square() * theta.radians().sin();
    let x = if x.is_negative() { Real::zero(p) } else { x };
    Angle::new(x.asin() * Real::from_i64(2, p))
}

/// Double-precision unit quaternion in the same basis as [`GroupElement`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quat(pub [f64; 4]);

impl Quat {
    pub const IDENTITY: Quat = Quat([1.0, 0.0, 0.0, 0.0]);

    pub fn normalized(self) -> Quat {
        let n = libm::sqrt(self.0.iter().map(|x| x * x).sum::<f64>());
        if n == 0.0 {
            return Quat::IDENTITY;
        }
        Quat(self.0.map(|x| x / n))
    }

    pub fn mul(&self, y: &Quat) -> Quat {
        let [a1, b1, c1, d1] = self.0;
        let [a2, b2, c2, d2] = y.0;
        Quat([
            a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
            a1 * b2 + b1 * a2 - (c1 * d2 - d1 * c2),
            a1 * c2 + c1 * a2 - (d1 * b2 - b1 * d2),
            a1 * d2 + d1 * a2 - (b1 * c2 - c1 * b2),
        ])
    }

    pub fn inverse(&self) -> Quat {
        let [a, b, c, d] = self.0;
        Quat([a, -b, -c, -d])
    }

    pub fn neg(&self) -> Quat {
        Quat(self.0.map(|x| -x))
    }

    /// Representative with `a >= 0` (ties broken on the next coordinates).
    pub fn upper(&self) -> Quat {
        for &x in &self.0 {
            if x > 0.0 {
                return *self;
            }
            if x < 0.0 {
                return self.neg();
            }
        }
        *self
    }

    pub fn chord(&self, h: &Quat) -> f64 {
        libm::sqrt((0..4).map(|i| (self.0[i] - h.0[i]) * (self.0[i] - h.0[i])).sum::<f64>())
    }

    /// `min(|g - h|, |g + h|)`.
    pub fn projective_chord(&self, h: &Quat) -> f64 {
        let plus = libm::sqrt((0..4).map(|i| (self.0[i] + h.0[i]) * (self.0[i] + h.0[i])).sum::<f64>());
        self.chord(h).min(plus)
    }

    pub fn distance(&self, h: &Quat) -> f64 {
        chord_angle_f64(self.chord(h))
    }

    pub fn projective_distance(&self, h: &Quat) -> f64 {
        chord_angle_f64(self.projective_chord(h))
    }

    pub fn to_matrix(&self) -> [[(f64, f64); 2]; 2] {
        let [a, b, c, d] = self.0;
        [[(a, d), (c, b)], [(-c, b), (a, -d)]]
    }
}

/// `2 asin(chord / 2)` in `f64`.
pub fn chord_angle_f64(chord: f64) -> f64 {
    2.0 * libm::asin((chord / 2.0).min(1.0))
}

/// Chord length corresponding to an angular distance.
pub fn angle_chord_f64(angle: f64) -> f64 {
    2.0 * libm::sin(angle / 2.0)
}
