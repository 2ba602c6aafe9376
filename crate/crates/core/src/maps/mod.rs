//! Binary forms, homogeneous lifts of rational maps, points of P^1 over Q,
//! Mobius transformations and places of Q.

mod milnor;
mod resultant;

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{self, gcd_all, ord_p};
use crate::error::{Error, Result};

pub use milnor::{milnor_invariants, MilnorInvariants};
pub use resultant::{
    bareiss_det, cofactor_bound, resultant_cofactors, sylvester_matrix, sylvester_resultant,
    IntMatrix,
};

/// A binary form `sum_i coeffs[i] x^i y^(d-i)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryForm {
    coeffs: Vec<BigInt>,
}

impl BinaryForm {
    /// `coeffs[i]` is the coefficient of `x^i y^(d-i)`; the degree is
    /// `coeffs.len() - 1`.
    pub fn new(coeffs: Vec<BigInt>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidInput("a binary form needs at least one coefficient".into()));
        }
        Ok(BinaryForm { coeffs })
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        BinaryForm::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
            .expect("nonempty coefficient list")
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn mul(&self, other: &BinaryForm) -> BinaryForm {
        let mut out = vec![BigInt::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        BinaryForm { coeffs: out }
    }

    /// Sum of two forms of equal degree.
    pub fn add(&self, other: &BinaryForm) -> BinaryForm {
        assert_eq!(self.degree(), other.degree(), "adding forms of different degree");
        BinaryForm {
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn scale(&self, c: &BigInt) -> BinaryForm {
        BinaryForm {
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    fn divide_exact(&self, c: &BigInt) -> BinaryForm {
        BinaryForm {
            coeffs: self.coeffs.iter().map(|a| a / c).collect(),
        }
    }

    /// The form `G(x, y) = self(a x + b y, c x + d y)` for `m = [[a, b], [c, d]]`.
    pub fn substitute(&self, m: &[[BigInt; 2]; 2]) -> BinaryForm {
        let d = self.degree();
        let l1 = BinaryForm { coeffs: vec![m[0][1].clone(), m[0][0].clone()] };
        let l2 = BinaryForm { coeffs: vec![m[1][1].clone(), m[1][0].clone()] };
        let mut pow1 = vec![BinaryForm::from_i64(&[1])];
        let mut pow2 = vec![BinaryForm::from_i64(&[1])];
        for k in 0..d {
            pow1.push(pow1[k].mul(&l1));
            pow2.push(pow2[k].mul(&l2));
        }
        let mut out = BinaryForm { coeffs: vec![BigInt::zero(); d + 1] };
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            out = out.add(&pow1[i].mul(&pow2[d - i]).scale(a));
        }
        out
    }

    pub fn eval_int(&self, x: &BigInt, y: &BigInt) -> BigInt {
        // Horner in x with y powers folded in from the top.
        let d = self.degree();
        let mut acc = BigInt::zero();
        let mut ypow = BigInt::one();
        let mut terms = Vec::with_capacity(d + 1);
        for _ in 0..=d {
            terms.push(ypow.clone());
            ypow *= y;
        }
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            acc = acc * x + c * &terms[d - i];
        }
        acc
    }

    pub fn eval_rational(&self, x: &BigRational, y: &BigRational) -> BigRational {
        let d = self.degree();
        let mut ypows = vec![BigRational::one()];
        for k in 0..d {
            let next = &ypows[k] * y;
            ypows.push(next);
        }
        let mut acc = BigRational::zero();
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            acc = acc * x + BigRational::from_integer(c.clone()) * &ypows[d - i];
        }
        acc
    }

    pub fn eval_f64(&self, coeffs: &[f64], x: f64, y: f64) -> f64 {
        let d = self.degree();
        let mut acc = 0.0;
        let mut ypow = vec![1.0; d + 1];
        for k in 1..=d {
            ypow[k] = ypow[k - 1] * y;
        }
        for i in (0..=d).rev() {
            acc = acc * x + coeffs[i] * ypow[d - i];
        }
        acc
    }
}

/// A pair of degree-d forms `(P, Q)` with nonzero resultant, representing
/// `f([x:y]) = [P(x,y) : Q(x,y)]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HomogeneousLift {
    p: BinaryForm,
    q: BinaryForm,
    res: BigInt,
    content_normalized: bool,
}

impl HomogeneousLift {
    /// Builds a lift, rejecting degree < 2, mismatched degrees and forms with
    /// a common factor. The coefficients are kept as given.
    pub fn new(p: BinaryForm, q: BinaryForm) -> Result<Self> {
        if p.degree() != q.degree() {
            return Err(Error::DegreeMismatch(p.degree(), q.degree()));
        }
        if p.degree() < 2 {
            return Err(Error::UnsupportedDegree(p.degree(), 2));
        }
        let res = sylvester_resultant(&p, &q)?;
        if res.is_zero() {
            return Err(Error::ZeroResultant);
        }
        let mut lift = HomogeneousLift { p, q, res, content_normalized: false };
        lift.content_normalized = lift.is_canonical();
        Ok(lift)
    }

    pub fn from_i64(p: &[i64], q: &[i64]) -> Result<Self> {
        HomogeneousLift::new(BinaryForm::from_i64(p), BinaryForm::from_i64(q))
    }

    /// Builds from the wire order: both coefficient lists run from `x^d` down
    /// to `y^d`.
    pub fn from_descending(p: Vec<BigInt>, q: Vec<BigInt>) -> Result<Self> {
        let rev = |mut v: Vec<BigInt>| {
            v.reverse();
            v
        };
        HomogeneousLift::new(BinaryForm::new(rev(p))?, BinaryForm::new(rev(q))?)
    }

    pub fn degree(&self) -> usize {
        self.p.degree()
    }

    pub fn p(&self) -> &BinaryForm {
        &self.p
    }

    pub fn q(&self) -> &BinaryForm {
        &self.q
    }

    /// `Res(P, Q)` for this particular lift.
    pub fn resultant(&self) -> &BigInt {
        &self.res
    }

    pub fn is_content_normalized(&self) -> bool {
        self.content_normalized
    }

    /// Coefficients in wire order: `a_d, ..., a_0, b_d, ..., b_0`.
    pub fn descending_coeffs(&self) -> impl Iterator<Item = &BigInt> {
        self.p.coeffs.iter().rev().chain(self.q.coeffs.iter().rev())
    }

    pub fn content(&self) -> BigInt {
        gcd_all(self.descending_coeffs())
    }

    pub fn max_abs_coeff(&self) -> BigInt {
        self.descending_coeffs().map(|c| c.abs()).max().unwrap_or_default()
    }

    /// Smallest p-adic valuation among the coefficients.
    pub fn min_coeff_ord(&self, p: u64) -> u64 {
        self.descending_coeffs()
            .filter_map(|c| ord_p(c, p))
            .min()
            .expect("a lift has a nonzero coefficient")
    }

    fn is_canonical(&self) -> bool {
        self.content().is_one()
            && self
                .descending_coeffs()
                .find(|c| !c.is_zero())
                .is_some_and(|c| c.is_positive())
    }

    /// Signed content `c` such that `self / c` is the canonical lift.
    pub fn signed_content(&self) -> BigInt {
        let g = self.content();
        let first_negative = self
            .descending_coeffs()
            .find(|c| !c.is_zero())
            .is_some_and(|c| c.is_negative());
        if first_negative {
            -g
        } else {
            g
        }
    }

    /// The canonical lift: coefficient gcd 1 and first nonzero coefficient
    /// (in wire order) positive.
    pub fn normalized(&self) -> HomogeneousLift {
        if self.content_normalized {
            return self.clone();
        }
        let c = self.signed_content();
        let d = self.degree() as u32;
        let p = self.p.divide_exact(&c);
        let q = self.q.divide_exact(&c);
        // Res is homogeneous of degree 2d in the coefficients.
        let res = &self.res / num_traits::pow(c, 2 * d as usize);
        HomogeneousLift { p, q, res, content_normalized: true }
    }

    /// `c * F` for a nonzero integer `c`.
    pub fn scaled(&self, c: &BigInt) -> Result<HomogeneousLift> {
        if c.is_zero() {
            return Err(Error::InvalidInput("scaling a lift by zero".into()));
        }
        HomogeneousLift::new(self.p.scale(c), self.q.scale(c))
    }

    /// `(P(z), Q(z))` at an integer pair.
    pub fn eval_int(&self, x: &BigInt, y: &BigInt) -> (BigInt, BigInt) {
        (self.p.eval_int(x, y), self.q.eval_int(x, y))
    }

    pub fn evaluate(&self, z: &(BigRational, BigRational)) -> (BigRational, BigRational) {
        evaluate_lift(self, z)
    }

    /// A stable text key of the coefficient vector (wire order).
    pub fn coefficient_key(&self) -> String {
        let parts: Vec<String> = self.descending_coeffs().map(|c| c.to_string()).collect();
        format!("d={};{}", self.degree(), parts.join(","))
    }
}

impl fmt::Display for HomogeneousLift {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |form: &BinaryForm| {
            let d = form.degree();
            let terms: Vec<String> = form
                .coeffs
                .iter()
                .enumerate()
                .rev()
                .filter(|(_, c)| !c.is_zero())
                .map(|(i, c)| format!("{c}*x^{i}*y^{}", d - i))
                .collect();
            if terms.is_empty() {
                "0".to_string()
            } else {
                terms.join(" + ")
            }
        };
        write!(f, "({}, {})", show(&self.p), show(&self.q))
    }
}

/// `(P(z), Q(z))` evaluated exactly at a rational pair.
pub fn evaluate_lift(f: &HomogeneousLift, z: &(BigRational, BigRational)) -> (BigRational, BigRational) {
    (f.p.eval_rational(&z.0, &z.1), f.q.eval_rational(&z.0, &z.1))
}

/// A rational point of P^1 as a coprime integer pair, sign-normalized so that
/// `x1 > 0`, or `x1 = 0` and `x0 = 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProjPoint {
    x0: BigInt,
    x1: BigInt,
}

impl ProjPoint {
    pub fn new(x0: BigInt, x1: BigInt) -> Result<Self> {
        if x0.is_zero() && x1.is_zero() {
            return Err(Error::InvalidInput("[0:0] is not a point".into()));
        }
        let g = x0.gcd(&x1);
        let (mut a, mut b) = (x0 / &g, x1 / &g);
        if b.is_negative() || (b.is_zero() && a.is_negative()) {
            a = -a;
            b = -b;
        }
        Ok(ProjPoint { x0: a, x1: b })
    }

    pub fn from_i64(x0: i64, x1: i64) -> Result<Self> {
        ProjPoint::new(BigInt::from(x0), BigInt::from(x1))
    }

    pub fn from_rationals(x0: &BigRational, x1: &BigRational) -> Result<Self> {
        let l = x0.denom().lcm(x1.denom());
        let a = x0.numer() * (&l / x0.denom());
        let b = x1.numer() * (&l / x1.denom());
        ProjPoint::new(a, b)
    }

    pub fn infinity() -> Self {
        ProjPoint { x0: BigInt::one(), x1: BigInt::zero() }
    }

    pub fn x0(&self) -> &BigInt {
        &self.x0
    }

    pub fn x1(&self) -> &BigInt {
        &self.x1
    }

    /// `max(|x0|, |x1|)` of the coprime representative.
    pub fn naive_size(&self) -> BigInt {
        self.x0.abs().max(self.x1.abs())
    }

    pub fn as_rationals(&self) -> (BigRational, BigRational) {
        (
            BigRational::from_integer(self.x0.clone()),
            BigRational::from_integer(self.x1.clone()),
        )
    }

    /// `x0 y1 - x1 y0` on the canonical representatives.
    pub fn wedge(&self, other: &ProjPoint) -> BigInt {
        &self.x0 * &other.x1 - &self.x1 * &other.x0
    }
}

impl fmt::Display for ProjPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}:{}]", self.x0, self.x1)
    }
}

impl FromStr for ProjPoint {
    type Err = Error;

    /// Parses `"[a:b]"` with integer entries.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidInput(format!("expected a point like \"[2:1]\", got {s:?}"));
        let inner = s.trim().strip_prefix('[').and_then(|t| t.strip_suffix(']')).ok_or_else(bad)?;
        let (a, b) = inner.split_once(':').ok_or_else(bad)?;
        let a: BigInt = a.trim().parse().map_err(|_| bad())?;
        let b: BigInt = b.trim().parse().map_err(|_| bad())?;
        ProjPoint::new(a, b)
    }
}

impl Serialize for ProjPoint {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ProjPoint {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `f(x)` as a canonical point.
pub fn apply_map(f: &HomogeneousLift, x: &ProjPoint) -> ProjPoint {
    let (a, b) = f.eval_int(&x.x0, &x.x1);
    ProjPoint::new(a, b).expect("nonzero resultant keeps the image defined")
}

/// An invertible 2x2 matrix with rational entries acting by
/// `z -> (a z + b) / (c z + d)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Mobius {
    m: [[BigRational; 2]; 2],
}

impl Mobius {
    pub fn new(m: [[BigRational; 2]; 2]) -> Result<Self> {
        let det = &m[0][0] * &m[1][1] - &m[0][1] * &m[1][0];
        if det.is_zero() {
            return Err(Error::InvalidInput("singular Mobius matrix".into()));
        }
        Ok(Mobius { m })
    }

    pub fn from_ints(a: i64, b: i64, c: i64, d: i64) -> Result<Self> {
        let r = |v: i64| BigRational::from_integer(BigInt::from(v));
        Mobius::new([[r(a), r(b)], [r(c), r(d)]])
    }

    pub fn from_bigints(m: [[BigInt; 2]; 2]) -> Result<Self> {
        let [[a, b], [c, d]] = m;
        let r = BigRational::from_integer;
        Mobius::new([[r(a), r(b)], [r(c), r(d)]])
    }

    pub fn identity() -> Self {
        Mobius::from_ints(1, 0, 0, 1).unwrap()
    }

    pub fn entries(&self) -> &[[BigRational; 2]; 2] {
        &self.m
    }

    pub fn det(&self) -> BigRational {
        &self.m[0][0] * &self.m[1][1] - &self.m[0][1] * &self.m[1][0]
    }

    /// Matrix product `self * other` (apply `other` first).
    pub fn compose(&self, other: &Mobius) -> Mobius {
        let a = &self.m;
        let b = &other.m;
        let e = |i: usize, j: usize| &a[i][0] * &b[0][j] + &a[i][1] * &b[1][j];
        Mobius { m: [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]] }
    }

    pub fn inverse(&self) -> Mobius {
        let det = self.det();
        let [[a, b], [c, d]] = &self.m;
        Mobius {
            m: [[d / &det, -b / &det], [-c / &det, a / &det]],
        }
    }

    /// The proportional primitive integer matrix whose first nonzero entry
    /// (row-major) is positive. Two matrices define the same transformation
    /// iff their primitive forms agree.
    pub fn primitive(&self) -> [[BigInt; 2]; 2] {
        let l = self
            .m
            .iter()
            .flatten()
            .fold(BigInt::one(), |acc, r| acc.lcm(r.denom()));
        let ints: Vec<BigInt> = self
            .m
            .iter()
            .flatten()
            .map(|r| r.numer() * (&l / r.denom()))
            .collect();
        let mut g = gcd_all(ints.iter());
        if ints.iter().find(|c| !c.is_zero()).is_some_and(|c| c.is_negative()) {
            g = -g;
        }
        let v: Vec<BigInt> = ints.into_iter().map(|c| c / &g).collect();
        [[v[0].clone(), v[1].clone()], [v[2].clone(), v[3].clone()]]
    }

    pub fn apply(&self, x: &ProjPoint) -> ProjPoint {
        let [[a, b], [c, d]] = self.primitive();
        ProjPoint::new(&a * &x.x0 + &b * &x.x1, &c * &x.x0 + &d * &x.x1)
            .expect("invertible matrix maps nonzero vectors to nonzero vectors")
    }

    /// Whether the primitive form has determinant +-1.
    pub fn is_unimodular_integer(&self) -> bool {
        let [[a, b], [c, d]] = self.primitive();
        (a * d - b * c).abs().is_one()
    }
}

impl fmt::Display for Mobius {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [[a, b], [c, d]] = self.primitive();
        write!(f, "[[{a},{b}],[{c},{d}]]")
    }
}

/// Lift of `phi o f o phi^-1`, content-normalized.
pub fn conjugate(f: &HomogeneousLift, phi: &Mobius) -> HomogeneousLift {
    let [[a, b], [c, d]] = phi.primitive();
    // phi^-1 up to scalar is the adjugate.
    let adj = [[d.clone(), -b.clone()], [-c.clone(), a.clone()]];
    let ps = f.p.substitute(&adj);
    let qs = f.q.substitute(&adj);
    let g1 = ps.scale(&a).add(&qs.scale(&b));
    let g2 = ps.scale(&c).add(&qs.scale(&d));
    HomogeneousLift::new(g1, g2)
        .expect("conjugation by an invertible matrix preserves a nonzero resultant")
        .normalized()
}

/// A place of Q: the archimedean absolute value or a finite prime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Place {
    Archimedean,
    Finite(u64),
}

impl Place {
    pub fn finite(p: u64) -> Result<Self> {
        if !arith::is_prime_u64(p) {
            return Err(Error::InvalidInput(format!("{p} is not prime")));
        }
        Ok(Place::Finite(p))
    }

    /// Local degree `N_v`; always 1 over Q.
    pub fn multiplicity(&self) -> u32 {
        1
    }
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Archimedean => write!(f, "inf"),
            Place::Finite(p) => write!(f, "{p}"),
        }
    }
}

impl FromStr for Place {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "oo" => Ok(Place::Archimedean),
            t => {
                let p: u64 = t
                    .parse()
                    .map_err(|_| Error::InvalidInput(format!("expected inf or a prime, got {s:?}")))?;
                Place::finite(p)
            }
        }
    }
}

impl Serialize for Place {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Place::Archimedean => s.serialize_str("inf"),
            Place::Finite(p) => s.serialize_u64(*p),
        }
    }
}

/// `|Res(F)|_v / max(|a_i|_v, |b_j|_v)^(2d)`, exact at every place.
///
/// `Res` is homogeneous of degree `2d` in the coefficients, so this exponent
/// makes the quantity independent of the chosen lift.
pub fn normalized_resultant_abs(f: &HomogeneousLift, v: Place) -> BigRational {
    let d = f.degree();
    match v {
        Place::Archimedean => {
            let den = num_traits::pow(f.max_abs_coeff(), 2 * d);
            BigRational::new(f.resultant().abs(), den)
        }
        Place::Finite(p) => {
            let ord_res = ord_p(f.resultant(), p).expect("nonzero resultant") as i64;
            let ord_max = f.min_coeff_ord(p) as i64;
            let e = ord_res - 2 * d as i64 * ord_max;
            p_power(p, -e)
        }
    }
}

/// `p^e` as a rational for any integer `e`.
pub fn p_power(p: u64, e: i64) -> BigRational {
    let pe = arith::pow_u64(p, e.unsigned_abs());
    if e >= 0 {
        BigRational::from_integer(pe)
    } else {
        BigRational::new(BigInt::one(), pe)
    }
}
