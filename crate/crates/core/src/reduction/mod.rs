//! Bad reduction and minimal resultants.
//!
//! For a prime `p`, `ord_p Res` of the canonical lift of `phi o f o phi^-1`
//! depends only on the class of `phi` in `GL2(Z_p) \ GL2(Q_p) / Q_p^*`, i.e. on
//! a vertex of the Bruhat-Tits tree, and is convex along paths. The descent
//! walks to strictly better neighbours until none exists; the oracle scans a
//! whole ball of vertices.

mod roots;

use std::collections::{BTreeMap, HashSet, VecDeque};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{self, ln_abs_rational, mod_inverse, ord_p, pow_u64};
use crate::certified::CertifiedValue;
use crate::error::{Error, Result};
use crate::maps::{conjugate, normalized_resultant_abs, HomogeneousLift, Mobius, Place};

pub use roots::roots_mod_p;

/// Largest radius accepted by [`minimal_resultant_oracle`].
pub const MAX_ORACLE_RADIUS: usize = 6;

/// Radius of the conjugator ball searched for the archimedean term of `h_res`.
pub const ARCHIMEDEAN_SEARCH_RADIUS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Descent,
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MinResStatus {
    /// No neighbour improves; the ordinal is minimal over Q_p-conjugates.
    Minimal,
    /// The depth cap was hit before the walk stabilized.
    CapReached,
    /// Some neighbours could not be enumerated (huge prime, degenerate
    /// reduction); the value is an upper bound.
    Incomplete,
}

/// Per-prime minimal resultant record.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinResCertificate {
    pub p: u64,
    pub ord_start: u64,
    pub ord_min: u64,
    #[serde(serialize_with = "ser_matrix")]
    pub conjugator: Mobius,
    pub method: Method,
    pub status: MinResStatus,
}

fn ser_matrix<S: serde::Serializer>(m: &Mobius, s: S) -> std::result::Result<S::Ok, S::Error> {
    let rows: Vec<Vec<String>> = m
        .primitive()
        .iter()
        .map(|r| r.iter().map(|c| c.to_string()).collect())
        .collect();
    rows.serialize(s)
}

impl MinResCertificate {
    /// Recomputes the ordinal from scratch through the recorded conjugator.
    pub fn verify(&self, f: &HomogeneousLift) -> bool {
        self.ord_min <= self.ord_start && ord_res_at(f, self.p, &self.conjugator) == self.ord_min
    }
}

/// `ord_p Res` of the canonical lift of `phi o f o phi^-1`, i.e. the p-adic
/// ordinal of the inverse normalized resultant.
pub fn ord_res_at(f: &HomogeneousLift, p: u64, phi: &Mobius) -> u64 {
    let g = conjugate(f, phi);
    let r = normalized_resultant_abs(&g, Place::Finite(p));
    (-arith::ord_p_rational(&r, p).expect("nonzero")) as u64
}

fn canonical_ord(g: &HomogeneousLift, p: u64) -> u64 {
    debug_assert!(g.is_content_normalized());
    ord_p(g.resultant(), p).expect("nonzero resultant")
}

fn mat(a: BigInt, b: BigInt, c: BigInt, d: BigInt) -> Mobius {
    Mobius::from_bigints([[a, b], [c, d]]).expect("elementary moves are invertible")
}

/// An elementary move, stored as the substitution matrix `M`
/// (`z = M w`): `[[p, j], [0, 1]]` for `z = p w + j` and `[[1, 0], [0, p]]` for
/// `z = w / p`. The conjugator is updated by `M^-1`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Move {
    entries: [u64; 4],
}

impl Move {
    fn shift(p: u64, j: u64) -> Self {
        Move { entries: [p, j, 0, 1] }
    }

    fn shrink(p: u64) -> Self {
        Move { entries: [1, 0, 0, p] }
    }

    /// `M^-1` up to scalar (the adjugate).
    fn inverse_matrix(&self) -> Mobius {
        let [a, b, c, d] = self.entries.map(BigInt::from);
        mat(d, -b, -c, a)
    }

    fn matrix(&self) -> Mobius {
        let [a, b, c, d] = self.entries.map(BigInt::from);
        mat(a, b, c, d)
    }
}

fn min_drop(d: u64) -> u64 {
    if d % 2 == 0 {
        d
    } else {
        2 * d
    }
}

/// Moves from the vertex of `g` (canonical lift) that can strictly lower the
/// ordinal, in lexicographic order of their matrices. A move whose conjugate
/// has unit content raises the ordinal by `d(d+1)`, so it is skipped: the
/// shift `z = p w + j` needs `p | P(j,1) - j Q(j,1)` and the shrink needs
/// `p | b_d`.
fn candidate_moves(g: &HomogeneousLift, p: u64) -> (Vec<Move>, bool) {
    let d = g.degree();
    let mut moves = Vec::new();
    let mut complete = true;
    if (&g.q().coeffs()[d] % BigInt::from(p)).is_zero() {
        moves.push(Move::shrink(p));
    }
    // H(z) = P(z,1) - z Q(z,1), ascending coefficients.
    let mut h = vec![BigInt::zero(); d + 2];
    for i in 0..=d {
        h[i] += &g.p().coeffs()[i];
        h[i + 1] -= &g.q().coeffs()[i];
    }
    match roots_mod_p(&h, p) {
        Some(js) => moves.extend(js.into_iter().map(|j| Move::shift(p, j))),
        None if p <= 1 << 20 => moves.extend((0..p).map(|j| Move::shift(p, j))),
        None => complete = false,
    }
    moves.sort();
    (moves, complete)
}

/// Greedy descent on the tree of conjugators.
pub fn minimal_resultant_ord(f: &HomogeneousLift, p: u64) -> Result<MinResCertificate> {
    if !arith::is_prime_u64(p) {
        return Err(Error::InvalidInput(format!("{p} is not prime")));
    }
    let f = f.normalized();
    let d = f.degree() as u64;
    let ord_start = canonical_ord(&f, p);
    let cap = 4 * ord_start + 4;

    let mut phi = Mobius::identity();
    let mut cur = f.clone();
    let mut ord = ord_start;
    let mut status = MinResStatus::Minimal;
    let mut steps = 0;
    loop {
        if ord < min_drop(d) {
            break;
        }
        if steps >= cap {
            status = MinResStatus::CapReached;
            break;
        }
        let (moves, complete) = candidate_moves(&cur, p);
        let best = moves
            .iter()
            .map(|m| {
                let g = conjugate(&cur, &m.inverse_matrix());
                let o = canonical_ord(&g, p);
                (o, m, g)
            })
            .filter(|(o, _, _)| *o < ord)
            .min_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(b.1)));
        match best {
            Some((o, m, g)) => {
                phi = m.inverse_matrix().compose(&phi);
                phi = Mobius::from_bigints(phi.primitive()).expect("invertible");
                cur = g;
                ord = o;
                steps += 1;
            }
            None => {
                if !complete {
                    status = MinResStatus::Incomplete;
                }
                break;
            }
        }
    }
    Ok(MinResCertificate {
        p,
        ord_start,
        ord_min: ord,
        conjugator: phi,
        method: Method::Descent,
        status,
    })
}

/// Canonical label of the tree vertex of a conjugator: the row lattice of
/// its primitive integer matrix in lower Hermite form `[[p^a, 0], [y, p^b]]`
/// with `0 <= y < p^a`.
pub fn vertex_key(phi: &Mobius, p: u64) -> (u64, u64, BigInt) {
    let [[a0, b0], [c0, d0]] = phi.primitive();
    let det = &a0 * &d0 - &b0 * &c0;
    let vb = ord_p(&b0, p);
    let vd = ord_p(&d0, p);
    // bottom row: the one whose second entry has the smaller valuation
    let (col1, col2, b) = match (vb, vd) {
        (Some(x), Some(y)) if x < y => (a0, b0, x),
        (Some(x), None) => (a0, b0, x),
        (_, Some(y)) => (c0, d0, y),
        (None, None) => unreachable!("invertible matrix has a nonzero second column"),
    };
    let a = ord_p(&det, p).expect("invertible") - b;
    let pa = pow_u64(p, a);
    let unit = &col2 / pow_u64(p, b);
    let y = if pa.is_one() {
        BigInt::zero()
    } else {
        let u_inv = mod_inverse(&unit, &pa).expect("unit at p");
        (col1 * u_inv).mod_floor(&pa)
    };
    (a, b, y)
}

/// Exhaustive minimum of `ord_res_at` over every vertex within `radius`
/// elementary moves (or inverse moves) of the identity.
pub fn minimal_resultant_oracle(f: &HomogeneousLift, p: u64, radius: usize) -> Result<u64> {
    if radius > MAX_ORACLE_RADIUS {
        return Err(Error::RadiusTooLarge(radius, MAX_ORACLE_RADIUS));
    }
    if !arith::is_prime_u64(p) {
        return Err(Error::InvalidInput(format!("{p} is not prime")));
    }
    if p > 97 {
        return Err(Error::Unsupported(format!(
            "oracle enumerates p+1 moves per vertex; p = {p} is too large"
        )));
    }
    let f = f.normalized();
    let mut generators: Vec<Mobius> = Vec::new();
    for m in (0..p).map(|j| Move::shift(p, j)).chain([Move::shrink(p)]) {
        generators.push(m.inverse_matrix());
        generators.push(m.matrix());
    }
    let start = Mobius::identity();
    let mut seen = HashSet::new();
    seen.insert(vertex_key(&start, p));
    let mut queue = VecDeque::from([(start, 0usize)]);
    let mut best = u64::MAX;
    while let Some((phi, depth)) = queue.pop_front() {
        best = best.min(ord_res_at(&f, p, &phi));
        if depth == radius {
            continue;
        }
        for g in &generators {
            let next = Mobius::from_bigints(g.compose(&phi).primitive()).expect("invertible");
            if seen.insert(vertex_key(&next, p)) {
                queue.push_back((next, depth + 1));
            }
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BadReductionReport {
    /// `(p, ord_p res(f))` for every prime of bad reduction, ascending.
    pub bad_primes: Vec<(u64, u64)>,
    pub includes_archimedean: bool,
    /// Number of bad places, the archimedean place included.
    pub s: usize,
    /// Certificates for every prime dividing `Res` of the canonical lift.
    pub certificates: Vec<MinResCertificate>,
    /// Primes whose descent did not certify minimality.
    pub warnings: Vec<u64>,
}

/// Bad places of `f`. Only primes dividing the resultant of the canonical
/// lift can be bad.
pub fn bad_places(f: &HomogeneousLift) -> Result<BadReductionReport> {
    let f = f.normalized();
    let primes = arith::prime_divisors(f.resultant())?;
    let certificates: Vec<MinResCertificate> = primes
        .par_iter()
        .map(|&p| minimal_resultant_ord(&f, p))
        .collect::<Result<_>>()?;
    let bad_primes: Vec<(u64, u64)> = certificates
        .iter()
        .filter(|c| c.ord_min > 0)
        .map(|c| (c.p, c.ord_min))
        .collect();
    let warnings = certificates
        .iter()
        .filter(|c| c.status != MinResStatus::Minimal)
        .map(|c| c.p)
        .collect();
    Ok(BadReductionReport {
        s: bad_primes.len() + 1,
        bad_primes,
        includes_archimedean: true,
        certificates,
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HResReport {
    /// `sum_p ord_p res(f) log p`, exact up to rounding.
    pub finite: CertifiedValue,
    /// `max(0, -log |res(f)|_inf)` from the best conjugate found; an upper
    /// bound only, since the supremum runs over all of `SL2(R)`.
    pub archimedean: CertifiedValue,
    pub archimedean_upper_bound_only: bool,
    pub archimedean_search_radius: usize,
    pub total: CertifiedValue,
    pub per_prime: BTreeMap<u64, u64>,
    pub s: usize,
    pub warnings: Vec<u64>,
}

/// Largest `|Res(g)|_inf / |g|^{2d}` over conjugates of `f` by words of
/// length at most `radius` in `z+1, z-1, 2z, z/2, 1/z`.
pub fn best_archimedean_resultant(f: &HomogeneousLift, radius: usize) -> (BigRational, Mobius) {
    let gens = [
        Mobius::from_ints(1, 1, 0, 1).unwrap(),
        Mobius::from_ints(1, -1, 0, 1).unwrap(),
        Mobius::from_ints(2, 0, 0, 1).unwrap(),
        Mobius::from_ints(1, 0, 0, 2).unwrap(),
        Mobius::from_ints(0, 1, 1, 0).unwrap(),
    ];
    let start = Mobius::identity();
    let mut seen = HashSet::new();
    seen.insert(start.primitive());
    let mut queue = VecDeque::from([(start.clone(), 0usize)]);
    let mut best = (normalized_resultant_abs(f, Place::Archimedean), start);
    while let Some((phi, depth)) = queue.pop_front() {
        let r = normalized_resultant_abs(&conjugate(f, &phi), Place::Archimedean);
        if r > best.0 {
            best = (r, phi.clone());
        }
        if depth == radius {
            continue;
        }
        for g in &gens {
            let next = g.compose(&phi);
            if seen.insert(next.primitive()) {
                queue.push_back((next, depth + 1));
            }
        }
    }
    best
}

/// The minimal resultant height: exact finite part plus a flagged
/// archimedean term.
pub fn h_res(f: &HomogeneousLift) -> Result<HResReport> {
    let report = bad_places(f)?;
    let finite = CertifiedValue::sum(
        report
            .bad_primes
            .iter()
            .map(|&(p, o)| CertifiedValue::exact(o as f64 * (p as f64).ln())),
    );
    let (best, _) = best_archimedean_resultant(&f.normalized(), ARCHIMEDEAN_SEARCH_RADIUS);
    let minus_log = -ln_abs_rational(&best);
    let arch = if minus_log > 0.0 {
        CertifiedValue::new(minus_log, 4.0 * f64::EPSILON * minus_log.abs())
    } else {
        CertifiedValue::exact(0.0)
    };
    Ok(HResReport {
        finite,
        archimedean: arch,
        archimedean_upper_bound_only: true,
        archimedean_search_radius: ARCHIMEDEAN_SEARCH_RADIUS,
        total: finite + arch,
        per_prime: report.bad_primes.iter().copied().collect(),
        s: report.s,
        warnings: report.warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lift(p: &[i64], q: &[i64]) -> HomogeneousLift {
        HomogeneousLift::from_i64(p, q).unwrap()
    }

    #[test]
    fn ord_res_examples() {
        let z2 = lift(&[0, 0, 1], &[1, 0, 0]);
        let three = lift(&[0, 0, 3], &[1, 0, 0]);
        assert_eq!(ord_res_at(&z2, 2, &Mobius::identity()), 0);
        assert_eq!(ord_res_at(&three, 3, &Mobius::identity()), 2);
        assert_eq!(ord_res_at(&three, 3, &Mobius::from_ints(3, 0, 0, 1).unwrap()), 0);
    }

    #[test]
    fn descent_examples() {
        let three = lift(&[0, 0, 3], &[1, 0, 0]);
        let c = minimal_resultant_ord(&three, 3).unwrap();
        assert_eq!((c.ord_start, c.ord_min), (2, 0));
        assert_eq!(c.conjugator.primitive(), Mobius::from_ints(3, 0, 0, 1).unwrap().primitive());
        assert_eq!(c.status, MinResStatus::Minimal);
        assert!(c.verify(&three));

        let z2 = lift(&[0, 0, 1], &[1, 0, 0]);
        for p in [2, 3, 5, 7] {
            let c = minimal_resultant_ord(&z2, p).unwrap();
            assert_eq!(c.ord_min, 0);
            assert_eq!(c.conjugator, Mobius::identity());
        }

        let half = lift(&[1, 0, 2], &[2, 0, 0]); // z^2 + 1/2
        let c = minimal_resultant_ord(&half, 2).unwrap();
        assert_eq!(c.ord_min, minimal_resultant_oracle(&half, 2, 4).unwrap());
        assert!(c.verify(&half));
    }

    #[test]
    fn oracle_examples_and_guard() {
        let three = lift(&[0, 0, 3], &[1, 0, 0]);
        assert_eq!(minimal_resultant_oracle(&three, 3, 2).unwrap(), 0);
        let z2 = lift(&[0, 0, 1], &[1, 0, 0]);
        assert_eq!(minimal_resultant_oracle(&z2, 5, 3).unwrap(), 0);
        assert_eq!(minimal_resultant_oracle(&z2, 5, 7), Err(Error::RadiusTooLarge(7, 6)));
    }

    #[test]
    fn vertex_keys_identify_cosets() {
        let p = 3;
        let id = Mobius::identity();
        // left multiplication by GL2(Z_3) keeps the vertex
        let k = Mobius::from_ints(2, 1, 1, 1).unwrap();
        let phi = Mobius::from_ints(1, -2, 0, 3).unwrap();
        assert_eq!(vertex_key(&k.compose(&phi), p), vertex_key(&phi, p));
        assert_eq!(vertex_key(&k, p), vertex_key(&id, p));
        // the p + 1 neighbours of the identity are distinct
        let mut keys: Vec<_> = (0..p)
            .map(|j| Move::shift(p, j))
            .chain([Move::shrink(p)])
            .map(|m| vertex_key(&m.inverse_matrix(), p))
            .collect();
        keys.sort();
        keys.dedup();
        assert_eq!(keys.len(), p as usize + 1);
        assert!(!keys.contains(&vertex_key(&id, p)));
    }

    #[test]
    fn bad_place_reports() {
        let z2 = lift(&[0, 0, 1], &[1, 0, 0]);
        let r = bad_places(&z2).unwrap();
        assert!(r.bad_primes.is_empty());
        assert_eq!(r.s, 1);
        let three = lift(&[0, 0, 3], &[1, 0, 0]);
        let r = bad_places(&three).unwrap();
        assert!(r.bad_primes.is_empty());
        assert_eq!(r.s, 1);
        let half = lift(&[1, 0, 2], &[2, 0, 0]);
        let oracle = minimal_resultant_oracle(&half, 2, 4).unwrap();
        let r = bad_places(&half).unwrap();
        assert_eq!(r.bad_primes.iter().any(|&(p, _)| p == 2), oracle > 0);
    }

    #[test]
    fn h_res_finite_parts() {
        let z2 = lift(&[0, 0, 1], &[1, 0, 0]);
        assert_eq!(h_res(&z2).unwrap().finite.value, 0.0);
        let three = lift(&[0, 0, 3], &[1, 0, 0]);
        assert_eq!(h_res(&three).unwrap().finite.value, 0.0);
        let half = lift(&[1, 0, 2], &[2, 0, 0]);
        let o = minimal_resultant_oracle(&half, 2, 4).unwrap();
        let h = h_res(&half).unwrap();
        assert!((h.finite.value - o as f64 * 2f64.ln()).abs() < 1e-15);
        assert!(h.archimedean_upper_bound_only);
        assert!(h.total.value >= 0.0);
    }
}
