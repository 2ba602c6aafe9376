//! Local dynamical heights at a single place.
//!
//! `H_v(z) = lim d^-n log ||F^n(z)||_v` is evaluated by telescoping: with
//! `z_0 = z` and `z_{k+1}` a rescaled copy of `F(z_k)`,
//! `H_v(z) = log ||z|| + sum_k d^-(k+1) (log ||F(z_k)|| - d log ||z_k||)`.
//! Each increment lies in `[L_v, U_v]`, which bounds the truncated tail.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::arith::{self, ln_abs, ln_abs_rational, ord_p, pow_u64};
use crate::certified::CertifiedValue;
use crate::error::{Error, Result};
use crate::maps::{cofactor_bound, p_power, HomogeneousLift, Place, ProjPoint};

/// Bounds `L_v <= log ||F(z)||_v - d log ||z||_v <= U_v` for all `z != 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepErrorConstant {
    pub place: Place,
    pub upper: f64,
    pub lower: f64,
}

impl StepErrorConstant {
    pub fn magnitude(&self) -> f64 {
        self.upper.abs().max(self.lower.abs())
    }
}

const ULP: f64 = f64::EPSILON;

fn round_up(x: f64) -> f64 {
    x + ULP * x.abs().max(1e-300) * 4.0
}

fn round_down(x: f64) -> f64 {
    x - ULP * x.abs().max(1e-300) * 4.0
}

/// Cofactor constant `A'`: the larger of `|g_1|_1 + |g_2|_1` and
/// `|h_1|_1 + |h_2|_1` for `g_1 P + g_2 Q = Res x^(2d-1)`, `h_1 P + h_2 Q = Res y^(2d-1)`.
pub fn cofactor_constant(f: &HomogeneousLift) -> BigInt {
    cofactor_bound(f.p(), f.q()).expect("lift forms have equal degree")
}

pub fn step_error_constants(f: &HomogeneousLift, v: Place) -> StepErrorConstant {
    let d = f.degree() as f64;
    match v {
        Place::Archimedean => {
            // |P(z)| <= |P|_1 ||z||^d
            let l1 = |c: &[BigInt]| c.iter().map(|a| a.abs()).sum::<BigInt>();
            let upper = round_up(ln_abs(&l1(f.p().coeffs()).max(l1(f.q().coeffs()))));
            let a = cofactor_constant(f);
            let lower = round_down(ln_abs(f.resultant()) - ln_abs(&a));
            StepErrorConstant { place: v, upper, lower }
        }
        Place::Finite(p) => {
            let (u, l) = finite_step_ords(f, p);
            let lp = (p as f64).ln();
            let _ = d;
            StepErrorConstant { place: v, upper: u as f64 * lp, lower: l as f64 * lp }
        }
    }
}

/// `(U_p, L_p)` in units of `log p`: `U = -c`, `L = -(ord Res - (2d-1) c)`
/// where `c` is the p-adic content ordinal of the lift.
fn finite_step_ords(f: &HomogeneousLift, p: u64) -> (i64, i64) {
    let c = f.min_coeff_ord(p) as i64;
    let r = ord_p(f.resultant(), p).expect("nonzero resultant") as i64;
    let d = f.degree() as i64;
    (-c, -(r - (2 * d - 1) * c))
}

fn check_point(xt: &(BigRational, BigRational)) -> Result<()> {
    if xt.0.is_zero() && xt.1.is_zero() {
        return Err(Error::InvalidInput("(0, 0) has no height".into()));
    }
    Ok(())
}

/// Primitive integer pair proportional to a rational pair.
fn primitive_pair(xt: &(BigRational, BigRational)) -> (BigInt, BigInt) {
    let l = xt.0.denom().lcm(xt.1.denom());
    let a = xt.0.numer() * (&l / xt.0.denom());
    let b = xt.1.numer() * (&l / xt.1.denom());
    let g = a.gcd(&b);
    (a / &g, b / &g)
}

fn min_ord_pair(a: &BigInt, b: &BigInt, p: u64) -> u64 {
    match (ord_p(a, p), ord_p(b, p)) {
        (Some(x), Some(y)) => x.min(y),
        (Some(x), None) | (None, Some(x)) => x,
        (None, None) => unreachable!("nonzero pair"),
    }
}

fn min_ord_rational_pair(xt: &(BigRational, BigRational), p: u64) -> i64 {
    [&xt.0, &xt.1]
        .iter()
        .filter(|r| !r.is_zero())
        .map(|r| arith::ord_p_rational(r, p).unwrap())
        .min()
        .unwrap()
}

/// Exact p-adic orbit data of a unit vector: the ordinals
/// `e_k = min ord_p F(z_k)` for `k < n`. `z_k` is tracked modulo a power of
/// `p` large enough that every `e_k` is determined.
fn finite_step_ordinals(f: &HomogeneousLift, p: u64, z: (BigInt, BigInt), n: usize) -> Vec<u64> {
    let c = f.min_coeff_ord(p);
    let r = ord_p(&f.normalized().resultant().clone(), p).unwrap();
    let per_step = c + r;
    let mut precision = per_step * (n as u64 + 1) + 1;
    let mut modulus = pow_u64(p, precision);
    let (mut x, mut y) = (z.0.mod_floor(&modulus), z.1.mod_floor(&modulus));
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let (fx, fy) = f.eval_int(&x, &y);
        let (fx, fy) = (fx.mod_floor(&modulus), fy.mod_floor(&modulus));
        let e = match (ord_p(&fx, p), ord_p(&fy, p)) {
            (Some(a), Some(b)) => a.min(b),
            (Some(a), None) | (None, Some(a)) => a,
            (None, None) => unreachable!("precision exceeds the maximal step ordinal"),
        };
        debug_assert!(e <= per_step && e < precision);
        out.push(e);
        let pe = pow_u64(p, e);
        precision -= e;
        modulus = pow_u64(p, precision);
        x = (fx / &pe).mod_floor(&modulus);
        y = (fy / &pe).mod_floor(&modulus);
    }
    out
}

fn geometric_tail(d: f64, n: usize) -> f64 {
    // sum_{k >= n} d^-(k+1) = d^-n / (d - 1)
    d.powi(-(n as i32)) / (d - 1.0)
}

/// Homogeneous local height `H_{F,v}` of a nonzero rational pair, truncated
/// after `n_iter` steps with a certified tail bound.
pub fn hom_local_height(
    f: &HomogeneousLift,
    xt: &(BigRational, BigRational),
    v: Place,
    n_iter: usize,
) -> Result<CertifiedValue> {
    check_point(xt)?;
    if n_iter == 0 {
        return Err(Error::InvalidInput("n_iter must be at least 1".into()));
    }
    let d = f.degree();
    let df = d as f64;
    match v {
        Place::Finite(p) => {
            let lp = (p as f64).ln();
            let log_norm = -(min_ord_rational_pair(xt, p) as f64);
            let z = primitive_pair(xt);
            let (u, l) = finite_step_ords(f, p);
            let ords = finite_step_ordinals(f, p, z, n_iter);
            // sum_k e_k / d^(k+1), exactly
            let mut acc = BigRational::zero();
            let mut dpow = BigInt::one();
            for e in &ords {
                dpow *= d;
                acc += BigRational::new(BigInt::from(*e), dpow.clone());
            }
            let head = log_norm - acc.to_f64().unwrap();
            let tail = geometric_tail(df, n_iter);
            let mid = (u + l) as f64 / 2.0;
            let half = (u - l) as f64 / 2.0;
            let value = (head + mid * tail) * lp;
            if u == l {
                Ok(CertifiedValue::exact(value))
            } else {
                let err = round_up(half * tail * lp) + 4.0 * ULP * value.abs();
                Ok(CertifiedValue::new(value, err))
            }
        }
        Place::Archimedean => {
            let sc = step_error_constants(f, v);
            let (x0, x1) = (&xt.0, &xt.1);
            let log_norm = ln_abs_rational(&x0.abs().max(x1.abs()));
            // Orbit in fixed point: F is applied exactly to an integer vector,
            // which is then cut back to ARCH_BITS bits.
            let (mut a, mut b) = primitive_pair(xt);
            let (ta, tb) = truncate_pair(&a, &b);
            a = ta;
            b = tb;
            // one cut moves log||F(z)|| - d log||z|| by at most this much
            let cut = 2.0 * df * (sc.upper - sc.lower).exp() * 2f64.powi(-(ARCH_BITS as i32 - 2));
            let mut sum = 0.0;
            let mut w = 1.0;
            let mut step_bound = 0.0;
            for _ in 0..n_iter {
                w /= df;
                let (fa, fb) = f.eval_int(&a, &b);
                let ln_z = arith::ln_biguint(a.magnitude().max(b.magnitude()));
                let ln_fz = arith::ln_biguint(fa.magnitude().max(fb.magnitude()));
                sum += w * (ln_fz - df * ln_z);
                step_bound += w * (cut + 4.0 * ULP * (ln_fz.abs() + df * ln_z.abs()));
                let (ta, tb) = truncate_pair(&fa, &fb);
                a = ta;
                b = tb;
            }
            let tail = geometric_tail(df, n_iter);
            let mid = (sc.upper + sc.lower) / 2.0;
            let half = (sc.upper - sc.lower) / 2.0;
            let value = log_norm + sum + mid * tail;
            let err = round_up(half * tail) + step_bound + 8.0 * ULP * (value.abs() + 1.0);
            Ok(CertifiedValue::new(value, err))
        }
    }
}

const ARCH_BITS: u64 = 256;

fn truncate_pair(a: &BigInt, b: &BigInt) -> (BigInt, BigInt) {
    let bits = a.bits().max(b.bits());
    if bits <= ARCH_BITS {
        // scale up so that later cuts are relative to ARCH_BITS
        let up = (ARCH_BITS - bits) as usize;
        (a << up, b << up)
    } else {
        let down = (bits - ARCH_BITS) as usize;
        (a >> down, b >> down)
    }
}

fn scaled_coeffs(c: &[BigInt], m: &BigInt) -> Vec<f64> {
    c.iter()
        .map(|a| BigRational::new(a.clone(), m.clone()).to_f64().unwrap())
        .collect()
}

/// `-log |x ^ y|_v + H_v(x) + H_v(y) - log |Res F|_v / (d(d-1))` on the
/// canonical coprime lifts of two distinct points.
pub fn green_pairing(
    f: &HomogeneousLift,
    x: &ProjPoint,
    y: &ProjPoint,
    v: Place,
    n_iter: usize,
) -> Result<CertifiedValue> {
    if x == y {
        return Err(Error::DiagonalPairing);
    }
    let d = f.degree() as f64;
    let w = x.wedge(y);
    let hx = hom_local_height(f, &x.as_rationals(), v, n_iter)?;
    let hy = hom_local_height(f, &y.as_rationals(), v, n_iter)?;
    let fixed = match v {
        Place::Archimedean => -ln_abs(&w) - ln_abs(f.resultant()) / (d * (d - 1.0)),
        Place::Finite(p) => {
            let ow = ord_p(&w, p).unwrap() as f64;
            let or = ord_p(f.resultant(), p).unwrap() as f64;
            (ow + or / (d * (d - 1.0))) * (p as f64).ln()
        }
    };
    Ok(CertifiedValue::exact(fixed) + hx + hy)
}

/// Radius outside which every vector escapes to infinity under iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EscapeRadius {
    pub place: Place,
    pub r: f64,
    pub log_r: f64,
}

/// Escape radius of the canonical lift. At a prime this is
/// `|Res|_p^(-1/(d-1))`; at infinity `max(1, (A'/|Res|)^(1/(d-1)))`.
pub fn escape_radius(f: &HomogeneousLift, v: Place) -> EscapeRadius {
    let f = f.normalized();
    let d = f.degree() as f64;
    let log_r = match v {
        Place::Finite(p) => {
            let r = ord_p(f.resultant(), p).unwrap() as f64;
            r * (p as f64).ln() / (d - 1.0)
        }
        Place::Archimedean => {
            let a = cofactor_constant(&f);
            if a.magnitude() <= f.resultant().magnitude() {
                0.0
            } else {
                round_up((ln_abs(&a) - ln_abs(f.resultant())) / (d - 1.0))
            }
        }
    };
    EscapeRadius { place: v, r: log_r.exp(), log_r }
}

/// Checks that `||F^k(z)||_v` grows by a factor of at least `(1+delta)^(d-1)`
/// at each of `n_steps` steps, for `z` outside `(1+delta) R`. Exact at primes.
pub fn verify_escape(
    f: &HomogeneousLift,
    v: Place,
    z: &(BigRational, BigRational),
    n_steps: usize,
    delta: &BigRational,
) -> Result<bool> {
    check_point(z)?;
    if !delta.is_positive() {
        return Err(Error::Precondition("delta must be positive".into()));
    }
    let f = f.normalized();
    let d = f.degree();
    let growth = num_traits::pow(BigRational::one() + delta, d - 1);
    match v {
        Place::Finite(p) => {
            let r = ord_p(f.resultant(), p).unwrap() as i64;
            let nu0 = -min_ord_rational_pair(z, p);
            // ||z||^(d-1) > p^r (1 + delta)^(d-1)
            let lhs = p_power(p, nu0 * (d as i64 - 1) - r);
            if lhs <= growth {
                return Err(Error::Precondition(format!(
                    "||z||_{p} = {p}^{nu0} is not beyond (1+delta) times the escape radius"
                )));
            }
            let ords = finite_step_ordinals(&f, p, primitive_pair(z), n_steps);
            let mut nu = nu0;
            for e in ords {
                let next = d as i64 * nu - e as i64;
                if p_power(p, next - nu) < growth {
                    return Ok(false);
                }
                nu = next;
            }
            Ok(true)
        }
        Place::Archimedean => {
            let rad = escape_radius(&f, v);
            let gf = growth.to_f64().unwrap();
            let ln_growth = gf.ln();
            let norm = z.0.abs().max(z.1.abs());
            let log_norm = ln_abs_rational(&norm);
            let margin = log_norm - rad.log_r - ln_growth / (d as f64 - 1.0);
            if margin <= 1e-12 * (1.0 + log_norm.abs()) {
                return Err(Error::Precondition(
                    "||z|| is not beyond (1+delta) times the escape radius".into(),
                ));
            }
            let m = f.max_abs_coeff();
            let ln_m = ln_abs(&m);
            let pc = scaled_coeffs(f.p().coeffs(), &m);
            let qc = scaled_coeffs(f.q().coeffs(), &m);
            let mut u = ((&z.0 / &norm).to_f64().unwrap(), (&z.1 / &norm).to_f64().unwrap());
            let mut ln_norm = log_norm;
            for _ in 0..n_steps {
                let a = f.p().eval_f64(&pc, u.0, u.1);
                let b = f.q().eval_f64(&qc, u.0, u.1);
                let nrm = a.abs().max(b.abs());
                let next = d as f64 * ln_norm + ln_m + nrm.ln();
                let tol = 1e-9 * (1.0 + next.abs());
                if next - ln_norm < ln_growth - tol {
                    return Ok(false);
                }
                ln_norm = next;
                u = (a / nrm, b / nrm);
            }
            Ok(true)
        }
    }
}

/// Unit-content check used by callers that require the canonical lift.
pub fn is_unit_at(z: &(BigInt, BigInt), p: u64) -> bool {
    min_ord_pair(&z.0, &z.1, p) == 0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lift(p: &[i64], q: &[i64]) -> HomogeneousLift {
        HomogeneousLift::from_i64(p, q).unwrap()
    }

    fn pair(a: i64, b: i64) -> (BigRational, BigRational) {
        (BigRational::from_integer(a.into()), BigRational::from_integer(b.into()))
    }

    fn pt(a: i64, b: i64) -> ProjPoint {
        ProjPoint::from_i64(a, b).unwrap()
    }

    fn z2() -> HomogeneousLift {
        lift(&[0, 0, 1], &[1, 0, 0])
    }

    fn three() -> HomogeneousLift {
        lift(&[0, 0, 3], &[1, 0, 0])
    }

    #[test]
    fn step_constants() {
        let s = step_error_constants(&z2(), Place::Finite(5));
        assert_eq!((s.upper, s.lower), (0.0, 0.0));
        let s = step_error_constants(&three(), Place::Finite(3));
        assert_eq!(s.upper, 0.0);
        assert!((s.lower + 2.0 * 3f64.ln()).abs() < 1e-15);
        let s = step_error_constants(&z2(), Place::Archimedean);
        // the cofactors of (x^2, y^2) are (x, 0) and (0, y), so A' = 1 and
        // both constants vanish: the monomial map is exact at infinity
        assert_eq!(cofactor_constant(&z2()), BigInt::from(1));
        assert!(s.upper.abs() < 1e-15 && s.lower.abs() < 1e-15);
        let s = step_error_constants(&lift(&[1, 0, -1], &[0, 0, 1]), Place::Archimedean);
        assert!(s.upper > 0.0 && s.lower < 0.0);
    }

    #[test]
    fn step_constants_bound_sampled_increments() {
        let f = lift(&[3, -2, 1], &[1, 5, -4]);
        let s = step_error_constants(&f, Place::Archimedean);
        for k in 0..400 {
            let t = (k as f64) * 0.0157;
            let (x, y) = (t.cos(), t.sin());
            let pc: Vec<f64> = f.p().coeffs().iter().map(|c| c.to_f64().unwrap()).collect();
            let qc: Vec<f64> = f.q().coeffs().iter().map(|c| c.to_f64().unwrap()).collect();
            let a = f.p().eval_f64(&pc, x, y);
            let b = f.q().eval_f64(&qc, x, y);
            let inc = a.abs().max(b.abs()).ln() - 2.0 * x.abs().max(y.abs()).ln();
            assert!(inc <= s.upper && inc >= s.lower, "{inc} not in [{}, {}]", s.lower, s.upper);
        }
    }

    #[test]
    fn monomial_local_heights() {
        let h = hom_local_height(&z2(), &pair(2, 1), Place::Archimedean, 30).unwrap();
        assert!((h.value - 2f64.ln()).abs() <= h.err + 1e-15);
        assert!(h.err <= 3f64.ln() / 2f64.powi(30) + 1e-14);
        let h = hom_local_height(&z2(), &pair(2, 1), Place::Finite(2), 30).unwrap();
        assert_eq!(h, CertifiedValue::exact(0.0));
        assert!(hom_local_height(&z2(), &pair(0, 0), Place::Archimedean, 5).is_err());
    }

    /// Brute force: iterate exactly and take `log ||F^n(x)||_3 / d^n`.
    #[test]
    fn three_adic_height_matches_exact_iteration() {
        let f = three();
        // exact iteration is only affordable for small n: coordinates grow like 3^(2^n)
        let n = 12;
        let h = hom_local_height(&f, &pair(1, 1), Place::Finite(3), n).unwrap();
        let (mut x, mut y) = (BigInt::from(1), BigInt::from(1));
        for _ in 0..n {
            let (a, b) = f.eval_int(&x, &y);
            x = a;
            y = b;
        }
        let o = min_ord_pair(&x, &y, 3) as f64;
        let oracle = -o * 3f64.ln() / 2f64.powi(n as i32);
        assert!((h.value - oracle).abs() <= h.err, "{} vs {oracle}", h.value);
        // F^k(1,1) = (3^(2^k - 1), 1) has unit norm, so the limit is 0
        let h = hom_local_height(&f, &pair(1, 1), Place::Finite(3), 20).unwrap();
        assert!(h.contains(0.0));
        assert!(h.err < 1e-5);
    }

    #[test]
    fn pairing_examples() {
        let g = green_pairing(&z2(), &pt(0, 1), &ProjPoint::infinity(), Place::Archimedean, 30).unwrap();
        assert!(g.contains(0.0));
        let g = green_pairing(&z2(), &pt(2, 1), &pt(3, 1), Place::Archimedean, 30).unwrap();
        assert!((g.value - 6f64.ln()).abs() <= g.err.max(1e-12));
        let g = green_pairing(&z2(), &pt(2, 1), &pt(3, 1), Place::Finite(5), 30).unwrap();
        assert_eq!(g, CertifiedValue::exact(0.0));
        assert_eq!(
            green_pairing(&z2(), &pt(2, 1), &pt(2, 1), Place::Archimedean, 5),
            Err(Error::DiagonalPairing)
        );
    }

    #[test]
    fn escape_radii() {
        assert_eq!(escape_radius(&z2(), Place::Finite(7)).r, 1.0);
        assert!((escape_radius(&three(), Place::Finite(3)).r - 9.0).abs() < 1e-12);
        let r = escape_radius(&z2(), Place::Archimedean);
        assert!((r.r - 1.0).abs() < 1e-12);
        assert!(escape_radius(&lift(&[1, 0, -1], &[0, 0, 1]), Place::Archimedean).r > 1.0);
    }

    #[test]
    fn escape_verification() {
        let tenth = BigRational::new(1.into(), 10.into());
        assert_eq!(verify_escape(&z2(), Place::Archimedean, &pair(2, 1), 10, &tenth), Ok(true));
        assert_eq!(verify_escape(&z2(), Place::Archimedean, &pair(-3, 7), 10, &tenth), Ok(true));
        assert!(matches!(
            verify_escape(&z2(), Place::Archimedean, &pair(1, 1), 10, &tenth),
            Err(Error::Precondition(_))
        ));
        let z = (BigRational::new(1.into(), 27.into()), BigRational::one());
        assert_eq!(verify_escape(&three(), Place::Finite(3), &z, 10, &tenth), Ok(true));
        assert!(matches!(
            verify_escape(&z2(), Place::Finite(5), &pair(1, 1), 10, &tenth),
            Err(Error::Precondition(_))
        ));
    }

    // Large cancelling coefficients; a plain f64 orbit drifts by ~5e-8 here.
    #[test]
    fn ill_conditioned_conjugate_keeps_its_error_bound() {
        use crate::maps::{conjugate, Mobius};
        let f = lift(&[-6, -8, -8], &[1, 6, 10]);
        let phi = Mobius::from_ints(7, 40, -3, -17).unwrap();
        let g = conjugate(&f, &phi);
        let (x, y) = (pt(7, 17), pt(5, 12));
        let a = green_pairing(&f, &x, &y, Place::Archimedean, 40).unwrap();
        let b = green_pairing(&g, &phi.apply(&x), &phi.apply(&y), Place::Archimedean, 40).unwrap();
        assert!((a.value - b.value).abs() <= a.err + b.err, "{a:?} {b:?}");
        assert!((a.value - b.value).abs() < 1e-11);
    }
}
