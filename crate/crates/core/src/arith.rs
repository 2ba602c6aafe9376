//! Integer helpers: valuations, logarithms of big integers, primality and
//! factorization.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// p-adic valuation of a nonzero integer. Returns `None` for zero.
pub fn ord_p(n: &BigInt, p: u64) -> Option<u64> {
    if n.is_zero() {
        return None;
    }
    let p = BigInt::from(p);
    let mut m = n.abs();
    let mut k = 0;
    loop {
        let (q, r) = m.div_rem(&p);
        if !r.is_zero() {
            return Some(k);
        }
        m = q;
        k += 1;
    }
}

/// p-adic valuation of a nonzero rational.
pub fn ord_p_rational(r: &BigRational, p: u64) -> Option<i64> {
    let num = ord_p(r.numer(), p)? as i64;
    let den = ord_p(r.denom(), p).expect("denominator is nonzero") as i64;
    Some(num - den)
}

/// Natural logarithm of |n| for n != 0, accurate to a few ulps for any size.
pub fn ln_abs(n: &BigInt) -> f64 {
    ln_biguint(n.magnitude())
}

pub fn ln_biguint(n: &BigUint) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        n.to_f64().unwrap().ln()
    } else {
        let shift = bits - 64;
        let top: BigUint = n >> shift;
        top.to_f64().unwrap().ln() + (shift as f64) * std::f64::consts::LN_2
    }
}

pub fn ln_abs_rational(r: &BigRational) -> f64 {
    ln_abs(r.numer()) - ln_abs(r.denom())
}

pub fn gcd_all<'a, I: IntoIterator<Item = &'a BigInt>>(it: I) -> BigInt {
    it.into_iter()
        .fold(BigInt::zero(), |g, c| g.gcd(c))
}

/// `p^e` as a big integer.
pub fn pow_u64(p: u64, e: u64) -> BigInt {
    num_traits::pow(BigInt::from(p), e as usize)
}

/// Inverse of `a` modulo `m` (both positive, coprime).
pub fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    if m.is_one() {
        return Some(BigInt::zero());
    }
    let e = a.mod_floor(m).extended_gcd(m);
    if !e.gcd.is_one() {
        return None;
    }
    Some(e.x.mod_floor(m))
}

const SMALL_PRIMES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Miller-Rabin. Deterministic below 3.3e24 with these bases; a strong
/// probable-prime test beyond that.
pub fn is_prime(n: &BigUint) -> bool {
    let two = BigUint::from(2u32);
    if *n < two {
        return false;
    }
    for &p in &SMALL_PRIMES {
        let bp = BigUint::from(p);
        if *n == bp {
            return true;
        }
        if (n % &bp).is_zero() {
            return false;
        }
    }
    let n1 = n - 1u32;
    let s = n1.trailing_zeros().unwrap_or(0);
    let d = &n1 >> s;
    'bases: for &a in &SMALL_PRIMES {
        let mut x = BigUint::from(a).modpow(&d, n);
        if x.is_one() || x == n1 {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == n1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

pub fn is_prime_u64(p: u64) -> bool {
    is_prime(&BigUint::from(p))
}

/// Pollard-Brent; `n` must be odd and composite.
fn pollard_brent(n: &BigUint) -> BigUint {
    let one = BigUint::one();
    let mut c = BigUint::one();
    loop {
        let f = |x: &BigUint| (x * x + &c) % n;
        let mut y = BigUint::from(2u32);
        let mut r: u64 = 1;
        let mut q = BigUint::one();
        let mut g = BigUint::one();
        let mut x = y.clone();
        let mut ys = y.clone();
        const M: u64 = 64;
        while g == one {
            x = y.clone();
            for _ in 0..r {
                y = f(&y);
            }
            let mut k = 0;
            while k < r && g == one {
                ys = y.clone();
                for _ in 0..M.min(r - k) {
                    y = f(&y);
                    let diff = if x > y { &x - &y } else { &y - &x };
                    q = (q * diff) % n;
                }
                g = q.gcd(n);
                k += M;
            }
            r *= 2;
        }
        if g == *n {
            loop {
                ys = f(&ys);
                let diff = if x > ys { &x - &ys } else { &ys - &x };
                g = diff.gcd(n);
                if g != one {
                    break;
                }
            }
        }
        if g != *n {
            return g;
        }
        c += 1u32;
    }
}

fn factor_into(n: BigUint, out: &mut Vec<BigUint>) {
    if n.is_one() {
        return;
    }
    if is_prime(&n) {
        out.push(n);
        return;
    }
    let d = pollard_brent(&n);
    let q = &n / &d;
    factor_into(d, out);
    factor_into(q, out);
}

/// Sorted distinct prime divisors of a nonzero integer.
///
/// Primes are returned as `u64`; a prime factor wider than 64 bits is
/// reported as unsupported.
pub fn prime_divisors(n: &BigInt) -> Result<Vec<u64>> {
    if n.is_zero() {
        return Err(Error::InvalidInput("cannot factor zero".into()));
    }
    let mut m = n.magnitude().clone();
    let mut primes = Vec::new();
    let mut p = 2u64;
    while p < 1 << 14 {
        let bp = BigUint::from(p);
        if (&m % &bp).is_zero() {
            primes.push(p);
            while (&m % &bp).is_zero() {
                m /= &bp;
            }
        }
        if &bp * &bp > m {
            break;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    let mut big = Vec::new();
    factor_into(m, &mut big);
    for f in big {
        let v = f
            .to_u64()
            .ok_or_else(|| Error::Unsupported(format!("prime factor {f} exceeds 64 bits")))?;
        primes.push(v);
    }
    primes.sort_unstable();
    primes.dedup();
    Ok(primes)
}

/// Sign of a big integer as -1, 0 or 1.
pub fn signum(n: &BigInt) -> i32 {
    match n.sign() {
        Sign::Minus => -1,
        Sign::NoSign => 0,
        Sign::Plus => 1,
    }
}
