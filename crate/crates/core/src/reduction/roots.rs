//! Roots of small-degree integer polynomials modulo a prime.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;

/// Below this bound every residue is tested directly.
const BRUTE_FORCE_LIMIT: u64 = 1 << 20;

type Poly = Vec<u64>;

fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn powmod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1 % p;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, a, p);
        }
        a = mulmod(a, a, p);
        e >>= 1;
    }
    r
}

fn inv(a: u64, p: u64) -> u64 {
    powmod(a, p - 2, p)
}

fn trim(mut f: Poly) -> Poly {
    while f.last() == Some(&0) {
        f.pop();
    }
    f
}

fn deg(f: &Poly) -> isize {
    f.len() as isize - 1
}

fn mul(a: &Poly, b: &Poly, p: u64) -> Poly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + mulmod(x, y, p)) % p;
        }
    }
    trim(out)
}

fn rem(a: &Poly, m: &Poly, p: u64) -> Poly {
    let mut r = a.clone();
    let lead_inv = inv(*m.last().unwrap(), p);
    while deg(&r) >= deg(m) {
        let shift = r.len() - m.len();
        let c = mulmod(*r.last().unwrap(), lead_inv, p);
        for (i, &mi) in m.iter().enumerate() {
            let t = mulmod(c, mi, p);
            r[i + shift] = (r[i + shift] + p - t) % p;
        }
        r = trim(r);
    }
    r
}

fn div(a: &Poly, m: &Poly, p: u64) -> Poly {
    let mut r = a.clone();
    let mut q = vec![0u64; a.len().saturating_sub(m.len()) + 1];
    let lead_inv = inv(*m.last().unwrap(), p);
    while deg(&r) >= deg(m) {
        let shift = r.len() - m.len();
        let c = mulmod(*r.last().unwrap(), lead_inv, p);
        q[shift] = c;
        for (i, &mi) in m.iter().enumerate() {
            let t = mulmod(c, mi, p);
            r[i + shift] = (r[i + shift] + p - t) % p;
        }
        r = trim(r);
    }
    trim(q)
}

fn gcd(a: &Poly, b: &Poly, p: u64) -> Poly {
    let (mut a, mut b) = (a.clone(), b.clone());
    while !b.is_empty() {
        let r = rem(&a, &b, p);
        a = b;
        b = r;
    }
    let li = inv(*a.last().unwrap(), p);
    a.iter().map(|&c| mulmod(c, li, p)).collect()
}

fn powmod_poly(base: &Poly, mut e: u64, m: &Poly, p: u64) -> Poly {
    let mut r: Poly = vec![1];
    let mut b = rem(base, m, p);
    while e > 0 {
        if e & 1 == 1 {
            r = rem(&mul(&r, &b, p), m, p);
        }
        b = rem(&mul(&b, &b, p), m, p);
        e >>= 1;
    }
    r
}

fn sub(a: &Poly, b: &Poly, p: u64) -> Poly {
    let n = a.len().max(b.len());
    let out = (0..n)
        .map(|i| {
            let x = a.get(i).copied().unwrap_or(0);
            let y = b.get(i).copied().unwrap_or(0);
            (x + p - y) % p
        })
        .collect();
    trim(out)
}

/// Splits a monic squarefree product of distinct linear factors.
fn split(g: &Poly, p: u64, seed: &mut u64, out: &mut Vec<u64>) {
    match deg(g) {
        d if d < 1 => {}
        1 => out.push((p - g[0]) % p),
        _ => loop {
            *seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let a = *seed % p;
            let t = powmod_poly(&vec![a, 1], (p - 1) / 2, g, p);
            let h = gcd(g, &sub(&t, &vec![1], p), p);
            if deg(&h) > 0 && deg(&h) < deg(g) {
                let other = div(g, &h, p);
                split(&h, p, seed, out);
                split(&other, p, seed, out);
                return;
            }
        },
    }
}

/// Distinct roots in `[0, p)` of an integer polynomial (ascending
/// coefficients) modulo `p`, sorted. `None` when the polynomial vanishes
/// identically modulo `p`.
pub fn roots_mod_p(coeffs: &[BigInt], p: u64) -> Option<Vec<u64>> {
    let bp = BigInt::from(p);
    let f: Poly = trim(
        coeffs
            .iter()
            .map(|c| c.mod_floor(&bp).to_u64().expect("reduced below p"))
            .collect(),
    );
    if f.is_empty() {
        return None;
    }
    if p <= BRUTE_FORCE_LIMIT {
        let roots = (0..p)
            .filter(|&j| f.iter().rev().fold(0u64, |acc, &c| (mulmod(acc, j, p) + c) % p) == 0)
            .collect();
        return Some(roots);
    }
    if f.len() == 1 {
        return Some(Vec::new());
    }
    // p is odd here; gcd with x^p - x isolates the linear factors.
    let xp = powmod_poly(&vec![0, 1], p, &f, p);
    let g = gcd(&f, &sub(&xp, &vec![0, 1], p), p);
    let mut out = Vec::new();
    let mut seed = 0x9e37_79b9_7f4a_7c15u64;
    split(&g, p, &mut seed, &mut out);
    out.sort_unstable();
    Some(out)
}
