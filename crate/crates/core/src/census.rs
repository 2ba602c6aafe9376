//! Orbits, preperiodic points, and the small-height experiments.
//!
//! Everything theorem-facing here is observational: the constants in the
//! uniform bounds are ineffective, so reports carry the measured quantities
//! next to the reference scales (`s log s`, `h_res / d^(s log s)`).

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{ln_abs_rational, ord_p_rational, prime_divisors};
use crate::canonical::{bad_places_of, canonical_height_at, gap_bounds, global_pairing, weil_height};
use crate::certified::CertifiedValue;
use crate::error::{Error, Result};
use crate::local::green_pairing;
use crate::maps::{apply_map, milnor_invariants, HomogeneousLift, Place, ProjPoint};
use crate::reduction::{bad_places, h_res, HResReport};

/// Largest coordinate the search box may reach.
pub const MAX_BOX_COORDINATE: u64 = 2000;

const MAX_ORBIT_BUDGET: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum OrbitStatus {
    /// `f^(tail+cycle)(x) = f^tail(x)` with both minimal.
    Preperiodic { tail: usize, cycle: usize },
    /// `f^step(x)` has Weil height above `bound`.
    Escaped { step: usize, bound: f64 },
    Undecided { budget: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrbitRecord {
    pub start: ProjPoint,
    #[serde(flatten)]
    pub status: OrbitStatus,
}

impl OrbitRecord {
    pub fn is_preperiodic(&self) -> bool {
        matches!(self.status, OrbitStatus::Preperiodic { .. })
    }
}

/// Iterates exactly until a repeat, until the Weil height exceeds
/// `height_bound`, or until `budget` applications of `f`.
pub fn orbit(f: &HomogeneousLift, x: &ProjPoint, budget: usize, height_bound: f64) -> Result<OrbitRecord> {
    if budget == 0 {
        return Err(Error::InvalidInput("orbit budget must be at least 1".into()));
    }
    let mut seen: HashMap<ProjPoint, usize> = HashMap::new();
    let mut cur = x.clone();
    for k in 0..=budget {
        if let Some(&first) = seen.get(&cur) {
            let status = OrbitStatus::Preperiodic { tail: first, cycle: k - first };
            return Ok(OrbitRecord { start: x.clone(), status });
        }
        if weil_height(&cur) > height_bound {
            let status = OrbitStatus::Escaped { step: k, bound: height_bound };
            return Ok(OrbitRecord { start: x.clone(), status });
        }
        if k == budget {
            break;
        }
        seen.insert(cur.clone(), k);
        cur = apply_map(f, &cur);
    }
    Ok(OrbitRecord { start: x.clone(), status: OrbitStatus::Undecided { budget } })
}

/// Re-checks `f^(tail+cycle)(x) = f^tail(x)` by direct iteration.
pub fn verify_cycle(f: &HomogeneousLift, x: &ProjPoint, tail: usize, cycle: usize) -> bool {
    if cycle == 0 {
        return false;
    }
    let mut a = x.clone();
    for _ in 0..tail {
        a = apply_map(f, &a);
    }
    let mut b = a.clone();
    for _ in 0..cycle {
        b = apply_map(f, &b);
    }
    a == b
}

/// Weil height above which no point is preperiodic, from the certified
/// bound on `ĥ - h`.
pub fn preperiodic_height_bound(f: &HomogeneousLift) -> Result<f64> {
    Ok(gap_bounds(f)?.preperiodic_height_bound())
}

fn box_coordinate(bound: f64) -> Result<u64> {
    if !bound.is_finite() {
        return Err(Error::InvalidInput("search bound must be finite".into()));
    }
    if bound < 0.0 {
        return Ok(0);
    }
    let limit = (MAX_BOX_COORDINATE as f64).ln();
    if bound > limit + 1e-12 {
        return Err(Error::InvalidInput(format!(
            "search bound {bound} exceeds log {MAX_BOX_COORDINATE}"
        )));
    }
    let mut n = bound.exp().floor() as u64;
    while n > 0 && (n as f64).ln() > bound {
        n -= 1;
    }
    while n < MAX_BOX_COORDINATE && ((n + 1) as f64).ln() <= bound {
        n += 1;
    }
    Ok(n)
}

/// All points of Weil height at most `bound`, ordered by `max(|x0|, |x1|)`
/// and then lexicographically; `[1:0]` included.
pub fn search_box(bound: f64) -> Result<Vec<ProjPoint>> {
    let n = box_coordinate(bound)? as i64;
    let mut out = Vec::new();
    for m in 1..=n {
        let mut layer: Vec<(i64, i64)> = Vec::new();
        if m == 1 {
            layer.push((1, 0));
        }
        for a in -m..=m {
            if a.gcd(&m) == 1 {
                layer.push((a, m));
            }
        }
        for b in 1..m {
            if b.gcd(&m) == 1 {
                layer.push((m, b));
                layer.push((-m, b));
            }
        }
        layer.sort();
        out.extend(layer.into_iter().map(|(a, b)| ProjPoint::new(BigInt::from(a), BigInt::from(b)).unwrap()));
    }
    Ok(out)
}

fn orbit_budget(height_bound: f64) -> usize {
    // an orbit that never leaves the box of height `height_bound` repeats
    // within as many steps as the box has points
    let n = height_bound.exp().floor();
    let count = 2.0 * (2.0 * n + 1.0) * n + 2.0;
    if count.is_finite() && count < MAX_ORBIT_BUDGET as f64 {
        count as usize + 1
    } else {
        MAX_ORBIT_BUDGET
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PreperiodicReport {
    pub bound: f64,
    pub searched: usize,
    /// Weil height of every preperiodic point is at most this.
    pub height_bound: f64,
    /// Whether the box contains every preperiodic point of `f` over Q.
    pub globally_complete: bool,
    pub points: Vec<OrbitRecord>,
    pub undecided: Vec<ProjPoint>,
}

pub fn preperiodic_points(f: &HomogeneousLift, bound: f64) -> Result<PreperiodicReport> {
    let f = f.normalized();
    let h_max = preperiodic_height_bound(&f)?;
    let budget = orbit_budget(h_max);
    let pts = search_box(bound)?;
    let records: Vec<OrbitRecord> = pts
        .par_iter()
        .map(|x| orbit(&f, x, budget, h_max))
        .collect::<Result<_>>()?;
    let undecided = records
        .iter()
        .filter(|r| matches!(r.status, OrbitStatus::Undecided { .. }))
        .map(|r| r.start.clone())
        .collect();
    Ok(PreperiodicReport {
        bound,
        searched: pts.len(),
        height_bound: h_max,
        globally_complete: bound >= h_max,
        points: records.into_iter().filter(|r| r.is_preperiodic()).collect(),
        undecided,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CensusRow {
    pub point: ProjPoint,
    pub weil_h: f64,
    pub hhat: CertifiedValue,
    pub orbit: OrbitStatus,
    /// `ĥ + err <= t`.
    pub below_threshold: bool,
    /// `t` lies inside the certified interval for `ĥ`.
    pub borderline: bool,
}

impl CensusRow {
    pub fn preperiodic(&self) -> bool {
        matches!(self.orbit, OrbitStatus::Preperiodic { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModuliThreshold {
    pub moduli_height: f64,
    pub threshold: f64,
    pub count: usize,
    pub borderline: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CensusReport {
    pub map: String,
    pub degree: usize,
    pub s: usize,
    pub h_res: HResReport,
    pub t_fraction: f64,
    pub threshold: f64,
    pub bound: f64,
    pub n_iter: usize,
    pub searched: usize,
    pub count: usize,
    pub borderline: usize,
    /// `s log s`, for context only.
    pub s_log_s: f64,
    /// Second threshold from the Milnor moduli height (quadratic maps only).
    pub moduli: Option<ModuliThreshold>,
    pub preperiodic_complete: bool,
    pub rows: Vec<CensusRow>,
    /// Pair energies of the counted points, when there are at least two.
    pub energy: Option<EnergyReport>,
    pub observational: bool,
}

/// Energy sums are only formed for at most this many counted points.
pub const MAX_ENERGY_POINTS: usize = 64;

struct ThresholdCount {
    count: usize,
    borderline: usize,
}

fn count_below(rows: &[CensusRow], t: f64) -> ThresholdCount {
    let count = rows.iter().filter(|r| r.hhat.upper() <= t).count();
    let borderline = rows.iter().filter(|r| r.hhat.lower() <= t && r.hhat.upper() > t).count();
    ThresholdCount { count, borderline }
}

fn census_rows(f: &HomogeneousLift, pts: &[ProjPoint], t: f64, n_iter: usize) -> Result<Vec<CensusRow>> {
    let places = bad_places_of(f)?;
    let h_max = preperiodic_height_bound(f)?;
    let budget = orbit_budget(h_max);
    pts.par_iter()
        .map(|x| {
            let rec = orbit(f, x, budget, h_max)?;
            let hhat = if rec.is_preperiodic() {
                CertifiedValue::exact(0.0)
            } else {
                canonical_height_at(f, x, n_iter, &places)?.total
            };
            Ok(CensusRow {
                point: x.clone(),
                weil_h: weil_height(x),
                below_threshold: hhat.upper() <= t,
                borderline: hhat.lower() <= t && hhat.upper() > t,
                hhat,
                orbit: rec.status,
            })
        })
        .collect()
}

/// Counts searched points with `ĥ <= t_fraction h_res / s`.
pub fn small_height_census(
    f: &HomogeneousLift,
    t_fraction: f64,
    bound: f64,
    n_iter: usize,
) -> Result<CensusReport> {
    if !(t_fraction >= 0.0 && t_fraction.is_finite()) {
        return Err(Error::InvalidInput("t_fraction must be a nonnegative number".into()));
    }
    let f = f.normalized();
    let hr = h_res(&f)?;
    let s = hr.s;
    let t = t_fraction * hr.total.value / s as f64;
    let pts = search_box(bound)?;
    let rows = census_rows(&f, &pts, t, n_iter)?;
    let main = count_below(&rows, t);
    let moduli = if f.degree() == 2 {
        let m = milnor_invariants(&f)?;
        let tm = t_fraction * m.moduli_height / s as f64;
        let c = count_below(&rows, tm);
        Some(ModuliThreshold { moduli_height: m.moduli_height, threshold: tm, count: c.count, borderline: c.borderline })
    } else {
        None
    };
    let counted: Vec<ProjPoint> = rows.iter().filter(|r| r.below_threshold).map(|r| r.point.clone()).collect();
    let energy = if counted.len() >= 2 && counted.len() <= MAX_ENERGY_POINTS {
        Some(energy_sum(&f, &counted, None, n_iter)?)
    } else {
        None
    };
    let h_max = preperiodic_height_bound(&f)?;
    Ok(CensusReport {
        map: f.to_string(),
        degree: f.degree(),
        s,
        h_res: hr,
        t_fraction,
        threshold: t,
        bound,
        n_iter,
        searched: pts.len(),
        count: main.count,
        borderline: main.borderline,
        s_log_s: s as f64 * (s as f64).ln(),
        moduli,
        preperiodic_complete: bound >= h_max,
        rows,
        energy,
        observational: true,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapProbe {
    pub witness: ProjPoint,
    pub hhat: CertifiedValue,
    /// `ĥ - err` at the witness: a certified lower bound.
    pub certified_lower: f64,
    pub searched: usize,
    /// `h_res / d^(s log s)`, for context only.
    pub reference: f64,
    pub observational: bool,
}

/// Smallest certified-positive canonical height among the searched points.
pub fn height_gap_probe(f: &HomogeneousLift, bound: f64, n_iter: usize) -> Result<GapProbe> {
    let f = f.normalized();
    let pts = search_box(bound)?;
    let rows = census_rows(&f, &pts, 0.0, n_iter)?;
    let best = rows
        .iter()
        .filter(|r| !r.preperiodic() && r.hhat.lower() > 0.0)
        .fold(None::<&CensusRow>, |acc, r| match acc {
            Some(b) if b.hhat.lower() <= r.hhat.lower() => Some(b),
            _ => Some(r),
        })
        .ok_or(Error::EmptySearch)?;
    let hr = h_res(&f)?;
    let s = hr.s as f64;
    let reference = hr.total.value / (f.degree() as f64).powf(s * s.ln());
    Ok(GapProbe {
        witness: best.point.clone(),
        hhat: best.hhat,
        certified_lower: best.hhat.lower(),
        searched: pts.len(),
        reference,
        observational: true,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyIdentity {
    pub height_sum: CertifiedValue,
    /// `2(N-1) sum ĥ`, the value the ordered sum must equal.
    pub ordered_expected: CertifiedValue,
    /// `(N-1) sum ĥ`.
    pub unordered_expected: CertifiedValue,
    pub residual: f64,
    pub tolerance: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyReport {
    pub place: String,
    pub n: usize,
    /// `sum_{i != j} g(z_i, z_j)`.
    pub ordered: CertifiedValue,
    /// `sum_{i < j} g(z_i, z_j)`.
    pub unordered: CertifiedValue,
    pub n_log_n: f64,
    pub identity: Option<EnergyIdentity>,
}

/// Pair energy at one place (`v = Some`) or summed over all places.
pub fn energy_sum(
    f: &HomogeneousLift,
    points: &[ProjPoint],
    v: Option<Place>,
    n_iter: usize,
) -> Result<EnergyReport> {
    let mut seen = HashMap::new();
    for p in points {
        if seen.insert(p.clone(), ()).is_some() {
            return Err(Error::DuplicatePoint(p.to_string()));
        }
    }
    let f = f.normalized();
    let n = points.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let values: Vec<CertifiedValue> = pairs
        .par_iter()
        .map(|&(i, j)| match v {
            Some(place) => green_pairing(&f, &points[i], &points[j], place, n_iter),
            None => global_pairing(&f, &points[i], &points[j], n_iter)
                .map(|terms| CertifiedValue::sum(terms.iter().map(|t| t.height))),
        })
        .collect::<Result<_>>()?;
    let unordered = CertifiedValue::sum(values);
    let ordered = unordered.scale(2.0);
    let identity = if v.is_none() {
        let places = bad_places_of(&f)?;
        let heights: Vec<CertifiedValue> = points
            .par_iter()
            .map(|x| canonical_height_at(&f, x, n_iter, &places).map(|h| h.total))
            .collect::<Result<_>>()?;
        let height_sum = CertifiedValue::sum(heights);
        let k = n.saturating_sub(1) as f64;
        let ordered_expected = height_sum.scale(2.0 * k);
        let unordered_expected = height_sum.scale(k);
        let residual = (ordered.value - ordered_expected.value).abs();
        let slack = 16.0 * f64::EPSILON * (pairs.len() as f64 + 1.0) * ordered.value.abs().max(1.0);
        let tolerance = ordered.err + ordered_expected.err + slack;
        Some(EnergyIdentity {
            height_sum,
            ordered_expected,
            unordered_expected,
            residual,
            tolerance,
            holds: residual <= tolerance,
        })
    } else {
        None
    };
    let nf = n as f64;
    Ok(EnergyReport {
        place: v.map_or_else(|| "all".to_string(), |p| p.to_string()),
        n,
        ordered,
        unordered,
        n_log_n: if n > 0 { nf * nf.ln() } else { 0.0 },
        identity,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalComparison {
    pub place: Place,
    /// `-log |res(f)|_v`: `ord_p res log p` at a prime, the archimedean
    /// `h_res` term at infinity.
    pub neg_log_res: f64,
    /// `log+ max(|sigma1|_v, |sigma2|_v)`.
    pub log_plus_moduli: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub map: String,
    pub h_res_finite: f64,
    pub h_res_archimedean: f64,
    pub h_res_total: f64,
    pub sigma1: String,
    pub sigma2: String,
    pub moduli_height: f64,
    pub local: Vec<LocalComparison>,
    /// Finite places with good reduction but a non-integral moduli point.
    pub flagged: Vec<Place>,
}

/// `slope x + intercept >= y` on every fitted row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AffineFit {
    pub slope: f64,
    pub intercept: f64,
}

fn fit_affine(data: &[(f64, f64)], force_zero_intercept: bool) -> AffineFit {
    let intercept = if force_zero_intercept {
        0.0
    } else {
        data.iter().filter(|(x, _)| *x <= 0.0).map(|&(_, y)| y).fold(0.0, f64::max)
    };
    let slope = data
        .iter()
        .filter(|(x, _)| *x > 0.0)
        .map(|&(x, y)| (y - intercept) / x)
        .fold(0.0, f64::max);
    // nudge outward so that the inequality survives rounding
    AffineFit { slope: slope * (1.0 + 1e-12), intercept: intercept * (1.0 + 1e-12) }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub rows: Vec<ComparisonRow>,
    /// Fit of `A (-log res_p) >= log+ |<f>|_p` over unflagged finite places.
    pub finite_fit: AffineFit,
    /// Fit of `A (-log res_inf) + B >= log+ |<f>|_inf`.
    pub archimedean_fit: AffineFit,
    /// Fit of `C h(<f>) + D >= h_res(f)`.
    pub global_fit: AffineFit,
    pub flagged_rows: usize,
    pub observational: bool,
}

fn log_plus_at(sigmas: &[&BigRational], v: Place) -> Result<f64> {
    Ok(match v {
        Place::Archimedean => sigmas.iter().map(|s| ln_abs_rational(&s.abs())).filter(|l| l.is_finite()).fold(0.0, f64::max),
        Place::Finite(p) => {
            let worst = sigmas
                .iter()
                .filter(|s| !s.is_zero())
                .map(|s| ord_p_rational(s, p).expect("nonzero"))
                .min()
                .unwrap_or(0);
            (-worst).max(0) as f64 * (p as f64).ln()
        }
    })
}

fn comparison_row(f: &HomogeneousLift) -> Result<ComparisonRow> {
    let f = f.normalized();
    let m = milnor_invariants(&f)?;
    let hr = h_res(&f)?;
    let report = bad_places(&f)?;
    let mut primes: Vec<u64> = report.certificates.iter().map(|c| c.p).collect();
    for s in [&m.sigma1, &m.sigma2] {
        primes.extend(prime_divisors(s.denom())?);
    }
    primes.sort_unstable();
    primes.dedup();
    let sig = [&m.sigma1, &m.sigma2];
    let mut local = vec![LocalComparison {
        place: Place::Archimedean,
        neg_log_res: hr.archimedean.value,
        log_plus_moduli: log_plus_at(&sig, Place::Archimedean)?,
    }];
    for p in primes {
        let ord = hr.per_prime.get(&p).copied().unwrap_or(0);
        local.push(LocalComparison {
            place: Place::Finite(p),
            neg_log_res: ord as f64 * (p as f64).ln(),
            log_plus_moduli: log_plus_at(&sig, Place::Finite(p))?,
        });
    }
    let flagged = local
        .iter()
        .filter(|l| l.place != Place::Archimedean && l.neg_log_res == 0.0 && l.log_plus_moduli > 0.0)
        .map(|l| l.place)
        .collect();
    Ok(ComparisonRow {
        map: f.to_string(),
        h_res_finite: hr.finite.value,
        h_res_archimedean: hr.archimedean.value,
        h_res_total: hr.total.value,
        sigma1: m.sigma1.to_string(),
        sigma2: m.sigma2.to_string(),
        moduli_height: m.moduli_height,
        local,
        flagged,
    })
}

/// Scatter data comparing `h_res` with the moduli height of quadratic maps.
pub fn comparison_scatter(maps: &[HomogeneousLift]) -> Result<ComparisonReport> {
    if let Some(f) = maps.iter().find(|f| f.degree() != 2) {
        return Err(Error::UnsupportedDegree(f.degree(), 2));
    }
    let rows: Vec<ComparisonRow> = maps.par_iter().map(comparison_row).collect::<Result<_>>()?;
    let mut finite = Vec::new();
    let mut arch = Vec::new();
    for r in &rows {
        for l in &r.local {
            match l.place {
                Place::Archimedean => arch.push((l.neg_log_res, l.log_plus_moduli)),
                Place::Finite(_) if !r.flagged.contains(&l.place) => finite.push((l.neg_log_res, l.log_plus_moduli)),
                Place::Finite(_) => {}
            }
        }
    }
    let global: Vec<(f64, f64)> = rows.iter().map(|r| (r.moduli_height, r.h_res_total)).collect();
    Ok(ComparisonReport {
        finite_fit: fit_affine(&finite, true),
        archimedean_fit: fit_affine(&arch, false),
        global_fit: fit_affine(&global, false),
        flagged_rows: rows.iter().filter(|r| !r.flagged.is_empty()).count(),
        rows,
        observational: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::{conjugate, Mobius};

    fn lift(p: &[i64], q: &[i64]) -> HomogeneousLift {
        HomogeneousLift::from_i64(p, q).unwrap()
    }

    fn z2() -> HomogeneousLift {
        lift(&[0, 0, 1], &[1, 0, 0])
    }

    fn z2m1() -> HomogeneousLift {
        lift(&[-1, 0, 1], &[1, 0, 0])
    }

    fn pt(a: i64, b: i64) -> ProjPoint {
        ProjPoint::from_i64(a, b).unwrap()
    }

    fn set(pts: &[(i64, i64)]) -> Vec<ProjPoint> {
        let mut v: Vec<ProjPoint> = pts.iter().map(|&(a, b)| pt(a, b)).collect();
        v.sort();
        v
    }

    fn found(r: &PreperiodicReport) -> Vec<ProjPoint> {
        let mut v: Vec<ProjPoint> = r.points.iter().map(|r| r.start.clone()).collect();
        v.sort();
        v
    }

    #[test]
    fn orbit_examples() {
        let r = orbit(&z2(), &pt(-1, 1), 10, 1.0).unwrap();
        assert_eq!(r.status, OrbitStatus::Preperiodic { tail: 1, cycle: 1 });
        let r = orbit(&z2m1(), &pt(0, 1), 10, 1.0).unwrap();
        assert_eq!(r.status, OrbitStatus::Preperiodic { tail: 0, cycle: 2 });
        let h = preperiodic_height_bound(&z2()).unwrap();
        let r = orbit(&z2(), &pt(2, 1), 10, h).unwrap();
        assert!(matches!(r.status, OrbitStatus::Escaped { .. }));
        let r = orbit(&z2(), &pt(2, 1), 3, 100.0).unwrap();
        assert_eq!(r.status, OrbitStatus::Undecided { budget: 3 });
        assert!(orbit(&z2(), &pt(2, 1), 0, 1.0).is_err());
    }

    #[test]
    fn orbit_json_shape() {
        let r = orbit(&z2m1(), &pt(0, 1), 10, 1.0).unwrap();
        assert_eq!(serde_json::to_string(&r.status).unwrap(), r#"{"status":"preperiodic","tail":0,"cycle":2}"#);
    }

    #[test]
    fn search_box_layout() {
        assert!(search_box(-0.5).unwrap().is_empty());
        let b = search_box(0.0).unwrap();
        assert_eq!(b, vec![pt(-1, 1), pt(0, 1), pt(1, 0), pt(1, 1)]);
        let b = search_box(2f64.ln()).unwrap();
        assert_eq!(b.len(), 8);
        assert_eq!(&b[4..], &[pt(-2, 1), pt(-1, 2), pt(1, 2), pt(2, 1)]);
        // count of coprime pairs against a direct recount
        let b = search_box(12f64.ln()).unwrap();
        let mut direct = 1;
        for a in -12i64..=12 {
            for c in 1i64..=12 {
                if a.gcd(&c) == 1 {
                    direct += 1;
                }
            }
        }
        assert_eq!(b.len(), direct);
        assert!(search_box(1e6).is_err());
    }

    #[test]
    fn preperiodic_examples() {
        let four = set(&[(0, 1), (1, 1), (-1, 1), (1, 0)]);
        let r = preperiodic_points(&z2(), 5f64.ln()).unwrap();
        assert_eq!(found(&r), four);
        assert!(r.undecided.is_empty() && r.globally_complete);
        let r = preperiodic_points(&z2m1(), 5f64.ln()).unwrap();
        assert_eq!(found(&r), four);
        for rec in &r.points {
            let OrbitStatus::Preperiodic { tail, cycle } = rec.status else { unreachable!() };
            assert!(verify_cycle(&z2m1(), &rec.start, tail, cycle));
        }
        let three = lift(&[0, 0, 3], &[1, 0, 0]);
        let r = preperiodic_points(&three, 5f64.ln()).unwrap();
        assert_eq!(found(&r), set(&[(0, 1), (1, 3), (-1, 3), (1, 0)]));
    }

    #[test]
    fn preperiodic_set_is_conjugation_equivariant() {
        let f = z2m1();
        let phi = Mobius::from_ints(1, 1, 0, 1).unwrap();
        let g = conjugate(&f, &phi);
        let pf = found(&preperiodic_points(&f, 6f64.ln()).unwrap());
        let pg = found(&preperiodic_points(&g, 8f64.ln()).unwrap());
        let mut pushed: Vec<ProjPoint> = pf.iter().map(|x| phi.apply(x)).collect();
        pushed.sort();
        assert_eq!(pushed, pg);
    }

    #[test]
    fn census_examples() {
        let c = small_height_census(&z2(), 0.0, 5f64.ln(), 30).unwrap();
        assert!(c.count >= 4);
        let c = small_height_census(&z2m1(), 0.0, 5f64.ln(), 30).unwrap();
        let pre: Vec<&ProjPoint> = c.rows.iter().filter(|r| r.preperiodic()).map(|r| &r.point).collect();
        assert_eq!(c.count, pre.len());
        assert_eq!(c.count, 4);
        assert!(c.moduli.is_some());
    }

    #[test]
    fn census_matches_brute_force_recount() {
        let f = lift(&[1, 0, 2], &[2, 0, 0]);
        let c = small_height_census(&f, 0.1, 10f64.ln(), 30).unwrap();
        // independent recount: ĥ from the defining limit d^-n h(f^n x)
        let gap = gap_bounds(&f).unwrap();
        let n = 10;
        let slack = gap.upper.abs().max(gap.lower.abs()) / 2f64.powi(n);
        let (mut certain, mut unclear) = (0, 0);
        for x in search_box(10f64.ln()).unwrap() {
            let mut y = x.clone();
            for _ in 0..n {
                y = apply_map(&f, &y);
            }
            let h = weil_height(&y) / 2f64.powi(n);
            if h + slack <= c.threshold {
                certain += 1;
            } else if h - slack <= c.threshold {
                unclear += 1;
            }
        }
        assert!(c.threshold > 0.0 && certain > 0);
        assert!(c.count >= certain && c.count <= certain + unclear, "{} vs {certain}+{unclear}", c.count);
    }

    #[test]
    fn gap_probe_examples() {
        let g = height_gap_probe(&z2(), 3f64.ln(), 30).unwrap();
        assert_eq!(g.witness, pt(-2, 1));
        assert!((g.hhat.value - 2f64.ln()).abs() < 1e-12);
        let g = height_gap_probe(&z2m1(), 3f64.ln(), 30).unwrap();
        assert!(g.certified_lower > 0.0);
        assert_eq!(height_gap_probe(&z2(), -1.0, 30), Err(Error::EmptySearch));
        assert_eq!(height_gap_probe(&z2(), 0.0, 30), Err(Error::EmptySearch));
    }

    #[test]
    fn energy_examples() {
        let e = energy_sum(&z2(), &[pt(2, 1), pt(3, 1)], None, 30).unwrap();
        assert!((e.ordered.value - 2.0 * 6f64.ln()).abs() < 1e-10);
        assert!(e.identity.as_ref().unwrap().holds);
        let e = energy_sum(&z2(), &[pt(0, 1), pt(1, 0), pt(1, 1)], None, 30).unwrap();
        assert!(e.ordered.contains(0.0));
        let pts = [pt(3, 2), pt(-5, 7), pt(2, 9), pt(11, -4), pt(1, 0)];
        let e = energy_sum(&z2m1(), &pts, Some(Place::Archimedean), 30).unwrap();
        assert!(e.ordered.value.is_finite() && e.identity.is_none());
        let e = energy_sum(&z2m1(), &pts, None, 30).unwrap();
        let id = e.identity.unwrap();
        assert!(id.holds, "{id:?}");
        assert!((e.unordered.value - id.unordered_expected.value).abs() <= id.tolerance);
        assert!(matches!(
            energy_sum(&z2(), &[pt(2, 1), pt(2, 1)], None, 10),
            Err(Error::DuplicatePoint(_))
        ));
    }

    #[test]
    fn comparison_examples() {
        let r = comparison_scatter(&[z2()]).unwrap();
        assert_eq!(r.rows[0].sigma1, "2");
        assert_eq!(r.rows[0].sigma2, "0");
        assert_eq!(r.rows[0].h_res_finite, 0.0);
        let r = comparison_scatter(&[z2m1()]).unwrap();
        assert_eq!(r.rows[0].h_res_finite, 0.0);
        assert!(comparison_scatter(&[]).unwrap().rows.is_empty());
        let cubic = lift(&[0, 0, 0, 1], &[1, 0, 0, 0]);
        assert_eq!(comparison_scatter(&[cubic]), Err(Error::UnsupportedDegree(3, 2)));
    }

    #[test]
    fn comparison_fit_dominates_rows() {
        let maps = [z2(), z2m1(), lift(&[0, 0, 3], &[1, 0, 0]), lift(&[1, 2, 5], &[3, -1, 2]), lift(&[2, 0, 1], &[0, 4, 0])];
        let r = comparison_scatter(&maps).unwrap();
        for row in &r.rows {
            let g = r.global_fit;
            assert!(g.slope * row.moduli_height + g.intercept >= row.h_res_total);
            for l in &row.local {
                let fit = if l.place == Place::Archimedean { r.archimedean_fit } else { r.finite_fit };
                if !row.flagged.contains(&l.place) {
                    assert!(fit.slope * l.neg_log_res + fit.intercept >= l.log_plus_moduli);
                }
            }
        }
    }
}
