//! Global canonical height as a sum of local heights over the places that
//! can contribute, and the global pairing identity.

use serde::Serialize;

use crate::arith::{ln_abs, prime_divisors};
use crate::certified::CertifiedValue;
use crate::error::{Error, Result};
use crate::local::{green_pairing, hom_local_height, step_error_constants};
use crate::maps::{apply_map, HomogeneousLift, Place, ProjPoint};

/// Local contribution of one place.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlaceTerm {
    pub place: Place,
    #[serde(flatten)]
    pub height: CertifiedValue,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeightBreakdown {
    pub point: ProjPoint,
    pub total: CertifiedValue,
    pub per_place: Vec<PlaceTerm>,
}

/// `log max(|x0|, |x1|)` of the coprime representative.
pub fn weil_height(x: &ProjPoint) -> f64 {
    ln_abs(&x.naive_size())
}

/// Infinity followed by the primes dividing the resultant of the canonical lift.
pub fn bad_places_of(f: &HomogeneousLift) -> Result<Vec<Place>> {
    let f = f.normalized();
    let mut places = vec![Place::Archimedean];
    places.extend(prime_divisors(f.resultant())?.into_iter().map(Place::Finite));
    Ok(places)
}

pub fn canonical_height(f: &HomogeneousLift, x: &ProjPoint, n_iter: usize) -> Result<HeightBreakdown> {
    let f = f.normalized();
    let places = bad_places_of(&f)?;
    canonical_height_at(&f, x, n_iter, &places)
}

// `places` must contain every place where the canonical lift has bad reduction.
pub(crate) fn canonical_height_at(
    f: &HomogeneousLift,
    x: &ProjPoint,
    n_iter: usize,
    places: &[Place],
) -> Result<HeightBreakdown> {
    let xt = x.as_rationals();
    let mut per_place = Vec::with_capacity(places.len());
    for &v in places {
        let h = hom_local_height(f, &xt, v, n_iter)?;
        per_place.push(PlaceTerm { place: v, height: h });
    }
    let total = CertifiedValue::sum(per_place.iter().map(|t| t.height));
    Ok(HeightBreakdown { point: x.clone(), total, per_place })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FunctionalCheck {
    pub h_image: CertifiedValue,
    pub h_scaled: CertifiedValue,
    pub residual: f64,
    pub tolerance: f64,
}

impl FunctionalCheck {
    pub fn holds(&self) -> bool {
        self.residual <= self.tolerance
    }
}

/// Compares `ĥ(f(x))` with `d ĥ(x)`; the tolerance is the combined error,
/// at most `(d+1)` times the larger of the two radii.
pub fn functional_check(f: &HomogeneousLift, x: &ProjPoint, n_iter: usize) -> Result<FunctionalCheck> {
    let f = f.normalized();
    let places = bad_places_of(&f)?;
    let d = f.degree() as f64;
    let hx = canonical_height_at(&f, x, n_iter, &places)?.total;
    let hfx = canonical_height_at(&f, &apply_map(&f, x), n_iter, &places)?.total;
    let scaled = hx.scale(d);
    let residual = (hfx.value - scaled.value).abs();
    let tolerance = hfx.err + scaled.err + 4.0 * f64::EPSILON * hfx.value.abs().max(scaled.value.abs());
    Ok(FunctionalCheck { h_image: hfx, h_scaled: scaled, residual, tolerance })
}

/// Places where `g_v(x, y)` can be nonzero: infinity, primes dividing the
/// resultant, and primes dividing the wedge of the coprime lifts.
pub fn pairing_places(f: &HomogeneousLift, x: &ProjPoint, y: &ProjPoint) -> Result<Vec<Place>> {
    let mut places = bad_places_of(f)?;
    for p in prime_divisors(&x.wedge(y))? {
        if !places.contains(&Place::Finite(p)) {
            places.push(Place::Finite(p));
        }
    }
    places[1..].sort();
    Ok(places)
}

/// Local pairings at every place where they can be nonzero.
pub fn global_pairing(
    f: &HomogeneousLift,
    x: &ProjPoint,
    y: &ProjPoint,
    n_iter: usize,
) -> Result<Vec<PlaceTerm>> {
    if x == y {
        return Err(Error::DiagonalPairing);
    }
    let f = f.normalized();
    pairing_places(&f, x, y)?
        .into_iter()
        .map(|v| Ok(PlaceTerm { place: v, height: green_pairing(&f, x, y, v, n_iter)? }))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairingCheck {
    pub pairing_sum: CertifiedValue,
    pub height_sum: CertifiedValue,
    pub residual: f64,
    pub tolerance: f64,
}

impl PairingCheck {
    pub fn holds(&self) -> bool {
        self.residual <= self.tolerance
    }
}

/// `|sum_v g_v(x, y) - ĥ(x) - ĥ(y)|`.
pub fn pairing_identity_check(
    f: &HomogeneousLift,
    x: &ProjPoint,
    y: &ProjPoint,
    n_iter: usize,
) -> Result<PairingCheck> {
    let f = f.normalized();
    let terms = global_pairing(&f, x, y, n_iter)?;
    let pairing_sum = CertifiedValue::sum(terms.iter().map(|t| t.height));
    let places = bad_places_of(&f)?;
    let hx = canonical_height_at(&f, x, n_iter, &places)?.total;
    let hy = canonical_height_at(&f, y, n_iter, &places)?.total;
    let height_sum = hx + hy;
    let residual = (pairing_sum.value - height_sum.value).abs();
    // the wedge and resultant terms cancel by the product formula, so the
    // only discrepancy is floating-point rounding in the sums
    let slack = 16.0 * f64::EPSILON * terms.iter().map(|t| t.height.value.abs()).sum::<f64>().max(1.0);
    let tolerance = pairing_sum.err + height_sum.err + slack;
    Ok(PairingCheck { pairing_sum, height_sum, residual, tolerance })
}

/// Certified interval containing `ĥ(x) - h(x)` for every point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapBounds {
    pub lower: f64,
    pub upper: f64,
}

impl GapBounds {
    /// Largest Weil height a point of canonical height zero can have.
    pub fn preperiodic_height_bound(&self) -> f64 {
        (-self.lower).max(0.0)
    }
}

pub fn gap_bounds(f: &HomogeneousLift) -> Result<GapBounds> {
    let f = f.normalized();
    let d = f.degree() as f64;
    let (mut lower, mut upper) = (0.0, 0.0);
    for v in bad_places_of(&f)? {
        let c = step_error_constants(&f, v);
        lower += c.lower;
        upper += c.upper;
    }
    let pad = 1e-12 * (1.0 + lower.abs() + upper.abs());
    Ok(GapBounds { lower: lower / (d - 1.0) - pad, upper: upper / (d - 1.0) + pad })
}
