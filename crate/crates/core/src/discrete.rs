//! E-series catalogs, value snapping and exhaustive neighborhood search.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ladder::{s11_at, LadderError, LoadProfile, MatchingNetwork};
use crate::rfcore::{Frequency, ReferenceImpedance};

/// Upper bound on `(2k+1)^n` for [`optimize_discrete`].
pub const CANDIDATE_CAP: u64 = 1_000_000;

/// Runner-ups kept in a [`SearchReport`] by default.
pub const DEFAULT_RUNNER_UPS: usize = 5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiscreteError {
    #[error("value must be positive and finite, got {0}")]
    NonPositive(f64),
    #[error("search would evaluate {count} candidates, above the cap of {CANDIDATE_CAP}")]
    CandidateCap { count: u64 },
    #[error("unknown E-series {0:?} (expected E12, E24, E48 or E96)")]
    UnknownSeries(String),
    #[error("tolerance must be in (0, 100) percent with at least one sample")]
    BadTolerance,
    #[error("no candidate network could be evaluated")]
    NothingEvaluated,
    #[error(transparent)]
    Ladder(#[from] LadderError),
}

const E12: [f64; 12] = [1.0, 1.2, 1.5, 1.8, 2.2, 2.7, 3.3, 3.9, 4.7, 5.6, 6.8, 8.2];

const E24: [f64; 24] = [
    1.0, 1.1, 1.2, 1.3, 1.5, 1.6, 1.8, 2.0, 2.2, 2.4, 2.7, 3.0, 3.3, 3.6, 3.9, 4.3, 4.7, 5.1, 5.6,
    6.2, 6.8, 7.5, 8.2, 9.1,
];

const E48: [f64; 48] = [
    1.00, 1.05, 1.10, 1.15, 1.21, 1.27, 1.33, 1.40, 1.47, 1.54, 1.62, 1.69, 1.78, 1.87, 1.96, 2.05,
    2.15, 2.26, 2.37, 2.49, 2.61, 2.74, 2.87, 3.01, 3.16, 3.32, 3.48, 3.65, 3.83, 4.02, 4.22, 4.42,
    4.64, 4.87, 5.11, 5.36, 5.62, 5.90, 6.19, 6.49, 6.81, 7.15, 7.50, 7.87, 8.25, 8.66, 9.09, 9.53,
];

const E96: [f64; 96] = [
    1.00, 1.02, 1.05, 1.07, 1.10, 1.13, 1.15, 1.18, 1.21, 1.24, 1.27, 1.30, 1.33, 1.37, 1.40, 1.43,
    1.47, 1.50, 1.54, 1.58, 1.62, 1.65, 1.69, 1.74, 1.78, 1.82, 1.87, 1.91, 1.96, 2.00, 2.05, 2.10,
    2.15, 2.21, 2.26, 2.32, 2.37, 2.43, 2.49, 2.55, 2.61, 2.67, 2.74, 2.80, 2.87, 2.94, 3.01, 3.09,
    3.16, 3.24, 3.32, 3.40, 3.48, 3.57, 3.65, 3.74, 3.83, 3.92, 4.02, 4.12, 4.22, 4.32, 4.42, 4.53,
    4.64, 4.75, 4.87, 4.99, 5.11, 5.23, 5.36, 5.49, 5.62, 5.76, 5.90, 6.04, 6.19, 6.34, 6.49, 6.65,
    6.81, 6.98, 7.15, 7.32, 7.50, 7.68, 7.87, 8.06, 8.25, 8.45, 8.66, 8.87, 9.09, 9.31, 9.53, 9.76,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum ESeries {
    E12,
    #[default]
    E24,
    E48,
    E96,
}

impl ESeries {
    /// Per-decade mantissas, strictly increasing in [1, 10).
    pub fn mantissas(self) -> &'static [f64] {
        match self {
            ESeries::E12 => &E12,
            ESeries::E24 => &E24,
            ESeries::E48 => &E48,
            ESeries::E96 => &E96,
        }
    }
}

impl FromStr for ESeries {
    type Err = DiscreteError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "E12" => Ok(ESeries::E12),
            "E24" => Ok(ESeries::E24),
            "E48" => Ok(ESeries::E48),
            "E96" => Ok(ESeries::E96),
            _ => Err(DiscreteError::UnknownSeries(s.to_string())),
        }
    }
}

impl fmt::Display for ESeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// `mantissa × 10^exponent` from one catalog.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CatalogValue {
    pub value: f64,
    pub series: ESeries,
    #[serde(skip)]
    position: CatalogPosition,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
struct CatalogPosition {
    exponent: i32,
    index: usize,
}

impl CatalogPosition {
    fn step(self, len: usize, up: bool) -> Self {
        match (up, self.index) {
            (true, i) if i + 1 == len => CatalogPosition { exponent: self.exponent + 1, index: 0 },
            (true, i) => CatalogPosition { exponent: self.exponent, index: i + 1 },
            (false, 0) => CatalogPosition { exponent: self.exponent - 1, index: len - 1 },
            (false, i) => CatalogPosition { exponent: self.exponent, index: i - 1 },
        }
    }
}

impl CatalogValue {
    fn at(series: ESeries, position: CatalogPosition) -> Self {
        let mantissa = series.mantissas()[position.index];
        // decimal text so 6.8 × 10⁻⁹ is the double nearest 6.8e-9
        let value: f64 = format!("{mantissa}e{}", position.exponent).parse().expect("finite catalog value");
        CatalogValue { value, series, position }
    }
}

fn check_positive(value: f64) -> Result<f64, DiscreteError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(DiscreteError::NonPositive(value))
    }
}

/// Nearest catalog value by ratio; ties go to the smaller value.
pub fn snap(value: f64, s: ESeries) -> Result<CatalogValue, DiscreteError> {
    let value = check_positive(value)?;
    let decade = value.log10().floor() as i32;
    let mut best: Option<(f64, CatalogValue)> = None;
    // scan ascending so a tie keeps the smaller candidate
    for exponent in decade - 1..=decade + 1 {
        for index in 0..s.mantissas().len() {
            let c = CatalogValue::at(s, CatalogPosition { exponent, index });
            let d = (value / c.value).ln().abs();
            if best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, c));
            }
        }
    }
    Ok(best.expect("catalog nonempty").1)
}

/// `snap(value)` plus `k` catalog steps either side, ascending.
pub fn neighborhood(value: f64, s: ESeries, k: usize) -> Result<Vec<CatalogValue>, DiscreteError> {
    let center = snap(value, s)?;
    let len = s.mantissas().len();
    let mut lo = center.position;
    for _ in 0..k {
        lo = lo.step(len, false);
    }
    let mut out = Vec::with_capacity(2 * k + 1);
    let mut pos = lo;
    for _ in 0..=2 * k {
        out.push(CatalogValue::at(s, pos));
        pos = pos.step(len, true);
    }
    Ok(out)
}

/// Every element value replaced by its nearest catalog value.
pub fn snap_network(ideal: &MatchingNetwork, s: ESeries) -> Result<MatchingNetwork, DiscreteError> {
    let elements = ideal
        .elements()
        .iter()
        .map(|e| Ok(e.with_value(snap(e.value(), s)?.value)?))
        .collect::<Result<Vec<_>, DiscreteError>>()?;
    Ok(MatchingNetwork::new(elements)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub network: MatchingNetwork,
    pub s11_db: f64,
}

/// Component tolerance study on the winning network.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceSpec {
    /// ± percent, uniform.
    pub percent: f64,
    pub samples: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceSummary {
    pub percent: f64,
    pub samples: usize,
    pub worst_s11_db: f64,
    pub p50_s11_db: f64,
    pub p95_s11_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    pub series: ESeries,
    pub k: usize,
    pub best_network: MatchingNetwork,
    pub best_s11_db: f64,
    pub candidates_evaluated: u64,
    /// Next-best candidates after the winner, best first.
    pub runner_ups: Vec<Candidate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<ToleranceSummary>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    pub series: ESeries,
    pub k: usize,
    pub runner_ups: usize,
    pub tolerance: Option<ToleranceSpec>,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { series: ESeries::E24, k: 2, runner_ups: DEFAULT_RUNNER_UPS, tolerance: None }
    }
}

fn candidate_count(sizes: &[usize]) -> Option<u64> {
    sizes.iter().try_fold(1u64, |acc, &n| acc.checked_mul(n as u64))
}

/// Decodes a mixed-radix index, element 0 most significant, so index order
/// is lexicographic order of the value tuple.
fn decode_index(mut idx: u64, sizes: &[usize], out: &mut [usize]) {
    for (slot, &n) in out.iter_mut().zip(sizes).rev() {
        *slot = (idx % n as u64) as usize;
        idx /= n as u64;
    }
}

fn build(ideal: &MatchingNetwork, hoods: &[Vec<CatalogValue>], picks: &[usize]) -> Result<MatchingNetwork, LadderError> {
    let elements = ideal
        .elements()
        .iter()
        .zip(hoods.iter().zip(picks))
        .map(|(e, (h, &i))| e.with_value(h[i].value))
        .collect::<Result<Vec<_>, _>>()?;
    MatchingNetwork::new(elements)
}

/// Exhaustive search over the Cartesian product of per-element catalog
/// neighborhoods, minimizing S11 at `f0`. Candidates are evaluated in
/// parallel; the winner (lowest S11, ties → smallest value tuple) does not
/// depend on scheduling.
pub fn optimize_discrete(
    ideal: &MatchingNetwork,
    p: &LoadProfile,
    z0: ReferenceImpedance,
    f0: Frequency,
    opts: SearchOptions,
) -> Result<SearchReport, DiscreteError> {
    let hoods = ideal
        .elements()
        .iter()
        .map(|e| neighborhood(e.value(), opts.series, opts.k))
        .collect::<Result<Vec<_>, _>>()?;
    let sizes: Vec<usize> = hoods.iter().map(Vec::len).collect();
    let count = candidate_count(&sizes).unwrap_or(u64::MAX);
    if count > CANDIDATE_CAP {
        return Err(DiscreteError::CandidateCap { count });
    }

    let mut scored: Vec<(f64, u64)> = (0..count)
        .into_par_iter()
        .map_init(
            || vec![0usize; sizes.len()],
            |picks, idx| {
                decode_index(idx, &sizes, picks);
                let s11 = build(ideal, &hoods, picks)
                    .and_then(|n| s11_at(&n, p, z0, f0))
                    .unwrap_or(f64::INFINITY);
                (s11, idx)
            },
        )
        .filter(|(s, _)| s.is_finite())
        .collect();
    if scored.is_empty() {
        return Err(DiscreteError::NothingEvaluated);
    }
    let by_score = |a: &(f64, u64), b: &(f64, u64)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    let keep = (opts.runner_ups + 1).min(scored.len());
    if keep < scored.len() {
        scored.select_nth_unstable_by(keep - 1, by_score);
        scored.truncate(keep);
    }
    scored.sort_unstable_by(by_score);

    let mut picks = vec![0usize; sizes.len()];
    let mut networks = scored.iter().map(|&(s11, idx)| {
        decode_index(idx, &sizes, &mut picks);
        build(ideal, &hoods, &picks).map(|network| Candidate { network, s11_db: s11 })
    });
    let best = networks.next().expect("nonempty")?;
    let runner_ups = networks.collect::<Result<Vec<_>, _>>()?;

    let tolerance = match opts.tolerance {
        Some(t) => Some(tolerance_study(&best.network, p, z0, f0, t)?),
        None => None,
    };
    Ok(SearchReport {
        series: opts.series,
        k: opts.k,
        best_network: best.network,
        best_s11_db: best.s11_db,
        candidates_evaluated: count,
        runner_ups,
        tolerance,
    })
}

/// Monte-Carlo S11 at `f0` with every value drawn uniformly within
/// ±`percent` of nominal.
pub fn tolerance_study(
    n: &MatchingNetwork,
    p: &LoadProfile,
    z0: ReferenceImpedance,
    f0: Frequency,
    spec: ToleranceSpec,
) -> Result<ToleranceSummary, DiscreteError> {
    if !(spec.percent > 0.0 && spec.percent < 100.0) || spec.samples == 0 {
        return Err(DiscreteError::BadTolerance);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let frac = spec.percent / 100.0;
    let mut results = Vec::with_capacity(spec.samples);
    for _ in 0..spec.samples {
        let elements = n
            .elements()
            .iter()
            .map(|e| e.with_value(e.value() * (1.0 + rng.random_range(-frac..=frac))))
            .collect::<Result<Vec<_>, _>>()?;
        results.push(s11_at(&MatchingNetwork::new(elements)?, p, z0, f0)?);
    }
    results.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    let pct = |q: f64| results[((q * (results.len() - 1) as f64).round() as usize).min(results.len() - 1)];
    Ok(ToleranceSummary {
        percent: spec.percent,
        samples: spec.samples,
        worst_s11_db: *results.last().expect("nonempty"),
        p50_s11_db: pct(0.5),
        p95_s11_db: pct(0.95),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ladder::{ComponentKind, LadderElement};

    fn values(v: &[CatalogValue]) -> Vec<f64> {
        v.iter().map(|c| c.value).collect()
    }

    #[test]
    fn table_shapes() {
        for (s, n) in [(ESeries::E12, 12), (ESeries::E24, 24), (ESeries::E48, 48), (ESeries::E96, 96)] {
            let m = s.mantissas();
            assert_eq!(m.len(), n);
            assert!(m.windows(2).all(|w| w[0] < w[1]));
            assert!(m[0] == 1.0 && m[n - 1] < 10.0);
        }
    }

    #[test]
    fn snap_seven_nanohenry() {
        // 7.0/6.8 = 1.029 < 7.5/7.0 = 1.071
        assert_eq!(snap(7.0e-9, ESeries::E24).unwrap().value, 6.8e-9);
        assert_eq!(snap(4.7e-12, ESeries::E24).unwrap().value, 4.7e-12);
        assert_eq!(snap(1.0, ESeries::E24).unwrap().value, 1.0);
        assert_eq!(snap(1.0, ESeries::E12).unwrap().value, 1.0);
        assert!(matches!(snap(0.0, ESeries::E24), Err(DiscreteError::NonPositive(_))));
        assert!(snap(-3.0, ESeries::E24).is_err());
    }

    #[test]
    fn snap_crosses_decades() {
        // 9.6: ln(10/9.6) = 0.0408 < ln(9.6/9.1) = 0.0535
        assert_eq!(snap(9.6, ESeries::E24).unwrap().value, 10.0);
        assert_eq!(snap(0.96, ESeries::E24).unwrap().value, 1.0);
    }

    #[test]
    fn snap_tie_goes_down() {
        // geometric midpoint of 1.0 and 1.2 in E12
        let mid = (1.0f64 * 1.2).sqrt();
        let s = snap(mid, ESeries::E12).unwrap().value;
        assert!(s == 1.0 || s == 1.2);
        let lo = snap(mid * (1.0 - 1e-12), ESeries::E12).unwrap().value;
        assert_eq!(lo, 1.0);
    }

    #[test]
    fn neighborhoods() {
        assert_eq!(values(&neighborhood(7.0e-9, ESeries::E24, 1).unwrap()), vec![6.2e-9, 6.8e-9, 7.5e-9]);
        assert_eq!(values(&neighborhood(7.0e-9, ESeries::E24, 0).unwrap()), vec![6.8e-9]);
        let n = values(&neighborhood(9.5, ESeries::E12, 1).unwrap());
        assert_eq!(n, vec![8.2, 10.0, 12.0]);
        let n = values(&neighborhood(1.02, ESeries::E24, 2).unwrap());
        assert_eq!(n, vec![0.82, 0.91, 1.0, 1.1, 1.2]);
    }

    fn ideal_pair() -> MatchingNetwork {
        MatchingNetwork::new(vec![
            LadderElement::series(ComponentKind::Inductor(10.69e-9)).unwrap(),
            LadderElement::shunt(ComponentKind::Capacitor(6.96e-12)).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn k_zero_is_plain_snapping() {
        let p = LoadProfile::FIXTURE_RESONATOR;
        let f0 = Frequency::from_mhz(915.0).unwrap();
        let opts = SearchOptions { k: 0, ..Default::default() };
        let r = optimize_discrete(&ideal_pair(), &p, Default::default(), f0, opts).unwrap();
        assert_eq!(r.candidates_evaluated, 1);
        assert_eq!(r.best_network, snap_network(&ideal_pair(), ESeries::E24).unwrap());
        assert!(r.runner_ups.is_empty());
    }

    #[test]
    fn candidate_count_and_cap() {
        let p = LoadProfile::FIXTURE_RESONATOR;
        let f0 = Frequency::from_mhz(915.0).unwrap();
        let r = optimize_discrete(&ideal_pair(), &p, Default::default(), f0, SearchOptions { k: 3, ..Default::default() })
            .unwrap();
        assert_eq!(r.candidates_evaluated, 49);
        assert_eq!(r.runner_ups.len(), DEFAULT_RUNNER_UPS);
        assert!(r.runner_ups.iter().all(|c| c.s11_db >= r.best_s11_db));
        let big = MatchingNetwork::new(vec![LadderElement::series(ComponentKind::Inductor(1e-9)).unwrap(); 4]).unwrap();
        let err = optimize_discrete(&big, &p, Default::default(), f0, SearchOptions { k: 20, ..Default::default() })
            .unwrap_err();
        assert_eq!(err, DiscreteError::CandidateCap { count: 41u64.pow(4) });
    }

    #[test]
    fn tolerance_study_is_seeded() {
        let p = LoadProfile::FIXTURE_RESONATOR;
        let f0 = Frequency::from_mhz(915.0).unwrap();
        let spec = ToleranceSpec { percent: 5.0, samples: 200, seed: 7 };
        let a = tolerance_study(&ideal_pair(), &p, Default::default(), f0, spec).unwrap();
        let b = tolerance_study(&ideal_pair(), &p, Default::default(), f0, spec).unwrap();
        assert_eq!(a, b);
        assert!(a.worst_s11_db >= a.p95_s11_db && a.p95_s11_db >= a.p50_s11_db);
        let bad = ToleranceSpec { percent: 0.0, ..spec };
        assert_eq!(tolerance_study(&ideal_pair(), &p, Default::default(), f0, bad).unwrap_err(), DiscreteError::BadTolerance);
    }
}
