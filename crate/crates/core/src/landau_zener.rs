//! Heat capacity of a two-level spectrum with degenerate levels, and the
//! shape of the heat-capacity curve along an avoided crossing.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Bracket for `x = beta * delta_e` when solving for the optimal gap.
pub const OPTIMAL_GAP_BRACKET: (f64, f64) = (2.0, 20.0);

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoLevelSystem {
    delta_e: f64,
    n0: u32,
    n1: u32,
    beta: f64,
}

impl TwoLevelSystem {
    pub fn new(delta_e: f64, n0: u32, n1: u32, beta: f64) -> Result<Self> {
        if !(delta_e >= 0.0) || !delta_e.is_finite() {
            return Err(Error::InvalidArgument(format!("gap {delta_e}")));
        }
        if n0 == 0 || n1 == 0 {
            return Err(Error::InvalidArgument("degeneracies must be >= 1".into()));
        }
        check_beta(beta)?;
        Ok(Self {
            delta_e,
            n0,
            n1,
            beta,
        })
    }

    pub fn delta_e(&self) -> f64 {
        self.delta_e
    }

    pub fn degeneracies(&self) -> (u32, u32) {
        (self.n0, self.n1)
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn heat_capacity(&self) -> f64 {
        lz_heat_capacity(self)
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::InvalidTemperature(beta));
    }
    Ok(())
}

/// `delta_e^2 p (1 - p)` with `p = n1 e^{-beta delta_e} / (n0 + n1 e^{-beta delta_e})`.
pub fn lz_heat_capacity(sys: &TwoLevelSystem) -> f64 {
    heat_capacity(sys.delta_e, sys.n0 as f64, sys.n1 as f64, sys.beta)
}

fn heat_capacity(delta_e: f64, n0: f64, n1: f64, beta: f64) -> f64 {
    let e = (-beta * delta_e).exp();
    let denom = n0 + n1 * e;
    delta_e * delta_e * n0 * n1 * e / (denom * denom)
}

/// `ln` of both sides of `e^x = (n1/n0) (2 + x) / (x - 2)`, subtracted.
/// Strictly increasing on `x > 2`.
fn optimality_gap(x: f64, ratio: f64) -> f64 {
    x - ratio.ln() - (2.0 + x).ln() + (x - 2.0).ln()
}

/// Gap that maximizes the two-level heat capacity at fixed `beta`.
pub fn lz_optimal_gap(n0: u32, n1: u32, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    if n0 == 0 || n1 == 0 {
        return Err(Error::InvalidArgument("degeneracies must be >= 1".into()));
    }
    let ratio = n1 as f64 / n0 as f64;
    let (mut lo, mut hi) = OPTIMAL_GAP_BRACKET;
    if optimality_gap(hi, ratio) <= 0.0 {
        return Err(Error::NoBracket { lo, hi });
    }
    // g -> -inf as x -> 2+, so only the upper end needs checking
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if optimality_gap(mid, ratio) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi) / beta)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    SingleMaximum,
    MaxMinMax,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Classification::SingleMaximum => "single_maximum",
            Classification::MaxMinMax => "max_min_max",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtremumKind {
    Max,
    Min,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Extremum {
    pub gamma: f64,
    pub kind: ExtremumKind,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LzReport {
    pub delta_e_star: f64,
    pub classification: Classification,
    pub extrema: Vec<Extremum>,
}

/// Interior extrema of a sampled curve. Flat stretches are skipped.
pub fn sampled_extrema(ys: &[f64]) -> Vec<(usize, ExtremumKind)> {
    let mut out = Vec::new();
    let mut last_sign = 0i8;
    let mut last_turn = 0usize;
    for i in 1..ys.len() {
        let d = ys[i] - ys[i - 1];
        let sign = if d > 0.0 {
            1
        } else if d < 0.0 {
            -1
        } else {
            0
        };
        if sign == 0 {
            continue;
        }
        if last_sign != 0 && sign != last_sign {
            let kind = if last_sign > 0 {
                ExtremumKind::Max
            } else {
                ExtremumKind::Min
            };
            out.push((last_turn, kind));
        }
        last_sign = sign;
        last_turn = i;
    }
    out
}

/// Checks that the gap profile has strictly increasing `gamma` and a single
/// interior minimum. Returns the index of that minimum.
fn check_unimodal(profile: &[(f64, f64)]) -> Result<usize> {
    if profile.len() < 3 {
        return Err(Error::BadProfile("need at least three samples".into()));
    }
    for w in profile.windows(2) {
        if !(w[1].0 > w[0].0) {
            return Err(Error::BadProfile(format!(
                "gamma values must increase strictly ({} then {})",
                w[0].0, w[1].0
            )));
        }
    }
    let gaps: Vec<f64> = profile.iter().map(|p| p.1).collect();
    let min_idx = gaps
        .iter()
        .enumerate()
        .fold(0, |best, (i, &g)| if g < gaps[best] { i } else { best });
    if min_idx == 0 || min_idx == gaps.len() - 1 {
        return Err(Error::BadProfile("gap minimum is not interior".into()));
    }
    let falling = gaps[..=min_idx].windows(2).all(|w| w[1] <= w[0]);
    let rising = gaps[min_idx..].windows(2).all(|w| w[1] >= w[0]);
    if !falling || !rising {
        return Err(Error::BadProfile("gap profile is not unimodal".into()));
    }
    Ok(min_idx)
}

/// Classifies the heat capacity along a sampled gap profile `(gamma, delta_e)`.
pub fn lz_classify_sweep(profile: &[(f64, f64)], n0: u32, n1: u32, beta: f64) -> Result<LzReport> {
    check_unimodal(profile)?;
    let star = lz_optimal_gap(n0, n1, beta)?;
    let min_gap = profile.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let classification = if min_gap > star {
        Classification::SingleMaximum
    } else {
        Classification::MaxMinMax
    };
    let gammas: Vec<f64> = profile.iter().map(|p| p.0).collect();
    let heat: Vec<f64> = profile
        .iter()
        .map(|&(_, de)| heat_capacity(de, n0 as f64, n1 as f64, beta))
        .collect();
    let extrema = sampled_extrema(&heat)
        .into_iter()
        .map(|(i, kind)| Extremum {
            gamma: gammas[i],
            kind,
        })
        .collect();
    Ok(LzReport {
        delta_e_star: star,
        classification,
        extrema,
    })
}

/// Parses `gamma,delta_e` lines. Blank lines and lines starting with `#`
/// are ignored.
pub fn parse_gap_profile(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |what: &str| Error::BadProfile(format!("line {}: {what}: {line:?}", k + 1));
        let mut fields = line.split(',').map(str::trim);
        let (Some(g), Some(d), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(bad("expected two comma-separated fields"));
        };
        let g: f64 = g.parse().map_err(|_| bad("unparsable gamma"))?;
        let d: f64 = d.parse().map_err(|_| bad("unparsable gap"))?;
        if !g.is_finite() || !d.is_finite() || d < 0.0 {
            return Err(bad("values must be finite with a nonnegative gap"));
        }
        out.push((g, d));
    }
    if out.is_empty() {
        return Err(Error::BadProfile("no samples".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::gibbs::gibbs;
    use crate::linalg::{eigh, HermitianOperator};

    fn v_profile(min_gap: f64) -> Vec<(f64, f64)> {
        (0..201)
            .map(|i| {
                let g = -1.0 + 0.01 * i as f64;
                (g, (min_gap * min_gap + g * g).sqrt())
            })
            .collect()
    }

    #[test]
    fn heat_capacity_limits() {
        assert_eq!(
            TwoLevelSystem::new(0.0, 1, 1, 2.0).unwrap().heat_capacity(),
            0.0
        );
        assert_eq!(
            TwoLevelSystem::new(1e3, 1, 1, 1.0).unwrap().heat_capacity(),
            0.0
        );
    }

    #[test]
    fn heat_capacity_matches_gibbs_variance() {
        for (de, beta) in [(0.3, 2.0), (1.0, 1.0), (2.5, 0.4)] {
            let spec = Arc::new(eigh(&HermitianOperator::diagonal(&[0.0, de])).unwrap());
            let var = gibbs(spec, beta).unwrap().energy_variance();
            let hc = TwoLevelSystem::new(de, 1, 1, beta).unwrap().heat_capacity();
            assert!((var - hc).abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_levels_match_gibbs_variance() {
        let spec =
            Arc::new(eigh(&HermitianOperator::diagonal(&[0.0, 0.0, 0.7, 0.7, 0.7])).unwrap());
        let var = gibbs(spec, 1.5).unwrap().energy_variance();
        let hc = TwoLevelSystem::new(0.7, 2, 3, 1.5).unwrap().heat_capacity();
        assert!((var - hc).abs() < 1e-14);
    }

    #[test]
    fn optimal_gap_constants() {
        assert!((lz_optimal_gap(1, 1, 1.0).unwrap() - 2.3994).abs() < 5e-4);
        assert!((lz_optimal_gap(2, 1, 1.0).unwrap() - 2.2278).abs() < 5e-4);
        assert!((lz_optimal_gap(1, 1, 9.0).unwrap() - 0.26660).abs() < 1e-4);
    }

    #[test]
    fn optimal_gap_is_a_local_maximum() {
        for (n0, n1, beta) in [(1, 1, 1.0), (2, 1, 3.0), (1, 5, 0.5)] {
            let star = lz_optimal_gap(n0, n1, beta).unwrap();
            let at = |d: f64| {
                TwoLevelSystem::new(d, n0, n1, beta)
                    .unwrap()
                    .heat_capacity()
            };
            assert!(at(star) >= at(star * (1.0 + 1e-3)));
            assert!(at(star) >= at(star * (1.0 - 1e-3)));
            let x = beta * star;
            let resid = x.exp() - n1 as f64 / n0 as f64 * (2.0 + x) / (x - 2.0);
            assert!(resid.abs() <= 1e-10 * x.exp());
        }
    }

    #[test]
    fn invalid_inputs() {
        assert!(TwoLevelSystem::new(-1.0, 1, 1, 1.0).is_err());
        assert!(TwoLevelSystem::new(1.0, 0, 1, 1.0).is_err());
        assert!(lz_optimal_gap(1, 1, 0.0).is_err());
        assert!(matches!(
            lz_optimal_gap(1, u32::MAX, 1.0),
            Err(Error::NoBracket { .. })
        ));
    }

    #[test]
    fn wide_minimum_gives_one_peak() {
        let beta = 9.0;
        let star = lz_optimal_gap(1, 1, beta).unwrap();
        let r = lz_classify_sweep(&v_profile(2.0 * star), 1, 1, beta).unwrap();
        assert_eq!(r.classification, Classification::SingleMaximum);
        assert_eq!(r.extrema.len(), 1);
        assert_eq!(r.extrema[0].kind, ExtremumKind::Max);
        assert!(r.extrema[0].gamma.abs() < 1e-9);
    }

    #[test]
    fn narrow_minimum_gives_two_peaks() {
        let beta = 9.0;
        let star = lz_optimal_gap(1, 1, beta).unwrap();
        let r = lz_classify_sweep(&v_profile(0.5 * star), 1, 1, beta).unwrap();
        assert_eq!(r.classification, Classification::MaxMinMax);
        let kinds: Vec<ExtremumKind> = r.extrema.iter().map(|e| e.kind).collect();
        assert_eq!(
            kinds,
            vec![ExtremumKind::Max, ExtremumKind::Min, ExtremumKind::Max]
        );
        assert!(r.extrema[1].gamma.abs() < 1e-9);
    }

    #[test]
    fn flat_or_double_dip_profiles_rejected() {
        let flat: Vec<(f64, f64)> = (0..10).map(|i| (i as f64, 1.0)).collect();
        assert!(lz_classify_sweep(&flat, 1, 1, 1.0).is_err());
        let double = vec![(0.0, 2.0), (1.0, 1.0), (2.0, 2.0), (3.0, 1.0), (4.0, 2.0)];
        assert!(lz_classify_sweep(&double, 1, 1, 1.0).is_err());
        let unordered = vec![(0.0, 2.0), (2.0, 1.0), (1.0, 2.0)];
        assert!(lz_classify_sweep(&unordered, 1, 1, 1.0).is_err());
    }

    #[test]
    fn profile_parsing() {
        let p = parse_gap_profile("# gamma,gap\n0.0, 1.0\n\n0.5,0.2\n1.0,1.0\n").unwrap();
        assert_eq!(p, vec![(0.0, 1.0), (0.5, 0.2), (1.0, 1.0)]);
        let err = parse_gap_profile("0,1\n0.5,x\n").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        assert!(parse_gap_profile("0,1,2\n")
            .unwrap_err()
            .to_string()
            .contains("line 1"));
        assert!(parse_gap_profile("0,-1\n").is_err());
        assert!(parse_gap_profile("# nothing\n").is_err());
    }
}
