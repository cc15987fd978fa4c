//! Weighted projective models and their Hilbert functions, computed purely
//! by counting monomials. Nothing here touches the Riemann–Roch kernel; the
//! comparison side takes `chi` values as plain data.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::arith::Rational;
use crate::enumerate::Candidate;
use crate::error::{Error, Result};

/// `P(w)` or a hypersurface `X_d ⊂ P(w)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WpsModel {
    weights: Vec<i64>,
    degree: Option<i64>,
}

impl WpsModel {
    pub fn new(mut weights: Vec<i64>, degree: Option<i64>) -> Result<Self> {
        if !(3..=5).contains(&weights.len()) {
            return Err(Error::InvalidInput(format!(
                "expected 3 to 5 weights, got {}",
                weights.len()
            )));
        }
        if weights.iter().any(|&w| w < 1) {
            return Err(Error::InvalidInput("weights must be positive".into()));
        }
        if let Some(d) = degree {
            let total: i64 = weights.iter().sum();
            if d < 2 || d >= total {
                return Err(Error::InvalidInput(format!(
                    "degree {d} must satisfy 2 <= d < {total}"
                )));
            }
        }
        weights.sort_unstable();
        Ok(WpsModel { weights, degree })
    }

    pub fn ambient(weights: &[i64]) -> Result<Self> {
        WpsModel::new(weights.to_vec(), None)
    }

    pub fn hypersurface(degree: i64, weights: &[i64]) -> Result<Self> {
        WpsModel::new(weights.to_vec(), Some(degree))
    }

    pub fn weights(&self) -> &[i64] {
        &self.weights
    }

    pub fn degree(&self) -> Option<i64> {
        self.degree
    }

    /// Dimension of the variety the model describes.
    pub fn dimension(&self) -> usize {
        self.weights.len() - 1 - usize::from(self.degree.is_some())
    }

    pub fn is_threefold(&self) -> bool {
        self.dimension() == 3
    }
}

impl fmt::Display for WpsModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w: Vec<String> = self.weights.iter().map(i64::to_string).collect();
        match self.degree {
            Some(d) => write!(f, "X_{d} in P({})", w.join(",")),
            None => write!(f, "P({})", w.join(",")),
        }
    }
}

/// Accepts `P(1,1,2,3)`, `X_6 in P(1,2,3,4,5)`, `X6 ⊂ P(...)`.
impl FromStr for WpsModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("not a model: {s:?}"));
        let s = s.trim();
        let (degree, rest) = match s.strip_prefix('X') {
            Some(tail) => {
                let tail = tail.trim_start_matches('_');
                let end = tail.find(|c: char| !c.is_ascii_digit()).ok_or_else(bad)?;
                let d: i64 = tail[..end].parse().map_err(|_| bad())?;
                let tail = tail[end..].trim_start();
                let tail = tail
                    .strip_prefix("in")
                    .or_else(|| tail.strip_prefix('⊂'))
                    .ok_or_else(bad)?;
                (Some(d), tail.trim_start())
            }
            None => (None, s),
        };
        let inner = rest
            .strip_prefix("P(")
            .and_then(|t| t.strip_suffix(')'))
            .ok_or_else(bad)?;
        let weights = parse_weights(inner)?;
        WpsModel::new(weights, degree)
    }
}

/// Comma-separated positive weights, e.g. `1,2,3,4,5`.
pub fn parse_weights(s: &str) -> Result<Vec<i64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<i64>()
                .map_err(|_| Error::Parse(format!("bad weight {t:?}")))
        })
        .collect()
}

/// Adjunction: `Σw − d`.
pub fn fano_index(model: &WpsModel) -> i64 {
    model.weights.iter().sum::<i64>() - model.degree.unwrap_or(0)
}

pub fn degree_a3(model: &WpsModel) -> Rational {
    let prod: i64 = model.weights.iter().product();
    Rational::new(model.degree.unwrap_or(1) as i128, prod as i128)
}

// Number of monomials of weighted degree `k`.
fn count_monomials(weights: &[i64], k: i64) -> i64 {
    match weights.split_first() {
        None => i64::from(k == 0),
        Some((&w, [])) => i64::from(k % w == 0),
        Some((&w, rest)) => (0..=k / w).map(|j| count_monomials(rest, k - j * w)).sum(),
    }
}

fn by_enumeration(model: &WpsModel, kmax: i64) -> Vec<i64> {
    let d = model.degree.unwrap_or(0);
    (0..=kmax)
        .map(|k| {
            let ambient = count_monomials(&model.weights, k);
            if d > 0 && k >= d {
                ambient - count_monomials(&model.weights, k - d)
            } else {
                ambient
            }
        })
        .collect()
}

fn by_series(model: &WpsModel, kmax: i64) -> Vec<i64> {
    let n = kmax as usize + 1;
    let mut c = vec![0i64; n];
    c[0] = 1;
    for &w in &model.weights {
        let w = w as usize;
        for i in w..n {
            c[i] += c[i - w];
        }
    }
    if let Some(d) = model.degree {
        let d = d as usize;
        for i in (d..n).rev() {
            c[i] -= c[i - d];
        }
    }
    c
}

/// `h^0(kA)` for `k = 0..=kmax`, computed two ways and cross-checked.
pub fn hilbert_coeffs(model: &WpsModel, kmax: i64) -> Vec<i64> {
    assert!(kmax >= 0, "kmax must be non-negative");
    let series = by_series(model, kmax);
    let direct = by_enumeration(model, kmax);
    assert_eq!(series, direct, "Hilbert series disagree for {model}");
    series
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MatchReport {
    pub index_matches: bool,
    pub degree_matches: bool,
    pub hilbert_matches: bool,
    /// Smallest `k` with `h^0(k) != chi(k)`.
    pub first_mismatch: Option<i64>,
}

impl MatchReport {
    pub fn is_full(&self) -> bool {
        self.index_matches && self.degree_matches && self.hilbert_matches
    }
}

/// Default comparison window: one Serre period past `-K`.
pub fn default_kmax(q: i64) -> i64 {
    2 * q + 5
}

/// Compares a model with given `(q, A^3, chi(0..))` data.
pub fn match_series(model: &WpsModel, q: i64, a3: Rational, chi: &[Rational]) -> MatchReport {
    let h = hilbert_coeffs(model, chi.len() as i64 - 1);
    let first_mismatch = h
        .iter()
        .zip(chi)
        .position(|(&h, &c)| Rational::from(h) != c)
        .map(|k| k as i64);
    MatchReport {
        index_matches: fano_index(model) == q,
        degree_matches: degree_a3(model) == a3,
        hilbert_matches: first_mismatch.is_none(),
        first_mismatch,
    }
}

pub fn match_candidate(model: &WpsModel, cand: &Candidate, kmax: i64) -> MatchReport {
    match_series(model, cand.q, cand.a3, &cand.chi_series(kmax))
}

/// Every candidate that fully matches the model on the default window.
pub fn matching_candidates<'a>(model: &WpsModel, cands: &'a [Candidate]) -> Vec<&'a Candidate> {
    let q = fano_index(model);
    let a3 = degree_a3(model);
    cands
        .iter()
        .filter(|c| c.q == q && c.a3 == a3)
        .filter(|c| match_candidate(model, c, default_kmax(q)).is_full())
        .collect()
}

/// The threefold models identified with candidates in the classification.
pub fn known_models() -> Vec<WpsModel> {
    let m = |s: &str| s.parse::<WpsModel>().expect("built-in model");
    vec![
        m("X_6 in P(1,2,3,4,5)"),
        m("X_6 in P(1,2,3,3,5)"),
        m("X_10 in P(1,2,3,5,7)"),
        m("P(1,1,2,3)"),
        m("X_6 in P(1,1,2,3,5)"),
        m("X_6 in P(1,2,2,3,5)"),
        m("P(1,1,1,2)"),
        m("X_4 in P(1,1,2,2,3)"),
        m("P(1,1,1,1)"),
        m("X_4 in P(1,1,1,2,3)"),
        m("X_2 in P(1,1,1,1,1)"),
        m("X_3 in P(1,1,1,1,2)"),
    ]
}
