//! Exhaustive candidate search for a fixed Fano index.
//!
//! For each basket of terminal points coprime to `q` with Kawamata sum below
//! 24, every admissible degree `A^3 = n/N` (`N` the lcm of the basket indices)
//! is pushed through the filter battery: degree cap, integrality and
//! vanishing of `chi(kA)` over a full period, nonnegativity, and the
//! Bogomolov–Miyaoka inequality in the form
//! `(4q - 3) q^3 A^3 <= 4 q^2 (24 - sigma)`.
//!
//! For `q >= 3` the vanishing `chi(-A) = 0` is linear in `A^3` with a nonzero
//! coefficient, so each basket admits at most one degree; the search solves
//! for it directly instead of scanning the lattice.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::arith::{lcm, Rational};
use crate::basket::{
    anticanonical_data, dims, genus, kawamata_sum, point_contribution, Basket, FanoInput,
    RiemannRoch, SingularPoint, MAX_POINT_INDEX,
};
use crate::error::{Error, Result};

/// Fano indices a Q-Fano threefold can have.
pub const FANO_INDICES: [i64; 14] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 13, 17, 19];

/// Indices covered by the default search.
pub const DEFAULT_INDEX_SET: [i64; 12] = [3, 4, 5, 6, 7, 8, 9, 10, 11, 13, 17, 19];

pub fn is_fano_index(q: i64) -> bool {
    FANO_INDICES.contains(&q)
}

/// The one `(q, basket, A^3)` triple allowed to reach the degree cap when
/// equality is restricted.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CapException {
    pub q: i64,
    pub basket: Basket,
    pub a3: Rational,
}

impl Default for CapException {
    fn default() -> Self {
        CapException {
            q: 5,
            basket: Basket::from_pairs(&[(2, 1)]).expect("valid point"),
            a3: Rational::new(1, 2),
        }
    }
}

/// Which filters run during enumeration.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterConfig {
    pub name: String,
    /// Upper bound on `-K^3`; `None` disables the cap.
    pub degree_cap: Option<Rational>,
    pub degree_cap_exception: CapException,
    /// When false, only `degree_cap_exception` may meet the cap with equality.
    pub cap_equality_admitted: bool,
    pub index_set: Vec<i64>,
    pub enforce_vanishing: bool,
    pub bm_inequality: bool,
    pub nonnegativity: bool,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            name: "default".to_string(),
            degree_cap: Some(Rational::new(125, 2)),
            degree_cap_exception: CapException::default(),
            cap_equality_admitted: true,
            index_set: DEFAULT_INDEX_SET.to_vec(),
            enforce_vanishing: true,
            bm_inequality: true,
            nonnegativity: true,
        }
    }
}

impl FilterConfig {
    /// Names accepted by [`FilterConfig::named`].
    pub const NAMES: [&'static str; 5] = [
        "default",
        "strict-cap",
        "uncapped",
        "no-bm",
        "no-nonnegativity",
    ];

    /// Named filter sets used for calibration experiments.
    ///
    /// * `default`: degree cap `125/2`, equality admitted.
    /// * `strict-cap`: only `P(1,1,1,2)` may reach the cap.
    /// * `uncapped`: no degree cap at all.
    /// * `no-bm`, `no-nonnegativity`: drop one filter from `default`.
    pub fn named(name: &str) -> Option<Self> {
        let mut c = FilterConfig::default();
        match name {
            "default" => {}
            "strict-cap" => c.cap_equality_admitted = false,
            "uncapped" => c.degree_cap = None,
            "no-bm" => c.bm_inequality = false,
            "no-nonnegativity" => c.nonnegativity = false,
            _ => return None,
        }
        c.name = name.to_string();
        Some(c)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(q) = self.index_set.iter().find(|q| !is_fano_index(**q)) {
            return Err(Error::InvalidInput(format!(
                "{q} is not a possible Fano index"
            )));
        }
        Ok(())
    }

    /// Whether `q^3 A^3` respects the degree cap.
    pub fn cap_admits(&self, q: i64, basket: &Basket, a3: Rational) -> bool {
        let Some(cap) = self.degree_cap else {
            return true;
        };
        let minus_k3 = Rational::from(q).pow(3) * a3;
        match minus_k3.cmp(&cap) {
            Ordering::Less => true,
            Ordering::Greater => false,
            Ordering::Equal => {
                let e = &self.degree_cap_exception;
                self.cap_equality_admitted || (e.q == q && &e.basket == basket && e.a3 == a3)
            }
        }
    }
}

/// One numerical candidate with all derived invariants.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Candidate {
    pub q: i64,
    pub basket: Basket,
    pub a3: Rational,
    pub sigma: Rational,
    pub minus_k3: Rational,
    pub minus_k_c2: Rational,
    /// `dim |kA|` for `k = 1..=q`; the last entry is `dim |-K|`.
    #[serde(rename = "dims")]
    pub dim_table: Vec<i64>,
    pub genus: i64,
    pub id: String,
}

impl Candidate {
    pub fn from_input(input: &FanoInput) -> Result<Self> {
        let ac = anticanonical_data(input);
        Ok(Candidate {
            q: input.q(),
            basket: input.basket().clone(),
            a3: input.a3(),
            sigma: kawamata_sum(input.basket()),
            minus_k3: ac.minus_k3,
            minus_k_c2: ac.minus_k_c2,
            dim_table: dims(input, input.q())?,
            genus: genus(input)?,
            id: candidate_id(input.q(), input.basket(), input.a3()),
        })
    }

    pub fn input(&self) -> FanoInput {
        FanoInput::new(self.q, self.basket.clone(), self.a3).expect("candidate invariants")
    }

    /// `dim |sA|` for any `s >= 0`.
    pub fn dim(&self, s: i64) -> i64 {
        if (1..=self.q).contains(&s) {
            return self.dim_table[s as usize - 1];
        }
        let chi = RiemannRoch::new(&self.input()).chi(s);
        chi.to_integer().expect("candidate chi is integral") as i64 - 1
    }

    /// `chi(kA)` for `k = 0..=kmax`.
    pub fn chi_series(&self, kmax: i64) -> Vec<Rational> {
        let rr = RiemannRoch::new(&self.input());
        (0..=kmax).map(|k| rr.chi(k)).collect()
    }

    pub fn dim_minus_k(&self) -> i64 {
        *self.dim_table.last().expect("q >= 1")
    }

    /// Canonical order: `q` ascending, degree descending, basket ascending.
    pub fn canonical_cmp(&self, other: &Self) -> Ordering {
        self.q
            .cmp(&other.q)
            .then_with(|| other.a3.cmp(&self.a3))
            .then_with(|| self.basket.cmp(&other.basket))
    }
}

pub fn candidate_id(q: i64, basket: &Basket, a3: Rational) -> String {
    let pts: Vec<String> = basket.points().iter().map(|p| p.to_string()).collect();
    format!("q{q}/{}/{a3}", pts.join(","))
}

fn admissible_points(q: i64) -> Vec<SingularPoint> {
    (2..=MAX_POINT_INDEX)
        .filter(|&r| crate::arith::gcd(q as i128, r as i128) == 1)
        .flat_map(SingularPoint::all_of_index)
        .collect()
}

/// All baskets of points coprime to `q` with Kawamata sum below 24, in
/// canonical order. Includes the empty basket.
pub fn enumerate_baskets(q: i64) -> Vec<Basket> {
    fn extend(
        pts: &[SingularPoint],
        start: usize,
        cur: &mut Vec<SingularPoint>,
        sigma: Rational,
        out: &mut Vec<Basket>,
    ) {
        out.push(Basket::new(cur.clone()));
        for (i, p) in pts.iter().enumerate().skip(start) {
            let s = sigma + p.kawamata_term();
            if s < Rational::from(24) {
                cur.push(*p);
                extend(pts, i, cur, s, out);
                cur.pop();
            }
        }
    }
    assert!(q >= 1, "Fano index must be positive");
    let pts = admissible_points(q);
    let mut out = Vec::new();
    extend(&pts, 0, &mut Vec::new(), Rational::ZERO, &mut out);
    out.sort();
    out
}

/// Upper bound on `A^3` used when scanning the degree lattice.
fn degree_bound(q: i64, basket: &Basket, config: &FilterConfig) -> Rational {
    let q3 = Rational::from(q).pow(3);
    match config.degree_cap {
        Some(cap) => cap / q3,
        // Bogomolov–Miyaoka bound; always finite since sigma < 24
        None => {
            let c2 = Rational::from(24) - kawamata_sum(basket);
            Rational::from(4) * c2 / Rational::from(q * (4 * q - 3))
        }
    }
}

/// Degrees `n/N` (`N` = lcm of the basket indices) allowed by the cap, in
/// increasing order.
pub fn degree_candidates(q: i64, basket: &Basket, config: &FilterConfig) -> Vec<Rational> {
    let n_den = basket.index_lcm();
    let bound = degree_bound(q, basket, config);
    let n_max = (bound * Rational::from_int(n_den)).floor();
    (1..=n_max)
        .map(|n| Rational::new(n, n_den))
        .filter(|&a3| config.cap_admits(q, basket, a3))
        .collect()
}

/// Period of the fractional part of `chi(kA)`.
pub fn integrality_period(input: &FanoInput) -> i64 {
    let sigma = kawamata_sum(input.basket());
    let q = input.q() as i128;
    let l = lcm(12 * input.a3().denom(), 12 * q * sigma.denom());
    let l = lcm(l, input.basket().index_lcm());
    i64::try_from(l).expect("period fits in i64")
}

/// Integrality of `chi(kA)` over a full period, vanishing on `-q < k < 0`,
/// and nonnegativity for `k >= 0` (each per the config flags).
pub fn passes_integrality(input: &FanoInput, config: &FilterConfig) -> bool {
    let rr = RiemannRoch::new(input);
    if config.enforce_vanishing && (1..input.q()).any(|k| !rr.chi(-k).is_zero()) {
        return false;
    }
    let period = integrality_period(input);
    (0..period).all(|k| {
        let v = rr.chi(k);
        v.is_integer() && !(config.nonnegativity && v.is_negative())
    })
}

/// Bogomolov–Miyaoka inequality on raw numbers.
pub fn bm_holds(q: i64, a3: Rational, sigma: Rational) -> bool {
    let c2 = Rational::from(24) - sigma;
    let lhs = Rational::from(4 * q - 3) * Rational::from(q).pow(3) * a3;
    c2.is_positive() && lhs <= Rational::from(4 * q * q) * c2
}

pub fn passes_bm(input: &FanoInput) -> bool {
    bm_holds(input.q(), input.a3(), kawamata_sum(input.basket()))
}

/// The unique `A^3` with `chi(-A) = 0`, if `q >= 3`.
pub fn degree_from_vanishing(q: i64, basket: &Basket) -> Option<Rational> {
    if q < 3 {
        return None;
    }
    let sigma = kawamata_sum(basket);
    let singular: Rational = basket
        .points()
        .iter()
        .map(|p| point_contribution(-1, q, p).expect("coprime basket"))
        .sum();
    // chi(-A) = 1 - (q-1)(q-2) A^3 / 12 - (24 - sigma) / (12 q) + singular
    let rest = Rational::ONE - (Rational::from(24) - sigma) / Rational::from(12 * q) + singular;
    Some(rest * Rational::new(12, ((q - 1) * (q - 2)) as i128))
}

fn accept(q: i64, basket: &Basket, a3: Rational, config: &FilterConfig) -> Option<Candidate> {
    let input = FanoInput::new(q, basket.clone(), a3).ok()?;
    if config.bm_inequality && !passes_bm(&input) {
        return None;
    }
    if !passes_integrality(&input, config) {
        return None;
    }
    Candidate::from_input(&input).ok()
}

/// Candidates supported on one basket, solving for the degree when possible.
pub fn candidates_for_basket(q: i64, basket: &Basket, config: &FilterConfig) -> Vec<Candidate> {
    match degree_from_vanishing(q, basket).filter(|_| config.enforce_vanishing) {
        Some(a3) => {
            let on_lattice = (a3 * Rational::from_int(basket.index_lcm())).is_integer();
            if a3.is_positive() && on_lattice && config.cap_admits(q, basket, a3) {
                accept(q, basket, a3, config).into_iter().collect()
            } else {
                Vec::new()
            }
        }
        None => scan_basket(q, basket, config),
    }
}

/// Tries every lattice degree; the reference path for [`candidates_for_basket`].
pub fn scan_basket(q: i64, basket: &Basket, config: &FilterConfig) -> Vec<Candidate> {
    degree_candidates(q, basket, config)
        .into_iter()
        .filter_map(|a3| accept(q, basket, a3, config))
        .collect()
}

/// How the per-basket work is scheduled. Output never depends on it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Schedule {
    Sequential,
    /// Uses rayon with the given number of threads (`None` = all cores).
    /// Falls back to sequential without the `parallel` feature.
    Parallel(Option<usize>),
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule::Parallel(None)
    }
}

fn run_baskets(
    work: &[(i64, Basket)],
    config: &FilterConfig,
    schedule: Schedule,
) -> Vec<Candidate> {
    let eval = |(q, b): &(i64, Basket)| candidates_for_basket(*q, b, config);
    let mut out: Vec<Candidate> = match schedule {
        Schedule::Sequential => work.iter().flat_map(eval).collect(),
        #[cfg(feature = "parallel")]
        Schedule::Parallel(jobs) => {
            use rayon::prelude::*;
            let go = || work.par_iter().flat_map_iter(eval).collect::<Vec<_>>();
            match jobs {
                Some(n) => rayon::ThreadPoolBuilder::new()
                    .num_threads(n.max(1))
                    .build()
                    .expect("thread pool")
                    .install(go),
                None => go(),
            }
        }
        #[cfg(not(feature = "parallel"))]
        Schedule::Parallel(_) => work.iter().flat_map(eval).collect(),
    };
    out.sort_by(Candidate::canonical_cmp);
    out
}

/// All candidates of index `q`, canonically sorted.
pub fn enumerate_candidates(q: i64, config: &FilterConfig) -> Vec<Candidate> {
    enumerate_candidates_with(q, config, Schedule::default())
}

pub fn enumerate_candidates_with(
    q: i64,
    config: &FilterConfig,
    schedule: Schedule,
) -> Vec<Candidate> {
    enumerate_indices(&[q], config, schedule)
}

/// Candidates for several indices at once, sharing one work pool.
pub fn enumerate_indices(qs: &[i64], config: &FilterConfig, schedule: Schedule) -> Vec<Candidate> {
    let qs: BTreeSet<i64> = qs.iter().copied().collect();
    let work: Vec<(i64, Basket)> = qs
        .into_iter()
        .flat_map(|q| enumerate_baskets(q).into_iter().map(move |b| (q, b)))
        .collect();
    run_baskets(&work, config, schedule)
}

/// Every index in the config's index set.
pub fn enumerate_all(config: &FilterConfig, schedule: Schedule) -> Vec<Candidate> {
    enumerate_indices(&config.index_set, config, schedule)
}

/// Lower bound for the genus of a degree-`n` torsion cover.
pub fn torsion_genus_bound(n: i64, g: i64) -> i64 {
    assert!(n >= 1, "cover degree must be positive");
    n * (g - 1) - 3
}

/// Largest integer strictly below `-K^3 / 2 + 2`.
pub fn genus_degree_bound(minus_k3: Rational) -> i64 {
    let y = minus_k3 / Rational::from(2) + Rational::from(2);
    (y.ceil() - 1) as i64
}
