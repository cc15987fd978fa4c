//! Terminal quotient singularities, baskets, and the orbifold Riemann–Roch
//! kernel for a Weil divisor class `A` with `-K = qA`.
//!
//! A point of type `1/r(a, -a, 1)` contributes to `chi(kA)` through the local
//! class `i = -k * q^{-1} mod r` of `kA`:
//!
//! ```text
//! c_P(k) = -i (r^2 - 1) / (12 r) + sum_{j=1}^{i-1} (j a mod r)(r - (j a mod r)) / (2 r)
//! ```
//!
//! and globally
//!
//! ```text
//! chi(kA) = 1 + k (k + q)(2k + q) A^3 / 12 + k (24 - sigma) / (12 q) + sum_P c_P(k)
//! ```
//!
//! where `sigma = sum (r - 1/r)` is the Kawamata sum of the basket.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::arith::{canonical_orientation, gcd, lcm, mod_inverse, modulo, Rational};
use crate::error::{Error, Result};

/// Largest point index that can occur: `r - 1/r < 24` forces `r <= 24`.
pub const MAX_POINT_INDEX: i64 = 24;

/// A terminal cyclic quotient singularity `1/r(a, -a, 1)` with `a <= r/2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "(i64, i64)", into = "(i64, i64)")]
pub struct SingularPoint {
    r: i64,
    a: i64,
}

impl SingularPoint {
    /// Builds the point, reducing `a` to its canonical orientation.
    pub fn new(r: i64, a: i64) -> Result<Self> {
        if r < 2 {
            return Err(Error::InvalidInput(format!("point index {r} must be >= 2")));
        }
        let a = canonical_orientation(a, r)?;
        Ok(SingularPoint { r, a })
    }

    pub fn index(&self) -> i64 {
        self.r
    }

    pub fn orientation(&self) -> i64 {
        self.a
    }

    /// `r - 1/r`
    pub fn kawamata_term(&self) -> Rational {
        let r = self.r as i128;
        Rational::new(r * r - 1, r)
    }

    /// All points of index `r`, one per orientation class.
    pub fn all_of_index(r: i64) -> impl Iterator<Item = SingularPoint> {
        (1..=r / 2)
            .filter(move |&a| gcd(a as i128, r as i128) == 1)
            .map(move |a| SingularPoint { r, a })
    }
}

impl TryFrom<(i64, i64)> for SingularPoint {
    type Error = Error;
    fn try_from((r, a): (i64, i64)) -> Result<Self> {
        SingularPoint::new(r, a)
    }
}

impl From<SingularPoint> for (i64, i64) {
    fn from(p: SingularPoint) -> Self {
        (p.r, p.a)
    }
}

impl fmt::Display for SingularPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.r, self.a)
    }
}

/// A multiset of singular points kept sorted by `(r, a)`.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "Vec<SingularPoint>", into = "Vec<SingularPoint>")]
pub struct Basket {
    points: Vec<SingularPoint>,
}

impl Basket {
    pub fn new(mut points: Vec<SingularPoint>) -> Self {
        points.sort();
        Basket { points }
    }

    pub fn empty() -> Self {
        Basket::default()
    }

    /// Convenience constructor from `(r, a)` pairs.
    pub fn from_pairs(pairs: &[(i64, i64)]) -> Result<Self> {
        pairs
            .iter()
            .map(|&(r, a)| SingularPoint::new(r, a))
            .collect::<Result<Vec<_>>>()
            .map(Basket::new)
    }

    pub fn points(&self) -> &[SingularPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Sorted point indices with orientations erased.
    pub fn indices(&self) -> Vec<i64> {
        self.points.iter().map(|p| p.r).collect()
    }

    /// lcm of the point indices (1 for the empty basket).
    pub fn index_lcm(&self) -> i128 {
        self.points.iter().fold(1, |acc, p| lcm(acc, p.r as i128))
    }

    /// Renders the index multiset as in `(2,4,5)`.
    pub fn index_string(&self) -> String {
        let idx: Vec<String> = self.points.iter().map(|p| p.r.to_string()).collect();
        format!("({})", idx.join(","))
    }
}

impl From<Vec<SingularPoint>> for Basket {
    fn from(points: Vec<SingularPoint>) -> Self {
        Basket::new(points)
    }
}

impl From<Basket> for Vec<SingularPoint> {
    fn from(b: Basket) -> Self {
        b.points
    }
}

impl fmt::Display for Basket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.points.iter().map(|p| p.to_string()).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

impl FromStr for Basket {
    type Err = Error;

    /// Parses `[2:1, 4:1, 5:2]`; the brackets are optional.
    fn from_str(s: &str) -> Result<Self> {
        let inner = s
            .trim()
            .trim_start_matches('[')
            .trim_end_matches(']')
            .trim();
        if inner.is_empty() {
            return Ok(Basket::empty());
        }
        inner
            .split(',')
            .map(|tok| {
                let (r, a) = tok
                    .trim()
                    .split_once(':')
                    .ok_or_else(|| Error::Parse(format!("bad basket point {tok:?}")))?;
                let r = r
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad index in {tok:?}")))?;
                let a = a
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad orientation in {tok:?}")))?;
                SingularPoint::new(r, a)
            })
            .collect::<Result<Vec<_>>>()
            .map(Basket::new)
    }
}

/// Kawamata sum `sigma = sum (r - 1/r)`.
pub fn kawamata_sum(basket: &Basket) -> Rational {
    basket.points.iter().map(SingularPoint::kawamata_term).sum()
}

/// Numerical data `(q, basket, A^3)` of a would-be Q-Fano threefold.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FanoInput {
    q: i64,
    basket: Basket,
    a3: Rational,
}

impl FanoInput {
    pub fn new(q: i64, basket: Basket, a3: Rational) -> Result<Self> {
        if q < 1 {
            return Err(Error::InvalidInput(format!(
                "Fano index {q} must be positive"
            )));
        }
        if !a3.is_positive() {
            return Err(Error::InvalidInput(format!("degree {a3} must be positive")));
        }
        if let Some(p) = basket
            .points
            .iter()
            .find(|p| gcd(q as i128, p.r as i128) != 1)
        {
            return Err(Error::IndexNotCoprime { q, r: p.r });
        }
        Ok(FanoInput { q, basket, a3 })
    }

    pub fn q(&self) -> i64 {
        self.q
    }

    pub fn basket(&self) -> &Basket {
        &self.basket
    }

    pub fn a3(&self) -> Rational {
        self.a3
    }
}

/// Class of `kA` at `p`, as an exponent of `K`: `(-k * q^{-1}) mod r`.
pub fn local_index(k: i64, q: i64, p: &SingularPoint) -> Result<i64> {
    let inv = mod_inverse(q, p.r).map_err(|_| Error::IndexNotCoprime { q, r: p.r })?;
    Ok(modulo(-modulo(k, p.r) * inv.value(), p.r))
}

fn contribution_for_class(i: i64, p: &SingularPoint) -> Rational {
    let r = p.r as i128;
    let mut c = Rational::new(-(i as i128) * (r * r - 1), 12 * r);
    for j in 1..i {
        let b = modulo(j * p.a, p.r) as i128;
        c = c + Rational::new(b * (r - b), 2 * r);
    }
    c
}

/// Local correction of `p` to `chi(kA)`.
pub fn point_contribution(k: i64, q: i64, p: &SingularPoint) -> Result<Rational> {
    Ok(contribution_for_class(local_index(k, q, p)?, p))
}

/// [`point_contribution`] with the orientation `a` taken literally instead of
/// canonicalized; `a` and `r - a` give the same value.
pub fn point_contribution_oriented(k: i64, q: i64, r: i64, a: i64) -> Result<Rational> {
    let canonical = SingularPoint::new(r, a)?;
    let p = SingularPoint { r, a: modulo(a, r) };
    Ok(contribution_for_class(local_index(k, q, &canonical)?, &p))
}

/// Riemann–Roch evaluator with the periodic point corrections tabulated.
#[derive(Clone, Debug)]
pub struct RiemannRoch {
    q: i64,
    a3: Rational,
    /// `(24 - sigma) / (12 q)`
    linear: Rational,
    /// `(r, table[k mod r])` per point
    tables: Vec<(i64, Vec<Rational>)>,
}

impl RiemannRoch {
    pub fn new(input: &FanoInput) -> Self {
        let sigma = kawamata_sum(&input.basket);
        let linear = (Rational::from(24) - sigma) / Rational::from(12 * input.q);
        let tables = input
            .basket
            .points
            .iter()
            .map(|p| {
                let table = (0..p.r)
                    .map(|k| point_contribution(k, input.q, p).expect("validated input"))
                    .collect();
                (p.r, table)
            })
            .collect();
        RiemannRoch {
            q: input.q,
            a3: input.a3,
            linear,
            tables,
        }
    }

    /// The smooth part of `chi(kA)`: everything except the point corrections.
    pub fn smooth_part(&self, k: i64) -> Rational {
        let (k128, q) = (k as i128, self.q as i128);
        let cubic = Rational::new(k128 * (k128 + q) * (2 * k128 + q), 12) * self.a3;
        Rational::ONE + cubic + Rational::from_int(k128) * self.linear
    }

    pub fn singular_part(&self, k: i64) -> Rational {
        self.tables
            .iter()
            .map(|(r, t)| t[modulo(k, *r) as usize])
            .sum()
    }

    pub fn chi(&self, k: i64) -> Rational {
        self.smooth_part(k) + self.singular_part(k)
    }
}

/// Exact value of `chi(kA)`.
pub fn chi(k: i64, input: &FanoInput) -> Rational {
    RiemannRoch::new(input).chi(k)
}

/// `dim |kA| = chi(kA) - 1` for `k = 1..=kmax`; `-1` is an empty system.
pub fn dims(input: &FanoInput, kmax: i64) -> Result<Vec<i64>> {
    let rr = RiemannRoch::new(input);
    (1..=kmax)
        .map(|k| {
            rr.chi(k)
                .to_integer()
                .map(|v| v as i64 - 1)
                .ok_or(Error::NonIntegralChi(k))
        })
        .collect()
}

/// `g = dim|-K| - 1 = h^0(-K) - 2`.
pub fn genus(input: &FanoInput) -> Result<i64> {
    chi(input.q, input)
        .to_integer()
        .map(|v| v as i64 - 2)
        .ok_or(Error::NonIntegralChi(input.q))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnticanonicalData {
    pub minus_k3: Rational,
    pub minus_k_c2: Rational,
    pub a_c2: Rational,
}

pub fn anticanonical_data(input: &FanoInput) -> AnticanonicalData {
    let minus_k_c2 = Rational::from(24) - kawamata_sum(&input.basket);
    AnticanonicalData {
        minus_k3: Rational::from(input.q).pow(3) * input.a3,
        minus_k_c2,
        a_c2: minus_k_c2 / Rational::from(input.q),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pt(r: i64, a: i64) -> SingularPoint {
        SingularPoint::new(r, a).unwrap()
    }

    fn rat(n: i128, d: i128) -> Rational {
        Rational::new(n, d)
    }

    fn q9() -> FanoInput {
        let b = Basket::from_pairs(&[(2, 1), (4, 1), (5, 2)]).unwrap();
        FanoInput::new(9, b, rat(1, 20)).unwrap()
    }

    /// Direct transcription of the closed form, without tabulation.
    fn chi_direct(k: i64, input: &FanoInput) -> Rational {
        let (q, a3) = (input.q() as i128, input.a3());
        let sigma = kawamata_sum(input.basket());
        let k128 = k as i128;
        let mut v = Rational::ONE
            + Rational::new(k128 * (k128 + q) * (2 * k128 + q), 12) * a3
            + Rational::new(k128, 12 * q) * (Rational::from(24) - sigma);
        for p in input.basket().points() {
            v = v + point_contribution(k, input.q(), p).unwrap();
        }
        v
    }

    #[test]
    fn kawamata_examples() {
        let b = Basket::from_pairs(&[(2, 1), (4, 1), (5, 2)]).unwrap();
        assert_eq!(kawamata_sum(&b), rat(201, 20));
        assert_eq!(kawamata_sum(&Basket::empty()), Rational::ZERO);
        for a in [1, 2, 4] {
            let b = Basket::from_pairs(&[(3, 1), (3, 1), (5, 2), (9, a)]).unwrap();
            assert_eq!(kawamata_sum(&b), rat(856, 45));
        }
    }

    #[test]
    fn local_index_examples() {
        assert_eq!(local_index(1, 9, &pt(5, 2)).unwrap(), 1);
        assert_eq!(local_index(1, 9, &pt(4, 1)).unwrap(), 3);
        assert_eq!(local_index(2, 9, &pt(2, 1)).unwrap(), 0);
        assert_eq!(
            local_index(1, 6, &pt(4, 1)),
            Err(Error::IndexNotCoprime { q: 6, r: 4 })
        );
    }

    #[test]
    fn point_contribution_examples() {
        assert_eq!(point_contribution(1, 9, &pt(2, 1)).unwrap(), rat(-1, 8));
        assert_eq!(point_contribution(1, 9, &pt(4, 1)).unwrap(), rat(-1, 16));
        assert_eq!(point_contribution(2, 9, &pt(5, 2)).unwrap(), rat(-1, 5));
        assert_eq!(point_contribution(1, 9, &pt(5, 2)).unwrap(), rat(-2, 5));
    }

    #[test]
    fn chi_examples() {
        let x = q9();
        assert_eq!(chi(1, &x), Rational::ONE);
        assert_eq!(chi(0, &x), Rational::ONE);
        assert_eq!(chi(-10, &x), -Rational::ONE);
        assert_eq!(chi(2, &x), Rational::from(2));
        for k in -30..30 {
            assert_eq!(chi(k, &x), chi_direct(k, &x));
        }
    }

    #[test]
    fn dims_examples() {
        assert_eq!(dims(&q9(), 5).unwrap(), vec![0, 1, 2, 4, 6]);
        let p1112 = FanoInput::new(5, Basket::from_pairs(&[(2, 1)]).unwrap(), rat(1, 2)).unwrap();
        assert_eq!(dims(&p1112, 5).unwrap(), vec![2, 6, 12, 21, 33]);
        // (3,3,5) at q = 8: one orientation of the index-5 point reproduces the row
        let rows: Vec<Vec<i64>> = [1, 2]
            .iter()
            .filter_map(|&a| {
                let b = Basket::from_pairs(&[(3, 1), (3, 1), (5, a)]).unwrap();
                dims(&FanoInput::new(8, b, rat(1, 15)).unwrap(), 8).ok()
            })
            .collect();
        assert_eq!(rows, vec![vec![0, 1, 3, 4, 7, 10, 13, 18]]);
    }

    #[test]
    fn dims_rejects_bad_decoration() {
        let b = Basket::from_pairs(&[(2, 1), (4, 1), (5, 1)]).unwrap();
        let x = FanoInput::new(9, b, rat(1, 20)).unwrap();
        assert_eq!(dims(&x, 5), Err(Error::NonIntegralChi(2)));
    }

    #[test]
    fn genus_examples() {
        assert_eq!(genus(&q9()).unwrap(), 18);
        let q7 = (1..=2)
            .filter_map(|a| {
                let b = Basket::from_pairs(&[(2, 1), (2, 1), (2, 1), (5, a)]).unwrap();
                let x = FanoInput::new(7, b, rat(1, 10)).unwrap();
                dims(&x, 7).ok().map(|_| genus(&x).unwrap())
            })
            .collect::<Vec<_>>();
        assert_eq!(q7, vec![17]);
        let p3 = FanoInput::new(4, Basket::empty(), Rational::ONE).unwrap();
        assert_eq!(genus(&p3).unwrap(), 33);
    }

    #[test]
    fn anticanonical_examples() {
        let d = anticanonical_data(&q9());
        assert_eq!(d.minus_k3, rat(729, 20));
        assert_eq!(d.minus_k_c2, rat(279, 20));
        assert_eq!(d.a_c2, rat(31, 20));
        let p1112 = FanoInput::new(5, Basket::from_pairs(&[(2, 1)]).unwrap(), rat(1, 2)).unwrap();
        assert_eq!(anticanonical_data(&p1112).minus_k3, rat(125, 2));
        let p3 = FanoInput::new(4, Basket::empty(), Rational::ONE).unwrap();
        assert_eq!(anticanonical_data(&p3).minus_k_c2, Rational::from(24));
    }

    #[test]
    fn basket_text_forms() {
        let b: Basket = "[5:3, 2:1, 4:1]".parse().unwrap();
        assert_eq!(b.to_string(), "[2:1, 4:1, 5:2]");
        assert_eq!(b.index_string(), "(2,4,5)");
        assert_eq!("[]".parse::<Basket>().unwrap(), Basket::empty());
        assert!("[4:2]".parse::<Basket>().is_err());
        assert_eq!(Basket::empty().index_string(), "()");
    }

    #[test]
    fn input_validation() {
        let b = Basket::from_pairs(&[(3, 1)]).unwrap();
        assert_eq!(
            FanoInput::new(6, b.clone(), Rational::ONE).unwrap_err(),
            Error::IndexNotCoprime { q: 6, r: 3 }
        );
        assert!(FanoInput::new(5, b, Rational::ZERO).is_err());
    }

    fn any_point(q: i64) -> impl Strategy<Value = SingularPoint> {
        (2i64..=24, 1i64..12).prop_filter_map("coprime", move |(r, a)| {
            (gcd(q as i128, r as i128) == 1).then_some(())?;
            SingularPoint::new(r, a).ok()
        })
    }

    proptest! {
        #[test]
        fn contribution_periodic_and_symmetric(q in 1i64..20, r in 2i64..=24, a in 1i64..24, k in -60i64..60) {
            prop_assume!(gcd(q as i128, r as i128) == 1 && gcd(a as i128, r as i128) == 1);
            let p = SingularPoint::new(r, a).unwrap();
            let c = point_contribution(k, q, &p).unwrap();
            prop_assert_eq!(c, point_contribution(k + r, q, &p).unwrap());
            // the same point written with orientation r - a
            let i = local_index(k, q, &p).unwrap();
            let flipped = SingularPoint { r, a: r - p.orientation() };
            prop_assert_eq!(c, contribution_for_class(i, &flipped));
            if i == 0 {
                prop_assert_eq!(c, Rational::ZERO);
            }
            prop_assert_eq!(local_index(q, q, &p).unwrap(), r - 1);
        }

        #[test]
        fn serre_symmetry(
            q in 1i64..20,
            pts in proptest::collection::vec((2i64..=24, 1i64..12), 0..6),
            n in 1i128..200, d in 1i128..200,
            k in -40i64..40,
        ) {
            let pts: Vec<SingularPoint> = pts
                .into_iter()
                .filter(|(r, _)| gcd(q as i128, *r as i128) == 1)
                .filter_map(|(r, a)| SingularPoint::new(r, a).ok())
                .collect();
            let x = FanoInput::new(q, Basket::new(pts), Rational::new(n, d)).unwrap();
            let rr = RiemannRoch::new(&x);
            prop_assert_eq!(rr.chi(0), Rational::ONE);
            prop_assert_eq!(rr.chi(k) + rr.chi(-q - k), Rational::ZERO);
            prop_assert_eq!(rr.chi(k), chi_direct(k, &x));
        }

        #[test]
        fn basket_display_roundtrip(pts in proptest::collection::vec(any_point(1), 0..5)) {
            let b = Basket::new(pts);
            prop_assert_eq!(b.to_string().parse::<Basket>().unwrap(), b);
        }
    }
}
