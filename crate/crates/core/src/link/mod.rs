//! Bounded integer search over link numerology.
//!
//! A case fixes a source candidate, the admissible discrepancies `alpha`, a
//! set of target indices `qhat` and a system of relations between integer
//! unknowns. `solve` enumerates every assignment that satisfies the system
//! and the dimension constraints read from a candidate database; an empty
//! answer eliminates the case.

pub mod expr;

use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::arith::Rational;
use crate::basket::{Basket, FanoInput};
use crate::enumerate::{is_fano_index, Candidate, Schedule};
use crate::error::{Error, Result};
use crate::store::Database;

pub use expr::{Cmp, Env, Expr, Relation};

/// Largest `dim|sΘ|` over index-`qhat` candidates of genus at least
/// `genus_min`.
pub fn dims_lookup(db: &Database, qhat: i64, s: i64, genus_min: i64) -> Result<i64> {
    if !db.config.index_set.contains(&qhat) {
        return Err(Error::IncompleteDatabase(qhat));
    }
    db.of_index(qhat)
        .filter(|c| c.genus >= genus_min)
        .map(|c| c.dim(s))
        .max()
        .ok_or(Error::NoCandidate { q: qhat, genus_min })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Unknown {
    pub name: String,
    pub min: i64,
    pub max: i64,
}

/// `dim|s Θ|` on the target must be at least `dim|kA|` on the source.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DimConstraint {
    pub var: usize,
    pub source_k: i64,
    pub genus_min: Option<i64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinkCase {
    pub name: String,
    pub note: String,
    pub source: Candidate,
    pub alpha: Vec<Rational>,
    pub threshold_floor: Option<i64>,
    pub unknowns: Vec<Unknown>,
    pub relations: Vec<Relation>,
    pub dim_constraints: Vec<DimConstraint>,
    pub genus_transfer: bool,
    pub index_set: Vec<i64>,
}

// On-disk form.

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CaseFile {
    name: String,
    #[serde(default)]
    note: String,
    source: SourceFile,
    alpha: Vec<String>,
    #[serde(default)]
    threshold_floor: Option<i64>,
    unknowns: Vec<UnknownFile>,
    #[serde(default)]
    relations: Vec<String>,
    #[serde(default)]
    dim_constraints: Vec<DimConstraintFile>,
    #[serde(default)]
    genus_transfer: bool,
    index_set: Vec<i64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SourceFile {
    q: i64,
    basket: Basket,
    a3: Rational,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct UnknownFile {
    name: String,
    #[serde(default)]
    min: i64,
    max: Option<i64>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum DimConstraintFile {
    Plain(String, i64),
    WithGenus(String, i64, i64),
}

impl LinkCase {
    pub fn parse(text: &str) -> Result<Self> {
        let raw: CaseFile = serde_json::from_str(text)?;
        let invalid = |m: String| Error::InvalidCase(m);

        let source = Candidate::from_input(&FanoInput::new(
            raw.source.q,
            raw.source.basket,
            raw.source.a3,
        )?)?;

        let mut unknowns = Vec::new();
        for u in raw.unknowns {
            let max = u.max.ok_or_else(|| Error::UnboundedCase(u.name.clone()))?;
            if expr::RESERVED.contains(&u.name.as_str()) {
                return Err(invalid(format!("{:?} is a reserved symbol", u.name)));
            }
            if unknowns.iter().any(|v: &Unknown| v.name == u.name) {
                return Err(invalid(format!("unknown {:?} declared twice", u.name)));
            }
            if u.min > max {
                return Err(invalid(format!("unknown {:?} has min > max", u.name)));
            }
            unknowns.push(Unknown {
                name: u.name,
                min: u.min,
                max,
            });
        }
        let names: Vec<String> = unknowns.iter().map(|u| u.name.clone()).collect();

        let relations = raw
            .relations
            .iter()
            .map(|r| expr::parse_relation(r, &names))
            .collect::<Result<Vec<_>>>()?;
        if raw.threshold_floor.is_none() && relations.iter().any(|r| r.diff.uses_floor()) {
            return Err(invalid(
                "relation uses m but threshold_floor is absent".into(),
            ));
        }

        let mut dim_constraints = Vec::new();
        for d in raw.dim_constraints {
            let (var, source_k, genus_min) = match d {
                DimConstraintFile::Plain(v, k) => (v, k, None),
                DimConstraintFile::WithGenus(v, k, g) => (v, k, Some(g)),
            };
            let var = names
                .iter()
                .position(|n| *n == var)
                .ok_or_else(|| invalid(format!("dim constraint on undeclared {var:?}")))?;
            if unknowns[var].min < 0 {
                return Err(invalid(format!(
                    "{:?} multiplies a divisor, needs min >= 0",
                    names[var]
                )));
            }
            if !(1..=source.q).contains(&source_k) {
                return Err(invalid(format!(
                    "source multiple {source_k} outside 1..={}",
                    source.q
                )));
            }
            dim_constraints.push(DimConstraint {
                var,
                source_k,
                genus_min,
            });
        }

        let alpha = raw
            .alpha
            .iter()
            .map(|a| a.parse::<Rational>())
            .collect::<Result<Vec<_>>>()?;
        if alpha.is_empty() || alpha.iter().any(|a| !a.is_positive()) {
            return Err(invalid(
                "alpha options must be positive and nonempty".into(),
            ));
        }
        if let Some(q) = raw.index_set.iter().find(|&&q| !is_fano_index(q)) {
            return Err(invalid(format!("{q} is not an admissible index")));
        }

        let mut alpha_sorted = alpha;
        alpha_sorted.sort();
        alpha_sorted.dedup();
        let mut index_set = raw.index_set;
        index_set.sort_unstable();
        index_set.dedup();

        Ok(LinkCase {
            name: raw.name,
            note: raw.note,
            source,
            alpha: alpha_sorted,
            threshold_floor: raw.threshold_floor,
            unknowns,
            relations,
            dim_constraints,
            genus_transfer: raw.genus_transfer,
            index_set,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        LinkCase::parse(&std::fs::read_to_string(path)?)
    }

    fn bounds(&self) -> Vec<(i64, i64)> {
        self.unknowns.iter().map(|u| (u.min, u.max)).collect()
    }

    /// Genus bound on the target used by a constraint under `alpha`.
    pub fn genus_min(&self, c: &DimConstraint, alpha: Rational) -> i64 {
        match c.genus_min {
            Some(g) => g,
            None if self.genus_transfer && alpha < Rational::ONE => self.source.genus,
            None => 0,
        }
    }

    /// Adds a relation; used to tighten user cases programmatically.
    pub fn with_relation(mut self, relation: &str) -> Result<Self> {
        let names: Vec<String> = self.unknowns.iter().map(|u| u.name.clone()).collect();
        self.relations.push(expr::parse_relation(relation, &names)?);
        Ok(self)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LinkSolution {
    pub qhat: i64,
    pub alpha: Rational,
    /// Values in declaration order.
    pub assignment: Vec<(String, i64)>,
}

impl LinkSolution {
    fn values(&self) -> Vec<i64> {
        self.assignment.iter().map(|(_, v)| *v).collect()
    }
}

fn lookup_dim(db: &Database, qhat: i64, s: i64, genus_min: i64) -> Result<i64> {
    // The zero multiple is the trivial system.
    if s == 0 {
        dims_lookup(db, qhat, 1, genus_min)?;
        return Ok(0);
    }
    dims_lookup(db, qhat, s, genus_min)
}

// Per-(qhat, alpha) state: the best target dimension for each value of each
// constrained unknown.
struct Branch<'a> {
    case: &'a LinkCase,
    bounds: Vec<(i64, i64)>,
    qhat: i64,
    alpha: Rational,
    /// `(var, required, best dim per value offset from min)`.
    dims: Vec<(usize, i64, Vec<i64>)>,
}

impl<'a> Branch<'a> {
    fn new(case: &'a LinkCase, db: &Database, qhat: i64, alpha: Rational) -> Result<Option<Self>> {
        let bounds = case.bounds();
        let mut dims = Vec::new();
        for c in &case.dim_constraints {
            let gmin = case.genus_min(c, alpha);
            let (lo, hi) = bounds[c.var];
            let mut table = Vec::new();
            for s in lo..=hi {
                match lookup_dim(db, qhat, s, gmin) {
                    Ok(d) => table.push(d),
                    Err(Error::NoCandidate { .. }) => return Ok(None),
                    Err(e) => return Err(e),
                }
            }
            dims.push((c.var, case.source.dim(c.source_k), table));
        }
        Ok(Some(Branch {
            case,
            bounds,
            qhat,
            alpha,
            dims,
        }))
    }

    fn env<'b>(&'b self, assigned: &'b [i64]) -> Env<'b> {
        Env {
            assigned,
            bounds: &self.bounds,
            alpha: self.alpha,
            qhat: self.qhat,
            floor: self.case.threshold_floor,
        }
    }

    fn dims_ok(&self, assigned: &[i64]) -> bool {
        self.dims
            .iter()
            .all(|(var, need, table)| match assigned.get(*var) {
                Some(&v) => table[(v - self.bounds[*var].0) as usize] >= *need,
                None => true,
            })
    }

    fn search(&self, vals: &mut Vec<i64>, out: &mut Vec<LinkSolution>) {
        let idx = vals.len();
        if idx == self.bounds.len() {
            let env = self.env(vals);
            if self.case.relations.iter().all(|r| r.holds(&env)) {
                out.push(LinkSolution {
                    qhat: self.qhat,
                    alpha: self.alpha,
                    assignment: self
                        .case
                        .unknowns
                        .iter()
                        .zip(vals.iter())
                        .map(|(u, &v)| (u.name.clone(), v))
                        .collect(),
                });
            }
            return;
        }
        let (lo, hi) = self.bounds[idx];
        for v in lo..=hi {
            vals.push(v);
            let env = self.env(vals);
            if self.dims_ok(vals) && self.case.relations.iter().all(|r| r.feasible(&env)) {
                self.search(vals, out);
            }
            vals.pop();
        }
    }
}

fn solve_branch(
    case: &LinkCase,
    db: &Database,
    qhat: i64,
    alpha: Rational,
) -> Result<Vec<LinkSolution>> {
    let mut out = Vec::new();
    if let Some(branch) = Branch::new(case, db, qhat, alpha)? {
        branch.search(&mut Vec::with_capacity(case.unknowns.len()), &mut out);
    }
    Ok(out)
}

/// Every solution, ordered by `qhat`, then unknowns in declaration order,
/// then `alpha`.
pub fn solve(case: &LinkCase, db: &Database) -> Result<Vec<LinkSolution>> {
    solve_with(case, db, Schedule::default())
}

pub fn solve_with(case: &LinkCase, db: &Database, schedule: Schedule) -> Result<Vec<LinkSolution>> {
    let work: Vec<(i64, Rational)> = case
        .index_set
        .iter()
        .flat_map(|&q| case.alpha.iter().map(move |&a| (q, a)))
        .collect();
    let run = |&(q, a): &(i64, Rational)| solve_branch(case, db, q, a);
    let parts: Vec<Result<Vec<LinkSolution>>> = match schedule {
        Schedule::Sequential => work.iter().map(run).collect(),
        #[cfg(feature = "parallel")]
        Schedule::Parallel(_) => {
            use rayon::prelude::*;
            work.par_iter().map(run).collect()
        }
        #[cfg(not(feature = "parallel"))]
        Schedule::Parallel(_) => work.iter().map(run).collect(),
    };
    let mut out = Vec::new();
    for p in parts {
        out.extend(p?);
    }
    out.sort_by_key(|x| (x.qhat, x.values(), x.alpha));
    Ok(out)
}

/// Re-checks a solution against the case from scratch.
pub fn audit(case: &LinkCase, sol: &LinkSolution, db: &Database) -> bool {
    if !case.index_set.contains(&sol.qhat) || !case.alpha.contains(&sol.alpha) {
        return false;
    }
    if sol.assignment.len() != case.unknowns.len() {
        return false;
    }
    let mut vals = Vec::new();
    for (u, (name, v)) in case.unknowns.iter().zip(&sol.assignment) {
        if *name != u.name || *v < u.min || *v > u.max {
            return false;
        }
        vals.push(*v);
    }
    let bounds = case.bounds();
    let env = Env {
        assigned: &vals,
        bounds: &bounds,
        alpha: sol.alpha,
        qhat: sol.qhat,
        floor: case.threshold_floor,
    };
    if !case.relations.iter().all(|r| r.holds(&env)) {
        return false;
    }
    case.dim_constraints.iter().all(|c| {
        let gmin = case.genus_min(c, sol.alpha);
        matches!(lookup_dim(db, sol.qhat, vals[c.var], gmin),
                 Ok(d) if d >= case.source.dim(c.source_k))
    })
}

/// Summary of a solve run.
#[derive(Clone, Debug, Serialize)]
pub struct LinkReport {
    pub case: String,
    pub eliminated: bool,
    pub feasible_qhat: BTreeSet<i64>,
    pub feasible_alpha: BTreeSet<Rational>,
    pub solutions: Vec<LinkSolution>,
}

impl LinkReport {
    pub fn new(case: &LinkCase, solutions: Vec<LinkSolution>) -> Self {
        LinkReport {
            case: case.name.clone(),
            eliminated: solutions.is_empty(),
            feasible_qhat: solutions.iter().map(|s| s.qhat).collect(),
            feasible_alpha: solutions.iter().map(|s| s.alpha).collect(),
            solutions,
        }
    }

    /// Number of solutions per `qhat`.
    pub fn histogram(&self) -> Vec<(i64, usize)> {
        let mut m: HashMap<i64, usize> = HashMap::new();
        for s in &self.solutions {
            *m.entry(s.qhat).or_insert(0) += 1;
        }
        let mut v: Vec<_> = m.into_iter().collect();
        v.sort_unstable();
        v
    }
}
