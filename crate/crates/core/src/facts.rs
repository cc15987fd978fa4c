//! Propositions read off a complete candidate list.

use std::fmt;

use serde::Serialize;

use crate::enumerate::Candidate;
use crate::store::collapse_rows;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Fact {
    /// Largest `dim|sA|` over candidates satisfying the predicate.
    MaxDim {
        predicate: String,
        s: i64,
        max: Option<i64>,
        candidates: usize,
    },
    /// Hilbert-series classes (orientation erased) satisfying the predicate.
    Classes {
        predicate: String,
        classes: Vec<String>,
    },
}

impl Fact {
    pub fn predicate(&self) -> &str {
        match self {
            Fact::MaxDim { predicate, .. } | Fact::Classes { predicate, .. } => predicate,
        }
    }
}

fn linear_system(s: i64) -> String {
    if s == 1 {
        "dim|A|".into()
    } else {
        format!("dim|{s}A|")
    }
}

impl fmt::Display for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Fact::MaxDim {
                predicate,
                s,
                max: Some(m),
                candidates,
            } => write!(
                f,
                "{predicate} ⇒ {} ≤ {m}  (attained; {candidates} candidates)",
                linear_system(*s)
            ),
            Fact::MaxDim { predicate, .. } => write!(f, "no candidate satisfies {predicate}"),
            Fact::Classes { predicate, classes } => match classes.len() {
                0 => write!(f, "no class satisfies {predicate}"),
                1 => write!(f, "exactly one class satisfies {predicate}: {}", classes[0]),
                n => write!(f, "{n} classes satisfy {predicate}: {}", classes.join("; ")),
            },
        }
    }
}

pub fn max_dim(
    db: &[Candidate],
    predicate: &str,
    s: i64,
    pred: impl Fn(&Candidate) -> bool,
) -> Fact {
    let hits: Vec<&Candidate> = db.iter().filter(|c| pred(c)).collect();
    Fact::MaxDim {
        predicate: predicate.to_string(),
        s,
        max: hits.iter().map(|c| c.dim(s)).max(),
        candidates: hits.len(),
    }
}

pub fn classes(db: &[Candidate], predicate: &str, pred: impl Fn(&Candidate) -> bool) -> Fact {
    let mut labels = Vec::new();
    for q in db
        .iter()
        .map(|c| c.q)
        .collect::<std::collections::BTreeSet<_>>()
    {
        for row in collapse_rows(db.iter().filter(|c| c.q == q && pred(c))) {
            labels.push(format!("q={q} {} A^3={}", row.basket_string(), row.a3));
        }
    }
    Fact::Classes {
        predicate: predicate.to_string(),
        classes: labels,
    }
}

/// The standard list of dimension facts.
pub fn facts(db: &[Candidate]) -> Vec<Fact> {
    vec![
        max_dim(db, "q ≥ 8", 1, |c| c.q >= 8),
        max_dim(db, "q ≥ 6", 1, |c| c.q >= 6),
        max_dim(db, "q ≥ 4, basket nonempty", 1, |c| {
            c.q >= 4 && !c.basket.is_empty()
        }),
        classes(db, "q ≥ 5 and dim|A| ≥ 2", |c| {
            c.q >= 5 && c.dim(1) >= 2
        }),
        classes(db, "q = 7 and dim|A| ≥ 1", |c| c.q == 7 && c.dim(1) >= 1),
        classes(db, "q = 6 and dim|A| ≥ 1", |c| c.q == 6 && c.dim(1) >= 1),
        classes(db, "q ≥ 9", |c| c.q >= 9),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate::{enumerate_indices, FilterConfig, Schedule};

    #[test]
    fn high_index_has_no_pencil() {
        let db = enumerate_indices(
            &[8, 9, 10, 11, 13, 17, 19],
            &FilterConfig::default(),
            Schedule::default(),
        );
        let f = max_dim(&db, "q ≥ 8", 1, |c| c.q >= 8);
        assert!(matches!(f, Fact::MaxDim { max: Some(0), .. }));
        assert_eq!(
            f.to_string().split("  ").next().unwrap(),
            "q ≥ 8 ⇒ dim|A| ≤ 0"
        );
    }

    #[test]
    fn q7_pencil_is_unique() {
        let db = enumerate_indices(&[7], &FilterConfig::default(), Schedule::default());
        let f = classes(&db, "q = 7 and dim|A| ≥ 1", |c| c.dim(1) >= 1);
        assert_eq!(
            f,
            Fact::Classes {
                predicate: "q = 7 and dim|A| ≥ 1".into(),
                classes: vec!["q=7 (2,3) A^3=1/6".into()],
            }
        );
    }

    #[test]
    fn empty_predicate() {
        let f = max_dim(&[], "q ≥ 8", 1, |_| true);
        assert_eq!(f.to_string(), "no candidate satisfies q ≥ 8");
    }
}
