use std::path::Path;
use std::sync::OnceLock;

use proptest::prelude::*;

use qfano::enumerate::{FilterConfig, Schedule};
use qfano::error::Error;
use qfano::link::{audit, dims_lookup, solve, solve_with, LinkCase, LinkSolution};
use qfano::store::Database;

fn db() -> &'static Database {
    static DB: OnceLock<Database> = OnceLock::new();
    DB.get_or_init(|| Database::build(FilterConfig::default(), &[], Schedule::default()).unwrap())
}

fn scripted(name: &str) -> LinkCase {
    LinkCase::load(
        &Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("cases")
            .join(name),
    )
    .unwrap()
}

fn case(json: &str) -> qfano::error::Result<LinkCase> {
    LinkCase::parse(json)
}

const SMALL: &str = r#"{
  "name": "small",
  "source": { "q": 9, "basket": [[2, 1], [4, 1], [5, 2]], "a3": "1/20" },
  "alpha": ["1/2"],
  "unknowns": [ { "name": "x", "min": 0, "max": 1 }, { "name": "y", "min": 0, "max": 1 } ],
  "index_set": [5, 7]
}"#;

#[test]
fn lookup_examples() {
    assert_eq!(dims_lookup(db(), 8, 1, 10), Ok(0));
    assert_eq!(dims_lookup(db(), 13, 1, 18), Ok(0));
    assert_eq!(dims_lookup(db(), 5, 1, 0), Ok(2));
    assert_eq!(
        dims_lookup(db(), 19, 1, 100),
        Err(Error::NoCandidate {
            q: 19,
            genus_min: 100
        })
    );
    let partial = Database::build(FilterConfig::default(), &[9], Schedule::Sequential).unwrap();
    assert_eq!(
        dims_lookup(&partial, 8, 1, 0),
        Err(Error::IncompleteDatabase(8))
    );
}

#[test]
fn lookup_agrees_with_stored_dims() {
    for q in db().indices() {
        for s in 1..=q {
            let direct = db()
                .of_index(q)
                .map(|c| c.dim_table[s as usize - 1])
                .max()
                .unwrap();
            assert_eq!(dims_lookup(db(), q, s, 0), Ok(direct));
        }
    }
}

#[test]
fn q9_case_only_reaches_small_indices() {
    let c = scripted("q9_4A.case");
    let sols = solve(&c, db()).unwrap();
    assert!(!sols.is_empty());
    assert!(sols.iter().all(|s| s.qhat <= 8));
    assert!(sols.iter().all(|s| audit(&c, s, db())));
}

#[test]
fn q6_and_q8_cases_are_eliminated() {
    for name in ["q6_basket7.case", "q8_3359_r3.case"] {
        assert!(solve(&scripted(name), db()).unwrap().is_empty(), "{name}");
    }
}

#[test]
fn fabricated_solution_fails_audit() {
    let c = scripted("q6_basket7.case");
    let fake = LinkSolution {
        qhat: 11,
        alpha: "1/7".parse().unwrap(),
        assignment: vec![("e".into(), 1), ("s1".into(), 1), ("m1".into(), 0)],
    };
    assert!(!audit(&c, &fake, db()));
}

#[test]
fn perturbed_solution_fails_audit() {
    let c = scripted("q9_4A.case");
    let sol = solve(&c, db()).unwrap().remove(0);
    for i in 0..sol.assignment.len() {
        let mut bad = sol.clone();
        bad.assignment[i].1 += 1;
        assert!(!audit(&c, &bad, db()), "bumping {}", bad.assignment[i].0);
    }
}

#[test]
fn vacuous_case_is_everything() {
    let sols = solve(&case(SMALL).unwrap(), db()).unwrap();
    assert_eq!(sols.len(), 2 * 2 * 2);
    // qhat first, then unknowns in declaration order
    assert_eq!(sols[0].qhat, 5);
    assert_eq!(sols[0].assignment, vec![("x".into(), 0), ("y".into(), 0)]);
    assert_eq!(sols[1].assignment, vec![("x".into(), 0), ("y".into(), 1)]);
    assert_eq!(sols[4].qhat, 7);
}

#[test]
fn sequential_and_parallel_agree() {
    let c = scripted("q9_4A.case");
    assert_eq!(
        solve_with(&c, db(), Schedule::Sequential).unwrap(),
        solve_with(&c, db(), Schedule::Parallel(Some(3))).unwrap()
    );
}

#[test]
fn invalid_cases() {
    let unbounded = SMALL.replace(
        r#""name": "y", "min": 0, "max": 1"#,
        r#""name": "y", "min": 0"#,
    );
    assert_eq!(case(&unbounded), Err(Error::UnboundedCase("y".into())));

    let undeclared = SMALL.replace(
        r#""index_set""#,
        r#""relations": ["qhat = z"], "index_set""#,
    );
    assert!(matches!(case(&undeclared), Err(Error::Parse(_))));

    let floor = SMALL.replace(
        r#""index_set""#,
        r#""relations": ["qhat = m*x"], "index_set""#,
    );
    assert!(matches!(case(&floor), Err(Error::InvalidCase(_))));

    let reserved = SMALL.replace(r#""name": "x""#, r#""name": "alpha""#);
    assert!(matches!(case(&reserved), Err(Error::InvalidCase(_))));

    let bad_index = SMALL.replace("[5, 7]", "[5, 12]");
    assert!(matches!(case(&bad_index), Err(Error::InvalidCase(_))));

    let bad_k = SMALL.replace(
        r#""index_set""#,
        r#""dim_constraints": [["x", 10]], "index_set""#,
    );
    assert!(matches!(case(&bad_k), Err(Error::InvalidCase(_))));
}

#[test]
fn explicit_genus_overrides_transfer() {
    // dim|xΘ| >= dim|A| = 0 on X: always true unless no candidate has genus >= 1000
    let strict = SMALL.replace(
        r#""index_set""#,
        r#""dim_constraints": [["x", 1, 1000]], "index_set""#,
    );
    assert!(solve(&case(&strict).unwrap(), db()).unwrap().is_empty());
    let loose = SMALL.replace(
        r#""index_set""#,
        r#""dim_constraints": [["x", 1, 0]], "index_set""#,
    );
    assert_eq!(solve(&case(&loose).unwrap(), db()).unwrap().len(), 8);
}

fn random_case(coeffs: &[i64], rhs: i64, cmp: &str, extra: Option<(i64, i64)>) -> LinkCase {
    let vars = ["e", "u", "v"];
    let terms: Vec<String> = coeffs
        .iter()
        .zip(vars)
        .map(|(c, v)| format!("{c}*{v}"))
        .collect();
    let mut relations = vec![format!("qhat {cmp} {} + {rhs}", terms.join(" + "))];
    let mut dims = String::new();
    if let Some((a, b)) = extra {
        relations.push(format!("{a}*u - {b}*v >= 0"));
        dims = r#""dim_constraints": [["u", 2]],"#.into();
    }
    let rel_json: Vec<String> = relations.iter().map(|r| format!("{r:?}")).collect();
    case(&format!(
        r#"{{
          "name": "random",
          "source": {{ "q": 7, "basket": [[2, 1], [3, 1]], "a3": "1/6" }},
          "alpha": ["1/2", "1/3"],
          "unknowns": [
            {{ "name": "e", "min": 1, "max": 4 }},
            {{ "name": "u", "min": 0, "max": 5 }},
            {{ "name": "v", "min": 0, "max": 5 }}
          ],
          "relations": [{}],
          {dims}
          "genus_transfer": true,
          "index_set": [3, 4, 5, 6, 7, 8, 9]
        }}"#,
        rel_json.join(", ")
    ))
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn adding_constraints_never_adds_solutions(
        coeffs in prop::collection::vec(-3i64..4, 3),
        rhs in -4i64..6,
        cmp in prop::sample::select(vec!["=", ">=", "<="]),
        extra in (0i64..4, 0i64..4),
    ) {
        let base = solve(&random_case(&coeffs, rhs, cmp, None), db()).unwrap();
        let tighter_case = random_case(&coeffs, rhs, cmp, Some(extra));
        let tighter = solve(&tighter_case, db()).unwrap();
        prop_assert!(tighter.iter().all(|s| base.contains(s)));
        prop_assert!(tighter.iter().all(|s| audit(&tighter_case, s, db())));
    }
}
