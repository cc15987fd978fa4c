use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use qfano::enumerate::{is_fano_index, Candidate, FilterConfig, Schedule};
use qfano::error::Error;
use qfano::facts::facts;
use qfano::link::{audit, solve_with, LinkCase, LinkReport};
use qfano::store::{lemma_rows, render_lemma_table, write_atomic, Database, LemmaTable};
use qfano::wps::{default_kmax, degree_a3, fano_index, match_candidate, parse_weights, WpsModel};

#[derive(Parser)]
#[command(
    name = "qfano",
    version,
    about = "Numerical candidates for Q-Fano threefolds of large index"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Candidate database (JSON).
    #[arg(long, global = true)]
    db: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[arg(long, global = true, default_value = "default", value_parser = parse_filter_set)]
    filter_set: String,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate candidates and store them as a database.
    Enumerate {
        #[arg(long, value_parser = parse_index, value_delimiter = ',', conflicts_with = "all", required_unless_present = "all")]
        q: Vec<i64>,
        #[arg(long)]
        all: bool,
    },
    /// Render a per-index table under its genus hypothesis.
    Table {
        #[arg(long, value_parser = parse_table)]
        case: String,
    },
    /// Compare a weighted projective model with the database.
    Wps {
        #[command(subcommand)]
        command: WpsCommand,
    },
    /// Run a link elimination case.
    Link {
        #[command(subcommand)]
        command: LinkCommand,
    },
    /// Dimension facts derived from the database.
    Facts,
    /// Re-export the database in canonical JSON or CSV.
    Export,
    /// Candidates gained or lost when switching filter sets.
    Diff {
        #[arg(long, value_parser = parse_filter_set)]
        against: String,
        #[arg(long, value_parser = parse_index)]
        q: Vec<i64>,
    },
}

#[derive(Subcommand)]
enum WpsCommand {
    Check {
        #[arg(long, required_unless_present = "model")]
        weights: Option<String>,
        #[arg(long, requires = "weights")]
        degree: Option<i64>,
        /// Text form such as "X_6 in P(1,2,3,4,5)".
        #[arg(long, conflicts_with = "weights")]
        model: Option<String>,
        /// Last plurigenus compared; defaults to 2q+5.
        #[arg(long)]
        kmax: Option<i64>,
    },
}

#[derive(Subcommand)]
enum LinkCommand {
    Solve { file: PathBuf },
}

fn parse_index(s: &str) -> Result<i64, String> {
    let q: i64 = s.parse().map_err(|_| format!("{s:?} is not an integer"))?;
    if is_fano_index(q) {
        Ok(q)
    } else {
        Err(format!(
            "{q} is not a possible Fano index (1..11, 13, 17, 19)"
        ))
    }
}

fn parse_filter_set(s: &str) -> Result<String, String> {
    if FilterConfig::NAMES.contains(&s) {
        Ok(s.to_string())
    } else {
        Err(format!(
            "unknown filter set {s:?}; choose from {}",
            FilterConfig::NAMES.join(", ")
        ))
    }
}

fn parse_table(s: &str) -> Result<String, String> {
    LemmaTable::parse(s)
        .map(|t| t.name().to_string())
        .ok_or_else(|| format!("unknown table {s:?}; choose from q3..q9"))
}

/// Failure with its exit status.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Io(_) | Error::IncompleteDatabase(_) => 3,
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn missing(what: &str) -> Failure {
    Failure {
        code: 3,
        message: what.to_string(),
    }
}

type Outcome = Result<String, Failure>;

impl Global {
    fn schedule(&self) -> Schedule {
        match self.jobs {
            Some(1) => Schedule::Sequential,
            Some(n) => Schedule::Parallel(Some(n)),
            None => Schedule::Parallel(None),
        }
    }

    fn config(&self) -> FilterConfig {
        FilterConfig::named(&self.filter_set).expect("validated by clap")
    }

    fn load_db(&self) -> Result<Database, Failure> {
        let path = self
            .db
            .as_ref()
            .ok_or_else(|| missing("this command needs --db PATH"))?;
        if !path.exists() {
            return Err(missing(&format!("database {} not found", path.display())));
        }
        Ok(Database::load(path)?)
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn csv_string(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("csv write");
    for r in rows {
        w.write_record(&r).expect("csv write");
    }
    String::from_utf8(w.into_inner().expect("csv flush")).expect("utf8")
}

fn counts_output(db: &Database, format: Format) -> String {
    let counts = db.counts();
    let total: usize = counts.values().sum();
    match format {
        Format::Json => {
            #[derive(Serialize)]
            struct Counts<'a> {
                filter_set: &'a str,
                counts: &'a std::collections::BTreeMap<i64, usize>,
                total: usize,
            }
            to_json(&Counts {
                filter_set: &db.config.name,
                counts: &counts,
                total,
            })
        }
        Format::Csv => csv_string(
            &["q", "candidates"],
            counts
                .iter()
                .map(|(q, n)| vec![q.to_string(), n.to_string()]),
        ),
        Format::Table => {
            let mut s = format!("filter set: {}\n", db.config.name);
            for (q, n) in &counts {
                writeln!(s, "q = {q:>2}: {n:>4}").unwrap();
            }
            writeln!(s, "total: {total}").unwrap();
            s
        }
    }
}

fn cmd_enumerate(g: &Global, qs: &[i64]) -> Outcome {
    let db = Database::build(g.config(), qs, g.schedule())?;
    // The database goes to --out (or --db); stdout gets the counts.
    if let Some(path) = g.out.as_ref().or(g.db.as_ref()) {
        db.save(path)?;
    }
    Ok(counts_output(&db, g.format))
}

fn cmd_table(g: &Global, name: &str) -> Outcome {
    let db = g.load_db()?;
    let table = LemmaTable::parse(name).expect("validated by clap");
    if !db.config.index_set.contains(&table.q()) {
        return Err(Error::IncompleteDatabase(table.q()).into());
    }
    let rows = lemma_rows(&db, table);
    Ok(match g.format {
        Format::Table => render_lemma_table(&db, table),
        Format::Json => {
            #[derive(Serialize)]
            struct Row {
                basket: String,
                a3: String,
                dims: Vec<i64>,
                decorations: usize,
            }
            to_json(
                &rows
                    .iter()
                    .map(|r| Row {
                        basket: r.basket_string(),
                        a3: r.a3.to_string(),
                        dims: r.dims.clone(),
                        decorations: r.decorations,
                    })
                    .collect::<Vec<_>>(),
            )
        }
        Format::Csv => csv_string(
            &["basket", "A3", "dim_kA", "dim_-K"],
            rows.iter().map(|r| {
                let (last, first) = r.dims.split_last().expect("q >= 1");
                vec![
                    r.basket_string(),
                    r.a3.to_string(),
                    first
                        .iter()
                        .map(i64::to_string)
                        .collect::<Vec<_>>()
                        .join(" "),
                    last.to_string(),
                ]
            }),
        ),
    })
}

fn cmd_wps(
    g: &Global,
    weights: Option<&str>,
    degree: Option<i64>,
    model: Option<&str>,
    kmax: Option<i64>,
) -> Outcome {
    let model = match (model, weights) {
        (Some(m), _) => m.parse::<WpsModel>()?,
        (None, Some(w)) => WpsModel::new(parse_weights(w)?, degree)?,
        (None, None) => unreachable!("clap requires one of them"),
    };
    if !model.is_threefold() {
        return Err(Error::InvalidInput(format!("{model} is not a threefold")).into());
    }
    let db = g.load_db()?;
    let q = fano_index(&model);
    let a3 = degree_a3(&model);
    if !db.config.index_set.contains(&q) {
        return Err(Error::IncompleteDatabase(q).into());
    }
    let kmax = kmax.unwrap_or_else(|| default_kmax(q));

    #[derive(Serialize)]
    struct Entry<'a> {
        id: &'a str,
        a3: String,
        report: qfano::wps::MatchReport,
    }
    let same_index: Vec<&Candidate> = db.of_index(q).collect();
    let entries: Vec<Entry> = same_index
        .iter()
        .map(|c| Entry {
            id: &c.id,
            a3: c.a3.to_string(),
            report: match_candidate(&model, c, kmax),
        })
        .collect();
    let matches: Vec<&Entry> = entries.iter().filter(|e| e.report.is_full()).collect();

    Ok(match g.format {
        Format::Json => {
            #[derive(Serialize)]
            struct Out<'a> {
                model: String,
                q: i64,
                a3: String,
                kmax: i64,
                matches: Vec<&'a str>,
                candidates: &'a [Entry<'a>],
            }
            to_json(&Out {
                model: model.to_string(),
                q,
                a3: a3.to_string(),
                kmax,
                matches: matches.iter().map(|e| e.id).collect(),
                candidates: &entries,
            })
        }
        Format::Csv => csv_string(
            &["id", "A3", "index", "degree", "hilbert", "first_mismatch"],
            entries.iter().map(|e| {
                vec![
                    e.id.to_string(),
                    e.a3.clone(),
                    e.report.index_matches.to_string(),
                    e.report.degree_matches.to_string(),
                    e.report.hilbert_matches.to_string(),
                    e.report
                        .first_mismatch
                        .map(|k| k.to_string())
                        .unwrap_or_default(),
                ]
            }),
        ),
        Format::Table => {
            let mut s = format!("{model}: q = {q}, A^3 = {a3}, h^0 compared for k = 0..{kmax}\n");
            let same_degree: Vec<&Entry> =
                entries.iter().filter(|e| e.report.degree_matches).collect();
            if same_degree.is_empty() {
                writeln!(s, "no candidate of index {q} has A^3 = {a3}").unwrap();
            }
            for e in same_degree {
                match e.report.first_mismatch {
                    None => writeln!(s, "  {}: match", e.id).unwrap(),
                    Some(k) => writeln!(s, "  {}: h^0 differs from chi at k = {k}", e.id).unwrap(),
                }
            }
            match matches.as_slice() {
                [one] => writeln!(s, "matches candidate {}", one.id).unwrap(),
                [] => writeln!(s, "no matching candidate").unwrap(),
                many => writeln!(s, "{} matching candidates", many.len()).unwrap(),
            }
            s
        }
    })
}

fn cmd_link(g: &Global, file: &Path) -> Outcome {
    if !file.exists() {
        return Err(missing(&format!("case file {} not found", file.display())));
    }
    let case = LinkCase::load(file)?;
    let db = g.load_db()?;
    let solutions = solve_with(&case, &db, g.schedule())?;
    assert!(
        solutions.iter().all(|s| audit(&case, s, &db)),
        "solver returned a solution that fails its audit"
    );
    let report = LinkReport::new(&case, solutions);
    Ok(match g.format {
        Format::Json => to_json(&report),
        Format::Csv => {
            let mut header = vec!["qhat".to_string(), "alpha".to_string()];
            header.extend(case.unknowns.iter().map(|u| u.name.clone()));
            let header: Vec<&str> = header.iter().map(String::as_str).collect();
            csv_string(
                &header,
                report.solutions.iter().map(|s| {
                    let mut r = vec![s.qhat.to_string(), s.alpha.to_string()];
                    r.extend(s.assignment.iter().map(|(_, v)| v.to_string()));
                    r
                }),
            )
        }
        Format::Table => {
            let mut s = format!(
                "case {}: {} solutions\n",
                report.case,
                report.solutions.len()
            );
            if report.eliminated {
                writeln!(s, "eliminated: no assignment satisfies the case").unwrap();
            } else {
                let set = |v: Vec<String>| format!("{{{}}}", v.join(","));
                writeln!(
                    s,
                    "feasible qhat values: {}",
                    set(report.feasible_qhat.iter().map(i64::to_string).collect())
                )
                .unwrap();
                writeln!(
                    s,
                    "feasible alpha values: {}",
                    set(report
                        .feasible_alpha
                        .iter()
                        .map(|a| a.to_string())
                        .collect())
                )
                .unwrap();
                for (q, n) in report.histogram() {
                    writeln!(s, "  qhat = {q:>2}: {n} solutions").unwrap();
                }
            }
            s
        }
    })
}

fn cmd_facts(g: &Global) -> Outcome {
    let db = g.load_db()?;
    let fs = facts(&db.candidates);
    Ok(match g.format {
        Format::Json => to_json(&fs),
        Format::Csv => csv_string(&["fact"], fs.iter().map(|f| vec![f.to_string()])),
        Format::Table => fs.iter().map(|f| format!("{f}\n")).collect(),
    })
}

fn cmd_export(g: &Global) -> Outcome {
    let db = g.load_db()?;
    Ok(match g.format {
        Format::Csv => db.to_csv(),
        _ => db.to_json(),
    })
}

fn cmd_diff(g: &Global, against: &str, qs: &[i64]) -> Outcome {
    let base = Database::build(g.config(), qs, g.schedule())?;
    let other = Database::build(
        FilterConfig::named(against).expect("validated"),
        qs,
        g.schedule(),
    )?;
    let only = |a: &Database, b: &Database| -> Vec<Candidate> {
        a.candidates
            .iter()
            .filter(|c| !b.candidates.contains(c))
            .cloned()
            .collect()
    };
    let lost = only(&base, &other);
    let gained = only(&other, &base);

    Ok(match g.format {
        Format::Json => {
            #[derive(Serialize)]
            struct Diff<'a> {
                base: &'a str,
                against: &'a str,
                base_counts: std::collections::BTreeMap<i64, usize>,
                against_counts: std::collections::BTreeMap<i64, usize>,
                only_in_base: &'a [Candidate],
                only_in_against: &'a [Candidate],
            }
            to_json(&Diff {
                base: &base.config.name,
                against,
                base_counts: base.counts(),
                against_counts: other.counts(),
                only_in_base: &lost,
                only_in_against: &gained,
            })
        }
        Format::Csv => csv_string(
            &["side", "id", "minus_K3", "genus"],
            lost.iter()
                .map(|c| (&base.config.name as &str, c))
                .chain(gained.iter().map(|c| (against, c)))
                .map(|(side, c)| {
                    vec![
                        side.to_string(),
                        c.id.clone(),
                        c.minus_k3.to_string(),
                        c.genus.to_string(),
                    ]
                }),
        ),
        Format::Table => {
            let (bc, oc) = (base.counts(), other.counts());
            let mut s = format!("{} vs {}\n", base.config.name, against);
            let qs: std::collections::BTreeSet<i64> = bc.keys().chain(oc.keys()).copied().collect();
            for q in qs {
                let (x, y) = (
                    bc.get(&q).copied().unwrap_or(0),
                    oc.get(&q).copied().unwrap_or(0),
                );
                let mark = if x == y { "" } else { "  *" };
                writeln!(s, "q = {q:>2}: {x:>4} {y:>4}{mark}").unwrap();
            }
            writeln!(
                s,
                "total: {} {}",
                base.candidates.len(),
                other.candidates.len()
            )
            .unwrap();
            for (label, list) in [(base.config.name.as_str(), &lost), (against, &gained)] {
                if !list.is_empty() {
                    writeln!(s, "only under {label}:").unwrap();
                    for c in list {
                        writeln!(s, "  {}  -K^3 = {}  g = {}", c.id, c.minus_k3, c.genus).unwrap();
                    }
                }
            }
            s
        }
    })
}

fn run(cli: Cli) -> Outcome {
    let g = &cli.global;
    let text = match &cli.command {
        Command::Enumerate { q, all } => {
            // --all means the filter set's whole index set.
            let qs: &[i64] = if *all { &[] } else { q };
            return cmd_enumerate(g, qs);
        }
        Command::Table { case } => cmd_table(g, case)?,
        Command::Wps {
            command:
                WpsCommand::Check {
                    weights,
                    degree,
                    model,
                    kmax,
                },
        } => cmd_wps(g, weights.as_deref(), *degree, model.as_deref(), *kmax)?,
        Command::Link {
            command: LinkCommand::Solve { file },
        } => cmd_link(g, file)?,
        Command::Facts => cmd_facts(g)?,
        Command::Export => cmd_export(g)?,
        Command::Diff { against, q } => cmd_diff(g, against, q)?,
    };
    match &g.out {
        Some(path) => {
            write_atomic(path, text.as_bytes())?;
            Ok(String::new())
        }
        None => Ok(text),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(text)) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Ok(Err(f)) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
        // The panic message has already been printed by the default hook.
        Err(_) => ExitCode::from(4),
    }
}
