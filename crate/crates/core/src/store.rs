//! Candidate database persistence and table rendering.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::arith::Rational;
use crate::enumerate::{enumerate_indices, Candidate, FilterConfig, Schedule};
use crate::error::{Error, Result};

pub const FORMAT_VERSION: &str = "qfano-db/1";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Database {
    pub version: String,
    pub config: FilterConfig,
    pub candidates: Vec<Candidate>,
}

impl Database {
    /// Enumerates `qs` (or the whole index set when empty) under `config`.
    /// The stored config records exactly the indices covered.
    pub fn build(mut config: FilterConfig, qs: &[i64], schedule: Schedule) -> Result<Self> {
        if !qs.is_empty() {
            let mut qs = qs.to_vec();
            qs.sort_unstable();
            qs.dedup();
            config.index_set = qs;
        }
        config.validate()?;
        let candidates = enumerate_indices(&config.index_set, &config, schedule);
        Ok(Database {
            version: FORMAT_VERSION.to_string(),
            config,
            candidates,
        })
    }

    pub fn of_index(&self, q: i64) -> impl Iterator<Item = &Candidate> {
        self.candidates.iter().filter(move |c| c.q == q)
    }

    pub fn indices(&self) -> Vec<i64> {
        let mut qs: Vec<i64> = self.candidates.iter().map(|c| c.q).collect();
        qs.dedup();
        qs
    }

    pub fn counts(&self) -> BTreeMap<i64, usize> {
        let mut m = BTreeMap::new();
        for c in &self.candidates {
            *m.entry(c.q).or_insert(0) += 1;
        }
        m
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("database serializes");
        s.push('\n');
        s
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let db: Database = serde_json::from_str(s)?;
        if db.version != FORMAT_VERSION {
            return Err(Error::Parse(format!(
                "unsupported database version {:?}",
                db.version
            )));
        }
        let mut sorted = db.candidates.clone();
        sorted.sort_by(Candidate::canonical_cmp);
        if sorted != db.candidates {
            return Err(Error::Parse("candidates are not in canonical order".into()));
        }
        Ok(db)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Database::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_json().as_bytes())
    }

    /// One row per candidate: index-only basket, degree, `dim|kA|` for
    /// `k < q`, then `dim|-K|`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["q", "basket", "A3", "dim_kA", "dim_-K", "genus", "id"])
            .expect("csv write");
        for c in &self.candidates {
            let dims: Vec<String> = c.dim_table[..c.dim_table.len() - 1]
                .iter()
                .map(i64::to_string)
                .collect();
            w.write_record([
                c.q.to_string(),
                c.basket.index_string(),
                c.a3.to_string(),
                dims.join(" "),
                c.dim_minus_k().to_string(),
                c.genus.to_string(),
                c.id.clone(),
            ])
            .expect("csv write");
        }
        String::from_utf8(w.into_inner().expect("csv flush")).expect("utf8")
    }
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.to_string()))?;
    Ok(())
}

/// The per-index reference tables and the hypothesis each one assumes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LemmaTable {
    Q3,
    Q4,
    Q5,
    Q6,
    Q7,
    Q8,
    Q9,
}

impl LemmaTable {
    pub const ALL: [LemmaTable; 7] = [
        LemmaTable::Q3,
        LemmaTable::Q4,
        LemmaTable::Q5,
        LemmaTable::Q6,
        LemmaTable::Q7,
        LemmaTable::Q8,
        LemmaTable::Q9,
    ];

    pub fn parse(s: &str) -> Option<Self> {
        LemmaTable::ALL.into_iter().find(|t| t.name() == s)
    }

    pub fn name(self) -> &'static str {
        match self {
            LemmaTable::Q3 => "q3",
            LemmaTable::Q4 => "q4",
            LemmaTable::Q5 => "q5",
            LemmaTable::Q6 => "q6",
            LemmaTable::Q7 => "q7",
            LemmaTable::Q8 => "q8",
            LemmaTable::Q9 => "q9",
        }
    }

    pub fn q(self) -> i64 {
        match self {
            LemmaTable::Q3 => 3,
            LemmaTable::Q4 => 4,
            LemmaTable::Q5 => 5,
            LemmaTable::Q6 => 6,
            LemmaTable::Q7 => 7,
            LemmaTable::Q8 => 8,
            LemmaTable::Q9 => 9,
        }
    }

    pub fn hypothesis(self) -> &'static str {
        match self {
            LemmaTable::Q3 => "g >= 21, basket nonempty",
            LemmaTable::Q4 => "g >= 22, basket nonempty",
            LemmaTable::Q5 => "g >= 19",
            LemmaTable::Q6 => "g > 15",
            LemmaTable::Q7 => "g > 17, or g = 17 and A^3 = 1/10",
            LemmaTable::Q8 => "g >= 10, A^3 != 4/91",
            LemmaTable::Q9 => "g > 4",
        }
    }

    pub fn admits(self, c: &Candidate) -> bool {
        if c.q != self.q() {
            return false;
        }
        let g = c.genus;
        match self {
            LemmaTable::Q3 => g >= 21 && !c.basket.is_empty(),
            LemmaTable::Q4 => g >= 22 && !c.basket.is_empty(),
            LemmaTable::Q5 => g >= 19,
            LemmaTable::Q6 => g > 15,
            LemmaTable::Q7 => g > 17 || (g == 17 && c.a3 == Rational::new(1, 10)),
            LemmaTable::Q8 => g >= 10 && c.a3 != Rational::new(4, 91),
            LemmaTable::Q9 => g > 4,
        }
    }
}

/// A table row with orientation decorations erased.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TableRow {
    pub indices: Vec<i64>,
    pub a3: Rational,
    /// `dim|kA|` for `k = 1..q`, the last one being `dim|-K|`.
    pub dims: Vec<i64>,
    /// How many decorated candidates collapse to this row.
    pub decorations: usize,
}

impl TableRow {
    pub fn basket_string(&self) -> String {
        let idx: Vec<String> = self.indices.iter().map(i64::to_string).collect();
        format!("({})", idx.join(","))
    }
}

/// Rows of the candidates satisfying `pred`, deduplicated over orientation
/// decorations and sorted by degree descending, then basket.
pub fn collapse_rows<'a>(cands: impl IntoIterator<Item = &'a Candidate>) -> Vec<TableRow> {
    let mut rows: BTreeMap<(Vec<i64>, Rational, Vec<i64>), usize> = BTreeMap::new();
    for c in cands {
        *rows
            .entry((c.basket.indices(), c.a3, c.dim_table.clone()))
            .or_insert(0) += 1;
    }
    let mut out: Vec<TableRow> = rows
        .into_iter()
        .map(|((indices, a3, dims), decorations)| TableRow {
            indices,
            a3,
            dims,
            decorations,
        })
        .collect();
    out.sort_by(|x, y| y.a3.cmp(&x.a3).then_with(|| x.indices.cmp(&y.indices)));
    out
}

pub fn lemma_rows(db: &Database, table: LemmaTable) -> Vec<TableRow> {
    collapse_rows(db.candidates.iter().filter(|c| table.admits(c)))
}

/// Plain-text rendering of a table: basket, A^3, then one column per linear system.
pub fn render_table(q: i64, title: &str, rows: &[TableRow]) -> String {
    let mut header = vec!["B".to_string(), "A^3".to_string()];
    header.extend((1..q).map(|k| {
        if k == 1 {
            "|A|".to_string()
        } else {
            format!("|{k}A|")
        }
    }));
    header.push("|-K|".to_string());

    let mut body: Vec<Vec<String>> = Vec::new();
    let mut collapsed = false;
    for row in rows {
        let mut basket = row.basket_string();
        if row.decorations > 1 {
            basket.push_str(&format!(" *{}", row.decorations));
            collapsed = true;
        }
        let mut cells = vec![basket, row.a3.to_string()];
        cells.extend(row.dims.iter().map(i64::to_string));
        body.push(cells);
    }

    let widths: Vec<usize> = (0..header.len())
        .map(|i| {
            body.iter()
                .map(|r| r[i].len())
                .chain(std::iter::once(header[i].len()))
                .max()
                .unwrap_or(0)
        })
        .collect();
    let line = |cells: &[String]| -> String {
        let padded: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:>w$}"))
            .collect();
        padded.join("  ").trim_end().to_string()
    };

    let mut out = String::new();
    writeln!(out, "{title}").unwrap();
    writeln!(out, "{}", line(&header)).unwrap();
    let rule: usize = widths.iter().sum::<usize>() + 2 * (widths.len() - 1);
    writeln!(out, "{}", "-".repeat(rule)).unwrap();
    for cells in &body {
        writeln!(out, "{}", line(cells)).unwrap();
    }
    writeln!(out, "{} rows", rows.len()).unwrap();
    if collapsed {
        writeln!(out, "*n: row collapses n orientation decorations").unwrap();
    }
    out
}

pub fn render_lemma_table(db: &Database, table: LemmaTable) -> String {
    let title = format!("q = {}, {}", table.q(), table.hypothesis());
    render_table(table.q(), &title, &lemma_rows(db, table))
}
