//! Scenarios, the premise-verification harness and report files.
//!
//! Every operation here produces a [`Report`]: a header of key/value pairs,
//! a table and free-form notes. Reports carry no timestamps, so repeated
//! runs with the same inputs write byte-identical files.

pub mod premises;
pub mod runner;
pub mod scenarios;

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::world::World;

pub use premises::{
    verify_all_worlds, verify_premises, Mode, ParentSampler, PremiseReport, PremiseRow,
};
pub use runner::{run_scenario, Scenario, ScenarioOutcome};
pub use scenarios::{raincoat_world, scenario_do_switch, scenario_raincoat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Format> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::Scenario(format!("unknown format `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub name: String,
    pub header: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub notes: Vec<String>,
    pub passed: bool,
}

impl Report {
    pub fn new(name: &str, columns: &[&str]) -> Report {
        Report {
            name: name.to_string(),
            header: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            notes: Vec::new(),
            passed: true,
        }
    }

    pub fn header(&mut self, key: &str, value: impl ToString) {
        self.header.push((key.to_string(), value.to_string()));
    }

    pub fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }

    pub fn note(&mut self, line: impl Into<String>) {
        self.notes.push(line.into());
    }

    /// Value of `column` in every row.
    pub fn column(&self, column: &str) -> Option<Vec<&str>> {
        let i = self.columns.iter().position(|c| c == column)?;
        Some(self.rows.iter().map(|r| r[i].as_str()).collect())
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv of utf-8 cells"))
    }

    pub fn to_json(&self) -> Value {
        let mut header = Map::new();
        for (k, v) in &self.header {
            header.insert(k.clone(), Value::String(v.clone()));
        }
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let mut m = Map::new();
                for (c, v) in self.columns.iter().zip(r) {
                    m.insert(c.clone(), Value::String(v.clone()));
                }
                Value::Object(m)
            })
            .collect();
        serde_json::json!({
            "name": self.name,
            "header": header,
            "columns": self.columns,
            "rows": rows,
            "notes": self.notes,
            "passed": self.passed,
        })
    }

    /// Human-readable summary: header lines, the table as `column=value`
    /// records, the notes and the overall status.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# {}", self.name);
        for (k, v) in &self.header {
            let _ = writeln!(out, "{k}: {v}");
        }
        let _ = writeln!(out, "\n== rows ({}) ==", self.rows.len());
        for r in &self.rows {
            let cells: Vec<String> = self
                .columns
                .iter()
                .zip(r)
                .map(|(c, v)| format!("{c}={v}"))
                .collect();
            let _ = writeln!(out, "{}", cells.join(", "));
        }
        if !self.notes.is_empty() {
            let _ = writeln!(out, "\n== notes ==");
            for n in &self.notes {
                let _ = writeln!(out, "{n}");
            }
        }
        let _ = writeln!(
            out,
            "\nstatus: {}",
            if self.passed { "pass" } else { "fail" }
        );
        out
    }

    /// Writes `<name>.csv` (or `.json`) and `<name>.txt` into `dir`,
    /// creating it if needed.
    pub fn write(&self, dir: &Path, format: Format) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let (ext, body) = match format {
            Format::Csv => ("csv", self.to_csv()?),
            Format::Json => (
                "json",
                serde_json::to_string_pretty(&self.to_json()).expect("json of strings") + "\n",
            ),
        };
        let table = dir.join(format!("{}.{ext}", self.name));
        let text = dir.join(format!("{}.txt", self.name));
        fs::write(&table, body)?;
        fs::write(&text, self.to_text())?;
        Ok(vec![table, text])
    }
}

/// Compact description of a world: state count and program truth masks
/// (bit i set when the program holds in state i).
pub fn world_label(world: &World) -> String {
    let masks: Vec<String> = world
        .programs()
        .iter()
        .map(|p| {
            let m = p
                .truth()
                .iter()
                .enumerate()
                .fold(0u64, |acc, (i, &t)| if t { acc | 1 << i } else { acc });
            m.to_string()
        })
        .collect();
    format!(
        "states={};truth=[{}]",
        world.states().len(),
        masks.join(" ")
    )
}

/// A random world with distinct, non-empty truth vectors, drawn from `seed`.
pub fn seeded_world(n_states: usize, n_programs: usize, seed: u64) -> Result<World> {
    use rand::SeedableRng;
    World::random(
        n_states,
        n_programs,
        &mut rand_chacha::ChaCha8Rng::seed_from_u64(seed),
    )
}

/// Every world with 1..=`max_states` states and 1..=`max_programs`
/// programs having distinct, non-empty truth vectors, one representative
/// per isomorphism class (relabelling states, reordering programs). Each
/// entry is `(n_states, sorted truth masks)`, in ascending order.
pub fn canonical_worlds(max_states: usize, max_programs: usize) -> Vec<(usize, Vec<u64>)> {
    let mut out = BTreeSet::new();
    for n in 1..=max_states {
        let perms = permutations(n);
        let masks: Vec<u64> = (1..1u64 << n).collect();
        for k in 1..=max_programs.min(masks.len()) {
            for idx in crate::task::combinations(masks.len(), k) {
                let chosen: Vec<u64> = idx.iter().map(|&i| masks[i]).collect();
                let canon = perms
                    .iter()
                    .map(|p| {
                        let mut v: Vec<u64> = chosen.iter().map(|&m| permute_bits(m, p)).collect();
                        v.sort_unstable();
                        v
                    })
                    .min()
                    .unwrap();
                out.insert((n, canon));
            }
        }
    }
    out.into_iter().collect()
}

fn permute_bits(mask: u64, perm: &[usize]) -> u64 {
    perm.iter().enumerate().fold(0, |acc, (i, &to)| {
        if mask >> i & 1 == 1 {
            acc | 1 << to
        } else {
            acc
        }
    })
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                go(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}
