//! Dataset parsing and result serialization.
//!
//! All text is UTF-8 with `\n` line endings. Floating-point values are
//! written with Rust's shortest round-trip formatting so files are stable
//! under re-serialization.

mod plot;

use std::collections::HashSet;
use std::fmt;
use std::io::{Read, Write};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::evaluation::{ExperimentReport, FoldAssignment, PrCurve, PrPoint, Provenance};
use crate::graph::{BipartiteGraph, Edge, Interaction};
use crate::ranking::RankedPredictions;

pub use plot::emit_plot;

/// Share of malformed data rows tolerated before parsing aborts.
pub const MAX_MALFORMED_FRACTION: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetFormat {
    MatadorTsv,
    EdgeListCsv,
}

impl fmt::Display for DatasetFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DatasetFormat::MatadorTsv => "matador-tsv",
            DatasetFormat::EdgeListCsv => "edge-list-csv",
        })
    }
}

/// Header names of the three MATADOR fields used.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnMap {
    pub drug: String,
    pub protein: String,
    /// `None` gives every interaction weight 1.0.
    pub score: Option<String>,
}

impl Default for ColumnMap {
    fn default() -> Self {
        Self {
            drug: "chemical_id".into(),
            protein: "protein_id".into(),
            score: Some("matador_score".into()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkippedRow {
    pub line: u64,
    pub reason: String,
}

/// Summary of a parsed dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    pub source: Option<String>,
    pub format: DatasetFormat,
    pub columns: Option<ColumnMap>,
    /// Data rows read, excluding the header.
    pub rows: usize,
    /// Rows accepted as interactions (before deduplication).
    pub interactions: usize,
    pub distinct_pairs: usize,
    pub distinct_drugs: usize,
    pub distinct_proteins: usize,
    pub skipped: Vec<SkippedRow>,
    /// SHA-256 of the raw input bytes, hex encoded.
    pub content_hash: String,
}

impl DatasetManifest {
    pub fn duplicate_rows(&self) -> usize {
        self.interactions - self.distinct_pairs
    }

    fn summarise(
        source: Option<&str>,
        format: DatasetFormat,
        columns: Option<ColumnMap>,
        rows: usize,
        interactions: &[Interaction],
        skipped: Vec<SkippedRow>,
        bytes: &[u8],
    ) -> Self {
        let pairs: HashSet<(&str, &str)> = interactions
            .iter()
            .map(|i| (i.drug.as_str(), i.protein.as_str()))
            .collect();
        let drugs: HashSet<&str> = interactions.iter().map(|i| i.drug.as_str()).collect();
        let proteins: HashSet<&str> = interactions.iter().map(|i| i.protein.as_str()).collect();
        Self {
            source: source.map(str::to_owned),
            format,
            columns,
            rows,
            interactions: interactions.len(),
            distinct_pairs: pairs.len(),
            distinct_drugs: drugs.len(),
            distinct_proteins: proteins.len(),
            skipped,
            content_hash: hex(&Sha256::digest(bytes)),
        }
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn read_all(mut reader: impl Read) -> Result<Vec<u8>> {
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes)?;
    Ok(bytes)
}

fn parse_weight(field: &str) -> std::result::Result<f64, String> {
    let w: f64 = field
        .trim()
        .parse()
        .map_err(|_| format!("score {field:?} is not a number"))?;
    if !(w.is_finite() && w > 0.0) {
        return Err(format!("score {w} must be positive"));
    }
    Ok(w)
}

/// Aborts when malformed rows exceed 1% of data rows (rounded up, so a single
/// bad row in a tiny file is tolerated).
fn check_malformed(rows: usize, skipped: &[SkippedRow]) -> Result<()> {
    let allowed = (rows as f64 * MAX_MALFORMED_FRACTION).ceil() as usize;
    if skipped.len() > allowed {
        let sample: Vec<String> = skipped
            .iter()
            .take(5)
            .map(|s| format!("line {}: {}", s.line, s.reason))
            .collect();
        return Err(Error::Parse(format!(
            "{} of {} rows malformed (limit {}); first: {}",
            skipped.len(),
            rows,
            allowed,
            sample.join("; ")
        )));
    }
    for s in skipped {
        log::warn!("skipping line {}: {}", s.line, s.reason);
    }
    Ok(())
}

/// Parses a MATADOR-style tab-separated export with a header row.
pub fn parse_matador(
    reader: impl Read,
    columns: &ColumnMap,
    source: Option<&str>,
) -> Result<(Vec<Interaction>, DatasetManifest)> {
    let bytes = read_all(reader)?;
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .quoting(false)
        .flexible(true)
        .has_headers(true)
        .from_reader(bytes.as_slice());
    let headers: Vec<String> = rdr
        .headers()?
        .iter()
        .map(|h| h.trim().trim_start_matches('#').trim().to_owned())
        .collect();
    let find = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Schema(format!("column {name:?} not found in header {headers:?}")))
    };
    let drug_col = find(&columns.drug)?;
    let protein_col = find(&columns.protein)?;
    let score_col = columns.score.as_deref().map(find).transpose()?;

    let mut interactions = Vec::new();
    let mut skipped = Vec::new();
    let mut rows = 0;
    for record in rdr.records() {
        let record = record?;
        rows += 1;
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: usize| record.get(i).map(str::trim).unwrap_or("");
        let (drug, protein) = (field(drug_col), field(protein_col));
        if drug.is_empty() || protein.is_empty() {
            skipped.push(SkippedRow {
                line,
                reason: "missing chemical or protein identifier".into(),
            });
            continue;
        }
        let weight = match score_col {
            None => 1.0,
            Some(c) => match parse_weight(field(c)) {
                Ok(w) => w,
                Err(reason) => {
                    skipped.push(SkippedRow { line, reason });
                    continue;
                }
            },
        };
        interactions.push(Interaction::new(drug, protein, weight));
    }
    check_malformed(rows, &skipped)?;
    if interactions.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let manifest = DatasetManifest::summarise(
        source,
        DatasetFormat::MatadorTsv,
        Some(columns.clone()),
        rows,
        &interactions,
        skipped,
        &bytes,
    );
    Ok((interactions, manifest))
}

/// Parses a `drug,protein[,weight]` CSV edge list. A first row reading
/// `drug,protein[,weight]` is treated as a header.
pub fn parse_edge_list(reader: impl Read) -> Result<Vec<Interaction>> {
    parse_edge_list_with_manifest(reader, None).map(|(i, _)| i)
}

pub fn parse_edge_list_with_manifest(
    reader: impl Read,
    source: Option<&str>,
) -> Result<(Vec<Interaction>, DatasetManifest)> {
    let bytes = read_all(reader)?;
    let mut rdr = csv::ReaderBuilder::new()
        .flexible(true)
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(bytes.as_slice());
    let mut interactions = Vec::new();
    let mut skipped = Vec::new();
    let mut rows = 0;
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        if i == 0
            && record.len() >= 2
            && record[0].eq_ignore_ascii_case("drug")
            && record[1].eq_ignore_ascii_case("protein")
        {
            continue;
        }
        rows += 1;
        if !(2..=3).contains(&record.len()) || record[0].is_empty() || record[1].is_empty() {
            skipped.push(SkippedRow {
                line,
                reason: format!("expected drug,protein[,weight], got {} fields", record.len()),
            });
            continue;
        }
        let weight = match record.get(2) {
            None | Some("") => 1.0,
            Some(w) => match parse_weight(w) {
                Ok(w) => w,
                Err(reason) => {
                    skipped.push(SkippedRow { line, reason });
                    continue;
                }
            },
        };
        interactions.push(Interaction::new(&record[0], &record[1], weight));
    }
    check_malformed(rows, &skipped)?;
    if interactions.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let manifest = DatasetManifest::summarise(
        source,
        DatasetFormat::EdgeListCsv,
        None,
        rows,
        &interactions,
        skipped,
        &bytes,
    );
    Ok((interactions, manifest))
}

pub fn write_interactions(interactions: &[Interaction], mut out: impl Write) -> Result<()> {
    writeln!(out, "drug,protein,weight")?;
    for i in interactions {
        writeln!(out, "{},{},{}", csv_field(&i.drug), csv_field(&i.protein), i.weight)?;
    }
    Ok(())
}

/// Quotes a field only when it contains a delimiter, quote or newline.
fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

/// `rank,drug,protein,score`.
pub fn write_predictions(ranked: &RankedPredictions, mut out: impl Write) -> Result<()> {
    writeln!(out, "rank,drug,protein,score")?;
    for (rank, drug, protein, score) in ranked.rows() {
        writeln!(out, "{rank},{},{},{score}", csv_field(drug), csv_field(protein))?;
    }
    Ok(())
}

/// `n,precision,recall`.
pub fn write_pr_curve(curve: &PrCurve, mut out: impl Write) -> Result<()> {
    writeln!(out, "n,precision,recall")?;
    for p in &curve.points {
        writeln!(out, "{},{},{}", p.n, p.precision, p.recall)?;
    }
    Ok(())
}

fn parse_f64(s: &str, what: &str, line: u64) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("line {line}: bad {what} {s:?}")))
}

/// Reads a curve written by [`write_pr_curve`].
pub fn read_pr_curve(reader: impl Read) -> Result<PrCurve> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["n", "precision", "recall"] {
        return Err(Error::Schema(format!("expected n,precision,recall header, got {headers:?}")));
    }
    let mut points = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let n = record[0]
            .parse()
            .map_err(|_| Error::Parse(format!("line {line}: bad n {:?}", &record[0])))?;
        points.push(PrPoint {
            n,
            precision: parse_f64(&record[1], "precision", line)?,
            recall: parse_f64(&record[2], "recall", line)?,
        });
    }
    Ok(PrCurve {
        max_n: points.last().map_or(0, |p| p.n),
        points,
        provenance: Provenance::External,
    })
}

/// Reads an external `recall,precision` curve (columns in either order,
/// rows in any order). Points are sorted by recall and numbered from 1.
pub fn read_baseline_curve(reader: impl Read) -> Result<PrCurve> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::Schema(format!("baseline curve lacks a {name:?} column")))
    };
    let (rc, pc) = (col("recall")?, col("precision")?);
    let mut pts = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let recall = parse_f64(record.get(rc).unwrap_or(""), "recall", line)?;
        let precision = parse_f64(record.get(pc).unwrap_or(""), "precision", line)?;
        if !(0.0..=1.0).contains(&recall) || !(0.0..=1.0).contains(&precision) {
            return Err(Error::Parse(format!("line {line}: values must lie in [0, 1]")));
        }
        pts.push((recall, precision));
    }
    if pts.is_empty() {
        return Err(Error::EmptyCurve);
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let points: Vec<PrPoint> = pts
        .into_iter()
        .enumerate()
        .map(|(i, (recall, precision))| PrPoint {
            n: i + 1,
            precision,
            recall,
        })
        .collect();
    Ok(PrCurve {
        max_n: points.len(),
        points,
        provenance: Provenance::External,
    })
}

/// `drug,protein,fold` for every edge, preceded by a `# k=..,seed=..` line.
pub fn write_fold_assignment(
    graph: &BipartiteGraph,
    edges: &[Edge],
    folds: &FoldAssignment,
    mut out: impl Write,
) -> Result<()> {
    writeln!(out, "# k={},seed={}", folds.k, folds.seed)?;
    writeln!(out, "drug,protein,fold")?;
    for (e, f) in edges.iter().zip(&folds.fold_of) {
        writeln!(
            out,
            "{},{},{f}",
            csv_field(&graph.drug_ids()[e.drug]),
            csv_field(&graph.protein_ids()[e.protein])
        )?;
    }
    Ok(())
}

/// Reads a fold assignment back, aligned with `edges`.
pub fn read_fold_assignment(
    reader: impl Read,
    graph: &BipartiteGraph,
    edges: &[Edge],
) -> Result<FoldAssignment> {
    let bytes = read_all(reader)?;
    let text = std::str::from_utf8(&bytes).map_err(|e| Error::Parse(e.to_string()))?;
    let (first, rest) = text
        .split_once('\n')
        .ok_or_else(|| Error::Parse("fold file is empty".into()))?;
    let meta = first
        .strip_prefix("# ")
        .ok_or_else(|| Error::Schema("missing '# k=..,seed=..' line".into()))?;
    let mut k = None;
    let mut seed = None;
    for kv in meta.split(',') {
        match kv.split_once('=') {
            Some(("k", v)) => k = v.parse().ok(),
            Some(("seed", v)) => seed = v.parse().ok(),
            _ => {}
        }
    }
    let (k, seed) = k
        .zip(seed)
        .ok_or_else(|| Error::Schema(format!("bad fold metadata {meta:?}")))?;

    let mut position = std::collections::HashMap::with_capacity(edges.len());
    for (i, e) in edges.iter().enumerate() {
        position.insert((e.drug, e.protein), i);
    }
    let mut fold_of = vec![usize::MAX; edges.len()];
    let mut rdr = csv::ReaderBuilder::new().from_reader(rest.as_bytes());
    for record in rdr.records() {
        let record = record?;
        let d = graph.drug_index(&record[0]);
        let p = graph.protein_index(&record[1]);
        let idx = d
            .zip(p)
            .and_then(|key| position.get(&key))
            .ok_or_else(|| Error::Parse(format!("unknown edge {}–{}", &record[0], &record[1])))?;
        let f: usize = record[2]
            .parse()
            .map_err(|_| Error::Parse(format!("bad fold {:?}", &record[2])))?;
        if f >= k {
            return Err(Error::Parse(format!("fold {f} out of range for k={k}")));
        }
        fold_of[*idx] = f;
    }
    if fold_of.contains(&usize::MAX) {
        return Err(Error::Parse("fold file does not cover every edge".into()));
    }
    Ok(FoldAssignment { k, seed, fold_of })
}

/// Deterministic text report: dataset, protocol, fold sizes and per-index
/// AUPR. Timings are written separately by [`write_timings`].
pub fn write_report(report: &ExperimentReport, mut out: impl Write) -> Result<()> {
    let o = &report.options;
    writeln!(out, "# link prediction cross-validation report")?;
    writeln!(out, "dataset.drugs = {}", report.n_drugs)?;
    writeln!(out, "dataset.proteins = {}", report.n_proteins)?;
    writeln!(out, "dataset.interactions = {}", report.n_interactions)?;
    writeln!(out, "folds = {}", o.k)?;
    writeln!(out, "seed = {}", o.seed)?;
    writeln!(out, "max_n = {}", o.max_n)?;
    writeln!(out, "tie_policy = {}", o.tie_policy)?;
    let sizes: Vec<String> = report.fold_sizes.iter().map(usize::to_string).collect();
    writeln!(out, "fold_sizes = {}", sizes.join(","))?;
    writeln!(out, "aupr_method = trapezoid over fold-averaged curve (equal recalls merged)")?;
    writeln!(out)?;
    writeln!(out, "## AUPR")?;
    writeln!(
        out,
        "{:<28} {:<22} {:>16} {:>10}",
        "index", "aupr", "mean_positives", "points"
    )?;
    if let Some(b) = &report.baseline {
        writeln!(
            out,
            "{:<28} {:<22} {:>16} {:>10}",
            format!("Baseline ({})", b.name),
            b.aupr,
            "-",
            b.curve.len()
        )?;
    }
    for r in &report.results {
        match &r.outcome {
            Ok(s) => writeln!(
                out,
                "{:<28} {:<22} {:>16} {:>10}",
                r.label,
                s.aupr,
                format!("{:.1}", s.mean_positive_predictions()),
                s.curve.len()
            )?,
            Err(_) => writeln!(out, "{:<28} {:<22}", r.label, "FAILED")?,
        }
    }
    writeln!(out)?;
    writeln!(out, "## per-fold detail")?;
    for r in &report.results {
        if let Ok(s) = &r.outcome {
            let lens: Vec<String> = s.fold_lengths.iter().map(usize::to_string).collect();
            let pos: Vec<String> = s.positive_predictions.iter().map(usize::to_string).collect();
            writeln!(out, "{}.curve_points = {}", r.label, lens.join(","))?;
            writeln!(out, "{}.positive_predictions = {}", r.label, pos.join(","))?;
        }
    }
    let failures: Vec<_> = report
        .results
        .iter()
        .filter_map(|r| r.outcome.as_ref().err().map(|e| (&r.label, e)))
        .collect();
    if !failures.is_empty() {
        writeln!(out)?;
        writeln!(out, "## failures")?;
        for (label, err) in failures {
            writeln!(out, "{label}: {err}")?;
        }
    }
    Ok(())
}

pub fn write_timings(report: &ExperimentReport, mut out: impl Write) -> Result<()> {
    for (stage, d) in &report.timings {
        writeln!(out, "{stage}: {:.3}s", d.as_secs_f64())?;
    }
    Ok(())
}
