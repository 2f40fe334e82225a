//! Building a [`Graph`] from delimited text files described by a JSON manifest.
//!
//! Node files name one key column; edge files name a source and a target column
//! whose values are node keys (unseen keys create nodes). Label columns either
//! attach the cell text as a label (`value`) or additionally group it under the
//! column header as a key-label (`keyed`).

use std::fs::File;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::ids::{EntityId, LabelId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelMode {
    #[default]
    Value,
    Keyed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelColumn {
    pub column: String,
    #[serde(default)]
    pub mode: LabelMode,
}

fn default_delimiter() -> String {
    ",".into()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeFile {
    pub path: PathBuf,
    #[serde(default = "default_delimiter")]
    pub delimiter: String,
    pub key_column: String,
    #[serde(default)]
    pub label_columns: Vec<LabelColumn>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeFile {
    pub path: PathBuf,
    #[serde(default = "default_delimiter")]
    pub delimiter: String,
    pub source_column: String,
    pub target_column: String,
    #[serde(default)]
    pub label_columns: Vec<LabelColumn>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IngestManifest {
    /// Labels interned before any file is read, fixing their ids.
    #[serde(default)]
    pub seed_labels: Vec<String>,
    #[serde(default)]
    pub node_files: Vec<NodeFile>,
    #[serde(default)]
    pub edge_files: Vec<EdgeFile>,
}

impl IngestManifest {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Manifest(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

/// Reads the manifest at `path` and ingests it, resolving data paths against
/// the manifest's directory.
pub fn ingest_path(path: &Path) -> Result<Graph> {
    let manifest = IngestManifest::load(path)?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    ingest(&manifest, base)
}

pub fn ingest(manifest: &IngestManifest, base_dir: &Path) -> Result<Graph> {
    let mut g = Graph::new();
    for l in &manifest.seed_labels {
        g.dict_mut().intern(l)?;
    }
    for nf in &manifest.node_files {
        let mut table = Table::open(base_dir, &nf.path, &nf.delimiter)?;
        let key = table.column(&nf.key_column)?;
        let labels = table.label_columns(&nf.label_columns)?;
        while let Some(row) = table.next_row()? {
            let k = &row[key];
            if k.is_empty() {
                return Err(table.parse_error("empty node key"));
            }
            let v = g.add_node(k)?;
            let ids = intern_row(&mut g, &labels, &row)?;
            if !ids.is_empty() {
                g.node_labels.add_label_ids(v, &ids)?;
            }
        }
    }
    for ef in &manifest.edge_files {
        let mut table = Table::open(base_dir, &ef.path, &ef.delimiter)?;
        let src = table.column(&ef.source_column)?;
        let dst = table.column(&ef.target_column)?;
        let labels = table.label_columns(&ef.label_columns)?;
        while let Some(row) = table.next_row()? {
            if row[src].is_empty() || row[dst].is_empty() {
                return Err(table.parse_error("empty edge endpoint"));
            }
            let s = g.add_node(&row[src])?;
            let t = g.add_node(&row[dst])?;
            let e = g.append_edge(s, t)?;
            let ids = intern_row(&mut g, &labels, &row)?;
            if !ids.is_empty() {
                g.edge_labels.add_label_ids(e, &ids)?;
            }
        }
    }
    Ok(g)
}

struct ResolvedColumn {
    index: usize,
    header: String,
    mode: LabelMode,
}

fn intern_row(
    g: &mut Graph,
    cols: &[ResolvedColumn],
    row: &csv::StringRecord,
) -> Result<Vec<LabelId>> {
    let mut ids = Vec::with_capacity(cols.len());
    for c in cols {
        let cell = &row[c.index];
        if cell.is_empty() {
            continue;
        }
        let dict = g.dict_mut();
        match c.mode {
            LabelMode::Value => ids.push(dict.intern(cell)?),
            LabelMode::Keyed => {
                let key = dict.intern(&c.header)?;
                let value = dict.intern(cell)?;
                dict.group_add(key, value)?;
                ids.push(value);
            }
        }
    }
    Ok(ids)
}

struct Table {
    path: PathBuf,
    reader: csv::Reader<File>,
    headers: csv::StringRecord,
    line: u64,
}

impl Table {
    fn open(base: &Path, rel: &Path, delimiter: &str) -> Result<Self> {
        let path = base.join(rel);
        let delim = match delimiter.as_bytes() {
            [b] => *b,
            b"\\t" => b'\t',
            _ => {
                return Err(Error::Manifest(format!(
                    "delimiter for {} must be a single byte, got {delimiter:?}",
                    rel.display()
                )))
            }
        };
        let file = File::open(&path).map_err(|e| Error::io(&path, e))?;
        let mut reader = csv::ReaderBuilder::new()
            .delimiter(delim)
            .has_headers(true)
            .flexible(false)
            .from_reader(file);
        let headers = reader.headers().map_err(|e| csv_error(&path, e))?.clone();
        Ok(Table {
            path,
            reader,
            headers,
            line: 1,
        })
    }

    fn column(&self, name: &str) -> Result<usize> {
        self.headers.iter().position(|h| h == name).ok_or_else(|| {
            Error::Manifest(format!(
                "column {name:?} not found in {}",
                self.path.display()
            ))
        })
    }

    fn label_columns(&self, cols: &[LabelColumn]) -> Result<Vec<ResolvedColumn>> {
        cols.iter()
            .map(|c| {
                Ok(ResolvedColumn {
                    index: self.column(&c.column)?,
                    header: c.column.clone(),
                    mode: c.mode,
                })
            })
            .collect()
    }

    fn next_row(&mut self) -> Result<Option<csv::StringRecord>> {
        let mut rec = csv::StringRecord::new();
        match self.reader.read_record(&mut rec) {
            Ok(true) => {
                self.line = rec.position().map(|p| p.line()).unwrap_or(self.line + 1);
                Ok(Some(rec))
            }
            Ok(false) => Ok(None),
            Err(e) => Err(csv_error(&self.path, e)),
        }
    }

    fn parse_error(&self, message: &str) -> Error {
        Error::Parse {
            path: self.path.clone(),
            line: self.line,
            message: message.into(),
        }
    }
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        csv::ErrorKind::UnequalLengths {
            expected_len, len, ..
        } => Error::Parse {
            path: path.to_owned(),
            line,
            message: format!("expected {expected_len} fields, found {len}"),
        },
        other => Error::Parse {
            path: path.to_owned(),
            line,
            message: format!("{other:?}"),
        },
    }
}

/// Node id for `key`, for callers addressing nodes by their external key.
pub fn resolve_node(g: &Graph, key: &str) -> Result<EntityId> {
    g.node_by_key(key)
        .ok_or_else(|| Error::UnknownNodeKey(key.to_owned()))
}
