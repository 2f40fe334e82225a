//! Command-line front end. `run` is what the `kglb` binary calls.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::bench::{compare, OpsScript, SyntheticSpec};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::ids::EntityId;
use crate::label_store::{LabelStore, MemoryReport};
use crate::ontology::{build_ontology, emit_dot, louvain, partition_assign};
use crate::persistence::{dump, dump_to_file, load, load_from_file};
use crate::query::{n_hop, HopQuery, DEFAULT_MAX_HOPS};

pub const MAX_HOPS_ENV: &str = "KGLB_MAX_HOPS";

#[derive(Debug, Parser)]
#[command(
    name = "kglb",
    version,
    about = "Tuple-index label store for property graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a snapshot from a JSON manifest of delimited files.
    Ingest {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run an N-hop query read from a JSON file.
    Query {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        query: PathBuf,
        /// Emit `{"paths": [...], "truncated": bool}` instead of one path per line.
        #[arg(long)]
        json: bool,
    },
    /// Extract the label ontology as DOT.
    Ontology {
        #[arg(long)]
        graph: PathBuf,
        /// Output file; stdout when omitted.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Louvain clustering of the label graph.
    Cluster {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Assign nodes to k partitions by label cluster and report the cut.
    Partition {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Export every node and edge with its labels as JSON.
    Dump {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Validate a snapshot and check that re-dumping reproduces it.
    Load {
        #[arg(long)]
        graph: PathBuf,
    },
    /// Synthetic comparison against the hash-map baseline.
    Bench {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Entity counts, tuple statistics and memory.
    Stats {
        #[arg(long)]
        graph: PathBuf,
    },
}

/// Bench input: a synthetic spec plus an optional ops script.
#[derive(Debug, serde::Deserialize)]
struct BenchFile {
    #[serde(flatten)]
    spec: SyntheticSpec,
    #[serde(default)]
    ops: Option<OpsScript>,
}

#[derive(Debug, Serialize)]
struct StoreStats {
    entities: usize,
    labeled: usize,
    live_tuples: usize,
    maxid: u32,
    recycle_depth: usize,
    memory: MemoryReport,
}

fn store_stats(g: &Graph, s: &LabelStore) -> StoreStats {
    StoreStats {
        entities: s.entity_count(),
        labeled: s.labeled_count(),
        live_tuples: s.registry().live_count(),
        maxid: s.registry().maxid(),
        recycle_depth: s.registry().recycle_depth(),
        memory: s.memory_report(g.dict()),
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn emit(out: &mut dyn Write, path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::io(p, e)),
        None => out
            .write_all(text.as_bytes())
            .map_err(|e| Error::io("<stdout>", e)),
    }
}

fn pretty<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

/// Hop cap from `KGLB_MAX_HOPS`, defaulting to 10.
pub fn hop_cap_from_env() -> Result<usize> {
    match std::env::var(MAX_HOPS_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| {
            Error::InvalidQuery(format!(
                "{MAX_HOPS_ENV}={v:?} is not a non-negative integer"
            ))
        }),
        Err(_) => Ok(DEFAULT_MAX_HOPS),
    }
}

fn execute(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    match cmd {
        Command::Ingest {
            manifest,
            out: path,
        } => {
            let g = crate::ingest::ingest_path(&manifest)?;
            dump_to_file(&g, &path)?;
            let _ = writeln!(
                err,
                "ingested {} nodes, {} edges, {} labels",
                g.node_count(),
                g.edge_count(),
                g.dict().len()
            );
        }
        Command::Query { graph, query, json } => {
            let g = load_from_file(&graph)?;
            let q: HopQuery = serde_json::from_str(&read(&query)?)
                .map_err(|e| Error::InvalidQuery(format!("{}: {e}", query.display())))?;
            let r = n_hop(&g, &q, hop_cap_from_env()?)?;
            let text = if json {
                let mut s = r.to_json(&g);
                s.push('\n');
                s
            } else {
                let mut s = String::new();
                for p in &r.paths {
                    let names: Vec<String> = p.iter().map(|&v| g.display_name(v)).collect();
                    s.push_str(&names.join(" -> "));
                    s.push('\n');
                }
                s
            };
            emit(out, None, &text)?;
            if r.truncated {
                let _ = writeln!(err, "truncated at {} paths", q.max_paths);
            }
        }
        Command::Ontology { graph, dot } => {
            let g = load_from_file(&graph)?;
            emit(out, dot.as_deref(), &emit_dot(&build_ontology(&g)?))?;
        }
        Command::Cluster { graph, seed, json } => {
            let g = load_from_file(&graph)?;
            let c = louvain(&build_ontology(&g)?, seed)?;
            let doc = json!({
                "clusters": c.cluster_count(),
                "modularity": c.modularity,
                "cluster_of": c.cluster_of,
            });
            emit(out, json.as_deref(), &pretty(&doc)?)?;
        }
        Command::Partition {
            graph,
            k,
            seed,
            report,
        } => {
            let g = load_from_file(&graph)?;
            let c = louvain(&build_ontology(&g)?, seed)?;
            let p = partition_assign(&g, &c, k)?;
            emit(out, report.as_deref(), &pretty(&p.report)?)?;
        }
        Command::Dump { graph, out: path } => {
            let g = load_from_file(&graph)?;
            emit(out, path.as_deref(), &pretty(&export(&g)?)?)?;
        }
        Command::Load { graph } => {
            let bytes = std::fs::read(&graph).map_err(|e| Error::io(&graph, e))?;
            let g = load(&bytes)?;
            if dump(&g) != bytes {
                return Err(Error::CorruptSnapshot {
                    section: 0,
                    message: "re-dump differs from the file".into(),
                });
            }
            let doc = json!({
                "bytes": bytes.len(),
                "nodes": g.node_count(),
                "edges": g.edge_count(),
                "labels": g.dict().len(),
                "roundtrip": "identical",
            });
            emit(out, None, &pretty(&doc)?)?;
        }
        Command::Bench { spec, report } => {
            let file: BenchFile = serde_json::from_str(&read(&spec)?)
                .map_err(|e| Error::Spec(format!("{}: {e}", spec.display())))?;
            let ops = file
                .ops
                .unwrap_or_else(|| OpsScript::default_for(&file.spec));
            let r = compare(&file.spec, &ops)?;
            emit(out, report.as_deref(), &pretty(&r)?)?;
        }
        Command::Stats { graph } => {
            let g = load_from_file(&graph)?;
            let doc = json!({
                "nodes": g.node_count(),
                "edges": g.edge_count(),
                "labels": g.dict().len(),
                "node_labels": store_stats(&g, g.node_labels()),
                "edge_labels": store_stats(&g, g.edge_labels()),
                "topology_bytes": g.topology_bytes(),
            });
            emit(out, None, &pretty(&doc)?)?;
        }
    }
    Ok(())
}

fn export(g: &Graph) -> Result<serde_json::Value> {
    let mut nodes = Vec::with_capacity(g.node_count());
    for v in 0..g.node_count() {
        let v = EntityId(v as u32);
        nodes.push(json!({
            "id": v.0,
            "key": g.node_key(v),
            "labels": g.node_label_strings(v)?,
        }));
    }
    let mut edges = Vec::with_capacity(g.edge_count());
    for (i, (s, t)) in g.edges().enumerate() {
        edges.push(json!({
            "source": g.display_name(s),
            "target": g.display_name(t),
            "labels": g.edge_label_strings(EntityId(i as u32))?,
        }));
    }
    Ok(json!({ "nodes": nodes, "edges": edges }))
}

/// Parses `argv` (program name first) and runs the command. Returns the
/// process exit code: 0 on success, 1 on a module error (JSON envelope on
/// `err`), 2 on a usage error.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = err.write_all(text.as_bytes());
                2
            } else {
                let _ = out.write_all(text.as_bytes());
                0
            };
        }
    };
    match execute(cli.command, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let doc = json!({ "error": e.kind(), "message": e.to_string() });
            let _ = writeln!(err, "{doc}");
            1
        }
    }
}
