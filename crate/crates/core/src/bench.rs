//! Benchmark harness: object retrieval, single-version retrieval as
//! versions grow, random single-version retrieval, and multi-version batch
//! retrieval, each over any subset of the three methods.
//!
//! Every retrieval is checked against the corpus before its timing is
//! recorded. Logical operation counts are deterministic; wall times are
//! informational.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::OpenOptions;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::baselines::{build_ebvr, build_rbvr};
use crate::corpus::{generate_corpus, Corpus, CorpusSpec};
use crate::error::{Error, Result};
use crate::pattern::SynonymMap;
use crate::retrieval::{Method, RetrievalResult, RetrievalStats, VersionRetriever};
use crate::vtag_index::{VTagIndex, DEFAULT_FANOUT};

pub const CSV_HEADER: &str = "method,experiment,x,trial,elapsed_us,ops";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Experiment {
    ObjectRetrieval,
    SingleVersionGrowth,
    SingleVersionRandom,
    MultiVersion,
}

impl Experiment {
    pub const ALL: [Experiment; 4] = [
        Experiment::ObjectRetrieval,
        Experiment::SingleVersionGrowth,
        Experiment::SingleVersionRandom,
        Experiment::MultiVersion,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::ObjectRetrieval => "object_retrieval",
            Experiment::SingleVersionGrowth => "single_version_growth",
            Experiment::SingleVersionRandom => "single_version_random",
            Experiment::MultiVersion => "multi_version",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Experiment::ALL.iter().map(|e| e.name()).collect();
                format!("unknown experiment {s:?} (expected one of {})", names.join(", "))
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub corpus_spec: CorpusSpec,
    pub methods: Vec<Method>,
    pub experiment: Experiment,
    /// Recorded repetitions per point; one extra warm-up pass runs first.
    pub trials: usize,
    /// Workload seed.
    pub seed: u64,
    pub fanout: usize,
    /// Collection sizes for object retrieval.
    pub collection_sizes: Vec<usize>,
    /// Version counts for the version-growth experiment.
    pub version_counts: Vec<u32>,
    /// Queries in the random single-version experiment.
    pub random_queries: usize,
    /// Documents sampled, and versions per batch, in the multi-version
    /// experiment.
    pub batch_docs: usize,
    pub batch_size: usize,
}

impl BenchConfig {
    pub fn new(experiment: Experiment) -> Self {
        Self {
            corpus_spec: CorpusSpec::default(),
            methods: Method::ALL.to_vec(),
            experiment,
            trials: 3,
            seed: 42,
            fanout: DEFAULT_FANOUT,
            collection_sizes: vec![25, 50, 100, 200],
            version_counts: vec![10, 20, 40, 80],
            random_queries: 10,
            batch_docs: 10,
            batch_size: 8,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidBenchConfig(m.to_string()));
        if self.methods.is_empty() {
            return bad("no methods selected");
        }
        if self.trials < 3 {
            return bad("at least 3 trials are required");
        }
        self.corpus_spec.validate()?;
        match self.experiment {
            Experiment::ObjectRetrieval if self.collection_sizes.is_empty() || self.collection_sizes.contains(&0) => {
                bad("collection sizes must be positive")
            }
            Experiment::SingleVersionGrowth if self.version_counts.is_empty() || self.version_counts.contains(&0) => {
                bad("version counts must be positive")
            }
            Experiment::SingleVersionRandom if self.random_queries == 0 => bad("no random queries"),
            Experiment::MultiVersion if self.batch_size == 0 || self.batch_docs == 0 => {
                bad("batch size and sampled documents must be positive")
            }
            Experiment::MultiVersion if self.batch_size as u32 > self.corpus_spec.versions_per_doc => {
                bad("batch size exceeds versions per document")
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub method: Method,
    pub experiment: Experiment,
    /// Collection size, version count, query index or document id.
    pub x: u64,
    pub trial: usize,
    pub elapsed_us: f64,
    pub ops: u64,
    /// Breakdown of `ops` (not written to CSV).
    pub stats: RetrievalStats,
}

impl BenchRecord {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{:.3},{}",
            self.method, self.experiment, self.x, self.trial, self.elapsed_us, self.ops
        )
    }
}

pub fn build_retriever(
    method: Method,
    corpus: &Corpus,
    fanout: usize,
) -> Result<Box<dyn VersionRetriever + Sync>> {
    Ok(match method {
        Method::Vtag => Box::new(VTagIndex::build(corpus, fanout, SynonymMap::default())?),
        Method::Ebvr => Box::new(build_ebvr(corpus)?),
        Method::Rbvr => Box::new(build_rbvr(corpus)?),
    })
}

/// Checks a result against the corpus: right document, `m = min(vid, n)`,
/// and byte-identical content.
pub fn verify(corpus: &Corpus, doc_id: u64, vid: u32, r: &RetrievalResult) -> Result<()> {
    let mismatch = || Error::GroundTruthMismatch { doc_id, vid };
    let doc = corpus.get(doc_id).ok_or_else(mismatch)?;
    let m = vid.min(doc.latest());
    let ok = r.doc_id == doc_id
        && r.m == m
        && r.exact == (vid == m)
        && doc.version(m) == Some(r.content.as_str());
    ok.then_some(()).ok_or_else(mismatch)
}

/// A single query (or batch) of the workload.
struct Query {
    doc_id: u64,
    title: String,
    vids: Vec<u32>,
    x: u64,
}

fn run_queries(
    cfg: &BenchConfig,
    corpus: &Corpus,
    queries: &[Query],
    records: &mut Vec<BenchRecord>,
) -> Result<()> {
    for &method in &cfg.methods {
        let retriever = build_retriever(method, corpus, cfg.fanout)?;
        for trial in 0..=cfg.trials {
            for q in queries {
                let start = Instant::now();
                let (results, stats) = if let [vid] = q.vids[..] {
                    let (r, s) = retriever.retrieve(&q.title, vid)?;
                    (vec![r], s)
                } else {
                    retriever.retrieve_many(&q.title, &q.vids)?
                };
                let elapsed = start.elapsed();
                for (r, &vid) in results.iter().zip(&q.vids) {
                    verify(corpus, q.doc_id, vid, r)?;
                }
                if trial == 0 {
                    continue;
                }
                records.push(BenchRecord {
                    method,
                    experiment: cfg.experiment,
                    x: q.x,
                    trial,
                    elapsed_us: elapsed.as_secs_f64() * 1e6,
                    ops: stats.total(),
                    stats,
                });
            }
        }
    }
    Ok(())
}

fn title_queries(corpus: &Corpus, vid: impl Fn(u32) -> u32, x: u64) -> Vec<Query> {
    corpus
        .documents()
        .iter()
        .map(|d| Query {
            doc_id: d.doc_id(),
            title: d.meta.title.clone(),
            vids: vec![vid(d.latest())],
            x,
        })
        .collect()
}

/// Every document queried once at version 1, for each collection size.
pub fn run_object_retrieval(cfg: &BenchConfig) -> Result<Vec<BenchRecord>> {
    cfg.validate()?;
    let largest = *cfg.collection_sizes.iter().max().unwrap_or(&1);
    let full = generate_corpus(&CorpusSpec {
        num_docs: largest,
        ..cfg.corpus_spec
    })?;
    let mut records = Vec::new();
    for &size in &cfg.collection_sizes {
        let corpus = full.prefix(size, cfg.corpus_spec.versions_per_doc);
        let queries = title_queries(&corpus, |_| 1, size as u64);
        run_queries(cfg, &corpus, &queries, &mut records)?;
    }
    Ok(records)
}

/// Each document's latest version, for each version count.
pub fn run_single_version_growth(cfg: &BenchConfig) -> Result<Vec<BenchRecord>> {
    cfg.validate()?;
    let most = *cfg.version_counts.iter().max().unwrap_or(&1);
    let full = generate_corpus(&CorpusSpec {
        versions_per_doc: most,
        ..cfg.corpus_spec
    })?;
    let mut records = Vec::new();
    for &count in &cfg.version_counts {
        let corpus = full.prefix(cfg.corpus_spec.num_docs, count);
        let queries = title_queries(&corpus, |n| n, count as u64);
        run_queries(cfg, &corpus, &queries, &mut records)?;
    }
    Ok(records)
}

/// Seeded random `(document, version)` pairs; `x` is the query index.
pub fn random_workload(corpus: &Corpus, count: usize, seed: u64) -> Vec<(u64, u32)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let docs = corpus.documents();
    (0..count)
        .map(|_| {
            let d = &docs[rng.gen_range(0..docs.len())];
            (d.doc_id(), rng.gen_range(1..=d.latest()))
        })
        .collect()
}

pub fn run_single_version_random(cfg: &BenchConfig) -> Result<Vec<BenchRecord>> {
    cfg.validate()?;
    let corpus = generate_corpus(&cfg.corpus_spec)?;
    let queries: Vec<Query> = random_workload(&corpus, cfg.random_queries, cfg.seed)
        .into_iter()
        .enumerate()
        .map(|(i, (doc_id, vid))| Query {
            doc_id,
            title: corpus.get(doc_id).expect("sampled from corpus").meta.title.clone(),
            vids: vec![vid],
            x: i as u64,
        })
        .collect();
    let mut records = Vec::new();
    run_queries(cfg, &corpus, &queries, &mut records)?;
    Ok(records)
}

/// Seeded document sample, each with `batch_size` distinct version ids.
pub fn multi_version_workload(
    corpus: &Corpus,
    docs: usize,
    batch_size: usize,
    seed: u64,
) -> Vec<(u64, Vec<u32>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let all = corpus.documents();
    let mut picked = index::sample(&mut rng, all.len(), docs.min(all.len())).into_vec();
    picked.sort_unstable();
    picked
        .into_iter()
        .map(|i| {
            let d = &all[i];
            let n = d.latest() as usize;
            let vids = index::sample(&mut rng, n, batch_size.min(n))
                .into_iter()
                .map(|v| v as u32 + 1)
                .collect();
            (d.doc_id(), vids)
        })
        .collect()
}

pub fn run_multi_version(cfg: &BenchConfig) -> Result<Vec<BenchRecord>> {
    cfg.validate()?;
    let corpus = generate_corpus(&cfg.corpus_spec)?;
    let queries: Vec<Query> = multi_version_workload(&corpus, cfg.batch_docs, cfg.batch_size, cfg.seed)
        .into_iter()
        .map(|(doc_id, vids)| Query {
            doc_id,
            title: corpus.get(doc_id).expect("sampled from corpus").meta.title.clone(),
            vids,
            x: doc_id,
        })
        .collect();
    let mut records = Vec::new();
    run_queries(cfg, &corpus, &queries, &mut records)?;
    Ok(records)
}

pub fn run(cfg: &BenchConfig) -> Result<Vec<BenchRecord>> {
    match cfg.experiment {
        Experiment::ObjectRetrieval => run_object_retrieval(cfg),
        Experiment::SingleVersionGrowth => run_single_version_growth(cfg),
        Experiment::SingleVersionRandom => run_single_version_random(cfg),
        Experiment::MultiVersion => run_multi_version(cfg),
    }
}

pub fn write_csv<W: Write>(mut out: W, records: &[BenchRecord], header: bool) -> io::Result<()> {
    if header {
        out.write_all(CSV_HEADER.as_bytes())?;
        out.write_all(b"\n")?;
    }
    for r in records {
        out.write_all(r.csv_line().as_bytes())?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

/// Appends records to `path`, writing the header only when the file is new
/// or empty. An existing file with a different header is refused.
pub fn append_csv(path: &Path, records: &[BenchRecord]) -> Result<()> {
    let existing = match std::fs::File::open(path) {
        Ok(f) => {
            let mut first = String::new();
            BufReader::new(f)
                .read_line(&mut first)
                .map_err(|e| Error::io(path, e))?;
            Some(first)
        }
        Err(e) if e.kind() == io::ErrorKind::NotFound => None,
        Err(e) => return Err(Error::io(path, e)),
    };
    let header = match existing.as_deref() {
        None | Some("") => true,
        Some(line) if line.trim_end_matches('\n') == CSV_HEADER => false,
        Some(_) => {
            return Err(Error::InvalidBenchConfig(format!(
                "{} exists with a different header",
                path.display()
            )))
        }
    };
    let file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| Error::io(path, e))?;
    write_csv(io::BufWriter::new(file), records, header).map_err(|e| Error::io(path, e))
}

/// Per-point aggregate over trials.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub method: Method,
    pub experiment: Experiment,
    pub x: u64,
    /// Median over trials of the summed elapsed time at this point.
    pub median_elapsed_us: f64,
    /// Mean logical ops per record.
    pub mean_ops: f64,
    pub max_ops: u64,
    pub records: usize,
}

pub fn summarize(records: &[BenchRecord]) -> Vec<Summary> {
    let mut groups: BTreeMap<(Experiment, u64, Method), Vec<&BenchRecord>> = BTreeMap::new();
    for r in records {
        groups.entry((r.experiment, r.x, r.method)).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|((experiment, x, method), rs)| {
            let mut per_trial: BTreeMap<usize, f64> = BTreeMap::new();
            for r in &rs {
                *per_trial.entry(r.trial).or_default() += r.elapsed_us;
            }
            let mut times: Vec<f64> = per_trial.into_values().collect();
            times.sort_by(f64::total_cmp);
            let median = if times.is_empty() {
                0.0
            } else if times.len() % 2 == 1 {
                times[times.len() / 2]
            } else {
                (times[times.len() / 2 - 1] + times[times.len() / 2]) / 2.0
            };
            Summary {
                method,
                experiment,
                x,
                median_elapsed_us: median,
                mean_ops: rs.iter().map(|r| r.ops as f64).sum::<f64>() / rs.len() as f64,
                max_ops: rs.iter().map(|r| r.ops).max().unwrap_or(0),
                records: rs.len(),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(experiment: Experiment) -> BenchConfig {
        BenchConfig {
            corpus_spec: CorpusSpec {
                num_docs: 6,
                versions_per_doc: 10,
                doc_size_bytes: 512,
                ..CorpusSpec::default()
            },
            collection_sizes: vec![3, 6],
            version_counts: vec![2, 4],
            random_queries: 5,
            batch_docs: 3,
            ..BenchConfig::new(experiment)
        }
    }

    #[test]
    fn config_validation() {
        let mut cfg = small(Experiment::ObjectRetrieval);
        cfg.methods.clear();
        assert!(matches!(run(&cfg), Err(Error::InvalidBenchConfig(_))));
        let cfg = BenchConfig {
            trials: 2,
            ..small(Experiment::ObjectRetrieval)
        };
        assert!(run(&cfg).is_err());
        let mut cfg = small(Experiment::MultiVersion);
        cfg.corpus_spec.versions_per_doc = 5;
        assert!(run(&cfg).is_err());
    }

    #[test]
    fn experiment_names_round_trip() {
        for e in Experiment::ALL {
            assert_eq!(e.name().parse::<Experiment>().unwrap(), e);
        }
        assert!("fig4".parse::<Experiment>().is_err());
    }

    #[test]
    fn record_counts() {
        let r = run(&small(Experiment::ObjectRetrieval)).unwrap();
        assert_eq!(r.len(), 3 * 3 * (3 + 6));
        let r = run(&small(Experiment::SingleVersionRandom)).unwrap();
        assert_eq!(r.len(), 3 * 3 * 5);
        let r = run(&small(Experiment::MultiVersion)).unwrap();
        assert_eq!(r.len(), 3 * 3 * 3);
        assert!(r.iter().all(|r| r.ops >= 1 && r.trial >= 1));
    }

    #[test]
    fn logical_counts_are_deterministic() {
        for e in Experiment::ALL {
            let a: Vec<u64> = run(&small(e)).unwrap().iter().map(|r| r.ops).collect();
            let b: Vec<u64> = run(&small(e)).unwrap().iter().map(|r| r.ops).collect();
            assert_eq!(a, b, "{e}");
        }
    }

    #[test]
    fn random_workload_is_seeded() {
        let corpus = generate_corpus(&small(Experiment::SingleVersionRandom).corpus_spec).unwrap();
        assert_eq!(random_workload(&corpus, 10, 3), random_workload(&corpus, 10, 3));
        assert_ne!(random_workload(&corpus, 10, 3), random_workload(&corpus, 10, 4));
    }

    #[test]
    fn multi_version_batches_are_distinct() {
        let corpus = generate_corpus(&small(Experiment::MultiVersion).corpus_spec).unwrap();
        for (_, vids) in multi_version_workload(&corpus, 4, 8, 1) {
            let mut v = vids.clone();
            v.sort_unstable();
            v.dedup();
            assert_eq!(v.len(), 8);
            assert!(vids.iter().all(|&x| (1..=10).contains(&x)));
        }
    }

    #[test]
    fn verify_catches_wrong_content() {
        let corpus = generate_corpus(&small(Experiment::MultiVersion).corpus_spec).unwrap();
        let d = &corpus.documents()[0];
        let good = RetrievalResult {
            doc_id: d.doc_id(),
            m: 2,
            content: d.version(2).unwrap().to_string(),
            exact: true,
        };
        verify(&corpus, d.doc_id(), 2, &good).unwrap();
        let bad = RetrievalResult {
            content: d.version(3).unwrap().to_string(),
            ..good.clone()
        };
        assert!(verify(&corpus, d.doc_id(), 2, &bad).is_err());
        let fallback = RetrievalResult {
            m: 10,
            exact: false,
            content: d.version(10).unwrap().to_string(),
            ..good
        };
        verify(&corpus, d.doc_id(), 15, &fallback).unwrap();
    }

    #[test]
    fn csv_layout_and_append() {
        let records = run(&small(Experiment::SingleVersionRandom)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        append_csv(&path, &records[..2]).unwrap();
        append_csv(&path, &records[2..4]).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.split_terminator('\n').collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines.len(), 5);
        assert!(!text.contains('\r'));
        for l in &lines[1..] {
            assert_eq!(l.split(',').count(), 6);
            assert!(l.starts_with("vtag,single_version_random,"));
        }
        std::fs::write(&path, "other,header\n").unwrap();
        assert!(append_csv(&path, &records).is_err());
    }

    #[test]
    fn summary_takes_median_over_trials() {
        let mk = |trial, elapsed_us| BenchRecord {
            method: Method::Vtag,
            experiment: Experiment::ObjectRetrieval,
            x: 5,
            trial,
            elapsed_us,
            ops: 4,
            stats: RetrievalStats::default(),
        };
        let s = summarize(&[mk(1, 10.0), mk(2, 30.0), mk(3, 20.0), mk(3, 5.0)]);
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].median_elapsed_us, 25.0);
        assert_eq!(s[0].mean_ops, 4.0);
    }
}
