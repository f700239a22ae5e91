//! The `vtag` command line: `gen-corpus`, `ingest`, `query` and `bench`.
//!
//! Exit status is 0 on success, 1 on domain errors (unknown document,
//! malformed corpus or index) and 2 on usage errors. Diagnostics go to
//! stderr, data to stdout.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::bench::{self, BenchConfig, Experiment};
use crate::corpus::{generate_corpus, load_corpus, store_corpus, CorpusSpec};
use crate::error::Error;
use crate::pattern::SynonymMap;
use crate::retrieval::Method;
use crate::vtag_index::{VTagIndex, DEFAULT_FANOUT};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "vtag", version, about = "Multi-version document index and retrieval benchmarks")]
pub struct Cli {
    /// More progress output on stderr (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a seeded synthetic corpus directory.
    GenCorpus(GenCorpusArgs),
    /// Build an index from a corpus directory.
    Ingest(IngestArgs),
    /// Retrieve one version of a document from an index.
    Query(QueryArgs),
    /// Run a retrieval experiment and append results to a CSV file.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct GenCorpusArgs {
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
    pub docs: u64,
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u32).range(1..))]
    pub versions: u32,
    /// Approximate size of each first version, in bytes.
    #[arg(long, default_value_t = 4096, value_parser = clap::value_parser!(u64).range(1..))]
    pub size: u64,
    /// Minimum fraction of tokens changed between consecutive versions.
    #[arg(long, default_value_t = 0.2)]
    pub delta: f64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub index: PathBuf,
    #[arg(long, default_value_t = DEFAULT_FANOUT as u64, value_parser = clap::value_parser!(u64).range(3..))]
    pub fanout: u64,
    /// TSV file of `context<TAB>synonym` lines.
    #[arg(long)]
    pub synonyms: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    #[arg(long)]
    pub index: PathBuf,
    /// Query text, matched as a title context.
    #[arg(long)]
    pub q: String,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub vid: u32,
    /// Print only doc_id, m and exact.
    #[arg(long)]
    pub meta_only: bool,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub experiment: Experiment,
    #[arg(long, value_delimiter = ',', default_value = "vtag,ebvr,rbvr")]
    pub methods: Vec<Method>,
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
    pub docs: u64,
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u32).range(1..))]
    pub versions: u32,
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(3..))]
    pub trials: u64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 4096, value_parser = clap::value_parser!(u64).range(1..))]
    pub size: u64,
    #[arg(long, default_value_t = 0.2)]
    pub delta: f64,
    #[arg(long, default_value_t = DEFAULT_FANOUT as u64, value_parser = clap::value_parser!(u64).range(3..))]
    pub fanout: u64,
    /// Collection sizes for object_retrieval.
    #[arg(long, value_delimiter = ',', default_value = "25,50,100,200")]
    pub sizes: Vec<usize>,
    /// Version counts for single_version_growth.
    #[arg(long = "version-counts", value_delimiter = ',', default_value = "10,20,40,80")]
    pub version_counts: Vec<u32>,
    #[arg(long)]
    pub out: PathBuf,
}

impl BenchArgs {
    pub fn config(&self) -> BenchConfig {
        BenchConfig {
            corpus_spec: CorpusSpec {
                num_docs: self.docs as usize,
                versions_per_doc: self.versions,
                doc_size_bytes: self.size as usize,
                delta_ratio: self.delta,
                seed: self.seed,
            },
            methods: self.methods.clone(),
            trials: self.trials as usize,
            seed: self.seed,
            fanout: self.fanout as usize,
            collection_sizes: self.sizes.clone(),
            version_counts: self.version_counts.clone(),
            ..BenchConfig::new(self.experiment)
        }
    }
}

/// Parses `argv` (program name first) and runs the subcommand, writing data
/// to `out` and diagnostics to `err`. Returns the exit status.
pub fn dispatch<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{text}");
                return EXIT_USAGE;
            }
            let _ = write!(out, "{text}");
            return EXIT_OK;
        }
    };
    match run(&cli, out, err) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidSpec(_)
        | Error::InvalidBenchConfig(_)
        | Error::InvalidFanout(_)
        | Error::InvalidVersion(_)
        | Error::EmptyQuery => EXIT_USAGE,
        _ => EXIT_DOMAIN,
    }
}

fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Error> {
    let verbose = cli.verbose > 0;
    let io_err = |e: std::io::Error| Error::io("<stdout>", e);
    match &cli.command {
        Command::GenCorpus(a) => {
            let spec = CorpusSpec {
                num_docs: a.docs as usize,
                versions_per_doc: a.versions,
                doc_size_bytes: a.size as usize,
                delta_ratio: a.delta,
                seed: a.seed,
            };
            let corpus = generate_corpus(&spec)?;
            store_corpus(&corpus, &a.out)?;
            writeln!(
                out,
                "wrote {} documents x {} versions to {}",
                corpus.len(),
                a.versions,
                a.out.display()
            )
            .map_err(io_err)?;
        }
        Command::Ingest(a) => {
            let corpus = load_corpus(&a.corpus)?;
            let synonyms = match &a.synonyms {
                Some(p) => SynonymMap::load(p)?,
                None => SynonymMap::default(),
            };
            if verbose {
                let _ = writeln!(err, "loaded {} documents from {}", corpus.len(), a.corpus.display());
            }
            let index = VTagIndex::build(&corpus, a.fanout as usize, synonyms)?;
            index.save(&a.index)?;
            writeln!(
                out,
                "indexed {} documents (tree height {}, fanout {}) into {}",
                index.tree().len(),
                index.tree().height(),
                a.fanout,
                a.index.display()
            )
            .map_err(io_err)?;
        }
        Command::Query(a) => {
            let index = VTagIndex::load(&a.index)?;
            let r = index.find_bv(&a.q, a.vid)?;
            write!(out, "doc_id: {}\nm: {}\nexact: {}\n", r.doc_id, r.m, r.exact).map_err(io_err)?;
            if !a.meta_only {
                write!(out, "\n{}", r.content).map_err(io_err)?;
            }
        }
        Command::Bench(a) => {
            let cfg = a.config();
            if verbose {
                let _ = writeln!(err, "running {} over {:?}", cfg.experiment, cfg.methods);
            }
            let records = bench::run(&cfg)?;
            bench::append_csv(&a.out, &records)?;
            writeln!(out, "{:<6} {:<22} {:>6} {:>14} {:>12} {:>8}", "method", "experiment", "x", "median_us", "mean_ops", "max_ops")
                .map_err(io_err)?;
            for s in bench::summarize(&records) {
                writeln!(
                    out,
                    "{:<6} {:<22} {:>6} {:>14.3} {:>12.2} {:>8}",
                    s.method, s.experiment, s.x, s.median_elapsed_us, s.mean_ops, s.max_ops
                )
                .map_err(io_err)?;
            }
            if verbose {
                let _ = writeln!(err, "appended {} records to {}", records.len(), a.out.display());
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("vtag").chain(args.iter().copied());
        let code = dispatch(argv, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn missing_required_flag_is_usage_error() {
        let (code, _, err) = call(&["query", "--index", "x", "--vid", "1"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("--q"), "{err}");
    }

    #[test]
    fn unknown_flag_is_rejected() {
        let (code, _, _) = call(&["gen-corpus", "--out", "x", "--colour", "red"]);
        assert_eq!(code, EXIT_USAGE);
    }

    #[test]
    fn bad_values_are_usage_errors() {
        assert_eq!(call(&["query", "--index", "x", "--q", "a", "--vid", "0"]).0, EXIT_USAGE);
        assert_eq!(call(&["bench", "--experiment", "fig9", "--out", "x"]).0, EXIT_USAGE);
        assert_eq!(call(&["bench", "--experiment", "multi_version", "--trials", "2", "--out", "x"]).0, EXIT_USAGE);
        assert_eq!(call(&["bench", "--experiment", "multi_version", "--methods", "btree", "--out", "x"]).0, EXIT_USAGE);
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("c");
        let (code, _, err) = call(&["gen-corpus", "--delta", "1.5", "--out", out.to_str().unwrap()]);
        assert_eq!(code, EXIT_USAGE, "{err}");
    }

    #[test]
    fn help_goes_to_stdout() {
        let (code, out, _) = call(&["query", "--help"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("--meta-only"));
    }

    #[test]
    fn missing_corpus_is_domain_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().to_str().unwrap();
        let (code, _, err) = call(&["ingest", "--corpus", p, "--index", p]);
        assert_eq!(code, EXIT_DOMAIN);
        assert!(err.starts_with("error: corpus manifest not found"), "{err}");
        assert_eq!(err.lines().count(), 1);
    }
}
