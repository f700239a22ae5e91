//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits non-zero if any fails.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use vtag::baselines::{build_ebvr, build_rbvr};
use vtag::bench::{self, BenchConfig, BenchRecord, Experiment};
use vtag::corpus::{generate_corpus, load_corpus, store_corpus, CorpusSpec, DocumentMeta};
use vtag::pattern::{ClassifiedDocument, SynonymMap};
use vtag::vtag_index::{ContentRef, VTagIndex, VersionTable};
use vtag::{Method, VersionRetriever};

type Outcome = Result<String, String>;

fn seed_spec() -> CorpusSpec {
    CorpusSpec {
        num_docs: 20,
        versions_per_doc: 20,
        doc_size_bytes: 4096,
        delta_ratio: 0.2,
        seed: 42,
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ground_truth(dir: &Path, doc_id: u64, vid: u32) -> String {
    fs::read_to_string(dir.join(format!("docs/{doc_id}/v{vid}.txt"))).expect("ground-truth file")
}

struct Seeded {
    dir: tempfile::TempDir,
    retrievers: Vec<Box<dyn VersionRetriever>>,
    titles: Vec<(u64, String, u32)>,
}

fn seeded() -> Seeded {
    let dir = tempfile::tempdir().unwrap();
    store_corpus(&generate_corpus(&seed_spec()).unwrap(), dir.path()).unwrap();
    let corpus = load_corpus(dir.path()).unwrap();
    let retrievers: Vec<Box<dyn VersionRetriever>> = vec![
        Box::new(VTagIndex::build(&corpus, 32, SynonymMap::default()).unwrap()),
        Box::new(build_ebvr(&corpus).unwrap()),
        Box::new(build_rbvr(&corpus).unwrap()),
    ];
    let titles = corpus
        .documents()
        .iter()
        .map(|d| (d.doc_id(), d.meta.title.clone(), d.latest()))
        .collect();
    Seeded {
        dir,
        retrievers,
        titles,
    }
}

fn oracle_equivalence(s: &Seeded) -> Outcome {
    let start = Instant::now();
    let mut checks = 0;
    for (doc_id, title, n) in &s.titles {
        for vid in 1..=*n {
            let truth = ground_truth(s.dir.path(), *doc_id, vid);
            for r in &s.retrievers {
                let (got, _) = r.retrieve(title, vid).map_err(|e| format!("{}: {e}", r.method()))?;
                ensure(
                    got.doc_id == *doc_id && got.m == vid && got.exact && got.content == truth,
                    || format!("{} doc {doc_id} v{vid} differs from ground truth", r.method()),
                )?;
                checks += 1;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(checks == 1200, || format!("{checks} checks, expected 1200"))?;
    ensure(secs < 60.0, || format!("took {secs:.1}s"))?;
    Ok(format!("{checks} byte-identical retrievals in {secs:.2}s"))
}

fn fallback_contract(s: &Seeded) -> Outcome {
    for (doc_id, title, n) in &s.titles {
        let truth = ground_truth(s.dir.path(), *doc_id, *n);
        for r in &s.retrievers {
            let (got, _) = r.retrieve(title, n + 5).map_err(|e| e.to_string())?;
            ensure(
                got.m == *n && !got.exact && got.content == truth,
                || format!("{} doc {doc_id}: m={} exact={}", r.method(), got.m, got.exact),
            )?;
        }
    }
    Ok(format!("{} documents x 3 methods return version n for vid n+5", s.titles.len()))
}

fn by_method_x(records: &[BenchRecord]) -> BTreeMap<(Method, u64), Vec<&BenchRecord>> {
    let mut m: BTreeMap<_, Vec<_>> = BTreeMap::new();
    for r in records {
        m.entry((r.method, r.x)).or_default().push(r);
    }
    m
}

fn mean(rs: &[&BenchRecord], f: impl Fn(&BenchRecord) -> u64) -> f64 {
    rs.iter().map(|r| f(r) as f64).sum::<f64>() / rs.len() as f64
}

fn object_retrieval() -> Outcome {
    let cfg = BenchConfig {
        corpus_spec: seed_spec(),
        ..BenchConfig::new(Experiment::ObjectRetrieval)
    };
    let records = bench::run(&cfg).map_err(|e| e.to_string())?;
    let groups = by_method_x(&records);
    for &n in &cfg.collection_sizes {
        let bound = ((n as f64).ln() / 16f64.ln()).ceil() as u64 + 1;
        let worst = groups[&(Method::Vtag, n as u64)]
            .iter()
            .map(|r| r.stats.node_visits)
            .max()
            .unwrap();
        ensure(worst <= bound, || format!("N={n}: {worst} node visits > {bound}"))?;
    }
    let mut detail = Vec::new();
    for m in [Method::Ebvr, Method::Rbvr] {
        let at50 = mean(&groups[&(m, 50)], |r| r.stats.key_comparisons);
        let at200 = mean(&groups[&(m, 200)], |r| r.stats.key_comparisons);
        let ratio = at200 / at50;
        ensure(ratio >= 3.0, || format!("{m}: comparisons grew only {ratio:.2}x"))?;
        ensure((0.8 * 4.0..=1.2 * 4.0).contains(&ratio), || {
            format!("{m}: growth {ratio:.2}x is not within 20% of linear (4x)")
        })?;
        detail.push(format!("{m} {at50:.1}->{at200:.1} ({ratio:.2}x)"));
    }
    Ok(format!(
        "vtag visits within log16 bound at {:?}; {}",
        cfg.collection_sizes,
        detail.join(", ")
    ))
}

fn version_growth() -> Outcome {
    let cfg = BenchConfig {
        corpus_spec: seed_spec(),
        ..BenchConfig::new(Experiment::SingleVersionGrowth)
    };
    let records = bench::run(&cfg).map_err(|e| e.to_string())?;
    let g = by_method_x(&records);
    let counts: Vec<u64> = cfg.version_counts.iter().map(|&v| v as u64).collect();
    let (first, last) = (counts[0], *counts.last().unwrap());

    let ebvr_growth = mean(&g[&(Method::Ebvr, last)], |r| r.stats.edit_ops)
        / mean(&g[&(Method::Ebvr, first)], |r| r.stats.edit_ops);
    ensure(ebvr_growth >= 4.0, || format!("EBVR edit ops grew {ebvr_growth:.2}x"))?;

    let vtag: Vec<f64> = counts.iter().map(|&v| mean(&g[&(Method::Vtag, v)], |r| r.ops)).collect();
    let spread = vtag.iter().cloned().fold(f64::MIN, f64::max) / vtag.iter().cloned().fold(f64::MAX, f64::min);
    ensure(spread <= 1.5, || format!("VTAG ops vary {spread:.2}x: {vtag:?}"))?;

    let mut points = Vec::new();
    for (&v, &vt) in counts.iter().zip(&vtag) {
        let eb = mean(&g[&(Method::Ebvr, v)], |r| r.ops);
        let rb = mean(&g[&(Method::Rbvr, v)], |r| r.ops);
        ensure(vt < rb && rb < eb, || format!("V={v}: vtag {vt:.1}, rbvr {rb:.1}, ebvr {eb:.1}"))?;
        points.push(format!("V={v} {vt:.1}<{rb:.0}<{eb:.0}"));
    }
    Ok(format!("EBVR edit ops x{ebvr_growth:.2}, VTAG spread x{spread:.2}; {}", points.join(" ")))
}

fn multi_version() -> Outcome {
    let cfg = BenchConfig {
        corpus_spec: seed_spec(),
        ..BenchConfig::new(Experiment::MultiVersion)
    };
    let records = bench::run(&cfg).map_err(|e| e.to_string())?;
    for r in records.iter().filter(|r| r.method == Method::Vtag) {
        ensure(r.stats.descents == 1 && r.stats.lookups == 8, || {
            format!("doc {}: {} descents, {} lookups", r.x, r.stats.descents, r.stats.lookups)
        })?;
    }
    let corpus = generate_corpus(&cfg.corpus_spec).map_err(|e| e.to_string())?;
    let ebvr = build_ebvr(&corpus).map_err(|e| e.to_string())?;
    let workload = bench::multi_version_workload(&corpus, cfg.batch_docs, cfg.batch_size, cfg.seed);
    for (doc_id, vids) in &workload {
        let title = &corpus.get(*doc_id).unwrap().meta.title;
        let worst = vids
            .iter()
            .map(|&v| ebvr.retrieve(title, v).map(|(_, s)| s.total()))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| e.to_string())?
            .into_iter()
            .max()
            .unwrap();
        for r in records.iter().filter(|r| r.method == Method::Ebvr && r.x == *doc_id) {
            ensure(r.ops >= worst, || format!("doc {doc_id}: batch {} < worst single {worst}", r.ops))?;
        }
    }
    Ok(format!(
        "{} batches: 1 descent + 8 lookups each; EBVR batch >= worst single query",
        workload.len()
    ))
}

fn structure_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let words = ["atlas", "brief", "circuits", "data", "ethics", "fluids", "graphs", "hydro", "ions", "jets"];
    let docs: Vec<DocumentMeta> = (1..=1000u64)
        .map(|doc_id| {
            let len = rng.gen_range(1..5);
            let mut title: Vec<String> = (0..len).map(|_| words[rng.gen_range(0..words.len())].to_string()).collect();
            title.push(format!("t{}", rng.gen_range(0..100_000)));
            DocumentMeta {
                doc_id,
                title: title.join(" "),
                author: "x".into(),
                edition: 1,
                publisher: "y".into(),
                year: 2000,
            }
        })
        .collect();
    let mut heights = Vec::new();
    for fanout in [4, 32] {
        let mut index = VTagIndex::new(fanout).map_err(|e| e.to_string())?;
        for meta in &docs {
            let c = ClassifiedDocument::classify(meta).map_err(|e| e.to_string())?;
            index.insert(&c, meta, &["v1\n".to_string()]).map_err(|e| e.to_string())?;
        }
        let tree = index.tree();
        tree.check_invariants().map_err(|e| format!("fanout {fanout}: {e}"))?;
        ensure(tree.len() == 1000, || format!("{} entries", tree.len()))?;
        heights.push(tree.height());
    }

    let mut table = VersionTable::default();
    let mut shadow: HashMap<u32, ContentRef> = HashMap::new();
    let (mut probes, mut lookups) = (0u64, 0u64);
    for i in 0..10_000u64 {
        let vid = rng.gen_range(1..=20_000);
        if rng.gen_bool(0.5) {
            let r = ContentRef { offset: i, len: i % 97 };
            ensure(table.put(vid, r) == shadow.insert(vid, r), || format!("put {vid} diverged"))?;
        } else {
            let p = table.probe(vid);
            let got = p.slot.and_then(|s| table.slot(s)).map(|(_, r)| r);
            ensure(got == shadow.get(&vid).copied(), || format!("lookup {vid} diverged"))?;
            if got.is_some() {
                probes += u64::from(p.probes);
                lookups += 1;
            }
        }
        ensure(table.load_factor() <= 0.7, || format!("load {}", table.load_factor()))?;
    }
    for (&vid, &r) in &shadow {
        ensure(table.get(vid) == Some(r), || format!("final lookup {vid} diverged"))?;
    }
    let mean_probe = probes as f64 / lookups as f64;
    ensure(mean_probe <= 2.0, || format!("mean probe length {mean_probe:.3}"))?;
    Ok(format!(
        "1000 inserts valid at fanout 4/32 (heights {heights:?}); 10000 table ops match shadow map, mean probe {mean_probe:.3}"
    ))
}

fn vtag_bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_vtag"))
}

fn read_tree(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for e in fs::read_dir(&dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(root).unwrap().to_path_buf(), fs::read(&p).unwrap());
            }
        }
    }
    out
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let mut trees = Vec::new();
    for name in ["a", "b"] {
        let out = tmp.path().join(name);
        let status = vtag_bin()
            .args(["gen-corpus", "--docs", "20", "--versions", "20", "--size", "4096", "--delta", "0.2", "--seed", "42", "--out"])
            .arg(&out)
            .output()
            .unwrap();
        ensure(status.status.success(), || String::from_utf8_lossy(&status.stderr).into_owned())?;
        trees.push(read_tree(&out));
    }
    ensure(trees[0] == trees[1], || "gen-corpus outputs differ".into())?;
    ensure(trees[0].len() == 1 + 20 * 20, || format!("{} files", trees[0].len()))?;

    let mut ops_columns = Vec::new();
    for name in ["a.csv", "b.csv"] {
        let out = tmp.path().join(name);
        let status = vtag_bin()
            .args(["bench", "--experiment", "single_version_random", "--methods", "vtag,ebvr,rbvr", "--docs", "20", "--versions", "20", "--trials", "3", "--seed", "42", "--out"])
            .arg(&out)
            .output()
            .unwrap();
        ensure(status.status.success(), || String::from_utf8_lossy(&status.stderr).into_owned())?;
        let text = fs::read_to_string(&out).unwrap();
        ensure(text.starts_with("method,experiment,x,trial,elapsed_us,ops\n"), || "bad CSV header".into())?;
        let ops: Vec<String> = text
            .lines()
            .skip(1)
            .map(|l| {
                let f: Vec<&str> = l.split(',').collect();
                format!("{},{},{},{}", f[0], f[2], f[3], f[5])
            })
            .collect();
        ops_columns.push(ops);
    }
    ensure(ops_columns[0] == ops_columns[1], || "bench ops columns differ".into())?;
    Ok(format!(
        "gen-corpus byte-identical ({} files); bench ops identical over {} rows",
        trees[0].len(),
        ops_columns[0].len()
    ))
}

fn main() -> ExitCode {
    let s = seeded();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("1 oracle equivalence", Box::new(|| oracle_equivalence(&s))),
        ("2 fallback contract", Box::new(|| fallback_contract(&s))),
        ("3 object retrieval", Box::new(object_retrieval)),
        ("4 version growth", Box::new(version_growth)),
        ("5 multi-version batch", Box::new(multi_version)),
        ("6 structure suite", Box::new(structure_suite)),
        ("7 determinism", Box::new(determinism)),
    ];
    let mut failed = 0;
    for (name, check) in &criteria {
        match check() {
            Ok(detail) => println!("PASS  criterion {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  criterion {name}: {why}");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
