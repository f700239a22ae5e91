use std::collections::HashSet;

use rand::seq::index;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{tokenize, Corpus, CorpusSpec, DocumentMeta, VersionedDocument};
use crate::baselines::diff::lcs_len;
use crate::error::Result;
use crate::pattern::context_tokens;

const SYLLABLES: &[&str] = &[
    "ba", "ce", "di", "fo", "gu", "ha", "ji", "ko", "lu", "ma", "ne", "pi", "qua", "ro", "su",
    "ta", "ve", "wi", "xo", "yu", "za", "bri", "cla", "dro", "fen", "gar", "hol", "ist", "mon",
    "nor", "pel", "ter",
];

const FILLERS: &[&str] = &[
    "the", "of", "and", "a", "to", "in", "is", "for", "on", "with", "by", "as",
];

const ADJECTIVES: &[&str] = &[
    "Brief", "Modern", "Practical", "Concise", "Advanced", "Classical", "Applied",
    "Elementary", "Comprehensive", "Illustrated", "Critical", "Formal", "Hidden", "Lost",
    "Visual", "Quantum", "Digital", "Ancient", "Gentle", "Rigorous", "Complete", "Essential",
    "Structured", "Natural",
];

const NOUNS: &[&str] = &[
    "History", "Theory", "Handbook", "Guide", "Survey", "Study", "Atlas", "Companion",
    "Primer", "Treatise", "Anatomy", "Grammar", "Foundations", "Principles", "Methods",
    "Essays", "Lectures", "Notes", "Dictionary", "Elements", "Art", "Science", "Craft",
    "Logic",
];

const TOPICS: &[&str] = &[
    "Time", "Compilers", "Algebra", "Databases", "Networks", "Optics", "Mining", "Economics",
    "Geometry", "Music", "Ethics", "Chemistry", "Botany", "Cryptography", "Linguistics",
    "Astronomy", "Topology", "Rhetoric", "Statistics", "Robotics", "Genetics", "Painting",
    "Navigation", "Architecture",
];

const FIRST_NAMES: &[&str] = &[
    "Ada", "Alan", "Grace", "Edsger", "Barbara", "Donald", "Frances", "John", "Margaret",
    "Niklaus", "Radia", "Ken", "Lynn", "Tony", "Hedy", "Claude",
];

const LAST_NAMES: &[&str] = &[
    "Lovelace", "Turing", "Hopper", "Dijkstra", "Liskov", "Knuth", "Allen", "Backus",
    "Hamilton", "Wirth", "Perlman", "Thompson", "Conway", "Hoare", "Lamarr", "Shannon",
];

const PUBLISHERS: &[&str] = &[
    "Northwind Press",
    "Harbor House",
    "Meridian Books",
    "Oakleaf Publishing",
    "Lantern Academic",
    "Cobalt & Sons",
    "Riverside University Press",
    "Summit Scholarly",
];

const WORDS_PER_LINE: usize = 12;

/// Generates a corpus deterministically from `spec`.
///
/// Document `i` (1-based) draws its text from a stream of the seeded
/// generator keyed by `i`, so a document's text does not depend on how many
/// other documents are generated.
pub fn generate_corpus(spec: &CorpusSpec) -> Result<Corpus> {
    spec.validate()?;
    let mut meta_rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut used_keys = HashSet::new();
    let mut documents = Vec::with_capacity(spec.num_docs);

    for doc_id in 1..=spec.num_docs as u64 {
        let meta = random_meta(&mut meta_rng, doc_id, &mut used_keys);

        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(doc_id);
        let mut words = base_words(&mut rng, spec.doc_size_bytes);
        let mut versions = Vec::with_capacity(spec.versions_per_doc as usize);
        versions.push(render_words(&words));
        for _ in 1..spec.versions_per_doc {
            words = next_version(&mut rng, &words, spec.delta_ratio);
            versions.push(render_words(&words));
        }
        documents.push(VersionedDocument::new(meta, versions)?);
    }
    Corpus::new(documents)
}

/// Joins words with single spaces, breaking lines every few words; the
/// text always ends with a newline.
pub fn render_words<S: AsRef<str>>(words: &[S]) -> String {
    let mut out = String::new();
    for (i, w) in words.iter().enumerate() {
        if i > 0 {
            out.push(if i % WORDS_PER_LINE == 0 { '\n' } else { ' ' });
        }
        out.push_str(w.as_ref());
    }
    out.push('\n');
    out
}

fn random_meta(rng: &mut ChaCha8Rng, doc_id: u64, used_keys: &mut HashSet<String>) -> DocumentMeta {
    // Titles must stay distinguishable both as ordered contexts and as
    // keyword sets.
    let mut title = String::new();
    let mut unique = false;
    for _ in 0..64 {
        title = random_title(rng);
        if used_keys.insert(keyword_key(&title)) {
            unique = true;
            break;
        }
    }
    if !unique {
        title = format!("{title} Volume {doc_id}");
        used_keys.insert(keyword_key(&title));
    }

    DocumentMeta {
        doc_id,
        title,
        author: format!(
            "{} {}",
            FIRST_NAMES.choose(rng).unwrap(),
            LAST_NAMES.choose(rng).unwrap()
        ),
        edition: rng.gen_range(1..=12),
        publisher: PUBLISHERS.choose(rng).unwrap().to_string(),
        year: rng.gen_range(1950..=2025),
    }
}

fn keyword_key(title: &str) -> String {
    let mut kws = context_tokens(&tokenize(title));
    kws.sort_unstable();
    kws.join(" ")
}

fn random_title(rng: &mut ChaCha8Rng) -> String {
    let adj = ADJECTIVES.choose(rng).unwrap();
    let noun = NOUNS.choose(rng).unwrap();
    let topic = TOPICS.choose(rng).unwrap();
    match rng.gen_range(0..6) {
        0 => format!("A {adj} {noun} of {topic}"),
        1 => format!("The {noun} of {topic}"),
        2 => format!("{adj} {topic}"),
        3 => format!("An Introduction to {topic} {noun}"),
        4 => {
            let other = TOPICS.choose(rng).unwrap();
            format!("{topic} and {other}: {adj} {noun}")
        }
        _ => format!("On the {adj} {noun} of {topic}"),
    }
}

fn random_word(rng: &mut ChaCha8Rng) -> String {
    if rng.gen_bool(0.25) {
        return FILLERS.choose(rng).unwrap().to_string();
    }
    let syllables = rng.gen_range(2..=3);
    (0..syllables)
        .map(|_| *SYLLABLES.choose(rng).unwrap())
        .collect()
}

fn different_word(rng: &mut ChaCha8Rng, old: &str) -> String {
    loop {
        let w = random_word(rng);
        if w != old {
            return w;
        }
    }
}

fn base_words(rng: &mut ChaCha8Rng, size: usize) -> Vec<String> {
    let mut words = Vec::new();
    let mut bytes = 1; // trailing newline
    while bytes < size || words.is_empty() {
        let w = random_word(rng);
        bytes += w.len() + usize::from(!words.is_empty());
        words.push(w);
    }
    words
}

/// Mutates `prev` until at least `delta` of its token count differs.
///
/// The difference is measured as `max(|prev|, |next|) - LCS(prev, next)`,
/// which never exceeds the token edit distance.
fn next_version(rng: &mut ChaCha8Rng, prev: &[String], delta: f64) -> Vec<String> {
    let target = ((delta * prev.len() as f64).ceil() as usize).max(1);
    let mut next = prev.to_vec();
    let mut achieved = 0;
    while achieved < target {
        next = mutate(rng, &next, target - achieved);
        achieved = prev.len().max(next.len()) - lcs_len(prev, &next);
    }
    next
}

/// Applies `count` mutations (60% replace, 20% insert, 20% delete) at
/// distinct positions.
fn mutate(rng: &mut ChaCha8Rng, words: &[String], count: usize) -> Vec<String> {
    let mut picks = index::sample(rng, words.len(), count.min(words.len())).into_vec();
    picks.sort_unstable();
    let mut picks = picks.into_iter().peekable();
    let mut out = Vec::with_capacity(words.len() + count);
    for (i, w) in words.iter().enumerate() {
        if picks.next_if_eq(&i).is_none() {
            out.push(w.clone());
            continue;
        }
        match rng.gen_range(0..10) {
            0..=5 => out.push(different_word(rng, w)),
            6 | 7 => {
                out.push(random_word(rng));
                out.push(w.clone());
            }
            _ => {}
        }
    }
    if out.is_empty() {
        out.push(random_word(rng));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(num_docs: usize, versions_per_doc: u32) -> CorpusSpec {
        CorpusSpec {
            num_docs,
            versions_per_doc,
            doc_size_bytes: 1024,
            delta_ratio: 0.2,
            seed: 42,
        }
    }

    #[test]
    fn same_seed_same_corpus() {
        let a = generate_corpus(&spec(2, 3)).unwrap();
        let b = generate_corpus(&spec(2, 3)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 2);
        assert!(a.documents().iter().all(|d| d.latest() == 3));
    }

    #[test]
    fn single_version_documents() {
        let c = generate_corpus(&spec(3, 1)).unwrap();
        for d in c.documents() {
            assert_eq!(d.latest(), 1);
            assert!(d.version(1).is_some());
            assert!(d.version(2).is_none());
        }
    }

    #[test]
    fn rejects_bad_delta() {
        for delta in [0.0, -0.1, 1.5, f64::NAN] {
            let s = CorpusSpec {
                delta_ratio: delta,
                ..spec(1, 2)
            };
            assert!(generate_corpus(&s).is_err(), "{delta}");
        }
        let full = CorpusSpec {
            delta_ratio: 1.0,
            ..spec(1, 3)
        };
        assert!(generate_corpus(&full).is_ok());
    }

    #[test]
    fn documents_are_independent_of_corpus_size() {
        let small = generate_corpus(&spec(3, 2)).unwrap();
        let large = generate_corpus(&spec(6, 2)).unwrap();
        assert_eq!(small.documents(), &large.documents()[..3]);
    }

    #[test]
    fn version_one_has_requested_size() {
        let c = generate_corpus(&spec(2, 1)).unwrap();
        for d in c.documents() {
            let len = d.version(1).unwrap().len();
            assert!((1024..1024 + 16).contains(&len), "{len}");
        }
    }

    #[test]
    fn rendering_round_trips_through_tokenize() {
        let words = ["lorem", "of", "ipsum"];
        let text = render_words(&words);
        assert_eq!(text, "lorem of ipsum\n");
        assert_eq!(tokenize(&text).tokens(), words);
    }

    #[test]
    fn titles_have_distinct_keyword_sets() {
        let c = generate_corpus(&CorpusSpec {
            num_docs: 200,
            ..spec(200, 1)
        })
        .unwrap();
        let keys: HashSet<_> = c
            .documents()
            .iter()
            .map(|d| keyword_key(&d.meta.title))
            .collect();
        assert_eq!(keys.len(), 200);
    }
}
