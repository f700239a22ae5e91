use std::collections::HashSet;
use std::sync::LazyLock;

const STOP_LIST: &str = include_str!("../../data/stopwords.txt");

static STOP_WORDS: LazyLock<HashSet<&'static str>> = LazyLock::new(|| {
    STOP_LIST
        .lines()
        .map(str::trim)
        .filter(|w| !w.is_empty())
        .collect()
});

/// Lowercase tokens, none empty and none containing whitespace.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct TokenStream(Vec<String>);

impl TokenStream {
    pub fn tokens(&self) -> &[String] {
        &self.0
    }

    pub fn into_tokens(self) -> Vec<String> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn join(&self, sep: &str) -> String {
        self.0.join(sep)
    }
}

impl<'a> IntoIterator for &'a TokenStream {
    type Item = &'a String;
    type IntoIter = std::slice::Iter<'a, String>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// Splits on whitespace and ASCII punctuation, lowercases, drops empties.
pub fn tokenize(text: &str) -> TokenStream {
    TokenStream(
        text.split(|c: char| c.is_whitespace() || c.is_ascii_punctuation())
            .filter(|t| !t.is_empty())
            .map(str::to_lowercase)
            .collect(),
    )
}

pub fn is_stop_word(token: &str) -> bool {
    STOP_WORDS.contains(token)
}

/// The embedded stop list, sorted.
pub fn stop_words() -> Vec<&'static str> {
    let mut words: Vec<_> = STOP_WORDS.iter().copied().collect();
    words.sort_unstable();
    words
}

pub fn remove_stopwords(stream: TokenStream) -> TokenStream {
    TokenStream(stream.0.into_iter().filter(|t| !is_stop_word(t)).collect())
}
