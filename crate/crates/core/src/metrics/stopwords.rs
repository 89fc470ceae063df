use alloc::string::{String, ToString};
use alloc::vec::Vec;

pub const ENGLISH_STOPWORDS_VERSION: &str = "en-ir-179/1";

// Classic 179-word English information-retrieval list, in its customary order.
const ENGLISH: &[&str] = &[
    "i", "me", "my", "myself", "we", "our", "ours", "ourselves", "you", "you're", "you've",
    "you'll", "you'd", "your", "yours", "yourself", "yourselves", "he", "him", "his", "himself",
    "she", "she's", "her", "hers", "herself", "it", "it's", "its", "itself", "they", "them",
    "their", "theirs", "themselves", "what", "which", "who", "whom", "this", "that", "that'll",
    "these", "those", "am", "is", "are", "was", "were", "be", "been", "being", "have", "has",
    "had", "having", "do", "does", "did", "doing", "a", "an", "the", "and", "but", "if", "or",
    "because", "as", "until", "while", "of", "at", "by", "for", "with", "about", "against",
    "between", "into", "through", "during", "before", "after", "above", "below", "to", "from",
    "up", "down", "in", "out", "on", "off", "over", "under", "again", "further", "then", "once",
    "here", "there", "when", "where", "why", "how", "all", "any", "both", "each", "few", "more",
    "most", "other", "some", "such", "no", "nor", "not", "only", "own", "same", "so", "than",
    "too", "very", "s", "t", "can", "will", "just", "don", "don't", "should", "should've", "now",
    "d", "ll", "m", "o", "re", "ve", "y", "ain", "aren", "aren't", "couldn", "couldn't", "didn",
    "didn't", "doesn", "doesn't", "hadn", "hadn't", "hasn", "hasn't", "haven", "haven't", "isn",
    "isn't", "ma", "mightn", "mightn't", "mustn", "mustn't", "needn", "needn't", "shan",
    "shan't", "shouldn", "shouldn't", "wasn", "wasn't", "weren", "weren't", "won", "won't",
    "wouldn", "wouldn't",
];

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StopwordError {
    #[error("stopword list is empty")]
    Empty,
    #[error("stopword `{0}` is not lowercase")]
    NotLowercase(String),
    #[error("stopword `{0}` listed twice")]
    Duplicate(String),
}

/// Versioned, ordered set of lowercase stop words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StopwordList {
    version: String,
    words: Vec<String>,
    sorted: Vec<String>,
}

impl StopwordList {
    /// The embedded English list.
    pub fn english() -> Self {
        Self::new(ENGLISH_STOPWORDS_VERSION, ENGLISH.iter().copied())
            .expect("embedded list is valid")
    }

    pub fn new<I, S>(version: impl Into<String>, words: I) -> Result<Self, StopwordError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let words: Vec<String> = words.into_iter().map(Into::into).collect();
        if words.is_empty() {
            return Err(StopwordError::Empty);
        }
        if let Some(w) = words.iter().find(|w| w.to_lowercase() != **w) {
            return Err(StopwordError::NotLowercase(w.clone()));
        }
        let mut sorted = words.clone();
        sorted.sort();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(StopwordError::Duplicate(w[0].clone()));
        }
        Ok(Self {
            version: version.into(),
            words,
            sorted,
        })
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Case-insensitive membership.
    pub fn contains(&self, token: &str) -> bool {
        let lower = token.to_lowercase();
        self.sorted.binary_search(&lower).is_ok()
    }

    /// One word per line, newline-terminated.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for w in &self.words {
            out.push_str(w);
            out.push('\n');
        }
        out
    }
}

/// Drops every token whose lowercase form is a stop word, keeping order.
pub fn strip_stopwords<S: AsRef<str>>(tokens: &[S], list: &StopwordList) -> Vec<String> {
    tokens
        .iter()
        .map(AsRef::as_ref)
        .filter(|t| !list.contains(t))
        .map(ToString::to_string)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn embedded_list() {
        let list = StopwordList::english();
        assert_eq!(list.len(), 179);
        assert_eq!(list.words()[0], "i");
        assert!(list.contains("The"));
        assert!(list.contains("don't"));
        assert!(!list.contains("gazebo"));
        assert_eq!(list.to_text().lines().count(), 179);
    }

    #[test]
    fn strip_examples() {
        let only_a = StopwordList::new("t", ["a"]).unwrap();
        assert_eq!(
            strip_stopwords(&["a", "red", "gazebo"], &only_a),
            vec!["red", "gazebo"]
        );
        assert!(strip_stopwords(&["A", "a"], &only_a).is_empty());
        assert!(strip_stopwords::<&str>(&[], &only_a).is_empty());
    }

    #[test]
    fn list_validation() {
        assert_eq!(
            StopwordList::new("t", Vec::<String>::new()),
            Err(StopwordError::Empty)
        );
        assert_eq!(
            StopwordList::new("t", ["The"]),
            Err(StopwordError::NotLowercase("The".into()))
        );
        assert_eq!(
            StopwordList::new("t", ["a", "b", "a"]),
            Err(StopwordError::Duplicate("a".into()))
        );
    }

    #[test]
    fn strip_is_idempotent() {
        let list = StopwordList::english();
        let tokens = ["The", "old", "Gazebo", "is", "in", "a", "park", "THE"];
        let once = strip_stopwords(&tokens, &list);
        assert_eq!(once, vec!["old", "Gazebo", "park"]);
        assert_eq!(strip_stopwords(&once, &list), once);
    }
}
