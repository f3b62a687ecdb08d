use super::MetricError;
use crate::tokens::TokenSeq;

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y')
}

/// Vowel-group syllable estimate: runs of `aeiouy`, minus a silent final
/// `e` after a consonant, at least one.
pub fn syllables(word: &str) -> usize {
    let chars: Vec<char> = word
        .to_lowercase()
        .chars()
        .filter(|c| c.is_alphabetic())
        .collect();
    let mut groups = 0;
    let mut prev = false;
    for &c in &chars {
        let v = is_vowel(c);
        if v && !prev {
            groups += 1;
        }
        prev = v;
    }
    let n = chars.len();
    if groups > 1 && n >= 2 && chars[n - 1] == 'e' && !is_vowel(chars[n - 2]) {
        groups -= 1;
    }
    groups.max(1)
}

fn is_word(token: &str) -> bool {
    token.chars().any(char::is_alphanumeric)
}

/// Flesch-Kincaid grade level; one entry of `sentences` is one sentence and
/// punctuation-only tokens are not words.
pub fn fkgl(sentences: &[TokenSeq]) -> Result<f64, MetricError> {
    if sentences.is_empty() {
        return Err(MetricError::Empty);
    }
    let words: Vec<&String> = sentences
        .iter()
        .flat_map(|s| s.iter())
        .filter(|t| is_word(t))
        .collect();
    if words.is_empty() {
        return Err(MetricError::NoWords);
    }
    let w = words.len() as f64;
    let syl: usize = words.iter().map(|t| syllables(t)).sum();
    Ok(0.39 * (w / sentences.len() as f64) + 11.8 * (syl as f64 / w) - 15.59)
}
