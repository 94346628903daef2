/// Splits raw text into lowercased word tokens.
///
/// Tokens are separated by Unicode whitespace. Leading and trailing
/// non-alphanumeric characters are trimmed, so inner punctuation survives
/// ("u.s.", "don't"), and tokens with no alphanumeric character are dropped.
pub fn tokenize(raw_text: &str) -> Vec<String> {
    raw_text
        .split_whitespace()
        .map(|token| token.trim_matches(|c: char| !c.is_alphanumeric()))
        .filter(|token| !token.is_empty())
        .map(str::to_lowercase)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strips_outer_punctuation() {
        assert_eq!(
            tokenize("The U.S. economy grew."),
            vec!["the", "u.s", "economy", "grew"]
        );
    }

    #[test]
    fn empty_input() {
        assert!(tokenize("").is_empty());
        assert!(tokenize("  \t\n ").is_empty());
    }

    #[test]
    fn folds_case_and_keeps_duplicates() {
        assert_eq!(tokenize("Bush Bush"), vec!["bush", "bush"]);
    }

    #[test]
    fn drops_pure_punctuation_and_keeps_digits() {
        assert_eq!(
            tokenize("-- 1990, (“quoted”) don't ..."),
            vec!["1990", "quoted", "don't"]
        );
    }

    #[test]
    fn unicode_whitespace_and_letters() {
        assert_eq!(tokenize("Ärger\u{00a0}Straße"), vec!["ärger", "straße"]);
    }
}
