/// Split text into sentences at `.`, `!` or `?` followed by whitespace or the
/// end of the text. Abbreviations such as "e.g." are not protected.
pub fn segment_sentences(text: &str) -> Vec<String> {
    sentence_spans(text)
        .into_iter()
        .map(|(a, b)| text[a..b].to_string())
        .collect()
}

/// Byte ranges of the trimmed sentences of `text`.
pub(crate) fn sentence_spans(text: &str) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut push = |a: usize, b: usize| {
        let piece = &text[a..b];
        let trimmed = piece.trim_start();
        let a = a + (piece.len() - trimmed.len());
        let b = a + trimmed.trim_end().len();
        if a < b {
            out.push((a, b));
        }
    };
    let mut chars = text.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        if matches!(c, '.' | '!' | '?') && chars.peek().is_none_or(|(_, n)| n.is_whitespace()) {
            push(start, i + 1);
            start = i + 1;
        }
    }
    push(start, text.len());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(segment_sentences("A b. C d."), ["A b.", "C d."]);
        assert!(segment_sentences("").is_empty());
        assert_eq!(segment_sentences("One two three"), ["One two three"]);
    }

    #[test]
    fn terminators_and_whitespace() {
        assert_eq!(
            segment_sentences("Why?  Now!\nDone"),
            ["Why?", "Now!", "Done"]
        );
        assert_eq!(
            segment_sentences("Version 1.2 is out."),
            ["Version 1.2 is out."]
        );
        assert_eq!(segment_sentences("Use e.g. this."), ["Use e.g.", "this."]);
        assert!(segment_sentences("   ").is_empty());
    }
}
