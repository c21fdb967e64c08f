use std::ops::Range;

/// A word-level token with both char and byte offsets into its source text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub text: String,
    /// Unicode scalar offset of the first char.
    pub start_char: usize,
    /// Unicode scalar offset one past the last char.
    pub end_char: usize,
    pub index: usize,
    pub bytes: Range<usize>,
}

fn is_edge_punct(c: char) -> bool {
    !c.is_alphanumeric()
}

/// Splits on whitespace, then peels leading and trailing punctuation off each
/// chunk as single-char tokens. Internal punctuation stays put, so "1,200",
/// "U.S" and "twenty-five" survive as one token.
pub fn tokenize(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut chunk: Vec<(usize, usize, char)> = Vec::new();

    for (char_pos, (byte_pos, c)) in text.char_indices().enumerate() {
        if c.is_whitespace() {
            flush_chunk(&chunk, text, &mut tokens);
            chunk.clear();
        } else {
            chunk.push((char_pos, byte_pos, c));
        }
    }
    flush_chunk(&chunk, text, &mut tokens);
    tokens
}

fn flush_chunk(chunk: &[(usize, usize, char)], text: &str, out: &mut Vec<Token>) {
    if chunk.is_empty() {
        return;
    }
    let lead = chunk.iter().take_while(|(_, _, c)| is_edge_punct(*c)).count();
    let trail = if lead == chunk.len() {
        0
    } else {
        chunk.iter().rev().take_while(|(_, _, c)| is_edge_punct(*c)).count()
    };
    let core_end = chunk.len() - trail;

    let mut push = |from: usize, to: usize| {
        let (start_char, byte_start, _) = chunk[from];
        let (last_char, last_byte, last_c) = chunk[to - 1];
        let bytes = byte_start..last_byte + last_c.len_utf8();
        out.push(Token {
            text: text[bytes.clone()].to_string(),
            start_char,
            end_char: last_char + 1,
            index: out.len(),
            bytes,
        });
    };

    for i in 0..lead {
        push(i, i + 1);
    }
    if lead < core_end {
        push(lead, core_end);
    }
    for i in core_end.max(lead)..chunk.len() {
        push(i, i + 1);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn texts(s: &str) -> Vec<String> {
        tokenize(s).into_iter().map(|t| t.text).collect()
    }

    #[test]
    fn splits_trailing_punctuation() {
        assert_eq!(texts("about 20 people."), ["about", "20", "people", "."]);
    }

    #[test]
    fn keeps_grouped_digits() {
        assert_eq!(texts("1,200"), ["1,200"]);
        assert_eq!(texts("($1,200.)"), ["(", "$", "1,200", ".", ")"]);
    }

    #[test]
    fn keeps_hyphenated_numerals() {
        assert_eq!(texts("twenty-five marchers"), ["twenty-five", "marchers"]);
    }

    #[test]
    fn empty_and_blank() {
        assert!(tokenize("").is_empty());
        assert!(tokenize("  \n\t ").is_empty());
    }

    #[test]
    fn all_punctuation_chunk() {
        assert_eq!(texts("--"), ["-", "-"]);
    }

    #[test]
    fn offsets_slice_source() {
        let text = "Über 300 Demonstranten — “about 20”.";
        let chars: Vec<char> = text.chars().collect();
        for (i, t) in tokenize(text).iter().enumerate() {
            assert_eq!(t.index, i);
            assert_eq!(&text[t.bytes.clone()], t.text);
            let s: String = chars[t.start_char..t.end_char].iter().collect();
            assert_eq!(s, t.text);
        }
    }
}
