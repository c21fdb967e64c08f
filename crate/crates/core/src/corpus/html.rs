const BLOCK_TAGS: &[&str] = &[
    "address", "article", "aside", "blockquote", "br", "dd", "div", "dl", "dt", "figcaption",
    "figure", "footer", "h1", "h2", "h3", "h4", "h5", "h6", "header", "hr", "li", "main", "nav",
    "ol", "p", "pre", "section", "table", "tr", "ul",
];

const CELL_TAGS: &[&str] = &["td", "th"];

const DROPPED_TAGS: &[&str] = &["script", "style", "noscript", "template"];

fn find_ci(haystack: &str, needle: &str) -> Option<usize> {
    let h = haystack.as_bytes();
    let n = needle.as_bytes();
    (0..=h.len().checked_sub(n.len())?).find(|&i| h[i..i + n.len()].eq_ignore_ascii_case(n))
}

/// Best-effort HTML to plain text. Block elements become line breaks,
/// script and style bodies are dropped, entities are decoded, and runs of
/// whitespace collapse to one space (or one newline if they contain one).
pub fn ingest_html(html: &str) -> String {
    let mut raw = String::with_capacity(html.len());
    let mut rest = html;

    while let Some(lt) = rest.find('<') {
        raw.push_str(&html_escape::decode_html_entities(&rest[..lt]));
        rest = &rest[lt..];

        if rest.starts_with("<!--") {
            rest = match rest.find("-->") {
                Some(end) => &rest[end + 3..],
                None => "",
            };
            continue;
        }
        let Some(gt) = rest.find('>') else {
            raw.push_str(&html_escape::decode_html_entities(rest));
            rest = "";
            break;
        };
        let inner = &rest[1..gt];
        rest = &rest[gt + 1..];

        let closing = inner.starts_with('/');
        let name: String = inner
            .trim_start_matches('/')
            .chars()
            .take_while(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();

        if !closing && DROPPED_TAGS.contains(&name.as_str()) && !inner.ends_with('/') {
            let close = format!("</{name}");
            rest = match find_ci(rest, &close) {
                Some(i) => match rest[i..].find('>') {
                    Some(g) => &rest[i + g + 1..],
                    None => "",
                },
                None => "",
            };
        } else if BLOCK_TAGS.contains(&name.as_str()) {
            raw.push('\n');
        } else if CELL_TAGS.contains(&name.as_str()) {
            raw.push(' ');
        }
    }
    raw.push_str(&html_escape::decode_html_entities(rest));
    collapse_whitespace(&raw)
}

fn collapse_whitespace(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut pending: Option<char> = None;
    for c in s.chars() {
        if c.is_whitespace() {
            pending = match (pending, c) {
                (_, '\n') | (Some('\n'), _) => Some('\n'),
                _ => Some(' '),
            };
        } else {
            if let Some(p) = pending.take() {
                if !out.is_empty() {
                    out.push(p);
                }
            }
            out.push(c);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paragraphs_become_lines() {
        assert_eq!(ingest_html("<p>Hello</p><p>World</p>"), "Hello\nWorld");
    }

    #[test]
    fn script_dropped() {
        assert_eq!(ingest_html("<script>x()</script>Text"), "Text");
        assert_eq!(ingest_html("<STYLE type=x>p{}</style>A<script>if (a<b) {}</SCRIPT>B"), "AB");
    }

    #[test]
    fn entities() {
        assert_eq!(ingest_html("&amp;"), "&");
        assert_eq!(ingest_html("a&nbsp;b &lt;p&gt; &#8220;c&#x201D;"), "a b <p> “c”");
    }

    #[test]
    fn whitespace_and_inline_tags() {
        let html = "<html><body><h1> Title </h1>\n\n<div>About <b>300</b>   people<br/>gathered.</div><!-- c --></body></html>";
        assert_eq!(ingest_html(html), "Title\nAbout 300 people\ngathered.");
    }

    #[test]
    fn never_fails_on_garbage() {
        for s in ["<", "<<>>", "</", "<p", "<script>unterminated", "<!-- open", "\u{0}<\u{fffd}>"] {
            let _ = ingest_html(s);
        }
        assert_eq!(ingest_html("a < b"), "a < b");
    }
}
