use serde::{Deserialize, Serialize};

use super::Token;
use crate::error::{Error, Result};

/// Values assigned to vague quantity words. Plurals take the lower-bound
/// reading ("hundreds" = 2 x 100).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct VagueTable {
    pub a_couple: u64,
    pub a_few: u64,
    pub several: u64,
    pub dozen: u64,
    pub dozens: u64,
    pub hundreds: u64,
    pub thousands: u64,
    pub tens_of_thousands: u64,
    pub millions: u64,
}

impl Default for VagueTable {
    fn default() -> Self {
        VagueTable {
            a_couple: 2,
            a_few: 3,
            several: 3,
            dozen: 12,
            dozens: 24,
            hundreds: 200,
            thousands: 2000,
            tens_of_thousands: 20_000,
            millions: 2_000_000,
        }
    }
}

/// A contiguous run of tokens carrying one positive integer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NumberPhrase {
    /// First token index.
    pub start: usize,
    /// One past the last token index.
    pub end: usize,
    pub value: u64,
    pub surface: String,
    pub start_char: usize,
    pub end_char: usize,
}

const MAX_PHRASE_TOKENS: usize = 12;

/// Default words whose adjacency keeps a 4-digit year-like token in play.
pub const DEFAULT_YEAR_CONTEXT: &[&str] = &[
    "protesters",
    "demonstrators",
    "gathered",
    "crowd",
    "rallied",
    "attended",
    "picketed",
    "protest",
    "people",
];

fn unit(w: &str) -> Option<u64> {
    Some(match w {
        "one" => 1,
        "two" => 2,
        "three" => 3,
        "four" => 4,
        "five" => 5,
        "six" => 6,
        "seven" => 7,
        "eight" => 8,
        "nine" => 9,
        _ => return None,
    })
}

fn teen(w: &str) -> Option<u64> {
    Some(match w {
        "ten" => 10,
        "eleven" => 11,
        "twelve" => 12,
        "thirteen" => 13,
        "fourteen" => 14,
        "fifteen" => 15,
        "sixteen" => 16,
        "seventeen" => 17,
        "eighteen" => 18,
        "nineteen" => 19,
        _ => return None,
    })
}

fn tens(w: &str) -> Option<u64> {
    Some(match w {
        "twenty" => 20,
        "thirty" => 30,
        "forty" => 40,
        "fifty" => 50,
        "sixty" => 60,
        "seventy" => 70,
        "eighty" => 80,
        "ninety" => 90,
        _ => return None,
    })
}

fn large_scale(w: &str) -> Option<u64> {
    match w {
        "thousand" => Some(1_000),
        "million" => Some(1_000_000),
        _ => None,
    }
}

fn is_multiplicand_scale(w: &str) -> bool {
    matches!(w, "hundred" | "thousand" | "million" | "dozen")
}

/// A literal digit token: the integer mantissa and its count of decimals.
fn parse_digits(w: &str) -> Option<(u64, u32)> {
    let first = w.chars().next()?;
    if !first.is_ascii_digit() {
        return None;
    }
    let mut mantissa: u64 = 0;
    let mut decimals: Option<u32> = None;
    let mut prev_sep = false;
    for c in w.chars() {
        match c {
            '0'..='9' => {
                mantissa = mantissa.checked_mul(10)?.checked_add(c as u64 - '0' as u64)?;
                if let Some(d) = decimals.as_mut() {
                    *d += 1;
                }
                prev_sep = false;
            }
            ',' if decimals.is_none() && !prev_sep => prev_sep = true,
            '.' if decimals.is_none() && !prev_sep => {
                decimals = Some(0);
                prev_sep = true;
            }
            _ => return None,
        }
    }
    if prev_sep {
        return None;
    }
    Some((mantissa, decimals.unwrap_or(0)))
}

/// Exact rational `mantissa / 10^decimals`.
#[derive(Debug, Clone, Copy)]
struct Fixed {
    mantissa: u64,
    decimals: u32,
}

impl Fixed {
    fn int(v: u64) -> Self {
        Fixed {
            mantissa: v,
            decimals: 0,
        }
    }

    fn scale(self, by: u64) -> Option<Self> {
        Some(Fixed {
            mantissa: self.mantissa.checked_mul(by)?,
            decimals: self.decimals,
        })
    }

    fn to_integer(self) -> Option<u64> {
        let div = 10u64.checked_pow(self.decimals)?;
        (self.mantissa % div == 0).then_some(self.mantissa / div)
    }
}

struct Parser<'a> {
    words: &'a [String],
    pos: usize,
    vague: &'a VagueTable,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&str> {
        self.words.get(self.pos).map(String::as_str)
    }

    fn peek_at(&self, k: usize) -> Option<&str> {
        self.words.get(self.pos + k).map(String::as_str)
    }

    fn eat(&mut self, w: &str) -> bool {
        if self.peek() == Some(w) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    /// 1..=99 from words: unit | teen | tens [unit].
    fn small(&mut self) -> Option<u64> {
        let w = self.peek()?;
        if let Some(v) = unit(w).or_else(|| teen(w)) {
            self.pos += 1;
            return Some(v);
        }
        if let Some(t) = tens(w) {
            self.pos += 1;
            if let Some(u) = self.peek().and_then(unit) {
                self.pos += 1;
                return Some(t + u);
            }
            return Some(t);
        }
        None
    }

    /// Leading quantity of a group: digits, a word number, "a", or a vague
    /// multiplier. The last three require a scale word to follow.
    fn head(&mut self) -> Option<Fixed> {
        let w = self.peek()?;
        if let Some((mantissa, decimals)) = parse_digits(w) {
            self.pos += 1;
            return Some(Fixed { mantissa, decimals });
        }
        let next_is_scale = |k: usize| self.peek_at(k).is_some_and(is_multiplicand_scale);
        match w {
            "a" if self.peek_at(1) == Some("couple") && next_is_scale(2) => {
                self.pos += 2;
                Some(Fixed::int(self.vague.a_couple))
            }
            "a" if self.peek_at(1) == Some("few") && next_is_scale(2) => {
                self.pos += 2;
                Some(Fixed::int(self.vague.a_few))
            }
            "a" if next_is_scale(1) => {
                self.pos += 1;
                Some(Fixed::int(1))
            }
            "several" if next_is_scale(1) => {
                self.pos += 1;
                Some(Fixed::int(self.vague.several))
            }
            _ => self.small().map(Fixed::int),
        }
    }

    /// A sub-thousand group, e.g. "two hundred and fifty", "fifteen hundred",
    /// "several hundred", "1.5".
    fn group(&mut self) -> Option<Fixed> {
        let head = self.head()?;
        if !self.eat("hundred") {
            return Some(head);
        }
        let hundreds = head.scale(100)?;
        let save = self.pos;
        let had_and = self.eat("and");
        if let Some(rest) = self.small() {
            return Some(Fixed::int(hundreds.to_integer()? + rest));
        }
        if had_and {
            self.pos = save;
        }
        Some(hundreds)
    }

    fn number(&mut self) -> Option<u64> {
        let mut total: u64 = 0;
        let mut last_scale = u64::MAX;
        loop {
            let g = self.group()?;
            match self.peek() {
                Some(w) if large_scale(w).is_some_and(|s| s < last_scale) => {
                    let s = large_scale(w).unwrap();
                    self.pos += 1;
                    total = total.checked_add(g.scale(s)?.to_integer()?)?;
                    last_scale = s;
                    if self.pos == self.words.len() {
                        return Some(total);
                    }
                    self.eat("and");
                }
                Some("dozen") => {
                    self.pos += 1;
                    return total.checked_add(g.scale(self.vague.dozen)?.to_integer()?);
                }
                _ => return total.checked_add(g.to_integer()?),
            }
        }
    }
}

fn split_words(tokens: &[&str]) -> Option<Vec<String>> {
    let mut words = Vec::with_capacity(tokens.len());
    for t in tokens {
        let lower = t.to_lowercase();
        if lower.contains('-') {
            for part in lower.split('-') {
                if part.is_empty() || !part.chars().all(|c| c.is_ascii_alphabetic()) {
                    return None;
                }
                words.push(part.to_string());
            }
        } else {
            words.push(lower);
        }
    }
    Some(words)
}

/// Normalizes a complete number phrase to its integer value.
pub fn phrase_to_value(tokens: &[&str], vague: &VagueTable) -> Result<u64> {
    let fail = || Error::NoParse(tokens.join(" "));
    let words = split_words(tokens).ok_or_else(fail)?;
    let joined: Vec<&str> = words.iter().map(String::as_str).collect();
    let fixed = match joined.as_slice() {
        ["dozen"] => Some(vague.dozen),
        ["dozens"] => Some(vague.dozens),
        ["hundreds"] => Some(vague.hundreds),
        ["thousands"] => Some(vague.thousands),
        ["millions"] => Some(vague.millions),
        ["tens", "of", "thousands"] => Some(vague.tens_of_thousands),
        ["hundreds", "of", "thousands"] => vague.hundreds.checked_mul(1000),
        _ => None,
    };
    if let Some(v) = fixed {
        return Ok(v);
    }
    if words.is_empty() {
        return Err(fail());
    }
    let mut parser = Parser {
        words: &words,
        pos: 0,
        vague,
    };
    match parser.number() {
        Some(v) if v >= 1 && parser.pos == words.len() => Ok(v),
        _ => Err(fail()),
    }
}

fn could_start(word: &str) -> bool {
    let w = word.to_lowercase();
    w.starts_with(|c: char| c.is_ascii_digit())
        || matches!(
            w.as_str(),
            "a" | "several" | "dozen" | "dozens" | "hundreds" | "thousands" | "millions" | "tens"
        )
        || w.split('-').next().is_some_and(|p| {
            unit(p).is_some() || teen(p).is_some() || tens(p).is_some()
        })
}

fn is_year_like(token: &str) -> bool {
    token.len() == 4
        && token.bytes().all(|b| b.is_ascii_digit())
        && (1900..=2099).contains(&token.parse::<u32>().unwrap_or(0))
}

/// Locates maximal number phrases in a token stream.
#[derive(Debug, Clone)]
pub struct NumberFinder {
    pub vague: VagueTable,
    /// Lowercased prefixes; a year-like token adjacent to one of these is kept.
    pub year_context: Vec<String>,
}

impl Default for NumberFinder {
    fn default() -> Self {
        NumberFinder {
            vague: VagueTable::default(),
            year_context: DEFAULT_YEAR_CONTEXT.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl NumberFinder {
    fn near_context(&self, token: Option<&Token>) -> bool {
        token.is_some_and(|t| {
            let lower = t.text.to_lowercase();
            self.year_context.iter().any(|k| lower.starts_with(k.as_str()))
        })
    }

    /// Non-overlapping, position-ordered, longest-match number phrases.
    /// Ordinals never parse; bare years (1900-2099) are skipped unless a
    /// neighbouring token is a crowd word.
    pub fn find(&self, tokens: &[Token], text: &str) -> Vec<NumberPhrase> {
        let mut out = Vec::new();
        let mut i = 0;
        while i < tokens.len() {
            if !could_start(&tokens[i].text) {
                i += 1;
                continue;
            }
            let limit = tokens.len().min(i + MAX_PHRASE_TOKENS);
            let found = (i + 1..=limit).rev().find_map(|j| {
                let words: Vec<&str> = tokens[i..j].iter().map(|t| t.text.as_str()).collect();
                phrase_to_value(&words, &self.vague).ok().map(|v| (j, v))
            });
            let Some((j, value)) = found else {
                i += 1;
                continue;
            };
            let year_skip = j == i + 1
                && is_year_like(&tokens[i].text)
                && !self.near_context(i.checked_sub(1).and_then(|p| tokens.get(p)))
                && !self.near_context(tokens.get(j));
            if !year_skip {
                let (first, last) = (&tokens[i], &tokens[j - 1]);
                out.push(NumberPhrase {
                    start: i,
                    end: j,
                    value,
                    surface: text[first.bytes.start..last.bytes.end].to_string(),
                    start_char: first.start_char,
                    end_char: last.end_char,
                });
            }
            i = j;
        }
        out
    }
}

/// [`NumberFinder::find`] with default tables.
pub fn find_number_phrases(tokens: &[Token], text: &str) -> Vec<NumberPhrase> {
    NumberFinder::default().find(tokens, text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantity::tokenize;

    fn value(s: &str) -> Result<u64> {
        let toks: Vec<&str> = s.split_whitespace().collect();
        phrase_to_value(&toks, &VagueTable::default())
    }

    fn phrases(s: &str) -> Vec<(String, u64)> {
        find_number_phrases(&tokenize(s), s)
            .into_iter()
            .map(|p| (p.surface, p.value))
            .collect()
    }

    #[test]
    fn vague_quantities() {
        assert_eq!(value("several dozen").unwrap(), 36);
        assert_eq!(value("tens of thousands").unwrap(), 20_000);
        assert_eq!(value("hundreds of thousands").unwrap(), 200_000);
        assert_eq!(value("dozens").unwrap(), 24);
        assert_eq!(value("a dozen").unwrap(), 12);
        assert_eq!(value("a few hundred").unwrap(), 300);
        assert_eq!(value("a couple thousand").unwrap(), 2000);
        assert_eq!(value("several thousand").unwrap(), 3000);
        assert_eq!(value("thousands").unwrap(), 2000);
    }

    #[test]
    fn vague_multiplier_needs_scale() {
        assert!(value("several").is_err());
        assert!(value("a few").is_err());
        assert!(value("a").is_err());
    }

    #[test]
    fn digits() {
        assert_eq!(value("1,200").unwrap(), 1200);
        assert_eq!(value("40").unwrap(), 40);
        assert_eq!(value("1.5 million").unwrap(), 1_500_000);
        assert_eq!(value("20 thousand").unwrap(), 20_000);
        assert_eq!(value("3 dozen").unwrap(), 36);
        assert!(value("0").is_err());
        assert!(value("2.5").is_err());
        assert!(value("1,,200").is_err());
        assert!(value("3rd").is_err());
    }

    #[test]
    fn written_numbers() {
        assert_eq!(value("twenty-five").unwrap(), 25);
        assert_eq!(value("two hundred and fifty").unwrap(), 250);
        assert_eq!(value("two hundred fifty").unwrap(), 250);
        assert_eq!(value("fifteen hundred").unwrap(), 1500);
        assert_eq!(value("one hundred thousand").unwrap(), 100_000);
        assert_eq!(value("two thousand and five").unwrap(), 2005);
        assert_eq!(value("three million four hundred thousand").unwrap(), 3_400_000);
        assert_eq!(value("a hundred and fifty").unwrap(), 150);
    }

    #[test]
    fn rejects_ill_formed() {
        for s in [
            "first",
            "hundred",
            "thousand",
            "five five",
            "twenty thirty",
            "two hundred and",
            "thousand million",
            "one thousand two thousand",
            "one billion",
            "twenty-",
            "",
        ] {
            assert!(value(s).is_err(), "{s:?} should not parse");
        }
    }

    #[test]
    fn finds_maximal_phrases() {
        assert_eq!(
            phrases("several dozen protesters"),
            [("several dozen".to_string(), 36)]
        );
        assert_eq!(
            phrases("two hundred and fifty marched"),
            [("two hundred and fifty".to_string(), 250)]
        );
        assert!(phrases("no numbers here").is_empty());
    }

    #[test]
    fn and_not_swallowed_at_phrase_end() {
        assert_eq!(
            phrases("two hundred and some friends"),
            [("two hundred".to_string(), 200)]
        );
    }

    #[test]
    fn excludes_years_and_ordinals() {
        assert_eq!(phrases("In 2019, the first march drew 40 people."), [("40".to_string(), 40)]);
        assert_eq!(phrases("About 2000 people came."), [("2000".to_string(), 2000)]);
        assert_eq!(phrases("a crowd of 1,950"), [("1,950".to_string(), 1950)]);
    }

    #[test]
    fn dozens_of_stops_before_of() {
        assert_eq!(phrases("dozens of protesters"), [("dozens".to_string(), 24)]);
    }

    #[test]
    fn surface_is_source_slice() {
        let text = "Some  Two   Hundred people";
        let p = &find_number_phrases(&tokenize(text), text)[0];
        assert_eq!(p.surface, "Two   Hundred");
        assert_eq!(p.value, 200);
        assert_eq!((p.start, p.end), (1, 3));
    }
}
