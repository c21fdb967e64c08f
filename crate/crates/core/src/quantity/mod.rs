//! Tokenization, sentence segmentation, number-phrase detection and
//! order-of-magnitude bucketing.

mod magnitude;
mod numbers;
mod sentences;
mod tokenize;

pub use magnitude::{magnitude_bucket, BucketTable, MagnitudeLabel};
pub use numbers::{
    find_number_phrases, phrase_to_value, NumberFinder, NumberPhrase, VagueTable,
    DEFAULT_YEAR_CONTEXT,
};
pub use sentences::{segment_sentences, Segmenter, Sentence, DEFAULT_ABBREVIATIONS};
pub use tokenize::{tokenize, Token};
