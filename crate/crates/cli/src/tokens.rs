//! Token text files: a `#` header line with `key=value` fields, then one
//! decimal token per line.

use codec25::{Error, Result, TokenSequence};

pub fn to_text(tokens: &TokenSequence, model_id: &str) -> String {
    let mut out = format!(
        "# codec25 tokens model={model_id} rate_hz={} codebook={}\n",
        tokens.latent_rate_hz(),
        tokens.codebook_size()
    );
    for t in tokens.tokens() {
        out.push_str(&t.to_string());
        out.push('\n');
    }
    out
}

/// Header fields present in a token file.
#[derive(Debug, Default, PartialEq, Eq)]
pub struct Header {
    pub rate_hz: Option<u32>,
    pub codebook: Option<usize>,
}

pub fn from_text(text: &str) -> Result<(Header, Vec<u32>)> {
    let mut header = Header::default();
    let mut tokens = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if let Some(comment) = line.strip_prefix('#') {
            for field in comment.split_whitespace() {
                let bad = || Error::Config(format!("token file line {}: bad header field `{field}`", i + 1));
                match field.split_once('=') {
                    Some(("rate_hz", v)) => header.rate_hz = Some(v.parse().map_err(|_| bad())?),
                    Some(("codebook", v)) => header.codebook = Some(v.parse().map_err(|_| bad())?),
                    _ => {}
                }
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let t = line
            .parse::<u32>()
            .map_err(|_| Error::Config(format!("token file line {}: `{line}` is not a token", i + 1)))?;
        tokens.push(t);
    }
    Ok((header, tokens))
}
