use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Language tag of the row that pools every clip.
pub const ALL: &str = "ALL";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LanguageReport {
    pub language: String,
    pub n: usize,
    pub mean_mos: f64,
    /// Population standard deviation.
    pub std_mos: f64,
    pub model_id: String,
}

fn summarize(language: &str, values: &[f64], model_id: &str) -> LanguageReport {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
    LanguageReport {
        language: language.to_string(),
        n,
        mean_mos: mean,
        std_mos: var.sqrt(),
        model_id: model_id.to_string(),
    }
}

/// Per-language count, mean and population std, sorted by language, then an
/// [`ALL`] row over every clip.
///
/// Scores are sorted before summation, so the result does not depend on
/// input order down to the last bit.
pub fn aggregate(scores: &[(String, f64)], model_id: &str) -> Result<Vec<LanguageReport>> {
    if scores.is_empty() {
        return Err(Error::EmptyInput("no scores to aggregate".into()));
    }
    if let Some((lang, v)) = scores.iter().find(|(_, v)| !v.is_finite()) {
        return Err(Error::Config(format!("non-finite score {v} for `{lang}`")));
    }
    if scores.iter().any(|(l, _)| l == ALL) {
        return Err(Error::Config(format!("`{ALL}` is reserved for the pooled row")));
    }
    let mut by_lang: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for (lang, v) in scores {
        by_lang.entry(lang).or_default().push(*v);
    }
    let mut out = Vec::with_capacity(by_lang.len() + 1);
    let mut all = Vec::with_capacity(scores.len());
    for (lang, values) in &mut by_lang {
        values.sort_by(f64::total_cmp);
        all.extend_from_slice(values);
        out.push(summarize(lang, values, model_id));
    }
    all.sort_by(f64::total_cmp);
    out.push(summarize(ALL, &all, model_id));
    Ok(out)
}
