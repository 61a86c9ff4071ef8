use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::manifest::ManifestEntry;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectionRule {
    /// Per-language cap.
    pub cap: usize,
    pub max_duration_s: f64,
    /// Keep clips exactly at `max_duration_s`; off by default ("under 20 s").
    pub inclusive_max: bool,
}

impl Default for SelectionRule {
    fn default() -> Self {
        Self {
            cap: 500,
            max_duration_s: 20.0,
            inclusive_max: false,
        }
    }
}

impl SelectionRule {
    pub fn admits(&self, e: &ManifestEntry) -> bool {
        if self.inclusive_max {
            e.duration_s <= self.max_duration_s
        } else {
            e.duration_s < self.max_duration_s
        }
    }
}

/// Per language: drop clips at or over the duration limit, then keep the
/// `cap` longest (ties broken by path). Output is grouped by language in
/// ascending order, longest first within each group.
pub fn select_eval(entries: &[ManifestEntry], rule: &SelectionRule) -> Result<Vec<ManifestEntry>> {
    if !(rule.max_duration_s > 0.0) {
        return Err(Error::Config("max_duration_s must be positive".into()));
    }
    let mut by_lang: BTreeMap<&str, Vec<&ManifestEntry>> = BTreeMap::new();
    for e in entries.iter().filter(|e| rule.admits(e)) {
        by_lang.entry(e.language.as_str()).or_default().push(e);
    }
    let mut out = Vec::new();
    for (_, mut group) in by_lang {
        group.sort_by(|a, b| {
            b.duration_s
                .total_cmp(&a.duration_s)
                .then_with(|| a.path.cmp(&b.path))
        });
        out.extend(group.into_iter().take(rule.cap).cloned());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(path: &str, lang: &str, d: f64) -> ManifestEntry {
        ManifestEntry {
            path: path.into(),
            language: lang.into(),
            duration_s: d,
            sample_rate_hz: 16_000,
        }
    }

    #[test]
    fn limit_is_strict_by_default() {
        let es = vec![entry("a", "en", 20.0), entry("b", "en", 19.99)];
        let picked = select_eval(&es, &SelectionRule::default()).unwrap();
        assert_eq!(picked, vec![es[1].clone()]);
        let inclusive = SelectionRule {
            inclusive_max: true,
            ..SelectionRule::default()
        };
        assert_eq!(select_eval(&es, &inclusive).unwrap().len(), 2);
    }

    #[test]
    fn cap_keeps_longest_with_path_tiebreak() {
        let es = vec![
            entry("z", "de", 3.0),
            entry("c", "en", 5.0),
            entry("b", "en", 5.0),
            entry("a", "en", 1.0),
        ];
        let rule = SelectionRule {
            cap: 2,
            ..SelectionRule::default()
        };
        let picked: Vec<_> = select_eval(&es, &rule)
            .unwrap()
            .into_iter()
            .map(|e| e.path)
            .collect();
        assert_eq!(picked, ["z", "b", "c"]);
    }

    #[test]
    fn language_with_no_eligible_clips_is_absent() {
        let es = vec![entry("a", "ja", 25.0), entry("b", "en", 2.0)];
        let picked = select_eval(&es, &SelectionRule::default()).unwrap();
        assert!(picked.iter().all(|e| e.language == "en"));
    }
}
