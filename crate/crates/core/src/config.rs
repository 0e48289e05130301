//! Flat `key = value` experiment configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Keys mirror the
//! fields of [`ExperimentConfig`] and [`WorldConfig`](crate::world::WorldConfig);
//! nested settings use a prefix (`sson_k`, `update_tau`, `eigen_damping`).
//! Unknown or repeated keys are rejected. Optional values accept `none`.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use crate::dichotomy::TieRule;
use crate::error::{Error, Result};
use crate::eval::{ExperimentConfig, ModelKind};
use crate::world::DishonestReports;

fn bad(line: usize, key: &str, value: &str) -> Error {
    Error::Config(format!("line {line}: invalid value {value:?} for {key}"))
}

fn num<T: FromStr>(line: usize, key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| bad(line, key, value))
}

fn optional<T: FromStr>(line: usize, key: &str, value: &str) -> Result<Option<T>> {
    if value.eq_ignore_ascii_case("none") {
        Ok(None)
    } else {
        num(line, key, value).map(Some)
    }
}

fn tie_name(t: TieRule) -> &'static str {
    match t {
        TieRule::Honest => "honest",
        TieRule::Dishonest => "dishonest",
    }
}

fn reports_name(r: DishonestReports) -> &'static str {
    match r {
        DishonestReports::Published => "published",
        DishonestReports::MirrorLog => "mirror_log",
        DishonestReports::MirrorPerceived => "mirror_perceived",
    }
}

fn apply(cfg: &mut ExperimentConfig, line: usize, key: &str, value: &str) -> Result<()> {
    let w = &mut cfg.world;
    match key {
        "n_agents" => w.n_agents = num(line, key, value)?,
        "dishonest_fraction" => w.dishonest_fraction = num(line, key, value)?,
        "p_m" => w.p_m = num(line, key, value)?,
        "n_categories" => w.n_categories = num(line, key, value)?,
        "products_per_category" => w.products_per_category = num(line, key, value)?,
        "reviews_mu" => w.reviews_mu = num(line, key, value)?,
        "reviews_sigma" => w.reviews_sigma = num(line, key, value)?,
        "ratings_mu" => w.ratings_mu = num(line, key, value)?,
        "ratings_sigma" => w.ratings_sigma = num(line, key, value)?,
        "category_bias" => {
            let parts: Vec<f64> = value
                .split(',')
                .map(|p| num(line, key, p.trim()))
                .collect::<Result<_>>()?;
            w.category_bias = parts.try_into().map_err(|_| bad(line, key, value))?;
        }
        "behavior_flip" => w.behavior_flip = num(line, key, value)?,
        "dataset" => {
            cfg.dataset = if value.eq_ignore_ascii_case("none") {
                None
            } else {
                Some(PathBuf::from(value))
            }
        }
        "seed" => cfg.seed = num(line, key, value)?,
        "repetitions" => cfg.repetitions = num(line, key, value)?,
        "trustors" => cfg.trustors = num(line, key, value)?,
        "models" => {
            cfg.models = value
                .split(',')
                .map(|m| m.trim().parse::<ModelKind>())
                .collect::<Result<_>>()
                .map_err(|_| bad(line, key, value))?
        }
        "top_k_features" => cfg.top_k_features = num(line, key, value)?,
        "feature_threshold" => cfg.feature_threshold = optional(line, key, value)?,
        "tie_rule" => {
            cfg.tie_rule = match value {
                "honest" => TieRule::Honest,
                "dishonest" => TieRule::Dishonest,
                _ => return Err(bad(line, key, value)),
            }
        }
        "max_reporters" => cfg.max_reporters = optional(line, key, value)?,
        "reports" => cfg.reports = value.parse().map_err(|_| bad(line, key, value))?,
        "pretrusted" => cfg.pretrusted = num(line, key, value)?,
        "eigen_damping" => cfg.eigen.damping = num(line, key, value)?,
        "eigen_epsilon" => cfg.eigen.epsilon = num(line, key, value)?,
        "eigen_max_iterations" => cfg.eigen.max_iterations = num(line, key, value)?,
        "mrp_max_asked" => cfg.mrp_max_asked = num(line, key, value)?,
        "sson_trustors" => cfg.sson.trustors = num(line, key, value)?,
        "sson_history" => cfg.sson.history = num(line, key, value)?,
        "sson_providers" => cfg.sson.providers = num(line, key, value)?,
        "sson_k" => cfg.sson.k = num(line, key, value)?,
        "sson_epsilon" => cfg.sson.epsilon = num(line, key, value)?,
        "sson_confidence" => cfg.sson.confidence = num(line, key, value)?,
        "update_tau" => cfg.update.tau = num(line, key, value)?,
        "update_behavior_flip" => cfg.update.behavior_flip = num(line, key, value)?,
        "update_trustors" => cfg.update.trustors = num(line, key, value)?,
        _ => return Err(Error::Config(format!("line {line}: unknown key {key:?}"))),
    }
    Ok(())
}

/// Parse a configuration; keys not mentioned keep their defaults.
pub fn parse(text: &str) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::default();
    let mut seen = BTreeSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.trim();
        if content.is_empty() || content.starts_with('#') {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {line}: expected key = value")))?;
        let (key, value) = (key.trim(), value.trim());
        if !seen.insert(key.to_string()) {
            return Err(Error::Config(format!("line {line}: duplicate key {key:?}")));
        }
        apply(&mut cfg, line, key, value)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Canonical rendering: every key, fixed order. `parse(render(c)) == c`.
pub fn render(cfg: &ExperimentConfig) -> String {
    let w = &cfg.world;
    let opt = |v: Option<String>| v.unwrap_or_else(|| "none".to_string());
    let models: Vec<String> = cfg.models.iter().map(|m| m.to_string()).collect();
    let entries: Vec<(&str, String)> = vec![
        ("n_agents", w.n_agents.to_string()),
        ("dishonest_fraction", w.dishonest_fraction.to_string()),
        ("p_m", w.p_m.to_string()),
        ("n_categories", w.n_categories.to_string()),
        ("products_per_category", w.products_per_category.to_string()),
        ("reviews_mu", w.reviews_mu.to_string()),
        ("reviews_sigma", w.reviews_sigma.to_string()),
        ("ratings_mu", w.ratings_mu.to_string()),
        ("ratings_sigma", w.ratings_sigma.to_string()),
        (
            "category_bias",
            w.category_bias
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(","),
        ),
        ("behavior_flip", w.behavior_flip.to_string()),
        ("dataset", opt(cfg.dataset.as_ref().map(|p| p.display().to_string()))),
        ("seed", cfg.seed.to_string()),
        ("repetitions", cfg.repetitions.to_string()),
        ("trustors", cfg.trustors.to_string()),
        ("models", models.join(",")),
        ("top_k_features", cfg.top_k_features.to_string()),
        ("feature_threshold", opt(cfg.feature_threshold.map(|v| v.to_string()))),
        ("tie_rule", tie_name(cfg.tie_rule).to_string()),
        ("max_reporters", opt(cfg.max_reporters.map(|v| v.to_string()))),
        ("reports", reports_name(cfg.reports).to_string()),
        ("pretrusted", cfg.pretrusted.to_string()),
        ("eigen_damping", cfg.eigen.damping.to_string()),
        ("eigen_epsilon", cfg.eigen.epsilon.to_string()),
        ("eigen_max_iterations", cfg.eigen.max_iterations.to_string()),
        ("mrp_max_asked", cfg.mrp_max_asked.to_string()),
        ("sson_trustors", cfg.sson.trustors.to_string()),
        ("sson_history", cfg.sson.history.to_string()),
        ("sson_providers", cfg.sson.providers.to_string()),
        ("sson_k", cfg.sson.k.to_string()),
        ("sson_epsilon", cfg.sson.epsilon.to_string()),
        ("sson_confidence", cfg.sson.confidence.to_string()),
        ("update_tau", cfg.update.tau.to_string()),
        ("update_behavior_flip", cfg.update.behavior_flip.to_string()),
        ("update_trustors", cfg.update.trustors.to_string()),
    ];
    let mut out = String::new();
    for (k, v) in entries {
        writeln!(out, "{k} = {v}").unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stereotype::Aggregation;

    #[test]
    fn defaults_round_trip() {
        let cfg = ExperimentConfig::default();
        assert_eq!(parse(&render(&cfg)).unwrap(), cfg);
        assert_eq!(parse("").unwrap(), cfg);
    }

    #[test]
    fn overrides_and_comments() {
        let text = "# comment\n\nn_agents = 120\nmodels = feedback, stereotrust-sop\nfeature_threshold = 0.05\nreports = mirror_log\ncategory_bias = 0.5,0.3,0.2\n";
        let cfg = parse(text).unwrap();
        assert_eq!(cfg.world.n_agents, 120);
        assert_eq!(
            cfg.models,
            vec![ModelKind::Feedback, ModelKind::StereoTrust(Aggregation::Sop)]
        );
        assert_eq!(cfg.feature_threshold, Some(0.05));
        assert_eq!(cfg.reports, DishonestReports::MirrorLog);
        assert_eq!(cfg.world.category_bias, [0.5, 0.3, 0.2]);
        assert_eq!(parse(&render(&cfg)).unwrap(), cfg);
    }

    #[test]
    fn rejects_bad_input() {
        for text in [
            "colour = blue",
            "n_agents",
            "n_agents = many",
            "n_agents = 10\nn_agents = 20",
            "category_bias = 0.5,0.5",
            "models = feedback,oracle",
            "update_tau = 0",
            "tie_rule = maybe",
        ] {
            assert!(matches!(parse(text), Err(Error::Config(_))), "{text}");
        }
    }

    #[test]
    fn shipped_table2_config_is_default() {
        let text = include_str!("../../../table2.cfg");
        assert_eq!(parse(text).unwrap(), ExperimentConfig::default());
    }
}
