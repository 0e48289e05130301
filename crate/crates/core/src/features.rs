//! Feature statistics: entropy, information gain, feature ranking and
//! qualitative feature-vector combination.
//!
//! Features are qualitative. Each position of a [`FeatureVector`] holds either
//! a concrete value code or the wildcard (`None`), which matches anything.
//! Quantitative features must be discretised before they reach this module.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Qualitative feature vector; `None` is the wildcard.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FeatureVector(pub Vec<Option<u32>>);

impl FeatureVector {
    pub fn wildcard(len: usize) -> Self {
        FeatureVector(vec![None; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, index: usize) -> Option<u32> {
        self.0.get(index).copied().flatten()
    }

    /// Pattern with a single concrete position.
    pub fn single(len: usize, index: usize, value: u32) -> Self {
        let mut v = FeatureVector::wildcard(len);
        v.0[index] = Some(value);
        v
    }

    /// Pattern matching: every concrete position of `self` equals `other`'s
    /// value at that position.
    pub fn matches(&self, other: &FeatureVector) -> bool {
        self.0
            .iter()
            .enumerate()
            .all(|(i, p)| p.is_none() || *p == other.0.get(i).copied().flatten())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    Honest,
    Dishonest,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LabeledPopulation {
    pub entries: Vec<(FeatureVector, Label)>,
}

impl LabeledPopulation {
    pub fn new(entries: Vec<(FeatureVector, Label)>) -> Self {
        LabeledPopulation { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn width(&self) -> usize {
        self.entries.first().map_or(0, |(v, _)| v.len())
    }
}

/// Binary entropy of an (honest, dishonest) count pair, with `0 log 0 = 0`.
pub fn binary_entropy(honest: usize, dishonest: usize) -> f64 {
    let n = (honest + dishonest) as f64;
    if n == 0.0 {
        return 0.0;
    }
    [honest, dishonest]
        .iter()
        .filter(|&&k| k > 0)
        .map(|&k| {
            let p = k as f64 / n;
            -p * p.log2()
        })
        .sum()
}

fn label_counts<'a>(labels: impl Iterator<Item = &'a Label>) -> (usize, usize) {
    labels.fold((0, 0), |(h, d), l| match l {
        Label::Honest => (h + 1, d),
        Label::Dishonest => (h, d + 1),
    })
}

pub fn entropy(pop: &LabeledPopulation) -> Result<f64> {
    if pop.is_empty() {
        return Err(Error::Domain("entropy of an empty population".into()));
    }
    let (h, d) = label_counts(pop.entries.iter().map(|(_, l)| l));
    Ok(binary_entropy(h, d))
}

/// Expected reduction in entropy from partitioning `pop` by one feature.
pub fn information_gain(pop: &LabeledPopulation, feature_index: usize) -> Result<f64> {
    let total = entropy(pop)?;
    if feature_index >= pop.width() {
        return Err(Error::Domain(format!(
            "feature index {feature_index} outside schema of width {}",
            pop.width()
        )));
    }
    let mut parts: BTreeMap<Option<u32>, (usize, usize)> = BTreeMap::new();
    for (v, l) in &pop.entries {
        let e = parts.entry(v.0.get(feature_index).copied().flatten()).or_default();
        match l {
            Label::Honest => e.0 += 1,
            Label::Dishonest => e.1 += 1,
        }
    }
    let n = pop.len() as f64;
    let conditional: f64 = parts
        .values()
        .map(|&(h, d)| (h + d) as f64 / n * binary_entropy(h, d))
        .sum();
    Ok((total - conditional).max(0.0))
}

/// Truncation rule for [`select_features`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Selection {
    TopK(usize),
    /// Keep every feature whose gain is strictly above the threshold.
    Threshold(f64),
}

impl Default for Selection {
    fn default() -> Self {
        Selection::TopK(3)
    }
}

/// All features with their gains, by descending gain then ascending index.
pub fn rank_features(pop: &LabeledPopulation) -> Result<Vec<(usize, f64)>> {
    entropy(pop)?;
    let mut ranked = (0..pop.width())
        .map(|i| information_gain(pop, i).map(|g| (i, g)))
        .collect::<Result<Vec<_>>>()?;
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    Ok(ranked)
}

pub fn select_features(pop: &LabeledPopulation, selection: Selection) -> Result<Vec<usize>> {
    if let Selection::TopK(0) = selection {
        return Err(Error::Domain("k must be positive".into()));
    }
    let ranked = rank_features(pop)?;
    Ok(match selection {
        Selection::TopK(k) => ranked.into_iter().take(k).map(|(i, _)| i).collect(),
        Selection::Threshold(delta) => ranked.into_iter().filter(|&(_, g)| g > delta).map(|(i, _)| i).collect(),
    })
}

/// Merge two compatible feature vectors position by position.
pub fn combine_features(a: &FeatureVector, b: &FeatureVector) -> Result<FeatureVector> {
    if a.len() != b.len() {
        return Err(Error::Domain(format!(
            "feature vectors of different widths ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    a.0.iter()
        .zip(&b.0)
        .enumerate()
        .map(|(index, (x, y))| match (x, y) {
            (Some(x), Some(y)) if x != y => Err(Error::Incompatible { index }),
            (Some(x), _) | (None, Some(x)) => Ok(Some(*x)),
            (None, None) => Ok(None),
        })
        .collect::<Result<Vec<_>>>()
        .map(FeatureVector)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fv(vals: &[Option<u32>]) -> FeatureVector {
        FeatureVector(vals.to_vec())
    }

    fn pop(rows: &[(&[u32], Label)]) -> LabeledPopulation {
        LabeledPopulation::new(
            rows.iter()
                .map(|(v, l)| (FeatureVector(v.iter().map(|&x| Some(x)).collect()), *l))
                .collect(),
        )
    }

    use Label::{Dishonest as D, Honest as H};

    #[test]
    fn entropy_extremes() {
        assert_eq!(entropy(&pop(&[(&[0], H), (&[1], H)])).unwrap(), 0.0);
        assert_eq!(entropy(&pop(&[(&[0], H), (&[1], D)])).unwrap(), 1.0);
    }

    #[test]
    fn entropy_ninety_percent_honest() {
        let mut rows: Vec<(&[u32], Label)> = vec![(&[0], H); 9];
        rows.push((&[0], D));
        let e = entropy(&pop(&rows)).unwrap();
        assert!((e - 0.4690).abs() < 1e-4, "{e}");
    }

    #[test]
    fn entropy_of_empty_population_is_error() {
        assert!(entropy(&LabeledPopulation::default()).is_err());
    }

    #[test]
    fn gain_hand_evaluated() {
        // value a: (h, h); value b: (h, d)
        let p = pop(&[(&[0], H), (&[0], H), (&[1], H), (&[1], D)]);
        let e = entropy(&p).unwrap();
        let g = information_gain(&p, 0).unwrap();
        // Entropy(pop) - (0.5*0 + 0.5*1)
        assert!((g - (e - 0.5)).abs() < 1e-12);
    }

    #[test]
    fn gain_of_perfect_and_constant_features() {
        let p = pop(&[(&[0, 7], H), (&[0, 7], H), (&[1, 7], D), (&[1, 7], D)]);
        assert_eq!(information_gain(&p, 0).unwrap(), entropy(&p).unwrap());
        assert_eq!(information_gain(&p, 1).unwrap(), 0.0);
        assert!(information_gain(&p, 2).is_err());
    }

    // Population whose three features have gains in the order f0 > f2 > f1.
    fn graded_population() -> LabeledPopulation {
        pop(&[
            (&[0, 0, 0], H),
            (&[0, 1, 0], H),
            (&[0, 0, 0], H),
            (&[1, 1, 1], D),
            (&[1, 0, 0], D),
            (&[1, 1, 1], D),
        ])
    }

    #[test]
    fn select_top_k_by_gain() {
        let p = graded_population();
        let ranked = rank_features(&p).unwrap();
        assert!(ranked[0].1 > ranked[1].1 && ranked[1].1 > ranked[2].1);
        assert_eq!(select_features(&p, Selection::TopK(2)).unwrap(), vec![0, 2]);
    }

    #[test]
    fn select_ties_by_lowest_index() {
        let p = pop(&[(&[0, 0, 0], H), (&[1, 1, 1], D)]);
        assert_eq!(select_features(&p, Selection::TopK(2)).unwrap(), vec![0, 1]);
    }

    #[test]
    fn select_by_threshold() {
        let p = graded_population();
        let ranked = rank_features(&p).unwrap();
        let delta = (ranked[1].1 + ranked[2].1) / 2.0;
        assert_eq!(select_features(&p, Selection::Threshold(delta)).unwrap(), vec![0, 2]);
    }

    #[test]
    fn zero_k_rejected() {
        assert!(select_features(&graded_population(), Selection::TopK(0)).is_err());
    }

    #[test]
    fn combine_country_and_gender() {
        let country = fv(&[Some(1), None, None]);
        let female = fv(&[None, Some(10), None]);
        let male = fv(&[None, Some(11), None]);
        assert_eq!(
            combine_features(&country, &female).unwrap(),
            fv(&[Some(1), Some(10), None])
        );
        match combine_features(&female, &male) {
            Err(Error::Incompatible { index }) => assert_eq!(index, 1),
            other => panic!("expected incompatibility, got {other:?}"),
        }
        assert_eq!(
            combine_features(&country, &FeatureVector::wildcard(3)).unwrap(),
            country
        );
    }

    #[test]
    fn pattern_matching() {
        let pat = FeatureVector::single(3, 1, 4);
        assert!(pat.matches(&fv(&[Some(0), Some(4), Some(9)])));
        assert!(!pat.matches(&fv(&[Some(0), Some(5), Some(9)])));
        assert!(!pat.matches(&fv(&[Some(0), None, Some(9)])));
    }

    fn arb_population() -> impl Strategy<Value = LabeledPopulation> {
        prop::collection::vec((prop::collection::vec(0u32..3, 4), any::<bool>()), 1..40).prop_map(|rows| {
            LabeledPopulation::new(
                rows.into_iter()
                    .map(|(v, h)| (FeatureVector(v.into_iter().map(Some).collect()), if h { H } else { D }))
                    .collect(),
            )
        })
    }

    fn arb_vector() -> impl Strategy<Value = FeatureVector> {
        prop::collection::vec(prop::option::of(0u32..2), 5).prop_map(FeatureVector)
    }

    proptest! {
        #[test]
        fn gain_bounded_by_entropy(p in arb_population()) {
            let e = entropy(&p).unwrap();
            prop_assert!((0.0..=1.0).contains(&e));
            for i in 0..4 {
                let g = information_gain(&p, i).unwrap();
                prop_assert!(g >= 0.0);
                prop_assert!(g <= e + 1e-12);
            }
        }

        #[test]
        fn entropy_symmetric_under_label_swap(p in arb_population()) {
            let swapped = LabeledPopulation::new(
                p.entries.iter().map(|(v, l)| (v.clone(), if *l == H { D } else { H })).collect(),
            );
            prop_assert!((entropy(&p).unwrap() - entropy(&swapped).unwrap()).abs() < 1e-15);
        }

        #[test]
        fn combine_commutative_and_idempotent(a in arb_vector(), b in arb_vector()) {
            prop_assert_eq!(combine_features(&a, &a).unwrap(), a.clone());
            match (combine_features(&a, &b), combine_features(&b, &a)) {
                (Ok(x), Ok(y)) => prop_assert_eq!(x, y),
                (Err(_), Err(_)) => {}
                _ => prop_assert!(false, "asymmetric compatibility"),
            }
        }
    }
}
