use std::collections::BTreeMap;
use std::io::Write;

use rand::seq::index::sample;
use rand::Rng;

pub type CategoryId = u32;

/// Per-node interest profile: category → quantifier in `(0, 1]`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PreferenceProfile {
    entries: BTreeMap<CategoryId, f64>,
}

impl PreferenceProfile {
    pub fn new() -> Self {
        Self::default()
    }

    /// Panics if a quantifier falls outside `(0, 1]`.
    pub fn from_entries(entries: impl IntoIterator<Item = (CategoryId, f64)>) -> Self {
        let mut p = Self::new();
        for (c, q) in entries {
            p.set(c, q);
        }
        p
    }

    /// Heterogeneous random start: `min_k..=max_k` distinct categories out of
    /// `categories`, each with a quantifier uniform in `(0, 1]`.
    pub fn random<R: Rng>(rng: &mut R, categories: u32, min_k: usize, max_k: usize) -> Self {
        let k = rng.random_range(min_k..=max_k).min(categories as usize);
        let mut cats: Vec<usize> = sample(rng, categories as usize, k).into_vec();
        cats.sort_unstable();
        let mut p = Self::new();
        for c in cats {
            // 1 - [0, 1) lands in (0, 1].
            p.set(c as CategoryId, 1.0 - rng.random::<f64>());
        }
        p
    }

    pub fn get(&self, category: CategoryId) -> Option<f64> {
        self.entries.get(&category).copied()
    }

    /// Quantifier or 0 when the category is absent.
    pub fn weight(&self, category: CategoryId) -> f64 {
        self.get(category).unwrap_or(0.0)
    }

    pub fn set(&mut self, category: CategoryId, q: f64) {
        assert!(q > 0.0 && q <= 1.0, "quantifier {q} outside (0, 1]");
        self.entries.insert(category, q);
    }

    pub fn contains(&self, category: CategoryId) -> bool {
        self.entries.contains_key(&category)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (CategoryId, f64)> + '_ {
        self.entries.iter().map(|(&c, &q)| (c, q))
    }

    pub fn nth(&self, i: usize) -> Option<(CategoryId, f64)> {
        self.iter().nth(i)
    }
}

/// Writes `node,category,quantifier` rows with six decimals.
pub fn write_profiles<W: Write>(profiles: &[PreferenceProfile], mut out: W) -> std::io::Result<()> {
    writeln!(out, "node,category,quantifier")?;
    for (node, p) in profiles.iter().enumerate() {
        for (c, q) in p.iter() {
            writeln!(out, "{node},{c},{q:.6}")?;
        }
    }
    Ok(())
}
