use std::collections::BTreeMap;

use serde::Serialize;

/// Whether a subtour inside a component continues through the exit vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Tag {
    Passing,
    Ending,
}

/// Sorted multiset of `(demand, tag)` entries, one per subtour.
pub type LocalConfig = Vec<(u32, Tag)>;

/// Sorted `(demand, count)` pairs with distinct demands and positive counts.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct SumList(Vec<(u32, u32)>);

impl SumList {
    pub fn from_values<I: IntoIterator<Item = u32>>(values: I) -> Self {
        Self::from_counts(values.into_iter().map(|v| (v, 1)))
    }

    pub fn from_counts<I: IntoIterator<Item = (u32, u32)>>(pairs: I) -> Self {
        let mut acc: BTreeMap<u32, u32> = BTreeMap::new();
        for (v, n) in pairs {
            if n > 0 {
                *acc.entry(v).or_default() += n;
            }
        }
        Self(acc.into_iter().collect())
    }

    pub fn entries(&self) -> &[(u32, u32)] {
        &self.0
    }

    /// Number of subtours.
    pub fn tours(&self) -> u64 {
        self.0.iter().map(|&(_, n)| n as u64).sum()
    }

    /// Number of distinct demands.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> impl Iterator<Item = u32> + '_ {
        self.0.iter().flat_map(|&(v, n)| std::iter::repeat_n(v, n as usize))
    }
}

pub fn canonical(mut entries: LocalConfig) -> LocalConfig {
    entries.sort_unstable();
    entries
}
