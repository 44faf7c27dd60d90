//! Dense indexing of entropy coordinates.

use std::collections::HashMap;

use crate::sets::SysSet;

/// A stable dense index over nonempty subsets of systems. `H(∅) = 0` has no
/// coordinate. Coordinates follow the binary order in which the first
/// declared system is the most significant digit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsetIndex {
    names: Vec<String>,
    sets: Vec<SysSet>,
    pos: HashMap<SysSet, usize>,
}

impl SubsetIndex {
    /// All nonempty subsets of each member of `family`.
    pub fn from_family(names: Vec<String>, family: &[SysSet]) -> Self {
        let mut sets: Vec<SysSet> = family
            .iter()
            .flat_map(|f| f.subsets())
            .filter(|s| !s.is_empty())
            .collect();
        sets.sort_unstable();
        sets.dedup();
        Self::from_sets(names, sets)
    }

    /// Exactly the given (nonempty) sets.
    pub fn from_sets(names: Vec<String>, sets: Vec<SysSet>) -> Self {
        let n = names.len();
        let mut sets = sets;
        assert!(sets.iter().all(|s| !s.is_empty()), "the empty set has no coordinate");
        sets.sort_by_key(|s| s.order_key(n));
        sets.dedup();
        let pos = sets.iter().enumerate().map(|(i, s)| (*s, i)).collect();
        SubsetIndex { names, sets, pos }
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn sets(&self) -> &[SysSet] {
        &self.sets
    }

    pub fn set(&self, i: usize) -> SysSet {
        self.sets[i]
    }

    pub fn get(&self, set: SysSet) -> Option<usize> {
        self.pos.get(&set).copied()
    }

    pub fn contains(&self, set: SysSet) -> bool {
        self.pos.contains_key(&set)
    }

    pub fn index_of_name(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Resolves names to a set, failing on the first unknown name.
    pub fn set_of<S: AsRef<str>>(&self, names: &[S]) -> Result<SysSet, String> {
        let mut set = SysSet::EMPTY;
        for n in names {
            match self.index_of_name(n.as_ref()) {
                Some(i) => set = set.with(i),
                None => return Err(n.as_ref().to_string()),
            }
        }
        Ok(set)
    }

    /// Comma-joined member names in declaration order.
    pub fn label(&self, set: SysSet) -> String {
        set.iter().map(|i| self.names[i].as_str()).collect::<Vec<_>>().join(",")
    }

    /// The union of all coordinates.
    pub fn support(&self) -> SysSet {
        self.sets.iter().fold(SysSet::EMPTY, |a, s| a.union(*s))
    }

    /// Sub-index on the coordinates for which `keep` holds, plus the map from
    /// new position to old position.
    pub fn restrict(&self, keep: impl Fn(SysSet) -> bool) -> (SubsetIndex, Vec<usize>) {
        let kept: Vec<SysSet> = self.sets.iter().copied().filter(|s| keep(*s)).collect();
        let sub = SubsetIndex::from_sets(self.names.clone(), kept);
        let map = sub.sets.iter().map(|s| self.pos[s]).collect();
        (sub, map)
    }
}
