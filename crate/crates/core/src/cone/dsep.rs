//! d-separation on the collapsed graph, where each preparation and each
//! operation becomes one vertex carrying the systems it produces.

use crate::model::{Dag, Producer};
use crate::sets::SysSet;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DsepError {
    #[error("the sets {0} and {1} overlap")]
    Overlap(&'static str, &'static str),
}

pub(crate) struct Collapsed {
    /// systems produced by each vertex
    pub produced: Vec<SysSet>,
    pub parents: Vec<Vec<usize>>,
    pub children: Vec<Vec<usize>>,
    /// vertex of each system
    pub vertex_of: Vec<usize>,
}

impl Collapsed {
    pub fn new(dag: &Dag) -> Self {
        let np = dag.preparations().len();
        let ops = dag.operations();
        let nv = np + ops.len();
        let mut produced: Vec<SysSet> = dag.preparations().to_vec();
        produced.extend(ops.iter().map(|o| o.outputs));
        let vertex_of: Vec<usize> = (0..dag.len())
            .map(|s| match dag.producer(s) {
                Producer::Preparation(k) => k,
                Producer::Operation(k) => np + k,
            })
            .collect();
        let mut parents = vec![Vec::new(); nv];
        let mut children = vec![Vec::new(); nv];
        for (k, op) in ops.iter().enumerate() {
            let v = np + k;
            let mut ps: Vec<usize> = op.inputs.iter().map(|s| vertex_of[s]).collect();
            ps.sort_unstable();
            ps.dedup();
            for &p in &ps {
                children[p].push(v);
            }
            parents[v] = ps;
        }
        Collapsed { produced, parents, children, vertex_of }
    }

    pub fn vertices(&self, set: SysSet) -> Vec<usize> {
        let mut v: Vec<usize> = set.iter().map(|s| self.vertex_of[s]).collect();
        v.sort_unstable();
        v.dedup();
        v
    }
}

/// True iff every path between `x` and `y` is blocked by `z`. A vertex blocks
/// a chain or fork only when all its systems lie in `z`; a collider is open
/// when any system of it or of one of its descendants lies in `z`. Both
/// choices err on the side of reporting dependence.
pub fn d_separated(dag: &Dag, x: SysSet, y: SysSet, z: SysSet) -> Result<bool, DsepError> {
    if !x.is_disjoint(y) {
        return Err(DsepError::Overlap("X", "Y"));
    }
    if !x.is_disjoint(z) {
        return Err(DsepError::Overlap("X", "Z"));
    }
    if !y.is_disjoint(z) {
        return Err(DsepError::Overlap("Y", "Z"));
    }
    if x.is_empty() || y.is_empty() {
        return Ok(true);
    }
    let g = Collapsed::new(dag);
    let nv = g.produced.len();
    let xs = g.vertices(x);
    let ys = g.vertices(y);
    if xs.iter().any(|v| ys.contains(v)) {
        return Ok(false);
    }
    let blocked: Vec<bool> = g.produced.iter().map(|p| p.is_subset(z)).collect();
    // vertices with a descendant-or-self touching z
    let mut opens = vec![false; nv];
    let mut stack: Vec<usize> = (0..nv).filter(|&v| !g.produced[v].is_disjoint(z)).collect();
    while let Some(v) = stack.pop() {
        if !opens[v] {
            opens[v] = true;
            stack.extend(g.parents[v].iter().copied());
        }
    }

    // reachability over (vertex, arrived-from-child) states
    let mut seen = vec![[false; 2]; nv];
    let mut queue: Vec<(usize, bool)> = Vec::new();
    for &v in &xs {
        for &p in &g.parents[v] {
            queue.push((p, true));
        }
        for &c in &g.children[v] {
            queue.push((c, false));
        }
    }
    while let Some((v, up)) = queue.pop() {
        if seen[v][up as usize] {
            continue;
        }
        seen[v][up as usize] = true;
        if ys.contains(&v) {
            return Ok(false);
        }
        if up {
            if !blocked[v] {
                queue.extend(g.parents[v].iter().map(|&p| (p, true)));
                queue.extend(g.children[v].iter().map(|&c| (c, false)));
            }
        } else {
            if !blocked[v] {
                queue.extend(g.children[v].iter().map(|&c| (c, false)));
            }
            if opens[v] {
                queue.extend(g.parents[v].iter().map(|&p| (p, true)));
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{CausalStructure, SystemKind::Classical};

    fn set(dag: &Dag, names: &[&str]) -> SysSet {
        dag.set_of(names).unwrap()
    }

    #[test]
    fn chain_fork_collider() {
        let chain = Dag::new(
            &CausalStructure::new()
                .system("X", Classical)
                .system("M", Classical)
                .system("Y", Classical)
                .prepare(["X"])
                .op("f", ["X"], ["M"])
                .op("g", ["M"], ["Y"]),
        )
        .unwrap();
        let (x, m, y) = (set(&chain, &["X"]), set(&chain, &["M"]), set(&chain, &["Y"]));
        assert_eq!(d_separated(&chain, x, y, m), Ok(true));
        assert_eq!(d_separated(&chain, x, y, SysSet::EMPTY), Ok(false));
        assert!(d_separated(&chain, x, x.union(y), m).is_err());

        let collider = Dag::new(
            &CausalStructure::new()
                .system("X", Classical)
                .system("Y", Classical)
                .system("Z", Classical)
                .system("W", Classical)
                .prepare(["X"])
                .prepare(["Y"])
                .op("f", ["X", "Y"], ["Z"])
                .op("g", ["Z"], ["W"]),
        )
        .unwrap();
        let (x, y, z, w) = (
            set(&collider, &["X"]),
            set(&collider, &["Y"]),
            set(&collider, &["Z"]),
            set(&collider, &["W"]),
        );
        assert_eq!(d_separated(&collider, x, y, SysSet::EMPTY), Ok(true));
        assert_eq!(d_separated(&collider, x, y, z), Ok(false));
        // conditioning on a descendant of the collider also opens it
        assert_eq!(d_separated(&collider, x, y, w), Ok(false));
    }

    #[test]
    fn jointly_prepared_systems_are_dependent() {
        let dag = Dag::new(
            &CausalStructure::new()
                .system("A", Classical)
                .system("B", Classical)
                .prepare(["A", "B"]),
        )
        .unwrap();
        assert_eq!(d_separated(&dag, set(&dag, &["A"]), set(&dag, &["B"]), SysSet::EMPTY), Ok(false));
    }
}
