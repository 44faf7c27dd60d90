//! Maximal coexisting sets: maximal cliques of the compatibility graph.

use super::Dag;
use crate::sets::SysSet;

/// All maximal coexisting sets of a validated structure, in canonical order.
pub fn coexisting_sets(dag: &Dag) -> Vec<SysSet> {
    dag.maximal_sets().to_vec()
}

pub(super) fn maximal_cliques(dag: &Dag) -> Vec<SysSet> {
    let n = dag.len();
    let all = SysSet::full(n);
    let compatible: Vec<SysSet> = (0..n)
        .map(|i| all.difference(dag.conflicts(i)).without(i))
        .collect();
    let mut out = Vec::new();
    bron_kerbosch(&compatible, SysSet::EMPTY, all, SysSet::EMPTY, &mut out);
    sort_canonical(&mut out, n);
    out
}

/// Bron–Kerbosch with Tomita pivoting.
fn bron_kerbosch(adj: &[SysSet], r: SysSet, p: SysSet, x: SysSet, out: &mut Vec<SysSet>) {
    if p.is_empty() && x.is_empty() {
        if !r.is_empty() {
            out.push(r);
        }
        return;
    }
    let pivot = p
        .union(x)
        .iter()
        .max_by_key(|&u| adj[u].intersection(p).len())
        .expect("p or x is nonempty");
    let (mut p, mut x) = (p, x);
    for v in p.difference(adj[pivot]).iter() {
        bron_kerbosch(adj, r.with(v), p.intersection(adj[v]), x.intersection(adj[v]), out);
        p = p.without(v);
        x = x.with(v);
    }
}

/// Descending binary order with the first declared system most significant.
pub(crate) fn sort_canonical(sets: &mut [SysSet], n: usize) {
    sets.sort_by_key(|s| std::cmp::Reverse(s.order_key(n)));
}

/// Reference implementation by exhaustive search over all subsets. Only
/// usable for small structures.
pub fn brute_force_maximal_sets(dag: &Dag) -> Vec<SysSet> {
    let n = dag.len();
    assert!(n <= 16, "brute force limited to 16 systems");
    let coexisting: Vec<SysSet> = SysSet::full(n)
        .subsets()
        .filter(|s| !s.is_empty() && dag.is_coexisting(*s))
        .collect();
    let mut maximal: Vec<SysSet> = coexisting
        .iter()
        .copied()
        .filter(|s| !coexisting.iter().any(|t| t != s && s.is_subset(*t)))
        .collect();
    sort_canonical(&mut maximal, n);
    maximal
}
