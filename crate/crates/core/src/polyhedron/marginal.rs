//! Marginal entropic cone of a causal structure: assemble the constraint
//! system, project it onto the coordinates of the marginal scenario, and
//! sort the resulting rows into basic ones, which follow from the elemental
//! inequalities of the observed variables alone, and causal ones, which need
//! the structure.

use std::collections::HashMap;

use super::fm::project_onto;
use crate::cone::{assemble, shannon_inequalities, ConstraintRow, ConstraintSystem};
use crate::model::{Dag, SubsetIndex};
use crate::rational::Rat;
use crate::sets::SysSet;
use crate::verify::{farkas, Outcome};

/// Largest number of observed variables whose permutations are searched
/// for symmetries.
const MAX_PERMUTED: usize = 8;

#[derive(Debug, Clone)]
pub struct MarginalCone {
    /// The full constraint system before projection.
    pub assembled: ConstraintSystem,
    /// Irredundant rows of the projection, over the marginal coordinates.
    pub system: ConstraintSystem,
    /// Positions of rows implied by the elemental inequalities of the
    /// observed variables, taken jointly wherever they coexist.
    pub basic: Vec<usize>,
    /// Positions of the remaining rows.
    pub causal: Vec<usize>,
    /// Causal rows grouped into orbits under the permutations of observed
    /// variables that preserve the contexts and the projected system.
    pub orbits: Vec<Vec<usize>>,
}

/// Elemental inequalities on the maximal coexisting sets of observed
/// variables, and the map from marginal coordinates into their index.
fn observed_shannon(dag: &Dag, marginal: &SubsetIndex) -> (ConstraintSystem, Vec<Option<usize>>) {
    let observed = marginal.support();
    let coexisting: Vec<SysSet> = observed.subsets().filter(|s| !s.is_empty() && dag.is_coexisting(*s)).collect();
    let maximal: Vec<SysSet> = coexisting
        .iter()
        .copied()
        .filter(|s| !coexisting.iter().any(|t| t != s && s.is_subset(*t)))
        .collect();
    let index = SubsetIndex::from_family(marginal.names().to_vec(), &maximal);
    let map = marginal.sets().iter().map(|&s| index.get(s)).collect();
    (shannon_inequalities(&index, &maximal), map)
}

fn implied(rows: &[ConstraintRow], row: &ConstraintRow) -> bool {
    let c = row.rational_terms();
    let holds = |c: &[(usize, Rat)]| matches!(farkas(rows, &|_| true, c), Outcome::Feasible(_));
    holds(&c) && (!row.is_equality() || holds(&c.iter().map(|(j, v)| (*j, -v.clone())).collect::<Vec<_>>()))
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for (k, &first) in items.iter().enumerate() {
        let mut rest = items.to_vec();
        rest.remove(k);
        for mut tail in permutations(&rest) {
            tail.insert(0, first);
            out.push(tail);
        }
    }
    out
}

/// Coordinate maps of the variable permutations that fix the context
/// family and map the rows of `system` onto themselves; identity first.
fn symmetries(system: &ConstraintSystem, contexts: &[SysSet]) -> Vec<Vec<usize>> {
    let index = system.index();
    let identity: Vec<usize> = (0..index.len()).collect();
    let observed: Vec<usize> = index.support().iter().collect();
    if observed.len() > MAX_PERMUTED {
        return vec![identity];
    }
    let mut sorted_contexts = contexts.to_vec();
    sorted_contexts.sort_unstable();
    let keys: HashMap<_, ()> = system.rows().iter().map(|r| (r.key(), ())).collect();
    let mut group = vec![identity.clone()];
    for image in permutations(&observed) {
        let mut perm: Vec<usize> = (0..index.names().len()).collect();
        for (&from, &to) in observed.iter().zip(&image) {
            perm[from] = to;
        }
        let map_set = |s: SysSet| SysSet::from_indices(s.iter().map(|i| perm[i]));
        let mut mapped: Vec<SysSet> = contexts.iter().map(|&c| map_set(c)).collect();
        mapped.sort_unstable();
        if mapped != sorted_contexts {
            continue;
        }
        let Some(coords) = index.sets().iter().map(|&s| index.get(map_set(s))).collect::<Option<Vec<usize>>>() else {
            continue;
        };
        if coords == identity {
            continue;
        }
        let preserved = system.rows().iter().all(|r| {
            let m: Vec<Option<usize>> = coords.iter().map(|&c| Some(c)).collect();
            r.remap(&m).is_some_and(|image| keys.contains_key(&image.key()))
        });
        if preserved {
            group.push(coords);
        }
    }
    group
}

/// Runs the pipeline on `dag`: hidden classical preparations are merged
/// into single variables, the structure's constraint system is assembled
/// and projected onto the marginal scenario, and the projected rows are
/// classified.
pub fn marginal_cone(dag: &Dag) -> MarginalCone {
    let collapsed = dag.collapse_hidden_classical();
    let assembled = assemble(&collapsed, Vec::new()).expect("generated rows are in range");
    let target = collapsed.marginal_coordinates();
    let system = project_onto(&assembled, &target);
    let (shannon, map) = observed_shannon(&collapsed, &target);
    let (basic, causal): (Vec<usize>, Vec<usize>) = (0..system.len()).partition(|&p| {
        let row = system.rows()[p].remap(&map).expect("observed coordinates coexist");
        implied(shannon.rows(), &row)
    });

    let group = symmetries(&system, collapsed.marginal_contexts());
    let position: HashMap<_, usize> = system.rows().iter().enumerate().map(|(p, r)| (r.key(), p)).collect();
    let mut orbit_of: HashMap<usize, usize> = HashMap::new();
    let mut orbits: Vec<Vec<usize>> = Vec::new();
    for &p in &causal {
        if orbit_of.contains_key(&p) {
            continue;
        }
        let mut members: Vec<usize> = group
            .iter()
            .filter_map(|g| {
                let m: Vec<Option<usize>> = g.iter().map(|&c| Some(c)).collect();
                system.rows()[p].remap(&m).and_then(|image| position.get(&image.key()).copied())
            })
            .collect();
        members.sort_unstable();
        members.dedup();
        for &q in &members {
            orbit_of.insert(q, orbits.len());
        }
        orbits.push(members);
    }
    MarginalCone { assembled, system, basic, causal, orbits }
}
