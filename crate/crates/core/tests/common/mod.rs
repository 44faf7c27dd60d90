//! Randomized property checks shared by the acceptance report and the
//! property tests. Each returns a one-line summary on success and a
//! description of the first counterexample on failure.

#![allow(dead_code)]

use causal_entropy::cone::{assemble, ConstraintRow, ConstraintSystem, Provenance};
use causal_entropy::dist::{cut_transform, entropy_vector_on, evaluate, sample_structure, ClassicalNetwork};
use causal_entropy::expr::Relation;
use causal_entropy::model::{CausalStructure, Dag, SubsetIndex};
use causal_entropy::polyhedron::{extreme_rays, fm_eliminate, hull, project_generators};
use causal_entropy::rational::Rat;
use causal_entropy::scenarios::{build_ic_classical, build_network_classical, build_triangle_classical, IcMarginal, NamedInequality};
use causal_entropy::sets::SysSet;
use causal_entropy::verify::{check_coords, is_valid, Witness};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Check = Result<String, String>;

pub const TOLERANCE: f64 = 1e-9;

/// An index of `n` unrelated coordinates.
pub fn plane(n: usize) -> SubsetIndex {
    let names = (0..n).map(|i| format!("x{i}")).collect();
    SubsetIndex::from_sets(names, (0..n).map(SysSet::singleton).collect())
}

pub fn random_system<R: Rng>(rng: &mut R, dim: usize, rows: usize) -> ConstraintSystem {
    let mut out = Vec::new();
    while out.len() < rows {
        let terms: Vec<(usize, i64)> = (0..dim).map(|j| (j, rng.gen_range(-2..=2))).filter(|t| t.1 != 0).collect();
        let relation = if rng.gen_bool(0.1) { Relation::Eq } else { Relation::Geq };
        if let Some(row) = ConstraintRow::from_ints(terms, relation, Provenance::User) {
            out.push(row);
        }
    }
    ConstraintSystem::new(plane(dim), out).expect("coordinates are in range")
}

fn implied(system: &ConstraintSystem, row: &ConstraintRow) -> bool {
    let c = row.rational_terms();
    let holds = |c: &[(usize, Rat)]| matches!(check_coords(system, c), Witness::Multipliers(_));
    holds(&c) && (!row.is_equality() || holds(&c.iter().map(|(j, v)| (*j, -v.clone())).collect::<Vec<_>>()))
}

/// Whether the two systems, over the same index, describe the same cone.
pub fn same_cone(a: &ConstraintSystem, b: &ConstraintSystem) -> bool {
    a.rows().iter().all(|r| implied(b, r)) && b.rows().iter().all(|r| implied(a, r))
}

/// Fourier–Motzkin projection against projection of the double-description
/// generators, on random systems of at most ten coordinates.
pub fn fm_matches_dd(cases: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for case in 0..cases {
        let dim = rng.gen_range(2..=10);
        let rows = rng.gen_range(dim..=dim + 4);
        let system = random_system(&mut rng, dim, rows);
        let drops = rng.gen_range(1..dim.min(4));
        let mut drop: Vec<usize> = (0..dim).collect();
        for k in (1..dim).rev() {
            drop.swap(k, rng.gen_range(0..=k));
        }
        drop.truncate(drops);
        let projected = fm_eliminate(&system, &drop);
        let generators = project_generators(&extreme_rays(&system), projected.index());
        let oracle = hull(&generators);
        if !same_cone(&projected, &oracle) {
            return Err(format!("case {case}: dim {dim}, dropped {drop:?}, FM and DD projections differ"));
        }
    }
    Ok(format!("{cases} random systems on 2..10 coordinates"))
}

/// Facets of the generators of a cone describe the cone again.
pub fn dd_roundtrip(cases: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for case in 0..cases {
        let dim = rng.gen_range(2..=8);
        let rows = rng.gen_range(dim..=dim + 5);
        let system = random_system(&mut rng, dim, rows);
        let generators = extreme_rays(&system);
        if let Some(ray) = generators.rays.iter().find(|r| !r.satisfies(&system)) {
            return Err(format!("case {case}: ray {ray} leaves the cone"));
        }
        if !same_cone(&system, &hull(&generators)) {
            return Err(format!("case {case}: hull of the generators differs from the cone"));
        }
        if extreme_rays(&hull(&generators)).rays != generators.rays {
            return Err(format!("case {case}: rays of the hull differ"));
        }
    }
    Ok(format!("{cases} random cones on 2..8 coordinates"))
}

fn sound_on(structure: &CausalStructure, samples: usize, max_card: usize, rng: &mut ChaCha8Rng) -> Result<(), String> {
    let dag = Dag::new(structure).map_err(|e| format!("{e:?}"))?;
    let system = assemble(&dag, Vec::new()).map_err(|e| e.to_string())?;
    for _ in 0..samples {
        let joint = sample_structure(structure, rng, max_card);
        let h = entropy_vector_on(&joint, system.index()).map_err(|e| e.to_string())?.values;
        if let Some(row) = system.rows().iter().find(|r| {
            let v = r.eval_f64(&h);
            if r.is_equality() {
                v.abs() > TOLERANCE
            } else {
                v < -TOLERANCE
            }
        }) {
            return Err(format!("sampled distribution violates {}", row.format(system.index())));
        }
    }
    Ok(())
}

fn merged(structure: CausalStructure) -> CausalStructure {
    Dag::new(&structure).expect("valid structure").collapse_hidden_classical().structure().clone()
}

/// Entropy vectors of sampled classical distributions satisfy every row the
/// cone generator emits for their structure.
pub fn cone_soundness(samples: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let structures = [
        ("triangle-classical", build_triangle_classical(), 3),
        ("ic2-classical", build_ic_classical(2, IcMarginal::Full), 2),
        ("network-4-3-classical, sources merged", merged(build_network_classical(4, 3)), 2),
    ];
    for (name, structure, card) in &structures {
        sound_on(structure, samples, *card, &mut rng).map_err(|e| format!("{name}: {e}"))?;
    }
    Ok(format!("{samples} samples on each of {} classical structures", structures.len()))
}

/// Every certificate, positive or negative, replays exactly.
pub fn certificate_replay(cases: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dag = Dag::new(&build_triangle_classical()).expect("valid structure").collapse_hidden_classical();
    let system = assemble(&dag, Vec::new()).expect("generated rows are in range");
    let index = dag.marginal_coordinates();
    let (mut valid, mut refuted) = (0, 0);
    for case in 0..cases {
        let terms: Vec<(usize, i64)> =
            (0..index.len()).map(|j| (j, rng.gen_range(-2..=2))).filter(|t| t.1 != 0).collect();
        let Some(row) = ConstraintRow::from_ints(terms, Relation::Geq, Provenance::User) else { continue };
        let candidate = row.to_inequality(&index);
        let cert = is_valid(&system, &candidate).map_err(|e| e.to_string())?;
        cert.replay(&system, &candidate).map_err(|e| format!("case {case}: {e}"))?;
        match cert.verdict {
            causal_entropy::verify::Verdict::Valid => valid += 1,
            causal_entropy::verify::Verdict::NotImplied => refuted += 1,
        }
    }
    for k in 1..=3 {
        let candidate = NamedInequality::Triangle(k).inequality();
        let cert = is_valid(&system, &candidate).map_err(|e| e.to_string())?;
        cert.replay(&system, &candidate).map_err(|e| format!("triangle_{k}: {e}"))?;
        valid += 1;
    }
    Ok(format!("{valid} valid and {refuted} refuted certificates replayed"))
}

/// Random classical networks with one source per pair of nodes never
/// violate the monogamy relations.
pub fn monogamy_sampling(samples: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::NEG_INFINITY;
    for n in [3, 4] {
        let index = Dag::new(&build_network_classical(n, 2)).expect("valid structure").marginal_coordinates();
        let relations: Vec<_> = (1..=n).map(|j| NamedInequality::Monogamy { n, j }.inequality()).collect();
        for sample in 0..samples {
            let joint = ClassicalNetwork::random_g_nm(&mut rng, n, 2, 3).joint();
            let vector = entropy_vector_on(&joint, &index).map_err(|e| e.to_string())?;
            for (j, relation) in relations.iter().enumerate() {
                let slack = evaluate(relation, &vector).map_err(|e| e.to_string())?;
                if slack > TOLERANCE {
                    return Err(format!("n={n}, sample {sample}: monogamy({n},{}) slack {slack:e}", j + 1));
                }
                worst = worst.max(slack);
            }
        }
    }
    Ok(format!("{samples} networks each for n=3,4; largest slack {worst:.3}"))
}

/// Splitting the sources that bypass a node keeps that node's pairwise
/// marginals with every other node.
pub fn cut_preserves_marginals(samples: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for sample in 0..samples {
        let n = rng.gen_range(3..=4);
        let m = rng.gen_range(2..n);
        let network = ClassicalNetwork::random_g_nm(&mut rng, n, m, 2);
        let before = network.joint();
        let i = rng.gen_range(0..n);
        let after = cut_transform(&network, i);
        let vi = format!("V{}", i + 1);
        for k in (0..n).filter(|&k| k != i) {
            let pair = [vi.clone(), format!("V{}", k + 1)];
            if before.marginal(&pair) != after.marginal(&pair) {
                return Err(format!("sample {sample}: G({n},{m}) cut at {vi} changes the marginal on {pair:?}"));
            }
        }
    }
    Ok(format!("{samples} random networks"))
}
