//! Acceptance report: one PASS or FAIL line per criterion.
//!
//! Every criterion is evaluated even when an earlier one fails. The process
//! exits with status 0 after the report unless `ACCEPTANCE_STRICT` is set,
//! in which case any FAIL makes it exit with status 1.

mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use causal_entropy::cone::{shannon_inequalities, ConstraintRow, Provenance};
use causal_entropy::dist::{
    evaluate, ic_entropy_vector, ic_protocol, mix_box, network_monogamy_check, scan_boundary,
    NsBox, ScanRow,
};
use causal_entropy::expr::Inequality;
use causal_entropy::model::{Dag, SubsetIndex};
use causal_entropy::polyhedron::{extreme_rays, marginal_cone, MarginalCone};
use causal_entropy::rational::Rat;
use causal_entropy::scenarios::{
    build_ic_classical, build_triangle_classical, witness_distributions, IcMarginal, NamedInequality,
};
use num_bigint::BigInt;

type Outcome = Result<String, String>;

const PERMUTATIONS: [[&str; 3]; 6] =
    [["A", "B", "C"], ["A", "C", "B"], ["B", "A", "C"], ["B", "C", "A"], ["C", "A", "B"], ["C", "B", "A"]];

/// Extremal ray types of the classical triangle, with entries in the column
/// order `H(C), H(B), H(B,C), H(A), H(A,C), H(A,B), H(A,B,C)`.
const RAY_TYPES: [[i64; 7]; 4] =
    [[0, 0, 0, 1, 1, 1, 1], [0, 1, 1, 1, 1, 1, 1], [1, 1, 2, 1, 2, 2, 2], [3, 3, 5, 2, 4, 4, 6]];

const COLUMNS: [&[&str]; 7] = [&["C"], &["B"], &["B", "C"], &["A"], &["A", "C"], &["A", "B"], &["A", "B", "C"]];

fn rename(ineq: &Inequality, image: [&str; 3]) -> Inequality {
    let map = |n: &str| match n {
        "A" => image[0].to_string(),
        "B" => image[1].to_string(),
        "C" => image[2].to_string(),
        other => other.to_string(),
    };
    Inequality { expr: ineq.expr.rename(&map), relation: ineq.relation }
}

fn row_over(ineq: &Inequality, index: &SubsetIndex) -> Result<ConstraintRow, String> {
    ConstraintRow::from_inequality(ineq, index, Provenance::User)
        .map_err(|e| e.to_string())?
        .ok_or_else(|| format!("{ineq} vanishes"))
}

fn keys(rows: &[ConstraintRow]) -> BTreeSet<String> {
    rows.iter().map(|r| format!("{:?} {:?}", r.relation(), r.terms())).collect()
}

fn triangle_cone() -> MarginalCone {
    marginal_cone(&Dag::new(&build_triangle_classical()).expect("valid structure"))
}

fn criterion_1(cone: &MarginalCone, elapsed: Duration) -> Outcome {
    let index = cone.system.index();
    let observed = index.support();
    let mut expected = shannon_inequalities(index, &[observed]).rows().to_vec();
    for k in 1..=3 {
        let base = NamedInequality::Triangle(k).inequality();
        for image in PERMUTATIONS {
            expected.push(row_over(&rename(&base, image), index)?);
        }
    }
    let (got, want) = (keys(cone.system.rows()), keys(&expected));
    let detail = format!(
        "{} rows ({} polymatroid, {} causal in {} orbits) in {:.1}s",
        got.len(),
        cone.basic.len(),
        cone.causal.len(),
        cone.orbits.len(),
        elapsed.as_secs_f64()
    );
    if got != want {
        return Err(format!("{detail}; expected {} rows, {} missing, {} extra", want.len(), want.difference(&got).count(), got.difference(&want).count()));
    }
    if elapsed > Duration::from_secs(300) {
        return Err(format!("{detail}; over 5 minutes"));
    }
    Ok(detail)
}

fn table_vector(index: &SubsetIndex, values: &[BigInt], image: [&str; 3]) -> Result<Vec<BigInt>, String> {
    COLUMNS
        .iter()
        .map(|names| {
            let renamed: Vec<&str> = names
                .iter()
                .map(|n| image[["A", "B", "C"].iter().position(|x| x == n).expect("triangle variable")])
                .collect();
            let set = index.set_of(&renamed)?;
            let j = index.get(set).ok_or_else(|| format!("no coordinate for {renamed:?}"))?;
            Ok(values[j].clone())
        })
        .collect()
}

fn criterion_2(cone: &MarginalCone) -> Outcome {
    let vrep = extreme_rays(&cone.system);
    let index = &vrep.index;
    let got: BTreeSet<Vec<BigInt>> = vrep
        .rays
        .iter()
        .map(|r| table_vector(index, r.coordinates(), ["A", "B", "C"]))
        .collect::<Result<_, _>>()?;
    let mut orbits: BTreeSet<Vec<BigInt>> = BTreeSet::new();
    for ray in &got {
        let canonical = PERMUTATIONS
            .iter()
            .map(|&image| {
                let mut by_set = vec![BigInt::from(0); index.len()];
                for (names, v) in COLUMNS.iter().zip(ray) {
                    by_set[index.get(index.set_of(names)?).expect("triangle coordinate")] = v.clone();
                }
                table_vector(index, &by_set, image)
            })
            .collect::<Result<Vec<_>, _>>()?
            .into_iter()
            .max()
            .expect("six permutations");
        orbits.insert(canonical);
    }
    let mut want: BTreeSet<Vec<BigInt>> = BTreeSet::new();
    for t in RAY_TYPES {
        let mut by_set = vec![BigInt::from(0); index.len()];
        for (names, v) in COLUMNS.iter().zip(t) {
            by_set[index.get(index.set_of(names)?).expect("triangle coordinate")] = BigInt::from(v);
        }
        for image in PERMUTATIONS {
            want.insert(table_vector(index, &by_set, image)?);
        }
    }
    let detail = format!("{} rays in {} orbits", got.len(), orbits.len());
    if got == want && got.len() == 10 && orbits.len() == 4 {
        Ok(detail)
    } else {
        Err(format!("{detail}; expected 10 rays in 4 orbits, {} missing", want.difference(&got).count()))
    }
}

fn criterion_3() -> Outcome {
    for (k, p) in witness_distributions() {
        for (names, expected) in COLUMNS.iter().zip(RAY_TYPES[k - 1]) {
            let h = p.entropy_exact(names).map_err(|e| e.to_string())?;
            if h != Some(Rat::from_int(expected)) {
                return Err(format!("p{k}: H({}) = {h:?}, expected {expected}", names.join(",")));
            }
        }
    }
    Ok("p1..p4 reproduce ray types 1..4 exactly".into())
}

fn causal_rows(cone: &MarginalCone) -> Vec<String> {
    cone.causal.iter().map(|&p| cone.system.rows()[p].format(cone.system.index())).collect()
}

fn contains(cone: &MarginalCone, named: NamedInequality) -> Result<bool, String> {
    let row = row_over(&named.inequality(), cone.system.index())?;
    Ok(cone.causal.iter().any(|&p| cone.system.rows()[p].key() == row.key()))
}

fn criterion_4() -> Outcome {
    let dag = Dag::new(&build_ic_classical(2, IcMarginal::RestrictedWithInputs)).expect("valid structure");
    let t = Instant::now();
    let cone = marginal_cone(&dag);
    let present = contains(&cone, NamedInequality::IcSafi)?;
    let detail = format!(
        "{} causal rows in {} orbits, IC_safi present: {present}, in {:.1}s",
        cone.causal.len(),
        cone.orbits.len(),
        t.elapsed().as_secs_f64()
    );
    if present && cone.causal.len() == 1 {
        Ok(detail)
    } else {
        Err(format!("{detail}; causal rows: {}", causal_rows(&cone).join(" | ")))
    }
}

fn criterion_5() -> Outcome {
    let dag = Dag::new(&build_ic_classical(2, IcMarginal::Full)).expect("valid structure");
    let t = Instant::now();
    let cone = marginal_cone(&dag);
    let present = contains(&cone, NamedInequality::IcTight)?;
    let detail = format!(
        "{} rows, {} causal (raw), {} orbits, IC_tight present: {present}, in {:.1}s",
        cone.system.len(),
        cone.causal.len(),
        cone.orbits.len(),
        t.elapsed().as_secs_f64()
    );
    if present && cone.causal.len() == 54 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_6() -> Outcome {
    let names = [
        "IC_tight",
        "IC_tight_n(3)",
        "monogamy(3,1)",
        "monogamy(4,1)",
        "triangle_1",
        "triangle_2",
        "triangle_3",
        "IC_dense_n(2)",
        "IC_dense_n(3)",
    ];
    let (mut passed, mut failed) = (Vec::new(), Vec::new());
    for name in names {
        let named = NamedInequality::parse(name).expect("known name");
        let dag = Dag::new(&named.home()).expect("valid structure");
        let system = causal_entropy::cone::assemble(&dag, Vec::new()).expect("generated rows are in range");
        let candidate = named.inequality();
        let t = Instant::now();
        let outcome = causal_entropy::verify::is_valid(&system, &candidate)
            .map_err(|e| e.to_string())
            .and_then(|cert| cert.replay(&system, &candidate).map(|_| cert.verdict).map_err(|e| e.to_string()));
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(causal_entropy::verify::Verdict::Valid) if secs <= 60.0 => passed.push(format!("{name} {secs:.1}s")),
            Ok(verdict) => failed.push(format!("{name} {verdict} {secs:.1}s")),
            Err(e) => failed.push(format!("{name}: {e}")),
        }
    }
    let detail = format!("certified and replayed: {}", passed.join(", "));
    if failed.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{detail}; not certified: {}", failed.join(", ")))
    }
}

fn criterion_7() -> Outcome {
    let vector = ic_entropy_vector(&ic_protocol(&NsBox::pr())).map_err(|e| e.to_string())?;
    let slack = evaluate(&NamedInequality::IcOriginal.inequality(), &vector).map_err(|e| e.to_string())?;
    let get = |names: &[&str]| vector.get_names(names).unwrap_or(f64::NAN);
    let i1 = get(&["X1"]) + get(&["Y1"]) - get(&["X1", "Y1"]);
    let i2 = get(&["X2"]) + get(&["Y2"]) - get(&["X2", "Y2"]);
    let hm = get(&["M"]);
    let detail = format!("slack {slack:.12}, I(X1:Y1)={i1:.12}, I(X2:Y2)={i2:.12}, H(M)={hm:.12}");
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-9;
    if close(slack, 1.0) && close(i1, 1.0) && close(i2, 1.0) && close(hm, 1.0) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn threshold(row: &ScanRow) -> f64 {
    row.gamma_star.as_ref().map_or(f64::INFINITY, Rat::to_f64)
}

fn criterion_8() -> Outcome {
    let step = Rat::new(1, 16);
    let tight = scan_boundary(&NamedInequality::IcTight.inequality(), &step).map_err(|e| e.to_string())?;
    let original = scan_boundary(&NamedInequality::IcOriginal.inequality(), &step).map_err(|e| e.to_string())?;
    for (t, o) in tight.iter().zip(&original) {
        if threshold(t) > threshold(o) {
            return Err(format!("at epsilon={}: tight {} > original {}", t.epsilon, threshold(t), threshold(o)));
        }
    }
    let candidate = NamedInequality::IcTight.inequality();
    for row in &tight {
        let Some(g) = &row.gamma_star else { continue };
        let top = Rat::one() - &row.epsilon;
        for k in 1..=4 {
            let gamma = g + &((&top - g) * Rat::new(k, 4));
            let vector = ic_entropy_vector(&ic_protocol(&mix_box(&gamma, &row.epsilon).map_err(|e| e.to_string())?))
                .map_err(|e| e.to_string())?;
            if evaluate(&candidate, &vector).map_err(|e| e.to_string())? <= 0.0 {
                return Err(format!("at epsilon={}: gamma={gamma} above the threshold is not violated", row.epsilon));
            }
        }
    }
    let strict = tight.iter().zip(&original).filter(|(t, o)| threshold(t) < threshold(o)).count();
    Ok(format!(
        "{} grid points, tight threshold never above original, strictly below at {strict}; violation persists above each threshold",
        tight.len()
    ))
}

fn criterion_9() -> Outcome {
    for m in 2..=6usize {
        let (lhs, rhs) = network_monogamy_check(m);
        let fact: i64 = (1..m as i64).product();
        let want = Rat::from_int(m as i64) - Rat::new(2, fact);
        if lhs != Rat::from_int(m as i64) || rhs != want {
            return Err(format!("m={m}: ({lhs}, {rhs}), expected ({m}, {want})"));
        }
    }
    Ok("(m, m - 2/(m-1)!) for m = 2..6".into())
}

fn criterion_10() -> Outcome {
    let checks: [(&str, fn() -> common::Check); 6] = [
        ("cone soundness", || common::cone_soundness(100, 1)),
        ("FM vs DD", || common::fm_matches_dd(60, 2)),
        ("DD roundtrip", || common::dd_roundtrip(60, 3)),
        ("certificate replay", || common::certificate_replay(40, 4)),
        ("monogamy sampling", || common::monogamy_sampling(200, 5)),
        ("cut marginals", || common::cut_preserves_marginals(100, 6)),
    ];
    let mut parts = Vec::new();
    for (name, check) in checks {
        match check() {
            Ok(summary) => parts.push(format!("{name}: {summary}")),
            Err(e) => return Err(format!("{name}: {e}")),
        }
    }
    Ok(parts.join("; "))
}

fn report(number: usize, title: &str, run: impl FnOnce() -> Outcome) -> bool {
    let t = Instant::now();
    let outcome = run();
    let secs = t.elapsed().as_secs_f64();
    match &outcome {
        Ok(detail) => println!("PASS {number:>2} {title}: {detail} [{secs:.1}s]"),
        Err(detail) => println!("FAIL {number:>2} {title}: {detail} [{secs:.1}s]"),
    }
    outcome.is_ok()
}

fn main() {
    let start = Instant::now();
    let t = Instant::now();
    let triangle = triangle_cone();
    let triangle_time = t.elapsed();
    let results = [
        report(1, "triangle marginal cone", || criterion_1(&triangle, triangle_time)),
        report(2, "triangle extremal rays", || criterion_2(&triangle)),
        report(3, "witness distributions", criterion_3),
        report(4, "restricted information causality cone", criterion_4),
        report(5, "full information causality cone", criterion_5),
        report(6, "quantum validity certificates", criterion_6),
        report(7, "PR box violation", criterion_7),
        report(8, "boundary dominance", criterion_8),
        report(9, "network bound witness", criterion_9),
        report(10, "property suites", criterion_10),
    ];
    let passed = results.iter().filter(|&&ok| ok).count();
    println!("{passed}/{} criteria passed in {:.1}s", results.len(), start.elapsed().as_secs_f64());
    if std::env::var_os("ACCEPTANCE_STRICT").is_some() && passed < results.len() {
        std::process::exit(1);
    }
}
