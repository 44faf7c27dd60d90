//! Classical-quantum causal structures.
//!
//! A [`CausalStructure`] is the declarative, name-based description (what the
//! DSL parses into). [`Dag`] is the validated, index-based form every other
//! module works with; it is immutable once built.

mod coexist;
mod dsl;
mod index;

pub use coexist::{brute_force_maximal_sets, coexisting_sets};
pub use dsl::{parse_structure, DslError};
pub use index::SubsetIndex;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use crate::sets::{SysSet, MAX_SYSTEMS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SystemKind {
    Classical,
    Quantum,
}

impl fmt::Display for SystemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SystemKind::Classical => "classical",
            SystemKind::Quantum => "quantum",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct System {
    pub name: String,
    pub kind: SystemKind,
}

/// Root node: a joint state of its systems.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Preparation {
    pub systems: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Operation {
    pub name: String,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
}

/// Operations that are alternatives of each other (different measurement
/// settings on the same input), so their outputs never coexist.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExclusivityGroup {
    pub operations: Vec<String>,
}

/// The family of jointly observable contexts.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MarginalScenario {
    pub contexts: Vec<Vec<String>>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CausalStructure {
    pub systems: Vec<System>,
    pub preparations: Vec<Preparation>,
    pub operations: Vec<Operation>,
    pub exclusivity_groups: Vec<ExclusivityGroup>,
    pub marginal: MarginalScenario,
}

fn names<I, S>(it: I) -> Vec<String>
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    it.into_iter().map(Into::into).collect()
}

impl CausalStructure {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn system(mut self, name: impl Into<String>, kind: SystemKind) -> Self {
        self.systems.push(System { name: name.into(), kind });
        self
    }

    pub fn prepare<I, S>(mut self, systems: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.preparations.push(Preparation { systems: names(systems) });
        self
    }

    pub fn op<I, J, S, T>(mut self, name: impl Into<String>, inputs: I, outputs: J) -> Self
    where
        I: IntoIterator<Item = S>,
        J: IntoIterator<Item = T>,
        S: Into<String>,
        T: Into<String>,
    {
        self.operations.push(Operation {
            name: name.into(),
            inputs: names(inputs),
            outputs: names(outputs),
        });
        self
    }

    pub fn exclusive<I, S>(mut self, ops: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.exclusivity_groups.push(ExclusivityGroup { operations: names(ops) });
        self
    }

    pub fn marginal<I, S>(mut self, context: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.marginal.contexts.push(names(context));
        self
    }

    pub fn kind_of(&self, name: &str) -> Option<SystemKind> {
        self.systems.iter().find(|s| s.name == name).map(|s| s.kind)
    }

    /// Serializes to the line-oriented structure DSL.
    pub fn to_dsl(&self) -> String {
        dsl::emit(self)
    }

    /// Checks every structural rule and returns the complete list of violations.
    pub fn validate(&self) -> ValidationReport {
        match Dag::build(self) {
            Ok(_) => ValidationReport::default(),
            Err(report) => report,
        }
    }
}

/// A single rule violation found by [`CausalStructure::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    TooManySystems(usize),
    InvalidName(String),
    DuplicateSystem(String),
    DuplicateOperation(String),
    UndeclaredSystem { name: String, site: String },
    EmptySet { site: String },
    DuplicateProducer { system: String, producers: Vec<String> },
    Unproduced(String),
    InputOutputOverlap { operation: String, system: String },
    Cycle { operations: Vec<String> },
    NoCloning { system: String, operations: Vec<String> },
    UnknownOperation { name: String, site: String },
    ExclusiveTooSmall { group: usize },
    ExclusiveNoSharedQuantumInput { first: String, second: String },
    ExclusiveOverlap { operation: String },
    ExclusiveMerge { system: String },
    NonCoexistingContext { context: Vec<String> },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            TooManySystems(n) => write!(f, "too many systems: {n} (limit {MAX_SYSTEMS})"),
            InvalidName(n) => write!(f, "invalid name `{n}`"),
            DuplicateSystem(n) => write!(f, "duplicate system declaration `{n}`"),
            DuplicateOperation(n) => write!(f, "duplicate operation name `{n}`"),
            UndeclaredSystem { name, site } => write!(f, "undeclared system `{name}` in {site}"),
            EmptySet { site } => write!(f, "empty system set in {site}"),
            DuplicateProducer { system, producers } => write!(
                f,
                "duplicate producer: `{system}` is produced by {}",
                producers.join(", ")
            ),
            Unproduced(n) => write!(f, "system `{n}` is never produced"),
            InputOutputOverlap { operation, system } => write!(
                f,
                "operation `{operation}` uses `{system}` as both input and output"
            ),
            Cycle { operations } => write!(f, "cycle through operations {}", operations.join(", ")),
            NoCloning { system, operations } => write!(
                f,
                "no-cloning: quantum system `{system}` is consumed by non-exclusive operations {}",
                operations.join(", ")
            ),
            UnknownOperation { name, site } => write!(f, "unknown operation `{name}` in {site}"),
            ExclusiveTooSmall { group } => {
                write!(f, "exclusivity group #{group} needs at least two operations")
            }
            ExclusiveNoSharedQuantumInput { first, second } => write!(
                f,
                "exclusive operations `{first}` and `{second}` share no quantum input"
            ),
            ExclusiveOverlap { operation } => {
                write!(f, "operation `{operation}` belongs to several exclusivity groups")
            }
            ExclusiveMerge { system } => write!(
                f,
                "system `{system}` depends on two alternatives of one exclusivity group"
            ),
            NonCoexistingContext { context } => write!(
                f,
                "marginal context {{{}}} is not a coexisting set",
                context.join(", ")
            ),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return writeln!(f, "ok");
        }
        for v in &self.violations {
            writeln!(f, "violation: {v}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ValidationReport {}

/// Where a system comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Producer {
    Preparation(usize),
    Operation(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpInfo {
    pub name: String,
    pub inputs: SysSet,
    pub outputs: SysSet,
}

/// A validated causal structure in index form.
#[derive(Debug, Clone)]
pub struct Dag {
    structure: CausalStructure,
    names: Vec<String>,
    kinds: Vec<SystemKind>,
    preps: Vec<SysSet>,
    ops: Vec<OpInfo>,
    producer: Vec<Producer>,
    groups: Vec<Vec<usize>>,
    marginal: Vec<SysSet>,
    descendants: Vec<SysSet>,
    conflicts: Vec<SysSet>,
    maximal: Vec<SysSet>,
}

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl Dag {
    /// Validates `structure` and builds the index form.
    pub fn new(structure: &CausalStructure) -> Result<Dag, ValidationReport> {
        Dag::build(structure)
    }

    fn build(structure: &CausalStructure) -> Result<Dag, ValidationReport> {
        let mut v = Vec::new();
        let n = structure.systems.len();
        if n > MAX_SYSTEMS {
            v.push(Violation::TooManySystems(n));
            return Err(ValidationReport { violations: v });
        }

        let mut index: HashMap<&str, usize> = HashMap::new();
        for (i, s) in structure.systems.iter().enumerate() {
            if !is_identifier(&s.name) {
                v.push(Violation::InvalidName(s.name.clone()));
            }
            if index.insert(s.name.as_str(), i).is_some() {
                v.push(Violation::DuplicateSystem(s.name.clone()));
            }
        }
        let resolve = |list: &[String], site: String, v: &mut Vec<Violation>| -> SysSet {
            if list.is_empty() {
                v.push(Violation::EmptySet { site: site.clone() });
            }
            let mut set = SysSet::EMPTY;
            for name in list {
                match index.get(name.as_str()) {
                    Some(&i) => set = set.with(i),
                    None => v.push(Violation::UndeclaredSystem {
                        name: name.clone(),
                        site: site.clone(),
                    }),
                }
            }
            set
        };

        let preps: Vec<SysSet> = structure
            .preparations
            .iter()
            .enumerate()
            .map(|(k, p)| resolve(&p.systems, format!("preparation #{}", k + 1), &mut v))
            .collect();
        let mut op_names: HashMap<&str, usize> = HashMap::new();
        let mut ops = Vec::new();
        for (k, op) in structure.operations.iter().enumerate() {
            if !is_identifier(&op.name) {
                v.push(Violation::InvalidName(op.name.clone()));
            }
            if op_names.insert(op.name.as_str(), k).is_some() {
                v.push(Violation::DuplicateOperation(op.name.clone()));
            }
            let inputs = resolve(&op.inputs, format!("inputs of `{}`", op.name), &mut v);
            let outputs = resolve(&op.outputs, format!("outputs of `{}`", op.name), &mut v);
            for s in inputs.intersection(outputs).iter() {
                v.push(Violation::InputOutputOverlap {
                    operation: op.name.clone(),
                    system: structure.systems[s].name.clone(),
                });
            }
            ops.push(OpInfo { name: op.name.clone(), inputs, outputs });
        }
        let marginal: Vec<SysSet> = structure
            .marginal
            .contexts
            .iter()
            .enumerate()
            .map(|(k, c)| resolve(c, format!("marginal context #{}", k + 1), &mut v))
            .collect();

        // producers
        let mut producers: Vec<Vec<Producer>> = vec![Vec::new(); n];
        for (k, p) in preps.iter().enumerate() {
            for s in p.iter() {
                producers[s].push(Producer::Preparation(k));
            }
        }
        for (k, op) in ops.iter().enumerate() {
            for s in op.outputs.iter() {
                producers[s].push(Producer::Operation(k));
            }
        }
        let producer_name = |p: &Producer| match p {
            Producer::Preparation(k) => format!("preparation #{}", k + 1),
            Producer::Operation(k) => format!("operation `{}`", ops[*k].name),
        };
        for (s, ps) in producers.iter().enumerate() {
            match ps.len() {
                0 => v.push(Violation::Unproduced(structure.systems[s].name.clone())),
                1 => {}
                _ => v.push(Violation::DuplicateProducer {
                    system: structure.systems[s].name.clone(),
                    producers: ps.iter().map(producer_name).collect(),
                }),
            }
        }

        // acyclicity of the operation graph
        let order = match topological_order(&ops) {
            Ok(order) => order,
            Err(cyclic) => {
                v.push(Violation::Cycle {
                    operations: cyclic.iter().map(|&k| ops[k].name.clone()).collect(),
                });
                Vec::new()
            }
        };

        // exclusivity groups
        let kinds: Vec<SystemKind> = structure.systems.iter().map(|s| s.kind).collect();
        let quantum = SysSet::from_indices((0..n).filter(|&i| kinds[i] == SystemKind::Quantum));
        let mut groups = Vec::new();
        let mut group_of: HashMap<usize, usize> = HashMap::new();
        for (g, grp) in structure.exclusivity_groups.iter().enumerate() {
            let mut members = Vec::new();
            for name in &grp.operations {
                match op_names.get(name.as_str()) {
                    Some(&k) => {
                        if !members.contains(&k) {
                            members.push(k);
                        }
                    }
                    None => v.push(Violation::UnknownOperation {
                        name: name.clone(),
                        site: format!("exclusivity group #{}", g + 1),
                    }),
                }
            }
            if members.len() < 2 {
                v.push(Violation::ExclusiveTooSmall { group: g + 1 });
            }
            for (a, &x) in members.iter().enumerate() {
                for &y in &members[a + 1..] {
                    if ops[x].inputs.intersection(ops[y].inputs).intersection(quantum).is_empty() {
                        v.push(Violation::ExclusiveNoSharedQuantumInput {
                            first: ops[x].name.clone(),
                            second: ops[y].name.clone(),
                        });
                    }
                }
                if group_of.insert(x, g).is_some() {
                    v.push(Violation::ExclusiveOverlap { operation: ops[x].name.clone() });
                }
            }
            groups.push(members);
        }

        // no-cloning
        for q in quantum.iter() {
            let consumers: Vec<usize> = (0..ops.len()).filter(|&k| ops[k].inputs.contains(q)).collect();
            if consumers.len() > 1 {
                let same_group = consumers
                    .iter()
                    .map(|k| group_of.get(k))
                    .collect::<HashSet<_>>();
                let ok = same_group.len() == 1 && !same_group.contains(&None);
                if !ok {
                    v.push(Violation::NoCloning {
                        system: structure.systems[q].name.clone(),
                        operations: consumers.iter().map(|&k| ops[k].name.clone()).collect(),
                    });
                }
            }
        }

        if !v.is_empty() {
            return Err(ValidationReport { violations: v });
        }

        let producer: Vec<Producer> = producers.iter().map(|p| p[0]).collect();

        // strict descendants and operation ancestry, in reverse topological order
        let mut descendants = vec![SysSet::EMPTY; n];
        for &k in order.iter().rev() {
            let below = ops[k]
                .outputs
                .iter()
                .fold(ops[k].outputs, |acc, o| acc.union(descendants[o]));
            for s in ops[k].inputs.iter() {
                descendants[s] = descendants[s].union(below);
            }
        }
        let mut through = vec![0u64; n];
        for &k in &order {
            let above = ops[k].inputs.iter().fold(1u64 << k, |acc, s| acc | through[s]);
            for o in ops[k].outputs.iter() {
                through[o] |= above;
            }
        }

        let mut merged = Vec::new();
        for s in 0..n {
            for grp in &groups {
                let hits = grp.iter().filter(|&&k| through[s] >> k & 1 == 1).count();
                if hits > 1 {
                    merged.push(Violation::ExclusiveMerge { system: structure.systems[s].name.clone() });
                }
            }
        }
        if !merged.is_empty() {
            return Err(ValidationReport { violations: merged });
        }

        let mut conflicts = vec![SysSet::EMPTY; n];
        for u in 0..n {
            for w in 0..n {
                if u == w {
                    continue;
                }
                let q_rule = (kinds[u] == SystemKind::Quantum && descendants[u].contains(w))
                    || (kinds[w] == SystemKind::Quantum && descendants[w].contains(u));
                let x_rule = groups.iter().any(|grp| {
                    grp.iter().any(|&a| {
                        through[u] >> a & 1 == 1
                            && grp.iter().any(|&b| b != a && through[w] >> b & 1 == 1)
                    })
                });
                if q_rule || x_rule {
                    conflicts[u] = conflicts[u].with(w);
                }
            }
        }

        let names: Vec<String> = structure.systems.iter().map(|s| s.name.clone()).collect();
        let mut dag = Dag {
            structure: structure.clone(),
            names,
            kinds,
            preps,
            ops,
            producer,
            groups,
            marginal,
            descendants,
            conflicts,
            maximal: Vec::new(),
        };
        dag.maximal = coexist::maximal_cliques(&dag);

        let bad: Vec<Violation> = dag
            .marginal
            .iter()
            .filter(|c| !dag.is_coexisting(**c))
            .map(|c| Violation::NonCoexistingContext { context: dag.set_names(*c) })
            .collect();
        if !bad.is_empty() {
            return Err(ValidationReport { violations: bad });
        }
        Ok(dag)
    }

    pub fn structure(&self) -> &CausalStructure {
        &self.structure
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Resolves a list of names into a set.
    pub fn set_of<S: AsRef<str>>(&self, names: &[S]) -> Option<SysSet> {
        names
            .iter()
            .map(|n| self.index_of(n.as_ref()))
            .collect::<Option<Vec<_>>>()
            .map(SysSet::from_indices)
    }

    pub fn set_names(&self, set: SysSet) -> Vec<String> {
        set.iter().map(|i| self.names[i].clone()).collect()
    }

    pub fn kind(&self, i: usize) -> SystemKind {
        self.kinds[i]
    }

    pub fn kinds(&self) -> &[SystemKind] {
        &self.kinds
    }

    pub fn all(&self) -> SysSet {
        SysSet::full(self.len())
    }

    pub fn classical(&self) -> SysSet {
        SysSet::from_indices((0..self.len()).filter(|&i| self.kinds[i] == SystemKind::Classical))
    }

    pub fn quantum(&self) -> SysSet {
        SysSet::from_indices((0..self.len()).filter(|&i| self.kinds[i] == SystemKind::Quantum))
    }

    pub fn preparations(&self) -> &[SysSet] {
        &self.preps
    }

    pub fn operations(&self) -> &[OpInfo] {
        &self.ops
    }

    pub fn producer(&self, i: usize) -> Producer {
        self.producer[i]
    }

    pub fn exclusivity_groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn marginal_contexts(&self) -> &[SysSet] {
        &self.marginal
    }

    /// Union of the marginal contexts.
    pub fn observed(&self) -> SysSet {
        self.marginal.iter().fold(SysSet::EMPTY, |a, c| a.union(*c))
    }

    /// Strict descendants of system `i`.
    pub fn descendants(&self, i: usize) -> SysSet {
        self.descendants[i]
    }

    pub fn descendants_of(&self, set: SysSet) -> SysSet {
        set.iter().fold(SysSet::EMPTY, |a, i| a.union(self.descendants[i]))
    }

    /// Systems produced by preparations.
    pub fn roots(&self) -> SysSet {
        self.preps.iter().fold(SysSet::EMPTY, |a, p| a.union(*p))
    }

    /// Systems that cannot coexist with system `i`.
    pub fn conflicts(&self, i: usize) -> SysSet {
        self.conflicts[i]
    }

    /// Maximal coexisting sets in canonical order.
    pub fn maximal_sets(&self) -> &[SysSet] {
        &self.maximal
    }

    pub fn is_coexisting(&self, set: SysSet) -> bool {
        set.iter().all(|i| self.conflicts[i].is_disjoint(set))
    }

    /// Every nonempty coexisting subset with a stable dense index.
    pub fn subset_coordinates(&self) -> SubsetIndex {
        SubsetIndex::from_family(self.names.clone(), &self.maximal)
    }

    /// Coordinates of the marginal scenario (union of the power sets of the
    /// contexts).
    pub fn marginal_coordinates(&self) -> SubsetIndex {
        SubsetIndex::from_family(self.names.clone(), &self.marginal)
    }

    /// Formats `{A, B}` using declaration order.
    pub fn format_set(&self, set: SysSet) -> String {
        format!("{{{}}}", self.set_names(set).join(", "))
    }

    /// Merges every preparation whose systems are all classical and
    /// unobserved into a single classical system. The marginal cone is
    /// unchanged by this (any joint hidden variable can be copied into its
    /// parts), while the coordinate count drops exponentially.
    pub fn collapse_hidden_classical(&self) -> Dag {
        let observed = self.observed();
        let mut rename: BTreeMap<usize, String> = BTreeMap::new();
        let mut merged_into: HashMap<String, String> = HashMap::new();
        for p in &self.preps {
            let all_classical = p.iter().all(|i| self.kinds[i] == SystemKind::Classical);
            if p.len() < 2 || !all_classical || !p.is_disjoint(observed) {
                continue;
            }
            let label = format!("lambda_{}", self.set_names(*p).join("_"));
            let first = p.first().expect("nonempty preparation");
            rename.insert(first, label.clone());
            for i in p.iter() {
                merged_into.insert(self.names[i].clone(), label.clone());
            }
        }
        if merged_into.is_empty() {
            return self.clone();
        }
        let map = |n: &String| merged_into.get(n).cloned().unwrap_or_else(|| n.clone());
        let dedup = |list: &[String]| {
            let mut out: Vec<String> = Vec::new();
            for n in list.iter().map(map) {
                if !out.contains(&n) {
                    out.push(n);
                }
            }
            out
        };
        let s = &self.structure;
        let mut systems = Vec::new();
        for (i, sys) in s.systems.iter().enumerate() {
            if let Some(label) = rename.get(&i) {
                systems.push(System { name: label.clone(), kind: SystemKind::Classical });
            } else if !merged_into.contains_key(&sys.name) {
                systems.push(sys.clone());
            }
        }
        let collapsed = CausalStructure {
            systems,
            preparations: s
                .preparations
                .iter()
                .map(|p| Preparation { systems: dedup(&p.systems) })
                .collect(),
            operations: s
                .operations
                .iter()
                .map(|o| Operation {
                    name: o.name.clone(),
                    inputs: dedup(&o.inputs),
                    outputs: o.outputs.clone(),
                })
                .collect(),
            exclusivity_groups: s.exclusivity_groups.clone(),
            marginal: s.marginal.clone(),
        };
        Dag::new(&collapsed).expect("collapsing hidden classical preparations preserves validity")
    }
}

/// Kahn's algorithm over operations. On failure returns the operations left
/// on a cycle.
fn topological_order(ops: &[OpInfo]) -> Result<Vec<usize>, Vec<usize>> {
    let m = ops.len();
    let mut indeg = vec![0usize; m];
    let mut succ = vec![Vec::new(); m];
    for a in 0..m {
        for b in 0..m {
            if !ops[a].outputs.is_disjoint(ops[b].inputs) {
                succ[a].push(b);
                indeg[b] += 1;
            }
        }
    }
    let mut ready: Vec<usize> = (0..m).filter(|&k| indeg[k] == 0).rev().collect();
    let mut order = Vec::with_capacity(m);
    while let Some(k) = ready.pop() {
        order.push(k);
        for &b in &succ[k] {
            indeg[b] -= 1;
            if indeg[b] == 0 {
                ready.push(b);
            }
        }
    }
    if order.len() == m {
        Ok(order)
    } else {
        Err((0..m).filter(|k| !order.contains(k)).collect())
    }
}
