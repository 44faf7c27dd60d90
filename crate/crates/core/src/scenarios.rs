//! Built-in causal structures, named inequalities and witness
//! distributions.

use std::fmt;

use crate::dist::JointDistribution;
use crate::expr::{parse_expression, parse_inequality, Inequality, LinearExpression};
use crate::model::{CausalStructure, SystemKind};
use crate::rational::Rat;

use SystemKind::{Classical, Quantum};

fn triangle_with(kind: SystemKind) -> CausalStructure {
    let mut s = CausalStructure::new();
    for name in ["A1", "A2", "B1", "B2", "C1", "C2"] {
        s = s.system(name, kind);
    }
    for name in ["A", "B", "C"] {
        s = s.system(name, Classical);
    }
    s.prepare(["A1", "B1"])
        .prepare(["A2", "C1"])
        .prepare(["B2", "C2"])
        .op("measA", ["A1", "A2"], ["A"])
        .op("measB", ["B1", "B2"], ["B"])
        .op("measC", ["C1", "C2"], ["C"])
        .marginal(["A", "B", "C"])
}

/// Three bipartite quantum sources `{A1,B1}`, `{A2,C1}`, `{B2,C2}` measured
/// into classical `A`, `B`, `C`; marginal `{A,B,C}`.
pub fn build_triangle() -> CausalStructure {
    triangle_with(Quantum)
}

/// The triangle with classical sources.
pub fn build_triangle_classical() -> CausalStructure {
    triangle_with(Classical)
}

/// Observable contexts of the information causality game.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IcMarginal {
    /// `{X1..Xn, M, Ys}` for each guess `s`. With a quantum message, where
    /// `M` and `Ys` never coexist, `{X1..Xn, Ys}` for each `s` plus
    /// `{X1..Xn, M}`.
    Full,
    /// `{Xs, Ys}` for each `s`, plus `{M}`.
    Restricted,
    /// The restricted contexts plus `{X1..Xn}`, so that correlations between
    /// the inputs stay visible.
    RestrictedWithInputs,
}

fn ic_systems(n: usize, resources: SystemKind, message: SystemKind) -> (CausalStructure, Vec<String>, Vec<String>) {
    let xs: Vec<String> = (1..=n).map(|i| format!("X{i}")).collect();
    let ys: Vec<String> = (1..=n).map(|i| format!("Y{i}")).collect();
    let mut s = CausalStructure::new();
    for x in &xs {
        s = s.system(x.as_str(), Classical);
    }
    s = s.system("A", resources).system("B", resources).system("M", message);
    for y in &ys {
        s = s.system(y.as_str(), Classical);
    }
    let mut enc_in = xs.clone();
    enc_in.push("A".into());
    let s = s.prepare(xs.clone()).prepare(["A", "B"]).op("encode", enc_in, ["M"]);
    (s, xs, ys)
}

fn ic_marginal(
    mut s: CausalStructure,
    xs: &[String],
    ys: &[String],
    message: SystemKind,
    marginal: IcMarginal,
) -> CausalStructure {
    let with = |extra: &[&str]| -> Vec<String> {
        let mut v = xs.to_vec();
        v.extend(extra.iter().map(|e| e.to_string()));
        v
    };
    match marginal {
        IcMarginal::Full if message == Quantum => {
            for y in ys {
                s = s.marginal(with(&[y.as_str()]));
            }
            s.marginal(with(&["M"]))
        }
        IcMarginal::Full => {
            for y in ys {
                s = s.marginal(with(&["M", y.as_str()]));
            }
            s
        }
        IcMarginal::Restricted | IcMarginal::RestrictedWithInputs => {
            for (x, y) in xs.iter().zip(ys) {
                s = s.marginal([x.clone(), y.clone()]);
            }
            s = s.marginal(["M"]);
            if marginal == IcMarginal::RestrictedWithInputs {
                s = s.marginal(xs.to_vec());
            }
            s
        }
    }
}

/// Information causality game with a shared quantum state `{A,B}`: Alice
/// encodes `X1..Xn` and `A` into `M`, Bob decodes `M` and `B` into one of
/// the mutually exclusive guesses `Y1..Yn`.
pub fn build_ic(n: usize, message: SystemKind, marginal: IcMarginal) -> CausalStructure {
    assert!(n >= 2, "the game needs at least two input bits");
    let (mut s, xs, ys) = ic_systems(n, Quantum, message);
    let mut decoders = Vec::new();
    for (k, y) in ys.iter().enumerate() {
        let name = format!("decode{}", k + 1);
        s = s.op(name.as_str(), ["M", "B"], [y.as_str()]);
        decoders.push(name);
    }
    s = s.exclusive(decoders);
    ic_marginal(s, &xs, &ys, message, marginal)
}

/// Information causality game with classical shared randomness `{A,B}` and
/// a single decoder producing all guesses from `M` and `B`.
pub fn build_ic_classical(n: usize, marginal: IcMarginal) -> CausalStructure {
    assert!(n >= 2, "the game needs at least two input bits");
    let (s, xs, ys) = ic_systems(n, Classical, Classical);
    let s = s.op("decode", ["M", "B"], ys.clone());
    ic_marginal(s, &xs, &ys, Classical, marginal)
}

fn network_with(n: usize, m: usize, kind: SystemKind) -> CausalStructure {
    assert!(2 <= m && m <= n, "need 2 <= m <= n");
    let mut subsets: Vec<Vec<usize>> = vec![vec![]];
    for _ in 0..m {
        subsets = subsets
            .into_iter()
            .flat_map(|s| {
                let start = s.last().map_or(1, |l| l + 1);
                (start..=n).map(move |k| {
                    let mut t = s.clone();
                    t.push(k);
                    t
                })
            })
            .collect();
    }
    let label = |sub: &[usize], i: usize| {
        let parts: Vec<String> = sub.iter().map(usize::to_string).collect();
        format!("s{}_v{i}", parts.join("_"))
    };
    let mut s = CausalStructure::new();
    for sub in &subsets {
        for &i in sub {
            s = s.system(label(sub, i), kind);
        }
    }
    for i in 1..=n {
        s = s.system(format!("V{i}"), Classical);
    }
    for sub in &subsets {
        s = s.prepare(sub.iter().map(|&i| label(sub, i)));
    }
    for i in 1..=n {
        let inputs: Vec<String> = subsets.iter().filter(|sub| sub.contains(&i)).map(|sub| label(sub, i)).collect();
        s = s.op(format!("meas{i}"), inputs, [format!("V{i}")]);
    }
    s.marginal((1..=n).map(|i| format!("V{i}")))
}

/// One quantum source per `m`-subset of the `n` observable nodes `V1..Vn`;
/// node `i` measures every subsystem addressed to it. The system sent from
/// the source of subset `I` to node `i` is named `s<I>_v<i>`.
pub fn build_network(n: usize, m: usize) -> CausalStructure {
    network_with(n, m, Quantum)
}

/// The network with classical sources.
pub fn build_network_classical(n: usize, m: usize) -> CausalStructure {
    network_with(n, m, Classical)
}

/// Looks up a built-in structure: `triangle`, `triangle-classical`,
/// `ic<n>` (quantum resources, full marginal), `ic<n>-dense` (quantum
/// message), `ic<n>-classical`, `ic<n>-restricted`,
/// `ic<n>-classical-restricted`, `network-<n>-<m>` and
/// `network-<n>-<m>-classical`.
pub fn builtin(name: &str) -> Option<CausalStructure> {
    match name {
        "triangle" => return Some(build_triangle()),
        "triangle-classical" => return Some(build_triangle_classical()),
        _ => {}
    }
    if let Some(rest) = name.strip_prefix("network-") {
        let (body, classical) = match rest.strip_suffix("-classical") {
            Some(b) => (b, true),
            None => (rest, false),
        };
        let (n, m) = body.split_once('-')?;
        let (n, m): (usize, usize) = (n.parse().ok()?, m.parse().ok()?);
        if !(2 <= m && m <= n && n <= 8) {
            return None;
        }
        return Some(if classical { build_network_classical(n, m) } else { build_network(n, m) });
    }
    let rest = name.strip_prefix("ic")?;
    let digits: String = rest.chars().take_while(char::is_ascii_digit).collect();
    let n: usize = digits.parse().ok()?;
    if !(2..=6).contains(&n) {
        return None;
    }
    Some(match &rest[digits.len()..] {
        "" => build_ic(n, Classical, IcMarginal::Full),
        "-dense" => build_ic(n, Quantum, IcMarginal::Full),
        "-restricted" => build_ic(n, Classical, IcMarginal::Restricted),
        "-classical" => build_ic_classical(n, IcMarginal::Full),
        "-classical-restricted" => build_ic_classical(n, IcMarginal::RestrictedWithInputs),
        _ => return None,
    })
}

/// Inequalities with a fixed name and a home structure in which they expand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NamedInequality {
    /// `I(X1:Y1) + I(X2:Y2) <= H(M)`
    IcOriginal,
    /// `I(X1:Y1) + I(X2:Y2) <= H(M) + I(X1:X2)`
    IcSafi,
    /// `I(X1:Y1,M) + I(X2:Y2,M) + I(X1:X2|Y2,M) <= H(M) + I(X1:X2)`
    IcTight,
    /// `Σ I(Xi:Yi,M) + Σ_{i>=2} I(X1:Xi|Yi,M) <= H(M) + Σ H(Xi) - H(X1..Xn)`
    IcTightN(usize),
    /// `Σ I(Xi:Yi) + Σ_{i>=2} I(X1:Xi|Yi) <= 2 H(M) + Σ H(Xi) - H(X1..Xn)`
    IcDenseN(usize),
    /// `Σ_{i≠j} I(Vi:Vj) <= H(Vj)`
    Monogamy { n: usize, j: usize },
    /// `Σ_{k=2}^{m+1} I(V1:Vk) <= Σ_{k=0}^{m-3} (m-k-1)(m-k-1)!/(m-1)! H(V_{k+1})`
    NetworkBound(usize),
    /// `1`: `I(A:B) + I(A:C) <= H(A)`;
    /// `2`: `I(A:B:C) + I(A:B) + I(A:C) + I(B:C) <= H(A,B)`;
    /// `3`: `I(A:B:C) + I(A:B) + I(A:C) + I(B:C) <= (1/2)(H(A) + H(B) + H(C))`
    Triangle(u8),
}

fn join(items: impl IntoIterator<Item = String>, sep: &str) -> String {
    items.into_iter().collect::<Vec<_>>().join(sep)
}

fn inputs(n: usize) -> String {
    join((1..=n).map(|i| format!("X{i}")), ",")
}

fn ic_n_text(n: usize, with_message: bool, message_weight: &str) -> String {
    let m = if with_message { ",M" } else { "" };
    let lhs = join(
        (1..=n)
            .map(|i| format!("I(X{i}:Y{i}{m})"))
            .chain((2..=n).map(|i| format!("I(X1:X{i}|Y{i}{m})"))),
        " + ",
    );
    let hx = join((1..=n).map(|i| format!("H(X{i})")), " + ");
    format!("{lhs} <= {message_weight}H(M) + {hx} - H({})", inputs(n))
}

fn factorial(k: usize) -> i64 {
    (1..=k as i64).product()
}

/// Both sides of the `G_{m+1,m}` network bound, `lhs <= rhs`.
pub fn network_bound_sides(m: usize) -> (LinearExpression, LinearExpression) {
    let lhs = parse_expression(&join((2..=m + 1).map(|k| format!("I(V1:V{k})")), " + ")).expect("valid");
    let mut rhs = LinearExpression::zero();
    for k in 0..m.saturating_sub(2) {
        let c = Rat::new(((m - k - 1) as i64) * factorial(m - k - 1), factorial(m - 1));
        rhs.add_term([format!("V{}", k + 1)].into_iter().collect(), c);
    }
    (lhs, rhs)
}

impl NamedInequality {
    /// Parses names such as `IC_tight`, `IC_dense_n(3)`, `monogamy(4,1)`,
    /// `network_bound(3)` or `triangle_2`.
    pub fn parse(text: &str) -> Option<NamedInequality> {
        let text = text.trim();
        let args = |prefix: &str| -> Option<Vec<usize>> {
            let inner = text.strip_prefix(prefix)?.strip_prefix('(')?.strip_suffix(')')?;
            inner.split(',').map(|a| a.trim().parse().ok()).collect()
        };
        let named = match text {
            "IC_original" => NamedInequality::IcOriginal,
            "IC_safi" => NamedInequality::IcSafi,
            "IC_tight" => NamedInequality::IcTight,
            "triangle_1" => NamedInequality::Triangle(1),
            "triangle_2" => NamedInequality::Triangle(2),
            "triangle_3" => NamedInequality::Triangle(3),
            _ => {
                if let Some([n]) = args("IC_tight_n").as_deref() {
                    NamedInequality::IcTightN(*n)
                } else if let Some([n]) = args("IC_dense_n").as_deref() {
                    NamedInequality::IcDenseN(*n)
                } else if let Some([n, j]) = args("monogamy").as_deref() {
                    NamedInequality::Monogamy { n: *n, j: *j }
                } else if let Some([m]) = args("network_bound").as_deref() {
                    NamedInequality::NetworkBound(*m)
                } else {
                    return None;
                }
            }
        };
        named.is_well_formed().then_some(named)
    }

    fn is_well_formed(&self) -> bool {
        match *self {
            NamedInequality::IcTightN(n) | NamedInequality::IcDenseN(n) => (2..=6).contains(&n),
            NamedInequality::Monogamy { n, j } => (2..=8).contains(&n) && (1..=n).contains(&j),
            NamedInequality::NetworkBound(m) => (2..=7).contains(&m),
            NamedInequality::Triangle(k) => (1..=3).contains(&k),
            _ => true,
        }
    }

    pub fn inequality(&self) -> Inequality {
        let text = match *self {
            NamedInequality::IcOriginal => "I(X1:Y1) + I(X2:Y2) <= H(M)".to_string(),
            NamedInequality::IcSafi => "I(X1:Y1) + I(X2:Y2) <= H(M) + I(X1:X2)".to_string(),
            NamedInequality::IcTight => {
                "I(X1:Y1,M) + I(X2:Y2,M) + I(X1:X2|Y2,M) <= H(M) + I(X1:X2)".to_string()
            }
            NamedInequality::IcTightN(n) => ic_n_text(n, true, ""),
            NamedInequality::IcDenseN(n) => ic_n_text(n, false, "2 "),
            NamedInequality::Monogamy { n, j } => format!(
                "{} <= H(V{j})",
                join((1..=n).filter(|&i| i != j).map(|i| format!("I(V{i}:V{j})")), " + ")
            ),
            NamedInequality::NetworkBound(m) => {
                let (lhs, rhs) = network_bound_sides(m);
                return Inequality::le(lhs, rhs);
            }
            NamedInequality::Triangle(1) => "I(A:B) + I(A:C) <= H(A)".to_string(),
            NamedInequality::Triangle(2) => "I(A:B:C) + I(A:B) + I(A:C) + I(B:C) <= H(A,B)".to_string(),
            NamedInequality::Triangle(_) => {
                "I(A:B:C) + I(A:B) + I(A:C) + I(B:C) <= (1/2)H(A) + (1/2)H(B) + (1/2)H(C)".to_string()
            }
        };
        parse_inequality(&text).expect("built-in inequality text is well formed")
    }

    /// The structure whose marginal coordinates the inequality is stated on.
    pub fn home(&self) -> CausalStructure {
        match *self {
            NamedInequality::IcOriginal => build_ic(2, Classical, IcMarginal::Restricted),
            NamedInequality::IcSafi => build_ic(2, Classical, IcMarginal::RestrictedWithInputs),
            NamedInequality::IcTight => build_ic(2, Classical, IcMarginal::Full),
            NamedInequality::IcTightN(n) => build_ic(n, Classical, IcMarginal::Full),
            NamedInequality::IcDenseN(n) => build_ic(n, Quantum, IcMarginal::Full),
            NamedInequality::Monogamy { n, .. } => build_network(n, 2),
            NamedInequality::NetworkBound(m) => build_network(m + 1, m),
            NamedInequality::Triangle(_) => build_triangle(),
        }
    }
}

impl fmt::Display for NamedInequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NamedInequality::IcOriginal => f.write_str("IC_original"),
            NamedInequality::IcSafi => f.write_str("IC_safi"),
            NamedInequality::IcTight => f.write_str("IC_tight"),
            NamedInequality::IcTightN(n) => write!(f, "IC_tight_n({n})"),
            NamedInequality::IcDenseN(n) => write!(f, "IC_dense_n({n})"),
            NamedInequality::Monogamy { n, j } => write!(f, "monogamy({n},{j})"),
            NamedInequality::NetworkBound(m) => write!(f, "network_bound({m})"),
            NamedInequality::Triangle(k) => write!(f, "triangle_{k}"),
        }
    }
}

fn abc(cards: [usize; 3]) -> Vec<(String, usize)> {
    ["A", "B", "C"].iter().zip(cards).map(|(n, c)| (n.to_string(), c)).collect()
}

/// Distributions over `A, B, C` whose entropy vectors realize the four
/// extremal ray types of the classical triangle's marginal cone, keyed by
/// type number.
pub fn witness_distributions() -> Vec<(usize, JointDistribution)> {
    let p1 = JointDistribution::uniform_on(abc([2, 2, 2]), &[vec![0, 0, 0], vec![1, 0, 0]]);
    let p2 = JointDistribution::uniform_on(abc([2, 2, 2]), &[vec![0, 0, 0], vec![1, 1, 0]]);
    let even: Vec<Vec<usize>> = (0..8)
        .map(|k| vec![k >> 2, (k >> 1) & 1, k & 1])
        .filter(|x| (x[0] ^ x[1] ^ x[2]) == 0)
        .collect();
    let p3 = JointDistribution::uniform_on(abc([2, 2, 2]), &even);
    // the lowest bit is shared by all three, the remaining bits are independent
    let shared: Vec<Vec<usize>> = (0..4 * 8 * 8)
        .map(|k| vec![k / 64, (k / 8) % 8, k % 8])
        .filter(|x| x[0] % 2 == x[1] % 2 && x[1] % 2 == x[2] % 2)
        .collect();
    let p4 = JointDistribution::uniform_on(abc([4, 8, 8]), &shared);
    [p1, p2, p3, p4]
        .into_iter()
        .enumerate()
        .map(|(k, p)| (k + 1, p.expect("witness tables are normalized")))
        .collect()
}
