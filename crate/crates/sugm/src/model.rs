//! Model specification: subgraph templates, probability rules, placement
//! enumeration, and validation.
//!
//! A spec fixes the node count n and a list of subgraph types. Each type is
//! a small template (local vertex ids with an edge list) plus a rule
//! assigning a probability to every placement of the template on distinct
//! node ids. Set semantics treats a placement as an unordered node set and
//! requires a fully symmetric template (a clique); ordered semantics keeps
//! the node list order and supports asymmetric templates.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::combinatorics::{binomial, falling_factorial};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("type '{name}': {reason}")]
    InvalidTemplate { name: String, reason: String },
    #[error("type '{name}' rule: {reason}")]
    InvalidRule { name: String, reason: String },
    #[error("spec: {0}")]
    InvalidSpec(String),
    #[error("type index {index} out of range ({count} types)")]
    TypeIndexOutOfRange { index: usize, count: usize },
    #[error("placement invalid: {0}")]
    InvalidPlacement(String),
    #[error("placement count overflows u128")]
    CountOverflow,
    #[error("config: {0}")]
    Config(#[from] serde_json::Error),
    #[error("config file: {0}")]
    Io(#[from] std::io::Error),
}

/// How a node list is interpreted when a template is placed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlacementSemantics {
    /// Unordered node set, stored sorted ascending. Requires the template
    /// edge set to be invariant under every relabeling of local ids, which
    /// means a complete (or empty) edge set.
    Set,
    /// Node list order is significant; one placement per ordered list.
    #[serde(alias = "ordered")]
    OrderedList,
}

/// Probability rule for one subgraph type. Parametric rules scale with n;
/// a table rule lists probabilities placement by placement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProbabilityRule {
    /// p = coefficient / n^exponent for every placement.
    Uniform { coefficient: f64, exponent: f64 },
    /// p = within / n^exponent when all nodes share a community,
    /// across / n^exponent otherwise. Communities are contiguous node-id
    /// blocks sized by `split` (fractions summing to one).
    Block { split: Vec<f64>, within: f64, across: f64, exponent: f64 },
    /// p = -coefficient * sum over template edges of ln(d + epsilon), with
    /// d the distance |pos_u - pos_v| between node positions i/(n-1).
    Distance { coefficient: f64, epsilon: f64 },
    /// Explicit probabilities keyed by canonical node list; absent
    /// placements have probability zero.
    Table { entries: Vec<TableEntry> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableEntry {
    pub nodes: Vec<usize>,
    pub p: f64,
}

/// A labelled subgraph template on local vertex ids 0..size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubgraphTemplate {
    pub name: String,
    pub size: usize,
    /// Local edges, normalized to (low, high), sorted, distinct.
    pub edges: Vec<(usize, usize)>,
    pub semantics: PlacementSemantics,
}

impl SubgraphTemplate {
    pub fn new(
        name: impl Into<String>,
        size: usize,
        edges: Vec<(usize, usize)>,
        semantics: PlacementSemantics,
    ) -> Result<Self, ModelError> {
        let name = name.into();
        let invalid = |reason: String| ModelError::InvalidTemplate { name: name.clone(), reason };
        if size < 2 {
            return Err(invalid(format!("size must be at least 2, got {size}")));
        }
        let mut norm: Vec<(usize, usize)> = Vec::with_capacity(edges.len());
        for (a, b) in edges {
            if a == b {
                return Err(invalid(format!("self-loop edge ({a}, {b})")));
            }
            if a >= size || b >= size {
                return Err(invalid(format!("edge ({a}, {b}) outside local ids 0..{size}")));
            }
            norm.push((a.min(b), a.max(b)));
        }
        norm.sort_unstable();
        if norm.windows(2).any(|w| w[0] == w[1]) {
            return Err(invalid("duplicate edge".to_string()));
        }
        if semantics == PlacementSemantics::Set && !permutation_invariant(size, &norm) {
            return Err(invalid(
                "set semantics needs an edge set invariant under relabeling; use ordered placement for asymmetric templates"
                    .to_string(),
            ));
        }
        Ok(SubgraphTemplate { name, size, edges: norm, semantics })
    }

    /// Complete template on `size` vertices with set semantics.
    pub fn clique(name: impl Into<String>, size: usize) -> Result<Self, ModelError> {
        let mut edges = Vec::new();
        for a in 0..size {
            for b in (a + 1)..size {
                edges.push((a, b));
            }
        }
        SubgraphTemplate::new(name, size, edges, PlacementSemantics::Set)
    }
}

/// Invariance under adjacent transpositions, which generate all
/// relabelings of 0..size.
fn permutation_invariant(size: usize, edges: &[(usize, usize)]) -> bool {
    let set: std::collections::BTreeSet<(usize, usize)> = edges.iter().copied().collect();
    for t in 0..size.saturating_sub(1) {
        let swap = |v: usize| {
            if v == t {
                t + 1
            } else if v == t + 1 {
                t
            } else {
                v
            }
        };
        for &(a, b) in edges {
            let (x, y) = (swap(a), swap(b));
            if !set.contains(&(x.min(y), x.max(y))) {
                return false;
            }
        }
    }
    true
}

/// One subgraph type: a template paired with its probability rule.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelType {
    pub template: SubgraphTemplate,
    pub rule: ProbabilityRule,
}

/// A fully validated model at a concrete node count.
#[derive(Debug, Clone, PartialEq)]
pub struct SugmSpec {
    n: usize,
    types: Vec<ModelType>,
}

/// A template instance on concrete node ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Placement {
    pub type_index: usize,
    pub nodes: Vec<usize>,
}

impl SugmSpec {
    pub fn new(n: usize, types: Vec<ModelType>) -> Result<Self, ModelError> {
        if types.is_empty() {
            return Err(ModelError::InvalidSpec("at least one type required".to_string()));
        }
        let mut names = std::collections::BTreeSet::new();
        for t in &types {
            if !names.insert(t.template.name.clone()) {
                return Err(ModelError::InvalidSpec(format!(
                    "duplicate type name '{}'",
                    t.template.name
                )));
            }
            if n < t.template.size {
                return Err(ModelError::InvalidSpec(format!(
                    "n = {n} is smaller than template '{}' of size {}",
                    t.template.name, t.template.size
                )));
            }
            validate_rule(n, t)?;
        }
        Ok(SugmSpec { n, types })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn types(&self) -> &[ModelType] {
        &self.types
    }

    /// Largest template size across types.
    pub fn m_max(&self) -> usize {
        self.types.iter().map(|t| t.template.size).max().unwrap_or(0)
    }

    pub fn type_at(&self, index: usize) -> Result<&ModelType, ModelError> {
        self.types
            .get(index)
            .ok_or(ModelError::TypeIndexOutOfRange { index, count: self.types.len() })
    }
}

fn validate_rule(n: usize, t: &ModelType) -> Result<(), ModelError> {
    let name = t.template.name.clone();
    let bad = |reason: String| ModelError::InvalidRule { name: name.clone(), reason };
    let finite_nonneg = |v: f64, what: &str| {
        if !v.is_finite() || v < 0.0 {
            Err(bad(format!("{what} must be finite and nonnegative, got {v}")))
        } else {
            Ok(())
        }
    };
    match &t.rule {
        ProbabilityRule::Uniform { coefficient, exponent } => {
            finite_nonneg(*coefficient, "coefficient")?;
            finite_nonneg(*exponent, "exponent")?;
        }
        ProbabilityRule::Block { split, within, across, exponent } => {
            finite_nonneg(*within, "within coefficient")?;
            finite_nonneg(*across, "across coefficient")?;
            finite_nonneg(*exponent, "exponent")?;
            if split.is_empty() {
                return Err(bad("split must list at least one community".to_string()));
            }
            if split.iter().any(|&s| !s.is_finite() || s <= 0.0) {
                return Err(bad("split fractions must be positive".to_string()));
            }
            let sum: f64 = split.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(bad(format!("split fractions sum to {sum}, expected 1")));
            }
        }
        ProbabilityRule::Distance { coefficient, epsilon } => {
            finite_nonneg(*coefficient, "coefficient")?;
            if !epsilon.is_finite() || *epsilon <= 0.0 {
                return Err(bad(format!("epsilon must be positive, got {epsilon}")));
            }
        }
        ProbabilityRule::Table { entries } => {
            let m = t.template.size;
            let mut seen = std::collections::BTreeSet::new();
            for e in entries {
                if e.nodes.len() != m {
                    return Err(bad(format!(
                        "table entry {:?} has {} nodes, template size is {m}",
                        e.nodes,
                        e.nodes.len()
                    )));
                }
                if e.nodes.iter().any(|&v| v >= n) {
                    return Err(bad(format!("table entry {:?} outside 0..{n}", e.nodes)));
                }
                let mut sorted = e.nodes.clone();
                sorted.sort_unstable();
                if sorted.windows(2).any(|w| w[0] == w[1]) {
                    return Err(bad(format!("table entry {:?} repeats a node", e.nodes)));
                }
                if t.template.semantics == PlacementSemantics::Set && sorted != e.nodes {
                    return Err(bad(format!(
                        "table entry {:?} not in canonical ascending order",
                        e.nodes
                    )));
                }
                if !seen.insert(e.nodes.clone()) {
                    return Err(bad(format!("duplicate table entry {:?}", e.nodes)));
                }
                if !e.p.is_finite() || !(0.0..=1.0).contains(&e.p) {
                    return Err(bad(format!("table probability {} outside [0, 1]", e.p)));
                }
            }
        }
    }
    Ok(())
}

/// Contiguous community blocks: node i belongs to the community whose
/// cumulative ceil boundary first exceeds i.
#[derive(Debug, Clone)]
pub(crate) struct CommunityLayout {
    /// boundaries[c] = first node id after community c.
    boundaries: Vec<usize>,
}

impl CommunityLayout {
    pub(crate) fn new(split: &[f64], n: usize) -> Self {
        let mut boundaries = Vec::with_capacity(split.len());
        let mut cum = 0.0;
        for (c, &s) in split.iter().enumerate() {
            cum += s;
            let b = if c + 1 == split.len() { n } else { ((cum * n as f64).ceil() as usize).min(n) };
            boundaries.push(b);
        }
        CommunityLayout { boundaries }
    }

    pub(crate) fn community_of(&self, node: usize) -> usize {
        self.boundaries.partition_point(|&b| b <= node)
    }

    pub(crate) fn count(&self) -> usize {
        self.boundaries.len()
    }

    /// (start, length) of community c.
    pub(crate) fn range(&self, c: usize) -> (usize, usize) {
        let start = if c == 0 { 0 } else { self.boundaries[c - 1] };
        (start, self.boundaries[c] - start)
    }
}

/// Precomputed per-type probability evaluation; the hot path behind
/// [`placement_probability`], the sampler, and the expectation engine.
pub(crate) struct TypeEvaluator<'a> {
    pub(crate) model_type: &'a ModelType,
    n: usize,
    communities: Option<CommunityLayout>,
    /// ln(k/(n-1) + epsilon) by node-id distance k.
    ln_dist: Option<Vec<f64>>,
    table: Option<BTreeMap<&'a [usize], f64>>,
}

impl<'a> TypeEvaluator<'a> {
    pub(crate) fn new(spec: &'a SugmSpec, type_index: usize) -> Result<Self, ModelError> {
        let model_type = spec.type_at(type_index)?;
        let n = spec.n();
        let mut communities = None;
        let mut ln_dist = None;
        let mut table = None;
        match &model_type.rule {
            ProbabilityRule::Block { split, .. } => {
                communities = Some(CommunityLayout::new(split, n));
            }
            ProbabilityRule::Distance { epsilon, .. } => {
                let denom = (n - 1).max(1) as f64;
                ln_dist = Some((0..n).map(|k| (k as f64 / denom + epsilon).ln()).collect());
            }
            ProbabilityRule::Table { entries } => {
                table = Some(entries.iter().map(|e| (e.nodes.as_slice(), e.p)).collect());
            }
            ProbabilityRule::Uniform { .. } => {}
        }
        Ok(TypeEvaluator { model_type, n, communities, ln_dist, table })
    }

    /// Probability of a canonical, validated node list. Clamped to [0, 1].
    pub(crate) fn probability(&self, nodes: &[usize]) -> f64 {
        match &self.model_type.rule {
            ProbabilityRule::Uniform { coefficient, exponent } => {
                clamp01(coefficient / (self.n as f64).powf(*exponent))
            }
            ProbabilityRule::Block { within, across, exponent, .. } => {
                let layout = self.communities.as_ref().expect("block layout");
                let c0 = layout.community_of(nodes[0]);
                let same = nodes[1..].iter().all(|&v| layout.community_of(v) == c0);
                let c = if same { *within } else { *across };
                clamp01(c / (self.n as f64).powf(*exponent))
            }
            ProbabilityRule::Distance { coefficient, .. } => {
                let lnd = self.ln_dist.as_ref().expect("distance table");
                let mut sum = 0.0;
                for &(a, b) in &self.model_type.template.edges {
                    let d = nodes[a].abs_diff(nodes[b]);
                    sum += lnd[d];
                }
                clamp01(-coefficient * sum)
            }
            ProbabilityRule::Table { .. } => {
                let table = self.table.as_ref().expect("table index");
                table.get(nodes).copied().unwrap_or(0.0)
            }
        }
    }

    /// A certified upper bound on the probability of any placement of this
    /// type; used by accept-reject sampling.
    pub(crate) fn max_probability_bound(&self) -> f64 {
        match &self.model_type.rule {
            ProbabilityRule::Uniform { coefficient, exponent } => {
                clamp01(coefficient / (self.n as f64).powf(*exponent))
            }
            ProbabilityRule::Block { within, across, exponent, .. } => {
                clamp01(within.max(*across) / (self.n as f64).powf(*exponent))
            }
            ProbabilityRule::Distance { coefficient, .. } => {
                // Each edge term is at most the one at the minimum node
                // distance of 1.
                let lnd = self.ln_dist.as_ref().expect("distance table");
                if self.n < 2 {
                    return 0.0;
                }
                let per_edge = (-coefficient * lnd[1]).max(0.0);
                clamp01(per_edge * self.model_type.template.edges.len() as f64)
            }
            ProbabilityRule::Table { entries } => {
                entries.iter().map(|e| e.p).fold(0.0, f64::max)
            }
        }
    }

    pub(crate) fn communities(&self) -> Option<&CommunityLayout> {
        self.communities.as_ref()
    }
}

fn clamp01(p: f64) -> f64 {
    p.clamp(0.0, 1.0)
}

/// Probability of one placement. Node lists under set semantics may arrive
/// in any order; they are canonicalized before evaluation.
pub fn placement_probability(spec: &SugmSpec, placement: &Placement) -> Result<f64, ModelError> {
    let ev = TypeEvaluator::new(spec, placement.type_index)?;
    let template = &ev.model_type.template;
    let nodes = &placement.nodes;
    if nodes.len() != template.size {
        return Err(ModelError::InvalidPlacement(format!(
            "{} nodes for template '{}' of size {}",
            nodes.len(),
            template.name,
            template.size
        )));
    }
    if nodes.iter().any(|&v| v >= spec.n()) {
        return Err(ModelError::InvalidPlacement(format!("node ids {nodes:?} outside 0..{}", spec.n())));
    }
    let mut sorted = nodes.clone();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(ModelError::InvalidPlacement(format!("repeated node in {nodes:?}")));
    }
    Ok(match template.semantics {
        PlacementSemantics::Set => ev.probability(&sorted),
        PlacementSemantics::OrderedList => ev.probability(nodes),
    })
}

/// Number of placements of one type: C(n, m) under set semantics,
/// n·(n-1)···(n-m+1) under ordered semantics.
pub fn placement_count(spec: &SugmSpec, type_index: usize) -> Result<u128, ModelError> {
    let t = spec.type_at(type_index)?;
    let m = t.template.size;
    let count = match t.template.semantics {
        PlacementSemantics::Set => binomial(spec.n(), m),
        PlacementSemantics::OrderedList => falling_factorial(spec.n(), m),
    };
    count.ok_or(ModelError::CountOverflow)
}

// ---------------------------------------------------------------------------
// Validation report
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FindingStatus {
    Pass,
    Fail,
    Warn,
    NotApplicable,
}

impl fmt::Display for FindingStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FindingStatus::Pass => "pass",
            FindingStatus::Fail => "fail",
            FindingStatus::Warn => "warn",
            FindingStatus::NotApplicable => "n/a",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckKind {
    /// Exponent strictly inside (size-2, size-1).
    ExponentWindow,
    /// Positive coefficient range [low, high] backing the scaling law.
    CoefficientRange,
    /// Fraction of placements with positive probability.
    PositiveFraction,
    /// Minimum, over node pairs, of the positive fraction among placements
    /// containing the pair.
    PositiveFractionPerPair,
    /// Whether any probability was clamped into [0, 1].
    Clamping,
}

impl fmt::Display for CheckKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CheckKind::ExponentWindow => "exponent-window",
            CheckKind::CoefficientRange => "coefficient-range",
            CheckKind::PositiveFraction => "positive-fraction",
            CheckKind::PositiveFractionPerPair => "positive-fraction-per-pair",
            CheckKind::Clamping => "clamping",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone)]
pub struct Finding {
    pub type_name: String,
    pub check: CheckKind,
    pub status: FindingStatus,
    /// Headline number where one applies (exponent, fraction, …).
    pub value: Option<f64>,
    pub detail: String,
}

#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    /// True when no finding failed (warnings allowed).
    pub fn passed(&self) -> bool {
        self.findings.iter().all(|f| f.status != FindingStatus::Fail)
    }

    pub fn for_type<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a Finding> + 'a {
        self.findings.iter().filter(move |f| f.type_name == name)
    }
}

/// Per-type assumption findings: exponent window, coefficient range,
/// positive-probability fractions, and clamping. Pure: equal specs yield
/// identical reports.
pub fn validate_spec(spec: &SugmSpec) -> ValidationReport {
    let mut findings = Vec::new();
    for (index, t) in spec.types().iter().enumerate() {
        let ev = TypeEvaluator::new(spec, index).expect("valid index");
        let name = t.template.name.clone();
        let m = t.template.size as f64;
        let mut push = |check, status, value, detail: String| {
            findings.push(Finding { type_name: name.clone(), check, status, value, detail });
        };
        match &t.rule {
            ProbabilityRule::Uniform { coefficient, exponent } => {
                exponent_finding(&mut push, *exponent, m);
                coefficient_range_finding(&mut push, &[*coefficient]);
                parametric_fraction_finding(&mut push, *coefficient > 0.0, None);
                let raw = coefficient / (spec.n() as f64).powf(*exponent);
                clamp_finding(&mut push, raw, raw);
            }
            ProbabilityRule::Block { within, across, exponent, .. } => {
                exponent_finding(&mut push, *exponent, m);
                coefficient_range_finding(&mut push, &[*within, *across]);
                parametric_fraction_finding(&mut push, *within > 0.0 && *across > 0.0, None);
                let scale = (spec.n() as f64).powf(*exponent);
                clamp_finding(&mut push, within.max(*across) / scale, within.min(*across) / scale);
            }
            ProbabilityRule::Distance { .. } => {
                push(
                    CheckKind::ExponentWindow,
                    FindingStatus::NotApplicable,
                    None,
                    "distance rule has no scaling exponent".to_string(),
                );
                push(
                    CheckKind::CoefficientRange,
                    FindingStatus::NotApplicable,
                    None,
                    "distance rule has no per-placement coefficient form".to_string(),
                );
                // Probe the extreme placements: a consecutive block attains
                // the distance minimum per edge; an even spread attains the
                // maximum. Exact for links and size-3 cliques.
                let msize = t.template.size;
                let near: Vec<usize> = (0..msize).collect();
                let spread: Vec<usize> = (0..msize)
                    .map(|k| k * (spec.n() - 1) / (msize - 1).max(1))
                    .collect();
                let (p_hi, p_lo) = (raw_distance(&ev, &near), raw_distance(&ev, &spread));
                parametric_fraction_finding(&mut push, p_lo.min(p_hi) > 0.0, Some("probed extremes"));
                clamp_finding(&mut push, p_hi.max(p_lo), p_hi.min(p_lo));
            }
            ProbabilityRule::Table { entries } => {
                push(
                    CheckKind::ExponentWindow,
                    FindingStatus::NotApplicable,
                    None,
                    "table rule has no scaling exponent".to_string(),
                );
                push(
                    CheckKind::CoefficientRange,
                    FindingStatus::NotApplicable,
                    None,
                    "table rule has no coefficient form".to_string(),
                );
                table_fraction_findings(&mut push, spec, t, entries);
                push(
                    CheckKind::Clamping,
                    FindingStatus::Pass,
                    None,
                    "table probabilities validated in [0, 1] at construction".to_string(),
                );
            }
        }
    }
    ValidationReport { findings }
}

fn raw_distance(ev: &TypeEvaluator<'_>, nodes: &[usize]) -> f64 {
    let (coefficient, epsilon) = match &ev.model_type.rule {
        ProbabilityRule::Distance { coefficient, epsilon } => (*coefficient, *epsilon),
        _ => unreachable!("distance probe on non-distance rule"),
    };
    let denom = (ev.n - 1).max(1) as f64;
    let mut sum = 0.0;
    for &(a, b) in &ev.model_type.template.edges {
        sum += (nodes[a].abs_diff(nodes[b]) as f64 / denom + epsilon).ln();
    }
    -coefficient * sum
}

fn exponent_finding(push: &mut impl FnMut(CheckKind, FindingStatus, Option<f64>, String), h: f64, m: f64) {
    let ok = h > m - 2.0 && h < m - 1.0;
    let status = if ok { FindingStatus::Pass } else { FindingStatus::Fail };
    push(
        CheckKind::ExponentWindow,
        status,
        Some(h),
        format!("exponent {h} against open window ({}, {})", m - 2.0, m - 1.0),
    );
}

fn coefficient_range_finding(
    push: &mut impl FnMut(CheckKind, FindingStatus, Option<f64>, String),
    coefficients: &[f64],
) {
    let positive: Vec<f64> = coefficients.iter().copied().filter(|&c| c > 0.0).collect();
    if positive.is_empty() {
        push(
            CheckKind::CoefficientRange,
            FindingStatus::Fail,
            None,
            "no positive coefficients".to_string(),
        );
        return;
    }
    let lo = positive.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = positive.iter().copied().fold(0.0_f64, f64::max);
    push(
        CheckKind::CoefficientRange,
        FindingStatus::Pass,
        Some(hi),
        format!("positive coefficient range [{lo}, {hi}]"),
    );
}

fn parametric_fraction_finding(
    push: &mut impl FnMut(CheckKind, FindingStatus, Option<f64>, String),
    everywhere_positive: bool,
    note: Option<&str>,
) {
    if everywhere_positive {
        push(
            CheckKind::PositiveFraction,
            FindingStatus::Pass,
            Some(1.0),
            format!(
                "all placements positive by construction{}",
                note.map(|n| format!(" ({n})")).unwrap_or_default()
            ),
        );
    } else {
        push(
            CheckKind::PositiveFraction,
            FindingStatus::Warn,
            None,
            "parametric rule with zero-probability placements; fraction not computed exactly"
                .to_string(),
        );
    }
    push(
        CheckKind::PositiveFractionPerPair,
        FindingStatus::NotApplicable,
        None,
        "per-pair fractions computed exactly only for table rules".to_string(),
    );
}

fn table_fraction_findings(
    push: &mut impl FnMut(CheckKind, FindingStatus, Option<f64>, String),
    spec: &SugmSpec,
    t: &ModelType,
    entries: &[TableEntry],
) {
    let n = spec.n();
    let m = t.template.size;
    let total = match t.template.semantics {
        PlacementSemantics::Set => binomial(n, m),
        PlacementSemantics::OrderedList => falling_factorial(n, m),
    };
    let per_pair_total = match t.template.semantics {
        PlacementSemantics::Set => binomial(n - 2, m - 2),
        PlacementSemantics::OrderedList => falling_factorial(n - 2, m - 2)
            .and_then(|f| f.checked_mul((m * (m - 1)) as u128)),
    };
    let (Some(total), Some(per_pair_total)) = (total, per_pair_total) else {
        push(
            CheckKind::PositiveFraction,
            FindingStatus::Warn,
            None,
            "placement count overflow; fractions not computed".to_string(),
        );
        return;
    };
    let positive: Vec<&TableEntry> = entries.iter().filter(|e| e.p > 0.0).collect();
    let xi = if total == 0 { 0.0 } else { positive.len() as f64 / total as f64 };
    push(
        CheckKind::PositiveFraction,
        if xi > 0.0 { FindingStatus::Pass } else { FindingStatus::Fail },
        Some(xi),
        format!("{} of {} placements positive", positive.len(), total),
    );
    // Count positive placements containing each unordered node pair.
    let mut pair_counts = vec![0u64; n * n];
    for e in &positive {
        for (ai, &a) in e.nodes.iter().enumerate() {
            for &b in e.nodes.iter().skip(ai + 1) {
                pair_counts[a.min(b) * n + a.max(b)] += 1;
            }
        }
    }
    let mut min_fraction = f64::INFINITY;
    let mut min_pair = (0, 0);
    for i in 0..n {
        for j in (i + 1)..n {
            let f = pair_counts[i * n + j] as f64 / per_pair_total as f64;
            if f < min_fraction {
                min_fraction = f;
                min_pair = (i, j);
            }
        }
    }
    push(
        CheckKind::PositiveFractionPerPair,
        if min_fraction > 0.0 { FindingStatus::Pass } else { FindingStatus::Fail },
        Some(min_fraction),
        format!("minimum positive fraction {min_fraction} at pair {min_pair:?}"),
    );
}

fn clamp_finding(
    push: &mut impl FnMut(CheckKind, FindingStatus, Option<f64>, String),
    raw_max: f64,
    raw_min: f64,
) {
    if raw_max > 1.0 {
        push(
            CheckKind::Clamping,
            FindingStatus::Warn,
            Some(raw_max),
            format!("raw probability {raw_max} clamped down to 1"),
        );
    } else if raw_min < 0.0 {
        push(
            CheckKind::Clamping,
            FindingStatus::Warn,
            Some(raw_min),
            format!("raw probability {raw_min} clamped up to 0"),
        );
    } else {
        push(CheckKind::Clamping, FindingStatus::Pass, None, "no clamping".to_string());
    }
}

// ---------------------------------------------------------------------------
// JSON configuration
// ---------------------------------------------------------------------------

/// Size-free model description, the unit the CLI consumes as JSON. A spec
/// is obtained by fixing n with [`ModelConfig::at_size`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub types: Vec<TypeConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeConfig {
    pub name: String,
    pub size: usize,
    pub edges: Vec<(usize, usize)>,
    pub placement: PlacementSemantics,
    pub rule: ProbabilityRule,
}

impl ModelConfig {
    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialization cannot fail")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ModelError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Builds and validates the spec at node count n.
    pub fn at_size(&self, n: usize) -> Result<SugmSpec, ModelError> {
        let types = self
            .types
            .iter()
            .map(|t| {
                Ok(ModelType {
                    template: SubgraphTemplate::new(
                        t.name.clone(),
                        t.size,
                        t.edges.clone(),
                        t.placement,
                    )?,
                    rule: t.rule.clone(),
                })
            })
            .collect::<Result<Vec<_>, ModelError>>()?;
        SugmSpec::new(n, types)
    }

    /// Links and triangles, each with a uniform rule c / n^h.
    pub fn uniform_links_triangles(link: (f64, f64), triangle: (f64, f64)) -> Self {
        ModelConfig {
            types: vec![
                TypeConfig {
                    name: "link".to_string(),
                    size: 2,
                    edges: vec![(0, 1)],
                    placement: PlacementSemantics::Set,
                    rule: ProbabilityRule::Uniform { coefficient: link.0, exponent: link.1 },
                },
                TypeConfig {
                    name: "triangle".to_string(),
                    size: 3,
                    edges: vec![(0, 1), (0, 2), (1, 2)],
                    placement: PlacementSemantics::Set,
                    rule: ProbabilityRule::Uniform { coefficient: triangle.0, exponent: triangle.1 },
                },
            ],
        }
    }

    /// Two contiguous communities with within/across coefficients for links
    /// and triangles.
    #[allow(clippy::too_many_arguments)]
    pub fn two_block_links_triangles(
        split0: f64,
        link_within: f64,
        link_across: f64,
        link_exponent: f64,
        tri_within: f64,
        tri_across: f64,
        tri_exponent: f64,
    ) -> Self {
        let split = vec![split0, 1.0 - split0];
        ModelConfig {
            types: vec![
                TypeConfig {
                    name: "link".to_string(),
                    size: 2,
                    edges: vec![(0, 1)],
                    placement: PlacementSemantics::Set,
                    rule: ProbabilityRule::Block {
                        split: split.clone(),
                        within: link_within,
                        across: link_across,
                        exponent: link_exponent,
                    },
                },
                TypeConfig {
                    name: "triangle".to_string(),
                    size: 3,
                    edges: vec![(0, 1), (0, 2), (1, 2)],
                    placement: PlacementSemantics::Set,
                    rule: ProbabilityRule::Block {
                        split,
                        within: tri_within,
                        across: tri_across,
                        exponent: tri_exponent,
                    },
                },
            ],
        }
    }

    /// Geographic model: probabilities decay with the log distances between
    /// node positions i/(n-1).
    pub fn distance_links_triangles(c_link: f64, c_triangle: f64, epsilon: f64) -> Self {
        ModelConfig {
            types: vec![
                TypeConfig {
                    name: "link".to_string(),
                    size: 2,
                    edges: vec![(0, 1)],
                    placement: PlacementSemantics::Set,
                    rule: ProbabilityRule::Distance { coefficient: c_link, epsilon },
                },
                TypeConfig {
                    name: "triangle".to_string(),
                    size: 3,
                    edges: vec![(0, 1), (0, 2), (1, 2)],
                    placement: PlacementSemantics::Set,
                    rule: ProbabilityRule::Distance { coefficient: c_triangle, epsilon },
                },
            ],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn uniform_link_spec(n: usize, coefficient: f64, exponent: f64) -> SugmSpec {
        ModelConfig {
            types: vec![TypeConfig {
                name: "link".to_string(),
                size: 2,
                edges: vec![(0, 1)],
                placement: PlacementSemantics::Set,
                rule: ProbabilityRule::Uniform { coefficient, exponent },
            }],
        }
        .at_size(n)
        .unwrap()
    }

    #[test]
    fn uniform_probability_frozen_value() {
        let spec = uniform_link_spec(100, 5.0, 0.65);
        let p = placement_probability(&spec, &Placement { type_index: 0, nodes: vec![3, 17] })
            .unwrap();
        assert!((p - 0.250593616813636).abs() < 1e-12, "p = {p}");
    }

    #[test]
    fn distance_probability_frozen_value() {
        let config = ModelConfig {
            types: vec![TypeConfig {
                name: "link".to_string(),
                size: 2,
                edges: vec![(0, 1)],
                placement: PlacementSemantics::Set,
                rule: ProbabilityRule::Distance { coefficient: 0.03, epsilon: 1e-4 },
            }],
        };
        let spec = config.at_size(11).unwrap();
        let p = placement_probability(&spec, &Placement { type_index: 0, nodes: vec![0, 1] })
            .unwrap();
        assert!((p - 0.069047567779829).abs() < 1e-12, "p = {p}");
    }

    #[test]
    fn zero_coefficient_gives_zero_probability() {
        let spec = uniform_link_spec(10, 0.0, 0.5);
        let p = placement_probability(&spec, &Placement { type_index: 0, nodes: vec![0, 1] })
            .unwrap();
        assert_eq!(p, 0.0);
    }

    #[test]
    fn oversized_uniform_probability_clamps_to_one() {
        let spec = uniform_link_spec(2, 5.0, 0.65);
        let p = placement_probability(&spec, &Placement { type_index: 0, nodes: vec![0, 1] })
            .unwrap();
        assert_eq!(p, 1.0);
        let report = validate_spec(&spec);
        let clamp = report
            .for_type("link")
            .find(|f| f.check == CheckKind::Clamping)
            .unwrap();
        assert_eq!(clamp.status, FindingStatus::Warn);
    }

    #[test]
    fn distance_far_pair_clamps_to_zero() {
        let config = ModelConfig::distance_links_triangles(0.03, 5e-5, 1e-4);
        let spec = config.at_size(11).unwrap();
        // Distance 1.0: ln(1 + eps) > 0 makes the raw value negative.
        let p = placement_probability(&spec, &Placement { type_index: 0, nodes: vec![0, 10] })
            .unwrap();
        assert_eq!(p, 0.0);
        let report = validate_spec(&spec);
        let clamp = report
            .for_type("link")
            .find(|f| f.check == CheckKind::Clamping)
            .unwrap();
        assert_eq!(clamp.status, FindingStatus::Warn, "{}", clamp.detail);
    }

    #[test]
    fn placement_count_examples() {
        let mut config = ModelConfig {
            types: vec![TypeConfig {
                name: "triangle".to_string(),
                size: 3,
                edges: vec![(0, 1), (0, 2), (1, 2)],
                placement: PlacementSemantics::Set,
                rule: ProbabilityRule::Uniform { coefficient: 1.0, exponent: 1.4 },
            }],
        };
        let spec = config.at_size(4).unwrap();
        assert_eq!(placement_count(&spec, 0).unwrap(), 4);

        config.types[0].placement = PlacementSemantics::OrderedList;
        let spec = config.at_size(4).unwrap();
        assert_eq!(placement_count(&spec, 0).unwrap(), 24);

        let spec = uniform_link_spec(2, 1.0, 0.0);
        assert_eq!(placement_count(&spec, 0).unwrap(), 1);
    }

    #[test]
    fn set_semantics_rejects_asymmetric_template() {
        let err = SubgraphTemplate::new("path", 3, vec![(0, 1), (1, 2)], PlacementSemantics::Set);
        assert!(matches!(err, Err(ModelError::InvalidTemplate { .. })), "{err:?}");
        SubgraphTemplate::new("path", 3, vec![(0, 1), (1, 2)], PlacementSemantics::OrderedList)
            .expect("ordered path template is fine");
        SubgraphTemplate::clique("triangle", 3).expect("clique is symmetric");
    }

    #[test]
    fn template_rejects_malformed_edges() {
        assert!(SubgraphTemplate::new("t", 2, vec![(0, 0)], PlacementSemantics::Set).is_err());
        assert!(SubgraphTemplate::new("t", 2, vec![(0, 2)], PlacementSemantics::Set).is_err());
        assert!(
            SubgraphTemplate::new("t", 2, vec![(0, 1), (1, 0)], PlacementSemantics::Set).is_err(),
            "duplicate edge under normalization"
        );
        assert!(SubgraphTemplate::new("t", 1, vec![], PlacementSemantics::Set).is_err());
    }

    #[test]
    fn spec_rejects_duplicate_names_and_small_n() {
        let config = ModelConfig::uniform_links_triangles((5.0, 0.65), (1.0, 1.4));
        assert!(config.at_size(2).is_err(), "n below triangle size");
        let mut dup = config.clone();
        dup.types[1].name = "link".to_string();
        assert!(dup.at_size(10).is_err(), "duplicate names");
    }

    #[test]
    fn table_rule_lookup_and_default_zero() {
        let config = ModelConfig {
            types: vec![TypeConfig {
                name: "tri".to_string(),
                size: 3,
                edges: vec![(0, 1), (0, 2), (1, 2)],
                placement: PlacementSemantics::Set,
                rule: ProbabilityRule::Table {
                    entries: vec![
                        TableEntry { nodes: vec![0, 1, 2], p: 0.8 },
                        TableEntry { nodes: vec![0, 1, 3], p: 0.25 },
                    ],
                },
            }],
        };
        let spec = config.at_size(4).unwrap();
        let p = |nodes: Vec<usize>| {
            placement_probability(&spec, &Placement { type_index: 0, nodes }).unwrap()
        };
        assert_eq!(p(vec![0, 1, 2]), 0.8);
        assert_eq!(p(vec![2, 1, 0]), 0.8, "set canonicalization before lookup");
        assert_eq!(p(vec![0, 2, 3]), 0.0, "absent entry defaults to zero");
    }

    #[test]
    fn table_rule_rejects_bad_entries() {
        let base = |entries| ModelConfig {
            types: vec![TypeConfig {
                name: "tri".to_string(),
                size: 3,
                edges: vec![(0, 1), (0, 2), (1, 2)],
                placement: PlacementSemantics::Set,
                rule: ProbabilityRule::Table { entries },
            }],
        };
        assert!(base(vec![TableEntry { nodes: vec![2, 1, 0], p: 0.5 }]).at_size(4).is_err());
        assert!(base(vec![TableEntry { nodes: vec![0, 1], p: 0.5 }]).at_size(4).is_err());
        assert!(base(vec![TableEntry { nodes: vec![0, 1, 2], p: 1.5 }]).at_size(4).is_err());
        assert!(base(vec![TableEntry { nodes: vec![0, 1, 9], p: 0.5 }]).at_size(4).is_err());
    }

    #[test]
    fn community_layout_seventy_thirty() {
        let layout = CommunityLayout::new(&[0.7, 0.3], 10);
        assert_eq!(layout.range(0), (0, 7));
        assert_eq!(layout.range(1), (7, 3));
        assert_eq!(layout.community_of(6), 0);
        assert_eq!(layout.community_of(7), 1);
    }

    #[test]
    fn validation_exponent_window() {
        let spec = uniform_link_spec(100, 5.0, 0.65);
        let report = validate_spec(&spec);
        let f = report
            .for_type("link")
            .find(|f| f.check == CheckKind::ExponentWindow)
            .unwrap();
        assert_eq!(f.status, FindingStatus::Pass);

        let config = ModelConfig {
            types: vec![TypeConfig {
                name: "triangle".to_string(),
                size: 3,
                edges: vec![(0, 1), (0, 2), (1, 2)],
                placement: PlacementSemantics::Set,
                rule: ProbabilityRule::Uniform { coefficient: 1.0, exponent: 2.5 },
            }],
        };
        let report = validate_spec(&config.at_size(10).unwrap());
        let f = report
            .for_type("triangle")
            .find(|f| f.check == CheckKind::ExponentWindow)
            .unwrap();
        assert_eq!(f.status, FindingStatus::Fail, "2.5 is outside (1, 2)");
    }

    #[test]
    fn validation_full_support_table_reports_unit_fraction() {
        let config = ModelConfig {
            types: vec![TypeConfig {
                name: "tri".to_string(),
                size: 3,
                edges: vec![(0, 1), (0, 2), (1, 2)],
                placement: PlacementSemantics::Set,
                rule: ProbabilityRule::Table {
                    entries: vec![
                        TableEntry { nodes: vec![0, 1, 2], p: 0.1 },
                        TableEntry { nodes: vec![0, 1, 3], p: 0.2 },
                        TableEntry { nodes: vec![0, 2, 3], p: 0.3 },
                        TableEntry { nodes: vec![1, 2, 3], p: 0.4 },
                    ],
                },
            }],
        };
        let report = validate_spec(&config.at_size(4).unwrap());
        let overall = report
            .for_type("tri")
            .find(|f| f.check == CheckKind::PositiveFraction)
            .unwrap();
        assert_eq!(overall.status, FindingStatus::Pass);
        assert_eq!(overall.value, Some(1.0));
        let per_pair = report
            .for_type("tri")
            .find(|f| f.check == CheckKind::PositiveFractionPerPair)
            .unwrap();
        assert_eq!(per_pair.value, Some(1.0));
    }

    #[test]
    fn config_json_round_trip_and_documented_shape() {
        let text = r#"{"types":[{"name":"link","size":2,"edges":[[0,1]],"placement":"set","rule":{"kind":"uniform","coefficient":5.0,"exponent":0.65}}]}"#;
        let config = ModelConfig::from_json(text).unwrap();
        assert_eq!(config.types.len(), 1);
        assert_eq!(config.types[0].placement, PlacementSemantics::Set);
        let back = ModelConfig::from_json(&config.to_json()).unwrap();
        assert_eq!(config, back);

        let preset = ModelConfig::distance_links_triangles(3e-2, 5e-5, 1e-4);
        let back = ModelConfig::from_json(&preset.to_json()).unwrap();
        assert_eq!(preset, back);
    }

    #[test]
    fn validation_is_pure() {
        let spec = ModelConfig::uniform_links_triangles((5.0, 0.65), (1.0, 1.4))
            .at_size(50)
            .unwrap();
        let a = validate_spec(&spec);
        let b = validate_spec(&spec);
        assert_eq!(a.findings.len(), b.findings.len());
        for (x, y) in a.findings.iter().zip(&b.findings) {
            assert_eq!(x.status, y.status);
            assert_eq!(x.detail, y.detail);
        }
    }

    proptest! {
        #[test]
        fn probability_always_in_unit_interval(
            coefficient in 0.0_f64..50.0,
            exponent in 0.0_f64..3.0,
            n in 3_usize..40,
            a in 0_usize..40,
            b in 0_usize..40,
        ) {
            prop_assume!(a < n && b < n && a != b);
            let spec = uniform_link_spec(n, coefficient, exponent);
            let p = placement_probability(
                &spec,
                &Placement { type_index: 0, nodes: vec![a, b] },
            ).unwrap();
            prop_assert!((0.0..=1.0).contains(&p));
        }

        #[test]
        fn set_probability_invariant_under_input_order(
            perm_seed in 0_usize..6,
            nodes in proptest::collection::btree_set(0_usize..12, 3),
        ) {
            let config = ModelConfig::distance_links_triangles(0.05, 0.01, 1e-3);
            let spec = config.at_size(12).unwrap();
            let sorted: Vec<usize> = nodes.into_iter().collect();
            let mut permuted = sorted.clone();
            // One of the six orderings of three nodes.
            let (i, j) = [(0, 1), (0, 2), (1, 2), (0, 0), (0, 0), (0, 0)][perm_seed % 6];
            permuted.swap(i, j);
            if perm_seed >= 3 {
                permuted.rotate_left(1);
            }
            let p0 = placement_probability(
                &spec,
                &Placement { type_index: 1, nodes: sorted },
            ).unwrap();
            let p1 = placement_probability(
                &spec,
                &Placement { type_index: 1, nodes: permuted },
            ).unwrap();
            prop_assert_eq!(p0, p1);
        }

        #[test]
        fn block_with_equal_coefficients_matches_uniform(
            c in 0.0_f64..10.0,
            h in 0.0_f64..2.0,
            n in 4_usize..30,
            pair in proptest::collection::btree_set(0_usize..30, 2),
        ) {
            let nodes: Vec<usize> = pair.into_iter().collect();
            prop_assume!(nodes.iter().all(|&v| v < n));
            let block = ModelConfig {
                types: vec![TypeConfig {
                    name: "link".to_string(),
                    size: 2,
                    edges: vec![(0, 1)],
                    placement: PlacementSemantics::Set,
                    rule: ProbabilityRule::Block {
                        split: vec![0.7, 0.3],
                        within: c,
                        across: c,
                        exponent: h,
                    },
                }],
            }.at_size(n).unwrap();
            let uniform = uniform_link_spec(n, c, h);
            let pb = placement_probability(
                &block,
                &Placement { type_index: 0, nodes: nodes.clone() },
            ).unwrap();
            let pu = placement_probability(
                &uniform,
                &Placement { type_index: 0, nodes },
            ).unwrap();
            prop_assert_eq!(pb, pu);
        }
    }
}
