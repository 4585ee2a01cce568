//! Rank constraints from long exact sequences of dual homotopy groups.
//!
//! A fibration `F → E → B` gives an exact sequence
//! `… → Π^k(B) → Π^k(E) → Π^k(F) → Π^{k+1}(B) → …`. Exactness at a node of
//! dimension `d` says `rank(incoming) + rank(outgoing) = d`, so the sequence
//! becomes a chain of linear equations in nonnegative integer map ranks.
//! [`solve_chain`] propagates intervals along the chain to a fixed point and
//! certifies every reported endpoint with an explicit rank assignment.
//!
//! On top of the solver, [`isotropy_lower_bounds`] bounds the homotopy of the
//! isotropy group of a transitive action from below, with evaluation images
//! limited by a Gottlieb budget, and [`blowup_scenario`] chains those bounds
//! through the embedding-space comparison for a symplectic 4-manifold.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dichotomy::{CatBound, CatSource};
use crate::minimal_model::RankSequence;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LesError {
    #[error("malformed instance: {0}")]
    Malformed(String),
    #[error("infeasible: {0}")]
    Infeasible(InfeasibilityReport),
    #[error("could not certify {0}")]
    Uncertified(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScenarioError {
    #[error("the scenario needs a 4-manifold, got formal dimension {0}")]
    NotFourManifold(u32),
    #[error("the scenario needs b₂ > 2 (b₂ ≥ 3 forces rational hyperbolicity), got b₂ = {0}")]
    SecondBettiTooSmall(usize),
    #[error("truncation {0} is too small; at least 3 is needed")]
    TruncationTooSmall(u32),
}

/// A dimension that is either given or to be solved for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Known(usize),
    /// Written as `null`.
    Unknown,
}

impl Entry {
    pub fn known(&self) -> Option<usize> {
        match self {
            Entry::Known(d) => Some(*d),
            Entry::Unknown => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Space {
    B,
    E,
    F,
}

/// Maps of the sequence, indexed by the degree of their source.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapKind {
    /// `Π^k(B) → Π^k(E)`
    BToE,
    /// `Π^k(E) → Π^k(F)`
    EToF,
    /// `Π^k(F) → Π^{k+1}(B)`
    FToB,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapRef {
    pub degree: u32,
    pub map: MapKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankCap {
    pub degree: u32,
    pub map: MapKind,
    pub max: usize,
}

fn default_true() -> bool {
    true
}

/// Dimension rows for `B`, `E`, `F` in degrees `1..=N` (row index `k - 1`),
/// plus constraints on map ranks.
///
/// `closed_below` asserts nothing maps into `Π^1(B)`; `closed_above` asserts
/// `Π^N(F) → Π^{N+1}(B)` vanishes. By default the sequence starts at degree 1
/// and continues past `N`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LesInstance {
    #[serde(rename = "B")]
    pub dims_b: Vec<Entry>,
    #[serde(rename = "E")]
    pub dims_e: Vec<Entry>,
    #[serde(rename = "F")]
    pub dims_f: Vec<Entry>,
    #[serde(default)]
    pub zero_maps: Vec<MapRef>,
    #[serde(default)]
    pub rank_caps: Vec<RankCap>,
    #[serde(default = "default_true")]
    pub closed_below: bool,
    #[serde(default)]
    pub closed_above: bool,
}

impl LesInstance {
    /// All entries unknown through degree `n`, no annotations.
    pub fn unknown(n: usize) -> Self {
        Self {
            dims_b: vec![Entry::Unknown; n],
            dims_e: vec![Entry::Unknown; n],
            dims_f: vec![Entry::Unknown; n],
            zero_maps: Vec::new(),
            rank_caps: Vec::new(),
            closed_below: true,
            closed_above: false,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, LesError> {
        serde_json::from_str(text).map_err(|e| LesError::Malformed(e.to_string()))
    }

    pub fn max_degree(&self) -> u32 {
        self.dims_b.len() as u32
    }

    fn validate(&self) -> Result<(), LesError> {
        let n = self.dims_b.len();
        if self.dims_e.len() != n || self.dims_f.len() != n {
            return Err(LesError::Malformed(format!(
                "dimension rows differ in length: B {}, E {}, F {}",
                n,
                self.dims_e.len(),
                self.dims_f.len()
            )));
        }
        if n == 0 {
            return Err(LesError::Malformed("empty degree range".into()));
        }
        let refs = self
            .zero_maps
            .iter()
            .copied()
            .chain(self.rank_caps.iter().map(|c| MapRef {
                degree: c.degree,
                map: c.map,
            }));
        for r in refs {
            let top = if r.map == MapKind::FToB { n - 1 } else { n };
            if r.degree == 0 || r.degree as usize > top {
                return Err(LesError::Malformed(format!(
                    "map {} lies outside degrees 1..={n}",
                    map_label(r)
                )));
            }
        }
        Ok(())
    }

    /// Node index of `space` in `degree` on the chain `B^1, E^1, F^1, B^2, …`.
    fn node(space: Space, degree: u32) -> usize {
        let offset = match space {
            Space::B => 0,
            Space::E => 1,
            Space::F => 2,
        };
        3 * (degree as usize - 1) + offset
    }

    /// Chain map index of `map`: map `j` goes from node `j - 1` to node `j`.
    fn map_index(map: MapRef) -> usize {
        let source = match map.map {
            MapKind::BToE => Space::B,
            MapKind::EToF => Space::E,
            MapKind::FToB => Space::F,
        };
        Self::node(source, map.degree) + 1
    }

    pub fn to_chain(&self) -> Result<ExactChain, LesError> {
        self.validate()?;
        let mut nodes = Vec::with_capacity(3 * self.dims_b.len());
        for k in 0..self.dims_b.len() {
            let degree = k as u32 + 1;
            for (space, row) in [
                (Space::B, &self.dims_b),
                (Space::E, &self.dims_e),
                (Space::F, &self.dims_f),
            ] {
                nodes.push(ChainNode {
                    label: node_label(space, degree),
                    dim: row[k],
                    position: Some((space, degree)),
                });
            }
        }
        let mut chain = ExactChain::new(nodes, self.closed_below, self.closed_above);
        for z in &self.zero_maps {
            chain.cap_map(Self::map_index(*z), 0);
        }
        for c in &self.rank_caps {
            chain.cap_map(
                Self::map_index(MapRef {
                    degree: c.degree,
                    map: c.map,
                }),
                c.max,
            );
        }
        Ok(chain)
    }
}

fn node_label(space: Space, degree: u32) -> String {
    let s = match space {
        Space::B => "B",
        Space::E => "E",
        Space::F => "F",
    };
    format!("{s}^{degree}")
}

fn map_label(r: MapRef) -> String {
    let k = r.degree;
    match r.map {
        MapKind::BToE => format!("B^{k} → E^{k}"),
        MapKind::EToF => format!("E^{k} → F^{k}"),
        MapKind::FToB => format!("F^{k} → B^{}", k + 1),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChainNode {
    pub label: String,
    pub dim: Entry,
    /// Space and degree when the chain comes from an [`LesInstance`].
    pub position: Option<(Space, u32)>,
}

impl ChainNode {
    pub fn new(label: impl Into<String>, dim: Entry) -> Self {
        Self {
            label: label.into(),
            dim,
            position: None,
        }
    }
}

/// Exact sequence `→ n_0 → n_1 → … → n_{m-1} →` with map `j` from node
/// `j - 1` to node `j`; maps `0` and `m` are the ends.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactChain {
    nodes: Vec<ChainNode>,
    caps: Vec<Option<usize>>,
}

impl ExactChain {
    pub fn new(nodes: Vec<ChainNode>, closed_below: bool, closed_above: bool) -> Self {
        let mut caps = vec![None; nodes.len() + 1];
        if closed_below {
            caps[0] = Some(0);
        }
        if closed_above {
            caps[nodes.len()] = Some(0);
        }
        Self { nodes, caps }
    }

    pub fn nodes(&self) -> &[ChainNode] {
        &self.nodes
    }

    pub fn num_maps(&self) -> usize {
        self.caps.len()
    }

    /// Caps the rank of map `index`; repeated caps keep the smallest.
    pub fn cap_map(&mut self, index: usize, max: usize) {
        let cap = &mut self.caps[index];
        *cap = Some(cap.map_or(max, |c| c.min(max)));
    }

    pub fn map_label(&self, index: usize) -> String {
        let m = self.nodes.len();
        match index {
            0 => format!("· → {}", self.nodes[0].label),
            j if j == m => format!("{} → ·", self.nodes[m - 1].label),
            j => format!("{} → {}", self.nodes[j - 1].label, self.nodes[j].label),
        }
    }

    fn initial_domains(&self) -> Domains {
        Domains {
            dims: self
                .nodes
                .iter()
                .map(|n| match n.dim {
                    Entry::Known(d) => Interval::exact(d),
                    Entry::Unknown => Interval::unbounded(),
                })
                .collect(),
            ranks: self
                .caps
                .iter()
                .map(|c| Interval { lo: 0, hi: *c })
                .collect(),
        }
    }
}

/// Integer interval `[lo, hi]`, `hi = None` meaning unbounded above.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Interval {
    pub lo: usize,
    pub hi: Option<usize>,
}

impl Interval {
    pub fn exact(v: usize) -> Self {
        Self { lo: v, hi: Some(v) }
    }

    pub fn unbounded() -> Self {
        Self { lo: 0, hi: None }
    }

    pub fn is_empty(&self) -> bool {
        self.hi.is_some_and(|h| h < self.lo)
    }

    pub fn contains(&self, v: usize) -> bool {
        v >= self.lo && self.hi.is_none_or(|h| v <= h)
    }

    fn is_fixed(&self) -> bool {
        self.hi == Some(self.lo)
    }

    fn raise_lo(&mut self, lo: usize) -> bool {
        if lo > self.lo {
            self.lo = lo;
            true
        } else {
            false
        }
    }

    fn lower_hi(&mut self, hi: usize) -> bool {
        if self.hi.is_none_or(|h| hi < h) {
            self.hi = Some(hi);
            true
        } else {
            false
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.hi {
            Some(h) => write!(f, "[{}, {}]", self.lo, h),
            None => write!(f, "[{}, ∞)", self.lo),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Domains {
    dims: Vec<Interval>,
    ranks: Vec<Interval>,
}

/// Node `i` satisfies `dims[i] = ranks[i] + ranks[i+1]`. Tightens all
/// intervals to a fixed point; on contradiction returns the offending node.
fn propagate(domains: &mut Domains) -> Result<(), usize> {
    loop {
        let mut changed = false;
        for i in 0..domains.dims.len() {
            let (a, b) = (domains.ranks[i], domains.ranks[i + 1]);
            let d = &mut domains.dims[i];
            changed |= d.raise_lo(a.lo + b.lo);
            if let (Some(x), Some(y)) = (a.hi, b.hi) {
                changed |= d.lower_hi(x + y);
            }
            let d = *d;
            for (target, other) in [(i, b), (i + 1, a)] {
                let r = &mut domains.ranks[target];
                if let Some(oh) = other.hi {
                    changed |= r.raise_lo(d.lo.saturating_sub(oh));
                }
                if let Some(dh) = d.hi {
                    if dh < other.lo {
                        return Err(i);
                    }
                    changed |= r.lower_hi(dh - other.lo);
                }
            }
            if domains.dims[i].is_empty()
                || domains.ranks[i].is_empty()
                || domains.ranks[i + 1].is_empty()
            {
                return Err(i);
            }
        }
        if !changed {
            return Ok(());
        }
    }
}

/// Concrete dimensions and map ranks satisfying every equation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Assignment {
    pub dims: Vec<usize>,
    pub ranks: Vec<usize>,
}

impl Assignment {
    /// Checks exactness, known dimensions and caps.
    pub fn satisfies(&self, chain: &ExactChain) -> bool {
        self.dims.len() == chain.nodes.len()
            && self.ranks.len() == chain.caps.len()
            && chain.nodes.iter().enumerate().all(|(i, n)| {
                n.dim.known().is_none_or(|d| d == self.dims[i])
                    && self.dims[i] == self.ranks[i] + self.ranks[i + 1]
            })
            && chain
                .caps
                .iter()
                .zip(&self.ranks)
                .all(|(c, r)| c.is_none_or(|c| *r <= c))
    }
}

/// Fixes variables one at a time at their lower ends, re-propagating after each.
fn find_witness(domains: &Domains) -> Option<Assignment> {
    let mut d = domains.clone();
    propagate(&mut d).ok()?;
    loop {
        let next = d
            .ranks
            .iter()
            .position(|r| !r.is_fixed())
            .map(|j| (true, j))
            .or_else(|| {
                d.dims
                    .iter()
                    .position(|r| !r.is_fixed())
                    .map(|i| (false, i))
            });
        let Some((is_rank, idx)) = next else { break };
        let slot = if is_rank {
            &mut d.ranks[idx]
        } else {
            &mut d.dims[idx]
        };
        slot.hi = Some(slot.lo);
        propagate(&mut d).ok()?;
    }
    Some(Assignment {
        dims: d.dims.iter().map(|i| i.lo).collect(),
        ranks: d.ranks.iter().map(|i| i.lo).collect(),
    })
}

/// Smallest window of consecutive nodes whose own equations are contradictory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InfeasibilityReport {
    pub nodes: Vec<String>,
    pub constraints: Vec<String>,
}

impl fmt::Display for InfeasibilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "constraints on {} cannot hold together: {}",
            self.nodes.join(", "),
            self.constraints.join("; ")
        )
    }
}

fn infeasibility_report(chain: &ExactChain) -> InfeasibilityReport {
    let full = chain.initial_domains();
    let m = chain.nodes.len();
    for len in 1..=m {
        for start in 0..=(m - len) {
            let end = start + len;
            let mut ranks = full.ranks[start..=end].to_vec();
            if start > 0 {
                ranks[0] = Interval {
                    lo: 0,
                    hi: chain.caps[start],
                };
            }
            let mut window = Domains {
                dims: full.dims[start..end].to_vec(),
                ranks,
            };
            if propagate(&mut window).is_err() {
                return window_report(chain, start, end);
            }
        }
    }
    window_report(chain, 0, m)
}

fn window_report(chain: &ExactChain, start: usize, end: usize) -> InfeasibilityReport {
    let mut constraints = Vec::new();
    for i in start..end {
        let node = &chain.nodes[i];
        let dim = match node.dim {
            Entry::Known(d) => d.to_string(),
            Entry::Unknown => format!("dim {}", node.label),
        };
        constraints.push(format!(
            "{dim} = rank({}) + rank({})",
            chain.map_label(i),
            chain.map_label(i + 1)
        ));
    }
    for j in start..=end {
        if let Some(c) = chain.caps[j] {
            constraints.push(format!("rank({}) ≤ {c}", chain.map_label(j)));
        }
    }
    InfeasibilityReport {
        nodes: chain.nodes[start..end]
            .iter()
            .map(|n| n.label.clone())
            .collect(),
        constraints,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NodeSolution {
    pub label: String,
    pub position: Option<(Space, u32)>,
    pub known: bool,
    pub interval: Interval,
    pub unbounded: bool,
    /// Assignment attaining the lower end.
    pub lower_witness: Assignment,
    /// Assignment attaining the upper end, if finite.
    pub upper_witness: Option<Assignment>,
    /// Values just outside the interval were checked to be infeasible.
    pub tight: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MapSolution {
    pub label: String,
    pub interval: Interval,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LesSolution {
    pub nodes: Vec<NodeSolution>,
    pub maps: Vec<MapSolution>,
    /// Some unknown dimension has no finite upper bound.
    pub has_unbounded: bool,
}

impl LesSolution {
    pub fn node(&self, label: &str) -> Option<&NodeSolution> {
        self.nodes.iter().find(|n| n.label == label)
    }

    pub fn entry(&self, space: Space, degree: u32) -> Option<&NodeSolution> {
        self.nodes
            .iter()
            .find(|n| n.position == Some((space, degree)))
    }
}

/// Tightest intervals for every dimension and map rank, each endpoint certified.
pub fn solve_chain(chain: &ExactChain) -> Result<LesSolution, LesError> {
    if chain.nodes.is_empty() {
        return Err(LesError::Malformed("empty sequence".into()));
    }
    let mut domains = chain.initial_domains();
    if propagate(&mut domains).is_err() {
        return Err(LesError::Infeasible(infeasibility_report(chain)));
    }
    let mut nodes = Vec::with_capacity(chain.nodes.len());
    for (i, node) in chain.nodes.iter().enumerate() {
        let interval = domains.dims[i];
        let pinned = |value: usize| {
            let mut d = domains.clone();
            d.dims[i] = Interval::exact(value);
            find_witness(&d).filter(|w| w.satisfies(chain))
        };
        let lower_witness = pinned(interval.lo)
            .ok_or_else(|| LesError::Uncertified(format!("lower end of {}", node.label)))?;
        let upper_witness = match interval.hi {
            Some(h) => Some(
                pinned(h)
                    .ok_or_else(|| LesError::Uncertified(format!("upper end of {}", node.label)))?,
            ),
            None => None,
        };
        let excluded = |iv: Interval| {
            let mut d = domains.clone();
            d.dims[i] = iv;
            propagate(&mut d).is_err()
        };
        let below_ok = interval.lo == 0
            || excluded(Interval {
                lo: 0,
                hi: Some(interval.lo - 1),
            });
        let above_ok = interval.hi.is_none_or(|h| {
            excluded(Interval {
                lo: h + 1,
                hi: None,
            })
        });
        nodes.push(NodeSolution {
            label: node.label.clone(),
            position: node.position,
            known: node.dim.known().is_some(),
            interval,
            unbounded: interval.hi.is_none(),
            lower_witness,
            upper_witness,
            tight: below_ok && above_ok,
        });
    }
    let maps = domains
        .ranks
        .iter()
        .enumerate()
        .map(|(j, iv)| MapSolution {
            label: chain.map_label(j),
            interval: *iv,
        })
        .collect();
    Ok(LesSolution {
        has_unbounded: nodes.iter().any(|n| n.unbounded),
        nodes,
        maps,
    })
}

pub fn solve_les(instance: &LesInstance) -> Result<LesSolution, LesError> {
    solve_chain(&instance.to_chain()?)
}

/// Total evaluation-image dimension available across odd degrees; even degrees get nothing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GottliebBudget {
    pub total: usize,
    pub source: Option<CatSource>,
}

impl GottliebBudget {
    pub fn from_cat(cat: CatBound) -> Self {
        Self {
            total: cat.value,
            source: Some(cat.source),
        }
    }

    pub fn zero() -> Self {
        Self {
            total: 0,
            source: None,
        }
    }

    /// Greedy allocation: odd degrees in increasing order take `min(rank, remaining)`.
    pub fn allocate(&self, ranks: &RankSequence) -> Vec<usize> {
        let mut remaining = self.total;
        (0..=ranks.truncation())
            .map(|k| {
                if k % 2 == 0 {
                    return 0;
                }
                let a = ranks.get(k).min(remaining);
                remaining -= a;
                a
            })
            .collect()
    }
}

/// Lower bounds on `dim Π^k` of the isotropy group in degree `k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DegreeBound {
    pub degree: u32,
    /// `dim Π^{k+1}` of the homogeneous space.
    pub next_rank: usize,
    /// Evaluation-image dimension allocated to degree `k + 1`.
    pub allowance: usize,
    /// `next_rank - allowance`, forced by exactness under the allocation.
    pub bound: usize,
    /// Valid under every allocation within the budget.
    pub uniform_bound: usize,
    /// `dim Π^k` of the homogeneous space, the same-degree reading.
    pub unshifted: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoundReport {
    pub truncation: u32,
    pub budget: GottliebBudget,
    /// Allocation per degree `0..=N`.
    pub allocation: Vec<usize>,
    /// One entry per `k = 1..N`.
    pub bounds: Vec<DegreeBound>,
    pub total_shaving: usize,
    /// For `k ≥ k0` the allocation is spent and `bound(k) = dim Π^{k+1}`.
    pub k0: u32,
    /// The bounds agree with the sequence solver's lower ends.
    pub certified: bool,
}

impl BoundReport {
    pub fn bound(&self, degree: u32) -> Option<&DegreeBound> {
        self.bounds.iter().find(|b| b.degree == degree)
    }
}

/// Lower bounds from `Π^k(G_pt) → Π^{k+1}(X) → Π^{k+1}(G)` for the evaluation
/// fibration of a transitive action, with evaluation images within the budget.
pub fn isotropy_lower_bounds(ranks: &RankSequence, budget: GottliebBudget) -> BoundReport {
    let n = ranks.truncation();
    let allocation = budget.allocate(ranks);
    let bounds: Vec<DegreeBound> = (1..n)
        .map(|k| {
            let next = ranks.get(k + 1);
            let allowance = allocation[(k + 1) as usize];
            let uniform = if (k + 1) % 2 == 0 {
                next
            } else {
                next - next.min(budget.total)
            };
            DegreeBound {
                degree: k,
                next_rank: next,
                allowance,
                bound: next - allowance,
                uniform_bound: uniform,
                unshifted: ranks.get(k),
            }
        })
        .collect();
    let k0 = allocation
        .iter()
        .rposition(|&a| a > 0)
        .map_or(1, |d| d as u32);
    let certified = certify_bounds(ranks, &allocation, &bounds);
    BoundReport {
        truncation: n,
        budget,
        total_shaving: allocation.iter().sum(),
        allocation,
        bounds,
        k0,
        certified,
    }
}

/// Re-derives the bounds as lower ends of the sequence solver's intervals.
fn certify_bounds(ranks: &RankSequence, allocation: &[usize], bounds: &[DegreeBound]) -> bool {
    let n = ranks.truncation() as usize;
    if n == 0 {
        return bounds.is_empty();
    }
    let mut instance = LesInstance::unknown(n);
    for k in 1..=n {
        instance.dims_b[k - 1] = Entry::Known(ranks.get(k as u32));
        instance.rank_caps.push(RankCap {
            degree: k as u32,
            map: MapKind::BToE,
            max: allocation[k],
        });
    }
    match solve_les(&instance) {
        Ok(solution) => bounds.iter().all(|b| {
            solution
                .entry(Space::F, b.degree)
                .is_some_and(|s| s.interval.lo == b.bound)
        }),
        Err(_) => false,
    }
}

/// Degrees where the structure group of the ball bundle has rational homotopy.
pub const STRUCTURE_GROUP_DEGREES: [u32; 2] = [1, 3];

/// Whether the embedding space surjects onto `π_k(M) ⊗ Q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Surjectivity {
    /// The pulled-back ball bundle is rationally trivial.
    Surjective,
    /// The bundle may be nontrivial, but no map `S^4 → M` has nonzero degree.
    SurjectiveByDegree,
    /// Depends on the first Chern class; excluded from the bounds.
    ChernDependent,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScenarioBound {
    pub degree: u32,
    /// `None` where the transfer through the embedding space is excluded.
    pub bound: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BlowupReport {
    pub truncation: u32,
    pub b2: usize,
    /// Ranks of the structure group in degrees `1..=N`.
    pub structure_group: Vec<usize>,
    /// Surjectivity in degrees `2..=N`.
    pub surjectivity: Vec<(u32, Surjectivity)>,
    /// Bounds for the isotropy group of a point.
    pub isotropy: BoundReport,
    /// Bounds for the subgroup acting linearly on the ball, `k = 1..N`.
    pub bounds: Vec<ScenarioBound>,
    /// Running totals of `bounds`.
    pub cumulative: Vec<usize>,
    /// Every `k ≥ k0` with `dim Π^{k+1}(M) > 0` has a positive bound.
    pub positive_beyond_k0: bool,
}

/// Rank-level version of the blow-up argument for a 4-manifold with `b₂ > 2`.
pub fn blowup_scenario(ranks: &RankSequence, cat: CatBound) -> Result<BlowupReport, ScenarioError> {
    if ranks.formal_dimension() != 4 {
        return Err(ScenarioError::NotFourManifold(ranks.formal_dimension()));
    }
    let b2 = ranks.get(2);
    if b2 <= 2 {
        return Err(ScenarioError::SecondBettiTooSmall(b2));
    }
    let n = ranks.truncation();
    if n < 3 {
        return Err(ScenarioError::TruncationTooSmall(n));
    }
    let structure_group: Vec<usize> = (1..=n)
        .map(|d| usize::from(STRUCTURE_GROUP_DEGREES.contains(&d)))
        .collect();
    let surjectivity: Vec<(u32, Surjectivity)> = (2..=n)
        .map(|d| {
            let twisted = STRUCTURE_GROUP_DEGREES.contains(&(d - 1));
            let flag = match (twisted, d) {
                (false, _) => Surjectivity::Surjective,
                (true, 4) => Surjectivity::SurjectiveByDegree,
                (true, _) => Surjectivity::ChernDependent,
            };
            (d, flag)
        })
        .collect();
    let isotropy = isotropy_lower_bounds(ranks, GottliebBudget::from_cat(cat));
    let bounds: Vec<ScenarioBound> = isotropy
        .bounds
        .iter()
        .map(|b| {
            let excluded = surjectivity
                .iter()
                .any(|(d, s)| *d == b.degree + 1 && *s == Surjectivity::ChernDependent);
            ScenarioBound {
                degree: b.degree,
                bound: (!excluded).then_some(b.bound),
            }
        })
        .collect();
    let cumulative = bounds
        .iter()
        .scan(0usize, |acc, b| {
            *acc += b.bound.unwrap_or(0);
            Some(*acc)
        })
        .collect();
    let positive_beyond_k0 = bounds.iter().all(|b| {
        b.degree < isotropy.k0 || ranks.get(b.degree + 1) == 0 || b.bound.is_some_and(|v| v > 0)
    });
    Ok(BlowupReport {
        truncation: n,
        b2,
        structure_group,
        surjectivity,
        isotropy,
        bounds,
        cumulative,
        positive_beyond_k0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn short_exact(a: Entry, b: Entry, c: Entry) -> ExactChain {
        ExactChain::new(
            vec![
                ChainNode::new("A", a),
                ChainNode::new("B", b),
                ChainNode::new("C", c),
            ],
            true,
            true,
        )
    }

    #[test]
    fn short_exact_sequence() {
        let chain = short_exact(Entry::Known(1), Entry::Known(3), Entry::Unknown);
        let s = solve_chain(&chain).unwrap();
        let c = s.node("C").unwrap();
        assert_eq!(c.interval, Interval::exact(2));
        assert!(c.tight);
        assert!(c.lower_witness.satisfies(&chain));
    }

    #[test]
    fn flanking_zero_spaces_force_isomorphism() {
        // B^k → E^k → F^k → B^{k+1} → E^{k+1} with E = 0 on both sides
        let chain = ExactChain::new(
            vec![
                ChainNode::new("B", Entry::Known(5)),
                ChainNode::new("E", Entry::Known(0)),
                ChainNode::new("F", Entry::Unknown),
                ChainNode::new("B'", Entry::Known(8)),
                ChainNode::new("E'", Entry::Known(0)),
            ],
            false,
            false,
        );
        let s = solve_chain(&chain).unwrap();
        assert_eq!(s.node("F").unwrap().interval, Interval::exact(8));
    }

    #[test]
    fn all_unknown_is_unbounded() {
        let s = solve_les(&LesInstance::unknown(4)).unwrap();
        assert!(s.has_unbounded);
        assert!(s.nodes.iter().all(|n| n.interval == Interval::unbounded()));
    }

    #[test]
    fn infeasible_reports_window() {
        let chain = short_exact(Entry::Known(3), Entry::Known(1), Entry::Unknown);
        match solve_chain(&chain) {
            Err(LesError::Infeasible(report)) => {
                assert_eq!(report.nodes, vec!["A".to_string(), "B".to_string()]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn zero_map_annotation() {
        let mut inst = LesInstance::unknown(2);
        inst.dims_b = vec![Entry::Known(0), Entry::Known(4)];
        inst.zero_maps.push(MapRef {
            degree: 2,
            map: MapKind::BToE,
        });
        let s = solve_les(&inst).unwrap();
        assert_eq!(s.entry(Space::F, 1).unwrap().interval.lo, 4);
        assert!(s.entry(Space::F, 1).unwrap().unbounded);
    }

    #[test]
    fn instance_document_round_trip() {
        let text = r#"{"B": [0, 5], "E": [null, 0], "F": [null, null],
                       "zero_maps": [{"degree": 1, "map": "e_to_f"}]}"#;
        let inst = LesInstance::from_json(text).unwrap();
        assert_eq!(inst.dims_b, vec![Entry::Known(0), Entry::Known(5)]);
        assert_eq!(inst.dims_e[0], Entry::Unknown);
        assert!(inst.closed_below && !inst.closed_above);
        let again: LesInstance =
            serde_json::from_str(&serde_json::to_string(&inst).unwrap()).unwrap();
        assert_eq!(again, inst);
        let bad =
            r#"{"B": [0], "E": [0], "F": [0], "zero_maps": [{"degree": 1, "map": "f_to_b"}]}"#;
        assert!(matches!(
            solve_les(&LesInstance::from_json(bad).unwrap()),
            Err(LesError::Malformed(_))
        ));
    }

    fn three_cp2() -> RankSequence {
        RankSequence::new(vec![0, 0, 3, 5, 5, 10, 24, 55, 120], 4).unwrap()
    }

    #[test]
    fn isotropy_bounds_for_hyperbolic_ranks() {
        let r = three_cp2();
        let report = isotropy_lower_bounds(&r, GottliebBudget::from_cat(CatBound::default_for(4)));
        assert!(report.certified);
        assert_eq!(report.total_shaving, 2);
        assert_eq!(report.k0, 3);
        assert_eq!(report.bound(2).unwrap().bound, 3);
        assert_eq!(report.bound(2).unwrap().uniform_bound, 3);
        assert_eq!(report.bound(1).unwrap().bound, 3);
        for b in &report.bounds {
            if (b.degree + 1) % 2 == 0 {
                assert_eq!(b.bound, b.next_rank);
            }
            if b.degree >= report.k0 {
                assert_eq!(b.bound, b.next_rank);
            }
        }
    }

    #[test]
    fn zero_budget_is_shift() {
        let r = three_cp2();
        let report = isotropy_lower_bounds(&r, GottliebBudget::zero());
        let shifted: Vec<usize> = (1..8).map(|k| r.get(k + 1)).collect();
        assert_eq!(
            report.bounds.iter().map(|b| b.bound).collect::<Vec<_>>(),
            shifted
        );
        assert!(report.certified);
    }

    #[test]
    fn sphere_bounds_vanish() {
        let r = RankSequence::new(vec![0, 0, 1, 1, 0, 0, 0, 0], 2).unwrap();
        let report =
            isotropy_lower_bounds(&r, GottliebBudget::from_cat(CatBound::user(1).unwrap()));
        assert!(
            report
                .bounds
                .iter()
                .filter(|b| b.degree >= 3)
                .all(|b| b.bound == 0)
        );
    }

    #[test]
    fn blowup_on_three_cp2() {
        let report = blowup_scenario(&three_cp2(), CatBound::default_for(4)).unwrap();
        assert_eq!(report.structure_group, vec![1, 0, 1, 0, 0, 0, 0, 0]);
        assert_eq!(report.surjectivity[0], (2, Surjectivity::ChernDependent));
        assert_eq!(
            report.surjectivity[2],
            (4, Surjectivity::SurjectiveByDegree)
        );
        assert_eq!(report.bounds[0].bound, None);
        assert!(report.positive_beyond_k0);
    }

    #[test]
    fn blowup_rejects_small_b2() {
        let s2xs2 = RankSequence::new(vec![0, 0, 2, 2, 0, 0, 0, 0, 0], 4).unwrap();
        let err = blowup_scenario(&s2xs2, CatBound::default_for(4)).unwrap_err();
        assert_eq!(err, ScenarioError::SecondBettiTooSmall(2));
        assert!(err.to_string().contains("b₂ > 2"));
    }
}
