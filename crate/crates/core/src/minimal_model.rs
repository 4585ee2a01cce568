//! Degree-by-degree construction of truncated minimal Sullivan models.
//!
//! For each degree `k = 2..=N` the builder first adds closed generators
//! hitting `coker H^k(φ)` and then generators whose differentials kill
//! `ker H^{k+1}(φ)`. When the target has zero differential every generator
//! carries a weight (0 for closed generators, `1 + weight(dv)` otherwise),
//! `d` lowers weight by one and `φ` vanishes in positive weight, so each
//! cohomology computation splits into independent weight blocks.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;
use thiserror::Error;

use crate::dga::{
    CohomologyReport, DgaError, FiniteDga, FiniteElement, FreeDga, FreeToFinite, cohomology,
    cohomology_from_matrices, induced_map_from_reports,
};
use crate::graded_algebra::{DegreeBasis, Element, FreeGradedAlgebra, Generator, Monomial};
use crate::linalg::{Echelon, SparseMatrix, SparseVector, solve_linear};

pub const DEFAULT_MAX_BASIS_SIZE: u128 = 400_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BuildConfig {
    pub truncation: u32,
    /// Hard cap on the number of monomials in any degree the builder must enumerate.
    pub max_basis_size: u128,
}

impl BuildConfig {
    pub fn new(truncation: u32) -> Self {
        Self {
            truncation,
            max_basis_size: DEFAULT_MAX_BASIS_SIZE,
        }
    }
}

#[derive(Debug, Error)]
pub enum BuildError {
    #[error("truncation degree must be at least 2, got {0}")]
    TruncationTooSmall(u32),
    #[error(transparent)]
    Target(#[from] DgaError),
    #[error(
        "degree {degree} needs {size} monomials, above the cap of {cap}; model is complete through degree {}",
        partial.truncation
    )]
    BudgetExceeded {
        degree: u32,
        size: u128,
        cap: u128,
        partial: Box<MinimalModel>,
    },
    #[error("no primitive in the target for φ(d {generator})")]
    MissingPrimitive { generator: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    /// Closed generator added to hit a cokernel class.
    Cokernel,
    /// Generator whose differential kills a kernel class.
    Kernel,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LedgerEntry {
    pub position: u32,
    pub name: String,
    pub degree: u32,
    pub kind: GeneratorKind,
}

/// Matrices recorded while processing one degree.
#[derive(Debug, Clone)]
pub struct StageRecord {
    pub degree: u32,
    /// `H^k(model) → H^k(target)` before closed generators are added.
    pub cokernel_map: SparseMatrix,
    pub cokernel_count: usize,
    /// `H^{k+1}(model) → H^{k+1}(target)` after closed generators are added.
    pub kernel_map: SparseMatrix,
    pub kernel_count: usize,
}

/// Truncated minimal model `(ΛV, d)` with its quasi-isomorphism to the target.
#[derive(Debug, Clone)]
pub struct MinimalModel {
    dga: FreeDga,
    phi: Vec<FiniteElement>,
    target: FiniteDga,
    truncation: u32,
    ledger: Vec<LedgerEntry>,
    stages: Vec<StageRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RankSequenceError {
    #[error("a rank sequence covers at least degrees 0 and 1, got {0} entries")]
    TooShort(usize),
    #[error("rank in degree {degree} must vanish for a simply connected space, got {rank}")]
    LowDegree { degree: u32, rank: usize },
}

/// `dim Π^k = dim V^k` for `k = 0..=truncation`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RankSequence {
    ranks: Vec<usize>,
    truncation: u32,
    formal_dimension: u32,
}

impl RankSequence {
    /// `ranks[k]` for `k = 0..=truncation`; degrees 0 and 1 must be zero.
    pub fn new(ranks: Vec<usize>, formal_dimension: u32) -> Result<Self, RankSequenceError> {
        if ranks.len() < 2 {
            return Err(RankSequenceError::TooShort(ranks.len()));
        }
        for degree in 0..2 {
            if ranks[degree] != 0 {
                return Err(RankSequenceError::LowDegree {
                    degree: degree as u32,
                    rank: ranks[degree],
                });
            }
        }
        let truncation = (ranks.len() - 1) as u32;
        Ok(Self {
            ranks,
            truncation,
            formal_dimension,
        })
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    /// Zero above the truncation.
    pub fn get(&self, degree: u32) -> usize {
        self.ranks.get(degree as usize).copied().unwrap_or(0)
    }

    pub fn truncation(&self) -> u32 {
        self.truncation
    }

    pub fn formal_dimension(&self) -> u32 {
        self.formal_dimension
    }

    pub fn total(&self) -> usize {
        self.ranks.iter().sum()
    }

    pub fn prefix(&self, truncation: u32) -> RankSequence {
        let n = (truncation as usize + 1).min(self.ranks.len());
        RankSequence {
            ranks: self.ranks[..n].to_vec(),
            truncation: (n - 1) as u32,
            formal_dimension: self.formal_dimension,
        }
    }
}

impl MinimalModel {
    pub fn dga(&self) -> &FreeDga {
        &self.dga
    }

    pub fn algebra(&self) -> &FreeGradedAlgebra {
        self.dga.algebra()
    }

    pub fn target(&self) -> &FiniteDga {
        &self.target
    }

    pub fn phi(&self) -> &[FiniteElement] {
        &self.phi
    }

    pub fn truncation(&self) -> u32 {
        self.truncation
    }

    pub fn ledger(&self) -> &[LedgerEntry] {
        &self.ledger
    }

    pub fn stages(&self) -> &[StageRecord] {
        &self.stages
    }

    pub fn morphism(&self) -> Result<FreeToFinite, crate::dga::MorphismError> {
        FreeToFinite::new(self.dga.clone(), self.target.clone(), self.phi.clone())
    }

    pub fn pi_ranks(&self) -> RankSequence {
        pi_ranks(self)
    }

    /// Copy with `d` of one generator replaced by zero.
    pub fn with_zeroed_differential(&self, position: u32) -> MinimalModel {
        let mut d = self.dga.differential_images().to_vec();
        d[position as usize] = Element::zero();
        let mut out = self.clone();
        out.dga = FreeDga::new(self.dga.algebra().clone(), d, Some(self.truncation))
            .expect("zero differential keeps degrees");
        out
    }

    /// Copy with a fresh closed generator `w` of degree `|v| + 1` and `d(v)` replaced by
    /// `d(v) + w`; `v` must be the last generator so the ordering is preserved.
    pub fn with_linear_term(&self, position: u32) -> Result<MinimalModel, DgaError> {
        let alg = self.dga.algebra();
        let v = alg.generator(position).clone();
        let id = alg.generators().iter().map(|g| g.id).max().unwrap_or(0) + 1;
        let extended = alg.extended(vec![Generator::new(
            id,
            format!("w{}", v.degree + 1),
            v.degree + 1,
        )])?;
        let w_pos = (extended.num_generators() - 1) as u32;
        let mut d = self.dga.differential_images().to_vec();
        d[position as usize] = d[position as usize].add(&extended.generator_element(w_pos))?;
        d.push(Element::zero());
        let mut out = self.clone();
        out.dga = FreeDga::new(extended, d, Some(self.truncation.max(v.degree + 1)))?;
        out.phi.push(FiniteElement::zero(v.degree + 1));
        Ok(out)
    }

    pub fn export(&self) -> ModelExport {
        let alg = self.dga.algebra();
        let generators = self
            .ledger
            .iter()
            .map(|e| GeneratorExport {
                name: e.name.clone(),
                degree: e.degree,
                kind: e.kind,
                differential: alg.format_element(self.dga.differential_of_generator(e.position)),
                phi: self.target.format_element(&self.phi[e.position as usize]),
            })
            .collect();
        ModelExport {
            truncation: self.truncation,
            generators,
        }
    }
}

/// Stable export of a model: generator ledger with differential and `φ` images.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ModelExport {
    pub truncation: u32,
    pub generators: Vec<GeneratorExport>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GeneratorExport {
    pub name: String,
    pub degree: u32,
    pub kind: GeneratorKind,
    pub differential: String,
    pub phi: String,
}

pub fn pi_ranks(model: &MinimalModel) -> RankSequence {
    let mut ranks = vec![0usize; model.truncation as usize + 1];
    for g in model.algebra().generators() {
        if (g.degree as usize) < ranks.len() {
            ranks[g.degree as usize] += 1;
        }
    }
    let formal_dimension = model.target.formal_dimension().unwrap_or(0);
    RankSequence {
        ranks,
        truncation: model.truncation,
        formal_dimension,
    }
}

struct Builder<'a> {
    target: &'a FiniteDga,
    config: BuildConfig,
    dga: FreeDga,
    phi: Vec<FiniteElement>,
    /// Present exactly when the target differential vanishes.
    weights: Option<Vec<u32>>,
    ledger: Vec<LedgerEntry>,
    stages: Vec<StageRecord>,
    target_reports: HashMap<u32, CohomologyReport>,
    completed: u32,
}

struct NewGenerator {
    degree: u32,
    kind: GeneratorKind,
    differential: Element,
    phi: FiniteElement,
    weight: u32,
}

/// Builds the minimal model of `target` through degree `config.truncation`.
pub fn build_minimal_model(
    target: &FiniteDga,
    config: BuildConfig,
) -> Result<MinimalModel, BuildError> {
    if config.truncation < 2 {
        return Err(BuildError::TruncationTooSmall(config.truncation));
    }
    target.validate().into_result()?;
    target.require_simply_connected()?;
    let graded = target.has_zero_differential();
    let mut builder = Builder {
        target,
        config,
        dga: FreeDga::new(
            FreeGradedAlgebra::new(Vec::new()).map_err(DgaError::from)?,
            Vec::new(),
            None,
        )?,
        phi: Vec::new(),
        weights: graded.then(Vec::new),
        ledger: Vec::new(),
        stages: Vec::new(),
        target_reports: HashMap::new(),
        completed: 1,
    };
    for k in 2..=config.truncation {
        builder.stage(k)?;
        builder.completed = k;
    }
    Ok(builder.finish(config.truncation))
}

impl Builder<'_> {
    fn finish(self, truncation: u32) -> MinimalModel {
        MinimalModel {
            dga: self.dga.with_truncation(Some(truncation)),
            phi: self.phi,
            target: self.target.clone(),
            truncation,
            ledger: self.ledger,
            stages: self.stages,
        }
    }

    fn partial(&self) -> MinimalModel {
        let truncation = self.completed.max(1);
        MinimalModel {
            dga: self.dga.clone().with_truncation(Some(truncation)),
            phi: self.phi.clone(),
            target: self.target.clone(),
            truncation,
            ledger: self.ledger.clone(),
            stages: self.stages.clone(),
        }
    }

    fn target_report(&mut self, degree: u32) -> Result<&CohomologyReport, DgaError> {
        if !self.target_reports.contains_key(&degree) {
            let report = cohomology(self.target, degree)?;
            self.target_reports.insert(degree, report);
        }
        Ok(&self.target_reports[&degree])
    }

    fn weight_of(&self, m: &Monomial) -> u32 {
        match &self.weights {
            Some(w) => m.factors().iter().map(|(g, e)| w[*g as usize] * e).sum(),
            None => 0,
        }
    }

    fn basis(&self, degree: u32) -> Result<std::sync::Arc<DegreeBasis>, BuildError> {
        let size = self.dga.algebra().basis_size(degree);
        if size > self.config.max_basis_size {
            return Err(BuildError::BudgetExceeded {
                degree,
                size,
                cap: self.config.max_basis_size,
                partial: Box::new(self.partial()),
            });
        }
        Ok(self.dga.algebra().monomial_basis(degree))
    }

    /// Monomials of `degree` grouped by weight, canonical order inside each block.
    fn blocks(&self, degree: u32) -> Result<BTreeMap<u32, Vec<Monomial>>, BuildError> {
        let mut out: BTreeMap<u32, Vec<Monomial>> = BTreeMap::new();
        for m in self.basis(degree)?.monomials() {
            out.entry(self.weight_of(m)).or_default().push(m.clone());
        }
        Ok(out)
    }

    /// Cohomology of one weight block in `degree`, with the block's monomials.
    fn block_cohomology(
        &self,
        degree: u32,
        weight: u32,
        current: &BTreeMap<u32, Vec<Monomial>>,
        previous: &BTreeMap<u32, Vec<Monomial>>,
        next: &BTreeMap<u32, Vec<Monomial>>,
    ) -> Result<(Vec<Monomial>, CohomologyReport), BuildError> {
        let shift = u32::from(self.weights.is_some());
        let empty = Vec::new();
        let cur = current.get(&weight).unwrap_or(&empty).clone();
        let prev = previous.get(&(weight + shift)).unwrap_or(&empty);
        let nxt = if shift == 1 && weight == 0 {
            &empty
        } else {
            next.get(&(weight - shift)).unwrap_or(&empty)
        };
        let cur_index = DegreeBasis::new(cur.clone());
        let next_index = DegreeBasis::new(nxt.clone());
        let outgoing = self.dga.differential_between(&cur, &next_index)?;
        let incoming = self.dga.differential_between(prev, &cur_index)?;
        let report = cohomology_from_matrices(degree, Some(&incoming), &outgoing);
        Ok((cur, report))
    }

    fn element_of(&self, block: &[Monomial], coords: &SparseVector) -> Element {
        let mut out = Element::zero();
        for (i, c) in coords.iter() {
            out.add_term(block[i].clone(), c.clone());
        }
        out
    }

    fn phi_image(&self, x: &Element) -> FiniteElement {
        let degree = x.degree().unwrap_or(0);
        let mut out = FiniteElement::zero(degree);
        if self.target.dim(degree) == 0 {
            return out;
        }
        for (m, c) in x.terms() {
            let mut img = self.target.unit();
            for &(g, e) in m.factors() {
                for _ in 0..e {
                    img = self.target.multiply(&img, &self.phi[g as usize]);
                }
            }
            out = out.add(&img.scaled(c));
        }
        out
    }

    fn stage(&mut self, k: u32) -> Result<(), BuildError> {
        // (a) closed generators for coker H^k(φ)
        let current = self.blocks(k)?;
        let previous = self.blocks(k - 1)?;
        let next = self.blocks(k + 1)?;
        let (block, report) = self.block_cohomology(k, 0, &current, &previous, &next)?;
        let target_report = self.target_report(k)?.clone();
        let mut image = Echelon::new();
        let mut columns = Vec::new();
        for rep in &report.representatives {
            let img = self.phi_image(&self.element_of(&block, rep));
            let coords = target_report
                .coordinates(&img.coords)
                .ok_or(DgaError::Presentation(format!(
                    "φ image in degree {k} is not closed"
                )))?;
            image.insert(&coords);
            columns.push(coords);
        }
        let cokernel_map =
            SparseMatrix::from_columns(target_report.dimension, columns).map_err(DgaError::from)?;
        let mut closed = Vec::new();
        for class in 0..target_report.dimension {
            if image.insert(&SparseVector::unit(class)).is_some() {
                closed.push(NewGenerator {
                    degree: k,
                    kind: GeneratorKind::Cokernel,
                    differential: Element::zero(),
                    phi: FiniteElement {
                        degree: k,
                        coords: target_report.representatives[class].clone(),
                    },
                    weight: 0,
                });
            }
        }
        let cokernel_count = closed.len();
        self.add_generators(closed)?;

        // (b) generators killing ker H^{k+1}(φ)
        let current = self.blocks(k + 1)?;
        let previous = self.blocks(k)?;
        let next = self.blocks(k + 2)?;
        let target_report = self.target_report(k + 1)?.clone();
        let mut killing = Vec::new();
        let mut kernel_columns = Vec::new();
        let weights: Vec<u32> = current.keys().copied().collect();
        for &w in &weights {
            let (block, report) = self.block_cohomology(k + 1, w, &current, &previous, &next)?;
            let reps: Vec<Element> = report
                .representatives
                .iter()
                .map(|r| self.element_of(&block, r))
                .collect();
            if self.weights.is_some() && w > 0 {
                kernel_columns.extend(reps.iter().map(|_| SparseVector::new()));
                for z in reps {
                    killing.push(NewGenerator {
                        degree: k,
                        kind: GeneratorKind::Kernel,
                        differential: z,
                        phi: FiniteElement::zero(k),
                        weight: w + 1,
                    });
                }
                continue;
            }
            let mut cols = Vec::with_capacity(reps.len());
            for z in &reps {
                let img = self.phi_image(z);
                cols.push(
                    target_report
                        .coordinates(&img.coords)
                        .ok_or(DgaError::Presentation(format!(
                            "φ image in degree {} is not closed",
                            k + 1
                        )))?,
                );
            }
            let map = SparseMatrix::from_columns(target_report.dimension, cols.clone())
                .map_err(DgaError::from)?;
            kernel_columns.extend(cols);
            for c in solve_linear(&map).kernel_basis() {
                let mut z = Element::zero();
                for (i, a) in c.iter() {
                    z = z.add(&reps[i].scaled(a)).map_err(DgaError::from)?;
                }
                let phi = self.primitive(k, &z)?;
                killing.push(NewGenerator {
                    degree: k,
                    kind: GeneratorKind::Kernel,
                    differential: z,
                    phi,
                    weight: w + 1,
                });
            }
        }
        let kernel_map = SparseMatrix::from_columns(target_report.dimension, kernel_columns)
            .map_err(DgaError::from)?;
        let kernel_count = killing.len();
        self.add_generators(killing)?;
        self.stages.push(StageRecord {
            degree: k,
            cokernel_map,
            cokernel_count,
            kernel_map,
            kernel_count,
        });
        Ok(())
    }

    /// `a ∈ A^k` with `d a = φ(z)`.
    fn primitive(&self, k: u32, z: &Element) -> Result<FiniteElement, BuildError> {
        let image = self.phi_image(z);
        if image.is_zero() {
            return Ok(FiniteElement::zero(k));
        }
        let d = crate::dga::CochainComplex::differential_matrix(self.target, k)?;
        match solve_linear(&d)
            .preimage(&image.coords)
            .map_err(DgaError::from)?
        {
            Some(coords) => Ok(FiniteElement { degree: k, coords }),
            None => Err(BuildError::MissingPrimitive {
                generator: self.dga.algebra().format_element(z),
            }),
        }
    }

    fn add_generators(&mut self, new: Vec<NewGenerator>) -> Result<(), BuildError> {
        if new.is_empty() {
            return Ok(());
        }
        let alg = self.dga.algebra();
        let mut next_id = alg.generators().iter().map(|g| g.id + 1).max().unwrap_or(0);
        let mut per_kind: HashMap<(u32, GeneratorKind), usize> = HashMap::new();
        for e in &self.ledger {
            *per_kind.entry((e.degree, e.kind)).or_default() += 1;
        }
        let mut generators = Vec::with_capacity(new.len());
        let mut differential = self.dga.differential_images().to_vec();
        for g in &new {
            let count = per_kind.entry((g.degree, g.kind)).or_default();
            *count += 1;
            let prefix = match g.kind {
                GeneratorKind::Cokernel => 'x',
                GeneratorKind::Kernel => 'y',
            };
            let name = format!("{prefix}{}_{}", g.degree, count);
            self.ledger.push(LedgerEntry {
                position: (alg.num_generators() + generators.len()) as u32,
                name: name.clone(),
                degree: g.degree,
                kind: g.kind,
            });
            generators.push(Generator::new(next_id, name, g.degree));
            next_id += 1;
        }
        let extended = alg.extended(generators).map_err(DgaError::from)?;
        for g in new {
            differential.push(g.differential);
            self.phi.push(g.phi);
            if let Some(w) = self.weights.as_mut() {
                w.push(g.weight);
            }
        }
        self.dga = FreeDga::new(extended, differential, None)?;
        Ok(())
    }
}

/// Which certification check failed, with a concrete witness.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "check", rename_all = "snake_case")]
pub enum CertificationFailure {
    DSquared {
        generator: String,
        value: String,
    },
    Minimality {
        generator: String,
        linear_term: String,
    },
    ChainMap {
        generator: String,
    },
    NotIsomorphism {
        degree: u32,
        source_dim: usize,
        target_dim: usize,
        rank: usize,
        class: String,
    },
}

impl std::fmt::Display for CertificationFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::DSquared { generator, value } => write!(f, "d²({generator}) = {value} ≠ 0"),
            Self::Minimality {
                generator,
                linear_term,
            } => write!(f, "d({generator}) has linear term {linear_term}"),
            Self::ChainMap { generator } => write!(f, "φ(d {generator}) ≠ d φ({generator})"),
            Self::NotIsomorphism {
                degree,
                source_dim,
                target_dim,
                rank,
                class,
            } => write!(
                f,
                "H^{degree}(φ) has rank {rank} between dimensions {source_dim} and {target_dim} (class {class})"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CertificationReport {
    pub truncation: u32,
    pub d_squared: bool,
    pub minimal: bool,
    pub chain_map: bool,
    /// Degrees `0..=truncation` whose induced map was checked to be an isomorphism.
    pub iso_degrees: Vec<u32>,
    /// First failed check; cohomology failures are listed in full in `iso_failures`.
    pub failure: Option<CertificationFailure>,
    /// Every degree at which `H^k(φ)` is not bijective.
    pub iso_failures: Vec<CertificationFailure>,
}

impl CertificationReport {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

/// Independent re-check of `d² = 0`, minimality, the chain-map property and
/// `H^k(φ)` bijective for `k ≤ truncation`, using only the model's data.
pub fn verify_model(
    model: &MinimalModel,
    target: &FiniteDga,
    truncation: u32,
) -> Result<CertificationReport, DgaError> {
    let dga = model.dga();
    let alg = dga.algebra();
    let mut report = CertificationReport {
        truncation,
        d_squared: false,
        minimal: false,
        chain_map: false,
        iso_degrees: Vec::new(),
        failure: None,
        iso_failures: Vec::new(),
    };
    for (pos, g) in alg.generators().iter().enumerate() {
        let dd = dga.apply_d(dga.differential_of_generator(pos as u32));
        if !dd.is_zero() {
            report.failure = Some(CertificationFailure::DSquared {
                generator: g.name.clone(),
                value: alg.format_element(&dd),
            });
            return Ok(report);
        }
    }
    report.d_squared = true;
    for (pos, g) in alg.generators().iter().enumerate() {
        let linear = dga.differential_of_generator(pos as u32).linear_part();
        if let Some((w, c)) = linear.first() {
            let term = Element::from_monomial(
                alg.generator_element(*w)
                    .terms()
                    .next()
                    .map(|(m, _)| m.clone())
                    .unwrap_or_else(Monomial::unit),
                c.clone(),
            );
            report.failure = Some(CertificationFailure::Minimality {
                generator: g.name.clone(),
                linear_term: alg.format_element(&term),
            });
            return Ok(report);
        }
    }
    report.minimal = true;
    let map = FreeToFinite::new(
        dga.clone().with_truncation(Some(truncation)),
        target.clone(),
        model.phi().to_vec(),
    )
    .map_err(|e| DgaError::Presentation(e.to_string()))?;
    if let Err(e) = crate::dga::ChainMap::check_chain_map(&map) {
        let generator = match e {
            crate::dga::MorphismError::NotChainMap(g) => g,
            other => other.to_string(),
        };
        report.failure = Some(CertificationFailure::ChainMap { generator });
        return Ok(report);
    }
    report.chain_map = true;
    let source = crate::dga::ChainMap::source(&map).clone();
    for k in 0..=truncation {
        let h_source = cohomology(&source, k)?;
        let h_target = cohomology(target, k)?;
        let induced = induced_map_from_reports(&map, &h_source, &h_target)
            .map_err(|e| DgaError::Presentation(e.to_string()))?;
        if !induced.is_isomorphism() {
            let class = witness_class(&source, &h_source, target, &h_target, &induced);
            report
                .iso_failures
                .push(CertificationFailure::NotIsomorphism {
                    degree: k,
                    source_dim: induced.source_dim,
                    target_dim: induced.target_dim,
                    rank: induced.rank,
                    class,
                });
        } else {
            report.iso_degrees.push(k);
        }
    }
    report.failure = report.iso_failures.first().cloned();
    Ok(report)
}

fn witness_class(
    source: &FreeDga,
    h_source: &CohomologyReport,
    target: &FiniteDga,
    h_target: &CohomologyReport,
    induced: &crate::dga::InducedMap,
) -> String {
    let solution = solve_linear(&induced.matrix);
    if let Some(&free) = solution.free_columns().first() {
        // a source class mapping to zero
        let c = solution.kernel_vector(free);
        let reps = source.representative_elements(h_source);
        let mut z = Element::zero();
        for (i, a) in c.iter() {
            z = z.add(&reps[i].scaled(a)).unwrap_or_default();
        }
        return source.algebra().format_element(&z);
    }
    let mut image = Echelon::new();
    for col in induced.matrix.columns() {
        image.insert(col);
    }
    for class in 0..h_target.dimension {
        if !image.contains(&SparseVector::unit(class)) {
            let rep = FiniteElement {
                degree: h_target.degree,
                coords: h_target.representatives[class].clone(),
            };
            return target.format_element(&rep);
        }
    }
    String::new()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::{IntersectionForm, four_manifold, projective, sphere};

    fn describe(model: &MinimalModel) -> Vec<(String, u32, String)> {
        let alg = model.algebra();
        alg.generators()
            .iter()
            .enumerate()
            .map(|(p, g)| {
                (
                    g.name.clone(),
                    g.degree,
                    alg.format_element(model.dga().differential_of_generator(p as u32)),
                )
            })
            .collect()
    }

    #[test]
    fn sphere_two_model() {
        let m = build_minimal_model(&sphere(2).unwrap(), BuildConfig::new(10)).unwrap();
        assert_eq!(
            describe(&m),
            vec![
                ("x2_1".to_string(), 2, "0".to_string()),
                ("y3_1".to_string(), 3, "x2_1^2".to_string())
            ]
        );
        assert_eq!(m.pi_ranks().ranks(), &[0, 0, 1, 1, 0, 0, 0, 0, 0, 0, 0]);
        assert!(verify_model(&m, m.target(), 10).unwrap().passed());
    }

    #[test]
    fn cp2_model() {
        let m = build_minimal_model(&projective(2).unwrap(), BuildConfig::new(10)).unwrap();
        assert_eq!(
            describe(&m),
            vec![
                ("x2_1".to_string(), 2, "0".to_string()),
                ("y5_1".to_string(), 5, "x2_1^3".to_string())
            ]
        );
    }

    #[test]
    fn s3_model() {
        let m = build_minimal_model(&sphere(3).unwrap(), BuildConfig::new(10)).unwrap();
        assert_eq!(describe(&m), vec![("x3_1".to_string(), 3, "0".to_string())]);
    }

    #[test]
    fn point_has_no_generators() {
        let point = FiniteDga::builder().element("1", 0).build().unwrap();
        let m = build_minimal_model(&point, BuildConfig::new(6)).unwrap();
        assert_eq!(m.pi_ranks().total(), 0);
    }

    #[test]
    fn three_cp2_low_degrees() {
        let target = four_manifold(&IntersectionForm::diagonal(&[1, 1, 1]).unwrap()).unwrap();
        let m = build_minimal_model(&target, BuildConfig::new(3)).unwrap();
        let r = m.pi_ranks();
        assert_eq!((r.get(2), r.get(3)), (3, 5));
    }

    #[test]
    fn mutations_fail_certification() {
        let m = build_minimal_model(&sphere(2).unwrap(), BuildConfig::new(10)).unwrap();
        let zeroed = m.with_zeroed_differential(1);
        let report = verify_model(&zeroed, zeroed.target(), 10).unwrap();
        assert!(
            matches!(
                report.failure,
                Some(CertificationFailure::NotIsomorphism { degree: 3, .. })
            ),
            "{:?}",
            report.failure
        );
        assert!(
            report.iso_failures.iter().any(|f| matches!(
                f,
                CertificationFailure::NotIsomorphism { degree: 4, class, .. } if class == "x2_1^2"
            )),
            "{:?}",
            report.iso_failures
        );
        let linear = m.with_linear_term(1).unwrap();
        let report = verify_model(&linear, linear.target(), 10).unwrap();
        assert_eq!(
            report.failure,
            Some(CertificationFailure::Minimality {
                generator: "y3_1".into(),
                linear_term: "w4".into()
            })
        );
    }

    #[test]
    fn truncation_and_simple_connectivity_checks() {
        assert!(matches!(
            build_minimal_model(&sphere(2).unwrap(), BuildConfig::new(1)),
            Err(BuildError::TruncationTooSmall(1))
        ));
        let circle = FiniteDga::builder()
            .element("1", 0)
            .element("e", 1)
            .build()
            .unwrap();
        assert!(matches!(
            build_minimal_model(&circle, BuildConfig::new(4)),
            Err(BuildError::Target(DgaError::NotSimplyConnected(_)))
        ));
    }

    #[test]
    fn budget_exceeded_returns_partial_model() {
        let target = four_manifold(&IntersectionForm::diagonal(&[1, 1, 1]).unwrap()).unwrap();
        let config = BuildConfig {
            truncation: 10,
            max_basis_size: 100,
        };
        match build_minimal_model(&target, config) {
            Err(BuildError::BudgetExceeded { partial, cap, .. }) => {
                assert_eq!(cap, 100);
                assert!(partial.truncation() >= 2);
                assert!(
                    verify_model(&partial, &target, partial.truncation())
                        .unwrap()
                        .passed()
                );
            }
            other => panic!("expected budget error, got {other:?}"),
        }
    }
}
