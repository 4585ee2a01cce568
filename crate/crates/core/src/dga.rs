//! Differential graded algebras: free ones `(ΛV, d)` and finite-dimensional
//! targets given by structure constants, with degreewise cohomology and
//! induced maps.

use std::collections::{BTreeMap, HashMap};

use num_traits::One;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graded_algebra::{
    AlgebraError, DegreeBasis, Element, FreeGradedAlgebra, Monomial, format_terms, parse_terms,
    sign,
};
use crate::linalg::{
    Echelon, LinalgError, LinearSolution, SparseMatrix, SparseVector, solve_linear,
};
use crate::rational::{Rational, int};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DgaError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("invalid dga: {0}")]
    Invalid(DgaViolation),
    #[error("degree {degree} is above the truncation degree {truncation}")]
    AboveTruncation { degree: u32, truncation: u32 },
    #[error("not simply connected: {0}")]
    NotSimplyConnected(String),
    #[error("malformed algebra presentation: {0}")]
    Presentation(String),
}

/// First-class description of a broken axiom, naming the offending generator or basis elements.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DgaViolation {
    DifferentialDegree {
        element: String,
        expected: u32,
        found: u32,
    },
    SquareNonzero {
        element: String,
        value: String,
    },
    NotTriangular {
        generator: String,
        value: String,
    },
    Leibniz {
        left: String,
        right: String,
    },
    ProductDegree {
        left: String,
        right: String,
    },
    NotCommutative {
        left: String,
        right: String,
    },
    NotAssociative {
        a: String,
        b: String,
        c: String,
    },
    Unit(String),
}

impl std::fmt::Display for DgaViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::DifferentialDegree {
                element,
                expected,
                found,
            } => write!(f, "d({element}) has degree {found}, expected {expected}"),
            Self::SquareNonzero { element, value } => write!(f, "d(d({element})) = {value} ≠ 0"),
            Self::NotTriangular { generator, value } => {
                write!(
                    f,
                    "d({generator}) = {value} uses a generator not preceding {generator}"
                )
            }
            Self::Leibniz { left, right } => write!(f, "Leibniz rule fails on ({left}, {right})"),
            Self::ProductDegree { left, right } => {
                write!(f, "product {left}·{right} has the wrong degree")
            }
            Self::NotCommutative { left, right } => {
                write!(f, "graded commutativity fails on ({left}, {right})")
            }
            Self::NotAssociative { a, b, c } => write!(f, "associativity fails on ({a}, {b}, {c})"),
            Self::Unit(msg) => write!(f, "{msg}"),
        }
    }
}

/// Outcome of [`validate_free`] / [`FiniteDga::validate`]: every violation found, in check order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub checks: usize,
    pub violations: Vec<DgaViolation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn first_violation(&self) -> Option<&DgaViolation> {
        self.violations.first()
    }

    pub fn into_result(self) -> Result<Self, DgaError> {
        match self.violations.first() {
            Some(v) => Err(DgaError::Invalid(v.clone())),
            None => Ok(self),
        }
    }
}

/// Anything with finite-dimensional cochain spaces and differential matrices.
pub trait CochainComplex {
    fn cochain_dim(&self, degree: u32) -> usize;
    /// Matrix of `d: C^degree → C^{degree+1}`.
    fn differential_matrix(&self, degree: u32) -> Result<SparseMatrix, DgaError>;
    /// Highest degree whose cohomology is meaningful, if bounded.
    fn truncation(&self) -> Option<u32> {
        None
    }
}

/// Cohomology in one degree with representatives chosen by first-pivot echelon order.
#[derive(Debug, Clone)]
pub struct CohomologyReport {
    pub degree: u32,
    pub dimension: usize,
    /// Cocycles in cochain coordinates, independent modulo coboundaries.
    pub representatives: Vec<SparseVector>,
    pub coboundary_basis: Vec<SparseVector>,
    kernel: LinearSolution,
    image_projection: Echelon,
    representative_positions: Vec<usize>,
}

impl CohomologyReport {
    /// Coordinates of a cocycle's class in the representative basis, or `None` if `cocycle`
    /// is not closed.
    pub fn coordinates(&self, cocycle: &SparseVector) -> Option<SparseVector> {
        if !self.kernel.matrix().apply(cocycle).ok()?.is_zero() {
            return None;
        }
        let projected = cocycle.restrict(self.kernel.free_columns());
        let remainder = self.image_projection.reduce(&projected);
        Some(SparseVector::from_entries(remainder.iter().map(
            |(pos, v)| {
                let idx = self
                    .representative_positions
                    .binary_search(&pos)
                    .expect("reduced vector avoids coboundary leads");
                (idx, v.clone())
            },
        )))
    }

    pub fn is_coboundary(&self, cocycle: &SparseVector) -> bool {
        self.coordinates(cocycle).is_some_and(|c| c.is_zero())
    }
}

/// Cohomology at `C^k` from `d_{k-1}` (if any) and `d_k`.
pub fn cohomology_from_matrices(
    degree: u32,
    incoming: Option<&SparseMatrix>,
    outgoing: &SparseMatrix,
) -> CohomologyReport {
    let kernel = solve_linear(outgoing);
    cohomology_from_kernel(degree, incoming, kernel)
}

pub(crate) fn cohomology_from_kernel(
    degree: u32,
    incoming: Option<&SparseMatrix>,
    kernel: LinearSolution,
) -> CohomologyReport {
    let mut coboundary_basis = Vec::new();
    let mut image_projection = Echelon::new();
    if let Some(incoming) = incoming {
        let image = solve_linear(incoming);
        coboundary_basis = image.image_basis();
        for v in &coboundary_basis {
            image_projection.insert(&v.restrict(kernel.free_columns()));
        }
    }
    let representative_positions: Vec<usize> = (0..kernel.nullity())
        .filter(|p| !image_projection.is_lead(*p))
        .collect();
    let representatives = representative_positions
        .iter()
        .map(|&p| kernel.kernel_vector(kernel.free_columns()[p]))
        .collect();
    CohomologyReport {
        degree,
        dimension: representative_positions.len(),
        representatives,
        coboundary_basis,
        kernel,
        image_projection,
        representative_positions,
    }
}

pub fn cohomology<C: CochainComplex + ?Sized>(
    complex: &C,
    degree: u32,
) -> Result<CohomologyReport, DgaError> {
    if let Some(truncation) = complex.truncation()
        && degree > truncation
    {
        return Err(DgaError::AboveTruncation { degree, truncation });
    }
    let outgoing = complex.differential_matrix(degree)?;
    let incoming = if degree == 0 {
        None
    } else {
        Some(complex.differential_matrix(degree - 1)?)
    };
    Ok(cohomology_from_matrices(
        degree,
        incoming.as_ref(),
        &outgoing,
    ))
}

/// Free graded algebra with a differential given on generators, optionally truncated.
#[derive(Debug, Clone, PartialEq)]
pub struct FreeDga {
    algebra: FreeGradedAlgebra,
    differential: Vec<Element>,
    truncation: Option<u32>,
}

impl FreeDga {
    /// `differential[i]` is `d` of the generator at position `i`.
    pub fn new(
        algebra: FreeGradedAlgebra,
        differential: Vec<Element>,
        truncation: Option<u32>,
    ) -> Result<Self, DgaError> {
        if differential.len() != algebra.num_generators() {
            return Err(DgaError::Presentation(format!(
                "{} differential images for {} generators",
                differential.len(),
                algebra.num_generators()
            )));
        }
        for (g, dg) in algebra.generators().iter().zip(&differential) {
            if let Some(deg) = dg.degree()
                && deg != g.degree + 1
            {
                return Err(DgaError::Invalid(DgaViolation::DifferentialDegree {
                    element: g.name.clone(),
                    expected: g.degree + 1,
                    found: deg,
                }));
            }
            for (m, _) in dg.terms() {
                if m.factors()
                    .iter()
                    .any(|(p, _)| *p as usize >= algebra.num_generators())
                {
                    return Err(AlgebraError::ForeignGenerator(
                        m.factors().iter().map(|(p, _)| *p).max().unwrap_or(0),
                    )
                    .into());
                }
            }
        }
        Ok(Self {
            algebra,
            differential,
            truncation,
        })
    }

    pub fn algebra(&self) -> &FreeGradedAlgebra {
        &self.algebra
    }

    pub fn differential_of_generator(&self, position: u32) -> &Element {
        &self.differential[position as usize]
    }

    pub fn differential_images(&self) -> &[Element] {
        &self.differential
    }

    pub fn with_truncation(mut self, truncation: Option<u32>) -> Self {
        self.truncation = truncation;
        self
    }

    /// Graded Leibniz extension of `d` to a basis monomial.
    pub fn d_monomial(&self, m: &Monomial) -> Element {
        let mut out = Element::zero();
        let total = m.degree();
        let mut before = 0u32;
        for (slot, &(g, e)) in m.factors().iter().enumerate() {
            let gdeg = self.algebra.generator(g).degree;
            let here = gdeg * e;
            let dg = &self.differential[g as usize];
            if !dg.is_zero() {
                let after = total - before - here;
                // A·d(g^e)·B = (-1)^{|A| + |dg||B|} e·(A g^{e-1} B)·dg
                let negative = (before + (gdeg + 1) * after) % 2 == 1;
                let coeff = int(e as i64) * sign(negative);
                let rest = lowered(m, slot, gdeg);
                for (t, c) in dg.terms() {
                    if let Some((prod, neg)) = self.algebra.multiply_monomials(&rest, t) {
                        out.add_term(prod, &coeff * c * sign(neg));
                    }
                }
            }
            before += here;
        }
        out
    }

    pub fn apply_d(&self, x: &Element) -> Element {
        let mut out = Element::zero();
        for (m, c) in x.terms() {
            for (t, a) in self.d_monomial(m).terms() {
                out.add_term(t.clone(), a * c);
            }
        }
        out
    }

    /// Differential restricted to `source`, expressed in the `target` monomial list.
    pub fn differential_between(
        &self,
        source: &[Monomial],
        target: &DegreeBasis,
    ) -> Result<SparseMatrix, DgaError> {
        let mut columns = Vec::with_capacity(source.len());
        for m in source {
            let image = self.d_monomial(m);
            let coords = self.algebra.coordinates(&image, target).ok_or_else(|| {
                DgaError::Presentation(format!(
                    "d({}) leaves the target block",
                    self.algebra.format_monomial(m)
                ))
            })?;
            columns.push(coords);
        }
        Ok(SparseMatrix::from_columns(target.len(), columns)?)
    }

    pub fn cohomology(&self, degree: u32) -> Result<CohomologyReport, DgaError> {
        cohomology(self, degree)
    }

    /// Cohomology representatives of `degree` as algebra elements.
    pub fn representative_elements(&self, report: &CohomologyReport) -> Vec<Element> {
        let basis = self.algebra.monomial_basis(report.degree);
        report
            .representatives
            .iter()
            .map(|v| self.algebra.element_from_coordinates(v, &basis))
            .collect()
    }

    /// Axiom check: degrees, `d² = 0`, triangularity, Leibniz on generator pairs.
    pub fn validate(&self) -> ValidationReport {
        validate_free(self)
    }
}

fn lowered(m: &Monomial, slot: usize, generator_degree: u32) -> Monomial {
    let mut factors: Vec<(u32, u32)> = m.factors().to_vec();
    if factors[slot].1 == 1 {
        factors.remove(slot);
    } else {
        factors[slot].1 -= 1;
    }
    Monomial::from_sorted_factors(m.degree() - generator_degree, factors)
}

impl CochainComplex for FreeDga {
    fn cochain_dim(&self, degree: u32) -> usize {
        self.algebra.monomial_basis(degree).len()
    }

    fn differential_matrix(&self, degree: u32) -> Result<SparseMatrix, DgaError> {
        let source = self.algebra.monomial_basis(degree);
        let target = self.algebra.monomial_basis(degree + 1);
        self.differential_between(source.monomials(), &target)
    }

    fn truncation(&self) -> Option<u32> {
        self.truncation
    }
}

pub fn validate_free(dga: &FreeDga) -> ValidationReport {
    let alg = dga.algebra();
    let mut report = ValidationReport::default();
    for (pos, g) in alg.generators().iter().enumerate() {
        let dg = dga.differential_of_generator(pos as u32);
        report.checks += 3;
        if let Some(deg) = dg.degree()
            && deg != g.degree + 1
        {
            report.violations.push(DgaViolation::DifferentialDegree {
                element: g.name.clone(),
                expected: g.degree + 1,
                found: deg,
            });
        }
        let dd = dga.apply_d(dg);
        if !dd.is_zero() {
            report.violations.push(DgaViolation::SquareNonzero {
                element: g.name.clone(),
                value: alg.format_element(&dd),
            });
        }
        let triangular = dg
            .terms()
            .all(|(m, _)| m.factors().iter().all(|(p, _)| (*p as usize) < pos));
        if !triangular {
            report.violations.push(DgaViolation::NotTriangular {
                generator: g.name.clone(),
                value: alg.format_element(dg),
            });
        }
    }
    for a in 0..alg.num_generators() as u32 {
        for b in 0..alg.num_generators() as u32 {
            report.checks += 1;
            let (x, y) = (alg.generator_element(a), alg.generator_element(b));
            let lhs = dga.apply_d(&alg.multiply_unchecked(&x, &y));
            let sign_a = sign(alg.generator(a).degree % 2 == 1);
            let rhs = alg
                .multiply_unchecked(&dga.apply_d(&x), &y)
                .add(&alg.multiply_unchecked(&x, &dga.apply_d(&y)).scaled(&sign_a));
            if rhs.as_ref() != Ok(&lhs) {
                report.violations.push(DgaViolation::Leibniz {
                    left: alg.generator(a).name.clone(),
                    right: alg.generator(b).name.clone(),
                });
            }
        }
    }
    report
}

/// Named basis element of a finite algebra.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisElement {
    pub name: String,
    pub degree: u32,
}

/// Homogeneous element of a [`FiniteDga`] in degree-local coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteElement {
    pub degree: u32,
    pub coords: SparseVector,
}

impl FiniteElement {
    pub fn zero(degree: u32) -> Self {
        Self {
            degree,
            coords: SparseVector::new(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coords.is_zero()
    }

    pub fn scaled(&self, factor: &Rational) -> Self {
        Self {
            degree: self.degree,
            coords: self.coords.scaled(factor),
        }
    }

    pub fn add(&self, other: &FiniteElement) -> Self {
        debug_assert_eq!(self.degree, other.degree);
        Self {
            degree: self.degree,
            coords: self.coords.add_scaled(&Rational::one(), &other.coords),
        }
    }
}

/// Finite-dimensional graded algebra with unit in degree 0, product structure constants
/// and an optional differential.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteDga {
    basis: Vec<BasisElement>,
    by_degree: BTreeMap<u32, Vec<usize>>,
    local: Vec<usize>,
    unit: usize,
    /// `(i, j) ↦ e_i·e_j` in degree-local coordinates of degree `|e_i| + |e_j|`.
    products: HashMap<(usize, usize), SparseVector>,
    /// `i ↦ d(e_i)` in local coordinates of degree `|e_i| + 1`.
    differential: HashMap<usize, SparseVector>,
}

impl FiniteDga {
    pub fn builder() -> FiniteDgaBuilder {
        FiniteDgaBuilder::default()
    }

    pub fn basis(&self) -> &[BasisElement] {
        &self.basis
    }

    pub fn dim(&self, degree: u32) -> usize {
        self.by_degree.get(&degree).map_or(0, Vec::len)
    }

    pub fn total_dim(&self) -> usize {
        self.basis.len()
    }

    pub fn top_degree(&self) -> u32 {
        self.basis.iter().map(|b| b.degree).max().unwrap_or(0)
    }

    pub fn degrees(&self) -> impl Iterator<Item = u32> + '_ {
        self.by_degree.keys().copied()
    }

    /// Global indices of the basis elements in `degree`.
    pub fn basis_in_degree(&self, degree: u32) -> &[usize] {
        self.by_degree.get(&degree).map_or(&[], Vec::as_slice)
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.basis.iter().position(|b| b.name == name)
    }

    pub fn basis_element(&self, global: usize) -> FiniteElement {
        FiniteElement {
            degree: self.basis[global].degree,
            coords: SparseVector::unit(self.local[global]),
        }
    }

    pub fn unit(&self) -> FiniteElement {
        self.basis_element(self.unit)
    }

    pub fn has_zero_differential(&self) -> bool {
        self.differential.values().all(SparseVector::is_zero)
    }

    fn global(&self, degree: u32, local: usize) -> usize {
        self.by_degree[&degree][local]
    }

    fn basis_product(&self, i: usize, j: usize) -> SparseVector {
        if i == self.unit {
            return SparseVector::unit(self.local[j]);
        }
        if j == self.unit {
            return SparseVector::unit(self.local[i]);
        }
        self.products.get(&(i, j)).cloned().unwrap_or_default()
    }

    pub fn multiply(&self, a: &FiniteElement, b: &FiniteElement) -> FiniteElement {
        let degree = a.degree + b.degree;
        let mut terms = Vec::new();
        if self.dim(degree) > 0 {
            for (i, x) in a.coords.iter() {
                let gi = self.global(a.degree, i);
                for (j, y) in b.coords.iter() {
                    let gj = self.global(b.degree, j);
                    let xy = x * y;
                    for (k, z) in self.basis_product(gi, gj).iter() {
                        terms.push((k, &xy * z));
                    }
                }
            }
        }
        FiniteElement {
            degree,
            coords: SparseVector::from_entries(terms),
        }
    }

    pub fn apply_d(&self, a: &FiniteElement) -> FiniteElement {
        let mut terms = Vec::new();
        for (i, x) in a.coords.iter() {
            if let Some(image) = self.differential.get(&self.global(a.degree, i)) {
                for (k, z) in image.iter() {
                    terms.push((k, x * z));
                }
            }
        }
        FiniteElement {
            degree: a.degree + 1,
            coords: SparseVector::from_entries(terms),
        }
    }

    pub fn format_element(&self, a: &FiniteElement) -> String {
        format_terms(a.coords.iter().map(|(i, c)| {
            let g = self.global(a.degree, i);
            (self.basis[g].name.clone(), g == self.unit, c)
        }))
    }

    /// Parses a linear combination of basis names, e.g. `3/2*vol - x1`.
    pub fn parse_element(&self, text: &str) -> Result<FiniteElement, DgaError> {
        parse_linear(&self.basis, &self.local, text).map(|(degree, coords)| FiniteElement {
            degree: degree.unwrap_or(0),
            coords,
        })
    }

    /// Checks unit, product degrees, graded commutativity, associativity, `d² = 0` and
    /// Leibniz exhaustively on basis pairs/triples.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        let name = |i: usize| self.basis[i].name.clone();
        report.checks += 1;
        if self.dim(0) != 1 {
            report.violations.push(DgaViolation::Unit(format!(
                "degree 0 has dimension {}, expected 1",
                self.dim(0)
            )));
            return report;
        }
        let n = self.basis.len();
        let degree = |i: usize| self.basis[i].degree;
        for i in 0..n {
            let a = self.basis_element(i);
            for j in 0..n {
                report.checks += 2;
                let b = self.basis_element(j);
                let ab = self.multiply(&a, &b);
                let ba = self.multiply(&b, &a);
                if ab != ba.scaled(&sign(degree(i) * degree(j) % 2 == 1)) {
                    report.violations.push(DgaViolation::NotCommutative {
                        left: name(i),
                        right: name(j),
                    });
                }
                let lhs = self.apply_d(&ab);
                let rhs = self.multiply(&self.apply_d(&a), &b).add(
                    &self
                        .multiply(&a, &self.apply_d(&b))
                        .scaled(&sign(degree(i) % 2 == 1)),
                );
                if lhs != rhs {
                    report.violations.push(DgaViolation::Leibniz {
                        left: name(i),
                        right: name(j),
                    });
                }
                for k in 0..n {
                    report.checks += 1;
                    let c = self.basis_element(k);
                    if self.multiply(&ab, &c) != self.multiply(&a, &self.multiply(&b, &c)) {
                        report.violations.push(DgaViolation::NotAssociative {
                            a: name(i),
                            b: name(j),
                            c: name(k),
                        });
                    }
                }
            }
            report.checks += 1;
            let dd = self.apply_d(&self.apply_d(&a));
            if !dd.is_zero() {
                report.violations.push(DgaViolation::SquareNonzero {
                    element: name(i),
                    value: self.format_element(&dd),
                });
            }
        }
        report
    }

    /// Rejects targets with `H⁰ ≠ Q` or `H¹ ≠ 0`.
    pub fn require_simply_connected(&self) -> Result<(), DgaError> {
        let h0 = cohomology(self, 0)?.dimension;
        let h1 = cohomology(self, 1)?.dimension;
        if h0 != 1 {
            return Err(DgaError::NotSimplyConnected(format!(
                "H^0 has dimension {h0}"
            )));
        }
        if h1 != 0 {
            return Err(DgaError::NotSimplyConnected(format!(
                "H^1 has dimension {h1}"
            )));
        }
        Ok(())
    }

    /// Cohomology dimensions in degrees `0..=top_degree`.
    pub fn betti_numbers(&self) -> Result<Vec<usize>, DgaError> {
        (0..=self.top_degree())
            .map(|k| cohomology(self, k).map(|r| r.dimension))
            .collect()
    }

    /// Same degrees, structure constants and differential after matching bases by position.
    pub fn structurally_equal(&self, other: &FiniteDga) -> bool {
        if self.basis.len() != other.basis.len()
            || self
                .basis
                .iter()
                .zip(&other.basis)
                .any(|(a, b)| a.degree != b.degree)
        {
            return false;
        }
        let n = self.basis.len();
        (0..n).all(|i| {
            self.apply_d(&self.basis_element(i)) == other.apply_d(&other.basis_element(i))
                && (0..n).all(|j| self.basis_product(i, j) == other.basis_product(i, j))
        })
    }

    pub fn to_document(&self) -> FiniteDgaDocument {
        let mut products = Vec::new();
        for i in 0..self.basis.len() {
            for j in i..self.basis.len() {
                if i == self.unit || j == self.unit {
                    continue;
                }
                let value = self.basis_product(i, j);
                if !value.is_zero() {
                    let degree = self.basis[i].degree + self.basis[j].degree;
                    products.push(ProductEntry {
                        left: self.basis[i].name.clone(),
                        right: self.basis[j].name.clone(),
                        value: self.format_element(&FiniteElement {
                            degree,
                            coords: value,
                        }),
                    });
                }
            }
        }
        let mut differential = Vec::new();
        for i in 0..self.basis.len() {
            let d = self.apply_d(&self.basis_element(i));
            if !d.is_zero() {
                differential.push(DifferentialEntry {
                    source: self.basis[i].name.clone(),
                    value: self.format_element(&d),
                });
            }
        }
        FiniteDgaDocument {
            basis: self.basis.clone(),
            products,
            differential,
        }
    }

    pub fn from_document(doc: &FiniteDgaDocument) -> Result<FiniteDga, DgaError> {
        let mut b = FiniteDga::builder();
        for e in &doc.basis {
            b = b.element(&e.name, e.degree);
        }
        for p in &doc.products {
            b = b.product(&p.left, &p.right, &p.value);
        }
        for d in &doc.differential {
            b = b.differential(&d.source, &d.value);
        }
        b.build()
    }
}

impl CochainComplex for FiniteDga {
    fn cochain_dim(&self, degree: u32) -> usize {
        self.dim(degree)
    }

    fn differential_matrix(&self, degree: u32) -> Result<SparseMatrix, DgaError> {
        let columns = self
            .basis_in_degree(degree)
            .iter()
            .map(|&g| self.differential.get(&g).cloned().unwrap_or_default())
            .collect();
        Ok(SparseMatrix::from_columns(self.dim(degree + 1), columns)?)
    }
}

/// Text document for finite algebras (also the CLI input format).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteDgaDocument {
    pub basis: Vec<BasisElement>,
    #[serde(default)]
    pub products: Vec<ProductEntry>,
    #[serde(default)]
    pub differential: Vec<DifferentialEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProductEntry {
    pub left: String,
    pub right: String,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DifferentialEntry {
    pub source: String,
    pub value: String,
}

/// Collects basis, products and differential by name; reversed products are filled in by
/// graded commutativity unless given explicitly.
#[derive(Debug, Clone, Default)]
pub struct FiniteDgaBuilder {
    basis: Vec<BasisElement>,
    products: Vec<(String, String, String)>,
    differential: Vec<(String, String)>,
}

impl FiniteDgaBuilder {
    pub fn element(mut self, name: &str, degree: u32) -> Self {
        self.basis.push(BasisElement {
            name: name.to_string(),
            degree,
        });
        self
    }

    pub fn product(mut self, left: &str, right: &str, value: &str) -> Self {
        self.products
            .push((left.to_string(), right.to_string(), value.to_string()));
        self
    }

    pub fn differential(mut self, source: &str, value: &str) -> Self {
        self.differential
            .push((source.to_string(), value.to_string()));
        self
    }

    pub fn build(self) -> Result<FiniteDga, DgaError> {
        let mut basis = self.basis;
        basis.sort_by_key(|b| b.degree);
        let (by_degree, local, unit) = index_basis(&basis)?;
        let lookup = |name: &str| -> Result<usize, DgaError> {
            basis
                .iter()
                .position(|b| b.name == name)
                .ok_or_else(|| DgaError::Presentation(format!("unknown basis element `{name}`")))
        };
        let mut products: HashMap<(usize, usize), SparseVector> = HashMap::new();
        let mut explicit = std::collections::HashSet::new();
        for (l, r, v) in &self.products {
            let (i, j) = (lookup(l)?, lookup(r)?);
            if i == unit || j == unit {
                return Err(DgaError::Presentation(
                    "products with the unit are implicit".to_string(),
                ));
            }
            let (deg, coords) = parse_linear(&basis, &local, v)?;
            let expected = basis[i].degree + basis[j].degree;
            if deg.is_some_and(|d| d != expected) {
                return Err(DgaError::Invalid(DgaViolation::ProductDegree {
                    left: l.clone(),
                    right: r.clone(),
                }));
            }
            if !explicit.insert((i, j)) {
                return Err(DgaError::Presentation(format!(
                    "product {l}·{r} listed twice"
                )));
            }
            products.insert((i, j), coords);
        }
        for (&(i, j), v) in products.clone().iter() {
            if !explicit.contains(&(j, i)) {
                let s = sign(basis[i].degree * basis[j].degree % 2 == 1);
                products.insert((j, i), v.scaled(&s));
            }
        }
        let mut differential = HashMap::new();
        for (src, v) in &self.differential {
            let i = lookup(src)?;
            let (deg, coords) = parse_linear(&basis, &local, v)?;
            if deg.is_some_and(|d| d != basis[i].degree + 1) {
                return Err(DgaError::Invalid(DgaViolation::DifferentialDegree {
                    element: src.clone(),
                    expected: basis[i].degree + 1,
                    found: deg.unwrap_or(0),
                }));
            }
            differential.insert(i, coords);
        }
        Ok(FiniteDga {
            basis,
            by_degree,
            local,
            unit,
            products,
            differential,
        })
    }
}

type BasisIndex = (BTreeMap<u32, Vec<usize>>, Vec<usize>, usize);

fn index_basis(basis: &[BasisElement]) -> Result<BasisIndex, DgaError> {
    let mut names = std::collections::HashSet::new();
    for b in basis {
        if !names.insert(b.name.clone()) {
            return Err(DgaError::Presentation(format!(
                "duplicate basis name `{}`",
                b.name
            )));
        }
    }
    let mut by_degree: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    let mut local = Vec::with_capacity(basis.len());
    for (i, b) in basis.iter().enumerate() {
        let slot = by_degree.entry(b.degree).or_default();
        local.push(slot.len());
        slot.push(i);
    }
    let units: Vec<usize> = by_degree.get(&0).cloned().unwrap_or_default();
    if units.len() != 1 {
        return Err(DgaError::Invalid(DgaViolation::Unit(format!(
            "expected exactly one degree-0 basis element, found {}",
            units.len()
        ))));
    }
    Ok((by_degree, local, units[0]))
}

impl FiniteDga {
    /// Assembles an algebra from a degree-sorted basis and structure constants keyed by
    /// global index pairs (all ordered pairs of non-unit elements that multiply nontrivially).
    pub(crate) fn from_parts(
        basis: Vec<BasisElement>,
        products: HashMap<(usize, usize), SparseVector>,
        differential: HashMap<usize, SparseVector>,
    ) -> Result<FiniteDga, DgaError> {
        debug_assert!(basis.windows(2).all(|w| w[0].degree <= w[1].degree));
        let (by_degree, local, unit) = index_basis(&basis)?;
        Ok(FiniteDga {
            basis,
            by_degree,
            local,
            unit,
            products,
            differential,
        })
    }

    pub fn formal_dimension(&self) -> Result<u32, DgaError> {
        let betti = self.betti_numbers()?;
        Ok(betti.iter().rposition(|&b| b > 0).unwrap_or(0) as u32)
    }
}

fn parse_linear(
    basis: &[BasisElement],
    local: &[usize],
    text: &str,
) -> Result<(Option<u32>, SparseVector), DgaError> {
    let text = text.trim();
    if text == "0" {
        return Ok((None, SparseVector::new()));
    }
    let mut degree = None;
    let mut entries = Vec::new();
    for (coeff, factors) in parse_terms(text)? {
        let g = match factors.as_slice() {
            [(name, 1)] => basis
                .iter()
                .position(|b| &b.name == name)
                .ok_or_else(|| DgaError::Presentation(format!("unknown basis element `{name}`")))?,
            [] => basis
                .iter()
                .position(|b| b.degree == 0)
                .ok_or_else(|| DgaError::Presentation("no unit".to_string()))?,
            _ => {
                return Err(DgaError::Presentation(format!(
                    "`{text}` must be a linear combination of basis names"
                )));
            }
        };
        match degree {
            Some(d) if d != basis[g].degree => {
                return Err(AlgebraError::Inhomogeneous(d, basis[g].degree).into());
            }
            _ => degree = Some(basis[g].degree),
        }
        entries.push((local[g], coeff));
    }
    Ok((degree, SparseVector::from_entries(entries)))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MorphismError {
    #[error("not a chain map: φ(d {0}) ≠ d φ({0})")]
    NotChainMap(String),
    #[error("image of `{name}` has degree {found}, expected {expected}")]
    DegreeMismatch {
        name: String,
        expected: u32,
        found: u32,
    },
    #[error("expected {expected} generator images, found {found}")]
    Arity { expected: usize, found: usize },
    #[error(transparent)]
    Dga(#[from] DgaError),
}

/// Degree-preserving algebra map between cochain complexes.
pub trait ChainMap {
    type Source: CochainComplex;
    type Target: CochainComplex;
    fn source(&self) -> &Self::Source;
    fn target(&self) -> &Self::Target;
    /// Matrix `C^k(source) → C^k(target)`.
    fn cochain_matrix(&self, degree: u32) -> Result<SparseMatrix, DgaError>;
    fn check_chain_map(&self) -> Result<(), MorphismError>;
}

/// Map `ΛV → A` determined by generator images.
#[derive(Debug, Clone)]
pub struct FreeToFinite {
    source: FreeDga,
    target: FiniteDga,
    images: Vec<FiniteElement>,
}

impl FreeToFinite {
    pub fn new(
        source: FreeDga,
        target: FiniteDga,
        images: Vec<FiniteElement>,
    ) -> Result<Self, MorphismError> {
        if images.len() != source.algebra().num_generators() {
            return Err(MorphismError::Arity {
                expected: source.algebra().num_generators(),
                found: images.len(),
            });
        }
        for (g, img) in source.algebra().generators().iter().zip(&images) {
            if !img.is_zero() && img.degree != g.degree {
                return Err(MorphismError::DegreeMismatch {
                    name: g.name.clone(),
                    expected: g.degree,
                    found: img.degree,
                });
            }
        }
        Ok(Self {
            source,
            target,
            images,
        })
    }

    pub fn images(&self) -> &[FiniteElement] {
        &self.images
    }

    pub fn image_of_monomial(&self, m: &Monomial) -> FiniteElement {
        let mut out = self.target.unit();
        for &(g, e) in m.factors() {
            let img = &self.images[g as usize];
            let img = if img.is_zero() {
                FiniteElement::zero(self.source.algebra().generator(g).degree)
            } else {
                img.clone()
            };
            for _ in 0..e {
                out = self.target.multiply(&out, &img);
            }
            if out.is_zero() {
                return FiniteElement::zero(m.degree());
            }
        }
        out
    }

    pub fn image(&self, x: &Element) -> FiniteElement {
        let mut out = FiniteElement::zero(x.degree().unwrap_or(0));
        for (m, c) in x.terms() {
            out = out.add(&self.image_of_monomial(m).scaled(c));
        }
        out
    }
}

impl ChainMap for FreeToFinite {
    type Source = FreeDga;
    type Target = FiniteDga;

    fn source(&self) -> &FreeDga {
        &self.source
    }

    fn target(&self) -> &FiniteDga {
        &self.target
    }

    fn cochain_matrix(&self, degree: u32) -> Result<SparseMatrix, DgaError> {
        let basis = self.source.algebra().monomial_basis(degree);
        let rows = self.target.dim(degree);
        if rows == 0 {
            return Ok(SparseMatrix::zero(0, basis.len()));
        }
        let columns = basis
            .monomials()
            .iter()
            .map(|m| self.image_of_monomial(m).coords)
            .collect();
        Ok(SparseMatrix::from_columns(rows, columns)?)
    }

    fn check_chain_map(&self) -> Result<(), MorphismError> {
        for (pos, g) in self.source.algebra().generators().iter().enumerate() {
            let dv = self.source.differential_of_generator(pos as u32);
            let lhs = self.image(dv);
            let rhs = self.target.apply_d(&self.images[pos]);
            if lhs.coords != rhs.coords {
                return Err(MorphismError::NotChainMap(g.name.clone()));
            }
        }
        Ok(())
    }
}

/// Map between finite algebras given degreewise by matrices.
#[derive(Debug, Clone)]
pub struct FiniteToFinite {
    source: FiniteDga,
    target: FiniteDga,
    matrices: BTreeMap<u32, SparseMatrix>,
}

impl FiniteToFinite {
    pub fn identity(algebra: &FiniteDga) -> Self {
        let matrices = algebra
            .degrees()
            .map(|k| (k, SparseMatrix::identity(algebra.dim(k))))
            .collect();
        Self {
            source: algebra.clone(),
            target: algebra.clone(),
            matrices,
        }
    }

    /// Unit to unit, everything of positive degree to zero.
    pub fn augmentation(source: &FiniteDga, target: &FiniteDga) -> Self {
        let mut matrices: BTreeMap<u32, SparseMatrix> = source
            .degrees()
            .map(|k| (k, SparseMatrix::zero(target.dim(k), source.dim(k))))
            .collect();
        matrices.insert(0, SparseMatrix::identity(1));
        Self {
            source: source.clone(),
            target: target.clone(),
            matrices,
        }
    }
}

impl ChainMap for FiniteToFinite {
    type Source = FiniteDga;
    type Target = FiniteDga;

    fn source(&self) -> &FiniteDga {
        &self.source
    }

    fn target(&self) -> &FiniteDga {
        &self.target
    }

    fn cochain_matrix(&self, degree: u32) -> Result<SparseMatrix, DgaError> {
        Ok(self.matrices.get(&degree).cloned().unwrap_or_else(|| {
            SparseMatrix::zero(self.target.dim(degree), self.source.dim(degree))
        }))
    }

    fn check_chain_map(&self) -> Result<(), MorphismError> {
        for k in self.source.degrees() {
            let lhs = self
                .target
                .differential_matrix(k)?
                .compose(&self.cochain_matrix(k)?)
                .map_err(DgaError::from)?;
            let rhs = self
                .cochain_matrix(k + 1)?
                .compose(&self.source.differential_matrix(k)?)
                .map_err(DgaError::from)?;
            if lhs != rhs {
                let name = self.source.basis[self.source.basis_in_degree(k)[0]]
                    .name
                    .clone();
                return Err(MorphismError::NotChainMap(name));
            }
        }
        Ok(())
    }
}

/// Matrix of `H^k(f)` in representative bases, with its exact rank.
#[derive(Debug, Clone)]
pub struct InducedMap {
    pub degree: u32,
    pub matrix: SparseMatrix,
    pub rank: usize,
    pub source_dim: usize,
    pub target_dim: usize,
}

impl InducedMap {
    pub fn is_isomorphism(&self) -> bool {
        self.rank == self.source_dim && self.rank == self.target_dim
    }
}

pub fn induced_map_on_cohomology<M: ChainMap>(
    map: &M,
    degree: u32,
) -> Result<InducedMap, MorphismError> {
    map.check_chain_map()?;
    let source = cohomology(map.source(), degree)?;
    let target = cohomology(map.target(), degree)?;
    induced_map_from_reports(map, &source, &target)
}

pub(crate) fn induced_map_from_reports<M: ChainMap>(
    map: &M,
    source: &CohomologyReport,
    target: &CohomologyReport,
) -> Result<InducedMap, MorphismError> {
    let cochains = map.cochain_matrix(source.degree)?;
    let mut columns = Vec::with_capacity(source.dimension);
    for rep in &source.representatives {
        let image = cochains.apply(rep).map_err(DgaError::from)?;
        let coords = target.coordinates(&image).ok_or_else(|| {
            MorphismError::NotChainMap(format!("cohomology class in degree {}", source.degree))
        })?;
        columns.push(coords);
    }
    let matrix = SparseMatrix::from_columns(target.dimension, columns).map_err(DgaError::from)?;
    let rank = solve_linear(&matrix).rank();
    Ok(InducedMap {
        degree: source.degree,
        matrix,
        rank,
        source_dim: source.dimension,
        target_dim: target.dimension,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graded_algebra::Generator;

    fn xy(dx: &str, dy: &str) -> Result<FreeDga, DgaError> {
        let alg =
            FreeGradedAlgebra::new(vec![Generator::new(0, "x", 2), Generator::new(1, "y", 3)])?;
        let d = vec![alg.parse_element(dx)?, alg.parse_element(dy)?];
        FreeDga::new(alg, d, Some(12))
    }

    fn sphere2() -> FiniteDga {
        FiniteDga::builder()
            .element("1", 0)
            .element("s", 2)
            .build()
            .unwrap()
    }

    #[test]
    fn s2_model_is_valid() {
        let dga = xy("0", "x^2").unwrap();
        let report = dga.validate();
        assert!(report.is_valid(), "{:?}", report.violations);
    }

    #[test]
    fn nonzero_dx_breaks_d_squared() {
        let dga = xy("y", "x^2").unwrap();
        let report = dga.validate();
        assert!(!report.is_valid());
        assert!(report.violations.iter().any(|v| matches!(
            v,
            DgaViolation::SquareNonzero { element, .. } if element == "y"
        )));
    }

    #[test]
    fn leibniz_on_monomials() {
        let dga = xy("0", "x^2").unwrap();
        let alg = dga.algebra();
        let xy = alg.parse_element("x*y").unwrap();
        assert_eq!(alg.format_element(&dga.apply_d(&xy)), "x^3");
        let yx2 = alg.parse_element("x^2*y").unwrap();
        assert_eq!(alg.format_element(&dga.apply_d(&yx2)), "x^4");
    }

    #[test]
    fn cohomology_examples() {
        let dga = xy("0", "x^2").unwrap();
        let h2 = dga.cohomology(2).unwrap();
        assert_eq!(h2.dimension, 1);
        assert_eq!(
            dga.algebra()
                .format_element(&dga.representative_elements(&h2)[0]),
            "x"
        );
        assert_eq!(dga.cohomology(4).unwrap().dimension, 0);
        assert_eq!(dga.cohomology(0).unwrap().dimension, 1);
        assert_eq!(dga.cohomology(5).unwrap().dimension, 0);
        assert!(matches!(
            dga.cohomology(13),
            Err(DgaError::AboveTruncation { .. })
        ));
    }

    #[test]
    fn zero_differential_finite_is_valid() {
        let a = sphere2();
        assert!(a.validate().is_valid());
        assert_eq!(a.betti_numbers().unwrap(), vec![1, 0, 1]);
    }

    #[test]
    fn finite_validation_catches_bad_tables() {
        let bad = FiniteDga::builder()
            .element("1", 0)
            .element("a", 3)
            .element("b", 6)
            .product("a", "a", "b")
            .build()
            .unwrap();
        let report = bad.validate();
        assert!(matches!(
            report.first_violation(),
            Some(DgaViolation::NotCommutative { .. })
        ));
        let no_unit = FiniteDga::builder().element("a", 2).build();
        assert!(no_unit.is_err());
    }

    #[test]
    fn induced_maps_on_s2() {
        let model = xy("0", "x^2").unwrap();
        let target = sphere2();
        let s = target.parse_element("s").unwrap();
        let phi = FreeToFinite::new(
            model.clone(),
            target.clone(),
            vec![s, FiniteElement::zero(3)],
        )
        .unwrap();
        let h2 = induced_map_on_cohomology(&phi, 2).unwrap();
        assert_eq!(h2.rank, 1);
        assert!(h2.is_isomorphism());
        let zero = FreeToFinite::new(
            model,
            target.clone(),
            vec![FiniteElement::zero(2), FiniteElement::zero(3)],
        )
        .unwrap();
        assert_eq!(induced_map_on_cohomology(&zero, 2).unwrap().rank, 0);
        let id = FiniteToFinite::identity(&target);
        let h = induced_map_on_cohomology(&id, 2).unwrap();
        assert_eq!(h.matrix, SparseMatrix::identity(1));
        let aug = FiniteToFinite::augmentation(&target, &target);
        assert_eq!(induced_map_on_cohomology(&aug, 2).unwrap().rank, 0);
    }

    #[test]
    fn non_chain_map_rejected() {
        let model = xy("0", "x^2").unwrap();
        let cp2 = FiniteDga::builder()
            .element("1", 0)
            .element("t", 2)
            .element("t2", 4)
            .product("t", "t", "t2")
            .build()
            .unwrap();
        // y ↦ 0 but φ(dy) = φ(x²) = t² ≠ 0
        let t = cp2.parse_element("t").unwrap();
        let phi = FreeToFinite::new(model, cp2, vec![t, FiniteElement::zero(3)]).unwrap();
        assert_eq!(
            induced_map_on_cohomology(&phi, 2).unwrap_err(),
            MorphismError::NotChainMap("y".to_string())
        );
    }

    #[test]
    fn document_round_trip() {
        let a = FiniteDga::builder()
            .element("1", 0)
            .element("x", 2)
            .element("vol", 4)
            .product("x", "x", "3/2*vol")
            .build()
            .unwrap();
        let doc = a.to_document();
        let json = serde_json::to_string(&doc).unwrap();
        let back = FiniteDga::from_document(&serde_json::from_str(&json).unwrap()).unwrap();
        assert!(a.structurally_equal(&back));
        assert_eq!(doc.products[0].value, "3/2*vol");
    }
}
