//! Cohomology algebras of standard simply connected spaces: spheres,
//! complex projective spaces, 4-manifolds given by intersection forms,
//! products and connected sums.

use std::collections::HashMap;

use thiserror::Error;

use crate::dga::{BasisElement, DgaError, FiniteDga};
use crate::graded_algebra::sign;
use crate::linalg::{SparseMatrix, SparseVector, solve_linear};
use crate::rational::{Rational, int};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpaceError {
    #[error("sphere dimension must be at least 2, got {0}")]
    SphereDimension(u32),
    #[error("projective space dimension must be at least 1, got {0}")]
    ProjectiveDimension(u32),
    #[error("intersection form is not square")]
    NotSquare,
    #[error("intersection form is not symmetric at ({0}, {1})")]
    NotSymmetric(usize, usize),
    #[error("intersection form is degenerate (determinant 0), violating Poincaré duality")]
    Degenerate,
    #[error("cannot parse intersection form `{0}`")]
    Parse(String),
    #[error(transparent)]
    Dga(#[from] DgaError),
}

/// Symmetric nondegenerate integer matrix of cup products on `H²` of a closed 4-manifold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntersectionForm {
    matrix: Vec<Vec<i64>>,
}

impl IntersectionForm {
    pub fn new(matrix: Vec<Vec<i64>>) -> Result<Self, SpaceError> {
        let n = matrix.len();
        if matrix.iter().any(|row| row.len() != n) {
            return Err(SpaceError::NotSquare);
        }
        for i in 0..n {
            for j in 0..i {
                if matrix[i][j] != matrix[j][i] {
                    return Err(SpaceError::NotSymmetric(i, j));
                }
            }
        }
        let form = Self { matrix };
        if form.rank() != n {
            return Err(SpaceError::Degenerate);
        }
        Ok(form)
    }

    pub fn diagonal(entries: &[i64]) -> Result<Self, SpaceError> {
        let n = entries.len();
        let matrix = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { entries[i] } else { 0 })
                    .collect()
            })
            .collect();
        Self::new(matrix)
    }

    pub fn hyperbolic() -> Self {
        Self {
            matrix: vec![vec![0, 1], vec![1, 0]],
        }
    }

    pub fn b2(&self) -> usize {
        self.matrix.len()
    }

    pub fn matrix(&self) -> &[Vec<i64>] {
        &self.matrix
    }

    /// Rank of the pairing over the rationals.
    pub fn rank(&self) -> usize {
        let rows: Vec<Vec<Rational>> = self
            .matrix
            .iter()
            .map(|r| r.iter().map(|&v| int(v)).collect())
            .collect();
        match SparseMatrix::from_rows(&rows) {
            Ok(m) => solve_linear(&m).rank(),
            Err(_) => 0,
        }
    }

    /// Block-diagonal sum, the form of the connected sum.
    pub fn direct_sum(&self, other: &IntersectionForm) -> IntersectionForm {
        let (n, m) = (self.b2(), other.b2());
        let mut matrix = vec![vec![0; n + m]; n + m];
        for i in 0..n {
            matrix[i][..n].copy_from_slice(&self.matrix[i]);
        }
        for i in 0..m {
            matrix[n + i][n..].copy_from_slice(&other.matrix[i]);
        }
        IntersectionForm { matrix }
    }

    /// Accepts `diag(a,b,...)`, `[[a,b],[c,d]]`, `a b; c d`, and the presets
    /// `CP2`, `S2xS2`, `S4`, `<k>CP2`.
    pub fn parse(text: &str) -> Result<Self, SpaceError> {
        let err = || SpaceError::Parse(text.to_string());
        let t = text.trim();
        match t {
            "CP2" => return Self::diagonal(&[1]),
            "S2xS2" => return Ok(Self::hyperbolic()),
            "S4" => return Self::new(Vec::new()),
            _ => {}
        }
        if let Some(count) = t.strip_suffix("CP2") {
            let k: usize = count.parse().map_err(|_| err())?;
            return Self::diagonal(&vec![1; k]);
        }
        if let Some(inner) = t.strip_prefix("diag(").and_then(|r| r.strip_suffix(')')) {
            let entries = inner
                .split(',')
                .map(|s| s.trim().parse::<i64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| err())?;
            return Self::diagonal(&entries);
        }
        let rows: Vec<&str> = if t.starts_with("[[") {
            let inner = t
                .strip_prefix('[')
                .and_then(|r| r.strip_suffix(']'))
                .ok_or_else(err)?;
            inner
                .split("],")
                .map(|r| r.trim().trim_start_matches('[').trim_end_matches(']'))
                .collect()
        } else {
            t.split(';').collect()
        };
        let matrix = rows
            .iter()
            .map(|r| {
                r.split(|c: char| c == ',' || c.is_whitespace())
                    .filter(|s| !s.is_empty())
                    .map(|s| s.parse::<i64>())
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| err())?;
        Self::new(matrix)
    }
}

/// Degreewise Betti numbers `b_0, b_1, …`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BettiData {
    betti: Vec<usize>,
}

impl BettiData {
    pub fn new(betti: Vec<usize>) -> Self {
        Self { betti }
    }

    pub fn of(algebra: &FiniteDga) -> Result<Self, DgaError> {
        algebra.betti_numbers().map(Self::new)
    }

    pub fn numbers(&self) -> &[usize] {
        &self.betti
    }

    pub fn get(&self, degree: usize) -> usize {
        self.betti.get(degree).copied().unwrap_or(0)
    }
}

/// `H*(S^n)`: classes `1` and `s` with `s² = 0`.
pub fn sphere(n: u32) -> Result<FiniteDga, SpaceError> {
    if n < 2 {
        return Err(SpaceError::SphereDimension(n));
    }
    Ok(FiniteDga::builder()
        .element("1", 0)
        .element("s", n)
        .build()?)
}

/// `H*(CPⁿ)`: truncated polynomial algebra on a degree-2 class `t`.
pub fn projective(n: u32) -> Result<FiniteDga, SpaceError> {
    if n < 1 {
        return Err(SpaceError::ProjectiveDimension(n));
    }
    truncated_polynomial(2, n)
}

/// `Q[t]/(t^{r+1})` with `|t| = degree` even.
pub fn truncated_polynomial(degree: u32, height: u32) -> Result<FiniteDga, SpaceError> {
    let name = |i: u32| match i {
        0 => "1".to_string(),
        1 => "t".to_string(),
        _ => format!("t{i}"),
    };
    let basis: Vec<BasisElement> = (0..=height)
        .map(|i| BasisElement {
            name: name(i),
            degree: degree * i,
        })
        .collect();
    let mut products = HashMap::new();
    for i in 1..=height {
        for j in 1..=height {
            if i + j <= height {
                products.insert((i as usize, j as usize), SparseVector::unit(0));
            }
        }
    }
    Ok(FiniteDga::from_parts(basis, products, HashMap::new())?)
}

/// Cohomology of the simply connected closed 4-manifold with the given form:
/// `1`, `x1..x_b` in degree 2, `vol` in degree 4, `x_i·x_j = q_ij·vol`.
pub fn four_manifold(form: &IntersectionForm) -> Result<FiniteDga, SpaceError> {
    let b = form.b2();
    let mut basis = vec![BasisElement {
        name: "1".into(),
        degree: 0,
    }];
    basis.extend((1..=b).map(|i| BasisElement {
        name: format!("x{i}"),
        degree: 2,
    }));
    basis.push(BasisElement {
        name: "vol".into(),
        degree: 4,
    });
    let mut products = HashMap::new();
    for i in 0..b {
        for j in 0..b {
            let q = form.matrix[i][j];
            if q != 0 {
                products.insert((i + 1, j + 1), SparseVector::from_entries([(0, int(q))]));
            }
        }
    }
    Ok(FiniteDga::from_parts(basis, products, HashMap::new())?)
}

pub fn connected_sum_4d(
    first: &IntersectionForm,
    second: &IntersectionForm,
) -> Result<FiniteDga, SpaceError> {
    four_manifold(&first.direct_sum(second))
}

/// Graded tensor product `A ⊗ B` with `(a⊗b)(c⊗d) = (-1)^{|b||c|} ac⊗bd`.
pub fn product(a: &FiniteDga, b: &FiniteDga) -> Result<FiniteDga, SpaceError> {
    let a_names: Vec<String> = a.basis().iter().map(|e| e.name.clone()).collect();
    let mut b_names: Vec<String> = b.basis().iter().map(|e| e.name.clone()).collect();
    for (i, e) in b.basis().iter().enumerate() {
        if e.degree == 0 {
            continue;
        }
        while a_names.contains(&b_names[i]) {
            b_names[i].push('\'');
        }
    }
    // pairs (i in A, j in B), stable-sorted by total degree with A-index varying fastest
    let mut pairs: Vec<(usize, usize)> = (0..b.total_dim())
        .flat_map(|j| (0..a.total_dim()).map(move |i| (i, j)))
        .collect();
    pairs.sort_by_key(|&(i, j)| a.basis()[i].degree + b.basis()[j].degree);
    let pair_index: HashMap<(usize, usize), usize> =
        pairs.iter().enumerate().map(|(n, p)| (*p, n)).collect();
    let basis: Vec<BasisElement> = pairs
        .iter()
        .map(|&(i, j)| {
            let (ea, eb) = (&a.basis()[i], &b.basis()[j]);
            let name = match (ea.degree, eb.degree) {
                (0, _) => b_names[j].clone(),
                (_, 0) => a_names[i].clone(),
                _ => format!("{}.{}", a_names[i], b_names[j]),
            };
            BasisElement {
                name,
                degree: ea.degree + eb.degree,
            }
        })
        .collect();
    let mut local_of_pair: HashMap<(usize, usize), usize> = HashMap::new();
    let mut count_in_degree: HashMap<u32, usize> = HashMap::new();
    for p in &pairs {
        let deg = a.basis()[p.0].degree + b.basis()[p.1].degree;
        let slot = count_in_degree.entry(deg).or_default();
        local_of_pair.insert(*p, *slot);
        *slot += 1;
    }
    // global index in A/B of a local coordinate in a given degree
    let to_global_a = |deg: u32, local: usize| a.basis_in_degree(deg)[local];
    let to_global_b = |deg: u32, local: usize| b.basis_in_degree(deg)[local];

    let mut products = HashMap::new();
    for &(i, j) in &pairs {
        for &(k, l) in &pairs {
            let (di, dj, dk) = (
                a.basis()[i].degree,
                b.basis()[j].degree,
                a.basis()[k].degree,
            );
            if di + dj == 0 || a.basis()[k].degree + b.basis()[l].degree == 0 {
                continue;
            }
            let ac = a.multiply(&a.basis_element(i), &a.basis_element(k));
            let bd = b.multiply(&b.basis_element(j), &b.basis_element(l));
            if ac.is_zero() || bd.is_zero() {
                continue;
            }
            let s = sign(dj * dk % 2 == 1);
            let mut terms = Vec::new();
            for (x, cx) in ac.coords.iter() {
                for (y, cy) in bd.coords.iter() {
                    let p = (to_global_a(ac.degree, x), to_global_b(bd.degree, y));
                    terms.push((local_of_pair[&p], &s * cx * cy));
                }
            }
            let v = SparseVector::from_entries(terms);
            if !v.is_zero() {
                products.insert((pair_index[&(i, j)], pair_index[&(k, l)]), v);
            }
        }
    }
    let mut differential = HashMap::new();
    for &(i, j) in &pairs {
        let da = a.apply_d(&a.basis_element(i));
        let db = b.apply_d(&b.basis_element(j));
        let mut terms: Vec<(usize, Rational)> = Vec::new();
        for (x, c) in da.coords.iter() {
            let p = (to_global_a(da.degree, x), j);
            terms.push((local_of_pair[&p], c.clone()));
        }
        let s = sign(a.basis()[i].degree % 2 == 1);
        for (y, c) in db.coords.iter() {
            let p = (i, to_global_b(db.degree, y));
            terms.push((local_of_pair[&p], &s * c));
        }
        let v = SparseVector::from_entries(terms);
        if !v.is_zero() {
            differential.insert(pair_index[&(i, j)], v);
        }
    }
    Ok(FiniteDga::from_parts(basis, products, differential)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_classes() {
        let s2 = sphere(2).unwrap();
        assert_eq!(s2.betti_numbers().unwrap(), vec![1, 0, 1]);
        let s = s2.parse_element("s").unwrap();
        assert!(s2.multiply(&s, &s).is_zero());
        assert!(matches!(sphere(1), Err(SpaceError::SphereDimension(1))));
    }

    #[test]
    fn cp2_from_diag_one() {
        let a = four_manifold(&IntersectionForm::diagonal(&[1]).unwrap()).unwrap();
        assert!(a.validate().is_valid());
        assert!(a.structurally_equal(&projective(2).unwrap()));
    }

    #[test]
    fn s2xs2_as_product_and_form() {
        let form = four_manifold(&IntersectionForm::hyperbolic()).unwrap();
        let prod = product(&sphere(2).unwrap(), &sphere(2).unwrap()).unwrap();
        assert!(prod.validate().is_valid());
        assert!(prod.structurally_equal(&form));
        let x1 = form.parse_element("x1").unwrap();
        let x2 = form.parse_element("x2").unwrap();
        assert!(form.multiply(&x1, &x1).is_zero());
        assert_eq!(form.format_element(&form.multiply(&x1, &x2)), "vol");
    }

    #[test]
    fn connected_sums_are_block_diagonal() {
        let cp2 = IntersectionForm::diagonal(&[1]).unwrap();
        let sum = connected_sum_4d(&cp2, &cp2).unwrap();
        assert!(sum.structurally_equal(
            &four_manifold(&IntersectionForm::diagonal(&[1, 1]).unwrap()).unwrap()
        ));
        let betti = BettiData::of(&sum).unwrap();
        assert_eq!(betti.get(2), 2);
    }

    #[test]
    fn degenerate_forms_rejected() {
        assert_eq!(
            IntersectionForm::new(vec![vec![1, 1], vec![1, 1]]),
            Err(SpaceError::Degenerate)
        );
        assert!(matches!(
            IntersectionForm::new(vec![vec![1, 2], vec![0, 1]]),
            Err(SpaceError::NotSymmetric(1, 0))
        ));
    }

    #[test]
    fn form_literals() {
        let three = IntersectionForm::parse("3CP2").unwrap();
        assert_eq!(three, IntersectionForm::parse("diag(1,1,1)").unwrap());
        assert_eq!(
            IntersectionForm::parse("[[0,1],[1,0]]").unwrap(),
            IntersectionForm::hyperbolic()
        );
        assert_eq!(
            IntersectionForm::parse("0 1; 1 0").unwrap(),
            IntersectionForm::parse("S2xS2").unwrap()
        );
        assert!(IntersectionForm::parse("diag(1,x)").is_err());
    }

    #[test]
    fn products_with_odd_spheres() {
        let s3 = sphere(3).unwrap();
        let p = product(&s3, &s3).unwrap();
        let report = p.validate();
        assert!(report.is_valid(), "{:?}", report.violations);
        assert_eq!(p.betti_numbers().unwrap(), vec![1, 0, 0, 2, 0, 0, 1]);
        let a = p.parse_element("s").unwrap();
        let b = p.parse_element("s'").unwrap();
        assert_eq!(p.multiply(&a, &b), p.multiply(&b, &a).scaled(&int(-1)));
    }
}
