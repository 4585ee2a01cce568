//! Free graded-commutative algebras over the rationals.
//!
//! Generators are kept in `(degree, id)` order and referenced by position.
//! A [`Monomial`] is a sorted list of `(position, exponent)` pairs in which
//! odd generators appear at most once, so structural equality of
//! [`Element`]s coincides with equality in the algebra.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, RwLock};

use num_traits::{One, Zero};
use thiserror::Error;

use crate::rational::{Rational, format_rational, int, is_negative, parse_rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("generator `{0}` has degree 0; degrees must be positive")]
    ZeroDegree(String),
    #[error("duplicate generator id {0}")]
    DuplicateId(u32),
    #[error("generator `{name}` (degree {degree}) does not extend the ordering")]
    OutOfOrder { name: String, degree: u32 },
    #[error("element references generator #{0}, which is not in this algebra")]
    ForeignGenerator(u32),
    #[error("cannot add elements of degrees {0} and {1}")]
    Inhomogeneous(u32, u32),
    #[error("unknown generator `{0}`")]
    UnknownName(String),
    #[error("malformed element `{0}`")]
    Malformed(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Generator {
    pub id: u32,
    pub name: String,
    pub degree: u32,
}

impl Generator {
    pub fn new(id: u32, name: impl Into<String>, degree: u32) -> Self {
        Self {
            id,
            name: name.into(),
            degree,
        }
    }

    pub fn is_odd(&self) -> bool {
        self.degree % 2 == 1
    }
}

/// Canonical basis monomial. Orders first by degree, then lexicographically on factors.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    degree: u32,
    factors: Vec<(u32, u32)>,
}

impl Monomial {
    pub fn unit() -> Self {
        Self {
            degree: 0,
            factors: Vec::new(),
        }
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// `(generator position, exponent)` pairs in increasing position order.
    pub fn factors(&self) -> &[(u32, u32)] {
        &self.factors
    }

    pub fn is_unit(&self) -> bool {
        self.factors.is_empty()
    }

    /// Word length: total number of generator factors counted with multiplicity.
    pub fn length(&self) -> u32 {
        self.factors.iter().map(|(_, e)| e).sum()
    }

    /// The single generator position if this monomial is exactly one generator.
    pub fn as_generator(&self) -> Option<u32> {
        match self.factors.as_slice() {
            [(g, 1)] => Some(*g),
            _ => None,
        }
    }

    pub(crate) fn from_sorted_factors(degree: u32, factors: Vec<(u32, u32)>) -> Self {
        Self { degree, factors }
    }
}

/// Homogeneous element: nonzero rational coefficients on canonical monomials.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Element {
    terms: BTreeMap<Monomial, Rational>,
}

impl Element {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn unit() -> Self {
        Self::from_monomial(Monomial::unit(), Rational::one())
    }

    pub fn from_monomial(monomial: Monomial, coeff: Rational) -> Self {
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(monomial, coeff);
        }
        Self { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// `None` for the zero element.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().next().map(Monomial::degree)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, monomial: &Monomial) -> Rational {
        self.terms
            .get(monomial)
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    /// Adds `coeff * monomial`, dropping the term if it cancels.
    pub fn add_term(&mut self, monomial: Monomial, coeff: Rational) {
        if coeff.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(monomial) {
            Entry::Vacant(slot) => {
                slot.insert(coeff);
            }
            Entry::Occupied(mut slot) => {
                *slot.get_mut() += coeff;
                if slot.get().is_zero() {
                    slot.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &Element) -> Result<Element, AlgebraError> {
        self.check_same_degree(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Element) -> Result<Element, AlgebraError> {
        self.add(&other.scaled(&-Rational::one()))
    }

    pub fn scaled(&self, factor: &Rational) -> Element {
        if factor.is_zero() {
            return Element::zero();
        }
        Element {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), c * factor))
                .collect(),
        }
    }

    fn check_same_degree(&self, other: &Element) -> Result<(), AlgebraError> {
        match (self.degree(), other.degree()) {
            (Some(a), Some(b)) if a != b => Err(AlgebraError::Inhomogeneous(a, b)),
            _ => Ok(()),
        }
    }

    /// Terms consisting of a single generator to the first power.
    pub fn linear_part(&self) -> Vec<(u32, Rational)> {
        self.terms
            .iter()
            .filter_map(|(m, c)| m.as_generator().map(|g| (g, c.clone())))
            .collect()
    }
}

/// Basis of one degree with a reverse index.
#[derive(Debug)]
pub struct DegreeBasis {
    monomials: Vec<Monomial>,
    index: HashMap<Monomial, usize>,
}

impl DegreeBasis {
    pub fn new(monomials: Vec<Monomial>) -> Self {
        let index = monomials
            .iter()
            .enumerate()
            .map(|(i, m)| (m.clone(), i))
            .collect();
        Self { monomials, index }
    }

    pub fn monomials(&self) -> &[Monomial] {
        &self.monomials
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn index_of(&self, monomial: &Monomial) -> Option<usize> {
        self.index.get(monomial).copied()
    }
}

/// Free graded-commutative algebra `ΛV` on finitely many positive-degree generators.
#[derive(Debug, Default)]
pub struct FreeGradedAlgebra {
    generators: Vec<Generator>,
    basis_cache: RwLock<HashMap<u32, Arc<DegreeBasis>>>,
}

impl Clone for FreeGradedAlgebra {
    fn clone(&self) -> Self {
        let cache = self
            .basis_cache
            .read()
            .expect("basis cache poisoned")
            .clone();
        Self {
            generators: self.generators.clone(),
            basis_cache: RwLock::new(cache),
        }
    }
}

impl PartialEq for FreeGradedAlgebra {
    fn eq(&self, other: &Self) -> bool {
        self.generators == other.generators
    }
}

impl FreeGradedAlgebra {
    /// Sorts the generators by `(degree, id)`; ids must be unique and degrees positive.
    pub fn new(mut generators: Vec<Generator>) -> Result<Self, AlgebraError> {
        generators.sort_by_key(|g| (g.degree, g.id));
        let mut seen = std::collections::HashSet::new();
        for g in &generators {
            if g.degree == 0 {
                return Err(AlgebraError::ZeroDegree(g.name.clone()));
            }
            if !seen.insert(g.id) {
                return Err(AlgebraError::DuplicateId(g.id));
            }
        }
        Ok(Self {
            generators,
            basis_cache: RwLock::new(HashMap::new()),
        })
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn generator(&self, position: u32) -> &Generator {
        &self.generators[position as usize]
    }

    pub fn num_generators(&self) -> usize {
        self.generators.len()
    }

    pub fn position_of_name(&self, name: &str) -> Option<u32> {
        self.generators
            .iter()
            .position(|g| g.name == name)
            .map(|p| p as u32)
    }

    /// Appends generators that sort after every existing one, keeping positions stable.
    /// Cached bases below the smallest new degree stay valid and are kept.
    pub fn extended(&self, new: Vec<Generator>) -> Result<Self, AlgebraError> {
        let mut generators = self.generators.clone();
        let mut min_new = u32::MAX;
        for g in new {
            if g.degree == 0 {
                return Err(AlgebraError::ZeroDegree(g.name));
            }
            if generators.iter().any(|h| h.id == g.id) {
                return Err(AlgebraError::DuplicateId(g.id));
            }
            if let Some(last) = generators.last()
                && (g.degree, g.id) <= (last.degree, last.id)
            {
                return Err(AlgebraError::OutOfOrder {
                    name: g.name,
                    degree: g.degree,
                });
            }
            min_new = min_new.min(g.degree);
            generators.push(g);
        }
        let cache: HashMap<u32, Arc<DegreeBasis>> = self
            .basis_cache
            .read()
            .expect("basis cache poisoned")
            .iter()
            .filter(|(d, _)| **d < min_new)
            .map(|(d, b)| (*d, Arc::clone(b)))
            .collect();
        Ok(Self {
            generators,
            basis_cache: RwLock::new(cache),
        })
    }

    pub fn generator_element(&self, position: u32) -> Element {
        let g = &self.generators[position as usize];
        Element::from_monomial(
            Monomial {
                degree: g.degree,
                factors: vec![(position, 1)],
            },
            Rational::one(),
        )
    }

    /// Number of basis monomials in `degree`, computed from the generating
    /// function without enumerating.
    pub fn basis_size(&self, degree: u32) -> u128 {
        let n = degree as usize;
        let mut counts = vec![0u128; n + 1];
        counts[0] = 1;
        for g in &self.generators {
            let d = g.degree as usize;
            if d > n {
                continue;
            }
            if g.is_odd() {
                for i in (d..=n).rev() {
                    counts[i] = counts[i].saturating_add(counts[i - d]);
                }
            } else {
                for i in d..=n {
                    counts[i] = counts[i].saturating_add(counts[i - d]);
                }
            }
        }
        counts[n]
    }

    /// Every monomial of exactly `degree`, each once, in canonical order. Memoized.
    pub fn monomial_basis(&self, degree: u32) -> Arc<DegreeBasis> {
        if let Some(b) = self
            .basis_cache
            .read()
            .expect("basis cache poisoned")
            .get(&degree)
        {
            return Arc::clone(b);
        }
        let mut out = Vec::new();
        let mut factors = Vec::new();
        self.enumerate(0, degree, &mut factors, &mut out);
        let mut monomials: Vec<Monomial> = out
            .into_iter()
            .map(|factors| Monomial { degree, factors })
            .collect();
        monomials.sort();
        let basis = Arc::new(DegreeBasis::new(monomials));
        self.basis_cache
            .write()
            .expect("basis cache poisoned")
            .entry(degree)
            .or_insert_with(|| Arc::clone(&basis));
        basis
    }

    fn enumerate(
        &self,
        start: usize,
        remaining: u32,
        factors: &mut Vec<(u32, u32)>,
        out: &mut Vec<Vec<(u32, u32)>>,
    ) {
        if remaining == 0 {
            out.push(factors.clone());
            return;
        }
        for pos in start..self.generators.len() {
            let g = &self.generators[pos];
            if g.degree > remaining {
                // generators are sorted by degree
                break;
            }
            let max_exp = if g.is_odd() { 1 } else { remaining / g.degree };
            for e in 1..=max_exp {
                factors.push((pos as u32, e));
                self.enumerate(pos + 1, remaining - e * g.degree, factors, out);
                factors.pop();
            }
        }
    }

    fn check_member(&self, element: &Element) -> Result<(), AlgebraError> {
        for m in element.terms.keys() {
            for (g, _) in &m.factors {
                if *g as usize >= self.generators.len() {
                    return Err(AlgebraError::ForeignGenerator(*g));
                }
            }
        }
        Ok(())
    }

    /// Product of canonical monomials with its Koszul sign, or `None` when an odd generator repeats.
    pub fn multiply_monomials(&self, a: &Monomial, b: &Monomial) -> Option<(Monomial, bool)> {
        let mut factors = Vec::with_capacity(a.factors.len() + b.factors.len());
        let mut negative = false;
        // odd factors of `a` not yet merged; each odd factor of `b` jumps over them
        let mut odd_pending_in_a = a
            .factors
            .iter()
            .filter(|(g, _)| self.generators[*g as usize].is_odd())
            .count();
        let (mut i, mut j) = (0, 0);
        while i < a.factors.len() || j < b.factors.len() {
            let take_a =
                j >= b.factors.len() || (i < a.factors.len() && a.factors[i].0 < b.factors[j].0);
            if take_a {
                let (g, e) = a.factors[i];
                if self.generators[g as usize].is_odd() {
                    odd_pending_in_a -= 1;
                }
                factors.push((g, e));
                i += 1;
            } else if i < a.factors.len() && a.factors[i].0 == b.factors[j].0 {
                let (g, e) = a.factors[i];
                let f = b.factors[j].1;
                if self.generators[g as usize].is_odd() {
                    return None;
                }
                factors.push((g, e + f));
                i += 1;
                j += 1;
            } else {
                let (g, e) = b.factors[j];
                if self.generators[g as usize].is_odd() && odd_pending_in_a % 2 == 1 {
                    negative = !negative;
                }
                factors.push((g, e));
                j += 1;
            }
        }
        Some((
            Monomial {
                degree: a.degree + b.degree,
                factors,
            },
            negative,
        ))
    }

    pub fn multiply(&self, a: &Element, b: &Element) -> Result<Element, AlgebraError> {
        self.check_member(a)?;
        self.check_member(b)?;
        Ok(self.multiply_unchecked(a, b))
    }

    pub(crate) fn multiply_unchecked(&self, a: &Element, b: &Element) -> Element {
        let mut out = Element::zero();
        for (ma, ca) in &a.terms {
            for (mb, cb) in &b.terms {
                if let Some((m, negative)) = self.multiply_monomials(ma, mb) {
                    let c = ca * cb;
                    out.add_term(m, if negative { -c } else { c });
                }
            }
        }
        out
    }

    pub fn power(&self, a: &Element, exponent: u32) -> Element {
        let mut out = Element::unit();
        for _ in 0..exponent {
            out = self.multiply_unchecked(&out, a);
        }
        out
    }

    /// Coordinates of a homogeneous element in the monomial basis of its degree.
    pub fn coordinates(
        &self,
        element: &Element,
        basis: &DegreeBasis,
    ) -> Option<crate::linalg::SparseVector> {
        let mut entries = Vec::with_capacity(element.num_terms());
        for (m, c) in element.terms() {
            entries.push((basis.index_of(m)?, c.clone()));
        }
        Some(crate::linalg::SparseVector::from_entries(entries))
    }

    pub fn element_from_coordinates(
        &self,
        coords: &crate::linalg::SparseVector,
        basis: &DegreeBasis,
    ) -> Element {
        let mut out = Element::zero();
        for (i, c) in coords.iter() {
            out.add_term(basis.monomials[i].clone(), c.clone());
        }
        out
    }

    pub fn format_monomial(&self, m: &Monomial) -> String {
        if m.is_unit() {
            return "1".to_string();
        }
        m.factors
            .iter()
            .map(|(g, e)| {
                let name = &self.generators[*g as usize].name;
                if *e == 1 {
                    name.clone()
                } else {
                    format!("{name}^{e}")
                }
            })
            .collect::<Vec<_>>()
            .join("*")
    }

    /// Canonical text form, e.g. `3/2*x^2*y - z`.
    pub fn format_element(&self, element: &Element) -> String {
        format_terms(
            element
                .terms
                .iter()
                .map(|(m, c)| (self.format_monomial(m), m.is_unit(), c)),
        )
    }

    /// Parses the canonical text form; generator names must exist in this algebra.
    pub fn parse_element(&self, text: &str) -> Result<Element, AlgebraError> {
        let mut out = Element::zero();
        let mut degree = None;
        for (coeff, factors) in parse_terms(text)? {
            let mut term = Element::from_monomial(Monomial::unit(), coeff);
            for (name, exp) in factors {
                let pos = self
                    .position_of_name(&name)
                    .ok_or_else(|| AlgebraError::UnknownName(name.clone()))?;
                let g = self.generator_element(pos);
                term = self.multiply_unchecked(&term, &self.power(&g, exp));
            }
            if let Some(d) = term.degree() {
                match degree {
                    Some(prev) if prev != d => return Err(AlgebraError::Inhomogeneous(prev, d)),
                    _ => degree = Some(d),
                }
            }
            for (m, c) in term.terms {
                out.add_term(m, c);
            }
        }
        Ok(out)
    }
}

pub(crate) fn format_terms<'a>(
    terms: impl Iterator<Item = (String, bool, &'a Rational)>,
) -> String {
    let mut out = String::new();
    for (name, is_unit, c) in terms {
        let negative = is_negative(c);
        let magnitude = if negative { -c.clone() } else { c.clone() };
        if out.is_empty() {
            if negative {
                out.push('-');
            }
        } else {
            out.push_str(if negative { " - " } else { " + " });
        }
        if is_unit {
            out.push_str(&format_rational(&magnitude));
        } else if magnitude.is_one() {
            out.push_str(&name);
        } else {
            out.push_str(&format_rational(&magnitude));
            out.push('*');
            out.push_str(&name);
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

/// Splits `3/2*x^2*y - z` into signed coefficients and `(name, exponent)` factor lists.
pub(crate) fn parse_terms(text: &str) -> Result<Vec<(Rational, Vec<(String, u32)>)>, AlgebraError> {
    let malformed = || AlgebraError::Malformed(text.to_string());
    let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if compact.is_empty() {
        return Err(malformed());
    }
    let mut raw_terms: Vec<(bool, String)> = Vec::new();
    let mut current = String::new();
    let mut negative = false;
    let mut prev: Option<char> = None;
    for ch in compact.chars() {
        let is_sign = ch == '+' || ch == '-';
        if is_sign && !matches!(prev, Some('*') | Some('^') | Some('/')) {
            if !current.is_empty() {
                raw_terms.push((negative, std::mem::take(&mut current)));
                negative = false;
            } else if prev.is_some() && prev != Some('+') && prev != Some('-') {
                return Err(malformed());
            }
            if ch == '-' {
                negative = !negative;
            }
        } else {
            current.push(ch);
        }
        prev = Some(ch);
    }
    if current.is_empty() {
        return Err(malformed());
    }
    raw_terms.push((negative, current));

    let mut out = Vec::new();
    for (negative, body) in raw_terms {
        let mut coeff = Rational::one();
        let mut factors = Vec::new();
        for factor in body.split('*') {
            if factor.is_empty() {
                return Err(malformed());
            }
            let first = factor.chars().next().unwrap_or(' ');
            if first.is_ascii_digit() || first == '-' || first == '+' {
                coeff *= parse_rational(factor).map_err(|_| malformed())?;
                continue;
            }
            let (name, exp) = match factor.split_once('^') {
                Some((n, e)) => (n, e.parse::<u32>().map_err(|_| malformed())?),
                None => (factor, 1),
            };
            if name.is_empty()
                || !name
                    .chars()
                    .all(|c| c.is_alphanumeric() || c == '_' || c == '\'' || c == '.')
            {
                return Err(malformed());
            }
            factors.push((name.to_string(), exp));
        }
        if negative {
            coeff = -coeff;
        }
        out.push((coeff, factors));
    }
    Ok(out)
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_unit() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .factors
            .iter()
            .map(|(g, e)| {
                if *e == 1 {
                    format!("g{g}")
                } else {
                    format!("g{g}^{e}")
                }
            })
            .collect();
        write!(f, "{}", parts.join("*"))
    }
}

/// Signed unit: `(-1)^n` as a rational.
pub(crate) fn sign(negative: bool) -> Rational {
    if negative { int(-1) } else { int(1) }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xy() -> FreeGradedAlgebra {
        FreeGradedAlgebra::new(vec![Generator::new(0, "x", 2), Generator::new(1, "y", 3)]).unwrap()
    }

    fn names(alg: &FreeGradedAlgebra, degree: u32) -> Vec<String> {
        alg.monomial_basis(degree)
            .monomials()
            .iter()
            .map(|m| alg.format_monomial(m))
            .collect()
    }

    #[test]
    fn basis_examples() {
        let alg = xy();
        assert_eq!(names(&alg, 5), vec!["x*y"]);
        assert_eq!(names(&alg, 6), vec!["x^3"]);
        assert_eq!(names(&alg, 0), vec!["1"]);
        assert!(names(&alg, 1).is_empty());
        assert_eq!(alg.basis_size(6), 1);
    }

    #[test]
    fn koszul_signs() {
        let alg = FreeGradedAlgebra::new(vec![
            Generator::new(0, "x", 2),
            Generator::new(1, "y", 3),
            Generator::new(2, "z", 5),
        ])
        .unwrap();
        let x = alg.generator_element(0);
        let y = alg.generator_element(1);
        let z = alg.generator_element(2);
        assert_eq!(alg.format_element(&alg.multiply(&y, &x).unwrap()), "x*y");
        // odd·odd: the reversed product picks up (-1)^{15}
        assert_eq!(alg.format_element(&alg.multiply(&z, &y).unwrap()), "-y*z");
        assert_eq!(alg.format_element(&alg.multiply(&y, &z).unwrap()), "y*z");
        assert!(alg.multiply(&y, &y).unwrap().is_zero());
    }

    #[test]
    fn foreign_generator_rejected() {
        let small = xy();
        let big = FreeGradedAlgebra::new(vec![
            Generator::new(0, "x", 2),
            Generator::new(1, "y", 3),
            Generator::new(2, "w", 4),
        ])
        .unwrap();
        let w = big.generator_element(2);
        assert_eq!(
            small.multiply(&w, &small.generator_element(0)),
            Err(AlgebraError::ForeignGenerator(2))
        );
    }

    #[test]
    fn text_round_trip() {
        let alg = xy();
        let e = alg.parse_element("3/2*x^2*y - x*y*x").unwrap();
        assert_eq!(alg.format_element(&e), "1/2*x^2*y");
        let f = alg.parse_element("-y*x + 2*x*y").unwrap();
        assert_eq!(alg.format_element(&f), "x*y");
        assert_eq!(
            alg.format_element(&alg.parse_element("3 - 3").unwrap()),
            "0"
        );
        assert!(alg.parse_element("x + y").is_err());
        assert!(alg.parse_element("q").is_err());
        assert!(alg.parse_element("x*").is_err());
    }

    #[test]
    fn extension_keeps_positions() {
        let alg = xy();
        let bigger = alg.extended(vec![Generator::new(5, "v", 3)]).unwrap();
        assert_eq!(bigger.generator(2).name, "v");
        assert!(alg.extended(vec![Generator::new(9, "u", 2)]).is_err());
    }
}
