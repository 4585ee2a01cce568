//! Sparse exact linear algebra over the rationals.
//!
//! Forward elimination runs fraction-free on primitive integer rows; kernel
//! vectors and preimages are recovered by sparse back-substitution in
//! rationals. Every cohomology and model-building step reduces to
//! [`solve_linear`] plus the small [`Echelon`] helper.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
}

/// Sparse vector with strictly increasing indices and no stored zeros.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct SparseVector {
    entries: Vec<(usize, Rational)>,
}

impl SparseVector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn unit(index: usize) -> Self {
        Self {
            entries: vec![(index, Rational::one())],
        }
    }

    /// Builds a vector from arbitrary (index, value) pairs; repeated indices are summed.
    pub fn from_entries(entries: impl IntoIterator<Item = (usize, Rational)>) -> Self {
        let mut entries: Vec<(usize, Rational)> = entries.into_iter().collect();
        entries.sort_by_key(|(i, _)| *i);
        let mut merged: Vec<(usize, Rational)> = Vec::with_capacity(entries.len());
        for (i, v) in entries {
            match merged.last_mut() {
                Some((j, w)) if *j == i => *w += v,
                _ => merged.push((i, v)),
            }
        }
        merged.retain(|(_, v)| !v.is_zero());
        Self { entries: merged }
    }

    pub fn from_dense(values: &[Rational]) -> Self {
        Self {
            entries: values
                .iter()
                .enumerate()
                .filter(|(_, v)| !v.is_zero())
                .map(|(i, v)| (i, v.clone()))
                .collect(),
        }
    }

    pub fn to_dense(&self, dim: usize) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); dim];
        for (i, v) in &self.entries {
            out[*i] = v.clone();
        }
        out
    }

    pub fn get(&self, index: usize) -> Rational {
        match self.entries.binary_search_by_key(&index, |(i, _)| *i) {
            Ok(pos) => self.entries[pos].1.clone(),
            Err(_) => Rational::zero(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &Rational)> {
        self.entries.iter().map(|(i, v)| (*i, v))
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn leading(&self) -> Option<(usize, &Rational)> {
        self.entries.first().map(|(i, v)| (*i, v))
    }

    pub fn max_index(&self) -> Option<usize> {
        self.entries.last().map(|(i, _)| *i)
    }

    pub fn scaled(&self, factor: &Rational) -> Self {
        if factor.is_zero() {
            return Self::new();
        }
        Self {
            entries: self.entries.iter().map(|(i, v)| (*i, v * factor)).collect(),
        }
    }

    /// Returns `self + factor * other`.
    pub fn add_scaled(&self, factor: &Rational, other: &SparseVector) -> Self {
        if factor.is_zero() {
            return self.clone();
        }
        let mut out = Vec::with_capacity(self.entries.len() + other.entries.len());
        let (mut a, mut b) = (
            self.entries.iter().peekable(),
            other.entries.iter().peekable(),
        );
        loop {
            match (a.peek(), b.peek()) {
                (Some((i, x)), Some((j, y))) => match i.cmp(j) {
                    Ordering::Less => {
                        out.push((*i, x.clone()));
                        a.next();
                    }
                    Ordering::Greater => {
                        out.push((*j, factor * y));
                        b.next();
                    }
                    Ordering::Equal => {
                        let s = x + factor * y;
                        if !s.is_zero() {
                            out.push((*i, s));
                        }
                        a.next();
                        b.next();
                    }
                },
                (Some((i, x)), None) => {
                    out.push((*i, x.clone()));
                    a.next();
                }
                (None, Some((j, y))) => {
                    out.push((*j, factor * y));
                    b.next();
                }
                (None, None) => break,
            }
        }
        Self { entries: out }
    }

    pub fn dot(&self, other: &SparseVector) -> Rational {
        let mut acc = Rational::zero();
        let (mut a, mut b) = (
            self.entries.iter().peekable(),
            other.entries.iter().peekable(),
        );
        while let (Some((i, x)), Some((j, y))) = (a.peek(), b.peek()) {
            match i.cmp(j) {
                Ordering::Less => {
                    a.next();
                }
                Ordering::Greater => {
                    b.next();
                }
                Ordering::Equal => {
                    acc += x * y;
                    a.next();
                    b.next();
                }
            }
        }
        acc
    }

    /// Keeps only the coordinates listed in `positions` (sorted), reindexed to their rank.
    pub fn restrict(&self, positions: &[usize]) -> Self {
        Self {
            entries: self
                .entries
                .iter()
                .filter_map(|(i, v)| positions.binary_search(i).ok().map(|p| (p, v.clone())))
                .collect(),
        }
    }
}

/// Column-major sparse matrix: column `j` is the image of the `j`-th source basis vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    columns: Vec<SparseVector>,
}

impl SparseMatrix {
    pub fn zero(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            columns: vec![SparseVector::new(); ncols],
        }
    }

    pub fn from_columns(nrows: usize, columns: Vec<SparseVector>) -> Result<Self, LinalgError> {
        for col in &columns {
            if let Some(max) = col.max_index()
                && max >= nrows
            {
                return Err(LinalgError::IndexOutOfRange {
                    index: max,
                    dim: nrows,
                });
            }
        }
        Ok(Self {
            nrows,
            ncols: columns.len(),
            columns,
        })
    }

    /// Builds from dense rows; every row must have the same length.
    pub fn from_rows(rows: &[Vec<Rational>]) -> Result<Self, LinalgError> {
        let ncols = rows.first().map_or(0, Vec::len);
        let mut columns = vec![Vec::new(); ncols];
        for (r, row) in rows.iter().enumerate() {
            if row.len() != ncols {
                return Err(LinalgError::DimensionMismatch {
                    expected: ncols,
                    found: row.len(),
                });
            }
            for (c, v) in row.iter().enumerate() {
                if !v.is_zero() {
                    columns[c].push((r, v.clone()));
                }
            }
        }
        Ok(Self {
            nrows: rows.len(),
            ncols,
            columns: columns
                .into_iter()
                .map(|entries| SparseVector { entries })
                .collect(),
        })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            nrows: n,
            ncols: n,
            columns: (0..n).map(SparseVector::unit).collect(),
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn column(&self, j: usize) -> &SparseVector {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[SparseVector] {
        &self.columns
    }

    pub fn get(&self, row: usize, col: usize) -> Rational {
        self.columns[col].get(row)
    }

    pub fn to_dense_rows(&self) -> Vec<Vec<Rational>> {
        let mut rows = vec![vec![Rational::zero(); self.ncols]; self.nrows];
        for (c, col) in self.columns.iter().enumerate() {
            for (r, v) in col.iter() {
                rows[r][c] = v.clone();
            }
        }
        rows
    }

    pub fn apply(&self, x: &SparseVector) -> Result<SparseVector, LinalgError> {
        if let Some(max) = x.max_index()
            && max >= self.ncols
        {
            return Err(LinalgError::IndexOutOfRange {
                index: max,
                dim: self.ncols,
            });
        }
        let mut terms = Vec::new();
        for (j, a) in x.iter() {
            for (i, m) in self.columns[j].iter() {
                terms.push((i, a * m));
            }
        }
        Ok(SparseVector::from_entries(terms))
    }

    /// Matrix product `self * rhs`.
    pub fn compose(&self, rhs: &SparseMatrix) -> Result<SparseMatrix, LinalgError> {
        if rhs.nrows != self.ncols {
            return Err(LinalgError::DimensionMismatch {
                expected: self.ncols,
                found: rhs.nrows,
            });
        }
        let columns = rhs
            .columns
            .iter()
            .map(|c| self.apply(c))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(SparseMatrix {
            nrows: self.nrows,
            ncols: rhs.ncols,
            columns,
        })
    }

    pub fn is_zero(&self) -> bool {
        self.columns.iter().all(SparseVector::is_zero)
    }

    fn integer_rows(&self) -> Vec<IntRow<BigInt>> {
        let mut rows: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); self.nrows];
        for (c, col) in self.columns.iter().enumerate() {
            for (r, v) in col.iter() {
                rows[r].push((c, v.clone()));
            }
        }
        rows.into_iter()
            .filter(|r| !r.is_empty())
            .map(IntRow::from_rational)
            .collect()
    }
}

/// Integer coefficient arithmetic for elimination; `None` signals overflow.
trait Coeff: Clone + Sized {
    fn is_zero(&self) -> bool;
    fn is_one(&self) -> bool;
    fn is_negative(&self) -> bool;
    fn gcd(&self, other: &Self) -> Self;
    fn div_exact(&self, other: &Self) -> Self;
    fn neg(&self) -> Option<Self>;
    /// `u * a - w * b`
    fn mul_sub(u: &Self, a: &Self, w: &Self, b: &Self) -> Option<Self>;
    fn mul(&self, other: &Self) -> Option<Self>;
    fn to_rational(&self) -> Rational;
}

impl Coeff for i128 {
    fn is_zero(&self) -> bool {
        *self == 0
    }
    fn is_one(&self) -> bool {
        *self == 1
    }
    fn is_negative(&self) -> bool {
        *self < 0
    }
    fn gcd(&self, other: &Self) -> Self {
        Integer::gcd(self, other)
    }
    fn div_exact(&self, other: &Self) -> Self {
        self / other
    }
    fn neg(&self) -> Option<Self> {
        self.checked_neg()
    }
    fn mul_sub(u: &Self, a: &Self, w: &Self, b: &Self) -> Option<Self> {
        u.checked_mul(*a)?.checked_sub(w.checked_mul(*b)?)
    }
    fn mul(&self, other: &Self) -> Option<Self> {
        self.checked_mul(*other)
    }
    fn to_rational(&self) -> Rational {
        Rational::from_integer(BigInt::from(*self))
    }
}

impl Coeff for BigInt {
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_one(&self) -> bool {
        One::is_one(self)
    }
    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
    }
    fn gcd(&self, other: &Self) -> Self {
        Integer::gcd(self, other)
    }
    fn div_exact(&self, other: &Self) -> Self {
        self / other
    }
    fn neg(&self) -> Option<Self> {
        Some(-self)
    }
    fn mul_sub(u: &Self, a: &Self, w: &Self, b: &Self) -> Option<Self> {
        Some(u * a - w * b)
    }
    fn mul(&self, other: &Self) -> Option<Self> {
        Some(self * other)
    }
    fn to_rational(&self) -> Rational {
        Rational::from_integer(self.clone())
    }
}

/// Row with integer entries, sorted columns, content 1 and positive lead.
#[derive(Debug, Clone)]
struct IntRow<T> {
    entries: Vec<(usize, T)>,
}

impl IntRow<BigInt> {
    fn from_rational(entries: Vec<(usize, Rational)>) -> Self {
        let lcm = entries
            .iter()
            .fold(BigInt::one(), |acc, (_, v)| acc.lcm(v.denom()));
        let entries = entries
            .into_iter()
            .map(|(c, v)| (c, v.numer() * (&lcm / v.denom())))
            .collect();
        let mut row = Self { entries };
        row.normalize().expect("big integers do not overflow");
        row
    }

    fn to_small(&self) -> Option<IntRow<i128>> {
        use num_traits::ToPrimitive;
        let entries = self
            .entries
            .iter()
            .map(|(c, v)| v.to_i128().filter(|x| *x != i128::MIN).map(|x| (*c, x)))
            .collect::<Option<Vec<_>>>()?;
        Some(IntRow { entries })
    }
}

impl<T: Coeff> IntRow<T> {
    fn normalize(&mut self) -> Option<()> {
        let mut g: Option<T> = None;
        for (_, v) in &self.entries {
            let next = match &g {
                None => v.gcd(v),
                Some(g) => g.gcd(v),
            };
            let done = next.is_one();
            g = Some(next);
            if done {
                break;
            }
        }
        let negate = self.entries.first().is_some_and(|(_, v)| v.is_negative());
        if let Some(g) = g.filter(|g| !g.is_zero() && !g.is_one()) {
            for (_, v) in &mut self.entries {
                *v = v.div_exact(&g);
            }
        }
        if negate {
            for (_, v) in &mut self.entries {
                *v = v.neg()?;
            }
        }
        Some(())
    }

    fn lead(&self) -> Option<usize> {
        self.entries.first().map(|(c, _)| *c)
    }

    /// Cancels the shared leading column against `pivot`, fraction-free.
    fn eliminate_with(&self, pivot: &IntRow<T>) -> Option<IntRow<T>> {
        let a = &self.entries[0].1;
        let b = &pivot.entries[0].1;
        let g = a.gcd(b);
        let self_mul = b.div_exact(&g);
        let pivot_mul = a.div_exact(&g);
        let mut out = Vec::with_capacity(self.entries.len() + pivot.entries.len());
        let (mut x, mut y) = (
            self.entries[1..].iter().peekable(),
            pivot.entries[1..].iter().peekable(),
        );
        loop {
            match (x.peek(), y.peek()) {
                (Some((i, u)), Some((j, w))) => match i.cmp(j) {
                    Ordering::Less => {
                        out.push((*i, u.mul(&self_mul)?));
                        x.next();
                    }
                    Ordering::Greater => {
                        out.push((*j, w.mul(&pivot_mul)?.neg()?));
                        y.next();
                    }
                    Ordering::Equal => {
                        let s = T::mul_sub(u, &self_mul, w, &pivot_mul)?;
                        if !s.is_zero() {
                            out.push((*i, s));
                        }
                        x.next();
                        y.next();
                    }
                },
                (Some((i, u)), None) => {
                    out.push((*i, u.mul(&self_mul)?));
                    x.next();
                }
                (None, Some((j, w))) => {
                    out.push((*j, w.mul(&pivot_mul)?.neg()?));
                    y.next();
                }
                (None, None) => break,
            }
        }
        let mut row = IntRow { entries: out };
        row.normalize()?;
        Some(row)
    }
}

/// Forward elimination; `None` if the coefficient type overflowed.
fn eliminate<T: Coeff>(
    mut rows: Vec<IntRow<T>>,
    ncols: usize,
) -> Option<(Vec<IntRow<T>>, Vec<Option<usize>>)> {
    rows.sort_by_key(|r| (r.lead(), r.entries.len()));
    let mut pivot_of_column: Vec<Option<usize>> = vec![None; ncols];
    let mut echelon: Vec<IntRow<T>> = Vec::new();
    for mut row in rows {
        while let Some(lead) = row.lead() {
            match pivot_of_column[lead] {
                // the shorter row becomes the pivot, limiting fill-in
                Some(p) if row.entries.len() < echelon[p].entries.len() => {
                    std::mem::swap(&mut row, &mut echelon[p]);
                }
                Some(p) => row = row.eliminate_with(&echelon[p])?,
                None => {
                    pivot_of_column[lead] = Some(echelon.len());
                    echelon.push(row);
                    break;
                }
            }
        }
    }
    Some((echelon, pivot_of_column))
}

#[derive(Debug, Clone)]
enum EchelonRows {
    Small(Vec<IntRow<i128>>),
    Big(Vec<IntRow<BigInt>>),
}

impl EchelonRows {
    fn len(&self) -> usize {
        match self {
            Self::Small(r) => r.len(),
            Self::Big(r) => r.len(),
        }
    }

    fn columns_of(&self, row: usize) -> Vec<usize> {
        match self {
            Self::Small(r) => r[row].entries.iter().map(|(c, _)| *c).collect(),
            Self::Big(r) => r[row].entries.iter().map(|(c, _)| *c).collect(),
        }
    }

    fn lead_of(&self, row: usize) -> usize {
        match self {
            Self::Small(r) => r[row].entries[0].0,
            Self::Big(r) => r[row].entries[0].0,
        }
    }
}

/// Row-echelon decomposition of a matrix, answering rank, kernel, image and preimage queries.
#[derive(Debug, Clone)]
pub struct LinearSolution {
    matrix: SparseMatrix,
    echelon: EchelonRows,
    pivot_of_column: Vec<Option<usize>>,
    rows_containing: Vec<Vec<usize>>,
    pivot_columns: Vec<usize>,
    free_columns: Vec<usize>,
}

/// Row-reduces `matrix` exactly, in machine integers when the entries allow it.
pub fn solve_linear(matrix: &SparseMatrix) -> LinearSolution {
    let ncols = matrix.ncols;
    let rows = matrix.integer_rows();
    let small = rows
        .iter()
        .map(IntRow::to_small)
        .collect::<Option<Vec<_>>>()
        .and_then(|small| eliminate(small, ncols));
    let (echelon, pivot_of_column) = match small {
        Some((echelon, pivots)) => (EchelonRows::Small(echelon), pivots),
        None => {
            let (echelon, pivots) = eliminate(rows, ncols).expect("big integers do not overflow");
            (EchelonRows::Big(echelon), pivots)
        }
    };
    let mut rows_containing = vec![Vec::new(); ncols];
    for r in 0..echelon.len() {
        for c in echelon.columns_of(r).into_iter().skip(1) {
            rows_containing[c].push(r);
        }
    }
    let (pivot_columns, free_columns) = (0..ncols).partition(|c| pivot_of_column[*c].is_some());
    LinearSolution {
        matrix: matrix.clone(),
        echelon,
        pivot_of_column,
        rows_containing,
        pivot_columns,
        free_columns,
    }
}

impl LinearSolution {
    pub fn rank(&self) -> usize {
        self.echelon.len()
    }

    pub fn nullity(&self) -> usize {
        self.free_columns.len()
    }

    pub fn nrows(&self) -> usize {
        self.matrix.nrows
    }

    pub fn ncols(&self) -> usize {
        self.matrix.ncols
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    /// Columns whose images form the returned image basis.
    pub fn pivot_columns(&self) -> &[usize] {
        &self.pivot_columns
    }

    /// Columns parametrizing the kernel: projection onto them is injective on the kernel.
    pub fn free_columns(&self) -> &[usize] {
        &self.free_columns
    }

    /// The kernel vector with coordinate 1 at `free` and 0 at every other free column.
    pub fn kernel_vector(&self, free: usize) -> SparseVector {
        assert!(
            self.pivot_of_column[free].is_none(),
            "column {free} is a pivot column"
        );
        if let EchelonRows::Small(rows) = &self.echelon
            && let Some(v) = self.back_substitute_small(rows, free)
        {
            return v;
        }
        match &self.echelon {
            EchelonRows::Small(rows) => self.back_substitute(rows, free),
            EchelonRows::Big(rows) => self.back_substitute(rows, free),
        }
    }

    /// Rows touched by back-substitution from `free`, highest lead first.
    fn substitution_order(
        &self,
        free: usize,
        mut visit: impl FnMut(usize) -> Option<bool>,
    ) -> Option<()> {
        let mut heap: BinaryHeap<(usize, usize)> = BinaryHeap::new();
        let push_rows = |col: usize, heap: &mut BinaryHeap<(usize, usize)>| {
            for &r in &self.rows_containing[col] {
                heap.push((self.echelon.lead_of(r), r));
            }
        };
        push_rows(free, &mut heap);
        let mut last = None;
        while let Some((lead, r)) = heap.pop() {
            if last == Some(r) {
                continue;
            }
            last = Some(r);
            if visit(r)? {
                push_rows(lead, &mut heap);
            }
        }
        Some(())
    }

    fn back_substitute<T: Coeff>(&self, rows: &[IntRow<T>], free: usize) -> SparseVector {
        let mut x: HashMap<usize, Rational> = HashMap::new();
        x.insert(free, Rational::one());
        self.substitution_order(free, |r| {
            let row = &rows[r];
            let mut s = Rational::zero();
            for (c, a) in &row.entries[1..] {
                if let Some(v) = x.get(c) {
                    s += v * a.to_rational();
                }
            }
            if s.is_zero() {
                return Some(false);
            }
            let value = -s / row.entries[0].1.to_rational();
            x.insert(row.entries[0].0, value);
            Some(true)
        });
        SparseVector::from_entries(x)
    }

    /// Back-substitution over a common denominator in machine integers; `None` on overflow.
    fn back_substitute_small(&self, rows: &[IntRow<i128>], free: usize) -> Option<SparseVector> {
        let mut numer = vec![0i128; self.matrix.ncols];
        let mut touched = vec![free];
        let mut denom: i128 = 1;
        numer[free] = 1;
        self.substitution_order(free, |r| {
            let row = &rows[r];
            let mut s: i128 = 0;
            for (c, a) in &row.entries[1..] {
                let v = numer[*c];
                if v != 0 {
                    s = s.checked_add(v.checked_mul(*a)?)?;
                }
            }
            if s == 0 {
                return Some(false);
            }
            let (lead, a) = row.entries[0];
            let g = Integer::gcd(&s, &a);
            let scale = a / g;
            if scale != 1 {
                for &c in &touched {
                    numer[c] = numer[c].checked_mul(scale)?;
                }
                denom = denom.checked_mul(scale)?;
            }
            numer[lead] = (s / g).checked_neg()?;
            touched.push(lead);
            Some(true)
        })?;
        let denom = BigInt::from(denom);
        Some(SparseVector::from_entries(touched.into_iter().map(|c| {
            (c, Rational::new(BigInt::from(numer[c]), denom.clone()))
        })))
    }

    pub fn kernel_basis(&self) -> Vec<SparseVector> {
        self.free_columns
            .iter()
            .map(|&f| self.kernel_vector(f))
            .collect()
    }

    pub fn image_basis(&self) -> Vec<SparseVector> {
        self.pivot_columns
            .iter()
            .map(|&c| self.matrix.columns[c].clone())
            .collect()
    }

    /// Finds `x` with `Mx = b`, supported on the pivot columns, or `None` if `b` is not in the image.
    pub fn preimage(&self, b: &SparseVector) -> Result<Option<SparseVector>, LinalgError> {
        if let Some(max) = b.max_index()
            && max >= self.matrix.nrows
        {
            return Err(LinalgError::IndexOutOfRange {
                index: max,
                dim: self.matrix.nrows,
            });
        }
        if b.is_zero() {
            return Ok(Some(SparseVector::new()));
        }
        let mut columns: Vec<SparseVector> = self.image_basis();
        let rhs_col = columns.len();
        columns.push(b.clone());
        let augmented = SparseMatrix::from_columns(self.matrix.nrows, columns)?;
        let solution = solve_linear(&augmented);
        if solution.free_columns() != [rhs_col] {
            return Ok(None);
        }
        let k = solution.kernel_vector(rhs_col);
        let x = SparseVector::from_entries(
            k.iter()
                .filter(|(i, _)| *i != rhs_col)
                .map(|(i, v)| (self.pivot_columns[i], -v.clone())),
        );
        Ok(Some(x))
    }
}

/// Incrementally maintained echelon basis of a subspace, leads normalized to 1.
#[derive(Debug, Clone, Default)]
pub struct Echelon {
    rows: Vec<SparseVector>,
    pivot_of: HashMap<usize, usize>,
}

impl Echelon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Reduces `v` until its remaining entries avoid every lead column.
    pub fn reduce(&self, v: &SparseVector) -> SparseVector {
        let mut current = v.clone();
        let mut start = 0usize;
        loop {
            let next = current
                .entries
                .iter()
                .find(|(c, _)| *c >= start && self.pivot_of.contains_key(c))
                .map(|(c, a)| (*c, a.clone()));
            match next {
                Some((c, a)) => {
                    let row = &self.rows[self.pivot_of[&c]];
                    current = current.add_scaled(&-a, row);
                    start = c + 1;
                }
                None => return current,
            }
        }
    }

    /// Adds `v` to the span; returns the new lead column if `v` was independent.
    pub fn insert(&mut self, v: &SparseVector) -> Option<usize> {
        let reduced = self.reduce(v);
        let (lead, coeff) = reduced.leading()?;
        let normalized = reduced.scaled(&(Rational::one() / coeff));
        self.pivot_of.insert(lead, self.rows.len());
        self.rows.push(normalized);
        Some(lead)
    }

    pub fn contains(&self, v: &SparseVector) -> bool {
        self.reduce(v).is_zero()
    }

    pub fn leads(&self) -> impl Iterator<Item = usize> + '_ {
        self.rows.iter().filter_map(|r| r.leading().map(|(c, _)| c))
    }

    pub fn is_lead(&self, col: usize) -> bool {
        self.pivot_of.contains_key(&col)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    fn m(rows: &[&[i64]]) -> SparseMatrix {
        let rows: Vec<Vec<Rational>> = rows
            .iter()
            .map(|r| r.iter().map(|&v| int(v)).collect())
            .collect();
        SparseMatrix::from_rows(&rows).unwrap()
    }

    #[test]
    fn identity_has_full_rank() {
        let s = solve_linear(&SparseMatrix::identity(2));
        assert_eq!(s.rank(), 2);
        assert!(s.kernel_basis().is_empty());
        assert_eq!(s.image_basis().len(), 2);
    }

    #[test]
    fn zero_matrix() {
        let s = solve_linear(&SparseMatrix::zero(3, 4));
        assert_eq!(s.rank(), 0);
        assert_eq!(s.kernel_basis().len(), 4);
    }

    #[test]
    fn rank_one_kernel() {
        let s = solve_linear(&m(&[&[1, 2], &[2, 4]]));
        assert_eq!(s.rank(), 1);
        let k = s.kernel_basis();
        assert_eq!(k.len(), 1);
        // proportional to (2, -1)
        let v = &k[0];
        assert_eq!(v.get(0) * int(-1), v.get(1) * int(2));
        assert!(!v.is_zero());
    }

    #[test]
    fn preimage_consistent_with_image() {
        let a = m(&[&[1, 2, 0], &[0, 1, 1], &[1, 3, 1]]);
        let s = solve_linear(&a);
        assert_eq!(s.rank(), 2);
        let b = SparseVector::from_dense(&[int(3), int(4), int(7)]);
        let x = s.preimage(&b).unwrap().unwrap();
        assert_eq!(a.apply(&x).unwrap(), b);
        let off = SparseVector::from_dense(&[int(1), int(0), int(0)]);
        assert!(s.preimage(&off).unwrap().is_none());
        for v in s.image_basis() {
            assert!(s.preimage(&v).unwrap().is_some());
        }
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let rows = vec![vec![int(1), int(2)], vec![int(1)]];
        assert!(matches!(
            SparseMatrix::from_rows(&rows),
            Err(LinalgError::DimensionMismatch { .. })
        ));
        let s = solve_linear(&SparseMatrix::identity(2));
        assert!(s.preimage(&SparseVector::unit(5)).is_err());
    }

    #[test]
    fn echelon_reduction() {
        let mut e = Echelon::new();
        assert_eq!(
            e.insert(&SparseVector::from_dense(&[int(0), int(2), int(4)])),
            Some(1)
        );
        assert_eq!(
            e.insert(&SparseVector::from_dense(&[int(0), int(1), int(2)])),
            None
        );
        assert!(e.contains(&SparseVector::from_dense(&[int(0), int(3), int(6)])));
        assert_eq!(e.rank(), 1);
    }
}
