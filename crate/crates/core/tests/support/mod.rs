//! Randomized algebraic and solver properties, 1000 cases per suite, shared by
//! the property tests and the acceptance run.

use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

use ratmodel::dga::{FiniteDga, FreeDga};
use ratmodel::graded_algebra::{Element, FreeGradedAlgebra, Generator};
use ratmodel::les::{Entry, LesInstance, MapKind, MapRef, RankCap, solve_les};
use ratmodel::linalg::{SparseMatrix, solve_linear};
use ratmodel::minimal_model::{BuildConfig, build_minimal_model, verify_model};
use ratmodel::rational::{Rational, frac, int};
use ratmodel::spaces::{
    IntersectionForm, four_manifold, product, projective, sphere, truncated_polynomial,
};

pub const CASES: u32 = 1000;

/// Runs `test` on `CASES` generated inputs; the error names the shrunk counterexample.
fn check<S: Strategy>(
    strategy: &S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    let config = Config {
        cases: CASES,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new(config)
        .run(strategy, test)
        .map_err(|e| e.to_string())
}

fn algebra(degrees: &[u32]) -> FreeGradedAlgebra {
    let gens = degrees
        .iter()
        .enumerate()
        .map(|(i, d)| Generator::new(i as u32, format!("g{i}"), *d))
        .collect();
    FreeGradedAlgebra::new(gens).unwrap()
}

/// A term: coefficient and generator positions whose product forms the monomial.
type Term = (i64, Vec<usize>);

fn term_degree(degrees: &[u32], positions: &[usize]) -> u32 {
    positions.iter().map(|p| degrees[*p % degrees.len()]).sum()
}

fn element(alg: &FreeGradedAlgebra, terms: &[Term]) -> Element {
    let n = alg.num_generators();
    let mut out = Element::zero();
    for (c, positions) in terms {
        let mut t = Element::unit();
        for p in positions {
            t = alg
                .multiply(&t, &alg.generator_element((*p % n) as u32))
                .unwrap();
        }
        out = out.add(&t.scaled(&int(*c))).unwrap();
    }
    out
}

/// Keeps only the terms whose degree matches the first one.
fn homogeneous(degrees: &[u32], terms: Vec<Term>) -> Vec<Term> {
    let Some(first) = terms.first() else {
        return terms;
    };
    let d = term_degree(degrees, &first.1);
    terms
        .into_iter()
        .filter(|t| term_degree(degrees, &t.1) == d)
        .collect()
}

fn terms() -> impl Strategy<Value = Vec<Term>> {
    prop::collection::vec(
        (
            prop_oneof![-3i64..=-1, 1i64..=3],
            prop::collection::vec(0usize..8, 0..=3),
        ),
        1..=4,
    )
}

fn degrees() -> impl Strategy<Value = Vec<u32>> {
    sorted(prop::collection::vec(1u32..=5, 1..=4))
}

/// Generator positions follow degree order, so degree lists are kept sorted.
fn sorted(s: impl Strategy<Value = Vec<u32>>) -> impl Strategy<Value = Vec<u32>> {
    s.prop_map(|mut v| {
        v.sort_unstable();
        v
    })
}

fn sign(degree: u32) -> Rational {
    if degree % 2 == 1 { int(-1) } else { int(1) }
}

/// Number of monomials of `degree`: exponent vectors, odd generators at most once.
fn count_monomials(degrees: &[u32], degree: u32) -> u128 {
    fn go(degrees: &[u32], i: usize, left: u32) -> u128 {
        if i == degrees.len() {
            return u128::from(left == 0);
        }
        let d = degrees[i];
        let max_exp = if d % 2 == 1 { 1 } else { left / d };
        (0..=max_exp.min(left / d))
            .map(|e| go(degrees, i + 1, left - e * d))
            .sum()
    }
    go(degrees, 0, degree)
}

pub fn products_are_graded_commutative() -> Result<(), String> {
    check(&(degrees(), terms(), terms()), |(degs, a, b)| {
        let alg = algebra(&degs);
        let a = homogeneous(&degs, a);
        let b = homogeneous(&degs, b);
        let (x, y) = (element(&alg, &a), element(&alg, &b));
        let (Some(p), Some(q)) = (x.degree(), y.degree()) else {
            return Ok(());
        };
        let xy = alg.multiply(&x, &y).unwrap();
        let yx = alg.multiply(&y, &x).unwrap();
        prop_assert_eq!(xy, yx.scaled(&sign(p * q)));
        Ok(())
    })
}

pub fn products_are_associative() -> Result<(), String> {
    check(
        &(degrees(), terms(), terms(), terms()),
        |(degs, a, b, c)| {
            let alg = algebra(&degs);
            let [x, y, z] = [a, b, c].map(|t| element(&alg, &homogeneous(&degs, t)));
            let left = alg.multiply(&alg.multiply(&x, &y).unwrap(), &z).unwrap();
            let right = alg.multiply(&x, &alg.multiply(&y, &z).unwrap()).unwrap();
            prop_assert_eq!(left, right);
            prop_assert_eq!(alg.multiply(&Element::unit(), &x).unwrap(), x.clone());
            prop_assert_eq!(alg.multiply(&x, &Element::unit()).unwrap(), x);
            Ok(())
        },
    )
}

pub fn odd_elements_square_to_zero() -> Result<(), String> {
    check(&(degrees(), terms()), |(degs, a)| {
        let alg = algebra(&degs);
        let a = homogeneous(&degs, a);
        let x = element(&alg, &a);
        if x.degree().is_some_and(|d| d % 2 == 1) {
            prop_assert!(alg.multiply(&x, &x).unwrap().is_zero());
        }
        Ok(())
    })
}

pub fn basis_matches_exponent_count() -> Result<(), String> {
    check(&(degrees(), 0u32..=14), |(degs, degree)| {
        let alg = algebra(&degs);
        let expected = count_monomials(&degs, degree);
        prop_assert_eq!(alg.basis_size(degree), expected);
        let basis = alg.monomial_basis(degree);
        prop_assert_eq!(basis.len() as u128, expected);
        prop_assert!(basis.monomials().iter().all(|m| m.degree() == degree));
        prop_assert!(basis.monomials().windows(2).all(|w| w[0] != w[1]));
        Ok(())
    })
}

/// Two-stage free DGA: closed generators, then generators whose differential
/// is a random polynomial in the closed ones.
#[derive(Debug, Clone)]
struct TwoStage {
    closed: Vec<u32>,
    images: Vec<Vec<Term>>,
}

fn two_stage() -> impl Strategy<Value = TwoStage> {
    (
        sorted(prop::collection::vec(2u32..=4, 1..=3)),
        prop::collection::vec(terms(), 1..=3),
    )
        .prop_map(|(closed, images)| TwoStage { closed, images })
}

impl TwoStage {
    fn build(&self) -> Option<FreeDga> {
        let base = algebra(&self.closed);
        let mut gens: Vec<Generator> = base.generators().to_vec();
        let mut images = vec![Element::zero(); gens.len()];
        let top = self.closed.iter().copied().max().unwrap_or(0);
        for raw in &self.images {
            let t: Vec<Term> = homogeneous(&self.closed, raw.clone())
                .into_iter()
                .filter(|(_, p)| p.len() >= 2)
                .collect();
            let dy = element(&base, &t);
            let Some(d) = dy.degree() else { continue };
            if d - 1 < top {
                continue;
            }
            let id = gens.len() as u32;
            gens.push(Generator::new(id, format!("y{id}"), d - 1));
            images.push(dy);
        }
        let alg = FreeGradedAlgebra::new(gens).ok()?;
        // New generators sit at or above the top closed degree with larger ids, so
        // the closed generators keep their positions; images are looked up by id.
        let remap: Vec<Element> = alg
            .generators()
            .iter()
            .map(|g| images[g.id as usize].clone())
            .collect();
        FreeDga::new(alg, remap, None).ok()
    }
}

fn check_d_squared_and_leibniz(dga: &FreeDga, a: &[Term], b: &[Term]) -> Result<(), TestCaseError> {
    let alg = dga.algebra();
    if alg.num_generators() == 0 {
        return Ok(());
    }
    let degs: Vec<u32> = alg.generators().iter().map(|g| g.degree).collect();
    let x = element(alg, &homogeneous(&degs, a.to_vec()));
    let y = element(alg, &homogeneous(&degs, b.to_vec()));
    prop_assert!(dga.apply_d(&dga.apply_d(&x)).is_zero());
    let Some(p) = x.degree() else { return Ok(()) };
    let lhs = dga.apply_d(&alg.multiply(&x, &y).unwrap());
    let rhs = alg
        .multiply(&dga.apply_d(&x), &y)
        .unwrap()
        .add(&alg.multiply(&x, &dga.apply_d(&y)).unwrap().scaled(&sign(p)))
        .unwrap();
    prop_assert_eq!(lhs, rhs);
    Ok(())
}

/// Cohomology algebras of simply connected spaces with small minimal models.
fn target(index: usize) -> FiniteDga {
    match index % 14 {
        0 => sphere(2),
        1 => sphere(3),
        2 => sphere(4),
        3 => sphere(5),
        4 => projective(2),
        5 => projective(3),
        6 => projective(4),
        7 => four_manifold(&IntersectionForm::hyperbolic()),
        8 => four_manifold(&IntersectionForm::diagonal(&[1, -1]).unwrap()),
        9 => product(&sphere(2).unwrap(), &sphere(3).unwrap()),
        10 => product(&sphere(3).unwrap(), &sphere(3).unwrap()),
        11 => truncated_polynomial(4, 3),
        12 => four_manifold(&IntersectionForm::diagonal(&[1, 1, 1]).unwrap()),
        _ => four_manifold(&IntersectionForm::diagonal(&[1, 1, -1]).unwrap()),
    }
    .unwrap()
}

/// Elliptic subset of [`target`], cheap through degree 12.
const ELLIPTIC_TARGETS: usize = 12;

pub fn generated_dgas_satisfy_axioms() -> Result<(), String> {
    check(&(two_stage(), terms(), terms()), |(s, a, b)| {
        let Some(dga) = s.build() else { return Ok(()) };
        prop_assert!(dga.validate().is_valid());
        check_d_squared_and_leibniz(&dga, &a, &b)?;
        Ok(())
    })
}

pub fn builder_models_satisfy_axioms() -> Result<(), String> {
    check(&(0usize..14, 4u32..=7, terms(), terms()), |(t, n, a, b)| {
        let model = build_minimal_model(&target(t), BuildConfig::new(n)).unwrap();
        prop_assert!(model.dga().validate().is_valid());
        check_d_squared_and_leibniz(model.dga(), &a, &b)?;
        Ok(())
    })
}

pub fn builder_output_certifies_and_mutations_do_not() -> Result<(), String> {
    check(
        &(0usize..14, 4u32..=7, any::<prop::sample::Index>()),
        |(t, n, pick)| {
            let target = target(t);
            prop_assert!(target.validate().is_valid());
            let model = build_minimal_model(&target, BuildConfig::new(n)).unwrap();
            prop_assert!(verify_model(&model, &target, n).unwrap().passed());

            let images = model.dga().differential_images();
            let non_closed: Vec<u32> = (0..images.len() as u32)
                .filter(|p| !images[*p as usize].is_zero())
                .collect();
            if !non_closed.is_empty() {
                let zeroed = model.with_zeroed_differential(*pick.get(&non_closed));
                prop_assert!(!verify_model(&zeroed, &target, n).unwrap().passed());
            }
            let Some(last) = (images.len() as u32).checked_sub(1) else {
                return Ok(());
            };
            let linear = model.with_linear_term(last).unwrap();
            prop_assert!(!verify_model(&linear, &target, n).unwrap().passed());
            Ok(())
        },
    )
}

pub fn ranks_stable_under_longer_truncation() -> Result<(), String> {
    check(&(0usize..ELLIPTIC_TARGETS), |t| {
        let target = target(t);
        let short = build_minimal_model(&target, BuildConfig::new(8))
            .unwrap()
            .pi_ranks();
        let long = build_minimal_model(&target, BuildConfig::new(12))
            .unwrap()
            .pi_ranks();
        prop_assert_eq!(long.prefix(8), short);
        Ok(())
    })
}

/// A feasible instance: true map ranks, dimensions derived by exactness, some hidden.
#[derive(Debug, Clone)]
struct Feasible {
    instance: LesInstance,
    dims: Vec<usize>,
}

fn feasible() -> impl Strategy<Value = Feasible> {
    (1usize..=4)
        .prop_flat_map(|n| {
            (
                Just(n),
                prop::collection::vec(0usize..=4, 3 * n + 1),
                prop::collection::vec(prop::bool::weighted(0.45), 3 * n),
                prop::collection::vec(0u8..=3, 3 * n),
                any::<bool>(),
                any::<bool>(),
            )
        })
        .prop_map(|(n, mut ranks, hidden, annot, below, above)| {
            if below {
                ranks[0] = 0;
            }
            if above {
                ranks[3 * n] = 0;
            }
            let dims: Vec<usize> = (0..3 * n).map(|i| ranks[i] + ranks[i + 1]).collect();
            let mut instance = LesInstance::unknown(n);
            instance.closed_below = below;
            instance.closed_above = above;
            for i in 0..3 * n {
                let entry = if hidden[i] {
                    Entry::Unknown
                } else {
                    Entry::Known(dims[i])
                };
                let row = match i % 3 {
                    0 => &mut instance.dims_b,
                    1 => &mut instance.dims_e,
                    _ => &mut instance.dims_f,
                };
                row[i / 3] = entry;
            }
            // Annotate the map leaving node i, consistently with the true ranks.
            for i in 0..3 * n - 1 {
                let r = ranks[i + 1];
                let map = MapRef {
                    degree: (i / 3 + 1) as u32,
                    map: [MapKind::BToE, MapKind::EToF, MapKind::FToB][i % 3],
                };
                match annot[i] {
                    1 if r == 0 => instance.zero_maps.push(map),
                    2 => instance.rank_caps.push(RankCap {
                        degree: map.degree,
                        map: map.map,
                        max: r,
                    }),
                    3 => instance.rank_caps.push(RankCap {
                        degree: map.degree,
                        map: map.map,
                        max: r + 1,
                    }),
                    _ => {}
                }
            }
            Feasible { instance, dims }
        })
}

pub fn les_witnesses_certify_every_endpoint() -> Result<(), String> {
    check(&feasible(), |f| {
        let chain = f.instance.to_chain().unwrap();
        let solution = solve_les(&f.instance).unwrap();
        prop_assert_eq!(solution.nodes.len(), f.dims.len());
        for (i, node) in solution.nodes.iter().enumerate() {
            prop_assert!(
                node.interval.contains(f.dims[i]),
                "{} = {} outside {:?}",
                node.label,
                f.dims[i],
                node.interval
            );
            prop_assert!(node.lower_witness.satisfies(&chain));
            prop_assert_eq!(node.lower_witness.dims[i], node.interval.lo);
            match (&node.upper_witness, node.interval.hi) {
                (Some(w), Some(hi)) => {
                    prop_assert!(w.satisfies(&chain));
                    prop_assert_eq!(w.dims[i], hi);
                }
                (None, None) => prop_assert!(node.unbounded),
                other => prop_assert!(false, "witness/interval mismatch: {:?}", other),
            }
            if node.known {
                prop_assert_eq!(node.interval.lo, f.dims[i]);
                prop_assert_eq!(node.interval.hi, Some(f.dims[i]));
            }
        }
        Ok(())
    })
}

fn matrix() -> impl Strategy<Value = Vec<Vec<Rational>>> {
    let entry = prop_oneof![
        4 => Just(int(0)),
        3 => (-3i64..=3).prop_map(int),
        1 => ((-9i64..=9), (1i64..=7)).prop_map(|(p, q)| frac(p, q)),
        1 => (any::<i64>(), any::<i64>()).prop_map(|(a, b)| int(a) * int(b)),
    ];
    (0usize..=7, 1usize..=7).prop_flat_map(move |(r, c)| {
        prop::collection::vec(prop::collection::vec(entry.clone(), c), r)
    })
}

pub fn rank_plus_nullity_is_column_count() -> Result<(), String> {
    check(&matrix(), |rows| {
        prop_assume!(!rows.is_empty());
        let m = SparseMatrix::from_rows(&rows).unwrap();
        let s = solve_linear(&m);
        prop_assert_eq!(s.rank() + s.nullity(), m.ncols());
        prop_assert!(s.rank() <= m.nrows());
        for &f in s.free_columns() {
            let v = s.kernel_vector(f);
            prop_assert!(m.apply(&v).unwrap().is_zero());
            prop_assert_eq!(v.get(f), int(1));
        }
        // Row rank equals column rank.
        let cols: Vec<Vec<Rational>> = (0..m.ncols())
            .map(|j| (0..m.nrows()).map(|i| rows[i][j].clone()).collect())
            .collect();
        let t = solve_linear(&SparseMatrix::from_rows(&cols).unwrap());
        prop_assert_eq!(t.rank(), s.rank());
        Ok(())
    })
}

pub type Suite = (&'static str, fn() -> Result<(), String>);

/// Every property suite, by name.
pub const SUITES: [Suite; 10] = [
    ("graded commutativity", products_are_graded_commutative),
    ("associativity and unit", products_are_associative),
    ("odd squares vanish", odd_elements_square_to_zero),
    ("monomial basis count", basis_matches_exponent_count),
    (
        "d² = 0 and Leibniz on generated DGAs",
        generated_dgas_satisfy_axioms,
    ),
    (
        "d² = 0 and Leibniz on built models",
        builder_models_satisfy_axioms,
    ),
    (
        "certification passes on models, fails on mutations",
        builder_output_certifies_and_mutations_do_not,
    ),
    (
        "rank stability, degree 8 vs 12",
        ranks_stable_under_longer_truncation,
    ),
    (
        "exact-sequence witnesses",
        les_witnesses_certify_every_endpoint,
    ),
    (
        "rank + nullity = columns",
        rank_plus_nullity_is_column_count,
    ),
];
