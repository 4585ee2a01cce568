//! Elliptic/hyperbolic classification from homotopy ranks, Betti numbers and
//! a category bound, plus finite-window growth statistics.
//!
//! A space with finite-dimensional rational homotopy satisfies
//! `dim π_even ≤ dim π_odd ≤ cat` and `χ ≥ 0`. Hyperbolic verdicts come from
//! a violation of one of these inequalities, which is final because the
//! totals only grow with the truncation. Elliptic verdicts additionally
//! require the ranks to vanish on the window `[2n, N]` (`n` the formal
//! dimension), which an elliptic space must satisfy; seeing it at a finite
//! truncation is evidence rather than proof, and the verdict says so.

use serde::Serialize;
use thiserror::Error;

use crate::minimal_model::RankSequence;
use crate::spaces::BettiData;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DichotomyError {
    #[error("category bound must be at least 1")]
    ZeroCat,
    #[error("truncation {truncation} is below the formal dimension {formal_dimension}")]
    InsufficientTruncation {
        truncation: u32,
        formal_dimension: u32,
    },
    #[error("growth statistics need truncation at least {required}, got {truncation}")]
    GrowthTruncation { truncation: u32, required: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CatSource {
    UserSupplied,
    /// Closed simply connected 4-manifolds have category at most 2.
    FourManifoldDefault,
    /// Half the formal dimension, rounded down: a heuristic upper bound.
    HalfDimensionDefault,
}

/// Upper bound on the Lusternik–Schnirelmann category.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CatBound {
    pub value: usize,
    pub source: CatSource,
}

impl CatBound {
    pub fn user(value: usize) -> Result<Self, DichotomyError> {
        if value == 0 {
            return Err(DichotomyError::ZeroCat);
        }
        Ok(Self {
            value,
            source: CatSource::UserSupplied,
        })
    }

    /// 2 for formal dimension 4, otherwise `max(1, n / 2)`.
    pub fn default_for(formal_dimension: u32) -> Self {
        if formal_dimension == 4 {
            Self {
                value: 2,
                source: CatSource::FourManifoldDefault,
            }
        } else {
            Self {
                value: (formal_dimension as usize / 2).max(1),
                source: CatSource::HalfDimensionDefault,
            }
        }
    }

    /// The user value if given, else [`CatBound::default_for`].
    pub fn resolve(user: Option<usize>, formal_dimension: u32) -> Result<Self, DichotomyError> {
        match user {
            Some(v) => Self::user(v),
            None => Ok(Self::default_for(formal_dimension)),
        }
    }
}

/// Alternating sum of Betti numbers.
pub fn euler_characteristic(betti: &BettiData) -> i64 {
    betti
        .numbers()
        .iter()
        .enumerate()
        .map(|(k, &b)| if k % 2 == 0 { b as i64 } else { -(b as i64) })
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Elliptic,
    Hyperbolic,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Even,
    Odd,
}

/// Why a verdict was reached, with the numbers needed to re-check it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// Cumulative rank of one parity through `degree` exceeds the category bound.
    RankExceedsCat {
        parity: Parity,
        degree: u32,
        cumulative: usize,
        cat: usize,
    },
    NegativeEulerCharacteristic {
        euler: i64,
    },
    /// No generators in `[window_start, truncation]` and both inequalities hold.
    Stabilized {
        window_start: u32,
        truncation: u32,
        even_total: usize,
        odd_total: usize,
        cat: usize,
        euler: i64,
    },
    /// Truncation below `2n`: the stabilization window is empty.
    WindowNotReached {
        truncation: u32,
        required: u32,
    },
    /// Ranks are nonzero at `degree ≥ 2n` without any inequality failing yet.
    GeneratorsInWindow {
        degree: u32,
        rank: usize,
    },
    /// Ranks stabilized but `even_total > odd_total`.
    EvenExceedsOdd {
        even_total: usize,
        odd_total: usize,
    },
}

impl std::fmt::Display for Witness {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::RankExceedsCat {
                parity,
                degree,
                cumulative,
                cat,
            } => {
                let p = match parity {
                    Parity::Even => "even",
                    Parity::Odd => "odd",
                };
                write!(
                    f,
                    "dim π_{p} = {cumulative} > cat = {cat} (reached in degree {degree})"
                )
            }
            Self::NegativeEulerCharacteristic { euler } => write!(f, "χ = {euler} < 0"),
            Self::Stabilized {
                window_start,
                truncation,
                even_total,
                odd_total,
                cat,
                euler,
            } => write!(
                f,
                "no generators in degrees {window_start}..={truncation}; {even_total} ≤ {odd_total} ≤ cat = {cat}, χ = {euler} (stabilization heuristic)"
            ),
            Self::WindowNotReached {
                truncation,
                required,
            } => write!(
                f,
                "truncation {truncation} below {required}; stabilization cannot be observed"
            ),
            Self::GeneratorsInWindow { degree, rank } => {
                write!(
                    f,
                    "{rank} generators in degree {degree}, inside the stabilization window"
                )
            }
            Self::EvenExceedsOdd {
                even_total,
                odd_total,
            } => write!(f, "dim π_even = {even_total} > dim π_odd = {odd_total}"),
        }
    }
}

impl Witness {
    /// Re-derives the witness from raw data by independent summation.
    pub fn recheck(&self, ranks: &RankSequence, betti: &BettiData) -> bool {
        let sum_parity = |parity: Parity, through: u32| -> usize {
            (0..=through.min(ranks.truncation()))
                .filter(|k| (k % 2 == 0) == (parity == Parity::Even))
                .map(|k| ranks.get(k))
                .sum()
        };
        let euler = euler_characteristic(betti);
        match self {
            Self::RankExceedsCat {
                parity,
                degree,
                cumulative,
                cat,
            } => {
                *degree <= ranks.truncation()
                    && sum_parity(*parity, *degree) == *cumulative
                    && cumulative > cat
            }
            Self::NegativeEulerCharacteristic { euler: e } => *e == euler && euler < 0,
            Self::Stabilized {
                window_start,
                truncation,
                even_total,
                odd_total,
                cat,
                euler: e,
            } => {
                *truncation == ranks.truncation()
                    && window_start <= truncation
                    && (*window_start..=*truncation).all(|k| ranks.get(k) == 0)
                    && sum_parity(Parity::Even, *truncation) == *even_total
                    && sum_parity(Parity::Odd, *truncation) == *odd_total
                    && even_total <= odd_total
                    && odd_total <= cat
                    && *e == euler
                    && euler >= 0
            }
            Self::WindowNotReached {
                truncation,
                required,
            } => *truncation == ranks.truncation() && truncation < required,
            Self::GeneratorsInWindow { degree, rank } => ranks.get(*degree) == *rank && *rank > 0,
            Self::EvenExceedsOdd {
                even_total,
                odd_total,
            } => {
                sum_parity(Parity::Even, ranks.truncation()) == *even_total
                    && sum_parity(Parity::Odd, ranks.truncation()) == *odd_total
                    && even_total > odd_total
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DichotomyVerdict {
    pub verdict: Verdict,
    pub witness: Witness,
    pub cat: CatBound,
    pub euler: i64,
    pub even_total: usize,
    pub odd_total: usize,
    /// Elliptic verdicts rest on observing stabilization at a finite truncation.
    pub heuristic: bool,
    pub growth: Option<GrowthReport>,
}

/// Classifies from ranks, Betti numbers and a category bound.
pub fn classify(
    ranks: &RankSequence,
    betti: &BettiData,
    cat: CatBound,
) -> Result<DichotomyVerdict, DichotomyError> {
    let n = ranks.formal_dimension();
    let truncation = ranks.truncation();
    if truncation < n {
        return Err(DichotomyError::InsufficientTruncation {
            truncation,
            formal_dimension: n,
        });
    }
    let euler = euler_characteristic(betti);
    let (mut even, mut odd) = (0usize, 0usize);
    let mut hyperbolic = None;
    for k in 0..=truncation {
        let r = ranks.get(k);
        let (parity, total) = if k % 2 == 0 {
            even += r;
            (Parity::Even, even)
        } else {
            odd += r;
            (Parity::Odd, odd)
        };
        if hyperbolic.is_none() && total > cat.value {
            hyperbolic = Some(Witness::RankExceedsCat {
                parity,
                degree: k,
                cumulative: total,
                cat: cat.value,
            });
        }
    }
    if hyperbolic.is_none() && euler < 0 {
        hyperbolic = Some(Witness::NegativeEulerCharacteristic { euler });
    }
    let window_start = 2 * n.max(1);
    let (verdict, witness) = if let Some(w) = hyperbolic {
        (Verdict::Hyperbolic, w)
    } else if truncation < window_start {
        (
            Verdict::Inconclusive,
            Witness::WindowNotReached {
                truncation,
                required: window_start,
            },
        )
    } else if let Some(degree) = (window_start..=truncation).find(|&k| ranks.get(k) > 0) {
        (
            Verdict::Inconclusive,
            Witness::GeneratorsInWindow {
                degree,
                rank: ranks.get(degree),
            },
        )
    } else if even > odd {
        (
            Verdict::Inconclusive,
            Witness::EvenExceedsOdd {
                even_total: even,
                odd_total: odd,
            },
        )
    } else {
        (
            Verdict::Elliptic,
            Witness::Stabilized {
                window_start,
                truncation,
                even_total: even,
                odd_total: odd,
                cat: cat.value,
                euler,
            },
        )
    };
    Ok(DichotomyVerdict {
        verdict,
        heuristic: verdict == Verdict::Elliptic,
        witness,
        cat,
        euler,
        even_total: even,
        odd_total: odd,
        growth: growth_report(ranks).ok(),
    })
}

pub const GROWTH_MIN_TRUNCATION: u32 = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthFlag {
    /// Cumulative sums constant over the last window `[N-2, N]`.
    Finite,
    /// Strictly increasing from degree 3 on, every defined window ratio above 1.
    Increasing,
    Irregular,
}

/// `s_k / s_{k-2}`, undefined when `s_{k-2} = 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowRatio {
    pub degree: u32,
    pub numerator: usize,
    pub denominator: usize,
    pub value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthReport {
    /// `s_k = Σ_{i ≤ k} ranks[i]` for `k = 0..=N`.
    pub cumulative: Vec<usize>,
    /// One entry per `k = 2..=N`.
    pub ratios: Vec<WindowRatio>,
    pub flag: GrowthFlag,
}

/// Cumulative sums, windowed ratios and a monotonicity flag; statistics only.
pub fn growth_report(ranks: &RankSequence) -> Result<GrowthReport, DichotomyError> {
    let truncation = ranks.truncation();
    if truncation < GROWTH_MIN_TRUNCATION {
        return Err(DichotomyError::GrowthTruncation {
            truncation,
            required: GROWTH_MIN_TRUNCATION,
        });
    }
    let cumulative: Vec<usize> = ranks
        .ranks()
        .iter()
        .scan(0usize, |acc, &r| {
            *acc += r;
            Some(*acc)
        })
        .collect();
    let ratios: Vec<WindowRatio> = (2..cumulative.len())
        .map(|k| {
            let (num, den) = (cumulative[k], cumulative[k - 2]);
            WindowRatio {
                degree: k as u32,
                numerator: num,
                denominator: den,
                value: (den > 0).then(|| num as f64 / den as f64),
            }
        })
        .collect();
    let n = cumulative.len() - 1;
    let flag = if cumulative[n] == cumulative[n - 2] {
        GrowthFlag::Finite
    } else if (3..=n).all(|k| cumulative[k] > cumulative[k - 1])
        && ratios
            .iter()
            .all(|r| r.denominator == 0 || r.numerator > r.denominator)
    {
        GrowthFlag::Increasing
    } else {
        GrowthFlag::Irregular
    };
    Ok(GrowthReport {
        cumulative,
        ratios,
        flag,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ranks(values: &[usize], formal_dimension: u32) -> RankSequence {
        RankSequence::new(values.to_vec(), formal_dimension).unwrap()
    }

    fn padded(values: &[usize], truncation: usize) -> Vec<usize> {
        let mut v = values.to_vec();
        v.resize(truncation + 1, 0);
        v
    }

    #[test]
    fn euler_characteristics() {
        assert_eq!(
            euler_characteristic(&BettiData::new(vec![1, 0, 3, 0, 1])),
            5
        );
        assert_eq!(
            euler_characteristic(&BettiData::new(vec![1, 0, 2, 0, 1])),
            4
        );
        assert_eq!(
            euler_characteristic(&BettiData::new(vec![1, 0, 1, 4, 1])),
            -1
        );
    }

    #[test]
    fn three_cp2_is_hyperbolic_at_degree_two() {
        let r = ranks(&[0, 0, 3, 5, 5, 10, 24], 4);
        let betti = BettiData::new(vec![1, 0, 3, 0, 1]);
        let v = classify(&r, &betti, CatBound::default_for(4)).unwrap();
        assert_eq!(v.verdict, Verdict::Hyperbolic);
        assert_eq!(
            v.witness,
            Witness::RankExceedsCat {
                parity: Parity::Even,
                degree: 2,
                cumulative: 3,
                cat: 2
            }
        );
        assert!(v.witness.recheck(&r, &betti));
        assert_eq!(
            v.witness.to_string(),
            "dim π_even = 3 > cat = 2 (reached in degree 2)"
        );
    }

    #[test]
    fn s2xs2_is_elliptic() {
        let r = ranks(&padded(&[0, 0, 2, 2], 8), 4);
        let betti = BettiData::new(vec![1, 0, 2, 0, 1]);
        let v = classify(&r, &betti, CatBound::user(2).unwrap()).unwrap();
        assert_eq!(v.verdict, Verdict::Elliptic);
        assert!(v.heuristic);
        assert!(v.witness.recheck(&r, &betti));
    }

    #[test]
    fn s2_is_elliptic_with_cat_one() {
        let r = ranks(&padded(&[0, 0, 1, 1], 10), 2);
        let betti = BettiData::new(vec![1, 0, 1]);
        let v = classify(&r, &betti, CatBound::user(1).unwrap()).unwrap();
        assert_eq!(v.verdict, Verdict::Elliptic);
    }

    #[test]
    fn negative_euler_never_elliptic() {
        let r = ranks(&padded(&[0, 0, 1, 1], 10), 4);
        let betti = BettiData::new(vec![1, 0, 1, 4, 1]);
        let v = classify(&r, &betti, CatBound::user(2).unwrap()).unwrap();
        assert_eq!(v.verdict, Verdict::Hyperbolic);
        assert_eq!(
            v.witness,
            Witness::NegativeEulerCharacteristic { euler: -1 }
        );
    }

    #[test]
    fn inconclusive_cases() {
        let betti = BettiData::new(vec![1, 0, 1, 0, 1]);
        let short = ranks(&padded(&[0, 0, 1], 5), 4);
        let v = classify(&short, &betti, CatBound::user(2).unwrap()).unwrap();
        assert_eq!(v.verdict, Verdict::Inconclusive);
        assert!(matches!(
            v.witness,
            Witness::WindowNotReached { required: 8, .. }
        ));
        let late = ranks(&padded(&[0, 0, 1, 0, 0, 0, 0, 0, 0, 1], 10), 4);
        let v = classify(&late, &betti, CatBound::user(2).unwrap()).unwrap();
        assert_eq!(
            v.witness,
            Witness::GeneratorsInWindow { degree: 9, rank: 1 }
        );
        let below = ranks(&[0, 0, 1], 4);
        assert!(matches!(
            classify(&below, &betti, CatBound::user(2).unwrap()),
            Err(DichotomyError::InsufficientTruncation { .. })
        ));
    }

    #[test]
    fn cat_defaults() {
        assert_eq!(CatBound::default_for(4).value, 2);
        assert_eq!(
            CatBound::default_for(4).source,
            CatSource::FourManifoldDefault
        );
        assert_eq!(CatBound::default_for(2).value, 1);
        assert_eq!(CatBound::default_for(8).value, 4);
        assert_eq!(CatBound::user(0), Err(DichotomyError::ZeroCat));
    }

    #[test]
    fn growth_flags() {
        let zero = ranks(&[0; 11], 0);
        let g = growth_report(&zero).unwrap();
        assert_eq!(g.flag, GrowthFlag::Finite);
        assert!(g.ratios.iter().all(|r| r.value.is_none()));
        let s2 = ranks(&padded(&[0, 0, 1, 1], 10), 2);
        let g = growth_report(&s2).unwrap();
        assert_eq!(g.flag, GrowthFlag::Finite);
        assert_eq!(*g.cumulative.last().unwrap(), 2);
        let hyper = ranks(&[0, 0, 3, 5, 5, 10, 24, 55, 120], 4);
        let g = growth_report(&hyper).unwrap();
        assert_eq!(g.flag, GrowthFlag::Increasing);
        assert_eq!(g.cumulative, vec![0, 0, 3, 8, 13, 23, 47, 102, 222]);
        assert!(matches!(
            growth_report(&ranks(&[0, 0, 1, 1, 0], 2)),
            Err(DichotomyError::GrowthTruncation { .. })
        ));
    }
}
