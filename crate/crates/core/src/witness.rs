//! Checkers and generators for cototal witnesses and uniform
//! introenumerators.

use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::autoreduce::{infinite_like, SAMPLE_CHUNK};
use crate::enumop::{EnumOpError, EnumerationOperator};
use crate::universe::{BitVector, Universe, UniverseError};

/// Largest `|X|` checked over every subset in automatic mode.
pub const EXHAUSTIVE_ELEMENTS: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WitnessError {
    #[error(transparent)]
    Universe(#[from] UniverseError),
    #[error(transparent)]
    Operator(#[from] EnumOpError),
    #[error("set has no element at or above tau={tau}")]
    NotInfiniteLike { tau: usize },
    #[error("operator universe {got} does not match set of size {expected}")]
    UniverseMismatch { expected: usize, got: usize },
    #[error("exhaustive check over {elements} elements exceeds the limit {limit}")]
    TooManyElements { elements: usize, limit: usize },
    #[error("the set is empty")]
    EmptySet,
    #[error("universe size must be even, got {0}")]
    OddUniverse(usize),
    #[error("at least one sample is required")]
    NoSamples,
}

/// How a check was carried out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Exhaustive,
    Sampled { count: u64, seed: u64 },
}

/// What the caller asks for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeRequest {
    /// Exhaustive up to [`EXHAUSTIVE_ELEMENTS`], sampled beyond.
    Auto {
        samples: u64,
        seed: u64,
    },
    Exhaustive,
    Sampled {
        count: u64,
        seed: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Counterexample {
    /// A position where `Γ(complement A)` and `A` disagree.
    Index(usize),
    /// An infinite-like `Y ⊆ X` with `Γ(Y) ≠ X`.
    Subset(BitVector),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessReport {
    pub holds: bool,
    pub counterexample: Option<Counterexample>,
    pub mode: Mode,
}

impl fmt::Display for WitnessReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "holds: {}", self.holds)?;
        match self.mode {
            Mode::Exhaustive => writeln!(f, "mode: exhaustive")?,
            Mode::Sampled { count, seed } => writeln!(f, "mode: sampled {count} seed {seed}")?,
        }
        match &self.counterexample {
            None => writeln!(f, "counterexample: none"),
            Some(Counterexample::Index(n)) => writeln!(f, "counterexample: index {n}"),
            Some(Counterexample::Subset(y)) => {
                writeln!(f, "counterexample: subset {}", y.to_set_line())
            }
        }
    }
}

fn same_universe(set: &BitVector, op: &EnumerationOperator) -> Result<(), WitnessError> {
    if op.universe().size() == set.len() {
        Ok(())
    } else {
        Err(WitnessError::UniverseMismatch {
            expected: set.len(),
            got: op.universe().size(),
        })
    }
}

/// Checks `Γ(complement A) = A`.
pub fn is_cototal_witness(
    a: &BitVector,
    gamma: &EnumerationOperator,
) -> Result<WitnessReport, WitnessError> {
    same_universe(a, gamma)?;
    let image = gamma.apply(&a.complement());
    let bad = (0..a.len()).find(|&n| image.get(n) != a.get(n));
    Ok(WitnessReport {
        holds: bad.is_none(),
        counterexample: bad.map(Counterexample::Index),
        mode: Mode::Exhaustive,
    })
}

fn subset_of(elements: &[usize], len: usize, mask: u64) -> BitVector {
    let mut y = BitVector::zeros(len);
    for (k, &x) in elements.iter().enumerate() {
        if mask >> k & 1 == 1 {
            y.set(x, true);
        }
    }
    y
}

/// Checks `Γ(Y) = X` for infinite-like `Y ⊆ X`, over every such `Y` or
/// over a seeded sample of them.
pub fn is_uie_witness(
    x: &BitVector,
    gamma: &EnumerationOperator,
    tau: usize,
    request: ModeRequest,
) -> Result<WitnessReport, WitnessError> {
    same_universe(x, gamma)?;
    if !infinite_like(x, tau) {
        return Err(WitnessError::NotInfiniteLike { tau });
    }
    let elements: Vec<usize> = x.ones().collect();
    let k = elements.len();
    let mode = match request {
        ModeRequest::Auto { samples, seed } if k > EXHAUSTIVE_ELEMENTS => Mode::Sampled {
            count: samples,
            seed,
        },
        ModeRequest::Auto { .. } => Mode::Exhaustive,
        ModeRequest::Exhaustive if k > 24 => {
            return Err(WitnessError::TooManyElements {
                elements: k,
                limit: 24,
            });
        }
        ModeRequest::Exhaustive => Mode::Exhaustive,
        ModeRequest::Sampled { count, seed } => Mode::Sampled { count, seed },
    };
    let fails = |y: &BitVector| infinite_like(y, tau) && gamma.apply(y) != *x;
    let bad = match mode {
        Mode::Exhaustive => (0..1u64 << k)
            .into_par_iter()
            .map(|mask| subset_of(&elements, x.len(), mask))
            .find_first(|y| fails(y)),
        Mode::Sampled { count, seed } => {
            if count == 0 {
                return Err(WitnessError::NoSamples);
            }
            let tall: Vec<usize> = elements.iter().copied().filter(|&e| e >= tau).collect();
            let chunks = count.div_ceil(SAMPLE_CHUNK);
            (0..chunks)
                .into_par_iter()
                .map(|j| {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    rng.set_stream(j);
                    let take = SAMPLE_CHUNK.min(count - j * SAMPLE_CHUNK);
                    (0..take).find_map(|_| {
                        let mut y = BitVector::zeros(x.len());
                        for &e in &elements {
                            if rng.gen::<bool>() {
                                y.set(e, true);
                            }
                        }
                        if !infinite_like(&y, tau) {
                            let &e = tall.choose(&mut rng).expect("x is infinite-like");
                            y.set(e, true);
                        }
                        fails(&y).then_some(y)
                    })
                })
                .find_first(Option::is_some)
                .flatten()
        }
    };
    Ok(WitnessReport {
        holds: bad.is_none(),
        counterexample: bad.map(Counterexample::Subset),
        mode,
    })
}

/// `{⟨x,{y}⟩ : x, y ∈ X}`, ordered by `x` then `y`.
pub fn gen_trivial_uie(x: &BitVector) -> Result<EnumerationOperator, WitnessError> {
    let universe = Universe::new(x.len())?;
    if x.count_ones() == 0 {
        return Err(WitnessError::EmptySet);
    }
    let axioms = x.ones().flat_map(|h| x.ones().map(move |b| (h, [b])));
    Ok(EnumerationOperator::from_axioms(
        universe,
        "trivial-uie",
        axioms,
    )?)
}

/// `{⟨x,{y}⟩ : x, y ∈ X, y ≥ τ}`, ordered by `y` then `x`. Every infinite-like
/// subset of `X` meets one of the bodies, and the axiom list is much shorter
/// than the full pairwise one when few elements sit above `τ`.
pub fn gen_threshold_uie(x: &BitVector, tau: usize) -> Result<EnumerationOperator, WitnessError> {
    let universe = Universe::new(x.len())?;
    if !infinite_like(x, tau) {
        return Err(WitnessError::NotInfiniteLike { tau });
    }
    let axioms = x
        .ones()
        .filter(|&y| y >= tau)
        .flat_map(|b| x.ones().map(move |h| (h, [b])));
    Ok(EnumerationOperator::from_axioms(
        universe,
        "threshold-uie",
        axioms,
    )?)
}

/// The evens of an even-sized universe with `Γ = {⟨2k,{2k+1}⟩}`, a cototal
/// witness for them.
pub fn gen_cototal_example(n: usize) -> Result<(BitVector, EnumerationOperator), WitnessError> {
    if n % 2 == 1 {
        return Err(WitnessError::OddUniverse(n));
    }
    let universe = Universe::new(n)?;
    let a = BitVector::from_indices(n, (0..n).step_by(2))?;
    let gamma = EnumerationOperator::from_axioms(
        universe,
        "cototal-example",
        (0..n / 2).map(|k| (2 * k, [2 * k + 1])),
    )?;
    Ok((a, gamma))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn auto() -> ModeRequest {
        ModeRequest::Auto {
            samples: 1000,
            seed: 0,
        }
    }

    #[test]
    fn cototal_example_is_a_witness() {
        for n in (2..=32).step_by(2) {
            let (a, gamma) = gen_cototal_example(n).unwrap();
            let r = is_cototal_witness(&a, &gamma).unwrap();
            assert!(r.holds, "n={n}");
        }
        assert_eq!(gen_cototal_example(7), Err(WitnessError::OddUniverse(7)));
    }

    #[test]
    fn cototal_counterexample_is_first_disagreement() {
        let (a, gamma) = gen_cototal_example(8).unwrap();
        let shifted = a.flip(3).unwrap();
        let r = is_cototal_witness(&shifted, &gamma).unwrap();
        assert!(!r.holds);
        assert_eq!(r.counterexample, Some(Counterexample::Index(2)));
    }

    #[test]
    fn trivial_uie_is_a_witness() {
        let x = BitVector::from_indices(16, [1, 3, 8, 12, 15]).unwrap();
        let gamma = gen_trivial_uie(&x).unwrap();
        assert_eq!(gamma.len(), 25);
        let r = is_uie_witness(&x, &gamma, 12, auto()).unwrap();
        assert!(r.holds);
        assert_eq!(r.mode, Mode::Exhaustive);
        assert!(gen_trivial_uie(&BitVector::zeros(4)).is_err());
    }

    #[test]
    fn threshold_uie_is_a_witness() {
        let x = BitVector::from_indices(16, [0, 2, 5, 12, 14]).unwrap();
        let gamma = gen_threshold_uie(&x, 12).unwrap();
        assert_eq!(gamma.len(), 10);
        assert!(is_uie_witness(&x, &gamma, 12, auto()).unwrap().holds);
        assert!(
            is_uie_witness(
                &x,
                &gamma,
                12,
                ModeRequest::Sampled {
                    count: 500,
                    seed: 3
                }
            )
            .unwrap()
            .holds
        );
    }

    #[test]
    fn missing_head_gives_subset_counterexample() {
        let x = BitVector::from_indices(12, [0, 4, 9, 10]).unwrap();
        let mut gamma = EnumerationOperator::new(Universe::new(12).unwrap(), "partial");
        for b in [9, 10] {
            for h in [0, 4, 9] {
                gamma.push_axiom(h, [b]).unwrap();
            }
        }
        let r = is_uie_witness(&x, &gamma, 9, auto()).unwrap();
        assert!(!r.holds);
        match r.counterexample {
            Some(Counterexample::Subset(y)) => {
                assert!(y.is_subset(&x));
                assert!(infinite_like(&y, 9));
                assert_ne!(gamma.apply(&y), x);
            }
            other => panic!("unexpected {other:?}"),
        }
        let sampled = is_uie_witness(
            &x,
            &gamma,
            9,
            ModeRequest::Sampled {
                count: 100,
                seed: 1,
            },
        )
        .unwrap();
        assert!(!sampled.holds);
    }

    #[test]
    fn not_infinite_like_is_an_error() {
        let x = BitVector::from_indices(12, [0, 4]).unwrap();
        let gamma = gen_trivial_uie(&x).unwrap();
        assert_eq!(
            is_uie_witness(&x, &gamma, 9, auto()),
            Err(WitnessError::NotInfiniteLike { tau: 9 })
        );
    }

    #[test]
    fn sampled_mode_is_deterministic_and_chosen_for_wide_sets() {
        let x = BitVector::full(24);
        let gamma = gen_threshold_uie(&x, 18).unwrap();
        let a = is_uie_witness(
            &x,
            &gamma,
            18,
            ModeRequest::Auto {
                samples: 300,
                seed: 9,
            },
        )
        .unwrap();
        assert_eq!(
            a.mode,
            Mode::Sampled {
                count: 300,
                seed: 9
            }
        );
        assert!(a.holds);
        let mut broken = gamma.clone();
        broken = EnumerationOperator::from_axioms(
            broken.universe(),
            "broken",
            broken
                .axioms()
                .iter()
                .filter(|ax| ax.head != 7)
                .map(|ax| (ax.head, ax.body.ones().collect::<Vec<_>>())),
        )
        .unwrap();
        let r1 = is_uie_witness(
            &x,
            &broken,
            18,
            ModeRequest::Sampled {
                count: 300,
                seed: 9,
            },
        )
        .unwrap();
        let r2 = is_uie_witness(
            &x,
            &broken,
            18,
            ModeRequest::Sampled {
                count: 300,
                seed: 9,
            },
        )
        .unwrap();
        assert!(!r1.holds);
        assert_eq!(r1, r2);
    }

    #[test]
    fn report_text() {
        let (a, gamma) = gen_cototal_example(4).unwrap();
        let r = is_cototal_witness(&a, &gamma).unwrap();
        assert_eq!(
            r.to_string(),
            "holds: true\nmode: exhaustive\ncounterexample: none\n"
        );
    }

    #[test]
    fn hierarchy_cototal_and_uie_views_agree_on_the_example() {
        // evens with the pairwise operator: an introenumerator above τ ≤ max(A)
        let (a, _) = gen_cototal_example(12).unwrap();
        let gamma = gen_trivial_uie(&a).unwrap();
        for tau in 0..=10 {
            assert!(
                is_uie_witness(&a, &gamma, tau, auto()).unwrap().holds,
                "tau={tau}"
            );
        }
    }
}
