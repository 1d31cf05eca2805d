//! Stage-by-stage diagonalization against a finite list of enumeration
//! operators.
//!
//! The subset engine builds an infinite-like `B ⊆ A` with `Γᵢ(B) ≠ A` for
//! each listed `Γᵢ`, extending a finite prefix `bᵢ ⊆ A` one stage at a time.
//! The degree engine does the same inside the degree of `A` given a pair
//! `Φ`, `Δ` with `Φ(A) = B` and `Δ(B) = A`: it extends a prefix `c` of
//! `Φ(A − D)` and grows the excluded set `D`. A stage on which neither case
//! applies is reported as compressible and the run stops there.

use std::fmt;

use thiserror::Error;

use crate::autoreduce::{infinite_like, AutoreduceError, AutoreductionProcedure};
use crate::enumop::EnumerationOperator;
use crate::prefixmachine::{machine_encode_rel, MachineError, MachineInput};
use crate::universe::BitVector;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiagonalError {
    #[error("universe too small at stage {stage}: nothing at or above {threshold}")]
    UniverseTooSmall { stage: usize, threshold: usize },
    #[error("prefix is not contained in the target set")]
    PrefixNotInTarget,
    #[error("operator universe {got} does not match set of size {expected}")]
    UniverseMismatch { expected: usize, got: usize },
    #[error("the pair does not satisfy {0}")]
    BadPair(&'static str),
    #[error("no operators to diagonalize against")]
    NoOperators,
    #[error(transparent)]
    Autoreduce(#[from] AutoreduceError),
    #[error(transparent)]
    Machine(#[from] MachineError),
}

/// One line of the stage log.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LogEntry {
    Case1 {
        stage: usize,
        n: usize,
    },
    Case2 {
        stage: usize,
        m: usize,
    },
    Case1Degree {
        stage: usize,
        e: BitVector,
    },
    Case2Degree {
        stage: usize,
        e: BitVector,
        n: usize,
    },
    Compressible {
        stage: usize,
    },
}

impl fmt::Display for LogEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LogEntry::Case1 { stage, n } => write!(f, "stage {stage} case1 n={n}"),
            LogEntry::Case2 { stage, m } => write!(f, "stage {stage} case2 m={m}"),
            LogEntry::Case1Degree { stage, e } => write!(f, "stage {stage} case1 e={e}"),
            LogEntry::Case2Degree { stage, e, n } => write!(f, "stage {stage} case2 e={e} n={n}"),
            LogEntry::Compressible { stage } => write!(f, "stage {stage} caseC"),
        }
    }
}

/// Prefix, excluded set and log after some number of stages.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiagonalState {
    pub stage: usize,
    pub prefix: BitVector,
    /// The excluded set `D`; always empty for the subset engine.
    pub excluded: BitVector,
    pub log: Vec<LogEntry>,
}

impl DiagonalState {
    pub fn new(size: usize) -> Self {
        DiagonalState {
            stage: 0,
            prefix: BitVector::zeros(0),
            excluded: BitVector::zeros(size),
            log: Vec::new(),
        }
    }

    pub fn log_text(&self) -> String {
        self.log.iter().map(|e| format!("{e}\n")).collect()
    }

    fn advance(&self, prefix: BitVector, excluded: BitVector, entry: LogEntry) -> Self {
        let mut log = self.log.clone();
        log.push(entry);
        DiagonalState {
            stage: self.stage + 1,
            prefix,
            excluded,
            log,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StageOutcome {
    Advanced(DiagonalState),
    /// Neither case applied; the state is the one the stage started from,
    /// with a `caseC` line appended.
    Compressible(DiagonalState),
}

fn check_universe(size: usize, op: &EnumerationOperator) -> Result<(), DiagonalError> {
    if op.universe().size() == size {
        Ok(())
    } else {
        Err(DiagonalError::UniverseMismatch {
            expected: size,
            got: op.universe().size(),
        })
    }
}

fn threshold(tau: usize, prefix: &BitVector) -> usize {
    tau.max(prefix.len())
}

fn compressible(state: &DiagonalState) -> StageOutcome {
    let mut out = state.clone();
    out.log.push(LogEntry::Compressible { stage: state.stage });
    StageOutcome::Compressible(out)
}

/// One stage of the subset engine.
///
/// Case 1 takes the least `n` with `Γ(b ∪ A∩[|b|, n)) ⊄ A` and extends `b`
/// along `A` far enough to add an element. Case 2 takes the least `m` with
/// `A∩[|b|+m, N)` infinite-like and `Γ(b ∪ A∩[|b|+m, N)) ⊊ A`, and extends
/// `b` by `0^m` and `A` up to its next element.
pub fn diag_step_subset(
    a: &BitVector,
    gamma: &EnumerationOperator,
    state: &DiagonalState,
    tau: usize,
) -> Result<StageOutcome, DiagonalError> {
    let size = a.len();
    check_universe(size, gamma)?;
    let b = &state.prefix;
    if !b.is_subset(a) {
        return Err(DiagonalError::PrefixNotInTarget);
    }
    let lo = b.len();
    let thr = threshold(tau, b);
    if !infinite_like(a, thr) {
        return Err(DiagonalError::UniverseTooSmall {
            stage: state.stage,
            threshold: thr,
        });
    }
    let base = b.resized(size);
    let tail = a.drop_below(lo);

    let escape = (lo..=size).find(|&n| !gamma.apply(&base.union(&tail.keep_below(n))).is_subset(a));
    if let Some(n) = escape {
        let first = a
            .first_one_from(lo)
            .expect("a has an element above the prefix");
        let end = n.max(first + 1);
        let prefix = b.concat(&a.slice(lo..end));
        return Ok(StageOutcome::Advanced(state.advance(
            prefix,
            state.excluded.clone(),
            LogEntry::Case1 {
                stage: state.stage,
                n,
            },
        )));
    }

    for m in 0..=size - lo {
        let rest = a.drop_below(lo + m);
        if !infinite_like(&rest, thr) {
            break;
        }
        if gamma.apply(&base.union(&rest)).is_proper_subset(a) {
            let q = rest.first_one_from(lo + m).expect("rest is infinite-like");
            let prefix = b
                .concat(&BitVector::zeros(m))
                .concat(&a.slice(lo + m..q + 1));
            return Ok(StageOutcome::Advanced(state.advance(
                prefix,
                state.excluded.clone(),
                LogEntry::Case2 {
                    stage: state.stage,
                    m,
                },
            )));
        }
    }
    Ok(compressible(state))
}

/// How a full run ended.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RunOutcome {
    /// Every operator was diagonalized against; `set` is the padded result.
    Success {
        set: BitVector,
        state: DiagonalState,
    },
    Compressible {
        stage: usize,
        state: DiagonalState,
    },
}

impl RunOutcome {
    pub fn state(&self) -> &DiagonalState {
        match self {
            RunOutcome::Success { state, .. } | RunOutcome::Compressible { state, .. } => state,
        }
    }
}

/// `b ∪ A∩[|b|, N)`.
pub fn pad_subset(a: &BitVector, prefix: &BitVector) -> BitVector {
    a.overlay_prefix(prefix)
}

/// Runs the subset engine over `ops` in order.
pub fn diag_run(
    a: &BitVector,
    ops: &[EnumerationOperator],
    tau: usize,
) -> Result<RunOutcome, DiagonalError> {
    let mut state = DiagonalState::new(a.len());
    for gamma in ops {
        match diag_step_subset(a, gamma, &state, tau)? {
            StageOutcome::Advanced(next) => state = next,
            StageOutcome::Compressible(state) => {
                return Ok(RunOutcome::Compressible {
                    stage: state.stage,
                    state,
                });
            }
        }
    }
    Ok(RunOutcome::Success {
        set: pad_subset(a, &state.prefix),
        state,
    })
}

/// `B ⊆ target`, `B` infinite-like and `Γᵢ(B) ≠ target` for every `i`.
pub fn verify_diag(
    target: &BitVector,
    ops: &[EnumerationOperator],
    set: &BitVector,
    tau: usize,
) -> bool {
    set.is_subset(target) && infinite_like(set, tau) && ops.iter().all(|g| g.apply(set) != *target)
}

/// Window sizes for the relativized machine after a compressible stage:
/// `m ≥ 1` with the window inside the universe and `A` still infinite-like
/// beyond it.
pub fn relativized_range(a: &BitVector, prefix: &BitVector, tau: usize) -> Vec<usize> {
    let lo = prefix.len();
    let thr = threshold(tau, prefix);
    (1..=a.len().saturating_sub(lo))
        .filter(|&m| infinite_like(&a.drop_below(lo + m), thr))
        .collect()
}

/// Encodes through the relativized machine after confirming that the stage
/// is in fact compressible.
pub fn encode_compressible_stage(
    a: &BitVector,
    gamma: &EnumerationOperator,
    state: &DiagonalState,
    m: usize,
    tau: usize,
) -> Result<MachineInput, DiagonalError> {
    if let StageOutcome::Advanced(_) = diag_step_subset(a, gamma, state, tau)? {
        return Err(MachineError::CasesNotFailed { stage: state.stage }.into());
    }
    Ok(machine_encode_rel(a, gamma, &state.prefix, m)?)
}

/// The pair `Φ`, `Δ` of the degree engine together with `A` and `B = Φ(A)`.
#[derive(Debug, Clone)]
pub struct DegreeSetting {
    pub a: BitVector,
    pub b: BitVector,
    pub phi: EnumerationOperator,
    pub delta: EnumerationOperator,
    pub tau: usize,
}

impl DegreeSetting {
    pub fn new(
        a: BitVector,
        phi: EnumerationOperator,
        delta: EnumerationOperator,
        tau: usize,
    ) -> Result<Self, DiagonalError> {
        check_universe(a.len(), &phi)?;
        check_universe(a.len(), &delta)?;
        let b = phi.apply(&a);
        if delta.apply(&b) != a {
            return Err(DiagonalError::BadPair("Δ(Φ(A)) = A"));
        }
        Ok(DegreeSetting {
            a,
            b,
            phi,
            delta,
            tau,
        })
    }

    /// `c · Φ(A − D)↾[|c|, N)`.
    pub fn pad(&self, prefix: &BitVector, excluded: &BitVector) -> BitVector {
        self.phi
            .apply(&self.a.difference(excluded))
            .overlay_prefix(prefix)
    }

    /// The Ψ that makes `A` autoreducible after a compressible stage.
    pub fn procedure(
        &self,
        gamma: &EnumerationOperator,
        state: &DiagonalState,
    ) -> Result<AutoreductionProcedure, DiagonalError> {
        Ok(AutoreductionProcedure::diag(
            gamma.clone(),
            self.phi.clone(),
            self.delta.clone(),
            state.prefix.clone(),
            state.excluded.clone(),
            self.tau,
        )?)
    }
}

/// One stage of the degree engine.
///
/// Case 1 takes the least `k` such that `e = (c · Φ(A − D))↾k` adds an
/// element to `c` and `Γ(e) ⊄ B`. Case 2 takes the least `n` such that
/// `T = Φ(A − (D ∪ {n}))` is infinite-like above `|c|` and
/// `Γ(c · T↾[|c|, N)) ⊊ B`; then `D` gains `n` and `c` is extended along `T`
/// to its next element.
pub fn diag_step_degree(
    setting: &DegreeSetting,
    gamma: &EnumerationOperator,
    state: &DiagonalState,
) -> Result<StageOutcome, DiagonalError> {
    let size = setting.a.len();
    check_universe(size, gamma)?;
    let c = &state.prefix;
    let lo = c.len();
    let thr = threshold(setting.tau, c);
    let current = setting.phi.apply(&setting.a.difference(&state.excluded));
    if !infinite_like(&current, thr) {
        return Err(DiagonalError::UniverseTooSmall {
            stage: state.stage,
            threshold: thr,
        });
    }
    let path = current.overlay_prefix(c);
    let first = current
        .first_one_from(lo)
        .expect("current is infinite-like");
    let escape =
        (first + 1..=size).find(|&k| !gamma.apply(&path.keep_below(k)).is_subset(&setting.b));
    if let Some(k) = escape {
        let e = path.prefix(k);
        return Ok(StageOutcome::Advanced(state.advance(
            e.clone(),
            state.excluded.clone(),
            LogEntry::Case1Degree {
                stage: state.stage,
                e,
            },
        )));
    }

    for n in 0..size {
        let mut excluded = state.excluded.clone();
        excluded.set(n, true);
        let t = setting.phi.apply(&setting.a.difference(&excluded));
        if !infinite_like(&t, thr) {
            continue;
        }
        let probe = t.overlay_prefix(c);
        if gamma.apply(&probe).is_proper_subset(&setting.b) {
            let q = t.first_one_from(lo).expect("t is infinite-like");
            let e = probe.prefix(q + 1);
            return Ok(StageOutcome::Advanced(state.advance(
                e.clone(),
                excluded,
                LogEntry::Case2Degree {
                    stage: state.stage,
                    e,
                    n,
                },
            )));
        }
    }
    Ok(compressible(state))
}

/// Runs the degree engine; on success the set is `c · Φ(A − D)↾[|c|, N)`.
pub fn diag_run_degree(
    setting: &DegreeSetting,
    ops: &[EnumerationOperator],
) -> Result<RunOutcome, DiagonalError> {
    let mut state = DiagonalState::new(setting.a.len());
    for gamma in ops {
        match diag_step_degree(setting, gamma, &state)? {
            StageOutcome::Advanced(next) => state = next,
            StageOutcome::Compressible(state) => {
                return Ok(RunOutcome::Compressible {
                    stage: state.stage,
                    state,
                });
            }
        }
    }
    let set = setting.pad(&state.prefix, &state.excluded);
    Ok(RunOutcome::Success { set, state })
}
