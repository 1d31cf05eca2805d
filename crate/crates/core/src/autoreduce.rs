//! Autoreduction procedures and the measure experiments around them.
//!
//! A procedure Ψ maps `(n, Z)` to a bit. `A` is Ψ-autoreducible when
//! `A(n) = Ψ(n, A − {n})` for every `n < N`. Every evaluation goes through
//! `mask(Z, n)`, so Ψ never sees bit `n` of its argument.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::enumop::EnumerationOperator;
use crate::scalar::{wilson_interval, Scalar};
use crate::universe::{BitVector, Universe, UniverseError};

/// Largest universe `count_autoreducible` and `density_experiment` will sweep.
pub const EXHAUSTIVE_LIMIT: usize = 24;
/// Largest universe a `PsiTable` can tabulate.
pub const TABLE_LIMIT: usize = 20;
/// Samples drawn from one seeded stream in `sample_fraction`.
pub const SAMPLE_CHUNK: u64 = 4096;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AutoreduceError {
    #[error(transparent)]
    Universe(#[from] UniverseError),
    #[error("exhaustive sweep over N={size} exceeds the limit N<={limit}")]
    GuardExceeded { size: usize, limit: usize },
    #[error("set is not autoreducible (fails at {witness})")]
    NotAutoreducible { witness: usize },
    #[error("cylinder of length {prefix} needs a position n with {prefix} <= n < {size}, got {n}")]
    BadPosition {
        prefix: usize,
        n: usize,
        size: usize,
    },
    #[error("at least one sample is required")]
    NoSamples,
    #[error("operator universe {got} does not match {expected}")]
    UniverseMismatch { expected: usize, got: usize },
    #[error("threshold {tau} must lie below N={size}")]
    BadThreshold { tau: usize, size: usize },
}

/// `S` contains an element at or above `tau`; the finite-universe reading of
/// "S is infinite".
#[inline]
pub fn infinite_like(set: &BitVector, tau: usize) -> bool {
    set.contains_at_least(tau)
}

/// Dense truth table of an arbitrary procedure, keyed by `(n, A − {n})`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PsiTable {
    universe: Universe,
    bits: Vec<u64>,
}

impl PsiTable {
    /// Tabulates `f(n, Z)` on every masked argument.
    pub fn from_fn<F>(universe: Universe, f: F) -> Result<Self, AutoreduceError>
    where
        F: Fn(usize, &BitVector) -> bool,
    {
        let size = universe.size();
        if size > TABLE_LIMIT {
            return Err(AutoreduceError::GuardExceeded {
                size,
                limit: TABLE_LIMIT,
            });
        }
        let entries = size << size;
        let mut bits = vec![0u64; entries.div_ceil(64)];
        for n in 0..size {
            for code in 0..(1u64 << size) {
                if code >> n & 1 == 1 {
                    continue;
                }
                if f(n, &BitVector::from_u64(size, code)) {
                    let idx = (n << size) | code as usize;
                    bits[idx / 64] |= 1 << (idx % 64);
                }
            }
        }
        Ok(PsiTable { universe, bits })
    }

    pub fn constant(universe: Universe, value: bool) -> Result<Self, AutoreduceError> {
        Self::from_fn(universe, |_, _| value)
    }

    /// Ψ(n, Z) = Z((n+1) mod N).
    pub fn copy_next(universe: Universe) -> Result<Self, AutoreduceError> {
        let size = universe.size();
        Self::from_fn(universe, |n, z| z.get((n + 1) % size))
    }

    /// A uniformly random table.
    pub fn random<R: rand::Rng + ?Sized>(
        universe: Universe,
        rng: &mut R,
    ) -> Result<Self, AutoreduceError> {
        let size = universe.size();
        if size > TABLE_LIMIT {
            return Err(AutoreduceError::GuardExceeded {
                size,
                limit: TABLE_LIMIT,
            });
        }
        let mut table = Self::from_fn(universe, |_, _| false)?;
        for w in &mut table.bits {
            *w = rng.gen();
        }
        Ok(table)
    }

    pub fn universe(&self) -> Universe {
        self.universe
    }

    /// Entry for `(n, masked)`; the bit at `n` of `masked` is ignored.
    pub fn lookup(&self, n: usize, masked: &BitVector) -> bool {
        let size = self.universe.size();
        let code = masked.to_u64().expect("table universes fit in 64 bits") & !(1u64 << n);
        let idx = (n << size) | code as usize;
        self.bits[idx / 64] >> (idx % 64) & 1 == 1
    }
}

/// The shapes of Ψ this crate builds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PsiKind {
    /// Ψ(n, Z) = [n ∈ Δ(complement Z)].
    Cototal {
        delta: EnumerationOperator,
    },
    /// Ψ(n, Z) = [n ∈ Δ(Γ(Φ(Z)))] or Φ(Z) not infinite-like.
    Uie {
        phi: EnumerationOperator,
        gamma: EnumerationOperator,
        delta: EnumerationOperator,
        tau: usize,
    },
    /// Ψ(n, Z) = [n ∈ Δ(Γ(c · Φ(Z − D)↾[|c|, N)))] or Φ(Z − D) has nothing
    /// at or above `max(τ, |c|)`.
    Diag {
        gamma: EnumerationOperator,
        phi: EnumerationOperator,
        delta: EnumerationOperator,
        prefix: BitVector,
        excluded: BitVector,
        tau: usize,
    },
    Custom(PsiTable),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AutoreductionProcedure {
    universe: Universe,
    kind: PsiKind,
}

/// Outcome of [`AutoreductionProcedure::is_autoreducible`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Verdict {
    pub holds: bool,
    /// Least failing position when `holds` is false.
    pub witness: Option<usize>,
}

fn same_universe(u: Universe, op: &EnumerationOperator) -> Result<(), AutoreduceError> {
    if op.universe() == u {
        Ok(())
    } else {
        Err(AutoreduceError::UniverseMismatch {
            expected: u.size(),
            got: op.universe().size(),
        })
    }
}

fn check_tau(u: Universe, tau: usize) -> Result<(), AutoreduceError> {
    if tau < u.size() {
        Ok(())
    } else {
        Err(AutoreduceError::BadThreshold {
            tau,
            size: u.size(),
        })
    }
}

impl AutoreductionProcedure {
    pub fn cototal(delta: EnumerationOperator) -> Self {
        AutoreductionProcedure {
            universe: delta.universe(),
            kind: PsiKind::Cototal { delta },
        }
    }

    pub fn uie(
        phi: EnumerationOperator,
        gamma: EnumerationOperator,
        delta: EnumerationOperator,
        tau: usize,
    ) -> Result<Self, AutoreduceError> {
        let universe = phi.universe();
        same_universe(universe, &gamma)?;
        same_universe(universe, &delta)?;
        check_tau(universe, tau)?;
        Ok(AutoreductionProcedure {
            universe,
            kind: PsiKind::Uie {
                phi,
                gamma,
                delta,
                tau,
            },
        })
    }

    pub fn diag(
        gamma: EnumerationOperator,
        phi: EnumerationOperator,
        delta: EnumerationOperator,
        prefix: BitVector,
        excluded: BitVector,
        tau: usize,
    ) -> Result<Self, AutoreduceError> {
        let universe = phi.universe();
        same_universe(universe, &gamma)?;
        same_universe(universe, &delta)?;
        check_tau(universe, tau)?;
        Ok(AutoreductionProcedure {
            universe,
            kind: PsiKind::Diag {
                gamma,
                phi,
                delta,
                excluded: excluded.resized(universe.size()),
                prefix,
                tau,
            },
        })
    }

    pub fn custom(table: PsiTable) -> Self {
        AutoreductionProcedure {
            universe: table.universe(),
            kind: PsiKind::Custom(table),
        }
    }

    pub fn universe(&self) -> Universe {
        self.universe
    }

    pub fn kind(&self) -> &PsiKind {
        &self.kind
    }

    /// Short label used in CSV output.
    pub fn label(&self) -> &'static str {
        match self.kind {
            PsiKind::Cototal { .. } => "cototal",
            PsiKind::Uie { .. } => "uie",
            PsiKind::Diag { .. } => "diag",
            PsiKind::Custom(_) => "custom",
        }
    }

    /// Ψ(n, A − {n}).
    pub fn psi_eval(&self, n: usize, a: &BitVector) -> Result<bool, AutoreduceError> {
        self.universe.check(n)?;
        let z = a.resized(self.universe.size()).mask(n)?;
        Ok(self.eval_masked(n, &z))
    }

    fn eval_masked(&self, n: usize, z: &BitVector) -> bool {
        match &self.kind {
            PsiKind::Cototal { delta } => delta.apply(&z.complement()).get(n),
            PsiKind::Uie {
                phi,
                gamma,
                delta,
                tau,
            } => {
                let image = phi.apply(z);
                !infinite_like(&image, *tau) || delta.apply(&gamma.apply(&image)).get(n)
            }
            PsiKind::Diag {
                gamma,
                phi,
                delta,
                prefix,
                excluded,
                tau,
            } => {
                let image = phi.apply(&z.difference(excluded));
                if !infinite_like(&image, (*tau).max(prefix.len())) {
                    return true;
                }
                let probe = image.overlay_prefix(prefix);
                delta.apply(&gamma.apply(&probe)).get(n)
            }
            PsiKind::Custom(table) => table.lookup(n, z),
        }
    }

    /// Whether `A(n) = Ψ(n, A − {n})` for all `n < N`.
    pub fn is_autoreducible(&self, a: &BitVector) -> Verdict {
        let a = a.resized(self.universe.size());
        for n in 0..self.universe.size() {
            let z = a.mask(n).expect("n is in range");
            if self.eval_masked(n, &z) != a.get(n) {
                return Verdict {
                    holds: false,
                    witness: Some(n),
                };
            }
        }
        Verdict {
            holds: true,
            witness: None,
        }
    }

    /// Flips bit `n` of an autoreducible `A`. The flipped set fails at `n`
    /// because Ψ cannot see the change.
    pub fn flip_refute(&self, a: &BitVector, n: usize) -> Result<BitVector, AutoreduceError> {
        self.universe.check(n)?;
        let verdict = self.is_autoreducible(a);
        if let Some(witness) = verdict.witness {
            return Err(AutoreduceError::NotAutoreducible { witness });
        }
        Ok(a.resized(self.universe.size()).flip(n)?)
    }

    fn exhaustive_size(&self) -> Result<usize, AutoreduceError> {
        let size = self.universe.size();
        if size > EXHAUSTIVE_LIMIT {
            return Err(AutoreduceError::GuardExceeded {
                size,
                limit: EXHAUSTIVE_LIMIT,
            });
        }
        Ok(size)
    }

    /// `|{A ∈ 2^N : A is Ψ-autoreducible}|`.
    pub fn count_autoreducible(&self) -> Result<u64, AutoreduceError> {
        let size = self.exhaustive_size()?;
        Ok((0..1u64 << size)
            .into_par_iter()
            .filter(|&code| {
                self.is_autoreducible(&BitVector::from_u64(size, code))
                    .holds
            })
            .count() as u64)
    }

    /// Number of strings meeting the single constraint `A(n) = Ψ(n, A − {n})`.
    pub fn count_single_constraint(&self, n: usize) -> Result<u64, AutoreduceError> {
        let size = self.exhaustive_size()?;
        self.universe.check(n)?;
        Ok((0..1u64 << size)
            .into_par_iter()
            .filter(|&code| {
                let a = BitVector::from_u64(size, code);
                self.eval_masked(n, &a.mask(n).expect("in range")) == a.get(n)
            })
            .count() as u64)
    }

    /// `count_autoreducible / 2^N` in the requested scalar.
    pub fn exact_fraction<T: Scalar>(&self) -> Result<T, AutoreduceError> {
        let count = self.count_autoreducible()?;
        Ok(T::from_ratio(count, 1u64 << self.universe.size()))
    }

    /// Monte-Carlo estimate of the autoreducible fraction of `2^N`.
    ///
    /// Samples are drawn in chunks of [`SAMPLE_CHUNK`]; chunk `j` uses stream
    /// `j` of a ChaCha generator keyed by `seed`, so the result does not
    /// depend on how chunks are scheduled across threads.
    pub fn sample_fraction(
        &self,
        samples: u64,
        seed: u64,
    ) -> Result<Estimate<f64>, AutoreduceError> {
        if samples == 0 {
            return Err(AutoreduceError::NoSamples);
        }
        let size = self.universe.size();
        let chunks = samples.div_ceil(SAMPLE_CHUNK);
        let successes: u64 = (0..chunks)
            .into_par_iter()
            .map(|j| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(j);
                let take = SAMPLE_CHUNK.min(samples - j * SAMPLE_CHUNK);
                (0..take)
                    .filter(|_| {
                        self.is_autoreducible(&BitVector::random(size, &mut rng))
                            .holds
                    })
                    .count() as u64
            })
            .sum();
        Ok(Estimate::from_counts(successes, samples))
    }

    /// Replays the cylinder argument at position `n` inside `[σ]`.
    ///
    /// `S ∩ [σ]` is split into `P₀`, `P₁` by the value of Ψ at `n`; `P₂` is
    /// the image of the larger part under a flip at `n`. All measures are
    /// relative to the cylinder `[σ]`.
    pub fn density_experiment<T, F>(
        &self,
        class: F,
        sigma: &BitVector,
        n: usize,
    ) -> Result<DensityReport<T>, AutoreduceError>
    where
        T: Scalar,
        F: Fn(&BitVector) -> bool + Sync,
    {
        let size = self.exhaustive_size()?;
        if n < sigma.len() || n >= size {
            return Err(AutoreduceError::BadPosition {
                prefix: sigma.len(),
                n,
                size,
            });
        }
        let free = size - sigma.len();
        let base = sigma.resized(size);
        let extend = |code: u64| {
            let mut a = base.clone();
            for k in 0..free {
                if code >> k & 1 == 1 {
                    a.set(sigma.len() + k, true);
                }
            }
            a
        };
        let (class_count, p0, p1) = (0..1u64 << free)
            .into_par_iter()
            .map(|code| {
                let a = extend(code);
                if !class(&a) {
                    return (0u64, 0u64, 0u64);
                }
                let psi = self.eval_masked(n, &a.mask(n).expect("in range"));
                (1, u64::from(!psi), u64::from(psi))
            })
            .reduce(|| (0, 0, 0), |x, y| (x.0 + y.0, x.1 + y.1, x.2 + y.2));
        let major = if p0 >= p1 { 0u8 } else { 1 };
        let p2_in_class = (0..1u64 << free)
            .into_par_iter()
            .filter(|&code| {
                let a = extend(code);
                if !class(&a) || self.eval_masked(n, &a.mask(n).expect("in range")) != (major == 1)
                {
                    return false;
                }
                class(&a.flip(n).expect("in range"))
            })
            .count() as u64;
        let cyl = 1u64 << free;
        let p2 = if major == 0 { p0 } else { p1 };
        Ok(DensityReport {
            sigma: sigma.clone(),
            position: n,
            class: T::from_ratio(class_count, cyl),
            p0: T::from_ratio(p0, cyl),
            p1: T::from_ratio(p1, cyl),
            major,
            p2: T::from_ratio(p2, cyl),
            p2_in_class: T::from_ratio(p2_in_class, cyl),
            refuted_nonempty: p2_in_class > 0,
        })
    }
}

/// Fraction estimate with a 95% Wilson interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<F> {
    pub successes: u64,
    pub samples: u64,
    pub fraction: F,
    pub ci_low: F,
    pub ci_high: F,
}

impl<F: num_traits::Float + num_traits::FromPrimitive> Estimate<F> {
    pub fn from_counts(successes: u64, samples: u64) -> Self {
        let (ci_low, ci_high) = wilson_interval(successes, samples);
        Estimate {
            successes,
            samples,
            fraction: F::from_u64(successes).expect("representable")
                / F::from_u64(samples).expect("representable"),
            ci_low,
            ci_high,
        }
    }

    pub fn covers(&self, value: F) -> bool {
        self.ci_low <= value && value <= self.ci_high
    }
}

/// Measures from one run of [`AutoreductionProcedure::density_experiment`].
#[derive(Debug, Clone, PartialEq)]
pub struct DensityReport<T> {
    pub sigma: BitVector,
    pub position: usize,
    /// μ(S ∩ [σ]).
    pub class: T,
    pub p0: T,
    pub p1: T,
    /// Which of `P₀`, `P₁` was flipped into `P₂`.
    pub major: u8,
    pub p2: T,
    /// μ(P₂ ∩ S ∩ [σ]).
    pub p2_in_class: T,
    pub refuted_nonempty: bool,
}
