//! Left-c.e. reals with exact dyadic approximations, and the enumeration of
//! a real's 1-bits from an enumeration of its 0-bits.
//!
//! A real of width `W` is stored as numerators over `2^W`; bit `k` of the
//! expansion has weight `2^{-(k+1)}`, so position 0 is the first digit after
//! the binary point.

use std::fmt;

use thiserror::Error;

use crate::scalar::Scalar;
use crate::universe::{BitVector, SetEnumeration, Universe};

/// Widest expansion a `u64` numerator can hold below 1.
pub const MAX_WIDTH: usize = 63;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CototalError {
    #[error("width {0} outside 1..={MAX_WIDTH}")]
    BadWidth(usize),
    #[error("program length {length} exceeds width {width}")]
    WidthOverflow { length: usize, width: usize },
    #[error("halting programs violate Kraft: measure {numerator}/2^{width} is not below 1")]
    KraftViolation { numerator: u128, width: usize },
    #[error("approximation {index} decreases")]
    Descending { index: usize },
    #[error("approximation {index} is not below 1")]
    NotBelowOne { index: usize },
    #[error("unresolved at {0}")]
    UnresolvedAt(usize),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// A non-descending list of dyadic approximations; the last entry is the
/// exact limit (zero when the list is empty).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeftCEReal {
    width: usize,
    approximations: Vec<u64>,
}

/// A program of the toy halting-probability real.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Program {
    pub length: usize,
    pub halts_at: Option<u64>,
}

impl Program {
    pub fn halting(length: usize, stage: u64) -> Self {
        Program {
            length,
            halts_at: Some(stage),
        }
    }

    pub fn divergent(length: usize) -> Self {
        Program {
            length,
            halts_at: None,
        }
    }
}

fn check_width(width: usize) -> Result<(), CototalError> {
    if (1..=MAX_WIDTH).contains(&width) {
        Ok(())
    } else {
        Err(CototalError::BadWidth(width))
    }
}

impl LeftCEReal {
    pub fn new(width: usize, approximations: Vec<u64>) -> Result<Self, CototalError> {
        check_width(width)?;
        for (index, &q) in approximations.iter().enumerate() {
            if q >> width != 0 {
                return Err(CototalError::NotBelowOne { index });
            }
            if index > 0 && q < approximations[index - 1] {
                return Err(CototalError::Descending { index });
            }
        }
        Ok(LeftCEReal {
            width,
            approximations,
        })
    }

    /// Halting probability of a finite program list: `q_s` sums `2^{-length}`
    /// over programs halted by stage `s`, one entry per stage at which
    /// something halts.
    pub fn toy_omega(programs: &[Program], width: usize) -> Result<Self, CototalError> {
        check_width(width)?;
        let mut halting: Vec<(u64, usize)> = Vec::new();
        for p in programs {
            if p.length > width {
                return Err(CototalError::WidthOverflow {
                    length: p.length,
                    width,
                });
            }
            if let Some(stage) = p.halts_at {
                halting.push((stage, p.length));
            }
        }
        let total: u128 = halting.iter().map(|&(_, len)| 1u128 << (width - len)).sum();
        if total >> width != 0 {
            return Err(CototalError::KraftViolation {
                numerator: total,
                width,
            });
        }
        halting.sort_by_key(|&(stage, _)| stage);
        let mut approximations = Vec::new();
        let mut acc = 0u64;
        for (k, &(stage, len)) in halting.iter().enumerate() {
            acc += 1u64 << (width - len);
            let last_of_stage = halting.get(k + 1).is_none_or(|&(next, _)| next != stage);
            if last_of_stage {
                approximations.push(acc);
            }
        }
        Self::new(width, approximations)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn approximations(&self) -> &[u64] {
        &self.approximations
    }

    /// Numerator of the limit over `2^W`.
    pub fn limit(&self) -> u64 {
        self.approximations.last().copied().unwrap_or(0)
    }

    pub fn limit_value<T: Scalar>(&self) -> T {
        T::from_ratio(self.limit(), 1u64 << self.width)
    }

    /// Bit `k` of approximation `stage`.
    pub fn approximation_bit(&self, stage: usize, k: usize) -> bool {
        expansion_bit(self.approximations[stage], self.width, k)
    }

    /// The `W`-bit expansion of the limit.
    pub fn true_bits(&self) -> BitVector {
        expansion(self.limit(), self.width)
    }

    /// An enumeration of the 0-positions of the limit, in increasing order.
    pub fn complement_stream(&self) -> SetEnumeration {
        SetEnumeration::ascending(&self.true_bits().complement())
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("width {}\n", self.width);
        for &q in &self.approximations {
            s.push_str(&format!("q {}\n", expansion(q, self.width)));
        }
        s
    }

    /// Reads `width <W>` followed by `q <bits>` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, CototalError> {
        let mut width: Option<usize> = None;
        let mut approximations = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let err = |message: String| CototalError::Parse { line, message };
            let (keyword, arg) = content
                .split_once(char::is_whitespace)
                .ok_or_else(|| err(format!("expected `<keyword> <value>`, got {content:?}")))?;
            let arg = arg.trim();
            match keyword {
                "width" if width.is_none() => {
                    let w: usize = arg.parse().map_err(|_| err(format!("bad width {arg:?}")))?;
                    check_width(w).map_err(|e| err(e.to_string()))?;
                    width = Some(w);
                }
                "q" => {
                    let w = width.ok_or_else(|| err("`q` before `width`".into()))?;
                    let digits = arg.strip_prefix("0.").unwrap_or(arg);
                    if digits.len() != w || !digits.chars().all(|c| c == '0' || c == '1') {
                        return Err(err(format!("expansion {arg:?} is not {w} binary digits")));
                    }
                    let q = digits
                        .chars()
                        .fold(0u64, |acc, c| (acc << 1) | u64::from(c == '1'));
                    approximations.push(q);
                }
                other => return Err(err(format!("unexpected {other:?}"))),
            }
        }
        let width = width.ok_or(CototalError::Parse {
            line: 0,
            message: "missing `width <W>` header".into(),
        })?;
        Self::new(width, approximations)
    }
}

fn expansion_bit(numerator: u64, width: usize, k: usize) -> bool {
    k < width && (numerator >> (width - 1 - k)) & 1 == 1
}

fn expansion(numerator: u64, width: usize) -> BitVector {
    BitVector::from_bools((0..width).map(|k| expansion_bit(numerator, width, k)))
}

/// The two sources of evidence the enumeration procedure waits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Watcher {
    /// The complement enumeration.
    Comp,
    /// The approximation list.
    Q,
}

/// Order in which the watchers advance when the current bit is unresolved.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum Schedule {
    /// Alternate, starting with the complement.
    #[default]
    RoundRobin,
    /// Drain the complement before looking at approximations.
    CompFirst,
    /// Drain the approximations before reading the complement.
    QFirst,
    /// Cycle through an explicit pattern.
    Pattern(Vec<Watcher>),
}

impl Schedule {
    fn preferred(&self, step: usize) -> Watcher {
        match self {
            Schedule::RoundRobin => {
                if step.is_multiple_of(2) {
                    Watcher::Comp
                } else {
                    Watcher::Q
                }
            }
            Schedule::CompFirst => Watcher::Comp,
            Schedule::QFirst => Watcher::Q,
            Schedule::Pattern(p) if p.is_empty() => Watcher::Comp,
            Schedule::Pattern(p) => p[step % p.len()],
        }
    }
}

/// How one bit got settled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Evidence {
    /// Seen as the `event`-th element of the complement enumeration.
    Comp { event: usize },
    /// Approximation `stage` agreed with the settled prefix and showed a 1.
    Approximation { stage: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Resolution {
    pub position: usize,
    pub bit: bool,
    pub evidence: Evidence,
}

impl fmt::Display for Resolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "resolved {} {} via ", self.position, u8::from(self.bit))?;
        match self.evidence {
            Evidence::Comp { .. } => write!(f, "comp"),
            Evidence::Approximation { stage } => write!(f, "q@{stage}"),
        }
    }
}

/// Output of [`enumerate_from_complement`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Emission {
    /// The 1-positions, in the order they were enumerated.
    pub ones: SetEnumeration,
    pub trace: Vec<Resolution>,
}

/// Enumerates the 1-positions of `real`'s limit from an enumeration of its
/// 0-positions.
///
/// Bits are settled left to right. Position `k` becomes 0 once `k` shows up
/// in `comp`, and 1 once some approximation agrees with the settled prefix on
/// `[0, k)` and has a 1 at `k`. The complement is only ever read forward;
/// absence from it is never taken as evidence.
pub fn enumerate_from_complement<I>(
    real: &LeftCEReal,
    comp: I,
    schedule: &Schedule,
) -> Result<Emission, CototalError>
where
    I: IntoIterator<Item = usize>,
{
    let width = real.width;
    let mut comp = comp.into_iter();
    let mut comp_done = false;
    let mut seen_comp: Vec<Option<usize>> = vec![None; width];
    let mut comp_events = 0usize;
    let mut examined = 0usize;
    let q_total = real.approximations.len();

    let mut prefix = BitVector::zeros(0);
    let mut ones = Vec::new();
    let mut trace = Vec::new();
    let mut step = 0usize;
    let mut k = 0usize;
    while k < width {
        let settled = if let Some(event) = seen_comp[k] {
            Some((false, Evidence::Comp { event }))
        } else {
            (0..examined)
                .find(|&s| {
                    real.approximation_bit(s, k)
                        && (0..k).all(|j| real.approximation_bit(s, j) == prefix.get(j))
                })
                .map(|stage| (true, Evidence::Approximation { stage }))
        };
        if let Some((bit, evidence)) = settled {
            prefix.push(bit);
            if bit {
                ones.push(k);
            }
            trace.push(Resolution {
                position: k,
                bit,
                evidence,
            });
            k += 1;
            continue;
        }

        let q_done = examined == q_total;
        if comp_done && q_done {
            return Err(CototalError::UnresolvedAt(k));
        }
        let mut pick = schedule.preferred(step);
        step += 1;
        if (pick == Watcher::Comp && comp_done) || (pick == Watcher::Q && q_done) {
            pick = if pick == Watcher::Comp {
                Watcher::Q
            } else {
                Watcher::Comp
            };
        }
        match pick {
            Watcher::Comp => match comp.next() {
                Some(x) => {
                    if x < width && seen_comp[x].is_none() {
                        seen_comp[x] = Some(comp_events);
                    }
                    comp_events += 1;
                }
                None => comp_done = true,
            },
            Watcher::Q => examined += 1,
        }
    }
    let universe = Universe::new(width).expect("width >= 1");
    Ok(Emission {
        ones: SetEnumeration::new(universe, ones).expect("positions are distinct"),
        trace,
    })
}
