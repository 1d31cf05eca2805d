//! The self-delimiting header code and the prefix-free machine that rebuilds
//! `A↾n_m` from `A↾[m, n_m)` and an enumeration operator.
//!
//! An input is `0^{|σ|} 1 σ 0^{|τ|} 1 τ · payload` where σ and τ are the
//! minimal binary forms of `m` and `c_m` (the number of 1s of `A` in the
//! window being rebuilt). The decoder reads the payload one bit at a time and
//! runs one more operator stage after each bit, stopping as soon as `c_m`
//! window elements have been enumerated; that stopping rule is what makes
//! the payload length self-delimiting.
//!
//! When the payload reaches the end of the universe there is nothing left to
//! read, and the decoder keeps running stages until the operator's axiom list
//! is exhausted.

use std::fmt;

use thiserror::Error;

use crate::enumop::EnumerationOperator;
use crate::universe::BitVector;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MachineError {
    #[error("header truncated at bit {0}")]
    TruncatedHeader(usize),
    #[error("header value does not fit in 64 bits")]
    HeaderOverflow,
    #[error("insufficient payload: found {found} of {wanted} ones")]
    InsufficientPayload { found: usize, wanted: usize },
    #[error("universe too small for m={m}")]
    UniverseTooSmall { m: usize },
    #[error("window [{start}, {end}) does not fit universe of size {size}")]
    BadWindow {
        start: usize,
        end: usize,
        size: usize,
    },
    #[error("m must be at least 1")]
    ZeroWindow,
    #[error("operator enumerates {found} where the set has {expected} below {end}")]
    NotAnIntroenumerator {
        found: String,
        expected: String,
        end: usize,
    },
    #[error("input of length {input_len} exceeds the bound {bound}")]
    BoundViolated { input_len: usize, bound: usize },
    #[error("stage-{stage} cases not failed")]
    CasesNotFailed { stage: usize },
}

/// `0^{|σ|} 1 σ`, σ the binary form of `v` without leading zeros.
pub fn encode_header(v: u64) -> BitVector {
    let width = (64 - v.leading_zeros()) as usize;
    let mut out = BitVector::zeros(width);
    out.push(true);
    for k in (0..width).rev() {
        out.push(v >> k & 1 == 1);
    }
    out
}

/// Inverse of [`encode_header`] starting at bit `start`; returns the value
/// and the number of bits consumed.
pub fn decode_header(bits: &BitVector, start: usize) -> Result<(u64, usize), MachineError> {
    let mut pos = start;
    let mut width = 0usize;
    loop {
        if pos >= bits.len() {
            return Err(MachineError::TruncatedHeader(pos));
        }
        let b = bits.get(pos);
        pos += 1;
        if b {
            break;
        }
        width += 1;
    }
    if width > 64 {
        return Err(MachineError::HeaderOverflow);
    }
    if pos + width > bits.len() {
        return Err(MachineError::TruncatedHeader(bits.len()));
    }
    let v = (0..width).fold(0u64, |acc, k| (acc << 1) | u64::from(bits.get(pos + k)));
    Ok((v, pos + width - start))
}

/// A parsed or freshly encoded machine input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MachineInput {
    /// The full input γ.
    pub gamma: BitVector,
    pub m: usize,
    pub c_m: usize,
    /// Length of the two headers.
    pub header_len: usize,
    /// Length of the decoded output `A↾n_m`.
    pub n_m: usize,
    /// Offset of the rebuilt window (`|b|` in the relativized machine).
    pub offset: usize,
    /// Ones of `A` below `offset`, hardwired into the relativized decoder.
    pub ones_below: usize,
}

impl MachineInput {
    pub fn payload(&self) -> BitVector {
        self.gamma.slice(self.header_len..self.gamma.len())
    }

    pub fn len(&self) -> usize {
        self.gamma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gamma.len() == 0
    }
}

impl fmt::Display for MachineInput {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.gamma)
    }
}

/// Result of running the decoder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decoded {
    pub output: BitVector,
    /// Bits of the input read before halting.
    pub consumed: usize,
    pub m: usize,
    pub c_m: usize,
}

/// Staged rebuild of the window `[offset, offset+m)` and of `[0, offset)`
/// from `prefix · 0^m · payload`. Shared by encoder and decoder so both
/// use the same stopping rule.
struct Rebuild<'a> {
    gamma: &'a EnumerationOperator,
    prefix: &'a BitVector,
    m: usize,
    c_m: usize,
    ones_below: usize,
}

enum Halt {
    Done { enumerated: BitVector, end: usize },
    Starved { found: usize },
}

impl Rebuild<'_> {
    fn window_end(&self) -> usize {
        self.prefix.len() + self.m
    }

    fn satisfied(&self, enumerated: &BitVector) -> bool {
        let offset = self.prefix.len();
        let below = enumerated.ones().take_while(|&x| x < offset).count();
        let window = enumerated
            .ones()
            .filter(|&x| x >= offset && x < self.window_end())
            .count();
        below >= self.ones_below && window >= self.c_m
    }

    fn found(&self, enumerated: &BitVector) -> usize {
        let offset = self.prefix.len();
        enumerated
            .ones()
            .filter(|&x| x >= offset && x < self.window_end())
            .count()
    }

    /// Feeds payload bits from `next_bit` until the stopping rule fires.
    fn run(&self, mut next_bit: impl FnMut(usize) -> Option<bool>) -> Halt {
        let size = self.gamma.universe().size();
        let mut input = self.prefix.resized(size);
        let mut p = self.window_end();
        let mut stage = p;
        loop {
            let enumerated = if self.c_m == 0 && self.ones_below == 0 {
                BitVector::zeros(size)
            } else {
                self.gamma.stage_apply(&input, stage)
            };
            if self.satisfied(&enumerated) {
                return Halt::Done { enumerated, end: p };
            }
            if p < size {
                match next_bit(p) {
                    Some(bit) => {
                        if bit {
                            input.set(p, true);
                        }
                        p += 1;
                        stage = p.max(stage + 1);
                    }
                    None => {
                        return Halt::Starved {
                            found: self.found(&enumerated),
                        }
                    }
                }
            } else if stage < self.gamma.len() {
                stage += 1;
            } else {
                return Halt::Starved {
                    found: self.found(&enumerated),
                };
            }
        }
    }
}

fn check_window(gamma: &EnumerationOperator, offset: usize, m: usize) -> Result<(), MachineError> {
    let size = gamma.universe().size();
    if m == 0 {
        return Err(MachineError::ZeroWindow);
    }
    if offset + m > size {
        return Err(MachineError::BadWindow {
            start: offset,
            end: offset + m,
            size,
        });
    }
    Ok(())
}

fn encode_window(
    a: &BitVector,
    gamma: &EnumerationOperator,
    prefix: &BitVector,
    m: usize,
) -> Result<MachineInput, MachineError> {
    let offset = prefix.len();
    check_window(gamma, offset, m)?;
    let size = gamma.universe().size();
    let a = a.resized(size);
    let end = offset + m;
    let c_m = a.slice(offset..end).count_ones();
    let ones_below = a.slice(0..offset).count_ones();
    let job = Rebuild {
        gamma,
        prefix,
        m,
        c_m,
        ones_below,
    };
    let (enumerated, n_m) = match job.run(|p| Some(a.get(p))) {
        Halt::Done { enumerated, end } => (enumerated, end),
        Halt::Starved { .. } => return Err(MachineError::UniverseTooSmall { m }),
    };
    let got = enumerated.keep_below(end);
    if got != a.keep_below(end) {
        return Err(MachineError::NotAnIntroenumerator {
            found: got.prefix(end).to_string(),
            expected: a.prefix(end).to_string(),
            end,
        });
    }
    let header = encode_header(m as u64).concat(&encode_header(c_m as u64));
    let header_len = header.len();
    let gamma_bits = header.concat(&a.slice(end..n_m));
    Ok(MachineInput {
        gamma: gamma_bits,
        m,
        c_m,
        header_len,
        n_m,
        offset,
        ones_below,
    })
}

fn decode_window(
    input: &BitVector,
    gamma: &EnumerationOperator,
    prefix: &BitVector,
    ones_below: usize,
) -> Result<Decoded, MachineError> {
    let (m, used_m) = decode_header(input, 0)?;
    let (c_m, used_c) = decode_header(input, used_m)?;
    let header_len = used_m + used_c;
    let (m, c_m) = (m as usize, c_m as usize);
    check_window(gamma, prefix.len(), m)?;
    let end = prefix.len() + m;
    let job = Rebuild {
        gamma,
        prefix,
        m,
        c_m,
        ones_below,
    };
    let mut cursor = header_len;
    let halt = job.run(|_| {
        if cursor < input.len() {
            cursor += 1;
            Some(input.get(cursor - 1))
        } else {
            None
        }
    });
    match halt {
        Halt::Done {
            enumerated,
            end: n_m,
        } => {
            let rebuilt = enumerated.prefix(end);
            let payload = input.slice(header_len..cursor);
            debug_assert_eq!(rebuilt.len() + payload.len(), n_m);
            Ok(Decoded {
                output: rebuilt.concat(&payload),
                consumed: cursor,
                m,
                c_m,
            })
        }
        Halt::Starved { found } => Err(MachineError::InsufficientPayload { found, wanted: c_m }),
    }
}

/// Encodes `A↾n_m` for the window `[0, m)`, with `n_m` the first position at
/// which the staged operator has enumerated all of `A↾m` from
/// `0^m · A↾[m, n_m)`.
pub fn machine_encode(
    a: &BitVector,
    gamma: &EnumerationOperator,
    m: usize,
) -> Result<MachineInput, MachineError> {
    encode_window(a, gamma, &BitVector::zeros(0), m)
}

/// Runs the machine on `input`, which may carry trailing bits it never reads.
pub fn machine_decode(
    input: &BitVector,
    gamma: &EnumerationOperator,
) -> Result<Decoded, MachineError> {
    decode_window(input, gamma, &BitVector::zeros(0), 0)
}

/// Relativized encoder: the window is `[|b|, |b|+m)` and the operator is fed
/// `b · 0^m · A↾[|b|+m, n_m)`. The returned input records `ones_below`,
/// which the matching decoder must be built with.
pub fn machine_encode_rel(
    a: &BitVector,
    gamma: &EnumerationOperator,
    prefix: &BitVector,
    m: usize,
) -> Result<MachineInput, MachineError> {
    encode_window(a, gamma, prefix, m)
}

/// Decoder for [`machine_encode_rel`]; `prefix` and `ones_below` are
/// constants of the machine.
pub fn machine_decode_rel(
    input: &BitVector,
    gamma: &EnumerationOperator,
    prefix: &BitVector,
    ones_below: usize,
) -> Result<Decoded, MachineError> {
    decode_window(input, gamma, prefix, ones_below)
}

/// `⌈log₂(m+1)⌉`, the bit length of `m`.
pub fn bit_length(m: usize) -> usize {
    (usize::BITS - m.leading_zeros()) as usize
}

/// `n_m − m + 4⌈log₂(m+1)⌉ + 2`.
pub fn length_bound(n_m: usize, m: usize) -> usize {
    n_m - m + 4 * bit_length(m) + 2
}

/// One row of the compression report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Report {
    pub m: usize,
    pub c_m: usize,
    pub n_m: usize,
    pub input_len: usize,
    pub bound: usize,
    pub slack: usize,
}

impl Report {
    pub const CSV_HEADER: &'static str = "m,c_m,n_m,input_len,bound,slack";

    pub fn from_input(input: &MachineInput) -> Result<Self, MachineError> {
        let bound = length_bound(input.n_m, input.m);
        let input_len = input.len();
        if input_len > bound {
            return Err(MachineError::BoundViolated { input_len, bound });
        }
        Ok(Report {
            m: input.m,
            c_m: input.c_m,
            n_m: input.n_m,
            input_len,
            bound,
            slack: bound - input_len,
        })
    }

    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.m, self.c_m, self.n_m, self.input_len, self.bound, self.slack
        )
    }
}

pub fn compression_report(
    a: &BitVector,
    gamma: &EnumerationOperator,
    m: usize,
) -> Result<Report, MachineError> {
    Report::from_input(&machine_encode(a, gamma, m)?)
}
