//! Enumeration operators as explicit axiom lists.
//!
//! An axiom `⟨x, D⟩` enumerates `x` once every member of the finite body `D`
//! is present in the input. The axiom list order is the enumeration order of
//! the operator: at stage `s` only the first `s` axioms are visible.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::universe::{BitVector, SetEnumeration, Universe, UniverseError};

/// Largest body search space `reify_composition` will explore.
pub const REIFY_SEARCH_LIMIT: u64 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnumOpError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: head {head} outside universe of size {size}")]
    HeadOutOfUniverse {
        line: usize,
        head: usize,
        size: usize,
    },
    #[error("line {line}: body element {element} outside universe of size {size}")]
    BodyOutOfUniverse {
        line: usize,
        element: usize,
        size: usize,
    },
    #[error("missing `universe <N>` header")]
    MissingUniverse,
    #[error("operators live in different universes ({0} vs {1})")]
    UniverseMismatch(usize, usize),
    #[error("composition needs at least one operator")]
    EmptyComposition,
    #[error(
        "composition search space {0} exceeds {REIFY_SEARCH_LIMIT}; too large, use apply_composed"
    )]
    TooLarge(u64),
    #[error(transparent)]
    Universe(#[from] UniverseError),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Axiom {
    pub head: usize,
    pub body: BitVector,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnumerationOperator {
    universe: Universe,
    name: String,
    axioms: Vec<Axiom>,
}

/// One output event of [`EnumerationOperator::stream_trace`]: `element` was
/// emitted after `reads` input elements had been consumed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamEvent {
    pub reads: usize,
    pub element: usize,
}

impl EnumerationOperator {
    pub fn new(universe: Universe, name: impl Into<String>) -> Self {
        EnumerationOperator {
            universe,
            name: name.into(),
            axioms: Vec::new(),
        }
    }

    /// Builds an operator from `(head, body elements)` pairs, checking bounds.
    pub fn from_axioms<I, B>(
        universe: Universe,
        name: impl Into<String>,
        axioms: I,
    ) -> Result<Self, EnumOpError>
    where
        I: IntoIterator<Item = (usize, B)>,
        B: IntoIterator<Item = usize>,
    {
        let mut op = Self::new(universe, name);
        for (head, body) in axioms {
            op.push_axiom(head, body)?;
        }
        Ok(op)
    }

    pub fn push_axiom<B>(&mut self, head: usize, body: B) -> Result<(), EnumOpError>
    where
        B: IntoIterator<Item = usize>,
    {
        let line = self.axioms.len() + 1;
        let size = self.universe.size();
        if head >= size {
            return Err(EnumOpError::HeadOutOfUniverse { line, head, size });
        }
        let mut set = BitVector::empty_set(self.universe);
        for element in body {
            if element >= size {
                return Err(EnumOpError::BodyOutOfUniverse {
                    line,
                    element,
                    size,
                });
            }
            set.set(element, true);
        }
        self.axioms.push(Axiom { head, body: set });
        Ok(())
    }

    pub fn universe(&self) -> Universe {
        self.universe
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn axioms(&self) -> &[Axiom] {
        &self.axioms
    }

    pub fn len(&self) -> usize {
        self.axioms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.axioms.is_empty()
    }

    /// The operator `{⟨x,{x}⟩ : x < N}`, which copies its input.
    pub fn identity(universe: Universe) -> Self {
        Self::from_axioms(universe, "identity", (0..universe.size()).map(|x| (x, [x])))
            .expect("identity axioms are in range")
    }

    /// `{ x : ∃⟨x,D⟩, D ⊆ B }`.
    pub fn apply(&self, input: &BitVector) -> BitVector {
        self.stage_apply(input, self.axioms.len())
    }

    /// `apply` restricted to the first `min(stage, |axioms|)` axioms.
    pub fn stage_apply(&self, input: &BitVector, stage: usize) -> BitVector {
        let mut out = BitVector::empty_set(self.universe);
        for ax in self.axioms.iter().take(stage) {
            if !out.get(ax.head) && ax.body.is_subset(input) {
                out.set(ax.head, true);
            }
        }
        out
    }

    /// Runs the operator against an enumeration of its input, emitting each
    /// head the first moment one of its bodies is covered. Simultaneous
    /// firings are emitted in axiom order.
    pub fn apply_stream(&self, input: &SetEnumeration) -> SetEnumeration {
        let items = self
            .stream_trace(input)
            .into_iter()
            .map(|e| e.element)
            .collect();
        SetEnumeration::new(self.universe, items).expect("heads are distinct and in range")
    }

    pub fn stream_trace(&self, input: &SetEnumeration) -> Vec<StreamEvent> {
        let size = self.universe.size();
        let mut missing: Vec<usize> = self.axioms.iter().map(|a| a.body.count_ones()).collect();
        let mut by_element: Vec<Vec<usize>> = vec![Vec::new(); size];
        for (k, ax) in self.axioms.iter().enumerate() {
            for e in ax.body.ones() {
                by_element[e].push(k);
            }
        }
        let mut emitted = BitVector::empty_set(self.universe);
        let mut events = Vec::new();
        let mut fire = |ready: &mut Vec<usize>, reads: usize, events: &mut Vec<StreamEvent>| {
            ready.sort_unstable();
            for &k in ready.iter() {
                let head = self.axioms[k].head;
                if !emitted.get(head) {
                    emitted.set(head, true);
                    events.push(StreamEvent {
                        reads,
                        element: head,
                    });
                }
            }
            ready.clear();
        };
        let mut ready: Vec<usize> = (0..self.axioms.len())
            .filter(|&k| missing[k] == 0)
            .collect();
        fire(&mut ready, 0, &mut events);
        for (r, x) in input.iter().enumerate() {
            if x >= size {
                continue;
            }
            for &k in &by_element[x] {
                missing[k] -= 1;
                if missing[k] == 0 {
                    ready.push(k);
                }
            }
            fire(&mut ready, r + 1, &mut events);
        }
        events
    }

    /// Serializes to the operator text format.
    pub fn to_text(&self) -> String {
        let mut s = format!("universe {}\n", self.universe.size());
        for ax in &self.axioms {
            s.push_str(&format!("axiom {}", ax.head));
            for e in ax.body.ones() {
                s.push_str(&format!(" {e}"));
            }
            s.push('\n');
        }
        s
    }
}

impl fmt::Display for EnumerationOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Parses the operator text format:
///
/// ```text
/// # comment
/// universe 8
/// axiom 3 1 2
/// axiom 5
/// ```
pub fn parse_operator(text: &str) -> Result<EnumerationOperator, EnumOpError> {
    parse_operator_in(text, None)
}

/// Like [`parse_operator`], but a missing `universe` header falls back to
/// `universe`; a header that is present must agree with it.
pub fn parse_operator_in(
    text: &str,
    universe: Option<Universe>,
) -> Result<EnumerationOperator, EnumOpError> {
    let mut op: Option<EnumerationOperator> = None;
    let mut header_seen = false;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut toks = content.split_whitespace();
        let keyword = toks.next().expect("non-empty line");
        let numbers: Result<Vec<usize>, _> = toks.map(str::parse::<usize>).collect();
        let numbers = numbers.map_err(|e| EnumOpError::Parse {
            line,
            message: format!("bad number: {e}"),
        })?;
        match keyword {
            "universe" => {
                if header_seen || op.is_some() {
                    return Err(EnumOpError::Parse {
                        line,
                        message: "universe header must come first, once".into(),
                    });
                }
                header_seen = true;
                let [n] = numbers[..] else {
                    return Err(EnumOpError::Parse {
                        line,
                        message: "expected `universe <N>`".into(),
                    });
                };
                let u = Universe::new(n).map_err(|e| EnumOpError::Parse {
                    line,
                    message: e.to_string(),
                })?;
                if let Some(expected) = universe {
                    if expected != u {
                        return Err(EnumOpError::UniverseMismatch(n, expected.size()));
                    }
                }
                op = Some(EnumerationOperator::new(u, ""));
            }
            "axiom" => {
                if op.is_none() {
                    op = universe.map(|u| EnumerationOperator::new(u, ""));
                }
                let op = op.as_mut().ok_or(EnumOpError::MissingUniverse)?;
                let Some((&head, body)) = numbers.split_first() else {
                    return Err(EnumOpError::Parse {
                        line,
                        message: "axiom without head".into(),
                    });
                };
                op.push_axiom(head, body.iter().copied())
                    .map_err(|e| match e {
                        EnumOpError::HeadOutOfUniverse { head, size, .. } => {
                            EnumOpError::HeadOutOfUniverse { line, head, size }
                        }
                        EnumOpError::BodyOutOfUniverse { element, size, .. } => {
                            EnumOpError::BodyOutOfUniverse {
                                line,
                                element,
                                size,
                            }
                        }
                        other => other,
                    })?;
            }
            other => {
                return Err(EnumOpError::Parse {
                    line,
                    message: format!("unknown keyword {other:?}"),
                })
            }
        }
    }
    op.or_else(|| universe.map(|u| EnumerationOperator::new(u, "")))
        .ok_or(EnumOpError::MissingUniverse)
}

/// Right-to-left composition: `[Δ, Γ, Φ]` applied to `B` is `Δ(Γ(Φ(B)))`.
pub fn apply_composed(
    ops: &[EnumerationOperator],
    input: &BitVector,
) -> Result<BitVector, EnumOpError> {
    let (last, rest) = ops.split_last().ok_or(EnumOpError::EmptyComposition)?;
    let mut cur = last.apply(input);
    for op in rest.iter().rev() {
        cur = op.apply(&cur);
    }
    Ok(cur)
}

/// An explicit operator `G` with `G(B) = outer(inner(B))` for every `B`.
///
/// For each axiom `⟨x,E⟩` of `outer` and each choice of one `inner` axiom per
/// member of `E`, emits `⟨x, ⋃ bodies⟩`. Duplicate axioms are dropped.
pub fn reify_composition(
    outer: &EnumerationOperator,
    inner: &EnumerationOperator,
) -> Result<EnumerationOperator, EnumOpError> {
    if outer.universe() != inner.universe() {
        return Err(EnumOpError::UniverseMismatch(
            outer.universe().size(),
            inner.universe().size(),
        ));
    }
    let universe = inner.universe();
    let mut producers: Vec<Vec<&BitVector>> = vec![Vec::new(); universe.size()];
    for ax in inner.axioms() {
        producers[ax.head].push(&ax.body);
    }

    let mut space: u64 = 0;
    for ax in outer.axioms() {
        let mut product: u64 = 1;
        for e in ax.body.ones() {
            product = product.saturating_mul(producers[e].len() as u64);
        }
        space = space.saturating_add(product);
        if space > REIFY_SEARCH_LIMIT {
            return Err(EnumOpError::TooLarge(space));
        }
    }

    let name = format!("{}∘{}", outer.name(), inner.name());
    let mut out = EnumerationOperator::new(universe, name);
    let mut seen: BTreeSet<(usize, BitVector)> = BTreeSet::new();
    for ax in outer.axioms() {
        let needs: Vec<usize> = ax.body.ones().collect();
        if needs.iter().any(|&e| producers[e].is_empty()) {
            continue;
        }
        let limits: Vec<usize> = needs.iter().map(|&e| producers[e].len()).collect();
        let mut choice = vec![0usize; needs.len()];
        loop {
            let mut body = BitVector::empty_set(universe);
            for (slot, &e) in needs.iter().enumerate() {
                body = body.union(producers[e][choice[slot]]);
            }
            if seen.insert((ax.head, body.clone())) {
                out.axioms.push(Axiom {
                    head: ax.head,
                    body,
                });
            }
            if !advance(&mut choice, &limits) {
                break;
            }
        }
    }
    Ok(out)
}

/// Mixed-radix increment; false once every combination has been visited.
fn advance(choice: &mut [usize], limits: &[usize]) -> bool {
    for (c, &l) in choice.iter_mut().zip(limits) {
        *c += 1;
        if *c < l {
            return true;
        }
        *c = 0;
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn u(n: usize) -> Universe {
        Universe::new(n).unwrap()
    }

    fn set(n: usize, xs: &[usize]) -> BitVector {
        BitVector::from_indices(n, xs.iter().copied()).unwrap()
    }

    fn random_op(
        rng: &mut ChaCha8Rng,
        n: usize,
        axioms: usize,
        max_body: usize,
    ) -> EnumerationOperator {
        let mut op = EnumerationOperator::new(u(n), "rand");
        for _ in 0..axioms {
            let head = rng.gen_range(0..n);
            let k = rng.gen_range(0..=max_body);
            let body: Vec<usize> = (0..k).map(|_| rng.gen_range(0..n)).collect();
            op.push_axiom(head, body).unwrap();
        }
        op
    }

    #[test]
    fn parse_examples() {
        let op = parse_operator("universe 8\naxiom 3 1 2").unwrap();
        assert_eq!(op.len(), 1);
        assert_eq!(op.axioms()[0].head, 3);
        assert_eq!(op.axioms()[0].body, set(8, &[1, 2]));

        let empty = parse_operator("universe 8\n").unwrap();
        assert!(empty.is_empty());
        let empty = parse_operator_in("", Some(u(8))).unwrap();
        assert!(empty.is_empty());
        assert_eq!(empty.universe(), u(8));

        let err = parse_operator("universe 8\naxiom 9 0").unwrap_err();
        assert_eq!(
            err,
            EnumOpError::HeadOutOfUniverse {
                line: 2,
                head: 9,
                size: 8
            }
        );
        let err = parse_operator_in("axiom 9 0", Some(u(8))).unwrap_err();
        assert_eq!(
            err,
            EnumOpError::HeadOutOfUniverse {
                line: 1,
                head: 9,
                size: 8
            }
        );
        assert!(matches!(
            parse_operator_in("universe 4", Some(u(8))),
            Err(EnumOpError::UniverseMismatch(4, 8))
        ));

        let err = parse_operator("universe 8\n# c\naxiom 1 8").unwrap_err();
        assert_eq!(
            err,
            EnumOpError::BodyOutOfUniverse {
                line: 3,
                element: 8,
                size: 8
            }
        );

        assert_eq!(parse_operator("axiom 1"), Err(EnumOpError::MissingUniverse));
        assert_eq!(parse_operator(""), Err(EnumOpError::MissingUniverse));
        assert!(matches!(
            parse_operator("universe 4\nfrob 1"),
            Err(EnumOpError::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_operator("universe 4\naxiom x"),
            Err(EnumOpError::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn serializer_round_trips_modulo_comments() {
        let text = "universe 8\naxiom 3 1 2\naxiom 5\naxiom 0 0 7\n";
        let commented = "# header\nuniverse 8\naxiom 3 1 2 # two\n\naxiom 5\naxiom 0 0 7\n";
        assert_eq!(parse_operator(text).unwrap().to_text(), text);
        assert_eq!(parse_operator(commented).unwrap().to_text(), text);
    }

    #[test]
    fn apply_examples() {
        let op = EnumerationOperator::from_axioms(u(8), "g", [(3, vec![1, 2])]).unwrap();
        assert_eq!(op.apply(&set(8, &[1, 2])), set(8, &[3]));
        assert!(op.apply(&set(8, &[1])).is_empty());
        let empty = EnumerationOperator::new(u(8), "e");
        assert!(empty.apply(&BitVector::full(8)).is_empty());
    }

    #[test]
    fn stage_apply_examples() {
        let op = EnumerationOperator::from_axioms(u(8), "g", [(3, [1]), (4, [1])]).unwrap();
        let b = set(8, &[1]);
        assert!(op.stage_apply(&b, 0).is_empty());
        assert_eq!(op.stage_apply(&b, 1), set(8, &[3]));
        assert_eq!(op.stage_apply(&b, 2), op.apply(&b));
        assert_eq!(op.stage_apply(&b, 99), op.apply(&b));
    }

    #[test]
    fn stream_examples() {
        let op = EnumerationOperator::from_axioms(u(8), "g", [(3, vec![1, 2])]).unwrap();
        let e = SetEnumeration::new(u(8), vec![2, 1]).unwrap();
        assert_eq!(
            op.stream_trace(&e),
            vec![StreamEvent {
                reads: 2,
                element: 3
            }]
        );

        let op = EnumerationOperator::from_axioms(u(8), "g", [(3, Vec::<usize>::new())]).unwrap();
        let e = SetEnumeration::new(u(8), vec![]).unwrap();
        assert_eq!(
            op.stream_trace(&e),
            vec![StreamEvent {
                reads: 0,
                element: 3
            }]
        );
    }

    #[test]
    fn stream_ties_follow_axiom_order() {
        let op =
            EnumerationOperator::from_axioms(u(8), "g", [(6, [1]), (2, [1]), (6, [0])]).unwrap();
        let e = SetEnumeration::new(u(8), vec![1, 0]).unwrap();
        assert_eq!(op.apply_stream(&e).items(), &[6, 2]);
    }

    #[test]
    fn stream_agrees_with_apply_on_random_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let n = rng.gen_range(1..=12);
            let k = rng.gen_range(0..10);
            let op = random_op(&mut rng, n, k, 3);
            let mut items: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
            rand::seq::SliceRandom::shuffle(&mut items[..], &mut rng);
            let e = SetEnumeration::new(u(n), items).unwrap();
            assert_eq!(op.apply_stream(&e).to_set(), op.apply(&e.to_set()));
        }
    }

    #[test]
    fn composition_examples() {
        let n = 8;
        let phi = EnumerationOperator::from_axioms(u(n), "phi", [(1, [0]), (2, [1])]).unwrap();
        let gamma = EnumerationOperator::from_axioms(u(n), "gamma", [(4, [1]), (5, [2])]).unwrap();
        let delta = EnumerationOperator::from_axioms(u(n), "delta", [(7, [4, 5])]).unwrap();
        let b = set(n, &[0, 1]);
        let three = apply_composed(&[delta.clone(), gamma.clone(), phi.clone()], &b).unwrap();
        assert_eq!(three, delta.apply(&gamma.apply(&phi.apply(&b))));
        assert_eq!(three, set(n, &[7]));
        assert_eq!(
            apply_composed(std::slice::from_ref(&phi), &b).unwrap(),
            phi.apply(&b)
        );
        assert_eq!(apply_composed(&[], &b), Err(EnumOpError::EmptyComposition));
    }

    #[test]
    fn identity_composition_is_identity() {
        for n in 1..=10 {
            let id = EnumerationOperator::identity(u(n));
            for code in 0..(1u64 << n) {
                let b = BitVector::from_u64(n, code);
                assert_eq!(
                    apply_composed(&[id.clone(), id.clone(), id.clone()], &b).unwrap(),
                    b
                );
            }
        }
    }

    #[test]
    fn reify_examples() {
        let outer = EnumerationOperator::from_axioms(u(8), "o", [(5, [3])]).unwrap();
        let inner = EnumerationOperator::from_axioms(u(8), "i", [(3, [1, 2])]).unwrap();
        let g = reify_composition(&outer, &inner).unwrap();
        assert_eq!(
            g.axioms(),
            &[Axiom {
                head: 5,
                body: set(8, &[1, 2])
            }]
        );

        let outer =
            EnumerationOperator::from_axioms(u(8), "o", [(5, vec![3]), (6, vec![])]).unwrap();
        let g = reify_composition(&outer, &EnumerationOperator::new(u(8), "e")).unwrap();
        assert_eq!(
            g.axioms(),
            &[Axiom {
                head: 6,
                body: BitVector::zeros(8)
            }]
        );
    }

    #[test]
    fn reify_guard_trips() {
        let n = 24;
        let mut inner = EnumerationOperator::new(u(n), "wide");
        for x in 0..n {
            for y in 0..4 {
                inner.push_axiom(x, [y]).unwrap();
            }
        }
        let outer = EnumerationOperator::from_axioms(u(n), "big", [(0, 0..n)]).unwrap();
        assert!(matches!(
            reify_composition(&outer, &inner),
            Err(EnumOpError::TooLarge(_))
        ));
        let other = EnumerationOperator::new(u(5), "x");
        assert!(matches!(
            reify_composition(&outer, &other),
            Err(EnumOpError::UniverseMismatch(24, 5))
        ));
    }

    #[test]
    fn reify_matches_composition_exhaustively() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let n = rng.gen_range(1..=10);
            let k = rng.gen_range(0..12);
            let inner = random_op(&mut rng, n, k, 2);
            let k = rng.gen_range(0..8);
            let outer = random_op(&mut rng, n, k, 3);
            let g = reify_composition(&outer, &inner).unwrap();
            for code in 0..(1u64 << n) {
                let b = BitVector::from_u64(n, code);
                assert_eq!(g.apply(&b), outer.apply(&inner.apply(&b)));
            }
        }
    }

    #[test]
    fn operators_are_monotone_exhaustively() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10 {
            let n = rng.gen_range(1..=8);
            let op = random_op(&mut rng, n, 10, 3);
            for small in 0..(1u64 << n) {
                let a = op.apply(&BitVector::from_u64(n, small));
                // every superset of `small`
                let free = !small & ((1u64 << n) - 1);
                let mut extra = free;
                loop {
                    let big = BitVector::from_u64(n, small | extra);
                    assert!(a.is_subset(&op.apply(&big)));
                    if extra == 0 {
                        break;
                    }
                    extra = (extra - 1) & free;
                }
            }
        }
    }

    #[test]
    fn stage_apply_is_monotone_in_stage() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let n = rng.gen_range(1..=16);
            let op = random_op(&mut rng, n, 12, 3);
            let b = BitVector::from_u64(n, rng.gen());
            let mut prev = op.stage_apply(&b, 0);
            for s in 1..=op.len() {
                let cur = op.stage_apply(&b, s);
                assert!(prev.is_subset(&cur));
                prev = cur;
            }
            assert_eq!(prev, op.apply(&b));
        }
    }
}
