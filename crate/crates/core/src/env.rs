//! States, declarative programs, vocabularies and implementable languages.
//!
//! A program is stored extensionally as the set of states where it returns
//! true. A statement is a set of programs from one vocabulary, held as a bit
//! mask over vocabulary positions (programs sorted by id), so vocabularies
//! are limited to 64 programs. Languages are enumerated up front and every
//! statement gets a stable index; sets of statements are bit sets over those
//! indices.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bitset::BitSet;
use crate::error::{Error, Result};

/// Subset enumeration cap used by [`Language::build`] unless overridden.
pub const DEFAULT_SUBSET_CAP: u64 = 1 << 20;

/// Largest vocabulary a statement mask can address.
pub const MAX_VOCABULARY: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ProgramId(pub u32);

impl fmt::Display for ProgramId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateSpace {
    size: usize,
    present: Option<usize>,
}

impl StateSpace {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::domain("state space must contain at least one state"));
        }
        Ok(StateSpace {
            size,
            present: None,
        })
    }

    pub fn with_present(mut self, state: usize) -> Result<Self> {
        self.check(state)?;
        self.present = Some(state);
        Ok(self)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn present(&self) -> Option<usize> {
        self.present
    }

    pub fn all(&self) -> BitSet {
        BitSet::full(self.size)
    }

    fn check(&self, state: usize) -> Result<()> {
        if state >= self.size {
            return Err(Error::domain(format!(
                "state {state} out of range for {} states",
                self.size
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    id: ProgramId,
    truth: BitSet,
}

impl Program {
    pub fn new(id: ProgramId, states: impl IntoIterator<Item = usize>) -> Self {
        Program {
            id,
            truth: states.into_iter().collect(),
        }
    }

    pub fn id(&self) -> ProgramId {
        self.id
    }

    pub fn truth_set(&self) -> &BitSet {
        &self.truth
    }

    pub fn holds(&self, state: usize) -> bool {
        self.truth.contains(state)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    space: StateSpace,
    programs: Vec<Program>,
}

impl Vocabulary {
    pub fn new(space: StateSpace, mut programs: Vec<Program>) -> Result<Self> {
        if programs.is_empty() {
            return Err(Error::domain("vocabulary must contain at least one program"));
        }
        if programs.len() > MAX_VOCABULARY {
            return Err(Error::ResourceLimit {
                what: "vocabulary size".into(),
                cap: MAX_VOCABULARY as u64,
            });
        }
        programs.sort_by_key(|p| p.id);
        for w in programs.windows(2) {
            if w[0].id == w[1].id {
                return Err(Error::domain(format!("duplicate program id {}", w[0].id)));
            }
        }
        for p in &programs {
            if p.truth.bound() > space.size {
                return Err(Error::domain(format!(
                    "program {} is true at a state outside 0..{}",
                    p.id, space.size
                )));
            }
        }
        Ok(Vocabulary { space, programs })
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn programs(&self) -> &[Program] {
        &self.programs
    }

    pub fn len(&self) -> usize {
        self.programs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.programs.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = ProgramId> + '_ {
        self.programs.iter().map(|p| p.id)
    }

    pub fn position(&self, id: ProgramId) -> Option<usize> {
        self.programs.binary_search_by_key(&id, |p| p.id).ok()
    }

    pub fn contains(&self, id: ProgramId) -> bool {
        self.position(id).is_some()
    }

    /// Builds a statement from program ids; every id must belong here.
    /// Satisfiability is not checked.
    pub fn statement(&self, ids: &[ProgramId]) -> Result<Statement> {
        let mut mask = 0u64;
        for &id in ids {
            let pos = self.position(id).ok_or_else(|| {
                Error::MalformedStatement(format!("program {id} is not in the vocabulary"))
            })?;
            mask |= 1 << pos;
        }
        Ok(Statement(mask))
    }

    /// The part of an id set this vocabulary can express; unknown ids are dropped.
    pub fn project(&self, ids: &[ProgramId]) -> Statement {
        let mut mask = 0u64;
        for &id in ids {
            if let Some(pos) = self.position(id) {
                mask |= 1 << pos;
            }
        }
        Statement(mask)
    }

    pub fn ids_of(&self, stmt: Statement) -> Vec<ProgramId> {
        stmt.positions().map(|p| self.programs[p].id).collect()
    }

    fn check(&self, stmt: Statement) -> Result<()> {
        let n = self.programs.len();
        if n < 64 && stmt.0 >> n != 0 {
            return Err(Error::MalformedStatement(format!(
                "statement {stmt:?} refers to programs outside a vocabulary of {n}"
            )));
        }
        Ok(())
    }

    /// States where every member program is true (all states for the empty statement).
    pub fn satisfying_states(&self, stmt: Statement) -> Result<BitSet> {
        self.check(stmt)?;
        let mut states = self.space.all();
        for pos in stmt.positions() {
            states = states.intersection(&self.programs[pos].truth);
        }
        Ok(states)
    }

    pub fn is_satisfiable(&self, stmt: Statement) -> Result<bool> {
        Ok(!self.satisfying_states(stmt)?.is_empty())
    }

    pub fn is_true_at(&self, stmt: Statement, state: usize) -> Result<bool> {
        self.space.check(state)?;
        self.check(stmt)?;
        Ok(stmt
            .positions()
            .all(|pos| self.programs[pos].truth.contains(state)))
    }

    /// Truth of a statement at the present state, if one is singled out.
    pub fn is_true(&self, stmt: Statement) -> Result<Option<bool>> {
        match self.space.present {
            None => Ok(None),
            Some(state) => self.is_true_at(stmt, state).map(Some),
        }
    }

    /// A vocabulary over the same states containing only the given ids.
    pub fn restrict(&self, ids: &[ProgramId]) -> Result<Vocabulary> {
        let mut programs = Vec::with_capacity(ids.len());
        for &id in ids {
            let pos = self
                .position(id)
                .ok_or_else(|| Error::domain(format!("program {id} is not defined")))?;
            programs.push(self.programs[pos].clone());
        }
        Vocabulary::new(self.space.clone(), programs)
    }
}

/// A set of programs of one vocabulary, as a mask over vocabulary positions.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Statement(pub u64);

impl Statement {
    pub const EMPTY: Statement = Statement(0);

    pub fn positions(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let p = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(p)
            }
        })
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub fn is_subset(self, other: Statement) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn union(self, other: Statement) -> Statement {
        Statement(self.0 | other.0)
    }
}

impl Ord for Statement {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.positions().cmp(other.positions()))
    }
}

impl PartialOrd for Statement {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Statement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.positions()).finish()
    }
}

/// Languages at or below this size precompute every statement's extension.
const EXTENSION_TABLE_LIMIT: usize = 4096;

/// An implementable language: every satisfiable statement of a vocabulary,
/// in canonical order.
pub struct Language {
    vocab: Arc<Vocabulary>,
    statements: Vec<Statement>,
    index: HashMap<Statement, usize>,
    extensions: Option<Vec<BitSet>>,
}

impl fmt::Debug for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Language")
            .field("programs", &self.vocab.ids().collect::<Vec<_>>())
            .field("statements", &self.statements.len())
            .finish()
    }
}

impl Language {
    pub fn build(vocab: Vocabulary) -> Result<Arc<Language>> {
        Self::build_with_cap(vocab, DEFAULT_SUBSET_CAP)
    }

    pub fn build_with_cap(vocab: Vocabulary, cap: u64) -> Result<Arc<Language>> {
        let n = vocab.len();
        let subsets = if n >= 64 { u64::MAX } else { 1u64 << n };
        if subsets > cap {
            return Err(Error::ResourceLimit {
                what: format!("language enumeration needs 2^{n} subsets"),
                cap,
            });
        }
        let mut statements = Vec::new();
        // Depth-first over programs; an unsatisfiable prefix prunes all its supersets.
        let truths: Vec<&BitSet> = vocab.programs.iter().map(|p| &p.truth).collect();
        let mut stack = vec![(0usize, 0u64, vocab.space.all())];
        while let Some((next, mask, states)) = stack.pop() {
            statements.push(Statement(mask));
            for pos in next..n {
                let narrowed = states.intersection(truths[pos]);
                if !narrowed.is_empty() {
                    stack.push((pos + 1, mask | 1 << pos, narrowed));
                }
            }
        }
        statements.sort();
        let index = statements
            .iter()
            .enumerate()
            .map(|(i, &s)| (s, i))
            .collect();
        let mut lang = Language {
            vocab: Arc::new(vocab),
            statements,
            index,
            extensions: None,
        };
        if lang.statements.len() <= EXTENSION_TABLE_LIMIT {
            let table = (0..lang.statements.len())
                .map(|i| lang.scan_extension(i))
                .collect();
            lang.extensions = Some(table);
        }
        Ok(Arc::new(lang))
    }

    pub fn vocabulary(&self) -> &Arc<Vocabulary> {
        &self.vocab
    }

    pub fn len(&self) -> usize {
        self.statements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.statements.is_empty()
    }

    pub fn statements(&self) -> &[Statement] {
        &self.statements
    }

    pub fn statement(&self, index: usize) -> Statement {
        self.statements[index]
    }

    pub fn index_of(&self, stmt: Statement) -> Option<usize> {
        self.index.get(&stmt).copied()
    }

    pub fn require(&self, stmt: Statement) -> Result<usize> {
        self.index_of(stmt).ok_or_else(|| {
            Error::domain(format!(
                "statement {:?} is not in the language",
                self.vocab.ids_of(stmt)
            ))
        })
    }

    /// Index of the statement with these ids.
    pub fn parse(&self, ids: &[ProgramId]) -> Result<usize> {
        let stmt = self.vocab.statement(ids)?;
        self.require(stmt)
    }

    pub fn ids(&self, index: usize) -> Vec<ProgramId> {
        self.vocab.ids_of(self.statements[index])
    }

    /// Every index, i.e. the whole language as a statement set.
    pub fn all(&self) -> BitSet {
        BitSet::full(self.statements.len())
    }

    pub fn same_as(&self, other: &Language) -> bool {
        std::ptr::eq(self, other) || self.vocab == other.vocab
    }

    fn scan_extension(&self, index: usize) -> BitSet {
        let base = self.statements[index];
        self.statements
            .iter()
            .enumerate()
            .skip(index)
            .filter(|(_, s)| base.is_subset(**s))
            .map(|(i, _)| i)
            .collect()
    }

    /// Z_a: statements of the language that contain statement `index`.
    pub fn extension(&self, index: usize) -> BitSet {
        match &self.extensions {
            Some(table) => table[index].clone(),
            None => self.scan_extension(index),
        }
    }

    fn with_extension<R>(&self, index: usize, f: impl FnOnce(&BitSet) -> R) -> R {
        match &self.extensions {
            Some(table) => f(&table[index]),
            None => f(&self.scan_extension(index)),
        }
    }

    /// Z_A: union of member extensions.
    pub fn extension_of_set(&self, set: &BitSet) -> BitSet {
        let mut out = BitSet::new();
        for i in set {
            self.with_extension(i, |z| out.union_with(z));
        }
        out
    }

    /// Z_S ∩ Z_l without materialising Z_l.
    pub fn restrict_to_extension(&self, decisions: &BitSet, index: usize) -> BitSet {
        self.with_extension(index, |z| decisions.intersection(z))
    }

    /// Checked variant of [`Language::extension`] for statements given by value.
    pub fn extension_of(&self, stmt: Statement) -> Result<BitSet> {
        Ok(self.extension(self.require(stmt)?))
    }

    pub fn check_set(&self, set: &BitSet) -> Result<()> {
        if set.bound() > self.len() {
            return Err(Error::domain("statement set refers to indices outside the language"));
        }
        Ok(())
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub fn pid(i: u32) -> ProgramId {
        ProgramId(i)
    }

    /// Four states; p1 ↦ {0,1}, p2 ↦ {0,2}, p3 ↦ {1,3}.
    pub fn v3() -> Vocabulary {
        Vocabulary::new(
            StateSpace::new(4).unwrap(),
            vec![
                Program::new(pid(1), [0, 1]),
                Program::new(pid(2), [0, 2]),
                Program::new(pid(3), [1, 3]),
            ],
        )
        .unwrap()
    }

    pub fn v3_lang() -> Arc<Language> {
        Language::build(v3()).unwrap()
    }

    pub fn idx(lang: &Language, ids: &[u32]) -> usize {
        let ids: Vec<_> = ids.iter().map(|&i| pid(i)).collect();
        lang.parse(&ids).unwrap()
    }

    pub fn set(lang: &Language, stmts: &[&[u32]]) -> BitSet {
        stmts.iter().map(|s| idx(lang, s)).collect()
    }
}
