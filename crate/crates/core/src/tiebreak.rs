use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// How a choice among equally ranked candidates is resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TiebreakPolicy {
    /// First candidate in canonical order.
    #[default]
    Canonical,
    /// Uniform choice from a stream seeded with this value.
    Seeded(u64),
}

impl TiebreakPolicy {
    pub fn breaker(self) -> Tiebreak {
        match self {
            TiebreakPolicy::Canonical => Tiebreak::Canonical,
            TiebreakPolicy::Seeded(seed) => Tiebreak::Seeded(ChaCha8Rng::seed_from_u64(seed)),
        }
    }
}

#[derive(Debug, Clone)]
pub enum Tiebreak {
    Canonical,
    Seeded(ChaCha8Rng),
}

impl Tiebreak {
    /// Picks one of `candidates`, which must already be in canonical order.
    pub fn pick<T: Copy>(&mut self, candidates: &[T]) -> Option<T> {
        if candidates.is_empty() {
            return None;
        }
        match self {
            Tiebreak::Canonical => Some(candidates[0]),
            Tiebreak::Seeded(rng) => Some(candidates[rng.random_range(0..candidates.len())]),
        }
    }

    pub fn pick_index(&mut self, len: usize) -> Option<usize> {
        match len {
            0 => None,
            _ => match self {
                Tiebreak::Canonical => Some(0),
                Tiebreak::Seeded(rng) => Some(rng.random_range(0..len)),
            },
        }
    }
}

impl Default for Tiebreak {
    fn default() -> Self {
        Tiebreak::Canonical
    }
}
