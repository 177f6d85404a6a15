//! Index schedules i(n): adjacent indices distinct, every index
//! infinitely often (window coverage as the finite surrogate).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Name of the pseudorandom generator behind `SeededRandom`; part of the
/// reproducibility contract and recorded in run metadata.
pub const RNG_NAME: &str = "chacha8";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScheduleSpec {
    Cyclic {
        #[serde(rename = "K")]
        k: usize,
    },
    Random {
        #[serde(rename = "K")]
        k: usize,
        seed: u64,
    },
    Custom {
        #[serde(rename = "K")]
        k: usize,
        list: Vec<usize>,
        wrap: bool,
    },
}

impl ScheduleSpec {
    pub fn k(&self) -> usize {
        match self {
            ScheduleSpec::Cyclic { k } => *k,
            ScheduleSpec::Random { k, .. } => *k,
            ScheduleSpec::Custom { k, .. } => *k,
        }
    }
}

#[derive(Clone, Debug)]
enum State {
    Cyclic { next: usize },
    Random { rng: ChaCha8Rng, prev: Option<usize> },
    Custom { pos: usize },
}

/// Generator of the index sequence. Indices are 1-based, in 1..=K.
#[derive(Clone, Debug)]
pub struct Schedule {
    spec: ScheduleSpec,
    state: State,
}

impl Schedule {
    pub fn cyclic(k: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::InstanceInvalid("schedule needs K >= 2".into()));
        }
        Ok(Schedule {
            spec: ScheduleSpec::Cyclic { k },
            state: State::Cyclic { next: 1 },
        })
    }

    pub fn seeded_random(k: usize, seed: u64) -> Result<Self> {
        if k < 2 {
            return Err(Error::InstanceInvalid("schedule needs K >= 2".into()));
        }
        Ok(Schedule {
            spec: ScheduleSpec::Random { k, seed },
            state: State::Random {
                rng: ChaCha8Rng::seed_from_u64(seed),
                prev: None,
            },
        })
    }

    pub fn custom(k: usize, list: Vec<usize>, wrap: bool) -> Result<Self> {
        if k < 2 {
            return Err(Error::InstanceInvalid("schedule needs K >= 2".into()));
        }
        if list.is_empty() {
            return Err(Error::InvalidCustom("empty index list".into()));
        }
        for &i in &list {
            if i < 1 || i > k {
                return Err(Error::InvalidCustom(format!("index {i} out of 1..={k}")));
            }
        }
        for w in list.windows(2) {
            if w[0] == w[1] {
                return Err(Error::InvalidCustom(format!("adjacent repeat of index {}", w[0])));
            }
        }
        if wrap {
            if list.len() > 1 && list[0] == *list.last().unwrap() {
                return Err(Error::InvalidCustom(
                    "wraparound junction repeats an index".into(),
                ));
            }
            for i in 1..=k {
                if !list.contains(&i) {
                    return Err(Error::InvalidCustom(format!(
                        "wraparound list never emits index {i}"
                    )));
                }
            }
        }
        Ok(Schedule {
            spec: ScheduleSpec::Custom { k, list, wrap },
            state: State::Custom { pos: 0 },
        })
    }

    pub fn from_spec(spec: &ScheduleSpec) -> Result<Self> {
        match spec {
            ScheduleSpec::Cyclic { k } => Schedule::cyclic(*k),
            ScheduleSpec::Random { k, seed } => Schedule::seeded_random(*k, *seed),
            ScheduleSpec::Custom { k, list, wrap } => Schedule::custom(*k, list.clone(), *wrap),
        }
    }

    pub fn spec(&self) -> &ScheduleSpec {
        &self.spec
    }

    pub fn k(&self) -> usize {
        self.spec.k()
    }

    /// Next index i(n); `None` when a non-wrapping custom list is spent.
    pub fn next_index(&mut self) -> Option<usize> {
        let k = self.k();
        match (&mut self.state, &self.spec) {
            (State::Cyclic { next }, _) => {
                let i = *next;
                *next = if i == k { 1 } else { i + 1 };
                Some(i)
            }
            (State::Random { rng, prev }, _) => {
                let i = match *prev {
                    None => rng.gen_range(1..=k),
                    Some(p) => {
                        // uniform over the k-1 indices different from p
                        let r = rng.gen_range(1..k);
                        if r >= p {
                            r + 1
                        } else {
                            r
                        }
                    }
                };
                *prev = Some(i);
                Some(i)
            }
            (State::Custom { pos }, ScheduleSpec::Custom { list, wrap, .. }) => {
                if *pos >= list.len() {
                    if !*wrap {
                        return None;
                    }
                    *pos = 0;
                }
                let i = list[*pos];
                *pos += 1;
                Some(i)
            }
            _ => unreachable!("state/spec mismatch"),
        }
    }

    pub fn take_prefix(&mut self, n: usize) -> Vec<usize> {
        (0..n).map_while(|_| self.next_index()).collect()
    }
}

/// True iff `seq` has no adjacent repeats and every index 1..=k appears in
/// every length-`window` slice.
pub fn validate_prefix(seq: &[usize], k: usize, window: usize) -> bool {
    if seq.windows(2).any(|w| w[0] == w[1]) {
        return false;
    }
    if seq.iter().any(|&i| i < 1 || i > k) {
        return false;
    }
    if window < k || seq.len() < window {
        return false;
    }
    let mut counts = vec![0usize; k + 1];
    for &i in &seq[..window] {
        counts[i] += 1;
    }
    if counts[1..].iter().any(|&c| c == 0) {
        return false;
    }
    for t in window..seq.len() {
        counts[seq[t]] += 1;
        counts[seq[t - window]] -= 1;
        if counts[1..].iter().any(|&c| c == 0) {
            return false;
        }
    }
    true
}
