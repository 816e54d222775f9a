use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng;

/// Few-shot labelled nodes plus the validation/test partition of the rest.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FewShotSplit {
    /// `shots[c]` holds the `m` labelled node ids of class `c`.
    pub shots: Vec<Vec<usize>>,
    pub val_ids: Vec<usize>,
    pub test_ids: Vec<usize>,
    pub m: usize,
    pub seed: u64,
}

impl FewShotSplit {
    pub fn num_classes(&self) -> usize {
        self.shots.len()
    }

    /// `(node, class)` for every shot, class-major.
    pub fn shot_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.shots
            .iter()
            .enumerate()
            .flat_map(|(c, ids)| ids.iter().map(move |&i| (i, c)))
    }

    pub fn num_shots(&self) -> usize {
        self.shots.iter().map(Vec::len).sum()
    }
}

/// Draws `m` shots per class uniformly at random, then splits the remaining
/// labelled nodes `⌊rest/10⌋` validation to the rest test.
pub fn sample_few_shot_split(g: &Graph, m: usize, seed: u64) -> Result<FewShotSplit> {
    if m == 0 {
        return Err(Error::Config("shot count m must be at least 1".into()));
    }
    let mut rng = rng::rng_from_seed(seed);
    let mut shots = Vec::with_capacity(g.num_classes());
    let mut rest = Vec::new();
    for (class, mut members) in g.nodes_by_class().into_iter().enumerate() {
        if members.len() < m {
            return Err(Error::InsufficientShots {
                class,
                available: members.len(),
                required: m,
            });
        }
        members.shuffle(&mut rng);
        rest.extend_from_slice(&members[m..]);
        members.truncate(m);
        members.sort_unstable();
        shots.push(members);
    }
    rest.sort_unstable();
    rest.shuffle(&mut rng);
    let n_val = rest.len() / 10;
    let test_ids = rest.split_off(n_val);
    Ok(FewShotSplit {
        shots,
        val_ids: rest,
        test_ids,
        m,
        seed,
    })
}
