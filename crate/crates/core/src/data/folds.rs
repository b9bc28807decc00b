use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::score::ClassLabel;

/// Assigns each video to one of `k` folds.
///
/// Videos of each class are sorted by id, shuffled with `seed`, then dealt
/// round-robin; the second class continues dealing where the first stopped
/// so fold sizes also stay within one of each other overall.
pub fn make_folds(videos: &[(String, ClassLabel)], k: usize, seed: u64) -> Result<BTreeMap<String, usize>> {
    if k < 2 {
        return Err(Error::invalid(alloc::format!("need at least 2 folds, got {k}")));
    }
    if videos.len() < k {
        return Err(Error::invalid(alloc::format!(
            "{} videos cannot fill {k} folds",
            videos.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = BTreeMap::new();
    let mut next = 0;
    for class in ClassLabel::ALL {
        let mut ids: Vec<&String> = videos.iter().filter(|(_, l)| *l == class).map(|(v, _)| v).collect();
        ids.sort();
        ids.shuffle(&mut rng);
        for id in ids {
            if assignment.insert(id.clone(), next).is_some() {
                return Err(Error::invalid(alloc::format!("video {id} listed twice")));
            }
            next = (next + 1) % k;
        }
    }
    Ok(assignment)
}
