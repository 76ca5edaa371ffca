//! Seeded, stratified train/validation/test split.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::IntentError;
use crate::corpus::EditIntention;

/// Split proportions of the human-annotated release: train, validation, test.
pub const SPLIT_RATIOS: [usize; 3] = [3254, 400, 364];

/// Sizes proportional to `SPLIT_RATIOS` by largest remainder; ties go to the
/// earlier part.
pub fn split_sizes(n: usize) -> [usize; 3] {
    let total: usize = SPLIT_RATIOS.iter().sum();
    let mut sizes = [0usize; 3];
    let mut rems = [(0usize, 0usize); 3];
    for i in 0..3 {
        let exact = n * SPLIT_RATIOS[i];
        sizes[i] = exact / total;
        rems[i] = (exact % total, i);
    }
    let left = n - sizes.iter().sum::<usize>();
    rems.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    for &(_, i) in rems.iter().take(left) {
        sizes[i] += 1;
    }
    sizes
}

#[derive(Debug, Clone, PartialEq)]
pub struct Split<T> {
    pub train: Vec<T>,
    pub validation: Vec<T>,
    pub test: Vec<T>,
}

/// Shuffles each class with the seed, orders all items by their relative
/// rank within their class, and cuts the sequence at the split sizes, so
/// every part receives each class in proportion.
pub fn split_dataset<T>(items: Vec<T>, label_of: impl Fn(&T) -> EditIntention, seed: u64) -> Result<Split<T>, IntentError> {
    if items.is_empty() {
        return Err(IntentError::TooFewExamples { label: None, count: 0 });
    }
    let mut by_class: BTreeMap<EditIntention, Vec<T>> = BTreeMap::new();
    for it in items {
        by_class.entry(label_of(&it)).or_default().push(it);
    }
    if let Some((l, v)) = by_class.iter().find(|(_, v)| v.len() < 3) {
        return Err(IntentError::TooFewExamples {
            label: Some(*l),
            count: v.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut keyed: Vec<(f64, usize, T)> = Vec::new();
    for (ci, (_, mut v)) in by_class.into_iter().enumerate() {
        v.shuffle(&mut rng);
        let n = v.len() as f64;
        for (k, it) in v.into_iter().enumerate() {
            keyed.push(((k as f64 + 0.5) / n, ci, it));
        }
    }
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let [tr, va, _] = split_sizes(keyed.len());
    let mut train = Vec::with_capacity(tr);
    let mut validation = Vec::with_capacity(va);
    let mut test = Vec::new();
    for (i, (_, _, it)) in keyed.into_iter().enumerate() {
        if i < tr {
            train.push(it);
        } else if i < tr + va {
            validation.push(it);
        } else {
            test.push(it);
        }
    }
    Ok(Split { train, validation, test })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn release_and_hundred_sizes() {
        assert_eq!(split_sizes(4018), [3254, 400, 364]);
        assert_eq!(split_sizes(100), [81, 10, 9]);
        assert_eq!(split_sizes(0), [0, 0, 0]);
    }

    #[test]
    fn tiny_class_rejected() {
        let items = vec![EditIntention::Style, EditIntention::Style, EditIntention::Clarity];
        assert!(matches!(
            split_dataset(items, |l| *l, 1),
            Err(IntentError::TooFewExamples { .. })
        ));
    }
}
