//! Deterministic stratified train/test splitting.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::MlError;

/// Splits row indices into train and test sets, preserving the class mix.
///
/// Each class is shuffled with a seeded generator, then cut so the train
/// side gets `round(train_fraction * class size)` rows, clamped to leave at
/// least one row on each side. Both output vectors come back sorted.
pub fn stratified_split(
    truth: &[bool],
    train_fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>), MlError> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(MlError::BadFraction(train_fraction));
    }
    if truth.is_empty() {
        return Err(MlError::EmptyDataset);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for class in [false, true] {
        let mut idx: Vec<usize> = truth
            .iter()
            .enumerate()
            .filter(|&(_, &t)| t == class)
            .map(|(i, _)| i)
            .collect();
        if idx.len() < 2 {
            return Err(MlError::ClassTooSmall {
                positive: class,
                count: idx.len(),
            });
        }
        idx.shuffle(&mut rng);
        let want = (train_fraction * idx.len() as f64).round() as usize;
        let cut = want.clamp(1, idx.len() - 1);
        train.extend_from_slice(&idx[..cut]);
        test.extend_from_slice(&idx[cut..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(pos: usize, neg: usize) -> Vec<bool> {
        let mut v = vec![true; pos];
        v.extend(vec![false; neg]);
        v
    }

    #[test]
    fn class_mix_is_preserved() {
        let y = labels(10, 30);
        let (train, test) = stratified_split(&y, 0.7, 42).unwrap();
        assert_eq!(train.len() + test.len(), 40);
        let pos_train = train.iter().filter(|&&i| y[i]).count();
        let pos_test = test.iter().filter(|&&i| y[i]).count();
        assert_eq!(pos_train, 7);
        assert_eq!(pos_test, 3);
        assert_eq!(train.len(), 28);
    }

    #[test]
    fn rounding_is_pinned() {
        // 5 per class at 0.7: round(3.5) rounds away from zero, so 4 train
        let y = labels(5, 5);
        let (train, test) = stratified_split(&y, 0.7, 1).unwrap();
        assert_eq!(train.len(), 8);
        assert_eq!(test.len(), 2);
    }

    #[test]
    fn every_class_keeps_a_test_row() {
        let y = labels(2, 2);
        let (train, test) = stratified_split(&y, 0.99, 7).unwrap();
        let pos_test = test.iter().filter(|&&i| y[i]).count();
        let neg_test = test.iter().filter(|&&i| !y[i]).count();
        assert_eq!(pos_test, 1);
        assert_eq!(neg_test, 1);
        assert_eq!(train.len(), 2);
    }

    #[test]
    fn same_seed_same_split() {
        let y = labels(20, 20);
        let a = stratified_split(&y, 0.7, 5).unwrap();
        let b = stratified_split(&y, 0.7, 5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn different_seeds_differ() {
        let y = labels(50, 50);
        let a = stratified_split(&y, 0.7, 1).unwrap();
        let b = stratified_split(&y, 0.7, 2).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn no_row_is_lost_or_duplicated() {
        let y = labels(13, 17);
        let (train, test) = stratified_split(&y, 0.5, 9).unwrap();
        let mut all: Vec<usize> = train.iter().chain(test.iter()).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..30).collect::<Vec<_>>());
    }

    #[test]
    fn bad_fractions_are_rejected() {
        let y = labels(5, 5);
        assert!(matches!(
            stratified_split(&y, 0.0, 1),
            Err(MlError::BadFraction(_))
        ));
        assert!(matches!(
            stratified_split(&y, 1.0, 1),
            Err(MlError::BadFraction(_))
        ));
        assert!(matches!(
            stratified_split(&y, -0.3, 1),
            Err(MlError::BadFraction(_))
        ));
    }

    #[test]
    fn tiny_class_is_rejected() {
        let y = labels(1, 5);
        assert!(matches!(
            stratified_split(&y, 0.7, 1),
            Err(MlError::ClassTooSmall { positive: true, count: 1 })
        ));
    }

    #[test]
    fn empty_input_is_rejected() {
        assert!(matches!(
            stratified_split(&[], 0.7, 1),
            Err(MlError::EmptyDataset)
        ));
    }

    #[test]
    fn missing_class_is_rejected() {
        let y = labels(6, 0);
        assert!(matches!(
            stratified_split(&y, 0.7, 1),
            Err(MlError::ClassTooSmall { positive: false, count: 0 })
        ));
    }
}
