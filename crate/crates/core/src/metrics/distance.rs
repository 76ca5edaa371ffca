//! Unit-cost Levenshtein distance over tokens or characters.

use crate::text::tokenize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DistanceUnit {
    #[default]
    Token,
    Char,
}

pub fn levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(x != y);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

pub fn edit_distance(a: &str, b: &str, unit: DistanceUnit) -> usize {
    match unit {
        DistanceUnit::Token => {
            let ta: Vec<&str> = tokenize(a).into_iter().map(|t| t.text).collect();
            let tb: Vec<&str> = tokenize(b).into_iter().map(|t| t.text).collect();
            levenshtein(&ta, &tb)
        }
        DistanceUnit::Char => {
            let ca: Vec<char> = a.chars().collect();
            let cb: Vec<char> = b.chars().collect();
            levenshtein(&ca, &cb)
        }
    }
}
