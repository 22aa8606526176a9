//! Enumeration of deterministic response tables and message encodings.
//!
//! Response tables are enumerated in lexicographic order with the first
//! input as the most significant digit: table index `k` maps input `x` to
//! digit `x` of `k` written in base `outcomes` with `inputs` digits.

use serde::{Deserialize, Serialize};

/// A total function from `inputs` to `0..outcomes`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DeterministicStrategy {
    pub outcomes: usize,
    pub table: Vec<usize>,
}

impl DeterministicStrategy {
    pub fn from_index(index: usize, inputs: usize, outcomes: usize) -> Self {
        let mut table = vec![0; inputs];
        write_digits(index, outcomes, &mut table);
        Self { outcomes, table }
    }

    pub fn respond(&self, input: usize) -> usize {
        self.table[input]
    }
}

/// `outcomes^inputs`, or `None` on overflow.
pub fn strategy_count(inputs: usize, outcomes: usize) -> Option<usize> {
    let mut total: usize = 1;
    for _ in 0..inputs {
        total = total.checked_mul(outcomes)?;
    }
    Some(total)
}

/// Fills `digits` with the lexicographic response table of `index`.
pub fn write_digits(mut index: usize, base: usize, digits: &mut [usize]) {
    for slot in digits.iter_mut().rev() {
        *slot = index % base;
        index /= base;
    }
}

/// All response tables in lexicographic order.
pub fn all_strategies(inputs: usize, outcomes: usize) -> impl Iterator<Item = Vec<usize>> {
    let count = strategy_count(inputs, outcomes).expect("strategy count overflows usize");
    (0..count).map(move |k| {
        let mut table = vec![0; inputs];
        write_digits(k, outcomes, &mut table);
        table
    })
}

/// Encodings `x -> message` using at most `max_messages` messages, one
/// representative per relabeling class: restricted growth strings, where
/// each new message is the smallest unused label. Lexicographic order.
pub fn canonical_encodings(inputs: usize, max_messages: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if inputs == 0 || max_messages == 0 {
        return out;
    }
    let mut current = vec![0usize; inputs];
    fn recurse(pos: usize, used: usize, max: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if pos == current.len() {
            out.push(current.clone());
            return;
        }
        let limit = (used + 1).min(max);
        for m in 0..limit {
            current[pos] = m;
            recurse(pos + 1, used.max(m + 1), max, current, out);
        }
    }
    current[0] = 0;
    recurse(1, 1, max_messages, &mut current, &mut out);
    out
}

/// Number of distinct messages used by a canonical encoding.
pub fn messages_used(encoding: &[usize]) -> usize {
    encoding.iter().copied().max().map_or(0, |m| m + 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexicographic_order() {
        let tables: Vec<_> = all_strategies(2, 3).collect();
        assert_eq!(tables.len(), 9);
        assert_eq!(tables[0], vec![0, 0]);
        assert_eq!(tables[1], vec![0, 1]);
        assert_eq!(tables[3], vec![1, 0]);
        assert_eq!(DeterministicStrategy::from_index(5, 2, 3).table, vec![1, 2]);
    }

    #[test]
    fn canonical_counts_are_stirling_sums() {
        // sum_{k<=d} S(n, k)
        assert_eq!(canonical_encodings(4, 2).len(), 1 + 7);
        assert_eq!(canonical_encodings(9, 3).len(), 1 + 255 + 3025);
        assert_eq!(canonical_encodings(4, 4).len(), 15);
        assert_eq!(canonical_encodings(3, 1), vec![vec![0, 0, 0]]);
    }

    #[test]
    fn canonical_forms_cover_all_encodings_up_to_relabeling() {
        let canonical = canonical_encodings(4, 3);
        for table in all_strategies(4, 3) {
            // first-occurrence relabeling
            let mut map = [usize::MAX; 3];
            let mut next = 0;
            let relabeled: Vec<usize> = table
                .iter()
                .map(|&m| {
                    if map[m] == usize::MAX {
                        map[m] = next;
                        next += 1;
                    }
                    map[m]
                })
                .collect();
            assert!(canonical.contains(&relabeled));
        }
    }
}
