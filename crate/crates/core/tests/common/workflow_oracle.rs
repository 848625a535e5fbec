//! Exhaustive plan search over profile sequences.

use atmohub_core::workflow::{AnalysisProfile, DataKind};

fn runs(seq: &[&AnalysisProfile], available: &[DataKind], goal: DataKind) -> bool {
    let mut have: Vec<DataKind> = available.to_vec();
    for p in seq {
        if !p.inputs.iter().all(|i| have.contains(&i.data_kind)) {
            return false;
        }
        have.extend(p.outputs.iter().map(|o| o.data_kind));
    }
    seq.last()
        .is_some_and(|p| p.outputs.iter().any(|o| o.data_kind == goal))
}

/// Shortest executable profile sequence ending in a producer of `goal`,
/// first in lexicographic order of profile ids. `Some(vec![])` when the
/// goal is already available.
pub fn shortest_plan(
    available: &[DataKind],
    profiles: &[AnalysisProfile],
    goal: DataKind,
    max_len: usize,
) -> Option<Vec<String>> {
    if available.contains(&goal) {
        return Some(Vec::new());
    }
    let mut sorted: Vec<&AnalysisProfile> = profiles.iter().collect();
    sorted.sort_by(|a, b| a.profile_id.cmp(&b.profile_id));
    let n = sorted.len();
    for len in 1..=max_len {
        // Counting in base n with the first step as the most significant
        // digit visits sequences in lexicographic order.
        for code in 0..n.pow(len as u32) {
            let seq: Vec<&AnalysisProfile> = (0..len)
                .map(|j| sorted[(code / n.pow((len - 1 - j) as u32)) % n])
                .collect();
            if runs(&seq, available, goal) {
                return Some(seq.iter().map(|p| p.profile_id.clone()).collect());
            }
        }
    }
    None
}
