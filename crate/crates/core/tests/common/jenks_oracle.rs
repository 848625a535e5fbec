//! Exhaustive natural-breaks reference: tries every admissible set of
//! break positions in lexicographic order.

fn class_ssd(values: &[f64]) -> f64 {
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    values.iter().map(|v| (v - mean).powi(2)).sum()
}

fn cost(sorted: &[f64], breaks: &[usize]) -> f64 {
    let mut bounds = vec![0];
    bounds.extend_from_slice(breaks);
    bounds.push(sorted.len());
    bounds.windows(2).map(|w| class_ssd(&sorted[w[0]..w[1]])).sum()
}

fn combinations(items: &[usize], k: usize, start: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if current.len() == k {
        out.push(current.clone());
        return;
    }
    for i in start..items.len() {
        current.push(items[i]);
        combinations(items, k, i + 1, current, out);
        current.pop();
    }
}

/// Break indices (start of every class after the first) and total cost of
/// the best partition into `k` classes; the lexicographically first among
/// equal-cost partitions.
pub fn best_partition(values: &[f64], k: usize) -> Option<(Vec<usize>, f64)> {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // Equal values never sit on both sides of a break.
    let admissible: Vec<usize> = (1..sorted.len()).filter(|&i| sorted[i - 1] != sorted[i]).collect();
    if k == 0 || k > admissible.len() + 1 {
        return None;
    }
    let mut all = Vec::new();
    combinations(&admissible, k - 1, 0, &mut Vec::new(), &mut all);
    let mut best: Option<(Vec<usize>, f64)> = None;
    for breaks in all {
        let c = cost(&sorted, &breaks);
        let better = match &best {
            None => true,
            Some((_, b)) => c < b - 1e-9 * b.abs().max(1.0),
        };
        if better {
            best = Some((breaks, c));
        }
    }
    best
}
