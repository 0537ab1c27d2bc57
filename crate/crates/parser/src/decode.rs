//! Tree decoding: maximum spanning arborescence with a single ROOT child,
//! and per-arc label choice.

use ndarray::{ArrayView1, Array3};

use crate::model::ArcScores;

/// Chu-Liu/Edmonds on a square `scores[h][d]` matrix over nodes `0..m`,
/// rooted at 0. Returns `heads[d]` for every node (`heads[0]` is 0).
fn chu_liu_edmonds(scores: &[Vec<f64>]) -> Vec<usize> {
    let m = scores.len();
    let best: Vec<usize> = (0..m)
        .map(|d| {
            if d == 0 {
                return 0;
            }
            let mut arg = usize::MAX;
            for h in (0..m).filter(|&h| h != d) {
                if arg == usize::MAX || scores[h][d] > scores[arg][d] {
                    arg = h;
                }
            }
            arg
        })
        .collect();

    let Some(cycle) = find_cycle(&best) else {
        return best;
    };
    let in_cycle: Vec<bool> = (0..m).map(|v| cycle.contains(&v)).collect();

    // Contracted graph: outside nodes keep their order, the cycle becomes
    // the last node.
    let outside: Vec<usize> = (0..m).filter(|&v| !in_cycle[v]).collect();
    let c = outside.len();
    let mut sub = vec![vec![f64::NEG_INFINITY; c + 1]; c + 1];
    let mut enter = vec![usize::MAX; c + 1];
    let mut leave = vec![usize::MAX; c + 1];
    for (i, &u) in outside.iter().enumerate() {
        for (j, &v) in outside.iter().enumerate() {
            if i != j {
                sub[i][j] = scores[u][v];
            }
        }
        for &v in &cycle {
            let s = scores[u][v] - scores[best[v]][v];
            if enter[i] == usize::MAX || s > sub[i][c] {
                sub[i][c] = s;
                enter[i] = v;
            }
        }
    }
    for (j, &v) in outside.iter().enumerate() {
        for &u in &cycle {
            if leave[j] == usize::MAX || scores[u][v] > sub[c][j] {
                sub[c][j] = scores[u][v];
                leave[j] = u;
            }
        }
    }

    let sub_heads = chu_liu_edmonds(&sub);
    let mut heads = best.clone();
    for (j, &v) in outside.iter().enumerate().skip(1) {
        let h = sub_heads[j];
        heads[v] = if h == c { leave[j] } else { outside[h] };
    }
    let h = sub_heads[c];
    heads[enter[h]] = outside[h];
    heads
}

fn find_cycle(heads: &[usize]) -> Option<Vec<usize>> {
    let m = heads.len();
    // 0 = unvisited, 1 = on the current path, 2 = done.
    let mut state = vec![0u8; m];
    state[0] = 2;
    for start in 1..m {
        let mut path = Vec::new();
        let mut v = start;
        while state[v] == 0 {
            state[v] = 1;
            path.push(v);
            v = heads[v];
        }
        if state[v] == 1 {
            let at = path.iter().position(|&p| p == v).expect("on path");
            return Some(path[at..].to_vec());
        }
        for p in path {
            state[p] = 2;
        }
    }
    None
}

fn tree_score(scores: &[Vec<f64>], heads: &[usize]) -> f64 {
    heads.iter().enumerate().skip(1).map(|(d, &h)| scores[h][d]).sum()
}

/// Highest-scoring tree in which exactly one token attaches to ROOT.
/// Returns the head of each token `1..=n` (0 = ROOT).
pub fn decode_mst(arcs: &ArcScores) -> Vec<usize> {
    decode_square(&arcs.to_square())
}

pub(crate) fn decode_square(scores: &[Vec<f64>]) -> Vec<usize> {
    let m = scores.len();
    if m <= 1 {
        return Vec::new();
    }
    let heads = chu_liu_edmonds(scores);
    if heads[1..].iter().filter(|&&h| h == 0).count() == 1 {
        return heads[1..].to_vec();
    }
    // Try each ROOT child with the other ROOT arcs removed.
    let mut best: Option<(f64, Vec<usize>)> = None;
    for root in 1..m {
        let mut masked = scores.to_vec();
        for (d, row) in masked[0].iter_mut().enumerate() {
            if d != root {
                *row = f64::NEG_INFINITY;
            }
        }
        let heads = chu_liu_edmonds(&masked);
        let score = tree_score(scores, &heads);
        if best.as_ref().is_none_or(|(s, _)| score > *s) {
            best = Some((score, heads));
        }
    }
    best.expect("at least one token").1[1..].to_vec()
}

/// Index of the best label, never `root` unless it is the only label.
pub(crate) fn best_label(scores: ArrayView1<f32>, root: Option<usize>) -> usize {
    let mut arg = usize::MAX;
    for (r, &s) in scores.iter().enumerate() {
        if Some(r) == root && scores.len() > 1 {
            continue;
        }
        if arg == usize::MAX || s > scores[arg] {
            arg = r;
        }
    }
    arg
}

/// Argmax label at each chosen arc of an `(n+1) × n × |R|` tensor. The
/// token attached to ROOT gets `root`, which is excluded elsewhere.
pub fn assign_labels(scores: &Array3<f32>, heads: &[usize], root: Option<usize>) -> Vec<usize> {
    heads
        .iter()
        .enumerate()
        .map(|(i, &h)| match (h, root) {
            (0, Some(r)) => r,
            _ => best_label(scores.slice(ndarray::s![h, i, ..]), root),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;

    fn arcs(rows: &[&[f32]]) -> ArcScores {
        let n = rows[0].len();
        let mut scores = Array2::from_shape_fn((rows.len(), n), |(h, d)| rows[h][d]);
        for d in 1..=n {
            scores[[d, d - 1]] = f32::NEG_INFINITY;
        }
        ArcScores { scores }
    }

    #[test]
    fn single_token_attaches_to_root() {
        assert_eq!(decode_mst(&arcs(&[&[-3.0], &[0.0]])), [0]);
    }

    #[test]
    fn chain_is_recovered() {
        // ROOT -> 1 -> 2
        let a = arcs(&[&[5.0, 0.0], &[0.0, 5.0], &[1.0, 0.0]]);
        assert_eq!(decode_mst(&a), [0, 1]);
    }

    #[test]
    fn two_root_children_are_reduced_to_one() {
        let a = arcs(&[&[5.0, 5.0, 0.0], &[0.0, 1.0, 4.0], &[2.0, 0.0, 0.0], &[0.0, 0.0, 0.0]]);
        let heads = decode_mst(&a);
        assert_eq!(heads.iter().filter(|&&h| h == 0).count(), 1);
        // ROOT -> 2 -> 1 and 1 -> 3 beats keeping token 1 as the root child.
        assert_eq!(heads, [2, 0, 1]);
    }

    #[test]
    fn cycle_is_broken() {
        // 1 and 2 prefer each other.
        let a = arcs(&[&[1.0, 0.0], &[0.0, 10.0], &[10.0, 0.0]]);
        let heads = decode_mst(&a);
        assert_eq!(heads, [0, 1]);
    }

    #[test]
    fn labels_force_root_and_skip_it_elsewhere() {
        let mut scores = Array3::zeros((3, 2, 3));
        scores[[0, 0, 2]] = 9.0;
        scores[[1, 1, 0]] = 9.0;
        scores[[1, 1, 1]] = 5.0;
        assert_eq!(assign_labels(&scores, &[0, 1], Some(0)), [0, 1]);
        let single = Array3::zeros((3, 2, 1));
        assert_eq!(assign_labels(&single, &[0, 1], Some(0)), [0, 0]);
        assert_eq!(assign_labels(&scores, &[0, 1], None), [2, 0]);
    }
}
