use std::collections::BTreeSet;

use crate::lexicon::OntologyLexicon;

use super::AugmentError;

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Maximum-weight assignment on a square matrix (Hungarian method with
/// potentials). Returns `assign[row] = column`.
fn max_weight_assignment(weights: &[Vec<i128>]) -> Vec<usize> {
    let n = weights.len();
    if n == 0 {
        return Vec::new();
    }
    let max = weights.iter().flatten().copied().max().unwrap_or(0);
    // Minimize cost = max - weight; 1-based internal indexing.
    let cost = |i: usize, j: usize| max - weights[i - 1][j - 1];
    let inf = i128::MAX / 4;
    let mut u = vec![0i128; n + 1];
    let mut v = vec![0i128; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost(i0, j) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assign = vec![0usize; n];
    for j in 1..=n {
        if p[j] != 0 {
            assign[p[j] - 1] = j - 1;
        }
    }
    assign
}

/// Agreement between predicted and gold topic sets that gives partial
/// credit along the ontology hierarchy.
///
/// A pair scores 1 when equal, `1/(1+d)` when one term is an ancestor of the
/// other at shortest distance `d`, and 0 otherwise. Pairs are matched one
/// to one to maximize total credit (ties broken toward fewer pairs), and the
/// score is `credit / (|P| + |G| - k)` with `k` the number of credited
/// pairs. On a flat ontology this is the Jaccard index. Two empty sets
/// agree fully.
pub fn hierarchical_agreement(
    predicted: &BTreeSet<String>,
    gold: &BTreeSet<String>,
    ontology: &OntologyLexicon,
) -> Result<f64, AugmentError> {
    for curie in predicted.iter().chain(gold) {
        if ontology.get(curie).is_none() {
            return Err(AugmentError::UnresolvedCurie(curie.clone()));
        }
    }
    if predicted.is_empty() && gold.is_empty() {
        return Ok(1.0);
    }
    let p: Vec<&String> = predicted.iter().collect();
    let g: Vec<&String> = gold.iter().collect();
    let distances: Vec<Vec<Option<usize>>> =
        p.iter().map(|a| g.iter().map(|b| ontology.lineal_distance(a, b)).collect()).collect();
    let max_d = distances.iter().flatten().flatten().copied().max().unwrap_or(0);
    // Credits 1/(1+d) become exact integers when scaled by lcm(1..=max_d+1).
    let scale = (1..=max_d as i128 + 1).fold(1i128, |acc, k| acc / gcd(acc, k) * k);
    let n = p.len().max(g.len());
    // Each credited pair costs 1 so that, among credit-optimal matchings,
    // the one with fewer pairs wins; the factor n+1 keeps credit dominant.
    let pair_weight = |d: usize| (scale / (d as i128 + 1)) * (n as i128 + 1) - 1;
    let mut weights = vec![vec![0i128; n]; n];
    for (i, row) in distances.iter().enumerate() {
        for (j, d) in row.iter().enumerate() {
            if let Some(d) = d {
                weights[i][j] = pair_weight(*d);
            }
        }
    }
    let assign = max_weight_assignment(&weights);
    let mut credit = 0.0;
    let mut pairs = 0usize;
    for (i, &j) in assign.iter().enumerate() {
        if i < p.len() && j < g.len() {
            if let Some(d) = distances[i][j] {
                credit += 1.0 / (d as f64 + 1.0);
                pairs += 1;
            }
        }
    }
    Ok(credit / (p.len() + g.len() - pairs) as f64)
}
