/// Cost used for forbidden cells. Large enough that any feasible assignment
/// beats one that uses it, small enough that potentials cannot overflow.
const FORBIDDEN: i64 = 1 << 40;

/// Hungarian method (shortest augmenting paths with potentials) for an
/// `n x m` cost matrix with `n <= m`. Every row is assigned to a distinct
/// column. `None` cells are forbidden. Returns `None` when no assignment
/// avoids the forbidden cells.
///
/// Rows are inserted in index order and columns scanned in index order, so
/// ties resolve toward low indices.
pub fn min_cost_assignment(cost: &[Vec<Option<i64>>]) -> Option<(i64, Vec<usize>)> {
    let n = cost.len();
    if n == 0 {
        return Some((0, Vec::new()));
    }
    let m = cost[0].len();
    assert!(n <= m, "assignment needs rows <= columns");
    let c = |i: usize, j: usize| cost[i][j].unwrap_or(FORBIDDEN);
    // 1-based arrays as in the classical formulation; index 0 is virtual.
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; m + 1];
    let mut p = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![i64::MAX; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = i64::MAX;
            let mut j1 = 0usize;
            for j in 1..=m {
                if !used[j] {
                    let cur = c(i0 - 1, j - 1) - u[i0] - v[j];
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
            for j in 0..=m {
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
    for j in 1..=m {
        if p[j] != 0 {
            assign[p[j] - 1] = j - 1;
        }
    }
    let mut total = 0i64;
    for (i, &j) in assign.iter().enumerate() {
        total += cost[i][j]?;
    }
    Some((total, assign))
}

/// Maximum-weight assignment: the negated-cost Hungarian method.
pub fn max_weight_assignment(weight: &[Vec<Option<i64>>]) -> Option<(i64, Vec<usize>)> {
    let neg: Vec<Vec<Option<i64>>> = weight
        .iter()
        .map(|row| row.iter().map(|w| w.map(|x| -x)).collect())
        .collect();
    min_cost_assignment(&neg).map(|(c, a)| (-c, a))
}
