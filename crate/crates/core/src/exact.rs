//! Numeric controllability of linear systems `x' = A x + B u`: Kalman rank,
//! exact driver counts from eigenvalue multiplicities, and self-loop
//! experiments.

use nalgebra::{Complex, DMatrix, DVector, Schur};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::generate::{rng, shuffle};

type C64 = Complex<f64>;

/// A linear time-invariant system with optional output matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSystem {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: Option<DMatrix<f64>>,
}

impl DenseSystem {
    pub fn new(a: DMatrix<f64>, b: DMatrix<f64>, c: Option<DMatrix<f64>>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::DimensionMismatch(format!("A is {}x{}", n, a.ncols())));
        }
        if b.nrows() != n {
            return Err(Error::DimensionMismatch(format!("B has {} rows, A has {n}", b.nrows())));
        }
        if let Some(c) = &c {
            if c.ncols() != n {
                return Err(Error::DimensionMismatch(format!("C has {} columns, A has {n}", c.ncols())));
            }
        }
        let finite = |m: &DMatrix<f64>| m.iter().all(|v| v.is_finite());
        if !finite(&a) || !finite(&b) || !c.as_ref().is_none_or(finite) {
            return Err(Error::InvalidArgument("non-finite matrix entry".into()));
        }
        Ok(Self { a, b, c })
    }

    /// System actuated through unit inputs on the given nodes.
    pub fn with_drivers(a: DMatrix<f64>, drivers: &[usize]) -> Result<Self> {
        let n = a.nrows();
        if let Some(&d) = drivers.iter().find(|&&d| d >= n) {
            return Err(Error::UnknownNode(d.to_string()));
        }
        Self::new(a, input_matrix(n, drivers), None)
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }
}

/// `N x |drivers|` matrix with a single 1 per column.
pub fn input_matrix(n: usize, drivers: &[usize]) -> DMatrix<f64> {
    let mut b = DMatrix::zeros(n, drivers.len());
    for (k, &d) in drivers.iter().enumerate() {
        b[(d, k)] = 1.0;
    }
    b
}

/// Largest size for which the explicit Kalman matrix is formed.
pub const KALMAN_EXPLICIT_MAX: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct KalmanRank {
    pub rank: usize,
    pub controllable: bool,
}

/// Rank of `[B, AB, ..., A^(N-1) B]`.
///
/// Up to [`KALMAN_EXPLICIT_MAX`] states the matrix is built explicitly and
/// its rank read off the singular values with threshold `N eps sigma_max`.
/// Beyond that the same Krylov space is spanned by an orthonormalised basis,
/// which avoids the overflow of explicit powers.
pub fn kalman_rank(sys: &DenseSystem) -> KalmanRank {
    let n = sys.n();
    let rank = if n <= KALMAN_EXPLICIT_MAX { explicit_kalman_rank(sys) } else { krylov_rank(sys) };
    KalmanRank { rank, controllable: rank == n }
}

pub fn kalman_matrix(sys: &DenseSystem) -> DMatrix<f64> {
    let (n, m) = (sys.n(), sys.b.ncols());
    let mut k = DMatrix::zeros(n, n * m);
    let mut block = sys.b.clone();
    for p in 0..n {
        k.view_mut((0, p * m), (n, m)).copy_from(&block);
        block = &sys.a * block;
    }
    k
}

fn explicit_kalman_rank(sys: &DenseSystem) -> usize {
    let n = sys.n();
    if n == 0 || sys.b.ncols() == 0 {
        return 0;
    }
    let sv = kalman_matrix(sys).singular_values();
    let smax = sv.max();
    let tol = n as f64 * f64::EPSILON * smax;
    sv.iter().filter(|&&s| s > tol).count()
}

fn krylov_rank(sys: &DenseSystem) -> usize {
    let n = sys.n();
    let scale = sys.a.norm().max(1.0);
    let mut basis: Vec<DVector<f64>> = Vec::new();
    let mut frontier: Vec<DVector<f64>> = sys.b.column_iter().map(|c| c.into_owned()).collect();
    while !frontier.is_empty() && basis.len() < n {
        let mut fresh = Vec::new();
        for mut v in frontier {
            let norm0 = v.norm();
            if norm0 == 0.0 {
                continue;
            }
            for _ in 0..2 {
                for q in &basis {
                    let d = q.dot(&v);
                    v.axpy(-d, q, 1.0);
                }
            }
            let r = v.norm();
            if r > 1e-10 * norm0.max(1e-300) && r > 1e-13 * scale {
                v /= r;
                basis.push(v.clone());
                fresh.push(v);
            }
        }
        frontier = fresh.iter().map(|q| &sys.a * q).collect();
    }
    basis.len()
}

/// A cluster of numerically equal eigenvalues.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenCluster {
    pub re: f64,
    pub im: f64,
    /// Algebraic multiplicity (cluster size).
    pub algebraic: usize,
    /// Geometric multiplicity `N - rank(lambda I - A)`.
    pub geometric: usize,
}

impl EigenCluster {
    pub fn value(&self) -> C64 {
        C64::new(self.re, self.im)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenStructure {
    /// Sorted by real then imaginary part.
    pub clusters: Vec<EigenCluster>,
    pub symmetric: bool,
}

fn scale_of(a: &DMatrix<f64>) -> f64 {
    if a.is_empty() {
        1.0
    } else {
        a.singular_values().max().max(1.0)
    }
}

fn is_symmetric(a: &DMatrix<f64>) -> bool {
    a.nrows() == a.ncols() && (0..a.nrows()).all(|i| (0..i).all(|j| a[(i, j)] == a[(j, i)]))
}

fn eigenvalues(a: &DMatrix<f64>) -> Vec<C64> {
    if is_symmetric(a) {
        a.clone().symmetric_eigen().eigenvalues.iter().map(|&v| C64::new(v, 0.0)).collect()
    } else {
        general_eigenvalues(a)
    }
}

/// Eigenvalues of a general square matrix. nalgebra's QR iteration stalls
/// on large degenerate spectra such as sparse adjacency matrices with many
/// defective zero eigenvalues, so the Hessenberg-QR solver of `faer` is
/// used, with nalgebra's Schur form only as a fallback.
pub(crate) fn general_eigenvalues(a: &DMatrix<f64>) -> Vec<C64> {
    let m = faer::Mat::<f64>::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)]);
    match m.eigenvalues() {
        Ok(ev) => ev.iter().map(|c| C64::new(c.re, c.im)).collect(),
        Err(_) => Schur::new(a.clone()).complex_eigenvalues().iter().copied().collect(),
    }
}

/// Union-find clustering of eigenvalues closer than `tol`.
fn cluster(values: &[C64], tol: f64) -> Vec<Vec<C64>> {
    let n = values.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for i in 0..n {
        for j in 0..i {
            if (values[i] - values[j]).norm() < tol {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                parent[ri] = rj;
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<C64>> = Default::default();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(values[i]);
    }
    groups.into_values().collect()
}

fn shifted(a: &DMatrix<f64>, lambda: C64) -> DMatrix<C64> {
    let n = a.nrows();
    DMatrix::from_fn(n, n, |i, j| {
        let v = C64::new(a[(i, j)], 0.0);
        if i == j {
            v - lambda
        } else {
            v
        }
    })
}

fn geometric_multiplicity(a: &DMatrix<f64>, lambda: C64, tol: f64) -> usize {
    let sv = shifted(a, lambda).singular_values();
    sv.iter().filter(|&&s| s <= tol).count()
}

/// Clustering and rank tolerance, relative to `max(1, ||A||_2)`.
const EIGEN_TOL: f64 = 1e-8;

struct RawClusters {
    clusters: Vec<(C64, usize)>,
    tol: f64,
}

/// Widest spread a defective eigenvalue may show before it is treated as
/// distinct eigenvalues, relative to `max(1, ||A||_2)`.
const DEFECTIVE_SPREAD: f64 = 1e-4;

/// Threshold on singular values of `(A - lambda I)^m`, relative to
/// `max(1, ||A||_2)^m`, confirming a generalised eigenspace of dimension `m`.
const DEFECTIVE_TOL: f64 = 1e-10;

/// A Jordan block of size `m` splits its eigenvalue into a ring of radius
/// about `eps^(1/m)`. Loose clusters are kept whole only when
/// `(A - lambda I)^m` has nullity `m` at their centroid; otherwise they fall
/// back to the tight clustering.
fn cluster_defective(a: &DMatrix<f64>, values: &[C64], tol: f64, scale: f64) -> Vec<Vec<C64>> {
    let mut out = Vec::new();
    for group in cluster(values, DEFECTIVE_SPREAD * scale) {
        let tight = cluster(&group, tol);
        let m = group.len();
        if tight.len() == 1 {
            out.push(group);
            continue;
        }
        let centroid = group.iter().sum::<C64>() / m as f64;
        let shifted_m = matrix_power(shifted(a, centroid), m);
        let nullity = shifted_m.singular_values().iter().filter(|&&s| s <= DEFECTIVE_TOL * scale.powi(m as i32)).count();
        if nullity >= m {
            out.push(group);
        } else {
            out.extend(tight);
        }
    }
    out
}

/// `p^k` by repeated squaring, `k >= 1`.
fn matrix_power(mut p: DMatrix<C64>, mut k: usize) -> DMatrix<C64> {
    let mut acc: Option<DMatrix<C64>> = None;
    loop {
        if k & 1 == 1 {
            acc = Some(match acc {
                Some(x) => &x * &p,
                None => p.clone(),
            });
        }
        k >>= 1;
        if k == 0 {
            return acc.expect("k >= 1");
        }
        p = &p * &p;
    }
}

fn raw_clusters(a: &DMatrix<f64>) -> RawClusters {
    let scale = scale_of(a);
    let tol = EIGEN_TOL * scale;
    let clusters = cluster_defective(a, &eigenvalues(a), tol, scale)
        .into_iter()
        .map(|g| {
            let centroid = g.iter().sum::<C64>() / g.len() as f64;
            // Real matrices: snap numerically real clusters onto the axis.
            let centroid = if centroid.im.abs() < tol { C64::new(centroid.re, 0.0) } else { centroid };
            (centroid, g.len())
        })
        .collect();
    RawClusters { clusters, tol }
}

pub fn eigen_table(a: &DMatrix<f64>) -> Result<EigenStructure> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch(format!("A is {}x{}", a.nrows(), a.ncols())));
    }
    let raw = raw_clusters(a);
    let mut clusters: Vec<EigenCluster> = raw
        .clusters
        .iter()
        .map(|&(l, alg)| EigenCluster {
            re: l.re,
            im: l.im,
            algebraic: alg,
            geometric: geometric_multiplicity(a, l, raw.tol).clamp(1, alg),
        })
        .collect();
    clusters.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    Ok(EigenStructure { clusters, symmetric: is_symmetric(a) })
}

/// Exact minimum driver count from the maximum geometric multiplicity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PbhDrivers {
    pub n_drivers: usize,
    pub lambda_re: f64,
    pub lambda_im: f64,
    pub multiplicity: usize,
    /// Rows of `A - lambda_M I` that depend on preceding rows; one per
    /// independent input. Inputs may need to reach other nodes as well for
    /// the rank condition to hold at the remaining eigenvalues.
    pub drivers: Vec<usize>,
    /// Nodes that make `(A, B)` controllable when each receives its own
    /// unit input. Equal to `drivers` whenever that suffices, and larger only
    /// when `n_drivers` single-node inputs cannot work.
    pub unit_input_drivers: Vec<usize>,
}

/// `max_i mu(lambda_i)` without extracting a driver set.
pub fn pbh_driver_count(a: &DMatrix<f64>) -> Result<usize> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch(format!("A is {}x{}", n, a.ncols())));
    }
    if n == 0 {
        return Ok(0);
    }
    let raw = raw_clusters(a);
    let mut order = raw.clusters.clone();
    // Largest algebraic multiplicity first, so the scan can stop once no
    // remaining cluster can beat the best geometric multiplicity.
    order.sort_by(|x, y| y.1.cmp(&x.1));
    let mut best = 0;
    for &(lambda, alg) in &order {
        if alg <= best {
            break;
        }
        best = best.max(geometric_multiplicity(a, lambda, raw.tol).clamp(1, alg));
    }
    Ok(best)
}

/// Orthonormal basis of the left null space of `A - lambda I`.
fn left_null_space(a: &DMatrix<f64>, lambda: C64, tol: f64, alg: usize) -> DMatrix<C64> {
    let svd = shifted(a, lambda).svd(true, false);
    let u = svd.u.expect("requested");
    let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
    idx.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
    let mu = idx.iter().filter(|&&i| svd.singular_values[i] <= tol).count().clamp(1, alg);
    DMatrix::from_fn(a.nrows(), mu, |r, c| u[(r, idx[c])])
}

/// Sum over eigenvalues of the rank each still lacks when inputs sit on `d`.
fn deficiency(spaces: &[DMatrix<C64>], d: &[usize]) -> usize {
    spaces
        .iter()
        .map(|w| {
            if w.ncols() == 1 {
                return usize::from(!d.iter().any(|&r| w[(r, 0)].norm() > 1e-7));
            }
            let sub = DMatrix::from_fn(d.len(), w.ncols(), |r, c| w[(d[r], c)]);
            let rank = if sub.is_empty() {
                0
            } else {
                sub.singular_values().iter().filter(|&&s| s > 1e-7).count()
            };
            w.ncols() - rank.min(w.ncols())
        })
        .sum()
}

/// Minimum driver count `max_i mu(lambda_i)` and driver sets.
///
/// `drivers` are the rows of `A - lambda_M I` that depend on preceding rows
/// (scan in index order, `lambda_M` the eigenvalue of largest geometric
/// multiplicity). That set only guarantees the rank condition at
/// `lambda_M`. For `unit_input_drivers` single swaps are applied while they
/// reduce the total rank deficiency over all eigenvalues, and the set grows
/// greedily if swaps stall.
pub fn pbh_min_drivers(a: &DMatrix<f64>) -> Result<PbhDrivers> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch(format!("A is {}x{}", n, a.ncols())));
    }
    if n == 0 {
        return Ok(PbhDrivers {
            n_drivers: 0,
            lambda_re: 0.0,
            lambda_im: 0.0,
            multiplicity: 0,
            drivers: vec![],
            unit_input_drivers: vec![],
        });
    }
    let raw = raw_clusters(a);
    let spaces: Vec<DMatrix<C64>> =
        raw.clusters.iter().map(|&(l, alg)| left_null_space(a, l, raw.tol, alg)).collect();
    let mut best = 0;
    for k in 0..spaces.len() {
        let better = spaces[k].ncols() > spaces[best].ncols();
        let tie = spaces[k].ncols() == spaces[best].ncols()
            && (raw.clusters[k].0.re, raw.clusters[k].0.im) < (raw.clusters[best].0.re, raw.clusters[best].0.im);
        if better || tie {
            best = k;
        }
    }
    let (lambda, mu) = (raw.clusters[best].0, spaces[best].ncols());
    let recipe = dependent_rows(&shifted(a, lambda), mu);
    let mut drivers = recipe.clone();
    let mut def = deficiency(&spaces, &drivers);
    while def > 0 {
        let mut improved = None;
        'search: for slot in 0..drivers.len() {
            for v in 0..n {
                if drivers.contains(&v) {
                    continue;
                }
                let mut trial = drivers.clone();
                trial[slot] = v;
                let d = deficiency(&spaces, &trial);
                if d < def {
                    improved = Some((trial, d));
                    break 'search;
                }
            }
        }
        match improved {
            Some((trial, d)) => {
                drivers = trial;
                def = d;
            }
            None => break,
        }
    }
    // Swaps stalled: grow the set greedily.
    while def > 0 {
        let (v, d) = (0..n)
            .filter(|v| !drivers.contains(v))
            .map(|v| {
                let mut trial = drivers.clone();
                trial.push(v);
                (v, deficiency(&spaces, &trial))
            })
            .min_by_key(|&(v, d)| (d, v))
            .expect("all nodes as drivers has zero deficiency");
        drivers.push(v);
        def = d;
    }
    drivers.sort_unstable();
    Ok(PbhDrivers {
        n_drivers: mu,
        lambda_re: lambda.re,
        lambda_im: lambda.im,
        multiplicity: mu,
        drivers: recipe,
        unit_input_drivers: drivers,
    })
}

/// Indices of the `count` rows that are closest to being combinations of
/// the independent rows preceding them, scanning in index order.
fn dependent_rows(m: &DMatrix<C64>, count: usize) -> Vec<usize> {
    let n = m.nrows();
    let mut basis: Vec<DVector<C64>> = Vec::new();
    let mut scored: Vec<(f64, usize)> = Vec::with_capacity(n);
    let scale = m.iter().map(|v| v.norm()).fold(1.0, f64::max);
    for i in 0..n {
        let row: DVector<C64> = m.row(i).transpose().into_owned();
        let mut v = row.clone();
        for _ in 0..2 {
            for q in &basis {
                let d = q.dotc(&v);
                v -= q * d;
            }
        }
        let r = v.norm();
        scored.push((r / scale, i));
        if r > 1e-8 * scale {
            basis.push(v / C64::new(r, 0.0));
        }
    }
    scored.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
    let mut rows: Vec<usize> = scored.into_iter().take(count).map(|(_, i)| i).collect();
    rows.sort_unstable();
    rows
}

/// PBH test: `rank [lambda I - A, B] = N` for every eigenvalue.
pub fn pbh_controllable(sys: &DenseSystem) -> bool {
    let n = sys.n();
    let raw = raw_clusters(&sys.a);
    raw.clusters.iter().all(|&(lambda, _)| {
        let m = sys.b.ncols();
        let mut aug = DMatrix::<C64>::zeros(n, n + m);
        aug.view_mut((0, 0), (n, n)).copy_from(&shifted(&sys.a, lambda));
        for i in 0..n {
            for j in 0..m {
                aug[(i, n + j)] = C64::new(sys.b[(i, j)], 0.0);
            }
        }
        let rank = aug.singular_values().iter().filter(|&&s| s > raw.tol).count();
        rank == n
    })
}

/// Mean and per-seed driver fractions of a self-loop experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelfLoopSample {
    pub mean_n_d: f64,
    pub samples: Vec<f64>,
}

/// Sets the diagonal of `A` to `loop_weights[t]` on a random share
/// `densities[t]` of the nodes (one shuffle per seed) and records `N_D / N`
/// from [`pbh_min_drivers`].
pub fn self_loop_sweep(a: &DMatrix<f64>, loop_weights: &[f64], densities: &[f64], seeds: &[u64]) -> Result<SelfLoopSample> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch(format!("A is {}x{}", n, a.ncols())));
    }
    if loop_weights.len() != densities.len() {
        return Err(Error::DimensionMismatch("one density per loop weight".into()));
    }
    if (densities.iter().sum::<f64>() - 1.0).abs() > 1e-9 || densities.iter().any(|&d| d < 0.0) {
        return Err(Error::InvalidArgument("densities must be nonnegative and sum to 1".into()));
    }
    if n == 0 || seeds.is_empty() {
        return Err(Error::InvalidArgument("need a nonempty matrix and at least one seed".into()));
    }
    let counts = apportion(n, densities);
    let samples = seeds
        .iter()
        .map(|&seed| {
            let mut nodes: Vec<usize> = (0..n).collect();
            shuffle(&mut nodes, &mut rng(seed));
            let mut m = a.clone();
            let mut it = nodes.into_iter();
            for (&w, &c) in loop_weights.iter().zip(&counts) {
                for i in it.by_ref().take(c) {
                    m[(i, i)] = w;
                }
            }
            pbh_driver_count(&m).map(|k| k as f64 / n as f64)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(SelfLoopSample { mean_n_d: samples.iter().sum::<f64>() / samples.len() as f64, samples })
}

/// Largest-remainder rounding of `n * densities` to integers summing to `n`.
fn apportion(n: usize, densities: &[f64]) -> Vec<usize> {
    let exact: Vec<f64> = densities.iter().map(|d| d * n as f64).collect();
    let mut counts: Vec<usize> = exact.iter().map(|x| x.floor() as usize).collect();
    let mut rest = n - counts.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..densities.len()).collect();
    order.sort_by(|&i, &j| (exact[j] - exact[j].floor()).total_cmp(&(exact[i] - exact[i].floor())).then(i.cmp(&j)));
    for &i in order.iter().cycle() {
        if rest == 0 {
            break;
        }
        counts[i] += 1;
        rest -= 1;
    }
    counts
}

/// Dense matrix from comma-separated rows; blank lines and `#` comments are skipped.
pub fn parse_dense_csv(text: &str) -> Result<DMatrix<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split(',')
            .map(|t| {
                t.trim().parse::<f64>().map_err(|e| Error::Parse { line: k + 1, message: format!("{t:?}: {e}") })
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::Parse { line: k + 1, message: "ragged row".into() });
            }
        }
        rows.push(row);
    }
    let (r, c) = (rows.len(), rows.first().map_or(0, Vec::len));
    Ok(DMatrix::from_fn(r, c, |i, j| rows[i][j]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generate::{chain, complete, gnp_directed, gnp_undirected, ring, star};
    use crate::structural::min_driver_set;
    use rand::Rng;

    fn sys(a: DMatrix<f64>, b: DMatrix<f64>) -> DenseSystem {
        DenseSystem::new(a, b, None).unwrap()
    }

    #[test]
    fn stick_balancing_is_controllable() {
        let (g, l) = (9.81, 0.7);
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, g / l, 0.0]);
        let b = DMatrix::from_row_slice(2, 1, &[0.0, -g / l]);
        assert_eq!(kalman_rank(&sys(a, b)), KalmanRank { rank: 2, controllable: true });
    }

    #[test]
    fn star_needs_two_inputs() {
        // x1 drives x2 and x3 with distinct weights.
        let a = DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 0.0, 1.3, 0.0, 0.0, 0.7, 0.0, 0.0]);
        let one = DenseSystem::with_drivers(a.clone(), &[0]).unwrap();
        assert_eq!(kalman_rank(&one).rank, 2);
        let two = DenseSystem::with_drivers(a, &[0, 2]).unwrap();
        assert!(kalman_rank(&two).controllable);
    }

    #[test]
    fn dimension_checks() {
        let a = DMatrix::zeros(2, 3);
        assert!(matches!(DenseSystem::new(a, DMatrix::zeros(2, 1), None), Err(Error::DimensionMismatch(_))));
        let a = DMatrix::zeros(2, 2);
        assert!(matches!(DenseSystem::new(a, DMatrix::zeros(3, 1), None), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn table_of_simple_graphs() {
        for n in [4usize, 7, 10] {
            assert_eq!(pbh_min_drivers(&chain(n).adjacency_matrix()).unwrap().n_drivers, 1);
            assert_eq!(pbh_min_drivers(&ring(n).adjacency_matrix()).unwrap().n_drivers, 2);
            assert_eq!(pbh_min_drivers(&star(n).adjacency_matrix()).unwrap().n_drivers, n - 2);
            assert_eq!(pbh_min_drivers(&complete(n).adjacency_matrix()).unwrap().n_drivers, n - 1);
        }
    }

    #[test]
    fn chain_eigenvalues() {
        let n = 6;
        let t = eigen_table(&chain(n).adjacency_matrix()).unwrap();
        let mut got: Vec<f64> = t.clusters.iter().map(|c| c.re).collect();
        let mut want: Vec<f64> =
            (1..=n).map(|q| 2.0 * (q as f64 * std::f64::consts::PI / (n + 1) as f64).cos()).collect();
        got.sort_by(f64::total_cmp);
        want.sort_by(f64::total_cmp);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-10);
        }
    }

    #[test]
    fn star_and_identity_eigenvalues() {
        let n = 8;
        let t = eigen_table(&star(n).adjacency_matrix()).unwrap();
        assert_eq!(t.clusters.len(), 3);
        let zero = t.clusters.iter().find(|c| c.re.abs() < 1e-9).unwrap();
        assert_eq!((zero.algebraic, zero.geometric), (n - 2, n - 2));
        assert!((t.clusters[2].re - ((n - 1) as f64).sqrt()).abs() < 1e-10);
        let id = eigen_table(&DMatrix::identity(5, 5)).unwrap();
        assert_eq!(id.clusters.len(), 1);
        assert_eq!(id.clusters[0].geometric, 5);
    }

    #[test]
    fn symmetric_multiplicities_agree() {
        for seed in 0..10 {
            let a = gnp_undirected(30, 0.08, seed).adjacency_matrix();
            let t = eigen_table(&a).unwrap();
            assert_eq!(t.clusters.iter().map(|c| c.geometric).sum::<usize>(), 30);
            assert!(t.clusters.iter().all(|c| c.geometric == c.algebraic));
        }
    }

    #[test]
    fn drivers_make_the_system_controllable() {
        for seed in 0..20 {
            let a = gnp_undirected(25, 0.1, seed).adjacency_matrix();
            let r = pbh_min_drivers(&a).unwrap();
            assert_eq!(r.drivers.len(), r.n_drivers);
            assert!(r.unit_input_drivers.len() >= r.n_drivers);
            let s = DenseSystem::with_drivers(a, &r.unit_input_drivers).unwrap();
            assert!(pbh_controllable(&s), "seed {seed}");
        }
    }

    #[test]
    fn isolated_nodes_force_extra_unit_inputs() {
        // Two isolated nodes plus one edge: mu(0) = 2, yet the edge needs
        // its own input once both isolated nodes are driven.
        let mut g = crate::graph::UnGraph::with_nodes(4);
        g.add_edge(2, 3).unwrap();
        let a = g.adjacency_matrix();
        let r = pbh_min_drivers(&a).unwrap();
        assert_eq!(r.n_drivers, 2);
        assert_eq!(r.unit_input_drivers.len(), 3);
        assert!(pbh_controllable(&DenseSystem::with_drivers(a, &r.unit_input_drivers).unwrap()));
    }

    #[test]
    fn identity_shift_leaves_driver_count() {
        let mut r = rng(3);
        for seed in 0..10 {
            let a = gnp_undirected(60, 0.05, seed).adjacency_matrix();
            let w: f64 = r.random_range(-3.0..3.0);
            let shifted = &a + DMatrix::identity(60, 60) * w;
            assert_eq!(pbh_min_drivers(&a).unwrap().n_drivers, pbh_min_drivers(&shifted).unwrap().n_drivers);
        }
    }

    fn random_weights(g: &crate::graph::DiGraph, seed: u64) -> DMatrix<f64> {
        let mut r = rng(seed);
        g.reweighted(|_| r.random_range(0.5..2.0) * if r.random::<bool>() { 1.0 } else { -1.0 }).to_state_matrix()
    }

    #[test]
    fn generic_weights_match_structural_count() {
        for seed in 0..200 {
            let n = 1 + (seed % 5) as usize;
            let g = gnp_directed(n, 0.4, true, seed);
            let structural = min_driver_set(&g).n_drivers;
            let votes: Vec<usize> = (0..5).map(|k| pbh_min_drivers(&random_weights(&g, seed * 10 + k)).unwrap().n_drivers).collect();
            let agree = votes.iter().filter(|&&v| v == structural).count();
            assert!(agree >= 3, "seed {seed}: structural {structural}, pbh {votes:?}");
        }
    }

    #[test]
    fn generic_weights_match_kalman_brute_force() {
        // Fewest independent generic inputs giving a full-rank Kalman matrix.
        for seed in 0..60 {
            let n = 1 + (seed % 5) as usize;
            let g = gnp_directed(n, 0.4, true, 700 + seed);
            let a = random_weights(&g, seed);
            let mut r = rng(900 + seed);
            let best = (1..=n)
                .find(|&m| {
                    let b = DMatrix::from_fn(n, m, |_, _| r.random_range(-1.0..1.0));
                    kalman_rank(&sys(a.clone(), b)).controllable
                })
                .unwrap();
            assert_eq!(best, min_driver_set(&g).n_drivers, "seed {seed}");
        }
    }

    #[test]
    fn kalman_agrees_with_pbh() {
        let mut r = rng(11);
        for seed in 0..40 {
            let n = 2 + (seed % 19) as usize;
            let g = gnp_directed(n, 0.15, false, 300 + seed);
            let a = random_weights(&g, seed);
            let k = r.random_range(1..=n.min(3));
            let drivers: Vec<usize> = (0..k).map(|_| r.random_range(0..n)).collect();
            let s = DenseSystem::with_drivers(a, &drivers).unwrap();
            assert_eq!(kalman_rank(&s).controllable, pbh_controllable(&s), "seed {seed}");
        }
    }

    #[test]
    fn krylov_route_matches_explicit() {
        let a = chain(80).adjacency_matrix();
        let s = DenseSystem::with_drivers(a.clone(), &[0]).unwrap();
        assert_eq!(kalman_rank(&s).rank, 80);
        let st = DenseSystem::with_drivers(star(60).adjacency_matrix(), &[0]).unwrap();
        assert_eq!(kalman_rank(&st).rank, 2);
        assert_eq!(krylov_rank(&DenseSystem::with_drivers(chain(12).adjacency_matrix(), &[3]).unwrap()),
                   explicit_kalman_rank(&DenseSystem::with_drivers(chain(12).adjacency_matrix(), &[3]).unwrap()));
    }

    #[test]
    fn self_loop_symmetry() {
        let a = gnp_undirected(40, 0.06, 5).adjacency_matrix();
        let seeds: Vec<u64> = (0..4).collect();
        let none = self_loop_sweep(&a, &[0.0, 1.0], &[1.0, 0.0], &seeds).unwrap().mean_n_d;
        let all = self_loop_sweep(&a, &[0.0, 1.0], &[0.0, 1.0], &seeds).unwrap().mean_n_d;
        assert_eq!(none, all);
        let third = self_loop_sweep(&a, &[0.0, 1.0, 2.0], &[1.0 / 3.0; 3], &seeds).unwrap();
        assert!(third.mean_n_d <= none);
        assert!(self_loop_sweep(&a, &[1.0], &[0.5], &seeds).is_err());
    }

    #[test]
    fn apportion_sums() {
        assert_eq!(apportion(10, &[1.0 / 3.0; 3]).iter().sum::<usize>(), 10);
        assert_eq!(apportion(7, &[0.5, 0.5]), vec![4, 3]);
    }

    #[test]
    fn dense_csv() {
        let m = parse_dense_csv("# A\n1,2\n3, 4\n").unwrap();
        assert_eq!(m, DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]));
        assert!(parse_dense_csv("1,2\n3\n").is_err());
    }

    #[test]
    fn defective_eigenvalue_stays_one_cluster() {
        // Nilpotent chain 0 -> 1 -> 2 -> 3 plus a feedback loop 3 -> 1 giving
        // a triple zero eigenvalue with a single eigenvector.
        let mut a = DMatrix::zeros(5, 5);
        for (dst, src, w) in [(1, 0, 1.0), (2, 1, 0.5), (3, 2, 1.2), (4, 3, 0.7), (1, 3, -0.8)] {
            a[(dst, src)] = w;
        }
        let t = eigen_table(&a).unwrap();
        let zero: Vec<&EigenCluster> = t.clusters.iter().filter(|c| c.value().norm() < 1e-3).collect();
        assert_eq!(zero.len(), 1, "{t:?}");
        assert_eq!(zero[0].geometric, 1);
        let p = pbh_min_drivers(&a).unwrap();
        let sys = DenseSystem::with_drivers(a, &p.unit_input_drivers).unwrap();
        assert!(kalman_rank(&sys).controllable, "{p:?}");
    }
}
