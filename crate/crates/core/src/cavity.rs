//! Cavity-method prediction of the driver-node fraction for random directed
//! ensembles described only by their in- and out-degree distributions.

use rayon::prelude::*;
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::graph::generate::{configuration_model_directed, poisson, rng, static_model_directed};
use crate::graph::{bipartite_rep, maximum_matching};
use crate::structural::driver_count;

/// Degree distribution of one direction (in or out) of a directed ensemble.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DegreeDistribution {
    /// Poisson with the given per-direction mean.
    Poisson { mean: f64 },
    /// Static scale-free model: a Poisson mixture with intensity
    /// `c * u^(-alpha)`, `u ~ U(0,1)`, `alpha = 1/(gamma-1)`.
    StaticScaleFree { mean: f64, gamma: f64 },
    /// Explicit probabilities `pmf[k]`.
    Empirical { pmf: Vec<f64> },
}

impl DegreeDistribution {
    /// Poisson per direction for an ER digraph of total mean degree `k_mean`.
    pub fn erdos_renyi(k_mean: f64) -> Self {
        Self::Poisson { mean: k_mean / 2.0 }
    }

    pub fn static_scale_free(k_mean: f64, gamma: f64) -> Result<Self> {
        if gamma <= 2.0 {
            return Err(Error::InvalidArgument(format!("gamma must exceed 2, got {gamma}")));
        }
        Ok(Self::StaticScaleFree { mean: k_mean / 2.0, gamma })
    }

    /// Normalised histogram of observed degrees.
    pub fn from_degrees(degrees: &[usize]) -> Result<Self> {
        if degrees.is_empty() {
            return Err(Error::InvalidArgument("empty degree sequence".into()));
        }
        let kmax = *degrees.iter().max().expect("nonempty");
        let mut pmf = vec![0.0; kmax + 1];
        for &k in degrees {
            pmf[k] += 1.0;
        }
        let n = degrees.len() as f64;
        pmf.iter_mut().for_each(|p| *p /= n);
        Ok(Self::Empirical { pmf })
    }

    pub fn mean(&self) -> f64 {
        match self {
            Self::Poisson { mean } | Self::StaticScaleFree { mean, .. } => *mean,
            Self::Empirical { pmf } => pmf.iter().enumerate().map(|(k, p)| k as f64 * p).sum(),
        }
    }

    pub fn pmf(&self, k: usize) -> f64 {
        match self {
            Self::Poisson { mean } => poisson_pmf(k, *mean),
            Self::StaticScaleFree { mean, gamma } => {
                let (alpha, c) = static_params(*mean, *gamma);
                static_pmf(k, alpha, c)
            }
            Self::Empirical { pmf } => pmf.get(k).copied().unwrap_or(0.0),
        }
    }

    /// Excess-degree probability `(k+1) P(k+1) / <k>`.
    pub fn excess_pmf(&self, k: usize) -> f64 {
        let m = self.mean();
        if m == 0.0 {
            return if k == 0 { 1.0 } else { 0.0 };
        }
        (k + 1) as f64 * self.pmf(k + 1) / m
    }

    /// Generating function `G(x) = sum_k P(k) x^k`.
    pub fn g(&self, x: f64) -> f64 {
        match self {
            Self::Poisson { mean } => (mean * (x - 1.0)).exp(),
            Self::StaticScaleFree { mean, gamma } => {
                let (alpha, c) = static_params(*mean, *gamma);
                let y = c * (1.0 - x);
                if y <= 0.0 {
                    return 1.0;
                }
                // E_u[exp(-y u^-alpha)]
                integrate(|u| (-y * u.powf(-alpha)).exp(), 0.0, 1.0)
            }
            Self::Empirical { pmf } => horner(pmf.iter().copied(), x),
        }
    }

    /// Excess generating function `H(x) = G'(x) / G'(1)`.
    pub fn h(&self, x: f64) -> f64 {
        match self {
            Self::Poisson { mean } => (mean * (x - 1.0)).exp(),
            Self::StaticScaleFree { mean, gamma } => {
                let (alpha, c) = static_params(*mean, *gamma);
                let y = c * (1.0 - x);
                if y <= 0.0 {
                    return 1.0;
                }
                // Substituting u = t^(1/(1-alpha)) absorbs the u^-alpha weight.
                let q = alpha / (1.0 - alpha);
                integrate(|t| (-y * t.powf(-q)).exp(), 0.0, 1.0)
            }
            Self::Empirical { pmf } => {
                let m = self.mean();
                if m == 0.0 {
                    return 1.0;
                }
                horner(pmf.iter().enumerate().skip(1).map(|(k, p)| k as f64 * p / m), x)
            }
        }
    }
}

fn horner(coeffs: impl DoubleEndedIterator<Item = f64>, x: f64) -> f64 {
    coeffs.rev().fold(0.0, |acc, c| acc * x + c)
}

fn poisson_pmf(k: usize, mean: f64) -> f64 {
    if mean == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    (k as f64 * mean.ln() - mean - ln_gamma(k as f64 + 1.0)).exp()
}

fn static_params(mean: f64, gamma: f64) -> (f64, f64) {
    let alpha = 1.0 / (gamma - 1.0);
    (alpha, mean * (1.0 - alpha))
}

/// `P(k)` of the static model. With `lambda = c e^s` the mixture becomes
/// `(1/alpha) * int_0^inf e^(-s/alpha) Pois(k; c e^s) ds`.
fn static_pmf(k: usize, alpha: f64, c: f64) -> f64 {
    if c == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    let kf = k as f64;
    let f = |s: f64| (-s / alpha).exp() * poisson_pmf(k, c * s.exp());
    let peak = (kf.max(1.0) / c).ln().max(0.0);
    let end = ((kf + 50.0 + 10.0 * kf.sqrt()) / c).ln().max(peak + 1.0);
    (integrate(f, 0.0, peak) + integrate(f, peak, end)) / alpha
}

/// Adaptive Simpson quadrature to near machine precision.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    fn step(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                + step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
    }
    if b <= a {
        return 0.0;
    }
    // Seed with a uniform split so narrow features are not missed.
    const PIECES: usize = 16;
    let h = (b - a) / PIECES as f64;
    (0..PIECES)
        .map(|i| {
            let (x0, x1) = (a + i as f64 * h, a + (i + 1) as f64 * h);
            let xm = 0.5 * (x0 + x1);
            let (f0, fm, f1) = (f(x0), f(xm), f(x1));
            let whole = (x1 - x0) / 6.0 * (f0 + 4.0 * fm + f1);
            step(&f, x0, x1, f0, fm, f1, whole, 1e-15, 40)
        })
        .sum()
}

/// Message probabilities of the cavity fixed point. `w*` refer to the
/// out-side (tails), `wh*` to the in-side (heads).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CavityState {
    pub w1: f64,
    pub w2: f64,
    pub w3: f64,
    pub wh1: f64,
    pub wh2: f64,
    pub wh3: f64,
}

impl CavityState {
    fn from_pairs(w1: f64, w2: f64, wh1: f64, wh2: f64) -> Self {
        Self { w1, w2, w3: 1.0 - w1 - w2, wh1, wh2, wh3: 1.0 - wh1 - wh2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CavitySolution {
    pub n_d: f64,
    pub state: CavityState,
    pub iterations: usize,
    /// Largest violation of the self-consistency equations at the returned state.
    pub residual: f64,
}

const MIXING: f64 = 0.5;
const TOLERANCE: f64 = 1e-10;
const MAX_ITERATIONS: usize = 100_000;

fn update(d_in: &DegreeDistribution, d_out: &DegreeDistribution, s: &CavityState) -> CavityState {
    CavityState::from_pairs(
        d_out.h(s.wh2),
        1.0 - d_out.h(1.0 - s.wh1),
        d_in.h(s.w2),
        1.0 - d_in.h(1.0 - s.w1),
    )
}

/// Largest absolute violation of the six self-consistency equations.
pub fn cavity_residual(d_in: &DegreeDistribution, d_out: &DegreeDistribution, s: &CavityState) -> f64 {
    let next = update(d_in, d_out, s);
    [
        next.w1 - s.w1,
        next.w2 - s.w2,
        next.w3 - s.w3,
        next.wh1 - s.wh1,
        next.wh2 - s.wh2,
        next.wh3 - s.wh3,
    ]
    .iter()
    .fold(0.0_f64, |m, d| m.max(d.abs()))
}

/// Driver fraction at a given state; `z` is the total mean degree.
pub fn driver_fraction(d_in: &DegreeDistribution, d_out: &DegreeDistribution, z: f64, s: &CavityState) -> f64 {
    let out_part = d_out.g(s.wh2) + d_out.g(1.0 - s.wh1) - 1.0;
    let in_part = d_in.g(s.w2) + d_in.g(1.0 - s.w1) - 1.0;
    let edge_part = z / 2.0 * (s.wh1 * (1.0 - s.w2) + s.w1 * (1.0 - s.wh2));
    0.5 * (out_part + in_part + edge_part)
}

/// Damped fixed-point iteration of the cavity equations.
///
/// Iteration starts from all-zero messages. From there the map increases
/// monotonically to the physical (extreme) fixed point; other starting
/// points can land on the unstable middle solution once `z > 2e`.
pub fn solve_cavity(d_in: &DegreeDistribution, d_out: &DegreeDistribution, z: f64) -> Result<CavitySolution> {
    if !(z > 0.0) {
        return Err(Error::InvalidArgument(format!("mean degree must be positive, got {z}")));
    }
    let mut s = CavityState::from_pairs(0.0, 0.0, 0.0, 0.0);
    let mut change = f64::INFINITY;
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS && change >= TOLERANCE {
        let next = update(d_in, d_out, &s);
        let mix = |a: f64, b: f64| (1.0 - MIXING) * a + MIXING * b;
        let mixed = CavityState::from_pairs(
            mix(s.w1, next.w1),
            mix(s.w2, next.w2),
            mix(s.wh1, next.wh1),
            mix(s.wh2, next.wh2),
        );
        change = [mixed.w1 - s.w1, mixed.w2 - s.w2, mixed.wh1 - s.wh1, mixed.wh2 - s.wh2]
            .iter()
            .fold(0.0_f64, |m, d| m.max(d.abs()));
        s = mixed;
        iterations += 1;
    }
    let residual = cavity_residual(d_in, d_out, &s);
    if residual > 1e-8 {
        return Err(Error::NonConvergence { residual, iterations });
    }
    Ok(CavitySolution { n_d: driver_fraction(d_in, d_out, z, &s), state: s, iterations, residual })
}

/// Ensembles with a closed-form large-degree asymptote.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ensemble {
    ErdosRenyi,
    StaticScaleFree { gamma: f64 },
}

impl Ensemble {
    pub fn distribution(&self, k_mean: f64) -> Result<DegreeDistribution> {
        match *self {
            Ensemble::ErdosRenyi => Ok(DegreeDistribution::erdos_renyi(k_mean)),
            Ensemble::StaticScaleFree { gamma } => DegreeDistribution::static_scale_free(k_mean, gamma),
        }
    }

    pub fn gamma(&self) -> Option<f64> {
        match *self {
            Ensemble::ErdosRenyi => None,
            Ensemble::StaticScaleFree { gamma } => Some(gamma),
        }
    }
}

/// Large-`<k>` asymptote of the driver fraction.
pub fn nd_asymptotic(ensemble: Ensemble, k_mean: f64) -> f64 {
    match ensemble {
        Ensemble::ErdosRenyi => (-k_mean / 2.0).exp(),
        Ensemble::StaticScaleFree { gamma } => (-0.5 * (1.0 - 1.0 / (gamma - 1.0)) * k_mean).exp(),
    }
}

/// Driver fraction of one sampled network.
pub fn simulate_nd(ensemble: Ensemble, n: usize, k_mean: f64, seed: u64) -> Result<f64> {
    let g = match ensemble {
        Ensemble::ErdosRenyi => {
            let (out_deg, in_deg) = poisson_degree_sequences(n, k_mean / 2.0, seed);
            configuration_model_directed(&out_deg, &in_deg, seed)?
        }
        Ensemble::StaticScaleFree { gamma } => static_model_directed(n, k_mean, gamma, seed),
    };
    let m = maximum_matching(&bipartite_rep(&g));
    Ok(driver_count(n, m.size()) as f64 / n as f64)
}

/// Independent Poisson in- and out-degrees, with the in-side nudged at
/// random nodes until both stub totals agree.
pub fn poisson_degree_sequences(n: usize, mean: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    use rand::Rng;
    let mut r = rng(seed ^ 0x5eed_de9e);
    let out_deg: Vec<usize> = (0..n).map(|_| poisson(mean, &mut r)).collect();
    let mut in_deg: Vec<usize> = (0..n).map(|_| poisson(mean, &mut r)).collect();
    let target: usize = out_deg.iter().sum();
    let mut total: usize = in_deg.iter().sum();
    while total != target {
        let i = r.random_range(0..n);
        if total < target {
            in_deg[i] += 1;
            total += 1;
        } else if in_deg[i] > 0 {
            in_deg[i] -= 1;
            total -= 1;
        }
    }
    (out_deg, in_deg)
}

/// One row of a cavity-versus-simulation sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub k_mean: f64,
    pub gamma: Option<f64>,
    pub n_d_cavity: f64,
    pub n_d_simulated: Option<f64>,
    pub stderr: Option<f64>,
}

/// Cavity prediction for each mean degree, plus the mean and standard error
/// of simulated driver fractions over `seeds` networks of size `n` when
/// `n > 0`. Seeds fan out over the current rayon pool.
pub fn cavity_sweep(ensemble: Ensemble, k_means: &[f64], n: usize, seeds: &[u64]) -> Result<Vec<SweepRow>> {
    k_means
        .iter()
        .map(|&k| {
            let d = ensemble.distribution(k)?;
            let n_d_cavity = solve_cavity(&d, &d, k)?.n_d;
            let (n_d_simulated, stderr) = if n > 0 && !seeds.is_empty() {
                let samples: Vec<f64> = seeds
                    .par_iter()
                    .map(|&s| simulate_nd(ensemble, n, k, s))
                    .collect::<Result<_>>()?;
                let (mean, se) = mean_stderr(&samples);
                (Some(mean), Some(se))
            } else {
                (None, None)
            };
            Ok(SweepRow { k_mean: k, gamma: ensemble.gamma(), n_d_cavity, n_d_simulated, stderr })
        })
        .collect()
}

fn mean_stderr(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    if x.len() < 2 {
        return (mean, 0.0);
    }
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// CSV with columns `k_mean,gamma,n_d_cavity,n_d_simulated,stderr`; absent
/// values are left empty.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let opt = |v: Option<f64>| v.map(|x| format!("{x}")).unwrap_or_default();
    let mut out = String::from("k_mean,gamma,n_d_cavity,n_d_simulated,stderr\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.k_mean,
            opt(r.gamma),
            r.n_d_cavity,
            opt(r.n_d_simulated),
            opt(r.stderr)
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::function::gamma::gamma_ui;

    fn er(k: f64) -> f64 {
        let d = DegreeDistribution::erdos_renyi(k);
        solve_cavity(&d, &d, k).unwrap().n_d
    }

    #[test]
    fn er_reference_values() {
        // Independent fixed-point evaluation of the same equations.
        for (k, want) in [(2.0, 0.4559), (4.0, 0.2161), (6.0, 0.0723), (8.0, 0.02216), (10.0, 0.007419)] {
            let got = er(k);
            assert!((got - want).abs() / want < 2e-3, "k={k}: {got} vs {want}");
        }
    }

    #[test]
    fn sparse_limit_needs_every_node() {
        assert!(er(1e-4) > 0.9999);
    }

    #[test]
    fn er_is_nonincreasing() {
        let mut prev = 1.0;
        for i in 0..=23 {
            let k = 0.5 + 0.5 * i as f64;
            let v = er(k);
            assert!(v <= prev + 1e-12, "k={k}");
            prev = v;
        }
    }

    #[test]
    fn fixed_point_is_self_consistent() {
        for k in [1.0, 3.0, 5.5, 9.0] {
            let d = DegreeDistribution::erdos_renyi(k);
            let s = solve_cavity(&d, &d, k).unwrap();
            assert!(s.residual < 1e-8);
            let st = s.state;
            assert!((st.w1 + st.w2 + st.w3 - 1.0).abs() < 1e-12);
            assert!([st.w1, st.w2, st.w3, st.wh1, st.wh2, st.wh3].iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }

    #[test]
    fn rejects_nonpositive_degree() {
        let d = DegreeDistribution::erdos_renyi(1.0);
        assert!(matches!(solve_cavity(&d, &d, 0.0), Err(Error::InvalidArgument(_))));
    }

    /// Closed form through upper incomplete gamma functions, valid when
    /// `1/alpha` is not an integer (the downward recurrence divides by `s`).
    fn closed_form(mean: f64, gamma: f64, x: f64) -> (f64, f64) {
        fn upper(s: f64, y: f64) -> f64 {
            if s > 0.0 {
                gamma_ui(s, y)
            } else {
                (upper(s + 1.0, y) - y.powf(s) * (-y).exp()) / s
            }
        }
        let (alpha, c) = static_params(mean, gamma);
        let y = c * (1.0 - x);
        let a = 1.0 / alpha;
        let g = c.powf(a) / alpha * (1.0 - x).powf(a) * upper(-a, y);
        let h = c.powf(a) / (alpha * mean) * (1.0 - x).powf(a - 1.0) * upper(1.0 - a, y);
        (g, h)
    }

    #[test]
    fn static_model_matches_closed_form() {
        for gamma in [2.5, 3.5, 4.2] {
            let d = DegreeDistribution::static_scale_free(6.0, gamma).unwrap();
            for x in [0.0, 0.3, 0.7, 0.95] {
                let (g, h) = closed_form(3.0, gamma, x);
                assert!((d.g(x) - g).abs() < 1e-9, "G gamma={gamma} x={x}: {} vs {g}", d.g(x));
                assert!((d.h(x) - h).abs() < 1e-9, "H gamma={gamma} x={x}: {} vs {h}", d.h(x));
            }
        }
    }

    #[test]
    fn static_model_pmf_agrees_with_generating_function() {
        let d = DegreeDistribution::static_scale_free(4.0, 3.0).unwrap();
        let x: f64 = 0.5;
        let series: f64 = (0..80).map(|k| d.pmf(k) * x.powi(k as i32)).sum();
        assert!((series - d.g(x)).abs() < 1e-10, "{series} vs {}", d.g(x));
        let mean_head: f64 = (0..2000).map(|k| k as f64 * d.pmf(k)).sum();
        assert!(mean_head < 2.0 && mean_head > 1.9);
    }

    #[test]
    fn probabilities_sum_to_one() {
        let p = DegreeDistribution::Poisson { mean: 3.0 };
        assert!(((0..100).map(|k| p.pmf(k)).sum::<f64>() - 1.0).abs() < 1e-10);
        assert!(((0..100).map(|k| p.excess_pmf(k)).sum::<f64>() - 1.0).abs() < 1e-10);
        let e = DegreeDistribution::from_degrees(&[0, 1, 1, 2, 5]).unwrap();
        assert!(((0..10).map(|k| e.pmf(k)).sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(((0..10).map(|k| e.excess_pmf(k)).sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((e.g(1.0) - 1.0).abs() < 1e-12 && (e.h(1.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empirical_poisson_matches_analytic() {
        let p = DegreeDistribution::Poisson { mean: 2.0 };
        let pmf: Vec<f64> = (0..60).map(|k| p.pmf(k)).collect();
        let e = DegreeDistribution::Empirical { pmf };
        let a = solve_cavity(&p, &p, 4.0).unwrap().n_d;
        let b = solve_cavity(&e, &e, 4.0).unwrap().n_d;
        assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn scale_free_near_critical_exponent_needs_many_drivers() {
        let at = |gamma: f64| {
            let d = DegreeDistribution::static_scale_free(6.0, gamma).unwrap();
            solve_cavity(&d, &d, 6.0).unwrap().n_d
        };
        let (far, near) = (at(3.0), at(2.05));
        assert!(near > far && near > 0.5, "near={near} far={far}");
    }

    #[test]
    fn asymptotes() {
        assert!((nd_asymptotic(Ensemble::ErdosRenyi, 10.0) - 6.7379e-3).abs() < 1e-6);
        let sf = nd_asymptotic(Ensemble::StaticScaleFree { gamma: 3.0 }, 10.0);
        assert!((sf - 8.2085e-2).abs() < 1e-5);
        let big = nd_asymptotic(Ensemble::StaticScaleFree { gamma: 1e9 }, 10.0);
        assert!((big - nd_asymptotic(Ensemble::ErdosRenyi, 10.0)).abs() < 1e-9);
    }

    #[test]
    fn degree_sequences_balance() {
        let (o, i) = poisson_degree_sequences(1000, 3.0, 7);
        assert_eq!(o.iter().sum::<usize>(), i.iter().sum::<usize>());
    }

    #[test]
    fn small_simulation_is_close() {
        let sim = simulate_nd(Ensemble::ErdosRenyi, 20_000, 4.0, 1).unwrap();
        assert!((sim - er(4.0)).abs() < 0.02, "{sim}");
    }

    #[test]
    fn csv_layout() {
        let rows = cavity_sweep(Ensemble::ErdosRenyi, &[2.0], 0, &[]).unwrap();
        let csv = sweep_csv(&rows);
        assert!(csv.starts_with("k_mean,gamma,n_d_cavity,n_d_simulated,stderr\n2,,0.45"));
    }
}
