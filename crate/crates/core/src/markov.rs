//! Cyclic structure and asymptotic lift of a row-stochastic matrix.
//!
//! For an irreducible `P` of period `k` the lift is `C^k` with the cyclic
//! shift. The class indicators `e_j = 1_{C_{-j mod k}}` satisfy
//! `P e_j = e_{j+1}` because every edge leaves `C_i` for `C_{i+1}`.

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};
use serde::Serialize;
use std::collections::VecDeque;

use crate::config::Config;
use crate::decay::{certify_decay, DecayCertificate, DecayNorm};
use crate::error::{Error, Result};
use crate::linalg::{column_space, eigenvalues, matrix_power};
use crate::operator::{c, max_abs, CMat, CVec, C64};
use crate::spectral::{eigendecompose_matrix, peripheral, sort_spectrum};
use crate::stochastic::StochasticMatrix;

#[derive(Debug, Clone, Serialize)]
pub struct ComponentStructure {
    pub states: Vec<usize>,
    pub period: usize,
    /// Cyclic classes `C_0, ..., C_{k-1}`; `C_0` holds the smallest state and
    /// every transition goes from `C_j` to `C_{j+1 mod k}`.
    pub classes: Vec<Vec<usize>>,
    /// States listed class by class.
    pub permutation: Vec<usize>,
    /// `C_j -> C_{j+1}` transition blocks.
    pub blocks: Vec<Vec<Vec<f64>>>,
    /// Largest entry of `P` outside the superdiagonal block pattern.
    pub off_block_mass: f64,
    /// Largest deviation of a block row sum from one.
    pub block_row_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CyclicStructure {
    pub n: usize,
    pub irreducible: bool,
    /// Strongly connected components.
    pub components: Vec<Vec<usize>>,
    /// Edges of the condensation between component indices.
    pub condensation: Vec<(usize, usize)>,
    /// Indices of closed components, which carry the recurrent dynamics.
    pub terminal: Vec<usize>,
    pub transient_states: Vec<usize>,
    /// Cyclic structure of each closed component, aligned with `terminal`.
    pub closed: Vec<ComponentStructure>,
}

impl CyclicStructure {
    /// The whole chain's structure when it is irreducible.
    pub fn main(&self) -> Option<&ComponentStructure> {
        if self.irreducible {
            self.closed.first()
        } else {
            None
        }
    }

    pub fn period(&self) -> Option<usize> {
        self.main().map(|m| m.period)
    }
}

/// Communicating classes, periods and cyclic classes from the transition graph.
pub fn analyze_structure(p: &StochasticMatrix) -> CyclicStructure {
    let n = p.n();
    let mut graph: DiGraph<(), ()> = DiGraph::with_capacity(n, n * n);
    let nodes: Vec<NodeIndex> = (0..n).map(|_| graph.add_node(())).collect();
    for i in 0..n {
        for j in p.successors(i) {
            graph.add_edge(nodes[i], nodes[j], ());
        }
    }
    let mut components: Vec<Vec<usize>> = tarjan_scc(&graph)
        .into_iter()
        .map(|scc| {
            let mut v: Vec<usize> = scc.into_iter().map(|x| x.index()).collect();
            v.sort_unstable();
            v
        })
        .collect();
    components.sort_by_key(|comp| comp[0]);
    let mut comp_of = vec![0; n];
    for (ci, comp) in components.iter().enumerate() {
        for &s in comp {
            comp_of[s] = ci;
        }
    }
    let mut condensation = Vec::new();
    for i in 0..n {
        for j in p.successors(i) {
            let (a, b) = (comp_of[i], comp_of[j]);
            if a != b && !condensation.contains(&(a, b)) {
                condensation.push((a, b));
            }
        }
    }
    condensation.sort_unstable();
    let terminal: Vec<usize> =
        (0..components.len()).filter(|&ci| !condensation.iter().any(|&(a, _)| a == ci)).collect();
    let transient_states: Vec<usize> =
        (0..n).filter(|&s| !terminal.contains(&comp_of[s])).collect();
    let closed = terminal.iter().map(|&ci| component_structure(p, &components[ci])).collect();
    CyclicStructure { n, irreducible: components.len() == 1, components, condensation, terminal, transient_states, closed }
}

fn component_structure(p: &StochasticMatrix, states: &[usize]) -> ComponentStructure {
    let n = p.n();
    let mut inside = vec![false; n];
    for &s in states {
        inside[s] = true;
    }
    let root = states[0];
    let mut level = vec![usize::MAX; n];
    level[root] = 0;
    let mut queue = VecDeque::from([root]);
    while let Some(u) = queue.pop_front() {
        for v in p.successors(u) {
            if inside[v] && level[v] == usize::MAX {
                level[v] = level[u] + 1;
                queue.push_back(v);
            }
        }
    }
    let mut period = 0usize;
    for &u in states {
        for v in p.successors(u).filter(|&v| inside[v]) {
            let diff = (level[u] + 1).abs_diff(level[v]);
            period = gcd(period, diff);
        }
    }
    let period = period.max(1);
    let mut classes = vec![Vec::new(); period];
    for &s in states {
        classes[level[s] % period].push(s);
    }
    let permutation: Vec<usize> = classes.iter().flatten().copied().collect();
    let mut class_of = vec![usize::MAX; n];
    for (ci, cl) in classes.iter().enumerate() {
        for &s in cl {
            class_of[s] = ci;
        }
    }
    let blocks: Vec<Vec<Vec<f64>>> = (0..period)
        .map(|j| {
            let next = &classes[(j + 1) % period];
            classes[j].iter().map(|&i| next.iter().map(|&l| p.get(i, l)).collect()).collect()
        })
        .collect();
    let mut off_block_mass: f64 = 0.0;
    for &i in states {
        for &l in states {
            if class_of[l] != (class_of[i] + 1) % period {
                off_block_mass = off_block_mass.max(p.get(i, l));
            }
        }
    }
    let block_row_residual = blocks
        .iter()
        .flatten()
        .map(|row| (row.iter().sum::<f64>() - 1.0).abs())
        .fold(0.0, f64::max);
    ComponentStructure {
        states: states.to_vec(),
        period,
        classes,
        permutation,
        blocks,
        off_block_mass,
        block_row_residual,
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PeripheralSpectrumReport {
    pub period: usize,
    /// All eigenvalues as `[re, im]`, by decreasing modulus.
    pub eigenvalues: Vec<[f64; 2]>,
    pub peripheral: Vec<[f64; 2]>,
    /// Largest distance of a peripheral eigenvalue from its root of unity.
    pub max_root_error: f64,
    /// Every `k`-th root of unity occurs exactly once.
    pub simple: bool,
    pub sub_radius: f64,
    pub pass: bool,
}

/// Checks that the unimodular spectrum of an irreducible `P` of period `k`
/// is exactly the `k`-th roots of unity, each simple.
pub fn peripheral_spectrum_check(p: &StochasticMatrix, cs: &CyclicStructure, cfg: &Config) -> Result<PeripheralSpectrumReport> {
    let k = cs.period().ok_or_else(|| Error::InvalidInput("chain is not irreducible".into()))?;
    let values = sort_spectrum(&eigenvalues(&p.to_complex())?);
    let mut counts = vec![0usize; k];
    let mut max_root_error: f64 = 0.0;
    let mut peripheral_values = Vec::new();
    let mut sub_radius: f64 = 0.0;
    for &z in &values {
        if z.norm() <= 1.0 - cfg.tol_per {
            sub_radius = sub_radius.max(z.norm());
            continue;
        }
        peripheral_values.push([z.re, z.im]);
        let turns = z.arg() / (2.0 * std::f64::consts::PI) * k as f64;
        let j = (turns.round() as i64).rem_euclid(k as i64) as usize;
        counts[j] += 1;
        let root = C64::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / k as f64);
        max_root_error = max_root_error.max((z - root).norm());
    }
    let simple = counts.iter().all(|&n| n == 1);
    let report = PeripheralSpectrumReport {
        period: k,
        eigenvalues: values.iter().map(|z| [z.re, z.im]).collect(),
        peripheral: peripheral_values,
        max_root_error,
        simple,
        sub_radius,
        pass: simple && max_root_error <= cfg.tol_alg,
    };
    if !report.pass {
        return Err(Error::Inconsistent(format!(
            "peripheral spectrum of a period-{k} chain is not the simple k-th roots of unity (root error {max_root_error:e}, counts {counts:?})"
        )));
    }
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct MarkovResiduals {
    /// `max_j ||P e_j - e_{j+1}||_inf`.
    pub shift: f64,
    pub idempotency: f64,
    pub commutation: f64,
    /// `max_j ||Q e_j - e_j||_inf`.
    pub range: f64,
    pub rank: usize,
    /// Largest entry of the difference between the two routes to `Q`.
    pub route_agreement: f64,
    /// Squarings used by the power route.
    pub squarings: usize,
}

#[derive(Debug, Clone)]
pub struct MarkovLift {
    pub period: usize,
    /// Class indicators `e_0, ..., e_{k-1}`.
    pub indicators: Vec<Vec<f64>>,
    /// Cyclic shift on `C^k`, `alpha e_j = e_{j+1}`.
    pub alpha: CMat,
    /// Spectral idempotent onto the peripheral part.
    pub q: CMat,
    /// `lim_m P^{mk}`, computed by repeated squaring.
    pub q_power: CMat,
    pub sub_radius: f64,
    pub residuals: MarkovResiduals,
}

/// Power route converges once successive squares agree to this level.
const POWER_TOL: f64 = 1e-12;
const MAX_SQUARINGS: usize = 64;

/// Builds `(C^k, shift, e, Q)` and checks it against both routes to `Q`.
pub fn build_markov_lift(p: &StochasticMatrix, cs: &CyclicStructure, cfg: &Config) -> Result<MarkovLift> {
    let main = cs.main().ok_or_else(|| Error::InvalidInput("chain is not irreducible".into()))?;
    let k = main.period;
    let n = p.n();
    let pm = p.to_complex();

    let spec = eigendecompose_matrix(&pm, cfg)?;
    let pd = peripheral(&spec, cfg.tol_per)?;
    let q = pd.q.clone();

    let mut x = matrix_power(&pm, k as u64);
    let mut squarings = 0;
    loop {
        let y = &x * &x;
        let step = max_abs(&(&y - &x));
        x = y;
        squarings += 1;
        if step < POWER_TOL || squarings >= MAX_SQUARINGS {
            break;
        }
    }
    let q_power = x;
    let route_agreement = max_abs(&(&q - &q_power));
    if route_agreement > cfg.tol_alg {
        return Err(Error::Inconsistent(format!(
            "spectral and power routes to Q disagree by {route_agreement:e}"
        )));
    }

    let mut class_of = vec![0usize; n];
    for (ci, cl) in main.classes.iter().enumerate() {
        for &s in cl {
            class_of[s] = ci;
        }
    }
    let indicators: Vec<Vec<f64>> = (0..k)
        .map(|j| (0..n).map(|s| if class_of[s] == (k - j) % k { 1.0 } else { 0.0 }).collect())
        .collect();
    let as_vec = |e: &[f64]| CVec::from_iterator(n, e.iter().map(|&v| c(v, 0.0)));
    let mut alpha = CMat::zeros(k, k);
    for j in 0..k {
        alpha[((j + 1) % k, j)] = c(1.0, 0.0);
    }

    let mut shift: f64 = 0.0;
    let mut range: f64 = 0.0;
    for j in 0..k {
        let ej = as_vec(&indicators[j]);
        let next = as_vec(&indicators[(j + 1) % k]);
        shift = shift.max(max_abs(&(&pm * &ej - next)));
        range = range.max(max_abs(&(&q * &ej - &ej)));
    }
    let rank = column_space(&q, 1e-8).ncols();
    let residuals = MarkovResiduals {
        shift,
        idempotency: max_abs(&(&q * &q - &q)),
        commutation: max_abs(&(&q * &pm - &pm * &q)),
        range,
        rank,
        route_agreement,
        squarings,
    };
    if shift > 1e-12 || residuals.idempotency > 1e-10 || residuals.commutation > 1e-10 || range > 1e-10 || rank != k {
        return Err(Error::Inconsistent(format!("Markov lift invariants fail: {residuals:?}")));
    }
    Ok(MarkovLift { period: k, indicators, alpha, q, q_power, sub_radius: pd.sub_radius, residuals })
}

/// Certificate for `||(P (1 - Q))^n||_inf <= c r^n`, `n <= n_max`.
pub fn decay_certificate(p: &StochasticMatrix, lift: &MarkovLift, n_max: usize) -> DecayCertificate {
    let pm = p.to_complex();
    let r = &pm - &pm * &lift.q;
    certify_decay(&r, DecayNorm::RowSum, lift.sub_radius, n_max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{block_cyclic_four, cycle, lazy_chain, reducible_three};
    use crate::sampling::{random_periodic_stochastic, rng_from_seed};

    #[test]
    fn cycle_structure() {
        let p = cycle(3);
        let cs = analyze_structure(&p);
        let main = cs.main().unwrap();
        assert_eq!(main.period, 3);
        assert_eq!(main.classes, vec![vec![0], vec![1], vec![2]]);
        assert_eq!(main.off_block_mass, 0.0);
    }

    #[test]
    fn block_cyclic_structure_and_spectrum() {
        let p = block_cyclic_four();
        let cs = analyze_structure(&p);
        let main = cs.main().unwrap();
        assert_eq!(main.period, 2);
        assert_eq!(main.classes, vec![vec![0, 1], vec![2, 3]]);
        assert_eq!(main.blocks[0], vec![vec![0.75, 0.25], vec![0.25, 0.75]]);
        let cfg = Config::default();
        let report = peripheral_spectrum_check(&p, &cs, &cfg).unwrap();
        assert!((report.sub_radius - 0.5).abs() < 1e-12);
        let lift = build_markov_lift(&p, &cs, &cfg).unwrap();
        assert_eq!(lift.period, 2);
        let cert = decay_certificate(&p, &lift, 200);
        assert!(cert.holds);
        assert!((cert.empirical_rate.unwrap() - 0.5).abs() < 1e-6);
    }

    #[test]
    fn lazy_chain_decays_at_rate_point_eight() {
        let p = lazy_chain();
        let cfg = Config::default();
        let cs = analyze_structure(&p);
        assert_eq!(cs.period(), Some(1));
        let lift = build_markov_lift(&p, &cs, &cfg).unwrap();
        assert!((lift.sub_radius - 0.8).abs() < 1e-12);
        let cert = decay_certificate(&p, &lift, 200);
        assert!(cert.holds);
        for (i, v) in cert.curve.iter().enumerate().take(120) {
            let closed = 0.8f64.powi(i as i32 + 1);
            assert!((v - closed).abs() <= 1e-12 * closed.max(1e-3), "n={} {v} {closed}", i + 1);
        }
    }

    #[test]
    fn reducible_chain_reports_condensation() {
        let p = reducible_three();
        let cs = analyze_structure(&p);
        assert!(!cs.irreducible);
        assert_eq!(cs.components, vec![vec![0, 1], vec![2]]);
        assert_eq!(cs.condensation, vec![(0, 1)]);
        assert_eq!(cs.terminal, vec![1]);
        assert_eq!(cs.transient_states, vec![0, 1]);
        assert_eq!(cs.closed[0].period, 1);
        let cfg = Config::default();
        assert!(matches!(peripheral_spectrum_check(&p, &cs, &cfg), Err(Error::InvalidInput(_))));
        assert!(matches!(build_markov_lift(&p, &cs, &cfg), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn random_periodic_chains() {
        let cfg = Config::default();
        let mut rng = rng_from_seed(21);
        for k in 1..=5 {
            for n in [k, k + 3, 2 * k + 5] {
                let p = random_periodic_stochastic(&mut rng, n, k);
                let cs = analyze_structure(&p);
                assert_eq!(cs.period(), Some(k));
                let report = peripheral_spectrum_check(&p, &cs, &cfg).unwrap();
                assert_eq!(report.peripheral.len(), k);
                let lift = build_markov_lift(&p, &cs, &cfg).unwrap();
                assert!(lift.residuals.route_agreement <= 1e-8);
            }
        }
    }

    #[test]
    fn markov_lift_matches_channel_lift_dimension() {
        let cfg = Config::default();
        let p = cycle(4);
        let cs = analyze_structure(&p);
        let ml = build_markov_lift(&p, &cs, &cfg).unwrap();
        let lift = crate::lift::build_lift(&crate::channel::Channel::from_stochastic(&p), &cfg).unwrap();
        assert_eq!(lift.dim(), ml.period);
    }
}
