//! Slow-oscillation classification and audits of the asymptotic behaviour of
//! `rho o L^k`.

use serde::Serialize;

use crate::channel::Channel;
use crate::config::Config;
use crate::error::Result;
use crate::lift::AsymptoticLift;
use crate::operator::{c, nuclear_norm, serde_matrix, spectral_norm, unvec, CMat, C64};
use crate::sampling::{functional_batch, SampleRng};

/// Constant in front of `sub_radius^k` in the sampled threshold.
const THRESHOLD_CONSTANT: f64 = 10.0;
const FIXED_POINT_SAMPLES: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    SlowlyOscillating,
    NotSlowlyOscillating,
    /// The three criteria disagree.
    Inconclusive,
}

impl Verdict {
    /// Exit status used by the command line.
    pub fn exit_code(self) -> i32 {
        match self {
            Self::SlowlyOscillating => 0,
            Self::NotSlowlyOscillating => 1,
            Self::Inconclusive => 2,
        }
    }
}

/// A peripheral eigenvector `x` with `L(x) = lambda x`, `||x|| = 1`, and a
/// unit functional `rho` with `rho(x) = 1`, so that
/// `||rho o L^{n+1} - rho o L^n|| >= |lambda - 1|` for every `n`.
#[derive(Debug, Clone, Serialize)]
pub struct Witness {
    pub eigenvalue: [f64; 2],
    #[serde(with = "serde_matrix")]
    pub operator: CMat,
    #[serde(with = "serde_matrix")]
    pub functional: CMat,
    pub lower_bound: f64,
    /// `||rho o L^{n+1} - rho o L^n||` at `n = k_max`.
    pub achieved: f64,
    /// `||L(x) - x||`.
    pub fixed_point_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassificationReport {
    pub verdict: Verdict,
    /// Every peripheral eigenvalue equals one.
    pub spectral: bool,
    /// `alpha` is the identity.
    pub alpha_trivial: bool,
    pub alpha_deviation: f64,
    /// `||rho o L^{k+1} - rho o L^k||` is below threshold for every sample.
    pub sampled: bool,
    pub k_max: usize,
    pub samples: usize,
    /// Largest successive difference at each `k`, over the samples.
    pub residual_curve: Vec<f64>,
    /// Largest ratio of the final difference to its threshold.
    pub worst_threshold_ratio: f64,
    pub witnesses: Vec<Witness>,
}

/// Classifies slow oscillation three ways: by the peripheral spectrum, by
/// `alpha = id`, and by sampled successive differences with threshold
/// `max(tol_alg, 10 D_0 r^k)`.
pub fn classify(ch: &Channel, lift: &AsymptoticLift, cfg: &Config, rng: &mut SampleRng) -> Result<ClassificationReport> {
    let one = c(1.0, 0.0);
    let spectral = lift.peripheral.values().iter().all(|v| (v - one).norm() <= cfg.tol_cluster);
    let alpha_deviation = lift.alpha_deviation();
    let alpha_trivial = alpha_deviation <= cfg.tol_alg;

    let p = ch.predual();
    let r = lift.peripheral.sub_radius;
    let decay = r.powi(cfg.k_max as i32);
    let mut residual_curve = vec![0.0f64; cfg.k_max + 1];
    let mut worst_threshold_ratio: f64 = 0.0;
    for f in functional_batch(rng, ch.dim(), cfg.samples) {
        let mut g = f.into_pairing_matrix();
        let mut d0 = 0.0;
        for (k, slot) in residual_curve.iter_mut().enumerate() {
            let next = p.apply_unchecked(&g);
            let diff = nuclear_norm(&(&next - &g));
            if k == 0 {
                d0 = diff;
            }
            *slot = slot.max(diff);
            if k == cfg.k_max {
                let threshold = cfg.tol_alg.max(THRESHOLD_CONSTANT * d0 * decay);
                worst_threshold_ratio = worst_threshold_ratio.max(diff / threshold);
            }
            g = next;
        }
    }
    let sampled = worst_threshold_ratio <= 1.0;

    let witnesses = peripheral_witnesses(ch, lift, cfg.k_max, cfg.tol_cluster)?;
    let verdict = match (spectral, alpha_trivial, sampled) {
        (true, true, true) => Verdict::SlowlyOscillating,
        (false, false, false) => Verdict::NotSlowlyOscillating,
        _ => Verdict::Inconclusive,
    };
    Ok(ClassificationReport {
        verdict,
        spectral,
        alpha_trivial,
        alpha_deviation,
        sampled,
        k_max: cfg.k_max,
        samples: cfg.samples,
        residual_curve,
        worst_threshold_ratio,
        witnesses,
    })
}

/// One witness per peripheral eigenvector column with eigenvalue other than one.
fn peripheral_witnesses(ch: &Channel, lift: &AsymptoticLift, k_max: usize, tol: f64) -> Result<Vec<Witness>> {
    let d = ch.dim();
    let pd = &lift.peripheral;
    let p = ch.predual();
    let one = c(1.0, 0.0);
    let mut out = Vec::new();
    for (j, &lambda) in pd.column_values.iter().enumerate() {
        if (lambda - one).norm() <= tol {
            continue;
        }
        let x = normalized_operator(&unvec(&pd.right.column(j).into_owned(), d));
        let svd = x.clone().svd(true, true);
        let (u, v_t) = (svd.u.expect("requested"), svd.v_t.expect("requested"));
        // F = v_1 u_1*, so tr(F x) = u_1* x v_1 = sigma_1 = 1 and ||F||_1 = 1.
        let functional = v_t.row(0).adjoint() * u.column(0).adjoint();
        let mut g = functional.clone();
        for _ in 0..k_max {
            g = p.apply_unchecked(&g);
        }
        let achieved = nuclear_norm(&(p.apply_unchecked(&g) - &g));
        let fixed_point_residual = spectral_norm(&(ch.apply(&x)? - &x));
        out.push(Witness {
            eigenvalue: [lambda.re, lambda.im],
            operator: x,
            functional,
            lower_bound: (lambda - one).norm(),
            achieved,
            fixed_point_residual,
        });
    }
    Ok(out)
}

/// Scales to operator norm one and rotates the largest entry onto the
/// positive real axis.
fn normalized_operator(x: &CMat) -> CMat {
    let pivot = x.iter().copied().fold(C64::new(0.0, 0.0), |best, z| if z.norm() > best.norm() + 1e-12 { z } else { best });
    let phase = if pivot.norm() > 0.0 { pivot.conj() / pivot.norm() } else { c(1.0, 0.0) };
    let y = x * phase;
    let n = spectral_norm(&y);
    y / c(n, 0.0)
}

#[derive(Debug, Clone, Serialize)]
pub struct MonotonicityLevel {
    pub level: usize,
    pub checks: usize,
    /// Steps with `||rho o L^{k+1}|| > ||rho o L^k|| + 1e-10`.
    pub violations: usize,
    pub max_increase: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MonotonicityReport {
    pub k_max: usize,
    pub samples: usize,
    pub levels: Vec<MonotonicityLevel>,
    pub pass: bool,
}

/// Audits that `k -> ||rho o L^k||` never increases, at each level.
pub fn monotonicity_audit(
    ch: &Channel,
    levels: &[usize],
    k_max: usize,
    cfg: &Config,
    rng: &mut SampleRng,
) -> Result<MonotonicityReport> {
    let mut out = Vec::new();
    for &n in levels {
        let amplified = ch.amplify(n, cfg)?;
        let p = amplified.predual();
        let (mut checks, mut violations, mut max_increase) = (0, 0, f64::NEG_INFINITY);
        for f in functional_batch(rng, amplified.dim(), cfg.samples) {
            let mut g = f.into_pairing_matrix();
            let mut prev = nuclear_norm(&g);
            for _ in 0..k_max {
                g = p.apply_unchecked(&g);
                let t = nuclear_norm(&g);
                checks += 1;
                max_increase = max_increase.max(t - prev);
                if t > prev + 1e-10 {
                    violations += 1;
                }
                prev = t;
            }
        }
        out.push(MonotonicityLevel { level: n, checks, violations, max_increase });
    }
    let pass = out.iter().all(|l| l.violations == 0);
    Ok(MonotonicityReport { k_max, samples: cfg.samples, levels: out, pass })
}

#[derive(Debug, Clone, Serialize)]
pub struct FixedPointWitness {
    pub eigenvalue: [f64; 2],
    #[serde(with = "serde_matrix")]
    pub operator: CMat,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FixedPointReport {
    pub samples: usize,
    /// Largest `||L(x) - x||` over sampled unit-ball elements of `N`.
    pub max_residual: f64,
    /// Every element of `E(N)` is fixed by `L`.
    pub all_fixed: bool,
    /// Peripheral eigenvector farthest from being fixed, when one exists.
    pub witness: Option<FixedPointWitness>,
}

/// Measures how far `E(ball N)` is from the fixed points of `L`.
pub fn fixed_point_audit(ch: &Channel, lift: &AsymptoticLift, cfg: &Config, rng: &mut SampleRng) -> Result<FixedPointReport> {
    let mut max_residual: f64 = 0.0;
    for _ in 0..FIXED_POINT_SAMPLES {
        let x = lift.e(&lift.algebra.random_unit_element(rng));
        max_residual = max_residual.max(spectral_norm(&(ch.apply(&x)? - &x)));
    }
    let d = ch.dim();
    let pd = &lift.peripheral;
    let one = c(1.0, 0.0);
    let witness = pd
        .column_values
        .iter()
        .enumerate()
        .filter(|(_, v)| (**v - one).norm() > cfg.tol_cluster)
        .max_by(|a, b| (a.1 - one).norm().total_cmp(&(b.1 - one).norm()))
        .map(|(j, &lambda)| -> Result<FixedPointWitness> {
            let x = normalized_operator(&unvec(&pd.right.column(j).into_owned(), d));
            let residual = spectral_norm(&(ch.apply(&x)? - &x));
            Ok(FixedPointWitness { eigenvalue: [lambda.re, lambda.im], operator: x, residual })
        })
        .transpose()?;
    Ok(FixedPointReport {
        samples: FIXED_POINT_SAMPLES,
        max_residual,
        all_fixed: max_residual <= cfg.tol_alg,
        witness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{ad_z, cycle, depolarizing};
    use crate::lift::build_lift;
    use crate::operator::real_diag;
    use crate::sampling::{random_ucp_channel, rng_from_seed};

    fn cfg() -> Config {
        Config { samples: 12, ..Config::default() }
    }

    fn run(ch: &Channel) -> (ClassificationReport, FixedPointReport) {
        let cfg = cfg();
        let lift = build_lift(ch, &cfg).unwrap();
        let mut rng = rng_from_seed(3);
        (classify(ch, &lift, &cfg, &mut rng).unwrap(), fixed_point_audit(ch, &lift, &cfg, &mut rng).unwrap())
    }

    #[test]
    fn generic_channels_are_slowly_oscillating() {
        let cfg = cfg();
        for ch in [depolarizing(3, 0.5, &cfg), random_ucp_channel(&mut rng_from_seed(8), 2, 3, &cfg)] {
            let (report, fixed) = run(&ch);
            assert_eq!(report.verdict, Verdict::SlowlyOscillating);
            assert!(report.witnesses.is_empty());
            assert!(fixed.all_fixed && fixed.witness.is_none());
        }
    }

    #[test]
    fn ad_z_is_not_slowly_oscillating() {
        let (report, fixed) = run(&ad_z(&cfg()));
        assert_eq!(report.verdict, Verdict::NotSlowlyOscillating);
        assert!(!report.witnesses.is_empty());
        for w in &report.witnesses {
            assert!((w.lower_bound - 2.0).abs() < 1e-12);
            assert!(w.achieved >= w.lower_bound - 1e-6);
        }
        let witness = fixed.witness.unwrap();
        assert!((witness.residual - 2.0).abs() < 1e-10);
        // The -1 eigenspace is spanned by E_12 and E_21.
        let x = &witness.operator;
        assert!(x[(0, 0)].norm() < 1e-12 && x[(1, 1)].norm() < 1e-12);
    }

    #[test]
    fn pinched_two_cycle_witness_is_diagonal_sign() {
        let (report, fixed) = run(&Channel::from_stochastic(&cycle(2)));
        assert_eq!(report.verdict, Verdict::NotSlowlyOscillating);
        let witness = fixed.witness.unwrap();
        let expected = real_diag(&[1.0, -1.0]);
        let flipped = real_diag(&[-1.0, 1.0]);
        let x = &witness.operator;
        assert!((x - &expected).norm() < 1e-10 || (x - &flipped).norm() < 1e-10);
        assert!((witness.residual - 2.0).abs() < 1e-10);
    }

    #[test]
    fn monotonicity_holds_at_two_levels() {
        let cfg = cfg();
        let ch = random_ucp_channel(&mut rng_from_seed(4), 3, 2, &cfg);
        let report = monotonicity_audit(&ch, &[1, 2], 50, &cfg, &mut rng_from_seed(1)).unwrap();
        assert!(report.pass);
        assert_eq!(report.levels[1].checks, 50 * cfg.samples);
    }
}
