//! Substate decompositions: `τ` written as a mixture whose flagged branch is
//! a slight perturbation `σ'` of `σ`, together with purifications of both
//! branches.

use crate::classical::{self, SUPPORT_TOL};
use crate::error::{Error, Result};
use crate::linalg::{self, diag, psd_eigen, re, CMatrix, CVector};
use crate::measures::observational_divergence;
use crate::state::{partial_trace, purify, purify_with_ancilla, BipartitePureState, DensityMatrix, Party, PureState};
use crate::transition::closest_purification;

/// Slack on `τ − p σ' ⪰ 0`.
pub const DOMINATION_TOL: f64 = 1e-9;
/// Slack on the reduced state of the assembled purification.
pub const MARGINAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SubstateMode {
    /// Keep `σ' = σ` and use the largest admissible weight.
    Exact,
    /// Cut off the components of `σ` that `τ` covers too thinly and use the
    /// guaranteed weight.
    Truncated,
}

impl std::fmt::Display for SubstateMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SubstateMode::Exact => "exact",
            SubstateMode::Truncated => "truncated",
        })
    }
}

/// `τ = p σ' + (1 − p) θ_mix`, purified as `√p |φ⟩|1⟩ + √(1−p) |θ⟩|0⟩`
/// with the flag qubit as the last factor on Alice's side.
#[derive(Debug, Clone)]
pub struct SubstateDecomposition {
    pub p: f64,
    /// Largest weight `σ'` could carry inside `τ`.
    pub coefficient: f64,
    pub sigma_prime: DensityMatrix,
    pub phi: BipartitePureState,
    pub theta: BipartitePureState,
    pub tau_bar: BipartitePureState,
    /// Observational divergence `D(σ‖τ)`.
    pub divergence: f64,
    pub k: f64,
    pub r: f64,
    pub mode: SubstateMode,
    /// Trace distance between `|φ⟩` and the reference purification of `σ`.
    pub phi_distance: f64,
}

/// `d + 6√(d+1) + 4`.
pub fn k_budget(d: f64) -> Result<f64> {
    if !(d >= 0.0) {
        return Err(Error::Domain(format!("divergence must be non-negative, got {d}")));
    }
    Ok(d + 6.0 * (d + 1.0).sqrt() + 4.0)
}

/// `(1 − 1/r) 2^{−r k}`.
pub fn weight_floor(r: f64, k: f64) -> f64 {
    (1.0 - 1.0 / r) * (-r * k).exp2()
}

/// Largest `p` with `p σ ⪯ τ`, or 0 when the support of `sigma` leaves
/// that of `tau`.
pub fn exact_substate_coefficient(sigma: &DensityMatrix, tau: &DensityMatrix) -> Result<f64> {
    same_dim(sigma, tau)?;
    if sigma.is_diagonal() && tau.is_diagonal() {
        return Ok(classical_coefficient(&sigma.diagonal_values(), &tau.diagonal_values()));
    }
    let ratio = RatioOperator::new(sigma, tau);
    if ratio.leakage > SUPPORT_TOL {
        return Ok(0.0);
    }
    let top = ratio.eigen.max_value();
    Ok(if top > 0.0 { (1.0 / top).min(1.0) } else { 1.0 })
}

fn classical_coefficient(sigma: &[f64], tau: &[f64]) -> f64 {
    if classical::leakage(sigma, tau) > SUPPORT_TOL {
        return 0.0;
    }
    sigma
        .iter()
        .zip(tau)
        .filter(|(&s, &t)| s > 0.0 && t > SUPPORT_TOL)
        .map(|(&s, &t)| t / s)
        .fold(1.0, f64::min)
}

fn same_dim(a: &DensityMatrix, b: &DensityMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::Shape(format!("dimensions {} and {} differ", a.dim(), b.dim())));
    }
    Ok(())
}

/// `τ^{-1/2} σ τ^{-1/2}` on the support of `τ`, in the eigenbasis `V` of
/// `τ`.
struct RatioOperator {
    basis: CMatrix,
    sqrt_tau: Vec<f64>,
    eigen: linalg::Eigen,
    leakage: f64,
}

impl RatioOperator {
    fn new(sigma: &DensityMatrix, tau: &DensityMatrix) -> Self {
        let e = psd_eigen(tau.matrix());
        let basis = e.basis(|v| v > SUPPORT_TOL);
        let sqrt_tau: Vec<f64> = e.values.iter().filter(|&&v| v > SUPPORT_TOL).map(|v| v.sqrt()).collect();
        let restricted = basis.adjoint() * sigma.matrix() * &basis;
        let leakage = (1.0 - linalg::trace(&restricted).re).max(0.0);
        let w = diag(&sqrt_tau.iter().map(|s| 1.0 / s).collect::<Vec<_>>());
        let eigen = linalg::hermitian_eigen(&(&w * restricted * &w));
        RatioOperator {
            basis,
            sqrt_tau,
            eigen,
            leakage,
        }
    }

    /// `τ^{1/2} A_keep τ^{1/2}` where `A_keep` retains the eigenvalues of the
    /// ratio operator at most `cap`.
    fn truncated(&self, cap: f64) -> CMatrix {
        let kept = self.eigen.map(|v| if v <= cap { v.max(0.0) } else { 0.0 });
        let t = diag(&self.sqrt_tau);
        &self.basis * (&t * kept * &t) * self.basis.adjoint()
    }
}

fn divergence_of(sigma: &DensityMatrix, tau: &DensityMatrix) -> Result<f64> {
    let d = observational_divergence(sigma, tau)?.value;
    if d.is_infinite() {
        return Err(Error::Unsupported(
            "support of sigma is not contained in the support of tau".into(),
        ));
    }
    Ok(d.max(0.0))
}

/// Substate decomposition of two commuting distributions, with the
/// canonical purification of `σ` as the reference.
pub fn classical_substate(sigma: &[f64], tau: &[f64], r: f64) -> Result<SubstateDecomposition> {
    check_r(r)?;
    if sigma.len() != tau.len() {
        return Err(Error::Shape(format!("lengths {} and {} differ", sigma.len(), tau.len())));
    }
    let d = classical::observational_divergence(sigma, tau).value;
    if d.is_infinite() {
        return Err(Error::Unsupported(
            "support of sigma is not contained in the support of tau".into(),
        ));
    }
    let d = d.max(0.0);
    let k = k_budget(d)?;
    let cap = (r * k).exp2();
    let kept: Vec<f64> = sigma
        .iter()
        .zip(tau)
        .map(|(&s, &t)| if s > cap * t { 0.0 } else { s })
        .collect();
    let mass: f64 = kept.iter().sum();
    let sigma_prime: Vec<f64> = kept.iter().map(|s| s / mass).collect();
    let coefficient = classical_coefficient(&sigma_prime, tau);
    let p = coefficient.min(1.0);

    let floor = weight_floor(r, k);
    let l1: f64 = sigma_prime.iter().zip(sigma).map(|(a, b)| (a - b).abs()).sum();
    if p < floor {
        return Err(Error::Construction(format!(
            "weight {p:e} is below the floor {floor:e} (D = {d}, k = {k}, r = {r})"
        )));
    }
    if l1 > 2.0 / r.sqrt() {
        return Err(Error::Construction(format!(
            "perturbation {l1} exceeds 2/sqrt(r) = {} (D = {d}, k = {k}, r = {r})",
            2.0 / r.sqrt()
        )));
    }
    let sigma_m = DensityMatrix::diagonal(sigma)?;
    let reference = purify(&sigma_m);
    assemble(
        Parts {
            tau: DensityMatrix::diagonal(tau)?,
            sigma_prime: DensityMatrix::diagonal(&sigma_prime)?,
            p,
            coefficient,
            divergence: d,
            k,
            r,
            mode: SubstateMode::Truncated,
        },
        &reference,
    )
}

fn check_r(r: f64) -> Result<()> {
    if !(r > 1.0) || !r.is_finite() {
        return Err(Error::Domain(format!("r must exceed 1, got {r}")));
    }
    Ok(())
}

/// Decomposes `tau` around `sigma`, purified so that `|φ⟩` is as close as
/// possible to `sigma_purification` (whose Bob factor carries `sigma`).
pub fn build_decomposition(
    sigma: &DensityMatrix,
    tau: &DensityMatrix,
    sigma_purification: &BipartitePureState,
    r: f64,
    mode: SubstateMode,
) -> Result<SubstateDecomposition> {
    check_r(r)?;
    same_dim(sigma, tau)?;
    if sigma_purification.dim_b() != sigma.dim() {
        return Err(Error::Shape(format!(
            "reference purification holds a {}-dimensional state, expected {}",
            sigma_purification.dim_b(),
            sigma.dim()
        )));
    }
    let d = divergence_of(sigma, tau)?;
    let k = k_budget(d)?;
    let parts = match mode {
        SubstateMode::Exact => {
            let coefficient = exact_substate_coefficient(sigma, tau)?;
            if coefficient <= 0.0 {
                return Err(Error::Unsupported("sigma is not dominated by any multiple of tau".into()));
            }
            Parts {
                tau: tau.clone(),
                sigma_prime: sigma.clone(),
                p: coefficient,
                coefficient,
                divergence: d,
                k,
                r,
                mode,
            }
        }
        SubstateMode::Truncated => {
            let sigma_prime = if sigma.is_diagonal() && tau.is_diagonal() {
                let cap = (r * k).exp2();
                let kept: Vec<f64> = sigma
                    .diagonal_values()
                    .iter()
                    .zip(tau.diagonal_values())
                    .map(|(&s, t)| if s > cap * t { 0.0 } else { s })
                    .collect();
                DensityMatrix::normalized(diag(&kept))?
            } else {
                let ratio = RatioOperator::new(sigma, tau);
                DensityMatrix::normalized(ratio.truncated((r * k).exp2()))?
            };
            let coefficient = exact_substate_coefficient(&sigma_prime, tau)?;
            let floor = weight_floor(r, k);
            if coefficient < floor {
                return Err(Error::Construction(format!(
                    "substate weight {coefficient:e} misses the floor {floor:e} (D = {d}, k = {k}, r = {r})"
                )));
            }
            Parts {
                tau: tau.clone(),
                sigma_prime,
                p: floor,
                coefficient,
                divergence: d,
                k,
                r,
                mode,
            }
        }
    };
    let dec = assemble(parts, sigma_purification)?;
    if dec.mode == SubstateMode::Truncated && dec.phi_distance > 2.0 / r.sqrt() + 1e-6 {
        return Err(Error::Construction(format!(
            "flagged purification is {} from the reference, above 2/sqrt(r) = {}",
            dec.phi_distance,
            2.0 / r.sqrt()
        )));
    }
    Ok(dec)
}

struct Parts {
    tau: DensityMatrix,
    sigma_prime: DensityMatrix,
    p: f64,
    coefficient: f64,
    divergence: f64,
    k: f64,
    r: f64,
    mode: SubstateMode,
}

/// Weights this close to 1 leave no room for a residue.
const FULL_WEIGHT: f64 = 1.0 - 1e-12;

fn assemble(parts: Parts, reference: &BipartitePureState) -> Result<SubstateDecomposition> {
    let Parts {
        tau,
        sigma_prime,
        p,
        coefficient,
        divergence,
        k,
        r,
        mode,
    } = parts;
    let phi = closest_purification(&sigma_prime, reference)?;
    let phi_distance = phi.state().ray_trace_distance(reference.state());
    let (p, theta) = if p >= FULL_WEIGHT {
        (1.0, phi.clone())
    } else {
        let residue = residue(&tau, &sigma_prime, p)?;
        (p, purify_with_ancilla(&residue, reference.dim_a())?)
    };
    let tau_bar = flagged_mixture(&phi, &theta, p)?;
    let dec = SubstateDecomposition {
        p,
        coefficient,
        sigma_prime,
        phi,
        theta,
        tau_bar,
        divergence,
        k,
        r,
        mode,
        phi_distance,
    };
    let reduced = partial_trace(&dec.tau_bar, Party::Bob);
    let err = reduced.max_entry_distance(&tau);
    if err > MARGINAL_TOL {
        return Err(Error::Construction(format!(
            "assembled purification reproduces tau only to {err:e}"
        )));
    }
    let gap = domination_gap(&tau, &dec.sigma_prime, p);
    if gap < -DOMINATION_TOL {
        return Err(Error::Construction(format!("tau - p sigma' has eigenvalue {gap:e}")));
    }
    Ok(dec)
}

/// `(τ − p σ')/(1 − p)` with round-off negativity removed.
fn residue(tau: &DensityMatrix, sigma_prime: &DensityMatrix, p: f64) -> Result<DensityMatrix> {
    let m = tau.matrix() - sigma_prime.matrix() * re(p);
    let e = psd_eigen(&m);
    if e.values[0] < -DOMINATION_TOL {
        return Err(Error::Construction(format!(
            "tau - p sigma' is not positive (eigenvalue {:e})",
            e.values[0]
        )));
    }
    DensityMatrix::normalized(e.map(|v| v.max(0.0)))
}

/// Smallest eigenvalue of `τ − p σ'`.
pub fn domination_gap(tau: &DensityMatrix, sigma_prime: &DensityMatrix, p: f64) -> f64 {
    linalg::hermitian_eigen(&(tau.matrix() - sigma_prime.matrix() * re(p))).values[0]
}

/// `√p |φ⟩|1⟩ + √(1−p) |θ⟩|0⟩`, flag appended as the last Alice factor.
fn flagged_mixture(phi: &BipartitePureState, theta: &BipartitePureState, p: f64) -> Result<BipartitePureState> {
    let (da, db) = (phi.dim_a(), phi.dim_b());
    let mut out = CVector::zeros(2 * da * db);
    let (wp, wt) = (re(p.sqrt()), re((1.0 - p).max(0.0).sqrt()));
    for a in 0..da {
        for b in 0..db {
            out[(2 * a + 1) * db + b] = phi.amplitudes()[a * db + b] * wp;
            out[(2 * a) * db + b] = theta.amplitudes()[a * db + b] * wt;
        }
    }
    BipartitePureState::new(PureState::normalized(out)?, 2 * da, db)
}

/// Probability that the flag (last Alice qubit) reads 1.
pub fn flag_probability(s: &BipartitePureState) -> f64 {
    let db = s.dim_b();
    s.amplitudes()
        .iter()
        .enumerate()
        .filter(|(i, _)| (i / db) % 2 == 1)
        .map(|(_, a)| a.norm_sqr())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use crate::random;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dm(p: &[f64]) -> DensityMatrix {
        DensityMatrix::diagonal(p).unwrap()
    }

    /// Largest `p` on a bisection grid with `τ − pσ` still PSD.
    fn bisection_coefficient(sigma: &DensityMatrix, tau: &DensityMatrix) -> f64 {
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if domination_gap(tau, sigma, mid) >= -1e-13 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    #[test]
    fn k_budget_values() {
        assert_eq!(k_budget(0.0).unwrap(), 10.0);
        assert_eq!(k_budget(3.0).unwrap(), 19.0);
        assert_eq!(k_budget(8.0).unwrap(), 30.0);
        assert!(k_budget(-0.5).is_err());
    }

    #[test]
    fn exact_coefficient_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let t = random::full_rank_density(&mut rng, 3);
        assert!((exact_substate_coefficient(&t, &t).unwrap() - 1.0).abs() < 1e-10);
        let zero = dm(&[1.0, 0.0]);
        let half = DensityMatrix::maximally_mixed(2);
        assert!((exact_substate_coefficient(&zero, &half).unwrap() - 0.5).abs() < 1e-12);
        assert!((bisection_coefficient(&zero, &half) - 0.5).abs() < 1e-9);
        assert_eq!(exact_substate_coefficient(&dm(&[0.0, 1.0]), &zero).unwrap(), 0.0);
        // dense route against bisection
        let s = random::full_rank_density(&mut rng, 3);
        let got = exact_substate_coefficient(&s, &t).unwrap();
        assert!((got - bisection_coefficient(&s, &t)).abs() < 1e-9);
    }

    #[test]
    fn classical_substate_cases() {
        let same = classical_substate(&[0.3, 0.7], &[0.3, 0.7], 2.0).unwrap();
        assert!((same.p - 1.0).abs() < 1e-12);
        assert!(same.sigma_prime.max_entry_distance(&dm(&[0.3, 0.7])) < 1e-15);

        let dec = classical_substate(&[1.0, 0.0], &[0.5, 0.5], 2.0).unwrap();
        let k = 1.0 + 6.0 * 2f64.sqrt() + 4.0;
        assert!((dec.divergence - 1.0).abs() < 1e-12 && (dec.k - k).abs() < 1e-12);
        assert!((dec.p - 0.5).abs() < 1e-12);
        assert!(dec.p >= 0.5 * (-2.0 * k).exp2());
        assert!((flag_probability(&dec.tau_bar) - 0.5).abs() < 1e-12);
        assert!(partial_trace(&dec.theta, Party::Bob).max_entry_distance(&dm(&[0.0, 1.0])) < 1e-12);
    }

    #[test]
    fn classical_guarantees_on_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..30 {
            let sigma = random::distribution(&mut rng, 8);
            let tau = random::distribution(&mut rng, 8);
            for r in [1.5, 2.0, 4.0] {
                let dec = classical_substate(&sigma, &tau, r).unwrap();
                assert!(dec.p >= weight_floor(r, dec.k));
                let l1: f64 = dec
                    .sigma_prime
                    .diagonal_values()
                    .iter()
                    .zip(&sigma)
                    .map(|(a, b)| (a - b).abs())
                    .sum();
                assert!(l1 <= 2.0 / r.sqrt());
                assert!((flag_probability(&dec.tau_bar) - dec.p).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn equal_states_keep_the_reference() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let t = random::full_rank_density(&mut rng, 3);
        let reference = purify(&t);
        for mode in [SubstateMode::Exact, SubstateMode::Truncated] {
            let dec = build_decomposition(&t, &t, &reference, 2.0, mode).unwrap();
            if mode == SubstateMode::Exact {
                assert!((dec.p - 1.0).abs() < 1e-9);
                let expected = reference.with_alice_register(2, 1);
                assert!(dec.tau_bar.state().phase_distance(expected.state()) < 1e-8);
            }
            assert!(dec.phi.state().phase_distance(reference.state()) < 1e-8);
        }
    }

    #[test]
    fn exact_mode_closed_form_residue() {
        let zero = dm(&[1.0, 0.0]);
        let dec = build_decomposition(&zero, &DensityMatrix::maximally_mixed(2), &purify(&zero), 2.0, SubstateMode::Exact)
            .unwrap();
        assert!((dec.p - 0.5).abs() < 1e-12);
        let theta_mix = partial_trace(&dec.theta, Party::Bob);
        assert!(theta_mix.max_entry_distance(&dm(&[0.0, 1.0])) < 1e-12);
    }

    #[test]
    fn operator_truncation_matches_classical_on_commuting_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for trial in 0..10 {
            let dim = 2 + trial % 5;
            let sigma = random::distribution(&mut rng, dim);
            let mut tau = random::distribution(&mut rng, dim);
            // make one entry thin so truncation actually bites
            tau[0] *= 1e-6;
            let s: f64 = tau.iter().sum();
            tau.iter_mut().for_each(|t| *t /= s);
            let r = [1.5, 2.0, 4.0][trial % 3];
            let classical = classical_substate(&sigma, &tau, r).unwrap();
            let u = random::unitary(&mut rng, dim);
            let (sm, tm) = (random::rotated_diagonal(&u, &sigma), random::rotated_diagonal(&u, &tau));
            let dense = build_decomposition(&sm, &tm, &purify(&sm), r, SubstateMode::Truncated).unwrap();
            let rotated_back = DensityMatrix::new(u.adjoint() * dense.sigma_prime.matrix() * &u).unwrap();
            assert!(rotated_back.max_entry_distance(&classical.sigma_prime) < 1e-8);
            assert!((dense.coefficient - classical.coefficient).abs() < 1e-8 * classical.coefficient.max(1e-300) + 1e-8);
        }
    }

    #[test]
    fn truncated_invariants_on_random_dense_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let dim = rng.random_range(2..=5);
            let rank = rng.random_range(1..=dim);
            let sigma = random::density_matrix(&mut rng, dim, rank);
            let tau = random::full_rank_density(&mut rng, dim);
            let reference = purify(&sigma);
            for r in [1.5, 2.0, 4.0] {
                let dec = build_decomposition(&sigma, &tau, &reference, r, SubstateMode::Truncated).unwrap();
                assert!(dec.p > 0.0 && dec.p <= 1.0);
                assert!(domination_gap(&tau, &dec.sigma_prime, dec.p) >= -1e-9);
                assert!(partial_trace(&dec.tau_bar, Party::Bob).max_entry_distance(&tau) < 1e-8);
                assert!((flag_probability(&dec.tau_bar) - dec.p).abs() < 1e-10);
                assert!(dec.phi_distance <= 2.0 / r.sqrt() + 1e-6);
            }
        }
    }

    #[test]
    fn unsupported_and_domain_errors() {
        let zero = dm(&[1.0, 0.0]);
        let one = dm(&[0.0, 1.0]);
        assert!(matches!(
            build_decomposition(&zero, &one, &purify(&zero), 2.0, SubstateMode::Truncated),
            Err(Error::Unsupported(_))
        ));
        assert!(matches!(classical_substate(&[1.0, 0.0], &[0.0, 1.0], 2.0), Err(Error::Unsupported(_))));
        assert!(matches!(classical_substate(&[1.0], &[1.0], 1.0), Err(Error::Domain(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn truncated_decomposition_invariants(seed in any::<u64>(), dim in 2usize..=5, r in 1.2f64..6.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rank = rng.random_range(1..=dim);
            let sigma = random::density_matrix(&mut rng, dim, rank);
            let tau = random::full_rank_density(&mut rng, dim);
            let dec = build_decomposition(&sigma, &tau, &purify(&sigma), r, SubstateMode::Truncated).unwrap();
            prop_assert!(domination_gap(&tau, &dec.sigma_prime, dec.p) >= -1e-9);
            prop_assert!(partial_trace(&dec.tau_bar, Party::Bob).max_entry_distance(&tau) < 1e-8);
            prop_assert!((flag_probability(&dec.tau_bar) - dec.p).abs() < 1e-10);
            prop_assert!(dec.phi_distance <= 2.0 / r.sqrt() + 1e-6);
        }
    }
}
