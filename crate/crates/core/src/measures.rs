//! Entropic and observational information measures of states and ensembles.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::classical::{self, SUPPORT_TOL};
use crate::ensemble::Ensemble;
use crate::error::{Error, Result};
use crate::linalg::{self, diag, psd_eigen, re, trace_product, CMatrix};
use crate::random;
use crate::state::DensityMatrix;

/// Default iteration cap of the radius solver.
pub const RADIUS_MAX_ITERS: usize = 10_000;
/// Agreement demanded between the two Holevo-χ evaluations.
pub const CHI_CROSS_CHECK: f64 = 1e-8;

/// Which information measure quantifies what Bob learns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Measure {
    Divergence,
    Chi,
    Xi,
}

impl std::fmt::Display for Measure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Measure::Divergence => "divergence",
            Measure::Chi => "chi",
            Measure::Xi => "xi",
        })
    }
}

fn same_dim(a: &DensityMatrix, b: &DensityMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::Shape(format!("dimensions {} and {} differ", a.dim(), b.dim())));
    }
    Ok(())
}

fn both_diagonal(a: &DensityMatrix, b: &DensityMatrix) -> Option<(Vec<f64>, Vec<f64>)> {
    (a.is_diagonal() && b.is_diagonal()).then(|| (a.diagonal_values(), b.diagonal_values()))
}

pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    if rho.is_diagonal() {
        return classical::entropy(&rho.diagonal_values());
    }
    classical::entropy(&rho.eigen().values)
}

/// Support of `sigma`: eigenvectors above the support threshold, their
/// eigenvalues, and how much weight `rho` puts outside.
struct Support {
    basis: CMatrix,
    values: Vec<f64>,
    leakage: f64,
}

fn support_of(sigma: &CMatrix, rho: &CMatrix) -> Support {
    let e = psd_eigen(sigma);
    let basis = e.basis(|v| v > SUPPORT_TOL);
    let values: Vec<f64> = e.values.iter().copied().filter(|&v| v > SUPPORT_TOL).collect();
    let inside = trace_product(&(basis.adjoint() * rho), &basis).re;
    let leakage = (linalg::trace(rho).re - inside).max(0.0);
    Support { basis, values, leakage }
}

/// `S(ρ‖σ)` in bits; `+∞` when the support of `rho` is not inside that of
/// `sigma`.
pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    same_dim(rho, sigma)?;
    if let Some((p, q)) = both_diagonal(rho, sigma) {
        return Ok(classical::relative_entropy(&p, &q));
    }
    let sup = support_of(sigma.matrix(), rho.matrix());
    if sup.leakage > SUPPORT_TOL {
        return Ok(f64::INFINITY);
    }
    Ok(relative_entropy_within(rho, &sup))
}

fn relative_entropy_within(rho: &DensityMatrix, sup: &Support) -> f64 {
    let restricted = sup.basis.adjoint() * rho.matrix() * &sup.basis;
    let cross: f64 = sup
        .values
        .iter()
        .enumerate()
        .map(|(i, &s)| restricted[(i, i)].re * s.log2())
        .sum();
    -von_neumann_entropy(rho) - cross
}

/// Value of the observational divergence and a POVM element attaining it.
#[derive(Debug, Clone)]
pub struct Divergence {
    pub value: f64,
    pub witness: CMatrix,
}

/// `D(ρ‖σ) = max_{0 ⪯ M ⪯ I} Tr Mρ · log2(Tr Mρ / Tr Mσ)`.
///
/// Commuting diagonal inputs take the likelihood-ratio scan; everything
/// else goes through [`observational_divergence_pencil`].
pub fn observational_divergence(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<Divergence> {
    same_dim(rho, sigma)?;
    if let Some((p, q)) = both_diagonal(rho, sigma) {
        let d = classical::observational_divergence(&p, &q);
        let mask: Vec<f64> = d.event.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
        return Ok(Divergence {
            value: d.value,
            witness: diag(&mask),
        });
    }
    observational_divergence_pencil(rho, sigma)
}

/// Neyman–Pearson scan over the generalized eigenvalues of `(ρ, σ)`.
pub fn observational_divergence_pencil(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<Divergence> {
    same_dim(rho, sigma)?;
    Ok(pencil(rho.matrix(), sigma.matrix(), true))
}

/// Observational divergence when `sigma` is known to dominate `rho`, such as
/// a member against its ensemble average; the support test is skipped.
pub fn observational_divergence_dominated(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    same_dim(rho, sigma)?;
    if let Some((p, q)) = both_diagonal(rho, sigma) {
        return Ok(classical::observational_divergence_on_support(&p, &q).value);
    }
    Ok(pencil(rho.matrix(), sigma.matrix(), false).value)
}

fn pencil(rho: &CMatrix, sigma: &CMatrix, check_support: bool) -> Divergence {
    let d = rho.nrows();
    let sup = support_of(sigma, rho);
    if check_support && sup.leakage > SUPPORT_TOL {
        let witness = linalg::identity(d) - &sup.basis * sup.basis.adjoint();
        return Divergence {
            value: f64::INFINITY,
            witness,
        };
    }
    let v = &sup.basis;
    let rho_s = v.adjoint() * rho * v;
    let sigma_s = diag(&sup.values);
    let inv_sqrt: Vec<f64> = sup.values.iter().map(|s| 1.0 / s.sqrt()).collect();
    let w = diag(&inv_sqrt);
    let ratios = linalg::hermitian_eigen(&(&w * &rho_s * &w)).values;

    // Distinct ratio levels; the positive eigenspace of ρ - tσ only changes
    // when t crosses one of them, so one threshold per gap suffices.
    let mut levels: Vec<f64> = Vec::new();
    for &t in &ratios {
        match levels.last() {
            Some(&last) if (t - last).abs() <= 1e-12 * t.abs().max(1.0) => {}
            _ => levels.push(t),
        }
    }
    let mut thresholds = vec![levels[0] - 1.0];
    thresholds.extend(levels.windows(2).map(|p| 0.5 * (p[0] + p[1])));

    let mut best = Divergence {
        value: 0.0,
        witness: CMatrix::zeros(d, d),
    };
    for t in thresholds {
        let proj = if t < 0.0 {
            linalg::identity(rho_s.nrows())
        } else {
            linalg::hermitian_eigen(&(&rho_s - &sigma_s * re(t))).projector(|x| x > 0.0)
        };
        let a = trace_product(&proj, &rho_s).re;
        let b = trace_product(&proj, &sigma_s).re;
        if a > 0.0 && b > 0.0 {
            let f = a * (a / b).log2();
            if f > best.value {
                best = Divergence {
                    value: f,
                    witness: v * proj * v.adjoint(),
                };
            }
        }
    }
    best
}

/// `χ(E) = ∑ p_x S(ρ_x‖ρ)`, cross-checked against `S(ρ) − ∑ p_x S(ρ_x)`.
pub fn holevo_chi(e: &Ensemble) -> Result<f64> {
    let w = e.weights();
    if let Some(rows) = e.diagonal_rows() {
        let chi = classical::holevo_chi(&w, &rows);
        let alt = classical::entropy(&classical::average(&w, &rows))
            - w.iter().zip(&rows).map(|(p, r)| p * classical::entropy(r)).sum::<f64>();
        return cross_check(chi, alt);
    }
    let states = e.dense_states()?;
    let avg = e.average()?;
    let sup = average_support(&avg);
    let mut chi = 0.0;
    let mut mean_entropy = 0.0;
    for (p, s) in w.iter().zip(&states) {
        if *p > 0.0 {
            chi += p * relative_entropy_within(s, &sup);
            mean_entropy += p * von_neumann_entropy(s);
        }
    }
    cross_check(chi, von_neumann_entropy(&avg) - mean_entropy)
}

fn average_support(avg: &DensityMatrix) -> Support {
    let e = avg.eigen();
    Support {
        basis: e.basis(|v| v > SUPPORT_TOL),
        values: e.values.iter().copied().filter(|&v| v > SUPPORT_TOL).collect(),
        leakage: 0.0,
    }
}

fn cross_check(chi: f64, alt: f64) -> Result<f64> {
    if (chi - alt).abs() > CHI_CROSS_CHECK {
        return Err(Error::CrossCheck(format!(
            "Holevo chi routes disagree: {chi} vs {alt}"
        )));
    }
    Ok(chi)
}

/// `D(E) = ∑ p_x D(ρ_x‖ρ)`.
pub fn divergence_information(e: &Ensemble) -> Result<f64> {
    let w = e.weights();
    if let Some(rows) = e.diagonal_rows() {
        return Ok(classical::divergence_information(&w, &rows));
    }
    let avg = e.average()?;
    let mut total = 0.0;
    for (p, s) in w.iter().zip(e.dense_states()?) {
        if *p > 0.0 {
            total += p * observational_divergence_dominated(&s, &avg)?;
        }
    }
    Ok(total)
}

/// `ξ(E) = n + log2 ∑ p_x² Tr[(ρ^{-1/2} ρ_x)²]` with a pseudo-inverse on the
/// support of the average.
pub fn xi_information(e: &Ensemble) -> Result<f64> {
    let w = e.weights();
    if let Some(rows) = e.diagonal_rows() {
        return Ok(classical::xi_information(e.n_bits(), &w, &rows));
    }
    let avg = e.average()?;
    let eig = avg.eigen();
    let cut = 1e-10 * eig.max_value();
    let inv_sqrt = eig.map(|v| if v > cut { 1.0 / v.sqrt() } else { 0.0 });
    let mut s = 0.0;
    for (p, st) in w.iter().zip(e.dense_states()?) {
        let b = &inv_sqrt * st.matrix();
        s += p * p * trace_product(&b, &b).re;
    }
    Ok(e.n_bits() as f64 + s.log2())
}

/// The three headline measures of one ensemble.
#[derive(Debug, Clone)]
pub struct MeasureReport {
    pub chi: f64,
    pub divergence_info: f64,
    pub xi: f64,
    pub avg_state: DensityMatrix,
}

pub fn measure_report(e: &Ensemble) -> Result<MeasureReport> {
    Ok(MeasureReport {
        chi: holevo_chi(e)?,
        divergence_info: divergence_information(e)?,
        xi: xi_information(e)?,
        avg_state: e.average()?,
    })
}

pub fn measure(e: &Ensemble, which: Measure) -> Result<f64> {
    match which {
        Measure::Divergence => divergence_information(e),
        Measure::Chi => holevo_chi(e),
        Measure::Xi => xi_information(e),
    }
}

/// Output of the divergence-radius solver.
#[derive(Debug, Clone)]
pub struct Radius {
    /// Mixture weights `μ`.
    pub weights: Vec<f64>,
    /// `max_x D(ρ_x‖ρ_μ)`, evaluated at `weights`.
    pub radius: f64,
    /// `D(ρ_x‖ρ_μ)` per member.
    pub divergences: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
}

/// Weights below this count as outside the mixture's support when judging
/// convergence.
const RADIUS_SUPPORT: f64 = 1e-8;

/// Approximate `min_μ max_x D(ρ_x‖ρ_μ)` by multiplicative weights.
pub fn divergence_radius(states: &[DensityMatrix], tol: f64) -> Result<Radius> {
    divergence_radius_with_cap(states, tol, RADIUS_MAX_ITERS)
}

pub fn divergence_radius_with_cap(states: &[DensityMatrix], tol: f64, max_iters: usize) -> Result<Radius> {
    if states.is_empty() {
        return Err(Error::Domain("divergence radius needs at least one state".into()));
    }
    let dim = states[0].dim();
    if let Some(s) = states.iter().find(|s| s.dim() != dim) {
        return Err(Error::Shape(format!("state of dimension {} among dimension {dim}", s.dim())));
    }
    let rows: Option<Vec<Vec<f64>>> = states
        .iter()
        .map(|s| s.is_diagonal().then(|| s.diagonal_values()))
        .collect();
    let eval = |q: &[f64]| -> Result<Vec<f64>> {
        match &rows {
            Some(rows) => {
                let avg = classical::average(q, rows);
                Ok(rows.iter().map(|r| classical::observational_divergence(r, &avg).value).collect())
            }
            None => {
                let mut m = CMatrix::zeros(dim, dim);
                for (w, s) in q.iter().zip(states) {
                    m += s.matrix() * re(*w);
                }
                let mix = DensityMatrix::normalized(m)?;
                states
                    .iter()
                    .map(|s| observational_divergence(s, &mix).map(|d| d.value))
                    .collect()
            }
        }
    };
    minimize_max(states.len(), tol, max_iters, eval)
}

fn minimize_max(
    len: usize,
    tol: f64,
    max_iters: usize,
    eval: impl Fn(&[f64]) -> Result<Vec<f64>>,
) -> Result<Radius> {
    let mut q = vec![1.0 / len as f64; len];
    let mut best: Option<Radius> = None;
    for it in 0..max_iters {
        let ds = eval(&q)?;
        let max = ds.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min_supported = ds
            .iter()
            .zip(&q)
            .filter(|(_, &w)| w > RADIUS_SUPPORT)
            .map(|(&d, _)| d)
            .fold(f64::INFINITY, f64::min);
        let converged = max - min_supported <= tol;
        if best.as_ref().is_none_or(|b| max < b.radius) || converged {
            best = Some(Radius {
                weights: q.clone(),
                radius: max,
                divergences: ds.clone(),
                converged,
                iterations: it + 1,
            });
        }
        if converged {
            break;
        }
        let eta = 1.0 / (1.0 + it as f64 / 200.0).sqrt();
        // a mixture with weight w already satisfies D ≤ log2(1/w)
        let capped: Vec<f64> = ds.iter().zip(&q).map(|(&d, &w)| d.min(-w.log2())).collect();
        let top = capped.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        for (w, &d) in q.iter_mut().zip(&capped) {
            *w *= (eta * (d - top)).exp2();
        }
        let s: f64 = q.iter().sum();
        for w in q.iter_mut() {
            *w /= s;
        }
    }
    let mut r = best.expect("at least one iteration");
    r.iterations = r.iterations.max(1);
    Ok(r)
}

/// Lower and upper bounds on the accessible information.
#[derive(Debug, Clone, Copy)]
pub struct AccessibleInfoBounds {
    pub lower: f64,
    pub upper: f64,
}

/// Accessible information bracketed between the best of a family of
/// projective measurements and Holevo-χ.
///
/// The family holds the computational basis, the eigenbasis of the average
/// state, the eigenbases of each member and of each pairwise Helstrom
/// operator `p_x ρ_x − p_y ρ_y`, and `samples` Haar-random bases drawn from
/// a generator seeded with `seed`.
pub fn accessible_info_bounds(e: &Ensemble, samples: usize, seed: u64) -> Result<AccessibleInfoBounds> {
    let upper = holevo_chi(e)?;
    let w = e.weights();
    if let Some(rows) = e.diagonal_rows() {
        let lower = classical::mutual_information(&w, &rows);
        return Ok(AccessibleInfoBounds { lower, upper });
    }
    let states = e.dense_states()?;
    let dim = e.dim();
    let mut bases: Vec<CMatrix> = vec![linalg::identity(dim), e.average()?.eigen().vectors];
    bases.extend(states.iter().map(|s| s.eigen().vectors));
    if states.len() <= 16 {
        for i in 0..states.len() {
            for j in i + 1..states.len() {
                let h = states[i].matrix() * re(w[i]) - states[j].matrix() * re(w[j]);
                bases.push(linalg::hermitian_eigen(&h).vectors);
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    bases.extend((0..samples).map(|_| random::unitary(&mut rng, dim)));

    let lower = bases
        .iter()
        .map(|u| projective_information(&w, &states, u))
        .fold(0.0, f64::max);
    Ok(AccessibleInfoBounds { lower, upper })
}

/// `I(X:Y)` when measuring the columns of `u`.
pub fn projective_information(weights: &[f64], states: &[DensityMatrix], u: &CMatrix) -> f64 {
    let channel: Vec<Vec<f64>> = states
        .iter()
        .map(|s| {
            let rotated = u.adjoint() * s.matrix() * u;
            linalg::real_diagonal(&rotated).into_iter().map(|p| p.max(0.0)).collect()
        })
        .collect();
    classical::mutual_information(weights, &channel)
}

fn check_nonnegative(name: &str, v: f64) -> Result<()> {
    if !(v >= 0.0) {
        return Err(Error::Domain(format!("{name} must be non-negative, got {v}")));
    }
    Ok(())
}

/// Largest `n` a commitment with binding `a` and concealing `b` can carry:
/// `a + b + 8√(b+1) + 16` for the divergence measure and
/// `a + b + 8√(b+2) + 17` for Holevo-χ.
pub fn tradeoff_required_n_bound(a: f64, b: f64, measure: Measure) -> Result<f64> {
    check_nonnegative("a", a)?;
    check_nonnegative("b", b)?;
    tradeoff_lhs(a, b, measure)
}

/// Same formula without the sign checks, for auditing observed values.
pub fn tradeoff_lhs(a: f64, b: f64, measure: Measure) -> Result<f64> {
    match measure {
        Measure::Divergence => Ok(a + b + 8.0 * (b + 1.0).sqrt() + 16.0),
        Measure::Chi => Ok(a + b + 8.0 * (b + 2.0).sqrt() + 17.0),
        Measure::Xi => Err(Error::Domain("no trade-off bound is stated for the xi measure".into())),
    }
}

/// Per-copy lower bound on `a` forced by `m` parallel copies.
pub fn asymptotic_rate(n: usize, b_per_copy: f64, m: usize) -> Result<f64> {
    if m == 0 {
        return Err(Error::Domain("number of copies must be at least 1".into()));
    }
    let m = m as f64;
    Ok(n as f64 - b_per_copy - (8.0 * (m * b_per_copy + 2.0).sqrt() + 17.0) / m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::BitString;
    use crate::ensemble::EnsembleState;
    use crate::linalg::c;
    use proptest::prelude::*;
    use rand::Rng;

    fn dm(p: &[f64]) -> DensityMatrix {
        DensityMatrix::diagonal(p).unwrap()
    }

    fn plus() -> DensityMatrix {
        DensityMatrix::new(CMatrix::from_element(2, 2, re(0.5))).unwrap()
    }

    fn ens(n_bits: usize, probs: &[f64], states: Vec<DensityMatrix>) -> Ensemble {
        let entries = states
            .into_iter()
            .enumerate()
            .map(|(i, s)| crate::ensemble::EnsembleEntry {
                prob: probs[i],
                label: BitString::new(i, n_bits).unwrap(),
                state: EnsembleState::Dense(s),
            })
            .collect();
        Ensemble::new(n_bits, entries).unwrap()
    }

    /// Best event by exhaustive search over all outcome subsets.
    fn subset_oracle(p: &[f64], q: &[f64]) -> f64 {
        let mut best: f64 = 0.0;
        for mask in 1usize..(1 << p.len()) {
            let (mut a, mut b) = (0.0, 0.0);
            for i in 0..p.len() {
                if mask >> i & 1 == 1 {
                    a += p[i];
                    b += q[i];
                }
            }
            if a > 0.0 {
                best = best.max(if b > 0.0 { a * (a / b).log2() } else { f64::INFINITY });
            }
        }
        best
    }

    fn h2(p: f64) -> f64 {
        -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
    }

    #[test]
    fn entropy_cases() {
        assert!(von_neumann_entropy(&plus()).abs() < 1e-12);
        assert!((von_neumann_entropy(&dm(&[0.5, 0.5])) - 1.0).abs() < 1e-15);
        assert!((von_neumann_entropy(&dm(&[0.75, 0.25])) - h2(0.25)).abs() < 1e-12);
    }

    #[test]
    fn relative_entropy_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let r = random::full_rank_density(&mut rng, 3);
        assert!(relative_entropy(&r, &r).unwrap().abs() < 1e-10);
        assert!(relative_entropy(&dm(&[1.0, 0.0]), &dm(&[0.0, 1.0])).unwrap().is_infinite());
        let kl = 0.75 * 1.5f64.log2() + 0.25 * 0.5f64.log2();
        assert!((relative_entropy(&dm(&[0.75, 0.25]), &dm(&[0.5, 0.5])).unwrap() - kl).abs() < 1e-12);
        assert!((kl - 0.188722).abs() < 1e-6);
        assert!(relative_entropy(&dm(&[1.0]), &dm(&[0.5, 0.5])).is_err());
    }

    #[test]
    fn rotated_relative_entropy_matches_diagonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let u = random::unitary(&mut rng, 3);
        let (p, q) = ([0.6, 0.3, 0.1], [0.2, 0.3, 0.5]);
        let got = relative_entropy(&random::rotated_diagonal(&u, &p), &random::rotated_diagonal(&u, &q)).unwrap();
        assert!((got - classical::relative_entropy(&p, &q)).abs() < 1e-10);
        let pencil = observational_divergence(&random::rotated_diagonal(&u, &p), &random::rotated_diagonal(&u, &q))
            .unwrap()
            .value;
        assert!((pencil - subset_oracle(&p, &q)).abs() < 1e-9);
    }

    #[test]
    fn divergence_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let r = random::full_rank_density(&mut rng, 4);
        assert!(observational_divergence(&r, &r).unwrap().value.abs() < 1e-10);
        let d = observational_divergence(&dm(&[0.75, 0.25]), &dm(&[0.5, 0.5])).unwrap().value;
        assert!((d - subset_oracle(&[0.75, 0.25], &[0.5, 0.5])).abs() < 1e-14);
        assert!((d - 0.438722).abs() < 1e-6);
        assert!(observational_divergence_pencil(&dm(&[1.0, 0.0]), &dm(&[0.0, 1.0]))
            .unwrap()
            .value
            .is_infinite());
    }

    #[test]
    fn pencil_matches_subset_search_on_commuting_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for dim in 2..=6 {
            let u = random::unitary(&mut rng, dim);
            let p = random::distribution(&mut rng, dim);
            let q = random::distribution(&mut rng, dim);
            let got = observational_divergence_pencil(&random::rotated_diagonal(&u, &p), &random::rotated_diagonal(&u, &q))
                .unwrap();
            assert!((got.value - subset_oracle(&p, &q)).abs() < 1e-8, "dim {dim}");
        }
    }

    #[test]
    fn witness_attains_the_value() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random::full_rank_density(&mut rng, 4);
        let b = random::full_rank_density(&mut rng, 4);
        let d = observational_divergence(&a, &b).unwrap();
        let (ta, tb) = (a.expectation(&d.witness), b.expectation(&d.witness));
        assert!((ta * (ta / tb).log2() - d.value).abs() < 1e-10);
        // no random projector beats the scan
        for _ in 0..200 {
            let u = random::unitary(&mut rng, 4);
            let k = rng.random_range(1..4);
            let cols = u.columns(0, k).into_owned();
            let m = &cols * cols.adjoint();
            let (x, y) = (a.expectation(&m), b.expectation(&m));
            assert!(x * (x / y).log2() <= d.value + 1e-10);
        }
    }

    #[test]
    fn chi_cases() {
        let single = ens(0, &[1.0], vec![plus()]);
        assert!(holevo_chi(&single).unwrap().abs() < 1e-12);
        let orth = ens(1, &[0.5, 0.5], vec![dm(&[1.0, 0.0]), dm(&[0.0, 1.0])]);
        assert!((holevo_chi(&orth).unwrap() - 1.0).abs() < 1e-12);
        let zero_plus = ens(1, &[0.5, 0.5], vec![dm(&[1.0, 0.0]), plus()]);
        let c8 = (std::f64::consts::PI / 8.0).cos().powi(2);
        assert!((holevo_chi(&zero_plus).unwrap() - h2(c8)).abs() < 1e-10);
        assert!((h2(c8) - 0.600876).abs() < 1e-6);
    }

    #[test]
    fn divergence_information_cases() {
        let single = ens(0, &[1.0], vec![plus()]);
        assert!(divergence_information(&single).unwrap().abs() < 1e-10);
        let orth = ens(1, &[0.5, 0.5], vec![dm(&[1.0, 0.0]), dm(&[0.0, 1.0])]);
        assert!((divergence_information(&orth).unwrap() - 1.0).abs() < 1e-12);
        assert!((subset_oracle(&[1.0, 0.0], &[0.5, 0.5]) - 1.0).abs() < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let rows: Vec<Vec<f64>> = (0..3).map(|_| random::distribution(&mut rng, 4)).collect();
        let w = random::distribution(&mut rng, 3);
        let avg = classical::average(&w, &rows);
        let oracle: f64 = w.iter().zip(&rows).map(|(p, r)| p * subset_oracle(r, &avg)).sum();
        let e = ens(2, &[w[0], w[1], w[2]], rows.iter().map(|r| dm(r)).collect());
        let got = divergence_information(&e).unwrap();
        assert!((got - oracle).abs() < 1e-10);
        assert!(got <= holevo_chi(&e).unwrap() + 1.0);
    }

    #[test]
    fn xi_cases() {
        let orth = ens(1, &[0.5, 0.5], vec![dm(&[1.0, 0.0]), dm(&[0.0, 1.0])]);
        assert!((xi_information(&orth).unwrap() - 1.0).abs() < 1e-12);
        let pure = ens(0, &[1.0], vec![plus()]);
        assert!(xi_information(&pure).unwrap().abs() < 1e-9);
        // dense path agrees with the diagonal path
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let u = random::unitary(&mut rng, 3);
        let rows: Vec<Vec<f64>> = (0..2).map(|_| random::distribution(&mut rng, 3)).collect();
        let dense = ens(1, &[0.3, 0.7], rows.iter().map(|r| random::rotated_diagonal(&u, r)).collect());
        assert!((xi_information(&dense).unwrap() - classical::xi_information(1, &[0.3, 0.7], &rows)).abs() < 1e-9);
    }

    #[test]
    fn radius_cases() {
        let r = random::full_rank_density(&mut ChaCha8Rng::seed_from_u64(8), 2);
        let same = divergence_radius(&[r.clone(), r], 1e-9).unwrap();
        assert!(same.radius.abs() < 1e-9);

        let orth = divergence_radius(&[dm(&[1.0, 0.0]), dm(&[0.0, 1.0])], 1e-9).unwrap();
        assert!((orth.radius - 1.0).abs() < 1e-9);
        assert!((orth.weights[0] - 0.5).abs() < 1e-9);
        assert!(orth.converged);
    }

    fn max_divergence(states: &[DensityMatrix], q: &[f64]) -> f64 {
        let mut m = CMatrix::zeros(2, 2);
        for (w, s) in q.iter().zip(states) {
            m += s.matrix() * re(*w);
        }
        let mix = DensityMatrix::normalized(m).unwrap();
        states
            .iter()
            .map(|s| observational_divergence(s, &mix).unwrap().value)
            .fold(0.0, f64::max)
    }

    #[test]
    fn radius_beats_grid_search_on_random_qubits() {
        let tol = 1e-6;
        for seed in 0..4 {
            let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
            let states: Vec<DensityMatrix> = (0..3).map(|_| random::full_rank_density(&mut rng, 2)).collect();
            let got = divergence_radius(&states, tol).unwrap();
            let mut grid = f64::INFINITY;
            for i in 0..=50 {
                for j in 0..=(50 - i) {
                    let q = [i as f64 / 50.0, j as f64 / 50.0, (50 - i - j) as f64 / 50.0];
                    grid = grid.min(max_divergence(&states, &q));
                }
            }
            assert!(got.radius <= grid + tol, "seed {seed}: {} vs grid {grid}", got.radius);
            assert!((max_divergence(&states, &got.weights) - got.radius).abs() < 1e-9);
        }
    }

    #[test]
    fn accessible_info_cases() {
        let orth = ens(1, &[0.5, 0.5], vec![dm(&[1.0, 0.0]), dm(&[0.0, 1.0])]);
        let b = accessible_info_bounds(&orth, 4, 1).unwrap();
        assert!((b.lower - 1.0).abs() < 1e-12 && (b.upper - 1.0).abs() < 1e-12);

        let classical_e = ens(1, &[0.4, 0.6], vec![dm(&[0.9, 0.1]), dm(&[0.3, 0.7])]);
        let b = accessible_info_bounds(&classical_e, 0, 1).unwrap();
        assert!((b.lower - b.upper).abs() < 1e-12);

        let zero_plus = ens(1, &[0.5, 0.5], vec![dm(&[1.0, 0.0]), plus()]);
        let b = accessible_info_bounds(&zero_plus, 8, 1).unwrap();
        let mut grid: f64 = 0.0;
        for k in 0..=2000 {
            let th = std::f64::consts::PI * k as f64 / 2000.0;
            let (cs, sn) = (th.cos(), th.sin());
            let u = CMatrix::from_row_slice(2, 2, &[re(cs), re(-sn), re(sn), re(cs)]);
            let states = [dm(&[1.0, 0.0]), plus()];
            grid = grid.max(projective_information(&[0.5, 0.5], &states, &u));
        }
        assert!(b.lower >= grid - 1e-12, "{} < {grid}", b.lower);
        assert!(b.lower <= b.upper + 1e-8);
    }

    #[test]
    fn tradeoff_and_rate_formulas() {
        assert_eq!(tradeoff_required_n_bound(0.0, 0.0, Measure::Divergence).unwrap(), 24.0);
        let chi0 = tradeoff_required_n_bound(0.0, 0.0, Measure::Chi).unwrap();
        assert!((chi0 - (17.0 + 8.0 * 2f64.sqrt())).abs() < 1e-12 && (chi0 - 28.3137).abs() < 1e-4);
        let v = tradeoff_required_n_bound(2.0, 1.0, Measure::Divergence).unwrap();
        assert!((v - (19.0 + 8.0 * 2f64.sqrt())).abs() < 1e-12);
        assert!(tradeoff_required_n_bound(-1.0, 0.0, Measure::Chi).is_err());
        assert!(tradeoff_required_n_bound(0.0, f64::NAN, Measure::Chi).is_err());

        assert!((asymptotic_rate(4, 1.0, 1_000_000).unwrap() - 3.0).abs() < 0.01);
        assert!((asymptotic_rate(4, 0.0, 1).unwrap() - (4.0 - 8.0 * 2f64.sqrt() - 17.0)).abs() < 1e-12);
        assert!(asymptotic_rate(4, 1.0, 100).unwrap() >= asymptotic_rate(4, 1.0, 10).unwrap());
    }

    #[test]
    fn complex_states_are_handled() {
        let y_plus = DensityMatrix::new(CMatrix::from_row_slice(
            2,
            2,
            &[re(0.5), c(0.0, -0.5), c(0.0, 0.5), re(0.5)],
        ))
        .unwrap();
        let e = ens(1, &[0.5, 0.5], vec![y_plus, dm(&[1.0, 0.0])]);
        let c8 = (std::f64::consts::PI / 8.0).cos().powi(2);
        assert!((holevo_chi(&e).unwrap() - h2(c8)).abs() < 1e-10);
    }

    fn random_pair(seed: u64, dim: usize, commuting: bool) -> (DensityMatrix, DensityMatrix) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        if commuting {
            let u = random::unitary(&mut rng, dim);
            let p = random::distribution(&mut rng, dim);
            let q = random::distribution(&mut rng, dim);
            (random::rotated_diagonal(&u, &p), random::rotated_diagonal(&u, &q))
        } else {
            let rank = rng.random_range(1..=dim);
            (random::density_matrix(&mut rng, dim, rank), random::full_rank_density(&mut rng, dim))
        }
    }

    fn random_ensemble(seed: u64, dim: usize, members: usize) -> Ensemble {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = random::distribution(&mut rng, members);
        let states = (0..members)
            .map(|_| {
                let rank = rng.random_range(1..=dim);
                random::density_matrix(&mut rng, dim, rank)
            })
            .collect();
        let bits = members.next_power_of_two().trailing_zeros() as usize;
        ens(bits, &w, states)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn divergence_at_most_relative_entropy_plus_one(seed in any::<u64>(), dim in 2usize..=8, commuting in any::<bool>()) {
            let (r, s) = random_pair(seed, dim, commuting);
            let d = observational_divergence(&r, &s).unwrap().value;
            let kl = relative_entropy(&r, &s).unwrap();
            prop_assert!(d >= -1e-12 && kl >= -1e-9);
            prop_assert!(d <= kl + 1.0 + 1e-8, "{} > {} + 1", d, kl);
        }

        #[test]
        fn divergence_information_at_most_chi_plus_one(seed in any::<u64>(), dim in 2usize..=6, members in 1usize..=4) {
            let e = random_ensemble(seed, dim, members);
            prop_assert!(divergence_information(&e).unwrap() <= holevo_chi(&e).unwrap() + 1.0 + 1e-8);
        }

        #[test]
        fn xi_dominates_chi_for_uniform_commuting(seed in any::<u64>(), dim in 1usize..=10, bits in 0usize..=3) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let k = 1usize << bits;
            let rows: Vec<Vec<f64>> = (0..k).map(|_| random::distribution(&mut rng, dim)).collect();
            let w = vec![1.0 / k as f64; k];
            prop_assert!(classical::xi_information(bits, &w, &rows) >= classical::holevo_chi(&w, &rows) - 1e-8);
        }

        #[test]
        fn commuting_divergence_matches_subsets(seed in any::<u64>(), dim in 1usize..=10) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = random::distribution(&mut rng, dim);
            let q = random::distribution(&mut rng, dim);
            let got = observational_divergence(&dm(&p), &dm(&q)).unwrap().value;
            prop_assert!((got - subset_oracle(&p, &q)).abs() < 1e-8);
        }

        #[test]
        fn entropy_is_additive(seed in any::<u64>(), da in 1usize..=4, db in 1usize..=4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random::full_rank_density(&mut rng, da);
            let b = random::density_matrix(&mut rng, db, 1 + db / 2);
            let ab = crate::state::tensor(&a, &b).unwrap();
            prop_assert!((von_neumann_entropy(&ab) - von_neumann_entropy(&a) - von_neumann_entropy(&b)).abs() < 1e-8);
        }

        #[test]
        fn chi_is_additive_on_products(seed in any::<u64>(), dim in 2usize..=3) {
            let e = random_ensemble(seed, dim, 2);
            let ee = e.tensor(&e).unwrap();
            prop_assert!((holevo_chi(&ee).unwrap() - 2.0 * holevo_chi(&e).unwrap()).abs() < 1e-7);
        }

        #[test]
        fn divergences_vanish_only_on_equal_states(seed in any::<u64>(), dim in 2usize..=5) {
            let (r, s) = random_pair(seed, dim, false);
            prop_assert!(observational_divergence(&r, &r).unwrap().value.abs() < 1e-8);
            prop_assert!(relative_entropy(&s, &s).unwrap().abs() < 1e-8);
            prop_assert!(observational_divergence(&r, &s).unwrap().value > 0.0);
        }
    }
}
