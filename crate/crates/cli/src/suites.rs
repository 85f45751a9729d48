//! The experiment suites. Each returns its rows in a fixed case order.

use qsc_core::attack::{run_average_attack, run_rollback, run_worst_case_attack, success_floor};
use qsc_core::bits::BitString;
use qsc_core::corpus;
use qsc_core::ensemble::{Ensemble, EnsembleState};
use qsc_core::experiments::{build_separation_ensemble, run_parallel_repetition_experiment, run_separation_experiment};
use qsc_core::linalg::{re, unitarity_defect, CMatrix};
use qsc_core::measures::{
    accessible_info_bounds, divergence_information, holevo_chi, observational_divergence, xi_information, Measure,
};
use qsc_core::protocol::{post_commit_ensemble, verify_tradeoff, Protocol};
use qsc_core::random;
use qsc_core::state::{apply_local_unitary, purify, purify_with_ancilla, DensityMatrix, Party};
use qsc_core::substate::{
    build_decomposition, classical_substate, domination_gap, flag_probability, k_budget, weight_floor,
    SubstateMode,
};
use qsc_core::transition::transition_unitary;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::files::{load_ensemble, load_protocol};
use crate::{CliError, ExperimentConfig, Row};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Measures,
    Substate,
    Uhlmann,
    Tradeoff,
    Worstcase,
    Rollback,
    Separation,
    Parallel,
    All,
}

const SLACK: f64 = 1e-8;
const FLOOR_SLACK: f64 = 1e-6;

struct Ctx<'a> {
    config: &'a ExperimentConfig,
}

impl Ctx<'_> {
    fn slack(&self, default: f64) -> f64 {
        self.config.params.tol.unwrap_or(default)
    }

    fn rng(&self, salt: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.config.params.seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15))
    }

    fn protocol(&self, default: impl FnOnce(usize, usize) -> qsc_core::Result<Protocol>, n: usize, b: usize) -> Result<Protocol, CliError> {
        match &self.config.protocol {
            Some(path) => load_protocol(path),
            None => {
                let p = &self.config.params;
                Ok(default(p.n.unwrap_or(n), p.b_sent.unwrap_or(b))?)
            }
        }
    }

    fn mode(&self, default: SubstateMode) -> SubstateMode {
        self.config.params.mode.map_or(default, Into::into)
    }
}

pub fn run_suite(config: &ExperimentConfig) -> Result<Vec<Row>, CliError> {
    let ctx = Ctx { config };
    match config.suite {
        Suite::Measures => measures(&ctx),
        Suite::Substate => substate(&ctx),
        Suite::Uhlmann => uhlmann(&ctx),
        Suite::Tradeoff => tradeoff(&ctx),
        Suite::Worstcase => worstcase(&ctx),
        Suite::Rollback => rollback(&ctx),
        Suite::Separation => separation(&ctx),
        Suite::Parallel => parallel(&ctx),
        Suite::All => {
            let mut rows = Vec::new();
            for run in [measures, substate, uhlmann, tradeoff, worstcase, rollback, separation, parallel] {
                rows.extend(run(&ctx)?);
            }
            Ok(rows)
        }
    }
}

fn measures(ctx: &Ctx) -> Result<Vec<Row>, CliError> {
    const S: &str = "measures";
    let mut cases: Vec<(String, Ensemble)> = Vec::new();
    match &ctx.config.ensemble {
        Some(path) => cases.push((path.display().to_string(), load_ensemble(path)?)),
        None => {
            let eps = ctx.config.params.epsilon.unwrap_or(0.5);
            cases.push((format!("separation n=4 eps={eps}"), build_separation_ensemble(4, eps)?));
            cases.push(("prefix(n=3,b=1)".into(), post_commit_ensemble(&corpus::prefix(3, 1)?)?));
            let mut rng = ctx.rng(1);
            let states = (0..4)
                .map(|_| EnsembleState::Dense(random::density_matrix(&mut rng, 3, 2)))
                .collect();
            let weights = random::distribution(&mut rng, 4);
            cases.push(("random qutrits".into(), Ensemble::from_states(2, &weights, states)?));
        }
    }
    let samples = ctx.config.params.trials.unwrap_or(16);
    let mut rows = Vec::new();
    for (case, e) in cases {
        let chi = holevo_chi(&e)?;
        let d = divergence_information(&e)?;
        let xi = xi_information(&e)?;
        let acc = accessible_info_bounds(&e, samples, ctx.config.params.seed)?;
        rows.push(Row::new(S, &case, "chi >= accessible_lower", chi).at_least(acc.lower, ctx.slack(SLACK)));
        rows.push(Row::new(S, &case, "divergence_info <= chi+1", d).at_most(chi + 1.0, ctx.slack(SLACK)));
        let commuting = e.diagonal_rows().is_some();
        let xi_row = Row::new(S, &case, "xi", xi);
        rows.push(if commuting {
            Row {
                quantity: "xi >= chi".into(),
                ..xi_row.at_least(chi, ctx.slack(SLACK))
            }
        } else {
            xi_row
        });
    }
    Ok(rows)
}

fn substate(ctx: &Ctx) -> Result<Vec<Row>, CliError> {
    const S: &str = "substate";
    let trials = ctx.config.params.trials.unwrap_or(300);
    let rs: Vec<f64> = ctx.config.params.r.map_or(vec![1.5, 2.0, 4.0], |r| vec![r]);
    let mut rng = ctx.rng(2);
    let mut rows = Vec::new();
    for &r in &rs {
        let (mut failures, mut min_ratio, mut max_l1, mut max_flag_err) = (0usize, f64::INFINITY, 0.0f64, 0.0f64);
        for _ in 0..trials {
            let dim = rng.random_range(2..=16);
            let sigma = random::distribution(&mut rng, dim);
            let tau = random::distribution(&mut rng, dim);
            match classical_substate(&sigma, &tau, r) {
                Ok(d) => {
                    let sp = d.sigma_prime.diagonal_values();
                    let l1: f64 = sp.iter().zip(&sigma).map(|(a, b)| (a - b).abs()).sum();
                    min_ratio = min_ratio.min(d.p / weight_floor(r, k_budget(d.divergence)?));
                    max_l1 = max_l1.max(l1);
                    max_flag_err = max_flag_err.max((flag_probability(&d.tau_bar) - d.p).abs());
                    if tau.iter().zip(&sp).any(|(t, s)| d.p * s > t + 1e-9) {
                        failures += 1;
                    }
                }
                Err(_) => failures += 1,
            }
        }
        let case = format!("commuting r={r}");
        rows.push(Row::new(S, &case, "failures", failures as f64).at_most(0.0, 0.0));
        rows.push(Row::new(S, &case, "min weight/floor", min_ratio).at_least(1.0, 0.0));
        rows.push(Row::new(S, &case, "max perturbation", max_l1).at_most(2.0 / r.sqrt(), 0.0));
        rows.push(Row::new(S, &case, "max |flag - p|", max_flag_err).at_most(0.0, ctx.slack(1e-10)));
    }

    let sigma = random::full_rank_density(&mut rng, 4);
    let tau = random::full_rank_density(&mut rng, 4);
    let r = ctx.config.params.r.unwrap_or(2.0);
    for mode in [SubstateMode::Exact, SubstateMode::Truncated] {
        let d = build_decomposition(&sigma, &tau, &purify(&sigma), r, mode)?;
        let case = format!("dense {mode} r={r}");
        rows.push(Row::new(S, &case, "p", d.p).at_least(if mode == SubstateMode::Truncated { weight_floor(r, d.k) } else { 0.0 }, 0.0));
        rows.push(Row::new(S, &case, "domination gap", domination_gap(&tau, &d.sigma_prime, d.p)).at_least(0.0, ctx.slack(1e-9)));
        rows.push(Row::new(S, &case, "flag probability", flag_probability(&d.tau_bar)).near(d.p, ctx.slack(1e-10)));
    }
    Ok(rows)
}

fn uhlmann(ctx: &Ctx) -> Result<Vec<Row>, CliError> {
    const S: &str = "uhlmann";
    let trials = ctx.config.params.trials.unwrap_or(200);
    let mut rng = ctx.rng(3);
    let (mut worst_state, mut worst_unitary) = (0.0f64, 0.0f64);
    for _ in 0..trials {
        let dim = rng.random_range(1..=8);
        let rank = rng.random_range(1..=dim);
        let anc = rng.random_range(rank..=8);
        let rho = random::density_matrix(&mut rng, dim, rank);
        let phi1 = purify_with_ancilla(&rho, anc)?;
        let phi2 = apply_local_unitary(&phi1, &random::unitary(&mut rng, anc), Party::Alice)?;
        let u = transition_unitary(&phi1, &phi2, Party::Alice)?;
        let mapped = apply_local_unitary(&phi1, &u, Party::Alice)?;
        worst_state = worst_state.max(mapped.state().phase_distance(phi2.state()));
        worst_unitary = worst_unitary.max(unitarity_defect(&u));
    }
    let case = format!("{trials} random purification pairs");
    Ok(vec![
        Row::new(S, &case, "max state error", worst_state).at_most(ctx.slack(1e-7), 0.0),
        Row::new(S, &case, "max unitarity defect", worst_unitary).at_most(ctx.slack(1e-9), 0.0),
    ])
}

fn tradeoff(ctx: &Ctx) -> Result<Vec<Row>, CliError> {
    const S: &str = "tradeoff";
    let p = ctx.protocol(corpus::prefix, 4, 2)?;
    let report = run_average_attack(&p, ctx.mode(SubstateMode::Exact), ctx.config.params.r)?;
    let div = verify_tradeoff(&p, &report, Measure::Divergence)?;
    let chi = verify_tradeoff(&p, &report, Measure::Chi)?;
    let n = p.n_bits() as f64;
    let case = p.name().to_string();
    Ok(vec![
        Row::new(S, &case, "a", div.a).passing(!report.any_failed()),
        Row::new(S, &case, "b(divergence)", div.b),
        Row::new(S, &case, "b(chi)", chi.b),
        Row::new(S, &case, "lhs(divergence) >= n", div.lhs).at_least(n, ctx.slack(FLOOR_SLACK)),
        Row::new(S, &case, "lhs(chi) >= n", chi.lhs).at_least(n, ctx.slack(FLOOR_SLACK)),
    ])
}

fn worstcase(ctx: &Ctx) -> Result<Vec<Row>, CliError> {
    const S: &str = "worstcase";
    let p = ctx.protocol(corpus::random_prefix, 3, 1)?;
    let report = run_worst_case_attack(&p, ctx.mode(SubstateMode::Truncated), ctx.config.params.r)?;
    let radius = report.radius.clone().expect("worst-case report carries its radius");
    let states = post_commit_ensemble(&p)?.dense_states()?;
    let dim = states[0].dim();
    let mut mix = CMatrix::zeros(dim, dim);
    for (w, s) in radius.weights.iter().zip(&states) {
        mix += s.matrix() * re(*w);
    }
    let mix = DensityMatrix::new(mix)?;
    let mut max_d: f64 = 0.0;
    for s in &states {
        max_d = max_d.max(observational_divergence(s, &mix)?.value);
    }
    let case = format!("{} {}", p.name(), report.mode);
    let budget = k_budget(radius.radius)?;
    let mut rows = vec![Row::new(S, &case, "max divergence at mixture", max_d).at_most(radius.radius, ctx.slack(FLOOR_SLACK))];
    for e in &report.entries {
        let c = format!("{case} c={}", e.c);
        rows.push(Row::new(S, &c, "k", e.k).at_most(budget, ctx.slack(FLOOR_SLACK)));
        let row = Row::new(S, &c, "p_tilde", e.p_tilde);
        rows.push(if report.mode == SubstateMode::Truncated {
            row.at_least(success_floor(report.r, e.k), ctx.slack(FLOOR_SLACK))
        } else {
            row.passing(!e.failed())
        });
    }
    Ok(rows)
}

fn rollback(ctx: &Ctx) -> Result<Vec<Row>, CliError> {
    const S: &str = "rollback";
    let p = ctx.protocol(corpus::prefix, 3, 1)?;
    let mode = ctx.mode(SubstateMode::Truncated);
    let mut rows = Vec::new();
    for c in BitString::all(p.n_bits()) {
        let e = run_rollback(&p, c, mode, ctx.config.params.r)?;
        let case = format!("{} {mode} c={c}", p.name());
        rows.push(Row::new(S, &case, "r_c", e.r_c));
        rows.push(Row::new(S, &case, "recover_prob", e.recover_prob).at_least(1.0 - 2.0 * e.r_c, ctx.slack(FLOOR_SLACK)));
        rows.push(Row::new(S, &case, "total_safe", e.total_safe).at_least(1.0 - e.r_c, ctx.slack(FLOOR_SLACK)));
    }
    Ok(rows)
}

fn separation(ctx: &Ctx) -> Result<Vec<Row>, CliError> {
    const S: &str = "separation";
    let n = ctx.config.params.n.unwrap_or(10);
    let eps = ctx.config.params.epsilon.unwrap_or(0.4);
    let r = run_separation_experiment(n, eps)?;
    let case = format!("n={n} eps={eps}");
    let slack = ctx.slack(SLACK);
    Ok(vec![
        Row::new(S, &case, "xi >= n(1-eps)", r.xi).at_least(r.xi_floor, slack),
        Row::new(S, &case, "chi <= ceiling", r.chi).at_most(r.chi_ceiling, slack),
        Row::new(S, &case, "max chi term <= ceiling", r.max_chi_term).at_most(r.chi_ceiling, slack),
    ])
}

fn parallel(ctx: &Ctx) -> Result<Vec<Row>, CliError> {
    const S: &str = "parallel";
    let p = ctx.protocol(corpus::prefix, 2, 1)?;
    let ms = [1, 10, 100, 10_000, 1_000_000];
    let r = run_parallel_repetition_experiment(&p, &ms)?;
    let case = p.name().to_string();
    let mut rows = vec![Row::new(S, &case, "b1", r.b1)];
    rows.push(match r.b2 {
        Some(b2) => Row::new(S, &case, "b2 = 2 b1", b2).near(2.0 * r.b1, ctx.slack(1e-7)),
        None => Row::new(S, &case, "b2 (analytic only)", 2.0 * r.b1),
    });
    let monotone = r.monotone();
    for &(m, rate) in &r.rates {
        rows.push(Row::new(S, &case, format!("rate m={m}"), rate).at_most(r.limit, 0.0).passing(monotone));
    }
    let last = r.rates.last().map_or(f64::NAN, |x| x.1);
    rows.push(Row::new(S, &case, "limit - rate(10^6)", r.limit - last).at_most(0.01, 0.0));
    Ok(rows)
}
