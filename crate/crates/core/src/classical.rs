//! Diagonal fast path: the information measures for commuting states,
//! evaluated on probability vectors without any eigensolver.

/// Entries at or below this threshold are outside the support.
pub const SUPPORT_TOL: f64 = 1e-10;

pub fn entropy(p: &[f64]) -> f64 {
    -p.iter().filter(|&&x| x > 0.0).map(|&x| x * x.log2()).sum::<f64>()
}

/// Mass of `p` sitting where `q` vanishes.
pub fn leakage(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .filter(|(_, &qi)| qi <= SUPPORT_TOL)
        .map(|(&pi, _)| pi.max(0.0))
        .sum()
}

/// `∑ p log(p/q)`; `+∞` when the support of `p` is not inside that of `q`.
pub fn relative_entropy(p: &[f64], q: &[f64]) -> f64 {
    if leakage(p, q) > SUPPORT_TOL {
        return f64::INFINITY;
    }
    relative_entropy_on_support(p, q)
}

/// Relative entropy restricted to the support of `q`.
pub fn relative_entropy_on_support(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .filter(|(&pi, &qi)| pi > 0.0 && qi > SUPPORT_TOL)
        .map(|(&pi, &qi)| pi * (pi / qi).log2())
        .sum()
}

/// Observational divergence of two distributions together with the
/// maximizing event.
#[derive(Debug, Clone)]
pub struct EventDivergence {
    pub value: f64,
    pub event: Vec<bool>,
}

/// `max_S p(S) log(p(S)/q(S))` over events `S`.
///
/// The objective is convex in `(p(S), q(S))`, so the maximum sits on an
/// extreme point of the testing region; those are exactly the likelihood
/// ratio prefixes, which we scan after one sort.
pub fn observational_divergence(p: &[f64], q: &[f64]) -> EventDivergence {
    let leak = leakage(p, q);
    if leak > SUPPORT_TOL {
        let event = q.iter().map(|&qi| qi <= SUPPORT_TOL).collect();
        return EventDivergence {
            value: f64::INFINITY,
            event,
        };
    }
    observational_divergence_on_support(p, q)
}

pub fn observational_divergence_on_support(p: &[f64], q: &[f64]) -> EventDivergence {
    let mut order: Vec<usize> = (0..p.len()).filter(|&i| q[i] > SUPPORT_TOL).collect();
    // descending likelihood ratio p/q, compared without division
    order.sort_by(|&i, &j| (p[j] * q[i]).total_cmp(&(p[i] * q[j])));
    let (mut a, mut b) = (0.0, 0.0);
    let (mut best, mut best_len) = (0.0, 0usize);
    for (k, &i) in order.iter().enumerate() {
        a += p[i];
        b += q[i];
        if a > 0.0 && b > 0.0 {
            let f = a * (a / b).log2();
            if f > best {
                best = f;
                best_len = k + 1;
            }
        }
    }
    let mut event = vec![false; p.len()];
    for &i in &order[..best_len] {
        event[i] = true;
    }
    EventDivergence { value: best, event }
}

/// Weighted average of the rows.
pub fn average(weights: &[f64], rows: &[Vec<f64>]) -> Vec<f64> {
    let dim = rows.first().map_or(0, |r| r.len());
    let mut avg = vec![0.0; dim];
    for (w, row) in weights.iter().zip(rows) {
        for (a, &x) in avg.iter_mut().zip(row) {
            *a += w * x;
        }
    }
    avg
}

pub fn holevo_chi(weights: &[f64], rows: &[Vec<f64>]) -> f64 {
    let avg = average(weights, rows);
    weights
        .iter()
        .zip(rows)
        .map(|(&w, row)| w * relative_entropy_on_support(row, &avg))
        .sum()
}

pub fn divergence_information(weights: &[f64], rows: &[Vec<f64>]) -> f64 {
    let avg = average(weights, rows);
    weights
        .iter()
        .zip(rows)
        .map(|(&w, row)| w * observational_divergence_on_support(row, &avg).value)
        .sum()
}

/// `n + log2 ∑_x w_x² ∑_i row_x(i)² / avg(i)` on the support of `avg`.
pub fn xi_information(n_bits: usize, weights: &[f64], rows: &[Vec<f64>]) -> f64 {
    let avg = average(weights, rows);
    let cut = pinv_cut(&avg);
    let s: f64 = weights
        .iter()
        .zip(rows)
        .map(|(&w, row)| w * w * collision_term(row, &avg, cut))
        .sum();
    n_bits as f64 + s.log2()
}

fn pinv_cut(avg: &[f64]) -> f64 {
    1e-10 * avg.iter().cloned().fold(0.0, f64::max)
}

fn collision_term(row: &[f64], avg: &[f64], cut: f64) -> f64 {
    row.iter()
        .zip(avg)
        .filter(|(_, &a)| a > cut)
        .map(|(&x, &a)| x * x / a)
        .sum()
}

/// χ and ξ of a diagonal ensemble whose rows are generated on demand.
///
/// Rows are produced twice (once for the average, once for the terms), so
/// memory stays linear in the dimension.
pub fn chi_xi_streaming(
    n_bits: usize,
    weights: &[f64],
    dim: usize,
    mut row: impl FnMut(usize, &mut [f64]),
) -> (f64, f64) {
    let mut buf = vec![0.0; dim];
    let mut avg = vec![0.0; dim];
    for (x, &w) in weights.iter().enumerate() {
        row(x, &mut buf);
        for (a, &v) in avg.iter_mut().zip(&buf) {
            *a += w * v;
        }
    }
    let cut = pinv_cut(&avg);
    let (mut chi, mut coll) = (0.0, 0.0);
    for (x, &w) in weights.iter().enumerate() {
        row(x, &mut buf);
        chi += w * relative_entropy_on_support(&buf, &avg);
        coll += w * w * collision_term(&buf, &avg, cut);
    }
    (chi, n_bits as f64 + coll.log2())
}

/// `I(X:Y)` for a joint law given as prior `p_x` and channel rows `P(y|x)`.
pub fn mutual_information(prior: &[f64], channel: &[Vec<f64>]) -> f64 {
    let out = average(prior, channel);
    prior
        .iter()
        .zip(channel)
        .map(|(&px, row)| px * relative_entropy_on_support(row, &out))
        .sum()
}
