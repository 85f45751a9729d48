//! Unitaries on one party that carry one purification onto another.

use crate::error::{Error, Result};
use crate::linalg::{self, re, CMatrix};
use crate::state::{
    apply_local_unchecked, partial_trace, purify_with_ancilla, trace_distance, BipartitePureState,
    DensityMatrix, Party, PureState,
};

/// Reduced states on the untouched party may differ by at most this much
/// (largest entry deviation).
pub const MARGINAL_TOL: f64 = 1e-8;

/// Unitary `U` on `party` with `(U ⊗ I)|φ₁⟩ = |φ₂⟩`.
///
/// Both vectors are reshaped with `party` indexing the rows; `U` is the
/// polar factor of `M₂ M₁^†`, completed deterministically on the part of
/// the space neither matrix touches.
pub fn transition_unitary(phi1: &BipartitePureState, phi2: &BipartitePureState, party: Party) -> Result<CMatrix> {
    if phi1.dim_a() != phi2.dim_a() || phi1.dim_b() != phi2.dim_b() {
        return Err(Error::Shape(format!(
            "layouts differ: {}x{} vs {}x{}",
            phi1.dim_a(),
            phi1.dim_b(),
            phi2.dim_a(),
            phi2.dim_b()
        )));
    }
    let other = party.other();
    let r1 = partial_trace(phi1, other);
    let r2 = partial_trace(phi2, other);
    if r1.max_entry_distance(&r2) > MARGINAL_TOL {
        return Err(Error::Precondition(format!(
            "reduced states on {other} differ (trace distance {:.3e})",
            trace_distance(&r1, &r2)?
        )));
    }
    Ok(linalg::polar_alignment(&phi1.coefficients(party), &phi2.coefficients(party)))
}

/// Purification of `rho` on Bob's side with Alice's dimension taken from
/// `target`, chosen to have the largest overlap with `target`; the global
/// phase makes that overlap real and non-negative.
pub fn closest_purification(rho: &DensityMatrix, target: &BipartitePureState) -> Result<BipartitePureState> {
    if rho.dim() != target.dim_b() {
        return Err(Error::Shape(format!(
            "state has dimension {}, target's kept factor has {}",
            rho.dim(),
            target.dim_b()
        )));
    }
    let canonical = purify_with_ancilla(rho, target.dim_a())?;
    let u = linalg::polar_alignment(&canonical.coefficients(Party::Alice), &target.coefficients(Party::Alice));
    let aligned = apply_local_unchecked(&canonical, &u, Party::Alice);
    let ip = target.state().inner(aligned.state());
    let phase = if ip.norm() > 0.0 { ip.conj() / ip.norm() } else { re(1.0) };
    let v = aligned.amplitudes() * phase;
    BipartitePureState::new(PureState::normalized(v)?, target.dim_a(), target.dim_b())
}
