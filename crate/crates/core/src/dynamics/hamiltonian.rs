use super::{DriveParams, Matrix4c, C64};
use crate::error::{Error, Result};

/// H/ħ in the rotating frame, rad/s.
///
/// Ground block is diag(δ₁, δ₂, δ₂+δ₂₃); the excited level sits at zero.
/// Row i couples to |4⟩ with Ωᵢ*/2 and row 4 with Ωᵢ/2.
pub fn build_hamiltonian(p: &DriveParams) -> Result<Matrix4c> {
    if !p.is_finite() {
        return Err(Error::invalid("drive", "all Rabi frequencies and detunings must be finite"));
    }
    let mut h = Matrix4c::zeros();
    for (i, d) in p.ground_detunings().into_iter().enumerate() {
        h[(i, i)] = C64::new(d, 0.0);
    }
    for (i, w) in p.omega.iter().enumerate() {
        h[(i, 3)] = w.conj() * 0.5;
        h[(3, i)] = *w * 0.5;
    }
    Ok(h)
}
