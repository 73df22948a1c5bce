//! Finite-size-scaling estimate of the optimal cut on bimodal complete graphs.

/// Infinite-size ground-state energy density of the SK model.
pub const PARISI_E0: f64 = -0.763_166_726_5;
/// Finite-size correction exponent.
pub const FSS_OMEGA: f64 = 2.0 / 3.0;
/// Fitted finite-size correction amplitude.
pub const FSS_AMPLITUDE: f64 = 0.70;

/// Expected ground energy `E* = n^{3/2} (e0 + A n^{-omega})` of a bimodal `K_n`.
pub fn parisi_reference_energy(n: usize) -> f64 {
    let n = n as f64;
    n.powf(1.5) * (PARISI_E0 + FSS_AMPLITUDE * n.powf(-FSS_OMEGA))
}

/// Reference maximum cut `C* = -E*/2`.
pub fn parisi_reference_cut(n: usize) -> f64 {
    -parisi_reference_energy(n) / 2.0
}
