/// Half-width of the wave box.
pub const WAVE_HALF_LENGTH: f64 = 4.0;
/// Final time of the wave box.
pub const WAVE_FINAL_TIME: f64 = 5.5;

fn half_sech2(s: f64) -> f64 {
    0.5 / (2.0 * s).cosh()
}

/// Closed-form solution of the 1D wave problem on [−l, l]: two pairs of
/// counter-propagating `sech(2·)` pulses, satisfying `u_tt = c² u_xx`.
pub fn wave_exact(x: f64, t: f64, c2: f64, l: f64) -> f64 {
    let ct = c2.sqrt() * t;
    half_sech2(x + ct) - half_sech2(x - 2.0 * l + ct) + half_sech2(x - ct) - half_sech2(x + 2.0 * l - ct)
}

/// Initial displacement, `wave_exact(x, 0, ·, l)`.
pub fn wave_initial(x: f64, l: f64) -> f64 {
    wave_exact(x, 0.0, 1.0, l)
}
