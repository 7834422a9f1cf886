//! Small numeric helpers: log-factorial and the cancellation-prone
//! expression e^(-x) - 1 + x that shows up in the offspring moments.

/// ln(n!) for n = 0..=20, where n! is exact in f64.
const LN_FACTORIAL_SMALL: [f64; 21] = [
    0.0,
    0.0,
    std::f64::consts::LN_2,
    1.791759469228055,
    3.1780538303479458,
    4.787491742782046,
    6.579251212010101,
    8.525161361065415,
    10.60460290274525,
    12.801827480081469,
    15.104412573075516,
    17.502307845873887,
    19.987214495661885,
    22.552163853123425,
    25.19122118273868,
    27.89927138384089,
    30.671860106080672,
    33.50507345013689,
    36.39544520803305,
    39.339884187199495,
    42.335616460753485,
];

/// Natural log of n!.
///
/// Exact table below 21, Stirling series above (absolute error < 1e-14
/// for n >= 21; the next omitted term is O(1/n^9)).
pub(crate) fn ln_factorial(n: u64) -> f64 {
    if n < 21 {
        return LN_FACTORIAL_SMALL[n as usize];
    }
    let x = (n + 1) as f64;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)));
    (x - 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln() + series
}

/// e^(-x) - 1 + x, evaluated without cancellation for small x.
///
/// The naive form loses all digits near x = 0 (the true value is
/// x^2/2 - x^3/6 + ...). Strictly positive for x > 0.
pub(crate) fn exp_m1_plus_x(x: f64) -> f64 {
    if x.abs() < 1e-3 {
        // Alternating series; for |x| < 1e-3 the omitted x^6 term is < 1e-19 relative.
        x * x * (0.5 - x / 6.0 + x * x / 24.0 - x * x * x / 120.0)
    } else {
        (-x).exp_m1() + x
    }
}
