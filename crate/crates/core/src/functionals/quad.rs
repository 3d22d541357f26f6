//! Adaptive five-point Gauss–Legendre quadrature.

const NODES: [f64; 5] =
    [0.0, -0.538_469_310_105_683_1, 0.538_469_310_105_683_1, -0.906_179_845_938_664, 0.906_179_845_938_664];
const WEIGHTS: [f64; 5] = [
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
    0.236_926_885_056_189_1,
];

const MAX_DEPTH: u32 = 48;

pub(crate) fn gl5(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    h * NODES.iter().zip(WEIGHTS).map(|(&x, w)| w * f(c + h * x)).sum::<f64>()
}

fn adapt(f: &impl Fn(f64) -> f64, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (l, r) = (gl5(f, a, m), gl5(f, m, b));
    if depth >= MAX_DEPTH || (l + r - whole).abs() <= tol || m <= a || m >= b {
        return l + r;
    }
    adapt(f, a, m, l, 0.5 * tol, depth + 1) + adapt(f, m, b, r, 0.5 * tol, depth + 1)
}

/// `∫_a^b f` to absolute tolerance `tol` (heuristic, from halving).
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let whole = gl5(&f, a, b);
    adapt(&f, a, b, whole, tol, 0)
}
