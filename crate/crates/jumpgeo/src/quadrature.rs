//! Gauss–Legendre quadrature on intervals and geometric panel chains.

/// Nodes and weights of the `n`-point Gauss–Legendre rule on [-1, 1].
///
/// Computed by Newton iteration on the Legendre polynomial from the
/// Chebyshev initial guess; accurate to machine precision for the orders
/// used here (≤ 128).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev guess for the i-th root (descending order)
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // evaluate P_n and P_n' by the three-term recurrence
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// ∫_a^b f via a single `order`-point Gauss–Legendre rule.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, order: usize) -> f64 {
    let (nodes, weights) = gauss_legendre(order);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = 0.0;
    for (x, w) in nodes.iter().zip(&weights) {
        acc += w * f(mid + half * x);
    }
    half * acc
}

/// Geometrically spaced panel boundaries covering [a, b] with ratio ~`ratio`.
///
/// Radial kernels ~ρ^{-1-α} vary over many decades; per-panel Gauss rules on
/// a geometric subdivision resolve them uniformly well.
pub fn geometric_panels(a: f64, b: f64, ratio: f64) -> Vec<f64> {
    assert!(a > 0.0 && b > a && ratio > 1.0);
    let count = ((b / a).ln() / ratio.ln()).ceil().max(1.0) as usize;
    let step = (b / a).powf(1.0 / count as f64);
    let mut edges = Vec::with_capacity(count + 1);
    let mut x = a;
    for _ in 0..count {
        edges.push(x);
        x *= step;
    }
    edges.push(b);
    edges
}

/// ∫_a^b f over geometric panels, `order` Gauss points per panel.
pub fn integrate_panels<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    ratio: f64,
    order: usize,
) -> f64 {
    let edges = geometric_panels(a, b, ratio);
    let (nodes, weights) = gauss_legendre(order);
    let mut acc = 0.0;
    for pair in edges.windows(2) {
        let half = 0.5 * (pair[1] - pair[0]);
        let mid = 0.5 * (pair[1] + pair[0]);
        for (x, w) in nodes.iter().zip(&weights) {
            acc += half * w * f(mid + half * x);
        }
    }
    acc
}
