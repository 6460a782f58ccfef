//! Gauss-Legendre quadrature on [0,1] and composite dyadic rules.

/// Legendre polynomial P_n and its derivative at `x` in [-1,1].
pub fn legendre_poly_deriv(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut p_prev = 1.0;
    let mut p = x;
    let mut dp_prev = 0.0;
    let mut dp = 1.0;
    for m in 2..=n {
        let mf = m as f64;
        let p_next = ((2.0 * mf - 1.0) * x * p - (mf - 1.0) * p_prev) / mf;
        let dp_next = dp_prev + (2.0 * mf - 1.0) * p;
        p_prev = p;
        p = p_next;
        dp_prev = dp;
        dp = dp_next;
    }
    (p, dp)
}

/// An n-point Gauss-Legendre rule mapped to [0,1].
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    /// Build the n-point rule; exact for polynomials of degree <= 2n-1.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "quadrature rule needs at least one point");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n {
            // Chebyshev initial guess, then Newton iteration on P_n.
            let mut x = -(std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..60 {
                let (p, dp) = legendre_poly_deriv(n, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre_poly_deriv(n, x);
            nodes[i] = 0.5 * (x + 1.0);
            weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);
        }
        GaussRule { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integrate `f` over [a,b] with this rule.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let h = b - a;
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(a + h * x);
        }
        acc * h
    }

    /// Integrate `f` over [0,1] split into 2^level uniform cells.
    pub fn integrate_dyadic<F: FnMut(f64) -> f64>(&self, level: usize, mut f: F) -> f64 {
        let cells = 1usize << level;
        let h = 1.0 / cells as f64;
        let mut acc = 0.0;
        for c in 0..cells {
            let a = c as f64 * h;
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                acc += w * f(a + h * x);
            }
        }
        acc * h
    }
}
