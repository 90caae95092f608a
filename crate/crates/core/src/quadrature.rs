//! Gauss–Hermite quadrature for integrals over the real line.

use std::sync::OnceLock;

/// Number of nodes used for every continuous-support integral.
pub const HERMITE_NODES: usize = 64;

/// Nodes and weights for ∫ h(t) e^{−t²} dt ≈ Σ w_k h(t_k).
#[derive(Debug, Clone)]
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussHermite {
    /// Newton iteration on the orthonormal Hermite recurrence, with the
    /// usual asymptotic starting guesses for the largest roots.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let pim4 = std::f64::consts::PI.powf(-0.25);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        let nf = n as f64;
        let mut z = 0.0;
        for i in 0..m {
            z = match i {
                0 => (2.0 * nf + 1.0).sqrt() - 1.855_75 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
                1 => z - 1.14 * nf.powf(0.426) / z,
                2 => 1.86 * z - 0.86 * nodes[0],
                3 => 1.91 * z - 0.91 * nodes[1],
                _ => 2.0 * z - nodes[i - 2],
            };
            let mut pp = 0.0;
            for _ in 0..100 {
                let mut p1 = pim4;
                let mut p2 = 0.0;
                for j in 0..n {
                    let jf = j as f64;
                    let p3 = p2;
                    p2 = p1;
                    p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
                }
                pp = (2.0 * nf).sqrt() * p2;
                let z1 = z;
                z = z1 - p1 / pp;
                if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                    break;
                }
            }
            nodes[i] = z;
            nodes[n - 1 - i] = -z;
            weights[i] = 2.0 / (pp * pp);
            weights[n - 1 - i] = weights[i];
        }
        // Ascending order.
        nodes.reverse();
        weights.reverse();
        Self { nodes, weights }
    }

    /// Shared 64-node rule.
    pub fn standard() -> &'static GaussHermite {
        static RULE: OnceLock<GaussHermite> = OnceLock::new();
        RULE.get_or_init(|| GaussHermite::new(HERMITE_NODES))
    }

    /// ∫ h(x) dx for an integrand with Gaussian-like tails centred at
    /// `center` with spread `scale`, via x = center + √2·scale·t.
    pub fn integrate_line<F: Fn(f64) -> f64>(&self, center: f64, scale: f64, h: F) -> f64 {
        let s = std::f64::consts::SQRT_2 * scale;
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * (t * t).exp() * h(center + s * t))
            .sum::<f64>()
            * s
    }
}
