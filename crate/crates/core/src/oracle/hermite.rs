use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

/// Gauss–Hermite rule for ∫ f(z) e^{−z²} dz. Weights are kept as natural
/// logarithms: for high orders the extreme weights underflow long before the
/// nodes stop mattering in exponentially weighted sums.
#[derive(Debug, Clone)]
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub log_weights: Vec<f64>,
}

const RESCALE: f64 = 1e150;

impl GaussHermite {
    /// Nodes from the eigenvalues of the Jacobi matrix, polished by Newton
    /// steps on the orthonormal Hermite recurrence; weights come from the
    /// recurrence derivative. The recurrence values are rescaled on the fly,
    /// so orders in the thousands neither overflow nor lose the tiny weights
    /// of the outer nodes.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss–Hermite order must be positive");
        let mut eig = jacobi_eigenvalues(n);
        eig.sort_by(|a, b| a.total_cmp(b));
        let mut nodes = vec![0.0; n];
        let mut log_weights = vec![0.0; n];
        for i in n / 2..n {
            let mut z = eig[i].max(0.0);
            let mut eval = recurrence(n, z);
            for _ in 0..20 {
                let step = eval.0 / eval.1;
                z -= step;
                eval = recurrence(n, z);
                if step.abs() <= 1e-15 * z.abs().max(1.0) {
                    break;
                }
            }
            if n % 2 == 1 && i == n / 2 {
                z = 0.0;
                eval = recurrence(n, z);
            }
            let (_, pp, log_scale) = eval;
            let lw = 2f64.ln() - 2.0 * pp.abs().ln() - 2.0 * log_scale;
            nodes[i] = z;
            nodes[n - 1 - i] = -z;
            log_weights[i] = lw;
            log_weights[n - 1 - i] = lw;
        }
        Self { nodes, log_weights }
    }

    /// Shared, lazily built rule of order `n`.
    pub fn cached(n: usize) -> Arc<GaussHermite> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussHermite>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        if let Some(rule) = cache.lock().unwrap().get(&n) {
            return rule.clone();
        }
        let rule = Arc::new(GaussHermite::new(n));
        cache.lock().unwrap().entry(n).or_insert(rule).clone()
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }
}

/// Orthonormal Hermite recurrence at `z`: returns `(p_n, √(2n)·p_{n−1},
/// ln of the factor divided out)`. Only the ratio of the first two matters
/// for Newton; the weight uses the second together with the log scale.
fn recurrence(n: usize, z: f64) -> (f64, f64, f64) {
    let (mut p1, mut p2) = (PI.powf(-0.25), 0.0f64);
    let mut log_scale = 0.0;
    for j in 1..=n {
        let jf = j as f64;
        let p3 = p2;
        p2 = p1;
        p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
        if p1.abs() > RESCALE {
            p1 /= RESCALE;
            p2 /= RESCALE;
            log_scale += RESCALE.ln();
        }
    }
    (p1, (2.0 * n as f64).sqrt() * p2, log_scale)
}

/// Eigenvalues of the symmetric tridiagonal Jacobi matrix of the Hermite
/// weight (zero diagonal, off-diagonal √(k/2)) by implicit QL.
fn jacobi_eigenvalues(n: usize) -> Vec<f64> {
    let mut d = vec![0.0f64; n];
    let mut e: Vec<f64> = (0..n).map(|i| if i + 1 < n { ((i + 1) as f64 / 2.0).sqrt() } else { 0.0 }).collect();
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            assert!(iter < 100, "QL iteration did not converge");
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0f64, 1.0f64, 0.0f64);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d
}
