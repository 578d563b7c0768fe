//! Shared numerical routines: Gauss-Legendre quadrature, adaptive Simpson
//! integration, monotone bisection, and seed derivation for parallel trials.

/// Nodes and weights of an n-point Gauss-Legendre rule on [-1, 1].
///
/// Exact for polynomials up to degree 2n - 1.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "quadrature rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Chebyshev-style initial guess, then Newton on P_n.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre_with_derivative(n, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            let (_, dp) = legendre_with_derivative(n, x);
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integrate f over [a, b].
    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }
}

/// (P_n(x), P_n'(x)) by the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut prev = 1.0;
    let mut cur = x;
    for k in 2..=n {
        let next = ((2 * k - 1) as f64 * x * cur - (k - 1) as f64 * prev) / k as f64;
        prev = cur;
        cur = next;
    }
    let dp = n as f64 * (x * cur - prev) / (x * x - 1.0);
    (cur, dp)
}

/// Adaptive Simpson quadrature of f over [a, b] to absolute tolerance `tol`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let mid = 0.5 * (a + b);
    let fm = f(mid);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 60)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let mid = 0.5 * (a + b);
    let lm = 0.5 * (a + mid);
    let rm = 0.5 * (mid + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (mid - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - mid) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        simpson_step(f, a, mid, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + simpson_step(f, mid, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}

/// Largest x in [lo, hi] at which a nonincreasing function stays non-negative,
/// located to within `tol` by bisection.
///
/// Assumes g(lo) >= 0 and g(hi) < 0 (or g never goes negative, in which case
/// hi is returned).
pub fn bisect_nonneg_boundary(
    mut lo: f64,
    mut hi: f64,
    tol: f64,
    mut g: impl FnMut(f64) -> f64,
) -> f64 {
    debug_assert!(lo <= hi);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break; // interval no longer splittable in f64
        }
        if g(mid) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Derive an independent 64-bit seed from a base seed and a stream label
/// (SplitMix64 finalizer). Used to give each simulation trial its own
/// reproducible RNG stream.
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut z = base ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_legendre_exact_on_polynomials() {
        let rule = GaussLegendre::new(8);
        // degree 15 is within the exactness range of an 8-point rule
        let val = rule.integrate(0.0, 1.0, |x| x.powi(15));
        assert_relative_eq!(val, 1.0 / 16.0, max_relative = 1e-13);
    }

    #[test]
    fn gauss_legendre_matches_known_integral() {
        let rule = GaussLegendre::new(64);
        let val = rule.integrate(0.0, 1.0, f64::exp);
        assert_relative_eq!(val, std::f64::consts::E - 1.0, max_relative = 1e-14);
    }

    #[test]
    fn adaptive_simpson_hits_tolerance() {
        let val = adaptive_simpson(&|x: f64| (4.0 * x).sin().powi(2), 0.0, 1.0, 1e-11);
        let exact = 0.5 - (8.0f64).sin() / 16.0;
        assert!((val - exact).abs() < 1e-10);
    }

    #[test]
    fn adaptive_simpson_narrow_peak() {
        // mass concentrated on a 1e-4-wide region, like a Beta(1, 10^4) density
        let beta = 1.0e4;
        let val = adaptive_simpson(&|x: f64| beta * (1.0 - x).powf(beta - 1.0), 0.0, 1.0, 1e-10);
        assert!((val - 1.0).abs() < 1e-8, "got {val}");
    }

    #[test]
    fn bisection_finds_monotone_boundary() {
        let root = bisect_nonneg_boundary(0.0, 4.0, 1e-12, |x| 2.0 - x * x);
        assert!((root - 2.0f64.sqrt()).abs() < 1e-11);
    }

    #[test]
    fn derive_seed_spreads_streams() {
        let a = derive_seed(42, 0);
        let b = derive_seed(42, 1);
        let c = derive_seed(43, 0);
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_eq!(a, derive_seed(42, 0));
    }
}
