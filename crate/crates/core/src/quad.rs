//! Quadrature support: Gauss-Legendre nodes and the Littlewood-Paley
//! norm formula for polynomials.

use num_traits::Float;

use crate::coeffs::CoeffVec;
use crate::scalar::Scalar;

/// Gauss-Legendre nodes and weights on `(-1, 1)`, by Newton iteration on
/// the Legendre polynomial from the Chebyshev initial guess.
pub fn gauss_legendre<T: Scalar>(n: usize) -> (Vec<T>, Vec<T>) {
    assert!(n >= 1);
    let mut nodes = vec![T::zero(); n];
    let mut weights = vec![T::zero(); n];
    for i in 0..n {
        // Initial guess: Chebyshev node.
        let mut x = Float::cos(T::PI() * (T::of_usize(i) + T::of(0.75)) / (T::of_usize(n) + T::of(0.5)));
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if Float::abs(dx) < T::of(1e-15) {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        nodes[i] = x;
        weights[i] = T::of(2.0) / ((T::one() - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre_with_derivative<T: Scalar>(n: usize, x: T) -> (T, T) {
    let mut p0 = T::one();
    let mut p1 = x;
    if n == 0 {
        return (p0, T::zero());
    }
    for k in 2..=n {
        let kf = T::of_usize(k);
        let p2 = ((T::of(2.0) * kf - T::one()) * x * p1 - (kf - T::one()) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = T::of_usize(n) * (x * p1 - p0) / (x * x - T::one());
    (p1, dp)
}

/// Integrate `g` over `(0, 1]` against the weight `-ln r`, using
/// Gauss-Legendre panels on a dyadic mesh graded toward the logarithmic
/// singularity at 0. `nodes_per_panel` Gauss-Legendre nodes on each of the
/// panels `[2^{-k-1}, 2^{-k}]`, `k = 0..40`; the leftover mass below
/// `2^{-41}` is negligible for bounded `g` vanishing at 0.
pub fn integrate_log_weight<T: Scalar>(g: impl Fn(T) -> T, nodes_per_panel: usize) -> T {
    let (xs, ws) = gauss_legendre::<T>(nodes_per_panel.max(4));
    let mut total = T::zero();
    let mut hi = T::one();
    for _ in 0..=40 {
        let lo = hi * T::of(0.5);
        let mid = (hi + lo) * T::of(0.5);
        let half = (hi - lo) * T::of(0.5);
        let mut panel = T::zero();
        for (x, w) in xs.iter().zip(ws.iter()) {
            let r = mid + half * *x;
            panel += *w * g(r) * (-Float::ln(r));
        }
        total += panel * half;
        hi = lo;
    }
    total
}

/// Littlewood-Paley norm of a polynomial:
/// `|f(0)|^2 + int_D |f'|^2 log(1/|z|^2) d lambda`, with `lambda` the
/// Lebesgue measure normalized so `lambda(D) = 1`. The angular integral is
/// exact by Parseval; the radial integral uses the graded Gauss-Legendre
/// rule above. Agrees with the squared coefficient norm.
pub fn littlewood_paley_norm<T: Scalar>(f: &CoeffVec<T>, radial_nodes: usize) -> T {
    let head = if f.is_empty() { T::zero() } else { f.coeffs[0].norm_sqr() };
    let b = f.derivative();
    if b.is_empty() {
        return head;
    }
    let moduli: Vec<T> = b.coeffs.iter().map(|c| c.norm_sqr()).collect();
    // Angular integral of |f'|^2 at radius r is 2 pi sum |b_n|^2 r^{2n};
    // together with the polar Jacobian this leaves
    // 4 int_0^1 (sum |b_n|^2 r^{2n+1}) (-ln r) dr.
    let g = |r: T| {
        let r2 = r * r;
        let mut acc = T::zero();
        for bn in moduli.iter().rev() {
            acc = acc * r2 + *bn;
        }
        acc * r
    };
    head + T::of(4.0) * integrate_log_weight(g, radial_nodes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (xs, ws) = gauss_legendre::<f64>(8);
        // Exact for degree <= 15: check x^6 over (-1,1) -> 2/7.
        let got: f64 = xs.iter().zip(&ws).map(|(x, w)| w * x.powi(6)).sum();
        assert!((got - 2.0 / 7.0).abs() < 1e-14);
        let total: f64 = ws.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
    }

    #[test]
    fn log_weight_moment_identity() {
        // 4 int_0^1 r^{2n-1} (-ln r) dr = 1/n^2.
        for n in 1..=20usize {
            let got = 4.0 * integrate_log_weight(|r: f64| r.powi(2 * n as i32 - 1), 16);
            assert!(
                (got - 1.0 / (n * n) as f64).abs() < 1e-12,
                "n = {n}: got {got}"
            );
        }
    }

    #[test]
    fn lp_norm_of_constant() {
        let f = CoeffVec::new(vec![Complex::new(1.0_f64, 0.0)]);
        assert!((littlewood_paley_norm(&f, 16) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn lp_norm_of_monomials() {
        for n in 1..=16usize {
            let f = CoeffVec::<f64>::basis(n, n + 1);
            let got = littlewood_paley_norm(&f, 16);
            assert!((got - 1.0).abs() < 1e-10, "z^{n}: got {got}");
        }
    }

    #[test]
    fn lp_norm_matches_coefficient_norm() {
        // Deterministic pseudo-random polynomial of degree 10.
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let f = CoeffVec::new((0..11).map(|_| Complex::new(next(), next())).collect());
        let got = littlewood_paley_norm(&f, 16);
        assert!((got - f.norm_sqr()).abs() < 1e-10);
    }
}
