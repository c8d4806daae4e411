//! Gauss rules and barycentric polynomial tools.

use nalgebra::DMatrix;

/// Legendre `P_n(x)` and `P_{n-1}(x)` by the three-term recurrence.
fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p0, mut p1) = (1.0, x);
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    (p1, p0)
}

fn legendre_deriv(n: usize, x: f64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let (pn, pm) = legendre_pair(n, x);
    n as f64 * (x * pn - pm) / (x * x - 1.0)
}

/// Gauss-Legendre nodes (ascending) and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        for _ in 0..100 {
            let (p, _) = legendre_pair(n, z);
            let dz = p / legendre_deriv(n, z);
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let d = legendre_deriv(n, z);
        let wi = 2.0 / ((1.0 - z * z) * d * d);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// Gauss-Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    (
        x.iter().map(|&t| c + h * t).collect(),
        w.iter().map(|&t| h * t).collect(),
    )
}

/// Gauss-Radau rule on `(0, 1]` with the fixed node at `r = 1`; nodes ascending.
///
/// Built from the left-fixed rule on `[-1, 1]` (interior nodes are the roots
/// of `(P_{n-1} + P_n)/(1 + x)`) under `r = (1 - x)/2`.
pub fn gauss_radau_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2);
    let nf = n as f64;
    let q = |x: f64| {
        let (pn, pm) = legendre_pair(n, x);
        pn + pm
    };
    let dq = |x: f64| legendre_deriv(n, x) + legendre_deriv(n - 1, x);
    let mut xs = vec![-1.0];
    for k in 1..n {
        let mut z = -(2.0 * std::f64::consts::PI * k as f64 / (2.0 * nf - 1.0)).cos();
        for _ in 0..100 {
            let dz = q(z) / dq(z);
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        xs.push(z);
    }
    let mut ws = vec![2.0 / (nf * nf)];
    for &x in &xs[1..] {
        let (_, pm) = legendre_pair(n, x);
        ws.push((1.0 - x) / (nf * nf * pm * pm));
    }
    let mut pairs: Vec<(f64, f64)> = xs
        .iter()
        .zip(&ws)
        .map(|(&x, &w)| (0.5 * (1.0 - x), 0.5 * w))
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    pairs.last_mut().unwrap().0 = 1.0;
    pairs.into_iter().unzip()
}

/// Barycentric weights normalised to unit maximum modulus.
pub fn barycentric_weights(nodes: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    // accumulate in log-magnitude to keep large node counts in range
    let mut logs = vec![0.0; n];
    let mut signs = vec![1.0; n];
    for j in 0..n {
        for k in 0..n {
            if k != j {
                let d = nodes[j] - nodes[k];
                logs[j] -= d.abs().ln();
                if d < 0.0 {
                    signs[j] = -signs[j];
                }
            }
        }
    }
    let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    logs.iter()
        .zip(&signs)
        .map(|(l, s)| s * (l - top).exp())
        .collect()
}

/// Spectral differentiation matrix for the interpolant through `nodes`.
pub fn differentiation_matrix(nodes: &[f64], bary: &[f64]) -> DMatrix<f64> {
    let n = nodes.len();
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut diag = 0.0;
        for j in 0..n {
            if i != j {
                let v = bary[j] / bary[i] / (nodes[i] - nodes[j]);
                d[(i, j)] = v;
                diag -= v;
            }
        }
        d[(i, i)] = diag;
    }
    d
}

/// Row of Lagrange basis values at `x`.
pub fn interpolation_row(nodes: &[f64], bary: &[f64], x: f64) -> Vec<f64> {
    if let Some(k) = nodes.iter().position(|&t| t == x) {
        let mut row = vec![0.0; nodes.len()];
        row[k] = 1.0;
        return row;
    }
    let terms: Vec<f64> = nodes.iter().zip(bary).map(|(&t, &w)| w / (x - t)).collect();
    let total: f64 = terms.iter().sum();
    terms.into_iter().map(|v| v / total).collect()
}

/// Interpolation matrix from `nodes` to `points` (rows index points).
pub fn interpolation_matrix(nodes: &[f64], bary: &[f64], points: &[f64]) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(points.len(), nodes.len());
    for (i, &x) in points.iter().enumerate() {
        for (j, v) in interpolation_row(nodes, bary, x).into_iter().enumerate() {
            m[(i, j)] = v;
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(10);
        for k in 0..20 {
            let approx: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k)).sum();
            let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
            assert!((approx - exact).abs() < 1e-14, "k={k}");
        }
    }

    #[test]
    fn radau_integrates_polynomials() {
        for n in [8, 33, 64] {
            let (r, w) = gauss_radau_unit(n);
            assert_eq!(*r.last().unwrap(), 1.0);
            assert!(r[0] > 0.0);
            for k in 0..(2 * n - 1) {
                let approx: f64 = r.iter().zip(&w).map(|(r, w)| w * r.powi(k as i32)).sum();
                assert!((approx - 1.0 / (k as f64 + 1.0)).abs() < 1e-14, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn differentiates_monomials() {
        let (r, _) = gauss_radau_unit(16);
        let b = barycentric_weights(&r);
        let d = differentiation_matrix(&r, &b);
        for k in 0..=8 {
            let v = nalgebra::DVector::from_iterator(16, r.iter().map(|x| x.powi(k)));
            let dv = &d * v;
            for (i, x) in r.iter().enumerate() {
                let exact = if k == 0 { 0.0 } else { k as f64 * x.powi(k - 1) };
                assert!((dv[i] - exact).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn interpolation_reproduces_cubic() {
        let (r, _) = gauss_radau_unit(8);
        let b = barycentric_weights(&r);
        let row = interpolation_row(&r, &b, 0.0);
        let v: f64 = row.iter().zip(&r).map(|(l, x)| l * (1.0 + x * x * x)).sum();
        assert!((v - 1.0).abs() < 1e-13);
    }
}
