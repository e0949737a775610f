//! Small dense linear algebra for the n <= O(10) systems that occur here:
//! partially pivoted LU over f64 and Complex64, determinants, and
//! Gauss-Legendre nodes. Hand-rolled to keep the dependency surface flat.

use crate::{Error, Result, C};

/// Solve A x = b in place for complex square A (partial pivoting).
pub fn csolve(a: &[Vec<C>], b: &[C]) -> Result<Vec<C>> {
    let n = b.len();
    let mut m: Vec<Vec<C>> = a.iter().map(|r| r.to_vec()).collect();
    let mut x = b.to_vec();
    for k in 0..n {
        let (piv, mag) = (k..n)
            .map(|i| (i, m[i][k].norm()))
            .max_by(|p, q| p.1.total_cmp(&q.1))
            .unwrap();
        if mag < 1e-300 {
            return Err(Error::SingularJacobian);
        }
        m.swap(k, piv);
        x.swap(k, piv);
        for i in k + 1..n {
            let f = m[i][k] / m[k][k];
            for j in k..n {
                let t = m[k][j];
                m[i][j] -= f * t;
            }
            let t = x[k];
            x[i] -= f * t;
        }
    }
    for k in (0..n).rev() {
        for j in k + 1..n {
            let t = x[j];
            x[k] -= m[k][j] * t;
        }
        x[k] /= m[k][k];
    }
    Ok(x)
}

/// Determinant of a complex square matrix. Empty matrix has determinant 1.
pub fn cdet(a: &[Vec<C>]) -> C {
    let n = a.len();
    if n == 0 {
        return C::new(1.0, 0.0);
    }
    let mut m: Vec<Vec<C>> = a.iter().map(|r| r.to_vec()).collect();
    let mut det = C::new(1.0, 0.0);
    for k in 0..n {
        let (piv, mag) = (k..n)
            .map(|i| (i, m[i][k].norm()))
            .max_by(|p, q| p.1.total_cmp(&q.1))
            .unwrap();
        if mag == 0.0 {
            return C::new(0.0, 0.0);
        }
        if piv != k {
            m.swap(k, piv);
            det = -det;
        }
        det *= m[k][k];
        for i in k + 1..n {
            let f = m[i][k] / m[k][k];
            for j in k..n {
                let t = m[k][j];
                m[i][j] -= f * t;
            }
        }
    }
    det
}

/// Determinant and infinity-norm condition estimate of a real square matrix.
pub fn rdet_cond(a: &[Vec<f64>]) -> (f64, f64) {
    let n = a.len();
    if n == 0 {
        return (1.0, 1.0);
    }
    let norm_a = a
        .iter()
        .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut m: Vec<Vec<f64>> = a.iter().map(|r| r.to_vec()).collect();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut det = 1.0;
    for k in 0..n {
        let (piv, mag) = (k..n)
            .map(|i| (i, m[i][k].abs()))
            .max_by(|p, q| p.1.total_cmp(&q.1))
            .unwrap();
        if mag == 0.0 {
            return (0.0, f64::INFINITY);
        }
        if piv != k {
            m.swap(k, piv);
            perm.swap(k, piv);
            det = -det;
        }
        det *= m[k][k];
        for i in k + 1..n {
            m[i][k] /= m[k][k];
            for j in k + 1..n {
                m[i][j] -= m[i][k] * m[k][j];
            }
        }
    }
    // ||A^-1||_inf by solving for each unit vector through the stored factors.
    let mut norm_inv_cols = vec![0.0; n];
    for col in 0..n {
        let mut x = vec![0.0; n];
        for (i, &pi) in perm.iter().enumerate() {
            x[i] = if pi == col { 1.0 } else { 0.0 };
        }
        for k in 0..n {
            for i in k + 1..n {
                x[i] -= m[i][k] * x[k];
            }
        }
        for k in (0..n).rev() {
            for j in k + 1..n {
                x[k] -= m[k][j] * x[j];
            }
            x[k] /= m[k][k];
        }
        for i in 0..n {
            norm_inv_cols[i] += x[i].abs();
        }
    }
    let norm_inv = norm_inv_cols.iter().copied().fold(0.0, f64::max);
    (det, norm_a * norm_inv)
}

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Chebyshev-based initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
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
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_solve_roundtrip() {
        let a = vec![
            vec![C::new(2.0, 1.0), C::new(0.5, -0.3)],
            vec![C::new(-1.0, 0.2), C::new(3.0, 0.0)],
        ];
        let x_true = [C::new(1.0, -2.0), C::new(0.5, 0.5)];
        let b: Vec<C> = (0..2).map(|i| a[i][0] * x_true[0] + a[i][1] * x_true[1]).collect();
        let x = csolve(&a, &b).unwrap();
        for (xi, ti) in x.iter().zip(x_true.iter()) {
            assert!((xi - ti).norm() < 1e-13);
        }
    }

    #[test]
    fn real_det_matches_cofactor_expansion() {
        let a = vec![
            vec![2.0, -1.0, 0.5],
            vec![0.3, 4.0, -2.0],
            vec![1.0, 0.0, 1.5],
        ];
        let (det, cond) = rdet_cond(&a);
        let expect = 2.0 * (4.0 * 1.5 - (-2.0) * 0.0) - (-1.0) * (0.3 * 1.5 - (-2.0) * 1.0)
            + 0.5 * (0.3 * 0.0 - 4.0 * 1.0);
        assert!((det - expect).abs() < 1e-12 * expect.abs());
        assert!(cond > 1.0 && cond.is_finite());
    }

    #[test]
    fn empty_determinants_are_one() {
        assert_eq!(cdet(&[]).re, 1.0);
        assert_eq!(rdet_cond(&[]).0, 1.0);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (xs, ws) = gauss_legendre(12);
        // degree 23 or less is exact; x^10 over [-1,1] = 2/11
        let val: f64 = xs.iter().zip(&ws).map(|(x, w)| w * x.powi(10)).sum();
        assert!((val - 2.0 / 11.0).abs() < 1e-14);
        let total: f64 = ws.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
    }
}
