//! Small dense complex linear algebra (r <= 8).

use num_complex::Complex64;

pub type C64 = Complex64;

/// LU factorisation with partial pivoting, in place. Returns the permutation
/// sign, or `None` when a pivot is exactly zero.
fn lu_in_place(a: &mut [Vec<C64>], perm: &mut [usize]) -> Option<f64> {
    let n = a.len();
    let mut sign = 1.0;
    for (i, p) in perm.iter_mut().enumerate() {
        *p = i;
    }
    for k in 0..n {
        let mut piv = k;
        let mut best = a[k][k].norm();
        for (i, row) in a.iter().enumerate().skip(k + 1) {
            let v = row[k].norm();
            if v > best {
                best = v;
                piv = i;
            }
        }
        if best == 0.0 {
            return None;
        }
        if piv != k {
            a.swap(piv, k);
            perm.swap(piv, k);
            sign = -sign;
        }
        let pivot = a[k][k];
        for i in k + 1..n {
            let f = a[i][k] / pivot;
            a[i][k] = f;
            for j in k + 1..n {
                let t = a[k][j];
                a[i][j] -= f * t;
            }
        }
    }
    Some(sign)
}

pub fn det(m: &[Vec<C64>]) -> C64 {
    let n = m.len();
    if n == 0 {
        return C64::new(1.0, 0.0);
    }
    let mut a = m.to_vec();
    let mut perm = vec![0; n];
    match lu_in_place(&mut a, &mut perm) {
        None => C64::new(0.0, 0.0),
        Some(sign) => {
            let mut d = C64::new(sign, 0.0);
            for (i, row) in a.iter().enumerate() {
                d *= row[i];
            }
            d
        }
    }
}

/// Solves `m x = b`. `None` if `m` is singular.
pub fn solve(m: &[Vec<C64>], b: &[C64]) -> Option<Vec<C64>> {
    let n = m.len();
    let mut a = m.to_vec();
    let mut perm = vec![0; n];
    lu_in_place(&mut a, &mut perm)?;
    let mut y: Vec<C64> = perm.iter().map(|&p| b[p]).collect();
    for i in 0..n {
        for j in 0..i {
            let t = a[i][j] * y[j];
            y[i] -= t;
        }
    }
    for i in (0..n).rev() {
        for j in i + 1..n {
            let t = a[i][j] * y[j];
            y[i] -= t;
        }
        y[i] /= a[i][i];
    }
    if y.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return None;
    }
    Some(y)
}

/// Real solve used for flag coefficients and tau-regularity.
pub fn solve_real(m: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let mc: Vec<Vec<C64>> = m
        .iter()
        .map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect())
        .collect();
    let bc: Vec<C64> = b.iter().map(|&x| C64::new(x, 0.0)).collect();
    solve(&mc, &bc).map(|v| v.into_iter().map(|z| z.re).collect())
}

pub fn max_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn det_with_pivoting() {
        let m = vec![vec![c(0.0), c(2.0)], vec![c(3.0), c(1.0)]];
        assert!((det(&m) - c(-6.0)).norm() < 1e-15);
        let s = vec![vec![c(1.0), c(2.0)], vec![c(2.0), c(4.0)]];
        assert_eq!(det(&s), c(0.0));
    }

    #[test]
    fn solve_roundtrip() {
        let m = vec![
            vec![C64::new(1.0, 1.0), c(2.0), c(0.5)],
            vec![c(0.0), c(1.0), C64::new(0.0, -1.0)],
            vec![c(3.0), c(0.0), c(1.0)],
        ];
        let x = vec![c(1.0), C64::new(0.0, 2.0), c(-1.0)];
        let b: Vec<C64> = m
            .iter()
            .map(|r| r.iter().zip(&x).map(|(a, b)| a * b).sum())
            .collect();
        let got = solve(&m, &b).unwrap();
        for (g, w) in got.iter().zip(&x) {
            assert!((g - w).norm() < 1e-13);
        }
    }
}
