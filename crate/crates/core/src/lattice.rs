//! Exact integer and rational linear algebra: Smith normal form, integer
//! kernels, Bareiss determinants and rank.

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Signed, Zero};

pub type Rational = Ratio<i64>;
pub type IMat = Vec<Vec<i64>>;

/// Smith normal form `d = p · a · q` with unimodular `p`, `q`.
#[derive(Debug, Clone)]
pub struct Smith {
    pub diag: Vec<i64>,
    pub p: IMat,
    pub q: IMat,
    pub rank: usize,
}

fn identity(n: usize) -> IMat {
    (0..n)
        .map(|i| (0..n).map(|j| i64::from(i == j)).collect())
        .collect()
}

pub fn smith_normal_form(a: &IMat) -> Smith {
    let m = a.len();
    let n = if m == 0 { 0 } else { a[0].len() };
    let mut d = a.clone();
    let mut p = identity(m);
    let mut q = identity(n);
    let mut t = 0;
    while t < m.min(n) {
        // pick the smallest nonzero entry in the remaining block
        let mut best: Option<(usize, usize)> = None;
        for i in t..m {
            for j in t..n {
                if d[i][j] != 0 && best.is_none_or(|(bi, bj)| d[i][j].abs() < d[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((bi, bj)) = best else { break };
        d.swap(t, bi);
        p.swap(t, bi);
        for row in d.iter_mut() {
            row.swap(t, bj);
        }
        for row in q.iter_mut() {
            row.swap(t, bj);
        }
        loop {
            let mut dirty = false;
            // clear column t
            for i in t + 1..m {
                if d[i][t] != 0 {
                    let f = Integer::div_floor(&d[i][t], &d[t][t]);
                    for j in 0..n {
                        d[i][j] -= f * d[t][j];
                    }
                    for j in 0..m {
                        p[i][j] -= f * p[t][j];
                    }
                    if d[i][t] != 0 {
                        d.swap(t, i);
                        p.swap(t, i);
                        dirty = true;
                    }
                }
            }
            // clear row t
            for j in t + 1..n {
                if d[t][j] != 0 {
                    let f = Integer::div_floor(&d[t][j], &d[t][t]);
                    for row in d.iter_mut() {
                        row[j] -= f * row[t];
                    }
                    for row in q.iter_mut() {
                        row[j] -= f * row[t];
                    }
                    if d[t][j] != 0 {
                        for row in d.iter_mut() {
                            row.swap(t, j);
                        }
                        for row in q.iter_mut() {
                            row.swap(t, j);
                        }
                        dirty = true;
                    }
                }
            }
            if dirty {
                continue;
            }
            // divisibility of the remaining block
            let pivot = d[t][t];
            let mut fixed = false;
            'outer: for i in t + 1..m {
                for j in t + 1..n {
                    if d[i][j] % pivot != 0 {
                        for k in 0..n {
                            d[t][k] += d[i][k];
                        }
                        for k in 0..m {
                            p[t][k] += p[i][k];
                        }
                        fixed = true;
                        break 'outer;
                    }
                }
            }
            if !fixed {
                break;
            }
        }
        if d[t][t] < 0 {
            for j in 0..n {
                d[t][j] = -d[t][j];
            }
            for j in 0..m {
                p[t][j] = -p[t][j];
            }
        }
        t += 1;
    }
    let diag: Vec<i64> = (0..m.min(n)).map(|i| d[i][i]).collect();
    let rank = diag.iter().filter(|&&x| x != 0).count();
    Smith { diag, p, q, rank }
}

/// Basis of the integer kernel `{x ∈ Z^n : a x = 0}` as columns.
pub fn integer_kernel(a: &IMat) -> Vec<Vec<i64>> {
    let n = if a.is_empty() { 0 } else { a[0].len() };
    let s = smith_normal_form(a);
    (s.rank..n)
        .map(|j| (0..n).map(|i| s.q[i][j]).collect())
        .collect()
}

/// Bareiss fraction-free determinant.
pub fn det_i128(m: &[Vec<i128>]) -> i128 {
    let n = m.len();
    if n == 0 {
        return 1;
    }
    let mut a = m.to_vec();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n {
        if a[k][k] == 0 {
            let Some(sw) = (k + 1..n).find(|&i| a[i][k] != 0) else {
                return 0;
            };
            a.swap(k, sw);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = a[i][j]
                    .checked_mul(a[k][k])
                    .and_then(|x| x.checked_sub(a[i][k].checked_mul(a[k][j])?))
                    .expect("integer overflow in Bareiss elimination");
                a[i][j] = v / prev;
            }
        }
        prev = a[k][k];
    }
    sign * a[n - 1][n - 1]
}

pub fn det_i64(m: &[Vec<i64>]) -> i64 {
    let w: Vec<Vec<i128>> = m
        .iter()
        .map(|r| r.iter().map(|&x| x as i128).collect())
        .collect();
    i64::try_from(det_i128(&w)).expect("determinant exceeds i64")
}

/// Rank of a rational/integer row set via exact elimination.
pub fn rank_i128(rows: &[Vec<i128>]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let n = rows[0].len();
    let mut a: Vec<Vec<i128>> = rows.to_vec();
    let mut rank = 0;
    for col in 0..n {
        let Some(piv) = (rank..a.len()).find(|&i| a[i][col] != 0) else {
            continue;
        };
        a.swap(rank, piv);
        for i in rank + 1..a.len() {
            if a[i][col] != 0 {
                let f = a[i][col];
                let g = a[rank][col];
                let h = f.gcd(&g);
                let (fm, gm) = (f / h, g / h);
                let mut content = 0i128;
                for j in 0..n {
                    a[i][j] = a[i][j]
                        .checked_mul(gm)
                        .and_then(|x| x.checked_sub(a[rank][j].checked_mul(fm)?))
                        .expect("integer overflow in rank elimination");
                    content = content.gcd(&a[i][j]);
                }
                if content > 1 {
                    for v in a[i].iter_mut() {
                        *v /= content;
                    }
                }
            }
        }
        rank += 1;
        if rank == a.len() {
            break;
        }
    }
    rank
}

pub fn rank_i64(rows: &[Vec<i64>]) -> usize {
    let w: Vec<Vec<i128>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| x as i128).collect())
        .collect();
    rank_i128(&w)
}

pub fn gcd_slice(v: &[i64]) -> i64 {
    v.iter().fold(0i64, |g, &x| g.gcd(&x))
}

/// Solves `m x = b` over the rationals; `None` if singular.
pub fn solve_rational(m: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
    let n = m.len();
    let mut a: Vec<Vec<Rational>> = m
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(*bi);
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&i| !a[i][col].is_zero())?;
        a.swap(col, piv);
        let inv = Rational::one() / a[col][col];
        for v in a[col].iter_mut() {
            *v *= inv;
        }
        for i in 0..n {
            if i != col && !a[i][col].is_zero() {
                let f = a[i][col];
                for j in col..=n {
                    let t = a[col][j];
                    a[i][j] -= f * t;
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[n]).collect())
}

pub fn det_rational(m: &[Vec<Rational>]) -> Rational {
    let n = m.len();
    let mut a = m.to_vec();
    let mut d = Rational::one();
    for col in 0..n {
        let Some(piv) = (col..n).find(|&i| !a[i][col].is_zero()) else {
            return Rational::zero();
        };
        if piv != col {
            a.swap(col, piv);
            d = -d;
        }
        d *= a[col][col];
        for i in col + 1..n {
            let f = a[i][col] / a[col][col];
            for j in col..n {
                let t = a[col][j];
                a[i][j] -= f * t;
            }
        }
    }
    d
}

pub fn to_rational(v: &[i64]) -> Vec<Rational> {
    v.iter().map(|&x| Rational::from_integer(x)).collect()
}

pub fn is_nonnegative(v: &[Rational]) -> bool {
    v.iter().all(|x| !x.is_negative())
}
