//! Exact lattice-polytope geometry: affine dimension, placing triangulations,
//! normalized volumes and facet normals, all in `i128`.

use std::collections::HashMap;

pub type Point = Vec<i64>;

/// Determinant by fraction-free elimination.
pub fn det_i128(m: &[Vec<i128>]) -> i128 {
    let n = m.len();
    if n == 0 {
        return 1;
    }
    let mut a: Vec<Vec<i128>> = m.to_vec();
    let mut sign = 1;
    let mut prev = 1i128;
    for k in 0..n {
        if a[k][k] == 0 {
            let Some(p) = (k + 1..n).find(|&i| a[i][k] != 0) else {
                return 0;
            };
            a.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
            a[i][k] = 0;
        }
        prev = a[k][k];
    }
    sign * a[n - 1][n - 1]
}

/// Rank of an integer matrix given by rows.
pub fn rank(rows: &[Vec<i128>]) -> usize {
    let mut a: Vec<Vec<i128>> = rows.iter().filter(|r| r.iter().any(|&x| x != 0)).cloned().collect();
    if a.is_empty() {
        return 0;
    }
    let cols = a[0].len();
    let mut rk = 0;
    for c in 0..cols {
        let Some(p) = (rk..a.len()).find(|&i| a[i][c] != 0) else {
            continue;
        };
        a.swap(rk, p);
        for i in rk + 1..a.len() {
            if a[i][c] != 0 {
                let (f, g) = (a[rk][c], a[i][c]);
                for j in 0..cols {
                    a[i][j] = a[i][j] * f - a[rk][j] * g;
                }
                let gcd = a[i].iter().fold(0i128, |acc, &x| num_integer::Integer::gcd(&acc, &x));
                if gcd > 1 {
                    for x in &mut a[i] {
                        *x /= gcd;
                    }
                }
            }
        }
        rk += 1;
        if rk == a.len() {
            break;
        }
    }
    rk
}

/// Dimension of the affine hull of a point set (`-1` for the empty set).
pub fn affine_dim(points: &[Point]) -> i64 {
    let Some(p0) = points.first() else {
        return -1;
    };
    let diffs: Vec<Vec<i128>> = points
        .iter()
        .map(|p| p.iter().zip(p0).map(|(a, b)| (*a - *b) as i128).collect())
        .collect();
    rank(&diffs) as i64
}

/// Vertices of the Minkowski sum are among the pairwise sums; duplicates are removed.
pub fn minkowski_sum(a: &[Point], b: &[Point]) -> Vec<Point> {
    let mut out: Vec<Point> = a
        .iter()
        .flat_map(|p| b.iter().map(move |q| p.iter().zip(q).map(|(x, y)| x + y).collect()))
        .collect();
    out.sort();
    out.dedup();
    out
}

/// Outward facet normal `n` (primitive) and offset `c` with `n·x ≤ c` on the polytope.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Facet {
    pub normal: Vec<i64>,
    pub offset: i64,
}

/// Result of a placing triangulation of a full-dimensional point set.
#[derive(Debug, Clone)]
pub struct Hull {
    /// `d! · Vol`, an integer for lattice polytopes.
    pub normalized_volume: i128,
    pub facets: Vec<Facet>,
}

struct BFacet {
    verts: Vec<usize>,
    normal: Vec<i128>,
    offset: i128,
}

fn hyperplane(pts: &[Point], verts: &[usize]) -> (Vec<i128>, i128) {
    let d = pts[verts[0]].len();
    let p0 = &pts[verts[0]];
    let rows: Vec<Vec<i128>> = verts[1..]
        .iter()
        .map(|&v| pts[v].iter().zip(p0).map(|(a, b)| (*a - *b) as i128).collect())
        .collect();
    let normal: Vec<i128> = (0..d)
        .map(|k| {
            let minor: Vec<Vec<i128>> = rows
                .iter()
                .map(|r| r.iter().enumerate().filter(|&(j, _)| j != k).map(|(_, x)| *x).collect())
                .collect();
            let s = if k % 2 == 0 { 1 } else { -1 };
            s * det_i128(&minor)
        })
        .collect();
    let offset = dot(&normal, p0);
    (normal, offset)
}

fn dot(n: &[i128], p: &[i64]) -> i128 {
    n.iter().zip(p).map(|(a, b)| a * *b as i128).sum()
}

fn simplex_volume(pts: &[Point], verts: &[usize]) -> i128 {
    let p0 = &pts[verts[0]];
    let rows: Vec<Vec<i128>> = verts[1..]
        .iter()
        .map(|&v| pts[v].iter().zip(p0).map(|(a, b)| (*a - *b) as i128).collect())
        .collect();
    det_i128(&rows).abs()
}

/// Placing triangulation in the given order. Returns `None` when the points
/// do not span the ambient space.
pub fn hull(points: &[Point]) -> Option<Hull> {
    let d = points.first()?.len();
    if d == 0 {
        return None;
    }
    // initial simplex, greedily
    let mut simplex = vec![0usize];
    let mut diffs: Vec<Vec<i128>> = Vec::new();
    for (i, p) in points.iter().enumerate().skip(1) {
        if simplex.len() == d + 1 {
            break;
        }
        let row: Vec<i128> = p.iter().zip(&points[0]).map(|(a, b)| (*a - *b) as i128).collect();
        diffs.push(row);
        if rank(&diffs) == simplex.len() {
            simplex.push(i);
        } else {
            diffs.pop();
        }
    }
    if simplex.len() < d + 1 {
        return None;
    }
    // interior reference point times (d+1)
    let interior: Vec<i128> = (0..d)
        .map(|k| simplex.iter().map(|&v| points[v][k] as i128).sum())
        .collect();
    let scale = (d + 1) as i128;
    let orient = |verts: Vec<usize>| -> BFacet {
        let (mut n, mut c) = hyperplane(points, &verts);
        let side: i128 = n.iter().zip(&interior).map(|(a, b)| a * b).sum::<i128>() - scale * c;
        if side > 0 {
            n.iter_mut().for_each(|x| *x = -*x);
            c = -c;
        }
        BFacet { verts, normal: n, offset: c }
    };
    let mut volume = simplex_volume(points, &simplex);
    let mut boundary: Vec<BFacet> = (0..=d)
        .map(|skip| orient(simplex.iter().enumerate().filter(|&(j, _)| j != skip).map(|(_, v)| *v).collect()))
        .collect();
    let in_simplex: Vec<bool> = (0..points.len()).map(|i| simplex.contains(&i)).collect();
    for (i, p) in points.iter().enumerate() {
        if in_simplex[i] {
            continue;
        }
        let visible: Vec<usize> = boundary
            .iter()
            .enumerate()
            .filter(|(_, f)| dot(&f.normal, p) > f.offset)
            .map(|(k, _)| k)
            .collect();
        if visible.is_empty() {
            continue;
        }
        let mut ridges: HashMap<Vec<usize>, usize> = HashMap::new();
        for &k in &visible {
            let f = &boundary[k];
            let mut sv = f.verts.clone();
            sv.push(i);
            volume += simplex_volume(points, &sv);
            for skip in 0..d {
                let mut r: Vec<usize> = f.verts.iter().enumerate().filter(|&(j, _)| j != skip).map(|(_, v)| *v).collect();
                r.sort_unstable();
                *ridges.entry(r).or_insert(0) += 1;
            }
        }
        let mut horizon: Vec<Vec<usize>> = ridges.into_iter().filter(|(_, c)| *c == 1).map(|(r, _)| r).collect();
        horizon.sort();
        let mut keep = vec![true; boundary.len()];
        for &k in &visible {
            keep[k] = false;
        }
        let mut next: Vec<BFacet> = boundary
            .into_iter()
            .zip(keep)
            .filter(|(_, k)| *k)
            .map(|(f, _)| f)
            .collect();
        for mut r in horizon {
            r.push(i);
            next.push(orient(r));
        }
        boundary = next;
    }
    let mut facets: Vec<Facet> = boundary
        .iter()
        .map(|f| {
            let g = f
                .normal
                .iter()
                .fold(0i128, |acc, &x| num_integer::Integer::gcd(&acc, &x))
                .max(1);
            Facet {
                normal: f.normal.iter().map(|x| (x / g) as i64).collect(),
                offset: (f.offset / g) as i64,
            }
        })
        .collect();
    facets.sort();
    facets.dedup();
    Some(Hull {
        normalized_volume: volume,
        facets,
    })
}

/// `d! · Vol` of the convex hull, zero when lower-dimensional.
pub fn normalized_volume(points: &[Point]) -> i128 {
    hull(points).map(|h| h.normalized_volume).unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn unit_cube_and_simplex() {
        let cube: Vec<Point> = (0..8).map(|m| (0..3).map(|k| (m >> k) & 1).collect()).collect();
        assert_eq!(normalized_volume(&cube), 6);
        let h = hull(&cube).unwrap();
        assert_eq!(h.facets.len(), 6);
        let simplex = vec![vec![0, 0, 0], vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1], vec![0, 0, 0]];
        assert_eq!(normalized_volume(&simplex), 1);
        assert_eq!(normalized_volume(&[vec![0, 0], vec![1, 1], vec![2, 2]]), 0);
    }

    #[test]
    fn rank_and_det() {
        assert_eq!(det_i128(&[vec![2, 1], vec![1, 3]]), 5);
        assert_eq!(det_i128(&[vec![0, 1, 0], vec![1, 0, 0], vec![0, 0, 1]]), -1);
        assert_eq!(rank(&[vec![1, 2], vec![2, 4]]), 1);
        assert_eq!(affine_dim(&[vec![1, 1]]), 0);
    }

    fn shoelace(pts: &[(i64, i64)]) -> i128 {
        // area of the hull via monotone chain, doubled
        let mut p = pts.to_vec();
        p.sort();
        p.dedup();
        if p.len() < 3 {
            return 0;
        }
        let cross = |o: (i64, i64), a: (i64, i64), b: (i64, i64)| (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0);
        let mut lower: Vec<(i64, i64)> = vec![];
        for &x in &p {
            while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], x) <= 0 {
                lower.pop();
            }
            lower.push(x);
        }
        let mut upper: Vec<(i64, i64)> = vec![];
        for &x in p.iter().rev() {
            while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], x) <= 0 {
                upper.pop();
            }
            upper.push(x);
        }
        lower.pop();
        upper.pop();
        lower.extend(upper);
        let n = lower.len();
        (0..n)
            .map(|i| {
                let (a, b) = (lower[i], lower[(i + 1) % n]);
                (a.0 * b.1 - a.1 * b.0) as i128
            })
            .sum::<i128>()
            .abs()
    }

    proptest! {
        #[test]
        fn planar_volume_matches_shoelace(pts in prop::collection::vec((-5i64..6, -5i64..6), 1..12)) {
            let p: Vec<Point> = pts.iter().map(|&(a, b)| vec![a, b]).collect();
            prop_assert_eq!(normalized_volume(&p), shoelace(&pts));
        }

        #[test]
        fn volume_ignores_order(pts in prop::collection::vec(prop::collection::vec(-3i64..4, 3), 4..10)) {
            let mut rev = pts.clone();
            rev.reverse();
            prop_assert_eq!(normalized_volume(&pts), normalized_volume(&rev));
        }
    }
}
