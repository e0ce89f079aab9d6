//! Divisor classes, the α coordinates, Mori generators and the nef-Fano test.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fan::Fan;
use crate::lattice::{
    det_i64, integer_kernel, rank_i64, smith_normal_form, solve_rational, Rational,
};
use crate::poly::LinearForm;

/// Divisor-class data of a validated fan, in the basis of `W` dual to the
/// chosen Mori generators.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassData {
    pub n: usize,
    pub r: usize,
    pub class_of_ray: Vec<usize>,
    pub class_members: Vec<Vec<usize>>,
    pub n_c: Vec<usize>,
    pub rigid: Vec<bool>,
    /// Row `i` holds the coordinates of `α_i`.
    pub alpha: Vec<Vec<i64>>,
    /// The `n × (n+r)` ray matrix; its rows are the linear relations among the `α_i`.
    pub gale_dual: Vec<Vec<i64>>,
    /// `deg[ρ][j] = D_ρ · β_j`.
    pub deg: Vec<Vec<i64>>,
    /// Mori generators as intersection vectors `(D_ρ · β_j)_ρ`.
    pub mori_gens: Vec<Vec<i64>>,
    /// Extremal rays of the Mori cone in generator coordinates.
    pub mori_extremal: Vec<Vec<i64>>,
    /// `class_deg[c][j] = d_c^{β_j}`.
    pub class_deg: Vec<Vec<i64>>,
    /// Wall curves in generator coordinates.
    pub wall_curves: Vec<Vec<i64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NefFanoCertificate {
    pub nef_fano: bool,
    pub fano: bool,
    /// `(wall rays, −K·C)` per wall.
    pub walls: Vec<(Vec<usize>, i64)>,
}

impl ClassData {
    pub fn num_classes(&self) -> usize {
        self.class_members.len()
    }

    pub fn num_rays(&self) -> usize {
        self.class_of_ray.len()
    }

    pub fn alpha_form(&self, i: usize) -> LinearForm {
        LinearForm::from_integers(&self.alpha[i])
    }

    /// Class-level `α_c`, shared by all rays of the class.
    pub fn class_alpha(&self, c: usize) -> &[i64] {
        &self.alpha[self.class_members[c][0]]
    }

    /// `deg ṽ_j = (−K)·β_j`.
    pub fn vtilde_degrees(&self) -> Vec<i64> {
        (0..self.r)
            .map(|j| (0..self.num_rays()).map(|i| self.deg[i][j]).sum())
            .collect()
    }

    /// `d_c^β` for a curve class given in generator coordinates.
    pub fn class_degrees_of(&self, beta: &[i64]) -> Vec<i64> {
        self.class_deg
            .iter()
            .map(|row| row.iter().zip(beta).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `ξ · C > 0` on every wall curve, with the smallest value.
    pub fn ample_margin(&self, xi: &[f64]) -> f64 {
        self.wall_curves
            .iter()
            .map(|c| c.iter().zip(xi).map(|(&a, b)| a as f64 * b).sum::<f64>())
            .fold(f64::INFINITY, f64::min)
    }

    /// A fixed generic point in the interior of the Kähler cone.
    pub fn default_xi(&self) -> Result<Vec<f64>> {
        let phi = 0.618_033_988_749_894_9_f64;
        let generic: Vec<f64> = (0..self.r).map(|j| phi.powi(j as i32)).collect();
        let anti: Vec<f64> = (0..self.r)
            .map(|j| (0..self.num_rays()).map(|i| self.alpha[i][j] as f64).sum())
            .collect();
        let mut best = f64::NEG_INFINITY;
        for cand in [
            generic.clone(),
            anti.iter().zip(&generic).map(|(a, g)| a + 0.05 * g).collect(),
        ] {
            let m = self.ample_margin(&cand);
            if m > 0.0 {
                return Ok(cand);
            }
            best = best.max(m);
        }
        Err(Error::XiNotAmple(best))
    }

    /// Is the lattice point `b` (generator coordinates) in the Mori cone?
    pub fn in_mori_cone(&self, b: &[i64]) -> bool {
        in_cone(&self.mori_extremal, b)
    }
}

/// Builds the class data of a validated fan.
pub fn class_data(f: &Fan) -> Result<ClassData> {
    let n = f.dim();
    let num = f.num_rays();
    let r = num - n;
    let v: Vec<Vec<i64>> = (0..n)
        .map(|row| f.rays.iter().map(|ray| ray[row]).collect())
        .collect();
    let smith = smith_normal_form(&v);
    if smith.diag.iter().any(|&d| d != 1) {
        return Err(Error::TorsionClassGroup(smith.diag));
    }
    let mori = mori_generators(f)?;
    let deg: Vec<Vec<i64>> = (0..num)
        .map(|i| mori.gens.iter().map(|g| g[i]).collect())
        .collect();
    let alpha = deg.clone();

    let mut class_of_ray = vec![usize::MAX; num];
    let mut class_members: Vec<Vec<usize>> = Vec::new();
    for i in 0..num {
        if class_of_ray[i] != usize::MAX {
            continue;
        }
        let c = class_members.len();
        let members: Vec<usize> = (i..num).filter(|&k| alpha[k] == alpha[i]).collect();
        for &k in &members {
            class_of_ray[k] = c;
        }
        class_members.push(members);
    }
    let n_c: Vec<usize> = class_members.iter().map(Vec::len).collect();
    let rigid = n_c.iter().map(|&k| k == 1).collect();
    let class_deg = class_members.iter().map(|m| deg[m[0]].clone()).collect();
    Ok(ClassData {
        n,
        r,
        class_of_ray,
        class_members,
        n_c,
        rigid,
        alpha,
        gale_dual: v,
        deg,
        mori_gens: mori.gens,
        mori_extremal: mori.extremal,
        class_deg,
        wall_curves: mori.wall_coords,
    })
}

/// Output of [`mori_generators`].
#[derive(Debug, Clone, PartialEq)]
pub struct MoriData {
    /// Generators as intersection vectors with all toric divisors.
    pub gens: Vec<Vec<i64>>,
    /// Extremal rays of the Mori cone in generator coordinates.
    pub extremal: Vec<Vec<i64>>,
    /// Wall curves in generator coordinates.
    pub wall_coords: Vec<Vec<i64>>,
}

/// Mori cone generators from the wall curves of the fan.
pub fn mori_generators(f: &Fan) -> Result<MoriData> {
    let n = f.dim();
    let num = f.num_rays();
    let r = num - n;
    let v: Vec<Vec<i64>> = (0..n)
        .map(|row| f.rays.iter().map(|ray| ray[row]).collect())
        .collect();
    let kernel = integer_kernel(&v);
    debug_assert_eq!(kernel.len(), r);
    // coordinates of curve vectors with respect to the kernel basis
    let rows = independent_rows(&kernel, r);
    let to_kernel = |c: &[i64]| -> Vec<i64> {
        let m: Vec<Vec<Rational>> = rows
            .iter()
            .map(|&i| (0..r).map(|j| Rational::from_integer(kernel[j][i])).collect())
            .collect();
        let b: Vec<Rational> = rows.iter().map(|&i| Rational::from_integer(c[i])).collect();
        solve_rational(&m, &b)
            .expect("kernel basis rows are independent")
            .into_iter()
            .map(|x| {
                debug_assert!(x.is_integer());
                x.to_integer()
            })
            .collect()
    };
    let from_kernel = |x: &[i64]| -> Vec<i64> {
        (0..num)
            .map(|i| (0..r).map(|j| kernel[j][i] * x[j]).sum())
            .collect()
    };
    let curves: Vec<Vec<i64>> = f.walls().iter().map(|w| w.curve(num)).collect();
    let coords: Vec<Vec<i64>> = curves.iter().map(|c| to_kernel(c)).collect();
    let extremal_k = extremal_rays(&coords);
    let anti_k = |x: &[i64]| -> i64 { from_kernel(x).iter().sum() };

    let basis_k: Vec<Vec<i64>> = if extremal_k.len() == r && det_i64(&extremal_k).abs() == 1 {
        extremal_k.clone()
    } else {
        containing_unimodular_basis(&extremal_k, r, &anti_k).ok_or(Error::NoValidBasis)?
    };
    let mut gens: Vec<Vec<i64>> = basis_k.iter().map(|x| from_kernel(x)).collect();
    gens.sort_by(|a, b| {
        let ka: i64 = a.iter().sum();
        let kb: i64 = b.iter().sum();
        kb.cmp(&ka).then_with(|| b.cmp(a))
    });
    // re-express everything in generator coordinates
    let gen_rows = independent_rows(&gens, r);
    let to_gen = |c: &[i64]| -> Vec<i64> {
        let m: Vec<Vec<Rational>> = gen_rows
            .iter()
            .map(|&i| (0..r).map(|j| Rational::from_integer(gens[j][i])).collect())
            .collect();
        let b: Vec<Rational> = gen_rows
            .iter()
            .map(|&i| Rational::from_integer(c[i]))
            .collect();
        solve_rational(&m, &b)
            .expect("generators are independent")
            .into_iter()
            .map(|x| x.to_integer())
            .collect()
    };
    let wall_coords: Vec<Vec<i64>> = curves.iter().map(|c| to_gen(c)).collect();
    let mut extremal: Vec<Vec<i64>> = extremal_k.iter().map(|x| to_gen(&from_kernel(x))).collect();
    extremal.sort();
    Ok(MoriData {
        gens,
        extremal,
        wall_coords,
    })
}

/// Indices of `r` coordinates on which the `r` given vectors are independent.
fn independent_rows(vecs: &[Vec<i64>], r: usize) -> Vec<usize> {
    let len = vecs.first().map(Vec::len).unwrap_or(0);
    let mut chosen: Vec<usize> = Vec::new();
    for i in 0..len {
        let mut trial = chosen.clone();
        trial.push(i);
        let m: Vec<Vec<i64>> = trial
            .iter()
            .map(|&k| vecs.iter().map(|v| v[k]).collect())
            .collect();
        if rank_i64(&m) == trial.len() {
            chosen = trial;
            if chosen.len() == r {
                break;
            }
        }
    }
    chosen
}

fn primitive(v: &[i64]) -> Vec<i64> {
    let g = crate::lattice::gcd_slice(v);
    if g == 0 {
        v.to_vec()
    } else {
        v.iter().map(|x| x / g).collect()
    }
}

/// Does `b` lie in the cone spanned by `gens`? Exact, via Carathéodory subsets.
pub fn in_cone(gens: &[Vec<i64>], b: &[i64]) -> bool {
    if b.iter().all(|&x| x == 0) {
        return true;
    }
    let r = b.len();
    let k = gens.len();
    for mask in 1u32..(1 << k) {
        let sub: Vec<&Vec<i64>> = (0..k).filter(|i| mask & (1 << i) != 0).map(|i| &gens[i]).collect();
        if sub.len() > r {
            continue;
        }
        let cols: Vec<Vec<i64>> = sub.iter().map(|v| v.to_vec()).collect();
        if rank_i64(&cols) != sub.len() {
            continue;
        }
        if let Some(x) = nonneg_combination(&cols, b) {
            if x.iter().all(|c| *c >= Rational::from_integer(0)) {
                return true;
            }
        }
    }
    false
}

/// Solves `Σ x_j cols_j = b` for independent columns; `None` if `b` is not in their span.
fn nonneg_combination(cols: &[Vec<i64>], b: &[i64]) -> Option<Vec<Rational>> {
    let k = cols.len();
    let r = b.len();
    let mut all = cols.to_vec();
    all.push(b.to_vec());
    if rank_i64(&all) != k {
        return None;
    }
    let rows = independent_rows(cols, k);
    let m: Vec<Vec<Rational>> = rows
        .iter()
        .map(|&i| (0..k).map(|j| Rational::from_integer(cols[j][i])).collect())
        .collect();
    let rhs: Vec<Rational> = rows.iter().map(|&i| Rational::from_integer(b[i])).collect();
    debug_assert!(r >= k);
    solve_rational(&m, &rhs)
}

/// Extremal rays (primitive, deduplicated, sorted) of the cone spanned by `vecs`.
fn extremal_rays(vecs: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let mut dirs: Vec<Vec<i64>> = vecs
        .iter()
        .filter(|v| v.iter().any(|&x| x != 0))
        .map(|v| primitive(v))
        .collect();
    dirs.sort();
    dirs.dedup();
    let mut out = Vec::new();
    for (i, g) in dirs.iter().enumerate() {
        let others: Vec<Vec<i64>> = dirs
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != i)
            .map(|(_, v)| v.clone())
            .collect();
        if !in_cone(&others, g) {
            out.push(g.clone());
        }
    }
    out
}

/// Searches a small box for a unimodular basis whose cone contains the given
/// rays and whose members all satisfy `−K·β ≥ 0`.
fn containing_unimodular_basis(
    rays: &[Vec<i64>],
    r: usize,
    anti: &dyn Fn(&[i64]) -> i64,
) -> Option<Vec<Vec<i64>>> {
    let range: Vec<i64> = (-2..=2).collect();
    let mut cands: Vec<Vec<i64>> = vec![vec![]];
    for _ in 0..r {
        cands = cands
            .into_iter()
            .flat_map(|p| {
                range.iter().map(move |&x| {
                    let mut q = p.clone();
                    q.push(x);
                    q
                })
            })
            .collect();
    }
    cands.retain(|c| c.iter().any(|&x| x != 0) && anti(c) >= 0);
    cands.sort_by_key(|c| (c.iter().map(|x| x.abs()).sum::<i64>(), c.clone()));
    let mut best: Option<Vec<Vec<i64>>> = None;
    let mut idx = vec![0usize; r];
    fn rec(
        start: usize,
        depth: usize,
        idx: &mut Vec<usize>,
        cands: &[Vec<i64>],
        rays: &[Vec<i64>],
        best: &mut Option<Vec<Vec<i64>>>,
    ) {
        if best.is_some() {
            return;
        }
        if depth == idx.len() {
            let basis: Vec<Vec<i64>> = idx.iter().map(|&i| cands[i].clone()).collect();
            if det_i64(&basis).abs() == 1 && rays.iter().all(|g| in_cone(&basis, g)) {
                *best = Some(basis);
            }
            return;
        }
        for i in start..cands.len() {
            idx[depth] = i;
            rec(i + 1, depth + 1, idx, cands, rays, best);
        }
    }
    rec(0, 0, &mut idx, &cands, rays, &mut best);
    best
}

/// Nef-Fano test with the per-wall `−K·C` values.
pub fn is_nef_fano(f: &Fan, cd: &ClassData) -> NefFanoCertificate {
    let num = cd.num_rays();
    let walls: Vec<(Vec<usize>, i64)> = f
        .walls()
        .iter()
        .map(|w| (w.rays.clone(), w.curve(num).iter().sum()))
        .collect();
    NefFanoCertificate {
        nef_fano: walls.iter().all(|w| w.1 >= 0),
        fano: walls.iter().all(|w| w.1 > 0),
        walls,
    }
}

/// `q^β(z) = ∏ z_i^{⟨α_i, β⟩}` for `β` in generator coordinates.
pub fn q_of_z(cd: &ClassData, z: &[Complex64], beta: &[i64]) -> Result<Complex64> {
    if z.len() != cd.num_rays() {
        return Err(Error::ArityMismatch {
            expected: cd.num_rays(),
            got: z.len(),
        });
    }
    if beta.len() != cd.r {
        return Err(Error::ArityMismatch {
            expected: cd.r,
            got: beta.len(),
        });
    }
    let mut out = Complex64::new(1.0, 0.0);
    for (i, zi) in z.iter().enumerate() {
        let e: i64 = cd.alpha[i].iter().zip(beta).map(|(a, b)| a * b).sum();
        if e == 0 {
            continue;
        }
        if *zi == Complex64::new(0.0, 0.0) {
            return Err(Error::ZeroCoordinate(i));
        }
        out *= zi.powi(e as i32);
    }
    Ok(out)
}

/// `q_j = q^{β_j}(z)` for every generator.
pub fn q_vector_of_z(cd: &ClassData, z: &[Complex64]) -> Result<Vec<Complex64>> {
    (0..cd.r)
        .map(|j| {
            let mut b = vec![0; cd.r];
            b[j] = 1;
            q_of_z(cd, z, &b)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fan::examples::*;
    use proptest::prelude::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn p2_classes() {
        let cd = class_data(&projective_space(2)).unwrap();
        assert_eq!(cd.class_members, vec![vec![0, 1, 2]]);
        assert_eq!(cd.n_c, vec![3]);
        assert_eq!(cd.alpha, vec![vec![1], vec![1], vec![1]]);
        assert_eq!(cd.mori_gens, vec![vec![1, 1, 1]]);
        assert_eq!(cd.vtilde_degrees(), vec![3]);
    }

    #[test]
    fn p1xp1_classes() {
        let cd = class_data(&p1xp1()).unwrap();
        assert_eq!(cd.class_members, vec![vec![0, 1], vec![2, 3]]);
        assert_eq!(cd.alpha[0], vec![1, 0]);
        assert_eq!(cd.alpha[2], vec![0, 1]);
        assert_eq!(cd.mori_gens, vec![vec![1, 1, 0, 0], vec![0, 0, 1, 1]]);
    }

    #[test]
    fn f1_classes() {
        let cd = class_data(&hirzebruch(1)).unwrap();
        assert_eq!(cd.class_members, vec![vec![0, 2], vec![1], vec![3]]);
        assert_eq!(cd.rigid, vec![false, true, true]);
        assert_eq!(cd.mori_gens, vec![vec![0, 1, 0, 1], vec![1, -1, 1, 0]]);
        assert_eq!(cd.alpha, vec![vec![0, 1], vec![1, -1], vec![0, 1], vec![1, 0]]);
        assert_eq!(cd.class_deg, vec![vec![0, 1], vec![1, -1], vec![1, 0]]);
    }

    #[test]
    fn nef_fano_examples() {
        let p2 = projective_space(2);
        let cert = is_nef_fano(&p2, &class_data(&p2).unwrap());
        assert!(cert.nef_fano);
        assert!(cert.walls.iter().all(|w| w.1 == 3));
        let f2 = hirzebruch(2);
        let cert = is_nef_fano(&f2, &class_data(&f2).unwrap());
        assert!(cert.nef_fano && !cert.fano);
        assert!(cert.walls.iter().any(|w| w.1 == 0));
        let f3 = hirzebruch(3);
        let cert = is_nef_fano(&f3, &class_data(&f3).unwrap());
        assert!(!cert.nef_fano);
        assert!(cert.walls.iter().any(|w| w.1 == -1));
    }

    #[test]
    fn q_of_z_examples() {
        let cd = class_data(&projective_space(1)).unwrap();
        let z = [c(2.0), c(5.0)];
        assert_eq!(q_of_z(&cd, &z, &[1]).unwrap(), c(10.0));
        assert_eq!(q_of_z(&cd, &z, &[0]).unwrap(), c(1.0));
        let f1 = class_data(&hirzebruch(1)).unwrap();
        let z = [c(2.0), c(3.0), c(5.0), c(7.0)];
        let v = q_of_z(&f1, &z, &[0, 1]).unwrap();
        assert!((v - c(10.0 / 3.0)).norm() < 1e-14);
        assert!(matches!(
            q_of_z(&f1, &[c(0.0), c(1.0), c(1.0), c(1.0)], &[0, 1]),
            Err(Error::ZeroCoordinate(0))
        ));
    }

    #[test]
    fn relations_annihilate_alpha() {
        for f in [projective_space(3), p1xp1(), hirzebruch(1), hirzebruch(2)] {
            let cd = class_data(&f).unwrap();
            for row in &cd.gale_dual {
                for j in 0..cd.r {
                    let s: i64 = row.iter().zip(&cd.alpha).map(|(m, a)| m * a[j]).sum();
                    assert_eq!(s, 0);
                }
            }
            for (c, members) in cd.class_members.iter().enumerate() {
                for &i in members {
                    assert_eq!(cd.deg[i], cd.class_deg[c]);
                }
            }
            let degs = cd.vtilde_degrees();
            for j in 0..cd.r {
                let s: i64 = (0..cd.num_classes()).map(|c| cd.n_c[c] as i64 * cd.class_deg[c][j]).sum();
                assert_eq!(s, degs[j]);
                assert!(s >= 0);
            }
        }
    }

    #[test]
    fn primitive_collections_are_class_closed() {
        for f in [projective_space(2), p1xp1(), hirzebruch(1), hirzebruch(2)] {
            let cd = class_data(&f).unwrap();
            for p in f.primitive_collections() {
                for &i in &p.rays {
                    for &k in &cd.class_members[cd.class_of_ray[i]] {
                        assert!(p.rays.contains(&k));
                    }
                }
            }
        }
    }

    #[test]
    fn default_xi_is_ample() {
        for f in [projective_space(1), p1xp1(), hirzebruch(1), hirzebruch(2)] {
            let cd = class_data(&f).unwrap();
            assert!(cd.ample_margin(&cd.default_xi().unwrap()) > 0.0);
        }
    }

    proptest! {
        #[test]
        fn q_of_z_is_multiplicative(
            b1 in proptest::collection::vec(-3i64..4, 2),
            b2 in proptest::collection::vec(-3i64..4, 2),
            z in proptest::collection::vec(0.5f64..2.0, 4),
        ) {
            let cd = class_data(&hirzebruch(1)).unwrap();
            let z: Vec<Complex64> = z.into_iter().map(c).collect();
            let sum: Vec<i64> = b1.iter().zip(&b2).map(|(a, b)| a + b).collect();
            let lhs = q_of_z(&cd, &z, &sum).unwrap();
            let rhs = q_of_z(&cd, &z, &b1).unwrap() * q_of_z(&cd, &z, &b2).unwrap();
            prop_assert!((lhs - rhs).norm() <= 1e-12 * lhs.norm().max(1.0));
        }
    }
}
