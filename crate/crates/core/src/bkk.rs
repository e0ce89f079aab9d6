//! Newton polytopes of the QSC system in the variables `(z_ρ, y_c)`, mixed
//! volumes by inclusion–exclusion, essential subsets and the BKK certificate.

use rayon::prelude::*;
use serde::Serialize;

use crate::classes::ClassData;
use crate::error::{Error, Result};
use crate::fan::Fan;
use crate::hull::{self, affine_dim, minkowski_sum, Point};

pub const MAX_DIM: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// `Q_c = ∏_{ρ ∈ c} z_ρ`.
    Toric,
    /// `Q_c` a generic homogeneous polynomial of degree `n_c` in all `z`.
    General,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PolytopeTuple {
    pub dim: usize,
    /// Vertex sets, one polytope per equation.
    pub polytopes: Vec<Vec<Point>>,
    pub labels: Vec<String>,
}

impl PolytopeTuple {
    pub fn new(dim: usize, polytopes: Vec<Vec<Point>>) -> Self {
        let labels = (0..polytopes.len()).map(|i| format!("P{i}")).collect();
        PolytopeTuple { dim, polytopes, labels }
    }
}

fn unit(dim: usize, k: usize, scale: i64) -> Point {
    let mut p = vec![0; dim];
    p[k] = scale;
    p
}

/// Builds the tuple for the `N + γ` equations: `r` monomial rows, `n` linear
/// rows in the `z` and one `y_c − Q_c` row per non-rigid class.
pub fn newton_polytopes(cd: &ClassData, variant: Variant) -> PolytopeTuple {
    let nr = cd.num_rays();
    let nonrigid: Vec<usize> = (0..cd.num_classes()).filter(|&c| !cd.rigid[c]).collect();
    let dim = nr + nonrigid.len();
    let ycoord = |c: usize| nr + nonrigid.iter().position(|&x| x == c).expect("non-rigid class");
    let mut polytopes = Vec::new();
    let mut labels = Vec::new();

    for a in 0..cd.r {
        let mut plus = vec![0; dim];
        let mut minus = vec![0; dim];
        for c in 0..cd.num_classes() {
            let e = cd.class_deg[c][a];
            let k = if cd.rigid[c] { cd.class_members[c][0] } else { ycoord(c) };
            if e > 0 {
                plus[k] += e;
            } else {
                minus[k] -= e;
            }
        }
        let mut p = vec![plus, minus];
        p.dedup();
        polytopes.push(p);
        labels.push(format!("monomial {a}"));
    }
    for k in 0..cd.n {
        polytopes.push((0..nr).map(|i| unit(dim, i, 1)).collect());
        labels.push(format!("linear {k}"));
    }
    for &c in &nonrigid {
        let y = unit(dim, ycoord(c), 1);
        let p = match variant {
            Variant::Toric => {
                let mut m = vec![0; dim];
                for &i in &cd.class_members[c] {
                    m[i] = 1;
                }
                vec![y, m]
            }
            Variant::General => {
                let mut v = vec![y];
                v.extend((0..nr).map(|i| unit(dim, i, cd.n_c[c] as i64)));
                v
            }
        };
        polytopes.push(p);
        labels.push(format!("y{c} - Q{c}"));
    }
    PolytopeTuple { dim, polytopes, labels }
}

fn subset_members(mask: usize, k: usize) -> Vec<usize> {
    (0..k).filter(|i| mask & (1 << i) != 0).collect()
}

/// Minkowski sums for every nonempty subset, built from the sum without the top element.
fn all_sums(polys: &[Vec<Point>]) -> Vec<Vec<Point>> {
    let k = polys.len();
    let mut sums: Vec<Vec<Point>> = vec![Vec::new(); 1 << k];
    for mask in 1usize..(1 << k) {
        let top = usize::BITS as usize - 1 - mask.leading_zeros() as usize;
        let rest = mask & !(1 << top);
        sums[mask] = if rest == 0 {
            let mut p = polys[top].clone();
            p.sort();
            p.dedup();
            p
        } else {
            minkowski_sum(&sums[rest], &polys[top])
        };
    }
    sums
}

/// `MV = Σ_J (−1)^{d−|J|} Vol(Σ_J P_j)`, normalized so that the unit cube has `MV = 1`
/// for coordinate segments.
pub fn mixed_volume(pt: &PolytopeTuple) -> Result<i64> {
    let d = pt.dim;
    if d > MAX_DIM {
        return Err(Error::DimensionTooLarge(d));
    }
    if pt.polytopes.len() != d {
        return Err(Error::ArityMismatch {
            expected: d,
            got: pt.polytopes.len(),
        });
    }
    if d == 0 {
        return Ok(1);
    }
    let sums = all_sums(&pt.polytopes);
    let vols: Vec<i128> = (1usize..(1 << d))
        .into_par_iter()
        .map(|mask| hull::normalized_volume(&sums[mask]))
        .collect();
    let mut total: i128 = 0;
    for (i, v) in vols.iter().enumerate() {
        let size = (i + 1).count_ones() as usize;
        if (d - size) % 2 == 0 {
            total += v;
        } else {
            total -= v;
        }
    }
    let fact: i128 = (1..=d as i128).product();
    debug_assert_eq!(total % fact, 0);
    Ok((total / fact) as i64)
}

fn sum_dim(sets: &[&Vec<Point>]) -> i64 {
    let mut diffs: Vec<Point> = vec![vec![0; sets.first().map(|s| s[0].len()).unwrap_or(0)]];
    for s in sets {
        let p0 = &s[0];
        diffs.extend(s.iter().map(|p| p.iter().zip(p0).map(|(a, b)| a - b).collect()));
    }
    affine_dim(&diffs)
}

/// All essential subsets: `dim Σ_I C_i = |I| − 1` and `dim Σ_J C_j ≥ |J| − 1` for proper `J`.
pub fn essential_subsets(sets: &[Vec<Point>]) -> Vec<Vec<usize>> {
    let k = sets.len();
    let dims: Vec<i64> = (0usize..(1 << k))
        .map(|mask| {
            let members: Vec<&Vec<Point>> = subset_members(mask, k).into_iter().map(|i| &sets[i]).collect();
            if members.is_empty() {
                -1
            } else {
                sum_dim(&members)
            }
        })
        .collect();
    let mut out = Vec::new();
    for mask in 1usize..(1 << k) {
        let size = mask.count_ones() as i64;
        if dims[mask] != size - 1 {
            continue;
        }
        let mut sub = (mask - 1) & mask;
        let mut ok = true;
        while sub > 0 {
            if dims[sub] < sub.count_ones() as i64 - 1 {
                ok = false;
                break;
            }
            sub = (sub - 1) & mask;
        }
        if ok {
            out.push(subset_members(mask, k));
        }
    }
    out
}

/// One facet normal of the total sum of the general tuple.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AuditEntry {
    pub w: Vec<i64>,
    /// An essential subset of the `w`-faces whose members all meet the toric tuple.
    pub witness: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BkkCertificate {
    pub mv_toric: i64,
    pub mv_general: i64,
    pub euler: usize,
    pub certified: bool,
    pub toric: PolytopeTuple,
    pub general: PolytopeTuple,
    pub audit: Vec<AuditEntry>,
    pub audit_passed: bool,
}

fn face(set: &[Point], w: &[i64]) -> (Vec<Point>, i64) {
    let val = |p: &Point| -> i64 { p.iter().zip(w).map(|(a, b)| a * b).sum() };
    let m = set.iter().map(val).min().expect("nonempty polytope");
    (set.iter().filter(|p| val(p) == m).cloned().collect(), m)
}

fn audit(toric: &PolytopeTuple, general: &PolytopeTuple) -> Vec<AuditEntry> {
    let total = general
        .polytopes
        .iter()
        .skip(1)
        .fold(general.polytopes[0].clone(), |acc, p| minkowski_sum(&acc, p));
    let Some(h) = hull::hull(&total) else {
        return Vec::new();
    };
    h.facets
        .par_iter()
        .map(|f| {
            let w: Vec<i64> = f.normal.iter().map(|x| -x).collect();
            let faces: Vec<(Vec<Point>, i64)> = general.polytopes.iter().map(|p| face(p, &w)).collect();
            let meets: Vec<bool> = toric
                .polytopes
                .iter()
                .zip(&faces)
                .map(|(s, (_, m))| face(s, &w).1 == *m)
                .collect();
            let sets: Vec<Vec<Point>> = faces.into_iter().map(|(s, _)| s).collect();
            let witness = essential_subsets(&sets).into_iter().find(|i| i.iter().all(|&j| meets[j]));
            AuditEntry { w, witness }
        })
        .collect()
}

/// Certifies `MV(S) = MV(S̃) = χ(X)` and runs the facet-normal audit.
pub fn bkk_count_check(cd: &ClassData, fan: &Fan) -> Result<BkkCertificate> {
    let toric = newton_polytopes(cd, Variant::Toric);
    let general = newton_polytopes(cd, Variant::General);
    let mv_toric = mixed_volume(&toric)?;
    let mv_general = mixed_volume(&general)?;
    let euler = fan.euler_characteristic();
    let audit = audit(&toric, &general);
    let audit_passed = !audit.is_empty() && audit.iter().all(|a| a.witness.is_some());
    Ok(BkkCertificate {
        mv_toric,
        mv_general,
        euler,
        certified: mv_toric == mv_general && mv_general == euler as i64,
        toric,
        general,
        audit,
        audit_passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classes::class_data;
    use crate::fan::examples::*;
    use proptest::prelude::*;

    fn seg(d: usize, k: usize) -> Vec<Point> {
        vec![vec![0; d], unit(d, k, 1)]
    }

    #[test]
    fn unit_segments() {
        assert_eq!(mixed_volume(&PolytopeTuple::new(2, vec![seg(2, 0), seg(2, 1)])).unwrap(), 1);
        let cube = PolytopeTuple::new(3, (0..3).map(|k| seg(3, k)).collect());
        assert_eq!(mixed_volume(&cube).unwrap(), 1);
    }

    #[test]
    fn p1_tuple() {
        let cd = class_data(&projective_space(1)).unwrap();
        let s = newton_polytopes(&cd, Variant::Toric);
        assert_eq!(s.dim, 3);
        assert_eq!(
            s.polytopes,
            vec![
                vec![vec![0, 0, 1], vec![0, 0, 0]],
                vec![vec![1, 0, 0], vec![0, 1, 0]],
                vec![vec![0, 0, 1], vec![1, 1, 0]],
            ]
        );
        assert_eq!(mixed_volume(&s).unwrap(), 2);
        assert!(essential_subsets(&s.polytopes).is_empty());
        let g = newton_polytopes(&cd, Variant::General);
        assert_eq!(g.polytopes[2], vec![vec![0, 0, 1], vec![2, 0, 0], vec![0, 2, 0]]);
        assert_eq!(mixed_volume(&g).unwrap(), 2);
    }

    #[test]
    fn essential_examples() {
        let point = vec![vec![vec![1, 1]], seg(2, 0)];
        assert!(essential_subsets(&point).contains(&vec![0]));
        let twin = vec![seg(2, 0), seg(2, 0)];
        assert_eq!(essential_subsets(&twin), vec![vec![0, 1]]);
        assert_eq!(mixed_volume(&PolytopeTuple::new(2, twin)).unwrap(), 0);
    }

    #[test]
    fn certificates() {
        for (fan, chi) in [(projective_space(2), 3), (p1xp1(), 4)] {
            let cd = class_data(&fan).unwrap();
            let c = bkk_count_check(&cd, &fan).unwrap();
            assert_eq!((c.mv_toric, c.mv_general, c.euler), (chi, chi, chi as usize));
            assert!(c.certified);
            assert!(c.audit_passed);
        }
    }

    #[test]
    fn dimension_guard() {
        let t = PolytopeTuple::new(9, (0..9).map(|k| seg(9, k)).collect());
        assert_eq!(mixed_volume(&t).unwrap_err().code(), "DimensionTooLarge");
    }

    fn arb_poly(d: usize) -> impl Strategy<Value = Vec<Point>> {
        prop::collection::vec(prop::collection::vec(0i64..3, d), 1..4)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn symmetric_and_multilinear(a in arb_poly(2), b in arb_poly(2), c in arb_poly(2)) {
            let mv = |x: &Vec<Point>, y: &Vec<Point>| mixed_volume(&PolytopeTuple::new(2, vec![x.clone(), y.clone()])).unwrap();
            prop_assert_eq!(mv(&a, &b), mv(&b, &a));
            let bc = minkowski_sum(&b, &c);
            prop_assert_eq!(mv(&a, &bc), mv(&a, &b) + mv(&a, &c));
        }

        #[test]
        fn mv_of_equal_polytopes_is_normalized_volume(a in arb_poly(3)) {
            let t = PolytopeTuple::new(3, vec![a.clone(), a.clone(), a.clone()]);
            prop_assert_eq!(mixed_volume(&t).unwrap() as i128, hull::normalized_volume(&a));
        }
    }
}
