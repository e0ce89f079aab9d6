//! Smooth complete fans: validation, walls, primitive collections.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{det_i64, gcd_slice, solve_rational, to_rational, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fan {
    pub rays: Vec<Vec<i64>>,
    pub max_cones: Vec<Vec<usize>>,
}

/// One violated fan invariant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum FanViolation {
    Malformed(String),
    NonPrimitiveRay { ray: usize },
    DuplicateRay { first: usize, second: usize },
    NonSmoothCone { cone: usize, det: i64 },
    IncompleteFan(String),
}

impl FanViolation {
    pub fn code(&self) -> &'static str {
        match self {
            FanViolation::Malformed(_) => "MalformedFan",
            FanViolation::NonPrimitiveRay { .. } => "NonPrimitiveRay",
            FanViolation::DuplicateRay { .. } => "DuplicateRay",
            FanViolation::NonSmoothCone { .. } => "NonSmoothCone",
            FanViolation::IncompleteFan(_) => "IncompleteFan",
        }
    }
}

impl fmt::Display for FanViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FanViolation::Malformed(s) => write!(f, "malformed fan: {s}"),
            FanViolation::NonPrimitiveRay { ray } => write!(f, "ray {ray} is not primitive"),
            FanViolation::DuplicateRay { first, second } => {
                write!(f, "rays {first} and {second} coincide")
            }
            FanViolation::NonSmoothCone { cone, det } => {
                write!(f, "cone {cone} has determinant {det}")
            }
            FanViolation::IncompleteFan(s) => write!(f, "fan is not complete: {s}"),
        }
    }
}

/// A wall `τ` shared by the maximal cones `τ ∪ {a}` and `τ ∪ {b}`, with the
/// relation `v_a + v_b = Σ_{i∈τ} coeff_i v_i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Wall {
    pub rays: Vec<usize>,
    pub a: usize,
    pub b: usize,
    pub coeffs: Vec<i64>,
}

impl Wall {
    /// Intersection numbers `D_ρ · C_τ` of the wall curve.
    pub fn curve(&self, num_rays: usize) -> Vec<i64> {
        let mut c = vec![0; num_rays];
        c[self.a] += 1;
        c[self.b] += 1;
        for (&i, &x) in self.rays.iter().zip(&self.coeffs) {
            c[i] -= x;
        }
        c
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct PrimitiveCollection {
    pub rays: Vec<usize>,
}

impl Fan {
    pub fn dim(&self) -> usize {
        self.rays.first().map(Vec::len).unwrap_or(0)
    }

    pub fn num_rays(&self) -> usize {
        self.rays.len()
    }

    pub fn picard_rank(&self) -> usize {
        self.num_rays() - self.dim()
    }

    /// Checks every standing hypothesis and reports all violations at once.
    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        let n = self.dim();
        if n == 0 || self.rays.iter().any(|r| r.len() != n) {
            bad.push(FanViolation::Malformed("rays must be nonempty and of equal length".into()));
            return Err(Error::InvalidFan(bad));
        }
        for (i, c) in self.max_cones.iter().enumerate() {
            let set: BTreeSet<_> = c.iter().collect();
            if c.len() != n || set.len() != n || c.iter().any(|&x| x >= self.num_rays()) {
                bad.push(FanViolation::Malformed(format!(
                    "cone {i} must list {n} distinct ray indices"
                )));
            }
        }
        if !bad.is_empty() {
            return Err(Error::InvalidFan(bad));
        }
        for (i, r) in self.rays.iter().enumerate() {
            if gcd_slice(r) != 1 {
                bad.push(FanViolation::NonPrimitiveRay { ray: i });
            }
        }
        for i in 0..self.num_rays() {
            for j in i + 1..self.num_rays() {
                if self.rays[i] == self.rays[j] {
                    bad.push(FanViolation::DuplicateRay { first: i, second: j });
                }
            }
        }
        for (i, c) in self.max_cones.iter().enumerate() {
            let d = det_i64(&self.cone_matrix(c));
            if d.abs() != 1 {
                bad.push(FanViolation::NonSmoothCone { cone: i, det: d });
            }
        }
        if bad.is_empty() {
            if let Err(s) = self.check_completeness() {
                bad.push(FanViolation::IncompleteFan(s));
            }
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidFan(bad))
        }
    }

    fn cone_matrix(&self, cone: &[usize]) -> Vec<Vec<i64>> {
        cone.iter().map(|&i| self.rays[i].clone()).collect()
    }

    fn wall_map(&self) -> BTreeMap<Vec<usize>, Vec<usize>> {
        let mut walls: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
        for (ci, c) in self.max_cones.iter().enumerate() {
            let mut s = c.clone();
            s.sort_unstable();
            for skip in 0..s.len() {
                let w: Vec<usize> = s
                    .iter()
                    .enumerate()
                    .filter(|&(k, _)| k != skip)
                    .map(|(_, &x)| x)
                    .collect();
                walls.entry(w).or_default().push(ci);
            }
        }
        walls
    }

    fn check_completeness(&self) -> std::result::Result<(), String> {
        let walls = self.wall_map();
        for (w, cones) in &walls {
            if cones.len() != 2 {
                return Err(format!("wall {:?} lies in {} maximal cones", w, cones.len()));
            }
            let (a, b) = self.opposite_rays(w, cones[0], cones[1]);
            // the two cones must sit on opposite sides of the wall hyperplane
            let mut ma = self.cone_matrix(w);
            ma.push(self.rays[a].clone());
            let mut mb = self.cone_matrix(w);
            mb.push(self.rays[b].clone());
            if det_i64(&ma).signum() == det_i64(&mb).signum() {
                return Err(format!("cones across wall {:?} overlap", w));
            }
        }
        // connectivity of the cone adjacency graph
        let m = self.max_cones.len();
        if m == 0 {
            return Err("no maximal cones".into());
        }
        let mut seen = vec![false; m];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(c) = stack.pop() {
            for cones in walls.values() {
                if cones.contains(&c) {
                    for &d in cones {
                        if !seen[d] {
                            seen[d] = true;
                            stack.push(d);
                        }
                    }
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err("cone adjacency graph is disconnected".into());
        }
        Ok(())
    }

    fn opposite_rays(&self, wall: &[usize], c1: usize, c2: usize) -> (usize, usize) {
        let pick = |c: usize| {
            *self.max_cones[c]
                .iter()
                .find(|x| !wall.contains(x))
                .expect("cone contains its wall")
        };
        (pick(c1), pick(c2))
    }

    /// All walls with their linear relations. Assumes a validated fan.
    pub fn walls(&self) -> Vec<Wall> {
        let mut out = Vec::new();
        for (w, cones) in self.wall_map() {
            let (a, b) = self.opposite_rays(&w, cones[0], cones[1]);
            // express v_b in the basis {v_a} ∪ {v_i : i ∈ w}
            let mut basis = vec![a];
            basis.extend(w.iter().copied());
            let n = self.dim();
            let m: Vec<Vec<Rational>> = (0..n)
                .map(|row| {
                    basis
                        .iter()
                        .map(|&i| Rational::from_integer(self.rays[i][row]))
                        .collect()
                })
                .collect();
            let x = solve_rational(&m, &to_rational(&self.rays[b])).expect("smooth cone");
            debug_assert_eq!(x[0], Rational::from_integer(-1));
            let coeffs = x[1..].iter().map(|v| v.to_integer()).collect();
            let (a, b) = if a < b { (a, b) } else { (b, a) };
            out.push(Wall {
                rays: w,
                a,
                b,
                coeffs,
            });
        }
        out
    }

    /// Is the ray set contained in some maximal cone?
    pub fn in_cone(&self, set: &[usize]) -> bool {
        self.max_cones
            .iter()
            .any(|c| set.iter().all(|x| c.contains(x)))
    }

    /// Minimal non-faces, by exhaustive subset search.
    pub fn primitive_collections(&self) -> Vec<PrimitiveCollection> {
        let n = self.num_rays();
        let mut out = Vec::new();
        for mask in 1u32..(1 << n) {
            let set: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
            if self.in_cone(&set) {
                continue;
            }
            let minimal = set.iter().all(|&drop| {
                let sub: Vec<usize> = set.iter().copied().filter(|&x| x != drop).collect();
                self.in_cone(&sub)
            });
            if minimal {
                out.push(PrimitiveCollection { rays: set });
            }
        }
        out.sort();
        out
    }

    /// χ(X), the number of maximal cones.
    pub fn euler_characteristic(&self) -> usize {
        self.max_cones.len()
    }

    /// The rays adjacent to `i` in a complete surface fan.
    pub fn surface_neighbors(&self, i: usize) -> Option<(usize, usize)> {
        if self.dim() != 2 {
            return None;
        }
        let nb: Vec<usize> = self
            .max_cones
            .iter()
            .filter(|c| c.contains(&i))
            .flat_map(|c| c.iter().copied().filter(|&x| x != i))
            .collect();
        match nb.as_slice() {
            [a, b] => Some((*a, *b)),
            _ => None,
        }
    }
}

/// Textbook fans used throughout the tests, the book and the bundled specs.
pub mod examples {
    use super::Fan;

    pub fn projective_space(n: usize) -> Fan {
        let mut rays: Vec<Vec<i64>> = (0..n)
            .map(|i| (0..n).map(|j| i64::from(i == j)).collect())
            .collect();
        rays.push(vec![-1; n]);
        let max_cones = (0..=n)
            .map(|skip| (0..=n).filter(|&i| i != skip).collect())
            .collect();
        Fan { rays, max_cones }
    }

    pub fn p1xp1() -> Fan {
        Fan {
            rays: vec![vec![1, 0], vec![-1, 0], vec![0, 1], vec![0, -1]],
            max_cones: vec![vec![0, 2], vec![2, 1], vec![1, 3], vec![3, 0]],
        }
    }

    /// Hirzebruch surface `F_a`.
    pub fn hirzebruch(a: i64) -> Fan {
        Fan {
            rays: vec![vec![1, 0], vec![0, 1], vec![-1, a], vec![0, -1]],
            max_cones: vec![vec![0, 1], vec![1, 2], vec![2, 3], vec![3, 0]],
        }
    }
}
