//! Flags of subspaces spanned by the `α_i`, compatible bases, and the
//! signed sum of tori on which classical correlators are integrated.

use std::collections::BTreeSet;

use num_traits::Zero;
use serde::{Serialize, Serializer};

use crate::bundle::DeformedBundle;
use crate::classes::ClassData;
use crate::error::{Error, Result};
use crate::lattice::{det_rational, rank_i64, solve_rational, Rational};
use crate::linalg::{self, C64};
use crate::poly::MultiPoly;
use crate::solve::aberth;

fn ser_rational_matrix<S: Serializer>(m: &[Vec<Rational>], s: S) -> std::result::Result<S::Ok, S::Error> {
    let strs: Vec<Vec<String>> = m
        .iter()
        .map(|row| row.iter().map(|x| x.to_string()).collect())
        .collect();
    strs.serialize(s)
}

/// A complete flag `F_1 ⊂ … ⊂ F_r = W` with a compatible basis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Flag {
    /// Rays whose `α_i` lies in `F_j`, for each step.
    pub members: Vec<Vec<usize>>,
    /// Rows are the `γ_j` in `W` coordinates; `det = 1`.
    #[serde(serialize_with = "ser_rational_matrix")]
    pub gamma: Vec<Vec<Rational>>,
    pub kappa: Vec<Vec<i64>>,
    /// Coefficients of `ξ` in the `κ` basis.
    pub lambda: Vec<f64>,
    pub nu: i32,
    pub n0: f64,
}

impl Flag {
    pub fn gamma_f64(&self) -> Vec<Vec<f64>> {
        self.gamma
            .iter()
            .map(|row| row.iter().map(|x| *x.numer() as f64 / *x.denom() as f64).collect())
            .collect()
    }

    /// `u = γ⁻¹ w`, as a complex matrix.
    pub fn gamma_inverse(&self) -> Vec<Vec<C64>> {
        let r = self.gamma.len();
        let g = self.gamma.clone();
        let mut inv = vec![vec![C64::zero(); r]; r];
        for k in 0..r {
            let e: Vec<Rational> = (0..r)
                .map(|i| Rational::from_integer(i64::from(i == k)))
                .collect();
            let col = solve_rational(&g, &e).expect("det gamma = 1");
            for i in 0..r {
                inv[i][k] = C64::new(*col[i].numer() as f64 / *col[i].denom() as f64, 0.0);
            }
        }
        inv
    }

    /// Coefficients `a_{li}` of `α_l = Σ_i a_{li} γ_i`.
    pub fn alpha_expansions(&self, cd: &ClassData) -> Vec<Vec<Rational>> {
        let r = cd.r;
        // solve gamma^T a = alpha_l
        let gt: Vec<Vec<Rational>> = (0..r)
            .map(|k| (0..r).map(|i| self.gamma[i][k]).collect())
            .collect();
        cd.alpha
            .iter()
            .map(|a| {
                let b: Vec<Rational> = a.iter().map(|&x| Rational::from_integer(x)).collect();
                solve_rational(&gt, &b).expect("gamma is a basis")
            })
            .collect()
    }
}

/// Enumerates the flags of `FL⁺(ξ)`.
pub fn enumerate_plus_flags(cd: &ClassData, xi: &[f64]) -> Result<Vec<Flag>> {
    if xi.len() != cd.r {
        return Err(Error::ArityMismatch {
            expected: cd.r,
            got: xi.len(),
        });
    }
    let margin = cd.ample_margin(xi);
    if !(margin > 0.0) {
        return Err(Error::XiNotAmple(margin));
    }
    let chains = flag_chains(cd);
    let mut out = Vec::new();
    for (idx, chain) in chains.iter().enumerate() {
        let kappa: Vec<Vec<i64>> = chain
            .iter()
            .map(|m| {
                (0..cd.r)
                    .map(|k| m.iter().map(|&i| cd.alpha[i][k]).sum())
                    .collect()
            })
            .collect();
        if rank_i64(&kappa) < cd.r {
            continue;
        }
        let kt: Vec<Vec<f64>> = (0..cd.r)
            .map(|k| kappa.iter().map(|v| v[k] as f64).collect())
            .collect();
        let Some(lambda) = linalg::solve_real(&kt, xi) else {
            continue;
        };
        let xi_norm = xi.iter().map(|x| x.abs()).fold(0.0, f64::max).max(1.0);
        if let Some(l) = lambda.iter().find(|l| l.abs() <= 1e-12 * xi_norm) {
            return Err(Error::XiOnWall { flag: idx, lambda: *l });
        }
        if lambda.iter().any(|l| *l < 0.0) {
            continue;
        }
        let det_k = crate::lattice::det_i64(&kappa);
        let gamma = compatible_basis(cd, chain);
        let mut flag = Flag {
            members: chain.clone(),
            gamma,
            kappa,
            lambda,
            nu: det_k.signum() as i32,
            n0: 0.0,
        };
        flag.n0 = n0(cd, &flag);
        out.push(flag);
    }
    Ok(out)
}

/// All complete flags whose steps are spanned by `α`'s, as member sets.
fn flag_chains(cd: &ClassData) -> Vec<Vec<Vec<usize>>> {
    let num = cd.num_rays();
    let span_members = |gens: &[usize]| -> Vec<usize> {
        let base: Vec<Vec<i64>> = gens.iter().map(|&i| cd.alpha[i].clone()).collect();
        let rk = rank_i64(&base);
        (0..num)
            .filter(|&i| {
                let mut t = base.clone();
                t.push(cd.alpha[i].clone());
                rank_i64(&t) == rk
            })
            .collect()
    };
    let mut chains: BTreeSet<Vec<Vec<usize>>> = BTreeSet::new();
    let mut stack: Vec<Vec<Vec<usize>>> = vec![vec![]];
    while let Some(chain) = stack.pop() {
        if chain.len() == cd.r {
            chains.insert(chain);
            continue;
        }
        let current: Vec<usize> = chain.last().cloned().unwrap_or_default();
        let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
        for i in 0..num {
            if current.contains(&i) {
                continue;
            }
            let mut gens = current.clone();
            gens.push(i);
            let next = span_members(&gens);
            if seen.insert(next.clone()) {
                let mut c = chain.clone();
                c.push(next);
                stack.push(c);
            }
        }
    }
    chains.into_iter().collect()
}

/// Greedy choice of one new `α` per step, then `γ_r` rescaled to `det = 1`.
fn compatible_basis(cd: &ClassData, chain: &[Vec<usize>]) -> Vec<Vec<Rational>> {
    let mut rows: Vec<Vec<i64>> = Vec::new();
    for step in chain {
        let pick = step
            .iter()
            .copied()
            .find(|&i| {
                let mut t = rows.clone();
                t.push(cd.alpha[i].clone());
                rank_i64(&t) == t.len()
            })
            .expect("each step raises the dimension");
        rows.push(cd.alpha[pick].clone());
    }
    let mut g: Vec<Vec<Rational>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| Rational::from_integer(x)).collect())
        .collect();
    let d = det_rational(&g);
    let last = g.len() - 1;
    for x in g[last].iter_mut() {
        *x /= d;
    }
    debug_assert_eq!(det_rational(&g), Rational::from_integer(1));
    g
}

/// `N₀(F) = r · max 1/|a_{li}| · max |a_{li}|` over the nonzero expansion coefficients.
fn n0(cd: &ClassData, flag: &Flag) -> f64 {
    let a = flag.alpha_expansions(cd);
    let vals: Vec<f64> = a
        .iter()
        .flatten()
        .filter(|x| !x.is_zero())
        .map(|x| (*x.numer() as f64 / *x.denom() as f64).abs())
        .collect();
    let big = vals.iter().copied().fold(0.0, f64::max);
    let inv = vals.iter().map(|v| 1.0 / v).fold(0.0, f64::max);
    cd.r as f64 * inv * big
}

/// `ε_r = eps_max`, `ε_i = ε_{i+1} / (2N)` with `N = max(2, ⌈N₀⌉ + 1)`.
pub fn epsilon_schedule(flag: &Flag, eps_max: f64) -> Vec<f64> {
    let n = (flag.n0.ceil() + 1.0).max(2.0);
    geometric_schedule(flag.gamma.len(), eps_max, 1.0 / (2.0 * n))
}

/// Radii with a fixed ratio between consecutive circles.
pub fn geometric_schedule(r: usize, eps_max: f64, ratio: f64) -> Vec<f64> {
    let mut e = vec![eps_max; r];
    for i in (0..r.saturating_sub(1)).rev() {
        e[i] = e[i + 1] * ratio;
    }
    e
}

/// One signed torus `|γ_j(u)| = ε_j`.
#[derive(Debug, Clone, Serialize)]
pub struct Torus {
    pub flag: Flag,
    pub radii: Vec<f64>,
    /// Ratio `ε_j / ε_{j+1}`.
    pub ratio: f64,
    pub sign: i32,
    pub min_q_sample: Vec<f64>,
}

impl Torus {
    /// The point `u = γ⁻¹ w` over angles `θ`.
    pub fn point(&self, ginv: &[Vec<C64>], w: &[C64]) -> Vec<C64> {
        ginv.iter()
            .map(|row| row.iter().zip(w).map(|(a, b)| a * b).sum())
            .collect()
    }
}

/// The cycle `Z(ε) = Σ_F ν(F) T_F(ε)`.
#[derive(Debug, Clone, Serialize)]
pub struct Cycle {
    pub tori: Vec<Torus>,
    pub eps_max: f64,
}

impl Cycle {
    /// The same cycle with every radius multiplied by `lambda`.
    pub fn scaled(&self, lambda: f64) -> Cycle {
        let mut c = self.clone();
        c.eps_max *= lambda;
        for t in &mut c.tori {
            for e in &mut t.radii {
                *e *= lambda;
            }
            for m in &mut t.min_q_sample {
                *m = f64::NAN;
            }
        }
        c
    }
}

const FALLBACK_RATIOS: [f64; 10] = [0.45, 0.4, 0.35, 0.3, 0.25, 0.2, 0.15, 0.1, 0.05, 0.02];

/// Attaches radii to each flag and checks that every torus stays away
/// from the hypersurfaces `Q_c = 0` of the whole family `E_t`, `t ∈ [0, 1]`.
pub fn build_cycle(cd: &ClassData, bundle: &DeformedBundle, flags: &[Flag], eps_max: f64) -> Result<Cycle> {
    if flags.is_empty() {
        return Err(Error::PreconditionViolated("no flags in FL+".into()));
    }
    if !(eps_max > 0.0) {
        return Err(Error::PreconditionViolated("eps_max must be positive".into()));
    }
    let family = bundle.qc_family(cd);
    let mut tori = Vec::new();
    for flag in flags {
        let default = {
            let n = (flag.n0.ceil() + 1.0).max(2.0);
            1.0 / (2.0 * n)
        };
        let mut ratios = vec![default];
        ratios.extend(FALLBACK_RATIOS.iter().copied().filter(|&x| x != default));
        let mut chosen = None;
        let mut last_reason = String::new();
        for ratio in ratios {
            match avoidance(cd, &family, flag, ratio) {
                Ok(()) => {
                    chosen = Some(ratio);
                    break;
                }
                Err(why) => last_reason = why,
            }
        }
        let Some(ratio) = chosen else {
            return Err(Error::CycleTouchesDiscriminant(format!(
                "no admissible radius ratio for flag {:?}: {last_reason}",
                flag.members
            )));
        };
        let radii = geometric_schedule(cd.r, eps_max, ratio);
        let mut torus = Torus {
            flag: flag.clone(),
            radii,
            ratio,
            sign: flag.nu,
            min_q_sample: vec![],
        };
        torus.min_q_sample = sample_min_q(bundle, &torus);
        let e1 = torus.radii[0];
        for (c, m) in torus.min_q_sample.iter().enumerate() {
            let nc = cd.n_c[c] as i32;
            if !(*m > 1e-8 * e1.powi(nc)) {
                return Err(Error::CycleTouchesDiscriminant(format!(
                    "min |Q_{c}| = {m:e} on the torus of flag {:?}",
                    flag.members
                )));
            }
        }
        tori.push(torus);
    }
    Ok(Cycle { tori, eps_max })
}

/// Dense grid minimum of `|Q_c|` on a torus (at least 10⁴ points when r ≥ 2).
fn sample_min_q(bundle: &DeformedBundle, torus: &Torus) -> Vec<f64> {
    let r = torus.radii.len();
    let per: usize = match r {
        1 => 4096,
        2 => 128,
        _ => 24,
    };
    let ginv = torus.flag.gamma_inverse();
    let mut mins = vec![f64::INFINITY; bundle.qc.len()];
    let total = per.pow(r as u32);
    for idx in 0..total {
        let mut k = idx;
        let w: Vec<C64> = (0..r)
            .map(|j| {
                let a = k % per;
                k /= per;
                C64::from_polar(torus.radii[j], 2.0 * std::f64::consts::PI * (a as f64 + 0.5) / per as f64)
            })
            .collect();
        let u = torus.point(&ginv, &w);
        for (c, q) in bundle.qc.iter().enumerate() {
            mins[c] = mins[c].min(q.eval(&u).norm());
        }
    }
    mins
}

/// Checks that the torus of `flag` at radius ratio `ratio` can be reached
/// from the hierarchical regime without meeting any `Q_c = 0`.
fn avoidance(cd: &ClassData, family: &[MultiPoly], flag: &Flag, ratio: f64) -> std::result::Result<(), String> {
    let r = cd.r;
    if r == 1 {
        return Ok(());
    }
    // growth of the ratio at t = 0: hyperplanes α_l = 0 must miss every intermediate torus
    let a = flag.alpha_expansions(cd);
    let steps = 200;
    for s in 0..=steps {
        let rho = (1e-6f64).powf(1.0 - s as f64 / steps as f64) * ratio.powf(s as f64 / steps as f64);
        let radii = geometric_schedule(r, 1.0, rho);
        for (l, row) in a.iter().enumerate() {
            let terms: Vec<f64> = row
                .iter()
                .zip(&radii)
                .map(|(x, e)| (*x.numer() as f64 / *x.denom() as f64).abs() * e)
                .filter(|v| *v > 0.0)
                .collect();
            if terms.len() < 2 {
                continue;
            }
            let big = terms.iter().copied().fold(0.0, f64::max);
            let rest: f64 = terms.iter().sum::<f64>() - big;
            if big <= rest * (1.0 + 1e-9) {
                return Err(format!("hyperplane of ray {l} meets the torus at ratio {rho:.4}"));
            }
        }
    }
    // deformation t ∈ [0, 1] at fixed ratio: count roots in the first circle
    let radii = geometric_schedule(r, 1.0, ratio);
    let ginv = flag.gamma_inverse();
    let per: usize = if r == 2 { 48 } else { 12 };
    let t_steps = 20;
    for (c, q) in family.iter().enumerate() {
        let mut count: Option<usize> = None;
        for ts in 0..=t_steps {
            let t = ts as f64 / t_steps as f64;
            let outer = per.pow((r - 1) as u32);
            for idx in 0..outer {
                let mut k = idx;
                let rest: Vec<C64> = (1..r)
                    .map(|j| {
                        let a = k % per;
                        k /= per;
                        C64::from_polar(radii[j], 2.0 * std::f64::consts::PI * (a as f64 + 0.25) / per as f64)
                    })
                    .collect();
                let coeffs = first_circle_coeffs(q, &ginv, &rest, t, cd.n_c[c]);
                let lead = coeffs.iter().map(|x| x.norm()).fold(0.0, f64::max);
                if lead == 0.0 {
                    return Err(format!("Q_{c} vanishes identically on a circle"));
                }
                let roots = if coeffs.iter().skip(1).any(|x| x.norm() > 1e-14 * lead) {
                    aberth(&coeffs).roots
                } else {
                    vec![]
                };
                let mut inside = 0;
                for z in roots {
                    let m = z.norm() / radii[0];
                    if (m - 1.0).abs() < 1e-3 {
                        return Err(format!("zero of Q_{c} within 0.1% of the torus at t = {t}"));
                    }
                    if m < 1.0 {
                        inside += 1;
                    }
                }
                match count {
                    None => count = Some(inside),
                    Some(k) if k != inside => {
                        return Err(format!("zeros of Q_{c} cross the torus near t = {t}"));
                    }
                    _ => {}
                }
            }
        }
    }
    Ok(())
}

/// Coefficients in `w_1` of `Q(γ⁻¹ (w_1, rest), t)`.
fn first_circle_coeffs(q: &MultiPoly, ginv: &[Vec<C64>], rest: &[C64], t: f64, deg: usize) -> Vec<C64> {
    // sample on deg+1 points and interpolate (exact for a polynomial of degree deg)
    let m = deg + 1;
    let r = ginv.len();
    let vals: Vec<C64> = (0..m)
        .map(|k| {
            let w1 = C64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / m as f64);
            let mut w = vec![w1];
            w.extend_from_slice(rest);
            let mut u: Vec<C64> = (0..r)
                .map(|i| ginv[i].iter().zip(&w).map(|(a, b)| a * b).sum())
                .collect();
            u.push(C64::new(t, 0.0));
            q.eval(&u)
        })
        .collect();
    (0..m)
        .map(|j| {
            vals.iter()
                .enumerate()
                .map(|(k, v)| v * C64::from_polar(1.0, -2.0 * std::f64::consts::PI * (j * k % m) as f64 / m as f64))
                .sum::<C64>()
                / m as f64
        })
        .collect()
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub(crate) fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Result of [`tau_regularity`].
#[derive(Debug, Clone, Serialize)]
pub struct TauRegularity {
    pub regular: bool,
    pub min_coefficient: f64,
    pub witness: Vec<Vec<i64>>,
}

/// `min_ρ min_γ |a_γ^ρ(ξ)|` over bases `ρ` drawn from the partial sums of the `α_i`.
pub fn tau_regularity(cd: &ClassData, xi: &[f64], tau: f64) -> TauRegularity {
    let num = cd.num_rays();
    let r = cd.r;
    let mut sums: BTreeSet<Vec<i64>> = BTreeSet::new();
    for mask in 1u64..(1u64 << num) {
        let v: Vec<i64> = (0..r)
            .map(|k| (0..num).filter(|i| mask & (1 << i) != 0).map(|i| cd.alpha[i][k]).sum())
            .collect();
        if v.iter().any(|&x| x != 0) {
            sums.insert(v);
        }
    }
    let sums: Vec<Vec<i64>> = sums.into_iter().collect();
    let mut best = f64::INFINITY;
    let mut witness = Vec::new();
    for idx in combinations(sums.len(), r) {
        let basis: Vec<Vec<i64>> = idx.iter().map(|&i| sums[i].clone()).collect();
        if rank_i64(&basis) < r {
            continue;
        }
        let bt: Vec<Vec<f64>> = (0..r)
            .map(|k| basis.iter().map(|v| v[k] as f64).collect())
            .collect();
        if let Some(a) = linalg::solve_real(&bt, xi) {
            let m = a.iter().map(|x| x.abs()).fold(f64::INFINITY, f64::min);
            if m < best {
                best = m;
                witness = basis;
            }
        }
    }
    TauRegularity {
        regular: best > tau,
        min_coefficient: best,
        witness,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundle::examples::p1xp1_deformed;
    use crate::classes::class_data;
    use crate::fan::examples::*;
    use proptest::prelude::*;

    #[test]
    fn p1_flag() {
        let cd = class_data(&projective_space(1)).unwrap();
        let flags = enumerate_plus_flags(&cd, &[1.0]).unwrap();
        assert_eq!(flags.len(), 1);
        assert_eq!(flags[0].kappa, vec![vec![2]]);
        assert_eq!(flags[0].nu, 1);
        assert_eq!(epsilon_schedule(&flags[0], 0.3), vec![0.3]);
    }

    #[test]
    fn p1xp1_flags() {
        let cd = class_data(&p1xp1()).unwrap();
        let flags = enumerate_plus_flags(&cd, &[2.0, 1.0]).unwrap();
        assert_eq!(flags.len(), 1);
        assert_eq!(flags[0].members[0], vec![0, 1]);
        let err = enumerate_plus_flags(&cd, &[1.0, 1.0]).unwrap_err();
        assert_eq!(err.code(), "XiOnWall");
        let s = epsilon_schedule(&flags[0], 0.1);
        assert!(s[0] < s[1]);
        assert_eq!(flags[0].n0, 2.0);
        assert!((s[0] - 0.1 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn schedule_division() {
        let s = geometric_schedule(2, 0.1, 1.0 / 8.0);
        assert_eq!(s, vec![0.0125, 0.1]);
    }

    #[test]
    fn f1_flag_sign() {
        let cd = class_data(&hirzebruch(1)).unwrap();
        let flags = enumerate_plus_flags(&cd, &[1.0, 1.0]).unwrap();
        assert_eq!(flags.len(), 1);
        assert_eq!(flags[0].members[0], vec![0, 2]);
        assert_eq!(flags[0].nu, -1);
    }

    #[test]
    fn p2_cycle() {
        let cd = class_data(&projective_space(2)).unwrap();
        let b = DeformedBundle::tangent(&cd);
        let flags = enumerate_plus_flags(&cd, &[1.0]).unwrap();
        let cyc = build_cycle(&cd, &b, &flags, 0.1).unwrap();
        assert_eq!(cyc.tori.len(), 1);
        assert!((cyc.tori[0].min_q_sample[0] - 1e-3).abs() < 1e-12);
    }

    #[test]
    fn deformed_cycle_ratio() {
        let cd = class_data(&p1xp1()).unwrap();
        let xi = cd.default_xi().unwrap();
        let flags = enumerate_plus_flags(&cd, &xi).unwrap();
        let tangent = build_cycle(&cd, &DeformedBundle::tangent(&cd), &flags, 0.1).unwrap();
        assert!((tangent.tori[0].ratio - 1.0 / 6.0).abs() < 1e-15);
        let b = p1xp1_deformed(&cd, 0.3, 0.2);
        let c = build_cycle(&cd, &b, &flags, 0.1).unwrap();
        assert!(c.tori[0].ratio > 0.245);
        let big = p1xp1_deformed(&cd, 0.9, 1.0);
        assert_eq!(build_cycle(&cd, &big, &flags, 0.1).unwrap_err().code(), "CycleTouchesDiscriminant");
    }

    #[test]
    fn tau_examples() {
        let cd = class_data(&projective_space(1)).unwrap();
        let t = tau_regularity(&cd, &[3.0], 1.0);
        assert!(t.regular);
        assert!((t.min_coefficient - 1.5).abs() < 1e-14);
        assert!(!tau_regularity(&cd, &[3.0], 1.5).regular);
        assert!(!tau_regularity(&cd, &[0.0], 0.1).regular);
        let cd = class_data(&p1xp1()).unwrap();
        // (2, 1) = α_0 + α_1 + α_2 is itself a partial sum
        let t = tau_regularity(&cd, &[2.0, 1.0], 0.0);
        assert!(t.min_coefficient.abs() < 1e-14);
        assert!(t.witness.contains(&vec![2, 1]));
        let t = tau_regularity(&cd, &cd.default_xi().unwrap(), 0.0);
        assert!(t.regular && t.min_coefficient > 0.0);
        assert_eq!(t.witness.len(), 2);
    }

    proptest! {
        #[test]
        fn flags_are_positive_and_unimodular(x in 0.05f64..3.0, y in 0.05f64..3.0) {
            for f in [p1xp1(), hirzebruch(1), hirzebruch(2)] {
                let cd = class_data(&f).unwrap();
                let Ok(flags) = enumerate_plus_flags(&cd, &[x, y]) else { continue };
                for fl in &flags {
                    prop_assert_eq!(det_rational(&fl.gamma), Rational::from_integer(1));
                    prop_assert!(fl.lambda.iter().all(|l| *l > 0.0));
                    let back: Vec<f64> = (0..2).map(|k| fl.lambda.iter().zip(&fl.kappa).map(|(l, v)| l * v[k] as f64).sum()).collect();
                    prop_assert!((back[0] - x).abs() < 1e-12 && (back[1] - y).abs() < 1e-12);
                }
            }
        }

        #[test]
        fn chamber_stability(s in 0.01f64..0.3) {
            // (1, 1-s) and (1, 1-s/2) lie in one chamber of P1xP1
            let cd = class_data(&p1xp1()).unwrap();
            let a = enumerate_plus_flags(&cd, &[1.0, 1.0 - s]).unwrap();
            let b = enumerate_plus_flags(&cd, &[1.0, 1.0 - s / 2.0]).unwrap();
            prop_assert_eq!(a.len(), b.len());
            for (fa, fb) in a.iter().zip(&b) {
                prop_assert_eq!(&fa.members, &fb.members);
                prop_assert_eq!(fa.nu, fb.nu);
            }
        }
    }
}
