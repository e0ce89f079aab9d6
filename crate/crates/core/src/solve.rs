//! All-solutions solving of `ṽ_j(u) = q_j` and continuation in the
//! deformation parameter.

use std::cmp::Ordering;

use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use crate::bundle::{cleared_family, scale_of, DeformedBundle, QscSystem};
use crate::classes::ClassData;
use crate::error::{Error, Result};
use crate::linalg::{self, C64};
use crate::poly::MultiPoly;

/// Per-point warning attached to a solution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum PointFlag {
    NearMultiple,
    NearDiscriminant { class: usize },
}

#[derive(Debug, Clone, Serialize)]
pub struct SolutionSet {
    pub points: Vec<Vec<C64>>,
    pub residuals: Vec<f64>,
    pub jac_dets: Vec<C64>,
    pub flags: Vec<Vec<PointFlag>>,
    pub q: Vec<C64>,
    pub scale: f64,
    pub warnings: Vec<String>,
}

impl SolutionSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn has_multiplicity_flags(&self) -> bool {
        self.flags.iter().flatten().any(|f| *f == PointFlag::NearMultiple)
    }
}

/// Result of [`roots_univariate`].
#[derive(Debug, Clone)]
pub struct Roots {
    pub roots: Vec<C64>,
    pub converged: bool,
    pub sweeps: usize,
}

/// All complex roots of a univariate polynomial.
pub fn roots_univariate(p: &MultiPoly) -> Result<Roots> {
    if p.arity() != 1 {
        return Err(Error::ArityMismatch {
            expected: 1,
            got: p.arity(),
        });
    }
    let d = p.degree().unwrap_or(0) as usize;
    if d == 0 {
        return Err(Error::PreconditionViolated(
            "root finding needs degree at least 1".into(),
        ));
    }
    let coeffs: Vec<C64> = (0..=d).map(|k| p.coefficient(&[k as u32])).collect();
    Ok(aberth(&coeffs))
}

fn horner(c: &[C64], x: C64) -> (C64, C64) {
    let mut p = C64::zero();
    let mut dp = C64::zero();
    for a in c.iter().rev() {
        dp = dp * x + p;
        p = p * x + a;
    }
    (p, dp)
}

fn root_ok(c: &[C64], x: C64) -> bool {
    let d = c.len() - 1;
    let norm: f64 = c.iter().map(|a| a.norm()).sum();
    horner(c, x).0.norm() <= 1e-12 * norm * x.norm().max(1.0).powi(d as i32)
}

/// Aberth–Ehrlich iteration; `c[k]` is the coefficient of `x^k`.
pub fn aberth(c: &[C64]) -> Roots {
    let mut c: Vec<C64> = c.to_vec();
    while c.len() > 1 && c.last().is_some_and(|x| x.is_zero()) {
        c.pop();
    }
    let zeros = c.iter().take_while(|x| x.is_zero()).count();
    let c: Vec<C64> = c[zeros..].to_vec();
    let d = c.len() - 1;
    let mut roots = vec![C64::zero(); zeros];
    if d == 0 {
        return Roots {
            roots,
            converged: true,
            sweeps: 0,
        };
    }
    let radius = (c[0].norm() / c[d].norm()).powf(1.0 / d as f64);
    let mut z: Vec<C64> = (0..d)
        .map(|k| {
            let th = 2.0 * std::f64::consts::PI * k as f64 / d as f64 + 0.4;
            C64::from_polar(radius * (1.0 + 0.01 * k as f64 / d as f64), th)
        })
        .collect();
    let mut converged = false;
    let mut sweeps = 0;
    let mut done = vec![false; d];
    while sweeps < 200 {
        sweeps += 1;
        let mut all = true;
        for k in 0..d {
            if done[k] {
                continue;
            }
            let (p, dp) = horner(&c, z[k]);
            if p.is_zero() {
                done[k] = true;
                continue;
            }
            let ratio = p / dp;
            let s: C64 = (0..d).filter(|&j| j != k).map(|j| 1.0 / (z[k] - z[j])).sum();
            let w = ratio / (C64::new(1.0, 0.0) - ratio * s);
            if w.re.is_finite() && w.im.is_finite() {
                z[k] -= w;
            }
            if root_ok(&c, z[k]) && w.norm() <= 1e-14 * z[k].norm().max(1e-300) {
                done[k] = true;
            } else {
                all = false;
            }
        }
        if all {
            converged = true;
            break;
        }
    }
    if !converged {
        converged = z.iter().all(|&x| root_ok(&c, x));
    }
    roots.extend(z);
    Roots {
        roots,
        converged,
        sweeps,
    }
}

/// Precomputed data for repeatedly solving `ṽ(u) = y` at varying `y`.
#[derive(Debug, Clone)]
pub struct Solver {
    sys: QscSystem,
    num_grad: Vec<Vec<MultiPoly>>,
    den_grad: Vec<Vec<MultiPoly>>,
    sheared_num: Vec<MultiPoly>,
    sheared_den: Vec<MultiPoly>,
}

const SHEAR: C64 = C64::new(0.371_932_4, 0.213_688_1);

impl Solver {
    pub fn new(sys: &QscSystem) -> Result<Self> {
        if sys.r == 0 || sys.r > 3 {
            return Err(Error::UnsupportedRank(sys.r));
        }
        let grads = |ps: &[MultiPoly]| -> Result<Vec<Vec<MultiPoly>>> {
            ps.iter()
                .map(|p| (0..sys.r).map(|k| p.partial_derivative(k)).collect())
                .collect()
        };
        let (sheared_num, sheared_den) = if sys.r == 2 {
            // u_1 = x − c u_2, u_2 = u_2
            let x = MultiPoly::variable(2, 0);
            let y = MultiPoly::variable(2, 1);
            let img = [&x - &y.scale(SHEAR), y];
            (
                sys.numerators.iter().map(|p| p.compose(&img)).collect::<Result<_>>()?,
                sys.denominators.iter().map(|p| p.compose(&img)).collect::<Result<_>>()?,
            )
        } else {
            (vec![], vec![])
        };
        Ok(Solver {
            num_grad: grads(&sys.numerators)?,
            den_grad: grads(&sys.denominators)?,
            sys: sys.clone(),
            sheared_num,
            sheared_den,
        })
    }

    pub fn system(&self) -> &QscSystem {
        &self.sys
    }

    fn residual(&self, y: &[C64], u: &[C64]) -> (Vec<C64>, f64) {
        let mut f = Vec::with_capacity(self.sys.r);
        let mut worst: f64 = 0.0;
        for j in 0..self.sys.r {
            let n = &self.sys.numerators[j];
            let d = &self.sys.denominators[j];
            let v = n.eval(u) - y[j] * d.eval(u);
            let size = (n.eval_abs(u) + y[j].norm() * d.eval_abs(u)).max(1.0);
            worst = worst.max(v.norm() / size);
            f.push(v);
        }
        (f, worst)
    }

    fn jacobian(&self, y: &[C64], u: &[C64]) -> Vec<Vec<C64>> {
        (0..self.sys.r)
            .map(|j| {
                (0..self.sys.r)
                    .map(|k| self.num_grad[j][k].eval(u) - y[j] * self.den_grad[j][k].eval(u))
                    .collect()
            })
            .collect()
    }

    /// Newton iteration on the cleared system; returns the polished point
    /// and its relative residual.
    fn polish(&self, y: &[C64], u0: &[C64], scale: f64) -> Option<(Vec<C64>, f64)> {
        let mut u = u0.to_vec();
        let mut last_step = f64::INFINITY;
        for _ in 0..60 {
            let (f, res) = self.residual(y, &u);
            let jac = self.jacobian(y, &u);
            let neg: Vec<C64> = f.iter().map(|v| -v).collect();
            let Some(delta) = linalg::solve(&jac, &neg) else {
                return (res <= 1e-12).then_some((u, res));
            };
            let step = linalg::max_norm(&delta);
            for (a, b) in u.iter_mut().zip(&delta) {
                *a += b;
            }
            if step <= 1e-15 * scale || (res <= 1e-14 && step >= last_step) {
                break;
            }
            if step > 1e6 * scale {
                return None;
            }
            last_step = step;
        }
        let (_, res) = self.residual(y, &u);
        (res <= 1e-12).then_some((u, res))
    }

    /// Solves `ṽ(u) = y`.
    pub fn solve(&self, y: &[C64]) -> Result<SolutionSet> {
        let scale = scale_of(y, &self.sys.degrees);
        let candidates = match self.sys.r {
            1 => self.candidates_r1(y)?,
            2 => self.candidates_r2(y)?,
            _ => self.candidates_homotopy(y)?,
        };
        self.finish(y, scale, candidates)
    }

    fn candidates_r1(&self, y: &[C64]) -> Result<Vec<Vec<C64>>> {
        let p = &self.sys.numerators[0] - &self.sys.denominators[0].scale(y[0]);
        let d = p.degree().unwrap_or(0);
        if d == 0 {
            return Err(Error::EliminationBreakdown("cleared relation is constant".into()));
        }
        Ok(roots_univariate(&p)?.roots.into_iter().map(|x| vec![x]).collect())
    }

    fn candidates_r2(&self, y: &[C64]) -> Result<Vec<Vec<C64>>> {
        let p: Vec<MultiPoly> = (0..2)
            .map(|j| &self.sheared_num[j] - &self.sheared_den[j].scale(y[j]))
            .collect();
        let d1 = p[0].degree().unwrap_or(0) as usize;
        let d2 = p[1].degree().unwrap_or(0) as usize;
        if d1 == 0 || d2 == 0 {
            return Err(Error::EliminationBreakdown("cleared relation is constant".into()));
        }
        let bez = d1 * d2;
        let m = (bez + 1).next_power_of_two().max(4);
        let natural = {
            let s = y
                .iter()
                .zip(&self.sys.degrees)
                .filter(|(_, &d)| d > 0)
                .map(|(q, &d)| q.norm().powf(1.0 / d as f64))
                .fold(0.0, f64::max);
            if s > 0.0 {
                s
            } else {
                1.0
            }
        };
        let rho = natural;
        let nodes: Vec<C64> = (0..m)
            .map(|k| C64::from_polar(rho, 2.0 * std::f64::consts::PI * k as f64 / m as f64))
            .collect();
        let values: Vec<C64> = nodes
            .iter()
            .map(|&x| {
                let a = coeffs_in_last(&p[0], x, d1);
                let b = coeffs_in_last(&p[1], x, d2);
                linalg::det(&sylvester(&a, &b))
            })
            .collect();
        // Hadamard-type magnitude for the breakdown test
        let size = nodes
            .iter()
            .map(|&x| {
                let a: f64 = coeffs_in_last(&p[0], x, d1).iter().map(|c| c.norm()).sum();
                let b: f64 = coeffs_in_last(&p[1], x, d2).iter().map(|c| c.norm()).sum();
                a.powi(d2 as i32) * b.powi(d1 as i32)
            })
            .fold(0.0, f64::max);
        let vmax = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if !(vmax > 1e-13 * size) {
            return Err(Error::EliminationBreakdown(format!(
                "resultant vanishes to {vmax:e} against magnitude {size:e}"
            )));
        }
        // inverse DFT → coefficients of R(x)
        let mut coef: Vec<C64> = (0..m)
            .map(|j| {
                let s: C64 = values
                    .iter()
                    .enumerate()
                    .map(|(k, v)| {
                        v * C64::from_polar(1.0, -2.0 * std::f64::consts::PI * (j * k % m) as f64 / m as f64)
                    })
                    .sum();
                s / (m as f64) / rho.powi(j as i32)
            })
            .collect();
        coef.truncate(bez + 1);
        let mag = coef
            .iter()
            .enumerate()
            .map(|(j, c)| c.norm() * rho.powi(j as i32))
            .fold(0.0, f64::max);
        while coef.len() > 1 {
            let j = coef.len() - 1;
            if coef[j].norm() * rho.powi(j as i32) < 1e-9 * mag {
                coef.pop();
            } else {
                break;
            }
        }
        if coef.len() < 2 {
            return Ok(vec![]);
        }
        let xs = aberth(&coef).roots;
        let mut out = Vec::new();
        for x in xs {
            let a = coeffs_in_last(&p[0], x, d1);
            let b = coeffs_in_last(&p[1], x, d2);
            let (pa, pb) = if a[d1].norm() >= b[d2].norm() {
                (&a, &b)
            } else {
                (&b, &a)
            };
            let cand = aberth(pa).roots;
            let bnorm: f64 = pb.iter().map(|c| c.norm()).sum();
            let scored: Vec<(f64, C64)> = cand
                .into_iter()
                .map(|w| {
                    let v = horner(pb, w).0.norm() / (bnorm * w.norm().max(1.0).powi(pb.len() as i32));
                    (v, w)
                })
                .collect();
            let best = scored.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
            for (v, w) in scored {
                if v <= best.max(1e-10) * 1e3 {
                    out.push(vec![x - SHEAR * w, w]);
                }
            }
        }
        Ok(out)
    }

    fn candidates_homotopy(&self, y: &[C64]) -> Result<Vec<Vec<C64>>> {
        let r = self.sys.r;
        let f: Vec<MultiPoly> = (0..r)
            .map(|j| &self.sys.numerators[j] - &self.sys.denominators[j].scale(y[j]))
            .collect();
        let degs: Vec<u32> = f.iter().map(|p| p.degree().unwrap_or(0)).collect();
        if degs.contains(&0) {
            return Err(Error::EliminationBreakdown("cleared relation is constant".into()));
        }
        let gamma = C64::new(0.813_534, 0.581_589);
        let s = MultiPoly::variable(r + 1, r);
        let one_minus_s = &MultiPoly::one(r + 1) - &s;
        let h: Vec<MultiPoly> = (0..r)
            .map(|j| {
                let mut e = vec![0u32; r + 1];
                e[j] = degs[j];
                let g = &MultiPoly::monomial(e, C64::new(1.0, 0.0)) - &MultiPoly::one(r + 1);
                &(&g.scale(gamma) * &one_minus_s) + &(&f[j].extend_arity(1) * &s)
            })
            .collect();
        let tracker = Tracker::new(h)?;
        let mut starts: Vec<Vec<C64>> = vec![vec![]];
        for &d in &degs {
            starts = starts
                .into_iter()
                .flat_map(|p| {
                    (0..d).map(move |k| {
                        let mut q = p.clone();
                        q.push(C64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / d as f64));
                        q
                    })
                })
                .collect();
        }
        let ends: Vec<Option<Vec<C64>>> = starts
            .par_iter()
            .map(|s0| tracker.track(s0, 0.0, 1.0, 0.02, 1.0).ok().map(|p| p.end))
            .collect();
        Ok(ends.into_iter().flatten().collect())
    }

    fn finish(&self, y: &[C64], scale: f64, candidates: Vec<Vec<C64>>) -> Result<SolutionSet> {
        let polished: Vec<Option<(Vec<C64>, f64)>> = candidates
            .par_iter()
            .map(|c| self.polish(y, c, scale))
            .collect();
        let sys = self.sys.with_q(y);
        let neg = sys.negative_classes();
        let silent = sys.silent_classes();
        let mut warnings = Vec::new();
        let mut pts: Vec<(Vec<C64>, f64)> = Vec::new();
        for (u, res) in polished.into_iter().flatten() {
            let qv: Vec<C64> = sys.qc.iter().map(|p| p.eval(&u)).collect();
            let tol = |c: usize| 1e-10 * scale.powi(sys.qc[c].degree().unwrap_or(0) as i32);
            if let Some(&c) = neg.iter().find(|&&c| qv[c].norm() < tol(c)) {
                warnings.push(format!("rejected spurious point where Q_{c} vanishes"));
                continue;
            }
            if let Some(&c) = silent.iter().find(|&&c| qv[c].norm() < tol(c)) {
                warnings.push(format!(
                    "rejected point where Q_{c} vanishes although it appears in no relation"
                ));
                continue;
            }
            if pts
                .iter()
                .any(|(p, _)| linalg::max_norm(&diff(p, &u)) <= 1e-8 * scale)
            {
                continue;
            }
            pts.push((u, res));
        }
        pts.sort_by(|a, b| lex_cmp(&a.0, &b.0));
        let mut set = SolutionSet {
            points: vec![],
            residuals: vec![],
            jac_dets: vec![],
            flags: vec![],
            q: y.to_vec(),
            scale,
            warnings,
        };
        for (u, _) in pts {
            let (f, _) = self.residual(y, &u);
            let loc = sys.local(&u);
            let l = sys.log_jacobian(&loc);
            let v = sys.vtilde_from_q(&loc.q);
            let det_l = linalg::det(&l);
            let mut flags = Vec::new();
            let umax = linalg::max_norm(&u).max(1e-300);
            if det_l.norm() * umax.powi(sys.r as i32) < 1e-8 {
                flags.push(PointFlag::NearMultiple);
            }
            for (c, qc) in loc.q.iter().enumerate() {
                let deg = sys.qc[c].degree().unwrap_or(0) as i32;
                if qc.norm() < 1e-6 * umax.powi(deg) {
                    flags.push(PointFlag::NearDiscriminant { class: c });
                }
            }
            set.residuals.push(linalg::max_norm(&f));
            set.jac_dets.push(v.iter().product::<C64>() * det_l);
            set.flags.push(flags);
            set.points.push(u);
        }
        if set.len() != self.sys.euler {
            return Err(Error::DeficientCount {
                found: set.len(),
                expected: self.sys.euler,
                solutions: Box::new(set),
            });
        }
        Ok(set)
    }
}

fn diff(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn lex_cmp(a: &[C64], b: &[C64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    Ordering::Equal
}

/// Coefficients (low to high) in the last variable after fixing the first.
fn coeffs_in_last(p: &MultiPoly, x: C64, d: usize) -> Vec<C64> {
    let mut c = vec![C64::zero(); d + 1];
    for (e, v) in p.terms() {
        c[e[1] as usize] += v * x.powu(e[0]);
    }
    c
}

/// Sylvester matrix of two polynomials given low-to-high.
fn sylvester(a: &[C64], b: &[C64]) -> Vec<Vec<C64>> {
    let m = a.len() - 1;
    let n = b.len() - 1;
    let size = m + n;
    let mut s = vec![vec![C64::zero(); size]; size];
    for i in 0..n {
        for (k, c) in a.iter().rev().enumerate() {
            s[i][i + k] = *c;
        }
    }
    for i in 0..m {
        for (k, c) in b.iter().rev().enumerate() {
            s[n + i][i + k] = *c;
        }
    }
    s
}

/// Solves the quantum relations of `sys` at its own `q`.
pub fn solve_qsc(sys: &QscSystem) -> Result<SolutionSet> {
    Solver::new(sys)?.solve(&sys.q)
}

/// Predictor–corrector tracker for `H(u, t) = 0` given as polynomials in `(u, t)`.
#[derive(Debug, Clone)]
pub struct Tracker {
    r: usize,
    h: Vec<MultiPoly>,
    du: Vec<Vec<MultiPoly>>,
    dt: Vec<MultiPoly>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PathLog {
    pub start: Vec<C64>,
    pub end: Vec<C64>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub min_step: f64,
}

impl Tracker {
    pub fn new(h: Vec<MultiPoly>) -> Result<Self> {
        let r = h.len();
        let du = h
            .iter()
            .map(|p| (0..r).map(|k| p.partial_derivative(k)).collect())
            .collect::<Result<_>>()?;
        let dt = h.iter().map(|p| p.partial_derivative(r)).collect::<Result<_>>()?;
        Ok(Tracker { r, h, du, dt })
    }

    fn at(&self, u: &[C64], t: f64) -> Vec<C64> {
        let mut p = u.to_vec();
        p.push(C64::new(t, 0.0));
        p
    }

    fn value(&self, u: &[C64], t: f64) -> Vec<C64> {
        let p = self.at(u, t);
        self.h.iter().map(|f| f.eval(&p)).collect()
    }

    fn jac(&self, u: &[C64], t: f64) -> Vec<Vec<C64>> {
        let p = self.at(u, t);
        self.du
            .iter()
            .map(|row| row.iter().map(|f| f.eval(&p)).collect())
            .collect()
    }

    fn tangent(&self, u: &[C64], t: f64) -> Option<Vec<C64>> {
        let p = self.at(u, t);
        let rhs: Vec<C64> = self.dt.iter().map(|f| -f.eval(&p)).collect();
        linalg::solve(&self.jac(u, t), &rhs)
    }

    fn correct(&self, u0: &[C64], t: f64, scale: f64, iters: usize) -> Option<Vec<C64>> {
        let mut u = u0.to_vec();
        for k in 0..iters {
            let f: Vec<C64> = self.value(&u, t).iter().map(|v| -v).collect();
            let d = linalg::solve(&self.jac(&u, t), &f)?;
            let step = linalg::max_norm(&d);
            for (a, b) in u.iter_mut().zip(&d) {
                *a += b;
            }
            if step <= 1e-11 * scale {
                return Some(u);
            }
            if k > 0 && step > 1e-3 * scale {
                return None;
            }
        }
        None
    }

    /// Tracks one path from `t0` to `t1`.
    pub fn track(&self, start: &[C64], t0: f64, t1: f64, h0: f64, scale: f64) -> Result<PathLog> {
        let mut u = start.to_vec();
        let mut t = t0;
        let dir = if t1 >= t0 { 1.0 } else { -1.0 };
        let mut h = h0.abs().min((t1 - t0).abs()).max(1e-12);
        let mut log = PathLog {
            start: start.to_vec(),
            end: vec![],
            accepted_steps: 0,
            rejected_steps: 0,
            min_step: h,
        };
        let mut streak = 0;
        while (t1 - t) * dir > 1e-15 {
            let step = h.min((t1 - t).abs());
            let tn = t + dir * step;
            // RK4 predictor along du/dt = −H_u⁻¹ H_t
            let pred = (|| {
                let k1 = self.tangent(&u, t)?;
                let u2: Vec<C64> = u.iter().zip(&k1).map(|(a, k)| a + k * (dir * step / 2.0)).collect();
                let k2 = self.tangent(&u2, t + dir * step / 2.0)?;
                let u3: Vec<C64> = u.iter().zip(&k2).map(|(a, k)| a + k * (dir * step / 2.0)).collect();
                let k3 = self.tangent(&u3, t + dir * step / 2.0)?;
                let u4: Vec<C64> = u.iter().zip(&k3).map(|(a, k)| a + k * (dir * step)).collect();
                let k4 = self.tangent(&u4, tn)?;
                Some(
                    (0..self.r)
                        .map(|i| u[i] + (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (dir * step / 6.0))
                        .collect::<Vec<C64>>(),
                )
            })();
            let corrected = pred.and_then(|p| {
                let s = scale.max(linalg::max_norm(&p));
                self.correct(&p, tn, s, 4)
            });
            match corrected {
                Some(un) if linalg::max_norm(&diff(&un, &u)) <= 0.1 * scale.max(linalg::max_norm(&u)) => {
                    u = un;
                    t = tn;
                    log.accepted_steps += 1;
                    streak += 1;
                    if streak >= 3 {
                        h = (h * 1.6).min(0.1);
                        streak = 0;
                    }
                    if linalg::max_norm(&u) > 1e8 * scale {
                        return Err(Error::PathFailure {
                            t,
                            reason: "path diverged".into(),
                        });
                    }
                }
                _ => {
                    log.rejected_steps += 1;
                    streak = 0;
                    h *= 0.5;
                    log.min_step = log.min_step.min(h);
                    if h < 1e-10 {
                        return Err(Error::PathFailure {
                            t,
                            reason: "step size underflow".into(),
                        });
                    }
                }
            }
        }
        log.end = u;
        Ok(log)
    }
}

/// Output of [`continue_in_t`].
#[derive(Debug, Clone, Serialize)]
pub struct ContinuationReport {
    pub solutions: SolutionSet,
    pub paths: Vec<PathLog>,
    /// Largest distance between a tracked endpoint and the direct solution.
    pub max_endpoint_deviation: f64,
}

/// Tracks the solutions of the tangent system along `E_t`, `t ∈ [0, t_end]`.
pub fn continue_in_t(
    cd: &ClassData,
    bundle: &DeformedBundle,
    q: &[C64],
    t_end: f64,
    t_steps: usize,
    euler: usize,
) -> Result<ContinuationReport> {
    let start_bundle = bundle.at_t(cd, 0.0);
    let start_sys = crate::bundle::vtilde_system(cd, &start_bundle, q, euler)?;
    let start = solve_qsc(&start_sys)?;
    if t_end == 0.0 {
        return Ok(ContinuationReport {
            paths: start
                .points
                .iter()
                .map(|p| PathLog {
                    start: p.clone(),
                    end: p.clone(),
                    accepted_steps: 0,
                    rejected_steps: 0,
                    min_step: 0.0,
                })
                .collect(),
            solutions: start,
            max_endpoint_deviation: 0.0,
        });
    }
    let scale = start.scale;
    let tracker = Tracker::new(cleared_family(cd, bundle, q))?;
    let h0 = 1.0 / t_steps.max(1) as f64;
    let paths: Vec<Result<PathLog>> = start
        .points
        .par_iter()
        .map(|p| tracker.track(p, 0.0, t_end, h0, scale))
        .collect();
    let paths: Vec<PathLog> = paths.into_iter().collect::<Result<_>>()?;
    for i in 0..paths.len() {
        for k in i + 1..paths.len() {
            if linalg::max_norm(&diff(&paths[i].end, &paths[k].end)) <= 1e-8 * scale {
                return Err(Error::PathFailure {
                    t: t_end,
                    reason: format!("paths {i} and {k} end at the same point"),
                });
            }
        }
    }
    let end_bundle = bundle.at_t(cd, t_end);
    let end_sys = crate::bundle::vtilde_system(cd, &end_bundle, q, euler)?;
    let direct = solve_qsc(&end_sys)?;
    let mut worst: f64 = 0.0;
    for p in &paths {
        let d = direct
            .points
            .iter()
            .map(|x| linalg::max_norm(&diff(x, &p.end)))
            .fold(f64::INFINITY, f64::min);
        worst = worst.max(d);
    }
    if worst > 1e-8 * scale {
        return Err(Error::PathFailure {
            t: t_end,
            reason: format!("endpoint misses the direct solution set by {worst:e}"),
        });
    }
    let solver = Solver::new(&end_sys)?;
    let ends: Vec<Vec<C64>> = paths.iter().map(|p| p.end.clone()).collect();
    let solutions = solver.finish(q, scale, ends)?;
    Ok(ContinuationReport {
        solutions,
        paths,
        max_endpoint_deviation: worst,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundle::vtilde_system;
    use crate::classes::class_data;
    use crate::fan::examples::*;
    use crate::fan::Fan;
    use proptest::prelude::*;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn upoly(coeffs: &[C64]) -> MultiPoly {
        MultiPoly::from_terms(1, coeffs.iter().enumerate().map(|(k, v)| (vec![k as u32], *v))).unwrap()
    }

    fn sorted(mut v: Vec<C64>) -> Vec<C64> {
        v.sort_by(|a, b| lex_cmp(&[*a], &[*b]));
        v
    }

    #[test]
    fn univariate_examples() {
        let r = roots_univariate(&upoly(&[c(-1.0), c(0.0), c(1.0)])).unwrap();
        let r = sorted(r.roots);
        assert!((r[0] + 1.0).norm() < 1e-14 && (r[1] - 1.0).norm() < 1e-14);
        let r = roots_univariate(&upoly(&[c(-8.0), c(0.0), c(0.0), c(1.0)])).unwrap();
        for k in 0..3 {
            let w = C64::from_polar(2.0, 2.0 * std::f64::consts::PI * k as f64 / 3.0);
            assert!(r.roots.iter().any(|x| (x - w).norm() < 1e-12));
        }
    }

    #[test]
    fn univariate_from_factored_roots() {
        let want = [
            C64::new(0.5, 0.1),
            C64::new(-1.2, 0.0),
            C64::new(0.0, 2.0),
            C64::new(3.0, -1.0),
            C64::new(-0.3, -0.7),
            C64::new(1.1, 0.9),
        ];
        let mut p = upoly(&[c(1.0)]);
        for w in &want {
            p = &p * &upoly(&[-*w, c(1.0)]);
        }
        let r = roots_univariate(&p).unwrap();
        assert!(r.converged);
        for w in &want {
            assert!(r.roots.iter().any(|x| (x - w).norm() < 1e-10));
        }
    }

    fn system(f: &Fan, bundle: Option<DeformedBundle>, q: &[C64]) -> QscSystem {
        let cd = class_data(f).unwrap();
        let b = bundle.unwrap_or_else(|| DeformedBundle::tangent(&cd));
        vtilde_system(&cd, &b, q, f.euler_characteristic()).unwrap()
    }

    #[test]
    fn p1_tangent() {
        let s = solve_qsc(&system(&projective_space(1), None, &[c(1.0)])).unwrap();
        assert_eq!(s.len(), 2);
        assert!((s.points[0][0] + 1.0).norm() < 1e-14);
        assert!((s.jac_dets[0] + 2.0).norm() < 1e-13);
        assert!((s.jac_dets[1] - 2.0).norm() < 1e-13);
    }

    #[test]
    fn p1xp1_deformed_triangular() {
        let f = p1xp1();
        let cd = class_data(&f).unwrap();
        let b = crate::bundle::examples::p1xp1_deformed(&cd, 0.3, 0.2);
        let q = [c(0.01), c(0.02)];
        let s = solve_qsc(&system(&f, Some(b), &q)).unwrap();
        assert_eq!(s.len(), 4);
        let a = (0.01f64 + 0.06 * 0.02).sqrt();
        let bq = 0.02f64.sqrt();
        for (u1, u2) in [(a, bq), (a, -bq), (-a, bq), (-a, -bq)] {
            assert!(s
                .points
                .iter()
                .any(|p| (p[0] - u1).norm() < 1e-12 && (p[1] - u2).norm() < 1e-12));
        }
    }

    #[test]
    fn counts_match_euler() {
        let q2 = [C64::new(0.013, 0.004), C64::new(-0.021, 0.009)];
        for f in [p1xp1(), hirzebruch(1), hirzebruch(2)] {
            let s = solve_qsc(&system(&f, None, &q2)).unwrap();
            assert_eq!(s.len(), 4);
        }
        let s = solve_qsc(&system(&projective_space(3), None, &[c(0.2)])).unwrap();
        assert_eq!(s.len(), 4);
    }

    #[test]
    fn continuation_p1() {
        let f = projective_space(1);
        let cd = class_data(&f).unwrap();
        let e = 0.4;
        let lf = |x: f64| crate::poly::LinearForm(vec![c(x)]);
        let b = DeformedBundle::new(&cd, vec![vec![vec![lf(1.0), lf(e)], vec![lf(e), lf(1.0)]]]).unwrap();
        let q = [c(0.5)];
        let rep = continue_in_t(&cd, &b, &q, 1.0, 10, 2).unwrap();
        let want = (0.5 / (1.0 - e * e)).sqrt();
        assert!((rep.solutions.points[1][0] - want).norm() < 1e-12);
        let zero = continue_in_t(&cd, &b, &q, 0.0, 10, 2).unwrap();
        assert!((zero.solutions.points[1][0] - 0.5f64.sqrt()).norm() < 1e-14);
    }

    #[test]
    fn homotopy_matches_resultant() {
        let f = hirzebruch(1);
        let s = system(&f, None, &[C64::new(0.3, 0.1), C64::new(0.2, -0.05)]);
        let solver = Solver::new(&s).unwrap();
        let direct = solver.solve(&s.q).unwrap();
        let cands = solver.candidates_homotopy(&s.q).unwrap();
        let hom = solver.finish(&s.q, direct.scale, cands).unwrap();
        for (a, b) in direct.points.iter().zip(&hom.points) {
            assert!(linalg::max_norm(&diff(a, b)) < 1e-10);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn generic_random_counts(seed in 0u64..1000) {
            for f in [p1xp1(), hirzebruch(1), hirzebruch(2)] {
                let cd = class_data(&f).unwrap();
                let b = DeformedBundle::random(&cd, seed, 0.5);
                let q = [C64::new(0.031, 0.007), C64::new(0.017, -0.011)];
                let s = solve_qsc(&system(&f, Some(b), &q)).unwrap();
                prop_assert_eq!(s.len(), 4);
                for p in &s.points {
                    let v = s_vt(&f, seed, &q, p);
                    for (vj, qj) in v.iter().zip(&q) {
                        prop_assert!((vj / qj - 1.0).norm() < 1e-10);
                    }
                }
            }
        }

        #[test]
        fn scaling_covariance(seed in 0u64..1000) {
            let f = hirzebruch(1);
            let cd = class_data(&f).unwrap();
            let b = DeformedBundle::random(&cd, seed, 0.3);
            let q = [C64::new(0.031, 0.007), C64::new(0.017, -0.011)];
            let s = system(&f, Some(b), &q);
            let base = solve_qsc(&s).unwrap();
            let lam: f64 = 2.0;
            let ql: Vec<C64> = q.iter().zip(&s.degrees).map(|(x, &d)| x * lam.powi(d as i32)).collect();
            let scaled = solve_qsc(&s.with_q(&ql)).unwrap();
            for p in &base.points {
                let want: Vec<C64> = p.iter().map(|x| x * lam).collect();
                prop_assert!(scaled.points.iter().any(|x| linalg::max_norm(&diff(x, &want)) <= 1e-9 * linalg::max_norm(&want)));
            }
        }
    }

    fn s_vt(f: &Fan, seed: u64, q: &[C64], u: &[C64]) -> Vec<C64> {
        let cd = class_data(f).unwrap();
        let b = DeformedBundle::random(&cd, seed, 0.5);
        system(f, Some(b), q).vtilde(u)
    }
}
