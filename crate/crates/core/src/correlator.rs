//! Correlators: residue sums, torus integrals, fiber integrals, `q`-expansions,
//! the hypersurface formula and the intersection-number oracle.

use std::collections::BTreeMap;

use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use crate::bundle::{DeformedBundle, QscSystem};
use crate::classes::{is_nef_fano, ClassData};
use crate::cycles::Cycle;
use crate::error::{Error, Result};
use crate::fan::Fan;
use crate::linalg::{self, C64};
use crate::poly::MultiPoly;
use crate::solve::{SolutionSet, Solver};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Sum,
    Classical,
    Contour,
    Fiber,
    Expansion,
    Trmc,
}

/// A checked hypothesis with the sampled quantity behind it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Precondition {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Precondition {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Precondition {
            name: name.into(),
            passed,
            detail,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CorrelatorReport {
    pub method: Method,
    pub value: C64,
    pub advisory: bool,
    pub preconditions: Vec<Precondition>,
    /// Per-solution terms (sums) or per-torus values (contours).
    pub contributions: Vec<C64>,
    /// Nodes per circle at convergence, for quadrature methods.
    pub nodes: Option<usize>,
    /// Last relative change in the node-doubling sequence.
    pub change: Option<f64>,
}

impl CorrelatorReport {
    fn new(method: Method, value: C64, preconditions: Vec<Precondition>, contributions: Vec<C64>) -> Self {
        let advisory = preconditions.iter().any(|p| !p.passed);
        CorrelatorReport {
            method,
            value,
            advisory,
            preconditions,
            contributions,
            nodes: None,
            change: None,
        }
    }
}

/// Node-doubling controls for the trapezoid rule on tori.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Quadrature {
    pub start: usize,
    pub max: usize,
    pub tol: f64,
}

impl Quadrature {
    pub const CONTOUR: Quadrature = Quadrature {
        start: 256,
        max: 4096,
        tol: 1e-8,
    };
    pub const FIBER: Quadrature = Quadrature {
        start: 32,
        max: 512,
        tol: 1e-8,
    };
    pub const EXPANSION: Quadrature = Quadrature {
        start: 64,
        max: 512,
        tol: 1e-8,
    };

    /// Smaller starting grids for rank two and above.
    fn for_rank(self, r: usize) -> Quadrature {
        match r {
            1 => self,
            2 => Quadrature {
                start: self.start.min(256),
                max: self.max.min(1024),
                ..self
            },
            _ => Quadrature {
                start: self.start.min(32),
                max: self.max.min(128),
                ..self
            },
        }
    }
}

/// Mean of `f(w) · ∏ (w_j − c_j)` over the tensor grid on
/// `|w_j − c_j| = ρ_j`, i.e. `(2πi)^{-r} ∮ f dw`. Also returns the mean of
/// the absolute values as a size reference.
fn torus_mean<F>(center: &[C64], radii: &[f64], m: usize, f: F) -> Result<(C64, f64)>
where
    F: Fn(&[C64], usize) -> Result<C64> + Sync,
{
    let r = radii.len();
    let roots: Vec<C64> = (0..m)
        .map(|k| C64::from_polar(1.0, TWO_PI * k as f64 / m as f64))
        .collect();
    let outer = m.pow((r - 1) as u32);
    let rows: Vec<Result<(C64, f64)>> = (0..outer)
        .into_par_iter()
        .map(|row| {
            let mut w = vec![C64::zero(); r];
            let mut dw = C64::new(1.0, 0.0);
            let mut k = row;
            for j in 1..r {
                let e = roots[k % m] * radii[j];
                k /= m;
                w[j] = center[j] + e;
                dw *= e;
            }
            let mut s = C64::zero();
            let mut a = 0.0;
            for (i, root) in roots.iter().enumerate() {
                let e = root * radii[0];
                w[0] = center[0] + e;
                let v = f(&w, row * m + i)? * dw * e;
                s += v;
                a += v.norm();
            }
            Ok((s, a))
        })
        .collect();
    let mut total = C64::zero();
    let mut size = 0.0;
    for row in rows {
        let (s, a) = row?;
        total += s;
        size += a;
    }
    let n = (m as f64).powi(r as i32);
    Ok((total / n, size / n))
}

/// Doubles the node count until successive values agree.
fn adaptive<F>(q: Quadrature, eval: F) -> Result<(C64, usize, f64)>
where
    F: Fn(usize) -> Result<(C64, f64)>,
{
    let mut m = q.start;
    let (mut prev, _) = eval(m)?;
    loop {
        m *= 2;
        if m > q.max {
            let (v, size) = eval(m / 2)?;
            let change = (v - prev).norm() / v.norm().max(size).max(1e-300);
            return Err(Error::QuadratureStall { nodes: m / 2, change });
        }
        let (v, size) = eval(m)?;
        let change = (v - prev).norm() / v.norm().max(size).max(1e-300);
        if change < q.tol {
            return Ok((v, m, change));
        }
        prev = v;
    }
}

/// `σ(u) / (∏_c Q_c(u) · det L(u))`, the residue-sum term at a solution.
fn summand(sys: &QscSystem, sigma: &MultiPoly, u: &[C64]) -> C64 {
    let loc = sys.local(u);
    let l = sys.log_jacobian(&loc);
    let prod: C64 = loc.q.iter().product();
    sigma.eval(u) / (prod * linalg::det(&l))
}

fn check_sigma(sigma: &MultiPoly, r: usize) -> Result<()> {
    if sigma.arity() != r {
        return Err(Error::ArityMismatch {
            expected: r,
            got: sigma.arity(),
        });
    }
    Ok(())
}

/// Residue sum over the solutions of `ṽ(u) = q`.
pub fn quantum_sum(sys: &QscSystem, sigma: &MultiPoly) -> Result<CorrelatorReport> {
    let solver = Solver::new(sys)?;
    sum_with(&solver, &sys.q, sigma)
}

fn sum_over(sys: &QscSystem, set: &SolutionSet, sigma: &MultiPoly) -> Result<(C64, Vec<C64>)> {
    if set.has_multiplicity_flags() {
        return Err(Error::DegenerateSolutionSet);
    }
    let contributions: Vec<C64> = set.points.iter().map(|u| summand(sys, sigma, u)).collect();
    let value = contributions.iter().fold(C64::zero(), |a, b| a + b);
    Ok((value, contributions))
}

fn sum_with(solver: &Solver, q: &[C64], sigma: &MultiPoly) -> Result<CorrelatorReport> {
    let sys = solver.system().with_q(q);
    check_sigma(sigma, sys.r)?;
    let set = solver.solve(q)?;
    let (value, contributions) = sum_over(&sys, &set, sigma)?;
    let pre = vec![Precondition::new(
        "solutions_simple",
        true,
        format!("{} simple solutions", set.len()),
    )];
    Ok(CorrelatorReport::new(Method::Sum, value, pre, contributions))
}

/// Classical correlator `(2πi)^{-r} Σ_F ν(F) ∮_{T_F} σ / ∏ Q_c dμ`.
pub fn classical_contour(
    bundle: &DeformedBundle,
    sigma: &MultiPoly,
    cycle: &Cycle,
    quad: Quadrature,
) -> Result<CorrelatorReport> {
    check_sigma(sigma, bundle.r)?;
    let f = |u: &[C64]| -> C64 {
        let prod: C64 = bundle.qc.iter().map(|q| q.eval(u)).product();
        sigma.eval(u) / prod
    };
    contour_engine(Method::Classical, cycle, quad.for_rank(bundle.r), vec![], f)
}

fn contour_engine<F>(
    method: Method,
    cycle: &Cycle,
    quad: Quadrature,
    pre: Vec<Precondition>,
    f: F,
) -> Result<CorrelatorReport>
where
    F: Fn(&[C64]) -> C64 + Sync,
{
    let mut total = C64::zero();
    let mut per_torus = Vec::new();
    let mut nodes = 0;
    let mut worst: f64 = 0.0;
    for torus in &cycle.tori {
        let ginv = torus.flag.gamma_inverse();
        let r = torus.radii.len();
        let zero = vec![C64::zero(); r];
        let (v, m, change) = adaptive(quad, |m| {
            torus_mean(&zero, &torus.radii, m, |w, _| Ok(f(&torus.point(&ginv, w))))
        })?;
        let v = v * torus.sign as f64;
        per_torus.push(v);
        total += v;
        nodes = nodes.max(m);
        worst = worst.max(change);
    }
    let mut rep = CorrelatorReport::new(method, total, pre, per_torus);
    rep.nodes = Some(nodes);
    rep.change = Some(worst);
    Ok(rep)
}

/// Smallest `|ṽ_j|` over a dense sample of every torus of the cycle.
pub fn min_vtilde_on_cycle(sys: &QscSystem, cycle: &Cycle) -> Vec<f64> {
    let r = sys.r;
    let per: usize = match r {
        1 => 1024,
        2 => 96,
        _ => 20,
    };
    let mut mins = vec![f64::INFINITY; r];
    for torus in &cycle.tori {
        let ginv = torus.flag.gamma_inverse();
        let total = per.pow(r as u32);
        for idx in 0..total {
            let mut k = idx;
            let w: Vec<C64> = (0..r)
                .map(|j| {
                    let a = k % per;
                    k /= per;
                    C64::from_polar(torus.radii[j], TWO_PI * (a as f64 + 0.5) / per as f64)
                })
                .collect();
            let v = sys.vtilde(&torus.point(&ginv, &w));
            for j in 0..r {
                mins[j] = mins[j].min(v[j].norm());
            }
        }
    }
    mins
}

/// Radius factor making `min |ṽ_j| ≥ 16 |q_j|` on the rescaled cycle.
pub fn quantum_scale_factor(sys: &QscSystem, cycle: &Cycle) -> Result<f64> {
    let mins = min_vtilde_on_cycle(sys, cycle);
    let mut lambda: f64 = 1.0;
    for j in 0..sys.r {
        let need = 16.0 * sys.q[j].norm();
        let d = sys.degrees[j];
        if d == 0 {
            if !(mins[j] > sys.q[j].norm()) {
                return Err(Error::PreconditionViolated(format!(
                    "ṽ_{j} has degree 0 and min |ṽ_{j}| = {:e} does not exceed |q_{j}| = {:e}",
                    mins[j],
                    sys.q[j].norm()
                )));
            }
            continue;
        }
        lambda = lambda.max((need / mins[j]).powf(1.0 / d as f64));
    }
    Ok(lambda)
}

/// Quantum correlator as a contour integral with the geometric-series factor
/// `∏ ṽ_j / ∏ (ṽ_j − q_j)`. The cycle must satisfy `|q_j| < min |ṽ_j|`.
pub fn quantum_contour(
    sys: &QscSystem,
    sigma: &MultiPoly,
    cycle: &Cycle,
    quad: Quadrature,
) -> Result<CorrelatorReport> {
    check_sigma(sigma, sys.r)?;
    let mins = min_vtilde_on_cycle(sys, cycle);
    let mut pre = Vec::new();
    for j in 0..sys.r {
        let ok = mins[j] > sys.q[j].norm();
        pre.push(Precondition::new(
            &format!("min|vtilde_{j}| > |q_{j}|"),
            ok,
            format!("{:e} vs {:e}", mins[j], sys.q[j].norm()),
        ));
        if !ok {
            return Err(Error::PreconditionViolated(format!(
                "min |ṽ_{j}| = {:e} on the cycle does not exceed |q_{j}| = {:e}",
                mins[j],
                sys.q[j].norm()
            )));
        }
    }
    let f = |u: &[C64]| -> C64 {
        let loc: Vec<C64> = sys.qc.iter().map(|q| q.eval(u)).collect();
        let v = sys.vtilde_from_q(&loc);
        let prod: C64 = loc.iter().product();
        let mut g = sigma.eval(u) / prod;
        for (vj, qj) in v.iter().zip(&sys.q) {
            g *= vj / (vj - qj);
        }
        g
    };
    contour_engine(Method::Contour, cycle, quad.for_rank(sys.r), pre, f)
}

/// A polytorus `|y_j − center_j| = radii_j` in `y`-space.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TorusSpec {
    pub center: Vec<C64>,
    pub radii: Vec<f64>,
}

impl TorusSpec {
    /// `T_δ(q)`: circles of radius `δ` around `q`.
    pub fn t_delta(q: &[C64], delta: f64) -> Self {
        TorusSpec {
            center: q.to_vec(),
            radii: vec![delta; q.len()],
        }
    }

    /// `T_S`: origin-centred circles, inside `|q_j|` for `j ∈ S` and outside otherwise.
    pub fn t_s(q: &[C64], s: &[usize], inner: f64, outer: f64) -> Self {
        TorusSpec {
            center: vec![C64::zero(); q.len()],
            radii: q
                .iter()
                .enumerate()
                .map(|(j, qj)| qj.norm() * if s.contains(&j) { inner } else { outer })
                .collect(),
        }
    }
}

/// Integral of `Λ` over the preimage of a `y`-torus, via the branch sum at
/// every quadrature node.
pub fn fiber_integral(
    sys: &QscSystem,
    sigma: &MultiPoly,
    spec: &TorusSpec,
    quad: Quadrature,
) -> Result<CorrelatorReport> {
    check_sigma(sigma, sys.r)?;
    if spec.center.len() != sys.r || spec.radii.len() != sys.r {
        return Err(Error::ArityMismatch {
            expected: sys.r,
            got: spec.radii.len(),
        });
    }
    let mut pre = Vec::new();
    for j in 0..sys.r {
        let gap = ((spec.center[j] - sys.q[j]).norm() - spec.radii[j]).abs();
        let ok = gap > 1e-3 * spec.radii[j];
        pre.push(Precondition::new(
            &format!("q_{j} off the circle"),
            ok,
            format!("distance {gap:e}"),
        ));
        if !ok {
            return Err(Error::PreconditionViolated(format!(
                "q_{j} lies on the integration circle"
            )));
        }
        let origin_gap = (spec.center[j].norm() - spec.radii[j]).abs();
        if origin_gap < 1e-3 * spec.radii[j] {
            return Err(Error::PreconditionViolated(format!(
                "the circle for y_{j} passes through 0"
            )));
        }
    }
    let solver = Solver::new(sys)?;
    let g = |y: &[C64], node: usize| -> Result<C64> {
        let s = sys.with_q(y);
        let set = solver.solve(y).map_err(|e| Error::FiberSolveFailure {
            node,
            reason: e.to_string(),
        })?;
        let (v, _) = sum_over(&s, &set, sigma).map_err(|e| Error::FiberSolveFailure {
            node,
            reason: e.to_string(),
        })?;
        let den: C64 = y.iter().zip(&sys.q).map(|(a, b)| a - b).product();
        Ok(v / den)
    };
    let (v, m, change) = adaptive(quad.for_rank(sys.r), |m| torus_mean(&spec.center, &spec.radii, m, g))?;
    let mut rep = CorrelatorReport::new(Method::Fiber, v, pre, vec![]);
    rep.nodes = Some(m);
    rep.change = Some(change);
    Ok(rep)
}

/// Fiber integral over `T_δ(q)` with `δ = 0.1 min |q_j|`, halved on solver failure.
pub fn fiber_integral_delta(sys: &QscSystem, sigma: &MultiPoly, quad: Quadrature) -> Result<CorrelatorReport> {
    let mut delta = 0.1 * sys.q.iter().map(|x| x.norm()).fold(f64::INFINITY, f64::min);
    let mut last = None;
    for _ in 0..6 {
        match fiber_integral(sys, sigma, &TorusSpec::t_delta(&sys.q, delta), quad) {
            Ok(mut rep) => {
                rep.preconditions.push(Precondition::new("delta", true, format!("{delta:e}")));
                return Ok(rep);
            }
            Err(e @ Error::FiberSolveFailure { .. }) => {
                last = Some(e);
                delta *= 0.5;
            }
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

/// Coefficients of the `q`-series of a correlator.
#[derive(Debug, Clone, Serialize)]
pub struct QExpansion {
    /// `b ↦ coefficient of q^b` for `b` in the Mori cone.
    pub coefficients: BTreeMap<Vec<i64>, C64>,
    /// Sampled coefficients at lattice points outside the Mori cone.
    pub laurent: BTreeMap<Vec<i64>, C64>,
    pub radius: f64,
    pub nodes: usize,
    pub change: f64,
}

impl QExpansion {
    pub fn coefficient(&self, b: &[i64]) -> C64 {
        self.coefficients
            .get(b)
            .or_else(|| self.laurent.get(b))
            .copied()
            .unwrap_or_default()
    }
}

/// Cauchy extraction of the `q`-series coefficients with `|b_j| ≤ order`.
pub fn q_expansion(
    cd: &ClassData,
    sys: &QscSystem,
    sigma: &MultiPoly,
    order: usize,
    radius: f64,
    quad: Quadrature,
) -> Result<QExpansion> {
    let mut v = q_expansion_many(cd, sys, std::slice::from_ref(sigma), order, radius, quad)?;
    Ok(v.remove(0))
}

/// [`q_expansion`] for several insertions, sharing one solve per node.
pub fn q_expansion_many(
    cd: &ClassData,
    sys: &QscSystem,
    sigmas: &[MultiPoly],
    order: usize,
    radius: f64,
    quad: Quadrature,
) -> Result<Vec<QExpansion>> {
    for s in sigmas {
        check_sigma(s, sys.r)?;
    }
    let r = sys.r;
    let solver = Solver::new(sys)?;
    let quad = quad.for_rank(r);
    let min_nodes = (4 * order + 4).next_power_of_two();
    let grid = |m: usize| -> Result<Vec<Vec<C64>>> {
        let roots: Vec<C64> = (0..m)
            .map(|k| C64::from_polar(radius, TWO_PI * k as f64 / m as f64))
            .collect();
        let total = m.pow(r as u32);
        (0..total)
            .into_par_iter()
            .map(|idx| {
                let mut k = idx;
                let y: Vec<C64> = (0..r)
                    .map(|_| {
                        let a = k % m;
                        k /= m;
                        roots[a]
                    })
                    .collect();
                let s = sys.with_q(&y);
                let set = solver.solve(&y)?;
                sigmas.iter().map(|sigma| Ok(sum_over(&s, &set, sigma)?.0)).collect()
            })
            .collect()
    };
    let lattice: Vec<Vec<i64>> = {
        let mut pts: Vec<Vec<i64>> = vec![vec![]];
        for _ in 0..r {
            pts = pts
                .into_iter()
                .flat_map(|p| {
                    (-(order as i64)..=order as i64).map(move |b| {
                        let mut q = p.clone();
                        q.push(b);
                        q
                    })
                })
                .collect();
        }
        pts
    };
    // coefficient table [sigma][lattice point]
    let extract = |vals: &[Vec<C64>], m: usize| -> Vec<Vec<C64>> {
        let norm = (m as f64).powi(r as i32);
        let per_b: Vec<Vec<C64>> = lattice
            .iter()
            .map(|b| {
                let mut s = vec![C64::zero(); sigmas.len()];
                for (idx, v) in vals.iter().enumerate() {
                    let mut k = idx;
                    let mut phase = 0usize;
                    for &bj in b {
                        let a = k % m;
                        k /= m;
                        phase += (a * bj.rem_euclid(m as i64) as usize) % m;
                    }
                    let w = C64::from_polar(1.0, -TWO_PI * (phase % m) as f64 / m as f64);
                    for (acc, x) in s.iter_mut().zip(v) {
                        *acc += x * w;
                    }
                }
                let rb: i64 = b.iter().sum();
                let f = norm * radius.powi(rb as i32);
                s.into_iter().map(|x| x / f).collect()
            })
            .collect();
        (0..sigmas.len()).map(|i| per_b.iter().map(|row| row[i]).collect()).collect()
    };
    let mut m = quad.start.max(min_nodes);
    let mut prev = extract(&grid(m)?, m);
    loop {
        m *= 2;
        if m > quad.max.max(2 * min_nodes) {
            return Err(Error::QuadratureStall { nodes: m / 2, change: f64::NAN });
        }
        let cur = extract(&grid(m)?, m);
        let change = cur.iter().zip(&prev).map(|(a, b)| max_change(a, b)).fold(0.0, f64::max);
        if change < quad.tol {
            return Ok(cur
                .into_iter()
                .map(|coefs| {
                    let mut coefficients = BTreeMap::new();
                    let mut laurent = BTreeMap::new();
                    for (b, v) in lattice.iter().zip(coefs) {
                        if cd.in_mori_cone(b) {
                            coefficients.insert(b.clone(), v);
                        } else {
                            laurent.insert(b.clone(), v);
                        }
                    }
                    QExpansion {
                        coefficients,
                        laurent,
                        radius,
                        nodes: m,
                        change,
                    }
                })
                .collect());
        }
        prev = cur;
    }
}

fn max_change(a: &[C64], b: &[C64]) -> f64 {
    let size = a.iter().map(|x| x.norm()).fold(1.0, f64::max);
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
        / size
}

/// Anticanonical hypersurface correlator
/// `Σ σ(u) / ((1 − κ(u)) ∏ α_i(u)) · ∏ ṽ_j / det ṽ'` with `κ = Σ α_i`.
pub fn trmc_hypersurface(
    fan: &Fan,
    cd: &ClassData,
    bundle: &DeformedBundle,
    sys: &QscSystem,
    sigma: &MultiPoly,
) -> Result<CorrelatorReport> {
    check_sigma(sigma, sys.r)?;
    if !bundle.is_tangent(cd) {
        return Err(Error::NotTangentBundle);
    }
    let cert = is_nef_fano(fan, cd);
    if !cert.fano {
        return Err(Error::PreconditionViolated("hypersurface mode needs a Fano fan".into()));
    }
    if !sigma.is_homogeneous() || sigma.degree() != Some(cd.n as u32 - 1) {
        return Err(Error::PreconditionViolated(format!(
            "insertion must be homogeneous of degree {}",
            cd.n - 1
        )));
    }
    let kappa: Vec<C64> = (0..cd.r)
        .map(|k| C64::new(cd.alpha.iter().map(|a| a[k]).sum::<i64>() as f64, 0.0))
        .collect();
    let set = crate::solve::solve_qsc(sys)?;
    if set.has_multiplicity_flags() {
        return Err(Error::DegenerateSolutionSet);
    }
    let mut contributions = Vec::new();
    let mut closest = f64::INFINITY;
    for u in &set.points {
        let k: C64 = kappa.iter().zip(u).map(|(a, b)| a * b).sum();
        let gap = (C64::new(1.0, 0.0) - k).norm();
        closest = closest.min(gap);
        if gap < 1e-8 {
            return Err(Error::KappaPole(gap));
        }
        contributions.push(summand(sys, sigma, u) / (C64::new(1.0, 0.0) - k));
    }
    let value = contributions.iter().fold(C64::zero(), |a, b| a + b);
    let pre = vec![
        Precondition::new("tangent_bundle", true, String::new()),
        Precondition::new("fano", true, String::new()),
        Precondition::new("kappa_off_one", true, format!("min |1 - kappa| = {closest:e}")),
    ];
    Ok(CorrelatorReport::new(Method::Trmc, value, pre, contributions))
}

/// Intersection number `D_{i_1} ⋯ D_{i_n}` on a smooth complete surface or a
/// projective space.
pub fn intersection_oracle(f: &Fan, indices: &[usize]) -> Result<i64> {
    let n = f.dim();
    if indices.len() != n {
        return Err(Error::ArityMismatch {
            expected: n,
            got: indices.len(),
        });
    }
    if let Some(&i) = indices.iter().find(|&&i| i >= f.num_rays()) {
        return Err(Error::IndexOutOfRange {
            index: i,
            arity: f.num_rays(),
        });
    }
    if f.num_rays() == n + 1 {
        return Ok(1);
    }
    if n != 2 {
        return Err(Error::UnsupportedVariety);
    }
    let (i, j) = (indices[0], indices[1]);
    if i != j {
        return Ok(i64::from(f.in_cone(&[i, j])));
    }
    let wall = f
        .walls()
        .into_iter()
        .find(|w| w.rays == vec![i])
        .ok_or(Error::UnsupportedVariety)?;
    Ok(-wall.coeffs[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundle::examples::{p1_deformed, p1xp1_deformed};
    use crate::bundle::vtilde_system;
    use crate::classes::class_data;
    use crate::cycles::{build_cycle, enumerate_plus_flags};
    use crate::fan::examples::*;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn mono(e: &[u32]) -> MultiPoly {
        MultiPoly::monomial(e.to_vec(), c(1.0))
    }

    struct Case {
        fan: Fan,
        cd: ClassData,
        bundle: DeformedBundle,
    }

    impl Case {
        fn tangent(fan: Fan) -> Self {
            let cd = class_data(&fan).unwrap();
            let bundle = DeformedBundle::tangent(&cd);
            Case { fan, cd, bundle }
        }
        fn sys(&self, q: &[C64]) -> QscSystem {
            vtilde_system(&self.cd, &self.bundle, q, self.fan.euler_characteristic()).unwrap()
        }
        fn cycle(&self, eps: f64) -> Cycle {
            let xi = self.cd.default_xi().unwrap();
            let flags = enumerate_plus_flags(&self.cd, &xi).unwrap();
            build_cycle(&self.cd, &self.bundle, &flags, eps).unwrap()
        }
    }

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol * b.norm().max(1.0)
    }

    #[test]
    fn p1_sums() {
        let k = Case::tangent(projective_space(1));
        let q = [C64::new(0.3, 0.1)];
        let s = k.sys(&q);
        assert!(close(quantum_sum(&s, &mono(&[1])).unwrap().value, c(1.0), 1e-13));
        assert!(close(quantum_sum(&s, &mono(&[3])).unwrap().value, q[0], 1e-13));
        assert!(quantum_sum(&s, &mono(&[2])).unwrap().value.norm() < 1e-14);
    }

    #[test]
    fn p1xp1_deformed_sum() {
        let fan = p1xp1();
        let cd = class_data(&fan).unwrap();
        let bundle = p1xp1_deformed(&cd, 0.3, 0.2);
        let k = Case { fan, cd, bundle };
        let q = [c(0.01), c(0.02)];
        let v = quantum_sum(&k.sys(&q), &mono(&[3, 1])).unwrap().value;
        assert!(close(v, c(0.01 + 0.06 * 0.02), 1e-12));
    }

    #[test]
    fn classical_contours() {
        let k = Case::tangent(projective_space(2));
        let v = classical_contour(&k.bundle, &mono(&[2]), &k.cycle(0.1), Quadrature::CONTOUR).unwrap();
        assert!(close(v.value, c(1.0), 1e-12));
        let k = Case::tangent(p1xp1());
        let cyc = k.cycle(0.1);
        let v = classical_contour(&k.bundle, &mono(&[1, 1]), &cyc, Quadrature::CONTOUR).unwrap();
        assert!(close(v.value, c(1.0), 1e-12));
        let v = classical_contour(&k.bundle, &mono(&[2, 0]), &cyc, Quadrature::CONTOUR).unwrap();
        assert!(v.value.norm() < 1e-12);

        let fan = projective_space(1);
        let cd = class_data(&fan).unwrap();
        let e = 0.3;
        let k = Case {
            bundle: p1_deformed(&cd, e),
            cd,
            fan,
        };
        let v = classical_contour(&k.bundle, &mono(&[1]), &k.cycle(0.1), Quadrature::CONTOUR).unwrap();
        assert!(close(v.value, c(1.0 / (1.0 - e * e)), 1e-12));
    }

    #[test]
    fn f1_self_intersections() {
        let k = Case::tangent(hirzebruch(1));
        let cyc = k.cycle(0.1);
        for i in 0..4 {
            for j in i..4 {
                let s = &k.cd.alpha_form(i).to_poly() * &k.cd.alpha_form(j).to_poly();
                let v = classical_contour(&k.bundle, &s, &cyc, Quadrature::CONTOUR).unwrap();
                let want = intersection_oracle(&k.fan, &[i, j]).unwrap() as f64;
                assert!(close(v.value, c(want), 1e-10), "D{i}.D{j}: {} vs {want}", v.value);
            }
        }
    }

    #[test]
    fn quantum_contour_p2() {
        let k = Case::tangent(projective_space(2));
        let q = [c(0.01)];
        let s = k.sys(&q);
        let cyc = k.cycle(0.1);
        let lam = quantum_scale_factor(&s, &cyc).unwrap();
        let v = quantum_contour(&s, &mono(&[5]), &cyc.scaled(lam), Quadrature::CONTOUR).unwrap();
        assert!(close(v.value, q[0], 1e-9));
        assert_eq!(
            quantum_contour(&s, &mono(&[5]), &cyc.scaled(0.01), Quadrature::CONTOUR)
                .unwrap_err()
                .code(),
            "PreconditionViolated"
        );
    }

    #[test]
    fn fiber_examples() {
        let k = Case::tangent(p1xp1());
        let q = [c(0.01), c(0.02)];
        let s = k.sys(&q);
        let sig = mono(&[1, 1]);
        let phi = fiber_integral(&s, &sig, &TorusSpec::t_s(&q, &[], 0.25, 4.0), Quadrature::FIBER).unwrap();
        assert!(close(phi.value, c(1.0), 1e-9));
        let one = fiber_integral(&s, &sig, &TorusSpec::t_s(&q, &[0], 0.25, 4.0), Quadrature::FIBER).unwrap();
        assert!(one.value.norm() < 1e-9);
        let d = fiber_integral_delta(&s, &mono(&[3, 1]), Quadrature::FIBER).unwrap();
        assert!(close(d.value, q[0], 1e-9));
    }

    #[test]
    fn expansion_p2() {
        let k = Case::tangent(projective_space(2));
        let s = k.sys(&[c(0.01)]);
        let e = q_expansion(&k.cd, &s, &mono(&[5]), 3, 0.05, Quadrature::EXPANSION).unwrap();
        assert!(close(e.coefficient(&[1]), c(1.0), 1e-9));
        assert!(e.coefficient(&[0]).norm() < 1e-9);
        assert!(e.laurent.values().all(|v| v.norm() < 1e-8));
        let e = q_expansion(&k.cd, &s, &mono(&[2]), 2, 0.05, Quadrature::EXPANSION).unwrap();
        assert!(close(e.coefficient(&[0]), c(1.0), 1e-9));
    }

    #[test]
    fn trmc_p2() {
        let k = Case::tangent(projective_space(2));
        let q = 0.01;
        let v = trmc_hypersurface(&k.fan, &k.cd, &k.bundle, &k.sys(&[c(q)]), &mono(&[1])).unwrap();
        assert!(close(v.value, c(3.0 / (1.0 - 27.0 * q)), 1e-10));
        let fan = projective_space(1);
        let cd = class_data(&fan).unwrap();
        let b = p1_deformed(&cd, 0.2);
        let sys = vtilde_system(&cd, &b, &[c(0.1)], 2).unwrap();
        assert_eq!(
            trmc_hypersurface(&fan, &cd, &b, &sys, &MultiPoly::one(1)).unwrap_err().code(),
            "NotTangentBundle"
        );
    }

    #[test]
    fn trmc_p1xp1_closed_form() {
        let k = Case::tangent(p1xp1());
        let (q1, q2) = (0.011, 0.007);
        let v = trmc_hypersurface(&k.fan, &k.cd, &k.bundle, &k.sys(&[c(q1), c(q2)]), &mono(&[1, 0])).unwrap();
        let want = 2.0 * (1.0 + 4.0 * q1 - 4.0 * q2)
            / (1.0 - 8.0 * (q1 + q2) + 16.0 * (q1 - q2) * (q1 - q2));
        assert!(close(v.value, c(want), 1e-10), "{} vs {want}", v.value);
    }

    #[test]
    fn oracle_examples() {
        assert_eq!(intersection_oracle(&projective_space(2), &[0, 1]).unwrap(), 1);
        assert_eq!(intersection_oracle(&hirzebruch(1), &[1, 1]).unwrap(), -1);
        assert_eq!(intersection_oracle(&p1xp1(), &[0, 1]).unwrap(), 0);
        assert_eq!(intersection_oracle(&projective_space(3), &[0, 0, 2]).unwrap(), 1);
    }

    fn random_case(fan: Fan, seed: u64) -> Case {
        let cd = class_data(&fan).unwrap();
        let bundle = DeformedBundle::random(&cd, seed, 0.4);
        Case { fan, cd, bundle }
    }

    #[test]
    fn degenerate_set_is_refused() {
        // Q = u² − ε² u² vanishes identically at ε = 1, so every point is singular
        let fan = projective_space(1);
        let cd = class_data(&fan).unwrap();
        let b = p1_deformed(&cd, 1.0);
        assert!(vtilde_system(&cd, &b, &[c(0.1)], 2)
            .and_then(|s| quantum_sum(&s, &mono(&[1])))
            .is_err());
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(16))]
        #[test]
        fn degree_selection(seed in 0u64..1000, a in 0u32..5, b in 0u32..5, ph in 0.0f64..6.0) {
            let k = random_case(p1xp1(), seed);
            let q = [C64::from_polar(0.02, ph), C64::from_polar(0.015, 1.0 - ph)];
            let s = k.sys(&q);
            let v = quantum_sum(&s, &mono(&[a, b])).unwrap().value;
            let d = (a + b) as i64 - 2;
            if d < 0 || d % 2 != 0 {
                proptest::prop_assert!(v.norm() <= 1e-9 * s.scale());
            }
        }

        #[test]
        fn homogeneity(seed in 0u64..1000, e in 0u32..9, ph in 0.0f64..6.0) {
            let k = random_case(projective_space(2), seed);
            let q = [C64::from_polar(0.01, ph)];
            let sig = mono(&[e]);
            let v1 = quantum_sum(&k.sys(&q), &sig).unwrap().value;
            let v2 = quantum_sum(&k.sys(&[q[0] * 8.0]), &sig).unwrap().value;
            let want = v1 * 2f64.powi(e as i32 - 2);
            // vanishing degrees leave only rounding noise, hence the absolute floor
            proptest::prop_assert!((v2 - want).norm() <= 1e-9 * want.norm() + 1e-14);
        }
    }
}
