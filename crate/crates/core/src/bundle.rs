//! Linear deformations of the Euler sequence, the `Q_c` polynomials,
//! Stanley–Reisner generators and the quantum relations `ṽ_j = q_j`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::classes::ClassData;
use crate::error::{Error, Result};
use crate::fan::Fan;
use crate::linalg::{self, C64};
use crate::poly::{det_of_linear_matrix, det_of_poly_matrix, LinearForm, MultiPoly};

/// A linear deformation: one `n_c × n_c` matrix of elements of `W` per class.
#[derive(Debug, Clone, PartialEq)]
pub struct DeformedBundle {
    pub r: usize,
    /// `matrices[c][k][l] = a_{ik, il}` for the `k`-th and `l`-th rays of class `c`.
    pub matrices: Vec<Vec<Vec<LinearForm>>>,
    pub qc: Vec<MultiPoly>,
    /// `qc_grad[c][k] = ∂Q_c/∂u_k`.
    pub qc_grad: Vec<Vec<MultiPoly>>,
}

impl DeformedBundle {
    /// Validates shapes and derives the `Q_c`.
    pub fn new(cd: &ClassData, matrices: Vec<Vec<Vec<LinearForm>>>) -> Result<Self> {
        if matrices.len() != cd.num_classes() {
            return Err(Error::MatrixShapeMismatch {
                class: matrices.len().min(cd.num_classes()),
                detail: format!(
                    "expected {} class matrices, got {}",
                    cd.num_classes(),
                    matrices.len()
                ),
            });
        }
        for (c, m) in matrices.iter().enumerate() {
            let k = cd.n_c[c];
            if m.len() != k || m.iter().any(|row| row.len() != k) {
                return Err(Error::MatrixShapeMismatch {
                    class: c,
                    detail: format!("expected a {k}x{k} matrix"),
                });
            }
            if m.iter().flatten().any(|a| a.dim() != cd.r) {
                return Err(Error::MatrixShapeMismatch {
                    class: c,
                    detail: format!("entries must have {} coordinates", cd.r),
                });
            }
        }
        let qc = qc_polynomials(&matrices)?;
        let qc_grad = qc
            .iter()
            .map(|q| (0..cd.r).map(|k| q.partial_derivative(k)).collect())
            .collect::<Result<_>>()?;
        Ok(DeformedBundle {
            r: cd.r,
            matrices,
            qc,
            qc_grad,
        })
    }

    /// Builds the per-class matrices from a full `(n+r) × (n+r)` matrix,
    /// rejecting entries that couple different classes.
    pub fn from_full_matrix(cd: &ClassData, full: &[Vec<LinearForm>]) -> Result<Self> {
        let num = cd.num_rays();
        if full.len() != num || full.iter().any(|r| r.len() != num) {
            return Err(Error::MatrixShapeMismatch {
                class: 0,
                detail: format!("expected a {num}x{num} matrix"),
            });
        }
        for (i, row) in full.iter().enumerate() {
            for (k, a) in row.iter().enumerate() {
                if cd.class_of_ray[i] != cd.class_of_ray[k] && a.0.iter().any(|x| x.norm() != 0.0) {
                    return Err(Error::CrossClassEntry { row: i, col: k });
                }
            }
        }
        let mats = cd
            .class_members
            .iter()
            .map(|m| {
                m.iter()
                    .map(|&i| m.iter().map(|&k| full[i][k].clone()).collect())
                    .collect()
            })
            .collect();
        Self::new(cd, mats)
    }

    /// The undeformed tangent bundle: `a_{ii'} = δ_{ii'} α_i`.
    pub fn tangent(cd: &ClassData) -> Self {
        Self::new(cd, tangent_matrices(cd)).expect("tangent data is well formed")
    }

    /// Tangent data plus a seeded random perturbation whose largest
    /// coefficient has modulus `norm`.
    pub fn random(cd: &ClassData, seed: u64, norm: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut pert: Vec<Vec<Vec<LinearForm>>> = cd
            .class_members
            .iter()
            .map(|m| {
                m.iter()
                    .map(|_| {
                        m.iter()
                            .map(|_| {
                                LinearForm(
                                    (0..cd.r)
                                        .map(|_| {
                                            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                                        })
                                        .collect(),
                                )
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let biggest = pert
            .iter()
            .flatten()
            .flatten()
            .flat_map(|a| a.0.iter().map(|x| x.norm()))
            .fold(0.0, f64::max);
        let s = if biggest > 0.0 { norm / biggest } else { 0.0 };
        let base = tangent_matrices(cd);
        for (pc, bc) in pert.iter_mut().zip(&base) {
            for (prow, brow) in pc.iter_mut().zip(bc) {
                for (p, b) in prow.iter_mut().zip(brow) {
                    for (x, y) in p.0.iter_mut().zip(&b.0) {
                        *x = *y + *x * s;
                    }
                }
            }
        }
        Self::new(cd, pert).expect("random data is well formed")
    }

    /// `max |a_{ii'} − δ_{ii'} α_i|` over all coefficients.
    pub fn deformation_norm(&self, cd: &ClassData) -> f64 {
        let base = tangent_matrices(cd);
        let mut m: f64 = 0.0;
        for (ac, bc) in self.matrices.iter().zip(&base) {
            for (arow, brow) in ac.iter().zip(bc) {
                for (a, b) in arow.iter().zip(brow) {
                    for (x, y) in a.0.iter().zip(&b.0) {
                        m = m.max((x - y).norm());
                    }
                }
            }
        }
        m
    }

    pub fn is_tangent(&self, cd: &ClassData) -> bool {
        self.deformation_norm(cd) == 0.0
    }

    /// The family member `E_t = T + t (E − T)`.
    pub fn at_t(&self, cd: &ClassData, t: f64) -> Self {
        let base = tangent_matrices(cd);
        let mats = self
            .matrices
            .iter()
            .zip(&base)
            .map(|(ac, bc)| {
                ac.iter()
                    .zip(bc)
                    .map(|(arow, brow)| {
                        arow.iter()
                            .zip(brow)
                            .map(|(a, b)| {
                                LinearForm(a.0.iter().zip(&b.0).map(|(x, y)| y + (x - y) * t).collect())
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Self::new(cd, mats).expect("interpolated data is well formed")
    }

    /// `Q_c(u, t)` for the family `E_t`, as polynomials in `(u_1..u_r, t)`.
    pub fn qc_family(&self, cd: &ClassData) -> Vec<MultiPoly> {
        let r = self.r;
        let t = MultiPoly::variable(r + 1, r);
        let base = tangent_matrices(cd);
        self.matrices
            .iter()
            .zip(&base)
            .map(|(ac, bc)| {
                let m: Vec<Vec<MultiPoly>> = ac
                    .iter()
                    .zip(bc)
                    .map(|(arow, brow)| {
                        arow.iter()
                            .zip(brow)
                            .map(|(a, b)| {
                                let bp = b.to_poly().extend_arity(1);
                                let diff = LinearForm(a.0.iter().zip(&b.0).map(|(x, y)| x - y).collect());
                                &bp + &(&t * &diff.to_poly().extend_arity(1))
                            })
                            .collect()
                    })
                    .collect();
                det_of_poly_matrix(&m).expect("square by construction")
            })
            .collect()
    }

    /// `Q_c(u)` for all classes.
    pub fn qc_values(&self, u: &[C64]) -> Vec<C64> {
        self.qc.iter().map(|q| q.eval(u)).collect()
    }
}

fn tangent_matrices(cd: &ClassData) -> Vec<Vec<Vec<LinearForm>>> {
    cd.class_members
        .iter()
        .map(|m| {
            m.iter()
                .map(|&i| {
                    m.iter()
                        .map(|&k| {
                            if i == k {
                                cd.alpha_form(i)
                            } else {
                                LinearForm::zero(cd.r)
                            }
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

/// `Q_c = det (a_{ii'})_{i,i' ∈ c}` for each class.
pub fn qc_polynomials(matrices: &[Vec<Vec<LinearForm>>]) -> Result<Vec<MultiPoly>> {
    matrices
        .iter()
        .enumerate()
        .map(|(c, m)| {
            det_of_linear_matrix(m).map_err(|e| Error::MatrixShapeMismatch {
                class: c,
                detail: e.to_string(),
            })
        })
        .collect()
}

/// Generators of the Stanley–Reisner ideal: `∏_{i∈P} α_i` (classical) or
/// `∏_{c∈[P]} Q_c` (deformed), one per primitive collection `P`.
pub fn sr_generators(f: &Fan, cd: &ClassData, bundle: &DeformedBundle, deformed: bool) -> Vec<MultiPoly> {
    f.primitive_collections()
        .iter()
        .map(|p| {
            if deformed {
                let mut classes: Vec<usize> = p.rays.iter().map(|&i| cd.class_of_ray[i]).collect();
                classes.sort_unstable();
                classes.dedup();
                classes
                    .iter()
                    .fold(MultiPoly::one(cd.r), |acc, &c| &acc * &bundle.qc[c])
            } else {
                p.rays
                    .iter()
                    .fold(MultiPoly::one(cd.r), |acc, &i| &acc * &cd.alpha_form(i).to_poly())
            }
        })
        .collect()
}

/// `h⁰(O(d))` on a rational curve.
pub fn h0(d: i64) -> i64 {
    (d + 1).max(0)
}

/// `h¹(O(d))` on a rational curve.
pub fn h1(d: i64) -> i64 {
    (-d - 1).max(0)
}

/// Exponents of the four-Fermi term `F_β = ∏_c Q_c^{h¹(d_c^β)}`.
pub fn four_fermi_exponents(cd: &ClassData, beta: &[i64]) -> Vec<i64> {
    cd.class_degrees_of(beta).into_iter().map(h1).collect()
}

/// Exponents of the exchange rate `R_{β'β} = ∏_c Q_c^{h⁰(d^{β'}_c) − h⁰(d^β_c)}`.
pub fn exchange_rate_exponents(cd: &ClassData, beta_hi: &[i64], beta_lo: &[i64]) -> Vec<i64> {
    cd.class_degrees_of(beta_hi)
        .into_iter()
        .zip(cd.class_degrees_of(beta_lo))
        .map(|(a, b)| h0(a) - h0(b))
        .collect()
}

/// The quantum relations `ṽ_j(u) = q_j` with `ṽ_j = ∏_c Q_c^{d_c^{β_j}}`.
#[derive(Debug, Clone)]
pub struct QscSystem {
    pub r: usize,
    pub q: Vec<C64>,
    /// `exponents[j][c] = d_c^{β_j}`.
    pub exponents: Vec<Vec<i64>>,
    pub degrees: Vec<i64>,
    /// `∏_{d>0} Q_c^d` per relation.
    pub numerators: Vec<MultiPoly>,
    /// `∏_{d<0} Q_c^{−d}` per relation.
    pub denominators: Vec<MultiPoly>,
    /// `numerator_j − q_j · denominator_j`.
    pub cleared: Vec<MultiPoly>,
    pub qc: Vec<MultiPoly>,
    pub qc_grad: Vec<Vec<MultiPoly>>,
    pub euler: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct QscDescription {
    pub exponents: Vec<Vec<i64>>,
    pub degrees: Vec<i64>,
    pub cleared: Vec<String>,
}

/// Builds the quantum relation system at parameters `q`.
pub fn vtilde_system(cd: &ClassData, bundle: &DeformedBundle, q: &[C64], euler: usize) -> Result<QscSystem> {
    if q.len() != cd.r {
        return Err(Error::ArityMismatch {
            expected: cd.r,
            got: q.len(),
        });
    }
    if let Some(j) = q.iter().position(|x| x.norm() == 0.0) {
        return Err(Error::ZeroQ(j));
    }
    let exponents: Vec<Vec<i64>> = (0..cd.r)
        .map(|j| cd.class_deg.iter().map(|row| row[j]).collect())
        .collect();
    let mut numerators = Vec::new();
    let mut denominators = Vec::new();
    let mut cleared = Vec::new();
    for (j, ex) in exponents.iter().enumerate() {
        let mut num = MultiPoly::one(cd.r);
        let mut den = MultiPoly::one(cd.r);
        for (c, &d) in ex.iter().enumerate() {
            if d > 0 {
                num = &num * &bundle.qc[c].pow(d as u32);
            } else if d < 0 {
                den = &den * &bundle.qc[c].pow((-d) as u32);
            }
        }
        cleared.push(&num - &den.scale(q[j]));
        numerators.push(num);
        denominators.push(den);
    }
    Ok(QscSystem {
        r: cd.r,
        q: q.to_vec(),
        exponents,
        degrees: cd.vtilde_degrees(),
        numerators,
        denominators,
        cleared,
        qc: bundle.qc.clone(),
        qc_grad: bundle.qc_grad.clone(),
        euler,
    })
}

impl QscSystem {
    /// `max(1, max_j |q_j|^{1/deg ṽ_j})` over relations of positive degree.
    pub fn scale(&self) -> f64 {
        scale_of(&self.q, &self.degrees)
    }

    pub fn with_q(&self, q: &[C64]) -> Self {
        let mut s = self.clone();
        s.q = q.to_vec();
        s.cleared = self
            .numerators
            .iter()
            .zip(&self.denominators)
            .zip(q)
            .map(|((n, d), qj)| n - &d.scale(*qj))
            .collect();
        s
    }

    /// Classes whose `Q_c` appears with a negative exponent in some relation.
    pub fn negative_classes(&self) -> Vec<usize> {
        (0..self.qc.len())
            .filter(|&c| self.exponents.iter().any(|e| e[c] < 0))
            .collect()
    }

    /// Classes absent from every relation.
    pub fn silent_classes(&self) -> Vec<usize> {
        (0..self.qc.len())
            .filter(|&c| self.exponents.iter().all(|e| e[c] == 0))
            .collect()
    }

    /// `ṽ_j(u)` from the monomial form.
    pub fn vtilde(&self, u: &[C64]) -> Vec<C64> {
        let qv: Vec<C64> = self.qc.iter().map(|q| q.eval(u)).collect();
        self.vtilde_from_q(&qv)
    }

    pub fn vtilde_from_q(&self, qv: &[C64]) -> Vec<C64> {
        self.exponents
            .iter()
            .map(|ex| {
                ex.iter()
                    .zip(qv)
                    .fold(C64::new(1.0, 0.0), |acc, (&d, q)| acc * q.powi(d as i32))
            })
            .collect()
    }

    /// Values and gradients of every `Q_c` at `u`.
    pub fn local(&self, u: &[C64]) -> LocalData {
        let q: Vec<C64> = self.qc.iter().map(|p| p.eval(u)).collect();
        let grad: Vec<Vec<C64>> = self
            .qc_grad
            .iter()
            .map(|g| g.iter().map(|p| p.eval(u)).collect())
            .collect();
        LocalData { q, grad }
    }

    /// `L_{jk} = Σ_c d_c^{β_j} ∂_k Q_c / Q_c`, so that `det ṽ' = ∏ ṽ_j · det L`.
    pub fn log_jacobian(&self, loc: &LocalData) -> Vec<Vec<C64>> {
        self.exponents
            .iter()
            .map(|ex| {
                (0..self.r)
                    .map(|k| {
                        ex.iter()
                            .enumerate()
                            .filter(|(_, &d)| d != 0)
                            .map(|(c, &d)| loc.grad[c][k] / loc.q[c] * d as f64)
                            .sum()
                    })
                    .collect()
            })
            .collect()
    }

    /// `det (∂ṽ_j/∂u_k)` at `u`.
    pub fn vtilde_jacobian_det(&self, u: &[C64]) -> C64 {
        let loc = self.local(u);
        let v = self.vtilde_from_q(&loc.q);
        let l = self.log_jacobian(&loc);
        v.iter().product::<C64>() * linalg::det(&l)
    }

    pub fn describe(&self) -> QscDescription {
        QscDescription {
            exponents: self.exponents.clone(),
            degrees: self.degrees.clone(),
            cleared: self.cleared.iter().map(|p| p.to_string()).collect(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct LocalData {
    pub q: Vec<C64>,
    pub grad: Vec<Vec<C64>>,
}

pub fn scale_of(q: &[C64], degrees: &[i64]) -> f64 {
    q.iter()
        .zip(degrees)
        .filter(|(_, &d)| d > 0)
        .map(|(qj, &d)| qj.norm().powf(1.0 / d as f64))
        .fold(1.0, f64::max)
}

/// Cleared relations of the family `E_t` in the variables `(u, t)`.
pub fn cleared_family(cd: &ClassData, bundle: &DeformedBundle, q: &[Complex64]) -> Vec<MultiPoly> {
    let qf = bundle.qc_family(cd);
    let r = cd.r;
    (0..r)
        .map(|j| {
            let mut num = MultiPoly::one(r + 1);
            let mut den = MultiPoly::one(r + 1);
            for (c, row) in cd.class_deg.iter().enumerate() {
                let d = row[j];
                if d > 0 {
                    num = &num * &qf[c].pow(d as u32);
                } else if d < 0 {
                    den = &den * &qf[c].pow((-d) as u32);
                }
            }
            &num - &den.scale(q[j])
        })
        .collect()
}

/// Deformations used by the examples and tests.
pub mod examples {
    use super::*;

    /// `P¹×P¹` with `a_{c1} = [[u1, ε1 u2], [ε2 u2, u1]]` and `a_{c2} = diag(u2, u2)`,
    /// so that `Q_1 = u1² − ε1 ε2 u2²` and `Q_2 = u2²`.
    pub fn p1xp1_deformed(cd: &ClassData, e1: f64, e2: f64) -> DeformedBundle {
        let lf = |a: f64, b: f64| LinearForm(vec![C64::new(a, 0.0), C64::new(b, 0.0)]);
        DeformedBundle::new(
            cd,
            vec![
                vec![vec![lf(1.0, 0.0), lf(0.0, e1)], vec![lf(0.0, e2), lf(1.0, 0.0)]],
                vec![vec![lf(0.0, 1.0), lf(0.0, 0.0)], vec![lf(0.0, 0.0), lf(0.0, 1.0)]],
            ],
        )
        .expect("well-formed data")
    }

    /// `P¹` with `a = [[1, ε], [ε, 1]]·σ`, so that `Q = (1 − ε²) u²`.
    pub fn p1_deformed(cd: &ClassData, e: f64) -> DeformedBundle {
        let lf = |x: f64| LinearForm(vec![C64::new(x, 0.0)]);
        DeformedBundle::new(cd, vec![vec![vec![lf(1.0), lf(e)], vec![lf(e), lf(1.0)]]])
            .expect("well-formed data")
    }
}
