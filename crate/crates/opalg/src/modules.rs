//! Right-Q-module structure on subspaces of L²(N): conditional
//! normalization (making ⟨η,η⟩_Q a projection), conditionally orthonormal
//! generating families, and module closures of generator sets.


use crate::algebra::Element;
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::subalgebra::Subalgebra;

/// A right-Q-invariant subspace V ⊆ L²(N) with an orthonormal basis and a
/// conditionally orthonormal generating family: ⟨ξ_i,ξ_j⟩_Q = δ_{ij} p_i
/// with each p_i a projection in Q.
#[derive(Debug, Clone)]
pub struct QModule {
    /// Orthonormal basis of V, columns in L² coordinates.
    pub basis: CMat,
    pub pp_basis: Vec<Element>,
    pub pp_projections: Vec<Element>,
}

impl QModule {
    pub fn dim_l2(&self) -> usize {
        self.basis.ncols()
    }
}

/// Rescale ξ so its Q-valued inner product becomes a projection: with
/// a = ⟨ξ,ξ⟩_Q, p = 1_{[ε,∞)}(a) and b = a^{-1/2} on [ε,∞), return
/// (η, p) = (ξ·b, p), which satisfies ⟨η,η⟩_Q = p.
pub fn normalize_conditional(
    q: &Subalgebra,
    xi: &Element,
    eps: f64,
) -> Result<(Element, Element)> {
    let a = q.q_inner(xi, xi)?;
    let p = q.parent.indicator_geq(&a, eps)?;
    let b = q.parent.inv_sqrt_geq(&a, eps)?;
    let eta = xi * &b;
    Ok((eta, p))
}

/// Conditional Gram–Schmidt over Q: produce a conditionally orthonormal
/// generating family for the right-Q-invariant subspace with orthonormal
/// basis `v` (columns, L² coordinates). Candidates are processed by
/// descending residual norm; the normalization cutoff tracks the spectral
/// scale of each residual's Q-valued inner product.
pub fn pimsner_popa_basis(q: &Subalgebra, v: &CMat) -> Result<QModule> {
    let a = &q.parent;
    q.check_right_module(v)?;
    // The projected unit leads the candidate list so that canonical modules
    // (e.g. L²(Q) itself) get their canonical generator first.
    let p_v = linalg::projector(v);
    let unit = a.from_l2(&(&p_v * a.to_l2(&a.one())));
    let mut residuals: Vec<Element> = std::iter::once(unit)
        .chain((0..v.ncols()).map(|c| a.from_l2(&v.column(c).into_owned())))
        .collect();
    let mut pp_basis: Vec<Element> = Vec::new();
    let mut pp_projections: Vec<Element> = Vec::new();
    let scale = residuals
        .iter()
        .map(|x| a.hs_norm(x).unwrap_or(0.0))
        .fold(0.0, f64::max);
    let stop = 1e-12 * (1.0 + scale);
    let max_rounds = 6 * v.ncols() + 12;
    for _ in 0..max_rounds {
        // Subtract the span of the family built so far.
        for r in residuals.iter_mut() {
            let mut acc = r.clone();
            for (eta, _) in pp_basis.iter().zip(&pp_projections) {
                let c = q.q_inner(eta, &acc)?;
                acc = &acc - &(eta * &c);
            }
            *r = acc;
        }
        let (best, best_norm) = residuals
            .iter()
            .enumerate()
            .map(|(i, r)| (i, a.hs_norm(r).unwrap_or(0.0)))
            .fold((0, -1.0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
        if best_norm <= stop {
            break;
        }
        let g = q.q_inner(&residuals[best], &residuals[best])?;
        let eps = a.tol.rank_cutoff(a.op_norm(&g));
        let (eta, p) = normalize_conditional(q, &residuals[best], eps)?;
        if a.hs_norm(&p)? <= a.tol.rank_abs {
            return Err(Error::NumericalFailure(
                "conditional orthogonalization stalled on a null residual".into(),
            ));
        }
        pp_basis.push(eta);
        pp_projections.push(p);
    }
    // Verify conditional orthonormality and reconstruction.
    for (i, ei) in pp_basis.iter().enumerate() {
        for (j, ej) in pp_basis.iter().enumerate() {
            let g = q.q_inner(ei, ej)?;
            let want = if i == j {
                pp_projections[i].clone()
            } else {
                a.zero()
            };
            let res = a.hs_norm(&(&g - &want))?;
            if res > a.tol.report {
                return Err(Error::NumericalFailure(format!(
                    "family not conditionally orthonormal (residual {res:.3e})"
                )));
            }
        }
    }
    for c in 0..v.ncols() {
        let xi = a.from_l2(&v.column(c).into_owned());
        let mut rec = a.zero();
        for eta in &pp_basis {
            rec = &rec + &(eta * &q.q_inner(eta, &xi)?);
        }
        let res = a.hs_norm(&(&rec - &xi))?;
        if res > a.tol.report {
            return Err(Error::NumericalFailure(format!(
                "expansion over the conditional family fails (residual {res:.3e})"
            )));
        }
    }
    Ok(QModule {
        basis: v.clone(),
        pp_basis,
        pp_projections,
    })
}

/// Smallest subspace of L²(N) containing S, closed under right
/// multiplication by Q and under the extra linear maps (e.g. the Koopman
/// unitaries of an action).
pub fn module_from_generators(
    q: &Subalgebra,
    s: &[Element],
    extra_maps: &[CMat],
) -> Result<QModule> {
    let a = &q.parent;
    let d = a.dim_l2();
    let rights: Vec<CMat> = q.basis.iter().map(|b| a.right_mult_matrix(b)).collect();
    let mut cols: Vec<crate::linalg::CVec> = s.iter().map(|x| a.to_l2(x)).collect();
    let mut span = {
        let mut m = CMat::zeros(d, cols.len());
        for (c, v) in cols.iter().enumerate() {
            m.set_column(c, v);
        }
        linalg::orthonormal_colspan(&m, &a.tol)?
    };
    loop {
        let before = span.ncols();
        cols.clear();
        for c in 0..span.ncols() {
            let v = span.column(c).into_owned();
            cols.push(v.clone());
            for r in rights.iter().chain(extra_maps.iter()) {
                cols.push(r * &v);
            }
        }
        let mut m = CMat::zeros(d, cols.len());
        for (c, v) in cols.iter().enumerate() {
            m.set_column(c, v);
        }
        span = linalg::orthonormal_colspan(&m, &a.tol)?;
        if span.ncols() == before {
            break;
        }
    }
    pimsner_popa_basis(q, &span)
}

/// Σ_i τ(p_i) over the conditional family — the Q-dimension of the module
/// computed without the lifted trace (used for cross-checks).
pub fn pp_dimension(q: &Subalgebra, m: &QModule) -> Result<f64> {
    let mut s = 0.0;
    for p in &m.pp_projections {
        s += q.parent.trace(p)?.re;
    }
    Ok(s)
}
