//! Relative tensor products over a common central subalgebra: the von
//! Neumann algebra generated by the left and right actions on the fusion
//! space, realized as a concrete block algebra, and the structure check for
//! relative compactness of product systems with witness tensoring.


use crate::algebra::{self, Element};
use crate::dynamics::{make_system, DynamicalSystem, GenMap};
use crate::error::{Error, Result};
use crate::fusion::{self, FusionSpace};
use crate::linalg::{self, CMat};
use crate::subalgebra::{self, Subalgebra};
use crate::wedderburn::{self, Realization};

/// The relative product N₁ ⊗_Q N₂ over a central subalgebra Q: the algebra
/// generated by the two commuting actions on L²(N₁) ⊗_Q L²(N₂), identified
/// as a block algebra with the trace of the canonical cyclic vector.
pub struct RelProduct {
    pub fusion: FusionSpace,
    pub realization: Realization,
}

impl RelProduct {
    /// Embedding of the first factor.
    pub fn iota1(&self, x: &Element) -> Result<Element> {
        Ok(self.realization.to_block(&self.fusion.left_action(x)?))
    }

    /// Embedding of the second factor.
    pub fn iota2(&self, y: &Element) -> Result<Element> {
        Ok(self.realization.to_block(&self.fusion.right_action(y)?))
    }
}

fn check_central(q: &Subalgebra, which: &str) -> Result<()> {
    let a = &q.parent;
    for qi in &q.basis {
        for u in a.standard_basis() {
            let comm = &(qi * &u) - &(&u * qi);
            let res = a.hs_norm(&comm)?;
            if res > a.tol.verify * 100.0 {
                return Err(Error::NotCentral(format!(
                    "subalgebra of {which} factor is not central (residual {res:.3e})"
                )));
            }
        }
    }
    Ok(())
}

/// Build the relative product of two algebras over an identified central
/// subalgebra. The trace is the vector state of the class of 1 ⊗ 1, which
/// is verified to be a faithful trace during block realization.
pub fn rel_product_central(
    q1: &Subalgebra,
    q2: &Subalgebra,
    ident: &[Element],
) -> Result<RelProduct> {
    check_central(q1, "first")?;
    check_central(q2, "second")?;
    let f = fusion::build_fusion(q1, q2, ident)?;
    let tol = q1.parent.tol;
    let mut ops: Vec<CMat> = Vec::new();
    for u in q1.parent.standard_basis() {
        ops.push(f.left_action(&u)?);
    }
    for v in q2.parent.standard_basis() {
        ops.push(f.right_action(&v)?);
    }
    let d = f.dim();
    let comm = algebra::matrix_commutant(&ops, d, &tol)?;
    let span = algebra::matrix_commutant(&comm, d, &tol)?;
    let omega = f.embed(&q1.parent.one(), &q2.parent.one())?;
    let rho = &omega * omega.adjoint();
    let realization = wedderburn::algebraize(&span, &rho, &tol)?;
    let rp = RelProduct { fusion: f, realization };
    // The embeddings must be trace preserving and agree on Q.
    let pa = &rp.realization.algebra;
    for u in q1.parent.standard_basis() {
        let t1 = pa.trace(&rp.iota1(&u)?)?;
        let t2 = q1.parent.trace(&u)?;
        if (t1 - t2).norm() > tol.report {
            return Err(Error::Identification(format!(
                "left embedding does not preserve the trace (gap {:.3e})",
                (t1 - t2).norm()
            )));
        }
    }
    for v in q2.parent.standard_basis() {
        let t1 = pa.trace(&rp.iota2(&v)?)?;
        let t2 = q2.parent.trace(&v)?;
        if (t1 - t2).norm() > tol.report {
            return Err(Error::Identification(format!(
                "right embedding does not preserve the trace (gap {:.3e})",
                (t1 - t2).norm()
            )));
        }
    }
    for (q, im) in q1.basis.iter().zip(ident) {
        let gap = pa.hs_norm(&(&rp.iota1(q)? - &rp.iota2(im)?))?;
        if gap > tol.report {
            return Err(Error::Identification(format!(
                "embeddings disagree on the common subalgebra (gap {gap:.3e})"
            )));
        }
    }
    Ok(rp)
}

/// Outcome of the compactness structure check on a product system.
pub struct ProductStructure {
    pub product: DynamicalSystem,
    pub rel_product: RelProduct,
    /// (almost-periodic rank, full dimension) per factor.
    pub factor_ranks: [(usize, usize); 2],
    /// (almost-periodic rank, full dimension) of the product system.
    pub product_rank: (usize, usize),
    /// Both factors are relatively compact iff the product is.
    pub rank_equality: bool,
    /// Invariance residual of the tensor of factor witnesses.
    pub witness_residual: f64,
}

/// Structure check for relative compactness under relative products: form
/// the product system on N₁ ⊗_Q N₂ with the diagonal action, compare
/// almost-periodic ranks with the factors, and tensor factor witnesses
/// into an invariant vector of the product fusion space.
pub fn product_structure_check(
    s1: &DynamicalSystem,
    s2: &DynamicalSystem,
    ident: &[Element],
) -> Result<ProductStructure> {
    if s1.group != s2.group {
        return Err(Error::Shape(
            "product systems must share the same group presentation".into(),
        ));
    }
    let rp = rel_product_central(&s1.q, &s2.q, ident)?;
    let pa = rp.realization.algebra.clone();
    let tol = pa.tol;
    let std_p = pa.standard_basis();
    let mut gens = Vec::new();
    for (k1, k2) in s1.koopman.iter().zip(&s2.koopman) {
        let u = rp.fusion.tensor_op(k1, k2)?;
        let mut kp = CMat::zeros(pa.dim_l2(), pa.dim_l2());
        for (c, e) in std_p.iter().enumerate() {
            let t = rp.realization.from_block(e);
            let img = rp.realization.to_block(&(&u * t * u.adjoint()));
            kp.set_column(c, &pa.to_l2(&img));
        }
        gens.push(GenMap::Linear(kp));
    }
    let q_gens: Vec<Element> = s1
        .q
        .basis
        .iter()
        .map(|q| rp.iota1(q))
        .collect::<Result<_>>()?;
    let q_p = subalgebra::generate_subalgebra(&pa, &q_gens)?;
    let product = make_system(&pa, s1.group.clone(), &gens, &q_p)?;
    let ap1 = s1.ap_decompose()?;
    let ap2 = s2.ap_decompose()?;
    let app = product.ap_decompose()?;
    let factor_ranks = [
        (ap1.ap.ncols(), s1.algebra.dim_l2()),
        (ap2.ap.ncols(), s2.algebra.dim_l2()),
    ];
    let product_rank = (app.ap.ncols(), pa.dim_l2());
    let factors_compact =
        factor_ranks[0].0 == factor_ranks[0].1 && factor_ranks[1].0 == factor_ranks[1].1;
    let product_compact = product_rank.0 == product_rank.1;
    let rank_equality = factors_compact == product_compact;
    // Tensor the first factor witnesses into the product fusion space and
    // measure its invariance under the diagonal product action.
    let (fp, diag_p) = product.diagonal_fusion()?;
    let w1 = ap1
        .witnesses
        .first()
        .ok_or_else(|| Error::NumericalFailure("factor has no invariant kernel".into()))?;
    let w2 = ap2
        .witnesses
        .first()
        .ok_or_else(|| Error::NumericalFailure("factor has no invariant kernel".into()))?;
    let rep1 = &ap1.fusion.frame.pinv * w1;
    let rep2 = &ap2.fusion.frame.pinv * w2;
    let b1 = s1.algebra.standard_basis();
    let b2 = s2.algebra.standard_basis();
    let d1 = b1.len();
    let d2 = b2.len();
    let mut w_prod = linalg::CVec::zeros(fp.dim());
    for a in 0..d1 {
        for b in 0..d1 {
            let c_ab = rep1[a * d1 + b];
            if c_ab.norm() < 1e-15 {
                continue;
            }
            for c in 0..d2 {
                for e in 0..d2 {
                    let c_ce = rep2[c * d2 + e];
                    if c_ce.norm() < 1e-15 {
                        continue;
                    }
                    let left = &rp.iota1(&b1[a])? * &rp.iota2(&b2[c])?;
                    let right = &rp.iota1(&b1[b])? * &rp.iota2(&b2[e])?;
                    let v = fp.embed(&left, &right)?;
                    w_prod += v * (c_ab * c_ce);
                }
            }
        }
    }
    let norm = w_prod.norm();
    if norm < tol.report {
        return Err(Error::NumericalFailure(
            "tensored witness vanished in the product fusion space".into(),
        ));
    }
    let mut witness_residual = 0.0f64;
    for u in &diag_p {
        witness_residual = witness_residual.max((u * &w_prod - &w_prod).norm() / norm);
    }
    Ok(ProductStructure {
        product,
        rel_product: rp,
        factor_ranks,
        product_rank,
        rank_equality,
        witness_residual,
    })
}
