//! Group actions on tracial algebras: verified trace-preserving
//! *-automorphisms, Koopman representations, invariant subspaces and fixed
//! algebras, the almost-periodic / weakly-mixing decomposition relative to
//! an invariant subalgebra, compactness and weak-mixing tests, and the
//! truncation of invariant modules to finitely generated ones.


use crate::algebra::{Algebra, Element};
use crate::error::{Error, Result};
use crate::fusion::{self, FusionSpace, FusionVector};
use crate::linalg::{self, CMat};
use crate::modules::QModule;
use crate::subalgebra::Subalgebra;
use crate::tol::ToleranceProfile;

/// A discrete group given by generators: finite abelian (cyclic factor
/// orders), free abelian, or finitely presented with relator words (signed
/// 1-based generator indices).
#[derive(Debug, Clone, PartialEq)]
pub enum GroupSpec {
    FiniteAbelian { orders: Vec<usize> },
    FreeAbelian { rank: usize },
    Presented { generators: usize, relations: Vec<Vec<i64>> },
}

impl GroupSpec {
    pub fn num_generators(&self) -> usize {
        match self {
            GroupSpec::FiniteAbelian { orders } => orders.len(),
            GroupSpec::FreeAbelian { rank } => *rank,
            GroupSpec::Presented { generators, .. } => *generators,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, GroupSpec::FiniteAbelian { .. })
    }

    pub fn is_abelian_kind(&self) -> bool {
        !matches!(self, GroupSpec::Presented { .. })
    }
}

/// How a generator acts: by conjugation with a unitary of the algebra, or
/// as an explicit linear map on L²(N).
#[derive(Debug, Clone)]
pub enum GenMap {
    AdUnitary(Element),
    Linear(CMat),
}

/// A tracial algebra with a verified action of a discrete group and a
/// distinguished invariant subalgebra.
#[derive(Debug, Clone)]
pub struct DynamicalSystem {
    pub algebra: Algebra,
    pub group: GroupSpec,
    /// Koopman unitary on L²(N) for each generator.
    pub koopman: Vec<CMat>,
    pub q: Subalgebra,
    pub ergodic: bool,
}

/// The orthogonal decomposition L²(N) = AP ⊕ WM into the almost-periodic
/// part (union of ranges of invariant kernel operators) and its weakly
/// mixing complement, together with the invariant kernels used.
#[derive(Debug, Clone)]
pub struct ApDecomposition {
    pub fusion: FusionSpace,
    pub ap: CMat,
    pub wm: CMat,
    pub witnesses: Vec<FusionVector>,
}

/// Build and fully verify a dynamical system: each generator map must be a
/// trace-preserving *-automorphism, the group relations must hold, and Q
/// must be globally invariant.
pub fn make_system(
    a: &Algebra,
    group: GroupSpec,
    gen_maps: &[GenMap],
    q: &Subalgebra,
) -> Result<DynamicalSystem> {
    if gen_maps.len() != group.num_generators() {
        return Err(Error::Shape(format!(
            "{} generator maps for {} generators",
            gen_maps.len(),
            group.num_generators()
        )));
    }
    let d = a.dim_l2();
    let mut koopman = Vec::with_capacity(gen_maps.len());
    for g in gen_maps {
        let k = match g {
            GenMap::AdUnitary(u) => {
                a.check_shape(u)?;
                let uu = &(&u.adjoint() * u) - &a.one();
                if a.hs_norm(&uu)? > a.tol.verify {
                    return Err(Error::NotAutomorphism(
                        "conjugating element is not unitary".into(),
                    ));
                }
                a.left_mult_matrix(u) * a.right_mult_matrix(&u.adjoint())
            }
            GenMap::Linear(m) => {
                if m.nrows() != d || m.ncols() != d {
                    return Err(Error::Shape("generator matrix has wrong size".into()));
                }
                m.clone()
            }
        };
        verify_automorphism(a, &k)?;
        koopman.push(k);
    }
    verify_relations(a, &group, &koopman)?;
    for k in &koopman {
        let res = (k * &q.proj * k.adjoint() - &q.proj).norm();
        if res > a.tol.verify * 100.0 {
            return Err(Error::SubalgebraNotInvariant(res));
        }
    }
    let mut s = DynamicalSystem {
        algebra: a.clone(),
        group,
        koopman,
        q: q.clone(),
        ergodic: false,
    };
    s.ergodic = s.fixed_algebra()?.dim() == 1;
    Ok(s)
}

fn verify_automorphism(a: &Algebra, k: &CMat) -> Result<()> {
    let d = a.dim_l2();
    let unit_res = (k.adjoint() * k - CMat::identity(d, d)).norm();
    if unit_res > a.tol.verify * 100.0 {
        return Err(Error::NotTracePreserving(unit_res));
    }
    let apply = |x: &Element| a.from_l2(&(k * a.to_l2(x)));
    let one_res = a.hs_norm(&(&apply(&a.one()) - &a.one()))?;
    if one_res > a.tol.verify * 100.0 {
        return Err(Error::NotAutomorphism(format!(
            "not unital (residual {one_res:.3e})"
        )));
    }
    let std = a.standard_basis();
    for x in &std {
        let star = &apply(&x.adjoint()) - &apply(x).adjoint();
        let res = a.hs_norm(&star)?;
        if res > a.tol.verify * 100.0 {
            return Err(Error::NotAutomorphism(format!(
                "not *-preserving (residual {res:.3e})"
            )));
        }
        for y in &std {
            let mult = &apply(&(x * y)) - &(&apply(x) * &apply(y));
            let res = a.hs_norm(&mult)?;
            if res > a.tol.verify * 1000.0 {
                return Err(Error::NotAutomorphism(format!(
                    "not multiplicative (residual {res:.3e})"
                )));
            }
        }
    }
    Ok(())
}

fn verify_relations(a: &Algebra, group: &GroupSpec, koopman: &[CMat]) -> Result<()> {
    let d = a.dim_l2();
    let id = CMat::identity(d, d);
    let tol = a.tol.verify * 100.0;
    let commute = |i: usize, j: usize| -> Result<()> {
        let res = (&koopman[i] * &koopman[j] - &koopman[j] * &koopman[i]).norm();
        if res > tol {
            return Err(Error::RelationViolated(format!(
                "generators {i} and {j} do not commute (residual {res:.3e})"
            )));
        }
        Ok(())
    };
    match group {
        GroupSpec::FiniteAbelian { orders } => {
            for (i, &o) in orders.iter().enumerate() {
                if o < 1 {
                    return Err(Error::Shape("generator orders must be >= 1".into()));
                }
                let mut p = id.clone();
                for _ in 0..o {
                    p = &p * &koopman[i];
                }
                let res = (&p - &id).norm();
                if res > tol {
                    return Err(Error::RelationViolated(format!(
                        "generator {i} does not have order {o} (residual {res:.3e})"
                    )));
                }
                for j in (i + 1)..orders.len() {
                    commute(i, j)?;
                }
            }
        }
        GroupSpec::FreeAbelian { rank } => {
            for i in 0..*rank {
                for j in (i + 1)..*rank {
                    commute(i, j)?;
                }
            }
        }
        GroupSpec::Presented { generators, relations } => {
            for word in relations {
                let mut p = id.clone();
                for &s in word {
                    let g = s.unsigned_abs() as usize;
                    if g == 0 || g > *generators {
                        return Err(Error::Shape(format!("bad generator index {s} in word")));
                    }
                    let m = &koopman[g - 1];
                    p = if s > 0 { &p * m } else { &p * &m.adjoint() };
                }
                let res = (&p - &id).norm();
                if res > tol {
                    return Err(Error::RelationViolated(format!(
                        "relator word fails (residual {res:.3e})"
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Joint fixed space of a family of unitaries: ∩_g ker(U_g − 1), as
/// orthonormal columns.
pub fn invariant_subspace(reps: &[CMat], dim: usize, tol: &ToleranceProfile) -> Result<CMat> {
    let id = CMat::identity(dim, dim);
    let maps: Vec<CMat> = reps.iter().map(|u| u - &id).collect();
    linalg::joint_nullspace(&maps, dim, tol)
}

impl DynamicalSystem {
    /// Apply the generator of index `g` to an element.
    pub fn apply_gen(&self, g: usize, x: &Element) -> Element {
        self.algebra
            .from_l2(&(&self.koopman[g] * self.algebra.to_l2(x)))
    }

    /// The fixed-point algebra N^Γ.
    pub fn fixed_algebra(&self) -> Result<Subalgebra> {
        let basis = invariant_subspace(
            &self.koopman,
            self.algebra.dim_l2(),
            &self.algebra.tol,
        )?;
        let elems: Vec<Element> = (0..basis.ncols())
            .map(|c| self.algebra.from_l2(&basis.column(c).into_owned()))
            .collect();
        // The fixed space of a family of automorphisms is automatically a
        // *-subalgebra, but we route it through full verification anyway.
        let ortho = self.algebra.bicommutant(&elems)?;
        Subalgebra::from_orthonormal_basis(&self.algebra, ortho)
    }

    /// Enumerate group elements as Koopman matrices with word labels. For
    /// finite abelian groups the enumeration is exhaustive and exact;
    /// otherwise it covers the word ball of radius `wordlen`.
    pub fn enumerate_koopman(&self, wordlen: usize) -> Vec<(String, CMat)> {
        let d = self.algebra.dim_l2();
        let id = CMat::identity(d, d);
        match &self.group {
            GroupSpec::FiniteAbelian { orders } => {
                let mut out: Vec<(String, CMat)> = vec![("e".into(), id)];
                for (i, &o) in orders.iter().enumerate() {
                    let mut next = Vec::new();
                    for (label, m) in &out {
                        let mut p = m.clone();
                        for e in 0..o {
                            if e > 0 {
                                p = &p * &self.koopman[i];
                            }
                            let l = if e == 0 {
                                label.clone()
                            } else if label == "e" {
                                format!("g{i}^{e}")
                            } else {
                                format!("{label}·g{i}^{e}")
                            };
                            next.push((l, p.clone()));
                        }
                    }
                    out = next;
                }
                out
            }
            _ => {
                // Breadth-first ball in the generators and their inverses,
                // de-duplicated by matrix distance.
                let mut out: Vec<(String, CMat)> = vec![("e".into(), id)];
                let mut frontier = out.clone();
                for _ in 0..wordlen {
                    let mut next = Vec::new();
                    for (label, m) in &frontier {
                        for (g, k) in self.koopman.iter().enumerate() {
                            for (s, step) in [("", k.clone()), ("~", k.adjoint())] {
                                let p = &step * m;
                                let known = out
                                    .iter()
                                    .chain(next.iter())
                                    .any(|(_, q)| (q - &p).norm() < 1e-9);
                                if !known {
                                    let l = if label == "e" {
                                        format!("g{g}{s}")
                                    } else {
                                        format!("g{g}{s}·{label}")
                                    };
                                    next.push((l, p));
                                }
                            }
                        }
                    }
                    if next.is_empty() {
                        break;
                    }
                    out.extend(next.iter().cloned());
                    frontier = next;
                }
                out
            }
        }
    }

    /// Fusion product L²(N) ⊗_Q L²(N) with the diagonal action matrices of
    /// the generators.
    pub fn diagonal_fusion(&self) -> Result<(FusionSpace, Vec<CMat>)> {
        let f = fusion::self_fusion(&self.q)?;
        let mut diag = Vec::with_capacity(self.koopman.len());
        for k in &self.koopman {
            diag.push(f.tensor_op(k, k)?);
        }
        Ok((f, diag))
    }

    /// Almost-periodic / weakly-mixing decomposition of L²(N) relative to Q.
    pub fn ap_decompose(&self) -> Result<ApDecomposition> {
        let a = &self.algebra;
        let (f, diag) = self.diagonal_fusion()?;
        let inv = invariant_subspace(&diag, f.dim(), &a.tol)?;
        let witnesses: Vec<FusionVector> =
            (0..inv.ncols()).map(|c| inv.column(c).into_owned()).collect();
        let d = a.dim_l2();
        let mut cols = CMat::zeros(d, d * witnesses.len());
        for (w, k) in witnesses.iter().enumerate() {
            let t = f.kernel_operator(k)?;
            cols.view_mut((0, w * d), (d, d)).copy_from(&t);
        }
        let ap = linalg::orthonormal_colspan(&cols, &a.tol)?;
        let p_ap = linalg::projector(&ap);
        let (vals, vecs) = linalg::hermitian_eig(&p_ap)?;
        let comp: Vec<usize> = (0..d).filter(|&i| vals[i] < 0.5).collect();
        let mut wm = CMat::zeros(d, comp.len());
        for (c, &i) in comp.iter().enumerate() {
            wm.set_column(c, &vecs.column(i).into_owned());
        }
        // Both parts must be invariant and right-Q-invariant.
        for k in &self.koopman {
            let res = ((CMat::identity(d, d) - &p_ap) * k * &p_ap).norm();
            if res > a.tol.verify * 100.0 {
                return Err(Error::NumericalFailure(format!(
                    "almost-periodic part not invariant (residual {res:.3e})"
                )));
            }
        }
        self.q.check_right_module(&ap)?;
        if wm.ncols() > 0 {
            self.q.check_right_module(&wm)?;
        }
        Ok(ApDecomposition {
            fusion: f,
            ap,
            wm,
            witnesses,
        })
    }

    /// Compactness test with constructive witnesses: true iff the weakly
    /// mixing part vanishes. The report decomposes the almost-periodic part
    /// into an orthogonal chain of invariant finitely generated Q-modules
    /// obtained by truncating the invariant kernels.
    pub fn is_compact_extension(&self) -> Result<(bool, CompactnessReport)> {
        let a = &self.algebra;
        let d = a.dim_l2();
        let dec = self.ap_decompose()?;
        let compact = dec.wm.ncols() == 0;
        let mut modules = Vec::new();
        let mut union = CMat::zeros(d, 0);
        for k in &dec.witnesses {
            let t = dec.fusion.kernel_operator(k)?;
            // T T† is positive with the same range as T and the same
            // invariance, so its spectral truncation is a valid witness.
            let psd = &t * t.adjoint();
            let (vals, _) = linalg::hermitian_eig(&psd)?;
            let max_ev = vals.iter().fold(0.0f64, |x, &y| x.max(y));
            if max_ev <= a.tol.rank_abs {
                continue;
            }
            let eps = a.tol.rank_cutoff(max_ev);
            let (p, _) = fusion::truncate_operator(&self.q, &psd, eps)?;
            // Orthogonalize against the union of the previous ranges so the
            // chain ranks add up exactly.
            let p_u = linalg::projector(&union);
            let fresh = linalg::joint_nullspace(
                &[CMat::identity(d, d) - &p, p_u.clone()],
                d,
                &a.tol,
            )?;
            if fresh.ncols() == 0 {
                continue;
            }
            let module = crate::modules::pimsner_popa_basis(&self.q, &fresh)?;
            let dim_q = self.q.dim_q(&fresh)?;
            modules.push((module, dim_q));
            let mut merged = CMat::zeros(d, union.ncols() + fresh.ncols());
            merged.view_mut((0, 0), (d, union.ncols())).copy_from(&union);
            merged
                .view_mut((0, union.ncols()), (d, fresh.ncols()))
                .copy_from(&fresh);
            union = linalg::orthonormal_colspan(&merged, &a.tol)?;
        }
        let rank_sum: usize = modules.iter().map(|(m, _)| m.dim_l2()).sum();
        if rank_sum != dec.ap.ncols() {
            return Err(Error::NumericalFailure(format!(
                "module chain ranks sum to {rank_sum}, expected {}",
                dec.ap.ncols()
            )));
        }
        Ok((
            compact,
            CompactnessReport {
                decomposition: dec,
                modules,
            },
        ))
    }

    /// Weak-mixing test: true iff every invariant kernel lies in the image
    /// of L²(Q) inside the fusion space. Returns a violating kernel
    /// otherwise.
    pub fn test_weak_mixing(&self) -> Result<(bool, Option<FusionVector>)> {
        let a = &self.algebra;
        let (f, diag) = self.diagonal_fusion()?;
        let inv = invariant_subspace(&diag, f.dim(), &a.tol)?;
        // Image of L²(Q): classes of q ⊗ 1.
        let mut img = CMat::zeros(f.dim(), self.q.basis.len());
        for (c, q) in self.q.basis.iter().enumerate() {
            img.set_column(c, &f.embed(q, &a.one())?);
        }
        let img = linalg::orthonormal_colspan(&img, &a.tol)?;
        let p = linalg::projector(&img);
        for c in 0..inv.ncols() {
            let k = inv.column(c).into_owned();
            let res = (&k - &p * &k).norm();
            if res > a.tol.report {
                return Ok((false, Some(k)));
            }
        }
        Ok((true, None))
    }

    /// Enumerated version of the mixing probe: the minimum over group
    /// elements of max_{f,g ∈ F} ‖E_Q(f σ_γ(g))‖₂.
    pub fn popa_probe(&self, f: &[Element], wordlen: usize) -> Result<(f64, String)> {
        let a = &self.algebra;
        if f.is_empty() {
            return Ok((0.0, "e".into()));
        }
        for x in f {
            let e = self.q.cond_expect(x)?;
            if a.hs_norm(&e)? > a.tol.report {
                return Err(Error::Argument(
                    "probe elements must have zero conditional expectation".into(),
                ));
            }
        }
        let mut best = f64::INFINITY;
        let mut best_label = String::new();
        for (label, k) in self.enumerate_koopman(wordlen) {
            let mut worst = 0.0f64;
            for x in f {
                for y in f {
                    let sy = a.from_l2(&(&k * a.to_l2(y)));
                    let e = self.q.cond_expect(&(x * &sy))?;
                    worst = worst.max(a.hs_norm(&e)?);
                }
            }
            if worst < best {
                best = worst;
                best_label = label;
            }
        }
        Ok((best, best_label))
    }

    /// Truncate an invariant right-Q-module to a finitely generated
    /// invariant submodule V₁ with Q-dimension within ε of the original.
    /// At finite dimension the orthogonal projection onto V has 0/1
    /// spectrum, so the truncation returns V itself and the gap is 0.
    pub fn invariant_module_truncate(&self, v: &CMat, eps: f64) -> Result<(QModule, f64)> {
        let a = &self.algebra;
        self.q.check_right_module(v)?;
        let p_v = linalg::projector(v);
        let d = a.dim_l2();
        for k in &self.koopman {
            let res = ((CMat::identity(d, d) - &p_v) * k * &p_v).norm();
            if res > a.tol.verify * 100.0 {
                return Err(Error::NotAModule(res));
            }
        }
        let cut = eps.min(0.5);
        let (p1, module) = fusion::truncate_operator(&self.q, &p_v, cut)?;
        let gap = self.q.dim_q(v)? - self.q.dim_q(&orth_cols(&p1, &a.tol)?)?;
        if gap >= eps {
            return Err(Error::NumericalFailure(format!(
                "truncation gap {gap:.3e} not below {eps:.3e}"
            )));
        }
        Ok((module, gap))
    }
}

fn orth_cols(p: &CMat, tol: &ToleranceProfile) -> Result<CMat> {
    linalg::orthonormal_colspan(p, tol)
}

/// Constructive side of the compactness test: the invariant kernel
/// decomposition plus the orthogonal chain of finitely generated invariant
/// Q-modules (with their Q-dimensions) exhausting the almost-periodic part.
#[derive(Debug, Clone)]
pub struct CompactnessReport {
    pub decomposition: ApDecomposition,
    pub modules: Vec<(QModule, f64)>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::subalgebra::{full_subalgebra, scalar_subalgebra};

    #[test]
    fn sys_a_is_ergodic() {
        let s = fixtures::sys_a().unwrap();
        assert!(s.ergodic);
        assert_eq!(s.fixed_algebra().unwrap().dim(), 1);
    }

    #[test]
    fn sys_b_is_ergodic() {
        let s = fixtures::sys_b().unwrap();
        assert!(s.ergodic);
    }

    #[test]
    fn sys_c_is_ergodic_with_invariant_partition() {
        let s = fixtures::sys_c().unwrap();
        assert!(s.ergodic);
        assert_eq!(s.q.dim(), 2);
    }

    #[test]
    fn wrong_order_is_rejected() {
        // A 4-cycle declared as ℤ₂.
        let a = fixtures::uniform_points(4).unwrap();
        let k = fixtures::cyclic_rotation_koopman(&a);
        let q = scalar_subalgebra(&a).unwrap();
        let r = make_system(
            &a,
            GroupSpec::FiniteAbelian { orders: vec![2] },
            &[GenMap::Linear(k)],
            &q,
        );
        assert!(matches!(r, Err(Error::RelationViolated(_))));
    }

    #[test]
    fn non_invariant_subalgebra_rejected() {
        let a = fixtures::uniform_points(4).unwrap();
        let k = fixtures::cyclic_rotation_koopman(&a);
        // The 2-set partition {0,1},{2,3} is not invariant under the
        // 4-cycle.
        let q = crate::subalgebra::generate_subalgebra(
            &a,
            &[&a.block_unit(0) + &a.block_unit(1)],
        )
        .unwrap();
        let r = make_system(
            &a,
            GroupSpec::FiniteAbelian { orders: vec![4] },
            &[GenMap::Linear(k)],
            &q,
        );
        assert!(matches!(r, Err(Error::SubalgebraNotInvariant(_))));
    }

    #[test]
    fn koopman_unitary() {
        for s in [
            fixtures::sys_a().unwrap(),
            fixtures::sys_b().unwrap(),
            fixtures::sys_c().unwrap(),
            fixtures::sys_d().unwrap(),
        ] {
            let d = s.algebra.dim_l2();
            for k in &s.koopman {
                assert!((k.adjoint() * k - CMat::identity(d, d)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn sys_a_invariant_subspaces() {
        let s = fixtures::sys_a().unwrap();
        let inv = invariant_subspace(&s.koopman, 2, &s.algebra.tol).unwrap();
        assert_eq!(inv.ncols(), 1);
        let (f, diag) = s.diagonal_fusion().unwrap();
        assert_eq!(f.dim(), 4);
        let inv2 = invariant_subspace(&diag, 4, &s.algebra.tol).unwrap();
        assert_eq!(inv2.ncols(), 2);
    }

    #[test]
    fn sys_a_ap_is_everything() {
        let s = fixtures::sys_a().unwrap();
        let dec = s.ap_decompose().unwrap();
        assert_eq!(dec.ap.ncols(), 2);
        assert_eq!(dec.wm.ncols(), 0);
        let (compact, report) = s.is_compact_extension().unwrap();
        assert!(compact);
        let total: usize = report.modules.iter().map(|(m, _)| m.dim_l2()).sum();
        assert_eq!(total, 2);
    }

    #[test]
    fn q_equals_n_is_trivially_compact() {
        let s = fixtures::sys_b().unwrap();
        let q = full_subalgebra(&s.algebra).unwrap();
        let s2 = make_system(
            &s.algebra,
            s.group.clone(),
            &fixtures::sys_b_gen_maps(),
            &q,
        )
        .unwrap();
        let dec = s2.ap_decompose().unwrap();
        assert_eq!(dec.wm.ncols(), 0);
        let (wm, witness) = s2.test_weak_mixing().unwrap();
        assert!(wm);
        assert!(witness.is_none());
    }

    #[test]
    fn no_finite_dimensional_relative_weak_mixing() {
        for s in [
            fixtures::sys_a().unwrap(),
            fixtures::sys_b().unwrap(),
            fixtures::sys_c().unwrap(),
            fixtures::sys_d().unwrap(),
        ] {
            let (wm, witness) = s.test_weak_mixing().unwrap();
            assert!(!wm);
            assert!(witness.is_some());
        }
    }

    #[test]
    fn popa_probe_on_sys_a() {
        let s = fixtures::sys_a().unwrap();
        let f = fixtures::sign_function(&s.algebra);
        let (min, _) = s.popa_probe(&[f], 0).unwrap();
        // E_ℂ(f·σ_γ(f)) = τ(f σ_γ(f)) = ±1 for both group elements.
        assert!((min - 1.0).abs() < 1e-10);
        let (empty, _) = s.popa_probe(&[], 0).unwrap();
        assert_eq!(empty, 0.0);
    }

    #[test]
    fn invariant_module_truncation_has_zero_gap() {
        let s = fixtures::sys_a().unwrap();
        let full = CMat::identity(2, 2);
        let (module, gap) = s.invariant_module_truncate(&full, 1e-6).unwrap();
        assert_eq!(module.dim_l2(), 2);
        assert!(gap.abs() < 1e-9);
    }

    #[test]
    fn mean_ergodic_average_equals_invariant_projection() {
        let s = fixtures::sys_c().unwrap();
        let d = s.algebra.dim_l2();
        let inv = invariant_subspace(&s.koopman, d, &s.algebra.tol).unwrap();
        let p = linalg::projector(&inv);
        let elems = s.enumerate_koopman(0);
        let mut avg = CMat::zeros(d, d);
        for (_, k) in &elems {
            avg += k;
        }
        avg.unscale_mut(elems.len() as f64);
        assert!((avg - p).norm() < 1e-9);
    }
}
