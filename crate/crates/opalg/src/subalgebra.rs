//! Unital *-subalgebras Q ⊆ N with their trace-preserving conditional
//! expectation E_Q, the Q-valued inner product ⟨x,y⟩_Q = E_Q(x*y), the
//! basic construction ⟨N,e_Q⟩ on L²(N), its lifted trace τ̂, and the
//! Q-dimension of right-Q-invariant subspaces.

use num_complex::Complex64 as C64;

use crate::algebra::{Algebra, Element};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec};

/// A unital *-subalgebra stored as an orthonormal L²-basis together with
/// the orthogonal projector onto its L² span.
#[derive(Debug, Clone)]
pub struct Subalgebra {
    pub parent: Algebra,
    pub basis: Vec<Element>,
    pub basis_mat: CMat,
    pub proj: CMat,
}

/// The algebra ⟨N, e_Q⟩ generated on L²(N) by left multiplications and the
/// projection e_Q, with the lifted trace τ̂ determined by
/// τ̂(x e_Q y) = τ(xy).
#[derive(Debug, Clone)]
pub struct BasicConstruction {
    pub ambient_dim: usize,
    /// Frobenius-orthonormal basis of the operator span.
    pub algebra_basis: Vec<CMat>,
    pub e_q: CMat,
    /// Values of τ̂ on `algebra_basis`.
    tau_hat: Vec<C64>,
    tol: crate::tol::ToleranceProfile,
}

fn frob_inner(a: &CMat, b: &CMat) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

impl Subalgebra {
    /// Build a subalgebra from an orthonormal basis of a unital *-closed
    /// multiplicative span. Closure properties are verified.
    pub fn from_orthonormal_basis(parent: &Algebra, basis: Vec<Element>) -> Result<Subalgebra> {
        let d = parent.dim_l2();
        let mut basis_mat = CMat::zeros(d, basis.len());
        for (c, b) in basis.iter().enumerate() {
            parent.check_shape(b)?;
            basis_mat.set_column(c, &parent.to_l2(b));
        }
        let ortho = (basis_mat.adjoint() * &basis_mat
            - CMat::identity(basis.len(), basis.len()))
        .norm();
        if ortho > parent.tol.verify {
            return Err(Error::NumericalFailure(format!(
                "subalgebra basis not orthonormal (residual {ortho:.3e})"
            )));
        }
        let proj = &basis_mat * basis_mat.adjoint();
        let q = Subalgebra {
            parent: parent.clone(),
            basis,
            basis_mat,
            proj,
        };
        q.verify_closure()?;
        Ok(q)
    }

    fn verify_closure(&self) -> Result<()> {
        let a = &self.parent;
        let one = a.one();
        let res_unit = self.residual_l2(&one)?;
        if res_unit > a.tol.verify {
            return Err(Error::NotAnAlgebra(format!(
                "unit not in span (residual {res_unit:.3e})"
            )));
        }
        for x in &self.basis {
            let res_star = self.residual_l2(&x.adjoint())?;
            if res_star > a.tol.verify {
                return Err(Error::NotAnAlgebra(format!(
                    "span not *-closed (residual {res_star:.3e})"
                )));
            }
            for y in &self.basis {
                let res_mul = self.residual_l2(&(x * y))?;
                if res_mul > a.tol.verify {
                    return Err(Error::NotAnAlgebra(format!(
                        "span not multiplicatively closed (residual {res_mul:.3e})"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Distance in ‖·‖₂ from x to the span of the basis.
    fn residual_l2(&self, x: &Element) -> Result<f64> {
        let v = self.parent.to_l2(x);
        Ok((&v - &self.proj * &v).norm())
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// E_Q(x): orthogonal projection of x onto the span of the basis.
    pub fn cond_expect(&self, x: &Element) -> Result<Element> {
        self.parent.check_shape(x)?;
        Ok(self.parent.from_l2(&(&self.proj * self.parent.to_l2(x))))
    }

    /// ⟨x,y⟩_Q = E_Q(x*y).
    pub fn q_inner(&self, x: &Element, y: &Element) -> Result<Element> {
        self.cond_expect(&(&x.adjoint() * y))
    }

    /// Whether x lies in Q (within verification tolerance).
    pub fn contains(&self, x: &Element) -> Result<bool> {
        Ok(self.residual_l2(x)? <= self.parent.tol.verify)
    }

    /// The basic construction ⟨N, e_Q⟩ with lifted trace.
    pub fn basic_construction(&self) -> Result<BasicConstruction> {
        let a = &self.parent;
        let d = a.dim_l2();
        let std = a.standard_basis();
        // Span of { L_x e_Q L_y } over the standard basis of N.
        let mut span = CMat::zeros(d * d, std.len() * std.len());
        let mut rhs_pairs = Vec::with_capacity(std.len() * std.len());
        let lmats: Vec<CMat> = std.iter().map(|x| a.left_mult_matrix(x)).collect();
        let mut col = 0;
        for (i, lx) in lmats.iter().enumerate() {
            let le = lx * &self.proj;
            for (j, ly) in lmats.iter().enumerate() {
                let op = &le * ly;
                span.set_column(col, &linalg::vec_of(&op));
                rhs_pairs.push(a.trace(&(&std[i] * &std[j]))?);
                col += 1;
            }
        }
        let ortho = linalg::orthonormal_colspan(&span, &a.tol)?;
        let m = ortho.ncols();
        let algebra_basis: Vec<CMat> = (0..m)
            .map(|c| linalg::mat_of(&ortho.column(c).into_owned(), d, d))
            .collect();
        // Solve for τ̂ on the orthonormal basis from τ̂(x e_Q y) = τ(xy).
        // Row (i,j): Σ_k coeff_k(x_i e_Q y_j) · t_k = τ(x_i y_j), where
        // coeff_k = ⟨A_k, T⟩_F.
        let mut sys = CMat::zeros(span.ncols(), m);
        for row in 0..span.ncols() {
            let t = span.column(row);
            for k in 0..m {
                let ak = ortho.column(k);
                let c: C64 = ak.iter().zip(t.iter()).map(|(x, y)| x.conj() * y).sum();
                sys[(row, k)] = c;
            }
        }
        let rhs = CVec::from_vec(rhs_pairs);
        let (t, res) = linalg::lstsq(&sys, &rhs, &a.tol)?;
        if res > a.tol.verify * (1.0 + rhs.norm()) {
            return Err(Error::NumericalFailure(format!(
                "lifted trace system inconsistent (residual {res:.3e})"
            )));
        }
        let bc = BasicConstruction {
            ambient_dim: d,
            algebra_basis,
            e_q: self.proj.clone(),
            tau_hat: t.iter().copied().collect(),
            tol: a.tol,
        };
        // Spot-check traciality and the compression identity on the span.
        for (i, x) in std.iter().take(4).enumerate() {
            let lx = &lmats[i];
            let lhs = &self.proj * lx * &self.proj;
            let rhs_m = a.left_mult_matrix(&self.cond_expect(x)?) * &self.proj;
            if (lhs - rhs_m).norm() > a.tol.verify * 10.0 {
                return Err(Error::NumericalFailure(
                    "e_Q x e_Q != E_Q(x) e_Q".into(),
                ));
            }
        }
        Ok(bc)
    }

    /// dim_Q(V) = τ̂(P_V) for a right-Q-invariant subspace V ⊆ L²(N), given
    /// by an orthonormal basis (columns, L² coordinates). Cross-validated
    /// against Σ_i τ(⟨ξ_i,ξ_i⟩_Q) over a conditionally orthonormal basis.
    pub fn dim_q(&self, v: &CMat) -> Result<f64> {
        let a = &self.parent;
        self.check_right_module(v)?;
        let bc = self.basic_construction()?;
        let p_v = linalg::projector(v);
        let d1 = bc.tau_hat_eval(&p_v)?.re;
        let qm = crate::modules::pimsner_popa_basis(self, v)?;
        let mut d2 = 0.0;
        for p in &qm.pp_projections {
            d2 += a.trace(p)?.re;
        }
        if (d1 - d2).abs() > a.tol.report {
            return Err(Error::NumericalFailure(format!(
                "dim_Q cross-check mismatch: trace formula {d1:.9} vs basis sum {d2:.9}"
            )));
        }
        Ok(d1)
    }

    /// Verify V·q ⊆ V for all basis elements q of Q.
    pub fn check_right_module(&self, v: &CMat) -> Result<()> {
        let a = &self.parent;
        let p_v = linalg::projector(v);
        let d = a.dim_l2();
        let id = CMat::identity(d, d);
        for q in &self.basis {
            let r = a.right_mult_matrix(q);
            let res = ((&id - &p_v) * &r * &p_v).norm();
            if res > a.tol.verify * 10.0 * (1.0 + r.norm()) {
                return Err(Error::NotAModule(res));
            }
        }
        Ok(())
    }
}

impl BasicConstruction {
    /// Evaluate τ̂ on an operator in the span of the basic construction.
    /// Errors if the operator falls outside the span.
    pub fn tau_hat_eval(&self, t: &CMat) -> Result<C64> {
        let mut val = linalg::czero();
        let mut proj = CMat::zeros(t.nrows(), t.ncols());
        for (k, a) in self.algebra_basis.iter().enumerate() {
            let c = frob_inner(a, t);
            val += c * self.tau_hat[k];
            proj += a.map(|e| e * c);
        }
        let res = (t - proj).norm();
        if res > self.tol.verify * 100.0 * (1.0 + t.norm()) {
            return Err(Error::NumericalFailure(format!(
                "operator outside basic construction span (residual {res:.3e})"
            )));
        }
        Ok(val)
    }
}

/// The von Neumann subalgebra generated by a finite set, with unit.
pub fn generate_subalgebra(a: &Algebra, generators: &[Element]) -> Result<Subalgebra> {
    let basis = a.bicommutant(generators)?;
    Subalgebra::from_orthonormal_basis(a, basis)
}

/// The trivial subalgebra ℂ1.
pub fn scalar_subalgebra(a: &Algebra) -> Result<Subalgebra> {
    generate_subalgebra(a, &[])
}

/// The full algebra as a subalgebra of itself.
pub fn full_subalgebra(a: &Algebra) -> Result<Subalgebra> {
    Subalgebra::from_orthonormal_basis(a, a.standard_basis())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tol::ToleranceProfile;
    use num_complex::Complex64 as C64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn m2() -> Algebra {
        Algebra::new(vec![2], vec![1.0], ToleranceProfile::default()).unwrap()
    }

    fn diag_in_m2(a: &Algebra) -> Subalgebra {
        generate_subalgebra(a, &[a.matrix_unit(0, 0, 0)]).unwrap()
    }

    #[test]
    fn scalar_expectation_is_trace() {
        let a = m2();
        let q = scalar_subalgebra(&a).unwrap();
        let mut x = a.zero();
        x.blocks[0] = CMat::from_row_slice(
            2,
            2,
            &[
                C64::new(1.0, 0.0),
                C64::new(2.0, 0.0),
                C64::new(3.0, 0.0),
                C64::new(4.0, 0.0),
            ],
        );
        let e = q.cond_expect(&x).unwrap();
        let expect = a.one().scale(C64::new(2.5, 0.0));
        assert!(a.hs_norm(&(&e - &expect)).unwrap() < 1e-12);
    }

    #[test]
    fn diagonal_expectation_keeps_diagonal() {
        let a = m2();
        let q = diag_in_m2(&a);
        assert_eq!(q.dim(), 2);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = a.random_element(&mut rng);
        let e = q.cond_expect(&x).unwrap();
        let mut want = a.zero();
        want.blocks[0][(0, 0)] = x.blocks[0][(0, 0)];
        want.blocks[0][(1, 1)] = x.blocks[0][(1, 1)];
        assert!(a.hs_norm(&(&e - &want)).unwrap() < 1e-12);
    }

    #[test]
    fn expectation_axioms_random() {
        let a = Algebra::new(vec![1, 2], vec![0.25, 0.75], ToleranceProfile::default()).unwrap();
        let q = generate_subalgebra(&a, &[a.block_unit(0)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..200 {
            let x = a.random_element(&mut rng);
            let e = q.cond_expect(&x).unwrap();
            // idempotence
            let e2 = q.cond_expect(&e).unwrap();
            assert!(a.hs_norm(&(&e2 - &e)).unwrap() < a.tol.verify);
            // trace preservation
            assert!((a.trace(&e).unwrap() - a.trace(&x).unwrap()).norm() < a.tol.verify);
            // bimodularity
            let qa = q.cond_expect(&a.random_element(&mut rng)).unwrap();
            let qb = q.cond_expect(&a.random_element(&mut rng)).unwrap();
            let lhs = q.cond_expect(&(&(&qa * &x) * &qb)).unwrap();
            let rhs = &(&qa * &e) * &qb;
            assert!(a.hs_norm(&(&lhs - &rhs)).unwrap() < a.tol.verify * 100.0);
            // positivity
            let pos = q.cond_expect(&(&x.adjoint() * &x)).unwrap();
            for b in &pos.blocks {
                let (vals, _) = linalg::hermitian_eig(b).unwrap();
                assert!(vals.iter().all(|&v| v > -a.tol.verify));
            }
        }
    }

    #[test]
    fn q_inner_examples() {
        let a = m2();
        let q = diag_in_m2(&a);
        let e12 = a.matrix_unit(0, 0, 1);
        let e11 = a.matrix_unit(0, 0, 0);
        let e22 = a.matrix_unit(0, 1, 1);
        let g = q.q_inner(&e12, &e12).unwrap();
        assert!(a.hs_norm(&(&g - &e22)).unwrap() < 1e-12);
        let z = q.q_inner(&e11, &e12).unwrap();
        assert!(a.hs_norm(&z).unwrap() < 1e-12);
        // τ(⟨x,y⟩_Q) = ⟨x,y⟩
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = a.random_element(&mut rng);
        let y = a.random_element(&mut rng);
        let lhs = a.trace(&q.q_inner(&x, &y).unwrap()).unwrap();
        let rhs = a.hs_inner(&x, &y).unwrap();
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn module_cauchy_schwarz() {
        let a = m2();
        let q = diag_in_m2(&a);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..50 {
            let x = a.random_element(&mut rng);
            let y = a.random_element(&mut rng);
            let xy = q.q_inner(&x, &y).unwrap();
            let yx = q.q_inner(&y, &x).unwrap();
            let yy = q.q_inner(&y, &y).unwrap();
            let xx = q.q_inner(&x, &x).unwrap();
            let bound = a.op_norm(&yy);
            let diff = &xx.scale(C64::new(bound, 0.0)) - &(&xy * &yx);
            for b in &diff.blocks {
                let (vals, _) = linalg::hermitian_eig(b).unwrap();
                assert!(vals.iter().all(|&v| v > -a.tol.verify * 100.0));
            }
        }
    }

    #[test]
    fn basic_construction_dimensions() {
        let a = m2();
        // Q = N: ⟨N, e_N⟩ = N, τ̂(1) = 1.
        let qn = full_subalgebra(&a).unwrap();
        let bc = qn.basic_construction().unwrap();
        let id = CMat::identity(4, 4);
        assert!((bc.tau_hat_eval(&id).unwrap().re - 1.0).abs() < 1e-9);
        // Q = ℂ: all of B(L²(M₂)), τ̂(1) = 4.
        let qc = scalar_subalgebra(&a).unwrap();
        let bc = qc.basic_construction().unwrap();
        assert_eq!(bc.algebra_basis.len(), 16);
        assert!((bc.tau_hat_eval(&id).unwrap().re - 4.0).abs() < 1e-9);
        // Q = diag: τ̂(1) = 2.
        let qd = diag_in_m2(&a);
        let bc = qd.basic_construction().unwrap();
        assert!((bc.tau_hat_eval(&id).unwrap().re - 2.0).abs() < 1e-9);
    }

    #[test]
    fn tau_hat_is_tracial_on_span() {
        let a = m2();
        let q = diag_in_m2(&a);
        let bc = q.basic_construction().unwrap();
        for i in 0..bc.algebra_basis.len() {
            for j in 0..bc.algebra_basis.len() {
                let ab = &bc.algebra_basis[i] * &bc.algebra_basis[j];
                let ba = &bc.algebra_basis[j] * &bc.algebra_basis[i];
                let d = (bc.tau_hat_eval(&ab).unwrap() - bc.tau_hat_eval(&ba).unwrap()).norm();
                assert!(d < 1e-9);
            }
        }
    }

    #[test]
    fn dim_q_examples() {
        let a = m2();
        // V = L²(N), Q = N → 1.
        let qn = full_subalgebra(&a).unwrap();
        let full = CMat::identity(4, 4);
        assert!((qn.dim_q(&full).unwrap() - 1.0).abs() < 1e-7);
        // V = L²(N), Q = ℂ → 4.
        let qc = scalar_subalgebra(&a).unwrap();
        assert!((qc.dim_q(&full).unwrap() - 4.0).abs() < 1e-7);
        // V = e₁₂·L²(diag), Q = diag → 1/2.
        let qd = diag_in_m2(&a);
        let e12 = a.matrix_unit(0, 0, 1).scale(C64::new(2.0_f64.sqrt(), 0.0));
        let mut v = CMat::zeros(4, 1);
        v.set_column(0, &a.to_l2(&e12));
        assert!((qd.dim_q(&v).unwrap() - 0.5).abs() < 1e-7);
    }
}
