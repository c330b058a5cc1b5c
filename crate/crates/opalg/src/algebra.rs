//! Finite-dimensional tracial *-algebras: a finite direct sum of full matrix
//! blocks with a weighted normalized trace. The Hilbert space L²(N) is
//! coordinatized by weighted vectorization (block entries scaled by
//! √(α_i/n_i)) so that the standard Euclidean inner product equals the
//! trace inner product ⟨x,y⟩ = τ(x*y).

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec};
use crate::tol::ToleranceProfile;

/// A finite direct sum of matrix blocks M_{n_1} ⊕ … ⊕ M_{n_r} with trace
/// τ(x) = Σ_i α_i · Tr(x_i)/n_i.
#[derive(Debug, Clone)]
pub struct Algebra {
    pub blocks: Vec<usize>,
    pub weights: Vec<f64>,
    pub tol: ToleranceProfile,
}

/// An element of an [`Algebra`]: one complex matrix per block.
#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    pub blocks: Vec<CMat>,
}

impl Algebra {
    pub fn new(blocks: Vec<usize>, weights: Vec<f64>, tol: ToleranceProfile) -> Result<Algebra> {
        if blocks.len() != weights.len() {
            return Err(Error::Shape(format!(
                "{} blocks vs {} weights",
                blocks.len(),
                weights.len()
            )));
        }
        if blocks.is_empty() || blocks.iter().any(|&n| n < 1) {
            return Err(Error::Shape("all block dimensions must be >= 1".into()));
        }
        if weights.iter().any(|&w| w <= 0.0) {
            return Err(Error::Mass("weights must be strictly positive".into()));
        }
        let s: f64 = weights.iter().sum();
        if (s - 1.0).abs() > tol.verify {
            return Err(Error::WeightSum(s));
        }
        let weights = weights.iter().map(|w| w / s).collect();
        Ok(Algebra { blocks, weights, tol })
    }

    /// Dimension of L²(N) = Σ n_i².
    pub fn dim_l2(&self) -> usize {
        self.blocks.iter().map(|&n| n * n).sum()
    }

    pub fn zero(&self) -> Element {
        Element {
            blocks: self.blocks.iter().map(|&n| CMat::zeros(n, n)).collect(),
        }
    }

    pub fn one(&self) -> Element {
        Element {
            blocks: self
                .blocks
                .iter()
                .map(|&n| CMat::identity(n, n))
                .collect(),
        }
    }

    /// The unit of block `b` (and zero elsewhere).
    pub fn block_unit(&self, b: usize) -> Element {
        let mut e = self.zero();
        let n = self.blocks[b];
        e.blocks[b] = CMat::identity(n, n);
        e
    }

    /// Matrix unit e_{pq} in block `b`.
    pub fn matrix_unit(&self, b: usize, p: usize, q: usize) -> Element {
        let mut e = self.zero();
        e.blocks[b][(p, q)] = linalg::cone();
        e
    }

    pub fn check_shape(&self, x: &Element) -> Result<()> {
        if x.blocks.len() != self.blocks.len()
            || x.blocks
                .iter()
                .zip(&self.blocks)
                .any(|(m, &n)| m.nrows() != n || m.ncols() != n)
        {
            return Err(Error::Shape("element does not match algebra blocks".into()));
        }
        Ok(())
    }

    /// τ(x) = Σ_i α_i Tr(x_i)/n_i.
    pub fn trace(&self, x: &Element) -> Result<C64> {
        self.check_shape(x)?;
        let mut t = linalg::czero();
        for (i, m) in x.blocks.iter().enumerate() {
            t += m.trace() * C64::new(self.weights[i] / self.blocks[i] as f64, 0.0);
        }
        Ok(t)
    }

    /// ⟨x,y⟩ = τ(x*y).
    pub fn hs_inner(&self, x: &Element, y: &Element) -> Result<C64> {
        self.trace(&(&x.adjoint() * y))
    }

    /// ‖x‖₂ = √τ(x*x).
    pub fn hs_norm(&self, x: &Element) -> Result<f64> {
        Ok(self.hs_inner(x, x)?.re.max(0.0).sqrt())
    }

    /// Largest block operator norm (largest singular value).
    pub fn op_norm(&self, x: &Element) -> f64 {
        x.blocks
            .iter()
            .map(|m| {
                if m.nrows() == 0 {
                    0.0
                } else {
                    m.clone().svd(false, false).singular_values.max()
                }
            })
            .fold(0.0, f64::max)
    }

    /// Weighted vectorization: coordinates of x̂ ∈ L²(N) in an orthonormal
    /// basis (block entries column-major, scaled by √(α_i/n_i)).
    pub fn to_l2(&self, x: &Element) -> CVec {
        let mut v = CVec::zeros(self.dim_l2());
        let mut off = 0;
        for (i, m) in x.blocks.iter().enumerate() {
            let c = (self.weights[i] / self.blocks[i] as f64).sqrt();
            for e in m.iter() {
                v[off] = e * C64::new(c, 0.0);
                off += 1;
            }
        }
        v
    }

    /// Inverse of [`Algebra::to_l2`].
    pub fn from_l2(&self, v: &CVec) -> Element {
        let mut x = self.zero();
        let mut off = 0;
        for (i, &n) in self.blocks.iter().enumerate() {
            let c = (self.weights[i] / n as f64).sqrt();
            for j in 0..n * n {
                x.blocks[i][(j % n, j / n)] = v[off] / C64::new(c, 0.0);
                off += 1;
            }
        }
        x
    }

    /// Matrix of left multiplication f ↦ xf on L²(N).
    pub fn left_mult_matrix(&self, x: &Element) -> CMat {
        let blocks: Vec<CMat> = x
            .blocks
            .iter()
            .map(|m| CMat::identity(m.nrows(), m.nrows()).kronecker(m))
            .collect();
        linalg::block_diag(&blocks)
    }

    /// Matrix of right multiplication f ↦ fx on L²(N).
    pub fn right_mult_matrix(&self, x: &Element) -> CMat {
        let blocks: Vec<CMat> = x
            .blocks
            .iter()
            .map(|m| m.transpose().kronecker(&CMat::identity(m.nrows(), m.nrows())))
            .collect();
        linalg::block_diag(&blocks)
    }

    /// Standard orthonormal (trace inner product) basis of L²(N): scaled
    /// matrix units, in block/column-major order, matching [`Algebra::to_l2`]
    /// coordinates.
    pub fn standard_basis(&self) -> Vec<Element> {
        let mut out = Vec::with_capacity(self.dim_l2());
        for (b, &n) in self.blocks.iter().enumerate() {
            let c = (n as f64 / self.weights[b]).sqrt();
            for q in 0..n {
                for p in 0..n {
                    let mut e = self.matrix_unit(b, p, q);
                    e = e.scale(C64::new(c, 0.0));
                    out.push(e);
                }
            }
        }
        out
    }

    /// Borel functional calculus on a self-adjoint element: diagonalize each
    /// block with the deterministic eigendecomposition convention and apply
    /// `f` to the eigenvalues.
    pub fn functional_calculus(
        &self,
        x: &Element,
        f: impl Fn(f64) -> f64,
    ) -> Result<Element> {
        self.check_shape(x)?;
        let sa_res = self.hs_norm(&(x - &x.adjoint()))?;
        if sa_res > self.tol.verify {
            return Err(Error::NotSelfAdjoint(sa_res));
        }
        let mut out = self.zero();
        for (i, m) in x.blocks.iter().enumerate() {
            let (vals, vecs) = linalg::hermitian_eig(m)?;
            let n = m.nrows();
            let mut d = CMat::zeros(n, n);
            for (j, &v) in vals.iter().enumerate() {
                d[(j, j)] = C64::new(f(v), 0.0);
            }
            out.blocks[i] = &vecs * d * vecs.adjoint();
        }
        Ok(out)
    }

    /// Spectral projection 1_{[eps,∞)}(x).
    pub fn indicator_geq(&self, x: &Element, eps: f64) -> Result<Element> {
        self.functional_calculus(x, |t| if t >= eps { 1.0 } else { 0.0 })
    }

    /// a ↦ a^{-1/2} restricted to the spectral part [eps,∞).
    pub fn inv_sqrt_geq(&self, x: &Element, eps: f64) -> Result<Element> {
        self.functional_calculus(x, |t| if t >= eps { 1.0 / t.sqrt() } else { 0.0 })
    }

    /// Commutant S' inside the algebra, as an orthonormal basis. The input
    /// set is closed under adjoints before solving so the result is
    /// *-closed.
    pub fn commutant(&self, s: &[Element]) -> Result<Vec<Element>> {
        let d = self.dim_l2();
        let mut maps = Vec::new();
        for x in s.iter().chain(std::iter::once(&self.one())) {
            self.check_shape(x)?;
            for y in [x.clone(), x.adjoint()] {
                maps.push(self.left_mult_matrix(&y) - self.right_mult_matrix(&y));
            }
        }
        let basis = linalg::joint_nullspace(&maps, d, &self.tol)?;
        Ok((0..basis.ncols())
            .map(|c| self.from_l2(&basis.column(c).into_owned()))
            .collect())
    }

    /// Double commutant (S ∪ S* ∪ {1})'' — the von Neumann subalgebra
    /// generated by S — as an orthonormal basis. The two commutant passes
    /// are taken in B(L²(N)) acting by left multiplication; the second pass
    /// lands back inside left multiplications and is pulled back through
    /// the action on the unit vector.
    pub fn bicommutant(&self, s: &[Element]) -> Result<Vec<Element>> {
        let d = self.dim_l2();
        let mut ops: Vec<CMat> = vec![CMat::identity(d, d)];
        for x in s {
            self.check_shape(x)?;
            ops.push(self.left_mult_matrix(x));
            ops.push(self.left_mult_matrix(&x.adjoint()));
        }
        let first = matrix_commutant(&ops, d, &self.tol)?;
        let second = matrix_commutant(&first, d, &self.tol)?;
        let one_hat = self.to_l2(&self.one());
        let mut cols = CMat::zeros(d, second.len());
        for (c, t) in second.iter().enumerate() {
            cols.set_column(c, &(t * &one_hat));
        }
        let ortho = linalg::orthonormal_colspan(&cols, &self.tol)?;
        Ok((0..ortho.ncols())
            .map(|c| self.from_l2(&ortho.column(c).into_owned()))
            .collect())
    }

    /// Orthonormal basis of the center Z(A) = A' ∩ A.
    pub fn center(&self) -> Result<Vec<Element>> {
        self.commutant(&self.standard_basis())
    }

    /// Random element with independent standard complex Gaussian-ish entries
    /// (uniform in [-1,1] on real and imaginary parts).
    pub fn random_element(&self, rng: &mut impl Rng) -> Element {
        Element {
            blocks: self
                .blocks
                .iter()
                .map(|&n| {
                    DMatrix::from_fn(n, n, |_, _| {
                        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                    })
                })
                .collect(),
        }
    }

    /// Random self-adjoint element.
    pub fn random_self_adjoint(&self, rng: &mut impl Rng) -> Element {
        let x = self.random_element(rng);
        (&x + &x.adjoint()).scale(C64::new(0.5, 0.0))
    }
}

/// Orthonormal basis (as matrices) of the commutant of a set of operators
/// on a `d`-dimensional space. The input set is closed under adjoints
/// first, so the result is a von Neumann algebra.
pub fn matrix_commutant(
    ops: &[CMat],
    d: usize,
    tol: &ToleranceProfile,
) -> Result<Vec<CMat>> {
    let id = CMat::identity(d, d);
    let mut maps = Vec::new();
    for a in ops.iter().chain(std::iter::once(&id)) {
        for b in [a.clone(), a.adjoint()] {
            maps.push(id.kronecker(&b) - b.transpose().kronecker(&id));
        }
    }
    let basis = linalg::joint_nullspace(&maps, d * d, tol)?;
    Ok((0..basis.ncols())
        .map(|c| linalg::mat_of(&basis.column(c).into_owned(), d, d))
        .collect())
}

impl Element {
    pub fn adjoint(&self) -> Element {
        Element {
            blocks: self.blocks.iter().map(|m| m.adjoint()).collect(),
        }
    }

    pub fn scale(&self, c: C64) -> Element {
        Element {
            blocks: self.blocks.iter().map(|m| m.map(|e| e * c)).collect(),
        }
    }

    pub fn transpose(&self) -> Element {
        Element {
            blocks: self.blocks.iter().map(|m| m.transpose()).collect(),
        }
    }
}

impl std::ops::Add for &Element {
    type Output = Element;
    fn add(self, rhs: &Element) -> Element {
        Element {
            blocks: self
                .blocks
                .iter()
                .zip(&rhs.blocks)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl std::ops::Sub for &Element {
    type Output = Element;
    fn sub(self, rhs: &Element) -> Element {
        Element {
            blocks: self
                .blocks
                .iter()
                .zip(&rhs.blocks)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl std::ops::Mul for &Element {
    type Output = Element;
    fn mul(self, rhs: &Element) -> Element {
        Element {
            blocks: self
                .blocks
                .iter()
                .zip(&rhs.blocks)
                .map(|(a, b)| a * b)
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn m2() -> Algebra {
        Algebra::new(vec![2], vec![1.0], ToleranceProfile::default()).unwrap()
    }

    fn two_points() -> Algebra {
        Algebra::new(vec![1, 1], vec![0.5, 0.5], ToleranceProfile::default()).unwrap()
    }

    #[test]
    fn weight_sum_rejected() {
        assert!(matches!(
            Algebra::new(vec![1, 1], vec![0.5, 0.6], ToleranceProfile::default()),
            Err(Error::WeightSum(_))
        ));
    }

    #[test]
    fn mixed_block_trace() {
        let a = Algebra::new(vec![1, 2], vec![0.2, 0.8], ToleranceProfile::default()).unwrap();
        assert!((a.trace(&a.one()).unwrap().re - 1.0).abs() < 1e-14);
        assert!((a.trace(&a.block_unit(0)).unwrap().re - 0.2).abs() < 1e-14);
    }

    #[test]
    fn m2_trace_by_hand() {
        let a = m2();
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
        assert!((a.trace(&x).unwrap().re - 2.5).abs() < 1e-14);
    }

    #[test]
    fn signed_function_traces_to_zero() {
        let a = two_points();
        let mut f = a.one();
        f.blocks[1][(0, 0)] = C64::new(-1.0, 0.0);
        assert!(a.trace(&f).unwrap().norm() < 1e-14);
    }

    #[test]
    fn hs_inner_matrix_unit() {
        let a = m2();
        let e12 = a.matrix_unit(0, 0, 1);
        assert!((a.hs_inner(&e12, &e12).unwrap().re - 0.5).abs() < 1e-14);
    }

    #[test]
    fn trace_commutes_and_inner_conjugate_symmetric() {
        let a = Algebra::new(vec![1, 2], vec![0.3, 0.7], ToleranceProfile::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let x = a.random_element(&mut rng);
            let y = a.random_element(&mut rng);
            let d = (a.trace(&(&x * &y)).unwrap() - a.trace(&(&y * &x)).unwrap()).norm();
            assert!(d < a.tol.verify);
            let c = (a.hs_inner(&x, &y).unwrap() - a.hs_inner(&y, &x).unwrap().conj()).norm();
            assert!(c < a.tol.verify);
        }
    }

    #[test]
    fn l2_coordinates_are_isometric() {
        let a = Algebra::new(vec![1, 2], vec![0.3, 0.7], ToleranceProfile::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let x = a.random_element(&mut rng);
        let y = a.random_element(&mut rng);
        let lhs = a.hs_inner(&x, &y).unwrap();
        let rhs = a.to_l2(&x).dotc(&a.to_l2(&y));
        assert!((lhs - rhs).norm() < 1e-12);
        let back = a.from_l2(&a.to_l2(&x));
        assert!(a.hs_norm(&(&back - &x)).unwrap() < 1e-12);
        let lm = a.left_mult_matrix(&x) * a.to_l2(&y);
        assert!((lm - a.to_l2(&(&x * &y))).norm() < 1e-12);
        let rm = a.right_mult_matrix(&x) * a.to_l2(&y);
        assert!((rm - a.to_l2(&(&y * &x))).norm() < 1e-12);
    }

    #[test]
    fn indicator_on_diagonal() {
        let a = m2();
        let mut x = a.zero();
        x.blocks[0][(1, 1)] = C64::new(1.0, 0.0);
        let p = a.indicator_geq(&x, 0.5).unwrap();
        let e22 = a.matrix_unit(0, 1, 1);
        assert!(a.hs_norm(&(&p - &e22)).unwrap() < 1e-12);
        assert!(a.hs_norm(&(&(&p * &p) - &p)).unwrap() < a.tol.verify);
    }

    #[test]
    fn inv_sqrt_zeroes_small_spectrum() {
        let a = m2();
        let mut x = a.zero();
        x.blocks[0][(0, 0)] = C64::new(0.01, 0.0);
        x.blocks[0][(1, 1)] = C64::new(1.0, 0.0);
        let y = a.inv_sqrt_geq(&x, 0.5).unwrap();
        let e22 = a.matrix_unit(0, 1, 1);
        assert!(a.hs_norm(&(&y - &e22)).unwrap() < 1e-12);
    }

    #[test]
    fn functional_calculus_idempotent_on_random() {
        let a = Algebra::new(vec![2, 3], vec![0.4, 0.6], ToleranceProfile::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let x = a.random_self_adjoint(&mut rng);
            let p = a.indicator_geq(&x, 0.1).unwrap();
            assert!(a.hs_norm(&(&(&p * &p) - &p)).unwrap() < a.tol.verify);
            assert!(a.hs_norm(&(&p - &p.adjoint())).unwrap() < a.tol.verify);
        }
    }

    #[test]
    fn bicommutant_cases() {
        let a = m2();
        let triv = a.bicommutant(&[]).unwrap();
        assert_eq!(triv.len(), 1);
        let diag = a.bicommutant(&[a.matrix_unit(0, 0, 0)]).unwrap();
        assert_eq!(diag.len(), 2);
        let full = a.bicommutant(&[a.matrix_unit(0, 0, 1)]).unwrap();
        assert_eq!(full.len(), 4);
    }

    #[test]
    fn bicommutant_basis_is_multiplicatively_closed() {
        let a = m2();
        let basis = a.bicommutant(&[a.matrix_unit(0, 0, 0)]).unwrap();
        for x in &basis {
            for y in &basis {
                let p = x * y;
                let mut rec = a.zero();
                for b in &basis {
                    let c = a.hs_inner(b, &p).unwrap();
                    rec = &rec + &b.scale(c);
                }
                assert!(a.hs_norm(&(&rec - &p)).unwrap() < a.tol.verify);
            }
        }
    }

    #[test]
    fn bicommutant_in_commutative_algebra() {
        let a = Algebra::new(
            vec![1, 1, 1, 1],
            vec![0.25; 4],
            ToleranceProfile::default(),
        )
        .unwrap();
        let ind = &a.block_unit(0) + &a.block_unit(1);
        let part = a.bicommutant(&[ind]).unwrap();
        assert_eq!(part.len(), 2);
    }

    #[test]
    fn center_dimensions() {
        let m2 = m2();
        assert_eq!(m2.center().unwrap().len(), 1);
        let c2 = two_points();
        assert_eq!(c2.center().unwrap().len(), 2);
        let mixed =
            Algebra::new(vec![1, 2], vec![0.2, 0.8], ToleranceProfile::default()).unwrap();
        let z = mixed.center().unwrap();
        assert_eq!(z.len(), 2);
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..50 {
            let x = mixed.random_element(&mut rng);
            for c in &z {
                let comm = &(c * &x) - &(&x * c);
                assert!(mixed.hs_norm(&comm).unwrap() < mixed.tol.verify);
            }
        }
    }
}
