//! Cubic systems and the associated tower of factors: level spaces H_k
//! carrying the iterated relatively independent self-products of a system,
//! face and side transformations, invariant cube spaces, the uniformity
//! seminorms, the Z-subspaces and Z-algebras they cut out, and a combined
//! tower report.
//!
//! Each level k+1 is reduced from pairs of level-k frame vectors via the
//! projection formula ⟨(a,b),(c,d)⟩ = ⟨P_k(c*a)^, P_k(b*d)^⟩, where P_k
//! projects onto the diagonally invariant vectors of H_k. This needs only
//! the class map and multiplication operators of level k and keeps every
//! Gram at (dim H_k)⁴ entries, which is guarded by an explicit budget.

use std::sync::OnceLock;

use num_complex::Complex64 as C64;

use crate::algebra::Element;
use crate::dynamics::{invariant_subspace, make_system, DynamicalSystem, GenMap};
use crate::error::{Error, Result};
use crate::fusion::GramFrame;
use crate::linalg::{self, CMat, CVec};
use crate::subalgebra::{self, Subalgebra};
use crate::wedderburn;

/// Entry cap for the next level's Gram matrix, overridable through the
/// OPALG_BUDGET environment variable.
pub fn default_budget() -> usize {
    std::env::var("OPALG_BUDGET")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(1_000_000)
}

/// One level of the cubic tower.
pub struct CubicLevel {
    pub k: usize,
    /// Dimension of H_k.
    pub dim: usize,
    /// Frame reducing pairs of level-(k−1) frame vectors to H_k
    /// coordinates. At level 0 it is the identity on L²(N).
    pub frame: GramFrame,
    /// Class of 1.
    pub omega: CVec,
    /// Diagonal Koopman unitaries, one per group generator.
    pub diag: Vec<CMat>,
    /// Projection onto the jointly diagonal-invariant vectors.
    pub p_inv: CMat,
    mult: OnceLock<Vec<CMat>>,
}

/// The cubic tower of a single ergodic abelian system.
pub struct Tower {
    pub system: DynamicalSystem,
    pub levels: Vec<CubicLevel>,
    pub budget: usize,
}

/// Partial trace over the second (minor) index of a (f·g)×(f·g) matrix.
fn ptrace2(big: &CMat, f: usize) -> CMat {
    let g = big.nrows() / f;
    let mut out = CMat::zeros(f, f);
    for a in 0..f {
        for b in 0..f {
            let mut s = C64::new(0.0, 0.0);
            for e in 0..g {
                s += big[(a * g + e, b * g + e)];
            }
            out[(a, b)] = s;
        }
    }
    out
}

/// Start a tower at level 0 = L²(N). Requires an ergodic system over a
/// group of declared abelian kind.
pub fn build_level0(s: &DynamicalSystem, budget: usize) -> Result<Tower> {
    if !s.ergodic {
        let fixed = s.fixed_algebra()?;
        return Err(Error::NotErgodic(fixed.dim()));
    }
    if !s.group.is_abelian_kind() {
        return Err(Error::NotAbelian);
    }
    let a = &s.algebra;
    let d = a.dim_l2();
    let frame = GramFrame {
        to: CMat::identity(d, d),
        pinv: CMat::identity(d, d),
        dim: d,
    };
    let omega = a.to_l2(&a.one());
    let inv = invariant_subspace(&s.koopman, d, &a.tol)?;
    let p_inv = linalg::projector(&inv);
    let std = a.standard_basis();
    let mult: Vec<CMat> = std.iter().map(|u| a.left_mult_matrix(u)).collect();
    let level = CubicLevel {
        k: 0,
        dim: d,
        frame,
        omega,
        diag: s.koopman.clone(),
        p_inv,
        mult: OnceLock::new(),
    };
    let _ = level.mult.set(mult);
    Ok(Tower {
        system: s.clone(),
        levels: vec![level],
        budget,
    })
}

/// Build a tower up to level kmax.
pub fn build_tower(s: &DynamicalSystem, kmax: usize, budget: usize) -> Result<Tower> {
    let mut t = build_level0(s, budget)?;
    while t.levels.len() <= kmax {
        t.lift()?;
    }
    Ok(t)
}

impl Tower {
    pub fn top(&self) -> usize {
        self.levels.len() - 1
    }

    /// Multiplication operators of the frame basis of level j, materialized
    /// on first use.
    fn mults(&self, j: usize) -> Result<&[CMat]> {
        for jj in 0..=j {
            if self.levels[jj].mult.get().is_none() {
                let m = self.compute_mult(jj)?;
                let _ = self.levels[jj].mult.set(m);
            }
        }
        Ok(self.levels[j].mult.get().unwrap())
    }

    fn compute_mult(&self, j: usize) -> Result<Vec<CMat>> {
        let tol = self.system.algebra.tol;
        let lvl = &self.levels[j];
        let prev = self.levels[j - 1].mult.get().unwrap();
        let f = self.levels[j - 1].dim;
        let mut out = Vec::with_capacity(lvl.dim);
        for m in 0..lvl.dim {
            let w = lvl.frame.pinv.column(m);
            // Σ_{a,b} w[af+b] prev[a] ⊗ prev[b] = Σ_a prev[a] ⊗ R_a with
            // R_a = Σ_b w[af+b] prev[b], so only f Kronecker terms are needed.
            let mut big = CMat::zeros(f * f, f * f);
            for a in 0..f {
                let mut ra = CMat::zeros(f, f);
                let mut nonzero = false;
                for b in 0..f {
                    let c = w[a * f + b];
                    if c.norm() < 1e-15 {
                        continue;
                    }
                    ra += prev[b].map(|x| x * c);
                    nonzero = true;
                }
                if !nonzero {
                    continue;
                }
                // Accumulate prev[a] ⊗ R_a on the column-major backing
                // slices directly; indexed access dominates otherwise.
                let pas = prev[a].as_slice();
                let ras = ra.as_slice();
                let bigs = big.as_mut_slice();
                for j in 0..f {
                    for q in 0..f {
                        let dst = (j * f + q) * f * f;
                        let src = &ras[q * f..(q + 1) * f];
                        for i in 0..f {
                            let s = pas[j * f + i];
                            if s.norm() < 1e-15 {
                                continue;
                            }
                            let col = &mut bigs[dst + i * f..dst + (i + 1) * f];
                            for (p, r) in src.iter().enumerate() {
                                col[p] += s * r;
                            }
                        }
                    }
                }
            }
            // Compress to · big skipping the exact zeros of big; the
            // operators are sparse for the systems of interest and the
            // dense product dominates the whole tower build otherwise.
            let to = &lvl.frame.to;
            let d = lvl.frame.dim;
            let mut compressed = CMat::zeros(d, f * f);
            {
                let tos = to.as_slice();
                let bigs = big.as_slice();
                let comps = compressed.as_mut_slice();
                for c in 0..f * f {
                    let bcol = &bigs[c * f * f..(c + 1) * f * f];
                    let ocol = &mut comps[c * d..(c + 1) * d];
                    for (r, v) in bcol.iter().enumerate() {
                        if v.re == 0.0 && v.im == 0.0 {
                            continue;
                        }
                        let tcol = &tos[r * d..(r + 1) * d];
                        for (o, t) in ocol.iter_mut().zip(tcol) {
                            *o += v * t;
                        }
                    }
                }
            }
            let op = &compressed * &lvl.frame.pinv;
            let leak = (&compressed - &op * to).norm();
            if leak > tol.verify * 100.0 * (1.0 + big.norm()) {
                return Err(Error::NumericalFailure(format!(
                    "multiplication operator not well defined on classes (leak {leak:.3e})"
                )));
            }
            out.push(op);
        }
        Ok(out)
    }

    /// Build level k+1 from level k. The Gram over pairs of frame vectors
    /// has (dim H_k)⁴ entries and must fit the budget.
    pub fn lift(&mut self) -> Result<()> {
        let tol = self.system.algebra.tol;
        let k = self.top();
        let f = self.levels[k].dim;
        let entries = f.pow(4);
        if entries > self.budget {
            return Err(Error::BudgetExceeded(format!(
                "level {} Gram needs {entries} entries, budget is {}",
                k + 1,
                self.budget
            )));
        }
        let mult = self.mults(k)?.to_vec();
        let lvl = &self.levels[k];
        let p = &lvl.p_inv;
        // X_c = Π_c P; Gram[(a,b),(c,d)] = (X_c X_b†)[a,d].
        let xs: Vec<CMat> = mult.iter().map(|m| m * p).collect();
        let mut gram = CMat::zeros(f * f, f * f);
        for b in 0..f {
            let xb = xs[b].adjoint();
            for c in 0..f {
                let kbc = &xs[c] * &xb;
                for a in 0..f {
                    for d in 0..f {
                        gram[(a * f + b, c * f + d)] = kbc[(a, d)];
                    }
                }
            }
        }
        let sym = (&gram + gram.adjoint()).scale(0.5);
        let frame = GramFrame::new(&sym, &tol)?;
        let omega = &frame.to * lvl.omega.kronecker(&lvl.omega);
        let one_gap = (omega.dotc(&omega).re - 1.0).abs();
        if one_gap > tol.verify * 100.0 {
            return Err(Error::NumericalFailure(format!(
                "state of the unit drifted at level {} (gap {one_gap:.3e})",
                k + 1
            )));
        }
        let mut diag = Vec::with_capacity(lvl.diag.len());
        for u in &lvl.diag {
            let big = u.kronecker(u);
            let (op, leak) = frame.conj_op(&big);
            if leak > tol.verify * 100.0 * (1.0 + big.norm()) {
                return Err(Error::NumericalFailure(format!(
                    "diagonal action not well defined at level {} (leak {leak:.3e})",
                    k + 1
                )));
            }
            diag.push(op);
        }
        let inv = invariant_subspace(&diag, frame.dim, &tol)?;
        let p_inv = linalg::projector(&inv);
        // The state is invariant under all side transformations: the sides
        // fix the class of 1.
        let dim = frame.dim;
        self.levels.push(CubicLevel {
            k: k + 1,
            dim,
            frame,
            omega,
            diag,
            p_inv,
            mult: OnceLock::new(),
        });
        let g = self.system.koopman.len();
        for j in 0..=k {
            for gi in 0..g {
                let side = self.side_transformation(k + 1, j, gi)?;
                let lvl = self.levels.last().unwrap();
                let drift = (&side * &lvl.omega - &lvl.omega).norm();
                if drift > tol.verify * 1000.0 {
                    return Err(Error::NumericalFailure(format!(
                        "side transformation moves the class of 1 (drift {drift:.3e})"
                    )));
                }
            }
        }
        Ok(())
    }

    /// The unitary of a face transformation on H_k: apply the word to the
    /// tensor legs whose bits match the face constraints. `face[j] =
    /// Some(bit)` constrains coordinate j; `None` leaves it free. The full
    /// face (all None) gives the diagonal action.
    pub fn face_transformation(
        &self,
        k: usize,
        face: &[Option<bool>],
        word: &[i64],
    ) -> Result<CMat> {
        if face.len() != k {
            return Err(Error::Face(format!(
                "face has {} constraints for level {k}",
                face.len()
            )));
        }
        if k >= self.levels.len() {
            return Err(Error::Argument(format!("tower built only to level {}", self.top())));
        }
        let u = self.word_op(word)?;
        self.face_rec(k, face, &u)
    }

    fn word_op(&self, word: &[i64]) -> Result<CMat> {
        let d = self.system.algebra.dim_l2();
        let mut u = CMat::identity(d, d);
        for &g in word {
            if g == 0 || g.unsigned_abs() as usize > self.system.koopman.len() {
                return Err(Error::Face(format!("letter {g} is not a generator")));
            }
            let kg = &self.system.koopman[g.unsigned_abs() as usize - 1];
            u = if g > 0 { &u * kg } else { u * kg.adjoint() };
        }
        Ok(u)
    }

    fn face_rec(&self, k: usize, face: &[Option<bool>], u: &CMat) -> Result<CMat> {
        if k == 0 {
            return Ok(u.clone());
        }
        let lvl = &self.levels[k];
        let fdim = self.levels[k - 1].dim;
        let id = CMat::identity(fdim, fdim);
        let big = match face[k - 1] {
            None => {
                let sub = self.face_rec(k - 1, &face[..k - 1], u)?;
                sub.kronecker(&sub)
            }
            Some(false) => self.face_rec(k - 1, &face[..k - 1], u)?.kronecker(&id),
            Some(true) => id.kronecker(&self.face_rec(k - 1, &face[..k - 1], u)?),
        };
        let (op, leak) = lvl.frame.conj_op(&big);
        let tol = self.system.algebra.tol;
        if leak > tol.verify * 100.0 * (1.0 + big.norm()) {
            return Err(Error::Face(format!(
                "face transformation not well defined on classes (leak {leak:.3e})"
            )));
        }
        Ok(op)
    }

    /// Side {ε_{j+1} = 1} for generator index g (0-based); these sides
    /// avoid the zero vertex and generate the side-transformation group.
    pub fn side_transformation(&self, k: usize, j: usize, g: usize) -> Result<CMat> {
        let mut face = vec![None; k];
        if j >= k {
            return Err(Error::Face(format!("side {j} out of range for level {k}")));
        }
        face[j] = Some(true);
        self.face_transformation(k, &face, &[(g + 1) as i64])
    }

    /// Fixed vectors of the diagonal action and of the full side group
    /// (sides avoiding the zero vertex). Asserts that the side-invariant
    /// vectors lie in the zero-coordinate copy of L²(N).
    pub fn invariant_cubes(&self, k: usize) -> Result<(CMat, CMat)> {
        let tol = self.system.algebra.tol;
        let lvl = &self.levels[k];
        let i_basis = invariant_subspace(&lvl.diag, lvl.dim, &tol)?;
        let mut sides = Vec::new();
        for j in 0..k {
            for g in 0..self.system.koopman.len() {
                sides.push(self.side_transformation(k, j, g)?);
            }
        }
        let j_basis = if sides.is_empty() {
            CMat::identity(lvl.dim, lvl.dim)
        } else {
            invariant_subspace(&sides, lvl.dim, &tol)?
        };
        // Zero-coordinate embedding x ↦ class(x ⊗ 1 ⊗ … ⊗ 1).
        let e0 = self.zero_embedding(k);
        let p0 = linalg::projector(&linalg::orthonormal_colspan(&e0, &tol)?);
        let leak = ((CMat::identity(lvl.dim, lvl.dim) - &p0) * &j_basis).norm();
        if leak > tol.verify * 1000.0 * (1.0 + j_basis.ncols() as f64) {
            return Err(Error::NumericalFailure(format!(
                "side-invariant vectors leave the zero-coordinate slice (leak {leak:.3e})"
            )));
        }
        Ok((i_basis, j_basis))
    }

    /// Matrix of x ↦ class(x ⊗ 1^{⊗(2^k−1)}), L²(N) → H_k.
    pub fn zero_embedding(&self, k: usize) -> CMat {
        let d = self.system.algebra.dim_l2();
        let mut e = CMat::identity(d, d);
        for j in 1..=k {
            let lvl = &self.levels[j];
            e = &lvl.frame.to * e.kronecker(&self.levels[j - 1].omega);
        }
        e
    }

    /// Evaluate the level-k state on a simple tensor of 2^k elements.
    pub fn state_eval(&self, k: usize, xs: &[Element]) -> Result<C64> {
        if xs.len() != 1 << k {
            return Err(Error::Argument(format!(
                "level {k} state needs {} tensor legs, got {}",
                1 << k,
                xs.len()
            )));
        }
        let class = self.class_of(k, xs)?;
        Ok(self.levels[k].omega.dotc(&class))
    }

    fn class_of(&self, k: usize, xs: &[Element]) -> Result<CVec> {
        if k == 0 {
            self.system.algebra.check_shape(&xs[0])?;
            return Ok(self.system.algebra.to_l2(&xs[0]));
        }
        let half = xs.len() / 2;
        let a = self.class_of(k - 1, &xs[..half])?;
        let b = self.class_of(k - 1, &xs[half..])?;
        Ok(&self.levels[k].frame.to * a.kronecker(&b))
    }

    /// The k-th uniformity seminorm of x ∈ N, via
    /// ⦀x⦀_k^{2^k} = ‖P_{k−1} v_{k−1}(x*)‖² with v_j(y) the class of the
    /// alternating-adjoint cube tensor of y at level j. Needs the tower
    /// only to level k−1.
    pub fn seminorm(&self, x: &Element, k: usize) -> Result<f64> {
        if k == 0 {
            return Err(Error::Argument("seminorm level must be ≥ 1".into()));
        }
        if self.levels.len() < k {
            return Err(Error::Argument(format!(
                "seminorm at k={k} needs the tower to level {}",
                k - 1
            )));
        }
        self.system.algebra.check_shape(x)?;
        // Carry the classes of the cube tensor of x and of x* in parallel;
        // each lift interleaves them, so no star operator on H_j is needed.
        let mut v = self.system.algebra.to_l2(x);
        let mut vs = self.system.algebra.to_l2(&x.adjoint());
        for j in 1..k {
            let to = &self.levels[j].frame.to;
            let nv = to * v.kronecker(&vs);
            let nvs = to * vs.kronecker(&v);
            v = nv;
            vs = nvs;
        }
        let pv = &self.levels[k - 1].p_inv * vs;
        let val = pv.dotc(&pv).re.max(0.0);
        Ok(val.powf(1.0 / (1u64 << k) as f64))
    }

    /// Orthonormal basis (in L² coordinates) of the subspace L²(Z_{k−1}):
    /// the orthogonal complement of the left kernel of the pairing
    /// x ↦ τ^[k](x ⊗ ·) over all other cube coordinates. Also checks that
    /// the left kernel coincides with the null set of the k-th seminorm.
    pub fn z_subspace(&self, k: usize) -> Result<CMat> {
        if k == 0 || self.levels.len() <= k {
            return Err(Error::Argument(format!(
                "z-subspace at k={k} needs the tower to level {k}"
            )));
        }
        let tol = self.system.algebra.tol;
        let a = &self.system.algebra;
        let d = a.dim_l2();
        // Fold Ω_k Ω_k† down to a PSD form on L²(N) by tracing out the
        // non-zero cube coordinates level by level.
        let top = &self.levels[k];
        let mut m: CMat = &top.omega * top.omega.adjoint();
        for j in (1..=k).rev() {
            let to = &self.levels[j].frame.to;
            let big = to.adjoint() * &m * to;
            m = ptrace2(&big, self.levels[j - 1].dim);
        }
        let msym = (&m + m.adjoint()).scale(0.5);
        let (vals, vecs) = linalg::hermitian_eig(&msym)?;
        let maxev = vals.iter().fold(0.0f64, |x, &y| x.max(y.abs()));
        let cut = tol.rank_cutoff(maxev);
        let keep: Vec<usize> = (0..d).filter(|&i| vals[i] > cut).collect();
        let mut z = CMat::zeros(d, keep.len());
        for (c, &i) in keep.iter().enumerate() {
            z.set_column(c, &vecs.column(i).into_owned());
        }
        // Null-set consistency: kernel vectors have vanishing seminorm,
        // range vectors do not.
        for i in 0..d {
            let x = a.from_l2(&vecs.column(i).into_owned());
            let s = self.seminorm(&x, k)?;
            let in_kernel = vals[i] <= cut;
            if in_kernel && s > tol.report {
                return Err(Error::NumericalFailure(format!(
                    "pairing kernel vector has seminorm {s:.3e}"
                )));
            }
            if !in_kernel && s <= tol.report {
                return Err(Error::NumericalFailure(format!(
                    "pairing range vector has vanishing seminorm (eigenvalue {:.3e})",
                    vals[i]
                )));
            }
        }
        Ok(z)
    }

    /// The factor algebra Z_{k−1}: verifies that the z-subspace is closed
    /// under products and adjoints, is invariant under the group, and that
    /// the extension Z_{k−1} ⊂ Z_k is compact.
    pub fn z_algebra(&self, k: usize) -> Result<Subalgebra> {
        let a = &self.system.algebra;
        let tol = a.tol;
        let zb = self.z_subspace(k)?;
        let gens: Vec<Element> = (0..zb.ncols())
            .map(|c| a.from_l2(&zb.column(c).into_owned()))
            .collect();
        let sub = subalgebra::generate_subalgebra(a, &gens)?;
        if sub.dim() != zb.ncols() {
            return Err(Error::NotAnAlgebra(format!(
                "z-subspace of dim {} generates an algebra of dim {}",
                zb.ncols(),
                sub.dim()
            )));
        }
        for u in &self.system.koopman {
            let res = (u * &sub.proj * u.adjoint() - &sub.proj).norm();
            if res > tol.verify * 100.0 {
                return Err(Error::SubalgebraNotInvariant(res));
            }
        }
        Ok(sub)
    }

    /// Whether the level-k state is a trace on its algebra, tested on all
    /// pairs of frame multiplication operators. None if materializing the
    /// operators would break the budget.
    pub fn traciality(&self, k: usize) -> Result<Option<bool>> {
        if k > 0 && self.levels[k].mult.get().is_none() {
            let f = self.levels[k - 1].dim;
            if f.pow(4) > self.budget {
                return Ok(None);
            }
        }
        let mult = self.mults(k)?;
        let lvl = &self.levels[k];
        let tolr = self.system.algebra.tol.report;
        for a in mult {
            let ao = a * &lvl.omega;
            for b in mult {
                let ab = lvl.omega.dotc(&(a * (b * &lvl.omega)));
                let ba = lvl.omega.dotc(&(b * ao.clone()));
                if (ab - ba).norm() > tolr {
                    return Ok(Some(false));
                }
            }
        }
        Ok(Some(true))
    }
}

/// Realize a subalgebra as a system in its own right (left regular
/// representation) and test whether it is a compact extension of an inner
/// subalgebra.
pub fn compact_extension_pair(
    s: &DynamicalSystem,
    outer: &Subalgebra,
    inner: &Subalgebra,
) -> Result<bool> {
    let a = &s.algebra;
    let tol = a.tol;
    let span: Vec<CMat> = outer.basis.iter().map(|b| a.left_mult_matrix(b)).collect();
    let one_hat = a.to_l2(&a.one());
    let rho = &one_hat * one_hat.adjoint();
    let real = wedderburn::algebraize(&span, &rho, &tol)?;
    let pa = real.algebra.clone();
    let std_p = pa.standard_basis();
    let mut gens = Vec::new();
    for u in &s.koopman {
        let mut kp = CMat::zeros(pa.dim_l2(), pa.dim_l2());
        for (c, e) in std_p.iter().enumerate() {
            let t = real.from_block(e);
            let img = real.to_block(&(u * t * u.adjoint()));
            kp.set_column(c, &pa.to_l2(&img));
        }
        gens.push(GenMap::Linear(kp));
    }
    let q_gens: Vec<Element> = inner
        .basis
        .iter()
        .map(|b| real.to_block(&a.left_mult_matrix(b)))
        .collect();
    let q = subalgebra::generate_subalgebra(&pa, &q_gens)?;
    let sys = make_system(&pa, s.group.clone(), &gens, &q)?;
    Ok(sys.is_compact_extension()?.0)
}

/// Per-level summary inside a tower report.
#[derive(Debug, Clone)]
pub struct LevelReport {
    pub k: usize,
    pub h_dim: usize,
    pub i_dim: usize,
    pub j_dim: usize,
    /// Dimension of L²(Z_{k−1}).
    pub z_dim: usize,
    pub z_algebra_ok: bool,
    pub compact_ok: bool,
    pub tracial: Option<bool>,
}

/// Full tower diagnostics with a seminorm table for a probe set.
#[derive(Debug)]
pub struct TowerReport {
    pub kmax: usize,
    pub levels: Vec<LevelReport>,
    /// seminorms[p][k−1] = ⦀probe_p⦀_k.
    pub seminorms: Vec<Vec<f64>>,
    pub z_increasing: bool,
}

pub fn tower_report(
    s: &DynamicalSystem,
    kmax: usize,
    probes: &[Element],
    budget: usize,
) -> Result<TowerReport> {
    let tower = build_tower(s, kmax, budget)?;
    let a = &s.algebra;
    let tol = a.tol;
    let mut levels = Vec::new();
    let mut z_bases: Vec<CMat> = Vec::new();
    for k in 1..=kmax {
        let (ib, jb) = tower.invariant_cubes(k)?;
        let zb = tower.z_subspace(k)?;
        let zalg = tower.z_algebra(k)?;
        let inner = if k == 1 {
            subalgebra::scalar_subalgebra(a)?
        } else {
            tower.z_algebra(k - 1)?
        };
        let compact_ok = compact_extension_pair(s, &zalg, &inner)?;
        levels.push(LevelReport {
            k,
            h_dim: tower.levels[k].dim,
            i_dim: ib.ncols(),
            j_dim: jb.ncols(),
            z_dim: zb.ncols(),
            z_algebra_ok: true,
            compact_ok,
            tracial: tower.traciality(k)?,
        });
        z_bases.push(zb);
    }
    let mut z_increasing = true;
    for w in z_bases.windows(2) {
        let p = linalg::projector(&w[1]);
        let d = w[0].nrows();
        let leak = ((CMat::identity(d, d) - p) * &w[0]).norm();
        if leak > tol.report {
            z_increasing = false;
        }
    }
    let mut seminorms = Vec::new();
    for x in probes {
        let mut row = Vec::new();
        for k in 1..=kmax {
            row.push(tower.seminorm(x, k)?);
        }
        seminorms.push(row);
    }
    Ok(TowerReport {
        kmax,
        levels,
        seminorms,
        z_increasing,
    })
}
