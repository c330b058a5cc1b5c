//! Joinings of two systems over an identified common subalgebra: states on
//! M ⊗ N^op with prescribed marginals, diagonal restriction and
//! invariance, represented by density elements of a concrete block algebra
//! (the opposite algebra is realized by transposition). Includes the
//! relatively independent joining, Dykstra feasibility projection, a
//! log-det barrier maximizer for disjointness probes, and the completely
//! positive map associated with a joining.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::algebra::{Algebra, Element};
use crate::dynamics::DynamicalSystem;
use crate::error::{Error, Result};
use crate::fusion;
use crate::linalg::{self, CMat, CVec};

pub type RMat = DMatrix<f64>;
pub type RVec = DVector<f64>;

/// The algebra M ⊗ N^op as concrete blocks (Kronecker products with the
/// second factor transposed), with the tensor coordinate system and an
/// orthonormal basis of self-adjoint elements used to parameterize
/// densities by real vectors.
#[derive(Debug, Clone)]
pub struct Ambient {
    pub algebra: Algebra,
    pub m_alg: Algebra,
    pub n_alg: Algebra,
    /// Coordinates of the classes of u_a ⊗ v_b (standard bases) as columns:
    /// the unitary change between tensor and ambient L² coordinates.
    pub tensor_basis: CMat,
    /// Orthonormal self-adjoint basis of the ambient algebra.
    pub herm: Vec<Element>,
}

impl Ambient {
    pub fn new(m: &Algebra, n: &Algebra) -> Result<Ambient> {
        let mut blocks = Vec::new();
        let mut weights = Vec::new();
        for (i, &mi) in m.blocks.iter().enumerate() {
            for (j, &nj) in n.blocks.iter().enumerate() {
                blocks.push(mi * nj);
                weights.push(m.weights[i] * n.weights[j]);
            }
        }
        let algebra = Algebra::new(blocks, weights, m.tol)?;
        let mut amb = Ambient {
            algebra,
            m_alg: m.clone(),
            n_alg: n.clone(),
            tensor_basis: CMat::zeros(0, 0),
            herm: Vec::new(),
        };
        let dm = m.dim_l2();
        let dn = n.dim_l2();
        let d = dm * dn;
        let mut tb = CMat::zeros(d, d);
        let stdm = m.standard_basis();
        let stdn = n.standard_basis();
        for (a, u) in stdm.iter().enumerate() {
            for (b, v) in stdn.iter().enumerate() {
                tb.set_column(a * dn + b, &amb.algebra.to_l2(&amb.embed_tensor(u, v)));
            }
        }
        amb.tensor_basis = tb;
        amb.herm = hermitian_basis(&amb.algebra);
        Ok(amb)
    }

    /// The element x ⊗ y^op: per block pair, x_i ⊗ y_jᵀ.
    pub fn embed_tensor(&self, x: &Element, y: &Element) -> Element {
        let mut e = self.algebra.zero();
        let mut k = 0;
        for xi in &x.blocks {
            for yj in &y.blocks {
                e.blocks[k] = xi.kronecker(&yj.transpose());
                k += 1;
            }
        }
        e
    }

    /// Real coordinates of a self-adjoint element in the hermitian basis.
    pub fn to_real(&self, x: &Element) -> Result<RVec> {
        let mut t = RVec::zeros(self.herm.len());
        for (k, h) in self.herm.iter().enumerate() {
            t[k] = self.algebra.hs_inner(h, x)?.re;
        }
        Ok(t)
    }

    pub fn from_real(&self, t: &RVec) -> Element {
        let mut x = self.algebra.zero();
        for (k, h) in self.herm.iter().enumerate() {
            x = &x + &h.scale(C64::new(t[k], 0.0));
        }
        x
    }

    /// Row of the affine system expressing φ(z) = Σ_k t_k τ(h_k z): the
    /// real and imaginary parts.
    fn rows_for(&self, z: &Element) -> Result<(RVec, RVec)> {
        let mut re = RVec::zeros(self.herm.len());
        let mut im = RVec::zeros(self.herm.len());
        for (k, h) in self.herm.iter().enumerate() {
            let c = self.algebra.trace(&(h * z))?;
            re[k] = c.re;
            im[k] = c.im;
        }
        Ok((re, im))
    }

    /// Koopman matrix of σ_γ ⊗ σ_γ on ambient L² coordinates, from the two
    /// factor Koopman matrices.
    pub fn diagonal_koopman(&self, km: &CMat, kn: &CMat) -> CMat {
        &self.tensor_basis * km.kronecker(kn) * self.tensor_basis.adjoint()
    }
}

/// Orthonormal self-adjoint basis of a block algebra.
pub fn hermitian_basis(a: &Algebra) -> Vec<Element> {
    let mut out = Vec::with_capacity(a.dim_l2());
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    for (b, &n) in a.blocks.iter().enumerate() {
        let c = (n as f64 / a.weights[b]).sqrt();
        for p in 0..n {
            out.push(a.matrix_unit(b, p, p).scale(C64::new(c, 0.0)));
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let epq = a.matrix_unit(b, p, q);
                let eqp = a.matrix_unit(b, q, p);
                out.push((&epq + &eqp).scale(C64::new(c * inv_sqrt2, 0.0)));
                out.push((&epq - &eqp).scale(C64::new(0.0, c * inv_sqrt2)));
            }
        }
    }
    out
}

/// A joining as a density element: φ(z) = τ_amb(ρ z).
#[derive(Debug, Clone)]
pub struct JoiningState {
    pub rho: Element,
    pub t: RVec,
}

/// Two systems with a common identified subalgebra, the ambient algebra,
/// and the affine constraints (marginals, diagonal restriction, unit mass,
/// invariance) on densities.
pub struct JoiningProblem {
    pub m: DynamicalSystem,
    pub n: DynamicalSystem,
    /// Images in N of the basis of Q ⊆ M.
    pub ident: Vec<Element>,
    pub amb: Ambient,
    pub a_mat: RMat,
    pub b_vec: RVec,
    rel_t: RVec,
}

pub fn joining_problem(
    m: &DynamicalSystem,
    n: &DynamicalSystem,
    ident: &[Element],
) -> Result<JoiningProblem> {
    if m.group != n.group {
        return Err(Error::Shape(
            "joined systems must share the same group presentation".into(),
        ));
    }
    // Verifies that `ident` is a trace-preserving *-isomorphism of the
    // subalgebras.
    fusion::build_fusion(&m.q, &n.q, ident)?;
    let amb = Ambient::new(&m.algebra, &n.algebra)?;
    let ma = &m.algebra;
    let na = &n.algebra;
    let tol = ma.tol;
    let mut rows: Vec<RVec> = Vec::new();
    let mut rhs: Vec<f64> = Vec::new();
    let mut push = |(re, im): (RVec, RVec), val: C64| {
        rows.push(re);
        rhs.push(val.re);
        rows.push(im);
        rhs.push(val.im);
    };
    // Unit mass and marginals.
    for u in ma.standard_basis() {
        let z = amb.embed_tensor(&u, &na.one());
        push(amb.rows_for(&z)?, ma.trace(&u)?);
    }
    for v in na.standard_basis() {
        let z = amb.embed_tensor(&ma.one(), &v);
        push(amb.rows_for(&z)?, na.trace(&v)?);
    }
    // Diagonal restriction on Q ⊗ Q^op.
    for qi in &m.q.basis {
        for (j, qj) in m.q.basis.iter().enumerate() {
            let z = amb.embed_tensor(qi, &ident[j]);
            push(amb.rows_for(&z)?, ma.trace(&(qi * qj))?);
        }
    }
    // Invariance under the diagonal action: (R_g − I) t = 0 on hermitian
    // coordinates.
    for (km, kn) in m.koopman.iter().zip(&n.koopman) {
        let u = amb.diagonal_koopman(km, kn);
        let nh = amb.herm.len();
        let mut r = RMat::zeros(nh, nh);
        for (l, h) in amb.herm.iter().enumerate() {
            let img = amb.algebra.from_l2(&(&u * amb.algebra.to_l2(h)));
            let col = amb.to_real(&img)?;
            for k in 0..nh {
                r[(k, l)] = col[k];
            }
        }
        for k in 0..nh {
            let mut row = RVec::zeros(nh);
            for l in 0..nh {
                row[l] = r[(k, l)] - if k == l { 1.0 } else { 0.0 };
            }
            rows.push(row);
            rhs.push(0.0);
        }
    }
    let nh = amb.herm.len();
    let mut a_mat = RMat::zeros(rows.len(), nh);
    for (r, row) in rows.iter().enumerate() {
        a_mat.set_row(r, &row.transpose());
    }
    let b_vec = RVec::from_vec(rhs);
    let mut prob = JoiningProblem {
        m: m.clone(),
        n: n.clone(),
        ident: ident.to_vec(),
        amb,
        a_mat,
        b_vec,
        rel_t: RVec::zeros(nh),
    };
    let rel = rel_indep_density(&prob)?;
    let res = (&prob.a_mat * &rel.t - &prob.b_vec).norm();
    if res > tol.verify * 100.0 * (1.0 + prob.b_vec.norm()) {
        return Err(Error::NumericalFailure(format!(
            "relatively independent joining violates the constraints (residual {res:.3e})"
        )));
    }
    prob.rel_t = rel.t.clone();
    Ok(prob)
}

impl JoiningProblem {
    /// Evaluate a joining on a simple tensor x ⊗ y^op.
    pub fn eval(&self, state: &JoiningState, x: &Element, y: &Element) -> Result<C64> {
        let z = self.amb.embed_tensor(x, y);
        self.amb.algebra.trace(&(&state.rho * &z))
    }

    /// Constraint residual plus negative-eigenvalue mass of a candidate.
    pub fn infeasibility(&self, t: &RVec) -> Result<f64> {
        let affine = (&self.a_mat * t - &self.b_vec).norm();
        let rho = self.amb.from_real(t);
        let mut neg = 0.0f64;
        for b in &rho.blocks {
            let (vals, _) = linalg::hermitian_eig(b)?;
            for v in vals {
                neg = neg.max(-v);
            }
        }
        Ok(affine + neg.max(0.0))
    }
}

/// The relatively independent joining φ(x ⊗ y^op) = τ_Q(E_Q(x) E_Q(y)).
pub fn rel_indep_density(p: &JoiningProblem) -> Result<JoiningState> {
    let amb = &p.amb;
    let ma = &p.m.algebra;
    let na = &p.n.algebra;
    let dm = ma.dim_l2();
    let dn = na.dim_l2();
    // Pull-back of the conditional expectation of N through the
    // identification.
    let pull = |y: &Element| -> Result<Element> {
        let ey = p.n.q.cond_expect(y)?;
        let mut out = ma.zero();
        for (q, im) in p.m.q.basis.iter().zip(&p.ident) {
            out = &out + &q.scale(na.hs_inner(im, &ey)?);
        }
        Ok(out)
    };
    let stdm = ma.standard_basis();
    let stdn = na.standard_basis();
    let mut values = CVec::zeros(dm * dn);
    for (a, u) in stdm.iter().enumerate() {
        let eu = p.m.q.cond_expect(u)?;
        for (b, v) in stdn.iter().enumerate() {
            values[a * dn + b] = ma.trace(&(&eu * &pull(v)?))?;
        }
    }
    // ρ = Σ_k φ(h_k) h_k; φ(h_k) from tensor coordinates of h_k.
    let nh = amb.herm.len();
    let mut t = RVec::zeros(nh);
    for (k, h) in amb.herm.iter().enumerate() {
        let coords = amb.tensor_basis.adjoint() * amb.algebra.to_l2(h);
        let mut phi = C64::new(0.0, 0.0);
        for i in 0..coords.len() {
            phi += coords[i].conj() * values[i];
        }
        t[k] = phi.re;
    }
    let rho = amb.from_real(&t);
    Ok(JoiningState { rho, t })
}

/// Outcome of a feasibility search.
pub enum Feasibility {
    Feasible(JoiningState),
    Infeasible { residual: f64, iterations: usize },
}

/// Project onto the joining spectrahedron (optionally with extra affine
/// conditions φ(z) = c) by Dykstra alternation between the PSD cone and
/// the affine set, warm-started at the relatively independent joining.
pub fn joining_feasible(
    p: &JoiningProblem,
    extra: &[(Element, C64)],
) -> Result<Feasibility> {
    let amb = &p.amb;
    let tol = amb.algebra.tol;
    let mut a = p.a_mat.clone();
    let mut b = p.b_vec.clone();
    for (z, c) in extra {
        let (re, im) = amb.rows_for(z)?;
        let rows = a.nrows();
        a = a.insert_rows(rows, 2, 0.0);
        b = b.insert_rows(rows, 2, 0.0);
        a.set_row(rows, &re.transpose());
        a.set_row(rows + 1, &im.transpose());
        b[rows] = c.re;
        b[rows + 1] = c.im;
    }
    let a_pinv = real_pinv(&a, &tol);
    let proj_affine = |t: &RVec| -> RVec { t - &a_pinv * (&a * t - &b) };
    let proj_psd = |t: &RVec| -> Result<RVec> {
        let rho = amb.from_real(t);
        let clipped = clip_psd(&rho)?;
        amb.to_real(&clipped)
    };
    let mut x = p.rel_t.clone();
    let mut corr = RVec::zeros(x.len());
    let max_iter = 100_000usize;
    for it in 0..max_iter {
        let y = proj_affine(&x);
        let z = proj_psd(&(&y + &corr))?;
        corr = &y + &corr - &z;
        x = z;
        let affine_res = (&a * &x - &b).norm();
        if affine_res <= tol.report {
            let rho = amb.from_real(&x);
            let state = JoiningState { rho, t: x };
            return Ok(Feasibility::Feasible(state));
        }
        if it == max_iter - 1 {
            return Ok(Feasibility::Infeasible {
                residual: affine_res,
                iterations: max_iter,
            });
        }
    }
    unreachable!()
}

fn clip_psd(rho: &Element) -> Result<Element> {
    let mut out = rho.clone();
    for (i, blk) in rho.blocks.iter().enumerate() {
        let h = (blk + blk.adjoint()).scale(0.5);
        let (vals, vecs) = linalg::hermitian_eig(&h)?;
        let n = h.nrows();
        let mut d = CMat::zeros(n, n);
        for (j, &v) in vals.iter().enumerate() {
            d[(j, j)] = C64::new(v.max(0.0), 0.0);
        }
        out.blocks[i] = &vecs * d * vecs.adjoint();
    }
    Ok(out)
}

fn real_pinv(a: &RMat, tol: &crate::tol::ToleranceProfile) -> RMat {
    if a.nrows() == 0 || a.ncols() == 0 {
        return RMat::zeros(a.ncols(), a.nrows());
    }
    let svd = a.clone().svd(true, true);
    let u = svd.u.as_ref().unwrap();
    let vt = svd.v_t.as_ref().unwrap();
    let smax = svd.singular_values.max();
    let cut = tol.rank_cutoff(smax);
    let k = svd.singular_values.len();
    let mut s = RMat::zeros(k, k);
    for i in 0..k {
        if svd.singular_values[i] > cut {
            s[(i, i)] = 1.0 / svd.singular_values[i];
        }
    }
    vt.transpose() * s * u.transpose()
}

/// Orthonormal basis of the nullspace of a real matrix.
fn real_nullspace(a: &RMat, tol: &crate::tol::ToleranceProfile) -> RMat {
    let n = a.ncols();
    let g = a.transpose() * a;
    let se = g.symmetric_eigen();
    let maxev = se.eigenvalues.iter().fold(0.0f64, |x, &y| x.max(y.abs()));
    let cut = tol.rank_cutoff(maxev);
    let cols: Vec<usize> = (0..n).filter(|&i| se.eigenvalues[i] <= cut).collect();
    let mut out = RMat::zeros(n, cols.len());
    for (c, &i) in cols.iter().enumerate() {
        out.set_column(c, &se.eigenvectors.column(i).into_owned());
    }
    out
}

/// Maximize Re φ(T) over the joining spectrahedron. Returns the achieved
/// maximum and the maximizing state. A value exceeding the relatively
/// independent baseline certifies the existence of a non-product joining;
/// failure to exceed it is only "no violation found".
pub fn disjointness_probe(
    p: &JoiningProblem,
    t_obs: &Element,
) -> Result<(f64, JoiningState)> {
    let amb = &p.amb;
    let tol = amb.algebra.tol;
    let sa = amb
        .algebra
        .hs_norm(&(t_obs - &t_obs.adjoint()))?;
    if sa > tol.verify * 100.0 {
        return Err(Error::NotSelfAdjoint(sa));
    }
    // Objective in hermitian coordinates.
    let nh = amb.herm.len();
    let mut c = RVec::zeros(nh);
    for (k, h) in amb.herm.iter().enumerate() {
        c[k] = amb.algebra.trace(&(h * t_obs))?.re;
    }
    let baseline = c.dot(&p.rel_t);
    // Locate the support of the feasible face: project perturbed seeds and
    // average.
    let null0 = real_nullspace(&p.a_mat, &tol);
    if null0.ncols() == 0 {
        let rho = amb.from_real(&p.rel_t);
        return Ok((baseline, JoiningState { rho, t: p.rel_t.clone() }));
    }
    let mut center = p.rel_t.clone();
    let mut count = 1.0;
    for k in 0..null0.ncols() {
        for sign in [1.0f64, -1.0] {
            let seed = &p.rel_t + null0.column(k) * (0.25 * sign);
            if let Feasibility::Feasible(st) = dykstra_from(p, &seed)? {
                center += &st.t;
                count += 1.0;
            }
        }
    }
    center.unscale_mut(count);
    // Support projections per block.
    let rho_c = clip_psd(&amb.from_real(&center))?;
    let mut ranges: Vec<CMat> = Vec::new();
    for blk in &rho_c.blocks {
        ranges.push(linalg::orthonormal_colspan(blk, &tol)?);
    }
    // Extend the affine system with support constraints so every direction
    // keeps ρ inside the face.
    let mut srows: Vec<RVec> = Vec::new();
    {
        // For each block, entries of (1−P)ρ and ρ(1−P) must vanish; it
        // suffices to kill (1−P)ρ(1−P), (1−P)ρP and Pρ(1−P); since ρ is
        // self-adjoint, killing (1−P)ρ is enough.
        for (b, r) in ranges.iter().enumerate() {
            let n = amb.algebra.blocks[b];
            let pr = r * r.adjoint();
            let q = CMat::identity(n, n) - pr;
            if q.norm() < tol.rank_abs {
                continue;
            }
            for row in 0..n {
                for col in 0..n {
                    let mut re = RVec::zeros(nh);
                    let mut im = RVec::zeros(nh);
                    for (k, h) in amb.herm.iter().enumerate() {
                        let v = (&q * &h.blocks[b])[(row, col)];
                        re[k] = v.re;
                        im[k] = v.im;
                    }
                    if re.norm() > tol.rank_abs {
                        srows.push(re);
                    }
                    if im.norm() > tol.rank_abs {
                        srows.push(im);
                    }
                }
            }
        }
    }
    let mut a_ext = RMat::zeros(p.a_mat.nrows() + srows.len(), nh);
    a_ext
        .view_mut((0, 0), (p.a_mat.nrows(), nh))
        .copy_from(&p.a_mat);
    for (r, row) in srows.iter().enumerate() {
        a_ext.set_row(p.a_mat.nrows() + r, &row.transpose());
    }
    let null = real_nullspace(&a_ext, &tol);
    let np = null.ncols();
    if np == 0 {
        let rho = amb.from_real(&center);
        let val = c.dot(&center);
        return Ok((val.max(baseline), JoiningState { rho, t: center }));
    }
    // Compressed direction matrices per block.
    let dir_elem: Vec<Element> = (0..np)
        .map(|k| amb.from_real(&null.column(k).into_owned()))
        .collect();
    let compress = |x: &Element| -> Vec<CMat> {
        ranges
            .iter()
            .enumerate()
            .map(|(b, r)| r.adjoint() * &x.blocks[b] * r)
            .collect()
    };
    let base = compress(&clip_psd(&amb.from_real(&center))?);
    let dirs: Vec<Vec<CMat>> = dir_elem.iter().map(compress).collect();
    let cz = null.transpose() * &c;
    // Barrier path following: minimize −cᵀs − μ Σ logdet(base + Σ s_k dirs).
    let mut s = RVec::zeros(np);
    let mut mu = 1.0f64;
    let eval = |s: &RVec, mu: f64| -> Option<(f64, RVec, RMat)> {
        let mut rho_b: Vec<CMat> = base.clone();
        for (k, d) in dirs.iter().enumerate() {
            for (b, m) in d.iter().enumerate() {
                rho_b[b] += m.map(|x| x * C64::new(s[k], 0.0));
            }
        }
        let mut logdet = 0.0;
        let mut invs: Vec<CMat> = Vec::new();
        for m in &rho_b {
            if m.nrows() == 0 {
                invs.push(m.clone());
                continue;
            }
            let (vals, vecs) = linalg::hermitian_eig(m).ok()?;
            if vals.iter().any(|&v| v <= 0.0) {
                return None;
            }
            logdet += vals.iter().map(|v| v.ln()).sum::<f64>();
            let n = m.nrows();
            let mut dinv = CMat::zeros(n, n);
            for (i, &v) in vals.iter().enumerate() {
                dinv[(i, i)] = C64::new(1.0 / v, 0.0);
            }
            invs.push(&vecs * dinv * vecs.adjoint());
        }
        let f = -cz.dot(s) - mu * logdet;
        let mut g = RVec::zeros(np);
        let mut h = RMat::zeros(np, np);
        for k in 0..np {
            let mut tr = 0.0;
            for (b, inv) in invs.iter().enumerate() {
                tr += (inv * &dirs[k][b]).trace().re;
            }
            g[k] = -cz[k] - mu * tr;
            for l in k..np {
                let mut tr2 = 0.0;
                for (b, inv) in invs.iter().enumerate() {
                    tr2 += (inv * &dirs[k][b] * inv * &dirs[l][b]).trace().re;
                }
                h[(k, l)] = mu * tr2;
                h[(l, k)] = mu * tr2;
            }
        }
        Some((f, g, h))
    };
    if eval(&s, mu).is_none() {
        // The averaged center is on the boundary of its own face; nudge
        // towards strict interior by a tiny ridge.
        return Err(Error::NumericalFailure(
            "no strictly positive point found on the feasible face".into(),
        ));
    }
    while mu > 1e-13 {
        for _ in 0..20 {
            let (f0, g, h) = eval(&s, mu).ok_or_else(|| {
                Error::NumericalFailure("barrier iterate left the cone".into())
            })?;
            let hreg = &h + RMat::identity(np, np) * (1e-12 * (1.0 + h.norm()));
            let step = hreg
                .clone()
                .lu()
                .solve(&(-&g))
                .ok_or_else(|| Error::NumericalFailure("newton solve failed".into()))?;
            let mut alpha = 1.0f64;
            let mut accepted = false;
            for _ in 0..60 {
                let cand = &s + &step * alpha;
                if let Some((f1, _, _)) = eval(&cand, mu) {
                    if f1 <= f0 - 1e-4 * alpha * g.dot(&(-&step)).abs() || f1 < f0 {
                        s = cand;
                        accepted = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            if !accepted || step.norm() * alpha < 1e-14 {
                break;
            }
        }
        mu *= 0.2;
    }
    let t_final = &center + &null * &s;
    let val = c.dot(&t_final);
    let res = p.infeasibility(&t_final)?;
    if res > tol.report * 10.0 {
        return Err(Error::NumericalFailure(format!(
            "optimizer left the feasible set (residual {res:.3e})"
        )));
    }
    let rho = amb.from_real(&t_final);
    Ok((val.max(baseline), JoiningState { rho, t: t_final }))
}

fn dykstra_from(p: &JoiningProblem, seed: &RVec) -> Result<Feasibility> {
    let amb = &p.amb;
    let tol = amb.algebra.tol;
    let a_pinv = real_pinv(&p.a_mat, &tol);
    let mut x = seed.clone();
    let mut corr = RVec::zeros(x.len());
    for _ in 0..5000 {
        let y = x.clone() - &a_pinv * (&p.a_mat * &x - &p.b_vec);
        let z = amb.to_real(&clip_psd(&amb.from_real(&(&y + &corr)))?)?;
        corr = &y + &corr - &z;
        let moved = (&z - &x).norm();
        x = z;
        if moved < 1e-13 && (&p.a_mat * &x - &p.b_vec).norm() <= tol.report {
            break;
        }
    }
    if (&p.a_mat * &x - &p.b_vec).norm() <= tol.report {
        let rho = amb.from_real(&x);
        Ok(Feasibility::Feasible(JoiningState { rho, t: x }))
    } else {
        Ok(Feasibility::Infeasible {
            residual: (&p.a_mat * &x - &p.b_vec).norm(),
            iterations: 5000,
        })
    }
}

/// The completely positive map Φ: M → N with τ_N(Φ(x) y) = φ(x ⊗ y^op),
/// together with its L² matrix. Verifies unitality, restriction to the
/// identity on Q, complete positivity (Choi blocks), and Koopman
/// intertwining.
pub struct CpMap {
    /// Matrix L²(M) → L²(N).
    pub matrix: CMat,
}

impl CpMap {
    pub fn apply(&self, m_alg: &Algebra, n_alg: &Algebra, x: &Element) -> Element {
        n_alg.from_l2(&(&self.matrix * m_alg.to_l2(x)))
    }
}

pub fn cp_from_joining(p: &JoiningProblem, state: &JoiningState) -> Result<CpMap> {
    let ma = &p.m.algebra;
    let na = &p.n.algebra;
    let tol = ma.tol;
    let stdn = na.standard_basis();
    let phi_of = |x: &Element| -> Result<Element> {
        let mut w = na.zero();
        for v in &stdn {
            let c = p.eval(state, x, v)?;
            w = &w + &v.adjoint().scale(c);
        }
        Ok(w)
    };
    let dm = ma.dim_l2();
    let dn = na.dim_l2();
    let stdm = ma.standard_basis();
    let mut matrix = CMat::zeros(dn, dm);
    for (c, u) in stdm.iter().enumerate() {
        matrix.set_column(c, &na.to_l2(&phi_of(u)?));
    }
    let cp = CpMap { matrix };
    // Unitality and Q-restriction.
    let one = cp.apply(ma, na, &ma.one());
    if na.hs_norm(&(&one - &na.one()))? > tol.report {
        return Err(Error::CpViolation(na.hs_norm(&(&one - &na.one()))?));
    }
    for (q, im) in p.m.q.basis.iter().zip(&p.ident) {
        let got = cp.apply(ma, na, q);
        if na.hs_norm(&(&got - im))? > tol.report * 10.0 {
            return Err(Error::CpViolation(na.hs_norm(&(&got - im))?));
        }
    }
    // Complete positivity: Choi matrix per block pair.
    for (bi, &mi) in ma.blocks.iter().enumerate() {
        let mut images = vec![vec![na.zero(); mi]; mi];
        for pp in 0..mi {
            for qq in 0..mi {
                images[pp][qq] = cp.apply(ma, na, &ma.matrix_unit(bi, pp, qq));
            }
        }
        for (bj, &nj) in na.blocks.iter().enumerate() {
            let dim = mi * nj;
            let mut choi = CMat::zeros(dim, dim);
            for pp in 0..mi {
                for rr in 0..mi {
                    let blk = &images[pp][rr].blocks[bj];
                    for qq in 0..nj {
                        for ss in 0..nj {
                            choi[(pp * nj + qq, rr * nj + ss)] = blk[(qq, ss)];
                        }
                    }
                }
            }
            let (vals, _) = linalg::hermitian_eig(&choi)?;
            if let Some(&min) = vals.first() {
                if min < -tol.report {
                    return Err(Error::CpViolation(min));
                }
            }
        }
    }
    // Koopman intertwining.
    for (km, kn) in p.m.koopman.iter().zip(&p.n.koopman) {
        let res = (&cp.matrix * km - kn * &cp.matrix).norm();
        if res > tol.report * 100.0 {
            return Err(Error::CpViolation(res));
        }
    }
    Ok(cp)
}
