//! Realize a concretely represented finite-dimensional von Neumann algebra
//! S ⊆ B(ℂ^D), equipped with a faithful tracial state ω(T) = tr(ρT), as a
//! direct sum of matrix blocks: find the minimal central projections, split
//! each factor into minimal projections, build matrix units from polar
//! decompositions of generic elements, and read off the block coordinates.

use num_complex::Complex64 as C64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::algebra::{Algebra, Element};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::tol::ToleranceProfile;

/// A block realization of an operator algebra: the abstract [`Algebra`]
/// together with the lifted matrix units that identify it with the
/// represented algebra.
#[derive(Debug, Clone)]
pub struct Realization {
    pub algebra: Algebra,
    /// units[b][i][j] is the lift of the matrix unit e_{ij} of block b.
    pub units: Vec<Vec<Vec<CMat>>>,
    /// Minimal central projections, one per block.
    pub central: Vec<CMat>,
    rho: CMat,
}

fn frob_inner(a: &CMat, b: &CMat) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

fn omega(rho: &CMat, t: &CMat) -> C64 {
    (rho * t).trace()
}

impl Realization {
    /// Coordinates of a represented operator in the block algebra.
    pub fn to_block(&self, t: &CMat) -> Element {
        let mut e = self.algebra.zero();
        for (b, block_units) in self.units.iter().enumerate() {
            let n = self.algebra.blocks[b];
            let scale = n as f64 / self.algebra.weights[b];
            for i in 0..n {
                for j in 0..n {
                    let c = omega(&self.rho, &(&block_units[j][i] * t));
                    e.blocks[b][(i, j)] = c * C64::new(scale, 0.0);
                }
            }
        }
        e
    }

    /// Lift block coordinates back to the represented operator.
    pub fn from_block(&self, e: &Element) -> CMat {
        let d = self.rho.nrows();
        let mut t = CMat::zeros(d, d);
        for (b, block_units) in self.units.iter().enumerate() {
            let n = self.algebra.blocks[b];
            for i in 0..n {
                for j in 0..n {
                    t += block_units[i][j].map(|x| x * e.blocks[b][(i, j)]);
                }
            }
        }
        t
    }
}

/// Decompose the von Neumann algebra spanned by `span` (a *-closed,
/// multiplicatively closed, unital subspace of D×D matrices) under the
/// faithful tracial state ω(T) = tr(ρT).
pub fn algebraize(span: &[CMat], rho: &CMat, tol: &ToleranceProfile) -> Result<Realization> {
    let d = rho.nrows();
    if span.is_empty() {
        return Err(Error::NotAnAlgebra("empty spanning set".into()));
    }
    // Orthonormalize (Frobenius) and verify closure.
    let mut m = CMat::zeros(d * d, span.len());
    for (c, t) in span.iter().enumerate() {
        if t.nrows() != d || t.ncols() != d {
            return Err(Error::Shape("spanning operator has wrong size".into()));
        }
        m.set_column(c, &linalg::vec_of(t));
    }
    let onb_m = linalg::orthonormal_colspan(&m, tol)?;
    let onb: Vec<CMat> = (0..onb_m.ncols())
        .map(|c| linalg::mat_of(&onb_m.column(c).into_owned(), d, d))
        .collect();
    let in_span = |t: &CMat| -> f64 {
        let mut proj = CMat::zeros(d, d);
        for b in &onb {
            let c = frob_inner(b, t);
            proj += b.map(|x| x * c);
        }
        (t - proj).norm()
    };
    let closure_tol = tol.verify * 100.0;
    let id = CMat::identity(d, d);
    if in_span(&id) > closure_tol {
        return Err(Error::NotAnAlgebra("unit not in span".into()));
    }
    for x in &onb {
        if in_span(&x.adjoint()) > closure_tol {
            return Err(Error::NotAnAlgebra("span not *-closed".into()));
        }
        for y in &onb {
            if in_span(&(x * y)) > closure_tol * (1.0 + x.norm() * y.norm()) {
                return Err(Error::NotAnAlgebra("span not multiplicatively closed".into()));
            }
        }
    }
    // Center: elements of the span commuting with every basis operator.
    let mm = onb.len();
    let mut comm_maps = Vec::new();
    for b in &onb {
        for op in [b.clone(), b.adjoint()] {
            let mut map = CMat::zeros(d * d, mm);
            for (k, bk) in onb.iter().enumerate() {
                map.set_column(k, &linalg::vec_of(&(&op * bk - bk * &op)));
            }
            comm_maps.push(map);
        }
    }
    let center_coords = linalg::joint_nullspace(&comm_maps, mm, tol)?;
    let center: Vec<CMat> = (0..center_coords.ncols())
        .map(|c| {
            let mut t = CMat::zeros(d, d);
            for (k, bk) in onb.iter().enumerate() {
                t += bk.map(|x| x * center_coords[(k, c)]);
            }
            t
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0x57ED);
    let centrals = minimal_projections_of_commutative(&center, center.len(), &mut rng, tol)?;
    // Per factor: minimal projections, matrix units, weights.
    let mut blocks = Vec::new();
    let mut weights = Vec::new();
    let mut units: Vec<Vec<Vec<CMat>>> = Vec::new();
    for z in &centrals {
        let range = linalg::orthonormal_colspan(z, tol)?;
        let r = range.ncols();
        let compress = |t: &CMat| range.adjoint() * t * &range;
        let comp_onb: Vec<CMat> = {
            let mut cm = CMat::zeros(r * r, onb.len());
            for (c, b) in onb.iter().enumerate() {
                cm.set_column(c, &linalg::vec_of(&compress(b)));
            }
            let o = linalg::orthonormal_colspan(&cm, tol)?;
            (0..o.ncols())
                .map(|c| linalg::mat_of(&o.column(c).into_owned(), r, r))
                .collect()
        };
        let qs = factor_minimal_projections(&comp_onb, r, &mut rng, tol)?;
        let n = qs.len();
        if r % n != 0 {
            return Err(Error::NumericalFailure(format!(
                "factor range {r} not divisible by {n} minimal projections"
            )));
        }
        // Partial isometries v_i with v_i v_i† = q_i, v_i† v_i = q_1.
        let mut vs: Vec<CMat> = vec![qs[0].clone()];
        'outer: for q in qs.iter().skip(1) {
            for _ in 0..16 {
                let y = random_in_span(&comp_onb, &mut rng);
                let x = q * &y * &qs[0];
                if let Some(v) = polar_part(&x, tol) {
                    let ok1 = (&v * v.adjoint() - q).norm() < 1e-7;
                    let ok2 = (v.adjoint() * &v - &qs[0]).norm() < 1e-7;
                    if ok1 && ok2 {
                        vs.push(v);
                        continue 'outer;
                    }
                }
            }
            return Err(Error::NumericalFailure(
                "failed to build partial isometries between minimal projections".into(),
            ));
        }
        let mut block_units = vec![vec![CMat::zeros(d, d); n]; n];
        for i in 0..n {
            for j in 0..n {
                let e = &vs[i] * vs[j].adjoint();
                block_units[i][j] = &range * e * range.adjoint();
            }
        }
        let w = omega(rho, z).re;
        if w <= tol.rank_abs {
            return Err(Error::Mass(format!(
                "state not faithful: central projection has mass {w:.3e}"
            )));
        }
        blocks.push(n);
        weights.push(w);
        units.push(block_units);
    }
    let wsum: f64 = weights.iter().sum();
    if (wsum - 1.0).abs() > tol.report {
        return Err(Error::WeightSum(wsum));
    }
    for w in weights.iter_mut() {
        *w /= wsum;
    }
    let algebra = Algebra::new(blocks, weights, *tol)?;
    let real = Realization {
        algebra,
        units,
        central: centrals,
        rho: rho.clone(),
    };
    verify_realization(&real, &onb, tol)?;
    Ok(real)
}

fn verify_realization(real: &Realization, onb: &[CMat], tol: &ToleranceProfile) -> Result<()> {
    let a = &real.algebra;
    let check = tol.report;
    for x in onb {
        let bx = real.to_block(x);
        let back = real.from_block(&bx);
        if (x - &back).norm() > check * (1.0 + x.norm()) {
            return Err(Error::NumericalFailure(
                "block coordinates do not invert".into(),
            ));
        }
        let tr = (omega(&real.rho, x) - a.trace(&bx)?).norm();
        if tr > check * (1.0 + x.norm()) {
            return Err(Error::NumericalFailure(
                "block trace does not match the state".into(),
            ));
        }
        let star = a.hs_norm(&(&real.to_block(&x.adjoint()) - &bx.adjoint()))?;
        if star > check * (1.0 + x.norm()) {
            return Err(Error::NumericalFailure(
                "block coordinates not *-compatible".into(),
            ));
        }
        for y in onb.iter().take(4) {
            let prod = real.to_block(&(x * y));
            let sep = &real.to_block(x) * &real.to_block(y);
            if a.hs_norm(&(&prod - &sep))? > check * 10.0 * (1.0 + x.norm() * y.norm()) {
                return Err(Error::NumericalFailure(
                    "block coordinates not multiplicative".into(),
                ));
            }
        }
    }
    Ok(())
}

fn random_in_span(onb: &[CMat], rng: &mut impl Rng) -> CMat {
    let mut t = CMat::zeros(onb[0].nrows(), onb[0].ncols());
    for b in onb {
        let c = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        t += b.map(|x| x * c);
    }
    t
}

fn random_self_adjoint_in_span(onb: &[CMat], rng: &mut impl Rng) -> CMat {
    let t = random_in_span(onb, rng);
    (&t + t.adjoint()).scale(0.5)
}

/// Polar part of x via SVD, keeping singular values above the cutoff.
fn polar_part(x: &CMat, tol: &ToleranceProfile) -> Option<CMat> {
    let svd = x.clone().svd(true, true);
    let u = svd.u.as_ref()?;
    let vt = svd.v_t.as_ref()?;
    let smax = svd.singular_values.max();
    if smax <= tol.rank_abs {
        return None;
    }
    let cut = tol.rank_cutoff(smax).max(1e-8 * smax);
    let k = svd.singular_values.len();
    let mut sel = CMat::zeros(k, k);
    for i in 0..k {
        if svd.singular_values[i] > cut {
            sel[(i, i)] = linalg::cone();
        }
    }
    Some(u * sel * vt)
}

/// Split eigenvalues into clusters and return the corresponding spectral
/// projections.
fn spectral_clusters(h: &CMat, tol: &ToleranceProfile) -> Result<Vec<CMat>> {
    let (vals, vecs) = linalg::hermitian_eig(h)?;
    let n = vals.len();
    let scale = vals.iter().fold(1.0f64, |a, &b| a.max(b.abs()));
    let gap = (1e-6 * scale).max(tol.rank_abs);
    let mut projections = Vec::new();
    let mut start = 0;
    for i in 1..=n {
        if i == n || vals[i] - vals[i - 1] > gap {
            let mut p = CMat::zeros(n, n);
            for c in start..i {
                let v = vecs.column(c);
                p += &v * v.adjoint();
            }
            projections.push(p);
            start = i;
        }
    }
    Ok(projections)
}

/// Minimal projections of a commutative algebra given by a spanning set.
fn minimal_projections_of_commutative(
    span: &[CMat],
    expected: usize,
    rng: &mut impl Rng,
    tol: &ToleranceProfile,
) -> Result<Vec<CMat>> {
    for _ in 0..16 {
        let h = random_self_adjoint_in_span(span, rng);
        let ps = spectral_clusters(&h, tol)?;
        if ps.len() == expected {
            return Ok(ps);
        }
    }
    Err(Error::NumericalFailure(
        "failed to separate the central spectrum".into(),
    ))
}

/// Minimal projections of a represented factor given by a Frobenius
/// orthonormal basis of operators on the compressed range.
fn factor_minimal_projections(
    onb: &[CMat],
    r: usize,
    rng: &mut impl Rng,
    tol: &ToleranceProfile,
) -> Result<Vec<CMat>> {
    // A factor M_n represented with multiplicity m on ℂ^{nm} has operator
    // dimension n²; a generic self-adjoint element has n distinct
    // eigenvalues, each eigenprojection of rank m.
    let n2 = onb.len();
    let n = (n2 as f64).sqrt().round() as usize;
    if n * n != n2 {
        return Err(Error::NotAnAlgebra(format!(
            "factor has operator dimension {n2}, not a square"
        )));
    }
    'tries: for _ in 0..16 {
        let h = random_self_adjoint_in_span(onb, rng);
        let ps = spectral_clusters(&h, tol)?;
        if ps.len() != n {
            continue;
        }
        for p in &ps {
            // Minimality: the compression p S p must be one-dimensional.
            let mut cm = CMat::zeros(r * r, onb.len());
            for (c, b) in onb.iter().enumerate() {
                cm.set_column(c, &linalg::vec_of(&(p * b * p)));
            }
            let rank = linalg::orthonormal_colspan(&cm, tol)?.ncols();
            if rank != 1 {
                continue 'tries;
            }
        }
        return Ok(ps);
    }
    Err(Error::NumericalFailure(
        "failed to split a factor into minimal projections".into(),
    ))
}
