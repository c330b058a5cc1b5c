//! Built-in example systems used by tests, the self-test command, and the
//! documentation: two- and four-point rotation systems, the clock-and-shift
//! action on 2×2 matrices, and a trivial action.

use num_complex::Complex64 as C64;

use crate::algebra::{Algebra, Element};
use crate::dynamics::{make_system, DynamicalSystem, GenMap, GroupSpec};
use crate::error::Result;
use crate::linalg::{self, CMat};
use crate::subalgebra::{generate_subalgebra, scalar_subalgebra};
use crate::tol::ToleranceProfile;

/// The commutative algebra of `n` uniform points.
pub fn uniform_points(n: usize) -> Result<Algebra> {
    Algebra::new(vec![1; n], vec![1.0 / n as f64; n], ToleranceProfile::default())
}

/// Koopman matrix of the cyclic rotation i ↦ i+1 on a uniform point
/// algebra.
pub fn cyclic_rotation_koopman(a: &Algebra) -> CMat {
    let n = a.blocks.len();
    let mut m = CMat::zeros(n, n);
    for i in 0..n {
        m[((i + 1) % n, i)] = linalg::cone();
    }
    m
}

/// The sign function (1, -1, 1, -1, …) on a uniform point algebra.
pub fn sign_function(a: &Algebra) -> Element {
    let mut f = a.zero();
    for (i, b) in f.blocks.iter_mut().enumerate() {
        b[(0, 0)] = C64::new(if i % 2 == 0 { 1.0 } else { -1.0 }, 0.0);
    }
    f
}

/// Two uniform points with the swap action of ℤ₂ over the scalars.
pub fn sys_a() -> Result<DynamicalSystem> {
    let a = uniform_points(2)?;
    let q = scalar_subalgebra(&a)?;
    let mut swap = CMat::zeros(2, 2);
    swap[(0, 1)] = linalg::cone();
    swap[(1, 0)] = linalg::cone();
    make_system(
        &a,
        GroupSpec::FiniteAbelian { orders: vec![2] },
        &[GenMap::Linear(swap)],
        &q,
    )
}

/// Generator maps of the clock-and-shift ℤ₂×ℤ₂ action on M₂.
pub fn sys_b_gen_maps() -> Vec<GenMap> {
    let tol = ToleranceProfile::default();
    let a = Algebra::new(vec![2], vec![1.0], tol).unwrap();
    let mut clock = a.zero();
    clock.blocks[0][(0, 0)] = C64::new(1.0, 0.0);
    clock.blocks[0][(1, 1)] = C64::new(-1.0, 0.0);
    let mut shift = a.zero();
    shift.blocks[0][(0, 1)] = C64::new(1.0, 0.0);
    shift.blocks[0][(1, 0)] = C64::new(1.0, 0.0);
    vec![GenMap::AdUnitary(clock), GenMap::AdUnitary(shift)]
}

/// M₂ with the ergodic clock-and-shift action of ℤ₂×ℤ₂ over the scalars.
pub fn sys_b() -> Result<DynamicalSystem> {
    let a = Algebra::new(vec![2], vec![1.0], ToleranceProfile::default())?;
    let q = scalar_subalgebra(&a)?;
    make_system(
        &a,
        GroupSpec::FiniteAbelian { orders: vec![2, 2] },
        &sys_b_gen_maps(),
        &q,
    )
}

/// Four uniform points with the ℤ₄ rotation, over the invariant 2-set
/// partition {0,2} / {1,3}.
pub fn sys_c() -> Result<DynamicalSystem> {
    let a = uniform_points(4)?;
    let q = generate_subalgebra(&a, &[&a.block_unit(0) + &a.block_unit(2)])?;
    make_system(
        &a,
        GroupSpec::FiniteAbelian { orders: vec![4] },
        &[GenMap::Linear(cyclic_rotation_koopman(&a))],
        &q,
    )
}

/// M₂ with the trivial group action over the scalars.
pub fn sys_d() -> Result<DynamicalSystem> {
    let a = Algebra::new(vec![2], vec![1.0], ToleranceProfile::default())?;
    let q = scalar_subalgebra(&a)?;
    make_system(
        &a,
        GroupSpec::FiniteAbelian { orders: vec![1] },
        &[GenMap::AdUnitary(a.one())],
        &q,
    )
}

/// ℤ_n acting by rotation on n uniform points over the scalars.
pub fn rotation_system(n: usize) -> Result<DynamicalSystem> {
    let a = uniform_points(n)?;
    let q = scalar_subalgebra(&a)?;
    make_system(
        &a,
        GroupSpec::FiniteAbelian { orders: vec![n] },
        &[GenMap::Linear(cyclic_rotation_koopman(&a))],
        &q,
    )
}

/// Look up a built-in system by name (`sys-a` … `sys-d`, `z2` … `z8`).
pub fn by_name(name: &str) -> Result<DynamicalSystem> {
    match name.to_ascii_lowercase().as_str() {
        "sys-a" => sys_a(),
        "sys-b" => sys_b(),
        "sys-c" => sys_c(),
        "sys-d" => sys_d(),
        other => {
            if let Some(n) = other.strip_prefix('z').and_then(|s| s.parse::<usize>().ok()) {
                if (2..=8).contains(&n) {
                    return rotation_system(n);
                }
            }
            Err(crate::error::Error::Argument(format!(
                "unknown built-in system '{name}'"
            )))
        }
    }
}

/// Brute-force k-th uniformity average of a function on ℤ_n: enumerate all
/// cubes x + ε·h with alternating adjoints and take the 2^k-th root of the
/// mean. Used as an independent oracle for the cubic-tower seminorms.
pub fn gowers_uk(f: &[C64], k: usize) -> f64 {
    let n = f.len();
    let cubes = 1usize << k;
    let mut total = C64::new(0.0, 0.0);
    let mut h = vec![0usize; k];
    // Iterate over all (x, h_1..h_k) ∈ ℤ_n^{k+1}.
    let mut count = 0usize;
    loop {
        for x in 0..n {
            let mut term = C64::new(1.0, 0.0);
            for eps in 0..cubes {
                let mut pt = x;
                let mut parity = 0u32;
                for (j, &hj) in h.iter().enumerate() {
                    if (eps >> j) & 1 == 1 {
                        pt = (pt + hj) % n;
                        parity += 1;
                    }
                }
                let v = f[pt];
                term *= if parity % 2 == 1 { v.conj() } else { v };
            }
            total += term;
            count += 1;
        }
        // Odometer over the h-vector.
        let mut j = 0;
        loop {
            if j == k {
                let mean = total / C64::new(count as f64, 0.0);
                return mean.re.max(0.0).powf(1.0 / cubes as f64);
            }
            h[j] += 1;
            if h[j] < n {
                break;
            }
            h[j] = 0;
            j += 1;
        }
    }
}
