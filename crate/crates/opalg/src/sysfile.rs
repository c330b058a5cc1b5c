//! JSON descriptions of dynamical systems: a small schema with explicit
//! `[re, im]` complex entries that parses into a fully verified
//! [`DynamicalSystem`]. Fixture files for the built-in systems ship with the
//! crate and are validated by the test suite.

use serde::Deserialize;

use crate::algebra::{Algebra, Element};
use crate::dynamics::{make_system, DynamicalSystem, GenMap, GroupSpec};
use crate::error::{Error, Result};
use num_complex::Complex64 as C64;

use crate::linalg::CMat;
use crate::subalgebra::{generate_subalgebra, scalar_subalgebra};
use crate::tol::ToleranceProfile;

/// A complex scalar as an explicit `[re, im]` pair.
pub type ComplexLit = [f64; 2];
/// A complex matrix as rows of `[re, im]` pairs.
pub type MatrixLit = Vec<Vec<ComplexLit>>;
/// An algebra element: one matrix literal per block.
pub type ElementLit = Vec<MatrixLit>;

/// Top-level system description. `schema_version` must be 1.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    pub schema_version: u32,
    pub algebra: AlgebraSection,
    pub group: GroupSection,
    pub generators: Vec<GeneratorSection>,
    /// Distinguished invariant subalgebra; omitted means the scalars.
    #[serde(default)]
    pub subalgebra: Option<SubalgebraSection>,
    #[serde(default)]
    pub tolerances: Option<ToleranceProfile>,
}

/// Block sizes and trace weights of the algebra.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraSection {
    pub blocks: Vec<usize>,
    pub weights: Vec<f64>,
}

/// Acting group: `finite-abelian` (cyclic `orders`), `free-abelian`
/// (`rank`), or `presented` (`generators` plus relator words of signed
/// 1-based indices).
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSection {
    pub kind: String,
    #[serde(default)]
    pub orders: Option<Vec<usize>>,
    #[serde(default)]
    pub rank: Option<usize>,
    #[serde(default)]
    pub generators: Option<usize>,
    #[serde(default)]
    pub relations: Option<Vec<Vec<i64>>>,
}

/// One group generator, acting either by conjugation with a `unitary`
/// element of the algebra or as an explicit `matrix` on L²(N).
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSection {
    pub label: String,
    #[serde(default)]
    pub unitary: Option<ElementLit>,
    #[serde(default)]
    pub matrix: Option<MatrixLit>,
}

/// Generating elements of the distinguished subalgebra.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubalgebraSection {
    pub generators: Vec<ElementLit>,
}

fn complex(lit: ComplexLit) -> C64 {
    C64::new(lit[0], lit[1])
}

fn matrix_from_lit(lit: &MatrixLit, rows: usize, cols: usize, what: &str) -> Result<CMat> {
    if lit.len() != rows || lit.iter().any(|r| r.len() != cols) {
        return Err(Error::Parse(format!(
            "{what}: expected a {rows}×{cols} matrix, got {}×{}",
            lit.len(),
            lit.first().map_or(0, |r| r.len())
        )));
    }
    let mut m = CMat::zeros(rows, cols);
    for (i, row) in lit.iter().enumerate() {
        for (j, &e) in row.iter().enumerate() {
            m[(i, j)] = complex(e);
        }
    }
    Ok(m)
}

/// Convert an element literal into an element of `a`, checking block shapes.
pub fn element_from_lit(a: &Algebra, lit: &ElementLit, what: &str) -> Result<Element> {
    if lit.len() != a.blocks.len() {
        return Err(Error::Parse(format!(
            "{what}: expected {} blocks, got {}",
            a.blocks.len(),
            lit.len()
        )));
    }
    let mut blocks = Vec::with_capacity(lit.len());
    for (b, (m, &n)) in lit.iter().zip(a.blocks.iter()).enumerate() {
        blocks.push(matrix_from_lit(m, n, n, &format!("{what} block {b}"))?);
    }
    Ok(Element { blocks })
}

fn group_from_section(g: &GroupSection) -> Result<GroupSpec> {
    match g.kind.as_str() {
        "finite-abelian" => {
            let orders = g
                .orders
                .clone()
                .ok_or_else(|| Error::Parse("group: finite-abelian requires 'orders'".into()))?;
            if orders.iter().any(|&o| o == 0) {
                return Err(Error::Parse("group: cyclic orders must be positive".into()));
            }
            Ok(GroupSpec::FiniteAbelian { orders })
        }
        "free-abelian" => {
            let rank = g
                .rank
                .ok_or_else(|| Error::Parse("group: free-abelian requires 'rank'".into()))?;
            Ok(GroupSpec::FreeAbelian { rank })
        }
        "presented" => {
            let generators = g
                .generators
                .ok_or_else(|| Error::Parse("group: presented requires 'generators'".into()))?;
            Ok(GroupSpec::Presented {
                generators,
                relations: g.relations.clone().unwrap_or_default(),
            })
        }
        other => Err(Error::Parse(format!("group: unknown kind '{other}'"))),
    }
}

/// Build and verify the system described by an already-parsed file.
pub fn build_system(sf: &SystemFile) -> Result<DynamicalSystem> {
    if sf.schema_version != 1 {
        return Err(Error::Parse(format!(
            "unsupported schema_version {} (expected 1)",
            sf.schema_version
        )));
    }
    let tol = sf.tolerances.unwrap_or_default();
    let a = Algebra::new(sf.algebra.blocks.clone(), sf.algebra.weights.clone(), tol)?;
    let group = group_from_section(&sf.group)?;
    let d = a.dim_l2();
    let mut gen_maps = Vec::with_capacity(sf.generators.len());
    for g in &sf.generators {
        let map = match (&g.unitary, &g.matrix) {
            (Some(u), None) => GenMap::AdUnitary(element_from_lit(
                &a,
                u,
                &format!("generator '{}'", g.label),
            )?),
            (None, Some(m)) => GenMap::Linear(matrix_from_lit(
                m,
                d,
                d,
                &format!("generator '{}'", g.label),
            )?),
            _ => {
                return Err(Error::Parse(format!(
                    "generator '{}': exactly one of 'unitary' or 'matrix' required",
                    g.label
                )))
            }
        };
        gen_maps.push(map);
    }
    let q = match &sf.subalgebra {
        None => scalar_subalgebra(&a)?,
        Some(s) => {
            let gens = s
                .generators
                .iter()
                .enumerate()
                .map(|(i, lit)| element_from_lit(&a, lit, &format!("subalgebra generator {i}")))
                .collect::<Result<Vec<_>>>()?;
            if gens.is_empty() {
                scalar_subalgebra(&a)?
            } else {
                generate_subalgebra(&a, &gens)?
            }
        }
    };
    make_system(&a, group, &gen_maps, &q)
}

/// Parse a JSON system description from text.
pub fn parse_system_text(text: &str) -> Result<DynamicalSystem> {
    let sf: SystemFile =
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    build_system(&sf)
}

/// Parse a JSON system description from a file.
pub fn parse_system_file(path: &std::path::Path) -> Result<DynamicalSystem> {
    let text = std::fs::read_to_string(path)?;
    parse_system_text(&text)
}

/// Resolve a `--system` argument: a built-in fixture name, otherwise a path
/// to a JSON description.
pub fn resolve_system(arg: &str) -> Result<DynamicalSystem> {
    match crate::fixtures::by_name(arg) {
        Ok(s) => Ok(s),
        Err(_) if std::path::Path::new(arg).exists() => {
            parse_system_file(std::path::Path::new(arg))
        }
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn fixture_text(name: &str) -> String {
        let path = format!("{}/fixtures/{name}.json", env!("CARGO_MANIFEST_DIR"));
        std::fs::read_to_string(path).unwrap()
    }

    #[test]
    fn shipped_fixture_files_match_the_builtins() {
        for name in ["sys-a", "sys-b", "sys-c", "sys-d"] {
            let parsed = parse_system_text(&fixture_text(name)).unwrap();
            let builtin = fixtures::by_name(name).unwrap();
            assert_eq!(parsed.algebra.blocks, builtin.algebra.blocks, "{name}");
            assert_eq!(parsed.group, builtin.group, "{name}");
            assert_eq!(parsed.q.dim(), builtin.q.dim(), "{name}");
            assert_eq!(parsed.ergodic, builtin.ergodic, "{name}");
            for (k, bk) in parsed.koopman.iter().zip(builtin.koopman.iter()) {
                assert!((k - bk).norm() < 1e-12, "{name}: Koopman mismatch");
            }
        }
    }

    #[test]
    fn bad_weight_sum_is_rejected() {
        let text = fixture_text("sys-a").replace("0.5", "0.45");
        match parse_system_text(&text) {
            Err(Error::WeightSum(_)) => {}
            other => panic!("expected WeightSum, got {other:?}"),
        }
    }

    #[test]
    fn non_unitary_generator_is_rejected() {
        let text = r#"{
            "schema_version": 1,
            "algebra": {"blocks": [2], "weights": [1.0]},
            "group": {"kind": "finite-abelian", "orders": [2]},
            "generators": [
                {"label": "bad", "unitary": [[[[2.0,0.0],[0.0,0.0]],[[0.0,0.0],[1.0,0.0]]]]}
            ]
        }"#;
        match parse_system_text(text) {
            Err(Error::NotAutomorphism(_)) => {}
            other => panic!("expected NotAutomorphism, got {other:?}"),
        }
    }

    #[test]
    fn wrong_schema_version_is_a_parse_error() {
        let text = fixture_text("sys-a").replace("\"schema_version\": 1", "\"schema_version\": 2");
        match parse_system_text(&text) {
            Err(Error::Parse(msg)) => assert!(msg.contains("schema_version")),
            other => panic!("expected Parse, got {other:?}"),
        }
    }

    #[test]
    fn generator_needs_exactly_one_action_form() {
        let text = r#"{
            "schema_version": 1,
            "algebra": {"blocks": [1], "weights": [1.0]},
            "group": {"kind": "finite-abelian", "orders": [1]},
            "generators": [{"label": "g"}]
        }"#;
        match parse_system_text(text) {
            Err(Error::Parse(msg)) => assert!(msg.contains("exactly one")),
            other => panic!("expected Parse, got {other:?}"),
        }
    }

    #[test]
    fn malformed_json_reports_parse_error() {
        match parse_system_text("{ not json") {
            Err(Error::Parse(_)) => {}
            other => panic!("expected Parse, got {other:?}"),
        }
    }
}
