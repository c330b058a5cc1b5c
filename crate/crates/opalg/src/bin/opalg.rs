//! Command-line interface: inspect systems, run the library's decomposition
//! and tower machinery, and emit deterministic reports.

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64 as C64;
use rand::SeedableRng;

use opalg::algebra::{Algebra, Element};
use opalg::dynamics::{make_system, DynamicalSystem, GenMap};
use opalg::error::{Error, Result};
use opalg::fusion::self_fusion;
use opalg::hkz::{build_tower, default_budget, tower_report};
use opalg::joinings::{disjointness_probe, joining_problem, rel_indep_density};
use opalg::relprod::product_structure_check;
use opalg::report::{fmt_c64, fmt_f64, Format, InputDigest, Report};
use opalg::subalgebra::generate_subalgebra;
use opalg::sysfile::{element_from_lit, ElementLit};
use opalg::ToleranceProfile;

#[derive(Parser)]
#[command(
    name = "opalg",
    version,
    about = "Finite-dimensional tracial dynamical systems: decompositions, joinings, and uniformity towers"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Echo the validated structure of a system.
    Describe(SysArgs),
    /// Conditional expectation of a probe element onto Q.
    Expect {
        #[command(flatten)]
        sys: SysArgs,
        /// Probe element: "1", "(c1,c2,...)" diagonal entries, or a JSON
        /// element literal.
        #[arg(long)]
        probe: String,
    },
    /// Almost-periodic / weakly-mixing decomposition relative to Q.
    ApDecompose(SysArgs),
    /// Relative weak-mixing test over Q, with witness and optional probe
    /// minimization.
    WmTest {
        #[command(flatten)]
        sys: SysArgs,
        /// Optional probe element for the group-word minimum.
        #[arg(long)]
        probe: Option<String>,
        /// Maximum group word length for the probe minimum.
        #[arg(long, default_value_t = 4)]
        wordlen: usize,
    },
    /// Dimension of the fusion product L²(N) ⊗_Q L²(N).
    FusionDim(SysArgs),
    /// Probe for non-product joinings of the system with itself over Q.
    JoiningProbe {
        #[command(flatten)]
        sys: SysArgs,
        /// Probe element f; the observable is f ⊗ f.
        #[arg(long)]
        probe: String,
    },
    /// Relative product of the system with itself over a central Q.
    RelProduct(SysArgs),
    /// Build the tower of characteristic factors and report per-level data.
    HkzTower {
        #[command(flatten)]
        sys: SysArgs,
        #[arg(long, default_value_t = 2)]
        kmax: usize,
        /// Optional probe element for the seminorm table.
        #[arg(long)]
        probe: Option<String>,
        /// Cap on the Gram size of a level (entries).
        #[arg(long)]
        budget: Option<usize>,
    },
    /// Uniformity seminorm of a probe element.
    Seminorm {
        #[command(flatten)]
        sys: SysArgs,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        probe: String,
        #[arg(long)]
        budget: Option<usize>,
    },
    /// Run the invariant suite on the built-in fixtures.
    Selftest {
        #[arg(long, value_enum, default_value_t = FormatArg::Text)]
        format: FormatArg,
    },
}

#[derive(Args)]
struct SysArgs {
    /// Built-in name (sys-a..sys-d, z2..z8) or path to a JSON description.
    #[arg(long, default_value = "sys-a")]
    system: String,
    /// Replace Q: JSON list of element literals, inline or a file path.
    #[arg(long)]
    q_generators: Option<String>,
    #[arg(long, value_enum, default_value_t = FormatArg::Text)]
    format: FormatArg,
    #[arg(long)]
    tol_rank_rel: Option<f64>,
    #[arg(long)]
    tol_rank_abs: Option<f64>,
    #[arg(long)]
    tol_verify: Option<f64>,
    #[arg(long)]
    tol_report: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Text,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Format {
        match f {
            FormatArg::Text => Format::Text,
            FormatArg::Json => Format::Json,
        }
    }
}

fn main() {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok((report, format)) => {
            print!("{}", report.emit(format));
            if !report.all_passed() {
                std::process::exit(3);
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(exit_code(&e));
        }
    }
}

/// Exit codes: 0 success, 2 validation failure, 3 numeric assertion
/// failure, 4 budget exceeded.
fn exit_code(e: &Error) -> i32 {
    match e {
        Error::BudgetExceeded(_) => 4,
        Error::NumericalFailure(_)
        | Error::NotSelfAdjoint(_)
        | Error::PositivityViolation(_)
        | Error::CpViolation(_)
        | Error::IterationLimit(_) => 3,
        _ => 2,
    }
}

/// Load the system named by `--system`, apply tolerance and Q overrides,
/// and feed every input into the digest.
fn load_system(sys: &SysArgs, digest: &mut InputDigest) -> Result<DynamicalSystem> {
    let mut s = match opalg::fixtures::by_name(&sys.system) {
        Ok(s) => {
            digest.input("system", &sys.system);
            s
        }
        Err(_) if std::path::Path::new(&sys.system).exists() => {
            let text = std::fs::read_to_string(&sys.system)?;
            digest.input("system-file", &text);
            opalg::sysfile::parse_system_text(&text)?
        }
        Err(e) => return Err(e),
    };
    let mut tol = s.algebra.tol;
    let mut tol_changed = false;
    let mut apply = |name: &str, field: &mut f64, val: Option<f64>| {
        if let Some(v) = val {
            *field = v;
            digest.input(name, &fmt_f64(v));
            tol_changed = true;
        }
    };
    apply("tol-rank-rel", &mut tol.rank_rel, sys.tol_rank_rel);
    apply("tol-rank-abs", &mut tol.rank_abs, sys.tol_rank_abs);
    apply("tol-verify", &mut tol.verify, sys.tol_verify);
    apply("tol-report", &mut tol.report, sys.tol_report);
    let q_gens = match &sys.q_generators {
        None => None,
        Some(arg) => {
            let text = if std::path::Path::new(arg).exists() {
                std::fs::read_to_string(arg)?
            } else {
                arg.clone()
            };
            digest.input("q-generators", &text);
            let lits: Vec<ElementLit> =
                serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
            let gens = lits
                .iter()
                .enumerate()
                .map(|(i, l)| element_from_lit(&s.algebra, l, &format!("q generator {i}")))
                .collect::<Result<Vec<_>>>()?;
            Some(gens)
        }
    };
    if tol_changed || q_gens.is_some() {
        s = rebuild(&s, tol, q_gens)?;
    }
    Ok(s)
}

/// Re-verify a system with a new tolerance profile and/or subalgebra.
fn rebuild(
    s: &DynamicalSystem,
    tol: ToleranceProfile,
    q_gens: Option<Vec<Element>>,
) -> Result<DynamicalSystem> {
    let a = Algebra::new(s.algebra.blocks.clone(), s.algebra.weights.clone(), tol)?;
    let q = match q_gens {
        Some(gens) if !gens.is_empty() => generate_subalgebra(&a, &gens)?,
        _ => generate_subalgebra(&a, &s.q.basis.iter().cloned().collect::<Vec<_>>())?,
    };
    let gen_maps: Vec<GenMap> = s.koopman.iter().cloned().map(GenMap::Linear).collect();
    make_system(&a, s.group.clone(), &gen_maps, &q)
}

/// Parse a probe element: "1" for the unit, "(c1,...,cd)" for diagonal
/// entries across the blocks, or a JSON element literal.
fn parse_probe(a: &Algebra, text: &str) -> Result<Element> {
    let t = text.trim();
    if t == "1" {
        return Ok(a.one());
    }
    if t.starts_with('[') {
        let lit: ElementLit =
            serde_json::from_str(t).map_err(|e| Error::Parse(e.to_string()))?;
        return element_from_lit(a, &lit, "probe");
    }
    let inner = t
        .strip_prefix('(')
        .and_then(|r| r.strip_suffix(')'))
        .ok_or_else(|| Error::Parse(format!("probe '{t}': expected 1, (…), or JSON")))?;
    let entries = inner
        .split(',')
        .map(parse_complex)
        .collect::<Result<Vec<_>>>()?;
    let diag: usize = a.blocks.iter().sum();
    if entries.len() != diag {
        return Err(Error::Parse(format!(
            "probe has {} entries but the algebra has {diag} diagonal entries",
            entries.len()
        )));
    }
    let mut x = a.zero();
    let mut it = entries.into_iter();
    for (b, &n) in a.blocks.iter().enumerate() {
        for p in 0..n {
            x.blocks[b][(p, p)] = it.next().unwrap();
        }
    }
    Ok(x)
}

/// Parse "a", "bi", "a+bi", "a-bi" into a complex number.
fn parse_complex(tok: &str) -> Result<C64> {
    let t = tok.trim();
    let bad = || Error::Parse(format!("cannot parse complex number '{t}'"));
    let parse_imag = |s: &str| -> Result<f64> {
        match s {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            other => other.parse().map_err(|_| bad()),
        }
    };
    // Split at the last '+'/'-' that is not the leading sign and not part
    // of an exponent.
    let bytes = t.as_bytes();
    let mut split = None;
    for i in (1..bytes.len()).rev() {
        let c = bytes[i] as char;
        if (c == '+' || c == '-') && !matches!(bytes[i - 1] as char, 'e' | 'E') {
            split = Some(i);
            break;
        }
    }
    if let Some(rest) = t.strip_suffix('i') {
        match split {
            Some(i) if i < rest.len() => {
                let re: f64 = t[..i].parse().map_err(|_| bad())?;
                Ok(C64::new(re, parse_imag(&rest[i..])?))
            }
            _ => Ok(C64::new(0.0, parse_imag(rest)?)),
        }
    } else {
        Ok(C64::new(t.parse().map_err(|_| bad())?, 0.0))
    }
}

fn group_label(g: &opalg::dynamics::GroupSpec) -> String {
    use opalg::dynamics::GroupSpec;
    match g {
        GroupSpec::FiniteAbelian { orders } => format!(
            "finite-abelian({})",
            orders.iter().map(|o| o.to_string()).collect::<Vec<_>>().join(",")
        ),
        GroupSpec::FreeAbelian { rank } => format!("free-abelian(rank {rank})"),
        GroupSpec::Presented { generators, relations } => {
            format!("presented({generators} generators, {} relations)", relations.len())
        }
    }
}

fn set_element(r: &mut Report, prefix: &str, x: &Element) {
    for (b, m) in x.blocks.iter().enumerate() {
        for p in 0..m.nrows() {
            for q in 0..m.ncols() {
                r.set(&format!("{prefix}[{b}]({p},{q})"), fmt_c64(m[(p, q)]));
            }
        }
    }
}

fn run(cmd: &Cmd) -> Result<(Report, Format)> {
    match cmd {
        Cmd::Describe(sys) => {
            let mut d = InputDigest::new("describe");
            let s = load_system(sys, &mut d)?;
            let mut r = Report::new("describe", d.finish());
            let a = &s.algebra;
            r.set(
                "blocks",
                a.blocks.iter().map(|b| b.to_string()).collect::<Vec<_>>().join(","),
            );
            r.set(
                "weights",
                a.weights.iter().map(|w| fmt_f64(*w)).collect::<Vec<_>>().join(","),
            );
            r.set_usize("dim-l2", a.dim_l2());
            r.set("group", group_label(&s.group));
            r.set_usize("generators", s.koopman.len());
            r.set_usize("q-dim", s.q.dim());
            r.set_bool("ergodic", s.ergodic);
            r.check("system-verified", true);
            Ok((r, sys.format.into()))
        }
        Cmd::Expect { sys, probe } => {
            let mut d = InputDigest::new("expect");
            let s = load_system(sys, &mut d)?;
            d.input("probe", probe);
            let x = parse_probe(&s.algebra, probe)?;
            let e = s.q.cond_expect(&x)?;
            let mut r = Report::new("expect", d.finish());
            set_element(&mut r, "expectation", &e);
            r.set_f64("probe-norm", s.algebra.hs_norm(&x)?);
            r.set_f64("expectation-norm", s.algebra.hs_norm(&e)?);
            let ee = s.q.cond_expect(&e)?;
            let tol = s.algebra.tol.report;
            r.check("idempotent", s.algebra.hs_norm(&(&ee - &e))? <= tol);
            let dt = (s.algebra.trace(&x)? - s.algebra.trace(&e)?).norm();
            r.check("trace-preserving", dt <= tol);
            Ok((r, sys.format.into()))
        }
        Cmd::ApDecompose(sys) => {
            let mut d = InputDigest::new("ap-decompose");
            let s = load_system(sys, &mut d)?;
            let dec = s.ap_decompose()?;
            let mut r = Report::new("ap-decompose", d.finish());
            let dim = s.algebra.dim_l2();
            r.set_usize("dim-l2", dim);
            r.set_usize("ap-dim", dec.ap.ncols());
            r.set_usize("wm-dim", dec.wm.ncols());
            r.set_usize("q-dim", s.q.dim());
            r.set_usize("invariant-kernels", dec.witnesses.len());
            r.check("orthogonal-complement", dec.ap.ncols() + dec.wm.ncols() == dim);
            let cross = (dec.ap.adjoint() * &dec.wm).norm();
            r.check("parts-orthogonal", cross <= s.algebra.tol.report);
            Ok((r, sys.format.into()))
        }
        Cmd::WmTest { sys, probe, wordlen } => {
            let mut d = InputDigest::new("wm-test");
            let s = load_system(sys, &mut d)?;
            if let Some(p) = probe {
                d.input("probe", p);
            }
            d.input("wordlen", &wordlen.to_string());
            let (wm, witness) = s.test_weak_mixing()?;
            let mut r = Report::new("wm-test", d.finish());
            r.set_bool("weakly-mixing", wm);
            r.set_bool("witness-found", witness.is_some());
            if let Some(w) = &witness {
                r.set_f64("witness-norm", w.norm());
            }
            if let Some(p) = probe {
                let f = parse_probe(&s.algebra, p)?;
                let (min, word) = s.popa_probe(&[f], *wordlen)?;
                r.set_f64("popa-min", min);
                r.set("popa-argmin", word);
            }
            Ok((r, sys.format.into()))
        }
        Cmd::FusionDim(sys) => {
            let mut d = InputDigest::new("fusion-dim");
            let s = load_system(sys, &mut d)?;
            let f = self_fusion(&s.q)?;
            let mut r = Report::new("fusion-dim", d.finish());
            r.set_usize("fusion-dim", f.dim());
            r.set_usize("dim-l2", s.algebra.dim_l2());
            r.set_usize("q-dim", s.q.dim());
            r.check("built", true);
            Ok((r, sys.format.into()))
        }
        Cmd::JoiningProbe { sys, probe } => {
            let mut d = InputDigest::new("joining-probe");
            let s = load_system(sys, &mut d)?;
            d.input("probe", probe);
            let f = parse_probe(&s.algebra, probe)?;
            let p = joining_problem(&s, &s, &s.q.basis)?;
            let rel = rel_indep_density(&p)?;
            let baseline = p.eval(&rel, &f, &f)?;
            let t_obs = p.amb.embed_tensor(&f, &f);
            let (max, state) = disjointness_probe(&p, &t_obs)?;
            let mut r = Report::new("joining-probe", d.finish());
            r.set_f64("baseline", baseline.re);
            r.set_f64("max-value", max);
            r.set_f64("gap", max - baseline.re);
            r.set_bool(
                "non-product-joining-found",
                max - baseline.re > 100.0 * s.algebra.tol.report,
            );
            r.check(
                "witness-feasible",
                p.infeasibility(&state.t)? <= 10.0 * s.algebra.tol.report,
            );
            Ok((r, sys.format.into()))
        }
        Cmd::RelProduct(sys) => {
            let mut d = InputDigest::new("rel-product");
            let s = load_system(sys, &mut d)?;
            let ps = product_structure_check(&s, &s, &s.q.basis)?;
            let mut r = Report::new("rel-product", d.finish());
            r.set_usize("product-dim-l2", ps.product.algebra.dim_l2());
            r.set_usize("factor1-ap-dim", ps.factor_ranks[0].0);
            r.set_usize("factor2-ap-dim", ps.factor_ranks[1].0);
            r.set_usize("product-ap-dim", ps.product_rank.0);
            r.set_bool("product-ergodic", ps.product.ergodic);
            r.set_f64("witness-residual", ps.witness_residual);
            r.check("compactness-matches", ps.rank_equality);
            r.check(
                "witness-invariant",
                ps.witness_residual <= 10.0 * s.algebra.tol.report,
            );
            Ok((r, sys.format.into()))
        }
        Cmd::HkzTower { sys, kmax, probe, budget } => {
            let mut d = InputDigest::new("hkz-tower");
            let s = load_system(sys, &mut d)?;
            d.input("kmax", &kmax.to_string());
            if let Some(p) = probe {
                d.input("probe", p);
            }
            let budget = budget.unwrap_or_else(default_budget);
            d.input("budget", &budget.to_string());
            let mut probes = vec![s.algebra.one()];
            if let Some(p) = probe {
                probes.push(parse_probe(&s.algebra, p)?);
            }
            let rep = tower_report(&s, *kmax, &probes, budget)?;
            let mut r = Report::new("hkz-tower", d.finish());
            r.set_usize("kmax", rep.kmax);
            for lv in &rep.levels {
                let k = lv.k;
                r.set_usize(&format!("level{k}-cube-dim"), lv.h_dim);
                r.set_usize(&format!("level{k}-diag-invariant-dim"), lv.i_dim);
                r.set_usize(&format!("level{k}-side-invariant-dim"), lv.j_dim);
                r.set_usize(&format!("level{k}-z-dim"), lv.z_dim);
                r.check(&format!("level{k}-z-algebra"), lv.z_algebra_ok);
                r.check(&format!("level{k}-compact-extension"), lv.compact_ok);
                if let Some(t) = lv.tracial {
                    r.set_bool(&format!("level{k}-state-tracial"), t);
                }
            }
            for (p, row) in rep.seminorms.iter().enumerate() {
                for (k1, v) in row.iter().enumerate() {
                    r.set_f64(&format!("seminorm-probe{p}-k{}", k1 + 1), *v);
                }
            }
            r.check("z-chain-increasing", rep.z_increasing);
            Ok((r, sys.format.into()))
        }
        Cmd::Seminorm { sys, k, probe, budget } => {
            if *k == 0 {
                return Err(Error::Argument("k must be at least 1".into()));
            }
            let mut d = InputDigest::new("seminorm");
            let s = load_system(sys, &mut d)?;
            d.input("k", &k.to_string());
            d.input("probe", probe);
            let budget = budget.unwrap_or_else(default_budget);
            d.input("budget", &budget.to_string());
            let x = parse_probe(&s.algebra, probe)?;
            let tower = build_tower(&s, k - 1, budget)?;
            let v = tower.seminorm(&x, *k)?;
            let mut r = Report::new("seminorm", d.finish());
            r.set_usize("k", *k);
            r.set_f64("seminorm", v);
            Ok((r, sys.format.into()))
        }
        Cmd::Selftest { format } => {
            let mut d = InputDigest::new("selftest");
            d.input("suite", "builtin-fixtures");
            let mut r = Report::new("selftest", d.finish());
            selftest(&mut r)?;
            Ok((r, (*format).into()))
        }
    }
}

/// A fast invariant battery over the built-in fixtures with a fixed seed.
fn selftest(r: &mut Report) -> Result<()> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    for name in ["sys-a", "sys-b", "sys-c", "sys-d"] {
        let s = opalg::fixtures::by_name(name)?;
        let a = &s.algebra;
        let tol = a.tol.report;
        // Conditional expectation axioms on random elements.
        let mut exp_ok = true;
        for _ in 0..20 {
            let x = a.random_element(&mut rng);
            let e = s.q.cond_expect(&x)?;
            let ee = s.q.cond_expect(&e)?;
            exp_ok &= a.hs_norm(&(&ee - &e))? <= tol;
            exp_ok &= (a.trace(&x)? - a.trace(&e)?).norm() <= tol;
        }
        r.check(&format!("{name}-cond-expect"), exp_ok);
        // The decomposition spans L²(N) at finite dimension.
        let dec = s.ap_decompose()?;
        r.check(
            &format!("{name}-ap-exhausts"),
            dec.ap.ncols() + dec.wm.ncols() == a.dim_l2(),
        );
        // No finite-dimensional system is weakly mixing over the scalars
        // unless N = Q.
        let (wm, witness) = s.test_weak_mixing()?;
        r.check(&format!("{name}-not-weakly-mixing"), !wm && witness.is_some());
    }
    // Seminorm of the unit and the sign function on the two-point swap.
    let s = opalg::fixtures::by_name("sys-a")?;
    let tower = build_tower(&s, 1, default_budget())?;
    let one = s.algebra.one();
    let f = opalg::fixtures::sign_function(&s.algebra);
    r.check("sys-a-unit-seminorm", (tower.seminorm(&one, 2)? - 1.0).abs() <= 1e-8);
    r.check("sys-a-sign-seminorm-1", tower.seminorm(&f, 1)?.abs() <= 1e-8);
    r.check("sys-a-sign-seminorm-2", (tower.seminorm(&f, 2)? - 1.0).abs() <= 1e-8);
    Ok(())
}
