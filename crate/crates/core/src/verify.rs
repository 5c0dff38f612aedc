//! The acceptance checks, runnable from the CLI and from the test suite.
//!
//! `max_n` scales the exhaustive ranges down for quick runs; at `max_n = 7`
//! every check runs at its full size.

use std::collections::BTreeMap;
use std::time::Instant;

use num_bigint::BigUint;
use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::moments::{
    creation_moment, eta_moment, profile_coloring_oracle, profile_refinement_sequence,
    triangular_moment_closed_form, GridKind, OperatorSpec, Region, VarianceProfile,
};
use crate::partitions::{
    adapted_partitions, classify_block_pair, enumerate_nc2, AdaptMode, BlockPairType, IMAGINARY,
};
use crate::randmat::{estimate_moment, trial_value, EnsembleKind, EnsembleSpec};
use crate::rational::{self, int, ratio, Rational};
use crate::trees::{
    count_alternating_labelings, count_labeled_ordered_trees, enumerate_alternating,
    enumerate_ordered_trees, partition_to_tree, tree_to_partition, AlternationType,
};
use crate::volumes::{count_linear_extensions, count_linear_extensions_brute, region_constraints};
use crate::word::StarWord;
use crate::{catalan, factorial, Limits};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyConfig {
    pub max_n: usize,
    pub seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { max_n: 7, seed: 42 }
    }
}

type Check = fn(&VerifyConfig) -> Result<String, String>;

const CRITERIA: [(usize, &str, Check); 10] = [
    (1, "triangular moments closed form", triangular_closed_form),
    (2, "six-point volume table", six_point_volumes),
    (3, "creation word volumes", creation_examples),
    (4, "tree counts", tree_counts),
    (
        5,
        "bijection and labeling equivalence",
        bijection_and_labelings,
    ),
    (6, "oracle equivalence", oracle_equivalence),
    (7, "circular catalan", circular_catalan),
    (8, "grid refinement", grid_refinement),
    (9, "monte carlo convergence", monte_carlo),
    (10, "structural properties", structural),
];

pub fn criterion_ids() -> Vec<usize> {
    CRITERIA.iter().map(|c| c.0).collect()
}

pub fn run_criterion(id: usize, cfg: &VerifyConfig) -> Option<CriterionResult> {
    let &(id, name, check) = CRITERIA.iter().find(|c| c.0 == id)?;
    let start = Instant::now();
    let outcome = check(cfg);
    let seconds = start.elapsed().as_secs_f64();
    let (passed, detail) = match outcome {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    Some(CriterionResult {
        id,
        name,
        passed,
        detail,
        seconds,
    })
}

pub fn run_all(cfg: &VerifyConfig) -> Vec<CriterionResult> {
    criterion_ids()
        .into_iter()
        .filter_map(|id| run_criterion(id, cfg))
        .collect()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn lim() -> Limits {
    Limits::default()
}

fn err(e: crate::Error) -> String {
    e.to_string()
}

fn triangular_closed_form(cfg: &VerifyConfig) -> Result<String, String> {
    let mut shown = Vec::new();
    for n in 1..=cfg.max_n {
        let got = eta_moment(&StarWord::tt_power(n), &OperatorSpec::Triangular, &lim())
            .map_err(err)?
            .value;
        let want = triangular_moment_closed_form(n);
        ensure(got == want, || format!("n={n}: sum {got} != {want}"))?;
        shown.push(got.to_string());
    }
    Ok(format!("M_1..M_{} = {}", cfg.max_n, shown.join(", ")))
}

fn six_point_volumes(_: &VerifyConfig) -> Result<String, String> {
    let w = StarWord::tt_power(3);
    let res = eta_moment(&w, &OperatorSpec::Triangular, &lim()).map_err(err)?;
    let mut got: Vec<Rational> = res.contributions.iter().map(|(_, v)| v.clone()).collect();
    got.sort();
    let mut want: Vec<Rational> = [5, 6, 5, 5, 6].iter().map(|&c| ratio(c, 24)).collect();
    want.sort();
    ensure(got == want, || format!("volumes {got:?}"))?;
    let mut simplices = BigUint::zero();
    for (p, _) in &res.contributions {
        let q = region_constraints(p, &w, AdaptMode::Eta).map_err(err)?;
        simplices += count_linear_extensions(&q, &lim()).map_err(err)?;
    }
    ensure(simplices == BigUint::from(27u32), || {
        format!("{simplices} simplices")
    })?;
    Ok(format!("volumes ×24 = 6,5,5,6,5; {simplices} simplices"))
}

fn creation_examples(_: &VerifyConfig) -> Result<String, String> {
    let up = [Region::Upper; 6];
    let chain: StarWord = "*1,*1,*1,1,1,1".parse().map_err(err)?;
    let fork: StarWord = "*1,*1,1,*1,1,1".parse().map_err(err)?;
    let a = creation_moment(&chain, &up, &lim()).map_err(err)?;
    let b = creation_moment(&fork, &up, &lim()).map_err(err)?;
    ensure(a == ratio(1, 24), || format!("nested chain gave {a}"))?;
    ensure(b == ratio(1, 12), || format!("fork gave {b}"))?;
    Ok(format!("{a} and {b}"))
}

fn tree_counts(cfg: &VerifyConfig) -> Result<String, String> {
    let vmax = 8.min(cfg.max_n + 1);
    for v in 1..=vmax {
        let got = enumerate_ordered_trees(v, &lim()).map_err(err)?.len();
        ensure(BigUint::from(got) == catalan(v - 1), || {
            format!("{got} trees on {v} vertices")
        })?;
    }
    let nmax = 6.min(cfg.max_n);
    for n in 0..=nmax {
        let shapes = enumerate_ordered_trees(n + 1, &lim()).map_err(err)?;
        let total = BigUint::from(shapes.len()) * factorial(n + 1);
        let want = factorial(2 * n) / factorial(n);
        ensure(
            total == want && count_labeled_ordered_trees(n) == want,
            || format!("labeled count mismatch at n={n}"),
        )?;
    }
    ensure(
        count_labeled_ordered_trees(3) == BigUint::from(120u32),
        || "labeled trees on 4 vertices != 120".into(),
    )?;
    for n in 1..=nmax {
        let got = enumerate_alternating(n, AlternationType::TypeI, &lim())
            .map_err(err)?
            .len();
        ensure(got == n.pow(n as u32), || {
            format!("{got} type I alternating trees for n={n}")
        })?;
    }
    Ok(format!(
        "catalan shapes v<={vmax}; (2n)!/n! and n^n for n<={nmax}"
    ))
}

fn bijection_and_labelings(cfg: &VerifyConfig) -> Result<String, String> {
    let vmax = 8.min(cfg.max_n + 1);
    for v in 1..=vmax {
        let parts = enumerate_nc2(2 * (v - 1), &lim()).map_err(err)?;
        for t in enumerate_ordered_trees(v, &lim()).map_err(err)? {
            let p = tree_to_partition(&t);
            ensure(partition_to_tree(&p) == t, || {
                format!("tree round trip fails at {p}")
            })?;
        }
        for p in &parts {
            ensure(tree_to_partition(&partition_to_tree(p)) == *p, || {
                format!("partition round trip fails at {p}")
            })?;
        }
    }
    let nmax = 5.min(cfg.max_n);
    let mut checked = 0;
    for n in 1..=nmax {
        let w = StarWord::tt_power(n);
        for p in enumerate_nc2(2 * n, &lim()).map_err(err)? {
            let q = region_constraints(&p, &w, AdaptMode::Eta).map_err(err)?;
            let ext = count_linear_extensions(&q, &lim()).map_err(err)?;
            let labelings =
                count_alternating_labelings(&partition_to_tree(&p), AlternationType::TypeI);
            ensure(ext == BigUint::from(labelings), || {
                format!("{p}: {ext} extensions vs {labelings} labelings")
            })?;
            checked += 1;
        }
    }
    Ok(format!(
        "round trips v<={vmax}; {checked} partitions n<={nmax}"
    ))
}

fn oracle_equivalence(cfg: &VerifyConfig) -> Result<String, String> {
    let mmax = 10.min(2 * cfg.max_n);
    let mut posets = 0;
    for m in (0..=mmax).step_by(2) {
        let w = StarWord::tt_power(m / 2);
        for word in [w.clone(), w.adjoint()] {
            for p in enumerate_nc2(m, &lim()).map_err(err)? {
                let q = region_constraints(&p, &word, AdaptMode::Eta).map_err(err)?;
                let dp = count_linear_extensions(&q, &lim()).map_err(err)?;
                let brute = count_linear_extensions_brute(&q);
                ensure(dp == BigUint::from(brute), || {
                    format!("{p}: dp {dp} vs {brute}")
                })?;
                posets += 1;
            }
        }
    }

    let profiles = vec![
        VarianceProfile::strict_upper_grid(2),
        VarianceProfile::strict_upper_grid(3),
        VarianceProfile::new(vec![vec![int(0), int(1)], vec![int(0), int(0)]], None)
            .map_err(err)?,
        VarianceProfile::new(
            vec![
                vec![ratio(1, 3), int(2), int(0)],
                vec![ratio(5, 7), int(1), ratio(1, 2)],
                vec![int(0), ratio(3, 2), int(4)],
            ],
            Some(vec![ratio(1, 6), ratio(1, 2), ratio(1, 3)]),
        )
        .map_err(err)?,
        VarianceProfile::new(vec![vec![ratio(2, 3)]], None).map_err(err)?,
    ];
    let pmax = 8.min(2 * cfg.max_n);
    let words = profile_words(pmax);
    let mut sums = 0;
    for prof in &profiles {
        for w in &words {
            let res = eta_moment(w, &OperatorSpec::Profile(prof.clone()), &lim()).map_err(err)?;
            let oracle: Rational = adapted_partitions(w, AdaptMode::Eta, &lim())
                .map_err(err)?
                .iter()
                .map(|p| profile_coloring_oracle(p, w, prof))
                .sum();
            ensure(res.value == oracle, || {
                format!("word {w}, r={}: {} vs oracle {oracle}", prof.r(), res.value)
            })?;
            sums += 1;
        }
    }
    Ok(format!(
        "{posets} posets m<={mmax}; {sums} profile sums m<={pmax}"
    ))
}

// Even-length words up to `mmax` with assorted star patterns and labels.
fn profile_words(mmax: usize) -> Vec<StarWord> {
    let mut out = Vec::new();
    for m in (0..=mmax).step_by(2) {
        out.push(StarWord::tt_power(m / 2));
        // all star patterns on one label for short words, a stride for longer ones
        let step = if m <= 6 { 1 } else { 5 };
        for code in (0..1usize << m).step_by(step) {
            let letters = (0..m)
                .map(|i| crate::word::StarLetter {
                    starred: (code >> i) & 1 == 1,
                    label: if m > 4 && i % 4 >= 2 { 2 } else { 1 },
                })
                .collect();
            out.push(StarWord::new(letters));
        }
    }
    out
}

fn circular_catalan(cfg: &VerifyConfig) -> Result<String, String> {
    for n in 0..=cfg.max_n {
        let got = eta_moment(&StarWord::tt_power(n), &OperatorSpec::Circular, &lim())
            .map_err(err)?
            .value;
        let want = Rational::from_integer(catalan(n).into());
        ensure(got == want, || format!("n={n}: {got} != C_n = {want}"))?;
    }
    Ok(format!("C_0..C_{}", cfg.max_n))
}

fn grid_refinement(_: &VerifyConfig) -> Result<String, String> {
    let rs = [2, 4, 8, 16, 32];
    let first =
        profile_refinement_sequence(&StarWord::tt_power(1), GridKind::Triangular, &rs, &lim())
            .map_err(err)?;
    for (r, v) in &first {
        let want = ratio(*r as i64 - 1, 2 * *r as i64);
        ensure(*v == want, || format!("M_1({r}) = {v}, want {want}"))?;
    }
    let mut detail = Vec::new();
    for n in [2usize, 3] {
        let seq = profile_refinement_sequence(
            &StarWord::tt_power(n),
            GridKind::Triangular,
            &rs[..4],
            &lim(),
        )
        .map_err(err)?;
        let exact = triangular_moment_closed_form(n);
        let gaps: Vec<Rational> = seq.iter().map(|(_, v)| (&exact - v).abs()).collect();
        for pair in gaps.windows(2) {
            ensure(pair[1] < pair[0], || {
                format!("n={n}: gap {} does not shrink to {}", pair[0], pair[1])
            })?;
        }
        detail.push(format!(
            "n={n} gaps {}",
            gaps.iter()
                .map(|g| format!("{:.4}", rational::to_f64(g)))
                .collect::<Vec<_>>()
                .join(" > ")
        ));
    }
    Ok(format!(
        "M_1(r)=(r-1)/(2r) for r in {rs:?}; {}",
        detail.join("; ")
    ))
}

struct Anchor {
    kind: EnsembleKind,
    power: usize,
    target: Rational,
    tolerance: f64,
    name: &'static str,
}

fn monte_carlo(cfg: &VerifyConfig) -> Result<String, String> {
    const N: usize = 200;
    const TRIALS: usize = 200;
    let corner = VarianceProfile::new(vec![vec![int(0), int(1)], vec![int(0), int(0)]], None)
        .map_err(err)?;
    let anchors = [
        Anchor {
            kind: EnsembleKind::StrictUpper,
            power: 1,
            target: ratio(1, 2),
            tolerance: 0.01,
            name: "upper (*,1)",
        },
        Anchor {
            kind: EnsembleKind::StrictUpper,
            power: 2,
            target: ratio(2, 3),
            tolerance: 0.02,
            name: "upper (*,1)^2",
        },
        Anchor {
            kind: EnsembleKind::StrictUpper,
            power: 3,
            target: ratio(9, 8),
            tolerance: 0.03,
            name: "upper (*,1)^3",
        },
        Anchor {
            kind: EnsembleKind::IidSquare,
            power: 2,
            target: int(2),
            tolerance: 0.02,
            name: "iid (*,1)^2",
        },
        Anchor {
            kind: EnsembleKind::BlockProfile(corner),
            power: 1,
            target: ratio(1, 4),
            tolerance: 0.01,
            name: "blocks (*,1)",
        },
    ];
    let mut lines = Vec::new();
    let mut failures = Vec::new();
    for a in anchors.iter().filter(|a| a.power <= cfg.max_n.max(1)) {
        let spec = EnsembleSpec::new(N, a.kind.clone()).map_err(err)?;
        let est = estimate_moment(&StarWord::tt_power(a.power), &spec, TRIALS, cfg.seed);
        let gap = (est.mean - rational::to_f64(&a.target)).abs();
        let line = format!(
            "{} {:.4}±{:.4} (target {}, gap {:.4}, tol {})",
            a.name,
            est.mean,
            est.stderr.unwrap_or(f64::NAN),
            a.target,
            gap,
            a.tolerance
        );
        if gap > a.tolerance {
            failures.push(line.clone());
        }
        lines.push(line);
    }
    if failures.is_empty() {
        Ok(lines.join("; "))
    } else {
        Err(format!("outside tolerance: {}", failures.join("; ")))
    }
}

fn structural(cfg: &VerifyConfig) -> Result<String, String> {
    let nmax = 5.min(cfg.max_n);
    let mut types: BTreeMap<String, usize> = BTreeMap::new();
    for n in 1..=nmax {
        let w = StarWord::tt_power(n);
        for p in adapted_partitions(&w, AdaptMode::Eta, &lim()).map_err(err)? {
            for k in 1..=p.s() {
                if p.outer(k) == IMAGINARY {
                    continue;
                }
                let t = classify_block_pair(&p, &w, k).map_err(err)?;
                ensure(
                    matches!(t, BlockPairType::Type1 | BlockPairType::Type2),
                    || format!("{p} block {k} is {t:?}"),
                )?;
                *types.entry(format!("{t:?}")).or_default() += 1;
            }
        }
    }

    for n in 1..=6 {
        let spec = EnsembleSpec::new(n, EnsembleKind::StrictUpper).map_err(err)?;
        for k in n..=n + 2 {
            for t in 0..4 {
                let v = trial_value(&StarWord::plain_power(k), &spec, cfg.seed, t);
                ensure(v.re == 0.0 && v.im == 0.0, || {
                    format!("T^{k} at n={n} traced to {v}")
                })?;
            }
        }
    }

    for text in ["*1,2", "*1,1,*2,1", "*1,*2,1,2", "*2,2,*1"] {
        let w: StarWord = text.parse().map_err(err)?;
        for spec in [OperatorSpec::Triangular, OperatorSpec::Circular] {
            let v = eta_moment(&w, &spec, &lim()).map_err(err)?.value;
            ensure(v.is_zero(), || format!("{text} gave {v}"))?;
        }
    }
    let v = eta_moment(
        &"1,1".parse().map_err(err)?,
        &OperatorSpec::Triangular,
        &lim(),
    )
    .map_err(err)?
    .value;
    ensure(v.is_zero(), || format!("(1,1) gave {v}"))?;

    Ok(format!(
        "pair types n<={nmax}: {types:?}; nilpotency, label mismatch and (1,1) give 0"
    ))
}
