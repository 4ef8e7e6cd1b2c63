//! Seeded batch verification of the tree → tropical pipeline.
//!
//! Every trial draws a random tree and runs the full chain of checks on it.
//! Trials run in parallel but are merged in trial order, so a fixed
//! configuration always produces the same report.

use std::fmt::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::dissim::{four_point_check, pairwise_map, phi_r, reconstruct_tree, steiner_r_map, MAX_CYCLIC_R};
use crate::error::{Error, Result};
use crate::rational::{format_rational, int, Rational};
use crate::tlspace::{
    circuit_membership, facet_scan, inequality_membership, internal_node_points, root_depth_point,
    subtree_point, Interpretation,
};
use crate::treecore::{leaf_free_subtrees, random_tree_with_rng, serialize_newick, trees_isomorphic, WeightedTree};
use crate::tropcore::{dressian_report, tropical_vector, Convention, RelationFamily};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerifyConfig {
    pub seed: u64,
    pub trials: usize,
    pub n_min: usize,
    pub n_max: usize,
    pub r_set: Vec<usize>,
    pub conventions: Vec<Convention>,
    #[serde(with = "crate::rational::serde_str")]
    pub weight_lo: Rational,
    #[serde(with = "crate::rational::serde_str")]
    pub weight_hi: Rational,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            trials: 50,
            n_min: 4,
            n_max: 7,
            r_set: vec![2, 3],
            conventions: Convention::BOTH.to_vec(),
            weight_lo: int(1),
            weight_hi: int(10),
        }
    }
}

impl VerifyConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidConfig(msg));
        if self.trials == 0 {
            return fail("trials must be at least 1".into());
        }
        if self.n_min < 3 || self.n_min > self.n_max {
            return fail(format!("leaf range [{}, {}] must satisfy 3 <= min <= max", self.n_min, self.n_max));
        }
        if self.r_set.is_empty() {
            return fail("r set is empty".into());
        }
        if let Some(r) = self.r_set.iter().find(|&&r| !(2..=MAX_CYCLIC_R).contains(&r)) {
            return fail(format!("r = {r} outside [2, {MAX_CYCLIC_R}]"));
        }
        if self.conventions.is_empty() {
            return fail("no conventions selected".into());
        }
        if self.weight_lo <= int(0) || self.weight_hi < self.weight_lo {
            return fail(format!(
                "weight range [{}, {}] must be positive and nonempty",
                format_rational(&self.weight_lo),
                format_rational(&self.weight_hi)
            ));
        }
        Ok(())
    }
}

/// Checks in report order.
pub const CHECKS: [&str; 10] = [
    "four-point",
    "phi-equals-steiner",
    "reconstruction",
    "dressian-k2",
    "dressian-kr",
    "root-point-membership",
    "node-point-membership",
    "node-points-distinct",
    "subtree-point-membership",
    "facet-characterization",
];

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Tally {
    pub passed: u64,
    pub failed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckTally {
    pub name: &'static str,
    #[serde(flatten)]
    pub tally: Tally,
}

/// Circuit-test outcomes for subtree points against `φ^r(D)`; measured, not
/// asserted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CircuitTally {
    pub convention: Convention,
    pub r: usize,
    #[serde(flatten)]
    pub tally: Tally,
}

/// Everything needed to replay a failed check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FailureBundle {
    pub check: &'static str,
    pub trial: usize,
    pub newick: String,
    pub r: Option<usize>,
    pub subtree: Option<Vec<usize>>,
    pub subset: Option<Vec<usize>>,
    pub convention: Option<Convention>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub config: VerifyConfig,
    pub checks: Vec<CheckTally>,
    pub circuit: Vec<CircuitTally>,
    pub pass: bool,
    pub failure: Option<FailureBundle>,
    /// Wall-clock time, filled in only on request.
    pub elapsed_ms: Option<u64>,
}

struct Trial<'a> {
    index: usize,
    tree: &'a WeightedTree,
    newick: String,
    tallies: Vec<Tally>,
    circuit: Vec<Tally>,
    failure: Option<FailureBundle>,
}

#[derive(Default)]
struct Context {
    r: Option<usize>,
    subtree: Option<Vec<usize>>,
    subset: Option<Vec<usize>>,
    convention: Option<Convention>,
}

impl Trial<'_> {
    fn record(&mut self, check: usize, ok: bool, ctx: Context, detail: impl FnOnce() -> String) {
        if ok {
            self.tallies[check].passed += 1;
            return;
        }
        self.tallies[check].failed += 1;
        if self.failure.is_none() {
            self.failure = Some(FailureBundle {
                check: CHECKS[check],
                trial: self.index,
                newick: self.newick.clone(),
                r: ctx.r,
                subtree: ctx.subtree,
                subset: ctx.subset,
                convention: ctx.convention,
                detail: detail(),
            });
        }
    }

    fn record_result(&mut self, check: usize, outcome: Result<(bool, String)>, ctx: Context) {
        match outcome {
            Ok((ok, detail)) => self.record(check, ok, ctx, || detail),
            Err(e) => self.record(check, false, ctx, || format!("error: {e}")),
        }
    }
}

fn with_r(r: usize) -> Context {
    Context { r: Some(r), ..Context::default() }
}

fn run_trial(cfg: &VerifyConfig, index: usize) -> Result<(Vec<Tally>, Vec<Tally>, Option<FailureBundle>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index as u64);
    let n = rng.random_range(cfg.n_min..=cfg.n_max);
    let tree = random_tree_with_rng(&mut rng, n, &cfg.weight_lo, &cfg.weight_hi)?;
    let circuit_slots: Vec<(Convention, usize)> = circuit_slots(cfg);
    let mut t = Trial {
        index,
        tree: &tree,
        newick: serialize_newick(&tree),
        tallies: vec![Tally::default(); CHECKS.len()],
        circuit: vec![Tally::default(); circuit_slots.len()],
        failure: None,
    };
    let d = pairwise_map(t.tree);
    let rs: Vec<usize> = cfg.r_set.iter().copied().filter(|&r| r <= n).collect();

    let fp = four_point_check(&d);
    t.record(0, fp.pass, Context::default(), || format!("witness {:?}", fp.witness));

    for &r in &rs {
        let outcome = phi_r(&d, r).and_then(|phi| {
            let st = steiner_r_map(t.tree, r)?;
            Ok((phi == st, "phi_r differs from Steiner weights".to_string()))
        });
        t.record_result(1, outcome, with_r(r));
    }

    let outcome = reconstruct_tree(&d).map(|back| {
        let ok = trees_isomorphic(&back, t.tree);
        (ok, format!("reconstructed {}", serialize_newick(&back)))
    });
    t.record_result(2, outcome, Context::default());

    if n >= 4 {
        let outcome = dressian_report(&tropical_vector(d.as_subset_vector()), RelationFamily::ThreeTerm, Convention::Max)
            .map(|rep| (rep.pass, format!("{:?}", rep.first_failure.map(|f| f.index))));
        t.record_result(3, outcome, Context { convention: Some(Convention::Max), ..Context::default() });
    }
    for &r in rs.iter().filter(|&&r| r >= 3 && n >= r + 2) {
        let outcome = phi_r(&d, r).and_then(|phi| {
            let rep = dressian_report(&tropical_vector(phi.as_subset_vector()), RelationFamily::ThreeTerm, Convention::Max)?;
            Ok((rep.pass, format!("{:?}", rep.first_failure.map(|f| f.index))))
        });
        t.record_result(4, outcome, Context { r: Some(r), convention: Some(Convention::Max), ..Context::default() });
    }

    let subtrees = leaf_free_subtrees(t.tree);
    for &r in &rs {
        let dr = steiner_r_map(t.tree, r)?;
        let phi = tropical_vector(phi_r(&d, r)?.as_subset_vector());

        if let Some(root) = t.tree.internal_vertices().next() {
            let outcome = root_depth_point(t.tree, root)
                .and_then(|x| inequality_membership(&x.coords, &dr))
                .map(|m| (m.verdict, format!("violated at {:?}", m.first_violation)));
            t.record_result(5, outcome, Context { r: Some(r), subtree: Some(vec![root]), ..Context::default() });
        }

        let nodes = internal_node_points(t.tree, r)?;
        for x in &nodes {
            let v = match x.provenance {
                crate::tlspace::Provenance::Node { vertex } => vertex,
                _ => unreachable!(),
            };
            let outcome = inequality_membership(&x.coords, &dr)
                .map(|m| (m.verdict, format!("violated at {:?}", m.first_violation)));
            t.record_result(6, outcome, Context { r: Some(r), subtree: Some(vec![v]), ..Context::default() });
        }
        let distinct = nodes
            .iter()
            .enumerate()
            .all(|(i, a)| nodes[i + 1..].iter().all(|b| a.coords != b.coords));
        t.record(7, distinct, with_r(r), || "two internal vertices share a point".into());

        for tp in &subtrees {
            let verts: Vec<usize> = tp.vertices().iter().copied().collect();
            let x = subtree_point(t.tree, tp, r)?;
            let outcome = inequality_membership(&x.coords, &dr)
                .map(|m| (m.verdict, format!("violated at {:?}", m.first_violation)));
            t.record_result(8, outcome, Context { r: Some(r), subtree: Some(verts.clone()), ..Context::default() });

            match facet_scan(t.tree, tp, r, Interpretation::Pairwise) {
                Ok(scan) => {
                    let bad = scan.reports.iter().find(|rep| rep.actual_tight != rep.predicted_tight);
                    let subset = bad.map(|rep| rep.subset.clone());
                    let detail = bad.map(|rep| {
                        format!(
                            "actual_tight={} predicted_tight={} contains={} disjoint={}",
                            rep.actual_tight, rep.predicted_tight, rep.contains_tprime, rep.disjoint
                        )
                    });
                    t.record(
                        9,
                        bad.is_none(),
                        Context { r: Some(r), subtree: Some(verts.clone()), subset, ..Context::default() },
                        || detail.unwrap_or_default(),
                    );
                }
                Err(e) => t.record(9, false, Context { r: Some(r), subtree: Some(verts.clone()), ..Context::default() }, || {
                    format!("error: {e}")
                }),
            }

            if r < n {
                for (slot, &(conv, slot_r)) in circuit_slots.iter().enumerate() {
                    if slot_r == r {
                        let ok = circuit_membership(&phi, &x.coords, conv).map(|c| c.verdict).unwrap_or(false);
                        let tally = &mut t.circuit[slot];
                        if ok {
                            tally.passed += 1;
                        } else {
                            tally.failed += 1;
                        }
                    }
                }
            }
        }
    }
    Ok((t.tallies, t.circuit, t.failure))
}

fn circuit_slots(cfg: &VerifyConfig) -> Vec<(Convention, usize)> {
    let mut rs = cfg.r_set.clone();
    rs.sort_unstable();
    rs.dedup();
    let mut convs = cfg.conventions.clone();
    convs.sort_unstable();
    convs.dedup();
    convs.iter().flat_map(|&c| rs.iter().map(move |&r| (c, r))).collect()
}

/// Runs every trial and aggregates the outcome. Check failures are report
/// content; only an invalid configuration is an error.
pub fn run_verify(cfg: &VerifyConfig) -> Result<VerifyReport> {
    cfg.validate()?;
    let outcomes: Vec<_> = (0..cfg.trials).into_par_iter().map(|i| run_trial(cfg, i)).collect();
    let slots = circuit_slots(cfg);
    let mut checks: Vec<CheckTally> = CHECKS.iter().map(|&name| CheckTally { name, tally: Tally::default() }).collect();
    let mut circuit: Vec<CircuitTally> = slots
        .iter()
        .map(|&(convention, r)| CircuitTally { convention, r, tally: Tally::default() })
        .collect();
    let mut failure = None;
    for (index, outcome) in outcomes.into_iter().enumerate() {
        let (tallies, circ, fail) = match outcome {
            Ok(o) => o,
            Err(e) => {
                // generation itself failed; charge it to the first check
                checks[0].tally.failed += 1;
                failure.get_or_insert(FailureBundle {
                    check: CHECKS[0],
                    trial: index,
                    newick: String::new(),
                    r: None,
                    subtree: None,
                    subset: None,
                    convention: None,
                    detail: format!("error: {e}"),
                });
                continue;
            }
        };
        for (acc, t) in checks.iter_mut().zip(tallies) {
            acc.tally.passed += t.passed;
            acc.tally.failed += t.failed;
        }
        for (acc, t) in circuit.iter_mut().zip(circ) {
            acc.tally.passed += t.passed;
            acc.tally.failed += t.failed;
        }
        if failure.is_none() {
            failure = fail;
        }
    }
    Ok(VerifyReport {
        config: cfg.clone(),
        pass: checks.iter().all(|c| c.tally.failed == 0),
        checks,
        circuit,
        failure,
        elapsed_ms: None,
    })
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

impl VerifyReport {
    /// `key: value` lines.
    pub fn to_text(&self) -> String {
        let c = &self.config;
        let mut out = String::new();
        writeln!(out, "seed: {}", c.seed).unwrap();
        writeln!(out, "trials: {}", c.trials).unwrap();
        writeln!(out, "n-range: {}..{}", c.n_min, c.n_max).unwrap();
        writeln!(out, "r-set: {}", join(&c.r_set)).unwrap();
        writeln!(out, "conventions: {}", join(&c.conventions)).unwrap();
        writeln!(out, "weights: {}..{}", format_rational(&c.weight_lo), format_rational(&c.weight_hi)).unwrap();
        for check in &self.checks {
            writeln!(
                out,
                "check.{}: {} passed, {} failed",
                check.name, check.tally.passed, check.tally.failed
            )
            .unwrap();
        }
        for circ in &self.circuit {
            writeln!(
                out,
                "circuit.{}.r{}: {} passed, {} failed",
                circ.convention, circ.r, circ.tally.passed, circ.tally.failed
            )
            .unwrap();
        }
        writeln!(out, "result: {}", if self.pass { "PASS" } else { "FAIL" }).unwrap();
        match &self.failure {
            None => writeln!(out, "failure: none").unwrap(),
            Some(f) => {
                writeln!(out, "failure.check: {}", f.check).unwrap();
                writeln!(out, "failure.trial: {}", f.trial).unwrap();
                writeln!(out, "failure.newick: {}", f.newick).unwrap();
                if let Some(r) = f.r {
                    writeln!(out, "failure.r: {r}").unwrap();
                }
                if let Some(s) = &f.subtree {
                    writeln!(out, "failure.subtree: {}", join(s)).unwrap();
                }
                if let Some(s) = &f.subset {
                    writeln!(out, "failure.subset: {}", join(s)).unwrap();
                }
                if let Some(cv) = f.convention {
                    writeln!(out, "failure.convention: {cv}").unwrap();
                }
                writeln!(out, "failure.detail: {}", f.detail).unwrap();
            }
        }
        if let Some(ms) = self.elapsed_ms {
            writeln!(out, "elapsed-ms: {ms}").unwrap();
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_run_passes() {
        let report = run_verify(&VerifyConfig::default()).unwrap();
        assert!(report.pass, "{}", report.to_text());
        assert!(report.failure.is_none());
        assert_eq!(report.checks[0].tally.passed, 50);
        assert!(report.checks.iter().all(|c| c.tally.passed > 0));
    }

    #[test]
    fn deterministic_output() {
        let cfg = VerifyConfig { trials: 12, ..VerifyConfig::default() };
        let a = run_verify(&cfg).unwrap();
        let b = run_verify(&cfg).unwrap();
        assert_eq!(a.to_text(), b.to_text());
        assert_eq!(a.to_json(), b.to_json());
        let other = run_verify(&VerifyConfig { seed: 7, ..cfg }).unwrap();
        assert_ne!(a.to_json(), other.to_json());
    }

    #[test]
    fn rejects_bad_configs() {
        let base = VerifyConfig::default();
        for cfg in [
            VerifyConfig { trials: 0, ..base.clone() },
            VerifyConfig { n_min: 8, n_max: 5, ..base.clone() },
            VerifyConfig { n_min: 2, ..base.clone() },
            VerifyConfig { r_set: vec![], ..base.clone() },
            VerifyConfig { r_set: vec![9], ..base.clone() },
            VerifyConfig { conventions: vec![], ..base.clone() },
            VerifyConfig { weight_lo: int(0), ..base.clone() },
        ] {
            assert!(matches!(run_verify(&cfg), Err(Error::InvalidConfig(_))));
        }
    }

    #[test]
    fn text_report_shape() {
        let report = run_verify(&VerifyConfig { trials: 2, ..VerifyConfig::default() }).unwrap();
        let text = report.to_text();
        assert!(text.starts_with("seed: 42\ntrials: 2\n"));
        assert!(text.contains("check.four-point: 2 passed, 0 failed\n"));
        assert!(text.contains("result: PASS\nfailure: none\n"));
        assert!(!text.contains("elapsed"));
    }
}
