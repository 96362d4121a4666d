//! FWER-controlling testing over a hypothesis DAG with a polyforest.
//!
//! Each iteration:
//!
//! 1. every current root `r` of the pruned polyforest gets the budget
//!    `α · leaves(r) / leaves(F)`, counting leaves of the pruned forest;
//! 2. roots with `p_r ≤ budget_r` are rejected (all roots are tested against
//!    budgets fixed at the start of the iteration);
//! 3. every ancestor of a rejected root in the full DAG is rejected too;
//! 4. rejected nodes leave the forest, their children becoming roots.
//!
//! The loop stops after the first iteration without a rejection. Because the
//! rejected set is always an up-set and polyforest parents dominate their
//! children, pruning only ever removes the tops of trees.

use std::collections::BTreeSet;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::evidence::{evidence_table_with, EvidenceTable, NeighborOrder, PValueKernel};
use crate::lattice::{root_leaf_counts, upward_closure, BinaryProfile, HypothesisDag, ParentStrategy, Subgroup};

/// Relative slack when comparing a p-value with its budget, so that ties such
/// as `0.02 ≤ 0.05 · 2/5` survive floating-point rounding.
pub const BUDGET_TIE_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RejectionCause {
    BudgetTest,
    LogicalAncestor,
}

/// One rejection. Ancestor rejections carry the budget of the root that implied them.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceEntry {
    pub iter: usize,
    pub node: usize,
    pub profile: BinaryProfile,
    pub budget: f64,
    pub p: f64,
    pub cause: RejectionCause,
}

#[derive(Serialize, Deserialize)]
struct TraceRecord {
    iter: usize,
    node: BinaryProfile,
    budget: f64,
    p: f64,
    cause: RejectionCause,
}

/// Budgets handed to the roots at the start of one iteration.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Round {
    pub iter: usize,
    /// `(node, budget)` for every root, ascending by node.
    pub budgets: Vec<(usize, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RejectionSet {
    rejected: BTreeSet<usize>,
    trace: Vec<TraceEntry>,
    rounds: Vec<Round>,
    alpha: f64,
}

impl RejectionSet {
    pub fn empty(alpha: f64) -> Self {
        Self {
            rejected: BTreeSet::new(),
            trace: Vec::new(),
            rounds: Vec::new(),
            alpha,
        }
    }

    pub fn rejected(&self) -> &BTreeSet<usize> {
        &self.rejected
    }

    pub fn contains(&self, node: usize) -> bool {
        self.rejected.contains(&node)
    }

    pub fn is_empty(&self) -> bool {
        self.rejected.is_empty()
    }

    pub fn len(&self) -> usize {
        self.rejected.len()
    }

    pub fn trace(&self) -> &[TraceEntry] {
        &self.trace
    }

    pub fn rounds(&self) -> &[Round] {
        &self.rounds
    }

    pub fn iterations(&self) -> usize {
        self.rounds.len()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn rejected_profiles(&self, dag: &HypothesisDag) -> Vec<BinaryProfile> {
        let mut out: Vec<_> = self.rejected.iter().map(|&i| dag.profile(i)).collect();
        out.sort();
        out
    }

    /// The trace as JSON lines, one `{iter, node, budget, p, cause}` record per rejection.
    pub fn trace_jsonl(&self) -> String {
        let mut out = Vec::new();
        self.write_trace_jsonl(&mut out).expect("writing to a Vec");
        String::from_utf8(out).expect("JSON is UTF-8")
    }

    pub fn write_trace_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        for e in &self.trace {
            let rec = TraceRecord {
                iter: e.iter,
                node: e.profile,
                budget: e.budget,
                p: e.p,
                cause: e.cause,
            };
            serde_json::to_writer(&mut w, &rec)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// Runs the iterative procedure with p-values looked up by profile.
pub fn dag_test(dag: &HypothesisDag, pvalues: &EvidenceTable, alpha: f64) -> Result<RejectionSet> {
    let p = dag
        .nodes()
        .iter()
        .map(|x| pvalues.p_value(x).ok_or_else(|| Error::MissingPValue(x.to_string())))
        .collect::<Result<Vec<_>>>()?;
    dag_test_values(dag, &p, alpha)
}

/// Runs the iterative procedure with `p[i]` the p-value of node `i`.
pub fn dag_test_values(dag: &HypothesisDag, p: &[f64], alpha: f64) -> Result<RejectionSet> {
    let parent = dag.parents().ok_or(Error::MissingPolyforest)?;
    if p.len() != dag.len() {
        return Err(Error::InvalidConfig(format!(
            "{} p-values for {} nodes",
            p.len(),
            dag.len()
        )));
    }
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::OutOfRange {
            name: "alpha",
            value: alpha,
            expected: "0 <= alpha < 1",
        });
    }

    let n = dag.len();
    let mut out = RejectionSet::empty(alpha);
    let mut alive = vec![true; n];
    if n == 0 {
        return Ok(out);
    }
    let mut iter = 0;
    loop {
        iter += 1;
        let (roots, total) = root_leaf_counts(parent, &alive);
        if roots.is_empty() {
            break;
        }
        let budgets: Vec<(usize, f64)> = roots
            .iter()
            .map(|&(r, leaves)| (r, alpha * (leaves as f64 / total as f64)))
            .collect();
        out.rounds.push(Round {
            iter,
            budgets: budgets.clone(),
        });

        let hits: Vec<(usize, f64)> = budgets
            .iter()
            .copied()
            .filter(|&(r, b)| b > 0.0 && p[r] <= b * (1.0 + BUDGET_TIE_TOLERANCE))
            .collect();
        if hits.is_empty() {
            break;
        }

        let mut newly: BTreeSet<usize> = BTreeSet::new();
        for &(r, b) in &hits {
            newly.insert(r);
            out.trace.push(TraceEntry {
                iter,
                node: r,
                profile: dag.profile(r),
                budget: b,
                p: p[r],
                cause: RejectionCause::BudgetTest,
            });
        }
        let mut implied: Vec<(usize, f64)> = Vec::new();
        for &(r, b) in &hits {
            for &a in dag.ancestors(r) {
                if !out.rejected.contains(&a) && newly.insert(a) {
                    implied.push((a, b));
                }
            }
        }
        implied.sort_by_key(|&(a, _)| a);
        for (a, b) in implied {
            out.trace.push(TraceEntry {
                iter,
                node: a,
                profile: dag.profile(a),
                budget: b,
                p: p[a],
                cause: RejectionCause::LogicalAncestor,
            });
        }
        for node in newly {
            alive[node] = false;
            out.rejected.insert(node);
        }
    }
    Ok(out)
}

/// Everything produced by one isotonic-subgroup-selection run.
#[derive(Clone, Debug)]
pub struct IssOutcome {
    pub evidence: EvidenceTable,
    pub forest: HypothesisDag,
    pub rejections: RejectionSet,
    pub subgroup: Subgroup,
}

/// Evidence table, full DAG, polyforest, DAG testing, upward closure.
///
/// `PGuided` is refused: ranking parents by p-values from the same sample
/// that is then tested would void the error guarantee. Use the turnover
/// pipeline for p-guided forests.
pub fn iss(
    data: &Dataset,
    candidates: &[BinaryProfile],
    tau: f64,
    alpha: f64,
    strategy: ParentStrategy,
    seed: u64,
) -> Result<IssOutcome> {
    let kernel = PValueKernel::new(tau)?;
    iss_with_kernel(&kernel, NeighborOrder::default(), data, candidates, alpha, strategy, seed)
}

pub fn iss_with_kernel(
    kernel: &PValueKernel,
    order: NeighborOrder,
    data: &Dataset,
    candidates: &[BinaryProfile],
    alpha: f64,
    strategy: ParentStrategy,
    seed: u64,
) -> Result<IssOutcome> {
    if strategy == ParentStrategy::PGuided {
        return Err(Error::InvalidConfig(
            "p-guided parents need p-values from an independent screening sample".into(),
        ));
    }
    let dag = HypothesisDag::build(candidates)?;
    let evidence = evidence_table_with(kernel, candidates, data, order)?;
    let forest = dag.derive_polyforest(strategy, None, seed)?;
    let rejections = dag_test(&forest, &evidence, alpha)?;
    let subgroup = if forest.is_empty() {
        Subgroup::empty(data.dimension())?
    } else {
        upward_closure(&rejections, &forest)?
    };
    Ok(IssOutcome {
        evidence,
        forest,
        rejections,
        subgroup,
    })
}
