use serde::{Deserialize, Serialize};

use super::bound::{branch_bound, in_runnenberg_cone, BoundMode, BranchBound};
use super::enumerate::{enumerate_generators, Candidate};
use crate::error::{Error, Result};
use crate::numkit::{
    branch_log, eig, expm, has_unique_real_log, logm_principal, perturb_distinct, BranchSelection,
    Eigendecomposition, RealMatrix, ToleranceConfig, C64,
};
use crate::structure::{frobenius_form, necessary_conditions, trailing_submatrix, Violation};

/// Failures recorded per branch before the list is truncated.
const MAX_RECORDED_BRANCHES: usize = 64;

/// Slack multiple within which a rejected candidate counts as borderline.
const BORDERLINE_FACTOR: f64 = 10.0;

/// Powers of a demonstrated root must reproduce the matrix to this
/// relative accuracy.
pub const ROOT_RECON_TOL: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EmbedVerdict {
    Embeddable,
    NotEmbeddable,
    Undetermined,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DivisibilityVerdict {
    StronglyInfDivisible,
    NotStronglyInfDivisible,
    Undetermined,
}

/// How a verdict was reached.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Determinant,
    NecessaryConditions,
    PrincipalLogarithm,
    /// The principal logarithm is the only real logarithm (all eigenvalues
    /// positive, one Jordan block each), so its rejection is final.
    UniqueRealLogarithm,
    BranchSearch,
    Perturbation,
    Unresolved,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectionKind {
    /// An off-diagonal entry of the wrong sign.
    OffDiagonal,
    /// A nonzero row sum (intensity matrices only).
    RowSum,
    /// The exponential does not reproduce the input.
    Reconstruction,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "condition", rename_all = "snake_case")]
pub enum FailedCondition {
    Determinant {
        det: f64,
        /// `0 < det <= entry_tol`: too close to singular to decide.
        boundary: bool,
    },
    Structure {
        violation: Violation,
    },
    NoRealLogarithm {
        eigenvalue_index: usize,
        eigenvalue: C64,
    },
    Runnenberg {
        eigenvalue_index: usize,
        eigenvalue: C64,
    },
    Branch {
        offsets: Vec<i64>,
        kind: RejectionKind,
        row: usize,
        col: usize,
        value: f64,
        borderline: bool,
    },
    BranchesOmitted {
        count: u64,
    },
    TooManyBranches {
        count: u64,
        limit: u64,
    },
    Numerical {
        error: String,
    },
    Root {
        n: u32,
        min_entry: f64,
        residual: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbedOptions {
    pub bound_mode: BoundMode,
    /// Perturb matrices with repeated eigenvalues before searching; positive
    /// findings on the perturbed matrix are reported as undetermined.
    pub allow_perturb: bool,
    /// Largest number of candidate logarithms assembled before giving up.
    pub max_candidates: u64,
    /// Orders of the roots demonstrated on a positive divisibility verdict.
    pub roots: Vec<u32>,
    /// Also report every trailing submatrix of the Frobenius form.
    pub recurse: bool,
}

impl Default for EmbedOptions {
    fn default() -> Self {
        EmbedOptions {
            bound_mode: BoundMode::IsraelTwoSided,
            allow_perturb: true,
            max_candidates: 1 << 18,
            roots: vec![2, 3, 5],
            recurse: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddabilityReport {
    pub verdict: EmbedVerdict,
    pub method: Method,
    /// Intensity matrix `R` with `exp(R)` close to the input (or to its
    /// perturbation when `perturbed`).
    pub generator: Option<RealMatrix>,
    pub selection: Option<BranchSelection>,
    pub determinant: f64,
    pub branches_examined: u64,
    pub failed_conditions: Vec<FailedCondition>,
    pub perturbed: bool,
    pub perturbed_input: Option<RealMatrix>,
    pub bound_used: Option<BranchBound>,
    /// Verdict under the two-sided window when a different mode was used.
    pub two_sided_verdict: Option<EmbedVerdict>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootDemonstration {
    pub n: u32,
    pub root: RealMatrix,
    pub min_entry: f64,
    /// Relative distance between `root^n` and the input.
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrailingReport {
    pub blocks_removed: usize,
    pub report: DivisibilityReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivisibilityReport {
    pub verdict: DivisibilityVerdict,
    pub method: Method,
    /// Z-matrix `Q` with `exp(-Q)` close to the input.
    pub z_matrix: Option<RealMatrix>,
    pub selection: Option<BranchSelection>,
    pub determinant: f64,
    pub roots_demonstrated: Vec<RootDemonstration>,
    pub recursion: Vec<TrailingReport>,
    pub branches_examined: u64,
    pub failed_conditions: Vec<FailedCondition>,
    pub perturbed: bool,
    pub perturbed_input: Option<RealMatrix>,
    pub bound_used: Option<BranchBound>,
}

/// Which class a logarithm must fall in.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Target {
    /// Intensity matrix: off-diagonals >= 0, rows sum to zero.
    Intensity,
    /// Negated Z-matrix: off-diagonals >= 0.
    NegatedZ,
}

impl Target {
    fn rejection(self, log: &RealMatrix, input: &RealMatrix, cfg: &ToleranceConfig) -> Option<Rejection> {
        let n = log.dim();
        let tol = cfg.entry_tol;
        let mut worst: Option<Rejection> = None;
        for i in 0..n {
            for j in 0..n {
                let v = log[(i, j)];
                if i != j && v < -tol && worst.as_ref().is_none_or(|w| v < w.value) {
                    worst = Some(Rejection {
                        kind: RejectionKind::OffDiagonal,
                        row: i,
                        col: j,
                        value: v,
                        borderline: v >= -BORDERLINE_FACTOR * tol,
                    });
                }
            }
        }
        if worst.is_some() {
            return worst;
        }
        if self == Target::Intensity {
            let row_tol = cfg.row_sum_tol(n);
            for (i, s) in log.row_sums().into_iter().enumerate() {
                if s.abs() > row_tol {
                    return Some(Rejection {
                        kind: RejectionKind::RowSum,
                        row: i,
                        col: i,
                        value: s,
                        borderline: s.abs() <= BORDERLINE_FACTOR * row_tol,
                    });
                }
            }
        }
        let residual = match expm(log) {
            Ok(x) => x.relative_distance(input),
            Err(_) => f64::INFINITY,
        };
        if !(residual <= cfg.recon_tol) {
            return Some(Rejection {
                kind: RejectionKind::Reconstruction,
                row: 0,
                col: 0,
                value: residual,
                borderline: false,
            });
        }
        None
    }
}

struct Rejection {
    kind: RejectionKind,
    row: usize,
    col: usize,
    value: f64,
    borderline: bool,
}

impl Rejection {
    fn into_condition(self, offsets: Vec<i64>) -> FailedCondition {
        FailedCondition::Branch {
            offsets,
            kind: self.kind,
            row: self.row,
            col: self.col,
            value: self.value,
            borderline: self.borderline,
        }
    }
}

enum SearchOutcome {
    Found(Candidate),
    Exhausted,
    Unresolved,
}

struct Search {
    outcome: SearchOutcome,
    examined: u64,
    failures: Vec<FailedCondition>,
    bound: Option<BranchBound>,
}

/// Branch search over the eigendecomposition of `a`.
fn search(
    a: &RealMatrix,
    e: &Eigendecomposition,
    det: f64,
    target: Target,
    mode: BoundMode,
    opts: &EmbedOptions,
    cfg: &ToleranceConfig,
) -> Search {
    let mut failures = Vec::new();
    let mut bound = match branch_bound(e, det, mode) {
        Ok(b) => b,
        Err(error) => {
            return Search {
                outcome: SearchOutcome::Unresolved,
                examined: 0,
                failures: vec![FailedCondition::Numerical { error: error.to_string() }],
                bound: None,
            }
        }
    };
    if target == Target::Intensity {
        let n = a.dim();
        let values = e.eigenvalues().to_vec();
        let emptied = bound.restrict(|j, k| {
            let mu = branch_log(values[j], k);
            in_runnenberg_cone(mu, n)
        });
        if let Some(j) = emptied {
            failures.push(FailedCondition::Runnenberg {
                eigenvalue_index: j,
                eigenvalue: values[j],
            });
            return Search {
                outcome: SearchOutcome::Exhausted,
                examined: 0,
                failures,
                bound: Some(bound),
            };
        }
    }
    let stream = match enumerate_generators(e, &bound, cfg) {
        Ok(s) => s,
        Err(error) => {
            failures.push(FailedCondition::Numerical { error: error.to_string() });
            return Search {
                outcome: SearchOutcome::Unresolved,
                examined: 0,
                failures,
                bound: Some(bound),
            };
        }
    };
    if let Some(j) = stream.blocked_position() {
        failures.push(FailedCondition::NoRealLogarithm {
            eigenvalue_index: j,
            eigenvalue: e.eigenvalues()[j],
        });
        return Search {
            outcome: SearchOutcome::Exhausted,
            examined: 0,
            failures,
            bound: Some(bound),
        };
    }
    if stream.candidate_count() > opts.max_candidates {
        failures.push(FailedCondition::TooManyBranches {
            count: stream.candidate_count(),
            limit: opts.max_candidates,
        });
        return Search {
            outcome: SearchOutcome::Unresolved,
            examined: 0,
            failures,
            bound: Some(bound),
        };
    }

    let mut examined = 0;
    let mut omitted = 0;
    for candidate in stream {
        examined += 1;
        match target.rejection(&candidate.log, a, cfg) {
            None => {
                return Search {
                    outcome: SearchOutcome::Found(candidate),
                    examined,
                    failures,
                    bound: Some(bound),
                }
            }
            Some(r) => {
                if failures.len() < MAX_RECORDED_BRANCHES {
                    failures.push(r.into_condition(candidate.selection.offsets));
                } else {
                    omitted += 1;
                }
            }
        }
    }
    if omitted > 0 {
        failures.push(FailedCondition::BranchesOmitted { count: omitted });
    }
    Search {
        outcome: SearchOutcome::Exhausted,
        examined,
        failures,
        bound: Some(bound),
    }
}

/// Common pipeline shared by both decisions.
struct Decision {
    positive: bool,
    certain: bool,
    method: Method,
    witness: Option<RealMatrix>,
    selection: Option<BranchSelection>,
    examined: u64,
    failures: Vec<FailedCondition>,
    perturbed: Option<RealMatrix>,
    bound: Option<BranchBound>,
}

impl Decision {
    fn negative(method: Method, failures: Vec<FailedCondition>) -> Self {
        Decision {
            positive: false,
            certain: true,
            method,
            witness: None,
            selection: None,
            examined: 0,
            failures,
            perturbed: None,
            bound: None,
        }
    }

    fn unresolved(failures: Vec<FailedCondition>) -> Self {
        Decision {
            certain: false,
            method: Method::Unresolved,
            ..Decision::negative(Method::Unresolved, failures)
        }
    }
}

fn decide(
    a: &RealMatrix,
    target: Target,
    mode: BoundMode,
    opts: &EmbedOptions,
    cfg: &ToleranceConfig,
) -> Decision {
    let det = a.determinant();
    if !(det > 0.0) {
        return Decision::negative(
            Method::Determinant,
            vec![FailedCondition::Determinant { det, boundary: false }],
        );
    }
    if target == Target::Intensity && det <= cfg.entry_tol {
        // a verified generator still settles the question; a failed search
        // this close to singular does not
        let mut d = decide_nonsingular(a, det, target, mode, opts, cfg);
        if !d.positive {
            d.failures
                .insert(0, FailedCondition::Determinant { det, boundary: true });
            d.certain = false;
            d.method = Method::Unresolved;
        }
        return d;
    }
    decide_nonsingular(a, det, target, mode, opts, cfg)
}

fn decide_nonsingular(
    a: &RealMatrix,
    det: f64,
    target: Target,
    mode: BoundMode,
    opts: &EmbedOptions,
    cfg: &ToleranceConfig,
) -> Decision {

    let structure = necessary_conditions(a, cfg);
    if !structure.passed {
        let failures = structure
            .violations
            .into_iter()
            .map(|violation| FailedCondition::Structure { violation })
            .collect();
        return Decision::negative(Method::NecessaryConditions, failures);
    }

    let mut failures = Vec::new();
    let mut examined = 0;
    let principal = logm_principal(a);
    match &principal {
        Ok(log) => {
            examined += 1;
            match target.rejection(log, a, cfg) {
                None => {
                    return Decision {
                        positive: true,
                        certain: true,
                        method: Method::PrincipalLogarithm,
                        witness: Some(log.clone()),
                        selection: Some(BranchSelection::principal(a.dim())),
                        examined,
                        failures,
                        perturbed: None,
                        bound: None,
                    }
                }
                Some(r) => failures.push(r.into_condition(vec![0; a.dim()])),
            }
        }
        Err(Error::NegativeRealEigenvalue(_)) => {}
        Err(error) => failures.push(FailedCondition::Numerical { error: error.to_string() }),
    }

    match eig(a, cfg) {
        Ok(e) => {
            let s = search(a, &e, det, target, mode, opts, cfg);
            failures.extend(s.failures);
            let mut d = Decision {
                positive: false,
                certain: true,
                method: Method::BranchSearch,
                witness: None,
                selection: None,
                examined: examined + s.examined,
                failures,
                perturbed: None,
                bound: s.bound,
            };
            match s.outcome {
                SearchOutcome::Found(c) => {
                    d.positive = true;
                    d.witness = Some(c.log);
                    d.selection = Some(c.selection);
                }
                SearchOutcome::Exhausted => {}
                SearchOutcome::Unresolved => {
                    d.certain = false;
                    d.method = Method::Unresolved;
                }
            }
            d
        }
        Err(error) => {
            if principal.is_ok() && has_unique_real_log(a, cfg) {
                let mut d = Decision::negative(Method::UniqueRealLogarithm, failures);
                d.examined = examined;
                return d;
            }
            failures.push(FailedCondition::Numerical { error: error.to_string() });
            if !opts.allow_perturb {
                let mut d = Decision::unresolved(failures);
                d.examined = examined;
                return d;
            }
            let perturbed = match perturb_distinct(a, cfg) {
                Ok(p) => p,
                Err(error) => {
                    failures.push(FailedCondition::Numerical { error: error.to_string() });
                    let mut d = Decision::unresolved(failures);
                    d.examined = examined;
                    return d;
                }
            };
            let inner = decide_distinct(&perturbed, target, mode, opts, cfg);
            failures.extend(inner.failures);
            Decision {
                positive: inner.positive,
                certain: false,
                method: Method::Perturbation,
                witness: inner.witness,
                selection: inner.selection,
                examined: examined + inner.examined,
                failures,
                perturbed: Some(perturbed),
                bound: inner.bound,
            }
        }
    }
}

/// Branch search on a matrix already known to have distinct eigenvalues.
fn decide_distinct(
    a: &RealMatrix,
    target: Target,
    mode: BoundMode,
    opts: &EmbedOptions,
    cfg: &ToleranceConfig,
) -> Decision {
    let det = a.determinant();
    let e = match eig(a, cfg) {
        Ok(e) => e,
        Err(error) => return Decision::unresolved(vec![FailedCondition::Numerical { error: error.to_string() }]),
    };
    let s = search(a, &e, det, target, mode, opts, cfg);
    let (positive, witness, selection) = match s.outcome {
        SearchOutcome::Found(c) => (true, Some(c.log), Some(c.selection)),
        _ => (false, None, None),
    };
    Decision {
        positive,
        certain: false,
        method: Method::Perturbation,
        witness,
        selection,
        examined: s.examined,
        failures: s.failures,
        perturbed: None,
        bound: s.bound,
    }
}

fn validate_stochastic(p: &RealMatrix, cfg: &ToleranceConfig) -> Result<()> {
    let n = p.dim();
    for i in 0..n {
        for j in 0..n {
            if p[(i, j)] < -cfg.entry_tol {
                return Err(Error::NotStochastic(format!(
                    "entry ({i}, {j}) is {}",
                    p[(i, j)]
                )));
            }
        }
    }
    let tol = cfg.row_sum_tol(n);
    for (i, s) in p.row_sums().into_iter().enumerate() {
        if (s - 1.0).abs() > tol {
            return Err(Error::NotStochastic(format!("row {i} sums to {s}")));
        }
    }
    Ok(())
}

/// Whether the stochastic matrix `p` is the exponential of an intensity
/// matrix, with default options.
pub fn check_embeddable(p: &RealMatrix, cfg: &ToleranceConfig) -> Result<EmbeddabilityReport> {
    check_embeddable_with(p, cfg, &EmbedOptions::default())
}

pub fn check_embeddable_with(
    p: &RealMatrix,
    cfg: &ToleranceConfig,
    opts: &EmbedOptions,
) -> Result<EmbeddabilityReport> {
    cfg.validate()?;
    validate_stochastic(p, cfg)?;
    let d = decide(p, Target::Intensity, opts.bound_mode, opts, cfg);
    let verdict = embed_verdict(&d);
    let two_sided_verdict = (opts.bound_mode != BoundMode::IsraelTwoSided).then(|| {
        let d = decide(p, Target::Intensity, BoundMode::IsraelTwoSided, opts, cfg);
        embed_verdict(&d)
    });
    Ok(EmbeddabilityReport {
        verdict,
        method: d.method,
        generator: d.witness,
        selection: d.selection,
        determinant: p.determinant(),
        branches_examined: d.examined,
        failed_conditions: d.failures,
        perturbed: d.perturbed.is_some(),
        perturbed_input: d.perturbed,
        bound_used: d.bound,
        two_sided_verdict,
    })
}

fn embed_verdict(d: &Decision) -> EmbedVerdict {
    match (d.positive, d.certain) {
        (true, true) => EmbedVerdict::Embeddable,
        (false, true) => EmbedVerdict::NotEmbeddable,
        _ => EmbedVerdict::Undetermined,
    }
}

/// Whether the nonnegative matrix `b` equals `exp(-Q)` for a Z-matrix `Q`
/// (equivalently: `det b > 0` and `b` has nonnegative roots of every order).
pub fn check_strong_inf_divisible(b: &RealMatrix, cfg: &ToleranceConfig) -> Result<DivisibilityReport> {
    check_strong_inf_divisible_with(b, cfg, &EmbedOptions::default())
}

pub fn check_strong_inf_divisible_with(
    b: &RealMatrix,
    cfg: &ToleranceConfig,
    opts: &EmbedOptions,
) -> Result<DivisibilityReport> {
    cfg.validate()?;
    let n = b.dim();
    for i in 0..n {
        for j in 0..n {
            if b[(i, j)] < -cfg.entry_tol {
                return Err(Error::NotNonnegative {
                    row: i,
                    col: j,
                    value: b[(i, j)],
                });
            }
        }
    }
    let mode = match opts.bound_mode {
        BoundMode::IsraelTwoSided => BoundMode::Theorem4General,
        m => m,
    };
    let d = decide(b, Target::NegatedZ, mode, opts, cfg);
    let mut verdict = match (d.positive, d.certain) {
        (true, true) => DivisibilityVerdict::StronglyInfDivisible,
        (false, true) => DivisibilityVerdict::NotStronglyInfDivisible,
        _ => DivisibilityVerdict::Undetermined,
    };
    let mut failures = d.failures;
    let z_matrix = d.witness.map(|log| log.neg());

    let mut roots = Vec::new();
    if let Some(q) = z_matrix.as_ref().filter(|_| d.perturbed.is_none()) {
        for &k in &opts.roots {
            match demonstrate_root(b, q, k) {
                Ok(demo) => {
                    let ok = demo.min_entry >= -cfg.entry_tol && demo.residual <= ROOT_RECON_TOL;
                    if !ok {
                        failures.push(FailedCondition::Root {
                            n: k,
                            min_entry: demo.min_entry,
                            residual: demo.residual,
                        });
                        verdict = DivisibilityVerdict::Undetermined;
                    }
                    roots.push(demo);
                }
                Err(error) => {
                    failures.push(FailedCondition::Numerical { error: error.to_string() });
                    verdict = DivisibilityVerdict::Undetermined;
                }
            }
        }
    }

    let mut recursion = Vec::new();
    if opts.recurse && verdict == DivisibilityVerdict::StronglyInfDivisible {
        let nested = EmbedOptions {
            recurse: false,
            ..opts.clone()
        };
        let form = frobenius_form(b, cfg);
        for k in 1..form.num_blocks() {
            let t = trailing_submatrix(&form, k)?;
            recursion.push(TrailingReport {
                blocks_removed: k,
                report: check_strong_inf_divisible_with(&t, cfg, &nested)?,
            });
        }
    }

    Ok(DivisibilityReport {
        verdict,
        method: d.method,
        z_matrix,
        selection: d.selection,
        determinant: b.determinant(),
        roots_demonstrated: roots,
        recursion,
        branches_examined: d.examined,
        failed_conditions: failures,
        perturbed: d.perturbed.is_some(),
        perturbed_input: d.perturbed,
        bound_used: d.bound,
    })
}

/// `exp(-Q / n)` and how well its `n`th power reproduces `b`.
pub fn demonstrate_root(b: &RealMatrix, q: &RealMatrix, n: u32) -> Result<RootDemonstration> {
    if n == 0 {
        return Err(Error::OutOfRange { index: 0, limit: 1 });
    }
    let root = expm(&q.scale(-1.0 / n as f64)?)?;
    let min_entry = root.as_matrix().min();
    let residual = root.pow(n)?.relative_distance(b);
    Ok(RootDemonstration {
        n,
        root,
        min_entry,
        residual,
    })
}
