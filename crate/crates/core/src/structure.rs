//! Zero-pattern structure: Frobenius normal form, trailing submatrices and
//! the logarithm-free necessary conditions for infinite divisibility.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use nalgebra::DMatrix;
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::{expm, RealMatrix, ToleranceConfig};

/// `U = L^T B L` with `L` a permutation matrix, `U` block upper triangular
/// and every diagonal block irreducible (or 1x1).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructureDecomposition {
    /// `u[(i, j)] = b[(permutation[i], permutation[j])]`.
    pub permutation: Vec<usize>,
    pub block_sizes: Vec<usize>,
    pub u: RealMatrix,
    pub diagonal_blocks: Vec<RealMatrix>,
}

impl StructureDecomposition {
    pub fn num_blocks(&self) -> usize {
        self.block_sizes.len()
    }

    /// The permutation matrix `L`, with `L[(permutation[i], i)] = 1`.
    pub fn permutation_matrix(&self) -> RealMatrix {
        let n = self.permutation.len();
        let mut l = DMatrix::zeros(n, n);
        for (i, &p) in self.permutation.iter().enumerate() {
            l[(p, i)] = 1.0;
        }
        RealMatrix::new(l).expect("permutation matrix is finite")
    }

    /// `L U L^T`, computed by moving entries back without arithmetic.
    pub fn reconstruct(&self) -> RealMatrix {
        let n = self.permutation.len();
        let mut inverse = vec![0; n];
        for (i, &p) in self.permutation.iter().enumerate() {
            inverse[p] = i;
        }
        self.u.permuted(&inverse)
    }

    fn block_start(&self, block: usize) -> usize {
        self.block_sizes[..block].iter().sum()
    }
}

/// Frobenius normal form from the strongly connected components of the
/// zero pattern `{(i, j) : i != j, |b_ij| > entry_tol}`.
///
/// Components are ordered topologically so that every edge points from an
/// earlier block to a later one; among components that are free at the same
/// time the one with the smallest original index goes first. Indices within
/// a component keep ascending order.
pub fn frobenius_form(b: &RealMatrix, cfg: &ToleranceConfig) -> StructureDecomposition {
    let n = b.dim();
    let components = components(b, cfg.entry_tol);
    let count = components.len();

    let mut owner = vec![0; n];
    for (c, members) in components.iter().enumerate() {
        for &i in members {
            owner[i] = c;
        }
    }
    let mut successors = vec![Vec::new(); count];
    let mut indegree = vec![0usize; count];
    for i in 0..n {
        for j in 0..n {
            let (ci, cj) = (owner[i], owner[j]);
            if ci != cj && b[(i, j)].abs() > cfg.entry_tol && !successors[ci].contains(&cj) {
                successors[ci].push(cj);
                indegree[cj] += 1;
            }
        }
    }

    let mut ready: BinaryHeap<Reverse<(usize, usize)>> = (0..count)
        .filter(|&c| indegree[c] == 0)
        .map(|c| Reverse((components[c][0], c)))
        .collect();
    let mut permutation = Vec::with_capacity(n);
    let mut block_sizes = Vec::with_capacity(count);
    while let Some(Reverse((_, c))) = ready.pop() {
        permutation.extend_from_slice(&components[c]);
        block_sizes.push(components[c].len());
        for &s in &successors[c] {
            indegree[s] -= 1;
            if indegree[s] == 0 {
                ready.push(Reverse((components[s][0], s)));
            }
        }
    }

    let u = b.permuted(&permutation);
    let mut diagonal_blocks = Vec::with_capacity(count);
    let mut start = 0;
    for &size in &block_sizes {
        let idx: Vec<usize> = (start..start + size).collect();
        diagonal_blocks.push(u.submatrix(&idx));
        start += size;
    }
    StructureDecomposition {
        permutation,
        block_sizes,
        u,
        diagonal_blocks,
    }
}

/// `U^(n)`: `U` with its first `n` blocks of rows and columns removed.
/// Valid for `n` below the number of blocks; `n = 0` gives `U`.
pub fn trailing_submatrix(d: &StructureDecomposition, n: usize) -> Result<RealMatrix> {
    if n >= d.num_blocks() {
        return Err(Error::OutOfRange {
            index: n,
            limit: d.num_blocks().saturating_sub(1),
        });
    }
    let start = d.block_start(n);
    let idx: Vec<usize> = (start..d.u.dim()).collect();
    Ok(d.u.submatrix(&idx))
}

/// Ok when the zero-pattern digraph is strongly connected, otherwise a pair
/// `(from, to)` with `to` unreachable from `from`.
pub(crate) fn strongly_connected(a: &RealMatrix, tol: f64) -> std::result::Result<(), (usize, usize)> {
    let n = a.dim();
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(i) = stack.pop() {
        for j in 0..n {
            if !seen[j] && i != j && a[(i, j)].abs() > tol {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    if let Some(to) = seen.iter().position(|s| !s) {
        return Err((0, to));
    }
    // reverse reachability to node 0
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(j) = stack.pop() {
        for i in 0..n {
            if !seen[i] && i != j && a[(i, j)].abs() > tol {
                seen[i] = true;
                stack.push(i);
            }
        }
    }
    match seen.iter().position(|s| !s) {
        Some(from) => Err((from, 0)),
        None => Ok(()),
    }
}

fn components(b: &RealMatrix, tol: f64) -> Vec<Vec<usize>> {
    let n = b.dim();
    let mut graph = DiGraph::<(), ()>::with_capacity(n, n * n);
    let nodes: Vec<_> = (0..n).map(|_| graph.add_node(())).collect();
    for i in 0..n {
        for j in 0..n {
            if i != j && b[(i, j)].abs() > tol {
                graph.add_edge(nodes[i], nodes[j], ());
            }
        }
    }
    tarjan_scc(&graph)
        .into_iter()
        .map(|c| {
            let mut members: Vec<usize> = c.into_iter().map(|v| v.index()).collect();
            members.sort_unstable();
            members
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternViolation {
    pub row: usize,
    pub col: usize,
    pub power: usize,
}

/// For every off-diagonal structural zero `B_ij`, checks that
/// `((theta I - Q)^m)_ij` vanishes for `m = 1..n-1`, where `theta` makes
/// `theta I - Q` nonnegative. Higher powers add no new paths.
pub fn zero_pattern_invariance(
    b: &RealMatrix,
    q: &RealMatrix,
    cfg: &ToleranceConfig,
) -> Result<Vec<PatternViolation>> {
    let n = b.dim();
    if q.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: q.dim(),
        });
    }
    let residual = expm(&q.neg())?.relative_distance(b);
    if !(residual <= cfg.recon_tol) {
        return Err(Error::NotAValidPair { residual });
    }

    let qm = q.as_matrix();
    let theta = (0..n).map(|i| qm[(i, i)]).fold(0.0, f64::max);
    let shifted = DMatrix::identity(n, n) * theta - qm;
    let scale = shifted.amax().max(f64::MIN_POSITIVE);
    let step = shifted / scale;

    let zeros: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| i != j && b[(i, j)].abs() <= cfg.entry_tol)
        .collect();
    let mut violations = Vec::new();
    let mut power = DMatrix::identity(n, n);
    for m in 1..n.max(2) {
        power = &power * &step;
        for &(i, j) in &zeros {
            if power[(i, j)] > cfg.entry_tol {
                violations.push(PatternViolation {
                    row: i,
                    col: j,
                    power: m,
                });
            }
        }
    }
    Ok(violations)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    PositiveDiagonal,
    IrreducibleImpliesPositive,
    DiagonalBlocksPositive,
    TrailingSubmatricesRecursive,
    ZeroPatternTransitive,
}

impl Condition {
    pub const ALL: [Condition; 5] = [
        Condition::PositiveDiagonal,
        Condition::IrreducibleImpliesPositive,
        Condition::DiagonalBlocksPositive,
        Condition::TrailingSubmatricesRecursive,
        Condition::ZeroPatternTransitive,
    ];
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "at", rename_all = "snake_case")]
pub enum Location {
    /// Entry in original (unpermuted) indices.
    Entry { row: usize, col: usize },
    Block { index: usize, row: usize, col: usize },
    Trailing { blocks_removed: usize, determinant: f64 },
    Whole,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub condition: Condition,
    pub location: Location,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NecessaryConditionReport {
    pub passed: bool,
    pub violations: Vec<Violation>,
    pub conditions_checked: Vec<Condition>,
}

/// Checks the structural necessary conditions for strong infinite
/// divisibility without computing a logarithm:
///
/// 1. the diagonal is strictly positive;
/// 2. an irreducible matrix is strictly positive;
/// 3. every diagonal block of the Frobenius form is strictly positive;
/// 4. every trailing submatrix `U^(n)` has positive determinant and passes 1-3;
/// 5. `B_ij > 0` and `B_jk > 0` imply `B_ik > 0` for `i != k`.
pub fn necessary_conditions(b: &RealMatrix, cfg: &ToleranceConfig) -> NecessaryConditionReport {
    let tol = cfg.entry_tol;
    let n = b.dim();
    let mut violations = Vec::new();

    let decomposition = frobenius_form(b, cfg);
    basic_conditions(b, &decomposition, tol, &mut violations);

    for k in 1..decomposition.num_blocks() {
        let trailing = trailing_submatrix(&decomposition, k).expect("k below block count");
        let det = trailing.determinant();
        if !(det > 0.0) {
            violations.push(Violation {
                condition: Condition::TrailingSubmatricesRecursive,
                location: Location::Trailing {
                    blocks_removed: k,
                    determinant: det,
                },
            });
        }
        let inner = frobenius_form(&trailing, cfg);
        let mut nested = Vec::new();
        basic_conditions(&trailing, &inner, tol, &mut nested);
        if !nested.is_empty() {
            violations.push(Violation {
                condition: Condition::TrailingSubmatricesRecursive,
                location: Location::Trailing {
                    blocks_removed: k,
                    determinant: det,
                },
            });
        }
    }

    for i in 0..n {
        for k in 0..n {
            if i == k || b[(i, k)] > tol {
                continue;
            }
            let bridged = (0..n).any(|j| j != i && j != k && b[(i, j)] > tol && b[(j, k)] > tol);
            if bridged {
                violations.push(Violation {
                    condition: Condition::ZeroPatternTransitive,
                    location: Location::Entry { row: i, col: k },
                });
            }
        }
    }

    NecessaryConditionReport {
        passed: violations.is_empty(),
        violations,
        conditions_checked: Condition::ALL.to_vec(),
    }
}

fn basic_conditions(
    b: &RealMatrix,
    d: &StructureDecomposition,
    tol: f64,
    out: &mut Vec<Violation>,
) {
    let n = b.dim();
    for i in 0..n {
        if b[(i, i)] <= tol {
            out.push(Violation {
                condition: Condition::PositiveDiagonal,
                location: Location::Entry { row: i, col: i },
            });
        }
    }
    if d.num_blocks() == 1 {
        if let Some((i, j)) = first_nonpositive(b, tol) {
            out.push(Violation {
                condition: Condition::IrreducibleImpliesPositive,
                location: Location::Entry { row: i, col: j },
            });
        }
    }
    for (index, block) in d.diagonal_blocks.iter().enumerate() {
        if let Some((row, col)) = first_nonpositive(block, tol) {
            out.push(Violation {
                condition: Condition::DiagonalBlocksPositive,
                location: Location::Block { index, row, col },
            });
        }
    }
}

fn first_nonpositive(a: &RealMatrix, tol: f64) -> Option<(usize, usize)> {
    let n = a.dim();
    (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .find(|&ij| a[ij] <= tol)
}

/// `L^-1 B L` for a strictly positive monomial `L`, with `L^-1` taken
/// exactly from the monomial structure.
pub fn monomial_conjugate(b: &RealMatrix, l: &RealMatrix, cfg: &ToleranceConfig) -> Result<RealMatrix> {
    let n = b.dim();
    if l.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: l.dim(),
        });
    }
    let (target, weight) = monomial_structure(l, cfg.entry_tol)?;
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            out[(target[i], target[j])] = b[(i, j)] * weight[j] / weight[i];
        }
    }
    RealMatrix::new(out)
}

/// For each row `i`, the column holding its positive entry and that entry.
pub fn monomial_structure(l: &RealMatrix, tol: f64) -> Result<(Vec<usize>, Vec<f64>)> {
    let n = l.dim();
    let mut target = Vec::with_capacity(n);
    let mut weight = Vec::with_capacity(n);
    let mut column_used = vec![false; n];
    for i in 0..n {
        let mut found = None;
        for j in 0..n {
            let x = l[(i, j)];
            if x < -tol {
                return Err(Error::NotMonomial(format!("negative entry at ({i}, {j})")));
            }
            if x > tol {
                if found.is_some() {
                    return Err(Error::NotMonomial(format!("row {i} has several nonzeros")));
                }
                found = Some(j);
            }
        }
        let j = found.ok_or_else(|| Error::NotMonomial(format!("row {i} is zero")))?;
        if column_used[j] {
            return Err(Error::NotMonomial(format!("column {j} has several nonzeros")));
        }
        column_used[j] = true;
        target.push(j);
        weight.push(l[(i, j)]);
    }
    Ok((target, weight))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn cfg() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    #[test]
    fn positive_matrix_is_one_block() {
        let b = RealMatrix::from_rows(&[[0.2, 0.3, 0.5], [0.1, 0.1, 0.8], [0.4, 0.4, 0.2]]).unwrap();
        let d = frobenius_form(&b, &cfg());
        assert_eq!(d.block_sizes, vec![3]);
        assert_eq!(d.permutation, vec![0, 1, 2]);
        assert_eq!(d.reconstruct(), b);
    }

    #[test]
    fn e1_splits_into_singletons() {
        let d = frobenius_form(&fixtures::e1(), &cfg());
        assert_eq!(d.block_sizes, vec![1, 1, 1]);
        assert_eq!(d.permutation, vec![0, 1, 2]);
    }

    #[test]
    fn lower_triangular_is_swapped() {
        let b = RealMatrix::from_rows(&[[1.0, 0.0], [1.0, 1.0]]).unwrap();
        let d = frobenius_form(&b, &cfg());
        assert_eq!(d.permutation, vec![1, 0]);
        assert_eq!(d.u, RealMatrix::from_rows(&[[1.0, 1.0], [0.0, 1.0]]).unwrap());
        let l = d.permutation_matrix();
        let via_l = l.transpose().matmul(&b).unwrap().matmul(&l).unwrap();
        assert_eq!(via_l, d.u);
        assert_eq!(d.reconstruct(), b);
    }

    #[test]
    fn incomparable_components_order_by_min_index() {
        // 0 <-> 2 and 1 are unrelated
        let b = RealMatrix::from_rows(&[[1.0, 0.0, 1.0], [0.0, 1.0, 0.0], [1.0, 0.0, 1.0]]).unwrap();
        let d = frobenius_form(&b, &cfg());
        assert_eq!(d.permutation, vec![0, 2, 1]);
        assert_eq!(d.block_sizes, vec![2, 1]);
    }

    #[test]
    fn trailing_submatrices() {
        let d = frobenius_form(&fixtures::e1(), &cfg());
        assert_eq!(trailing_submatrix(&d, 0).unwrap(), d.u);
        let last = trailing_submatrix(&d, 2).unwrap();
        assert_eq!(last, d.diagonal_blocks[2]);
        let t = trailing_submatrix(&d, 1).unwrap();
        assert_eq!(t.dim(), 2);
        assert!((t[(0, 0)] - 0.368).abs() < 5e-4);
        assert!((t[(0, 1)] - 0.632).abs() < 5e-4);
        assert_eq!(t[(1, 0)], 0.0);
        assert_eq!(t[(1, 1)], 1.0);
        assert!(matches!(
            trailing_submatrix(&d, 3),
            Err(Error::OutOfRange { index: 3, .. })
        ));
    }

    #[test]
    fn pattern_invariance_examples() {
        let e1 = fixtures::e1();
        let q = fixtures::z1().neg();
        assert!(zero_pattern_invariance(&e1, &q, &cfg()).unwrap().is_empty());

        let b = RealMatrix::from_rows(&[[0.5, 0.5], [0.5, 0.5]]).unwrap();
        let b = expm(&b).unwrap();
        let q = RealMatrix::from_rows(&[[-0.5, -0.5], [-0.5, -0.5]]).unwrap();
        assert!(zero_pattern_invariance(&b, &q, &cfg()).unwrap().is_empty());

        let id = RealMatrix::identity(2);
        let q = RealMatrix::from_rows(&[[1.0, -1.0], [0.0, 1.0]]).unwrap();
        match zero_pattern_invariance(&id, &q, &cfg()) {
            Err(Error::NotAValidPair { .. }) => {}
            Ok(v) => assert!(v.contains(&PatternViolation { row: 0, col: 1, power: 1 })),
            Err(e) => panic!("{e}"),
        }
    }

    #[test]
    fn pattern_violation_is_reported() {
        // the pair is valid but B is given a zero where exp(-Q) is tiny
        let q = RealMatrix::from_rows(&[[1.0, -1e-12], [0.0, 1.0]]).unwrap();
        let mut b = expm(&q.neg()).unwrap().into_inner();
        b[(0, 1)] = 0.0;
        let b = RealMatrix::new(b).unwrap();
        let v = zero_pattern_invariance(&b, &q, &ToleranceConfig::default().with_entry_tol(1e-14)).unwrap();
        assert_eq!(v, vec![PatternViolation { row: 0, col: 1, power: 1 }]);
    }

    #[test]
    fn necessary_condition_examples() {
        let r = necessary_conditions(&RealMatrix::from_rows(&[[1.0, 1.0], [1.0, 0.0]]).unwrap(), &cfg());
        assert!(!r.passed);
        assert!(r
            .violations
            .iter()
            .any(|v| v.condition == Condition::PositiveDiagonal));

        let b = RealMatrix::from_rows(&[[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.0, 0.0, 1.0]]).unwrap();
        let r = necessary_conditions(&b, &cfg());
        assert_eq!(
            r.violations,
            vec![Violation {
                condition: Condition::ZeroPatternTransitive,
                location: Location::Entry { row: 0, col: 2 },
            }]
        );

        let r = necessary_conditions(&fixtures::e1(), &cfg());
        assert!(r.passed, "{:?}", r.violations);
        assert_eq!(r.conditions_checked.len(), 5);
    }

    #[test]
    fn irreducible_with_zero_fails() {
        let b = RealMatrix::from_rows(&[[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]]).unwrap();
        let r = necessary_conditions(&b, &cfg());
        assert!(r
            .violations
            .iter()
            .any(|v| v.condition == Condition::IrreducibleImpliesPositive));
    }

    #[test]
    fn singular_trailing_block_fails() {
        // trailing 2x2 block [[1, 1], [1, 1]] is singular
        let b = RealMatrix::from_rows(&[[1.0, 1.0, 1.0], [0.0, 1.0, 1.0], [0.0, 1.0, 1.0]]).unwrap();
        let r = necessary_conditions(&b, &cfg());
        assert!(r
            .violations
            .iter()
            .any(|v| v.condition == Condition::TrailingSubmatricesRecursive));
    }

    #[test]
    fn monomial_examples() {
        let e1 = fixtures::e1();
        assert_eq!(monomial_conjugate(&e1, &RealMatrix::identity(3), &cfg()).unwrap(), e1);

        let swap = RealMatrix::from_rows(&[[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]]).unwrap();
        let c = monomial_conjugate(&e1, &swap, &cfg()).unwrap();
        assert_eq!(c, e1.permuted(&[1, 0, 2]));

        let d = RealMatrix::from_diagonal(&[2.0, 1.0, 1.0]);
        let c = monomial_conjugate(&e1, &d, &cfg()).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expected = match (i, j) {
                    (0, 0) => e1[(0, 0)],
                    (0, _) => e1[(0, j)] / 2.0,
                    (_, 0) => e1[(i, 0)] * 2.0,
                    _ => e1[(i, j)],
                };
                assert_eq!(c[(i, j)], expected);
            }
        }
        let direct = d.inverse().unwrap().matmul(&e1).unwrap().matmul(&d).unwrap();
        assert!(c.relative_distance(&direct) < 1e-15);
    }

    #[test]
    fn non_monomial_is_rejected() {
        let l = RealMatrix::from_rows(&[[1.0, 1.0], [0.0, 1.0]]).unwrap();
        assert!(matches!(
            monomial_conjugate(&RealMatrix::identity(2), &l, &cfg()),
            Err(Error::NotMonomial(_))
        ));
        let l = RealMatrix::from_rows(&[[1.0, 0.0], [1.0, 0.0]]).unwrap();
        assert!(matches!(
            monomial_conjugate(&RealMatrix::identity(2), &l, &cfg()),
            Err(Error::NotMonomial(_))
        ));
    }
}
