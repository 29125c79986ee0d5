//! Vertex enumeration of the transportation polytope, used as an oracle for
//! the simplex solver on small supports.

use num_traits::{Signed, Zero};

use super::transport::{Method, Problem, TransportResult};
use super::ExtMetric;
use crate::error::{Error, Result};
use crate::measures::FinMeasure;
use crate::rational::Rational;

/// Largest support size on either side.
pub const BRUTE_FORCE_LIMIT: usize = 4;

/// Every vertex comes from a spanning-tree basis of `n + m - 1` cells; the
/// basis determines the flow by peeling leaves. The cheapest feasible one wins.
pub fn brute_force_wasserstein(
    p: &FinMeasure,
    q: &FinMeasure,
    metric: &ExtMetric,
) -> Result<TransportResult> {
    let problem = Problem::new(p, q, metric)?;
    let (n, m) = (problem.rows.len(), problem.cols.len());
    if n > BRUTE_FORCE_LIMIT || m > BRUTE_FORCE_LIMIT {
        return Err(Error::SupportTooLarge(n, m));
    }
    let supply: Vec<Rational> = problem.rows.iter().map(|(_, w)| w.clone()).collect();
    let demand: Vec<Rational> = problem.cols.iter().map(|(_, w)| w.clone()).collect();
    let cells = n * m;
    let mut best: Option<(super::transport::Lex, Vec<Vec<Rational>>)> = None;
    for mask in 0u32..(1 << cells) {
        if mask.count_ones() as usize != n + m - 1 {
            continue;
        }
        let chosen: Vec<(usize, usize)> = (0..cells)
            .filter(|k| mask >> k & 1 == 1)
            .map(|k| (k / m, k % m))
            .collect();
        let Some(flow) = basis_flow(&chosen, &supply, &demand) else {
            continue;
        };
        let total = problem.total(&flow);
        if best.as_ref().is_none_or(|(b, _)| total < *b) {
            best = Some((total, flow));
        }
    }
    let (_, flow) = best.expect("the northwest-corner vertex is always feasible");
    Ok(problem.finish(&flow, Method::Brute))
}

/// Flow determined by a basis, or `None` if the cells contain a cycle or the
/// flow goes negative.
fn basis_flow(
    cells: &[(usize, usize)],
    supply: &[Rational],
    demand: &[Rational],
) -> Option<Vec<Vec<Rational>>> {
    let (n, m) = (supply.len(), demand.len());
    let mut residual: Vec<Rational> = supply.iter().chain(demand).cloned().collect();
    let mut flow = vec![vec![Rational::zero(); m]; n];
    let mut live: Vec<(usize, usize)> = cells.to_vec();
    while !live.is_empty() {
        let degree = |node: usize, live: &[(usize, usize)]| {
            live.iter()
                .filter(|&&(i, j)| i == node || n + j == node)
                .count()
        };
        // a forest always has a leaf; none means a cycle
        let (k, leaf) = live.iter().enumerate().find_map(|(k, &(i, j))| {
            if degree(i, &live) == 1 {
                Some((k, i))
            } else if degree(n + j, &live) == 1 {
                Some((k, n + j))
            } else {
                None
            }
        })?;
        let (i, j) = live.swap_remove(k);
        let amount = residual[leaf].clone();
        if amount.is_negative() {
            return None;
        }
        flow[i][j] = amount.clone();
        residual[i] -= &amount;
        residual[n + j] -= &amount;
    }
    residual.iter().all(|r| r.is_zero()).then_some(flow)
}
