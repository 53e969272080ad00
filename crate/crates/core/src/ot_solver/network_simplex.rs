//! Primal network simplex for uncapacitated min-cost flow with integer supplies and
//! floating-point costs.
//!
//! The basis is a spanning tree rooted at an artificial node, stored with parent,
//! thread (preorder) and subtree-size arrays so that pivots cost time proportional to
//! the part of the tree that moves. Leaving arcs are chosen so the tree stays strongly
//! feasible, which rules out cycling under degenerate pivots. Arc `k < node_count` is the
//! artificial arc of node `k`; real arcs follow and may be appended between runs.

use crate::{Error, Result};

const NONE: usize = usize::MAX;
const UP: i8 = 1;
const DOWN: i8 = -1;
const STATE_TREE: i8 = 0;
const STATE_LOWER: i8 = 1;

/// Entering-arc selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PivotRule {
    /// First eligible arc in index order.
    Bland,
    /// Most negative reduced cost within a rotating block of about `√arcs` arcs.
    #[default]
    BlockSearch,
}

pub(crate) struct NetworkSimplex {
    node_count: usize,
    root: usize,
    source: Vec<u32>,
    target: Vec<u32>,
    cost: Vec<f64>,
    flow: Vec<i64>,
    state: Vec<i8>,
    parent: Vec<usize>,
    pred: Vec<usize>,
    pred_dir: Vec<i8>,
    thread: Vec<usize>,
    rev_thread: Vec<usize>,
    succ_num: Vec<usize>,
    last_succ: Vec<usize>,
    pi: Vec<f64>,
    tolerance: f64,
    next_arc: usize,
    dirty_revs: Vec<usize>,
    pivots: u64,
}

struct Pivot {
    in_arc: usize,
    join: usize,
    u_in: usize,
    v_in: usize,
    u_out: usize,
    delta: i64,
}

impl NetworkSimplex {
    /// `supply[v] > 0` for sources, `< 0` for sinks; supplies must sum to zero.
    /// `cost_bound` bounds every arc cost that will ever be added.
    pub(crate) fn new(supply: &[i64], cost_bound: f64) -> Self {
        let n = supply.len();
        let root = n;
        let art_cost = (cost_bound.max(0.0) + 1.0) * (n as f64 + 1.0);
        let mut s = Self {
            node_count: n,
            root,
            source: Vec::with_capacity(n),
            target: Vec::with_capacity(n),
            cost: Vec::with_capacity(n),
            flow: Vec::with_capacity(n),
            state: Vec::with_capacity(n),
            parent: vec![root; n + 1],
            pred: (0..=n).collect(),
            pred_dir: vec![UP; n + 1],
            thread: (1..=n + 1).collect(),
            rev_thread: vec![0; n + 1],
            succ_num: vec![1; n + 1],
            last_succ: (0..=n).collect(),
            pi: vec![0.0; n + 1],
            tolerance: 64.0 * f64::EPSILON * art_cost,
            next_arc: n,
            dirty_revs: Vec::new(),
            pivots: 0,
        };
        s.parent[root] = NONE;
        s.pred[root] = NONE;
        s.thread[root] = 0;
        s.succ_num[root] = n + 1;
        s.last_succ[root] = if n == 0 { root } else { n - 1 };
        for u in 0..n {
            s.rev_thread[u + 1] = u;
            if supply[u] >= 0 {
                s.pred_dir[u] = UP;
                s.source.push(u as u32);
                s.target.push(root as u32);
                s.flow.push(supply[u]);
                s.cost.push(0.0);
            } else {
                s.pred_dir[u] = DOWN;
                s.pi[u] = art_cost;
                s.source.push(root as u32);
                s.target.push(u as u32);
                s.flow.push(-supply[u]);
                s.cost.push(art_cost);
            }
            s.state.push(STATE_TREE);
        }
        if n > 0 {
            s.thread[n - 1] = root;
            s.rev_thread[0] = root;
        }
        s
    }

    pub(crate) fn add_arc(&mut self, from: usize, to: usize, cost: f64) {
        self.source.push(from as u32);
        self.target.push(to as u32);
        self.cost.push(cost);
        self.flow.push(0);
        self.state.push(STATE_LOWER);
    }

    pub(crate) fn arc_count(&self) -> usize {
        self.source.len() - self.node_count
    }

    pub(crate) fn pivots(&self) -> u64 {
        self.pivots
    }

    pub(crate) fn tolerance(&self) -> f64 {
        self.tolerance
    }

    /// Iterates over real arcs with positive flow as `(from, to, flow)`.
    pub(crate) fn flows(&self) -> impl Iterator<Item = (usize, usize, i64)> + '_ {
        (self.node_count..self.source.len())
            .filter(move |&e| self.flow[e] > 0)
            .map(move |e| (self.source[e] as usize, self.target[e] as usize, self.flow[e]))
    }

    /// Total flow still routed through the artificial root.
    pub(crate) fn artificial_flow(&self) -> i64 {
        self.flow[..self.node_count].iter().sum()
    }

    /// Node potentials with `cost + π[from] − π[to] ≥ 0` on every arc at optimality.
    pub(crate) fn potentials(&self) -> &[f64] {
        &self.pi[..self.node_count]
    }

    fn reduced_cost(&self, e: usize) -> f64 {
        self.cost[e] + self.pi[self.source[e] as usize] - self.pi[self.target[e] as usize]
    }

    /// Recomputes all potentials from the tree, discarding accumulated rounding.
    pub(crate) fn recompute_potentials(&mut self) {
        self.pi[self.root] = 0.0;
        let mut u = self.thread[self.root];
        while u != self.root {
            let e = self.pred[u];
            let p = self.parent[u];
            self.pi[u] = if self.pred_dir[u] == UP {
                self.pi[p] - self.cost[e]
            } else {
                self.pi[p] + self.cost[e]
            };
            u = self.thread[u];
        }
    }

    fn find_entering(&mut self, rule: PivotRule) -> Option<usize> {
        let first = self.node_count;
        let end = self.source.len();
        if end == first {
            return None;
        }
        let tol = -self.tolerance;
        match rule {
            PivotRule::Bland => (first..end).find(|&e| self.state[e] == STATE_LOWER && self.reduced_cost(e) < tol),
            PivotRule::BlockSearch => {
                let arcs = end - first;
                let block = ((arcs as f64).sqrt().ceil() as usize).max(10);
                let mut best = tol;
                let mut best_arc = None;
                let mut count = block;
                if self.next_arc < first || self.next_arc >= end {
                    self.next_arc = first;
                }
                let start = self.next_arc;
                let mut e = start;
                loop {
                    if self.state[e] == STATE_LOWER {
                        let c = self.reduced_cost(e);
                        if c < best {
                            best = c;
                            best_arc = Some(e);
                        }
                    }
                    e += 1;
                    if e == end {
                        e = first;
                    }
                    count -= 1;
                    if count == 0 {
                        if best_arc.is_some() {
                            break;
                        }
                        count = block;
                    }
                    if e == start {
                        break;
                    }
                }
                self.next_arc = e;
                best_arc
            }
        }
    }

    fn find_join(&self, in_arc: usize) -> usize {
        let mut u = self.source[in_arc] as usize;
        let mut v = self.target[in_arc] as usize;
        while u != v {
            if self.succ_num[u] < self.succ_num[v] {
                u = self.parent[u];
            } else {
                v = self.parent[v];
            }
        }
        u
    }

    fn find_leaving(&self, in_arc: usize, join: usize) -> Option<Pivot> {
        let first = self.source[in_arc] as usize;
        let second = self.target[in_arc] as usize;
        let mut delta = i64::MAX;
        let mut u_out = NONE;
        let mut side = 0;
        let mut u = first;
        while u != join {
            if self.pred_dir[u] == UP {
                let d = self.flow[self.pred[u]];
                if d < delta {
                    delta = d;
                    u_out = u;
                    side = 1;
                }
            }
            u = self.parent[u];
        }
        u = second;
        while u != join {
            if self.pred_dir[u] == DOWN {
                let d = self.flow[self.pred[u]];
                if d <= delta {
                    delta = d;
                    u_out = u;
                    side = 2;
                }
            }
            u = self.parent[u];
        }
        if side == 0 {
            return None;
        }
        let (u_in, v_in) = if side == 1 { (first, second) } else { (second, first) };
        Some(Pivot {
            in_arc,
            join,
            u_in,
            v_in,
            u_out,
            delta,
        })
    }

    fn change_flow(&mut self, p: &Pivot) {
        if p.delta > 0 {
            let val = p.delta;
            self.flow[p.in_arc] += val;
            let mut u = self.source[p.in_arc] as usize;
            while u != p.join {
                let e = self.pred[u];
                self.flow[e] -= self.pred_dir[u] as i64 * val;
                u = self.parent[u];
            }
            u = self.target[p.in_arc] as usize;
            while u != p.join {
                let e = self.pred[u];
                self.flow[e] += self.pred_dir[u] as i64 * val;
                u = self.parent[u];
            }
        }
        self.state[p.in_arc] = STATE_TREE;
        let out_arc = self.pred[p.u_out];
        debug_assert_eq!(self.flow[out_arc], 0);
        self.state[out_arc] = STATE_LOWER;
    }

    fn update_tree(&mut self, p: &Pivot) {
        let Pivot {
            in_arc,
            join,
            u_in,
            v_in,
            u_out,
            ..
        } = *p;
        let old_rev_thread = self.rev_thread[u_out];
        let old_succ_num = self.succ_num[u_out];
        let old_last_succ = self.last_succ[u_out];
        let v_out = self.parent[u_out];

        if u_in == u_out {
            self.parent[u_in] = v_in;
            self.pred[u_in] = in_arc;
            self.pred_dir[u_in] = if u_in == self.source[in_arc] as usize { UP } else { DOWN };
            if self.thread[v_in] != u_out {
                let mut after = self.thread[old_last_succ];
                self.thread[old_rev_thread] = after;
                self.rev_thread[after] = old_rev_thread;
                after = self.thread[v_in];
                self.thread[v_in] = u_out;
                self.rev_thread[u_out] = v_in;
                self.thread[old_last_succ] = after;
                self.rev_thread[after] = old_last_succ;
            }
        } else {
            let thread_continue = if old_rev_thread == v_in {
                self.thread[old_last_succ]
            } else {
                self.thread[v_in]
            };

            let mut stem = u_in;
            let mut par_stem = v_in;
            let mut last = self.last_succ[u_in];
            let mut after = self.thread[last];
            self.thread[v_in] = u_in;
            self.dirty_revs.clear();
            self.dirty_revs.push(v_in);
            while stem != u_out {
                let next_stem = self.parent[stem];
                self.thread[last] = next_stem;
                self.dirty_revs.push(last);

                let before = self.rev_thread[stem];
                self.thread[before] = after;
                self.rev_thread[after] = before;

                self.parent[stem] = par_stem;
                par_stem = stem;
                stem = next_stem;

                last = if self.last_succ[stem] == self.last_succ[par_stem] {
                    self.rev_thread[par_stem]
                } else {
                    self.last_succ[stem]
                };
                after = self.thread[last];
            }
            self.parent[u_out] = par_stem;
            self.thread[last] = thread_continue;
            self.rev_thread[thread_continue] = last;
            self.last_succ[u_out] = last;

            if old_rev_thread != v_in {
                self.thread[old_rev_thread] = after;
                self.rev_thread[after] = old_rev_thread;
            }

            for k in 0..self.dirty_revs.len() {
                let u = self.dirty_revs[k];
                let t = self.thread[u];
                self.rev_thread[t] = u;
            }

            let mut tmp_sc = 0usize;
            let tmp_ls = self.last_succ[u_out];
            let mut u = u_out;
            while u != u_in {
                let p = self.parent[u];
                self.pred[u] = self.pred[p];
                self.pred_dir[u] = -self.pred_dir[p];
                tmp_sc = tmp_sc + self.succ_num[u] - self.succ_num[p];
                self.succ_num[u] = tmp_sc;
                self.last_succ[p] = tmp_ls;
                u = p;
            }
            self.pred[u_in] = in_arc;
            self.pred_dir[u_in] = if u_in == self.source[in_arc] as usize { UP } else { DOWN };
            self.succ_num[u_in] = old_succ_num;
        }

        let up_limit_out = if self.last_succ[join] == v_in { join } else { NONE };
        let last_succ_out = self.last_succ[u_out];
        let mut u = v_in;
        while u != NONE && self.last_succ[u] == v_in {
            self.last_succ[u] = last_succ_out;
            u = self.parent[u];
        }

        if join != old_rev_thread && v_in != old_rev_thread {
            let mut u = v_out;
            while u != up_limit_out && self.last_succ[u] == old_last_succ {
                self.last_succ[u] = old_rev_thread;
                u = self.parent[u];
            }
        } else if last_succ_out != old_last_succ {
            let mut u = v_out;
            while u != up_limit_out && self.last_succ[u] == old_last_succ {
                self.last_succ[u] = last_succ_out;
                u = self.parent[u];
            }
        }

        let mut u = v_in;
        while u != join {
            self.succ_num[u] += old_succ_num;
            u = self.parent[u];
        }
        let mut u = v_out;
        while u != join {
            self.succ_num[u] -= old_succ_num;
            u = self.parent[u];
        }
    }

    fn update_potential(&mut self, p: &Pivot) {
        let sigma = self.pi[p.v_in] - self.pi[p.u_in] - self.pred_dir[p.u_in] as f64 * self.cost[p.in_arc];
        let end = self.thread[self.last_succ[p.u_in]];
        let mut u = p.u_in;
        while u != end {
            self.pi[u] += sigma;
            u = self.thread[u];
        }
    }

    /// Pivots until no arc has reduced cost below `−tolerance`.
    pub(crate) fn run(&mut self, rule: PivotRule) -> Result<()> {
        loop {
            while let Some(in_arc) = self.find_entering(rule) {
                let join = self.find_join(in_arc);
                let pivot = self
                    .find_leaving(in_arc, join)
                    .ok_or_else(|| Error::Consistency("unbounded pivot in transport problem".into()))?;
                self.change_flow(&pivot);
                self.update_tree(&pivot);
                self.update_potential(&pivot);
                self.pivots += 1;
            }
            self.recompute_potentials();
            if self.find_entering(rule).is_none() {
                return Ok(());
            }
        }
    }

    /// Structural self-check of the basis; used by tests.
    #[cfg(test)]
    pub(crate) fn check_tree(&self) -> std::result::Result<(), String> {
        let n = self.node_count + 1;
        let mut seen = vec![false; n];
        let mut u = self.root;
        let mut order = Vec::with_capacity(n);
        for _ in 0..n {
            if seen[u] {
                return Err(format!("thread revisits {u}"));
            }
            seen[u] = true;
            order.push(u);
            if self.rev_thread[self.thread[u]] != u {
                return Err(format!("rev_thread mismatch at {u}"));
            }
            u = self.thread[u];
        }
        if u != self.root {
            return Err("thread does not close".into());
        }
        let mut position = vec![0; n];
        for (k, &v) in order.iter().enumerate() {
            position[v] = k;
        }
        for v in 0..n {
            let size = self.succ_num[v];
            let last = order[position[v] + size - 1];
            if last != self.last_succ[v] {
                return Err(format!("last_succ of {v}: {} vs {last}", self.last_succ[v]));
            }
            for &w in &order[position[v] + 1..position[v] + size] {
                let mut a = w;
                while a != v && a != NONE {
                    a = self.parent[a];
                }
                if a != v {
                    return Err(format!("{w} listed under {v} but not a descendant"));
                }
            }
            if v != self.root {
                let e = self.pred[v];
                let (s, t) = (self.source[e] as usize, self.target[e] as usize);
                let ok = if self.pred_dir[v] == UP {
                    s == v && t == self.parent[v]
                } else {
                    t == v && s == self.parent[v]
                };
                if !ok || self.state[e] != STATE_TREE {
                    return Err(format!("pred arc of {v} inconsistent"));
                }
                if self.reduced_cost(e).abs() > 1e-9 * (1.0 + self.pi[v].abs()) {
                    return Err(format!("tree arc {e} has reduced cost {}", self.reduced_cost(e)));
                }
            }
        }
        let tree_arcs = self.state.iter().filter(|&&s| s == STATE_TREE).count();
        if tree_arcs != self.node_count {
            return Err(format!("{tree_arcs} tree arcs for {} nodes", self.node_count));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn solve_dense(supply: &[i64], costs: &[Vec<f64>], rule: PivotRule) -> (NetworkSimplex, f64) {
        let ns_count = costs.len();
        let max = costs.iter().flatten().fold(0.0f64, |m, &c| m.max(c));
        let mut ns = NetworkSimplex::new(supply, max);
        for (i, row) in costs.iter().enumerate() {
            for (j, &c) in row.iter().enumerate() {
                ns.add_arc(i, ns_count + j, c);
            }
        }
        ns.run(rule).unwrap();
        let total = ns.flows().map(|(i, j, f)| f as f64 * costs[i][j - ns_count]).sum();
        (ns, total)
    }

    #[test]
    fn tiny_assignment() {
        let supply = [1, 1, -1, -1];
        let costs = vec![vec![1.0, 3.0], vec![3.0, 1.0]];
        for rule in [PivotRule::Bland, PivotRule::BlockSearch] {
            let (ns, total) = solve_dense(&supply, &costs, rule);
            assert_eq!(total, 2.0);
            assert_eq!(ns.artificial_flow(), 0);
            ns.check_tree().unwrap();
        }
    }

    #[test]
    fn random_instances_keep_tree_consistent_and_optimal() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let m = rng.gen_range(1..8);
            let n = rng.gen_range(1..8);
            let mut a: Vec<i64> = (0..m).map(|_| rng.gen_range(1..6)).collect();
            let mut b: Vec<i64> = (0..n).map(|_| rng.gen_range(1..6)).collect();
            let sa: i64 = a.iter().sum();
            let sb: i64 = b.iter().sum();
            if sa > sb {
                b[0] += sa - sb;
            } else {
                a[0] += sb - sa;
            }
            let supply: Vec<i64> = a.iter().copied().chain(b.iter().map(|x| -x)).collect();
            let costs: Vec<Vec<f64>> = (0..m)
                .map(|_| (0..n).map(|_| rng.gen_range(0..10) as f64).collect())
                .collect();
            for rule in [PivotRule::Bland, PivotRule::BlockSearch] {
                let (ns, _) = solve_dense(&supply, &costs, rule);
                ns.check_tree().unwrap();
                assert_eq!(ns.artificial_flow(), 0);
                // complementary slackness and dual feasibility
                let pi = ns.potentials();
                for i in 0..m {
                    for j in 0..n {
                        let rc = costs[i][j] + pi[i] - pi[m + j];
                        assert!(rc > -1e-9, "rc {rc}");
                    }
                }
                for (i, j, _) in ns.flows() {
                    let rc = costs[i][j - m] + pi[i] - pi[j];
                    assert!(rc.abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn arcs_can_be_added_between_runs() {
        let supply = [2, 1, -1, -2];
        let mut ns = NetworkSimplex::new(&supply, 10.0);
        ns.add_arc(0, 2, 5.0);
        ns.run(PivotRule::BlockSearch).unwrap();
        assert!(ns.artificial_flow() > 0);
        for (i, j, c) in [(0, 3, 1.0), (1, 2, 1.0), (1, 3, 4.0)] {
            ns.add_arc(i, j, c);
        }
        ns.run(PivotRule::BlockSearch).unwrap();
        ns.check_tree().unwrap();
        assert_eq!(ns.artificial_flow(), 0);
        let total: i64 = ns.flows().map(|(i, j, f)| f * [[5, 1], [1, 4]][i][j - 2]).sum();
        assert_eq!(total, 3);
    }
}
