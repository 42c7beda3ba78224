//! Primal network simplex for balanced, uncapacitated transportation problems
//! on a complete bipartite graph with real supplies and real costs.
//!
//! The spanning-tree bookkeeping (thread/successor lists, strongly feasible
//! leaving-arc rule, block-search pivoting) follows the classic LEMON design.
//! Node `i < m` is supply `i`, node `m + j` is demand `j`, and node `m + k` is
//! an artificial root joined to every other node.

use crate::error::{Error, Result};

const STATE_TREE: i8 = 0;
const STATE_LOWER: i8 = 1;
const DIR_UP: i8 = 1;
const DIR_DOWN: i8 = -1;
const NONE: usize = usize::MAX;

/// Entering arcs must have reduced cost below `-PIVOT_EPS * scale`.
const PIVOT_EPS: f64 = 1e-13;
/// Potentials are rebuilt from the tree this often to shed drift.
const REFRESH_PERIOD: usize = 1024;

/// One positive entry of an optimal flow: `(supply index, demand index, mass)`.
pub type FlowEntry = (usize, usize, f64);

/// Solves `min Σ c_ij x_ij` subject to row sums `supply` and column sums
/// `demand`, `x ≥ 0`. `costs` is row-major `supply.len() × demand.len()`.
/// The two sides must carry the same total mass.
pub fn solve_transport(supply: &[f64], demand: &[f64], costs: &[f64]) -> Result<Vec<FlowEntry>> {
    let (m, k) = (supply.len(), demand.len());
    assert_eq!(costs.len(), m * k, "cost table has the wrong size");
    if m == 0 || k == 0 {
        return Ok(Vec::new());
    }
    if m == 1 || k == 1 {
        // Only one feasible plan.
        let mut out = Vec::with_capacity(m.max(k));
        for i in 0..m {
            for j in 0..k {
                let mass = if m == 1 { demand[j] } else { supply[i] };
                if mass > 0.0 {
                    out.push((i, j, mass));
                }
            }
        }
        return Ok(out);
    }
    let mut ns = NetworkSimplex::new(supply, demand, costs);
    ns.run()?;
    Ok(ns.positive_flows())
}

struct NetworkSimplex<'a> {
    m: usize,
    k: usize,
    node_num: usize,
    arc_num: usize,
    costs: &'a [f64],
    art_cost: Vec<f64>,
    art_source: Vec<usize>,
    art_target: Vec<usize>,
    scale: f64,

    flow: Vec<f64>,
    state: Vec<i8>,
    pi: Vec<f64>,
    parent: Vec<usize>,
    pred: Vec<usize>,
    pred_dir: Vec<i8>,
    thread: Vec<usize>,
    rev_thread: Vec<usize>,
    succ_num: Vec<usize>,
    last_succ: Vec<usize>,
    dirty_revs: Vec<usize>,

    block_size: usize,
    next_arc: usize,
    in_arc: usize,
    join: usize,
    u_in: usize,
    v_in: usize,
    u_out: usize,
    delta: f64,
}

impl<'a> NetworkSimplex<'a> {
    fn new(supply: &[f64], demand: &[f64], costs: &'a [f64]) -> Self {
        let (m, k) = (supply.len(), demand.len());
        let node_num = m + k;
        let arc_num = m * k;
        let all_arcs = arc_num + node_num;
        let root = node_num;

        let max_cost = costs.iter().fold(0.0_f64, |a, &c| a.max(c.abs()));
        // Any route through the root must cost more than a direct arc.
        let art = max_cost + 1.0;

        let mut s = Self {
            m,
            k,
            node_num,
            arc_num,
            costs,
            art_cost: vec![0.0; node_num],
            art_source: vec![0; node_num],
            art_target: vec![0; node_num],
            scale: art + max_cost,
            flow: vec![0.0; all_arcs],
            state: vec![STATE_LOWER; all_arcs],
            pi: vec![0.0; node_num + 1],
            parent: vec![NONE; node_num + 1],
            pred: vec![NONE; node_num + 1],
            pred_dir: vec![DIR_UP; node_num + 1],
            thread: vec![0; node_num + 1],
            rev_thread: vec![0; node_num + 1],
            succ_num: vec![1; node_num + 1],
            last_succ: vec![0; node_num + 1],
            dirty_revs: Vec::new(),
            block_size: ((arc_num as f64).sqrt().ceil() as usize).max(10),
            next_arc: 0,
            in_arc: 0,
            join: 0,
            u_in: 0,
            v_in: 0,
            u_out: 0,
            delta: 0.0,
        };

        s.thread[root] = 0;
        s.rev_thread[0] = root;
        s.succ_num[root] = node_num + 1;
        s.last_succ[root] = root - 1;

        for u in 0..node_num {
            let e = arc_num + u;
            s.parent[u] = root;
            s.pred[u] = e;
            s.thread[u] = u + 1;
            s.rev_thread[u + 1] = u;
            s.succ_num[u] = 1;
            s.last_succ[u] = u;
            s.state[e] = STATE_TREE;
            if u < m {
                s.pred_dir[u] = DIR_UP;
                s.pi[u] = 0.0;
                s.art_source[u] = u;
                s.art_target[u] = root;
                s.flow[e] = supply[u];
                s.art_cost[u] = 0.0;
            } else {
                s.pred_dir[u] = DIR_DOWN;
                s.pi[u] = art;
                s.art_source[u] = root;
                s.art_target[u] = u;
                s.flow[e] = demand[u - m];
                s.art_cost[u] = art;
            }
        }
        s
    }

    #[inline]
    fn source(&self, e: usize) -> usize {
        if e < self.arc_num {
            e / self.k
        } else {
            self.art_source[e - self.arc_num]
        }
    }

    #[inline]
    fn target(&self, e: usize) -> usize {
        if e < self.arc_num {
            self.m + e % self.k
        } else {
            self.art_target[e - self.arc_num]
        }
    }

    #[inline]
    fn cost(&self, e: usize) -> f64 {
        if e < self.arc_num {
            self.costs[e]
        } else {
            self.art_cost[e - self.arc_num]
        }
    }

    fn run(&mut self) -> Result<()> {
        let max_pivots = 64 * (self.arc_num + self.node_num) + 1_000_000;
        let mut pivots = 0usize;
        loop {
            if !self.find_entering_arc() {
                self.refresh_potentials();
                if !self.find_entering_arc() {
                    break;
                }
            }
            self.find_join_node();
            if !self.find_leaving_arc() {
                return Err(Error::Solver("unbounded transportation problem".into()));
            }
            self.change_flow();
            self.update_tree_structure();
            self.update_potential();

            pivots += 1;
            if pivots % REFRESH_PERIOD == 0 {
                self.refresh_potentials();
            }
            if pivots > max_pivots {
                return Err(Error::Solver(format!(
                    "network simplex did not converge after {pivots} pivots"
                )));
            }
        }

        let total: f64 = self.flow[..self.arc_num].iter().sum();
        let stranded: f64 = self.flow[self.arc_num..].iter().sum();
        if stranded > 1e-9 * total.max(1.0) {
            return Err(Error::Solver(format!(
                "mass {stranded:e} left on artificial arcs"
            )));
        }
        Ok(())
    }

    /// Block search: scan blocks of arcs cyclically and take the most
    /// negative reduced cost in the first block that has one.
    fn find_entering_arc(&mut self) -> bool {
        let mut min = 0.0;
        let mut best = NONE;
        let mut cnt = self.block_size;
        let threshold = -PIVOT_EPS * self.scale;
        let mut e = self.next_arc;
        // Row and column of `e`, advanced alongside it.
        let mut i = e / self.k;
        let mut j = e % self.k;
        let (pi_rows, pi_cols) = self.pi.split_at(self.m);
        for _ in 0..self.arc_num {
            if self.state[e] != STATE_TREE {
                let c = self.state[e] as f64 * (self.costs[e] + pi_rows[i] - pi_cols[j]);
                if c < min {
                    min = c;
                    best = e;
                }
            }
            e += 1;
            j += 1;
            if j == self.k {
                j = 0;
                i += 1;
                if e == self.arc_num {
                    e = 0;
                    i = 0;
                }
            }
            cnt -= 1;
            if cnt == 0 {
                if min < threshold {
                    break;
                }
                cnt = self.block_size;
            }
        }
        if best == NONE || min >= threshold {
            return false;
        }
        self.in_arc = best;
        self.next_arc = e;
        true
    }

    fn find_join_node(&mut self) {
        let mut u = self.source(self.in_arc);
        let mut v = self.target(self.in_arc);
        while u != v {
            if self.succ_num[u] < self.succ_num[v] {
                u = self.parent[u];
            } else {
                v = self.parent[v];
            }
        }
        self.join = u;
    }

    /// Every arc is uncapacitated, so only arcs whose flow decreases around
    /// the cycle can block it. Ties go to the last blocking arc on the second
    /// path, which keeps the tree strongly feasible.
    fn find_leaving_arc(&mut self) -> bool {
        let first = self.source(self.in_arc);
        let second = self.target(self.in_arc);
        self.delta = f64::INFINITY;
        let mut result = 0;

        let mut u = first;
        while u != self.join {
            if self.pred_dir[u] == DIR_UP {
                let d = self.flow[self.pred[u]];
                if d < self.delta {
                    self.delta = d;
                    self.u_out = u;
                    result = 1;
                }
            }
            u = self.parent[u];
        }
        let mut u = second;
        while u != self.join {
            if self.pred_dir[u] == DIR_DOWN {
                let d = self.flow[self.pred[u]];
                if d <= self.delta {
                    self.delta = d;
                    self.u_out = u;
                    result = 2;
                }
            }
            u = self.parent[u];
        }

        if result == 1 {
            self.u_in = first;
            self.v_in = second;
        } else {
            self.u_in = second;
            self.v_in = first;
        }
        result != 0
    }

    fn change_flow(&mut self) {
        let val = self.delta;
        if val > 0.0 {
            self.flow[self.in_arc] += val;
            let mut u = self.source(self.in_arc);
            while u != self.join {
                let e = self.pred[u];
                self.flow[e] -= self.pred_dir[u] as f64 * val;
                u = self.parent[u];
            }
            let mut u = self.target(self.in_arc);
            while u != self.join {
                let e = self.pred[u];
                self.flow[e] += self.pred_dir[u] as f64 * val;
                u = self.parent[u];
            }
        }
        self.state[self.in_arc] = STATE_TREE;
        let out = self.pred[self.u_out];
        self.flow[out] = 0.0;
        self.state[out] = STATE_LOWER;
    }

    fn update_tree_structure(&mut self) {
        let u_in = self.u_in;
        let v_in = self.v_in;
        let u_out = self.u_out;
        let in_arc = self.in_arc;
        let join = self.join;

        let old_rev_thread = self.rev_thread[u_out];
        let old_succ_num = self.succ_num[u_out];
        let old_last_succ = self.last_succ[u_out];
        let v_out = self.parent[u_out];

        if u_in == u_out {
            self.parent[u_in] = v_in;
            self.pred[u_in] = in_arc;
            self.pred_dir[u_in] = if u_in == self.source(in_arc) {
                DIR_UP
            } else {
                DIR_DOWN
            };

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

            // Re-hang the stem nodes between u_in and u_out.
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

            for i in 0..self.dirty_revs.len() {
                let u = self.dirty_revs[i];
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
            self.pred_dir[u_in] = if u_in == self.source(in_arc) {
                DIR_UP
            } else {
                DIR_DOWN
            };
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

    fn update_potential(&mut self) {
        let u_in = self.u_in;
        let sigma = self.pi[self.v_in]
            - self.pi[u_in]
            - self.pred_dir[u_in] as f64 * self.cost(self.in_arc);
        let end = self.thread[self.last_succ[u_in]];
        let mut u = u_in;
        while u != end {
            self.pi[u] += sigma;
            u = self.thread[u];
        }
    }

    /// Recomputes every potential from the root so that tree arcs have
    /// exactly zero reduced cost.
    fn refresh_potentials(&mut self) {
        let root = self.node_num;
        self.pi[root] = 0.0;
        let mut u = self.thread[root];
        while u != root {
            let e = self.pred[u];
            let p = self.parent[u];
            self.pi[u] = if self.pred_dir[u] == DIR_UP {
                self.pi[p] - self.cost(e)
            } else {
                self.pi[p] + self.cost(e)
            };
            u = self.thread[u];
        }
    }

    fn positive_flows(&self) -> Vec<FlowEntry> {
        self.flow[..self.arc_num]
            .iter()
            .enumerate()
            .filter(|(_, &f)| f > 0.0)
            .map(|(e, &f)| (e / self.k, e % self.k, f))
            .collect()
    }
}
