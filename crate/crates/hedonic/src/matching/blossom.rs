//! Primal-dual blossom solver for maximum-weight matching on general graphs.
//!
//! This follows the classic O(n³) formulation from Galil's survey, in the
//! arrangement popularized by Joris van Rantwijk's reference implementation:
//! vertices and contracted blossoms share one index space (blossom ids live
//! in `n..2n`), edge endpoints are numbered `2k` and `2k+1`, and `mate`
//! stores endpoint indices until the final unpacking. Vertex duals are kept
//! pre-multiplied by two, as in the reference.
//!
//! Weights here are exact rationals, so every slack and dual update is
//! exact; with debug assertions enabled the computed matching is certified
//! against the LP duals before being returned.

use num_traits::Zero;

use crate::Rational;

const NONE: usize = usize::MAX;

/// Maximum-weight matching over the vertices `0..n`.
/// Returns the partner of each vertex, `None` when single.
pub(crate) fn solve(n: usize, edges: &[(usize, usize, Rational)]) -> Vec<Option<usize>> {
    if n == 0 || edges.is_empty() {
        return vec![None; n];
    }
    let mut solver = Solver::new(n, edges);
    solver.run();
    #[cfg(debug_assertions)]
    solver.verify_optimum();
    solver.into_mates()
}

struct Solver<'a> {
    nvertex: usize,
    nedge: usize,
    edges: &'a [(usize, usize, Rational)],
    /// 2·w(k) per edge; slack works in doubled units.
    double_weight: Vec<Rational>,
    /// endpoint[p] is the vertex endpoint `p` touches; endpoints 2k, 2k+1
    /// belong to edge k.
    endpoint: Vec<usize>,
    /// neighbend[v]: endpoints of edges incident to v, pointing away from v.
    neighbend: Vec<Vec<usize>>,
    /// mate[v]: remote endpoint of v's matched edge, NONE when single.
    mate: Vec<usize>,
    /// 0 free, 1 = S, 2 = T; bit 4 is the breadcrumb used by scan_blossom.
    label: Vec<u8>,
    labelend: Vec<usize>,
    inblossom: Vec<usize>,
    blossomparent: Vec<usize>,
    blossomchilds: Vec<Vec<usize>>,
    blossombase: Vec<usize>,
    blossomendps: Vec<Vec<usize>>,
    bestedge: Vec<usize>,
    blossombestedges: Vec<Vec<usize>>,
    unusedblossoms: Vec<usize>,
    dualvar: Vec<Rational>,
    allowedge: Vec<bool>,
    queue: Vec<usize>,
}

fn at(v: &[usize], idx: isize) -> usize {
    if idx >= 0 {
        v[idx as usize]
    } else {
        v[(v.len() as isize + idx) as usize]
    }
}

impl<'a> Solver<'a> {
    fn new(nvertex: usize, edges: &'a [(usize, usize, Rational)]) -> Self {
        let nedge = edges.len();
        for &(i, j, _) in edges {
            assert!(i != j && i < nvertex && j < nvertex, "bad edge ({i},{j})");
        }
        let max_weight = edges
            .iter()
            .map(|(_, _, w)| w)
            .max()
            .expect("at least one edge")
            .clone();
        let double_weight: Vec<Rational> = edges.iter().map(|(_, _, w)| w + w).collect();
        let endpoint: Vec<usize> = (0..2 * nedge)
            .map(|p| {
                if p % 2 == 0 {
                    edges[p / 2].0
                } else {
                    edges[p / 2].1
                }
            })
            .collect();
        let mut neighbend: Vec<Vec<usize>> = vec![Vec::new(); nvertex];
        for (k, &(i, j, _)) in edges.iter().enumerate() {
            neighbend[i].push(2 * k + 1);
            neighbend[j].push(2 * k);
        }
        let mut blossombase: Vec<usize> = (0..nvertex).collect();
        blossombase.extend(std::iter::repeat_n(NONE, nvertex));
        let mut dualvar: Vec<Rational> = vec![max_weight; nvertex];
        dualvar.extend(std::iter::repeat_n(Rational::zero(), nvertex));

        Solver {
            nvertex,
            nedge,
            edges,
            double_weight,
            endpoint,
            neighbend,
            mate: vec![NONE; nvertex],
            label: vec![0; 2 * nvertex],
            labelend: vec![NONE; 2 * nvertex],
            inblossom: (0..nvertex).collect(),
            blossomparent: vec![NONE; 2 * nvertex],
            blossomchilds: vec![Vec::new(); 2 * nvertex],
            blossombase,
            blossomendps: vec![Vec::new(); 2 * nvertex],
            bestedge: vec![NONE; 2 * nvertex],
            blossombestedges: vec![Vec::new(); 2 * nvertex],
            unusedblossoms: (nvertex..2 * nvertex).collect(),
            dualvar,
            allowedge: vec![false; nedge],
            queue: Vec::new(),
        }
    }

    /// 2·slack of edge k. Not meaningful for edges inside a blossom.
    fn slack(&self, k: usize) -> Rational {
        let (i, j, _) = self.edges[k];
        &self.dualvar[i] + &self.dualvar[j] - &self.double_weight[k]
    }

    fn blossom_leaves(&self, b: usize) -> Vec<usize> {
        let mut leaves = Vec::new();
        if b < self.nvertex {
            leaves.push(b);
        } else {
            for &t in &self.blossomchilds[b] {
                if t < self.nvertex {
                    leaves.push(t);
                } else {
                    leaves.extend(self.blossom_leaves(t));
                }
            }
        }
        leaves
    }

    /// Label the top-level blossom of `w` with `t`, reached via endpoint `p`.
    fn assign_label(&mut self, w: usize, t: u8, p: usize) {
        let b = self.inblossom[w];
        assert!(self.label[w] == 0 && self.label[b] == 0);
        self.label[w] = t;
        self.label[b] = t;
        self.labelend[w] = p;
        self.labelend[b] = p;
        self.bestedge[w] = NONE;
        self.bestedge[b] = NONE;
        if t == 1 {
            // S-blossom: its vertices go on the scan queue.
            self.queue.extend(self.blossom_leaves(b));
        } else if t == 2 {
            // T-blossom: its base's mate becomes an S-vertex.
            let base = self.blossombase[b];
            assert!(self.mate[base] != NONE);
            let mbase = self.mate[base];
            let ep = self.endpoint[mbase];
            self.assign_label(ep, 1, mbase ^ 1);
        }
    }

    /// Trace back from `v` and `w` to find either a new blossom's base or an
    /// augmenting path (returns NONE).
    fn scan_blossom(&mut self, v: usize, w: usize) -> usize {
        let mut path = Vec::new();
        let mut base = NONE;
        let mut v = v;
        let mut w = w;
        while v != NONE || w != NONE {
            // invariant: the live path is always in v
            let mut b = self.inblossom[v];
            if self.label[b] & 4 != 0 {
                base = self.blossombase[b];
                break;
            }
            assert!(self.label[b] == 1);
            path.push(b);
            self.label[b] = 5;
            assert!(self.labelend[b] == self.mate[self.blossombase[b]]);
            if self.labelend[b] == NONE {
                // base of b is single; this path ends here
                v = NONE;
            } else {
                v = self.endpoint[self.labelend[b]];
                b = self.inblossom[v];
                assert!(self.label[b] == 2);
                // b is T; step through to its S ancestor
                assert!(self.labelend[b] != NONE);
                v = self.endpoint[self.labelend[b]];
            }
            if w != NONE {
                std::mem::swap(&mut v, &mut w);
            }
        }
        for b in path {
            self.label[b] = 1;
        }
        base
    }

    /// Contract the circuit through `base` and edge `k` into a new S-blossom.
    fn add_blossom(&mut self, base: usize, k: usize) {
        let (mut v, mut w, _) = self.edges[k];
        let bb = self.inblossom[base];
        let mut bv = self.inblossom[v];
        let mut bw = self.inblossom[w];

        let b = self.unusedblossoms.pop().expect("a free blossom id");
        self.blossombase[b] = base;
        self.blossomparent[b] = NONE;
        self.blossomparent[bb] = b;

        let mut childs: Vec<usize> = Vec::new();
        let mut endps: Vec<usize> = Vec::new();

        // trace from v back to base
        while bv != bb {
            self.blossomparent[bv] = b;
            childs.push(bv);
            endps.push(self.labelend[bv]);
            assert!(
                self.label[bv] == 2
                    || (self.label[bv] == 1
                        && self.labelend[bv] == self.mate[self.blossombase[bv]])
            );
            assert!(self.labelend[bv] != NONE);
            v = self.endpoint[self.labelend[bv]];
            bv = self.inblossom[v];
        }
        childs.push(bb);
        childs.reverse();
        endps.reverse();
        endps.push(2 * k);

        // trace from w back to base
        while bw != bb {
            self.blossomparent[bw] = b;
            childs.push(bw);
            endps.push(self.labelend[bw] ^ 1);
            assert!(
                self.label[bw] == 2
                    || (self.label[bw] == 1
                        && self.labelend[bw] == self.mate[self.blossombase[bw]])
            );
            assert!(self.labelend[bw] != NONE);
            w = self.endpoint[self.labelend[bw]];
            bw = self.inblossom[w];
        }

        self.blossomchilds[b] = childs;
        self.blossomendps[b] = endps;

        assert!(self.label[bb] == 1);
        self.label[b] = 1;
        self.labelend[b] = self.labelend[bb];
        self.dualvar[b] = Rational::zero();

        for leaf in self.blossom_leaves(b) {
            if self.label[self.inblossom[leaf]] == 2 {
                // former T-vertex turns S: queue it
                self.queue.push(leaf);
            }
            self.inblossom[leaf] = b;
        }

        // merge least-slack edge lists of the children
        let mut bestedgeto: Vec<usize> = vec![NONE; 2 * self.nvertex];
        for bv in self.blossomchilds[b].clone() {
            let nblists: Vec<Vec<usize>> = if self.blossombestedges[bv].is_empty() {
                self.blossom_leaves(bv)
                    .into_iter()
                    .map(|leaf| self.neighbend[leaf].iter().map(|p| p / 2).collect())
                    .collect()
            } else {
                vec![self.blossombestedges[bv].clone()]
            };
            for nblist in nblists {
                for k in nblist {
                    let (mut i, mut j, _) = self.edges[k];
                    if self.inblossom[j] == b {
                        std::mem::swap(&mut i, &mut j);
                    }
                    let bj = self.inblossom[j];
                    if bj != b
                        && self.label[bj] == 1
                        && (bestedgeto[bj] == NONE || self.slack(k) < self.slack(bestedgeto[bj]))
                    {
                        bestedgeto[bj] = k;
                    }
                }
            }
            self.blossombestedges[bv] = Vec::new();
            self.bestedge[bv] = NONE;
        }
        self.blossombestedges[b] = bestedgeto.into_iter().filter(|&k| k != NONE).collect();
        self.bestedge[b] = NONE;
        for k in self.blossombestedges[b].clone() {
            if self.bestedge[b] == NONE || self.slack(k) < self.slack(self.bestedge[b]) {
                self.bestedge[b] = k;
            }
        }
    }

    /// Expand top-level blossom `b`, promoting its children to top level.
    fn expand_blossom(&mut self, b: usize, endstage: bool) {
        for s in self.blossomchilds[b].clone() {
            self.blossomparent[s] = NONE;
            if s < self.nvertex {
                self.inblossom[s] = s;
            } else if endstage && self.dualvar[s].is_zero() {
                self.expand_blossom(s, endstage);
            } else {
                for leaf in self.blossom_leaves(s) {
                    self.inblossom[leaf] = s;
                }
            }
        }

        // A T-blossom expanded mid-stage needs its children relabeled along
        // the alternating path that entered it.
        if !endstage && self.label[b] == 2 {
            assert!(self.labelend[b] != NONE);
            let entrychild = self.inblossom[self.endpoint[self.labelend[b] ^ 1]];
            let mut j = self.blossomchilds[b]
                .iter()
                .position(|&c| c == entrychild)
                .expect("entry child is a child of b") as isize;
            let len = self.blossomchilds[b].len() as isize;
            let (jstep, endptrick): (isize, usize) = if j & 1 != 0 {
                // odd index: go forward around the blossom
                j -= len;
                (1, 0)
            } else {
                (-1, 1)
            };
            // move along the path to the base, alternating T and S labels
            let mut p = self.labelend[b];
            while j != 0 {
                self.label[self.endpoint[p ^ 1]] = 0;
                let q = at(&self.blossomendps[b], j - endptrick as isize) ^ endptrick;
                self.label[self.endpoint[q ^ 1]] = 0;
                let ep = self.endpoint[p ^ 1];
                self.assign_label(ep, 2, p);
                self.allowedge[q / 2] = true;
                j += jstep;
                p = at(&self.blossomendps[b], j - endptrick as isize) ^ endptrick;
                self.allowedge[p / 2] = true;
                j += jstep;
            }
            // relabel the base child without recursing through its mate
            let bv = at(&self.blossomchilds[b], j);
            self.label[self.endpoint[p ^ 1]] = 2;
            self.label[bv] = 2;
            self.labelend[self.endpoint[p ^ 1]] = p;
            self.labelend[bv] = p;
            self.bestedge[bv] = NONE;
            // the remaining children keep or regain labels from outside
            j += jstep;
            while at(&self.blossomchilds[b], j) != entrychild {
                let bv = at(&self.blossomchilds[b], j);
                if self.label[bv] == 1 {
                    j += jstep;
                    continue;
                }
                let reached = self
                    .blossom_leaves(bv)
                    .into_iter()
                    .find(|&leaf| self.label[leaf] != 0);
                if let Some(v) = reached {
                    assert!(self.label[v] == 2);
                    assert!(self.inblossom[v] == bv);
                    self.label[v] = 0;
                    self.label[self.endpoint[self.mate[self.blossombase[bv]]]] = 0;
                    let lblend = self.labelend[v];
                    self.assign_label(v, 2, lblend);
                }
                j += jstep;
            }
        }

        self.label[b] = 0;
        self.labelend[b] = NONE;
        self.blossombase[b] = NONE;
        self.bestedge[b] = NONE;
        self.blossomchilds[b] = Vec::new();
        self.blossomendps[b] = Vec::new();
        self.blossombestedges[b] = Vec::new();
        self.unusedblossoms.push(b);
    }

    /// Swap matched and unmatched edges along the path from `v` to the base
    /// of blossom `b`, rotating the blossom so `v` becomes its base.
    fn augment_blossom(&mut self, b: usize, v: usize) {
        let mut t = v;
        while self.blossomparent[t] != b {
            t = self.blossomparent[t];
        }
        if t >= self.nvertex {
            self.augment_blossom(t, v);
        }
        let i = self.blossomchilds[b]
            .iter()
            .position(|&c| c == t)
            .expect("t is a child of b");
        let mut j = i as isize;
        let len = self.blossomchilds[b].len() as isize;
        let (jstep, endptrick): (isize, usize) = if i & 1 != 0 {
            j -= len;
            (1, 0)
        } else {
            (-1, 1)
        };
        while j != 0 {
            j += jstep;
            let t = at(&self.blossomchilds[b], j);
            let p = at(&self.blossomendps[b], j - endptrick as isize) ^ endptrick;
            if t >= self.nvertex {
                self.augment_blossom(t, self.endpoint[p]);
            }
            j += jstep;
            let t = at(&self.blossomchilds[b], j);
            if t >= self.nvertex {
                self.augment_blossom(t, self.endpoint[p ^ 1]);
            }
            self.mate[self.endpoint[p]] = p ^ 1;
            self.mate[self.endpoint[p ^ 1]] = p;
        }
        self.blossomchilds[b].rotate_left(i);
        self.blossomendps[b].rotate_left(i);
        self.blossombase[b] = self.blossombase[self.blossomchilds[b][0]];
        assert!(self.blossombase[b] == v);
    }

    /// Augment along the path through edge `k`, which joins two S-vertices.
    fn augment_matching(&mut self, k: usize) {
        let (v, w, _) = self.edges[k];
        for (mut s, mut p) in [(v, 2 * k + 1), (w, 2 * k)] {
            loop {
                let bs = self.inblossom[s];
                assert!(self.label[bs] == 1);
                assert!(self.labelend[bs] == self.mate[self.blossombase[bs]]);
                if bs >= self.nvertex {
                    self.augment_blossom(bs, s);
                }
                self.mate[s] = p;
                if self.labelend[bs] == NONE {
                    break; // reached a single vertex
                }
                let t = self.endpoint[self.labelend[bs]];
                let bt = self.inblossom[t];
                assert!(self.label[bt] == 2);
                assert!(self.labelend[bt] != NONE);
                s = self.endpoint[self.labelend[bt]];
                let j = self.endpoint[self.labelend[bt] ^ 1];
                assert!(self.blossombase[bt] == t);
                if bt >= self.nvertex {
                    self.augment_blossom(bt, j);
                }
                self.mate[j] = self.labelend[bt];
                p = self.labelend[bt] ^ 1;
            }
        }
    }

    fn run(&mut self) {
        let nvertex = self.nvertex;
        for _stage in 0..nvertex {
            // Each stage looks for one augmenting path.
            self.label = vec![0; 2 * nvertex];
            self.bestedge = vec![NONE; 2 * nvertex];
            for b in nvertex..2 * nvertex {
                self.blossombestedges[b] = Vec::new();
            }
            self.allowedge = vec![false; self.nedge];
            self.queue = Vec::new();

            for v in 0..nvertex {
                if self.mate[v] == NONE && self.label[self.inblossom[v]] == 0 {
                    self.assign_label(v, 1, NONE);
                }
            }

            let mut augmented = false;
            loop {
                // Substage: grow the forest until an augmenting path shows
                // up or slack forces a dual update.
                'scan: while let Some(v) = self.queue.pop() {
                    assert!(self.label[self.inblossom[v]] == 1);
                    for p in self.neighbend[v].clone() {
                        let k = p / 2;
                        let w = self.endpoint[p];
                        if self.inblossom[v] == self.inblossom[w] {
                            continue; // edge internal to a blossom
                        }
                        let mut kslack = Rational::zero();
                        if !self.allowedge[k] {
                            kslack = self.slack(k);
                            if kslack <= Rational::zero() {
                                self.allowedge[k] = true;
                            }
                        }
                        if self.allowedge[k] {
                            if self.label[self.inblossom[w]] == 0 {
                                self.assign_label(w, 2, p ^ 1);
                            } else if self.label[self.inblossom[w]] == 1 {
                                let base = self.scan_blossom(v, w);
                                if base != NONE {
                                    self.add_blossom(base, k);
                                } else {
                                    self.augment_matching(k);
                                    augmented = true;
                                    break 'scan;
                                }
                            } else if self.label[w] == 0 {
                                assert!(self.label[self.inblossom[w]] == 2);
                                self.label[w] = 2;
                                self.labelend[w] = p ^ 1;
                            }
                        } else if self.label[self.inblossom[w]] == 1 {
                            let b = self.inblossom[v];
                            if self.bestedge[b] == NONE || kslack < self.slack(self.bestedge[b]) {
                                self.bestedge[b] = k;
                            }
                        } else if self.label[w] == 0
                            && (self.bestedge[w] == NONE || kslack < self.slack(self.bestedge[w]))
                        {
                            self.bestedge[w] = k;
                        }
                    }
                }

                if augmented {
                    break;
                }

                // No augmenting path yet: pump slack out of the duals.
                // delta1: minimum vertex dual (stopping condition).
                let mut deltatype = 1u8;
                let mut delta = self.dualvar[..nvertex]
                    .iter()
                    .min()
                    .expect("at least one vertex")
                    .clone();
                let mut deltaedge = NONE;
                let mut deltablossom = NONE;

                // delta2: least slack to a free vertex.
                for v in 0..nvertex {
                    if self.label[self.inblossom[v]] == 0 && self.bestedge[v] != NONE {
                        let d = self.slack(self.bestedge[v]);
                        if d < delta {
                            delta = d;
                            deltatype = 2;
                            deltaedge = self.bestedge[v];
                        }
                    }
                }

                // delta3: half the least slack between two S-blossoms.
                for b in 0..2 * nvertex {
                    if self.blossomparent[b] == NONE
                        && self.label[b] == 1
                        && self.bestedge[b] != NONE
                    {
                        let kslack = self.slack(self.bestedge[b]);
                        let d = &kslack / Rational::from_integer(2.into());
                        if d < delta {
                            delta = d;
                            deltatype = 3;
                            deltaedge = self.bestedge[b];
                        }
                    }
                }

                // delta4: smallest dual of a top-level T-blossom.
                for b in nvertex..2 * nvertex {
                    if self.blossombase[b] != NONE
                        && self.blossomparent[b] == NONE
                        && self.label[b] == 2
                        && self.dualvar[b] < delta
                    {
                        delta = self.dualvar[b].clone();
                        deltatype = 4;
                        deltablossom = b;
                    }
                }

                // Apply delta to the duals.
                for v in 0..nvertex {
                    match self.label[self.inblossom[v]] {
                        0 => {}
                        1 => self.dualvar[v] = &self.dualvar[v] - &delta,
                        2 => self.dualvar[v] = &self.dualvar[v] + &delta,
                        other => panic!("unexpected vertex label {other}"),
                    }
                }
                for b in nvertex..2 * nvertex {
                    if self.blossombase[b] != NONE && self.blossomparent[b] == NONE {
                        match self.label[b] {
                            0 => {}
                            1 => self.dualvar[b] = &self.dualvar[b] + &delta,
                            2 => self.dualvar[b] = &self.dualvar[b] - &delta,
                            other => panic!("unexpected blossom label {other}"),
                        }
                    }
                }

                match deltatype {
                    1 => break, // optimum reached
                    2 => {
                        self.allowedge[deltaedge] = true;
                        let (mut i, j, _) = self.edges[deltaedge];
                        if self.label[self.inblossom[i]] == 0 {
                            i = j;
                        }
                        assert!(self.label[self.inblossom[i]] == 1);
                        self.queue.push(i);
                    }
                    3 => {
                        self.allowedge[deltaedge] = true;
                        let (i, _, _) = self.edges[deltaedge];
                        assert!(self.label[self.inblossom[i]] == 1);
                        self.queue.push(i);
                    }
                    4 => self.expand_blossom(deltablossom, false),
                    other => panic!("unexpected delta type {other}"),
                }
            }

            if !augmented {
                break;
            }

            // End of stage: discard S-blossoms whose dual dropped to zero.
            for b in nvertex..2 * nvertex {
                if self.blossomparent[b] == NONE
                    && self.blossombase[b] != NONE
                    && self.label[b] == 1
                    && self.dualvar[b].is_zero()
                {
                    self.expand_blossom(b, true);
                }
            }
        }
    }

    /// Certify the matching against the dual solution (debug builds).
    #[cfg(debug_assertions)]
    fn verify_optimum(&self) {
        let zero = Rational::zero();
        for k in 0..self.nedge {
            let (i, j, _) = self.edges[k];
            let mut s = self.slack(k);
            let mut iblossoms = vec![i];
            while self.blossomparent[*iblossoms.last().unwrap()] != NONE {
                iblossoms.push(self.blossomparent[*iblossoms.last().unwrap()]);
            }
            let mut jblossoms = vec![j];
            while self.blossomparent[*jblossoms.last().unwrap()] != NONE {
                jblossoms.push(self.blossomparent[*jblossoms.last().unwrap()]);
            }
            iblossoms.reverse();
            jblossoms.reverse();
            for (&bi, &bj) in iblossoms.iter().zip(jblossoms.iter()) {
                if bi != bj {
                    break;
                }
                s = s + &self.dualvar[bi] + &self.dualvar[bi];
            }
            assert!(s >= zero, "edge {k} has negative adjusted slack");
            let matched = (self.mate[i] != NONE && self.mate[i] / 2 == k)
                || (self.mate[j] != NONE && self.mate[j] / 2 == k);
            if matched {
                assert!(self.mate[i] != NONE && self.mate[i] / 2 == k);
                assert!(self.mate[j] != NONE && self.mate[j] / 2 == k);
                assert!(s == zero, "matched edge {k} has nonzero slack");
            }
        }
        for v in 0..self.nvertex {
            assert!(
                self.mate[v] != NONE || self.dualvar[v] == zero,
                "single vertex {v} has nonzero dual"
            );
        }
        for b in self.nvertex..2 * self.nvertex {
            if self.blossombase[b] != NONE && self.dualvar[b] > zero {
                assert!(self.blossomendps[b].len() % 2 == 1);
                for (ix, &p) in self.blossomendps[b].iter().enumerate() {
                    if ix % 2 == 1 {
                        assert!(self.mate[self.endpoint[p]] == p ^ 1);
                        assert!(self.mate[self.endpoint[p ^ 1]] == p);
                    }
                }
            }
        }
    }

    fn into_mates(self) -> Vec<Option<usize>> {
        let mates: Vec<Option<usize>> = self
            .mate
            .iter()
            .map(|&p| {
                if p == NONE {
                    None
                } else {
                    Some(self.endpoint[p])
                }
            })
            .collect();
        for (v, &m) in mates.iter().enumerate() {
            if let Some(m) = m {
                assert!(mates[m] == Some(v), "mate array is not symmetric");
            }
        }
        mates
    }
}
