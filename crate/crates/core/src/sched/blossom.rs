//! Maximum weight matching in general graphs via Edmonds' blossom method,
//! in the primal-dual formulation of Galil (1986) as organized by van
//! Rantwijk's well-known reference implementation.
//!
//! Weights are integers and all dual variables are kept pre-multiplied by
//! two, so the algorithm is exact: no floating-point tolerances are
//! involved anywhere. Runs in O(V^3).

const NONE: usize = usize::MAX;

/// Computes a maximum weight matching of the given undirected graph.
///
/// `edges` lists `(u, v, weight)` with `u != v` and at most one edge per
/// vertex pair. Vertices are `0..n_vertices`. Returns `mate`, where
/// `mate[v] == Some(u)` iff the edge `{v, u}` is matched. Matching fewer
/// edges is preferred when weights tie (no max-cardinality constraint).
pub fn max_weight_matching(n_vertices: usize, edges: &[(usize, usize, i64)]) -> Vec<Option<usize>> {
    if edges.is_empty() {
        return vec![None; n_vertices];
    }
    let mut solver = Solver::new(n_vertices, edges);
    solver.solve();
    solver
        .mate
        .iter()
        .map(|&p| {
            if p == NONE {
                None
            } else {
                Some(solver.endpoint[p])
            }
        })
        .collect()
}

/// Total weight of a mate vector against the edge list.
pub fn matching_weight(edges: &[(usize, usize, i64)], mate: &[Option<usize>]) -> i64 {
    edges
        .iter()
        .filter(|&&(u, v, _)| mate.get(u).copied().flatten() == Some(v))
        .map(|&(_, _, w)| w)
        .sum()
}

struct Solver {
    n: usize,
    edges: Vec<(usize, usize, i64)>,

    // endpoint[p] is the vertex to which edge endpoint p (= 2k or 2k+1 for
    // edge k) is attached.
    endpoint: Vec<usize>,
    // neighb_end[v]: endpoints of edges incident to v, pointing away from v.
    neighb_end: Vec<Vec<usize>>,
    // mate[v]: remote endpoint of v's matched edge, or NONE.
    mate: Vec<usize>,
    // label[b] for top-level blossom b: 0 free, 1 S, 2 T (5 = breadcrumb).
    label: Vec<usize>,
    // labelend[b]: remote endpoint of the edge through which b got its label.
    labelend: Vec<usize>,
    // inblossom[v]: top-level blossom containing vertex v.
    inblossom: Vec<usize>,
    // blossomparent[b]: immediate parent blossom, or NONE at top level.
    blossomparent: Vec<usize>,
    // blossomchilds[b]: ordered sub-blossoms of b, starting at the base.
    blossomchilds: Vec<Vec<usize>>,
    // blossombase[b]: base vertex of blossom b.
    blossombase: Vec<usize>,
    // blossomendps[b]: endpoints of the edges connecting consecutive children.
    blossomendps: Vec<Vec<usize>>,
    // bestedge[v|b]: least-slack edge towards an S-blossom (delta2/delta3).
    bestedge: Vec<usize>,
    // blossombestedges[b]: least-slack edge per neighbouring S-blossom.
    blossombestedges: Vec<Vec<usize>>,
    unusedblossoms: Vec<usize>,
    // dualvar[v] = 2u(v) for vertices, z(b) for blossoms.
    dualvar: Vec<i64>,
    allowedge: Vec<bool>,
    queue: Vec<usize>,
}

impl Solver {
    fn new(n_vertices: usize, edges: &[(usize, usize, i64)]) -> Self {
        let n = n_vertices;
        let nedge = edges.len();
        for &(i, j, _) in edges {
            assert!(i != j && i < n && j < n, "bad edge ({i},{j})");
        }
        let max_weight = edges.iter().map(|e| e.2).max().unwrap().max(0);
        let endpoint: Vec<usize> = (0..2 * nedge)
            .map(|p| {
                if p % 2 == 0 {
                    edges[p / 2].0
                } else {
                    edges[p / 2].1
                }
            })
            .collect();
        let mut neighb_end = vec![Vec::new(); n];
        for (k, &(i, j, _)) in edges.iter().enumerate() {
            neighb_end[i].push(2 * k + 1);
            neighb_end[j].push(2 * k);
        }
        let mut blossombase: Vec<usize> = (0..n).collect();
        blossombase.extend(vec![NONE; n]);
        let mut dualvar = vec![max_weight; n];
        dualvar.extend(vec![0; n]);
        Solver {
            n,
            edges: edges.to_vec(),

            endpoint,
            neighb_end,
            mate: vec![NONE; n],
            label: vec![0; 2 * n],
            labelend: vec![NONE; 2 * n],
            inblossom: (0..n).collect(),
            blossomparent: vec![NONE; 2 * n],
            blossomchilds: vec![Vec::new(); 2 * n],
            blossombase,
            blossomendps: vec![Vec::new(); 2 * n],
            bestedge: vec![NONE; 2 * n],
            blossombestedges: vec![Vec::new(); 2 * n],
            unusedblossoms: (n..2 * n).collect(),
            dualvar,
            allowedge: vec![false; nedge],
            queue: Vec::new(),
        }
    }

    // 2 * slack of edge k; not valid for edges inside a blossom.
    fn slack(&self, k: usize) -> i64 {
        let (i, j, w) = self.edges[k];
        self.dualvar[i] + self.dualvar[j] - 2 * w
    }

    fn blossom_leaves(&self, b: usize) -> Vec<usize> {
        let mut leaves = Vec::new();
        let mut stack = vec![b];
        while let Some(t) = stack.pop() {
            if t < self.n {
                leaves.push(t);
            } else {
                stack.extend(self.blossomchilds[t].iter().copied());
            }
        }
        leaves
    }

    // Python-style index into a blossom child/endpoint list.
    fn at(v: &[usize], idx: i64) -> usize {
        if idx >= 0 {
            v[idx as usize]
        } else {
            v[v.len() - (-idx) as usize]
        }
    }

    fn assign_label(&mut self, w: usize, t: usize, p: usize) {
        let b = self.inblossom[w];
        debug_assert!(self.label[w] == 0 && self.label[b] == 0);
        self.label[w] = t;
        self.label[b] = t;
        self.labelend[w] = p;
        self.labelend[b] = p;
        self.bestedge[w] = NONE;
        self.bestedge[b] = NONE;
        if t == 1 {
            let leaves = self.blossom_leaves(b);
            self.queue.extend(leaves);
        } else {
            // T-blossom: its base's mate becomes an S-vertex.
            let base = self.blossombase[b];
            debug_assert!(self.mate[base] != NONE);
            let mbase = self.mate[base];
            self.assign_label(self.endpoint[mbase], 1, mbase ^ 1);
        }
    }

    // Trace back from v and w; returns the base of a new blossom, or NONE if
    // an augmenting path was discovered instead.
    fn scan_blossom(&mut self, v: usize, w: usize) -> usize {
        let mut path = Vec::new();
        let mut base = NONE;
        let (mut v, mut w) = (v, w);
        while v != NONE || w != NONE {
            let mut b = self.inblossom[v];
            if self.label[b] & 4 != 0 {
                base = self.blossombase[b];
                break;
            }
            debug_assert!(self.label[b] == 1);
            path.push(b);
            self.label[b] = 5;
            debug_assert!(self.labelend[b] == self.mate[self.blossombase[b]]);
            if self.labelend[b] == NONE {
                v = NONE;
            } else {
                v = self.endpoint[self.labelend[b]];
                b = self.inblossom[v];
                debug_assert!(self.label[b] == 2);
                debug_assert!(self.labelend[b] != NONE);
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

    // Build a new blossom with the given base around edge k (joining two
    // S-vertices), relabel it S and refresh its least-slack edge lists.
    fn add_blossom(&mut self, base: usize, k: usize) {
        let (mut v, mut w, _) = self.edges[k];
        let bb = self.inblossom[base];
        let mut bv = self.inblossom[v];
        let mut bw = self.inblossom[w];
        let b = self.unusedblossoms.pop().expect("ran out of blossom ids");
        self.blossombase[b] = base;
        self.blossomparent[b] = NONE;
        self.blossomparent[bb] = b;

        let mut childs = Vec::new();
        let mut endps = Vec::new();
        while bv != bb {
            self.blossomparent[bv] = b;
            childs.push(bv);
            endps.push(self.labelend[bv]);
            debug_assert!(
                self.label[bv] == 2
                    || (self.label[bv] == 1
                        && self.labelend[bv] == self.mate[self.blossombase[bv]])
            );
            debug_assert!(self.labelend[bv] != NONE);
            v = self.endpoint[self.labelend[bv]];
            bv = self.inblossom[v];
        }
        childs.push(bb);
        childs.reverse();
        endps.reverse();
        endps.push(2 * k);
        while bw != bb {
            self.blossomparent[bw] = b;
            childs.push(bw);
            endps.push(self.labelend[bw] ^ 1);
            debug_assert!(
                self.label[bw] == 2
                    || (self.label[bw] == 1
                        && self.labelend[bw] == self.mate[self.blossombase[bw]])
            );
            debug_assert!(self.labelend[bw] != NONE);
            w = self.endpoint[self.labelend[bw]];
            bw = self.inblossom[w];
        }
        self.blossomchilds[b] = childs;
        self.blossomendps[b] = endps;

        debug_assert!(self.label[bb] == 1);
        self.label[b] = 1;
        self.labelend[b] = self.labelend[bb];
        self.dualvar[b] = 0;
        for v in self.blossom_leaves(b) {
            if self.label[self.inblossom[v]] == 2 {
                // Former T-vertex becomes S; scan it (again).
                self.queue.push(v);
            }
            self.inblossom[v] = b;
        }

        // Merge least-slack edge lists of the children.
        let mut bestedgeto = vec![NONE; 2 * self.n];
        for bv in self.blossomchilds[b].clone() {
            let nblists: Vec<Vec<usize>> = if self.blossombestedges[bv].is_empty() {
                self.blossom_leaves(bv)
                    .into_iter()
                    .map(|v| self.neighb_end[v].iter().map(|p| p / 2).collect())
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

    fn expand_blossom(&mut self, b: usize, endstage: bool) {
        for s in self.blossomchilds[b].clone() {
            self.blossomparent[s] = NONE;
            if s < self.n {
                self.inblossom[s] = s;
            } else if endstage && self.dualvar[s] == 0 {
                self.expand_blossom(s, endstage);
            } else {
                for v in self.blossom_leaves(s) {
                    self.inblossom[v] = s;
                }
            }
        }
        // Expanding a T-blossom mid-stage requires relabeling its children
        // along the alternating path from the entry child to the base.
        if !endstage && self.label[b] == 2 {
            debug_assert!(self.labelend[b] != NONE);
            let entrychild = self.inblossom[self.endpoint[self.labelend[b] ^ 1]];
            let mut j = self.blossomchilds[b]
                .iter()
                .position(|&r| r == entrychild)
                .unwrap() as i64;
            let (jstep, endptrick): (i64, usize) = if j & 1 != 0 {
                j -= self.blossomchilds[b].len() as i64;
                (1, 0)
            } else {
                (-1, 1)
            };
            let mut p = self.labelend[b];
            while j != 0 {
                // Relabel the T-sub-blossom.
                self.label[self.endpoint[p ^ 1]] = 0;
                let q = Self::at(&self.blossomendps[b], j - endptrick as i64) ^ endptrick ^ 1;
                self.label[self.endpoint[q]] = 0;
                let ep = self.endpoint[p ^ 1];
                self.assign_label(ep, 2, p);
                // The connecting edges have zero slack inside the blossom.
                self.allowedge[Self::at(&self.blossomendps[b], j - endptrick as i64) / 2] = true;
                j += jstep;
                p = Self::at(&self.blossomendps[b], j - endptrick as i64) ^ endptrick;
                self.allowedge[p / 2] = true;
                j += jstep;
            }
            // Relabel the base T-sub-blossom without stepping to its mate.
            let bv = Self::at(&self.blossomchilds[b], j);
            self.label[self.endpoint[p ^ 1]] = 2;
            self.label[bv] = 2;
            self.labelend[self.endpoint[p ^ 1]] = p;
            self.labelend[bv] = p;
            self.bestedge[bv] = NONE;
            // Remaining children keep their labels if reached from outside.
            j += jstep;
            while Self::at(&self.blossomchilds[b], j) != entrychild {
                let bv = Self::at(&self.blossomchilds[b], j);
                if self.label[bv] == 1 {
                    j += jstep;
                    continue;
                }
                let mut v = NONE;
                for t in self.blossom_leaves(bv) {
                    v = t;
                    if self.label[t] != 0 {
                        break;
                    }
                }
                if v != NONE && self.label[v] != 0 {
                    debug_assert!(self.label[v] == 2);
                    debug_assert!(self.inblossom[v] == bv);
                    self.label[v] = 0;
                    self.label[self.endpoint[self.mate[self.blossombase[bv]]]] = 0;
                    let lblend = self.labelend[v];
                    self.assign_label(v, 2, lblend);
                }
                j += jstep;
            }
        }
        self.label[b] = NONE;
        self.labelend[b] = NONE;
        self.blossombase[b] = NONE;
        self.bestedge[b] = NONE;
        self.blossomchilds[b] = Vec::new();
        self.blossomendps[b] = Vec::new();
        self.blossombestedges[b] = Vec::new();
        self.unusedblossoms.push(b);
    }

    // Swap matched/unmatched edges along the path from v to the base of b.
    fn augment_blossom(&mut self, b: usize, v: usize) {
        let mut t = v;
        while self.blossomparent[t] != b {
            t = self.blossomparent[t];
        }
        if t >= self.n {
            self.augment_blossom(t, v);
        }
        let i = self.blossomchilds[b].iter().position(|&r| r == t).unwrap();
        let mut j = i as i64;
        let (jstep, endptrick): (i64, usize) = if i & 1 != 0 {
            j -= self.blossomchilds[b].len() as i64;
            (1, 0)
        } else {
            (-1, 1)
        };
        while j != 0 {
            j += jstep;
            let t1 = Self::at(&self.blossomchilds[b], j);
            let p = Self::at(&self.blossomendps[b], j - endptrick as i64) ^ endptrick;
            if t1 >= self.n {
                self.augment_blossom(t1, self.endpoint[p]);
            }
            j += jstep;
            let t2 = Self::at(&self.blossomchilds[b], j);
            if t2 >= self.n {
                self.augment_blossom(t2, self.endpoint[p ^ 1]);
            }
            self.mate[self.endpoint[p]] = p ^ 1;
            self.mate[self.endpoint[p ^ 1]] = p;
        }
        self.blossomchilds[b].rotate_left(i);
        self.blossomendps[b].rotate_left(i);
        self.blossombase[b] = self.blossombase[self.blossomchilds[b][0]];
        debug_assert!(self.blossombase[b] == v);
    }

    // Augment the matching along the path through edge k between two single
    // vertices.
    fn augment_matching(&mut self, k: usize) {
        let (v, w, _) = self.edges[k];
        for &(s0, p0) in &[(v, 2 * k + 1), (w, 2 * k)] {
            let (mut s, mut p) = (s0, p0);
            loop {
                let bs = self.inblossom[s];
                debug_assert!(self.label[bs] == 1);
                debug_assert!(self.labelend[bs] == self.mate[self.blossombase[bs]]);
                if bs >= self.n {
                    self.augment_blossom(bs, s);
                }
                self.mate[s] = p;
                if self.labelend[bs] == NONE {
                    break;
                }
                let t = self.endpoint[self.labelend[bs]];
                let bt = self.inblossom[t];
                debug_assert!(self.label[bt] == 2);
                debug_assert!(self.labelend[bt] != NONE);
                s = self.endpoint[self.labelend[bt]];
                let j = self.endpoint[self.labelend[bt] ^ 1];
                debug_assert!(self.blossombase[bt] == t);
                if bt >= self.n {
                    self.augment_blossom(bt, j);
                }
                self.mate[j] = self.labelend[bt];
                p = self.labelend[bt] ^ 1;
            }
        }
    }

    fn solve(&mut self) {
        for _stage in 0..self.n {
            self.label = vec![0; 2 * self.n];
            self.bestedge = vec![NONE; 2 * self.n];
            for b in self.n..2 * self.n {
                self.blossombestedges[b] = Vec::new();
            }
            self.allowedge = vec![false; self.edges.len()];
            self.queue = Vec::new();
            for v in 0..self.n {
                if self.mate[v] == NONE && self.label[self.inblossom[v]] == 0 {
                    self.assign_label(v, 1, NONE);
                }
            }
            let mut augmented = false;
            loop {
                while let Some(v) = if augmented { None } else { self.queue.pop() } {
                    debug_assert!(self.label[self.inblossom[v]] == 1);
                    for p in self.neighb_end[v].clone() {
                        let k = p / 2;
                        let w = self.endpoint[p];
                        if self.inblossom[v] == self.inblossom[w] {
                            continue;
                        }
                        let mut kslack = 0;
                        if !self.allowedge[k] {
                            kslack = self.slack(k);
                            if kslack <= 0 {
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
                                    break;
                                }
                            } else if self.label[w] == 0 {
                                debug_assert!(self.label[self.inblossom[w]] == 2);
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

                // No augmenting path: pump slack out of the dual variables.
                // delta1: minimum vertex dual (we do not require maximum
                // cardinality, so the search may stop here).
                let mut deltatype = 1;
                let mut delta = *self.dualvar[..self.n].iter().min().unwrap();
                let mut deltaedge = NONE;
                let mut deltablossom = NONE;
                // delta2: least slack from an S-vertex to a free vertex.
                for v in 0..self.n {
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
                for b in 0..2 * self.n {
                    if self.blossomparent[b] == NONE
                        && self.label[b] == 1
                        && self.bestedge[b] != NONE
                    {
                        let d = self.slack(self.bestedge[b]) / 2;
                        if d < delta {
                            delta = d;
                            deltatype = 3;
                            deltaedge = self.bestedge[b];
                        }
                    }
                }
                // delta4: minimum dual of a top-level T-blossom.
                for b in self.n..2 * self.n {
                    if self.blossombase[b] != NONE
                        && self.blossomparent[b] == NONE
                        && self.label[b] == 2
                        && self.dualvar[b] < delta
                    {
                        delta = self.dualvar[b];
                        deltatype = 4;
                        deltablossom = b;
                    }
                }

                // Apply delta to the duals.
                for v in 0..self.n {
                    match self.label[self.inblossom[v]] {
                        0 => {}
                        1 => self.dualvar[v] -= delta,
                        2 => self.dualvar[v] += delta,
                        l => unreachable!("vertex label {l}"),
                    }
                }
                for b in self.n..2 * self.n {
                    if self.blossombase[b] != NONE && self.blossomparent[b] == NONE {
                        match self.label[b] {
                            0 => {}
                            1 => self.dualvar[b] += delta,
                            2 => self.dualvar[b] -= delta,
                            l => unreachable!("blossom label {l}"),
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
                        debug_assert!(self.label[self.inblossom[i]] == 1);
                        self.queue.push(i);
                    }
                    3 => {
                        self.allowedge[deltaedge] = true;
                        let (i, _, _) = self.edges[deltaedge];
                        debug_assert!(self.label[self.inblossom[i]] == 1);
                        self.queue.push(i);
                    }
                    4 => self.expand_blossom(deltablossom, false),
                    t => unreachable!("delta type {t}"),
                }
            }
            if !augmented {
                break;
            }
            // End of stage: expand S-blossoms whose dual dropped to zero.
            for b in self.n..2 * self.n {
                if self.blossomparent[b] == NONE
                    && self.blossombase[b] != NONE
                    && self.label[b] == 1
                    && self.dualvar[b] == 0
                {
                    self.expand_blossom(b, true);
                }
            }
        }
        #[cfg(debug_assertions)]
        self.verify_optimum();
    }

    // Complementary-slackness certificate of the primal-dual optimum.
    #[cfg(debug_assertions)]
    fn verify_optimum(&self) {
        assert!(*self.dualvar[..self.n].iter().min().unwrap() >= 0);
        assert!(*self.dualvar[self.n..].iter().min().unwrap() >= 0);
        for (k, &(i, j, w)) in self.edges.iter().enumerate() {
            let mut s = self.dualvar[i] + self.dualvar[j] - 2 * w;
            let mut iblossoms = vec![i];
            let mut jblossoms = vec![j];
            while self.blossomparent[*iblossoms.last().unwrap()] != NONE {
                iblossoms.push(self.blossomparent[*iblossoms.last().unwrap()]);
            }
            while self.blossomparent[*jblossoms.last().unwrap()] != NONE {
                jblossoms.push(self.blossomparent[*jblossoms.last().unwrap()]);
            }
            iblossoms.reverse();
            jblossoms.reverse();
            for (&bi, &bj) in iblossoms.iter().zip(jblossoms.iter()) {
                if bi != bj {
                    break;
                }
                s += 2 * self.dualvar[bi];
            }
            assert!(s >= 0, "negative slack on edge {k}");
            let matched = self.mate[i] != NONE && self.mate[i] / 2 == k
                || self.mate[j] != NONE && self.mate[j] / 2 == k;
            if matched {
                assert!(self.mate[i] / 2 == k && self.mate[j] / 2 == k);
                assert!(s == 0, "matched edge {k} has nonzero slack");
            }
        }
        for v in 0..self.n {
            assert!(self.mate[v] != NONE || self.dualvar[v] == 0);
        }
        for b in self.n..2 * self.n {
            if self.blossombase[b] != NONE && self.dualvar[b] > 0 {
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
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mates(n: usize, edges: &[(usize, usize, i64)]) -> Vec<Option<usize>> {
        max_weight_matching(n, edges)
    }

    #[test]
    fn empty_graph() {
        assert_eq!(mates(0, &[]), Vec::<Option<usize>>::new());
        assert_eq!(mates(3, &[]), vec![None, None, None]);
    }

    #[test]
    fn single_edge() {
        assert_eq!(mates(2, &[(0, 1, 1)]), vec![Some(1), Some(0)]);
    }

    #[test]
    fn prefers_heavier_single_edge_over_pair() {
        // Middle edge outweighs the two ends combined.
        assert_eq!(
            mates(4, &[(0, 1, 5), (1, 2, 11), (2, 3, 5)]),
            vec![None, Some(2), Some(1), None]
        );
    }

    #[test]
    fn path_graph_examples() {
        // w(ab)=3, w(bc)=5: pick bc alone.
        let m = mates(3, &[(0, 1, 3), (1, 2, 5)]);
        assert_eq!(m, vec![None, Some(2), Some(1)]);
        // w = (2, 3, 2) on a 3-link path: ends beat the middle.
        let m = mates(4, &[(0, 1, 2), (1, 2, 3), (2, 3, 2)]);
        assert_eq!(m, vec![Some(1), Some(0), Some(3), Some(2)]);
    }

    // The remaining cases are the classic blossom stress vectors from van
    // Rantwijk's reference implementation (1-based vertices kept as-is).

    #[test]
    fn s_blossom_augmenting() {
        let m = mates(5, &[(1, 2, 8), (1, 3, 9), (2, 3, 10), (3, 4, 7)]);
        assert_eq!(m[1..], [Some(2), Some(1), Some(4), Some(3)]);
        let m = mates(
            7,
            &[
                (1, 2, 8),
                (1, 3, 9),
                (2, 3, 10),
                (3, 4, 7),
                (1, 6, 5),
                (4, 5, 6),
            ],
        );
        assert_eq!(
            m[1..],
            [Some(6), Some(3), Some(2), Some(5), Some(4), Some(1)]
        );
    }

    #[test]
    fn s_t_relabel_augmenting() {
        let m = mates(
            7,
            &[
                (1, 2, 9),
                (1, 3, 8),
                (2, 3, 10),
                (1, 4, 5),
                (4, 5, 4),
                (1, 6, 3),
            ],
        );
        assert_eq!(
            m[1..],
            [Some(6), Some(3), Some(2), Some(5), Some(4), Some(1)]
        );
        let m = mates(
            7,
            &[
                (1, 2, 9),
                (1, 3, 8),
                (2, 3, 10),
                (1, 4, 5),
                (4, 5, 3),
                (1, 6, 4),
            ],
        );
        assert_eq!(
            m[1..],
            [Some(6), Some(3), Some(2), Some(5), Some(4), Some(1)]
        );
        let m = mates(
            7,
            &[
                (1, 2, 9),
                (1, 3, 8),
                (2, 3, 10),
                (1, 4, 5),
                (4, 5, 3),
                (3, 6, 4),
            ],
        );
        assert_eq!(
            m[1..],
            [Some(2), Some(1), Some(6), Some(5), Some(4), Some(3)]
        );
    }

    #[test]
    fn nested_s_blossom_augmenting() {
        let m = mates(
            7,
            &[
                (1, 2, 9),
                (1, 3, 9),
                (2, 3, 10),
                (2, 4, 8),
                (3, 5, 8),
                (4, 5, 10),
                (5, 6, 6),
            ],
        );
        assert_eq!(
            m[1..],
            [Some(3), Some(4), Some(1), Some(2), Some(6), Some(5)]
        );
    }

    #[test]
    fn nested_s_blossom_relabel_expand() {
        let m = mates(
            11,
            &[
                (1, 2, 40),
                (1, 3, 40),
                (2, 3, 60),
                (2, 4, 55),
                (3, 5, 55),
                (4, 5, 50),
                (1, 8, 15),
                (5, 7, 30),
                (7, 6, 10),
                (8, 10, 10),
                (4, 9, 30),
            ],
        );
        assert_eq!(
            m[1..],
            [
                Some(2),
                Some(1),
                Some(5),
                Some(9),
                Some(3),
                Some(7),
                Some(6),
                Some(10),
                Some(4),
                Some(8)
            ]
        );
    }

    #[test]
    fn s_blossom_relabel_t_expand() {
        let m = mates(
            9,
            &[
                (1, 2, 23),
                (1, 5, 22),
                (1, 6, 15),
                (2, 3, 25),
                (3, 4, 22),
                (4, 5, 25),
                (4, 8, 14),
                (5, 7, 13),
            ],
        );
        assert_eq!(
            m[1..],
            [
                Some(6),
                Some(3),
                Some(2),
                Some(8),
                Some(7),
                Some(1),
                Some(5),
                Some(4)
            ]
        );
    }

    #[test]
    fn nested_s_blossom_t_expand() {
        let m = mates(
            9,
            &[
                (1, 2, 19),
                (1, 3, 20),
                (1, 8, 8),
                (2, 3, 25),
                (2, 4, 18),
                (3, 5, 18),
                (4, 5, 13),
                (4, 7, 7),
                (5, 6, 7),
            ],
        );
        assert_eq!(
            m[1..],
            [
                Some(8),
                Some(3),
                Some(2),
                Some(7),
                Some(6),
                Some(5),
                Some(4),
                Some(1)
            ]
        );
    }

    #[test]
    fn nasty_t_blossom_expansions() {
        let m = mates(
            11,
            &[
                (1, 2, 45),
                (1, 5, 45),
                (2, 3, 50),
                (3, 4, 45),
                (4, 5, 50),
                (1, 6, 30),
                (3, 9, 35),
                (4, 8, 35),
                (5, 7, 26),
                (9, 10, 5),
            ],
        );
        assert_eq!(
            m[1..],
            [
                Some(6),
                Some(3),
                Some(2),
                Some(8),
                Some(7),
                Some(1),
                Some(5),
                Some(4),
                Some(10),
                Some(9)
            ]
        );
        let m = mates(
            11,
            &[
                (1, 2, 45),
                (1, 5, 45),
                (2, 3, 50),
                (3, 4, 45),
                (4, 5, 50),
                (1, 6, 30),
                (3, 9, 35),
                (4, 8, 26),
                (5, 7, 40),
                (9, 10, 5),
            ],
        );
        assert_eq!(
            m[1..],
            [
                Some(6),
                Some(3),
                Some(2),
                Some(8),
                Some(7),
                Some(1),
                Some(5),
                Some(4),
                Some(10),
                Some(9)
            ]
        );
        let m = mates(
            11,
            &[
                (1, 2, 45),
                (1, 5, 45),
                (2, 3, 50),
                (3, 4, 45),
                (4, 5, 50),
                (1, 6, 30),
                (3, 9, 35),
                (4, 8, 28),
                (5, 7, 26),
                (9, 10, 5),
            ],
        );
        assert_eq!(
            m[1..],
            [
                Some(6),
                Some(3),
                Some(2),
                Some(8),
                Some(7),
                Some(1),
                Some(5),
                Some(4),
                Some(10),
                Some(9)
            ]
        );
    }

    #[test]
    fn nested_nasty_expansion() {
        let m = mates(
            13,
            &[
                (1, 2, 45),
                (1, 7, 45),
                (2, 3, 50),
                (3, 4, 45),
                (4, 5, 95),
                (4, 6, 94),
                (5, 6, 94),
                (6, 7, 50),
                (1, 8, 30),
                (3, 11, 35),
                (5, 9, 36),
                (7, 10, 26),
                (11, 12, 5),
            ],
        );
        assert_eq!(
            m[1..],
            [
                Some(8),
                Some(3),
                Some(2),
                Some(6),
                Some(9),
                Some(4),
                Some(10),
                Some(1),
                Some(5),
                Some(7),
                Some(12),
                Some(11)
            ]
        );
    }

    #[test]
    fn matching_weight_helper() {
        let edges = [(0, 1, 2), (1, 2, 3), (2, 3, 2)];
        let mate = mates(4, &edges);
        assert_eq!(matching_weight(&edges, &mate), 4);
    }
}
