use super::CsrMatrix;

const LEAF_SIZE: usize = 64;

struct Graph<'a> {
    a: &'a CsrMatrix,
    label: Vec<u32>,
    level: Vec<u32>,
    next_label: u32,
}

impl Graph<'_> {
    fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.a.row(v).0.iter().copied().filter(move |&u| u != v)
    }

    fn degree_in(&self, v: usize, lab: u32) -> usize {
        self.neighbors(v).filter(|&u| self.label[u] == lab).count()
    }

    /// BFS restricted to nodes carrying `lab`; returns the level sets.
    fn bfs_levels(&mut self, start: usize, lab: u32) -> Vec<Vec<usize>> {
        const UNSEEN: u32 = u32::MAX;
        let mut levels: Vec<Vec<usize>> = vec![vec![start]];
        self.level[start] = 0;
        loop {
            let d = levels.len() as u32;
            let mut next = Vec::new();
            for &v in levels.last().unwrap() {
                for u in self.a.row(v).0.iter().copied() {
                    if self.label[u] == lab && self.level[u] == UNSEEN {
                        self.level[u] = d;
                        next.push(u);
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            levels.push(next);
        }
        // `self.level` stays populated until `clear_levels`
        levels
    }

    fn clear_levels(&mut self, levels: &[Vec<usize>]) {
        for v in levels.iter().flatten() {
            self.level[*v] = u32::MAX;
        }
    }

    fn pseudo_peripheral(&mut self, start: usize, lab: u32) -> (usize, Vec<Vec<usize>>) {
        let mut root = start;
        let mut levels = self.bfs_levels(root, lab);
        for _ in 0..8 {
            let candidate = *levels
                .last()
                .unwrap()
                .iter()
                .min_by_key(|&&v| (self.degree_in(v, lab), v))
                .unwrap();
            self.clear_levels(&levels);
            let trial = self.bfs_levels(candidate, lab);
            if trial.len() > levels.len() {
                root = candidate;
                levels = trial;
            } else {
                self.clear_levels(&trial);
                levels = self.bfs_levels(root, lab);
                break;
            }
        }
        (root, levels)
    }

    fn dissect(&mut self, nodes: Vec<usize>, out: &mut Vec<usize>) {
        if nodes.is_empty() {
            return;
        }
        let lab = self.next_label;
        self.next_label += 1;
        for &v in &nodes {
            self.label[v] = lab;
        }
        let start = *nodes.iter().min().unwrap();
        let (_, levels) = self.pseudo_peripheral(start, lab);
        let reached: usize = levels.iter().map(Vec::len).sum();

        if reached < nodes.len() {
            // disconnected: order the reached component, then the remainder
            let rest: Vec<usize> = nodes
                .iter()
                .copied()
                .filter(|&v| self.level[v] == u32::MAX)
                .collect();
            let comp: Vec<usize> = levels.iter().flatten().copied().collect();
            self.clear_levels(&levels);
            self.dissect(comp, out);
            self.dissect(rest, out);
            return;
        }

        if nodes.len() <= LEAF_SIZE || levels.len() < 3 {
            self.clear_levels(&levels);
            // reverse BFS order keeps the leaf profile small
            out.extend(levels.iter().flatten().rev().copied());
            return;
        }

        let half = nodes.len() / 2;
        let mut acc = 0;
        let mut mid = 1;
        for (d, lv) in levels.iter().enumerate() {
            acc += lv.len();
            if acc >= half {
                mid = d;
                break;
            }
        }
        let mid = mid.clamp(1, levels.len() - 2);
        let mid_u32 = mid as u32;

        let mut part1: Vec<usize> = levels[..mid].iter().flatten().copied().collect();
        let mut sep = Vec::new();
        for &v in &levels[mid] {
            let touches_far = self
                .neighbors(v)
                .any(|u| self.label[u] == lab && self.level[u] == mid_u32 + 1);
            if touches_far {
                sep.push(v);
            } else {
                part1.push(v);
            }
        }
        let part2: Vec<usize> = levels[mid + 1..].iter().flatten().copied().collect();
        self.clear_levels(&levels);
        self.dissect(part1, out);
        self.dissect(part2, out);
        out.extend(sep);
    }
}

/// Fill-reducing symmetric ordering by recursive level-set bisection of the
/// matrix graph. Returns `perm` with `perm[new] = old`.
pub fn nested_dissection(a: &CsrMatrix) -> Vec<usize> {
    let n = a.n();
    let mut g = Graph {
        a,
        label: vec![0; n],
        level: vec![u32::MAX; n],
        next_label: 1,
    };
    let mut out = Vec::with_capacity(n);
    g.dissect((0..n).collect(), &mut out);
    debug_assert_eq!(out.len(), n);
    out
}
