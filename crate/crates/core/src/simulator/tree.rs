use std::fmt::Write as _;
use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;

use super::rng::{child_key, root_key, HashMarks, MarkSource, VertexMark};
use crate::error::{domain, Error, Result};
use crate::model::{AspectRule, LogPoint, SplitRule};
use crate::paths::{HybridPath, PathSet, Track};

/// Default bound on materialized vertices.
pub const DEFAULT_CAP: usize = 10_000_000;

/// Subtrees rooted above this depth are expanded in parallel.
const PAR_DEPTH: u32 = 14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Horizon {
    /// Every vertex born at or before this time.
    Time(f64),
    /// Every vertex of generation at most this.
    Generation(u32),
}

/// Outcome of one split: the parent's death time, direction, and the two
/// children's keys and log-sides.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Split {
    pub t_death: f64,
    pub splits_base: bool,
    pub children: [(u64, f64, f64); 2],
}

/// Applies the recursion at a vertex with key `key` at `(x, y)` born at `t_birth`.
#[inline]
pub(crate) fn split(rule: &dyn SplitRule, mark: &VertexMark, key: u64, x: f64, y: f64, t_birth: f64) -> Split {
    let z = LogPoint { x, y };
    let splits_base = mark.u_dir <= rule.dir_prob(z);
    let (e1, e2) = (-mark.u_split.ln(), -(1.0 - mark.u_split).ln());
    let (k1, k2) = (child_key(key, 1), child_key(key, 2));
    let children = if splits_base { [(k1, x + e1, y), (k2, x + e2, y)] } else { [(k1, x, y + e1), (k2, x, y + e2)] };
    Split { t_death: t_birth + mark.e / rule.rate(z), splits_base, children }
}

/// A materialized vertex of the marked tree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vertex {
    pub key: u64,
    /// Preorder index of the parent.
    pub parent: Option<usize>,
    pub depth: u32,
    /// `0` for the root, else which child of its parent.
    pub child: u8,
    pub base: f64,
    pub height: f64,
    pub x: f64,
    pub y: f64,
    /// Lower-left corner, with the `U_split` piece placed left or below.
    pub left: f64,
    pub bottom: f64,
    pub t_birth: f64,
    pub t_death: f64,
    /// Birth time on the unit-rate clock.
    pub t_tilde: f64,
    /// `D_v`: the base is split.
    pub splits_base: bool,
    pub mark: VertexMark,
}

impl Vertex {
    pub fn pos(&self) -> LogPoint {
        LogPoint { x: self.x, y: self.y }
    }

    pub fn alive_at(&self, t: f64) -> bool {
        self.t_birth <= t && t < self.t_death
    }
}

#[derive(Debug, Clone, Copy)]
struct Seedling {
    key: u64,
    depth: u32,
    child: u8,
    base: f64,
    height: f64,
    x: f64,
    y: f64,
    left: f64,
    bottom: f64,
    t_birth: f64,
    t_tilde: f64,
}

struct Ctx<'a> {
    marks: &'a dyn MarkSource,
    rule: &'a dyn SplitRule,
    horizon: Horizon,
    cap: usize,
    par_depth: u32,
    count: AtomicUsize,
}

impl Ctx<'_> {
    fn tick(&self) -> Result<()> {
        let c = self.count.fetch_add(1, Ordering::Relaxed) + 1;
        if c > self.cap {
            return Err(Error::Resource {
                message: format!("tree expansion needs more than {} vertices", self.cap),
                reached: c,
            });
        }
        Ok(())
    }

    fn admits(&self, s: &Seedling) -> bool {
        match self.horizon {
            Horizon::Time(t) => s.t_birth <= t,
            Horizon::Generation(n) => s.depth <= n,
        }
    }

    /// The vertex (with its parent gap in `parent`) and its two children.
    fn realize(&self, s: &Seedling) -> (Vertex, [Seedling; 2]) {
        let mark = self.marks.mark(s.key);
        let sp = split(self.rule, &mark, s.key, s.x, s.y, s.t_birth);
        let v = Vertex {
            key: s.key,
            parent: None,
            depth: s.depth,
            child: s.child,
            base: s.base,
            height: s.height,
            x: s.x,
            y: s.y,
            left: s.left,
            bottom: s.bottom,
            t_birth: s.t_birth,
            t_death: sp.t_death,
            t_tilde: s.t_tilde,
            splits_base: sp.splits_base,
            mark,
        };
        let kid = |i: usize| {
            let (key, x, y) = sp.children[i];
            let mut c = Seedling {
                key,
                depth: s.depth + 1,
                child: i as u8 + 1,
                x,
                y,
                t_birth: sp.t_death,
                t_tilde: s.t_tilde + mark.e,
                ..*s
            };
            if sp.splits_base {
                let first = mark.u_split * s.base;
                c.base = if i == 0 { first } else { s.base - first };
                if i == 1 {
                    c.left += first;
                }
            } else {
                let first = mark.u_split * s.height;
                c.height = if i == 0 { first } else { s.height - first };
                if i == 1 {
                    c.bottom += first;
                }
            }
            c
        };
        (v, [kid(0), kid(1)])
    }

    /// Preorder expansion; `parent` holds the distance back to the parent.
    fn grow_serial(&self, root: Seedling, out: &mut Vec<Vertex>) -> Result<()> {
        let start = out.len();
        let mut stack: Vec<(Seedling, Option<usize>)> = vec![(root, None)];
        while let Some((s, parent)) = stack.pop() {
            self.tick()?;
            let pos = out.len();
            let (mut v, [c1, c2]) = self.realize(&s);
            v.parent = parent.map(|p| pos - p);
            out.push(v);
            for c in [c2, c1] {
                if self.admits(&c) {
                    stack.push((c, Some(pos)));
                }
            }
        }
        debug_assert!(out.len() > start);
        Ok(())
    }

    fn grow(&self, s: Seedling) -> Result<Vec<Vec<Vertex>>> {
        if s.depth >= self.par_depth {
            let mut out = Vec::new();
            self.grow_serial(s, &mut out)?;
            return Ok(vec![out]);
        }
        self.tick()?;
        let (v, [c1, c2]) = self.realize(&s);
        let sub = |c: Seedling| if self.admits(&c) { self.grow(c) } else { Ok(Vec::new()) };
        let (a, b) = rayon::join(|| sub(c1), || sub(c2));
        let (mut a, mut b) = (a?, b?);
        let len_a: usize = a.iter().map(Vec::len).sum();
        if let Some(first) = a.iter_mut().find_map(|c| c.first_mut()) {
            first.parent = Some(1);
        }
        if let Some(first) = b.iter_mut().find_map(|c| c.first_mut()) {
            first.parent = Some(1 + len_a);
        }
        let mut out = vec![vec![v]];
        out.append(&mut a);
        out.append(&mut b);
        Ok(out)
    }
}

/// The marked tree, materialized up to a horizon and stored in preorder.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkedTree {
    vertices: Vec<Vertex>,
    horizon: Horizon,
    /// Supremum of times at which the alive set is fully materialized.
    valid_until: f64,
}

impl MarkedTree {
    /// Expands the tree with hashed marks and the standard split rule.
    pub fn expand(seed: u64, horizon: Horizon, cap: usize) -> Result<Self> {
        Self::expand_with(&HashMarks, &AspectRule, root_key(seed), horizon, cap)
    }

    /// Expands from an explicit root key with any mark source and rule.
    pub fn expand_with(
        marks: &dyn MarkSource,
        rule: &dyn SplitRule,
        root: u64,
        horizon: Horizon,
        cap: usize,
    ) -> Result<Self> {
        Self::expand_inner(marks, rule, root, horizon, cap, PAR_DEPTH)
    }

    fn expand_inner(
        marks: &dyn MarkSource,
        rule: &dyn SplitRule,
        root: u64,
        horizon: Horizon,
        cap: usize,
        par_depth: u32,
    ) -> Result<Self> {
        // The population grows at least like e^t, and a full generation n
        // tree has 2^{n+1} - 1 vertices: refuse hopeless horizons up front.
        let hopeless = match horizon {
            Horizon::Time(t) => {
                if !(t >= 0.0) || !t.is_finite() {
                    return domain(format!("time horizon must be finite and >= 0, got {t}"));
                }
                t > (cap as f64).ln()
            }
            Horizon::Generation(n) => n >= 63 || (1u64 << (n + 1)) - 1 > cap as u64,
        };
        if hopeless {
            return Err(Error::Resource {
                message: format!("horizon {horizon:?} expects more than {cap} vertices"),
                reached: 0,
            });
        }
        let ctx = Ctx { marks, rule, horizon, cap, par_depth, count: AtomicUsize::new(0) };
        let seed = Seedling {
            key: root,
            depth: 0,
            child: 0,
            base: 1.0,
            height: 1.0,
            x: 0.0,
            y: 0.0,
            left: 0.0,
            bottom: 0.0,
            t_birth: 0.0,
            t_tilde: 0.0,
        };
        let chunks = ctx.grow(seed)?;
        let mut vertices = Vec::with_capacity(chunks.iter().map(Vec::len).sum());
        for c in chunks {
            vertices.extend(c);
        }
        for (i, v) in vertices.iter_mut().enumerate() {
            v.parent = v.parent.map(|gap| i - gap);
        }
        let valid_until = match horizon {
            Horizon::Time(t) => t,
            Horizon::Generation(n) => {
                vertices.iter().filter(|v| v.depth == n).map(|v| v.t_death).fold(f64::INFINITY, f64::min)
            }
        };
        Ok(MarkedTree { vertices, horizon, valid_until })
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn horizon(&self) -> Horizon {
        self.horizon
    }

    pub fn root(&self) -> &Vertex {
        &self.vertices[0]
    }

    /// Preorder indices of the children of `v` that were materialized.
    pub fn children(&self, v: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut i = v + 1;
        while i < self.vertices.len() && self.vertices[i].depth > self.vertices[v].depth {
            if self.vertices[i].parent == Some(v) {
                out.push(i);
            }
            i += 1;
        }
        out
    }

    /// Indices from the root down to `v`.
    pub fn ancestry(&self, v: usize) -> Vec<usize> {
        let mut out = vec![v];
        let mut cur = v;
        while let Some(p) = self.vertices[cur].parent {
            out.push(p);
            cur = p;
        }
        out.reverse();
        out
    }

    /// Bit-path label: `r` followed by the child digits.
    pub fn vertex_id(&self, v: usize) -> String {
        let mut id = String::from("r");
        for i in self.ancestry(v).into_iter().skip(1) {
            id.push(char::from(b'0' + self.vertices[i].child));
        }
        id
    }

    fn check_time(&self, t: f64) -> Result<()> {
        let ok = match self.horizon {
            Horizon::Time(h) => t >= 0.0 && t <= h,
            Horizon::Generation(_) => t >= 0.0 && t < self.valid_until,
        };
        if !ok {
            return domain(format!("time {t} beyond the expanded horizon {:?}", self.horizon));
        }
        Ok(())
    }

    pub fn alive_at(&self, t: f64) -> Result<AliveSet> {
        self.check_time(t)?;
        let particles = self
            .vertices
            .par_iter()
            .enumerate()
            .filter(|(_, v)| v.alive_at(t))
            .map(|(index, v)| Particle { index, pos: v.pos() })
            .collect();
        Ok(AliveSet { t, particles })
    }

    /// The lineage of `v` as a pure-jump path with time and space divided by `scale`.
    fn lineage_path(&self, v: usize, scale: f64) -> Result<HybridPath> {
        let anc = self.ancestry(v);
        let mut jx = Vec::new();
        let mut jy = Vec::new();
        for w in anc.windows(2) {
            let (p, c) = (&self.vertices[w[0]], &self.vertices[w[1]]);
            let s = c.t_birth / scale;
            if c.x > p.x {
                jx.push((s, (c.x - p.x) / scale));
            }
            if c.y > p.y {
                jy.push((s, (c.y - p.y) / scale));
            }
        }
        Ok(HybridPath::new(Track::from_jumps(&jx)?, Track::from_jumps(&jy)?))
    }

    /// `s -> Z_v(sT)/T` on `[0, 1]` for `v` alive at `T`.
    pub fn rescaled_path(&self, v: usize, t: f64) -> Result<HybridPath> {
        if !(t > 0.0) {
            return domain("scale T must be positive");
        }
        self.check_time(t)?;
        if !self.vertices.get(v).is_some_and(|x| x.alive_at(t)) {
            return domain(format!("vertex {v} is not alive at {t}"));
        }
        self.lineage_path(v, t)
    }

    /// `N_T(F)`: particles alive at `T` whose rescaled path lies in `set`.
    pub fn count_in_set(&self, t: f64, set: &PathSet) -> Result<usize> {
        self.count_partial(t, set, 1.0)
    }

    /// `N_T(F, θ)`: particles alive at `θT` whose rescaled path on `[0, θ]`
    /// extends to a member of `set`.
    pub fn count_partial(&self, t: f64, set: &PathSet, theta: f64) -> Result<usize> {
        if !(t > 0.0) {
            return domain("scale T must be positive");
        }
        if !(0.0..=1.0).contains(&theta) {
            return domain(format!("theta {theta} outside [0, 1]"));
        }
        let alive = self.alive_at(theta * t)?;
        let hits = alive
            .particles
            .par_iter()
            .map(|p| set.contains_on(&self.lineage_path(p.index, t)?, theta))
            .collect::<Result<Vec<bool>>>()?;
        Ok(hits.into_iter().filter(|&b| b).count())
    }

    /// CSV of every materialized vertex.
    pub fn snapshot_csv(&self) -> String {
        let mut s = String::from("vertex_id,B,H,X,Y,T_birth,T_death\n");
        for (i, v) in self.vertices.iter().enumerate() {
            let _ = writeln!(
                s,
                "{},{:?},{:?},{:?},{:?},{:?},{:?}",
                self.vertex_id(i),
                v.base,
                v.height,
                v.x,
                v.y,
                v.t_birth,
                v.t_death
            );
        }
        s
    }

    /// CSV of the rectangles alive at `t`, placed in the unit square.
    pub fn frame_csv(&self, t: f64) -> Result<String> {
        let alive = self.alive_at(t)?;
        let mut s = String::from(FRAME_CSV_HEADER);
        s.push('\n');
        for p in &alive.particles {
            let v = &self.vertices[p.index];
            let _ = writeln!(s, "{},{:?},{:?},{:?},{:?}", self.vertex_id(p.index), v.left, v.bottom, v.base, v.height);
        }
        Ok(s)
    }
}

pub const FRAME_CSV_HEADER: &str = "vertex_id,left,bottom,base,height";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Particle {
    /// Preorder index into the tree; the ancestry is [`MarkedTree::ancestry`].
    pub index: usize,
    pub pos: LogPoint,
}

/// `N_t`, in preorder.
#[derive(Debug, Clone, PartialEq)]
pub struct AliveSet {
    pub t: f64,
    pub particles: Vec<Particle>,
}

impl AliveSet {
    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paths::{Constraint, GoodSetSpec};
    use crate::simulator::rng::FixedMarks;

    fn tree(seed: u64, t: f64) -> MarkedTree {
        MarkedTree::expand(seed, Horizon::Time(t), DEFAULT_CAP).unwrap()
    }

    #[test]
    fn generation_zero_is_the_unit_square() {
        let t = MarkedTree::expand(1, Horizon::Generation(0), 10).unwrap();
        assert_eq!(t.len(), 1);
        let r = t.root();
        assert_eq!((r.base, r.height, r.x, r.y, r.t_birth), (1.0, 1.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn stubbed_marks_walk_the_recursion() {
        let m = FixedMarks(VertexMark { u_split: 0.5, u_dir: 0.3, e: 1.0 });
        let t = MarkedTree::expand_with(&m, &AspectRule, 9, Horizon::Generation(1), 10).unwrap();
        assert_eq!(t.len(), 3);
        assert!(t.root().splits_base);
        for c in &t.vertices()[1..] {
            assert_eq!((c.base, c.height, c.t_birth), (0.5, 1.0, 1.0));
            assert!((c.x - 2f64.ln()).abs() < 1e-15);
        }
        assert_eq!(t.vertices()[2].left, 0.5);
        assert_eq!(t.vertex_id(2), "r2");
        assert_eq!(t.children(0), vec![1, 2]);
    }

    #[test]
    fn reexpansion_and_parallelism_are_reproducible() {
        let a = tree(42, 4.0);
        let b = tree(42, 4.0);
        assert_eq!(a, b);
        let serial =
            MarkedTree::expand_inner(&HashMarks, &AspectRule, root_key(42), Horizon::Time(4.0), DEFAULT_CAP, 0)
                .unwrap();
        assert_eq!(a, serial);
        assert_ne!(a, tree(43, 4.0));
    }

    #[test]
    fn recursion_and_conservation() {
        let t = tree(3, 5.0);
        for (i, v) in t.vertices().iter().enumerate().skip(1) {
            let p = &t.vertices()[v.parent.unwrap()];
            assert_eq!(v.t_birth, p.t_death);
            assert_eq!(v.depth, p.depth + 1);
            let u = p.mark.u_split;
            let (frac, same) = if p.splits_base {
                (v.base / p.base, v.height == p.height)
            } else {
                (v.height / p.height, v.base == p.base)
            };
            assert!(same);
            let want = if v.child == 1 { u } else { 1.0 - u };
            assert!((frac - want).abs() < 1e-12 * (1.0 + 1.0 / want), "vertex {i}");
        }
        let a = t.alive_at(5.0).unwrap();
        let area: f64 = a.particles.iter().map(|p| t.vertices()[p.index].base * t.vertices()[p.index].height).sum();
        assert!((area - 1.0).abs() < 1e-9);
        let splits = t.vertices().iter().filter(|v| v.t_death <= 5.0).count();
        assert_eq!(a.len(), 1 + splits);
    }

    #[test]
    fn alive_set_growth() {
        let t = tree(5, 3.0);
        assert_eq!(t.alive_at(0.0).unwrap().particles[0].index, 0);
        let first = t.root().t_death;
        if first < 3.0 {
            assert_eq!(t.alive_at(first * (1.0 - 1e-12)).unwrap().len(), 1);
        }
        let mut last = 0;
        for k in 0..=30 {
            let n = t.alive_at(0.1 * k as f64).unwrap().len();
            assert!(n >= last);
            last = n;
        }
        assert!(t.alive_at(3.1).is_err());
        let g = MarkedTree::expand(5, Horizon::Generation(3), 100).unwrap();
        assert!(g.alive_at(g.valid_until).is_err());
    }

    #[test]
    fn rescaled_paths() {
        let m = FixedMarks(VertexMark { u_split: 0.25, u_dir: 0.3, e: 1.0 });
        let t = MarkedTree::expand_with(&m, &AspectRule, 0, Horizon::Time(1.5), 100).unwrap();
        assert_eq!(t.rescaled_path(0, 0.5).unwrap(), HybridPath::zero());
        let p = t.rescaled_path(1, 1.25).unwrap();
        let jump = 2f64.ln() / 0.625;
        assert!((p.x.value(0.8) - jump).abs() < 1e-15);
        assert_eq!(p.x.left_limit(0.8), 0.0);
        assert_eq!(p.y, Track::zero());
        assert!(t.rescaled_path(0, 1.25).is_err());
        let big = tree(8, 4.0);
        for part in big.alive_at(4.0).unwrap().particles.iter().take(50) {
            let g = big.rescaled_path(part.index, 4.0).unwrap();
            for w in g.x.knots().windows(2) {
                assert!(w[1].left >= w[0].value && w[1].value >= w[1].left);
            }
            assert!((g.x.end_value() - part.pos.x / 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn cap_is_enforced() {
        match MarkedTree::expand(1, Horizon::Time(9.0), 1000) {
            Err(Error::Resource { .. }) => {}
            other => panic!("{other:?}"),
        }
        match MarkedTree::expand(1, Horizon::Time(5.0), 1000) {
            Err(Error::Resource { reached, .. }) => assert!(reached > 1000),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn counting_examples() {
        let t = tree(11, 2.0);
        let all = PathSet::sup_ball(HybridPath::zero(), 1e9).unwrap();
        assert_eq!(t.count_in_set(2.0, &all).unwrap(), t.alive_at(2.0).unwrap().len());
        let first_jump = t
            .vertices()
            .iter()
            .skip(1)
            .map(|v| {
                let p = &t.vertices()[v.parent.unwrap()];
                (v.x - p.x) + (v.y - p.y)
            })
            .fold(f64::INFINITY, f64::min);
        if t.root().t_death < 2.0 {
            let tight = PathSet::sup_ball(HybridPath::zero(), 0.5 * first_jump / 2.0).unwrap();
            assert_eq!(t.count_in_set(2.0, &tight).unwrap(), 0);
            assert_eq!(t.count_partial(2.0, &tight, 0.0).unwrap(), 1);
        }
    }

    /// Independent count: explicit piece lists against a linear center.
    fn oracle(t: &MarkedTree, big_t: f64, lam: f64, mu: f64, r: f64, m: f64) -> usize {
        let mut count = 0;
        for (i, v) in t.vertices().iter().enumerate() {
            if !v.alive_at(big_t) {
                continue;
            }
            let mut chain = vec![i];
            while let Some(p) = t.vertices()[*chain.last().unwrap()].parent {
                chain.push(p);
            }
            chain.reverse();
            let ok = chain.iter().enumerate().all(|(k, &u)| {
                let w = &t.vertices()[u];
                let a = w.t_birth / big_t;
                let b = if k + 1 == chain.len() { 1.0 } else { t.vertices()[chain[k + 1]].t_birth / big_t };
                let (zx, zy) = (w.x / big_t, w.y / big_t);
                let far = [a, b].iter().map(|&s| (zx - lam * s).abs().max((zy - mu * s).abs())).fold(0.0, f64::max);
                let c = 2.0 * big_t.powf(-2.0 / 3.0);
                far < r && zx.min(zy) >= b / m - c && zx.max(zy) <= m * (a + c)
            });
            count += ok as usize;
        }
        count
    }

    #[test]
    fn count_matches_brute_force_oracle() {
        for seed in 0..100u64 {
            let big_t = 1.0 + (seed % 7) as f64 * 0.4;
            let t = tree(1000 + seed, big_t);
            let (lam, mu, r, m) = (0.5 + (seed % 3) as f64 * 0.5, 1.0, 0.2 + (seed % 5) as f64 * 0.2, 3.0);
            let set = PathSet::new(
                HybridPath::linear(lam, mu).unwrap(),
                vec![
                    Constraint::SupBall { radius: r },
                    Constraint::Good(GoodSetSpec::new(m, Some(big_t.max(1.01))).unwrap()),
                ],
            )
            .unwrap();
            let ours = t.count_in_set(big_t, &set).unwrap();
            assert_eq!(ours, oracle(&t, big_t, lam, mu, r, m), "seed {seed}");
        }
    }

    #[test]
    fn csv_exports() {
        let t = MarkedTree::expand(1, Horizon::Time(0.0), 10).unwrap();
        let s = t.snapshot_csv();
        assert_eq!(s.lines().count(), 2);
        assert!(s.lines().nth(1).unwrap().starts_with("r,1.0,1.0,0.0,0.0,0.0,"));
        let f = tree(2, 1.5).frame_csv(1.5).unwrap();
        assert!(f.starts_with(FRAME_CSV_HEADER));
        assert_eq!(tree(2, 1.5).snapshot_csv(), tree(2, 1.5).snapshot_csv());
    }
}
