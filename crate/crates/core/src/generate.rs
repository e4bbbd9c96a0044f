//! Instance generators: random benchmark instances, the cyclic (2,1,2)
//! family and the reduction from vertex cover in cubic graphs.

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::GenError;
use crate::model::{Agent, Couple, Hospital, HospitalId, Instance, Matching, ResidentId, Single};

/// Parameters of the random generator.
#[derive(Clone, Debug, PartialEq)]
pub struct GenParams {
    pub residents: usize,
    pub couples: usize,
    pub hospitals: usize,
    pub posts: usize,
    pub min_len: usize,
    pub max_len: usize,
    /// Popularity of the most popular hospital relative to the least.
    pub skew: f64,
}

impl GenParams {
    pub fn check(&self) -> Result<(), GenError> {
        let bad = |m: &str| Err(GenError::Params(m.to_string()));
        if self.hospitals == 0 {
            return bad("at least one hospital is required");
        }
        if 2 * self.couples > self.residents {
            return bad("couples need two residents each");
        }
        if self.posts < self.hospitals {
            return bad("posts must be at least the number of hospitals");
        }
        if self.min_len == 0 || self.min_len > self.max_len {
            return bad("list lengths must satisfy 1 <= min <= max");
        }
        if self.max_len > self.hospitals {
            return bad("maximum list length exceeds the number of hospitals");
        }
        if self.skew.is_nan() || self.skew < 1.0 {
            return bad("skew must be at least 1");
        }
        Ok(())
    }

    /// Popularity weights, linear from 1 for the first hospital to `skew`
    /// for the last.
    pub fn weights(&self) -> Vec<f64> {
        let n = self.hospitals;
        (0..n)
            .map(|j| if n == 1 { 1.0 } else { 1.0 + (self.skew - 1.0) * j as f64 / (n - 1) as f64 })
            .collect()
    }
}

/// `len` distinct hospitals drawn by weight without replacement.
fn weighted_sample(rng: &mut ChaCha8Rng, weights: &[f64], len: usize) -> Vec<HospitalId> {
    let mut w = weights.to_vec();
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        let j = WeightedIndex::new(&w).expect("positive weights remain").sample(rng);
        w[j] = 0.0;
        out.push(HospitalId(j));
    }
    out
}

/// A random instance. Each hospital gets one post and the rest land on
/// uniformly random hospitals; residents draw list lengths uniformly and
/// hospitals by popularity; hospitals rank their applicants uniformly at
/// random.
pub fn random_instance(params: &GenParams, seed: u64) -> Result<Instance, GenError> {
    params.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights = params.weights();
    let mut caps = vec![1usize; params.hospitals];
    for _ in params.hospitals..params.posts {
        caps[rng.gen_range(0..params.hospitals)] += 1;
    }

    let mut couples = Vec::with_capacity(params.couples);
    for _ in 0..params.couples {
        let len = rng.gen_range(params.min_len..=params.max_len);
        let a = weighted_sample(&mut rng, &weights, len);
        let b = weighted_sample(&mut rng, &weights, len);
        // Distinct first coordinates already make the pairs distinct.
        couples.push(Couple { pairs: a.into_iter().zip(b).collect() });
    }
    let n_singles = params.residents - 2 * params.couples;
    let mut singles = Vec::with_capacity(n_singles);
    for _ in 0..n_singles {
        let len = rng.gen_range(params.min_len..=params.max_len);
        singles.push(Single { prefs: weighted_sample(&mut rng, &weights, len) });
    }

    let mut applicants: Vec<Vec<ResidentId>> = vec![Vec::new(); params.hospitals];
    for (i, c) in couples.iter().enumerate() {
        for (m, r) in [2 * i, 2 * i + 1].into_iter().enumerate() {
            let mut hs: Vec<HospitalId> = c.pairs.iter().map(|p| if m == 0 { p.0 } else { p.1 }).collect();
            hs.sort();
            hs.dedup();
            for h in hs {
                applicants[h.0].push(ResidentId(r));
            }
        }
    }
    for (i, s) in singles.iter().enumerate() {
        for h in &s.prefs {
            applicants[h.0].push(ResidentId(2 * params.couples + i));
        }
    }
    let hospitals = caps
        .into_iter()
        .zip(applicants)
        .map(|(capacity, mut prefs)| {
            prefs.shuffle(&mut rng);
            Hospital { capacity, prefs }
        })
        .collect();
    Ok(Instance::new_validated(hospitals, couples, singles)?)
}

/// Cyclic (2,1,2) component: block `k` is couple `k` followed by a chain of
/// `chain[k]` singles, all hospitals of capacity one. Couples take resident
/// ids first, then singles block by block. Hospital `(k, a)` for
/// `a = 1..=chain[k] + 1` is numbered consecutively; the last hospital of a
/// block is the first coordinate of the next couple's pair, wrapping around.
pub fn figure2_instance(chain: &[usize]) -> Result<Instance, GenError> {
    let n = chain.len();
    if n == 0 {
        return Err(GenError::Params("at least one couple is required".into()));
    }
    if n == 1 && chain[0] == 0 {
        return Err(GenError::Params("a lone couple without singles would target one hospital twice".into()));
    }
    let mut offset = Vec::with_capacity(n);
    let mut total = 0;
    for &c in chain {
        offset.push(total);
        total += c + 1;
    }
    let hid = |k: usize, a: usize| HospitalId(offset[k] + a - 1);
    let mut single_base = Vec::with_capacity(n);
    let mut acc = 2 * n;
    for &c in chain {
        single_base.push(acc);
        acc += c;
    }
    let single = |k: usize, a: usize| ResidentId(single_base[k] + a - 1);
    let first = |k: usize| ResidentId(2 * k);
    let second = |k: usize| ResidentId(2 * k + 1);

    let couples = (0..n)
        .map(|k| {
            let prev = (k + n - 1) % n;
            Couple { pairs: vec![(hid(prev, chain[prev] + 1), hid(k, 1))] }
        })
        .collect();
    let mut singles = Vec::new();
    for (k, &c) in chain.iter().enumerate() {
        for a in 1..=c {
            singles.push(Single { prefs: vec![hid(k, a + 1), hid(k, a)] });
        }
    }
    let mut hospitals = vec![Hospital { capacity: 1, prefs: Vec::new() }; total];
    for (k, &c) in chain.iter().enumerate() {
        for a in 1..=c + 1 {
            let top = if a == c + 1 { first((k + 1) % n) } else { single(k, a) };
            let next = if a == 1 { second(k) } else { single(k, a - 1) };
            hospitals[hid(k, a).0].prefs = vec![top, next];
        }
    }
    Ok(Instance::new_validated(hospitals, couples, singles)?)
}

/// A simple 3-regular graph on vertices `0..n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CubicGraph {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl CubicGraph {
    /// Edges are normalised to `(low, high)` and kept in the given order.
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self, GenError> {
        let mut deg = vec![0usize; n];
        let mut norm = Vec::with_capacity(edges.len());
        for &(u, v) in edges {
            if u == v || u >= n || v >= n {
                return Err(GenError::NotCubic(format!("bad edge ({u},{v})")));
            }
            let e = (u.min(v), u.max(v));
            if norm.contains(&e) {
                return Err(GenError::NotCubic(format!("repeated edge ({u},{v})")));
            }
            norm.push(e);
            deg[u] += 1;
            deg[v] += 1;
        }
        if let Some(v) = deg.iter().position(|&d| d != 3) {
            return Err(GenError::NotCubic(format!("vertex {v} has degree {}", deg[v])));
        }
        Ok(CubicGraph { n, edges: norm })
    }

    pub fn num_vertices(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// The three edges at `v`, by edge index.
    pub fn incident(&self, v: usize) -> Vec<usize> {
        (0..self.edges.len()).filter(|&j| self.edges[j].0 == v || self.edges[j].1 == v).collect()
    }

    pub fn is_cover(&self, set: &[usize]) -> bool {
        self.edges.iter().all(|(u, v)| set.contains(u) || set.contains(v))
    }

    /// Smallest vertex cover size, by exhaustive search.
    pub fn min_cover_size(&self) -> usize {
        (0..=self.n)
            .find(|&k| {
                (0u32..1 << self.n).any(|mask| {
                    mask.count_ones() as usize == k
                        && self.edges.iter().all(|&(u, v)| mask >> u & 1 == 1 || mask >> v & 1 == 1)
                })
            })
            .expect("the full vertex set is a cover")
    }

    /// Renames vertex `order[i]` to `i`.
    pub fn relabel(&self, order: &[usize]) -> Self {
        let mut new = vec![0; self.n];
        for (i, &v) in order.iter().enumerate() {
            new[v] = i;
        }
        let edges: Vec<_> = self.edges.iter().map(|&(u, v)| (new[u], new[v])).collect();
        CubicGraph::new(self.n, &edges).expect("relabelling keeps the graph cubic")
    }
}

/// Complete graph on four vertices.
pub fn k4() -> CubicGraph {
    CubicGraph::new(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap()
}

/// Complete bipartite graph with sides `{0,1,2}` and `{3,4,5}`.
pub fn k33() -> CubicGraph {
    let edges: Vec<_> = (0..3).flat_map(|u| (3..6).map(move |v| (u, v))).collect();
    CubicGraph::new(6, &edges).unwrap()
}

/// Triangular prism, labelled so that the first four vertices cover it.
pub fn prism() -> CubicGraph {
    let g = CubicGraph::new(6, &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (0, 3), (1, 4), (2, 5)])
        .unwrap();
    g.relabel(&[1, 2, 3, 5, 0, 4])
}

/// Three-dimensional cube, even-parity corners first.
pub fn cube() -> CubicGraph {
    let mut edges = Vec::new();
    for u in 0..8usize {
        for b in 0..3 {
            let v = u ^ (1 << b);
            if u < v {
                edges.push((u, v));
            }
        }
    }
    let g = CubicGraph::new(8, &edges).unwrap();
    let mut order: Vec<usize> = (0..8).collect();
    order.sort_by_key(|&v| ((v as u32).count_ones() % 2, v));
    g.relabel(&order)
}

/// Petersen graph in its usual outer-cycle, spoke, pentagram layout.
pub fn petersen_standard() -> CubicGraph {
    let mut edges = Vec::new();
    for i in 0..5 {
        edges.push((i, (i + 1) % 5));
        edges.push((i, i + 5));
        edges.push((5 + i, 5 + (i + 2) % 5));
    }
    CubicGraph::new(10, &edges).unwrap()
}

/// Petersen graph relabelled so that the first six vertices cover it.
pub fn petersen() -> CubicGraph {
    // {0, 2, 8, 9} is independent in the standard layout; move it last.
    petersen_standard().relabel(&[1, 3, 4, 5, 6, 7, 0, 2, 8, 9])
}

/// Resident and hospital ids of the gadget, for building matchings.
#[derive(Clone, Debug)]
pub struct Vc3Layout {
    pub k: usize,
    /// Per cover slot `t < k`: couples (f1,f2), (f3,f4), (f5,f6).
    pub f_couples: Vec<[usize; 3]>,
    /// Per non-cover slot: couples (y1,y2), (y3,y4), (y5,y6).
    pub y_couples: Vec<[usize; 3]>,
    /// Per edge: couples (r1,r2) and (r3,r4).
    pub r_couples: Vec<[usize; 2]>,
    pub a_singles: Vec<usize>,
    pub b_singles: Vec<usize>,
    pub x_singles: Vec<usize>,
}

/// Instance produced by [`vc3_reduce`].
#[derive(Clone, Debug)]
pub struct Vc3Instance {
    pub instance: Instance,
    pub layout: Vc3Layout,
}

/// Builds the HRC instance that is solvable iff the graph has a vertex
/// cover of size `k`, in the construction's labelling. Hospitals `p_t` and
/// `q_t` rank the vertex residents by index, so a stable matching always
/// gives `p_1..p_k` to the first `k` vertex residents.
pub fn vc3_reduce(g: &CubicGraph, k: usize) -> Result<Vc3Instance, GenError> {
    let n = g.num_vertices();
    let m = g.edges().len();
    if k == 0 || k > n {
        return Err(GenError::Params(format!("cover size must lie in 1..={n}")));
    }
    let nk = n - k;

    // Hospital ids.
    let mut next_h = 0;
    let mut alloc = |count: usize| {
        let s = next_h;
        next_h += count;
        s
    };
    let g_base = alloc(3 * k);
    let z_base = alloc(3 * nk);
    let h_base = alloc(2 * m);
    let p_base = alloc(k);
    let q_base = alloc(nk);
    let gh = |t: usize, i: usize| HospitalId(g_base + 3 * t + i);
    let zh = |t: usize, i: usize| HospitalId(z_base + 3 * t + i);
    let hh = |j: usize, r: usize| HospitalId(h_base + 2 * j + r);
    let ph = |t: usize| HospitalId(p_base + t);
    let qh = |t: usize| HospitalId(q_base + t);

    // Couples: F gadgets, Y gadgets, then two per edge.
    let mut couples = Vec::new();
    let mut f_couples = Vec::new();
    for t in 0..k {
        let base = couples.len();
        couples.push(Couple { pairs: vec![(gh(t, 0), gh(t, 1))] });
        couples.push(Couple { pairs: vec![(gh(t, 1), gh(t, 2))] });
        couples.push(Couple { pairs: vec![(gh(t, 2), gh(t, 0))] });
        f_couples.push([base, base + 1, base + 2]);
    }
    let mut y_couples = Vec::new();
    for t in 0..nk {
        let base = couples.len();
        couples.push(Couple { pairs: vec![(zh(t, 0), zh(t, 1))] });
        couples.push(Couple { pairs: vec![(zh(t, 1), zh(t, 2))] });
        couples.push(Couple { pairs: vec![(zh(t, 2), zh(t, 0))] });
        y_couples.push([base, base + 1, base + 2]);
    }
    let mut r_couples = Vec::new();
    for j in 0..m {
        let base = couples.len();
        couples.push(Couple { pairs: vec![(hh(j, 0), hh(j, 1))] });
        couples.push(Couple { pairs: vec![(hh(j, 0), hh(j, 1))] });
        r_couples.push([base, base + 1]);
    }
    let nc = couples.len();
    let cres = |c: usize, member: usize| ResidentId(2 * c + member);

    // Singles: a_t, b_t, x_i.
    let mut singles = Vec::new();
    let a_singles: Vec<usize> = (0..k)
        .map(|t| {
            singles.push(Single { prefs: vec![ph(t), gh(t, 0)] });
            singles.len() - 1
        })
        .collect();
    let b_singles: Vec<usize> = (0..nk)
        .map(|t| {
            singles.push(Single { prefs: vec![qh(t), zh(t, 0)] });
            singles.len() - 1
        })
        .collect();
    // Hospital of edge j on the side of endpoint v.
    let side = |j: usize, v: usize| usize::from(g.edges()[j].0 != v);
    let x_singles: Vec<usize> = (0..n)
        .map(|v| {
            let mut prefs: Vec<HospitalId> = (0..k).map(ph).collect();
            prefs.extend(g.incident(v).into_iter().map(|j| hh(j, side(j, v))));
            prefs.extend((0..nk).map(qh));
            singles.push(Single { prefs });
            singles.len() - 1
        })
        .collect();
    let sres = |s: usize| ResidentId(2 * nc + s);
    let xres = |v: usize| sres(x_singles[v]);

    let mut hospitals = vec![Hospital { capacity: 1, prefs: Vec::new() }; next_h];
    for t in 0..k {
        let [c1, c2, c3] = f_couples[t];
        hospitals[gh(t, 0).0].prefs = vec![sres(a_singles[t]), cres(c1, 0), cres(c3, 1)];
        hospitals[gh(t, 1).0].prefs = vec![cres(c2, 0), cres(c1, 1)];
        hospitals[gh(t, 2).0].prefs = vec![cres(c3, 0), cres(c2, 1)];
        let mut p: Vec<ResidentId> = (0..n).map(xres).collect();
        p.push(sres(a_singles[t]));
        hospitals[ph(t).0].prefs = p;
    }
    for t in 0..nk {
        let [c1, c2, c3] = y_couples[t];
        hospitals[zh(t, 0).0].prefs = vec![sres(b_singles[t]), cres(c1, 0), cres(c3, 1)];
        hospitals[zh(t, 1).0].prefs = vec![cres(c2, 0), cres(c1, 1)];
        hospitals[zh(t, 2).0].prefs = vec![cres(c3, 0), cres(c2, 1)];
        let mut q: Vec<ResidentId> = (0..n).map(xres).collect();
        q.push(sres(b_singles[t]));
        hospitals[qh(t).0].prefs = q;
    }
    for (j, &(u, v)) in g.edges().iter().enumerate() {
        let [c12, c34] = r_couples[j];
        hospitals[hh(j, 0).0].prefs = vec![cres(c12, 0), xres(u), cres(c34, 0)];
        hospitals[hh(j, 1).0].prefs = vec![cres(c34, 1), xres(v), cres(c12, 1)];
    }
    let instance = Instance::new_validated(hospitals, couples, singles)?;
    Ok(Vc3Instance {
        instance,
        layout: Vc3Layout { k, f_couples, y_couples, r_couples, a_singles, b_singles, x_singles },
    })
}

/// The matching read off a vertex cover of size `k`. It is stable when the
/// cover is `{0, .., k-1}`; other covers leave some lower-indexed vertex
/// resident wanting a `p_t` held by a higher-indexed one.
pub fn vc_to_matching(g: &CubicGraph, red: &Vc3Instance, cover: &[usize]) -> Result<Matching, GenError> {
    let lay = &red.layout;
    let mut c: Vec<usize> = cover.to_vec();
    c.sort_unstable();
    c.dedup();
    if c.len() != lay.k || !g.is_cover(&c) {
        return Err(GenError::NotACover(lay.k));
    }
    let rest: Vec<usize> = (0..g.num_vertices()).filter(|v| !c.contains(v)).collect();
    let k = lay.k;
    let mut m = Matching::empty(&red.instance);
    for (t, &v) in c.iter().enumerate() {
        m.set(Agent::Single(lay.x_singles[v]), Some(t));
        m.set(Agent::Single(lay.a_singles[t]), Some(1));
        m.set(Agent::Couple(lay.f_couples[t][1]), Some(0));
    }
    for (t, &v) in rest.iter().enumerate() {
        m.set(Agent::Single(lay.x_singles[v]), Some(k + 3 + t));
        m.set(Agent::Single(lay.b_singles[t]), Some(1));
        m.set(Agent::Couple(lay.y_couples[t][1]), Some(0));
    }
    for (j, &(u, _)) in g.edges().iter().enumerate() {
        let pick = if c.contains(&u) { 1 } else { 0 };
        m.set(Agent::Couple(lay.r_couples[j][pick]), Some(0));
    }
    Ok(m)
}
