//! Level set tracing on an equilateral triangulation and dense grid scans.

mod grid;

pub use grid::{grid_scan, Classification, GridField, GridPoint};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, HashSet, VecDeque};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

const SQRT3_2: f64 = 0.866_025_403_784_438_6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl BBox {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Self {
        BBox { re_min, re_max, im_min, im_max }
    }

    pub fn contains(&self, z: Complex64) -> bool {
        let slack = 1e-12 * (self.re_max - self.re_min).abs().max(self.im_max - self.im_min).max(1.0);
        z.re >= self.re_min - slack && z.re <= self.re_max + slack && z.im >= self.im_min - slack && z.im <= self.im_max + slack
    }

    pub fn is_valid(&self) -> bool {
        self.re_min.is_finite() && self.re_max.is_finite() && self.im_min.is_finite() && self.im_max.is_finite()
            && self.re_min < self.re_max
            && self.im_min < self.im_max
    }
}

/// Lattice vertex `(i, j)` sits at `origin + h (i + j/2, j sqrt(3)/2)`.
pub type Vertex = (i64, i64);

/// `up(i, j)` has vertices `(i, j), (i+1, j), (i, j+1)`; `down(i, j)` has
/// `(i+1, j), (i+1, j+1), (i, j+1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triangle {
    pub i: i64,
    pub j: i64,
    pub up: bool,
}

impl Triangle {
    pub fn vertices(&self) -> [Vertex; 3] {
        let (i, j) = (self.i, self.j);
        if self.up {
            [(i, j), (i + 1, j), (i, j + 1)]
        } else {
            [(i + 1, j), (i + 1, j + 1), (i, j + 1)]
        }
    }

    /// Neighbor across the edge opposite vertex `v` (index into `vertices`).
    pub fn neighbor(&self, v: usize) -> Triangle {
        let (i, j) = (self.i, self.j);
        match (self.up, v) {
            (true, 0) => Triangle { i, j, up: false },
            (true, 1) => Triangle { i: i - 1, j, up: false },
            (true, _) => Triangle { i, j: j - 1, up: false },
            (false, 0) => Triangle { i, j: j + 1, up: true },
            (false, 1) => Triangle { i, j, up: true },
            (false, _) => Triangle { i: i + 1, j, up: true },
        }
    }
}

/// Implicit equilateral triangulation covering a bounding box.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Triangulation {
    pub origin: Complex64,
    pub h: f64,
    pub bbox: BBox,
}

impl Triangulation {
    pub fn new(bbox: BBox, h: f64) -> Self {
        assert!(h > 0.0 && bbox.is_valid(), "invalid triangulation");
        Triangulation { origin: Complex64::new(bbox.re_min, bbox.im_min), h, bbox }
    }

    pub fn point(&self, v: Vertex) -> Complex64 {
        let (i, j) = (v.0 as f64, v.1 as f64);
        self.origin + Complex64::new(self.h * (i + 0.5 * j), self.h * SQRT3_2 * j)
    }

    pub fn inside(&self, t: &Triangle) -> bool {
        t.vertices().iter().all(|&v| self.bbox.contains(self.point(v)))
    }

    /// Triangle containing `z`.
    pub fn locate(&self, z: Complex64) -> Triangle {
        let w = z - self.origin;
        let y = w.im / (self.h * SQRT3_2);
        let x = w.re / self.h - 0.5 * y;
        let (i, j) = (x.floor(), y.floor());
        let (fx, fy) = (x - i, y - j);
        Triangle { i: i as i64, j: j as i64, up: fx + fy <= 1.0 }
    }

    /// Vertex index ranges `(j range, i range for given j)` covering the box.
    fn j_range(&self) -> (i64, i64) {
        let lo = ((self.bbox.im_min - self.origin.im) / (self.h * SQRT3_2)).ceil() as i64;
        let hi = ((self.bbox.im_max - self.origin.im) / (self.h * SQRT3_2)).floor() as i64;
        (lo, hi)
    }

    fn i_range(&self, j: i64) -> (i64, i64) {
        let shift = 0.5 * j as f64;
        let lo = ((self.bbox.re_min - self.origin.re) / self.h - shift).ceil() as i64;
        let hi = ((self.bbox.re_max - self.origin.re) / self.h - shift).floor() as i64;
        (lo, hi)
    }
}

/// Function values at lattice vertices, each evaluated at most once.
pub struct VertexCache<'f> {
    tri: Triangulation,
    f: &'f (dyn Fn(Complex64) -> f64 + Sync),
    values: Mutex<HashMap<Vertex, f64>>,
    evaluations: AtomicUsize,
}

impl<'f> VertexCache<'f> {
    pub fn new(tri: Triangulation, f: &'f (dyn Fn(Complex64) -> f64 + Sync)) -> Self {
        VertexCache { tri, f, values: Mutex::new(HashMap::new()), evaluations: AtomicUsize::new(0) }
    }

    pub fn get(&self, v: Vertex) -> f64 {
        if let Some(x) = self.values.lock().expect("cache lock").get(&v) {
            return *x;
        }
        let x = (self.f)(self.tri.point(v));
        self.evaluations.fetch_add(1, Ordering::Relaxed);
        *self.values.lock().expect("cache lock").entry(v).or_insert(x)
    }

    /// Evaluate missing vertices in parallel.
    pub fn prefetch(&self, vs: &[Vertex]) {
        let missing: Vec<Vertex> = {
            let map = self.values.lock().expect("cache lock");
            let mut seen = HashSet::new();
            vs.iter().copied().filter(|v| !map.contains_key(v) && seen.insert(*v)).collect()
        };
        let vals: Vec<(Vertex, f64)> = missing.par_iter().map(|&v| (v, (self.f)(self.tri.point(v)))).collect();
        self.evaluations.fetch_add(vals.len(), Ordering::Relaxed);
        let mut map = self.values.lock().expect("cache lock");
        for (v, x) in vals {
            map.entry(v).or_insert(x);
        }
    }

    pub fn evaluations(&self) -> usize {
        self.evaluations.load(Ordering::Relaxed)
    }

    pub fn distinct_vertices(&self) -> usize {
        self.values.lock().expect("cache lock").len()
    }

    pub fn values(&self) -> Vec<(Complex64, f64)> {
        let map = self.values.lock().expect("cache lock");
        let mut out: Vec<(Vertex, f64)> = map.iter().map(|(k, v)| (*k, *v)).collect();
        out.sort_by_key(|(k, _)| (k.1, k.0));
        out.into_iter().map(|(k, v)| (self.tri.point(k), v)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Polyline {
    pub points: Vec<Complex64>,
    pub closed: bool,
}

impl Polyline {
    pub fn length(&self) -> f64 {
        let mut l: f64 = self.points.windows(2).map(|w| (w[1] - w[0]).norm()).sum();
        if self.closed && self.points.len() > 1 {
            l += (self.points[0] - self.points[self.points.len() - 1]).norm();
        }
        l
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContourSet {
    pub threshold: f64,
    pub h: f64,
    pub polylines: Vec<Polyline>,
    pub triangles_visited: usize,
    /// `(vertex, F)` for every evaluated vertex.
    pub sign_data: Vec<(Complex64, f64)>,
    pub evaluations: usize,
    pub diagnostic: Option<String>,
}

fn positive(x: f64, threshold: f64) -> bool {
    x - threshold >= 0.0
}

struct Walker<'a, 'f> {
    tri: &'a Triangulation,
    cache: &'a VertexCache<'f>,
    threshold: f64,
}

impl Walker<'_, '_> {
    fn signs(&self, t: &Triangle) -> [bool; 3] {
        let vs = t.vertices();
        self.cache.prefetch(&vs);
        vs.map(|v| positive(self.cache.get(v), self.threshold))
    }

    fn mixed(&self, t: &Triangle) -> bool {
        let s = self.signs(t);
        s[0] != s[1] || s[1] != s[2]
    }

    /// Indices of the vertices opposite the two crossing edges.
    fn crossing_edges(&self, t: &Triangle) -> [usize; 2] {
        let s = self.signs(t);
        // the lone vertex is the one whose sign differs from the other two
        let lone = if s[1] == s[2] {
            0
        } else if s[0] == s[2] {
            1
        } else {
            2
        };
        let others = [(lone + 1) % 3, (lone + 2) % 3];
        others
    }

    fn crossing_point(&self, t: &Triangle, opposite: usize) -> Complex64 {
        let vs = t.vertices();
        let mut a = vs[(opposite + 1) % 3];
        let mut b = vs[(opposite + 2) % 3];
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        let (fa, fb) = (self.cache.get(a) - self.threshold, self.cache.get(b) - self.threshold);
        let (pa, pb) = (self.tri.point(a), self.tri.point(b));
        let denom = fa - fb;
        let s = if denom == 0.0 { 0.5 } else { (fa / denom).clamp(0.0, 1.0) };
        pa + (pb - pa) * s
    }

    /// Follow the curve from `start`, leaving through the edge opposite `exit`.
    /// Returns the crossing points and whether the walk closed on `start`.
    fn walk(&self, start: Triangle, mut exit: usize, visited: &mut HashSet<Triangle>) -> (Vec<Complex64>, bool) {
        let mut pts = Vec::new();
        let mut cur = start;
        loop {
            pts.push(self.crossing_point(&cur, exit));
            let next = cur.neighbor(exit);
            if next == start {
                return (pts, true);
            }
            if !self.tri.inside(&next) || visited.contains(&next) {
                return (pts, false);
            }
            visited.insert(next);
            // the shared edge has the same vertex pair; exit through the other crossing edge
            let shared: Vec<Vertex> = {
                let cv = cur.vertices();
                vec![cv[(exit + 1) % 3], cv[(exit + 2) % 3]]
            };
            let nv = next.vertices();
            let entry = (0..3).find(|&k| !shared.contains(&nv[k])).expect("neighbors share an edge");
            let [e1, e2] = self.crossing_edges(&next);
            exit = if e1 == entry { e2 } else { e1 };
            cur = next;
        }
    }
}

/// Trace every component of `{F = threshold}` reachable from the seed triangles.
pub fn trace_from(cache: &VertexCache<'_>, threshold: f64, seeds: &[Triangle]) -> ContourSet {
    let tri = cache.tri;
    let w = Walker { tri: &tri, cache, threshold };
    let mut visited = HashSet::new();
    let mut polylines = Vec::new();
    let mut queue: VecDeque<Triangle> = seeds.iter().copied().collect();
    while let Some(t) = queue.pop_front() {
        if visited.contains(&t) || !tri.inside(&t) || !w.mixed(&t) {
            continue;
        }
        visited.insert(t);
        let [e1, e2] = w.crossing_edges(&t);
        let (forward, closed) = w.walk(t, e2, &mut visited);
        let points = if closed {
            let mut p = vec![w.crossing_point(&t, e1)];
            p.extend(forward);
            p.pop();
            p
        } else {
            let (mut back, _) = w.walk(t, e1, &mut visited);
            back.reverse();
            back.extend(forward);
            back
        };
        polylines.push(Polyline { points, closed });
    }
    let diagnostic = if polylines.is_empty() { Some("no sign change found at the seeds".to_string()) } else { None };
    ContourSet {
        threshold,
        h: tri.h,
        polylines,
        triangles_visited: visited.len(),
        sign_data: cache.values(),
        evaluations: cache.evaluations(),
        diagnostic,
    }
}

/// Sign-mixed triangles found by scanning lattice lines every `stride` vertices and
/// bisecting between coarse vertices of opposite sign.
pub fn find_seeds(cache: &VertexCache<'_>, threshold: f64, stride: usize) -> Vec<Triangle> {
    let tri = cache.tri;
    let stride = stride.max(1) as i64;
    let (j0, j1) = tri.j_range();
    let mut coarse = Vec::new();
    let mut rows = Vec::new();
    let mut j = j0;
    while j <= j1 {
        let (i0, i1) = tri.i_range(j);
        let line: Vec<Vertex> = (i0..=i1).step_by(stride as usize).map(|i| (i, j)).collect();
        coarse.extend_from_slice(&line);
        rows.push(line);
        j += stride;
    }
    cache.prefetch(&coarse);
    let sign = |v: Vertex| positive(cache.get(v), threshold);
    let mut seeds = Vec::new();
    // along rows of constant j, bisect in i
    for line in &rows {
        for pair in line.windows(2) {
            let (mut a, mut b) = (pair[0], pair[1]);
            if sign(a) == sign(b) {
                continue;
            }
            while b.0 - a.0 > 1 {
                let m = (a.0 + (b.0 - a.0) / 2, a.1);
                if sign(m) == sign(a) {
                    a = m;
                } else {
                    b = m;
                }
            }
            let up = Triangle { i: a.0, j: a.1, up: true };
            let down = Triangle { i: a.0, j: a.1 - 1, up: false };
            seeds.push(if tri.inside(&up) { up } else { down });
        }
    }
    // along lines of constant i, bisect in j
    let mut cols: HashMap<i64, Vec<Vertex>> = HashMap::new();
    for line in &rows {
        for &v in line {
            cols.entry(v.0).or_default().push(v);
        }
    }
    let mut keys: Vec<i64> = cols.keys().copied().collect();
    keys.sort_unstable();
    for i in keys {
        let line = &cols[&i];
        for pair in line.windows(2) {
            let (mut a, mut b) = (pair[0], pair[1]);
            if b.1 - a.1 != stride || sign(a) == sign(b) {
                continue;
            }
            while b.1 - a.1 > 1 {
                let m = (a.0, a.1 + (b.1 - a.1) / 2);
                if sign(m) == sign(a) {
                    a = m;
                } else {
                    b = m;
                }
            }
            // edge (i, j)-(i, j+1) is shared by up(i, j) and down(i-1, j)
            let up = Triangle { i: a.0, j: a.1, up: true };
            let down = Triangle { i: a.0 - 1, j: a.1, up: false };
            seeds.push(if tri.inside(&up) { up } else { down });
        }
    }
    seeds.retain(|t| tri.inside(t));
    seeds.sort();
    seeds.dedup();
    seeds
}

/// First seed triangle from [`find_seeds`], if any.
pub fn find_seed(cache: &VertexCache<'_>, threshold: f64, stride: usize) -> Option<Triangle> {
    find_seeds(cache, threshold, stride).into_iter().next()
}

/// The triangle containing `z` if it is sign-mixed, otherwise the first sign-mixed
/// triangle met walking along the lattice row through `z` in either direction.
pub fn seed_near(cache: &VertexCache<'_>, threshold: f64, z: Complex64) -> Option<Triangle> {
    let tri = cache.tri;
    let t0 = tri.locate(z);
    let sign = |v: Vertex| positive(cache.get(v), threshold);
    if tri.inside(&t0) {
        let s = t0.vertices().map(sign);
        if s[0] != s[1] || s[1] != s[2] {
            return Some(t0);
        }
    }
    let j = t0.j;
    let (i0, i1) = tri.i_range(j);
    let start = t0.i.clamp(i0, i1);
    let s0 = sign((start, j));
    for step in [1i64, -1] {
        let mut i = start;
        while (i0..=i1).contains(&(i + step)) {
            if sign((i + step, j)) != s0 {
                let a = i.min(i + step);
                let up = Triangle { i: a, j, up: true };
                let down = Triangle { i: a, j: j - 1, up: false };
                return [up, down].into_iter().find(|t| tri.inside(t));
            }
            i += step;
        }
    }
    None
}

/// Trace `{F = threshold}` inside `bbox` with triangles of side `h`. Seeds are points
/// in the plane; with none given, a coarse scan with `stride` lattice steps finds them.
pub fn trace_contour(
    f: &(dyn Fn(Complex64) -> f64 + Sync),
    threshold: f64,
    bbox: BBox,
    h: f64,
    seeds: &[Complex64],
    stride: usize,
) -> ContourSet {
    let tri = Triangulation::new(bbox, h);
    let cache = VertexCache::new(tri, f);
    let seed_tris: Vec<Triangle> = if seeds.is_empty() {
        find_seeds(&cache, threshold, stride)
    } else {
        seeds.iter().filter_map(|&z| seed_near(&cache, threshold, z)).collect()
    };
    let mut out = trace_from(&cache, threshold, &seed_tris);
    if seed_tris.is_empty() {
        out.diagnostic = Some("coarse scan found no sign change; the level set may be empty".into());
    }
    out
}
