//! Simplicial meshes of k-dimensional submanifolds of R^n: builders for the
//! parametrized surfaces and solid tori used by the comparison suite,
//! edge-graph shortest paths, intrinsic/extrinsic ball volumes with
//! fractional face counting, and a minimal ASCII format.

use crate::error::{Error, Result};
use crate::forms::small_det;
use nalgebra::DMatrix;
use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap, HashSet};

/// Simplicial k-face: vertex ids plus its k-volume.
#[derive(Debug, Clone)]
pub struct Face {
    pub vertices: Vec<usize>,
    pub volume: f64,
}

/// Discretized submanifold: vertices in R^n, simplicial k-faces with
/// volumes, and the edge graph with Euclidean lengths.
#[derive(Debug, Clone)]
pub struct MeshedSubmanifold {
    pub ambient_dim: usize,
    pub face_dim: usize,
    pub vertices: Vec<Vec<f64>>,
    pub faces: Vec<Face>,
    adjacency: Vec<Vec<(usize, f64)>>,
}

fn simplex_volume(vertices: &[Vec<f64>], ids: &[usize]) -> f64 {
    let k = ids.len() - 1;
    let n = vertices[ids[0]].len();
    let mut edges = DMatrix::zeros(n, k);
    for (c, &id) in ids[1..].iter().enumerate() {
        for r in 0..n {
            edges[(r, c)] = vertices[id][r] - vertices[ids[0]][r];
        }
    }
    let gram = edges.transpose() * &edges;
    let det = small_det(&gram).max(0.0);
    let kfact: f64 = (1..=k).map(|i| i as f64).product();
    det.sqrt() / kfact
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

impl MeshedSubmanifold {
    pub fn new(vertices: Vec<Vec<f64>>, face_ids: Vec<Vec<usize>>) -> Result<Self> {
        if vertices.is_empty() || face_ids.is_empty() {
            return Err(Error::degenerate("empty mesh"));
        }
        let ambient_dim = vertices[0].len();
        if vertices.iter().any(|v| v.len() != ambient_dim) {
            return Err(Error::degenerate("ragged vertex dimensions"));
        }
        let face_dim = face_ids[0].len() - 1;
        let mut faces = Vec::with_capacity(face_ids.len());
        let mut edge_set: HashSet<(usize, usize)> = HashSet::new();
        for ids in &face_ids {
            if ids.len() != face_dim + 1 {
                return Err(Error::degenerate("mixed face dimensions"));
            }
            if ids.iter().any(|&i| i >= vertices.len()) {
                return Err(Error::domain("face references a missing vertex"));
            }
            let volume = simplex_volume(&vertices, ids);
            if volume <= 0.0 {
                return Err(Error::degenerate(format!("degenerate face {ids:?}")));
            }
            for i in 0..ids.len() {
                for j in i + 1..ids.len() {
                    let e = (ids[i].min(ids[j]), ids[i].max(ids[j]));
                    edge_set.insert(e);
                }
            }
            faces.push(Face {
                vertices: ids.clone(),
                volume,
            });
        }
        let mut adjacency = vec![Vec::new(); vertices.len()];
        for (a, b) in edge_set {
            let d = euclid(&vertices[a], &vertices[b]);
            adjacency[a].push((b, d));
            adjacency[b].push((a, d));
        }
        let mesh = MeshedSubmanifold {
            ambient_dim,
            face_dim,
            vertices,
            faces,
            adjacency,
        };
        if !mesh.is_connected() {
            return Err(Error::degenerate("mesh edge graph is disconnected"));
        }
        Ok(mesh)
    }

    pub fn total_volume(&self) -> f64 {
        self.faces.iter().map(|f| f.volume).sum()
    }

    fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.vertices.len()];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &(w, _) in &self.adjacency[v] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == self.vertices.len()
    }

    /// Shortest-path distances from a source vertex over the edge graph.
    pub fn graph_distances(&self, source: usize) -> Vec<f64> {
        #[derive(PartialEq)]
        struct Item(f64, usize);
        impl Eq for Item {}
        impl PartialOrd for Item {
            fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
                Some(self.cmp(other))
            }
        }
        impl Ord for Item {
            fn cmp(&self, other: &Self) -> Ordering {
                // min-heap on distance
                other.0.partial_cmp(&self.0).unwrap_or(Ordering::Equal)
            }
        }
        let mut dist = vec![f64::INFINITY; self.vertices.len()];
        dist[source] = 0.0;
        let mut heap = BinaryHeap::new();
        heap.push(Item(0.0, source));
        while let Some(Item(d, v)) = heap.pop() {
            if d > dist[v] {
                continue;
            }
            for &(w, len) in &self.adjacency[v] {
                let nd = d + len;
                if nd < dist[w] {
                    dist[w] = nd;
                    heap.push(Item(nd, w));
                }
            }
        }
        dist
    }

    /// Volume of { d <= r } by fractional face counting: each face
    /// contributes volume * (fraction of its vertices inside).
    fn ball_volume_from_distances(&self, dist: &[f64], r: f64) -> f64 {
        let mut acc = 0.0;
        for f in &self.faces {
            let inside = f.vertices.iter().filter(|&&v| dist[v] <= r).count();
            if inside > 0 {
                acc += f.volume * inside as f64 / f.vertices.len() as f64;
            }
        }
        acc
    }

    /// Intrinsic ball volume: graph distances from the vertex `p`.
    pub fn intrinsic_ball_volume(&self, p: usize, r: f64) -> Result<f64> {
        if p >= self.vertices.len() {
            return Err(Error::domain("source vertex out of range"));
        }
        if !(r > 0.0) {
            return Err(Error::domain("radius must be positive"));
        }
        let dist = self.graph_distances(p);
        Ok(self.ball_volume_from_distances(&dist, r))
    }

    /// Extrinsic ball volume: ambient Euclidean distances from `center`.
    pub fn extrinsic_ball_volume(&self, center: &[f64], r: f64) -> Result<f64> {
        if center.len() != self.ambient_dim {
            return Err(Error::DimensionMismatch(center.len(), self.ambient_dim));
        }
        if !(r > 0.0) {
            return Err(Error::domain("radius must be positive"));
        }
        let dist: Vec<f64> = self.vertices.iter().map(|v| euclid(v, center)).collect();
        Ok(self.ball_volume_from_distances(&dist, r))
    }

    /// Lower bound on the graph diameter from a sample of source vertices.
    pub fn graph_diameter_lower_bound(&self, sources: usize) -> f64 {
        let step = (self.vertices.len() / sources.max(1)).max(1);
        let mut best = 0.0f64;
        for s in (0..self.vertices.len()).step_by(step) {
            let d = self.graph_distances(s);
            for &x in &d {
                if x.is_finite() {
                    best = best.max(x);
                }
            }
        }
        best
    }

    /// Nearest vertex to a point.
    pub fn nearest_vertex(&self, p: &[f64]) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, v) in self.vertices.iter().enumerate() {
            let d = euclid(v, p);
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }

    /// Minimal ASCII format: `v x0 x1 ...` lines then `f i j k ...` lines
    /// (0-based indices); `#` starts a comment.
    pub fn to_ascii(&self) -> String {
        let mut out = String::new();
        for v in &self.vertices {
            out.push('v');
            for x in v {
                out.push(' ');
                out.push_str(&format!("{x:?}"));
            }
            out.push('\n');
        }
        for f in &self.faces {
            out.push('f');
            for id in &f.vertices {
                out.push(' ');
                out.push_str(&id.to_string());
            }
            out.push('\n');
        }
        out
    }

    pub fn from_ascii(text: &str) -> Result<Self> {
        let mut vertices = Vec::new();
        let mut faces = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            match parts.next() {
                Some("v") => {
                    let coords: std::result::Result<Vec<f64>, _> =
                        parts.map(|p| p.parse::<f64>()).collect();
                    vertices.push(coords.map_err(|e| Error::Parse {
                        line: lineno + 1,
                        msg: format!("bad vertex coordinate: {e}"),
                    })?);
                }
                Some("f") => {
                    let ids: std::result::Result<Vec<usize>, _> =
                        parts.map(|p| p.parse::<usize>()).collect();
                    faces.push(ids.map_err(|e| Error::Parse {
                        line: lineno + 1,
                        msg: format!("bad face index: {e}"),
                    })?);
                }
                Some(tag) => {
                    return Err(Error::Parse {
                        line: lineno + 1,
                        msg: format!("unknown record '{tag}'"),
                    })
                }
                None => {}
            }
        }
        MeshedSubmanifold::new(vertices, faces)
    }
}

/// Triangulated image of a rectangular parameter grid under `embed`.
/// The grid is (nu + 1) x (nv + 1) vertices over [0, 1]^2 unless `wrap_u` /
/// `wrap_v` close it up periodically.
pub fn parametrized_surface(
    nu: usize,
    nv: usize,
    wrap_u: bool,
    wrap_v: bool,
    embed: impl Fn(f64, f64) -> Vec<f64>,
) -> Result<MeshedSubmanifold> {
    let cols = if wrap_u { nu } else { nu + 1 };
    let rows = if wrap_v { nv } else { nv + 1 };
    let mut vertices = Vec::with_capacity(cols * rows);
    for j in 0..rows {
        for i in 0..cols {
            let u = i as f64 / nu as f64;
            let v = j as f64 / nv as f64;
            vertices.push(embed(u, v));
        }
    }
    let vid = |i: usize, j: usize| (j % rows) * cols + (i % cols);
    // alternate the split diagonal per cell so the edge graph carries both
    // diagonal directions (tighter graph metric)
    let mut faces = Vec::with_capacity(2 * nu * nv);
    for j in 0..nv {
        for i in 0..nu {
            let (a, b, c, d) = (vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1));
            if (i + j) % 2 == 0 {
                faces.push(vec![a, b, c]);
                faces.push(vec![a, c, d]);
            } else {
                faces.push(vec![b, c, d]);
                faces.push(vec![b, d, a]);
            }
        }
    }
    MeshedSubmanifold::new(vertices, faces)
}

/// Triangulated polar disk |z| <= 1 embedded by `embed(x, y)`; `rings` radial
/// subdivisions, `sectors` angular ones. Vertex 0 is the center.
pub fn parametrized_disk(
    rings: usize,
    sectors: usize,
    embed: impl Fn(f64, f64) -> Vec<f64>,
) -> Result<MeshedSubmanifold> {
    let mut vertices = vec![embed(0.0, 0.0)];
    for ring in 1..=rings {
        let rho = ring as f64 / rings as f64;
        for s in 0..sectors {
            let th = 2.0 * std::f64::consts::PI * s as f64 / sectors as f64;
            vertices.push(embed(rho * th.cos(), rho * th.sin()));
        }
    }
    let vid = |ring: usize, s: usize| {
        if ring == 0 {
            0
        } else {
            1 + (ring - 1) * sectors + (s % sectors)
        }
    };
    let mut faces = Vec::new();
    for s in 0..sectors {
        faces.push(vec![0, vid(1, s), vid(1, s + 1)]);
    }
    for ring in 1..rings {
        for s in 0..sectors {
            let (a, b) = (vid(ring, s), vid(ring, s + 1));
            let (c, d) = (vid(ring + 1, s), vid(ring + 1, s + 1));
            faces.push(vec![a, c, d]);
            faces.push(vec![a, d, b]);
        }
    }
    MeshedSubmanifold::new(vertices, faces)
}

/// Tetrahedralized unit cube [0, 1]^3 on an m^3 grid (six tets per cell),
/// embedded by `embed`.
pub fn tetrahedralized_cube(
    m: usize,
    embed: impl Fn(f64, f64, f64) -> Vec<f64>,
) -> Result<MeshedSubmanifold> {
    let side = m + 1;
    let mut vertices = Vec::with_capacity(side * side * side);
    for k in 0..side {
        for j in 0..side {
            for i in 0..side {
                vertices.push(embed(
                    i as f64 / m as f64,
                    j as f64 / m as f64,
                    k as f64 / m as f64,
                ));
            }
        }
    }
    let vid = |i: usize, j: usize, k: usize| (k * side + j) * side + i;
    // Kuhn subdivision of each cell into 6 tets along the main diagonal
    let corner_offsets = [
        (0, 0, 0),
        (1, 0, 0),
        (0, 1, 0),
        (1, 1, 0),
        (0, 0, 1),
        (1, 0, 1),
        (0, 1, 1),
        (1, 1, 1),
    ];
    let tets: [[usize; 4]; 6] = [
        [0, 1, 3, 7],
        [0, 1, 5, 7],
        [0, 2, 3, 7],
        [0, 2, 6, 7],
        [0, 4, 5, 7],
        [0, 4, 6, 7],
    ];
    let mut faces = Vec::with_capacity(6 * m * m * m);
    for k in 0..m {
        for j in 0..m {
            for i in 0..m {
                let corners: Vec<usize> = corner_offsets
                    .iter()
                    .map(|&(di, dj, dk)| vid(i + di, j + dj, k + dk))
                    .collect();
                for t in &tets {
                    faces.push(t.iter().map(|&c| corners[c]).collect());
                }
            }
        }
    }
    MeshedSubmanifold::new(vertices, faces)
}

/// Ring torus ((R + r cos v) cos u, (R + r cos v) sin u, r sin v).
pub fn ring_torus(nu: usize, nv: usize, big_r: f64, small_r: f64) -> Result<MeshedSubmanifold> {
    parametrized_surface(nu, nv, true, true, |u, v| {
        let (tu, tv) = (
            2.0 * std::f64::consts::PI * u,
            2.0 * std::f64::consts::PI * v,
        );
        vec![
            (big_r + small_r * tv.cos()) * tu.cos(),
            (big_r + small_r * tv.cos()) * tu.sin(),
            small_r * tv.sin(),
        ]
    })
}

/// Round unit sphere from a latitude-longitude grid (poles collapsed).
pub fn lat_long_sphere(n_lat: usize, n_long: usize) -> Result<MeshedSubmanifold> {
    let mut vertices = vec![vec![0.0, 0.0, 1.0]];
    for lat in 1..n_lat {
        let theta = std::f64::consts::PI * lat as f64 / n_lat as f64;
        for lon in 0..n_long {
            let phi = 2.0 * std::f64::consts::PI * lon as f64 / n_long as f64;
            vertices.push(vec![
                theta.sin() * phi.cos(),
                theta.sin() * phi.sin(),
                theta.cos(),
            ]);
        }
    }
    vertices.push(vec![0.0, 0.0, -1.0]);
    let south = vertices.len() - 1;
    let vid = |lat: usize, lon: usize| 1 + (lat - 1) * n_long + (lon % n_long);
    let mut faces = Vec::new();
    for lon in 0..n_long {
        faces.push(vec![0, vid(1, lon), vid(1, lon + 1)]);
        faces.push(vec![south, vid(n_lat - 1, lon + 1), vid(n_lat - 1, lon)]);
    }
    for lat in 1..n_lat - 1 {
        for lon in 0..n_long {
            let (a, b) = (vid(lat, lon), vid(lat, lon + 1));
            let (c, d) = (vid(lat + 1, lon), vid(lat + 1, lon + 1));
            if (lat + lon) % 2 == 0 {
                faces.push(vec![a, c, d]);
                faces.push(vec![a, d, b]);
            } else {
                faces.push(vec![b, a, c]);
                faces.push(vec![b, c, d]);
            }
        }
    }
    MeshedSubmanifold::new(vertices, faces)
}

/// HashMap-free union by index is not needed here; exposed for tests.
pub fn face_adjacency_counts(mesh: &MeshedSubmanifold) -> HashMap<usize, usize> {
    let mut counts = HashMap::new();
    for f in &mesh.faces {
        for &v in &f.vertices {
            *counts.entry(v).or_insert(0) += 1;
        }
    }
    counts
}
