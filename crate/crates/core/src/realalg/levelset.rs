//! Level-set topology at desk scale: connected components of the sign-change
//! cell complex of a polynomial on a box grid (streamed slice by slice with
//! union-find), and closed-curve counting of { h = 0 } on the unit sphere
//! with a non-transversality flag.

use super::poly::RealPolynomial;
use crate::error::{Error, Result};
use rayon::prelude::*;

struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    fn new() -> Self {
        UnionFind {
            parent: Vec::new(),
            size: Vec::new(),
        }
    }

    fn make(&mut self) -> u32 {
        let id = self.parent.len() as u32;
        self.parent.push(id);
        self.size.push(1);
        id
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let gp = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = gp;
            x = gp;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        let (big, small) = if self.size[ra as usize] >= self.size[rb as usize] {
            (ra, rb)
        } else {
            (rb, ra)
        };
        self.parent[small as usize] = big;
        self.size[big as usize] += self.size[small as usize];
    }
}

#[derive(Debug, Clone)]
pub struct ComponentReport {
    pub count: usize,
    /// Marked-cell count per component, descending.
    pub component_sizes: Vec<usize>,
    pub marked_cells: usize,
}

fn sign_of(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

/// Evaluate the sign grid of a polynomial over an axis-aligned box slice by
/// recursive substitution of the trailing variables (fast path for dense
/// grids).
fn sign_grid_recursive(
    f: &RealPolynomial,
    bounds: &[(f64, f64)],
    resolution: usize,
    out: &mut Vec<i8>,
) {
    let n = f.nvars();
    debug_assert_eq!(bounds.len(), n);
    if n == 1 {
        let (lo, hi) = bounds[0];
        for i in 0..=resolution {
            let x = lo + (hi - lo) * i as f64 / resolution as f64;
            out.push(sign_of(f.eval(&[x])));
        }
        return;
    }
    let (lo, hi) = bounds[n - 1];
    if n >= 3 {
        // parallelize over the outermost substituted axis
        let slabs: Vec<Vec<i8>> = (0..=resolution)
            .into_par_iter()
            .map(|i| {
                let x = lo + (hi - lo) * i as f64 / resolution as f64;
                let sub = f.substitute_last(x);
                let mut slab = Vec::new();
                sign_grid_recursive(&sub, &bounds[..n - 1], resolution, &mut slab);
                slab
            })
            .collect();
        for slab in slabs {
            out.extend_from_slice(&slab);
        }
    } else {
        for i in 0..=resolution {
            let x = lo + (hi - lo) * i as f64 / resolution as f64;
            let sub = f.substitute_last(x);
            sign_grid_recursive(&sub, &bounds[..n - 1], resolution, out);
        }
    }
}

/// Count connected components of the set of grid cells whose corner signs
/// are mixed (or touch an exact zero), under face adjacency. The grid is
/// streamed along the last axis so only two cell slabs of ids are resident.
pub fn component_count(
    f: &RealPolynomial,
    bounds: &[(f64, f64)],
    resolution: usize,
) -> Result<ComponentReport> {
    let n = f.nvars();
    if bounds.len() != n {
        return Err(Error::DimensionMismatch(bounds.len(), n));
    }
    if !(2..=4).contains(&n) {
        return Err(Error::domain(
            "component counting supports 2 to 4 variables",
        ));
    }
    if resolution < 16 {
        return Err(Error::domain("resolution must be >= 16"));
    }
    let (lo_w, hi_w) = bounds[n - 1];
    let vertex_slice_len = (resolution + 1).pow(n as u32 - 1);
    let cell_slab_len = resolution.pow(n as u32 - 1);

    // vertex strides within a slice (axes 0..n-1)
    let mut vstride = vec![1usize; n - 1];
    for a in 1..n - 1 {
        vstride[a] = vstride[a - 1] * (resolution + 1);
    }
    let mut cstride = vec![1usize; n - 1];
    for a in 1..n - 1 {
        cstride[a] = cstride[a - 1] * resolution;
    }

    let eval_slice = |w_index: usize| -> Vec<i8> {
        let w = lo_w + (hi_w - lo_w) * w_index as f64 / resolution as f64;
        let sub = f.substitute_last(w);
        let mut out = Vec::with_capacity(vertex_slice_len);
        sign_grid_recursive(&sub, &bounds[..n - 1], resolution, &mut out);
        out
    };

    let mut uf = UnionFind::new();
    const NONE: u32 = u32::MAX;
    let mut prev_ids: Vec<u32> = vec![NONE; cell_slab_len];
    let mut cur_ids: Vec<u32> = vec![NONE; cell_slab_len];
    let mut marked_cells = 0usize;

    let mut lower = eval_slice(0);
    for w in 0..resolution {
        let upper = eval_slice(w + 1);
        cur_ids.iter_mut().for_each(|x| *x = NONE);
        // iterate cells of the slab
        let mut cell_idx = vec![0usize; n - 1];
        for lin in 0..cell_slab_len {
            // decode lin -> cell_idx
            {
                let mut rem = lin;
                for a in 0..n - 1 {
                    cell_idx[a] = rem % resolution;
                    rem /= resolution;
                }
            }
            // corner signs over both slices
            let mut has_pos = false;
            let mut has_neg = false;
            let mut has_zero = false;
            let corners = 1usize << (n - 1);
            'corner: for mask in 0..corners {
                let mut vlin = 0usize;
                for a in 0..n - 1 {
                    let off = if mask & (1 << a) != 0 { 1 } else { 0 };
                    vlin += (cell_idx[a] + off) * vstride[a];
                }
                for s in [lower[vlin], upper[vlin]] {
                    match s {
                        1 => has_pos = true,
                        -1 => has_neg = true,
                        _ => has_zero = true,
                    }
                    if (has_pos && has_neg) || has_zero {
                        break 'corner;
                    }
                }
            }
            let marked = (has_pos && has_neg) || has_zero;
            if !marked {
                continue;
            }
            marked_cells += 1;
            let id = uf.make();
            cur_ids[lin] = id;
            // in-slab neighbors at lower index per axis
            for a in 0..n - 1 {
                if cell_idx[a] > 0 {
                    let nb = cur_ids[lin - cstride[a]];
                    if nb != NONE {
                        uf.union(id, nb);
                    }
                }
            }
            // previous slab, same cell
            let nb = prev_ids[lin];
            if nb != NONE {
                uf.union(id, nb);
            }
        }
        std::mem::swap(&mut prev_ids, &mut cur_ids);
        lower = upper;
    }

    // tally roots
    let mut sizes: std::collections::HashMap<u32, usize> = std::collections::HashMap::new();
    for i in 0..uf.parent.len() as u32 {
        let r = uf.find(i);
        *sizes.entry(r).or_insert(0) += 1;
    }
    let mut component_sizes: Vec<usize> = sizes.into_values().collect();
    component_sizes.sort_unstable_by(|a, b| b.cmp(a));
    Ok(ComponentReport {
        count: component_sizes.len(),
        component_sizes,
        marked_cells,
    })
}

#[derive(Debug, Clone)]
pub struct CircleReport {
    pub count: usize,
    pub flagged_nontransversal: bool,
    pub min_tangential_gradient: f64,
}

/// Count closed curve components of { h = 0 } on the unit sphere by
/// union-find over a latitude-longitude cell grid. A near-vanishing
/// tangential gradient under grid refinement flags a non-transversal
/// intersection (count unreliable).
pub fn sphere_circle_count(h: &RealPolynomial, resolution: usize) -> Result<CircleReport> {
    if h.nvars() > 3 {
        return Err(Error::domain("sphere slicing needs at most 3 variables"));
    }
    if resolution < 16 {
        return Err(Error::domain("resolution must be >= 16"));
    }
    let h3 = h.promote(3)?;
    let coarse = sphere_scan(&h3, resolution)?;
    let fine = sphere_scan(&h3, 2 * resolution)?;
    // a transversal zero set keeps its minimum tangential gradient stable
    // under refinement; a crossing drives it to zero linearly in the cell size
    let flagged = fine.1 < 1e-8 || fine.1 < 0.6 * coarse.1;
    Ok(CircleReport {
        count: fine.0,
        flagged_nontransversal: flagged,
        min_tangential_gradient: fine.1,
    })
}

fn sphere_point(theta: f64, phi: f64) -> [f64; 3] {
    [
        theta.sin() * phi.cos(),
        theta.sin() * phi.sin(),
        theta.cos(),
    ]
}

/// (component count, min tangential gradient over marked cells)
fn sphere_scan(h: &RealPolynomial, n_lat: usize) -> Result<(usize, f64)> {
    let n_long = 2 * n_lat;
    let grads = [h.partial(0), h.partial(1), h.partial(2)];
    let vertex_sign = |i: usize, j: usize| -> i8 {
        let theta = std::f64::consts::PI * i as f64 / n_lat as f64;
        let phi = 2.0 * std::f64::consts::PI * j as f64 / n_long as f64;
        let p = sphere_point(theta, phi);
        sign_of(h.eval(&p))
    };
    // vertex sign table (lat 0..=n_lat, long 0..n_long)
    let signs: Vec<i8> = (0..=n_lat)
        .into_par_iter()
        .flat_map_iter(|i| (0..n_long).map(move |j| (i, j)))
        .map(|(i, j)| vertex_sign(i, j))
        .collect();
    let sig = |i: usize, j: usize| signs[i * n_long + (j % n_long)];

    let mut uf = UnionFind::new();
    const NONE: u32 = u32::MAX;
    let mut ids = vec![NONE; n_lat * n_long];
    let mut min_grad = f64::INFINITY;
    for i in 0..n_lat {
        for j in 0..n_long {
            let corners = [sig(i, j), sig(i + 1, j), sig(i, j + 1), sig(i + 1, j + 1)];
            let has_pos = corners.iter().any(|&s| s > 0);
            let has_neg = corners.iter().any(|&s| s < 0);
            let has_zero = corners.contains(&0);
            if !((has_pos && has_neg) || has_zero) {
                continue;
            }
            let id = uf.make();
            ids[i * n_long + j] = id;
            if j > 0 {
                let nb = ids[i * n_long + j - 1];
                if nb != NONE {
                    uf.union(id, nb);
                }
            }
            if i > 0 {
                let nb = ids[(i - 1) * n_long + j];
                if nb != NONE {
                    uf.union(id, nb);
                }
            }
            // tangential gradient at the cell center
            let theta = std::f64::consts::PI * (i as f64 + 0.5) / n_lat as f64;
            let phi = 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / n_long as f64;
            let p = sphere_point(theta, phi);
            let g = [grads[0].eval(&p), grads[1].eval(&p), grads[2].eval(&p)];
            let gn: f64 = g.iter().zip(&p).map(|(a, b)| a * b).sum();
            let tang: f64 = g
                .iter()
                .zip(&p)
                .map(|(a, b)| (a - gn * b) * (a - gn * b))
                .sum::<f64>()
                .sqrt();
            min_grad = min_grad.min(tang);
        }
    }
    // close the longitude seam
    for i in 0..n_lat {
        let (a, b) = (ids[i * n_long + n_long - 1], ids[i * n_long]);
        if a != NONE && b != NONE {
            uf.union(a, b);
        }
    }
    // all marked cells in a polar row share the pole vertex
    for row in [0, n_lat - 1] {
        let mut first: Option<u32> = None;
        for j in 0..n_long {
            let id = ids[row * n_long + j];
            if id != NONE {
                match first {
                    None => first = Some(id),
                    Some(f) => uf.union(f, id),
                }
            }
        }
    }
    let mut roots = std::collections::HashSet::new();
    for i in 0..uf.parent.len() as u32 {
        roots.insert(uf.find(i));
    }
    Ok((roots.len(), min_grad))
}
