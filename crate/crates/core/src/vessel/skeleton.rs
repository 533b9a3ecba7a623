use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::segpost::{label_components, Connectivity};
use crate::volume::Mask;

const EDT_INF: f64 = 1e20;

/// One pass of the lower-envelope squared distance transform along a line:
/// d[p] = min_q ((p-q)^2 + f[q]).
fn dt1d(f: &[f64], d: &mut Vec<f64>) {
    let n = f.len();
    d.clear();
    if n == 0 {
        return;
    }
    let mut v = vec![0usize; n];
    let mut z = vec![0.0f64; n + 1];
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    let mut k = 0usize;
    for q in 1..n {
        let mut s;
        loop {
            let p = v[k];
            s = ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2 * q - 2 * p) as f64;
            if s <= z[k] {
                k -= 1;
            } else {
                break;
            }
        }
        k += 1;
        v[k] = q;
        z[k] = s;
        z[k + 1] = f64::INFINITY;
    }
    k = 0;
    for q in 0..n {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        d.push((q as f64 - p as f64) * (q as f64 - p as f64) + f[p]);
    }
}

/// Squared Euclidean distance (in voxel units) from each mask voxel to the
/// nearest background voxel. Background voxels get 0; the grid border is
/// not treated as background.
fn squared_edt(mask: &Mask) -> Vec<f64> {
    let dims = mask.dims();
    let mut field: Vec<f64> = mask
        .data()
        .iter()
        .map(|&m| if m { EDT_INF } else { 0.0 })
        .collect();
    let strides = [dims[1] * dims[2], dims[2], 1usize];
    let mut line = Vec::new();
    let mut out = Vec::new();
    for axis in 0..3 {
        let n = dims[axis];
        let (a, b) = match axis {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        for u in 0..dims[a] {
            for w in 0..dims[b] {
                let base = u * strides[a] + w * strides[b];
                line.clear();
                line.extend((0..n).map(|c| field[base + c * strides[axis]]));
                dt1d(&line, &mut out);
                for (c, &v) in out.iter().enumerate() {
                    field[base + c * strides[axis]] = v;
                }
            }
        }
    }
    let cap = (dims[0] + dims[1] + dims[2]) as f64;
    for v in &mut field {
        if *v > cap * cap {
            *v = cap * cap;
        }
    }
    field
}

/// Number of independent loops (first Betti number) of the voxel solid,
/// computed from the cubical complex: b1 = b0 + b2 - chi with chi counted
/// over vertices, edges, faces and cubes, and b2 the number of enclosed
/// cavities. Assumes the mask is 26-connected (b0 = 1).
fn loop_count(mask: &Mask) -> i64 {
    let d = mask.dims();
    let get = |i: i64, j: i64, k: i64| -> bool {
        i >= 0
            && j >= 0
            && k >= 0
            && (i as usize) < d[0]
            && (j as usize) < d[1]
            && (k as usize) < d[2]
            && mask.get(i as usize, j as usize, k as usize)
    };
    let mut vertices = 0i64;
    for i in 0..=d[0] as i64 {
        for j in 0..=d[1] as i64 {
            for k in 0..=d[2] as i64 {
                let mut any = false;
                for di in -1..=0 {
                    for dj in -1..=0 {
                        for dk in -1..=0 {
                            any |= get(i + di, j + dj, k + dk);
                        }
                    }
                }
                vertices += any as i64;
            }
        }
    }
    // Edges along each axis; an edge belongs to up to four voxels.
    let mut edges = 0i64;
    for axis in 0..3usize {
        let lens = [
            d[0] as i64 + (axis != 0) as i64,
            d[1] as i64 + (axis != 1) as i64,
            d[2] as i64 + (axis != 2) as i64,
        ];
        for i in 0..lens[0] {
            for j in 0..lens[1] {
                for k in 0..lens[2] {
                    let mut any = false;
                    for da in -1..=0i64 {
                        for db in -1..=0i64 {
                            let (vi, vj, vk) = match axis {
                                0 => (i, j + da, k + db),
                                1 => (i + da, j, k + db),
                                _ => (i + da, j + db, k),
                            };
                            any |= get(vi, vj, vk);
                        }
                    }
                    edges += any as i64;
                }
            }
        }
    }
    // Faces normal to each axis; a face belongs to up to two voxels.
    let mut faces = 0i64;
    for axis in 0..3usize {
        let lens = [
            d[0] as i64 + (axis == 0) as i64,
            d[1] as i64 + (axis == 1) as i64,
            d[2] as i64 + (axis == 2) as i64,
        ];
        for i in 0..lens[0] {
            for j in 0..lens[1] {
                for k in 0..lens[2] {
                    let (vi, vj, vk) = match axis {
                        0 => (i - 1, j, k),
                        1 => (i, j - 1, k),
                        _ => (i, j, k - 1),
                    };
                    let any = get(i, j, k)
                        || match axis {
                            0 => get(vi, j, k),
                            1 => get(i, vj, k),
                            _ => get(i, j, vk),
                        };
                    faces += any as i64;
                }
            }
        }
    }
    let cubes = mask.count() as i64;
    let chi = vertices - edges + faces - cubes;
    let cavities = cavity_count(mask);
    1 + cavities - chi
}

/// Connected components of the background (6-connectivity) that do not
/// reach the grid boundary.
fn cavity_count(mask: &Mask) -> i64 {
    let d = mask.dims();
    let idx = |i: usize, j: usize, k: usize| (i * d[1] + j) * d[2] + k;
    // 0 unseen, 1 reaches outside, 2 visited cavity
    let mut state = vec![0u8; d[0] * d[1] * d[2]];
    let mut stack = Vec::new();
    let mut flood = |seed: [usize; 3], tag: u8, state: &mut Vec<u8>| {
        stack.push(seed);
        state[idx(seed[0], seed[1], seed[2])] = tag;
        while let Some([i, j, k]) = stack.pop() {
            let mut push = |ni: usize, nj: usize, nk: usize| {
                let n = idx(ni, nj, nk);
                if state[n] == 0 && !mask.data()[n] {
                    state[n] = tag;
                    stack.push([ni, nj, nk]);
                }
            };
            if i > 0 {
                push(i - 1, j, k);
            }
            if i + 1 < d[0] {
                push(i + 1, j, k);
            }
            if j > 0 {
                push(i, j - 1, k);
            }
            if j + 1 < d[1] {
                push(i, j + 1, k);
            }
            if k > 0 {
                push(i, j, k - 1);
            }
            if k + 1 < d[2] {
                push(i, j, k + 1);
            }
        }
    };
    for i in 0..d[0] {
        for j in 0..d[1] {
            for k in 0..d[2] {
                let boundary =
                    i == 0 || j == 0 || k == 0 || i == d[0] - 1 || j == d[1] - 1 || k == d[2] - 1;
                if boundary && !mask.get(i, j, k) && state[idx(i, j, k)] == 0 {
                    flood([i, j, k], 1, &mut state);
                }
            }
        }
    }
    let mut cavities = 0i64;
    for i in 0..d[0] {
        for j in 0..d[1] {
            for k in 0..d[2] {
                if !mask.get(i, j, k) && state[idx(i, j, k)] == 0 {
                    cavities += 1;
                    flood([i, j, k], 2, &mut state);
                }
            }
        }
    }
    cavities
}

/// Mask voxels as graph nodes with 26-neighborhood adjacency.
struct VoxelGraph {
    dims: [usize; 3],
    voxels: Vec<[usize; 3]>,
    node_at: Vec<u32>,
}

const NO_NODE: u32 = u32::MAX;

impl VoxelGraph {
    fn build(mask: &Mask) -> VoxelGraph {
        let dims = mask.dims();
        let mut voxels = Vec::with_capacity(mask.count());
        let mut node_at = vec![NO_NODE; dims[0] * dims[1] * dims[2]];
        for i in 0..dims[0] {
            for j in 0..dims[1] {
                for k in 0..dims[2] {
                    let idx = mask.index(i, j, k);
                    if mask.data()[idx] {
                        node_at[idx] = voxels.len() as u32;
                        voxels.push([i, j, k]);
                    }
                }
            }
        }
        VoxelGraph {
            dims,
            voxels,
            node_at,
        }
    }

    fn neighbors(&self, node: u32, out: &mut Vec<(u32, f64)>) {
        out.clear();
        let [i, j, k] = self.voxels[node as usize];
        for di in -1i64..=1 {
            for dj in -1i64..=1 {
                for dk in -1i64..=1 {
                    if di == 0 && dj == 0 && dk == 0 {
                        continue;
                    }
                    let (ni, nj, nk) = (i as i64 + di, j as i64 + dj, k as i64 + dk);
                    if ni < 0
                        || nj < 0
                        || nk < 0
                        || ni as usize >= self.dims[0]
                        || nj as usize >= self.dims[1]
                        || nk as usize >= self.dims[2]
                    {
                        continue;
                    }
                    let idx =
                        (ni as usize * self.dims[1] + nj as usize) * self.dims[2] + nk as usize;
                    let n = self.node_at[idx];
                    if n != NO_NODE {
                        let len = ((di * di + dj * dj + dk * dk) as f64).sqrt();
                        out.push((n, len));
                    }
                }
            }
        }
    }
}

struct HeapEntry {
    cost: f64,
    node: u32,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cost == other.cost && self.node == other.node
    }
}
impl Eq for HeapEntry {}
impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // Reversed: BinaryHeap is a max-heap, we want the cheapest first.
        // Costs are finite and nonnegative by construction.
        other
            .cost
            .partial_cmp(&self.cost)
            .unwrap()
            .then_with(|| other.node.cmp(&self.node))
    }
}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn dijkstra(
    graph: &VoxelGraph,
    start: u32,
    edge_cost: impl Fn(u32, u32, f64) -> f64,
) -> (Vec<f64>, Vec<u32>) {
    let n = graph.voxels.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut prev = vec![NO_NODE; n];
    let mut heap = BinaryHeap::new();
    let mut scratch = Vec::new();
    dist[start as usize] = 0.0;
    heap.push(HeapEntry {
        cost: 0.0,
        node: start,
    });
    while let Some(HeapEntry { cost, node }) = heap.pop() {
        if cost > dist[node as usize] {
            continue;
        }
        graph.neighbors(node, &mut scratch);
        for &(next, len) in &scratch {
            let c = cost + edge_cost(node, next, len);
            if c < dist[next as usize] {
                dist[next as usize] = c;
                prev[next as usize] = node;
                heap.push(HeapEntry {
                    cost: c,
                    node: next,
                });
            }
        }
    }
    (dist, prev)
}

fn farthest(dist: &[f64]) -> u32 {
    let mut best = 0usize;
    for (i, &d) in dist.iter().enumerate() {
        if d.is_finite() && d > dist[best] {
            best = i;
        }
    }
    best as u32
}

/// Extract an ordered voxel chain along the medial ridge of a tubular
/// mask.
///
/// The ridge is found in index space, so strongly anisotropic grids should
/// be resampled to near-isotropic spacing first. Endpoints come from a
/// double Dijkstra sweep (the graph-geodesic diameter), the path between
/// them follows the distance-transform ridge by penalizing steps near the
/// boundary, and each end is trimmed while the distance transform still
/// climbs, which removes the spur from the tube rim to the axis. Side
/// branches lose the double sweep and are dropped; loops are a topology
/// error.
pub fn skeletonize(mask: &Mask) -> Result<Vec<[usize; 3]>> {
    if mask.count() == 0 {
        return Err(Error::EmptyMask(
            "cannot skeletonize an empty mask".to_string(),
        ));
    }
    let (_, components) = label_components(mask, Connectivity::TwentySix);
    if components != 1 {
        return Err(Error::NotOneComponent { count: components });
    }
    let loops = loop_count(mask);
    if loops > 0 {
        return Err(Error::NonTubular(format!(
            "mask contains {loops} loop{}",
            if loops == 1 { "" } else { "s" }
        )));
    }

    let dt: Vec<f64> = squared_edt(mask).iter().map(|&v| v.sqrt()).collect();
    let graph = VoxelGraph::build(mask);
    let node_dt = |n: u32| {
        dt[(graph.voxels[n as usize][0] * graph.dims[1] + graph.voxels[n as usize][1])
            * graph.dims[2]
            + graph.voxels[n as usize][2]]
    };

    let (d0, _) = dijkstra(&graph, 0, |_, _, len| len);
    let e1 = farthest(&d0);
    let (d1, _) = dijkstra(&graph, e1, |_, _, len| len);
    let e2 = farthest(&d1);

    let dmax = (0..graph.voxels.len() as u32)
        .map(node_dt)
        .fold(0.0f64, f64::max);
    let centered = |u: u32, v: u32, len: f64| {
        let cu = 1.0 + dmax - node_dt(u);
        let cv = 1.0 + dmax - node_dt(v);
        len * (cu * cu + cv * cv) / 2.0
    };
    let (_, prev) = dijkstra(&graph, e1, centered);

    let mut path = Vec::new();
    let mut at = e2;
    loop {
        path.push(at);
        if at == e1 {
            break;
        }
        at = prev[at as usize];
    }
    path.reverse();

    // Trim the climb from each rim endpoint up to the ridge plateau.
    let max_trim = path.len() / 4;
    let mut front = 0usize;
    while front < max_trim && node_dt(path[front]) < node_dt(path[front + 1]) {
        front += 1;
    }
    let mut back = 0usize;
    while back < max_trim
        && node_dt(path[path.len() - 1 - back]) < node_dt(path[path.len() - 2 - back])
    {
        back += 1;
    }
    Ok(path[front..path.len() - back]
        .iter()
        .map(|&n| graph.voxels[n as usize])
        .collect())
}
