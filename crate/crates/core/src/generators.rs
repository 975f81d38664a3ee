//! Synthetic graph families used by tests, the acceptance suite, and the
//! benchmark harness.

use rand::Rng;
use rayon::prelude::*;

use crate::util::rng;
use crate::{EdgeWeight, Graph, NodeId};

fn build(n: usize, edges: &[(NodeId, NodeId)]) -> Graph {
    Graph::from_unweighted_edges(n, edges).expect("generator produced invalid edges")
}

/// Builds a unit-weight graph from per-vertex sorted, symmetric adjacency lists.
fn from_lists(lists: Vec<Vec<NodeId>>) -> Graph {
    let n = lists.len();
    let mut offsets = Vec::with_capacity(n + 1);
    offsets.push(0);
    for l in &lists {
        offsets.push(offsets.last().unwrap() + l.len());
    }
    let targets: Vec<NodeId> = lists.into_iter().flatten().collect();
    let weights = vec![1; targets.len()];
    Graph::from_raw_parts(offsets, targets, weights, vec![1; n]).expect("generator produced invalid lists")
}

pub fn path(n: usize) -> Graph {
    let edges: Vec<_> = (1..n as NodeId).map(|v| (v - 1, v)).collect();
    build(n, &edges)
}

pub fn cycle(n: usize) -> Graph {
    let mut edges: Vec<_> = (1..n as NodeId).map(|v| (v - 1, v)).collect();
    if n > 2 {
        edges.push((n as NodeId - 1, 0));
    }
    build(n, &edges)
}

/// Star with center 0 and `n - 1` leaves.
pub fn star(n: usize) -> Graph {
    let edges: Vec<_> = (1..n as NodeId).map(|v| (0, v)).collect();
    build(n, &edges)
}

pub fn complete(n: usize) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n as NodeId {
        for v in u + 1..n as NodeId {
            edges.push((u, v));
        }
    }
    build(n, &edges)
}

/// `rows × cols` grid with 4-neighborhoods, row-major IDs.
pub fn grid(rows: usize, cols: usize) -> Graph {
    let id = |r: usize, c: usize| (r * cols + c) as NodeId;
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                edges.push((id(r, c), id(r, c + 1)));
            }
            if r + 1 < rows {
                edges.push((id(r, c), id(r + 1, c)));
            }
        }
    }
    build(rows * cols, &edges)
}

/// `rows × cols` grid with 8-neighborhoods (king moves), row-major IDs.
/// Rows above and below contribute runs of three consecutive IDs.
pub fn grid8(rows: usize, cols: usize) -> Graph {
    let lists = (0..rows * cols)
        .into_par_iter()
        .map(|u| {
            let (r, c) = ((u / cols) as isize, (u % cols) as isize);
            let mut l = Vec::with_capacity(8);
            for dr in -1..=1isize {
                for dc in -1..=1isize {
                    let (rr, cc) = (r + dr, c + dc);
                    if (dr, dc) != (0, 0) && rr >= 0 && cc >= 0 && (rr as usize) < rows && (cc as usize) < cols {
                        l.push((rr as usize * cols + cc as usize) as NodeId);
                    }
                }
            }
            l
        })
        .collect();
    from_lists(lists)
}

/// Uniform random graph with `n` vertices and (up to duplicates) `m` edges.
pub fn erdos_renyi(n: usize, m: usize, seed: u64) -> Graph {
    let mut rng = rng(seed);
    let mut edges = Vec::with_capacity(m);
    if n >= 2 {
        while edges.len() < m {
            let u = rng.gen_range(0..n as NodeId);
            let v = rng.gen_range(0..n as NodeId);
            if u != v {
                edges.push((u, v));
            }
        }
    }
    // Parallel edges collapse into one with weight > 1; reset to unit weight.
    let g = build(n, &edges);
    let weights = vec![1; g.targets().len()];
    Graph::from_raw_parts(g.offsets().to_vec(), g.targets().to_vec(), weights, vec![1; n]).unwrap()
}

/// Random graph with edge probability `density` and weights in `[1, max_weight]`.
pub fn random_weighted(n: usize, density: f64, max_weight: EdgeWeight, seed: u64) -> Graph {
    let mut rng = rng(seed);
    let mut edges = Vec::new();
    for u in 0..n as NodeId {
        for v in u + 1..n as NodeId {
            if rng.gen_bool(density) {
                edges.push((u, v, rng.gen_range(1..=max_weight)));
            }
        }
    }
    Graph::from_edges(n, &edges, None).unwrap()
}

/// Random vertex weights in `[1, max_weight]` on top of an existing graph.
pub fn with_random_node_weights(g: &Graph, max_weight: i64, seed: u64) -> Graph {
    let mut rng = rng(seed);
    let weights = (0..g.node_weights().len()).map(|_| rng.gen_range(1..=max_weight)).collect();
    Graph::from_raw_parts(g.offsets().to_vec(), g.targets().to_vec(), g.edge_weights().to_vec(), weights).unwrap()
}

/// Random geometric graph on the unit square with expected average degree
/// `avg_degree`. Vertex IDs follow a row-major cell order, so neighbors tend
/// to have nearby IDs.
pub fn random_geometric(n: usize, avg_degree: f64, seed: u64) -> Graph {
    let mut rng = rng(seed);
    let radius = (avg_degree / (n as f64 * std::f64::consts::PI)).sqrt();
    let cells = ((1.0 / radius).floor() as usize).max(1);
    let cell_of = |x: f64| ((x * cells as f64) as usize).min(cells - 1);
    let mut points: Vec<(usize, f64, f64)> = (0..n)
        .map(|_| {
            let (x, y): (f64, f64) = (rng.gen(), rng.gen());
            (cell_of(y) * cells + cell_of(x), x, y)
        })
        .collect();
    points.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut cell_start = vec![0usize; cells * cells + 1];
    for p in &points {
        cell_start[p.0 + 1] += 1;
    }
    for i in 0..cells * cells {
        cell_start[i + 1] += cell_start[i];
    }
    let r2 = radius * radius;
    let lists = (0..n)
        .into_par_iter()
        .map(|u| {
            let (cell, x, y) = points[u];
            let (cy, cx) = ((cell / cells) as isize, (cell % cells) as isize);
            let mut l = Vec::new();
            for dy in -1..=1isize {
                for dx in -1..=1isize {
                    let (yy, xx) = (cy + dy, cx + dx);
                    if yy < 0 || xx < 0 || yy as usize >= cells || xx as usize >= cells {
                        continue;
                    }
                    let c = yy as usize * cells + xx as usize;
                    for v in cell_start[c]..cell_start[c + 1] {
                        let (_, vx, vy) = points[v];
                        if v != u && (vx - x).powi(2) + (vy - y).powi(2) <= r2 {
                            l.push(v as NodeId);
                        }
                    }
                }
            }
            l.sort_unstable();
            l
        })
        .collect();
    from_lists(lists)
}

/// Preferential attachment: every new vertex links to `per_vertex` earlier
/// vertices chosen proportionally to degree.
pub fn preferential_attachment(n: usize, per_vertex: usize, seed: u64) -> Graph {
    let mut rng = rng(seed);
    let mut endpoints: Vec<NodeId> = Vec::new();
    let mut edges = Vec::new();
    for u in 1..n as NodeId {
        for _ in 0..per_vertex.min(u as usize) {
            let v = if endpoints.is_empty() { 0 } else { endpoints[rng.gen_range(0..endpoints.len())] };
            edges.push((u, v));
        }
        for &(a, b) in &edges[edges.len() - per_vertex.min(u as usize)..] {
            endpoints.push(a);
            endpoints.push(b);
        }
    }
    let g = build(n, &edges);
    let weights = vec![1; g.targets().len()];
    Graph::from_raw_parts(g.offsets().to_vec(), g.targets().to_vec(), weights, vec![1; n]).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::GraphView;

    #[test]
    fn families_are_valid() {
        for g in [
            path(10),
            cycle(10),
            star(10),
            complete(6),
            grid(4, 5),
            grid8(4, 5),
            erdos_renyi(50, 200, 1),
            random_weighted(30, 0.2, 1_000_000, 2),
            random_geometric(500, 8.0, 3),
            preferential_attachment(200, 3, 4),
        ] {
            assert!(g.validate().is_empty());
        }
    }

    #[test]
    fn sizes() {
        assert_eq!(grid(64, 64).m(), 2 * 64 * 63);
        assert_eq!(complete(8).m(), 28);
        assert_eq!(grid8(3, 3).degree(4), 8);
        let rgg = random_geometric(20_000, 10.0, 1);
        let avg = rgg.arc_count() as f64 / 20_000.0;
        assert!((8.0..11.0).contains(&avg), "average degree {avg}");
    }
}
