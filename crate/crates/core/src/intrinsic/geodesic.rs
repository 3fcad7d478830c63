//! Graph approximation of geodesic distance on the two-chart sphere.

use std::collections::HashMap;

use petgraph::algo::{connected_components, dijkstra};
use petgraph::graph::{NodeIndex, UnGraph};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::MetricSource;
use crate::error::{Error, Result};
use crate::surfaces::{Chart, ChartPoint};

/// Edge endpoints, the chart the edge is measured in, and both coordinate positions.
type Candidate = (usize, usize, Chart, Vec<f64>, Vec<f64>);

/// Resolutions up to this value use every node as a shortest-path source.
const ALL_SOURCES_MAX_RESOLUTION: usize = 9;
const LANDMARKS: usize = 64;

/// Lattice points of both stereographic charts joined by neighbor edges
/// (all offsets in `{−1, 0, 1}ⁿ`) and by edges across the chart overlap.
pub struct GeodesicGraph {
    nodes: Vec<ChartPoint>,
    graph: UnGraph<(), f64>,
    resolution: usize,
    radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiameterEstimate {
    pub value: f64,
    pub resolution: usize,
    pub nodes: usize,
    pub edges: usize,
    pub sources: usize,
    pub from: ChartPoint,
    pub to: ChartPoint,
}

type Lattice = HashMap<Vec<i64>, usize>;

impl GeodesicGraph {
    pub fn build(source: &dyn MetricSource, resolution: usize, radius: f64) -> Result<Self> {
        let n = source.dim();
        if resolution < 3 {
            return Err(Error::precondition("geodesic graph needs resolution >= 3"));
        }
        if !(radius > 1.0) {
            return Err(Error::precondition("charts must overlap: radius > 1"));
        }
        let h = 2.0 * radius / (resolution - 1) as f64;
        let coord = |i: i64| (2 * i - (resolution as i64 - 1)) as f64 * 0.5 * h;

        let mut nodes = Vec::new();
        let mut lattices: [Lattice; 2] = [HashMap::new(), HashMap::new()];
        for (ci, chart) in [Chart::North, Chart::South].into_iter().enumerate() {
            for idx in lattice_indices(n, resolution) {
                let x: Vec<f64> = idx.iter().map(|&i| coord(i)).collect();
                if norm(&x) <= radius * (1.0 + 1e-12) {
                    lattices[ci].insert(idx, nodes.len());
                    nodes.push(ChartPoint::new(chart, x));
                }
            }
        }

        // Each candidate edge: endpoints, the chart it is measured in, and the
        // two coordinate positions in that chart.
        let mut candidates: Vec<Candidate> = Vec::new();
        let offsets: Vec<Vec<i64>> = lattice_offsets(n);
        for (ci, lattice) in lattices.iter().enumerate() {
            let mut keys: Vec<&Vec<i64>> = lattice.keys().collect();
            keys.sort();
            for idx in keys {
                let a = lattice[idx];
                for off in &offsets {
                    let nb: Vec<i64> = idx.iter().zip(off).map(|(i, o)| i + o).collect();
                    if let Some(&b) = lattice.get(&nb) {
                        let chart = if ci == 0 { Chart::North } else { Chart::South };
                        candidates.push((a, b, chart, nodes[a].coords.clone(), nodes[b].coords.clone()));
                    }
                }
            }
        }
        // Overlap edges: a node of one chart to the corners of the cell of the
        // other chart's lattice that contains its image.
        for (ci, lattice) in lattices.iter().enumerate() {
            let other = &lattices[1 - ci];
            let mut keys: Vec<&Vec<i64>> = lattice.keys().collect();
            keys.sort();
            for idx in keys {
                let a = lattice[idx];
                let p = &nodes[a];
                let r = norm(&p.coords);
                if r <= 1.0 / radius || r == 0.0 {
                    continue;
                }
                let q = p.transition();
                let cell: Vec<i64> = q
                    .coords
                    .iter()
                    .map(|&y| (((y + radius) / h).floor() as i64).clamp(0, resolution as i64 - 2))
                    .collect();
                for corner in lattice_indices(n, 2) {
                    let c: Vec<i64> = cell.iter().zip(&corner).map(|(a, b)| a + b).collect();
                    if let Some(&b) = other.get(&c) {
                        candidates.push((a, b, q.chart, q.coords.clone(), nodes[b].coords.clone()));
                    }
                }
            }
        }

        let lengths: Vec<f64> = candidates
            .par_iter()
            .map(|(_, _, chart, x, y)| {
                let mid: Vec<f64> = x.iter().zip(y).map(|(a, b)| 0.5 * (a + b)).collect();
                let g = source.metric_value(&ChartPoint::new(*chart, mid))?;
                let d: Vec<f64> = x.iter().zip(y).map(|(a, b)| b - a).collect();
                let mut q = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        q += g[(i, j)] * d[i] * d[j];
                    }
                }
                Ok(q.max(0.0).sqrt())
            })
            .collect::<Result<_>>()?;

        let mut graph = UnGraph::with_capacity(nodes.len(), candidates.len());
        for _ in &nodes {
            graph.add_node(());
        }
        for ((a, b, ..), len) in candidates.iter().zip(lengths) {
            if len > 0.0 {
                graph.add_edge(NodeIndex::new(*a), NodeIndex::new(*b), len);
            }
        }
        Ok(GeodesicGraph {
            nodes,
            graph,
            resolution,
            radius,
        })
    }

    pub fn nodes(&self) -> &[ChartPoint] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.graph.edge_count()
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn edge_lengths(&self) -> impl Iterator<Item = f64> + '_ {
        self.graph.edge_weights().copied()
    }

    pub fn is_connected(&self) -> bool {
        connected_components(&self.graph) == 1
    }

    /// Shortest-path distance from `source` to every node.
    pub fn distances_from(&self, source: usize) -> Vec<f64> {
        let map = dijkstra(&self.graph, NodeIndex::new(source), None, |e| *e.weight());
        let mut out = vec![f64::INFINITY; self.nodes.len()];
        for (k, v) in map {
            out[k.index()] = v;
        }
        out
    }
}

/// Largest graph distance from a set of sources: every node for coarse
/// grids, otherwise farthest-point-sampled landmarks.
pub fn diameter(gg: &GeodesicGraph) -> Result<DiameterEstimate> {
    let total = gg.node_count();
    let first = gg.distances_from(0);
    let reachable = first.iter().filter(|d| d.is_finite()).count();
    if reachable != total {
        return Err(Error::Disconnected { reachable, total });
    }
    // Near-ties resolve to the lowest index so that the landmark sequence
    // does not depend on rounding (e.g. under a constant rescaling).
    let farthest = |d: &[f64]| {
        let top = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let i = d.iter().position(|&v| v >= top * (1.0 - 1e-9)).unwrap_or(0);
        (i, top)
    };
    let (value, from, to, sources) = if gg.resolution <= ALL_SOURCES_MAX_RESOLUTION {
        let per_source: Vec<(f64, usize, usize)> = (0..total)
            .into_par_iter()
            .map(|s| {
                let (t, v) = farthest(&gg.distances_from(s));
                (v, s, t)
            })
            .collect();
        let top = per_source.iter().map(|r| r.0).fold(f64::NEG_INFINITY, f64::max);
        let best = *per_source
            .iter()
            .find(|r| r.0 >= top * (1.0 - 1e-9))
            .expect("at least one source");
        let best = (top, best.1, best.2);
        (best.0, best.1, best.2, total)
    } else {
        let mut nearest = vec![f64::INFINITY; total];
        let mut best = (f64::NEG_INFINITY, 0usize, 0usize);
        let mut source = 0usize;
        let mut dist = first;
        let count = LANDMARKS.min(total);
        for k in 0..count {
            let (t, v) = farthest(&dist);
            if v > best.0 * (1.0 + 1e-9) || best.0 == f64::NEG_INFINITY {
                best = (v, source, t);
            } else if v > best.0 {
                best.0 = v;
            }
            for (m, d) in nearest.iter_mut().zip(&dist) {
                *m = m.min(*d);
            }
            if k + 1 == count {
                break;
            }
            source = farthest(&nearest).0;
            dist = gg.distances_from(source);
        }
        (best.0, best.1, best.2, count)
    };
    Ok(DiameterEstimate {
        value,
        resolution: gg.resolution,
        nodes: total,
        edges: gg.edge_count(),
        sources,
        from: gg.nodes[from].clone(),
        to: gg.nodes[to].clone(),
    })
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn lattice_indices(n: usize, resolution: usize) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..resolution as i64).map(move |i| {
                    let mut q = p.clone();
                    q.push(i);
                    q
                })
            })
            .collect();
    }
    out
}

/// Offsets in `{−1, 0, 1}ⁿ` whose first nonzero entry is positive, so each
/// neighbor pair is visited once.
fn lattice_offsets(n: usize) -> Vec<Vec<i64>> {
    lattice_indices(n, 3)
        .into_iter()
        .map(|v| v.into_iter().map(|i| i - 1).collect::<Vec<i64>>())
        .filter(|v| v.iter().find(|&&i| i != 0).is_some_and(|&i| i > 0))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn offsets_cover_each_neighbor_once() {
        assert_eq!(lattice_offsets(2).len(), 4);
        assert_eq!(lattice_offsets(3).len(), 13);
    }
}
