//! Exact transportation solver (successive shortest augmenting paths).

const EPS: f64 = 1e-15;

#[derive(Clone, Copy)]
struct Edge {
    to: usize,
    cap: f64,
    cost: f64,
}

/// Minimum total cost of moving `supply` onto `demand` under `cost[i][j]`.
///
/// Masses are expected to carry equal totals; any excess on either side is
/// left unshipped.
pub fn transport_cost(supply: &[f64], demand: &[f64], cost: &[Vec<f64>]) -> f64 {
    let (n, m) = (supply.len(), demand.len());
    let source = n + m;
    let sink = source + 1;
    let nodes = sink + 1;
    let mut edges: Vec<Edge> = Vec::new();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nodes];
    let mut add = |edges: &mut Vec<Edge>, from: usize, to: usize, cap: f64, cost: f64| {
        adj[from].push(edges.len());
        edges.push(Edge { to, cap, cost });
        adj[to].push(edges.len());
        edges.push(Edge {
            to: from,
            cap: 0.0,
            cost: -cost,
        });
    };
    for (i, &s) in supply.iter().enumerate() {
        if s > 0.0 {
            add(&mut edges, source, i, s, 0.0);
        }
    }
    for (j, &d) in demand.iter().enumerate() {
        if d > 0.0 {
            add(&mut edges, n + j, sink, d, 0.0);
        }
    }
    for i in 0..n {
        if supply[i] <= 0.0 {
            continue;
        }
        for j in 0..m {
            if demand[j] > 0.0 {
                add(&mut edges, i, n + j, f64::INFINITY, cost[i][j]);
            }
        }
    }

    let mut total = 0.0;
    loop {
        // Bellman-Ford over the residual graph; it is tiny.
        let mut dist = vec![f64::INFINITY; nodes];
        let mut via: Vec<Option<usize>> = vec![None; nodes];
        dist[source] = 0.0;
        for _ in 0..nodes {
            let mut changed = false;
            for u in 0..nodes {
                if dist[u].is_infinite() {
                    continue;
                }
                for &e in &adj[u] {
                    let edge = edges[e];
                    if edge.cap > EPS && dist[u] + edge.cost < dist[edge.to] - 1e-15 {
                        dist[edge.to] = dist[u] + edge.cost;
                        via[edge.to] = Some(e);
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        if dist[sink].is_infinite() {
            break;
        }
        let mut push = f64::INFINITY;
        let mut v = sink;
        while let Some(e) = via[v] {
            push = push.min(edges[e].cap);
            v = edges[e ^ 1].to;
        }
        if push <= EPS {
            break;
        }
        let mut v = sink;
        while let Some(e) = via[v] {
            edges[e].cap -= push;
            edges[e ^ 1].cap += push;
            v = edges[e ^ 1].to;
        }
        total += push * dist[sink];
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two() {
        let c = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        assert_eq!(transport_cost(&[1.0, 0.0], &[0.0, 1.0], &c), 1.0);
        assert!((transport_cost(&[0.5, 0.5], &[0.25, 0.75], &c) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn negative_cycle_reroute_is_used() {
        // Greedy would ship 0 -> 0 first; optimum needs rerouting.
        let c = vec![vec![1.0, 2.0], vec![1.0, 10.0]];
        let got = transport_cost(&[1.0, 1.0], &[1.0, 1.0], &c);
        assert!((got - 3.0).abs() < 1e-12);
    }
}
