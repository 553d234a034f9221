mod common;

use std::collections::BTreeSet;
use std::time::Instant;

use common::TAU;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sagsin_core::channel::{chord_km, GeoPosition, LayerKind};
use sagsin_core::routing::{sample_candidate_paths, Network};
use sagsin_core::testbed::{default_eve_field, layer_defaults};

/// Random geometric graph with a fixed node density: the box grows with `n`.
fn geometric_network(n: usize, seed: u64) -> Network {
    let side_km = 1000.0 * (n as f64 / 400.0).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = layer_defaults();
    let (lat0, lon0) = (-20.0, 35.0);
    let deg_lat = side_km / 111.2;
    let deg_lon = side_km / (111.2 * (lat0 as f64).to_radians().cos());
    let mut nodes: Vec<_> = (0..n)
        .map(|i| {
            let (la, lo) = if i == 0 {
                (lat0 + deg_lat / 2.0, lon0 + deg_lon / 2.0)
            } else {
                (lat0 + rng.random::<f64>() * deg_lat, lon0 + rng.random::<f64>() * deg_lon)
            };
            d.node(i, LayerKind::Ground, GeoPosition::new(la, lo, 0.0).unwrap())
        })
        .collect();
    nodes.truncate(n);
    let mut allowed = BTreeSet::new();
    for i in 0..n {
        for j in 0..n {
            if i != j && chord_km(&nodes[i].position, &nodes[j].position) <= 150.0 {
                allowed.insert((i, j));
            }
        }
    }
    let users: Vec<usize> = (n - n / 8..n).collect();
    Network::with_allowed_edges(nodes, 0, users, default_eve_field(), TAU, &allowed).unwrap()
}

/// Best-of-five sampling time per served user.
fn sampling_time(net: &Network) -> f64 {
    (0..5)
        .map(|rep| {
            let t = Instant::now();
            for &u in net.served_users() {
                sample_candidate_paths(net, u, 12, rep).unwrap();
            }
            t.elapsed().as_secs_f64() / net.served_users().len() as f64
        })
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn path_sampling_scales_near_linearly() {
    let time = |n| (1..4).map(|seed| sampling_time(&geometric_network(n, seed))).sum::<f64>();
    let ratio = time(800) / time(400);
    assert!(ratio <= 2.6, "doubling nodes multiplied sampling time by {ratio:.2}");
}
