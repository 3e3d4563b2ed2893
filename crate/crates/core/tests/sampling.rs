use std::collections::HashMap;

use gaussembed::graph::compute_all_hop_sets;
use gaussembed::ranking::{
    count_triplets, enumerate_triplets, full_loss, sample_node_anchored, weighted_loss,
    NaiveSampler, DEFAULT_TRIPLET_CAP,
};
use gaussembed::{AttributedGraph, Embeddings, GaussianEmbedding};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn triangle_pendant() -> AttributedGraph {
    AttributedGraph::from_edges(4, false, [(0, 1), (1, 2), (0, 2), (2, 3)])
        .unwrap()
        .0
}

fn random_embeddings(n: usize, l: usize, seed: u64) -> Embeddings {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<_> = (0..n)
        .map(|_| {
            GaussianEmbedding::new(
                (0..l).map(|_| rng.random_range(-1.0..1.0)).collect(),
                (0..l).map(|_| rng.random_range(0.5..2.0)).collect(),
            )
        })
        .collect();
    Embeddings::from_rows(&rows)
}

/// Mean and standard error of `draws` node-anchored estimates of the full loss.
fn anchored_estimates(g: &AttributedGraph, k: usize, emb: &Embeddings, draws: usize) -> (f64, f64) {
    let hops = compute_all_hop_sets(g, k).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut sum, mut sq) = (0.0, 0.0);
    for _ in 0..draws {
        let terms: Vec<_> = hops
            .iter()
            .flat_map(|h| sample_node_anchored(h, &mut rng).terms())
            .collect();
        let x = weighted_loss(emb, &terms);
        sum += x;
        sq += x * x;
    }
    let n = draws as f64;
    let mean = sum / n;
    (mean, ((sq / n - mean * mean) / n).sqrt())
}

#[test]
fn identical_embeddings_give_six_on_triangle_pendant() {
    let g = triangle_pendant();
    let hops = compute_all_hop_sets(&g, 2).unwrap();
    let t = enumerate_triplets(&hops, DEFAULT_TRIPLET_CAP).unwrap();
    let same = Embeddings::from_rows(&vec![GaussianEmbedding::new(vec![0.3; 2], vec![1.2; 2]); 4]);
    assert_eq!(full_loss(&same, &t).unwrap(), 6.0);
}

#[test]
fn node_anchored_estimate_is_unbiased() {
    for (g, k) in [
        (triangle_pendant(), 2),
        (
            AttributedGraph::from_edges(7, false, [(0, 1), (1, 2), (2, 3), (3, 4), (1, 5), (5, 6)])
                .unwrap()
                .0,
            3,
        ),
    ] {
        let emb = random_embeddings(g.num_nodes(), 3, 9);
        let hops = compute_all_hop_sets(&g, k).unwrap();
        let exact = full_loss(
            &emb,
            &enumerate_triplets(&hops, DEFAULT_TRIPLET_CAP).unwrap(),
        )
        .unwrap();
        let (mean, se) = anchored_estimates(&g, k, &emb, 50_000);
        assert!(
            (mean - exact).abs() <= 3.0 * se + 1e-12,
            "{mean} vs {exact} (se {se})"
        );
    }
}

#[test]
fn naive_sampler_is_uniform_over_triplets() {
    let g = AttributedGraph::from_edges(6, false, [(0, 1), (1, 2), (2, 3), (0, 4)])
        .unwrap()
        .0;
    let hops = compute_all_hop_sets(&g, 3).unwrap();
    let all = enumerate_triplets(&hops, DEFAULT_TRIPLET_CAP).unwrap();
    let sampler = NaiveSampler::new(&hops).unwrap();
    assert_eq!(sampler.total(), count_triplets(&hops));
    assert_eq!(sampler.total() as usize, all.len());

    let draws = 200_000;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut counts: HashMap<_, usize> = HashMap::new();
    for _ in 0..draws {
        *counts.entry(sampler.sample(&hops, &mut rng)).or_default() += 1;
    }
    assert!(counts.keys().all(|t| all.contains(t)));
    let expected = draws as f64 / all.len() as f64;
    let chi2: f64 = all
        .iter()
        .map(|t| {
            let o = *counts.get(t).unwrap_or(&0) as f64;
            (o - expected).powi(2) / expected
        })
        .sum();
    // Mean df, sd sqrt(2 df); six sd is far beyond chance.
    let df = (all.len() - 1) as f64;
    assert!(
        chi2 < df + 6.0 * (2.0 * df).sqrt(),
        "chi2 {chi2} with {df} df"
    );
}

#[test]
fn enumeration_respects_the_cap() {
    let hops = compute_all_hop_sets(&triangle_pendant(), 2).unwrap();
    assert!(enumerate_triplets(&hops, 5).is_err());
    assert_eq!(enumerate_triplets(&hops, 6).unwrap().len(), 6);
}
