//! The square-exponential ranking loss over hop triplets and its stochastic estimators.
//!
//! A triplet `(i, j_k, j_l)` with `j_k` in hop `k`, `j_l` in hop `l` and `k < l` contributes
//! `E_{i j_k}^2 + exp(-E_{i j_l})`. The full loss sums this over every valid triplet.
//!
//! Two unbiased estimators are provided:
//!
//! * node-anchored: per anchor, one uniform draw from every non-empty hop, with each hop
//!   pair `(k, l)` reweighted by `|N_ik| * |N_il|`;
//! * naive: uniform draws from the triplet set, scaled by `|D| / batch`.

use std::str::FromStr;

use ndarray::Array2;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::encoder::{backward_batch, forward_batch, EncoderParameters};
use crate::energy::{dim_grad, energy, Embeddings};
use crate::error::{Error, Result};
use crate::graph::{Attributes, HopNeighborhoods};

/// Default refusal threshold for exhaustive triplet enumeration.
pub const DEFAULT_TRIPLET_CAP: usize = 10_000_000;

/// A ranking constraint: `pos` (hop `k`) should be closer to `anchor` than `neg` (hop `l`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Triplet {
    pub anchor: usize,
    pub pos: usize,
    pub neg: usize,
    pub k: usize,
    pub l: usize,
}

/// A triplet with the multiplicity it carries in a loss estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedTriplet {
    pub anchor: usize,
    pub pos: usize,
    pub neg: usize,
    pub weight: f64,
}

impl From<Triplet> for WeightedTriplet {
    fn from(t: Triplet) -> Self {
        Self {
            anchor: t.anchor,
            pos: t.pos,
            neg: t.neg,
            weight: 1.0,
        }
    }
}

/// Which loss estimate drives training.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampler {
    NodeAnchored,
    Naive,
    Full,
}

impl FromStr for Sampler {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "node_anchored" => Ok(Sampler::NodeAnchored),
            "naive" => Ok(Sampler::Naive),
            "full" => Ok(Sampler::Full),
            other => Err(Error::Config(format!(
                "unknown sampler {other:?} (expected node_anchored, naive or full)"
            ))),
        }
    }
}

impl std::fmt::Display for Sampler {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Sampler::NodeAnchored => "node_anchored",
            Sampler::Naive => "naive",
            Sampler::Full => "full",
        })
    }
}

/// One triplet's loss contribution.
#[inline]
pub fn triplet_term(e_pos: f64, e_neg: f64) -> f64 {
    e_pos * e_pos + (-e_neg).exp()
}

/// Number of triplets anchored at one node: the sum of `|N_ik| * |N_il|` over `k < l`.
pub fn anchor_triplet_count(hops: &HopNeighborhoods) -> u128 {
    let sizes = hops.cardinalities();
    let mut total = 0u128;
    let mut farther: u128 = sizes.iter().map(|&s| s as u128).sum();
    for &s in &sizes {
        farther -= s as u128;
        total += s as u128 * farther;
    }
    total
}

pub fn count_triplets(hops: &[HopNeighborhoods]) -> u128 {
    hops.iter().map(anchor_triplet_count).sum()
}

/// Every valid triplet, ordered by anchor, then hop pair, then members.
pub fn enumerate_triplets(hops: &[HopNeighborhoods], cap: usize) -> Result<Vec<Triplet>> {
    let total = count_triplets(hops);
    if total > cap as u128 {
        return Err(Error::Config(format!(
            "{total} triplets exceed the enumeration cap of {cap}"
        )));
    }
    let mut out = Vec::with_capacity(total as usize);
    for h in hops {
        let sets = h.sets();
        for k in 1..=h.max_hop() {
            for l in (k + 1)..=h.max_hop() {
                for &pos in &sets[k - 1] {
                    for &neg in &sets[l - 1] {
                        out.push(Triplet {
                            anchor: h.anchor(),
                            pos,
                            neg,
                            k,
                            l,
                        });
                    }
                }
            }
        }
    }
    Ok(out)
}

fn check_nodes<'a>(n: usize, nodes: impl IntoIterator<Item = &'a WeightedTriplet>) -> Result<()> {
    for t in nodes {
        for x in [t.anchor, t.pos, t.neg] {
            if x >= n {
                return Err(Error::OutOfBounds {
                    what: "triplet node",
                    index: x,
                    limit: n,
                });
            }
        }
    }
    Ok(())
}

/// The exact loss: the sum of [`triplet_term`] over `triplets`, in order.
pub fn full_loss(embeddings: &Embeddings, triplets: &[Triplet]) -> Result<f64> {
    let weighted: Vec<WeightedTriplet> = triplets.iter().map(|&t| t.into()).collect();
    check_nodes(embeddings.len(), &weighted)?;
    Ok(weighted_loss(embeddings, &weighted))
}

/// `sum_t w_t * (E_pos^2 + exp(-E_neg))`.
pub fn weighted_loss(embeddings: &Embeddings, terms: &[WeightedTriplet]) -> f64 {
    let mut loss = 0.0;
    for t in terms {
        let a = embeddings.get(t.anchor);
        let e_pos = energy(a, embeddings.get(t.pos));
        let e_neg = energy(a, embeddings.get(t.neg));
        loss += t.weight * triplet_term(e_pos, e_neg);
    }
    loss
}

/// One node-anchored draw: a node per non-empty hop and the weight of every hop pair.
#[derive(Debug, Clone, PartialEq)]
pub struct AnchoredSample {
    pub anchor: usize,
    /// `(k, node)` for each non-empty hop `k`, ascending in `k`.
    pub chosen: Vec<(usize, usize)>,
    /// `((k, l), |N_ik| * |N_il|)` for each pair of non-empty hops with `k < l`.
    pub weights: Vec<((usize, usize), f64)>,
}

impl AnchoredSample {
    /// The weighted triplets this sample contributes (none with fewer than two hops).
    pub fn terms(&self) -> Vec<WeightedTriplet> {
        let mut out = Vec::with_capacity(self.weights.len());
        let mut w = self.weights.iter();
        for (a, &(k, pos)) in self.chosen.iter().enumerate() {
            for &(l, neg) in &self.chosen[a + 1..] {
                let &((wk, wl), weight) = w.next().expect("one weight per hop pair");
                debug_assert_eq!((wk, wl), (k, l));
                out.push(WeightedTriplet {
                    anchor: self.anchor,
                    pos,
                    neg,
                    weight,
                });
            }
        }
        out
    }
}

/// Draws one node uniformly from every non-empty hop of the anchor.
pub fn sample_node_anchored<R: Rng + ?Sized>(
    hops: &HopNeighborhoods,
    rng: &mut R,
) -> AnchoredSample {
    let mut chosen = Vec::new();
    let mut sizes = Vec::new();
    for k in 1..=hops.max_hop() {
        if let Some(j) = hops.sample(k, rng) {
            chosen.push((k, j));
            sizes.push(hops.cardinality(k));
        }
    }
    let mut weights = Vec::new();
    for a in 0..chosen.len() {
        for b in (a + 1)..chosen.len() {
            weights.push((
                (chosen[a].0, chosen[b].0),
                sizes[a] as f64 * sizes[b] as f64,
            ));
        }
    }
    AnchoredSample {
        anchor: hops.anchor(),
        chosen,
        weights,
    }
}

/// Uniform sampler over the triplet set that never materializes it.
///
/// An anchor is drawn proportionally to its triplet count, then a hop pair proportionally
/// to `|N_ik| * |N_il|`, then one member of each hop uniformly.
#[derive(Debug, Clone)]
pub struct NaiveSampler {
    anchors: Vec<usize>,
    cumulative: Vec<f64>,
    total: u128,
}

impl NaiveSampler {
    pub fn new(hops: &[HopNeighborhoods]) -> Result<Self> {
        let mut anchors = Vec::new();
        let mut cumulative = Vec::new();
        let mut acc = 0.0;
        let mut total = 0u128;
        for (i, h) in hops.iter().enumerate() {
            let c = anchor_triplet_count(h);
            if c > 0 {
                total += c;
                acc += c as f64;
                anchors.push(i);
                cumulative.push(acc);
            }
        }
        if anchors.is_empty() {
            return Err(Error::Infeasible("the triplet set is empty".into()));
        }
        Ok(Self {
            anchors,
            cumulative,
            total,
        })
    }

    /// `|D|`, the number of triplets.
    pub fn total(&self) -> u128 {
        self.total
    }

    pub fn sample<R: Rng + ?Sized>(&self, hops: &[HopNeighborhoods], rng: &mut R) -> Triplet {
        let top = *self.cumulative.last().expect("non-empty");
        let x = rng.random::<f64>() * top;
        let idx = self
            .cumulative
            .partition_point(|&c| c <= x)
            .min(self.anchors.len() - 1);
        let h = &hops[self.anchors[idx]];
        let sizes = h.cardinalities();
        let kk = sizes.len();
        let mut pair_weights = Vec::new();
        for k in 0..kk {
            for l in (k + 1)..kk {
                let w = sizes[k] as f64 * sizes[l] as f64;
                if w > 0.0 {
                    pair_weights.push(((k + 1, l + 1), w));
                }
            }
        }
        let total: f64 = pair_weights.iter().map(|p| p.1).sum();
        let mut y = rng.random::<f64>() * total;
        let mut pick = pair_weights[pair_weights.len() - 1].0;
        for &(pair, w) in &pair_weights {
            if y < w {
                pick = pair;
                break;
            }
            y -= w;
        }
        let (k, l) = pick;
        Triplet {
            anchor: h.anchor(),
            pos: h.sample(k, rng).expect("non-empty hop"),
            neg: h.sample(l, rng).expect("non-empty hop"),
            k,
            l,
        }
    }

    /// `batch` i.i.d. triplets, each weighted `|D| / batch`.
    pub fn sample_batch<R: Rng + ?Sized>(
        &self,
        hops: &[HopNeighborhoods],
        batch: usize,
        rng: &mut R,
    ) -> Vec<WeightedTriplet> {
        let weight = self.total as f64 / batch as f64;
        (0..batch)
            .map(|_| {
                let t = self.sample(hops, rng);
                WeightedTriplet { weight, ..t.into() }
            })
            .collect()
    }
}

/// `batch_size` i.i.d. uniform draws from an enumerated triplet list.
pub fn sample_naive<R: Rng + ?Sized>(
    triplets: &[Triplet],
    batch_size: usize,
    rng: &mut R,
) -> Result<Vec<Triplet>> {
    if triplets.is_empty() {
        return Err(Error::Infeasible("the triplet set is empty".into()));
    }
    Ok((0..batch_size)
        .map(|_| triplets[rng.random_range(0..triplets.len())])
        .collect())
}

/// The unbiased naive estimate `(|D| / B) * sum_batch (E_pos^2 + exp(-E_neg))`.
pub fn naive_estimate(embeddings: &Embeddings, batch: &[Triplet], total: u128) -> f64 {
    let weight = total as f64 / batch.len() as f64;
    let terms: Vec<WeightedTriplet> = batch
        .iter()
        .map(|&t| WeightedTriplet { weight, ..t.into() })
        .collect();
    weighted_loss(embeddings, &terms)
}

/// Loss estimate of weighted triplets and its gradient with respect to the encoder.
///
/// Every node touched by a term is encoded once; per-node partials are accumulated in term
/// order and pushed through the encoder in a single reverse pass.
pub fn loss_and_grads(
    params: &EncoderParameters,
    attrs: &Attributes,
    terms: &[WeightedTriplet],
) -> Result<(f64, EncoderParameters)> {
    let n = attrs.nrows();
    check_nodes(n, terms)?;
    let mut slot = vec![usize::MAX; n];
    let mut nodes = Vec::new();
    for t in terms {
        for x in [t.anchor, t.pos, t.neg] {
            if slot[x] == usize::MAX {
                slot[x] = 0;
                nodes.push(x);
            }
        }
    }
    nodes.sort_unstable();
    for (s, &x) in nodes.iter().enumerate() {
        slot[x] = s;
    }
    let (emb, cache) = forward_batch(params, attrs, &nodes)?;
    let l = emb.dim();
    let mut g_mu = Array2::<f64>::zeros((nodes.len(), l));
    let mut g_var = Array2::<f64>::zeros((nodes.len(), l));

    let mut loss = 0.0;
    {
        let mu = emb.mu.as_slice().expect("standard layout");
        let var = emb.var.as_slice().expect("standard layout");
        let gm = g_mu.as_slice_mut().expect("standard layout");
        let gv = g_var.as_slice_mut().expect("standard layout");
        let mut pair = |i: usize, j: usize, scale: f64| {
            let (oi, oj) = (i * l, j * l);
            for d in 0..l {
                let (dmu, dvi, dvj) = dim_grad(mu[oi + d], var[oi + d], mu[oj + d], var[oj + d]);
                gm[oi + d] += scale * dmu;
                gm[oj + d] -= scale * dmu;
                gv[oi + d] += scale * dvi;
                gv[oj + d] += scale * dvj;
            }
        };
        for t in terms {
            let (a, p, q) = (slot[t.anchor], slot[t.pos], slot[t.neg]);
            let e_pos = energy(emb.get(a), emb.get(p));
            let e_neg = energy(emb.get(a), emb.get(q));
            let decay = (-e_neg).exp();
            loss += t.weight * triplet_term(e_pos, e_neg);
            pair(a, p, 2.0 * t.weight * e_pos);
            pair(a, q, -t.weight * decay);
        }
    }
    if !loss.is_finite() {
        return Err(Error::NonFinite(format!("loss estimate is {loss}")));
    }
    let (grads, _) = backward_batch(params, &cache, &g_mu, &g_var, false)?;
    Ok((loss, grads))
}

/// The node-anchored estimate for a set of anchors and its encoder gradient.
pub fn stochastic_loss_and_grads(
    params: &EncoderParameters,
    attrs: &Attributes,
    samples: &[AnchoredSample],
) -> Result<(f64, EncoderParameters)> {
    let terms: Vec<WeightedTriplet> = samples.iter().flat_map(AnchoredSample::terms).collect();
    loss_and_grads(params, attrs, &terms)
}

/// Empirical variance of the stochastic gradient, summarized per parameter tensor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradVarianceSummary {
    /// `(tensor name, mean per-coordinate variance)`.
    pub blocks: Vec<(String, f64)>,
    /// Mean per-coordinate variance over all parameters.
    pub mean: f64,
    /// Triplets evaluated per gradient draw.
    pub triplets_per_draw: usize,
}

/// Draws `n_repeats` independent stochastic gradients at a fixed parameter snapshot and
/// reports their per-coordinate sample variance.
///
/// Node-anchored draws visit every anchor once; naive draws use the same number of triplets
/// (the expected node-anchored count), so the two are compared at equal cost. The full
/// strategy is deterministic and reports zero.
pub fn estimate_grad_variance<R: Rng + ?Sized>(
    params: &EncoderParameters,
    attrs: &Attributes,
    hops: &[HopNeighborhoods],
    strategy: Sampler,
    n_repeats: usize,
    rng: &mut R,
) -> Result<GradVarianceSummary> {
    if n_repeats < 2 {
        return Err(Error::Config(
            "gradient variance needs at least 2 repeats".into(),
        ));
    }
    let anchored_count: usize = hops
        .iter()
        .map(|h| {
            let m = h.nonempty_hops().len();
            m * m.saturating_sub(1) / 2
        })
        .sum();
    let naive = match strategy {
        Sampler::Naive => Some(NaiveSampler::new(hops)?),
        _ => None,
    };
    let full: Option<Vec<WeightedTriplet>> = match strategy {
        Sampler::Full => Some(
            enumerate_triplets(hops, DEFAULT_TRIPLET_CAP)?
                .into_iter()
                .map(Into::into)
                .collect(),
        ),
        _ => None,
    };

    let names = params.tensor_names();
    let mut mean = params.zeros_like();
    let mut m2 = params.zeros_like();
    let mut triplets_per_draw = 0;
    for r in 0..n_repeats {
        let terms: Vec<WeightedTriplet> = match strategy {
            Sampler::NodeAnchored => hops
                .iter()
                .flat_map(|h| sample_node_anchored(h, rng).terms())
                .collect(),
            Sampler::Naive => {
                naive
                    .as_ref()
                    .expect("built above")
                    .sample_batch(hops, anchored_count.max(1), rng)
            }
            Sampler::Full => full.clone().expect("built above"),
        };
        triplets_per_draw = terms.len();
        let (_, g) = loss_and_grads(params, attrs, &terms)?;
        // Welford update, coordinate-wise.
        let count = (r + 1) as f64;
        for ((m, s), x) in mean
            .tensors_mut()
            .into_iter()
            .zip(m2.tensors_mut())
            .zip(g.tensors())
        {
            for ((mi, si), &xi) in m.iter_mut().zip(s.iter_mut()).zip(x) {
                let delta = xi - *mi;
                *mi += delta / count;
                *si += delta * (xi - *mi);
            }
        }
    }
    let denom = (n_repeats - 1) as f64;
    let mut blocks = Vec::new();
    let mut sum = 0.0;
    let mut coords = 0usize;
    for (name, s) in names.into_iter().zip(m2.tensors()) {
        let total: f64 = s.iter().map(|v| v / denom).sum();
        sum += total;
        coords += s.len();
        blocks.push((name, total / s.len() as f64));
    }
    Ok(GradVarianceSummary {
        blocks,
        mean: sum / coords as f64,
        triplets_per_draw,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::GaussianEmbedding;
    use crate::graph::{compute_all_hop_sets, compute_hop_sets, AttributedGraph};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn graph(n: usize, directed: bool, edges: &[(usize, usize)]) -> AttributedGraph {
        AttributedGraph::from_edges(n, directed, edges.iter().copied())
            .unwrap()
            .0
    }

    fn triangle_pendant() -> AttributedGraph {
        graph(4, false, &[(0, 1), (1, 2), (0, 2), (2, 3)])
    }

    fn identical(n: usize, l: usize) -> Embeddings {
        Embeddings::from_rows(&vec![GaussianEmbedding::new(vec![0.2; l], vec![1.5; l]); n])
    }

    #[test]
    fn triangle_pendant_has_six_triplets() {
        let hops = compute_all_hop_sets(&triangle_pendant(), 2).unwrap();
        let t = enumerate_triplets(&hops, DEFAULT_TRIPLET_CAP).unwrap();
        assert_eq!(t.len(), 6);
        let per_anchor: Vec<usize> = (0..4)
            .map(|i| t.iter().filter(|x| x.anchor == i).count())
            .collect();
        assert_eq!(per_anchor, vec![2, 2, 0, 2]);
        assert_eq!(full_loss(&identical(4, 3), &t).unwrap(), 6.0);
        assert_eq!(full_loss(&identical(4, 3), &[]).unwrap(), 0.0);
    }

    #[test]
    fn single_edge_has_no_triplets() {
        let hops = compute_all_hop_sets(&graph(2, false, &[(0, 1)]), 2).unwrap();
        assert!(enumerate_triplets(&hops, 10).unwrap().is_empty());
        assert!(NaiveSampler::new(&hops).is_err());
        assert!(sample_naive(&[], 3, &mut ChaCha8Rng::seed_from_u64(0)).is_err());
    }

    #[test]
    fn star_leaf_triplets() {
        let star = graph(4, false, &[(0, 1), (0, 2), (0, 3)]);
        let h = compute_hop_sets(&star, 1, 2).unwrap();
        assert_eq!(h.sets(), vec![vec![0], vec![2, 3]]);
        let t = enumerate_triplets(std::slice::from_ref(&h), 100).unwrap();
        assert_eq!(t.len(), 2);
    }

    #[test]
    fn enumeration_cap_is_enforced() {
        let hops = compute_all_hop_sets(&triangle_pendant(), 2).unwrap();
        assert!(matches!(
            enumerate_triplets(&hops, 5),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn vanishing_term_limit() {
        assert_eq!(triplet_term(0.0, 800.0), 0.0);
        assert!(triplet_term(0.0, 30.0) > 0.0);
    }

    #[test]
    fn anchored_sample_weights() {
        let path = graph(2, false, &[(0, 1)]);
        // anchor 0 of a 3-node path 0-1-2: N1={1}, N2={2}
        let p3 = graph(3, false, &[(0, 1), (1, 2)]);
        let h = compute_hop_sets(&p3, 0, 2).unwrap();
        let s = sample_node_anchored(&h, &mut ChaCha8Rng::seed_from_u64(0));
        assert_eq!(s.chosen, vec![(1, 1), (2, 2)]);
        assert_eq!(s.weights, vec![((1, 2), 1.0)]);

        let g = graph(6, false, &[(0, 1), (0, 2)]);
        let h = compute_hop_sets(&g, 0, 2).unwrap();
        let s = sample_node_anchored(&h, &mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(s.weights, vec![((1, 2), 6.0)]);

        let h = compute_hop_sets(&path, 0, 1).unwrap();
        assert!(sample_node_anchored(&h, &mut ChaCha8Rng::seed_from_u64(1))
            .terms()
            .is_empty());
        let isolated = graph(3, false, &[(1, 2)]);
        let h = compute_hop_sets(&isolated, 0, 2).unwrap();
        let s = sample_node_anchored(&h, &mut ChaCha8Rng::seed_from_u64(1));
        assert!(s.weights.is_empty() && s.terms().is_empty());
    }

    #[test]
    fn weight_identity_matches_enumeration() {
        let g = graph(
            8,
            true,
            &[
                (0, 1),
                (1, 2),
                (2, 3),
                (3, 0),
                (4, 5),
                (5, 6),
                (1, 4),
                (6, 7),
            ],
        );
        for k in 1..=4 {
            let hops = compute_all_hop_sets(&g, k).unwrap();
            let t = enumerate_triplets(&hops, 1000).unwrap();
            for h in &hops {
                let s = sample_node_anchored(h, &mut ChaCha8Rng::seed_from_u64(0));
                let w: f64 = s.weights.iter().map(|x| x.1).sum();
                let count = t.iter().filter(|x| x.anchor == h.anchor()).count();
                assert_eq!(w as usize, count);
                assert_eq!(anchor_triplet_count(h), count as u128);
            }
        }
    }

    #[test]
    fn identical_embeddings_give_unit_terms() {
        let p3 = graph(3, false, &[(0, 1), (1, 2)]);
        let h = compute_hop_sets(&p3, 0, 2).unwrap();
        let s = sample_node_anchored(&h, &mut ChaCha8Rng::seed_from_u64(0));
        let params = EncoderParameters::zeros(3, &[2], 2);
        let (loss, grads) =
            stochastic_loss_and_grads(&params, &Attributes::OneHot(3), &[s]).unwrap();
        assert_eq!(loss, 1.0);
        assert!(grads.all_finite());
    }

    #[test]
    fn naive_estimate_constant_case() {
        let hops = compute_all_hop_sets(&triangle_pendant(), 2).unwrap();
        let t = enumerate_triplets(&hops, 100).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for b in [1, 3, 7] {
            let batch = sample_naive(&t, b, &mut rng).unwrap();
            let est = naive_estimate(&identical(4, 2), &batch, t.len() as u128);
            assert!((est - 6.0).abs() < 1e-12, "{est}");
        }
        let single = [t[0]];
        assert!(sample_naive(&single, 5, &mut rng)
            .unwrap()
            .iter()
            .all(|&x| x == t[0]));
    }

    #[test]
    fn variance_needs_two_repeats_and_is_zero_when_deterministic() {
        let p3 = graph(3, false, &[(0, 1), (1, 2)]);
        let hops = compute_all_hop_sets(&p3, 2).unwrap();
        let params = EncoderParameters::init_xavier(3, &[4], 2, 0).unwrap();
        let attrs = Attributes::OneHot(3);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(
            estimate_grad_variance(&params, &attrs, &hops, Sampler::NodeAnchored, 1, &mut rng)
                .is_err()
        );
        // Every hop set of a 3-node path is a singleton, so the sample is deterministic.
        let v = estimate_grad_variance(&params, &attrs, &hops, Sampler::NodeAnchored, 5, &mut rng)
            .unwrap();
        assert_eq!(v.mean, 0.0);
        let v = estimate_grad_variance(&params, &attrs, &hops, Sampler::Full, 3, &mut rng).unwrap();
        assert_eq!(v.mean, 0.0);
    }

    #[test]
    fn sampler_names_round_trip() {
        for s in [Sampler::NodeAnchored, Sampler::Naive, Sampler::Full] {
            assert_eq!(s.to_string().parse::<Sampler>().unwrap(), s);
        }
        assert!("uniform".parse::<Sampler>().is_err());
    }
}
