//! Analytic gradients against central finite differences.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use synembed::docembed::{Channel, ChannelInputs};
use synembed::embed::{hinge_gradient, hinge_loss, Norm};
use synembed::graph::{Relation, Triple};
use synembed::neural::{init_params, loss_and_grads, ModelParams, NetworkSpec};
use synembed::pipeline::Variant;

const EPS: f64 = 1e-6;

fn rel_err(a: f64, b: f64) -> f64 {
    // exactly-zero gradients (cancelling L1 subgradients) fall back to an
    // absolute comparison at the 1e-8 level
    (a - b).abs() / (a.abs() + b.abs()).max(1e-3)
}

fn random_triple(rng: &mut ChaCha8Rng, n: usize, relation: Relation) -> (Triple, Triple) {
    let head = rng.random_range(0..n);
    let mut tail = rng.random_range(0..n);
    while tail == head {
        tail = rng.random_range(0..n);
    }
    let pos = Triple {
        head,
        relation,
        tail,
    };
    let mut other = rng.random_range(0..n);
    while other == head || other == tail {
        other = rng.random_range(0..n);
    }
    let neg = if rng.random_bool(0.5) {
        Triple { head: other, ..pos }
    } else {
        Triple { tail: other, ..pos }
    };
    (pos, neg)
}

fn transe_max_rel_err(norm: Norm, relation: Relation, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (n, dim, margin) = (6, 5, 20.0);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let mut ents: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let mut rel: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let (pos, neg) = random_triple(&mut rng, n, relation);
        let g = hinge_gradient(&ents, &rel, pos, neg, margin, norm);
        assert!(g.loss > 0.0, "margin keeps the hinge active");

        let mut analytic = vec![vec![0.0; dim]; n];
        for (e, v) in &g.entities {
            for k in 0..dim {
                analytic[*e][k] += v[k];
            }
        }
        for e in 0..n {
            for k in 0..dim {
                let orig = ents[e][k];
                ents[e][k] = orig + EPS;
                let up = hinge_loss(&ents, &rel, pos, neg, margin, norm);
                ents[e][k] = orig - EPS;
                let down = hinge_loss(&ents, &rel, pos, neg, margin, norm);
                ents[e][k] = orig;
                worst = worst.max(rel_err(analytic[e][k], (up - down) / (2.0 * EPS)));
            }
        }
        for k in 0..dim {
            let orig = rel[k];
            rel[k] = orig + EPS;
            let up = hinge_loss(&ents, &rel, pos, neg, margin, norm);
            rel[k] = orig - EPS;
            let down = hinge_loss(&ents, &rel, pos, neg, margin, norm);
            rel[k] = orig;
            worst = worst.max(rel_err(g.relation[k], (up - down) / (2.0 * EPS)));
        }
    }
    worst
}

#[test]
fn transe_hinge_gradients() {
    for norm in [Norm::L1, Norm::L2] {
        for relation in [Relation::PosCorr, Relation::NegCorr] {
            let err = transe_max_rel_err(norm, relation, 11);
            assert!(err < 1e-5, "{norm:?} {relation:?}: {err}");
        }
    }
}

fn micro_inputs(spec: &NetworkSpec, rows: usize, rng: &mut ChaCha8Rng) -> ChannelInputs {
    ChannelInputs {
        channels: spec
            .enabled_channels()
            .map(|c| {
                (
                    c.channel,
                    Array2::from_shape_fn((rows, c.input_dim), |_| rng.random_range(-2.0..2.0)),
                )
            })
            .collect(),
    }
}

fn micro_spec(channels: &[Channel]) -> NetworkSpec {
    let parts: Vec<(Channel, usize, &[usize])> = channels
        .iter()
        .map(|&c| match c {
            Channel::Semantic => (c, 7, &[6, 5, 4, 3][..]),
            Channel::Syntactic => (c, 8, &[5, 4][..]),
            Channel::Gdoc => (c, 6, &[5, 4][..]),
            Channel::Raw => (c, 5, &[][..]),
        })
        .collect();
    NetworkSpec::from_widths(&parts, &[4], 3).unwrap()
}

fn network_max_rel_err(spec: &NetworkSpec, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut params = init_params(spec, seed);
    // non-zero biases so every parameter is exercised
    let mut flat = params.to_flat();
    for v in flat.iter_mut() {
        *v += rng.random_range(-0.1..0.1);
    }
    params.set_flat(&flat);
    let inputs = micro_inputs(spec, 4, &mut rng);
    let labels = [0, 2, 1, 2];
    let (_, grads) = loss_and_grads(&params, spec, &inputs, &labels).unwrap();
    let analytic = grads.to_flat();
    let loss_at = |p: &ModelParams| loss_and_grads(p, spec, &inputs, &labels).unwrap().0;
    let mut probe = params.clone();
    let mut worst: f64 = 0.0;
    for i in 0..flat.len() {
        let mut f = flat.clone();
        f[i] += EPS;
        probe.set_flat(&f);
        let up = loss_at(&probe);
        f[i] -= 2.0 * EPS;
        probe.set_flat(&f);
        let down = loss_at(&probe);
        worst = worst.max(rel_err(analytic[i], (up - down) / (2.0 * EPS)));
    }
    worst
}

#[test]
fn every_variant_backprop_matches_finite_differences() {
    for (k, v) in Variant::ALL.into_iter().enumerate() {
        let spec = if v == Variant::Lr {
            NetworkSpec::from_widths(&[(Channel::Raw, 5, &[])], &[], 3).unwrap()
        } else {
            micro_spec(&v.channels())
        };
        let err = network_max_rel_err(&spec, 100 + k as u64);
        assert!(err < 1e-5, "{v}: {err}");
    }
}

#[test]
fn three_channel_network() {
    let spec = micro_spec(&[Channel::Syntactic, Channel::Raw, Channel::Semantic]);
    assert!(network_max_rel_err(&spec, 5) < 1e-5);
}
