#![allow(dead_code)]

use olga::graphbuild::{Graph, Similarity};
use olga::model::{
    decode_on, encode, encode_with, loss_l1_on, loss_total_on, ocgnn_center, ocgnn_loss_on, ocgnn_radius,
    reconstruction_on, EncoderConfig, HypersphereConfig, LossWeights, ModelParams,
};
use olga::numcore::{finite_diff_check, Matrix, Tape, Var};
use olga::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A random 6-node problem: features, k-NN graph, interest split and
/// parameters with non-zero biases.
pub struct Instance {
    pub features: Matrix,
    pub graph: Graph,
    pub config: EncoderConfig,
    pub params: ModelParams,
}

pub fn instance(seed: u64, config: impl Fn(usize) -> EncoderConfig) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 6;
    let dim = 3;
    let data: Vec<f64> = (0..n * dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    let features = Matrix::from_vec(n, dim, data).unwrap();
    let k = rng.random_range(1..=2);
    let mut interest: Vec<usize> = (0..n).filter(|_| rng.random_bool(0.5)).collect();
    if interest.is_empty() {
        interest.push(0);
    }
    if interest.len() == n {
        interest.pop();
    }
    let graph = Graph::from_features(&features, k, Similarity::Cosine)
        .unwrap()
        .with_interest(&interest)
        .unwrap();
    let config = config(dim);
    let mut params = ModelParams::init(&config, seed);
    for m in params.matrices_mut().skip(1).step_by(2) {
        m.as_mut_slice()
            .iter_mut()
            .for_each(|b| *b = rng.random_range(-0.3..0.3));
    }
    Instance {
        features,
        graph,
        config,
        params,
    }
}

pub fn olga_instance(seed: u64) -> Instance {
    instance(seed, |input| EncoderConfig::olga(input, &[4], 2).unwrap())
}

pub fn ocgnn_instance(seed: u64) -> Instance {
    instance(seed, |input| EncoderConfig::ocgnn(input, &[4], 2).unwrap())
}

#[derive(Clone, Copy, Debug)]
pub enum Loss {
    L1,
    L2,
    L3,
    Total(LossWeights),
}

fn olga_loss(inst: &Instance, loss: Loss, tape: &mut Tape, vars: &[Var]) -> Result<Var> {
    let sphere = HypersphereConfig::at_origin(2, 0.3)?;
    let h = encode_with(tape, &inst.graph, &inst.features, &inst.config, vars)?;
    let a_hat = decode_on(tape, h)?;
    let adjacency = inst.graph.adjacency();
    match loss {
        Loss::L1 => loss_l1_on(tape, h, inst.graph.interest(), &sphere),
        Loss::L2 => reconstruction_on(tape, adjacency, a_hat, inst.graph.interest()),
        Loss::L3 => reconstruction_on(tape, adjacency, a_hat, inst.graph.unlabeled()),
        Loss::Total(w) => {
            let l1 = loss_l1_on(tape, h, inst.graph.interest(), &sphere)?;
            let l2 = reconstruction_on(tape, adjacency, a_hat, inst.graph.interest())?;
            let l3 = reconstruction_on(tape, adjacency, a_hat, inst.graph.unlabeled())?;
            loss_total_on(tape, l1, l2, l3, w)
        }
    }
}

/// Worst relative gap between tape and finite-difference gradients of an
/// OLGA loss with r = 0.3.
pub fn olga_fd_error(seed: u64, loss: Loss) -> f64 {
    let inst = olga_instance(seed);
    finite_diff_check(
        |tape, vars| olga_loss(&inst, loss, tape, vars),
        &inst.params.to_matrices(),
    )
    .unwrap()
}

/// Same for the OCGNN hinge loss with weight decay.
pub fn ocgnn_fd_error(seed: u64) -> f64 {
    let inst = ocgnn_instance(seed);
    let h = encode(&inst.graph, &inst.features, &inst.config, &inst.params).unwrap();
    let center = ocgnn_center(&h, inst.graph.interest()).unwrap();
    // shrink the radius so some interest nodes sit outside and the hinge is
    // active; 0.5 would land exactly on the kink when two of three interest
    // nodes coincide
    let radius = 0.7 * ocgnn_radius(&h, inst.graph.interest(), &center, 0.3).unwrap();
    let sphere = HypersphereConfig::ocgnn(center, radius, 0.3, 0.0005).unwrap();
    let build = |tape: &mut Tape, vars: &[Var]| -> Result<Var> {
        let h = encode_with(tape, &inst.graph, &inst.features, &inst.config, vars)?;
        let weights: Vec<Var> = vars.iter().step_by(2).copied().collect();
        ocgnn_loss_on(tape, h, inst.graph.interest(), &sphere, &weights)
    };
    finite_diff_check(build, &inst.params.to_matrices()).unwrap()
}
