//! GCN encoder, inner-product decoder, and the OLGA / OCGNN objectives.

mod checkpoint;
mod forward;
mod loss;
mod params;

pub use checkpoint::TrainedModel;
pub use forward::{decode, decode_on, encode, encode_on, encode_with, EncoderVars};
pub use loss::{
    classify, distance, hypersphere_penalty, loss_l1, loss_l1_on, loss_l2, loss_l3, loss_total, loss_total_on,
    nearest_rank_quantile, ocgnn_center, ocgnn_loss, ocgnn_loss_on, ocgnn_radius, reconstruction_on, LossWeights,
};
pub use params::{EncoderConfig, HypersphereConfig, Layer, ModelParams};
