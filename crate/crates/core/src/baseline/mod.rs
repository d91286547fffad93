//! Two-layer graph convolutional network with analytic gradients and Adam.

mod adam;
mod adjacency;
mod io;
mod model;
mod train;

pub use adam::Adam;
pub use adjacency::NormalizedAdjacency;
pub use io::{read_model, write_model, StoredModel, MODEL_FORMAT_VERSION};
pub use model::{
    argmax_rows, cross_entropy, dropout_mask, forward, loss_and_grads, predict_proba, ForwardCache, ForwardOptions,
    GcnParams,
};
pub use train::{augment, predict, train, validate, EpochRecord, GraphData, TrainConfig, TrainOutcome};
