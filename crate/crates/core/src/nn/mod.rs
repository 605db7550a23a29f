//! Small neural-network engine: block-diagonal first layer, dense ReLU
//! trunk, one LSTM step, linear head, exact gradients, first-order
//! optimizers. Everything is `f64`.

mod fit;
mod io;
mod linalg;
mod net;
mod optim;

pub use fit::{fit_epoch, mean_squared_error, supervised_fit, FitSample};
pub use io::{load_params, read_params, save_params, write_params};
pub use net::{td_loss, ForwardCache, HiddenState, NetworkSpec, QNetwork, RecurrentKind};
pub use optim::{Optimizer, OptimizerKind};
