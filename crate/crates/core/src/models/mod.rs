//! Bundled models: the TCP window-size process (linear and constant jump
//! rate) and the Markov switching model of finitely many vector fields.

mod switching;
mod tcp;

pub use switching::{
    switching_characteristics, BoxSet, Occupancy, SwitchingModel, SwitchingRates, VectorField,
};
pub use tcp::{tcp_characteristics, tcp_true_density, theoretical_rates, tv_lower_bound, TcpModel};
