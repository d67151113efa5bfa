//! Seeded time-domain realizations of the qubit detuning δω(t) (rad/s) and
//! the phase they imprint over an interval.
//!
//! Every generator draws only from the random stream it is given; with
//! [`RngStream`] keyed by `(master_seed, stream_id)` a trace depends on nothing
//! else, which makes Monte-Carlo runs reproducible under any thread count.

mod generators;
mod rng;
mod spec;
mod trace;

pub use generators::{
    gen_one_over_f_trace, gen_one_over_f_trace_with, gen_quasistatic, gen_summed_telegraph_one_over_f,
    gen_telegraph_trace, gen_white_phase, OneOverFOptions,
};
pub use rng::RngStream;
pub use spec::{NoiseRealization, NoiseSpec, OneOverFGenerator, OneOverFNoise, TelegraphNoise};
pub use trace::{integrate_phase, FrequencyTrace};
