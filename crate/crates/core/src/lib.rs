//! Rough-path toolkit for the diffusion approximation of fractional noise by
//! telegraph (Kac–Stroock) signals.
//!
//! The crate covers discretized paths and Hölder/Sobolev seminorms, the
//! telegraph driver and the smooth fractional path `X^ε` it generates,
//! Liouville fBm simulation, Lévy areas with Chen-consistent storage, the
//! sewing map, a Davie-type rough solver together with an RK4 solver for the
//! smooth equations, and a Monte Carlo harness for weak convergence.

pub mod conv;
pub mod error;
pub mod experiment;
pub mod fbm;
pub mod grid;
pub mod io;
pub mod kac_stroock;
pub mod levy_area;
pub mod quadrature;
pub mod rng;
pub mod rough_sde;
pub mod sewing;
pub mod stats;
pub mod weak;

pub use error::{Error, Result};
pub use experiment::{run, Experiment, ExperimentConfig, Params, Report};
pub use fbm::{
    covariance_r, simulate_fbm_cholesky, simulate_fbm_volterra, FbmCholesky, HurstParam, VolterraFbm, WienerGrid,
};
pub use grid::{
    delta1, delta2, garsia_u, holder_norm1, holder_norm2, sobolev_norm, Grid, Increment2, PairSet, SamplePath,
};
pub use kac_stroock::{build_x_eps, integrate_f_theta, sample_poisson, Epsilon, FastXEps, PoissonRealization, XEps};
pub use levy_area::{
    area_closed_form, area_fbm_wiener_sums, area_smooth_quadrature, chen_check, chen_reconstruct, AreaField,
    AreaMethod, AreaSource, ChenReport, FbmArea,
};
pub use quadrature::{Power, ScalarFn, Tolerance};
pub use rough_sde::{
    rough_step, solve_ode_smooth, solve_rough, LinearField, OdeOptions, RoughDriver, RoughOptions, TrigField,
    VectorField,
};
pub use sewing::{lambda_error_budget, sew, sew_vec, SewOptions, SewResult};
pub use weak::{
    c_alpha, cf_distance_bound, ecf, fdd_distance, holder_tail, phi_func, psi_func, varphi_func, BoundReport,
    CharFnEstimate,
};
