//! Independent reference engines used to check the production solvers.
//!
//! Nothing here calls into `steady`, `fluct` or `duan` numerics: the
//! mean-field flow, its Jacobian, the stochastic integrator and the angle
//! search are all written out again from the equations of motion.

mod brute;
mod langevin;
mod mean_field;

pub use brute::brute_force_duan;
pub use langevin::{langevin_covariance, LangevinEstimate, LangevinOptions};
pub use mean_field::{
    fd_jacobian, from_steady, integrate_mean_field, relax, vector_field, MeanFieldState, Trajectory,
};
