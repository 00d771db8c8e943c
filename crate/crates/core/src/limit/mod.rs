//! Limiting one-point laws: Airy function, Airy kernel determinants and the
//! stationary family `F_w` (Baik-Rains at `w = 0`).

mod airy;
mod kernel;
mod quadrature;
mod stationary;

pub use airy::{airy, airy_pair, airy_prime};
pub use kernel::{airy_kernel, airy_kernel_closed, fredholm_halfline, HalflineDet};
pub use quadrature::{legendre_unit, QuadratureGrid, MAP_SCALE};
pub use stationary::{
    evaluate, f_w, f_w_with, g_func, r_closed_at_zero, second_class_limit, DifferenceLaw, DistributionTable,
    Evaluation, FValue, KernelShift, StationaryParams,
};
