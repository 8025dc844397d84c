//! Numerical kernels: convolution, pooling, dense, resize and blur.
//!
//! Every kernel is a pure function with a fixed summation order, so identical
//! inputs always produce bit-identical outputs.

mod blur;
mod conv;
mod dense;
mod pool;
mod resize;

pub use blur::{gaussian_blur, gaussian_kernel_1d};
pub use conv::{conv2d_backward_input, conv2d_forward, conv_output_extent};
pub(crate) use conv::tap as conv_tap;
pub use dense::{dense_backward_input, dense_forward};
pub use pool::{maxpool2d_forward, pool_output_extent, route_to_argmax, ArgmaxIndices};
pub use resize::bilinear_resize;

/// `(rows, cols)` extent pair used for kernels, strides and padding.
pub type Pair = [usize; 2];
