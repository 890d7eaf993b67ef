//! Raster primitives shared by every pipeline stage.

mod canny;
mod color;
mod components;
mod filter;
mod frame;
mod integral;
mod morphology;

pub use canny::{canny_auto, canny_edges, gradient_magnitude, CannyParams};
pub use color::{hsv_to_rgb, rgb_to_hsv, rgb_to_ycbcr, Hsv, YCbCr};
pub use components::{connected_components, label_components, Blob, Labels};
pub use filter::{gaussian_blur, gaussian_kernel};
pub use frame::{BinaryMask, Frame, Rect};
pub use integral::{integral_rect_sum, IntegralImage};
pub use morphology::{morph, MorphOp};

/// `mask bit = pixel >= t`, on the first channel of `img`.
pub fn threshold(img: &Frame, t: u8) -> BinaryMask {
    let bits = img
        .data()
        .chunks_exact(img.channels())
        .map(|px| px[0] >= t)
        .collect();
    BinaryMask::from_bits(img.width(), img.height(), bits).expect("same dimensions")
}
