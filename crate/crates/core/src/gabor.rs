//! Gabor filter-bank lifting of 2D images into 3D magnitude-response tensors.

use std::f64::consts::PI;

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::tensor::{DenseTensor, Matrix};

#[derive(Debug, Clone, PartialEq)]
pub struct GaborBank {
    pub scale_count: usize,
    pub orientation_count: usize,
    /// Odd side length of every kernel, in pixels.
    pub kernel_size: usize,
    /// Wavelength of the finest scale, in pixels.
    pub wavelength_base: f64,
    /// Wavelength ratio between consecutive scales.
    pub scale_factor: f64,
    /// Gaussian envelope width as a fraction of the wavelength.
    pub sigma_ratio: f64,
}

/// Quadrature pair for one channel.
#[derive(Debug, Clone)]
pub struct GaborKernel {
    pub wavelength: f64,
    pub theta: f64,
    pub even: Matrix,
    pub odd: Matrix,
}

impl Default for GaborBank {
    fn default() -> Self {
        default_bank()
    }
}

/// 4 scales x 7 orientations = 28 channels, 11x11 kernels.
pub fn default_bank() -> GaborBank {
    GaborBank {
        scale_count: 4,
        orientation_count: 7,
        kernel_size: 11,
        wavelength_base: 4.0,
        scale_factor: std::f64::consts::SQRT_2,
        sigma_ratio: 0.56,
    }
}

impl GaborBank {
    pub fn channel_count(&self) -> usize {
        self.scale_count * self.orientation_count
    }

    pub fn validate(&self) -> Result<()> {
        if self.kernel_size == 0 || self.kernel_size.is_multiple_of(2) {
            return Err(Error::BadKernel(self.kernel_size));
        }
        if self.scale_count == 0 || self.orientation_count == 0 {
            return Err(Error::InvalidParameter("bank needs at least one scale and orientation".into()));
        }
        if !(self.wavelength_base > 0.0 && self.scale_factor > 0.0 && self.sigma_ratio > 0.0) {
            return Err(Error::InvalidParameter(
                "wavelength, scale factor and sigma ratio must be > 0".into(),
            ));
        }
        Ok(())
    }

    /// Orientation of channel group `k`: `k * pi / orientation_count`.
    pub fn orientation(&self, k: usize) -> f64 {
        k as f64 * PI / self.orientation_count as f64
    }

    pub fn wavelength(&self, scale: usize) -> f64 {
        self.wavelength_base * self.scale_factor.powi(scale as i32)
    }

    /// Kernels in channel order: scale-major, then orientation.
    pub fn kernels(&self) -> Result<Vec<GaborKernel>> {
        self.validate()?;
        let mut out = Vec::with_capacity(self.channel_count());
        for s in 0..self.scale_count {
            for o in 0..self.orientation_count {
                out.push(self.kernel(self.wavelength(s), self.orientation(o)));
            }
        }
        Ok(out)
    }

    fn kernel(&self, wavelength: f64, theta: f64) -> GaborKernel {
        let n = self.kernel_size;
        let half = (n / 2) as f64;
        let sigma = self.sigma_ratio * wavelength;
        let (sin, cos) = theta.sin_cos();
        let mut env = Matrix::zeros(n, n);
        let mut even = Matrix::zeros(n, n);
        let mut odd = Matrix::zeros(n, n);
        for r in 0..n {
            for c in 0..n {
                let y = r as f64 - half;
                let x = c as f64 - half;
                let xr = x * cos + y * sin;
                let yr = -x * sin + y * cos;
                let g = (-(xr * xr + yr * yr) / (2.0 * sigma * sigma)).exp();
                let phase = 2.0 * PI * xr / wavelength;
                env[(r, c)] = g;
                even[(r, c)] = g * phase.cos();
                odd[(r, c)] = g * phase.sin();
            }
        }
        // Remove the DC response of the even kernel along its envelope.
        let dc = even.sum() / env.sum();
        even -= env * dc;
        GaborKernel { wavelength, theta, even, odd }
    }
}

/// Zero-padded 2D convolution `out(y, x) = sum k(dy, dx) img(y - dy, x - dx)`.
fn convolve(image: &DenseTensor, kernel: &Matrix) -> Vec<f64> {
    let (h, w) = (image.dims()[0], image.dims()[1]);
    let half = (kernel.nrows() / 2) as isize;
    let img = image.data();
    let mut out = vec![0.0; h * w];
    for y in 0..h as isize {
        for x in 0..w as isize {
            let mut acc = 0.0;
            for dy in -half..=half {
                let sy = y - dy;
                if sy < 0 || sy >= h as isize {
                    continue;
                }
                for dx in -half..=half {
                    let sx = x - dx;
                    if sx < 0 || sx >= w as isize {
                        continue;
                    }
                    acc += kernel[((dy + half) as usize, (dx + half) as usize)]
                        * img[sy as usize * w + sx as usize];
                }
            }
            out[y as usize * w + x as usize] = acc;
        }
    }
    out
}

/// Lifts an `H x W` image into an `H x W x channels` tensor of Gabor
/// magnitude responses.
pub fn gabor_lift(image: &DenseTensor, bank: &GaborBank) -> Result<DenseTensor> {
    if image.order() != 2 {
        return Err(Error::ShapeMismatch(format!(
            "gabor lift needs an order-2 image, got dims {:?}",
            image.dims()
        )));
    }
    let kernels = bank.kernels()?;
    let (h, w) = (image.dims()[0], image.dims()[1]);
    let channels = kernels.len();
    let mut data = vec![0.0; h * w * channels];
    for (c, k) in kernels.iter().enumerate() {
        let re = convolve(image, &k.even);
        let im = convolve(image, &k.odd);
        for (p, (a, b)) in re.iter().zip(&im).enumerate() {
            data[p * channels + c] = a.hypot(*b);
        }
    }
    DenseTensor::new(vec![h, w, channels], data)
}

/// Applies [`gabor_lift`] to every sample of an order-2 dataset.
pub fn gabor_lift_dataset(ds: &LabeledDataset, bank: &GaborBank) -> Result<LabeledDataset> {
    let lifted = ds.tensors().iter().map(|t| gabor_lift(t, bank)).collect::<Result<Vec<_>>>()?;
    ds.with_tensors(lifted)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_bank_constants() {
        let b = default_bank();
        assert_eq!(b.channel_count(), 28);
        assert_eq!(b.kernel_size, 11);
        for k in 0..7 {
            assert!((b.orientation(k) - k as f64 * PI / 7.0).abs() < 1e-15);
        }
        assert!((b.wavelength(2) - 8.0).abs() < 1e-12);
    }

    #[test]
    fn even_kernel_rejected() {
        let b = GaborBank { kernel_size: 10, ..default_bank() };
        let img = DenseTensor::zeros(vec![8, 8]).unwrap();
        assert!(matches!(gabor_lift(&img, &b), Err(Error::BadKernel(10))));
    }

    #[test]
    fn default_output_shape() {
        let img = DenseTensor::from_fn(vec![32, 32], |i| (i[0] * 3 + i[1]) as f64 / 100.0).unwrap();
        let out = gabor_lift(&img, &default_bank()).unwrap();
        assert_eq!(out.dims(), &[32, 32, 28]);
    }

    #[test]
    fn kernels_have_zero_dc() {
        for k in default_bank().kernels().unwrap() {
            assert!(k.even.sum().abs() < 1e-12);
            assert!(k.odd.sum().abs() < 1e-12);
        }
    }

    #[test]
    fn constant_image_interior_is_zero() {
        let bank = default_bank();
        let img = DenseTensor::from_fn(vec![24, 24], |_| 3.5).unwrap();
        let out = gabor_lift(&img, &bank).unwrap();
        let half = bank.kernel_size / 2;
        for y in half..24 - half {
            for x in half..24 - half {
                for c in 0..28 {
                    assert!(out.get(&[y, x, c]).abs() < 1e-11);
                }
            }
        }
    }

    #[test]
    fn impulse_reproduces_kernel_magnitude() {
        let bank = GaborBank { scale_count: 2, orientation_count: 3, ..default_bank() };
        let n = 15;
        let center = 7;
        let mut img = DenseTensor::zeros(vec![n, n]).unwrap();
        img.set(&[center, center], 1.0);
        let out = gabor_lift(&img, &bank).unwrap();
        let half = bank.kernel_size / 2;
        for (c, k) in bank.kernels().unwrap().iter().enumerate() {
            for r in 0..bank.kernel_size {
                for s in 0..bank.kernel_size {
                    let expect = k.even[(r, s)].hypot(k.odd[(r, s)]);
                    let got = out.get(&[center + r - half, center + s - half, c]);
                    assert!((got - expect).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn responses_bounded_and_nonnegative() {
        let bank = default_bank();
        let img = DenseTensor::from_fn(vec![16, 16], |i| ((i[0] * 7 + i[1] * 13) % 5) as f64 - 2.0).unwrap();
        let out = gabor_lift(&img, &bank).unwrap();
        let max_abs = img.data().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let kernels = bank.kernels().unwrap();
        for (p, v) in out.data().iter().enumerate() {
            let k = &kernels[p % 28];
            let l1: f64 = k.even.iter().zip(k.odd.iter()).map(|(a, b)| a.hypot(*b)).sum();
            assert!(v.is_finite() && *v >= 0.0);
            assert!(*v <= l1 * max_abs + 1e-12);
        }
    }
}
