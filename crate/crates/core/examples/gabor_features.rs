//! Lifts a 32x32 image into 28 Gabor magnitude channels and shows which
//! orientation responds most to a striped pattern.
//!
//! ```bash
//! cargo run -p margin-tensor --example gabor_features
//! ```

use margin_tensor::{default_bank, gabor_lift, DenseTensor, Result};

fn main() -> Result<()> {
    let bank = default_bank();
    println!(
        "{} scales x {} orientations, {}x{} kernels",
        bank.scale_count, bank.orientation_count, bank.kernel_size, bank.kernel_size
    );

    // Vertical stripes with a period of 4 pixels.
    let image = DenseTensor::from_fn(vec![32, 32], |i| if i[1] % 4 < 2 { 1.0 } else { 0.0 })?;
    let lifted = gabor_lift(&image, &bank)?;
    println!("lifted dims {:?}", lifted.dims());

    let channels = bank.channel_count();
    for scale in 0..bank.scale_count {
        let energy: Vec<f64> = (0..bank.orientation_count)
            .map(|o| {
                let c = scale * bank.orientation_count + o;
                // Interior pixels only, away from the zero padding.
                let mut sum = 0.0;
                for y in 8..24 {
                    for x in 8..24 {
                        sum += lifted.data()[(y * 32 + x) * channels + c];
                    }
                }
                sum / 256.0
            })
            .collect();
        let best = (0..energy.len()).max_by(|&a, &b| energy[a].total_cmp(&energy[b])).unwrap();
        println!(
            "scale {scale} (wavelength {:.2}): strongest at {:.0} degrees, mean magnitudes {:.3?}",
            bank.wavelength(scale),
            bank.orientation(best).to_degrees(),
            energy
        );
    }
    Ok(())
}
