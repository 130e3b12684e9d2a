//! Mode products, unfoldings and multilinear rank on a small tensor.
//!
//! ```bash
//! cargo run -p margin-tensor --example tensor_algebra
//! ```

use margin_tensor::{fold, DenseTensor, Matrix, Result};

fn main() -> Result<()> {
    let a = DenseTensor::from_fn(vec![2, 3, 4], |i| (i[0] * 12 + i[1] * 4 + i[2]) as f64)?;
    println!("A dims {:?}, |A|_F = {:.4}", a.dims(), a.frobenius_norm());

    for mode in 0..a.order() {
        let m = a.unfold(mode)?;
        println!("mode-{mode} unfolding is {}x{}", m.nrows(), m.ncols());
        assert_eq!(fold(&m, mode, a.dims())?, a);
    }

    // Row sums along the second mode.
    let ones = Matrix::from_element(1, 3, 1.0);
    let summed = a.mode_product(&ones, 1)?;
    println!("A x_1 [1 1 1] has dims {:?}: {:?}", summed.dims(), summed.data());

    // Project every mode, Tucker style.
    let us = vec![
        Matrix::identity(1, 2),
        Matrix::from_row_slice(2, 3, &[1.0, 0.0, -1.0, 0.5, 0.5, 0.5]),
        Matrix::identity(2, 4),
    ];
    let b = a.multi_mode_product(&us, None)?;
    println!("B = A x_0 U_0 x_1 U_1 x_2 U_2 has dims {:?}", b.dims());

    // Sum of two rank-one terms has multilinear rank (2, 2, 2).
    let rank_one = |x: &[f64], y: &[f64], z: &[f64]| {
        DenseTensor::from_fn(vec![x.len(), y.len(), z.len()], |i| x[i[0]] * y[i[1]] * z[i[2]])
    };
    let t = rank_one(&[1.0, 2.0, 0.0], &[1.0, 0.0, 1.0], &[0.5, 1.0, 1.5])?.add(&rank_one(
        &[0.0, 1.0, 1.0],
        &[2.0, 1.0, 0.0],
        &[1.0, -1.0, 0.0],
    )?)?;
    println!("multilinear rank of a sum of two rank-one tensors: {:?}", t.multilinear_rank(1e-10)?);
    Ok(())
}
