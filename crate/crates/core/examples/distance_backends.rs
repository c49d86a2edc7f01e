//! Build every distance backend on the same data and summarize each.

use fkmwc::dataset::gaussian_blobs;
use fkmwc::distance::{
    butterworth_distance_matrix, default_omega, kernel_distance_matrix, knn_distance_matrix, median_heuristic_width,
    rbf_affinity, squared_euclidean_matrix, validate_distance_matrix,
};

fn main() -> fkmwc::Result<()> {
    let (x, _) = gaussian_blobs(30, 3, 2, 10.0, 1.0, 4)?;
    let width = median_heuristic_width(&x);
    let s = rbf_affinity(&x, width)?;
    let omega = default_omega(&s)?;
    println!("median width {width:.4}, butterworth omega {omega:.4}");

    let backends = [
        squared_euclidean_matrix(&x),
        knn_distance_matrix(&x, 10)?,
        butterworth_distance_matrix(&s, omega)?,
        kernel_distance_matrix(&x, width)?,
    ];
    for d in &backends {
        let summary = validate_distance_matrix(d)?;
        println!("{:<12} {summary} params {:?}", d.kind().to_string(), d.params());
    }
    Ok(())
}
