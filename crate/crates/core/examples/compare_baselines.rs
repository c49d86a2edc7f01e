//! Centroid-free solver on two distances next to k-means and fuzzy c-means.

use fkmwc::baselines::{fcm_fit, kmeans_fit, FcmConfig};
use fkmwc::dataset::gaussian_blobs;
use fkmwc::distance::{knn_distance_matrix, squared_euclidean_matrix};
use fkmwc::metrics::score_all;
use fkmwc::solver::{fit, hard_labels, SolverConfig};

fn main() -> fkmwc::Result<()> {
    let (x, truth) = gaussian_blobs(40, 4, 3, 10.0, 1.5, 11)?;
    let cfg = SolverConfig::with_lambda(5.0);

    let euc = fit(&squared_euclidean_matrix(&x), 4, &cfg)?;
    let knn = fit(&knn_distance_matrix(&x, 10)?, 4, &cfg)?;
    let km = kmeans_fit(&x, 4, 0, 300)?;
    let fcm = fcm_fit(&x, 4, &FcmConfig::default())?;

    let rows = [
        ("fkmwc euclidean_sq", hard_labels(&euc.y)),
        ("fkmwc knn", hard_labels(&knn.y)),
        ("kmeans", km.labels),
        ("fcm", hard_labels(&fcm.membership)),
    ];
    for (name, pred) in &rows {
        let s = score_all(&truth, pred)?;
        println!(
            "{name:<20} acc {:.3} nmi {:.3} purity {:.3} pairs {:.3}",
            s.acc, s.nmi, s.purity_majority, s.purity_pairs
        );
    }
    Ok(())
}
