//! Generate Gaussian blobs and write them as CSV plus a label file.
//!
//! cargo run --example synth_blobs -- /tmp/blobs.csv /tmp/blobs_labels.txt

use fkmwc::dataset::{write_labels, write_matrix_csv, BlobSpec};

fn main() -> fkmwc::Result<()> {
    let mut args = std::env::args().skip(1);
    let data_path = args.next().unwrap_or_else(|| "blobs.csv".into());
    let label_path = args.next().unwrap_or_else(|| "blobs_labels.txt".into());

    let spec = BlobSpec {
        n_per_cluster: 50,
        k: 3,
        dim: 2,
        separation: 20.0,
        spread: 1.0,
        seed: 0,
    };
    let blobs = spec.generate()?;
    for (l, c) in blobs.centers.rows().into_iter().enumerate() {
        println!("center {l}: {c}");
    }
    write_matrix_csv(&blobs.data, &data_path)?;
    write_labels(&blobs.labels, &label_path)?;
    println!("{} samples -> {data_path}, labels -> {label_path}", blobs.data.n_samples());
    Ok(())
}
