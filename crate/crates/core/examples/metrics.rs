//! External scores for a prediction, with the label mapping behind ACC.

use fkmwc::dataset::LabelVector;
use fkmwc::metrics::{align_labels, score_all, ContingencyTable};

fn main() -> fkmwc::Result<()> {
    let truth = LabelVector::canonicalize(&["a", "a", "a", "b", "b", "b", "c", "c"]);
    let pred = LabelVector::canonicalize(&[7, 7, 3, 3, 3, 3, 9, 9]);

    let table = ContingencyTable::new(&truth, &pred)?;
    println!("contingency (truth x predicted):\n{}", table.counts);
    let mapping = align_labels(&truth, &pred)?;
    for (p, t) in &mapping.map {
        println!("predicted {p} -> truth {t:?}");
    }
    println!("{:?}", score_all(&truth, &pred)?);
    Ok(())
}
