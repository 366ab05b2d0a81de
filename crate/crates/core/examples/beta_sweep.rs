//! Final element-rank rate across inverse temperatures for a monotonic and a
//! non-monotonic sigmoid, written as CSV to stdout.

use monosort::train::{make_task, sweep_beta, write_sweep_csv, TaskDims, TrainConfig};
use monosort::SigmoidKind;

fn main() -> monosort::Result<()> {
    let steps = std::env::args()
        .nth(1)
        .map_or(Ok(1500), |s| s.parse())
        .expect("steps is an integer");
    let task = make_task(0, TaskDims::with_n(5))?;
    let betas = [1e-3, 0.1, 1.0, 4.0, 16.0, 64.0, 256.0, 1024.0];
    let mut records = Vec::new();
    for kind in [SigmoidKind::Cauchy, SigmoidKind::Logistic] {
        let base = TrainConfig {
            steps,
            ..TrainConfig::new(kind, 5)
        };
        records.extend(sweep_beta(&task, &base, &betas)?);
    }
    write_sweep_csv(std::io::stdout().lock(), &records)
}
