//! Trains a scorer from orderings alone and prints its evaluation curve.
//!
//! `cargo run --release --example train_ranking -- [steps] [sigmoid]`

use monosort::train::{make_task, train, TaskDims, TrainConfig};
use monosort::SigmoidKind;

fn main() -> monosort::Result<()> {
    let mut args = std::env::args().skip(1);
    let steps = args
        .next()
        .map_or(Ok(2000), |s| s.parse())
        .expect("steps is an integer");
    let kind: SigmoidKind = args
        .next()
        .map_or(Ok(SigmoidKind::Optimal), |s| s.parse())?;

    let task = make_task(0, TaskDims::with_n(5))?;
    let cfg = TrainConfig {
        steps,
        ..TrainConfig::new(kind, 5)
    };
    let record = train(&task, &cfg)?;
    println!("{kind} beta={} ({} steps)", cfg.beta, cfg.steps);
    for e in &record.evals {
        println!(
            "step {:>6}  loss {:.4}  exact {:.3}  element {:.3}",
            e.step, e.loss, e.exact_rate, e.element_rate
        );
    }
    println!("wall time {:.1}s", record.wall_time.as_secs_f64());
    Ok(())
}
