//! Builds odd-even and bitonic plans, checks them with the 0-1 principle and
//! prints the text format.

use monosort::{NetworkPlan, PlanFamily};

fn main() -> monosort::Result<()> {
    for family in [PlanFamily::OddEven, PlanFamily::Bitonic] {
        for n in [2, 4, 8, 16, 32] {
            let plan = family.build(n)?;
            let diag = plan.validate();
            println!(
                "{family:<8} n={n:<3} layers={:<3} comparators={:<4} 0-1 inputs checked={:<6} sorts={}",
                plan.layer_count(),
                plan.comparator_count(),
                diag.zero_one_inputs,
                diag.passed
            );
        }
    }
    println!();
    print!("{}", NetworkPlan::bitonic(8)?.to_text());

    let broken = NetworkPlan::from_text("n 3\n0:1\n1:2\n")?;
    println!(
        "\ntwo-layer three-wire plan: {:?}",
        broken.validate().violation
    );
    Ok(())
}
