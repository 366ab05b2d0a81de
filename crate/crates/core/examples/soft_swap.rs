//! One relaxed conditional swap, its 2x2 block and its gradient.

use monosort::{SigmoidKind, SwapConfig};

fn main() -> monosort::Result<()> {
    let (a, b) = (1.0, 0.0);
    for kind in SigmoidKind::ALL {
        for beta in [1.0, 4.0, 64.0] {
            let cfg = SwapConfig::new(kind, beta)?;
            let out = cfg.soft_swap(a, b)?;
            let block = cfg.swap_block(a, b)?;
            let (da, db) = cfg.swap_grad(a, b, 1.0, 0.0)?;
            println!(
                "{:<13} beta={beta:<4} lo={:.5} hi={:.5} block=[[{:.4}, {:.4}], [{:.4}, {:.4}]] dlo/da={da:.4} dlo/db={db:.4}",
                kind.name(),
                out.lo,
                out.hi,
                block[0][0],
                block[0][1],
                block[1][0],
                block[1][1],
            );
        }
    }
    Ok(())
}
