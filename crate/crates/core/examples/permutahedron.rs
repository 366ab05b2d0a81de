//! Cross-entropy over the permutahedron of (1, 2, 3): values at the six
//! vertices and the grid extrema, per sigmoid.

use monosort::harness::{emit_permutahedron_loss, PERMUTAHEDRON_BETA};
use monosort::{SigmoidKind, SwapConfig};

fn main() -> monosort::Result<()> {
    let vertices = [
        [1.0, 2.0, 3.0],
        [1.0, 3.0, 2.0],
        [2.0, 1.0, 3.0],
        [2.0, 3.0, 1.0],
        [3.0, 1.0, 2.0],
        [3.0, 2.0, 1.0],
    ];
    for kind in SigmoidKind::ALL {
        let surface = emit_permutahedron_loss(&SwapConfig::new(kind, PERMUTAHEDRON_BETA)?)?;
        print!("{:<13}", kind.name());
        for v in vertices {
            print!(" {v:?}={:<8.4}", surface.loss_at(v).unwrap_or(f64::NAN));
        }
        let (lo, min) = surface.min();
        let (hi, max) = surface.max();
        println!(" min {min:.4} at {lo:?}, max {max:.4} at {hi:?}");
    }
    Ok(())
}
